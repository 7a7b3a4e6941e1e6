//! Bounds built from families of channels used under a conditional
//! composition constraint: the conditional sphere packing exponent, the
//! umbrella-type bound through admissible auxiliary channels, its distance
//! (Elias-type) form, and brute-force code oracles.

use crate::channel::{
    composition_of, mutual_information, CQChannel, Code, Composition, ConditionalComposition,
};
use crate::error::{validation, Error, Result};
use crate::exponent::{e0cc, rinf, ExponentValue, RhoSweep, Status, FEASIBILITY_TOL};
use crate::operator::{sqrt_overlap, ComplexMatrix, DensityOperator, HermitianOperator, C64};
use crate::par::{map_slice, Execution};

pub const ADMISSIBILITY_SLACK: f64 = 1e-10;
pub const FACTORIZATION_TOL: f64 = 1e-10;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const MAX_EXTRACT_LENGTH: usize = 12;
pub const MAX_EXTRACT_ALPHABET: usize = 3;
pub const MAX_EXTRACT_WORDS: usize = 4096;
pub const MAX_BRUTE_LENGTH: usize = 6;
pub const MAX_BRUTE_WORDS: usize = 16;
const INTEGRALITY_TOL: f64 = 1e-9;

/// One channel per state `a`, all on the same input alphabet.
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    channels: Vec<CQChannel>,
}

impl ChannelFamily {
    pub fn new(channels: Vec<CQChannel>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return validation("channel family is empty");
        };
        let k = first.alphabet_size();
        if let Some(bad) = channels.iter().find(|c| c.alphabet_size() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: bad.alphabet_size(),
            });
        }
        Ok(Self { channels })
    }

    pub fn single(channel: CQChannel) -> Self {
        Self {
            channels: vec![channel],
        }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channels(&self) -> &[CQChannel] {
        &self.channels
    }

    pub fn channel(&self, a: usize) -> &CQChannel {
        &self.channels[a]
    }

    pub fn alphabet_size(&self) -> usize {
        self.channels[0].alphabet_size()
    }

    pub fn is_pure(&self) -> bool {
        self.channels.iter().all(CQChannel::is_pure)
    }
}

/// Symmetric, non-negative symbol distance with zero diagonal; entries may
/// be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceFn {
    d: Vec<Vec<f64>>,
}

impl DistanceFn {
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self> {
        let k = d.len();
        if k == 0 {
            return validation("distance over an empty alphabet");
        }
        for (i, row) in d.iter().enumerate() {
            if row.len() != k {
                return validation(format!(
                    "distance row {i} has {} entries, expected {k}",
                    row.len()
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() || v < 0.0 {
                    return validation(format!("distance d({i},{j}) = {v} is not in [0, ∞]"));
                }
                if v != d[j][i] {
                    return validation(format!("distance is not symmetric at ({i},{j})"));
                }
            }
            if row[i] != 0.0 {
                return validation(format!("distance d({i},{i}) must be zero"));
            }
        }
        Ok(Self { d })
    }

    pub fn hamming(k: usize) -> Self {
        Self {
            d: (0..k)
                .map(|i| (0..k).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
                .collect(),
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.d.len()
    }

    pub fn get(&self, x: usize, xp: usize) -> f64 {
        self.d[x][xp]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.d
    }

    /// Additive extension to sequences; `+∞` iff some position is `+∞`.
    pub fn sequence_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        a.iter().zip(b).map(|(&x, &y)| self.d[x][y]).sum()
    }
}

fn combine(parts: impl IntoIterator<Item = (f64, ExponentValue)>) -> ExponentValue {
    let mut out = ExponentValue::exact(0.0);
    for (w, e) in parts {
        out.value += w * e.value;
        out.iterations += e.iterations;
        out.gap_estimate += w * e.gap_estimate;
        if e.status != Status::Converged && out.status == Status::Converged {
            out.status = e.status;
        }
    }
    out
}

fn check_conditional(
    fam: &ChannelFamily,
    v: &ConditionalComposition,
    p: &Composition,
) -> Result<()> {
    if p.len() != fam.len() {
        return Err(Error::DimensionMismatch {
            expected: fam.len(),
            got: p.len(),
        });
    }
    if v.from_size() != fam.len() {
        return Err(Error::DimensionMismatch {
            expected: fam.len(),
            got: v.from_size(),
        });
    }
    if v.to_size() != fam.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: fam.alphabet_size(),
            got: v.to_size(),
        });
    }
    for a in p.support() {
        if v.row(a).is_none() {
            return validation(format!(
                "conditional composition has no row for state {a} of positive weight"
            ));
        }
    }
    Ok(())
}

fn active_terms<'a>(
    fam: &'a ChannelFamily,
    v: &'a ConditionalComposition,
    p: &'a Composition,
) -> Vec<(&'a CQChannel, &'a Composition, f64)> {
    p.support()
        .map(|a| (fam.channel(a), v.row(a).expect("checked"), p.get(a)))
        .collect()
}

/// `Σ_a P(a) E₀^cc(C_a, ρ, V(·|a))`.
pub fn e0cc_conditional(
    fam: &ChannelFamily,
    rho: f64,
    v: &ConditionalComposition,
    p: &Composition,
) -> Result<ExponentValue> {
    check_conditional(fam, v, p)?;
    let parts = active_terms(fam, v, p)
        .into_iter()
        .map(|(c, row, w)| Ok((w, e0cc(c, rho, row)?.exponent)))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(parts))
}

/// `Σ_a P(a) R_∞(C_a, V(·|a))`.
pub fn rinf_conditional(
    fam: &ChannelFamily,
    v: &ConditionalComposition,
    p: &Composition,
) -> Result<ExponentValue> {
    check_conditional(fam, v, p)?;
    let parts = active_terms(fam, v, p)
        .into_iter()
        .map(|(c, row, w)| Ok((w, rinf(c, row)?.exponent)))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(parts))
}

/// `sup_{ρ≥0} [E₀^cc({C_a}, ρ, V|P) − ρ(R − ε)]`, `+∞` below the
/// conditional `R_∞`.
pub fn espcc_conditional(
    fam: &ChannelFamily,
    r: f64,
    v: &ConditionalComposition,
    p: &Composition,
    epsilon: f64,
) -> Result<ExponentValue> {
    if !(r > 0.0) || !r.is_finite() {
        return validation(format!("rate must be positive, got {r}"));
    }
    if !(epsilon > 0.0 && epsilon < r) {
        return validation(format!("epsilon must lie in (0, R), got {epsilon}"));
    }
    let target = r - epsilon;
    let ri = rinf_conditional(fam, v, p)?.value;
    if target < ri - FEASIBILITY_TOL {
        return Ok(ExponentValue::infinite());
    }
    RhoSweep::weighted(active_terms(fam, v, p))?.sup_linear(target, epsilon, ri)
}

/// Outcome of an admissibility check. `worst` is the pair with the largest
/// `lhs − rhs`, if the alphabet has at least two symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    pub worst: Option<(usize, usize)>,
    pub violation: f64,
}

fn admissibility(
    k: usize,
    mut excess: impl FnMut(usize, usize) -> Result<f64>,
) -> Result<Admissibility> {
    let mut worst = None;
    let mut violation = f64::NEG_INFINITY;
    for x in 0..k {
        for xp in (x + 1)..k {
            let e = excess(x, xp)?;
            if e > violation {
                violation = e;
                worst = Some((x, xp));
            }
        }
    }
    Ok(Admissibility {
        admissible: violation <= ADMISSIBILITY_SLACK,
        worst,
        violation,
    })
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 1.0) || !rho.is_finite() {
        return validation(format!("rho must be a finite value ≥ 1, got {rho}"));
    }
    Ok(())
}

/// `|⟨ψ̃_x|ψ̃_x′⟩| ≤ |⟨ψ_x|ψ_x′⟩|^{1/ρ}` for all pairs.
pub fn gamma_admissible_pure(base: &CQChannel, aux: &CQChannel, rho: f64) -> Result<Admissibility> {
    check_rho(rho)?;
    if !base.is_pure() || !aux.is_pure() {
        return validation("pure-state admissibility needs pure-state channels");
    }
    if base.alphabet_size() != aux.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: base.alphabet_size(),
            got: aux.alphabet_size(),
        });
    }
    admissibility(base.alphabet_size(), |x, xp| {
        let lhs = aux.overlap(x, xp).max(0.0).sqrt();
        let rhs = base.overlap(x, xp).max(0.0).sqrt().powf(1.0 / rho);
        Ok(lhs - rhs)
    })
}

/// `Tr √S̃_x √S̃_x′ ≤ e^{−d(x,x′)/ρ}` for all pairs.
pub fn gamma_admissible_distance(
    aux: &CQChannel,
    d: &DistanceFn,
    rho: f64,
) -> Result<Admissibility> {
    check_rho(rho)?;
    if aux.alphabet_size() != d.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: d.alphabet_size(),
            got: aux.alphabet_size(),
        });
    }
    admissibility(aux.alphabet_size(), |x, xp| {
        let lhs = sqrt_overlap(aux.state(x), aux.state(xp))?;
        Ok(lhs - (-d.get(x, xp) / rho).exp())
    })
}

/// Pure-state channel whose amplitude overlaps are `|⟨ψ_x|ψ_x′⟩|^{1/ρ}`
/// (phases kept), shrunk towards orthogonality when that Gram matrix is not
/// positive semidefinite. The result is always admissible at `ρ`.
pub fn boundary_aux_channel(base: &CQChannel, rho: f64) -> Result<CQChannel> {
    check_rho(rho)?;
    if !base.is_pure() {
        return validation("boundary auxiliary channel needs a pure-state base channel");
    }
    let k = base.alphabet_size();
    let psi: Vec<Vec<C64>> = base
        .states()
        .iter()
        .map(DensityOperator::principal_vector)
        .collect();
    let mut gram = ComplexMatrix::from_fn(k, k, |i, j| {
        let g: C64 = psi[i].iter().zip(&psi[j]).map(|(a, b)| a.conj() * b).sum();
        if i == j || g.norm() == 0.0 {
            return if i == j { C64::new(1.0, 0.0) } else { g };
        }
        g * g.norm().powf(1.0 / rho - 1.0)
    });
    let eye = ComplexMatrix::identity(k, k);
    let min_eig =
        |m: &ComplexMatrix| HermitianOperator::new(m.clone()).map(|h| h.eig().eigenvalues[0]);
    if min_eig(&gram)? < 0.0 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if min_eig(&(&gram * C64::new(mid, 0.0) + &eye * C64::new(1.0 - mid, 0.0)))? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        gram = &gram * C64::new(lo, 0.0) + &eye * C64::new(1.0 - lo, 0.0);
    }
    let es = HermitianOperator::new(gram)?.eig();
    let vectors: Vec<Vec<C64>> = (0..k)
        .map(|x| {
            let v: Vec<C64> = (0..k)
                .map(|m| es.eigenvectors[(x, m)].conj() * es.eigenvalues[m].max(0.0).sqrt())
                .collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter().map(|z| z / n).collect()
        })
        .collect();
    crate::channel::pure_state_channel(&vectors)
}

/// One point of the infimum defining the umbrella bound: `ρ ≥ 1`, auxiliary
/// channels `C̃_a`, and a factorization `P̂V = P`.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub rho: f64,
    pub phat: Composition,
    /// `V(x|a)`, rows indexed by the auxiliary state `a`.
    pub v: ConditionalComposition,
    pub aux: ChannelFamily,
}

impl Candidate {
    /// The factorization `A = {a}`, `V(·|a) = P`, with one auxiliary channel.
    pub fn degenerate(rho: f64, aux: CQChannel, p: &Composition) -> Result<Self> {
        Ok(Self {
            rho,
            phat: Composition::new(vec![1.0])?,
            v: ConditionalComposition::new(vec![p.clone()])?,
            aux: ChannelFamily::single(aux),
        })
    }

    fn check_structure(&self, p: &Composition) -> std::result::Result<(), String> {
        let na = self.aux.len();
        if self.phat.len() != na || self.v.from_size() != na {
            return Err(format!(
                "{} auxiliary channels but P̂ has {} and V has {} rows",
                na,
                self.phat.len(),
                self.v.from_size()
            ));
        }
        if self.v.to_size() != p.len() || self.aux.alphabet_size() != p.len() {
            return Err("auxiliary alphabet does not match the composition".into());
        }
        let marginal = self
            .v
            .output_distribution(&self.phat)
            .map_err(|e| e.to_string())?;
        let dev = marginal.distance(p);
        if dev > FACTORIZATION_TOL {
            return Err(format!("P̂V differs from P by {dev:.3e}"));
        }
        Ok(())
    }

    fn mutual_information(&self) -> Result<f64> {
        mutual_information(&self.phat, &self.v)
    }
}

/// Best candidate objective. This is an upper bound on the infimum over all
/// candidates, hence a valid upper bound on the reliability function (or
/// normalized minimum distance).
#[derive(Debug, Clone)]
pub struct CandidateBound {
    pub value: ExponentValue,
    pub best: usize,
    /// Objective of every admissible candidate, `None` for rejected ones.
    pub objectives: Vec<Option<ExponentValue>>,
    /// Index and reason for each rejected candidate.
    pub rejected: Vec<(usize, String)>,
    pub epsilon: f64,
}

fn candidate_objective(c: &Candidate, r: f64, epsilon: f64) -> Result<ExponentValue> {
    let reduced = r - c.mutual_information()?;
    if reduced <= epsilon {
        return Ok(ExponentValue::infinite());
    }
    let mut e = espcc_conditional(&c.aux, reduced, &c.v, &c.phat, epsilon)?;
    e.value = c.rho * (e.value + reduced);
    e.gap_estimate *= c.rho;
    Ok(e)
}

fn best_candidate(
    r: f64,
    p: &Composition,
    candidates: &[Candidate],
    epsilon: f64,
    exec: Execution,
    admissible: impl Fn(&Candidate) -> Result<Admissibility> + Sync,
) -> Result<CandidateBound> {
    if !(r > 0.0) || !r.is_finite() {
        return validation(format!("rate must be positive, got {r}"));
    }
    if !(epsilon > 0.0) {
        return validation(format!("epsilon must be positive, got {epsilon}"));
    }
    let screened: Vec<std::result::Result<(), String>> = candidates
        .iter()
        .map(|c| {
            check_rho(c.rho).map_err(|e| e.to_string())?;
            c.check_structure(p)?;
            let adm = admissible(c).map_err(|e| e.to_string())?;
            if adm.admissible {
                Ok(())
            } else {
                let (x, xp) = adm.worst.expect("violations need a pair");
                Err(format!(
                    "not admissible at rho = {}: pair ({x},{xp}) exceeds the bound by {:.3e}",
                    c.rho, adm.violation
                ))
            }
        })
        .collect();
    let rejected: Vec<(usize, String)> = screened
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.as_ref().err().map(|e| (i, e.clone())))
        .collect();
    if rejected.len() == candidates.len() {
        let detail: Vec<String> = rejected
            .iter()
            .map(|(i, e)| format!("candidate {i}: {e}"))
            .collect();
        return validation(format!("no admissible candidate ({})", detail.join("; ")));
    }
    let objectives = map_slice(exec, &(0..candidates.len()).collect::<Vec<_>>(), |&i| {
        screened[i]
            .is_ok()
            .then(|| candidate_objective(&candidates[i], r, epsilon))
    })
    .into_iter()
    .map(Option::transpose)
    .collect::<Result<Vec<_>>>()?;
    let (best, value) = objectives
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.map(|o| (i, o)))
        .fold(None::<(usize, ExponentValue)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.value <= o.value => acc,
            _ => Some((i, o)),
        })
        .expect("at least one admissible candidate");
    Ok(CandidateBound {
        value,
        best,
        objectives,
        rejected,
        epsilon,
    })
}

/// Umbrella bound `min ρ[E_sp^cc({C̃_a}, R − I(P̂,V) − ε, V|P̂) + R − I(P̂,V)]`
/// over the supplied candidates for a pure-state channel.
pub fn espucc(
    c: &CQChannel,
    r: f64,
    p: &Composition,
    candidates: &[Candidate],
    epsilon: f64,
) -> Result<CandidateBound> {
    espucc_with(c, r, p, candidates, epsilon, Execution::default())
}

pub fn espucc_with(
    c: &CQChannel,
    r: f64,
    p: &Composition,
    candidates: &[Candidate],
    epsilon: f64,
    exec: Execution,
) -> Result<CandidateBound> {
    if !c.is_pure() {
        return validation("the umbrella bound needs a pure-state channel");
    }
    if p.len() != c.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: c.alphabet_size(),
            got: p.len(),
        });
    }
    best_candidate(r, p, candidates, epsilon, exec, |cand| {
        if !cand.aux.is_pure() {
            return validation("auxiliary channels must be pure-state");
        }
        let mut worst = Admissibility {
            admissible: true,
            worst: None,
            violation: f64::NEG_INFINITY,
        };
        for aux in cand.aux.channels() {
            let a = gamma_admissible_pure(c, aux, cand.rho)?;
            if a.violation > worst.violation {
                worst = a;
            }
        }
        Ok(worst)
    })
}

/// Candidates from the boundary auxiliary channel at each `ρ`, with the
/// degenerate factorization `V(·|a) = P`.
pub fn heuristic_candidates(
    c: &CQChannel,
    p: &Composition,
    rhos: &[f64],
) -> Result<Vec<Candidate>> {
    rhos.iter()
        .map(|&rho| Candidate::degenerate(rho, boundary_aux_channel(c, rho)?, p))
        .collect()
}

/// Distance form of the umbrella bound, with the shortcut `2ρR_∞({C̃_a},V|P̂)`
/// of the best pure-state candidate whose threshold `R_∞ + I(P̂,V)` lies
/// below `R`.
#[derive(Debug, Clone)]
pub struct EliasBound {
    pub bound: CandidateBound,
    /// `(value, threshold, candidate)`.
    pub shortcut: Option<(f64, f64, usize)>,
}

pub fn elias_distance_bound(
    d: &DistanceFn,
    r: f64,
    p: &Composition,
    candidates: &[Candidate],
    epsilon: f64,
) -> Result<EliasBound> {
    elias_distance_bound_with(d, r, p, candidates, epsilon, Execution::default())
}

pub fn elias_distance_bound_with(
    d: &DistanceFn,
    r: f64,
    p: &Composition,
    candidates: &[Candidate],
    epsilon: f64,
    exec: Execution,
) -> Result<EliasBound> {
    if p.len() != d.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: d.alphabet_size(),
            got: p.len(),
        });
    }
    let bound = best_candidate(r, p, candidates, epsilon, exec, |cand| {
        let mut worst = Admissibility {
            admissible: true,
            worst: None,
            violation: f64::NEG_INFINITY,
        };
        for aux in cand.aux.channels() {
            let a = gamma_admissible_distance(aux, d, cand.rho)?;
            if a.violation > worst.violation {
                worst = a;
            }
        }
        Ok(worst)
    })?;
    let mut shortcut: Option<(f64, f64, usize)> = None;
    for (i, cand) in candidates.iter().enumerate() {
        if bound.objectives[i].is_none() || !cand.aux.is_pure() {
            continue;
        }
        let ri = rinf_conditional(&cand.aux, &cand.v, &cand.phat)?.value;
        let threshold = ri + cand.mutual_information()?;
        let value = 2.0 * cand.rho * ri;
        if r > threshold && shortcut.is_none_or(|(v, _, _)| value < v) {
            shortcut = Some((value, threshold, i));
        }
    }
    Ok(EliasBound { bound, shortcut })
}

/// Anchor sequence and subcode with a common conditional composition.
#[derive(Debug, Clone)]
pub struct SubcodeExtraction {
    pub anchor: Vec<usize>,
    /// Indices into the code's word list.
    pub indices: Vec<usize>,
    /// Composition `P̂ = P V̂` of the anchor.
    pub phat: Composition,
    /// `V(x|a)`: conditional composition shared by every extracted word.
    pub v: ConditionalComposition,
    pub mutual_information: f64,
    /// `M · K / N`: `K` anchors are compatible with each word among the `N`
    /// anchors of composition `P̂`, so some anchor collects at least this many.
    pub averaging_bound: f64,
    /// `M / (n+1)^{|X||A|}`.
    pub type_counting_bound: f64,
    /// Distinct conditional compositions of the code's words given the anchor.
    pub n_types_observed: usize,
}

fn multinomial(counts: &[usize]) -> f64 {
    let mut out = 0.0;
    let mut total = 0usize;
    for &c in counts {
        for i in 1..=c {
            total += 1;
            out += (total as f64).ln() - (i as f64).ln();
        }
    }
    out.exp()
}

fn integral(v: f64) -> Result<usize> {
    let r = v.round();
    if (v - r).abs() > INTEGRALITY_TOL {
        return validation(format!("count {v} is not an integer"));
    }
    Ok(r as usize)
}

/// Exhaustive search over anchors `a` of composition `P̂ = P V̂` for the one
/// under which most codewords have joint type `P(x)V̂(a|x)` with `a`.
pub fn blahut_extract(code: &Code, vhat: &ConditionalComposition) -> Result<SubcodeExtraction> {
    let n = code.block_length();
    let kx = code.alphabet_size();
    let ka = vhat.to_size();
    let m = code.size();
    if n > MAX_EXTRACT_LENGTH
        || kx > MAX_EXTRACT_ALPHABET
        || ka > MAX_EXTRACT_ALPHABET
        || m > MAX_EXTRACT_WORDS
    {
        return Err(Error::Resource(format!(
            "extraction is limited to n ≤ {MAX_EXTRACT_LENGTH}, alphabets ≤ {MAX_EXTRACT_ALPHABET}, M ≤ {MAX_EXTRACT_WORDS}"
        )));
    }
    if vhat.from_size() != kx {
        return Err(Error::DimensionMismatch {
            expected: kx,
            got: vhat.from_size(),
        });
    }
    let p = composition_of(&code.words()[0], kx)?;
    for (i, w) in code.words().iter().enumerate() {
        if composition_of(w, kx)?.distance(&p) > 0.0 {
            return validation(format!("codeword {i} has a different composition"));
        }
    }
    let mut joint = vec![vec![0usize; ka]; kx];
    for x in p.support() {
        for a in 0..ka {
            joint[x][a] = integral(n as f64 * p.get(x) * vhat.prob(x, a))?;
        }
    }
    let anchor_counts: Vec<usize> = (0..ka)
        .map(|a| (0..kx).map(|x| joint[x][a]).sum())
        .collect();
    let (phat, v) = vhat.reverse(&p)?;

    let anchors = ka.pow(n as u32);
    let mut hits = vec![0u32; anchors];
    let mut anchor = vec![0usize; n];
    for w in code.words() {
        let positions: Vec<Vec<usize>> = (0..kx)
            .map(|x| (0..n).filter(|&i| w[i] == x).collect())
            .collect();
        place(
            &positions,
            &mut joint.clone(),
            0,
            0,
            &mut anchor,
            &mut |a| {
                hits[encode(a, ka)] += 1;
            },
        );
    }
    let (best_code, best_hits) =
        hits.iter().enumerate().fold(
            (0, 0u32),
            |acc, (i, &h)| if h > acc.1 { (i, h) } else { acc },
        );
    debug_assert!(best_hits > 0);
    let anchor = decode(best_code, ka, n);
    let mut types = std::collections::BTreeSet::new();
    let mut indices = Vec::new();
    for (i, w) in code.words().iter().enumerate() {
        let mut counts = vec![vec![0usize; ka]; kx];
        for (&x, &a) in w.iter().zip(&anchor) {
            counts[x][a] += 1;
        }
        if counts == joint {
            indices.push(i);
        }
        types.insert(counts);
    }
    let per_word: f64 = (0..kx).map(|x| multinomial(&joint[x])).product();
    let total = multinomial(&anchor_counts);
    Ok(SubcodeExtraction {
        anchor,
        indices,
        mutual_information: mutual_information(&p, vhat)?,
        phat,
        v,
        averaging_bound: m as f64 * per_word / total,
        type_counting_bound: m as f64 / ((n + 1) as f64).powi((kx * ka) as i32),
        n_types_observed: types.len(),
    })
}

/// Most significant digit first, so numeric order is lexicographic order.
fn encode(a: &[usize], base: usize) -> usize {
    a.iter().fold(0, |acc, &d| acc * base + d)
}

fn decode(mut code: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for i in (0..n).rev() {
        out[i] = code % base;
        code /= base;
    }
    out
}

/// Enumerates anchors that put exactly `joint[x][a]` copies of `a` on the
/// positions holding symbol `x`.
fn place(
    positions: &[Vec<usize>],
    left: &mut [Vec<usize>],
    x: usize,
    k: usize,
    anchor: &mut [usize],
    emit: &mut impl FnMut(&[usize]),
) {
    if x == positions.len() {
        emit(anchor);
        return;
    }
    if k == positions[x].len() {
        place(positions, left, x + 1, 0, anchor, emit);
        return;
    }
    for a in 0..left[x].len() {
        if left[x][a] > 0 {
            left[x][a] -= 1;
            anchor[positions[x][k]] = a;
            place(positions, left, x, k + 1, anchor, emit);
            left[x][a] += 1;
        }
    }
}

/// `−(1/n) log max_{m≠m′} ∏_i |⟨ψ_{x_{m,i}}|ψ_{x_{m′,i}}⟩|²`; `+∞` when every
/// pair is orthogonal or the code has one word.
pub fn overlap_exponent(code: &Code, c: &CQChannel) -> Result<f64> {
    if !c.is_pure() {
        return validation("overlap exponent needs a pure-state channel");
    }
    if code.alphabet_size() != c.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: c.alphabet_size(),
            got: code.alphabet_size(),
        });
    }
    let indices: Vec<usize> = (0..code.size()).collect();
    Ok(pairwise_exponent(code, &indices, |_, x, xp| {
        c.overlap(x, xp)
    }))
}

/// The same exponent for the words `indices` through the position-varying
/// channels `C̃_{a_i}`.
pub fn anchored_overlap_exponent(
    code: &Code,
    indices: &[usize],
    anchor: &[usize],
    fam: &ChannelFamily,
) -> Result<f64> {
    if anchor.len() != code.block_length() {
        return validation("anchor length differs from the block length");
    }
    if !fam.is_pure() {
        return validation("overlap exponent needs pure-state channels");
    }
    if anchor.iter().any(|&a| a >= fam.len()) {
        return validation("anchor uses a state outside the family");
    }
    Ok(pairwise_exponent(code, indices, |i, x, xp| {
        fam.channel(anchor[i]).overlap(x, xp)
    }))
}

fn pairwise_exponent(
    code: &Code,
    indices: &[usize],
    overlap: impl Fn(usize, usize, usize) -> f64,
) -> f64 {
    let words = code.words();
    let mut best = f64::NEG_INFINITY;
    for (k, &m) in indices.iter().enumerate() {
        for &mp in &indices[k + 1..] {
            let log: f64 = words[m]
                .iter()
                .zip(&words[mp])
                .enumerate()
                .map(|(i, (&x, &xp))| overlap(i, x, xp).clamp(0.0, 1.0).ln())
                .sum();
            best = best.max(log);
        }
    }
    -best / code.block_length() as f64
}

/// All words of length `n` with composition `p` (lexicographic order).
pub fn composition_class(n: usize, p: &Composition) -> Result<Vec<Vec<usize>>> {
    let counts = p
        .probs()
        .iter()
        .map(|&q| integral(n as f64 * q))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    fn rec(left: &mut [usize], n: usize, word: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if word.len() == n {
            out.push(word.clone());
            return;
        }
        for x in 0..left.len() {
            if left[x] > 0 {
                left[x] -= 1;
                word.push(x);
                rec(left, n, word, out);
                word.pop();
                left[x] += 1;
            }
        }
    }
    rec(&mut counts.clone(), n, &mut word, &mut out);
    Ok(out)
}

/// `max d_min / n` over codes of length `n`, composition `p` and
/// `⌈e^{nR}⌉` words; `+∞` for single-word codes.
pub fn brute_force_min_distance(n: usize, r: f64, p: &Composition, d: &DistanceFn) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return validation(format!("rate must be non-negative, got {r}"));
    }
    if p.len() != d.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: d.alphabet_size(),
            got: p.len(),
        });
    }
    let m = ((n as f64 * r).exp() * (1.0 - 1e-12)).ceil().max(1.0);
    if n == 0 || n > MAX_BRUTE_LENGTH || m > MAX_BRUTE_WORDS as f64 {
        return Err(Error::Resource(format!(
            "brute force is limited to 1 ≤ n ≤ {MAX_BRUTE_LENGTH} and at most {MAX_BRUTE_WORDS} words"
        )));
    }
    let m = m as usize;
    let class = composition_class(n, p)?;
    if class.len() < m {
        return validation(format!(
            "composition class has {} words, fewer than {m}",
            class.len()
        ));
    }
    if m == 1 {
        return Ok(f64::INFINITY);
    }
    let dist: Vec<Vec<f64>> = class
        .iter()
        .map(|a| class.iter().map(|b| d.sequence_distance(a, b)).collect())
        .collect();
    let mut levels: Vec<f64> = dist
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row[i + 1..].iter().cloned())
        .collect();
    levels.sort_by(|a, b| b.partial_cmp(a).expect("distances are not NaN"));
    levels.dedup();
    for t in levels {
        let mut chosen = Vec::with_capacity(m);
        if clique(&dist, t, m, 0, &mut chosen) {
            return Ok(t / n as f64);
        }
    }
    unreachable!("the smallest pairwise distance always admits a code")
}

fn clique(dist: &[Vec<f64>], t: f64, m: usize, from: usize, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == m {
        return true;
    }
    if dist.len() - from < m - chosen.len() {
        return false;
    }
    for i in from..dist.len() {
        if chosen.iter().all(|&j| dist[i][j] >= t) {
            chosen.push(i);
            if clique(dist, t, m, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}
