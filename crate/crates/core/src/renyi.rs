//! The function `μ(s) = log Tr A^{1−s} B^s` and binary hypothesis testing
//! exponents.
//!
//! With `A = Σ a_i |α_i⟩⟨α_i|` and `B = Σ b_j |β_j⟩⟨β_j|` restricted to their
//! supports, `Tr A^{1−s}B^s = Σ_ij |⟨α_i|β_j⟩|² a_i^{1−s} b_j^s`. All
//! derivatives in `s` are taken on this finite sum.

use crate::error::{validation, Error, Result};
use crate::operator::{commutator_norm, inner, ComplexMatrix, DensityOperator};

/// Minimum support overlap `Tr(A⁰B⁰)` for a well-defined `μ`.
pub const SUPPORT_OVERLAP_TOL: f64 = 1e-12;
pub const COMMUTATOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Term {
    log_weight: f64,
    log_a: f64,
    log_b: f64,
}

/// `μ_{A,B}` with eigensystems computed once at construction.
#[derive(Debug, Clone)]
pub struct MuFunction {
    a: DensityOperator,
    b: DensityOperator,
    terms: Vec<Term>,
}

impl MuFunction {
    pub fn new(a: &DensityOperator, b: &DensityOperator) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let (ea, eb) = (a.eig(), b.eig());
        let mut terms = Vec::new();
        let mut overlap = 0.0;
        for i in ea.support_indices() {
            let ai = ea.column(i);
            for j in eb.support_indices() {
                let w = inner(&ai, &eb.column(j)).norm_sqr();
                overlap += w;
                if w > 0.0 {
                    terms.push(Term {
                        log_weight: w.ln(),
                        log_a: ea.eigenvalues[i].ln(),
                        log_b: eb.eigenvalues[j].ln(),
                    });
                }
            }
        }
        if overlap <= SUPPORT_OVERLAP_TOL {
            return Err(Error::Domain(format!(
                "supports are disjoint (Tr A⁰B⁰ = {overlap:.3e})"
            )));
        }
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            terms,
        })
    }

    pub fn first(&self) -> &DensityOperator {
        &self.a
    }

    pub fn second(&self) -> &DensityOperator {
        &self.b
    }

    /// `(log T, T'/T, T''/T)` for `T(s) = Tr A^{1−s}B^s`.
    fn moments(&self, s: f64) -> (f64, f64, f64) {
        let exps: Vec<f64> = self
            .terms
            .iter()
            .map(|t| t.log_weight + (1.0 - s) * t.log_a + s * t.log_b)
            .collect();
        let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (t, e) in self.terms.iter().zip(&exps) {
            let w = (e - top).exp();
            let d = t.log_b - t.log_a;
            z += w;
            m1 += w * d;
            m2 += w * d * d;
        }
        (top + z.ln(), m1 / z, m2 / z)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return validation(format!("s must lie in (0,1), got {s}"));
    }
    Ok(())
}

/// `μ(s) = log Tr A^{1−s}B^s`.
pub fn mu(m: &MuFunction, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(m.moments(s).0.min(0.0))
}

pub fn mu_prime(m: &MuFunction, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(m.moments(s).1)
}

/// Always non-negative: it is the variance of `log b − log a` under the
/// tilted weights.
pub fn mu_double_prime(m: &MuFunction, s: f64) -> Result<f64> {
    check_s(s)?;
    let (_, m1, m2) = m.moments(s);
    Ok((m2 - m1 * m1).max(0.0))
}

/// Asymptotic error exponents of the two kinds for testing `A` against `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhtExponents {
    pub s: f64,
    pub exp_first_kind: f64,
    pub exp_second_kind: f64,
}

pub fn bht_exponents(m: &MuFunction, s: f64) -> Result<BhtExponents> {
    check_s(s)?;
    let (mu, d1, _) = m.moments(s);
    let mu = mu.min(0.0);
    let first = -mu + s * d1;
    let second = -mu - (1.0 - s) * d1;
    Ok(BhtExponents {
        s,
        exp_first_kind: first.max(0.0),
        exp_second_kind: second.max(0.0),
    })
}

/// `V_s = A^{1−s}B^s / Tr A^{1−s}B^s` for commuting `A`, `B`.
pub fn tilted_state(m: &MuFunction, s: f64) -> Result<DensityOperator> {
    check_s(s)?;
    let (a, b) = (m.a.matrix(), m.b.matrix());
    if commutator_norm(a, b) > COMMUTATOR_TOL {
        return Err(Error::Domain(
            "tilted state requires commuting operators".into(),
        ));
    }
    let pa =
        m.a.eig()
            .apply(|l| if l > 0.0 { l.powf(1.0 - s) } else { 0.0 });
    let pb = m.b.eig().apply(|l| if l > 0.0 { l.powf(s) } else { 0.0 });
    DensityOperator::normalized_from_psd(&pa * &pb)
}

/// `log A` on the support of `A`, zero on the kernel.
pub(crate) fn log_on_support(a: &DensityOperator) -> ComplexMatrix {
    let es = a.eig();
    let support = es.support_indices();
    let mut w = vec![0.0; es.dim()];
    for &i in &support {
        w[i] = es.eigenvalues[i].ln();
    }
    crate::operator::spectral_sum(&es.eigenvectors, &w)
}

/// Quantum relative entropy `Tr A(log A − log B)`, `+∞` when the support
/// of `A` is not contained in the support of `B`.
pub fn kl_divergence(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let eb = b.eig();
    let supp_b = eb.support_indices();
    // weight of A outside supp(B)
    let mut inside = 0.0;
    for &j in &supp_b {
        let v = eb.column(j);
        let av: Vec<_> = (0..a.dim())
            .map(|r| (0..a.dim()).map(|c| a.matrix()[(r, c)] * v[c]).sum())
            .collect();
        inside += inner(&v, &av).re;
    }
    if 1.0 - inside > 1e-12 {
        return Ok(f64::INFINITY);
    }
    let cross = crate::operator::trace_of_product(a.matrix(), &log_on_support(b))?.re;
    Ok((-a.von_neumann_entropy() - cross).max(0.0))
}
