//! Channels, compositions, confusability graphs and codes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{validation, Error, Result};
use crate::operator::{trace_of_product, DensityOperator, C64};

pub const PROB_TOL: f64 = 1e-10;
/// `Tr(S_x S_x')` above this value makes two inputs confusable.
pub const ADJACENCY_THRESHOLD: f64 = 1e-12;

/// A probability distribution on `{0, …, k−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    probs: Vec<f64>,
}

impl Composition {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return validation("composition over an empty alphabet");
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return validation("composition entries must be finite and non-negative");
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return validation(format!("composition must sum to 1, got {sum}"));
        }
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, at: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Indices with positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// `max_i |p_i − q_i|`.
    pub fn distance(&self, other: &Composition) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// One distribution over `to_size` symbols per conditioning symbol. Rows
/// whose conditioning symbol never occurs are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalComposition {
    to_size: usize,
    rows: Vec<Option<Composition>>,
}

impl ConditionalComposition {
    pub fn new(rows: Vec<Composition>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return validation("conditional composition needs at least one row");
        };
        let to_size = first.len();
        if rows.iter().any(|r| r.len() != to_size) {
            return validation("conditional composition rows have different lengths");
        }
        Ok(Self {
            to_size,
            rows: rows.into_iter().map(Some).collect(),
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(Composition::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn with_absent(to_size: usize, rows: Vec<Option<Composition>>) -> Result<Self> {
        if rows.iter().flatten().any(|r| r.len() != to_size) {
            return validation("conditional composition rows have different lengths");
        }
        Ok(Self { to_size, rows })
    }

    pub fn from_size(&self) -> usize {
        self.rows.len()
    }

    pub fn to_size(&self) -> usize {
        self.to_size
    }

    pub fn row(&self, a: usize) -> Option<&Composition> {
        self.rows[a].as_ref()
    }

    pub fn rows(&self) -> &[Option<Composition>] {
        &self.rows
    }

    /// `V(y|x)`, zero for absent rows.
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from].as_ref().map_or(0.0, |r| r.get(to))
    }

    /// Marginal `Σ_x P(x) V(·|x)`.
    pub fn output_distribution(&self, p: &Composition) -> Result<Composition> {
        if p.len() != self.from_size() {
            return Err(Error::DimensionMismatch {
                expected: self.from_size(),
                got: p.len(),
            });
        }
        let mut q = vec![0.0; self.to_size];
        for x in p.support() {
            let row = self.rows[x].as_ref().ok_or_else(|| {
                Error::Validation(format!("row {x} is absent but has positive weight"))
            })?;
            for (y, qy) in q.iter_mut().enumerate() {
                *qy += p.get(x) * row.get(y);
            }
        }
        Composition::new(q)
    }

    /// Bayes reversal: given `P` on the conditioning alphabet, returns the
    /// output marginal `P̂ = PV` and the reverse channel `V̂(x|y) = P(x)V(y|x)/P̂(y)`.
    pub fn reverse(&self, p: &Composition) -> Result<(Composition, ConditionalComposition)> {
        let phat = self.output_distribution(p)?;
        let rows = (0..self.to_size)
            .map(|y| {
                if phat.get(y) <= 0.0 {
                    return Ok(None);
                }
                let row: Vec<f64> = (0..self.from_size())
                    .map(|x| {
                        if p.get(x) > 0.0 {
                            p.get(x) * self.prob(x, y) / phat.get(y)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let s: f64 = row.iter().sum();
                Composition::new(row.iter().map(|v| v / s).collect()).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((
            phat,
            ConditionalComposition::with_absent(self.from_size(), rows)?,
        ))
    }
}

/// A classical-quantum channel: one density operator per input symbol.
#[derive(Debug, Clone)]
pub struct CQChannel {
    dim: usize,
    states: Vec<DensityOperator>,
}

impl CQChannel {
    pub fn new(states: Vec<DensityOperator>) -> Result<Self> {
        let Some(first) = states.first() else {
            return validation("channel needs at least one input symbol");
        };
        let dim = first.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self { dim, states })
    }

    pub fn alphabet_size(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &DensityOperator {
        &self.states[x]
    }

    pub fn is_pure(&self) -> bool {
        self.states.iter().all(DensityOperator::is_pure)
    }

    /// `Tr(S_x S_x')`.
    pub fn overlap(&self, x: usize, xp: usize) -> f64 {
        trace_of_product(self.states[x].matrix(), self.states[xp].matrix())
            .expect("states share a dimension")
            .re
    }

    pub(crate) fn check_composition(&self, p: &Composition) -> Result<()> {
        if p.len() != self.alphabet_size() {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet_size(),
                got: p.len(),
            });
        }
        Ok(())
    }
}

/// Embeds a row-stochastic matrix `W(y|x)` as the commuting channel
/// `S_x = diag(W(·|x))`.
pub fn from_classical(w: &[Vec<f64>]) -> Result<CQChannel> {
    let Some(first) = w.first() else {
        return validation("stochastic matrix has no rows");
    };
    let ny = first.len();
    let states = w
        .iter()
        .enumerate()
        .map(|(x, row)| {
            if row.len() != ny {
                return validation(format!("row {x} has {} entries, expected {ny}", row.len()));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return validation(format!("row {x} has negative or non-finite entries"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PROB_TOL {
                return validation(format!("row {x} sums to {s}, expected 1"));
            }
            DensityOperator::diagonal(row)
        })
        .collect::<Result<Vec<_>>>()?;
    CQChannel::new(states)
}

/// Channel with rank-one states `|ψ_x⟩⟨ψ_x|`.
pub fn pure_state_channel(vectors: &[Vec<C64>]) -> Result<CQChannel> {
    let states = vectors
        .iter()
        .map(|v| DensityOperator::pure(v))
        .collect::<Result<Vec<_>>>()?;
    CQChannel::new(states)
}

/// Simple undirected graph on `{0, …, n−1}` without loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusabilityGraph {
    n: usize,
    adj: Vec<bool>,
}

impl ConfusabilityGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return validation("graph needs at least one vertex");
        }
        let mut adj = vec![false; n * n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return validation(format!("edge ({i},{j}) out of range for {n} vertices"));
            }
            if i == j {
                return validation(format!("self-loop at vertex {i}"));
            }
            adj[i * n + j] = true;
            adj[j * n + i] = true;
        }
        Ok(Self { n, adj })
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[]).expect("valid")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacent(i, j))
            .collect()
    }

    /// Distinct vertices that must receive orthogonal vectors.
    pub fn non_adjacent_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.adjacent(i, j))
            .collect()
    }
}

/// `x ~ x'` iff `x ≠ x'` and `Tr(S_x S_x') > ADJACENCY_THRESHOLD`.
pub fn confusability_graph(c: &CQChannel) -> ConfusabilityGraph {
    let n = c.alphabet_size();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if c.overlap(i, j) > ADJACENCY_THRESHOLD {
                edges.push((i, j));
            }
        }
    }
    ConfusabilityGraph::from_edges(n, &edges).expect("edges in range")
}

/// A block code: distinct codewords of a common length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    block_length: usize,
    alphabet_size: usize,
    words: Vec<Vec<usize>>,
}

impl Code {
    pub fn new(alphabet_size: usize, words: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = words.first() else {
            return validation("code has no codewords");
        };
        let n = first.len();
        if n == 0 {
            return validation("codewords must be non-empty");
        }
        for (m, w) in words.iter().enumerate() {
            if w.len() != n {
                return validation(format!("codeword {m} has length {}, expected {n}", w.len()));
            }
            if let Some(&s) = w.iter().find(|&&s| s >= alphabet_size) {
                return validation(format!("codeword {m} uses symbol {s} outside the alphabet"));
            }
        }
        let mut sorted = words.clone();
        sorted.sort();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return validation("codewords must be distinct");
        }
        Ok(Self {
            block_length: n,
            alphabet_size,
            words,
        })
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// `log M / n` in nats.
    pub fn rate(&self) -> f64 {
        (self.size() as f64).ln() / self.block_length as f64
    }
}

/// Empirical symbol frequencies.
pub fn composition_of(word: &[usize], alphabet_size: usize) -> Result<Composition> {
    if word.is_empty() {
        return validation("empty word");
    }
    let mut counts = vec![0usize; alphabet_size];
    for &s in word {
        if s >= alphabet_size {
            return validation(format!(
                "symbol {s} out of range for alphabet of size {alphabet_size}"
            ));
        }
        counts[s] += 1;
    }
    let n = word.len() as f64;
    Ok(Composition {
        probs: counts.iter().map(|&c| c as f64 / n).collect(),
    })
}

/// Row `a` holds the empirical distribution of `word` on the positions where
/// `anchor` equals `a`.
pub fn conditional_composition_of(
    word: &[usize],
    word_alphabet: usize,
    anchor: &[usize],
    anchor_alphabet: usize,
) -> Result<ConditionalComposition> {
    if word.len() != anchor.len() {
        return validation(format!(
            "length mismatch: word {} vs anchor {}",
            word.len(),
            anchor.len()
        ));
    }
    let mut counts = vec![vec![0usize; word_alphabet]; anchor_alphabet];
    for (&x, &a) in word.iter().zip(anchor) {
        if x >= word_alphabet || a >= anchor_alphabet {
            return validation("symbol out of range");
        }
        counts[a][x] += 1;
    }
    let rows = counts
        .into_iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            (total > 0).then(|| Composition {
                probs: row.iter().map(|&c| c as f64 / total as f64).collect(),
            })
        })
        .collect();
    ConditionalComposition::with_absent(word_alphabet, rows)
}

/// `I(P,V) = Σ P(x)V(y|x) log[V(y|x) / Σ_x' P(x')V(y|x')]` in nats.
pub fn mutual_information(p: &Composition, v: &ConditionalComposition) -> Result<f64> {
    let q = v.output_distribution(p)?;
    let mut total = 0.0;
    for x in p.support() {
        for y in 0..v.to_size() {
            let vy = v.prob(x, y);
            if vy > 0.0 {
                total += p.get(x) * vy * (vy / q.get(y)).ln();
            }
        }
    }
    Ok(total.max(0.0))
}

/// All compositions on `k` symbols whose entries are multiples of `step`.
pub fn simplex_grid(k: usize, step: f64) -> Result<Vec<Composition>> {
    let parts = (1.0 / step).round();
    if !(step > 0.0) || parts < 1.0 || ((parts * step) - 1.0).abs() > 1e-9 {
        return validation(format!("grid step {step} must divide 1"));
    }
    let parts = parts as usize;
    let mut out = Vec::new();
    let mut current = vec![0usize; k];
    fn rec(i: usize, left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Composition>) {
        let k = cur.len();
        if i == k - 1 {
            cur[i] = left;
            out.push(Composition {
                probs: cur.iter().map(|&c| c as f64 / parts as f64).collect(),
            });
            return;
        }
        for c in (0..=left).rev() {
            cur[i] = c;
            rec(i + 1, left - c, parts, cur, out);
        }
    }
    if k == 0 {
        return validation("empty alphabet");
    }
    rec(0, parts, parts, &mut current, &mut out);
    Ok(out)
}

/// `count` seeded samples from the flat Dirichlet distribution on `k` symbols.
pub fn dirichlet_samples(k: usize, count: usize, seed: u64) -> Vec<Composition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(1.0, 1.0).expect("valid shape");
    (0..count)
        .map(|_| {
            let g: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
            let s: f64 = g.iter().sum();
            Composition {
                probs: g.iter().map(|v| v / s).collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn classical_embedding() {
        let ch = from_classical(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(ch.overlap(0, 1), 0.0);
        let bsc = from_classical(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert_abs_diff_eq!(bsc.state(0).matrix()[(0, 0)].re, 0.9);
        assert_abs_diff_eq!(bsc.state(1).matrix()[(0, 0)].re, 0.1);
        assert!(from_classical(&[vec![0.5, 0.6]]).is_err());
        assert!(from_classical(&[vec![1.2, -0.2]]).is_err());
    }

    #[test]
    fn graph_matches_support_overlap_of_classical_channel() {
        let w = vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.3, 0.7, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.2, 0.0, 0.0, 0.8],
        ];
        let g = confusability_graph(&from_classical(&w).unwrap());
        for x in 0..4 {
            for xp in 0..4 {
                let share = x != xp && (0..4).any(|y| w[x][y] > 0.0 && w[xp][y] > 0.0);
                assert_eq!(g.adjacent(x, xp), share, "pair ({x},{xp})");
            }
        }
    }

    #[test]
    fn pure_state_channels() {
        let basis = pure_state_channel(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]]).unwrap();
        assert_eq!(confusability_graph(&basis), ConfusabilityGraph::empty(2));
        let theta = 0.3_f64;
        let ch = pure_state_channel(&[vec![c(1.0), c(0.0)], vec![c(theta.cos()), c(theta.sin())]])
            .unwrap();
        assert_abs_diff_eq!(ch.overlap(0, 1), theta.cos().powi(2), epsilon = 1e-14);
        let same = pure_state_channel(&vec![vec![c(0.6), c(0.8)]; 3]).unwrap();
        assert_eq!(confusability_graph(&same), ConfusabilityGraph::complete(3));
        assert!(pure_state_channel(&[vec![c(1.0), c(1.0)]]).is_err());
    }

    #[test]
    fn pentagon_channel_has_cycle_graph() {
        // umbrella: vertex i orthogonal to i±2
        let cos_t = (1.0 / 5f64.sqrt()).sqrt();
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let vecs: Vec<Vec<C64>> = (0..5)
            .map(|i| {
                let phi = 4.0 * std::f64::consts::PI * i as f64 / 5.0;
                vec![c(cos_t), c(sin_t * phi.cos()), c(sin_t * phi.sin())]
            })
            .collect();
        let ch = pure_state_channel(&vecs).unwrap();
        assert_eq!(
            confusability_graph(&ch),
            ConfusabilityGraph::cycle(5).relabel(&[0, 3, 1, 4, 2])
        );
    }

    impl ConfusabilityGraph {
        fn relabel(&self, perm: &[usize]) -> ConfusabilityGraph {
            let edges: Vec<_> = self
                .edges()
                .iter()
                .map(|&(i, j)| (perm[i], perm[j]))
                .collect();
            ConfusabilityGraph::from_edges(self.n, &edges).unwrap()
        }
    }

    #[test]
    fn composition_counting() {
        assert_eq!(
            composition_of(&[0, 0, 1, 1], 2).unwrap().probs(),
            &[0.5, 0.5]
        );
        assert_eq!(composition_of(&[0, 0, 0], 2).unwrap().probs(), &[1.0, 0.0]);
        assert_eq!(
            composition_of(&[0, 1, 2, 0], 3).unwrap().probs(),
            &[0.5, 0.25, 0.25]
        );
        assert!(composition_of(&[0, 3], 3).is_err());
    }

    #[test]
    fn conditional_composition_counting() {
        let v = conditional_composition_of(&[0, 1, 0, 1], 2, &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(v.row(0).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(v.row(1).unwrap().probs(), &[0.5, 0.5]);
        let word = [0, 2, 1, 0];
        let v = conditional_composition_of(&word, 3, &[1, 1, 1, 1], 2).unwrap();
        assert!(v.row(0).is_none());
        assert_eq!(v.row(1).unwrap(), &composition_of(&word, 3).unwrap());
        let v = conditional_composition_of(&[0, 0, 1, 1], 2, &[0, 1, 0, 1], 2).unwrap();
        assert_eq!(v.prob(0, 0), 0.5);
        assert_eq!(v.prob(1, 0), 0.5);
        assert!(conditional_composition_of(&[0, 1], 2, &[0], 1).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let p = Composition::uniform(2);
        let indep =
            ConditionalComposition::from_rows(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&p, &indep).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let id = ConditionalComposition::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&p, &id).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        // direct summation: log 2 − h(0.25)
        let bsc =
            ConditionalComposition::from_rows(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let oracle = 0.5 * (0.75 * (0.75f64 / 0.5).ln() + 0.25 * (0.25f64 / 0.5).ln()) * 2.0;
        assert_abs_diff_eq!(
            mutual_information(&p, &bsc).unwrap(),
            oracle,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(oracle, 0.130812, epsilon = 1e-6);
    }

    #[test]
    fn grid_and_samples() {
        let g = simplex_grid(3, 0.05).unwrap();
        assert_eq!(g.len(), 231);
        assert!(g
            .iter()
            .all(|c| (c.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12));
        assert!(simplex_grid(3, 0.3).is_err());
        let s = dirichlet_samples(5, 10, 1);
        assert_eq!(s, dirichlet_samples(5, 10, 1));
        assert_eq!(s.len(), 10);
    }

    fn random_stochastic(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| {
                let r: Vec<f64> = (0..cols).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = r.iter().sum();
                r.iter().map(|v| v / s).collect()
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mutual_information_bounds_and_chain_identity(seed in 0u64..100_000, nx in 1usize..5, na in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = dirichlet_samples(nx, 1, seed).remove(0);
            let vhat = ConditionalComposition::from_rows(random_stochastic(&mut rng, nx, na)).unwrap();
            let i = mutual_information(&p, &vhat).unwrap();
            prop_assert!(i >= 0.0);
            prop_assert!(i <= p.entropy().min((na as f64).ln()) + 1e-12);
            let (phat, v) = vhat.reverse(&p).unwrap();
            let j = mutual_information(&phat, &v).unwrap();
            prop_assert!((i - j).abs() <= 1e-10);
        }

        #[test]
        fn graph_depends_only_on_support_pattern(seed in 0u64..100_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = random_stochastic(&mut rng, 4, 4);
            for row in w.iter_mut() {
                for v in row.iter_mut() {
                    if rng.random::<f64>() < 0.4 { *v = 0.0; }
                }
                if row.iter().all(|&v| v == 0.0) { row[0] = 1.0; }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            let perturbed: Vec<Vec<f64>> = w.iter().map(|row| {
                let r: Vec<f64> = row.iter().map(|&v| if v > 0.0 { v * (0.5 + rng.random::<f64>()) } else { 0.0 }).collect();
                let s: f64 = r.iter().sum();
                r.iter().map(|v| v / s).collect()
            }).collect();
            prop_assert_eq!(
                confusability_graph(&from_classical(&w).unwrap()),
                confusability_graph(&from_classical(&perturbed).unwrap())
            );
        }
    }
}
