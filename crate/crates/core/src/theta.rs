//! Theta-type graph functionals: Marton's `ϑ(G,P)`, the projector variant
//! `ϑ_sp(G,P)`, the worst-vertex `ϑ(G)`, and the purification reduction
//! from projector representations to vector representations.
//!
//! Representations are searched over an exact parametrization: vertex `x`
//! receives the range of `A_x = (I − Π_x) Z_x`, where `Π_x` projects onto the
//! ranges already assigned to earlier non-adjacent vertices. Every
//! parameter value therefore yields a valid representation, and the search
//! is an unconstrained smooth minimization solved by BFGS from seeded
//! random starts. All values are upper bounds certified by the returned
//! representation.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{simplex_grid, Composition, ConfusabilityGraph};
use crate::error::{validation, Error, Result};
use crate::operator::{inner, purify, DensityOperator, HermitianOperator, C64};
use crate::optimize::{bfgs, BfgsOptions};
use crate::par::{derive_seed, map_indexed, Execution};

pub const DEFAULT_RESTARTS: usize = 32;
/// Restarts per rank profile in [`theta_sp`].
pub const PROFILE_RESTARTS: usize = 2;
/// Largest vertex count for which [`theta_sp`] enumerates rank profiles.
pub const MAX_PROFILE_VERTICES: usize = 5;
pub const MAX_MINIMAX_VERTICES: usize = 7;
pub const MINIMAX_TOLERANCE: f64 = 5e-3;
const NORM_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-8;
const RANGE_CUTOFF: f64 = 1e-9;
const SMOOTHING_SCHEDULE: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Unit vectors with `⟨u_x, u_x′⟩ = 0` for every non-adjacent pair.
#[derive(Debug, Clone)]
pub struct Representation {
    graph: ConfusabilityGraph,
    vectors: Vec<Vec<C64>>,
}

impl Representation {
    pub fn new(graph: &ConfusabilityGraph, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if vectors.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.vertex_count(),
                got: vectors.len(),
            });
        }
        let dim = vectors[0].len();
        for (x, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return validation("representation vectors differ in dimension");
            }
            let norm = inner(v, v).re.sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return validation(format!("vector {x} has norm {norm}"));
            }
        }
        for (i, j) in graph.non_adjacent_pairs() {
            let ov = inner(&vectors[i], &vectors[j]).norm();
            if ov > ORTHO_TOL {
                return validation(format!(
                    "non-adjacent vertices {i},{j} have overlap {ov:.3e}"
                ));
            }
        }
        Ok(Self {
            graph: graph.clone(),
            vectors,
        })
    }

    pub fn graph(&self) -> &ConfusabilityGraph {
        &self.graph
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// `|⟨u_x, f⟩|²` for every vertex.
    pub fn overlaps(&self, handle: &[C64]) -> Result<Vec<f64>> {
        if handle.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: handle.len(),
            });
        }
        Ok(self
            .vectors
            .iter()
            .map(|u| inner(u, handle).norm_sqr())
            .collect())
    }
}

/// Orthogonal projectors with `Tr(U_x U_x′) = 0` for every non-adjacent pair.
#[derive(Debug, Clone)]
pub struct ProjectorRepresentation {
    graph: ConfusabilityGraph,
    projectors: Vec<HermitianOperator>,
}

impl ProjectorRepresentation {
    pub fn new(graph: &ConfusabilityGraph, projectors: Vec<HermitianOperator>) -> Result<Self> {
        if projectors.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.vertex_count(),
                got: projectors.len(),
            });
        }
        let dim = projectors[0].dim();
        for (x, u) in projectors.iter().enumerate() {
            if u.dim() != dim {
                return validation("projectors differ in dimension");
            }
            let defect = u.idempotency_defect();
            if defect > ORTHO_TOL {
                return validation(format!(
                    "operator {x} is not idempotent (defect {defect:.3e})"
                ));
            }
        }
        for (i, j) in graph.non_adjacent_pairs() {
            let t = crate::operator::trace_product(&projectors[i], &projectors[j])?;
            if t > ORTHO_TOL {
                return validation(format!(
                    "non-adjacent projectors {i},{j} overlap: Tr = {t:.3e}"
                ));
            }
        }
        Ok(Self {
            graph: graph.clone(),
            projectors,
        })
    }

    pub fn graph(&self) -> &ConfusabilityGraph {
        &self.graph
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// The realized function `f(x) = Tr(U_x F)`.
    pub fn realized(&self, f: &DensityOperator) -> Result<Vec<f64>> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.dim(),
            });
        }
        self.projectors
            .iter()
            .map(|u| crate::operator::trace_product(u, &f.as_hermitian()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum Handle {
    Vector(Vec<C64>),
    State(DensityOperator),
}

#[derive(Debug, Clone)]
pub enum Certificate {
    Vectors(Representation),
    Projectors(ProjectorRepresentation),
}

/// `value = Σ P(x) per_vertex(x)` with `per_vertex(x) = log 1/f(x)`, or the
/// worst vertex for [`lovasz_theta`].
#[derive(Debug, Clone)]
pub struct HandleObjective {
    pub value: f64,
    pub handle: Handle,
    pub per_vertex: Vec<f64>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy)]
pub struct ThetaOptions {
    pub restarts: usize,
    pub exec: Execution,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            exec: Execution::default(),
        }
    }
}

fn log_inverse(t: f64) -> f64 {
    if t > 0.0 {
        (-t.min(1.0).ln()).max(0.0)
    } else {
        f64::INFINITY
    }
}

fn weighted_value(p: &Composition, per_vertex: &[f64]) -> f64 {
    p.support().map(|x| p.get(x) * per_vertex[x]).sum()
}

fn check_composition(g: &ConfusabilityGraph, p: &Composition) -> Result<()> {
    if p.len() != g.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: g.vertex_count(),
            got: p.len(),
        });
    }
    Ok(())
}

/// Parameter layout: `Z_x` (`d × r_x`, column-major) for each vertex in
/// order, then the handle factor `M` (`d × m`), `F = MMᵀ/‖M‖²`.
struct Ansatz {
    ranks: Vec<usize>,
    d: usize,
    m: usize,
    /// Earlier non-adjacent vertices for each vertex.
    earlier: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

enum Aggregate<'a> {
    Weighted(&'a [f64]),
    /// `τ log Σ_x exp(log(1/t_x)/τ)`.
    Smooth(f64),
}

struct Forward {
    z: Vec<DMatrix<f64>>,
    a: Vec<DMatrix<f64>>,
    gram_inv: Vec<DMatrix<f64>>,
    u: Vec<DMatrix<f64>>,
    /// Projector onto the earlier non-adjacent ranges, with its column
    /// matrix and inverse Gram matrix.
    q: Vec<Option<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>>,
    m: DMatrix<f64>,
    norm2: f64,
    f: DMatrix<f64>,
    t: Vec<f64>,
}

impl Ansatz {
    fn new(g: &ConfusabilityGraph, ranks: Vec<usize>, d: usize, m: usize) -> Self {
        let n = g.vertex_count();
        let earlier = (0..n)
            .map(|x| (0..x).filter(|&j| !g.adjacent(x, j)).collect())
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut off = 0;
        for &r in &ranks {
            offsets.push(off);
            off += d * r;
        }
        offsets.push(off);
        Self {
            ranks,
            d,
            m,
            earlier,
            offsets,
        }
    }

    fn n_params(&self) -> usize {
        self.offsets[self.ranks.len()] + self.d * self.m
    }

    fn random_start(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.n_params())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    }

    fn forward(&self, theta: &[f64]) -> Option<Forward> {
        let n = self.ranks.len();
        let d = self.d;
        let eye = DMatrix::<f64>::identity(d, d);
        let mut z = Vec::with_capacity(n);
        let mut a: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        let mut gram_inv = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        for x in 0..n {
            let zx = DMatrix::from_column_slice(
                d,
                self.ranks[x],
                &theta[self.offsets[x]..self.offsets[x + 1]],
            );
            let ax = if self.earlier[x].is_empty() {
                q.push(None);
                zx.clone()
            } else {
                let cols: usize = self.earlier[x].iter().map(|&j| self.ranks[j]).sum();
                let mut c = DMatrix::zeros(d, cols);
                let mut k = 0;
                for &j in &self.earlier[x] {
                    c.columns_mut(k, self.ranks[j]).copy_from(&a[j]);
                    k += self.ranks[j];
                }
                let cg = (c.transpose() * &c).try_inverse()?;
                let qx = &c * &cg * c.transpose();
                let ax = (&eye - &qx) * &zx;
                q.push(Some((qx, c, cg)));
                ax
            };
            let gi = (ax.transpose() * &ax).try_inverse()?;
            u.push(&ax * &gi * ax.transpose());
            gram_inv.push(gi);
            a.push(ax);
            z.push(zx);
        }
        let m = DMatrix::from_column_slice(d, self.m, &theta[self.offsets[n]..]);
        let norm2 = m.norm_squared();
        if !(norm2 > 0.0) {
            return None;
        }
        let f = &m * m.transpose() / norm2;
        let t = u.iter().map(|ux| ux.dot(&f)).collect();
        Some(Forward {
            z,
            a,
            gram_inv,
            u,
            q,
            m,
            norm2,
            f,
            t,
        })
    }

    fn objective(&self, theta: &[f64], agg: &Aggregate) -> (f64, Vec<f64>) {
        let fail = (f64::INFINITY, vec![0.0; theta.len()]);
        let Some(fw) = self.forward(theta) else {
            return fail;
        };
        let n = self.ranks.len();
        // value and dJ/dt_x
        let (value, dt) = match agg {
            Aggregate::Weighted(w) => {
                let mut v = 0.0;
                let mut dt = vec![0.0; n];
                for x in 0..n {
                    if w[x] > 0.0 {
                        if !(fw.t[x] > 0.0) {
                            return fail;
                        }
                        v -= w[x] * fw.t[x].ln();
                        dt[x] = -w[x] / fw.t[x];
                    }
                }
                (v, dt)
            }
            Aggregate::Smooth(tau) => {
                if fw.t.iter().any(|&t| !(t > 0.0)) {
                    return fail;
                }
                let l: Vec<f64> = fw.t.iter().map(|t| -t.ln()).collect();
                let top = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = l.iter().map(|v| ((v - top) / tau).exp()).collect();
                let z: f64 = e.iter().sum();
                let dt = (0..n).map(|x| -(e[x] / z) / fw.t[x]).collect();
                (top + tau * z.ln(), dt)
            }
        };
        if !value.is_finite() {
            return fail;
        }
        let d = self.d;
        let eye = DMatrix::<f64>::identity(d, d);
        let mut fbar = DMatrix::<f64>::zeros(d, d);
        let mut abar: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        for x in 0..n {
            fbar += &fw.u[x] * dt[x];
            // U = A G⁻¹ Aᵀ, Ū = dt·F  ⇒  Ā = 2 (I − U) Ū A G⁻¹
            abar.push((&eye - &fw.u[x]) * &fw.f * (2.0 * dt[x]) * &fw.a[x] * &fw.gram_inv[x]);
        }
        let mut grad = vec![0.0; theta.len()];
        for x in (0..n).rev() {
            let zbar = match &fw.q[x] {
                None => abar[x].clone(),
                Some((qx, c, cg)) => {
                    let zbar = (&eye - qx) * &abar[x];
                    let qbar = -(&abar[x] * fw.z[x].transpose());
                    let qbar = (&qbar + qbar.transpose()) * 0.5;
                    let cbar = (&eye - qx) * qbar * c * cg * 2.0;
                    let mut k = 0;
                    for &j in &self.earlier[x] {
                        abar[j] += cbar.columns(k, self.ranks[j]);
                        k += self.ranks[j];
                    }
                    zbar
                }
            };
            grad[self.offsets[x]..self.offsets[x + 1]].copy_from_slice(zbar.as_slice());
        }
        let ftrace = fbar.dot(&fw.f);
        let mbar = (&fbar * &fw.m - &fw.m * ftrace) * (2.0 / fw.norm2);
        grad[self.offsets[n]..].copy_from_slice(mbar.as_slice());
        (value, grad)
    }

    /// `A_x` with each `Q_x` taken from an SVD, so collinear earlier blocks
    /// (common at optima with zero-weight vertices) stay well conditioned.
    fn stable_blocks(&self, theta: &[f64]) -> Vec<DMatrix<f64>> {
        let d = self.d;
        let eye = DMatrix::<f64>::identity(d, d);
        let mut a: Vec<DMatrix<f64>> = Vec::with_capacity(self.ranks.len());
        for x in 0..self.ranks.len() {
            let zx = DMatrix::from_column_slice(
                d,
                self.ranks[x],
                &theta[self.offsets[x]..self.offsets[x + 1]],
            );
            let mut c = DMatrix::zeros(d, 0);
            for &j in &self.earlier[x] {
                let k = c.ncols();
                c = c.insert_columns(k, a[j].ncols(), 0.0);
                c.columns_mut(k, a[j].ncols()).copy_from(&a[j]);
            }
            a.push((&eye - range_projector(&c)) * zx);
        }
        a
    }

    /// Vector certificate (rank one, pure handle).
    fn vector_certificate(
        &self,
        g: &ConfusabilityGraph,
        theta: &[f64],
    ) -> Option<(Representation, Vec<C64>)> {
        let to_unit = |v: Vec<f64>| -> Option<Vec<C64>> {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| C64::new(x / n, 0.0)).collect())
        };
        let vectors = self
            .stable_blocks(theta)
            .iter()
            .map(|a| to_unit(a.column(0).iter().cloned().collect()))
            .collect::<Option<Vec<_>>>()?;
        let rep = Representation::new(g, vectors).ok()?;
        let m = &theta[self.offsets[self.ranks.len()]..];
        Some((rep, to_unit(m[..self.d].to_vec())?))
    }

    fn projector_certificate(
        &self,
        g: &ConfusabilityGraph,
        theta: &[f64],
    ) -> Option<(ProjectorRepresentation, DensityOperator)> {
        let fw = self.forward(theta)?;
        let to_complex = |m: &DMatrix<f64>| m.map(|v| C64::new(v, 0.0));
        let projectors = self
            .stable_blocks(theta)
            .iter()
            .map(|a| HermitianOperator::new(to_complex(&range_projector(a))))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        let rep = ProjectorRepresentation::new(g, projectors).ok()?;
        let f = DensityOperator::new(to_complex(&fw.f)).ok()?;
        Some((rep, f))
    }

    fn run(&self, start: Vec<f64>, agg: &Aggregate) -> Vec<f64> {
        let opts = BfgsOptions {
            max_iter: 3000,
            grad_tol: 1e-10,
            f_tol: 1e-15,
        };
        bfgs(|th| self.objective(th, agg), start, &opts).x
    }
}

fn vector_objective(
    rep: Representation,
    handle: Vec<C64>,
    p: &Composition,
) -> Result<HandleObjective> {
    let per_vertex: Vec<f64> = rep
        .overlaps(&handle)?
        .into_iter()
        .map(log_inverse)
        .collect();
    Ok(HandleObjective {
        value: weighted_value(p, &per_vertex),
        handle: Handle::Vector(handle),
        per_vertex,
        certificate: Certificate::Vectors(rep),
    })
}

fn projector_objective(
    rep: ProjectorRepresentation,
    f: DensityOperator,
    p: &Composition,
) -> Result<HandleObjective> {
    let per_vertex: Vec<f64> = rep.realized(&f)?.into_iter().map(log_inverse).collect();
    Ok(HandleObjective {
        value: weighted_value(p, &per_vertex),
        handle: Handle::State(f),
        per_vertex,
        certificate: Certificate::Projectors(rep),
    })
}

/// Orthogonal projector onto the column span, dropping directions below a
/// relative singular-value cutoff.
fn range_projector(c: &DMatrix<f64>) -> DMatrix<f64> {
    let d = c.nrows();
    if c.ncols() == 0 {
        return DMatrix::zeros(d, d);
    }
    let svd = c.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let cutoff = svd.singular_values.max() * RANGE_CUTOFF;
    let mut q = DMatrix::zeros(d, d);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let col = u.column(k);
            q += col * col.transpose();
        }
    }
    q
}

fn best_of(candidates: Vec<Option<HandleObjective>>) -> Result<HandleObjective> {
    let mut best: Option<HandleObjective> = None;
    for c in candidates.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| c.value < b.value) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::Degenerate("no restart produced a valid representation".into()))
}

/// `ϑ(G,P) = min Σ_x P(x) log 1/|⟨u_x, f⟩|²` over representations and unit
/// handles in dimension `|X|`.
pub fn marton_theta(g: &ConfusabilityGraph, p: &Composition, seed: u64) -> Result<HandleObjective> {
    marton_theta_with(g, p, seed, &ThetaOptions::default())
}

pub fn marton_theta_with(
    g: &ConfusabilityGraph,
    p: &Composition,
    seed: u64,
    opts: &ThetaOptions,
) -> Result<HandleObjective> {
    check_composition(g, p)?;
    let n = g.vertex_count();
    let ansatz = Ansatz::new(g, vec![1; n], n, 1);
    let weights = p.probs().to_vec();
    let candidates = map_indexed(opts.exec, opts.restarts.max(1), |i| {
        let theta = ansatz.run(
            ansatz.random_start(derive_seed(seed, i as u64)),
            &Aggregate::Weighted(&weights),
        );
        let (rep, f) = ansatz.vector_certificate(g, &theta)?;
        vector_objective(rep, f, p).ok()
    });
    best_of(candidates)
}

/// Rank profiles searched by [`theta_sp`].
pub fn rank_profiles(n: usize) -> Vec<Vec<usize>> {
    if n > MAX_PROFILE_VERTICES {
        return vec![vec![1; n]];
    }
    (0..1usize << n)
        .map(|mask| (0..n).map(|x| 1 + ((mask >> x) & 1)).collect())
        .collect()
}

/// `ϑ_sp(G,P) = inf Σ_x P(x) log 1/Tr(U_x F)` over projector representations
/// and states. The rank-one vector search of [`marton_theta`] (same seed) is
/// included among the candidates.
pub fn theta_sp(g: &ConfusabilityGraph, p: &Composition, seed: u64) -> Result<HandleObjective> {
    theta_sp_with(g, p, seed, &ThetaOptions::default())
}

pub fn theta_sp_with(
    g: &ConfusabilityGraph,
    p: &Composition,
    seed: u64,
    opts: &ThetaOptions,
) -> Result<HandleObjective> {
    check_composition(g, p)?;
    let vector = marton_theta_with(g, p, seed, opts)?;
    let (rep, f) = match (&vector.certificate, &vector.handle) {
        (Certificate::Vectors(rep), Handle::Vector(f)) => (rep, f),
        _ => unreachable!("vector search returns vector certificates"),
    };
    let projectors = rep
        .vectors()
        .iter()
        .map(|u| HermitianOperator::outer(u))
        .collect();
    let lifted = projector_objective(
        ProjectorRepresentation::new(g, projectors)?,
        DensityOperator::pure(f)?,
        p,
    )?;
    let weights = p.probs().to_vec();
    let profiles = rank_profiles(g.vertex_count());
    let jobs: Vec<(usize, usize)> = (0..profiles.len())
        .flat_map(|k| (0..PROFILE_RESTARTS).map(move |r| (k, r)))
        .collect();
    let mut candidates = map_indexed(opts.exec, jobs.len(), |i| {
        let (k, r) = jobs[i];
        let ranks = profiles[k].clone();
        let d: usize = ranks.iter().sum();
        let ansatz = Ansatz::new(g, ranks, d, d);
        let seed = derive_seed(derive_seed(seed, 1 << 32 | k as u64), r as u64);
        let theta = ansatz.run(ansatz.random_start(seed), &Aggregate::Weighted(&weights));
        let (rep, f) = ansatz.projector_certificate(g, &theta)?;
        projector_objective(rep, f, p).ok()
    });
    candidates.insert(0, Some(lifted));
    best_of(candidates)
}

/// Reduction from projectors to vectors: with `ψ` a purification of `F`,
/// `w_x = (U_x ⊗ 1)ψ / ‖(U_x ⊗ 1)ψ‖` gives `|⟨w_x, ψ⟩|² = Tr(U_x F)`.
pub fn purification_reduce(
    u: &ProjectorRepresentation,
    f: &DensityOperator,
) -> Result<(Representation, Vec<C64>)> {
    let d = u.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    let psi = purify(f);
    let mut vectors = Vec::with_capacity(u.projectors().len());
    for (x, ux) in u.projectors().iter().enumerate() {
        let m = ux.matrix();
        let mut w = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let c = m[(i, k)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    w[i * d + j] += c * psi[k * d + j];
                }
            }
        }
        let norm2 = inner(&w, &w).re;
        if norm2 <= 1e-12 {
            return Err(Error::Degenerate(format!(
                "vertex {x} has zero overlap with the handle"
            )));
        }
        let norm = norm2.sqrt();
        vectors.push(w.iter().map(|z| z / norm).collect());
    }
    Ok((Representation::new(u.graph(), vectors)?, psi))
}

/// Direct sum realizing `p·f₁ + (1−p)·f₂` from two projector realizations
/// `f_i(x) = Tr(U_x⁽ⁱ⁾ F_i)` of the same graph.
pub fn direct_sum(
    a: (&ProjectorRepresentation, &DensityOperator),
    b: (&ProjectorRepresentation, &DensityOperator),
    p: f64,
) -> Result<(ProjectorRepresentation, DensityOperator)> {
    if !(0.0..=1.0).contains(&p) {
        return validation(format!("mixing weight must lie in [0,1], got {p}"));
    }
    if a.0.graph() != b.0.graph() {
        return validation("representations belong to different graphs");
    }
    let projectors =
        a.0.projectors()
            .iter()
            .zip(b.0.projectors())
            .map(|(x, y)| x.direct_sum(y))
            .collect();
    Ok((
        ProjectorRepresentation::new(a.0.graph(), projectors)?,
        a.1.direct_sum_weighted(p, b.1),
    ))
}

/// `ϑ(G) = min max_x log 1/|⟨u_x, f⟩|²`, by smoothing the maximum with a
/// decreasing temperature. The value is the exact worst vertex of the
/// returned certificate.
pub fn lovasz_theta(g: &ConfusabilityGraph, seed: u64) -> Result<HandleObjective> {
    lovasz_theta_with(g, seed, &ThetaOptions::default())
}

pub fn lovasz_theta_with(
    g: &ConfusabilityGraph,
    seed: u64,
    opts: &ThetaOptions,
) -> Result<HandleObjective> {
    let n = g.vertex_count();
    let ansatz = Ansatz::new(g, vec![1; n], n, 1);
    let uniform = Composition::uniform(n);
    let candidates = map_indexed(opts.exec, opts.restarts.max(1), |i| {
        let mut theta = ansatz.random_start(derive_seed(seed, i as u64));
        for tau in SMOOTHING_SCHEDULE {
            theta = ansatz.run(theta, &Aggregate::Smooth(tau));
        }
        let (rep, f) = ansatz.vector_certificate(g, &theta)?;
        let mut obj = vector_objective(rep, f, &uniform).ok()?;
        obj.value = obj
            .per_vertex
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        Some(obj)
    });
    best_of(candidates)
}

#[derive(Debug, Clone)]
pub struct MinimaxReport {
    /// `max_P ϑ(G,P)` over the grid.
    pub max_marton: f64,
    pub argmax: Composition,
    pub lovasz: f64,
    pub difference: f64,
    pub passed: bool,
    pub grid_size: usize,
    /// Grid points where `ϑ(G,P)` was optimized; the others were bounded
    /// below the running maximum by an earlier certificate.
    pub evaluated: usize,
}

/// Compares `max_P ϑ(G,P)` over a composition grid (plus the uniform point)
/// with `ϑ(G)`.
pub fn minimax_check(g: &ConfusabilityGraph, grid_step: f64, seed: u64) -> Result<MinimaxReport> {
    minimax_check_with(g, grid_step, seed, &ThetaOptions::default())
}

pub fn minimax_check_with(
    g: &ConfusabilityGraph,
    grid_step: f64,
    seed: u64,
    opts: &ThetaOptions,
) -> Result<MinimaxReport> {
    let n = g.vertex_count();
    if n > MAX_MINIMAX_VERTICES {
        return validation(format!(
            "minimax check supports at most {MAX_MINIMAX_VERTICES} vertices, got {n}"
        ));
    }
    let uniform = Composition::uniform(n);
    let mut grid = vec![uniform.clone()];
    grid.extend(
        simplex_grid(n, grid_step)?
            .into_iter()
            .filter(|p| p.distance(&uniform) > 1e-12),
    );
    let mut pool: Vec<Vec<f64>> = Vec::new();
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut evaluated = 0;
    for (i, p) in grid.iter().enumerate() {
        // Any certificate bounds ϑ(G,P) from above.
        let bound = pool
            .iter()
            .map(|pv| weighted_value(p, pv))
            .fold(f64::INFINITY, f64::min);
        if bound <= best.1 {
            continue;
        }
        let obj = marton_theta_with(g, p, derive_seed(seed, i as u64), opts)?;
        evaluated += 1;
        if obj.value > best.1 {
            best = (i, obj.value);
        }
        if obj.per_vertex.iter().all(|v| v.is_finite()) {
            pool.push(obj.per_vertex);
        }
    }
    let lovasz = lovasz_theta_with(g, seed, opts)?.value;
    let difference = (best.1 - lovasz).abs();
    Ok(MinimaxReport {
        max_marton: best.1,
        argmax: grid[best.0].clone(),
        lovasz,
        difference,
        passed: difference <= MINIMAX_TOLERANCE,
        grid_size: grid.len(),
        evaluated,
    })
}
