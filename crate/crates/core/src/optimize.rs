//! Numerical optimizers shared by the exponent and theta engines.
//!
//! * [`minimize_blocks`]: matrix mirror descent over a product of density
//!   operator sets. Iterates are kept in the log domain
//!   (`F = U diag(e^l) U†`), so every iterate has full support, and the
//!   Frank–Wolfe gap `Tr(G F) − λ_min(G)` is reported as a certified bound
//!   on the suboptimality of a convex objective.
//! * [`bfgs`]: quasi-Newton minimization over `ℝⁿ`.
//! * [`golden_section_max`]: scalar unimodal maximization.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{jacobi_eigen, max_abs, ComplexMatrix, DensityOperator, C64};

pub const DEFAULT_GAP_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Smallest log-eigenvalue kept, relative to the largest.
const LOG_FLOOR: f64 = -600.0;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;
const FLAT_LIMIT: usize = 20;
const MAX_OUTER: usize = 5_000;
/// Gap below which a run that hit the floating-point floor counts as
/// converged. Near an interior optimum the gap is of the order of the
/// square root of the objective error.
const FLOOR_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    IterationCapped,
    /// No further decrease is representable and the gap is still above
    /// the floor tolerance.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative to `max(1, |f|)`.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Random starting point instead of the maximally mixed state.
    pub seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: DEFAULT_GAP_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: None,
        }
    }
}

/// A density operator `U diag(e^l) U†` with `Σ e^l = 1`.
#[derive(Debug, Clone)]
pub struct LogDensity {
    u: ComplexMatrix,
    logs: Vec<f64>,
}

fn normalize_logs(mut logs: Vec<f64>) -> Vec<f64> {
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for l in logs.iter_mut() {
        *l = l.max(top + LOG_FLOOR);
    }
    let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    logs.iter().map(|l| l - lse).collect()
}

impl LogDensity {
    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            u: ComplexMatrix::identity(d, d),
            logs: vec![-(d as f64).ln(); d],
        }
    }

    /// Random eigenbasis (Gaussian Hermitian) and eigenvalues bounded away
    /// from the boundary.
    pub fn random(d: usize, rng: &mut impl Rng) -> Self {
        let mut h = ComplexMatrix::from_fn(d, d, |_, _| {
            C64::new(
                StandardNormal.sample(&mut *rng),
                StandardNormal.sample(&mut *rng),
            )
        });
        h = &h + h.adjoint();
        let es = jacobi_eigen(&h);
        let w: Vec<f64> = (0..d).map(|_| 0.2 + rng.random::<f64>()).collect();
        Self {
            u: es.eigenvectors,
            logs: normalize_logs(w.iter().map(|x| x.ln()).collect()),
        }
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        let es = rho.eig();
        let logs = es
            .eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { l.ln() } else { f64::NEG_INFINITY })
            .collect();
        Self {
            u: es.eigenvectors.clone(),
            logs: normalize_logs(logs),
        }
    }

    pub fn dim(&self) -> usize {
        self.logs.len()
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.logs.iter().map(|l| l.exp()).collect()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_eigen(self.eigenvalues(), self.u.clone())
    }

    /// `U† A U`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.u.adjoint() * a * &self.u
    }

    /// `U A U†`.
    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.u * a * self.u.adjoint()
    }

    /// `normalize(exp(log F − η G))` with `G` given in this eigenbasis.
    /// Also returns the new state expressed in the old eigenbasis.
    fn step(&self, g: &ComplexMatrix, eta: f64) -> (LogDensity, ComplexMatrix) {
        let d = self.dim();
        let mut m = g * C64::new(-eta, 0.0);
        for i in 0..d {
            m[(i, i)] += C64::new(self.logs[i], 0.0);
        }
        let es = jacobi_eigen(&m);
        let next = LogDensity {
            u: &self.u * &es.eigenvectors,
            logs: normalize_logs(es.eigenvalues),
        };
        let in_old = crate::operator::spectral_sum(&es.eigenvectors, &next.eigenvalues());
        (next, in_old)
    }
}

/// Divided differences `Γ_ij = (λ_i^β − λ_j^β)/(λ_i − λ_j)` (and `βλ_i^{β−1}`
/// on the diagonal) at `λ = e^l`. The gradient of `Tr(A F^β)` in the
/// eigenbasis of `F` is `Γ ∘ (U†AU)`.
pub fn power_divided_differences(logs: &[f64], beta: f64) -> DMatrix<f64> {
    let d = logs.len();
    DMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (logs[i], logs[j]);
        if (a - b).abs() < 1e-6 {
            beta * ((beta - 1.0) * 0.5 * (a + b)).exp()
        } else {
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            let delta = lo - hi;
            ((beta - 1.0) * hi).exp() * (beta * delta).exp_m1() / delta.exp_m1()
        }
    })
}

/// Objective over a product of density operator sets.
pub trait BlockObjective: Sync {
    fn block_dims(&self) -> Vec<usize>;
    /// May be `+∞`.
    fn value(&self, x: &[LogDensity]) -> f64;
    /// Euclidean gradients, each expressed in the eigenbasis of its block.
    fn value_and_gradient(&self, x: &[LogDensity]) -> (f64, Vec<ComplexMatrix>);
}

/// A finite family of objectives `g_k` sharing one domain.
pub trait Components: Sync {
    fn block_dims(&self) -> Vec<usize>;
    fn count(&self) -> usize;
    fn component(&self, x: &[LogDensity], k: usize) -> f64;
    fn component_with_gradient(&self, x: &[LogDensity], k: usize) -> (f64, Vec<ComplexMatrix>);
}

fn accumulate(total: &mut Vec<ComplexMatrix>, g: Vec<ComplexMatrix>, w: f64) {
    if total.is_empty() {
        *total = g.into_iter().map(|m| m * C64::new(w, 0.0)).collect();
    } else {
        for (t, m) in total.iter_mut().zip(g) {
            *t += m * C64::new(w, 0.0);
        }
    }
}

fn zero_gradients(dims: &[usize]) -> Vec<ComplexMatrix> {
    dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect()
}

/// `Σ_k w_k g_k`, skipping zero weights.
pub struct Weighted<'a, C: Components> {
    pub components: &'a C,
    pub weights: &'a [f64],
}

impl<C: Components> BlockObjective for Weighted<'_, C> {
    fn block_dims(&self) -> Vec<usize> {
        self.components.block_dims()
    }

    fn value(&self, x: &[LogDensity]) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| w * self.components.component(x, k))
            .sum()
    }

    fn value_and_gradient(&self, x: &[LogDensity]) -> (f64, Vec<ComplexMatrix>) {
        let mut total = Vec::new();
        let mut value = 0.0;
        for (k, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                let (v, g) = self.components.component_with_gradient(x, k);
                value += w * v;
                accumulate(&mut total, g, w);
            }
        }
        if total.is_empty() {
            total = zero_gradients(&self.block_dims());
        }
        (value, total)
    }
}

/// `t · log Σ_k exp(g_k / t)`, a smooth upper approximation of `max_k g_k`
/// within `t log K`.
pub struct SmoothMax<'a, C: Components> {
    pub components: &'a C,
    pub t: f64,
}

fn log_sum_exp(vals: &[f64], t: f64) -> (f64, Vec<f64>) {
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return (top, vec![0.0; vals.len()]);
    }
    let w: Vec<f64> = vals.iter().map(|v| ((v - top) / t).exp()).collect();
    let z: f64 = w.iter().sum();
    (top + t * z.ln(), w.iter().map(|x| x / z).collect())
}

impl<C: Components> BlockObjective for SmoothMax<'_, C> {
    fn block_dims(&self) -> Vec<usize> {
        self.components.block_dims()
    }

    fn value(&self, x: &[LogDensity]) -> f64 {
        let vals: Vec<f64> = (0..self.components.count())
            .map(|k| self.components.component(x, k))
            .collect();
        log_sum_exp(&vals, self.t).0
    }

    fn value_and_gradient(&self, x: &[LogDensity]) -> (f64, Vec<ComplexMatrix>) {
        let vals: Vec<f64> = (0..self.components.count())
            .map(|k| self.components.component(x, k))
            .collect();
        let (value, weights) = log_sum_exp(&vals, self.t);
        let mut total = Vec::new();
        for (k, &w) in weights.iter().enumerate() {
            if w > 1e-18 {
                let (_, g) = self.components.component_with_gradient(x, k);
                accumulate(&mut total, g, w);
            }
        }
        if total.is_empty() {
            total = zero_gradients(&self.block_dims());
        }
        (value, total)
    }
}

#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub blocks: Vec<LogDensity>,
    pub value: f64,
    /// Frank–Wolfe gap at the returned point.
    pub gap: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

/// `Σ_b [Tr(G_b F_b) − λ_min(G_b)]`.
pub fn frank_wolfe_gap(x: &[LogDensity], g: &[ComplexMatrix]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(b, gb)| {
            let lam = b.eigenvalues();
            let tr: f64 = (0..b.dim()).map(|i| lam[i] * gb[(i, i)].re).sum();
            let min = jacobi_eigen(gb).eigenvalues.first().copied().unwrap_or(0.0);
            (tr - min).max(0.0)
        })
        .sum()
}

fn floor_status(gap: f64, f: f64) -> SolverStatus {
    if gap <= FLOOR_GAP * f.abs().max(1.0) {
        SolverStatus::Converged
    } else {
        SolverStatus::Stalled
    }
}

fn start_point(dims: &[usize], opts: &SolverOptions) -> Vec<LogDensity> {
    match opts.seed {
        None => dims
            .iter()
            .map(|&d| LogDensity::maximally_mixed(d))
            .collect(),
        Some(seed) => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            dims.iter()
                .map(|&d| LogDensity::random(d, &mut rng))
                .collect()
        }
    }
}

/// Mirror descent with Armijo backtracking, started at `I/d` (or a seeded
/// random point) in every block.
pub fn minimize_blocks<O: BlockObjective + ?Sized>(obj: &O, opts: &SolverOptions) -> BlockSolution {
    let start = start_point(&obj.block_dims(), opts);
    minimize_blocks_from(obj, start, opts)
}

pub fn minimize_blocks_from<O: BlockObjective + ?Sized>(
    obj: &O,
    start: Vec<LogDensity>,
    opts: &SolverOptions,
) -> BlockSolution {
    let mut x = start;
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let scale = g.iter().map(max_abs).fold(0.0, f64::max);
    let mut eta = 1.0 / scale.max(1e-12);
    let mut flat = 0;
    let mut gap = frank_wolfe_gap(&x, &g);
    for it in 0..opts.max_iter {
        if gap <= opts.gap_tol * f.abs().max(1.0) {
            return BlockSolution {
                blocks: x,
                value: f,
                gap,
                iterations: it,
                status: SolverStatus::Converged,
            };
        }
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = Vec::with_capacity(x.len());
            let mut decrease = 0.0;
            for (b, gb) in x.iter().zip(&g) {
                let (next, in_old) = b.step(gb, eta);
                let lam = b.eigenvalues();
                let d = b.dim();
                for i in 0..d {
                    for j in 0..d {
                        let diff = if i == j {
                            C64::new(lam[i], 0.0) - in_old[(j, i)]
                        } else {
                            -in_old[(j, i)]
                        };
                        decrease += (gb[(i, j)] * diff).re;
                    }
                }
                trial.push(next);
            }
            let f_new = obj.value(&trial);
            if f_new.is_finite() && f_new <= f - ARMIJO * decrease.max(0.0) {
                accepted = Some((trial, f_new));
                break;
            }
            eta *= 0.5;
        }
        let Some((trial, f_new)) = accepted else {
            return BlockSolution {
                blocks: x,
                value: f,
                gap,
                iterations: it,
                status: floor_status(gap, f),
            };
        };
        eta = (eta * 2.0).min(1e12);
        if f - f_new <= 1e-15 * (1.0 + f.abs()) {
            flat += 1;
        } else {
            flat = 0;
        }
        x = trial;
        let (fv, gv) = obj.value_and_gradient(&x);
        f = fv;
        g = gv;
        gap = frank_wolfe_gap(&x, &g);
        if flat >= FLAT_LIMIT && gap > opts.gap_tol * f.abs().max(1.0) {
            return BlockSolution {
                blocks: x,
                value: f,
                gap,
                iterations: it + 1,
                status: floor_status(gap, f),
            };
        }
    }
    let status = if gap <= opts.gap_tol * f.abs().max(1.0) {
        SolverStatus::Converged
    } else {
        SolverStatus::IterationCapped
    };
    BlockSolution {
        blocks: x,
        value: f,
        gap,
        iterations: opts.max_iter,
        status,
    }
}

#[derive(Debug, Clone)]
pub struct MinimaxSolution {
    pub blocks: Vec<LogDensity>,
    /// Exact `max_k g_k` at the returned point.
    pub value: f64,
    /// Bound on `value − min max_k g_k`.
    pub gap: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

/// `min_x max_k g_k(x)` for convex `g_k`, through the equivalent
/// `max_w min_x Σ_k w_k g_k(x)`.
///
/// The weights follow multiplicative ascent along the Danskin gradient
/// `g(x*(w))` with backtracking; each inner problem is warm-started. Any
/// pair `(x, w)` brackets the optimum between `min_x Σ w_k g_k` and
/// `max_k g_k(x)`, and the returned gap is the width of that bracket.
pub fn minimize_max<C: Components>(components: &C, opts: &SolverOptions) -> MinimaxSolution {
    let k = components.count();
    let all =
        |x: &[LogDensity]| -> Vec<f64> { (0..k).map(|i| components.component(x, i)).collect() };
    let inner_opts = SolverOptions {
        seed: None,
        ..opts.clone()
    };
    let solve = |w: &[f64], start: Vec<LogDensity>| {
        minimize_blocks_from(
            &Weighted {
                components,
                weights: w,
            },
            start,
            &inner_opts,
        )
    };
    let mut w = vec![1.0 / k as f64; k];
    let mut sol = solve(&w, start_point(&components.block_dims(), opts));
    let mut iterations = sol.iterations;
    let mut g = all(&sol.blocks);
    let max_of = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best_x = sol.blocks.clone();
    let mut best_upper = max_of(&g);
    let mut best_lower = sol.value - sol.gap;
    let spread = max_of(&g) - g.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut eta = 1.0 / spread.max(1e-12);
    let mut status = SolverStatus::IterationCapped;
    let mut flat = 0;
    for _ in 0..MAX_OUTER {
        if best_upper - best_lower <= opts.gap_tol * best_upper.abs().max(1.0) {
            status = SolverStatus::Converged;
            break;
        }
        if k == 1 || iterations >= opts.max_iter {
            status = if k == 1 {
                SolverStatus::Converged
            } else {
                SolverStatus::IterationCapped
            };
            break;
        }
        let top = max_of(&g);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let raw: Vec<f64> = w
                .iter()
                .zip(&g)
                .map(|(wi, gi)| wi * (eta * (gi - top)).exp())
                .collect();
            let z: f64 = raw.iter().sum();
            let trial_w: Vec<f64> = raw.iter().map(|v| v / z).collect();
            let ascent: f64 = g
                .iter()
                .zip(trial_w.iter().zip(&w))
                .map(|(gi, (a, b))| gi * (a - b))
                .sum();
            let trial = solve(&trial_w, sol.blocks.clone());
            iterations += trial.iterations;
            if trial.value >= sol.value + ARMIJO * ascent.max(0.0) {
                accepted = Some((trial_w, trial));
                break;
            }
            eta *= 0.5;
        }
        let Some((next_w, next)) = accepted else {
            status = floor_status(best_upper - best_lower, best_upper);
            break;
        };
        flat = if next.value - sol.value <= 1e-15 * sol.value.abs().max(1.0) {
            flat + 1
        } else {
            0
        };
        eta = (eta * 2.0).min(1e12);
        w = next_w;
        sol = next;
        g = all(&sol.blocks);
        let upper = max_of(&g);
        if upper < best_upper {
            best_upper = upper;
            best_x = sol.blocks.clone();
        }
        best_lower = best_lower.max(sol.value - sol.gap);
        if flat >= FLAT_LIMIT {
            status = floor_status(best_upper - best_lower, best_upper);
            break;
        }
    }
    MinimaxSolution {
        blocks: best_x,
        value: best_upper,
        gap: (best_upper - best_lower).max(0.0),
        iterations,
        status,
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Relative decrease below which an iteration counts as flat.
    pub f_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            grad_tol: 1e-10,
            f_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS with Armijo backtracking. The inverse Hessian is reset whenever the
/// search direction fails to descend.
pub fn bfgs<F>(mut f: F, x0: Vec<f64>, opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let (mut fx, g0) = f(x.as_slice());
    let mut g = DVector::from_vec(g0);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut flat = 0;
    for it in 0..opts.max_iter {
        if g.amax() <= opts.grad_tol {
            return BfgsResult {
                x: x.data.into(),
                value: fx,
                iterations: it,
                converged: true,
            };
        }
        let mut p = -(&h * &g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            p = -g.clone();
            slope = -g.norm_squared();
            fresh = true;
        }
        let mut alpha = if fresh { 1.0 / g.amax().max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &p * alpha;
            let (fn_, gn) = f(xn.as_slice());
            if fn_.is_finite() && fn_ <= fx + ARMIJO * alpha * slope {
                accepted = Some((xn, fn_, DVector::from_vec(gn)));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if !fresh {
                h = DMatrix::identity(n, n);
                fresh = true;
                continue;
            }
            return BfgsResult {
                x: x.data.into(),
                value: fx,
                iterations: it,
                converged: false,
            };
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if fresh {
                h *= sy / y.norm_squared();
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            h += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
            fresh = false;
        }
        if fx - fn_ <= opts.f_tol * (1.0 + fx.abs()) {
            flat += 1;
        } else {
            flat = 0;
        }
        x = xn;
        fx = fn_;
        g = gn;
        if flat >= 10 {
            return BfgsResult {
                x: x.data.into(),
                value: fx,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    BfgsResult {
        x: x.data.into(),
        value: fx,
        iterations: opts.max_iter,
        converged: false,
    }
}

/// Maximizes a unimodal `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs() + b.abs()) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `Tr(A F)` for a fixed Hermitian `A`: minimum is `λ_min(A)`.
    struct Linear(ComplexMatrix);

    impl BlockObjective for Linear {
        fn block_dims(&self) -> Vec<usize> {
            vec![self.0.nrows()]
        }
        fn value(&self, x: &[LogDensity]) -> f64 {
            let a = x[0].to_eigenbasis(&self.0);
            x[0].eigenvalues()
                .iter()
                .enumerate()
                .map(|(i, l)| l * a[(i, i)].re)
                .sum()
        }
        fn value_and_gradient(&self, x: &[LogDensity]) -> (f64, Vec<ComplexMatrix>) {
            (self.value(x), vec![x[0].to_eigenbasis(&self.0)])
        }
    }

    /// `−log det`-like strictly convex objective with minimum at `I/d`:
    /// `−Σ log λ_i`.
    struct NegLogDet(usize);

    impl BlockObjective for NegLogDet {
        fn block_dims(&self) -> Vec<usize> {
            vec![self.0]
        }
        fn value(&self, x: &[LogDensity]) -> f64 {
            -x[0].logs().iter().sum::<f64>()
        }
        fn value_and_gradient(&self, x: &[LogDensity]) -> (f64, Vec<ComplexMatrix>) {
            let lam = x[0].eigenvalues();
            let d = self.0;
            let g = ComplexMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(-1.0 / lam[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            (self.value(x), vec![g])
        }
    }

    #[test]
    fn divided_differences_match_direct_formula() {
        let logs = [
            0.3_f64.ln(),
            0.5_f64.ln(),
            0.2_f64.ln(),
            0.2000000001_f64.ln(),
        ];
        let beta = 0.4;
        let g = power_divided_differences(&logs, beta);
        let lam: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j {
                    beta * lam[i].powf(beta - 1.0)
                } else {
                    (lam[i].powf(beta) - lam[j].powf(beta)) / (lam[i] - lam[j])
                };
                assert_abs_diff_eq!(g[(i, j)], expected, epsilon = 1e-9);
            }
        }
        assert_abs_diff_eq!(g[(2, 3)], beta * 0.2_f64.powf(beta - 1.0), epsilon = 1e-7);
    }

    #[test]
    fn linear_objective_reaches_smallest_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = ComplexMatrix::from_fn(3, 3, |_, _| {
            C64::new(rng.random::<f64>(), rng.random::<f64>())
        });
        a = &a + a.adjoint();
        let lam_min = jacobi_eigen(&a).eigenvalues[0];
        let sol = minimize_blocks(
            &Linear(a),
            &SolverOptions {
                gap_tol: 1e-8,
                ..Default::default()
            },
        );
        assert_eq!(sol.status, SolverStatus::Converged);
        assert!(sol.value - lam_min <= 1e-8 && sol.value >= lam_min - 1e-12);
    }

    #[test]
    fn strictly_convex_objective_from_random_start() {
        let sol = minimize_blocks(
            &NegLogDet(4),
            &SolverOptions {
                seed: Some(3),
                ..Default::default()
            },
        );
        assert_eq!(sol.status, SolverStatus::Converged);
        assert_abs_diff_eq!(sol.value, 4.0 * 4f64.ln(), epsilon = 1e-9);
        let f = sol.blocks[0].to_density();
        assert!(max_abs(&(f.matrix() - DensityOperator::maximally_mixed(4).matrix())) < 1e-5);
    }

    struct TwoLinear(Vec<ComplexMatrix>);

    impl Components for TwoLinear {
        fn block_dims(&self) -> Vec<usize> {
            vec![2]
        }
        fn count(&self) -> usize {
            self.0.len()
        }
        fn component(&self, x: &[LogDensity], k: usize) -> f64 {
            Linear(self.0[k].clone()).value(x)
        }
        fn component_with_gradient(&self, x: &[LogDensity], k: usize) -> (f64, Vec<ComplexMatrix>) {
            Linear(self.0[k].clone()).value_and_gradient(x)
        }
    }

    #[test]
    fn minimax_of_two_diagonal_functionals() {
        // max(F_00, F_11) is minimized at F = I/2 with value 1/2.
        let a = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ]));
        let b = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let sol = minimize_max(&TwoLinear(vec![a, b]), &SolverOptions::default());
        assert_abs_diff_eq!(sol.value, 0.5, epsilon = 1e-7);
        assert!(sol.gap <= 1e-6);
    }

    #[test]
    fn bfgs_rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (v, g)
        };
        let r = bfgs(f, vec![-1.2, 1.0], &BfgsOptions::default());
        assert!(r.converged);
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, fx) = golden_section_max(|t| -(t - 0.3).powi(2), -2.0, 5.0, 1e-12);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(fx, 0.0, epsilon = 1e-12);
    }
}
