//! Sphere-packing type exponents for constant composition codes.

use std::fmt;

use serde::Serialize;

use crate::channel::{CQChannel, Composition};
use crate::error::{validation, Error, Result};
use crate::operator::{jacobi_eigen, spectral_sum, ComplexMatrix, DensityOperator, C64};
use crate::optimize::{
    golden_section_max, minimize_blocks, minimize_blocks_from, minimize_max,
    power_divided_differences, BlockObjective, BlockSolution, Components, LogDensity,
    SolverOptions, SolverStatus, Weighted,
};
use crate::par::{map_slice, Execution};
use crate::renyi::{mu, mu_double_prime, mu_prime, MuFunction};

/// Lower end of the `s` range accepted by [`sp_parametric_point`].
pub const MIN_S: f64 = 1e-3;
pub const RHO_MIN: f64 = 1e-4;
pub const RHO_MAX: f64 = 1e4;
pub const RHO_GRID_POINTS: usize = 80;
const RHO_REFINE_TOL: f64 = 1e-9;
pub(crate) const FEASIBILITY_TOL: f64 = 1e-9;
const COMPOSITION_STEP: f64 = 0.05;
const DIRICHLET_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    IterationCapped,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::IterationCapped => "iteration-capped",
            Status::Infeasible => "infeasible",
        })
    }
}

/// A bound value together with solver diagnostics. `value` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentValue {
    pub value: f64,
    pub status: Status,
    pub iterations: usize,
    /// Certified bound on the optimization error when available.
    pub gap_estimate: f64,
}

impl ExponentValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            status: Status::Converged,
            iterations: 0,
            gap_estimate: 0.0,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            status: Status::Infeasible,
            iterations: 0,
            gap_estimate: 0.0,
        }
    }

    fn from_solver(value: f64, status: SolverStatus, iterations: usize, gap: f64) -> Self {
        Self {
            value: value.max(0.0),
            status: match status {
                SolverStatus::Converged => Status::Converged,
                SolverStatus::IterationCapped | SolverStatus::Stalled => Status::IterationCapped,
            },
            iterations,
            gap_estimate: gap.max(0.0),
        }
    }
}

/// Exponent together with the optimal auxiliary state.
#[derive(Debug, Clone)]
pub struct Minimized {
    pub exponent: ExponentValue,
    pub minimizer: DensityOperator,
}

/// Orthonormal basis of the joint support of a set of states. Auxiliary
/// states are optimized inside it.
#[derive(Debug, Clone)]
struct Frame {
    basis: ComplexMatrix,
}

impl Frame {
    fn of<'a>(states: impl Iterator<Item = &'a DensityOperator>) -> Self {
        let mut sum: Option<ComplexMatrix> = None;
        for s in states {
            sum = Some(match sum {
                None => s.matrix().clone(),
                Some(acc) => acc + s.matrix(),
            });
        }
        let sum = sum.expect("frame of an empty set of states");
        let es = jacobi_eigen(&sum);
        let cut = crate::operator::RANK_THRESHOLD * es.max_abs_eigenvalue();
        let cols: Vec<usize> = (0..es.dim()).filter(|&i| es.eigenvalues[i] > cut).collect();
        let mut basis = ComplexMatrix::zeros(sum.nrows(), cols.len());
        for (k, &i) in cols.iter().enumerate() {
            basis.set_column(k, &es.eigenvectors.column(i));
        }
        Self { basis }
    }

    fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn reduce(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * a * &self.basis
    }

    fn lift(&self, f: &LogDensity) -> DensityOperator {
        let v = &self.basis * f.basis();
        DensityOperator::from_matrix_unchecked(spectral_sum(&v, &f.eigenvalues()))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return validation(format!("rho must be finite and non-negative, got {rho}"));
    }
    Ok(())
}

fn active_states<'a>(
    c: &'a CQChannel,
    p: &'a Composition,
) -> impl Iterator<Item = &'a DensityOperator> + 'a {
    c.states()
        .iter()
        .enumerate()
        .filter(|(x, _)| p.get(*x) > 0.0)
        .map(|(_, s)| s)
}

/// `g_x(F) = −(1+ρ) log Tr(S_x^{1/(1+ρ)} F^{ρ/(1+ρ)})` in a frame.
struct E0Components {
    powers: Vec<ComplexMatrix>,
    beta: f64,
    scale: f64,
    dim: usize,
}

impl E0Components {
    fn new<'a>(
        frame: &Frame,
        states: impl Iterator<Item = &'a DensityOperator>,
        rho: f64,
    ) -> Result<Self> {
        let alpha = 1.0 / (1.0 + rho);
        let powers = states
            .map(|s| Ok(frame.reduce(crate::operator::fractional_power(s, alpha)?.matrix())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            powers,
            beta: rho / (1.0 + rho),
            scale: 1.0 + rho,
            dim: frame.dim(),
        })
    }

    fn trace(&self, f: &LogDensity, a: &ComplexMatrix) -> f64 {
        let lam: Vec<f64> = f.logs().iter().map(|l| (self.beta * l).exp()).collect();
        (0..f.dim()).map(|i| a[(i, i)].re * lam[i]).sum()
    }
}

impl Components for E0Components {
    fn block_dims(&self) -> Vec<usize> {
        vec![self.dim]
    }

    fn count(&self) -> usize {
        self.powers.len()
    }

    fn component(&self, x: &[LogDensity], k: usize) -> f64 {
        let a = x[0].to_eigenbasis(&self.powers[k]);
        let t = self.trace(&x[0], &a);
        if t > 0.0 {
            -self.scale * t.ln()
        } else {
            f64::INFINITY
        }
    }

    fn component_with_gradient(&self, x: &[LogDensity], k: usize) -> (f64, Vec<ComplexMatrix>) {
        let a = x[0].to_eigenbasis(&self.powers[k]);
        let t = self.trace(&x[0], &a);
        let gamma = power_divided_differences(x[0].logs(), self.beta);
        let c = -self.scale / t;
        let g = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| a[(i, j)] * (gamma[(i, j)] * c));
        (-self.scale * t.ln(), vec![g])
    }
}

/// `g_x(F) = −log Tr(S_x⁰ F)` in a frame.
struct RinfComponents {
    projectors: Vec<ComplexMatrix>,
    dim: usize,
}

impl RinfComponents {
    fn new<'a>(frame: &Frame, states: impl Iterator<Item = &'a DensityOperator>) -> Self {
        Self {
            projectors: states
                .map(|s| frame.reduce(crate::operator::support_projector(s).matrix()))
                .collect(),
            dim: frame.dim(),
        }
    }
}

impl Components for RinfComponents {
    fn block_dims(&self) -> Vec<usize> {
        vec![self.dim]
    }

    fn count(&self) -> usize {
        self.projectors.len()
    }

    fn component(&self, x: &[LogDensity], k: usize) -> f64 {
        let a = x[0].to_eigenbasis(&self.projectors[k]);
        let t: f64 = x[0]
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(i, l)| l * a[(i, i)].re)
            .sum();
        if t > 0.0 {
            -t.ln()
        } else {
            f64::INFINITY
        }
    }

    fn component_with_gradient(&self, x: &[LogDensity], k: usize) -> (f64, Vec<ComplexMatrix>) {
        let a = x[0].to_eigenbasis(&self.projectors[k]);
        let t: f64 = x[0]
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(i, l)| l * a[(i, i)].re)
            .sum();
        (-t.ln(), vec![a * C64::new(-1.0 / t, 0.0)])
    }
}

/// `E₀(ρ, P)` problem in the joint support frame of the states used by `P`.
struct E0Problem {
    frame: Frame,
    weights: Vec<f64>,
    components: E0Components,
}

impl E0Problem {
    fn new(c: &CQChannel, rho: f64, p: &Composition) -> Result<Self> {
        check_rho(rho)?;
        c.check_composition(p)?;
        let frame = Frame::of(active_states(c, p));
        let components = E0Components::new(&frame, active_states(c, p), rho)?;
        let weights = p.probs().iter().cloned().filter(|&w| w > 0.0).collect();
        Ok(Self {
            frame,
            weights,
            components,
        })
    }

    fn solve(&self, start: Option<Vec<LogDensity>>, opts: &SolverOptions) -> BlockSolution {
        let obj = Weighted {
            components: &self.components,
            weights: &self.weights,
        };
        let Some(start) = start else {
            return minimize_blocks(&obj, opts);
        };
        let warm = minimize_blocks_from(&obj, start, opts);
        if warm.status == SolverStatus::Converged {
            return warm;
        }
        // Warm starts near the boundary can stall; a cold start is retried.
        let cold = minimize_blocks(&obj, opts);
        let better = match (
            cold.status == SolverStatus::Converged,
            warm.status == SolverStatus::Converged,
        ) {
            (true, false) => true,
            (false, true) => false,
            _ => cold.value < warm.value,
        };
        let iterations = warm.iterations + cold.iterations;
        let mut out = if better { cold } else { warm };
        out.iterations = iterations;
        out
    }
}

/// `E₀^cc(ρ, P) = min_F −(1+ρ) Σ_x P(x) log Tr(S_x^{1/(1+ρ)} F^{ρ/(1+ρ)})`.
pub fn e0cc(c: &CQChannel, rho: f64, p: &Composition) -> Result<Minimized> {
    e0cc_with(c, rho, p, &SolverOptions::default())
}

pub fn e0cc_with(
    c: &CQChannel,
    rho: f64,
    p: &Composition,
    opts: &SolverOptions,
) -> Result<Minimized> {
    check_rho(rho)?;
    c.check_composition(p)?;
    if rho == 0.0 {
        return Ok(Minimized {
            exponent: ExponentValue::exact(0.0),
            minimizer: DensityOperator::maximally_mixed(c.dim()),
        });
    }
    let problem = E0Problem::new(c, rho, p)?;
    let sol = problem.solve(None, opts);
    Ok(Minimized {
        exponent: ExponentValue::from_solver(sol.value, sol.status, sol.iterations, sol.gap),
        minimizer: problem.frame.lift(&sol.blocks[0]),
    })
}

/// Classical `E₀` in its two variational forms.
#[derive(Debug, Clone)]
pub struct ClassicalE0 {
    /// `min_V [D(V‖W|P) + ρ I(P,V)]`.
    pub exponent: ExponentValue,
    /// `min_Q −(1+ρ) Σ_x P(x) log Σ_y W(y|x)^{1/(1+ρ)} Q(y)^{ρ/(1+ρ)}`.
    pub q_form: ExponentValue,
    pub v: Vec<Vec<f64>>,
    pub q: Vec<f64>,
}

fn check_stochastic(w: &[Vec<f64>], p: &Composition) -> Result<usize> {
    if w.is_empty() {
        return validation("channel matrix has no rows");
    }
    if w.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: p.len(),
        });
    }
    let ny = w[0].len();
    for row in w {
        if row.len() != ny {
            return validation("channel matrix rows differ in length");
        }
        if row.iter().any(|&v| !(v >= 0.0))
            || (row.iter().sum::<f64>() - 1.0).abs() > crate::channel::PROB_TOL
        {
            return validation("channel matrix rows must be probability vectors");
        }
    }
    Ok(ny)
}

fn v_form_value(w: &[Vec<f64>], p: &Composition, v: &[Vec<f64>], rho: f64) -> f64 {
    let ny = w[0].len();
    let mut out_dist = vec![0.0; ny];
    for x in p.support() {
        for y in 0..ny {
            out_dist[y] += p.get(x) * v[x][y];
        }
    }
    let mut total = 0.0;
    for x in p.support() {
        for y in 0..ny {
            let vy = v[x][y];
            if vy > 0.0 {
                total += p.get(x) * vy * ((vy / w[x][y]).ln() + rho * (vy / out_dist[y]).ln());
            }
        }
    }
    total
}

/// Alternating minimization over `(V, Q)`: the optimal `V` for fixed `Q` is
/// `V(y|x) ∝ W(y|x)^{1/(1+ρ)} Q(y)^{ρ/(1+ρ)}` and the optimal `Q` for fixed `V`
/// is the output distribution.
fn classical_v_form(
    w: &[Vec<f64>],
    p: &Composition,
    rho: f64,
    cols: &[usize],
) -> (Vec<Vec<f64>>, usize) {
    let (a, b) = (1.0 / (1.0 + rho), rho / (1.0 + rho));
    let ny = w[0].len();
    let mut q = vec![0.0; ny];
    for &y in cols {
        q[y] = 1.0 / cols.len() as f64;
    }
    let tilted = |q: &[f64]| -> Vec<Vec<f64>> {
        w.iter()
            .map(|row| {
                let un: Vec<f64> = row
                    .iter()
                    .zip(q)
                    .map(|(&wy, &qy)| {
                        if wy > 0.0 {
                            wy.powf(a) * qy.powf(b)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let z: f64 = un.iter().sum();
                un.iter().map(|u| u / z).collect()
            })
            .collect()
    };
    let mut iterations = 0;
    for it in 0..crate::optimize::DEFAULT_MAX_ITER {
        iterations = it + 1;
        let v = tilted(&q);
        let mut next = vec![0.0; ny];
        for x in p.support() {
            for y in 0..ny {
                next[y] += p.get(x) * v[x][y];
            }
        }
        let change = next
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q = next;
        if change <= 1e-15 {
            break;
        }
    }
    (tilted(&q), iterations)
}

/// Exponentiated-gradient descent on the `Q` form with a Frank–Wolfe gap.
fn classical_q_form(
    w: &[Vec<f64>],
    p: &Composition,
    rho: f64,
    cols: &[usize],
) -> (Vec<f64>, ExponentValue) {
    let (a, b) = (1.0 / (1.0 + rho), rho / (1.0 + rho));
    let ny = w[0].len();
    let value_grad = |q: &[f64]| -> (f64, Vec<f64>) {
        let mut g = vec![0.0; ny];
        let mut v = 0.0;
        for x in p.support() {
            let t: f64 = cols
                .iter()
                .map(|&y| {
                    if w[x][y] > 0.0 {
                        w[x][y].powf(a) * q[y].powf(b)
                    } else {
                        0.0
                    }
                })
                .sum();
            v -= (1.0 + rho) * p.get(x) * t.ln();
            for &y in cols {
                if w[x][y] > 0.0 {
                    g[y] -= (1.0 + rho) * p.get(x) * b * w[x][y].powf(a) * q[y].powf(b - 1.0) / t;
                }
            }
        }
        (v, g)
    };
    let mut q = vec![0.0; ny];
    for &y in cols {
        q[y] = 1.0 / cols.len() as f64;
    }
    let (mut f, mut g) = value_grad(&q);
    let mut eta = 1.0;
    let mut gap = f64::INFINITY;
    let mut flat = 0;
    let mut iterations = 0;
    let mut status = Status::IterationCapped;
    for it in 0..crate::optimize::DEFAULT_MAX_ITER {
        iterations = it;
        let min_g = cols.iter().map(|&y| g[y]).fold(f64::INFINITY, f64::min);
        gap = (cols.iter().map(|&y| q[y] * g[y]).sum::<f64>() - min_g).max(0.0);
        if gap <= 1e-12 * f.abs().max(1.0) || flat >= 20 {
            status = Status::Converged;
            break;
        }
        let mut accepted = None;
        for _ in 0..80 {
            let mut trial = vec![0.0; ny];
            let top = cols
                .iter()
                .map(|&y| q[y].ln() - eta * (g[y] - min_g))
                .fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for &y in cols {
                trial[y] = (q[y].ln() - eta * (g[y] - min_g) - top).exp();
                z += trial[y];
            }
            for &y in cols {
                trial[y] /= z;
            }
            let decrease: f64 = cols.iter().map(|&y| g[y] * (q[y] - trial[y])).sum();
            let (ft, gt) = value_grad(&trial);
            if ft.is_finite() && ft <= f - 1e-4 * decrease.max(0.0) {
                accepted = Some((trial, ft, gt));
                break;
            }
            eta *= 0.5;
        }
        let Some((trial, ft, gt)) = accepted else {
            status = Status::Converged;
            break;
        };
        flat = if f - ft <= 1e-16 * f.abs().max(1.0) {
            flat + 1
        } else {
            0
        };
        q = trial;
        f = ft;
        g = gt;
        eta = (eta * 2.0).min(1e12);
    }
    (
        q,
        ExponentValue {
            value: f.max(0.0),
            status,
            iterations,
            gap_estimate: gap,
        },
    )
}

/// Classical `E₀(ρ, P)` through the `(V, Q)` variational form, with the
/// `Q` form computed by a second, independent optimizer.
pub fn e0cc_classical(w: &[Vec<f64>], rho: f64, p: &Composition) -> Result<ClassicalE0> {
    check_rho(rho)?;
    let ny = check_stochastic(w, p)?;
    if rho == 0.0 {
        let mut q = vec![0.0; ny];
        for x in p.support() {
            for y in 0..ny {
                q[y] += p.get(x) * w[x][y];
            }
        }
        return Ok(ClassicalE0 {
            exponent: ExponentValue::exact(0.0),
            q_form: ExponentValue::exact(0.0),
            v: w.to_vec(),
            q,
        });
    }
    let cols: Vec<usize> = (0..ny)
        .filter(|&y| p.support().any(|x| w[x][y] > 0.0))
        .collect();
    let (v, iterations) = classical_v_form(w, p, rho, &cols);
    let (q, q_form) = classical_q_form(w, p, rho, &cols);
    let value = v_form_value(w, p, &v, rho);
    let gap = (value - q_form.value + q_form.gap_estimate).max(0.0);
    Ok(ClassicalE0 {
        exponent: ExponentValue {
            value: value.max(0.0),
            status: Status::Converged,
            iterations,
            gap_estimate: gap,
        },
        q_form,
        v,
        q,
    })
}

/// `R_∞(P) = min_F −Σ_x P(x) log Tr(S_x⁰ F)`.
pub fn rinf(c: &CQChannel, p: &Composition) -> Result<Minimized> {
    c.check_composition(p)?;
    let frame = Frame::of(active_states(c, p));
    let comps = RinfComponents::new(&frame, active_states(c, p));
    let weights: Vec<f64> = p.probs().iter().cloned().filter(|&w| w > 0.0).collect();
    let sol = minimize_blocks(
        &Weighted {
            components: &comps,
            weights: &weights,
        },
        &SolverOptions::default(),
    );
    Ok(Minimized {
        exponent: ExponentValue::from_solver(sol.value, sol.status, sol.iterations, sol.gap),
        minimizer: frame.lift(&sol.blocks[0]),
    })
}

/// `R_∞ = min_F max_x log 1/Tr(S_x⁰ F)`, the composition-free form.
pub fn rinf_global(c: &CQChannel) -> Result<Minimized> {
    let frame = Frame::of(c.states().iter());
    let comps = RinfComponents::new(&frame, c.states().iter());
    let sol = minimize_max(&comps, &SolverOptions::default());
    Ok(Minimized {
        exponent: ExponentValue::from_solver(sol.value, sol.status, sol.iterations, sol.gap),
        minimizer: frame.lift(&sol.blocks[0]),
    })
}

/// `E_sp^cc(R − ε, P) = sup_{ρ≥0} [E₀^cc(ρ,P) − ρ(R − ε)]`.
///
/// The supremum is located on a logarithmic `ρ` grid over
/// `[RHO_MIN, RHO_MAX]` (plus `ρ = 0`) and refined by golden-section search
/// on the bracketing interval. Rates below `R_∞(P)` give `+∞`.
pub fn espcc(c: &CQChannel, r: f64, p: &Composition, epsilon: f64) -> Result<ExponentValue> {
    if !(r > 0.0) || !r.is_finite() {
        return validation(format!("rate must be positive, got {r}"));
    }
    if !(epsilon > 0.0 && epsilon < r) {
        return validation(format!("epsilon must lie in (0, R), got {epsilon}"));
    }
    c.check_composition(p)?;
    let target = r - epsilon;
    let ri = rinf(c, p)?;
    if target < ri.exponent.value - FEASIBILITY_TOL {
        return Ok(ExponentValue::infinite());
    }
    let sweep = RhoSweep::new(c, p)?;
    sweep.sup_linear(target, epsilon, ri.exponent.value)
}

/// Evaluates `Σ_a w_a E₀(C_a, ρ, P_a)` along increasing `ρ` with warm starts.
pub(crate) struct RhoSweep<'a> {
    terms: Vec<(&'a CQChannel, &'a Composition, f64)>,
    grid: Vec<f64>,
    values: Vec<f64>,
    starts: Vec<Vec<Vec<LogDensity>>>,
    iterations: usize,
    gaps: Vec<f64>,
    capped: bool,
}

impl<'a> RhoSweep<'a> {
    fn new(channel: &'a CQChannel, composition: &'a Composition) -> Result<Self> {
        Self::weighted(vec![(channel, composition, 1.0)])
    }

    pub(crate) fn weighted(terms: Vec<(&'a CQChannel, &'a Composition, f64)>) -> Result<Self> {
        let ratio = (RHO_MAX / RHO_MIN).ln() / (RHO_GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..RHO_GRID_POINTS)
            .map(|k| RHO_MIN * (ratio * k as f64).exp())
            .collect();
        let mut values = vec![0.0; grid.len()];
        let mut starts = vec![Vec::with_capacity(terms.len()); grid.len()];
        let mut gaps = vec![0.0; grid.len()];
        let mut iterations = 0;
        let mut capped = false;
        for &(channel, composition, weight) in &terms {
            let mut start = None;
            for (k, &rho) in grid.iter().enumerate() {
                let problem = E0Problem::new(channel, rho, composition)?;
                let sol = problem.solve(start.take(), &SolverOptions::default());
                iterations += sol.iterations;
                capped |= matches!(
                    sol.status,
                    SolverStatus::IterationCapped | SolverStatus::Stalled
                );
                values[k] += weight * sol.value.max(0.0);
                gaps[k] += weight * sol.gap;
                start = Some(sol.blocks.clone());
                starts[k].push(sol.blocks);
            }
        }
        Ok(Self {
            terms,
            grid,
            values,
            starts,
            iterations,
            gaps,
            capped,
        })
    }

    fn e0_at(&self, rho: f64, near: usize) -> Result<(f64, usize)> {
        let mut value = 0.0;
        let mut iterations = 0;
        for (t, &(channel, composition, weight)) in self.terms.iter().enumerate() {
            let problem = E0Problem::new(channel, rho, composition)?;
            let sol = problem.solve(
                Some(self.starts[near][t].clone()),
                &SolverOptions::default(),
            );
            value += weight * sol.value.max(0.0);
            iterations += sol.iterations;
        }
        Ok((value, iterations))
    }

    /// `sup_ρ [E₀(ρ) − ρ·target]`.
    pub(crate) fn sup_linear(
        &self,
        target: f64,
        epsilon: f64,
        rinf_value: f64,
    ) -> Result<ExponentValue> {
        let h: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(rho, e)| e - rho * target)
            .collect();
        let (best_k, best_h) =
            h.iter()
                .cloned()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
                );
        let mut iterations = self.iterations;
        let status = if self.capped {
            Status::IterationCapped
        } else {
            Status::Converged
        };
        if best_h <= 0.0 && h[0] <= 0.0 {
            return Ok(ExponentValue {
                value: 0.0,
                status,
                iterations,
                gap_estimate: self.gaps[0],
            });
        }
        let last = self.grid.len() - 1;
        if best_k == last {
            let slope = (h[last] - h[last - 1]) / (self.grid[last] - self.grid[last - 1]);
            if slope > epsilon / 2.0 && target < rinf_value + 1e-6 {
                return Ok(ExponentValue::infinite());
            }
            return Ok(ExponentValue {
                value: best_h.max(0.0),
                status: Status::IterationCapped,
                iterations,
                gap_estimate: self.gaps[last],
            });
        }
        let lo = if best_k == 0 {
            self.grid[0] * 1e-3
        } else {
            self.grid[best_k - 1]
        };
        let hi = self.grid[best_k + 1];
        let evals = std::cell::Cell::new(0usize);
        let refine = |u: f64| {
            let rho = u.exp();
            match self.e0_at(rho, best_k) {
                Ok((e, it)) => {
                    evals.set(evals.get() + it);
                    e - rho * target
                }
                Err(_) => f64::NEG_INFINITY,
            }
        };
        let (_, refined) = golden_section_max(refine, lo.ln(), hi.ln(), RHO_REFINE_TOL);
        iterations += evals.get();
        // Refinement disagreeing with the grid falls back to the grid maximum.
        let value = if refined >= best_h - 1e-6 {
            refined.max(best_h)
        } else {
            best_h
        };
        Ok(ExponentValue {
            value: value.max(0.0),
            status,
            iterations,
            gap_estimate: self.gaps[best_k],
        })
    }
}

/// Holevo information `H(Σ P(x) S_x) − Σ P(x) H(S_x)`.
pub fn holevo_information(c: &CQChannel, p: &Composition) -> Result<f64> {
    c.check_composition(p)?;
    let mut avg = ComplexMatrix::zeros(c.dim(), c.dim());
    let mut cond = 0.0;
    for x in p.support() {
        avg += c.state(x).matrix() * C64::new(p.get(x), 0.0);
        cond += p.get(x) * c.state(x).von_neumann_entropy();
    }
    let h = DensityOperator::from_matrix_unchecked(avg).von_neumann_entropy();
    Ok((h - cond).max(0.0))
}

/// `D(V‖S|P)` and the Holevo quantity `χ(P, V)` for states `V_x` restricted
/// to the supports of `S_x`. Block `k` holds the state of the `k`-th used
/// symbol in the eigenbasis of that symbol's support.
struct HaroutunianProblem {
    weights: Vec<f64>,
    /// Support eigenvectors of each used state, in frame coordinates.
    embeddings: Vec<ComplexMatrix>,
    /// Log-eigenvalues of each used state on its support.
    log_states: Vec<Vec<f64>>,
    frame_dim: usize,
    rate: f64,
    /// Weight on the divergence term (zero for pure Holevo minimization).
    divergence_weight: f64,
    multiplier: f64,
    penalty: f64,
}

fn entropy_of_logs(x: &LogDensity) -> f64 {
    -x.logs().iter().map(|l| l * l.exp()).sum::<f64>()
}

impl HaroutunianProblem {
    fn new(c: &CQChannel, p: &Composition, rate: f64) -> Self {
        let frame = Frame::of(active_states(c, p));
        let mut embeddings = Vec::new();
        let mut log_states = Vec::new();
        let mut weights = Vec::new();
        for x in p.support() {
            let es = c.state(x).eig();
            let supp = es.support_indices();
            let mut v = ComplexMatrix::zeros(c.dim(), supp.len());
            for (k, &i) in supp.iter().enumerate() {
                v.set_column(k, &es.eigenvectors.column(i));
            }
            embeddings.push(frame.basis.adjoint() * v);
            log_states.push(supp.iter().map(|&i| es.eigenvalues[i].ln()).collect());
            weights.push(p.get(x));
        }
        Self {
            weights,
            embeddings,
            log_states,
            frame_dim: frame.dim(),
            rate,
            divergence_weight: 1.0,
            multiplier: 0.0,
            penalty: 0.0,
        }
    }

    fn average(&self, x: &[LogDensity]) -> ComplexMatrix {
        let mut avg = ComplexMatrix::zeros(self.frame_dim, self.frame_dim);
        for (k, b) in x.iter().enumerate() {
            let v = &self.embeddings[k] * b.basis();
            avg += spectral_sum(&v, &b.eigenvalues()) * C64::new(self.weights[k], 0.0);
        }
        avg
    }

    fn divergence(&self, x: &[LogDensity]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(k, b)| {
                let lam = b.eigenvalues();
                let u = b.basis();
                let cross: f64 = (0..b.dim())
                    .map(|i| {
                        lam[i]
                            * (0..b.dim())
                                .map(|j| u[(j, i)].norm_sqr() * self.log_states[k][j])
                                .sum::<f64>()
                    })
                    .sum();
                self.weights[k] * (-entropy_of_logs(b) - cross)
            })
            .sum()
    }

    fn holevo(&self, x: &[LogDensity]) -> f64 {
        let avg = DensityOperator::from_matrix_unchecked(self.average(x));
        avg.von_neumann_entropy()
            - x.iter()
                .enumerate()
                .map(|(k, b)| self.weights[k] * entropy_of_logs(b))
                .sum::<f64>()
    }

    fn penalty_term(&self, chi: f64) -> (f64, f64) {
        if self.penalty == 0.0 {
            return (0.0, 0.0);
        }
        let g = chi - self.rate;
        let s = (self.multiplier + self.penalty * g).max(0.0);
        (
            (s * s - self.multiplier * self.multiplier) / (2.0 * self.penalty),
            s,
        )
    }
}

impl BlockObjective for HaroutunianProblem {
    fn block_dims(&self) -> Vec<usize> {
        self.embeddings.iter().map(|e| e.ncols()).collect()
    }

    fn value(&self, x: &[LogDensity]) -> f64 {
        let d = if self.divergence_weight > 0.0 {
            self.divergence_weight * self.divergence(x)
        } else {
            0.0
        };
        let chi = self.holevo(x);
        if self.penalty == 0.0 {
            return d + if self.divergence_weight == 0.0 {
                chi
            } else {
                0.0
            };
        }
        d + self.penalty_term(chi).0
    }

    fn value_and_gradient(&self, x: &[LogDensity]) -> (f64, Vec<ComplexMatrix>) {
        let value = self.value(x);
        let avg = DensityOperator::from_matrix_unchecked(self.average(x));
        let chi_weight = if self.penalty == 0.0 {
            if self.divergence_weight == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            self.penalty_term(self.holevo(x)).1
        };
        let log_avg = if chi_weight > 0.0 {
            Some(crate::renyi::log_on_support(&avg))
        } else {
            None
        };
        let grads = x
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let r = b.dim();
                let mut g = ComplexMatrix::zeros(r, r);
                let logs = b.logs();
                if self.divergence_weight > 0.0 {
                    let ls = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                        r,
                        self.log_states[k].iter().map(|&l| C64::new(l, 0.0)),
                    ));
                    let ls = b.to_eigenbasis(&ls);
                    for i in 0..r {
                        g[(i, i)] += C64::new(logs[i], 0.0);
                    }
                    g -= ls;
                    g *= C64::new(self.divergence_weight, 0.0);
                }
                if let Some(la) = &log_avg {
                    let v = &self.embeddings[k] * b.basis();
                    let proj = v.adjoint() * la * &v;
                    let mut h = -proj;
                    for i in 0..r {
                        h[(i, i)] += C64::new(logs[i], 0.0);
                    }
                    g += h * C64::new(chi_weight, 0.0);
                }
                g * C64::new(self.weights[k], 0.0)
            })
            .collect();
        (value, grads)
    }
}

fn mix_blocks(a: &[LogDensity], b: &[LogDensity], t: f64) -> Vec<DensityOperator> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let m = x.to_density().matrix() * C64::new(1.0 - t, 0.0)
                + y.to_density().matrix() * C64::new(t, 0.0);
            DensityOperator::from_matrix_unchecked(m)
        })
        .collect()
}

fn blocks_from_states(states: &[DensityOperator]) -> Vec<LogDensity> {
    states.iter().map(LogDensity::from_density).collect()
}

/// `min {D(V‖S|P) : supp V_x ⊆ supp S_x, I(P,V) ≤ R}`.
///
/// Returns `0` when `R ≥ I(P,S)` and `+∞` when no feasible `V` exists (in
/// particular for pure-state channels below `I(P,S)`). Otherwise the
/// returned value is a feasible point of an augmented Lagrangian run and is
/// not certified optimal.
pub fn haroutunian_quantum(c: &CQChannel, r: f64, p: &Composition) -> Result<ExponentValue> {
    if !(r >= 0.0) || !r.is_finite() {
        return validation(format!("rate must be finite and non-negative, got {r}"));
    }
    let holevo = holevo_information(c, p)?;
    if r >= holevo - 1e-12 {
        return Ok(ExponentValue::exact(0.0));
    }
    if p.support().all(|x| c.state(x).is_pure()) {
        return Ok(ExponentValue::infinite());
    }
    let mut problem = HaroutunianProblem::new(c, p, r);
    problem.divergence_weight = 0.0;
    let opts = SolverOptions::default();
    let least = minimize_blocks(&problem, &opts);
    let mut iterations = least.iterations;
    if least.value > r + FEASIBILITY_TOL {
        return Ok(ExponentValue {
            iterations,
            gap_estimate: least.gap,
            ..ExponentValue::infinite()
        });
    }
    problem.divergence_weight = 1.0;
    problem.penalty = 10.0;
    let mut x: Vec<LogDensity> = problem
        .block_dims()
        .iter()
        .map(|&d| LogDensity::maximally_mixed(d))
        .collect();
    let mut gap = 0.0;
    for _ in 0..10 {
        let sol = minimize_blocks_from(&problem, x, &opts);
        iterations += sol.iterations;
        gap = sol.gap;
        x = sol.blocks;
        let violation = problem.holevo(&x) - r;
        problem.multiplier = (problem.multiplier + problem.penalty * violation).max(0.0);
        if violation > 1e-10 {
            problem.penalty *= 10.0;
        }
    }
    // Restore feasibility along the segment towards the least-χ point; χ is
    // convex in V, so the mixed point satisfies the constraint.
    let chi = problem.holevo(&x);
    let value = if chi > r {
        let t = ((chi - r) / (chi - least.value)).clamp(0.0, 1.0);
        let mixed = blocks_from_states(&mix_blocks(&x, &least.blocks, t));
        problem.divergence(&mixed)
    } else {
        problem.divergence(&x)
    };
    Ok(ExponentValue {
        value: value.max(0.0),
        status: Status::Converged,
        iterations,
        gap_estimate: gap,
    })
}

/// Result of [`e0_maxp`]: the min-max value and the composition-grid check.
#[derive(Debug, Clone)]
pub struct MaxPSolution {
    /// `min_F max_x −(1+ρ) log Tr(S_x^{1/(1+ρ)} F^{ρ/(1+ρ)})`.
    pub exponent: ExponentValue,
    pub minimizer: DensityOperator,
    /// `max` of `E₀^cc(ρ, P)` over the composition grid.
    pub grid_max: f64,
    pub grid_argmax: Composition,
}

/// Compositions used for the grid side of [`e0_maxp`].
pub fn composition_grid(k: usize, seed: u64) -> Result<Vec<Composition>> {
    if k <= 4 {
        crate::channel::simplex_grid(k, COMPOSITION_STEP)
    } else {
        let mut grid = vec![Composition::uniform(k)];
        grid.extend(crate::channel::dirichlet_samples(
            k,
            DIRICHLET_SAMPLES,
            seed,
        ));
        Ok(grid)
    }
}

/// `max_P E₀^cc(ρ, P)` computed as a min-max over `F`, cross-checked on a
/// composition grid.
pub fn e0_maxp(c: &CQChannel, rho: f64, seed: u64) -> Result<MaxPSolution> {
    e0_maxp_with(c, rho, seed, Execution::default())
}

pub fn e0_maxp_with(c: &CQChannel, rho: f64, seed: u64, exec: Execution) -> Result<MaxPSolution> {
    check_rho(rho)?;
    let k = c.alphabet_size();
    let grid = composition_grid(k, seed)?;
    if rho == 0.0 {
        return Ok(MaxPSolution {
            exponent: ExponentValue::exact(0.0),
            minimizer: DensityOperator::maximally_mixed(c.dim()),
            grid_max: 0.0,
            grid_argmax: grid[0].clone(),
        });
    }
    let frame = Frame::of(c.states().iter());
    let comps = E0Components::new(&frame, c.states().iter(), rho)?;
    let sol = minimize_max(&comps, &SolverOptions::default());
    let values = map_slice(exec, &grid, |p| e0cc(c, rho, p).map(|m| m.exponent.value));
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(MaxPSolution {
        exponent: ExponentValue::from_solver(sol.value, sol.status, sol.iterations, sol.gap),
        minimizer: frame.lift(&sol.blocks[0]),
        grid_max: best.1,
        grid_argmax: grid[best.0].clone(),
    })
}

/// One point of the parametric sphere-packing curve.
#[derive(Debug, Clone)]
pub struct SpCurvePoint {
    pub s: f64,
    pub rho: f64,
    pub rate: f64,
    pub exponent: f64,
    pub minimizer: DensityOperator,
}

fn check_s(s: f64) -> Result<()> {
    if !(MIN_S..1.0).contains(&s) {
        return validation(format!("s must lie in [{MIN_S}, 1), got {s}"));
    }
    Ok(())
}

/// `F_s`, `R*(s,P) = −Σ P(x)[μ_x(s) + (1−s)μ′_x(s)]` and the exponent
/// `E₀^cc(ρ,P) − ρR*(s,P)` with `ρ = s/(1−s)`.
pub fn sp_parametric_point(c: &CQChannel, p: &Composition, s: f64) -> Result<SpCurvePoint> {
    check_s(s)?;
    let rho = s / (1.0 - s);
    let e0 = e0cc(c, rho, p)?;
    let f = e0.minimizer;
    let mut rate = 0.0;
    for x in p.support() {
        let m = MuFunction::new(c.state(x), &f)?;
        rate -= p.get(x) * (mu(&m, s)? + (1.0 - s) * mu_prime(&m, s)?);
    }
    let rate = rate.max(0.0);
    Ok(SpCurvePoint {
        s,
        rho,
        rate,
        exponent: (e0.exponent.value - rho * rate).max(0.0),
        minimizer: f,
    })
}

/// Finite-length rate threshold
/// `R_n = −Σ P_n(x)[μ_x + (1−s)μ′_x] + (1−s)√(2Σ P_n(x) μ″_x)/√n + (log 8)/n`.
pub fn rn_finite(
    c: &CQChannel,
    p_n: &Composition,
    s: f64,
    f: &DensityOperator,
    n: u64,
) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return validation(format!("s must lie in (0,1), got {s}"));
    }
    if n == 0 {
        return validation("block length must be at least 1");
    }
    c.check_composition(p_n)?;
    let mut first = 0.0;
    let mut curvature = 0.0;
    for x in p_n.support() {
        let m = MuFunction::new(c.state(x), f)?;
        first -= p_n.get(x) * (mu(&m, s)? + (1.0 - s) * mu_prime(&m, s)?);
        curvature += p_n.get(x) * mu_double_prime(&m, s)?;
    }
    let n = n as f64;
    Ok(first + (1.0 - s) * (2.0 * curvature).sqrt() / n.sqrt() + 8f64.ln() / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{from_classical, pure_state_channel};
    use approx::assert_abs_diff_eq;

    fn bsc(e: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - e, e], vec![e, 1.0 - e]]
    }

    fn qubit_pair(overlap: f64) -> CQChannel {
        let th = overlap.acos();
        pure_state_channel(&[
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn e0_trivial_cases() {
        let c = from_classical(&bsc(0.1)).unwrap();
        let p = Composition::uniform(2);
        assert_eq!(e0cc(&c, 0.0, &p).unwrap().exponent.value, 0.0);
        let same =
            CQChannel::new(vec![DensityOperator::diagonal(&[0.3, 0.7]).unwrap(); 3]).unwrap();
        for rho in [0.5, 1.0, 7.0] {
            assert!(
                e0cc(&same, rho, &Composition::uniform(3))
                    .unwrap()
                    .exponent
                    .value
                    < 1e-10
            );
        }
        assert!(e0cc(&c, -1.0, &p).is_err());
    }

    #[test]
    fn e0_bsc_matches_gallager_closed_form() {
        // For symmetric channels the optimal output is uniform.
        let e: f64 = 0.1;
        let c = from_classical(&bsc(e)).unwrap();
        for rho in [0.25, 1.0, 4.0] {
            let a = 1.0 / (1.0 + rho);
            let expected = rho * 2f64.ln() - (1.0 + rho) * ((1.0 - e).powf(a) + e.powf(a)).ln();
            let got = e0cc(&c, rho, &Composition::uniform(2)).unwrap();
            assert_eq!(got.exponent.status, Status::Converged);
            assert_abs_diff_eq!(got.exponent.value, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn classical_forms_agree() {
        let w = bsc(0.1);
        let r = e0cc_classical(&w, 1.0, &Composition::uniform(2)).unwrap();
        assert!((r.exponent.value - r.q_form.value).abs() <= 1e-8);
        let w = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = e0cc_classical(&w, 1.0, &Composition::uniform(2)).unwrap();
        assert_abs_diff_eq!(r.exponent.value, 2f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.q_form.value, 2f64.ln(), epsilon = 1e-9);
        let r0 = e0cc_classical(&bsc(0.2), 0.0, &Composition::uniform(2)).unwrap();
        assert_eq!(r0.exponent.value, 0.0);
        assert_eq!(r0.v, bsc(0.2));
    }

    #[test]
    fn rinf_examples() {
        let full = from_classical(&bsc(0.1)).unwrap();
        assert!(
            rinf(&full, &Composition::uniform(2))
                .unwrap()
                .exponent
                .value
                < 1e-10
        );
        let orth = from_classical(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let p = Composition::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_abs_diff_eq!(
            rinf(&orth, &p).unwrap().exponent.value,
            p.entropy(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            rinf_global(&orth).unwrap().exponent.value,
            3f64.ln(),
            epsilon = 1e-6
        );
        let single = pure_state_channel(&[vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]).unwrap();
        assert!(
            rinf(&single, &Composition::uniform(1))
                .unwrap()
                .exponent
                .value
                < 1e-10
        );
    }

    #[test]
    fn espcc_validation_and_branches() {
        let c = from_classical(&bsc(0.1)).unwrap();
        let p = Composition::uniform(2);
        assert!(espcc(&c, 0.1, &p, 0.2).is_err());
        assert!(espcc(&c, 0.0, &p, 0.0).is_err());
        assert_eq!(espcc(&c, 0.69, &p, 1e-3).unwrap().value, 0.0);
        let orth = from_classical(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let v = espcc(&orth, 0.5, &p, 1e-3).unwrap();
        assert_eq!(v.value, f64::INFINITY);
        assert_eq!(v.status, Status::Infeasible);
    }

    #[test]
    fn haroutunian_examples() {
        let c = qubit_pair(0.5);
        let p = Composition::uniform(2);
        let i = holevo_information(&c, &p).unwrap();
        assert_eq!(haroutunian_quantum(&c, 1.1 * i, &p).unwrap().value, 0.0);
        assert_eq!(
            haroutunian_quantum(&c, 0.9 * i, &p).unwrap().value,
            f64::INFINITY
        );
    }

    #[test]
    fn parametric_point_and_finite_rate() {
        let same =
            CQChannel::new(vec![DensityOperator::diagonal(&[0.4, 0.6]).unwrap(); 2]).unwrap();
        let p = Composition::uniform(2);
        let pt = sp_parametric_point(&same, &p, 0.5).unwrap();
        assert!(pt.rate < 1e-9 && pt.exponent < 1e-9);
        for n in [1u64, 10, 1000] {
            let r = rn_finite(&same, &p, 0.5, same.state(0), n).unwrap();
            assert_abs_diff_eq!(r, 8f64.ln() / n as f64, epsilon = 1e-14);
        }
        assert!(sp_parametric_point(&same, &p, 1e-4).is_err());
        assert!(sp_parametric_point(&same, &p, 1.0).is_err());
    }
}
