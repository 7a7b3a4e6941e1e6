//! Reference implementations and instance generators shared by the
//! integration and acceptance tests. Nothing here calls into the solvers
//! under test.
#![allow(dead_code)]

use cqsp::channel::{
    from_classical, pure_state_channel, CQChannel, Composition, ConfusabilityGraph,
};
use cqsp::operator::{ComplexMatrix, DensityOperator, HermitianOperator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bsc(e: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - e, e], vec![e, 1.0 - e]]
}

pub fn random_stochastic(rng: &mut impl Rng, nx: usize, ny: usize) -> Vec<Vec<f64>> {
    (0..nx)
        .map(|_| {
            let row: Vec<f64> = (0..ny).map(|_| 0.05 + rng.random::<f64>()).collect();
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect()
}

pub fn random_composition(rng: &mut impl Rng, k: usize) -> Composition {
    let v: Vec<f64> = (0..k).map(|_| 0.1 + rng.random::<f64>()).collect();
    let s: f64 = v.iter().sum();
    Composition::new(v.iter().map(|x| x / s).collect()).unwrap()
}

pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d)
        .map(|_| {
            C64::new(
                StandardNormal.sample(&mut *rng),
                StandardNormal.sample(&mut *rng),
            )
        })
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / n).collect()
}

pub fn random_pure_channel(rng: &mut impl Rng, nx: usize, d: usize) -> CQChannel {
    let vs: Vec<Vec<C64>> = (0..nx).map(|_| random_unit_vector(rng, d)).collect();
    pure_state_channel(&vs).unwrap()
}

pub fn random_density(rng: &mut impl Rng, d: usize, rank: usize) -> DensityOperator {
    let g = ComplexMatrix::from_fn(d, rank, |_, _| {
        C64::new(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    });
    let m = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    DensityOperator::new(m / C64::new(tr, 0.0)).unwrap()
}

pub fn random_mixed_channel(rng: &mut impl Rng, nx: usize, d: usize) -> CQChannel {
    CQChannel::new((0..nx).map(|_| random_density(rng, d, d)).collect()).unwrap()
}

pub fn diagonal_channel(w: &[Vec<f64>]) -> CQChannel {
    from_classical(w).unwrap()
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|v| -v * v.ln()).sum()
}

/// Binary KL divergence `D(a‖b)` in nats.
pub fn binary_kl(a: f64, b: f64) -> f64 {
    let t = |x: f64, y: f64| if x > 0.0 { x * (x / y).ln() } else { 0.0 };
    t(a, b) + t(1.0 - a, 1.0 - b)
}

/// Sphere-packing exponent of BSC(e) at uniform input: `D(δ‖e)` with
/// `log 2 − h(δ) = R`, `δ ∈ [e, 1/2]`, and zero above capacity.
pub fn bsc_sphere_packing(e: f64, r: f64) -> f64 {
    let cap = 2f64.ln() - entropy(&[e, 1.0 - e]);
    if r >= cap {
        return 0.0;
    }
    let (mut lo, mut hi) = (e, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2f64.ln() - entropy(&[mid, 1.0 - mid]) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    binary_kl(0.5 * (lo + hi), e)
}

fn kl_and_mi(w: &[Vec<f64>], p: &[f64], v: &[Vec<f64>]) -> (f64, f64) {
    let ny = w[0].len();
    let q: Vec<f64> = (0..ny)
        .map(|y| (0..w.len()).map(|x| p[x] * v[x][y]).sum())
        .collect();
    let mut d = 0.0;
    let mut i = 0.0;
    for x in 0..w.len() {
        for y in 0..ny {
            if p[x] > 0.0 && v[x][y] > 0.0 {
                d += p[x] * v[x][y] * (v[x][y] / w[x][y]).ln();
                i += p[x] * v[x][y] * (v[x][y] / q[y]).ln();
            }
        }
    }
    (d, i)
}

/// `V_λ` minimizing `D(V‖W|P) + λI(P,V)`: alternating minimization over
/// `V` and the output distribution `Q`, with `V ∝ W^{1/(1+λ)} Q^{λ/(1+λ)}`.
fn tilted_minimizer(w: &[Vec<f64>], p: &[f64], lambda: f64) -> Vec<Vec<f64>> {
    let ny = w[0].len();
    let a = 1.0 / (1.0 + lambda);
    let mut q = vec![1.0 / ny as f64; ny];
    let mut v = w.to_vec();
    for _ in 0..100_000 {
        v = w
            .iter()
            .map(|row| {
                let t: Vec<f64> = row
                    .iter()
                    .zip(&q)
                    .map(|(wy, qy)| wy.powf(a) * qy.powf(1.0 - a))
                    .collect();
                let s: f64 = t.iter().sum();
                t.iter().map(|x| x / s).collect()
            })
            .collect();
        let next: Vec<f64> = (0..ny)
            .map(|y| (0..w.len()).map(|x| p[x] * v[x][y]).sum())
            .collect();
        let moved = next
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q = next;
        if moved < 1e-15 {
            break;
        }
    }
    v
}

/// `min {D(V‖W|P) : I(P,V) ≤ r}`, by bisection on the multiplier `λ` of the
/// mutual-information constraint.
pub fn constrained_kl(w: &[Vec<f64>], p: &[f64], r: f64) -> f64 {
    if kl_and_mi(w, p, w).1 <= r {
        return 0.0;
    }
    let mut hi = 1.0;
    while kl_and_mi(w, p, &tilted_minimizer(w, p, hi)).1 > r {
        hi *= 2.0;
        if hi > 1e8 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if kl_and_mi(w, p, &tilted_minimizer(w, p, mid)).1 > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    kl_and_mi(w, p, &tilted_minimizer(w, p, hi)).0
}

/// Real density operators on a qubit, `(I + x σ_x + z σ_z)/2` with
/// `x² + z² ≤ 1`.
pub fn bloch_state(x: f64, z: f64) -> DensityOperator {
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(x / 2.0, 0.0),
            C64::new(x / 2.0, 0.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        ],
    );
    DensityOperator::new(m).unwrap()
}

/// `−(1+ρ) Σ P(x) log Tr(S_x^{1/(1+ρ)} F^{ρ/(1+ρ)})` evaluated through explicit
/// 2×2 eigendecompositions.
pub fn e0_objective_qubit(states: &[[f64; 3]], p: &[f64], rho: f64, f: (f64, f64)) -> f64 {
    // states given as real Bloch vectors (x, y=0, z) with length r ≤ 1
    let power = |bx: f64, bz: f64, a: f64| -> [[f64; 2]; 2] {
        let r = (bx * bx + bz * bz).sqrt();
        let (lp, lm) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
        let pw = |l: f64| if l > 1e-15 { l.powf(a) } else { 0.0 };
        let (cp, cm) = (pw(lp), pw(lm));
        if r < 1e-15 {
            return [[cp, 0.0], [0.0, cp]];
        }
        let (nx, nz) = (bx / r, bz / r);
        // projector onto +: (I + n·σ)/2
        let pp = [[(1.0 + nz) / 2.0, nx / 2.0], [nx / 2.0, (1.0 - nz) / 2.0]];
        let pm = [[(1.0 - nz) / 2.0, -nx / 2.0], [-nx / 2.0, (1.0 + nz) / 2.0]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = cp * pp[i][j] + cm * pm[i][j];
            }
        }
        out
    };
    let a = 1.0 / (1.0 + rho);
    let b = rho / (1.0 + rho);
    let fb = power(f.0, f.1, b);
    let mut total = 0.0;
    for (s, &px) in states.iter().zip(p) {
        if px == 0.0 {
            continue;
        }
        let sa = power(s[0], s[2], a);
        let t =
            sa[0][0] * fb[0][0] + sa[0][1] * fb[1][0] + sa[1][0] * fb[0][1] + sa[1][1] * fb[1][1];
        total -= (1.0 + rho) * px * t.ln();
    }
    total
}

/// Coarse-to-fine grid minimization over the Bloch disk.
pub fn bloch_grid_min(obj: impl Fn(f64, f64) -> f64, resolution: f64) -> f64 {
    let (mut cx, mut cz, mut half) = (0.0, 0.0, 1.0);
    let mut best = f64::INFINITY;
    while half > resolution {
        let n = 40;
        let h = 2.0 * half / n as f64;
        let (mut bx, mut bz) = (cx, cz);
        for i in 0..=n {
            for j in 0..=n {
                let (x, z) = (cx - half + h * i as f64, cz - half + h * j as f64);
                if x * x + z * z > 1.0 {
                    continue;
                }
                let v = obj(x, z);
                if v < best {
                    best = v;
                    bx = x;
                    bz = z;
                }
            }
        }
        cx = bx;
        cz = bz;
        half = 4.0 * h;
    }
    best
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Modified Gram–Schmidt of `v` against an orthonormal list; `None` when the
/// remainder is numerically zero.
fn orthonormalize(v: &mut Vec<C64>, basis: &[Vec<C64>]) -> Option<()> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let n = dot(v, v).re.sqrt();
    if n < 1e-8 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(())
}

/// Orthogonal projectors `U_x` of the given ranks with `U_x U_x′ = 0` for
/// every non-adjacent pair, built vertex by vertex, and a random full-rank
/// state.
pub fn random_projector_representation(
    rng: &mut impl Rng,
    g: &ConfusabilityGraph,
    ranks: &[usize],
) -> (Vec<HermitianOperator>, DensityOperator) {
    let n = g.vertex_count();
    let d: usize = ranks.iter().sum();
    let mut ranges: Vec<Vec<Vec<C64>>> = Vec::with_capacity(n);
    for x in 0..n {
        let mut forbidden: Vec<Vec<C64>> = Vec::new();
        for j in (0..x).filter(|&j| !g.adjacent(x, j)) {
            for v in &ranges[j] {
                let mut w = v.clone();
                if orthonormalize(&mut w, &forbidden).is_some() {
                    forbidden.push(w);
                }
            }
        }
        let mut own: Vec<Vec<C64>> = Vec::new();
        while own.len() < ranks[x] {
            let mut v = random_unit_vector(rng, d);
            let all: Vec<Vec<C64>> = forbidden.iter().chain(&own).cloned().collect();
            if orthonormalize(&mut v, &all).is_some() {
                own.push(v);
            }
        }
        ranges.push(own);
    }
    let projectors = ranges
        .iter()
        .map(|vs| {
            let m =
                ComplexMatrix::from_fn(d, d, |i, j| vs.iter().map(|v| v[i] * v[j].conj()).sum());
            HermitianOperator::new(m).unwrap()
        })
        .collect();
    (projectors, random_density(rng, d, d))
}

/// `Tr(U F)` computed entrywise.
pub fn trace_of(u: &HermitianOperator, f: &DensityOperator) -> f64 {
    let (a, b) = (u.matrix(), f.matrix());
    let d = a.nrows();
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)] * b[(j, i)]).re)
        .sum()
}

/// Pure-state channel with `|X|` orthonormal basis states.
pub fn orthogonal_channel(k: usize) -> CQChannel {
    let vs: Vec<Vec<C64>> = (0..k)
        .map(|x| {
            (0..k)
                .map(|i| C64::new(if i == x { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    pure_state_channel(&vs).unwrap()
}

/// `E₀(ρ)` of BSC(e) at uniform input: `ρ log 2 − (1+ρ) log((1−e)^{1/(1+ρ)} + e^{1/(1+ρ)})`.
pub fn bsc_e0(e: f64, rho: f64) -> f64 {
    let a = 1.0 / (1.0 + rho);
    rho * 2f64.ln() - (1.0 + rho) * ((1.0 - e).powf(a) + e.powf(a)).ln()
}
