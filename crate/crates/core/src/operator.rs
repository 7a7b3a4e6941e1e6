//! Dense Hermitian operator algebra on small finite-dimensional spaces.
//!
//! Everything here is built on a deterministic cyclic Jacobi eigensolver;
//! matrix functions (powers, logarithms, exponentials, support projectors)
//! are evaluated through the spectral decomposition.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{validation, Error, Result};

pub type C64 = Complex64;

/// Square complex matrix, column-major.
pub type ComplexMatrix = DMatrix<C64>;

/// Tolerance on `‖A − A†‖_max` for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `[-CLAMP_TOL, 0)` are clamped to zero for density operators.
pub const CLAMP_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Relative eigenvalue threshold separating the support from round-off.
pub const RANK_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_DIM_CAP: usize = 4096;

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Spectral decomposition `A = U diag(λ) U†` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(λ)) U†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        spectral_sum(&self.eigenvectors, &vals)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |m, &l| m.max(l.abs()))
    }

    /// Indices of eigenvalues above the relative rank threshold.
    pub fn support_indices(&self) -> Vec<usize> {
        let cut = RANK_THRESHOLD * self.eigenvalues.iter().cloned().fold(0.0, f64::max);
        (0..self.dim())
            .filter(|&i| self.eigenvalues[i] > cut)
            .collect()
    }

    pub fn column(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i).iter().cloned().collect()
    }
}

/// `Σ_i w_i |u_i⟩⟨u_i|` for the columns of `u`.
pub(crate) fn spectral_sum(u: &ComplexMatrix, weights: &[f64]) -> ComplexMatrix {
    let d = u.nrows();
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for j in 0..d {
            let ujk = u[(j, k)].conj() * w;
            for i in 0..d {
                out[(i, j)] += u[(i, k)] * ujk;
            }
        }
    }
    out
}

pub(crate) fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replace `m` by `(m + m†)/2`.
pub(crate) fn symmetrize(m: &mut ComplexMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Cyclic complex Jacobi. `a` must be Hermitian; only exact Hermitian
/// symmetry of the input is assumed, not checked.
pub(crate) fn jacobi_eigen(a: &ComplexMatrix) -> EigenSystem {
    let n = a.nrows();
    let mut m = a.clone();
    symmetrize(&mut m);
    let mut v = ComplexMatrix::identity(n, n);
    let scale = max_abs(&m);
    if n == 0 || scale == 0.0 {
        return EigenSystem {
            eigenvalues: vec![0.0; n],
            eigenvectors: v,
        };
    }
    let threshold = JACOBI_REL_TOL * scale;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let babs = b.norm();
                if babs < threshold * 1e-3 {
                    continue;
                }
                let phase = b / babs;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * gpp + akq * gqp;
                    m[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    m[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        eigenvectors.set_column(new, &v.column(old));
    }
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

fn check_square_finite(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return validation(format!(
            "matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        ));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return validation("matrix has non-finite entries");
    }
    Ok(())
}

/// A Hermitian operator (not necessarily positive or normalized).
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square_finite(&matrix)?;
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return validation(format!("matrix is not Hermitian (defect {defect:.3e})"));
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    /// Symmetrizes without validation. Used for results of exact algebra.
    pub(crate) fn from_matrix_unchecked(mut matrix: ComplexMatrix) -> Self {
        symmetrize(&mut matrix);
        Self { matrix }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Self { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    /// `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let m = ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn eig(&self) -> EigenSystem {
        jacobi_eigen(&self.matrix)
    }

    /// `A ⊕ B` as a block-diagonal operator.
    pub fn direct_sum(&self, other: &HermitianOperator) -> HermitianOperator {
        Self {
            matrix: block_diag(&self.matrix, &other.matrix),
        }
    }

    /// `‖A² − A‖_max`; zero for an exact projector.
    pub fn idempotency_defect(&self) -> f64 {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }
}

pub(crate) fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = ComplexMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
///
/// Its eigensystem is computed at most once and cached.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    eig: OnceLock<EigenSystem>,
}

impl DensityOperator {
    /// Validates and clamps tiny negative eigenvalues to zero.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let h = HermitianOperator::new(matrix)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return validation(format!("trace must be 1, got {tr}"));
        }
        let es = h.eig();
        let min = es.eigenvalues[0];
        if min < -CLAMP_TOL {
            return validation(format!(
                "operator is not positive semidefinite (eigenvalue {min:.3e})"
            ));
        }
        if min < 0.0 {
            let clamped: Vec<f64> = es.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
            return Ok(Self::from_eigen(clamped, es.eigenvectors));
        }
        let DensityOperator { matrix, .. } = Self::from_matrix_unchecked(h.into_matrix());
        let out = Self {
            matrix,
            eig: OnceLock::new(),
        };
        let _ = out.eig.set(es);
        Ok(out)
    }

    /// Builds `U diag(λ) U†` directly from a spectral decomposition. The
    /// eigenvalues are taken as given (they should be non-negative and sum
    /// to one).
    pub(crate) fn from_eigen(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Self {
        let mut matrix = spectral_sum(&eigenvectors, &eigenvalues);
        symmetrize(&mut matrix);
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
        let n = eigenvalues.len();
        let mut vecs = ComplexMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            vecs.set_column(new, &eigenvectors.column(old));
        }
        let es = EigenSystem {
            eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
            eigenvectors: vecs,
        };
        let eig = OnceLock::new();
        let _ = eig.set(es);
        Self { matrix, eig }
    }

    /// Symmetrizes and trusts the caller on positivity and trace.
    pub(crate) fn from_matrix_unchecked(mut matrix: ComplexMatrix) -> Self {
        symmetrize(&mut matrix);
        Self {
            matrix,
            eig: OnceLock::new(),
        }
    }

    /// Normalizes a positive semidefinite Hermitian matrix to unit trace.
    pub(crate) fn normalized_from_psd(mut matrix: ComplexMatrix) -> Result<Self> {
        symmetrize(&mut matrix);
        let tr: f64 = (0..matrix.nrows()).map(|i| matrix[(i, i)].re).sum();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::Degenerate(
                "cannot normalize operator with zero trace".into(),
            ));
        }
        let es = jacobi_eigen(&matrix);
        let vals: Vec<f64> = es.eigenvalues.iter().map(|&l| (l / tr).max(0.0)).collect();
        Ok(Self::from_eigen(vals, es.eigenvectors))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_eigen(
            vec![1.0 / dim as f64; dim],
            ComplexMatrix::identity(dim, dim),
        )
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        Self::new(m)
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > 1e-10 {
            return validation(format!(
                "state vector must have unit norm, got {}",
                norm2.sqrt()
            ));
        }
        let h = HermitianOperator::outer(psi);
        Self::new(h.into_matrix())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.clone(),
        }
    }

    pub fn eig(&self) -> &EigenSystem {
        self.eig.get_or_init(|| {
            let mut es = jacobi_eigen(&self.matrix);
            for l in es.eigenvalues.iter_mut() {
                if *l < 0.0 {
                    *l = 0.0;
                }
            }
            es
        })
    }

    pub fn rank(&self) -> usize {
        self.eig().support_indices().len()
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }

    /// Dominant eigenvector; for pure states this is the state vector up to phase.
    pub fn principal_vector(&self) -> Vec<C64> {
        let es = self.eig();
        es.column(es.dim() - 1)
    }

    pub fn direct_sum_weighted(&self, p: f64, other: &DensityOperator) -> DensityOperator {
        let m = block_diag(
            &(self.matrix.clone() * C64::new(p, 0.0)),
            &(other.matrix.clone() * C64::new(1.0 - p, 0.0)),
        );
        DensityOperator::from_matrix_unchecked(m)
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        self.eig()
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum()
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eig(a: &HermitianOperator) -> EigenSystem {
    a.eig()
}

/// `A^α` on the support of `A`, zero elsewhere. `α = 0` gives the support
/// projector.
pub fn fractional_power(a: &DensityOperator, alpha: f64) -> Result<HermitianOperator> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return validation(format!(
            "exponent must be finite and non-negative, got {alpha}"
        ));
    }
    let es = a.eig();
    let support = es.support_indices();
    let mut w = vec![0.0; es.dim()];
    for &i in &support {
        w[i] = if alpha == 0.0 {
            1.0
        } else {
            es.eigenvalues[i].powf(alpha)
        };
    }
    Ok(HermitianOperator::from_matrix_unchecked(spectral_sum(
        &es.eigenvectors,
        &w,
    )))
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue above
/// `RANK_THRESHOLD · λ_max`.
pub fn support_projector(a: &DensityOperator) -> HermitianOperator {
    fractional_power(a, 0.0).expect("zero exponent is valid")
}

/// `Re Tr(AB)`.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    let t = trace_of_product(a.matrix(), b.matrix())?;
    debug_assert!(
        t.im.abs() <= 1e-10 * (1.0 + t.re.abs()),
        "Tr(AB) has imaginary part {}",
        t.im
    );
    Ok(t.re)
}

pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let n = a.nrows();
    let mut t = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(t)
}

/// `Tr(√A √B)`.
pub fn sqrt_overlap(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let sa = fractional_power(a, 0.5)?;
    let sb = fractional_power(b, 0.5)?;
    Ok(trace_product(&sa, &sb)?.clamp(0.0, 1.0))
}

pub(crate) fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    ComplexMatrix::from_fn(n * m, n * m, |r, c| a[(r / m, c / m)] * b[(r % m, c % m)])
}

/// Kronecker product `A ⊗ B`, refusing results above [`DEFAULT_DIM_CAP`].
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(
    a: &DensityOperator,
    b: &DensityOperator,
    cap: usize,
) -> Result<DensityOperator> {
    let dim = a.dim().saturating_mul(b.dim());
    if dim > cap {
        return Err(Error::Resource(format!(
            "tensor dimension {dim} exceeds cap {cap}"
        )));
    }
    Ok(DensityOperator::from_matrix_unchecked(kron(
        a.matrix(),
        b.matrix(),
    )))
}

/// Purification `|ψ⟩ = Σ_i √λ_i |e_i⟩ ⊗ |e_i⟩` in `H ⊗ H`, with the second
/// factor auxiliary. Index `i·d + j` addresses `|i⟩ ⊗ |j⟩`.
pub fn purify(f: &DensityOperator) -> Vec<C64> {
    let es = f.eig();
    let d = f.dim();
    let mut psi = vec![C64::new(0.0, 0.0); d * d];
    for k in 0..d {
        let lam = es.eigenvalues[k];
        if lam <= 0.0 {
            continue;
        }
        let amp = lam.sqrt();
        for i in 0..d {
            let ei = es.eigenvectors[(i, k)] * amp;
            for j in 0..d {
                // auxiliary copy uses the conjugate basis so that the
                // reduced state on the first factor is exactly F
                psi[i * d + j] += ei * es.eigenvectors[(j, k)].conj();
            }
        }
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in psi.iter_mut() {
        *z /= norm;
    }
    psi
}

/// Reduced operator on the first factor of `|ψ⟩⟨ψ|` for `ψ ∈ C^{d_a} ⊗ C^{d_b}`.
pub fn partial_trace_second(psi: &[C64], dim_first: usize) -> Result<ComplexMatrix> {
    if dim_first == 0 || !psi.len().is_multiple_of(dim_first) {
        return validation("vector length is not a multiple of the first factor dimension");
    }
    let db = psi.len() / dim_first;
    Ok(ComplexMatrix::from_fn(dim_first, dim_first, |i, k| {
        (0..db)
            .map(|j| psi[i * db + j] * psi[k * db + j].conj())
            .sum()
    }))
}

/// `‖AB − BA‖_max`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

pub(crate) fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_density(rng: &mut impl Rng, d: usize, rank: usize) -> DensityOperator {
        let g = ComplexMatrix::from_fn(d, rank, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        DensityOperator::normalized_from_psd(&g * g.adjoint()).unwrap()
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let es = eig(&HermitianOperator::identity(2));
        assert_eq!(es.eigenvalues, vec![1.0, 1.0]);
        let es = eig(&HermitianOperator::from_real_diagonal(&[0.75, 0.25]));
        assert_abs_diff_eq!(es.eigenvalues[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(es.eigenvalues[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn eig_of_pauli_x() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let es = eig(&HermitianOperator::new(m.clone()).unwrap());
        assert_abs_diff_eq!(es.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(es.eigenvalues[1], 1.0, epsilon = 1e-14);
        let rebuilt = es.apply(|l| l);
        assert!(max_abs(&(rebuilt - m)) < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn eig_reconstructs_random_complex_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..9 {
            let g = ComplexMatrix::from_fn(d, d, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = HermitianOperator::from_matrix_unchecked(&g + g.adjoint());
            let es = a.eig();
            let rebuilt = es.apply(|l| l);
            assert!(max_abs(&(rebuilt - a.matrix())) <= 1e-9 * max_abs(a.matrix()));
            let gram = es.eigenvectors.adjoint() * &es.eigenvectors;
            assert!(max_abs(&(gram - ComplexMatrix::identity(d, d))) < 1e-10);
            assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.6)]);
        assert!(DensityOperator::new(bad_trace).is_err());
        let negative = ComplexMatrix::from_row_slice(2, 2, &[c(1.1), c(0.0), c(0.0), c(-0.1)]);
        assert!(DensityOperator::new(negative).is_err());
        let tiny_negative =
            ComplexMatrix::from_row_slice(2, 2, &[c(1.0 + 5e-11), c(0.0), c(0.0), c(-5e-11)]);
        let rho = DensityOperator::new(tiny_negative).unwrap();
        assert!(rho.eig().eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn fractional_power_examples() {
        let a = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let h = fractional_power(&a, 0.5).unwrap();
        assert_abs_diff_eq!(h.matrix()[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(h.matrix()[(1, 1)].re, 0.75_f64.sqrt(), epsilon = 1e-14);
        let one = fractional_power(&a, 1.0).unwrap();
        assert!(max_abs(&(one.matrix() - a.matrix())) < 1e-10);
        let v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let p = DensityOperator::pure(&v).unwrap();
        let half = fractional_power(&p, 0.5).unwrap();
        assert!(max_abs(&(half.matrix() - p.matrix())) < 1e-12);
        assert!(fractional_power(&a, -0.5).is_err());
    }

    #[test]
    fn support_projector_examples() {
        let full = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        assert!(
            max_abs(&(support_projector(&full).matrix() - ComplexMatrix::identity(2, 2))) < 1e-14
        );
        let thin = DensityOperator::diagonal(&[0.999, 0.001, 0.0]).unwrap();
        let proj = support_projector(&thin);
        let expected = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 0.0]);
        assert!(max_abs(&(proj.matrix() - expected.matrix())) < 1e-14);
        let v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let p = DensityOperator::pure(&v).unwrap();
        assert!(max_abs(&(support_projector(&p).matrix() - p.matrix())) < 1e-12);
        assert!(proj.idempotency_defect() < 1e-14);
    }

    #[test]
    fn trace_product_examples() {
        let half = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        assert_abs_diff_eq!(trace_product(&half, &half).unwrap(), 0.5, epsilon = 1e-15);
        let e0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let e1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(trace_product(&e0, &e1).unwrap(), 0.0);
        let b = HermitianOperator::from_real_diagonal(&[0.25, 0.75]);
        assert_abs_diff_eq!(trace_product(&half, &b).unwrap(), 0.5, epsilon = 1e-15);
        assert!(trace_product(&half, &HermitianOperator::identity(3)).is_err());
    }

    #[test]
    fn sqrt_overlap_examples() {
        let a = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        let b = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(sqrt_overlap(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        let expected = 0.5_f64.sqrt() * 0.25_f64.sqrt() + 0.5_f64.sqrt() * 0.75_f64.sqrt();
        assert_abs_diff_eq!(sqrt_overlap(&a, &b).unwrap(), expected, epsilon = 1e-12);
        let e0 = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let e1 = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(sqrt_overlap(&e0, &e1).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tensor_examples() {
        let mixed = DensityOperator::maximally_mixed(2);
        let t = tensor(&mixed, &mixed).unwrap();
        assert_eq!(t.dim(), 4);
        assert!(max_abs(&(t.matrix() - ComplexMatrix::identity(4, 4) * c(0.25))) < 1e-15);
        let e0 = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let e1 = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
        let t = tensor(&e0, &e1).unwrap();
        assert_eq!(t.matrix()[(1, 1)], c(1.0));
        let big = DensityOperator::maximally_mixed(64);
        assert!(matches!(
            tensor_with_cap(&big, &big, 1000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn tensor_spectrum_is_pairwise_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density(&mut rng, 2, 2);
        let b = random_density(&mut rng, 2, 2);
        let t = tensor(&a, &b).unwrap();
        let mut expected: Vec<f64> = a
            .eig()
            .eigenvalues
            .iter()
            .flat_map(|x| b.eig().eigenvalues.iter().map(move |y| x * y))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in t.eig().eigenvalues.iter().zip(&expected) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(t.as_hermitian().trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn purify_examples() {
        let e0 = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let psi = purify(&e0);
        assert_abs_diff_eq!(psi[0].norm(), 1.0, epsilon = 1e-14);
        let mixed = DensityOperator::maximally_mixed(2);
        let psi = purify(&mixed);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(psi[0].norm(), 0.5_f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(psi[3].norm(), 0.5_f64.sqrt(), epsilon = 1e-14);
        let f = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let reduced = partial_trace_second(&purify(&f), 2).unwrap();
        assert!(max_abs(&(reduced - f.matrix())) < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn power_and_trace_properties(seed in 0u64..10_000, d in 1usize..5, rank_a in 1usize..5, rank_b in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density(&mut rng, d, rank_a.min(d));
            let b = random_density(&mut rng, d, rank_b.min(d));
            for alpha in [0.0, 0.25, 0.5, 1.0, 2.0] {
                let p = fractional_power(&a, alpha).unwrap();
                prop_assert!(p.eig().eigenvalues[0] >= -1e-12);
            }
            let sq = DensityOperator::normalized_from_psd(fractional_power(&a, 2.0).unwrap().into_matrix()).unwrap();
            let back = fractional_power(&sq, 0.5).unwrap();
            let norm = fractional_power(&a, 2.0).unwrap().trace().sqrt();
            let restored = back.matrix() * C64::new(norm, 0.0);
            prop_assert!(max_abs(&(restored - a.matrix())) < 1e-8);

            let (ha, hb) = (a.as_hermitian(), b.as_hermitian());
            let ab = trace_product(&ha, &hb).unwrap();
            let ba = trace_product(&hb, &ha).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-10);
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&ab));

            let reduced = partial_trace_second(&purify(&a), d).unwrap();
            prop_assert!(max_abs(&(reduced - a.matrix())) < 1e-9);
        }
    }
}
