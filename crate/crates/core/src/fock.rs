//! Truncated Fock-space algebra for a single cavity mode.
//!
//! States live on `|0⟩..|dim-1⟩`. Constructors never grow the space on their
//! own; a state whose top level carries more than [`TRUNCATION_TOLERANCE`]
//! population is flagged through [`FieldState::is_truncation_safe`].

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default Fock truncation.
pub const DEFAULT_DIM: usize = 60;
/// Largest top-level population for which a state counts as truncation-safe.
pub const TRUNCATION_TOLERANCE: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// A dense operator on the truncated mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperator {
    matrix: CMatrix,
}

impl FieldOperator {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if matrix.nrows() < 2 {
            return Err(Error::InvalidDimension(matrix.nrows()));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: CMatrix::zeros(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs_diff(&self.matrix, &self.matrix.adjoint()) <= tol
    }
}

/// Density matrix of the cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    matrix: CMatrix,
    truncation_safe: bool,
}

impl FieldState {
    /// Validates Hermiticity, unit trace and positivity, then records the
    /// truncation flag.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        check_dim(matrix.nrows())?;
        validate_density_matrix(&matrix)?;
        let top = matrix[(matrix.nrows() - 1, matrix.nrows() - 1)].re;
        Ok(Self {
            matrix,
            truncation_safe: top < TRUNCATION_TOLERANCE,
        })
    }

    /// `|n⟩⟨n|`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::Domain(format!("Fock level {n} outside dim {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(n, n)] = C64::new(1.0, 0.0);
        Self::new(m)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_truncation_safe(&self) -> bool {
        self.truncation_safe
    }

    pub fn top_population(&self) -> f64 {
        let d = self.dim() - 1;
        self.matrix[(d, d)].re
    }

    /// Returns `self` when the top-level population is below tolerance,
    /// otherwise a [`Error::TruncationUnsafe`].
    pub fn require_truncation_safe(self) -> Result<Self> {
        if self.truncation_safe {
            Ok(self)
        } else {
            Err(Error::TruncationUnsafe {
                population: self.top_population(),
                tolerance: TRUNCATION_TOLERANCE,
            })
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.matrix[(n, n)].re).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `tr(ρ a)`.
    pub fn mean_field(&self) -> C64 {
        (1..self.dim())
            .map(|n| self.matrix[(n, n - 1)] * (n as f64).sqrt())
            .sum()
    }

    pub fn expectation(&self, op: &FieldOperator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.dim(),
            });
        }
        Ok((&self.matrix * op.matrix()).trace())
    }

    /// Eigenvalues in descending order, with round-off negatives clipped to 0.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = hermitian_eigenvalues(&self.matrix);
        for v in &mut ev {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &FieldState) -> Result<f64> {
        trace_distance(&self.matrix, &other.matrix)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian matrix (unsorted).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).eigenvalues.iter().copied().collect()
}

/// Eigendecomposition with entries below `1e-30·max|m|` flushed to zero.
/// The solver returns NaN when magnitudes span several hundred decades, as
/// deep Fock tails of weakly excited states do; the flush moves eigenvalues
/// by at most `dim·1e-30·max|m|`.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = scale * 1e-30;
    let zero = C64::new(0.0, 0.0);
    SymmetricEigen::new(m.map(|z| if z.norm() < floor { zero } else { z }))
}

/// Checks the density-matrix invariants on a matrix of any size (atoms included).
pub fn validate_density_matrix(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidState("matrix is not square".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let herm = max_abs_diff(m, &m.adjoint());
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm:.3e})")));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let min_ev = hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min);
    if min_ev < -NEGATIVE_EIGEN_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
    }
    Ok(())
}

/// Clips eigenvalues in `[−floor, 0)` to zero and renormalises; a more
/// negative eigenvalue is an error.
pub(crate) fn clip_negative_eigenvalues(m: CMatrix, floor: f64) -> Result<CMatrix> {
    let eig = hermitian_eigen(&hermitize(m.clone()));
    let min_ev = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_ev >= 0.0 {
        return Ok(m);
    }
    if min_ev < -floor {
        return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let total: f64 = clipped.iter().sum();
    let d = CMatrix::from_diagonal(&clipped.map(|v| C64::new(v / total, 0.0)));
    let u = &eig.eigenvectors;
    Ok(hermitize(u * d * u.adjoint()))
}

/// `½‖a − b‖₁` for Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let diff = a - b;
    let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    Ok(0.5 * hermitian_eigenvalues(&herm).iter().map(|x| x.abs()).sum::<f64>())
}

/// Truncated annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn annihilation_operator(dim: usize) -> Result<FieldOperator> {
    check_dim(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FieldOperator { matrix: m })
}

pub fn creation_operator(dim: usize) -> Result<FieldOperator> {
    Ok(annihilation_operator(dim)?.dagger())
}

pub fn number_operator(dim: usize) -> Result<FieldOperator> {
    check_dim(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = C64::new(n as f64, 0.0);
    }
    Ok(FieldOperator { matrix: m })
}

/// `exp(α a† − α* a)` on the truncated space.
pub fn displacement_operator(alpha: C64, dim: usize) -> Result<FieldOperator> {
    let a = annihilation_operator(dim)?;
    let gen = a.matrix().adjoint() * alpha - a.matrix() * alpha.conj();
    Ok(FieldOperator { matrix: gen.exp() })
}

/// Bose-Einstein state with mean occupation `n_th`, renormalised on the
/// truncated space.
pub fn thermal_state(n_th: f64, dim: usize) -> Result<FieldState> {
    check_dim(dim)?;
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::Domain(format!("n_th must be >= 0, got {n_th}")));
    }
    let ratio = n_th / (n_th + 1.0);
    let mut p = Vec::with_capacity(dim);
    let mut w = 1.0;
    for _ in 0..dim {
        p.push(w);
        w *= ratio;
    }
    let z: f64 = p.iter().sum();
    let mut m = CMatrix::zeros(dim, dim);
    for (n, pn) in p.iter().enumerate() {
        m[(n, n)] = C64::new(pn / z, 0.0);
    }
    FieldState::new(m)
}

/// `D(α) ρ_th D†(α)`.
pub fn displaced_thermal_state(alpha: C64, n_th: f64, dim: usize) -> Result<FieldState> {
    let thermal = thermal_state(n_th, dim)?;
    if alpha == C64::new(0.0, 0.0) {
        return Ok(thermal);
    }
    let d = displacement_operator(alpha, dim)?;
    let m = d.matrix() * thermal.matrix() * d.matrix().adjoint();
    FieldState::new(hermitize(m))
}

pub(crate) fn hermitize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

fn entropy_of_spectrum(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    -eigenvalues
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Von Neumann entropy in units of k_B.
pub fn von_neumann_entropy(rho: &FieldState) -> f64 {
    entropy_of_spectrum(rho.eigenvalues())
}

/// Entropy of a thermal (or displaced thermal) state with thermal occupation `n_th`, in k_B.
pub fn thermal_entropy(n_th: f64) -> Result<f64> {
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::Domain(format!("n_th must be >= 0, got {n_th}")));
    }
    if n_th == 0.0 {
        return Ok(0.0);
    }
    Ok((n_th + 1.0) * (n_th + 1.0).ln() - n_th * n_th.ln())
}

/// `S(n + δ) − S(n)` without the cancellation of subtracting two nearby entropies.
pub fn thermal_entropy_change(n_th: f64, delta: f64) -> Result<f64> {
    let end = n_th + delta;
    if !(n_th >= 0.0) || !(end >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "thermal occupations must stay >= 0 ({n_th} -> {end})"
        )));
    }
    if n_th == 0.0 || end == 0.0 {
        return Ok(thermal_entropy(end)? - thermal_entropy(n_th)?);
    }
    Ok(
        (n_th + 1.0 + delta) * (delta / (n_th + 1.0)).ln_1p() - (n_th + delta) * (delta / n_th).ln_1p()
            + delta * (1.0 / n_th).ln_1p(),
    )
}

/// Maximum energy extractable by a unitary, in J.
///
/// Pairs the descending spectrum of ρ with the ascending ladder `k ħω`.
pub fn ergotropy(rho: &FieldState, hbar_omega: f64) -> Result<f64> {
    if !(hbar_omega > 0.0) {
        return Err(Error::Domain(format!("hbar_omega must be > 0, got {hbar_omega}")));
    }
    let energy = hbar_omega * rho.mean_photon_number();
    let passive: f64 = rho
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, r)| r * k as f64 * hbar_omega)
        .sum();
    Ok((energy - passive).max(0.0))
}

/// `S(Δ[ρ]) − S(ρ)` with Δ the energy-basis dephasing, in k_B.
pub fn relative_entropy_of_coherence(rho: &CMatrix) -> Result<f64> {
    validate_density_matrix(rho)?;
    let dephased = entropy_of_spectrum((0..rho.nrows()).map(|n| rho[(n, n)].re));
    let s = entropy_of_spectrum(hermitian_eigenvalues(rho));
    Ok((dephased - s).max(0.0))
}

/// Mean photon number and equal-time second-order correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStatistics {
    pub n_mean: f64,
    pub g2_zero: f64,
}

pub fn photon_statistics(rho: &FieldState) -> Result<PhotonStatistics> {
    let p = rho.populations();
    let n_mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
    if n_mean <= 0.0 {
        return Err(Error::UndefinedG2);
    }
    let pairs: f64 = p
        .iter()
        .enumerate()
        .map(|(n, x)| (n as f64) * (n as f64 - 1.0) * x)
        .sum();
    Ok(PhotonStatistics {
        n_mean,
        g2_zero: pairs / (n_mean * n_mean),
    })
}

/// Closed-form `g²(0)` of a displaced thermal state.
pub fn displaced_thermal_g2(alpha_sq: f64, n_th: f64) -> Result<f64> {
    let n = n_th + alpha_sq;
    if !(n > 0.0) {
        return Err(Error::UndefinedG2);
    }
    Ok(1.0 + (n_th * n_th + 2.0 * n_th * alpha_sq) / (n * n))
}
