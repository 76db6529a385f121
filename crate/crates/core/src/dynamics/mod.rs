//! Lindblad dynamics of the cavity field.
//!
//! `dρ/dt = −i[H/ħ, ρ] + Γ_r n̄_th L[a†]ρ + Γ_r (n̄_th + 1) L[a]ρ` with
//! `L[c]ρ = cρc† − ½{c†c, ρ}` and `H/ħ = λ a† + λ* a`.

mod banded;
mod integrator;

pub use banded::{BandLu, BandMatrix};
pub use integrator::integrate;

use crate::error::{Error, Result};
use crate::fock::{self, hermitize, CMatrix, FieldOperator, FieldState, C64};
use crate::reservoir::{AtomDensityMatrix, CavityAtomParams, ReservoirDerived};

/// Default local error tolerance for [`evolve`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Trace drift above which an evolved state is rejected instead of renormalised.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-9;
/// Most negative eigenvalue tolerated in an evolved sample before clipping.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// Generator of the field master equation. The Hamiltonian must be
/// tridiagonal in the Fock basis (linear in `a`, `a†`).
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    hamiltonian: FieldOperator,
    rate_up: f64,
    rate_down: f64,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: FieldOperator, rate_up: f64, rate_down: f64) -> Result<Self> {
        if !(rate_up >= 0.0) || !(rate_down > rate_up) || !rate_down.is_finite() {
            return Err(Error::UnstableGenerator { rate_up, rate_down });
        }
        if !hamiltonian.is_hermitian(1e-12 * (1.0 + max_abs(hamiltonian.matrix()))) {
            return Err(Error::Domain("Hamiltonian is not Hermitian".into()));
        }
        let h = hamiltonian.matrix();
        let d = hamiltonian.dim();
        for i in 0..d {
            for j in 0..d {
                if i.abs_diff(j) > 1 && h[(i, j)] != C64::new(0.0, 0.0) {
                    return Err(Error::Domain(
                        "Hamiltonian must be tridiagonal in the Fock basis".into(),
                    ));
                }
            }
        }
        Ok(Self {
            hamiltonian,
            rate_up,
            rate_down,
        })
    }

    /// Generator with drive `λ a† + λ* a` and thermal rates at occupation `n_th`.
    pub fn driven(lambda: C64, n_th: f64, gamma_r: f64, dim: usize) -> Result<Self> {
        let a = fock::annihilation_operator(dim)?;
        let h = a.matrix().adjoint() * lambda + a.matrix() * lambda.conj();
        let rate_up = gamma_r * n_th;
        Self::new(FieldOperator::from_matrix(h)?, rate_up, rate_up + gamma_r)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &FieldOperator {
        &self.hamiltonian
    }

    pub fn rate_up(&self) -> f64 {
        self.rate_up
    }

    pub fn rate_down(&self) -> f64 {
        self.rate_down
    }

    /// `Γ_r = rate_down − rate_up`.
    pub fn gamma_r(&self) -> f64 {
        self.rate_down - self.rate_up
    }

    pub fn n_th(&self) -> f64 {
        self.rate_up / self.gamma_r()
    }

    /// Coefficient of `a†` in the Hamiltonian.
    pub fn drive(&self) -> C64 {
        self.hamiltonian.matrix()[(1, 0)]
    }

    fn fastest_rate(&self) -> f64 {
        let d = self.dim() as f64;
        (self.rate_down + self.rate_up) * d + 2.0 * max_abs(self.hamiltonian.matrix()) * d.sqrt()
    }

    /// Applies the generator to an arbitrary square matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim();
        let h = self.hamiltonian.matrix();
        let minus_i = C64::new(0.0, -1.0);
        let sq: Vec<f64> = (0..=d).map(|k| (k as f64).sqrt()).collect();
        // diagonal of the truncated a a†
        let aad = |k: usize| if k + 1 < d { (k + 1) as f64 } else { 0.0 };
        CMatrix::from_fn(d, d, |m, n| {
            let mut hr = C64::new(0.0, 0.0);
            for k in m.saturating_sub(1)..=(m + 1).min(d - 1) {
                hr += h[(m, k)] * rho[(k, n)];
            }
            let mut rh = C64::new(0.0, 0.0);
            for k in n.saturating_sub(1)..=(n + 1).min(d - 1) {
                rh += rho[(m, k)] * h[(k, n)];
            }
            let mut v = minus_i * (hr - rh);
            if m > 0 && n > 0 {
                v += rho[(m - 1, n - 1)] * (self.rate_up * sq[m] * sq[n]);
            }
            if m + 1 < d && n + 1 < d {
                v += rho[(m + 1, n + 1)] * (self.rate_down * sq[m + 1] * sq[n + 1]);
            }
            let decay = 0.5 * self.rate_up * (aad(m) + aad(n)) + 0.5 * self.rate_down * (m + n) as f64;
            v - rho[(m, n)] * decay
        })
    }

    /// Vectorised generator (row-major `ρ_mn ↦ m·dim + n`) in band storage.
    pub fn to_band(&self) -> BandMatrix {
        let d = self.dim();
        let h = self.hamiltonian.matrix();
        let i = C64::new(0.0, 1.0);
        let idx = |m: usize, n: usize| m * d + n;
        let aad = |k: usize| if k + 1 < d { (k + 1) as f64 } else { 0.0 };
        let mut band = BandMatrix::zeros(d * d, d + 1, d + 1);
        for m in 0..d {
            for n in 0..d {
                let row = idx(m, n);
                for k in m.saturating_sub(1)..=(m + 1).min(d - 1) {
                    band.add(row, idx(k, n), -i * h[(m, k)]);
                }
                for k in n.saturating_sub(1)..=(n + 1).min(d - 1) {
                    band.add(row, idx(m, k), i * h[(k, n)]);
                }
                if m > 0 && n > 0 {
                    let c = self.rate_up * ((m * n) as f64).sqrt();
                    band.add(row, idx(m - 1, n - 1), C64::new(c, 0.0));
                }
                if m + 1 < d && n + 1 < d {
                    let c = self.rate_down * (((m + 1) * (n + 1)) as f64).sqrt();
                    band.add(row, idx(m + 1, n + 1), C64::new(c, 0.0));
                }
                let decay = 0.5 * self.rate_up * (aad(m) + aad(n)) + 0.5 * self.rate_down * (m + n) as f64;
                band.add(row, row, C64::new(-decay, 0.0));
            }
        }
        band
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Generator for the given reservoir operating point.
pub fn build_generator(params: &CavityAtomParams, atom: &AtomDensityMatrix, dim: usize) -> Result<LindbladGenerator> {
    let derived = ReservoirDerived::compute(params, atom)?;
    LindbladGenerator::driven(derived.lambda_drive, derived.n_th, derived.gamma_r, dim)
}

/// `dρ/dt` for a valid state.
pub fn apply_rhs(gen: &LindbladGenerator, rho: &FieldState) -> Result<CMatrix> {
    if rho.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: rho.dim(),
        });
    }
    Ok(gen.apply(rho.matrix()))
}

fn initial_step(gen: &LindbladGenerator) -> f64 {
    0.1 / gen.fastest_rate().max(1e-300)
}

/// Integrates the master equation from `rho0`, returning the state at each
/// non-decreasing sample time (seconds).
///
/// After every accepted step the state is Hermitised and renormalised; a
/// trace drift above [`TRACE_DRIFT_LIMIT`] or a truncation-unsafe sample is an error.
pub fn evolve(gen: &LindbladGenerator, rho0: &FieldState, sample_times: &[f64], tol: f64) -> Result<Vec<FieldState>> {
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: rho0.dim(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let guard = |y: &mut CMatrix| -> Result<bool> {
        let tr = y.trace();
        if (tr.re - 1.0).abs() > TRACE_DRIFT_LIMIT || tr.im.abs() > TRACE_DRIFT_LIMIT {
            return Err(Error::InvalidState(format!("trace drifted to {tr}")));
        }
        let h = hermitize(y.clone());
        *y = h / C64::new(tr.re, 0.0);
        Ok(true)
    };
    let raw = integrate(
        |y| gen.apply(y),
        rho0.matrix().clone(),
        sample_times,
        tol,
        initial_step(gen),
        guard,
    )?;
    raw.into_iter()
        .map(|m| {
            let m = fock::clip_negative_eigenvalues(m, POSITIVITY_FLOOR)?;
            FieldState::new(m)?.require_truncation_safe()
        })
        .collect()
}

/// Unique fixed point of the generator, from a direct banded solve of the
/// vectorised null-space problem with the `ρ_00` equation replaced by a
/// normalisation row.
pub fn steady_state_numeric(gen: &LindbladGenerator) -> Result<FieldState> {
    let d = gen.dim();
    let mut band = gen.to_band();
    let scale = band.max_abs().max(1.0);
    for j in 0..=(d + 1).min(d * d - 1) {
        band.set(0, j, C64::new(0.0, 0.0));
    }
    band.set(0, 0, C64::new(scale, 0.0));
    let lu = band.factor(1e-13).map_err(|_| Error::DegenerateSteadyState)?;
    let mut rhs = vec![C64::new(0.0, 0.0); d * d];
    rhs[0] = C64::new(scale, 0.0);
    let x = lu.solve(&rhs);
    let m = CMatrix::from_fn(d, d, |i, j| x[i * d + j]);
    let m = hermitize(m);
    let tr = m.trace().re;
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::DegenerateSteadyState);
    }
    FieldState::new(m / C64::new(tr, 0.0))
}

/// Closed-form steady state: a thermal state of occupation `n_th` displaced by `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateAnalytic {
    pub alpha: C64,
    pub n_th: f64,
}

impl SteadyStateAnalytic {
    pub fn mean_photon_number(&self) -> f64 {
        self.n_th + self.alpha.norm_sqr()
    }

    pub fn to_state(&self, dim: usize) -> Result<FieldState> {
        fock::displaced_thermal_state(self.alpha, self.n_th, dim)
    }
}

/// `α = −2iλ/Γ_r` with `n̄_th` from the reservoir.
pub fn steady_state_analytic(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> Result<SteadyStateAnalytic> {
    let derived = ReservoirDerived::compute(params, atom)?;
    Ok(SteadyStateAnalytic {
        alpha: derived.alpha(),
        n_th: derived.n_th,
    })
}

/// Normalised intensity correlation `g²(τ)` from the quantum regression
/// theorem: `tr{a†a e^{𝓛τ}[a ρ_ss a†]} / ⟨a†a⟩²`.
pub fn g2_correlation(gen: &LindbladGenerator, rho_ss: &FieldState, tau_grid: &[f64]) -> Result<Vec<f64>> {
    g2_correlation_with_tol(gen, rho_ss, tau_grid, DEFAULT_TOL)
}

pub fn g2_correlation_with_tol(
    gen: &LindbladGenerator,
    rho_ss: &FieldState,
    tau_grid: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if rho_ss.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: rho_ss.dim(),
        });
    }
    let n = rho_ss.mean_photon_number();
    if !(n > 0.0) {
        return Err(Error::UndefinedG2);
    }
    let a = fock::annihilation_operator(gen.dim())?;
    let x0 = a.matrix() * rho_ss.matrix() * a.matrix().adjoint();
    let number = |x: &CMatrix| -> f64 { (0..x.nrows()).map(|k| k as f64 * x[(k, k)].re).sum() };
    let evolved = integrate(|y| gen.apply(y), x0, tau_grid, tol, initial_step(gen), |_| Ok(false))?;
    Ok(evolved.iter().map(|x| number(x) / (n * n)).collect())
}
