//! Atomic-beam reservoir: atom preparation, injection, and the closed-form
//! rates that turn the beam plus cavity vacuum into a single effective bath.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{atomic_resonance, two_pi, BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::fock::{CMatrix, C64};

/// Transit-time product above which the Markovian reservoir picture is
/// considered stressed.
pub const MARKOV_WARNING_G_TAU: f64 = 0.3;

/// Unnormalised sinc, `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Argument of the sinc factor in the drive term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveSinc {
    /// `sinc(Δ_ac τ)`, the published drive coefficient.
    #[default]
    FullArgument,
    /// `sinc(Δ_ac τ/2)`, matching the argument used in the rates.
    HalfArgument,
}

/// Cavity and atomic-beam parameters. Rates are angular (rad/s), half widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityAtomParams {
    pub g: f64,
    pub kappa: f64,
    /// Atomic decay; carried for completeness, it does not enter the model.
    pub gamma_atom: f64,
    pub omega_a: f64,
    pub tau: f64,
    pub n_bar: f64,
    pub delta_ac: f64,
    #[serde(default)]
    pub drive_sinc: DriveSinc,
}

impl CavityAtomParams {
    /// `(g, κ, γ)/2π = (334, 74, 25) kHz` at 791.3 nm with `gτ = 0.17`, `N̄ = 0.8`.
    pub fn experimental() -> Self {
        let g = two_pi(334e3);
        Self {
            g,
            kappa: two_pi(74e3),
            gamma_atom: two_pi(25e3),
            omega_a: atomic_resonance(),
            tau: 0.17 / g,
            n_bar: 0.8,
            delta_ac: 0.0,
            drive_sinc: DriveSinc::FullArgument,
        }
    }

    /// Experimental cavity with coupling lowered so that `gτ = g_tau` at the
    /// transit time fixed by `κτ = kappa_tau`.
    pub fn with_products(g_tau: f64, kappa_tau: f64, n_bar: f64) -> Self {
        let base = Self::experimental();
        let tau = kappa_tau / base.kappa;
        Self {
            g: g_tau / tau,
            tau,
            n_bar,
            ..base
        }
    }

    pub fn with_delta_ac(self, delta_ac: f64) -> Self {
        Self { delta_ac, ..self }
    }

    pub fn with_n_bar(self, n_bar: f64) -> Self {
        Self { n_bar, ..self }
    }

    pub fn g_tau(&self) -> f64 {
        self.g * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("tau", self.tau),
            ("omega_a", self.omega_a),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.n_bar >= 0.0) || !self.n_bar.is_finite() {
            return Err(Error::Domain(format!("n_bar must be >= 0, got {}", self.n_bar)));
        }
        if !(self.gamma_atom >= 0.0) {
            return Err(Error::Domain("gamma_atom must be >= 0".into()));
        }
        if !self.delta_ac.is_finite() {
            return Err(Error::Domain("delta_ac must be finite".into()));
        }
        Ok(())
    }

    /// A warning when `gτ` leaves the weak-coupling regime.
    pub fn markovian_warning(&self) -> Option<String> {
        let gt = self.g_tau();
        (gt > MARKOV_WARNING_G_TAU)
            .then(|| format!("g*tau = {gt:.3} exceeds {MARKOV_WARNING_G_TAU}: Markovian reservoir model is stressed"))
    }

    /// `γ_inj (gτ)² sinc²(Δ_ac τ/2)`, the per-second gain weight shared by the rates.
    pub fn gain_weight(&self) -> f64 {
        let s = sinc(self.delta_ac * self.tau / 2.0);
        injection_rate(self) * self.g_tau().powi(2) * s * s
    }
}

/// Pump phase relative to the cavity field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Resonant pump: every atom carries the same phase.
    Coherent,
    /// Far-detuned pump: arrival-time phases are uniformly random.
    Randomized,
}

/// Preparation of the injected atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomEnsembleSpec {
    pub theta: f64,
    pub phase_mode: PhaseMode,
    pub pump_detuning: f64,
}

impl AtomEnsembleSpec {
    pub fn new(theta: f64, phase_mode: PhaseMode, pump_detuning: f64) -> Result<Self> {
        let spec = Self {
            theta,
            phase_mode,
            pump_detuning,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn coherent(theta: f64) -> Result<Self> {
        Self::new(theta, PhaseMode::Coherent, 0.0)
    }

    /// Randomised phases; the pump detuning is only descriptive.
    pub fn randomized(theta: f64) -> Result<Self> {
        Self::new(theta, PhaseMode::Randomized, f64::INFINITY)
    }

    pub fn with_mode(self, phase_mode: PhaseMode) -> Result<Self> {
        match phase_mode {
            PhaseMode::Coherent => Self::coherent(self.theta),
            PhaseMode::Randomized => Self::randomized(self.theta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::Domain(format!("theta must lie in [0, pi], got {}", self.theta)));
        }
        if self.phase_mode == PhaseMode::Coherent && self.pump_detuning != 0.0 {
            return Err(Error::Domain(
                "coherent phase mode requires a resonant pump (pump_detuning = 0)".into(),
            ));
        }
        Ok(())
    }
}

/// Reduced 2×2 state of one injected atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomDensityMatrix {
    pub rho_ee: f64,
    pub rho_gg: f64,
    /// `⟨e|ρ|g⟩`.
    pub rho_eg: C64,
}

impl AtomDensityMatrix {
    /// Matrix in the energy basis ordered `(g, e)`.
    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(self.rho_gg, 0.0),
                self.rho_eg.conj(),
                self.rho_eg,
                C64::new(self.rho_ee, 0.0),
            ],
        )
    }

    pub fn dephased(&self) -> Self {
        Self {
            rho_eg: C64::new(0.0, 0.0),
            ..*self
        }
    }
}

/// Atom state `sin(θ/2)|g⟩ + cos(θ/2)|e⟩`, or its phase average.
pub fn atom_density_matrix(spec: &AtomEnsembleSpec) -> AtomDensityMatrix {
    let (s, c) = (spec.theta / 2.0).sin_cos();
    let rho = AtomDensityMatrix {
        rho_ee: c * c,
        rho_gg: s * s,
        rho_eg: C64::new(s * c, 0.0),
    };
    match spec.phase_mode {
        PhaseMode::Coherent => rho,
        PhaseMode::Randomized => rho.dephased(),
    }
}

/// `γ_inj = N̄/τ`, atoms per second.
pub fn injection_rate(params: &CavityAtomParams) -> f64 {
    params.n_bar / params.tau
}

/// Decay constant `Γ_r`, rad/s. Errors when atomic gain overwhelms cavity loss.
pub fn reservoir_rate(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> Result<f64> {
    let gamma_r = (atom.rho_gg - atom.rho_ee) * params.gain_weight() + 2.0 * params.kappa;
    if gamma_r > 0.0 {
        Ok(gamma_r)
    } else {
        Err(Error::GainExceedsLoss { gamma_r })
    }
}

/// Effective thermal photon number `n̄_th` of the combined reservoir.
pub fn thermal_photon_number(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> Result<f64> {
    let gamma_r = reservoir_rate(params, atom)?;
    Ok(atom.rho_ee * params.gain_weight() / gamma_r)
}

/// Coefficient λ of `a†` in `H/ħ = λ a† + λ* a`, rad/s.
pub fn drive_amplitude(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> C64 {
    let arg = match params.drive_sinc {
        DriveSinc::FullArgument => params.delta_ac * params.tau,
        DriveSinc::HalfArgument => params.delta_ac * params.tau / 2.0,
    };
    let phase = C64::from_polar(1.0, -params.delta_ac * params.tau / 2.0);
    atom.rho_eg * phase * (injection_rate(params) * sinc(arg) * params.g_tau())
}

/// Temperature whose Bose occupation at `omega` is `n_th`; zero for `n_th = 0`.
pub fn bose_temperature(n_th: f64, omega: f64) -> Result<f64> {
    if !(n_th >= 0.0) {
        return Err(Error::Domain(format!("n_th must be >= 0, got {n_th}")));
    }
    if n_th == 0.0 {
        return Ok(0.0);
    }
    Ok(HBAR * omega / (BOLTZMANN * (1.0 / n_th).ln_1p()))
}

/// Inverse of [`bose_temperature`].
pub fn bose_occupation(temperature: f64, omega: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("temperature must be > 0, got {temperature}")));
    }
    Ok(1.0 / (HBAR * omega / (BOLTZMANN * temperature)).exp_m1())
}

/// Reservoir temperature `T_R` from the Boltzmann ratio of the two Lindblad rates.
pub fn reservoir_temperature(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> Result<f64> {
    bose_temperature(thermal_photon_number(params, atom)?, params.omega_a)
}

/// `T_R` written directly in the atomic populations and cavity loss.
pub fn reservoir_temperature_from_populations(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> Result<f64> {
    if atom.rho_ee <= 0.0 {
        return Ok(0.0);
    }
    let weight = params.gain_weight();
    if weight <= 0.0 {
        return Ok(0.0);
    }
    reservoir_rate(params, atom)?;
    let arg = atom.rho_gg / atom.rho_ee + 2.0 * params.kappa / (weight * atom.rho_ee);
    Ok(HBAR * params.omega_a / (BOLTZMANN * arg.ln()))
}

/// `N_c = N̄/(κτ)`, atoms injected per cavity decay time.
pub fn atoms_per_decay_time(params: &CavityAtomParams) -> f64 {
    params.n_bar / (params.kappa * params.tau)
}

/// Closed-form reservoir quantities for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirDerived {
    pub rho_ee: f64,
    pub rho_gg: f64,
    pub rho_eg: C64,
    pub gamma_inj: f64,
    pub n_th: f64,
    pub gamma_r: f64,
    pub lambda_drive: C64,
    pub t_r: f64,
}

impl ReservoirDerived {
    pub fn compute(params: &CavityAtomParams, atom: &AtomDensityMatrix) -> Result<Self> {
        params.validate()?;
        let gamma_r = reservoir_rate(params, atom)?;
        let n_th = thermal_photon_number(params, atom)?;
        Ok(Self {
            rho_ee: atom.rho_ee,
            rho_gg: atom.rho_gg,
            rho_eg: atom.rho_eg,
            gamma_inj: injection_rate(params),
            n_th,
            gamma_r,
            lambda_drive: drive_amplitude(params, atom),
            t_r: bose_temperature(n_th, params.omega_a)?,
        })
    }

    /// Steady-state displacement `α = −2iλ/Γ_r`.
    pub fn alpha(&self) -> C64 {
        C64::new(0.0, -2.0) * self.lambda_drive / self.gamma_r
    }

    /// `n̄_th + |α|²`.
    pub fn steady_photon_number(&self) -> f64 {
        self.n_th + self.alpha().norm_sqr()
    }
}

/// Finds the Bloch angle θ for which the reservoir temperature at the
/// current operating point equals `target_t_r`.
///
/// Bisects on θ ∈ (0, π); `n̄_th` decreases monotonically in θ. Points in
/// the masing region count as infinitely hot.
pub fn calibrate_theta(params: &CavityAtomParams, target_t_r: f64) -> Result<f64> {
    params.validate()?;
    let target_n = bose_occupation(target_t_r, params.omega_a)?;
    let n_at = |theta: f64| -> f64 {
        let atom = atom_density_matrix(&AtomEnsembleSpec {
            theta,
            phase_mode: PhaseMode::Randomized,
            pump_detuning: f64::INFINITY,
        });
        thermal_photon_number(params, &atom).unwrap_or(f64::INFINITY)
    };
    let (mut lo, mut hi) = (0.0, PI);
    if n_at(lo) < target_n {
        return Err(Error::Calibration(format!(
            "T_R = {target_t_r} K unreachable: fully inverted atoms give n_th = {:.4e} < {target_n:.4e}",
            n_at(lo)
        )));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if n_at(mid) > target_n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
