//! Four-stroke photonic engine cycle and its thermodynamic ledger.
//!
//! Strokes: A→B isochoric heating by the superradiant reservoir at `ω_c1`,
//! B→C isoenergetic expansion to `ω_c2`, C→D isochoric cooling with the
//! reservoir phases randomised, D→A isoenergetic compression back to `ω_c1`.
//! Work is counted positive when done by the engine.

use serde::{Deserialize, Serialize};

use crate::constants::{atomic_resonance, two_pi, BOLTZMANN, HBAR, PLANCK};
use crate::dynamics::{self, build_generator, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::fock::{relative_entropy_of_coherence, thermal_entropy_change, thermal_state, FieldState, DEFAULT_DIM};
use crate::reservoir::{
    atom_density_matrix, bose_temperature, calibrate_theta, AtomDensityMatrix, AtomEnsembleSpec, CavityAtomParams,
    PhaseMode, ReservoirDerived,
};

pub const STROKE_LABELS: [&str; 4] = ["A->B", "B->C", "C->D", "D->A"];

/// Frequency program of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSchedule {
    /// Atom–cavity detuning at A and B, rad/s.
    pub delta_1: f64,
    /// Atom–cavity detuning at C and D, rad/s.
    pub delta_2: f64,
    pub omega_c1: f64,
    pub omega_c2: f64,
    pub n_grid: usize,
    /// Durations of A→B, B→C, C→D, D→A in dynamic mode, s.
    pub stroke_durations: [f64; 4],
}

impl CycleSchedule {
    pub const DEFAULT_N_GRID: usize = 64;
    pub const DEFAULT_STROKE_DURATION: f64 = 10e-6;

    /// Cavity frequencies follow the detunings from the atomic line:
    /// `ω_c = ω_a − Δ`.
    pub fn from_detunings(delta_1: f64, delta_2: f64, omega_a: f64) -> Result<Self> {
        let s = Self {
            delta_1,
            delta_2,
            omega_c1: omega_a - delta_1,
            omega_c2: omega_a - delta_2,
            n_grid: Self::DEFAULT_N_GRID,
            stroke_durations: [Self::DEFAULT_STROKE_DURATION; 4],
        };
        s.validate()?;
        Ok(s)
    }

    /// `Δ₁/2π = 0.5 MHz`, `Δ₂/2π = 1.0 MHz` on the working transition.
    pub fn standard() -> Self {
        Self::from_detunings(two_pi(0.5e6), two_pi(1.0e6), atomic_resonance()).expect("standard schedule is valid")
    }

    pub fn with_n_grid(self, n_grid: usize) -> Self {
        Self { n_grid, ..self }
    }

    pub fn with_stroke_durations(self, stroke_durations: [f64; 4]) -> Self {
        Self {
            stroke_durations,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c2 > 0.0) || !(self.omega_c1 > self.omega_c2) || !self.omega_c1.is_finite() {
            return Err(Error::Domain(format!(
                "need omega_c1 > omega_c2 > 0, got {} and {}",
                self.omega_c1, self.omega_c2
            )));
        }
        if !self.delta_1.is_finite() || !self.delta_2.is_finite() {
            return Err(Error::Domain("detunings must be finite".into()));
        }
        if self.n_grid < 2 {
            return Err(Error::Domain(format!("n_grid must be >= 2, got {}", self.n_grid)));
        }
        if self.stroke_durations.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::Domain("stroke durations must be finite and > 0".into()));
        }
        Ok(())
    }

    /// Cavity frequency change between the two volumes, Hz (negative on expansion).
    pub fn delta_nu(&self) -> f64 {
        -(self.omega_c1 - self.omega_c2) / (2.0 * std::f64::consts::PI)
    }

    /// `ln(ω_c1/ω_c2)`, evaluated without cancellation.
    pub fn log_ratio(&self) -> f64 {
        ((self.omega_c1 - self.omega_c2) / self.omega_c2).ln_1p()
    }

    /// Detuning at grid point `j` of a stroke running from `from` to `to`.
    fn detuning_at(&self, from: f64, to: f64, j: usize) -> f64 {
        let last = (self.n_grid - 1) as f64;
        from + (to - from) * j as f64 / last
    }
}

/// Reservoir phase preparation per stroke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReservoirProgram {
    pub phase_modes: [PhaseMode; 4],
}

impl ReservoirProgram {
    /// Coherent atoms during A→B and B→C, randomised during C→D and D→A.
    pub fn superradiant() -> Self {
        use PhaseMode::*;
        Self {
            phase_modes: [Coherent, Coherent, Randomized, Randomized],
        }
    }

    /// Randomised phases throughout: a single thermal reservoir.
    pub fn thermal_only() -> Self {
        Self {
            phase_modes: [PhaseMode::Randomized; 4],
        }
    }

    pub fn atoms(&self, theta: f64) -> Result<[AtomDensityMatrix; 4]> {
        let mut out = [AtomDensityMatrix {
            rho_ee: 0.0,
            rho_gg: 0.0,
            rho_eg: Default::default(),
        }; 4];
        for (o, mode) in out.iter_mut().zip(self.phase_modes) {
            *o = atom_density_matrix(&AtomEnsembleSpec::coherent(theta)?.with_mode(mode)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CycleMode {
    QuasiStatic,
    /// Time evolution through the schedule at Fock truncation `dim`.
    Dynamic {
        dim: usize,
        tol: f64,
    },
}

impl CycleMode {
    pub fn dynamic() -> Self {
        Self::Dynamic {
            dim: DEFAULT_DIM,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrokeLedger {
    pub label: &'static str,
    /// Work done by the engine, J.
    pub work: f64,
    /// Heat absorbed by the engine, J.
    pub heat: f64,
    /// Entropy change of the field, k_B.
    pub entropy_change: f64,
    /// Ergotropy change, J.
    pub ergotropy_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvPoint {
    /// Atom–cavity detuning, rad/s.
    pub detuning: f64,
    pub photon_number: f64,
    pub stroke: &'static str,
}

/// Reservoir drift along the frequency strokes, not fed back into the ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservoirDiagnostics {
    pub t_r_min: f64,
    pub t_r_max: f64,
    /// Local reservoir steady-state photon number along B→C.
    pub n_ss_expansion: Vec<f64>,
    /// Local reservoir steady-state photon number along D→A.
    pub n_ss_compression: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicDiagnostics {
    /// Photon number at the end of each stroke.
    pub n_measured: [f64; 4],
    /// `−∫ n ħ dω` along the simulated B→C and D→A strokes, J.
    pub w_bc_raw: f64,
    pub w_da_raw: f64,
    /// Time into A→B at which the gap to the stroke's final photon number first drops below 1/e.
    pub relaxation_time: f64,
    /// `(t, n)` samples over the whole cycle, t measured from A.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleLedger {
    pub strokes: [StrokeLedger; 4],
    pub n_th: f64,
    pub n_sr: f64,
    pub n_th_prime: f64,
    pub n_sr_prime: f64,
    pub w_out: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub eta: f64,
    pub t_c_sr: f64,
    pub t_c_th: f64,
    pub t_r: f64,
    pub omega_c1: f64,
    pub omega_c2: f64,
    pub delta_nu: f64,
    pub theta: f64,
    pub negative_work: bool,
    pub pv_points: Vec<PvPoint>,
    pub reservoir: ReservoirDiagnostics,
    pub dynamic: Option<DynamicDiagnostics>,
}

impl CycleLedger {
    pub fn entropy_sum(&self) -> f64 {
        self.strokes.iter().map(|s| s.entropy_change).sum()
    }
}

/// `T_c = n ħω_c / [k_B n̄_th ln(1 + 1/n̄_th)]`, K.
pub fn effective_cavity_temperature(n: f64, n_th: f64, omega_c: f64) -> Result<f64> {
    if !(n_th > 0.0) || !n_th.is_finite() {
        return Err(Error::UndefinedTemperature(n_th));
    }
    if !(n >= 0.0) || !(omega_c > 0.0) {
        return Err(Error::Domain(format!(
            "need n >= 0 and omega_c > 0, got {n}, {omega_c}"
        )));
    }
    Ok(n * HBAR * omega_c / (BOLTZMANN * n_th * (1.0 / n_th).ln_1p()))
}

/// `W = −n h Δν`, J.
pub fn work_frequency_shift(n: f64, delta_nu: f64) -> f64 {
    -n * PLANCK * delta_nu
}

/// `n ħ ω_start ln(ω_start/ω_end)`: work at constant `n ω`, J.
pub fn stroke_work_isoenergetic(n_start: f64, omega_start: f64, omega_end: f64) -> Result<f64> {
    if !(omega_start > 0.0) || !(omega_end > 0.0) {
        return Err(Error::Domain("frequencies must be > 0".into()));
    }
    Ok(n_start * HBAR * omega_start * ((omega_start - omega_end) / omega_end).ln_1p())
}

/// `(n_after − n_before) ħ ω_c`, J.
pub fn stroke_heat_isochoric(n_before: f64, n_after: f64, omega_c: f64) -> Result<f64> {
    if !(omega_c > 0.0) {
        return Err(Error::Domain("omega_c must be > 0".into()));
    }
    Ok((n_after - n_before) * HBAR * omega_c)
}

/// `1 − n̄_th/n_sr`.
pub fn efficiency(n_th: f64, n_sr: f64) -> Result<f64> {
    if !(n_th > 0.0) {
        return Err(Error::Domain(format!("n_th must be > 0, got {n_th}")));
    }
    if n_sr < n_th {
        return Err(Error::NegativeWorkRegime { n_th, n_sr });
    }
    Ok(1.0 - n_th / n_sr)
}

/// Trapezoid rule for `−∫ n(ω) ħ dω` with `n ω` fixed at `n_start ω_start`,
/// parametrised by the shift `s = ω_start − ω`.
fn isoenergetic_work_quadrature(n_start: f64, omega_start: f64, omega_end: f64, n_grid: usize) -> f64 {
    let span = omega_start - omega_end;
    let last = (n_grid - 1) as f64;
    let ds = span / last;
    let e = n_start * HBAR * omega_start;
    let f = |j: usize| e / (omega_start - span * j as f64 / last);
    let inner: f64 = (1..n_grid - 1).map(f).sum();
    ds * (0.5 * (f(0) + f(n_grid - 1)) + inner)
}

fn reservoir_at(params: &CavityAtomParams, delta: f64, atom: &AtomDensityMatrix) -> Result<ReservoirDerived> {
    ReservoirDerived::compute(&params.with_delta_ac(delta), atom)
}

/// Calibrates θ so that the reservoir temperature at point A equals `target_t_r`.
pub fn calibrate_for_schedule(params: &CavityAtomParams, schedule: &CycleSchedule, target_t_r: f64) -> Result<f64> {
    calibrate_theta(&params.with_delta_ac(schedule.delta_1), target_t_r)
}

/// Runs one cycle and books its ledger.
pub fn run_cycle(
    params: &CavityAtomParams,
    schedule: &CycleSchedule,
    theta: f64,
    program: &ReservoirProgram,
    mode: CycleMode,
) -> Result<CycleLedger> {
    params.validate()?;
    schedule.validate()?;
    let atoms = program.atoms(theta)?;
    let s = schedule;

    // reservoir at every grid point of the frequency strokes; masing anywhere is fatal
    let mut t_r_min = f64::INFINITY;
    let mut t_r_max = f64::NEG_INFINITY;
    let mut n_ss_expansion = Vec::with_capacity(s.n_grid);
    let mut n_ss_compression = Vec::with_capacity(s.n_grid);
    for j in 0..s.n_grid {
        let d_bc = s.detuning_at(s.delta_1, s.delta_2, j);
        let d_da = s.detuning_at(s.delta_2, s.delta_1, j);
        let bc = reservoir_at(params, d_bc, &atoms[1])?;
        let da = reservoir_at(params, d_da, &atoms[3])?;
        for r in [&bc, &da] {
            t_r_min = t_r_min.min(r.t_r);
            t_r_max = t_r_max.max(r.t_r);
        }
        n_ss_expansion.push(bc.steady_photon_number());
        n_ss_compression.push(da.steady_photon_number());
    }
    reservoir_at(params, s.delta_1, &atoms[0])?;
    reservoir_at(params, s.delta_2, &atoms[2])?;
    let thermal_a = reservoir_at(params, s.delta_1, &atoms[3])?;

    let (n_th, n_sr, dynamic) = match mode {
        CycleMode::QuasiStatic => {
            let heated = reservoir_at(params, s.delta_1, &atoms[0])?;
            (thermal_a.n_th, heated.steady_photon_number(), None)
        }
        CycleMode::Dynamic { dim, tol } => {
            let d = run_dynamic(params, s, &atoms, &thermal_a, dim, tol)?;
            (d.n_measured[3], d.n_measured[0], Some(d))
        }
    };
    let reservoir = ReservoirDiagnostics {
        t_r_min,
        t_r_max,
        n_ss_expansion,
        n_ss_compression,
    };
    book_ledger(params, s, theta, n_th, n_sr, thermal_a.t_r, reservoir, dynamic)
}

#[allow(clippy::too_many_arguments)]
fn book_ledger(
    _params: &CavityAtomParams,
    s: &CycleSchedule,
    theta: f64,
    n_th: f64,
    n_sr: f64,
    t_r: f64,
    reservoir: ReservoirDiagnostics,
    dynamic: Option<DynamicDiagnostics>,
) -> Result<CycleLedger> {
    let (w1, w2) = (s.omega_c1, s.omega_c2);
    let ratio_m1 = (w1 - w2) / w2;
    let n_sr_prime = n_sr + n_sr * ratio_m1;
    let n_th_prime = n_th + n_th * ratio_m1;

    // internal energies; C and D carry the same energy as B and A
    let u_a = n_th * HBAR * w1;
    let u_b = n_sr * HBAR * w1;
    let q_ab = u_b - u_a;
    let q_cd = u_a - u_b;
    let w_bc = isoenergetic_work_quadrature(n_sr, w1, w2, s.n_grid);
    let w_da = isoenergetic_work_quadrature(n_th_prime, w2, w1, s.n_grid);
    let w_out = w_bc + w_da;
    let q_in = (q_ab + q_cd) + w_bc;
    let q_out = -w_da;
    let eta = if q_in > 0.0 { w_out / q_in } else { 0.0 };

    let ds_bc = thermal_entropy_change(n_th, n_th * ratio_m1)?;
    let strokes = [
        StrokeLedger {
            label: STROKE_LABELS[0],
            work: 0.0,
            heat: q_ab,
            entropy_change: 0.0,
            ergotropy_change: -q_ab,
        },
        StrokeLedger {
            label: STROKE_LABELS[1],
            work: w_bc,
            heat: w_bc,
            entropy_change: ds_bc,
            ergotropy_change: -w_out,
        },
        StrokeLedger {
            label: STROKE_LABELS[2],
            work: 0.0,
            heat: q_cd,
            entropy_change: 0.0,
            ergotropy_change: -q_cd,
        },
        StrokeLedger {
            label: STROKE_LABELS[3],
            work: w_da,
            heat: w_da,
            entropy_change: -ds_bc,
            ergotropy_change: 0.0,
        },
    ];

    let mut pv_points = Vec::with_capacity(4 * s.n_grid);
    let last = (s.n_grid - 1) as f64;
    for j in 0..s.n_grid {
        let x = j as f64 / last;
        pv_points.push(PvPoint {
            detuning: s.delta_1,
            photon_number: n_th + (n_sr - n_th) * x,
            stroke: STROKE_LABELS[0],
        });
    }
    for j in 0..s.n_grid {
        let d = s.detuning_at(s.delta_1, s.delta_2, j);
        let w = w1 - (d - s.delta_1);
        pv_points.push(PvPoint {
            detuning: d,
            photon_number: n_sr * w1 / w,
            stroke: STROKE_LABELS[1],
        });
    }
    for j in 0..s.n_grid {
        let x = j as f64 / last;
        pv_points.push(PvPoint {
            detuning: s.delta_2,
            photon_number: n_sr_prime + (n_th_prime - n_sr_prime) * x,
            stroke: STROKE_LABELS[2],
        });
    }
    for j in 0..s.n_grid {
        let d = s.detuning_at(s.delta_2, s.delta_1, j);
        let w = w1 - (d - s.delta_1);
        pv_points.push(PvPoint {
            detuning: d,
            photon_number: n_th * w1 / w,
            stroke: STROKE_LABELS[3],
        });
    }

    Ok(CycleLedger {
        strokes,
        n_th,
        n_sr,
        n_th_prime,
        n_sr_prime,
        w_out,
        q_in,
        q_out,
        eta,
        t_c_sr: effective_cavity_temperature(n_sr, n_th, w1)?,
        t_c_th: effective_cavity_temperature(n_th, n_th, w1)?,
        t_r,
        omega_c1: w1,
        omega_c2: w2,
        delta_nu: s.delta_nu(),
        theta,
        negative_work: w_out < 0.0,
        pv_points,
        reservoir,
        dynamic,
    })
}

/// Evolves the field through the four strokes from the thermal state at A,
/// holding each generator fixed over one grid interval.
fn run_dynamic(
    params: &CavityAtomParams,
    s: &CycleSchedule,
    atoms: &[AtomDensityMatrix; 4],
    thermal_a: &ReservoirDerived,
    dim: usize,
    tol: f64,
) -> Result<DynamicDiagnostics> {
    const SUBSAMPLES: usize = 4;
    let mut rho: FieldState = thermal_state(thermal_a.n_th, dim)?;
    let legs = [
        (s.delta_1, s.delta_1),
        (s.delta_1, s.delta_2),
        (s.delta_2, s.delta_2),
        (s.delta_2, s.delta_1),
    ];
    let mut samples = vec![(0.0, rho.mean_photon_number())];
    let mut n_measured = [0.0; 4];
    let mut raw = [0.0; 4];
    let mut t0 = 0.0;
    let mut stroke_samples: Vec<Vec<(f64, f64)>> = Vec::with_capacity(4);
    for (k, &(from, to)) in legs.iter().enumerate() {
        let segments = s.n_grid - 1;
        let dt = s.stroke_durations[k] / segments as f64;
        let mut local = vec![(0.0, rho.mean_photon_number())];
        for j in 0..segments {
            // generator at the segment midpoint
            let d = from + (to - from) * (j as f64 + 0.5) / segments as f64;
            let gen = build_generator(&params.with_delta_ac(d), &atoms[k], dim)?;
            let times: Vec<f64> = (1..=SUBSAMPLES).map(|i| dt * i as f64 / SUBSAMPLES as f64).collect();
            let out = dynamics::evolve(&gen, &rho, &times, tol)?;
            let t_seg = j as f64 * dt;
            for (t, st) in times.iter().zip(&out) {
                local.push((t_seg + t, st.mean_photon_number()));
            }
            rho = out.into_iter().last().expect("non-empty sample grid");
        }
        // raw work −∫ n ħ dω; ω = ω_c1 − (Δ − Δ₁)
        let stroke_span = s.stroke_durations[k];
        let omega_at = |t: f64| s.omega_c1 - ((from - s.delta_1) + (to - from) * t / stroke_span);
        raw[k] = local
            .windows(2)
            .map(|w| -0.5 * (w[0].1 + w[1].1) * HBAR * (omega_at(w[1].0) - omega_at(w[0].0)))
            .sum();
        n_measured[k] = rho.mean_photon_number();
        samples.extend(local.iter().skip(1).map(|&(t, n)| (t0 + t, n)));
        t0 += stroke_span;
        stroke_samples.push(local);
    }

    let heat = &stroke_samples[0];
    let (n_start, n_end) = (heat[0].1, heat[heat.len() - 1].1);
    let gap0 = (n_end - n_start).abs();
    let relaxation_time = heat
        .iter()
        .find(|(_, n)| (n_end - n).abs() <= gap0 * (-1.0f64).exp())
        .map_or(f64::NAN, |x| x.0);

    Ok(DynamicDiagnostics {
        n_measured,
        w_bc_raw: raw[1],
        w_da_raw: raw[3],
        relaxation_time,
        samples,
    })
}

/// One point of a work-scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n_bar: f64,
    pub w_out: f64,
    pub eta: f64,
    pub n_th: f64,
    pub n_sr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSweep {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln W_out` against `ln N̄`.
    pub slope: f64,
    pub slope_std_err: f64,
    pub intercept: f64,
}

/// Least-squares line through `(x, y)`: slope, its standard error, intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::DegenerateFit(format!("need >= 3 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let std_err = (rss / (n - 2.0) / sxx).sqrt();
    Ok((slope, std_err, intercept))
}

/// Quasi-static `W_out` against `N̄` at fixed θ, with the log–log slope.
pub fn scaling_sweep(
    params: &CavityAtomParams,
    schedule: &CycleSchedule,
    theta: f64,
    n_bar_values: &[f64],
) -> Result<ScalingSweep> {
    if n_bar_values.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need >= 3 sweep points, got {}",
            n_bar_values.len()
        )));
    }
    use rayon::prelude::*;
    let points: Vec<ScalingPoint> = n_bar_values
        .par_iter()
        .map(|&n_bar| {
            let ledger = run_cycle(
                &params.with_n_bar(n_bar),
                schedule,
                theta,
                &ReservoirProgram::superradiant(),
                CycleMode::QuasiStatic,
            )?;
            if !(ledger.w_out > 0.0) {
                return Err(Error::NegativeWorkRegime {
                    n_th: ledger.n_th,
                    n_sr: ledger.n_sr,
                });
            }
            Ok(ScalingPoint {
                n_bar,
                w_out: ledger.w_out,
                eta: ledger.eta,
                n_th: ledger.n_th,
                n_sr: ledger.n_sr,
            })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = points.iter().map(|p| p.n_bar.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.w_out.ln()).collect();
    let (slope, slope_std_err, intercept) = fit_line(&x, &y)?;
    Ok(ScalingSweep {
        points,
        slope,
        slope_std_err,
        intercept,
    })
}

/// Ergotropy bookkeeping and reservoir coherence per stroke.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgotropyLedger {
    /// Field ergotropy change per stroke, J.
    pub delta_ergotropy: [f64; 4],
    /// Relative entropy of coherence of one reservoir atom during each stroke, k_B.
    pub coherence: [f64; 4],
    /// `k_B T_R ΔC` on entering each stroke, J.
    pub t_r_delta_c: [f64; 4],
}

pub fn ergotropy_ledger(cycle: &CycleLedger, atoms_by_stroke: &[AtomDensityMatrix; 4]) -> Result<ErgotropyLedger> {
    let mut coherence = [0.0; 4];
    for (c, a) in coherence.iter_mut().zip(atoms_by_stroke) {
        *c = relative_entropy_of_coherence(&a.to_matrix())?;
    }
    let mut t_r_delta_c = [0.0; 4];
    for k in 0..4 {
        let prev = coherence[(k + 3) % 4];
        t_r_delta_c[k] = BOLTZMANN * cycle.t_r * (coherence[k] - prev);
    }
    let mut delta_ergotropy = [0.0; 4];
    for (d, s) in delta_ergotropy.iter_mut().zip(&cycle.strokes) {
        *d = s.ergotropy_change;
    }
    Ok(ErgotropyLedger {
        delta_ergotropy,
        coherence,
        t_r_delta_c,
    })
}

/// Temperature of a Bose mode at the cavity frequency for `n_th`, K.
pub fn cavity_bose_temperature(n_th: f64, omega_c: f64) -> Result<f64> {
    bose_temperature(n_th, omega_c)
}
