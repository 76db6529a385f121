//! Run configuration: a TOML file with one typed section per module.
//!
//! Every optional key has a default that is written back into the resolved
//! configuration, which is echoed in the run summary.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::constants::two_pi;
use crate::engine::{CycleMode, CycleSchedule, ReservoirProgram};
use crate::fock::DEFAULT_DIM;
use crate::reservoir::{CavityAtomParams, DriveSinc, PhaseMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SteadyState,
    Cycle,
    PvDiagram,
    Scaling,
    Temperatures,
    EfficiencyCurve,
    G2,
    TrajectoryValidation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::SteadyState => "steady_state",
            Self::Cycle => "cycle",
            Self::PvDiagram => "pv_diagram",
            Self::Scaling => "scaling",
            Self::Temperatures => "temperatures",
            Self::EfficiencyCurve => "efficiency_curve",
            Self::G2 => "g2",
            Self::TrajectoryValidation => "trajectory_validation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Self::One(x) => vec![x],
            Self::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    cavity: RawCavity,
    #[serde(default)]
    atoms: RawAtoms,
    #[serde(default)]
    schedule: RawSchedule,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    trajectory: RawTrajectory,
    #[serde(default)]
    g2: RawG2,
    #[serde(default)]
    numerics: RawNumerics,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    g: Option<f64>,
    g_tau: Option<f64>,
    kappa: Option<f64>,
    kappa_tau: Option<f64>,
    tau: Option<f64>,
    gamma_atom: Option<f64>,
    omega_a: Option<f64>,
    n_bar: Option<f64>,
    delta_ac: Option<f64>,
    drive_sinc: Option<DriveSinc>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtoms {
    theta: Option<OneOrMany>,
    target_t_r: Option<OneOrMany>,
    phase_mode: Option<PhaseMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    QuasiStatic,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramKind {
    Superradiant,
    ThermalOnly,
}

impl ProgramKind {
    pub fn program(self) -> ReservoirProgram {
        match self {
            Self::Superradiant => ReservoirProgram::superradiant(),
            Self::ThermalOnly => ReservoirProgram::thermal_only(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    delta_1_hz: Option<f64>,
    delta_2_hz: Option<f64>,
    n_grid: Option<usize>,
    stroke_durations_s: Option<[f64; 4]>,
    mode: Option<ScheduleMode>,
    program: Option<ProgramKind>,
    thermal_variant: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_bar: Option<Vec<f64>>,
    reference_n_bar: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    n_trajectories: Option<usize>,
    t_final_s: Option<f64>,
    n_samples: Option<usize>,
    dim: Option<usize>,
    record_emissions: Option<bool>,
    event_dump: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawG2 {
    tau_max_s: Option<f64>,
    n_tau: Option<usize>,
    histogram: Option<bool>,
    bin_width_s: Option<f64>,
    max_lag_s: Option<f64>,
    t_start_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    dim: Option<usize>,
    tol: Option<f64>,
}

/// How the Bloch angle of each operating point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSource {
    Explicit(f64),
    TargetTemperature(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomsConfig {
    pub operating_points: Vec<ThetaSource>,
    pub phase_mode: PhaseMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleConfig {
    pub schedule: CycleSchedule,
    pub mode: ScheduleMode,
    pub program: ProgramKind,
    pub thermal_variant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_bar: Vec<f64>,
    pub reference_n_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySection {
    pub n_trajectories: usize,
    pub t_final_s: f64,
    pub n_samples: usize,
    pub dim: usize,
    pub record_emissions: bool,
    pub event_dump: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Section {
    pub tau_max_s: f64,
    pub n_tau: usize,
    pub histogram: bool,
    pub bin_width_s: f64,
    pub max_lag_s: f64,
    pub t_start_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericsConfig {
    pub dim: usize,
    pub tol: f64,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub cavity: CavityAtomParams,
    pub atoms: AtomsConfig,
    pub schedule: ScheduleConfig,
    pub sweep: SweepConfig,
    pub trajectory: TrajectorySection,
    pub g2: G2Section,
    pub numerics: NumericsConfig,
}

impl RunConfig {
    pub fn cycle_mode(&self) -> CycleMode {
        match self.schedule.mode {
            ScheduleMode::QuasiStatic => CycleMode::QuasiStatic,
            ScheduleMode::Dynamic => CycleMode::Dynamic {
                dim: self.numerics.dim,
                tol: self.numerics.tol,
            },
        }
    }
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SWEEP: [f64; 9] = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5];

fn exclusive(section: &str, a: (&str, Option<f64>), b: (&str, Option<f64>)) -> Result<(), String> {
    if a.1.is_some() && b.1.is_some() {
        Err(format!("[{section}] {} and {} are mutually exclusive", a.0, b.0))
    } else {
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} must be finite and > 0, got {v}"))
    }
}

/// Parses and validates a configuration file's text.
pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, String> {
    let base = CavityAtomParams::experimental();
    let c = &raw.cavity;
    exclusive("cavity", ("g", c.g), ("g_tau", c.g_tau))?;
    exclusive("cavity", ("tau", c.tau), ("kappa_tau", c.kappa_tau))?;
    let kappa = positive("cavity.kappa", c.kappa.unwrap_or(base.kappa))?;
    let tau = match (c.tau, c.kappa_tau) {
        (Some(t), _) => positive("cavity.tau", t)?,
        (_, Some(kt)) => positive("cavity.kappa_tau", kt)? / kappa,
        _ => base.tau,
    };
    let g = match (c.g, c.g_tau) {
        (Some(g), _) => positive("cavity.g", g)?,
        (_, Some(gt)) => positive("cavity.g_tau", gt)? / tau,
        _ => base.g,
    };
    let cavity = CavityAtomParams {
        g,
        kappa,
        gamma_atom: c.gamma_atom.unwrap_or(base.gamma_atom),
        omega_a: c.omega_a.unwrap_or(base.omega_a),
        tau,
        n_bar: c.n_bar.unwrap_or(base.n_bar),
        delta_ac: c.delta_ac.unwrap_or(0.0),
        drive_sinc: c.drive_sinc.unwrap_or_default(),
    };
    cavity.validate().map_err(|e| format!("[cavity] {e}"))?;

    let a = raw.atoms;
    let operating_points: Vec<ThetaSource> = match (a.theta, a.target_t_r) {
        (Some(_), Some(_)) => {
            return Err("[atoms] theta and target_t_r are mutually exclusive".into());
        }
        (Some(t), None) => t.into_vec().into_iter().map(ThetaSource::Explicit).collect(),
        (None, Some(t)) => t.into_vec().into_iter().map(ThetaSource::TargetTemperature).collect(),
        (None, None) => return Err("[atoms] one of theta or target_t_r is required".into()),
    };
    if operating_points.is_empty() {
        return Err("[atoms] at least one operating point is required".into());
    }
    for p in &operating_points {
        match *p {
            ThetaSource::Explicit(t) if !(0.0..=std::f64::consts::PI).contains(&t) => {
                return Err(format!("[atoms] theta must lie in [0, pi], got {t}"));
            }
            ThetaSource::TargetTemperature(t) => {
                positive("atoms.target_t_r", t)?;
            }
            _ => {}
        }
    }
    let atoms = AtomsConfig {
        operating_points,
        phase_mode: a.phase_mode.unwrap_or(PhaseMode::Coherent),
    };

    let s = raw.schedule;
    let schedule = CycleSchedule::from_detunings(
        two_pi(s.delta_1_hz.unwrap_or(0.5e6)),
        two_pi(s.delta_2_hz.unwrap_or(1.0e6)),
        cavity.omega_a,
    )
    .map_err(|e| format!("[schedule] {e}"))?
    .with_n_grid(s.n_grid.unwrap_or(CycleSchedule::DEFAULT_N_GRID))
    .with_stroke_durations(
        s.stroke_durations_s
            .unwrap_or([CycleSchedule::DEFAULT_STROKE_DURATION; 4]),
    );
    schedule.validate().map_err(|e| format!("[schedule] {e}"))?;
    let schedule = ScheduleConfig {
        schedule,
        mode: s.mode.unwrap_or(ScheduleMode::QuasiStatic),
        program: s.program.unwrap_or(ProgramKind::Superradiant),
        thermal_variant: s.thermal_variant.unwrap_or(true),
    };

    let sweep = SweepConfig {
        n_bar: raw.sweep.n_bar.unwrap_or_else(|| DEFAULT_SWEEP.to_vec()),
        reference_n_bar: raw.sweep.reference_n_bar.unwrap_or(cavity.n_bar),
    };
    for &n in &sweep.n_bar {
        positive("sweep.n_bar", n)?;
    }
    positive("sweep.reference_n_bar", sweep.reference_n_bar)?;

    let t = raw.trajectory;
    let trajectory = TrajectorySection {
        n_trajectories: t.n_trajectories.unwrap_or(1000),
        t_final_s: positive("trajectory.t_final_s", t.t_final_s.unwrap_or(20e-6))?,
        n_samples: t.n_samples.unwrap_or(101),
        dim: t.dim.unwrap_or(20),
        record_emissions: t.record_emissions.unwrap_or(false),
        event_dump: t.event_dump.unwrap_or(false),
    };
    if trajectory.n_trajectories == 0 {
        return Err("trajectory.n_trajectories must be >= 1".into());
    }
    if trajectory.n_samples < 2 || trajectory.dim < 2 {
        return Err("trajectory.n_samples and trajectory.dim must be >= 2".into());
    }

    let g = raw.g2;
    let g2 = G2Section {
        tau_max_s: positive("g2.tau_max_s", g.tau_max_s.unwrap_or(5e-6))?,
        n_tau: g.n_tau.unwrap_or(101),
        histogram: g.histogram.unwrap_or(false),
        bin_width_s: positive("g2.bin_width_s", g.bin_width_s.unwrap_or(50e-9))?,
        max_lag_s: positive("g2.max_lag_s", g.max_lag_s.unwrap_or(3e-6))?,
        t_start_s: g.t_start_s.unwrap_or(10e-6),
    };
    if g2.n_tau < 2 {
        return Err("g2.n_tau must be >= 2".into());
    }

    let numerics = NumericsConfig {
        dim: raw.numerics.dim.unwrap_or(DEFAULT_DIM),
        tol: positive("numerics.tol", raw.numerics.tol.unwrap_or(1e-9))?,
    };
    if numerics.dim < 2 {
        return Err("numerics.dim must be >= 2".into());
    }

    Ok(RunConfig {
        experiment: raw.experiment,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        cavity,
        atoms,
        schedule,
        sweep,
        trajectory,
        g2,
        numerics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let c = parse_config("experiment = \"cycle\"\n[atoms]\ntarget_t_r = 8000.0\n").unwrap();
        assert_eq!(c.experiment, Experiment::Cycle);
        assert_eq!(c.cavity, CavityAtomParams::experimental());
        assert_eq!(c.atoms.operating_points, vec![ThetaSource::TargetTemperature(8000.0)]);
        assert_eq!(c.sweep.reference_n_bar, 0.8);
        assert_eq!(c.numerics.dim, 60);
    }

    #[test]
    fn products_and_lists() {
        let text = r#"
experiment = "scaling"
seed = 9
[cavity]
g_tau = 0.03
kappa_tau = 0.05
n_bar = 2.1
[atoms]
target_t_r = [3200.0, 3800.0]
[sweep]
n_bar = [0.5, 1.5, 2.5]
"#;
        let c = parse_config(text).unwrap();
        let p = CavityAtomParams::with_products(0.03, 0.05, 2.1);
        assert!((c.cavity.tau - p.tau).abs() < 1e-20);
        assert!((c.cavity.g_tau() - 0.03).abs() < 1e-15);
        assert_eq!(c.atoms.operating_points.len(), 2);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn schema_errors() {
        assert!(parse_config("").is_err());
        assert!(parse_config("experiment = \"cycle\"\nbogus = 1\n[atoms]\ntheta = 1.0\n").is_err());
        assert!(parse_config("experiment = \"cycle\"\n[atoms]\ntheta = 1.0\ntarget_t_r = 1.0\n").is_err());
        assert!(
            parse_config("experiment = \"cycle\"\n[cavity]\ng = 1.0\ng_tau = 0.1\n[atoms]\ntheta = 1.0\n").is_err()
        );
        assert!(parse_config("experiment = \"cycle\"\n[atoms]\ntheta = 4.0\n").is_err());
        assert!(parse_config("experiment = \"cycle\"\n").is_err());
        assert!(parse_config("experiment = \"nope\"\n[atoms]\ntheta = 1.0\n").is_err());
        assert!(parse_config("experiment = \"cycle\"\n[atoms]\ntheta = 1.0\n[cavity]\nkappa = -1.0\n").is_err());
    }
}
