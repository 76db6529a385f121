//! Experiment execution and output writing.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{parse_config, Experiment, RunConfig, ThetaSource};
use super::CliError;
use crate::dynamics::{self, build_generator, g2_correlation_with_tol, steady_state_analytic, steady_state_numeric};
use crate::engine::{
    calibrate_for_schedule, ergotropy_ledger, run_cycle, scaling_sweep, CycleLedger, CycleMode, ReservoirProgram,
};
use crate::fock::{ergotropy, photon_statistics, relative_entropy_of_coherence, von_neumann_entropy, FieldState};
use crate::reservoir::{atom_density_matrix, calibrate_theta, AtomEnsembleSpec, CavityAtomParams, ReservoirDerived};
use crate::trajectory::{
    ensemble_statistics, g2_from_records, overlap_warning, run_ensemble, write_events_csv, TrajectoryConfig,
};
use crate::{constants::HBAR, VERSION};

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: Value,
    pub files: Vec<Artifact>,
}

/// Hex SHA-256 of the configuration text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

enum Cell<'a> {
    F(f64),
    S(&'a str),
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(hash: &str, columns: &[&str]) -> Self {
        Self {
            text: format!("# config_sha256={hash}\n{}\n", columns.join(",")),
        }
    }

    fn row(&mut self, cells: &[Cell]) {
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::F(x) => format!("{x:.11e}"),
                Cell::S(s) => (*s).to_string(),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    fn finish(self, name: String) -> Artifact {
        Artifact {
            name,
            contents: self.text,
        }
    }
}

fn label(src: &ThetaSource) -> String {
    match *src {
        ThetaSource::TargetTemperature(t) if t.fract() == 0.0 => format!("TR{t:.0}"),
        ThetaSource::TargetTemperature(t) => format!("TR{t}"),
        ThetaSource::Explicit(th) => format!("theta{th:.6}"),
    }
}

/// θ for a non-cycle operating point, calibrated at the configured detuning.
fn theta_at(src: &ThetaSource, params: &CavityAtomParams) -> crate::Result<f64> {
    match *src {
        ThetaSource::Explicit(t) => Ok(t),
        ThetaSource::TargetTemperature(t) => calibrate_theta(params, t),
    }
}

/// θ for a cycle operating point, calibrated at stroke A at the reference flux.
fn theta_for_cycle(config: &RunConfig, src: &ThetaSource) -> crate::Result<f64> {
    match *src {
        ThetaSource::Explicit(t) => Ok(t),
        ThetaSource::TargetTemperature(t) => calibrate_for_schedule(
            &config.cavity.with_n_bar(config.sweep.reference_n_bar),
            &config.schedule.schedule,
            t,
        ),
    }
}

fn spec(config: &RunConfig, theta: f64) -> crate::Result<AtomEnsembleSpec> {
    AtomEnsembleSpec::coherent(theta)?.with_mode(config.atoms.phase_mode)
}

fn ledger_json(l: &CycleLedger) -> Value {
    json!({
        "theta": l.theta,
        "n_th": l.n_th,
        "n_sr": l.n_sr,
        "n_th_prime": l.n_th_prime,
        "n_sr_prime": l.n_sr_prime,
        "W_out_J": l.w_out,
        "Q_in_J": l.q_in,
        "Q_out_J": l.q_out,
        "eta": l.eta,
        "T_c_sr_K": l.t_c_sr,
        "T_c_th_K": l.t_c_th,
        "T_R_K": l.t_r,
        "omega_c1": l.omega_c1,
        "omega_c2": l.omega_c2,
        "delta_nu_Hz": l.delta_nu,
        "negative_work": l.negative_work,
        "strokes": l.strokes,
        "entropy_sum_kB": l.entropy_sum(),
        "reservoir": {
            "T_R_min_K": l.reservoir.t_r_min,
            "T_R_max_K": l.reservoir.t_r_max,
        },
        "dynamic": l.dynamic.as_ref().map(|d| json!({
            "n_measured": d.n_measured,
            "W_BC_raw_J": d.w_bc_raw,
            "W_DA_raw_J": d.w_da_raw,
            "relaxation_time_s": d.relaxation_time,
        })),
    })
}

/// Runs the configured experiment, returning the summary and the CSV files.
pub fn execute(config: &RunConfig, hash: &str) -> Result<RunOutput, CliError> {
    let mut warnings: Vec<String> = config.cavity.markovian_warning().into_iter().collect();
    let mut files = Vec::new();
    let mut results = Vec::new();
    for src in &config.atoms.operating_points {
        let tag = label(src);
        let r = match config.experiment {
            Experiment::SteadyState => steady_state(config, src, &tag, hash, &mut files)?,
            Experiment::Cycle => cycle(config, src, &tag, hash, &mut files)?,
            Experiment::PvDiagram => pv_diagram(config, src, &tag, hash, &mut files)?,
            Experiment::Scaling => scaling(config, src, &tag, hash, &mut files)?,
            Experiment::Temperatures | Experiment::EfficiencyCurve => flux_curve(config, src, &tag, hash, &mut files)?,
            Experiment::G2 => g2(config, src, &tag, hash, &mut files, &mut warnings)?,
            Experiment::TrajectoryValidation => {
                trajectory_validation(config, src, &tag, hash, &mut files, &mut warnings)?
            }
        };
        results.push(r);
    }
    let summary = json!({
        "experiment": config.experiment.name(),
        "version": VERSION,
        "seed": config.seed,
        "config_sha256": hash,
        "config": config,
        "results": results,
        "warnings": warnings,
        "files": files.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
    });
    Ok(RunOutput { summary, files })
}

fn steady_state(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
) -> Result<Value, CliError> {
    let p = &config.cavity;
    let theta = theta_at(src, p)?;
    let atom = atom_density_matrix(&spec(config, theta)?);
    let derived = ReservoirDerived::compute(p, &atom)?;
    let dim = config.numerics.dim;
    let gen = build_generator(p, &atom, dim)?;
    let numeric = steady_state_numeric(&gen)?;
    let analytic = steady_state_analytic(p, &atom)?;
    let closed = analytic.to_state(dim)?;
    let stats = photon_statistics(&numeric)?;
    let hbar_omega = HBAR * (p.omega_a - p.delta_ac);

    let mut csv = Csv::new(hash, &["n", "p_numeric", "p_analytic"]);
    for (k, (a, b)) in numeric.populations().iter().zip(closed.populations()).enumerate() {
        csv.row(&[Cell::F(k as f64), Cell::F(*a), Cell::F(b)]);
    }
    files.push(csv.finish(format!("steady_state_{tag}.csv")));

    Ok(json!({
        "label": tag,
        "theta": theta,
        "rho_ee": derived.rho_ee,
        "gamma_inj": derived.gamma_inj,
        "gamma_r": derived.gamma_r,
        "n_th": derived.n_th,
        "T_R_K": derived.t_r,
        "lambda": [derived.lambda_drive.re, derived.lambda_drive.im],
        "alpha": [analytic.alpha.re, analytic.alpha.im],
        "n_analytic": analytic.mean_photon_number(),
        "n_numeric": numeric.mean_photon_number(),
        "trace_distance": numeric.trace_distance(&closed)?,
        "g2_zero": stats.g2_zero,
        "entropy_kB": von_neumann_entropy(&numeric),
        "ergotropy_J": ergotropy(&numeric, hbar_omega)?,
        "coherence_kB": relative_entropy_of_coherence(numeric.matrix())?,
        "truncation_safe": numeric.is_truncation_safe(),
    }))
}

fn stroke_rows(csv: &mut Csv, l: &CycleLedger) {
    for s in &l.strokes {
        csv.row(&[
            Cell::S(s.label),
            Cell::F(s.work),
            Cell::F(s.heat),
            Cell::F(s.entropy_change),
            Cell::F(s.ergotropy_change),
        ]);
    }
}

fn cycle(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
) -> Result<Value, CliError> {
    let theta = theta_for_cycle(config, src)?;
    let program = config.schedule.program.program();
    let params = config.cavity;
    let ledger = run_cycle(&params, &config.schedule.schedule, theta, &program, config.cycle_mode())?;
    let ergo = ergotropy_ledger(&ledger, &program.atoms(theta)?)?;

    let mut csv = Csv::new(hash, &["stroke_label", "W_J", "Q_J", "dS_kB", "dErgotropy_J"]);
    stroke_rows(&mut csv, &ledger);
    files.push(csv.finish(format!("cycle_{tag}.csv")));
    if let Some(d) = &ledger.dynamic {
        let mut csv = Csv::new(hash, &["t_s", "photon_number"]);
        for &(t, n) in &d.samples {
            csv.row(&[Cell::F(t), Cell::F(n)]);
        }
        files.push(csv.finish(format!("cycle_{tag}_samples.csv")));
    }
    let mut v = ledger_json(&ledger);
    v["label"] = json!(tag);
    v["ergotropy"] = json!(ergo);
    Ok(v)
}

fn pv_csv(hash: &str, l: &CycleLedger, name: String) -> Artifact {
    let mut csv = Csv::new(hash, &["detuning_Hz", "photon_number", "stroke_label"]);
    for p in &l.pv_points {
        csv.row(&[
            Cell::F(p.detuning / (2.0 * std::f64::consts::PI)),
            Cell::F(p.photon_number),
            Cell::S(p.stroke),
        ]);
    }
    csv.finish(name)
}

/// Signed area enclosed in the (detuning in Hz, photon number) plane.
fn loop_area(l: &CycleLedger) -> f64 {
    let pts = &l.pv_points;
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (&pts[i], &pts[(i + 1) % n]);
            a.detuning * b.photon_number - b.detuning * a.photon_number
        })
        .sum::<f64>()
        * 0.5
        / (2.0 * std::f64::consts::PI)
}

fn pv_diagram(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
) -> Result<Value, CliError> {
    let theta = theta_for_cycle(config, src)?;
    let s = &config.schedule.schedule;
    let sr = run_cycle(
        &config.cavity,
        s,
        theta,
        &ReservoirProgram::superradiant(),
        CycleMode::QuasiStatic,
    )?;
    files.push(pv_csv(hash, &sr, format!("pv_diagram_{tag}.csv")));
    let mut v = json!({
        "label": tag,
        "theta": theta,
        "W_out_J": sr.w_out,
        "loop_area_Hz": loop_area(&sr),
        "n_th": sr.n_th,
        "n_sr": sr.n_sr,
        "T_R_K": sr.t_r,
    });
    if config.schedule.thermal_variant {
        let th = run_cycle(
            &config.cavity,
            s,
            theta,
            &ReservoirProgram::thermal_only(),
            CycleMode::QuasiStatic,
        )?;
        files.push(pv_csv(hash, &th, format!("pv_diagram_{tag}_thermal.csv")));
        v["thermal_only"] = json!({
            "W_out_J": th.w_out,
            "loop_area_Hz": loop_area(&th),
        });
    }
    Ok(v)
}

fn scaling(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
) -> Result<Value, CliError> {
    let theta = theta_for_cycle(config, src)?;
    let sweep = scaling_sweep(&config.cavity, &config.schedule.schedule, theta, &config.sweep.n_bar)?;
    let mut csv = Csv::new(hash, &["N_bar", "W_out_J"]);
    for p in &sweep.points {
        csv.row(&[Cell::F(p.n_bar), Cell::F(p.w_out)]);
    }
    files.push(csv.finish(format!("scaling_{tag}.csv")));
    Ok(json!({
        "label": tag,
        "theta": theta,
        "slope": sweep.slope,
        "slope_std_err": sweep.slope_std_err,
        "points": sweep.points,
    }))
}

fn flux_curve(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
) -> Result<Value, CliError> {
    let theta = theta_for_cycle(config, src)?;
    let program = ReservoirProgram::superradiant();
    let ledgers: Vec<CycleLedger> = config
        .sweep
        .n_bar
        .iter()
        .map(|&n| {
            run_cycle(
                &config.cavity.with_n_bar(n),
                &config.schedule.schedule,
                theta,
                &program,
                CycleMode::QuasiStatic,
            )
        })
        .collect::<crate::Result<_>>()?;
    let temperatures = config.experiment == Experiment::Temperatures;
    let (name, columns): (&str, &[&str]) = if temperatures {
        ("temperatures", &["N_bar", "T_c_sr_K", "T_c_th_K", "T_R_K"])
    } else {
        ("efficiency_curve", &["N_bar", "eta"])
    };
    let mut csv = Csv::new(hash, columns);
    let mut points = Vec::new();
    for (&n, l) in config.sweep.n_bar.iter().zip(&ledgers) {
        if temperatures {
            csv.row(&[Cell::F(n), Cell::F(l.t_c_sr), Cell::F(l.t_c_th), Cell::F(l.t_r)]);
        } else {
            csv.row(&[Cell::F(n), Cell::F(l.eta)]);
        }
        points.push(json!({
            "N_bar": n,
            "n_th": l.n_th,
            "n_sr": l.n_sr,
            "ratio": l.n_sr / l.n_th,
            "T_c_sr_K": l.t_c_sr,
            "T_c_th_K": l.t_c_th,
            "T_R_K": l.t_r,
            "eta": l.eta,
        }));
    }
    files.push(csv.finish(format!("{name}_{tag}.csv")));
    Ok(json!({ "label": tag, "theta": theta, "points": points }))
}

fn trajectory_config(config: &RunConfig, theta: f64, record_emissions: bool) -> crate::Result<TrajectoryConfig> {
    let t = &config.trajectory;
    let c = TrajectoryConfig {
        params: config.cavity,
        spec: spec(config, theta)?,
        t_final: t.t_final_s,
        dim: t.dim,
        n_trajectories: t.n_trajectories,
        seed: config.seed,
        record_emissions,
        n_samples: t.n_samples,
    };
    c.validate()?;
    Ok(c)
}

fn g2(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let p = &config.cavity;
    let theta = theta_at(src, p)?;
    let atom = atom_density_matrix(&spec(config, theta)?);
    let gen = build_generator(p, &atom, config.numerics.dim)?;
    let ss = steady_state_numeric(&gen)?;
    let g = &config.g2;
    let taus: Vec<f64> = (0..g.n_tau)
        .map(|k| g.tau_max_s * k as f64 / (g.n_tau - 1) as f64)
        .collect();
    let values = g2_correlation_with_tol(&gen, &ss, &taus, config.numerics.tol)?;
    let mut csv = Csv::new(hash, &["tau_s", "g2"]);
    for (t, v) in taus.iter().zip(&values) {
        csv.row(&[Cell::F(*t), Cell::F(*v)]);
    }
    files.push(csv.finish(format!("g2_{tag}.csv")));
    let analytic = steady_state_analytic(p, &atom)?;
    let mut out = json!({
        "label": tag,
        "theta": theta,
        "g2_zero": values[0],
        "alpha_sq_over_n_th": analytic.alpha.norm_sqr() / analytic.n_th,
        "n": ss.mean_photon_number(),
    });

    if g.histogram {
        let tc = trajectory_config(config, theta, true)?;
        let records = run_ensemble(&tc)?;
        warnings.extend(overlap_warning(p, &records));
        let h = g2_from_records(&records, g.bin_width_s, g.max_lag_s, g.t_start_s)?;
        // regression averaged over each histogram bin
        const PER_BIN: usize = 8;
        let fine: Vec<f64> = (0..h.lags.len() * PER_BIN)
            .map(|i| (i as f64 + 0.5) * g.bin_width_s / PER_BIN as f64)
            .collect();
        let reg = g2_correlation_with_tol(&gen, &ss, &fine, config.numerics.tol)?;
        let mut csv = Csv::new(hash, &["tau_s", "g2", "std_err", "g2_regression"]);
        for k in 0..h.lags.len() {
            let avg = reg[k * PER_BIN..(k + 1) * PER_BIN].iter().sum::<f64>() / PER_BIN as f64;
            csv.row(&[
                Cell::F(h.lags[k]),
                Cell::F(h.g2[k]),
                Cell::F(h.std_err[k]),
                Cell::F(avg),
            ]);
        }
        files.push(csv.finish(format!("g2_histogram_{tag}.csv")));
        out["histogram"] = json!({
            "n_events": h.n_events,
            "rate_per_s": h.rate,
            "g2_first_bin": h.g2[0],
            "std_err_first_bin": h.std_err[0],
            "g2_regression_first_bin": reg[..PER_BIN].iter().sum::<f64>() / PER_BIN as f64,
        });
    }
    Ok(out)
}

fn trajectory_validation(
    config: &RunConfig,
    src: &ThetaSource,
    tag: &str,
    hash: &str,
    files: &mut Vec<Artifact>,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let p = &config.cavity;
    let theta = theta_at(src, p)?;
    let tc = trajectory_config(
        config,
        theta,
        config.trajectory.record_emissions || config.trajectory.event_dump,
    )?;
    let records = run_ensemble(&tc)?;
    warnings.extend(overlap_warning(p, &records));
    let stats = ensemble_statistics(&records)?;
    let atom = atom_density_matrix(&tc.spec);
    let gen = build_generator(p, &atom, tc.dim)?;
    let master = dynamics::evolve(&gen, &FieldState::vacuum(tc.dim)?, &stats.times, config.numerics.tol)?;
    let analytic = steady_state_analytic(p, &atom)?;

    let mut csv = Csv::new(hash, &["t_s", "n_mean", "n_std_err", "n_master"]);
    for k in 0..stats.times.len() {
        csv.row(&[
            Cell::F(stats.times[k]),
            Cell::F(stats.mean[k]),
            Cell::F(stats.std_err[k]),
            Cell::F(master[k].mean_photon_number()),
        ]);
    }
    files.push(csv.finish(format!("trajectory_{tag}.csv")));
    if config.trajectory.event_dump {
        let mut buf = format!("# config_sha256={hash}\n").into_bytes();
        write_events_csv(&mut buf, &records).map_err(|e| CliError::Io(e.to_string()))?;
        files.push(Artifact {
            name: format!("events_{tag}.csv"),
            contents: String::from_utf8(buf).expect("csv is utf-8"),
        });
    }
    let last = stats.mean.len() - 1;
    let target = analytic.mean_photon_number();
    Ok(json!({
        "label": tag,
        "theta": theta,
        "n_final_mean": stats.mean[last],
        "n_final_std_err": stats.std_err[last],
        "n_steady_analytic": target,
        "z_score": (stats.mean[last] - target) / stats.std_err[last],
        "n_jumps_total": records.iter().map(|r| r.n_jumps).sum::<usize>(),
        "n_atoms_total": records.iter().map(|r| r.atom_arrival_times.len()).sum::<usize>(),
    }))
}

/// Writes the summary and files into `dir` in a fixed order.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for f in &out.files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&out.summary).expect("summary serialises");
    fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Reads, validates and runs a configuration file; returns the output directory.
pub fn run_file(path: &Path, out_dir: Option<PathBuf>, seed: Option<u64>) -> Result<PathBuf, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut config = parse_config(&text).map_err(CliError::Config)?;
    if let Some(dir) = out_dir {
        config.output_dir = dir;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let hash = config_hash(&text);
    let out = execute(&config, &hash)?;
    write_outputs(&config.output_dir, &out)?;
    Ok(config.output_dir)
}
