//! Quantum-jump simulation of the cavity field pumped by a Poisson beam of
//! prepared atoms.
//!
//! Each trajectory carries a pure field state. Between events it evolves
//! under `−iκ a†a` (the no-jump part of the cavity loss) and emits
//! photodetection jumps `√(2κ)a`. Every atom interacts for its transit time
//! through one Jaynes–Cummings propagator applied at the midpoint of its
//! window, after which it is measured in the energy basis and discarded.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{CMatrix, C64, TRUNCATION_TOLERANCE};
use crate::reservoir::{injection_rate, AtomEnsembleSpec, CavityAtomParams, PhaseMode};

/// Fraction of overlapping transit windows above which the one-atom picture is flagged.
pub const OVERLAP_WARNING_FRACTION: f64 = 0.5;
/// `N̄·gτ` above which overlapping windows are flagged.
pub const OVERLAP_WARNING_COUPLING: f64 = 0.3;
/// Minimum expected uncorrelated coincidences per bin for [`g2_from_records`].
pub const MIN_EXPECTED_PAIRS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub params: CavityAtomParams,
    pub spec: AtomEnsembleSpec,
    /// Simulated time, s.
    pub t_final: f64,
    pub dim: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub record_emissions: bool,
    /// Points of the uniform `⟨a†a⟩` sampling grid on `[0, t_final]`.
    pub n_samples: usize,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.spec.validate()?;
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if self.n_trajectories == 0 {
            return Err(Error::Domain("n_trajectories must be >= 1".into()));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::Domain(format!(
                "t_final must be finite and >= 0, got {}",
                self.t_final
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::Domain("n_samples must be >= 2".into()));
        }
        Ok(())
    }

    /// The uniform sampling grid.
    pub fn sample_times(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|k| self.t_final * k as f64 / last).collect()
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionRecord {
    pub trajectory_index: usize,
    pub t_final: f64,
    /// Photodetection times; empty unless emissions were recorded.
    pub jump_times: Vec<f64>,
    pub n_jumps: usize,
    /// Arrivals whose interaction took place within `t_final`.
    pub atom_arrival_times: Vec<f64>,
    /// Energy-basis outcome of each atom after its transit (`true` = excited).
    pub atom_exit_excited: Vec<bool>,
    pub sampled_n: Vec<(f64, f64)>,
}

/// Poisson arrival times on `[0, t_final)` with rate `gamma_inj` (1/s).
pub fn sample_arrivals<R: Rng + ?Sized>(gamma_inj: f64, t_final: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if !(gamma_inj > 0.0) {
        return out;
    }
    let exp = Exp::new(gamma_inj).expect("positive rate");
    let mut t = exp.sample(rng);
    while t < t_final {
        out.push(t);
        t += exp.sample(rng);
    }
    out
}

/// Atom–field propagator over one transit, stored in compressed rows.
/// Joint basis index is `atom·dim + n` with `g = 0`, `e = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JcPropagator {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl JcPropagator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = 2 * self.dim;
        let mut m = CMatrix::zeros(n, n);
        for r in 0..n {
            for k in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.cols[k])] = self.values[k];
            }
        }
        m
    }

    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_start[r]..self.row_start[r + 1] {
                s += self.values[k] * x[self.cols[k]];
            }
            *o = s;
        }
    }
}

/// `exp{−iτ [Δ_ac σ_ee ⊗ 1 + g(σ₊ ⊗ a + σ₋ ⊗ a†)]}` in the cavity frame.
pub fn jc_propagator(g: f64, delta_ac: f64, tau: f64, dim: usize) -> Result<JcPropagator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let n = 2 * dim;
    let e = |k: usize| dim + k;
    let mut h = CMatrix::zeros(n, n);
    for k in 0..dim {
        h[(e(k), e(k))] = C64::new(delta_ac, 0.0);
    }
    // σ₊a: |g, k+1⟩ → √(k+1) |e, k⟩
    for k in 0..dim - 1 {
        let c = C64::new(g * ((k + 1) as f64).sqrt(), 0.0);
        h[(e(k), k + 1)] = c;
        h[(k + 1, e(k))] = c;
    }
    let u = (h * C64::new(0.0, -tau)).exp();
    let mut row_start = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    row_start.push(0);
    for r in 0..n {
        for c in 0..n {
            let v = u[(r, c)];
            if v != C64::new(0.0, 0.0) {
                cols.push(c);
                values.push(v);
            }
        }
        row_start.push(cols.len());
    }
    Ok(JcPropagator {
        dim,
        row_start,
        cols,
        values,
    })
}

fn trajectory_rng(seed: u64, trajectory_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory_index as u64);
    rng
}

/// Pure field state with lazily applied no-jump decay.
struct Field {
    amps: Vec<C64>,
    kappa: f64,
}

impl Field {
    fn survival(&self, dt: f64) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * (-2.0 * self.kappa * k as f64 * dt).exp())
            .sum()
    }

    fn mean_n_after(&self, dt: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, c) in self.amps.iter().enumerate() {
            let p = c.norm_sqr() * (-2.0 * self.kappa * k as f64 * dt).exp();
            num += k as f64 * p;
            den += p;
        }
        num / den
    }

    /// Advances by `dt` without a jump and renormalises; returns the survival probability.
    fn decay(&mut self, dt: f64) -> f64 {
        for (k, c) in self.amps.iter_mut().enumerate() {
            *c *= (-self.kappa * k as f64 * dt).exp();
        }
        self.normalise()
    }

    fn normalise(&mut self) -> f64 {
        let s: f64 = self.amps.iter().map(|c| c.norm_sqr()).sum();
        let inv = 1.0 / s.sqrt();
        for c in &mut self.amps {
            *c *= inv;
        }
        s
    }

    fn jump(&mut self) {
        let d = self.amps.len();
        for k in 0..d - 1 {
            self.amps[k] = self.amps[k + 1] * ((k + 1) as f64).sqrt();
        }
        self.amps[d - 1] = C64::new(0.0, 0.0);
        self.normalise();
    }

    fn top_population(&self) -> f64 {
        self.amps.last().map_or(0.0, |c| c.norm_sqr())
    }
}

/// Time within `(0, horizon]` at which the no-jump survival reaches `r`.
fn jump_delay(field: &Field, r: f64, horizon: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, horizon);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if field.survival(mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Simulates one trajectory from the vacuum.
pub fn run_trajectory(config: &TrajectoryConfig, trajectory_index: usize) -> Result<EmissionRecord> {
    config.validate()?;
    let p = &config.params;
    let dim = config.dim;
    let t_final = config.t_final;
    let mut rng = trajectory_rng(config.seed, trajectory_index);
    let mut arrivals = sample_arrivals(injection_rate(p), t_final, &mut rng);
    // atoms whose mid-transit point falls after t_final never interact
    arrivals.retain(|t| t + 0.5 * p.tau < t_final);
    let kicks: Vec<f64> = arrivals.iter().map(|t| t + 0.5 * p.tau).collect();
    let u = jc_propagator(p.g, p.delta_ac, p.tau, dim)?;
    let (s, c) = (config.spec.theta / 2.0).sin_cos();
    let samples = config.sample_times();

    let mut field = Field {
        amps: vec![C64::new(0.0, 0.0); dim],
        kappa: p.kappa,
    };
    field.amps[0] = C64::new(1.0, 0.0);
    let mut joint = vec![C64::new(0.0, 0.0); 2 * dim];
    let mut evolved = vec![C64::new(0.0, 0.0); 2 * dim];

    let mut jump_times = Vec::new();
    let mut n_jumps = 0usize;
    let mut exits = Vec::with_capacity(kicks.len());
    let mut sampled_n = Vec::with_capacity(samples.len());
    let mut threshold = 1.0 - rng.random::<f64>();
    let mut t = 0.0;
    let (mut next_kick, mut next_sample) = (0usize, 0usize);

    loop {
        while next_sample < samples.len() && samples[next_sample] <= t {
            sampled_n.push((samples[next_sample], field.mean_n_after(0.0)));
            next_sample += 1;
        }
        let t_kick = kicks.get(next_kick).copied().unwrap_or(f64::INFINITY);
        let t_sample = samples.get(next_sample).copied().unwrap_or(f64::INFINITY);
        let t_next = t_kick.min(t_sample);
        if !t_next.is_finite() {
            break;
        }
        let horizon = t_next - t;
        let survival = field.survival(horizon);
        if survival <= threshold {
            let dt = jump_delay(&field, threshold, horizon);
            field.decay(dt);
            field.jump();
            t += dt;
            n_jumps += 1;
            if config.record_emissions {
                jump_times.push(t);
            }
            threshold = 1.0 - rng.random::<f64>();
            continue;
        }
        field.decay(horizon);
        threshold /= survival;
        t = t_next;
        if t_kick <= t_sample {
            next_kick += 1;
            let phase = match config.spec.phase_mode {
                PhaseMode::Coherent => 0.0,
                PhaseMode::Randomized => 2.0 * PI * rng.random::<f64>(),
            };
            let ce = C64::from_polar(c, -phase);
            for k in 0..dim {
                joint[k] = field.amps[k] * s;
                joint[dim + k] = field.amps[k] * ce;
            }
            u.apply(&joint, &mut evolved);
            let p_e: f64 = evolved[dim..].iter().map(|z| z.norm_sqr()).sum();
            let excited = rng.random::<f64>() < p_e;
            let half = if excited { &evolved[dim..] } else { &evolved[..dim] };
            field.amps.copy_from_slice(half);
            field.normalise();
            exits.push(excited);
            let top = field.top_population();
            if top > TRUNCATION_TOLERANCE {
                return Err(Error::TruncationUnsafe {
                    population: top,
                    tolerance: TRUNCATION_TOLERANCE,
                });
            }
        }
    }

    Ok(EmissionRecord {
        trajectory_index,
        t_final,
        jump_times,
        n_jumps,
        atom_arrival_times: arrivals,
        atom_exit_excited: exits,
        sampled_n,
    })
}

/// Runs `n_trajectories` trajectories in parallel; results are ordered by index.
pub fn run_ensemble(config: &TrajectoryConfig) -> Result<Vec<EmissionRecord>> {
    config.validate()?;
    (0..config.n_trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(config, i))
        .collect()
}

/// Fraction of arrivals whose transit window overlaps the previous one.
pub fn overlap_fraction(arrivals: &[f64], tau: f64) -> f64 {
    if arrivals.len() < 2 {
        return 0.0;
    }
    let overlapping = arrivals.windows(2).filter(|w| w[1] - w[0] < tau).count();
    overlapping as f64 / (arrivals.len() - 1) as f64
}

/// Warning when atoms routinely share the cavity at non-negligible coupling.
pub fn overlap_warning(params: &CavityAtomParams, records: &[EmissionRecord]) -> Option<String> {
    let (mut overlaps, mut pairs) = (0.0, 0usize);
    for r in records {
        let n = r.atom_arrival_times.len();
        if n >= 2 {
            overlaps += overlap_fraction(&r.atom_arrival_times, params.tau) * (n - 1) as f64;
            pairs += n - 1;
        }
    }
    if pairs == 0 {
        return None;
    }
    let frac = overlaps / pairs as f64;
    let coupling = params.n_bar * params.g_tau();
    (frac > OVERLAP_WARNING_FRACTION && coupling > OVERLAP_WARNING_COUPLING).then(|| {
        format!(
            "{:.0}% of transit windows overlap at N_bar*g*tau = {coupling:.3}: sequential-atom model is stressed",
            100.0 * frac
        )
    })
}

/// Pointwise ensemble mean and standard error of `⟨a†a⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStatistics {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
}

pub fn ensemble_statistics(records: &[EmissionRecord]) -> Result<EnsembleStatistics> {
    if records.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "ensemble statistics need at least 2 records, got {}",
            records.len()
        )));
    }
    let grid: Vec<f64> = records[0].sampled_n.iter().map(|x| x.0).collect();
    if grid.is_empty() {
        return Err(Error::EmptyInput("records carry no samples".into()));
    }
    if records
        .iter()
        .any(|r| r.sampled_n.len() != grid.len() || r.sampled_n.iter().zip(&grid).any(|(a, t)| a.0 != *t))
    {
        return Err(Error::Domain("records are sampled on different grids".into()));
    }
    let m = records.len() as f64;
    let mut mean = Vec::with_capacity(grid.len());
    let mut std_err = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let mu = records.iter().map(|r| r.sampled_n[j].1).sum::<f64>() / m;
        let var = records.iter().map(|r| (r.sampled_n[j].1 - mu).powi(2)).sum::<f64>() / (m - 1.0);
        mean.push(mu);
        std_err.push((var / m).sqrt());
    }
    Ok(EnsembleStatistics {
        times: grid,
        mean,
        std_err,
    })
}

/// Binned intensity correlation from photodetection records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Histogram {
    /// Bin centres, s.
    pub lags: Vec<f64>,
    pub g2: Vec<f64>,
    /// Batch-means standard error (Poisson error when fewer than two batches).
    pub std_err: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_events: usize,
    /// Pooled detection rate, 1/s.
    pub rate: f64,
}

fn pair_counts(times: &[f64], bin_width: f64, n_bins: usize, counts: &mut [u64]) {
    let max_lag = bin_width * n_bins as f64;
    for (i, &ti) in times.iter().enumerate() {
        for &tj in &times[i + 1..] {
            let lag = tj - ti;
            if lag >= max_lag {
                break;
            }
            let k = (lag / bin_width) as usize;
            if k < n_bins {
                counts[k] += 1;
            }
        }
    }
}

/// Coincidence histogram of jump-time pairs, normalised by the pair count an
/// uncorrelated process at the pooled rate would give in each bin. Only jumps
/// after `t_start` (the stationary segment) are used.
pub fn g2_from_records(records: &[EmissionRecord], bin_width: f64, max_lag: f64, t_start: f64) -> Result<G2Histogram> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no emission records".into()));
    }
    if !(bin_width > 0.0) || !(max_lag >= bin_width) {
        return Err(Error::Domain(format!(
            "need 0 < bin_width <= max_lag, got {bin_width}, {max_lag}"
        )));
    }
    let t_end = records[0].t_final;
    if records.iter().any(|r| r.t_final != t_end) {
        return Err(Error::Domain("records have different durations".into()));
    }
    if records.iter().any(|r| r.n_jumps != r.jump_times.len()) {
        return Err(Error::Domain("records were produced without record_emissions".into()));
    }
    let window = t_end - t_start;
    if !(window > max_lag) {
        return Err(Error::Domain(format!(
            "stationary window {window:.3e} s must exceed max_lag {max_lag:.3e} s"
        )));
    }
    let n_bins = (max_lag / bin_width).round().max(1.0) as usize;
    let segments: Vec<&[f64]> = records
        .iter()
        .map(|r| {
            let start = r.jump_times.partition_point(|&t| t < t_start);
            &r.jump_times[start..]
        })
        .collect();
    let n_events: usize = segments.iter().map(|s| s.len()).sum();
    let n_rec = records.len() as f64;
    let rate = n_events as f64 / (n_rec * window);
    let expected = |k: usize, n: f64, r: f64| n * r * r * bin_width * (window - (k as f64 + 0.5) * bin_width);
    let last_expected = expected(n_bins - 1, n_rec, rate);
    if n_events < 2 || last_expected < MIN_EXPECTED_PAIRS {
        return Err(Error::TooFewEvents(format!(
            "{n_events} events give {last_expected:.1} expected coincidences per bin (need {MIN_EXPECTED_PAIRS})"
        )));
    }

    let per_record: Vec<Vec<u64>> = segments
        .par_iter()
        .map(|s| {
            let mut c = vec![0u64; n_bins];
            pair_counts(s, bin_width, n_bins, &mut c);
            c
        })
        .collect();
    let mut counts = vec![0u64; n_bins];
    for c in &per_record {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    let g2: Vec<f64> = (0..n_bins)
        .map(|k| counts[k] as f64 / expected(k, n_rec, rate))
        .collect();

    let n_batches = records.len().min(20);
    let std_err = if n_batches >= 2 {
        let mut batch_g2 = vec![Vec::with_capacity(n_batches); n_bins];
        for b in 0..n_batches {
            let members: Vec<usize> = (b..records.len()).step_by(n_batches).collect();
            let events: usize = members.iter().map(|&i| segments[i].len()).sum();
            let m = members.len() as f64;
            let r = events as f64 / (m * window);
            for k in 0..n_bins {
                let c: u64 = members.iter().map(|&i| per_record[i][k]).sum();
                let e = expected(k, m, r);
                batch_g2[k].push(if e > 0.0 { c as f64 / e } else { f64::NAN });
            }
        }
        batch_g2
            .iter()
            .map(|v| {
                let nb = v.len() as f64;
                let mu = v.iter().sum::<f64>() / nb;
                let var = v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (nb - 1.0);
                (var / nb).sqrt()
            })
            .collect()
    } else {
        (0..n_bins)
            .map(|k| (counts[k].max(1) as f64).sqrt() / expected(k, n_rec, rate))
            .collect()
    };

    Ok(G2Histogram {
        lags: (0..n_bins).map(|k| (k as f64 + 0.5) * bin_width).collect(),
        g2,
        std_err,
        counts,
        n_events,
        rate,
    })
}

/// Event dump with columns `trajectory_index,event_type,time_s`.
pub fn write_events_csv<W: Write>(out: &mut W, records: &[EmissionRecord]) -> std::io::Result<()> {
    writeln!(out, "trajectory_index,event_type,time_s")?;
    for r in records {
        let mut atoms = r.atom_arrival_times.iter().peekable();
        let mut jumps = r.jump_times.iter().peekable();
        loop {
            let (kind, t) = match (atoms.peek(), jumps.peek()) {
                (Some(&&a), Some(&&j)) if a <= j => ("atom", *atoms.next().unwrap()),
                (_, Some(_)) => ("jump", *jumps.next().unwrap()),
                (Some(_), None) => ("atom", *atoms.next().unwrap()),
                (None, None) => break,
            };
            writeln!(out, "{},{kind},{t:.11e}", r.trajectory_index)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::steady_state_analytic;
    use crate::reservoir::atom_density_matrix;

    fn config(mode: PhaseMode, n_bar: f64, n_traj: usize) -> TrajectoryConfig {
        let spec = AtomEnsembleSpec::coherent(PI / 2.0).unwrap().with_mode(mode).unwrap();
        TrajectoryConfig {
            params: CavityAtomParams::with_products(0.03, 0.05, n_bar),
            spec,
            t_final: 20e-6,
            dim: 20,
            n_trajectories: n_traj,
            seed: 7,
            record_emissions: true,
            n_samples: 21,
        }
    }

    #[test]
    fn arrivals_examples() {
        let mut rng = trajectory_rng(1, 0);
        assert!(sample_arrivals(0.0, 1.0, &mut rng).is_empty());
        let a = sample_arrivals(1e6, 1e-4, &mut trajectory_rng(3, 2));
        let b = sample_arrivals(1e6, 1e-4, &mut trajectory_rng(3, 2));
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1] > w[0]));

        // Poisson oracle: count mean and variance both equal γT
        let (rate, t) = (2e5, 1e-4);
        let counts: Vec<f64> = (0..1000)
            .map(|i| sample_arrivals(rate, t, &mut trajectory_rng(11, i)).len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / 1000.0;
        let sigma = (rate * t / 1000.0).sqrt();
        assert!((mean - rate * t).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn jc_examples() {
        let id = jc_propagator(0.0, 0.0, 1e-7, 6).unwrap().to_dense();
        assert!((id - CMatrix::identity(12, 12)).iter().all(|z| z.norm() < 1e-15));

        let (g, tau, dim) = (2e6, 1.3e-7, 8);
        let u = jc_propagator(g, 0.0, tau, dim).unwrap();
        let mut x = vec![C64::new(0.0, 0.0); 2 * dim];
        x[dim] = C64::new(1.0, 0.0);
        let mut y = x.clone();
        u.apply(&x, &mut y);
        assert!((y[dim].norm_sqr() - (g * tau).cos().powi(2)).abs() < 1e-12);

        let dense = jc_propagator(3e6, 1e6, 1e-7, 20).unwrap().to_dense();
        let err = &dense.adjoint() * &dense - CMatrix::identity(40, 40);
        assert!(err.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn no_atoms_no_jumps() {
        let cfg = config(PhaseMode::Coherent, 0.0, 1);
        let r = run_trajectory(&cfg, 0).unwrap();
        assert!(r.jump_times.is_empty() && r.atom_arrival_times.is_empty());
        assert!(r.sampled_n.iter().all(|&(_, n)| n == 0.0));
        assert_eq!(r.sampled_n.len(), 21);
    }

    #[test]
    fn deterministic_and_ordered() {
        let cfg = config(PhaseMode::Coherent, 2.1, 6);
        let a = run_ensemble(&cfg).unwrap();
        let b = run_ensemble(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(run_trajectory(&cfg, 4).unwrap(), a[4]);
        for r in &a {
            assert!(r.jump_times.windows(2).all(|w| w[1] > w[0]));
            assert!(r.atom_arrival_times.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(r.atom_exit_excited.len(), r.atom_arrival_times.len());
        }
    }

    #[test]
    fn coherent_exceeds_randomized_and_tracks_master_equation() {
        for (mode, n_traj) in [(PhaseMode::Coherent, 300), (PhaseMode::Randomized, 300)] {
            let cfg = config(mode, 2.1, n_traj);
            let stats = ensemble_statistics(&run_ensemble(&cfg).unwrap()).unwrap();
            let ss = steady_state_analytic(&cfg.params, &atom_density_matrix(&cfg.spec)).unwrap();
            let k = stats.mean.len() - 1;
            let z = (stats.mean[k] - ss.mean_photon_number()) / stats.std_err[k];
            assert!(z.abs() < 3.0, "{mode:?}: z = {z}");
        }
        let coh = ensemble_statistics(&run_ensemble(&config(PhaseMode::Coherent, 2.1, 50)).unwrap()).unwrap();
        let rnd = ensemble_statistics(&run_ensemble(&config(PhaseMode::Randomized, 2.1, 50)).unwrap()).unwrap();
        assert!(coh.mean.last() > rnd.mean.last());
    }

    fn synthetic(times: Vec<f64>, t_final: f64, idx: usize) -> EmissionRecord {
        EmissionRecord {
            trajectory_index: idx,
            t_final,
            n_jumps: times.len(),
            jump_times: times,
            atom_arrival_times: vec![],
            atom_exit_excited: vec![],
            sampled_n: vec![(0.0, 1.0), (t_final, 1.0)],
        }
    }

    #[test]
    fn statistics_examples() {
        let r = synthetic(vec![], 1.0, 0);
        let s = ensemble_statistics(&[r.clone(), r.clone()]).unwrap();
        assert!(s.std_err.iter().all(|&e| e == 0.0));
        assert!(matches!(ensemble_statistics(&[r]), Err(Error::EmptyInput(_))));
        assert!(matches!(ensemble_statistics(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn poisson_input_gives_flat_g2() {
        let t_final = 1.0;
        let records: Vec<_> = (0..40)
            .map(|i| synthetic(sample_arrivals(2e4, t_final, &mut trajectory_rng(5, i)), t_final, i))
            .collect();
        let h = g2_from_records(&records, 1e-4, 1e-3, 0.0).unwrap();
        for (g, e) in h.g2.iter().zip(&h.std_err) {
            assert!((g - 1.0).abs() < 4.0 * e, "{g} ± {e}");
        }
        assert!(matches!(
            g2_from_records(&records[..1], 1e-8, 1e-6, 0.0),
            Err(Error::TooFewEvents(_))
        ));
    }

    #[test]
    fn event_csv_is_time_ordered() {
        let mut r = synthetic(vec![0.5, 2.0], 3.0, 1);
        r.atom_arrival_times = vec![0.1, 1.0, 2.5];
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let kinds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(kinds, ["atom", "jump", "atom", "jump", "atom"]);
        assert!(text.contains("1,jump,5.00000000000e-1"));
    }
}
