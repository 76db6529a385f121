//! Property tests for the module invariants.

use std::f64::consts::PI;

use photon_engine::dynamics::{build_generator, steady_state_analytic, steady_state_numeric};
use photon_engine::engine::{calibrate_for_schedule, run_cycle, CycleMode, CycleSchedule, ReservoirProgram};
use photon_engine::fock::{
    displaced_thermal_g2, displaced_thermal_state, ergotropy, photon_statistics, relative_entropy_of_coherence,
    thermal_state, von_neumann_entropy,
};
use photon_engine::reservoir::{
    atom_density_matrix, bose_occupation, bose_temperature, AtomEnsembleSpec, CavityAtomParams, PhaseMode,
    ReservoirDerived,
};
use photon_engine::{Error, C64};
use proptest::prelude::*;

const DIM: usize = 60;

fn phase_mode() -> impl Strategy<Value = PhaseMode> {
    prop_oneof![Just(PhaseMode::Coherent), Just(PhaseMode::Randomized)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn displaced_thermal_states_are_valid(r in 0.0..1.5f64, phi in 0.0..(2.0 * PI), n_th in 0.0..1.5f64) {
        let rho = displaced_thermal_state(C64::from_polar(r, phi), n_th, DIM).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-10));
        prop_assert!((rho.mean_photon_number() - r * r - n_th).abs() < 1e-8);
        if r * r + n_th > 1e-3 {
            let st = photon_statistics(&rho).unwrap();
            prop_assert!((st.g2_zero - displaced_thermal_g2(r * r, n_th).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn ergotropy_is_bounded_by_energy(r in 0.0..1.5f64, n_th in 0.0..1.5f64) {
        let rho = displaced_thermal_state(C64::new(r, 0.0), n_th, DIM).unwrap();
        let e = ergotropy(&rho, 1.0).unwrap();
        prop_assert!(e >= -1e-12);
        prop_assert!(e <= rho.mean_photon_number() + 1e-9);
        let th = thermal_state(n_th, DIM).unwrap();
        prop_assert!(ergotropy(&th, 1.0).unwrap().abs() < 1e-12);
        prop_assert!(relative_entropy_of_coherence(th.matrix()).unwrap().abs() < 1e-12);
        // displacement is unitary
        prop_assert!((von_neumann_entropy(&rho) - von_neumann_entropy(&th)).abs() < 1e-7);
    }

    #[test]
    fn bose_temperature_round_trips(n in 1e-4..10.0f64, omega in 1e14..3e15f64) {
        let t = bose_temperature(n, omega).unwrap();
        prop_assert!(t > 0.0);
        prop_assert!((bose_occupation(t, omega).unwrap() - n).abs() < 1e-10 * n.max(1.0));
    }

    #[test]
    fn reservoir_is_consistent(theta in 0.01..(PI - 0.01), g_tau in 0.01..0.2f64, kappa_tau in 0.02..0.2f64,
                               n_bar in 0.05..3.0f64, mode in phase_mode()) {
        let p = CavityAtomParams::with_products(g_tau, kappa_tau, n_bar);
        let spec = AtomEnsembleSpec::coherent(theta).unwrap().with_mode(mode).unwrap();
        let atom = atom_density_matrix(&spec);
        match ReservoirDerived::compute(&p, &atom) {
            Ok(d) => {
                prop_assert!(d.gamma_r > 0.0);
                prop_assert!(d.n_th >= 0.0);
                prop_assert!((d.rho_ee + d.rho_gg - 1.0).abs() < 1e-12);
                prop_assert!(d.rho_eg.norm_sqr() <= d.rho_ee * d.rho_gg + 1e-12);
                if mode == PhaseMode::Randomized {
                    prop_assert_eq!(d.lambda_drive, C64::new(0.0, 0.0));
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::GainExceedsLoss { .. }), "{e}"),
        }
    }

    #[test]
    fn numeric_steady_state_matches_closed_form(theta in 0.3..(PI - 0.05), g_tau in 0.01..0.2f64,
                                                kappa_tau in 0.02..0.2f64, n_bar in 0.05..2.0f64,
                                                mode in phase_mode()) {
        let p = CavityAtomParams::with_products(g_tau, kappa_tau, n_bar);
        let atom = atom_density_matrix(&AtomEnsembleSpec::coherent(theta).unwrap().with_mode(mode).unwrap());
        let Ok(ss) = steady_state_analytic(&p, &atom) else { return Ok(()) };
        prop_assume!(ss.mean_photon_number() <= 3.0);
        let gen = build_generator(&p, &atom, 60).unwrap();
        let numeric = steady_state_numeric(&gen).unwrap();
        prop_assert!(numeric.trace_distance(&ss.to_state(60).unwrap()).unwrap() < 1e-7);
        // Lindblad generator annihilates the steady state and preserves trace in general
        let d = gen.apply(numeric.matrix());
        prop_assert!(d.iter().all(|z| z.norm() < 1e-6 * gen.rate_down()));
    }

    #[test]
    fn cycle_ledger_closes(t_r in 5000.0..9000.0f64, n_bar in 0.3..1.0f64, thermal in any::<bool>()) {
        let p = CavityAtomParams::experimental().with_n_bar(n_bar);
        let s = CycleSchedule::standard().with_n_grid(16);
        let Ok(theta) = calibrate_for_schedule(&p, &s, t_r) else { return Ok(()) };
        let program = if thermal { ReservoirProgram::thermal_only() } else { ReservoirProgram::superradiant() };
        let l = match run_cycle(&p, &s, theta, &program, CycleMode::QuasiStatic) {
            Ok(l) => l,
            Err(Error::GainExceedsLoss { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let q = l.q_in.abs();
        prop_assert!(l.entropy_sum().abs() <= 1e-9 * l.strokes.iter().map(|x| x.entropy_change.abs()).fold(1e-300, f64::max));
        prop_assert!((l.strokes[2].heat + l.strokes[0].heat).abs() <= 1e-9 * q);
        prop_assert!((l.w_out - (l.q_in - l.q_out)).abs() <= 1e-9 * q);
        if thermal {
            prop_assert!(l.w_out.abs() <= 1e-9 * q);
        } else {
            prop_assert!(l.w_out > 0.0);
            prop_assert!((0.0..1.0).contains(&l.eta));
            prop_assert!((l.eta - (1.0 - l.n_th / l.n_sr)).abs() < 1e-9);
        }
    }
}
