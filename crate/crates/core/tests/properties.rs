use lasernoise_core::langevin::LinearizedLaser;
use lasernoise_core::spectra::{aggregate_runs, periodogram, smooth, Spectrum};
use lasernoise_core::{
    event_table, simulate, solve_steady, EventKind, LaserParams, MicroState, Pumping, SchemeKind, SimConfig, Target,
};
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = SchemeKind> {
    prop_oneof![Just(SchemeKind::Lambda3), Just(SchemeKind::V3), Just(SchemeKind::Four4)]
}

fn pumping() -> impl Strategy<Value = Pumping> {
    prop_oneof![Just(Pumping::Incoherent), Just(Pumping::Coherent)]
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

prop_compose! {
    fn params()(
        scheme in scheme(),
        ell in pumping(),
        atoms in 2u64..2_000_000,
        pump in log_uniform(0.1, 1e4),
        p_u in log_uniform(1.0, 1e4),
        p_d in log_uniform(1.0, 1e4),
        gamma in prop_oneof![Just(0.0), log_uniform(1e-3, 1e2)],
        alpha in log_uniform(0.1, 20.0),
    ) -> LaserParams {
        LaserParams { scheme, atoms, pump, ell, p_u, p_d, gamma, alpha }
    }
}

prop_compose! {
    fn micro_state(atoms: u64)(cuts in proptest::collection::vec(0..=atoms, 3), m in 0u64..50) -> MicroState {
        let mut c = cuts.clone();
        c.sort_unstable();
        MicroState { n: [c[0], c[1] - c[0], c[2] - c[1], atoms - c[2]], m }
    }
}

/// Pins the occupancy of slots outside the scheme to zero by moving them to
/// the pump source.
fn restrict(mut s: MicroState, scheme: SchemeKind) -> MicroState {
    let src = scheme.pump_source();
    for j in 0..4 {
        if !scheme.levels().contains(&j) {
            s.n[src] += s.n[j];
            s.n[j] = 0;
        }
    }
    s
}

fn detection_spectrum(times: &[f64], duration: f64) -> Spectrum {
    periodogram(times, duration, 40).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn events_preserve_atoms_and_photons(p in params(), raw in micro_state(37)) {
        let p = LaserParams { atoms: 37, ..p };
        let s = restrict(raw, p.scheme);
        let table = event_table(&p).unwrap();
        let total: f64 = table.iter().map(|e| e.rate(&s)).sum();
        prop_assert!(total > 0.0);
        for e in &table {
            let w = e.rate(&s);
            prop_assert!(w >= 0.0);
            if e.kind == EventKind::PumpEmission && p.ell == Pumping::Incoherent {
                prop_assert_eq!(w, 0.0);
            }
            if w > 0.0 {
                let mut next = s;
                e.apply(&mut next);
                prop_assert_eq!(next.total_atoms(), 37);
                prop_assert_eq!(restrict(next, p.scheme), next);
            }
        }
    }

    #[test]
    fn steady_state_balances(p in params()) {
        let ss = solve_steady(&p).unwrap();
        let n = p.n_atoms();
        prop_assert!(ss.m >= 0.0);
        prop_assert!(ss.populations.iter().all(|&x| x >= -1e-9 * n));
        let total: f64 = ss.populations.iter().sum();
        prop_assert!((total - n).abs() <= 1e-9 * n);
        prop_assert!(ss.balance_residual() < 1e-10, "residual {}", ss.balance_residual());
    }

    #[test]
    fn photon_number_grows_with_pump(p in params(), factor in 1.0f64..10.0) {
        let low = solve_steady(&p).unwrap().m;
        let high = solve_steady(&LaserParams { pump: p.pump * factor, ..p }).unwrap().m;
        prop_assert!(high >= low * (1.0 - 1e-12), "{low} -> {high}");
    }

    #[test]
    fn lambda_is_four_level_without_upper_level(p in params()) {
        let lambda = LaserParams { scheme: SchemeKind::Lambda3, ell: Pumping::Incoherent, ..p };
        let four = LaserParams { scheme: SchemeKind::Four4, p_u: f64::INFINITY, ..lambda.clone() };
        let (a, b) = (solve_steady(&lambda).unwrap().m, solve_steady(&four).unwrap().m);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn spectrum_even_positive_and_conjugate(p in params(), x in -3.0f64..3.0) {
        let Ok(lin) = LinearizedLaser::new(&p) else { return Ok(()) };
        let omega = p.max_rate() * 10f64.powf(x);
        let plus = lin.coefficients(omega, Target::Photocurrent).unwrap();
        let minus = lin.coefficients(-omega, Target::Photocurrent).unwrap();
        for (a, b) in plus.c.iter().zip(minus.c.iter()) {
            prop_assert!((a - b.conj()).norm() <= 1e-9 * (1.0 + a.norm()));
        }
        let (sp, sm) = (lin.photocurrent_spectrum(omega).unwrap(), lin.photocurrent_spectrum(-omega).unwrap());
        prop_assert!(sp >= 0.0);
        prop_assert!((sp - sm).abs() <= 1e-9 * sp.max(1e-12));
        let zero = lin.coefficients(0.0, Target::Photocurrent).unwrap();
        prop_assert!(zero.c.iter().all(|c| c.im.abs() <= 1e-12 * (1.0 + c.re.abs())));
    }

    #[test]
    fn periodogram_ignores_time_shift(mut ts in proptest::collection::vec(0.0f64..50.0, 2..200), shift in 0.0f64..50.0) {
        ts.sort_by(f64::total_cmp);
        let a = detection_spectrum(&ts, 100.0);
        let shifted: Vec<f64> = ts.iter().map(|t| t + shift).collect();
        let b = detection_spectrum(&shifted, 100.0);
        for (x, y) in a.s.iter().zip(&b.s) {
            prop_assert!(*x >= 0.0);
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x));
        }
    }

    #[test]
    fn smoothing_commutes_with_averaging(
        runs in proptest::collection::vec(proptest::collection::vec(0.0f64..5.0, 30), 1..6),
        half in 0usize..6,
    ) {
        let omega: Vec<f64> = (1..=30).map(f64::from).collect();
        let specs: Vec<Spectrum> = runs
            .iter()
            .map(|s| Spectrum { omega: omega.clone(), s: s.clone(), ci_low: None, ci_high: None, n_runs: 1 })
            .collect();
        let smoothed: Vec<Spectrum> = specs.iter().map(|s| smooth(s, half)).collect();
        let a = aggregate_runs(&smoothed).unwrap();
        let b = smooth(&aggregate_runs(&specs).unwrap(), half);
        for (x, y) in a.s.iter().zip(&b.s) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        if let (Some(lo), Some(hi)) = (&a.ci_low, &a.ci_high) {
            for k in 0..a.len() {
                prop_assert!(lo[k] <= a.s[k] && a.s[k] <= hi[k]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trajectories_are_reproducible_and_well_formed(
        scheme in scheme(), ell in pumping(), seed in any::<u64>(), run in 0u64..1000,
    ) {
        let p = LaserParams { scheme, atoms: 30, pump: 20.0, ell, p_u: 40.0, p_d: 40.0, gamma: 0.5, alpha: 2.0 };
        let cfg = SimConfig::new(15.0, seed).with_run_index(run);
        let a = simulate(&p, &cfg).unwrap();
        prop_assert_eq!(&a, &simulate(&p, &cfg).unwrap());
        prop_assert_eq!(a.final_state.total_atoms(), 30);
        prop_assert!(a.detection_times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(a.detection_times.iter().all(|&t| t > a.burn_in && t <= a.duration));
        prop_assert!(a.m_second_moment_time_average >= a.m_time_average.powi(2) * (1.0 - 1e-12));
        prop_assert_eq!(a.event_counts.get(EventKind::PhotonAbsorption), a.detection_times.len() as u64);
    }
}
