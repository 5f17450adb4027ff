use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use pdml_core::bayes::regions::accumulate_costs;
use pdml_core::bayes::timeline::cumulative_traces;
use pdml_core::bayes::{
    confusion, design_regions, Axis, CostModel, DecisionRegionGrid, GridSpec, Provenance, Sample,
    Theta,
};
use pdml_core::cli::io::{parse_regions, read_dataset, write_dataset};
use pdml_core::cli::{DatasetMeta, RegionFile};
use pdml_core::corrsim::{
    autocorr, noiseless_taps, simulate_taps, NoiseCovariance, NoiseModel, ScenarioParams, TapGrid,
    TapVector,
};
use pdml_core::mle::{coarse_search, distortion, observation_vector, refine_bisect, MlConfig};
use pdml_core::monitors::{measure_power, sd_grid, symmetric_difference, PowerModel};
use pdml_core::{DetectorKind, Hypothesis, Measurement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn noise() -> NoiseModel {
    NoiseModel::from_cn0(45.0, 1.0, 0.02).unwrap()
}

fn odd_taps() -> impl Strategy<Value = usize> {
    (1usize..50).prop_map(|h| 2 * h + 1)
}

fn hypothesis() -> impl Strategy<Value = Hypothesis> {
    (0usize..4).prop_map(|i| Hypothesis::from_index(i).unwrap())
}

fn single_signal(grid: &TapGrid, tau: f64, amp: f64, phase: f64) -> TapVector {
    let a = Complex64::from_polar(amp, phase);
    TapVector::new(
        observation_vector(tau, grid).iter().map(|h| a * *h).collect(),
        noise().sigma_n_sq(),
    )
}

/// A noisy two-signal tap vector on an l = 11 grid.
fn noisy_taps(seed: u64, eta: f64, offset: f64, dtau: f64) -> (TapGrid, NoiseCovariance, TapVector) {
    let grid = TapGrid::new(11).unwrap();
    let cov = NoiseCovariance::new(&grid).unwrap();
    let mut p = ScenarioParams::nominal(noise());
    p.hypothesis = if eta > 0.0 { Hypothesis::H2 } else { Hypothesis::H0 };
    p.eta = eta;
    p.dtau_a = dtau;
    p.dtau_i = dtau + offset;
    let p = p.with_ideal_agc();
    let taps = simulate_taps(&p, &grid, &cov, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (grid, cov, taps)
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn sample(power_db: f64, log_d: f64, truth: Hypothesis, alpha: f64, epoch: u64) -> Sample {
    let alpha = if truth == Hypothesis::H1 { alpha } else { 0.0 };
    Sample {
        measurement: Measurement {
            power_db,
            distortion: 10f64.powf(log_d),
            epoch,
        },
        truth,
        theta: Theta {
            alpha,
            eta: alpha * alpha,
            cn0_dbhz: 45.0,
            ..Theta::default()
        },
    }
}

fn dataset() -> impl Strategy<Value = Vec<Sample>> {
    prop::collection::vec((-12.0..27.0f64, -2.0..7.0f64, hypothesis(), 0.01..0.8f64), 1..300).prop_map(
        |v| {
            v.into_iter()
                .enumerate()
                .map(|(k, (p, d, h, a))| sample(p, d, h, a, k as u64))
                .collect()
        },
    )
}

fn small_spec() -> GridSpec {
    GridSpec {
        power: Axis::new(-10.0, 25.0, 8).unwrap(),
        log_distortion: Axis::new(-1.0, 6.0, 8).unwrap(),
    }
}

fn provenance() -> Provenance {
    Provenance {
        config_hash: "abc".into(),
        seed: 3,
        detector: DetectorKind::Pdml,
        taps: 11,
        clamped: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn tap_grid_shape(l in odd_taps()) {
        let g = TapGrid::new(l).unwrap();
        let d = g.offsets();
        prop_assert_eq!(d.len(), l);
        prop_assert_eq!(d[(l + 1) / 2 - 1], 0.0);
        prop_assert_eq!(d[0], -1.0);
        prop_assert_eq!(d[l - 1], 1.0);
        for w in d.windows(2) {
            prop_assert!((w[1] - w[0] - g.spacing()).abs() < 1e-12);
        }
        prop_assert!(TapGrid::new(l + 1).is_err());
    }

    #[test]
    fn covariance_structure(l in odd_taps()) {
        let g = TapGrid::new(l).unwrap();
        let c = NoiseCovariance::new(&g).unwrap();
        let chol = c.chol();
        for a in 0..l {
            prop_assert_eq!(c.q(a, a), 1.0);
            for b in 0..l {
                prop_assert_eq!(c.q(a, b), c.q(b, a));
                if (a as f64 - b as f64).abs() * g.spacing() >= 1.0 - 1e-12 {
                    prop_assert_eq!(c.q(a, b), 0.0);
                }
                let llt: f64 = (0..l).map(|k| chol[a * l + k] * chol[b * l + k]).sum();
                prop_assert!((llt - c.q(a, b)).abs() < 1e-12);
                if b > a {
                    prop_assert_eq!(chol[a * l + b], 0.0);
                }
            }
        }
    }

    #[test]
    fn noiseless_clean_taps_are_exact(
        l in odd_taps(),
        dtau in -0.9..0.9f64,
        theta in -PI..PI,
        p_auth in 0.1..4.0f64,
    ) {
        let g = TapGrid::new(l).unwrap();
        let mut p = ScenarioParams::nominal(noise());
        p.p_auth = p_auth;
        p.dtau_a = dtau;
        p.dtheta_a = theta;
        let p = p.with_ideal_agc();
        let taps = noiseless_taps(&p, &g).unwrap();
        let rot = Complex64::from_polar(p.beta * p_auth.sqrt(), theta);
        for (v, d) in taps.values.iter().zip(g.offsets()) {
            prop_assert!((v - rot * autocorr(d - dtau)).norm() < 1e-14);
        }
        let peak = taps
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        prop_assert!((g.offsets()[peak] - dtau).abs() <= g.spacing() + 1e-12);
    }

    #[test]
    fn authentic_amplitude_is_linear(dtau in -0.5..0.5f64, theta in -PI..PI, a in 0.1..2.0f64) {
        let g = TapGrid::new(11).unwrap();
        let mut p = ScenarioParams::nominal(noise());
        p.dtau_a = dtau;
        p.dtheta_a = theta;
        p.beta = 1.0;
        p.p_auth = a * a;
        let one = noiseless_taps(&p, &g).unwrap();
        p.p_auth = 4.0 * a * a;
        let two = noiseless_taps(&p, &g).unwrap();
        for (x, y) in one.values.iter().zip(&two.values) {
            prop_assert!((2.0 * x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn equal_seeds_give_identical_taps(seed in any::<u64>(), h in hypothesis()) {
        let g = TapGrid::new(11).unwrap();
        let c = NoiseCovariance::new(&g).unwrap();
        let mut p = ScenarioParams::nominal(noise());
        p.hypothesis = h;
        match h {
            Hypothesis::H1 | Hypothesis::H2 => { p.eta = 0.5; p.dtau_i = 0.3; }
            Hypothesis::H3 => p.jnr = 50.0,
            Hypothesis::H0 => {}
        }
        let p = p.with_ideal_agc();
        let a = simulate_taps(&p, &g, &c, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = simulate_taps(&p, &g, &c, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phase_rotation_equivariance(
        seed in any::<u64>(),
        eta in 0.0..2.0f64,
        offset in 0.1..1.2f64,
        alpha in -PI..PI,
    ) {
        let (g, c, taps) = noisy_taps(seed, eta, offset, 0.1);
        let rot = Complex64::from_polar(1.0, alpha);
        let rotated = TapVector::new(taps.values.iter().map(|v| v * rot).collect(), taps.noise_var);
        let cfg = MlConfig::default();
        let (a, _) = distortion(&taps, &g, &c, &cfg).unwrap();
        let (b, _) = distortion(&rotated, &g, &c, &cfg).unwrap();
        prop_assert!((a.code_phase - b.code_phase).abs() < 1e-9);
        prop_assert!((a.amp - b.amp).abs() < 1e-9 * a.amp.max(1.0));
        prop_assert!((a.cost - b.cost).abs() < 1e-9 * a.cost.max(1.0));
        prop_assert!(wrap(b.phase - a.phase - alpha).abs() < 1e-9);
    }

    #[test]
    fn scale_equivariance(
        seed in any::<u64>(),
        eta in 0.0..2.0f64,
        offset in 0.1..1.2f64,
        k in 0.01..100.0f64,
    ) {
        let (g, c, taps) = noisy_taps(seed, eta, offset, -0.2);
        let scaled = TapVector::new(taps.values.iter().map(|v| v * k).collect(), taps.noise_var);
        let cfg = MlConfig::unnormalized();
        let (a, _) = distortion(&taps, &g, &c, &cfg).unwrap();
        let (b, _) = distortion(&scaled, &g, &c, &cfg).unwrap();
        prop_assert!((a.code_phase - b.code_phase).abs() < 1e-9);
        prop_assert!((b.amp - k * a.amp).abs() < 1e-9 * k * a.amp);
        prop_assert!((b.cost - k * k * a.cost).abs() < 1e-9 * k * k * a.cost);
    }

    #[test]
    fn ml_fit_absorbs_tracking_error(
        s in -0.4..0.4f64,
        amp in 0.05..3.0f64,
        phase in -PI..PI,
    ) {
        let g = TapGrid::new(11).unwrap();
        let c = NoiseCovariance::new(&g).unwrap();
        let taps = single_signal(&g, s, amp, phase);
        let (est, d) = distortion(&taps, &g, &c, &MlConfig::default()).unwrap();
        prop_assert!(d < 1e-8, "D = {}", d);
        prop_assert!((est.code_phase - s).abs() < 1e-4);
    }

    #[test]
    fn bisection_cost_never_increases(
        seed in any::<u64>(),
        eta in 0.0..2.0f64,
        offset in 0.1..1.2f64,
        k in 1u32..30,
    ) {
        let (g, c, taps) = noisy_taps(seed, eta, offset, 0.05);
        let bracket = coarse_search(&taps, &g, &c, &MlConfig::default()).unwrap();
        let run = |n: u32| {
            let cfg = MlConfig { max_iter: n, rel_tol: 1e-300, ..MlConfig::default() };
            refine_bisect(&taps, bracket, &c, &cfg).unwrap()
        };
        let (a, b) = (run(k), run(k + 1));
        prop_assert!(a.iterations <= k);
        prop_assert!(b.cost <= a.cost);
        prop_assert!(a.cost <= bracket[0].cost && a.cost <= bracket[1].cost);
        prop_assert!(a.code_phase.abs() <= 1.0);
    }

    #[test]
    fn sd_is_scale_invariant(
        re in prop::collection::vec(-2.0..2.0f64, 5),
        im in prop::collection::vec(-2.0..2.0f64, 5),
        mag in 0.01..100.0f64,
        rot in -PI..PI,
    ) {
        let g = sd_grid(0.5).unwrap();
        let values: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        prop_assume!(values[g.prompt_index()].norm() > 1e-3);
        let k = Complex64::from_polar(mag, rot);
        let a = symmetric_difference(&TapVector::new(values.clone(), 1.0), &g, 0.5).unwrap();
        let b = symmetric_difference(
            &TapVector::new(values.iter().map(|v| v * k).collect(), 1.0),
            &g,
            0.5,
        )
        .unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn sd_exaggerates_what_ml_absorbs(s in 0.001..0.4f64, neg in any::<bool>(), phase in -PI..PI) {
        let tau = if neg { -s } else { s };
        let sd = sd_grid(0.5).unwrap();
        let ml = TapGrid::new(11).unwrap();
        let cov = NoiseCovariance::new(&ml).unwrap();
        let v = symmetric_difference(&single_signal(&sd, tau, 1.0, phase), &sd, 0.5).unwrap();
        prop_assert!(v > 0.0);
        let centered = symmetric_difference(&single_signal(&sd, 0.0, 1.0, phase), &sd, 0.5).unwrap();
        prop_assert_eq!(centered, 0.0);
        let (_, d) = distortion(&single_signal(&ml, tau, 1.0, phase), &ml, &cov, &MlConfig::default()).unwrap();
        prop_assert!(d < 1e-8);
    }

    #[test]
    fn power_is_deterministic_and_monotone(
        eta in 0.0..10.0f64,
        d_eta in 0.001..5.0f64,
        jnr in 0.0..1000.0f64,
        d_jnr in 0.001..500.0f64,
        seed in any::<u64>(),
    ) {
        let model = PowerModel { sigma_p_db: 0.0, ..PowerModel::default() };
        let at = |eta: f64, jnr: f64| {
            let mut p = ScenarioParams::nominal(noise());
            p.hypothesis = Hypothesis::H2;
            p.eta = eta;
            p.jnr = jnr;
            measure_power(&p, &model, &mut ChaCha8Rng::seed_from_u64(seed))
        };
        let base = at(eta, jnr);
        let mut other = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut p = ScenarioParams::nominal(noise());
        p.hypothesis = Hypothesis::H2;
        p.eta = eta;
        p.jnr = jnr;
        prop_assert_eq!(base, measure_power(&p, &model, &mut other));
        prop_assert!(at(eta + d_eta, jnr) > base);
        prop_assert!(at(eta, jnr + d_jnr) > base);
    }

    #[test]
    fn regions_ignore_cost_scale(ds in dataset(), k in 0.01..100.0f64, e in -10i32..10) {
        let spec = small_spec();
        let cost = CostModel::default();
        let a = design_regions(&ds, &spec, &cost, provenance()).unwrap();
        let b = design_regions(&ds, &spec, &cost.scaled(k), provenance()).unwrap();
        let acc = accumulate_costs(&ds, &spec, &cost);
        let mut near_tie = false;
        for (cell, sums) in acc.sums.iter().enumerate() {
            if acc.counts[cell] == 0 {
                continue;
            }
            let mut s = *sums;
            s.sort_by(f64::total_cmp);
            if s[1] - s[0] <= 1e-9 * s[1].abs() {
                near_tie = true;
            } else {
                prop_assert_eq!(a.labels[cell], b.labels[cell]);
            }
        }
        if !near_tie {
            prop_assert_eq!(&a.labels, &b.labels);
        }
        let pow2 = design_regions(&ds, &spec, &cost.scaled(2f64.powi(e)), provenance()).unwrap();
        prop_assert_eq!(&a.labels, &pow2.labels);
    }

    #[test]
    fn confusion_columns_sum_to_one(ds in dataset(), labels in prop::collection::vec(hypothesis(), 64)) {
        let g = DecisionRegionGrid::new(small_spec(), labels, provenance()).unwrap();
        let m = confusion(&ds, &g).unwrap();
        prop_assert_eq!(m.total(), ds.len() as u64);
        for t in Hypothesis::ALL {
            if m.truth_count(t) == 0 {
                continue;
            }
            let s: f64 = Hypothesis::ALL.iter().map(|&d| m.frequency(d, t)).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_traces_are_monotone(decisions in prop::collection::vec(hypothesis(), 1..2000)) {
        let c = cumulative_traces(&decisions);
        prop_assert_eq!(c.len(), decisions.len());
        for w in c.windows(2) {
            for h in 0..4 {
                prop_assert!(w[1][h] >= w[0][h]);
            }
        }
        let last: f64 = c.last().unwrap().iter().sum();
        prop_assert!((last - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn classify_covers_the_plane(
        labels in prop::collection::vec(hypothesis(), 64),
        p in -1e3..1e3f64,
        d in 0.0..1e9f64,
    ) {
        let g = DecisionRegionGrid::new(small_spec(), labels.clone(), provenance()).unwrap();
        let m = Measurement { power_db: p, distortion: d, epoch: 0 };
        let (cell, _) = g.spec.cell_of(p, d);
        prop_assert_eq!(g.classify(&m), labels[cell]);
    }

    #[test]
    fn region_file_round_trip(labels in prop::collection::vec(hypothesis(), 64), created in any::<u32>()) {
        let g = DecisionRegionGrid::new(small_spec(), labels, provenance()).unwrap();
        let text = serde_json::to_string(&RegionFile::from_grid(&g, created as u64)).unwrap();
        let (back, t) = parse_regions(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(back, g);
        prop_assert_eq!(t, created as u64);
    }

    #[test]
    fn dataset_csv_round_trip(ds in dataset(), seed in any::<u64>()) {
        let meta = DatasetMeta { detector: DetectorKind::Sd, taps: 5, config_hash: "f00".into(), seed };
        let bytes = write_dataset(Vec::new(), &meta, &ds).unwrap();
        let (m, back) = read_dataset(bytes.as_slice(), Path::new("mem")).unwrap();
        prop_assert_eq!(m, meta);
        prop_assert_eq!(back, ds);
    }
}
