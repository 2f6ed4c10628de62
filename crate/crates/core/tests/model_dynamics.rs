use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinboson_core::dynamics::*;
use spinboson_core::linalg::{kron, partial_trace, ComplexMatrix};
use spinboson_core::model::*;
use spinboson_core::observables::*;

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn draws(cfg: &ModelConfig, ensembles: usize) -> Vec<TlfEnsemble> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..ensembles).map(|_| sample_ensemble(cfg, &mut rng).unwrap().ensemble).collect()
}

#[test]
fn sampled_parameters_follow_their_distributions() {
    let cfg = ModelConfig {
        seed: 2024,
        gamma_plus_mode: GammaPlusMode::Sampled,
        ..ModelConfig::default()
    };
    let ens = draws(&cfg, 2500);
    let tlfs: Vec<&Tlf> = ens.iter().flat_map(|e| &e.tlfs).collect();
    assert_eq!(tlfs.len(), 10_000);

    let (ea, eb) = cfg.eps_range();
    let d = ks_distance(tlfs.iter().map(|t| t.eps).collect(), |x| linear_cdf(ea, eb, x));
    assert!(d < 0.02, "eps KS {d}");
    let (da, db) = cfg.delta_range();
    let d = ks_distance(tlfs.iter().map(|t| t.delta).collect(), |x| log_uniform_cdf(da, db, x));
    assert!(d < 0.02, "delta KS {d}");

    // the rate interval moves with Ω_min, so test the probability transform
    let mut u = [Vec::new(), Vec::new(), Vec::new()];
    for e in &ens {
        let (a, b) = (e.omega_min / 6.0, e.omega_min / 2.0);
        for t in &e.tlfs {
            for (k, g) in [t.gamma_z, t.gamma_minus, t.gamma_plus].into_iter().enumerate() {
                u[k].push(log_uniform_cdf(a, b, g));
            }
        }
    }
    for v in u {
        let d = ks_distance(v, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.02, "rate KS {d}");
    }
}

#[test]
fn dephasing_to_emission_ratio_is_cot_squared() {
    for (eps, delta) in [(1.0, 0.1), (0.4, 0.3), (0.2, 0.9)] {
        let t = Tlf::new(eps, delta, 0.05, 0.1, 0.0);
        let cot2 = (eps / delta) * (eps / delta);
        assert!((t.rate_z / t.rate_minus - cot2).abs() < 1e-12 * cot2);
    }
}

fn one_probe_two_tlfs() -> (SystemOperators, DensityMatrix) {
    let cfg = ModelConfig {
        n_tlf: 2,
        mu_over_nu: 1.0,
        seed: 11,
        ..ModelConfig::default()
    };
    let ens = sample_seeded(&cfg).unwrap().ensemble;
    let ops = build_single_probe_operators(&ens, &cfg).unwrap();
    let g = tlf_ground_state(&ens, &cfg).unwrap();
    let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    (ops, DensityMatrix::new(kron(&plus, &g)).unwrap())
}

#[test]
fn expm_and_rk4_agree_over_a_hundred_cycles() {
    let (ops, rho0) = one_probe_two_tlfs();
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let t_end = 100.0 * 2.0 * PI;
    let dt = 2.0 * PI / 400.0;
    let record = RecordSpec {
        retain_states: true,
        check_stride: 1000,
        ..RecordSpec::default()
    };
    let opts = PropagateOptions {
        record: record.clone(),
        method: Method::Dense,
    };
    let exact = propagate(&gen, &rho0, t_end, dt, &opts).unwrap();
    let rk = rk4_reference(&gen, &rho0, t_end, dt, &record).unwrap();
    assert!(rk.warnings.is_empty());
    let worst = exact
        .states
        .unwrap()
        .iter()
        .zip(rk.states.as_ref().unwrap())
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max distance {worst:e}");
}

#[test]
fn rk4_step_halving_on_the_model() {
    let (ops, rho0) = one_probe_two_tlfs();
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let t_end = 2.0 * PI;
    let exact = Propagator::new(&gen, t_end, Method::Dense).unwrap().step(rho0.as_matrix());
    let record = RecordSpec {
        retain_states: true,
        ..RecordSpec::default()
    };
    let err = |n: usize| {
        let tr = rk4_reference(&gen, &rho0, t_end, t_end / n as f64, &record).unwrap();
        tr.states.as_ref().unwrap().last().unwrap().max_abs_diff(&exact)
    };
    let ratio = err(50) / err(100);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

fn two_probe_run(cfg: &ModelConfig, probe: ProbeState, n: usize, dt: f64) -> Trajectory {
    let ens = sample_seeded(cfg).unwrap().ensemble;
    let ops = build_operators(&ens, cfg).unwrap();
    let g = tlf_ground_state(&ens, cfg).unwrap();
    let rho0 = initial_state(probe, &g, &ops.layout).unwrap();
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let prop = Propagator::for_state(&gen, dt, Method::Sectored, rho0.as_matrix()).unwrap();
    propagate_marginal(&prop, &rho0, n, &ops.layout, &[PROBE_A, PROBE_B], 50).unwrap()
}

#[test]
fn antiparallel_bell_states_are_stationary() {
    for bell in [BellState::PsiPlus, BellState::PsiMinus] {
        let cfg = ModelConfig {
            mu_over_nu: 1.0,
            seed: 3,
            ..ModelConfig::default()
        };
        let tr = two_probe_run(&cfg, ProbeState::Bell(bell), 400, 0.25);
        let et = entanglement_trace(&tr, false).unwrap();
        for e in &et.log_negativity {
            assert!((e - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn uncoupled_probes_factorize() {
    let cfg = ModelConfig {
        mu_over_nu: 1.0,
        seed: 5,
        ..ModelConfig::default()
    };
    let ens = sample_seeded(&cfg).unwrap().ensemble.decoupled();
    let ops = build_operators(&ens, &cfg).unwrap();
    let g = tlf_ground_state(&ens, &cfg).unwrap();
    let rho0 = initial_state(ProbeState::PlusPlus, &g, &ops.layout).unwrap();
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let opts = PropagateOptions {
        record: RecordSpec {
            retain_states: true,
            ..RecordSpec::default()
        },
        ..PropagateOptions::default()
    };
    let tr = propagate(&gen, &rho0, 20.0, 0.5, &opts).unwrap();
    let tlf_sites: Vec<usize> = (2..ops.layout.n_sites()).collect();
    let m = magnetization_operator(2);
    for (t, rho) in tr.times.iter().zip(tr.states.as_ref().unwrap()) {
        let p = partial_trace(rho, &[PROBE_A, PROBE_B], &ops.layout).unwrap();
        let e = partial_trace(rho, &tlf_sites, &ops.layout).unwrap();
        assert!(rho.max_abs_diff(&kron(&p, &e)) < 1e-12);
        assert!((expectation(&m, &p) - 2.0 * t.cos()).abs() < 1e-10);
    }
}

#[test]
fn sectored_and_dense_agree_on_the_model() {
    let cfg = ModelConfig {
        n_tlf: 2,
        mu_over_nu: 0.6,
        seed: 8,
        ..ModelConfig::default()
    };
    let ens = sample_seeded(&cfg).unwrap().ensemble;
    let ops = build_operators(&ens, &cfg).unwrap();
    let g = tlf_ground_state(&ens, &cfg).unwrap();
    let rho0 = initial_state(ProbeState::PlusPlus, &g, &ops.layout).unwrap();
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let dense = Propagator::new(&gen, 0.3, Method::Dense).unwrap();
    let sect = Propagator::new(&gen, 0.3, Method::Sectored).unwrap();
    assert_eq!(sect.sectors().len(), 4);
    let (mut a, mut b) = (rho0.as_matrix().clone(), rho0.as_matrix().clone());
    for _ in 0..50 {
        a = dense.step(&a);
        b = sect.step(&b);
    }
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn fast_marginals_match_full_steps_on_the_model() {
    let cfg = ModelConfig {
        mu_over_nu: 1.0,
        seed: 2,
        ..ModelConfig::default()
    };
    let ens = sample_seeded(&cfg).unwrap().ensemble;
    let ops = build_operators(&ens, &cfg).unwrap();
    let g = tlf_ground_state(&ens, &cfg).unwrap();
    let rho0 = initial_state(ProbeState::PlusPlus, &g, &ops.layout).unwrap();
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let prop = Propagator::for_state(&gen, 0.1, Method::Sectored, rho0.as_matrix()).unwrap();
    assert!(prop.n_distinct() < prop.n_blocks());
    let fast = propagate_marginal(&prop, &rho0, 300, &ops.layout, &[0, 1], 100).unwrap();
    let slow = propagate_with(&prop, &rho0, 300, &RecordSpec::marginal(ops.layout.clone(), vec![0, 1])).unwrap();
    for (a, b) in fast.marginals.iter().zip(&slow.marginals) {
        assert!(a.max_abs_diff(b) < 1e-11);
    }
    assert!(fast.cptp.within_tolerance());
}

#[test]
fn exchange_gate_with_unequal_sectors() {
    let cfg = ModelConfig {
        n_tlf: 1,
        seed: 4,
        ..ModelConfig::default()
    };
    let ens = sample_seeded(&cfg).unwrap().ensemble;
    let mut ops = build_operators(&ens, &cfg).unwrap();
    ops.add_gate(Gate::XxYy, ens.nu);
    let gen = LindbladGenerator::from_operators(&ops).unwrap();
    let sect = Propagator::new(&gen, 0.2, Method::Sectored).unwrap();
    let sizes: Vec<usize> = sect.sectors().iter().map(Vec::len).collect();
    assert!(sizes.iter().any(|&s| s != sizes[0]));
    let dense = Propagator::new(&gen, 0.2, Method::Dense).unwrap();
    let g = tlf_ground_state(&ens, &cfg).unwrap();
    let rho0 = initial_state(ProbeState::PlusPlus, &g, &ops.layout).unwrap();
    let (mut a, mut b) = (rho0.as_matrix().clone(), rho0.as_matrix().clone());
    for _ in 0..40 {
        a = dense.step(&a);
        b = sect.step(&b);
    }
    assert!(a.max_abs_diff(&b) < 1e-12);
}
