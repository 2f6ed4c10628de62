//! Closed-form and brute-force checks of the numerics, run by the `oracle`
//! subcommand.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinboson_core::dynamics::{propagate, rk4_reference, LindbladGenerator, PropagateOptions, RecordSpec};
use spinboson_core::linalg::pauli::{sigma_minus, sigma_x, sigma_z};
use spinboson_core::linalg::{c64, expm, kron, ComplexMatrix};
use spinboson_core::model::{
    linear_cdf, log_uniform_cdf, sample_ensemble, BellState, DensityMatrix, Gate, ModelConfig, ProbeState,
    SystemOperators,
};
use spinboson_core::observables::{
    correlation_matrix, entanglement_lifetime, log_negativity, lower_bound_c2prime, p_of_t, power_spectrum,
    TimeSeries, Window,
};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    /// Largest deviation from the reference.
    pub error: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

fn check(name: &'static str, error: f64, tolerance: f64) -> OracleCheck {
    OracleCheck { name, error, tolerance }
}

fn keep_states() -> RecordSpec {
    RecordSpec {
        retain_states: true,
        ..RecordSpec::default()
    }
}

fn excited() -> DensityMatrix {
    DensityMatrix::pure(&[c64(1.0, 0.0), c64(0.0, 0.0)]).expect("pure state")
}

fn plus() -> DensityMatrix {
    let s = c64(FRAC_1_SQRT_2, 0.0);
    DensityMatrix::pure(&[s, s]).expect("pure state")
}

fn amplitude_damping() -> f64 {
    let gamma = 0.5;
    let gen = LindbladGenerator::new(ComplexMatrix::zeros(2, 2), vec![(gamma, sigma_minus())]).expect("generator");
    let (t_end, dt) = (10.0 / gamma, 0.01 / gamma);
    let opts = PropagateOptions {
        record: keep_states(),
        ..PropagateOptions::default()
    };
    let a = propagate(&gen, &excited(), t_end, dt, &opts).expect("propagate");
    let b = rk4_reference(&gen, &excited(), t_end, dt, &keep_states()).expect("rk4");
    [a, b]
        .iter()
        .flat_map(|tr| {
            tr.times
                .iter()
                .zip(tr.states.as_ref().expect("states"))
                .map(|(t, s)| (s[(0, 0)].re - (-gamma * t).exp()).abs())
        })
        .fold(0.0, f64::max)
}

fn pure_dephasing() -> f64 {
    let gz = 0.3;
    let gen = LindbladGenerator::new(ComplexMatrix::zeros(2, 2), vec![(gz, sigma_z())]).expect("generator");
    let opts = PropagateOptions {
        record: keep_states(),
        ..PropagateOptions::default()
    };
    let tr = propagate(&gen, &plus(), 10.0, 0.01, &opts).expect("propagate");
    tr.times
        .iter()
        .zip(tr.states.as_ref().expect("states"))
        .map(|(t, s)| (s[(0, 1)].re - 0.5 * (-2.0 * gz * t).exp()).abs())
        .fold(0.0, f64::max)
}

fn larmor() -> f64 {
    let gen = LindbladGenerator::new(sigma_z().scale_real(0.5), vec![]).expect("generator");
    let opts = PropagateOptions {
        record: RecordSpec {
            observables: vec![sigma_x()],
            ..RecordSpec::default()
        },
        ..PropagateOptions::default()
    };
    let tr = propagate(&gen, &plus(), 20.0 * PI, 0.01 * PI, &opts).expect("propagate");
    tr.times
        .iter()
        .zip(&tr.expectations[0])
        .map(|(t, v)| (v - t.cos()).abs())
        .fold(0.0, f64::max)
}

/// `E_P` at `g t = π/4` against 1, and the propagated state against
/// `exp(-i g t s_z s_z)|++⟩` (probe precession commutes with the gate).
fn ideal_zz_gate() -> (f64, f64) {
    let g = 0.1;
    let mut ops = SystemOperators::probe_only(1.0);
    ops.add_gate(Gate::Zz, g);
    let gen = LindbladGenerator::from_operators(&ops).expect("generator");
    let rho0 = DensityMatrix::new(ProbeState::PlusPlus.density()).expect("state");
    let t = PI / (4.0 * g);
    let opts = PropagateOptions {
        record: keep_states(),
        ..PropagateOptions::default()
    };
    let tr = propagate(&gen, &rho0, t, t / 100.0, &opts).expect("propagate");
    let rho = tr.states.expect("states").pop().expect("final state");
    let e = log_negativity(&rho).expect("negativity");
    let zz = kron(&sigma_z(), &sigma_z());
    let z1 = &kron(&sigma_z(), &ComplexMatrix::identity(2)) + &kron(&ComplexMatrix::identity(2), &sigma_z());
    let h = &zz.scale_real(g) + &z1.scale_real(0.5);
    let u = expm(&h.scale(c64(0.0, -t))).expect("expm");
    let exact = u.matmul(rho0.as_matrix()).matmul(&u.adjoint());
    ((e - 1.0).abs(), rho.max_abs_diff(&exact))
}

fn werner_half() -> f64 {
    let phi = ProbeState::Bell(BellState::PhiPlus).density();
    let w = &phi.scale_real(0.5) + &ComplexMatrix::identity(4).scale_real(0.125);
    (log_negativity(&w).expect("negativity") - (1.25f64).log2()).abs()
}

fn bell_bound() -> f64 {
    let lam = correlation_matrix(&ProbeState::Bell(BellState::PhiPlus).density()).expect("correlations");
    let diag = [1.0, -1.0, 1.0];
    let mut err: f64 = (lower_bound_c2prime(&lam) - 1.0).abs();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { diag[i] } else { 0.0 };
            err = err.max((lam[i][j] - want).abs());
        }
    }
    err
}

fn on_grid_cosine() -> f64 {
    let (n, ts, k0) = (4000usize, 0.05, 200usize);
    let w0 = 2.0 * PI * k0 as f64 / (n as f64 * ts);
    let values: Vec<f64> = (0..n).map(|j| (w0 * j as f64 * ts).cos()).collect();
    let s = power_spectrum(&TimeSeries { t0: 0.0, step: ts, values }, Window::Rectangular).expect("spectrum");
    let expect = ts / n as f64 * (n as f64 / 2.0).powi(2);
    let mut err = (s.power[k0] - expect).abs() / expect;
    // variance of a unit cosine over whole periods is 1/2
    err = err.max((s.integrated_power() - PI).abs());
    if s.argmax() != k0 {
        err = f64::INFINITY;
    }
    err
}

fn exponential_lifetime() -> f64 {
    let dt = 1e-3;
    let times: Vec<f64> = (0..3000).map(|n| n as f64 * dt).collect();
    let values: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
    let l = entanglement_lifetime(&times, &values, (-1.0f64).exp())
        .expect("lifetime")
        .expect("crossing");
    (l.t_eps - 1.0).abs()
}

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

/// KS distances of 10⁴ bias and local-field draws.
pub fn sampling_ks(seed: u64) -> (f64, f64) {
    let cfg = ModelConfig {
        seed,
        ..ModelConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut eps, mut delta) = (Vec::new(), Vec::new());
    while eps.len() < 10_000 {
        let e = sample_ensemble(&cfg, &mut rng).expect("sampling").ensemble;
        for t in e.tlfs {
            eps.push(t.eps);
            delta.push(t.delta);
        }
    }
    let (ea, eb) = cfg.eps_range();
    let (da, db) = cfg.delta_range();
    (
        ks_distance(eps, |x| linear_cdf(ea, eb, x)),
        ks_distance(delta, |x| log_uniform_cdf(da, db, x)),
    )
}

pub fn run_suite() -> Vec<OracleCheck> {
    let (gate_e, gate_state) = ideal_zz_gate();
    let (ks_eps, ks_delta) = sampling_ks(20_240);
    vec![
        check("amplitude damping, both integrators", amplitude_damping(), 1e-8),
        check("pure dephasing coherence", pure_dephasing(), 1e-8),
        check("Larmor precession", larmor(), 1e-8),
        check("ideal ZZ gate E_P at g t = pi/4", gate_e, 1e-6),
        check("ideal ZZ gate state vs closed form", gate_state, 1e-9),
        check("Werner state p = 1/2 negativity", werner_half(), 1e-12),
        check("phi+ correlations and bound", bell_bound(), 1e-12),
        check("on-grid cosine periodogram", on_grid_cosine(), 1e-9),
        check("exponential lifetime at eps = 1/e", exponential_lifetime(), 1e-3),
        check("p(2 ln 2) = 1/2", (p_of_t(2.0 * 2f64.ln(), 1.0, 0.0) - 0.5).abs(), 1e-15),
        check("bias draws KS distance", ks_eps, 0.02),
        check("local-field draws KS distance", ks_delta, 0.02),
    ]
}
