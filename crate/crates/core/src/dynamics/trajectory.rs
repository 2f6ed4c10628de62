use alloc::vec::Vec;

use super::{DynamicsError, LindbladGenerator, Method, Propagator, Scratch};
use crate::linalg::{herm_eigvals, partial_trace, ComplexMatrix, SubsystemLayout};
use crate::model::DensityMatrix;
use crate::Warning;

/// Trace drift and Hermiticity error repaired by hygiene; anything larger
/// aborts the run.
pub const REPAIR_TOL: f64 = 1e-9;
/// Most negative eigenvalue tolerated at a checkpoint.
pub const MIN_EIGENVALUE_TOL: f64 = -1e-7;
/// RK4 step heuristic: warn when `‖L‖ · dt` exceeds this.
pub const RK4_STEP_LIMIT: f64 = 0.1;

/// What to keep from each state on the grid.
#[derive(Clone, Debug)]
pub struct RecordSpec {
    /// Hermitian observables; real parts of `Tr[O ρ]` are stored.
    pub observables: Vec<ComplexMatrix>,
    /// Reduced state on `sites` of `layout`, per grid point.
    pub marginal: Option<(SubsystemLayout, Vec<usize>)>,
    pub retain_states: bool,
    /// Full eigenvalue check every this many steps (and at the last step).
    pub check_stride: usize,
}

impl Default for RecordSpec {
    fn default() -> Self {
        Self {
            observables: Vec::new(),
            marginal: None,
            retain_states: false,
            check_stride: 100,
        }
    }
}

impl RecordSpec {
    pub fn marginal(layout: SubsystemLayout, sites: Vec<usize>) -> Self {
        Self {
            marginal: Some((layout, sites)),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PropagateOptions {
    pub record: RecordSpec,
    pub method: Method,
}

/// Worst values seen by the state checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub eigen_checks: usize,
}

impl Default for CptpReport {
    fn default() -> Self {
        Self {
            max_trace_drift: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            eigen_checks: 0,
        }
    }
}

impl CptpReport {
    pub fn within_tolerance(&self) -> bool {
        self.max_trace_drift <= REPAIR_TOL && self.max_hermiticity_error <= REPAIR_TOL && self.min_eigenvalue >= MIN_EIGENVALUE_TOL
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub step: f64,
    /// `expectations[k][n] = Re Tr[O_k ρ(t_n)]`.
    pub expectations: Vec<Vec<f64>>,
    pub marginals: Vec<ComplexMatrix>,
    pub states: Option<Vec<ComplexMatrix>>,
    pub cptp: CptpReport,
    pub warnings: Vec<Warning>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Number of steps `n` with `n · dt = t_end` up to rounding.
pub fn grid_steps(t_end: f64, dt: f64) -> Result<usize, DynamicsError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(DynamicsError::InvalidGrid { t_end, dt });
    }
    let n = libm::round(t_end / dt);
    if (n * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(DynamicsError::InvalidGrid { t_end, dt });
    }
    Ok(n as usize)
}

struct Recorder<'a> {
    spec: &'a RecordSpec,
    traj: Trajectory,
    n_steps: usize,
}

impl<'a> Recorder<'a> {
    fn new(spec: &'a RecordSpec, n_steps: usize, dt: f64) -> Self {
        let cap = n_steps + 1;
        Self {
            spec,
            traj: Trajectory {
                times: Vec::with_capacity(cap),
                step: dt,
                expectations: spec.observables.iter().map(|_| Vec::with_capacity(cap)).collect(),
                marginals: Vec::with_capacity(if spec.marginal.is_some() { cap } else { 0 }),
                states: spec.retain_states.then(|| Vec::with_capacity(cap)),
                cptp: CptpReport::default(),
                warnings: Vec::new(),
            },
            n_steps,
        }
    }

    /// Checks and records `rho` at grid index `n`.
    fn record(&mut self, n: usize, rho: &ComplexMatrix) -> Result<(), DynamicsError> {
        let t = n as f64 * self.traj.step;
        let drift = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
        let herm = rho.hermiticity_error();
        let cptp = &mut self.traj.cptp;
        cptp.max_trace_drift = cptp.max_trace_drift.max(drift);
        cptp.max_hermiticity_error = cptp.max_hermiticity_error.max(herm);
        if drift > REPAIR_TOL {
            return Err(DynamicsError::InvariantBreach {
                step: n,
                t,
                check: "trace",
                value: drift,
            });
        }
        if herm > REPAIR_TOL {
            return Err(DynamicsError::InvariantBreach {
                step: n,
                t,
                check: "hermiticity",
                value: herm,
            });
        }
        let stride = self.spec.check_stride.max(1);
        if n.is_multiple_of(stride) || n == self.n_steps {
            let min = herm_eigvals(&rho.hermitian_part())?.first().copied().unwrap_or(0.0);
            cptp.min_eigenvalue = cptp.min_eigenvalue.min(min);
            cptp.eigen_checks += 1;
            if min < MIN_EIGENVALUE_TOL {
                return Err(DynamicsError::InvariantBreach {
                    step: n,
                    t,
                    check: "positivity",
                    value: min,
                });
            }
        }
        self.traj.times.push(t);
        for (o, series) in self.spec.observables.iter().zip(&mut self.traj.expectations) {
            series.push(expectation(o, rho));
        }
        if let Some((layout, sites)) = &self.spec.marginal {
            self.traj.marginals.push(partial_trace(rho, sites, layout)?);
        }
        if let Some(states) = &mut self.traj.states {
            states.push(rho.clone());
        }
        Ok(())
    }
}

/// `Re Tr[O ρ]`.
pub fn expectation(o: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    let n = o.rows();
    let mut acc = 0.0;
    for c in 0..n {
        for r in 0..n {
            let p = o[(r, c)] * rho[(c, r)];
            acc += p.re;
        }
    }
    acc
}

/// Hermitize in place and renormalize the trace if its drift is repairable.
/// Returns the pre-repair `(trace drift, Hermiticity error)`.
pub(crate) fn hygiene(rho: &mut ComplexMatrix) -> (f64, f64) {
    let herm = rho.hermiticity_error();
    let n = rho.rows();
    for c in 0..n {
        for r in 0..=c {
            let v = (rho[(r, c)] + rho[(c, r)].conj()) * 0.5;
            rho[(r, c)] = v;
            rho[(c, r)] = v.conj();
        }
    }
    let tr = rho.trace().re;
    let drift = (tr - 1.0).abs();
    if drift <= REPAIR_TOL && tr > 0.0 {
        let s = 1.0 / tr;
        rho.as_mut_slice().iter_mut().for_each(|v| *v *= s);
    }
    (drift, herm)
}

fn check_start(gen: &LindbladGenerator, rho0: &DensityMatrix) -> Result<(), DynamicsError> {
    if rho0.dim() != gen.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: gen.dim(),
            found: rho0.dim(),
        });
    }
    Ok(())
}

/// States at `t = 0, dt, …, t_end` by repeated application of the one-step
/// propagator, with hygiene after every step.
pub fn propagate(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    opts: &PropagateOptions,
) -> Result<Trajectory, DynamicsError> {
    check_start(gen, rho0)?;
    let n_steps = grid_steps(t_end, dt)?;
    let prop = Propagator::for_state(gen, dt, opts.method, rho0.as_matrix())?;
    propagate_with(&prop, rho0, n_steps, &opts.record)
}

/// Same as [`propagate`] with a prebuilt propagator, for `n_steps` steps.
pub fn propagate_with(prop: &Propagator, rho0: &DensityMatrix, n_steps: usize, record: &RecordSpec) -> Result<Trajectory, DynamicsError> {
    if rho0.dim() != prop.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: prop.dim(),
            found: rho0.dim(),
        });
    }
    let mut rec = Recorder::new(record, n_steps, prop.dt());
    let mut rho = rho0.as_matrix().clone();
    let mut next = ComplexMatrix::zeros(prop.dim(), prop.dim());
    let mut scratch = Scratch::default();
    rec.record(0, &rho)?;
    for n in 1..=n_steps {
        prop.step_into(&rho, &mut next, &mut scratch);
        core::mem::swap(&mut rho, &mut next);
        let (drift, herm) = hygiene(&mut rho);
        let cptp = &mut rec.traj.cptp;
        cptp.max_hermiticity_error = cptp.max_hermiticity_error.max(herm);
        if herm > REPAIR_TOL {
            return Err(DynamicsError::InvariantBreach {
                step: n,
                t: n as f64 * prop.dt(),
                check: "hermiticity",
                value: herm,
            });
        }
        if drift > REPAIR_TOL {
            return Err(DynamicsError::InvariantBreach {
                step: n,
                t: n as f64 * prop.dt(),
                check: "trace",
                value: drift,
            });
        }
        rec.record(n, &rho)?;
    }
    Ok(rec.traj)
}

/// Classic fixed-step RK4 on the operator form of the master equation. No
/// hygiene is applied, so drift shows up in the report.
pub fn rk4_reference(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    record: &RecordSpec,
) -> Result<Trajectory, DynamicsError> {
    check_start(gen, rho0)?;
    let n_steps = grid_steps(t_end, dt)?;
    let mut rec = Recorder::new(record, n_steps, dt);
    let norm_dt = gen.norm_bound() * dt;
    if norm_dt > RK4_STEP_LIMIT {
        rec.traj.warnings.push(Warning::LargeStep { norm_times_dt: norm_dt });
    }
    let mut rho = rho0.as_matrix().clone();
    rec.record(0, &rho)?;
    for n in 1..=n_steps {
        let k1 = gen.apply(&rho);
        let mut tmp = rho.clone();
        tmp.axpy((dt / 2.0).into(), &k1);
        let k2 = gen.apply(&tmp);
        tmp = rho.clone();
        tmp.axpy((dt / 2.0).into(), &k2);
        let k3 = gen.apply(&tmp);
        tmp = rho.clone();
        tmp.axpy(dt.into(), &k3);
        let k4 = gen.apply(&tmp);
        rho.axpy((dt / 6.0).into(), &k1);
        rho.axpy((dt / 3.0).into(), &k2);
        rho.axpy((dt / 3.0).into(), &k3);
        rho.axpy((dt / 6.0).into(), &k4);
        rec.record(n, &rho)?;
    }
    Ok(rec.traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{sigma_minus, sigma_x, sigma_z};
    use crate::linalg::test_support::{random_density, random_hermitian};
    use crate::linalg::{c64, embed, SubsystemLayout};
    use alloc::vec;
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn excited() -> DensityMatrix {
        DensityMatrix::pure(&[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap()
    }

    fn plus() -> DensityMatrix {
        let s = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        DensityMatrix::pure(&[s, s]).unwrap()
    }

    fn keep_states() -> RecordSpec {
        RecordSpec {
            retain_states: true,
            ..RecordSpec::default()
        }
    }

    #[test]
    fn amplitude_damping_both_integrators() {
        let gamma = 0.7;
        let gen = LindbladGenerator::new(ComplexMatrix::zeros(2, 2), vec![(gamma, sigma_minus())]).unwrap();
        let dt = 1e-3 / gamma;
        let t_end = 10.0 / gamma;
        let opts = PropagateOptions {
            record: keep_states(),
            ..Default::default()
        };
        let a = propagate(&gen, &excited(), t_end, dt, &opts).unwrap();
        let b = rk4_reference(&gen, &excited(), t_end, dt, &keep_states()).unwrap();
        assert!(b.warnings.is_empty());
        for traj in [&a, &b] {
            let err = traj
                .times
                .iter()
                .zip(traj.states.as_ref().unwrap())
                .map(|(t, s)| (s[(0, 0)].re - libm::exp(-gamma * t)).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "{err}");
        }
    }

    #[test]
    fn pure_dephasing_coherence() {
        let gz = 0.25;
        let gen = LindbladGenerator::new(ComplexMatrix::zeros(2, 2), vec![(gz, sigma_z())]).unwrap();
        let traj = propagate(&gen, &plus(), 8.0, 0.01, &PropagateOptions { record: keep_states(), ..Default::default() }).unwrap();
        for (t, s) in traj.times.iter().zip(traj.states.as_ref().unwrap()) {
            assert!((s[(0, 1)].re - 0.5 * libm::exp(-2.0 * gz * t)).abs() < 1e-8);
        }
    }

    #[test]
    fn larmor_precession() {
        let omega = 1.0;
        let gen = LindbladGenerator::new(sigma_z().scale_real(omega / 2.0), vec![]).unwrap();
        let record = RecordSpec {
            observables: vec![sigma_x()],
            ..RecordSpec::default()
        };
        let traj = propagate(&gen, &plus(), 20.0 * PI, 0.05 * PI, &PropagateOptions { record, ..Default::default() }).unwrap();
        for (t, sx) in traj.times.iter().zip(&traj.expectations[0]) {
            assert!((sx - libm::cos(omega * t)).abs() < 1e-8);
        }
    }

    #[test]
    fn unitary_limit_keeps_purity_and_mixedness() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = random_hermitian(&mut rng, 4);
        let gen = LindbladGenerator::new(h, vec![]).unwrap();
        let v = [c64(0.5, 0.0), c64(0.0, 0.5), c64(-0.5, 0.0), c64(0.5, 0.0)];
        let pure = DensityMatrix::pure(&v).unwrap();
        let opts = PropagateOptions {
            record: keep_states(),
            ..Default::default()
        };
        let traj = propagate(&gen, &pure, 10.0, 0.1, &opts).unwrap();
        for s in traj.states.as_ref().unwrap() {
            assert!((s.matmul(s).trace().re - 1.0).abs() < 1e-8);
        }
        let mixed = DensityMatrix::maximally_mixed(4);
        let traj = propagate(&gen, &mixed, 10.0, 0.1, &opts).unwrap();
        for s in traj.states.as_ref().unwrap() {
            assert!(s.approx_eq(mixed.as_matrix(), 1e-12));
        }
    }

    #[test]
    fn semigroup_split_run() {
        let layout = SubsystemLayout::qubits(2);
        let h = &embed(&sigma_z(), 0, &layout).unwrap() + &embed(&sigma_z(), 0, &layout).unwrap().matmul(&embed(&sigma_x(), 1, &layout).unwrap()).scale_real(0.2);
        let gen = LindbladGenerator::new(h, vec![(0.1, embed(&sigma_minus(), 1, &layout).unwrap())]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let rho0 = DensityMatrix::new(random_density(&mut rng, 4)).unwrap();
        let opts = PropagateOptions {
            record: keep_states(),
            ..Default::default()
        };
        let whole = propagate(&gen, &rho0, 5.0, 0.05, &opts).unwrap();
        let first = propagate(&gen, &rho0, 2.0, 0.05, &opts).unwrap();
        let mid = DensityMatrix::new(first.states.unwrap().pop().unwrap()).unwrap();
        let second = propagate(&gen, &mid, 3.0, 0.05, &opts).unwrap();
        let a = whole.states.unwrap().pop().unwrap();
        let b = second.states.unwrap().pop().unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let gamma = 1.0;
        let gen = LindbladGenerator::new(sigma_z().scale_real(0.5), vec![(gamma, sigma_minus())]).unwrap();
        let err = |dt: f64| {
            let traj = rk4_reference(&gen, &excited(), 4.0, dt, &keep_states()).unwrap();
            (traj.states.unwrap().pop().unwrap()[(0, 0)].re - libm::exp(-4.0 * gamma)).abs()
        };
        let ratio = err(0.2) / err(0.1);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn rk4_warns_on_large_steps() {
        let gen = LindbladGenerator::new(sigma_z().scale_real(5.0), vec![]).unwrap();
        let traj = rk4_reference(&gen, &plus(), 1.0, 0.1, &RecordSpec::default()).unwrap();
        assert!(matches!(traj.warnings[..], [Warning::LargeStep { .. }]));
    }

    #[test]
    fn grid_must_divide_duration() {
        assert_eq!(grid_steps(1.0, 0.25).unwrap(), 4);
        assert_eq!(grid_steps(200.0, 0.05).unwrap(), 4000);
        assert!(matches!(grid_steps(1.0, 0.3), Err(DynamicsError::InvalidGrid { .. })));
        assert!(grid_steps(1.0, -0.1).is_err());
    }

    #[test]
    fn diverging_state_aborts() {
        // an invalid "density matrix" is refused at the door
        let bad = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(DensityMatrix::new(bad).is_err());
        // a generator that is fine but a checkpoint that is not
        let mut rec_spec = RecordSpec::default();
        rec_spec.check_stride = 1;
        let mut rec = Recorder::new(&rec_spec, 1, 0.1);
        let neg = ComplexMatrix::from_real_rows(&[&[1.0 + 1e-6, 0.0], &[0.0, -1e-6]]);
        assert!(matches!(
            rec.record(0, &neg),
            Err(DynamicsError::InvariantBreach { check: "positivity", .. })
        ));
    }
}
