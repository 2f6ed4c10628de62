//! Executes a [`Plan`]: one propagation per [`Point`], per-run tables, a
//! scenario summary and the manifest.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use spinboson_core::dynamics::{propagate_marginal, CptpReport, LindbladGenerator, Method, Propagator, Trajectory};
use spinboson_core::model::{
    build_operators, initial_state, sample_seeded, tlf_ground_state, DensityMatrix, ProbeState, SystemOperators,
    TlfEnsemble, PROBE_A, PROBE_B,
};
use spinboson_core::observables::{
    entanglement_lifetime, entanglement_trace, find_peaks, linear_fit, magnetization_series, p_of_t, plateau,
    power_spectrum, EntanglementTrace, LinearFit, Peak, Plateau, Window, PEAK_PROMINENCE, PLATEAU_SLOPE,
    PLATEAU_TAIL,
};

use crate::error::{Error, Result};
use crate::output::{create_dir, write_bytes, write_table, Cell, FileEntry, Format, Header, Table};
use crate::record::{EnsembleRecord, RunRecord};
use crate::scenario::{Kind, Plan, Point, Variant, WindowName};

/// Full eigenvalue check interval, in steps.
pub const CHECK_STRIDE: usize = 100;
/// Allowed `|E_P(0) - 1|` for a Bell-state start.
pub const BELL_START_TOL: f64 = 1e-8;
pub const MANIFEST: &str = "manifest.toml";

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub format: Format,
    /// Run points one after another instead of on the worker pool.
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSummary {
    pub peaks: Vec<Peak>,
    pub delta_omega: f64,
    pub max_power: f64,
}

impl SpectrumSummary {
    /// Tallest detected peak.
    pub fn dominant(&self) -> Option<&Peak> {
        self.peaks.iter().max_by(|a, b| a.height.total_cmp(&b.height))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementSummary {
    pub initial: f64,
    pub max: f64,
    pub min: f64,
    /// First prominent local maximum `(t, E_P)`.
    pub first_max: Option<(f64, f64)>,
    pub mean_bound_gap: Option<f64>,
    pub max_bound_excess: Option<f64>,
    pub plateau: Option<Plateau>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRow {
    pub epsilon: f64,
    pub t_eps: Option<f64>,
    pub p_t_eps: Option<f64>,
    pub neg_log_eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecaySummary {
    pub rows: Vec<DecayRow>,
    /// `p(t_ε)` against `-ln ε` over the rows that crossed.
    pub fit: Option<LinearFit>,
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub point: Point,
    pub nu: f64,
    pub mu: f64,
    pub gate_strength: Option<f64>,
    pub cptp: CptpReport,
    pub elapsed: Duration,
    pub spectrum: Option<SpectrumSummary>,
    pub entanglement: Option<EntanglementSummary>,
    pub decay: Option<DecaySummary>,
    pub files: Vec<FileEntry>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub points: Vec<PointResult>,
    pub record: RunRecord,
}

impl RunOutcome {
    pub fn find(&self, f: impl Fn(&Point) -> bool) -> impl Iterator<Item = &PointResult> {
        self.points.iter().filter(move |r| f(&r.point))
    }
}

pub fn run(plan: &Plan, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let dir = create_dir(&opts.out_dir)?;
    let hash = plan.hash();
    let points = plan.points();
    log::info!("{} scenario {}: {} runs into {}", plan.kind, &hash[..12], points.len(), dir.display());

    let exec = |p: &Point| run_point(plan, &hash, p, &dir, opts.format);
    let results: Vec<PointResult> = if opts.deterministic {
        points.iter().map(exec).collect::<Result<_>>()?
    } else {
        points.par_iter().map(exec).collect::<Result<_>>()?
    };

    let mut files: Vec<FileEntry> = results.iter().flat_map(|r| r.files.iter().cloned()).collect();
    files.extend(write_summaries(plan, &hash, &results, &dir, opts.format)?);

    let mut ensembles = Vec::new();
    for &ratio in &plan.ratio_eps {
        for &tan in &plan.tan_theta_bar {
            for &seed in &plan.seeds {
                let cfg = plan.model.config(seed, ratio, tan, 0.0);
                let s = sample_seeded(&cfg).map_err(|e| Error::model("sampling", e))?;
                ensembles.push(EnsembleRecord::new(seed, ratio, tan, &s.ensemble, &s.warnings));
            }
        }
    }
    let record = RunRecord {
        scenario_hash: hash,
        kind: plan.kind.to_string(),
        seeds: plan.seeds.clone(),
        library_version: env!("CARGO_PKG_VERSION").to_owned(),
        deterministic: opts.deterministic,
        format: opts.format,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        scenario: toml::Table::try_from(plan).expect("plan serializes"),
        ensembles,
        files,
    };
    write_bytes(&dir.join(MANIFEST), record.to_toml().as_bytes())?;
    Ok(RunOutcome {
        dir,
        points: results,
        record,
    })
}

struct Setup {
    ops: SystemOperators,
    rho0: DensityMatrix,
    nu: f64,
    mu: f64,
    gate_strength: Option<f64>,
}

fn setup(plan: &Plan, p: &Point, context: &str) -> Result<Setup> {
    let cfg = plan.model.config(p.seed, p.ratio_eps, p.tan_theta_bar, p.mu_over_nu);
    let sampled = sample_seeded(&cfg).map_err(|e| Error::model(context, e))?;
    for w in &sampled.warnings {
        log::warn!("{context}: {w}");
    }
    let ens: TlfEnsemble = match p.variant {
        Variant::Control => sampled.ensemble.decoupled(),
        _ => sampled.ensemble,
    };
    let probe = match p.bell {
        Some(b) => ProbeState::Bell(b.state()),
        None => ProbeState::PlusPlus,
    };
    let gate_strength = plan.gate.as_ref().map(|g| g.strength.unwrap_or(ens.nu));
    let (mut ops, rho0) = if p.variant == Variant::Ideal {
        let ops = SystemOperators::probe_only(plan.model.omega_p);
        let rho0 = DensityMatrix::new(probe.density()).map_err(|e| Error::model(context, e))?;
        (ops, rho0)
    } else {
        let ops = build_operators(&ens, &cfg).map_err(|e| Error::model(context, e))?;
        let g = tlf_ground_state(&ens, &cfg).map_err(|e| Error::model(context, e))?;
        let rho0 = initial_state(probe, &g, &ops.layout).map_err(|e| Error::model(context, e))?;
        (ops, rho0)
    };
    if let (Some(gate), Some(g)) = (&plan.gate, gate_strength) {
        ops.add_gate(gate.kind.gate(), g);
    }
    let (nu, mu) = match p.variant {
        Variant::Ideal => (0.0, 0.0),
        _ => (ens.nu, ens.mu),
    };
    Ok(Setup {
        ops,
        rho0,
        nu,
        mu,
        gate_strength,
    })
}

fn evolve(plan: &Plan, s: &Setup, context: &str) -> Result<Trajectory> {
    let gen = LindbladGenerator::from_operators(&s.ops).map_err(|e| Error::dynamics(context, e))?;
    let prop = Propagator::for_state(&gen, plan.dt(), Method::Sectored, s.rho0.as_matrix())
        .map_err(|e| Error::dynamics(context, e))?;
    propagate_marginal(
        &prop,
        &s.rho0,
        plan.n_steps(),
        &s.ops.layout,
        &[PROBE_A, PROBE_B],
        CHECK_STRIDE,
    )
    .map_err(|e| Error::dynamics(context, e))
}

fn point_header(plan: &Plan, hash: &str, p: &Point, s: &Setup) -> Header {
    let mut h = Header::default();
    h.push("scenario_hash", hash);
    h.push("kind", plan.kind);
    h.push("seed", p.seed);
    h.push("ratio_eps", p.ratio_eps);
    h.push("tan_theta_bar", p.tan_theta_bar);
    h.push("variant", p.variant_label());
    h.push("mu_over_nu", p.mu_over_nu);
    h.push("nu", s.nu);
    h.push("mu", s.mu);
    h.push("omega_p", plan.model.omega_p);
    h.push("n_tlf", plan.model.n_tlf);
    h.push("nbar", plan.model.nbar);
    if let (Some(g), Some(strength)) = (&plan.gate, s.gate_strength) {
        h.push("gate", g.kind.label());
        h.push("gate_strength", strength);
    }
    if let Some(b) = p.bell {
        h.push("bell", b.label());
    }
    h.push("dt", plan.dt());
    h.push("time_unit", "1/omega_p");
    h.push("library_version", env!("CARGO_PKG_VERSION"));
    h
}

fn run_point(plan: &Plan, hash: &str, p: &Point, dir: &Path, format: Format) -> Result<PointResult> {
    let started = Instant::now();
    let tag = p.tag();
    let context = format!("{} run {tag}", plan.kind);
    let s = setup(plan, p, &context)?;
    let traj = evolve(plan, &s, &context)?;
    for w in &traj.warnings {
        log::warn!("{context}: {w}");
    }
    let header = point_header(plan, hash, p, &s);
    let mut result = PointResult {
        point: *p,
        nu: s.nu,
        mu: s.mu,
        gate_strength: s.gate_strength,
        cptp: traj.cptp,
        elapsed: Duration::ZERO,
        spectrum: None,
        entanglement: None,
        decay: None,
        files: Vec::new(),
    };
    if plan.kind == Kind::SpectrumSweep {
        let series = magnetization_series(&traj).map_err(|e| Error::observables(&context, e))?;
        let window = match plan.spectrum.window {
            WindowName::Rectangular => Window::Rectangular,
            WindowName::Hann => Window::Hann,
        };
        let spec = power_spectrum(&series, window).map_err(|e| Error::observables(&context, e))?;
        let d_omega = spec.delta_omega();
        let peaks = find_peaks(
            &spec.omegas,
            &spec.power,
            plan.spectrum.prominence,
            plan.spectrum.separation_bins * d_omega,
        );
        let mut t = Table::new(&["t", "value"]);
        for (n, v) in series.values.iter().enumerate() {
            t.push(vec![series.time(n).into(), (*v).into()]);
        }
        result.files.push(write_table(dir, &format!("series_{tag}"), &header, &t, format)?);
        let mut t = Table::new(&["omega", "power"]);
        for (w, pw) in spec.omegas.iter().zip(&spec.power) {
            t.push(vec![(*w).into(), (*pw).into()]);
        }
        result.files.push(write_table(dir, &format!("spectrum_{tag}"), &header, &t, format)?);
        result.spectrum = Some(SpectrumSummary {
            peaks,
            delta_omega: d_omega,
            max_power: spec.power.iter().copied().fold(0.0, f64::max),
        });
    } else {
        let et = entanglement_trace(&traj, plan.bound).map_err(|e| Error::observables(&context, e))?;
        for w in &et.warnings {
            log::warn!("{context}: {w}");
        }
        let mut t = Table::new(&["t", "E_P", "C2prime"]);
        for (n, (time, e)) in et.times.iter().zip(&et.log_negativity).enumerate() {
            let c = et.c2prime.as_ref().map(|c| c[n]);
            t.push(vec![(*time).into(), (*e).into(), c.into()]);
        }
        result
            .files
            .push(write_table(dir, &format!("entanglement_{tag}"), &header, &t, format)?);
        let summary = summarize_entanglement(plan, &et);
        if plan.kind == Kind::BellDecay {
            if (summary.initial - 1.0).abs() > BELL_START_TOL {
                return Err(Error::Numerical {
                    context,
                    message: format!("Bell start has E_P(0) = {} instead of 1", summary.initial),
                });
            }
            let decay = decay_table(plan, &et).map_err(|e| Error::observables(&context, e))?;
            let mut t = Table::new(&["epsilon", "t_eps", "p_t_eps", "neg_log_eps"]);
            for r in &decay.rows {
                t.push(vec![r.epsilon.into(), r.t_eps.into(), r.p_t_eps.into(), r.neg_log_eps.into()]);
            }
            result.files.push(write_table(dir, &format!("decay_{tag}"), &header, &t, format)?);
            result.decay = Some(decay);
        }
        result.entanglement = Some(summary);
    }
    result.elapsed = started.elapsed();
    log::debug!("{context}: {:.2?}", result.elapsed);
    Ok(result)
}

fn summarize_entanglement(plan: &Plan, et: &EntanglementTrace) -> EntanglementSummary {
    let e = &et.log_negativity;
    let first_max = find_peaks(&et.times, e, PEAK_PROMINENCE, 0.0)
        .first()
        .map(|p| (p.x, p.height));
    EntanglementSummary {
        initial: e[0],
        max: et.max_log_negativity(),
        min: e.iter().copied().fold(f64::INFINITY, f64::min),
        first_max,
        mean_bound_gap: et.mean_bound_gap(),
        max_bound_excess: et.max_bound_excess(),
        plateau: (plan.kind == Kind::Gate)
            .then(|| plateau(&et.times, e, PLATEAU_TAIL, PLATEAU_SLOPE))
            .flatten(),
    }
}

/// `t_ε` per threshold, `p(t_ε) = 1 - exp(-t_ε/2)` with `t_ε` in `1/Ω_P`.
fn decay_table(plan: &Plan, et: &EntanglementTrace) -> Result<DecaySummary, spinboson_core::observables::ObservablesError> {
    let mut rows = Vec::with_capacity(plan.epsilons.len());
    for &eps in &plan.epsilons {
        let t = entanglement_lifetime(&et.times, &et.log_negativity, eps)?.map(|l| l.t_eps);
        rows.push(DecayRow {
            epsilon: eps,
            t_eps: t,
            p_t_eps: t.map(|t| p_of_t(t, 1.0, 0.0)),
            neg_log_eps: -eps.ln(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.p_t_eps.map(|p| (r.neg_log_eps, p)))
        .unzip();
    Ok(DecaySummary {
        fit: linear_fit(&x, &y),
        rows,
    })
}

fn point_cells(r: &PointResult) -> Vec<Cell> {
    let p = &r.point;
    vec![
        p.tag().as_str().into(),
        p.seed.into(),
        p.ratio_eps.into(),
        p.tan_theta_bar.into(),
        p.variant_label().into(),
        p.mu_over_nu.into(),
    ]
}

const POINT_COLUMNS: [&str; 6] = ["run", "seed", "ratio_eps", "tan_theta_bar", "variant", "mu_over_nu"];

fn columns(extra: &[&'static str]) -> Vec<&'static str> {
    POINT_COLUMNS.iter().chain(extra).copied().collect()
}

fn write_summaries(plan: &Plan, hash: &str, results: &[PointResult], dir: &Path, format: Format) -> Result<Vec<FileEntry>> {
    let mut h = Header::default();
    h.push("scenario_hash", hash);
    h.push("kind", plan.kind);
    h.push(
        "seeds",
        plan.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
    );
    h.push("time_unit", "1/omega_p");
    h.push("library_version", env!("CARGO_PKG_VERSION"));
    let mut files = Vec::new();
    let cptp_cols = ["max_trace_drift", "max_hermiticity_error", "min_eigenvalue"];
    let cptp = |r: &PointResult| -> Vec<Cell> {
        vec![
            r.cptp.max_trace_drift.into(),
            r.cptp.max_hermiticity_error.into(),
            r.cptp.min_eigenvalue.into(),
        ]
    };
    if plan.kind == Kind::SpectrumSweep {
        let mut t = Table::new(&columns(&["omega", "height", "prominence", "dominant"]));
        for r in results {
            let s = r.spectrum.as_ref().expect("spectrum run");
            let dom = s.dominant().map(|d| d.index);
            for pk in &s.peaks {
                let mut row = point_cells(r);
                row.extend([pk.x.into(), pk.height.into(), pk.prominence.into(), (Some(pk.index) == dom).into()]);
                t.push(row);
            }
        }
        files.push(write_table(dir, "peaks", &h, &t, format)?);
        let mut t = Table::new(&columns(&["n_peaks", "dominant_omega", "dominant_height", cptp_cols[0], cptp_cols[1], cptp_cols[2]]));
        for r in results {
            let s = r.spectrum.as_ref().expect("spectrum run");
            let mut row = point_cells(r);
            row.push(s.peaks.len().into());
            row.push(s.dominant().map(|d| d.x).into());
            row.push(s.dominant().map(|d| d.height).into());
            row.extend(cptp(r));
            t.push(row);
        }
        files.push(write_table(dir, "summary", &h, &t, format)?);
        return Ok(files);
    }

    let mut t = Table::new(&columns(&[
        "bell",
        "max_E_P",
        "first_max_t",
        "first_max_E_P",
        "mean_bound_gap",
        "max_bound_excess",
        "plateau_reached",
        "plateau_value",
        "plateau_max_slope",
        cptp_cols[0],
        cptp_cols[1],
        cptp_cols[2],
    ]));
    for r in results {
        let e = r.entanglement.as_ref().expect("entanglement run");
        let mut row = point_cells(r);
        row.push(r.point.bell.map_or(Cell::Empty, |b| b.label().into()));
        row.push(e.max.into());
        row.push(e.first_max.map(|f| f.0).into());
        row.push(e.first_max.map(|f| f.1).into());
        row.push(e.mean_bound_gap.into());
        row.push(e.max_bound_excess.into());
        match e.plateau {
            Some(p) => row.extend([p.reached.into(), p.value.into(), p.max_slope.into()]),
            None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.extend(cptp(r));
        t.push(row);
    }
    files.push(write_table(dir, "summary", &h, &t, format)?);

    if plan.kind == Kind::BellDecay {
        let mut t = Table::new(&columns(&["bell", "crossed", "slope", "intercept", "r_squared"]));
        for r in results {
            let d = r.decay.as_ref().expect("decay run");
            let mut row = point_cells(r);
            row.push(r.point.bell.map_or(Cell::Empty, |b| b.label().into()));
            row.push(d.rows.iter().filter(|x| x.t_eps.is_some()).count().into());
            row.push(d.fit.map(|f| f.slope).into());
            row.push(d.fit.map(|f| f.intercept).into());
            row.push(d.fit.map(|f| f.r_squared).into());
            t.push(row);
        }
        files.push(write_table(dir, "decay_fits", &h, &t, format)?);
    }
    Ok(files)
}
