//! Scenario files: a versioned TOML schema, resolved into a [`Plan`] with
//! every default filled in.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinboson_core::model::{BellState, Gate, GammaPlusMode, ModelConfig};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Default `μ/ν` sweep for the connectivity scenarios.
pub const DEFAULT_SWEEP: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
/// Default thresholds for the entanglement lifetime table.
pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
/// Largest accepted `μ/ν`.
pub const MAX_MU_OVER_NU: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    SpectrumSweep,
    EntanglementSweep,
    BoundCompare,
    BellDecay,
    Gate,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::SpectrumSweep => "spectrum_sweep",
            Kind::EntanglementSweep => "entanglement_sweep",
            Kind::BoundCompare => "bound_compare",
            Kind::BellDecay => "bell_decay",
            Kind::Gate => "gate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellName {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellName {
    pub fn state(self) -> BellState {
        match self {
            BellName::PhiPlus => BellState::PhiPlus,
            BellName::PhiMinus => BellState::PhiMinus,
            BellName::PsiPlus => BellState::PsiPlus,
            BellName::PsiMinus => BellState::PsiMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellName::PhiPlus => "phi+",
            BellName::PhiMinus => "phi-",
            BellName::PsiPlus => "psi+",
            BellName::PsiMinus => "psi-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateName {
    Zz,
    Xxyy,
}

impl GateName {
    pub fn gate(self) -> Gate {
        match self {
            GateName::Zz => Gate::Zz,
            GateName::Xxyy => Gate::XxYy,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GateName::Zz => "zz",
            GateName::Xxyy => "xxyy",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPlus {
    #[default]
    ScaledByNbar,
    Sampled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowName {
    #[default]
    Rectangular,
    Hann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub omega_p: f64,
    pub n_tlf: usize,
    pub ratio_eps: f64,
    pub tan_theta_bar: f64,
    pub nbar: f64,
    pub seed: u64,
    pub gamma_plus: GammaPlus,
    pub halve_couplings: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        let c = ModelConfig::default();
        Self {
            omega_p: c.omega_p,
            n_tlf: c.n_tlf,
            ratio_eps: c.ratio_eps,
            tan_theta_bar: c.tan_theta_bar,
            nbar: c.nbar,
            seed: c.seed,
            gamma_plus: GammaPlus::ScaledByNbar,
            halve_couplings: c.halve_couplings,
        }
    }
}

impl ModelSection {
    pub fn config(&self, seed: u64, ratio_eps: f64, tan_theta_bar: f64, mu_over_nu: f64) -> ModelConfig {
        ModelConfig {
            omega_p: self.omega_p,
            n_tlf: self.n_tlf,
            ratio_eps,
            tan_theta_bar,
            mu_over_nu,
            nbar: self.nbar,
            seed,
            gamma_plus_mode: match self.gamma_plus {
                GammaPlus::ScaledByNbar => GammaPlusMode::ScaledByNbar,
                GammaPlus::Sampled => GammaPlusMode::Sampled,
            },
            halve_couplings: self.halve_couplings,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub kind: GateName,
    /// Defaults to the sampled `ν`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

/// Optional outer product over model parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub ratio_eps: Option<Vec<f64>>,
    pub tan_theta_bar: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub samples: usize,
    /// Sampling interval in units of `1/Ω_P`.
    pub sample_step: f64,
    pub window: WindowName,
    /// Peak prominence relative to the largest bin.
    pub prominence: f64,
    /// Minimum peak separation in bins.
    pub separation_bins: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            samples: 4000,
            sample_step: 0.05,
            window: WindowName::Rectangular,
            prominence: spinboson_core::observables::PEAK_PROMINENCE,
            separation_bins: spinboson_core::observables::PEAK_SEPARATION_BINS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// A scenario file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub model: ModelSection,
    /// Replaces `model.seed` when given.
    pub seeds: Option<Vec<u64>>,
    /// `μ/ν` values.
    pub sweep: Option<Vec<f64>>,
    /// Run length in probe cycles.
    pub duration: Option<f64>,
    /// Output step in probe cycles.
    pub step: Option<f64>,
    /// Record the correlation lower bound next to `E_P`.
    pub bound: Option<bool>,
    pub gate: Option<GateSection>,
    pub bell: Option<OneOrMany<BellName>>,
    pub epsilons: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub grid: Option<GridSection>,
    pub spectrum: Option<SpectrumSection>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fills defaults and checks every constraint.
    pub fn resolve(self) -> Result<Plan> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let kind = self.kind;
        let entangling = matches!(kind, Kind::BellDecay | Kind::Gate);
        let sweep = self.sweep.unwrap_or_else(|| {
            if entangling {
                vec![0.0, 1.0]
            } else {
                DEFAULT_SWEEP.to_vec()
            }
        });
        let seeds = self.seeds.unwrap_or_else(|| vec![self.model.seed]);
        let grid = self.grid.unwrap_or_default();
        let ratio_eps = grid.ratio_eps.unwrap_or_else(|| vec![self.model.ratio_eps]);
        let tan_theta_bar = grid.tan_theta_bar.unwrap_or_else(|| vec![self.model.tan_theta_bar]);

        if self.spectrum.is_some() && kind != Kind::SpectrumSweep {
            return Err(Error::Config(format!("[spectrum] is only used by spectrum_sweep, not {kind}")));
        }
        if self.gate.is_some() && kind != Kind::Gate {
            return Err(Error::Config(format!("[gate] is only used by gate, not {kind}")));
        }
        if self.bell.is_some() && kind != Kind::BellDecay {
            return Err(Error::Config(format!("bell is only used by bell_decay, not {kind}")));
        }
        if self.epsilons.is_some() && kind != Kind::BellDecay {
            return Err(Error::Config(format!("epsilons is only used by bell_decay, not {kind}")));
        }
        if self.bound.is_some() && kind == Kind::SpectrumSweep {
            return Err(Error::Config("bound is not used by spectrum_sweep".into()));
        }

        let spectrum = self.spectrum.unwrap_or_default();
        let cycle = 2.0 * PI / self.model.omega_p;
        let (duration, step) = if kind == Kind::SpectrumSweep {
            if self.duration.is_some() || self.step.is_some() {
                return Err(Error::Config(
                    "spectrum_sweep takes its grid from [spectrum] (samples, sample_step), not duration/step".into(),
                ));
            }
            let step = spectrum.sample_step / cycle;
            (step * (spectrum.samples.saturating_sub(1)) as f64, step)
        } else {
            let (d, s) = match kind {
                Kind::BellDecay => (400.0, 0.05),
                Kind::Gate => (20.0, 0.01),
                _ => (50.0, 0.01),
            };
            (self.duration.unwrap_or(d), self.step.unwrap_or(s))
        };
        let gate = match (kind, self.gate) {
            (Kind::Gate, None) => return Err(Error::Config("gate scenarios need a [gate] table".into())),
            (_, g) => g,
        };
        let bell = match (kind, self.bell) {
            (Kind::BellDecay, None) => vec![BellName::PhiPlus],
            (_, None) => Vec::new(),
            (_, Some(b)) => b.into_vec(),
        };
        let plan = Plan {
            schema_version: self.schema_version,
            kind,
            model: self.model,
            seeds,
            sweep,
            ratio_eps,
            tan_theta_bar,
            duration,
            step,
            bound: self.bound.unwrap_or(kind == Kind::BoundCompare),
            gate,
            bell,
            epsilons: self.epsilons.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec()),
            spectrum,
            output: self.output,
        };
        plan.check()?;
        Ok(plan)
    }
}

/// A fully resolved scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub schema_version: u32,
    pub kind: Kind,
    pub model: ModelSection,
    pub seeds: Vec<u64>,
    pub sweep: Vec<f64>,
    pub ratio_eps: Vec<f64>,
    pub tan_theta_bar: Vec<f64>,
    /// Probe cycles.
    pub duration: f64,
    /// Probe cycles.
    pub step: f64,
    pub bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateSection>,
    pub bell: Vec<BellName>,
    pub epsilons: Vec<f64>,
    pub spectrum: SpectrumSection,
    /// Not part of the hash.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn err<T>(msg: String) -> Result<T> {
    Err(Error::Config(msg))
}

impl Plan {
    fn check(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if self.sweep.is_empty() {
            return err("sweep is empty".into());
        }
        for &m in &self.sweep {
            if !(0.0..=MAX_MU_OVER_NU).contains(&m) {
                return err(format!("sweep value {m} outside [0, {MAX_MU_OVER_NU}]"));
            }
        }
        if self.seeds.is_empty() {
            return err("seeds is empty".into());
        }
        if !finite_pos(self.duration) {
            return err(format!("duration must be positive, got {}", self.duration));
        }
        if !finite_pos(self.step) {
            return err(format!("step must be positive, got {}", self.step));
        }
        if self.kind != Kind::SpectrumSweep {
            let n = (self.duration / self.step).round();
            if n < 1.0 || (n * self.step - self.duration).abs() > 1e-9 * self.duration {
                return err(format!(
                    "duration {} is not a whole number of steps {}",
                    self.duration, self.step
                ));
            }
        }
        if let Some(g) = &self.gate {
            if let Some(s) = g.strength {
                if !finite_pos(s) {
                    return err(format!("gate strength must be positive, got {s}"));
                }
            }
        }
        if self.kind == Kind::BellDecay && self.bell.is_empty() {
            return err("bell is empty".into());
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e <= 1.0) {
                return err(format!("epsilon {e} outside (0, 1]"));
            }
        }
        let s = &self.spectrum;
        if s.samples < spinboson_core::observables::MIN_SAMPLES {
            return err(format!(
                "spectrum.samples must be at least {}",
                spinboson_core::observables::MIN_SAMPLES
            ));
        }
        if !finite_pos(s.sample_step) {
            return err(format!("spectrum.sample_step must be positive, got {}", s.sample_step));
        }
        if !(s.prominence > 0.0 && s.prominence < 1.0) {
            return err(format!("spectrum.prominence must lie in (0, 1), got {}", s.prominence));
        }
        if !(s.separation_bins.is_finite() && s.separation_bins >= 0.0) {
            return err(format!("spectrum.separation_bins must be non-negative, got {}", s.separation_bins));
        }
        for &r in &self.ratio_eps {
            for &t in &self.tan_theta_bar {
                let cfg = self.model.config(self.seeds[0], r, t, 0.0);
                cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
                let (da, db) = cfg.delta_range();
                if !(da > 0.0 && da < db) {
                    return err(format!("local-field range [{da}, {db}] is degenerate"));
                }
            }
        }
        let mut tags = BTreeSet::new();
        for p in self.points() {
            if !tags.insert(p.tag()) {
                return err(format!("two runs share the label {}; make sweep or grid values distinct", p.tag()));
            }
        }
        Ok(())
    }

    /// Output step in model time units (`1/Ω_P`).
    pub fn dt(&self) -> f64 {
        self.step * 2.0 * PI / self.model.omega_p
    }

    /// Number of steps after the initial sample.
    pub fn n_steps(&self) -> usize {
        (self.duration / self.step).round() as usize
    }

    pub fn toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    /// SHA-256 of the canonical TOML form (output directory excluded).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Every run of the scenario, in output order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &ratio_eps in &self.ratio_eps {
            for &tan_theta_bar in &self.tan_theta_bar {
                for &seed in &self.seeds {
                    let base = Point {
                        seed,
                        ratio_eps,
                        tan_theta_bar,
                        mu_over_nu: 0.0,
                        variant: Variant::Coupled,
                        bell: None,
                    };
                    match self.kind {
                        Kind::SpectrumSweep => out.push(Point {
                            variant: Variant::Control,
                            ..base
                        }),
                        Kind::Gate => out.push(Point {
                            variant: Variant::Ideal,
                            ..base
                        }),
                        _ => {}
                    }
                    let bells: Vec<Option<BellName>> = if self.kind == Kind::BellDecay {
                        self.bell.iter().copied().map(Some).collect()
                    } else {
                        vec![None]
                    };
                    for bell in bells {
                        for &mu in &self.sweep {
                            out.push(Point {
                                mu_over_nu: mu,
                                bell,
                                ..base
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Probe coupled to the TLFs.
    Coupled,
    /// `ν = 0`.
    Control,
    /// Probe qubits only, no TLFs.
    Ideal,
}

/// One run within a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub seed: u64,
    pub ratio_eps: f64,
    pub tan_theta_bar: f64,
    pub mu_over_nu: f64,
    pub variant: Variant,
    pub bell: Option<BellName>,
}

impl Point {
    /// File-name stem.
    pub fn tag(&self) -> String {
        let mut s = format!("seed{}_ratio{}_tan{:.4}", self.seed, self.ratio_eps, self.tan_theta_bar);
        match self.variant {
            Variant::Coupled => s += &format!("_mu{}", self.mu_over_nu),
            Variant::Control => s += "_control",
            Variant::Ideal => s += "_ideal",
        }
        if let Some(b) = self.bell {
            s += "_";
            s += b.label();
        }
        s
    }

    pub fn variant_label(&self) -> &'static str {
        match self.variant {
            Variant::Coupled => "coupled",
            Variant::Control => "control",
            Variant::Ideal => "ideal",
        }
    }
}
