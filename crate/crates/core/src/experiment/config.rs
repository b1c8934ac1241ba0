//! Strict TOML experiment configuration.
//!
//! Every section rejects unknown keys so a typo fails the run instead of
//! silently falling back to a default, and `validate` gathers everything
//! wrong with a config into a single error message instead of stopping at
//! the first problem.

use crate::codec::{CodeSpec, Modulation};
use crate::geometry::TagPlacement;
use crate::receiver::Variant;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Whole experiment description, one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub frame: FrameConfig,
    pub code: CodeConfig,
    pub sweep: SweepAxis,
    pub run: RunConfig,
}

/// Node placement: transmitter-to-array distance, array size and tag
/// position, all in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub d01: f64,
    pub n_r: usize,
    pub tag: TagConfig,
}

/// Tag position block.  `placement = "polar"` takes `d11` (distance from
/// the reference antenna) and an optional `angle` (radians, default π/4);
/// `placement = "xy"` takes explicit `x` and `y` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagConfig {
    pub placement: PlacementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d11: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementKind {
    Polar,
    Xy,
}

impl TagConfig {
    pub fn polar(d11: f64) -> TagConfig {
        TagConfig {
            placement: PlacementKind::Polar,
            d11: Some(d11),
            angle: None,
            x: None,
            y: None,
        }
    }

    pub fn xy(x: f64, y: f64) -> TagConfig {
        TagConfig {
            placement: PlacementKind::Xy,
            d11: None,
            angle: None,
            x: Some(x),
            y: Some(y),
        }
    }

    /// Converts to a geometry placement, rejecting field combinations that
    /// do not belong to the chosen placement kind.
    pub fn to_placement(&self) -> Result<TagPlacement> {
        match self.placement {
            PlacementKind::Polar => {
                if self.x.is_some() || self.y.is_some() {
                    return Err(Error::Config(
                        "polar placement takes d11/angle, not x/y".into(),
                    ));
                }
                let d11 = self
                    .d11
                    .ok_or_else(|| Error::Config("polar placement needs d11".into()))?;
                if !(d11.is_finite() && d11 > 0.0) {
                    return Err(Error::Config("tag d11 must be a positive length".into()));
                }
                let angle = self.angle.unwrap_or(PI / 4.0);
                if !angle.is_finite() {
                    return Err(Error::Config("tag angle must be finite".into()));
                }
                Ok(TagPlacement::Polar { d11, angle })
            }
            PlacementKind::Xy => {
                if self.d11.is_some() || self.angle.is_some() {
                    return Err(Error::Config(
                        "xy placement takes x/y, not d11/angle".into(),
                    ));
                }
                match (self.x, self.y) {
                    (Some(x), Some(y)) if x.is_finite() && y.is_finite() => {
                        Ok(TagPlacement::Xy([x, y]))
                    }
                    (Some(_), Some(_)) => {
                        Err(Error::Config("tag coordinates must be finite".into()))
                    }
                    _ => Err(Error::Config("xy placement needs both x and y".into())),
                }
            }
        }
    }
}

/// Frame shape: training block length and payload codewords per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub preamble_len: usize,
    pub messages_per_frame: usize,
}

/// Code section.  `order` is required for hadamard/simplex and must be
/// absent for uncoded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub family: CodeFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Uncoded,
    Hadamard,
    Simplex,
}

impl CodeConfig {
    pub fn uncoded() -> CodeConfig {
        CodeConfig {
            family: CodeFamily::Uncoded,
            order: None,
        }
    }

    pub fn hadamard(order: u32) -> CodeConfig {
        CodeConfig {
            family: CodeFamily::Hadamard,
            order: Some(order),
        }
    }

    pub fn simplex(order: u32) -> CodeConfig {
        CodeConfig {
            family: CodeFamily::Simplex,
            order: Some(order),
        }
    }

    pub fn spec(&self) -> Result<CodeSpec> {
        match (self.family, self.order) {
            (CodeFamily::Uncoded, None) => Ok(CodeSpec::Uncoded),
            (CodeFamily::Uncoded, Some(_)) => Err(Error::Config("uncoded takes no order".into())),
            (CodeFamily::Hadamard, Some(order)) => Ok(CodeSpec::Hadamard { order }),
            (CodeFamily::Simplex, Some(order)) => Ok(CodeSpec::Simplex { order }),
            (_, None) => Err(Error::Config("this code family needs an order".into())),
        }
    }

    /// Same family at a different order, for order sweeps.
    pub fn with_order(&self, order: u32) -> Result<CodeConfig> {
        match self.family {
            CodeFamily::Uncoded => Err(Error::Config("an order sweep needs a coded family".into())),
            family => Ok(CodeConfig {
                family,
                order: Some(order),
            }),
        }
    }
}

/// The swept quantity and its values.  Exactly one axis appears in the
/// `[sweep]` table, e.g. `gamma_db = [40.0, 42.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "gamma_db")]
    GammaDb(Vec<f64>),
    #[serde(rename = "preamble_len")]
    PreambleLen(Vec<usize>),
    #[serde(rename = "code_order")]
    CodeOrder(Vec<u32>),
    #[serde(rename = "n_r")]
    NR(Vec<usize>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::GammaDb(v) => v.len(),
            SweepAxis::PreambleLen(v) => v.len(),
            SweepAxis::CodeOrder(v) => v.len(),
            SweepAxis::NR(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis label used on plots.
    pub fn x_label(&self) -> &'static str {
        match self {
            SweepAxis::GammaDb(_) => "ambient SNR (dB)",
            SweepAxis::PreambleLen(_) => "training block length (chips)",
            SweepAxis::CodeOrder(_) => "code order",
            SweepAxis::NR(_) => "receive antennas",
        }
    }
}

/// Monte Carlo section: operating point, trial budget, seed and the
/// receiver/modulation grid.  Variant and modulation combinations that do
/// not go together (an energy detector on a phase-only tag, the
/// phase-ignoring reference on an on-off tag) are skipped, so listing four
/// variants and two modulations can legitimately produce six curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gamma_db: f64,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub noiseless: bool,
    pub modulations: Vec<Modulation>,
    pub variants: Vec<Variant>,
}

impl ExperimentConfig {
    /// The (variant, modulation) pairs the run produces, variants outer,
    /// in config order, incompatible pairs skipped.
    pub fn curves(&self) -> Vec<(Variant, Modulation)> {
        let mut out = Vec::new();
        for &v in &self.run.variants {
            for &m in &self.run.modulations {
                if v.supports(m) {
                    out.push((v, m));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<String> = Vec::new();
        let s = &self.scenario;
        if !(s.d01.is_finite() && s.d01 > 0.0) {
            problems.push("scenario.d01 must be a positive length".into());
        }
        if s.n_r < 2 {
            problems.push("scenario.n_r needs at least two antennas".into());
        }
        if let Err(e) = s.tag.to_placement() {
            problems.push(format!("scenario.tag: {e}"));
        }
        if self.frame.preamble_len == 0 {
            problems.push("frame.preamble_len must be at least 1".into());
        }
        if self.frame.messages_per_frame == 0 {
            problems.push("frame.messages_per_frame must be at least 1".into());
        }
        match self.code.spec() {
            Err(e) => problems.push(format!("code: {e}")),
            Ok(spec) => {
                if let Err(e) = spec.build() {
                    problems.push(format!("code: {e}"));
                }
            }
        }
        if self.sweep.is_empty() {
            problems.push("sweep values must be non-empty".into());
        }
        match &self.sweep {
            SweepAxis::GammaDb(v) => {
                if v.iter().any(|g| !g.is_finite()) {
                    problems.push("sweep.gamma_db values must be finite".into());
                }
            }
            SweepAxis::PreambleLen(v) => {
                if v.contains(&0) {
                    problems.push("sweep.preamble_len values must be at least 1".into());
                }
            }
            SweepAxis::CodeOrder(v) => {
                for &order in v {
                    match self.code.with_order(order).and_then(|c| c.spec()?.build()) {
                        Ok(_) => {}
                        Err(e) => {
                            problems.push(format!("sweep.code_order {order}: {e}"));
                            break;
                        }
                    }
                }
            }
            SweepAxis::NR(v) => {
                if v.iter().any(|&n| n < 2) {
                    problems.push("sweep.n_r values need at least two antennas".into());
                }
            }
        }
        let r = &self.run;
        if !r.gamma_db.is_finite() {
            problems.push("run.gamma_db must be finite".into());
        }
        if r.trials == 0 {
            problems.push("run.trials must be at least 1".into());
        }
        if r.modulations.is_empty() {
            problems.push("run.modulations must list at least one modulation".into());
        }
        if has_duplicates(&r.modulations) {
            problems.push("run.modulations lists a modulation twice".into());
        }
        if r.variants.is_empty() {
            problems.push("run.variants must list at least one variant".into());
        }
        if has_duplicates(&r.variants) {
            problems.push("run.variants lists a variant twice".into());
        }
        for &v in &r.variants {
            if !r.modulations.is_empty() && !r.modulations.iter().any(|&m| v.supports(m)) {
                problems.push(format!(
                    "variant {} supports none of the listed modulations",
                    v.label()
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid config: {}",
                problems.join("; ")
            )))
        }
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, x)| items[..i].contains(x))
}

/// Parses and validates a config from TOML text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// FNV-1a hash of the canonical serialized config, recorded in result
/// tables so outputs can be traced back to their settings.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<u64> {
    let text = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    Ok(fnv1a(text.as_bytes()))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
