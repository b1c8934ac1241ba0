//! Tag-position coverage maps: symbol error rate of one receiver over a
//! rectangular grid of tag locations at a fixed operating point.
//!
//! Cells closer than half a wavelength to the transmitter or to any array
//! element are skipped (the free-space gain model is meaningless on top of
//! a node) and emitted as NaN so downstream tooling can mask them.

use crate::codec::Modulation;
use crate::experiment::config::CodeConfig;
use crate::experiment::runner::{run_scoped, trial_counts, Counts, RunOptions, COVERAGE_STREAM};
use crate::geometry::{build_linear_scenario, channel_state, raw_gains, TagPlacement};
use crate::receiver::Variant;
use crate::sim::db_to_linear;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum distance from a grid cell to any node before the cell is
/// evaluated.
pub const CELL_STANDOFF: f64 = 0.5;

pub const COVERAGE_CSV_HEADER: &str = "x,y,ser,log10_ser";

/// Rectangular grid of tag positions, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl GridSpec {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ys(&self) -> Vec<f64> {
        linspace(self.y_min, self.y_max, self.ny)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }
}

/// Coverage map settings: one receiver, one operating point, a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageConfig {
    pub d01: f64,
    pub n_r: usize,
    pub gamma_db: f64,
    pub code: CodeConfig,
    pub preamble_len: usize,
    pub messages_per_frame: usize,
    pub variant: Variant,
    pub modulation: Modulation,
    pub grid: GridSpec,
    pub trials: u64,
    pub master_seed: u64,
}

impl CoverageConfig {
    /// The canonical map: wide transmitter-receiver separation, moderate
    /// SNR, a short block code and the trained receiver.
    pub fn default_map() -> CoverageConfig {
        CoverageConfig {
            d01: 80.0,
            n_r: 8,
            gamma_db: 34.0,
            code: CodeConfig::simplex(3),
            preamble_len: 64,
            messages_per_frame: 8,
            variant: Variant::Lr,
            modulation: Modulation::Bpsk,
            grid: GridSpec {
                x_min: -44.0,
                x_max: 44.0,
                nx: 23,
                y_min: 0.0,
                y_max: 16.0,
                ny: 9,
            },
            trials: 200,
            master_seed: 424_242,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<String> = Vec::new();
        if !(self.d01.is_finite() && self.d01 > 0.0) {
            problems.push("d01 must be a positive length".into());
        }
        if self.n_r < 2 {
            problems.push("n_r needs at least two antennas".into());
        }
        if !self.gamma_db.is_finite() {
            problems.push("gamma_db must be finite".into());
        }
        match self.code.spec() {
            Err(e) => problems.push(format!("code: {e}")),
            Ok(spec) => {
                if let Err(e) = spec.build() {
                    problems.push(format!("code: {e}"));
                }
            }
        }
        if self.preamble_len == 0 {
            problems.push("preamble_len must be at least 1".into());
        }
        if self.messages_per_frame == 0 {
            problems.push("messages_per_frame must be at least 1".into());
        }
        if !self.variant.supports(self.modulation) {
            problems.push(format!(
                "variant {} does not support {}",
                self.variant.label(),
                self.modulation.label()
            ));
        }
        let g = &self.grid;
        if g.nx == 0 || g.ny == 0 {
            problems.push("grid needs at least one cell on each axis".into());
        }
        if ![g.x_min, g.x_max, g.y_min, g.y_max]
            .iter()
            .all(|v| v.is_finite())
            || g.x_min > g.x_max
            || g.y_min > g.y_max
        {
            problems.push("grid bounds must be finite and ordered".into());
        }
        if self.trials == 0 {
            problems.push("trials must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid coverage config: {}",
                problems.join("; ")
            )))
        }
    }

    /// Node coordinates of the deployment, used for the standoff rule.
    fn nodes(&self) -> Vec<[f64; 2]> {
        let mut nodes = vec![[-self.d01 / 2.0, 0.0]];
        for l in 0..self.n_r {
            nodes.push([self.d01 / 2.0, crate::geometry::ELEMENT_SPACING * l as f64]);
        }
        nodes
    }
}

/// One evaluated grid cell; `counts` is None for skipped cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageCell {
    pub x: f64,
    pub y: f64,
    pub counts: Option<Counts>,
}

impl CoverageCell {
    pub fn ser(&self) -> f64 {
        match self.counts {
            Some(c) if c.symbols > 0 => c.symbol_errors as f64 / c.symbols as f64,
            _ => f64::NAN,
        }
    }

    /// log10 of the SER, floored at half an error so perfect cells stay
    /// finite; NaN for skipped cells.
    pub fn log10_ser(&self) -> f64 {
        match self.counts {
            Some(c) if c.symbols > 0 => {
                let floor = 0.5 / c.symbols as f64;
                self.ser().max(floor).log10()
            }
            _ => f64::NAN,
        }
    }
}

/// Cells in row-major order: the y rows outer, x inner.
#[derive(Debug, Clone)]
pub struct CoverageTable {
    pub cells: Vec<CoverageCell>,
    pub grid: GridSpec,
    pub d01: f64,
    pub n_r: usize,
    pub master_seed: u64,
}

impl CoverageTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.cells.len() + 1));
        out.push_str(COVERAGE_CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            writeln!(
                out,
                "{},{},{},{}",
                cell.x,
                cell.y,
                cell.ser(),
                cell.log10_ser()
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Parses and validates a coverage config from TOML text.
pub fn parse_coverage_config(text: &str) -> Result<CoverageConfig> {
    let cfg: CoverageConfig =
        toml::from_str(text).map_err(|e| crate::Error::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a coverage config file.
pub fn load_coverage_config(path: &Path) -> Result<CoverageConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_coverage_config(&text)
}

/// Evaluates the map.  Cells run independently with derived seeds, so the
/// output is identical for any worker count.
pub fn run_coverage_map(cfg: &CoverageConfig, opts: RunOptions) -> Result<CoverageTable> {
    cfg.validate()?;
    let code = cfg.code.spec()?.build()?;
    let gamma = db_to_linear(cfg.gamma_db);
    let nodes = cfg.nodes();
    let curves = [(cfg.variant, cfg.modulation)];
    let xs = cfg.grid.xs();
    let ys = cfg.grid.ys();
    let positions: Vec<[f64; 2]> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
        .collect();

    let evaluate = |(index, pos): (usize, &[f64; 2])| -> Result<Option<Counts>> {
        let standoff = nodes
            .iter()
            .map(|n| ((n[0] - pos[0]).powi(2) + (n[1] - pos[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        if standoff < CELL_STANDOFF {
            return Ok(None);
        }
        let geom = build_linear_scenario(cfg.d01, cfg.n_r, TagPlacement::Xy(*pos))?;
        let chan = channel_state(&raw_gains(&geom), &geom);
        let mut total = Counts::default();
        for t in 0..cfg.trials {
            let counts = trial_counts(
                &chan,
                &code,
                cfg.preamble_len,
                cfg.messages_per_frame,
                gamma,
                false,
                &curves,
                cfg.master_seed,
                &[COVERAGE_STREAM, index as u64, t],
            )?;
            total += counts[0];
        }
        Ok(Some(total))
    };

    let results: Result<Vec<Option<Counts>>> = run_scoped(opts, || {
        #[cfg(feature = "parallel")]
        {
            positions.par_iter().enumerate().map(evaluate).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            positions.iter().enumerate().map(evaluate).collect()
        }
    });

    let cells = positions
        .iter()
        .zip(results?)
        .map(|(pos, counts)| CoverageCell {
            x: pos[0],
            y: pos[1],
            counts,
        })
        .collect();
    Ok(CoverageTable {
        cells,
        grid: cfg.grid,
        d01: cfg.d01,
        n_r: cfg.n_r,
        master_seed: cfg.master_seed,
    })
}
