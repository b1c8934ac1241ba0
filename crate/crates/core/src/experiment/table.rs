//! Result bookkeeping and the CSV contract.
//!
//! The CSV layout is a frozen interface: one header row, then one row per
//! (sweep point, curve) holding raw error counts next to the derived
//! rates.  Counts are what downstream tooling should trust; the rate
//! columns are recomputed on parse and must match exactly.

use crate::codec::Modulation;
use crate::receiver::Variant;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

pub const CSV_HEADER: &str =
    "sweep_value,variant,bits,bit_errors,ber,symbols,symbol_errors,ser,seed";

/// One curve at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub variant: Variant,
    pub modulation: Modulation,
    pub bits: u64,
    pub bit_errors: u64,
    pub symbols: u64,
    pub symbol_errors: u64,
}

impl ResultRow {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.symbol_errors as f64 / self.symbols as f64
        }
    }

    /// Curve name as written in the CSV, e.g. "lr/bpsk".
    pub fn curve_label(&self) -> String {
        format!("{}/{}", self.variant.label(), self.modulation.label())
    }
}

/// All rows of one run plus provenance metadata.  Only rows and the master
/// seed reach the CSV; the hash, version and wall time are for reporting.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub master_seed: u64,
    pub config_hash: u64,
    pub version: String,
    pub wall: Duration,
}

impl ResultTable {
    pub fn new(rows: Vec<ResultRow>, master_seed: u64, config_hash: u64) -> ResultTable {
        ResultTable {
            rows,
            master_seed,
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall: Duration::ZERO,
        }
    }

    /// Points of one curve as (sweep value, BER), in row order.
    pub fn ber_curve(&self, variant: Variant, modulation: Modulation) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.variant == variant && r.modulation == modulation)
            .map(|r| (r.sweep_value, r.ber()))
            .collect()
    }

    /// Points of one curve as (sweep value, SER), in row order.
    pub fn ser_curve(&self, variant: Variant, modulation: Modulation) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.variant == variant && r.modulation == modulation)
            .map(|r| (r.sweep_value, r.ser()))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.sweep_value,
                r.curve_label(),
                r.bits,
                r.bit_errors,
                r.ber(),
                r.symbols,
                r.symbol_errors,
                r.ser(),
                self.master_seed
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses a table back from its CSV form.  Recovers rows and the seed;
    /// the hash and wall time are not stored in the CSV.
    pub fn from_csv(text: &str) -> Result<ResultTable> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != CSV_HEADER {
            return Err(Error::Config(format!("unexpected CSV header: {header}")));
        }
        let mut rows = Vec::new();
        let mut seed: Option<u64> = None;
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row_no = idx + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Config(format!(
                    "row {row_no}: expected 9 fields, got {}",
                    fields.len()
                )));
            }
            let bad = |what: &str| Error::Config(format!("row {row_no}: bad {what}"));
            let sweep_value: f64 = fields[0].parse().map_err(|_| bad("sweep_value"))?;
            let (variant, modulation) =
                parse_curve_label(fields[1]).ok_or_else(|| bad("variant label"))?;
            let bits: u64 = fields[2].parse().map_err(|_| bad("bits"))?;
            let bit_errors: u64 = fields[3].parse().map_err(|_| bad("bit_errors"))?;
            let ber: f64 = fields[4].parse().map_err(|_| bad("ber"))?;
            let symbols: u64 = fields[5].parse().map_err(|_| bad("symbols"))?;
            let symbol_errors: u64 = fields[6].parse().map_err(|_| bad("symbol_errors"))?;
            let ser: f64 = fields[7].parse().map_err(|_| bad("ser"))?;
            let row_seed: u64 = fields[8].parse().map_err(|_| bad("seed"))?;
            let row = ResultRow {
                sweep_value,
                variant,
                modulation,
                bits,
                bit_errors,
                symbols,
                symbol_errors,
            };
            if ber != row.ber() || ser != row.ser() {
                return Err(Error::Config(format!(
                    "row {row_no}: rate columns disagree with the counts"
                )));
            }
            match seed {
                None => seed = Some(row_seed),
                Some(s) if s == row_seed => {}
                Some(_) => {
                    return Err(Error::Config(format!(
                        "row {row_no}: seed differs from earlier rows"
                    )));
                }
            }
            rows.push(row);
        }
        Ok(ResultTable::new(rows, seed.unwrap_or(0), 0))
    }
}

fn parse_curve_label(label: &str) -> Option<(Variant, Modulation)> {
    let (v, m) = label.split_once('/')?;
    let variant = Variant::ALL.into_iter().find(|x| x.label() == v)?;
    let modulation = [Modulation::Bpsk, Modulation::Ook]
        .into_iter()
        .find(|x| x.label() == m)?;
    Some((variant, modulation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let rows = vec![
            ResultRow {
                sweep_value: 40.0,
                variant: Variant::Lr,
                modulation: Modulation::Bpsk,
                bits: 1024,
                bit_errors: 31,
                symbols: 256,
                symbol_errors: 20,
            },
            ResultRow {
                sweep_value: 40.0,
                variant: Variant::Energy,
                modulation: Modulation::Ook,
                bits: 1024,
                bit_errors: 333,
                symbols: 256,
                symbol_errors: 129,
            },
            ResultRow {
                sweep_value: 42.0,
                variant: Variant::Lr,
                modulation: Modulation::Bpsk,
                bits: 1024,
                bit_errors: 0,
                symbols: 256,
                symbol_errors: 0,
            },
        ];
        ResultTable::new(rows, 99, 0xabcd)
    }

    #[test]
    fn rates_are_exact_ratios() {
        let t = sample();
        assert_eq!(t.rows[0].ber(), 31.0 / 1024.0);
        assert_eq!(t.rows[0].ser(), 20.0 / 256.0);
        assert_eq!(t.rows[2].ber(), 0.0);
    }

    #[test]
    fn csv_round_trips() {
        let t = sample();
        let text = t.to_csv();
        assert!(text.starts_with(CSV_HEADER));
        let back = ResultTable::from_csv(&text).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.master_seed, t.master_seed);
    }

    #[test]
    fn header_is_frozen() {
        assert_eq!(
            CSV_HEADER,
            "sweep_value,variant,bits,bit_errors,ber,symbols,symbol_errors,ser,seed"
        );
        let line = sample().to_csv().lines().nth(1).unwrap().to_string();
        assert!(line.starts_with("40,lr/bpsk,1024,31,"), "{line}");
    }

    #[test]
    fn corrupted_csv_is_rejected() {
        let t = sample();
        let good = t.to_csv();

        let bad_header = good.replacen("sweep_value", "sweep", 1);
        assert!(ResultTable::from_csv(&bad_header).is_err());

        let bad_label = good.replacen("lr/bpsk", "svm/bpsk", 1);
        assert!(ResultTable::from_csv(&bad_label).is_err());

        let bad_rate = good.replacen("31,", "32,", 1);
        assert!(
            ResultTable::from_csv(&bad_rate).is_err(),
            "count/rate mismatch"
        );

        let bad_seed = good.replacen("20,0.078125,99", "20,0.078125,98", 1);
        assert!(
            ResultTable::from_csv(&bad_seed).is_err(),
            "inconsistent seed"
        );
    }

    #[test]
    fn curves_extract_in_row_order() {
        let t = sample();
        let lr = t.ber_curve(Variant::Lr, Modulation::Bpsk);
        assert_eq!(lr.len(), 2);
        assert_eq!(lr[0], (40.0, 31.0 / 1024.0));
        assert_eq!(lr[1], (42.0, 0.0));
        assert_eq!(t.ser_curve(Variant::Energy, Modulation::Ook).len(), 1);
    }
}
