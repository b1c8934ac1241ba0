//! Monte Carlo sweep runner.
//!
//! Each sweep point resolves to a concrete (channel, code, frame, SNR)
//! tuple; each trial synthesizes one frame per modulation and runs every
//! selected receiver on the same samples, so comparisons are paired.  The
//! per-trial RNG is derived from (master seed, stream, point, trial) and
//! never shared, and error counts are accumulated as integers, so results
//! are byte-identical no matter how trials are scheduled.  With the
//! `parallel` feature trials fan out across a rayon pool; without it the
//! same loop runs sequentially.

use crate::codec::{Code, Modulation};
use crate::experiment::config::{config_hash, ExperimentConfig, SweepAxis};
use crate::experiment::table::{ResultRow, ResultTable};
use crate::geometry::{build_linear_scenario, channel_state, raw_gains, ChannelState};
use crate::receiver::{demodulate_frame, GenieLink, Variant};
use crate::seed::trial_rng;
use crate::sim::{db_to_linear, draw_messages, simulate_frame};
use crate::Result;
use std::ops::AddAssign;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Stream tags keeping sweep and coverage draws disjoint under one master
/// seed.
pub(crate) const SWEEP_STREAM: u64 = 1;
pub(crate) const COVERAGE_STREAM: u64 = 2;

/// Execution options that must not affect results, only scheduling.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for the rayon pool; 0 picks the library default.
    /// Ignored when the `parallel` feature is off.
    pub workers: usize,
}

/// Integer error tallies for one curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub bits: u64,
    pub bit_errors: u64,
    pub symbols: u64,
    pub symbol_errors: u64,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.bits += rhs.bits;
        self.bit_errors += rhs.bit_errors;
        self.symbols += rhs.symbols;
        self.symbol_errors += rhs.symbol_errors;
    }
}

fn merge(mut a: Vec<Counts>, b: Vec<Counts>) -> Vec<Counts> {
    debug_assert_eq!(a.len(), b.len(), "curve counts must align");
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// One sweep point resolved to concrete simulation inputs.
pub(crate) struct ResolvedPoint {
    pub sweep_value: f64,
    pub gamma: f64,
    pub preamble_len: usize,
    pub code: Code,
    pub chan: ChannelState,
}

fn resolve_points(cfg: &ExperimentConfig) -> Result<Vec<ResolvedPoint>> {
    // (channel, physical carrier capture ‖â‖²) for an array of n_r elements.
    let resolve_array = |n_r: usize| -> Result<(ChannelState, f64)> {
        let geom = build_linear_scenario(cfg.scenario.d01, n_r, cfg.scenario.tag.to_placement()?)?;
        let raw = raw_gains(&geom);
        let capture = crate::linalg::norm_sqr(&raw.a_hat);
        Ok((channel_state(&raw, &geom), capture))
    };
    let channel_for = |n_r: usize| -> Result<ChannelState> { Ok(resolve_array(n_r)?.0) };
    let base_gamma = db_to_linear(cfg.run.gamma_db);
    match &cfg.sweep {
        SweepAxis::GammaDb(values) => values
            .iter()
            .map(|&g| {
                Ok(ResolvedPoint {
                    sweep_value: g,
                    gamma: db_to_linear(g),
                    preamble_len: cfg.frame.preamble_len,
                    code: cfg.code.spec()?.build()?,
                    chan: channel_for(cfg.scenario.n_r)?,
                })
            })
            .collect(),
        SweepAxis::PreambleLen(values) => values
            .iter()
            .map(|&l| {
                Ok(ResolvedPoint {
                    sweep_value: l as f64,
                    gamma: base_gamma,
                    preamble_len: l,
                    code: cfg.code.spec()?.build()?,
                    chan: channel_for(cfg.scenario.n_r)?,
                })
            })
            .collect(),
        SweepAxis::CodeOrder(values) => values
            .iter()
            .map(|&order| {
                Ok(ResolvedPoint {
                    sweep_value: order as f64,
                    gamma: base_gamma,
                    preamble_len: cfg.frame.preamble_len,
                    code: cfg.code.with_order(order)?.spec()?.build()?,
                    chan: channel_for(cfg.scenario.n_r)?,
                })
            })
            .collect(),
        // `gamma_db` names the direct SNR collected by the configured array.
        // Growing the array at fixed transmit power collects proportionally
        // more carrier, so each point scales gamma by its physical capture;
        // without the rescale a bigger array would imply a weaker transmitter.
        SweepAxis::NR(values) => {
            let base_capture = resolve_array(cfg.scenario.n_r)?.1;
            values
                .iter()
                .map(|&n_r| {
                    let (chan, capture) = resolve_array(n_r)?;
                    Ok(ResolvedPoint {
                        sweep_value: n_r as f64,
                        gamma: base_gamma * capture / base_capture,
                        preamble_len: cfg.frame.preamble_len,
                        code: cfg.code.spec()?.build()?,
                        chan,
                    })
                })
                .collect()
        }
    }
}

/// Runs one trial: one frame per modulation on shared draws, every curve
/// demodulated from the same samples.
#[allow(clippy::too_many_arguments)]
pub(crate) fn trial_counts(
    chan: &ChannelState,
    code: &Code,
    preamble_len: usize,
    messages_per_frame: usize,
    gamma: f64,
    noiseless: bool,
    curves: &[(Variant, Modulation)],
    master_seed: u64,
    path: &[u64],
) -> Result<Vec<Counts>> {
    let mut counts = vec![Counts::default(); curves.len()];
    for modulation in [Modulation::Bpsk, Modulation::Ook] {
        if !curves.iter().any(|&(_, m)| m == modulation) {
            continue;
        }
        // Both modulations reseed from the same path, so they see the same
        // messages, ambient symbols and noise and differ only in the chip
        // mapping.
        let mut rng = trial_rng(master_seed, path);
        let messages = draw_messages(&mut rng, messages_per_frame, code.message_count());
        let sig = simulate_frame(
            chan,
            code,
            modulation,
            preamble_len,
            &messages,
            gamma,
            noiseless,
            &mut rng,
        );
        for (ci, &(variant, m)) in curves.iter().enumerate() {
            if m != modulation {
                continue;
            }
            let out = demodulate_frame(
                &sig.y,
                sig.layout,
                modulation,
                code,
                variant,
                Some(GenieLink { chan, gamma }),
            )?;
            let k = code.k() as u64;
            for (&sent, &got) in messages.iter().zip(&out.messages) {
                let diff = sent ^ got;
                counts[ci].bits += k;
                counts[ci].bit_errors += u64::from(diff.count_ones());
                counts[ci].symbols += 1;
                counts[ci].symbol_errors += u64::from(diff != 0);
            }
        }
    }
    Ok(counts)
}

#[cfg(feature = "parallel")]
fn accumulate_trials<F>(trials: u64, n_curves: usize, trial: F) -> Result<Vec<Counts>>
where
    F: Fn(u64) -> Result<Vec<Counts>> + Send + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(trial)
        .try_reduce(|| vec![Counts::default(); n_curves], |a, b| Ok(merge(a, b)))
}

#[cfg(not(feature = "parallel"))]
fn accumulate_trials<F>(trials: u64, n_curves: usize, trial: F) -> Result<Vec<Counts>>
where
    F: Fn(u64) -> Result<Vec<Counts>> + Sync,
{
    let mut total = vec![Counts::default(); n_curves];
    for t in 0..trials {
        total = merge(total, trial(t)?);
    }
    Ok(total)
}

fn run_experiment_inner(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let started = Instant::now();
    let curves = cfg.curves();
    let points = resolve_points(cfg)?;
    let mut rows = Vec::with_capacity(points.len() * curves.len());
    for (pi, point) in points.iter().enumerate() {
        let totals = accumulate_trials(cfg.run.trials, curves.len(), |t| {
            trial_counts(
                &point.chan,
                &point.code,
                point.preamble_len,
                cfg.frame.messages_per_frame,
                point.gamma,
                cfg.run.noiseless,
                &curves,
                cfg.run.master_seed,
                &[SWEEP_STREAM, pi as u64, t],
            )
        })?;
        for (&(variant, modulation), &c) in curves.iter().zip(&totals) {
            rows.push(ResultRow {
                sweep_value: point.sweep_value,
                variant,
                modulation,
                bits: c.bits,
                bit_errors: c.bit_errors,
                symbols: c.symbols,
                symbol_errors: c.symbol_errors,
            });
        }
    }
    let mut table = ResultTable::new(rows, cfg.run.master_seed, config_hash(cfg)?);
    table.wall = started.elapsed();
    Ok(table)
}

/// Validates the config and runs the whole sweep.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultTable> {
    cfg.validate()?;
    run_scoped(opts, || run_experiment_inner(cfg))
}

/// Runs `job` inside a worker pool of the requested size.  Scheduling only:
/// results do not depend on the pool.
#[cfg(feature = "parallel")]
pub(crate) fn run_scoped<T>(opts: RunOptions, job: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    if opts.workers == 0 {
        job()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| crate::Error::Config(format!("worker pool: {e}")))?;
        pool.install(job)
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn run_scoped<T>(opts: RunOptions, job: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    let _ = opts;
    job()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{
        CodeConfig, FrameConfig, RunConfig, ScenarioConfig, TagConfig,
    };

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioConfig {
                d01: 27.0,
                n_r: 4,
                tag: TagConfig::polar(2.0),
            },
            frame: FrameConfig {
                preamble_len: 8,
                messages_per_frame: 4,
            },
            code: CodeConfig::uncoded(),
            sweep: SweepAxis::GammaDb(vec![40.0, 50.0]),
            run: RunConfig {
                gamma_db: 40.0,
                trials: 20,
                master_seed: 11,
                noiseless: false,
                modulations: vec![Modulation::Bpsk, Modulation::Ook],
                variants: vec![Variant::Lr, Variant::CoherentIdeal, Variant::Energy],
            },
        }
    }

    #[test]
    fn row_grid_and_bookkeeping() {
        let cfg = small_config();
        let table = run_experiment(&cfg, RunOptions::default()).unwrap();
        // 3 variants x 2 modulations minus energy/bpsk, per sweep point.
        assert_eq!(table.rows.len(), 2 * 5);
        for row in &table.rows {
            assert_eq!(row.bits, cfg.run.trials * 4, "uncoded: one bit per message");
            assert_eq!(row.symbols, cfg.run.trials * 4);
            assert!(row.bit_errors <= row.bits);
            assert_eq!(
                row.bit_errors, row.symbol_errors,
                "uncoded symbols are single bits"
            );
        }
        assert!(table.rows.iter().any(|r| r.sweep_value == 50.0));
        assert_ne!(table.config_hash, 0);
    }

    #[test]
    fn noiseless_chain_has_no_systematic_inversion() {
        // With the noise draw off, the features collapse onto two rays from
        // the origin.  The genie detector splits them exactly.  The trained
        // rules keep a small near-origin ambiguity (their boundaries do not
        // pass through the origin), so those rates must merely stay far from
        // the coin-flip of a miswired chain.
        let mut cfg = small_config();
        cfg.run.noiseless = true;
        cfg.run.trials = 10;
        cfg.frame.preamble_len = 16;
        cfg.run.modulations = vec![Modulation::Bpsk];
        cfg.run.variants = vec![
            Variant::Lr,
            Variant::Lda,
            Variant::Knn,
            Variant::CoherentIdeal,
        ];
        let table = run_experiment(&cfg, RunOptions::default()).unwrap();
        for row in &table.rows {
            let label = row.curve_label();
            if row.variant == Variant::CoherentIdeal {
                assert_eq!(row.bit_errors, 0, "{label} at {}", row.sweep_value);
            } else {
                assert!(
                    5 * row.bit_errors <= row.bits,
                    "{label} at {}: {} of {} bits",
                    row.sweep_value,
                    row.bit_errors,
                    row.bits
                );
            }
        }
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg = small_config();
        let a = run_experiment(&cfg, RunOptions::default())
            .unwrap()
            .to_csv();
        let b = run_experiment(&cfg, RunOptions::default())
            .unwrap()
            .to_csv();
        assert_eq!(a, b);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_the_bytes() {
        let cfg = small_config();
        let one = run_experiment(&cfg, RunOptions { workers: 1 })
            .unwrap()
            .to_csv();
        let three = run_experiment(&cfg, RunOptions { workers: 3 })
            .unwrap()
            .to_csv();
        assert_eq!(one, three);
    }

    #[test]
    fn other_axes_resolve() {
        let mut cfg = small_config();
        cfg.sweep = SweepAxis::NR(vec![2, 4]);
        cfg.run.trials = 4;
        cfg.run.variants = vec![Variant::CoherentIdeal];
        cfg.run.modulations = vec![Modulation::Bpsk];
        let t = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 2);

        let mut cfg = small_config();
        cfg.sweep = SweepAxis::CodeOrder(vec![1, 2]);
        cfg.code = CodeConfig::hadamard(1);
        cfg.run.trials = 4;
        cfg.run.variants = vec![Variant::CoherentIdeal];
        cfg.run.modulations = vec![Modulation::Bpsk];
        let t = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert_eq!(
            t.rows[0].bits,
            4 * 4 * 2,
            "order 1 carries two bits per message"
        );
        assert_eq!(
            t.rows[1].bits,
            4 * 4 * 3,
            "order 2 carries three bits per message"
        );

        let mut cfg = small_config();
        cfg.sweep = SweepAxis::PreambleLen(vec![8, 16]);
        cfg.run.trials = 4;
        cfg.run.variants = vec![Variant::Lr];
        cfg.run.modulations = vec![Modulation::Bpsk];
        let t = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn array_sweep_at_base_size_matches_plain_run() {
        // The array axis rescales gamma by physical capture; at the base
        // size the ratio is one, so the point must reproduce a plain run
        // exactly (same point index, same derived seeds).
        let mut cfg = small_config();
        cfg.run.trials = 6;
        cfg.run.variants = vec![Variant::CoherentIdeal];
        cfg.run.modulations = vec![Modulation::Bpsk];
        cfg.sweep = SweepAxis::GammaDb(vec![cfg.run.gamma_db]);
        let plain = run_experiment(&cfg, RunOptions::default()).unwrap();
        cfg.sweep = SweepAxis::NR(vec![cfg.scenario.n_r]);
        let swept = run_experiment(&cfg, RunOptions::default()).unwrap();
        for (p, s) in plain.rows.iter().zip(&swept.rows) {
            assert_eq!(
                (p.bits, p.bit_errors, p.symbols, p.symbol_errors),
                (s.bits, s.bit_errors, s.symbols, s.symbol_errors),
                "base-size array point diverged from the plain run"
            );
        }
    }

    #[test]
    fn paired_draws_share_randomness_across_modulations() {
        // With a phase-only and an on-off frame from the same trial path,
        // the silent blocks must be identical samples.
        let cfg = small_config();
        let geom =
            build_linear_scenario(27.0, 4, cfg.scenario.tag.to_placement().unwrap()).unwrap();
        let chan = channel_state(&raw_gains(&geom), &geom);
        let code = Code::uncoded();
        let mut frames = Vec::new();
        for modulation in [Modulation::Bpsk, Modulation::Ook] {
            let mut rng = trial_rng(5, &[SWEEP_STREAM, 0, 0]);
            let msgs = draw_messages(&mut rng, 4, code.message_count());
            frames.push(simulate_frame(
                &chan, &code, modulation, 8, &msgs, 100.0, false, &mut rng,
            ));
        }
        let (b, o) = (&frames[0], &frames[1]);
        for i in b.layout.silent_block() {
            for l in 0..4 {
                assert_eq!(b.y.get(l, i), o.y.get(l, i));
            }
        }
    }
}
