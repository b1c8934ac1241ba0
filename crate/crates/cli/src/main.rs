//! Command line front end for the simulator: sweeps, coverage maps,
//! closed-form curves, a single-frame walkthrough and the self-test.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ambc_core::codec::Modulation;
use ambc_core::experiment::{
    analytic_curves, load_config, load_coverage_config, render_coverage_map, render_rate_plot,
    run_coverage_map, run_experiment, run_selftest, CoverageConfig, ExperimentConfig, PlotMetric,
    ResultTable, RunOptions, SweepAxis,
};
use ambc_core::geometry::{build_linear_scenario, channel_state, raw_gains};
use ambc_core::receiver::{demodulate_frame, GenieLink, Variant};
use ambc_core::seed::trial_rng;
use ambc_core::sim::{db_to_linear, draw_messages, simulate_frame};

#[derive(Parser)]
#[command(
    name = "ambc",
    version,
    about = "Backscatter link simulator and receiver bench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep from a config file and emit the rate table.
    BerSweep(BerSweepArgs),
    /// Evaluate error rates over a spatial grid of tag positions.
    Coverage(CoverageArgs),
    /// Evaluate the closed-form detector error probabilities.
    Analytic(AnalyticArgs),
    /// Simulate one frame and show what each receiver decodes.
    FrameDemo(FrameDemoArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct BerSweepArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count per sweep point.
    #[arg(long)]
    trials: Option<u64>,
    /// Restrict to a comma separated list of receiver variants.
    #[arg(long)]
    variants: Option<String>,
    /// Write the result table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render an SVG rate plot.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Plot the symbol error rate instead of the bit error rate.
    #[arg(long)]
    ser: bool,
    /// Worker threads for the Monte Carlo loop (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct CoverageArgs {
    /// Coverage config (TOML); omit to run the built-in map.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count per grid cell.
    #[arg(long)]
    trials: Option<u64>,
    /// Write the cell table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render an SVG heatmap.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Worker threads for the grid (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Experiment config (TOML) whose sweep axis lists the SNR points.
    #[arg(long)]
    config: PathBuf,
    /// Write the curve table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FrameDemoArgs {
    /// Experiment config (TOML); the demo runs at its base SNR.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Dump the raw antenna block as little-endian f64 re/im pairs.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::BerSweep(args) => ber_sweep(args),
        Command::Coverage(args) => coverage(args),
        Command::Analytic(args) => analytic(args),
        Command::FrameDemo(args) => frame_demo(args),
        Command::Selftest(args) => selftest(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_variant_list(list: &str) -> Result<Vec<Variant>> {
    let mut variants = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v = Variant::from_label(name).with_context(|| {
            let known: Vec<&str> = Variant::ALL.iter().map(|v| v.label()).collect();
            format!(
                "unknown variant {name:?}; expected one of {}",
                known.join(", ")
            )
        })?;
        variants.push(v);
    }
    if variants.is_empty() {
        bail!("the variant list is empty");
    }
    Ok(variants)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .context("writing to stdout")?;
        }
    }
    Ok(())
}

fn ber_sweep(args: BerSweepArgs) -> Result<ExitCode> {
    let mut cfg: ExperimentConfig =
        load_config(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.run.trials = trials;
    }
    if let Some(list) = &args.variants {
        cfg.run.variants = parse_variant_list(list)?;
    }
    let table: ResultTable = run_experiment(
        &cfg,
        RunOptions {
            workers: args.workers,
        },
    )?;
    emit(&table.to_csv(), args.out.as_deref())?;
    if let Some(plot_path) = &args.plot {
        let metric = if args.ser {
            PlotMetric::Ser
        } else {
            PlotMetric::Ber
        };
        let title = match metric {
            PlotMetric::Ber => "bit error rate",
            PlotMetric::Ser => "symbol error rate",
        };
        let svg = render_rate_plot(&table, metric, cfg.sweep.x_label(), title);
        std::fs::write(plot_path, svg)
            .with_context(|| format!("writing {}", plot_path.display()))?;
    }
    eprintln!(
        "{} rows in {:.1}s (seed {}, config hash {:016x})",
        table.rows.len(),
        table.wall.as_secs_f64(),
        table.master_seed,
        table.config_hash
    );
    Ok(ExitCode::SUCCESS)
}

fn coverage(args: CoverageArgs) -> Result<ExitCode> {
    let mut cfg: CoverageConfig = match &args.config {
        Some(path) => {
            load_coverage_config(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => CoverageConfig::default_map(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    let table = run_coverage_map(
        &cfg,
        RunOptions {
            workers: args.workers,
        },
    )?;
    emit(&table.to_csv(), args.out.as_deref())?;
    if let Some(map_path) = &args.map {
        std::fs::write(map_path, render_coverage_map(&table))
            .with_context(|| format!("writing {}", map_path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn analytic(args: AnalyticArgs) -> Result<ExitCode> {
    let cfg =
        load_config(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    let SweepAxis::GammaDb(gammas) = &cfg.sweep else {
        bail!(
            "the closed forms need a gamma_db sweep axis in {}",
            args.config.display()
        );
    };
    let csv = analytic_curves(&cfg.scenario, gammas)?;
    emit(&csv, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn chip_glyphs(chips: &[i8]) -> String {
    chips
        .iter()
        .map(|&c| match c {
            1 => '+',
            -1 => '-',
            _ => '0',
        })
        .collect()
}

fn frame_demo(args: FrameDemoArgs) -> Result<ExitCode> {
    let cfg =
        load_config(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    let seed = args.seed.unwrap_or(cfg.run.master_seed);
    let code = cfg.code.spec()?.build()?;
    let scenario = build_linear_scenario(
        cfg.scenario.d01,
        cfg.scenario.n_r,
        cfg.scenario.tag.to_placement()?,
    )?;
    let chan = channel_state(&raw_gains(&scenario), &scenario);
    let gamma = db_to_linear(cfg.run.gamma_db);

    println!(
        "scenario: d01 {}, {} antennas, tag at ({:.2}, {:.2})",
        cfg.scenario.d01, cfg.scenario.n_r, scenario.tag[0], scenario.tag[1]
    );
    println!(
        "link: detectable power {:.3e} ({:.1} dB), phase {:.1} deg",
        chan.delta,
        10.0 * chan.delta.log10(),
        chan.phi.to_degrees()
    );
    println!(
        "frame: {} preamble chips per block, {} messages of {} chips ({} bits each), snr {} dB, seed {seed}",
        cfg.frame.preamble_len,
        cfg.frame.messages_per_frame,
        code.n(),
        code.k(),
        cfg.run.gamma_db
    );

    for &modulation in &cfg.run.modulations {
        let mut rng = trial_rng(seed, &[0]);
        let messages = draw_messages(&mut rng, cfg.frame.messages_per_frame, code.message_count());
        let sig = simulate_frame(
            &chan,
            &code,
            modulation,
            cfg.frame.preamble_len,
            &messages,
            gamma,
            cfg.run.noiseless,
            &mut rng,
        );
        println!(
            "\n[{}] sent chips: {}",
            modulation.label(),
            chip_glyphs(&sig.chips)
        );
        println!("  sent messages: {:?}", messages);
        for &variant in &cfg.run.variants {
            if !variant.supports(modulation) {
                continue;
            }
            let genie = GenieLink { chan: &chan, gamma };
            let out =
                demodulate_frame(&sig.y, sig.layout, modulation, &code, variant, Some(genie))?;
            let wrong = out
                .messages
                .iter()
                .zip(&messages)
                .filter(|(a, b)| a != b)
                .count();
            println!(
                "  {:>18}: {:?}  ({} of {} wrong)",
                variant.label(),
                out.messages,
                wrong,
                messages.len()
            );
        }
        if let Some(dump) = &args.dump {
            let path = match modulation {
                Modulation::Bpsk => dump.clone(),
                Modulation::Ook => dump.with_extension("ook.bin"),
            };
            let mut bytes = Vec::with_capacity(16 * sig.y.rows() * sig.y.cols());
            for col in 0..sig.y.cols() {
                for value in sig.y.col(col) {
                    bytes.extend_from_slice(&value.re.to_le_bytes());
                    bytes.extend_from_slice(&value.im.to_le_bytes());
                }
            }
            std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "  dumped {} x {} complex samples (column major, le f64 re/im) to {}",
                sig.y.rows(),
                sig.y.cols(),
                path.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn selftest(_args: SelftestArgs) -> Result<ExitCode> {
    let report = run_selftest();
    print!("{}", report.render());
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}
