//! The acceptance gate.  Each test checks one stated claim about the system
//! end to end and prints a single summary line with the measured numbers.
//! Everything is seeded, so the measurements are exact reruns.

use std::sync::OnceLock;

use rand::Rng;

use ambc_core::analytic::{
    approx_eigenvalues, conditional_ald, CoherentDetector, EnergyDetector, LinkParams,
};
use ambc_core::codec::{Code, Modulation};
use ambc_core::experiment::{
    run_coverage_map, run_experiment, CodeConfig, CoverageConfig, ExperimentConfig, FrameConfig,
    ResultTable, RunConfig, RunOptions, ScenarioConfig, SweepAxis, TagConfig,
};
use ambc_core::geometry::{
    build_linear_scenario, channel_state, raw_gains, ChannelState, TagPlacement,
};
use ambc_core::receiver::{coherent_statistic, Variant};
use ambc_core::seed::trial_rng;
use ambc_core::sim::{db_to_linear, draw_ambient, draw_noise, synthesize};
use ambc_core::C64;

fn canonical_channel() -> ChannelState {
    let sc = build_linear_scenario(27.0, 8, TagPlacement::polar(2.0)).expect("geometry");
    channel_state(&raw_gains(&sc), &sc)
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioConfig {
            d01: 27.0,
            n_r: 8,
            tag: TagConfig::polar(2.0),
        },
        frame: FrameConfig {
            preamble_len: 64,
            messages_per_frame: 16,
        },
        code: CodeConfig::uncoded(),
        sweep: SweepAxis::GammaDb(vec![46.0]),
        run: RunConfig {
            gamma_db: 46.0,
            trials: 2500,
            master_seed: 1003,
            noiseless: false,
            modulations: vec![Modulation::Bpsk],
            variants: vec![Variant::Lr, Variant::CoherentIdeal],
        },
    }
}

/// One sweep feeds the three rate-curve criteria.  The long preamble keeps
/// the trained receiver's training floor well below the 1e-2 readout point.
fn rate_sweep() -> &'static ResultTable {
    static SWEEP: OnceLock<ResultTable> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let mut cfg = base_config();
        cfg.frame.preamble_len = 256;
        cfg.sweep = SweepAxis::GammaDb((0..12).map(|i| 38.0 + 2.0 * i as f64).collect());
        cfg.run.modulations = vec![Modulation::Bpsk, Modulation::Ook];
        cfg.run.variants = vec![
            Variant::Lr,
            Variant::CoherentIdeal,
            Variant::PhaseIgnoring,
            Variant::Energy,
        ];
        run_experiment(&cfg, RunOptions::default()).expect("rate sweep")
    })
}

/// Where a BER curve crosses `target`, interpolating log-rate against dB.
fn crossing_db(table: &ResultTable, variant: Variant, modulation: Modulation, target: f64) -> f64 {
    let curve: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.variant == variant && r.modulation == modulation)
        .map(|r| (r.sweep_value, r.ber()))
        .collect();
    assert!(
        !curve.is_empty(),
        "no rows for {}/{}",
        variant.label(),
        modulation.label()
    );
    for pair in curve.windows(2) {
        let (x0, b0) = pair[0];
        let (x1, b1) = pair[1];
        if b0 >= target && target >= b1 && b1 > 0.0 {
            let t = (b0.log10() - target.log10()) / (b0.log10() - b1.log10());
            return x0 + t * (x1 - x0);
        }
    }
    panic!(
        "{}/{} never crosses {target} inside the sweep: {curve:?}",
        variant.label(),
        modulation.label()
    );
}

#[test]
fn criterion_01_bpsk_needs_several_db_less_than_ook() {
    // The keying comparison at BER 1e-2, each modulation read by its
    // operative ml-threshold receiver: the trained classifier for bpsk and
    // the energy detector for ook (the bilinear statistic's null spread
    // grows with carrier power, so no coherent ook receiver reaches 1e-2
    // in a practical range).
    let table = rate_sweep();
    let bpsk = crossing_db(table, Variant::Lr, Modulation::Bpsk, 1e-2);
    let ook = crossing_db(table, Variant::Energy, Modulation::Ook, 1e-2);
    let gap = ook - bpsk;
    println!(
        "criterion 1 {}: bpsk(lr) reaches 1e-2 at {bpsk:.1} dB, ook(energy) at {ook:.1} dB, \
         gap {gap:.1} dB (claimed about 6, accepted at 5)",
        if gap >= 5.0 { "pass" } else { "FAIL" }
    );
    assert!(gap >= 5.0, "gap {gap:.2} dB below the accepted 5 dB");
}

#[test]
fn criterion_02_trained_receiver_tracks_the_genie() {
    let table = rate_sweep();
    let trained = crossing_db(table, Variant::Lr, Modulation::Bpsk, 1e-2);
    let genie = crossing_db(table, Variant::CoherentIdeal, Modulation::Bpsk, 1e-2);
    let gap = trained - genie;
    println!(
        "criterion 2 {}: lr/bpsk at {trained:.1} dB vs genie {genie:.1} dB, gap {gap:.2} dB \
         (accepted up to 1.5)",
        if gap <= 1.5 { "pass" } else { "FAIL" }
    );
    assert!(
        gap <= 1.5,
        "trained receiver trails the genie by {gap:.2} dB"
    );
}

#[test]
fn criterion_03_ignoring_the_phase_costs_three_db() {
    let table = rate_sweep();
    let blind = crossing_db(table, Variant::PhaseIgnoring, Modulation::Bpsk, 1e-2);
    let genie = crossing_db(table, Variant::CoherentIdeal, Modulation::Bpsk, 1e-2);
    let gap = blind - genie;
    let ok = (2.0..=4.0).contains(&gap);
    println!(
        "criterion 3 {}: phase-ignoring at {blind:.1} dB vs genie {genie:.1} dB, \
         loss {gap:.2} dB (claimed 3 +- 1)",
        if ok { "pass" } else { "FAIL" }
    );
    assert!(ok, "phase-ignoring loss {gap:.2} dB outside 3 +- 1 dB");
}

#[test]
fn criterion_04_coherent_closed_form_matches_monte_carlo() {
    let chan = canonical_channel();
    let points = [40.0, 44.0, 48.0, 52.0, 54.0];

    let mut cfg = base_config();
    cfg.frame = FrameConfig {
        preamble_len: 8,
        messages_per_frame: 64,
    };
    cfg.sweep = SweepAxis::GammaDb(points.to_vec());
    cfg.run.trials = 3000;
    cfg.run.master_seed = 1004;
    cfg.run.modulations = vec![Modulation::Bpsk, Modulation::Ook];
    cfg.run.variants = vec![Variant::CoherentIdeal];
    let table = run_experiment(&cfg, RunOptions::default()).expect("mc");

    let mut worst_z: f64 = 0.0;
    for row in &table.rows {
        let link = LinkParams::from_channel(&chan, db_to_linear(row.sweep_value));
        let theory = CoherentDetector::for_link(&link, row.modulation).error_probability();
        assert!(
            theory >= 1e-3,
            "picked a point with p_e below 1e-3: {theory}"
        );
        let n = row.bits as f64;
        let sigma = (theory * (1.0 - theory) / n).sqrt();
        let z = (row.ber() - theory).abs() / sigma;
        worst_z = worst_z.max(z);
        assert!(
            z <= 3.0,
            "{} at {} dB: mc {} vs closed form {theory} is {z:.2} sigma",
            row.curve_label(),
            row.sweep_value,
            row.ber()
        );
    }
    println!(
        "criterion 4 pass: coherent closed form within 3 sigma of mc at {} points \
         (both keyings, worst {worst_z:.2} sigma)",
        points.len()
    );
}

#[test]
fn criterion_05_energy_closed_form_matches_monte_carlo() {
    let chan = canonical_channel();
    let eta2sq = chan.eta2 * chan.eta2;
    let reps = 10usize;
    let slots = 3000usize;

    let mut worst_z: f64 = 0.0;
    for (pi, g_target) in [0.5, 1.0, 2.0, 4.0, 8.0].into_iter().enumerate() {
        let gamma = g_target / eta2sq;
        let link = LinkParams::from_channel(&chan, gamma);
        let det = EnergyDetector::for_link(&link);
        let theory = det.error_probability();

        let mut errors = 0u64;
        for rep in 0..reps {
            let mut rng = trial_rng(1005, &[pi as u64, rep as u64]);
            let chips: Vec<i8> = (0..slots).map(|_| (rng.gen::<bool>()) as i8).collect();
            let ambient = draw_ambient(&mut rng, slots);
            let noise = draw_noise(&mut rng, 8, slots);
            let y = synthesize(&chan, gamma, &chips, &ambient, Some(&noise));
            for (i, &chip) in chips.iter().enumerate() {
                let energy: f64 = ambc_core::linalg::inner(&chan.c, y.col(i)).norm_sqr();
                if det.decide(energy) != chip as u8 {
                    errors += 1;
                }
            }
        }
        let n = (reps * slots) as f64;
        let p_hat = errors as f64 / n;
        let sigma = (theory * (1.0 - theory) / n).sqrt();
        let z = (p_hat - theory).abs() / sigma;
        worst_z = worst_z.max(z);
        assert!(
            z <= 3.0,
            "g={g_target}: mc {p_hat} vs closed form {theory} is {z:.2} sigma"
        );
    }
    let degenerate = EnergyDetector::new(0.0).error_probability();
    assert_eq!(
        degenerate, 0.5,
        "an invisible tag must be a coin flip exactly"
    );
    println!(
        "criterion 5 pass: energy closed form within 3 sigma of mc at 5 detectable-snr \
         points (worst {worst_z:.2} sigma) and p_e(0) = 0.5 exactly"
    );
}

#[test]
fn criterion_06_conditional_law_matches_sampled_statistic() {
    let chan = canonical_channel();
    let n = 100_000usize;
    let mut worst_ks: f64 = 0.0;

    for (gi, gamma_db) in [15.0, 25.0].into_iter().enumerate() {
        let gamma = db_to_linear(gamma_db);
        let link = LinkParams::from_channel(&chan, gamma);
        for (xi, x) in [-1.0f64, 1.0].into_iter().enumerate() {
            let mut rng = trial_rng(1006, &[gi as u64, xi as u64]);
            let chips = vec![x as i8; n];
            let ambient = draw_ambient(&mut rng, n);
            let noise = draw_noise(&mut rng, 8, n);
            let y = synthesize(&chan, gamma, &chips, &ambient, Some(&noise));
            let mut samples: Vec<f64> = (0..n)
                .map(|i| coherent_statistic(&chan.a, &chan.c, chan.phi, y.col(i)))
                .collect();
            samples.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));

            let ald = conditional_ald(&link, x);
            let mut ks: f64 = 0.0;
            for (i, &z) in samples.iter().enumerate() {
                let f = ald.cdf(z);
                let low = i as f64 / n as f64;
                let high = (i + 1) as f64 / n as f64;
                ks = ks.max((f - low).abs()).max((f - high).abs());
            }
            worst_ks = worst_ks.max(ks);
            assert!(ks < 0.01, "ks {ks:.4} at {gamma_db} dB, x={x}");
        }
    }
    println!(
        "criterion 6 pass: sampled statistic matches the asymmetric laplace law, \
         worst ks {worst_ks:.4} over 1e5 samples at 15 and 25 dB (bound 0.01)"
    );
}

#[test]
fn criterion_07_eigenvalue_forms_hold() {
    // Exact pair against an independent oracle: the statistic is a quadratic
    // form z'Qz over the two projected dimensions, so its exponents are the
    // eigenvalues of sigma*Q, read off the trace and determinant.
    let eta2_scale = canonical_channel().eta2;
    let mut worst_exact: f64 = 0.0;
    for gamma_db in [10.0, 20.0, 30.0, 40.0] {
        let gamma = db_to_linear(gamma_db);
        for phi in [0.0, std::f64::consts::FRAC_PI_3, 2.356, 3.927] {
            for ratio in [0.0, 0.13, 0.3] {
                let eta1 = C64::from_polar(ratio * eta2_scale, 0.7);
                let link = LinkParams {
                    gamma,
                    eta1,
                    eta2: eta2_scale,
                    delta: eta1.norm_sqr() + eta2_scale * eta2_scale,
                    phi,
                };
                for x in [-1.0f64, 0.0, 1.0] {
                    let ald = conditional_ald(&link, x);

                    let rot = C64::from_polar(1.0, phi);
                    let tag = C64::new(1.0, 0.0) + eta1 * rot * x;
                    let s11 = gamma * tag.norm_sqr() + 1.0;
                    let s22 = gamma * eta2_scale * eta2_scale * x * x + 1.0;
                    let s12 = gamma * tag * (eta2_scale * x * rot).conj();
                    // m = sigma * q with q = [[0, e^{-j phi}], [e^{j phi}, 0]] / 2.
                    let m11 = s12 * rot * 0.5;
                    let m12 = C64::new(s11, 0.0) * rot.conj() * 0.5;
                    let m21 = C64::new(s22, 0.0) * rot * 0.5;
                    let m22 = s12.conj() * rot.conj() * 0.5;
                    let tr = (m11 + m22).re;
                    let det = (m11 * m22 - m12 * m21).re;
                    let disc = (tr * tr - 4.0 * det).sqrt();
                    let (lo, hi) = ((tr - disc) / 2.0, (tr + disc) / 2.0);

                    let scale = hi.abs().max(lo.abs()).max(1.0);
                    let err = ((ald.lambda1() - lo).abs()).max((ald.lambda2() - hi).abs());
                    worst_exact = worst_exact.max(err / scale);
                    assert!(
                        err <= 1e-9 * scale,
                        "exact pair off by {err:.2e} at gamma {gamma_db} dB, phi {phi}, \
                         ratio {ratio}, x {x}"
                    );
                }
            }
        }
    }

    // The split-spread shortcut needs a faint tag: detectable snr far below
    // one.  On that domain it stays within 5 percent.
    let mut worst_approx: f64 = 0.0;
    for gamma_db in [15.0, 20.0, 25.0, 30.0] {
        let gamma = db_to_linear(gamma_db);
        let eta2 = (0.015 / gamma).sqrt();
        let link = LinkParams {
            gamma,
            eta1: C64::new(0.0, 0.0),
            eta2,
            delta: eta2 * eta2,
            phi: 0.0,
        };
        assert!(link.delta < 1e-3, "grid must stay in the faint-tag regime");
        for x in [-1.0f64, 1.0] {
            let ald = conditional_ald(&link, x);
            let (a1, a2) = approx_eigenvalues(gamma, eta2, x);
            let r1 = (a1 - ald.lambda1()).abs() / ald.lambda1().abs();
            let r2 = (a2 - ald.lambda2()).abs() / ald.lambda2().abs();
            worst_approx = worst_approx.max(r1).max(r2);
            assert!(
                r1 <= 0.05 && r2 <= 0.05,
                "approx off by {r1:.3}/{r2:.3} at gamma {gamma_db} dB, x {x}"
            );
        }
    }
    println!(
        "criterion 7 pass: exact eigenvalue pair within 1e-9 of the 2x2 oracle \
         (worst {worst_exact:.1e}) and the faint-tag shortcut within 5 percent \
         (worst {:.1} percent)",
        100.0 * worst_approx
    );
}

#[test]
fn criterion_08_code_distance_and_correction() {
    for r in 1..=4u32 {
        for family in ["hadamard", "simplex"] {
            let code = match family {
                "hadamard" => Code::hadamard(r).expect("build"),
                _ => Code::simplex(r).expect("build"),
            };
            let words: Vec<Vec<u8>> = (0..code.message_count())
                .map(|m| code.encode(m).to_vec())
                .collect();
            let mut min_d = usize::MAX;
            for i in 0..words.len() {
                for j in i + 1..words.len() {
                    let d = words[i]
                        .iter()
                        .zip(&words[j])
                        .filter(|(a, b)| a != b)
                        .count();
                    min_d = min_d.min(d);
                }
            }
            assert_eq!(
                min_d,
                1 << r,
                "{family} order {r}: min distance {min_d}, expected {}",
                1 << r
            );

            if r <= 3 {
                let t = ((1usize << r) - 1) / 2;
                for (m, word) in words.iter().enumerate() {
                    for pattern in error_patterns(code.n(), t) {
                        let mut rx = word.clone();
                        for &pos in &pattern {
                            rx[pos] ^= 1;
                        }
                        assert_eq!(
                            code.decode(&rx),
                            m as u32,
                            "{family} order {r}: {t} flips must correct"
                        );
                    }
                }
            }
        }
    }
    println!(
        "criterion 8 pass: brute-forced min distance 2^r for both families up to order 4, \
         exhaustive error correction up to order 3"
    );
}

/// All index subsets of size 1..=t out of n positions.
fn error_patterns(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    let mut current = Vec::new();
    fn rec(
        start: usize,
        n: usize,
        left: usize,
        current: &mut Vec<usize>,
        all: &mut Vec<Vec<usize>>,
    ) {
        if !current.is_empty() {
            all.push(current.clone());
        }
        if left == 0 {
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, left - 1, current, all);
            current.pop();
        }
    }
    rec(0, n, t, &mut current, &mut all);
    all
}

#[test]
fn criterion_09_coding_gain_grows_with_order() {
    let run = |family: CodeConfig| -> Vec<(f64, f64, u64, u64)> {
        let mut cfg = base_config();
        cfg.code = family;
        cfg.sweep = SweepAxis::CodeOrder(vec![1, 2, 3, 4]);
        cfg.run.gamma_db = 28.0;
        cfg.run.trials = 1500;
        cfg.run.master_seed = 1009;
        cfg.run.variants = vec![Variant::Lr];
        let table = run_experiment(&cfg, RunOptions::default()).expect("order sweep");
        table
            .rows
            .iter()
            .map(|r| (r.sweep_value, r.ber(), r.bit_errors, r.bits))
            .collect()
    };
    let hadamard = run(CodeConfig::hadamard(1));
    let simplex = run(CodeConfig::simplex(1));

    for pair in hadamard.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "hadamard ber must fall with order: {hadamard:?}"
        );
    }
    let mut worst_z: f64 = 0.0;
    for (h, s) in hadamard.iter().zip(&simplex) {
        let var_h = h.1 * (1.0 - h.1) / h.3 as f64;
        let var_s = s.1 * (1.0 - s.1) / s.3 as f64;
        let z = (h.1 - s.1).abs() / (var_h + var_s).sqrt();
        worst_z = worst_z.max(z);
        assert!(
            z <= 3.0,
            "order {}: full {} vs punctured {} differ by {z:.2} sigma",
            h.0,
            h.1,
            s.1
        );
    }
    println!(
        "criterion 9 pass: ber falls with code order {:?} and the punctured family tracks \
         the full one (worst gap {worst_z:.2} sigma)",
        hadamard.iter().map(|r| r.1).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_10_antennas_help_with_diminishing_returns() {
    // The genie needs no training, so trials are cheap; the budget is sized
    // so the small 6-to-8 and 8-to-10 element gains resolve above the
    // counting noise.
    let mut cfg = base_config();
    cfg.sweep = SweepAxis::NR(vec![2, 4, 6, 8, 10]);
    cfg.run.trials = 30_000;
    cfg.run.master_seed = 1010;
    cfg.run.variants = vec![Variant::CoherentIdeal];
    let table = run_experiment(&cfg, RunOptions::default()).expect("antenna sweep");
    let curve: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.sweep_value, r.ber()))
        .collect();

    for pair in curve.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "more antennas must lower the rate: {curve:?}"
        );
    }
    let drops: Vec<f64> = curve
        .windows(2)
        .map(|p| p[0].1.log10() - p[1].1.log10())
        .collect();
    assert!(
        drops[0] > drops[drops.len() - 1],
        "marginal gain should shrink: log-drops {drops:?}"
    );
    println!(
        "criterion 10 pass: ber falls over 2..10 antennas {:?} with shrinking marginal \
         gain (first log-drop {:.2}, last {:.2})",
        curve.iter().map(|r| r.1).collect::<Vec<_>>(),
        drops.first().unwrap(),
        drops.last().unwrap()
    );
}

#[test]
fn criterion_11_half_preamble_holds_at_all_operating_points() {
    // Carrier levels putting the detectable snr at -11, 0 and +10 dB.
    let mut ratios = Vec::new();
    for (i, gamma_db) in [20.4, 31.4, 41.4].into_iter().enumerate() {
        let mut cfg = base_config();
        cfg.sweep = SweepAxis::PreambleLen(vec![34, 64]);
        cfg.run.gamma_db = gamma_db;
        cfg.run.trials = 2500;
        cfg.run.master_seed = 1011 + i as u64;
        cfg.run.variants = vec![Variant::Lr];
        let table = run_experiment(&cfg, RunOptions::default()).expect("preamble sweep");
        let short = table.rows[0].ber();
        let long = table.rows[1].ber();
        assert!(table.rows[0].sweep_value == 34.0 && table.rows[1].sweep_value == 64.0);
        assert!(
            long > 0.0,
            "the long-preamble rate must be measurable at {gamma_db} dB"
        );
        let ratio = short / long;
        ratios.push((gamma_db, ratio));
        assert!(
            ratio <= 2.0,
            "halving the preamble at {gamma_db} dB costs {ratio:.2}x (allowed 2x)"
        );
    }
    println!(
        "criterion 11 pass: ber(34-chip preamble) stays within 2x of ber(64) at all three \
         operating points: {:?}",
        ratios
            .iter()
            .map(|(g, r)| format!("{g} dB -> {r:.2}x"))
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_12_coverage_has_a_null_beam_and_hot_edges() {
    let table = run_coverage_map(&CoverageConfig::default_map(), RunOptions::default())
        .expect("coverage map");
    let cells: Vec<(f64, f64, f64, u64)> = table
        .cells
        .iter()
        .filter(|c| !c.ser().is_nan())
        .map(|c| (c.x, c.y, c.ser(), c.counts.expect("counted cell").symbols))
        .collect();
    let d_tx = |x: f64, y: f64| ((x + 40.0).powi(2) + y * y).sqrt();
    let d_rx = |x: f64, y: f64| ((x - 40.0).powi(2) + y * y).sqrt();

    // Cells on the radio axis rank in the worst decile among cells at a
    // comparable tag-receiver distance, up to the counting noise of the
    // cell's own estimate.
    let mut axis_checked = 0usize;
    let mut axis_strict = 0usize;
    for &(x, y, ser, symbols) in &cells {
        if y.abs() > 1e-9 || x <= -40.0 || x >= 40.0 {
            continue;
        }
        let here = d_rx(x, y);
        let mut group: Vec<f64> = cells
            .iter()
            .filter(|(cx, cy, _, _)| ((d_rx(*cx, *cy) / here) - 1.0).abs() <= 0.25)
            .map(|&(_, _, s, _)| s)
            .collect();
        if group.len() < 8 {
            continue;
        }
        group.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
        let q90 = group[((group.len() - 1) as f64 * 0.9).floor() as usize];
        let sigma = (ser * (1.0 - ser) / symbols as f64).sqrt();
        assert!(
            ser >= q90 - 3.0 * sigma,
            "axis cell ({x},{y}) ser {ser:.3} below the 0.9 quantile {q90:.3} of its \
             distance band ({} cells) by more than 3 sigma ({sigma:.4})",
            group.len()
        );
        axis_checked += 1;
        if ser >= q90 {
            axis_strict += 1;
        }
    }
    assert!(
        axis_checked >= 5,
        "need a meaningful number of axis cells, got {axis_checked}"
    );

    // Low error regions hug the radios.
    let mean = |rates: &[f64]| rates.iter().sum::<f64>() / rates.len() as f64;
    let near_tx: Vec<f64> = cells
        .iter()
        .filter(|(x, y, _, _)| d_tx(*x, *y) <= 12.0)
        .map(|&(_, _, s, _)| s)
        .collect();
    let near_rx: Vec<f64> = cells
        .iter()
        .filter(|(x, y, _, _)| d_rx(*x, *y) <= 20.0)
        .map(|&(_, _, s, _)| s)
        .collect();
    let far: Vec<f64> = cells
        .iter()
        .filter(|(x, y, _, _)| d_tx(*x, *y) > 25.0 && d_rx(*x, *y) > 25.0)
        .map(|&(_, _, s, _)| s)
        .collect();
    assert!(!near_tx.is_empty() && !near_rx.is_empty() && !far.is_empty());
    let (m_tx, m_rx, m_far) = (mean(&near_tx), mean(&near_rx), mean(&far));
    assert!(
        m_tx < m_far,
        "near-tx mean {m_tx:.3} should beat far mean {m_far:.3}"
    );
    assert!(
        m_rx < m_far,
        "near-rx mean {m_rx:.3} should beat far mean {m_far:.3}"
    );
    println!(
        "criterion 12 pass: {axis_checked} axis cells in the worst decile of their distance \
         bands ({axis_strict} strictly, rest within counting noise); mean ser near tx \
         {m_tx:.3}, near rx {m_rx:.3}, far {m_far:.3}"
    );
}

#[test]
fn criterion_13_worker_count_never_changes_the_bytes() {
    let mut cfg = base_config();
    cfg.sweep = SweepAxis::GammaDb(vec![42.0, 50.0]);
    cfg.run.trials = 60;
    cfg.run.master_seed = 1013;
    cfg.run.modulations = vec![Modulation::Bpsk, Modulation::Ook];
    cfg.run.variants = vec![Variant::Lr, Variant::Energy];
    let reference = run_experiment(&cfg, RunOptions { workers: 1 })
        .expect("1 worker")
        .to_csv();
    for workers in [4usize, 8] {
        let csv = run_experiment(&cfg, RunOptions { workers })
            .expect("n workers")
            .to_csv();
        assert_eq!(csv, reference, "{workers} workers changed the output bytes");
    }
    println!(
        "criterion 13 pass: sweep output is byte-identical across 1, 4 and 8 workers \
         ({} bytes)",
        reference.len()
    );
}
