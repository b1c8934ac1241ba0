//! Fast invariant suite behind the `selftest` CLI subcommand: a few
//! seconds of checks that exercise every layer, for verifying a build or a
//! new machine without running the full test suite.

use crate::analytic::{CoherentDetector, EnergyDetector, LinkParams};
use crate::codec::{Code, Modulation};
use crate::experiment::config::{
    CodeConfig, ExperimentConfig, FrameConfig, RunConfig, ScenarioConfig, SweepAxis, TagConfig,
};
use crate::experiment::runner::{run_experiment, RunOptions};
use crate::geometry::{
    build_linear_scenario, channel_state, raw_gains, ChannelState, TagPlacement,
};
use crate::linalg::inner;
use crate::receiver::{demodulate_frame, GenieLink, Variant};
use crate::sim::{db_to_linear, linear_to_db, simulate_frame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<(), String>;

pub struct SelfTestReport {
    pub results: Vec<(&'static str, Check)>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|(_, r)| r.is_ok())
    }

    /// One line per check, "ok name" or "FAIL name: reason".
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, result) in &self.results {
            match result {
                Ok(()) => out.push_str(&format!("ok   {name}\n")),
                Err(why) => out.push_str(&format!("FAIL {name}: {why}\n")),
            }
        }
        out
    }
}

fn ensure(cond: bool, why: &str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(why.to_string())
    }
}

fn canonical_channel() -> ChannelState {
    let geom = build_linear_scenario(27.0, 8, TagPlacement::polar(2.0))
        .expect("canonical scenario is valid");
    channel_state(&raw_gains(&geom), &geom)
}

fn check_geometry() -> Check {
    let chan = canonical_channel();
    ensure(!chan.degenerate, "canonical tag must be detectable")?;
    ensure(
        inner(&chan.a, &chan.c).norm() < 1e-10,
        "direction split must be orthogonal",
    )?;
    let mut residual = 0.0;
    for l in 0..chan.a.len() {
        residual += (chan.h[l] - (chan.eta1 * chan.a[l] + chan.eta2 * chan.c[l])).norm_sqr();
    }
    ensure(residual.sqrt() < 1e-10, "h must decompose along a and c")?;
    ensure(
        (chan.delta - (chan.eta1.norm_sqr() + chan.eta2 * chan.eta2)).abs() < 1e-12,
        "power split must be exact",
    )?;
    let delta_db = linear_to_db(chan.delta);
    ensure(
        (delta_db + 31.2).abs() < 1.0,
        &format!("canonical backscatter ratio drifted: {delta_db:.2} dB"),
    )
}

fn check_code() -> Check {
    for code in [Code::hadamard(3).unwrap(), Code::simplex(3).unwrap()] {
        let mut min_distance = usize::MAX;
        for i in 0..code.message_count() {
            for j in (i + 1)..code.message_count() {
                let d = code
                    .encode(i)
                    .iter()
                    .zip(code.encode(j))
                    .filter(|(a, b)| a != b)
                    .count();
                min_distance = min_distance.min(d);
            }
        }
        ensure(min_distance == 8, "order-3 codes must have distance 8")?;
    }
    let code = Code::hadamard(2).unwrap();
    for msg in 0..code.message_count() {
        let word = code.encode(msg).to_vec();
        for flip in 0..code.n() {
            let mut noisy = word.clone();
            noisy[flip] ^= 1;
            if code.decode(&noisy) != msg {
                return Err(format!("single flip at chip {flip} broke message {msg}"));
            }
        }
    }
    Ok(())
}

fn check_eigenvalues() -> Check {
    let chan = canonical_channel();
    for gamma_db in [10.0, 20.0, 30.0] {
        let link = LinkParams::from_channel(&chan, db_to_linear(gamma_db));
        for x in [-1.0, 0.0, 1.0] {
            let ald = crate::analytic::conditional_ald(&link, x);
            let eps = crate::analytic::conditional_epsilon(&link, x);
            let spread = crate::analytic::conditional_spread(&link, x);
            ensure(
                ald.lambda1() < 0.0 && ald.lambda2() > 0.0,
                "eigenvalues must straddle zero",
            )?;
            ensure(
                (ald.lambda1() + ald.lambda2() - 2.0 * eps).abs() < 1e-9 * spread.max(1.0),
                "eigenvalue sum identity failed",
            )?;
            ensure(
                (ald.lambda1() * ald.lambda2() + spread).abs() < 1e-9 * spread.max(1.0),
                "eigenvalue product identity failed",
            )?;
        }
    }
    Ok(())
}

fn check_detectors() -> Check {
    let chan = canonical_channel();
    let link = LinkParams::from_channel(&chan, db_to_linear(45.0));
    let pe_bpsk = CoherentDetector::for_link(&link, Modulation::Bpsk).error_probability();
    let pe_ook = CoherentDetector::for_link(&link, Modulation::Ook).error_probability();
    ensure(
        pe_bpsk > 0.0 && pe_ook <= 0.5,
        "error probabilities must be proper",
    )?;
    ensure(pe_bpsk < pe_ook, "phase modulation must beat on-off keying")?;
    ensure(
        EnergyDetector::new(0.0).error_probability() == 0.5,
        "zero effective SNR must be a coin flip",
    )?;
    let ald = crate::analytic::conditional_ald(&link, 1.0);
    let at_zero = -ald.lambda1() / (ald.lambda2() - ald.lambda1());
    ensure(
        (ald.cdf(0.0) - at_zero).abs() < 1e-12,
        "distribution value at zero",
    )
}

fn check_noiseless_roundtrip() -> Check {
    let chan = canonical_channel();
    let code = Code::hadamard(2).unwrap();
    let gamma = db_to_linear(40.0);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let messages: Vec<u32> = (0..4)
        .map(|_| rng.gen_range(0..code.message_count()))
        .collect();
    let sig = simulate_frame(
        &chan,
        &code,
        Modulation::Bpsk,
        16,
        &messages,
        gamma,
        true,
        &mut rng,
    );
    for variant in Variant::ALL {
        if !variant.supports(Modulation::Bpsk) {
            continue;
        }
        let out = demodulate_frame(
            &sig.y,
            sig.layout,
            Modulation::Bpsk,
            &code,
            variant,
            Some(GenieLink { chan: &chan, gamma }),
        )
        .map_err(|e| e.to_string())?;
        if out.messages != messages {
            return Err(format!("{} misdecoded a noiseless frame", variant.label()));
        }
    }
    Ok(())
}

fn check_determinism() -> Check {
    let cfg = ExperimentConfig {
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
        sweep: SweepAxis::GammaDb(vec![45.0]),
        run: RunConfig {
            gamma_db: 45.0,
            trials: 6,
            master_seed: 3,
            noiseless: false,
            modulations: vec![Modulation::Bpsk],
            variants: vec![Variant::Lr],
        },
    };
    let a = run_experiment(&cfg, RunOptions::default())
        .map_err(|e| e.to_string())?
        .to_csv();
    let b = run_experiment(&cfg, RunOptions::default())
        .map_err(|e| e.to_string())?
        .to_csv();
    ensure(a == b, "rerun changed the output")?;
    #[cfg(feature = "parallel")]
    {
        let two = run_experiment(&cfg, RunOptions { workers: 2 })
            .map_err(|e| e.to_string())?
            .to_csv();
        ensure(a == two, "worker count changed the output")?;
    }
    Ok(())
}

pub fn run_selftest() -> SelfTestReport {
    SelfTestReport {
        results: vec![
            ("geometry decomposition", check_geometry()),
            ("code distance and correction", check_code()),
            ("eigenvalue identities", check_eigenvalues()),
            ("detector sanity", check_detectors()),
            ("noiseless roundtrip", check_noiseless_roundtrip()),
            ("deterministic rerun", check_determinism()),
        ],
    }
}
