//! Received-signal synthesis.
//!
//! Each slot carries one ambient symbol s[i] ~ CN(0,1) through the direct
//! path and, scaled by the tag chip x[i], through the backscatter path:
//!
//! y[i] = sqrt(γ)·(a·s[i] + (η₁a + η₂c)·e^{jφ}·s[i]·x[i]) + ω[i]
//!
//! with per-element noise ω_l[i] ~ CN(0,1).  γ is the direct-path SNR, so
//! the tag signal arrives at γ·Δ and the detectable part of it at γ·η₂².
//!
//! The ambient and noise draws are taken separately from the chip pattern,
//! which lets one trial reuse identical randomness across modulations and
//! receiver variants for paired comparisons.

use crate::codec::{frame_chips, Code, FrameLayout, Modulation};
use crate::geometry::ChannelState;
use crate::linalg::CMat;
use crate::C64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One CN(0,1) sample: independent real and imaginary parts of variance 1/2.
pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Ambient symbol sequence for `len` slots.
pub fn draw_ambient(rng: &mut impl Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

/// Receiver noise, one column per slot, filled column by column.
pub fn draw_noise(rng: &mut impl Rng, n_r: usize, len: usize) -> CMat {
    let mut m = CMat::zeros(n_r, len);
    for i in 0..len {
        let col = m.col_mut(i);
        for entry in col {
            *entry = complex_normal(rng);
        }
    }
    m
}

/// Uniform message indices for a codebook of `message_count` entries.
pub fn draw_messages(rng: &mut impl Rng, count: usize, message_count: u32) -> Vec<u32> {
    (0..count)
        .map(|_| rng.gen_range(0..message_count))
        .collect()
}

/// Builds the measurement matrix for a chip sequence.  `ambient` supplies
/// s[i] per slot; `noise` is added when given and omitted for noiseless
/// runs.  Chips outside {-1, 0, 1} are rejected in debug builds.
pub fn synthesize(
    chan: &ChannelState,
    gamma: f64,
    chips: &[i8],
    ambient: &[C64],
    noise: Option<&CMat>,
) -> CMat {
    assert!(
        ambient.len() == chips.len(),
        "ambient draw covers {} slots, chips need {}",
        ambient.len(),
        chips.len()
    );
    let n_r = chan.a.len();
    if let Some(w) = noise {
        assert!(
            w.rows() == n_r && w.cols() == chips.len(),
            "noise is {}x{}, need {}x{}",
            w.rows(),
            w.cols(),
            n_r,
            chips.len()
        );
    }

    // The slot profile depends on the chip only through x in {-1, 0, +1};
    // precompute the three combined steering vectors.
    let tag_dir: Vec<C64> = chan
        .a
        .iter()
        .zip(&chan.c)
        .map(|(a, c)| a * chan.eta1 + c * chan.eta2)
        .collect();
    let rot = C64::from_polar(1.0, chan.phi);
    let profile = |x: f64| -> Vec<C64> {
        chan.a
            .iter()
            .zip(&tag_dir)
            .map(|(a, t)| a + t * rot * x)
            .collect()
    };
    let profiles = [profile(-1.0), profile(0.0), profile(1.0)];

    let sqrt_gamma = gamma.sqrt();
    let mut y = CMat::zeros(n_r, chips.len());
    for (i, &chip) in chips.iter().enumerate() {
        debug_assert!((-1..=1).contains(&chip), "chip {chip} out of alphabet");
        let v = &profiles[(chip + 1) as usize];
        let scale = ambient[i] * sqrt_gamma;
        let col = y.col_mut(i);
        for (l, entry) in col.iter_mut().enumerate() {
            *entry = v[l] * scale;
        }
        if let Some(w) = noise {
            let wcol = w.col(i);
            let col = y.col_mut(i);
            for (entry, n) in col.iter_mut().zip(wcol) {
                *entry += n;
            }
        }
    }
    y
}

/// A synthesized frame together with its layout and transmitted chips.
#[derive(Debug, Clone)]
pub struct FrameSignal {
    pub y: CMat,
    pub layout: FrameLayout,
    pub chips: Vec<i8>,
}

/// Convenience wrapper: encode, modulate and synthesize one frame, drawing
/// ambient symbols and (unless `noiseless`) receiver noise from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_frame(
    chan: &ChannelState,
    code: &Code,
    modulation: Modulation,
    block_len: usize,
    messages: &[u32],
    gamma: f64,
    noiseless: bool,
    rng: &mut impl Rng,
) -> FrameSignal {
    let chips = frame_chips(code, modulation, block_len, messages);
    let layout = FrameLayout::new(block_len, messages.len() * code.n());
    let ambient = draw_ambient(rng, chips.len());
    let noise = if noiseless {
        None
    } else {
        Some(draw_noise(rng, chan.a.len(), chips.len()))
    };
    let y = synthesize(chan, gamma, &chips, &ambient, noise.as_ref());
    FrameSignal { y, layout, chips }
}
