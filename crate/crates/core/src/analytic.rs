//! Closed-form detection analysis.
//!
//! With the directions known, the coherent statistic for one slot is
//!
//! ζ = Re{ e^{-jφ} (yᴴa)(cᴴy) }
//!
//! which is an indefinite quadratic form in zero-mean complex Gaussians, so
//! ζ follows an asymmetric Laplace law whose two exponential scales are the
//! eigenvalues λ₁ < 0 < λ₂ of the 2x2 matrix coupling the (a, c)
//! projections of the received signal.  This module carries that law
//! ([`Ald`]), the per-symbol eigenvalues, the exact maximum-likelihood
//! decision rule over ζ with its error probability
//! ([`CoherentDetector`]), and the energy detector used for non-coherent
//! reception of an on-off tag ([`EnergyDetector`]).
//!
//! Error probabilities assume equally likely symbols.

use crate::codec::Modulation;
use crate::geometry::ChannelState;
use crate::C64;

/// Channel scalars the closed forms depend on.
#[derive(Debug, Clone, Copy)]
pub struct LinkParams {
    /// Direct-path SNR (linear).
    pub gamma: f64,
    /// Backscatter leakage along the direct path.
    pub eta1: C64,
    /// Detectable backscatter component, real and nonnegative.
    pub eta2: f64,
    /// |η₁|² + η₂².
    pub delta: f64,
    /// Excess-path phase offset.
    pub phi: f64,
}

impl LinkParams {
    pub fn from_channel(chan: &ChannelState, gamma: f64) -> LinkParams {
        LinkParams {
            gamma,
            eta1: chan.eta1,
            eta2: chan.eta2,
            delta: chan.delta,
            phi: chan.phi,
        }
    }

    /// SNR of the detectable tag component, γη₂².
    pub fn detectable_snr(&self) -> f64 {
        self.gamma * self.eta2 * self.eta2
    }
}

/// Asymmetric Laplace law of the coherent statistic: the difference of two
/// independent exponentials with scales |λ₁| (left) and λ₂ (right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ald {
    lambda1: f64,
    lambda2: f64,
}

impl Ald {
    /// Builds the law from its eigenvalues, λ₁ < 0 < λ₂.
    pub fn from_eigenvalues(lambda1: f64, lambda2: f64) -> Ald {
        assert!(
            lambda1 < 0.0 && lambda2 > 0.0,
            "eigenvalues must straddle zero, got ({lambda1}, {lambda2})"
        );
        Ald { lambda1, lambda2 }
    }

    /// Builds the law from the half-trace ε and the (positive) negated
    /// determinant of the coupling matrix: λ = ε ± sqrt(ε² + spread).
    pub fn from_parts(epsilon: f64, spread: f64) -> Ald {
        assert!(spread > 0.0, "spread must be positive, got {spread}");
        let root = (epsilon * epsilon + spread).sqrt();
        Ald::from_eigenvalues(epsilon - root, epsilon + root)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn cdf(&self, z: f64) -> f64 {
        let d = self.lambda2 - self.lambda1;
        if z < 0.0 {
            -self.lambda1 / d * (-z / self.lambda1).exp()
        } else {
            1.0 - self.lambda2 / d * (-z / self.lambda2).exp()
        }
    }

    pub fn mean(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    pub fn variance(&self) -> f64 {
        self.lambda1 * self.lambda1 + self.lambda2 * self.lambda2
    }
}

/// Half-trace ε of the coupling matrix for symbol value `x`:
/// ε = (γ/2)·η₂·(Re{e^{jφ}η₁}·x² + x).
pub fn conditional_epsilon(link: &LinkParams, x: f64) -> f64 {
    let leak = (C64::from_polar(1.0, link.phi) * link.eta1).re;
    0.5 * link.gamma * link.eta2 * (leak * x * x + x)
}

/// Half-trace when the statistic skips the e^{-jφ} rotation and keeps the
/// raw real part: ε' = (γ/2)·η₂·x·(cos φ + Re{η₁}·x).  The negated
/// determinant is unchanged, so ignoring the phase costs the cos²φ share
/// of the useful energy.
pub fn conditional_epsilon_ignoring_phase(link: &LinkParams, x: f64) -> f64 {
    0.5 * link.gamma * link.eta2 * x * (link.phi.cos() + link.eta1.re * x)
}

/// Negated determinant of the coupling matrix for symbol value `x`:
/// (γ/4)·(1 + Δx² + 2Re{e^{jφ}η₁}x + 1/γ).  Always positive.
pub fn conditional_spread(link: &LinkParams, x: f64) -> f64 {
    let leak = (C64::from_polar(1.0, link.phi) * link.eta1).re;
    0.25 * link.gamma * (1.0 + link.delta * x * x + 2.0 * leak * x + 1.0 / link.gamma)
}

/// Law of the coherent statistic conditioned on the tag sending `x`.
pub fn conditional_ald(link: &LinkParams, x: f64) -> Ald {
    Ald::from_parts(conditional_epsilon(link, x), conditional_spread(link, x))
}

/// High-SNR, weak-tag eigenvalue shortcut: λ ≈ (γ/2)η₂x ∓ sqrt(γ)/2.
/// Requires γ >> 1 and γη₂² << 1; outside that corner the returned pair can
/// fail to straddle zero.
pub fn approx_eigenvalues(gamma: f64, eta2: f64, x: f64) -> (f64, f64) {
    let center = 0.5 * gamma * eta2 * x;
    let half_width = 0.5 * gamma.sqrt();
    (center - half_width, center + half_width)
}

/// Shape of the maximum-likelihood decision region over ζ, after merging
/// the per-branch threshold rules.  "Low" is symbol x0, "high" is x1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    /// The two conditional laws coincide; everything decides x0.
    AlwaysLow,
    /// Decide x1 everywhere.
    AlwaysHigh,
    /// Decide x1 when ζ exceeds the threshold.
    HighAbove { threshold: f64 },
    /// Decide x1 when ζ falls below the threshold.
    HighBelow { threshold: f64 },
    /// Decide x0 inside the band, x1 outside.
    LowInside { low: f64, high: f64 },
    /// Decide x1 inside the band, x0 outside.
    HighInside { low: f64, high: f64 },
}

/// Exact ML detector on the coherent statistic for a binary symbol pair.
///
/// The likelihood ratio is piecewise exponential, so each half-line
/// contributes one linear threshold; which side survives depends on the
/// ordering of the conditional eigenvalues.  All orderings are handled by
/// assembling the decide-x0 region explicitly.
#[derive(Debug, Clone)]
pub struct CoherentDetector {
    ald0: Ald,
    ald1: Ald,
    /// Branch slopes of the log-likelihood ratio: negative side, positive side.
    c1: f64,
    c2: f64,
    /// log of the ratio of eigenvalue spans, D₀/D₁.
    ln_ratio: f64,
    /// Decide-x0 region as disjoint closed intervals.
    low_region: Vec<(f64, f64)>,
    rule: DecisionRule,
}

impl CoherentDetector {
    /// Detector for the conditional laws of symbols x0 and x1.
    pub fn new(ald0: Ald, ald1: Ald) -> CoherentDetector {
        let d0 = ald0.lambda2 - ald0.lambda1;
        let d1 = ald1.lambda2 - ald1.lambda1;
        let ln_ratio = (d0 / d1).ln();
        let c1 = (ald0.lambda1 - ald1.lambda1) / (ald0.lambda1 * ald1.lambda1);
        let c2 = (ald0.lambda2 - ald1.lambda2) / (ald0.lambda2 * ald1.lambda2);
        let low_region = assemble_low_region(c1, c2, ln_ratio);
        let rule = classify(&low_region);
        CoherentDetector {
            ald0,
            ald1,
            c1,
            c2,
            ln_ratio,
            low_region,
            rule,
        }
    }

    /// Detector for a modulation over the given link.
    pub fn for_link(link: &LinkParams, modulation: Modulation) -> CoherentDetector {
        let (x0, x1) = modulation.symbols();
        CoherentDetector::new(conditional_ald(link, x0), conditional_ald(link, x1))
    }

    /// Per-branch thresholds (ln ratio over branch slope); infinite when a
    /// branch slope vanishes.
    pub fn thresholds(&self) -> (f64, f64) {
        (self.ln_ratio / self.c1, self.ln_ratio / self.c2)
    }

    pub fn rule(&self) -> DecisionRule {
        self.rule
    }

    pub fn alds(&self) -> (Ald, Ald) {
        (self.ald0, self.ald1)
    }

    /// ML decision from one statistic sample: 0 for x0, 1 for x1.
    /// Boundary samples resolve to x0.
    pub fn decide(&self, zeta: f64) -> u8 {
        let slope = if zeta < 0.0 { self.c1 } else { self.c2 };
        if zeta * slope >= self.ln_ratio {
            0
        } else {
            1
        }
    }

    fn low_probability(&self, ald: &Ald) -> f64 {
        self.low_region
            .iter()
            .map(|&(a, b)| ald.cdf(b) - ald.cdf(a))
            .sum()
    }

    /// Exact error probability of the ML rule with equally likely symbols.
    pub fn error_probability(&self) -> f64 {
        let miss0 = 1.0 - self.low_probability(&self.ald0);
        let miss1 = self.low_probability(&self.ald1);
        0.5 * (miss0 + miss1)
    }
}

/// Decide-x0 region: on each half-line the rule is ζ·slope >= ln_ratio,
/// intersected with the half-line and merged across the origin.
fn assemble_low_region(c1: f64, c2: f64, ln_ratio: f64) -> Vec<(f64, f64)> {
    let mut parts: Vec<(f64, f64)> = Vec::new();
    if c1 > 0.0 {
        let t1 = ln_ratio / c1;
        if t1 < 0.0 {
            parts.push((t1, 0.0));
        }
    } else if c1 < 0.0 {
        let t1 = ln_ratio / c1;
        parts.push((f64::NEG_INFINITY, t1.min(0.0)));
    } else if ln_ratio <= 0.0 {
        parts.push((f64::NEG_INFINITY, 0.0));
    }
    if c2 > 0.0 {
        let t2 = ln_ratio / c2;
        parts.push((t2.max(0.0), f64::INFINITY));
    } else if c2 < 0.0 {
        let t2 = ln_ratio / c2;
        if t2 >= 0.0 {
            parts.push((0.0, t2));
        }
    } else if ln_ratio <= 0.0 {
        parts.push((0.0, f64::INFINITY));
    }

    parts.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("interval bounds are never NaN")
    });
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for part in parts {
        match merged.last_mut() {
            Some(last) if part.0 <= last.1 => last.1 = last.1.max(part.1),
            _ => merged.push(part),
        }
    }
    merged
}

fn classify(low: &[(f64, f64)]) -> DecisionRule {
    match *low {
        [] => DecisionRule::AlwaysHigh,
        [(a, b)] if a == f64::NEG_INFINITY && b == f64::INFINITY => DecisionRule::AlwaysLow,
        [(a, b)] if a == f64::NEG_INFINITY => DecisionRule::HighAbove { threshold: b },
        [(a, b)] if b == f64::INFINITY => DecisionRule::HighBelow { threshold: a },
        [(a, b)] => DecisionRule::LowInside { low: a, high: b },
        [(a, b), (c, d)] if a == f64::NEG_INFINITY && d == f64::INFINITY => {
            DecisionRule::HighInside { low: b, high: c }
        }
        _ => unreachable!("the two branch rules cannot produce this region: {low:?}"),
    }
}

/// Regularized lower incomplete gamma of order 1: P(1, x) = 1 - e^{-x}.
fn gamma_p1(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// ML energy detector for an on-off tag after direct-path cancellation.
///
/// The per-slot statistic is |cᴴy|², exponential with mean 1 when the tag
/// is silent and mean 1 + g when it reflects, where g = γη₂².  A tag that
/// only flips phase never changes this energy, so the detector applies to
/// on-off signalling only.
#[derive(Debug, Clone, Copy)]
pub struct EnergyDetector {
    g: f64,
    threshold: f64,
}

impl EnergyDetector {
    /// Detector for a detectable tag SNR g >= 0.  At g = 0 the two
    /// hypotheses coincide; the threshold limit is 1 and errors are coin
    /// flips.
    pub fn new(g: f64) -> EnergyDetector {
        let g = g.max(0.0);
        let threshold = if g == 0.0 {
            1.0
        } else {
            (1.0 + 1.0 / g) * g.ln_1p()
        };
        EnergyDetector { g, threshold }
    }

    pub fn for_link(link: &LinkParams) -> EnergyDetector {
        EnergyDetector::new(link.detectable_snr())
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// 1 when the slot energy says "reflecting", else 0.
    pub fn decide(&self, energy: f64) -> u8 {
        if energy > self.threshold {
            1
        } else {
            0
        }
    }

    /// Exact error probability with equally likely symbols:
    /// (1/2)·(1 - P(1, T) + P(1, T/(1+g))).  Exactly 1/2 at g = 0.
    pub fn error_probability(&self) -> f64 {
        if self.g == 0.0 {
            return 0.5;
        }
        let t = self.threshold;
        0.5 * (1.0 - gamma_p1(t) + gamma_p1(t / (1.0 + self.g)))
    }
}
