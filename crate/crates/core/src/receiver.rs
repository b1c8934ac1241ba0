//! Receiver chain: direction estimation, per-slot features, chip detection
//! and block decoding.
//!
//! All variants share the front end.  The silent preamble block gives the
//! direct-path direction as the principal eigenvector of its sample
//! covariance; the training blocks, after projecting the direct path out,
//! give the tag direction the same way.  Each slot then collapses to the
//! paired projection v[i] = (y[i]ᴴâ)(ĉᴴy[i]), and the variants differ only
//! in how they turn v into chip decisions:
//!
//! * trained classifiers (logistic regression, linear discriminant,
//!   k-nearest neighbours) learn the two clusters of (Re v, Im v) from the
//!   training blocks,
//! * the coherent detectors threshold ζ = Re{e^{-jφ}v} with eigenvalue
//!   thresholds, using either the true channel or preamble estimates,
//! * the energy detector thresholds |ĉᴴy|², and
//! * the phase-ignoring reference thresholds Re{v} with the true channel.
//!
//! Decoded chips finally pass through minimum-distance block decoding.

use crate::analytic::{
    conditional_epsilon_ignoring_phase, conditional_spread, Ald, CoherentDetector, EnergyDetector,
    LinkParams,
};
use crate::codec::{Code, FrameLayout, Modulation};
use crate::geometry::ChannelState;
use crate::linalg::{inner, norm_sqr, principal_eigenpair, project_out, sample_covariance, CMat};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Power iteration settings for direction estimation.
const EIG_TOL: f64 = 1e-10;
const EIG_MAX_ITER: usize = 10_000;

/// Logistic regression settings: iteration cap, mean-gradient stopping
/// tolerance and L2 strength on the weights (never the intercept).
const LR_MAX_ITER: usize = 50;
const LR_GRAD_TOL: f64 = 1e-8;
const LR_L2: f64 = 1e-6;

/// Neighbours consulted by the k-NN classifier, clamped to the training
/// set size.
const KNN_K: usize = 23;

/// Receiver variants compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Trained logistic regression on (Re v, Im v).
    Lr,
    /// Trained linear discriminant on (Re v, Im v).
    Lda,
    /// Trained k-nearest neighbours on (Re v, Im v).
    Knn,
    /// Eigenvalue-threshold detector fed the true channel.
    CoherentIdeal,
    /// Eigenvalue-threshold detector fed preamble estimates.
    CoherentEstimated,
    /// Non-coherent energy detector; needs an amplitude-changing tag.
    Energy,
    /// Coherent detector that skips the phase rotation, as a reference for
    /// what the phase knowledge is worth.
    PhaseIgnoring,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Lr,
        Variant::Lda,
        Variant::Knn,
        Variant::CoherentIdeal,
        Variant::CoherentEstimated,
        Variant::Energy,
        Variant::PhaseIgnoring,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Lr => "lr",
            Variant::Lda => "lda",
            Variant::Knn => "knn",
            Variant::CoherentIdeal => "coherent_ideal",
            Variant::CoherentEstimated => "coherent_estimated",
            Variant::Energy => "energy",
            Variant::PhaseIgnoring => "phase_ignoring",
        }
    }

    pub fn from_label(label: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.label() == label)
    }

    /// An energy detector cannot see a phase-only tag, and the
    /// phase-ignoring reference is only meaningful where phase is the
    /// information carrier.
    pub fn supports(self, modulation: Modulation) -> bool {
        match self {
            Variant::Energy => modulation == Modulation::Ook,
            Variant::PhaseIgnoring => modulation == Modulation::Bpsk,
            _ => true,
        }
    }

    /// True for reference variants that are handed the exact channel.
    pub fn needs_truth(self) -> bool {
        matches!(self, Variant::CoherentIdeal | Variant::PhaseIgnoring)
    }
}

/// Estimated direct-path and tag directions, unit norm.
#[derive(Debug, Clone)]
pub struct DirectionEstimate {
    pub a_hat: Vec<C64>,
    pub c_hat: Vec<C64>,
}

/// Principal eigenvector of the silent-block sample covariance.
pub fn estimate_direct_direction(y: &CMat, layout: FrameLayout) -> Result<Vec<C64>> {
    let block = layout.silent_block();
    let cov = sample_covariance(&y.col_range(block.start, block.end));
    let (_, v) = principal_eigenpair(&cov, EIG_TOL, EIG_MAX_ITER)?;
    Ok(v)
}

/// Principal eigenvector of the training-block covariance after removing
/// the direct-path component.  A phase-only tag reflects during both
/// training blocks, an on-off tag only during the first, so the silent
/// half is skipped for OOK.
pub fn estimate_tag_direction(
    y: &CMat,
    layout: FrameLayout,
    modulation: Modulation,
    a_hat: &[C64],
) -> Result<Vec<C64>> {
    let ranges: &[Range<usize>] = match modulation {
        Modulation::Bpsk => &[layout.hi_block(), layout.lo_block()],
        Modulation::Ook => &[layout.hi_block()],
    };
    let total: usize = ranges.iter().map(|r| r.len()).sum();
    let mut residual = CMat::zeros(y.rows(), total);
    let mut out = 0;
    for range in ranges {
        for i in range.clone() {
            residual
                .col_mut(out)
                .copy_from_slice(&project_out(a_hat, y.col(i)));
            out += 1;
        }
    }
    let cov = sample_covariance(&residual);
    let (_, v) = principal_eigenpair(&cov, EIG_TOL, EIG_MAX_ITER)?;
    Ok(v)
}

pub fn estimate_directions(
    y: &CMat,
    layout: FrameLayout,
    modulation: Modulation,
) -> Result<DirectionEstimate> {
    let a_hat = estimate_direct_direction(y, layout)?;
    let c_hat = estimate_tag_direction(y, layout, modulation, &a_hat)?;
    Ok(DirectionEstimate { a_hat, c_hat })
}

/// Paired projection v = (yᴴa)(cᴴy) of one slot.
pub fn slot_pair(a: &[C64], c: &[C64], y_col: &[C64]) -> C64 {
    inner(a, y_col).conj() * inner(c, y_col)
}

/// Coherent statistic ζ = Re{e^{-jφ}·(yᴴa)(cᴴy)} of one slot.
pub fn coherent_statistic(a: &[C64], c: &[C64], phi: f64, y_col: &[C64]) -> f64 {
    (C64::from_polar(1.0, -phi) * slot_pair(a, c, y_col)).re
}

/// Classifier family for the trained variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    LogisticRegression,
    LinearDiscriminant,
    NearestNeighbors,
}

/// Binary logistic regression on 2-d features.
///
/// Features are standardized by their per-dimension root mean square
/// (no centering, so the origin stays fixed) and fitted by damped Newton
/// steps with an Armijo backtracking line search.  A small L2 penalty on
/// the weights keeps separable training sets from diverging.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    rms: [f64; 2],
    w: [f64; 2],
    bias: f64,
    pub iterations: usize,
}

fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^m) without overflow.
fn log1p_exp(m: f64) -> f64 {
    m.max(0.0) + (-m.abs()).exp().ln_1p()
}

impl LogisticRegression {
    pub fn train(features: &[[f64; 2]], labels: &[u8]) -> LogisticRegression {
        assert_eq!(features.len(), labels.len(), "one label per feature");
        assert!(!features.is_empty(), "cannot train on an empty set");
        let n = features.len() as f64;
        let mut rms = [0.0f64; 2];
        for f in features {
            rms[0] += f[0] * f[0];
            rms[1] += f[1] * f[1];
        }
        for r in &mut rms {
            *r = (*r / n).sqrt();
            if *r == 0.0 {
                *r = 1.0;
            }
        }
        let z: Vec<[f64; 2]> = features
            .iter()
            .map(|f| [f[0] / rms[0], f[1] / rms[1]])
            .collect();

        let loss = |theta: &[f64; 3]| -> f64 {
            let mut acc = 0.5 * LR_L2 * (theta[0] * theta[0] + theta[1] * theta[1]);
            for (zi, &yi) in z.iter().zip(labels) {
                let m = theta[0] * zi[0] + theta[1] * zi[1] + theta[2];
                acc += log1p_exp(m) - yi as f64 * m;
            }
            acc
        };

        let mut theta = [0.0f64; 3];
        let mut iterations = 0;
        for _ in 0..LR_MAX_ITER {
            let mut grad = [LR_L2 * theta[0], LR_L2 * theta[1], 0.0];
            let mut h = [[0.0f64; 3]; 3];
            h[0][0] = LR_L2;
            h[1][1] = LR_L2;
            for (zi, &yi) in z.iter().zip(labels) {
                let zi3 = [zi[0], zi[1], 1.0];
                let m = theta[0] * zi3[0] + theta[1] * zi3[1] + theta[2];
                let p = sigmoid(m);
                let r = p - yi as f64;
                let s = p * (1.0 - p);
                for a in 0..3 {
                    grad[a] += r * zi3[a];
                    for b in a..3 {
                        h[a][b] += s * zi3[a] * zi3[b];
                    }
                }
            }
            #[allow(clippy::needless_range_loop)]
            for a in 0..3 {
                for b in 0..a {
                    h[a][b] = h[b][a];
                }
            }
            let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if gmax <= LR_GRAD_TOL * n.max(1.0) {
                break;
            }
            let Some(step) = solve3(&h, &[-grad[0], -grad[1], -grad[2]]) else {
                break;
            };
            let descent = grad[0] * step[0] + grad[1] * step[1] + grad[2] * step[2];
            if descent >= 0.0 {
                break;
            }
            let base = loss(&theta);
            let mut t = 1.0;
            let mut accepted = false;
            while t >= 1e-6 {
                let cand = [
                    theta[0] + t * step[0],
                    theta[1] + t * step[1],
                    theta[2] + t * step[2],
                ];
                if loss(&cand) <= base + 1e-4 * t * descent {
                    theta = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            iterations += 1;
            if !accepted {
                break;
            }
        }
        LogisticRegression {
            rms,
            w: [theta[0], theta[1]],
            bias: theta[2],
            iterations,
        }
    }

    /// Linear score; the class-1 posterior is sigmoid of this.
    pub fn decision_value(&self, f: [f64; 2]) -> f64 {
        self.w[0] * f[0] / self.rms[0] + self.w[1] * f[1] / self.rms[1] + self.bias
    }

    pub fn predict(&self, f: [f64; 2]) -> u8 {
        if self.decision_value(f) > 0.0 {
            1
        } else {
            0
        }
    }
}

/// Gaussian elimination with partial pivoting for a symmetric 3x3 system.
/// Returns None when the matrix is numerically singular.
fn solve3(h: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&h[i]);
        m[i][3] = rhs[i];
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            #[allow(clippy::needless_range_loop)]
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut acc = m[i][3];
        for k in (i + 1)..3 {
            acc -= m[i][k] * x[k];
        }
        x[i] = acc / m[i][i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Fisher discriminant with a pooled covariance.  A relative ridge is
/// added when the pooled covariance is numerically singular, and the
/// `ridged` flag reports that it happened.
#[derive(Debug, Clone)]
pub struct LinearDiscriminant {
    w: [f64; 2],
    threshold: f64,
    pub ridged: bool,
}

impl LinearDiscriminant {
    pub fn train(features: &[[f64; 2]], labels: &[u8]) -> LinearDiscriminant {
        assert_eq!(features.len(), labels.len(), "one label per feature");
        let mut mean = [[0.0f64; 2]; 2];
        let mut count = [0usize; 2];
        for (f, &y) in features.iter().zip(labels) {
            let cls = usize::from(y > 0);
            mean[cls][0] += f[0];
            mean[cls][1] += f[1];
            count[cls] += 1;
        }
        assert!(
            count[0] > 0 && count[1] > 0,
            "both classes must appear in training"
        );
        for cls in 0..2 {
            mean[cls][0] /= count[cls] as f64;
            mean[cls][1] /= count[cls] as f64;
        }
        let mut s = [[0.0f64; 2]; 2];
        for (f, &y) in features.iter().zip(labels) {
            let cls = usize::from(y > 0);
            let d = [f[0] - mean[cls][0], f[1] - mean[cls][1]];
            s[0][0] += d[0] * d[0];
            s[0][1] += d[0] * d[1];
            s[1][1] += d[1] * d[1];
        }
        s[1][0] = s[0][1];
        let dof = (features.len().saturating_sub(2)).max(1) as f64;
        for row in &mut s {
            for v in row.iter_mut() {
                *v /= dof;
            }
        }
        let scale = 0.5 * (s[0][0] + s[1][1]);
        let det = s[0][0] * s[1][1] - s[0][1] * s[0][1];
        let ridged = det.is_nan() || det <= 1e-12 * scale * scale;
        if ridged {
            let eps = 1e-9 * scale.max(1.0);
            s[0][0] += eps;
            s[1][1] += eps;
        }
        let det = s[0][0] * s[1][1] - s[0][1] * s[0][1];
        let diff = [mean[1][0] - mean[0][0], mean[1][1] - mean[0][1]];
        let w = [
            (s[1][1] * diff[0] - s[0][1] * diff[1]) / det,
            (s[0][0] * diff[1] - s[0][1] * diff[0]) / det,
        ];
        let mid = [
            0.5 * (mean[0][0] + mean[1][0]),
            0.5 * (mean[0][1] + mean[1][1]),
        ];
        let threshold = w[0] * mid[0] + w[1] * mid[1];
        LinearDiscriminant {
            w,
            threshold,
            ridged,
        }
    }

    pub fn predict(&self, f: [f64; 2]) -> u8 {
        if self.w[0] * f[0] + self.w[1] * f[1] > self.threshold {
            1
        } else {
            0
        }
    }
}

/// Majority vote over the k closest training points.  Distance ties at the
/// neighbourhood boundary resolve by training index, vote ties by class 0,
/// so predictions are deterministic.
#[derive(Debug, Clone)]
pub struct NearestNeighbors {
    k: usize,
    points: Vec<[f64; 2]>,
    labels: Vec<u8>,
}

impl NearestNeighbors {
    pub fn train(features: &[[f64; 2]], labels: &[u8]) -> NearestNeighbors {
        assert_eq!(features.len(), labels.len(), "one label per feature");
        assert!(!features.is_empty(), "cannot train on an empty set");
        // An even k on a balanced training set can deadlock every vote, so
        // round down to odd after capping at the training size.
        let mut k = KNN_K.min(features.len());
        if k > 1 && k.is_multiple_of(2) {
            k -= 1;
        }
        NearestNeighbors {
            k,
            points: features.to_vec(),
            labels: labels.to_vec(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn predict(&self, f: [f64; 2]) -> u8 {
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = (p[0] - f[0]).powi(2) + (p[1] - f[1]).powi(2);
                (d, i)
            })
            .collect();
        order.sort_unstable_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        let ones: usize = order[..self.k]
            .iter()
            .map(|&(_, i)| self.labels[i] as usize)
            .sum();
        u8::from(2 * ones > self.k)
    }
}

/// A trained chip classifier of any family.
#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    Lr(LogisticRegression),
    Lda(LinearDiscriminant),
    Knn(NearestNeighbors),
}

impl TrainedClassifier {
    pub fn train(kind: ClassifierKind, features: &[[f64; 2]], labels: &[u8]) -> TrainedClassifier {
        match kind {
            ClassifierKind::LogisticRegression => {
                TrainedClassifier::Lr(LogisticRegression::train(features, labels))
            }
            ClassifierKind::LinearDiscriminant => {
                TrainedClassifier::Lda(LinearDiscriminant::train(features, labels))
            }
            ClassifierKind::NearestNeighbors => {
                TrainedClassifier::Knn(NearestNeighbors::train(features, labels))
            }
        }
    }

    pub fn predict(&self, f: [f64; 2]) -> u8 {
        match self {
            TrainedClassifier::Lr(m) => m.predict(f),
            TrainedClassifier::Lda(m) => m.predict(f),
            TrainedClassifier::Knn(m) => m.predict(f),
        }
    }
}

/// The true channel handed to the reference variants.
#[derive(Debug, Clone, Copy)]
pub struct GenieLink<'a> {
    pub chan: &'a ChannelState,
    pub gamma: f64,
}

/// Preamble-estimated link scalars for the practical coherent detector.
#[derive(Debug, Clone, Copy)]
pub struct EstimatedLink {
    pub params: LinkParams,
}

/// Estimates the link scalars from the preamble, given direction
/// estimates.  The mean paired projection over a training block is
/// γη₂x·e^{jφ} + γη₂η₁*x², so under BPSK the half-difference of the two
/// block means isolates γη₂e^{jφ} and the half-sum isolates γη₂η₁*.  The
/// on-off preamble has a single active block, so the leakage term cannot
/// be separated from the phase and η₁ is taken as zero.  γ comes from the
/// silent-block power, E‖y‖² = γ + n_r.  Phases here are relative to the
/// estimated directions, which is the frame the statistic is computed in.
pub fn estimate_link(
    y: &CMat,
    layout: FrameLayout,
    modulation: Modulation,
    dirs: &DirectionEstimate,
) -> EstimatedLink {
    let silent = layout.silent_block();
    let mut power = 0.0;
    for i in silent.clone() {
        power += norm_sqr(y.col(i));
    }
    let gamma = (power / silent.len() as f64 - y.rows() as f64).max(1e-6);

    let block_mean = |range: Range<usize>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in range.clone() {
            acc += slot_pair(&dirs.a_hat, &dirs.c_hat, y.col(i));
        }
        acc / range.len() as f64
    };

    let (tag_term, leak_term) = match modulation {
        Modulation::Bpsk => {
            let hi = block_mean(layout.hi_block());
            let lo = block_mean(layout.lo_block());
            ((hi - lo) * 0.5, (hi + lo) * 0.5)
        }
        Modulation::Ook => (block_mean(layout.hi_block()), C64::new(0.0, 0.0)),
    };

    let strength = tag_term.norm();
    let (phi, eta2, mut eta1) = if strength < 1e-300 {
        (0.0, 0.0, C64::new(0.0, 0.0))
    } else {
        (
            tag_term.arg(),
            strength / gamma,
            (leak_term / strength).conj(),
        )
    };
    // The leakage moment is the difference of two block means, so its noise
    // floor at practical preamble lengths sits well above the physical value.
    // Unclamped it can push both conditional means to the same side of zero
    // and wreck the thresholds, so cap it at half the detectable component.
    let leak_cap = 0.5 * eta2;
    if eta1.norm() > leak_cap {
        eta1 *= leak_cap / eta1.norm();
    }
    let mut params = LinkParams {
        gamma,
        eta1,
        eta2,
        delta: eta1.norm_sqr() + eta2 * eta2,
        phi,
    };
    // A wild leakage estimate can push the closed forms outside their
    // domain; detection degrades gracefully without it.
    let (x0, x1) = modulation.symbols();
    if conditional_spread(&params, x0) <= 0.0 || conditional_spread(&params, x1) <= 0.0 {
        params.eta1 = C64::new(0.0, 0.0);
        params.delta = eta2 * eta2;
    }
    EstimatedLink { params }
}

/// Chip decisions and decoded messages for one frame.
#[derive(Debug, Clone)]
pub struct FrameDecision {
    pub messages: Vec<u32>,
    pub chip_decisions: Vec<u8>,
    /// Present for variants that estimate the directions.
    pub directions: Option<DirectionEstimate>,
}

/// Runs one receiver variant over one frame.
pub fn demodulate_frame(
    y: &CMat,
    layout: FrameLayout,
    modulation: Modulation,
    code: &Code,
    variant: Variant,
    genie: Option<GenieLink>,
) -> Result<FrameDecision> {
    if !variant.supports(modulation) {
        return Err(Error::Receiver(format!(
            "variant {} does not support {}",
            variant.label(),
            modulation.label()
        )));
    }
    if !layout.payload_chips.is_multiple_of(code.n()) {
        return Err(Error::Receiver(format!(
            "payload of {} chips does not hold whole {}-chip codewords",
            layout.payload_chips,
            code.n()
        )));
    }
    if y.cols() != layout.total_len() {
        return Err(Error::Receiver(format!(
            "frame has {} slots, layout expects {}",
            y.cols(),
            layout.total_len()
        )));
    }
    let need_genie = || {
        genie.ok_or_else(|| {
            Error::Receiver(format!(
                "variant {} needs the true channel",
                variant.label()
            ))
        })
    };

    let payload = layout.payload();
    let (chip_decisions, directions): (Vec<u8>, Option<DirectionEstimate>) = match variant {
        Variant::Lr | Variant::Lda | Variant::Knn => {
            let kind = match variant {
                Variant::Lr => ClassifierKind::LogisticRegression,
                Variant::Lda => ClassifierKind::LinearDiscriminant,
                _ => ClassifierKind::NearestNeighbors,
            };
            let dirs = estimate_directions(y, layout, modulation)?;
            let feature = |i: usize| -> [f64; 2] {
                let v = slot_pair(&dirs.a_hat, &dirs.c_hat, y.col(i));
                [v.re, v.im]
            };
            let mut train_x = Vec::with_capacity(2 * layout.preamble_len);
            let mut train_y = Vec::with_capacity(2 * layout.preamble_len);
            for i in layout.hi_block() {
                train_x.push(feature(i));
                train_y.push(1u8);
            }
            for i in layout.lo_block() {
                train_x.push(feature(i));
                train_y.push(0u8);
            }
            let model = TrainedClassifier::train(kind, &train_x, &train_y);
            let chips = payload.clone().map(|i| model.predict(feature(i))).collect();
            (chips, Some(dirs))
        }
        Variant::CoherentIdeal => {
            let g = need_genie()?;
            let link = LinkParams::from_channel(g.chan, g.gamma);
            let det = CoherentDetector::for_link(&link, modulation);
            let chips = payload
                .clone()
                .map(|i| {
                    det.decide(coherent_statistic(
                        &g.chan.a,
                        &g.chan.c,
                        g.chan.phi,
                        y.col(i),
                    ))
                })
                .collect();
            (chips, None)
        }
        Variant::PhaseIgnoring => {
            let g = need_genie()?;
            let link = LinkParams::from_channel(g.chan, g.gamma);
            let (x0, x1) = modulation.symbols();
            let ald = |x: f64| {
                Ald::from_parts(
                    conditional_epsilon_ignoring_phase(&link, x),
                    conditional_spread(&link, x),
                )
            };
            let det = CoherentDetector::new(ald(x0), ald(x1));
            let chips = payload
                .clone()
                .map(|i| det.decide(slot_pair(&g.chan.a, &g.chan.c, y.col(i)).re))
                .collect();
            (chips, None)
        }
        Variant::CoherentEstimated => {
            let dirs = estimate_directions(y, layout, modulation)?;
            let est = estimate_link(y, layout, modulation, &dirs);
            let det = CoherentDetector::for_link(&est.params, modulation);
            let chips = payload
                .clone()
                .map(|i| {
                    det.decide(coherent_statistic(
                        &dirs.a_hat,
                        &dirs.c_hat,
                        est.params.phi,
                        y.col(i),
                    ))
                })
                .collect();
            (chips, Some(dirs))
        }
        Variant::Energy => {
            let dirs = estimate_directions(y, layout, modulation)?;
            let energy = |i: usize| inner(&dirs.c_hat, y.col(i)).norm_sqr();
            let hi = layout.hi_block();
            let mean_on: f64 = hi.clone().map(energy).sum::<f64>() / hi.len() as f64;
            let det = EnergyDetector::new((mean_on - 1.0).max(1e-6));
            let chips = payload.clone().map(|i| det.decide(energy(i))).collect();
            (chips, Some(dirs))
        }
    };

    let messages = decode_chips(code, &chip_decisions);
    Ok(FrameDecision {
        messages,
        chip_decisions,
        directions,
    })
}

/// Splits hard chip decisions into codewords and decodes each.
pub fn decode_chips(code: &Code, chips: &[u8]) -> Vec<u32> {
    chips
        .chunks(code.n())
        .map(|word| code.decode(word))
        .collect()
}
