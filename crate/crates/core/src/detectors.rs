//! Relay detection strategies for the network-coded symbol `x1 (+) x2`.
//!
//! Two families, each with ZF and MMSE equalization:
//!
//! * NC: equalize against `H`, quantize the two streams to recover `x1`
//!   and `x2` separately, XOR the results.
//! * PNC: equalize against `Hhat = H D^{-1}` so the streams estimate
//!   `x1 + x2` and `x1 - x2`, then map to the XOR either by per-stream
//!   likelihood-ratio combination or by thresholding the cleaner stream.
//!
//! Exhaustive ML references for both targets round out the eight kinds.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelMatrix;
use crate::numerics::{self, Equalizer, Mat2, Vec2};
use crate::Error;

/// Relative row-gain floor below which a stream of a rank-deficient
/// equalizer is considered unobservable.
const DEAD_STREAM_EPS: f64 = 1e-12;

/// The eight relay detection strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    ZfNc,
    MmseNc,
    ZfPncLlr,
    ZfPncSel,
    MmsePncLlr,
    MmsePncSel,
    MlNc,
    MlPnc,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 8] = [
        DetectorKind::ZfNc,
        DetectorKind::MmseNc,
        DetectorKind::ZfPncLlr,
        DetectorKind::ZfPncSel,
        DetectorKind::MmsePncLlr,
        DetectorKind::MmsePncSel,
        DetectorKind::MlNc,
        DetectorKind::MlPnc,
    ];

    /// CLI / CSV spelling.
    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::ZfNc => "zf-nc",
            DetectorKind::MmseNc => "mmse-nc",
            DetectorKind::ZfPncLlr => "zf-pnc-llr",
            DetectorKind::ZfPncSel => "zf-pnc-sel",
            DetectorKind::MmsePncLlr => "mmse-pnc-llr",
            DetectorKind::MmsePncSel => "mmse-pnc-sel",
            DetectorKind::MlNc => "ml-nc",
            DetectorKind::MlPnc => "ml-pnc",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown detector '{s}'")))
    }
}

/// Threshold choice for the selective combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Fixed thr = 1 (the high-SNR choice).
    Unit,
    /// Per-stream likelihood-ratio crossing via [`optimal_stream_threshold`].
    Optimal,
}

/// Real-part stream statistics after equalization, with their per-stream
/// noise variances. An infinite variance marks an unobservable stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizedObservation {
    pub y1: f64,
    pub y2: f64,
    pub var1: f64,
    pub var2: f64,
}

/// Block-diagonal sum-difference matrix for L antennas per end node:
/// L copies of `D = [[1,1],[1,-1]]` on the diagonal, so `M M = 2 I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumDifferenceMatrix {
    pub antennas: usize,
    pub entries: Vec<Vec<f64>>,
}

impl SumDifferenceMatrix {
    pub fn dim(&self) -> usize {
        2 * self.antennas
    }
}

/// `Hhat = H D^{-1}` with `D^{-1} = [[1,1],[1,-1]] / 2`: column 1 becomes
/// the sum channel, column 2 the difference channel.
pub fn sum_difference_transform(h: &Mat2) -> Mat2 {
    let half = 0.5;
    Mat2([
        [
            (h.0[0][0] + h.0[0][1]) * half,
            (h.0[0][0] - h.0[0][1]) * half,
        ],
        [
            (h.0[1][0] + h.0[1][1]) * half,
            (h.0[1][0] - h.0[1][1]) * half,
        ],
    ])
}

/// The 2L-by-2L block-diagonal sum-difference matrix of L antenna pairs,
/// ordered to match the interleaved stream layout `[x1, y1, ..., xL, yL]`.
pub fn build_sum_difference_matrix(antennas: usize) -> Result<SumDifferenceMatrix, Error> {
    if antennas == 0 {
        return Err(Error::InvalidArgument(
            "sum-difference matrix needs at least one antenna".into(),
        ));
    }
    let n = 2 * antennas;
    let mut entries = vec![vec![0.0; n]; n];
    for b in 0..antennas {
        let o = 2 * b;
        entries[o][o] = 1.0;
        entries[o][o + 1] = 1.0;
        entries[o + 1][o] = 1.0;
        entries[o + 1][o + 1] = -1.0;
    }
    Ok(SumDifferenceMatrix { antennas, entries })
}

/// Apply an equalizer to a received vector: real parts of `G r` plus the
/// per-stream noise variances `{G G^H}_ii * sigma2`.
///
/// When the equalizer is flagged rank deficient, a stream whose row of `G`
/// is (relatively) zero carries no signal at all and gets infinite
/// variance so the combiners treat it as uninformative.
pub fn equalize(eq: &Equalizer, r: &Vec2, sigma2: f64) -> EqualizedObservation {
    let y = eq.matrix.mul_vec(r);
    let (g1, g2) = numerics::row_noise_gains(&eq.matrix);
    let mut var1 = g1 * sigma2;
    let mut var2 = g2 * sigma2;
    if eq.rank_deficient {
        let top = g1.max(g2);
        if top == 0.0 {
            var1 = f64::INFINITY;
            var2 = f64::INFINITY;
        } else {
            if g1 < DEAD_STREAM_EPS * top {
                var1 = f64::INFINITY;
            }
            if g2 < DEAD_STREAM_EPS * top {
                var2 = f64::INFINITY;
            }
        }
    }
    EqualizedObservation {
        y1: y.0[0].re,
        y2: y.0[1].re,
        var1,
        var2,
    }
}

/// Sign with the tie 0 -> +1 used by every decision rule here.
fn sign_pm(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// NC decision: quantize both streams and XOR, i.e. `sign(y1) sign(y2)`.
pub fn detect_nc(obs: &EqualizedObservation) -> f64 {
    sign_pm(obs.y1) * sign_pm(obs.y2)
}

/// `log cosh(z)`, overflow-free for any `z`.
fn log_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Log likelihood-ratio contribution of a sum-type stream: the stream's
/// value is +/-2 under the hypothesis `x1 = x2` and 0 otherwise, so
/// `log L = -2/var + log cosh(2 y / var)`.
///
/// An infinite-variance stream is neutral (0); a noiseless stream decides
/// with certainty by comparing `|y|` against the threshold limit 1.
fn sum_stream_log_lr(y: f64, var: f64) -> f64 {
    if var.is_infinite() {
        return 0.0;
    }
    if var <= 0.0 {
        return if y.abs() > 1.0 {
            f64::INFINITY
        } else if y.abs() < 1.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
    }
    -2.0 / var + log_cosh(2.0 * y / var)
}

/// Log of the likelihood ratio of `x1 (+) x2 = +1` against `-1` given both
/// streams, treating the stream noises as independent:
/// `(2/var2 - 2/var1) + log cosh(2 y1/var1) - log cosh(2 y2/var2)`.
pub fn pnc_log_llr(obs: &EqualizedObservation) -> f64 {
    let s1 = sum_stream_log_lr(obs.y1, obs.var1);
    let s2 = sum_stream_log_lr(obs.y2, obs.var2);
    let l = s1 - s2;
    // Two same-signed certainties can only meet on inconsistent inputs;
    // fall back to the tie value.
    if l.is_nan() {
        0.0
    } else {
        l
    }
}

/// Likelihood ratio of `x1 (+) x2` (may overflow to infinity for extreme
/// inputs; decisions should use [`pnc_log_llr`]).
pub fn pnc_llr(obs: &EqualizedObservation) -> f64 {
    pnc_log_llr(obs).exp()
}

/// LLR-combining decision: +1 when the likelihood ratio is >= 1.
pub fn detect_pnc_llr(obs: &EqualizedObservation) -> f64 {
    sign_pm(pnc_log_llr(obs))
}

/// Selective-combining decision: threshold the magnitude of the stream
/// with the smaller noise variance. The sum stream votes +1 when its
/// magnitude exceeds `thr`, the difference stream when it stays below.
/// An infinite-variance stream is never selected.
pub fn detect_pnc_selective(obs: &EqualizedObservation, thr: f64) -> Result<f64, Error> {
    if !(thr > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "selective threshold must be positive, got {thr}"
        )));
    }
    Ok(if obs.var1 < obs.var2 {
        sign_pm(obs.y1.abs() - thr)
    } else {
        sign_pm(thr - obs.y2.abs())
    })
}

/// The |y| value where a single stream's likelihood ratio crosses 1:
/// `t = (var/2) arccosh(exp(2/var))`, computed in the log domain.
/// Tends to 1 as the variance vanishes.
pub fn optimal_stream_threshold(var: f64) -> Result<f64, Error> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "stream variance must be positive and finite, got {var}"
        )));
    }
    // arccosh(e^z) = z + ln(1 + sqrt(1 - e^(-2z))) without forming e^z.
    let z = 2.0 / var;
    let acosh_exp_z = z + (1.0 + (1.0 - (-2.0 * z).exp()).sqrt()).ln();
    Ok(0.5 * var * acosh_exp_z)
}

/// Squared distances `|r - H x|^2` for the four BPSK pairs, in the
/// tie-break order (+1,+1), (+1,-1), (-1,+1), (-1,-1).
fn hypothesis_distances(r: &Vec2, h: &Mat2) -> [(f64, f64, f64); 4] {
    const PAIRS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let col1 = Vec2([h.0[0][0], h.0[1][0]]);
    let col2 = Vec2([h.0[0][1], h.0[1][1]]);
    PAIRS.map(|(x1, x2)| {
        let hx = Vec2([
            col1.0[0] * x1 + col2.0[0] * x2,
            col1.0[1] * x1 + col2.0[1] * x2,
        ]);
        (x1, x2, r.sub(&hx).norm_sq())
    })
}

/// Exhaustive ML over the four symbol pairs, then XOR of the argmax pair.
/// Ties resolve to the earliest pair in the fixed hypothesis order.
pub fn ml_nc(r: &Vec2, h: &Mat2, _sigma2: f64) -> f64 {
    let mut best = (1.0, 1.0, f64::INFINITY);
    for (x1, x2, d) in hypothesis_distances(r, h) {
        if d < best.2 {
            best = (x1, x2, d);
        }
    }
    best.0 * best.1
}

/// Exhaustive ML directly on the XOR hypothesis: sums the Gaussian
/// likelihoods of the two symbol pairs consistent with each XOR value and
/// keeps the larger sum (ties +1). `sigma2 = 0` degenerates to comparing
/// the best squared distance per hypothesis.
pub fn ml_pnc(r: &Vec2, h: &Mat2, sigma2: f64) -> f64 {
    let dists = hypothesis_distances(r, h);
    let mut min_same = f64::INFINITY; // pairs with x1 = x2 (XOR +1)
    let mut min_diff = f64::INFINITY;
    for (x1, x2, d) in dists {
        if x1 * x2 > 0.0 {
            min_same = min_same.min(d);
        } else {
            min_diff = min_diff.min(d);
        }
    }
    if sigma2 <= 0.0 {
        return sign_pm(min_diff - min_same);
    }
    let dmin = min_same.min(min_diff);
    let mut w_same = 0.0;
    let mut w_diff = 0.0;
    for (x1, x2, d) in dists {
        let w = (-(d - dmin) / (2.0 * sigma2)).exp();
        if x1 * x2 > 0.0 {
            w_same += w;
        } else {
            w_diff += w;
        }
    }
    sign_pm(w_same - w_diff)
}

/// A detector bound to one channel realization, ready to process received
/// vectors. Linear kinds capture their equalizer here so fixed-channel
/// sweeps build it once.
#[derive(Debug, Clone)]
pub enum PreparedDetector {
    Nc { eq: Equalizer },
    PncLlr { eq: Equalizer },
    PncSel { eq: Equalizer, threshold: ThresholdMode },
    MlNc { h: Mat2 },
    MlPnc { h: Mat2 },
}

impl PreparedDetector {
    /// Bind `kind` to a channel realization at the given noise level.
    pub fn prepare(
        kind: DetectorKind,
        threshold: ThresholdMode,
        channel: &ChannelMatrix,
        sigma2: f64,
    ) -> Result<Self, Error> {
        use DetectorKind::*;
        let h = &channel.matrix;
        let effective = |pnc: bool| {
            if pnc {
                sum_difference_transform(h)
            } else {
                *h
            }
        };
        let linear = |pnc: bool, mmse: bool| -> Result<Equalizer, Error> {
            let m = effective(pnc);
            if mmse {
                Ok(numerics::mmse_equalizer(&m, sigma2)?)
            } else {
                Ok(numerics::zf_equalizer(&m))
            }
        };
        Ok(match kind {
            ZfNc => PreparedDetector::Nc {
                eq: linear(false, false)?,
            },
            MmseNc => PreparedDetector::Nc {
                eq: linear(false, true)?,
            },
            ZfPncLlr => PreparedDetector::PncLlr {
                eq: linear(true, false)?,
            },
            MmsePncLlr => PreparedDetector::PncLlr {
                eq: linear(true, true)?,
            },
            ZfPncSel => PreparedDetector::PncSel {
                eq: linear(true, false)?,
                threshold,
            },
            MmsePncSel => PreparedDetector::PncSel {
                eq: linear(true, true)?,
                threshold,
            },
            MlNc => PreparedDetector::MlNc { h: *h },
            MlPnc => PreparedDetector::MlPnc { h: *h },
        })
    }

    /// Estimate the XOR symbol from one received vector.
    pub fn detect(&self, r: &Vec2, sigma2: f64) -> f64 {
        match self {
            PreparedDetector::Nc { eq } => detect_nc(&equalize(eq, r, sigma2)),
            PreparedDetector::PncLlr { eq } => detect_pnc_llr(&equalize(eq, r, sigma2)),
            PreparedDetector::PncSel { eq, threshold } => {
                let obs = equalize(eq, r, sigma2);
                let thr = match threshold {
                    ThresholdMode::Unit => 1.0,
                    ThresholdMode::Optimal => {
                        let sel = if obs.var1 < obs.var2 { obs.var1 } else { obs.var2 };
                        if sel > 0.0 && sel.is_finite() {
                            optimal_stream_threshold(sel).expect("positive finite variance")
                        } else {
                            1.0
                        }
                    }
                };
                detect_pnc_selective(&obs, thr).expect("threshold is positive")
            }
            PreparedDetector::MlNc { h } => ml_nc(r, h, sigma2),
            PreparedDetector::MlPnc { h } => ml_pnc(r, h, sigma2),
        }
    }
}
