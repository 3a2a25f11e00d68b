//! Multiple-access phase signal model: BPSK bits from the two end nodes,
//! a 2x2 Rayleigh channel into the relay's two antennas, and additive
//! complex Gaussian noise.
//!
//! Every stochastic operation takes an explicit RNG so trials can be
//! sharded across workers reproducibly; nothing here touches global state.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{Cx, Mat2, Vec2};

/// One source bit from each end node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitPair {
    pub b1: bool,
    pub b2: bool,
}

impl BitPair {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        BitPair {
            b1: rng.random(),
            b2: rng.random(),
        }
    }

    /// The relay's target: the XOR of the two bits, as a BPSK symbol.
    pub fn xor_symbol(&self) -> f64 {
        modulate(self.b1 ^ self.b2)
    }
}

/// BPSK symbols transmitted by the two end nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPair {
    pub x1: f64,
    pub x2: f64,
}

impl From<BitPair> for SymbolPair {
    fn from(b: BitPair) -> Self {
        SymbolPair {
            x1: modulate(b.b1),
            x2: modulate(b.b2),
        }
    }
}

/// A channel realization plus its rank status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMatrix {
    pub matrix: Mat2,
    pub rank_deficient: bool,
}

impl ChannelMatrix {
    pub fn new(matrix: Mat2) -> Self {
        ChannelMatrix {
            rank_deficient: matrix.is_rank_deficient(),
            matrix,
        }
    }
}

/// Noise variance per real dimension (linear, not dB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma2: f64,
}

impl NoiseConfig {
    pub fn new(sigma2: f64) -> Self {
        assert!(sigma2 >= 0.0 && sigma2.is_finite(), "sigma2 must be >= 0");
        NoiseConfig { sigma2 }
    }

    /// System SNR definition: SNR = 1/sigma2, given here in dB.
    pub fn from_snr_db(snr_db: f64) -> Self {
        NoiseConfig::new(snr_db_to_sigma2(snr_db))
    }
}

/// BPSK mapping: bit 0 -> +1, bit 1 -> -1.
pub fn modulate(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// Inverse of [`modulate`]: +1 -> 0, -1 -> 1 (sign decides).
pub fn demodulate(symbol: f64) -> bool {
    symbol < 0.0
}

/// Symbol-domain XOR: +1 iff the two BPSK symbols agree.
pub fn xor_symbol(x1: f64, x2: f64) -> f64 {
    debug_assert!(x1.abs() == 1.0 && x2.abs() == 1.0);
    x1 * x2
}

/// SNR (dB) to noise variance per real dimension.
pub fn snr_db_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Noise variance per real dimension to SNR (dB).
pub fn sigma2_to_snr_db(sigma2: f64) -> f64 {
    -10.0 * sigma2.log10()
}

/// Draw a channel with i.i.d. entries whose real and imaginary parts are
/// each standard normal (unit variance per dimension).
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R) -> ChannelMatrix {
    let mut entry = |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re, im)
    };
    let m = Mat2([[entry(()), entry(())], [entry(()), entry(())]]);
    ChannelMatrix::new(m)
}

/// Received vector `R = HX + N`, with noise variance `sigma2` per real
/// dimension on each antenna. `sigma2 = 0` is exactly `HX`.
pub fn transmit<R: Rng + ?Sized>(
    h: &Mat2,
    x: SymbolPair,
    noise: NoiseConfig,
    rng: &mut R,
) -> Vec2 {
    let clean = h.mul_vec(&Vec2::from_real(x.x1, x.x2));
    if noise.sigma2 == 0.0 {
        return clean;
    }
    let sd = noise.sigma2.sqrt();
    let mut n = |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re * sd, im * sd)
    };
    clean.add(&Vec2([n(()), n(())]))
}
