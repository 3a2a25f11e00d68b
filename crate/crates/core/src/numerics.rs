//! Closed-form complex linear algebra for 2x2 systems.
//!
//! Everything the detectors need from a 2x2 channel is computed exactly:
//! Gram matrices, adjugate/determinant inverses, the Moore-Penrose
//! pseudo-inverse (all ranks), the MMSE-regularized inverse, and the
//! per-row noise gains of an equalizer. No general-purpose decomposition
//! is used; the hot loop only ever sees a handful of multiplies.

use num_complex::Complex64;

/// Ratio of smallest to largest Gram eigenvalue below which a matrix is
/// treated as rank deficient.
pub const RANK_EPS: f64 = 1e-12;

/// Complex scalar used throughout.
pub type Cx = Complex64;

/// A 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Cx; 2]; 2]);

/// A length-2 complex column vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2(pub [Cx; 2]);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    /// The requested operation has no finite answer for this input.
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

impl Mat2 {
    pub fn new(a: Cx, b: Cx, c: Cx, d: Cx) -> Self {
        Mat2([[a, b], [c, d]])
    }

    /// Build from real entries (imaginary parts zero).
    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([
            [Cx::new(a, 0.0), Cx::new(b, 0.0)],
            [Cx::new(c, 0.0), Cx::new(d, 0.0)],
        ])
    }

    pub fn identity() -> Self {
        Mat2::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Mat2::from_real(0.0, 0.0, 0.0, 0.0)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Mat2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        Vec2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([
            [self.0[0][0] * s, self.0[0][1] * s],
            [self.0[1][0] * s, self.0[1][1] * s],
        ])
    }

    pub fn det(&self) -> Cx {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest entry magnitude, handy for tolerance checks.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigenvalues of the Gram matrix `self^H self`, ordered (min, max).
    ///
    /// The Gram matrix is Hermitian PSD, so both are real and nonnegative;
    /// they are the squared singular values of `self`.
    pub fn gram_eigenvalues(&self) -> (f64, f64) {
        let g = gram(self);
        let tr = g.0[0][0].re + g.0[1][1].re;
        let det = g.det().re.max(0.0);
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let hi = 0.5 * (tr + disc);
        let lo = (det / hi.max(f64::MIN_POSITIVE)).min(hi);
        (lo.max(0.0), hi.max(0.0))
    }

    /// True when the smallest Gram eigenvalue is below `RANK_EPS` times the
    /// largest (or the matrix is zero).
    pub fn is_rank_deficient(&self) -> bool {
        let (lo, hi) = self.gram_eigenvalues();
        hi == 0.0 || lo <= RANK_EPS * hi
    }
}

impl Vec2 {
    pub fn new(a: Cx, b: Cx) -> Self {
        Vec2([a, b])
    }

    pub fn from_real(a: f64, b: f64) -> Self {
        Vec2([Cx::new(a, 0.0), Cx::new(b, 0.0)])
    }

    pub fn sub(&self, rhs: &Vec2) -> Vec2 {
        Vec2([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }

    pub fn add(&self, rhs: &Vec2) -> Vec2 {
        Vec2([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }

    /// Squared Euclidean norm (sum over all four real dimensions).
    pub fn norm_sq(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }
}

/// A linear equalizer together with the rank status of the channel it was
/// built from. Detectors use the flag to treat unobservable streams as
/// carrying no information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equalizer {
    pub matrix: Mat2,
    pub rank_deficient: bool,
}

/// Gram matrix `H^H H`.
pub fn gram(h: &Mat2) -> Mat2 {
    h.hermitian().mul(h)
}

/// Exact inverse by adjugate over determinant. Caller guarantees the
/// determinant is usable.
fn inverse_unchecked(a: &Mat2) -> Mat2 {
    let d = a.det();
    Mat2([
        [a.0[1][1] / d, -a.0[0][1] / d],
        [-a.0[1][0] / d, a.0[0][0] / d],
    ])
}

/// Moore-Penrose pseudo-inverse of a 2x2 complex matrix, any rank.
///
/// Full rank uses the adjugate inverse; rank one factors `A = s u v^H` and
/// returns `v u^H / s`; the zero matrix maps to zero.
pub fn pseudo_inverse(a: &Mat2) -> Mat2 {
    let (lo, hi) = a.gram_eigenvalues();
    if hi <= 0.0 {
        return Mat2::zero();
    }
    if lo > RANK_EPS * hi {
        return inverse_unchecked(a);
    }
    // Rank one: the dominant left direction is the larger column.
    let col = |j: usize| Vec2([a.0[0][j], a.0[1][j]]);
    let (c0, c1) = (col(0), col(1));
    let dom = if c0.norm_sq() >= c1.norm_sq() { c0 } else { c1 };
    let dn = dom.norm_sq().sqrt();
    let u = Vec2([dom.0[0] / dn, dom.0[1] / dn]);
    // s v^H = u^H A; the singular value is its norm.
    let svh = Vec2([
        u.0[0].conj() * a.0[0][0] + u.0[1].conj() * a.0[1][0],
        u.0[0].conj() * a.0[0][1] + u.0[1].conj() * a.0[1][1],
    ]);
    let s = svh.norm_sq().sqrt();
    let v = Vec2([svh.0[0].conj() / s, svh.0[1].conj() / s]);
    // A+ = v u^H / s
    Mat2([
        [v.0[0] * u.0[0].conj() / s, v.0[0] * u.0[1].conj() / s],
        [v.0[1] * u.0[0].conj() / s, v.0[1] * u.0[1].conj() / s],
    ])
}

/// Zero-forcing equalizer `G = (H^H H)^{-1} H^H`.
///
/// A singular Gram matrix falls back to the pseudo-inverse with the
/// rank-deficiency flag set, so downstream processing can mark the
/// unobservable stream instead of failing.
pub fn zf_equalizer(h: &Mat2) -> Equalizer {
    if h.is_rank_deficient() {
        Equalizer {
            matrix: pseudo_inverse(h),
            rank_deficient: true,
        }
    } else {
        Equalizer {
            matrix: inverse_unchecked(&gram(h)).mul(&h.hermitian()),
            rank_deficient: false,
        }
    }
}

/// MMSE equalizer `G = (sigma2 I + H^H H)^{-1} H^H`.
///
/// `sigma2` is the noise variance per real dimension. With `sigma2 = 0`
/// this reduces to zero forcing and requires a full-rank channel.
pub fn mmse_equalizer(h: &Mat2, sigma2: f64) -> Result<Equalizer, NumericsError> {
    if !(sigma2 >= 0.0) {
        return Err(NumericsError::Degenerate("sigma2 must be nonnegative"));
    }
    let deficient = h.is_rank_deficient();
    if sigma2 == 0.0 {
        if deficient {
            return Err(NumericsError::Degenerate(
                "sigma2 = 0 with a singular channel Gram matrix",
            ));
        }
        return Ok(zf_equalizer(h));
    }
    let reg = gram(h).add(&Mat2::identity().scale(sigma2));
    Ok(Equalizer {
        matrix: inverse_unchecked(&reg).mul(&h.hermitian()),
        rank_deficient: deficient,
    })
}

/// Diagonal of `G G^H`: the squared row norms of `G`, i.e. the factor by
/// which each output stream amplifies the per-dimension noise variance.
pub fn row_noise_gains(g: &Mat2) -> (f64, f64) {
    let row = |i: usize| g.0[i][0].norm_sqr() + g.0[i][1].norm_sqr();
    (row(0), row(1))
}
