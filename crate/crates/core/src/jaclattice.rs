//! Points of the elliptic curve `C / (Z + τZ)`, which is also its own Jacobian.
//!
//! A point is stored by its lattice coordinates `(s, t)`, meaning `z = s + tτ`.
//! Exact points carry rational coordinates; approximate points carry `f64`
//! coordinates. Both are kept reduced to `[0, 1)²`. Because the group law acts
//! on coordinates alone, points do not need to remember which curve they were
//! made on; only the conversions to and from complex numbers take a
//! [`CurveSpec`].

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default relative tolerance for approximate comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Lattice parameter `τ` of the curve `C / (Z + τZ)`; the neutral point is `z = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSpec {
    tau: Complex64,
}

impl CurveSpec {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::NonFinite);
        }
        if tau.im <= 0.0 {
            return Err(Error::InvalidTau(tau.im));
        }
        Ok(CurveSpec { tau })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// `s + tτ`.
    pub fn point(&self, s: f64, t: f64) -> Complex64 {
        Complex64::new(s, 0.0) + self.tau * t
    }

    /// Real coordinates `(s, t)` with `z = s + tτ`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let t = z.im / self.tau.im;
        (z.re - t * self.tau.re, t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Exact { s: BigRational, t: BigRational },
    Approx { s: u64, t: u64 },
}

/// A point of the curve, reduced to the fundamental parallelogram.
///
/// Structural equality (`==`) distinguishes exact from approximate points;
/// use [`JacPoint::same_as`] to compare across representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct JacPoint(Repr);

fn reduce_f64(x: f64) -> f64 {
    let r = x - libm::floor(x);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn reduce_q(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Signed distance of `x` to the nearest integer, in `(-1/2, 1/2]`.
fn wrap(x: f64) -> f64 {
    let r = x - libm::round(x);
    if r <= -0.5 {
        r + 1.0
    } else {
        r
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl JacPoint {
    /// The neutral point, exact.
    pub fn zero() -> Self {
        JacPoint(Repr::Exact { s: BigRational::zero(), t: BigRational::zero() })
    }

    /// Exact point `s + tτ`, reduced mod the lattice.
    pub fn exact(s: BigRational, t: BigRational) -> Self {
        JacPoint(Repr::Exact { s: reduce_q(&s), t: reduce_q(&t) })
    }

    /// Exact point `sn/sd + (tn/td)τ`. Panics if a denominator is zero.
    pub fn rational(sn: i64, sd: i64, tn: i64, td: i64) -> Self {
        Self::exact(q(sn, sd), q(tn, td))
    }

    /// Approximate point with lattice coordinates `(s, t)`.
    pub fn approx(s: f64, t: f64) -> Result<Self> {
        if !s.is_finite() || !t.is_finite() {
            return Err(Error::NonFinite);
        }
        let (s, t) = (reduce_f64(s), reduce_f64(t));
        Ok(JacPoint(Repr::Approx { s: s.to_bits(), t: t.to_bits() }))
    }

    /// Approximate point with complex parameter `z`.
    pub fn from_complex(z: Complex64, curve: &CurveSpec) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite);
        }
        let (s, t) = curve.coords(z);
        Self::approx(s, t)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.0, Repr::Exact { .. })
    }

    pub fn as_exact(&self) -> Option<(&BigRational, &BigRational)> {
        match &self.0 {
            Repr::Exact { s, t } => Some((s, t)),
            Repr::Approx { .. } => None,
        }
    }

    /// Lattice coordinates as floats.
    pub fn coords(&self) -> (f64, f64) {
        match &self.0 {
            Repr::Exact { s, t } => (s.to_f64().unwrap_or(0.0), t.to_f64().unwrap_or(0.0)),
            Repr::Approx { s, t } => (f64::from_bits(*s), f64::from_bits(*t)),
        }
    }

    /// Representative in the parallelogram `[0,1)·1 + [0,1)·τ`.
    pub fn to_complex(&self, curve: &CurveSpec) -> Complex64 {
        let (s, t) = self.coords();
        curve.point(s, t)
    }

    /// Representative closest to the origin among the four corner translates,
    /// i.e. with both coordinates in `(-1/2, 1/2]`.
    pub fn to_complex_centered(&self, curve: &CurveSpec) -> Complex64 {
        let (s, t) = self.coords();
        curve.point(wrap(s), wrap(t))
    }

    pub fn to_approx(&self) -> Self {
        let (s, t) = self.coords();
        JacPoint(Repr::Approx { s: s.to_bits(), t: t.to_bits() })
    }

    pub fn add(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (Repr::Exact { s: s1, t: t1 }, Repr::Exact { s: s2, t: t2 }) => {
                Self::exact(s1 + s2, t1 + t2)
            }
            _ => {
                let (s1, t1) = self.coords();
                let (s2, t2) = other.coords();
                Self::approx_unchecked(s1 + s2, t1 + t2)
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        match &self.0 {
            Repr::Exact { s, t } => Self::exact(-s, -t),
            Repr::Approx { .. } => {
                let (s, t) = self.coords();
                Self::approx_unchecked(-s, -t)
            }
        }
    }

    pub fn mul(&self, k: i64) -> Self {
        match &self.0 {
            Repr::Exact { s, t } => {
                let k = BigRational::from_integer(BigInt::from(k));
                Self::exact(s * &k, t * &k)
            }
            Repr::Approx { .. } => {
                let (s, t) = self.coords();
                Self::approx_unchecked(s * k as f64, t * k as f64)
            }
        }
    }

    fn approx_unchecked(s: f64, t: f64) -> Self {
        let (s, t) = (reduce_f64(s), reduce_f64(t));
        JacPoint(Repr::Approx { s: s.to_bits(), t: t.to_bits() })
    }

    /// Distance on the torus in lattice coordinates (sup norm of the wrapped
    /// difference). Zero exactly when two exact points coincide.
    pub fn lattice_dist(&self, other: &Self) -> f64 {
        if let (Repr::Exact { s: s1, t: t1 }, Repr::Exact { s: s2, t: t2 }) = (&self.0, &other.0) {
            if s1 == s2 && t1 == t2 {
                return 0.0;
            }
        }
        let (s1, t1) = self.coords();
        let (s2, t2) = other.coords();
        libm::fabs(wrap(s1 - s2)).max(libm::fabs(wrap(t1 - t2)))
    }

    /// Equality: exact when both are exact, else within `tol` in lattice coordinates.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        match (&self.0, &other.0) {
            (Repr::Exact { .. }, Repr::Exact { .. }) => self == other,
            _ => self.lattice_dist(other) <= tol,
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.same_as(&Self::zero(), tol)
    }

    /// Whether `n·p = 0`.
    pub fn is_torsion(&self, n: i64, tol: f64) -> bool {
        self.mul(n).is_zero(tol * n.unsigned_abs().max(1) as f64)
    }

    /// Deterministic total order: lexicographic on `(s, t)`.
    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        if let (Repr::Exact { s: s1, t: t1 }, Repr::Exact { s: s2, t: t2 }) = (&self.0, &other.0) {
            return (s1, t1).cmp(&(s2, t2));
        }
        let (s1, t1) = self.coords();
        let (s2, t2) = other.coords();
        s1.total_cmp(&s2).then(t1.total_cmp(&t2))
    }
}

impl fmt::Debug for JacPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Exact { s, t } => write!(f, "({}, {})", s, t),
            Repr::Approx { .. } => {
                let (s, t) = self.coords();
                write!(f, "~({:.12}, {:.12})", s, t)
            }
        }
    }
}

/// Canonical representative of an exact pair.
pub fn canon_exact(s: BigRational, t: BigRational) -> JacPoint {
    JacPoint::exact(s, t)
}

/// Canonical representative of a complex parameter.
pub fn canon_complex(z: Complex64, curve: &CurveSpec) -> Result<JacPoint> {
    JacPoint::from_complex(z, curve)
}

/// The `n²` points `(a/n, b/n)`, exact.
pub fn torsion_points(n: u32) -> Result<Vec<JacPoint>> {
    if n == 0 {
        return Err(Error::InvalidOrder);
    }
    let n = n as i64;
    let mut out = Vec::with_capacity((n * n) as usize);
    for a in 0..n {
        for b in 0..n {
            out.push(JacPoint::rational(a, n, b, n));
        }
    }
    Ok(out)
}

/// Jacobian class of the rank-one character with monodromy `a` along `1`
/// and `b` along `τ`: the point `(log b − τ log a) / 2πi` mod the lattice.
pub fn from_holonomy(a: Complex64, b: Complex64, curve: &CurveSpec) -> Result<JacPoint> {
    for v in [a, b] {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite);
        }
        if v.norm() == 0.0 {
            return Err(Error::ZeroInput);
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let w = (b.ln() - curve.tau() * a.ln()) / two_pi_i;
    JacPoint::from_complex(w, curve)
}

/// A character `(a, b)` whose class is `p`: `(e^{−2πit}, e^{2πis})`.
pub fn to_holonomy(p: &JacPoint) -> (Complex64, Complex64) {
    let (s, t) = p.coords();
    let a = Complex64::from_polar(1.0, -2.0 * PI * t);
    let b = Complex64::from_polar(1.0, 2.0 * PI * s);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> CurveSpec {
        CurveSpec::new(Complex64::new(0.0, 1.0)).unwrap()
    }

    #[test]
    fn canon_reduces_mod_one() {
        let p = JacPoint::rational(4, 3, -1, 3);
        assert_eq!(p, JacPoint::rational(1, 3, 2, 3));
        assert_eq!(JacPoint::rational(0, 1, 0, 1), JacPoint::zero());
    }

    #[test]
    fn canon_complex_subtracts_lattice_vectors() {
        let c = sq();
        let p = canon_complex(Complex64::new(1.25, 0.5), &c).unwrap();
        let (s, t) = p.coords();
        assert!((s - 0.25).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
        assert!(p.same_as(&JacPoint::rational(1, 4, 1, 2), 1e-12));
    }

    #[test]
    fn canon_rejects_nan() {
        assert_eq!(JacPoint::approx(f64::NAN, 0.0), Err(Error::NonFinite));
        assert!(CurveSpec::new(Complex64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn group_law_small_cases() {
        let a = JacPoint::rational(1, 3, 0, 1);
        let b = JacPoint::rational(2, 3, 0, 1);
        assert_eq!(a.add(&b), JacPoint::zero());
        let h = JacPoint::rational(1, 2, 1, 2);
        assert_eq!(h.neg(), h);
        assert_eq!(JacPoint::rational(1, 3, 2, 3).mul(3), JacPoint::zero());
    }

    #[test]
    fn mixed_arithmetic_goes_approx() {
        let a = JacPoint::rational(1, 4, 0, 1);
        let b = JacPoint::approx(0.5, 0.25).unwrap();
        let c = a.add(&b);
        assert!(!c.is_exact());
        assert!(c.same_as(&JacPoint::rational(3, 4, 1, 4), 1e-15));
    }

    #[test]
    fn tiny_negative_wraps_to_zero() {
        let p = JacPoint::approx(-1e-18, 0.0).unwrap();
        let (s, _) = p.coords();
        assert!(s < 1.0);
        assert!(p.is_zero(1e-12));
    }

    #[test]
    fn torsion_counts() {
        assert_eq!(torsion_points(3).unwrap().len(), 9);
        assert_eq!(torsion_points(1).unwrap(), vec![JacPoint::zero()]);
        let two = torsion_points(2).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().all(|p| p.neg() == *p));
        assert_eq!(torsion_points(0), Err(Error::InvalidOrder));
    }

    #[test]
    fn holonomy_examples() {
        let c = sq();
        let one = Complex64::new(1.0, 0.0);
        assert!(from_holonomy(one, one, &c).unwrap().is_zero(1e-12));
        let b = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let p = from_holonomy(one, b, &c).unwrap();
        assert!(p.same_as(&JacPoint::rational(1, 3, 0, 1), 1e-10));
        assert_eq!(from_holonomy(Complex64::new(0.0, 0.0), one, &c), Err(Error::ZeroInput));
    }

    #[test]
    fn holonomy_gauge_invariance() {
        let c = CurveSpec::new(Complex64::new(0.3, 1.1)).unwrap();
        let a = Complex64::new(0.4, -1.2);
        let b = Complex64::new(2.0, 0.7);
        let cc = Complex64::new(0.7, 0.0);
        let p = from_holonomy(a, b, &c).unwrap();
        let q = from_holonomy(a * cc.exp(), b * (cc * c.tau()).exp(), &c).unwrap();
        assert!(p.lattice_dist(&q) < 1e-10);
    }

    #[test]
    fn to_holonomy_inverts() {
        let c = CurveSpec::new(Complex64::new(-0.2, 0.9)).unwrap();
        let p = JacPoint::rational(2, 7, 3, 5);
        let (a, b) = to_holonomy(&p);
        assert!(from_holonomy(a, b, &c).unwrap().same_as(&p, 1e-12));
    }
}
