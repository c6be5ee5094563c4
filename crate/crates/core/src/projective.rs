//! Homogeneous points, lines and scalars over the complex numbers.

use core::fmt;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub(crate) fn cross(a: &[C; 3], b: &[C; 3]) -> [C; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: &[C; 3], b: &[C; 3]) -> C {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &[C; 3]) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Coordinates below this fraction of the vector norm count as zero when
/// choosing the normalizing coordinate.
const LEAD_TOL: f64 = 1e-10;

fn normalize(v: [C; 3]) -> Result<[C; 3]> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = norm(&v);
    if n == 0.0 {
        return Err(Error::Degenerate("all homogeneous coordinates vanish"));
    }
    let lead = v.iter().find(|z| z.norm() > LEAD_TOL * n).copied().unwrap_or(v[0]);
    Ok([v[0] / lead, v[1] / lead, v[2] / lead])
}

/// Relative size of `|a × b|`; zero iff `a` and `b` are proportional.
pub(crate) fn proj_dist(a: &[C; 3], b: &[C; 3]) -> f64 {
    norm(&cross(a, b)) / (norm(a) * norm(b))
}

/// A point `[x : y : z]` of the projective plane, scaled so its first
/// (numerically) nonzero coordinate is 1.
#[derive(Clone, Copy, PartialEq)]
pub struct PlanePoint([C; 3]);

/// A line `{u x + v y + w z = 0}`, stored by its coefficients `[u : v : w]`
/// with the same normalization as points.
#[derive(Clone, Copy, PartialEq)]
pub struct PlaneLine([C; 3]);

macro_rules! homogeneous {
    ($t:ident) => {
        impl $t {
            pub fn new(v: [C; 3]) -> Result<Self> {
                normalize(v).map($t)
            }

            pub fn real(x: f64, y: f64, z: f64) -> Result<Self> {
                Self::new([c(x), c(y), c(z)])
            }

            pub fn coords(&self) -> [C; 3] {
                self.0
            }

            pub fn vector(&self) -> Vector3<C> {
                Vector3::new(self.0[0], self.0[1], self.0[2])
            }

            /// Projective equality within a relative tolerance.
            pub fn same_as(&self, other: &Self, tol: f64) -> bool {
                proj_dist(&self.0, &other.0) <= tol
            }

            pub fn dist(&self, other: &Self) -> f64 {
                proj_dist(&self.0, &other.0)
            }
        }

        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let [a, b, cc] = self.0;
                write!(f, "[{} : {} : {}]", a, b, cc)
            }
        }
    };
}

homogeneous!(PlanePoint);
homogeneous!(PlaneLine);

impl PlanePoint {
    /// Line through two distinct points.
    pub fn join(&self, other: &Self) -> Result<PlaneLine> {
        if proj_dist(&self.0, &other.0) < 1e-14 {
            return Err(Error::Degenerate("joining a point with itself"));
        }
        PlaneLine::new(cross(&self.0, &other.0))
    }

    /// Image under a linear map acting on column vectors.
    pub fn transform(&self, m: &Matrix3<C>) -> Result<Self> {
        let v = m * self.vector();
        Self::new([v[0], v[1], v[2]])
    }
}

impl PlaneLine {
    /// Relative incidence residual `|u·x| / (|u| |x|)`.
    pub fn residual(&self, p: &PlanePoint) -> f64 {
        dot(&self.0, &p.0).norm() / (norm(&self.0) * norm(&p.0))
    }

    pub fn contains(&self, p: &PlanePoint, tol: f64) -> bool {
        self.residual(p) <= tol
    }

    /// Intersection point of two distinct lines.
    pub fn meet(&self, other: &Self) -> Result<PlanePoint> {
        if proj_dist(&self.0, &other.0) < 1e-14 {
            return Err(Error::Degenerate("intersecting a line with itself"));
        }
        PlanePoint::new(cross(&self.0, &other.0))
    }

    /// Image of the line under the point map `m`: coefficients `u ↦ u m⁻¹`.
    pub fn transform(&self, m: &Matrix3<C>) -> Result<Self> {
        let inv = m.try_inverse().ok_or(Error::Degenerate("singular transformation"))?;
        let u = self.vector().transpose() * inv;
        Self::new([u[0], u[1], u[2]])
    }
}

/// A point `num/den` of the projective line; `den = 0` is `∞`.
#[derive(Clone, Copy, PartialEq)]
pub struct ProjScalar {
    pub num: C,
    pub den: C,
}

impl ProjScalar {
    pub fn new(num: C, den: C) -> Result<Self> {
        if [num, den].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if num.norm() == 0.0 && den.norm() == 0.0 {
            return Err(Error::Degenerate("projective scalar [0 : 0]"));
        }
        Ok(ProjScalar { num, den })
    }

    pub fn finite(v: C) -> Self {
        ProjScalar { num: v, den: c(1.0) }
    }

    pub fn real(v: f64) -> Self {
        Self::finite(c(v))
    }

    pub fn infinity() -> Self {
        ProjScalar { num: c(1.0), den: c(0.0) }
    }

    pub fn is_infinite(&self, tol: f64) -> bool {
        self.den.norm() <= tol * self.num.norm()
    }

    /// Affine value, or `None` at `∞`.
    pub fn value(&self) -> Option<C> {
        if self.den.norm() == 0.0 {
            None
        } else {
            Some(self.num / self.den)
        }
    }

    /// Relative distance `|n₁d₂ − n₂d₁| / (|(n₁,d₁)| |(n₂,d₂)|)`.
    pub fn dist(&self, other: &Self) -> f64 {
        let det = self.num * other.den - other.num * self.den;
        let n1 = libm::sqrt(self.num.norm_sqr() + self.den.norm_sqr());
        let n2 = libm::sqrt(other.num.norm_sqr() + other.den.norm_sqr());
        det.norm() / (n1 * n2)
    }

    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.dist(other) <= tol
    }

    /// Same point with `|num|² + |den|² = 1` and the larger entry real positive.
    pub fn normalized(&self) -> Self {
        let big = if self.den.norm() >= self.num.norm() { self.den } else { self.num };
        let scale = big.norm() / big;
        let (n, d) = (self.num * scale, self.den * scale);
        let r = libm::sqrt(n.norm_sqr() + d.norm_sqr());
        ProjScalar { num: n / r, den: d / r }
    }

    /// Image under the Möbius map `x ↦ (αx + β)/(γx + δ)`.
    pub fn mobius(&self, m: [[C; 2]; 2]) -> Self {
        ProjScalar {
            num: m[0][0] * self.num + m[0][1] * self.den,
            den: m[1][0] * self.num + m[1][1] * self.den,
        }
    }
}

impl fmt::Debug for ProjScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{}", v),
            None => write!(f, "inf"),
        }
    }
}
