//! The incidence model: a line of the plane with a point on it gives a split
//! bundle (the line's three points on the cubic) with a parabolic point in the
//! `P⁺` fiber, `λ` being the cross-ratio of the fourth point against the three.
//! Also the covering invariants of the symmetric quotient, the symmetric-square
//! model of the boundary, and the isomorphism test for curves.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::bundles::{classify_triple, type_facts, BundleClass};
use crate::error::{Error, Result};
use crate::jaclattice::{CurveSpec, JacPoint, DEFAULT_TOL};
use crate::parabolic::{locus_tol, standard_flag, Chamber, Flag, Locus};
use crate::projective::{cross, PlaneLine, PlanePoint, ProjScalar};
use crate::weierstrass::{distinct_count, embed, intersect_curve, j_invariant, Curve};

type C = Complex64;

/// Below this (on unit-normalized scalars) both cross-ratio terms count as zero.
const COINCIDENCE_TOL: f64 = 1e-12;

fn det(a: &ProjScalar, b: &ProjScalar) -> C {
    a.num * b.den - b.num * a.den
}

/// `((z1−z3)(z2−z4)) / ((z1−z4)(z2−z3))` on the projective line.
pub fn cross_ratio(z1: &ProjScalar, z2: &ProjScalar, z3: &ProjScalar, z4: &ProjScalar) -> Result<ProjScalar> {
    let [z1, z2, z3, z4] = [z1, z2, z3, z4].map(|z| z.normalized());
    let num = det(&z1, &z3) * det(&z2, &z4);
    let den = det(&z1, &z4) * det(&z2, &z3);
    if num.norm() <= COINCIDENCE_TOL && den.norm() <= COINCIDENCE_TOL {
        return Err(Error::TripleCoincidence);
    }
    ProjScalar::new(num, den).map(|s| s.normalized())
}

/// A point of the plane together with a line through it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncidencePoint {
    pub x: PlanePoint,
    pub line: PlaneLine,
}

impl IncidencePoint {
    pub fn new(x: PlanePoint, line: PlaneLine) -> Result<Self> {
        Self::with_tol(x, line, DEFAULT_TOL)
    }

    pub fn with_tol(x: PlanePoint, line: PlaneLine, tol: f64) -> Result<Self> {
        let r = line.residual(&x);
        if r > tol {
            return Err(Error::NotOnLine(r));
        }
        Ok(IncidencePoint { x, line })
    }
}

/// Parameter of `x` on the line through `embed(p1)`, `embed(p2)`: `x ∝ α·v1 + β·v2 ↦ [β : α]`.
fn line_parameter(x: &PlanePoint, frame: &[[C; 3]; 2]) -> Result<ProjScalar> {
    let [v1, v2] = frame;
    let n = cross(v1, v2);
    let nn: f64 = n.iter().map(|z| z.norm_sqr()).sum();
    let hdot = |a: &[C; 3]| -> C { (0..3).map(|i| n[i].conj() * a[i]).sum::<C>() / nn };
    let xc = x.coords();
    let alpha = hdot(&cross(&xc, v2));
    let beta = -hdot(&cross(&xc, v1));
    ProjScalar::new(beta, alpha)
}

/// `λ` of the incidence point with respect to an ordering of the line's three
/// curve points: the image of `x` under the map sending them to `0, 1, ∞`.
pub fn psi_plus_ordered(ip: &IncidencePoint, order: &[JacPoint; 3], curve: &Curve) -> Result<ProjScalar> {
    let v = order.clone().map(|p| embed(&p, curve));
    let frame = [v[0].coords(), v[1].coords()];
    let z = [
        line_parameter(&v[0], &frame)?,
        line_parameter(&v[1], &frame)?,
        line_parameter(&v[2], &frame)?,
        line_parameter(&ip.x, &frame)?,
    ];
    cross_ratio(&z[2], &z[0], &z[1], &z[3])
}

/// Parabolic datum attached to an incidence point.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiPlus {
    pub class: BundleClass,
    /// Fiber coordinate in `P⁺`, relative to the canonical order of the class.
    pub lambda: ProjScalar,
    pub flag: Flag,
    pub locus: Locus,
}

/// Main stratum only: lines tangent to the cubic are rejected.
pub fn psi_plus(ip: &IncidencePoint, curve: &Curve) -> Result<PsiPlus> {
    let pts = intersect_curve(&ip.line, curve)?;
    if distinct_count(&pts) != 3 {
        return Err(Error::TangentLine);
    }
    let class = classify_triple(&pts[0], &pts[1], &pts[2])?;
    let order = match &class {
        BundleClass::T1(t) => t.clone(),
        _ => return Err(Error::TangentLine),
    };
    let lambda = psi_plus_ordered(ip, &order, curve)?;
    let flag = standard_flag(Chamber::Pplus, &lambda)?;
    let locus = locus_tol(&class, &flag, 1e-9)?;
    Ok(PsiPlus { class, lambda, flag, locus })
}

/// `F2 = z1² + z1z2 + z2²`, `F3 = z1z2(z1 + z2)` and whether `4F2³ = 27F3²`
/// (the cusp `(F2/3)³ = (F3/2)²`).
pub fn covering_invariants(z1: C, z2: C, tol: f64) -> (C, C, bool) {
    let f2 = z1 * z1 + z1 * z2 + z2 * z2;
    let f3 = z1 * z2 * (z1 + z2);
    let lhs = f2 * f2 * f2 * 4.0;
    let rhs = f3 * f3 * 27.0;
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    (f2, f3, (lhs - rhs).norm() <= tol * scale)
}

/// Exact version of [`covering_invariants`].
pub fn covering_invariants_exact(z1: &BigRational, z2: &BigRational) -> (BigRational, BigRational, bool) {
    let f2 = z1 * z1 + z1 * z2 + z2 * z2;
    let f3 = z1 * z2 * (z1 + z2);
    let four = BigRational::from_integer(4.into());
    let tw7 = BigRational::from_integer(27.into());
    let on = (&f2 * &f2 * &f2 * four - &f3 * &f3 * tw7).is_zero();
    (f2, f3, on)
}

/// An unordered pair of points of the curve.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymPair {
    p1: JacPoint,
    p2: JacPoint,
}

impl SymPair {
    pub fn new(a: JacPoint, b: JacPoint) -> Self {
        // ties between an exact and an approximate point put the exact one first
        let first = match a.cmp_canonical(&b) {
            core::cmp::Ordering::Equal => a.is_exact() || !b.is_exact(),
            o => o.is_lt(),
        };
        if first {
            SymPair { p1: a, p2: b }
        } else {
            SymPair { p1: b, p2: a }
        }
    }

    pub fn points(&self) -> [&JacPoint; 2] {
        [&self.p1, &self.p2]
    }

    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        (self.p1.same_as(&other.p1, tol) && self.p2.same_as(&other.p2, tol))
            || (self.p1.same_as(&other.p2, tol) && self.p2.same_as(&other.p1, tol))
    }
}

/// Class of the divisor `[p1] + [p2] − 2[∞]`.
pub fn abel(sp: &SymPair) -> JacPoint {
    sp.p1.add(&sp.p2)
}

/// The two sections `s_{p1}`, `s_{p2}` of the ruled surface meet in the single point `{p1, p2}`.
pub fn section_meet(p1: &JacPoint, p2: &JacPoint) -> SymPair {
    SymPair::new(p1.clone(), p2.clone())
}

/// Number of points of the fiber over the line's class meeting the boundary.
pub fn sigma_cover_count(line: &PlaneLine, curve: &Curve) -> Result<u8> {
    let pts = intersect_curve(line, curve)?;
    let class = classify_triple(&pts[0], &pts[1], &pts[2])?;
    type_facts(class.label())
        .sigma_fiber_count
        .ok_or(Error::InvalidClassData("no fiber count for this type"))
}

/// Relative tolerance on `j` for [`curves_isomorphic`].
pub const J_TOL: f64 = 1e-6;

pub fn curves_isomorphic(tau1: C, tau2: C) -> Result<bool> {
    let j1 = j_invariant(tau1)?;
    let j2 = j_invariant(tau2)?;
    let scale = j1.norm().max(j2.norm()).max(1.0);
    Ok((j1 - j2).norm() <= J_TOL * scale)
}

/// A local chart of the moduli space: the line `Z2 = m·Z1 + c·Z3` and the point
/// of it with `Z1/Z3 = s` go to `(z1, z2, λ)`, where `z1, z2` are two of the
/// line's curve points followed continuously from `reference` and `λ` is taken
/// in the reference order.
pub fn moduli_chart(
    m: C,
    c0: C,
    s: C,
    reference: &[JacPoint; 3],
    curve: &Curve,
) -> Result<[C; 3]> {
    let one = C::new(1.0, 0.0);
    let line = PlaneLine::new([m, -one, c0])?;
    let x = PlanePoint::new([s, m * s + c0, one])?;
    let pts = intersect_curve(&line, curve)?;
    let mut used = [false; 3];
    let mut ordered = reference.clone();
    for (k, r) in reference.iter().enumerate() {
        let j = (0..3)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| r.lattice_dist(&pts[a]).total_cmp(&r.lattice_dist(&pts[b])))
            .expect("three candidates");
        used[j] = true;
        ordered[k] = pts[j].clone();
    }
    let spec: &CurveSpec = curve.spec();
    let lift = |r: &JacPoint, p: &JacPoint| {
        let (ds, dt) = p.sub(r).coords();
        let ws = if ds > 0.5 { ds - 1.0 } else { ds };
        let wt = if dt > 0.5 { dt - 1.0 } else { dt };
        r.to_complex(spec) + spec.point(ws, wt)
    };
    let ip = IncidencePoint::with_tol(x, line, 1e-6)?;
    let lam = psi_plus_ordered(&ip, &ordered, curve)?;
    let lv = lam.value().ok_or(Error::Degenerate("chart point at λ = ∞"))?;
    Ok([lift(&reference[0], &ordered[0]), lift(&reference[1], &ordered[1]), lv])
}
