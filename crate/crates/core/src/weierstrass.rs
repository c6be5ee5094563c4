//! The Weierstrass model `y²z = 4x³ − g₂xz² − g₃z³` of `C / (Z + τZ)`.
//!
//! `℘` and `℘′` are evaluated by summing the lattice row by row: each row
//! `z + nτ + Z` has the closed form `Σ_m (w + m)⁻² = π² csc²(πw)`, and the rows
//! decay geometrically in `n`. The Eisenstein sums behind `g₂`, `g₃` use the
//! analogous row identities for the fourth and sixth powers.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jaclattice::{CurveSpec, JacPoint};
use crate::projective::{cross, norm, proj_dist, PlaneLine, PlanePoint};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Below this distance to the lattice `wp` refuses to evaluate.
pub const POLE_TOL: f64 = 1e-10;
/// Jacobian points closer than this (in lattice coordinates) are merged.
pub const MERGE_TOL: f64 = 1e-6;
/// Tolerance for the zero-sum test on triples.
pub const SUM_TOL: f64 = 1e-6;

const MAX_ROWS: usize = 200_000;
const ROW_EPS: f64 = 1e-17;

fn r(x: f64) -> C {
    C::new(x, 0.0)
}

/// `e^w − 1` without cancellation for small `w`.
fn cexpm1(w: C) -> C {
    let em1 = libm::expm1(w.re);
    let (s, c) = (libm::sin(w.im), libm::cos(w.im));
    let half = libm::sin(0.5 * w.im);
    let cm1 = -2.0 * half * half;
    C::new(em1 * c + cm1, (em1 + 1.0) * s)
}

/// `(e^w, e^w − 1)`, each accurate in its own right.
fn exp_pair(w: C) -> (C, C) {
    if w.norm() < 0.5 {
        let em1 = cexpm1(w);
        (em1 + 1.0, em1)
    } else {
        let u = w.exp();
        (u, u - 1.0)
    }
}

/// `(csc²(πw), cot(πw))`, using whichever of `e^{±2πiw}` is inside the unit disk.
fn csc2_cot(w: C) -> (C, C) {
    if w.im >= 0.0 {
        let (u, em1) = exp_pair(I * (2.0 * PI) * w);
        (-4.0 * u / (em1 * em1), I * (u + 1.0) / em1)
    } else {
        let (v, em1) = exp_pair(-I * (2.0 * PI) * w);
        (-4.0 * v / (em1 * em1), -I * (v + 1.0) / em1)
    }
}

/// A curve with its lattice invariants and the row-sum constant precomputed.
#[derive(Clone, Copy, Debug)]
pub struct Curve {
    spec: CurveSpec,
    /// `τ` translated so that `|Re τ| ≤ 1/2`; spans the same lattice.
    tau: C,
    g2: C,
    g3: C,
    j: C,
    /// `Σ'` of `ω⁻²` in row order; the constant subtracted from `℘`.
    e2: C,
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        let t0 = spec.tau();
        let tau = t0 - r(libm::round(t0.re));
        let (g2, g3, e2) = eisenstein(tau)?;
        let j = j_from(g2, g3);
        Ok(Curve { spec, tau, g2, g3, j, e2 })
    }

    pub fn from_tau(tau: C) -> Result<Self> {
        Self::new(CurveSpec::new(tau)?)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn tau(&self) -> C {
        self.spec.tau()
    }

    pub fn g2(&self) -> C {
        self.g2
    }

    pub fn g3(&self) -> C {
        self.g3
    }

    pub fn j(&self) -> C {
        self.j
    }

    /// `z` moved into the parallelogram centered at 0.
    fn center(&self, z: C) -> C {
        let t = z.im / self.tau.im;
        let s = z.re - t * self.tau.re;
        let (ns, nt) = (libm::round(s), libm::round(t));
        z - r(ns) - self.tau * nt
    }

    /// Value of the cubic form at homogeneous coordinates `v`.
    pub fn cubic_form(&self, v: &[C; 3]) -> C {
        let [x, y, z] = *v;
        y * y * z - 4.0 * x * x * x + self.g2 * x * z * z + self.g3 * z * z * z
    }

    /// Gradient of the cubic form; at a point of the curve it is the tangent line.
    pub fn gradient(&self, v: &[C; 3]) -> [C; 3] {
        let [x, y, z] = *v;
        [
            -12.0 * x * x + self.g2 * z * z,
            2.0 * y * z,
            y * y + 2.0 * self.g2 * x * z + 3.0 * self.g3 * z * z,
        ]
    }

    /// Relative residual of the cubic at a plane point.
    pub fn on_cubic_residual(&self, p: &PlanePoint) -> f64 {
        let v = p.coords();
        let n = norm(&v);
        let scale = 1.0 + self.g2.norm() + self.g3.norm();
        self.cubic_form(&v).norm() / (n * n * n * scale)
    }
}

fn j_from(g2: C, g3: C) -> C {
    let g23 = g2 * g2 * g2;
    1728.0 * g23 / (g23 - 27.0 * g3 * g3)
}

/// `(g₂, g₃, e₂)` for a lattice `Z + τZ` with `|Re τ| ≤ 1/2`.
fn eisenstein(tau: C) -> Result<(C, C, C)> {
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    let pi6 = pi4 * pi2;
    let mut g4 = r(pi4 / 45.0);
    let mut g6 = r(2.0 * pi6 / 945.0);
    let mut e2 = r(pi2 / 3.0);
    for n in 1..=MAX_ROWS {
        let (c, _) = csc2_cot(tau * n as f64);
        let t2 = 2.0 * pi2 * c;
        let t4 = 2.0 * pi4 * (c * c - c * (2.0 / 3.0));
        let t6 = 2.0 * pi6 * (c * c * c - c * c + c * (2.0 / 15.0));
        e2 += t2;
        g4 += t4;
        g6 += t6;
        let small = |t: C, s: C| t.norm() <= ROW_EPS * (1.0 + s.norm());
        if small(t2, e2) && small(t4, g4) && small(t6, g6) {
            return Ok((60.0 * g4, 140.0 * g6, e2));
        }
    }
    Err(Error::NonConvergence("Eisenstein row sums"))
}

/// `(g₂, g₃, j)` of the lattice `Z + τZ`.
pub fn curve_invariants(spec: &CurveSpec) -> Result<(C, C, C)> {
    let c = Curve::new(*spec)?;
    Ok((c.g2, c.g3, c.j))
}

/// Representative of `τ` in the standard fundamental domain of `SL₂(Z)`.
pub fn reduce_tau(tau: C) -> C {
    let mut t = tau;
    for _ in 0..10_000 {
        t -= r(libm::round(t.re));
        if t.norm_sqr() < 1.0 - 1e-15 {
            t = -1.0 / t;
        } else {
            break;
        }
    }
    t
}

/// `j(τ)`, computed at the reduced representative where the sums converge fastest.
pub fn j_invariant(tau: C) -> Result<C> {
    let spec = CurveSpec::new(tau)?;
    let c = Curve::new(CurveSpec::new(reduce_tau(spec.tau()))?)?;
    Ok(c.j)
}

fn wp_centered(z: C, curve: &Curve) -> Result<(C, C)> {
    if z.norm() < POLE_TOL {
        return Err(Error::PoleProximity(z.norm()));
    }
    let pi2 = PI * PI;
    let pi3 = pi2 * PI;
    let row = |w: C| {
        let (c2, ct) = csc2_cot(w);
        (pi2 * c2, -2.0 * pi3 * c2 * ct)
    };
    let (mut p, mut dp) = row(z);
    for n in 1..=MAX_ROWS {
        let (a1, b1) = row(z + curve.tau * n as f64);
        let (a2, b2) = row(z - curve.tau * n as f64);
        let (da, db) = (a1 + a2, b1 + b2);
        p += da;
        dp += db;
        if da.norm() <= ROW_EPS * (1.0 + p.norm()) && db.norm() <= ROW_EPS * (1.0 + dp.norm()) {
            return Ok((p - curve.e2, dp));
        }
    }
    Err(Error::NonConvergence("lattice row sums for wp"))
}

/// `(℘(z), ℘′(z))`.
pub fn wp(z: C, curve: &Curve) -> Result<(C, C)> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite);
    }
    wp_centered(curve.center(z), curve)
}

/// `℘″ = 6℘² − g₂/2`.
pub fn wp_second(p: C, curve: &Curve) -> C {
    6.0 * p * p - 0.5 * curve.g2
}

const LAURENT_RADIUS: f64 = 1e-5;

/// `[℘(z) : ℘′(z) : 1]`, and the flex `[0 : 1 : 0]` on the lattice.
pub fn embed(p: &JacPoint, curve: &Curve) -> PlanePoint {
    let z = curve.center(p.to_complex_centered(curve.spec()));
    let v = if z.norm() < LAURENT_RADIUS {
        // z³·(℘, ℘′, 1) from the Laurent expansions.
        let (g2, g3) = (curve.g2, curve.g3);
        let z2 = z * z;
        let z3 = z2 * z;
        let z4 = z2 * z2;
        [
            z + g2 * z4 * z / 20.0 + g3 * z4 * z3 / 28.0,
            r(-2.0) + g2 * z4 / 10.0 + g3 * z3 * z3 / 7.0,
            z3,
        ]
    } else {
        let (x, y) = wp_centered(z, curve).expect("centered point is away from the pole");
        [x, y, r(1.0)]
    };
    PlanePoint::new(v).expect("embedded point has a nonzero coordinate")
}

fn tangent_at(p: &PlanePoint, curve: &Curve) -> Result<PlaneLine> {
    PlaneLine::new(curve.gradient(&p.coords()))
}

/// The line meeting the cubic in `p1 + p2 + p3` (with multiplicity).
pub fn line_through(p1: &JacPoint, p2: &JacPoint, p3: &JacPoint, curve: &Curve) -> Result<PlaneLine> {
    let sum = p1.add(p2).add(p3);
    if !sum.is_zero(SUM_TOL) {
        return Err(Error::NotZeroSum(sum.lattice_dist(&JacPoint::zero())));
    }
    let pts = [p1, p2, p3];
    let eq = |a: usize, b: usize| pts[a].same_as(pts[b], MERGE_TOL);
    if eq(0, 1) && eq(1, 2) {
        return tangent_at(&embed(p1, curve), curve);
    }
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        if eq(a, b) {
            return tangent_at(&embed(pts[a], curve), curve);
        }
    }
    let e: Vec<[C; 3]> = pts.iter().map(|p| embed(p, curve).coords()).collect();
    let (mut best, mut sep) = ((0, 1), 0.0);
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let d = proj_dist(&e[a], &e[b]);
        if d > sep {
            best = (a, b);
            sep = d;
        }
    }
    if sep < 1e-13 {
        return Err(Error::Degenerate("embedded points are numerically coincident"));
    }
    PlaneLine::new(cross(&e[best.0], &e[best.1]))
}

/// Binary form `Σ c[i] α^{d−i} β^i`.
fn bmul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = alloc::vec![r(0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `F(αP + βQ)` as a binary cubic.
fn restrict_cubic(p: &[C; 3], q: &[C; 3], curve: &Curve) -> [C; 4] {
    let x = [p[0], q[0]];
    let y = [p[1], q[1]];
    let z = [p[2], q[2]];
    let yyz = bmul(&bmul(&y, &y), &z);
    let xxx = bmul(&bmul(&x, &x), &x);
    let xzz = bmul(&bmul(&x, &z), &z);
    let zzz = bmul(&bmul(&z, &z), &z);
    let mut out = [r(0.0); 4];
    for i in 0..4 {
        out[i] = yyz[i] - 4.0 * xxx[i] + curve.g2 * xzz[i] + curve.g3 * zzz[i];
    }
    out
}

fn eval_monic(a: &[C; 3], x: C) -> (C, C, C) {
    let p = ((x + a[0]) * x + a[1]) * x + a[2];
    let dp = (3.0 * x + 2.0 * a[0]) * x + a[1];
    let ddp = 6.0 * x + 2.0 * a[0];
    (p, dp, ddp)
}

/// Roots of `x³ + a₀x² + a₁x + a₂`.
fn monic_roots(a: &[C; 3]) -> Result<[C; 3]> {
    let z = r(0.0);
    let one = r(1.0);
    let m = Matrix3::new(-a[0], -a[1], -a[2], one, z, z, z, one, z);
    let ev = m.schur().eigenvalues().ok_or(Error::NonConvergence("companion eigenvalues"))?;
    let mut roots = [ev[0], ev[1], ev[2]];
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = eval_monic(a, *x);
            if dp.norm() < 1e-8 * libm::pow(1.0 + x.norm(), 2.0) {
                break;
            }
            let nx = *x - p / dp;
            if eval_monic(a, nx).0.norm() < p.norm() {
                *x = nx;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// Merge nearly coincident roots into exact multiple roots: a double root is
/// refined as the nearby zero of `p′`, a triple root as the zero of `p″`.
fn cluster_roots(a: &[C; 3], roots: &[C; 3]) -> [C; 3] {
    let close = |x: C, y: C| (x - y).norm() <= 1e-4 * (1.0 + x.norm().max(y.norm()));
    let (c01, c02, c12) = (close(roots[0], roots[1]), close(roots[0], roots[2]), close(roots[1], roots[2]));
    let n_close = [c01, c02, c12].iter().filter(|b| **b).count();
    if n_close >= 2 {
        let x = -a[0] / 3.0;
        return [x, x, x];
    }
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        if close(roots[i], roots[j]) {
            let mut x = 0.5 * (roots[i] + roots[j]);
            for _ in 0..8 {
                let (_, dp, ddp) = eval_monic(a, x);
                if ddp.norm() == 0.0 {
                    break;
                }
                x -= dp / ddp;
            }
            return [x, x, roots[k]];
        }
    }
    *roots
}

/// Solve `℘(z) = x, ℘′(z) = y` for a point `[x : y : 1]` of the cubic.
fn invert_affine(x: C, y: C, curve: &Curve) -> Result<C> {
    let resid = |z: C| -> Option<(f64, C, C, C, C)> {
        let (p, dp) = wp_centered(curve.center(z), curve).ok()?;
        let rp = p - x;
        let rd = dp - y;
        let rel = rp.norm() / (1.0 + x.norm()) + rd.norm() / (1.0 + y.norm());
        Some((rel, rp, rd, dp, p))
    };
    let mut seeds: Vec<(f64, C)> = Vec::new();
    for i in 0..10 {
        for k in 0..10 {
            let s = -0.5 + 0.1 * i as f64;
            let t = -0.5 + 0.1 * k as f64;
            let z = r(s) + curve.tau * t;
            if let Some((rel, ..)) = resid(z) {
                seeds.push((rel, z));
            }
        }
    }
    if x.norm() > 4.0 {
        let z0 = r(1.0) / x.sqrt();
        for z in [z0, -z0] {
            if let Some((rel, ..)) = resid(z) {
                seeds.push((rel, z));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, C)> = None;
    for &(_, z0) in seeds.iter() {
        let mut z = z0;
        let Some(mut cur) = resid(z) else { continue };
        for _ in 0..100 {
            let (rel, rp, rd, dp, p) = cur;
            if rel < 1e-14 {
                break;
            }
            let ddp = wp_second(p, curve);
            let jj = dp.norm_sqr() + ddp.norm_sqr();
            if jj == 0.0 {
                break;
            }
            let step = -(dp.conj() * rp + ddp.conj() * rd) / jj;

            let mut h = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let nz = z + step * h;
                if let Some(next) = resid(nz) {
                    if next.0 < rel {
                        z = nz;
                        cur = next;
                        moved = true;
                        break;
                    }
                }
                h *= 0.5;
            }
            if !moved || (step * h).norm() < 1e-16 * (1.0 + z.norm()) {
                break;
            }
        }
        if best.is_none_or(|b| cur.0 < b.0) {
            best = Some((cur.0, z));
        }
        if cur.0 < 1e-10 {
            break;
        }
    }
    match best {
        Some((rel, z)) if rel < 1e-8 => Ok(z),
        _ => Err(Error::NonConvergence("inverting the Weierstrass embedding")),
    }
}

/// Parameter `z` of a point of the embedded cubic.
pub fn invert_embed(p: &PlanePoint, curve: &Curve) -> Result<JacPoint> {
    let v = p.coords();
    let n = norm(&v);
    if v[2].norm() <= 1e-9 * n {
        return Ok(JacPoint::zero().to_approx());
    }
    let z = invert_affine(v[0] / v[2], v[1] / v[2], curve)?;
    JacPoint::from_complex(z, curve.spec())
}

fn points_from_roots(roots: &[C; 3], p: &[C; 3], q: &[C; 3], curve: &Curve) -> Result<[JacPoint; 3]> {
    let mut out: Vec<JacPoint> = Vec::with_capacity(3);
    for (i, x) in roots.iter().enumerate() {
        if let Some(k) = (0..i).find(|&k| roots[k] == *x) {
            out.push(out[k].clone());
            continue;
        }
        let v = [*x * p[0] + q[0], *x * p[1] + q[1], *x * p[2] + q[2]];
        out.push(invert_embed(&PlanePoint::new(v)?, curve)?);
    }
    let mut arr = [out[0].clone(), out[1].clone(), out[2].clone()];
    for i in 0..3 {
        for j in 0..i {
            if arr[i].same_as(&arr[j], MERGE_TOL) {
                arr[i] = arr[j].clone();
            }
        }
    }
    Ok(arr)
}

/// The three points where `line` meets the cubic, with multiplicity,
/// in canonical order.
pub fn intersect_curve(line: &PlaneLine, curve: &Curve) -> Result<[JacPoint; 3]> {
    let u = line.coords();
    let big = (0..3).max_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm())).unwrap_or(0);
    let basis: Vec<usize> = (0..3).filter(|&k| k != big).collect();
    let unit = |k: usize| {
        let mut e = [r(0.0); 3];
        e[k] = r(1.0);
        e
    };
    let p0 = cross(&u, &unit(basis[0]));
    let q = cross(&u, &unit(basis[1]));
    let kappas = [r(0.0), C::new(0.37, 0.61), C::new(-0.83, 0.29), C::new(1.7, -1.1)];
    let mut chosen = None;
    for k in kappas {
        let p = [p0[0] + k * q[0], p0[1] + k * q[1], p0[2] + k * q[2]];
        let coef = restrict_cubic(&p, &q, curve);
        let scale = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::Degenerate("line lies in the cubic"));
        }
        if coef[0].norm() >= 1e-3 * scale {
            chosen = Some((p, coef));
            break;
        }
    }
    let (p, coef) = chosen.ok_or(Error::Degenerate("no admissible line parametrization"))?;
    let a = [coef[1] / coef[0], coef[2] / coef[0], coef[3] / coef[0]];
    let raw = monic_roots(&a)?;
    let merged = cluster_roots(&a, &raw);
    let mut attempts = alloc::vec![merged];
    if merged != raw {
        attempts.push(raw);
    }
    let mut last = Err(Error::NonConvergence("line-cubic intersection"));
    for roots in attempts {
        match points_from_roots(&roots, &p, &q, curve) {
            Ok(pts) => {
                let sum = pts[0].add(&pts[1]).add(&pts[2]);
                if sum.is_zero(SUM_TOL) {
                    let mut pts = pts;
                    pts.sort_by(|a, b| a.cmp_canonical(b));
                    return Ok(pts);
                }
                last = Err(Error::NotZeroSum(sum.lattice_dist(&JacPoint::zero())));
            }
            Err(e) => last = Err(e),
        }
    }
    last
}

/// Number of distinct points in a multiset of three.
pub fn distinct_count(pts: &[JacPoint; 3]) -> usize {
    let mut n = 1;
    if !pts[1].same_as(&pts[0], MERGE_TOL) {
        n += 1;
    }
    if !pts[2].same_as(&pts[0], MERGE_TOL) && !pts[2].same_as(&pts[1], MERGE_TOL) {
        n += 1;
    }
    n
}

/// `(tangent to the cubic, flex tangent)`.
pub fn dual_sextic_contains(line: &PlaneLine, curve: &Curve) -> Result<(bool, bool)> {
    let pts = intersect_curve(line, curve)?;
    let n = distinct_count(&pts);
    Ok((n < 3, n == 1))
}
