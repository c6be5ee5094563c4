//! Flat rank-3 bundles with trivial determinant, given by commuting monodromy
//! matrices `A` (around `1`) and `B` (around `τ`).
//!
//! The pair splits into joint generalized eigenspaces. On a block with
//! eigenvalues `(a, b)` the monodromy is `(a·e^{2πiX}, b·e^{2πiY})` with `X, Y`
//! commuting nilpotents, the block contributes the line bundle
//! `from_holonomy(a, b)`, and its holomorphic type is the Jordan type of
//! `Y − τX`. Blocks are grouped by their Jacobian point and the Jordan type of
//! each group decides the label.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::bundles::{BundleClass, Label, LineLocus, PointLocus, SubbundleConfig};
use crate::error::{Error, Result};
use crate::jaclattice::{from_holonomy, torsion_points, CurveSpec, JacPoint};
use crate::projective::{PlaneLine, PlanePoint};
use crate::weierstrass::MERGE_TOL;

type C = Complex64;
type M = Matrix3<C>;

const fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Default tolerance of [`validate`] (max-norm residuals).
pub const VALIDATE_TOL: f64 = 1e-8;
/// Cluster scores at or below this merge eigenvalues.
pub const MERGE_SCORE: f64 = 1e-12;
/// Relative eigenvalue gap below which unmergeable eigenvalues are an error.
pub const SEPARATION: f64 = 1e-7;
const NILPOTENT_TOL: f64 = 1e-6;
const SCALAR_TOL: f64 = 1e-7;
const RANK_TOL: f64 = 1e-7;

/// Generic combination separating joint eigenvalues.
const GAMMA: C = C::new(0.754_877_666_2, 0.569_840_291_0);

fn max_norm(m: &M) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn finite(m: &M) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A validated pair of commuting unimodular matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingPair {
    a: M,
    b: M,
}

impl CommutingPair {
    pub fn new(a: M, b: M) -> Result<Self> {
        validate(a, b, VALIDATE_TOL)
    }

    pub fn a(&self) -> &M {
        &self.a
    }

    pub fn b(&self) -> &M {
        &self.b
    }

    /// `(P⁻¹AP, P⁻¹BP)`.
    pub fn conjugate(&self, p: &M) -> Result<Self> {
        let inv = p.try_inverse().ok_or(Error::Degenerate("singular conjugator"))?;
        Ok(CommutingPair { a: inv * self.a * p, b: inv * self.b * p })
    }

    fn swapped(&self) -> Self {
        CommutingPair { a: self.b, b: self.a }
    }
}

/// Checks `|det − 1| < tol` for both matrices and `‖AB − BA‖ < tol`.
pub fn validate(a: M, b: M, tol: f64) -> Result<CommutingPair> {
    if !finite(&a) || !finite(&b) {
        return Err(Error::NonFinite);
    }
    for (which, m) in [('A', &a), ('B', &b)] {
        let residual = (m.determinant() - 1.0).norm();
        if residual >= tol {
            return Err(Error::NotUnimodular { which, residual });
        }
    }
    let comm = max_norm(&(a * b - b * a));
    if comm >= tol {
        return Err(Error::NotCommuting(comm));
    }
    Ok(CommutingPair { a, b })
}

fn sorted_singular_values(m: &M) -> [f64; 3] {
    let s = m.singular_values();
    let mut v = [s[0], s[1], s[2]];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    v
}

/// Size of `(C − λ)^m` on its `m` smallest singular directions, relative to `s^m`.
/// Near zero iff `C` has an `m`-dimensional generalized eigenspace at `λ`.
fn cluster_score(cm: &M, lam: C, m: usize, s: f64) -> f64 {
    let d = cm - M::identity() * lam;
    let mut p = d;
    for _ in 1..m {
        p *= d;
    }
    sorted_singular_values(&p)[m - 1] / libm::pow(s, m as f64)
}

/// Eigenvalue clusters of `C` as `(centre, multiplicity)`.
fn clusters(cm: &M) -> Result<Vec<(C, usize)>> {
    let ev = cm.schur().eigenvalues().ok_or(Error::NonConvergence("eigenvalues"))?;
    let ev = [ev[0], ev[1], ev[2]];
    let s = cm.norm().max(1.0);
    let mean = (ev[0] + ev[1] + ev[2]) / 3.0;
    if cluster_score(cm, mean, 3, s) <= MERGE_SCORE {
        return Ok(alloc::vec![(mean, 3)]);
    }
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let mut merged = Vec::new();
    for &(i, j, k) in &pairs {
        let lam = (ev[i] + ev[j]) / 2.0;
        let sc = cluster_score(cm, lam, 2, s);
        let gap = (ev[i] - ev[j]).norm() / s;
        if sc <= MERGE_SCORE {
            merged.push((lam, k));
        } else if gap < SEPARATION {
            return Err(Error::IndistinguishableEigenvalues(gap));
        }
    }
    match merged.as_slice() {
        [] => Ok(ev.iter().map(|&l| (l, 1)).collect()),
        [(lam, k)] => Ok(alloc::vec![(*lam, 2), (ev[*k], 1)]),
        // a chain of close pairs that fails to merge as a triple
        _ => Err(Error::IndistinguishableEigenvalues(cluster_score(cm, mean, 3, s))),
    }
}

/// Orthonormal basis of the `k` smallest right singular directions.
fn null_basis(m: &M, k: usize) -> Result<Vec<Vector3<C>>> {
    let svd = m.svd(false, true);
    let vt = svd.v_t.ok_or(Error::NonConvergence("singular value decomposition"))?;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&x, &y| {
        svd.singular_values[x]
            .partial_cmp(&svd.singular_values[y])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(idx[..k].iter().map(|&r| vt.row(r).adjoint()).collect())
}

/// One joint generalized eigenspace.
#[derive(Clone, Debug)]
struct Block {
    /// Indices of the block in the adapted basis.
    range: core::ops::Range<usize>,
    a: C,
    b: C,
    /// `A/a − I` and `B/b − I` on the block, zero elsewhere (adapted basis).
    na: M,
    nb: M,
}

impl Block {
    fn dim(&self) -> usize {
        self.range.len()
    }
}

/// The pair in a basis adapted to its joint generalized eigenspaces.
#[derive(Clone, Debug)]
struct Decomposition {
    /// Columns: the adapted basis.
    s: M,
    blocks: Vec<Block>,
}

fn projector(r: &core::ops::Range<usize>) -> M {
    let mut e = M::zeros();
    for i in r.clone() {
        e[(i, i)] = c(1.0);
    }
    e
}

fn decompose(pair: &CommutingPair) -> Result<Decomposition> {
    let cm = pair.a + pair.b * GAMMA;
    let cl = clusters(&cm)?;
    let mut s = M::zeros();
    let mut ranges = Vec::new();
    let mut col = 0;
    for &(lam, m) in &cl {
        let d = cm - M::identity() * lam;
        let mut p = d;
        for _ in 1..m {
            p *= d;
        }
        for v in null_basis(&p, m)? {
            s.set_column(col, &v);
            col += 1;
        }
        ranges.push(col - m..col);
    }
    let inv = s.try_inverse().ok_or(Error::IndistinguishableEigenvalues(0.0))?;
    let ap = inv * pair.a * s;
    let bp = inv * pair.b * s;
    let mut blocks = Vec::new();
    let mut inside = M::zeros();
    for r in ranges {
        let e = projector(&r);
        inside += e * ap * e;
        let m = r.len() as f64;
        let ab = e * ap * e;
        let bb = e * bp * e;
        let a = ab.trace() / m;
        let b = bb.trace() / m;
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::ZeroInput);
        }
        let na = ab / a - e;
        let nb = bb / b - e;
        for n in [&na, &nb] {
            let resid = max_norm(&(n * n * n));
            if resid > NILPOTENT_TOL {
                return Err(Error::IndistinguishableEigenvalues(resid));
            }
        }
        blocks.push(Block { range: r, a, b, na, nb });
    }
    let leak = max_norm(&(ap - inside)) / max_norm(&ap).max(1.0);
    if leak > NILPOTENT_TOL {
        return Err(Error::IndistinguishableEigenvalues(leak));
    }
    Ok(Decomposition { s, blocks })
}

/// `log(I + N) / 2πi` for nilpotent `N` of order at most 3.
fn unipotent_log(n: &M) -> M {
    (n - n * n * c(0.5)) / C::new(0.0, 2.0 * PI)
}

fn numerical_rank(m: &M, scale: f64) -> usize {
    let sv = sorted_singular_values(m);
    sv.iter().filter(|&&x| x > RANK_TOL * scale.max(1.0)).count()
}

/// The three normal forms, up to conjugation and exchanging `A` and `B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalForm {
    /// Case (i): `A = diag(a)`, `B = diag(b)`.
    Diagonal { a: [C; 3], b: [C; 3] },
    /// Case (ii): `A = diag(a⁻², [[a, 1], [0, a]])`, `B = diag(b⁻², [[b, b1], [0, b]])`.
    Split { a: C, b: C, b1: C },
    /// Case (iii): `A` one Jordan block of eigenvalue `a`, `B` upper triangular
    /// Toeplitz with rows `(b, b1, b2)`.
    Unipotent { a: C, b: C, b1: C, b2: C },
}

impl NormalForm {
    pub fn case(&self) -> u8 {
        match self {
            NormalForm::Diagonal { .. } => 1,
            NormalForm::Split { .. } => 2,
            NormalForm::Unipotent { .. } => 3,
        }
    }

    pub fn matrices(&self) -> (M, M) {
        let z = c(0.0);
        let one = c(1.0);
        match *self {
            NormalForm::Diagonal { a, b } => (
                M::from_diagonal(&Vector3::new(a[0], a[1], a[2])),
                M::from_diagonal(&Vector3::new(b[0], b[1], b[2])),
            ),
            NormalForm::Split { a, b, b1 } => (
                M::new(a.powi(-2), z, z, z, a, one, z, z, a),
                M::new(b.powi(-2), z, z, z, b, b1, z, z, b),
            ),
            NormalForm::Unipotent { a, b, b1, b2 } => (
                M::new(a, one, z, z, a, one, z, z, a),
                M::new(b, b1, b2, z, b, b1, z, z, b),
            ),
        }
    }
}

/// A normal form with `P⁻¹ A' P` and `P⁻¹ B' P` equal to its matrices, where
/// `(A', B')` is the pair, exchanged when `swapped`. `det P = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormResult {
    pub form: NormalForm,
    pub conjugator: M,
    pub swapped: bool,
}

fn unit_det(p: M) -> Result<M> {
    let d = p.determinant();
    if d.norm() < 1e-300 {
        return Err(Error::IndistinguishableEigenvalues(d.norm()));
    }
    Ok(p / d.powf(1.0 / 3.0))
}

fn vdot(x: &Vector3<C>, y: &Vector3<C>) -> C {
    x.dotc(y)
}

/// Column `j` of `s` maximizing `|D s_j|`, with the index range restricted to `r`.
fn best_column(d: &M, s: &M, r: core::ops::Range<usize>) -> Vector3<C> {
    let mut best = s.column(r.start).into_owned();
    let mut best_n = -1.0;
    for j in r {
        let v = s.column(j).into_owned();
        let n = (d * v).norm() / v.norm();
        if n > best_n {
            best_n = n;
            best = v;
        }
    }
    best
}

pub fn normal_form(pair: &CommutingPair) -> Result<NormalFormResult> {
    let dec = decompose(pair)?;
    normal_form_from(pair, &dec)
}

fn normal_form_from(pair: &CommutingPair, dec: &Decomposition) -> Result<NormalFormResult> {
    let scalar = |n: &M| max_norm(n) <= SCALAR_TOL;
    if dec.blocks.iter().all(|b| scalar(&b.na) && scalar(&b.nb)) {
        let p = unit_det(dec.s)?;
        let inv = p.try_inverse().ok_or(Error::IndistinguishableEigenvalues(0.0))?;
        let ap = inv * pair.a * p;
        let bp = inv * pair.b * p;
        let form = NormalForm::Diagonal {
            a: [ap[(0, 0)], ap[(1, 1)], ap[(2, 2)]],
            b: [bp[(0, 0)], bp[(1, 1)], bp[(2, 2)]],
        };
        return Ok(NormalFormResult { form, conjugator: p, swapped: false });
    }
    let split_form = |pr: &CommutingPair, (ea, eb): (C, C), u: Vector3<C>, v2: Vector3<C>, swapped: bool| {
        let v1 = (pr.a - M::identity() * ea) * v2;
        let b1 = vdot(&v1, &((pr.b - M::identity() * eb) * v2)) / vdot(&v1, &v1);
        let p = unit_det(M::from_columns(&[u, v1, v2]))?;
        Ok(NormalFormResult { form: NormalForm::Split { a: ea, b: eb, b1 }, conjugator: p, swapped })
    };
    if let Some(k) = dec.blocks.iter().position(|b| b.dim() == 2) {
        let blk = &dec.blocks[k];
        let swapped = scalar(&blk.na);
        let pr = if swapped { pair.swapped() } else { pair.clone() };
        let ev = if swapped { (blk.b, blk.a) } else { (blk.a, blk.b) };
        let d = pr.a - M::identity() * ev.0;
        let v2 = best_column(&d, &dec.s, blk.range.clone());
        let other = dec.blocks.iter().find(|b| b.dim() == 1).expect("dims sum to three");
        let u = dec.s.column(other.range.start).into_owned();
        return split_form(&pr, ev, u, v2, swapped);
    }
    // a single three-dimensional block
    let blk = &dec.blocks[0];
    let full = |n: &M| max_norm(&(n * n)) > SCALAR_TOL;
    if full(&blk.na) || full(&blk.nb) {
        let swapped = !full(&blk.na);
        let pr = if swapped { pair.swapped() } else { pair.clone() };
        let ea = if swapped { blk.b } else { blk.a };
        let d = pr.a - M::identity() * ea;
        let v3 = best_column(&(d * d), &M::identity(), 0..3);
        let v2 = d * v3;
        let v1 = d * v2;
        let p = unit_det(M::from_columns(&[v1, v2, v3]))?;
        let inv = p.try_inverse().ok_or(Error::IndistinguishableEigenvalues(0.0))?;
        let bp = inv * pr.b * p;
        let form = NormalForm::Unipotent { a: ea, b: bp.trace() / 3.0, b1: bp[(0, 1)], b2: bp[(0, 2)] };
        return Ok(NormalFormResult { form, conjugator: p, swapped });
    }
    // both square to zero: a split form needs the two nilpotents proportional
    let (m, n) = if scalar(&blk.na) { (&blk.nb, &blk.na) } else { (&blk.na, &blk.nb) };
    let ratio = m.dotc(n) / m.dotc(m);
    if max_norm(&(n - m * ratio)) > SCALAR_TOL {
        return Err(Error::UnsupportedJordanStructure);
    }
    let swapped = scalar(&blk.na);
    let pr = if swapped { pair.swapped() } else { pair.clone() };
    let ev = if swapped { (blk.b, blk.a) } else { (blk.a, blk.b) };
    let d = pr.a - M::identity() * ev.0;
    let v2 = best_column(&d, &M::identity(), 0..3);
    let v1 = d * v2;
    let mut u = v1;
    let mut best = -1.0;
    for k in null_basis(&d, 2)? {
        let w = k - v1 * (vdot(&v1, &k) / vdot(&v1, &v1));
        if w.norm() > best {
            best = w.norm();
            u = w;
        }
    }
    split_form(&pr, ev, u, v2, swapped)
}

/// Flags raised by [`classify_detailed`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// A case (ii) pair. Which twist of the rank-2 block is decomposable can be
    /// read two ways; `implemented` is the label returned, `alternative` the other reading.
    CaseTwoDirection { implemented: Label, alternative: Label },
}

/// Output of [`classify_detailed`].
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub class: BundleClass,
    /// `None` when the pair has none of the three shapes.
    pub normal_form: Option<NormalFormResult>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn classify_bundle(pair: &CommutingPair, curve: &CurveSpec) -> Result<BundleClass> {
    classify_detailed(pair, curve).map(|c| c.class)
}

pub fn classify_detailed(pair: &CommutingPair, curve: &CurveSpec) -> Result<Classification> {
    let dec = decompose(pair)?;
    let tau = curve.tau();
    let mut groups: Vec<(JacPoint, usize, M, f64)> = Vec::new();
    for blk in &dec.blocks {
        let p = from_holonomy(blk.a, blk.b, curve)?;
        let x = unipotent_log(&blk.na);
        let y = unipotent_log(&blk.nb);
        let q = y - x * tau;
        let scale = x.norm() + tau.norm() * y.norm();
        match groups.iter_mut().find(|g| g.0.same_as(&p, MERGE_TOL)) {
            Some(g) => {
                g.1 += blk.dim();
                g.2 += q;
                g.3 = g.3.max(scale);
            }
            None => groups.push((p, blk.dim(), q, scale)),
        }
    }
    let class = match groups.len() {
        3 => BundleClass::split([groups[0].0.clone(), groups[1].0.clone(), groups[2].0.clone()])?,
        2 => {
            let g = groups.iter().find(|g| g.1 == 2).expect("dims sum to three");
            let label = if numerical_rank(&g.2, g.3) == 0 { Label::T22 } else { Label::T21 };
            BundleClass::with_point(label, g.0.clone())?
        }
        _ => {
            let g = &groups[0];
            let z = torsion_points(3)?
                .into_iter()
                .find(|t| t.same_as(&g.0, MERGE_TOL))
                .ok_or(Error::NotZeroSum(g.0.mul(3).lattice_dist(&JacPoint::zero())))?;
            let label = match numerical_rank(&g.2, g.3) {
                0 => Label::T33,
                1 => Label::T32,
                _ => Label::T31,
            };
            BundleClass::with_point(label, z)?
        }
    };
    let normal_form = match normal_form_from(pair, &dec) {
        Ok(nf) => Some(nf),
        Err(Error::UnsupportedJordanStructure) => None,
        Err(e) => return Err(e),
    };
    let mut diagnostics = Vec::new();
    if normal_form.as_ref().is_some_and(|nf| nf.form.case() == 2) {
        let other = match class.label() {
            Label::T21 => Some(Label::T22),
            Label::T22 => Some(Label::T21),
            Label::T32 => Some(Label::T33),
            Label::T33 => Some(Label::T32),
            _ => None,
        };
        if let Some(alternative) = other {
            diagnostics.push(Diagnostic::CaseTwoDirection { implemented: class.label(), alternative });
        }
    }
    Ok(Classification { class, normal_form, diagnostics })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `A = I`, `B = diag(b1, b2, 1/(b1 b2))`.
    Decomposable,
    /// `A = I`, `B` upper triangular with the same diagonal and ones above it.
    Generic,
}

pub fn universal_pair(b1: C, b2: C, kind: FamilyKind) -> Result<CommutingPair> {
    for v in [b1, b2] {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite);
        }
        if v.norm() == 0.0 {
            return Err(Error::ZeroInput);
        }
    }
    let z = c(0.0);
    let s = if kind == FamilyKind::Generic { c(1.0) } else { z };
    let b3 = 1.0 / (b1 * b2);
    let b = M::new(b1, s, z, z, b2, s, z, z, b3);
    Ok(CommutingPair { a: M::identity(), b })
}

/// Relative size below which two of `b1, b2, b3` count as equal.
const COINCIDENCE_TOL: f64 = 1e-12;

fn check_distinct(b1: C, b2: C) -> Result<()> {
    if [b1, b2].iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if b1.norm() == 0.0 || b2.norm() == 0.0 {
        return Err(Error::ZeroInput);
    }
    let b3 = 1.0 / (b1 * b2);
    let scale = b1.norm().max(b2.norm()).max(b3.norm());
    let close = |x: C, y: C| (x - y).norm() <= COINCIDENCE_TOL * scale;
    if close(b1, b2) || close(b1, b3) || close(b2, b3) {
        return Err(Error::Degenerate("coincident eigenvalues"));
    }
    Ok(())
}

/// Degree-0 subbundles of the generic family in the fiber at the base point,
/// in the monodromy frame: `L1, L2, L3` then `L1⊕L2, L1⊕L3, L2⊕L3`.
pub fn universal_config(b1: C, b2: C) -> Result<SubbundleConfig> {
    check_distinct(b1, b2)?;
    let one = c(1.0);
    let z = c(0.0);
    let p = b1 * b2;
    let e1 = one - b1 * b1 * b2;
    let e2 = one - b1 * b2 * b2;
    let pts = [
        PlanePoint::new([one, z, z])?,
        PlanePoint::new([one, b2 - b1, z])?,
        PlanePoint::new([p * p, p * e1, e1 * e2])?,
    ];
    let lines = [
        PlaneLine::new([z, z, one])?,
        PlaneLine::new([z, one, -p / e2])?,
        PlaneLine::new([-(b2 - b1), one, -p / e1])?,
    ];
    Ok(SubbundleConfig {
        rank1: pts.iter().map(|&x| PointLocus::Isolated(x)).collect(),
        rank2: lines.iter().map(|&l| LineLocus::Isolated(l)).collect(),
    })
}

/// Fiber coordinate `λ` of the parabolic structure `[0:w:1] ∈ {Z1 = 0}` on the
/// generic family, after bringing the three subbundles to the coordinate points.
pub fn universal_lambda(b1: C, b2: C, w: C) -> Result<C> {
    check_distinct(b1, b2)?;
    let one = c(1.0);
    let p = b1 * b2;
    let e1 = one - b1 * b1 * b2;
    let e2 = one - b1 * b2 * b2;
    Ok(e2 * e1 / (p * p * (b2 - b1)) * w - e2 / (p * (b2 - b1)))
}
