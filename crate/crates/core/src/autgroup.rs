//! The group of order 18 generated by tensoring with 3-torsion line bundles and
//! by dualization. On the curve an element acts by `z ↦ ε(z + s)` with `3s = 0`
//! and `ε = −1` exactly when it dualizes.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::bundles::{BundleClass, Label};
use crate::error::{Error, Result};
use crate::jaclattice::{torsion_points, JacPoint};
use crate::parabolic::{natural_map, normalize_flag, standard_flag, Chamber, Flag};
use crate::projective::ProjScalar;
use crate::weierstrass::{embed, Curve};

type C = Complex64;

/// `z ↦ z + shift`, followed by `z ↦ −z` when `dual`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModularAuto {
    shift: JacPoint,
    dual: bool,
}

impl ModularAuto {
    pub fn new(shift: JacPoint, dual: bool) -> Result<Self> {
        if shift.as_exact().is_none() || !shift.is_torsion(3, 0.0) {
            return Err(Error::InvalidClassData("shift must be an exact 3-torsion point"));
        }
        Ok(ModularAuto { shift, dual })
    }

    pub fn identity() -> Self {
        ModularAuto { shift: JacPoint::zero(), dual: false }
    }

    pub fn shift(&self) -> &JacPoint {
        &self.shift
    }

    pub fn dual(&self) -> bool {
        self.dual
    }

    pub fn apply(&self, z: &JacPoint) -> JacPoint {
        let w = z.add(&self.shift);
        if self.dual {
            w.neg()
        } else {
            w
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let s1 = if other.dual { self.shift.neg() } else { self.shift.clone() };
        ModularAuto { shift: other.shift.add(&s1), dual: self.dual ^ other.dual }
    }

    pub fn inverse(&self) -> Self {
        let shift = if self.dual { self.shift.clone() } else { self.shift.neg() };
        ModularAuto { shift, dual: self.dual }
    }
}

/// All 18 elements, translations first.
pub fn group_elements() -> Vec<ModularAuto> {
    let pts = torsion_points(3).expect("order 3 is valid");
    let mut out = Vec::with_capacity(18);
    for dual in [false, true] {
        for p in &pts {
            out.push(ModularAuto { shift: p.clone(), dual });
        }
    }
    out
}

/// Sorted image of a split triple and the permutation: new `k` is old `perm[k]`.
fn map_triple(t: &[JacPoint; 3], f: impl Fn(&JacPoint) -> JacPoint) -> ([JacPoint; 3], [usize; 3]) {
    let mut idx = [0usize, 1, 2];
    let img = [f(&t[0]), f(&t[1]), f(&t[2])];
    idx.sort_by(|&a, &b| img[a].cmp_canonical(&img[b]));
    (idx.map(|i| img[i].clone()), idx)
}

pub fn act_class(g: &ModularAuto, class: &BundleClass) -> BundleClass {
    let z = |p: &JacPoint| g.apply(p);
    match class {
        BundleClass::T1(t) => BundleClass::T1(map_triple(t, z).0),
        BundleClass::T21(p) => BundleClass::T21(z(p)),
        BundleClass::T22(p) => BundleClass::T22(z(p)),
        BundleClass::T31(p) => BundleClass::T31(z(p)),
        BundleClass::T32(p) => BundleClass::T32(z(p)),
        BundleClass::T33(p) => BundleClass::T33(z(p)),
    }
}

/// Points used for the correspondence system; away from the 3-torsion and general.
const SAMPLES: [(f64, f64); 8] = [
    (0.137, 0.219),
    (0.412, 0.083),
    (0.271, 0.644),
    (0.803, 0.358),
    (0.559, 0.917),
    (0.094, 0.771),
    (0.688, 0.502),
    (0.947, 0.131),
];

/// Singular value ratios beyond these make the lift ill-conditioned.
const NULL_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-6;

/// The projective-linear map of the plane restricting to `g` on the embedded
/// curve, scaled to determinant 1.
pub fn act_plane(g: &ModularAuto, curve: &Curve) -> Result<Matrix3<C>> {
    let mut sys = DMatrix::<C>::zeros(3 * SAMPLES.len(), 9);
    for (k, &(s, t)) in SAMPLES.iter().enumerate() {
        let p = JacPoint::approx(s, t)?;
        let unit = |v: [C; 3]| {
            let n = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            v.map(|z| z / n)
        };
        let x = unit(embed(&p, curve).coords());
        let y = unit(embed(&g.apply(&p), curve).coords());
        // rows of y × (M x) = 0; entry (i, j) of M is unknown 3i + j
        for (r, (a, b)) in [(1usize, 2usize), (2, 0), (0, 1)].into_iter().enumerate() {
            for j in 0..3 {
                sys[(3 * k + r, 3 * b + j)] += y[a] * x[j];
                sys[(3 * k + r, 3 * a + j)] -= y[b] * x[j];
            }
        }
    }
    let svd = sys.svd(false, true);
    let vt = svd.v_t.ok_or(Error::NonConvergence("lift of the automorphism"))?;
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..9).collect();
    idx.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let top = sv[idx[0]];
    let null_ratio = sv[idx[8]] / top;
    let gap_ratio = sv[idx[7]] / top;
    if null_ratio > NULL_TOL || gap_ratio < GAP_TOL {
        return Err(Error::IllConditioned(null_ratio.max(1.0 / gap_ratio.max(f64::MIN_POSITIVE))));
    }
    let row = vt.row(idx[8]);
    let m = Matrix3::from_fn(|i, j| row[3 * i + j].conj());
    let d = m.determinant();
    Ok(m / d.powf(1.0 / 3.0))
}

/// Relabelling of fiber coordinates attached to one step of the action.
fn relabel_dual(class: &BundleClass) -> (BundleClass, [usize; 3]) {
    match class {
        BundleClass::T1(t) => {
            let (img, perm) = map_triple(t, |p| p.neg());
            (BundleClass::T1(img), perm)
        }
        BundleClass::T21(p) => (BundleClass::T21(p.neg()), [1, 0, 2]),
        BundleClass::T31(p) => (BundleClass::T31(p.neg()), [2, 1, 0]),
        other => (act_class(&ModularAuto { shift: JacPoint::zero(), dual: true }, other), [0, 1, 2]),
    }
}

/// Image of a parabolic datum: class, fiber coordinate and chamber.
///
/// Dualization lands in the opposite chamber; the result is carried back to
/// the input chamber by the natural identification of the two fibers.
pub fn act_parabolic(
    g: &ModularAuto,
    class: &BundleClass,
    s: &ProjScalar,
    chamber: Chamber,
) -> Result<(BundleClass, ProjScalar, Chamber)> {
    let flag = standard_flag(chamber, s)?;
    // rejects unstable data and the types without stable structures
    normalize_flag(class, &flag, chamber)?;
    let shift = ModularAuto { shift: g.shift.clone(), dual: false };
    let (mut cls, mut fl): (BundleClass, Flag) = match class {
        BundleClass::T1(t) => {
            let (img, perm) = map_triple(t, |p| shift.apply(p));
            (BundleClass::T1(img), flag.permuted(perm))
        }
        other => (act_class(&shift, other), flag),
    };
    let mut ch = chamber;
    if g.dual {
        let (c2, perm) = relabel_dual(&cls);
        cls = c2;
        fl = fl.dual().permuted(perm);
        ch = chamber.opposite();
    }
    let (s2, _) = normalize_flag(&cls, &fl, ch)?;
    let out = if ch == chamber { s2 } else { natural_map(cls.label(), ch, &s2)? };
    debug_assert!(matches!(cls.label(), Label::T1 | Label::T21 | Label::T31));
    Ok((cls, out.normalized(), chamber))
}
