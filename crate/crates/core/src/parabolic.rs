//! Parabolic structures at one point: weights, chambers, flags, the stability
//! oracle, and fiber coordinates of the two moduli spaces.
//!
//! Flags live in the normalized fiber coordinates of the class (see
//! [`crate::bundles`]). Weights are exact rationals; floats are converted
//! exactly, so a float input is judged at its true binary value.

use core::fmt;

use nalgebra::Matrix3;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::bundles::{subbundle_config, BundleClass, Label, LineLocus, PointLocus};
use crate::error::{Error, Result};
use crate::jaclattice::DEFAULT_TOL;
use crate::projective::{PlaneLine, PlanePoint, ProjScalar};

type C = Complex64;

const fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Side of the wall `μ2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chamber {
    Pminus,
    Pplus,
    Wall,
}

impl Chamber {
    pub fn name(self) -> &'static str {
        match self {
            Chamber::Pminus => "Pminus",
            Chamber::Pplus => "Pplus",
            Chamber::Wall => "Wall",
        }
    }

    pub fn opposite(self) -> Chamber {
        match self {
            Chamber::Pminus => Chamber::Pplus,
            Chamber::Pplus => Chamber::Pminus,
            Chamber::Wall => Chamber::Wall,
        }
    }
}

/// Admissible weights `μ1 ≥ μ2 ≥ μ3`, `μ1 − μ3 < 1`, `Σμ = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weights {
    mu: [BigRational; 3],
}

impl Weights {
    /// Validates already-normalized exact weights.
    pub fn exact(mu: [BigRational; 3]) -> Result<Self> {
        if !(mu[0] >= mu[1] && mu[1] >= mu[2]) {
            return Err(Error::InadmissibleWeights(spread_f64(&mu)));
        }
        if &mu[0] - &mu[2] >= BigRational::from_integer(BigInt::from(1)) {
            return Err(Error::InadmissibleWeights(spread_f64(&mu)));
        }
        if !(&mu[0] + &mu[1] + &mu[2]).is_zero() {
            return Err(Error::InadmissibleWeights(spread_f64(&mu)));
        }
        Ok(Weights { mu })
    }

    /// `(n1/d1, n2/d2, n3/d3)`, validated.
    pub fn rational(v: [(i64, i64); 3]) -> Result<Self> {
        Self::exact([q(v[0].0, v[0].1), q(v[1].0, v[1].1), q(v[2].0, v[2].1)])
    }

    pub fn mu(&self) -> &[BigRational; 3] {
        &self.mu
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.mu[i].to_f64().unwrap_or(f64::NAN))
    }

    pub fn chamber(&self) -> Chamber {
        if self.mu[1].is_zero() {
            Chamber::Wall
        } else if self.mu[1].is_positive() {
            Chamber::Pplus
        } else {
            Chamber::Pminus
        }
    }

    /// Shift by a common constant and renormalize; stability is unchanged.
    pub fn shifted(&self, by: &BigRational) -> Result<Self> {
        make_weights_exact([0, 1, 2].map(|i| &self.mu[i] + by)).map(|(w, _)| w)
    }

    /// Interior probe of `P⁻`: `(1/5, −1/10, −1/10)`.
    pub fn probe(chamber: Chamber) -> Self {
        let v = match chamber {
            Chamber::Pminus => [(1, 5), (-1, 10), (-1, 10)],
            Chamber::Pplus => [(1, 5), (1, 10), (-3, 10)],
            Chamber::Wall => [(1, 3), (0, 1), (-1, 3)],
        };
        Self::rational(v).expect("admissible constants")
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.mu[0], self.mu[1], self.mu[2])
    }
}

fn spread_f64(mu: &[BigRational; 3]) -> f64 {
    let hi = mu.iter().max().cloned().unwrap_or_default();
    let lo = mu.iter().min().cloned().unwrap_or_default();
    (hi - lo).to_f64().unwrap_or(f64::NAN)
}

/// Shift raw weights to sum zero, sort descending, check the spread.
pub fn make_weights_exact(raw: [BigRational; 3]) -> Result<(Weights, Chamber)> {
    let mean = (&raw[0] + &raw[1] + &raw[2]) / BigRational::from_integer(BigInt::from(3));
    let mut mu = raw.map(|m| m - &mean);
    mu.sort_by(|a, b| b.cmp(a));
    let w = Weights::exact(mu)?;
    let ch = w.chamber();
    Ok((w, ch))
}

/// Float front end of [`make_weights_exact`]; each input is taken at its exact binary value.
pub fn make_weights(raw: [f64; 3]) -> Result<(Weights, Chamber)> {
    let mut ex = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    for (slot, v) in ex.iter_mut().zip(raw) {
        *slot = BigRational::from_float(v).ok_or(Error::NonFinite)?;
    }
    make_weights_exact(ex)
}

/// A full flag `P ∈ L` in the fiber plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flag {
    pub p: PlanePoint,
    pub l: PlaneLine,
}

impl Flag {
    pub fn new(p: PlanePoint, l: PlaneLine) -> Result<Self> {
        Self::with_tol(p, l, DEFAULT_TOL)
    }

    pub fn with_tol(p: PlanePoint, l: PlaneLine, tol: f64) -> Result<Self> {
        let r = l.residual(&p);
        if r > tol {
            return Err(Error::FlagNotIncident(r));
        }
        Ok(Flag { p, l })
    }

    /// The annihilator flag in the dual fiber: the point `L`, the line `P`.
    pub fn dual(&self) -> Flag {
        let p = PlanePoint::new(self.l.coords()).expect("normalized line");
        let l = PlaneLine::new(self.p.coords()).expect("normalized point");
        Flag { p, l }
    }

    /// Relabel fiber coordinates: new coordinate `k` is old coordinate `perm[k]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Flag {
        let pc = self.p.coords();
        let lc = self.l.coords();
        let p = PlanePoint::new(perm.map(|i| pc[i])).expect("permuted point");
        let l = PlaneLine::new(perm.map(|i| lc[i])).expect("permuted line");
        Flag { p, l }
    }

    /// Image under a fiber automorphism acting on column vectors.
    pub fn transform(&self, g: &Matrix3<C>) -> Result<Flag> {
        Ok(Flag { p: self.p.transform(g)?, l: self.l.transform(g)? })
    }
}

/// A fiber subspace: a point (rank 1) or a line (rank 2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Subspace {
    Point(PlanePoint),
    Line(PlaneLine),
}

/// Parabolic degree of a degree-0 subbundle meeting the fiber in `sub`.
pub fn induced_pardeg(sub: &Subspace, flag: &Flag, w: &Weights, tol: f64) -> BigRational {
    let mu = w.mu();
    match sub {
        Subspace::Point(x) => {
            if x.same_as(&flag.p, tol) {
                mu[0].clone()
            } else if flag.l.contains(x, tol) {
                mu[1].clone()
            } else {
                mu[2].clone()
            }
        }
        Subspace::Line(m) => {
            if m.same_as(&flag.l, tol) {
                &mu[0] + &mu[1]
            } else if m.contains(&flag.p, tol) {
                &mu[0] + &mu[2]
            } else {
                &mu[1] + &mu[2]
            }
        }
    }
}

/// Member of each locus with the largest parabolic degree.
fn worst_members(class: &BundleClass, flag: &Flag, tol: f64) -> alloc::vec::Vec<Subspace> {
    let cfg = subbundle_config(class);
    let mut out = alloc::vec::Vec::new();
    for loc in &cfg.rank1 {
        out.push(match loc {
            PointLocus::Isolated(x) => Subspace::Point(*x),
            PointLocus::All => Subspace::Point(flag.p),
            PointLocus::OnLine(ell) => {
                if ell.contains(&flag.p, tol) {
                    Subspace::Point(flag.p)
                } else {
                    Subspace::Point(ell.meet(&flag.l).expect("P lies on L but not on the family line"))
                }
            }
        });
    }
    for loc in &cfg.rank2 {
        out.push(match loc {
            LineLocus::Isolated(m) => Subspace::Line(*m),
            LineLocus::All => Subspace::Line(flag.l),
            LineLocus::Pencil(base) => {
                if flag.l.contains(base, tol) {
                    Subspace::Line(flag.l)
                } else {
                    Subspace::Line(base.join(&flag.p).expect("base is off L, P is on L"))
                }
            }
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Stable => "Stable",
            VerdictKind::StrictlySemistable => "StrictlySemistable",
            VerdictKind::Unstable => "Unstable",
        }
    }
}

/// Stability verdict; `witness` is a subbundle of maximal parabolic degree when not stable.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<Subspace>,
    pub max_pardeg: BigRational,
}

pub fn stability(class: &BundleClass, flag: &Flag, w: &Weights) -> Result<Verdict> {
    stability_tol(class, flag, w, DEFAULT_TOL)
}

pub fn stability_tol(class: &BundleClass, flag: &Flag, w: &Weights, tol: f64) -> Result<Verdict> {
    let r = flag.l.residual(&flag.p);
    if r > tol {
        return Err(Error::FlagNotIncident(r));
    }
    let mut best: Option<(BigRational, Subspace)> = None;
    for sub in worst_members(class, flag, tol) {
        let d = induced_pardeg(&sub, flag, w, tol);
        if best.as_ref().is_none_or(|(b, _)| d > *b) {
            best = Some((d, sub));
        }
    }
    let (max, sub) = best.expect("every type has degree-0 subbundles");
    let kind = if max.is_negative() {
        VerdictKind::Stable
    } else if max.is_zero() {
        VerdictKind::StrictlySemistable
    } else {
        VerdictKind::Unstable
    };
    let witness = (kind != VerdictKind::Stable).then_some(sub);
    Ok(Verdict { kind, witness, max_pardeg: max })
}

/// Position relative to the two chambers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Locus {
    /// Stable in both chambers.
    Ugen,
    /// Stable only for `μ2 < 0`.
    SigmaMinus,
    /// Stable only for `μ2 > 0`.
    SigmaPlus,
    Neither,
}

impl Locus {
    pub fn name(self) -> &'static str {
        match self {
            Locus::Ugen => "Ugen",
            Locus::SigmaMinus => "SigmaMinus",
            Locus::SigmaPlus => "SigmaPlus",
            Locus::Neither => "Neither",
        }
    }
}

pub fn locus(class: &BundleClass, flag: &Flag) -> Result<Locus> {
    locus_tol(class, flag, DEFAULT_TOL)
}

pub fn locus_tol(class: &BundleClass, flag: &Flag, tol: f64) -> Result<Locus> {
    let minus = stability_tol(class, flag, &Weights::probe(Chamber::Pminus), tol)?.kind;
    let plus = stability_tol(class, flag, &Weights::probe(Chamber::Pplus), tol)?.kind;
    Ok(match (minus == VerdictKind::Stable, plus == VerdictKind::Stable) {
        (true, true) => Locus::Ugen,
        (true, false) => Locus::SigmaMinus,
        (false, true) => Locus::SigmaPlus,
        (false, false) => Locus::Neither,
    })
}

/// The normalized flag with fiber coordinate `s`.
///
/// `P⁻`: `P = [1:1:1]`, `L = {Z2 − tZ1 = (1−t)Z3}`. `P⁺`: `L = {Z1 + Z2 = Z3}`,
/// `P = [λ : 1−λ : 1]`.
pub fn standard_flag(chamber: Chamber, s: &ProjScalar) -> Result<Flag> {
    let (n, d) = (s.num, s.den);
    match chamber {
        Chamber::Pminus => {
            let p = PlanePoint::real(1.0, 1.0, 1.0)?;
            let l = PlaneLine::new([-n, d, n - d])?;
            Ok(Flag { p, l })
        }
        Chamber::Pplus => {
            let l = PlaneLine::real(1.0, 1.0, -1.0)?;
            let p = PlanePoint::new([n, d - n, d])?;
            Ok(Flag { p, l })
        }
        Chamber::Wall => Err(Error::Degenerate("no fiber coordinate on the wall")),
    }
}

fn diag(a: C, b: C, cc: C) -> Matrix3<C> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(a, b, cc))
}

/// Automorphism of the class bringing a chamber-stable flag to its standard
/// position, and the resulting fiber coordinate (`t` in `P⁻`, `λ` in `P⁺`).
pub fn normalize_flag(class: &BundleClass, flag: &Flag, chamber: Chamber) -> Result<(ProjScalar, Matrix3<C>)> {
    normalize_flag_tol(class, flag, chamber, DEFAULT_TOL)
}

pub fn normalize_flag_tol(
    class: &BundleClass,
    flag: &Flag,
    chamber: Chamber,
    tol: f64,
) -> Result<(ProjScalar, Matrix3<C>)> {
    if chamber == Chamber::Wall {
        return Err(Error::Degenerate("no fiber coordinate on the wall"));
    }
    if stability_tol(class, flag, &Weights::probe(chamber), tol)?.kind != VerdictKind::Stable {
        return Err(Error::NotStableInChamber);
    }
    let z = c(0.0);
    let g = match chamber {
        Chamber::Pminus => {
            let [p1, p2, p3] = flag.p.coords();
            match class.label() {
                Label::T1 => diag(1.0 / p1, 1.0 / p2, 1.0 / p3),
                Label::T21 => {
                    let a = 1.0 / p2;
                    let b = (1.0 - a * p1) / p2;
                    Matrix3::new(a, b, z, z, a, z, z, z, 1.0 / p3)
                }
                Label::T31 => {
                    let a = 1.0 / p3;
                    let b = (1.0 - a * p2) / p3;
                    let cc = (1.0 - a * p1 - b * p2) / p3;
                    Matrix3::new(a, b, cc, z, a, b, z, z, a)
                }
                _ => return Err(Error::NotStableInChamber),
            }
        }
        _ => {
            let [u1, u2, u3] = flag.l.coords();
            match class.label() {
                Label::T1 => diag(u1, u2, -u3),
                Label::T21 => Matrix3::new(u1, u2 - u1, z, z, u1, z, z, z, -u3),
                Label::T31 => {
                    let b = u2 - u1;
                    let cc = u3 - u2 + 2.0 * u1;
                    Matrix3::new(u1, b, cc, z, u1, b, z, z, u1)
                }
                _ => return Err(Error::NotStableInChamber),
            }
        }
    };
    let image = flag.transform(&g)?;
    let s = match chamber {
        Chamber::Pminus => {
            let u = image.l.coords();
            ProjScalar::new(-u[0], u[1])?
        }
        _ => {
            let p = image.p.coords();
            ProjScalar::new(p[0], p[2])?
        }
    };
    Ok((s.normalized(), g))
}

/// `λ = t/(t−1)`, an involution of the projective line fixing 0 and 2 and
/// swapping 1 with ∞.
pub fn flip(t: &ProjScalar) -> ProjScalar {
    t.mobius([[c(1.0), c(0.0)], [c(1.0), c(-1.0)]])
}

/// Möbius matrix of the identification `t ↦ λ` of the two fibers over a
/// class, obtained by normalizing the same flag in both chambers.
fn natural_matrix(label: Label) -> Option<[[C; 2]; 2]> {
    let m = |a: f64, b: f64, cc: f64, d: f64| [[c(a), c(b)], [c(cc), c(d)]];
    match label {
        Label::T1 => Some(m(1.0, 0.0, 1.0, -1.0)),
        Label::T21 => Some(m(0.0, 1.0, -1.0, 1.0)),
        Label::T31 => Some(m(1.0, 1.0, 1.0, 0.0)),
        _ => None,
    }
}

/// Carries a fiber coordinate of `from` to the other chamber over the same class.
pub fn natural_map(label: Label, from: Chamber, s: &ProjScalar) -> Result<ProjScalar> {
    let m = natural_matrix(label).ok_or(Error::NotStableInChamber)?;
    match from {
        Chamber::Pminus => Ok(s.mobius(m)),
        Chamber::Pplus => {
            let inv = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
            Ok(s.mobius(inv))
        }
        Chamber::Wall => Err(Error::Degenerate("no fiber coordinate on the wall")),
    }
}

/// Fiber coordinates where the fiber meets the boundary locus of the chamber.
pub fn sigma_values(label: Label, chamber: Chamber) -> alloc::vec::Vec<ProjScalar> {
    let inf = ProjScalar::infinity();
    let r = ProjScalar::real;
    match (label, chamber) {
        (Label::T1, Chamber::Pminus | Chamber::Pplus) => alloc::vec![r(0.0), r(1.0), inf],
        (Label::T21, Chamber::Pminus) => alloc::vec![r(0.0), r(1.0)],
        (Label::T21, Chamber::Pplus) => alloc::vec![r(1.0), inf],
        (Label::T31, Chamber::Pminus) => alloc::vec![r(0.0)],
        (Label::T31, Chamber::Pplus) => alloc::vec![inf],
        _ => alloc::vec::Vec::new(),
    }
}
