//! Semistable rank-3 bundles with trivial determinant on the curve, up to the
//! six isomorphism types, and their degree-0 subbundles seen in one fiber.
//!
//! Fiber coordinates `[Z1 : Z2 : Z3]` follow one fixed normalization per type:
//!
//! | type | rank-1 loci | rank-2 loci |
//! |------|-------------|-------------|
//! | T1   | the three coordinate points | the three coordinate lines |
//! | T21  | `L⁻²` at `[0:0:1]`, `L` at `[1:0:0]` | `E₂⊗L` is `Z3 = 0`, `L⁻²⊕L` is `Z2 = 0` |
//! | T22  | `L⁻²` at `[0:0:1]`, copies of `L` along `Z3 = 0` | `L⊕L` is `Z3 = 0`, copies of `L⁻²⊕L` through `[0:0:1]` |
//! | T31  | `L` at `[1:0:0]` | `E₂⊗L` is `Z3 = 0` |
//! | T32  | copies of `L` along `Z3 = 0` | `L⊕L` is `Z3 = 0`, copies of `E₂⊗L` through `[1:0:0]` |
//! | T33  | every point | every line |

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::jaclattice::JacPoint;
use crate::projective::{PlaneLine, PlanePoint};
use crate::weierstrass::{distinct_count, line_through, Curve, MERGE_TOL, SUM_TOL};

/// Isomorphism type label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    T1,
    T21,
    T22,
    T31,
    T32,
    T33,
}

impl Label {
    pub const ALL: [Label; 6] = [Label::T1, Label::T21, Label::T22, Label::T31, Label::T32, Label::T33];

    pub fn name(self) -> &'static str {
        match self {
            Label::T1 => "T1",
            Label::T21 => "T21",
            Label::T22 => "T22",
            Label::T31 => "T31",
            Label::T32 => "T32",
            Label::T33 => "T33",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        Label::ALL.iter().copied().find(|l| l.name() == s)
    }

    /// Whether this is the type in its S-class that carries stable parabolic structures.
    pub fn is_representative(self) -> bool {
        matches!(self, Label::T1 | Label::T21 | Label::T31)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A semistable bundle up to isomorphism, given by its type and line bundle data.
///
/// - `T1([L1, L2, L3])`: `L1 ⊕ L2 ⊕ L3`, distinct, summing to zero, sorted canonically.
/// - `T21(z)`: `L⁻² ⊕ (E₂ ⊗ L)` with `L = z`, `3z ≠ 0`.
/// - `T22(z)`: `L⁻² ⊕ L ⊕ L`.
/// - `T31(z)`: `E₃ ⊗ L` with `3z = 0`.
/// - `T32(z)`: `L ⊕ (E₂ ⊗ L)`.
/// - `T33(z)`: `L ⊕ L ⊕ L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BundleClass {
    T1([JacPoint; 3]),
    T21(JacPoint),
    T22(JacPoint),
    T31(JacPoint),
    T32(JacPoint),
    T33(JacPoint),
}

fn sorted(mut pts: [JacPoint; 3]) -> [JacPoint; 3] {
    pts.sort_by(|a, b| a.cmp_canonical(b));
    pts
}

impl BundleClass {
    /// Validating constructor for a split bundle with three distinct factors.
    pub fn split(pts: [JacPoint; 3]) -> Result<Self> {
        let sum = pts[0].add(&pts[1]).add(&pts[2]);
        if !sum.is_zero(SUM_TOL) {
            return Err(Error::NotZeroSum(sum.lattice_dist(&JacPoint::zero())));
        }
        if distinct_count(&pts) != 3 {
            return Err(Error::InvalidClassData("split type needs three distinct factors"));
        }
        Ok(BundleClass::T1(sorted(pts)))
    }

    /// Validating constructor for the types carrying a single line bundle.
    pub fn with_point(label: Label, z: JacPoint) -> Result<Self> {
        let torsion = z.is_torsion(3, MERGE_TOL / 3.0);
        match label {
            Label::T1 => Err(Error::InvalidClassData("split type needs a triple")),
            Label::T21 | Label::T22 if torsion => {
                Err(Error::InvalidClassData("types 2.x need 3z ≠ 0"))
            }
            Label::T31 | Label::T32 | Label::T33 if !torsion => {
                Err(Error::InvalidClassData("types 3.x need 3z = 0"))
            }
            Label::T21 => Ok(BundleClass::T21(z)),
            Label::T22 => Ok(BundleClass::T22(z)),
            Label::T31 => Ok(BundleClass::T31(z)),
            Label::T32 => Ok(BundleClass::T32(z)),
            Label::T33 => Ok(BundleClass::T33(z)),
        }
    }

    pub fn label(&self) -> Label {
        match self {
            BundleClass::T1(_) => Label::T1,
            BundleClass::T21(_) => Label::T21,
            BundleClass::T22(_) => Label::T22,
            BundleClass::T31(_) => Label::T31,
            BundleClass::T32(_) => Label::T32,
            BundleClass::T33(_) => Label::T33,
        }
    }

    /// The line bundle `L` for the non-split types.
    pub fn point(&self) -> Option<&JacPoint> {
        match self {
            BundleClass::T1(_) => None,
            BundleClass::T21(z)
            | BundleClass::T22(z)
            | BundleClass::T31(z)
            | BundleClass::T32(z)
            | BundleClass::T33(z) => Some(z),
        }
    }

    /// Same data, compared at tolerance.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        if self.label() != other.label() {
            return false;
        }
        match (self, other) {
            (BundleClass::T1(a), BundleClass::T1(b)) => {
                // Cyclic near-boundary reorderings are possible for approximate data.
                let mut used = [false; 3];
                a.iter().all(|p| {
                    let hit = (0..3).find(|&k| !used[k] && p.same_as(&b[k], tol));
                    if let Some(k) = hit {
                        used[k] = true;
                    }
                    hit.is_some()
                })
            }
            _ => match (self.point(), other.point()) {
                (Some(x), Some(y)) => x.same_as(y, tol),
                _ => false,
            },
        }
    }
}

/// S-class representative of a zero-sum triple: distinct → T1, one repeat → T21,
/// all equal → T31.
pub fn classify_triple(z1: &JacPoint, z2: &JacPoint, z3: &JacPoint) -> Result<BundleClass> {
    let pts = [z1.clone(), z2.clone(), z3.clone()];
    let sum = z1.add(z2).add(z3);
    if !sum.is_zero(SUM_TOL) {
        return Err(Error::NotZeroSum(sum.lattice_dist(&JacPoint::zero())));
    }
    match distinct_count(&pts) {
        3 => Ok(BundleClass::T1(sorted(pts))),
        2 => {
            let z = if z1.same_as(z2, MERGE_TOL) || z1.same_as(z3, MERGE_TOL) {
                z1.clone()
            } else {
                z2.clone()
            };
            Ok(BundleClass::T21(z))
        }
        _ => Ok(BundleClass::T31(z1.clone())),
    }
}

/// Jordan–Hölder graded pieces.
pub fn graded(class: &BundleClass) -> [JacPoint; 3] {
    match class {
        BundleClass::T1(t) => t.clone(),
        BundleClass::T21(z) | BundleClass::T22(z) => [z.mul(-2), z.clone(), z.clone()],
        BundleClass::T31(z) | BundleClass::T32(z) | BundleClass::T33(z) => {
            [z.clone(), z.clone(), z.clone()]
        }
    }
}

/// Line of the dual plane attached to the S-class.
pub fn tu_line(class: &BundleClass, curve: &Curve) -> Result<PlaneLine> {
    let [a, b, c] = graded(class);
    line_through(&a, &b, &c, curve)
}

/// Where a family (or single member) of degree-0 line subbundles meets the fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointLocus {
    Isolated(PlanePoint),
    /// A one-parameter family filling a line.
    OnLine(PlaneLine),
    /// Every point of the fiber.
    All,
}

/// Where degree-0 rank-2 subbundles meet the fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineLocus {
    Isolated(PlaneLine),
    /// A one-parameter family: the lines through a point.
    Pencil(PlanePoint),
    /// Every line of the fiber.
    All,
}

impl PointLocus {
    pub fn family_dim(&self) -> u8 {
        match self {
            PointLocus::Isolated(_) => 0,
            PointLocus::OnLine(_) => 1,
            PointLocus::All => 2,
        }
    }
}

impl LineLocus {
    pub fn family_dim(&self) -> u8 {
        match self {
            LineLocus::Isolated(_) => 0,
            LineLocus::Pencil(_) => 1,
            LineLocus::All => 2,
        }
    }
}

/// Degree-0 subbundles of a class, restricted to the fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbundleConfig {
    pub rank1: Vec<PointLocus>,
    pub rank2: Vec<LineLocus>,
}

impl SubbundleConfig {
    /// `(isolated, families)` counts for rank 1 and rank 2.
    pub fn counts(&self) -> ((usize, usize), (usize, usize)) {
        let r1 = self.rank1.iter().filter(|l| l.family_dim() == 0).count();
        let r2 = self.rank2.iter().filter(|l| l.family_dim() == 0).count();
        ((r1, self.rank1.len() - r1), (r2, self.rank2.len() - r2))
    }
}

fn pt(x: f64, y: f64, z: f64) -> PlanePoint {
    PlanePoint::real(x, y, z).expect("nonzero constant")
}

fn ln(u: f64, v: f64, w: f64) -> PlaneLine {
    PlaneLine::real(u, v, w).expect("nonzero constant")
}

/// Degree-0 subbundle loci in the normalized fiber coordinates of the type.
pub fn subbundle_config(class: &BundleClass) -> SubbundleConfig {
    use LineLocus as R2;
    use PointLocus as R1;
    let (rank1, rank2) = match class.label() {
        Label::T1 => (
            alloc::vec![
                R1::Isolated(pt(1.0, 0.0, 0.0)),
                R1::Isolated(pt(0.0, 1.0, 0.0)),
                R1::Isolated(pt(0.0, 0.0, 1.0)),
            ],
            alloc::vec![
                R2::Isolated(ln(1.0, 0.0, 0.0)),
                R2::Isolated(ln(0.0, 1.0, 0.0)),
                R2::Isolated(ln(0.0, 0.0, 1.0)),
            ],
        ),
        Label::T21 => (
            alloc::vec![R1::Isolated(pt(0.0, 0.0, 1.0)), R1::Isolated(pt(1.0, 0.0, 0.0))],
            alloc::vec![R2::Isolated(ln(0.0, 0.0, 1.0)), R2::Isolated(ln(0.0, 1.0, 0.0))],
        ),
        Label::T22 => (
            alloc::vec![R1::Isolated(pt(0.0, 0.0, 1.0)), R1::OnLine(ln(0.0, 0.0, 1.0))],
            alloc::vec![R2::Isolated(ln(0.0, 0.0, 1.0)), R2::Pencil(pt(0.0, 0.0, 1.0))],
        ),
        Label::T31 => (
            alloc::vec![R1::Isolated(pt(1.0, 0.0, 0.0))],
            alloc::vec![R2::Isolated(ln(0.0, 0.0, 1.0))],
        ),
        Label::T32 => (
            alloc::vec![R1::OnLine(ln(0.0, 0.0, 1.0))],
            alloc::vec![R2::Isolated(ln(0.0, 0.0, 1.0)), R2::Pencil(pt(1.0, 0.0, 0.0))],
        ),
        Label::T33 => (alloc::vec![R1::All], alloc::vec![R2::All]),
    };
    SubbundleConfig { rank1, rank2 }
}

/// Facts about a type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeFacts {
    /// Dimension of the endomorphism algebra.
    pub endo_dim: u8,
    /// Whether some flag and weights make it parabolically stable.
    pub admits_stable_parabolic: bool,
    /// Points where the fiber of either moduli space over this class meets the boundary locus.
    pub sigma_fiber_count: Option<u8>,
}

pub fn type_facts(label: Label) -> TypeFacts {
    let (endo_dim, count) = match label {
        Label::T1 => (3, Some(3)),
        Label::T21 => (3, Some(2)),
        Label::T22 => (5, None),
        Label::T31 => (3, Some(1)),
        Label::T32 => (4, None),
        Label::T33 => (9, None),
    };
    TypeFacts { endo_dim, admits_stable_parabolic: label.is_representative(), sigma_fiber_count: count }
}
