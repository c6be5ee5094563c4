//! JSON encodings of the library types.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use parbundle_core::bundles::{BundleClass, Label, LineLocus, PointLocus, SubbundleConfig};
use parbundle_core::jaclattice::{CurveSpec, JacPoint};
use parbundle_core::parabolic::{make_weights_exact, Chamber, Flag, Subspace, Weights};
use parbundle_core::projective::{PlaneLine, PlanePoint, ProjScalar};
use parbundle_core::weierstrass::Curve;
use serde_json::{json, Map, Value};

use crate::CliError;

type C = Complex64;
pub type Obj = Map<String, Value>;

pub fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

pub fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Obj, CliError> {
    v.as_object().ok_or_else(|| schema(format!("{what}: expected an object")))
}

pub fn field<'a>(o: &'a Obj, key: &str) -> Result<&'a Value, CliError> {
    o.get(key).ok_or_else(|| schema(format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, len: usize, what: &str) -> Result<&'a [Value], CliError> {
    match v.as_array() {
        Some(a) if a.len() == len => Ok(a),
        _ => Err(schema(format!("{what}: expected an array of length {len}"))),
    }
}

fn items<const N: usize, T>(
    v: &Value,
    what: &str,
    mut f: impl FnMut(&Value) -> Result<T, CliError>,
) -> Result<[T; N], CliError> {
    let a = array(v, N, what)?;
    let out: Vec<T> = a.iter().map(&mut f).collect::<Result<_, _>>()?;
    Ok(out.try_into().unwrap_or_else(|_| unreachable!("length checked")))
}

pub fn real(v: &Value, what: &str) -> Result<f64, CliError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(schema(format!("{what}: expected a finite number"))),
    }
}

/// A number, or `[re, im]`.
pub fn complex(v: &Value, what: &str) -> Result<C, CliError> {
    if v.is_number() {
        return Ok(C::new(real(v, what)?, 0.0));
    }
    let [re, im] = items(v, what, |x| real(x, what))?;
    Ok(C::new(re, im))
}

pub fn complex_field(o: &Obj, key: &str) -> Result<C, CliError> {
    complex(field(o, key)?, key)
}

pub fn enc_c(z: C) -> Value {
    json!([z.re, z.im])
}

pub fn integer(v: &Value, what: &str) -> Result<BigInt, CliError> {
    if let Some(i) = v.as_i64() {
        return Ok(BigInt::from(i));
    }
    if let Some(s) = v.as_str() {
        if let Ok(i) = s.trim().parse::<BigInt>() {
            return Ok(i);
        }
    }
    Err(schema(format!("{what}: expected an integer")))
}

pub fn enc_int(i: &BigInt) -> Value {
    match i.to_i64() {
        Some(v) => json!(v),
        None => json!(i.to_string()),
    }
}

/// Exact value of the shortest decimal that round-trips to `x`.
fn decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, den))
}

/// An integer, a `"p/q"` string, or a number read as its decimal literal (`0.1` is `1/10`).
pub fn rational(v: &Value, what: &str) -> Result<BigRational, CliError> {
    if let Some(i) = v.as_i64() {
        return Ok(BigRational::from_integer(BigInt::from(i)));
    }
    if let Some(x) = v.as_f64() {
        return decimal(x).ok_or_else(|| schema(format!("{what}: non-finite")));
    }
    if let Some(s) = v.as_str() {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        if let (Ok(n), Ok(d)) = (n.parse::<BigInt>(), d.parse::<BigInt>()) {
            if !d.is_zero() {
                return Ok(BigRational::new(n, d));
            }
        }
    }
    Err(schema(format!("{what}: expected a rational (integer, number or \"p/q\")")))
}

pub fn enc_q(q: &BigRational) -> Value {
    if q.denom().is_one() {
        json!(q.numer().to_string())
    } else {
        json!(format!("{}/{}", q.numer(), q.denom()))
    }
}

pub fn curve_spec(o: &Obj) -> Result<CurveSpec, CliError> {
    let tau = complex_field(o, "tau")?;
    Ok(CurveSpec::new(tau)?)
}

pub fn curve(o: &Obj) -> Result<Curve, CliError> {
    Ok(Curve::new(curve_spec(o)?)?)
}

/// Optional curve: present only when the payload carries `tau`.
pub fn maybe_spec(o: &Obj) -> Result<Option<CurveSpec>, CliError> {
    if o.contains_key("tau") {
        curve_spec(o).map(Some)
    } else {
        Ok(None)
    }
}

/// `[s_num, s_den, t_num, t_den]` (exact), `[re, im]` (needs `tau`) or
/// `{"s": x, "t": y}` (lattice coordinates; exact when both are strings).
pub fn jac(v: &Value, spec: Option<&CurveSpec>, what: &str) -> Result<JacPoint, CliError> {
    if let Some(o) = v.as_object() {
        let (s, t) = (field(o, "s")?, field(o, "t")?);
        if s.is_string() && t.is_string() {
            return Ok(JacPoint::exact(rational(s, what)?, rational(t, what)?));
        }
        return Ok(JacPoint::approx(real(s, what)?, real(t, what)?)?);
    }
    match v.as_array().map(|a| a.len()) {
        Some(4) => {
            let [sn, sd, tn, td] = items(v, what, |x| integer(x, what))?;
            if sd.is_zero() || td.is_zero() {
                return Err(schema(format!("{what}: zero denominator")));
            }
            Ok(JacPoint::exact(BigRational::new(sn, sd), BigRational::new(tn, td)))
        }
        Some(2) => {
            let spec = spec.ok_or_else(|| schema(format!("{what}: complex points need `tau`")))?;
            Ok(JacPoint::from_complex(complex(v, what)?, spec)?)
        }
        _ => Err(schema(format!("{what}: expected a Jacobian point"))),
    }
}

pub fn enc_jac(p: &JacPoint) -> Value {
    match p.as_exact() {
        Some((s, t)) => json!([enc_int(s.numer()), enc_int(s.denom()), enc_int(t.numer()), enc_int(t.denom())]),
        None => {
            let (s, t) = p.coords();
            json!({"s": s, "t": t})
        }
    }
}

pub fn jac3(v: &Value, spec: Option<&CurveSpec>, what: &str) -> Result<[JacPoint; 3], CliError> {
    items(v, what, |x| jac(x, spec, what))
}

pub fn plane_point(v: &Value, what: &str) -> Result<PlanePoint, CliError> {
    Ok(PlanePoint::new(items(v, what, |x| complex(x, what))?)?)
}

pub fn plane_line(v: &Value, what: &str) -> Result<PlaneLine, CliError> {
    Ok(PlaneLine::new(items(v, what, |x| complex(x, what))?)?)
}

pub fn enc_vec3(v: [C; 3]) -> Value {
    Value::Array(v.iter().map(|z| enc_c(*z)).collect())
}

/// `"inf"`, a number, `[num, den]` of reals, or `[num, den]` of `[re, im]` pairs.
pub fn scalar(v: &Value, what: &str) -> Result<ProjScalar, CliError> {
    if v.as_str() == Some("inf") {
        return Ok(ProjScalar::infinity());
    }
    if v.is_number() {
        return Ok(ProjScalar::finite(complex(v, what)?));
    }
    let [n, d] = items(v, what, |x| complex(x, what))?;
    Ok(ProjScalar::new(n, d)?)
}

/// `"inf"` at `∞`, otherwise `[value, [1, 0]]`.
pub fn enc_scalar(s: &ProjScalar) -> Value {
    match s.value() {
        None => json!("inf"),
        Some(v) => json!([enc_c(v), [1.0, 0.0]]),
    }
}

pub fn label(v: &Value) -> Result<Label, CliError> {
    v.as_str().and_then(Label::parse).ok_or_else(|| schema("label: expected one of T1, T21, T22, T31, T32, T33"))
}

/// `{"label": "T1", "points": [p, p, p]}` or `{"label": "T21", "point": p}`.
pub fn class(v: &Value, spec: Option<&CurveSpec>) -> Result<BundleClass, CliError> {
    let o = object(v, "class")?;
    let l = label(field(o, "label")?)?;
    Ok(match l {
        Label::T1 => BundleClass::split(jac3(field(o, "points")?, spec, "points")?)?,
        _ => BundleClass::with_point(l, jac(field(o, "point")?, spec, "point")?)?,
    })
}

pub fn enc_class(c: &BundleClass) -> Value {
    match c {
        BundleClass::T1(t) => json!({"label": "T1", "points": t.iter().map(enc_jac).collect::<Vec<_>>()}),
        other => {
            let p = other.point().expect("non-split types carry a point");
            json!({"label": other.label().name(), "point": enc_jac(p)})
        }
    }
}

pub fn flag(v: &Value, tol: f64) -> Result<Flag, CliError> {
    let o = object(v, "flag")?;
    let p = plane_point(field(o, "P")?, "P")?;
    let l = plane_line(field(o, "L")?, "L")?;
    Ok(Flag::with_tol(p, l, tol)?)
}

pub fn enc_flag(f: &Flag) -> Value {
    json!({"P": enc_vec3(f.p.coords()), "L": enc_vec3(f.l.coords())})
}

pub fn weights(v: &Value) -> Result<(Weights, Chamber), CliError> {
    let raw = items(v, "weights", |x| rational(x, "weights"))?;
    Ok(make_weights_exact(raw)?)
}

pub fn enc_weights(w: &Weights) -> Value {
    Value::Array(w.mu().iter().map(enc_q).collect())
}

pub fn chamber(v: &Value) -> Result<Chamber, CliError> {
    match v.as_str() {
        Some("Pminus") => Ok(Chamber::Pminus),
        Some("Pplus") => Ok(Chamber::Pplus),
        Some("Wall") => Ok(Chamber::Wall),
        _ => Err(schema("chamber: expected Pminus, Pplus or Wall")),
    }
}

pub fn matrix(v: &Value, what: &str) -> Result<nalgebra::Matrix3<C>, CliError> {
    let rows: [[C; 3]; 3] = items(v, what, |r| items(r, what, |x| complex(x, what)))?;
    Ok(nalgebra::Matrix3::from_fn(|i, j| rows[i][j]))
}

pub fn enc_matrix(m: &nalgebra::Matrix3<C>) -> Value {
    Value::Array((0..3).map(|i| enc_vec3([m[(i, 0)], m[(i, 1)], m[(i, 2)]])).collect())
}

pub fn enc_subspace(s: &Subspace) -> Value {
    match s {
        Subspace::Point(p) => json!({"rank": 1, "point": enc_vec3(p.coords())}),
        Subspace::Line(l) => json!({"rank": 2, "line": enc_vec3(l.coords())}),
    }
}

pub fn enc_config(cfg: &SubbundleConfig) -> Value {
    let r1: Vec<Value> = cfg
        .rank1
        .iter()
        .map(|l| match l {
            PointLocus::Isolated(p) => json!({"kind": "isolated", "point": enc_vec3(p.coords())}),
            PointLocus::OnLine(l) => json!({"kind": "on-line", "line": enc_vec3(l.coords())}),
            PointLocus::All => json!({"kind": "all"}),
        })
        .collect();
    let r2: Vec<Value> = cfg
        .rank2
        .iter()
        .map(|l| match l {
            LineLocus::Isolated(l) => json!({"kind": "isolated", "line": enc_vec3(l.coords())}),
            LineLocus::Pencil(p) => json!({"kind": "pencil", "point": enc_vec3(p.coords())}),
            LineLocus::All => json!({"kind": "all"}),
        })
        .collect();
    let ((i1, f1), (i2, f2)) = cfg.counts();
    json!({
        "rank1": r1,
        "rank2": r2,
        "counts": {"rank1": {"isolated": i1, "families": f1}, "rank2": {"isolated": i2, "families": f2}},
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(decimal(0.2), Some(q(1, 5)));
        assert_eq!(decimal(-0.3), Some(q(-3, 10)));
        assert_eq!(decimal(-0.0), Some(q(0, 1)));
        assert_eq!(decimal(12.5), Some(q(25, 2)));
        assert_eq!(decimal(1e-20), Some(BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 20))));
        assert_eq!(decimal(f64::NAN), None);
    }
}
