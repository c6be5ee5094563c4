//! One handler per command; each validates its payload and calls one library operation.

use num_complex::Complex64;
use parbundle_core::autgroup::{act_class, act_parabolic, act_plane, group_elements, ModularAuto};
use parbundle_core::bundles::{classify_triple, graded, subbundle_config, tu_line, type_facts};
use parbundle_core::jaclattice::{CurveSpec, DEFAULT_TOL};
use parbundle_core::modspace::{
    abel, covering_invariants, covering_invariants_exact, cross_ratio, curves_isomorphic, moduli_chart,
    psi_plus, psi_plus_ordered, section_meet, sigma_cover_count, IncidencePoint, SymPair, J_TOL,
};
use parbundle_core::monodromy::{
    classify_detailed, universal_config, universal_lambda, universal_pair, validate, Diagnostic, FamilyKind,
    NormalForm, VALIDATE_TOL,
};
use parbundle_core::parabolic::{flip, locus_tol, normalize_flag_tol, stability_tol};
use parbundle_core::weierstrass::{
    curve_invariants, dual_sextic_contains, embed, intersect_curve, distinct_count, reduce_tau, wp,
};
use serde_json::{json, Value};

use crate::codec::*;
use crate::CliError;

type C = Complex64;

/// Every command the dispatcher accepts, in documentation order.
pub const COMMANDS: &[&str] = &[
    "classify-bundle",
    "graded",
    "tu-line",
    "intersect-line",
    "subbundles",
    "type-facts",
    "classify-monodromy",
    "universal-family",
    "weights",
    "stability",
    "locus",
    "normalize-flag",
    "flip",
    "psi-plus",
    "covering",
    "sigma-count",
    "abel",
    "torelli",
    "aut-elements",
    "aut-act",
    "curve-invariants",
    "wp",
    "embed",
    "dual-sextic",
    "cross-ratio",
    "section-meet",
    "moduli-chart",
];

/// Per-request context: the tolerance override and the diagnostics collected so far.
pub struct Ctx {
    pub tol: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl Ctx {
    /// The effective tolerance, recorded in the diagnostics.
    fn tol(&mut self, name: &str, default: f64) -> f64 {
        let t = self.tol.unwrap_or(default);
        self.diagnostics.push(format!("{name}={t:e}"));
        t
    }
}

type Out = Result<Value, CliError>;

pub fn dispatch(command: &str, payload: &Value, ctx: &mut Ctx) -> Out {
    let o = object(payload, "payload")?;
    match command {
        "classify-bundle" => classify_bundle_cmd(o),
        "graded" => graded_cmd(o),
        "tu-line" => tu_line_cmd(o),
        "intersect-line" => intersect_line_cmd(o),
        "subbundles" => subbundles_cmd(o),
        "type-facts" => type_facts_cmd(o),
        "classify-monodromy" => classify_monodromy_cmd(o, ctx),
        "universal-family" => universal_family_cmd(o, ctx),
        "weights" => weights_cmd(o),
        "stability" => stability_cmd(o, ctx),
        "locus" => locus_cmd(o, ctx),
        "normalize-flag" => normalize_flag_cmd(o, ctx),
        "flip" => flip_cmd(o),
        "psi-plus" => psi_plus_cmd(o, ctx),
        "covering" => covering_cmd(o, ctx),
        "sigma-count" => sigma_count_cmd(o),
        "abel" => abel_cmd(o),
        "torelli" => torelli_cmd(o, ctx),
        "aut-elements" => aut_elements_cmd(),
        "aut-act" => aut_act_cmd(o, ctx),
        "curve-invariants" => curve_invariants_cmd(o),
        "wp" => wp_cmd(o),
        "embed" => embed_cmd(o),
        "dual-sextic" => dual_sextic_cmd(o),
        "cross-ratio" => cross_ratio_cmd(o),
        "section-meet" => section_meet_cmd(o),
        "moduli-chart" => moduli_chart_cmd(o),
        other => Err(CliError::UnknownCommand(other.to_string())),
    }
}

fn spec_ref(s: &Option<CurveSpec>) -> Option<&CurveSpec> {
    s.as_ref()
}

fn classify_bundle_cmd(o: &Obj) -> Out {
    let spec = maybe_spec(o)?;
    let [a, b, c] = jac3(field(o, "triple")?, spec_ref(&spec), "triple")?;
    let class = classify_triple(&a, &b, &c)?;
    Ok(json!({"class": enc_class(&class), "label": class.label().name()}))
}

fn graded_cmd(o: &Obj) -> Out {
    let spec = maybe_spec(o)?;
    let class = class(field(o, "class")?, spec_ref(&spec))?;
    Ok(json!({"graded": graded(&class).iter().map(enc_jac).collect::<Vec<_>>()}))
}

fn tu_line_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let class = class(field(o, "class")?, Some(curve.spec()))?;
    Ok(json!({"line": enc_vec3(tu_line(&class, &curve)?.coords())}))
}

fn intersect_line_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let line = plane_line(field(o, "line")?, "line")?;
    let pts = intersect_curve(&line, &curve)?;
    Ok(json!({"points": pts.iter().map(enc_jac).collect::<Vec<_>>(), "distinct": distinct_count(&pts)}))
}

fn subbundles_cmd(o: &Obj) -> Out {
    let spec = maybe_spec(o)?;
    let class = class(field(o, "class")?, spec_ref(&spec))?;
    Ok(enc_config(&subbundle_config(&class)))
}

fn type_facts_cmd(o: &Obj) -> Out {
    let f = type_facts(label(field(o, "label")?)?);
    Ok(json!({
        "endo_dim": f.endo_dim,
        "admits_stable_parabolic": f.admits_stable_parabolic,
        "sigma_fiber_count": f.sigma_fiber_count,
    }))
}

fn enc_normal_form(nf: &NormalForm) -> Value {
    match *nf {
        NormalForm::Diagonal { a, b } => json!({"case": 1, "a": enc_vec3(a), "b": enc_vec3(b)}),
        NormalForm::Split { a, b, b1 } => json!({"case": 2, "a": enc_c(a), "b": enc_c(b), "b1": enc_c(b1)}),
        NormalForm::Unipotent { a, b, b1, b2 } => {
            json!({"case": 3, "a": enc_c(a), "b": enc_c(b), "b1": enc_c(b1), "b2": enc_c(b2)})
        }
    }
}

fn classify_monodromy_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let spec = curve_spec(o)?;
    let a = matrix(field(o, "A")?, "A")?;
    let b = matrix(field(o, "B")?, "B")?;
    let tol = ctx.tol("monodromy.validate", VALIDATE_TOL);
    let pair = validate(a, b, tol)?;
    let cls = classify_detailed(&pair, &spec)?;
    for d in &cls.diagnostics {
        match d {
            Diagnostic::CaseTwoDirection { implemented, alternative } => ctx.diagnostics.push(format!(
                "case-two-direction: implemented {implemented}, alternative {alternative}"
            )),
        }
    }
    let nf = cls.normal_form.as_ref().map(|nf| {
        json!({
            "form": enc_normal_form(&nf.form),
            "conjugator": enc_matrix(&nf.conjugator),
            "swapped": nf.swapped,
        })
    });
    Ok(json!({"class": enc_class(&cls.class), "label": cls.class.label().name(), "normal_form": nf}))
}

fn universal_family_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let b1 = complex_field(o, "b1")?;
    let b2 = complex_field(o, "b2")?;
    let kind = match o.get("kind").map(|v| v.as_str()) {
        None | Some(Some("generic")) => FamilyKind::Generic,
        Some(Some("decomposable")) => FamilyKind::Decomposable,
        _ => return Err(schema("kind: expected generic or decomposable")),
    };
    let pair = universal_pair(b1, b2, kind)?;
    let mut out = json!({"A": enc_matrix(pair.a()), "B": enc_matrix(pair.b())});
    if kind == FamilyKind::Generic {
        out["subbundles"] = enc_config(&universal_config(b1, b2)?);
    }
    if let Some(spec) = maybe_spec(o)? {
        let _ = ctx.tol("monodromy.validate", VALIDATE_TOL);
        let cls = classify_detailed(&pair, &spec)?;
        out["class"] = enc_class(&cls.class);
        out["label"] = json!(cls.class.label().name());
    }
    if let Some(w) = o.get("w") {
        if kind != FamilyKind::Generic {
            return Err(schema("w: only the generic family carries the parabolic coordinate"));
        }
        out["lambda"] = enc_c(universal_lambda(b1, b2, complex(w, "w")?)?);
    }
    Ok(out)
}

fn weights_cmd(o: &Obj) -> Out {
    let (w, ch) = weights(field(o, "weights")?)?;
    Ok(json!({"mu": enc_weights(&w), "chamber": ch.name()}))
}

fn stability_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let spec = maybe_spec(o)?;
    let class = class(field(o, "class")?, spec_ref(&spec))?;
    let tol = ctx.tol("parabolic.incidence", DEFAULT_TOL);
    let flag = flag(field(o, "flag")?, tol)?;
    let (w, ch) = weights(field(o, "weights")?)?;
    let v = stability_tol(&class, &flag, &w, tol)?;
    Ok(json!({
        "verdict": v.kind.name(),
        "witness": v.witness.as_ref().map(enc_subspace),
        "max_pardeg": enc_q(&v.max_pardeg),
        "chamber": ch.name(),
    }))
}

fn locus_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let spec = maybe_spec(o)?;
    let class = class(field(o, "class")?, spec_ref(&spec))?;
    let tol = ctx.tol("parabolic.incidence", DEFAULT_TOL);
    let flag = flag(field(o, "flag")?, tol)?;
    Ok(json!({"locus": locus_tol(&class, &flag, tol)?.name()}))
}

fn normalize_flag_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let spec = maybe_spec(o)?;
    let class = class(field(o, "class")?, spec_ref(&spec))?;
    let tol = ctx.tol("parabolic.incidence", DEFAULT_TOL);
    let flag = flag(field(o, "flag")?, tol)?;
    let ch = chamber(field(o, "chamber")?)?;
    let (s, g) = normalize_flag_tol(&class, &flag, ch, tol)?;
    Ok(json!({"s": enc_scalar(&s), "gauge": enc_matrix(&g)}))
}

fn flip_cmd(o: &Obj) -> Out {
    let t = scalar(field(o, "t")?, "t")?;
    Ok(json!({"lambda": enc_scalar(&flip(&t))}))
}

fn psi_plus_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let curve = curve(o)?;
    let x = plane_point(field(o, "x")?, "x")?;
    let line = plane_line(field(o, "line")?, "line")?;
    let tol = ctx.tol("modspace.incidence", DEFAULT_TOL);
    let ip = IncidencePoint::with_tol(x, line, tol)?;
    if let Some(order) = o.get("order") {
        let order = jac3(order, Some(curve.spec()), "order")?;
        return Ok(json!({"lambda": enc_scalar(&psi_plus_ordered(&ip, &order, &curve)?)}));
    }
    let r = psi_plus(&ip, &curve)?;
    Ok(json!({
        "class": enc_class(&r.class),
        "lambda": enc_scalar(&r.lambda),
        "flag": enc_flag(&r.flag),
        "locus": r.locus.name(),
    }))
}

fn covering_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let (v1, v2) = (field(o, "z1")?, field(o, "z2")?);
    let exact = |v: &Value| v.is_string() || v.is_i64() || v.is_u64();
    if exact(v1) && exact(v2) {
        let (f2, f3, cusp) = covering_invariants_exact(&rational(v1, "z1")?, &rational(v2, "z2")?);
        return Ok(json!({"F2": enc_q(&f2), "F3": enc_q(&f3), "cusp": cusp, "exact": true}));
    }
    let tol = ctx.tol("modspace.cusp", DEFAULT_TOL);
    let (f2, f3, cusp) = covering_invariants(complex(v1, "z1")?, complex(v2, "z2")?, tol);
    Ok(json!({"F2": enc_c(f2), "F3": enc_c(f3), "cusp": cusp, "exact": false}))
}

fn sigma_count_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let line = plane_line(field(o, "line")?, "line")?;
    Ok(json!({"count": sigma_cover_count(&line, &curve)?}))
}

fn abel_cmd(o: &Obj) -> Out {
    let spec = maybe_spec(o)?;
    let [a, b] = {
        let v = field(o, "pair")?;
        let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema("pair: expected two points"))?;
        [jac(&arr[0], spec_ref(&spec), "pair")?, jac(&arr[1], spec_ref(&spec), "pair")?]
    };
    Ok(json!({"point": enc_jac(&abel(&SymPair::new(a, b)))}))
}

fn section_meet_cmd(o: &Obj) -> Out {
    let spec = maybe_spec(o)?;
    let p1 = jac(field(o, "p1")?, spec_ref(&spec), "p1")?;
    let p2 = jac(field(o, "p2")?, spec_ref(&spec), "p2")?;
    let pair = section_meet(&p1, &p2);
    Ok(json!({"pair": pair.points().iter().map(|p| enc_jac(p)).collect::<Vec<_>>()}))
}

fn torelli_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    if ctx.tol.is_some() {
        ctx.diagnostics.push("torelli: --tol ignored, j-invariants compared at a fixed tolerance".into());
    }
    ctx.diagnostics.push(format!("modspace.j={J_TOL:e}"));
    let t1 = complex_field(o, "tau1")?;
    let t2 = complex_field(o, "tau2")?;
    Ok(json!({"isomorphic": curves_isomorphic(t1, t2)?}))
}

fn enc_auto(g: &ModularAuto) -> Value {
    json!({"shift": enc_jac(g.shift()), "dual": g.dual()})
}

fn auto(v: &Value) -> Result<ModularAuto, CliError> {
    let o = object(v, "element")?;
    let shift = jac(field(o, "shift")?, None, "shift")?;
    let dual = field(o, "dual")?.as_bool().ok_or_else(|| schema("dual: expected a boolean"))?;
    Ok(ModularAuto::new(shift, dual)?)
}

fn aut_elements_cmd() -> Out {
    Ok(json!({"elements": group_elements().iter().map(enc_auto).collect::<Vec<_>>()}))
}

fn aut_act_cmd(o: &Obj, ctx: &mut Ctx) -> Out {
    let g = auto(field(o, "element")?)?;
    let target = field(o, "target")?.as_str().ok_or_else(|| schema("target: expected a string"))?;
    let spec = maybe_spec(o)?;
    match target {
        "point" => Ok(json!({"point": enc_jac(&g.apply(&jac(field(o, "point")?, spec_ref(&spec), "point")?))})),
        "class" => Ok(json!({"class": enc_class(&act_class(&g, &class(field(o, "class")?, spec_ref(&spec))?))})),
        "parabolic" => {
            let cls = class(field(o, "class")?, spec_ref(&spec))?;
            let s = scalar(field(o, "s")?, "s")?;
            let ch = chamber(field(o, "chamber")?)?;
            if g.dual() {
                ctx.diagnostics.push("dual-chamber-convention: opposite chamber, then natural map back".into());
            }
            let (c2, s2, ch2) = act_parabolic(&g, &cls, &s, ch)?;
            Ok(json!({"class": enc_class(&c2), "s": enc_scalar(&s2), "chamber": ch2.name()}))
        }
        "plane" => {
            let curve = curve(o)?;
            Ok(json!({"matrix": enc_matrix(&act_plane(&g, &curve)?)}))
        }
        "compose" => Ok(json!({"element": enc_auto(&g.compose(&auto(field(o, "other")?)?))})),
        "inverse" => Ok(json!({"element": enc_auto(&g.inverse())})),
        _ => Err(schema("target: expected point, class, parabolic, plane, compose or inverse")),
    }
}

fn curve_invariants_cmd(o: &Obj) -> Out {
    let spec = curve_spec(o)?;
    let (g2, g3, j) = curve_invariants(&spec)?;
    Ok(json!({"g2": enc_c(g2), "g3": enc_c(g3), "j": enc_c(j), "reduced_tau": enc_c(reduce_tau(spec.tau()))}))
}

fn wp_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let (p, dp) = wp(complex_field(o, "z")?, &curve)?;
    Ok(json!({"wp": enc_c(p), "wp_prime": enc_c(dp)}))
}

fn embed_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let p = jac(field(o, "point")?, Some(curve.spec()), "point")?;
    Ok(json!({"point": enc_vec3(embed(&p, &curve).coords())}))
}

fn dual_sextic_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let line = plane_line(field(o, "line")?, "line")?;
    let (tangent, flex) = dual_sextic_contains(&line, &curve)?;
    Ok(json!({"tangent": tangent, "flex": flex}))
}

fn cross_ratio_cmd(o: &Obj) -> Out {
    let v = field(o, "z")?;
    let arr = v.as_array().filter(|a| a.len() == 4).ok_or_else(|| schema("z: expected four scalars"))?;
    let z: Vec<_> = arr.iter().map(|x| scalar(x, "z")).collect::<Result<_, _>>()?;
    Ok(json!({"value": enc_scalar(&cross_ratio(&z[0], &z[1], &z[2], &z[3])?)}))
}

/// The local chart has exactly three continuous inputs: `m`, `c` (the line) and `s` (the point on it).
fn moduli_chart_cmd(o: &Obj) -> Out {
    let curve = curve(o)?;
    let m: C = complex_field(o, "m")?;
    let c0: C = complex_field(o, "c")?;
    let s: C = complex_field(o, "s")?;
    let reference = jac3(field(o, "reference")?, Some(curve.spec()), "reference")?;
    let [z1, z2, lam] = moduli_chart(m, c0, s, &reference, &curve)?;
    Ok(json!({"z1": enc_c(z1), "z2": enc_c(z2), "lambda": enc_c(lam)}))
}
