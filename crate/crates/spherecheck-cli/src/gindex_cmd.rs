use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde_json::{json, Value};

use spherecheck::gindex::{
    cyc_json, fmt_angle, hj_resolution, lefschetz_at, parse_angle, profile_search, signature_defect, signature_number, spin_number,
    torus_model, torus_model_unchecked, FixedComponent, FixedPointProfile, FixedSurface, IsolatedPoint, Scenario,
};
use spherecheck::Error;

use crate::{read, Report};

#[derive(Subcommand)]
pub enum GCmd {
    /// χ(Fix(g^e)) for every nontrivial power.
    Lefschetz(ProfileArgs),
    /// Fixed-point side of the G-signature formula for every nontrivial power.
    Signature(ProfileArgs),
    /// Fixed-point side of the Dirac index formula (odd prime order).
    Spin(ProfileArgs),
    /// Signature defects of each fixed component (prime order).
    Defects(ProfileArgs),
    /// Lefschetz number, signature and H¹ trace of a rotation of T⁴.
    TorusModel {
        /// Angles as fractions of a full turn, e.g. 1/4.
        #[arg(long, allow_hyphen_values = true)]
        theta1: String,
        #[arg(long, allow_hyphen_values = true)]
        theta2: String,
        /// Report instead of rejecting angles that fail integrality.
        #[arg(long)]
        allow_nonintegral: bool,
    },
    /// Hirzebruch–Jung resolution of 1/m(1, b).
    Resolve {
        #[arg(long)]
        m: i64,
        #[arg(long)]
        b: i64,
    },
    /// Enumerate fixed-point profiles for a scenario file and filter them.
    ProfileSearch {
        /// Scenario JSON; a bare name is also looked up among the shipped fixtures.
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
    },
}

#[derive(Args)]
pub struct ProfileArgs {
    /// Profile JSON file.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["order", "point", "surface"])]
    profile: Option<PathBuf>,
    /// Group order, with inline --point / --surface.
    #[arg(long, required_unless_present = "profile")]
    order: Option<i64>,
    /// Isolated point `m:a:b` (isotropy order m, weights a, b).
    #[arg(long)]
    point: Vec<String>,
    /// Fixed surface `m:g:c` (isotropy order m, genus g, normal weight c), Y² = 2g − 2.
    #[arg(long)]
    surface: Vec<String>,
}

fn triple(s: &str) -> Result<(i64, i64, i64), Error> {
    let v: Vec<i64> = s.split(':').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|_| Error::Invalid(format!("expected m:x:y, got `{s}`")))?;
    match v[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Error::Invalid(format!("expected m:x:y, got `{s}`"))),
    }
}

fn profile(args: &ProfileArgs) -> Result<FixedPointProfile, Error> {
    let p = match &args.profile {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| Error::Invalid(format!("profile: {e}")))?,
        None => {
            let mut points = Vec::new();
            for s in &args.point {
                let (m, a, b) = triple(s)?;
                points.push(IsolatedPoint::new(m, a, b)?);
            }
            let mut surfaces = Vec::new();
            for s in &args.surface {
                let (m, g, c) = triple(s)?;
                surfaces.push(FixedSurface::cy(g, c, m));
            }
            FixedPointProfile { group_order: args.order.unwrap(), points, surfaces, cy_flag: true }
        }
    };
    p.validate()?;
    Ok(p)
}

fn per_power(p: &FixedPointProfile, f: impl Fn(i64) -> Result<Value, Error>) -> Result<Vec<Value>, Error> {
    (1..p.group_order).map(|e| Ok(json!({ "power": e, "value": f(e)? }))).collect()
}

fn power_text(title: &str, rows: &[Value]) -> String {
    let mut t = format!("{title}\n");
    for r in rows {
        let v = &r["value"];
        let shown = v.get("exact").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| v.to_string());
        t += &format!("  g^{} : {shown}\n", r["power"]);
    }
    t
}

fn scenario_path(p: &PathBuf) -> PathBuf {
    if p.exists() {
        return p.clone();
    }
    let shipped = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/scenarios")).join(p);
    if shipped.exists() {
        return shipped;
    }
    let with_ext = shipped.with_extension("json");
    if with_ext.exists() { with_ext } else { p.clone() }
}

pub fn run(cmd: &GCmd) -> Result<Report, Error> {
    match cmd {
        GCmd::Lefschetz(a) => {
            let p = profile(a)?;
            let rows = per_power(&p, |e| Ok(json!(lefschetz_at(&p, e))))?;
            Ok(Report { text: power_text("L(g^e) = chi(Fix(g^e))", &rows), value: json!({ "profile": p, "lefschetz": rows }), ok: true })
        }
        GCmd::Signature(a) => {
            let p = profile(a)?;
            let rows = per_power(&p, |e| Ok(cyc_json(&signature_number(&p, e)?)))?;
            Ok(Report { text: power_text("Sign(g^e) from fixed data", &rows), value: json!({ "profile": p, "signature": rows }), ok: true })
        }
        GCmd::Spin(a) => {
            let p = profile(a)?;
            let n = p.group_order;
            let rows = per_power(&p, |e| Ok(cyc_json(&spin_number(&p, n, e)?)))?;
            Ok(Report { text: power_text("Spin(g^e) from fixed data", &rows), value: json!({ "profile": p, "spin": rows }), ok: true })
        }
        GCmd::Defects(a) => {
            let p = profile(a)?;
            let n = p.group_order;
            let mut rows = Vec::new();
            let mut total = num_rational::BigRational::from_integer(0.into());
            let mut text = String::from("signature defects\n");
            for q in &p.points {
                let d = signature_defect(&FixedComponent::Point(q.clone()), n)?;
                text += &format!("  point order {} weights ({}, {}): {d}\n", q.order, q.weights.0, q.weights.1);
                rows.push(json!({ "point": q, "defect": d.to_string() }));
                total += d;
            }
            for s in &p.surfaces {
                let d = signature_defect(&FixedComponent::Surface(s.clone()), n)?;
                text += &format!("  surface genus {} Y^2 = {}: {d}\n", s.genus, s.self_int);
                rows.push(json!({ "surface": s, "defect": d.to_string() }));
                total += d;
            }
            text += &format!("  total: {total}\n");
            Ok(Report { value: json!({ "profile": p, "defects": rows, "total": total.to_string() }), text, ok: true })
        }
        GCmd::TorusModel { theta1, theta2, allow_nonintegral } => {
            let (t1, t2) = (parse_angle(theta1)?, parse_angle(theta2)?);
            let m = if *allow_nonintegral { torus_model_unchecked(t1, t2)? } else { torus_model(t1, t2)? };
            let text = format!(
                "angles ({}, {})\n  L = {}\n  Sign = {}\n  tr H1 = {}\n  fixed b2+ = {}, b2- = {}\n  integral: {}\n",
                fmt_angle(&m.angles.0),
                fmt_angle(&m.angles.1),
                m.lefschetz,
                m.signature,
                m.trace_h1,
                m.b2plus_fixed,
                m.b2minus_fixed,
                m.integral
            );
            Ok(Report { value: serde_json::to_value(&m).unwrap(), text, ok: true })
        }
        GCmd::Resolve { m, b } => {
            let r = hj_resolution(*m, *b)?;
            let disc: Vec<String> = r.discrepancies.iter().map(|x| x.to_string()).collect();
            let text = format!(
                "1/{m}(1, {b}) resolution\n  chain: {:?}\n  discrepancies: [{}]\n  delta chi = {}, delta b2- = {}\n  delta K^2 = {}\n  Du Val: {}\n",
                r.chain,
                disc.join(", "),
                r.delta_chi,
                r.delta_b2minus,
                r.delta_k2,
                r.is_du_val()
            );
            let mut v = serde_json::to_value(&r).unwrap();
            v["du_val"] = json!(r.is_du_val());
            Ok(Report { value: v, text, ok: true })
        }
        GCmd::ProfileSearch { scenario } => {
            let sc = Scenario::from_json(&read(&scenario_path(scenario))?)?;
            let r = profile_search(&sc)?;
            let mut text = format!("{}: {} rows, {} surviving\n", r.scenario, r.rows.len(), r.survivors().len());
            for row in &r.rows {
                let types: Vec<String> = row.types.iter().map(|t| format!("{}x(1,{})/{}", t.points, t.type_b, t.order)).collect();
                let status = match row.eliminated_at {
                    None => "SURVIVES".to_string(),
                    Some(s) => format!("eliminated at {s}: {}", row.reason),
                };
                text += &format!("  [{}] {} {} sumY2={} : {status}\n", row.branch, row.quotient, types.join(" "), row.sum_y2);
            }
            for n in &r.notes {
                text += &format!("  note [{}] {}: {}\n", n.branch, n.quotient, n.note);
            }
            Ok(Report { value: serde_json::to_value(&r).unwrap(), text, ok: true })
        }
    }
}
