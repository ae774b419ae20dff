//! `expand` and `verify`: the coefficient engine on a jets file.

use bergman_core::expansion::{coefficient_checks, identity_checks, structure_checks, Check, ExpansionReport};
use bergman_core::jets::{AnyJets, JsonScalar, PointJets};
use bergman_core::scalar::{Mat, Scalar, C64};
use bergman_core::wick::kernel::Blocks;
use bergman_core::wick::KernelPoly;
use bergman_core::Error as CoreError;
use serde_json::{json, Value};
use speclab::csv::fmt17;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, Result};
use crate::manifest::Artifacts;

pub fn load_jets(cfg: &RunConfig, art: &mut Artifacts) -> Result<AnyJets> {
    let path = cfg.input.as_ref().ok_or_else(|| CliError::Validation("no jets file".into()))?;
    let bytes = art.input(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Validation(e.to_string()))?;
    let jets = AnyJets::from_str(&text)?;
    if cfg.mode == Mode::Exact {
        return Ok(jets);
    }
    Ok(AnyJets::Float(match jets {
        AnyJets::Rational(j) => to_float(&j)?,
        AnyJets::Pi(j) => to_float(&j)?,
        AnyJets::Float(j) => j,
    }))
}

fn to_float<S: Scalar>(j: &PointJets<S>) -> Result<PointJets<C64>> {
    Ok(j.map_scalars(|x| C64(x.to_c64()))?)
}

fn mat_floats<S: Scalar>(m: &Mat<S>) -> Value {
    Value::Array(m.data.iter().map(|x| {
        let c = x.to_c64();
        json!([c.re, c.im])
    }).collect())
}

fn kernel_json<S: JsonScalar>(k: &KernelPoly<Mat<S>>) -> Value {
    let terms: Vec<Value> = k
        .poly
        .terms
        .iter()
        .map(|(e, c)| {
            let b = Blocks { e, n: k.n };
            json!({ "z": b.b(0), "zbar": b.b(1), "zp": b.b(2), "zbarp": b.b(3), "coeff": bergman_core::jets::mat_json(c) })
        })
        .collect();
    Value::Array(terms)
}

fn checks_csv(checks: &[Check]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["check", "ok", "defect"]).map_err(io)?;
    for c in checks {
        w.write_record([c.name.clone(), c.ok.to_string(), fmt17(c.defect)]).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// b_{0,1} and b_{q,0} against their closed forms, when the mode carries π.
fn kahler_checks<S: Scalar>(j: &PointJets<S>, q_max: usize) -> Result<Vec<Check>> {
    if !j.kahler {
        return Ok(Vec::new());
    }
    match coefficient_checks(j, q_max.clamp(1, 3)) {
        Ok(c) => Ok(c),
        Err(CoreError::PiUnavailable) => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

pub fn expand<S: JsonScalar>(j: &PointJets<S>, cfg: &RunConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    let report = art.timed("expansion", |_| Ok(ExpansionReport::build(j, cfg.q_max, cfg.r_max, true)?))?;
    let checks = art.timed("closed forms", |_| kahler_checks(j, cfg.q_max))?;

    let kernels: Vec<Value> = report.f.iter().map(|(&(q, r), k)| json!({ "q": q, "r": r, "terms": kernel_json(k) })).collect();
    let coefficients: Vec<Value> = report
        .b
        .iter()
        .map(|(&(q, r), m)| json!({ "q": q, "r": r, "value": bergman_core::jets::mat_json(m), "float": mat_floats(m) }))
        .collect();
    let poles: Vec<Value> = report
        .diagnostics
        .iter()
        .map(|d| json!({ "r": d.r, "pn_order": d.g_order, "pn_bound": d.g_bound, "perp_order": d.perp_order, "perp_bound": d.perp_bound }))
        .collect();
    art.write_json(
        "expand.json",
        &json!({
            "mode": S::MODE,
            "n": j.n,
            "rank": j.rank,
            "kahler": j.kahler,
            "kernels": kernels,
            "coefficients": coefficients,
            "pole_orders": poles,
            "checks": checks,
        }),
    )?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["q", "r", "entry", "value", "re", "im"]).map_err(io)?;
    for (&(q, r), m) in &report.b {
        for (i, x) in m.data.iter().enumerate() {
            let c = x.to_c64();
            w.write_record([q.to_string(), r.to_string(), i.to_string(), x.to_string(), fmt17(c.re), fmt17(c.im)]).map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    art.write("expand.csv", &bytes)?;
    Ok(checks)
}

pub fn verify<S: JsonScalar>(j: &PointJets<S>, cfg: &RunConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    let mut checks = art.timed("identities", |_| Ok(identity_checks(j)?))?;
    checks.extend(art.timed("structure", |_| Ok(structure_checks(j, cfg.q_max, cfg.r_max)?))?);
    checks.extend(art.timed("closed forms", |_| kahler_checks(j, cfg.q_max))?);
    let failed = checks.iter().filter(|c| !c.ok).count();
    art.write_json("verify.json", &json!({ "mode": S::MODE, "passed": failed == 0, "failed": failed, "checks": checks }))?;
    let bytes = checks_csv(&checks)?;
    art.write("verify.csv", &bytes)?;
    Ok(checks)
}
