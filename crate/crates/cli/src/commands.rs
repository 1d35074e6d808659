use qpoly_core::analysis_props::{
    h_second_deriv, ratio_tie_case, verify_h_dd_dichotomy, verify_ratio_ineq, verify_weight_u_monotone, weight_u,
    RatioParams,
};
use qpoly_core::combinatorics::{
    sweep_conv_empirical, verify_conv_inequality, verify_power_sum_bounds, verify_proof_steps, verify_t_sum_identity,
    LemmaReport, Witness, WitnessValue,
};
use qpoly_core::functionals::{
    d_const, f_q_deriv, f_q_fd, g_q_deriv, g_q_fd, psi_difference_chain, structure_constants, FDStep, IndexQuad,
};
use qpoly_core::qspecial::{gamma_q, polygamma_q, PrecisionBudget, QPoint, SeriesValue};
use qpoly_core::series_cm::{
    certify_cm_series_rows, check_cm_grid, lattice_points, CertReport, CertStatus, CmRegime, CoeffTarget,
};
use rug::Float;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CertifyArgs, EvalArgs, FnName, LemmaName, Method, PropName, PropsArgs, TargetName, VerifyArgs};
use crate::error::{need, CliError};

/// A finished command: the JSON document, its CSV and text renderings, and
/// the process exit status.
pub struct Outcome {
    pub json: Value,
    pub csv: String,
    pub text: String,
    pub exit: i32,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 4;

fn fmt(v: &Float, b: &PrecisionBudget) -> String {
    v.to_string_radix(10, Some(b.digits as usize))
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    fill(&mut w).map_err(csv_err)?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

fn quad_from(r: Option<u32>, m: Option<u32>, n: Option<u32>, s: Option<u32>, ctx: &str) -> Result<IndexQuad, CliError> {
    let (r, m, n, s) = (need(r, "r", ctx)?, need(m, "m", ctx)?, need(n, "n", ctx)?, need(s, "s", ctx)?);
    Ok(IndexQuad::balanced(r, m, n, s)?)
}

#[derive(Serialize)]
struct EvalParams {
    #[serde(rename = "fn")]
    func: FnName,
    q: f64,
    x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad: Option<IndexQuad>,
}

/// `psi_q^{(m)}(x)` minus its image under `q -> 1/q`, relative to the value.
fn reflection_residual(p: &QPoint, order: u32, value: &Float, b: &PrecisionBudget) -> Result<f64, CliError> {
    let prec = b.prec();
    let mirror = polygamma_q(&p.reflected(prec), order, b)?.value;
    let (big, small) = if p.below_one() { (mirror, value.clone()) } else { (value.clone(), mirror) };
    let big_q = if p.below_one() {
        Float::with_val(prec, p.q().recip_ref())
    } else {
        Float::with_val(prec, p.q())
    };
    let ln_q = big_q.ln();
    let shift = match order {
        0 => Float::with_val(prec, p.x() - 1.5f64) * &ln_q,
        1 => ln_q,
        _ => Float::new(prec),
    };
    let resid = Float::with_val(prec, &big - &shift) - &small;
    Ok((resid / big).abs().to_f64())
}

pub fn cmd_eval(a: &EvalArgs, b: &PrecisionBudget) -> Result<(Value, Outcome), CliError> {
    let ctx = "eval";
    let mut params = EvalParams {
        func: a.func,
        q: a.q,
        x: a.x,
        c: None,
        m: None,
        quad: None,
    };
    let p = QPoint::new(a.q, a.x)?;
    let mut series: Option<SeriesValue> = None;
    let mut residual = None;
    let value = match a.func {
        FnName::GammaQ => {
            let v = gamma_q(&p, b)?;
            series = Some(v.clone());
            v.value
        }
        FnName::PsiQ | FnName::PsiQM => {
            let order = if a.func == FnName::PsiQ {
                0
            } else {
                let m = need(a.m, "m", "psi_q_m")?;
                params.m = Some(m);
                m
            };
            let v = polygamma_q(&p, order, b)?;
            residual = Some(reflection_residual(&p, order, &v.value, b)?);
            series = Some(v.clone());
            v.value
        }
        FnName::F => {
            let idx = quad_from(a.r, a.m, a.n, a.s, ctx)?;
            let c = need(a.c, "c", "F")?;
            params.quad = Some(idx);
            params.c = Some(c);
            f_q_fd(&idx, &p, &FDStep::new(c)?, b)?
        }
        FnName::G => {
            let m = need(a.m, "m", "G")?;
            let c = need(a.c, "c", "G")?;
            params.m = Some(m);
            params.c = Some(c);
            g_q_fd(m, &p, &FDStep::new(c)?, b)?
        }
        FnName::FDeriv => {
            let idx = quad_from(a.r, a.m, a.n, a.s, ctx)?;
            params.quad = Some(idx);
            f_q_deriv(&idx, &p, b)?
        }
        FnName::GDeriv => {
            let m = need(a.m, "m", "G_deriv")?;
            params.m = Some(m);
            g_q_deriv(m, &p, b)?
        }
    };
    let value_s = fmt(&value, b);
    let tail = series.as_ref().map(|s| s.tail_bound.to_string_radix(10, Some(6)));
    let terms = series.as_ref().map(|s| s.terms_used);
    let result = json!({
        "value": value_s,
        "tail_bound": tail,
        "terms_used": terms,
        "reflection_residual": residual,
    });
    let csv = csv_string(&["fn", "value", "tail_bound", "terms_used", "reflection_residual"], |w| {
        w.write_record([
            serde_json::to_value(a.func).unwrap().as_str().unwrap().to_string(),
            value_s.clone(),
            tail.clone().unwrap_or_default(),
            terms.map(|t| t.to_string()).unwrap_or_default(),
            residual.map(|r| format!("{r:e}")).unwrap_or_default(),
        ])
    })?;
    let mut text = format!("value        {value_s}\n");
    if let Some(t) = &tail {
        text += &format!("tail bound   {t}\nterms used   {}\n", terms.unwrap());
    }
    if let Some(r) = residual {
        text += &format!("reflection   relative residual {r:e}\n");
    }
    let out = Outcome {
        json: json!({ "result": result, "status": "ok" }),
        csv,
        text,
        exit: EXIT_OK,
    };
    Ok((serde_json::to_value(params).unwrap(), out))
}

#[derive(Serialize)]
struct GridParams {
    x_min: f64,
    x_max: f64,
    grid_points: usize,
    h: f64,
    k_diff: usize,
    slack: f64,
}

#[derive(Serialize)]
struct CertifyParams {
    target: CoeffTarget,
    regime: CmRegime,
    method: Method,
    k_max: usize,
    abs_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridParams>,
}

fn status_name(s: CertStatus) -> &'static str {
    match s {
        CertStatus::Certified => "Certified",
        CertStatus::Violated => "Violated",
        CertStatus::Inconclusive => "Inconclusive",
    }
}

fn regime_name(r: CmRegime) -> String {
    serde_json::to_value(r).unwrap().as_str().unwrap().to_string()
}

fn report_text(name: &str, r: &CertReport) -> String {
    let mut t = format!(
        "{name}: {} over k = {}..={}, min margin {:e}\n",
        status_name(r.status),
        r.k_range.0,
        r.k_range.1,
        r.min_margin
    );
    if let Some(v) = &r.first_violation {
        match v.x {
            Some(x) => t += &format!("  first violation: k = {} at x = {x}, value {:e}\n", v.index, v.value),
            None => t += &format!("  first violation: k = {}, value {:e}\n", v.index, v.value),
        }
    }
    t
}

pub fn cmd_certify(a: &CertifyArgs, b: &PrecisionBudget) -> Result<(Value, Outcome), CliError> {
    let target = match a.target {
        TargetName::G => CoeffTarget::g(need(a.m, "m", "certify --target G")?, a.q, a.c)?,
        TargetName::F => CoeffTarget::f(quad_from(a.r, a.m, a.n, a.s, "certify --target F")?, a.q, a.c)?,
    };
    let regime = target.regime();
    let run_series = matches!(a.method, Method::Series | Method::Both);
    let run_grid = matches!(a.method, Method::Grid | Method::Both);
    let grid = run_grid.then(|| GridParams {
        x_min: a.x_min,
        x_max: a.x_max,
        grid_points: a.grid.unwrap_or_else(|| lattice_points(a.x_min, a.x_max, a.h)),
        h: a.h,
        k_diff: a.k_diff,
        slack: a.slack,
    });
    let params = CertifyParams {
        target,
        regime,
        method: a.method,
        k_max: a.k_max,
        abs_slack: a.abs_slack,
        grid,
    };

    let mut reports = serde_json::Map::new();
    let mut statuses = Vec::new();
    let mut text = format!("target {target} [{}]\n", regime_name(regime));
    let mut csv = None;

    if run_series {
        let (rep, rows) = certify_cm_series_rows(&target, a.k_max, b, a.abs_slack)?;
        let label = regime_name(regime);
        csv = Some(csv_string(&["k", "coefficient", "margin", "regime"], |w| {
            for row in &rows {
                w.write_record([row.k.to_string(), fmt(&row.coefficient, b), fmt(&row.margin, b), label.clone()])?;
            }
            Ok(())
        })?);
        text += &report_text("series", &rep);
        statuses.push(rep.status);
        reports.insert("series".into(), serde_json::to_value(&rep).unwrap());
    }
    if let Some(g) = &params.grid {
        let sign = if regime == CmRegime::Theorem1Reversed { -1 } else { 1 };
        let step = FDStep::new(a.c)?;
        let rep = match target.kind {
            qpoly_core::series_cm::CoeffKind::GOfM(m) => check_cm_grid(
                |x| Ok(g_q_fd(m, &QPoint::new(a.q, x)?, &step, b)? * sign),
                g.x_min,
                g.x_max,
                g.grid_points,
                g.h,
                g.k_diff,
                g.slack,
            )?,
            qpoly_core::series_cm::CoeffKind::FOfQuad(idx) => check_cm_grid(
                |x| f_q_fd(&idx, &QPoint::new(a.q, x)?, &step, b),
                g.x_min,
                g.x_max,
                g.grid_points,
                g.h,
                g.k_diff,
                g.slack,
            )?,
        }
        .with_label(if sign < 0 { format!("-{target}") } else { target.to_string() });
        if csv.is_none() {
            csv = Some(csv_string(
                &["method", "k_lo", "k_hi", "min_margin", "violation_k", "violation_x", "status"],
                |w| {
                    let v = rep.first_violation.as_ref();
                    w.write_record([
                        "grid".to_string(),
                        rep.k_range.0.to_string(),
                        rep.k_range.1.to_string(),
                        format!("{:e}", rep.min_margin),
                        v.map(|v| v.index.to_string()).unwrap_or_default(),
                        v.and_then(|v| v.x).map(|x| x.to_string()).unwrap_or_default(),
                        status_name(rep.status).to_string(),
                    ])
                },
            )?);
        }
        text += &report_text("grid", &rep);
        statuses.push(rep.status);
        reports.insert("grid".into(), serde_json::to_value(&rep).unwrap());
    }

    let overall = if regime == CmRegime::UnprovenRegime {
        CertStatus::Inconclusive
    } else if statuses.contains(&CertStatus::Violated) {
        CertStatus::Violated
    } else {
        CertStatus::Certified
    };
    text += &format!("status {}\n", status_name(overall));
    let exit = match overall {
        CertStatus::Certified => EXIT_OK,
        CertStatus::Violated => EXIT_VIOLATED,
        CertStatus::Inconclusive => EXIT_INCONCLUSIVE,
    };
    let out = Outcome {
        json: json!({ "reports": reports, "status": status_name(overall) }),
        csv: csv.unwrap_or_default(),
        text,
        exit,
    };
    Ok((serde_json::to_value(params).unwrap(), out))
}

#[derive(Serialize, Default)]
struct VerifyParams {
    lemma: Option<LemmaName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_dd_grid: Option<Value>,
}

const H_DD_Y: [f64; 3] = [0.1, 0.5, 0.9];
const H_DD_C: [f64; 5] = [0.25, 0.5, 0.75, 1.5, 3.0];
const H_DD_Z: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

fn combine(name: &str, parts: Vec<LemmaReport>) -> LemmaReport {
    let mut rep = LemmaReport::new(name);
    for p in parts {
        for (k, v) in &p.ranges {
            rep.ranges.entry(k.clone()).or_insert_with(|| v.clone());
        }
        rep.merge(p);
    }
    rep.finish()
}

fn witness_value(v: &WitnessValue) -> String {
    match v {
        WitnessValue::Exact { num, den } if den == "1" => num.clone(),
        WitnessValue::Exact { num, den } => format!("{num}/{den}"),
        WitnessValue::Decimal { decimal } => decimal.clone(),
    }
}

fn lemma_csv(reports: &[LemmaReport]) -> Result<String, CliError> {
    csv_string(&["lemma", "kind", "check", "params", "k", "lhs", "rhs", "regime"], |w| {
        for rep in reports {
            let groups: [(&str, &Vec<Witness>); 3] = [
                ("violation", &rep.violations),
                ("equality", &rep.equalities),
                ("empirical_violation", &rep.empirical_violations),
            ];
            for (kind, list) in groups {
                for wit in list {
                    w.write_record([
                        rep.lemma.clone(),
                        kind.to_string(),
                        wit.check.clone(),
                        wit.params.clone(),
                        wit.k.map(|k| k.to_string()).unwrap_or_default(),
                        witness_value(&wit.lhs),
                        witness_value(&wit.rhs),
                        serde_json::to_value(wit.regime).unwrap().as_str().unwrap().to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })
}

fn lemma_text(rep: &LemmaReport) -> String {
    let mut t = format!(
        "{}: {} checks, {} violations, {} equalities, {} empirical violations -> {}\n",
        rep.lemma,
        rep.checked,
        rep.violations.len(),
        rep.equalities.len(),
        rep.empirical_violations.len(),
        if rep.pass { "pass" } else { "FAIL" }
    );
    for w in rep.violations.iter().take(5) {
        t += &format!(
            "  violation {} {} k={:?}: {} < {}\n",
            w.check,
            w.params,
            w.k,
            witness_value(&w.lhs),
            witness_value(&w.rhs)
        );
    }
    t
}

pub fn cmd_verify(a: &VerifyArgs, b: &PrecisionBudget) -> Result<(Value, Outcome), CliError> {
    let mut params = VerifyParams {
        lemma: Some(a.lemma),
        ..Default::default()
    };
    let reports: Vec<LemmaReport> = match a.lemma {
        LemmaName::Conv => {
            let r_max = a.r_max.unwrap_or(8);
            let k_max = a.k_max.unwrap_or(300);
            params.r_max = Some(r_max);
            params.k_max = Some(k_max);
            params.empirical = Some(a.empirical);
            let mut v = vec![verify_conv_inequality(r_max, k_max)];
            if a.empirical {
                v.push(sweep_conv_empirical(r_max, k_max));
            }
            v
        }
        LemmaName::ProofSteps => {
            let s = need(a.s, "s", "verify --lemma proof-steps")?;
            let rs: Vec<u32> = match a.r {
                Some(r) => vec![r],
                None => (s.max(1)..=a.r_max.unwrap_or(6)).collect(),
            };
            let ts: Vec<u32> = match a.t {
                Some(t) => vec![t],
                None => (s..=a.t_max.unwrap_or(6)).collect(),
            };
            if rs.is_empty() || ts.is_empty() {
                return Err(CliError::Flag("proof-steps: empty r or T range".into()));
            }
            let k_max = a.k_max.unwrap_or(100);
            params.s = Some(s);
            params.r = Some(rs.clone());
            params.t = Some(ts.clone());
            params.k_max = Some(k_max);
            let mut parts = Vec::new();
            for &t in &ts {
                for &r in &rs {
                    parts.push(verify_proof_steps(s, t, r, k_max)?);
                }
            }
            vec![combine("proof_steps", parts)]
        }
        LemmaName::PowerSums => {
            let m_max = a.m_max.unwrap_or(10);
            let n_max = a.n_max.unwrap_or(100);
            params.m_max = Some(m_max);
            params.n_max = Some(n_max);
            vec![verify_power_sum_bounds(m_max, n_max)]
        }
        LemmaName::Ratio => {
            let ns: Vec<u32> = match a.n {
                Some(n) => vec![n],
                None => (2..=a.n_max.unwrap_or(30)).collect(),
            };
            let qs = if a.q.is_empty() { vec![1.5, 2.0, 10.0] } else { a.q.clone() };
            let cs = if a.c.is_empty() {
                vec![0.25, 0.5, 0.75, 1.5, 3.0]
            } else {
                a.c.clone()
            };
            params.n = Some(ns.clone());
            params.q = Some(qs.clone());
            params.c = Some(cs.clone());
            let mut parts = Vec::new();
            for &n in &ns {
                for &q in &qs {
                    for &c in &cs {
                        parts.push(if c == 1.0 {
                            ratio_tie_case(n, q, b)?
                        } else {
                            verify_ratio_ineq(n, q, c, b)?
                        });
                    }
                }
            }
            vec![combine("ratio_inequality", parts)]
        }
        LemmaName::Weights => {
            let points = a.points.unwrap_or(1000);
            params.points = Some(points);
            params.h_dd_grid = Some(json!({ "y": H_DD_Y, "c": H_DD_C, "z": H_DD_Z }));
            vec![
                verify_weight_u_monotone(points)?,
                verify_h_dd_dichotomy(&H_DD_Y, &H_DD_C, &H_DD_Z, b)?,
            ]
        }
        LemmaName::TSum => {
            let r_max = a.r_max.unwrap_or(6);
            let k_max = a.k_max.unwrap_or(50);
            params.r_max = Some(r_max);
            params.k_max = Some(k_max);
            vec![verify_t_sum_identity(r_max, k_max)?]
        }
    };
    let pass = reports.iter().all(|r| r.pass);
    let text: String = reports.iter().map(lemma_text).collect::<String>()
        + if pass { "status pass\n" } else { "status FAIL\n" };
    let out = Outcome {
        json: json!({
            "reports": reports,
            "status": if pass { "pass" } else { "fail" },
        }),
        csv: lemma_csv(&reports)?,
        text,
        exit: if pass { EXIT_OK } else { EXIT_VIOLATED },
    };
    Ok((serde_json::to_value(params).unwrap(), out))
}

pub fn cmd_props(a: &PropsArgs, b: &PrecisionBudget) -> Result<(Value, Outcome), CliError> {
    let (params, fields): (Value, Vec<(String, String)>) = match a.what {
        PropName::H => {
            let (z, y, c) = (need(a.z, "z", "props h")?, need(a.y, "y", "props h")?, need(a.c, "c", "props h")?);
            let (h, h_dd) = h_second_deriv(z, &RatioParams::new(y, c)?, b)?;
            let expected = if c < 1.0 { "<= 0" } else { ">= 0" };
            (
                json!({ "what": a.what, "z": z, "y": y, "c": c }),
                vec![
                    ("h".into(), fmt(&h, b)),
                    ("h_dd".into(), fmt(&h_dd, b)),
                    ("h_dd_expected_sign".into(), expected.into()),
                ],
            )
        }
        PropName::WeightU => {
            let u = need(a.u, "u", "props weight-u")?;
            (
                json!({ "what": a.what, "u": u }),
                vec![("weight_u".into(), fmt(&weight_u(u)?, b))],
            )
        }
        PropName::Chain => {
            let (q, c, x) = (need(a.q, "q", "props chain")?, need(a.c, "c", "props chain")?, need(a.x, "x", "props chain")?);
            let ch = psi_difference_chain(&QPoint::new(q, x)?, &FDStep::new(c)?, b)?;
            let order = if ch.strictly_decreasing() {
                "upper > middle > lower"
            } else if ch.strictly_increasing() {
                "upper < middle < lower"
            } else {
                "unordered"
            };
            (
                json!({ "what": a.what, "q": q, "c": c, "x": x }),
                vec![
                    ("upper".into(), fmt(&ch.upper, b)),
                    ("middle".into(), fmt(&ch.middle, b)),
                    ("lower".into(), fmt(&ch.lower, b)),
                    ("order".into(), order.into()),
                ],
            )
        }
        PropName::Constants => {
            let idx = IndexQuad::new(
                need(a.r, "r", "props constants")?,
                need(a.m, "m", "props constants")?,
                need(a.n, "n", "props constants")?,
                need(a.s, "s", "props constants")?,
            )?;
            let sc = structure_constants(&idx)?;
            let mut fields = vec![
                ("alpha".into(), sc.alpha.to_string()),
                ("beta".into(), sc.beta.map(|b| b.to_string()).unwrap_or_else(|| "undefined".into())),
            ];
            if let Some(q) = a.q {
                fields.push(("d".into(), d_const(idx.m, q)?.to_string()));
            }
            (json!({ "what": a.what, "quad": idx, "q": a.q }), fields)
        }
    };
    let names: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
    let csv = csv_string(&names, |w| w.write_record(fields.iter().map(|(_, v)| v)))?;
    let text = fields.iter().map(|(k, v)| format!("{k:<20}{v}\n")).collect();
    let result: serde_json::Map<String, Value> = fields.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    let out = Outcome {
        json: json!({ "result": result, "status": "ok" }),
        csv,
        text,
        exit: EXIT_OK,
    };
    Ok((params, out))
}
