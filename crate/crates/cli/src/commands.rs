use std::io::{BufRead, IsTerminal, Write};
use std::path::Path;

use seqprt::design::{cost_curve, effective_n, effective_n_candidates, find_n_star, fixed_design_alt};
use seqprt::umpbt::umpbt;
use seqprt::{
    design, design_exact_prop, obsfile, oc, oc_exact_prop, Alternative, DecisionKind, DesignResult, Family, McOptions,
    Method, Msprt, Observation, Side, TestSpec, Trial,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::{CostArgs, DesignArgs, FindNArgs, HelperArgs, McArgs, OcArgs, RunArgs, UmpbtArgs};
use crate::error::CliError;
use crate::output::{cell, Plot, Report, Series, Table};

const FIXED_ALPHA: f64 = 0.05;

fn spec_json(spec: &TestSpec) -> Value {
    serde_json::to_value(spec).expect("specs serialize")
}

fn alt_summary(alt: &Alternative) -> Value {
    match *alt {
        Alternative::Point { theta1, .. } => json!(theta1),
        Alternative::DataDependentT {
            null: theta0,
            shift_per_sd,
            ..
        } => json!({"null": theta0, "shift_per_sd": shift_per_sd}),
        Alternative::Mixture { .. } => {
            let [(p1, w1), (p2, w2)] = alt.mixture_components().expect("mixture");
            json!({"points": [p1, p2], "weights": [w1, w2]})
        }
    }
}

/// A number for a point alternative, an object otherwise; two-sided tests
/// report one entry per side.
fn umpbt_alt(spec: &TestSpec, alts: &[Alternative]) -> Value {
    if spec.side == Side::TwoSided {
        json!({"right": alt_summary(&alts[0]), "left": alt_summary(&alts[1])})
    } else {
        alt_summary(&alts[0])
    }
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Calibrate γ by Monte Carlo or, with `--exact`, on the proportion lattice.
fn calibrate(spec: &TestSpec, mc: &McArgs) -> Result<DesignResult, CliError> {
    let result = if mc.exact {
        if spec.family != Family::OneProp {
            return Err(CliError::usage("--exact applies to one-prop tests only"));
        }
        design_exact_prop(spec)?
    } else {
        design(spec, mc.options()?)?
    };
    if !result.feasible {
        return Err(CliError::infeasible(format!(
            "infeasible design: boundary rejections alone reach probability {:.6} under the null, above alpha = {}",
            result.early_reject, spec.alpha
        )));
    }
    Ok(result)
}

/// A design with a given γ; calibration fields are left unknown.
fn with_gamma(spec: &TestSpec, gamma: f64) -> Result<DesignResult, CliError> {
    let procedure = Msprt::new(*spec, gamma)?;
    Ok(DesignResult {
        spec: *spec,
        boundaries: procedure.boundaries(),
        alternatives: procedure.parts.iter().map(|p| p.alternative).collect(),
        gamma,
        feasible: true,
        type1_est: f64::NAN,
        type1_se: f64::NAN,
        early_reject: f64::NAN,
        asn_null: f64::NAN,
        n_reps: 0,
        seed: 0,
        method: Method::MonteCarlo,
    })
}

fn design_or_given(spec: &TestSpec, gamma: Option<f64>, mc: &McArgs) -> Result<DesignResult, CliError> {
    match gamma {
        Some(g) => with_gamma(spec, g),
        None => calibrate(spec, mc),
    }
}

/// The fixed fields every design-based document carries.
fn base_document(d: &DesignResult) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("spec".into(), spec_json(&d.spec));
    m.insert("boundaries".into(), json!({"A": d.boundaries.a, "B": d.boundaries.b}));
    m.insert("gamma".into(), finite(d.gamma));
    m.insert("type1_est".into(), finite(d.type1_est));
    m.insert("asn_null".into(), finite(d.asn_null));
    m.insert("umpbt_alt".into(), umpbt_alt(&d.spec, &d.alternatives));
    m.insert("decision".into(), Value::Null);
    m.insert("n_used".into(), Value::Null);
    m.insert("trajectory_path".into(), Value::Null);
    m
}

pub fn design_cmd(args: &DesignArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(TestSpec::DEFAULT_ALPHA)?;
    let d = calibrate(&spec, &args.mc)?;
    let mut doc = base_document(&d);
    doc.insert("type1_se".into(), json!(d.type1_se));
    doc.insert("early_reject".into(), json!(d.early_reject));
    doc.insert(
        "alternatives".into(),
        serde_json::to_value(&d.alternatives).expect("alternatives serialize"),
    );
    doc.insert(
        "method".into(),
        serde_json::to_value(d.method).expect("method serializes"),
    );
    doc.insert("n_reps".into(), json!(d.n_reps));
    doc.insert("seed".into(), json!(d.seed));

    let mut table = Table::new(&[
        "test",
        "side",
        "null",
        "alpha",
        "beta",
        "n_max",
        "A",
        "B",
        "gamma",
        "type1_est",
        "type1_se",
        "asn_null",
        "early_reject",
    ]);
    table.push(vec![
        spec.family.to_string(),
        spec.side.to_string(),
        cell(spec.null),
        cell(spec.alpha),
        cell(spec.beta),
        spec.n_max.to_string(),
        cell(d.boundaries.a),
        cell(d.boundaries.b),
        cell(d.gamma),
        cell(d.type1_est),
        cell(d.type1_se),
        cell(d.asn_null),
        cell(d.early_reject),
    ]);
    Ok(Report {
        json: Value::Object(doc),
        table,
    })
}

pub fn oc_cmd(args: &OcArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(TestSpec::DEFAULT_ALPHA)?;
    let d = design_or_given(&spec, args.gamma, &args.mc)?;
    let opts = args.mc.options()?;
    let mut rows = Vec::new();
    let mut table = Table::new(&["theta", "power", "type2_est", "power_se", "asn", "asn_se", "early_stop"]);
    for &theta in &args.theta {
        let r = if args.mc.exact {
            if spec.family != Family::OneProp {
                return Err(CliError::usage("--exact applies to one-prop tests only"));
            }
            oc_exact_prop(&d, theta)?
        } else {
            oc(&d, theta, opts)?
        };
        rows.push(json!({
            "theta": r.theta,
            "power": r.power,
            "type2_est": r.type2_est,
            "power_se": r.power_se,
            "asn": r.asn,
            "asn_se": r.asn_se,
            "early_stop": r.early_stop,
        }));
        table.push(vec![
            cell(r.theta),
            cell(r.power),
            cell(r.type2_est),
            cell(r.power_se),
            cell(r.asn),
            cell(r.asn_se),
            cell(r.early_stop),
        ]);
    }
    let mut doc = base_document(&d);
    doc.insert("oc".into(), Value::Array(rows));
    if args.gamma.is_none() {
        doc.insert("n_reps".into(), json!(d.n_reps));
        doc.insert("seed".into(), json!(d.seed));
    }
    Ok(Report {
        json: Value::Object(doc),
        table,
    })
}

/// Observations read so far and the trial they drive.
struct Session<'a> {
    procedure: &'a Msprt,
    trial: Trial,
    parsed: Vec<Observation>,
    consumed: usize,
}

impl<'a> Session<'a> {
    fn new(procedure: &'a Msprt) -> Self {
        Session {
            procedure,
            trial: procedure.start(),
            parsed: Vec::new(),
            consumed: 0,
        }
    }

    /// Record an observation and score it unless a decision is already in.
    fn feed(&mut self, obs: Observation) -> Result<(), CliError> {
        self.parsed.push(obs);
        if !self.trial.is_terminal() {
            self.procedure
                .step(&mut self.trial, obs)
                .map_err(CliError::from_observation)?;
            self.consumed += 1;
        }
        Ok(())
    }
}

fn read_file(session: &mut Session, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::observations(format!("cannot read {}: {e}", path.display())))?;
    for obs in obsfile::parse(&text)? {
        session.feed(obs)?;
    }
    Ok(())
}

fn parse_line(line: &str, number: usize) -> Result<Option<Observation>, CliError> {
    match obsfile::parse(line) {
        Ok(mut v) => Ok(v.pop()),
        Err(seqprt::Error::Malformed { message, .. }) => Err(seqprt::Error::Malformed { line: number, message }.into()),
        Err(e) => Err(e.into()),
    }
}

/// Read observations line by line. On a terminal the user is prompted, a bad
/// line can be retyped, and reading stops at the decision; piped input is
/// read to the end exactly like a file.
fn read_interactive(session: &mut Session) -> Result<(), CliError> {
    let stdin = std::io::stdin();
    let tty = stdin.is_terminal();
    let mut stderr = std::io::stderr();
    let prompt = |session: &Session, stderr: &mut std::io::Stderr| {
        if tty {
            let _ = write!(stderr, "observation {}> ", session.parsed.len() + 1);
            let _ = stderr.flush();
        }
    };
    prompt(session, &mut stderr);
    for (i, line) in stdin.lock().lines().enumerate() {
        let line = line.map_err(|e| CliError::io(format!("cannot read standard input: {e}")))?;
        match parse_line(&line, i + 1) {
            Ok(Some(obs)) => {
                let was_terminal = session.trial.is_terminal();
                session.feed(obs)?;
                if tty && !was_terminal {
                    report_step(session, &mut stderr);
                }
            }
            Ok(None) => {}
            Err(e) if tty => {
                let _ = writeln!(stderr, "{e}; try again");
            }
            Err(e) => return Err(e),
        }
        if tty && session.trial.is_terminal() {
            break;
        }
        prompt(session, &mut stderr);
    }
    Ok(())
}

fn report_step(session: &Session, stderr: &mut std::io::Stderr) {
    let n = session.trial.n();
    let l = session.trial.trajectory().last().map(|p| p.lr());
    let status = match session.trial.decision.map(|d| d.kind) {
        Some(DecisionKind::RejectNull) => "reject",
        Some(DecisionKind::AcceptNull) => "accept",
        _ => "continue",
    };
    match l {
        Some(l) => {
            let _ = writeln!(stderr, "n = {n}, L = {l:.6}: {status}");
        }
        None => {
            let _ = writeln!(stderr, "n = {n}: {status}");
        }
    }
}

fn decision_word(kind: DecisionKind) -> &'static str {
    match kind {
        DecisionKind::RejectNull => "reject",
        DecisionKind::AcceptNull => "accept",
        DecisionKind::ContinueSampling => "continue",
    }
}

pub fn run_cmd(args: &RunArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(TestSpec::DEFAULT_ALPHA)?;
    let d = design_or_given(&spec, args.gamma, &args.mc)?;
    let procedure = d.procedure()?;
    let mut session = Session::new(&procedure);
    match &args.obs {
        Some(path) => read_file(&mut session, path)?,
        None => read_interactive(&mut session)?,
    }

    let trial = &session.trial;
    let series: Vec<Series> = trial
        .parts
        .iter()
        .map(|p| Series {
            label: (trial.parts.len() > 1).then(|| p.side.to_string()),
            points: p.state.trajectory.iter().map(|t| (t.n, t.lr())).collect(),
        })
        .collect();
    let plot = Plot {
        series,
        a: d.boundaries.a,
        b: d.boundaries.b,
        gamma: d.gamma,
        n_max: spec.n_max,
    };
    if let Some(path) = &args.plot {
        let is_svg = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"));
        let body = if is_svg { plot.svg() } else { plot.csv() };
        std::fs::write(path, body).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }

    let decision = trial.decision;
    let kind = decision.map_or(DecisionKind::ContinueSampling, |d| d.kind);
    let digest = Sha256::digest(obsfile::render(&session.parsed).as_bytes());
    let trajectory = |s: &Series| -> Value { s.points.iter().map(|&(n, l)| json!({"n": n, "L": finite(l)})).collect() };

    let mut doc = base_document(&d);
    doc.insert("decision".into(), json!(decision_word(kind)));
    doc.insert("n_used".into(), json!(trial.n()));
    doc.insert(
        "trajectory_path".into(),
        args.plot
            .as_ref()
            .map_or(Value::Null, |p| json!(p.display().to_string())),
    );
    doc.insert(
        "cause".into(),
        decision
            .and_then(|d| d.cause)
            .map_or(Value::Null, |c| serde_json::to_value(c).expect("causes serialize")),
    );
    if let Some(side) = decision.and_then(|d| d.side) {
        doc.insert("decided_by".into(), json!(side.to_string()));
    }
    if spec.family.is_two_sample() {
        doc.insert("n1_used".into(), json!(trial.n()));
        doc.insert("n2_used".into(), json!(trial.n()));
    }
    doc.insert(
        "observations".into(),
        json!({
            "parsed": session.parsed.len(),
            "consumed": session.consumed,
            "sha256": hex::encode(digest),
        }),
    );
    doc.insert("trajectory".into(), trajectory(&plot.series[0]));
    if let Some(left) = plot.series.get(1) {
        doc.insert("trajectory_left".into(), trajectory(left));
    }

    let mut table = Table::new(&["n", "L", "A", "B", "gamma"]);
    for &(n, l) in &plot.series[0].points {
        table.push(vec![
            n.to_string(),
            cell(l),
            cell(plot.a),
            cell(plot.b),
            cell(plot.gamma),
        ]);
    }
    Ok(Report {
        json: Value::Object(doc),
        table,
    })
}

pub fn umpbt_cmd(args: &UmpbtArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(TestSpec::DEFAULT_ALPHA)?;
    if args.sd.is_some_and(|s| !(s.is_finite() && s >= 0.0)) {
        return Err(CliError::usage("--sd must be a non-negative number"));
    }
    let mut table = Table::new(&["side", "kind", "theta", "weight", "delta"]);
    let mut alts = Vec::new();
    let mut details = Vec::new();
    for part in spec.one_sided_parts() {
        let alt = umpbt(&part)?;
        let side = part.side.to_string();
        let mut entry = serde_json::to_value(alt).expect("alternatives serialize");
        entry["side"] = json!(side);
        match alt {
            Alternative::Point { theta1, delta } => {
                table.push(vec![side, "point".into(), cell(theta1), "1".into(), cell(delta)]);
            }
            Alternative::DataDependentT { delta, .. } => {
                let theta = args.sd.and_then(|s| alt.theta_at(s));
                if let Some(theta) = theta {
                    entry["theta_at_sd"] = json!(theta);
                }
                table.push(vec![
                    side,
                    "data_dependent_t".into(),
                    theta.map_or_else(String::new, cell),
                    "1".into(),
                    cell(delta),
                ]);
            }
            Alternative::Mixture {
                near,
                far,
                psi,
                delta_near,
                delta_far,
            } => {
                table.push(vec![
                    side.clone(),
                    "near".into(),
                    cell(near),
                    cell(psi),
                    cell(delta_near),
                ]);
                table.push(vec![side, "far".into(), cell(far), cell(1.0 - psi), cell(delta_far)]);
            }
        }
        alts.push(alt);
        details.push(entry);
    }
    let json = json!({
        "spec": spec_json(&spec),
        "umpbt_alt": umpbt_alt(&spec, &alts),
        "alternatives": details,
    });
    Ok(Report { json, table })
}

pub fn effective_n_cmd(args: &HelperArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(TestSpec::DEFAULT_ALPHA)?;
    if spec.family != Family::OneProp {
        return Err(CliError::usage("effective-n applies to one-prop tests only"));
    }
    let eff = effective_n(spec.n_max, spec.null, spec.alpha, spec.side)?;
    let candidates = effective_n_candidates(spec.n_max, spec.null, spec.alpha, spec.side)?;
    let mut table = Table::new(&["n_max", "effective_n"]);
    table.push(vec![spec.n_max.to_string(), eff.to_string()]);
    Ok(Report {
        json: json!({"spec": spec_json(&spec), "effective_n": eff, "candidates": candidates}),
        table,
    })
}

pub fn find_alt_cmd(args: &HelperArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(TestSpec::DEFAULT_ALPHA)?;
    let theta = fixed_design_alt(&spec)?;
    let mut table = Table::new(&["theta_a"]);
    table.push(vec![cell(theta)]);
    Ok(Report {
        json: json!({"spec": spec_json(&spec), "theta_a": theta}),
        table,
    })
}

pub fn find_n_cmd(args: &FindNArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(FIXED_ALPHA)?;
    let n_star = find_n_star(&spec, args.target_alpha)?;
    let mut table = Table::new(&["n_fixed", "target_alpha", "n_star"]);
    table.push(vec![
        spec.n_max.to_string(),
        cell(args.target_alpha),
        n_star.to_string(),
    ]);
    Ok(Report {
        json: json!({"spec": spec_json(&spec), "target_alpha": args.target_alpha, "n_star": n_star}),
        table,
    })
}

pub fn cost_cmd(args: &CostArgs) -> Result<Report, CliError> {
    let spec = args.spec.to_spec(FIXED_ALPHA)?;
    if let Some(bad) = args.pi0.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::usage(format!("--pi0 values must lie in [0, 1], got {bad}")));
    }
    let opts: McOptions = args.mc.options()?;
    let curve = cost_curve(&spec, args.target_alpha, opts)?;
    let mut table = Table::new(&["pi0", "multiple"]);
    let multiples: Vec<Value> = args
        .pi0
        .iter()
        .map(|&p| {
            let m = curve.multiple(p);
            table.push(vec![cell(p), cell(m)]);
            json!({"pi0": p, "multiple": m})
        })
        .collect();
    Ok(Report {
        json: json!({
            "spec": spec_json(&spec),
            "target_alpha": args.target_alpha,
            "n_fixed": curve.n_fixed,
            "theta_star": curve.theta_star,
            "n_star": curve.n_star,
            "gamma": finite(curve.gamma),
            "asn_null": curve.asn_null,
            "asn_alt": curve.asn_alt,
            "multiples": multiples,
        }),
        table,
    })
}
