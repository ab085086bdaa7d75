//! `geomodel`: chase knowledge bases, build and check convex geometric
//! models, probe them with fresh points, and run the embedding limit
//! constructions.
//!
//! Exit codes: 0 success, 1 a rule, constraint or expectation is violated,
//! 2 usage or input error, 3 a step budget was exhausted.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use geomodel::chase::{chase, ChaseResult, Interpretation, DEFAULT_MAX_STEPS};
use geomodel::dump::{geometric_from_json, geometric_to_json, model_to_json};
use geomodel::geometry::{build_prop3_model, compact_datalog_model, GeometricInterpretation, Point, Polytope};
use geomodel::limits::{
    bilinear_rule_decision, falsify_bilinear, simple_composition_counterexample, translation_graph_properties,
    translation_subsumption_demo, BilinearDecision, BilinearRelation, SimplEComposition, SimplEOutcome, Triple,
};
use geomodel::rational::{parse_q, to_f64};
use geomodel::rule_check::{
    check_ontology, helly_break, probe_extension, random_helly_interpretation, HellyError, ProbeConfig, RuleVerdict,
    Sampler,
};
use geomodel::syntax::{
    is_weakly_acyclic, parse_program, quasi_chained_order, render_program, KnowledgeBase, DEFAULT_QC_CAP,
};

/// `println!` that stops quietly when stdout is closed, e.g. piped to `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "geomodel", version, about = "Convex geometric models of existential-rule knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print it in canonical form.
    Parse {
        file: PathBuf,
        /// Print a structural summary as JSON instead.
        #[arg(long)]
        json: bool,
    },
    /// Report, per rule and constraint, whether its body is quasi-chained.
    QcCheck {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the restricted chase and print the model as JSON.
    Chase {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Chase, then build the one-hot convex model of the result.
    Embed {
        file: PathBuf,
        /// Drop one coordinate per block (dimension m-1).
        #[arg(long)]
        compact: bool,
        /// Print coordinates as floats. The output cannot be reloaded exactly.
        #[arg(long)]
        float: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that the atoms a geometric interpretation satisfies over its
    /// entities are exactly the chase model.
    Verify {
        file: PathBuf,
        /// Geometric interpretation JSON; defaults to the one-hot model.
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Decide every rule and constraint over all points of the regions.
    CheckRules {
        file: PathBuf,
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long)]
        json: bool,
    },
    /// Add random fresh points and chase each extension.
    Probe {
        file: PathBuf,
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, value_enum, default_value_t = SamplerArg::Mixture)]
        sampler: SamplerArg,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random interpretation of the n-set Helly instance and a point in all
    /// of its regions.
    Helly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Integer coordinates are drawn from [-range, range].
        #[arg(long, default_value_t = 6)]
        range: i64,
        #[arg(long)]
        float: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Constructions showing what embedding models cannot express.
    #[command(subcommand)]
    Limits(LimitsCommand),
}

#[derive(Subcommand)]
enum LimitsCommand {
    /// Decide `R ⊑ S` for bilinear relations given as
    /// `{"r": {"m": [[..]], "lambda": ".."}, "s": {..}}`.
    Bilinear {
        file: PathBuf,
        /// Also search this many random float pairs for a violation.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Refute the SimplE composition rule for the given parameters.
    Simple { file: PathBuf },
    /// Show, for intervals H, W and M, why W + M ⊆ H and W ⊆ H + M force
    /// W ⊆ H under translations. Intervals are written `lo:hi`.
    Translation {
        #[arg(long)]
        husband: String,
        #[arg(long)]
        wife: String,
        #[arg(long)]
        married: String,
    },
    /// Graph properties every translation model satisfies, checked on a
    /// triple file with one `head relation tail` per line.
    GraphProps {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Mixture,
    Midpoint,
}

enum Failure {
    Violation(String),
    Usage(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Usage(m) | Failure::Resource(m) => m,
        }
    }
}

type Run = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, Failure> {
    parse_program(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Run {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn chase_model(kb: &KnowledgeBase, max_steps: usize) -> Result<Interpretation, Failure> {
    match chase(kb, max_steps).map_err(usage)? {
        ChaseResult::Model(m) => Ok(m),
        ChaseResult::Unsatisfiable { constraint, body, grounding } => Err(Failure::Violation(format!(
            "unsatisfiable: constraint {constraint} ({body}) matches {}",
            geomodel::chase::show_sub(&grounding)
        ))),
        ChaseResult::ResourceExceeded { steps } => Err(Failure::Resource(format!("chase exceeded {steps} steps"))),
    }
}

fn geometry(kb: &KnowledgeBase, path: Option<&Path>, max_steps: usize) -> Result<GeometricInterpretation, Failure> {
    match path {
        Some(p) => geometric_from_json(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => Ok(build_prop3_model(&chase_model(kb, max_steps)?, &kb.signature())),
    }
}

/// Rewrites rational strings as JSON numbers.
fn floats(v: Value) -> Value {
    match v {
        Value::String(s) => match parse_q(&s) {
            Some(x) => json!(to_f64(&x)),
            None => Value::String(s),
        },
        Value::Array(xs) => Value::Array(xs.into_iter().map(floats).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, floats(v))).collect()),
        other => other,
    }
}

fn geometric_text(eta: &GeometricInterpretation, float: bool) -> String {
    let text = geometric_to_json(eta);
    if float {
        pretty(&floats(serde_json::from_str(&text).expect("own output")))
    } else {
        text
    }
}

fn parse(file: &Path, as_json: bool) -> Run {
    let kb = load_kb(file)?;
    if !as_json {
        out!("{}", render_program(&kb).trim_end());
        return Ok(());
    }
    let summary = json!({
        "signature": kb.signature(),
        "rules": kb.ontology.rules.len(),
        "constraints": kb.ontology.constraints.len(),
        "facts": kb.database.len(),
        "datalog": kb.ontology.is_datalog(),
        "weakly_acyclic": is_weakly_acyclic(&kb.ontology),
    });
    out!("{}", pretty(&summary));
    Ok(())
}

fn qc_check(file: &Path, as_json: bool) -> Run {
    let kb = load_kb(file)?;
    let bodies = kb
        .ontology
        .rules
        .iter()
        .map(|r| ("rule", r.to_string(), &r.body))
        .chain(kb.ontology.constraints.iter().map(|c| ("constraint", c.to_string(), &c.body)));
    let mut rows = Vec::new();
    let mut all = true;
    for (kind, text, body) in bodies {
        let order = quasi_chained_order(body, DEFAULT_QC_CAP).map_err(usage)?;
        all &= order.is_some();
        rows.push(json!({ "kind": kind, "statement": text, "quasi_chained": order.is_some(), "order": order }));
    }
    if as_json {
        out!("{}", pretty(&json!({ "quasi_chained": all, "statements": rows })));
    } else {
        for r in &rows {
            let verdict = if r["quasi_chained"] == json!(true) { "quasi-chained" } else { "NOT quasi-chained" };
            out!("{} {}: {verdict}", r["kind"].as_str().unwrap(), r["statement"].as_str().unwrap());
        }
        out!("weakly acyclic: {}", is_weakly_acyclic(&kb.ontology));
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Violation("ontology is not quasi-chained".into()))
    }
}

fn verify(file: &Path, geometry_path: Option<&Path>, max_steps: usize) -> Run {
    let kb = load_kb(file)?;
    let model = chase_model(&kb, max_steps)?;
    let eta = geometry(&kb, geometry_path, max_steps)?;
    let phi = eta.phi_all();
    let expected: BTreeSet<_> = model.iter().cloned().collect();
    let same = phi == expected;
    out!("phi == M: {same}");
    if same {
        return Ok(());
    }
    for a in phi.difference(&expected) {
        out!("  extra: {a}");
    }
    for a in expected.difference(&phi) {
        out!("  missing: {a}");
    }
    Err(Failure::Violation("phi differs from the chase model".into()))
}

fn show_verdict(v: &RuleVerdict) -> String {
    match v {
        RuleVerdict::Satisfied => "satisfied".into(),
        RuleVerdict::Violated { witness } => {
            let parts: Vec<String> = witness.iter().map(|(x, p)| format!("{x} = {p}")).collect();
            format!("VIOLATED at {}", parts.join(", "))
        }
        RuleVerdict::Inconclusive { reason } => format!("inconclusive: {reason}"),
    }
}

fn check_rules(file: &Path, geometry_path: Option<&Path>, max_steps: usize, as_json: bool) -> Run {
    let kb = load_kb(file)?;
    let eta = geometry(&kb, geometry_path, max_steps)?;
    let verdicts = check_ontology(&eta, &kb.ontology);
    if as_json {
        out!("{}", pretty(&serde_json::to_value(&verdicts).expect("serializable")));
    } else {
        for (r, v) in kb.ontology.rules.iter().zip(&verdicts.rules) {
            out!("rule {r}: {}", show_verdict(v));
        }
        for (c, v) in kb.ontology.constraints.iter().zip(&verdicts.constraints) {
            out!("constraint {c}: {}", show_verdict(v));
        }
    }
    if verdicts.any_violated() {
        Err(Failure::Violation("some statement is violated".into()))
    } else if !verdicts.all_satisfied() {
        Err(Failure::Resource("some statement could not be decided".into()))
    } else {
        Ok(())
    }
}

fn probe(file: &Path, geometry_path: Option<&Path>, config: ProbeConfig, as_json: bool, output: Option<&Path>) -> Run {
    let kb = load_kb(file)?;
    let eta = geometry(&kb, geometry_path, config.max_steps)?;
    eprintln!("seed: {}", config.seed);
    let report = probe_extension(&eta, &kb, &config).map_err(usage)?;
    if as_json {
        emit(&pretty(&serde_json::to_value(&report).expect("serializable")), output)?;
    } else {
        let mut lines = vec![format!(
            "seed {}: {} trials of {} points, {} unsatisfiable",
            report.seed,
            report.trials,
            config.points,
            report.violation_count()
        )];
        for r in report.violations() {
            let pts: Vec<String> = r.points.iter().map(|(o, p)| format!("{o} = {p}")).collect();
            lines.push(format!(
                "  trial {}: {} with {}; violates {}",
                r.trial,
                pts.join(", "),
                r.witness_atoms.join(", "),
                r.violation.as_deref().unwrap_or("?")
            ));
        }
        emit(&lines.join("\n"), output)?;
    }
    if report.violation_count() > 0 {
        Err(Failure::Violation(format!("{} extensions are unsatisfiable", report.violation_count())))
    } else if !report.all_satisfiable() {
        Err(Failure::Resource("some trials did not finish".into()))
    } else {
        Ok(())
    }
}

fn helly(n: usize, dim: usize, seed: u64, range: i64, float: bool, output: Option<&Path>) -> Run {
    if dim == 0 || range <= 0 {
        return Err(usage("--dim and --range must be positive"));
    }
    eprintln!("seed: {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = random_helly_interpretation(n, dim, range, &mut rng);
    let (outcome, point, certificate) = match helly_break(&eta, n) {
        Ok(b) => {
            let cert = match &b.certificate {
                ChaseResult::Unsatisfiable { .. } => "unsatisfiable",
                ChaseResult::Model(_) => "satisfiable",
                ChaseResult::ResourceExceeded { .. } => "resource_exceeded",
            };
            (Ok(()), json!(b.point), json!(cert))
        }
        Err(HellyError::NoPointFound) => {
            let why = format!("no common point in dimension {dim} for n = {n}");
            (Err(Failure::Violation(why)), Value::Null, Value::Null)
        }
        Err(e) => return Err(usage(e)),
    };
    let doc = json!({
        "seed": seed,
        "n": n,
        "dim": dim,
        "interpretation": serde_json::from_str::<Value>(&geometric_to_json(&eta)).expect("own output"),
        "point": point,
        "certificate": certificate,
    });
    emit(&pretty(&if float { floats(doc) } else { doc }), output)?;
    outcome
}

fn interval(s: &str) -> Result<Polytope, Failure> {
    let bad = || usage(format!("interval {s:?} is not lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi) = (parse_q(lo).ok_or_else(bad)?, parse_q(hi).ok_or_else(bad)?);
    if lo > hi {
        return Err(bad());
    }
    Polytope::new(1, vec![Point::new(vec![lo]), Point::new(vec![hi])]).map_err(usage)
}

fn limits(cmd: LimitsCommand) -> Run {
    match cmd {
        LimitsCommand::Bilinear { file, samples, seed } => {
            let doc = load_json(&file)?;
            let rel = |k: &str| {
                serde_json::from_value::<BilinearRelation>(doc[k].clone()).map_err(|e| usage(format!("{k}: {e}")))
            };
            let (r, s) = (rel("r")?, rel("s")?);
            let decision = bilinear_rule_decision(&r, &s).map_err(usage)?;
            let mut out = serde_json::to_value(&decision).expect("serializable");
            if samples > 0 {
                eprintln!("seed: {seed}");
                let hit = falsify_bilinear(&r, &s, samples, seed)
                    .map(|(e, f)| json!({ "e": Point::new(e), "f": Point::new(f) }));
                out["sampled"] = json!({ "samples": samples, "seed": seed, "violation": hit });
            }
            out!("{}", pretty(&out));
            match decision {
                BilinearDecision::Counterexample { .. } => Err(Failure::Violation("R is not subsumed by S".into())),
                _ => Ok(()),
            }
        }
        LimitsCommand::Simple { file } => {
            let c: SimplEComposition = serde_json::from_value(load_json(&file)?).map_err(usage)?;
            let outcome = simple_composition_counterexample(&c).map_err(usage)?;
            let mut out = serde_json::to_value(&outcome).expect("serializable");
            if let SimplEOutcome::Counterexample(w) = &outcome {
                out["values"] = json!(c.values(w).iter().map(|x| x.to_string()).collect::<Vec<_>>());
            }
            out!("{}", pretty(&out));
            match outcome {
                SimplEOutcome::Counterexample(_) => Err(Failure::Violation("composition rule refuted".into())),
                SimplEOutcome::RuleTrivial { .. } => Ok(()),
            }
        }
        LimitsCommand::Translation { husband, wife, married } => {
            let (h, w, m) = (interval(&husband)?, interval(&wife)?, interval(&married)?);
            match translation_subsumption_demo(&h, &w, &m) {
                Ok(steps) => {
                    for s in &steps {
                        out!("{} = {} + {}; {} lies between {} and {}, both in H", s.q, s.p, s.r, s.q, s.p, s.q_plus_r);
                    }
                    out!("W ⊆ H");
                    Ok(())
                }
                Err(e) => Err(Failure::Violation(e.to_string())),
            }
        }
        LimitsCommand::GraphProps { file, subset } => {
            let mut graph: BTreeSet<Triple> = BTreeSet::new();
            for (i, line) in read(&file)?.lines().enumerate() {
                let fields: Vec<&str> = line.split_whitespace().collect();
                match fields[..] {
                    [] => {}
                    [x, r, y] => {
                        graph.insert((x.into(), r.into(), y.into()));
                    }
                    _ => return Err(usage(format!("line {}: expected `head relation tail`", i + 1))),
                }
            }
            let subset: BTreeSet<String> = subset.into_iter().collect();
            let violations = translation_graph_properties(&graph, &subset);
            out!("{}", pretty(&serde_json::to_value(&violations).expect("serializable")));
            if violations.is_empty() {
                Ok(())
            } else {
                Err(Failure::Violation(format!("{} properties fail", violations.len())))
            }
        }
    }
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Parse { file, json } => parse(&file, json),
        Command::QcCheck { file, json } => qc_check(&file, json),
        Command::Chase { file, max_steps, output } => {
            let kb = load_kb(&file)?;
            let model = chase_model(&kb, max_steps)?;
            emit(&model_to_json(&model), output.as_deref())
        }
        Command::Embed { file, compact, float, max_steps, output } => {
            let kb = load_kb(&file)?;
            let mut eta = build_prop3_model(&chase_model(&kb, max_steps)?, &kb.signature());
            if compact {
                eta = compact_datalog_model(&eta).map_err(usage)?;
            }
            emit(&geometric_text(&eta, float), output.as_deref())
        }
        Command::Verify { file, geometry, max_steps } => verify(&file, geometry.as_deref(), max_steps),
        Command::CheckRules { file, geometry, max_steps, json } => {
            check_rules(&file, geometry.as_deref(), max_steps, json)
        }
        Command::Probe { file, geometry, seed, trials, points, sampler, max_steps, json, output } => {
            let sampler = match sampler {
                SamplerArg::Mixture => Sampler::Mixture,
                SamplerArg::Midpoint => Sampler::Midpoint,
            };
            let config = ProbeConfig { points, trials, seed, sampler, max_steps, ..Default::default() };
            probe(&file, geometry.as_deref(), config, json, output.as_deref())
        }
        Command::Helly { n, dim, seed, range, float, output } => helly(n, dim, seed, range, float, output.as_deref()),
        Command::Limits(cmd) => limits(cmd),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("geomodel: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
