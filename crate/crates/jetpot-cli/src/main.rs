//! `jetpot`: operator and cone queries, canonical operators, Gårding
//! eigenvalues, counterexample scenarios and sampled checks.
//!
//! Exit codes: 0 success (failure scenarios succeed by exhibiting the
//! failure), 1 a check found a violation, 2 usage or precondition error,
//! 3 inconclusive.

mod parse;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetpot::canonical::{canonical_ray, dual_canonical_eval};
use jetpot::cones::{cone_dual_member, cone_interior, cone_member, polar_member, MonotonicityCone};
use jetpot::garding::{self, garding_eigs, GArg};
use jetpot::operators::{self, catalog, Params, NAMES};
use jetpot::report::{emit_report, fmt_g, to_json_string, Format};
use jetpot::sample;
use jetpot::subeq::{compatibility_check, monotonicity_check, tameness_check, ConstraintSet};
use jetpot::verify::{self, SCENARIOS};
use jetpot::{Error, Jet, Result, SymMatrix, Vector, VerificationReport};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "jetpot", version, about = "Nonlinear potential theory on 2-jets")]
struct Cli {
    /// RNG seed (default: $JETPOT_SEED, else 42)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON run configuration; see the README
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone, Default)]
struct OpParams {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    poly: Option<String>,
    /// h-profile: one | neg_r | affine_power
    #[arg(long)]
    h: Option<String>,
    /// gradient factor
    #[arg(long)]
    d: Option<String>,
    /// spatial operator for the parabolic entries
    #[arg(long)]
    g: Option<String>,
}

impl OpParams {
    fn params(&self, n: usize) -> Params {
        Params {
            n: Some(n),
            k: self.k,
            radius: self.radius,
            alpha: self.alpha,
            gamma: self.gamma,
            poly: self.poly.clone(),
            h: self.h.clone(),
            d: self.d.clone(),
            g: self.g.clone(),
            jet: None,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator catalog
    Ops {
        #[command(subcommand)]
        cmd: OpsCmd,
    },
    /// Cone membership queries
    Cone {
        #[arg(value_enum)]
        query: ConeQuery,
        /// P | NxP | gamma:<γ> | R:<R> | JSON
        #[arg(long)]
        cone: String,
        #[arg(long, allow_hyphen_values = true)]
        jet: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Canonical operator of a constraint set along J0
    Canonical {
        /// P | NxP | a catalog operator (its zero set)
        #[arg(long)]
        set: String,
        #[arg(long = "J0", allow_hyphen_values = true)]
        j0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        jet: String,
        /// Evaluate the dual operator −F(−J)
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        p: OpParams,
    },
    /// Gårding polynomials
    Garding {
        #[command(subcommand)]
        cmd: GardingCmd,
    },
    /// Counterexample scenarios (maximum principle and comparison failures)
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Sampled structural checks
    Check {
        #[command(subcommand)]
        cmd: CheckCmd,
    },
}

#[derive(Subcommand, Debug)]
enum OpsCmd {
    List,
    Show {
        name: String,
        #[command(flatten)]
        p: OpParams,
    },
    Eval {
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        jet: String,
        #[command(flatten)]
        p: OpParams,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ConeQuery {
    Member,
    Interior,
    Dual,
    Polar,
}

#[derive(Subcommand, Debug)]
enum GardingCmd {
    /// Gårding eigenvalues in increasing order
    Eigs {
        #[arg(long)]
        poly: String,
        #[arg(long = "A", allow_hyphen_values = true)]
        a: String,
        /// r-slot for lifted polynomials
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Strict monotonicity of every eigenvalue on the Gårding cone
    Monotone {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioCmd {
    List,
    /// Maximum principle failure on a ball of radius R′ > R
    ZmpFailure {
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long = "Rprime", default_value_t = 1.5)]
        r_prime: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// Two solutions with the same boundary data on a small ball
    SmallBallFailure {
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long = "R", default_value_t = 0.1)]
        r: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// default R/100
        #[arg(long)]
        h: Option<f64>,
    },
    /// The u⁺ subaffinity counterexample and its jet condition
    SubaffinePlus {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    /// F + M ⊂ F for the zero set of a catalog operator
    Monotonicity {
        #[arg(long)]
        op: String,
        /// defaults to the operator's claimed cone
        #[arg(long)]
        cone: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        p: OpParams,
    },
    /// Sampled compatibility of a constrained pair
    Compatibility {
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        p: OpParams,
    },
    /// Sampled tameness along the cone axis
    Tameness {
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        p: OpParams,
    },
    /// Dual of F±_{k,R} against the reflected and the printed index
    Duality {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long = "R")]
        r: f64,
        #[arg(long)]
        minus: bool,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

/// `--config` file: the command path plus its flags, and the global options.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: Vec<String>,
    #[serde(default)]
    args: BTreeMap<String, Value>,
    seed: Option<u64>,
    format: Option<String>,
    out: Option<PathBuf>,
}

enum Output {
    Report { report: VerificationReport, scenario: bool },
    Value(Value),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("jetpot: {e}");
            ExitCode::from(match e {
                Error::SearchFailure(_) => 3,
                _ => 2,
            })
        }
    }
}

fn load_config(path: &Path, cli: Cli) -> Result<Cli> {
    let text = std::fs::read_to_string(path)?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Precondition(format!("config {}: {e}", path.display())))?;
    let mut argv = vec!["jetpot".to_string()];
    argv.extend(cfg.command);
    for (k, v) in cfg.args {
        match v {
            Value::Bool(true) => argv.push(format!("--{k}")),
            Value::Bool(false) => {}
            Value::String(s) => argv.extend([format!("--{k}"), s]),
            other => argv.extend([format!("--{k}"), other.to_string()]),
        }
    }
    let mut parsed = Cli::try_parse_from(&argv).map_err(|e| Error::Precondition(format!("config {}: {}", path.display(), e.render())))?;
    parsed.seed = cli.seed.or(cfg.seed).or(parsed.seed);
    parsed.format = cli.format.or(cfg.format).or(parsed.format);
    parsed.out = cli.out.or(cfg.out).or(parsed.out);
    Ok(parsed)
}

fn run(cli: Cli) -> Result<u8> {
    let cli = match cli.config.clone() {
        Some(path) => {
            if cli.command.is_some() {
                return Err(Error::Precondition("--config replaces the subcommand; give one or the other".into()));
            }
            load_config(&path, cli)?
        }
        None => cli,
    };
    let format: Format = cli.format.as_deref().unwrap_or("json").parse()?;
    let seed = cli.seed.unwrap_or_else(sample::default_seed);
    let command = cli.command.ok_or_else(|| Error::Precondition("no subcommand given (try --help)".into()))?;
    let output = dispatch(command, seed)?;
    let (text, code) = match output {
        Output::Report { report, scenario } => {
            let code = if report.inconclusive {
                3
            } else if report.pass || scenario {
                0
            } else {
                1
            };
            (emit_report(&report, format, None)?, code)
        }
        Output::Value(mut v) => {
            if let Value::Object(m) = &mut v {
                m.insert("seed".into(), json!(seed));
            }
            let text = match format {
                Format::Json => to_json_string(&v),
                Format::Csv => value_csv(&v),
            };
            (text, 0)
        }
    };
    match &cli.out {
        Some(p) => std::fs::write(p, &text)?,
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe (`| head`) is not an error worth reporting
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(code)
}

fn dispatch(command: Command, seed: u64) -> Result<Output> {
    Ok(match command {
        Command::Ops { cmd } => Output::Value(ops(cmd)?),
        Command::Cone { query, cone, jet, n } => {
            let m = parse::cone(&cone)?;
            let j = parse::jet(&jet, n)?;
            m.validate(j.dim())?;
            let answer = match query {
                ConeQuery::Member => cone_member(&m, &j),
                ConeQuery::Interior => cone_interior(&m, &j),
                ConeQuery::Dual => cone_dual_member(&m, &j),
                ConeQuery::Polar => polar_member(&m, &j)?,
            };
            let margin = match query {
                ConeQuery::Member | ConeQuery::Interior => m.margin(&j),
                ConeQuery::Dual => m.dual_margin(&j),
                ConeQuery::Polar => m.polar_margin(&j)?,
            };
            Output::Value(json!({ "cone": m, "jet": j, "query": format!("{query:?}").to_lowercase(), "result": answer, "margin": margin }))
        }
        Command::Canonical { set, j0, jet, dual, tol, p } => {
            let j = parse::jet(&jet, p.n)?;
            let n = j.dim();
            if p.n.is_some_and(|m| m != n) {
                return Err(Error::Precondition(format!("--n {} disagrees with the jet dimension {n}", p.n.unwrap_or(0))));
            }
            let (s, default_axis) = named_set(&set, &p, n)?;
            let j0 = match j0 {
                Some(t) => parse::jet(&t, Some(n))?,
                None => default_axis.ok_or_else(|| Error::Precondition(format!("{set} has no default axis; pass --J0")))?,
            };
            if j0.dim() != n {
                return Err(Error::Precondition("J0 and the jet differ in dimension".into()));
            }
            let mut out = json!({ "set": set, "J0": j0, "jet": j, "dual": dual });
            if dual {
                out["value"] = json!(dual_canonical_eval(&s, &j0, &j, tol)?);
            } else {
                let sol = canonical_ray(&s, &j0, &j, tol)?;
                out["value"] = json!(-sol.t_j);
                out["t_J"] = json!(sol.t_j);
                out["iterations"] = json!(sol.iterations);
                out["residual"] = json!(sol.residual);
            }
            Output::Value(out)
        }
        Command::Garding { cmd } => match cmd {
            GardingCmd::Eigs { poly, a, r, n } => {
                let a = parse::matrix(&a, n)?;
                let g = garding::by_name(&poly, a.dim())?;
                let x = if g.is_lifted() { GArg::lifted(r, a) } else { GArg::pure(a) };
                let lam = garding_eigs(&g, &x)?;
                Output::Value(json!({ "poly": g.name(), "degree": g.degree(), "eigenvalues": lam, "value": g.eval(&x)? }))
            }
            GardingCmd::Monotone { poly, n, samples } => {
                let g = garding::by_name(&poly, n)?;
                Output::Report { report: garding::strict_monotone_check(&g, samples, seed), scenario: false }
            }
        },
        Command::Scenario { cmd } => scenario(cmd, seed)?,
        Command::Check { cmd } => Output::Report { report: check(cmd, seed)?, scenario: false },
    })
}

fn ops(cmd: OpsCmd) -> Result<Value> {
    Ok(match cmd {
        OpsCmd::List => {
            let rows: Vec<Value> = NAMES
                .iter()
                .map(|name| {
                    // a representative instance for the description
                    let p = Params { k: Some(1), radius: Some(1.0), alpha: Some(2.0), ..Params::n(2) };
                    let desc = catalog(name, &p).map(|s| s.description).unwrap_or_default();
                    json!({ "name": name, "description": desc })
                })
                .collect();
            json!({ "operators": rows })
        }
        OpsCmd::Show { name, p } => {
            let spec = catalog(&name, &p.params(p.n.unwrap_or(2)))?;
            let lv = operators::admissible_levels(&spec);
            let mut v = serde_json::to_value(spec.info()).map_err(|e| Error::Evaluation(e.to_string()))?;
            v["admissible_levels"] = json!([lv.lo, lv.hi]);
            v
        }
        OpsCmd::Eval { name, jet, p } => {
            let j = parse::jet(&jet, p.n)?;
            let spec = catalog(&name, &p.params(j.dim()))?;
            json!({ "name": name, "jet": j, "value": operators::eval(&spec, &j)? })
        }
    })
}

/// The constraint set behind `--set`, with its default canonical axis.
fn named_set(name: &str, p: &OpParams, n: usize) -> Result<(ConstraintSet, Option<Jet>)> {
    let axis = |r: f64| Some(Jet::from_parts(r, Vector::zeros(n), SymMatrix::identity(n)));
    match name {
        "P" => Ok((ConstraintSet::psd(n), axis(0.0))),
        "NxP" => Ok((
            ConstraintSet::new(n, "N x P", |j: &Jet| (-j.r).min(j.a.lambda_min())).with_cone(MonotonicityCone::m_np()),
            axis(-1.0),
        )),
        _ => {
            let spec = catalog(name, &p.params(n))?;
            let s = spec.zero_set()?;
            let j0 = spec.axis.clone().or_else(|| spec.claimed_cone.as_ref().map(|m| m.interior_axis(n)));
            Ok((s, j0))
        }
    }
}

fn scenario(cmd: ScenarioCmd, seed: u64) -> Result<Output> {
    let report = match cmd {
        ScenarioCmd::List => {
            let rows: Vec<Value> = SCENARIOS
                .iter()
                .map(|s| json!({ "name": s.name, "anchor": s.anchor, "params": s.params, "expected_verdict": s.expected_verdict }))
                .collect();
            return Ok(Output::Value(json!({ "scenarios": rows })));
        }
        ScenarioCmd::ZmpFailure { r, r_prime, n, h } => verify::scenario_zmp_failure(r, r_prime, n, h)?,
        ScenarioCmd::SmallBallFailure { alpha, r, n, h } => verify::scenario_small_ball_failure(alpha, r, n, h.unwrap_or(r / 100.0))?,
        ScenarioCmd::SubaffinePlus { samples } => verify::scenario_subaffine_plus(samples, seed),
    };
    let mut report = report;
    report.seed = seed;
    Ok(Output::Report { report, scenario: true })
}

fn check(cmd: CheckCmd, seed: u64) -> Result<VerificationReport> {
    let spec_for = |op: &str, p: &OpParams| catalog(op, &p.params(p.n.unwrap_or(2)));
    Ok(match cmd {
        CheckCmd::Monotonicity { op, cone, samples, p } => {
            let spec = spec_for(&op, &p)?;
            let m = match cone {
                Some(c) => parse::cone(&c)?,
                None => spec
                    .claimed_cone
                    .clone()
                    .ok_or_else(|| Error::Precondition(format!("{op} claims no cone; pass --cone")))?,
            };
            m.validate(spec.n())?;
            monotonicity_check(&spec.zero_set()?, &m, samples, seed, None)
        }
        CheckCmd::Compatibility { op, samples, p } => compatibility_check(&spec_for(&op, &p)?.pair, samples, seed)?,
        CheckCmd::Tameness { op, samples, p } => {
            let spec = spec_for(&op, &p)?;
            let j0 = spec
                .axis
                .clone()
                .or_else(|| spec.claimed_cone.as_ref().map(|m| m.interior_axis(spec.n())))
                .ok_or_else(|| Error::Precondition(format!("{op} has no axis")))?;
            tameness_check(&spec.pair, &j0, samples, seed)
        }
        CheckCmd::Duality { n, k, r, minus, samples } => operators::duality_relation_check(n, k, r, !minus, samples, seed)?,
    })
}

fn csv_cell(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::Number(x) => x.as_f64().map_or_else(|| x.to_string(), fmt_g),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// A single list-of-records field becomes a table; otherwise one row.
fn value_csv(v: &Value) -> String {
    let Value::Object(m) = v else { return format!("{}\n", csv_cell(v)) };
    let table = m.iter().find_map(|(_, x)| match x {
        Value::Array(rows) if !rows.is_empty() && rows.iter().all(Value::is_object) => Some(rows),
        _ => None,
    });
    let mut out = String::new();
    match table {
        Some(rows) => {
            let keys: Vec<&String> = rows[0].as_object().map(|o| o.keys().collect()).unwrap_or_default();
            out.push_str(&keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","));
            out.push('\n');
            for r in rows {
                let cells: Vec<String> = keys.iter().map(|k| csv_cell(&r[k.as_str()])).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        None => {
            out.push_str(&m.keys().cloned().collect::<Vec<_>>().join(","));
            out.push('\n');
            out.push_str(&m.values().map(csv_cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
    }
    out
}
