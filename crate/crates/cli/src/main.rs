use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use kitaoka::cone;
use kitaoka::criteria::{self, Budgets, ConditionStatus, Verdict};
use kitaoka::lattice::{self, Coverage, GramForm, Universality, Witness};
use kitaoka::units::{self, UnitGroup, UnitSource};
use kitaoka::{Catalog, Elem, Error, Field};
use kitaoka_cli::{BudgetReport, Report, Timing, SCHEMA_VERSION};
use serde_json::{json, Value};

const DESCENT_MAX_ITER: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "kitaoka", version, about = "Universal quadratic forms over totally real fields")]
struct Cli {
    /// Extra field catalog (JSON); entries override built-in ids.
    #[arg(long, global = true, env = "KITAOKA_CATALOG")]
    catalog: Option<PathBuf>,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(flatten)]
    budgets: BudgetArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long, global = true, default_value_t = 20)]
    trace_bound: i64,
    /// Node limit for each lattice enumeration.
    #[arg(long, global = true, default_value_t = kitaoka::enumerate::DEFAULT_NODE_LIMIT)]
    budget_nodes: u64,
    #[arg(long, global = true, default_value_t = 6)]
    max_squares: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field catalog queries.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Unit generators, signatures and totally positive units mod squares.
    Units { id: String },
    /// Indecomposable elements up to the trace bound.
    Indec { id: String },
    /// Decide whether a form represents an element.
    Represent {
        id: String,
        #[arg(long)]
        form: String,
        #[arg(long)]
        target: String,
    },
    /// Check that a form represents every element up to the trace bound.
    Universal {
        id: String,
        #[arg(long)]
        form: String,
    },
    /// Check <1,1,2,2> on 2*alpha, or <1,1,l,l> on l*alpha with --lambda.
    Coverage {
        id: String,
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Least number of squares for 2*alpha up to the trace bound.
    Squares { id: String },
    /// Square-root descent starting from 2.
    Descent { id: String },
    /// Necessary conditions for fields with one nonsquare totally positive unit class.
    Profile { id: String },
    /// Run the obstruction rules and report a verdict.
    Obstruct { id: String },
}

#[derive(Subcommand, Debug)]
enum FieldCommand {
    /// Show a field's invariants.
    Show { id: String },
    /// List catalog ids.
    List,
}

/// How a successful computation maps to the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Success,
    Inconclusive,
    Negative,
}

impl Outcome {
    fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Inconclusive => 2,
            Outcome::Negative => 3,
        }
    }
}

struct Run {
    field_id: Option<String>,
    result: Value,
    outcome: Outcome,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let budgets = Budgets {
        trace_bound: cli.budgets.trace_bound,
        node_limit: cli.budgets.budget_nodes,
        max_squares: cli.budgets.max_squares,
    };
    let start = Instant::now();
    let run = load_catalog(&cli).and_then(|cat| dispatch(&cat, &cli.command, &budgets));
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    match run {
        Ok(run) => {
            let report = Report {
                schema_version: SCHEMA_VERSION.into(),
                command: argv,
                field_id: run.field_id,
                result: run.result,
                timing: Timing { elapsed_ms },
                budgets: BudgetReport {
                    trace_bound: budgets.trace_bound,
                    node_limit: budgets.node_limit,
                    max_squares: budgets.max_squares,
                },
            };
            if cli.json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")));
            } else {
                print_text(&report);
            }
            ExitCode::from(run.outcome.exit_code())
        }
        Err(e) => {
            if cli.json {
                let v = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": argv,
                    "error": { "code": e.code(), "message": e.to_string() },
                });
                emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("error serializes")));
            } else {
                eprintln!("error[{}]: {e}", e.code());
            }
            ExitCode::from(1)
        }
    }
}

fn load_catalog(cli: &Cli) -> kitaoka::Result<Catalog> {
    let mut cat = Catalog::builtin();
    if let Some(p) = &cli.catalog {
        cat.extend(Catalog::from_path(p)?);
    }
    Ok(cat)
}

fn dispatch(cat: &Catalog, cmd: &Command, b: &Budgets) -> kitaoka::Result<Run> {
    match cmd {
        Command::Field(FieldCommand::List) => Ok(Run {
            field_id: None,
            result: json!({ "fields": cat.ids().collect::<Vec<_>>() }),
            outcome: Outcome::Success,
        }),
        Command::Field(FieldCommand::Show { id }) => with_field(cat, id, field_show),
        Command::Units { id } => with_field(cat, id, units_cmd),
        Command::Indec { id } => with_field(cat, id, |f| indec(f, b)),
        Command::Represent { id, form, target } => {
            with_field(cat, id, |f| represent(f, form, target, b))
        }
        Command::Universal { id, form } => with_field(cat, id, |f| universal(f, form, b)),
        Command::Coverage { id, lambda } => {
            with_field(cat, id, |f| coverage(f, lambda.as_deref(), b))
        }
        Command::Squares { id } => with_field(cat, id, |f| squares(f, b)),
        Command::Descent { id } => with_field(cat, id, descent),
        Command::Profile { id } => with_field(cat, id, |f| profile(f, b)),
        Command::Obstruct { id } => with_field(cat, id, |f| obstruct(f, b)),
    }
}

fn with_field(
    cat: &Catalog,
    id: &str,
    body: impl FnOnce(&Field) -> kitaoka::Result<(Value, Outcome)>,
) -> kitaoka::Result<Run> {
    let f = cat.load(id)?;
    match body(&f) {
        Ok((result, outcome)) => Ok(Run { field_id: Some(id.to_string()), result, outcome }),
        // Running out of budget leaves the question open rather than failing.
        Err(e @ Error::BudgetExceeded { .. }) => Ok(Run {
            field_id: Some(id.to_string()),
            result: json!({ "outcome": e.code(), "message": e.to_string() }),
            outcome: Outcome::Inconclusive,
        }),
        Err(e) => Err(e),
    }
}

fn fmt(f: &Field, a: &Elem) -> Value {
    Value::String(f.format_elem(a))
}

fn fmt_opt(f: &Field, a: Option<&Elem>) -> Value {
    a.map_or(Value::Null, |x| fmt(f, x))
}

fn witness(f: &Field, w: &Witness) -> Value {
    Value::Array(w.coords.iter().map(|c| fmt(f, c)).collect())
}

fn field_show(f: &Field) -> kitaoka::Result<(Value, Outcome)> {
    let basis: Vec<Value> = (0..f.degree()).map(|k| fmt(f, &f.basis_elem(k))).collect();
    let mut roots = serde_json::Map::new();
    for n in [2, 3, 5, 6] {
        roots.insert(format!("sqrt{n}"), fmt_opt(f, f.contains_sqrt(n)?.as_ref()));
    }
    let poly: Vec<String> = f.spec().poly.iter().map(|c| c.to_string()).collect();
    Ok((
        json!({
            "degree": f.degree(),
            "poly": poly,
            "integral_basis": basis,
            "disc": f.disc().to_string(),
            "two_ramified": f.two_is_ramified(),
            "known_positive": f.known_positive(),
            "square_roots": roots,
        }),
        Outcome::Success,
    ))
}

fn units_cmd(f: &Field) -> kitaoka::Result<(Value, Outcome)> {
    let u = UnitGroup::for_field(f)?;
    let sub = units::signature_subgroup(f, &u);
    let data = units::tp_units_mod_squares(f, &u)?;
    let gens: Vec<Value> = u
        .with_torsion(f)
        .iter()
        .map(|g| Ok(json!({ "unit": fmt(f, g), "signature": units::signature(f, g)?.0 })))
        .collect::<kitaoka::Result<_>>()?;
    let source = match u.source {
        UnitSource::Computed => "computed",
        UnitSource::Catalog => "catalog",
    };
    Ok((
        json!({
            "source": source,
            "generators": gens,
            "signature_rank": sub.rank,
            "k": data.k,
            "epsilon": fmt_opt(f, data.epsilon.as_ref()),
        }),
        Outcome::Success,
    ))
}

fn indec(f: &Field, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let list = cone::indecomposables_up_to(f, b.trace_bound, b.node_limit)?;
    let items: Vec<Value> = list
        .iter()
        .map(|a| json!({ "elem": fmt(f, a), "trace": f.trace(a), "norm": f.norm(a).to_string() }))
        .collect();
    Ok((json!({ "count": items.len(), "indecomposables": items }), Outcome::Success))
}

fn represent(f: &Field, form: &str, target: &str, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let form = GramForm::parse(f, form)?;
    let alpha = f.parse_elem(target)?;
    let found = lattice::represents(f, &form, &alpha, b.node_limit)?;
    let outcome = if found.is_some() { Outcome::Success } else { Outcome::Negative };
    Ok((
        json!({
            "form": form.format(f),
            "target": fmt(f, &alpha),
            "represented": found.is_some(),
            "witness": found.as_ref().map_or(Value::Null, |w| witness(f, w)),
        }),
        outcome,
    ))
}

fn universal(f: &Field, form: &str, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let form = GramForm::parse(f, form)?;
    let res = lattice::is_universal_up_to(f, &form, b.trace_bound, b.node_limit)?;
    Ok(match res {
        Universality::AllRepresented { checked } => (
            json!({ "form": form.format(f), "outcome": "AllRepresented", "checked": checked }),
            Outcome::Success,
        ),
        Universality::Counterexample(a) => (
            json!({ "form": form.format(f), "outcome": "Counterexample", "counterexample": fmt(f, &a) }),
            Outcome::Negative,
        ),
    })
}

fn coverage(f: &Field, lambda: Option<&str>, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let (form, res) = match lambda {
        None => ("<1,1,2,2>".to_string(), lattice::check_1122_coverage(f, b.trace_bound, b.node_limit)?),
        Some(l) => {
            let l = f.parse_elem(l)?;
            let s = f.format_elem(&l);
            let res = lattice::check_lambda_coverage(f, &l, b.trace_bound, b.node_limit)?;
            (format!("<1,1,{s},{s}>"), res)
        }
    };
    Ok(match res {
        Coverage::AllCovered { checked } => (
            json!({ "form": form, "outcome": "AllCovered", "checked": checked }),
            Outcome::Success,
        ),
        Coverage::Counterexample(a) => (
            json!({ "form": form, "outcome": "Counterexample", "counterexample": fmt(f, &a) }),
            Outcome::Negative,
        ),
    })
}

fn squares(f: &Field, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let rep = criteria::check_sum_of_squares_2ok(f, b.trace_bound, b.max_squares, b.node_limit)?;
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "alpha": fmt(f, &e.alpha),
                "min_squares": e.min_squares,
                "witness": e.witness.as_ref().map_or(Value::Null, |w| witness(f, w)),
                "budget_limited": e.budget_limited,
            })
        })
        .collect();
    let outcome = if rep.all_succeeded() { Outcome::Success } else { Outcome::Inconclusive };
    Ok((json!({ "all_succeeded": rep.all_succeeded(), "entries": entries }), outcome))
}

fn descent(f: &Field) -> kitaoka::Result<(Value, Outcome)> {
    let u = UnitGroup::for_field(f)?;
    let data = units::tp_units_mod_squares(f, &u)?;
    let tr = units::descent_run(f, &data, &u, DESCENT_MAX_ITER)?;
    let steps: Vec<Value> = tr
        .steps
        .iter()
        .map(|s| {
            json!({
                "alpha": fmt(f, &s.alpha),
                "root": fmt(f, &s.root),
                "used_epsilon": s.used_epsilon,
                "root_norm": s.root_norm.to_string(),
                "class": s.class,
                "eta": fmt_opt(f, s.eta.as_ref()),
            })
        })
        .collect();
    Ok((json!({ "steps": steps, "beta": fmt(f, &tr.beta), "j": tr.j }), Outcome::Success))
}

fn profile(f: &Field, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let p = criteria::theorem31_profile(f, b)?;
    let failed = p.conditions.iter().any(|c| c.status == ConditionStatus::Fail);
    let outcome = if failed { Outcome::Negative } else { Outcome::Success };
    Ok((serde_json::to_value(&p).expect("profile serializes"), outcome))
}

fn obstruct(f: &Field, b: &Budgets) -> kitaoka::Result<(Value, Outcome)> {
    let r = criteria::obstruct(f, b)?;
    let outcome = match r.verdict {
        Verdict::NoUniversalTernary => Outcome::Negative,
        Verdict::Inconclusive => Outcome::Inconclusive,
        Verdict::KnownPositive => Outcome::Success,
    };
    let fired: Vec<&str> = r.fired().map(|x| x.rule_id.as_str()).collect();
    Ok((
        json!({ "verdict": r.verdict, "fired": fired, "rules": r.rules }),
        outcome,
    ))
}

fn print_text(r: &Report) {
    let mut lines = Vec::new();
    let name = r.command.first().map_or("", String::as_str);
    match &r.field_id {
        Some(id) => lines.push(format!("{name} [{id}]")),
        None => lines.push(name.to_string()),
    }
    if let Value::Object(map) = &r.result {
        for (k, v) in map {
            match v {
                Value::Array(items) if items.iter().any(Value::is_object) => {
                    lines.push(format!("{k}:"));
                    lines.extend(items.iter().map(|it| format!("  {it}")));
                }
                Value::String(s) => lines.push(format!("{k}: {s}")),
                other => lines.push(format!("{k}: {other}")),
            }
        }
    }
    lines.push(String::new());
    emit(&lines.join("\n"));
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}
