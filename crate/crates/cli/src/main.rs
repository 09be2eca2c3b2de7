use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use xformlens::report::{self, Format};
use xformlens::{
    analyze, check_chain, concrete_concepts, parse_metamodel, parse_transformation, plan_chain,
    AnalysisReport, ChainPlan, ConceptSet, Goal, Lint, Metamodel, Transformation,
};

const EXIT_ERROR: u8 = 1;
const EXIT_LINT: u8 = 2;
const EXIT_NO_PLAN: u8 = 3;

#[derive(Parser)]
#[command(name = "xformlens", version, about = "Static analysis of rule-based model transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ignored and referenced element tables plus a per-transformation summary.
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        /// markdown, html, latex or json.
        #[arg(long, default_value = "markdown")]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail with exit code 2 when a transformation references unknown concepts.
        #[arg(long)]
        strict: bool,
    },
    /// Positioned diagnostics for each transformation.
    Lint {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        strict: bool,
    },
    /// Runs a concept set through transformations in the given order.
    ChainCheck {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        goal: GoalArgs,
    },
    /// Searches the shortest chain from the library that reaches a goal.
    ChainPlan {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        goal: GoalArgs,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
}

#[derive(Args)]
struct Inputs {
    /// Metamodel (`.cmm`) of the transformations' source models.
    metamodel: PathBuf,
    /// Transformation files (`.tfm`).
    transformations: Vec<PathBuf>,
    /// Further metamodels, for transformations between metamodels.
    #[arg(long = "with-metamodel", value_name = "PATH")]
    with_metamodel: Vec<PathBuf>,
}

#[derive(Args)]
struct GoalArgs {
    /// `ALL` or a comma-separated list of concrete concepts.
    #[arg(long, default_value = "ALL")]
    initial: String,
    /// Concepts that must be present at the end.
    #[arg(long, default_value = "")]
    require: String,
    /// Concepts that must be absent at the end.
    #[arg(long, default_value = "")]
    forbid: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn error(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

struct Loaded {
    primary: Metamodel,
    metamodels: Vec<Metamodel>,
    transformations: Vec<Transformation>,
}

impl Loaded {
    fn metamodel(&self, name: &str) -> Option<&Metamodel> {
        std::iter::once(&self.primary)
            .chain(&self.metamodels)
            .find(|m| m.name() == name)
    }

    /// Analyzes every transformation, resolving its metamodels by name.
    fn analyze_all(&self) -> Result<Vec<AnalysisReport>, Failure> {
        self.transformations
            .par_iter()
            .map(|t| {
                let lookup = |name: &str| {
                    self.metamodel(name).ok_or_else(|| {
                        Failure::error(format!(
                            "{}: no metamodel named `{name}` was supplied",
                            t.origin.as_deref().unwrap_or(&t.name)
                        ))
                    })
                };
                let src = lookup(&t.source_metamodel)?;
                let tgt = lookup(&t.target_metamodel)?;
                analyze(t, src, tgt).map_err(|e| Failure::error(e.to_string()))
            })
            .collect()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::error(format!("{}: {e}", path.display())))
}

fn load_metamodel(path: &Path) -> Result<Metamodel, Failure> {
    parse_metamodel(&read(path)?).map_err(|e| Failure::error(format!("{}:{e}", path.display())))
}

/// Reads and parses every input before anything is printed.
fn load(inputs: &Inputs) -> Result<Loaded, Failure> {
    let primary = load_metamodel(&inputs.metamodel)?;
    let metamodels = inputs
        .with_metamodel
        .par_iter()
        .map(|p| load_metamodel(p))
        .collect::<Result<Vec<_>, _>>()?;
    let transformations = inputs
        .transformations
        .par_iter()
        .map(|p| {
            let origin = p.display().to_string();
            parse_transformation(&read(p)?)
                .map(|t| t.with_origin(origin.clone()))
                .map_err(|e| Failure::error(format!("{origin}:{e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Loaded {
        primary,
        metamodels,
        transformations,
    })
}

fn concept_list(text: &str, mm: &Metamodel, flag: &str) -> Result<ConceptSet, Failure> {
    let concrete = concrete_concepts(mm);
    if text.trim() == "ALL" {
        return Ok(concrete.into_iter().collect());
    }
    let mut set = ConceptSet::new();
    for name in text.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        if !concrete.iter().any(|c| c == name) {
            return Err(Failure::error(format!(
                "--{flag}: `{name}` is not a concrete concept of `{}`",
                mm.name()
            )));
        }
        set.insert(name);
    }
    Ok(set)
}

fn goal(args: &GoalArgs, mm: &Metamodel) -> Result<(ConceptSet, Goal), Failure> {
    Ok((
        concept_list(&args.initial, mm, "initial")?,
        Goal::new(
            concept_list(&args.require, mm, "require")?,
            concept_list(&args.forbid, mm, "forbid")?,
        ),
    ))
}

struct Painter {
    enabled: bool,
}

impl Painter {
    fn from_env() -> Self {
        Painter {
            enabled: std::env::var("XFORMLENS_COLOR").is_ok_and(|v| v == "1"),
        }
    }

    fn paint(&self, text: &str, code: &str) -> String {
        if self.enabled {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn lint(&self, l: &Lint) -> String {
        let kind = self.paint(l.kind.as_str(), if l.kind.is_error() { "1;31" } else { "33" });
        match &l.location {
            Some(loc) => format!("{loc}: {kind}: {}: {}", l.subject, l.message),
            None => format!("{kind}: {}: {}", l.subject, l.message),
        }
    }
}

fn has_errors(reports: &[AnalysisReport]) -> bool {
    reports
        .iter()
        .any(|r| r.diagnostics.iter().any(|d| d.kind.is_error()))
}

fn cmd_analyze(inputs: &Inputs, format: Format, out: Option<&Path>, strict: bool) -> Outcome {
    let loaded = load(inputs)?;
    let reports = loaded.analyze_all()?;
    if strict && has_errors(&reports) {
        let painter = Painter::from_env();
        for d in reports.iter().flat_map(|r| &r.diagnostics).filter(|d| d.kind.is_error()) {
            eprintln!("{}", painter.lint(d));
        }
        return Ok(EXIT_LINT);
    }
    let text = match format {
        Format::Json => report::reports_to_json(&reports),
        _ => report::render_document(
            &[
                report::ignored_table(&reports),
                report::referenced_table(&reports),
                report::summary_table(&reports),
            ],
            format,
        ),
    };
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::error(format!("{}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    Ok(0)
}

fn cmd_lint(inputs: &Inputs, strict: bool) -> Outcome {
    let loaded = load(inputs)?;
    let reports = loaded.analyze_all()?;
    let painter = Painter::from_env();
    let mut text = String::new();
    for d in reports.iter().flat_map(|r| &r.diagnostics) {
        text.push_str(&painter.lint(d));
        text.push('\n');
    }
    if text.is_empty() {
        text.push_str("no findings\n");
    }
    emit(&text)?;
    Ok(if strict && has_errors(&reports) { EXIT_LINT } else { 0 })
}

fn describe_plan(plan: &ChainPlan, order: &[String], with_goal: bool) -> String {
    let list = |s: &ConceptSet| format!("{{{}}}", s.in_order(order).join(", "));
    let mut text = format!("initial: {}\n", list(&plan.initial));
    for (i, step) in plan.steps.iter().enumerate() {
        let verdict = if step.valid {
            "VALID".to_string()
        } else {
            format!(
                "INVALID (outside refined domain: {})",
                step.outside_domain.in_order(order).join(", ")
            )
        };
        text.push_str(&format!("step {}: {}: {verdict}\n", i + 1, step.transformation));
        text.push_str(&format!("  out: {}\n", list(&step.output_set)));
        for w in &step.warnings {
            text.push_str(&format!("  warning: {w}\n"));
        }
    }
    text.push_str(&format!("final: {}\n", list(plan.final_set())));
    text.push_str(&format!(
        "chain: {}\n",
        if plan.all_valid() { "VALID" } else { "INVALID" }
    ));
    if with_goal {
        text.push_str(&format!("goal: {}\n", if plan.goal_met { "met" } else { "not met" }));
    }
    text
}

fn cmd_chain_check(inputs: &Inputs, args: &GoalArgs) -> Outcome {
    let loaded = load(inputs)?;
    let reports = loaded.analyze_all()?;
    let (initial, goal) = goal(args, &loaded.primary)?;
    let chain: Vec<&AnalysisReport> = reports.iter().collect();
    if let Some(first) = chain.first() {
        if first.source_mm != loaded.primary.name() {
            return Err(Failure::error(format!(
                "step 1 (`{}`) reads `{}` but the initial set is over `{}`",
                first.transformation,
                first.source_mm,
                loaded.primary.name()
            )));
        }
    }
    let plan = check_chain(&initial, &chain, &goal).map_err(|e| Failure::error(e.to_string()))?;
    let with_goal = !args.require.trim().is_empty() || !args.forbid.trim().is_empty();
    emit(&describe_plan(&plan, &concept_order(&loaded), with_goal))?;
    Ok(0)
}

fn cmd_chain_plan(inputs: &Inputs, args: &GoalArgs, max_len: usize) -> Outcome {
    let loaded = load(inputs)?;
    let reports = loaded.analyze_all()?;
    let (initial, goal) = goal(args, &loaded.primary)?;
    let mm = loaded.primary.name();
    if let Some(r) = reports.iter().find(|r| r.source_mm != mm || r.target_mm != mm) {
        return Err(Failure::error(format!(
            "`{}` maps `{}` to `{}`; the library must be endogenous over `{mm}`",
            r.transformation, r.source_mm, r.target_mm
        )));
    }
    match plan_chain(&reports, &initial, &goal, max_len) {
        Some(plan) => {
            let names = if plan.is_empty() {
                "(no transformation needed)".to_string()
            } else {
                plan.names().join(" -> ")
            };
            let unit = if plan.len() == 1 { "step" } else { "steps" };
            let mut text = format!("plan ({} {unit}): {names}\n", plan.len());
            text.push_str(&describe_plan(&plan, &concept_order(&loaded), true));
            emit(&text)?;
            Ok(0)
        }
        None => {
            emit("no plan\n")?;
            Ok(EXIT_NO_PLAN)
        }
    }
}

/// Declaration order across every loaded metamodel, for listing sets.
fn concept_order(loaded: &Loaded) -> Vec<String> {
    std::iter::once(&loaded.primary)
        .chain(&loaded.metamodels)
        .flat_map(concrete_concepts)
        .collect()
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::error(format!("standard output: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze {
            inputs,
            format,
            out,
            strict,
        } => cmd_analyze(inputs, *format, out.as_deref(), *strict),
        Command::Lint { inputs, strict } => cmd_lint(inputs, *strict),
        Command::ChainCheck { inputs, goal } => cmd_chain_check(inputs, goal),
        Command::ChainPlan {
            inputs,
            goal,
            max_len,
        } => cmd_chain_plan(inputs, goal, *max_len),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}: {}", Painter::from_env().paint("error", "1;31"), f.message);
            ExitCode::from(f.code)
        }
    }
}
