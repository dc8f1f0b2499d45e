use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cpspheres::arena;
use cpspheres::eval::{self, Variant};
use cpspheres::fixtures;
use cpspheres::formula::{parse, parse_cp_set, Formula};
use cpspheres::model::{load_model, Centering, SphereModel, World};
use cpspheres::search::{self, AxiomSystem, EnumerationBounds, SweepReport};
use cpspheres::translate;
use cpspheres::update::{update, update_trace, UpdateTag};
use cpspheres::weights::{cmp_xel, weight_of_formula, weight_of_set};

const VERDICT_MANIFEST: &str = include_str!("../fixtures/verdicts.tsv");

#[derive(Parser)]
#[command(
    name = "cpspheres",
    version,
    about = "Model checking for ceteris paribus counterfactuals over sphere models"
)]
struct Cli {
    /// Output style for report-producing subcommands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonlines,
}

#[derive(Args)]
struct ModelAt {
    /// Path to a sphere-model file.
    #[arg(long)]
    model: String,
    /// World of evaluation, by name.
    #[arg(long)]
    world: String,
    /// Update tag: i, a or d.
    #[arg(long, default_value = "d")]
    update: char,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a formula; the exit code encodes the verdict.
    Eval {
        #[command(flatten)]
        at: ModelAt,
        #[arg(long)]
        formula: String,
        /// Where non-empty cp-sets read their operands: a (pre-update),
        /// b (updated model, default) or c (update every system).
        #[arg(long, default_value = "b")]
        variant: char,
        /// Print the evaluation step tree.
        #[arg(long)]
        trace: bool,
    },
    /// Print formula weights and the induced plausibility chain.
    Weights {
        #[command(flatten)]
        at: ModelAt,
        /// Formulas to weigh; repeatable.
        #[arg(long, required = true)]
        formula: Vec<String>,
    },
    /// Dump per-world forcing/agreement/disagreement sets and weights.
    Profile {
        #[command(flatten)]
        at: ModelAt,
        /// Comma-separated cp-set.
        #[arg(long)]
        set: String,
    },
    /// Print the updated sphere chain in model-file syntax.
    UpdateDump {
        #[command(flatten)]
        at: ModelAt,
        #[arg(long)]
        set: String,
        /// Also print the ranking table behind the chain.
        #[arg(long)]
        trace: bool,
    },
    /// Rewrite a formula into the static fragment, relative to the model.
    Translate {
        #[command(flatten)]
        at: ModelAt,
        #[arg(long)]
        formula: String,
    },
    /// Exhaustive sweeps over all models within bounds.
    Sweep {
        #[arg(long, default_value_t = 2)]
        max_worlds: usize,
        /// Comma-separated atom names.
        #[arg(long, default_value = "p,q")]
        atoms: String,
        #[arg(long, value_enum, default_value_t = CenteringArg::Centered)]
        centering: CenteringArg,
        /// Update tag for the axiom suite.
        #[arg(long, default_value = "d")]
        update: char,
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Print the CP | NC | MS | DIS comparison table for counterfactuals.
    Compare {
        #[command(flatten)]
        at: ModelAt,
        /// Counterfactual rows; repeatable.
        #[arg(long, required = true)]
        row: Vec<String>,
    },
    /// Run the expected-verdict regression manifest.
    Fixtures,
}

#[derive(Clone, Copy, ValueEnum)]
enum CenteringArg {
    Centered,
    Weak,
}

impl From<CenteringArg> for Centering {
    fn from(c: CenteringArg) -> Centering {
        match c {
            CenteringArg::Centered => Centering::Centered,
            CenteringArg::Weak => Centering::Weak,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Axioms,
    Theorems,
    Variants,
    Translation,
    Interdefinability,
    Preservation,
}

/// Usage problems exit 2 (clap's own convention); violations and
/// evaluation-layer failures exit 3; a false eval verdict exits 1.
enum Failure {
    Usage(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Internal(_) => ExitCode::from(3),
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Internal(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn internal<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Internal(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn load(at: &ModelAt) -> Result<(SphereModel, World, UpdateTag), Failure> {
    let source = fs::read_to_string(&at.model)
        .map_err(|e| usage(format!("cannot read {}: {e}", at.model)))?;
    let m = load_model(&source).map_err(usage)?;
    let x = m
        .world_named(&at.world)
        .ok_or_else(|| usage(format!("unknown world `{}`", at.world)))?;
    let u = UpdateTag::from_letter(at.update)
        .ok_or_else(|| usage(format!("unknown update tag `{}`; use i, a or d", at.update)))?;
    Ok((m, x, u))
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.cmd {
        Cmd::Eval { at, formula, variant, trace } => {
            let (m, x, u) = load(at)?;
            let f = parse(formula).map_err(usage)?;
            let variant = match variant {
                'a' => Variant::A,
                'b' => Variant::B,
                'c' => Variant::C,
                other => return Err(usage(format!("unknown variant `{other}`; use a, b or c"))),
            };
            let verdict = if *trace && variant == Variant::B {
                let (v, steps) = eval::sat_traced(&m, x, &f, u).map_err(internal)?;
                print!("{steps}");
                v
            } else {
                eval::sat_variant(&m, x, &f, u, variant).map_err(internal)?
            };
            match cli.format {
                Format::Text => println!("{verdict}"),
                Format::Jsonlines => println!(
                    "{}",
                    json!({
                        "model": at.model,
                        "world": at.world,
                        "formula": formula,
                        "update": u.letter().to_string(),
                        "actual": verdict,
                    })
                ),
            }
            Ok(if verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Weights { at, formula } => {
            let (m, x, u) = load(at)?;
            let mut weighed = Vec::new();
            for src in formula {
                let f = parse(src).map_err(usage)?;
                let w = weight_of_formula(&m, x, &f, u).map_err(internal)?;
                weighed.push((f, w));
            }
            for (f, w) in &weighed {
                println!("w_{}({f}) = {w}", m.name(x));
            }
            // The induced total chain, lightest first.
            weighed.sort_by(|(_, wa), (_, wb)| cmp_xel(wa, wb));
            let mut chain = String::new();
            for (i, (f, w)) in weighed.iter().enumerate() {
                if i > 0 {
                    let prev = &weighed[i - 1].1;
                    chain.push_str(if cmp_xel(prev, w) == std::cmp::Ordering::Equal {
                        " ~ "
                    } else {
                        " < "
                    });
                }
                chain.push_str(&f.to_string());
            }
            println!("chain: {chain}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Profile { at, set } => {
            let (m, x, u) = load(at)?;
            let g = parse_cp_set(set).map_err(usage)?;
            for y in m.system(x).universe().iter() {
                let p = cpspheres::cpsets::profile(&m, x, y, &g, u).map_err(internal)?;
                let wa = weight_of_set(&m, x, &p.agreement, u).map_err(internal)?;
                let wd = weight_of_set(&m, x, &p.disagreement, u).map_err(internal)?;
                println!(
                    "{}: forcing [{}] agreement [{}] w={} disagreement [{}] w={}",
                    m.name(y),
                    p.forcing,
                    p.agreement,
                    wa,
                    p.disagreement,
                    wd
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::UpdateDump { at, set, trace } => {
            let (m, x, u) = load(at)?;
            let g = parse_cp_set(set).map_err(usage)?;
            if *trace {
                for row in update_trace(&m, x, &g, u).map_err(internal)? {
                    println!(
                        "rank {}: {} set [{}] weight {} origrank {} -> sphere {}",
                        u.letter(),
                        m.name(row.world),
                        row.set,
                        row.key.setweight,
                        row.key.origrank,
                        row.level
                    );
                }
            }
            let updated = update(&m, x, &g, u).map_err(internal)?;
            let spheres: Vec<String> = updated.system(x).spheres.iter().map(|&s| updated.format_worlds(s)).collect();
            println!("spheres {}: {}", m.name(x), spheres.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Translate { at, formula } => {
            let (m, x, u) = load(at)?;
            translate::check_tag_supported(&m, u).map_err(usage)?;
            let f = parse(formula).map_err(usage)?;
            println!(
                "note: the rewrite is model-relative; it is built from the \
                 weight orderings of ({}, {}) and certified there only",
                at.model,
                m.name(x)
            );
            let starred = translate::star(&m, x, &f).map_err(internal)?;
            println!("{starred}");
            let before = eval::sat(&m, x, &f, UpdateTag::Disagreement).map_err(internal)?;
            let after = eval::sat(&m, x, &starred, UpdateTag::Disagreement).map_err(internal)?;
            println!(
                "certificate: original {before}, rewritten {after} at ({}, {})",
                at.model,
                m.name(x)
            );
            if before != after {
                return Err(internal("rewrite changed the verdict"));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { max_worlds, atoms, centering, update, suite } => {
            let atoms: Vec<&str> = atoms.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if atoms.is_empty() {
                return Err(usage("at least one atom is required"));
            }
            let bounds = EnumerationBounds::new(*max_worlds, &atoms, (*centering).into());
            let u = UpdateTag::from_letter(*update)
                .ok_or_else(|| usage(format!("unknown update tag `{update}`")))?;
            let report = match suite {
                Suite::Axioms => {
                    let system = match bounds.centering {
                        Centering::Centered => AxiomSystem::VC,
                        Centering::Weak => AxiomSystem::VW,
                    };
                    let instances = search::axiom_instances(system, &atoms);
                    search::check_axioms(&bounds, system, u, &instances).map_err(internal)?
                }
                Suite::Theorems => search::theorem_sweep(&bounds).map_err(internal)?,
                Suite::Translation => search::translation_sweep(&bounds).map_err(internal)?,
                Suite::Interdefinability => {
                    search::interdefinability_sweep(&bounds).map_err(internal)?
                }
                Suite::Preservation => search::preservation_sweep(&bounds).map_err(internal)?,
                Suite::Variants => {
                    match search::find_variant_divergence(&bounds).map_err(internal)? {
                        Some((m, x, f)) => {
                            println!(
                                "variant divergence witness at world {} for {f} in:\n{}",
                                m.name(x),
                                cpspheres::model::save_model(&m)
                            );
                        }
                        None => println!("no variant divergence found within bounds"),
                    }
                    return Ok(ExitCode::SUCCESS);
                }
            };
            print_report(cli.format, &report, u);
            Ok(if report.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Cmd::Compare { at, row } => {
            let (m, x, _) = load(at)?;
            let mut rows = Vec::new();
            for src in row {
                match parse(src).map_err(usage)? {
                    Formula::CpCounterfactual(a, g, b) => rows.push((*a, g, *b)),
                    other => {
                        return Err(usage(format!(
                            "`{other}` is not a counterfactual; rows must use =>[..]"
                        )))
                    }
                }
            }
            let table = arena::comparison_table(&m, x, &rows).map_err(internal)?;
            print!("{}", arena::render_table(&table));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Fixtures => run_fixtures(cli.format),
    }
}

fn print_report(format: Format, report: &SweepReport, u: UpdateTag) {
    for v in &report.violations {
        match format {
            Format::Text => println!(
                "violation check={} world={} formula={} model: {}",
                v.check,
                v.world,
                v.formula,
                v.model.replace('\n', "; ")
            ),
            Format::Jsonlines => println!(
                "{}",
                json!({
                    "model": v.model,
                    "world": v.world,
                    "formula": v.formula,
                    "update": u.letter().to_string(),
                    "actual": v.check,
                })
            ),
        }
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    println!(
        "models={} checks={} violations={}",
        report.models,
        report.checks,
        report.violations.len()
    );
}

fn run_fixtures(format: Format) -> Result<ExitCode, Failure> {
    let mut failures = 0usize;
    let mut total = 0usize;
    for (lineno, line) in VERDICT_MANIFEST.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [name, world, tag, formula, expected] = fields[..] else {
            return Err(internal(format!(
                "manifest line {}: expected 5 tab-separated fields",
                lineno + 1
            )));
        };
        let source = fixtures::ALL
            .iter()
            .find(|(n, _)| n.trim_end_matches(".sph") == name)
            .map(|(_, src)| *src)
            .ok_or_else(|| internal(format!("manifest line {}: unknown fixture {name}", lineno + 1)))?;
        let m = load_model(source).map_err(internal)?;
        let x = m
            .world_named(world)
            .ok_or_else(|| internal(format!("manifest line {}: unknown world {world}", lineno + 1)))?;
        let u = UpdateTag::from_letter(tag.chars().next().unwrap_or(' '))
            .ok_or_else(|| internal(format!("manifest line {}: bad tag {tag}", lineno + 1)))?;
        let f = parse(formula).map_err(internal)?;
        let expected: bool = expected
            .parse()
            .map_err(|_| internal(format!("manifest line {}: bad verdict {expected}", lineno + 1)))?;
        let actual = eval::sat(&m, x, &f, u).map_err(internal)?;
        total += 1;
        let ok = actual == expected;
        if !ok {
            failures += 1;
        }
        match format {
            Format::Text => println!(
                "{} {name} {world} {} {formula}",
                if ok { "PASS" } else { "FAIL" },
                u.letter()
            ),
            Format::Jsonlines => println!(
                "{}",
                json!({
                    "fixture": name,
                    "world": world,
                    "formula": formula,
                    "update": u.letter().to_string(),
                    "expected": expected,
                    "actual": actual,
                })
            ),
        }
    }
    println!("{} fixtures, {} failed", total, failures);
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

