//! `hvkit`: build, transform and audit finite hidden-variables models.
//!
//! Every command produces a report; the exit status is 0 iff every check in
//! it passed, 1 if some check failed and 2 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hvkit::composer::{
    build_prism_composite, check_compactness, check_compatibility, compose_compact_native,
    compose_compatible, compose_independent, CompositeModel,
};
use hvkit::demo::{
    additivity_check, additivity_fixture, check_model, prism_fixture, reference_toy, run_demo,
    run_property_suite, scenario_checks, DemoName, DEMO_OVERLAP,
};
use hvkit::files;
use hvkit::hvframe::{classify, HVModel, StateId};
use hvkit::pbrcheck::{detect_lemma_contradiction, PbrScenario};
use hvkit::report::{emit_report, Check, Format, RunReport};
use hvkit::toymodels::{build_segregated_toy, reference_states, Geometry, ToyObservable};
use hvkit::transforms::{assert_equivalent, mix, segregate, EquivalenceSuite};

#[derive(Parser)]
#[command(
    name = "hvkit",
    version,
    about = "Finite hidden-variables models and their audits"
)]
struct Cli {
    /// Output file. For `transform` and `compose` this is the model written;
    /// elsewhere the report goes there instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value = "human")]
    format: String,

    #[arg(long, global = true, default_value_t = hvkit::TOL)]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in demo: toy, segregate, mix, pbr or additivity.
    Demo {
        name: String,
        /// Also write the demo's model (composite for pbr and additivity).
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Load and validate a model file, then audit its reproduction.
    Check { model: PathBuf },
    /// Rewrite a model as its segregated or mixed equivalent.
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Build a composite of L copies of a component model.
    Compose(ComposeArgs),
    /// Compare two models.
    Audit {
        #[command(subcommand)]
        kind: AuditKind,
    },
    /// Antidistinguishing scenarios and their audits.
    Pbr {
        #[command(subcommand)]
        kind: PbrKind,
    },
    /// Randomized composition property suite.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Segregate,
    Mix,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComposeMode {
    Prism,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Independent,
    Compatible,
    CompactNative,
}

#[derive(clap::Args)]
struct ComposeArgs {
    /// `prism` builds the independent composite with a null-outcome table.
    #[arg(value_enum)]
    mode: Option<ComposeMode>,
    #[arg(long, value_enum)]
    rule: Option<Rule>,
    #[arg(long)]
    component: PathBuf,
    /// The two component states, e.g. `zero,plus`.
    #[arg(long)]
    pair: String,
    #[arg(long = "L", short = 'L', default_value_t = 2)]
    systems: usize,
    /// Joint measurement file (prism only).
    #[arg(long)]
    measurement: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    native_measure: f64,
    #[arg(long, default_value_t = 0.5)]
    native_share: f64,
}

#[derive(Subcommand)]
enum AuditKind {
    Equivalence {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// A suite file or `full`.
        #[arg(long, default_value = "full")]
        suite: String,
    },
}

#[derive(Subcommand)]
enum PbrKind {
    /// Canonical end-to-end run.
    Demo,
    Verify {
        #[arg(long)]
        scenario: PathBuf,
    },
    Additivity {
        #[arg(long)]
        composite: PathBuf,
        #[arg(long)]
        cell: String,
        /// Defaults to the canonical scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let format: Format = cli.format.parse()?;
    let tol = cli.tolerance;
    if tol.is_nan() || tol < 0.0 {
        bail!("--tolerance must be a nonnegative number");
    }
    let (report, artifact_out) = match cli.command {
        Command::Demo { name, export } => {
            let name: DemoName = name.parse()?;
            if let Some(path) = export {
                export_demo(name, &path)?;
            }
            (run_demo(name, tol)?, false)
        }
        Command::Check { model } => (check_model(&load_model(&model)?, tol)?, false),
        Command::Transform { kind, input } => {
            let out = required_out(&cli.out)?;
            (transform(kind, &input, out)?, true)
        }
        Command::Compose(args) => {
            let out = required_out(&cli.out)?;
            (compose(&args, out)?, true)
        }
        Command::Audit {
            kind: AuditKind::Equivalence { a, b, suite },
        } => (audit_equivalence(&a, &b, &suite, tol)?, false),
        Command::Pbr { kind } => (pbr(kind, tol)?, false),
        Command::Props { seed, count } => (run_property_suite(seed, count)?, false),
    };

    let text = emit_report(&report, format)?;
    match (&cli.out, artifact_out) {
        (Some(path), false) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        _ => print!("{text}"),
    }
    Ok(report.exit_status() as u8)
}

fn export_demo(name: DemoName, path: &Path) -> Result<()> {
    match name {
        DemoName::Toy => files::save_model(path, &reference_toy()?)?,
        DemoName::Segregate => files::save_model(path, &segregate(&reference_toy()?)?)?,
        DemoName::Mix => files::save_model(
            path,
            &mix(&build_segregated_toy(
                &reference_states(),
                &ToyObservable::paulis(),
                Geometry::DisjointIntervals,
            )?)?,
        )?,
        DemoName::Pbr => files::save_composite(path, &prism_fixture(DEMO_OVERLAP)?.0)?,
        DemoName::Additivity => files::save_composite(path, &additivity_fixture()?.0)?,
    }
    Ok(())
}

fn required_out(out: &Option<PathBuf>) -> Result<&Path> {
    match out {
        Some(p) => Ok(p),
        None => bail!("this command needs --out <file>"),
    }
}

fn load_model(path: &Path) -> Result<HVModel> {
    files::load_model(path).with_context(|| format!("loading {}", path.display()))
}

fn parse_pair(s: &str) -> Result<(StateId, StateId)> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(',') => {
            Ok((StateId::new(a.trim()), StateId::new(b.trim())))
        }
        _ => bail!("--pair expects two state ids separated by a comma, got `{s}`"),
    }
}

fn transform(kind: TransformKind, input: &Path, out: &Path) -> Result<RunReport> {
    let model = load_model(input)?;
    let (name, result) = match kind {
        TransformKind::Segregate => ("segregate", segregate(&model)?),
        TransformKind::Mix => ("mix", mix(&model)?),
    };
    files::save_model(out, &result)?;
    let eq = assert_equivalent(&model, &result, &EquivalenceSuite::full(&model))?;
    let mut report = RunReport::new(format!("transform {name}"));
    report.push(
        Check::new("written", true)
            .value("path", out.display().to_string())
            .value("classification", classify(&result).to_string()),
    );
    report.push(
        Check::residual("equivalence[in,out]", eq.max_delta, eq.tolerance)
            .value("triples", eq.entries.len()),
    );
    Ok(report)
}

fn compose(args: &ComposeArgs, out: &Path) -> Result<RunReport> {
    let component = load_model(&args.component)?;
    let pair = parse_pair(&args.pair)?;
    let l = args.systems;
    let (label, composite): (String, CompositeModel) = match (args.mode, args.rule) {
        (Some(ComposeMode::Prism), None | Some(Rule::Independent)) => {
            let Some(path) = &args.measurement else {
                bail!("compose prism needs --measurement <file>");
            };
            let meas = files::load_measurement(path)
                .with_context(|| format!("loading {}", path.display()))?;
            (
                "prism".into(),
                build_prism_composite(&component, &pair, l, &meas)?,
            )
        }
        (Some(ComposeMode::Prism), Some(_)) => bail!("compose prism uses the independent rule"),
        (None, None) => bail!("compose needs --rule or the `prism` mode"),
        (None, Some(rule)) => match rule {
            Rule::Independent => (
                "independent".into(),
                compose_independent(&component, &pair, l)?,
            ),
            Rule::Compatible => (
                "compatible".into(),
                compose_compatible(&component, &pair, l)?,
            ),
            Rule::CompactNative => (
                "compact-native".into(),
                compose_compact_native(
                    &component,
                    &pair,
                    l,
                    args.native_measure,
                    args.native_share,
                )?,
            ),
        },
    };
    files::save_composite(out, &composite)?;

    let compat = check_compatibility(&composite, &component, &pair)?;
    let compact = check_compactness(&composite, &component, &pair)?;
    let mut report = RunReport::new(format!("compose {label} --L {l}"));
    report.push(
        Check::new("written", true)
            .value("path", out.display().to_string())
            .value("preparations", composite.preparations().len())
            .value("cells", composite.base().space().len()),
    );
    report.push(
        Check::new("support", true)
            .value("common_support_measure", composite.common_support_measure()),
    );
    report.push(
        Check::new("rules", true)
            .value("compatible", compat.holds)
            .value("compactness", &compact),
    );
    Ok(report)
}

fn audit_equivalence(a: &Path, b: &Path, suite: &str, tol: f64) -> Result<RunReport> {
    let ma = load_model(a)?;
    let mb = load_model(b)?;
    let suite = if suite == "full" {
        EquivalenceSuite::full(&ma).with_tolerance(tol)
    } else {
        files::load_suite(suite).with_context(|| format!("loading {suite}"))?
    };
    let eq = assert_equivalent(&ma, &mb, &suite)?;
    let mut report = RunReport::new("audit equivalence");
    for e in &eq.entries {
        report.push(
            Check::residual(
                format!(
                    "delta[{},{},{}]",
                    e.triple.state, e.triple.observable, e.triple.outcomes
                ),
                e.delta,
                eq.tolerance,
            )
            .value("a", e.in_a)
            .value("b", e.in_b),
        );
    }
    report.push(Check::residual("max-delta", eq.max_delta, eq.tolerance));
    Ok(report)
}

fn load_scenario(path: &Path) -> Result<PbrScenario> {
    let file = files::load_scenario(path).with_context(|| format!("loading {}", path.display()))?;
    let meas = file.measurement()?;
    Ok(PbrScenario::new(file.psi1, file.psi2, file.systems, meas)?)
}

fn pbr(kind: PbrKind, tol: f64) -> Result<RunReport> {
    match kind {
        PbrKind::Demo => Ok(run_demo(DemoName::Pbr, tol)?),
        PbrKind::Verify { scenario } => {
            let s = load_scenario(&scenario)?;
            let mut report = RunReport::new("pbr verify");
            report.extend(scenario_checks(&s, tol)?);
            Ok(report)
        }
        PbrKind::Additivity {
            composite,
            cell,
            scenario,
        } => {
            let c = files::load_composite(&composite)
                .with_context(|| format!("loading {}", composite.display()))?;
            let s = match scenario {
                Some(p) => load_scenario(&p)?,
                None => PbrScenario::canonical()?,
            };
            let mut report = RunReport::new("pbr additivity");
            report.push(additivity_check(&c, &s, &cell.as_str().into())?);
            if let Ok(v) = detect_lemma_contradiction(&c, &s) {
                report.push(Check::new("lemma", true).value("kind", v.kind));
            }
            Ok(report)
        }
    }
}
