use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use lineable::certificate::{read_json, read_text, to_json, write_atomic};
use lineable::genericity::{
    build_dense_family, certify_density, certify_independence, certify_union_span, not_in_y_certificate,
    LINF_DENSE_NOTE,
};
use lineable::recheck::recheck_json;
use lineable::sampling::DEFAULT_SEED;
use lineable::scalar::{format_rational, parse_rational};
use lineable::selftest::{self, CheckOutcome};
use lineable::spaceability::{
    build_closed_family, combo_not_in_y_certificate, cross_independence_certificate, extract_certificate,
    pointwise_convergence_audit,
};
use lineable::spaces::{metric_description, ChainParams, SpaceId};
use lineable::witnesses::witness_report;
use lineable::{BranchId, Certificate, Error, Family, IndexSet, Rational};

const DEFAULT_TOL: &str = "1/1048576";
const DEFAULT_TRIALS: u64 = 100;

#[derive(Parser)]
#[command(name = "lineable", version, about = "Certified lineability constructions along the sequence space chain")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Chain parameter a, as "p/q" [default: 1]
    #[arg(long, global = true)]
    a: Option<String>,
    /// Chain parameter b > a, as "p/q" [default: 2]
    #[arg(long, global = true)]
    b: Option<String>,
    /// Seed for sampled trials
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Metric tolerance, as "p/q"
    #[arg(long, global = true, default_value = DEFAULT_TOL)]
    tol: String,
    /// Write JSON here (atomically) instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// The eleven spaces in chain order
    Chain {
        #[command(subcommand)]
        command: ChainCommand,
    },
    /// Witness of X \ Y supported inside an index set
    Witness {
        #[arg(long = "Y")]
        y: SpaceId,
        #[arg(long = "X")]
        x: SpaceId,
        /// e.g. "evens", "ray(5)", "cell(branch(0|10),2)"
        #[arg(long)]
        support: IndexSet,
    },
    /// Family specifications
    Family {
        #[command(subcommand)]
        command: FamilyCommand,
    },
    /// Run a verification and emit a certificate
    Verify {
        #[arg(value_enum)]
        claim: VerifyClaim,
        /// Family specification from `family gen`
        #[arg(long)]
        spec: PathBuf,
        /// Number of sampled elements; for density, generators per branch [default: 100, density: depth]
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Re-verify a certificate file independently
    Recheck { cert: PathBuf },
    /// Desk-scale invariant suite
    Selftest {
        /// Also certify and recheck this family
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Also recheck these certificates
        #[arg(long)]
        cert: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChainCommand {
    List,
}

#[derive(Subcommand)]
enum FamilyCommand {
    /// Build a family of witnesses along tree branches
    #[command(after_help = format!("Note: {LINF_DENSE_NOTE}."))]
    Gen {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long = "Y")]
        y: SpaceId,
        /// Ambient space; dense mode rejects linf
        #[arg(long = "X")]
        x: SpaceId,
        /// Comma-separated branch ids "prefix|period", e.g. "|0,1|0,|1"
        #[arg(long, value_delimiter = ',', required = true)]
        branches: Vec<BranchId>,
        #[arg(long)]
        depth: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Closed,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyClaim {
    Independence,
    NotInY,
    Density,
    UnionSpan,
    Extract,
    ComboNotInY,
    CrossIndependence,
    Pointwise,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::Precondition(_)
            | Error::NotAChainPair { .. }
            | Error::DuplicateBranch(_)
            | Error::SameBranch(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Schema(_) => Failure::Usage(e.to_string()),
            other => Failure::Verification(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Context {
    a: Option<String>,
    b: Option<String>,
    seed: u64,
    tol: Rational,
    out: Option<PathBuf>,
}

impl Context {
    fn new(g: Global) -> Result<Self, Failure> {
        let tol = parse_rational(&g.tol).map_err(Error::from)?;
        if tol <= Rational::from_integer(0.into()) {
            return Err(Failure::Usage("tolerance must be positive".into()));
        }
        Ok(Context {
            a: g.a,
            b: g.b,
            seed: g.seed.unwrap_or(DEFAULT_SEED),
            tol,
            out: g.out,
        })
    }

    fn chain(&self) -> Result<ChainParams, Failure> {
        let d = ChainParams::default();
        let a = self.a.clone().unwrap_or_else(|| format_rational(d.a()));
        let b = self.b.clone().unwrap_or_else(|| format_rational(d.b()));
        Ok(ChainParams::parse(&a, &b)?)
    }

    fn emit<T: Serialize>(&self, value: &T) -> Outcome {
        let text = to_json(value);
        match &self.out {
            Some(path) => write_atomic(path, &text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    /// Loads a family file; explicit --a/--b must agree with it.
    fn family(&self, path: &Path) -> Result<Family, Failure> {
        let family: Family = read_json(path)?;
        if (self.a.is_some() || self.b.is_some()) && &self.chain()? != family.chain() {
            return Err(Failure::Usage("--a/--b disagree with the chain recorded in the spec".into()));
        }
        Ok(family)
    }
}

fn chain_list(ctx: &Context) -> Outcome {
    let chain = ctx.chain()?;
    let rows: Vec<_> = SpaceId::ALL
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let space = chain.resolve(*id);
            json!({ "position": i, "id": id, "space": space.to_string(), "metric": metric_description(&space) })
        })
        .collect();
    ctx.emit(&json!({ "a": format_rational(chain.a()), "b": format_rational(chain.b()), "spaces": rows }))
}

fn family_gen(ctx: &Context, mode: Mode, y: SpaceId, x: SpaceId, branches: &[BranchId], depth: u64) -> Outcome {
    let chain = ctx.chain()?;
    let family = match mode {
        Mode::Dense => Family::Dense(build_dense_family(&chain, y, x, branches, depth)?),
        Mode::Closed => Family::Closed(build_closed_family(&chain, y, x, branches, depth)?),
    };
    ctx.emit(&family)
}

fn certify(ctx: &Context, claim: VerifyClaim, family: &Family, trials: Option<u64>) -> Result<Certificate, Failure> {
    let (seed, tol) = (ctx.seed, &ctx.tol);
    let n = trials.unwrap_or(DEFAULT_TRIALS);
    let mismatch = |mode: &str| Failure::Usage(format!("this claim needs a {mode} family"));
    let cert = match (claim, family) {
        (VerifyClaim::Independence, Family::Dense(f)) => certify_independence(f, n, seed, tol)?,
        (VerifyClaim::NotInY, Family::Dense(f)) => not_in_y_certificate(f, n, seed, tol)?,
        (VerifyClaim::Density, Family::Dense(f)) => certify_density(f, trials.unwrap_or(f.depth), tol)?,
        (VerifyClaim::UnionSpan, Family::Dense(f)) => certify_union_span(f, n, seed, tol)?,
        (VerifyClaim::Extract, Family::Closed(f)) => extract_certificate(f, n, seed, tol)?,
        (VerifyClaim::ComboNotInY, Family::Closed(f)) => combo_not_in_y_certificate(f, n, seed, tol)?,
        (VerifyClaim::CrossIndependence, Family::Closed(f)) => cross_independence_certificate(f, n, seed, tol)?,
        (VerifyClaim::Pointwise, Family::Closed(f)) => pointwise_convergence_audit(f, n, seed, tol)?,
        (
            VerifyClaim::Independence | VerifyClaim::NotInY | VerifyClaim::Density | VerifyClaim::UnionSpan,
            Family::Closed(_),
        ) => return Err(mismatch("dense")),
        (_, Family::Dense(_)) => return Err(mismatch("closed")),
    };
    Ok(cert)
}

fn verify(ctx: &Context, claim: VerifyClaim, spec: &Path, trials: Option<u64>) -> Outcome {
    let family = ctx.family(spec)?;
    let cert = certify(ctx, claim, &family, trials)?;
    ctx.emit(&cert)?;
    if cert.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} certificate has failing items", cert.claim)))
    }
}

fn recheck_file(path: &Path) -> Result<CheckOutcome, Failure> {
    let text = read_text(path)?;
    Ok(match recheck_json(&text) {
        Ok(cert) if cert.passed => CheckOutcome { name: "recheck", passed: true, detail: format!("{}: {} certificate valid", path.display(), cert.claim) },
        Ok(cert) => CheckOutcome { name: "recheck", passed: false, detail: format!("{}: valid {} certificate of a failed claim", path.display(), cert.claim) },
        Err(e) => CheckOutcome { name: "recheck", passed: false, detail: format!("{}: {e}", path.display()) },
    })
}

fn recheck_cmd(ctx: &Context, path: &Path) -> Outcome {
    let outcome = recheck_file(path)?;
    ctx.emit(&json!({ "certificate": path.display().to_string(), "passed": outcome.passed, "detail": outcome.detail }))?;
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure::Verification(outcome.detail))
    }
}

fn spec_check(ctx: &Context, path: &Path) -> Result<CheckOutcome, Failure> {
    let family = ctx.family(path)?;
    let claims: &[VerifyClaim] = match family {
        Family::Dense(_) => &[VerifyClaim::Density, VerifyClaim::Independence, VerifyClaim::NotInY],
        Family::Closed(_) => &[VerifyClaim::Extract, VerifyClaim::ComboNotInY, VerifyClaim::CrossIndependence],
    };
    for claim in claims {
        let trials = if matches!(claim, VerifyClaim::Density) { 1 } else { 10 };
        let cert = match certify(ctx, *claim, &family, Some(trials)) {
            Ok(c) => c,
            Err(Failure::Verification(m) | Failure::Usage(m)) => {
                return Ok(CheckOutcome { name: "spec", passed: false, detail: m })
            }
        };
        let detail = match recheck_json(&cert.to_json()) {
            Ok(c) if c.passed => continue,
            Ok(_) => "claim failed".to_string(),
            Err(e) => e.to_string(),
        };
        return Ok(CheckOutcome { name: "spec", passed: false, detail: format!("{}: {detail}", cert.claim) });
    }
    Ok(CheckOutcome { name: "spec", passed: true, detail: format!("{} certified and rechecked", path.display()) })
}

fn selftest_cmd(ctx: &Context, spec: Option<&Path>, certs: &[PathBuf]) -> Outcome {
    let mut report = selftest::run(&ctx.chain()?, &ctx.tol);
    if let Some(path) = spec {
        report.checks.push(spec_check(ctx, path)?);
    }
    for path in certs {
        report.checks.push(recheck_file(path)?);
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    ctx.emit(&report)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification("selftest failed".into()))
    }
}

fn run(cli: Cli) -> Outcome {
    let ctx = Context::new(cli.global)?;
    match cli.command {
        Command::Chain { command: ChainCommand::List } => chain_list(&ctx),
        Command::Witness { y, x, support } => ctx.emit(&witness_report(&ctx.chain()?, y, x, &support)?),
        Command::Family { command: FamilyCommand::Gen { mode, y, x, branches, depth } } => {
            family_gen(&ctx, mode, y, x, &branches, depth)
        }
        Command::Verify { claim, spec, trials } => verify(&ctx, claim, &spec, trials),
        Command::Recheck { cert } => recheck_cmd(&ctx, &cert),
        Command::Selftest { spec, cert } => selftest_cmd(&ctx, spec.as_deref(), &cert),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(m)) => {
            eprintln!("lineable: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("lineable: {m}");
            ExitCode::from(2)
        }
    }
}
