use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use boolclone::definability::{minimize_witness, qfpp_definable, qfpp_definable_reduced};
use boolclone::families::{
    self, basis_relation, catalog_entry, BASIS_NAMES, LAMBDA_FAMILY, LE_FAMILY,
};
use boolclone::format::{parse_function, parse_relation, write_function, write_relation};
use boolclone::intervals::compute_interval_with_retry;
use boolclone::preserve::{
    find_symmetric_violation, find_violation, pol_fingerprint, ppol_fingerprint,
};
use boolclone::verify::{run_checks, Section, Verdict};
use boolclone::{Budget, PartialFunction, Relation, SymmetricPartialFunction};

/// Strong partial clones of Boolean functions: relations, preservation,
/// definability and intervals.
#[derive(Parser)]
#[command(name = "boolclone", version)]
struct Cli {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// Largest number of index tuples a definability search may visit.
    #[arg(long, global = true)]
    max_index_tuples: Option<u64>,
    /// Largest number of column multisets for symmetric preservation.
    #[arg(long, global = true)]
    max_multisets: Option<u64>,
    /// Largest fingerprint arity.
    #[arg(long, global = true)]
    max_fingerprint_arity: Option<usize>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(v) = self.max_index_tuples {
            b.max_index_tuples = v;
        }
        if let Some(v) = self.max_multisets {
            b.max_multisets = v;
        }
        if let Some(v) = self.max_fingerprint_arity {
            b.max_fingerprint_arity = v;
        }
        b
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a named relation (.rel) or partial function (.pfn).
    GenFamily {
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        /// Output file; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Decide whether a partial function preserves a relation.
    Preserves {
        function: PathBuf,
        relation: PathBuf,
        /// Use the multiset search; the function must be totally symmetric.
        #[arg(long)]
        symmetric: bool,
    },
    /// Decide qfpp-definability of a relation from source relations.
    Definable {
        target: PathBuf,
        #[arg(required = true)]
        sources: Vec<PathBuf>,
        /// Reduce a redundant target before deciding.
        #[arg(long)]
        reduce: bool,
        /// Shrink a positive witness greedily.
        #[arg(long)]
        minimize: bool,
    },
    /// Compute the strong partial clones above a catalog clone.
    Interval {
        #[arg(long)]
        clone: String,
        #[arg(long, value_enum)]
        basis: BasisFamily,
        /// Also write the cover relation as a DOT graph.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Digest of the polymorphisms of some relations up to a given arity.
    Fingerprint {
        #[arg(required = true)]
        relations: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Total polymorphisms only.
        #[arg(long)]
        total: bool,
    },
    /// Run the reproduction checks. Exits nonzero if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        section: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Record per-check runtimes (makes the output nondeterministic).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisFamily {
    /// P0, P1, P01
    #[value(name = "01")]
    Constants,
    Le,
    Lambda,
    All,
}

impl BasisFamily {
    fn names(self) -> &'static [&'static str] {
        match self {
            BasisFamily::Constants => &["P0", "P1", "P01"],
            BasisFamily::Le => &LE_FAMILY,
            BasisFamily::Lambda => &LAMBDA_FAMILY,
            BasisFamily::All => &BASIS_NAMES,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Generated {
    Rel(Relation),
    Pfn(PartialFunction),
}

fn need(v: Option<usize>, flag: &str, name: &str) -> Result<usize> {
    v.with_context(|| format!("{name} needs --{flag}"))
}

fn generate(
    name: &str,
    n: Option<usize>,
    m: Option<usize>,
    j: Option<usize>,
    k: Option<usize>,
    p: Option<usize>,
) -> Result<Generated> {
    use Generated::{Pfn, Rel};
    Ok(match name {
        "rho02" => Rel(families::rho_02()),
        "r02_c" => Rel(families::r02_c(need(n, "n", name)?)?),
        "r02_k" => Rel(families::r02_k(need(n, "n", name)?)?),
        "r02" => Rel(families::r02(need(n, "n", name)?)?),
        "lambda" => Rel(families::lambda_k(need(k, "k", name)?)?),
        "rlambda" => Rel(families::r_lambda(need(m, "m", name)?)?),
        "rlambda_dual" => Rel(families::r_lambda_dual(need(m, "m", name)?)?),
        "rlambda_lambda" => Rel(families::r_lambda_lambda()),
        "rho_c" => Rel(families::rho_c()),
        "rho_1" => Rel(families::rho_1()),
        "rho_l" => Rel(families::rho_l()),
        "xi" => Pfn(families::xi(need(j, "j", name)?)?.expand()?),
        "tau" => Pfn(families::tau(need(k, "k", name)?, need(p, "p", name)?)?.expand()?),
        "and" => Pfn(families::and()),
        "or" => Pfn(families::or()),
        "not" => Pfn(families::not()),
        other if BASIS_NAMES.contains(&other) => Rel(basis_relation(other)?),
        other => bail!("unknown family {other:?}"),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_relation(path: &Path) -> Result<Relation> {
    parse_relation(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_function(path: &Path) -> Result<PartialFunction> {
    parse_function(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let budget = cli.budget.budget();
    match cli.command {
        Command::GenFamily {
            name,
            n,
            m,
            j,
            k,
            p,
            out,
        } => {
            let text = match generate(&name, n, m, j, k, p)? {
                Generated::Rel(r) => write_relation(&r),
                Generated::Pfn(f) => write_function(&f),
            };
            match out {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => print!("{text}"),
            }
        }
        Command::Preserves {
            function,
            relation,
            symmetric,
        } => {
            let f = read_function(&function)?;
            let rho = read_relation(&relation)?;
            let value = if symmetric {
                let sf = SymmetricPartialFunction::from_function(&f)
                    .context("function is not totally symmetric")?;
                let v = find_symmetric_violation(&sf, &rho, &budget)?;
                serde_json::json!({ "preserves": v.is_none(), "violation": v })
            } else {
                let v = find_violation(&f, &rho);
                let output = v.as_ref().and_then(|m| m.apply(&f)).map(|t| t.to_string());
                serde_json::json!({ "preserves": v.is_none(), "matrix": v, "output": output })
            };
            print_json(&value)?;
        }
        Command::Definable {
            target,
            sources,
            reduce,
            minimize,
        } => {
            let rho = read_relation(&target)?;
            let sigma = sources
                .iter()
                .map(|p| read_relation(p))
                .collect::<Result<Vec<_>>>()?;
            let mut verdict = if reduce {
                qfpp_definable_reduced(&rho, &sigma, &budget)?
            } else {
                qfpp_definable(&rho, &sigma, &budget)?
            };
            if minimize {
                verdict = minimize_witness(&verdict, &rho, &sigma)?;
            }
            print_json(&verdict)?;
        }
        Command::Interval { clone, basis, dot } => {
            let c = catalog_entry(&clone)?;
            let result = compute_interval_with_retry(&c, basis.names(), &budget)?;
            if let Some(path) = dot {
                fs::write(&path, result.report.export_dot())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&result)?;
        }
        Command::Fingerprint {
            relations,
            k,
            total,
        } => {
            if k > budget.max_fingerprint_arity {
                bail!(
                    "arity {k} exceeds the fingerprint budget {}",
                    budget.max_fingerprint_arity
                );
            }
            let sigma = relations
                .iter()
                .map(|p| read_relation(p))
                .collect::<Result<Vec<_>>>()?;
            let fp = if total {
                pol_fingerprint(&sigma, k)?
            } else {
                ppol_fingerprint(&sigma, k)?
            };
            print_json(&fp.digest())?;
        }
        Command::Verify {
            section,
            format,
            timings,
        } => {
            let sections = Section::parse(&section)?;
            let report = run_checks(&sections, &budget, timings);
            match format {
                Format::Json => print_json(&report)?,
                Format::Text => {
                    for c in &report.checks {
                        let tag = match c.verdict {
                            Verdict::Pass => "PASS",
                            Verdict::Fail => "FAIL",
                            Verdict::Skipped => "SKIP",
                        };
                        let time = c
                            .runtime_ms
                            .map(|t| format!(" [{t} ms]"))
                            .unwrap_or_default();
                        println!("{tag} {}{time}: {} ({})", c.id, c.claim, c.detail);
                    }
                    println!(
                        "{} passed, {} failed, {} skipped",
                        report.passed, report.failed, report.skipped
                    );
                }
            }
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
