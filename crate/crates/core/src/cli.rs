//! Command-line surface. Exit codes: 0 when every asserted check passes, 1 on
//! an identity failure, 2 on a usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::Grassmann;
use crate::dsl::{self, BindFile, DslError, SymbolTable};
use crate::ew::{self, EWParams, LagrangianTerm};
use crate::invariants::{self, FamilyId, IdentityReport, Suite, SuiteConfig, EW_TOL};
use crate::tensor::{enumerate_pair_contractions, Slot, Species, Statistics, Tensor, Variance};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ewcheck", version, about = "Identity certification for two-spinor and electroweak invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatArg {
    Bosonic,
    Fermionic,
    Both,
}

impl StatArg {
    fn list(self) -> Vec<Statistics> {
        match self {
            StatArg::Bosonic => vec![Statistics::Bosonic],
            StatArg::Fermionic => vec![Statistics::Fermionic],
            StatArg::Both => vec![Statistics::Bosonic, Statistics::Fermionic],
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OneStat {
    Bosonic,
    Fermionic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    All,
    Qed,
    Geometry,
    Ew,
    #[value(name = "I")]
    I,
    #[value(name = "J")]
    J,
    #[value(name = "S")]
    S,
    #[value(name = "Sprime")]
    Sprime,
    #[value(name = "T18")]
    T18,
    Phi4,
    Mixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TermArg {
    HiggsKinetic,
    HiggsPotential,
    Yukawa,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a check suite and write the JSON report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, value_enum, default_value = "both")]
        stat: StatArg,
        #[arg(long, default_value_t = invariants::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = invariants::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = invariants::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Assert the identities of this statistics on every sampled one.
        #[arg(long, value_enum)]
        assert_stat: Option<OneStat>,
    },
    /// Discover the linear relations of an invariant family.
    Relations {
        /// I, J, IJ, S, Sprime, T18, phi4, mixed or threeleg.
        #[arg(long)]
        family: String,
        #[arg(long, value_enum, default_value = "both")]
        stat: StatArg,
        #[arg(long, default_value_t = invariants::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = invariants::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate index expressions on bound or sampled tensors.
    Eval {
        /// Expression file (one per line, `#` comments) or expression text.
        #[arg(long)]
        expr: String,
        /// JSON declarations and values.
        #[arg(long)]
        bind: Option<PathBuf>,
        #[arg(long, default_value_t = invariants::DEFAULT_SEED)]
        seed: u64,
    },
    /// Print every full pairing of the given slots, e.g.
    /// `spinor_{A B C D} dotted_{A' B' C' D'}`.
    Enumerate {
        #[arg(long)]
        slots: String,
    },
    /// Extract the vertex table of a Lagrangian term (CSV, or JSON for a
    /// `.json` output path).
    Vertices {
        #[arg(long, value_enum)]
        term: TermArg,
        #[arg(long, default_value_t = EWParams::default().theta)]
        theta: f64,
        #[arg(long, default_value_t = EWParams::default().q)]
        q: f64,
        #[arg(long, default_value_t = EWParams::default().m)]
        m: f64,
        #[arg(long, default_value_t = EWParams::default().lambda)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Invariant(#[from] invariants::InvariantError),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Ew(#[from] ew::EwError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut o = std::io::stdout().lock();
            writeln!(o, "{text}").map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            })
        }
    }
}

fn summarize(report: &IdentityReport) -> i32 {
    let failed: Vec<_> = report.failures().collect();
    eprintln!("{} checks, {} failed", report.checks.len(), failed.len());
    for c in &failed {
        eprintln!("FAIL [{}] {}: {:.3e} > {:.1e}", c.statistics, c.name, c.max_rel_residual, c.tol);
    }
    if failed.is_empty() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn suite_of(s: SuiteArg) -> Suite {
    match s {
        SuiteArg::All => Suite::All,
        SuiteArg::Qed => Suite::Qed,
        SuiteArg::Geometry => Suite::Geometry,
        SuiteArg::Ew => Suite::Ew,
        SuiteArg::I => Suite::Family(FamilyId::I),
        SuiteArg::J => Suite::Family(FamilyId::J),
        SuiteArg::S => Suite::Family(FamilyId::S),
        SuiteArg::Sprime => Suite::Family(FamilyId::Sprime),
        SuiteArg::T18 => Suite::Family(FamilyId::T18),
        SuiteArg::Phi4 => Suite::Family(FamilyId::Phi4),
        SuiteArg::Mixed => Suite::Family(FamilyId::Mixed),
    }
}

fn check_samples(samples: usize) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::Input("--samples must be positive".into()));
    }
    Ok(())
}

/// Monomials as `{generators, re, im}` rows.
pub fn grassmann_json(g: &Grassmann) -> Value {
    let terms: Vec<Value> = g
        .terms()
        .iter()
        .map(|(mask, c)| {
            let gens: Vec<u32> = (0..64).filter(|k| mask >> k & 1 == 1).collect();
            json!({"generators": gens, "re": c.re, "im": c.im})
        })
        .collect();
    Value::Array(terms)
}

/// Non-zero components as `{index, value}` rows in row-major order.
pub fn tensor_json(t: &Tensor) -> Value {
    let dims = t.dims();
    let mut entries = Vec::new();
    let mut idx = vec![0usize; dims.len()];
    for v in t.data() {
        if !v.is_zero() {
            entries.push(json!({"index": idx.clone(), "value": grassmann_json(v)}));
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Value::Array(entries)
}

fn run_eval(expr: &str, bind: Option<&Path>, seed: u64) -> Result<i32, CliError> {
    let bind_file = match bind {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            BindFile::from_json(&text)?
        }
        None => BindFile::default(),
    };
    let table: SymbolTable = bind_file.symbol_table()?;
    let free = bind_file.free_indices()?;
    let path = Path::new(expr);
    let exprs = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: expr.into(),
            source,
        })?;
        dsl::parse_file(&text)?
    } else {
        vec![(1, dsl::parse_syntax(expr)?)]
    };
    let mut results = Vec::new();
    for (line, ast) in exprs {
        let checked = dsl::check_expression(ast, &table, &free).map_err(|e| CliError::Input(format!("line {line}: {e}")))?;
        let plans = dsl::plan_expression(&checked)?;
        let naive = dsl::left_fold_plans(&checked)?;
        let bindings = dsl::bind_symbols(&checked, &table, seed)?;
        let value = dsl::evaluate_with_plans(&checked, &plans, &bindings, &table)?;
        let free: Vec<String> = checked.free.iter().map(|f| f.0.to_string()).collect();
        results.push(json!({
            "line": line,
            "expression": checked.ast.to_string(),
            "free": free,
            "plan_cost": plans.iter().map(|p| p.plan.total_cost).sum::<u64>(),
            "left_fold_cost": naive.iter().map(|p| p.plan.total_cost).sum::<u64>(),
            "value": tensor_json(&value),
        }));
    }
    let doc = json!({"seed": seed, "results": results});
    write_out(None, &serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
    Ok(EXIT_PASS)
}

/// Slots from a factor list whose names are species, e.g.
/// `spinor_{A B} isospin^{a b}`.
pub fn parse_slot_spec(spec: &str) -> Result<(Vec<Slot>, Vec<String>), CliError> {
    let e = dsl::parse_syntax(spec)?;
    let [term] = e.terms.as_slice() else {
        return Err(CliError::Input("slot spec must be a single list of groups".into()));
    };
    let mut slots = Vec::new();
    let mut labels = Vec::new();
    for f in &term.factors {
        let species = Species::parse(&f.name).ok_or_else(|| CliError::Input(format!("unknown species '{}'", f.name)))?;
        for (ix, up) in f.indices() {
            slots.push(Slot::new(species, if up { Variance::Up } else { Variance::Down }));
            labels.push(ix.to_string());
        }
    }
    Ok((slots, labels))
}

fn run_enumerate(spec: &str) -> Result<i32, CliError> {
    let (slots, labels) = parse_slot_spec(spec)?;
    let schemes = enumerate_pair_contractions(&slots).map_err(|e| CliError::Input(e.to_string()))?;
    let mut text = String::new();
    for (k, s) in schemes.iter().enumerate() {
        text.push_str(&format!("{}\t{}\n", k + 1, s.render(&labels)));
    }
    write_out(None, text.trim_end())?;
    eprintln!("{} schemes", schemes.len());
    Ok(EXIT_PASS)
}

fn run_vertices(term: TermArg, p: EWParams, seed: u64, out: Option<&Path>) -> Result<i32, CliError> {
    let term = match term {
        TermArg::HiggsKinetic => LagrangianTerm::HiggsKinetic,
        TermArg::HiggsPotential => LagrangianTerm::HiggsPotential,
        TermArg::Yukawa => LagrangianTerm::Yukawa,
    };
    let table = ew::extract_vertices(term, &p)?;
    let json_out = out.is_some_and(|o| o.extension().is_some_and(|e| e == "json"));
    let text = if json_out {
        serde_json::to_string_pretty(&table.to_json()).expect("json values serialize")
    } else {
        table.to_csv().map_err(|e| CliError::Input(e.to_string()))?
    };
    write_out(out, text.trim_end())?;
    let v = ew::validate_vertices(&table, seed, 6)?;
    eprintln!(
        "{} entries over {} leg sets; coefficient error {:.2e}, table error {:.2e}",
        table.entries.len(),
        v.leg_multisets,
        v.max_rel_error,
        v.point_rel_error
    );
    Ok(if v.max_rel_error <= EW_TOL && v.point_rel_error <= EW_TOL {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify {
            suite,
            stat,
            samples,
            seed,
            tol,
            out,
            assert_stat,
        } => {
            check_samples(samples)?;
            if !(tol >= 0.0) {
                return Err(CliError::Input("--tol must be non-negative".into()));
            }
            let cfg = SuiteConfig {
                suite: suite_of(suite),
                seed,
                samples,
                statistics: stat.list(),
                tol,
                assert_statistics: assert_stat.map(|s| match s {
                    OneStat::Bosonic => Statistics::Bosonic,
                    OneStat::Fermionic => Statistics::Fermionic,
                }),
                ..SuiteConfig::default()
            };
            let report = invariants::run_identity_suite(&cfg)?;
            write_out(out.as_deref(), &report.to_json())?;
            Ok(summarize(&report))
        }
        Command::Relations {
            family,
            stat,
            samples,
            seed,
            out,
        } => {
            check_samples(samples)?;
            let f = FamilyId::parse(&family).ok_or(invariants::InvariantError::UnknownFamily(family))?;
            let cfg = SuiteConfig {
                seed,
                samples,
                statistics: stat.list(),
                ..SuiteConfig::default()
            };
            let report = invariants::run_relation_discovery(f, &cfg)?;
            write_out(out.as_deref(), &report.to_json())?;
            for r in &report.relations {
                eprintln!("{} [{}]: nullspace dimension {}", r.family, r.statistics, r.nullspace_dim);
            }
            Ok(summarize(&report))
        }
        Command::Eval { expr, bind, seed } => run_eval(&expr, bind.as_deref(), seed),
        Command::Enumerate { slots } => run_enumerate(&slots),
        Command::Vertices {
            term,
            theta,
            q,
            m,
            lambda,
            out,
        } => run_vertices(term, EWParams::new(q, theta, m, lambda)?, invariants::DEFAULT_SEED, out.as_deref()),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_spec() {
        let (s, l) = parse_slot_spec("spinor_{A B C D} dotted_{A' B' C' D'}").unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s[5], Slot::down(Species::SpinorDotted));
        assert_eq!(l[4], "A'");
        assert_eq!(enumerate_pair_contractions(&s).unwrap().len(), 9);
        assert!(parse_slot_spec("quark^{a}").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ewcheck", "verify", "--suite", "nope"]), EXIT_USAGE);
        assert_eq!(run(["ewcheck", "relations", "--family", "K", "--samples", "3"]), EXIT_USAGE);
        assert_eq!(run(["ewcheck", "vertices", "--term", "yukawa", "--theta", "2.0"]), EXIT_USAGE);
        assert_eq!(run(["ewcheck", "eval", "--expr", "phi^{a}"]), EXIT_USAGE);
        assert_eq!(run(["ewcheck", "enumerate", "--slots", "spinor_{A B C}"]), EXIT_USAGE);
    }
}
