//! Command-line front end.
//!
//! Every subcommand except `gen` and the CSV form of `experiment` prints a
//! [`RunReport`]; `--format text` renders the same JSON as aligned text.
//!
//! Exit codes: 0 success or true, 1 definitive false, 2 unknown (budget),
//! 3 usage or parse error, 4 I/O error, 5 internal failure or violated audit.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{self, BoundError, LogBase};
use crate::encoding::{audit_encoding_bound, audit_markov_step, EncodingError};
use crate::family::{intersection_profile, is_d_intersecting, is_l_intersecting, SetFamily};
use crate::finders::{find_any, FindOutcome, FinderError, Strategy, DEFAULT_BUDGET};
use crate::format::{parse_any, write_json, write_text, FormatError, ParsedFamily};
use crate::generators::{GenError, GeneratorSpec};
use crate::rational::{format_rational, parse_rational, rational_to_f64};
use crate::spread::{
    check_satisfying_disjoint, exact_satisfying, find_spread_link, is_kappa_spread,
    sample_satisfying, spread_kappa, SampleConfig, SpreadError, EXACT_BUDGET,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FALSE: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "sunflower",
    version,
    about = "Sunflowers, bounds and spread analysis for set families"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Constructive,
    BruteForce,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Constructive => Strategy::Constructive,
            StrategyArg::BruteForce => Strategy::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Er,
    M,
    Theorem1,
    Claim1,
    Gh,
    Alwz,
    Theorem2,
    Trivial,
    Crossover,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uniformity, intersection profile and intersection predicates.
    Check {
        /// Family file (text or JSON), `-` for stdin.
        file: PathBuf,
        /// Check L-intersecting for this comma-separated L.
        #[arg(long = "L", value_delimiter = ',')]
        l: Option<Vec<usize>>,
        /// Check d-intersecting.
        #[arg(long)]
        d: Option<usize>,
        /// Check n-uniform.
        #[arg(long)]
        uniform: Option<usize>,
    },
    /// Search for an r-sunflower.
    Find {
        file: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
        /// Brute-force node budget per top-level branch.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Evaluate bound formulas.
    Bounds {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(short = 'n')]
        n: Option<u64>,
        #[arg(short = 'r')]
        r: Option<u64>,
        #[arg(short = 's')]
        s: Option<u64>,
        #[arg(long = "L", value_delimiter = ',')]
        l: Option<Vec<u64>>,
        #[arg(short = 'd')]
        d: Option<u64>,
        /// The constant in the log-based bounds.
        #[arg(short = 'C', default_value = "1")]
        c: String,
        /// `e` or a rational base > 1.
        #[arg(long, default_value = "e")]
        log_base: String,
    },
    /// Spread supremum, spread link and satisfying probabilities.
    Spread {
        file: PathBuf,
        /// Test κ-spread at this κ.
        #[arg(long)]
        kappa: Option<String>,
        /// With --kappa, find the largest qualifying link T with |T| ≤ d.
        #[arg(short = 'd', long)]
        d: Option<usize>,
        /// Satisfying probability at this α.
        #[arg(long)]
        alpha: Option<String>,
        /// Also check the disjoint-sets implication at α = 1/r.
        #[arg(long)]
        r: Option<usize>,
        /// Monte Carlo trials; requires --seed.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep α and print alpha,estimate,stderr,exact as CSV.
    Experiment {
        file: PathBuf,
        /// lo:hi:step, each a rational or decimal.
        #[arg(long)]
        alpha_grid: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustive bad-pair encoding and Markov audits over all W with |W| = px.
    EncodeAudit {
        file: PathBuf,
        #[arg(long)]
        px: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "1/2")]
        delta: Vec<String>,
    },
    /// Generate a family file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    Sunflower {
        core: usize,
        petal: usize,
        r: usize,
    },
    Transversal {
        blocks: usize,
        block_size: usize,
    },
    AllKSubsets {
        x: usize,
        k: usize,
    },
    RandomUniform {
        x: usize,
        n: usize,
        count: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    #[command(name = "random-l-intersecting")]
    RandomLIntersecting {
        x: usize,
        n: usize,
        target: u64,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    SingleIntersection {
        n: usize,
        t: usize,
        count: usize,
    },
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub subcommand: &'static str,
    pub input_digest: Option<String>,
    pub parameters: Value,
    pub outputs: Value,
    pub seeds: Vec<u64>,
    pub wall_time_seconds: f64,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Undecided { .. } => Failure::internal(e.to_string()),
            BoundError::OutOfRange { .. } => Failure::usage(e.to_string()),
        }
    }
}

impl From<FinderError> for Failure {
    fn from(e: FinderError) -> Self {
        match e {
            FinderError::DezaCertificateFailed | FinderError::LiftFailed => {
                Failure::internal(e.to_string())
            }
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<SpreadError> for Failure {
    fn from(e: SpreadError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<EncodingError> for Failure {
    fn from(e: EncodingError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Verification(_) => Failure::internal(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

/// What a subcommand produced before wall time and formatting are applied.
enum Output {
    Report {
        subcommand: &'static str,
        digest: Option<String>,
        parameters: Value,
        outputs: Value,
        seeds: Vec<u64>,
        code: u8,
    },
    /// Printed verbatim (family files, CSV).
    Raw { text: String, note: Option<String> },
}

struct Input {
    parsed: ParsedFamily,
    digest: String,
}

fn read_family(path: &PathBuf) -> Result<Input, Failure> {
    let io_err = |e: std::io::Error| Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    };
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut bytes).map_err(io_err)?;
    } else {
        bytes = std::fs::read(path).map_err(io_err)?;
    }
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::usage(format!("{}: not valid UTF-8", path.display())))?;
    let parsed =
        parse_any(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(Input {
        parsed,
        digest: format!("sha256:{}", hex::encode(Sha256::digest(&bytes))),
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn rational_arg(name: &str, s: &str) -> Result<BigRational, Failure> {
    parse_rational(s).map_err(|e| Failure::usage(format!("--{name}: {e}")))
}

fn need<T: Copy>(v: Option<T>, flag: &str, which: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::usage(format!("--which {which} needs {flag}")))
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::usage(format!("{what} is randomized and needs an explicit --seed")))
}

fn family_summary(f: &SetFamily) -> Value {
    json!({
        "ground_size": f.ground_size(),
        "size": f.len(),
        "uniformity": f.uniformity(),
    })
}

fn cmd_check(
    file: &PathBuf,
    l: Option<Vec<usize>>,
    d: Option<usize>,
    uniform: Option<usize>,
) -> Result<Output, Failure> {
    let input = read_family(file)?;
    let f = &input.parsed.family;
    let mut outputs = Map::new();
    outputs.insert("family".into(), family_summary(f));
    outputs.insert(
        "intersection_profile".into(),
        to_value(&intersection_profile(f)),
    );
    let mut all_true = true;
    let mut parameters = Map::new();
    if let Some(l) = l {
        let l: BTreeSet<usize> = l.into_iter().collect();
        let v = is_l_intersecting(f, &l);
        all_true &= v;
        parameters.insert("L".into(), to_value(&l));
        outputs.insert("l_intersecting".into(), v.into());
    }
    if let Some(d) = d {
        let v = is_d_intersecting(f, d);
        all_true &= v;
        parameters.insert("d".into(), d.into());
        outputs.insert("d_intersecting".into(), v.into());
    }
    if let Some(n) = uniform {
        let v = f.iter().all(|s| s.len() == n);
        all_true &= v;
        parameters.insert("uniform".into(), n.into());
        outputs.insert("uniform".into(), v.into());
    }
    Ok(Output::Report {
        subcommand: "check",
        digest: Some(input.digest),
        parameters: parameters.into(),
        outputs: outputs.into(),
        seeds: vec![],
        code: if all_true { EXIT_OK } else { EXIT_FALSE },
    })
}

fn cmd_find(
    file: &PathBuf,
    r: usize,
    strategy: StrategyArg,
    budget: u64,
) -> Result<Output, Failure> {
    let input = read_family(file)?;
    let report = find_any(&input.parsed.family, r, strategy.into(), budget)?;
    let code = match report.outcome {
        FindOutcome::Found { .. } => EXIT_OK,
        FindOutcome::Absent => EXIT_FALSE,
        FindOutcome::Unknown { .. } => EXIT_UNKNOWN,
    };
    Ok(Output::Report {
        subcommand: "find",
        digest: Some(input.digest),
        parameters: json!({ "r": r, "strategy": to_value(&Strategy::from(strategy)), "budget": budget }),
        outputs: to_value(&report),
        seeds: vec![],
        code,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    which: Which,
    n: Option<u64>,
    r: Option<u64>,
    s: Option<u64>,
    l: Option<Vec<u64>>,
    d: Option<u64>,
    c: &str,
    log_base: &str,
) -> Result<Output, Failure> {
    let c = rational_arg("C", c)?;
    let base = LogBase::parse(log_base)?;
    let l: Option<BTreeSet<u64>> = l.map(|v| v.into_iter().collect());
    let one = |w: Which, label: &str| -> Result<Value, Failure> {
        Ok(match w {
            Which::Er => to_value(&bounds::er_report(
                need(n, "-n", label)?,
                need(r, "-r", label)?,
            )?),
            Which::M => to_value(&bounds::m_report(
                need(n, "-n", label)?,
                need(r, "-r", label)?,
            )?),
            Which::Theorem1 => to_value(&bounds::theorem1_report(
                need(n, "-n", label)?,
                need(s, "-s", label)?,
                need(r, "-r", label)?,
            )?),
            Which::Claim1 => {
                let l = l
                    .as_ref()
                    .ok_or_else(|| Failure::usage(format!("--which {label} needs --L")))?;
                to_value(&bounds::claim1_report(
                    need(n, "-n", label)?,
                    l,
                    need(r, "-r", label)?,
                )?)
            }
            Which::Gh => to_value(&bounds::gh_bound(
                need(n, "-n", label)?,
                need(s, "-s", label)?,
            )?),
            Which::Alwz => to_value(&bounds::alwz_form(
                need(n, "-n", label)?,
                need(r, "-r", label)?,
                &c,
                &base,
            )?),
            Which::Theorem2 => to_value(&bounds::theorem2_bound(
                need(n, "-n", label)?,
                need(d, "-d", label)?,
                need(r, "-r", label)?,
                &c,
                &base,
            )?),
            Which::Trivial => to_value(&bounds::trivial_d_report(
                need(n, "-n", label)?,
                need(d, "-d", label)?,
                need(r, "-r", label)?,
            )?),
            Which::Crossover => to_value(&bounds::crossover_report(
                need(n, "-n", label)?,
                need(r, "-r", label)?,
                &c,
                &base,
            )?),
            Which::All => unreachable!("expanded by the caller"),
        })
    };
    let outputs = if which == Which::All {
        let mut table = Vec::new();
        let mut skipped = Vec::new();
        let kinds = [
            (Which::Er, "er"),
            (Which::M, "m"),
            (Which::Theorem1, "theorem1"),
            (Which::Claim1, "claim1"),
            (Which::Gh, "gh"),
            (Which::Alwz, "alwz"),
            (Which::Theorem2, "theorem2"),
            (Which::Trivial, "trivial"),
        ];
        for (w, label) in kinds {
            match one(w, label) {
                Ok(v) => table.push(v),
                Err(f) => skipped.push(json!({ "which": label, "reason": f.message })),
            }
        }
        let crossover = match one(Which::Crossover, "crossover") {
            Ok(v) => v,
            Err(f) => {
                skipped.push(json!({ "which": "crossover", "reason": f.message }));
                Value::Null
            }
        };
        json!({ "bounds": table, "crossover": crossover, "skipped": skipped })
    } else {
        let label = which
            .to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string();
        one(which, &label)?
    };
    Ok(Output::Report {
        subcommand: "bounds",
        digest: None,
        parameters: json!({
            "which": which.to_possible_value().map(|v| v.get_name().to_string()),
            "n": n, "r": r, "s": s, "L": l, "d": d,
            "C": format_rational(&c), "log_base": base.label(),
        }),
        outputs,
        seeds: vec![],
        code: EXIT_OK,
    })
}

fn check_alpha(alpha: &BigRational) -> Result<(), Failure> {
    if alpha.is_positive() && alpha < &BigRational::one() {
        Ok(())
    } else {
        Err(Failure::usage("alpha must lie strictly between 0 and 1"))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_spread(
    file: &PathBuf,
    kappa: Option<String>,
    d: Option<usize>,
    alpha: Option<String>,
    r: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
) -> Result<Output, Failure> {
    let input = read_family(file)?;
    let f = &input.parsed.family;
    if trials.is_some() && seed.is_none() {
        return Err(Failure::usage(
            "sampling is randomized and needs an explicit --seed",
        ));
    }
    if d.is_some() && kappa.is_none() {
        return Err(Failure::usage("-d needs --kappa"));
    }
    let mut outputs = Map::new();
    let mut parameters = Map::new();
    let mut code = EXIT_OK;
    outputs.insert("family".into(), family_summary(f));
    let uniform_nonempty = !f.is_empty() && f.uniformity().is_some_and(|n| n > 0);
    if uniform_nonempty {
        outputs.insert("kappa_supremum".into(), to_value(&spread_kappa(f)?));
    }
    if let Some(k) = &kappa {
        let k = rational_arg("kappa", k)?;
        parameters.insert("kappa".into(), format_rational(&k).into());
        let spread = is_kappa_spread(f, &k)?;
        if !spread {
            code = EXIT_FALSE;
        }
        outputs.insert("kappa_spread".into(), spread.into());
        if let Some(d) = d {
            parameters.insert("d".into(), d.into());
            outputs.insert("spread_link".into(), to_value(&find_spread_link(f, &k, d)?));
        }
    }
    let sampling = trials
        .zip(seed)
        .map(|(trials, seed)| SampleConfig { trials, seed });
    if let Some(cfg) = sampling {
        parameters.insert("trials".into(), cfg.trials.into());
    }
    if let Some(a) = &alpha {
        let a = rational_arg("alpha", a)?;
        check_alpha(&a)?;
        parameters.insert("alpha".into(), format_rational(&a).into());
        let mut sat = Map::new();
        if f.ground_size() <= EXACT_BUDGET {
            let p = exact_satisfying(f, &a)?;
            sat.insert("exact".into(), format_rational(&p).into());
            sat.insert("exact_approx".into(), rational_to_f64(&p).into());
        }
        if let Some(cfg) = sampling {
            sat.insert(
                "sampled".into(),
                to_value(&sample_satisfying(f, &a, cfg.trials, cfg.seed)?),
            );
        }
        outputs.insert("satisfying".into(), sat.into());
    }
    if let Some(r) = r {
        parameters.insert("r".into(), r.into());
        let rep = check_satisfying_disjoint(f, r, sampling)?;
        if !rep.consistent {
            code = EXIT_INTERNAL;
        }
        outputs.insert("disjoint_check".into(), to_value(&rep));
    }
    Ok(Output::Report {
        subcommand: "spread",
        digest: Some(input.digest),
        parameters: parameters.into(),
        outputs: outputs.into(),
        seeds: seed.into_iter().collect(),
        code,
    })
}

/// `lo, lo+step, …` up to and including `hi`, exactly.
pub fn parse_grid(spec: &str) -> Result<Vec<BigRational>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(Failure::usage(format!(
            "--alpha-grid {spec:?}: expected lo:hi:step"
        )));
    };
    let (lo, hi, step) = (
        rational_arg("alpha-grid", lo)?,
        rational_arg("alpha-grid", hi)?,
        rational_arg("alpha-grid", step)?,
    );
    if !step.is_positive() || hi < lo {
        return Err(Failure::usage("--alpha-grid needs step > 0 and lo ≤ hi"));
    }
    let mut grid = Vec::new();
    let mut a = lo;
    while a <= hi {
        check_alpha(&a)?;
        grid.push(a.clone());
        a += &step;
        if grid.len() > 100_000 {
            return Err(Failure::usage("--alpha-grid has more than 100000 points"));
        }
    }
    Ok(grid)
}

fn cmd_experiment(
    file: &PathBuf,
    grid: &str,
    trials: u64,
    seed: Option<u64>,
    format: Format,
) -> Result<Output, Failure> {
    let seed = require_seed(seed, "experiment")?;
    let input = read_family(file)?;
    let f = &input.parsed.family;
    let alphas = parse_grid(grid)?;
    let exact_ok = f.ground_size() <= EXACT_BUDGET;
    let mut rows = Vec::with_capacity(alphas.len());
    let mut csv = String::from("alpha,estimate,stderr,exact\n");
    for a in &alphas {
        let est = sample_satisfying(f, a, trials, seed)?;
        let exact = if exact_ok {
            Some(rational_to_f64(&exact_satisfying(f, a)?))
        } else {
            None
        };
        let alpha = rational_to_f64(a);
        csv.push_str(&format!(
            "{alpha},{},{},{}\n",
            est.estimate,
            est.stderr,
            exact.map_or(String::new(), |e| e.to_string())
        ));
        rows.push(json!({
            "alpha": format_rational(a),
            "estimate": est.estimate,
            "stderr": est.stderr,
            "successes": est.successes,
            "exact": exact,
        }));
    }
    if format == Format::Text {
        return Ok(Output::Raw {
            text: csv,
            note: None,
        });
    }
    Ok(Output::Report {
        subcommand: "experiment",
        digest: Some(input.digest),
        parameters: json!({ "alpha_grid": grid, "trials": trials }),
        outputs: json!({ "rows": rows }),
        seeds: vec![seed],
        code: EXIT_OK,
    })
}

fn cmd_encode_audit(
    file: &PathBuf,
    px: usize,
    d: usize,
    deltas: &[String],
) -> Result<Output, Failure> {
    let input = read_family(file)?;
    let f = &input.parsed.family;
    let audit = audit_encoding_bound(f, px, d)?;
    let mut passed = audit.passed;
    let mut markov = Vec::new();
    for s in deltas {
        let delta = rational_arg("delta", s)?;
        if delta.is_zero() {
            return Err(Failure::usage("--delta must be positive"));
        }
        let m = audit_markov_step(f, px, &delta, d)?;
        passed &= m.check.passed();
        markov.push(to_value(&m));
    }
    Ok(Output::Report {
        subcommand: "encode-audit",
        digest: Some(input.digest),
        parameters: json!({ "px": px, "d": d, "delta": deltas }),
        outputs: json!({ "encoding": to_value(&audit), "markov": markov, "passed": passed }),
        seeds: vec![],
        code: if passed { EXIT_OK } else { EXIT_INTERNAL },
    })
}

fn cmd_gen(kind: GenKind, format: Format) -> Result<Output, Failure> {
    let spec = match kind {
        GenKind::Sunflower { core, petal, r } => GeneratorSpec::Sunflower { core, petal, r },
        GenKind::Transversal { blocks, block_size } => {
            GeneratorSpec::Transversal { blocks, block_size }
        }
        GenKind::AllKSubsets { x, k } => GeneratorSpec::AllKSubsets { x, k },
        GenKind::RandomUniform { x, n, count, seed } => GeneratorSpec::RandomUniform {
            x,
            n,
            count,
            seed: require_seed(seed, "gen random-uniform")?,
        },
        GenKind::RandomLIntersecting {
            x,
            n,
            target,
            l,
            seed,
            budget,
        } => GeneratorSpec::RandomLIntersecting {
            x,
            n,
            l: l.into_iter().collect(),
            target,
            seed: require_seed(seed, "gen random-l-intersecting")?,
            budget,
        },
        GenKind::SingleIntersection { n, t, count } => {
            GeneratorSpec::SingleIntersection { n, t, count }
        }
    };
    let (family, run) = spec.generate()?;
    let note = run.filter(|r| !r.reached_target).map(|r| {
        format!(
            "note: stopped after {} draws with {} of {} requested sets",
            r.attempts, r.produced, r.requested
        )
    });
    let text = match format {
        Format::Text => write_text(&family),
        Format::Json => write_json(&family, None),
    };
    Ok(Output::Raw { text, note })
}

fn dispatch(cmd: Command, format: Format) -> Result<Output, Failure> {
    match cmd {
        Command::Check {
            file,
            l,
            d,
            uniform,
        } => cmd_check(&file, l, d, uniform),
        Command::Find {
            file,
            r,
            strategy,
            budget,
        } => cmd_find(&file, r, strategy, budget),
        Command::Bounds {
            which,
            n,
            r,
            s,
            l,
            d,
            c,
            log_base,
        } => cmd_bounds(which, n, r, s, l, d, &c, &log_base),
        Command::Spread {
            file,
            kappa,
            d,
            alpha,
            r,
            trials,
            seed,
        } => cmd_spread(&file, kappa, d, alpha, r, trials, seed),
        Command::Experiment {
            file,
            alpha_grid,
            trials,
            seed,
        } => cmd_experiment(&file, &alpha_grid, trials, seed, format),
        Command::EncodeAudit { file, px, d, delta } => cmd_encode_audit(&file, px, d, &delta),
        Command::Gen { kind } => cmd_gen(kind, format),
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            Some(format!(
                "[{}]",
                items
                    .iter()
                    .map(|i| scalar(i).expect("scalar"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        }
        // arrays of flat arrays (sets) stay on one line
        Value::Array(items)
            if items.iter().all(|i| {
                i.as_array()
                    .is_some_and(|a| a.iter().all(|e| e.is_number()))
            }) =>
        {
            Some(format!(
                "[{}]",
                items
                    .iter()
                    .map(|i| scalar(i).expect("flat"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        }
        _ => None,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
            for (k, val) in map {
                match scalar(val) {
                    Some(s) => out.push_str(&format!("{pad}{k:<width$}  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(val, indent + 2, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}[{i}]  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        render(item, indent + 2, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).expect("scalar"))),
    }
}

/// Aligned text rendering of a JSON value.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}

/// Parses `args` (including the program name), runs the subcommand and writes
/// its output. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = stdout.write_all(text.as_bytes());
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    }
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let format = cli.format;
    let start = Instant::now();
    let result = match cli.threads {
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, format)),
            Err(e) => Err(Failure::internal(format!("cannot start thread pool: {e}"))),
        },
        None => dispatch(cli.command, format),
    };
    let written = match result {
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
        Ok(Output::Raw { text, note }) => {
            if let Some(note) = note {
                let _ = writeln!(stderr, "{note}");
            }
            stdout.write_all(text.as_bytes()).map(|_| EXIT_OK)
        }
        Ok(Output::Report {
            subcommand,
            digest,
            parameters,
            outputs,
            seeds,
            code,
        }) => {
            let report = RunReport {
                subcommand,
                input_digest: digest,
                parameters,
                outputs,
                seeds,
                wall_time_seconds: start.elapsed().as_secs_f64(),
            };
            let text = match format {
                Format::Json => {
                    serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
                }
                Format::Text => render_text(&to_value(&report)),
            };
            stdout.write_all(text.as_bytes()).map(|_| code)
        }
    };
    match written {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: writing output: {e}");
            EXIT_IO
        }
    }
}
