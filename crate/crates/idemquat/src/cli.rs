//! Command-line front end.
//!
//! Exit codes: 0 success (including "not factorizable" — a decision is data,
//! not an error), 2 usage or parse errors, 3 resource cap exceeded,
//! 4 internal verification failure (a witness failed re-verification; this
//! must never occur).

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use crate::census::formulas::{
    count_idempotents_formula, count_products_formula, example_formula_alpha,
    IdempotentCountVariant, ProductsVariant,
};
use crate::census::{brute_orbit_size, run_verification, Caps, CensusError, Target};
use crate::chainring::{ChainRing, RingError};
use crate::factorize::{is_product_of_idempotents, is_product_of_two_idempotents_mat};
use crate::mat2::{all_orbit_labels, format_mat2, gl2_order, orbit_size, parse_mat2, OrbitSizeVariant};
use crate::quaternion::{format_quaternion, parse_quaternion};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

const CAP_ENV_VAR: &str = "IDEMQUAT_CAP";

#[derive(Parser)]
#[command(
    name = "idemquat",
    version,
    about = "Exact censuses and idempotent factorization in quaternion and 2x2 matrix rings over finite chain rings"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    H,
    M2,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::H => Target::H,
            TargetArg::M2 => Target::M2,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InfoFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Ring parameters, unit count and the ideal chain |J^k|
    RingInfo {
        /// ring spec, e.g. zpn:p=3,n=2 or tp:p=3,r=2,n=2,f=t^2+1
        #[arg(long)]
        ring: String,
        #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
        format: InfoFormat,
    },
    /// Decide whether an element is a product of idempotents; on success
    /// emit a re-verified two-idempotent witness as JSON
    Factor {
        #[arg(long)]
        ring: String,
        /// quaternion literal `<e>+<e>i+<e>j+<e>k` or matrix literal
        /// `[[e,e],[e,e]]`
        #[arg(long)]
        element: String,
        /// claimed number of idempotent factors; recorded in the report,
        /// never changes the decision
        #[arg(long)]
        rbound: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive verification: brute-force censuses versus every formula
    /// variant, written as a JSON report
    Verify {
        #[arg(long)]
        ring: String,
        #[arg(long, value_enum, default_value_t = TargetArg::H)]
        target: TargetArg,
        /// maximum number of product rounds before giving up on stabilization
        #[arg(long, default_value_t = 8)]
        rmax: u32,
        /// carrier cap (elements); overrides IDEMQUAT_CAP and the 2^24 default
        #[arg(long)]
        cap: Option<u64>,
        /// pair-product budget; default 2^32
        #[arg(long)]
        pair_cap: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The verification report in CSV or JSON
    Census {
        #[arg(long)]
        ring: String,
        #[arg(long, value_enum, default_value_t = TargetArg::H)]
        target: TargetArg,
        #[arg(long, default_value_t = 8)]
        rmax: u32,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        pair_cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every orbit label with both size formulas and, when affordable, the
    /// exhaustive BFS size
    Orbits {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
        format: InfoFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every formula variant at (q, n, p) without enumeration;
    /// the values are hypotheses until `verify` adjudicates them
    Formulas {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
        format: InfoFormat,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Cap(String),
    Internal(String),
    Io(std::io::Error),
}

impl From<RingError> for CliError {
    fn from(e: RingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CensusError> for CliError {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            CensusError::Formula(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Parses argv and runs; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help/--version
        Err(e) => e.exit(),
    };
    // a panic past this point means a witness or invariant failed
    // re-verification, which the contract promises never happens
    let outcome = catch_unwind(AssertUnwindSafe(|| run(cli)));
    match outcome {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(CliError::Usage(msg))) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Ok(Err(CliError::Cap(msg))) => {
            eprintln!("error: {msg}");
            EXIT_CAP
        }
        Ok(Err(CliError::Internal(msg))) => {
            eprintln!("error: internal verification failure: {msg}");
            EXIT_INTERNAL
        }
        Ok(Err(CliError::Io(e))) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(_) => {
            eprintln!("error: internal verification failure");
            EXIT_INTERNAL
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn caps_from(cap: Option<u64>, pair_cap: Option<u64>) -> Caps {
    let mut caps = Caps::default();
    if let Ok(env_cap) = std::env::var(CAP_ENV_VAR) {
        if let Ok(v) = env_cap.parse::<u64>() {
            caps.carrier = v;
        }
    }
    if let Some(v) = cap {
        caps.carrier = v;
    }
    if let Some(v) = pair_cap {
        caps.pair_products = v;
    }
    caps
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RingInfo { ring, format } => ring_info(&ring, format),
        Command::Factor {
            ring,
            element,
            rbound,
            out,
        } => factor(&ring, &element, rbound, &out),
        Command::Verify {
            ring,
            target,
            rmax,
            cap,
            pair_cap,
            out,
        } => {
            let r = ChainRing::parse(&ring)?;
            let report = run_verification(&r, target.into(), rmax, &caps_from(cap, pair_cap))?;
            emit(&out, &report.to_json())
        }
        Command::Census {
            ring,
            target,
            rmax,
            cap,
            pair_cap,
            format,
            out,
        } => {
            let r = ChainRing::parse(&ring)?;
            let report = run_verification(&r, target.into(), rmax, &caps_from(cap, pair_cap))?;
            let content = match format {
                ReportFormat::Json => report.to_json(),
                ReportFormat::Csv => report.to_csv(),
            };
            emit(&out, &content)
        }
        Command::Orbits {
            ring,
            cap,
            format,
            out,
        } => orbits(&ring, cap, format, &out),
        Command::Formulas { q, n, p, format } => formulas(q, n, p, format),
    }
}

// ---------------------------------------------------------------------------
// ring-info
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RingInfo {
    ring: String,
    p: String,
    r: String,
    n: String,
    q: String,
    size: String,
    uniformizer: String,
    units: String,
    ideal_sizes: Vec<String>,
}

fn ring_info(spec: &str, format: InfoFormat) -> Result<(), CliError> {
    let ring = ChainRing::parse(spec)?;
    let info = RingInfo {
        ring: ring.spec().to_string(),
        p: ring.p().to_string(),
        r: ring.r().to_string(),
        n: ring.n().to_string(),
        q: ring.q().to_string(),
        size: ring.size().to_string(),
        uniformizer: ring.format_element(ring.uniformizer()),
        units: ring.units_count().to_string(),
        ideal_sizes: (0..=ring.n())
            .map(|k| (ring.q().pow(ring.n() - k)).to_string())
            .collect(),
    };
    match format {
        InfoFormat::Json => {
            let mut s = serde_json::to_string_pretty(&info).expect("serializable");
            s.push('\n');
            emit(&None, &s)
        }
        InfoFormat::Text => {
            let mut s = String::new();
            s.push_str(&format!("ring: {}\n", info.ring));
            s.push_str(&format!("p: {}  r: {}  n: {}  q: {}\n", info.p, info.r, info.n, info.q));
            s.push_str(&format!("size: {}\n", info.size));
            s.push_str(&format!("uniformizer: {}\n", info.uniformizer));
            s.push_str(&format!("units: {}\n", info.units));
            for (k, sz) in info.ideal_sizes.iter().enumerate() {
                s.push_str(&format!("|J^{k}|: {sz}\n"));
            }
            emit(&None, &s)
        }
    }
}

// ---------------------------------------------------------------------------
// factor
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FactorOutput {
    ring: String,
    element: String,
    kind: String,
    decision: bool,
    e1: Option<String>,
    e2: Option<String>,
    conjugators: Vec<String>,
    verified: Option<bool>,
    r_bound: Option<u32>,
}

fn factor(
    spec: &str,
    element: &str,
    rbound: Option<u32>,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let ring = ChainRing::parse(spec)?;
    let compact: String = element.chars().filter(|c| !c.is_whitespace()).collect();
    let output = if compact.starts_with("[[") {
        let m = parse_mat2(&ring, element)?;
        match is_product_of_two_idempotents_mat(&ring, m) {
            Some(w) => {
                if !w.verify(&ring, m) {
                    return Err(CliError::Internal("matrix witness".into()));
                }
                FactorOutput {
                    ring: ring.spec().to_string(),
                    element: format_mat2(&ring, &m),
                    kind: "matrix".into(),
                    decision: true,
                    e1: Some(format_mat2(&ring, &w.e1)),
                    e2: Some(format_mat2(&ring, &w.e2)),
                    conjugators: w.conjugators.iter().map(|c| format_mat2(&ring, c)).collect(),
                    verified: Some(true),
                    r_bound: rbound,
                }
            }
            None => FactorOutput {
                ring: ring.spec().to_string(),
                element: format_mat2(&ring, &m),
                kind: "matrix".into(),
                decision: false,
                e1: None,
                e2: None,
                conjugators: Vec::new(),
                verified: None,
                r_bound: rbound,
            },
        }
    } else {
        let x = parse_quaternion(&ring, element)?;
        match is_product_of_idempotents(&ring, x, rbound) {
            Some(w) => {
                if !w.verify(&ring, x) {
                    return Err(CliError::Internal("quaternion witness".into()));
                }
                FactorOutput {
                    ring: ring.spec().to_string(),
                    element: format_quaternion(&ring, &x),
                    kind: "quaternion".into(),
                    decision: true,
                    e1: Some(format_quaternion(&ring, &w.e1)),
                    e2: Some(format_quaternion(&ring, &w.e2)),
                    conjugators: w.conjugators.iter().map(|c| format_mat2(&ring, c)).collect(),
                    verified: Some(true),
                    r_bound: rbound,
                }
            }
            None => FactorOutput {
                ring: ring.spec().to_string(),
                element: format_quaternion(&ring, &x),
                kind: "quaternion".into(),
                decision: false,
                e1: None,
                e2: None,
                conjugators: Vec::new(),
                verified: None,
                r_bound: rbound,
            },
        }
    };
    let mut s = serde_json::to_string_pretty(&output).expect("serializable");
    s.push('\n');
    emit(out, &s)
}

// ---------------------------------------------------------------------------
// orbits
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OrbitsOutput {
    ring: String,
    orbits: Vec<OrbitLine>,
}

#[derive(Serialize)]
struct OrbitLine {
    label: String,
    size_statement: String,
    size_proof: String,
    size_brute: Option<String>,
}

fn orbits(
    spec: &str,
    cap: Option<u64>,
    format: InfoFormat,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let ring = ChainRing::parse(spec)?;
    let caps = caps_from(cap, None);
    let carrier = (ring.size() as u128).pow(4);
    let affordable = carrier <= caps.carrier as u128;
    let mut lines = Vec::new();
    for label in all_orbit_labels(&ring) {
        let brute = if affordable {
            Some(brute_orbit_size(&ring, &label, &caps)?.to_string())
        } else {
            None
        };
        lines.push(OrbitLine {
            label: label.format(&ring),
            size_statement: orbit_size(&ring, &label, OrbitSizeVariant::Statement).to_string(),
            size_proof: orbit_size(&ring, &label, OrbitSizeVariant::Proof).to_string(),
            size_brute: brute,
        });
    }
    let output = OrbitsOutput {
        ring: ring.spec().to_string(),
        orbits: lines,
    };
    match format {
        InfoFormat::Json => {
            let mut s = serde_json::to_string_pretty(&output).expect("serializable");
            s.push('\n');
            emit(out, &s)
        }
        InfoFormat::Text => {
            let mut s = format!("ring: {}\n", output.ring);
            s.push_str("label\tstatement\tproof\tbrute\n");
            for line in &output.orbits {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    line.label,
                    line.size_statement,
                    line.size_proof,
                    line.size_brute.as_deref().unwrap_or("-")
                ));
            }
            emit(out, &s)
        }
    }
}

// ---------------------------------------------------------------------------
// formulas
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FormulasOutput {
    q: String,
    n: String,
    p: String,
    gl2: String,
    idempotents_paper: String,
    idempotents_alt: String,
    products_closed_form: String,
    products_orbitsum_statement: String,
    products_orbitsum_proof: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    example_alpha: Option<String>,
    note: String,
}

fn formulas(q: u64, n: u32, p: u64, format: InfoFormat) -> Result<(), CliError> {
    if n < 1 {
        return Err(CliError::Usage("n must be >= 1".into()));
    }
    if !is_prime_power_of(q, p) {
        return Err(CliError::Usage(format!("q={q} is not a power of p={p}")));
    }
    let eval = |v: ProductsVariant| -> Result<BigUint, CliError> {
        count_products_formula(q, n, v).map_err(|e| CliError::Internal(e.to_string()))
    };
    let output = FormulasOutput {
        q: q.to_string(),
        n: n.to_string(),
        p: p.to_string(),
        gl2: gl2_order(q, n).to_string(),
        idempotents_paper: count_idempotents_formula(q, n, p, IdempotentCountVariant::Cubic)
            .to_string(),
        idempotents_alt: count_idempotents_formula(q, n, p, IdempotentCountVariant::Quadratic)
            .to_string(),
        products_closed_form: eval(ProductsVariant::Closed)?.to_string(),
        products_orbitsum_statement: eval(ProductsVariant::OrbitsumStatement)?.to_string(),
        products_orbitsum_proof: eval(ProductsVariant::OrbitsumProof)?.to_string(),
        example_alpha: if q == 3 {
            Some(
                example_formula_alpha(n)
                    .map_err(|e| CliError::Internal(e.to_string()))?
                    .to_string(),
            )
        } else {
            None
        },
        note: if p == 2 {
            "formula hypotheses only; `verify` adjudicates them against brute force; \
             p=2: H(R) is local with exactly 2 idempotent products, the product \
             values above apply to the matrix side only"
                .into()
        } else {
            "formula hypotheses only; `verify` adjudicates them against brute force".into()
        },
    };
    match format {
        InfoFormat::Json => {
            let mut s = serde_json::to_string_pretty(&output).expect("serializable");
            s.push('\n');
            emit(&None, &s)
        }
        InfoFormat::Text => {
            let mut s = String::new();
            s.push_str(&format!("q={} n={} p={}\n", output.q, output.n, output.p));
            s.push_str(&format!("gl2: {}\n", output.gl2));
            s.push_str(&format!("idempotents (paper): {}\n", output.idempotents_paper));
            s.push_str(&format!("idempotents (alt): {}\n", output.idempotents_alt));
            s.push_str(&format!("products (closed_form): {}\n", output.products_closed_form));
            s.push_str(&format!(
                "products (orbitsum_statement): {}\n",
                output.products_orbitsum_statement
            ));
            s.push_str(&format!(
                "products (orbitsum_proof): {}\n",
                output.products_orbitsum_proof
            ));
            if let Some(alpha) = &output.example_alpha {
                s.push_str(&format!("products (alpha polynomial, q=3): {alpha}\n"));
            }
            s.push_str(&format!("note: {}\n", output.note));
            emit(&None, &s)
        }
    }
}

fn is_prime_power_of(mut q: u64, p: u64) -> bool {
    if p < 2 || q < 2 {
        return false;
    }
    while q.is_multiple_of(p) {
        q /= p;
    }
    q == 1
}
