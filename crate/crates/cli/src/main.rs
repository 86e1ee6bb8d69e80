use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use ilrs::certify::{CheckStatus, SymbolicConstant};
use ilrs::trace::{FloorPow, DEFAULT_TOLERANCE_BITS};
use ilrs::{
    certify_divisibility, certify_pisot_floor, certify_prime_free_interval, delta_estimate,
    eval_chain_mod, theta, verify_certificate, Certificate, CertificateDocument, Config, Context,
    Error, PisotSalem, SequenceFile,
};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "ilrs", version, about = "Periods, period towers and compositeness certificates for iterated linear recurrences")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Sequence-definition file; built-in names are always available.
    #[arg(long, global = true, env = "ILRS_SEQUENCES")]
    sequences: Option<PathBuf>,
    /// Persistent period cache.
    #[arg(long, global = true, env = "ILRS_CACHE")]
    cache: Option<PathBuf>,
    /// Search bound for smallest prime factors.
    #[arg(long, global = true, env = "ILRS_BOUND", default_value_t = 1_000_000)]
    bound: u64,
    /// Values of n re-checked by verification.
    #[arg(long, global = true, env = "ILRS_CHECKS", default_value_t = 3)]
    checks: u64,
    /// Combine per-prime periods by product instead of lcm.
    #[arg(long, global = true, env = "ILRS_STRICT_PAPER")]
    strict_paper: bool,
    #[arg(long, global = true, env = "ILRS_EPSILON", default_value_t = 1e-4)]
    epsilon: f64,
    /// Working precision in bits for root isolation.
    #[arg(long, global = true, env = "ILRS_PRECISION", default_value_t = 256)]
    precision: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Preperiod and period of a sequence modulo q.
    Period { sequence: String, q: u64 },
    /// f(n) mod q for a chain, through its period tower.
    EvalMod { chain: String, n: BigUint, q: u64 },
    /// Build a certificate.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Re-check a certificate document.
    Verify { path: PathBuf },
    /// Chebyshev's theta function.
    Theta { x: f64 },
    /// Main term of the prime-free half-width around |f(n)|.
    Delta {
        n: BigUint,
        /// Product of the orders d_0 ... d_M.
        #[arg(long = "order-product", short = 'D')]
        order_product: u64,
    },
    /// Pisot/Salem classification of a monic polynomial.
    Classify { poly: String },
    /// floor(alpha^N), its trace and offset.
    FloorPow { poly: String, n: u64 },
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// p_h | f(L n + m) + h for |h| <= H.
    Divisibility {
        #[arg(long)]
        chain: String,
        #[arg(long = "h")]
        h: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Prime-free intervals of half-width |f(m)| - 2.
    Interval {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        m: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// floor(alpha^U(L n + m)) + h composite for |h| <= H'.
    PisotFloor {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        inner: String,
        #[arg(long = "h", default_value_t = 0)]
        h: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::HTooLarge(_) => Some("choose a larger m or a smaller H"),
        Error::NoFactorFound { .. } => Some("raise --bound or change m"),
        Error::IndexBelowTowerStart { .. } => Some("raise m to at least the reported tower start"),
        Error::BudgetExceeded(_) => Some("lower m or n; exact values above the budget are not formed"),
        Error::PrecisionInsufficient(_) => Some("raise --precision"),
        Error::NonMonotoneEvidence(_) => Some("change m or the initial terms"),
        Error::UnknownName(_) => Some("define it in the --sequences file or use a built-in name"),
        _ => None,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(h) = hint(&e) {
        eprintln!("hint: {h}");
    }
    ExitCode::from(match e {
        Error::BudgetExceeded(_) | Error::PrecisionInsufficient(_) => EXIT_BUDGET,
        _ => EXIT_INPUT,
    })
}

fn context(g: &Global) -> ilrs::Result<Context> {
    let config = Config {
        factor_bound: g.bound,
        strict_paper: g.strict_paper,
        epsilon: g.epsilon,
        precision: g.precision,
        tolerance_bits: DEFAULT_TOLERANCE_BITS,
        ..Config::default()
    };
    match &g.cache {
        Some(p) => Context::with_cache_file(config, p),
        None => Ok(Context::new(config)),
    }
}

fn emit(cert: Certificate, output: Option<PathBuf>, g: &Global, ctx: &Context) -> ilrs::Result<ExitCode> {
    let mut doc = CertificateDocument::new(cert, &ctx.config);
    let report = verify_certificate(&doc.certificate, g.checks, ctx);
    if g.checks > 0 {
        doc.stamp(&report, g.checks);
    }
    match output {
        Some(path) => {
            doc.write(&path)?;
            println!("{}", doc.metadata.claim);
            println!("written to {}", path.display());
        }
        None => print!("{}", doc.to_canonical_json()),
    }
    if !report.passed() {
        for c in report.failures() {
            eprintln!("self-check failed: {} {}", c.claim, c.detail);
        }
        return Ok(ExitCode::from(EXIT_VERIFY_FAILED));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_floor(fp: &FloorPow, n: u64) {
    println!("floor(alpha^{n}) = {}", fp.floor);
    println!("trace = {}", fp.trace);
    println!("g = {}", fp.g);
}

fn run(cli: Cli) -> ilrs::Result<ExitCode> {
    let g = &cli.global;
    let ctx = context(g)?;
    let file = match &g.sequences {
        Some(p) => SequenceFile::load(p)?,
        None => SequenceFile::builtin(),
    };
    match cli.command {
        Command::Period { sequence, q } => {
            let spec = file.sequence(&sequence)?;
            let info = ctx.period(spec, q)?;
            println!("s={} L={}", info.s, info.period);
            if info.bound_check {
                println!("s, L <= q^d: checked");
            } else {
                println!("s, L <= q^d: q^d too large to check");
            }
            if spec.is_reversible() {
                println!("reversible: preperiod 1 expected");
            }
        }
        Command::EvalMod { chain, n, q } => {
            let chain = file.chain(&chain)?;
            println!("{}", eval_chain_mod(&chain, &n, q, None, &ctx)?);
        }
        Command::Certify(cmd) => {
            let (cert, output) = match cmd {
                CertifyCmd::Divisibility { chain, h, m, output } => {
                    let chain = file.chain(&chain)?;
                    (Certificate::Divisibility(certify_divisibility(&chain, h, m, &ctx)?), output)
                }
                CertifyCmd::Interval { chain, m, output } => {
                    let chain = file.chain(&chain)?;
                    (Certificate::PrimeFreeInterval(certify_prime_free_interval(&chain, m, &ctx)?), output)
                }
                CertifyCmd::PisotFloor { poly, inner, h, m, output } => {
                    let poly = file.poly(&poly)?;
                    let inner = file.chain(&inner)?;
                    (Certificate::PisotFloor(certify_pisot_floor(&poly, &inner, h, m, &ctx)?), output)
                }
            };
            return emit(cert, output, g, &ctx);
        }
        Command::Verify { path } => {
            let doc = CertificateDocument::read(&path)?;
            let report = verify_certificate(&doc.certificate, g.checks, &ctx);
            println!("{}", doc.metadata.claim);
            for c in report.failures() {
                let at = match (c.n, c.h) {
                    (Some(n), Some(h)) => format!(" (n = {n}, h = {h})"),
                    (Some(n), None) => format!(" (n = {n})"),
                    (None, Some(h)) => format!(" (h = {h})"),
                    (None, None) => String::new(),
                };
                println!("FAIL {}{at}: {}", c.claim, c.detail);
            }
            println!(
                "{} passed, {} failed, {} skipped",
                report.count(CheckStatus::Pass),
                report.count(CheckStatus::Fail),
                report.count(CheckStatus::Skipped)
            );
            if report.checks.is_empty() {
                println!("nothing checked (--checks 0)");
            }
            if !report.passed() {
                return Ok(ExitCode::from(EXIT_VERIFY_FAILED));
            }
            println!("verified");
        }
        Command::Theta { x } => {
            let t = theta(x)?;
            println!("theta({x}) = {t:.6}");
            if x > 0.0 {
                println!("theta({x})/{x} = {:.6}", t / x);
            }
        }
        Command::Delta { n, order_product } => {
            let e = delta_estimate(&n, order_product, g.epsilon)?;
            println!("delta = {:.6} (main term only)", e.main_term);
            println!("c = {} - {} = {}", e.c_fraction, e.epsilon, e.c_display());
            if order_product % 4 == 0 {
                let s = SymbolicConstant::for_known_orders(4, "d");
                println!("with D = 4 d: c = {s}");
            }
        }
        Command::Classify { poly } => {
            let poly = file.poly(&poly)?;
            let c = ilrs::classify(&poly, g.precision)?;
            println!("{poly}: {}", c.kind);
            println!("dominant root {}", c.dominant_root);
            for m in &c.conjugate_moduli {
                println!("conjugate modulus {m}");
            }
            if !poly.irreducible_asserted() {
                println!("irreducibility not asserted");
            }
        }
        Command::FloorPow { poly, n } => {
            let poly = file.poly(&poly)?;
            let ps = PisotSalem::new(&poly, g.precision, DEFAULT_TOLERANCE_BITS)?;
            print_floor(&ps.floor_pow(n, &ctx.config.budget)?, n);
            let b = ps.offset_bound(n.max(1));
            println!("|g| <= G = {} for exponents >= {}", b.bound, b.n_min);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(cli).unwrap_or_else(fail)
}
