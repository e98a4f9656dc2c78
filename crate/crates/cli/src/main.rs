//! `diagwalk` command-line front end.
//!
//! Exit codes: 0 on success, 1 when the computation itself fails (for
//! example a recurrent lattice, or a failed invariant check) and 2 for
//! malformed requests.

mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diagwalk_core::check::{self, CheckReport};
use diagwalk_core::{
    absorption_probs, fundamental_matrix_green, green, halfplane_green, lattice_green_nd,
    mc_expected_departures, mc_return_prob, return_constant, return_prob_finite, DomainSpec, Error,
    LatticePoint, McConfig, QuadratureSpec, ReturnStyle,
};

use output::{CheckRow, OutputRecord, PointValue, Request};

#[derive(Parser, Debug)]
#[command(name = "diagwalk", version, about = "Green's functions and absorption for diagonal random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected departures F_source(target).
    Green(GreenArgs),
    /// Absorption probabilities over the boundary of a finite domain.
    Absorb(AbsorbArgs),
    /// Return probability on a full lattice or inside a finite domain.
    ReturnProb(ReturnArgs),
    /// Ground-truth engines: linear solve or Monte Carlo.
    Oracle(OracleArgs),
    /// Invariant suite on one domain, or on the built-in sample.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DomainKind {
    Rect,
    Semistrip,
    Strip,
    Halfplane,
    Block,
    Lattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Style {
    Diagonal,
    Regular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleMethod {
    /// Direct solve of the absorbing-chain equations.
    Matrix,
    /// Monte Carlo expected departures.
    Mc,
    /// Monte Carlo return probability on the full lattice.
    McReturn,
}

#[derive(Args, Debug, Clone)]
struct DomainArgs {
    #[arg(long, value_enum)]
    domain: Option<DomainKind>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Lattice dimension.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Leave out the wall-time field so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct GreenArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Comma-separated coordinates; defaults to the origin on the lattice.
    #[arg(long, allow_hyphen_values = true)]
    source: Option<LatticePoint>,
    #[arg(long, allow_hyphen_values = true)]
    target: LatticePoint,
    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct AbsorbArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, allow_hyphen_values = true)]
    source: LatticePoint,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ReturnArgs {
    #[arg(long, value_enum)]
    style: Option<Style>,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, allow_hyphen_values = true)]
    source: Option<LatticePoint>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "matrix")]
    method: OracleMethod,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, allow_hyphen_values = true)]
    source: Option<LatticePoint>,
    /// Without a target the matrix method prints the whole row.
    #[arg(long, allow_hyphen_values = true)]
    target: Option<LatticePoint>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    out: OutputArgs,
}

/// A failure with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

type Outcome = Result<(OutputRecord, Format), Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

impl DomainArgs {
    fn build(&self) -> Result<DomainSpec, Failure> {
        let Some(kind) = self.domain else {
            return usage("--domain is required");
        };
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| Failure::Usage(format!("--domain {} needs --{flag}", kind_name(kind))))
        };
        let dom = match kind {
            DomainKind::Rect => DomainSpec::rectangle(need(self.m, "m")?, need(self.n, "n")?),
            DomainKind::Semistrip => DomainSpec::semi_strip(need(self.m, "m")?),
            DomainKind::Strip => DomainSpec::infinite_strip(need(self.m, "m")?),
            DomainKind::Halfplane => Ok(DomainSpec::HalfPlane2D),
            DomainKind::Block => DomainSpec::block(
                need(self.l, "l")?,
                need(self.m, "m")?,
                need(self.n, "n")?,
            ),
            DomainKind::Lattice => DomainSpec::full_lattice(need(self.dim, "dim")?),
        }?;
        Ok(dom)
    }

    fn build_optional(&self) -> Result<Option<DomainSpec>, Failure> {
        if self.domain.is_none() {
            return Ok(None);
        }
        self.build().map(Some)
    }
}

fn kind_name(kind: DomainKind) -> &'static str {
    match kind {
        DomainKind::Rect => "rect",
        DomainKind::Semistrip => "semistrip",
        DomainKind::Strip => "strip",
        DomainKind::Halfplane => "halfplane",
        DomainKind::Block => "block",
        DomainKind::Lattice => "lattice",
    }
}

fn quad_spec(tol: Option<f64>, dim: usize) -> Result<QuadratureSpec, Failure> {
    match tol {
        Some(t) => Ok(QuadratureSpec::with_tol(t)?),
        None => Ok(QuadratureSpec::default_for_dim(dim)),
    }
}

fn required(p: &Option<LatticePoint>, flag: &str) -> Result<LatticePoint, Failure> {
    p.clone().ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn run_green(args: &GreenArgs) -> Outcome {
    let dom = args.domain.build()?;
    let tgt = &args.target;
    dom.check_dim(tgt)?;
    let src = match (&args.source, dom) {
        (Some(s), _) => s.clone(),
        (None, DomainSpec::FullLattice { d }) => LatticePoint::origin(d),
        (None, _) => return usage("--source is required"),
    };
    dom.check_dim(&src)?;
    let mut req = Request::for_domain(&dom);
    req.source = Some(src.coords().to_vec());
    req.target = Some(tgt.coords().to_vec());

    let mut record = match dom {
        DomainSpec::HalfPlane2D => {
            let spec = quad_spec(args.tol, 2)?;
            req.set_quadrature("quadrature", &spec);
            dom.require_interior(&src)?;
            let (s, t) = (src.coords(), tgt.coords());
            let r = halfplane_green(s[0], t[0], t[1] - s[1], &spec)?;
            OutputRecord::quadrature("green", req, r)
        }
        DomainSpec::FullLattice { d } => {
            let spec = quad_spec(args.tol, d)?;
            req.set_quadrature("quadrature", &spec);
            let r = lattice_green_nd(&tgt.displacement(&src), &spec)?;
            OutputRecord::quadrature("green", req, r)
        }
        _ => {
            req.method = Some("series".into());
            let v = green(&dom, &src, tgt)?;
            OutputRecord::new("green", req, v)
        }
    };
    record.metadata.exact = Some(record.error_estimate.is_none());
    Ok((record, args.out.format))
}

fn run_absorb(args: &AbsorbArgs) -> Outcome {
    let dom = args.domain.build()?;
    let map = absorption_probs(&dom, &args.source)?;
    let mut req = Request::for_domain(&dom);
    req.source = Some(args.source.coords().to_vec());
    req.method = Some("series".into());
    let mut record = OutputRecord::new("absorb", req, map.total());
    record.entries = Some(
        map.entries()
            .iter()
            .map(|(x, v)| PointValue::probability(x, *v))
            .collect(),
    );
    Ok((record, args.out.format))
}

fn run_return(args: &ReturnArgs) -> Outcome {
    let dom = args.domain.build_optional()?;
    match (args.style, dom) {
        (Some(style), None) => {
            let (style, dim) = match style {
                Style::Diagonal => {
                    let d = args.domain.dim.unwrap_or(3);
                    (ReturnStyle::Diagonal(d), d)
                }
                Style::Regular => {
                    if args.domain.dim.is_some_and(|d| d != 3) {
                        return usage("--style regular is the three-dimensional cubic lattice");
                    }
                    (ReturnStyle::Regular3D, 3)
                }
            };
            let spec = quad_spec(args.tol, dim)?;
            let rc = return_constant(style, &spec)?;
            let mut req = Request {
                style: Some(if matches!(style, ReturnStyle::Regular3D) { "regular" } else { "diagonal" }.into()),
                dim: Some(dim),
                ..Request::default()
            };
            req.set_quadrature("quadrature", &spec);
            Ok((OutputRecord::return_constant(req, rc), args.out.format))
        }
        (None, Some(dom)) => {
            let src = required(&args.source, "source")?;
            let p = return_prob_finite(&dom, &src)?;
            let mut req = Request::for_domain(&dom);
            req.source = Some(src.coords().to_vec());
            req.method = Some("series".into());
            Ok((OutputRecord::new("return-prob", req, p), args.out.format))
        }
        (Some(_), Some(_)) => usage("give either --style or --domain, not both"),
        (None, None) => usage("give --style diagonal|regular or a finite --domain"),
    }
}

fn run_oracle(args: &OracleArgs) -> Outcome {
    let cfg = McConfig::new(args.trials, args.seed, args.max_steps)?;
    match args.method {
        OracleMethod::Matrix => {
            let dom = args.domain.build()?;
            let src = required(&args.source, "source")?;
            dom.check_dim(&src)?;
            let row = fundamental_matrix_green(&dom, &src)?;
            let mut req = Request::for_domain(&dom);
            req.source = Some(src.coords().to_vec());
            req.method = Some("fundamental-matrix".into());
            let mut record = match &args.target {
                Some(tgt) => {
                    dom.check_dim(tgt)?;
                    req.target = Some(tgt.coords().to_vec());
                    let v = row.iter().find(|(x, _)| x == tgt).map(|(_, v)| *v);
                    let v = match v {
                        Some(v) => v,
                        None if dom.is_interior(tgt)? => unreachable!("row covers the interior"),
                        // boundary or outside: F is 0 there
                        None => match diagwalk_core::classify_point(&dom, tgt)? {
                            diagwalk_core::PointClass::Boundary => 0.0,
                            _ => return Err(Error::NotInterior(tgt.clone()).into()),
                        },
                    };
                    OutputRecord::new("oracle", req, v)
                }
                None => {
                    let total = row.iter().map(|(_, v)| v).sum();
                    let mut r = OutputRecord::new("oracle", req, total);
                    r.row = Some(row.iter().map(|(x, v)| PointValue::value(x, *v)).collect());
                    r
                }
            };
            record.metadata.exact = Some(true);
            Ok((record, args.out.format))
        }
        OracleMethod::Mc => {
            let dom = args.domain.build()?;
            let src = required(&args.source, "source")?;
            let tgt = required(&args.target, "target")?;
            dom.check_dim(&src)?;
            dom.check_dim(&tgt)?;
            let est = mc_expected_departures(&dom, &src, &tgt, &cfg)?;
            let mut req = Request::for_domain(&dom);
            req.source = Some(src.coords().to_vec());
            req.target = Some(tgt.coords().to_vec());
            req.set_monte_carlo("monte-carlo", &cfg);
            Ok((OutputRecord::monte_carlo("oracle", req, est), args.out.format))
        }
        OracleMethod::McReturn => {
            let d = match (args.domain.domain, args.domain.dim) {
                (None | Some(DomainKind::Lattice), Some(d)) => d,
                _ => return usage("--method mc-return needs --dim (and no other domain)"),
            };
            let est = mc_return_prob(d, &cfg)?;
            let mut req = Request {
                domain: Some("lattice".into()),
                dim: Some(d),
                ..Request::default()
            };
            req.set_monte_carlo("monte-carlo-return", &cfg);
            Ok((OutputRecord::monte_carlo("oracle", req, est), args.out.format))
        }
    }
}

fn run_check(args: &CheckArgs) -> Outcome {
    let (reports, req): (Vec<CheckReport>, Request) = match args.domain.build_optional()? {
        Some(dom) => (vec![check::run_checks(&dom)?], Request::for_domain(&dom)),
        None => (check::run_builtin()?, Request {
            domain: Some("builtin-sample".into()),
            ..Request::default()
        }),
    };
    let rows: Vec<CheckRow> = reports
        .iter()
        .flat_map(|r| r.checks.iter().map(move |c| CheckRow::new(&r.subject, c)))
        .collect();
    let passed = rows.iter().filter(|r| r.passed).count();
    let mut record = OutputRecord::new("check", req, passed as f64);
    record.metadata.checks_total = Some(rows.len());
    record.metadata.all_passed = Some(passed == rows.len());
    record.checks = Some(rows);
    Ok((record, args.out.format))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("DIAGWALK_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => return usage(format!("DIAGWALK_THREADS must be an integer >= 1, got {raw:?}")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Compute(format!("cannot start thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Green(a) => run_green(a).map(|r| (r, a.out.no_timing)),
        Command::Absorb(a) => run_absorb(a).map(|r| (r, a.out.no_timing)),
        Command::ReturnProb(a) => run_return(a).map(|r| (r, a.out.no_timing)),
        Command::Oracle(a) => run_oracle(a).map(|r| (r, a.out.no_timing)),
        Command::Check(a) => run_check(a).map(|r| (r, a.out.no_timing)),
    });
    match result {
        Ok(((mut record, format), no_timing)) => {
            if !no_timing {
                record.metadata.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            if let Err(e) = output::emit(&record, format) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if record.metadata.all_passed == Some(false) {
                eprintln!("error: invariant checks failed");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
