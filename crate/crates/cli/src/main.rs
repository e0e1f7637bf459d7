use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use conestab::cones::Cone;
use conestab::constab::{
    check_k_stability, falsify_k_stability, imaginary_projection_sample, pencil_hko_check,
    wronskian_certificate, SamplingConfig, Status, Verdict,
};
use conestab::det::{
    default_epsilon_schedule, expand_det_polynomial, matrix_from_json, perturbed_certify,
    psd_blocks_certify, BlockMatrix, ExpansionCap,
};
use conestab::linalg::DenseMatrix;
use conestab::poly::{self, MultiPoly, PolyJson};
use conestab::ToleranceProfile;

/// Conic stability checks for multivariate complex polynomials.
#[derive(Parser)]
#[command(name = "conestab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide or falsify K-stability of one polynomial.
    Stab(StabArgs),
    /// Compare the pencil of f and g with g + i·f and f + i·g.
    Hko(HkoArgs),
    /// Certify a determinantal polynomial from block matrices.
    Detstab(DetArgs),
    /// Sample the imaginary projection of the zero set as CSV.
    Improj(ImprojArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct RunArgs {
    /// Number of random draws.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Seed of the per-draw random streams; echoed in the output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tols: Vec<String>,
    #[arg(long, value_enum)]
    output: Option<Output>,
    /// Worker threads for sampling (1 runs serially).
    #[arg(long)]
    threads: Option<usize>,
    /// Recheck every reported witness; exit 3 if one fails.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct PolyInput {
    /// Polynomial expression.
    #[arg(
        short = 'e',
        long = "expr",
        conflicts_with = "file",
        required_unless_present = "file"
    )]
    expr: Option<String>,
    /// File holding an expression or a JSON polynomial.
    #[arg(short = 'f', long = "file")]
    file: Option<PathBuf>,
    /// Comma-separated variable names.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
}

#[derive(Args)]
struct StabArgs {
    #[command(flatten)]
    input: PolyInput,
    /// Cone descriptor, e.g. `orthant:3`, `psd:2`, `prod:orthant:1,psd:2`.
    #[arg(long)]
    cone: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct HkoArgs {
    #[arg(long = "f")]
    f: String,
    #[arg(long = "g")]
    g: String,
    #[arg(long)]
    cone: String,
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Sample points per Wronskian direction.
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct DetArgs {
    /// JSON block matrix `{"blocks": [[M11, M12], [M21, M22]]}`.
    #[arg(long)]
    blocks: PathBuf,
    /// JSON matrix B (default zero).
    #[arg(long = "b")]
    b: Option<PathBuf>,
    /// Always print the expanded polynomial.
    #[arg(long)]
    expand: bool,
    /// Also run the A + εI perturbation schedule.
    #[arg(long)]
    perturb: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ImprojArgs {
    #[command(flatten)]
    input: PolyInput,
    /// Number of points to emit.
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Box `lo:hi` for the fixed variables, once or once per variable.
    #[arg(
        long = "box",
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-5:5"
    )]
    bounds: Vec<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Lib(#[from] conestab::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

type CliResult<T> = Result<T, CliError>;

const EXIT_FALSIFIED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Stab(a) => stab(a),
        Command::Hko(a) => hko(a),
        Command::Detstab(a) => detstab(a),
        Command::Improj(a) => improj(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

impl RunArgs {
    fn config(&self) -> CliResult<SamplingConfig> {
        let mut tols = ToleranceProfile::default();
        for item in &self.tols {
            let (name, value) = item.split_once('=').ok_or_else(|| {
                CliError::Input(format!("--tol expects NAME=VALUE, got '{item}'"))
            })?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad tolerance value '{value}'")))?;
            if !tols.set(name.trim(), value) {
                return Err(CliError::Input(format!("unknown tolerance '{name}'")));
            }
        }
        Ok(SamplingConfig {
            samples: self.samples,
            seed: self.seed,
            threads: self.threads,
            tols,
            ..SamplingConfig::default()
        })
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Identifiers in an expression other than the imaginary unit, in natural
/// order (`z2` before `z10`).
fn infer_vars(text: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut prev_digit = false;
    while let Some((start, ch)) = chars.next() {
        if (ch.is_ascii_alphabetic() || ch == '_') && !prev_digit {
            let mut end = start + ch.len_utf8();
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = i + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let name = &text[start..end];
            if name != "i" && !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
            prev_digit = false;
        } else {
            // skips `2i`, `1e5` and other number suffixes
            prev_digit =
                ch.is_ascii_digit() || ch == '.' || (prev_digit && ch.is_ascii_alphanumeric());
        }
    }
    names.sort_by_key(|n| natural_key(n));
    names
}

fn natural_key(s: &str) -> (String, u64, String) {
    let head = s.trim_end_matches(|c: char| c.is_ascii_digit());
    let num = s[head.len()..].parse().unwrap_or(0);
    (head.to_string(), num, s.to_string())
}

impl PolyInput {
    /// Loads the polynomial; `default_vars` applies to expressions when
    /// `--vars` is absent.
    fn load(&self, default_vars: Option<Vec<String>>) -> CliResult<MultiPoly> {
        let text = match (&self.expr, &self.file) {
            (Some(e), _) => e.clone(),
            (None, Some(path)) => read(path)?,
            (None, None) => return Err(CliError::Input("give -e/--expr or -f/--file".into())),
        };
        if text.trim_start().starts_with('{') {
            let json: PolyJson = serde_json::from_str(&text).map_err(conestab::Error::from)?;
            return Ok(MultiPoly::from_json(&json)?);
        }
        let vars = self
            .vars
            .clone()
            .or(default_vars)
            .unwrap_or_else(|| infer_vars(&text));
        Ok(poly::parse(text.trim(), &vars)?)
    }
}

fn fmt_complex(z: &Complex64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn fmt_witness(w: &Option<Vec<Complex64>>) -> String {
    match w {
        Some(z) => z.iter().map(fmt_complex).collect::<Vec<_>>().join(";"),
        None => String::new(),
    }
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn emit_json(v: &Value) {
    println!("{v}");
}

fn verdict_text(label: &str, v: &Verdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{label}status: {}", status_name(v.status));
    if v.witness.is_some() {
        let _ = writeln!(s, "{label}witness: {}", fmt_witness(&v.witness));
    }
    if let Some(r) = v.residual {
        let _ = writeln!(s, "{label}residual: {r:.3e}");
    }
    let _ = write!(s, "{label}seed: {}  samples: {}", v.seed, v.samples);
    s
}

fn verdict_csv(v: &Verdict) -> String {
    format!(
        "{},{},{},{},{}",
        status_name(v.status),
        v.seed,
        v.samples,
        v.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
        fmt_witness(&v.witness)
    )
}

const VERDICT_CSV_HEADER: &str = "status,seed,samples,residual,witness";

fn stab(args: StabArgs) -> CliResult<u8> {
    let cfg = args.run.config()?;
    let cone = Cone::parse(&args.cone)?;
    let f = args.input.load(Some(cone.var_names()))?;
    let verdict = check_k_stability(&f, &cone, &cfg)?;
    let verified = if args.run.verify {
        Some(verdict.verify(&f, &cone, &cfg.tols)?)
    } else {
        None
    };
    match args.run.output.unwrap_or(Output::Json) {
        Output::Json => emit_json(&json!({
            "command": "stab",
            "polynomial": f.to_string(),
            "vars": f.vars(),
            "cone": cone,
            "seed": cfg.seed,
            "verdict": verdict,
            "verified": verified,
        })),
        Output::Csv => {
            println!("{VERDICT_CSV_HEADER}");
            println!("{}", verdict_csv(&verdict));
        }
        Output::Text => {
            println!("polynomial: {f}");
            println!("{}", verdict_text("", &verdict));
            if let Some(ok) = verified {
                println!("verified: {ok}");
            }
        }
    }
    if verified == Some(false) {
        return Ok(EXIT_VERIFY);
    }
    Ok(if verdict.status == Status::Falsified {
        EXIT_FALSIFIED
    } else {
        0
    })
}

/// `g = c·f` for some complex `c`, or one of them is zero.
fn linearly_dependent(f: &MultiPoly, g: &MultiPoly, tol: f64) -> CliResult<bool> {
    if f.is_zero() || g.is_zero() {
        return Ok(true);
    }
    let (exp, cf) = f
        .terms()
        .iter()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonzero");
    let cg = g.terms().get(exp).copied().unwrap_or_default();
    let rest = g.sub(&f.scale(cg / cf))?;
    Ok(rest.coeff_l1() <= tol * g.coeff_l1())
}

fn hko(args: HkoArgs) -> CliResult<u8> {
    let cfg = args.run.config()?;
    let cone = Cone::parse(&args.cone)?;
    let vars = args.vars.clone().unwrap_or_else(|| cone.var_names());
    let f = poly::parse(&args.f, &vars)?;
    let g = poly::parse(&args.g, &vars)?;
    let report = pencil_hko_check(&f, &g, &cone, None, &cfg)?;
    let w_fg = wronskian_certificate(&f, &g, &cone, args.points, &cfg)?;
    let w_gf = wronskian_certificate(&g, &f, &cone, args.points, &cfg)?;
    // W(f, g) ≤ 0 belongs to g + i·f, W(g, f) ≤ 0 to f + i·g
    let wronskian_agrees = report.pencil_clean
        || !((w_fg.passes && !report.g_plus_if.status.is_negative())
            || (w_gf.passes && !report.f_plus_ig.status.is_negative()));
    let consistent = report.consistent && wronskian_agrees;
    let label = if !consistent {
        "inconsistent"
    } else if linearly_dependent(&f, &g, cfg.tols.coeff_zero_tol.max(1e-12))? {
        "consistent-degenerate"
    } else if !report.pencil_clean {
        "consistent-negative"
    } else {
        "consistent"
    };
    let verified = if args.run.verify {
        let g_if = g.plus_i_times(&f)?;
        let f_ig = f.plus_i_times(&g)?;
        let mut ok = report.g_plus_if.verify(&g_if, &cone, &cfg.tols)?
            && report.f_plus_ig.verify(&f_ig, &cone, &cfg.tols)?;
        for m in &report.members {
            let p = f
                .scale(Complex64::new(m.lambda, 0.0))
                .add(&g.scale(Complex64::new(m.mu, 0.0)))?;
            ok &= m.zero || m.verdict.verify(&p, &cone, &cfg.tols)?;
        }
        Some(ok)
    } else {
        None
    };
    let unstable_members: Vec<Value> = report
        .members
        .iter()
        .filter(|m| m.verdict.status.is_negative())
        .map(|m| json!({"lambda": m.lambda, "mu": m.mu, "witness": m.verdict.witness}))
        .collect();
    match args.run.output.unwrap_or(Output::Json) {
        Output::Json => emit_json(&json!({
            "command": "hko",
            "f": f.to_string(),
            "g": g.to_string(),
            "cone": cone,
            "seed": cfg.seed,
            "summary": label,
            "pencil_clean": report.pencil_clean,
            "side_clean": report.side_clean,
            "g_plus_if": report.g_plus_if,
            "f_plus_ig": report.f_plus_ig,
            "pencil_members": report.members.len(),
            "unstable_members": unstable_members,
            "wronskian_fg": w_fg,
            "wronskian_gf": w_gf,
            "wronskian_agrees": wronskian_agrees,
            "verified": verified,
        })),
        Output::Csv => {
            println!("summary,pencil_clean,side_clean,g_plus_if,f_plus_ig,wronskian_fg,wronskian_gf,seed");
            println!(
                "{label},{},{},{},{},{},{},{}",
                report.pencil_clean,
                report.side_clean,
                status_name(report.g_plus_if.status),
                status_name(report.f_plus_ig.status),
                w_fg.passes,
                w_gf.passes,
                cfg.seed
            );
        }
        Output::Text => {
            println!("summary: {label}");
            println!(
                "pencil: {} of {} members shown unstable",
                unstable_members.len(),
                report.members.len()
            );
            println!("{}", verdict_text("g+if ", &report.g_plus_if));
            println!("{}", verdict_text("f+ig ", &report.f_plus_ig));
            println!("W(f,g) <= 0: {}  (max {:.3e})", w_fg.passes, w_fg.max_value);
            println!("W(g,f) <= 0: {}  (max {:.3e})", w_gf.passes, w_gf.max_value);
            if let Some(ok) = verified {
                println!("verified: {ok}");
            }
        }
    }
    if verified == Some(false) {
        return Ok(EXIT_VERIFY);
    }
    Ok(if consistent { 0 } else { 1 })
}

fn detstab(args: DetArgs) -> CliResult<u8> {
    let cfg = args.run.config()?;
    let a = BlockMatrix::from_json(&read(&args.blocks)?)?;
    let (n, d) = a.square_dims()?;
    let b = match &args.b {
        Some(path) => matrix_from_json(&read(path)?)?,
        None => DenseMatrix::zeros(d, d),
    };
    let verdict = psd_blocks_certify(&a, &b, &cfg.tols)?;
    let cap = ExpansionCap::default();
    let not_certified = verdict.status == Status::NotCertified;
    let expansion = if (args.expand || not_certified || verdict.status == Status::CertifiedStable)
        && cap.allows(n, d)
    {
        Some(expand_det_polynomial(&a, &b, cap)?)
    } else {
        None
    };
    let mut note = None;
    let mut falsifier = None;
    if not_certified {
        match &expansion {
            Some(f) => {
                let cone = Cone::psd(n)?;
                let v = falsify_k_stability(f, &cone, &cfg)?;
                note = Some(format!(
                    "criterion does not apply; falsifier on psd({n}): {}",
                    status_name(v.status)
                ));
                falsifier = Some(v);
            }
            None => {
                note = Some(format!(
                    "criterion does not apply; n = {n}, d = {d} exceeds the expansion cap"
                ))
            }
        }
    }
    let perturbation = if args.perturb {
        match perturbed_certify(&a, &b, &default_epsilon_schedule(), &cfg.tols) {
            Ok(r) => Some(json!({"passes": r.passes(), "report": r})),
            Err(conestab::Error::Indefinite { lambda_min }) => Some(
                json!({"passes": false, "error": format!("A is indefinite (lambda_min {lambda_min:.3e})")}),
            ),
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let verified = match (&falsifier, &expansion, args.run.verify) {
        (Some(v), Some(f), true) => Some(v.verify(f, &Cone::psd(n)?, &cfg.tols)?),
        (_, _, true) => Some(true),
        _ => None,
    };
    let polynomial = expansion.as_ref().map(|f| f.to_string());
    match args.run.output.unwrap_or(Output::Json) {
        Output::Json => emit_json(&json!({
            "command": "detstab",
            "n": n,
            "d": d,
            "seed": cfg.seed,
            "verdict": verdict,
            "polynomial": polynomial,
            "falsifier": falsifier,
            "note": note,
            "perturbation": perturbation,
            "verified": verified,
        })),
        Output::Csv => {
            println!("status,polynomial,falsifier,seed");
            println!(
                "{},\"{}\",{},{}",
                status_name(verdict.status),
                polynomial.clone().unwrap_or_default(),
                falsifier
                    .as_ref()
                    .map(|v| status_name(v.status))
                    .unwrap_or_default(),
                cfg.seed
            );
        }
        Output::Text => {
            println!("{}", verdict_text("", &verdict));
            if let Some(p) = &polynomial {
                println!("polynomial: {p}");
            }
            if let Some(nt) = &note {
                println!("note: {nt}");
            }
            if let Some(p) = &perturbation {
                println!("perturbation passes: {}", p["passes"]);
            }
            if let Some(ok) = verified {
                println!("verified: {ok}");
            }
        }
    }
    if verified == Some(false) {
        return Ok(EXIT_VERIFY);
    }
    let falsified = falsifier.is_some_and(|v| v.status == Status::Falsified);
    Ok(if falsified { EXIT_FALSIFIED } else { 0 })
}

fn parse_bound(text: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Input(format!("--box expects lo:hi, got '{text}'"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn improj(args: ImprojArgs) -> CliResult<u8> {
    let cfg = args.run.config()?;
    let f = args.input.load(None)?;
    let n = f.nvars();
    let parsed = args
        .bounds
        .iter()
        .map(|s| parse_bound(s))
        .collect::<CliResult<Vec<_>>>()?;
    let bounds = match parsed.len() {
        1 => vec![parsed[0]; n],
        k if k == n => parsed,
        k => return Err(CliError::Input(format!("{k} boxes for {n} variables"))),
    };
    let cloud = imaginary_projection_sample(&f, args.points, &bounds, &cfg)?;
    match args.run.output.unwrap_or(Output::Csv) {
        Output::Csv | Output::Text => {
            let sep = if args.run.output == Some(Output::Text) {
                " "
            } else {
                ","
            };
            let header: Vec<String> = f.vars().iter().map(|v| format!("im_{v}")).collect();
            println!("{}", header.join(sep));
            for p in &cloud {
                let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                println!("{}", row.join(sep));
            }
        }
        Output::Json => emit_json(&json!({
            "command": "improj",
            "polynomial": f.to_string(),
            "vars": f.vars(),
            "seed": cfg.seed,
            "points": cloud,
        })),
    }
    Ok(0)
}
