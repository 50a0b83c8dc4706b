use adskg::error::Error;
use adskg::expansions::{
    boundary_reconstruct, invert_rod_interior, invert_slice, invert_tube, parse_rep, rod_boundary_data, rod_boundary_reconstruct, s_to_c, AnyRep,
    BoundaryData, OmegaGrid, RodData, SliceCutoffs, SliceData, TubeBasis, TubeData, TubeWindow,
};
use adskg::geometry::{AdsParams, GeneratorId, SpacetimePoint};
use adskg::isometry::{extract_boost_coeffs, LabelSpace};
use adskg::modes::{mode_eval_slice, mode_eval_tube, Branch, RadialKind, SliceLabel, TubeLabel};
use adskg::quadrature::AngularGrid;
use adskg::verify::{run_suite, SUITES};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const PASS_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "adskg", version, about = "Klein-Gordon modes and expansions on global AdS")]
struct Cli {
    /// Spatial dimension.
    #[arg(long, global = true, default_value_t = 3)]
    d: u32,
    /// AdS radius.
    #[arg(long = "R", global = true, default_value_t = 1.0)]
    r: f64,
    /// Mass squared.
    #[arg(long, global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    msq: f64,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate one mode on a grid of points.
    Eval(EvalArgs),
    /// Run a verification suite.
    Verify {
        suite: String,
    },
    /// Synthesize data from a rep file, invert it, and report the recovery error.
    Reconstruct(ReconstructArgs),
    /// Extract boost coefficient tables.
    BoostTable(BoostArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Sa,
    Sb,
    Ca,
    Cb,
    #[value(name = "jacobi+")]
    JacobiPlus,
    #[value(name = "jacobi-")]
    JacobiMinus,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Frequency, for sa|sb|ca|cb.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Radial index, for jacobi+|jacobi-.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    m: i32,
    /// Value or a:b:n.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    t: String,
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    rho: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    theta: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    phi: String,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Target {
    Slice,
    Tube,
    Rod,
    Boundary,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    target: Target,
    /// Time of the slice surface.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    /// Radius of the tube or rod hypercylinder.
    #[arg(long, default_value_t = 0.9)]
    rho0: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Generator {
    Boost0,
    Boostd1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Space {
    Tube,
    Slice,
}

#[derive(Args, Debug)]
struct BoostArgs {
    #[arg(long, value_enum, default_value = "boost0")]
    generator: Generator,
    #[arg(long, value_enum, default_value = "tube")]
    space: Space,
    #[arg(long, default_value_t = 0.5)]
    domega: f64,
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    kmin: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    kmax: i64,
    #[arg(long, default_value_t = 2)]
    nmax: u32,
    #[arg(long, default_value_t = 2)]
    lmax: u32,
}

/// Outcome of a subcommand: text to emit plus exit code.
struct Outcome {
    text: String,
    code: u8,
}

enum Fail {
    Usage(String),
    Verify(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Verify(e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Fail {
    Fail::Usage(e.to_string())
}

fn header(sub: &str, p: &AdsParams, d: u32, r: f64) -> String {
    format!("# adskg v1 {sub} d={d} R={r} msq={}\n", p.m_sq)
}

/// Parses `x` or `a:b:n` into a list of values.
fn parse_axis(name: &str, s: &str) -> Result<Vec<f64>, Fail> {
    let bad = || Fail::Usage(format!("--{name}: expected a number or a:b:n, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let vals = match parts.as_slice() {
        [x] => vec![x.trim().parse::<f64>().map_err(|_| bad())?],
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match n {
                0 => return Err(bad()),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        _ => return Err(bad()),
    };
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(vals)
}

fn cmd_eval(a: &EvalArgs, p: &AdsParams, cli: &Cli) -> Result<Outcome, Fail> {
    let axes = [parse_axis("t", &a.t)?, parse_axis("rho", &a.rho)?, parse_axis("theta", &a.theta)?, parse_axis("phi", &a.phi)?];
    if a.m.unsigned_abs() > a.l {
        return Err(Fail::Usage(format!("|m| = {} exceeds l = {}", a.m.unsigned_abs(), a.l)));
    }
    let eval: Box<dyn Fn(&SpacetimePoint) -> adskg::error::Result<Complex64>> = match a.kind {
        Kind::Sa | Kind::Sb | Kind::Ca | Kind::Cb => {
            let omega = a.omega.ok_or_else(|| Fail::Usage("--omega is required for this kind".into()))?;
            let kind = match a.kind {
                Kind::Sa => RadialKind::Sa,
                Kind::Sb => RadialKind::Sb,
                Kind::Ca => RadialKind::Ca,
                _ => RadialKind::Cb,
            };
            let label = TubeLabel { omega, l: a.l, m: a.m };
            Box::new(move |pt| mode_eval_tube(&label, kind, pt, p))
        }
        Kind::JacobiPlus | Kind::JacobiMinus => {
            let n = a.n.ok_or_else(|| Fail::Usage("--n is required for jacobi kinds".into()))?;
            let branch = if matches!(a.kind, Kind::JacobiPlus) { Branch::Plus } else { Branch::Minus };
            let label = SliceLabel { n, l: a.l, m: a.m, branch };
            Box::new(move |pt| mode_eval_slice(&label, pt, p))
        }
    };
    let mut text = header("eval", p, cli.d, cli.r);
    text.push_str("t,rho,theta,phi,re,im\n");
    for &t in &axes[0] {
        for &rho in &axes[1] {
            for &th in &axes[2] {
                for &ph in &axes[3] {
                    let v = eval(&SpacetimePoint::from_angles(t, rho, th, ph)).map_err(usage)?;
                    text.push_str(&format!("{t:.15e},{rho:.15e},{th:.15e},{ph:.15e},{:.15e},{:.15e}\n", v.re, v.im));
                }
            }
        }
    }
    Ok(Outcome { text, code: 0 })
}

fn cmd_verify(suite: &str) -> Result<Outcome, Fail> {
    if !SUITES.contains(&suite) {
        return Err(Fail::Usage(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", "))));
    }
    let report = run_suite(suite).map_err(usage)?;
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&c.line());
        text.push('\n');
    }
    text.push_str(&report.summary_line());
    text.push('\n');
    Ok(Outcome { text, code: if report.passed() { 0 } else { 1 } })
}

type Label = (i64, u32, i32);

/// Per-label absolute differences over the union of both label sets.
fn label_errors<V: Copy + Default>(orig: &BTreeMap<Label, V>, back: &BTreeMap<Label, V>, dist: impl Fn(V, V) -> f64) -> BTreeMap<Label, f64> {
    orig.keys()
        .chain(back.keys())
        .map(|k| (*k, dist(orig.get(k).copied().unwrap_or_default(), back.get(k).copied().unwrap_or_default())))
        .collect()
}

fn pair_dist(x: (Complex64, Complex64), y: (Complex64, Complex64)) -> f64 {
    (x.0 - y.0).norm().max((x.1 - y.1).norm())
}

fn window_of<V>(coeffs: &BTreeMap<Label, V>) -> TubeWindow {
    TubeWindow {
        k_min: coeffs.keys().map(|k| k.0).min().unwrap_or(0),
        k_max: coeffs.keys().map(|k| k.0).max().unwrap_or(0),
        l_max: coeffs.keys().map(|k| k.1).max().unwrap_or(0),
    }
}

fn wrong_kind(target: Target) -> Fail {
    Fail::Usage(format!("input rep does not match target {target:?}"))
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<Outcome, Fail> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Fail::Usage(format!("{}: {e}", a.input.display())))?;
    let (hdr, rep) = parse_rep(&text).map_err(usage)?;
    let p = hdr.params().map_err(usage)?;
    let empty = match &rep {
        AnyRep::Slice(r) => r.coeffs.is_empty(),
        AnyRep::Tube(r) => r.coeffs.is_empty(),
        AnyRep::Rod(r) => r.coeffs.is_empty(),
    };
    let errs: BTreeMap<Label, f64> = if empty {
        BTreeMap::new()
    } else {
        match (a.target, &rep) {
            (Target::Slice, AnyRep::Slice(r)) => {
                let cut = SliceCutoffs {
                    n_max: r.coeffs.keys().map(|k| k.0).max().unwrap_or(0),
                    l_max: r.coeffs.keys().map(|k| k.1).max().unwrap_or(0),
                };
                let back = invert_slice(&SliceData::from_rep(r, a.t0, AngularGrid::for_lmax(cut.l_max), &p)?, &p, cut)?;
                let widen = |m: &BTreeMap<(u32, u32, i32), (Complex64, Complex64)>| m.iter().map(|(&(n, l, mm), &v)| ((n as i64, l, mm), v)).collect();
                label_errors(&widen(&r.coeffs), &widen(&back.coeffs), pair_dist)
            }
            (Target::Tube, AnyRep::Tube(r)) => {
                let w = window_of(&r.coeffs);
                let back = invert_tube(&TubeData::from_tube_rep(r, a.rho0, &w, &p)?, &p, r.basis, &w)?;
                label_errors(&r.coeffs, &back.coeffs, pair_dist)
            }
            (Target::Rod, AnyRep::Rod(r)) => {
                let w = window_of(&r.coeffs);
                let back = invert_rod_interior(&RodData::from_rod_rep(r, a.rho0, &w, &p)?, &p, &w)?;
                label_errors(&r.coeffs, &back.coeffs, |x, y| (x - y).norm())
            }
            (Target::Boundary, AnyRep::Tube(r)) => {
                let c = if r.basis == TubeBasis::C { r.clone() } else { s_to_c(r, &p)? };
                let w = window_of(&c.coeffs);
                let back = boundary_reconstruct(&BoundaryData::from_c_rep(&c, &w, &p)?, &p, &w)?;
                label_errors(&c.coeffs, &back.coeffs, pair_dist)
            }
            (Target::Boundary, AnyRep::Rod(r)) => {
                let w = window_of(&r.coeffs);
                let back = rod_boundary_reconstruct(&rod_boundary_data(r, &w, &p)?, &p, &w)?;
                label_errors(&r.coeffs, &back.coeffs, |x, y| (x - y).norm())
            }
            _ => return Err(wrong_kind(a.target)),
        }
    };
    let target = format!("{:?}", a.target).to_lowercase();
    let mut out = header("reconstruct", &p, hdr.d, hdr.r);
    out.push_str("k_or_n,l,m,err\n");
    for (&(k, l, m), e) in &errs {
        out.push_str(&format!("{k},{l},{m},{e:.6e}\n"));
    }
    let max = errs.values().copied().fold(0.0, f64::max);
    let pass = max < PASS_TOL;
    out.push_str(&format!("RECONSTRUCT {target} {} max_err={max:.3e} labels={}\n", if pass { "PASS" } else { "FAIL" }, errs.len()));
    Ok(Outcome { text: out, code: if pass { 0 } else { 1 } })
}

fn cmd_boost_table(a: &BoostArgs, p: &AdsParams, cli: &Cli) -> Result<Outcome, Fail> {
    let space = match a.space {
        Space::Tube => {
            if a.kmin > a.kmax {
                return Err(Fail::Usage("--kmin exceeds --kmax".into()));
            }
            LabelSpace::Tube { grid: OmegaGrid::new(a.domega).map_err(usage)?, window: TubeWindow { k_min: a.kmin, k_max: a.kmax, l_max: a.lmax } }
        }
        Space::Slice => LabelSpace::Slice(SliceCutoffs { n_max: a.nmax, l_max: a.lmax }),
    };
    let gen = match a.generator {
        Generator::Boost0 => GeneratorId::Boost0(3),
        Generator::Boostd1 => GeneratorId::BoostD1(3),
    };
    p.require_d3().map_err(usage)?;
    let table = extract_boost_coeffs(space, gen, p)?;
    let mut text = header("boost-table", p, cli.d, cli.r);
    text.push_str(&table.to_csv()?);
    Ok(Outcome { text, code: 0 })
}

fn run(cli: &Cli) -> Result<Outcome, Fail> {
    match &cli.cmd {
        Cmd::Verify { suite } => cmd_verify(suite),
        Cmd::Reconstruct(a) => cmd_reconstruct(a),
        Cmd::Eval(a) => {
            let p = AdsParams::new(cli.d, cli.r, cli.msq).map_err(usage)?;
            cmd_eval(a, &p, cli)
        }
        Cmd::BoostTable(a) => {
            let p = AdsParams::new(cli.d, cli.r, cli.msq).map_err(usage)?;
            cmd_boost_table(a, &p, cli)
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            if let Err(e) = emit(&o.text, &cli.out) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(o.code)
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Verify(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
    }
}
