use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Integer, Rational};

use dfcert::alpha::{alpha_test, AlphaOptions, RadiusPolicy};
use dfcert::dfinite::radius_lower_bound;
use dfcert::exact::QComplex;
use dfcert::experiments::{
    certify_krawczyk, gamma_curve, linear_grid, radius_sweep, round_point, sweep_digits, Method,
};
use dfcert::parse::{parse_exact, parse_point, SystemFile};
use dfcert::report::{
    curve_tsv, AlphaReport, CertificateReport, CurvePointReport, InputInfo, KrawczykReport, RadiusRowReport, Report,
    ReportBody, RunConfig, SweepRowReport,
};
use dfcert::system::{IngredientSystem, Mode};

/// Certifies roots of polynomial systems with D-finite ingredients.
#[derive(Parser, Debug)]
#[command(name = "dfcert", version)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "DFCERT_PRECISION", default_value_t = 128)]
    precision: u32,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    /// Tab-separated values; gamma-curve only.
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Alpha,
    Krawczyk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Real,
    Complex,
}

#[derive(Args, Debug)]
struct Common {
    /// System file (JSON).
    system: PathBuf,

    /// A point named in the system file, a comma-separated coordinate list, or a file holding one.
    #[arg(long, short)]
    point: String,

    /// Override the mode declared in the system file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one test at one point.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, short, value_enum)]
        method: MethodArg,
        /// Disk radius: `auto`, one value, or one value per ingredient separated by commas.
        #[arg(long, default_value = "auto")]
        radius: String,
        /// Reference radius for the automatic search.
        #[arg(long)]
        radius_scale: Option<f64>,
        /// Side of the Krawczyk box; defaults to 2·10^-d for a point with d decimals.
        #[arg(long)]
        box_side: Option<String>,
        /// Round the point to this many decimals first.
        #[arg(long)]
        round: Option<u32>,
    },
    /// Round the point to each number of decimals and run the tests.
    SweepDigits {
        #[command(flatten)]
        common: Common,
        /// `a..b` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0..3")]
        digits: String,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Krawczyk, MethodArg::Alpha])]
        methods: Vec<MethodArg>,
        #[arg(long, default_value = "auto")]
        radius: String,
        #[arg(long)]
        radius_scale: Option<f64>,
    },
    /// α-test at one point for a list of uniform radii.
    RadiusSweep {
        #[command(flatten)]
        common: Common,
        /// Reference radius R; defaults to the smallest convergence radius bound at the point.
        #[arg(long)]
        scale: Option<f64>,
        /// Radii as multiples of R.
        #[arg(long, value_delimiter = ',', conflicts_with = "radii")]
        multipliers: Vec<f64>,
        /// Absolute radii.
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// γ bounds from each candidate constant and combined, over a grid of radii.
    GammaCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        from: f64,
        #[arg(long, default_value_t = 1.9)]
        to: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
}

/// Errors caused by the inputs rather than the computation.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(InputError(e.into()))
}

fn lib_input_err(e: dfcert::Error) -> anyhow::Error {
    let kind = e.kind();
    input_err(anyhow!("[{kind}] {e}"))
}

struct Loaded {
    sys: IngredientSystem,
    info: InputInfo,
    point: Vec<QComplex>,
}

fn load(common: &Common, prec: u32) -> anyhow::Result<Loaded> {
    let text = std::fs::read_to_string(&common.system)
        .with_context(|| format!("reading {}", common.system.display()))
        .map_err(input_err)?;
    let mut file = SystemFile::from_json(&text).map_err(lib_input_err)?;
    if let Some(m) = common.mode {
        file.mode = match m {
            ModeArg::Real => Mode::Real,
            ModeArg::Complex => Mode::Complex,
        };
    }
    let sys = file.build_located(Some(&text), prec).map_err(lib_input_err)?;
    let point = resolve_point(&file, &common.point)?;
    if point.len() != sys.dim() {
        return Err(input_err(anyhow!(
            "point has {} coordinates, system has {} variables",
            point.len(),
            sys.dim()
        )));
    }
    let info = InputInfo::new(file.name.clone(), text.as_bytes());
    Ok(Loaded { sys, info, point })
}

fn resolve_point(file: &SystemFile, spec: &str) -> anyhow::Result<Vec<QComplex>> {
    if file.points.contains_key(spec) {
        return file.point(spec).map_err(lib_input_err);
    }
    let path = Path::new(spec);
    if !spec.contains(',') && path.is_file() {
        let text = std::fs::read_to_string(path).map_err(input_err)?;
        let joined = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join(",");
        return parse_point(&joined).map_err(lib_input_err);
    }
    parse_point(spec).map_err(lib_input_err)
}

fn radius_policy(s: &str, m: usize) -> anyhow::Result<RadiusPolicy> {
    let s = s.trim();
    if s == "auto" {
        return Ok(RadiusPolicy::Auto);
    }
    let vals = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| input_err(anyhow!("bad --radius {s:?}: {e}")))?;
    if vals.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(input_err(anyhow!("radii must be positive and finite")));
    }
    match vals.len() {
        1 => Ok(RadiusPolicy::Uniform(vals[0])),
        k if k == m => Ok(RadiusPolicy::PerIngredient(vals)),
        k => Err(input_err(anyhow!("--radius has {k} values but the system has {m} ingredients"))),
    }
}

fn parse_digits(s: &str) -> anyhow::Result<Vec<u32>> {
    let bad = |e: &dyn std::fmt::Display| input_err(anyhow!("bad --digits {s:?}: {e}"));
    let out: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|e| bad(&e))?;
        let b: u32 = b.trim().parse().map_err(|e| bad(&e))?;
        (a..=b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse()).collect::<Result<_, _>>().map_err(|e| bad(&e))?
    };
    if out.iter().any(|&d| d > 60) {
        return Err(bad(&"at most 60 decimals"));
    }
    Ok(out)
}

/// Smallest `d` with every coordinate a multiple of `10^-d`, if at most 60.
fn decimals(x: &[QComplex]) -> Option<u32> {
    (0..=60u32).find(|&d| {
        let scale = Integer::from(Integer::u_pow_u(10, d));
        x.iter()
            .all(|c| Rational::from(&c.re * &scale).denom() == &1 && Rational::from(&c.im * &scale).denom() == &1)
    })
}

fn default_box_side(x: &[QComplex]) -> Rational {
    dfcert::experiments::sweep_box_side(decimals(x).unwrap_or(6))
}

fn alpha_options(prec: u32, radius_scale: Option<f64>) -> AlphaOptions {
    AlphaOptions { prec, radius_scale, ..AlphaOptions::default() }
}

/// Smallest convergence radius bound over the ingredient inputs.
fn computed_scale(sys: &IngredientSystem, x: &[QComplex], prec: u32) -> anyhow::Result<f64> {
    let mut best = f64::INFINITY;
    for row in sys.ingredients() {
        let r = radius_lower_bound(&row.func, &x[row.input], prec).map_err(|e| anyhow!("[{}] {e}", e.kind()))?;
        best = best.min(r.to_f64());
    }
    if !best.is_finite() {
        bail!("no finite convergence radius; pass --scale");
    }
    Ok(best)
}

fn run(cli: &Cli) -> anyhow::Result<(Report, Option<String>)> {
    let prec = cli.precision;
    if !(16..=1 << 16).contains(&prec) {
        return Err(input_err(anyhow!("--precision must be between 16 and 65536")));
    }
    let start = Instant::now();
    let mut tsv = None;
    let (info, config, body) = match &cli.command {
        Command::Certify { common, method, radius, radius_scale, box_side, round } => {
            let l = load(common, prec)?;
            let point = match round {
                Some(d) => round_point(&l.point, *d),
                None => l.point.clone(),
            };
            let mut config = RunConfig::new(prec, l.sys.mode());
            let cert = match method {
                MethodArg::Krawczyk => {
                    let side = match box_side {
                        Some(s) => parse_exact(s).map_err(lib_input_err)?,
                        None => QComplex::real(default_box_side(&point)),
                    };
                    if !side.is_real() || side.re <= 0 {
                        return Err(input_err(anyhow!("--box-side must be a positive real number")));
                    }
                    config.box_side = Some(side.re.to_string());
                    let cert = certify_krawczyk(&l.sys, &point, &side.re, prec).map_err(lib_input_err)?;
                    CertificateReport::Krawczyk(KrawczykReport::from_cert(&cert))
                }
                MethodArg::Alpha => {
                    let policy = radius_policy(radius, l.sys.m())?;
                    config.radius = Some(radius.trim().to_string());
                    let cert = alpha_test(&l.sys, &point, &policy, &alpha_options(prec, *radius_scale));
                    CertificateReport::Alpha(AlphaReport::from_cert(&cert))
                }
            };
            (l.info, config, ReportBody::Certify { certificate: cert })
        }
        Command::SweepDigits { common, digits, methods, radius, radius_scale } => {
            let l = load(common, prec)?;
            let digits = parse_digits(digits)?;
            let policy = radius_policy(radius, l.sys.m())?;
            let methods: Vec<Method> = methods
                .iter()
                .map(|m| match m {
                    MethodArg::Alpha => Method::Alpha,
                    MethodArg::Krawczyk => Method::Krawczyk,
                })
                .collect();
            let rows = sweep_digits(&l.sys, &l.point, &digits, &methods, &policy, &alpha_options(prec, *radius_scale))
                .map_err(lib_input_err)?;
            let mut config = RunConfig::new(prec, l.sys.mode());
            config.radius = Some(radius.trim().to_string());
            config.box_side = Some("2*10^-d".into());
            config.digits = Some(digits);
            let rows = rows.iter().map(SweepRowReport::from_row).collect();
            (l.info, config, ReportBody::SweepDigits { rows })
        }
        Command::RadiusSweep { common, scale, multipliers, radii } => {
            let l = load(common, prec)?;
            let opts = alpha_options(prec, None);
            let (scale, rows) = if radii.is_empty() {
                if multipliers.is_empty() {
                    return Err(input_err(anyhow!("give --multipliers or --radii")));
                }
                let s = match scale {
                    Some(s) => *s,
                    None => computed_scale(&l.sys, &l.point, prec)?,
                };
                (s, radius_sweep(&l.sys, &l.point, s, multipliers, &opts))
            } else {
                let mut rows = radius_sweep(&l.sys, &l.point, 1.0, radii, &opts);
                for r in &mut rows {
                    r.multiplier = None;
                }
                (1.0, rows)
            };
            if !scale.is_finite() || scale <= 0.0 {
                return Err(input_err(anyhow!("--scale must be positive and finite")));
            }
            let mut config = RunConfig::new(prec, l.sys.mode());
            config.radius = Some("uniform".into());
            let rows = rows.iter().map(RadiusRowReport::from_row).collect();
            (l.info, config, ReportBody::RadiusSweep { scale, rows })
        }
        Command::GammaCurve { common, from, to, step } => {
            let l = load(common, prec)?;
            if ![*from, *to, *step].iter().all(|v| v.is_finite()) || *step <= 0.0 || *from <= 0.0 {
                return Err(input_err(anyhow!("grid needs 0 < from and step > 0")));
            }
            let grid = linear_grid(*from, *to, *step);
            let points: Vec<CurvePointReport> = gamma_curve(&l.sys, &l.point, &grid, &alpha_options(prec, None))
                .iter()
                .map(CurvePointReport::from_point)
                .collect();
            if cli.format == Format::Tsv {
                tsv = Some(curve_tsv(&points));
            }
            let mut config = RunConfig::new(prec, l.sys.mode());
            config.radius = Some("uniform".into());
            (l.info, config, ReportBody::GammaCurve { points })
        }
    };
    if cli.format == Format::Tsv && tsv.is_none() {
        return Err(input_err(anyhow!("--format tsv is only available for gamma-curve")));
    }
    let report = Report::new(info, config, body, start.elapsed().as_secs_f64());
    Ok((report, tsv))
}

fn emit(cli: &Cli, report: &Report, tsv: Option<String>) -> anyhow::Result<()> {
    let text = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
        Format::Tsv => tsv.unwrap_or_default(),
    };
    match &cli.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(report, tsv)| {
        emit(&cli, &report, tsv)?;
        Ok(report)
    });
    match result {
        Ok(report) => match report.verdict {
            Some(v) if !v.passed() => ExitCode::from(1),
            _ => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
