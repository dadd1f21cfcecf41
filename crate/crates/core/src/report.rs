//! Machine-readable run reports.
//!
//! Every bound is written as a decimal string rounded in its conservative
//! direction: upper bounds up, lower bounds and thresholds down. Exact inputs
//! are written as exact rationals, so a report parses back to an equal value.

use std::fmt::Write as _;

use rug::float::Round;
use rug::Float;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alpha::{AlphaCertificate, IngredientConstants};
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::experiments::{CurvePoint, RadiusRow, SweepRow};
use crate::interval::{fmt_down, fmt_up, parse_float, ComplexInterval, IntervalBox};
use crate::krawczyk::{FailureReason, KrawczykCertificate, Verdict};
use crate::system::Mode;

pub const REPORT_SCHEMA: &str = "dfcert-report/1";

/// Significant digits in emitted bounds.
const DIGITS: usize = 24;

/// Hex SHA-256 of the input bytes.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn up(x: &Float) -> String {
    fmt_up(x, DIGITS)
}

fn down(x: &Float) -> String {
    fmt_down(x, DIGITS)
}

fn exact_list(x: &[QComplex]) -> Vec<String> {
    x.iter().map(|c| c.to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalText {
    /// `[lower, upper]` of the real part.
    pub re: [String; 2],
    /// Imaginary part, omitted when it is exactly zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<[String; 2]>,
}

impl IntervalText {
    pub fn from_interval(z: &ComplexInterval) -> Self {
        Self {
            re: [down(z.re.lo()), up(z.re.hi())],
            im: (!z.im.is_zero()).then(|| [down(z.im.lo()), up(z.im.hi())]),
        }
    }
}

fn box_text(b: &IntervalBox) -> Vec<IntervalText> {
    b.iter().map(IntervalText::from_interval).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrawczykReport {
    pub center: Vec<String>,
    pub region: Vec<IntervalText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<IntervalText>>,
    /// Rows of the floating-point preconditioner as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditioner: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction_upper: Option<String>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl KrawczykReport {
    pub fn from_cert(c: &KrawczykCertificate) -> Self {
        let pre = c.preconditioner.as_ref().map(|y| {
            (0..y.rows())
                .map(|i| (0..y.cols()).map(|j| [y.get(i, j).re, y.get(i, j).im]).collect())
                .collect()
        });
        Self {
            center: exact_list(&c.center),
            region: box_text(&c.region),
            image: c.image.as_ref().map(box_text),
            preconditioner: pre,
            contraction_upper: c.contraction.as_ref().map(up),
            verdict: c.verdict,
            failure: c.failure,
            error: c.error.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngredientReport {
    pub r: f64,
    pub convergence_radius_lower: String,
    /// Disk maxima of the ingredient derivative and the next two.
    pub m_upper: [String; 3],
    /// The three candidate constants; `c_upper` is their minimum.
    pub parts_upper: [String; 3],
    pub c_upper: String,
}

impl IngredientReport {
    fn from_constants(c: &IngredientConstants) -> Self {
        Self {
            r: c.r,
            convergence_radius_lower: down(&c.radius),
            m_upper: c.m.each_ref().map(up),
            parts_upper: c.parts.each_ref().map(up),
            c_upper: up(&c.c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaReport {
    pub point: Vec<String>,
    pub beta_upper: String,
    pub mu_upper: String,
    pub system_norm_upper: String,
    pub point_norm_upper: String,
    /// `d^{3/2} / (2‖(1,x)‖)`.
    pub poly_term_upper: String,
    pub degree: u32,
    pub ingredients: Vec<IngredientReport>,
    pub gamma_upper: String,
    pub alpha_upper: String,
    pub threshold_lower: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness_radius_lower: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonreal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
}

impl AlphaReport {
    pub fn from_cert(c: &AlphaCertificate) -> Self {
        Self {
            point: exact_list(&c.point),
            beta_upper: up(&c.beta_upper),
            mu_upper: up(&c.mu_upper),
            system_norm_upper: up(&c.system_norm),
            point_norm_upper: up(&c.point_norm),
            poly_term_upper: up(&c.poly_term),
            degree: c.degree,
            ingredients: c.ingredients.iter().map(IngredientReport::from_constants).collect(),
            gamma_upper: up(&c.gamma_upper),
            alpha_upper: up(&c.alpha_upper),
            threshold_lower: down(&c.threshold),
            verdict: c.verdict,
            uniqueness_radius_lower: c.uniqueness_radius.as_ref().map(down),
            nonreal: c.nonreal,
            error: c.error.clone(),
            error_kind: c.error_kind.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum CertificateReport {
    Krawczyk(KrawczykReport),
    Alpha(AlphaReport),
}

impl CertificateReport {
    pub fn verdict(&self) -> Verdict {
        match self {
            CertificateReport::Krawczyk(k) => k.verdict,
            CertificateReport::Alpha(a) => a.verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRowReport {
    pub digits: u32,
    pub point: Vec<String>,
    pub box_side: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krawczyk: Option<KrawczykReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaReport>,
}

impl SweepRowReport {
    pub fn from_row(r: &SweepRow) -> Self {
        Self {
            digits: r.digits,
            point: exact_list(&r.point),
            box_side: r.box_side.to_string(),
            krawczyk: r.krawczyk.as_ref().map(KrawczykReport::from_cert),
            alpha: r.alpha.as_ref().map(AlphaReport::from_cert),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusRowReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    pub r: f64,
    /// Set when the radius reaches the convergence radius bound.
    pub radius_exceeded: bool,
    pub certificate: AlphaReport,
}

impl RadiusRowReport {
    pub fn from_row(r: &RadiusRow) -> Self {
        Self {
            multiplier: r.multiplier,
            r: r.r,
            radius_exceeded: r.cert.error_kind.as_deref() == Some("RadiusExceeded"),
            certificate: AlphaReport::from_cert(&r.cert),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvePointReport {
    pub r: f64,
    /// γ bounds using only the first, second and third candidate constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components_upper: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined_upper: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CurvePointReport {
    pub fn from_point(p: &CurvePoint) -> Self {
        match &p.value {
            Ok(g) => Self {
                r: p.r,
                components_upper: Some(g.parts.each_ref().map(up)),
                combined_upper: Some(up(&g.combined)),
                error: None,
            },
            Err(e) => Self { r: p.r, components_upper: None, combined_upper: None, error: Some(e.clone()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportBody {
    Certify { certificate: CertificateReport },
    SweepDigits { rows: Vec<SweepRowReport> },
    RadiusSweep {
        /// Reference radius the multipliers scale.
        scale: f64,
        rows: Vec<RadiusRowReport>,
    },
    GammaCurve { points: Vec<CurvePointReport> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub sha256: String,
}

impl InputInfo {
    pub fn new(system: Option<String>, bytes: &[u8]) -> Self {
        Self { system, sha256: digest(bytes) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub precision: u32,
    pub mode: Mode,
    /// `"auto"` or the radius used for every ingredient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_side: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<Vec<u32>>,
    /// Decimal rounding rule for precision sweeps.
    pub rounding: String,
    /// Coordinates entering `‖(1,x)‖`.
    pub point_norm: String,
    /// Bound used for the operator norm in μ.
    pub operator_norm: String,
}

impl RunConfig {
    pub fn new(precision: u32, mode: Mode) -> Self {
        Self {
            precision,
            mode,
            radius: None,
            box_side: None,
            digits: None,
            rounding: "half-even".into(),
            point_norm: "all-coordinates".into(),
            operator_norm: "frobenius".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: String,
    pub input: InputInfo,
    pub config: RunConfig,
    pub result: ReportBody,
    /// Overall verdict; only single certifications have one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub wall_time_seconds: f64,
}

impl Report {
    pub fn new(input: InputInfo, config: RunConfig, result: ReportBody, wall_time_seconds: f64) -> Self {
        let verdict = match &result {
            ReportBody::Certify { certificate } => Some(certificate.verdict()),
            _ => None,
        };
        Self { schema: REPORT_SCHEMA.into(), input, config, result, verdict, wall_time_seconds }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Domain(format!("unsupported report schema {:?}", r.schema)));
        }
        Ok(r)
    }

    /// Copy with the wall time zeroed, for determinism checks.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_seconds: 0.0, ..self.clone() }
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input sha256 {}", self.input.sha256);
        let c = &self.config;
        let _ = writeln!(s, "precision {} bits, mode {}", c.precision, c.mode);
        match &self.result {
            ReportBody::Certify { certificate } => match certificate {
                CertificateReport::Krawczyk(k) => krawczyk_text(&mut s, k),
                CertificateReport::Alpha(a) => alpha_text(&mut s, a),
            },
            ReportBody::SweepDigits { rows } => {
                let _ = writeln!(s, "{:>3}  {:<10} {:<10} {:>14}", "d", "krawczyk", "alpha", "alpha bound");
                for r in rows {
                    let k = r.krawczyk.as_ref().map_or("-".to_string(), |k| verdict_word(k.verdict).into());
                    let (a, b) = r.alpha.as_ref().map_or(("-".to_string(), "-".to_string()), |a| {
                        (verdict_word(a.verdict).into(), short(&a.alpha_upper))
                    });
                    let _ = writeln!(s, "{:>3}  {:<10} {:<10} {:>14}", r.digits, k, a, b);
                }
            }
            ReportBody::RadiusSweep { scale, rows } => {
                let _ = writeln!(s, "reference radius {scale}");
                let _ = writeln!(s, "{:>10} {:>12} {:>14} {:>14}  verdict", "k", "r", "gamma", "alpha");
                for r in rows {
                    let k = r.multiplier.map_or("-".to_string(), |k| format!("{k:e}"));
                    let a = &r.certificate;
                    let v = if r.radius_exceeded { "radius-exceeded" } else { verdict_word(a.verdict) };
                    let _ = writeln!(
                        s,
                        "{:>10} {:>12.6} {:>14} {:>14}  {}",
                        k,
                        r.r,
                        short(&a.gamma_upper),
                        short(&a.alpha_upper),
                        v
                    );
                }
            }
            ReportBody::GammaCurve { points } => s.push_str(&curve_tsv(points)),
        }
        if let Some(v) = self.verdict {
            let _ = writeln!(s, "verdict {}", verdict_word(v));
        }
        let _ = writeln!(s, "wall time {:.3} s", self.wall_time_seconds);
        s
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

/// Six significant digits, still rounded upward.
fn short(s: &str) -> String {
    shorten(s, true)
}

/// Six significant digits, rounded downward.
fn short_down(s: &str) -> String {
    shorten(s, false)
}

fn shorten(s: &str, upward: bool) -> String {
    // Reading toward the opposite direction keeps exact short values short.
    let read = if upward { Round::Down } else { Round::Up };
    match parse_float(s, 256, read) {
        Some(x) if x.is_finite() => {
            let t = if upward { fmt_up(&x, 6) } else { fmt_down(&x, 6) };
            match t.parse::<f64>() {
                Ok(v) => format!("{v:e}"),
                Err(_) => t,
            }
        }
        _ => s.to_string(),
    }
}

fn krawczyk_text(s: &mut String, k: &KrawczykReport) {
    let _ = writeln!(s, "method krawczyk");
    let _ = writeln!(s, "center {}", k.center.join(", "));
    for (i, (r, img)) in k
        .region
        .iter()
        .zip(k.image.iter().flatten().map(Some).chain(std::iter::repeat(None)))
        .enumerate()
    {
        let img = img.map_or("-".to_string(), interval_str);
        let _ = writeln!(s, "  x{i}: box {}  image {}", interval_str(r), img);
    }
    if let Some(c) = &k.contraction_upper {
        let _ = writeln!(s, "contraction bound {}", short(c));
    }
    if let Some(f) = k.failure {
        let _ = writeln!(s, "failure {}", serde_json::to_value(f).expect("enum").as_str().unwrap_or(""));
    }
    if let Some(e) = &k.error {
        let _ = writeln!(s, "error {e}");
    }
}

fn interval_str(t: &IntervalText) -> String {
    match &t.im {
        None => format!("[{}, {}]", short_down(&t.re[0]), short(&t.re[1])),
        Some(im) => format!(
            "[{}, {}] + i[{}, {}]",
            short_down(&t.re[0]),
            short(&t.re[1]),
            short_down(&im[0]),
            short(&im[1])
        ),
    }
}

fn alpha_text(s: &mut String, a: &AlphaReport) {
    let _ = writeln!(s, "method alpha");
    let _ = writeln!(s, "point {}", a.point.join(", "));
    let _ = writeln!(s, "beta  <= {}", a.beta_upper);
    let _ = writeln!(s, "mu    <= {}", a.mu_upper);
    for (i, g) in a.ingredients.iter().enumerate() {
        let _ = writeln!(
            s,
            "  ingredient {i}: r = {}, C <= {} (R >= {})",
            g.r,
            short(&g.c_upper),
            short_down(&g.convergence_radius_lower)
        );
    }
    let _ = writeln!(s, "gamma <= {}", a.gamma_upper);
    let _ = writeln!(s, "alpha <= {}  (threshold {})", a.alpha_upper, a.threshold_lower);
    if let Some(r) = &a.uniqueness_radius_lower {
        let _ = writeln!(s, "unique root within {}", short_down(r));
    }
    if let Some(e) = &a.error {
        let _ = writeln!(s, "error {e}");
    }
}

/// Tab-separated curve data; missing values are `NA`. An empty grid gives an empty file.
pub fn curve_tsv(points: &[CurvePointReport]) -> String {
    if points.is_empty() {
        return String::new();
    }
    let mut s = String::from("r\tgamma0\tgamma1\tgamma2\tgamma_combined\n");
    for p in points {
        let cell = |v: Option<&String>| v.cloned().unwrap_or_else(|| "NA".into());
        let comps = p.components_upper.as_ref();
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            p.r,
            cell(comps.map(|c| &c[0])),
            cell(comps.map(|c| &c[1])),
            cell(comps.map(|c| &c[2])),
            cell(p.combined_upper.as_ref())
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_round_outward() {
        let third = Float::with_val(64, 1) / 3u32;
        let hi = Float::with_val(200, Float::parse(up(&third)).unwrap());
        let lo = Float::with_val(200, Float::parse(down(&third)).unwrap());
        assert!(lo <= third && third <= hi && lo < hi);
    }

    #[test]
    fn short_never_rounds_down() {
        for v in ["1.234565e3", "0.99999951", "84.1574", "7.33e7", "-2.5000001", "0.1"] {
            let x: f64 = v.parse().unwrap();
            assert!(short(v).parse::<f64>().unwrap() >= x, "{v}");
            assert!(short_down(v).parse::<f64>().unwrap() <= x, "{v}");
        }
        assert_eq!(short("inf"), "inf");
        assert_eq!(short("2.50000000000000000000000"), "2.5e0");
        assert_eq!(short("0.1"), "1e-1");
    }

    #[test]
    fn empty_curve_is_empty_file() {
        assert_eq!(curve_tsv(&[]), "");
        let p = CurvePointReport { r: 0.5, components_upper: None, combined_upper: None, error: Some("x".into()) };
        assert!(curve_tsv(&[p]).ends_with("0.5\tNA\tNA\tNA\tNA\n"));
    }
}
