use rug::float::{Round, Special};
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::dfinite::{disk_max_bounds, expand_at, radius_lower_bound, DFiniteFunction, DiskOptions, TaylorExpansion};
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{fmt_down, fmt_up, ComplexInterval, IntervalBox, IntervalMatrix, RealInterval};
use crate::krawczyk::Verdict;
use crate::poly::{sqrt_up, MultivariatePolynomial};
use crate::system::{IngredientSystem, Mode};

/// Bound on α below which the stricter same-root and uniqueness statements hold.
pub const SAME_ROOT_ALPHA: f64 = 0.03;

/// Multiples of the convergence radius tried by [`radius_search`].
pub const RELATIVE_GRID: [f64; 9] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.3, 0.5, 0.8];

/// Absolute radii tried by [`radius_search`] for entire ingredients.
pub const ABSOLUTE_GRID: [f64; 17] = [
    1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0,
];

/// How the disk radius of each ingredient is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusPolicy {
    /// Same radius for every ingredient.
    Uniform(f64),
    /// One radius per ingredient row, in row order.
    PerIngredient(Vec<f64>),
    /// Grid search minimizing each ingredient constant.
    Auto,
}

#[derive(Clone, Debug)]
pub struct AlphaOptions {
    pub prec: u32,
    pub disk: DiskOptions,
    /// Overrides the computed convergence radius bound in the relative grid.
    pub radius_scale: Option<f64>,
    /// Explicit candidate radii for the search, used for every ingredient.
    pub candidates: Option<Vec<f64>>,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        Self {
            prec: crate::dfinite::DEFAULT_PRECISION,
            disk: DiskOptions::default(),
            radius_scale: None,
            candidates: None,
        }
    }
}

/// Constants for one ingredient at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct IngredientConstants {
    pub r: f64,
    /// Lower bound on the convergence radius at the input point.
    pub radius: Float,
    /// Upper bounds on `|h|`, `|h'|`, `|h''|` over the closed disk, `h` the ingredient function.
    pub m: [Float; 3],
    /// `(1/r) max(1, M/r)`, `(1/r) max(1, M'/2)`, `(1/r) max(1, M'' r/2)`.
    pub parts: [Float; 3],
    /// Smallest of `parts`.
    pub c: Float,
}

/// Everything needed to decide the α-test at a point.
#[derive(Clone, Debug)]
pub struct AlphaCertificate {
    pub point: Vec<QComplex>,
    pub beta_upper: Float,
    pub mu_upper: Float,
    /// Upper bound on `‖P‖`.
    pub system_norm: Float,
    /// Lower bound on `‖(1, x)‖` over all coordinates.
    pub point_norm: Float,
    /// Upper bound on `d^{3/2} / (2‖(1, x)‖)`.
    pub poly_term: Float,
    pub degree: u32,
    pub ingredients: Vec<IngredientConstants>,
    pub gamma_upper: Float,
    pub alpha_upper: Float,
    /// Lower endpoint of the enclosure of `(13 − 3√17)/4`.
    pub threshold: Float,
    pub verdict: Verdict,
    /// `1/(20γ)`, recorded when `α < 0.03`.
    pub uniqueness_radius: Option<Float>,
    pub nonreal: Option<bool>,
    pub error: Option<String>,
    /// Short name of the error kind, e.g. `RadiusExceeded`.
    pub error_kind: Option<String>,
}

fn inf(prec: u32) -> Float {
    Float::with_val(prec, Special::Infinity)
}

/// `(13 − 3√17)/4` as an interval.
pub fn alpha_threshold(prec: u32) -> RealInterval {
    let s17 = RealInterval::from_int(17, prec).sqrt().expect("positive");
    let num = &RealInterval::from_int(13, prec) - &(&RealInterval::from_int(3, prec) * &s17);
    num.div(&RealInterval::from_int(4, prec)).expect("nonzero")
}

/// Upper bound on the Bombieri–Weyl norm of a polynomial.
pub fn bw_norm(p: &MultivariatePolynomial, prec: u32) -> Float {
    p.bw_norm(prec)
}

/// Upper bound on `‖P‖ = (Σ ‖p_i‖²)^{1/2}`.
pub fn bw_norm_system(polys: &[MultivariatePolynomial], prec: u32) -> Float {
    let s: Rational = polys.iter().map(|p| p.bw_norm_sq()).sum();
    sqrt_up(&s, prec)
}

/// `‖(1, x)‖` as an interval.
pub fn point_norm(x: &[QComplex], prec: u32) -> RealInterval {
    let s: Rational = x.iter().map(|c| c.abs2()).sum::<Rational>() + 1;
    RealInterval::from_rational(&s, prec).sqrt().expect("positive")
}

/// Diagonal of `Δ_P(x)`: `√d_i ‖(1, x)‖^{d_i − 1}`.
pub fn delta_p(polys: &[MultivariatePolynomial], x: &[QComplex], prec: u32) -> Vec<RealInterval> {
    let norm = point_norm(x, prec);
    polys
        .iter()
        .map(|p| {
            let d = p.degree();
            if d == 0 {
                return RealInterval::zero(prec);
            }
            let root = RealInterval::from_int(d as i64, prec).sqrt().expect("positive");
            &root * &norm.powi(d - 1)
        })
        .collect()
}

/// Diagonal of `Δ_F(x) = diag(Δ_P(x)‖P‖, I_m)`.
pub fn delta_f(sys: &IngredientSystem, x: &[QComplex], prec: u32) -> Vec<RealInterval> {
    let pn = RealInterval::point(bw_norm_system(sys.polys(), prec));
    let mut out: Vec<RealInterval> = delta_p(sys.polys(), x, prec).iter().map(|v| v * &pn).collect();
    out.extend((0..sys.m()).map(|_| RealInterval::one(prec)));
    out
}

fn inverse_enclosure(jac: &IntervalMatrix) -> Result<IntervalMatrix> {
    let n = jac.rows();
    let prec = jac.prec();
    let mut inv = IntervalMatrix::zeros(n, n, prec);
    for j in 0..n {
        let col = IntervalMatrix::identity(n, prec).column(j)?;
        let sol = jac.solve_enclosure(&col)?;
        for i in 0..n {
            inv.set(i, j, sol.get(i).clone());
        }
    }
    Ok(inv)
}

/// Upper bound on `‖F'(x)^{-1} F(x)‖₂`.
pub fn beta_upper(sys: &IngredientSystem, x: &[QComplex], prec: u32) -> Result<Float> {
    let f = sys.eval_f_point(x, prec)?;
    let jac = sys.jacobian_point(x, prec)?;
    Ok(jac.solve_enclosure(&f)?.euclidean_norm_upper())
}

/// Upper bound on `max(1, ‖F'(x)^{-1} Δ_F‖₂)` through the Frobenius norm.
pub fn mu_upper(sys: &IngredientSystem, x: &[QComplex], prec: u32) -> Result<Float> {
    let jac = sys.jacobian_point(x, prec)?;
    mu_from_jacobian(sys, x, &jac, prec)
}

fn mu_from_jacobian(sys: &IngredientSystem, x: &[QComplex], jac: &IntervalMatrix, prec: u32) -> Result<Float> {
    let inv = inverse_enclosure(jac)?;
    let delta = delta_f(sys, x, prec);
    let n = sys.dim();
    let mut scaled = IntervalMatrix::zeros(n, n, prec);
    for i in 0..n {
        for j in 0..n {
            scaled.set(i, j, inv.get(i, j).scale(&delta[j]));
        }
    }
    let norm = scaled.frobenius_upper();
    Ok(if norm < 1 { Float::with_val(prec, 1) } else { norm })
}

/// Ingredient constants for `h = g^(shift)` around `x` at radius `r`.
pub fn ingredient_c(
    g: &DFiniteFunction,
    shift: usize,
    x: &QComplex,
    r: f64,
    opts: &DiskOptions,
    prec: u32,
) -> Result<IngredientConstants> {
    let radius = radius_lower_bound(g, x, prec)?;
    let rf = Float::with_val(prec, r);
    if !(r > 0.0) || !(rf < radius) {
        return Err(Error::RadiusExceeded {
            r: fmt_up(&rf, 10),
            bound: fmt_down(&radius, 10),
        });
    }
    let mut ms = disk_max_bounds(g, x, &rf, &[shift, shift + 1, shift + 2], opts, prec)?;
    let m2 = ms.pop().expect("three bounds");
    let m1 = ms.pop().expect("three bounds");
    let m0 = ms.pop().expect("three bounds");
    let div_up = |a: &Float, b: &Float| Float::with_val_round(prec, a / b, Round::Up).0;
    let mul_up = |a: &Float, b: &Float| Float::with_val_round(prec, a * b, Round::Up).0;
    let two = Float::with_val(prec, 2);
    let one = Float::with_val(prec, 1);
    let finish = |v: Float| div_up(if v < one { &one } else { &v }, &rf);
    let parts = [
        finish(div_up(&m0, &rf)),
        finish(div_up(&m1, &two)),
        finish(div_up(&mul_up(&m2, &rf), &two)),
    ];
    let c = parts.iter().min_by(|a, b| a.partial_cmp(b).expect("not nan")).expect("three parts").clone();
    Ok(IngredientConstants {
        r,
        radius,
        m: [m0, m1, m2],
        parts,
        c,
    })
}

/// Data shared by every radius choice at a point.
struct PointData {
    beta: Float,
    mu: Float,
    system_norm: Float,
    point_norm: Float,
    poly_term: Float,
    degree: u32,
}

fn point_data(sys: &IngredientSystem, x: &[QComplex], prec: u32) -> Result<PointData> {
    let f = sys.eval_f_point(x, prec)?;
    let jac = sys.jacobian_point(x, prec)?;
    let beta = match jac.solve_enclosure(&f) {
        Ok(s) => s.euclidean_norm_upper(),
        Err(Error::NotDiagonallyDominated { .. }) => inf(prec),
        Err(e) => return Err(e),
    };
    let mu = match mu_from_jacobian(sys, x, &jac, prec) {
        Ok(m) => m,
        Err(Error::NotDiagonallyDominated { .. }) => inf(prec),
        Err(e) => return Err(e),
    };
    let norm = point_norm(x, prec);
    let d = sys.max_degree();
    let d32 = RealInterval::from_int(d as i64, prec).powi(3).sqrt().expect("positive");
    let denom = &RealInterval::from_int(2, prec) * &norm;
    let poly_term = d32.div(&denom).expect("positive").hi().clone();
    Ok(PointData {
        beta,
        mu,
        system_norm: bw_norm_system(sys.polys(), prec),
        point_norm: norm.lo().clone(),
        poly_term,
        degree: d,
    })
}

/// `μ (d^{3/2}/(2‖(1,x)‖) + Σ C_i)`, rounded up.
fn combine_gamma(mu: &Float, poly_term: &Float, cs: &[&Float]) -> Float {
    let prec = mu.prec();
    let mut s = poly_term.clone();
    for c in cs {
        s = Float::with_val_round(prec, &s + *c, Round::Up).0;
    }
    Float::with_val_round(prec, mu * &s, Round::Up).0
}

/// Upper bound on `γ(F, x)` for the given radii.
pub fn gamma_upper(sys: &IngredientSystem, x: &[QComplex], radii: &[f64], opts: &AlphaOptions) -> Result<Float> {
    let pd = point_data(sys, x, opts.prec)?;
    let consts = constants_for(sys, x, radii, opts)?;
    Ok(combine_gamma(&pd.mu, &pd.poly_term, &consts.iter().map(|c| &c.c).collect::<Vec<_>>()))
}

fn constants_for(sys: &IngredientSystem, x: &[QComplex], radii: &[f64], opts: &AlphaOptions) -> Result<Vec<IngredientConstants>> {
    if radii.len() != sys.m() {
        return Err(Error::DimensionMismatch { expected: sys.m(), found: radii.len() });
    }
    sys.ingredients()
        .iter()
        .zip(radii)
        .enumerate()
        .map(|(j, (row, &r))| {
            ingredient_c(&row.func, row.derivative, &x[row.input], r, &opts.disk, opts.prec).map_err(|e| e.at_row(sys.n() + j))
        })
        .collect()
}

/// Candidate radii for one ingredient.
pub fn radius_grid(radius: &Float, scale: Option<f64>) -> Vec<f64> {
    let base = scale.unwrap_or_else(|| radius.to_f64());
    if base.is_finite() {
        RELATIVE_GRID.iter().map(|k| k * base).collect()
    } else {
        ABSOLUTE_GRID.to_vec()
    }
}

/// Per-ingredient radii minimizing the resulting α bound over the search grid.
///
/// The ingredient constants enter γ additively, so each radius is chosen
/// independently. Radii whose Cauchy lower estimate already exceeds the best
/// constant so far are skipped. Ingredients where every grid radius fails get
/// the smallest grid value.
pub fn radius_search(sys: &IngredientSystem, x: &[QComplex], opts: &AlphaOptions) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sys.m());
    for (j, row) in sys.ingredients().iter().enumerate() {
        let xin = &x[row.input];
        let radius = radius_lower_bound(&row.func, xin, opts.prec).map_err(|e| e.at_row(sys.n() + j))?;
        let grid = match &opts.candidates {
            Some(c) if !c.is_empty() => c.clone(),
            _ => radius_grid(&radius, opts.radius_scale),
        };
        let local = prune_expansion(&row.func, xin, &radius, opts.prec);
        let mut best: Option<(Float, f64)> = None;
        for &r in &grid {
            if let (Some((b, _)), Some(e)) = (&best, &local) {
                if c_lower(e, row.derivative, r) >= b.to_f64() {
                    continue;
                }
            }
            if let Ok(c) = ingredient_c(&row.func, row.derivative, xin, r, &opts.disk, opts.prec) {
                if best.as_ref().map_or(true, |(b, _)| c.c < *b) {
                    best = Some((c.c, r));
                }
            }
        }
        out.push(best.map_or(grid[0], |(_, r)| r));
    }
    Ok(out)
}

/// Terms kept for the pruning estimate in [`radius_search`].
const PRUNE_TERMS: usize = 96;

fn prune_expansion(g: &DFiniteFunction, x: &QComplex, radius: &Float, prec: u32) -> Option<TaylorExpansion> {
    let mut r_max = Float::with_val(prec, radius / 1024u32);
    if !r_max.is_finite() || r_max > 1e-3 {
        r_max = Float::with_val(prec, 1e-3);
    }
    expand_at(g, x, PRUNE_TERMS, &r_max, prec).ok()
}

/// Cheap lower estimate of `C` at radius `r`. On the circle `|z−x| = r` the
/// mean of `|h|²` is `Σ|h_k|² r^{2k}`, so its root bounds the maximum from below.
/// Only used to skip radii that cannot beat the best one found so far.
fn c_lower(e: &TaylorExpansion, shift: usize, r: f64) -> f64 {
    let mut out = f64::INFINITY;
    for j in 0..3 {
        let m = e
            .derivative_coeffs(shift + j)
            .iter()
            .enumerate()
            .map(|(k, c)| (c.mig().to_f64() * r.powi(k as i32)).powi(2))
            .filter(|v| v.is_finite())
            .sum::<f64>()
            .sqrt();
        let v = match j {
            0 => m / r,
            1 => m / 2.0,
            _ => m * r / 2.0,
        };
        out = out.min(v.max(1.0) / r);
    }
    out
}

fn resolve_radii(sys: &IngredientSystem, x: &[QComplex], policy: &RadiusPolicy, opts: &AlphaOptions) -> Result<Vec<f64>> {
    match policy {
        RadiusPolicy::Uniform(r) => Ok(vec![*r; sys.m()]),
        RadiusPolicy::PerIngredient(v) => {
            if v.len() != sys.m() {
                return Err(Error::DimensionMismatch { expected: sys.m(), found: v.len() });
            }
            Ok(v.clone())
        }
        RadiusPolicy::Auto => radius_search(sys, x, opts),
    }
}

fn failed(x: &[QComplex], prec: u32, e: &Error) -> AlphaCertificate {
    AlphaCertificate {
        point: x.to_vec(),
        beta_upper: inf(prec),
        mu_upper: inf(prec),
        system_norm: inf(prec),
        point_norm: Float::with_val(prec, 0),
        poly_term: inf(prec),
        degree: 0,
        ingredients: Vec::new(),
        gamma_upper: inf(prec),
        alpha_upper: inf(prec),
        threshold: alpha_threshold(prec).lo().clone(),
        verdict: Verdict::Fail,
        uniqueness_radius: None,
        nonreal: None,
        error: Some(e.to_string()),
        error_kind: Some(e.kind().to_string()),
    }
}

/// Runs the α-test at `x`. Oracle failures give a failing certificate with the error recorded.
pub fn alpha_test(sys: &IngredientSystem, x: &[QComplex], policy: &RadiusPolicy, opts: &AlphaOptions) -> AlphaCertificate {
    let prec = opts.prec;
    if x.len() != sys.dim() {
        return failed(x, prec, &Error::DimensionMismatch { expected: sys.dim(), found: x.len() });
    }
    if sys.mode() == Mode::Real && !IngredientSystem::point_is_real(x) {
        return failed(x, prec, &Error::Domain("real mode needs a real point".into()));
    }
    let pd = match point_data(sys, x, prec) {
        Ok(p) => p,
        Err(e) => return failed(x, prec, &e),
    };
    let mut cert = failed(x, prec, &Error::Domain(String::new()));
    cert.error = None;
    cert.error_kind = None;
    cert.beta_upper = pd.beta.clone();
    cert.mu_upper = pd.mu.clone();
    cert.system_norm = pd.system_norm.clone();
    cert.point_norm = pd.point_norm.clone();
    cert.poly_term = pd.poly_term.clone();
    cert.degree = pd.degree;
    let consts = resolve_radii(sys, x, policy, opts).and_then(|radii| constants_for(sys, x, &radii, opts));
    let consts = match consts {
        Ok(c) => c,
        Err(e) => {
            cert.error = Some(e.to_string());
            cert.error_kind = Some(e.kind().to_string());
            return cert;
        }
    };
    let gamma = combine_gamma(&pd.mu, &pd.poly_term, &consts.iter().map(|c| &c.c).collect::<Vec<_>>());
    let alpha = Float::with_val_round(prec, &pd.beta * &gamma, Round::Up).0;
    cert.ingredients = consts;
    if alpha < cert.threshold {
        cert.verdict = Verdict::Pass;
    }
    if alpha < SAME_ROOT_ALPHA && gamma.is_finite() && gamma > 0 {
        let twenty_gamma = Float::with_val_round(prec, &gamma * 20u32, Round::Up).0;
        let rad = Float::with_val_round(prec, twenty_gamma.recip_ref(), Round::Down).0;
        cert.uniqueness_radius = Some(rad);
        cert.nonreal = Some(nonreal_from(x, &pd.beta, prec));
    }
    cert.gamma_upper = gamma;
    cert.alpha_upper = alpha;
    cert
}

/// `‖x − x̄‖ > 4β`, using a lower bound on the left side.
fn nonreal_from(x: &[QComplex], beta: &Float, prec: u32) -> bool {
    let s: Rational = x.iter().map(|c| Rational::from(c.im.square_ref())).sum();
    if s == 0 {
        return false;
    }
    let lhs = &RealInterval::from_int(2, prec) * &RealInterval::from_rational(&s, prec).sqrt().expect("positive");
    let rhs = Float::with_val_round(prec, beta * 4u32, Round::Up).0;
    *lhs.lo() > rhs
}

/// Upper bound on `‖x − y‖₂`.
pub fn distance_upper(x: &[QComplex], y: &[QComplex], prec: u32) -> Float {
    let s: Rational = x.iter().zip(y).map(|(a, b)| a.sub(b).abs2()).sum();
    sqrt_up(&s, prec)
}

/// Whether `x` and `y` are certified to approximate the same root.
pub fn same_root_test(sys: &IngredientSystem, x: &[QComplex], y: &[QComplex], policy: &RadiusPolicy, opts: &AlphaOptions) -> Result<bool> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let cert = alpha_test(sys, x, policy, opts);
    if let Some(e) = cert.error {
        return Err(Error::Domain(e));
    }
    Ok(match cert.uniqueness_radius {
        Some(rad) => distance_upper(x, y, opts.prec) < rad,
        None => false,
    })
}

/// Whether the root associated with `x` is certified to be non-real.
pub fn nonreal_test(sys: &IngredientSystem, x: &[QComplex], policy: &RadiusPolicy, opts: &AlphaOptions) -> Result<bool> {
    let cert = alpha_test(sys, x, policy, opts);
    if let Some(e) = cert.error {
        return Err(Error::Domain(e));
    }
    Ok(cert.nonreal.unwrap_or(false))
}

/// γ bounds using each ingredient part alone, and the combined bound.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaComponents {
    pub r: f64,
    pub parts: [Float; 3],
    pub combined: Float,
}

/// Component γ bounds for a uniform radius `r`.
pub fn gamma_components(sys: &IngredientSystem, x: &[QComplex], r: f64, opts: &AlphaOptions) -> Result<GammaComponents> {
    let pd = point_data(sys, x, opts.prec)?;
    let consts = constants_for(sys, x, &vec![r; sys.m()], opts)?;
    let part = |k: usize| combine_gamma(&pd.mu, &pd.poly_term, &consts.iter().map(|c| &c.parts[k]).collect::<Vec<_>>());
    Ok(GammaComponents {
        r,
        parts: [part(0), part(1), part(2)],
        combined: combine_gamma(&pd.mu, &pd.poly_term, &consts.iter().map(|c| &c.c).collect::<Vec<_>>()),
    })
}

/// Box enclosing every point within `2β` of `x`, for reporting.
pub fn root_ball(x: &[QComplex], beta: &Float, complex: bool, prec: u32) -> Result<IntervalBox> {
    let two_beta = Float::with_val_round(prec, beta * 2u32, Round::Up).0;
    IntervalBox::new(
        x.iter()
            .map(|c| {
                let z = ComplexInterval::from_exact(c, prec);
                if complex {
                    z.inflate(&two_beta)
                } else {
                    z.inflate_real(&two_beta)
                }
            })
            .collect(),
    )
}
