//! Batch drivers: precision sweeps, radius sweeps and γ curves.

use rayon::prelude::*;
use rug::{Float, Integer, Rational};

use crate::alpha::{alpha_test, gamma_components, AlphaCertificate, AlphaOptions, GammaComponents, RadiusPolicy};
use crate::error::Result;
use crate::exact::QComplex;
use crate::interval::IntervalBox;
use crate::krawczyk::{krawczyk_test, KrawczykCertificate};
use crate::system::{IngredientSystem, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Krawczyk,
    Alpha,
}

/// Rounds to `d` decimal places, ties to even.
pub fn round_decimal(q: &Rational, d: u32) -> Rational {
    let scale = Integer::from(Integer::u_pow_u(10, d));
    let scaled = Rational::from(q * &scale);
    let floor = Integer::from(scaled.floor_ref());
    let frac = Rational::from(&scaled - &floor);
    let half = Rational::from((1, 2));
    let n = if frac > half || (frac == half && floor.is_odd()) {
        floor + 1
    } else {
        floor
    };
    Rational::from((n, scale))
}

pub fn round_point(x: &[QComplex], d: u32) -> Vec<QComplex> {
    x.iter()
        .map(|c| QComplex::new(round_decimal(&c.re, d), round_decimal(&c.im, d)))
        .collect()
}

/// `2·10^{-d}`.
pub fn sweep_box_side(d: u32) -> Rational {
    Rational::from((2, Integer::from(Integer::u_pow_u(10, d))))
}

/// Box of side `side` around `center`; imaginary parts are widened only in complex mode.
pub fn region_around(sys: &IngredientSystem, center: &[QComplex], side: &Rational, prec: u32) -> Result<IntervalBox> {
    let s = Float::with_val(prec, side);
    IntervalBox::around(center, &s, sys.mode() == Mode::Complex, prec)
}

/// Krawczyk test on the box of side `side` centered at `center`.
pub fn certify_krawczyk(sys: &IngredientSystem, center: &[QComplex], side: &Rational, prec: u32) -> Result<KrawczykCertificate> {
    let region = region_around(sys, center, side, prec)?;
    Ok(krawczyk_test(sys, &region, Some(center), None))
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub digits: u32,
    pub point: Vec<QComplex>,
    pub box_side: Rational,
    pub krawczyk: Option<KrawczykCertificate>,
    pub alpha: Option<AlphaCertificate>,
}

/// Rounds `x` to each number of decimal places and runs the requested tests.
pub fn sweep_digits(
    sys: &IngredientSystem,
    x: &[QComplex],
    digits: &[u32],
    methods: &[Method],
    policy: &RadiusPolicy,
    opts: &AlphaOptions,
) -> Result<Vec<SweepRow>> {
    digits
        .par_iter()
        .map(|&d| {
            let point = round_point(x, d);
            let box_side = sweep_box_side(d);
            let krawczyk = if methods.contains(&Method::Krawczyk) {
                Some(certify_krawczyk(sys, &point, &box_side, opts.prec)?)
            } else {
                None
            };
            let alpha = methods
                .contains(&Method::Alpha)
                .then(|| alpha_test(sys, &point, policy, opts));
            Ok(SweepRow { digits: d, point, box_side, krawczyk, alpha })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RadiusRow {
    /// Multiple of the reference radius, when the row was specified that way.
    pub multiplier: Option<f64>,
    pub r: f64,
    pub cert: AlphaCertificate,
}

/// α-test at `x` for each uniform radius `scale·k`, `k` in `multipliers`.
pub fn radius_sweep(sys: &IngredientSystem, x: &[QComplex], scale: f64, multipliers: &[f64], opts: &AlphaOptions) -> Vec<RadiusRow> {
    multipliers
        .par_iter()
        .map(|&k| {
            let r = k * scale;
            RadiusRow {
                multiplier: Some(k),
                r,
                cert: alpha_test(sys, x, &RadiusPolicy::Uniform(r), opts),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub r: f64,
    pub value: std::result::Result<GammaComponents, String>,
}

/// γ bounds from each ingredient estimate alone and combined, on a grid of radii.
pub fn gamma_curve(sys: &IngredientSystem, x: &[QComplex], grid: &[f64], opts: &AlphaOptions) -> Vec<CurvePoint> {
    grid.par_iter()
        .map(|&r| CurvePoint {
            r,
            value: gamma_components(sys, x, r, opts).map_err(|e| e.to_string()),
        })
        .collect()
}

/// `start, start+step, ..., ≤ stop`, each snapped to 12 decimals so `0.15` stays `0.15`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || !(stop >= start) {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| {
            let v = start + k as f64 * step;
            let snapped = (v * 1e12).round() / 1e12;
            if (snapped - v).abs() <= 1e-9 * v.abs().max(1.0) {
                snapped
            } else {
                v
            }
        })
        .collect()
}
