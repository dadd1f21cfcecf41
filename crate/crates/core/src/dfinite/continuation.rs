use rug::{Integer, Rational};

use super::expansion::LocalSeries;
use super::radius::radius_lower_bound;
use super::DFiniteFunction;
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::ComplexInterval;

/// Safety factor applied to the convergence radius when choosing a step.
const SAFETY: f64 = 0.5;
/// Step cap when the leading coefficient has no roots.
const FREE_STEP: f64 = 1.0;
/// Granularity of the path parameter: waypoints are dyadic along each leg.
const MU_BITS: u32 = 40;
const MAX_STEPS: usize = 20_000;
const MAX_HALVINGS: usize = 12;

/// Waypoints visited from the base point to a target, base point first.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationPath {
    pub waypoints: Vec<QComplex>,
}

fn blocked(target: &QComplex) -> Error {
    Error::PathBlocked { target: target.to_string() }
}

/// One straight leg `from → to`, advancing the derivative vector `state`.
fn march(
    g: &DFiniteFunction,
    from: &QComplex,
    to: &QComplex,
    mut state: Vec<ComplexInterval>,
    prec: u32,
    path: &mut Vec<QComplex>,
) -> Result<Vec<ComplexInterval>> {
    let dir = to.sub(from);
    let length = dir.to_c64().norm();
    if length == 0.0 {
        return Ok(state);
    }
    let real_leg = g.is_real() && from.is_real() && to.is_real();
    let scale = Rational::from(Integer::from(1) << MU_BITS);
    let mut mu = Rational::new();
    let mut steps = 0;
    while mu < 1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(blocked(to));
        }
        let c = from.add(&dir.scale(&mu));
        let radius = match radius_lower_bound(g, &c, prec) {
            Ok(r) => r,
            Err(_) => return Err(blocked(to)),
        };
        let mut step = if radius.is_infinite() { FREE_STEP } else { SAFETY * radius.to_f64() };
        let mut halvings = 0;
        loop {
            let remaining = Rational::from(1 - &mu);
            let dmu = step / length;
            let next = if dmu >= remaining.to_f64() {
                Rational::from(1)
            } else {
                let ticks = (dmu * scale.to_f64()).floor();
                if !(ticks >= 1.0) {
                    return Err(blocked(to));
                }
                let ticks = Rational::from_f64(ticks).expect("finite");
                Rational::from(&mu + ticks / &scale)
            };
            let h = dir.scale(&Rational::from(&next - &mu));
            let r_max = h.to_interval(prec).mag();
            if !(r_max < radius) {
                step *= 0.5;
                continue;
            }
            let attempt = LocalSeries::build(g, &c, &r_max, &radius, prec, None);
            match attempt {
                Ok(series) => {
                    let t = series.transition(&h, g.is_real());
                    let mut next_state = Vec::with_capacity(state.len());
                    for row in &t {
                        let mut acc = ComplexInterval::zero(prec);
                        for (tij, dj) in row.iter().zip(&state) {
                            acc = &acc + &(tij * dj);
                        }
                        next_state.push(if real_leg { acc.real_part() } else { acc });
                    }
                    if next_state.iter().any(|v| !v.is_finite()) {
                        return Err(Error::TailNotDominated);
                    }
                    state = next_state;
                    mu = next;
                    path.push(from.add(&dir.scale(&mu)));
                    break;
                }
                Err(Error::TailNotDominated) if halvings < MAX_HALVINGS => {
                    halvings += 1;
                    step *= 0.5;
                }
                Err(Error::TailNotDominated) => return Err(blocked(to)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(state)
}

fn initial_state(g: &DFiniteFunction, prec: u32) -> Vec<ComplexInterval> {
    g.initial_values().iter().map(|v| v.with_prec(prec)).collect()
}

/// Enclosures of `g(target), g'(target), ..., g^(r-1)(target)` together with
/// the path used.
pub fn continue_with_path(
    g: &DFiniteFunction,
    target: &QComplex,
    prec: u32,
) -> Result<(Vec<ComplexInterval>, ContinuationPath)> {
    let base = g.base_point().clone();
    if *target == base {
        return Ok((initial_state(g, prec), ContinuationPath { waypoints: vec![base] }));
    }
    if g.leading().eval(target).is_zero() {
        return Err(blocked(target));
    }
    if let Some((state, waypoints)) = g.cached(prec, target) {
        return Ok((state, ContinuationPath { waypoints }));
    }
    let mut path = vec![base.clone()];
    let straight = march(g, &base, target, initial_state(g, prec), prec, &mut path);
    let result = match straight {
        Ok(state) => Ok(state),
        Err(Error::PathBlocked { .. }) if !(g.is_real() && target.is_real()) => {
            let mid = base.add(target).scale(&Rational::from((1, 2)));
            let half = target.sub(&base).scale(&Rational::from((1, 2)));
            let turn = QComplex::new(Rational::from(-&half.im), half.re.clone());
            let mut found = Err(blocked(target));
            for corner in [mid.add(&turn), mid.sub(&turn)] {
                path.truncate(1);
                let leg = march(g, &base, &corner, initial_state(g, prec), prec, &mut path)
                    .and_then(|s| march(g, &corner, target, s, prec, &mut path));
                if let Ok(state) = leg {
                    found = Ok(state);
                    break;
                }
            }
            found
        }
        Err(e) => Err(e),
    };
    let state = result?;
    g.store(prec, target, state.clone(), path.clone());
    Ok((state, ContinuationPath { waypoints: path }))
}

/// Enclosures of `g(target), ..., g^(r-1)(target)` for every member of the family.
pub fn continue_to(g: &DFiniteFunction, target: &QComplex, prec: u32) -> Result<Vec<ComplexInterval>> {
    continue_with_path(g, target, prec).map(|(s, _)| s)
}

