use rug::float::Special;
use rug::{Float, Integer, Rational};

use super::recurrence::{derive_recurrence, Recurrence};
use super::DFiniteFunction;
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{ComplexInterval, RealInterval};

const START_TERMS: usize = 16;
const MAX_TERMS: usize = 1 << 13;

/// Rigorous bound on the part of a series beyond its last stored coefficient.
///
/// Every coefficient past `n` satisfies `|a_k| <= weight / rho_star^k`.
#[derive(Clone, Debug)]
pub struct TailBound {
    pub n: usize,
    pub rho_star: Float,
    pub weight: Float,
    pub r_max: Float,
}

impl TailBound {
    /// Bound on `|Σ_{k>n} a_k k!/(k-j)! s^(k-j)|` over `|s| <= rho`, `rho < rho_star`.
    pub fn bound(&self, rho: &Float, deriv: usize) -> Float {
        let prec = self.weight.prec().max(64);
        let inf = Float::with_val(prec, Special::Infinity);
        if !self.weight.is_finite() || *rho >= self.rho_star {
            return inf;
        }
        if self.weight.is_zero() {
            return Float::with_val(prec, 0);
        }
        let j = deriv as u64;
        let k_start = (self.n as u64 + 1).saturating_sub(j);
        let rs = RealInterval::point(Float::with_val(prec, &self.rho_star));
        let q = match RealInterval::point(Float::with_val(prec, rho)).div(&rs) {
            Ok(v) => v,
            Err(_) => return inf,
        };
        let sum = if q.hi().is_zero() {
            if k_start == 0 {
                RealInterval::from_rational(&Rational::from(Integer::from(Integer::factorial(j as u32))), prec)
            } else {
                RealInterval::zero(prec)
            }
        } else {
            let one = RealInterval::one(prec);
            let rising = |m: u64| {
                let mut p = RealInterval::one(prec);
                for l in 1..=j {
                    p = &p * &RealInterval::from_int((m + l) as i64, prec);
                }
                p
            };
            let mut term = &rising(k_start) * &q.powi(k_start.min(u32::MAX as u64) as u32);
            let mut acc = RealInterval::zero(prec);
            let mut m = k_start;
            loop {
                let ratio = &RealInterval::from_rational(&Rational::from((m + 1 + j, m + 1)), prec) * &q;
                if *ratio.hi() < 1 {
                    let rest = match term.div(&(&one - &ratio)) {
                        Ok(v) => v,
                        Err(_) => return inf,
                    };
                    acc = &acc + &rest;
                    break;
                }
                acc = &acc + &term;
                term = &term * &ratio;
                m += 1;
                if m > k_start + 1_000_000 {
                    return inf;
                }
            }
            acc
        };
        let w = RealInterval::point(Float::with_val(prec, &self.weight));
        let scale = match rs.powi(j as u32).recip() {
            Ok(v) => v,
            Err(_) => return inf,
        };
        (&(&w * &scale) * &sum).hi().clone()
    }
}

/// A truncated Taylor expansion of one function with a rigorous tail.
#[derive(Clone, Debug)]
pub struct TaylorExpansion {
    pub center: QComplex,
    pub coeffs: Vec<ComplexInterval>,
    pub tail: TailBound,
    pub(crate) real: bool,
}

impl TaylorExpansion {
    /// Coefficients of the `j`-th derivative series (without tail).
    pub fn derivative_coeffs(&self, j: usize) -> Vec<ComplexInterval> {
        let prec = self.prec();
        (j..self.coeffs.len())
            .map(|k| {
                let mut f = Integer::from(1);
                for l in 0..j {
                    f *= (k - l) as u64;
                }
                self.coeffs[k].scale(&RealInterval::from_rational(&Rational::from(f), prec))
            })
            .collect()
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).max().unwrap_or(64)
    }

    /// Enclosure of `g^(j)(center + s)` for all `s` in `offset` (which must satisfy `|s| <= rho`).
    pub fn eval_deriv(&self, offset: &ComplexInterval, rho: &Float, j: usize) -> ComplexInterval {
        let prec = self.prec();
        let coeffs = self.derivative_coeffs(j);
        let mut acc = ComplexInterval::zero(prec);
        for c in coeffs.iter().rev() {
            acc = &(&acc * offset) + c;
        }
        let b = self.tail.bound(rho, j);
        if self.real && offset.is_real() {
            acc.inflate_real(&b)
        } else {
            acc.inflate(&b)
        }
    }
}

/// Taylor coefficients of the `r` canonical solutions at a center, where
/// solution `j` has `g^(i)(center) = δ_ij`.
pub(crate) struct BasisSeries {
    pub center: QComplex,
    pub rec: Recurrence,
    pub prec: u32,
    pub coeffs: Vec<Vec<ComplexInterval>>,
}

impl BasisSeries {
    pub fn new(g: &DFiniteFunction, center: &QComplex, prec: u32) -> Result<Self> {
        let rec = derive_recurrence(g, center)?;
        let r = g.order();
        let mut coeffs = vec![Vec::new(); r];
        for (j, col) in coeffs.iter_mut().enumerate() {
            for i in 0..r {
                if i == j {
                    let f = Integer::from(Integer::factorial(i as u32));
                    col.push(ComplexInterval::from_real(RealInterval::from_rational(
                        &Rational::from((Integer::from(1), f)),
                        prec,
                    )));
                } else {
                    col.push(ComplexInterval::zero(prec));
                }
            }
        }
        Ok(Self {
            center: center.clone(),
            rec,
            prec,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn len(&self) -> usize {
        self.coeffs[0].len()
    }

    /// Ensures coefficients `0..=n` are available.
    pub fn extend_to(&mut self, n: usize) {
        let s = self.rec.shift();
        for k in self.len()..=n {
            let mults: Vec<ComplexInterval> = self
                .rec
                .multipliers(k as u64)
                .iter()
                .map(|m| m.to_interval(self.prec))
                .collect();
            for col in self.coeffs.iter_mut() {
                let mut acc = ComplexInterval::zero(self.prec);
                for t in 1..=s.min(k) {
                    let m = &mults[t - 1];
                    if m.is_real() && m.re.is_zero() {
                        continue;
                    }
                    acc = &acc + &(m * &col[k - t]);
                }
                col.push(acc);
            }
        }
    }

    /// Per-solution weights `W_j = max_{n-s < m <= n} |a_{j,m}| rho^m`, or `None`
    /// if the recurrence does not dominate beyond `n` at `rho`.
    pub fn weights(&self, n: usize, rho: &Float) -> Option<Vec<Float>> {
        let theta = self.rec.domination_factor(n as u64 + 1, rho, self.prec);
        if !(theta < 1) {
            return None;
        }
        let s = self.rec.shift();
        let rho_i = RealInterval::point(Float::with_val(self.prec, rho));
        let lo = (n + 1).saturating_sub(s);
        Some(
            self.coeffs
                .iter()
                .map(|col| window_weight(&col[lo..=n], lo, &rho_i))
                .collect(),
        )
    }
}

fn window_weight(window: &[ComplexInterval], first: usize, rho: &RealInterval) -> Float {
    let prec = rho.prec();
    let mut best = Float::with_val(prec, 0);
    let mut pow = rho.powi(first as u32);
    for c in window {
        let v = &RealInterval::point(c.mag()) * &pow;
        if *v.hi() > best {
            best = v.hi().clone();
        }
        pow = &pow * rho;
    }
    best
}

/// Basis expansions at a center with a validated tail for radii up to `r_max`.
pub(crate) struct LocalSeries {
    pub basis: BasisSeries,
    pub n: usize,
    pub rho_star: Float,
    pub weights: Vec<Float>,
    pub r_max: Float,
}

fn candidates(r_max: &Float, radius: &Float, prec: u32) -> Vec<Float> {
    let r = r_max.to_f64();
    let big = radius.to_f64();
    if r <= 0.0 {
        let base = if big.is_finite() { (big / 2.0).min(1.0) } else { 1.0 };
        return vec![Float::with_val(prec, base)];
    }
    let mut out = Vec::new();
    if big.is_finite() && big > r {
        for lambda in [0.5, 0.25, 0.125, 0.0625] {
            out.push(r * (big / r).powf(lambda));
        }
    } else {
        out.extend([4.0 * r, 2.0 * r, 1.25 * r, 1.0625 * r]);
    }
    out.into_iter()
        .filter(|v| v.is_finite() && *v > r)
        .map(|v| Float::with_val(prec, v))
        .collect()
}

impl LocalSeries {
    /// Chooses `n` by doubling (or uses `fixed_n`) until the value tail at
    /// `r_max` is below `2^(-prec/2)` relative to unit initial data.
    pub fn build(
        g: &DFiniteFunction,
        center: &QComplex,
        r_max: &Float,
        radius: &Float,
        prec: u32,
        fixed_n: Option<usize>,
    ) -> Result<Self> {
        let mut basis = BasisSeries::new(g, center, prec)?;
        let cands = candidates(r_max, radius, prec);
        if cands.is_empty() {
            return Err(Error::TailNotDominated);
        }
        let tol = Float::with_val(prec, 1) >> (prec / 2);
        let min_n = g.order() + basis.rec.shift();
        let mut n = fixed_n.unwrap_or(START_TERMS.max(min_n)).max(g.order());
        let mut best: Option<(Float, LocalSeries)> = None;
        loop {
            basis.extend_to(n);
            for rho in &cands {
                let Some(weights) = basis.weights(n, rho) else { continue };
                let wmax = weights.iter().fold(Float::with_val(prec, 0), |a, b| if *b > a { b.clone() } else { a });
                let tail = TailBound {
                    n,
                    rho_star: rho.clone(),
                    weight: wmax,
                    r_max: r_max.clone(),
                }
                .bound(r_max, 0);
                if best.as_ref().map_or(true, |(t, _)| tail < *t) {
                    best = Some((
                        tail,
                        LocalSeries {
                            basis: BasisSeries {
                                center: basis.center.clone(),
                                rec: basis.rec.clone(),
                                prec,
                                coeffs: Vec::new(),
                            },
                            n,
                            rho_star: rho.clone(),
                            weights,
                            r_max: r_max.clone(),
                        },
                    ));
                }
            }
            let done = fixed_n.is_some()
                || n >= MAX_TERMS
                || best.as_ref().map_or(false, |(t, s)| s.n == n && *t <= tol);
            if done {
                break;
            }
            n *= 2;
            best = None;
        }
        let (_, mut series) = best.ok_or(Error::TailNotDominated)?;
        basis.coeffs.iter_mut().for_each(|c| c.truncate(series.n + 1));
        series.basis = basis;
        Ok(series)
    }

    /// Combines the basis with derivative data `d_j = g^(j)(center)`.
    pub fn combine(&self, d: &[ComplexInterval], real: bool) -> TaylorExpansion {
        let prec = self.basis.prec;
        let mut coeffs = Vec::with_capacity(self.n + 1);
        for k in 0..=self.n {
            let mut acc = ComplexInterval::zero(prec);
            for (j, dj) in d.iter().enumerate() {
                acc = &acc + &(dj * &self.basis.coeffs[j][k]);
            }
            coeffs.push(acc);
        }
        let mut weight = RealInterval::zero(prec);
        for (j, dj) in d.iter().enumerate() {
            let w = &RealInterval::point(dj.mag()) * &RealInterval::point(self.weights[j].clone());
            weight = &weight + &w;
        }
        let s = self.basis.rec.shift();
        let lo = (self.n + 1).saturating_sub(s);
        let direct = window_weight(
            &coeffs[lo..=self.n],
            lo,
            &RealInterval::point(Float::with_val(prec, &self.rho_star)),
        );
        let weight = if direct < *weight.hi() { direct } else { weight.hi().clone() };
        TaylorExpansion {
            center: self.basis.center.clone(),
            coeffs,
            tail: TailBound {
                n: self.n,
                rho_star: self.rho_star.clone(),
                weight,
                r_max: self.r_max.clone(),
            },
            real,
        }
    }

    /// Matrix `T` with `g^(i)(center + h) ∈ Σ_j T_ij g^(j)(center)` for `|h| <= r_max`.
    pub fn transition(&self, h: &QComplex, real: bool) -> Vec<Vec<ComplexInterval>> {
        let prec = self.basis.prec;
        let r = self.basis.order();
        let hi = h.to_interval(prec);
        let habs = hi.mag();
        let mut t = vec![vec![ComplexInterval::zero(prec); r]; r];
        for j in 0..r {
            let mut unit = vec![ComplexInterval::zero(prec); r];
            unit[j] = ComplexInterval::one(prec);
            let single = LocalSeries {
                basis: BasisSeries {
                    center: self.basis.center.clone(),
                    rec: self.basis.rec.clone(),
                    prec,
                    coeffs: vec![self.basis.coeffs[j].clone()],
                },
                n: self.n,
                rho_star: self.rho_star.clone(),
                weights: vec![self.weights[j].clone()],
                r_max: self.r_max.clone(),
            };
            let e = single.combine(&unit[j..=j], real);
            for (i, row) in t.iter_mut().enumerate() {
                row[j] = e.eval_deriv(&hi, &habs, i);
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::UPoly;

    fn exp4() -> DFiniteFunction {
        DFiniteFunction::new(
            vec![UPoly::constant(QComplex::from_i64(-4)), UPoly::constant(QComplex::one())],
            QComplex::zero(),
            vec![ComplexInterval::one(128)],
        )
        .unwrap()
    }

    #[test]
    fn exponential_coefficients_and_tail() {
        let g = exp4();
        let half = Float::with_val(128, 0.5);
        let inf = Float::with_val(128, Special::Infinity);
        let s = LocalSeries::build(&g, &QComplex::zero(), &half, &inf, 128, Some(30)).unwrap();
        let e = s.combine(&[ComplexInterval::one(128)], true);
        let mut fact = Integer::from(1);
        for (k, c) in e.coeffs.iter().enumerate() {
            if k > 0 {
                fact *= k as u64;
            }
            let exact = Rational::from((Integer::from(Integer::u_pow_u(4, k as u32)), fact.clone()));
            assert!(c.contains_exact(&QComplex::real(exact)), "k = {k}");
        }
        let b = e.tail.bound(&half, 0).to_f64();
        assert!(b < 1e-20, "{b}");
        // true tail Σ_{k>30} 2^k/k! is about 2^31/31!
        assert!(b > 1.0e-25);
    }

    #[test]
    fn tail_vanishes_at_zero_radius() {
        let t = TailBound {
            n: 0,
            rho_star: Float::with_val(64, 1),
            weight: Float::with_val(64, 5),
            r_max: Float::with_val(64, 0),
        };
        assert_eq!(t.bound(&Float::with_val(64, 0), 0), 0);
        let small = t.bound(&Float::with_val(64, 1e-12), 0).to_f64();
        assert!(small < 1e-10);
    }
}
