use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

use super::continuation::continue_to;
use super::expansion::{BasisSeries, LocalSeries, TaylorExpansion};
use super::radius::radius_lower_bound;
use super::DFiniteFunction;
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{fmt_down, fmt_up, ComplexInterval, RealInterval};

/// Enclosure of `g(x)`.
pub fn eval_point(g: &DFiniteFunction, x: &QComplex, prec: u32) -> Result<ComplexInterval> {
    eval_deriv_point(g, x, 0, prec)
}

/// Enclosure of `g^(j)(x)` for any `j`.
pub fn eval_deriv_point(g: &DFiniteFunction, x: &QComplex, j: usize, prec: u32) -> Result<ComplexInterval> {
    let d = continue_to(g, x, prec)?;
    if j < d.len() {
        return Ok(d[j].clone());
    }
    let mut basis = BasisSeries::new(g, x, prec)?;
    basis.extend_to(j);
    let mut acc = ComplexInterval::zero(prec);
    for (i, di) in d.iter().enumerate() {
        acc = &acc + &(di * &basis.coeffs[i][j]);
    }
    let fact = Integer::from(Integer::factorial(j as u32));
    let v = acc.scale(&RealInterval::from_rational(&Rational::from(fact), prec));
    Ok(if g.is_real() && x.is_real() { v.real_part() } else { v })
}

/// Enclosure of `{ g(t) : t ∈ J }`.
pub fn eval_box(g: &DFiniteFunction, j: &ComplexInterval, prec: u32) -> Result<ComplexInterval> {
    eval_box_deriv(g, j, 0, prec)
}

/// Enclosure of `{ g^(k)(t) : t ∈ J }`, expanding at the midpoint of `J`.
pub fn eval_box_deriv(g: &DFiniteFunction, j: &ComplexInterval, k: usize, prec: u32) -> Result<ComplexInterval> {
    if !j.is_finite() {
        return Err(Error::BoxTooLarge);
    }
    let center = j.mid_exact();
    if j.is_point() {
        return eval_deriv_point(g, &center, k, prec);
    }
    let offset = j.with_prec(prec).sub(&center.to_interval(prec));
    let rho = offset.mag();
    let radius = radius_lower_bound(g, &center, prec).map_err(|_| Error::BoxTooLarge)?;
    if !(rho < radius) {
        return Err(Error::BoxTooLarge);
    }
    let d = continue_to(g, &center, prec)?;
    let series = LocalSeries::build(g, &center, &rho, &radius, prec, None)?;
    let e = series.combine(&d, g.is_real());
    let v = e.eval_deriv(&offset, &rho, k);
    Ok(if g.is_real() && j.is_real() { v.real_part() } else { v })
}

/// Expansion at `center` with exactly `n` stored terms and a tail valid up to `r_max`.
pub fn expand_at(g: &DFiniteFunction, center: &QComplex, n: usize, r_max: &Float, prec: u32) -> Result<TaylorExpansion> {
    let radius = radius_lower_bound(g, center, prec)?;
    if !(*r_max < radius) {
        return Err(Error::RadiusExceeded {
            r: fmt_up(r_max, 10),
            bound: fmt_down(&radius, 10),
        });
    }
    let d = continue_to(g, center, prec)?;
    let series = LocalSeries::build(g, center, r_max, &radius, prec, Some(n))?;
    Ok(series.combine(&d, g.is_real()))
}

/// Parameters of the circle subdivision used by [`disk_max_bounds`].
#[derive(Clone, Debug)]
pub struct DiskOptions {
    /// Number of arcs the circle is cut into before refinement (rounded up to a power of two, at least 4).
    pub arcs: usize,
    /// Arcs are split until their bound is within this relative gap of the best sampled value.
    pub refine_tol: f64,
    /// Absolute subdivision depth limit; depth 2 is a quadrant.
    pub max_depth: u32,
}

impl Default for DiskOptions {
    fn default() -> Self {
        Self {
            arcs: 64,
            refine_tol: 0.01,
            max_depth: 18,
        }
    }
}

/// Upper bound on `max |g|` over the closed disk `|z - x| <= r`.
pub fn disk_max_bound(g: &DFiniteFunction, x: &QComplex, r: &Float, prec: u32) -> Result<Float> {
    Ok(disk_max_bounds(g, x, r, &[0], &DiskOptions::default(), prec)?.remove(0))
}

/// Upper bounds on `max |g^(j)|` over the closed disk `|z - x| <= r`, one per entry of `derivs`.
///
/// By the maximum modulus principle only the boundary circle matters. The
/// polynomial part is bounded on boxes covering arcs of the circle, and the
/// series tail at radius `r` is added.
pub fn disk_max_bounds(
    g: &DFiniteFunction,
    x: &QComplex,
    r: &Float,
    derivs: &[usize],
    opts: &DiskOptions,
    prec: u32,
) -> Result<Vec<Float>> {
    let radius = radius_lower_bound(g, x, prec)?;
    if !(*r > 0) || !(*r < radius) {
        return Err(Error::RadiusExceeded {
            r: fmt_up(r, 10),
            bound: fmt_down(&radius, 10),
        });
    }
    let d = continue_to(g, x, prec)?;
    let series = LocalSeries::build(g, x, r, &radius, prec, None)?;
    let e = series.combine(&d, g.is_real());
    let symmetric = g.is_real() && x.is_real();
    derivs
        .iter()
        .map(|&j| {
            let poly = e.derivative_coeffs(j);
            let body = CircleBound::new(&poly, r, opts, symmetric, prec).max();
            let tail = e.tail.bound(r, j);
            let total = Float::with_val_round(prec, &body + &tail, Round::Up).0;
            if total.is_finite() {
                Ok(total)
            } else {
                Err(Error::TailNotDominated)
            }
        })
        .collect()
}

struct CircleBound<'a> {
    poly: &'a [ComplexInterval],
    dpoly: Vec<ComplexInterval>,
    r: RealInterval,
    opts: &'a DiskOptions,
    prec: u32,
    floor: f64,
    symmetric: bool,
}

struct Node {
    k: u64,
    depth: u32,
    bx: ComplexInterval,
    bound: Float,
}

fn horner(c: &[ComplexInterval], z: &ComplexInterval, prec: u32) -> ComplexInterval {
    let mut acc = ComplexInterval::zero(prec);
    for a in c.iter().rev() {
        acc = &(&acc * z) + a;
    }
    acc
}

impl<'a> CircleBound<'a> {
    fn new(poly: &'a [ComplexInterval], r: &Float, opts: &'a DiskOptions, symmetric: bool, prec: u32) -> Self {
        let dpoly = (1..poly.len())
            .map(|k| poly[k].scale(&RealInterval::from_int(k as i64, prec)))
            .collect();
        let mut cb = Self {
            poly,
            dpoly,
            r: RealInterval::point(Float::with_val(prec, r)),
            opts,
            prec,
            floor: 0.0,
            symmetric,
        };
        let samples = 256u64;
        let mut floor = 0.0f64;
        for i in 0..samples {
            floor = floor.max(cb.sample(i, 8));
        }
        cb.floor = floor;
        cb
    }

    fn angle_mid(&self, k: u64, depth: u32) -> Float {
        let mut t = Float::with_val(self.prec + 16, Constant::Pi);
        t *= 2 * k + 1;
        t >>= depth;
        t
    }

    /// `|P|` at the midpoint of arc `(k, depth)`, as a float estimate.
    fn sample(&self, k: u64, depth: u32) -> f64 {
        let t = self.angle_mid(k, depth);
        let z = ComplexInterval::new(
            &self.r * &RealInterval::point(Float::with_val(self.prec, t.cos_ref())),
            &self.r * &RealInterval::point(Float::with_val(self.prec, t.sin_ref())),
        );
        horner(self.poly, &z, self.prec).mig().to_f64()
    }

    fn arc_box(&self, k: u64, depth: u32, parent: Option<&ComplexInterval>) -> ComplexInterval {
        let t = self.angle_mid(k, depth);
        let mut half = Float::with_val_round(self.prec, Constant::Pi, Round::Up).0;
        half >>= depth;
        let slack = Float::with_val(self.prec, 1) >> (self.prec - 8);
        let half = Float::with_val_round(self.prec, &half + &slack, Round::Up).0;
        let spread = RealInterval::symmetric(&half, self.prec);
        let c = RealInterval::point(Float::with_val(self.prec, t.cos_ref()));
        let s = RealInterval::point(Float::with_val(self.prec, t.sin_ref()));
        let unit = RealInterval::new(Float::with_val(self.prec, -1), Float::with_val(self.prec, 1)).expect("ordered");
        let re = (&c + &spread).intersect(&unit).unwrap_or_else(|| unit.clone());
        let im = (&s + &spread).intersect(&unit).unwrap_or_else(|| unit.clone());
        let own = ComplexInterval::new(&self.r * &re, &self.r * &im);
        match parent {
            Some(p) => own.intersect(p).unwrap_or(own),
            None => own,
        }
    }

    fn enclose(&self, bx: &ComplexInterval) -> Float {
        let plain = horner(self.poly, bx, self.prec);
        let m = bx.mid_exact().to_interval(self.prec);
        let mv = &horner(self.poly, &m, self.prec) + &(&horner(&self.dpoly, bx, self.prec) * &bx.sub(&m));
        match plain.intersect(&mv) {
            Some(v) => v.mag(),
            None => plain.mag(),
        }
    }

    fn node(&self, k: u64, depth: u32, parent: Option<&Node>) -> Node {
        let bx = self.arc_box(k, depth, parent.map(|p| &p.bx));
        let mut bound = self.enclose(&bx);
        if let Some(p) = parent {
            if p.bound < bound {
                bound = p.bound.clone();
            }
        }
        Node { k, depth, bx, bound }
    }

    fn refine(&self, node: &Node) -> Float {
        let target = (1.0 + self.opts.refine_tol) * self.floor.max(self.sample(node.k, node.depth));
        if node.depth >= self.opts.max_depth || node.bound.to_f64() <= target {
            return node.bound.clone();
        }
        let a = self.refine(&self.node(2 * node.k, node.depth + 1, Some(node)));
        let b = self.refine(&self.node(2 * node.k + 1, node.depth + 1, Some(node)));
        if a > b {
            a
        } else {
            b
        }
    }

    fn max(&self) -> Float {
        let leaf_depth = self.opts.arcs.max(4).next_power_of_two().trailing_zeros();
        let roots = if self.symmetric { 2 } else { 4 };
        let mut frontier: Vec<Node> = (0..roots).map(|k| self.node(k, 2, None)).collect();
        while frontier[0].depth < leaf_depth {
            frontier = frontier
                .iter()
                .flat_map(|p| [self.node(2 * p.k, p.depth + 1, Some(p)), self.node(2 * p.k + 1, p.depth + 1, Some(p))])
                .collect();
        }
        let mut best = Float::with_val(self.prec, 0);
        for n in &frontier {
            let v = self.refine(n);
            if v > best {
                best = v;
            }
        }
        best
    }
}
