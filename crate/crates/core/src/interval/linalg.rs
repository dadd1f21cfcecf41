use std::fmt;

use num_complex::Complex64;
use rug::float::Round;
use rug::Float;

use super::complex::ComplexInterval;
use super::real::RealInterval;
use crate::error::{Error, Result};
use crate::exact::QComplex;

/// A nonempty vector of complex rectangles.
#[derive(Clone, PartialEq)]
pub struct IntervalBox {
    entries: Vec<ComplexInterval>,
}

impl IntervalBox {
    pub fn new(entries: Vec<ComplexInterval>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(Self { entries })
    }

    pub fn from_exact(points: &[QComplex], prec: u32) -> Result<Self> {
        Self::new(points.iter().map(|p| ComplexInterval::from_exact(p, prec)).collect())
    }

    /// Box of side `side` centered at `center`. Imaginary parts are widened only
    /// when `complex` is set.
    pub fn around(center: &[QComplex], side: &Float, complex: bool, prec: u32) -> Result<Self> {
        let mut half = Float::with_val(prec, side);
        half /= 2;
        let entries = center
            .iter()
            .map(|c| {
                let z = ComplexInterval::from_exact(c, prec);
                if complex {
                    z.inflate(&half)
                } else {
                    z.inflate_real(&half)
                }
            })
            .collect();
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ComplexInterval] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexInterval> {
        self.entries.iter()
    }

    pub fn get(&self, i: usize) -> &ComplexInterval {
        &self.entries[i]
    }

    pub fn prec(&self) -> u32 {
        self.entries.iter().map(|e| e.prec()).max().unwrap_or(53)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.is_real())
    }

    pub fn real_part(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.real_part()).collect(),
        }
    }

    pub fn mid_exact(&self) -> Vec<QComplex> {
        self.entries.iter().map(|e| e.mid_exact()).collect()
    }

    pub fn mid_f64(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.mid_f64()).collect()
    }

    fn check_len(&self, other: &IntervalBox) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// `other ⊆ self` coordinatewise.
    pub fn contains(&self, other: &IntervalBox) -> bool {
        self.len() == other.len() && self.entries.iter().zip(&other.entries).all(|(a, b)| a.contains(b))
    }

    pub fn contains_exact(&self, point: &[QComplex]) -> bool {
        self.len() == point.len() && self.entries.iter().zip(point).all(|(a, p)| a.contains_exact(p))
    }

    pub fn hull(&self, other: &IntervalBox) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.hull(b)).collect(),
        })
    }

    pub fn intersect(&self, other: &IntervalBox) -> Result<Option<Self>> {
        self.check_len(other)?;
        let mut out = Vec::with_capacity(self.len());
        for (a, b) in self.entries.iter().zip(&other.entries) {
            match a.intersect(b) {
                Some(c) => out.push(c),
                None => return Ok(None),
            }
        }
        Ok(Some(Self { entries: out }))
    }

    pub fn add(&self, other: &IntervalBox) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &IntervalBox) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    /// Upper bound on the Euclidean norm of every member.
    pub fn euclidean_norm_upper(&self) -> Float {
        let prec = self.prec();
        let mut s = Float::with_val(prec, 0);
        for e in &self.entries {
            let m = e.mag();
            let m2 = Float::with_val_round(prec, m.square_ref(), Round::Up).0;
            s = Float::with_val_round(prec, &s + &m2, Round::Up).0;
        }
        Float::with_val_round(prec, s.sqrt_ref(), Round::Up).0
    }

    /// Lower bound on the Euclidean norm of every member.
    pub fn euclidean_norm_lower(&self) -> Float {
        let prec = self.prec();
        let mut s = Float::with_val(prec, 0);
        for e in &self.entries {
            let m = e.mig();
            let m2 = Float::with_val_round(prec, m.square_ref(), Round::Down).0;
            s = Float::with_val_round(prec, &s + &m2, Round::Down).0;
        }
        Float::with_val_round(prec, s.sqrt_ref(), Round::Down).0
    }

    /// Upper bound on the max norm of every member.
    pub fn max_norm_upper(&self) -> Float {
        let mut best = Float::with_val(self.prec(), 0);
        for e in &self.entries {
            let m = e.mag();
            if m > best {
                best = m;
            }
        }
        best
    }

    /// Largest side length over all real and imaginary parts.
    pub fn max_width(&self) -> Float {
        let mut best = Float::with_val(self.prec(), 0);
        for e in &self.entries {
            let w = e.width_max();
            if w > best {
                best = w;
            }
        }
        best
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.entries).finish()
    }
}

/// `J` lies in the interior of `I`, coordinate by coordinate.
pub fn strict_subset(j: &IntervalBox, i: &IntervalBox) -> Result<bool> {
    i.check_len(j)?;
    Ok(i.entries.iter().zip(&j.entries).all(|(a, b)| a.interior_contains(b)))
}

/// Real-line version of [`strict_subset`]: only real parts are compared.
pub fn strict_subset_real(j: &IntervalBox, i: &IntervalBox) -> Result<bool> {
    i.check_len(j)?;
    Ok(i.entries.iter().zip(&j.entries).all(|(a, b)| a.re.interior_contains(&b.re)))
}

/// A dense matrix of complex floating-point numbers; used for preconditioners.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl PointMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn to_interval(&self, prec: u32) -> IntervalMatrix {
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| ComplexInterval::from_f64(z.re, z.im, prec)).collect(),
        }
    }
}

/// Approximate inverse by Gauss-Jordan elimination with partial pivoting.
///
/// Returns `None` when a pivot vanishes or the result is not finite. Nothing
/// downstream relies on the accuracy of the result for soundness.
pub fn approximate_inverse(a: &PointMatrix) -> Option<PointMatrix> {
    if a.rows != a.cols {
        return None;
    }
    let n = a.rows;
    let mut m = a.data.clone();
    let mut inv = PointMatrix::identity(n).data;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))?;
        let pv = m[piv * n + col];
        if pv.norm() == 0.0 || !pv.norm().is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let scale = Complex64::new(1.0, 0.0) / pv;
        for k in 0..n {
            m[col * n + k] *= scale;
            inv[col * n + k] *= scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let (mv, iv) = (m[col * n + k], inv[col * n + k]);
                m[row * n + k] -= f * mv;
                inv[row * n + k] -= f * iv;
            }
        }
    }
    inv.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then(|| PointMatrix {
            rows: n,
            cols: n,
            data: inv,
        })
}

/// A dense matrix of complex rectangles.
#[derive(Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ComplexInterval>,
}

impl IntervalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<ComplexInterval>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Self {
            rows,
            cols,
            data: vec![ComplexInterval::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m.data[i * n + i] = ComplexInterval::one(prec);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexInterval {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ComplexInterval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn prec(&self) -> u32 {
        self.data.iter().map(|e| e.prec()).max().unwrap_or(53)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|e| e.is_real())
    }

    pub fn column(&self, j: usize) -> Result<IntervalBox> {
        IntervalBox::new((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn mid(&self) -> PointMatrix {
        PointMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| e.mid_f64()).collect(),
        }
    }

    /// Entrywise containment `other ⊆ self`.
    pub fn contains(&self, other: &IntervalMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.contains(b))
    }

    pub fn sub(&self, other: &IntervalMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul_box(&self, v: &IntervalBox) -> Result<IntervalBox> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let prec = self.prec().max(v.prec());
        let out = (0..self.rows)
            .map(|i| {
                let mut acc = ComplexInterval::zero(prec);
                for j in 0..self.cols {
                    acc = &acc + &(self.get(i, j) * v.get(j));
                }
                acc
            })
            .collect();
        IntervalBox::new(out)
    }

    pub fn mul(&self, other: &IntervalMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let prec = self.prec().max(other.prec());
        let mut out = Self::zeros(self.rows, other.cols, prec);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ComplexInterval::zero(prec);
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Upper bound on the max-norm operator norm of every member matrix.
    pub fn max_norm_bound(&self) -> Float {
        let prec = self.prec();
        let mut best = Float::with_val(prec, 0);
        for i in 0..self.rows {
            let mut s = Float::with_val(prec, 0);
            for j in 0..self.cols {
                s = Float::with_val_round(prec, &s + &self.get(i, j).mag(), Round::Up).0;
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Upper bound on the Frobenius norm (hence the spectral norm) of every member.
    pub fn frobenius_upper(&self) -> Float {
        let prec = self.prec();
        let mut s = Float::with_val(prec, 0);
        for e in &self.data {
            let m = e.mag();
            let m2 = Float::with_val_round(prec, m.square_ref(), Round::Up).0;
            s = Float::with_val_round(prec, &s + &m2, Round::Up).0;
        }
        Float::with_val_round(prec, s.sqrt_ref(), Round::Up).0
    }

    /// Encloses `A'^{-1} b'` for every `A' ∈ self`, `b' ∈ b`.
    ///
    /// With `Y ≈ mid(A)^{-1}`, `x̃ ≈ Y·mid(b)` and `C = I − Y·A`, every solution
    /// satisfies `x − x̃ ∈ Y(b − A x̃) + C (x − x̃)`; a max-norm bound on `C`
    /// below one bounds `‖x − x̃‖` and the right-hand side then encloses it.
    pub fn solve_enclosure(&self, b: &IntervalBox) -> Result<IntervalBox> {
        if self.rows != self.cols || self.rows != b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let n = self.rows;
        let prec = self.prec().max(b.prec());
        let y = approximate_inverse(&self.mid()).ok_or(Error::NotDiagonallyDominated {
            kappa: f64::INFINITY,
        })?;
        let yi = y.to_interval(prec);
        let c = IntervalMatrix::identity(n, prec).sub(&yi.mul(self)?)?;
        let kappa = c.max_norm_bound();
        if !(kappa < 1) {
            return Err(Error::NotDiagonallyDominated { kappa: kappa.to_f64() });
        }
        let real = self.is_real() && b.is_real() && y.is_real();
        let mid_b = IntervalBox::new(
            b.iter()
                .map(|e| ComplexInterval::from_exact(&e.mid_exact(), prec))
                .collect(),
        )?;
        let approx = yi.mul_box(&mid_b)?.mid_exact();
        let x_tilde = IntervalBox::from_exact(&approx, prec)?;
        let residual = b.sub(&self.mul_box(&x_tilde)?)?;
        let z = yi.mul_box(&residual)?;
        let one = Float::with_val(prec, 1);
        let denom = Float::with_val_round(prec, &one - &kappa, Round::Down).0;
        let delta = Float::with_val_round(prec, &z.max_norm_upper() / &denom, Round::Up).0;
        let e = if real {
            ComplexInterval::from_real(RealInterval::symmetric(&delta, prec))
        } else {
            ComplexInterval::square(&delta, prec)
        };
        let err = IntervalBox::new(vec![e; n])?;
        x_tilde.add(&z)?.add(&c.mul_box(&err)?)
    }
}

impl fmt::Debug for IntervalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.rows {
            l.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        l.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: f64) -> ComplexInterval {
        ComplexInterval::from_f64(v, 0.0, 53)
    }

    fn riv(lo: f64, hi: f64) -> ComplexInterval {
        ComplexInterval::from_real(
            RealInterval::new(Float::with_val(53, lo), Float::with_val(53, hi)).unwrap(),
        )
    }

    #[test]
    fn norm_bound_examples() {
        assert_eq!(IntervalMatrix::identity(3, 53).max_norm_bound(), 1);
        assert_eq!(IntervalMatrix::zeros(2, 2, 53).max_norm_bound(), 0);
        let m = IntervalMatrix::new(2, 2, vec![real(0.1), real(-0.2), real(0.4), real(0.05)]).unwrap();
        let b = m.max_norm_bound().to_f64();
        assert!((b - 0.45).abs() < 1e-15 && b >= 0.45);
    }

    #[test]
    fn strict_subset_examples() {
        let i = IntervalBox::new(vec![riv(0.0, 1.0), riv(0.0, 1.0)]).unwrap();
        let j = IntervalBox::new(vec![riv(0.1, 0.2), riv(0.1, 0.2)]).unwrap();
        assert!(strict_subset_real(&j, &i).unwrap());
        assert!(!strict_subset(&i, &i).unwrap());
        let k = IntervalBox::new(vec![riv(0.0, 0.5), riv(0.1, 0.2)]).unwrap();
        assert!(!strict_subset_real(&k, &i).unwrap());
        let short = IntervalBox::new(vec![riv(0.0, 0.5)]).unwrap();
        assert!(strict_subset(&short, &i).is_err());
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = IntervalBox::new(vec![riv(1.0, 2.0), real(-3.0)]).unwrap();
        let x = IntervalMatrix::identity(2, 53).solve_enclosure(&b).unwrap();
        assert!(x.contains(&b));
        let d = IntervalMatrix::new(2, 2, vec![real(2.0), real(0.0), real(0.0), real(4.0)]).unwrap();
        let ones = IntervalBox::new(vec![real(1.0), real(1.0)]).unwrap();
        let x = d.solve_enclosure(&ones).unwrap();
        assert!(x.get(0).contains_values(&Float::with_val(53, 0.5), &Float::with_val(53, 0)));
        assert!(x.get(1).contains_values(&Float::with_val(53, 0.25), &Float::with_val(53, 0)));
        assert!(x.max_width() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let s = IntervalMatrix::new(2, 2, vec![real(1.0), real(2.0), real(2.0), real(4.0)]).unwrap();
        let b = IntervalBox::new(vec![real(1.0), real(1.0)]).unwrap();
        assert!(matches!(s.solve_enclosure(&b), Err(Error::NotDiagonallyDominated { .. })));
    }
}
