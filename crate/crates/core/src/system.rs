use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dfinite::{eval_box_deriv, eval_deriv_point, DFiniteFunction};
use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{ComplexInterval, IntervalBox, IntervalMatrix};
use crate::poly::MultivariatePolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Real,
    Complex,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Real => "real",
            Mode::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Mode::Real),
            "complex" => Ok(Mode::Complex),
            _ => Err(Error::InvalidSystem(format!("unknown mode {s:?}"))),
        }
    }
}

/// The equation `x[output] − g^(derivative)(x[input]) = 0`.
#[derive(Clone, Debug)]
pub struct IngredientRow {
    pub output: usize,
    pub input: usize,
    /// Number of derivatives applied to `func`; 0 for the function itself.
    pub derivative: usize,
    pub func: DFiniteFunction,
}

/// Polynomial rows followed by ingredient rows, square in `n + m` unknowns.
#[derive(Clone, Debug)]
pub struct IngredientSystem {
    variables: Vec<String>,
    polys: Vec<MultivariatePolynomial>,
    ingredients: Vec<IngredientRow>,
    mode: Mode,
    centered: bool,
}

impl IngredientSystem {
    pub fn new(
        variables: Vec<String>,
        polys: Vec<MultivariatePolynomial>,
        ingredients: Vec<IngredientRow>,
        mode: Mode,
    ) -> Result<Self> {
        let n = polys.len();
        let total = n + ingredients.len();
        if variables.len() != total {
            return Err(Error::InvalidSystem(format!(
                "{} variables for {} equations",
                variables.len(),
                total
            )));
        }
        let mut names = HashSet::new();
        for v in &variables {
            if !names.insert(v.as_str()) {
                return Err(Error::InvalidSystem(format!("duplicate variable {v}")));
            }
        }
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != total {
                return Err(Error::DimensionMismatch { expected: total, found: p.nvars() }.at_row(i));
            }
        }
        let mut outputs = HashSet::new();
        for (j, row) in ingredients.iter().enumerate() {
            let tag = |msg: String| Error::InvalidSystem(msg).at_row(n + j);
            if row.output < n || row.output >= total {
                return Err(tag(format!("output variable index {} outside the ingredient block", row.output)));
            }
            if row.input >= total {
                return Err(tag(format!("input variable index {} out of range", row.input)));
            }
            if row.input == row.output {
                return Err(tag("input and output are the same variable".into()));
            }
            if !outputs.insert(row.output) {
                return Err(tag(format!("variable {} is the output of two rows", variables[row.output])));
            }
        }
        if mode == Mode::Real {
            if let Some(i) = polys.iter().position(|p| !p.is_real()) {
                return Err(Error::InvalidSystem("complex coefficient in real mode".into()).at_row(i));
            }
            if let Some(j) = ingredients.iter().position(|r| !r.func.is_real()) {
                return Err(Error::InvalidSystem("complex ingredient data in real mode".into()).at_row(n + j));
            }
        }
        Ok(Self { variables, polys, ingredients, mode, centered: false })
    }

    /// Switches polynomial box evaluation to the mean-value form.
    pub fn with_centered_form(mut self, on: bool) -> Self {
        self.centered = on;
        self
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn polys(&self) -> &[MultivariatePolynomial] {
        &self.polys
    }

    pub fn ingredients(&self) -> &[IngredientRow] {
        &self.ingredients
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.polys.len()
    }

    pub fn m(&self) -> usize {
        self.ingredients.len()
    }

    pub fn dim(&self) -> usize {
        self.polys.len() + self.ingredients.len()
    }

    /// Largest total degree among the polynomial rows, at least 1.
    pub fn max_degree(&self) -> u32 {
        self.polys.iter().map(|p| p.degree()).max().unwrap_or(0).max(1)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }

    fn real_view(&self, v: ComplexInterval) -> ComplexInterval {
        if self.mode == Mode::Real {
            v.real_part()
        } else {
            v
        }
    }

    /// `□F(y)` at an exact point.
    pub fn eval_f_point(&self, x: &[QComplex], prec: u32) -> Result<IntervalBox> {
        self.check_len(x.len())?;
        let mut out = Vec::with_capacity(self.dim());
        for p in &self.polys {
            out.push(p.eval_exact(x).to_interval(prec));
        }
        for (j, row) in self.ingredients.iter().enumerate() {
            let g = eval_deriv_point(&row.func, &x[row.input], row.derivative, prec).map_err(|e| e.at_row(self.n() + j))?;
            out.push(x[row.output].to_interval(prec).sub(&g));
        }
        IntervalBox::new(out.into_iter().map(|v| self.real_view(v)).collect())
    }

    /// `□F(I)` over a box.
    pub fn eval_f_box(&self, b: &IntervalBox) -> Result<IntervalBox> {
        self.check_len(b.len())?;
        let prec = b.prec();
        let mut out = Vec::with_capacity(self.dim());
        for (i, p) in self.polys.iter().enumerate() {
            let v = if self.centered { p.eval_box_centered(b) } else { p.eval_box(b) };
            out.push(v.map_err(|e| e.at_row(i))?);
        }
        for (j, row) in self.ingredients.iter().enumerate() {
            let g = eval_box_deriv(&row.func, b.get(row.input), row.derivative, prec).map_err(|e| e.at_row(self.n() + j))?;
            out.push(b.get(row.output).sub(&g));
        }
        IntervalBox::new(out.into_iter().map(|v| self.real_view(v)).collect())
    }

    /// `F'(y)` enclosure at an exact point.
    pub fn jacobian_point(&self, x: &[QComplex], prec: u32) -> Result<IntervalMatrix> {
        self.check_len(x.len())?;
        let n = self.dim();
        let mut jac = IntervalMatrix::zeros(n, n, prec);
        for (i, p) in self.polys.iter().enumerate() {
            for k in 0..n {
                let v = p.partial(k).eval_exact(x).to_interval(prec);
                jac.set(i, k, self.real_view(v));
            }
        }
        for (j, row) in self.ingredients.iter().enumerate() {
            let i = self.n() + j;
            let d = eval_deriv_point(&row.func, &x[row.input], row.derivative + 1, prec).map_err(|e| e.at_row(i))?;
            jac.set(i, row.output, ComplexInterval::one(prec));
            jac.set(i, row.input, self.real_view(d.neg()));
        }
        Ok(jac)
    }

    /// `□F'(I)`: encloses the Jacobian at every point of the box.
    pub fn jacobian_box(&self, b: &IntervalBox) -> Result<IntervalMatrix> {
        self.check_len(b.len())?;
        let n = self.dim();
        let prec = b.prec();
        let mut jac = IntervalMatrix::zeros(n, n, prec);
        for (i, p) in self.polys.iter().enumerate() {
            for k in 0..n {
                let d = p.partial(k);
                if d.is_zero() {
                    continue;
                }
                let v = if self.centered { d.eval_box_centered(b) } else { d.eval_box(b) };
                jac.set(i, k, self.real_view(v.map_err(|e| e.at_row(i))?));
            }
        }
        for (j, row) in self.ingredients.iter().enumerate() {
            let i = self.n() + j;
            let d = eval_box_deriv(&row.func, b.get(row.input), row.derivative + 1, prec).map_err(|e| e.at_row(i))?;
            jac.set(i, row.output, ComplexInterval::one(prec));
            jac.set(i, row.input, self.real_view(d.neg()));
        }
        Ok(jac)
    }

    /// True when every coordinate of `x` is real.
    pub fn point_is_real(x: &[QComplex]) -> bool {
        x.iter().all(QComplex::is_real)
    }
}
