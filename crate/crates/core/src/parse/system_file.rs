use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::constant::{parse_constant, parse_exact};
use super::polynomial::{parse_polynomial, parse_univariate};
use crate::dfinite::DFiniteFunction;
use crate::error::{Error, Result};
use crate::exact::{QComplex, UPoly};
use crate::system::{IngredientRow, IngredientSystem, Mode};

pub const SCHEMA: &str = "dfcert-system/1";

/// One ODE coefficient: either low-to-high coefficient strings or a polynomial in `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OdeCoefficient {
    Coefficients(Vec<String>),
    Expression(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub order: usize,
    /// `p_0, ..., p_order`.
    pub coefficients: Vec<OdeCoefficient>,
}

/// The D-finite function of an ingredient row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub ode: OdeSpec,
    pub base_point: String,
    pub initial_values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngredientSpec {
    pub output: String,
    pub input: String,
    /// Label used in reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// The row reads `output - g^(derivative)(input)`.
    #[serde(default)]
    pub derivative: usize,
    pub ode: OdeSpec,
    #[serde(default = "zero")]
    pub base_point: String,
    pub initial_values: Vec<String>,
    /// Where the initial data comes from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

fn zero() -> String {
    "0".into()
}

impl IngredientSpec {
    pub fn function(&self) -> FunctionSpec {
        FunctionSpec {
            ode: self.ode.clone(),
            base_point: self.base_point.clone(),
            initial_values: self.initial_values.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub mode: Mode,
    pub variables: Vec<String>,
    pub polynomials: Vec<String>,
    #[serde(default)]
    pub ingredients: Vec<IngredientSpec>,
    /// Named candidate points, coordinates as exact constant strings.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, Vec<String>>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Moves an expression-relative parse error to its position in the file text.
fn locate(text: Option<&str>, field: &str, s: &str, e: Error) -> Error {
    let (col_in, msg) = match e {
        Error::Parse { col, msg, .. } => (col, msg),
        other => return Error::InvalidSystem(format!("{field}: {other}")),
    };
    let msg = format!("{field}: {msg}");
    let quoted = serde_json::to_string(s).unwrap_or_default();
    match text.and_then(|t| t.find(&quoted)) {
        Some(start) => {
            let prefix: String = s.chars().take(col_in.saturating_sub(1)).collect();
            let inner = serde_json::to_string(&prefix).unwrap_or_default();
            let (line, col) = line_col(text.expect("found"), start + inner.len() - 1);
            Error::Parse { line, col, msg }
        }
        None => Error::Parse { line: 1, col: col_in, msg },
    }
}

fn ode_poly(c: &OdeCoefficient) -> std::result::Result<UPoly, (String, Error)> {
    match c {
        OdeCoefficient::Expression(s) => parse_univariate(s, "t").map_err(|e| (s.clone(), e)),
        OdeCoefficient::Coefficients(v) => {
            let mut out = Vec::with_capacity(v.len());
            for s in v {
                out.push(parse_exact(s).map_err(|e| (s.clone(), e))?);
            }
            Ok(UPoly::new(out))
        }
    }
}

impl FunctionSpec {
    fn build(&self, text: Option<&str>, field: &str, prec: u32) -> Result<DFiniteFunction> {
        if self.ode.coefficients.len() != self.ode.order + 1 {
            return Err(Error::InvalidSystem(format!(
                "{field}: order {} needs {} coefficients, found {}",
                self.ode.order,
                self.ode.order + 1,
                self.ode.coefficients.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(self.ode.order + 1);
        for (k, c) in self.ode.coefficients.iter().enumerate() {
            coeffs.push(ode_poly(c).map_err(|(s, e)| locate(text, &format!("{field}.ode.coefficients[{k}]"), &s, e))?);
        }
        let base = parse_exact(&self.base_point).map_err(|e| locate(text, &format!("{field}.base_point"), &self.base_point, e))?;
        let mut init = Vec::with_capacity(self.initial_values.len());
        for (k, s) in self.initial_values.iter().enumerate() {
            let f = format!("{field}.initial_values[{k}]");
            let c = parse_constant(s).map_err(|e| locate(text, &f, s, e))?;
            init.push(c.enclose(prec).map_err(|e| locate(text, &f, s, e))?);
        }
        DFiniteFunction::new(coeffs, base, init)
    }
}

impl SystemFile {
    /// Reads the JSON text; syntax and shape errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })?;
        if file.schema != SCHEMA {
            let at = text.find(&format!("\"{}\"", file.schema)).unwrap_or(0);
            let (line, col) = line_col(text, at);
            return Err(Error::Parse {
                line,
                col,
                msg: format!("unsupported schema {:?}, expected {SCHEMA:?}", file.schema),
            });
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Builds the system; initial values are enclosed at `prec` bits.
    pub fn build(&self, prec: u32) -> Result<IngredientSystem> {
        self.build_located(None, prec)
    }

    /// Like [`SystemFile::build`]; with the original `text`, expression errors
    /// are reported at their line and column in the file.
    pub fn build_located(&self, text: Option<&str>, prec: u32) -> Result<IngredientSystem> {
        let index = |name: &str, field: &str| {
            self.variables
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::InvalidSystem(format!("{field}: unknown variable {name:?}")))
        };
        let mut polys = Vec::with_capacity(self.polynomials.len());
        for (i, s) in self.polynomials.iter().enumerate() {
            let field = format!("polynomials[{i}]");
            polys.push(parse_polynomial(s, &self.variables).map_err(|e| locate(text, &field, s, e))?);
        }
        let mut shared: HashMap<String, DFiniteFunction> = HashMap::new();
        let mut rows = Vec::with_capacity(self.ingredients.len());
        for (j, ing) in self.ingredients.iter().enumerate() {
            let field = format!("ingredients[{j}]");
            let spec = ing.function();
            let key = serde_json::to_string(&spec).expect("serializable");
            let func = match shared.get(&key) {
                Some(f) => f.clone(),
                None => {
                    let f = spec.build(text, &field, prec).map_err(|e| e.at_row(polys.len() + j))?;
                    shared.insert(key, f.clone());
                    f
                }
            };
            rows.push(IngredientRow {
                output: index(&ing.output, &format!("{field}.output"))?,
                input: index(&ing.input, &format!("{field}.input"))?,
                derivative: ing.derivative,
                func,
            });
        }
        IngredientSystem::new(self.variables.clone(), polys, rows, self.mode)
    }

    /// Looks up a named point.
    pub fn point(&self, name: &str) -> Result<Vec<QComplex>> {
        let coords = self
            .points
            .get(name)
            .ok_or_else(|| Error::InvalidSystem(format!("no point named {name:?}")))?;
        coords.iter().map(|s| parse_exact(s)).collect()
    }
}

/// Parses and builds a system from JSON text.
pub fn parse_system(text: &str, prec: u32) -> Result<(SystemFile, IngredientSystem)> {
    let file = SystemFile::from_json(text)?;
    let sys = file.build_located(Some(text), prec)?;
    Ok((file, sys))
}

/// Reads and builds a system file.
pub fn load_system(path: &Path, prec: u32) -> Result<(SystemFile, IngredientSystem)> {
    let text = std::fs::read_to_string(path)?;
    parse_system(&text, prec)
}

/// Parses comma-separated exact coordinates such as `0.48, 1.94, -1/3, 2+i`.
pub fn parse_point(text: &str) -> Result<Vec<QComplex>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in text.split(',') {
        let v = parse_exact(part).map_err(|e| match e {
            Error::Parse { col, msg, .. } => Error::Parse { line: 1, col: col + offset, msg },
            other => other,
        })?;
        out.push(v);
        offset += part.chars().count() + 1;
    }
    Ok(out)
}
