//! Rigorous evaluation of solutions of linear ODEs with polynomial coefficients.
//!
//! A [`DFiniteFunction`] is `p_r g^(r) + ... + p_1 g' + p_0 g = 0` together with
//! enclosures of `g, g', ..., g^(r-1)` at an ordinary base point. Values
//! elsewhere come from Taylor expansions continued along a path of
//! waypoints, with tails bounded from the coefficient recurrence.

mod continuation;
mod eval;
mod expansion;
mod radius;
mod recurrence;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub use continuation::{continue_to, continue_with_path, ContinuationPath};
pub use eval::{
    disk_max_bound, disk_max_bounds, eval_box, eval_box_deriv, eval_deriv_point, eval_point,
    expand_at, DiskOptions,
};
pub use expansion::{TailBound, TaylorExpansion};
pub use radius::radius_lower_bound;
pub use recurrence::{derive_recurrence, Recurrence};

use crate::error::{Error, Result};
use crate::exact::{QComplex, UPoly};
use crate::interval::ComplexInterval;

/// Working precision used by the evaluation oracles unless configured otherwise.
pub const DEFAULT_PRECISION: u32 = 128;

type StateCache = HashMap<(u32, String), (Vec<ComplexInterval>, Vec<QComplex>)>;

#[derive(Clone)]
pub struct DFiniteFunction {
    coeffs: Vec<UPoly>,
    base: QComplex,
    initial: Vec<ComplexInterval>,
    real: bool,
    cache: Arc<Mutex<StateCache>>,
    root_discs: Arc<OnceLock<Option<Vec<radius::RootDisc>>>>,
}

impl std::fmt::Debug for DFiniteFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DFiniteFunction")
            .field("coeffs", &self.coeffs.iter().map(|p| p.to_string()).collect::<Vec<_>>())
            .field("base", &self.base.to_string())
            .field("initial", &self.initial)
            .finish()
    }
}

impl DFiniteFunction {
    /// `coeffs[i]` multiplies the `i`-th derivative; `initial[j]` encloses `g^(j)(base)`.
    pub fn new(coeffs: Vec<UPoly>, base: QComplex, initial: Vec<ComplexInterval>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidSystem("differential equation must have order at least 1".into()));
        }
        let r = coeffs.len() - 1;
        if coeffs[r].is_zero() {
            return Err(Error::InvalidSystem("leading coefficient polynomial is zero".into()));
        }
        if coeffs[r].eval(&base).is_zero() {
            return Err(Error::SingularExpansionPoint { point: base.to_string() });
        }
        if initial.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: initial.len(),
            });
        }
        let real = coeffs.iter().all(|p| p.is_real()) && base.is_real() && initial.iter().all(|c| c.is_real());
        Ok(Self {
            coeffs,
            base,
            initial,
            real,
            cache: Arc::default(),
            root_discs: Arc::default(),
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[UPoly] {
        &self.coeffs
    }

    pub fn leading(&self) -> &UPoly {
        &self.coeffs[self.order()]
    }

    pub fn base_point(&self) -> &QComplex {
        &self.base
    }

    pub fn initial_values(&self) -> &[ComplexInterval] {
        &self.initial
    }

    /// Real coefficients, real base point and real initial values.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Empties the continuation cache.
    pub fn clear_cache(&self) {
        self.cache.lock().expect("cache poisoned").clear();
    }

    pub(crate) fn cached(&self, prec: u32, target: &QComplex) -> Option<(Vec<ComplexInterval>, Vec<QComplex>)> {
        self.cache
            .lock()
            .expect("cache poisoned")
            .get(&(prec, target.key()))
            .cloned()
    }

    pub(crate) fn store(&self, prec: u32, target: &QComplex, state: Vec<ComplexInterval>, path: Vec<QComplex>) {
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert((prec, target.key()), (state, path));
    }

    pub(crate) fn root_discs(&self) -> Option<&Vec<radius::RootDisc>> {
        self.root_discs
            .get_or_init(|| radius::root_discs(self.leading()))
            .as_ref()
    }
}
