use rug::float::Round;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::QComplex;
use crate::interval::{
    approximate_inverse, strict_subset, strict_subset_real, IntervalBox, IntervalMatrix, PointMatrix,
};
use crate::system::{IngredientSystem, Mode};

const REFINE_MAX_ITER: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    SubsetFailed,
    ContractionFailed,
    OracleError,
}

#[derive(Clone, Debug)]
pub struct KrawczykCertificate {
    pub region: IntervalBox,
    pub center: Vec<QComplex>,
    pub preconditioner: Option<PointMatrix>,
    pub image: Option<IntervalBox>,
    /// Upper bound on `‖I − Y□F'(I)‖∞`, times √2 in complex mode.
    pub contraction: Option<Float>,
    pub verdict: Verdict,
    pub failure: Option<FailureReason>,
    pub error: Option<String>,
    pub mode: Mode,
}

/// `y − Y□F(y) + (I − Y□F'(I))(I − y)` together with `I − Y□F'(I)`.
fn image_and_defect(
    sys: &IngredientSystem,
    region: &IntervalBox,
    y: &[QComplex],
    pre: &PointMatrix,
) -> Result<(IntervalBox, IntervalMatrix)> {
    let prec = region.prec();
    let fy = sys.eval_f_point(y, prec)?;
    let jac = sys.jacobian_box(region)?;
    let yi = pre.to_interval(prec);
    let defect = IntervalMatrix::identity(sys.dim(), prec).sub(&yi.mul(&jac)?)?;
    let yb = IntervalBox::from_exact(y, prec)?;
    let step = yi.mul_box(&fy)?;
    let spread = defect.mul_box(&region.sub(&yb)?)?;
    let mut image = yb.sub(&step)?.add(&spread)?;
    if sys.mode() == Mode::Real {
        image = image.real_part();
    }
    Ok((image, defect))
}

/// The Krawczyk image `□K_y(I)`.
pub fn krawczyk_image(sys: &IngredientSystem, region: &IntervalBox, y: &[QComplex], pre: &PointMatrix) -> Result<IntervalBox> {
    if !region.contains_exact(y) {
        return Err(Error::Domain("center is not inside the region".into()));
    }
    image_and_defect(sys, region, y, pre).map(|(k, _)| k)
}

/// Approximate inverse of the midpoint Jacobian at `y`.
pub fn default_preconditioner(sys: &IngredientSystem, y: &[QComplex], prec: u32) -> Result<Option<PointMatrix>> {
    let jac = sys.jacobian_point(y, prec)?;
    Ok(approximate_inverse(&jac.mid()))
}

fn contraction_bound(defect: &IntervalMatrix, mode: Mode) -> Float {
    let norm = defect.max_norm_bound();
    match mode {
        Mode::Real => norm,
        Mode::Complex => {
            let prec = norm.prec();
            let sqrt2 = Float::with_val_round(prec, Float::with_val(prec, 2).sqrt_ref(), Round::Up).0;
            Float::with_val_round(prec, &norm * &sqrt2, Round::Up).0
        }
    }
}

/// Runs the Krawczyk test on `region`. A pass certifies a unique root in the region.
pub fn krawczyk_test(
    sys: &IngredientSystem,
    region: &IntervalBox,
    y: Option<&[QComplex]>,
    pre: Option<&PointMatrix>,
) -> KrawczykCertificate {
    let center: Vec<QComplex> = match y {
        Some(y) => y.to_vec(),
        None => region.mid_exact(),
    };
    let mut cert = KrawczykCertificate {
        region: region.clone(),
        center: center.clone(),
        preconditioner: pre.cloned(),
        image: None,
        contraction: None,
        verdict: Verdict::Fail,
        failure: None,
        error: None,
        mode: sys.mode(),
    };
    let oracle = |mut cert: KrawczykCertificate, e: Error| {
        cert.failure = Some(FailureReason::OracleError);
        cert.error = Some(e.to_string());
        cert
    };
    if region.len() != sys.dim() {
        let e = Error::DimensionMismatch { expected: sys.dim(), found: region.len() };
        return oracle(cert, e);
    }
    if sys.mode() == Mode::Real && !region.is_real() {
        return oracle(cert, Error::Domain("real mode needs a real region".into()));
    }
    if !region.contains_exact(&center) {
        return oracle(cert, Error::Domain("center is not inside the region".into()));
    }
    let pre = match pre {
        Some(p) => p.clone(),
        None => match default_preconditioner(sys, &center, region.prec()) {
            Ok(Some(p)) => p,
            Ok(None) => {
                cert.failure = Some(FailureReason::ContractionFailed);
                cert.error = Some("midpoint Jacobian is numerically singular".into());
                return cert;
            }
            Err(e) => return oracle(cert, e),
        },
    };
    cert.preconditioner = Some(pre.clone());
    let (image, defect) = match image_and_defect(sys, region, &center, &pre) {
        Ok(v) => v,
        Err(e) => return oracle(cert, e),
    };
    let contraction = contraction_bound(&defect, sys.mode());
    let inside = match sys.mode() {
        Mode::Real => strict_subset_real(&image, region),
        Mode::Complex => strict_subset(&image, region),
    }
    .unwrap_or(false);
    let contracts = contraction < 1;
    cert.image = Some(image);
    cert.contraction = Some(contraction);
    cert.failure = if !inside {
        Some(FailureReason::SubsetFailed)
    } else if !contracts {
        Some(FailureReason::ContractionFailed)
    } else {
        None
    };
    if cert.failure.is_none() {
        cert.verdict = Verdict::Pass;
    }
    cert
}

/// Shrinks a certified region by iterating `I ← □K_{m(I)}(I) ∩ I` until the
/// width stops decreasing. Every iterate contains the certified root.
pub fn refine_root(sys: &IngredientSystem, cert: &KrawczykCertificate) -> IntervalBox {
    let mut current = match &cert.image {
        Some(k) if cert.verdict.passed() => match k.intersect(&cert.region) {
            Ok(Some(b)) => b,
            _ => cert.region.clone(),
        },
        _ => return cert.region.clone(),
    };
    let mut width = current.max_width();
    for _ in 0..REFINE_MAX_ITER {
        let y = current.mid_exact();
        let pre = match default_preconditioner(sys, &y, current.prec()) {
            Ok(Some(p)) => p,
            _ => break,
        };
        let next = match image_and_defect(sys, &current, &y, &pre) {
            Ok((k, _)) => match k.intersect(&current) {
                Ok(Some(b)) => b,
                _ => break,
            },
            Err(_) => break,
        };
        let w = next.max_width();
        if !(w < width) {
            break;
        }
        let stalled = w.to_f64() > 0.9 * width.to_f64();
        current = next;
        width = w;
        if stalled {
            break;
        }
    }
    current
}
