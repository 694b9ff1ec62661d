//! Central finite-difference gradient checking.

use super::{Gradients, ParamId, ParamStore};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct GradMismatch {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Default)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub failures: Vec<GradMismatch>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `|a - n| / max(|a|, |n|, floor)`.
///
/// The floor keeps entries whose true gradient is essentially zero from
/// dividing round-off by round-off.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(floor);
    (analytic - numeric).abs() / denom
}

/// Compares `analytic` against central differences of `loss` for every entry
/// of every parameter (or only `only` when given).
pub fn check_gradients<T, F>(
    store: &mut ParamStore<T>,
    analytic: &Gradients<T>,
    mut loss: F,
    epsilon: f64,
    tolerance: f64,
    floor: f64,
    only: Option<&[ParamId]>,
) -> GradCheckReport
where
    T: Scalar,
    F: FnMut(&ParamStore<T>) -> f64,
{
    let ids: Vec<ParamId> = match only {
        Some(ids) => ids.to_vec(),
        None => store.ids().collect(),
    };
    let mut report = GradCheckReport::default();
    for id in ids {
        for k in 0..store.get(id).len() {
            let orig = store.get(id).data()[k];
            store.get_mut(id).data_mut()[k] = T::of(orig.as_f64() + epsilon);
            let plus = loss(store);
            store.get_mut(id).data_mut()[k] = T::of(orig.as_f64() - epsilon);
            let minus = loss(store);
            store.get_mut(id).data_mut()[k] = orig;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic.get(id).data()[k].as_f64();
            let rel = relative_error(a, numeric, floor);
            report.checked += 1;
            report.max_rel_error = report.max_rel_error.max(rel);
            if rel > tolerance {
                report.failures.push(GradMismatch {
                    param: store.name(id).to_string(),
                    index: k,
                    analytic: a,
                    numeric,
                    rel_error: rel,
                });
            }
        }
    }
    report
}
