//! Relative sup-norm errors, restriction of a reference solution onto a
//! coarser grid, and error tables with observed orders.

use kinetic_hj::{GridSpec, PhaseField};

use crate::error::{HarnessError, Result};

/// `|reference - candidate|_inf / |reference|_inf` (the plain sup difference
/// if the reference vanishes identically).
pub fn error_metric(reference: &PhaseField, candidate: &PhaseField) -> Result<f64> {
    if !reference.same_shape(candidate) {
        return Err(HarnessError::Core(kinetic_hj::Error::ShapeMismatch(format!(
            "reference is {}x{}, candidate {}x{}",
            reference.n_x(),
            reference.n_v(),
            candidate.n_x(),
            candidate.n_v()
        ))));
    }
    let diff = reference.max_abs_diff(candidate);
    let scale = reference.max_abs();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Evaluates a reference field at the nodes of `coarse`.
///
/// Velocities must nest (every coarse node is a reference node). Positions are
/// linearly interpolated on the periodic reference grid, which is exact at
/// shared nodes and averages the two neighbors where a coarse cell center
/// falls on a reference cell face (power-of-two refinement).
pub fn restrict(reference: &PhaseField, fine: &GridSpec, coarse: &GridSpec) -> Result<PhaseField> {
    if reference.n_x() != fine.n_x() || reference.n_v() != fine.n_v() {
        return Err(HarnessError::Core(kinetic_hj::Error::ShapeMismatch(
            "reference field does not match its grid".into(),
        )));
    }
    if (fine.x_star() - coarse.x_star()).abs() > 1e-12 || (fine.v_star() - coarse.v_star()).abs() > 1e-12 {
        return Err(HarnessError::Data("grids cover different domains".into()));
    }
    let v_index = coarse
        .v()
        .iter()
        .map(|&v| {
            let k = fine.nearest_v_index(v);
            if (fine.v()[k] - v).abs() <= 1e-9 * fine.dv() {
                Ok(k)
            } else {
                Err(HarnessError::Data(format!("velocity {v} is not a reference node")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let n = fine.n_x();
    let x_weights = coarse
        .x()
        .iter()
        .map(|&x| {
            let pos = (x - fine.x()[0]) / fine.dx();
            let mut base = pos.floor();
            let mut frac = pos - base;
            // snap round-off so shared nodes are copied exactly
            if frac < 1e-9 {
                frac = 0.0;
            } else if frac > 1.0 - 1e-9 {
                base += 1.0;
                frac = 0.0;
            }
            let lo = (base as isize).rem_euclid(n as isize) as usize;
            (lo, (lo + 1) % n, frac)
        })
        .collect::<Vec<_>>();
    let mut out = PhaseField::filled(coarse.n_x(), coarse.n_v(), 0.0);
    for (jc, &jf) in v_index.iter().enumerate() {
        let row = reference.row(jf);
        for (ic, &(lo, hi, w)) in x_weights.iter().enumerate() {
            let value = if w == 0.0 { row[lo] } else { (1.0 - w) * row[lo] + w * row[hi] };
            out.set(ic, jc, value);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub param: f64,
    pub error: f64,
    /// Slope of `ln error` against `ln param` with respect to the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub param_name: String,
    pub rows: Vec<ErrorRow>,
    pub metadata: Vec<(String, String)>,
}

impl ErrorTable {
    /// Builds rows from `(param, error)` pairs in the given order.
    pub fn from_pairs(param_name: &str, pairs: &[(f64, f64)]) -> Result<Self> {
        if let Some(&(p, e)) = pairs.iter().find(|(_, e)| !(*e >= 0.0)) {
            return Err(HarnessError::Data(format!("error {e} at {param_name} = {p} is not nonnegative")));
        }
        let rows = pairs
            .iter()
            .enumerate()
            .map(|(k, &(param, error))| ErrorRow {
                param,
                error,
                order: (k > 0).then(|| pairs[k - 1]).and_then(|(p0, e0)| log_slope(p0, e0, param, error)),
            })
            .collect();
        Ok(Self {
            param_name: param_name.to_string(),
            rows,
            metadata: Vec::new(),
        })
    }

    pub fn with_metadata(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// Least-squares slope of `ln error` against `ln param`; `None` with fewer
    /// than two rows or a vanishing error.
    pub fn fitted_order(&self) -> Option<f64> {
        if self.rows.len() < 2 || self.rows.iter().any(|r| !(r.error > 0.0 && r.param > 0.0)) {
            return None;
        }
        let pts = self
            .rows
            .iter()
            .map(|r| (r.param.ln(), r.error.ln()))
            .collect::<Vec<_>>();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    /// Errors strictly decrease as the parameter decreases.
    pub fn strictly_decreasing_with_param(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.param.total_cmp(&a.param));
        rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

fn log_slope(p0: f64, e0: f64, p1: f64, e1: f64) -> Option<f64> {
    (e0 > 0.0 && e1 > 0.0 && p0 > 0.0 && p1 > 0.0 && p0 != p1).then(|| (e1 / e0).ln() / (p1 / p0).ln())
}
