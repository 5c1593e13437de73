//! Quadrature on axis-aligned boxes.
//!
//! Composite Simpson rules on uniform grids, the default evaluation scheme of
//! the whole crate: 4096 panels per axis in one dimension, 512 in two, 128 in
//! three. Dimensions above three are not supported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Simpson panel counts per axis, indexed by dimension.
pub fn default_panels(dim: usize) -> usize {
    match dim {
        1 => 4096,
        2 => 512,
        _ => 128,
    }
}

/// Axis-aligned box in `R^p`, `p <= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SupportBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter(
                "box bounds must be nonempty and of equal dimension".into(),
            ));
        }
        if lo.len() > 3 {
            return Err(Error::Capacity {
                what: "box dimension".into(),
                limit: 3,
                got: lo.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("box must have lo < hi per axis".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (a, b))| *a <= *xi && *xi <= *b)
    }

    /// Smallest box containing both `self` and `other`.
    pub fn union(&self, other: &SupportBox) -> SupportBox {
        let lo = self
            .lo
            .iter()
            .zip(&other.lo)
            .map(|(a, b)| a.min(*b))
            .collect();
        let hi = self
            .hi
            .iter()
            .zip(&other.hi)
            .map(|(a, b)| a.max(*b))
            .collect();
        SupportBox { lo, hi }
    }

    /// Box shrunk by `delta` on every side (used for interior floor estimates).
    pub fn shrink(&self, delta: f64) -> SupportBox {
        let lo = self.lo.iter().map(|a| a + delta).collect();
        let hi = self.hi.iter().map(|b| b - delta).collect();
        SupportBox { lo, hi }
    }
}

/// Simpson weights for a grid of `panels + 1` points (`panels` even).
fn simpson_weight(i: usize, panels: usize) -> f64 {
    if i == 0 || i == panels {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson on `[a, b]` with `panels` panels (rounded up to even).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        acc += simpson_weight(i, n) * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Composite Simpson over a box in `R^p`, `p <= 3`, with `panels` per axis.
pub fn simpson_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bx: &SupportBox,
    panels: usize,
) -> Result<f64> {
    let n = panels.max(2) + panels % 2;
    match bx.dim() {
        1 => Ok(simpson(|x| f(&[x]), bx.lo[0], bx.hi[0], n)),
        2 => {
            let (ax, bx0) = (bx.lo[0], bx.hi[0]);
            let (ay, by) = (bx.lo[1], bx.hi[1]);
            let hx = (bx0 - ax) / n as f64;
            let hy = (by - ay) / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let wi = simpson_weight(i, n);
                let x = ax + i as f64 * hx;
                let mut row = 0.0;
                for j in 0..=n {
                    row += simpson_weight(j, n) * f(&[x, ay + j as f64 * hy]);
                }
                acc += wi * row;
            }
            Ok(acc * hx * hy / 9.0)
        }
        3 => {
            let h: Vec<f64> = (0..3).map(|k| (bx.hi[k] - bx.lo[k]) / n as f64).collect();
            let mut acc = 0.0;
            for i in 0..=n {
                let wi = simpson_weight(i, n);
                let x = bx.lo[0] + i as f64 * h[0];
                for j in 0..=n {
                    let wj = simpson_weight(j, n);
                    let y = bx.lo[1] + j as f64 * h[1];
                    let mut row = 0.0;
                    for k in 0..=n {
                        row += simpson_weight(k, n) * f(&[x, y, bx.lo[2] + k as f64 * h[2]]);
                    }
                    acc += wi * wj * row;
                }
            }
            Ok(acc * h[0] * h[1] * h[2] / 27.0)
        }
        d => Err(Error::Capacity {
            what: "quadrature dimension".into(),
            limit: 3,
            got: d,
        }),
    }
}

/// Integral of `f` over `(0, 1)` avoiding both endpoints.
///
/// Integrates on `[2^-k, 1 - 2^-k]` with Simpson and expands `k` until the
/// increment falls below `tol`; used for quantile-coupling integrals whose
/// integrands may be singular at 0 and 1.
pub fn integrate_open_unit<F: FnMut(f64) -> f64>(
    mut f: F,
    tol: f64,
    what: &str,
) -> Result<f64> {
    let mut total = simpson(&mut f, 0.25, 0.75, 1024);
    let mut last_increment = f64::INFINITY;
    for k in 3..60 {
        let lo_new = 0.5_f64.powi(k);
        let lo_old = 0.5_f64.powi(k - 1);
        let panels = 256;
        let inc = simpson(&mut f, lo_new, lo_old, panels)
            + simpson(&mut f, 1.0 - lo_old, 1.0 - lo_new, panels);
        total += inc;
        last_increment = inc.abs();
        if last_increment <= tol * total.abs().max(1e-300) || last_increment <= tol * tol {
            return Ok(total);
        }
    }
    Err(Error::Numeric {
        what: format!("open-interval quadrature did not converge: {what}"),
        residual: last_increment,
    })
}
