//! Locating the maximum of a concurrence trace: coarse scan on a log-dense
//! grid, then golden-section refinement inside the best bracket.

use crate::error::{Error, Result};

/// Default number of coarse samples.
pub const COARSE_POINTS: usize = 2048;

/// Log-dense grid on `[0, horizon]`: `0` followed by `n - 1` geometrically
/// spaced points from `horizon · 1e-4` to `horizon`.
pub fn log_dense_grid(horizon: f64, n: usize) -> Vec<f64> {
    assert!(n >= 3, "log-dense grid needs at least three points");
    let m = n - 1;
    let lo = (horizon * 1e-4).ln();
    let hi = horizon.ln();
    let mut grid = Vec::with_capacity(n);
    grid.push(0.0);
    for k in 0..m {
        let x = lo + (hi - lo) * k as f64 / (m - 1) as f64;
        grid.push(x.exp());
    }
    *grid.last_mut().unwrap() = horizon;
    grid
}

/// Located maximum of a scalar trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub value: f64,
    pub time: f64,
}

/// Refines the coarse maximum of `values` (sampled on `grid`) with a
/// golden-section search on `eval`.
pub fn refine_maximum<F>(grid: &[f64], values: &[f64], mut eval: F) -> Result<Peak>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.is_empty() || grid.len() != values.len() {
        return Err(Error::Numerical("empty or mismatched coarse trace".into()));
    }
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite concurrence at t = {}",
            grid[bad]
        )));
    }
    let (best, &best_value) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let mut peak = Peak {
        value: best_value,
        time: grid[best],
    };
    if best == 0 || best + 1 == grid.len() {
        return Ok(peak);
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let tol = 1e-11 * grid[best].max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        }
    }
    for (t, v) in [(x1, f1), (x2, f2)] {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite concurrence at t = {t}")));
        }
        if v > peak.value {
            peak = Peak { value: v, time: t };
        }
    }
    Ok(peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = log_dense_grid(20.0, 2048);
        assert_eq!(g.len(), 2048);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 20.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn finds_smooth_peak() {
        let f = |t: f64| t * (-t).exp();
        let g = log_dense_grid(20.0, 64);
        let v: Vec<f64> = g.iter().map(|&t| f(t)).collect();
        let p = refine_maximum(&g, &v, |t| Ok(f(t))).unwrap();
        assert!((p.time - 1.0).abs() < 1e-6);
        assert!((p.value - (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn boundary_maximum_is_kept() {
        let g = log_dense_grid(5.0, 16);
        let v: Vec<f64> = g.iter().map(|t| 1.0 - (-t).exp()).collect();
        let p = refine_maximum(&g, &v, |_| unreachable!()).unwrap();
        assert_eq!(p.time, 5.0);
    }

    #[test]
    fn nan_is_an_error() {
        let g = [0.0, 1.0, 2.0];
        assert!(refine_maximum(&g, &[0.0, f64::NAN, 0.0], |_| Ok(0.0)).is_err());
    }
}
