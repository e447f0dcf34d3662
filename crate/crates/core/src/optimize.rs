//! Bounded scalar minimization: a log-spaced scan to find the right basin,
//! then golden-section refinement inside the bracketing cell.
//!
//! The scan is what makes this safe for objectives with kinks or several
//! shallow basins. Ties always resolve toward the smaller argument.

use crate::error::{domain, numeric, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// Index of the best scan point; `points - 1` means the upper bound.
    pub scan_index: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanGolden {
    pub points: usize,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ScanGolden {
    fn default() -> Self {
        Self { points: 256, rel_tol: 1e-12, max_iter: 200 }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

impl ScanGolden {
    pub fn log_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.points;
        let (a, b) = (lo.ln(), hi.ln());
        let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        // Pin the ends so that `lo` itself is a candidate.
        g[0] = lo;
        g[n - 1] = hi;
        g
    }

    /// Minimizes `f` over `[lo, hi]` (`0 < lo < hi`).
    pub fn minimize(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Minimum> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return domain(format!("invalid search interval [{lo}, {hi}]"));
        }
        if self.points < 3 {
            return domain("scan needs at least 3 points");
        }
        let grid = self.log_grid(lo, hi);
        let mut best = (0usize, f64::INFINITY);
        for (i, &x) in grid.iter().enumerate() {
            let v = f(x)?;
            if v.is_nan() {
                return numeric(format!("objective is NaN at {x}"));
            }
            if v < best.1 {
                best = (i, v);
            }
        }
        let (i, fi) = best;
        let mut a = grid[i.saturating_sub(1)];
        let mut b = grid[(i + 1).min(grid.len() - 1)];

        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        let mut iter = 0;
        while (b - a) > self.rel_tol * c.abs().max(f64::MIN_POSITIVE) {
            iter += 1;
            if iter > self.max_iter {
                return numeric(format!("golden section did not converge on [{a}, {b}]"));
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(d)?;
            }
        }
        let (mut x, mut v) = if fc <= fd { (c, fc) } else { (d, fd) };
        if fi <= v {
            x = grid[i];
            v = fi;
        }
        // Flat stretches: prefer the left end of the bracket.
        if i > 0 {
            let left = grid[i - 1];
            let fl = f(left)?;
            if fl <= v {
                x = left;
                v = fl;
            }
        }
        Ok(Minimum { x, value: v, scan_index: i })
    }
}
