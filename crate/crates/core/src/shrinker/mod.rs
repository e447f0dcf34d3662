//! Optimal eigenvalue shrinkers.
//!
//! For a sample eigenvalue `λ` above the bulk edge, the asymptotically
//! optimal shrunken value minimizes the loss on the fundamental 2×2 block:
//!
//! ```text
//! η*(λ) = argmin_{η ≥ 1} L(A(ℓ), B(η, c, s)),   ℓ = ℓ(λ), c = c(ℓ), s = s(ℓ)
//! ```
//!
//! Eigenvalues inside the bulk are always sent to 1. Seventeen losses have a
//! closed-form minimizer; the rest are solved numerically.

mod asymptotics;
mod closed;
mod selfcheck;

use crate::error::{domain, numeric, Error, Result};
use crate::loss::{eval_loss2, mat_a, mat_b, LossId};
use crate::optimize::ScanGolden;
use crate::spectral::{bulk_edge_upper, AspectRatio, SpikeGeometry};

pub use asymptotics::{
    affinity_slope, asy_shift, asy_slope, asy_slope_hat, asymptotic_loss, has_unit_slope, log_whitened_slope, ppi,
    tabulate, Shift, ShiftSource, Slope, SlopeSource, SpikedModel, DEFAULT_FINITE_LAMBDA, DEFAULT_PPI_ELL,
    SLOPE_PROBE_LAMBDA,
};
pub use closed::{closed_form, closed_form_losses, has_closed_form};
pub use selfcheck::{agreement_grid, selfcheck, SelfCheckCase, SelfCheckOptions, SelfCheckReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShrinkerMethod {
    ClosedForm,
    Numeric,
    #[default]
    Auto,
}

impl ShrinkerMethod {
    pub fn label(self) -> &'static str {
        match self {
            ShrinkerMethod::ClosedForm => "closed",
            ShrinkerMethod::Numeric => "numeric",
            ShrinkerMethod::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkerResult {
    pub eta: f64,
    /// `ClosedForm` or `Numeric`, never `Auto`.
    pub method_used: ShrinkerMethod,
    pub in_bulk: bool,
}

fn resolve(loss: LossId, method: ShrinkerMethod) -> Result<ShrinkerMethod> {
    match method {
        ShrinkerMethod::ClosedForm if !has_closed_form(loss) => Err(Error::Unsupported(loss.to_string())),
        ShrinkerMethod::Auto if has_closed_form(loss) => Ok(ShrinkerMethod::ClosedForm),
        ShrinkerMethod::Auto => Ok(ShrinkerMethod::Numeric),
        m => Ok(m),
    }
}

/// The optimal shrinker `η*(λ; γ, L)`.
pub fn shrink(lambda: f64, gamma: AspectRatio, loss: LossId, method: ShrinkerMethod) -> Result<ShrinkerResult> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain(format!("eigenvalue must be finite and >= 0, got {lambda}"));
    }
    let method_used = resolve(loss, method)?;
    if lambda <= bulk_edge_upper(gamma) {
        return Ok(ShrinkerResult { eta: 1.0, method_used, in_bulk: true });
    }
    let g = SpikeGeometry::from_lambda(lambda, gamma)?;
    let eta = match method_used {
        ShrinkerMethod::ClosedForm => closed_form(loss, &g).expect("resolved to a closed form"),
        _ => minimize_block_loss(&g, loss)?.0,
    };
    Ok(ShrinkerResult { eta, method_used, in_bulk: false })
}

/// Numerically minimizes `η ↦ L(A(ℓ), B(η, c(ℓ), s(ℓ)))` over `η ≥ 1`.
pub fn shrink_numeric(ell: f64, gamma: AspectRatio, loss: LossId) -> Result<f64> {
    let g = SpikeGeometry::from_ell(ell, gamma)?;
    Ok(minimize_block_loss(&g, loss)?.0)
}

/// The block loss `F(η, ℓ)` minimized by the optimal shrinker.
pub fn block_loss(loss: LossId, g: &SpikeGeometry, eta: f64) -> Result<f64> {
    eval_loss2(loss, &mat_a(g.ell)?, &mat_b(eta, g.c(), g.s())?)
}

/// Returns `(argmin, min)`.
fn minimize_block_loss(g: &SpikeGeometry, loss: LossId) -> Result<(f64, f64)> {
    let opt = ScanGolden::default();
    let mut hi = 10.0 * g.lambda.max(g.ell * g.ell);
    for _ in 0..=4 {
        let m = opt.minimize(1.0, hi, |eta| block_loss(loss, g, eta))?;
        if m.scan_index + 1 < opt.points {
            return Ok((m.x, m.value));
        }
        hi *= 2.0;
    }
    numeric(format!("minimizer for {loss} at ell={} kept hitting the upper bound", g.ell))
}

/// Bulk-edge hard threshold: `λ` if it is above the bulk edge, else 1.
pub fn hard_threshold(lambda: f64, gamma: AspectRatio) -> f64 {
    if lambda > bulk_edge_upper(gamma) {
        lambda
    } else {
        1.0
    }
}

/// A scalar nonlinearity applied to sample eigenvalues.
pub trait Shrinker: Sync {
    fn eta(&self, lambda: f64) -> Result<f64>;

    fn name(&self) -> String;
}

/// `η*` for a given loss.
#[derive(Debug, Clone, Copy)]
pub struct Optimal {
    pub gamma: AspectRatio,
    pub loss: LossId,
    pub method: ShrinkerMethod,
}

impl Optimal {
    pub fn new(gamma: AspectRatio, loss: LossId) -> Self {
        Self { gamma, loss, method: ShrinkerMethod::Auto }
    }
}

impl Shrinker for Optimal {
    fn eta(&self, lambda: f64) -> Result<f64> {
        Ok(shrink(lambda, self.gamma, self.loss, self.method)?.eta)
    }

    fn name(&self) -> String {
        format!("optimal[{}]", self.loss)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HardThreshold {
    pub gamma: AspectRatio,
}

impl Shrinker for HardThreshold {
    fn eta(&self, lambda: f64) -> Result<f64> {
        Ok(hard_threshold(lambda, self.gamma))
    }

    fn name(&self) -> String {
        "hard_threshold".into()
    }
}

/// A user-supplied shrinker given by knots `(λ, η)`, linearly interpolated.
///
/// Eigenvalues inside the bulk map to 1. Outside the knot range the nearest
/// segment is extended linearly. Results are floored at 1.
#[derive(Debug, Clone)]
pub struct TableShrinker {
    gamma: AspectRatio,
    knots: Vec<(f64, f64)>,
}

impl TableShrinker {
    pub fn new(gamma: AspectRatio, mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return domain("shrinker table is empty");
        }
        if knots.iter().any(|&(l, e)| !l.is_finite() || !e.is_finite()) {
            return domain("shrinker table has non-finite entries");
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return domain("shrinker table has repeated eigenvalues");
        }
        Ok(Self { gamma, knots })
    }
}

impl Shrinker for TableShrinker {
    fn eta(&self, lambda: f64) -> Result<f64> {
        if lambda <= bulk_edge_upper(self.gamma) {
            return Ok(1.0);
        }
        let k = &self.knots;
        if k.len() == 1 {
            return Ok(k[0].1.max(1.0));
        }
        let j = k.partition_point(|&(l, _)| l < lambda).clamp(1, k.len() - 1);
        let ((l0, e0), (l1, e1)) = (k[j - 1], k[j]);
        let eta = e0 + (e1 - e0) * (lambda - l0) / (l1 - l0);
        Ok(eta.max(1.0))
    }

    fn name(&self) -> String {
        "table".into()
    }
}
