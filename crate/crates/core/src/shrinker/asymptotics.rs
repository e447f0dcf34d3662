//! Large-`p` behaviour of shrinkers: deterministic asymptotic loss,
//! slopes `lim η(λ)/λ`, shifts `lim η(λ) − λ`, and the percent improvement
//! of `η*` over bulk-edge hard thresholding.

use rayon::prelude::*;

use super::{block_loss, hard_threshold, shrink, Shrinker, ShrinkerMethod};
use crate::error::{domain, numeric, Error, Result};
use crate::loss::{LossId, Norm, Pivot, Statistic};
use crate::optimize::ScanGolden;
use crate::spectral::{bulk_edge_upper, AspectRatio, SpikeGeometry};

/// Finite `λ` at which slopes and shifts without a formula are probed.
pub const DEFAULT_FINITE_LAMBDA: f64 = 100.0;
/// Spike strength standing in for `ℓ → ∞` in PPI.
pub const DEFAULT_PPI_ELL: f64 = 1e4;
/// `Λ` used by [`asy_slope`] for losses without an exact slope.
pub const SLOPE_PROBE_LAMBDA: f64 = 1e4;

/// Population spikes together with the aspect ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedModel {
    pub gamma: AspectRatio,
    spikes: Vec<f64>,
}

impl SpikedModel {
    /// Spikes must be finite, above 1 and strictly decreasing.
    pub fn new(gamma: AspectRatio, spikes: Vec<f64>) -> Result<Self> {
        if spikes.iter().any(|&l| !(l > 1.0) || !l.is_finite()) {
            return domain(format!("spikes must be finite and > 1, got {spikes:?}"));
        }
        if spikes.windows(2).any(|w| !(w[0] > w[1])) {
            return domain(format!("spikes must be distinct and in decreasing order, got {spikes:?}"));
        }
        Ok(Self { gamma, spikes })
    }

    pub fn spikes(&self) -> &[f64] {
        &self.spikes
    }
}

/// `L∞ = ⊕ L(A(ℓᵢ), B(η(λ(ℓᵢ)), cᵢ, sᵢ))`, summed or maximized according to
/// the loss family.
pub fn asymptotic_loss(model: &SpikedModel, loss: LossId, eta: &dyn Shrinker) -> Result<f64> {
    let mut parts = Vec::with_capacity(model.spikes.len());
    for &ell in &model.spikes {
        let g = SpikeGeometry::from_ell(ell, model.gamma)?;
        let e = eta.eta(g.lambda)?;
        parts.push(block_loss(loss, &g, e)?);
    }
    Ok(loss.aggregation().combine(parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeSource {
    ClosedForm,
    /// Root or minimizer of a scalar limit equation.
    LimitEquation,
    /// `η*(Λ)/Λ` at [`SLOPE_PROBE_LAMBDA`].
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub value: f64,
    pub source: SlopeSource,
}

fn closed_slope(loss: LossId, gamma: f64) -> Option<f64> {
    use Norm::*;
    use Pivot::*;
    let inv = |x: f64| 1.0 / x;
    Some(match loss {
        LossId::NormPivot(Frobenius, Difference) => 1.0,
        LossId::NormPivot(Frobenius, PrecisionDifference) => inv(1.0 + gamma),
        LossId::NormPivot(Frobenius, LeftRatio) => 0.0,
        LossId::NormPivot(Frobenius, RightRatio) => 1.0,
        LossId::NormPivot(Frobenius, Whitened) => inv((1.0 + gamma).powi(2)),
        LossId::NormPivot(Operator, Difference) => 1.0,
        LossId::NormPivot(Operator, PrecisionDifference) => 1.0,
        LossId::NormPivot(Operator, Whitened) => inv(1.0 + gamma),
        LossId::NormPivot(Nuclear, Difference) => 1.0,
        LossId::NormPivot(Nuclear, PrecisionDifference) => inv(1.0 + 2.0 * gamma),
        LossId::NormPivot(Nuclear, LeftRatio) => 0.0,
        LossId::NormPivot(Nuclear, RightRatio) => 1.0,
        LossId::NormPivot(Nuclear, Whitened) => (1.0 - gamma) / (1.0 + gamma).powi(2),
        LossId::Statistical(Statistic::Stein) => inv(1.0 + gamma),
        LossId::Statistical(Statistic::Entropy) => 1.0,
        LossId::Statistical(Statistic::Divergence) => inv((1.0 + gamma).sqrt()),
        LossId::Statistical(Statistic::Frechet) => 1.0,
        _ => return None,
    })
}

/// The root `b ∈ (0, 1)` of `b^{3/2} = (2/γ)(1 − b)`.
pub fn affinity_slope(gamma: AspectRatio) -> f64 {
    let f = |b: f64| b.powf(1.5) - 2.0 / gamma.value() * (1.0 - b);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer over `b ∈ (0, 1]` of `Σ± log² λ±(b; γ)`, the eigenvalues of
/// the whitened block when `η = bℓ` and `ℓ → ∞`.
pub fn log_whitened_slope(gamma: AspectRatio) -> Result<f64> {
    let g = gamma.value();
    let j = |b: f64| {
        let t = 1.0 + b * (1.0 + g);
        let r = (t * t - 4.0 * b).max(0.0).sqrt();
        let hi = 0.5 * (t + r);
        let lo = b / hi;
        Ok(hi.ln().powi(2) + lo.ln().powi(2))
    };
    Ok(ScanGolden::default().minimize(1e-8, 1.0, j)?.x)
}

/// Asymptotic slope `lim η*(λ)/λ`.
pub fn asy_slope(loss: LossId, gamma: AspectRatio) -> Result<Slope> {
    if let Some(v) = closed_slope(loss, gamma.value()) {
        return Ok(Slope { value: v, source: SlopeSource::ClosedForm });
    }
    match loss {
        LossId::AFFINITY => Ok(Slope { value: affinity_slope(gamma), source: SlopeSource::LimitEquation }),
        LossId::NormPivot(Norm::Frobenius, Pivot::LogWhitened) => {
            Ok(Slope { value: log_whitened_slope(gamma)?, source: SlopeSource::LimitEquation })
        }
        _ => Ok(Slope { value: asy_slope_hat(loss, gamma, SLOPE_PROBE_LAMBDA)?, source: SlopeSource::Approximate }),
    }
}

/// Finite-`λ` slope `η*(λ)/λ`.
pub fn asy_slope_hat(loss: LossId, gamma: AspectRatio, at_lambda: f64) -> Result<f64> {
    check_probe(at_lambda, gamma)?;
    Ok(shrink(at_lambda, gamma, loss, ShrinkerMethod::Auto)?.eta / at_lambda)
}

fn check_probe(at_lambda: f64, gamma: AspectRatio) -> Result<()> {
    if !(at_lambda > bulk_edge_upper(gamma)) || !at_lambda.is_finite() {
        return domain(format!("probe eigenvalue {at_lambda} must exceed the bulk edge"));
    }
    Ok(())
}

/// Losses whose optimal shrinker has asymptotic slope exactly 1.
pub fn has_unit_slope(loss: LossId) -> bool {
    const UNIT: [&str; 12] = ["F,1", "F,4", "F,5", "O,1", "O,2", "O,4", "O,5", "O,7", "N,1", "N,4", "ent", "fre"];
    UNIT.iter().any(|s| s.parse::<LossId>().map(|l| l == loss).unwrap_or(false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSource {
    ClosedForm,
    /// `η*(λ) − λ` at the probe eigenvalue.
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shift {
    pub value: f64,
    pub source: ShiftSource,
}

fn closed_shift(loss: LossId, gamma: f64) -> Option<f64> {
    let k = match loss.to_string().as_str() {
        "F,1" | "N,4" | "ent" => -2.0,
        "O,1" | "O,2" | "F,4" => -1.0,
        "N,1" | "fre" => -3.0,
        _ => return None,
    };
    Some(k * gamma)
}

/// Asymptotic shift `lim η*(λ) − λ`, defined only for unit-slope shrinkers.
pub fn asy_shift(loss: LossId, gamma: AspectRatio, at_lambda: f64) -> Result<Shift> {
    if !has_unit_slope(loss) {
        return Err(Error::UndefinedShift(loss.to_string()));
    }
    if let Some(v) = closed_shift(loss, gamma.value()) {
        return Ok(Shift { value: v, source: ShiftSource::ClosedForm });
    }
    check_probe(at_lambda, gamma)?;
    let eta = shrink(at_lambda, gamma, loss, ShrinkerMethod::Auto)?.eta;
    Ok(Shift { value: eta - at_lambda, source: ShiftSource::Approximate })
}

/// Possible percent improvement of `η*` over bulk-edge hard thresholding
/// for a single spike `ℓ`.
pub fn ppi(loss: LossId, ell: f64, gamma: AspectRatio) -> Result<f64> {
    let g = SpikeGeometry::from_ell(ell, gamma)?;
    let naive = block_loss(loss, &g, hard_threshold(g.lambda, gamma))?;
    let best = block_loss(loss, &g, shrink(g.lambda, gamma, loss, ShrinkerMethod::Auto)?.eta)?;
    if !(naive > 0.0) {
        return numeric(format!("hard-threshold loss is {naive} for {loss} at ell={ell}"));
    }
    // η* minimizes the block loss, so anything below zero is rounding.
    Ok((100.0 * (naive - best) / naive).clamp(0.0, 100.0))
}

/// `(λ, η*(λ))` for each grid point, in input order.
pub fn tabulate(loss: LossId, gamma: AspectRatio, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.par_iter().map(|&l| Ok((l, shrink(l, gamma, loss, ShrinkerMethod::Auto)?.eta))).collect()
}
