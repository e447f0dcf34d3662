//! Closed-form optimal shrinkers, as functions of the spike geometry
//! `(ℓ, c², s²)` of the sample eigenvalue being shrunk.

use crate::loss::{LossId, Norm, Pivot, Statistic};
use crate::spectral::SpikeGeometry;

/// Whether `η*` has a closed form for this loss. Nine losses do not:
/// F,5 F,7 O,3 O,4 O,5 O,7 N,5 N,7 and affinity.
pub fn has_closed_form(loss: LossId) -> bool {
    use Pivot::*;
    match loss {
        LossId::NormPivot(Norm::Frobenius, p) => {
            matches!(p, Difference | PrecisionDifference | LeftRatio | RightRatio | Whitened)
        }
        LossId::NormPivot(Norm::Operator, p) => matches!(p, Difference | PrecisionDifference | Whitened),
        LossId::NormPivot(Norm::Nuclear, p) => {
            matches!(p, Difference | PrecisionDifference | LeftRatio | RightRatio | Whitened)
        }
        LossId::Statistical(s) => s != Statistic::Affinity,
    }
}

/// The losses with a closed-form shrinker, in catalogue order.
pub fn closed_form_losses() -> Vec<LossId> {
    LossId::all().into_iter().filter(|&l| has_closed_form(l)).collect()
}

/// `η*(ℓ)` for a loss with a closed form, `None` otherwise.
pub fn closed_form(loss: LossId, g: &SpikeGeometry) -> Option<f64> {
    use Norm::*;
    use Pivot::*;
    let (l, c2, s2) = (g.ell, g.c2, g.s2);
    let at_least_one = |x: f64| x.max(1.0);
    let eta = match loss {
        LossId::NormPivot(Frobenius, Difference) => l * c2 + s2,
        LossId::NormPivot(Frobenius, PrecisionDifference) => l / (c2 + l * s2),
        LossId::NormPivot(Frobenius, LeftRatio) => (l * c2 + l * l * s2) / (c2 + l * l * s2),
        LossId::NormPivot(Frobenius, RightRatio) => (l * l * c2 + s2) / (l * c2 + s2),
        LossId::NormPivot(Frobenius, Whitened) => 1.0 + (l - 1.0) * c2 / (c2 + l * s2).powi(2),
        LossId::NormPivot(Operator, Difference) | LossId::NormPivot(Operator, PrecisionDifference) => l,
        LossId::NormPivot(Operator, Whitened) => 1.0 + (l - 1.0) / (c2 + l * s2),
        LossId::NormPivot(Nuclear, Difference) => at_least_one(1.0 + (l - 1.0) * (1.0 - 2.0 * s2)),
        LossId::NormPivot(Nuclear, PrecisionDifference) => at_least_one(l / (c2 + (2.0 * l - 1.0) * s2)),
        LossId::NormPivot(Nuclear, LeftRatio) => at_least_one(l / (c2 + l * l * s2)),
        LossId::NormPivot(Nuclear, RightRatio) => at_least_one((l * l * c2 + s2) / l),
        LossId::NormPivot(Nuclear, Whitened) => at_least_one((l - (l - 1.0).powi(2) * c2 * s2) / (c2 + l * s2).powi(2)),
        LossId::Statistical(Statistic::Stein) => l / (c2 + l * s2),
        LossId::Statistical(Statistic::Entropy) => l * c2 + s2,
        LossId::Statistical(Statistic::Divergence) => ((l * l * c2 + l * s2) / (c2 + l * s2)).sqrt(),
        LossId::Statistical(Statistic::Frechet) => (l.sqrt() * c2 + s2).powi(2),
        _ => return None,
    };
    Some(eta)
}
