//! Replicate loop and aggregation.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{estimator_loss, oracle_loss, sample_covariance, spike_stats, OracleKind, SampleEigen, SimConfig};
use crate::error::{Error, Result};
use crate::loss::LossId;
use crate::shrinker::{asymptotic_loss, Optimal, SpikedModel};
use crate::spectral::{bulk_edge_upper, cos2_of_ell, lambda_of_ell, phase_transition, AspectRatio};

/// Everything measured on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReplicate {
    pub index: u64,
    /// Top `max(r, 1)` sample eigenvalues.
    pub top_eigenvalues: Vec<f64>,
    /// `|⟨eⱼ, vᵢ⟩|`, `r × r`.
    pub cosines: DMatrix<f64>,
    pub losses: Vec<(LossId, f64)>,
    pub oracle_frobenius: f64,
    pub oracle_stein: f64,
}

pub fn run_replicate(config: &SimConfig, index: u64) -> Result<SimReplicate> {
    let s = sample_covariance(config, index)?;
    let eig = SampleEigen::new(&s)?;
    drop(s);
    let r = config.rank();
    let top_eigenvalues = eig.values[..r.max(1)].to_vec();
    let cosines = if r > 0 { spike_stats(&eig, r)?.1 } else { DMatrix::zeros(0, 0) };
    let sigma = config.sigma_diag();
    let mut losses = Vec::with_capacity(config.losses.len());
    for &loss in &config.losses {
        let etas = eig.shrunk(config.shrinker_for(loss)?.as_ref())?;
        let v = estimator_loss(loss, &sigma, &eig, &etas, config.evaluation)?;
        losses.push((loss, v));
    }
    Ok(SimReplicate {
        index,
        top_eigenvalues,
        cosines,
        losses,
        oracle_frobenius: oracle_loss(&eig, &sigma, OracleKind::Frobenius)?,
        oracle_stein: oracle_loss(&eig, &sigma, OracleKind::Stein)?,
    })
}

/// Sample mean with its standard error (`None` for a single value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: Option<f64>,
    pub count: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = (n > 1).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Self { mean, se, count: n }
    }

    pub fn rel_dev(&self, predicted: f64) -> Option<f64> {
        (predicted != 0.0).then(|| (self.mean - predicted) / predicted)
    }

    /// `(mean − predicted) / se`.
    pub fn z(&self, predicted: f64) -> Option<f64> {
        self.se.filter(|&s| s > 0.0).map(|s| (self.mean - predicted) / s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeSummary {
    /// 1-based rank of the sample eigenvalue.
    pub index: usize,
    /// Population spike, `None` in the null model.
    pub ell: Option<f64>,
    pub eigenvalue: MeanSe,
    /// `λ(ℓ)` above the transition, the bulk edge otherwise.
    pub predicted_eigenvalue: f64,
    /// Squared cosine `⟨eᵢ, vᵢ⟩²`.
    pub cos2: Option<MeanSe>,
    pub predicted_cos2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSummary {
    pub loss: LossId,
    pub empirical: MeanSe,
    /// Deterministic asymptotic loss of the configured shrinker.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub n: usize,
    pub p: usize,
    pub gamma: f64,
    pub spikes: Vec<f64>,
    pub seed: u64,
    pub succeeded: usize,
    pub failed: usize,
    pub first_error: Option<Error>,
    pub eigen: Vec<SpikeSummary>,
    pub losses: Vec<LossSummary>,
    pub oracle_frobenius: MeanSe,
    pub oracle_stein: MeanSe,
    /// `L∞(η*)` under Frobenius and Stein loss.
    pub predicted_optimal_frobenius: Option<f64>,
    pub predicted_optimal_stein: Option<f64>,
}

/// One CSV row of a summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: &'static str,
    pub target: String,
    pub stats: MeanSe,
    pub predicted: Option<f64>,
}

impl SummaryRow {
    pub fn rel_dev(&self) -> Option<f64> {
        self.predicted.and_then(|p| self.stats.rel_dev(p))
    }

    pub fn z(&self) -> Option<f64> {
        self.predicted.and_then(|p| self.stats.z(p))
    }
}

impl SimSummary {
    pub fn loss(&self, loss: LossId) -> Option<&LossSummary> {
        self.losses.iter().find(|l| l.loss == loss)
    }

    pub fn rows(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for e in &self.eigen {
            rows.push(SummaryRow {
                metric: "eigenvalue",
                target: e.index.to_string(),
                stats: e.eigenvalue,
                predicted: Some(e.predicted_eigenvalue),
            });
        }
        for e in &self.eigen {
            if let Some(c) = e.cos2 {
                rows.push(SummaryRow {
                    metric: "cos2",
                    target: e.index.to_string(),
                    stats: c,
                    predicted: e.predicted_cos2,
                });
            }
        }
        for l in &self.losses {
            rows.push(SummaryRow {
                metric: "loss",
                target: l.loss.to_string(),
                stats: l.empirical,
                predicted: l.predicted,
            });
        }
        rows.push(SummaryRow {
            metric: "oracle_loss",
            target: LossId::np('F', 1).to_string(),
            stats: self.oracle_frobenius,
            predicted: self.predicted_optimal_frobenius,
        });
        rows.push(SummaryRow {
            metric: "oracle_loss",
            target: LossId::STEIN.to_string(),
            stats: self.oracle_stein,
            predicted: self.predicted_optimal_stein,
        });
        rows
    }
}

/// Predicted asymptotic loss, when every spike is supercritical.
fn predict(config: &SimConfig, gamma: AspectRatio, loss: LossId, optimal: bool) -> Result<Option<f64>> {
    if config.spikes.iter().any(|&l| l <= phase_transition(gamma)) {
        return Ok(None);
    }
    let model = SpikedModel::new(gamma, config.spikes.clone())?;
    let shrinker = if optimal { Box::new(Optimal::new(gamma, loss)) } else { config.shrinker_for(loss)? };
    asymptotic_loss(&model, loss, shrinker.as_ref()).map(Some)
}

/// Runs every replicate (in parallel) and aggregates in replicate order.
/// A replicate that fails is counted and skipped; the study fails only if
/// none succeed.
pub fn run_study(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let gamma = config.gamma()?;
    let results: Vec<Result<SimReplicate>> =
        (0..config.replications as u64).into_par_iter().map(|i| run_replicate(config, i)).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut first_error = None;
    for r in results {
        match r {
            Ok(rep) => ok.push(rep),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(first_error.expect("at least one replicate ran"));
    }
    let failed = config.replications - ok.len();
    let r = config.rank();

    let mut eigen = Vec::new();
    for i in 0..r.max(1) {
        let vals: Vec<f64> = ok.iter().map(|x| x.top_eigenvalues[i]).collect();
        let ell = config.spikes.get(i).copied();
        let supercritical = ell.filter(|&l| l > phase_transition(gamma));
        let predicted_eigenvalue = match supercritical {
            Some(l) => lambda_of_ell(l, gamma)?,
            None => bulk_edge_upper(gamma),
        };
        let cos2 = (i < r).then(|| MeanSe::of(&ok.iter().map(|x| x.cosines[(i, i)].powi(2)).collect::<Vec<_>>()));
        let predicted_cos2 = match (i < r, supercritical) {
            (true, Some(l)) => Some(cos2_of_ell(l, gamma)?),
            (true, None) => Some(0.0),
            _ => None,
        };
        eigen.push(SpikeSummary {
            index: i + 1,
            ell,
            eigenvalue: MeanSe::of(&vals),
            predicted_eigenvalue,
            cos2,
            predicted_cos2,
        });
    }

    let mut losses = Vec::with_capacity(config.losses.len());
    for (k, &loss) in config.losses.iter().enumerate() {
        let vals: Vec<f64> = ok.iter().map(|x| x.losses[k].1).collect();
        losses.push(LossSummary {
            loss,
            empirical: MeanSe::of(&vals),
            predicted: predict(config, gamma, loss, false)?,
        });
    }

    let f1 = LossId::np('F', 1);
    Ok(SimSummary {
        n: config.n,
        p: config.p,
        gamma: gamma.value(),
        spikes: config.spikes.clone(),
        seed: config.seed,
        succeeded: ok.len(),
        failed,
        first_error,
        eigen,
        losses,
        oracle_frobenius: MeanSe::of(&ok.iter().map(|x| x.oracle_frobenius).collect::<Vec<_>>()),
        oracle_stein: MeanSe::of(&ok.iter().map(|x| x.oracle_stein).collect::<Vec<_>>()),
        predicted_optimal_frobenius: predict(config, gamma, f1, true)?,
        predicted_optimal_stein: predict(config, gamma, LossId::STEIN, true)?,
    })
}
