//! Monte Carlo validation of the asymptotic predictions.
//!
//! Data are `n` i.i.d. draws from `N(0, Σ)` with `Σ = diag(ℓ₁, …, ℓ_r, 1, …, 1)`.
//! Each replicate owns a ChaCha stream keyed by `(seed, replicate index)`, so
//! replicates can run in any order on any number of threads and still
//! produce bit-identical summaries.

mod oracle;
mod reduce;
mod study;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, numeric, Error, Result};
use crate::loss::LossId;
use crate::shrinker::{shrink, HardThreshold, Optimal, Shrinker, ShrinkerMethod, TableShrinker};
use crate::spectral::AspectRatio;

pub use oracle::{oracle_loss, OracleKind};
pub use reduce::{block_diag_check, estimator_loss, interleaved_basis, reduced_loss};
pub use study::{run_replicate, run_study, LossSummary, MeanSe, SimReplicate, SimSummary, SpikeSummary, SummaryRow};

/// Dimension above which a study is refused unless `allow_large` is set.
pub const MAX_DIM: usize = 8000;
/// Ceiling on `n · p` (the data matrix) unless `allow_large` is set.
pub const MAX_ENTRIES: usize = 160_000_000;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ShrinkerChoice {
    /// `η*` for each loss in turn.
    #[default]
    Optimal,
    HardThreshold,
    /// Knots `(λ, η)`, linearly interpolated.
    Table(Vec<(f64, f64)>),
}

/// How a replicate's loss `L(Σ, Σ̂)` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossEvaluation {
    /// On the span of the population spike directions and the shrunken
    /// sample eigenvectors. Both matrices are the identity off that span, so
    /// this equals the full p×p loss for every decomposable loss.
    #[default]
    Reduced,
    /// Literal p×p evaluation.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub spikes: Vec<f64>,
    pub seed: u64,
    pub replications: usize,
    pub losses: Vec<LossId>,
    pub shrinker: ShrinkerChoice,
    pub evaluation: LossEvaluation,
    pub allow_large: bool,
}

impl SimConfig {
    pub fn new(n: usize, p: usize, spikes: Vec<f64>) -> Self {
        Self {
            n,
            p,
            spikes,
            seed: 0,
            replications: 20,
            losses: vec![LossId::np('F', 1)],
            shrinker: ShrinkerChoice::Optimal,
            evaluation: LossEvaluation::Reduced,
            allow_large: false,
        }
    }

    pub fn gamma(&self) -> Result<AspectRatio> {
        AspectRatio::from_dims(self.p, self.n)
    }

    pub fn rank(&self) -> usize {
        self.spikes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return domain("n and p must be positive");
        }
        if self.p > self.n {
            return domain(format!("p = {} exceeds n = {}; only p <= n is supported", self.p, self.n));
        }
        if self.replications == 0 {
            return domain("at least one replication is required");
        }
        if 2 * self.rank() > self.p {
            return domain(format!("{} spikes need p >= {}", self.rank(), 2 * self.rank()));
        }
        if self.spikes.iter().any(|&l| !(l > 1.0) || !l.is_finite()) {
            return domain(format!("spikes must be finite and > 1, got {:?}", self.spikes));
        }
        if self.spikes.windows(2).any(|w| !(w[0] > w[1])) {
            return domain(format!("spikes must be distinct and decreasing, got {:?}", self.spikes));
        }
        if !self.allow_large {
            if self.p > MAX_DIM {
                return Err(Error::Capacity(format!("p = {} exceeds {MAX_DIM}; set allow_large to override", self.p)));
            }
            if self.n.saturating_mul(self.p) > MAX_ENTRIES {
                return Err(Error::Capacity(format!(
                    "n*p = {} exceeds {MAX_ENTRIES}; set allow_large to override",
                    self.n.saturating_mul(self.p)
                )));
            }
        }
        if let ShrinkerChoice::Table(knots) = &self.shrinker {
            TableShrinker::new(self.gamma()?, knots.clone())?;
        }
        self.gamma().map(|_| ())
    }

    /// Diagonal of the population covariance.
    pub fn sigma_diag(&self) -> Vec<f64> {
        let mut d = vec![1.0; self.p];
        d[..self.rank()].copy_from_slice(&self.spikes);
        d
    }

    /// The shrinker used for `loss` under this configuration.
    pub fn shrinker_for(&self, loss: LossId) -> Result<Box<dyn Shrinker>> {
        let gamma = self.gamma()?;
        Ok(match &self.shrinker {
            ShrinkerChoice::Optimal => Box::new(Optimal::new(gamma, loss)),
            ShrinkerChoice::HardThreshold => Box::new(HardThreshold { gamma }),
            ShrinkerChoice::Table(k) => Box::new(TableShrinker::new(gamma, k.clone())?),
        })
    }
}

/// The RNG stream of one replicate.
pub fn replicate_rng(seed: u64, replicate_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate_index);
    rng
}

/// The `p × n` data matrix of one replicate, columns i.i.d. `N(0, Σ)`.
pub fn sample_data(config: &SimConfig, replicate_index: u64) -> Result<DMatrix<f64>> {
    config.validate()?;
    let (p, n) = (config.p, config.n);
    let scale: Vec<f64> = config.sigma_diag().iter().map(|s| s.sqrt()).collect();
    let mut rng = replicate_rng(config.seed, replicate_index);
    let mut data = Vec::with_capacity(p * n);
    for _ in 0..n {
        for s in &scale {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(s * z);
        }
    }
    Ok(DMatrix::from_vec(p, n, data))
}

/// `S = X X' / n` for the replicate's data.
pub fn sample_covariance(config: &SimConfig, replicate_index: u64) -> Result<DMatrix<f64>> {
    let x = sample_data(config, replicate_index)?;
    let s = &x * x.transpose() / config.n as f64;
    Ok((&s + s.transpose()) * 0.5)
}

/// Eigen-decomposition of a sample covariance, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SampleEigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl SampleEigen {
    pub fn new(s: &DMatrix<f64>) -> Result<Self> {
        let p = s.nrows();
        if p == 0 || s.ncols() != p {
            return domain("sample covariance must be square and non-empty");
        }
        if s.iter().any(|x| !x.is_finite()) {
            return domain("sample covariance has non-finite entries");
        }
        let e = s
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 100 * p.max(10))
            .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| e.eigenvalues[i].max(0.0)).collect();
        let vectors = e.eigenvectors.select_columns(&order);
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Shrunken eigenvalues `η(λᵢ)`, all `≥ 1`.
    pub fn shrunk(&self, eta: &dyn Shrinker) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|&l| {
                let e = eta.eta(l)?;
                if !(e >= 1.0) || !e.is_finite() {
                    return numeric(format!("shrinker {} returned {e} at {l}", eta.name()));
                }
                Ok(e)
            })
            .collect()
    }

    /// `V diag(η) V'`, built as `I + Σ (ηᵢ − 1) vᵢ vᵢ'` over `ηᵢ ≠ 1`.
    pub fn estimator(&self, etas: &[f64]) -> DMatrix<f64> {
        let p = self.dim();
        let mut out = DMatrix::identity(p, p);
        for (i, &e) in etas.iter().enumerate() {
            if e != 1.0 {
                let v = self.vectors.column(i);
                out.ger(e - 1.0, &v, &v, 1.0);
            }
        }
        out
    }
}

/// Top `r` eigenvalues and the `r × r` matrix of `|⟨eⱼ, vᵢ⟩|` (row `i`:
/// sample eigenvector, column `j`: population eigenvector).
pub fn empirical_spike_stats(s: &DMatrix<f64>, r: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SampleEigen::new(s)?;
    spike_stats(&eig, r)
}

pub(crate) fn spike_stats(eig: &SampleEigen, r: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if r == 0 || r > eig.dim() {
        return domain(format!("need 1 <= r <= {}, got {r}", eig.dim()));
    }
    let top = eig.values[..r].to_vec();
    let cos = DMatrix::from_fn(r, r, |i, j| eig.vectors[(j, i)].abs());
    Ok((top, cos))
}

/// `V η(Λ) V'` with `η = η*(·; γ, loss)`.
pub fn apply_shrinker(s: &DMatrix<f64>, gamma: AspectRatio, loss: LossId) -> Result<DMatrix<f64>> {
    let eig = SampleEigen::new(s)?;
    let etas = eig
        .values
        .iter()
        .map(|&l| Ok(shrink(l, gamma, loss, ShrinkerMethod::Auto)?.eta))
        .collect::<Result<Vec<_>>>()?;
    Ok(eig.estimator(&etas))
}

pub(crate) fn column(v: &DMatrix<f64>, i: usize) -> DVector<f64> {
    v.column(i).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(100, 50, vec![5.0]).validate().is_ok());
        assert!(SimConfig::new(100, 200, vec![]).validate().is_err());
        assert!(SimConfig::new(100, 50, vec![3.0, 5.0]).validate().is_err());
        assert!(SimConfig::new(100, 3, vec![5.0, 3.0]).validate().is_err());
        let mut big = SimConfig::new(10_000, 9_000, vec![]);
        assert!(matches!(big.validate(), Err(Error::Capacity(_))));
        big.allow_large = true;
        assert!(big.validate().is_ok());
        let mut c = SimConfig::new(100, 50, vec![]);
        c.replications = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_replicate() {
        let c = SimConfig::new(50, 10, vec![4.0]);
        let a = sample_covariance(&c, 3).unwrap();
        assert_eq!(a, sample_covariance(&c, 3).unwrap());
        assert_ne!(a, sample_covariance(&c, 4).unwrap());
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn scalar_case() {
        let c = SimConfig::new(1, 1, vec![]);
        let x = sample_data(&c, 0).unwrap();
        let s = sample_covariance(&c, 0).unwrap();
        assert_relative_eq!(s[(0, 0)], x[(0, 0)].powi(2));
    }

    #[test]
    fn diagonal_spike_stats() {
        let mut s = DMatrix::identity(5, 5);
        s[(0, 0)] = 9.0;
        s[(1, 1)] = 4.0;
        let (top, cos) = empirical_spike_stats(&s, 2).unwrap();
        assert_eq!(top, vec![9.0, 4.0]);
        assert_relative_eq!(cos, DMatrix::identity(2, 2));
    }

    #[test]
    fn shrinker_application() {
        let gamma = AspectRatio::new(1.0).unwrap();
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0, 0.5]));
        assert_relative_eq!(apply_shrinker(&s, gamma, LossId::STEIN).unwrap(), DMatrix::identity(4, 4));
        // Rotated diag(5, 1, 1, 1) under operator loss: eigenvalue 5 → ℓ(5).
        let q = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1);
        let mut o = DMatrix::identity(4, 4);
        o.view_mut((0, 0), (3, 3)).copy_from(q.matrix());
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 1.0, 1.0, 1.0]));
        let est = apply_shrinker(&(&o * &d * o.transpose()), gamma, LossId::np('O', 1)).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![(5.0 + 5f64.sqrt()) / 2.0, 1.0, 1.0, 1.0]));
        assert_relative_eq!(est, &o * want * o.transpose(), epsilon = 1e-10);
    }
}
