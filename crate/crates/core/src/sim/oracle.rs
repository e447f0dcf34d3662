//! Oracle equivariant estimators `V D V'`, with `D` chosen knowing `Σ`.
//!
//! For a diagonal `Σ` both optima have explicit diagonals:
//!
//! * Frobenius: `dⱼ = vⱼ' Σ vⱼ`, leaving loss `Σₖ(σₖ−1)² − Σⱼ aⱼ²` with
//!   `aⱼ = Σₖ (σₖ − 1) V²ₖⱼ`.
//! * Stein: `dⱼ = 1 / (vⱼ' Σ⁻¹ vⱼ)`, leaving loss
//!   `½ [Σⱼ log(1 − bⱼ) + Σₖ log σₖ]` with `bⱼ = Σₖ (1 − 1/σₖ) V²ₖⱼ`.

use super::SampleEigen;
use crate::error::{domain, numeric, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleKind {
    Frobenius,
    Stein,
}

/// Loss of the best estimator sharing the sample eigenvectors.
/// `sigma` is the diagonal of the population covariance.
pub fn oracle_loss(eig: &SampleEigen, sigma: &[f64], kind: OracleKind) -> Result<f64> {
    let p = eig.dim();
    if sigma.len() != p {
        return domain(format!("sigma has length {}, expected {p}", sigma.len()));
    }
    if sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return domain("population variances must be positive");
    }
    let active: Vec<usize> = (0..p).filter(|&k| sigma[k] != 1.0).collect();
    let v = &eig.vectors;
    match kind {
        OracleKind::Frobenius => {
            let total: f64 = active.iter().map(|&k| (sigma[k] - 1.0).powi(2)).sum();
            let explained: f64 =
                (0..p).map(|j| active.iter().map(|&k| (sigma[k] - 1.0) * v[(k, j)].powi(2)).sum::<f64>().powi(2)).sum();
            Ok((total - explained).max(0.0))
        }
        OracleKind::Stein => {
            let mut acc: f64 = active.iter().map(|&k| sigma[k].ln()).sum();
            for j in 0..p {
                let b: f64 = active.iter().map(|&k| (1.0 - 1.0 / sigma[k]) * v[(k, j)].powi(2)).sum();
                if !(b < 1.0) {
                    return numeric(format!("Stein oracle denominator 1 - {b} is not positive"));
                }
                acc += (-b).ln_1p();
            }
            Ok((0.5 * acc).max(0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{eval_loss, LossId};
    use nalgebra::{DMatrix, DVector};

    fn rotated(p: usize, sigma: &[f64], angle: f64) -> SampleEigen {
        // Eigenvectors: a Givens rotation of the canonical basis in (0, 1).
        let mut v = DMatrix::identity(p, p);
        let (s, c) = angle.sin_cos();
        v[(0, 0)] = c;
        v[(1, 0)] = s;
        v[(0, 1)] = -s;
        v[(1, 1)] = c;
        SampleEigen { values: sigma.to_vec(), vectors: v }
    }

    #[test]
    fn aligned_eigenvectors_recover_sigma() {
        let sigma = [5.0, 3.0, 1.0, 1.0];
        let eig = rotated(4, &sigma, 0.0);
        assert!(oracle_loss(&eig, &sigma, OracleKind::Frobenius).unwrap().abs() < 1e-14);
        assert!(oracle_loss(&eig, &sigma, OracleKind::Stein).unwrap().abs() < 1e-14);
    }

    #[test]
    fn matches_brute_force_diagonal() {
        let sigma = [5.0, 3.0, 1.0, 1.0];
        let eig = rotated(4, &sigma, 0.4);
        let sig = DMatrix::from_diagonal(&DVector::from_column_slice(&sigma));
        let v = &eig.vectors;
        let m = v.transpose() * &sig * v;
        let minv = v.transpose() * sig.clone().try_inverse().unwrap() * v;
        let d_f = DVector::from_fn(4, |j, _| m[(j, j)]);
        let d_s = DVector::from_fn(4, |j, _| 1.0 / minv[(j, j)]);
        let est_f = v * DMatrix::from_diagonal(&d_f) * v.transpose();
        let est_s = v * DMatrix::from_diagonal(&d_s) * v.transpose();
        let want_f = eval_loss(LossId::np('F', 1), &sig, &est_f).unwrap();
        let want_s = eval_loss(LossId::STEIN, &sig, &est_s).unwrap();
        assert!((oracle_loss(&eig, &sigma, OracleKind::Frobenius).unwrap() - want_f).abs() < 1e-12);
        assert!((oracle_loss(&eig, &sigma, OracleKind::Stein).unwrap() - want_s).abs() < 1e-12);
    }
}
