//! Losses of shrinkage estimators on the subspace where they act, and the
//! block-diagonalization residual.

use nalgebra::{DMatrix, DVector};

use super::{column, LossEvaluation, SampleEigen};
use crate::error::{domain, Result};
use crate::loss::{eval_loss, LossId};
use crate::shrinker::Shrinker;

/// Twice-applied modified Gram–Schmidt of `w` against `basis`.
fn project_out(basis: &[DVector<f64>], mut w: DVector<f64>) -> DVector<f64> {
    for _ in 0..2 {
        for b in basis {
            let d = b.dot(&w);
            w.axpy(-d, b, 1.0);
        }
    }
    w
}

/// Orthonormal basis of the span of `cols`, dropping numerically dependent
/// columns.
fn orthonormal_span(cols: impl IntoIterator<Item = DVector<f64>>) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for c in cols {
        let scale = c.norm();
        let w = project_out(&basis, c);
        let nw = w.norm();
        if nw > 1e-10 * scale {
            basis.push(w / nw);
        }
    }
    basis
}

fn unit(p: usize, k: usize) -> DVector<f64> {
    let mut e = DVector::zeros(p);
    e[k] = 1.0;
    e
}

/// `L(Σ, V diag(η) V')` for diagonal `Σ`.
pub fn estimator_loss(
    loss: LossId,
    sigma: &[f64],
    eig: &SampleEigen,
    etas: &[f64],
    how: LossEvaluation,
) -> Result<f64> {
    match how {
        LossEvaluation::Reduced => reduced_loss(loss, sigma, eig, etas),
        LossEvaluation::Full => {
            let s = DMatrix::from_diagonal(&DVector::from_column_slice(sigma));
            eval_loss(loss, &s, &eig.estimator(etas))
        }
    }
}

/// The loss restricted to `span{eₖ : σₖ ≠ 1} + span{vᵢ : ηᵢ ≠ 1}`.
///
/// Off that span both `Σ` and `Σ̂` act as the identity, and every loss is
/// decomposable with `L(I, I) = 0`, so nothing is lost.
pub fn reduced_loss(loss: LossId, sigma: &[f64], eig: &SampleEigen, etas: &[f64]) -> Result<f64> {
    let p = eig.dim();
    if sigma.len() != p || etas.len() != p {
        return domain("sigma, eigenvalues and etas must have equal length");
    }
    let spikes: Vec<usize> = (0..p).filter(|&k| sigma[k] != 1.0).collect();
    let moved: Vec<usize> = (0..p).filter(|&i| etas[i] != 1.0).collect();
    let cols = spikes.iter().map(|&k| unit(p, k)).chain(moved.iter().map(|&i| column(&eig.vectors, i)));
    let q = orthonormal_span(cols);
    let k = q.len();
    if k == 0 {
        return Ok(0.0);
    }
    let q = DMatrix::from_columns(&q);
    let mut a = DMatrix::identity(k, k);
    for &s in &spikes {
        let row = q.row(s).transpose();
        a.ger(sigma[s] - 1.0, &row, &row, 1.0);
    }
    let mut b = DMatrix::identity(k, k);
    for &i in &moved {
        let x = q.tr_mul(&eig.vectors.column(i));
        b.ger(etas[i] - 1.0, &x, &x, 1.0);
    }
    eval_loss(loss, &a, &b)
}

/// The first `2r` columns of the interleaved basis `(u₁, w₁, u₂, w₂, …)`,
/// where `uᵢ = eᵢ` and `wᵢ` is the Gram–Schmidt residual of `vᵢ` after
/// `u₁…u_r, v₁…vᵢ₋₁`. Each `vᵢ` is sign-flipped so that `⟨uᵢ, vᵢ⟩ ≥ 0`.
///
/// A `vᵢ` lying entirely in the span so far (exact alignment) gets an
/// arbitrary orthogonal completion vector; its block then has `s = 0` and
/// the choice does not affect the residual.
pub fn interleaved_basis(eig: &SampleEigen, r: usize) -> Result<DMatrix<f64>> {
    let p = eig.dim();
    if r == 0 || 2 * r > p {
        return domain(format!("need 1 <= r <= p/2, got r = {r}, p = {p}"));
    }
    let mut basis: Vec<DVector<f64>> = (0..r).map(|k| unit(p, k)).collect();
    let mut ws = Vec::with_capacity(r);
    for i in 0..r {
        let mut v = column(&eig.vectors, i);
        if v[i] < 0.0 {
            v.neg_mut();
        }
        let w = project_out(&basis, v);
        let nw = w.norm();
        let w = if nw > 1e-12 {
            w / nw
        } else {
            (0..p)
                .map(|k| project_out(&basis, unit(p, k)))
                .find(|c| c.norm() > 0.5)
                .map(|c| c.normalize())
                .expect("an orthogonal completion exists while 2r <= p")
        };
        basis.push(w.clone());
        ws.push(w);
    }
    let mut cols = Vec::with_capacity(2 * r);
    for (i, w) in ws.into_iter().enumerate() {
        cols.push(unit(p, i));
        cols.push(w);
    }
    Ok(DMatrix::from_columns(&cols))
}

/// `‖W' Σ̂ W − (⊕ B(ηᵢ, ĉᵢ, ŝᵢ)) ⊕ I‖_F` with empirical cosines
/// `ĉᵢ = |⟨eᵢ, vᵢ⟩|`.
pub fn block_diag_check(eig: &SampleEigen, r: usize, eta: &dyn Shrinker) -> Result<f64> {
    let w = interleaved_basis(eig, r)?;
    let etas = eig.shrunk(eta)?;
    let m = 2 * r;
    // W'(Σ̂ − I)W on the leading 2r coordinates, plus the total mass of
    // Σ̂ − I so that the part outside the leading block is accounted for.
    let mut lead = DMatrix::zeros(m, m);
    let mut total = 0.0;
    for (j, &e) in etas.iter().enumerate() {
        if e != 1.0 {
            let x = w.tr_mul(&eig.vectors.column(j));
            lead.ger(e - 1.0, &x, &x, 1.0);
            total += (e - 1.0).powi(2);
        }
    }
    let mut target = DMatrix::zeros(m, m);
    for i in 0..r {
        let c = eig.vectors[(i, i)].abs().min(1.0);
        let s = (1.0 - c * c).max(0.0).sqrt();
        let d = etas[i] - 1.0;
        target[(2 * i, 2 * i)] = d * c * c;
        target[(2 * i, 2 * i + 1)] = d * c * s;
        target[(2 * i + 1, 2 * i)] = d * c * s;
        target[(2 * i + 1, 2 * i + 1)] = d * s * s;
    }
    let inside = (&lead - &target).norm_squared();
    let outside = (total - lead.norm_squared()).max(0.0);
    Ok((inside + outside).sqrt())
}
