//! Cross-checks every closed-form shrinker against the numeric optimizer,
//! plus a handful of structural identities.

use rayon::prelude::*;

use super::{closed_form, closed_form_losses, minimize_block_loss};
use crate::error::Result;
use crate::loss::LossId;
use crate::spectral::{bulk_edge_upper, AspectRatio, SpikeGeometry};

#[derive(Debug, Clone)]
pub struct SelfCheckOptions {
    pub gammas: Vec<f64>,
    /// Log-spaced eigenvalues per γ in `(λ₊ + 0.01, 100]`.
    pub points: usize,
    /// Agreement tolerance, relative to `max(1, η)`.
    pub tol: f64,
    /// Test hook: scales this loss's closed form by `1 + 10⁻³`.
    pub inject_fault: Option<LossId>,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        Self { gammas: vec![0.1, 0.25, 0.5, 1.0], points: 50, tol: 1e-6, inject_fault: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckCase {
    pub check: &'static str,
    pub loss: LossId,
    pub gamma: f64,
    pub lambda: f64,
    pub expected: f64,
    pub actual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SelfCheckReport {
    pub cases: Vec<SelfCheckCase>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SelfCheckCase> {
        self.cases.iter().filter(|c| !c.passed)
    }
}

/// `points` eigenvalues log-spaced over `(λ₊ + 0.01, 100]`, excluding the
/// left end.
pub fn agreement_grid(gamma: AspectRatio, points: usize) -> Vec<f64> {
    let (a, b) = ((bulk_edge_upper(gamma) + 0.01).ln(), 100f64.ln());
    (1..=points).map(|i| (a + (b - a) * i as f64 / points as f64).exp()).collect()
}

fn within(expected: f64, actual: f64, tol: f64) -> bool {
    (expected - actual).abs() <= tol * expected.abs().max(1.0)
}

pub fn selfcheck(opts: &SelfCheckOptions) -> Result<SelfCheckReport> {
    let gammas = opts.gammas.iter().map(|&g| AspectRatio::new(g)).collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for &g in &gammas {
        for loss in closed_form_losses() {
            for lambda in agreement_grid(g, opts.points) {
                jobs.push((g, loss, lambda));
            }
        }
    }
    let mut cases = jobs
        .par_iter()
        .map(|&(g, loss, lambda)| {
            let geom = SpikeGeometry::from_lambda(lambda, g)?;
            let mut closed = closed_form(loss, &geom).expect("closed-form loss");
            if opts.inject_fault == Some(loss) {
                closed *= 1.0 + 1e-3;
            }
            let (numeric, _) = minimize_block_loss(&geom, loss)?;
            Ok(SelfCheckCase {
                check: "closed-vs-numeric",
                loss,
                gamma: g.value(),
                lambda,
                expected: numeric,
                actual: closed,
                passed: within(numeric, closed, opts.tol),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Structural identities on the same grid.
    let pairs = [("F,1", "ent"), ("F,2", "st")];
    for &g in &gammas {
        let bulk = bulk_edge_upper(g);
        for loss in LossId::all() {
            for lambda in [0.0, 0.5 * bulk, bulk] {
                let eta = super::shrink(lambda, g, loss, super::ShrinkerMethod::Auto)?.eta;
                cases.push(SelfCheckCase {
                    check: "bulk-collapse",
                    loss,
                    gamma: g.value(),
                    lambda,
                    expected: 1.0,
                    actual: eta,
                    passed: eta == 1.0,
                });
            }
        }
        for lambda in agreement_grid(g, opts.points) {
            let geom = SpikeGeometry::from_lambda(lambda, g)?;
            let o1 = LossId::np('O', 1);
            let eta = closed_form(o1, &geom).expect("closed form");
            cases.push(SelfCheckCase {
                check: "operator-debiasing",
                loss: o1,
                gamma: g.value(),
                lambda,
                expected: geom.ell,
                actual: eta,
                passed: (eta - geom.ell).abs() <= 1e-8,
            });
            for (a, b) in pairs {
                let (a, b): (LossId, LossId) = (a.parse()?, b.parse()?);
                let ea = closed_form(a, &geom).expect("closed form");
                let eb = closed_form(b, &geom).expect("closed form");
                cases.push(SelfCheckCase {
                    check: "shared-formula",
                    loss: b,
                    gamma: g.value(),
                    lambda,
                    expected: ea,
                    actual: eb,
                    passed: (ea - eb).abs() <= 1e-9,
                });
            }
        }
    }
    Ok(SelfCheckReport { cases })
}
