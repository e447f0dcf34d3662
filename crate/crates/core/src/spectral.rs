//! Deterministic maps of the spiked covariance model.
//!
//! With aspect ratio `γ = p/n ∈ (0, 1]`, white-noise sample eigenvalues fill
//! the Marčenko–Pastur bulk `[(1-√γ)², (1+√γ)²]`. A population spike `ℓ`
//! above the transition `1 + √γ` produces a sample eigenvalue
//!
//! ```text
//! λ(ℓ) = ℓ (1 + γ / (ℓ - 1))
//! ```
//!
//! whose eigenvector makes squared cosine
//!
//! ```text
//! c²(ℓ) = (1 - γ/(ℓ-1)²) / (1 + γ/(ℓ-1))
//! ```
//!
//! with the population eigenvector. All maps here are pure scalar functions.

use crate::error::{domain, Result};

/// Dimension-to-sample ratio `γ = p/n`, validated to lie in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AspectRatio(f64);

impl AspectRatio {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 && gamma <= 1.0 {
            Ok(Self(gamma))
        } else {
            domain(format!("aspect ratio must lie in (0, 1], got {gamma}"))
        }
    }

    /// `γ = p / n`.
    pub fn from_dims(p: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("sample count must be positive");
        }
        Self::new(p as f64 / n as f64)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn sqrt(self) -> f64 {
        self.0.sqrt()
    }
}

/// Whether the bulk edge / phase transition itself is accepted as an argument.
///
/// At the boundary the maps are defined by continuity (`λ(ℓ₊) = λ₊`,
/// `c²(ℓ₊) = 0`). Operations reject it by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Edge {
    #[default]
    Exclusive,
    Inclusive,
}

impl Edge {
    fn admits(self, x: f64, boundary: f64) -> bool {
        match self {
            Edge::Exclusive => x > boundary,
            Edge::Inclusive => x >= boundary,
        }
    }
}

/// Marčenko–Pastur bulk edges `((1-√γ)², (1+√γ)²)`.
pub fn bulk_edges(gamma: AspectRatio) -> (f64, f64) {
    let r = gamma.sqrt();
    ((1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r))
}

/// Upper bulk edge `λ₊(γ) = (1+√γ)²`.
pub fn bulk_edge_upper(gamma: AspectRatio) -> f64 {
    bulk_edges(gamma).1
}

/// BBP phase transition `ℓ₊(γ) = 1 + √γ`.
pub fn phase_transition(gamma: AspectRatio) -> f64 {
    1.0 + gamma.sqrt()
}

/// Sample eigenvalue limit `λ(ℓ)` of a supercritical spike.
pub fn lambda_of_ell(ell: f64, gamma: AspectRatio) -> Result<f64> {
    lambda_of_ell_with(ell, gamma, Edge::Exclusive)
}

pub fn lambda_of_ell_with(ell: f64, gamma: AspectRatio, edge: Edge) -> Result<f64> {
    check_spike(ell, gamma, edge)?;
    Ok(ell * (1.0 + gamma.value() / (ell - 1.0)))
}

/// Inverse of [`lambda_of_ell`]:
/// `ℓ(λ) = ((λ+1-γ) + √((λ+1-γ)² - 4λ)) / 2`.
pub fn ell_of_lambda(lambda: f64, gamma: AspectRatio) -> Result<f64> {
    ell_of_lambda_with(lambda, gamma, Edge::Exclusive)
}

pub fn ell_of_lambda_with(lambda: f64, gamma: AspectRatio, edge: Edge) -> Result<f64> {
    let edge_value = bulk_edge_upper(gamma);
    if !lambda.is_finite() || !edge.admits(lambda, edge_value) {
        return domain(format!("eigenvalue {lambda} is not above the bulk edge {edge_value} (γ = {})", gamma.value()));
    }
    let g = gamma.value();
    let b = lambda + 1.0 - g;
    // (λ+1-γ)² - 4λ factored as (√λ-1-√γ)(√λ-1+√γ)(b+2√λ) to keep the
    // discriminant accurate next to the edge.
    let root = lambda.sqrt();
    let disc = ((root - 1.0 - gamma.sqrt()) * (root - 1.0 + gamma.sqrt())).max(0.0) * (b + 2.0 * root);
    Ok((b + disc.sqrt()) / 2.0)
}

/// Squared cosine `c²(ℓ)` between the sample and population spike eigenvectors.
pub fn cos2_of_ell(ell: f64, gamma: AspectRatio) -> Result<f64> {
    cos2_of_ell_with(ell, gamma, Edge::Exclusive)
}

pub fn cos2_of_ell_with(ell: f64, gamma: AspectRatio, edge: Edge) -> Result<f64> {
    check_spike(ell, gamma, edge)?;
    let m = ell - 1.0;
    let g = gamma.value();
    Ok((m * m - g) / (m * (m + g)))
}

/// `s²(ℓ) = 1 - c²(ℓ)`, evaluated as `γℓ / ((ℓ-1)(ℓ-1+γ))` to avoid
/// cancellation for large spikes.
pub fn sin2_of_ell(ell: f64, gamma: AspectRatio) -> Result<f64> {
    sin2_of_ell_with(ell, gamma, Edge::Exclusive)
}

pub fn sin2_of_ell_with(ell: f64, gamma: AspectRatio, edge: Edge) -> Result<f64> {
    check_spike(ell, gamma, edge)?;
    let m = ell - 1.0;
    let g = gamma.value();
    Ok(g * ell / (m * (m + g)))
}

fn check_spike(ell: f64, gamma: AspectRatio, edge: Edge) -> Result<()> {
    let transition = phase_transition(gamma);
    if ell.is_finite() && edge.admits(ell, transition) {
        Ok(())
    } else {
        domain(format!("spike {ell} is not above the phase transition {transition} (γ = {})", gamma.value()))
    }
}

/// Everything the 2×2 reduction needs about one supercritical spike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeGeometry {
    pub ell: f64,
    pub lambda: f64,
    pub c2: f64,
    pub s2: f64,
}

impl SpikeGeometry {
    pub fn from_ell(ell: f64, gamma: AspectRatio) -> Result<Self> {
        Ok(Self { ell, lambda: lambda_of_ell(ell, gamma)?, c2: cos2_of_ell(ell, gamma)?, s2: sin2_of_ell(ell, gamma)? })
    }

    pub fn from_lambda(lambda: f64, gamma: AspectRatio) -> Result<Self> {
        let ell = ell_of_lambda(lambda, gamma)?;
        Ok(Self { ell, lambda, c2: cos2_of_ell(ell, gamma)?, s2: sin2_of_ell(ell, gamma)? })
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c2.sqrt()
    }

    #[inline]
    pub fn s(&self) -> f64 {
        self.s2.sqrt()
    }
}
