//! Exact 2×2 arithmetic: the blocks `A(ℓ) = diag(ℓ, 1)` and `B(η, c, s)`
//! on which every asymptotic loss is evaluated.

use super::{LossId, Norm, Pivot, Statistic};
use crate::error::{domain, numeric, Error, Result};

/// A general (possibly non-symmetric) 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }

    pub fn frob_sq(&self) -> f64 {
        self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22
    }

    /// `(Q, R)` with singular values `σ₁ = Q + R`, `σ₂ = |Q − R|`. Stays
    /// accurate when the two singular values coincide, where the
    /// `‖M‖²_F ± 2|det M|` route loses half its digits.
    fn singular_parts(&self) -> (f64, f64) {
        let e = 0.5 * (self.m11 + self.m22);
        let f = 0.5 * (self.m11 - self.m22);
        let g = 0.5 * (self.m21 + self.m12);
        let h = 0.5 * (self.m21 - self.m12);
        (e.hypot(h), f.hypot(g))
    }

    /// Sum of singular values.
    pub fn nuclear(&self) -> f64 {
        let (q, r) = self.singular_parts();
        2.0 * q.max(r)
    }

    /// Largest singular value.
    pub fn spectral(&self) -> f64 {
        let (q, r) = self.singular_parts();
        q + r
    }

    pub fn is_symmetric(&self) -> bool {
        self.m12 == self.m21
    }
}

impl From<SymMat2> for Mat2 {
    fn from(s: SymMat2) -> Self {
        Mat2::new(s.a11, s.a12, s.a12, s.a22)
    }
}

/// A symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMat2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn frob_sq(&self) -> f64 {
        self.a11 * self.a11 + 2.0 * self.a12 * self.a12 + self.a22 * self.a22
    }

    pub fn add(&self, o: &SymMat2) -> SymMat2 {
        SymMat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }

    pub fn sub(&self, o: &SymMat2) -> SymMat2 {
        SymMat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a22 - o.a22)
    }

    pub fn scale(&self, k: f64) -> SymMat2 {
        SymMat2::new(k * self.a11, k * self.a12, k * self.a22)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a11 > 0.0 && self.a22 > 0.0 && self.det() > 0.0
    }

    /// Eigen-decomposition as `(μ₁, μ₂, cos θ, sin θ)` where `(cos θ, sin θ)`
    /// is the eigenvector of `μ₁`. `μ₁ ≥ μ₂` is not guaranteed for the
    /// diagonal shortcut.
    fn eigh(&self) -> (f64, f64, f64, f64) {
        if self.a12 == 0.0 {
            return (self.a11, self.a22, 1.0, 0.0);
        }
        let theta = 0.5 * (2.0 * self.a12).atan2(self.a11 - self.a22);
        let (sn, cs) = theta.sin_cos();
        let mean = 0.5 * (self.a11 + self.a22);
        let r = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        let hi = mean + r;
        // The smaller eigenvalue loses all its digits to cancellation when
        // the matrix is badly conditioned; recover it from the determinant.
        let det = self.det();
        let lo = if hi > 0.0 && det > 0.0 { det / hi } else { mean - r };
        (hi, lo, cs, sn)
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (a, b, _, _) = self.eigh();
        if a >= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// `f(M)` through the spectral decomposition.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> SymMat2 {
        let (m1, m2, cs, sn) = self.eigh();
        let (f1, f2) = (f(m1), f(m2));
        SymMat2::new(f1 * cs * cs + f2 * sn * sn, (f1 - f2) * cs * sn, f1 * sn * sn + f2 * cs * cs)
    }

    pub fn inverse(&self) -> SymMat2 {
        let d = self.det();
        SymMat2::new(self.a22 / d, -self.a12 / d, self.a11 / d)
    }

    /// Principal square root, `(M + √det I) / √(tr M + 2√det)`.
    pub fn sqrt(&self) -> SymMat2 {
        if self.a12 == 0.0 {
            return SymMat2::diag(self.a11.sqrt(), self.a22.sqrt());
        }
        let rd = self.det().sqrt();
        let k = 1.0 / (self.trace() + 2.0 * rd).sqrt();
        SymMat2::new((self.a11 + rd) * k, self.a12 * k, (self.a22 + rd) * k)
    }

    pub fn inv_sqrt(&self) -> SymMat2 {
        self.apply(|x| 1.0 / x.sqrt())
    }

    pub fn log(&self) -> SymMat2 {
        self.apply(f64::ln)
    }

    /// `P M P` for symmetric `P`, kept exactly symmetric.
    pub fn congruence(&self, p: &SymMat2) -> SymMat2 {
        let pm = Mat2::from(*p).mul(&Mat2::from(*self));
        let r = pm.mul(&Mat2::from(*p));
        SymMat2::new(r.m11, 0.5 * (r.m12 + r.m21), r.m22)
    }
}

/// Population block `A(ℓ) = diag(ℓ, 1)`.
pub fn mat_a(ell: f64) -> Result<SymMat2> {
    if !(ell >= 1.0) || !ell.is_finite() {
        return domain(format!("spike ell must be a finite value >= 1, got {ell}"));
    }
    Ok(SymMat2::diag(ell, 1.0))
}

/// Estimator block `B(η, c, s) = I + (η − 1) w w'` with `w = (c, s)`.
///
/// Trace is `η + 1` and determinant is `η`.
pub fn mat_b(eta: f64, c: f64, s: f64) -> Result<SymMat2> {
    if !(eta >= 1.0) || !eta.is_finite() {
        return domain(format!("eta must be a finite value >= 1, got {eta}"));
    }
    let norm = c * c + s * s;
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(Error::Invariant(format!("c^2 + s^2 = {norm}, expected 1")));
    }
    let e = eta - 1.0;
    Ok(SymMat2::new(1.0 + e * c * c, e * c * s, 1.0 + e * s * s))
}

/// Eigenvalues of a general 2×2 matrix, descending. A slightly negative
/// discriminant (rounding on a real pair) is clamped to zero.
pub fn eigvals2(m: &Mat2) -> Result<(f64, f64)> {
    let tr = m.trace();
    let half_diff = 0.5 * (m.m11 - m.m22);
    // tr² − 4 det written without the cancellation of the naive form.
    let disc = 4.0 * (half_diff * half_diff + m.m12 * m.m21);
    let scale = tr * tr + 4.0 * m.det().abs();
    let disc = if disc >= 0.0 {
        disc
    } else if disc >= -1e-12 * scale.max(1.0) {
        0.0
    } else {
        return numeric(format!("complex eigenvalue pair (discriminant {disc})"));
    };
    let root = disc.sqrt();
    let det = m.det();
    // Larger-magnitude root first, the other from the product.
    let big = 0.5 * (tr + tr.signum() * root);
    if big == 0.0 {
        return Ok((0.5 * root, -0.5 * root));
    }
    let small = det / big;
    Ok(if big >= small { (big, small) } else { (small, big) })
}

fn check_pd(m: &SymMat2, name: &str) -> Result<()> {
    let finite = m.a11.is_finite() && m.a12.is_finite() && m.a22.is_finite();
    if !finite || !m.is_positive_definite() {
        return domain(format!("{name} is not positive definite: {m:?}"));
    }
    Ok(())
}

/// The pivot matrix `Δ(A, B)` for 2×2 positive-definite arguments.
pub fn pivot_eval2(pivot: Pivot, a: &SymMat2, b: &SymMat2) -> Result<Mat2> {
    check_pd(a, "A")?;
    check_pd(b, "B")?;
    let i = Mat2::identity();
    Ok(match pivot {
        Pivot::Difference => a.sub(b).into(),
        Pivot::PrecisionDifference => a.inverse().sub(&b.inverse()).into(),
        Pivot::LeftRatio => Mat2::from(a.inverse()).mul(&(*b).into()).sub(&i),
        Pivot::RightRatio => Mat2::from(b.inverse()).mul(&(*a).into()).sub(&i),
        Pivot::RatioSum => {
            let ab = Mat2::from(a.inverse()).mul(&(*b).into());
            let ba = Mat2::from(b.inverse()).mul(&(*a).into());
            let two = Mat2::new(2.0, 0.0, 0.0, 2.0);
            ab.add(&ba).sub(&two)
        }
        Pivot::Whitened => whitened(a, b).sub(&SymMat2::identity()).into(),
        Pivot::LogWhitened => whitened(a, b).log().into(),
    })
}

/// `A^{-1/2} B A^{-1/2}`.
fn whitened(a: &SymMat2, b: &SymMat2) -> SymMat2 {
    b.congruence(&a.inv_sqrt())
}

fn norm_of(norm: Norm, delta: &Mat2) -> f64 {
    match norm {
        Norm::Frobenius => delta.frob_sq(),
        Norm::Operator => delta.spectral(),
        Norm::Nuclear => delta.nuclear(),
    }
}

/// `½ Σ (μ − 1 − ln μ)` over eigenvalues `μ` of `A^{-1/2} B A^{-1/2}`,
/// i.e. `½(tr(A⁻¹B) − 2 − ln(|B|/|A|))`.
fn stein_from_whitened(mu: (f64, f64)) -> f64 {
    let g = |m: f64| (m - 1.0) - m.ln();
    0.5 * (g(mu.0) + g(mu.1))
}

/// Any of the 26 losses on 2×2 positive-definite arguments.
pub fn eval_loss2(loss: LossId, a: &SymMat2, b: &SymMat2) -> Result<f64> {
    match loss {
        LossId::NormPivot(Norm::Nuclear, Pivot::RatioSum) => {
            // Eigenvalues of the pivot are μ + 1/μ − 2 = (√μ − 1/√μ)² ≥ 0
            // for eigenvalues μ of the whitened matrix.
            check_pd(a, "A")?;
            check_pd(b, "B")?;
            let (m1, m2) = whitened(a, b).eigenvalues();
            let g = |m: f64| (m.sqrt() - 1.0 / m.sqrt()).powi(2);
            Ok(g(m1) + g(m2))
        }
        LossId::NormPivot(norm, pivot) => {
            let delta = pivot_eval2(pivot, a, b)?;
            Ok(norm_of(norm, &delta))
        }
        LossId::Statistical(stat) => {
            check_pd(a, "A")?;
            check_pd(b, "B")?;
            let mu = || whitened(a, b).eigenvalues();
            Ok(match stat {
                Statistic::Stein => stein_from_whitened(mu()),
                Statistic::Entropy => {
                    let (m1, m2) = mu();
                    stein_from_whitened((1.0 / m1, 1.0 / m2))
                }
                Statistic::Divergence => {
                    let (m1, m2) = mu();
                    stein_from_whitened((m1, m2)) + stein_from_whitened((1.0 / m1, 1.0 / m2))
                }
                Statistic::Affinity => {
                    // |(A+B)/2| / √(|A||B|) = Π (1 + μ)/(2√μ).
                    let (m1, m2) = mu();
                    let g = |m: f64| ((1.0 + m) / (2.0 * m.sqrt())).ln();
                    0.5 * (g(m1) + g(m2))
                }
                Statistic::Frechet => {
                    let cross = Mat2::from(a.sqrt()).mul(&Mat2::from(b.sqrt())).trace();
                    a.trace() + b.trace() - 2.0 * cross
                }
            })
        }
    }
}
