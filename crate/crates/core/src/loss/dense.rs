//! General p×p evaluation through symmetric eigendecompositions.

use nalgebra::{DMatrix, DVector};

use super::{LossId, Norm, Pivot, Statistic};
use crate::error::{domain, numeric, Error, Result};

/// Eigenvalues are floored here before `ln`, `sqrt` or inversion.
const EIG_FLOOR: f64 = 1e-30;
/// Negative eigenvalues up to this fraction of the largest are treated as
/// rounding; anything beyond is a non-PD input.
const EIG_SLACK: f64 = 1e-8;

fn symmetric_eigen(m: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    match m.try_symmetric_eigen(f64::EPSILON, 100 * n.max(10)) {
        Some(e) => Ok((e.eigenvalues, e.eigenvectors)),
        None => numeric("symmetric eigensolver did not converge"),
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// A symmetric positive-definite matrix held in spectral form.
///
/// Diagonal inputs skip the eigensolver so that functions of a diagonal
/// population covariance are exact.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    values: DVector<f64>,
    vectors: Option<DMatrix<f64>>,
}

impl SpdMatrix {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return domain(format!("expected a non-empty square matrix, got {}x{}", n, m.ncols()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return domain("matrix has non-finite entries");
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let mut diagonal = true;
        for j in 0..n {
            for i in 0..j {
                let (x, y) = (m[(i, j)], m[(j, i)]);
                if (x - y).abs() > 1e-10 * scale {
                    return domain("matrix is not symmetric");
                }
                diagonal &= x == 0.0 && y == 0.0;
            }
        }
        let (values, vectors) = if diagonal {
            (m.diagonal(), None)
        } else {
            let (v, w) = symmetric_eigen(symmetrize(m))?;
            (v, Some(w))
        };
        let top = values.amax();
        let mut values = values;
        for v in values.iter_mut() {
            if *v <= -EIG_SLACK * top || !(top > 0.0) {
                return domain("matrix is not positive definite");
            }
            *v = v.max(EIG_FLOOR);
        }
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// `f(M) = V diag(f(μ)) V'`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let fv = self.values.map(f);
        match &self.vectors {
            None => DMatrix::from_diagonal(&fv),
            Some(v) => {
                let mut scaled = v.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= fv[j];
                }
                symmetrize(&(scaled * v.transpose()))
            }
        }
    }

    pub fn log_det(&self) -> f64 {
        self.values.iter().map(|v| v.ln()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.values.sum()
    }

    /// `M^{-1/2} X M^{-1/2}` for symmetric `X`.
    pub fn whiten(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.vectors {
            None => {
                let d = self.values.map(|v| 1.0 / v.sqrt());
                let mut out = x.clone();
                for j in 0..out.ncols() {
                    for i in 0..out.nrows() {
                        out[(i, j)] *= d[i] * d[j];
                    }
                }
                out
            }
            Some(_) => {
                let r = self.apply(|v| 1.0 / v.sqrt());
                symmetrize(&(&r * x * &r))
            }
        }
    }
}

struct Pair {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    sa: SpdMatrix,
    sb: SpdMatrix,
}

impl Pair {
    fn new(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Self> {
        if a.shape() != b.shape() {
            return domain(format!("dimension mismatch: {:?} vs {:?}", a.shape(), b.shape()));
        }
        let sa = SpdMatrix::new(a).map_err(|e| relabel(e, "A"))?;
        let sb = SpdMatrix::new(b).map_err(|e| relabel(e, "B"))?;
        Ok(Self { a: symmetrize(a), b: symmetrize(b), sa, sb })
    }

    /// Eigenvalues of `A^{-1/2} B A^{-1/2}`.
    fn whitened_eigenvalues(&self) -> Result<DVector<f64>> {
        let w = self.sa.whiten(&self.b);
        Ok(SpdMatrix::new(&w)?.values)
    }

    fn inv(&self, which: &SpdMatrix) -> DMatrix<f64> {
        which.apply(|v| 1.0 / v)
    }
}

fn relabel(e: Error, name: &str) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{name}: {m}")),
        other => other,
    }
}

fn pivot_matrix(pivot: Pivot, pair: &Pair) -> Result<DMatrix<f64>> {
    let n = pair.a.nrows();
    let i = DMatrix::<f64>::identity(n, n);
    Ok(match pivot {
        Pivot::Difference => &pair.a - &pair.b,
        Pivot::PrecisionDifference => pair.inv(&pair.sa) - pair.inv(&pair.sb),
        Pivot::LeftRatio => pair.inv(&pair.sa) * &pair.b - i,
        Pivot::RightRatio => pair.inv(&pair.sb) * &pair.a - i,
        Pivot::RatioSum => pair.inv(&pair.sa) * &pair.b + pair.inv(&pair.sb) * &pair.a - i * 2.0,
        Pivot::Whitened => pair.sa.whiten(&pair.b) - i,
        Pivot::LogWhitened => SpdMatrix::new(&pair.sa.whiten(&pair.b))?.apply(f64::ln),
    })
}

/// The pivot matrix `Δ(A, B)` for p×p positive-definite arguments.
pub fn pivot_eval(pivot: Pivot, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    pivot_matrix(pivot, &Pair::new(a, b)?)
}

/// Combines per-direction magnitudes `x` into the chosen norm, where `x` are
/// the eigenvalues of a symmetric pivot.
fn norm_of_spectrum(norm: Norm, x: impl Iterator<Item = f64>) -> f64 {
    match norm {
        Norm::Frobenius => x.map(|v| v * v).sum(),
        Norm::Operator => x.fold(0.0, |m, v| m.max(v.abs())),
        Norm::Nuclear => x.map(f64::abs).sum(),
    }
}

/// Any of the 26 losses on p×p positive-definite arguments.
pub fn eval_loss(loss: LossId, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let pair = Pair::new(a, b)?;
    match loss {
        LossId::NormPivot(norm, pivot) => match pivot {
            // Functions of the whitened spectrum.
            Pivot::Whitened => {
                let mu = pair.whitened_eigenvalues()?;
                Ok(norm_of_spectrum(norm, mu.iter().map(|m| m - 1.0)))
            }
            Pivot::LogWhitened => {
                let mu = pair.whitened_eigenvalues()?;
                Ok(norm_of_spectrum(norm, mu.iter().map(|m| m.ln())))
            }
            Pivot::RatioSum if norm == Norm::Nuclear => {
                let mu = pair.whitened_eigenvalues()?;
                Ok(mu.iter().map(|m| (m.sqrt() - 1.0 / m.sqrt()).powi(2)).sum())
            }
            Pivot::Difference | Pivot::PrecisionDifference => {
                let delta = pivot_matrix(pivot, &pair)?;
                if norm == Norm::Frobenius {
                    return Ok(delta.norm_squared());
                }
                let (x, _) = symmetric_eigen(symmetrize(&delta))?;
                Ok(norm_of_spectrum(norm, x.iter().copied()))
            }
            Pivot::LeftRatio | Pivot::RightRatio | Pivot::RatioSum => {
                let delta = pivot_matrix(pivot, &pair)?;
                Ok(match norm {
                    Norm::Frobenius => delta.norm_squared(),
                    Norm::Operator => singular_values(delta)?.max(),
                    Norm::Nuclear => singular_values(delta)?.sum(),
                })
            }
        },
        LossId::Statistical(stat) => Ok(match stat {
            Statistic::Stein => {
                let mu = pair.whitened_eigenvalues()?;
                0.5 * mu.iter().map(|m| m - 1.0 - m.ln()).sum::<f64>()
            }
            Statistic::Entropy => {
                let mu = pair.whitened_eigenvalues()?;
                0.5 * mu.iter().map(|m| 1.0 / m - 1.0 + m.ln()).sum::<f64>()
            }
            Statistic::Divergence => {
                let mu = pair.whitened_eigenvalues()?;
                0.5 * mu.iter().map(|m| m + 1.0 / m - 2.0).sum::<f64>()
            }
            Statistic::Affinity => {
                let mid = SpdMatrix::new(&((&pair.a + &pair.b) * 0.5))?;
                0.5 * (mid.log_det() - 0.5 * pair.sa.log_det() - 0.5 * pair.sb.log_det())
            }
            Statistic::Frechet => {
                let ra = pair.sa.apply(f64::sqrt);
                let rb = pair.sb.apply(f64::sqrt);
                pair.sa.trace() + pair.sb.trace() - 2.0 * ra.component_mul(&rb).sum()
            }
        }),
    }
}

fn singular_values(m: DMatrix<f64>) -> Result<DVector<f64>> {
    match m.try_svd(false, false, f64::EPSILON, 0) {
        Some(svd) => Ok(svd.singular_values),
        None => numeric("SVD did not converge"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn spec_examples_in_higher_dimension() {
        let f1 = eval_loss(LossId::np('F', 1), &diag(&[2.0, 1.0, 1.0]), &diag(&[1.0; 3])).unwrap();
        assert_relative_eq!(f1, 1.0);
        let st = eval_loss(LossId::STEIN, &diag(&[1.0; 3]), &diag(&[E, 1.0, 1.0])).unwrap();
        assert_relative_eq!(st, (E - 2.0) / 2.0, epsilon = 1e-14);
        let p6 = pivot_eval(Pivot::Whitened, &diag(&[4.0, 1.0]), &diag(&[8.0, 1.0])).unwrap();
        assert_relative_eq!(p6, diag(&[1.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let i2 = diag(&[1.0, 1.0]);
        let i3 = diag(&[1.0; 3]);
        assert!(matches!(eval_loss(LossId::STEIN, &i2, &i3), Err(Error::Domain(_))));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(eval_loss(LossId::STEIN, &i2, &indefinite), Err(Error::Domain(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(eval_loss(LossId::STEIN, &asym, &i2), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_on_the_diagonal_of_the_pair() {
        let a = DMatrix::from_row_slice(3, 3, &[3.0, 0.5, 0.1, 0.5, 2.0, 0.2, 0.1, 0.2, 1.5]);
        for l in LossId::all() {
            let v = eval_loss(l, &a, &a).unwrap();
            assert!(v.abs() <= 1e-10, "{l}: {v}");
        }
    }
}
