//! The 26 decomposable losses for covariance estimation.
//!
//! Twenty-one losses apply a matrix norm to a *pivot* `Δ(A, B)`, a matrix
//! discrepancy with `Δ(A, A) = 0`:
//!
//! | pivot | `Δ(A, B)`                 |
//! |-------|---------------------------|
//! | 1     | `A - B`                   |
//! | 2     | `A⁻¹ - B⁻¹`               |
//! | 3     | `A⁻¹B - I`                |
//! | 4     | `B⁻¹A - I`                |
//! | 5     | `A⁻¹B + B⁻¹A - 2I`        |
//! | 6     | `A^{-1/2} B A^{-1/2} - I` |
//! | 7     | `log(A^{-1/2} B A^{-1/2})`|
//!
//! combined with the Frobenius (`F`), operator (`O`) or nuclear (`N`) norm.
//! The remaining five are statistical discrepancies between `N(0, A)` and
//! `N(0, B)`: Stein, Entropy, Divergence, Affinity and Fréchet.
//!
//! Units: Frobenius-family values are **squared** Frobenius norms; operator
//! and nuclear values are plain (unsquared) norms. Stein, Entropy and
//! Divergence carry the factor ½.
//!
//! Non-symmetric pivots (3, 4, 5) enter the Frobenius and operator norms
//! through their singular values. The nuclear norm of pivot 5 is taken over
//! its eigenvalues, which are real and non-negative because the pivot is
//! similar to `C + C⁻¹ - 2I` with `C = A^{-1/2} B A^{-1/2}`.

mod dense;
mod two;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use dense::{eval_loss, pivot_eval, SpdMatrix};
pub use two::{eigvals2, eval_loss2, mat_a, mat_b, pivot_eval2, Mat2, SymMat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Norm {
    Frobenius,
    Operator,
    Nuclear,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::Frobenius, Norm::Operator, Norm::Nuclear];

    pub fn letter(self) -> char {
        match self {
            Norm::Frobenius => 'F',
            Norm::Operator => 'O',
            Norm::Nuclear => 'N',
        }
    }
}

/// The seven matrix pivots, numbered as in the naming grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pivot {
    /// `A - B`
    Difference,
    /// `A⁻¹ - B⁻¹`
    PrecisionDifference,
    /// `A⁻¹B - I`
    LeftRatio,
    /// `B⁻¹A - I`
    RightRatio,
    /// `A⁻¹B + B⁻¹A - 2I`
    RatioSum,
    /// `A^{-1/2} B A^{-1/2} - I`
    Whitened,
    /// `log(A^{-1/2} B A^{-1/2})`
    LogWhitened,
}

impl Pivot {
    pub const ALL: [Pivot; 7] = [
        Pivot::Difference,
        Pivot::PrecisionDifference,
        Pivot::LeftRatio,
        Pivot::RightRatio,
        Pivot::RatioSum,
        Pivot::Whitened,
        Pivot::LogWhitened,
    ];

    /// 1-based index used in loss names such as `F,3`.
    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(usize::from(i).checked_sub(1)?).copied()
    }

    /// Whether `Δ(A, B)` is symmetric for symmetric arguments.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Pivot::LeftRatio | Pivot::RightRatio | Pivot::RatioSum)
    }

    pub fn formula(self) -> &'static str {
        match self {
            Pivot::Difference => "A-B",
            Pivot::PrecisionDifference => "A^-1-B^-1",
            Pivot::LeftRatio => "A^-1 B-I",
            Pivot::RightRatio => "B^-1 A-I",
            Pivot::RatioSum => "A^-1 B+B^-1 A-2I",
            Pivot::Whitened => "A^-1/2 B A^-1/2-I",
            Pivot::LogWhitened => "log(A^-1/2 B A^-1/2)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Stein,
    Entropy,
    Divergence,
    Affinity,
    Frechet,
}

impl Statistic {
    pub const ALL: [Statistic; 5] =
        [Statistic::Stein, Statistic::Entropy, Statistic::Divergence, Statistic::Affinity, Statistic::Frechet];

    pub fn short_name(self) -> &'static str {
        match self {
            Statistic::Stein => "st",
            Statistic::Entropy => "ent",
            Statistic::Divergence => "div",
            Statistic::Affinity => "aff",
            Statistic::Frechet => "fre",
        }
    }
}

/// How a decomposable loss combines over jointly block-diagonal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Sum,
    Max,
}

impl Aggregation {
    pub fn combine(self, values: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Aggregation::Sum => values.into_iter().sum(),
            Aggregation::Max => values.into_iter().fold(0.0, f64::max),
        }
    }
}

/// One of the 26 loss families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossId {
    NormPivot(Norm, Pivot),
    Statistical(Statistic),
}

impl LossId {
    pub const fn norm(norm: Norm, pivot: Pivot) -> Self {
        LossId::NormPivot(norm, pivot)
    }

    pub const STEIN: LossId = LossId::Statistical(Statistic::Stein);
    pub const ENTROPY: LossId = LossId::Statistical(Statistic::Entropy);
    pub const DIVERGENCE: LossId = LossId::Statistical(Statistic::Divergence);
    pub const AFFINITY: LossId = LossId::Statistical(Statistic::Affinity);
    pub const FRECHET: LossId = LossId::Statistical(Statistic::Frechet);

    /// Shorthand for norm-pivot losses, e.g. `LossId::np('F', 1)`.
    ///
    /// Panics on an invalid letter or index; intended for literals.
    pub fn np(letter: char, pivot: u8) -> Self {
        let norm = match letter {
            'F' => Norm::Frobenius,
            'O' => Norm::Operator,
            'N' => Norm::Nuclear,
            other => panic!("unknown norm letter {other}"),
        };
        LossId::NormPivot(norm, Pivot::from_index(pivot).expect("pivot index in 1..=7"))
    }

    /// All 26 losses: the norm × pivot grid row-major by norm, then the
    /// statistical measures.
    pub fn all() -> Vec<LossId> {
        let mut out = Vec::with_capacity(26);
        for norm in Norm::ALL {
            for pivot in Pivot::ALL {
                out.push(LossId::NormPivot(norm, pivot));
            }
        }
        out.extend(Statistic::ALL.map(LossId::Statistical));
        out
    }

    pub fn aggregation(self) -> Aggregation {
        match self {
            LossId::NormPivot(Norm::Operator, _) => Aggregation::Max,
            _ => Aggregation::Sum,
        }
    }
}

impl fmt::Display for LossId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossId::NormPivot(norm, pivot) => write!(f, "{},{}", norm.letter(), pivot.index()),
            LossId::Statistical(s) => f.write_str(s.short_name()),
        }
    }
}

impl FromStr for LossId {
    type Err = Error;

    /// Accepts `F,1` / `F1` / `f,1` style names and `st`, `ent`, `div`,
    /// `aff`, `fre` (or their long forms).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let stat = match t.as_str() {
            "st" | "stein" => Some(Statistic::Stein),
            "ent" | "entropy" => Some(Statistic::Entropy),
            "div" | "divergence" => Some(Statistic::Divergence),
            "aff" | "affinity" => Some(Statistic::Affinity),
            "fre" | "frechet" | "fréchet" => Some(Statistic::Frechet),
            _ => None,
        };
        if let Some(stat) = stat {
            return Ok(LossId::Statistical(stat));
        }
        let bad = || Error::Domain(format!("unknown loss id '{s}'"));
        let mut chars = t.chars();
        let norm = match chars.next() {
            Some('f') => Norm::Frobenius,
            Some('o') => Norm::Operator,
            Some('n') => Norm::Nuclear,
            _ => return Err(bad()),
        };
        let rest: String = chars.collect();
        let digits = rest.trim_start_matches(',').trim();
        let idx: u8 = digits.parse().map_err(|_| bad())?;
        let pivot = Pivot::from_index(idx).ok_or_else(bad)?;
        Ok(LossId::NormPivot(norm, pivot))
    }
}

/// Parses a loss selection: `all`, a single id, or a comma-separated list
/// such as `F,1,O,7,st`. Duplicates are dropped, order is kept.
pub fn parse_loss_list(s: &str) -> Result<Vec<LossId>> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("all") {
        return Ok(LossId::all());
    }
    let tokens: Vec<&str> =
        s.split(|c: char| c == ',' || c == ';' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
    if tokens.is_empty() {
        return Err(Error::Domain("empty loss selection".into()));
    }
    let mut out: Vec<LossId> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        let is_norm_letter = matches!(tok.to_ascii_lowercase().as_str(), "f" | "o" | "n");
        let id = if is_norm_letter {
            let idx = tokens
                .get(i + 1)
                .ok_or_else(|| Error::Domain(format!("loss id '{tok}' is missing its pivot index")))?;
            i += 2;
            format!("{tok},{idx}").parse()?
        } else {
            i += 1;
            tok.parse()?
        };
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}
