//! Triangular fuzzy numbers and the arithmetic the scheduler needs.
//!
//! A [`Tfn`] is an ordered triple `(lower, modal, upper)` describing an
//! uncertain duration (seconds) or amount of money (dollars). The modal
//! component is the estimate; the lower/upper components bound the support
//! of the triangular membership function. All scheduler arithmetic
//! (addition, scalar product, ranking, max, defuzzification) lives here.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TfnError {
    #[error("components must satisfy lower <= modal <= upper, got ({0}, {1}, {2})")]
    InvalidTriple(f64, f64, f64),
    #[error("scalar must be non-negative, got {0}")]
    NegativeScalar(f64),
    #[error("subtrahend must be componentwise dominated by minuend")]
    NotDominating,
    #[error("billing quantum must be positive, got {0}")]
    NonPositiveQuantum(f64),
    #[error("invalid fuzzification parameters: {0}")]
    BadParams(String),
}

/// Triangular fuzzy number `(lower, modal, upper)` with `lower <= modal <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tfn {
    lower: f64,
    modal: f64,
    upper: f64,
}

impl Tfn {
    pub const ZERO: Tfn = Tfn {
        lower: 0.0,
        modal: 0.0,
        upper: 0.0,
    };

    pub fn new(lower: f64, modal: f64, upper: f64) -> Result<Self, TfnError> {
        if !(lower.is_finite() && modal.is_finite() && upper.is_finite())
            || lower > modal
            || modal > upper
        {
            return Err(TfnError::InvalidTriple(lower, modal, upper));
        }
        Ok(Tfn {
            lower,
            modal,
            upper,
        })
    }

    /// A certain quantity has all three components equal.
    pub fn crisp(value: f64) -> Self {
        Tfn {
            lower: value,
            modal: value,
            upper: value,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn modal(&self) -> f64 {
        self.modal
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_crisp(&self) -> bool {
        self.lower == self.modal && self.modal == self.upper
    }

    /// Product with a non-negative scalar (division is `scale(1/k)`).
    pub fn scale(self, k: f64) -> Result<Tfn, TfnError> {
        if !(k >= 0.0) {
            return Err(TfnError::NegativeScalar(k));
        }
        Ok(Tfn {
            lower: k * self.lower,
            modal: k * self.modal,
            upper: k * self.upper,
        })
    }

    /// Componentwise difference of correlated interval endpoints.
    ///
    /// Only valid when `self` dominates `rhs` in every component, which the
    /// schedule decoder guarantees for server busy intervals. The general
    /// fuzzy subtraction `(l1-u2, ...)` would break `l <= m <= u` here.
    pub fn sub_componentwise(self, rhs: Tfn) -> Result<Tfn, TfnError> {
        if self.lower < rhs.lower || self.modal < rhs.modal || self.upper < rhs.upper {
            return Err(TfnError::NotDominating);
        }
        Ok(Tfn {
            lower: self.lower - rhs.lower,
            modal: self.modal - rhs.modal,
            upper: self.upper - rhs.upper,
        })
    }

    /// Componentwise `ceil(x / quantum)`: the number of whole billing
    /// quanta covering each component. Ceiling is monotone, so the result
    /// is a valid triple.
    pub fn ceil_div(self, quantum: f64) -> Result<Tfn, TfnError> {
        if !(quantum > 0.0) {
            return Err(TfnError::NonPositiveQuantum(quantum));
        }
        Ok(Tfn {
            lower: (self.lower / quantum).ceil(),
            modal: (self.modal / quantum).ceil(),
            upper: (self.upper / quantum).ceil(),
        })
    }

    /// Mean value `(l + 2m + u) / 4`.
    pub fn mean(&self) -> f64 {
        (self.lower + 2.0 * self.modal + self.upper) / 4.0
    }

    /// Standard deviation `sqrt((2(l-m)^2 + (l-u)^2 + 2(m-u)^2) / 80)`.
    pub fn std_dev(&self) -> f64 {
        let lm = self.lower - self.modal;
        let lu = self.lower - self.upper;
        let mu = self.modal - self.upper;
        ((2.0 * lm * lm + lu * lu + 2.0 * mu * mu) / 80.0).sqrt()
    }

    /// Scalar equivalent `mean + eta * std_dev` used for objective values.
    pub fn defuzzify(&self, eta: f64) -> f64 {
        self.mean() + eta * self.std_dev()
    }

    /// Ranking comparison: lexicographic on the mean, then the modal value,
    /// then the spread `u - l`. Equal only when all three criteria tie.
    pub fn rank_cmp(&self, other: &Tfn) -> Ordering {
        self.mean()
            .total_cmp(&other.mean())
            .then_with(|| self.modal.total_cmp(&other.modal))
            .then_with(|| (self.upper - self.lower).total_cmp(&(other.upper - other.lower)))
    }

    /// Approximate fuzzy maximum: returns whichever operand ranks higher,
    /// preferring `self` on ties so decoding stays deterministic.
    pub fn max(self, other: Tfn) -> Tfn {
        match self.rank_cmp(&other) {
            Ordering::Less => other,
            _ => self,
        }
    }

    /// Membership degree of `x` under the triangular membership function.
    /// A crisp number degenerates to the indicator of its value.
    pub fn membership(&self, x: f64) -> f64 {
        if x < self.lower || x > self.upper {
            return 0.0;
        }
        if self.is_crisp() {
            return if x == self.modal { 1.0 } else { 0.0 };
        }
        if x <= self.modal {
            if self.modal == self.lower {
                1.0
            } else {
                (x - self.lower) / (self.modal - self.lower)
            }
        } else if self.modal == self.upper {
            1.0
        } else {
            (x - self.upper) / (self.modal - self.upper)
        }
    }
}

/// Componentwise sum, used to chain a start time with a duration.
impl std::ops::Add for Tfn {
    type Output = Tfn;

    fn add(self, rhs: Tfn) -> Tfn {
        Tfn {
            lower: self.lower + rhs.lower,
            modal: self.modal + rhs.modal,
            upper: self.upper + rhs.upper,
        }
    }
}

impl std::iter::Sum for Tfn {
    fn sum<I: Iterator<Item = Tfn>>(iter: I) -> Tfn {
        iter.fold(Tfn::ZERO, |a, b| a + b)
    }
}

impl std::fmt::Display for Tfn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.lower, self.modal, self.upper)
    }
}

/// Controls how a crisp estimate is lifted to a [`Tfn`].
///
/// `delta1` scales the lowest admissible lower bound, `delta2` the highest
/// admissible upper bound, and `eta` weights the standard deviation during
/// defuzzification. `delta1 = delta2 = 1` degenerates to crisp values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzificationParams {
    pub delta1: f64,
    pub delta2: f64,
    pub eta: f64,
}

impl FuzzificationParams {
    pub fn new(delta1: f64, delta2: f64, eta: f64) -> Result<Self, TfnError> {
        // The open conditions 0 < d1 < 1 < d2 are relaxed to their closure so
        // that d1 = d2 = 1 (no uncertainty) stays expressible.
        if !(delta1 > 0.0 && delta1 <= 1.0) {
            return Err(TfnError::BadParams(format!(
                "delta1 must be in (0, 1], got {delta1}"
            )));
        }
        if !(delta2 >= 1.0) {
            return Err(TfnError::BadParams(format!(
                "delta2 must be >= 1, got {delta2}"
            )));
        }
        if delta2 - 1.0 < 1.0 - delta1 {
            return Err(TfnError::BadParams(format!(
                "need delta2 - 1 >= 1 - delta1, got delta1={delta1} delta2={delta2}"
            )));
        }
        if !(eta >= 0.0) {
            return Err(TfnError::BadParams(format!("eta must be >= 0, got {eta}")));
        }
        Ok(FuzzificationParams {
            delta1,
            delta2,
            eta,
        })
    }

    /// Lift a crisp non-negative estimate `t` to a fuzzy value.
    ///
    /// The modal component is `t` itself; the lower component is drawn
    /// uniformly from `[delta1 * t, t]` and the upper component from
    /// `[2t - lower, delta2 * t]`, so the spread above the estimate is at
    /// least the spread below it and the mean never drops under `t`.
    pub fn fuzzify<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Tfn {
        debug_assert!(t >= 0.0, "fuzzify expects a non-negative estimate");
        if t == 0.0 {
            // Keep the draw count stable so downstream streams do not shift.
            let _ = rng.gen_range(0.0..=0.0f64);
            let _ = rng.gen_range(0.0..=0.0f64);
            return Tfn::ZERO;
        }
        let lower = rng.gen_range(self.delta1 * t..=t);
        let lo = 2.0 * t - lower;
        // Guard against 1-ulp inversions when delta2 - 1 == 1 - delta1.
        let hi = (self.delta2 * t).max(lo);
        let upper = rng.gen_range(lo..=hi);
        Tfn {
            lower,
            modal: t,
            upper,
        }
    }
}
