//! Online training of the mixing constant `K` from genuine pairs.
//!
//! Each genuine sample `(beta, alpha)` is turned into two candidate
//! constants: the `K` at which the pair would score exactly 95 and exactly
//! 100. Two running brackets `k1`/`k2` absorb those candidates, and the
//! trained constant is their midpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Target similarity (as a fraction) for the lower bracket.
pub const LOWER_TARGET: f64 = 0.95;
/// Target similarity (as a fraction) for the upper bracket.
pub const UPPER_TARGET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample<T> {
    pub beta: T,
    pub alpha: T,
}

impl<T: Real> CalibrationSample<T> {
    pub fn new(beta: T, alpha: T) -> Result<Self> {
        for (name, v) in [("beta", beta), ("alpha", alpha)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v.to_f64_lossy(),
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Self { beta, alpha })
    }
}

/// `K` solving `beta K + alpha (1 - K) = target`, clamped to `[0, 1]`.
/// Fails when `beta <= alpha`, where no unique solution exists.
pub fn solve_t<T: Real>(target: T, beta: T, alpha: T) -> Result<T> {
    if !(target > T::zero() && target <= T::one()) {
        return Err(Error::OutOfRange {
            name: "target",
            value: target.to_f64_lossy(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(beta > alpha) {
        return Err(Error::DegenerateSample {
            beta: beta.to_f64_lossy(),
            alpha: alpha.to_f64_lossy(),
        });
    }
    let t = (target - alpha) / (beta - alpha);
    Ok(t.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationState<T> {
    pub k1: T,
    pub k2: T,
    /// Accepted samples.
    pub n: u64,
    /// Samples dropped because `beta <= alpha`.
    pub skipped: u64,
    pub initialized: bool,
}

impl<T: Real> Default for CalibrationState<T> {
    fn default() -> Self {
        Self {
            k1: T::zero(),
            k2: T::zero(),
            n: 0,
            skipped: 0,
            initialized: false,
        }
    }
}

impl<T: Real> CalibrationState<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one genuine sample into the brackets.
    ///
    /// A candidate strictly inside the current bracket `(k1, k2)` replaces
    /// its bracket end; otherwise that end moves to the running average
    /// `(t + n k) / (n + 1)`. Both tests use the bracket as it was before
    /// this sample.
    pub fn update(&mut self, sample: CalibrationSample<T>) {
        let (t1, t2) = match (
            solve_t(T::of(LOWER_TARGET), sample.beta, sample.alpha),
            solve_t(T::of(UPPER_TARGET), sample.beta, sample.alpha),
        ) {
            (Ok(t1), Ok(t2)) => (t1, t2),
            _ => {
                self.skipped += 1;
                return;
            }
        };
        if !self.initialized {
            self.k1 = t1;
            self.k2 = t2;
            self.n = 1;
            self.initialized = true;
            return;
        }
        let (k1, k2) = (self.k1, self.k2);
        let n = T::from_u64(self.n).unwrap_or_else(T::max_value);
        let average = |t: T, k: T| (t + n * k) / (n + T::one());
        let inside = |t: T| k1 < t && t < k2;
        self.k1 = if inside(t1) { t1 } else { average(t1, k1) };
        self.k2 = if inside(t2) { t2 } else { average(t2, k2) };
        if self.k1 > self.k2 {
            std::mem::swap(&mut self.k1, &mut self.k2);
        }
        self.n += 1;
    }

    /// Midpoint of the brackets.
    pub fn finalize(&self) -> Result<T> {
        if !self.initialized {
            return Err(Error::Uninitialized);
        }
        Ok((self.k1 + self.k2) / T::of(2.0))
    }
}

/// Free-function form of [`CalibrationState::update`].
pub fn update<T: Real>(mut state: CalibrationState<T>, sample: CalibrationSample<T>) -> CalibrationState<T> {
    state.update(sample);
    state
}

/// Free-function form of [`CalibrationState::finalize`].
pub fn finalize<T: Real>(state: &CalibrationState<T>) -> Result<T> {
    state.finalize()
}
