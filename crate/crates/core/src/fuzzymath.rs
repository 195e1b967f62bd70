//! Shannon entropy over a ratio distribution and the fuzzy membership
//! kernels (bell, triangle, trapezoid).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shannon entropy, in bits, of the distribution `values[i] / sum(values)`.
///
/// Zero entries contribute nothing (`0 * log 0 = 0`). The result lies in
/// `[0, log2(values.len())]`; for two values it is in `[0, 1]` and equals 1
/// exactly when they are equal.
pub fn shannon_entropy<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::InvalidFeatureData("no values".into()));
    }
    let mut sum = T::zero();
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidFeatureData(format!("value {i} is not finite")));
        }
        if v < T::zero() {
            return Err(Error::InvalidFeatureData(format!("value {i} is negative ({v})")));
        }
        sum = sum + v;
    }
    if !(sum > T::zero()) || !sum.is_finite() {
        return Err(Error::InvalidFeatureData("values sum to zero".into()));
    }
    let h = values
        .iter()
        .filter(|&&v| v > T::zero())
        .map(|&v| {
            let p = v / sum;
            -p * p.log2()
        })
        .fold(T::zero(), |acc, term| acc + term);
    // Equal pairs must hit the peak exactly; p = 0.5 already does, but guard
    // against tiny negative drift for degenerate one-hot inputs.
    Ok(h.max(T::zero()))
}

/// A fuzzy number's membership function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum MembershipKernel<T> {
    /// Smooth bell centred on `r`: `(1 - u) e^(-u)` with `u = (x - r)^2 / r^2`.
    Bell { r: T },
    /// Rises linearly on `(p, r]`, falls linearly on `(r, q]`.
    Triangle { p: T, r: T, q: T },
    /// Rises on `(p, s]`, flat on `(s, t]`, falls on `(t, q]`.
    Trapezoid { p: T, s: T, t: T, q: T },
}

impl<T: Real> MembershipKernel<T> {
    pub fn bell(r: T) -> Result<Self> {
        let k = Self::Bell { r };
        k.validate()?;
        Ok(k)
    }

    pub fn triangle(p: T, r: T, q: T) -> Result<Self> {
        let k = Self::Triangle { p, r, q };
        k.validate()?;
        Ok(k)
    }

    pub fn trapezoid(p: T, s: T, t: T, q: T) -> Result<Self> {
        let k = Self::Trapezoid { p, s, t, q };
        k.validate()?;
        Ok(k)
    }

    /// The pipeline default, `Bell { r: 1 }`.
    pub fn default_bell() -> Self {
        Self::Bell { r: T::one() }
    }

    pub fn default_triangle() -> Self {
        Self::Triangle {
            p: T::zero(),
            r: T::one(),
            q: T::of(2.0),
        }
    }

    pub fn default_trapezoid() -> Self {
        Self::Trapezoid {
            p: T::zero(),
            s: T::of(0.9),
            t: T::one(),
            q: T::of(1.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        match *self {
            Self::Bell { r } => {
                if !finite(&[r]) || r <= T::zero() {
                    return Err(Error::InvalidKernel(format!("bell needs r > 0, got {r}")));
                }
            }
            Self::Triangle { p, r, q } => {
                if !finite(&[p, r, q]) || !(p < r && r < q) {
                    return Err(Error::InvalidKernel(format!(
                        "triangle needs p < r < q, got ({p}, {r}, {q})"
                    )));
                }
            }
            Self::Trapezoid { p, s, t, q } => {
                if !finite(&[p, s, t, q]) || !(p < s && s <= t && t < q) {
                    return Err(Error::InvalidKernel(format!(
                        "trapezoid needs p < s <= t < q, got ({p}, {s}, {t}, {q})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Membership degree of `x`.
    ///
    /// The bell is evaluated literally, without clamping: it dips to
    /// `-e^-2` at `|x - r| = r * sqrt(2)` and is only guaranteed to be in
    /// `[0, 1]` on `[0, 2r]`. The piecewise kernels are zero outside `[p, q]`.
    pub fn eval(&self, x: T) -> Result<T> {
        if !x.is_finite() {
            return Err(Error::NonFinite("membership argument"));
        }
        self.validate()?;
        Ok(match *self {
            Self::Bell { r } => {
                let d = (x - r) / r;
                let u = d * d;
                (T::one() - u) * (-u).exp()
            }
            Self::Triangle { p, r, q } => {
                if x > p && x <= r {
                    (x - p) / (r - p)
                } else if x > r && x <= q {
                    (q - x) / (q - r)
                } else {
                    T::zero()
                }
            }
            Self::Trapezoid { p, s, t, q } => {
                if x > p && x <= s {
                    (x - p) / (s - p)
                } else if x > s && x <= t {
                    T::one()
                } else if x > t && x <= q {
                    (q - x) / (q - t)
                } else {
                    T::zero()
                }
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bell { .. } => "bell",
            Self::Triangle { .. } => "triangle",
            Self::Trapezoid { .. } => "trapezoid",
        }
    }
}

impl<T: Real> Default for MembershipKernel<T> {
    fn default() -> Self {
        Self::default_bell()
    }
}

/// Free-function form of [`MembershipKernel::eval`].
pub fn eval_membership<T: Real>(kernel: &MembershipKernel<T>, x: T) -> Result<T> {
    kernel.eval(x)
}
