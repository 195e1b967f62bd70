//! The comparison pipeline: per-feature entropy and membership, the mean
//! membership `beta`, the silhouette term `alpha`, and the similarity
//! `delta = 100 (beta K + alpha (1 - K))`.

use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features_with, pair_features, FaceInput, FeaturePair, FeatureSet};
use crate::fuzzymath::{shannon_entropy, MembershipKernel};
use crate::scalar::Real;
use crate::silhouette::{alpha_on_canvas, normalize_pair, AlphaMode};

/// Mixing constant used when no calibrated model is supplied.
pub const DEFAULT_K: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig<T> {
    pub k: T,
    pub alpha_mode: AlphaMode,
    pub kernel: MembershipKernel<T>,
    /// Raster pixels per canvas pixel; `None` picks the automatic scale.
    pub resolution_scale: Option<NonZeroU32>,
    #[serde(default)]
    pub features: FeatureSet,
}

impl<T: Real> Default for ScoringConfig<T> {
    fn default() -> Self {
        Self {
            k: T::of(DEFAULT_K),
            alpha_mode: AlphaMode::default(),
            kernel: MembershipKernel::default_bell(),
            resolution_scale: None,
            features: FeatureSet::canonical(),
        }
    }
}

impl<T: Real> ScoringConfig<T> {
    pub fn with_k(mut self, k: T) -> Self {
        self.k = k;
        self
    }

    pub fn with_alpha_mode(mut self, mode: AlphaMode) -> Self {
        self.alpha_mode = mode;
        self
    }

    pub fn with_kernel(mut self, kernel: MembershipKernel<T>) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_resolution_scale(mut self, scale: Option<NonZeroU32>) -> Self {
        self.resolution_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("K", self.k)?;
        self.kernel.validate()?;
        if self.features.is_empty() {
            return Err(Error::InvalidConfig("feature set is empty".into()));
        }
        Ok(())
    }
}

fn check_unit<T: Real>(name: &'static str, v: T) -> Result<()> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(Error::OutOfRange {
            name,
            value: v.to_f64_lossy(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow<T> {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub entropy: T,
    pub membership: T,
}

/// Full trace of one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport<T> {
    pub a_id: String,
    pub b_id: String,
    pub features: Vec<FeatureRow<T>>,
    pub n: usize,
    pub beta: T,
    pub alpha: T,
    pub k: T,
    pub delta: T,
    pub alpha_mode: AlphaMode,
    pub kernel: MembershipKernel<T>,
}

impl<T: Real> MatchReport<T> {
    /// Recomputes `beta` and `delta` from the rows and checks they agree
    /// with the stored values.
    pub fn check_consistency(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidFeatureData(format!("inconsistent report: {what}")));
        if self.n == 0 || self.n != self.features.len() {
            return bad("feature count");
        }
        let memberships: Vec<T> = self.features.iter().map(|r| r.membership).collect();
        let beta = aggregate_beta(&memberships)?;
        if (beta - self.beta).abs() > T::of(1e-12) {
            return bad("beta");
        }
        let delta = similarity_delta(self.beta, self.alpha, self.k)?;
        if (delta - self.delta).abs() > T::of(1e-9) * T::of(100.0).max(delta) {
            return bad("delta");
        }
        Ok(())
    }
}

/// Entropy of the pair and its membership degree under `kernel`.
pub fn feature_membership<T: Real>(pair: &FeaturePair, kernel: &MembershipKernel<T>) -> Result<(T, T)> {
    let h = shannon_entropy(&[T::of(pair.a), T::of(pair.b)])?;
    let mu = kernel.eval(h)?;
    Ok((h, mu))
}

/// Arithmetic mean of the memberships.
pub fn aggregate_beta<T: Real>(memberships: &[T]) -> Result<T> {
    if memberships.is_empty() {
        return Err(Error::Empty("membership list"));
    }
    let sum = memberships.iter().fold(T::zero(), |acc, &m| acc + m);
    let n = T::from_usize(memberships.len()).ok_or(Error::InvalidConfig("feature count".into()))?;
    Ok(sum / n)
}

/// `100 (beta K + alpha (1 - K))`.
pub fn similarity_delta<T: Real>(beta: T, alpha: T, k: T) -> Result<T> {
    check_unit("beta", beta)?;
    check_unit("alpha", alpha)?;
    check_unit("K", k)?;
    Ok(T::of(100.0) * (beta * k + alpha * (T::one() - k)))
}

/// Runs the whole pipeline on two faces.
pub fn compare<T: Real>(f1: &FaceInput, f2: &FaceInput, config: &ScoringConfig<T>) -> Result<MatchReport<T>> {
    config.validate()?;
    let (canvas, n1, n2) = normalize_pair(f1, f2);
    let fa = extract_features_with(&n1, &config.features)?;
    let fb = extract_features_with(&n2, &config.features)?;
    let pairs = pair_features(&fa, &fb)?;

    let mut rows = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let (entropy, membership) = feature_membership(&pair, &config.kernel)?;
        rows.push(FeatureRow {
            name: pair.name,
            a: pair.a,
            b: pair.b,
            entropy,
            membership,
        });
    }
    let memberships: Vec<T> = rows.iter().map(|r| r.membership).collect();
    let beta = aggregate_beta(&memberships)?;
    let alpha = T::of(alpha_on_canvas(&canvas, &n1, &n2, config.alpha_mode, config.resolution_scale)?);
    let delta = similarity_delta(beta, alpha, config.k)?;
    Ok(MatchReport {
        a_id: f1.id().to_string(),
        b_id: f2.id().to_string(),
        n: rows.len(),
        features: rows,
        beta,
        alpha,
        k: config.k,
        delta,
        alpha_mode: config.alpha_mode,
        kernel: config.kernel,
    })
}
