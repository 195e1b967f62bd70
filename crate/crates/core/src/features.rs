//! Face data model and distance-feature extraction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{validate_simple_polygon, Point};

/// Landmark names every face must carry.
pub const REQUIRED_LANDMARKS: [&str; 13] = [
    "eye_left",
    "eye_right",
    "nose_base",
    "mouth_top",
    "mouth_left",
    "mouth_right",
    "ear_left",
    "ear_right",
    "brow_left_inner",
    "brow_left_outer",
    "brow_right_inner",
    "brow_right_outer",
    "chin",
];

/// One frontal face: named landmarks plus the face outline down to ear
/// height, in the pixel frame of its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceInput {
    id: String,
    width: u32,
    height: u32,
    landmarks: BTreeMap<String, Point>,
    outline: Vec<Point>,
}

impl FaceInput {
    /// Validates and builds a face. Extra landmark names are kept.
    pub fn new(
        id: impl Into<String>,
        width: u32,
        height: u32,
        landmarks: BTreeMap<String, Point>,
        outline: Vec<Point>,
    ) -> Result<Self> {
        let face = Self {
            id: id.into(),
            width,
            height,
            landmarks,
            outline,
        };
        face.validate()?;
        Ok(face)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidFace {
            id: self.id.clone(),
            reason: reason.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(self.invalid("image dimensions must be positive"));
        }
        for name in REQUIRED_LANDMARKS {
            if !self.landmarks.contains_key(name) {
                return Err(Error::MissingLandmark(name.to_string()));
            }
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let in_bounds = |p: &Point| p.is_finite() && (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y);
        for (name, p) in &self.landmarks {
            if !in_bounds(p) {
                return Err(self.invalid(format!(
                    "landmark `{name}` at ({}, {}) is outside the {}x{} image",
                    p.x, p.y, self.width, self.height
                )));
            }
        }
        if let Some(i) = self.outline.iter().position(|p| !in_bounds(p)) {
            return Err(self.invalid(format!("outline vertex {i} is outside the image")));
        }
        validate_simple_polygon(&self.outline).map_err(|e| self.invalid(format!("outline: {e}")))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn landmarks(&self) -> &BTreeMap<String, Point> {
        &self.landmarks
    }

    pub fn landmark(&self, name: &str) -> Result<Point> {
        self.landmarks
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingLandmark(name.to_string()))
    }

    pub fn outline(&self) -> &[Point] {
        &self.outline
    }

    /// Copy with every coordinate multiplied per axis and the image
    /// dimensions replaced. Skips bounds re-validation: callers pass the
    /// exact ratio between old and new dimensions.
    pub(crate) fn rescaled(&self, width: u32, height: u32, sx: f64, sy: f64) -> FaceInput {
        FaceInput {
            id: self.id.clone(),
            width,
            height,
            landmarks: self
                .landmarks
                .iter()
                .map(|(k, p)| (k.clone(), p.scaled(sx, sy)))
                .collect(),
            outline: self.outline.iter().map(|p| p.scaled(sx, sy)).collect(),
        }
    }

    /// Resamples the face onto a `width` x `height` image, scaling every
    /// coordinate by the per-axis ratio of new to old dimensions.
    pub fn resized(&self, width: u32, height: u32) -> Result<FaceInput> {
        if width == 0 || height == 0 {
            return Err(self.invalid("image dimensions must be positive"));
        }
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        let mut face = self.rescaled(width, height, sx, sy);
        // keep points on the border from drifting past it through rounding
        let clamp = |p: &mut Point| {
            p.x = p.x.min(width as f64);
            p.y = p.y.min(height as f64);
        };
        face.landmarks.values_mut().for_each(clamp);
        face.outline.iter_mut().for_each(clamp);
        face.validate()?;
        Ok(face)
    }
}

/// Reference point for a feature: a landmark or the centroid of several.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Anchor {
    Landmark(String),
    Centroid(Vec<String>),
}

impl Anchor {
    fn resolve(&self, face: &FaceInput) -> Result<Point> {
        match self {
            Anchor::Landmark(name) => face.landmark(name),
            Anchor::Centroid(names) => {
                if names.is_empty() {
                    return Err(Error::InvalidConfig("empty centroid anchor".into()));
                }
                let mut sum = Point::default();
                for name in names {
                    let p = face.landmark(name)?;
                    sum.x += p.x;
                    sum.y += p.y;
                }
                let n = names.len() as f64;
                Ok(Point::new(sum.x / n, sum.y / n))
            }
        }
    }
}

fn lm(name: &str) -> Anchor {
    Anchor::Landmark(name.to_string())
}

/// How a feature value is measured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Euclidean distance between two anchors.
    Distance(Anchor, Anchor),
    /// Mean of several anchor-to-anchor distances.
    MeanDistance(Vec<(Anchor, Anchor)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub measure: Measure,
}

/// Ordered list of feature definitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet(pub Vec<FeatureDef>);

impl FeatureSet {
    /// The six canonical features, in canonical order.
    pub fn canonical() -> Self {
        let dist = |name: &str, a: &str, b: &str| FeatureDef {
            name: name.to_string(),
            measure: Measure::Distance(lm(a), lm(b)),
        };
        // The brow-center midpoint is the centroid of all four brow points.
        let brow_mid = Anchor::Centroid(
            ["brow_left_inner", "brow_left_outer", "brow_right_inner", "brow_right_outer"]
                .map(String::from)
                .to_vec(),
        );
        FeatureSet(vec![
            dist("interocular", "eye_left", "eye_right"),
            dist("nose_to_mouth", "nose_base", "mouth_top"),
            dist("ear_to_ear", "ear_left", "ear_right"),
            dist("mouth_width", "mouth_left", "mouth_right"),
            FeatureDef {
                name: "eyebrow_length".into(),
                measure: Measure::MeanDistance(vec![
                    (lm("brow_left_inner"), lm("brow_left_outer")),
                    (lm("brow_right_inner"), lm("brow_right_outer")),
                ]),
            },
            FeatureDef {
                name: "chin_to_brow_mid".into(),
                measure: Measure::Distance(lm("chin"), brow_mid),
            },
        ])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for FeatureSet {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Named positive feature values in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(Vec<(String, f64)>);

impl FeatureVector {
    pub fn new(values: Vec<(String, f64)>) -> Result<Self> {
        if let Some((name, v)) = values.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidFeatureData(format!("feature `{name}` = {v}")));
        }
        Ok(Self(values))
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One feature measured on both faces: the two-element set fed to the
/// entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePair {
    pub name: String,
    pub a: f64,
    pub b: f64,
}

/// Measures the canonical features of `face`.
pub fn extract_features(face: &FaceInput) -> Result<FeatureVector> {
    extract_features_with(face, &FeatureSet::canonical())
}

pub fn extract_features_with(face: &FaceInput, set: &FeatureSet) -> Result<FeatureVector> {
    let mut out = Vec::with_capacity(set.len());
    for def in &set.0 {
        let value = match &def.measure {
            Measure::Distance(a, b) => a.resolve(face)?.distance(b.resolve(face)?),
            Measure::MeanDistance(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::InvalidConfig(format!("feature `{}` has no distances", def.name)));
                }
                let mut sum = 0.0;
                for (a, b) in pairs {
                    sum += a.resolve(face)?.distance(b.resolve(face)?);
                }
                sum / pairs.len() as f64
            }
        };
        if !(value > 0.0) {
            return Err(Error::DegenerateFeature(def.name.clone()));
        }
        out.push((def.name.clone(), value));
    }
    FeatureVector::new(out)
}

/// Zips two feature vectors by name, keeping their shared order.
pub fn pair_features(a: &FeatureVector, b: &FeatureVector) -> Result<Vec<FeaturePair>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("feature vector"));
    }
    if a.len() != b.len() {
        return Err(Error::FeatureMismatch(format!("{} vs {} features", a.len(), b.len())));
    }
    a.0.iter()
        .zip(&b.0)
        .map(|((na, va), (nb, vb))| {
            if na != nb {
                return Err(Error::FeatureMismatch(format!("`{na}` vs `{nb}`")));
            }
            Ok(FeaturePair {
                name: na.clone(),
                a: *va,
                b: *vb,
            })
        })
        .collect()
}
