//! Seeded synthetic face populations and a verification evaluator
//! (genuine/impostor statistics, ROC, AUC).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FaceInput;
use crate::geometry::Point;
use crate::scalar::Real;
use crate::scoring::{compare, ScoringConfig};

/// Image size of every generated face.
pub const SYNTH_IMAGE_SIZE: u32 = 200;
const OUTLINE_VERTICES: usize = 33;
const MAX_RETRIES: usize = 200;

const TEMPLATE_LANDMARKS: [(&str, f64, f64); 13] = [
    ("eye_left", 80.0, 92.0),
    ("eye_right", 120.0, 92.0),
    ("nose_base", 100.0, 124.0),
    ("mouth_top", 100.0, 137.0),
    ("mouth_left", 85.0, 145.0),
    ("mouth_right", 115.0, 145.0),
    ("ear_left", 54.0, 105.0),
    ("ear_right", 146.0, 105.0),
    ("brow_left_inner", 92.0, 80.0),
    ("brow_left_outer", 68.0, 83.0),
    ("brow_right_inner", 108.0, 80.0),
    ("brow_right_outer", 132.0, 83.0),
    ("chin", 100.0, 170.0),
];
/// Centre of the face oval; the outline is its lower half, cut at ear height.
const TEMPLATE_OVAL_CENTER: (f64, f64) = (100.0, 105.0);
const TEMPLATE_OVAL_AXES: (f64, f64) = (46.0, 65.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub identity_count: usize,
    pub captures_per_identity: usize,
    /// Landmark and oval jitter between identities, pixels.
    pub identity_sigma: f64,
    /// Landmark and outline jitter between captures of one identity, pixels.
    pub capture_sigma: f64,
    /// Per-vertex radial outline jitter defining each identity's face shape, pixels.
    pub outline_sigma: f64,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            identity_count: 20,
            captures_per_identity: 3,
            identity_sigma: 6.0,
            capture_sigma: 1.0,
            outline_sigma: 2.0,
            seed: 42,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.identity_count == 0 || self.captures_per_identity == 0 {
            return Err(Error::InvalidConfig("identity and capture counts must be at least 1".into()));
        }
        for (name, s) in [
            ("identity_sigma", self.identity_sigma),
            ("capture_sigma", self.capture_sigma),
            ("outline_sigma", self.outline_sigma),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be a finite non-negative number")));
            }
        }
        Ok(())
    }
}

/// A generated face and the identity it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFace {
    pub identity: usize,
    pub face: FaceInput,
}

/// Shape parameters shared by all captures of one identity.
struct Identity {
    landmarks: Vec<(&'static str, Point)>,
    center: Point,
    /// Outline radius at each vertex angle.
    radii: Vec<f64>,
}

fn angles() -> impl Iterator<Item = f64> {
    (0..OUTLINE_VERTICES).map(|i| PI * i as f64 / (OUTLINE_VERTICES - 1) as f64)
}

fn gaussian(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated as finite and non-negative")
}

fn draw_identity(rng: &mut ChaCha8Rng, cfg: &PopulationConfig) -> Identity {
    let id = gaussian(cfg.identity_sigma);
    let shape = gaussian(cfg.outline_sigma);
    let landmarks = TEMPLATE_LANDMARKS
        .iter()
        .map(|&(name, x, y)| (name, Point::new(x + id.sample(rng), y + id.sample(rng))))
        .collect();
    let center = Point::new(
        TEMPLATE_OVAL_CENTER.0 + id.sample(rng),
        TEMPLATE_OVAL_CENTER.1 + id.sample(rng),
    );
    let (a, b) = (
        TEMPLATE_OVAL_AXES.0 + id.sample(rng),
        TEMPLATE_OVAL_AXES.1 + id.sample(rng),
    );
    let radii = angles()
        .map(|t| {
            let r = (a * b) / ((b * t.cos()).hypot(a * t.sin()));
            r + shape.sample(rng)
        })
        .collect();
    Identity {
        landmarks,
        center,
        radii,
    }
}

fn draw_capture(rng: &mut ChaCha8Rng, identity: &Identity, sigma: f64, id: String) -> Result<FaceInput> {
    let noise = gaussian(sigma);
    let landmarks: BTreeMap<String, Point> = identity
        .landmarks
        .iter()
        .map(|&(name, p)| (name.to_string(), Point::new(p.x + noise.sample(rng), p.y + noise.sample(rng))))
        .collect();
    let c = identity.center;
    let mut outline = Vec::with_capacity(OUTLINE_VERTICES);
    for (t, &r) in angles().zip(&identity.radii) {
        let r = r + noise.sample(rng);
        if !(r > 1.0) {
            return Err(Error::InvalidConfig("outline radius collapsed".into()));
        }
        // lower half of the oval, image y pointing down
        outline.push(Point::new(c.x + r * t.cos(), c.y + r * t.sin()));
    }
    FaceInput::new(id, SYNTH_IMAGE_SIZE, SYNTH_IMAGE_SIZE, landmarks, outline)
}

/// Draws `identity_count * captures_per_identity` faces, identity-major.
/// Invalid draws are redrawn, up to a fixed retry budget.
pub fn generate_population(cfg: &PopulationConfig) -> Result<Vec<LabeledFace>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.identity_count * cfg.captures_per_identity);
    for identity in 0..cfg.identity_count {
        let mut attempts = 0;
        'identity: loop {
            attempts += 1;
            if attempts > MAX_RETRIES {
                return Err(Error::RetryExhausted(MAX_RETRIES));
            }
            let proto = draw_identity(&mut rng, cfg);
            // the identity itself must yield a valid noise-free face
            if draw_capture(&mut rng, &proto, 0.0, String::new()).is_err() {
                continue 'identity;
            }
            let mut captures = Vec::with_capacity(cfg.captures_per_identity);
            for capture in 0..cfg.captures_per_identity {
                let id = format!("id{identity:03}_c{capture:02}");
                let mut tries = 0;
                let face = loop {
                    tries += 1;
                    if tries > MAX_RETRIES {
                        return Err(Error::RetryExhausted(MAX_RETRIES));
                    }
                    if let Ok(face) = draw_capture(&mut rng, &proto, cfg.capture_sigma, id.clone()) {
                        break face;
                    }
                };
                captures.push(LabeledFace { identity, face });
            }
            out.extend(captures);
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Impostor,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Genuine => "genuine",
            Label::Impostor => "impostor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub a: String,
    pub b: String,
    pub label: Label,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Accept threshold; `None` for the reject-everything origin.
    pub threshold: Option<f64>,
    pub false_accept_rate: f64,
    pub true_accept_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for one score.
    pub stddev: f64,
}

impl ClassStats {
    fn of(scores: &[f64]) -> Self {
        let n = scores.len();
        let mean = scores.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { count: n, mean, stddev }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub genuine: ClassStats,
    pub impostor: ClassStats,
    pub auc: f64,
    pub accuracy_at_threshold: f64,
    pub roc_points: Vec<RocPoint>,
    pub genuine_scores: Vec<f64>,
    pub impostor_scores: Vec<f64>,
    pub pairs: Vec<ScoredPair>,
}

/// Probability that a random genuine score beats a random impostor score,
/// ties counting one half.
pub fn rank_auc(genuine: &[f64], impostor: &[f64]) -> Result<f64> {
    if genuine.is_empty() {
        return Err(Error::Empty("genuine scores"));
    }
    if impostor.is_empty() {
        return Err(Error::Empty("impostor scores"));
    }
    let mut imp = impostor.to_vec();
    imp.sort_by(f64::total_cmp);
    let wins: f64 = genuine
        .iter()
        .map(|&g| {
            let below = imp.partition_point(|&s| s < g);
            let not_above = imp.partition_point(|&s| s <= g);
            below as f64 + 0.5 * (not_above - below) as f64
        })
        .sum();
    Ok(wins / (genuine.len() as f64 * impostor.len() as f64))
}

/// ROC operating points at every distinct score, from (0, 0) to (1, 1).
/// A pair is accepted when its score is at or above the threshold.
pub fn roc_curve(genuine: &[f64], impostor: &[f64]) -> Vec<RocPoint> {
    let mut thresholds: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let rate = |scores: &[f64], t: f64| {
        if scores.is_empty() {
            0.0
        } else {
            scores.iter().filter(|&&s| s >= t).count() as f64 / scores.len() as f64
        }
    };
    let mut points = vec![RocPoint {
        threshold: None,
        false_accept_rate: 0.0,
        true_accept_rate: 0.0,
    }];
    points.extend(thresholds.into_iter().map(|t| RocPoint {
        threshold: Some(t),
        false_accept_rate: rate(impostor, t),
        true_accept_rate: rate(genuine, t),
    }));
    points
}

/// Trapezoidal area under an ROC polyline.
pub fn roc_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            (w[1].false_accept_rate - w[0].false_accept_rate) * (w[1].true_accept_rate + w[0].true_accept_rate) * 0.5
        })
        .sum()
}

impl EvalReport {
    /// Summarizes already scored pairs.
    pub fn from_pairs(pairs: Vec<ScoredPair>, threshold: f64) -> Result<Self> {
        if !(0.0..=100.0).contains(&threshold) {
            return Err(Error::OutOfRange {
                name: "threshold",
                value: threshold,
                lo: 0.0,
                hi: 100.0,
            });
        }
        let scores = |label| -> Vec<f64> { pairs.iter().filter(|p| p.label == label).map(|p| p.delta).collect() };
        let genuine = scores(Label::Genuine);
        let impostor = scores(Label::Impostor);
        let auc = rank_auc(&genuine, &impostor)?;
        let accepted = genuine.iter().filter(|&&s| s >= threshold).count();
        let rejected = impostor.iter().filter(|&&s| s < threshold).count();
        let accuracy = (accepted + rejected) as f64 / (genuine.len() + impostor.len()) as f64;
        Ok(Self {
            threshold,
            genuine: ClassStats::of(&genuine),
            impostor: ClassStats::of(&impostor),
            auc,
            accuracy_at_threshold: accuracy,
            roc_points: roc_curve(&genuine, &impostor),
            genuine_scores: genuine,
            impostor_scores: impostor,
            pairs,
        })
    }
}

/// Scores every unordered pair of the population and summarizes the
/// genuine/impostor separation.
pub fn evaluate<T: Real>(population: &[LabeledFace], config: &ScoringConfig<T>, threshold: f64) -> Result<EvalReport> {
    let jobs: Vec<(usize, usize)> = (0..population.len())
        .flat_map(|i| ((i + 1)..population.len()).map(move |j| (i, j)))
        .collect();
    let pairs = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&population[i], &population[j]);
            let report = compare(&a.face, &b.face, config)?;
            Ok(ScoredPair {
                a: a.face.id().to_string(),
                b: b.face.id().to_string(),
                label: if a.identity == b.identity { Label::Genuine } else { Label::Impostor },
                delta: report.delta.to_f64_lossy(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_pairs(pairs, threshold)
}
