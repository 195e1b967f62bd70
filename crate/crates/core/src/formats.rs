//! JSON documents: face files, pair manifests and calibrated models.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::calibration::CalibrationState;
use crate::features::FaceInput;
use crate::fuzzymath::MembershipKernel;
use crate::geometry::Point;
use crate::silhouette::AlphaMode;
use crate::synthbench::Label;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unparsable document: {0}")]
    Parse(String),
    #[error("unsupported version {found} (expected {FORMAT_VERSION})")]
    Version { found: String },
    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

/// On-disk form of a [`FaceInput`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceInputFile {
    pub version: u64,
    pub id: String,
    pub image: ImageSize,
    pub landmarks: BTreeMap<String, Point>,
    pub outline: Vec<Point>,
}

impl From<&FaceInput> for FaceInputFile {
    fn from(face: &FaceInput) -> Self {
        Self {
            version: FORMAT_VERSION,
            id: face.id().to_string(),
            image: ImageSize {
                width: face.width(),
                height: face.height(),
            },
            landmarks: face.landmarks().clone(),
            outline: face.outline().to_vec(),
        }
    }
}

impl TryFrom<FaceInputFile> for FaceInput {
    type Error = crate::Error;

    fn try_from(file: FaceInputFile) -> crate::Result<Self> {
        FaceInput::new(file.id, file.image.width, file.image.height, file.landmarks, file.outline)
    }
}

fn read(path: &Path) -> FormatResult<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses JSON and checks the `version` field before the schema.
fn parse_versioned<T: for<'de> Deserialize<'de>>(text: &str) -> FormatResult<T> {
    let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    match value.get("version") {
        None => return Err(FormatError::Parse("missing field `version`".into())),
        Some(v) if v.as_u64() == Some(FORMAT_VERSION) => {}
        Some(v) => return Err(FormatError::Version { found: v.to_string() }),
    }
    serde_json::from_value(value).map_err(|e| FormatError::Parse(e.to_string()))
}

pub fn parse_face(text: &str) -> FormatResult<FaceInput> {
    let file: FaceInputFile = parse_versioned(text)?;
    Ok(FaceInput::try_from(file)?)
}

pub fn load_face(path: impl AsRef<Path>) -> FormatResult<FaceInput> {
    let path = path.as_ref();
    parse_face(&read(path)?).map_err(|e| match e {
        FormatError::Parse(msg) => FormatError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Pretty JSON with a trailing newline. Floats use shortest round-trip
/// formatting, so reloading gives bit-identical coordinates.
pub fn face_to_json(face: &FaceInput) -> String {
    to_json(&FaceInputFile::from(face))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize infallibly");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPair {
    pub a: PathBuf,
    pub b: PathBuf,
    pub label: Label,
}

/// Ordered list of labelled face pairs. Relative paths are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u64,
    pub pairs: Vec<ManifestPair>,
}

impl Manifest {
    pub fn new(pairs: Vec<ManifestPair>) -> Self {
        Self {
            version: FORMAT_VERSION,
            pairs,
        }
    }

    pub fn parse(text: &str) -> FormatResult<Self> {
        parse_versioned(text)
    }

    /// Loads the manifest and resolves every pair path against its directory.
    pub fn load(path: impl AsRef<Path>) -> FormatResult<Self> {
        let path = path.as_ref();
        let mut manifest = Self::parse(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for pair in &mut manifest.pairs {
            pair.a = base.join(&pair.a);
            pair.b = base.join(&pair.b);
        }
        Ok(manifest)
    }
}

/// A calibrated constant together with the scoring settings it was trained
/// under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub n: u64,
    pub skipped: u64,
    pub alpha_mode: AlphaMode,
    pub kernel: MembershipKernel<f64>,
}

impl ModelFile {
    pub fn from_state(
        state: &CalibrationState<f64>,
        alpha_mode: AlphaMode,
        kernel: MembershipKernel<f64>,
    ) -> crate::Result<Self> {
        Ok(Self {
            k: state.finalize()?,
            k1: state.k1,
            k2: state.k2,
            n: state.n,
            skipped: state.skipped,
            alpha_mode,
            kernel,
        })
    }

    pub fn parse(text: &str) -> FormatResult<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
        if !(0.0..=1.0).contains(&model.k) {
            return Err(crate::Error::OutOfRange {
                name: "k",
                value: model.k,
                lo: 0.0,
                hi: 1.0,
            }
            .into());
        }
        model.kernel.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> FormatResult<Self> {
        Self::parse(&read(path.as_ref())?)
    }
}
