//! Trained model and its line-oriented text format.
//!
//! ```text
//! GRIDOCR 1
//! kind=mean cols=4 rows=8 k=3 threshold=0.5 polarity=light
//! n=2 d=32
//! 7 0 0.25 ...
//! 1 0.5 0 ...
//! ```
//!
//! Row `i` (0-based) becomes the point with id `i`. Values use the shortest
//! decimal form that parses back to the same scalar.

use std::fmt::Write as _;

use thiserror::Error;

use crate::features::{FeatureKind, GridSpec};
use crate::knn::{Digit, KdTree, KnnError, LabeledPoint};
use crate::raster::Polarity;
use crate::scalar::Scalar;

pub const FORMAT_HEADER: &str = "GRIDOCR 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    Threshold(String),
}

/// Everything needed to turn an image into a feature vector and classify it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig<T> {
    pub kind: FeatureKind,
    pub grid: GridSpec,
    pub k: usize,
    pub threshold: T,
    pub polarity: Polarity,
}

impl<T: Scalar> PipelineConfig<T> {
    pub fn new(
        kind: FeatureKind,
        grid: GridSpec,
        k: usize,
        threshold: T,
        polarity: Polarity,
    ) -> Result<Self, ConfigError> {
        let config = PipelineConfig {
            kind,
            grid,
            k,
            threshold,
            polarity,
        };
        config.validate()?;
        Ok(config)
    }

    /// Mean features on a 4x8 grid, k = 3, threshold 0.5.
    pub fn defaults(polarity: Polarity) -> Self {
        PipelineConfig {
            kind: FeatureKind::Mean,
            grid: GridSpec::new(4, 8).expect("positive grid"),
            k: 3,
            threshold: T::half(),
            polarity,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::ZeroK);
        }
        if !(self.threshold > T::zero() && self.threshold < T::one()) {
            return Err(ConfigError::Threshold(self.threshold.to_string()));
        }
        Ok(())
    }

    pub fn feature_len(&self) -> usize {
        self.kind.feature_len(self.grid)
    }

    fn header_line(&self) -> String {
        format!(
            "kind={} cols={} rows={} k={} threshold={} polarity={}",
            self.kind,
            self.grid.cols(),
            self.grid.rows(),
            self.k,
            self.threshold,
            self.polarity
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("model line {line}: {message}")]
pub struct ModelError {
    /// 1-based line number of the offending record.
    pub line: usize,
    pub message: String,
}

impl ModelError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ModelError {
            line,
            message: message.into(),
        }
    }
}

/// Pipeline configuration plus the indexed training vectors.
#[derive(Debug, Clone)]
pub struct Model<T> {
    config: PipelineConfig<T>,
    tree: KdTree<T>,
}

impl<T: Scalar> PartialEq for Model<T> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.points() == other.points()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelBuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("point {id} has {actual} features, the configuration implies {expected}")]
    FeatureLength {
        id: usize,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Index(#[from] KnnError),
}

impl<T: Scalar> Model<T> {
    pub fn new(
        config: PipelineConfig<T>,
        points: Vec<LabeledPoint<T>>,
    ) -> Result<Self, ModelBuildError> {
        config.validate()?;
        let expected = config.feature_len();
        if let Some(p) = points.iter().find(|p| p.vector.len() != expected) {
            return Err(ModelBuildError::FeatureLength {
                id: p.id,
                expected,
                actual: p.vector.len(),
            });
        }
        let tree = KdTree::build(points)?;
        Ok(Model { config, tree })
    }

    pub fn config(&self) -> &PipelineConfig<T> {
        &self.config
    }

    pub fn tree(&self) -> &KdTree<T> {
        &self.tree
    }

    pub fn points(&self) -> &[LabeledPoint<T>] {
        self.tree.points()
    }

    pub fn to_text(&self) -> String {
        let points = self.points();
        let mut out = String::with_capacity(64 + points.len() * self.config.feature_len() * 8);
        out.push_str(FORMAT_HEADER);
        out.push('\n');
        out.push_str(&self.config.header_line());
        out.push('\n');
        let _ = writeln!(out, "n={} d={}", points.len(), self.config.feature_len());
        for p in points {
            let _ = write!(out, "{}", p.label);
            for v in &p.vector {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        if !text.ends_with('\n') {
            let last = text.lines().count().max(1);
            return Err(ModelError::at(last, "missing trailing newline"));
        }
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| ModelError::at(0, format!("truncated before {what}")))
        };

        let (no, header) = next("header")?;
        if header != FORMAT_HEADER {
            return Err(ModelError::at(
                no,
                format!("expected `{FORMAT_HEADER}`, got `{header}`"),
            ));
        }

        let (no, cfg) = next("configuration")?;
        let config = parse_config::<T>(cfg).map_err(|m| ModelError::at(no, m))?;

        let (no, sizes) = next("size line")?;
        let fields = key_values(sizes, &["n", "d"]).map_err(|m| ModelError::at(no, m))?;
        let n: usize = parse_field(&fields[0], "n").map_err(|m| ModelError::at(no, m))?;
        let d: usize = parse_field(&fields[1], "d").map_err(|m| ModelError::at(no, m))?;
        if d != config.feature_len() {
            return Err(ModelError::at(
                no,
                format!(
                    "d={d} but {} {} implies {}",
                    config.kind,
                    config.grid,
                    config.feature_len()
                ),
            ));
        }
        if n == 0 {
            return Err(ModelError::at(no, "model has no points"));
        }

        let mut points = Vec::with_capacity(n);
        for id in 0..n {
            let (no, row) = next("all records").map_err(|_| {
                ModelError::at(
                    3 + id + 1,
                    format!("truncated: expected {n} records, found {id}"),
                )
            })?;
            let mut tokens = row.split(' ');
            let label = tokens
                .next()
                .and_then(|t| t.parse::<u8>().ok())
                .and_then(Digit::new)
                .ok_or_else(|| ModelError::at(no, "record must start with a digit label 0-9"))?;
            let vector = tokens
                .map(|t| {
                    t.parse::<T>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| ModelError::at(no, format!("bad value `{t}`")))
                })
                .collect::<Result<Vec<T>, _>>()?;
            if vector.len() != d {
                return Err(ModelError::at(
                    no,
                    format!("record {id} has {} values, expected {d}", vector.len()),
                ));
            }
            points.push(LabeledPoint { vector, label, id });
        }
        if let Some((no, _)) = lines.next() {
            return Err(ModelError::at(
                no,
                format!("unexpected data after {n} records"),
            ));
        }
        Model::new(config, points).map_err(|e| ModelError::at(2, e.to_string()))
    }
}

pub fn save_model<T: Scalar>(model: &Model<T>) -> Vec<u8> {
    model.to_text().into_bytes()
}

pub fn load_model<T: Scalar>(bytes: &[u8]) -> Result<Model<T>, ModelError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        ModelError::at(line, "not valid UTF-8")
    })?;
    Model::from_text(text)
}

fn key_values(line: &str, keys: &[&str]) -> Result<Vec<String>, String> {
    let parts: Vec<&str> = line.split(' ').collect();
    if parts.len() != keys.len() {
        return Err(format!(
            "expected {} fields ({}), got `{line}`",
            keys.len(),
            keys.join(", ")
        ));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(part, key)| match part.split_once('=') {
            Some((k, v)) if k == *key => Ok(v.to_string()),
            _ => Err(format!("expected `{key}=...`, got `{part}`")),
        })
        .collect()
}

fn parse_field<V: std::str::FromStr>(value: &str, key: &str) -> Result<V, String> {
    value
        .parse()
        .map_err(|_| format!("bad value for {key}: `{value}`"))
}

fn parse_config<T: Scalar>(line: &str) -> Result<PipelineConfig<T>, String> {
    let f = key_values(
        line,
        &["kind", "cols", "rows", "k", "threshold", "polarity"],
    )?;
    let kind: FeatureKind = f[0].parse()?;
    let cols: usize = parse_field(&f[1], "cols")?;
    let rows: usize = parse_field(&f[2], "rows")?;
    let grid = GridSpec::new(cols, rows).ok_or("grid dimensions must be positive")?;
    let k: usize = parse_field(&f[3], "k")?;
    let threshold: T = parse_field(&f[4], "threshold")?;
    let polarity: Polarity = f[5].parse()?;
    PipelineConfig::new(kind, grid, k, threshold, polarity).map_err(|e| e.to_string())
}
