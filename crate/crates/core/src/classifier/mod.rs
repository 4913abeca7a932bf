//! End-to-end pipeline: feature extraction, training, prediction and evaluation.

mod dataset;
mod eval;
mod model;

pub use dataset::{Dataset, DatasetEntry, DatasetError};
pub use eval::{ConfusionMatrix, EvalReport, BLANK_COLUMN};
pub use model::{
    load_model, save_model, ConfigError, Model, ModelBuildError, ModelError, PipelineConfig,
    FORMAT_HEADER,
};

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::features::{
    effective_region, gradient_features, mean_features, FeatureError, FeatureKind, FeatureVector,
};
use crate::knn::{linear_scan, majority_vote, Digit, KnnError, LabeledPoint, NeighborSet};
use crate::raster::{binarize, load_pgm, thin, GrayImage, PgmError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Pgm { path: PathBuf, source: PgmError },
    #[error("{path}: blank image")]
    Blank { path: PathBuf },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("every training image is blank")]
    AllBlank,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] ModelBuildError),
    #[error(transparent)]
    Search(#[from] KnnError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("blank image")]
    Blank,
    #[error(transparent)]
    Features(FeatureError),
    #[error(transparent)]
    Search(#[from] KnnError),
}

impl From<FeatureError> for PredictError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Blank => PredictError::Blank,
            other => PredictError::Features(other),
        }
    }
}

/// Neighbor search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Search {
    #[default]
    KdTree,
    /// Exhaustive scan; same answers, used as a reference.
    LinearScan,
}

/// Mean path: binarize, thin, crop, pool. Gradient path: binarize, crop,
/// then take derivatives of the grayscale pixels (no thinning).
pub fn extract<T: Scalar>(
    config: &PipelineConfig<T>,
    img: &GrayImage<T>,
) -> Result<FeatureVector<T>, FeatureError> {
    let bits = binarize(img, config.threshold, config.polarity);
    match config.kind {
        FeatureKind::Mean => mean_features(&thin(&bits), config.grid),
        FeatureKind::Gradient => {
            let bbox = effective_region(&bits)?;
            gradient_features(img, &bbox, config.grid)
        }
    }
}

pub fn load_image<T: Scalar>(path: &Path) -> Result<GrayImage<T>, ClassifierError> {
    let bytes = fs::read(path).map_err(|source| ClassifierError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_pgm(&bytes).map_err(|source| ClassifierError::Pgm {
        path: path.to_path_buf(),
        source,
    })
}

/// Maps `f` over `items` on `jobs` threads, keeping input order.
fn ordered_map<I, O, F>(items: &[I], jobs: usize, f: F) -> Result<Vec<O>, ClassifierError>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ClassifierError::Pool(e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

#[derive(Debug, Clone)]
pub struct TrainReport<T> {
    pub model: Model<T>,
    /// Training images skipped because they had no foreground.
    pub skipped: Vec<PathBuf>,
}

/// Extracts features for every entry and indexes them. Point ids follow
/// dataset order among the non-blank images.
pub fn train<T: Scalar>(
    config: PipelineConfig<T>,
    data: &Dataset,
    jobs: usize,
) -> Result<TrainReport<T>, ClassifierError> {
    config.validate().map_err(ModelBuildError::from)?;
    if data.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let features = ordered_map(data.entries(), jobs, |entry| {
        let path = data.resolve(entry);
        let img = load_image::<T>(&path)?;
        Ok::<_, ClassifierError>((path, extract(&config, &img)))
    })?;

    let mut points = Vec::with_capacity(data.len());
    let mut skipped = Vec::new();
    for (entry, result) in data.entries().iter().zip(features) {
        let (path, features) = result?;
        match features {
            Ok(fv) => points.push(LabeledPoint {
                vector: fv.values,
                label: entry.label,
                id: points.len(),
            }),
            Err(FeatureError::Blank) => skipped.push(path),
            Err(e) => unreachable!("feature extraction on a cropped box: {e}"),
        }
    }
    if points.is_empty() {
        return Err(ClassifierError::AllBlank);
    }
    Ok(TrainReport {
        model: Model::new(config, points)?,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub digit: Digit,
    pub neighbors: NeighborSet<T>,
}

impl<T: Scalar> Model<T> {
    pub fn predict(&self, img: &GrayImage<T>) -> Result<Prediction<T>, PredictError> {
        self.predict_with(img, Search::KdTree)
    }

    pub fn predict_with(
        &self,
        img: &GrayImage<T>,
        search: Search,
    ) -> Result<Prediction<T>, PredictError> {
        let fv = extract(self.config(), img)?;
        self.classify(&fv.values, search)
    }

    /// Classifies an already extracted feature vector.
    pub fn classify(&self, features: &[T], search: Search) -> Result<Prediction<T>, PredictError> {
        let k = self.config().k;
        let neighbors = match search {
            Search::KdTree => self.tree().knn(features, k)?,
            Search::LinearScan => linear_scan(self.points(), features, k)?,
        };
        let digit = majority_vote(&neighbors).expect("a built index is never empty");
        Ok(Prediction { digit, neighbors })
    }
}

pub fn predict<T: Scalar>(
    model: &Model<T>,
    img: &GrayImage<T>,
) -> Result<Prediction<T>, PredictError> {
    model.predict(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub jobs: usize,
    pub search: Search,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            jobs: 1,
            search: Search::KdTree,
        }
    }
}

/// Classifies every test entry. Images are read up front; the reported time
/// covers feature extraction and search for the whole set. Blank images
/// count as wrong and land in the blank column of the confusion matrix.
pub fn evaluate<T: Scalar>(
    model: &Model<T>,
    test: &Dataset,
    options: EvalOptions,
) -> Result<EvalReport, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let images = ordered_map(test.entries(), options.jobs, |e| {
        load_image::<T>(&test.resolve(e))
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let start = Instant::now();
    let outcomes = ordered_map(&images, options.jobs, |img| {
        match model.predict_with(img, options.search) {
            Ok(p) => Ok(Some(p.digit)),
            Err(PredictError::Blank) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let seconds = start.elapsed().as_secs_f64();

    let mut confusion = ConfusionMatrix::default();
    let mut predictions = Vec::with_capacity(outcomes.len());
    for (entry, outcome) in test.entries().iter().zip(outcomes) {
        let predicted = match outcome {
            Ok(p) => p,
            Err(PredictError::Search(e)) => return Err(e.into()),
            Err(e) => unreachable!("{e}"),
        };
        confusion.record(entry.label, predicted);
        predictions.push(predicted);
    }
    Ok(EvalReport {
        accuracy: confusion.accuracy(),
        seconds,
        confusion,
        predictions,
        n_train: model.points().len(),
        n_test: test.len(),
        jobs: options.jobs.max(1),
    })
}
