//! Handwritten digit recognition from grid ("zoning") features and a
//! kd-tree k-nearest-neighbor classifier.
//!
//! The pipeline for the density features is binarize → thin → crop to the
//! foreground bounding box → average each grid cell. The gradient variant
//! skips thinning and keeps the largest absolute x and y derivative of each
//! cell instead, giving twice as many features for the same grid.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F32` / `*F64` aliases below name the common instantiations.
//!
//! ```
//! use gridocr::{extract, GrayImageF64, PipelineConfigF64, Polarity};
//!
//! let img = GrayImageF64::from_fn(12, 16, |x, y| if (4..8).contains(&x) && y > 2 { 1.0 } else { 0.0 }).unwrap();
//! let config = PipelineConfigF64::defaults(Polarity::LightInk);
//! assert_eq!(extract(&config, &img).unwrap().len(), 32);
//! ```

pub mod bench;
pub mod classifier;
pub mod features;
pub mod knn;
pub mod raster;
pub mod scalar;

pub use classifier::{
    evaluate, extract, load_model, predict, save_model, train, ClassifierError, ConfusionMatrix,
    Dataset, DatasetEntry, EvalOptions, EvalReport, Model, PipelineConfig, PredictError,
    Prediction, Search, TrainReport,
};
pub use features::{
    effective_region, gradient_features, grid_cells, mean_features, BoundingBox, Cell,
    FeatureError, FeatureKind, FeatureVector, GridSpec,
};
pub use knn::{
    linear_scan, majority_vote, Digit, KdTree, KnnError, LabeledPoint, Neighbor, NeighborSet,
};
pub use raster::{binarize, load_pgm, thin, BitImage, GrayImage, Polarity};
pub use scalar::Scalar;

pub type GrayImageF32 = GrayImage<f32>;
pub type GrayImageF64 = GrayImage<f64>;
pub type FeatureVectorF32 = FeatureVector<f32>;
pub type FeatureVectorF64 = FeatureVector<f64>;
pub type KdTreeF32 = KdTree<f32>;
pub type KdTreeF64 = KdTree<f64>;
pub type PipelineConfigF32 = PipelineConfig<f32>;
pub type PipelineConfigF64 = PipelineConfig<f64>;
pub type ModelF32 = Model<f32>;
pub type ModelF64 = Model<f64>;
