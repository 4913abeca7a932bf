//! Configuration sweeps over a fixed train/test split, and the randomized
//! kd-tree self-check.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{
    evaluate, train, ClassifierError, Dataset, EvalOptions, EvalReport, PipelineConfig,
};
use crate::features::{FeatureKind, GridSpec};
use crate::knn::{linear_scan, Digit, KdTree, KnnError, LabeledPoint, NeighborSet};
use crate::raster::Polarity;
use crate::scalar::Scalar;

/// Ordered, duplicate-free list of configurations to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPlan<T> {
    configs: Vec<PipelineConfig<T>>,
}

impl<T: Scalar> BenchmarkPlan<T> {
    pub fn new(configs: Vec<PipelineConfig<T>>) -> Result<Self, String> {
        if configs.is_empty() {
            return Err("benchmark plan is empty".into());
        }
        for (i, c) in configs.iter().enumerate() {
            if configs[..i].contains(c) {
                return Err(format!("duplicate configuration {} {}", c.kind, c.grid));
            }
        }
        Ok(BenchmarkPlan { configs })
    }

    /// Mean features on 4x4, 8x4, 4x8 and 8x8 grids, then gradient on 4x8.
    pub fn standard(k: usize, threshold: T, polarity: Polarity) -> Self {
        let grids = [(4, 4), (8, 4), (4, 8), (8, 8)];
        let mut configs: Vec<_> = grids
            .iter()
            .map(|&(c, r)| (FeatureKind::Mean, c, r))
            .chain([(FeatureKind::Gradient, 4, 8)])
            .map(|(kind, c, r)| PipelineConfig {
                kind,
                grid: GridSpec::new(c, r).expect("positive grid"),
                k,
                threshold,
                polarity,
            })
            .collect();
        configs.dedup();
        BenchmarkPlan { configs }
    }

    pub fn configs(&self) -> &[PipelineConfig<T>] {
        &self.configs
    }
}

/// Row label in the "C vertical, R horizontal" style, prefixed for gradient rows.
pub fn row_name<T>(config: &PipelineConfig<T>) -> String {
    let base = format!(
        "{} vertical, {} horizontal",
        config.grid.cols(),
        config.grid.rows()
    );
    match config.kind {
        FeatureKind::Mean => base,
        FeatureKind::Gradient => format!("Gradient Based {base}"),
    }
}

#[derive(Debug)]
pub struct BenchRow<T> {
    pub name: String,
    pub config: PipelineConfig<T>,
    pub outcome: Result<BenchOutcome, ClassifierError>,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub report: EvalReport,
    pub train_seconds: f64,
    pub skipped_training: usize,
}

/// Trains and evaluates every configuration. A failing row does not stop
/// the remaining ones.
pub fn run_bench<T: Scalar>(
    plan: &BenchmarkPlan<T>,
    train_set: &Dataset,
    test_set: &Dataset,
    options: EvalOptions,
) -> Vec<BenchRow<T>> {
    plan.configs
        .iter()
        .map(|config| {
            let outcome = (|| {
                let start = Instant::now();
                let trained = train(*config, train_set, options.jobs)?;
                let train_seconds = start.elapsed().as_secs_f64();
                let report = evaluate(&trained.model, test_set, options)?;
                Ok(BenchOutcome {
                    report,
                    train_seconds,
                    skipped_training: trained.skipped.len(),
                })
            })();
            BenchRow {
                name: row_name(config),
                config: *config,
                outcome,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfCheckParams {
    pub seed: u64,
    pub n: usize,
    pub dims: usize,
    pub queries: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch<T> {
    pub query_index: usize,
    pub query: Vec<T>,
    pub tree: NeighborSet<T>,
    pub scan: NeighborSet<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport<T> {
    pub params: SelfCheckParams,
    pub tree_depth: usize,
    pub mean_distance_evals: f64,
    pub max_distance_evals: usize,
    pub build_seconds: f64,
    pub tree_seconds: f64,
    pub scan_seconds: f64,
    pub first_mismatch: Option<Mismatch<T>>,
}

impl<T> SelfCheckReport<T> {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Uniform points in the unit cube with random labels; ids follow generation order.
pub fn random_points<T: Scalar>(rng: &mut impl Rng, n: usize, dims: usize) -> Vec<LabeledPoint<T>> {
    (0..n)
        .map(|id| LabeledPoint {
            vector: random_vector(rng, dims),
            label: Digit::new(rng.gen_range(0..10)).expect("0..10 is a digit"),
            id,
        })
        .collect()
}

pub fn random_vector<T: Scalar>(rng: &mut impl Rng, dims: usize) -> Vec<T> {
    (0..dims)
        .map(|_| T::from_f64_lossy(rng.gen::<f64>()))
        .collect()
}

/// Compares kd-tree answers against [`linear_scan`] on seeded random data.
pub fn selfcheck<T: Scalar>(params: SelfCheckParams) -> Result<SelfCheckReport<T>, KnnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let points = random_points::<T>(&mut rng, params.n, params.dims);
    let queries: Vec<Vec<T>> = (0..params.queries)
        .map(|_| random_vector(&mut rng, params.dims))
        .collect();

    let start = Instant::now();
    let tree = KdTree::build(points.clone())?;
    let build_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut answers = Vec::with_capacity(queries.len());
    let (mut total, mut max) = (0usize, 0usize);
    for q in &queries {
        let (set, stats) = tree.knn_with_stats(q, params.k)?;
        total += stats.distance_evals;
        max = max.max(stats.distance_evals);
        answers.push(set);
    }
    let tree_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut first_mismatch = None;
    for (i, (q, tree_answer)) in queries.iter().zip(answers).enumerate() {
        let scan = linear_scan(&points, q, params.k)?;
        if first_mismatch.is_none() && scan != tree_answer {
            first_mismatch = Some(Mismatch {
                query_index: i,
                query: q.clone(),
                tree: tree_answer,
                scan,
            });
        }
    }
    let scan_seconds = start.elapsed().as_secs_f64();

    Ok(SelfCheckReport {
        params,
        tree_depth: tree.depth(),
        mean_distance_evals: if queries.is_empty() {
            0.0
        } else {
            total as f64 / queries.len() as f64
        },
        max_distance_evals: max,
        build_seconds,
        tree_seconds,
        scan_seconds,
        first_mismatch,
    })
}
