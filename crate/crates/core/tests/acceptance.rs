//! Acceptance criteria. Run with `--nocapture` to see one PASS/FAIL line each.

mod common;

use std::time::{Duration, Instant};

use common::{corpus_index, digit_like, pad_gray, preserves_components, random_bits};
use gridocr::bench::{random_points, random_vector, run_bench, BenchmarkPlan};
use gridocr::{
    evaluate, extract, grid_cells, linear_scan, load_model, save_model, thin, train, BitImage,
    BoundingBox, Dataset, Digit, EvalOptions, FeatureKind, GrayImage, GridSpec, KdTree,
    LabeledPoint, Model, PipelineConfig, Polarity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPLIT_SEED: u64 = 0;
const TEST_PER_CLASS: usize = 50;

fn report(id: u32, pass: bool, detail: impl AsRef<str>) {
    println!(
        "[{}] criterion {id}: {}",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    assert!(pass, "criterion {id} failed: {}", detail.as_ref());
}

fn light_config(kind: FeatureKind, cols: usize, rows: usize) -> PipelineConfig<f64> {
    PipelineConfig::new(
        kind,
        GridSpec::new(cols, rows).unwrap(),
        3,
        0.5,
        Polarity::LightInk,
    )
    .unwrap()
}

fn corpus_split() -> (Dataset, Dataset) {
    let index = corpus_index();
    let all = Dataset::load(&index)
        .unwrap_or_else(|e| panic!("corpus missing at {}: {e}", index.display()));
    assert_eq!(all.len(), 2000);
    all.split(TEST_PER_CLASS, SPLIT_SEED).unwrap()
}

#[test]
fn c1_oracle_equivalence() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for (n, d) in [(500usize, 32usize), (2000, 8)] {
        for trial in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * d as u64 + trial);
            let points = random_points::<f64>(&mut rng, n, d);
            let tree = KdTree::build(points.clone()).unwrap();
            for _ in 0..100 {
                let q: Vec<f64> = random_vector(&mut rng, d);
                for k in [1, 3, 5] {
                    checked += 1;
                    if tree.knn(&q, k).unwrap() != linear_scan(&points, &q, k).unwrap() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        mismatches == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{checked} kd-tree queries, {mismatches} differ from linear scan, {:.2}s (< 30s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c2_thinning_fixed_point() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut images: Vec<BitImage> = (0..200)
        .map(|i| random_bits(&mut rng, 64, 64, 0.2 + 0.6 * i as f64 / 199.0))
        .collect();
    images.push(
        BitImage::from_fn(32, 32, |x, y| (8..24).contains(&x) && (8..24).contains(&y)).unwrap(),
    );
    images.push(BitImage::from_fn(32, 5, |x, y| y == 2 && (3..29).contains(&x)).unwrap());
    images.push(
        BitImage::from_fn(33, 33, |x, y| {
            let d2 = (x as i32 - 16).pow(2) + (y as i32 - 16).pow(2);
            (64..=196).contains(&d2)
        })
        .unwrap(),
    );
    let mut bad = 0;
    let mut split = 0;
    for img in &images {
        let t = thin(img);
        let subset = img.bits().iter().zip(t.bits()).all(|(&a, &b)| a || !b);
        if thin(&t) != t || !subset {
            bad += 1;
        }
        if !preserves_components(img, &t) {
            split += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        bad == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{} images, {bad} not idempotent or not a subset, {split} with changed connectivity, {:.2}s (< 30s)",
            images.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c3_translation_invariance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let configs = [
        light_config(FeatureKind::Mean, 4, 8),
        light_config(FeatureKind::Gradient, 4, 8),
    ];
    let mut differing = 0;
    for _ in 0..100 {
        let img = digit_like(&mut rng);
        let p: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=20)).collect();
        let padded = pad_gray(&img, p[0], p[1], p[2], p[3], 0.0);
        for cfg in &configs {
            if extract(cfg, &img).unwrap() != extract(cfg, &padded).unwrap() {
                differing += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        3,
        differing == 0 && elapsed < Duration::from_secs(10),
        format!(
            "100 images x 2 kinds, {differing} differ after padding, {:.2}s (< 10s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c4_feature_length_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let img = digit_like(&mut rng);
    let mean = extract(&light_config(FeatureKind::Mean, 4, 8), &img)
        .unwrap()
        .len();
    let gradient = extract(&light_config(FeatureKind::Gradient, 4, 8), &img)
        .unwrap()
        .len();
    report(
        4,
        mean == 32 && gradient == 64,
        format!("4x8 grid: {mean} mean features, {gradient} gradient features"),
    );
}

#[test]
fn c5_grid_tiling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    for _ in 0..50 {
        let (min_x, min_y) = (rng.gen_range(0..20), rng.gen_range(0..20));
        let b = BoundingBox {
            min_x,
            max_x: min_x + rng.gen_range(0..60),
            min_y,
            max_y: min_y + rng.gen_range(0..60),
        };
        let spec = GridSpec::new(rng.gen_range(1..16), rng.gen_range(1..16)).unwrap();
        let cells = grid_cells(&b, spec);
        for y in b.min_y..=b.max_y {
            for x in b.min_x..=b.max_x {
                if cells.iter().filter(|c| c.contains(x, y)).count() != 1 {
                    failures += 1;
                }
            }
        }
        if cells.iter().map(|c| c.area()).sum::<usize>() != b.width() * b.height() {
            failures += 1;
        }
    }
    report(
        5,
        failures == 0,
        format!("50 boxes, {failures} pixels not covered exactly once"),
    );
}

#[test]
fn c6_banded_replication() {
    let (train_set, test_set) = corpus_split();
    assert_eq!((train_set.len(), test_set.len()), (1500, 500));
    let opts = EvalOptions::default();

    let start = Instant::now();
    let mean_model = train(light_config(FeatureKind::Mean, 4, 8), &train_set, 1)
        .unwrap()
        .model;
    let mean = evaluate(&mean_model, &test_set, opts).unwrap();
    let mean_total = start.elapsed();

    let grad_model = train(light_config(FeatureKind::Gradient, 4, 8), &train_set, 1)
        .unwrap()
        .model;
    let grad = evaluate(&grad_model, &test_set, opts).unwrap();

    let margin_pp = (mean.accuracy - grad.accuracy) * 100.0;
    let accuracy_ok = mean.accuracy >= 0.80;
    let ordering_ok = margin_pp >= 3.0;
    let time_ok = mean.seconds < 60.0 && mean_total < Duration::from_secs(60);
    println!(
        "  mean 4x8: {:.1}% in {:.3}s (train+eval {:.2}s); gradient 4x8: {:.1}% in {:.3}s; margin {margin_pp:.1} pp",
        mean.accuracy * 100.0,
        mean.seconds,
        mean_total.as_secs_f64(),
        grad.accuracy * 100.0,
        grad.seconds
    );
    report(
        6,
        accuracy_ok && ordering_ok && time_ok,
        format!(
            "accuracy {:.1}% >= 80% [{}], mean beats gradient by {margin_pp:.1} >= 3 pp [{}], eval {:.3}s < 60s [{}]",
            mean.accuracy * 100.0,
            ok(accuracy_ok),
            ok(ordering_ok),
            mean.seconds,
            ok(time_ok)
        ),
    );
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

#[test]
fn c7_end_to_end_determinism() {
    let plan = BenchmarkPlan::standard(3, 0.5, Polarity::LightInk);
    let run = || {
        let (train_set, test_set) = corpus_split();
        run_bench(&plan, &train_set, &test_set, EvalOptions::default())
    };
    let (a, b) = (run(), run());
    let mut identical = 0;
    for (ra, rb) in a.iter().zip(&b) {
        let (oa, ob) = (ra.outcome.as_ref().unwrap(), rb.outcome.as_ref().unwrap());
        println!(
            "  {:<42} {:>5.1}%  {:.3}s",
            ra.name,
            oa.report.accuracy * 100.0,
            oa.report.seconds
        );
        if oa.report.same_outcome(&ob.report) {
            identical += 1;
        }
    }
    report(
        7,
        a.len() == 5 && identical == a.len(),
        format!(
            "{identical}/{} bench rows identical across two seeded runs",
            a.len()
        ),
    );
}

#[test]
fn c8_pruning_effectiveness() {
    let start = Instant::now();
    let n = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tree = KdTree::build(random_points::<f64>(&mut rng, n, 8)).unwrap();
    let queries = 1000;
    let mut evals = 0usize;
    for _ in 0..queries {
        let q: Vec<f64> = random_vector(&mut rng, 8);
        evals += tree.knn_with_stats(&q, 3).unwrap().1.distance_evals;
    }
    let mean = evals as f64 / queries as f64;
    let elapsed = start.elapsed();
    report(
        8,
        mean < n as f64 / 10.0 && elapsed < Duration::from_secs(60),
        format!(
            "N={n}, d=8, k=3: {mean:.1} distance evaluations per query (< {}), {:.2}s (< 60s)",
            n / 10,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c9_model_round_trip() {
    let (train_set, _) = corpus_split();
    let trained = train(light_config(FeatureKind::Mean, 4, 8), &train_set, 1)
        .unwrap()
        .model;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = light_config(FeatureKind::Gradient, 4, 8);
    let points: Vec<LabeledPoint<f64>> = (0..1500)
        .map(|id| LabeledPoint {
            vector: random_vector(&mut rng, 64),
            label: Digit::new(rng.gen_range(0..10)).unwrap(),
            id,
        })
        .collect();
    let synthetic = Model::new(cfg, points).unwrap();

    let mut good = 0;
    for model in [&trained, &synthetic] {
        let bytes = save_model(model);
        let back = load_model::<f64>(&bytes).unwrap();
        if back == *model && save_model(&back) == bytes && model.points().len() == 1500 {
            good += 1;
        }
    }
    report(
        9,
        good == 2,
        format!("{good}/2 1500-point models round-trip and re-save byte-identically"),
    );
}

#[test]
fn corpus_images_are_28x28() {
    let (train_set, _) = corpus_split();
    let e = &train_set.entries()[0];
    let img: GrayImage<f64> = gridocr::classifier::load_image(&train_set.resolve(e)).unwrap();
    assert_eq!((img.width(), img.height()), (28, 28));
}
