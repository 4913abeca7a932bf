//! `gridocr` command-line interface.
//!
//! Every command writes its results to stdout and diagnostics to stderr, and
//! exits non-zero iff it reported an error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gridocr::bench::{run_bench, selfcheck, BenchmarkPlan, SelfCheckParams};
use gridocr::classifier::load_image;
use gridocr::{
    evaluate, load_model, save_model, train, Dataset, EvalOptions, EvalReport, FeatureKind,
    GridSpec, ModelF64, PipelineConfig, PipelineConfigF64, Polarity, PredictError,
};

#[derive(Debug, Parser)]
#[command(
    name = "gridocr",
    version,
    about = "Handwritten digit recognition with grid features and kd-tree kNN"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seeded per-class train/test split of a dataset index.
    Split(SplitArgs),
    /// Extract features from a dataset and write a model file.
    Train(TrainArgs),
    /// Classify images with a trained model.
    Predict(PredictArgs),
    /// Evaluate a model on a test index.
    Eval(EvalArgs),
    /// Train and evaluate a sweep of configurations on one split.
    Bench(BenchArgs),
    /// Check kd-tree answers against an exhaustive scan on random data.
    Selfcheck(SelfCheckArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Dataset index (`path,label` per line).
    pub index: PathBuf,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub test_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Pipeline flags. `--grid CxR` means C vertical divisions (columns) and R
/// horizontal divisions (rows): `4x8` is the "4 vertical, 8 horizontal" layout.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long, default_value = "mean", value_parser = parse_with::<FeatureKind>)]
    pub features: FeatureKind,
    #[arg(long, default_value = "4x8", value_parser = parse_with::<GridSpec>)]
    pub grid: GridSpec,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Ink polarity of the dataset: `dark` (dark strokes on light) or `light`.
    #[arg(long, value_parser = parse_with::<Polarity>)]
    pub polarity: Polarity,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub index: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub model: PathBuf,
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub model: PathBuf,
    pub test_index: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub train_index: PathBuf,
    pub test_index: PathBuf,
    /// `KIND:CxR`, repeatable (e.g. `mean:4x8`). Defaults to the standard five-row plan.
    #[arg(long = "config", value_parser = parse_plan_entry)]
    pub configs: Vec<(FeatureKind, GridSpec)>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelfCheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

fn parse_with<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_plan_entry(s: &str) -> Result<(FeatureKind, GridSpec), String> {
    let (kind, grid) = s
        .split_once(':')
        .ok_or_else(|| format!("expected KIND:CxR, got `{s}`"))?;
    Ok((kind.parse()?, grid.parse()?))
}

/// Runs a parsed command, returning the process exit status.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Split(a) => cmd_split(&a, out),
        Command::Train(a) => cmd_train(&a, out, err),
        Command::Predict(a) => cmd_predict(&a, out, err),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Selfcheck(a) => cmd_selfcheck(&a, out),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn pipeline_config(
    kind: FeatureKind,
    grid: GridSpec,
    common: &CommonArgs,
) -> Result<PipelineConfigF64> {
    Ok(PipelineConfig::new(
        kind,
        grid,
        common.k,
        common.threshold,
        common.polarity,
    )?)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_split(a: &SplitArgs, out: &mut dyn Write) -> Result<bool> {
    let ds = Dataset::load(&a.index)?;
    let (train_set, test_set) = ds.split(a.test_per_class, a.seed)?;
    train_set
        .write_index(&a.train_out)
        .with_context(|| format!("cannot write {}", a.train_out.display()))?;
    test_set
        .write_index(&a.test_out)
        .with_context(|| format!("cannot write {}", a.test_out.display()))?;
    writeln!(
        out,
        "train={} test={} seed={}",
        train_set.len(),
        test_set.len(),
        a.seed
    )?;
    Ok(true)
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let config = pipeline_config(a.config.features, a.config.grid, &a.config.common)?;
    let ds = Dataset::load(&a.index)?;
    let trained = train(config, &ds, a.config.common.jobs)?;
    for path in &trained.skipped {
        writeln!(
            err,
            "warning: skipped blank training image {}",
            path.display()
        )?;
    }
    write_file(&a.out, &save_model(&trained.model))?;
    writeln!(
        out,
        "n={} d={} skipped_blank={} model={}",
        trained.model.points().len(),
        config.feature_len(),
        trained.skipped.len(),
        a.out.display()
    )?;
    Ok(true)
}

fn read_model(path: &Path) -> Result<ModelF64> {
    let bytes = fs::read(path).with_context(|| format!("cannot read model {}", path.display()))?;
    load_model(&bytes).with_context(|| format!("invalid model {}", path.display()))
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let model = read_model(&a.model)?;
    let mut clean = true;
    for path in &a.images {
        let shown = path.display();
        let outcome =
            load_image::<f64>(path)
                .map_err(|e| e.to_string())
                .and_then(|img| match model.predict(&img) {
                    Ok(p) => Ok(p),
                    Err(PredictError::Blank) => Err("blank".to_string()),
                    Err(e) => Err(e.to_string()),
                });
        match outcome {
            Ok(p) => {
                let distances: Vec<String> =
                    p.neighbors.iter().map(|n| n.distance.to_string()).collect();
                writeln!(out, "{shown} {} {}", p.digit, distances.join(","))?;
            }
            Err(msg) => {
                clean = false;
                if msg == "blank" {
                    writeln!(out, "{shown} ERROR blank")?;
                } else {
                    writeln!(out, "{shown} ERROR unreadable")?;
                    writeln!(err, "error: {msg}")?;
                }
            }
        }
    }
    Ok(clean)
}

fn format_report(report: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "Accuracy {:.1}%  Run time {:.3}s  ({} test, {} train, {} job{})\n\n",
        report.accuracy * 100.0,
        report.seconds,
        report.n_test,
        report.n_train,
        report.jobs,
        if report.jobs == 1 { "" } else { "s" }
    ));
    s.push_str(&report.confusion.to_string());
    s.push('\n');
    for line in report.machine_lines() {
        s.push_str(&line);
        s.push('\n');
    }
    s
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<bool> {
    let model = read_model(&a.model)?;
    let test = Dataset::load(&a.test_index)?;
    let report = evaluate(
        &model,
        &test,
        EvalOptions {
            jobs: a.jobs,
            ..Default::default()
        },
    )?;
    let text = format_report(&report);
    out.write_all(text.as_bytes())?;
    if let Some(path) = &a.out {
        write_file(path, text.as_bytes())?;
    }
    Ok(true)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let plan = if a.configs.is_empty() {
        // rejects bad --k/--threshold before any work starts
        pipeline_config(
            FeatureKind::Mean,
            GridSpec::new(4, 8).expect("positive grid"),
            &a.common,
        )?;
        BenchmarkPlan::standard(a.common.k, a.common.threshold, a.common.polarity)
    } else {
        let configs = a
            .configs
            .iter()
            .map(|&(kind, grid)| pipeline_config(kind, grid, &a.common))
            .collect::<Result<Vec<_>>>()?;
        match BenchmarkPlan::new(configs) {
            Ok(plan) => plan,
            Err(msg) => bail!(msg),
        }
    };
    let train_set = Dataset::load(&a.train_index)?;
    let test_set = Dataset::load(&a.test_index)?;
    let rows = run_bench(
        &plan,
        &train_set,
        &test_set,
        EvalOptions {
            jobs: a.common.jobs,
            ..Default::default()
        },
    );

    let mut text = format!(
        "{:<42} {:>20} {:>17}\n",
        "Name", "Accuracy(percentage)", "Run Time(seconds)"
    );
    let mut machine = Vec::new();
    let mut clean = true;
    for (i, row) in rows.iter().enumerate() {
        let cfg = &row.config;
        match &row.outcome {
            Ok(o) => {
                let r = &o.report;
                text.push_str(&format!(
                    "{:<42} {:>20.1} {:>17.3}\n",
                    row.name,
                    r.accuracy * 100.0,
                    r.seconds
                ));
                let trace = r.confusion.trace();
                machine.push(format!(
                    "row={i} kind={} grid={} k={} accuracy_pct={:.1} runtime_s={:.3} train_s={:.3} n_train={} n_test={} correct={trace} skipped_blank={} jobs={}",
                    cfg.kind, cfg.grid, cfg.k, r.accuracy * 100.0, r.seconds, o.train_seconds, r.n_train, r.n_test, o.skipped_training, r.jobs
                ));
            }
            Err(e) => {
                clean = false;
                text.push_str(&format!("{:<42} {:>20} {:>17}\n", row.name, "ERROR", "-"));
                machine.push(format!(
                    "row={i} kind={} grid={} error={e}",
                    cfg.kind, cfg.grid
                ));
                writeln!(err, "error: {}: {e}", row.name)?;
            }
        }
    }
    text.push('\n');
    for line in machine {
        text.push_str(&line);
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    if let Some(path) = &a.out {
        write_file(path, text.as_bytes())?;
    }
    Ok(clean)
}

fn cmd_selfcheck(a: &SelfCheckArgs, out: &mut dyn Write) -> Result<bool> {
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    if a.k == 0 {
        bail!("--k must be at least 1");
    }
    let params = SelfCheckParams {
        seed: a.seed,
        n: a.n,
        dims: a.d,
        queries: a.queries,
        k: a.k,
    };
    let report = selfcheck::<f64>(params)?;
    writeln!(
        out,
        "n={} d={} queries={} k={} seed={}",
        a.n, a.d, a.queries, a.k, a.seed
    )?;
    writeln!(out, "tree_depth={}", report.tree_depth)?;
    writeln!(out, "mean_distance_evals={:.1}", report.mean_distance_evals)?;
    writeln!(out, "max_distance_evals={}", report.max_distance_evals)?;
    writeln!(
        out,
        "evals_fraction_of_n={:.4}",
        report.mean_distance_evals / a.n as f64
    )?;
    writeln!(
        out,
        "build_s={:.3} tree_query_s={:.3} scan_query_s={:.3}",
        report.build_seconds, report.tree_seconds, report.scan_seconds
    )?;
    match &report.first_mismatch {
        None => {
            writeln!(out, "result=pass")?;
            Ok(true)
        }
        Some(m) => {
            writeln!(out, "result=fail")?;
            writeln!(out, "query_index={}", m.query_index)?;
            let q: Vec<String> = m.query.iter().map(f64::to_string).collect();
            writeln!(out, "query={}", q.join(","))?;
            for (name, set) in [("tree", &m.tree), ("scan", &m.scan)] {
                let items: Vec<String> = set
                    .iter()
                    .map(|n| format!("{}:{}:{}", n.id, n.label, n.distance))
                    .collect();
                writeln!(out, "{name}={}", items.join(","))?;
            }
            Ok(false)
        }
    }
}
