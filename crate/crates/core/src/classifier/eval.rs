use std::fmt;

use crate::knn::Digit;

/// Column index used for images rejected as blank.
pub const BLANK_COLUMN: usize = 10;

/// Counts indexed by `[true class][predicted class]`, with an eleventh
/// column for blank rejections so every row sums to the class test count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[usize; 11]; 10],
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: Digit, predicted: Option<Digit>) {
        let col = predicted.map_or(BLANK_COLUMN, Digit::index);
        self.counts[truth.index()][col] += 1;
    }

    pub fn get(&self, truth: Digit, column: usize) -> usize {
        self.counts[truth.index()][column]
    }

    pub fn row(&self, truth: Digit) -> &[usize; 11] {
        &self.counts[truth.index()]
    }

    pub fn rows(&self) -> &[[usize; 11]; 10] {
        &self.counts
    }

    pub fn row_sum(&self, truth: Digit) -> usize {
        self.row(truth).iter().sum()
    }

    pub fn trace(&self) -> usize {
        (0..10).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn blanks(&self) -> usize {
        self.counts.iter().map(|r| r[BLANK_COLUMN]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }
}

/// Result of classifying a whole test set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Wall time of feature extraction and search over the whole test set.
    pub seconds: f64,
    pub confusion: ConfusionMatrix,
    /// Prediction per test entry in index order; `None` for blank images.
    pub predictions: Vec<Option<Digit>>,
    pub n_train: usize,
    pub n_test: usize,
    pub jobs: usize,
}

impl EvalReport {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &EvalReport) -> bool {
        self.accuracy == other.accuracy
            && self.confusion == other.confusion
            && self.predictions == other.predictions
            && self.n_train == other.n_train
            && self.n_test == other.n_test
    }

    /// `key=value` lines; confusion rows list the ten predicted classes then blanks.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("accuracy_pct={:.1}", self.accuracy * 100.0),
            format!("accuracy={}", self.accuracy),
            format!("runtime_s={:.3}", self.seconds),
            format!("n_train={}", self.n_train),
            format!("n_test={}", self.n_test),
            format!("correct={}", self.confusion.trace()),
            format!("blank={}", self.confusion.blanks()),
            format!("jobs={}", self.jobs),
        ];
        for d in Digit::ALL {
            let row: Vec<String> = self.confusion.row(d).iter().map(usize::to_string).collect();
            out.push(format!("confusion_{d}={}", row.join(",")));
        }
        out
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "true\\pred")?;
        for d in 0..10 {
            write!(f, "{d:>5}")?;
        }
        writeln!(f, "{:>7}", "blank")?;
        for (d, row) in self.counts.iter().enumerate() {
            write!(f, "{d:>9}")?;
            for c in &row[..10] {
                write!(f, "{c:>5}")?;
            }
            writeln!(f, "{:>7}", row[BLANK_COLUMN])?;
        }
        Ok(())
    }
}
