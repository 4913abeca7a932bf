//! Dataset index files: one `relative/path.pgm,label` record per line.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::knn::Digit;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read index {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("index line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate path {0}")]
    DuplicatePath(PathBuf),
    #[error("class {class} has {available} entries, {requested} requested for the test split")]
    Insufficient {
        class: Digit,
        available: usize,
        requested: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    /// Path as written in the index, relative to the dataset base directory
    /// unless absolute.
    pub path: PathBuf,
    pub label: Digit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    base: PathBuf,
    entries: Vec<DatasetEntry>,
}

impl Dataset {
    pub fn new(base: impl Into<PathBuf>, entries: Vec<DatasetEntry>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert(&e.path) {
                return Err(DatasetError::DuplicatePath(e.path.clone()));
            }
        }
        Ok(Dataset {
            base: base.into(),
            entries,
        })
    }

    /// Reads an index file; relative paths resolve against its directory.
    pub fn load(index: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(index).map_err(|source| DatasetError::Io {
            path: index.to_path_buf(),
            source,
        })?;
        let base = index.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: impl Into<PathBuf>) -> Result<Self, DatasetError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| DatasetError::Parse {
                line: i + 1,
                message,
            };
            let (path, label) = line
                .rsplit_once(',')
                .ok_or_else(|| err(format!("expected `path,label`, got `{line}`")))?;
            let label = label.trim();
            let digit = match label.as_bytes() {
                [b @ b'0'..=b'9'] => Digit::new(b - b'0'),
                _ => None,
            }
            .ok_or_else(|| err(format!("label must be a single digit, got `{label}`")))?;
            let path = path.trim();
            if path.is_empty() {
                return Err(err("empty path".into()));
            }
            entries.push(DatasetEntry {
                path: PathBuf::from(path),
                label: digit,
            });
        }
        Self::new(base, entries)
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolve(&self, entry: &DatasetEntry) -> PathBuf {
        self.base.join(&entry.path)
    }

    pub fn class_counts(&self) -> [usize; 10] {
        let mut counts = [0; 10];
        for e in &self.entries {
            counts[e.label.index()] += 1;
        }
        counts
    }

    /// Renders the index with paths relative to `dir`.
    pub fn to_index_string(&self, dir: &Path) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let path = relative_path(&self.resolve(e), dir);
            out.push_str(&path.to_string_lossy());
            out.push(',');
            out.push_str(&e.label.to_string());
            out.push('\n');
        }
        out
    }

    /// Writes the index so that it resolves to the same files from its new location.
    pub fn write_index(&self, index: &Path) -> io::Result<()> {
        let dir = index
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        fs::write(index, self.to_index_string(dir))
    }

    /// Seeded per-class draw of `test_per_class` test entries; everything
    /// else is training data. Both halves keep the original entry order.
    pub fn split(
        &self,
        test_per_class: usize,
        seed: u64,
    ) -> Result<(Dataset, Dataset), DatasetError> {
        let mut by_class: [Vec<usize>; 10] = Default::default();
        for (i, e) in self.entries.iter().enumerate() {
            by_class[e.label.index()].push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut is_test = vec![false; self.entries.len()];
        for (digit, members) in Digit::ALL.iter().zip(by_class.iter_mut()) {
            if test_per_class == 0 {
                continue;
            }
            if members.len() < test_per_class {
                return Err(DatasetError::Insufficient {
                    class: *digit,
                    available: members.len(),
                    requested: test_per_class,
                });
            }
            members.shuffle(&mut rng);
            for &i in &members[..test_per_class] {
                is_test[i] = true;
            }
        }
        let pick = |want: bool| Dataset {
            base: self.base.clone(),
            entries: self
                .entries
                .iter()
                .zip(&is_test)
                .filter(|(_, &t)| t == want)
                .map(|(e, _)| e.clone())
                .collect(),
        };
        Ok((pick(false), pick(true)))
    }
}

fn absolute(p: &Path) -> PathBuf {
    let abs = if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().unwrap_or_default().join(p)
    };
    // resolve symlinks where the path exists, then drop `.` and `..` lexically
    let abs = fs::canonicalize(&abs).unwrap_or(abs);
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

/// `target` expressed relative to directory `dir`.
fn relative_path(target: &Path, dir: &Path) -> PathBuf {
    let target_abs = match target.parent() {
        Some(parent) => absolute(parent).join(target.file_name().unwrap_or_default()),
        None => absolute(target),
    };
    let dir_abs = absolute(dir);
    let t: Vec<_> = target_abs.components().collect();
    let d: Vec<_> = dir_abs.components().collect();
    let common = t.iter().zip(&d).take_while(|(a, b)| a == b).count();
    // sharing only the filesystem root: an absolute path reads better
    if common <= 1 {
        return target_abs;
    }
    let mut rel = PathBuf::new();
    for _ in common..d.len() {
        rel.push("..");
    }
    for c in &t[common..] {
        rel.push(c);
    }
    rel
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(per_class: usize) -> Dataset {
        let mut text = String::from("# header\n\n");
        for d in 0..10 {
            for i in 0..per_class {
                text.push_str(&format!("img/{d}_{i}.pgm,{d}\n"));
            }
        }
        Dataset::parse(&text, "/data").unwrap()
    }

    #[test]
    fn parses_index() {
        let ds = Dataset::parse("# c\na/b.pgm,3\n  c.pgm , 7 \n", "/root").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.entries()[1].path, PathBuf::from("c.pgm"));
        assert_eq!(ds.entries()[1].label, Digit::new(7).unwrap());
        assert_eq!(ds.resolve(&ds.entries()[0]), PathBuf::from("/root/a/b.pgm"));
    }

    #[test]
    fn rejects_bad_records() {
        for (text, line) in [
            ("a.pgm,3\nb.pgm\n", 2),
            ("a.pgm,10\n", 1),
            ("#\n,4\n", 2),
            ("a.pgm,x\n", 1),
        ] {
            match Dataset::parse(text, ".") {
                Err(DatasetError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            Dataset::parse("a.pgm,1\na.pgm,2\n", "."),
            Err(DatasetError::DuplicatePath(_))
        ));
    }

    #[test]
    fn balanced_split_counts() {
        let ds = balanced(200);
        let (train, test) = ds.split(50, 0).unwrap();
        assert_eq!((train.len(), test.len()), (1500, 500));
        assert_eq!(test.class_counts(), [50; 10]);
        let (train, test) = ds.split(0, 0).unwrap();
        assert_eq!((train.len(), test.len()), (2000, 0));
    }

    #[test]
    fn split_is_seeded() {
        let ds = balanced(20);
        assert_eq!(ds.split(5, 42).unwrap(), ds.split(5, 42).unwrap());
        assert_ne!(ds.split(5, 42).unwrap().1, ds.split(5, 43).unwrap().1);
    }

    #[test]
    fn split_reports_short_class() {
        let ds = Dataset::parse("a.pgm,1\nb.pgm,1\nc.pgm,2\n", ".").unwrap();
        match ds.split(1, 0) {
            Err(DatasetError::Insufficient {
                class, available, ..
            }) => {
                assert_eq!((class.get(), available), (0, 0))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relative_paths() {
        assert_eq!(
            relative_path(Path::new("/x/data/img/a.pgm"), Path::new("/x/out")),
            PathBuf::from("../data/img/a.pgm")
        );
        assert_eq!(
            relative_path(Path::new("/x/data/a.pgm"), Path::new("/x/data")),
            PathBuf::from("a.pgm")
        );
        assert_eq!(
            relative_path(Path::new("/x/data/a.pgm"), Path::new("/y/out")),
            PathBuf::from("/x/data/a.pgm")
        );
    }
}
