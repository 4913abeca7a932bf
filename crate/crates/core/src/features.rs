//! Effective-region cropping and grid (zoning) feature extraction.
//!
//! Two extractors share one partition of the glyph's bounding box:
//! per-cell foreground density over a binary image, and per-cell maximum
//! absolute x/y derivative over the grayscale image.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::raster::{BitImage, GrayImage};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("blank image: no foreground pixels")]
    Blank,
    #[error("bounding box {bbox:?} does not fit a {width}x{height} image")]
    BoxOutOfBounds {
        bbox: BoundingBox,
        width: usize,
        height: usize,
    },
}

/// Inclusive, 0-based bounds of the foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub min_x: usize,
    pub max_x: usize,
    pub min_y: usize,
    pub max_y: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.min_x <= self.max_x
            && self.min_y <= self.max_y
            && self.max_x < width
            && self.max_y < height
    }
}

/// Grid partition: `cols` cells across the width, `rows` cells down the height.
///
/// Written `CxR`, so `4x8` is four columns by eight rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    cols: usize,
    rows: usize,
}

impl GridSpec {
    pub fn new(cols: usize, rows: usize) -> Option<Self> {
        (cols >= 1 && rows >= 1).then_some(Self { cols, rows })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cells(&self) -> usize {
        self.cols * self.rows
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.cols, self.rows)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid grid `{s}` (expected CxR, e.g. 4x8)");
        let (c, r) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let cols = c.trim().parse().map_err(|_| bad())?;
        let rows = r.trim().parse().map_err(|_| bad())?;
        GridSpec::new(cols, rows).ok_or_else(bad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    /// Foreground density per cell of the thinned glyph.
    Mean,
    /// Max |d/dx| and max |d/dy| per cell of the grayscale glyph.
    Gradient,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Mean => "mean",
            FeatureKind::Gradient => "gradient",
        }
    }

    /// Features emitted per grid cell.
    pub fn per_cell(self) -> usize {
        match self {
            FeatureKind::Mean => 1,
            FeatureKind::Gradient => 2,
        }
    }

    pub fn feature_len(self, grid: GridSpec) -> usize {
        self.per_cell() * grid.cells()
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(FeatureKind::Mean),
            "gradient" => Ok(FeatureKind::Gradient),
            other => Err(format!(
                "unknown feature kind `{other}` (expected mean or gradient)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub kind: FeatureKind,
    pub grid: GridSpec,
}

impl<T> FeatureVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Half-open cell rectangle in image coordinates. May have zero area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

impl Cell {
    pub fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }
}

/// Tightest box around the foreground.
pub fn effective_region(img: &BitImage) -> Result<BoundingBox, FeatureError> {
    let mut bbox: Option<BoundingBox> = None;
    for (y, row) in img.bits().chunks(img.width()).enumerate() {
        let Some(first) = row.iter().position(|&b| b) else {
            continue;
        };
        let last = row.iter().rposition(|&b| b).unwrap_or(first);
        bbox = Some(match bbox {
            None => BoundingBox {
                min_x: first,
                max_x: last,
                min_y: y,
                max_y: y,
            },
            Some(b) => BoundingBox {
                min_x: b.min_x.min(first),
                max_x: b.max_x.max(last),
                min_y: b.min_y,
                max_y: y,
            },
        });
    }
    bbox.ok_or(FeatureError::Blank)
}

/// Boundaries `round(i * len / parts)` for `i = 0..=parts`, halves rounded up.
pub fn partition_bounds(len: usize, parts: usize) -> Vec<usize> {
    (0..=parts)
        .map(|i| (2 * i * len + parts) / (2 * parts))
        .collect()
}

/// Partitions `bbox` into `cols x rows` cells, row-major from the top-left.
pub fn grid_cells(bbox: &BoundingBox, spec: GridSpec) -> Vec<Cell> {
    let xs = partition_bounds(bbox.width(), spec.cols);
    let ys = partition_bounds(bbox.height(), spec.rows);
    let mut cells = Vec::with_capacity(spec.cells());
    for yw in ys.windows(2) {
        for xw in xs.windows(2) {
            cells.push(Cell {
                x0: bbox.min_x + xw[0],
                x1: bbox.min_x + xw[1],
                y0: bbox.min_y + yw[0],
                y1: bbox.min_y + yw[1],
            });
        }
    }
    cells
}

/// Foreground density of each grid cell over the effective region.
///
/// Zero-area cells yield 0.
pub fn mean_features<T: Scalar>(
    img: &BitImage,
    spec: GridSpec,
) -> Result<FeatureVector<T>, FeatureError> {
    let bbox = effective_region(img)?;
    let values = grid_cells(&bbox, spec)
        .into_iter()
        .map(|cell| {
            let area = cell.area();
            if area == 0 {
                return T::zero();
            }
            let count: usize = (cell.y0..cell.y1)
                .map(|y| (cell.x0..cell.x1).filter(|&x| img.get(x, y)).count())
                .sum();
            T::from_usize_lossy(count) / T::from_usize_lossy(area)
        })
        .collect();
    Ok(FeatureVector {
        values,
        kind: FeatureKind::Mean,
        grid: spec,
    })
}

/// Discrete derivative of `f` along one axis of length `n` at `i`: half-step
/// central difference inside, one-sided difference at the two ends.
#[inline]
fn derivative<T: Scalar>(n: usize, i: usize, f: impl Fn(usize) -> T) -> T {
    if n < 2 {
        T::zero()
    } else if i == 0 {
        f(1) - f(0)
    } else if i == n - 1 {
        f(n - 1) - f(n - 2)
    } else {
        (f(i + 1) - f(i - 1)) * T::half()
    }
}

/// Max absolute x and y derivative per grid cell, computed over the grayscale
/// pixels inside `bbox` only. Output is `[dx0, dy0, dx1, dy1, ...]`.
pub fn gradient_features<T: Scalar>(
    img: &GrayImage<T>,
    bbox: &BoundingBox,
    spec: GridSpec,
) -> Result<FeatureVector<T>, FeatureError> {
    if !bbox.fits(img.width(), img.height()) {
        return Err(FeatureError::BoxOutOfBounds {
            bbox: *bbox,
            width: img.width(),
            height: img.height(),
        });
    }
    let (w, h) = (bbox.width(), bbox.height());
    let at = |x: usize, y: usize| img.get(bbox.min_x + x, bbox.min_y + y);
    let mut dx = Vec::with_capacity(w * h);
    let mut dy = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            dx.push(derivative(w, x, |i| at(i, y)).abs());
            dy.push(derivative(h, y, |j| at(x, j)).abs());
        }
    }

    let mut values = Vec::with_capacity(2 * spec.cells());
    for cell in grid_cells(bbox, spec) {
        let (mut mx, mut my) = (T::zero(), T::zero());
        for y in cell.y0..cell.y1 {
            for x in cell.x0..cell.x1 {
                let i = (y - bbox.min_y) * w + (x - bbox.min_x);
                mx = mx.max(dx[i]);
                my = my.max(dy[i]);
            }
        }
        values.push(mx);
        values.push(my);
    }
    Ok(FeatureVector {
        values,
        kind: FeatureKind::Gradient,
        grid: spec,
    })
}
