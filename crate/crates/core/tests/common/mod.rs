#![allow(dead_code)]

use std::path::PathBuf;

use gridocr::{BitImage, GrayImage};
use rand::Rng;

pub fn corpus_index() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-2k/index.csv")
}

/// 8-connected component label per pixel (`usize::MAX` for background) and the count.
pub fn components(img: &BitImage) -> (Vec<usize>, usize) {
    let (w, h) = (img.width(), img.height());
    let mut label = vec![usize::MAX; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if !img.bits()[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if img.get_or_bg(x + dx, y + dy) {
                        let q = (y + dy) as usize * w + (x + dx) as usize;
                        if label[q] == usize::MAX {
                            label[q] = count;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// True when every component of `before` holds exactly one component of `after`.
pub fn preserves_components(before: &BitImage, after: &BitImage) -> bool {
    let (outer, n) = components(before);
    let (inner, m) = components(after);
    let mut owner = vec![usize::MAX; m];
    let mut per_outer = vec![0usize; n];
    for (i, &c) in inner.iter().enumerate() {
        if c == usize::MAX {
            continue;
        }
        if outer[i] == usize::MAX {
            return false;
        }
        if owner[c] == usize::MAX {
            owner[c] = outer[i];
            per_outer[outer[i]] += 1;
        }
    }
    per_outer.iter().all(|&k| k == 1)
}

pub fn random_bits(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BitImage {
    BitImage::from_fn(w, h, |_, _| rng.gen_bool(density)).unwrap()
}

/// Light strokes on a black canvas: a few thick segments with soft edges.
pub fn digit_like(rng: &mut impl Rng) -> GrayImage<f64> {
    let (w, h) = (rng.gen_range(20..36), rng.gen_range(24..44));
    let strokes: Vec<_> = (0..rng.gen_range(2..5))
        .map(|_| {
            let p = (
                rng.gen_range(3.0..w as f64 - 3.0),
                rng.gen_range(3.0..h as f64 - 3.0),
            );
            let q = (
                rng.gen_range(3.0..w as f64 - 3.0),
                rng.gen_range(3.0..h as f64 - 3.0),
            );
            (p, q, rng.gen_range(1.0..2.5), rng.gen_range(0.7..1.0))
        })
        .collect();
    GrayImage::from_fn(w, h, |x, y| {
        let (px, py) = (x as f64, y as f64);
        strokes
            .iter()
            .map(|&((ax, ay), (bx, by), radius, ink)| {
                let (dx, dy) = (bx - ax, by - ay);
                let len2 = dx * dx + dy * dy;
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
                };
                let d = ((px - ax - t * dx).powi(2) + (py - ay - t * dy).powi(2)).sqrt();
                ink * (1.0 - (d - radius).max(0.0)).clamp(0.0, 1.0)
            })
            .fold(0.0, f64::max)
    })
    .unwrap()
}

/// Grayscale copy with `value`-filled margins.
pub fn pad_gray(
    img: &GrayImage<f64>,
    l: usize,
    t: usize,
    r: usize,
    b: usize,
    value: f64,
) -> GrayImage<f64> {
    GrayImage::from_fn(img.width() + l + r, img.height() + t + b, |x, y| {
        if x >= l && y >= t && x - l < img.width() && y - t < img.height() {
            img.get(x - l, y - t)
        } else {
            value
        }
    })
    .unwrap()
}

/// Textbook Zhang–Suen on a zero-bordered grid, plus the rule that an
/// isolated 2x2 square keeps its top-left pixel.
pub fn reference_thin(img: &BitImage) -> BitImage {
    let (w, h) = (img.width(), img.height());
    let mut g = vec![vec![0u8; w + 2]; h + 2];
    for y in 0..h {
        for x in 0..w {
            g[y + 1][x + 1] = img.get(x, y) as u8;
        }
    }
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut kill = Vec::new();
            for y in 1..=h {
                for x in 1..=w {
                    if g[y][x] == 0 {
                        continue;
                    }
                    let p = [
                        g[y - 1][x],
                        g[y - 1][x + 1],
                        g[y][x + 1],
                        g[y + 1][x + 1],
                        g[y + 1][x],
                        g[y + 1][x - 1],
                        g[y][x - 1],
                        g[y - 1][x - 1],
                    ];
                    let b: u8 = p.iter().sum();
                    let a = (0..8).filter(|&i| p[i] == 0 && p[(i + 1) % 8] == 1).count();
                    let (c1, c2) = if step == 0 {
                        (p[0] * p[2] * p[4], p[2] * p[4] * p[6])
                    } else {
                        (p[0] * p[2] * p[6], p[0] * p[4] * p[6])
                    };
                    if (2..=6).contains(&b) && a == 1 && c1 == 0 && c2 == 0 {
                        let square_origin = b == 3
                            && p[2] == 1
                            && p[3] == 1
                            && p[4] == 1
                            && (y + 2 > h + 1
                                || (x - 1..=x + 2).all(|xx| xx > w + 1 || g[y + 2][xx] == 0))
                            && (x + 2 > w + 1
                                || (y - 1..=y + 2).all(|yy| yy > h + 1 || g[yy][x + 2] == 0))
                            && (x - 1..=x + 2).all(|xx| xx > w + 1 || g[y - 1][xx] == 0)
                            && (y - 1..=y + 2).all(|yy| yy > h + 1 || g[yy][x - 1] == 0);
                        if !square_origin {
                            kill.push((x, y));
                        }
                    }
                }
            }
            for &(x, y) in &kill {
                g[y][x] = 0;
            }
            changed |= !kill.is_empty();
        }
        if !changed {
            break;
        }
    }
    BitImage::from_fn(w, h, |x, y| g[y + 1][x + 1] == 1).unwrap()
}
