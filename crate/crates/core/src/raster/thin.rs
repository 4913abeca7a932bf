//! Zhang–Suen thinning iterated to a fixed point.

use super::BitImage;

/// Counters from a thinning run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ThinStats {
    /// Full passes (both subiterations), including the final pass that changed nothing.
    pub passes: usize,
    pub removed: usize,
}

/// Thins `img` to a one-pixel-wide skeleton.
///
/// Pixels outside the image are background. The result is a fixed point:
/// thinning it again returns it unchanged.
pub fn thin(img: &BitImage) -> BitImage {
    thin_with_stats(img).0
}

pub fn thin_with_stats(img: &BitImage) -> (BitImage, ThinStats) {
    let mut out = img.clone();
    let mut stats = ThinStats::default();
    let mut marked = Vec::new();
    loop {
        stats.passes += 1;
        let mut removed = 0;
        for step in [Subiteration::First, Subiteration::Second] {
            collect_deletable(&out, step, &mut marked);
            spare_isolated_squares(&out, &mut marked);
            for &(x, y) in &marked {
                out.set(x, y, false);
            }
            removed += marked.len();
        }
        if removed == 0 {
            break;
        }
        stats.removed += removed;
    }
    (out, stats)
}

#[derive(Clone, Copy)]
enum Subiteration {
    First,
    Second,
}

/// Neighbors P2..P9, clockwise from north.
#[inline]
fn neighbors(img: &BitImage, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    [
        img.get_or_bg(x, y - 1),
        img.get_or_bg(x + 1, y - 1),
        img.get_or_bg(x + 1, y),
        img.get_or_bg(x + 1, y + 1),
        img.get_or_bg(x, y + 1),
        img.get_or_bg(x - 1, y + 1),
        img.get_or_bg(x - 1, y),
        img.get_or_bg(x - 1, y - 1),
    ]
}

fn collect_deletable(img: &BitImage, step: Subiteration, marked: &mut Vec<(usize, usize)>) {
    marked.clear();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) && deletable(&neighbors(img, x, y), step) {
                marked.push((x, y));
            }
        }
    }
}

/// Both subiterations delete every pixel of an isolated 2x2 square, which
/// would erase that component. Keep its top-left pixel instead.
fn spare_isolated_squares(img: &BitImage, marked: &mut Vec<(usize, usize)>) {
    marked.retain(|&(x, y)| !is_isolated_square_origin(img, x, y));
}

fn is_isolated_square_origin(img: &BitImage, x: usize, y: usize) -> bool {
    let (x, y) = (x as isize, y as isize);
    for dy in -1..=2 {
        for dx in -1..=2 {
            let inside = (0..=1).contains(&dx) && (0..=1).contains(&dy);
            if img.get_or_bg(x + dx, y + dy) != inside {
                return false;
            }
        }
    }
    true
}

#[inline]
fn deletable(n: &[bool; 8], step: Subiteration) -> bool {
    let [p2, p3, p4, p5, p6, p7, p8, p9] = *n;
    let count = n.iter().filter(|&&b| b).count();
    if !(2..=6).contains(&count) {
        return false;
    }
    // number of background-to-foreground transitions in P2, P3, ..., P9, P2
    let seq = [p2, p3, p4, p5, p6, p7, p8, p9, p2];
    let transitions = seq.windows(2).filter(|w| !w[0] && w[1]).count();
    if transitions != 1 {
        return false;
    }
    match step {
        Subiteration::First => !(p2 && p4 && p6) && !(p4 && p6 && p8),
        Subiteration::Second => !(p2 && p4 && p8) && !(p2 && p6 && p8),
    }
}
