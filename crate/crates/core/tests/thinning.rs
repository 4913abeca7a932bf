mod common;

use common::{preserves_components, random_bits, reference_thin};
use gridocr::raster::{thin, thin_with_stats};
use gridocr::BitImage;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(img: &BitImage) {
    let (t, stats) = thin_with_stats(img);
    assert_eq!(thin(&t), t, "not a fixed point:\n{img}");
    assert!(
        img.bits().iter().zip(t.bits()).all(|(&a, &b)| a || !b),
        "thinning added pixels"
    );
    assert!(stats.passes <= img.foreground_count() + 1);
    assert!(
        preserves_components(img, &t),
        "connectivity changed:\n{img}\n->\n{t}"
    );
    assert_eq!(t, reference_thin(img), "differs from reference:\n{img}");
}

#[test]
fn canonical_shapes() {
    let square =
        BitImage::from_fn(16, 16, |x, y| (3..13).contains(&x) && (3..13).contains(&y)).unwrap();
    let line = BitImage::from_ascii(".......\n.#####.\n.......").unwrap();
    let ring = BitImage::from_fn(21, 21, |x, y| {
        let d2 = (x as i32 - 10).pow(2) + (y as i32 - 10).pow(2);
        (36..=81).contains(&d2)
    })
    .unwrap();
    let tiny_square = BitImage::from_ascii("....\n.##.\n.##.\n....").unwrap();
    for img in [&square, &line, &ring, &tiny_square] {
        check(img);
    }

    let t = thin(&ring);
    let holes_before = background_regions(&ring);
    let holes_after = background_regions(&t);
    assert_eq!(holes_before, 2);
    assert_eq!(holes_before, holes_after, "ring lost its hole:\n{t}");

    let t = thin(&square);
    for y in 0..16isize {
        for x in 0..16isize {
            if !t.get_or_bg(x, y) {
                continue;
            }
            let n = [
                (-1, -1),
                (0, -1),
                (1, -1),
                (1, 0),
                (1, 1),
                (0, 1),
                (-1, 1),
                (-1, 0),
            ]
            .iter()
            .filter(|(dx, dy)| t.get_or_bg(x + dx, y + dy))
            .count();
            // only junction pixels may have more than two skeleton neighbors
            assert!(n <= 4, "({x}, {y}) has {n} neighbors\n{t}");
        }
    }
    assert_eq!(thin(&tiny_square).foreground_count(), 1);
}

/// 4-connected background regions, counting the outside once.
fn background_regions(img: &BitImage) -> usize {
    let p = img.padded(1, 1, 1, 1);
    let (w, h) = (p.width(), p.height());
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if p.bits()[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !p.bits()[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

#[test]
fn random_images_seeded() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let density = 0.2 + 0.6 * (i as f64 / 99.0);
        let w = rng.gen_range(1..40);
        let h = rng.gen_range(1..40);
        check(&random_bits(&mut rng, w, h, density));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn thinning_properties(w in 1usize..24, h in 1usize..24, density in 0.05f64..0.95, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = random_bits(&mut rng, w, h, density);
        check(&img);
    }
}
