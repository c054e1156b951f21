//! SSIM and MSE against brute-force reimplementations.

use vmt_core::diff::{mse, mssim, SsimParams};
use vmt_core::image::Image;
use vmt_core::rng::random_image;

mod common;

use common::oracle::naive_mssim;

fn naive_mse(a: &Image, b: &Image) -> f64 {
    let mut total = 0u64;
    for (p, q) in a.pixels().iter().zip(b.pixels()) {
        for c in 0..3 {
            let d = p[c] as i64 - q[c] as i64;
            total += (d * d) as u64;
        }
    }
    total as f64 / (a.pixel_count() * 3) as f64
}

#[test]
fn matches_naive_oracle_on_random_pairs() {
    let p = SsimParams::default();
    for seed in 0..10 {
        let a = random_image(32, 32, 1000 + seed);
        let b = random_image(32, 32, 2000 + seed);
        let fast = mssim(&a, &b, &p).unwrap().mean;
        let slow = naive_mssim(&a, &b);
        assert!((fast - slow).abs() <= 1e-9, "seed {seed}: {fast} vs {slow}");
    }
}

#[test]
fn matches_naive_oracle_on_correlated_pairs() {
    // a lightly perturbed copy keeps the score near one
    let p = SsimParams::default();
    let a = random_image(40, 27, 7);
    let b = Image::from_fn(40, 27, |x, y| a.get(x, y).map(|c| c.saturating_add(((x + y) % 7) as u8)));
    let fast = mssim(&a, &b, &p).unwrap().mean;
    assert!((fast - naive_mssim(&a, &b)).abs() <= 1e-9);
    assert!(fast > 0.5);
}

#[test]
fn constant_black_vs_white_anchor() {
    // variances vanish: SSIM = C1 / (255^2 + C1)
    let expected = 6.5025 / 65031.5025;
    for size in [11, 12, 31] {
        let black = Image::filled(size, size, [0; 3]);
        let white = Image::filled(size, size, [255; 3]);
        let got = mssim(&black, &white, &SsimParams::default()).unwrap().mean;
        assert!((got - expected).abs() <= 1e-8, "{size}: {got}");
    }
}

#[test]
fn mse_matches_integer_summation() {
    for seed in 0..5 {
        let a = random_image(16, 16, seed);
        let b = random_image(16, 16, seed + 100);
        assert!((mse(&a, &b).unwrap() - naive_mse(&a, &b)).abs() <= 1e-9);
    }
    let black = Image::filled(4, 4, [0; 3]);
    let white = Image::filled(4, 4, [255; 3]);
    assert_eq!(mse(&black, &white).unwrap(), 65025.0);
}
