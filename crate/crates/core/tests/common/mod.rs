#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use wavemark::motion::{block_distortion, BlockRef, MotionVector};
use wavemark::{ChromaLayout, Frame, Plane};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Sum of a few random low-frequency sinusoids, offset to stay inside [0, 255].
pub fn texture(width: usize, height: usize, seed: u64) -> Plane {
    waves(width, height, seed, 6, 12.0..40.0)
}

fn waves(
    width: usize,
    height: usize,
    seed: u64,
    count: usize,
    periods: std::ops::Range<f64>,
) -> Plane {
    let mut r = rng(seed);
    let amp = 60.0 / (count as f64).sqrt();
    let waves: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            let period = r.random_range(periods.clone());
            let theta: f64 = r.random_range(0.0..std::f64::consts::TAU);
            let k = std::f64::consts::TAU / period;
            (
                k * theta.cos(),
                k * theta.sin(),
                r.random_range(0.0..std::f64::consts::TAU),
                amp * r.random_range(0.5..1.5),
            )
        })
        .collect();
    Plane::from_fn(width, height, |x, y| {
        let v: f64 = waves
            .iter()
            .map(|(kx, ky, ph, a)| a * (kx * x as f64 + ky * y as f64 + ph).sin())
            .sum();
        (128.0 + v).clamp(0.0, 255.0)
    })
}

pub fn noise_plane(width: usize, height: usize, seed: u64) -> Plane {
    let mut r = rng(seed);
    Plane::from_fn(width, height, |_, _| r.random_range(0.0..255.0))
}

pub fn luma_frame(index: usize, luma: Plane) -> Frame {
    Frame::from_luma(index, luma, ChromaLayout::C420)
}

/// `cur(x, y) = src(x + pad - dx, y + pad - dy)`: a `width`×`height` window of
/// `src` displaced by (dx, dy).
pub fn window(src: &Plane, width: usize, height: usize, pad: usize, dx: i32, dy: i32) -> Plane {
    Plane::from_fn(width, height, |x, y| {
        let sx = (x + pad) as i32 - dx;
        let sy = (y + pad) as i32 - dy;
        src.get(sx as usize, sy as usize)
    })
}

/// Exhaustive search over every valid vector with |dx|, |dy| ≤ range.
pub fn full_search_min(reference: &Frame, current: &Frame, block: BlockRef, range: i32) -> f64 {
    let mut best = f64::INFINITY;
    for dy in -range..=range {
        for dx in -range..=range {
            if let Ok(d) = block_distortion(reference, current, block, MotionVector::new(dx, dy)) {
                best = best.min(d);
            }
        }
    }
    best
}

/// A reference/current pair: smooth texture displaced by a random shift,
/// plus light noise.
pub fn random_pair(size: usize, seed: u64) -> (Frame, Frame) {
    let pad = 8;
    let base = texture(size + 2 * pad, size + 2 * pad, seed);
    let mut r = rng(seed ^ 0xABCD);
    let (dx, dy) = (r.random_range(-6..=6), r.random_range(-6..=6));
    let reference = window(&base, size, size, pad, 0, 0);
    let mut current = window(&base, size, size, pad, dx, dy);
    for v in current.data_mut() {
        *v += r.random_range(-3.0..3.0);
    }
    (luma_frame(0, reference), luma_frame(1, current))
}

/// `g(x) + h(y)` with 8 px and 24 px sinusoids on each axis: every 8×8 block
/// spans a full period of the fine component, which gives block matching a
/// single, axis-aligned basin around the true displacement.
pub fn separable_texture(width: usize, height: usize, seed: u64) -> Plane {
    let mut r = rng(seed);
    let phases: Vec<f64> = (0..4)
        .map(|_| r.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let wave = |t: f64, period: f64, phase: f64| (std::f64::consts::TAU * t / period + phase).sin();
    Plane::from_fn(width, height, |x, y| {
        let (x, y) = (x as f64, y as f64);
        128.0
            + 30.0 * (wave(x, 8.0, phases[0]) + wave(x, 24.0, phases[1]))
            + 30.0 * (wave(y, 8.0, phases[2]) + wave(y, 24.0, phases[3]))
    })
}
