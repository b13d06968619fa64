//! Deterministic synthetic test clips.
//!
//! Each clip is a low-detail scene: a slowly evolving smooth background, a
//! shaded subject near the frame center (a tilted plane inside a soft-edged
//! disc) and a global brightness flicker between consecutive frames, which
//! block matching cannot compensate, so most blocks count as motion blocks.

use crate::pipeline::Clip;
use crate::video_io::{ChromaLayout, Frame, FrameRate, FrameSequence, Plane};

pub const CLIP_WIDTH: usize = 176;
pub const CLIP_HEIGHT: usize = 144;
pub const CLIP_FRAMES: usize = 30;

fn hash(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Lattice value in [-1, 1].
fn lattice(seed: u64, i: i64, j: i64, k: i64) -> f64 {
    let h = hash(seed ^ hash(i as u64 ^ hash(j as u64 ^ hash(k as u64))));
    (h >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Smoothly interpolated 3-D value noise in [-1, 1].
pub fn value_noise(seed: u64, x: f64, y: f64, z: f64) -> f64 {
    let (x0, y0, z0) = (x.floor(), y.floor(), z.floor());
    let (fx, fy, fz) = (smoothstep(x - x0), smoothstep(y - y0), smoothstep(z - z0));
    let (i, j, k) = (x0 as i64, y0 as i64, z0 as i64);
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let plane = |k: i64| {
        let top = lerp(lattice(seed, i, j, k), lattice(seed, i + 1, j, k), fx);
        let bottom = lerp(
            lattice(seed, i, j + 1, k),
            lattice(seed, i + 1, j + 1, k),
            fx,
        );
        lerp(top, bottom, fy)
    };
    lerp(plane(k), plane(k + 1), fz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    /// Shading direction of the subject turns by this many degrees per frame.
    Rotate(f64),
    /// Subject swings horizontally at this many pixels per frame.
    Swing(f64),
    /// Shading slope pulses by this relative amount.
    Pulse(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipSpec {
    pub name: String,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub motion: Motion,
    /// Radius of the subject's flat-topped weight and width of its soft edge.
    pub subject_radius: f64,
    pub subject_edge: f64,
    /// Luma change per pixel across the subject.
    pub subject_slope: f64,
    pub background_scale: f64,
    pub background_rate: f64,
    pub background_amplitude: f64,
    /// Frames alternate between +flicker and -flicker brightness.
    pub flicker: f64,
    /// Round luma to integers as an 8-bit source would.
    pub integer: bool,
}

impl ClipSpec {
    pub fn new(name: &str, seed: u64, motion: Motion) -> Self {
        ClipSpec {
            name: name.to_string(),
            seed,
            width: CLIP_WIDTH,
            height: CLIP_HEIGHT,
            frames: CLIP_FRAMES,
            motion,
            subject_radius: 12.0,
            subject_edge: 16.0,
            subject_slope: 2.0,
            background_scale: 96.0,
            background_rate: 0.05,
            background_amplitude: 12.0,
            flicker: 6.0,
            integer: false,
        }
    }

    fn luma(&self, t: usize) -> Plane {
        let tf = t as f64;
        let bg_seed = hash(self.seed);
        let phase = lattice(self.seed, 1, 2, 3) * std::f64::consts::PI;
        let sign = if t.is_multiple_of(2) { 1.0 } else { -1.0 };
        let (mut cx, cy) = (self.width as f64 / 2.0, self.height as f64 / 2.0);
        let (mut angle, mut slope) = (phase, self.subject_slope);
        match self.motion {
            Motion::Rotate(deg) => angle += (deg * tf).to_radians(),
            Motion::Swing(speed) => {
                let amp = 4.0 * speed;
                let p = (tf * speed) % (4.0 * amp);
                cx += if p < 2.0 * amp {
                    p - amp
                } else {
                    3.0 * amp - p
                };
            }
            Motion::Pulse(depth) => slope *= 1.0 + depth * (0.7 * tf).sin(),
        }
        let (sa, ca) = angle.sin_cos();
        Plane::from_fn(self.width, self.height, |x, y| {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let bg = self.background_amplitude
                * value_noise(
                    bg_seed,
                    px / self.background_scale,
                    py / self.background_scale,
                    tf * self.background_rate,
                );
            let (dx, dy) = (px - cx, py - cy);
            let weight = 1.0 - smoothstep((dx.hypot(dy) - self.subject_radius) / self.subject_edge);
            let shade = slope * (ca * dx + sa * dy);
            let value = (128.0 + sign * self.flicker + bg + weight * shade).clamp(0.0, 255.0);
            if self.integer {
                value.round()
            } else {
                value
            }
        })
    }

    pub fn render(&self) -> FrameSequence {
        let frames = (0..self.frames)
            .map(|t| Frame::from_luma(t, self.luma(t), ChromaLayout::C420))
            .collect();
        FrameSequence::new(frames, FrameRate::default(), format!("synth:{}", self.name))
    }

    pub fn clip(&self) -> Clip {
        Clip {
            name: self.name.clone(),
            video: self.render(),
        }
    }
}

/// The bundled clip set used by the evaluation and the acceptance tests.
pub fn bundled_specs() -> Vec<ClipSpec> {
    vec![
        ClipSpec::new("orbit", 11, Motion::Rotate(9.0)),
        ClipSpec::new("swing", 23, Motion::Swing(3.0)),
        ClipSpec::new("pulse", 37, Motion::Pulse(0.3)),
    ]
}

pub fn bundled_clips() -> Vec<Clip> {
    bundled_specs().iter().map(ClipSpec::clip).collect()
}
