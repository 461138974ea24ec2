//! Deterministic synthetic covers.
//!
//! Everything is driven by a seeded ChaCha8 stream, so a seed reproduces a
//! corpus byte for byte on every platform.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FixtureKind {
    Constant,
    Gradient,
    Uniform,
    /// Solid 0 and 255 blobs over a smooth textured background.
    ClusteredBlobs,
    /// Isolated 0/255 impulses over a smooth background.
    ScatteredSalt,
    /// Dark scene with sensor noise, clipped at 0.
    LowLight,
    /// Bright scene with sensor noise, clipped at 255.
    HighKey,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 7] = [
        FixtureKind::Constant,
        FixtureKind::Gradient,
        FixtureKind::Uniform,
        FixtureKind::ClusteredBlobs,
        FixtureKind::ScatteredSalt,
        FixtureKind::LowLight,
        FixtureKind::HighKey,
    ];

    /// Kinds whose covers are dominated by saturated regions.
    pub const BOUNDARY_HEAVY: [FixtureKind; 3] =
        [FixtureKind::ClusteredBlobs, FixtureKind::LowLight, FixtureKind::HighKey];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Constant => "constant",
            FixtureKind::Gradient => "gradient",
            FixtureKind::Uniform => "uniform",
            FixtureKind::ClusteredBlobs => "blobs",
            FixtureKind::ScatteredSalt => "salt",
            FixtureKind::LowLight => "lowlight",
            FixtureKind::HighKey => "highkey",
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub kind: FixtureKind,
    pub image: GrayImage,
    /// Fraction of the area the generator aimed to saturate, where the
    /// kind has such a knob.
    pub target_boundary_fraction: Option<f64>,
}

/// Separable Gaussian blur of a float field, edges clamped.
fn blur(field: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let at = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                acc += kv * field[r * w + at(c as isize + k as isize - radius, w)];
            }
            tmp[r * w + c] = acc / norm;
        }
    }
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                acc += kv * tmp[at(r as isize + k as isize - radius, h) * w + c];
            }
            out[r * w + c] = acc / norm;
        }
    }
    out
}

/// Smooth zero-mean, unit-variance random field.
fn smooth_field(rng: &mut ChaCha8Rng, w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let white: Vec<f64> = (0..w * h).map(|_| normal.sample(rng)).collect();
    let mut f = blur(&white, w, h, sigma);
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let sd = (f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-12);
    f.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    f
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Value below which a fraction `q` of `values` falls.
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = ((sorted.len() as f64 * q) as usize).min(sorted.len() - 1);
    sorted[idx]
}

/// Textured mid-tone background in roughly `[40, 215]`.
fn background(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<f64> {
    let scale = (w.min(h) as f64 / 8.0).max(1.0);
    let coarse = smooth_field(rng, w, h, scale);
    let fine = smooth_field(rng, w, h, 1.0);
    coarse.iter().zip(&fine).map(|(a, b)| 128.0 + 30.0 * a + 6.0 * b).collect()
}

pub fn generate(kind: FixtureKind, w: usize, h: usize, rng: &mut ChaCha8Rng) -> (GrayImage, Option<f64>) {
    let noise = |rng: &mut ChaCha8Rng, sd: f64| Normal::new(0.0, sd).unwrap().sample(rng);
    match kind {
        FixtureKind::Constant => {
            let v = match rng.random_range(0..4) {
                0 => 0,
                1 => 255,
                _ => rng.random(),
            };
            (GrayImage::filled(w, h, v).unwrap(), None)
        }
        FixtureKind::Gradient => {
            let (a, b) = (rng.random_range(-1.0..1.0f64), rng.random_range(-1.0..1.0f64));
            let span = (a.abs() * (w.max(2) - 1) as f64 + b.abs() * (h.max(2) - 1) as f64).max(1e-9);
            let lo = if a < 0.0 { -a * (w - 1) as f64 } else { 0.0 } + if b < 0.0 { -b * (h - 1) as f64 } else { 0.0 };
            let img =
                GrayImage::from_fn(w, h, |r, c| to_u8(255.0 * (a * c as f64 + b * r as f64 + lo) / span)).unwrap();
            (img, None)
        }
        FixtureKind::Uniform => (GrayImage::from_fn(w, h, |_, _| rng.random()).unwrap(), None),
        FixtureKind::ClusteredBlobs => {
            let fraction = rng.random_range(0.35..0.6);
            let sigma = (w.min(h) as f64 / rng.random_range(6.0..14.0)).max(1.0);
            let field = smooth_field(rng, w, h, sigma);
            let bg = background(rng, w, h);
            let dark_share = rng.random_range(0.3..0.7);
            let lo = quantile(&field, fraction * dark_share);
            let hi = quantile(&field, 1.0 - fraction * (1.0 - dark_share));
            let px = field
                .iter()
                .zip(&bg)
                .map(|(&f, &b)| {
                    if f < lo {
                        0
                    } else if f > hi {
                        255
                    } else {
                        to_u8(b)
                    }
                })
                .collect();
            (GrayImage::new(w, h, px).unwrap(), Some(fraction))
        }
        FixtureKind::ScatteredSalt => {
            let fraction = rng.random_range(0.05..0.4);
            let bg = background(rng, w, h);
            let px = bg
                .iter()
                .map(|&b| {
                    if rng.random_bool(fraction) {
                        if rng.random_bool(0.5) {
                            0
                        } else {
                            255
                        }
                    } else {
                        to_u8(b)
                    }
                })
                .collect();
            (GrayImage::new(w, h, px).unwrap(), Some(fraction))
        }
        FixtureKind::LowLight | FixtureKind::HighKey => {
            let sigma = (w.min(h) as f64 / rng.random_range(4.0..12.0)).max(1.0);
            let field = smooth_field(rng, w, h, sigma);
            let fraction = rng.random_range(0.3..0.7);
            let gain = rng.random_range(15.0..60.0);
            let sensor = rng.random_range(0.5..4.0);
            // shift the scene so `fraction` of it sits below black
            let cut = quantile(&field, fraction);
            let px: Vec<u8> = field
                .iter()
                .map(|&f| {
                    let v = to_u8(gain * (f - cut) + noise(rng, sensor));
                    if kind == FixtureKind::HighKey {
                        255 - v
                    } else {
                        v
                    }
                })
                .collect();
            (GrayImage::new(w, h, px).unwrap(), Some(fraction))
        }
    }
}

/// One cover per kind at each size in `sizes`.
pub fn mixed_corpus(seed: u64, sizes: &[(usize, usize)]) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &(w, h) in sizes {
        for kind in FixtureKind::ALL {
            let (image, target) = generate(kind, w, h, &mut rng);
            out.push(Fixture { name: format!("{kind}_{w}x{h}"), kind, image, target_boundary_fraction: target });
        }
    }
    out
}

/// `count` covers cycling through the boundary-heavy kinds.
pub fn boundary_heavy_corpus(seed: u64, count: usize, w: usize, h: usize) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let kind = FixtureKind::BOUNDARY_HEAVY[i % FixtureKind::BOUNDARY_HEAVY.len()];
            let (image, target) = generate(kind, w, h, &mut rng);
            Fixture { name: format!("{kind}_{i:03}"), kind, image, target_boundary_fraction: target }
        })
        .collect()
}
