//! Seeded generator of SEM-like test images with exact ground truth.
//!
//! Bright isotropic Gaussian blobs (σ = r/2) sit on a flat background,
//! modulated by a low-frequency "roughness" field and white Gaussian noise.
//! The truth mask marks every pixel within distance `r` of a blob center.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`, split
//! into three fixed streams so each concern is reproducible on its own:
//!
//! * stream 0 (geometry): per blob, one radius draw, then `(x, y)` center
//!   draws until placement succeeds;
//! * stream 1 (roughness): per wave, direction, wavelength, phase;
//! * stream 2 (noise): one standard-normal draw per pixel, row-major.
//!
//! Changing noise or roughness parameters therefore never moves a blob.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Image};

const STREAM_GEOMETRY: u64 = 0;
const STREAM_ROUGHNESS: u64 = 1;
const STREAM_NOISE: u64 = 2;

pub const PLACEMENT_ATTEMPTS: usize = 1000;
pub const ROUGHNESS_WAVES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub blob_count: usize,
    /// Inclusive `(r_min, r_max)` in pixels.
    pub radius_range: (f64, f64),
    pub blob_peak: f64,
    pub background_level: f64,
    pub roughness_amplitude: f64,
    pub noise_sigma: f64,
    pub allow_overlap: bool,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            blob_count: 20,
            radius_range: (3.0, 8.0),
            blob_peak: 0.6,
            background_level: 0.25,
            roughness_amplitude: 0.1,
            noise_sigma: 0.05,
            allow_overlap: false,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        let (r_min, r_max) = self.radius_range;
        if self.width == 0 || self.height == 0 {
            return bad(format!("dimensions {}x{}", self.width, self.height));
        }
        let reals = [
            r_min,
            r_max,
            self.blob_peak,
            self.background_level,
            self.roughness_amplitude,
            self.noise_sigma,
        ];
        if reals.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if !(r_min > 0.0 && r_min <= r_max) {
            return bad(format!("radius range ({r_min}, {r_max})"));
        }
        if self.blob_count > 0 && r_max >= self.width.min(self.height) as f64 / 2.0 {
            return bad(format!(
                "r_max {r_max} must be below half the smaller dimension"
            ));
        }
        if !(self.blob_peak > 0.0 && self.blob_peak <= 1.0) {
            return bad(format!("blob_peak {} outside (0, 1]", self.blob_peak));
        }
        if !(0.0..1.0).contains(&self.background_level) {
            return bad(format!(
                "background_level {} outside [0, 1)",
                self.background_level
            ));
        }
        if self.roughness_amplitude < 0.0 || self.noise_sigma < 0.0 {
            return bad("negative roughness or noise".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub x: usize,
    pub y: usize,
    pub radius: f64,
}

/// A generated image with its truth mask and the blobs that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub image: Image,
    pub truth: BinaryMask,
    pub blobs: Vec<Blob>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn place_blobs(p: &SynthParams) -> Result<Vec<Blob>> {
    let mut rng = rng_for(p.seed, STREAM_GEOMETRY);
    let (r_min, r_max) = p.radius_range;
    let margin = r_max.floor() as usize;
    let x_range = margin..=p.width - 1 - margin;
    let y_range = margin..=p.height - 1 - margin;
    let mut blobs: Vec<Blob> = Vec::with_capacity(p.blob_count);
    for i in 0..p.blob_count {
        let radius = if r_min == r_max {
            r_min
        } else {
            rng.gen_range(r_min..=r_max)
        };
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let x = rng.gen_range(x_range.clone());
            let y = rng.gen_range(y_range.clone());
            let clear = p.allow_overlap
                || blobs.iter().all(|b| {
                    let dx = b.x as f64 - x as f64;
                    let dy = b.y as f64 - y as f64;
                    (dx * dx + dy * dy).sqrt() > b.radius + radius
                });
            if clear {
                placed = Some(Blob { x, y, radius });
                break;
            }
        }
        match placed {
            Some(b) => blobs.push(b),
            None => {
                return Err(Error::PlacementFailed {
                    blob: i,
                    attempts: PLACEMENT_ATTEMPTS,
                })
            }
        }
    }
    Ok(blobs)
}

/// Sum of cosine plane waves, scaled so the field stays within `±amplitude`.
fn roughness_field(p: &SynthParams) -> Vec<f64> {
    let mut field = vec![0.0; p.width * p.height];
    if p.roughness_amplitude == 0.0 {
        return field;
    }
    let mut rng = rng_for(p.seed, STREAM_ROUGHNESS);
    let base = p.width as f64;
    let waves: Vec<(f64, f64, f64)> = (0..ROUGHNESS_WAVES)
        .map(|_| {
            let theta = rng.gen_range(0.0..2.0 * PI);
            let wavelength = rng.gen_range(base / 4.0..=base);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let k = 2.0 * PI / wavelength;
            (k * theta.cos(), k * theta.sin(), phase)
        })
        .collect();
    let scale = p.roughness_amplitude / ROUGHNESS_WAVES as f64;
    for y in 0..p.height {
        for x in 0..p.width {
            let s: f64 = waves
                .iter()
                .map(|&(kx, ky, phase)| (kx * x as f64 + ky * y as f64 + phase).cos())
                .sum();
            field[y * p.width + x] = scale * s;
        }
    }
    field
}

pub fn generate(params: &SynthParams) -> Result<LabeledSample> {
    params.validate()?;
    let (w, h) = (params.width, params.height);
    let blobs = place_blobs(params)?;

    let mut pixels = roughness_field(params);
    for v in &mut pixels {
        *v += params.background_level;
    }
    let mut truth = vec![false; w * h];
    for b in &blobs {
        let sigma = b.radius / 2.0;
        let inv_two_var = 1.0 / (2.0 * sigma * sigma);
        let reach = (3.0 * b.radius).ceil() as usize;
        let (x0, x1) = (b.x.saturating_sub(reach), (b.x + reach).min(w - 1));
        let (y0, y1) = (b.y.saturating_sub(reach), (b.y + reach).min(h - 1));
        let r2 = b.radius * b.radius;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - b.x as f64;
                let dy = y as f64 - b.y as f64;
                let d2 = dx * dx + dy * dy;
                pixels[y * w + x] += params.blob_peak * (-d2 * inv_two_var).exp();
                if d2 <= r2 {
                    truth[y * w + x] = true;
                }
            }
        }
    }
    if params.noise_sigma > 0.0 {
        let mut rng = rng_for(params.seed, STREAM_NOISE);
        let normal = Normal::new(0.0, params.noise_sigma)
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        for v in &mut pixels {
            *v += normal.sample(&mut rng);
        }
    }
    for v in &mut pixels {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(LabeledSample {
        image: Image::new(w, h, pixels)?,
        truth: BinaryMask::new(w, h, truth)?,
        blobs,
    })
}
