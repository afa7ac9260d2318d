//! Starlet (isotropic undecimated wavelet) transform via the à trous scheme.
//!
//! Level `j` smooths the previous plane with the B3 kernel whose taps sit
//! `2^(j-1)` pixels apart; the detail plane is the difference of consecutive
//! smoothings, `w_j = c_{j-1} - c_j`. Boundaries use whole-sample symmetric
//! reflection with a margin of `2^j` (half the dilated support), applied and
//! stripped per level.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::{dilation_step, Kernel1D};
use crate::par::Execution;

/// Reflects index `i` into `0..n` without repeating the edge sample.
/// Valid for `-(n-1) <= i <= 2(n-1)`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let last = n as isize - 1;
    let r = if i < 0 {
        -i
    } else if i > last {
        2 * last - i
    } else {
        i
    };
    debug_assert!((0..=last).contains(&r));
    r as usize
}

/// Pads `img` by `margin` on all sides using whole-sample symmetric reflection.
pub fn mirror_pad(img: &Image, margin: usize) -> Result<Image> {
    let (w, h) = img.dims();
    if margin == 0 {
        return Ok(img.clone());
    }
    if margin + 1 > w.min(h) {
        return Err(Error::PadExceedsImage {
            margin,
            width: w,
            height: h,
        });
    }
    let (pw, ph) = (w + 2 * margin, h + 2 * margin);
    let mut out = Vec::with_capacity(pw * ph);
    let m = margin as isize;
    for py in 0..ph {
        let sy = reflect(py as isize - m, h);
        let row = img.row(sy);
        for px in 0..pw {
            out.push(row[reflect(px as isize - m, w)]);
        }
    }
    Ok(Image::from_raw(pw, ph, out))
}

/// Mirror margin used at level `j`: half the dilated kernel support, `2^j`.
pub fn level_margin(level: usize) -> Result<usize> {
    Ok(2 * dilation_step(level)?)
}

/// Deepest decomposition the image supports: the largest `L` whose margin
/// `2^L` still fits within `min(width, height) - 1`. Zero if none.
pub fn max_level(width: usize, height: usize) -> usize {
    let limit = width.min(height).saturating_sub(1);
    let mut level = 0;
    while (level + 1) < usize::BITS as usize - 2 && (1usize << (level + 1)) <= limit {
        level += 1;
    }
    level
}

/// One smoothing step, `c_j = c_{j-1} * h_j`.
pub fn smooth(img: &Image, level: usize) -> Result<Image> {
    smooth_with(img, level, Execution::default())
}

/// [`smooth`] with an explicit execution strategy.
///
/// Runs as two separable passes over the padded image, touching only the five
/// non-zero taps at stride `2^(j-1)`.
pub fn smooth_with(img: &Image, level: usize, exec: Execution) -> Result<Image> {
    let step = dilation_step(level)?;
    let margin = 2 * step;
    let padded = mirror_pad(img, margin)?;
    let (w, h) = img.dims();
    let pw = padded.width();
    let ph = padded.height();
    let taps = Kernel1D::b3();
    let taps = taps.taps();

    // Horizontal pass: every padded row, cropped to the original width.
    let src = padded.pixels();
    let mut rows = vec![0.0; w * ph];
    exec.for_each_row(&mut rows, w, |y, out| {
        let line = &src[y * pw..(y + 1) * pw];
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * line[x + k * step];
            }
            *o = acc;
        }
    });

    // Vertical pass: original rows only.
    let mut out = vec![0.0; w * h];
    exec.for_each_row(&mut out, w, |y, out_row| {
        for (x, o) in out_row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * rows[(y + k * step) * w + x];
            }
            *o = acc;
        }
    });
    Ok(Image::from_raw(w, h, out))
}

/// Detail planes `w_1..w_L` and the smooth residual `c_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    details: Vec<Image>,
    residual: Image,
}

impl Decomposition {
    pub fn new(details: Vec<Image>, residual: Image) -> Result<Self> {
        if details.is_empty() {
            return Err(Error::InconsistentDecomposition(
                "no detail planes".to_string(),
            ));
        }
        let dims = residual.dims();
        if let Some((j, d)) = details.iter().enumerate().find(|(_, d)| d.dims() != dims) {
            return Err(Error::InconsistentDecomposition(format!(
                "detail plane {} is {}x{}, residual is {}x{}",
                j + 1,
                d.width(),
                d.height(),
                dims.0,
                dims.1
            )));
        }
        Ok(Self { details, residual })
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail planes, index 0 holding `w_1`.
    pub fn details(&self) -> &[Image] {
        &self.details
    }

    /// `w_j` for `j` in `1..=levels`.
    pub fn detail(&self, level: usize) -> Option<&Image> {
        level.checked_sub(1).and_then(|i| self.details.get(i))
    }

    pub fn residual(&self) -> &Image {
        &self.residual
    }

    pub fn dims(&self) -> (usize, usize) {
        self.residual.dims()
    }

    pub fn into_parts(self) -> (Vec<Image>, Image) {
        (self.details, self.residual)
    }
}

/// Computes the `levels`-deep starlet transform of `img`.
pub fn starlet_decompose(img: &Image, levels: usize) -> Result<Decomposition> {
    starlet_decompose_with(img, levels, Execution::default())
}

pub fn starlet_decompose_with(
    img: &Image,
    levels: usize,
    exec: Execution,
) -> Result<Decomposition> {
    if levels == 0 {
        return Err(Error::InvalidLevel(0));
    }
    let (w, h) = img.dims();
    let max = max_level(w, h);
    if levels > max {
        return Err(Error::LevelTooLarge {
            requested: levels,
            max_level: max,
            width: w,
            height: h,
        });
    }
    let mut details = Vec::with_capacity(levels);
    let mut current = img.clone();
    for j in 1..=levels {
        let next = smooth_with(&current, j, exec)?;
        let diff = current
            .pixels()
            .iter()
            .zip(next.pixels())
            .map(|(a, b)| a - b)
            .collect();
        details.push(Image::from_raw(w, h, diff));
        current = next;
    }
    Decomposition::new(details, current)
}

/// Inverts the transform: `c_L + Σ w_j`.
pub fn reconstruct(d: &Decomposition) -> Result<Image> {
    let dims = d.residual.dims();
    if d.details.iter().any(|p| p.dims() != dims) {
        return Err(Error::InconsistentDecomposition(
            "plane dimensions differ".to_string(),
        ));
    }
    let mut acc = d.residual.pixels().to_vec();
    for plane in d.details.iter().rev() {
        for (a, v) in acc.iter_mut().zip(plane.pixels()) {
            *a += v;
        }
    }
    Ok(Image::from_raw(dims.0, dims.1, acc))
}
