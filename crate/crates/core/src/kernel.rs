//! B3-spline filter bank and its dilated ("à trous") forms.

use crate::error::{Error, Result};

const B3_TAPS: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Odd-length, centered, symmetric 1D filter with unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    taps: Vec<f64>,
}

impl Kernel1D {
    /// The cubic B-spline smoothing filter `[1, 4, 6, 4, 1] / 16`.
    pub fn b3() -> Self {
        Self {
            taps: B3_TAPS.to_vec(),
        }
    }

    /// Spreads the taps apart with `2^(level-1) - 1` zeros between neighbours.
    /// Level 1 returns the filter unchanged.
    pub fn dilated(&self, level: usize) -> Result<Self> {
        let step = dilation_step(level)?;
        let len = (self.taps.len() - 1) * step + 1;
        let mut taps = vec![0.0; len];
        for (i, &t) in self.taps.iter().enumerate() {
            taps[i * step] = t;
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }
}

/// Returns the undilated B3-spline filter.
pub fn b3_kernel_1d() -> Kernel1D {
    Kernel1D::b3()
}

/// Spacing between non-zero taps at a given level: `2^(level-1)`.
pub fn dilation_step(level: usize) -> Result<usize> {
    if level == 0 {
        return Err(Error::InvalidLevel(level));
    }
    1usize
        .checked_shl((level - 1) as u32)
        .filter(|&s| s.checked_mul(4).is_some())
        .ok_or(Error::InvalidLevel(level))
}

/// Square smoothing kernel for one dilation level, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    level: usize,
    side: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at row `r`, column `c` (both in `0..side`).
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.side + c]
    }

    /// Weight at signed offset `(dy, dx)` from the kernel center.
    pub fn at_offset(&self, dy: isize, dx: isize) -> f64 {
        let half = (self.side / 2) as isize;
        self.at((dy + half) as usize, (dx + half) as usize)
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The matching wavelet filter `g = δ - h`: subtracting one smoothing step
    /// from the identity yields the detail coefficients.
    pub fn detail_weights(&self) -> Vec<f64> {
        let center = (self.side / 2) * self.side + self.side / 2;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == center { 1.0 - w } else { -w })
            .collect()
    }
}

/// Builds the level-`j` 2D kernel: the outer product of the dilated B3 taps
/// with themselves, divided by its total weight.
pub fn dilated_kernel_2d(level: usize) -> Result<Kernel2D> {
    let v = Kernel1D::b3().dilated(level)?;
    let side = v.len();
    let mut weights = Vec::with_capacity(side * side);
    for &a in v.taps() {
        for &b in v.taps() {
            weights.push(a * b);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(Kernel2D {
        level,
        side,
        weights,
    })
}
