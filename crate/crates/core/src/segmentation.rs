//! Particle score map from detail levels, thresholding, and depth selection.
//!
//! The two finest detail levels are treated as noise (`j_min = 3` by
//! default) and the remaining levels are summed. Two score forms exist:
//!
//! * [`ScoreKind::DetailSum`]: `Σ_{j=j_min}^{L} w_j`, which telescopes to
//!   `c_{j_min-1} - c_L`, a band-pass image where particles are positive.
//!   This is the default for segmentation.
//! * [`ScoreKind::DetailSumMinusInput`]: `Σ_{j=j_min}^{L} w_j - c_0`
//!   ([`detail_sum_map`]). Subtracting the input leaves
//!   `-(w_1 + .. + w_{j_min-1}) - c_L`, so the particle band cancels; it is
//!   kept for inspection and comparison.

use crate::error::{Error, Result};
use crate::evaluation::{confusion, metrics, Metrics};
use crate::image::{BinaryMask, Image};
use crate::par::Execution;
use crate::starlet::{max_level, starlet_decompose_with, Decomposition};

/// First detail level kept in the score map.
pub const DEFAULT_J_MIN: usize = 3;
pub const OTSU_BINS: usize = 256;

/// Signed per-pixel score, same dimensions as the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    width: usize,
    height: usize,
    scores: Vec<f64>,
}

impl ScoreMap {
    pub fn new(width: usize, height: usize, scores: Vec<f64>) -> Result<Self> {
        // Reuse the image checks: positive dimensions, length, finiteness.
        let img = Image::new(width, height, scores)?;
        Ok(Self::from(img))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn to_image(&self) -> Image {
        Image::from_raw(self.width, self.height, self.scores.clone())
    }
}

impl From<Image> for ScoreMap {
    fn from(img: Image) -> Self {
        let (width, height) = img.dims();
        Self {
            width,
            height,
            scores: img.into_pixels(),
        }
    }
}

/// Which combination of detail levels forms the score map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKind {
    /// `Σ_{j=j_min}^{L} w_j`.
    #[default]
    DetailSum,
    /// `Σ_{j=j_min}^{L} w_j - c_0`.
    DetailSumMinusInput,
}

/// Rule turning a score map into a foreground mask.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThresholdPolicy {
    /// Otsu on the min-max normalized map; foreground strictly above the threshold.
    #[default]
    Otsu,
    /// Foreground iff score > 0.
    Positive,
    /// Foreground iff score > t.
    Fixed(f64),
}

impl ThresholdPolicy {
    pub fn fixed(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParams(format!("threshold {t} is not finite")));
        }
        Ok(Self::Fixed(t))
    }
}

fn check_levels(levels: usize, j_min: usize) -> Result<()> {
    if j_min == 0 {
        return Err(Error::InvalidLevel(0));
    }
    if levels < j_min {
        return Err(Error::InsufficientLevels { levels, j_min });
    }
    Ok(())
}

/// `S = Σ_{j=j_min}^{L} w_j - img`.
pub fn detail_sum_map(d: &Decomposition, img: &Image, j_min: usize) -> Result<ScoreMap> {
    check_same_dims(d, img)?;
    let acc = sum_details(d, j_min)?;
    Ok(score_from_sum(&acc, img))
}

/// `S = Σ_{j=j_min}^{L} w_j`.
pub fn detail_band_map(d: &Decomposition, j_min: usize) -> Result<ScoreMap> {
    let acc = sum_details(d, j_min)?;
    let (width, height) = d.dims();
    Ok(ScoreMap {
        width,
        height,
        scores: acc,
    })
}

/// Score map of the requested kind.
pub fn score_map(
    d: &Decomposition,
    img: &Image,
    j_min: usize,
    kind: ScoreKind,
) -> Result<ScoreMap> {
    match kind {
        ScoreKind::DetailSum => {
            check_same_dims(d, img)?;
            detail_band_map(d, j_min)
        }
        ScoreKind::DetailSumMinusInput => detail_sum_map(d, img, j_min),
    }
}

fn sum_details(d: &Decomposition, j_min: usize) -> Result<Vec<f64>> {
    check_levels(d.levels(), j_min)?;
    let mut acc = vec![0.0; d.residual().pixels().len()];
    for plane in &d.details()[j_min - 1..] {
        add_assign(&mut acc, plane.pixels());
    }
    Ok(acc)
}

fn check_same_dims(d: &Decomposition, img: &Image) -> Result<()> {
    if d.dims() != img.dims() {
        return Err(Error::InconsistentInput(format!(
            "decomposition is {}x{}, image is {}x{}",
            d.dims().0,
            d.dims().1,
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

fn add_assign(acc: &mut [f64], plane: &[f64]) {
    for (a, v) in acc.iter_mut().zip(plane) {
        *a += v;
    }
}

fn score_from_sum(acc: &[f64], img: &Image) -> ScoreMap {
    let scores = acc.iter().zip(img.pixels()).map(|(s, c)| s - c).collect();
    ScoreMap {
        width: img.width(),
        height: img.height(),
        scores,
    }
}

/// Histogram bin for a value already scaled to `[0, 1]`.
#[inline]
fn otsu_bin(v: f64) -> usize {
    ((v * OTSU_BINS as f64) as usize).min(OTSU_BINS - 1)
}

/// Otsu threshold over a 256-bin histogram: the bin index `t` maximizing the
/// between-class variance of `{bins <= t}` vs `{bins > t}`. Ties go to the
/// lowest `t`. Returns `None` when no split separates two non-empty classes.
pub fn otsu_threshold_bin(hist: &[u64; OTSU_BINS]) -> Option<usize> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return None;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();
    let mut best: Option<(usize, f64)> = None;
    let mut weight_bg = 0u64;
    let mut sum_bg = 0.0;
    for (t, &count) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        weight_bg += count;
        sum_bg += t as f64 * count as f64;
        let weight_fg = total - weight_bg;
        if weight_bg == 0 || weight_fg == 0 {
            continue;
        }
        let w0 = weight_bg as f64 / total_f;
        let w1 = weight_fg as f64 / total_f;
        let mu0 = sum_bg / weight_bg as f64;
        let mu1 = (sum_all - sum_bg) / weight_fg as f64;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t, between));
        }
    }
    best.map(|(t, _)| t)
}

pub fn binarize(s: &ScoreMap, policy: ThresholdPolicy) -> BinaryMask {
    let bits = match policy {
        ThresholdPolicy::Positive => s.scores.iter().map(|&v| v > 0.0).collect(),
        ThresholdPolicy::Fixed(t) => s.scores.iter().map(|&v| v > t).collect(),
        ThresholdPolicy::Otsu => {
            let (lo, hi) = s
                .scores
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let span = hi - lo;
            if span <= 0.0 || span.is_nan() {
                vec![false; s.scores.len()]
            } else {
                let bins: Vec<usize> = s
                    .scores
                    .iter()
                    .map(|&v| otsu_bin((v - lo) / span))
                    .collect();
                let mut hist = [0u64; OTSU_BINS];
                for &b in &bins {
                    hist[b] += 1;
                }
                match otsu_threshold_bin(&hist) {
                    Some(t) => bins.iter().map(|&b| b > t).collect(),
                    None => vec![false; bins.len()],
                }
            }
        }
    };
    BinaryMask::from_raw(s.width, s.height, bits)
}

/// Knobs shared by [`segment_with`] and [`sweep_levels_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SegmentOptions {
    pub j_min: usize,
    pub policy: ThresholdPolicy,
    pub score: ScoreKind,
}

impl SegmentOptions {
    pub fn new(policy: ThresholdPolicy) -> Self {
        Self {
            j_min: DEFAULT_J_MIN,
            policy,
            score: ScoreKind::default(),
        }
    }
}

/// Decompose to depth `levels`, sum detail levels from `j_min = 3`, threshold.
pub fn segment(img: &Image, levels: usize, policy: ThresholdPolicy) -> Result<BinaryMask> {
    segment_with(
        img,
        levels,
        SegmentOptions::new(policy),
        Execution::default(),
    )
}

pub fn segment_with(
    img: &Image,
    levels: usize,
    opts: SegmentOptions,
    exec: Execution,
) -> Result<BinaryMask> {
    check_levels(levels, opts.j_min)?;
    let d = starlet_decompose_with(img, levels, exec)?;
    Ok(binarize(
        &score_map(&d, img, opts.j_min, opts.score)?,
        opts.policy,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub level: usize,
    pub metrics: Metrics,
    pub counts: crate::evaluation::ConfusionCounts,
}

/// Result of a depth sweep. `capped_at` is set when the requested upper
/// bound exceeded what the image size allows.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub entries: Vec<SweepEntry>,
    pub requested: (usize, usize),
    pub capped_at: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub lo: usize,
    pub hi: usize,
    pub options: SegmentOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lo: 3,
            hi: 10,
            options: SegmentOptions::new(ThresholdPolicy::Otsu),
        }
    }
}

/// Segments `img` at every depth in `lo..=hi` and scores each mask against `gt`.
pub fn sweep_levels(
    img: &Image,
    gt: &BinaryMask,
    lo: usize,
    hi: usize,
    policy: ThresholdPolicy,
) -> Result<Sweep> {
    sweep_levels_with(
        img,
        gt,
        SweepConfig {
            lo,
            hi,
            options: SegmentOptions::new(policy),
        },
        Execution::default(),
    )
}

/// The transform at depth `L` is a prefix of the transform at any deeper
/// level, so one decomposition at the top depth serves every entry. Score
/// maps accumulate in the same order as [`score_map`], making each entry
/// bit-identical to an independent [`segment_with`] call.
pub fn sweep_levels_with(
    img: &Image,
    gt: &BinaryMask,
    cfg: SweepConfig,
    exec: Execution,
) -> Result<Sweep> {
    if cfg.lo > cfg.hi {
        return Err(Error::InvalidParams(format!(
            "empty level range {}..{}",
            cfg.lo, cfg.hi
        )));
    }
    if img.dims() != gt.dims() {
        return Err(Error::InconsistentInput(format!(
            "image is {}x{}, ground truth is {}x{}",
            img.width(),
            img.height(),
            gt.width(),
            gt.height()
        )));
    }
    let opts = cfg.options;
    check_levels(cfg.lo, opts.j_min)?;
    let max = max_level(img.width(), img.height());
    if cfg.lo > max {
        return Err(Error::LevelTooLarge {
            requested: cfg.lo,
            max_level: max,
            width: img.width(),
            height: img.height(),
        });
    }
    let top = cfg.hi.min(max);
    let capped_at = (top < cfg.hi).then_some(top);

    let d = starlet_decompose_with(img, top, exec)?;
    let mut acc = vec![0.0; img.pixels().len()];
    let mut scores = Vec::with_capacity(top - cfg.lo + 1);
    for level in opts.j_min..=top {
        add_assign(&mut acc, d.details()[level - 1].pixels());
        if level >= cfg.lo {
            let s = match opts.score {
                ScoreKind::DetailSum => ScoreMap {
                    width: img.width(),
                    height: img.height(),
                    scores: acc.clone(),
                },
                ScoreKind::DetailSumMinusInput => score_from_sum(&acc, img),
            };
            scores.push((level, s));
        }
    }
    drop(d);

    let entries = exec
        .map(&scores, |(level, s)| -> Result<SweepEntry> {
            let counts = confusion(&binarize(s, opts.policy), gt)?;
            Ok(SweepEntry {
                level: *level,
                metrics: metrics(&counts)?,
                counts,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    Ok(Sweep {
        entries,
        requested: (cfg.lo, cfg.hi),
        capped_at,
    })
}

/// Level with the highest F1; ties resolve to the smaller level.
pub fn select_optimal_level(entries: &[SweepEntry]) -> Result<usize> {
    entries
        .iter()
        .map(|e| (e.level, e.metrics.f1))
        .reduce(|best, cand| {
            let better = cand.1 > best.1 || (cand.1 == best.1 && cand.0 < best.0);
            if better {
                cand
            } else {
                best
            }
        })
        .map(|(level, _)| level)
        .ok_or(Error::EmptyInput("sweep has no entries"))
}
