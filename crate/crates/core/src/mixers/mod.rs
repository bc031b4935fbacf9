//! Mixing strategies: paste, CutMix, ResizeMix, Mixup and the obtain × paste matrix.
//!
//! Every cut/resize mix is split into a geometry [`MixPlan`] (patch size,
//! source region, paste region) and a pixel step that applies it. The plan is
//! drawn from the caller's RNG in a fixed order:
//!
//! 1. the patch-size draw (`λ_target` for cut modes, `τ` for resize),
//! 2. the source-side center (cut modes only),
//! 3. the target-side center (unless pasting at the corresponding region).
//!
//! The reported `λ` is always the realized patch area divided by the image
//! area, never the sampled value it came from.

mod halfres;
mod label;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{crop, resize_with, Filter, Heatmap, Image};
use crate::region::{saliency_sets, sample_region, CenterStrategy, Region, SaliencySets};

pub use halfres::{halfres_dims, halfres_transform, halfres_transform_with_region, HalfResMode};
pub use label::{mix_labels, LabelEntry, MixedLabel};

/// How the source patch is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obtain {
    CutRandom,
    CutSalient,
    CutNonSalient,
    ResizeWhole,
}

/// Where the patch lands in the target image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PasteTo {
    Corresponding,
    Random,
    Salient,
    NonSalient,
}

/// Patch-size law for the cut modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaLaw {
    /// `λ_target ~ U(0, 1)`, sides `W·√λ_target × H·√λ_target`.
    #[default]
    #[serde(rename = "uniform_0_1")]
    Uniform,
    /// Side scale drawn from `U(α, β)` like the resize mode.
    ScaleRange,
}

macro_rules! str_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::invalid(format!(
                        "unknown {} '{other}' (expected one of: {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

str_enum!(Obtain {
    CutRandom => "cut_random",
    CutSalient => "cut_salient",
    CutNonSalient => "cut_non_salient",
    ResizeWhole => "resize_whole",
});

str_enum!(PasteTo {
    Corresponding => "corresponding",
    Random => "random",
    Salient => "salient",
    NonSalient => "non_salient",
});

str_enum!(AreaLaw {
    Uniform => "uniform_0_1",
    ScaleRange => "scale_range",
});

impl Obtain {
    fn cut_strategy(self) -> Option<CenterStrategy> {
        match self {
            Obtain::CutRandom => Some(CenterStrategy::Random),
            Obtain::CutSalient => Some(CenterStrategy::Salient),
            Obtain::CutNonSalient => Some(CenterStrategy::NonSalient),
            Obtain::ResizeWhole => None,
        }
    }
}

impl PasteTo {
    fn strategy(self) -> Option<CenterStrategy> {
        match self {
            PasteTo::Corresponding => None,
            PasteTo::Random => Some(CenterStrategy::Random),
            PasteTo::Salient => Some(CenterStrategy::Salient),
            PasteTo::NonSalient => Some(CenterStrategy::NonSalient),
        }
    }
}

/// One cell of the obtain × paste matrix plus its scale parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    pub obtain: Obtain,
    pub paste_to: PasteTo,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub area_law: AreaLaw,
    /// Filter used to shrink the source for `resize_whole`.
    #[serde(default = "default_resize_filter")]
    pub resize_filter: Filter,
}

fn default_resize_filter() -> Filter {
    Filter::Area
}

impl MixConfig {
    pub const DEFAULT_ALPHA: f64 = 0.1;
    pub const DEFAULT_BETA: f64 = 0.8;

    pub fn new(obtain: Obtain, paste_to: PasteTo) -> Self {
        Self {
            obtain,
            paste_to,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            area_law: AreaLaw::Uniform,
            resize_filter: Filter::Area,
        }
    }

    /// Random cut pasted at the same location.
    pub fn cutmix() -> Self {
        Self::new(Obtain::CutRandom, PasteTo::Corresponding)
    }

    /// Whole source resized by `τ ~ U(α, β)`, pasted at a random location.
    pub fn resizemix(alpha: f64, beta: f64) -> Self {
        Self::new(Obtain::ResizeWhole, PasteTo::Random).with_scale_range(alpha, beta)
    }

    pub fn with_scale_range(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_area_law(mut self, law: AreaLaw) -> Self {
        self.area_law = law;
        self
    }

    pub fn with_resize_filter(mut self, filter: Filter) -> Self {
        self.resize_filter = filter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= self.beta && self.beta <= 1.0) {
            return Err(Error::invalid(format!(
                "scale bounds must satisfy 0 < alpha <= beta <= 1, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        if self.obtain == Obtain::ResizeWhole
            && self.paste_to == PasteTo::Corresponding
            && !(self.alpha == 1.0 && self.beta == 1.0)
        {
            return Err(Error::invalid(
                "obtain=resize_whole cannot paste to the corresponding region: the resized patch has no source region",
            ));
        }
        Ok(())
    }

    pub fn needs_source_heatmap(&self) -> bool {
        matches!(self.obtain, Obtain::CutSalient | Obtain::CutNonSalient)
    }

    pub fn needs_target_heatmap(&self) -> bool {
        matches!(self.paste_to, PasteTo::Salient | PasteTo::NonSalient)
    }

    /// `E[λ]` ignoring pixel rounding.
    pub fn analytic_mean_lambda(&self) -> f64 {
        match (self.obtain, self.area_law) {
            (Obtain::ResizeWhole, _) | (_, AreaLaw::ScaleRange) => {
                mean_tau_squared(self.alpha, self.beta)
            }
            _ => 0.5,
        }
    }

    /// Draws the patch side scale: `√λ_target` for the uniform area law,
    /// `τ ~ U[α, β]` otherwise.
    pub fn draw_scale<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match (self.obtain, self.area_law) {
            (Obtain::ResizeWhole, _) | (_, AreaLaw::ScaleRange) => {
                rng.gen_range(self.alpha..=self.beta)
            }
            _ => rng.gen::<f64>().sqrt(),
        }
    }
}

impl fmt::Display for MixConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.obtain, self.paste_to)
    }
}

/// `E[τ²]` for `τ ~ U(α, β)`.
pub fn mean_tau_squared(alpha: f64, beta: f64) -> f64 {
    (alpha * alpha + alpha * beta + beta * beta) / 3.0
}

/// Patch side for an image side and a scale, rounded to nearest with a 1-pixel floor.
pub fn patch_side(len: u32, scale: f64) -> u32 {
    ((f64::from(len) * scale).round() as u32).clamp(1, len)
}

/// The geometry of one mix, independent of pixel content.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixPlan {
    pub tau: Option<f64>,
    pub resize_filter: Filter,
    pub patch_w: u32,
    pub patch_h: u32,
    pub source_region: Option<Region>,
    pub paste_region: Region,
}

impl MixPlan {
    pub fn lambda(&self, width: u32, height: u32) -> f64 {
        area_ratio(self.paste_region.area(), width, height)
    }
}

fn area_ratio(area: u64, width: u32, height: u32) -> f64 {
    area as f64 / (u64::from(width) * u64::from(height)) as f64
}

/// Draws a full plan: size, then source center, then target center.
pub fn plan_mix<R: Rng + ?Sized>(
    cfg: &MixConfig,
    width: u32,
    height: u32,
    source_sets: Option<&SaliencySets>,
    target_sets: Option<&SaliencySets>,
    rng: &mut R,
) -> Result<MixPlan> {
    cfg.validate()?;
    let scale = cfg.draw_scale(rng);
    plan_with_scale(cfg, width, height, scale, source_sets, target_sets, rng)
}

/// Like [`plan_mix`] with the size draw supplied by the caller.
pub fn plan_with_scale<R: Rng + ?Sized>(
    cfg: &MixConfig,
    width: u32,
    height: u32,
    scale: f64,
    source_sets: Option<&SaliencySets>,
    target_sets: Option<&SaliencySets>,
    rng: &mut R,
) -> Result<MixPlan> {
    if !(0.0..=1.0).contains(&scale) {
        return Err(Error::invalid(format!(
            "patch scale {scale} outside [0, 1]"
        )));
    }
    let patch_w = patch_side(width, scale);
    let patch_h = patch_side(height, scale);

    let (tau, source_region) = match cfg.obtain.cut_strategy() {
        Some(strategy) => {
            let r = sample_region(strategy, patch_w, patch_h, source_sets, width, height, rng)
                .map_err(|e| side_error(e, "source"))?;
            (None, Some(r))
        }
        None => (Some(scale), None),
    };

    let paste_region = match (cfg.paste_to.strategy(), source_region) {
        (Some(strategy), _) => {
            sample_region(strategy, patch_w, patch_h, target_sets, width, height, rng)
                .map_err(|e| side_error(e, "target"))?
        }
        (None, Some(r)) => r,
        (None, None) => {
            if (patch_w, patch_h) != (width, height) {
                return Err(Error::invalid(format!(
                    "resized patch {patch_w}x{patch_h} cannot be pasted at a corresponding region of a {width}x{height} image"
                )));
            }
            Region::full(width, height)
        }
    };

    Ok(MixPlan {
        tau,
        resize_filter: cfg.resize_filter,
        patch_w,
        patch_h,
        source_region,
        paste_region,
    })
}

fn side_error(e: Error, side: &str) -> Error {
    match e {
        Error::MissingHeatmap(msg) => Error::MissingHeatmap(format!("{side} heatmap: {msg}")),
        other => other,
    }
}

/// Replaces the pixels of `target` inside `r` with `patch`.
pub fn paste(patch: &Image, target: &Image, r: Region) -> Result<Image> {
    if !r.fits_within(target.width(), target.height()) {
        return Err(Error::dims(format!(
            "paste region {r} outside {}x{} target",
            target.width(),
            target.height()
        )));
    }
    if patch.dims() != (r.width(), r.height()) {
        return Err(Error::dims(format!(
            "patch is {}x{}, region {r} is {}x{}",
            patch.width(),
            patch.height(),
            r.width(),
            r.height()
        )));
    }
    if patch.channels() != target.channels() {
        return Err(Error::dims(format!(
            "patch has {} channels, target has {}",
            patch.channels(),
            target.channels()
        )));
    }
    let mut out = target.clone();
    for (j, y) in (r.y_b..r.y_t).enumerate() {
        out.row_span_mut(y, r.x_l, r.x_r)
            .copy_from_slice(patch.row(j as u32));
    }
    Ok(out)
}

/// The patch a plan pastes: a crop of the source, or the whole source resized.
pub fn plan_patch(src: &Image, plan: &MixPlan) -> Result<Image> {
    match plan.source_region {
        Some(r) => crop(src, r),
        None => resize_with(src, plan.patch_w, plan.patch_h, plan.resize_filter),
    }
}

/// Applies a plan to an image pair and allocates the label.
pub fn apply_plan(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    plan: &MixPlan,
) -> Result<MixResult> {
    check_pair(src, tgt)?;
    let patch = plan_patch(src, plan)?;
    let image = paste(&patch, tgt, plan.paste_region)?;
    let lambda = plan.lambda(tgt.width(), tgt.height());
    Ok(MixResult {
        image,
        label: mix_labels(src_label, tgt_label, lambda),
        tau: plan.tau,
        lambda,
        source_region: plan.source_region,
        paste_region: plan.paste_region,
    })
}

/// Output of a mixing operation.
#[derive(Debug, Clone, PartialEq)]
pub struct MixResult {
    pub image: Image,
    pub label: MixedLabel,
    pub tau: Option<f64>,
    pub lambda: f64,
    pub source_region: Option<Region>,
    pub paste_region: Region,
}

impl MixResult {
    /// `λ` as the exact fraction `(patch area, image area)`.
    pub fn lambda_ratio(&self) -> (u64, u64) {
        (
            self.paste_region.area(),
            u64::from(self.image.width()) * u64::from(self.image.height()),
        )
    }
}

fn check_pair(src: &Image, tgt: &Image) -> Result<()> {
    if src.dims() != tgt.dims() || src.channels() != tgt.channels() {
        return Err(Error::dims(format!(
            "source is {}x{}x{}, target is {}x{}x{}",
            src.width(),
            src.height(),
            src.channels(),
            tgt.width(),
            tgt.height(),
            tgt.channels()
        )));
    }
    Ok(())
}

fn sets_for(
    needed: bool,
    heatmap: Option<&Heatmap>,
    img: &Image,
    side: &str,
    cfg: &MixConfig,
) -> Result<Option<SaliencySets>> {
    if !needed {
        return Ok(None);
    }
    let h = heatmap
        .ok_or_else(|| Error::MissingHeatmap(format!("{side} heatmap is required for {}", cfg)))?;
    if h.dims() != img.dims() {
        return Err(Error::dims(format!(
            "{side} heatmap is {}x{}, image is {}x{}",
            h.width(),
            h.height(),
            img.width(),
            img.height()
        )));
    }
    saliency_sets(h).map(Some)
}

/// Mixes a pair under any obtain × paste configuration.
///
/// Heatmaps are required exactly for the sides whose strategy is salient or
/// non-salient, and must match their image's dimensions.
#[allow(clippy::too_many_arguments)]
pub fn mix_matrix<R: Rng + ?Sized>(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    cfg: &MixConfig,
    src_heatmap: Option<&Heatmap>,
    tgt_heatmap: Option<&Heatmap>,
    rng: &mut R,
) -> Result<MixResult> {
    cfg.validate()?;
    check_pair(src, tgt)?;
    let src_sets = sets_for(cfg.needs_source_heatmap(), src_heatmap, src, "source", cfg)?;
    let tgt_sets = sets_for(cfg.needs_target_heatmap(), tgt_heatmap, tgt, "target", cfg)?;
    let plan = plan_mix(
        cfg,
        tgt.width(),
        tgt.height(),
        src_sets.as_ref(),
        tgt_sets.as_ref(),
        rng,
    )?;
    apply_plan(src, tgt, src_label, tgt_label, &plan)
}

/// CutMix: a random region of the source pasted at the same place in the target.
pub fn cutmix<R: Rng + ?Sized>(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    rng: &mut R,
) -> Result<MixResult> {
    mix_matrix(
        src,
        tgt,
        src_label,
        tgt_label,
        &MixConfig::cutmix(),
        None,
        None,
        rng,
    )
}

/// CutMix with a fixed target area fraction; `rng` only places the region.
pub fn cutmix_with_area<R: Rng + ?Sized>(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    area: f64,
    rng: &mut R,
) -> Result<MixResult> {
    check_pair(src, tgt)?;
    if !(0.0..=1.0).contains(&area) {
        return Err(Error::invalid(format!(
            "area fraction {area} outside [0, 1]"
        )));
    }
    let plan = plan_with_scale(
        &MixConfig::cutmix(),
        tgt.width(),
        tgt.height(),
        area.sqrt(),
        None,
        None,
        rng,
    )?;
    apply_plan(src, tgt, src_label, tgt_label, &plan)
}

/// ResizeMix: the whole source resized by `τ ~ U[α, β]` and pasted at a random region.
pub fn resizemix<R: Rng + ?Sized>(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    alpha: f64,
    beta: f64,
    rng: &mut R,
) -> Result<MixResult> {
    let cfg = MixConfig::resizemix(alpha, beta);
    mix_matrix(src, tgt, src_label, tgt_label, &cfg, None, None, rng)
}

/// ResizeMix with a fixed scale rate `τ`; `rng` only places the patch.
pub fn resizemix_with_tau<R: Rng + ?Sized>(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    tau: f64,
    rng: &mut R,
) -> Result<MixResult> {
    check_pair(src, tgt)?;
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid(format!("scale rate {tau} outside (0, 1]")));
    }
    let cfg = MixConfig::resizemix(tau, tau);
    let plan = plan_with_scale(&cfg, tgt.width(), tgt.height(), tau, None, None, rng)?;
    apply_plan(src, tgt, src_label, tgt_label, &plan)
}

/// Mixup: per-sample `round(λ·src + (1 − λ)·tgt)`, half away from zero.
pub fn mixup(
    src: &Image,
    tgt: &Image,
    src_label: &MixedLabel,
    tgt_label: &MixedLabel,
    lambda: f64,
) -> Result<MixResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!(
            "mixup lambda {lambda} outside [0, 1]"
        )));
    }
    check_pair(src, tgt)?;
    let data = src
        .data()
        .iter()
        .zip(tgt.data())
        .map(|(&a, &b)| (lambda * f64::from(a) + (1.0 - lambda) * f64::from(b)).round() as u8)
        .collect();
    let image = Image::new(src.width(), src.height(), src.channels(), data)?;
    Ok(MixResult {
        paste_region: image.full_region(),
        image,
        label: mix_labels(src_label, tgt_label, lambda),
        tau: None,
        lambda,
        source_region: None,
    })
}
