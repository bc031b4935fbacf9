//! Rectangular regions, saliency coordinate sets and center sampling.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Heatmap;

/// A nonempty half-open rectangle `[x_l, x_r) × [y_b, y_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub x_l: u32,
    pub x_r: u32,
    pub y_b: u32,
    pub y_t: u32,
}

impl Region {
    pub fn new(x_l: u32, x_r: u32, y_b: u32, y_t: u32) -> Result<Self> {
        if x_l >= x_r || y_b >= y_t {
            return Err(Error::invalid(format!(
                "empty region ({x_l}, {x_r}, {y_b}, {y_t})"
            )));
        }
        Ok(Self { x_l, x_r, y_b, y_t })
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self {
            x_l: 0,
            x_r: width,
            y_b: 0,
            y_t: height,
        }
    }

    pub fn width(&self) -> u32 {
        self.x_r - self.x_l
    }

    pub fn height(&self) -> u32 {
        self.y_t - self.y_b
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x_l..self.x_r).contains(&x) && (self.y_b..self.y_t).contains(&y)
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x_r <= width && self.y_t <= height
    }

    /// Integer geometric center, rounded toward the origin.
    pub fn center(&self) -> Coord {
        Coord {
            x: (self.x_l + self.x_r) / 2,
            y: (self.y_b + self.y_t) / 2,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.x_l, self.x_r, self.y_b, self.y_t
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
}

impl Coord {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

/// Coordinates attaining the maximum and minimum activation of a heatmap.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencySets {
    pub salient: Vec<Coord>,
    pub non_salient: Vec<Coord>,
    pub t_u: f64,
    pub t_l: f64,
    width: u32,
    height: u32,
}

impl SaliencySets {
    /// Dimensions of the heatmap the sets were extracted from.
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// Extracts the argmax (salient) and argmin (non-salient) coordinate sets.
///
/// Thresholds are `t_u = max A` and `t_l = min A`; both sets are listed in
/// row-major order.
pub fn saliency_sets(h: &Heatmap) -> Result<SaliencySets> {
    let values = h.values();
    if values.is_empty() {
        return Err(Error::invalid("empty heatmap"));
    }
    let t_u = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_l = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut salient = Vec::new();
    let mut non_salient = Vec::new();
    for y in 0..h.height() {
        for x in 0..h.width() {
            let a = h.get(x, y);
            if a >= t_u {
                salient.push(Coord { x, y });
            }
            if a <= t_l {
                non_salient.push(Coord { x, y });
            }
        }
    }
    Ok(SaliencySets {
        salient,
        non_salient,
        t_u,
        t_l,
        width: h.width(),
        height: h.height(),
    })
}

fn axis_bounds(center: u32, extent: u32, limit: u32) -> (u32, u32) {
    // lo = ceil(c - e/2), hi = floor(c + e/2); with integer c this is c - floor(e/2)
    let c = i64::from(center);
    let e = i64::from(extent);
    let limit = i64::from(limit);
    let lo = c - e / 2;
    // odd extents come out one short; extend the far edge
    let hi = lo + e;
    let (lo, hi) = if lo <= 0 {
        (0, e)
    } else if hi >= limit {
        (limit - e, limit)
    } else {
        (lo, hi)
    };
    (lo as u32, hi as u32)
}

/// Builds the `w_p × h_p` region centered on `c`, shifted to lie inside the image.
pub fn region_from_center(c: Coord, w_p: u32, h_p: u32, img_w: u32, img_h: u32) -> Result<Region> {
    if w_p == 0 || h_p == 0 {
        return Err(Error::invalid(format!("empty patch {w_p}x{h_p}")));
    }
    if w_p > img_w || h_p > img_h {
        return Err(Error::invalid(format!(
            "patch {w_p}x{h_p} larger than image {img_w}x{img_h}"
        )));
    }
    if c.x >= img_w || c.y >= img_h {
        return Err(Error::invalid(format!(
            "center ({}, {}) outside {img_w}x{img_h} image",
            c.x, c.y
        )));
    }
    let (x_l, x_r) = axis_bounds(c.x, w_p, img_w);
    let (y_b, y_t) = axis_bounds(c.y, h_p, img_h);
    Ok(Region { x_l, x_r, y_b, y_t })
}

/// Where a region's center is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterStrategy {
    Salient,
    NonSalient,
    Random,
}

/// Draws a region center. Saliency strategies make one draw from their set;
/// `Random` draws `x` then `y`.
pub fn sample_center<R: Rng + ?Sized>(
    strategy: CenterStrategy,
    sets: Option<&SaliencySets>,
    img_w: u32,
    img_h: u32,
    rng: &mut R,
) -> Result<Coord> {
    let pick = |set: &[Coord], rng: &mut R, name: &str| -> Result<Coord> {
        if set.is_empty() {
            return Err(Error::invalid(format!("{name} set is empty")));
        }
        Ok(set[rng.gen_range(0..set.len())])
    };
    match strategy {
        CenterStrategy::Random => {
            if img_w == 0 || img_h == 0 {
                return Err(Error::invalid("empty image"));
            }
            let x = rng.gen_range(0..img_w);
            let y = rng.gen_range(0..img_h);
            Ok(Coord { x, y })
        }
        CenterStrategy::Salient | CenterStrategy::NonSalient => {
            let sets = sets.ok_or_else(|| {
                Error::MissingHeatmap(format!("{strategy:?} sampling needs saliency sets"))
            })?;
            if sets.dims() != (img_w, img_h) {
                return Err(Error::dims(format!(
                    "heatmap is {}x{}, image is {img_w}x{img_h}",
                    sets.width, sets.height
                )));
            }
            match strategy {
                CenterStrategy::Salient => pick(&sets.salient, rng, "salient"),
                _ => pick(&sets.non_salient, rng, "non-salient"),
            }
        }
    }
}

/// Samples a center with `strategy` and builds the in-bounds `w_p × h_p` region around it.
pub fn sample_region<R: Rng + ?Sized>(
    strategy: CenterStrategy,
    w_p: u32,
    h_p: u32,
    sets: Option<&SaliencySets>,
    img_w: u32,
    img_h: u32,
    rng: &mut R,
) -> Result<Region> {
    if w_p == 0 || h_p == 0 || w_p > img_w || h_p > img_h {
        return Err(Error::invalid(format!(
            "patch {w_p}x{h_p} does not fit in image {img_w}x{img_h}"
        )));
    }
    let c = sample_center(strategy, sets, img_w, img_h, rng)?;
    region_from_center(c, w_p, h_p, img_w, img_h)
}
