use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{center_crop_region, crop, resize, Image};
use crate::region::Region;

/// How an image is brought to half resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfResMode {
    RandCrop,
    Resize,
    CenterCrop,
}

impl HalfResMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HalfResMode::RandCrop => "rand_crop",
            HalfResMode::Resize => "resize",
            HalfResMode::CenterCrop => "center_crop",
        }
    }
}

impl fmt::Display for HalfResMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HalfResMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rand_crop" => Ok(HalfResMode::RandCrop),
            "resize" => Ok(HalfResMode::Resize),
            "center_crop" => Ok(HalfResMode::CenterCrop),
            other => Err(Error::invalid(format!(
                "unknown half-resolution mode '{other}' (expected rand_crop, resize or center_crop)"
            ))),
        }
    }
}

/// `(⌊W/2⌋, ⌊H/2⌋)`, or an error for images narrower than 2 pixels.
pub fn halfres_dims(width: u32, height: u32) -> Result<(u32, u32)> {
    if width < 2 || height < 2 {
        return Err(Error::dims(format!(
            "{width}x{height} image is too small for half resolution"
        )));
    }
    Ok((width / 2, height / 2))
}

/// Half-resolution transform that also reports the crop region, if any.
///
/// Only `RandCrop` consumes randomness: `x_l` then `y_b`, each uniform over
/// the valid offsets.
pub fn halfres_transform_with_region<R: Rng + ?Sized>(
    img: &Image,
    mode: HalfResMode,
    rng: &mut R,
) -> Result<(Image, Option<Region>)> {
    let (w, h) = halfres_dims(img.width(), img.height())?;
    match mode {
        HalfResMode::Resize => Ok((resize(img, w, h)?, None)),
        HalfResMode::CenterCrop => {
            let r = center_crop_region(img.width(), img.height(), w, h)?;
            Ok((crop(img, r)?, Some(r)))
        }
        HalfResMode::RandCrop => {
            let x_l = rng.gen_range(0..=img.width() - w);
            let y_b = rng.gen_range(0..=img.height() - h);
            let r = Region::new(x_l, x_l + w, y_b, y_b + h)?;
            Ok((crop(img, r)?, Some(r)))
        }
    }
}

pub fn halfres_transform<R: Rng + ?Sized>(
    img: &Image,
    mode: HalfResMode,
    rng: &mut R,
) -> Result<Image> {
    halfres_transform_with_region(img, mode, rng).map(|(img, _)| img)
}
