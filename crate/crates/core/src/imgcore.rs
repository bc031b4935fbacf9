//! Pixel buffers, geometric primitives and PNG I/O.
//!
//! Coordinates follow the usual raster convention: `x` indexes columns, `y`
//! indexes rows and the origin is the top-left sample. Buffers are row-major
//! with interleaved channels.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{
    DynamicImage, ExtendedColorType, ImageDecoder, ImageEncoder, ImageFormat, ImageReader,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Region;

/// An 8-bit grayscale or RGB raster.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "unsupported channel count {channels} (expected 1 or 3)"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::invalid(format!(
                "buffer length {} does not match {width}x{height}x{channels} = {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// An image with every sample set to `value`.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self> {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; len])
    }

    /// Builds an image by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: u32,
        height: u32,
        channels: u8,
        mut f: impl FnMut(u32, u32, u8) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize * channels as usize);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// The region covering the whole image.
    pub fn full_region(&self) -> Region {
        Region::full(self.width, self.height)
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    /// All channel samples at `(x, y)`.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }

    /// Row `y` as a contiguous slice.
    pub fn row(&self, y: u32) -> &[u8] {
        let stride = self.width as usize * self.channels as usize;
        let o = y as usize * stride;
        &self.data[o..o + stride]
    }

    pub(crate) fn row_span_mut(&mut self, y: u32, x_from: u32, x_to: u32) -> &mut [u8] {
        let c = self.channels as usize;
        let o = self.offset(x_from, y);
        &mut self.data[o..o + (x_to - x_from) as usize * c]
    }

    pub(crate) fn row_span(&self, y: u32, x_from: u32, x_to: u32) -> &[u8] {
        let c = self.channels as usize;
        let o = self.offset(x_from, y);
        &self.data[o..o + (x_to - x_from) as usize * c]
    }
}

/// A per-pixel activation map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "heatmap dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if values.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "heatmap has {} values, expected {}",
                values.len(),
                width as usize * height as usize
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!(
                "heatmap activation {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Interprets a grayscale image as activations `v / 255`.
    pub fn from_gray(img: &Image) -> Result<Self> {
        if img.channels() != 1 {
            return Err(Error::invalid(
                "heatmap images must be single-channel grayscale",
            ));
        }
        let values = img.data().iter().map(|&v| f64::from(v) / 255.0).collect();
        Self::new(img.width(), img.height(), values)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Nearest-neighbour resampling, used when a heatmap was computed at a
    /// coarser resolution than its image.
    pub fn resize_nearest(&self, out_w: u32, out_h: u32) -> Result<Self> {
        if out_w == 0 || out_h == 0 {
            return Err(Error::invalid("zero target dimension"));
        }
        let xs = nearest_indices(self.width, out_w);
        let ys = nearest_indices(self.height, out_h);
        let mut values = Vec::with_capacity(out_w as usize * out_h as usize);
        for &sy in &ys {
            for &sx in &xs {
                values.push(self.get(sx, sy));
            }
        }
        Self::new(out_w, out_h, values)
    }
}

fn nearest_indices(in_len: u32, out_len: u32) -> Vec<u32> {
    // floor((i + 0.5) * in / out), evaluated exactly
    (0..out_len as u64)
        .map(|i| (((2 * i + 1) * in_len as u64) / (2 * out_len as u64)) as u32)
        .map(|s| s.min(in_len - 1))
        .collect()
}

/// Resampling filter for [`resize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    /// Two-tap bilinear with pixel-center alignment.
    #[default]
    Bilinear,
    /// Box (area-averaging) filter when shrinking an axis, bilinear otherwise.
    /// Every input sample contributes to the output.
    Area,
}

impl Filter {
    pub fn as_str(self) -> &'static str {
        match self {
            Filter::Bilinear => "bilinear",
            Filter::Area => "area",
        }
    }
}

impl std::str::FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(Filter::Bilinear),
            "area" => Ok(Filter::Area),
            other => Err(Error::invalid(format!(
                "unknown filter '{other}' (expected bilinear or area)"
            ))),
        }
    }
}

/// Integer resampling weights for one axis. Output `i` is
/// `sum(weights[k] * in[start + k]) / den` over its tap range.
struct AxisWeights {
    den: u64,
    taps: Vec<(usize, std::ops::Range<usize>)>,
    weights: Vec<u64>,
}

impl AxisWeights {
    fn build(in_len: u32, out_len: u32, filter: Filter) -> Self {
        if filter == Filter::Area && out_len < in_len {
            Self::area(in_len, out_len)
        } else {
            Self::bilinear(in_len, out_len)
        }
    }

    fn bilinear(in_len: u32, out_len: u32) -> Self {
        // sample position (i + 0.5) * in / out - 0.5, scaled by den = 2 * out
        let den = 2 * u64::from(out_len);
        let last = in_len as usize - 1;
        let mut taps = Vec::with_capacity(out_len as usize);
        let mut weights = Vec::with_capacity(2 * out_len as usize);
        for i in 0..i64::from(out_len) {
            let num = (2 * i + 1) * i64::from(in_len) - i64::from(out_len);
            let (mut lo, mut frac) = if num <= 0 {
                (0, 0)
            } else {
                ((num as u64 / den) as usize, num as u64 % den)
            };
            if lo >= last {
                lo = last;
                frac = 0;
            }
            let at = weights.len();
            if frac == 0 {
                weights.push(den);
            } else {
                weights.extend([den - frac, frac]);
            }
            taps.push((lo, at..weights.len()));
        }
        Self { den, taps, weights }
    }

    fn area(in_len: u32, out_len: u32) -> Self {
        // output i covers [i * in, (i + 1) * in) and input j covers
        // [j * out, (j + 1) * out), both in units of 1 / out
        let (n, m) = (u64::from(in_len), u64::from(out_len));
        let mut taps = Vec::with_capacity(out_len as usize);
        let mut weights = Vec::new();
        for i in 0..m {
            let (lo, hi) = (i * n, (i + 1) * n);
            let first = lo / m;
            let last = (hi - 1) / m;
            let at = weights.len();
            for j in first..=last {
                let overlap = hi.min((j + 1) * m) - lo.max(j * m);
                weights.push(overlap);
            }
            taps.push((first as usize, at..weights.len()));
        }
        Self {
            den: n,
            taps,
            weights,
        }
    }
}

/// Bilinear resize with pixel-center alignment.
///
/// Output sample `i` reads the input at `(i + 0.5) * in / out - 0.5`, clamped
/// to the border. Interpolation is carried out in exact integer arithmetic and
/// rounded half away from zero, so results never depend on floating-point
/// evaluation order.
pub fn resize(img: &Image, out_w: u32, out_h: u32) -> Result<Image> {
    resize_with(img, out_w, out_h, Filter::Bilinear)
}

/// Resize with an explicit filter; see [`Filter`]. Same exact arithmetic and
/// rounding as [`resize`].
pub fn resize_with(img: &Image, out_w: u32, out_h: u32, filter: Filter) -> Result<Image> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::invalid(format!(
            "resize target must be nonzero, got {out_w}x{out_h}"
        )));
    }
    if (out_w, out_h) == img.dims() {
        return Ok(img.clone());
    }
    let xw = AxisWeights::build(img.width, out_w, filter);
    let yw = AxisWeights::build(img.height, out_h, filter);
    let total = xw
        .den
        .checked_mul(yw.den)
        .filter(|t| t.checked_mul(2 * 255 + 1).is_some())
        .ok_or_else(|| Error::invalid("resize dimensions too large"))?;
    let c = img.channels as usize;
    let (in_w, in_h) = (img.width as usize, img.height as usize);
    let (ow, oh) = (out_w as usize, out_h as usize);

    // horizontal pass keeps exact numerators over xw.den
    let mut tmp = vec![0u64; in_h * ow * c];
    for y in 0..in_h {
        let src = &img.data[y * in_w * c..(y + 1) * in_w * c];
        let dst = &mut tmp[y * ow * c..(y + 1) * ow * c];
        for (ox, (start, range)) in xw.taps.iter().enumerate() {
            let ws = &xw.weights[range.clone()];
            for ch in 0..c {
                dst[ox * c + ch] = ws
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| w * u64::from(src[(start + k) * c + ch]))
                    .sum();
            }
        }
    }

    let row = ow * c;
    let mut data = vec![0u8; oh * row];
    for (oy, (start, range)) in yw.taps.iter().enumerate() {
        let ws = &yw.weights[range.clone()];
        let dst = &mut data[oy * row..(oy + 1) * row];
        for (i, out) in dst.iter_mut().enumerate() {
            let sum: u64 = ws
                .iter()
                .enumerate()
                .map(|(k, &w)| w * tmp[(start + k) * row + i])
                .sum();
            *out = ((2 * sum + total) / (2 * total)) as u8;
        }
    }
    Image::new(out_w, out_h, img.channels, data)
}

/// Copies the pixels of `r` into a new image.
pub fn crop(img: &Image, r: Region) -> Result<Image> {
    if !r.fits_within(img.width, img.height) {
        return Err(Error::invalid(format!(
            "crop region {r} outside {}x{} image",
            img.width, img.height
        )));
    }
    let mut data = Vec::with_capacity(r.area() as usize * img.channels as usize);
    for y in r.y_b..r.y_t {
        data.extend_from_slice(img.row_span(y, r.x_l, r.x_r));
    }
    Image::new(r.width(), r.height(), img.channels, data)
}

/// The region a center crop of `out_w × out_h` would take, ties toward the origin.
pub fn center_crop_region(width: u32, height: u32, out_w: u32, out_h: u32) -> Result<Region> {
    if out_w == 0 || out_h == 0 || out_w > width || out_h > height {
        return Err(Error::invalid(format!(
            "center crop {out_w}x{out_h} does not fit in {width}x{height}"
        )));
    }
    let x_l = (width - out_w) / 2;
    let y_b = (height - out_h) / 2;
    Region::new(x_l, x_l + out_w, y_b, y_b + out_h)
}

pub fn center_crop(img: &Image, out_w: u32, out_h: u32) -> Result<Image> {
    let r = center_crop_region(img.width, img.height, out_w, out_h)?;
    crop(img, r)
}

/// Encodes an image as PNG bytes.
pub fn encode_png(img: &Image) -> Vec<u8> {
    let color = match img.channels {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf)
        .write_image(&img.data, img.width, img.height, color)
        .expect("in-memory PNG encoding of a validated buffer");
    buf
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_png(img))
}

fn open_png(path: &Path) -> Result<ImageReader<std::io::BufReader<fs::File>>> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            message: "not a PNG file".into(),
        });
    }
    Ok(reader)
}

fn decode_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

/// Loads an 8-bit grayscale or RGB PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decoded = open_png(path)?
        .decode()
        .map_err(|e| decode_error(path, e))?;
    let (w, h) = (decoded.width(), decoded.height());
    let (channels, data) = match decoded {
        DynamicImage::ImageLuma8(buf) => (1, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => (3, buf.into_raw()),
        other => {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                message: format!(
                    "unsupported pixel format {:?} (expected 8-bit grayscale or RGB)",
                    other.color()
                ),
            })
        }
    };
    Image::new(w, h, channels, data).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads width, height and channel count from the PNG header without decoding pixels.
pub fn probe_image(path: impl AsRef<Path>) -> Result<(u32, u32, u8)> {
    let path = path.as_ref();
    let decoder = open_png(path)?
        .into_decoder()
        .map_err(|e| decode_error(path, e))?;
    let (w, h) = decoder.dimensions();
    let channels = match decoder.color_type() {
        image::ColorType::L8 => 1,
        image::ColorType::Rgb8 => 3,
        other => {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                message: format!(
                    "unsupported pixel format {other:?} (expected 8-bit grayscale or RGB)"
                ),
            })
        }
    };
    Ok((w, h, channels))
}

/// Loads a grayscale PNG as a heatmap (`v / 255`).
pub fn load_heatmap(path: impl AsRef<Path>) -> Result<Heatmap> {
    let path = path.as_ref();
    let img = load_image(path)?;
    Heatmap::from_gray(&img).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
