//! Independent oracles shared by the integration suites. Nothing here calls
//! into the resampling, region or paste code it is used to check.

#![allow(dead_code)]

use mixkit::{Image, Region};
use num_rational::Ratio;
use rand::Rng;

pub type Q = Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn random_image<R: Rng>(rng: &mut R, w: u32, h: u32, c: u8) -> Image {
    let data = (0..w as usize * h as usize * c as usize)
        .map(|_| rng.gen())
        .collect();
    Image::new(w, h, c, data).unwrap()
}

/// Tent-filter weight of input sample `j` for output `i`, pixel-center aligned.
pub fn bilinear_weight(i: u32, j: u32, in_len: u32, out_len: u32) -> Q {
    let pos = (q(i as i64) + Q::new(1, 2)) * q(in_len as i64) / q(out_len as i64) - Q::new(1, 2);
    let pos = pos.max(q(0)).min(q(in_len as i64 - 1));
    let d = pos - q(j as i64);
    let d = if d < q(0) { -d } else { d };
    (q(1) - d).max(q(0))
}

/// Box-filter weight: overlap of input cell `j` with output cell `i`'s
/// footprint, normalised by the footprint length.
pub fn area_weight(i: u32, j: u32, in_len: u32, out_len: u32) -> Q {
    let scale = Q::new(in_len as i64, out_len as i64);
    let (lo, hi) = (q(i as i64) * scale, q(i as i64 + 1) * scale);
    let (a, b) = (q(j as i64), q(j as i64 + 1));
    let overlap = (hi.min(b) - lo.max(a)).max(q(0));
    overlap / scale
}

fn round_half_up(v: Q) -> u8 {
    (v + Q::new(1, 2)).floor().to_integer() as u8
}

fn separable_oracle(
    img: &Image,
    out_w: u32,
    out_h: u32,
    wx: impl Fn(u32, u32) -> Q,
    wy: impl Fn(u32, u32) -> Q,
) -> Image {
    Image::from_fn(out_w, out_h, img.channels(), |ox, oy, ch| {
        let mut acc = q(0);
        for y in 0..img.height() {
            let a = wy(oy, y);
            if a == q(0) {
                continue;
            }
            for x in 0..img.width() {
                let b = wx(ox, x);
                if b != q(0) {
                    acc += a * b * q(img.pixel(x, y)[ch as usize] as i64);
                }
            }
        }
        round_half_up(acc)
    })
    .unwrap()
}

/// Exact-rational pixel-center bilinear resize.
pub fn bilinear_oracle(img: &Image, out_w: u32, out_h: u32) -> Image {
    let (iw, ih) = img.dims();
    separable_oracle(
        img,
        out_w,
        out_h,
        |i, j| bilinear_weight(i, j, iw, out_w),
        |i, j| bilinear_weight(i, j, ih, out_h),
    )
}

/// Exact-rational area-averaging when shrinking an axis, bilinear otherwise.
pub fn area_oracle(img: &Image, out_w: u32, out_h: u32) -> Image {
    let (iw, ih) = img.dims();
    let pick = |in_len: u32, out_len: u32| {
        move |i: u32, j: u32| {
            if out_len < in_len {
                area_weight(i, j, in_len, out_len)
            } else {
                bilinear_weight(i, j, in_len, out_len)
            }
        }
    };
    separable_oracle(img, out_w, out_h, pick(iw, out_w), pick(ih, out_h))
}

pub fn crop_oracle(img: &Image, r: Region) -> Image {
    let mut data = Vec::new();
    for y in r.y_b..r.y_t {
        for x in r.x_l..r.x_r {
            data.extend_from_slice(img.pixel(x, y));
        }
    }
    Image::new(r.x_r - r.x_l, r.y_t - r.y_b, img.channels(), data).unwrap()
}

/// Expected mixed image: patch pixels inside `r`, target pixels elsewhere.
pub fn paste_oracle(patch: &Image, target: &Image, r: Region) -> Image {
    Image::from_fn(
        target.width(),
        target.height(),
        target.channels(),
        |x, y, c| {
            let inside = x >= r.x_l && x < r.x_r && y >= r.y_b && y < r.y_t;
            if inside {
                patch.pixel(x - r.x_l, y - r.y_b)[c as usize]
            } else {
                target.pixel(x, y)[c as usize]
            }
        },
    )
    .unwrap()
}

/// Literal translation of the boundary rules: ceil/floor around the center,
/// extend the far edge when parity leaves the extent one short, then apply the
/// low-edge and high-edge clamp cases in order.
pub fn clamp_literal(center: u32, extent: u32, limit: u32) -> (u32, u32) {
    let c = center as f64;
    let e = extent as f64;
    let mut lo = (c - e / 2.0).ceil();
    let mut hi = (c + e / 2.0).floor();
    if hi - lo != e {
        hi = lo + e;
    }
    if lo <= 0.0 {
        lo = 0.0;
        hi = e;
    }
    if hi >= limit as f64 {
        lo = limit as f64 - e;
        hi = limit as f64;
    }
    (lo as u32, hi as u32)
}

/// Brute force: of all in-bounds windows of the requested extent, the one whose
/// low edge is nearest the unclamped `ceil(c - e/2)`.
pub fn clamp_nearest_window(center: u32, extent: u32, limit: u32) -> (u32, u32) {
    let raw = (center as f64 - extent as f64 / 2.0).ceil();
    (0..=limit - extent)
        .min_by(|&a, &b| {
            (a as f64 - raw)
                .abs()
                .partial_cmp(&(b as f64 - raw).abs())
                .unwrap()
        })
        .map(|lo| (lo, lo + extent))
        .unwrap()
}

/// Heatmap with heavy ties so saliency sets usually hold several coordinates.
pub fn tied_heatmap<R: Rng>(rng: &mut R, w: u32, h: u32) -> mixkit::Heatmap {
    const LEVELS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
    let values = (0..w as usize * h as usize)
        .map(|_| LEVELS[rng.gen_range(0..LEVELS.len())])
        .collect();
    mixkit::Heatmap::new(w, h, values).unwrap()
}

/// Every obtain × paste pair, with the one pairing that needs a unit scale
/// range pinned to it.
pub fn all_matrix_configs() -> Vec<mixkit::MixConfig> {
    use mixkit::{MixConfig, Obtain, PasteTo};
    let mut out = Vec::new();
    for &o in Obtain::ALL {
        for &p in PasteTo::ALL {
            let cfg = MixConfig::new(o, p);
            if o == Obtain::ResizeWhole && p == PasteTo::Corresponding {
                out.push(cfg.with_scale_range(1.0, 1.0));
            } else {
                out.push(cfg);
            }
        }
    }
    out
}

/// Writes `n` random RGB images (and heatmaps) plus a tab-separated manifest.
pub fn write_dataset<R: Rng>(
    rng: &mut R,
    dir: &std::path::Path,
    n: usize,
    w: u32,
    h: u32,
    classes: u32,
) -> std::path::PathBuf {
    let mut manifest = String::new();
    for i in 0..n {
        let img = random_image(rng, w, h, 3);
        mixkit::imgcore::save_image(&img, dir.join(format!("img{i}.png"))).unwrap();
        let hm = random_image(rng, w, h, 1);
        mixkit::imgcore::save_image(&hm, dir.join(format!("hm{i}.png"))).unwrap();
        let class = rng.gen_range(0..classes);
        manifest.push_str(&format!("img{i}.png\t{class}\thm{i}.png\n"));
    }
    let path = dir.join("index.tsv");
    std::fs::write(&path, manifest).unwrap();
    path
}
