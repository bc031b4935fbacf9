use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixers::{mean_tau_squared, plan_mix, MixConfig, Obtain};
use crate::region::SaliencySets;
use crate::seeded_rng;

pub const HISTOGRAM_BINS: usize = 20;
pub const COVERAGE_BINS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Moments {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            stddev: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Equal-width bins over `[lo, hi]`; the upper edge falls into the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn of(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        let width = hi - lo;
        for &v in values {
            let b = if width > 0.0 {
                (((v - lo) / width) * bins as f64)
                    .floor()
                    .clamp(0.0, (bins - 1) as f64) as usize
            } else {
                0
            };
            counts[b] += 1;
        }
        Self { lo, hi, counts }
    }
}

/// Counts of paste-region centers over a coarse grid of the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGrid {
    pub rows: u32,
    pub cols: u32,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub strategy: MixConfig,
    pub n_samples: u64,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    pub lambda: Moments,
    pub lambda_histogram: Histogram,
    pub tau: Option<Moments>,
    pub tau_histogram: Option<Histogram>,
    /// `E[λ]` ignoring pixel rounding.
    pub analytic_mean_lambda: f64,
    /// `(α² + αβ + β²) / 3`, for resize configurations.
    pub analytic_mean_tau_squared: Option<f64>,
    pub center_coverage: CoverageGrid,
}

/// Simulates mixing geometry without touching pixels.
pub fn stats_report(
    cfg: &MixConfig,
    n_samples: u64,
    image_dims: (u32, u32),
    global_seed: u64,
) -> Result<StatsReport> {
    stats_report_with_sets(cfg, n_samples, image_dims, global_seed, None, None)
}

/// [`stats_report`] for configurations that sample salient or non-salient
/// centers; the sets stand in for every image of the simulated corpus.
pub fn stats_report_with_sets(
    cfg: &MixConfig,
    n_samples: u64,
    (width, height): (u32, u32),
    global_seed: u64,
    source_sets: Option<&SaliencySets>,
    target_sets: Option<&SaliencySets>,
) -> Result<StatsReport> {
    cfg.validate()?;
    if n_samples == 0 {
        return Err(Error::invalid("stats need at least one sample"));
    }
    if width == 0 || height == 0 {
        return Err(Error::invalid("image dimensions must be nonzero"));
    }
    let mut rng = seeded_rng(global_seed);
    let rows = COVERAGE_BINS.min(height);
    let cols = COVERAGE_BINS.min(width);
    let mut coverage = vec![vec![0u64; cols as usize]; rows as usize];
    let mut lambdas = Vec::with_capacity(n_samples as usize);
    let mut taus = Vec::new();

    for _ in 0..n_samples {
        let plan = plan_mix(cfg, width, height, source_sets, target_sets, &mut rng)?;
        lambdas.push(plan.lambda(width, height));
        if let Some(t) = plan.tau {
            taus.push(t);
        }
        let c = plan.paste_region.center();
        let r = (u64::from(c.y) * u64::from(rows) / u64::from(height)) as usize;
        let k = (u64::from(c.x) * u64::from(cols) / u64::from(width)) as usize;
        coverage[r][k] += 1;
    }

    let resize = cfg.obtain == Obtain::ResizeWhole;
    Ok(StatsReport {
        strategy: *cfg,
        n_samples,
        width,
        height,
        seed: global_seed,
        lambda: Moments::of(&lambdas),
        lambda_histogram: Histogram::of(&lambdas, 0.0, 1.0, HISTOGRAM_BINS),
        tau: (!taus.is_empty()).then(|| Moments::of(&taus)),
        tau_histogram: (!taus.is_empty())
            .then(|| Histogram::of(&taus, cfg.alpha, cfg.beta, HISTOGRAM_BINS)),
        analytic_mean_lambda: cfg.analytic_mean_lambda(),
        analytic_mean_tau_squared: resize.then(|| mean_tau_squared(cfg.alpha, cfg.beta)),
        center_coverage: CoverageGrid {
            rows,
            cols,
            counts: coverage,
        },
    })
}
