//! Synthetic instance generation with the swap x/(100-x) percentile
//! causative attack.
//!
//! Benign models output a shared base signal plus Gaussian noise. Each
//! malicious model additionally has a contiguous region of its series
//! poisoned by exchanging values across the x-th and (100-x)-th percentile
//! band. On data with exact percentile matches the swap is literal; on
//! continuous data, where exact matches never occur, in-region values at or
//! beyond the band edges are reflected to the opposite side.

use std::collections::BTreeSet;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::types::ModelOutputs;

/// Shape of the shared ground-truth series.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseSignal {
    /// `offset + amplitude * sin(2*pi*t / period)`
    Sinusoid { amplitude: f64, period: f64, offset: f64 },
    /// `start + slope * t`
    Trend { start: f64, slope: f64 },
    /// Cycles through `levels`, holding each for `segment_len` slots.
    Piecewise { levels: Vec<f64>, segment_len: usize },
}

impl BaseSignal {
    /// Daily sinusoid sized like an hourly vehicle count.
    pub fn traffic_proxy() -> Self {
        BaseSignal::Sinusoid { amplitude: 100.0, period: 24.0, offset: 120.0 }
    }

    /// Linear remaining-useful-life decay.
    pub fn turbofan_proxy(slots: usize) -> Self {
        BaseSignal::Trend { start: slots as f64 + 50.0, slope: -1.0 }
    }

    pub fn value(&self, t: usize) -> f64 {
        match self {
            BaseSignal::Sinusoid { amplitude, period, offset } => {
                offset + amplitude * (2.0 * std::f64::consts::PI * t as f64 / period).sin()
            }
            BaseSignal::Trend { start, slope } => start + slope * t as f64,
            BaseSignal::Piecewise { levels, segment_len } => {
                levels[(t / (*segment_len).max(1)) % levels.len()]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BaseSignal::Sinusoid { amplitude, period, offset } => {
                if !period.is_finite() || *period <= 0.0 || !amplitude.is_finite() || !offset.is_finite() {
                    return Err(Error::input("sinusoid needs a positive period and finite parameters"));
                }
            }
            BaseSignal::Trend { start, slope } => {
                if !start.is_finite() || !slope.is_finite() {
                    return Err(Error::input("trend parameters must be finite"));
                }
            }
            BaseSignal::Piecewise { levels, segment_len } => {
                if levels.is_empty() || *segment_len == 0 {
                    return Err(Error::input("piecewise signal needs levels and a positive segment length"));
                }
                if levels.iter().any(|v| !v.is_finite()) {
                    return Err(Error::input("piecewise levels must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Everything needed to generate one synthetic instance; identical specs
/// produce bit-identical instances.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub models: usize,
    pub slots: usize,
    pub malicious: usize,
    pub base_signal: BaseSignal,
    pub benign_noise: f64,
    pub attack_percentile: f64,
    pub poison_fraction: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(models: usize, slots: usize, malicious: usize, seed: u64) -> Self {
        InstanceSpec {
            models,
            slots,
            malicious,
            base_signal: BaseSignal::traffic_proxy(),
            benign_noise: 5.0,
            attack_percentile: 5.0,
            poison_fraction: 0.20,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.models == 0 || self.slots == 0 {
            return Err(Error::input("instance needs at least one model and one slot"));
        }
        if self.malicious > self.models {
            return Err(Error::input(format!(
                "{} malicious models out of {}",
                self.malicious, self.models
            )));
        }
        if !(self.attack_percentile > 0.0 && self.attack_percentile < 50.0) {
            return Err(Error::input(format!(
                "attack percentile must lie in (0, 50), got {}",
                self.attack_percentile
            )));
        }
        if !(self.poison_fraction > 0.0 && self.poison_fraction <= 1.0) {
            return Err(Error::input(format!(
                "poison fraction must lie in (0, 1], got {}",
                self.poison_fraction
            )));
        }
        if !self.benign_noise.is_finite() || self.benign_noise < 0.0 {
            return Err(Error::input("benign noise must be a nonnegative number"));
        }
        self.base_signal.validate()
    }
}

/// The x-th percentile by the index method: sort ascending, take the value
/// at 1-based rank `round_half_up(x/100 * n)`, clamped to [1, n]. No
/// interpolation.
pub fn percentile_value(data: &[f64], x: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::input("percentile of an empty list"));
    }
    if !(x > 0.0 && x < 100.0) {
        return Err(Error::input(format!("percentile must lie in (0, 100), got {x}")));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((x / 100.0) * n as f64 + 0.5).floor() as usize;
    Ok(sorted[rank.clamp(1, n) - 1])
}

/// Result of one swap-percentile application.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapOutcome {
    pub series: Vec<f64>,
    /// Count of in-region values swapped by exact match.
    pub exact_swaps: usize,
    /// Count of in-region values moved by reflection (continuous data).
    pub reflections: usize,
    /// True when the two percentile values coincide; the series is
    /// returned unchanged and callers should warn.
    pub degenerate: bool,
}

/// Applies the swap x/(100-x) percentile attack inside `region`.
///
/// Percentiles come from the whole series. When the region contains exact
/// occurrences of either percentile value, those occurrences are exchanged
/// and nothing else moves. Otherwise (continuous data, where the exact
/// swap would be a no-op) every in-region value at or below the low
/// percentile reflects to the high side and vice versa:
/// `v <= v_lo -> v_hi + (v_lo - v)` and `v >= v_hi -> v_lo - (v - v_hi)`.
pub fn swap_percentile_attack(
    series: &[f64],
    x: f64,
    region: Range<usize>,
) -> Result<SwapOutcome> {
    if !(x > 0.0 && x < 50.0) {
        return Err(Error::input(format!("swap percentile must lie in (0, 50), got {x}")));
    }
    if region.start >= region.end || region.end > series.len() {
        return Err(Error::input(format!(
            "region {}..{} outside series of length {}",
            region.start,
            region.end,
            series.len()
        )));
    }
    let v_lo = percentile_value(series, x)?;
    let v_hi = percentile_value(series, 100.0 - x)?;
    let mut out = series.to_vec();
    if v_lo == v_hi {
        return Ok(SwapOutcome { series: out, exact_swaps: 0, reflections: 0, degenerate: true });
    }

    let has_exact = out[region.clone()].iter().any(|&v| v == v_lo || v == v_hi);
    let mut exact_swaps = 0;
    let mut reflections = 0;
    for v in &mut out[region] {
        if has_exact {
            if *v == v_lo {
                *v = v_hi;
                exact_swaps += 1;
            } else if *v == v_hi {
                *v = v_lo;
                exact_swaps += 1;
            }
        } else if *v <= v_lo {
            *v = v_hi + (v_lo - *v);
            reflections += 1;
        } else if *v >= v_hi {
            *v = v_lo - (*v - v_hi);
            reflections += 1;
        }
    }
    Ok(SwapOutcome { series: out, exact_swaps, reflections, degenerate: false })
}

/// A generated instance plus its evaluation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub outputs: ModelOutputs,
    pub ground_truth: Vec<f64>,
    pub malicious_ids: BTreeSet<usize>,
    /// Poisoned slot region per malicious model, keyed by row index.
    pub poison_regions: Vec<(usize, Range<usize>)>,
}

/// Generates a deterministic synthetic ensemble per the spec.
///
/// Model `i` draws its noise from ChaCha stream `i + 1` of the seed, so
/// instances are reproducible regardless of generation order.
pub fn generate_instance(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let t = spec.slots;
    let ground_truth: Vec<f64> = (0..t).map(|j| spec.base_signal.value(j)).collect();

    // Stream 0 is reserved for instance-level choices.
    let mut meta_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    meta_rng.set_stream(0);
    let mut order: Vec<usize> = (0..spec.models).collect();
    order.shuffle(&mut meta_rng);
    let malicious_ids: BTreeSet<usize> = order.into_iter().take(spec.malicious).collect();

    let region_len = ((spec.poison_fraction * t as f64).round() as usize).clamp(1, t);
    let normal = if spec.benign_noise > 0.0 {
        Some(Normal::new(0.0, spec.benign_noise).map_err(|e| Error::input(e.to_string()))?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(spec.models);
    let mut poison_regions = Vec::new();
    for model in 0..spec.models {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(model as u64 + 1);
        let mut row: Vec<f64> = ground_truth.clone();
        if let Some(normal) = &normal {
            for v in &mut row {
                *v += normal.sample(&mut rng);
            }
        }
        if malicious_ids.contains(&model) {
            let start = rng.random_range(0..=t - region_len);
            let region = start..start + region_len;
            let outcome = swap_percentile_attack(&row, spec.attack_percentile, region.clone())?;
            row = outcome.series;
            poison_regions.push((model, region));
        }
        rows.push(row);
    }

    Ok(GeneratedInstance {
        outputs: ModelOutputs::from_rows(rows)?,
        ground_truth,
        malicious_ids,
        poison_regions,
    })
}
