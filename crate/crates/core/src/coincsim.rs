//! Seeded Monte Carlo simulator of photon-pair detection.
//!
//! Pairs are emitted as a Poisson process, routed through a splitter,
//! thinned by per-arm detector efficiency, smeared by Gaussian timing
//! jitter, and mixed with independent Poissonian dark counts. The two
//! resulting time-tag streams feed a two-pointer correlation histogram
//! whose central window yields measured/accidental rates and a CAR. This
//! is the synthetic-data oracle for the `pairstats` analysis.
//!
//! Every stochastic ingredient draws from its own substream of one seeded
//! generator, so e.g. adding dark counts does not perturb pair times, and a
//! given config replays bit-identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairstats;

/// How pairs are divided between the two detector arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitterModel {
    /// Each photon independently lands in either arm with probability ½
    /// (fiber beam splitter): half the pairs bunch and are lost to
    /// coincidence counting.
    FiftyFifty,
    /// One photon per arm, always (polarization splitting of a
    /// type-II-like pair).
    Deterministic,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    pub pair_rate_hz: f64,
    pub dark_rate_a_hz: f64,
    pub dark_rate_b_hz: f64,
    pub efficiency_a: f64,
    pub efficiency_b: f64,
    /// Gaussian timing jitter per detection, s.
    pub jitter_sigma_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub splitter: SplitterModel,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("pair_rate_hz", self.pair_rate_hz),
            ("dark_rate_a_hz", self.dark_rate_a_hz),
            ("dark_rate_b_hz", self.dark_rate_b_hz),
            ("jitter_sigma_s", self.jitter_sigma_s),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} = {value} must be >= 0")));
            }
        }
        for (name, value) in [("efficiency_a", self.efficiency_a), ("efficiency_b", self.efficiency_b)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidConfig(format!("{name} = {value} must lie in [0, 1]")));
            }
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duration_s = {} must be positive",
                self.duration_s
            )));
        }
        Ok(())
    }
}

/// Sorted detection times (s) for the two arms.
#[derive(Debug, Clone, PartialEq)]
pub struct TagStreams {
    pub arm_a: Vec<f64>,
    pub arm_b: Vec<f64>,
}

// Substream ids of the seeded generator.
const STREAM_PAIR_TIMES: u64 = 0;
const STREAM_ROUTING: u64 = 1;
const STREAM_THIN_A: u64 = 2;
const STREAM_THIN_B: u64 = 3;
const STREAM_JITTER_A: u64 = 4;
const STREAM_JITTER_B: u64 = 5;
const STREAM_DARK_A: u64 = 6;
const STREAM_DARK_B: u64 = 7;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Homogeneous Poisson arrival times over [0, duration).
fn poisson_times(rate_hz: f64, duration_s: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if rate_hz <= 0.0 {
        return Vec::new();
    }
    let exponential = Exp::new(rate_hz).expect("positive rate");
    let mut times = Vec::with_capacity((rate_hz * duration_s * 1.1) as usize + 4);
    let mut t = exponential.sample(rng);
    while t < duration_s {
        times.push(t);
        t += exponential.sample(rng);
    }
    times
}

struct Arm {
    thin: ChaCha8Rng,
    jitter_rng: ChaCha8Rng,
    jitter: Option<Normal<f64>>,
    efficiency: f64,
    tags: Vec<f64>,
}

impl Arm {
    fn detect(&mut self, time: f64) {
        if self.efficiency < 1.0 && self.thin.random::<f64>() >= self.efficiency {
            return;
        }
        let smeared = match &self.jitter {
            Some(normal) => time + normal.sample(&mut self.jitter_rng),
            None => time,
        };
        self.tags.push(smeared);
    }
}

/// Run the forward model; fully reproducible from `config.seed`.
pub fn simulate(config: &SimConfig) -> Result<TagStreams> {
    config.validate()?;
    let jitter = if config.jitter_sigma_s > 0.0 {
        Some(Normal::new(0.0, config.jitter_sigma_s).expect("validated sigma"))
    } else {
        None
    };
    let mut arm_a = Arm {
        thin: substream(config.seed, STREAM_THIN_A),
        jitter_rng: substream(config.seed, STREAM_JITTER_A),
        jitter,
        efficiency: config.efficiency_a,
        tags: Vec::new(),
    };
    let mut arm_b = Arm {
        thin: substream(config.seed, STREAM_THIN_B),
        jitter_rng: substream(config.seed, STREAM_JITTER_B),
        jitter,
        efficiency: config.efficiency_b,
        tags: Vec::new(),
    };

    let mut emission = substream(config.seed, STREAM_PAIR_TIMES);
    let mut routing = substream(config.seed, STREAM_ROUTING);
    for time in poisson_times(config.pair_rate_hz, config.duration_s, &mut emission) {
        match config.splitter {
            SplitterModel::Deterministic => {
                arm_a.detect(time);
                arm_b.detect(time);
            }
            SplitterModel::FiftyFifty => {
                for _ in 0..2 {
                    if routing.random::<f64>() < 0.5 {
                        arm_a.detect(time);
                    } else {
                        arm_b.detect(time);
                    }
                }
            }
        }
    }

    let mut dark_a = substream(config.seed, STREAM_DARK_A);
    arm_a
        .tags
        .extend(poisson_times(config.dark_rate_a_hz, config.duration_s, &mut dark_a));
    let mut dark_b = substream(config.seed, STREAM_DARK_B);
    arm_b
        .tags
        .extend(poisson_times(config.dark_rate_b_hz, config.duration_s, &mut dark_b));

    arm_a.tags.sort_by(f64::total_cmp);
    arm_b.tags.sort_by(f64::total_cmp);
    Ok(TagStreams {
        arm_a: arm_a.tags,
        arm_b: arm_b.tags,
    })
}

/// Correlation histogram of arrival-time differences `b − a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceHistogram {
    pub bin_width_s: f64,
    /// Odd number of bins; the middle bin is centered on zero delay.
    pub bins: Vec<u64>,
    /// Acquisition time the streams span, s (needed to turn counts into rates).
    pub duration_s: f64,
}

impl CoincidenceHistogram {
    pub fn span_s(&self) -> f64 {
        self.bin_width_s * self.bins.len() as f64
    }

    pub fn bin_center_s(&self, index: usize) -> f64 {
        (index as f64 - (self.bins.len() as f64 - 1.0) / 2.0) * self.bin_width_s
    }

    pub fn total_counts(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Merge bins by an odd `factor` dividing the bin count; keeps the zero
    /// bin centered and conserves counts exactly.
    pub fn rebin(&self, factor: usize) -> Result<CoincidenceHistogram> {
        if factor == 0 || factor % 2 == 0 || self.bins.len() % factor != 0 {
            return Err(Error::InvalidConfig(format!(
                "rebin factor {factor} must be odd and divide {} bins",
                self.bins.len()
            )));
        }
        let bins = self
            .bins
            .chunks(factor)
            .map(|chunk| chunk.iter().sum())
            .collect();
        Ok(CoincidenceHistogram {
            bin_width_s: self.bin_width_s * factor as f64,
            bins,
            duration_s: self.duration_s,
        })
    }
}

/// Histogram all pairwise differences `b − a` within ±span/2 by a forward
/// two-pointer sweep over the sorted streams (no quadratic pairing). The
/// bin count is rounded up to odd so a zero difference lands in the middle
/// bin.
pub fn build_histogram(
    arm_a: &[f64],
    arm_b: &[f64],
    bin_width_s: f64,
    span_s: f64,
    duration_s: f64,
) -> Result<CoincidenceHistogram> {
    if !(bin_width_s > 0.0 && span_s >= bin_width_s) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < bin_width ({bin_width_s}) <= span ({span_s})"
        )));
    }
    if !(duration_s > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "duration_s = {duration_s} must be positive"
        )));
    }
    let mut n_bins = (span_s / bin_width_s).round() as usize;
    n_bins = n_bins.max(1);
    if n_bins % 2 == 0 {
        n_bins += 1;
    }
    let half_span = 0.5 * n_bins as f64 * bin_width_s;
    let mut bins = vec![0u64; n_bins];

    let mut window_start = 0usize;
    for &a in arm_a {
        while window_start < arm_b.len() && arm_b[window_start] < a - half_span {
            window_start += 1;
        }
        for &b in &arm_b[window_start..] {
            let difference = b - a;
            if difference >= half_span {
                break;
            }
            let index = ((difference + half_span) / bin_width_s) as usize;
            bins[index.min(n_bins - 1)] += 1;
        }
    }
    Ok(CoincidenceHistogram {
        bin_width_s,
        bins,
        duration_s,
    })
}

/// Rates extracted from a histogram's central window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistogramAnalysis {
    /// Raw coincidence rate inside the window.
    pub measured_hz: f64,
    /// Flat-background expectation inside the window, estimated from the
    /// side bins.
    pub accidentals_hz: f64,
    /// measured − accidentals, clamped at zero.
    pub true_hz: f64,
    pub underflow: bool,
    /// In-window rate relative to the accidental expectation: about 1 for
    /// uncorrelated streams, large for a correlated source.
    pub car: f64,
}

/// Split the histogram at `window_s` (full width, centered on zero delay):
/// bins inside give the measured rate, the mean of the side bins scaled to
/// the window width gives the accidental rate, and their ratio the CAR.
pub fn analyze_histogram(
    histogram: &CoincidenceHistogram,
    window_s: f64,
) -> Result<HistogramAnalysis> {
    if !(window_s > 0.0 && window_s <= histogram.span_s()) {
        return Err(Error::InvalidConfig(format!(
            "window {window_s} s must lie in (0, span = {} s]",
            histogram.span_s()
        )));
    }
    let half_window = 0.5 * window_s;
    let mut window_counts = 0u64;
    let mut window_bins = 0usize;
    let mut side_counts = 0u64;
    let mut side_bins = 0usize;
    for (index, &count) in histogram.bins.iter().enumerate() {
        if histogram.bin_center_s(index).abs() <= half_window {
            window_counts += count;
            window_bins += 1;
        } else {
            side_counts += count;
            side_bins += 1;
        }
    }
    if side_bins == 0 {
        return Err(Error::EmptyHistogramSide);
    }
    let measured_hz = window_counts as f64 / histogram.duration_s;
    let accidentals_hz =
        (side_counts as f64 / side_bins as f64) * window_bins as f64 / histogram.duration_s;
    let true_rate = pairstats::true_coincidences(measured_hz, accidentals_hz);
    Ok(HistogramAnalysis {
        measured_hz,
        accidentals_hz,
        true_hz: true_rate.rate_hz,
        underflow: true_rate.underflow,
        car: pairstats::car(measured_hz, accidentals_hz),
    })
}
