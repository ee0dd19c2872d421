//! Coincidence-counting analysis: true rates, CAR, through-origin fits,
//! splitter and loss-budget corrections, and spectral-density conversions.
//!
//! Count rates are Hz and pump powers mW unless a value is explicitly a
//! per-mW slope; the spectral-density conversion is unit-agnostic in the
//! rate (whatever unit goes in comes out per nm / per THz).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// c in nm·THz.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// Accidental-subtracted coincidence rate. Negative subtraction results are
/// statistically possible at low counts; they clamp to zero and raise the
/// flag instead of erroring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueCoincidences {
    pub rate_hz: f64,
    /// Set when accidentals exceeded the measured rate (clamped).
    pub underflow: bool,
}

/// `max(measured − accidentals, 0)` with an underflow flag.
pub fn true_coincidences(measured_hz: f64, accidentals_hz: f64) -> TrueCoincidences {
    let difference = measured_hz - accidentals_hz;
    TrueCoincidences {
        rate_hz: difference.max(0.0),
        underflow: difference < 0.0,
    }
}

/// Uncorrelated-coincidence estimate `singles_a · singles_b · window`.
pub fn accidentals_estimate(singles_a_hz: f64, singles_b_hz: f64, window_s: f64) -> f64 {
    singles_a_hz * singles_b_hz * window_s
}

/// Coincidence-to-accidental ratio. Zero accidentals means the metric is
/// undefined; that is reported as infinite quality rather than a crash.
pub fn car(true_rate_hz: f64, accidentals_hz: f64) -> f64 {
    if accidentals_hz <= 0.0 {
        f64::INFINITY
    } else {
        true_rate_hz / accidentals_hz
    }
}

/// Least-squares line through the origin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub slope_stderr: f64,
    /// 1 − SS_res/SS_tot with SS_tot about the mean of y. Can go negative
    /// for a fit worse than the mean; never exceeds 1.
    pub r_squared: f64,
}

/// Fit `y = slope·x` by least squares: `slope = Σxy/Σx²`, standard error
/// from the residual variance (n−1 degrees of freedom, one parameter).
pub fn fit_through_origin(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points"));
    }
    let sum_xx: f64 = points.iter().map(|(x, _)| x * x).sum();
    if sum_xx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae are zero"));
    }
    let sum_xy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = sum_xy / sum_xx;

    let n = points.len() as f64;
    let mean_y: f64 = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let ss_res: f64 = points.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON * sum_xy.abs() {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(FitResult {
        slope,
        slope_stderr: (ss_res / (n - 1.0) / sum_xx).sqrt(),
        r_squared,
    })
}

/// A 50:50 splitter routes both photons to the same detector half the
/// time; the effective pair rate is twice the coincidence rate.
pub fn splitter_correction(coincidence_rate: f64) -> f64 {
    2.0 * coincidence_rate
}

/// Efficiency chain between intrinsic pair generation and detected
/// coincidences.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossBudget {
    pub pump_coupling: f64,
    pub fiber_coupling: f64,
    /// Per detector arm.
    pub detector_efficiency: f64,
    /// Per filter.
    pub filter_transmission: f64,
    pub n_filters: u32,
}

impl LossBudget {
    /// Measured efficiencies of the reference coincidence setup: 35 % pump
    /// coupling, 30 % fiber coupling, 65 % detection per arm, two 98 %
    /// long-pass filters.
    pub fn reference_setup() -> Self {
        LossBudget {
            pump_coupling: 0.35,
            fiber_coupling: 0.30,
            detector_efficiency: 0.65,
            filter_transmission: 0.98,
            n_filters: 2,
        }
    }

    /// No-loss budget (identity correction).
    pub fn unity() -> Self {
        LossBudget {
            pump_coupling: 1.0,
            fiber_coupling: 1.0,
            detector_efficiency: 1.0,
            filter_transmission: 1.0,
            n_filters: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("pump_coupling", self.pump_coupling),
            ("fiber_coupling", self.fiber_coupling),
            ("detector_efficiency", self.detector_efficiency),
            ("filter_transmission", self.filter_transmission),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {value} must lie in (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Combined transmission applied to a detected pair: coupling terms
    /// once, detector efficiency squared (both arms must fire), filter
    /// transmission once per filter.
    pub fn pair_transmission(&self) -> f64 {
        self.pump_coupling
            * self.fiber_coupling
            * self.detector_efficiency
            * self.detector_efficiency
            * self.filter_transmission.powi(self.n_filters as i32)
    }
}

/// Intrinsic rate from an effective (splitter-corrected) rate. The
/// exponents are the unique combination reproducing the reference setup's
/// published arithmetic; the budget lists factors, the exponents live here.
pub fn loss_corrected_rate(effective_rate: f64, budget: &LossBudget) -> Result<f64> {
    budget.validate()?;
    Ok(effective_rate / budget.pair_transmission())
}

/// Rate normalized to filter bandwidth, in per-nm and per-THz forms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralDensity {
    pub per_nm: f64,
    pub bandwidth_thz: f64,
    pub per_thz: f64,
}

/// Convert a rate over a filter of `bandwidth_nm` centered at
/// `center_wavelength_nm`: Δν = c·Δλ/λ².
pub fn spectral_density(rate: f64, bandwidth_nm: f64, center_wavelength_nm: f64) -> SpectralDensity {
    let bandwidth_thz =
        SPEED_OF_LIGHT_NM_THZ * bandwidth_nm / (center_wavelength_nm * center_wavelength_nm);
    SpectralDensity {
        per_nm: rate / bandwidth_nm,
        bandwidth_thz,
        per_thz: rate / bandwidth_thz,
    }
}

/// One measured power point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoincidencePoint {
    pub pump_power_mw: f64,
    pub measured_hz: f64,
    pub accidentals_hz: f64,
    /// Coincidence window the rates were counted in, s.
    pub window_s: f64,
}

impl CoincidencePoint {
    pub fn new(pump_power_mw: f64, measured_hz: f64, accidentals_hz: f64, window_s: f64) -> Result<Self> {
        if pump_power_mw < 0.0 || measured_hz < 0.0 || accidentals_hz < 0.0 {
            return Err(Error::InvalidConfig(
                "coincidence point rates and power must be non-negative".into(),
            ));
        }
        if !(window_s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "coincidence window {window_s} s must be positive"
            )));
        }
        Ok(CoincidencePoint {
            pump_power_mw,
            measured_hz,
            accidentals_hz,
            window_s,
        })
    }
}

/// Full power-series analysis: through-origin fit of true coincidences,
/// splitter correction, loss-budget correction, and per-point CAR.
#[derive(Debug, Clone, Serialize)]
pub struct PowerSeriesAnalysis {
    pub fit: FitResult,
    /// 2 × slope, same per-mW unit as the input rates.
    pub effective_rate: f64,
    /// Effective rate divided by the pair transmission.
    pub intrinsic_rate: f64,
    /// (pump power, CAR) per input point.
    pub car_series: Vec<(f64, f64)>,
}

pub fn analyze_power_series(
    points: &[CoincidencePoint],
    budget: &LossBudget,
) -> Result<PowerSeriesAnalysis> {
    let true_points: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            (
                p.pump_power_mw,
                true_coincidences(p.measured_hz, p.accidentals_hz).rate_hz,
            )
        })
        .collect();
    let fit = fit_through_origin(&true_points)?;
    let effective_rate = splitter_correction(fit.slope);
    let intrinsic_rate = loss_corrected_rate(effective_rate, budget)?;
    let car_series = points
        .iter()
        .map(|p| {
            let true_rate = true_coincidences(p.measured_hz, p.accidentals_hz).rate_hz;
            (p.pump_power_mw, car(true_rate, p.accidentals_hz))
        })
        .collect();
    Ok(PowerSeriesAnalysis {
        fit,
        effective_rate,
        intrinsic_rate,
        car_series,
    })
}
