//! Wavelength- and temperature-dependent refractive indices for the crystal
//! y and z axes.
//!
//! The total index is `n(λ, T) = n_sell(λ) + Δn(λ, T)` where `n_sell` is a
//! single-pole Sellmeier form
//!
//! ```text
//! n_sell(λ) = sqrt(A + B / (1 − C·λ⁻²) + D·λ²)        λ in µm, D < 0
//! ```
//!
//! and the thermo-optic correction is
//!
//! ```text
//! Δn(λ, T) = n1(λ)·ΔT + n2(λ)·ΔT²          ΔT = T − T_ref
//! n1, n2   = Σ_{m=0..3} a_m / λ^m
//! ```
//!
//! Note on the correction form: transcriptions of this correction sometimes
//! print both terms linear in ΔT; here the second term is quadratic, as in
//! the thermo-optic dispersion fit it is taken from (Emanueli & Arie 2003,
//! below). At KTP magnitudes the two conventions differ by a few 10⁻⁴ in
//! index at 405 nm and less elsewhere.
//!
//! ## Built-in KTP profile
//!
//! | Piece | Source |
//! |-------|--------|
//! | Sellmeier n_y, n_z | T. Y. Fan et al., Appl. Opt. 26, 2390 (1987) |
//! | Thermo-optic a_m (n1 in 10⁻⁶/°C, n2 in 10⁻⁸/°C²) | S. Emanueli, A. Arie, Appl. Opt. 42, 6661 (2003) |
//!
//! The Emanueli–Arie fit is specified for 0.43–1.58 µm; the profile's
//! declared window [0.40, 1.10] µm extends slightly below that at the blue
//! end, where the polynomials are evaluated as-is. Queries outside the
//! window fail loudly rather than extrapolate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Crystallographic polarization axis of a wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Y,
    Z,
}

/// Coefficients of `sqrt(A + B/(1 − C·λ⁻²) + D·λ²)`, λ in µm.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SellmeierCoefficients {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// Cubic 1/λ polynomials for the linear (`n1`, per °C) and quadratic
/// (`n2`, per °C²) thermo-optic terms; index m is the power of 1/λ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThermoOpticCoefficients {
    pub n1: [f64; 4],
    pub n2: [f64; 4],
}

impl ThermoOpticCoefficients {
    fn evaluate(coefficients: &[f64; 4], wavelength_um: f64) -> f64 {
        let inv = 1.0 / wavelength_um;
        // Horner in 1/λ
        coefficients[0] + inv * (coefficients[1] + inv * (coefficients[2] + inv * coefficients[3]))
    }

    /// n1(λ), per °C.
    pub fn n1(&self, wavelength_um: f64) -> f64 {
        Self::evaluate(&self.n1, wavelength_um)
    }

    /// n2(λ), per °C².
    pub fn n2(&self, wavelength_um: f64) -> f64 {
        Self::evaluate(&self.n2, wavelength_um)
    }
}

/// Dispersion data for one crystal axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisDispersion {
    pub sellmeier: SellmeierCoefficients,
    pub thermo_optic: ThermoOpticCoefficients,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisPair {
    pub y: AxisDispersion,
    pub z: AxisDispersion,
}

/// Refractive-index model for both axes with its validity window.
///
/// Instances come from [`DispersionModel::ktp`], a JSON profile
/// ([`DispersionModel::from_json`] / [`from_path`](DispersionModel::from_path)),
/// or literal construction. All constructors run [`validate`](Self::validate).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionModel {
    pub axes: AxisPair,
    pub t_ref_c: f64,
    /// Inclusive wavelength validity window, µm.
    pub validity_um: [f64; 2],
}

/// Name accepted by [`DispersionModel::builtin`] for the shipped KTP profile.
pub const KTP_PROFILE_NAME: &str = "ktp-default";

impl DispersionModel {
    /// Built-in flux-grown KTP profile (see module docs for sources).
    pub fn ktp() -> Self {
        DispersionModel {
            axes: AxisPair {
                y: AxisDispersion {
                    sellmeier: SellmeierCoefficients {
                        a: 2.19229,
                        b: 0.83547,
                        c: 0.04970,
                        d: -0.01621,
                    },
                    thermo_optic: ThermoOpticCoefficients {
                        n1: [6.2897e-6, 6.3061e-6, -6.0629e-6, 2.6486e-6],
                        n2: [-0.14445e-8, 2.2244e-8, -3.5770e-8, 1.3470e-8],
                    },
                },
                z: AxisDispersion {
                    sellmeier: SellmeierCoefficients {
                        a: 2.25411,
                        b: 1.06543,
                        c: 0.05486,
                        d: -0.02140,
                    },
                    thermo_optic: ThermoOpticCoefficients {
                        n1: [9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6],
                        n2: [-1.1882e-8, 10.459e-8, -9.8136e-8, 3.1481e-8],
                    },
                },
            },
            t_ref_c: 25.0,
            validity_um: [0.40, 1.10],
        }
    }

    /// Look up a shipped profile by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            KTP_PROFILE_NAME => Some(Self::ktp()),
            _ => None,
        }
    }

    /// Parse and validate a JSON crystal profile.
    pub fn from_json(json: &str) -> Result<Self> {
        let model: DispersionModel = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }

    /// Load and validate a JSON crystal profile from disk.
    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dispersion model serializes")
    }

    /// Check the structural invariants: a sane window, positive Sellmeier
    /// denominators across it, and indices inside (1.5, 2.2).
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.validity_um;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "validity window [{lo}, {hi}] um is not an increasing positive interval"
            )));
        }
        if !self.t_ref_c.is_finite() {
            return Err(Error::InvalidConfig("t_ref_c is not finite".into()));
        }
        for (name, axis) in [("y", &self.axes.y), ("z", &self.axes.z)] {
            if axis.sellmeier.c >= lo * lo {
                return Err(Error::InvalidConfig(format!(
                    "axis {name}: Sellmeier pole C = {} reaches into the validity window",
                    axis.sellmeier.c
                )));
            }
        }
        // Sample the window; the Sellmeier form is smooth so a coarse grid
        // suffices to catch out-of-range coefficient sets.
        for axis in [Axis::Y, Axis::Z] {
            for step in 0..=20 {
                let lambda = lo + (hi - lo) * f64::from(step) / 20.0;
                let n = self.sellmeier_index(axis, lambda)?;
                if !(1.5 < n && n < 2.2) {
                    return Err(Error::InvalidConfig(format!(
                        "index {n:.4} at {lambda:.4} um is outside (1.5, 2.2)"
                    )));
                }
            }
        }
        Ok(())
    }

    fn axis(&self, axis: Axis) -> &AxisDispersion {
        match axis {
            Axis::Y => &self.axes.y,
            Axis::Z => &self.axes.z,
        }
    }

    fn check_window(&self, wavelength_um: f64) -> Result<()> {
        let [min_um, max_um] = self.validity_um;
        if !wavelength_um.is_finite() || wavelength_um < min_um || wavelength_um > max_um {
            return Err(Error::WavelengthOutOfWindow {
                wavelength_um,
                min_um,
                max_um,
            });
        }
        Ok(())
    }

    /// Room-temperature Sellmeier index at `wavelength_um`.
    pub fn sellmeier_index(&self, axis: Axis, wavelength_um: f64) -> Result<f64> {
        self.check_window(wavelength_um)?;
        let c = &self.axis(axis).sellmeier;
        let lambda_sq = wavelength_um * wavelength_um;
        let radicand = c.a + c.b / (1.0 - c.c / lambda_sq) + c.d * lambda_sq;
        if radicand <= 0.0 {
            return Err(Error::NonPositiveRadicand { wavelength_um });
        }
        Ok(radicand.sqrt())
    }

    /// Thermo-optic index offset `n1(λ)·ΔT + n2(λ)·ΔT²`, exactly zero at
    /// `T = t_ref_c`.
    pub fn temperature_correction(
        &self,
        axis: Axis,
        wavelength_um: f64,
        temperature_c: f64,
    ) -> Result<f64> {
        self.check_window(wavelength_um)?;
        let thermo = &self.axis(axis).thermo_optic;
        let dt = temperature_c - self.t_ref_c;
        Ok(thermo.n1(wavelength_um) * dt + thermo.n2(wavelength_um) * dt * dt)
    }

    /// Total index `n(λ, T)`.
    pub fn refractive_index(
        &self,
        axis: Axis,
        wavelength_um: f64,
        temperature_c: f64,
    ) -> Result<f64> {
        Ok(self.sellmeier_index(axis, wavelength_um)?
            + self.temperature_correction(axis, wavelength_um, temperature_c)?)
    }
}
