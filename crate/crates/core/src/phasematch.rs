//! Grating thermal expansion, collinear QPM phase-mismatch evaluation, and
//! root-finding for signal/idler tuning curves.
//!
//! The mismatch for a pump → signal + idler process of QPM order m is
//!
//! ```text
//! Δk = k_p − k_s − k_i − m·(2π/Λ(T)) − k_wg,     k = 2π n(axis, λ, T)/λ
//! ```
//!
//! with the polarization axis of each wave fixed by the process kind
//! (type-0: z,z,z; type-II: y,z,y) and `k_wg` a fitted scalar standing in
//! for waveguide dispersion, treated as wavelength- and temperature-
//! independent. Δk = 0 means phase matched. All k values are rad/µm;
//! wavelengths are nm at this interface.

use serde::{Deserialize, Serialize};

use crate::dispersion::{Axis, DispersionModel};
use crate::error::{Error, Result};
use crate::solver;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Solver guarantee on |Δk| at any returned root, rad/µm.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Bisection coordinate tolerance before the secant polish, µm.
const WAVELENGTH_X_TOL_UM: f64 = 1e-6; // 1e-3 nm
/// Residual target the polish iterates to, rad/µm.
const SOLVE_F_TOL: f64 = 1e-9;
/// Wavelength agreement defining a dual-process intersection, nm.
pub const INTERSECTION_TOL_NM: f64 = 0.01;
/// Grid density used when scanning a bracket for sign changes.
const SCAN_SUBDIVISIONS: usize = 256;

/// KTP d33, pm/V.
pub const D33_KTP_PM_PER_V: f64 = 18.5;
/// KTP d24 measured at 880 nm, pm/V (Vanherzeele & Bierlein 1992).
pub const D24_KTP_PM_PER_V: f64 = 3.92;

/// Periodically poled grating: room-temperature period plus thermal
/// expansion along the grating vector,
/// `Λ(T) = Λ₀·[1 + α·ΔT + β·ΔT²]`, ΔT = T − 25 °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    /// Λ₀ at 25 °C, µm.
    pub poling_period_um: f64,
    /// Linear expansion coefficient, 1/°C.
    pub alpha_per_c: f64,
    /// Quadratic expansion coefficient, 1/°C².
    pub beta_per_c2: f64,
    /// Crystal length along propagation, mm (metadata).
    pub length_mm: f64,
}

/// KTP thermal expansion along x (Emanueli & Arie 2003).
pub const KTP_ALPHA_PER_C: f64 = 6.7e-6;
pub const KTP_BETA_PER_C2: f64 = 11e-9;

/// Temperature range over which the expansion model is trusted, °C.
pub const GRATING_T_RANGE_C: (f64, f64) = (0.0, 100.0);

impl GratingSpec {
    /// KTP grating with the standard expansion coefficients and a 12 mm chip.
    pub fn ktp(poling_period_um: f64) -> Self {
        GratingSpec {
            poling_period_um,
            alpha_per_c: KTP_ALPHA_PER_C,
            beta_per_c2: KTP_BETA_PER_C2,
            length_mm: 12.0,
        }
    }

    /// Λ(T), µm.
    pub fn poling_period(&self, temperature_c: f64) -> Result<f64> {
        let (min_c, max_c) = GRATING_T_RANGE_C;
        if !temperature_c.is_finite() || temperature_c < min_c || temperature_c > max_c {
            return Err(Error::TemperatureOutOfRange {
                temperature_c,
                min_c,
                max_c,
            });
        }
        let dt = temperature_c - 25.0;
        Ok(self.poling_period_um * (1.0 + self.alpha_per_c * dt + self.beta_per_c2 * dt * dt))
    }

    /// Grating constant 2π/Λ(T), rad/µm.
    pub fn grating_constant(&self, temperature_c: f64) -> Result<f64> {
        Ok(TWO_PI / self.poling_period(temperature_c)?)
    }
}

/// SPDC polarization configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    /// Pump, signal, idler all z-polarized (d33).
    Type0,
    /// Pump and idler y-polarized, signal z-polarized (d24).
    Type2,
}

/// One QPM-assisted SPDC process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub pump_axis: Axis,
    pub signal_axis: Axis,
    pub idler_axis: Axis,
    /// QPM order m: odd, ≥ 1.
    pub qpm_order: u32,
    /// Waveguide contribution to the mismatch, rad/µm (may be negative).
    pub k_wg: f64,
    /// Effective nonlinear coefficient, pm/V (metadata for brightness ratios).
    pub d_eff_pm_per_v: f64,
}

fn check_order(order: u32) -> Result<()> {
    if order == 0 || order % 2 == 0 {
        return Err(Error::InvalidQpmOrder { order });
    }
    Ok(())
}

impl ProcessSpec {
    /// Type-0 (z,z,z) process using d33.
    pub fn type0(qpm_order: u32, k_wg: f64) -> Result<Self> {
        check_order(qpm_order)?;
        Ok(ProcessSpec {
            kind: ProcessKind::Type0,
            pump_axis: Axis::Z,
            signal_axis: Axis::Z,
            idler_axis: Axis::Z,
            qpm_order,
            k_wg,
            d_eff_pm_per_v: D33_KTP_PM_PER_V,
        })
    }

    /// Type-II (y,z,y) process using d24.
    pub fn type2(qpm_order: u32, k_wg: f64) -> Result<Self> {
        check_order(qpm_order)?;
        Ok(ProcessSpec {
            kind: ProcessKind::Type2,
            pump_axis: Axis::Y,
            signal_axis: Axis::Z,
            idler_axis: Axis::Y,
            qpm_order,
            k_wg,
            d_eff_pm_per_v: D24_KTP_PM_PER_V,
        })
    }

    /// Construct by kind.
    pub fn new(kind: ProcessKind, qpm_order: u32, k_wg: f64) -> Result<Self> {
        match kind {
            ProcessKind::Type0 => Self::type0(qpm_order, k_wg),
            ProcessKind::Type2 => Self::type2(qpm_order, k_wg),
        }
    }
}

/// One phase-matched solution of the tuning problem. Wavelengths are
/// ordered `signal_nm ≤ idler_nm` and satisfy energy conservation with the
/// pump exactly (the idler is derived, not solved).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuningPoint {
    pub temperature_c: f64,
    pub signal_nm: f64,
    pub idler_nm: f64,
    /// Δk at the returned point, rad/µm.
    pub residual: f64,
}

/// Sweep entry: a temperature with either a solution or a gap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TuningEntry {
    pub temperature_c: f64,
    pub point: Option<TuningPoint>,
}

/// Result of sweeping [`solve_pair`] over a temperature range.
#[derive(Debug, Clone, Serialize)]
pub struct TuningCurve {
    pub entries: Vec<TuningEntry>,
}

impl TuningCurve {
    pub fn solved(&self) -> impl Iterator<Item = &TuningPoint> {
        self.entries.iter().filter_map(|e| e.point.as_ref())
    }

    /// Temperatures where no phase-matched pair exists.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries
            .iter()
            .filter(|e| e.point.is_none())
            .map(|e| e.temperature_c)
    }
}

/// Temperature where two processes emit at the same signal wavelength.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Intersection {
    pub temperature_c: f64,
    pub point: TuningPoint,
    /// True when the two tuning curves coincide everywhere in the bracket
    /// (identical process specs); the reported temperature is then the
    /// lowest solvable one.
    pub identical_curves: bool,
}

/// Idler wavelength from energy conservation, `1/λ_i = 1/λ_p − 1/λ_s`.
pub fn idler_from_energy(pump_nm: f64, signal_nm: f64) -> Result<f64> {
    if !(pump_nm > 0.0 && signal_nm > pump_nm) {
        return Err(Error::NonPhysicalPair { pump_nm, signal_nm });
    }
    Ok(1.0 / (1.0 / pump_nm - 1.0 / signal_nm))
}

/// Δk for the given process at one (pump, signal, temperature) point; the
/// idler comes from energy conservation. Zero means phase matched.
pub fn phase_mismatch(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    signal_nm: f64,
    temperature_c: f64,
) -> Result<f64> {
    let idler_nm = idler_from_energy(pump_nm, signal_nm)?;
    let k = |axis: Axis, nm: f64| -> Result<f64> {
        let um = nm * 1e-3;
        Ok(TWO_PI * dispersion.refractive_index(axis, um, temperature_c)? / um)
    };
    let k_pump = k(process.pump_axis, pump_nm)?;
    let k_signal = k(process.signal_axis, signal_nm)?;
    let k_idler = k(process.idler_axis, idler_nm)?;
    let grating_k = grating.grating_constant(temperature_c)?;
    Ok(k_pump - k_signal - k_idler - f64::from(process.qpm_order) * grating_k - process.k_wg)
}

/// Widest signal bracket (nm) for which signal and derived idler both stay
/// inside the dispersion window, capped at degeneracy (2λ_p).
pub fn default_signal_bracket(dispersion: &DispersionModel, pump_nm: f64) -> (f64, f64) {
    let [window_lo_um, window_hi_um] = dispersion.validity_um;
    let window_lo_nm = window_lo_um * 1e3;
    let window_hi_nm = window_hi_um * 1e3;
    // idler(signal) is largest at the low end of the bracket
    let idler_limited_nm = 1.0 / (1.0 / pump_nm - 1.0 / window_hi_nm);
    let lo = window_lo_nm.max(idler_limited_nm) + 1e-3;
    let hi = (2.0 * pump_nm).min(window_hi_nm);
    (lo, hi)
}

struct SolvedRoot {
    signal_nm: f64,
    residual: f64,
}

fn solve_in_segment(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    temperature_c: f64,
    lo_nm: f64,
    hi_nm: f64,
) -> Result<Option<SolvedRoot>> {
    let mut mismatch = |signal_nm: f64| -> Result<f64> {
        phase_mismatch(dispersion, grating, process, pump_nm, signal_nm, temperature_c)
    };
    let Some((a, fa, b, fb)) =
        solver::first_sign_change(&mut mismatch, lo_nm, hi_nm, SCAN_SUBDIVISIONS)?
    else {
        return Ok(None);
    };
    let root = solver::refine(
        &mut mismatch,
        a,
        fa,
        b,
        fb,
        WAVELENGTH_X_TOL_UM * 1e3, // nm
        SOLVE_F_TOL,
    )?;
    Ok(Some(SolvedRoot {
        signal_nm: root.x,
        residual: root.residual,
    }))
}

/// Find the signal wavelength in `bracket_nm` where Δk crosses zero at the
/// given temperature. Returns `Ok(None)` when the bracket holds no root:
/// a legitimate sweep outcome, not an error.
///
/// For type-0 the mismatch is symmetric under signal↔idler exchange, so a
/// bracket reaching past degeneracy is folded onto the short-wavelength
/// side and the mirrored root is recovered through the ordering convention.
pub fn solve_pair(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    temperature_c: f64,
    bracket_nm: (f64, f64),
) -> Result<Option<TuningPoint>> {
    let (lo, hi) = bracket_nm;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo > pump_nm) {
        return Err(Error::InvalidBracket { low: lo, high: hi });
    }
    let degenerate_nm = 2.0 * pump_nm;
    let mut segments: Vec<(f64, f64)> = Vec::with_capacity(2);
    match process.kind {
        ProcessKind::Type0 => {
            if lo < degenerate_nm {
                segments.push((lo, hi.min(degenerate_nm)));
            }
            if hi > degenerate_nm {
                // mirror [max(lo, 2λp), hi] onto the short side
                let mirrored_lo = idler_from_energy(pump_nm, hi)?;
                let mirrored_hi = if lo > degenerate_nm {
                    idler_from_energy(pump_nm, lo)?
                } else {
                    degenerate_nm
                };
                if mirrored_lo < mirrored_hi {
                    segments.push((mirrored_lo, mirrored_hi));
                }
            }
        }
        ProcessKind::Type2 => segments.push((lo, hi)),
    }

    for (seg_lo, seg_hi) in segments {
        if let Some(root) =
            solve_in_segment(dispersion, grating, process, pump_nm, temperature_c, seg_lo, seg_hi)?
        {
            let partner_nm = idler_from_energy(pump_nm, root.signal_nm)?;
            let (signal_nm, idler_nm) = if root.signal_nm <= partner_nm {
                (root.signal_nm, partner_nm)
            } else {
                (partner_nm, root.signal_nm)
            };
            return Ok(Some(TuningPoint {
                temperature_c,
                signal_nm,
                idler_nm,
                residual: root.residual,
            }));
        }
    }
    Ok(None)
}

/// Sweep `solve_pair` over `[t_min, t_max]` in steps of `step_c`, recording
/// gaps where no pair phase-matches. The signal bracket is the model's
/// [`default_signal_bracket`].
pub fn tuning_curve(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    t_range_c: (f64, f64),
    step_c: f64,
) -> Result<TuningCurve> {
    if !(step_c > 0.0) {
        return Err(Error::NonPositiveStep { step: step_c });
    }
    let (t_min, t_max) = t_range_c;
    if !(t_min.is_finite() && t_max.is_finite() && t_min <= t_max) {
        return Err(Error::InvalidBracket { low: t_min, high: t_max });
    }
    let bracket = default_signal_bracket(dispersion, pump_nm);
    let mut entries = Vec::new();
    let mut index = 0u64;
    loop {
        let t = t_min + step_c * index as f64;
        if t > t_max + step_c * 1e-9 {
            break;
        }
        let point = solve_pair(dispersion, grating, process, pump_nm, t, bracket)?;
        entries.push(TuningEntry {
            temperature_c: t,
            point,
        });
        index += 1;
    }
    Ok(TuningCurve { entries })
}

/// Temperature in `t_bracket_c` where the process phase-matches at
/// degeneracy (signal = idler = 2λ_p), or `None` when Δk(2λ_p, ·) has no
/// zero crossing in the bracket.
pub fn degeneracy_temperature(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    t_bracket_c: (f64, f64),
) -> Result<Option<f64>> {
    let (lo, hi) = t_bracket_c;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBracket { low: lo, high: hi });
    }
    let degenerate_nm = 2.0 * pump_nm;
    let mut mismatch = |t: f64| -> Result<f64> {
        phase_mismatch(dispersion, grating, process, pump_nm, degenerate_nm, t)
    };
    let Some((a, fa, b, fb)) = solver::first_sign_change(&mut mismatch, lo, hi, 128)? else {
        return Ok(None);
    };
    let root = solver::refine(&mut mismatch, a, fa, b, fb, 1e-4, SOLVE_F_TOL)?;
    Ok(Some(root.x))
}

/// Temperature where the two processes' solved signal wavelengths coincide
/// (|λ_s^A − λ_s^B| < [`INTERSECTION_TOL_NM`]). Identical specs intersect
/// everywhere; that degenerate case is flagged and reported at the lowest
/// solvable temperature. `Ok(None)` when the curves never cross in the
/// bracket.
pub fn find_intersection(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process_a: &ProcessSpec,
    process_b: &ProcessSpec,
    pump_nm: f64,
    t_bracket_c: (f64, f64),
) -> Result<Option<Intersection>> {
    let (lo, hi) = t_bracket_c;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBracket { low: lo, high: hi });
    }
    let bracket = default_signal_bracket(dispersion, pump_nm);
    let solve_both = |t: f64| -> Result<Option<(TuningPoint, TuningPoint)>> {
        let a = solve_pair(dispersion, grating, process_a, pump_nm, t, bracket)?;
        let b = solve_pair(dispersion, grating, process_b, pump_nm, t, bracket)?;
        Ok(match (a, b) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        })
    };

    const SAMPLES: usize = 120;
    let mut grid: Vec<(f64, Option<f64>)> = Vec::with_capacity(SAMPLES + 1);
    let mut first_solvable: Option<(f64, TuningPoint)> = None;
    for i in 0..=SAMPLES {
        let t = lo + (hi - lo) * (i as f64) / (SAMPLES as f64);
        let difference = match solve_both(t)? {
            Some((a, b)) => {
                if first_solvable.is_none() {
                    first_solvable = Some((t, a));
                }
                Some(a.signal_nm - b.signal_nm)
            }
            None => None,
        };
        grid.push((t, difference));
    }

    // identical curves: defined somewhere and coincident at every defined sample
    let defined: Vec<(f64, f64)> = grid
        .iter()
        .filter_map(|(t, d)| d.map(|d| (*t, d)))
        .collect();
    if !defined.is_empty() && defined.iter().all(|(_, d)| d.abs() < 1e-9) {
        let (t, point) = first_solvable.expect("solvable sample recorded");
        return Ok(Some(Intersection {
            temperature_c: t,
            point,
            identical_curves: true,
        }));
    }

    for window in defined.windows(2) {
        let (t0, d0) = window[0];
        let (t1, d1) = window[1];
        if d0 == 0.0 || d0 * d1 < 0.0 {
            let (mut a, mut da, mut b) = (t0, d0, t1);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let Some((pa, pb)) = solve_both(mid)? else {
                    // gap opened inside the refinement interval; give up on it
                    break;
                };
                let dm = pa.signal_nm - pb.signal_nm;
                if dm.abs() < INTERSECTION_TOL_NM {
                    return Ok(Some(Intersection {
                        temperature_c: mid,
                        point: pa,
                        identical_curves: false,
                    }));
                }
                if da * dm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    da = dm;
                }
            }
        }
    }
    Ok(None)
}
