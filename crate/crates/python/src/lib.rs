//! Python extension module exposing the main types and operations of
//! `spdc-core`. Units follow the library: nm and °C at phase-matching
//! interfaces, µm for dispersion wavelengths, Hz and seconds for counting.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use spdc_core::{coincsim, dispersion, pairstats, phasematch, qpm};

fn value_error(error: spdc_core::Error) -> PyErr {
    PyValueError::new_err(error.to_string())
}

fn parse_axis(axis: &str) -> PyResult<dispersion::Axis> {
    match axis {
        "y" | "Y" => Ok(dispersion::Axis::Y),
        "z" | "Z" => Ok(dispersion::Axis::Z),
        other => Err(PyValueError::new_err(format!("unknown axis {other:?}"))),
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct DispersionModel {
    inner: dispersion::DispersionModel,
}

#[pymethods]
impl DispersionModel {
    /// Built-in KTP profile.
    #[staticmethod]
    fn ktp() -> Self {
        DispersionModel {
            inner: dispersion::DispersionModel::ktp(),
        }
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Ok(DispersionModel {
            inner: dispersion::DispersionModel::from_json(json).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn sellmeier_index(&self, axis: &str, wavelength_um: f64) -> PyResult<f64> {
        self.inner
            .sellmeier_index(parse_axis(axis)?, wavelength_um)
            .map_err(value_error)
    }

    fn temperature_correction(
        &self,
        axis: &str,
        wavelength_um: f64,
        temperature_c: f64,
    ) -> PyResult<f64> {
        self.inner
            .temperature_correction(parse_axis(axis)?, wavelength_um, temperature_c)
            .map_err(value_error)
    }

    fn refractive_index(&self, axis: &str, wavelength_um: f64, temperature_c: f64) -> PyResult<f64> {
        self.inner
            .refractive_index(parse_axis(axis)?, wavelength_um, temperature_c)
            .map_err(value_error)
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct GratingSpec {
    inner: phasematch::GratingSpec,
}

#[pymethods]
impl GratingSpec {
    /// KTP grating: thermal-expansion defaults, 12 mm length.
    #[new]
    #[pyo3(signature = (poling_period_um = 9.96))]
    fn new(poling_period_um: f64) -> Self {
        GratingSpec {
            inner: phasematch::GratingSpec::ktp(poling_period_um),
        }
    }

    fn poling_period(&self, temperature_c: f64) -> PyResult<f64> {
        self.inner.poling_period(temperature_c).map_err(value_error)
    }

    fn grating_constant(&self, temperature_c: f64) -> PyResult<f64> {
        self.inner.grating_constant(temperature_c).map_err(value_error)
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct ProcessSpec {
    inner: phasematch::ProcessSpec,
}

#[pymethods]
impl ProcessSpec {
    #[staticmethod]
    fn type0(qpm_order: u32, k_wg: f64) -> PyResult<Self> {
        Ok(ProcessSpec {
            inner: phasematch::ProcessSpec::type0(qpm_order, k_wg).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn type2(qpm_order: u32, k_wg: f64) -> PyResult<Self> {
        Ok(ProcessSpec {
            inner: phasematch::ProcessSpec::type2(qpm_order, k_wg).map_err(value_error)?,
        })
    }

    #[getter]
    fn qpm_order(&self) -> u32 {
        self.inner.qpm_order
    }

    #[getter]
    fn k_wg(&self) -> f64 {
        self.inner.k_wg
    }

    #[getter]
    fn d_eff_pm_per_v(&self) -> f64 {
        self.inner.d_eff_pm_per_v
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct TuningPoint {
    #[pyo3(get)]
    temperature_c: f64,
    #[pyo3(get)]
    signal_nm: f64,
    #[pyo3(get)]
    idler_nm: f64,
    #[pyo3(get)]
    residual: f64,
}

impl From<phasematch::TuningPoint> for TuningPoint {
    fn from(point: phasematch::TuningPoint) -> Self {
        TuningPoint {
            temperature_c: point.temperature_c,
            signal_nm: point.signal_nm,
            idler_nm: point.idler_nm,
            residual: point.residual,
        }
    }
}

#[pymethods]
impl TuningPoint {
    fn __repr__(&self) -> String {
        format!(
            "TuningPoint(temperature_c={}, signal_nm={}, idler_nm={})",
            self.temperature_c, self.signal_nm, self.idler_nm
        )
    }
}

#[pyfunction]
fn idler_from_energy(pump_nm: f64, signal_nm: f64) -> PyResult<f64> {
    phasematch::idler_from_energy(pump_nm, signal_nm).map_err(value_error)
}

#[pyfunction]
fn phase_mismatch(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    signal_nm: f64,
    temperature_c: f64,
) -> PyResult<f64> {
    phasematch::phase_mismatch(
        &dispersion.inner,
        &grating.inner,
        &process.inner,
        pump_nm,
        signal_nm,
        temperature_c,
    )
    .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (dispersion, grating, process, pump_nm, temperature_c, bracket_nm = None))]
fn solve_pair(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    temperature_c: f64,
    bracket_nm: Option<(f64, f64)>,
) -> PyResult<Option<TuningPoint>> {
    let bracket =
        bracket_nm.unwrap_or_else(|| phasematch::default_signal_bracket(&dispersion.inner, pump_nm));
    Ok(phasematch::solve_pair(
        &dispersion.inner,
        &grating.inner,
        &process.inner,
        pump_nm,
        temperature_c,
        bracket,
    )
    .map_err(value_error)?
    .map(TuningPoint::from))
}

#[pyfunction]
fn tuning_curve(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    t_min_c: f64,
    t_max_c: f64,
    step_c: f64,
) -> PyResult<Vec<(f64, Option<TuningPoint>)>> {
    let curve = phasematch::tuning_curve(
        &dispersion.inner,
        &grating.inner,
        &process.inner,
        pump_nm,
        (t_min_c, t_max_c),
        step_c,
    )
    .map_err(value_error)?;
    Ok(curve
        .entries
        .into_iter()
        .map(|entry| (entry.temperature_c, entry.point.map(TuningPoint::from)))
        .collect())
}

#[pyfunction]
fn degeneracy_temperature(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process: &ProcessSpec,
    pump_nm: f64,
    t_min_c: f64,
    t_max_c: f64,
) -> PyResult<Option<f64>> {
    phasematch::degeneracy_temperature(
        &dispersion.inner,
        &grating.inner,
        &process.inner,
        pump_nm,
        (t_min_c, t_max_c),
    )
    .map_err(value_error)
}

#[pyfunction]
fn find_intersection(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    process_a: &ProcessSpec,
    process_b: &ProcessSpec,
    pump_nm: f64,
    t_min_c: f64,
    t_max_c: f64,
) -> PyResult<Option<(f64, TuningPoint, bool)>> {
    Ok(phasematch::find_intersection(
        &dispersion.inner,
        &grating.inner,
        &process_a.inner,
        &process_b.inner,
        pump_nm,
        (t_min_c, t_max_c),
    )
    .map_err(value_error)?
    .map(|hit| (hit.temperature_c, hit.point.into(), hit.identical_curves)))
}

#[pyclass(frozen)]
struct QpmSolution {
    #[pyo3(get)]
    order_type0: u32,
    #[pyo3(get)]
    order_type2: u32,
    #[pyo3(get)]
    k_wg: f64,
    #[pyo3(get)]
    residual_split: f64,
}

#[pyfunction]
#[pyo3(signature = (dispersion, grating, temperature_c, pump_nm, signal_nm, idler_nm, max_order = 9))]
fn infer_qpm(
    dispersion: &DispersionModel,
    grating: &GratingSpec,
    temperature_c: f64,
    pump_nm: f64,
    signal_nm: f64,
    idler_nm: f64,
    max_order: u32,
) -> PyResult<QpmSolution> {
    let observation =
        qpm::IntersectionObservation::new(temperature_c, pump_nm, signal_nm, idler_nm)
            .map_err(value_error)?;
    let constants = qpm::equation_constants(&dispersion.inner, &grating.inner, &observation)
        .map_err(value_error)?;
    let solution = qpm::infer_orders(&constants, max_order).map_err(value_error)?;
    Ok(QpmSolution {
        order_type0: solution.order_type0,
        order_type2: solution.order_type2,
        k_wg: solution.k_wg,
        residual_split: solution.residual_split,
    })
}

#[pyfunction]
fn relative_brightness(d_a_pm_per_v: f64, order_a: u32, d_b_pm_per_v: f64, order_b: u32) -> f64 {
    qpm::relative_brightness(d_a_pm_per_v, order_a, d_b_pm_per_v, order_b)
}

#[pyfunction]
fn true_coincidences(measured_hz: f64, accidentals_hz: f64) -> (f64, bool) {
    let result = pairstats::true_coincidences(measured_hz, accidentals_hz);
    (result.rate_hz, result.underflow)
}

#[pyfunction]
fn accidentals_estimate(singles_a_hz: f64, singles_b_hz: f64, window_s: f64) -> f64 {
    pairstats::accidentals_estimate(singles_a_hz, singles_b_hz, window_s)
}

#[pyfunction]
fn car(true_rate_hz: f64, accidentals_hz: f64) -> f64 {
    pairstats::car(true_rate_hz, accidentals_hz)
}

#[pyfunction]
fn fit_through_origin(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let fit = pairstats::fit_through_origin(&points).map_err(value_error)?;
    Ok((fit.slope, fit.slope_stderr, fit.r_squared))
}

#[pyfunction]
fn splitter_correction(coincidence_rate: f64) -> f64 {
    pairstats::splitter_correction(coincidence_rate)
}

#[pyfunction]
#[pyo3(signature = (effective_rate, pump_coupling = 0.35, fiber_coupling = 0.30,
                    detector_efficiency = 0.65, filter_transmission = 0.98, n_filters = 2))]
fn loss_corrected_rate(
    effective_rate: f64,
    pump_coupling: f64,
    fiber_coupling: f64,
    detector_efficiency: f64,
    filter_transmission: f64,
    n_filters: u32,
) -> PyResult<f64> {
    let budget = pairstats::LossBudget {
        pump_coupling,
        fiber_coupling,
        detector_efficiency,
        filter_transmission,
        n_filters,
    };
    pairstats::loss_corrected_rate(effective_rate, &budget).map_err(value_error)
}

#[pyfunction]
fn spectral_density(rate: f64, bandwidth_nm: f64, center_wavelength_nm: f64) -> (f64, f64, f64) {
    let sd = pairstats::spectral_density(rate, bandwidth_nm, center_wavelength_nm);
    (sd.per_nm, sd.bandwidth_thz, sd.per_thz)
}

#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (pair_rate_hz, duration_s, seed, efficiency_a = 1.0, efficiency_b = 1.0,
                    dark_rate_a_hz = 0.0, dark_rate_b_hz = 0.0, jitter_sigma_s = 0.0,
                    splitter = "fifty-fifty"))]
fn simulate(
    pair_rate_hz: f64,
    duration_s: f64,
    seed: u64,
    efficiency_a: f64,
    efficiency_b: f64,
    dark_rate_a_hz: f64,
    dark_rate_b_hz: f64,
    jitter_sigma_s: f64,
    splitter: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let splitter = match splitter {
        "fifty-fifty" => coincsim::SplitterModel::FiftyFifty,
        "deterministic" => coincsim::SplitterModel::Deterministic,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown splitter {other:?} (expected fifty-fifty or deterministic)"
            )))
        }
    };
    let streams = coincsim::simulate(&coincsim::SimConfig {
        pair_rate_hz,
        dark_rate_a_hz,
        dark_rate_b_hz,
        efficiency_a,
        efficiency_b,
        jitter_sigma_s,
        duration_s,
        seed,
        splitter,
    })
    .map_err(value_error)?;
    Ok((streams.arm_a, streams.arm_b))
}

#[pyfunction]
fn build_histogram(
    arm_a: Vec<f64>,
    arm_b: Vec<f64>,
    bin_width_s: f64,
    span_s: f64,
    duration_s: f64,
) -> PyResult<(f64, Vec<u64>, f64)> {
    let histogram = coincsim::build_histogram(&arm_a, &arm_b, bin_width_s, span_s, duration_s)
        .map_err(value_error)?;
    Ok((histogram.bin_width_s, histogram.bins, histogram.duration_s))
}

#[pyfunction]
fn analyze_histogram(
    bin_width_s: f64,
    bins: Vec<u64>,
    duration_s: f64,
    window_s: f64,
) -> PyResult<(f64, f64, f64, f64)> {
    let histogram = coincsim::CoincidenceHistogram {
        bin_width_s,
        bins,
        duration_s,
    };
    let analysis = coincsim::analyze_histogram(&histogram, window_s).map_err(value_error)?;
    Ok((
        analysis.measured_hz,
        analysis.accidentals_hz,
        analysis.true_hz,
        analysis.car,
    ))
}

#[pymodule]
fn spdc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DispersionModel>()?;
    m.add_class::<GratingSpec>()?;
    m.add_class::<ProcessSpec>()?;
    m.add_class::<TuningPoint>()?;
    m.add_class::<QpmSolution>()?;
    m.add_function(wrap_pyfunction!(idler_from_energy, m)?)?;
    m.add_function(wrap_pyfunction!(phase_mismatch, m)?)?;
    m.add_function(wrap_pyfunction!(solve_pair, m)?)?;
    m.add_function(wrap_pyfunction!(tuning_curve, m)?)?;
    m.add_function(wrap_pyfunction!(degeneracy_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(find_intersection, m)?)?;
    m.add_function(wrap_pyfunction!(infer_qpm, m)?)?;
    m.add_function(wrap_pyfunction!(relative_brightness, m)?)?;
    m.add_function(wrap_pyfunction!(true_coincidences, m)?)?;
    m.add_function(wrap_pyfunction!(accidentals_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(car, m)?)?;
    m.add_function(wrap_pyfunction!(fit_through_origin, m)?)?;
    m.add_function(wrap_pyfunction!(splitter_correction, m)?)?;
    m.add_function(wrap_pyfunction!(loss_corrected_rate, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_density, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(build_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_histogram, m)?)?;
    Ok(())
}
