//! Reference acceptance suite: every check pins a published value of the
//! modeled dual-type PPKTP waveguide source or a statistical property of
//! the simulator, at a fixed tolerance.
//!
//! Run with `cargo test -p spdc-core --test acceptance -- --nocapture` to
//! see one PASS/FAIL line per criterion.
//!
//! Two checks (criterion 7's type-0 inversion/intersection and criterion
//! 8's degeneracy temperature) are known to fail and are left failing on
//! purpose: with bulk KTP dispersion and a temperature-independent k_wg,
//! the type-0 mismatch is nearly flat in wavelength (≈2.5e-4 rad/µm per
//! nm), so inverting it amplifies the ~3e-3 rad/µm gap between the shared
//! fitted k_wg = −0.056 and the value the type-0 equation alone implies
//! (−0.050) into tens of nm and tens of °C. The forward checks (criteria
//! 1–4) and the type-II inversion pass; the inverse type-0 targets are not
//! reachable by this model class.

use spdc_core::coincsim::{analyze_histogram, build_histogram, simulate, SimConfig, SplitterModel};
use spdc_core::dispersion::DispersionModel;
use spdc_core::pairstats::{
    loss_corrected_rate, spectral_density, splitter_correction, LossBudget,
};
use spdc_core::phasematch::{
    degeneracy_temperature, default_signal_bracket, find_intersection, phase_mismatch, solve_pair,
    tuning_curve, GratingSpec, ProcessKind, ProcessSpec, RESIDUAL_TOL,
};
use spdc_core::qpm::{equation_constants, infer_orders, order_gap, IntersectionObservation};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ktp() -> DispersionModel {
    DispersionModel::ktp()
}

fn grating() -> GratingSpec {
    GratingSpec::ktp(9.96)
}

fn observation() -> IntersectionObservation {
    IntersectionObservation::new(66.0, 405.0, 762.71, 863.45).unwrap()
}

struct Criterion {
    label: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Criterion {
            label,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, value: f64, expected: f64, tolerance: f64) {
        let ok = (value - expected).abs() <= tolerance;
        if !ok {
            self.failures.push(format!(
                "{name} = {value:.6} not within {expected} ± {tolerance}"
            ));
        }
    }

    fn require(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failures.push(name.to_string());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("ACCEPTANCE {}: PASS", self.label);
        } else {
            println!("ACCEPTANCE {}: FAIL — {}", self.label, self.failures.join("; "));
        }
        assert!(
            self.failures.is_empty(),
            "{} failed: {}",
            self.label,
            self.failures.join("; ")
        );
    }
}

#[test]
fn criterion_1_type0_equation_constants() {
    let mut c = Criterion::new("1 (type-0 k budget at 66 C)");
    let constants = equation_constants(&ktp(), &grating(), &observation()).unwrap();
    c.check("pump k (z, 405 nm)", constants.pump_k_type0, 30.47, 0.02);
    c.check(
        "signal+idler k-sum (z)",
        constants.pair_k_sum_type0,
        28.64,
        0.03,
    );
    c.check("grating constant", constants.grating_k, 0.631, 0.003);
    c.finish();
}

#[test]
fn criterion_2_type2_equation_constants() {
    let mut c = Criterion::new("2 (type-II k budget at 66 C)");
    let constants = equation_constants(&ktp(), &grating(), &observation()).unwrap();
    c.check("pump k (y, 405 nm)", constants.pump_k_type2, 28.57, 0.02);
    c.check(
        "mixed signal+idler k-sum",
        constants.pair_k_sum_type2,
        28.00,
        0.03,
    );
    c.finish();
}

#[test]
fn criterion_3_qpm_order_inference() {
    let mut c = Criterion::new("3 (QPM order inference)");
    let constants = equation_constants(&ktp(), &grating(), &observation()).unwrap();
    let solution = infer_orders(&constants, 9).unwrap();
    c.require(
        "orders = (3, 1)",
        (solution.order_type0, solution.order_type2) == (3, 1),
    );
    c.check("k_wg", solution.k_wg, -0.056, 0.01);
    c.require(
        &format!("residual_split {} < 0.02", solution.residual_split),
        solution.residual_split < 0.02,
    );
    c.finish();
}

#[test]
fn criterion_4_order_gap() {
    let mut c = Criterion::new("4 (order gap)");
    let constants = equation_constants(&ktp(), &grating(), &observation()).unwrap();
    c.check("delta", order_gap(&constants).unwrap(), 2.01, 0.1);
    c.finish();
}

#[test]
fn criterion_5_rate_pipeline() {
    let mut c = Criterion::new("5 (rate pipeline)");
    let budget = LossBudget::reference_setup();
    let effective_type0 = splitter_correction(5.417);
    c.check("type-0 effective", effective_type0, 10.834, 1e-12);
    c.check(
        "type-0 intrinsic",
        loss_corrected_rate(effective_type0, &budget).unwrap(),
        254.3,
        1.3,
    );
    let effective_type2 = splitter_correction(1.195);
    c.check("type-II effective", effective_type2, 2.390, 1e-12);
    c.check(
        "type-II intrinsic",
        loss_corrected_rate(effective_type2, &budget).unwrap(),
        56.1,
        0.3,
    );
    c.finish();
}

#[test]
fn criterion_6_spectral_density() {
    let mut c = Criterion::new("6 (spectral density)");
    let sd = spectral_density(262.88, 20.0, 810.0);
    c.check("per-nm", sd.per_nm, 13.14, 0.01);
    c.check("bandwidth (THz)", sd.bandwidth_thz, 9.15, 0.02);
    c.check("per-THz", sd.per_thz, 28.7, 0.1);
    c.finish();
}

#[test]
fn criterion_7_phase_matching_self_consistency() {
    // Known red: see the module-level note. The type-II half passes; the
    // type-0 inversion and the intersection temperature do not.
    let mut c = Criterion::new("7 (self-consistency at k_wg = -0.056)");
    let (d, g) = (ktp(), grating());
    let type0 = ProcessSpec::type0(3, -0.056).unwrap();
    let type2 = ProcessSpec::type2(1, -0.056).unwrap();

    match solve_pair(&d, &g, &type0, 405.0, 66.0, (700.0, 805.0)).unwrap() {
        Some(point) => c.check("type-0 signal", point.signal_nm, 762.7, 1.0),
        None => c.require("type-0 solve_pair found a root", false),
    }
    match solve_pair(&d, &g, &type2, 405.0, 66.0, (700.0, 805.0)).unwrap() {
        Some(point) => c.check("type-II signal", point.signal_nm, 762.7, 1.0),
        None => c.require("type-II solve_pair found a root", false),
    }
    match find_intersection(&d, &g, &type0, &type2, 405.0, (54.0, 70.0)).unwrap() {
        Some(hit) => c.check("intersection temperature", hit.temperature_c, 66.0, 1.0),
        None => c.require("intersection exists in [54, 70] C", false),
    }
    c.finish();
}

#[test]
fn criterion_8_qualitative_tuning_behavior() {
    // Known red on the degeneracy-temperature half; the type-II bounds pass.
    let mut c = Criterion::new("8 (qualitative tuning behavior)");
    let (d, g) = (ktp(), grating());
    let type0 = ProcessSpec::type0(3, -0.056).unwrap();
    match degeneracy_temperature(&d, &g, &type0, 405.0, (20.0, 80.0)).unwrap() {
        Some(t_deg) => c.require(
            &format!("type-0 degeneracy temperature {t_deg:.2} C in [64, 72]"),
            (64.0..=72.0).contains(&t_deg),
        ),
        None => c.require("type-0 degeneracy temperature exists in [20, 80] C", false),
    }

    let type2 = ProcessSpec::type2(1, -0.056).unwrap();
    let curve = tuning_curve(&d, &g, &type2, 405.0, (20.0, 75.0), 1.0).unwrap();
    let solved: Vec<_> = curve.solved().collect();
    c.require("type-II curve has solutions", !solved.is_empty());
    c.require(
        "type-II curve non-degenerate: signal < 810 nm < idler throughout",
        solved
            .iter()
            .all(|p| p.signal_nm < 810.0 && 810.0 < p.idler_nm),
    );
    c.finish();
}

#[test]
fn criterion_9a_round_trip_order_inference() {
    let mut c = Criterion::new("9a (round-trip order inference, 200 cases)");
    let (d, g) = (ktp(), grating());
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a);
    let mut exact = 0usize;
    for _ in 0..200 {
        let temperature = 30.0 + 60.0 * rng.random::<f64>();
        let signal_nm = 730.0 + 70.0 * rng.random::<f64>();
        let idler_nm = 1.0 / (1.0 / 405.0 - 1.0 / signal_nm);
        let observation =
            IntersectionObservation::new(temperature, 405.0, signal_nm, idler_nm).unwrap();
        let base = equation_constants(&d, &g, &observation).unwrap();
        let order_type0 = 2 * rng.random_range(0..5u32) + 1;
        let order_type2 = 2 * rng.random_range(0..5u32) + 1;
        let k_wg = -0.5 + rng.random::<f64>();
        let constants = spdc_core::qpm::EquationConstants {
            pump_k_type0: base.pair_k_sum_type0 + f64::from(order_type0) * base.grating_k + k_wg,
            pump_k_type2: base.pair_k_sum_type2 + f64::from(order_type2) * base.grating_k + k_wg,
            ..base
        };
        let solution = infer_orders(&constants, 9).unwrap();
        if (solution.order_type0, solution.order_type2) == (order_type0, order_type2)
            && (solution.k_wg - k_wg).abs() < 1e-6
        {
            exact += 1;
        }
    }
    c.require(&format!("{exact}/200 exact recoveries"), exact == 200);
    c.finish();
}

#[test]
fn criterion_9b_solver_invariants_on_random_calls() {
    let mut c = Criterion::new("9b (energy/residual invariants, 1000 solves)");
    let (d, g) = (ktp(), grating());
    let bracket = default_signal_bracket(&d, 405.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x9b);
    let mut solved = 0usize;
    for _ in 0..1000 {
        let temperature = 10.0 + 80.0 * rng.random::<f64>();
        let k_wg = -0.3 + 0.6 * rng.random::<f64>();
        let order = 2 * rng.random_range(0..2u32) + 1;
        let process = if rng.random::<f64>() < 0.5 {
            ProcessSpec::new(ProcessKind::Type0, order, k_wg).unwrap()
        } else {
            ProcessSpec::new(ProcessKind::Type2, order, k_wg).unwrap()
        };
        if let Some(point) = solve_pair(&d, &g, &process, 405.0, temperature, bracket).unwrap() {
            solved += 1;
            let energy = (1.0 / 405.0 - 1.0 / point.signal_nm - 1.0 / point.idler_nm).abs();
            c.require(
                &format!("energy conservation {energy:e} < 1e-9 /nm"),
                energy < 1e-9,
            );
            // re-evaluate the mismatch at the returned signal, outside the solver
            let residual =
                phase_mismatch(&d, &g, &process, 405.0, point.signal_nm, temperature).unwrap();
            c.require(
                &format!("residual {residual:e} < {RESIDUAL_TOL:e}"),
                residual.abs() < RESIDUAL_TOL,
            );
            if !c.failures.is_empty() {
                break;
            }
        }
    }
    c.require(&format!("{solved} solvable samples >= 100"), solved >= 100);
    c.finish();
}

#[test]
fn criterion_9c_poisson_rate_recovery() {
    let mut c = Criterion::new("9c (pair-rate recovery within 3 sigma)");
    for pair_rate in [1e4, 1e5, 1e6] {
        let config = SimConfig {
            pair_rate_hz: pair_rate,
            dark_rate_a_hz: 100.0,
            dark_rate_b_hz: 100.0,
            efficiency_a: 0.65,
            efficiency_b: 0.65,
            jitter_sigma_s: 100e-12,
            duration_s: 1.0,
            seed: 0x9c,
            splitter: SplitterModel::FiftyFifty,
        };
        let streams = simulate(&config).unwrap();
        let histogram =
            build_histogram(&streams.arm_a, &streams.arm_b, 100e-12, 50e-9, 1.0).unwrap();
        let analysis = analyze_histogram(&histogram, 2e-9).unwrap();
        // recover the configured rate through splitter and efficiency corrections
        let recovered = splitter_correction(analysis.true_hz) / (0.65 * 0.65);
        let expected_counts = pair_rate * 0.65 * 0.65 / 2.0;
        let sigma_rate = expected_counts.sqrt() * 2.0 / (0.65 * 0.65);
        c.check(
            &format!("recovered rate at {pair_rate:.0e} Hz"),
            recovered,
            pair_rate,
            3.0 * sigma_rate,
        );
    }
    c.finish();
}

#[test]
fn criterion_9d_car_monotone_in_pump_power() {
    let mut c = Criterion::new("9d (CAR falls monotonically over a 5-point sweep)");
    let mut cars = Vec::new();
    for pair_rate in [5e4, 1e5, 2e5, 4e5, 8e5] {
        let config = SimConfig {
            pair_rate_hz: pair_rate,
            dark_rate_a_hz: 100.0,
            dark_rate_b_hz: 100.0,
            efficiency_a: 0.65,
            efficiency_b: 0.65,
            jitter_sigma_s: 100e-12,
            duration_s: 10.0,
            seed: 0x9d,
            splitter: SplitterModel::FiftyFifty,
        };
        let streams = simulate(&config).unwrap();
        let histogram =
            build_histogram(&streams.arm_a, &streams.arm_b, 100e-12, 50e-9, 10.0).unwrap();
        cars.push(analyze_histogram(&histogram, 2e-9).unwrap().car);
    }
    for (index, pair) in cars.windows(2).enumerate() {
        c.require(
            &format!("CAR[{}] = {:.1} > CAR[{}] = {:.1}", index, pair[0], index + 1, pair[1]),
            pair[0] > pair[1],
        );
    }
    c.finish();
}

#[test]
fn criterion_9e_deterministic_replay() {
    let mut c = Criterion::new("9e (deterministic replay from a fixed seed)");
    let config = SimConfig {
        pair_rate_hz: 2e5,
        dark_rate_a_hz: 500.0,
        dark_rate_b_hz: 500.0,
        efficiency_a: 0.65,
        efficiency_b: 0.6,
        jitter_sigma_s: 350e-12,
        duration_s: 1.0,
        seed: 42,
        splitter: SplitterModel::FiftyFifty,
    };
    let first = simulate(&config).unwrap();
    let second = simulate(&config).unwrap();
    c.require("identical tag streams", first == second);
    let histogram_first =
        build_histogram(&first.arm_a, &first.arm_b, 100e-12, 50e-9, 1.0).unwrap();
    let histogram_second =
        build_histogram(&second.arm_a, &second.arm_b, 100e-12, 50e-9, 1.0).unwrap();
    c.require("identical histograms", histogram_first == histogram_second);
    c.finish();
}
