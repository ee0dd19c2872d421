//! Modeling toolkit for quasi-phase-matched spontaneous parametric
//! down-conversion (SPDC) in periodically poled KTP-family waveguides.
//!
//! The crate covers the full desk-scale analysis chain for a dual-process
//! (type-0 / type-II) pair source:
//!
//! * [`dispersion`] — Sellmeier and thermo-optic refractive indices for the
//!   crystal y and z axes, with a built-in KTP profile and JSON-loadable
//!   alternatives.
//! * [`phasematch`] — grating thermal expansion, phase-mismatch evaluation,
//!   and bracketed root-finding for signal/idler tuning curves, degeneracy
//!   temperatures, and dual-process spectral intersections.
//! * [`qpm`] — inference of the QPM grating orders and the scalar waveguide
//!   mismatch `k_wg` from a measured spectral intersection, plus QPM
//!   brightness scaling.
//! * [`pairstats`] — coincidence arithmetic: true rates, CAR,
//!   through-origin linear fits, splitter and loss-budget corrections, and
//!   spectral-density conversions.
//! * [`coincsim`] — a seeded Monte Carlo simulator of photon-pair detection
//!   (Poisson emission, splitter routing, detector imperfections, time-tag
//!   histogramming) used as the synthetic-data oracle for `pairstats`.
//!
//! Conventions: wavelengths are nanometres and temperatures °C at public
//! phase-matching interfaces, micrometres internally (the Sellmeier
//! coefficients presuppose µm); wave numbers are rad/µm throughout; count
//! rates are Hz and times seconds unless a name says otherwise.

pub mod coincsim;
pub mod dispersion;
mod error;
pub mod pairstats;
pub mod phasematch;
pub mod qpm;
mod solver;

pub use error::{Error, Result};

#[cfg(test)]
mod concurrency {
    // models and results are plain data: usable from any thread
    #[test]
    fn public_types_are_send_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<crate::dispersion::DispersionModel>();
        assert_send_sync::<crate::phasematch::GratingSpec>();
        assert_send_sync::<crate::phasematch::ProcessSpec>();
        assert_send_sync::<crate::phasematch::TuningCurve>();
        assert_send_sync::<crate::qpm::QpmSolution>();
        assert_send_sync::<crate::pairstats::LossBudget>();
        assert_send_sync::<crate::coincsim::SimConfig>();
        assert_send_sync::<crate::coincsim::CoincidenceHistogram>();
    }
}
