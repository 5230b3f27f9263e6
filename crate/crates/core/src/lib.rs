//! Core pipeline for through-the-wall sensing built on burst channel
//! estimates.
//!
//! The crate simulates a narrowband cellular downlink observed through a
//! wall, estimates one channel impulse response per burst from the known
//! training sequence, collects the estimates into labeled frame sets, and
//! analyses them with PCA clustering and a linear soft-margin SVM, down to
//! confusion-matrix reporting.
//!
//! The crate is `no_std` (with `alloc`); file formats, configuration and
//! the command-line front end live in the companion `cirsense` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod channel;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod gsm;
pub mod linalg;
pub mod pca;
pub mod report;
pub mod rng;
pub mod svm;

pub use channel::{
    propagate, scenario, snr_realized, Event, MultipathChannel, Scenario, ScenarioSpec, Tap,
    TapVariation,
};
pub use error::{Error, Result};
pub use estimator::{
    cir_to_frame, estimate_cir, run_capture, CirEstimate, CirFrame, MidambleLs, MAX_CIR_TAPS,
};
pub use gsm::{
    build_normal_burst, demodulate, modulate, modulate_bits, training_sequence, NormalBurst,
    SymbolSequence, TrainingSequence,
};
pub use linalg::{svd, Mat, SvdResult};
