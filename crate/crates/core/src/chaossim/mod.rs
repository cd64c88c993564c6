//! Driver/responder simulation and the numerical checks that make a
//! synchronized chaotic output usable as a shared noise source.

pub mod certificate;
pub mod integrate;
pub mod stationarity;
pub mod stats;
pub mod sync;
pub mod system;
pub mod trajfile;
pub mod zero_one;

pub use certificate::{convergence_certificate, sampled_convergence_certificate, ConvergenceCertificate, SampleBox};
pub use integrate::{integrate, Cascade, Stepper, Trajectory};
pub use stationarity::{sample_output, stationarity_check, IcBox, InitialCondition, StationarityOptions, StationarityReport};
pub use stats::{autocorrelation, estimate_density, ks_distance, select_delay, DelaySelection, EmpiricalDistribution};
pub use sync::{sync_report, SyncReport};
pub use system::{AffineResponder, ConstantDriver, Driver, HarmonicDriver, InputTerm, LorenzDriver, OscillatorSystem};
pub use zero_one::{zero_one_chaos_test, zero_one_chaos_test_with, ZeroOneOptions};
