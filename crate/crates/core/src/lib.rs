//! Quantum Fisher information of acceleration for a uniformly accelerated
//! two-level atom coupled to fluctuating vacuum fields.
//!
//! The atom's reduced dynamics is a dissipative Bloch-vector flow whose rates
//! come from the field correlation spectrum along the accelerated world line;
//! the Unruh thermal factor makes those rates depend on the acceleration, and
//! the QFI quantifies how well that acceleration can be read off the state.
//! The crate provides, layer by layer:
//!
//! - [`spectral`]: bath spectral function and the Kossakowski rates `A`, `B`
//!   with analytic acceleration derivatives, for the electromagnetic and
//!   massless-scalar baths.
//! - [`dynamics`]: closed-form Bloch evolution plus an adaptive Runge-Kutta
//!   oracle for the underlying Bloch ODE.
//! - [`metrology`]: the qubit QFI formula, its long-time closed form, the
//!   symmetric logarithmic derivative, and a finite-difference QFI oracle.
//! - [`estimation`]: Monte Carlo verification of the Cramér-Rao bound with an
//!   SLD-eigenbasis measurement and a maximum-likelihood estimator.
//! - [`analysis`]: parameter scans, peak detection and the `F_max(tau)`
//!   envelope.
//! - [`cli`]: batch command-line front end emitting CSV/JSON datasets.
//!
//! All quantities are dimensionless: time in units of the inverse inertial
//! spontaneous-emission rate, acceleration in units of `c * omega0`, rates in
//! units of the emission rate itself.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod metrology;
pub mod spectral;

mod optimize;
mod stable;

pub use dynamics::{bloch_ode_oracle, evolve, BlochState, EvolutionParams, InitialState};
pub use error::{Error, Result};
pub use estimation::{simulate_estimation, EstimationReport, MeasurementPlan};
pub use metrology::{asymptotic_qfi, qfi, qfi_from_bloch, sld, Branch, QfiResult, SldOperator};
pub use spectral::{coefficients, spectral_function, Accel, Coefficients, FieldModel};
