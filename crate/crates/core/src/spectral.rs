//! Bath spectral function and Kossakowski coefficients.
//!
//! A uniformly accelerated two-level atom sees the Minkowski vacuum as an
//! effective thermal bath. The dissipative part of its reduced dynamics is
//! fixed by two rates, here called `A` and `B`, obtained from the Fourier
//! transform of the field correlation function along the accelerated world
//! line, evaluated at the transition frequency.
//!
//! Everything is dimensionless: rates are in units of the inertial
//! spontaneous-emission rate, frequencies in units of the level spacing, and
//! acceleration in units of `c * omega0`. In these units the electromagnetic
//! bath gives
//!
//! ```text
//! A = (1/4) (1 + a^2) coth(pi/a),    B = (1/4) (1 + a^2),
//! ```
//!
//! while the massless scalar bath is the same with the `(1 + a^2)` factor
//! absent. Both satisfy `B/A = tanh(pi/a)`, the asymptotic polarization
//! magnitude. At `a = 0` the thermal factor disappears and `A = B = 1/4`.

use crate::error::{Error, Result};
use crate::stable;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which vacuum bath supplies the spectral function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldModel {
    /// Fluctuating vacuum electromagnetic fields.
    #[serde(rename = "em")]
    Electromagnetic,
    /// Massless scalar field, used as a comparison bath.
    #[serde(rename = "scalar")]
    Scalar,
}

/// Proper acceleration in units of `c * omega0`, validated non-negative and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accel(f64);

impl Accel {
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::Domain(format!(
                "acceleration must be finite and >= 0, got {a}"
            )));
        }
        Ok(Accel(a))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Kossakowski coefficients and their acceleration derivatives, in units of
/// the inertial spontaneous-emission rate.
///
/// `2A` is the transverse decay rate, `4A` the longitudinal one, and `B`
/// drives the longitudinal drift; `A >= B > 0` always, with equality at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    /// Decay coefficient A.
    pub a: f64,
    /// Drift coefficient B.
    pub b: f64,
    /// dA/da.
    pub da: f64,
    /// dB/da.
    pub db: f64,
}

impl Coefficients {
    /// B/A, the magnitude of the asymptotic polarization. Equals tanh(pi/a)
    /// for both field models.
    pub fn ratio(&self) -> f64 {
        self.b / self.a
    }
}

/// Kossakowski coefficients A, B and their analytic a-derivatives.
///
/// The `a = 0` limit is returned exactly (A = B = 1/4, zero derivatives)
/// rather than evaluated through `coth` of an infinite argument.
pub fn coefficients(accel: Accel, field: FieldModel) -> Coefficients {
    let a = accel.value();
    if a == 0.0 {
        return Coefficients {
            a: 0.25,
            b: 0.25,
            da: 0.0,
            db: 0.0,
        };
    }
    let x = PI / a;
    let coth = stable::coth(x);
    let csch_sq = stable::csch_sq(x);
    match field {
        FieldModel::Electromagnetic => {
            let common = 0.25 * (1.0 + a * a);
            Coefficients {
                a: common * coth,
                b: common,
                da: 0.5 * a * coth + common * (PI / (a * a)) * csch_sq,
                db: 0.5 * a,
            }
        }
        FieldModel::Scalar => Coefficients {
            a: 0.25 * coth,
            b: 0.25,
            da: 0.25 * (PI / (a * a)) * csch_sq,
            db: 0.0,
        },
    }
}

/// d/da of B/A = tanh(pi/a), written directly as -(pi/a^2) sech^2(pi/a).
///
/// The quotient rule (dB*A - B*dA)/A^2 is algebraically identical but loses
/// the result to cancellation at small `a`, where the surviving term is
/// exponentially smaller than the ones that cancel.
pub(crate) fn drift_ratio_deriv(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    -(PI / (a * a)) * stable::sech_sq(PI / a)
}

/// Bath spectral function G(lambda) in units of the spontaneous-emission
/// rate, for frequency `lambda` in units of the level spacing.
///
/// Electromagnetic: `G = (1/2) lambda (lambda^2 + a^2) (1 + coth(pi lambda / a))`;
/// scalar: `G = (1/2) lambda (1 + coth(pi lambda / a))`. Detailed balance
/// `G(-lambda) = e^{-2 pi lambda / a} G(lambda)` holds by construction, and
/// `A = [G(1) + G(-1)]/4`, `B = [G(1) - G(-1)]/4`.
///
/// `lambda = 0` with `a > 0` sits on the pole of `coth` and is rejected.
pub fn spectral_function(lambda: f64, accel: Accel, field: FieldModel) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("frequency must be finite, got {lambda}")));
    }
    let a = accel.value();
    if lambda == 0.0 {
        if a > 0.0 {
            return Err(Error::Domain(
                "spectral function has a pole at lambda = 0 for a > 0".into(),
            ));
        }
        return Ok(0.0);
    }
    if a == 0.0 {
        // Zero temperature: only spontaneous emission survives.
        if lambda < 0.0 {
            return Ok(0.0);
        }
        return Ok(match field {
            FieldModel::Electromagnetic => lambda * lambda * lambda,
            FieldModel::Scalar => lambda,
        });
    }
    let thermal = stable::one_plus_coth(PI * lambda / a);
    Ok(match field {
        FieldModel::Electromagnetic => 0.5 * lambda * (lambda * lambda + a * a) * thermal,
        FieldModel::Scalar => 0.5 * lambda * thermal,
    })
}
