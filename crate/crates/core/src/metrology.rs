//! Quantum Fisher information of acceleration and the SLD operator.
//!
//! For a qubit `rho = (I + omega . sigma)/2` the QFI of a parameter is a
//! function of the Bloch vector and its parameter derivative alone:
//!
//! ```text
//! F = |d omega|^2 + (omega . d omega)^2 / (1 - |omega|^2)    (|omega| < 1)
//! F = |d omega|^2                                            (|omega| = 1)
//! ```
//!
//! [`qfi`] composes this with the closed-form evolution through the
//! rotationally invariant path, so the result cannot depend on the azimuth or
//! on the level spacing even at the last bit. The symmetric logarithmic
//! derivative `L`, defined by `d rho = (rho L + L rho)/2`, is recovered by a
//! dense linear solve in the Pauli basis; its eigenbasis is the optimal
//! single-copy measurement and `Tr(rho L^2)` reproduces the QFI.
//!
//! In the long-time limit the state settles at `(0, 0, -tanh(pi/a))` and the
//! QFI approaches `(pi^2/a^4) sech^2(pi/a)` for both field models.

use crate::dynamics::{evolve, evolve_axial, BlochState, EvolutionParams, InitialState};
use crate::error::{Error, Result};
use crate::spectral::{Accel, FieldModel};
use crate::stable;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Squared-norm threshold above which a state counts as pure. Only the
/// `tau = 0` state is exactly pure, and there the derivative vanishes, so the
/// branch choice never matters physically; the cut just keeps the mixed
/// branch away from the 1/(1 - |omega|^2) singularity.
const PURE_NORM_SQ: f64 = 1.0 - 1e-12;

/// States with norm beyond this violate complete positivity.
const MAX_NORM: f64 = 1.0 + 1e-12;

/// SLD solves closer to a pure state than this are refused.
const SLD_NORM_LIMIT: f64 = 1.0 - 1e-10;

/// Which branch of the QFI formula was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Mixed,
    Pure,
}

/// QFI value with branch and norm diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QfiResult {
    /// QFI with respect to the dimensionless acceleration.
    pub value: f64,
    pub branch: Branch,
    /// |omega| at the evaluation point.
    pub bloch_norm: f64,
}

/// 2x2 complex matrix in the `{|+>, |->}` basis.
pub type Mat2 = [[Complex64; 2]; 2];

pub(crate) fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub(crate) fn mat_trace(x: &Mat2) -> Complex64 {
    x[0][0] + x[1][1]
}

/// rho = (I + omega . sigma)/2.
pub(crate) fn density_matrix(omega: &[f64; 3]) -> Mat2 {
    let half = 0.5;
    [
        [
            Complex64::new(half * (1.0 + omega[2]), 0.0),
            Complex64::new(half * omega[0], -half * omega[1]),
        ],
        [
            Complex64::new(half * omega[0], half * omega[1]),
            Complex64::new(half * (1.0 - omega[2]), 0.0),
        ],
    ]
}

fn qfi_from_parts(norm_sq: f64, deriv_sq: f64, dot: f64) -> (f64, Branch) {
    if norm_sq > PURE_NORM_SQ {
        (deriv_sq, Branch::Pure)
    } else {
        (deriv_sq + dot * dot / (1.0 - norm_sq), Branch::Mixed)
    }
}

/// QFI from a Bloch vector and its acceleration derivative.
pub fn qfi_from_bloch(state: &BlochState) -> Result<QfiResult> {
    let w = &state.omega;
    let v = &state.d_omega;
    let norm_sq = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let norm = norm_sq.sqrt();
    if !norm.is_finite() || norm > MAX_NORM {
        return Err(Error::InvalidState(format!(
            "Bloch norm {norm} exceeds 1 beyond tolerance"
        )));
    }
    let deriv_sq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let dot = w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
    let (value, branch) = qfi_from_parts(norm_sq, deriv_sq, dot);
    Ok(QfiResult {
        value,
        branch,
        bloch_norm: norm,
    })
}

/// QFI of acceleration at the given time and initial polar angle.
///
/// Evaluates the same composition as `qfi_from_bloch(evolve(..))` but through
/// the transverse magnitude instead of the rotating components, making the
/// result independent of the azimuth and of `omega_ratio` by construction.
pub fn qfi(a: Accel, tau: f64, theta: f64, field: FieldModel) -> Result<QfiResult> {
    let init = InitialState::new(theta, 0.0)?;
    let p = EvolutionParams::new(tau, a, field)?;
    let ax = evolve_axial(init.sin_theta(), init.cos_theta(), p.tau, a, field);
    let norm_sq = ax.r * ax.r + ax.w3 * ax.w3;
    let deriv_sq = ax.dr * ax.dr + ax.dw3 * ax.dw3;
    let dot = ax.r * ax.dr + ax.w3 * ax.dw3;
    let (value, branch) = qfi_from_parts(norm_sq, deriv_sq, dot);
    Ok(QfiResult {
        value,
        branch,
        bloch_norm: norm_sq.sqrt(),
    })
}

/// Long-time QFI `(pi^2/a^4) sech^2(pi/a)`, identical for both field models.
///
/// The field-model dependence drops out: the fixed point `-B/A` and its
/// derivative involve only the ratio, which is `tanh(pi/a)` in either bath.
pub fn asymptotic_qfi(a: f64, _field: FieldModel) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Domain(format!(
            "asymptotic QFI needs a > 0, got {a} (the a -> 0 limit is 0)"
        )));
    }
    Ok(PI * PI / (a * a * a * a) * stable::sech_sq(PI / a))
}

/// Symmetric logarithmic derivative, `d rho = (rho L + L rho)/2`.
///
/// Writing `L = l0 I + l . sigma` and matching the identity and Pauli
/// components of the defining relation gives the 4x4 real system
///
/// ```text
/// [ 1   w1  w2  w3 ] [l0]   [ 0 ]
/// [ w1  1   0   0  ] [l1] = [ v1]
/// [ w2  0   1   0  ] [l2]   [ v2]
/// [ w3  0   0   1  ] [l3]   [ v3]
/// ```
///
/// solved here by Gaussian elimination with partial pivoting. The system
/// degenerates as |omega| -> 1 (its determinant is 1 - |omega|^2), so
/// near-pure inputs are refused.
pub fn sld(state: &BlochState) -> Result<SldOperator> {
    let w = &state.omega;
    let v = &state.d_omega;
    let norm = state.norm();
    if !norm.is_finite() || norm >= SLD_NORM_LIMIT {
        return Err(Error::IllConditioned(format!(
            "SLD solve requires |omega| < 1 - 1e-10, got {norm}"
        )));
    }
    let m = [
        [1.0, w[0], w[1], w[2]],
        [w[0], 1.0, 0.0, 0.0],
        [w[1], 0.0, 1.0, 0.0],
        [w[2], 0.0, 0.0, 1.0],
    ];
    let x = solve4(m, [0.0, v[0], v[1], v[2]])?;
    Ok(SldOperator {
        coeff_identity: x[0],
        coeff_pauli: [x[1], x[2], x[3]],
    })
}

/// Hermitian SLD operator in Pauli form `l0 I + l . sigma`.
#[derive(Debug, Clone, Copy)]
pub struct SldOperator {
    coeff_identity: f64,
    coeff_pauli: [f64; 3],
}

impl SldOperator {
    pub fn pauli_components(&self) -> (f64, [f64; 3]) {
        (self.coeff_identity, self.coeff_pauli)
    }

    /// Matrix in the `{|+>, |->}` basis; Hermitian by construction.
    pub fn matrix(&self) -> Mat2 {
        let (l0, l) = (self.coeff_identity, self.coeff_pauli);
        [
            [
                Complex64::new(l0 + l[2], 0.0),
                Complex64::new(l[0], -l[1]),
            ],
            [Complex64::new(l[0], l[1]), Complex64::new(l0 - l[2], 0.0)],
        ]
    }

    /// Unit Bloch axis of the eigenbasis of `L`; the optimal measurement
    /// projects along it.
    pub fn measurement_axis(&self) -> Result<[f64; 3]> {
        let l = self.coeff_pauli;
        let n = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
        if n == 0.0 {
            return Err(Error::IllConditioned(
                "SLD has no Pauli component; eigenbasis is undefined".into(),
            ));
        }
        Ok([l[0] / n, l[1] / n, l[2] / n])
    }

    /// Tr(rho L) for the state the operator was derived from; vanishes
    /// because the trace of rho is parameter independent.
    pub fn expectation(&self, state: &BlochState) -> f64 {
        let rho = density_matrix(&state.omega);
        mat_trace(&mat_mul(&rho, &self.matrix())).re
    }

    /// Tr(rho L^2); equals the QFI.
    pub fn second_moment(&self, state: &BlochState) -> f64 {
        let rho = density_matrix(&state.omega);
        let l = self.matrix();
        mat_trace(&mat_mul(&rho, &mat_mul(&l, &l))).re
    }
}

fn solve4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Result<[f64; 4]> {
    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() < 1e-14 {
            return Err(Error::IllConditioned(
                "SLD linear system is numerically singular".into(),
            ));
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = rhs[row];
        for k in row + 1..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// QFI with the analytic derivative replaced by central finite differences of
/// the evolved Bloch vector; test-side check of the derivative chain.
pub fn qfi_fd_oracle(a: Accel, tau: f64, theta: f64, field: FieldModel, h: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::Domain(format!(
            "finite-difference step must lie in [1e-7, 1e-3], got {h}"
        )));
    }
    let init = InitialState::new(theta, 0.0)?;
    let center = evolve(&init, &EvolutionParams::new(tau, a, field)?);
    let plus = evolve(
        &init,
        &EvolutionParams::new(tau, Accel::new(a.value() + h)?, field)?,
    );
    let minus = evolve(
        &init,
        &EvolutionParams::new(tau, Accel::new(a.value() - h)?, field)?,
    );
    let mut fd = [0.0; 3];
    for i in 0..3 {
        fd[i] = (plus.omega[i] - minus.omega[i]) / (2.0 * h);
    }
    Ok(qfi_from_bloch(&BlochState {
        omega: center.omega,
        d_omega: fd,
    })?
    .value)
}
