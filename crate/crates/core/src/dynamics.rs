//! Closed-form Bloch-vector evolution and an independent ODE oracle.
//!
//! The reduced qubit state is written as `rho = (I + omega . sigma)/2`. Under
//! the dissipative dynamics set by the bath coefficients `A`, `B` and the
//! renormalized level spacing `Omega`, the Bloch vector of an initial pure
//! state `cos(theta/2)|+> + e^{i phi} sin(theta/2)|->` evolves as
//!
//! ```text
//! omega_1 = sin(theta) cos(Omega tau + phi) e^{-2 A tau}
//! omega_2 = sin(theta) sin(Omega tau + phi) e^{-2 A tau}
//! omega_3 = cos(theta) e^{-4 A tau} - (B/A)(1 - e^{-4 A tau})
//! ```
//!
//! [`evolve`] returns this together with the analytic acceleration derivative,
//! taken at fixed `Omega` (the level shift is treated as a renormalized
//! constant with no acceleration dependence). [`bloch_ode_oracle`] integrates
//! the equivalent Bloch ODE with an adaptive Dormand-Prince 5(4) scheme and is
//! used to cross-check the closed form; it shares none of its algebra.

use crate::error::{Error, Result};
use crate::spectral::{coefficients, drift_ratio_deriv, Accel, FieldModel};

/// Default `Omega` in units of the spontaneous-emission rate. Only the
/// rotating phase of the transverse components ever sees this value.
pub const DEFAULT_OMEGA_RATIO: f64 = 100.0;

/// Trig values this close to an exact basis state are snapped to zero so that
/// `theta = 0, pi/2, pi` produce exact Bloch components.
const TRIG_SNAP: f64 = 1e-15;

/// Initial pure state of the atom, parameterized on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    theta: f64,
    phi: f64,
    sin_theta: f64,
    cos_theta: f64,
}

impl InitialState {
    /// Polar angle `theta` in `[0, pi]`, azimuth `phi` in `[0, 2 pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "theta must lie in [0, pi], got {theta}"
            )));
        }
        if !phi.is_finite() || !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::Domain(format!(
                "phi must lie in [0, 2 pi), got {phi}"
            )));
        }
        let snap = |v: f64| if v.abs() < TRIG_SNAP { 0.0 } else { v };
        Ok(InitialState {
            theta,
            phi,
            sin_theta: snap(theta.sin()),
            cos_theta: snap(theta.cos()),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub(crate) fn sin_theta(&self) -> f64 {
        self.sin_theta
    }

    pub(crate) fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    /// Bloch vector at `tau = 0`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        [
            self.sin_theta * self.phi.cos(),
            self.sin_theta * self.phi.sin(),
            self.cos_theta,
        ]
    }
}

/// Evolution inputs: proper time, acceleration, bath model and `Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    pub tau: f64,
    pub a: Accel,
    pub field: FieldModel,
    pub omega_ratio: f64,
}

impl EvolutionParams {
    /// Proper time `tau >= 0` in units of the inverse spontaneous-emission
    /// rate, with the default `Omega`.
    pub fn new(tau: f64, a: Accel, field: FieldModel) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::Domain(format!(
                "tau must be finite and >= 0, got {tau}"
            )));
        }
        Ok(EvolutionParams {
            tau,
            a,
            field,
            omega_ratio: DEFAULT_OMEGA_RATIO,
        })
    }

    pub fn with_omega_ratio(mut self, omega_ratio: f64) -> Result<Self> {
        if !omega_ratio.is_finite() || omega_ratio <= 0.0 {
            return Err(Error::Domain(format!(
                "omega_ratio must be finite and > 0, got {omega_ratio}"
            )));
        }
        self.omega_ratio = omega_ratio;
        Ok(self)
    }
}

/// Bloch vector and its acceleration derivative at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub omega: [f64; 3],
    pub d_omega: [f64; 3],
}

impl BlochState {
    pub fn norm(&self) -> f64 {
        self.omega.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Rotationally invariant part of the evolution: transverse magnitude `r`,
/// longitudinal component `w3`, and their acceleration derivatives. The QFI
/// depends only on these, so computing them without ever touching the
/// rotating phase makes it independent of `phi` and `Omega` by construction.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxialState {
    pub r: f64,
    pub w3: f64,
    pub dr: f64,
    pub dw3: f64,
    /// -2 tau dA/da, the logarithmic a-derivative of the transverse part.
    pub d_log_r: f64,
}

pub(crate) fn evolve_axial(
    sin_theta: f64,
    cos_theta: f64,
    tau: f64,
    a: Accel,
    field: FieldModel,
) -> AxialState {
    let cf = coefficients(a, field);
    let ratio = cf.ratio();
    let d_ratio = drift_ratio_deriv(a.value());
    let e2 = (-2.0 * cf.a * tau).exp();
    let e4 = e2 * e2;
    let r = sin_theta * e2;
    let w3 = cos_theta * e4 - ratio * (1.0 - e4);
    let d_log_r = -2.0 * tau * cf.da;
    let dw3 = -4.0 * tau * cf.da * e4 * (cos_theta + ratio) - d_ratio * (1.0 - e4);
    AxialState {
        r,
        w3,
        dr: d_log_r * r,
        dw3,
        d_log_r,
    }
}

/// Closed-form Bloch vector and its analytic acceleration derivative.
///
/// The derivative is taken with `Omega` held fixed, so the transverse phase
/// contributes nothing and `d omega_{1,2} = -2 tau (dA/da) omega_{1,2}`.
/// At `tau = 0` the state is the initial Bloch vector exactly and the
/// derivative vanishes identically.
pub fn evolve(init: &InitialState, p: &EvolutionParams) -> BlochState {
    let ax = evolve_axial(init.sin_theta, init.cos_theta, p.tau, p.a, p.field);
    let phase = p.omega_ratio * p.tau + init.phi;
    let (sin_ph, cos_ph) = phase.sin_cos();
    let (w1, w2) = (ax.r * cos_ph, ax.r * sin_ph);
    BlochState {
        omega: [w1, w2, ax.w3],
        d_omega: [ax.d_log_r * w1, ax.d_log_r * w2, ax.dw3],
    }
}

// ── adaptive Dormand-Prince 5(4) oracle ─────────────────────────────

/// Integrates the Bloch ODE
///
/// ```text
/// d omega_1 / d tau = -2 A omega_1 - Omega omega_2
/// d omega_2 / d tau = -2 A omega_2 + Omega omega_1
/// d omega_3 / d tau = -4 A omega_3 - 4 B
/// ```
///
/// from `tau = 0` with an adaptive embedded Runge-Kutta 5(4) pair. The
/// rotation sign convention is the one solved by the closed form. Returns the
/// Bloch vector only; `d_omega` is zero.
pub fn bloch_ode_oracle(init: &InitialState, p: &EvolutionParams, rtol: f64) -> Result<BlochState> {
    if !(1e-12..=1e-6).contains(&rtol) {
        return Err(Error::Domain(format!(
            "rtol must lie in [1e-12, 1e-6], got {rtol}"
        )));
    }
    let cf = coefficients(p.a, p.field);
    let om = p.omega_ratio;
    let rhs = |w: &[f64; 3]| -> [f64; 3] {
        [
            -2.0 * cf.a * w[0] - om * w[1],
            -2.0 * cf.a * w[1] + om * w[0],
            -4.0 * cf.a * w[2] - 4.0 * cf.b,
        ]
    };
    let w = integrate_dp54(rhs, init.bloch_vector(), p.tau, rtol)?;
    Ok(BlochState {
        omega: w,
        d_omega: [0.0; 3],
    })
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// e = b(5th) - b(4th), applied to k1..k7 for the embedded error estimate
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn integrate_dp54<F>(rhs: F, y0: [f64; 3], t_end: f64, rtol: f64) -> Result<[f64; 3]>
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    if t_end == 0.0 {
        return Ok(y0);
    }
    let atol = rtol * 1e-3;
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = rhs(&y);
    let mut h = 1e-6_f64.min(t_end);
    let h_min = 1e-14 * t_end.max(1.0);

    let comb = |y: &[f64; 3], ks: &[(&[f64; 3], f64)], h: f64| -> [f64; 3] {
        let mut out = *y;
        for i in 0..3 {
            let mut acc = 0.0;
            for (k, c) in ks {
                acc += c * k[i];
            }
            out[i] += h * acc;
        }
        out
    };

    loop {
        if t + h > t_end {
            h = t_end - t;
        }
        let k2 = rhs(&comb(&y, &[(&k1, A21)], h));
        let k3 = rhs(&comb(&y, &[(&k1, A31), (&k2, A32)], h));
        let k4 = rhs(&comb(&y, &[(&k1, A41), (&k2, A42), (&k3, A43)], h));
        let k5 = rhs(&comb(&y, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)], h));
        let k6 = rhs(&comb(
            &y,
            &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)],
            h,
        ));
        let y_new = comb(
            &y,
            &[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)],
            h,
        );
        let k7 = rhs(&y_new);

        let mut err_sq = 0.0;
        for i in 0..3 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / 3.0).sqrt();

        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            if t >= t_end {
                return Ok(y);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min {
            return Err(Error::Integration(format!(
                "step size underflow at tau = {t} (h = {h:.3e})"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const EM: FieldModel = FieldModel::Electromagnetic;

    fn state(theta: f64, phi: f64) -> InitialState {
        InitialState::new(theta, phi).unwrap()
    }

    fn params(tau: f64, a: f64, field: FieldModel) -> EvolutionParams {
        EvolutionParams::new(tau, Accel::new(a).unwrap(), field).unwrap()
    }

    #[test]
    fn input_validation() {
        assert!(InitialState::new(-0.1, 0.0).is_err());
        assert!(InitialState::new(PI + 0.1, 0.0).is_err());
        assert!(InitialState::new(1.0, -1.0).is_err());
        assert!(InitialState::new(1.0, std::f64::consts::TAU).is_err());
        assert!(EvolutionParams::new(-1.0, Accel::new(1.0).unwrap(), EM).is_err());
        assert!(params(1.0, 1.0, EM).with_omega_ratio(0.0).is_err());
    }

    #[test]
    fn initial_condition_is_exact() {
        let st = evolve(&state(PI / 2.0, 0.0), &params(0.0, 1.3, EM));
        assert_eq!(st.omega, [1.0, 0.0, 0.0]);
        assert_eq!(st.d_omega, [0.0, 0.0, 0.0]);

        let st = evolve(&state(0.7, 1.1), &params(0.0, 0.4, EM));
        assert_eq!(st.omega, state(0.7, 1.1).bloch_vector());
        assert_eq!(st.d_omega, [0.0, 0.0, 0.0]);
        assert!((st.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ground_state_has_no_transverse_part() {
        let st = evolve(&state(PI, 0.0), &params(3.7, 1.0, EM));
        assert_eq!(st.omega[0], 0.0);
        assert_eq!(st.omega[1], 0.0);
        let e4 = (-4.0 * coefficients(Accel::new(1.0).unwrap(), EM).a * 3.7).exp();
        let tanh_pi = 0.996_272_076_220_749_94;
        let expect = -e4 - tanh_pi * (1.0 - e4);
        assert!((st.omega[2] - expect).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_reached_for_any_theta() {
        // omega -> (0, 0, -tanh(pi/a)); tanh(pi) = 0.99627207622074994
        for theta in [0.0, 0.3, PI / 2.0, 2.9, PI] {
            let st = evolve(&state(theta, 0.0), &params(50.0, 1.0, EM));
            assert!(st.omega[0].abs() < 1e-10);
            assert!(st.omega[1].abs() < 1e-10);
            assert!((st.omega[2] + 0.996_272_076_220_749_94).abs() < 1e-8);
        }
        for &a in &[0.3, 0.7, 2.5] {
            let st = evolve(&state(1.0, 0.0), &params(50.0, a, EM));
            let target = -(PI / a).tanh();
            assert!((st.omega[2] - target).abs() < 1e-8, "a={a}");
        }
    }

    #[test]
    fn norm_stays_inside_bloch_ball() {
        for &tau in &[0.0, 0.1, 0.5, 2.0, 10.0] {
            for &a in &[0.0, 0.5, 1.0, 3.0] {
                let st = evolve(&state(1.2, 0.4), &params(tau, a, EM));
                assert!(st.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn transverse_norm_contracts() {
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let tau = 0.1 * i as f64 + 0.05;
            let st = evolve(&state(PI / 2.0, 0.0), &params(tau, 1.0, EM));
            let trans = st.omega[0] * st.omega[0] + st.omega[1] * st.omega[1];
            assert!(trans < prev);
            prev = trans;
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        for field in [EM, FieldModel::Scalar] {
            for &a in &[0.1f64, 0.5, 1.0, 2.5, 5.0] {
                for &tau in &[0.5, 1.0, 4.0, 9.0, 15.0] {
                    for &theta in &[0.0, PI / 2.0, PI] {
                        let h = 1e-5 * a.max(1.0);
                        let st = evolve(&state(theta, 0.0), &params(tau, a, field));
                        let sp = evolve(&state(theta, 0.0), &params(tau, a + h, field));
                        let sm = evolve(&state(theta, 0.0), &params(tau, a - h, field));
                        for i in 0..3 {
                            let fd = (sp.omega[i] - sm.omega[i]) / (2.0 * h);
                            if fd.abs() < 1e-12 && st.d_omega[i].abs() < 1e-12 {
                                continue;
                            }
                            assert!(
                                (st.d_omega[i] - fd).abs() <= 1e-5 * fd.abs().max(1e-12),
                                "component {i} at a={a} tau={tau} theta={theta} {field:?}: {} vs {fd}",
                                st.d_omega[i]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn phi_leaves_norm_and_longitudinal_component_unchanged() {
        for &phi in &[0.0, 1.0, 2.0, 5.5] {
            let st = evolve(&state(1.1, phi), &params(2.3, 0.8, EM));
            let st0 = evolve(&state(1.1, 0.0), &params(2.3, 0.8, EM));
            assert!((st.omega[2] - st0.omega[2]).abs() < 1e-14);
            assert!((st.norm() - st0.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_identity_at_tau_zero() {
        let init = state(0.9, 0.3);
        let st = bloch_ode_oracle(&init, &params(0.0, 1.0, EM), 1e-10).unwrap();
        assert_eq!(st.omega, init.bloch_vector());
    }

    #[test]
    fn oracle_rest_hand_value() {
        // a = 0, theta = 0, tau = 2: omega_3 = 2 e^{-2} - 1 = -0.72932943352677462
        let st = bloch_ode_oracle(&state(0.0, 0.0), &params(2.0, 0.0, EM), 1e-11).unwrap();
        assert!((st.omega[2] + 0.729_329_433_526_774_62).abs() < 1e-9);
        assert!(st.omega[0].abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form_spot_check() {
        let init = state(PI / 2.0, 0.0);
        let p = params(3.0, 1.0, EM);
        let ode = bloch_ode_oracle(&init, &p, 1e-10).unwrap();
        let cf = evolve(&init, &p);
        for i in 0..3 {
            assert!(
                (ode.omega[i] - cf.omega[i]).abs() < 1e-8,
                "component {i}: {} vs {}",
                ode.omega[i],
                cf.omega[i]
            );
        }
    }

    #[test]
    fn oracle_matches_closed_form_on_grid() {
        for &tau in &[0.5, 1.0, 4.0, 9.0] {
            for &a in &[0.5, 1.0, 2.5] {
                for &theta in &[0.0, PI / 2.0, PI] {
                    let init = state(theta, 0.0);
                    let p = params(tau, a, EM);
                    let ode = bloch_ode_oracle(&init, &p, 1e-10).unwrap();
                    let cf = evolve(&init, &p);
                    let dev = (0..3)
                        .map(|i| (ode.omega[i] - cf.omega[i]).abs())
                        .fold(0.0, f64::max);
                    assert!(dev < 1e-8, "tau={tau} a={a} theta={theta}: dev={dev:.2e}");
                }
            }
        }
    }

    #[test]
    fn oracle_rejects_bad_rtol() {
        assert!(bloch_ode_oracle(&state(0.0, 0.0), &params(1.0, 1.0, EM), 1e-5).is_err());
        assert!(bloch_ode_oracle(&state(0.0, 0.0), &params(1.0, 1.0, EM), 1e-13).is_err());
    }
}
