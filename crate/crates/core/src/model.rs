//! FitzHugh–Nagumo kinetics, parameters and right-hand sides.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::operators::{AssembledOperator, MovingOps};
use crate::sparse;

/// Physical parameters of the cable/FHN model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub eps: f64,
    pub gamma: f64,
    pub cm: f64,
    pub r_int: f64,
    pub radius: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, eps: f64, gamma: f64, cm: f64, r_int: f64, radius: f64) -> Result<Self> {
        let p = ModelParams {
            alpha,
            eps,
            gamma,
            cm,
            r_int,
            radius,
        };
        p.validate()?;
        Ok(p)
    }

    /// The constant-cylinder parameter set of the reference experiment.
    pub fn fig1() -> Self {
        ModelParams {
            alpha: 0.01,
            eps: 1e-4,
            gamma: 7.0,
            cm: 1.0,
            r_int: 0.1,
            radius: 0.8,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        self.radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 0.5), got {}", self.alpha)));
        }
        for (name, v) in [
            ("eps", self.eps),
            ("gamma", self.gamma),
            ("cm", self.cm),
            ("r_int", self.r_int),
            ("radius", self.radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Axial conductance `G = pi R^2 / r_int`.
    pub fn conductance(&self) -> f64 {
        PI * self.radius * self.radius / self.r_int
    }

    pub fn diffusivity(&self) -> f64 {
        effective_diffusivity(self)
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants::new(self, None)
    }

    /// Short hash of the parameter values.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for v in [self.alpha, self.eps, self.gamma, self.cm, self.r_int, self.radius] {
            h.update(v.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub diffusivity: f64,
    pub eta: f64,
    /// `min(eta, beta)` once a spectral gap has been measured.
    pub eta_prime: Option<f64>,
}

impl DerivedConstants {
    pub fn new(p: &ModelParams, beta: Option<f64>) -> Self {
        let eta = decay_rate_eta(p);
        DerivedConstants {
            diffusivity: effective_diffusivity(p),
            eta,
            eta_prime: beta.filter(|b| *b > 0.0).map(|b| eta.min(b)),
        }
    }

    pub fn with_gap(self, beta: f64) -> Self {
        DerivedConstants {
            eta_prime: (beta > 0.0).then(|| self.eta.min(beta)),
            ..self
        }
    }
}

#[inline]
pub fn kinetics_f(u: f64, alpha: f64) -> f64 {
    -u * (u - alpha) * (u - 1.0)
}

#[inline]
pub fn kinetics_fprime(u: f64, alpha: f64) -> f64 {
    -3.0 * u * u + 2.0 * (1.0 + alpha) * u - alpha
}

#[inline]
pub fn kinetics_fpp(u: f64, alpha: f64) -> f64 {
    -6.0 * u + 2.0 * (1.0 + alpha)
}

pub fn effective_diffusivity(p: &ModelParams) -> f64 {
    PI * p.radius * p.radius / (p.cm * p.r_int)
}

/// `min(|f'(0)|/Cm, |f'(1)|/Cm, eps gamma)`.
pub fn decay_rate_eta(p: &ModelParams) -> f64 {
    let a = kinetics_fprime(0.0, p.alpha).abs() / p.cm;
    let b = kinetics_fprime(1.0, p.alpha).abs() / p.cm;
    a.min(b).min(p.eps * p.gamma)
}

/// Spatially uniform rest states: roots of `f(u) = u / gamma`, ascending.
pub fn rest_states(p: &ModelParams) -> Vec<(f64, f64)> {
    // -u (u^2 - (1+a) u + a) - u/g = 0  =>  u = 0 or u^2 - (1+a) u + a + 1/g = 0
    let b = 1.0 + p.alpha;
    let c = p.alpha + 1.0 / p.gamma;
    let mut out = vec![(0.0, 0.0)];
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        for u in [(b - s) / 2.0, (b + s) / 2.0] {
            out.push((u, u / p.gamma));
        }
    }
    out
}

/// The excited rest state (largest root), if one exists.
pub fn upper_rest_state(p: &ModelParams) -> Option<(f64, f64)> {
    let states = rest_states(p);
    (states.len() == 3).then(|| states[2])
}

/// Static-frame right-hand side `(Cm^-1 (lap u1 + f(u1) - u2), eps (u1 - gamma u2))`.
pub fn rhs_static(state: &Field, lap: &AssembledOperator, p: &ModelParams) -> Result<Field> {
    if lap.n() != state.n() || lap.m() != state.m() {
        return Err(Error::shape(
            format!("{} x {}", lap.n(), lap.m()),
            format!("{} x {}", state.n(), state.m()),
        ));
    }
    let mut du1 = lap.apply(&state.u1);
    let inv_cm = 1.0 / p.cm;
    for ((d, &u1), &u2) in du1.iter_mut().zip(&state.u1).zip(&state.u2) {
        *d = inv_cm * (*d + kinetics_f(u1, p.alpha) - u2);
    }
    let du2 = linear_recovery(&state.u1, &state.u2, p);
    Field::from_parts(state.n(), state.m(), du1, du2)
}

/// Co-moving right-hand side for the zero angular mode.
pub fn rhs_moving(state: &Field, c: f64, ops: &MovingOps, p: &ModelParams) -> Result<Field> {
    if state.m() != 1 || state.n() != ops.len() {
        return Err(Error::shape(format!("{} x 1", ops.len()), format!("{} x {}", state.n(), state.m())));
    }
    let n = state.n();
    let inv_cm = 1.0 / p.cm;
    let d2 = sparse::mul(ops.diffusion(), &state.u1);
    let dz1 = sparse::mul(ops.dz(), &state.u1);
    let dz2 = sparse::mul(ops.dz_inflow(), &state.u2);
    let mut du1 = vec![0.0; n];
    let mut du2 = linear_recovery(&state.u1, &state.u2, p);
    for i in 0..n {
        let (u1, u2) = (state.u1[i], state.u2[i]);
        du1[i] = d2[i] + c * dz1[i] + inv_cm * (kinetics_f(u1, p.alpha) - u2);
        du2[i] += c * dz2[i];
    }
    Field::from_parts(n, 1, du1, du2)
}

fn linear_recovery(u1: &[f64], u2: &[f64], p: &ModelParams) -> Vec<f64> {
    u1.iter()
        .zip(u2)
        .map(|(&a, &b)| p.eps * (a - p.gamma * b))
        .collect()
}

/// Quadratic-and-cubic remainder of the kinetics about `phi1`.
pub fn nonlinear_remainder(v: &Field, phi1: &[f64], p: &ModelParams) -> Result<Field> {
    if phi1.len() != v.len() {
        return Err(Error::shape(v.len(), phi1.len()));
    }
    let n1 = v
        .u1
        .iter()
        .zip(phi1)
        .map(|(&w, &f)| w * w * (-w - 3.0 * f + p.alpha + 1.0) / p.cm)
        .collect();
    Field::from_parts(v.n(), v.m(), n1, vec![0.0; v.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kinetics_values() {
        let a = 0.01;
        for r in [0.0, a, 1.0] {
            assert_eq!(kinetics_f(r, a), 0.0);
        }
        assert_relative_eq!(kinetics_f(0.5, a), 0.1225, epsilon = 1e-15);
        assert_relative_eq!(kinetics_f(-0.1, a), 0.0121, epsilon = 1e-15);
        assert_relative_eq!(kinetics_fprime(0.0, a), -0.01);
        assert_relative_eq!(kinetics_fprime(1.0, a), -0.99, epsilon = 1e-15);
    }

    #[test]
    fn diffusivity_and_eta() {
        assert_relative_eq!(effective_diffusivity(&ModelParams::fig1()), 20.106192982974676, epsilon = 1e-12);
        let p = ModelParams::new(0.01, 1e-4, 7.0, PI, 1.0, 1.0).unwrap();
        assert_relative_eq!(effective_diffusivity(&p), 1.0, epsilon = 1e-15);
        let p = ModelParams::fig1().with_radius(0.4).unwrap();
        assert_relative_eq!(effective_diffusivity(&p), 1.6 * PI, epsilon = 1e-12);

        assert_relative_eq!(decay_rate_eta(&ModelParams::fig1()), 7e-4, epsilon = 1e-15);
        let p = ModelParams::new(0.25, 1.0, 1.0, 1.0, 0.1, 0.8).unwrap();
        assert_relative_eq!(decay_rate_eta(&p), 0.25);
        let p = ModelParams::new(0.25, 1.0, 1.0, 2.0, 0.1, 0.8).unwrap();
        assert_relative_eq!(decay_rate_eta(&p), 0.125);
    }

    #[test]
    fn eta_prime_takes_the_gap() {
        let d = ModelParams::fig1().derived();
        assert!(d.eta_prime.is_none());
        let d = d.with_gap(3e-4);
        assert_eq!(d.eta_prime, Some(3e-4));
        assert!(d.eta_prime.unwrap() <= d.eta);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::new(0.5, 1e-4, 7.0, 1.0, 0.1, 0.8).is_err());
        assert!(ModelParams::new(0.01, 0.0, 7.0, 1.0, 0.1, 0.8).is_err());
        assert!(ModelParams::new(0.01, 1e-4, 7.0, 1.0, 0.1, -0.8).is_err());
        assert!(ModelParams::fig1().validate().is_ok());
    }

    #[test]
    fn rest_states_are_kinetic_equilibria() {
        let p = ModelParams::fig1();
        let states = rest_states(&p);
        assert_eq!(states.len(), 3);
        for (u1, u2) in states {
            assert!((kinetics_f(u1, p.alpha) - u2).abs() < 1e-12);
            assert!((u1 - p.gamma * u2).abs() < 1e-12);
        }
        let (u1, u2) = upper_rest_state(&p).unwrap();
        assert!((u1 - 0.8246).abs() < 1e-3 && (u2 - 0.1178).abs() < 1e-3);
    }

    #[test]
    fn remainder_value() {
        let v = Field::from_1d(vec![0.1], vec![0.3]).unwrap();
        let n = nonlinear_remainder(&v, &[0.0], &ModelParams::fig1()).unwrap();
        assert_relative_eq!(n.u1[0], 0.0091, epsilon = 1e-15);
        assert_eq!(n.u2[0], 0.0);
    }
}
