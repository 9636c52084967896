//! Closed-form reference solutions: d'Alembert's formula (full line and
//! odd-extended half line), the explicit one-dimensional radiation field,
//! the radial Radon transform on R^3 and the radiation field expressed
//! through it. Everything here is independent of the finite-difference path.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{End, Scenario, ScenarioKind};
use crate::numerics::{fd4_second, integrate_with_breaks, ORACLE_QUAD_TOL};
use crate::profile::{InitialData, RadialProfile};

/// How a profile on `[0, inf)` is continued to the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Full-line data, used as given.
    None,
    /// Antisymmetric reflection about 0, for half-line problems with `w(t, 0) = 0`.
    Odd,
}

fn extended_value(p: &RadialProfile, ext: Extension, x: f64) -> f64 {
    match ext {
        Extension::None => p.value(x),
        Extension::Odd if x < 0.0 => -p.value(-x),
        Extension::Odd => p.value(x),
    }
}

fn extended_derivative(p: &RadialProfile, ext: Extension, x: f64) -> f64 {
    match ext {
        Extension::None => p.derivative(x),
        Extension::Odd => p.derivative(x.abs()),
    }
}

/// `int_a^b psi~(x) dx` of the extended profile, restricted to its support.
fn extended_integral(p: &RadialProfile, ext: Extension, a: f64, b: f64) -> f64 {
    if p.is_zero() || a == b {
        return 0.0;
    }
    let (sign, lo, hi) = if a <= b { (1.0, a, b) } else { (-1.0, b, a) };
    let (s0, s1) = p.support();
    let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
    match ext {
        Extension::None => pieces.push((1.0, lo.max(s0), hi.min(s1))),
        Extension::Odd => {
            // positive half, then the reflected negative half
            pieces.push((1.0, lo.max(0.0).max(s0), hi.min(s1)));
            if lo < 0.0 {
                let nlo = (-hi.min(0.0)).max(s0);
                let nhi = (-lo).min(s1);
                pieces.push((-1.0, nlo.max(0.0), nhi));
            }
        }
    }
    let mut total = 0.0;
    for (weight, x0, x1) in pieces {
        if x1 > x0 {
            let q = integrate_with_breaks(|x| p.value(x), &[x0, x1], ORACLE_QUAD_TOL);
            total += weight * q.value;
        }
    }
    sign * total
}

/// Left/right-moving decomposition `u(t, x) = F(x + t) + G(x - t)`.
#[derive(Debug, Clone)]
pub struct WaveDecomposition<'a> {
    pub phi: &'a RadialProfile,
    pub psi: &'a RadialProfile,
    pub extension: Extension,
    /// The free additive constant; it cancels in `u` and in every derivative.
    pub constant: f64,
}

impl<'a> WaveDecomposition<'a> {
    pub fn new(phi: &'a RadialProfile, psi: &'a RadialProfile, extension: Extension) -> Self {
        Self {
            phi,
            psi,
            extension,
            constant: 0.0,
        }
    }

    /// `F(s) = phi(s)/2 + (1/2) int_0^s psi + C`.
    pub fn f(&self, s: f64) -> f64 {
        0.5 * extended_value(self.phi, self.extension, s)
            + 0.5 * extended_integral(self.psi, self.extension, 0.0, s)
            + self.constant
    }

    /// `G(s) = phi(s)/2 + (1/2) int_s^0 psi - C`.
    pub fn g(&self, s: f64) -> f64 {
        0.5 * extended_value(self.phi, self.extension, s)
            + 0.5 * extended_integral(self.psi, self.extension, s, 0.0)
            - self.constant
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        0.5 * extended_derivative(self.phi, self.extension, s)
            + 0.5 * extended_value(self.psi, self.extension, s)
    }

    pub fn g_prime(&self, s: f64) -> f64 {
        0.5 * extended_derivative(self.phi, self.extension, s)
            - 0.5 * extended_value(self.psi, self.extension, s)
    }

    pub fn solution(&self, t: f64, x: f64) -> f64 {
        self.f(x + t) + self.g(x - t)
    }

    /// `u_t = F'(x + t) - G'(x - t)`.
    pub fn velocity(&self, t: f64, x: f64) -> f64 {
        self.f_prime(x + t) - self.g_prime(x - t)
    }

    /// `u_x = F'(x + t) + G'(x - t)`.
    pub fn gradient(&self, t: f64, x: f64) -> f64 {
        self.f_prime(x + t) + self.g_prime(x - t)
    }
}

/// d'Alembert's solution of the free wave equation.
///
/// Evaluated as `(phi(x+t) + phi(x-t))/2 + (1/2) int_{x-t}^{x+t} psi`, which is
/// `F(x + t) + G(x - t)` with the constant cancelled; a single integral keeps
/// the quadrature error proportional to the interval actually covered.
pub fn dalembert(
    phi: &RadialProfile,
    psi: &RadialProfile,
    extension: Extension,
    t: f64,
    x: f64,
) -> f64 {
    0.5 * (extended_value(phi, extension, x + t) + extended_value(phi, extension, x - t))
        + 0.5 * extended_integral(psi, extension, x - t, x + t)
}

/// Explicit radiation field of the line: `phi'(s)/2 + psi(s)/2` for
/// `theta = -1` (`End::Left`) and `phi'(s)/2 - psi(s)/2` for `theta = +1`.
pub fn radiation_1d_exact(phi: &RadialProfile, psi: &RadialProfile, s: f64, end: End) -> f64 {
    match end {
        End::Left => 0.5 * phi.derivative(s) + 0.5 * psi.value(s),
        End::Right => 0.5 * phi.derivative(s) - 0.5 * psi.value(s),
    }
}

/// Plane integral of a radial function on R^3: `2 pi int_{|s|}^inf f(r) r dr`.
pub fn radon_radial(f: &RadialProfile, s: f64) -> Result<f64> {
    let (_, hi) = f.support();
    if !hi.is_finite() {
        return Err(Error::NonIntegrable("profile support is unbounded".into()));
    }
    let lo = s.abs();
    if f.is_zero() || lo >= hi {
        return Ok(0.0);
    }
    let q = integrate_with_breaks(|r| f.value(r) * r, &[lo, hi], ORACLE_QUAD_TOL / (2.0 * PI));
    if !q.converged || !q.value.is_finite() {
        return Err(Error::NonIntegrable(format!(
            "quadrature did not converge (error estimate {})",
            q.error
        )));
    }
    Ok(2.0 * PI * q.value)
}

/// `d/ds R f(s) = -2 pi s f(|s|)`.
fn radon_radial_ds(f: &RadialProfile, s: f64) -> f64 {
    -2.0 * PI * s * f.value(s.abs())
}

/// `d^2/ds^2 R f(s) = -2 pi (f(|s|) + |s| f'(|s|))`; fourth-order differences
/// of the transform when the profile has no closed-form derivative.
fn radon_radial_dss(f: &RadialProfile, s: f64) -> Result<f64> {
    if f.has_closed_derivative() {
        let a = s.abs();
        return Ok(-2.0 * PI * (f.value(a) + a * f.derivative(a)));
    }
    let step = 1e-2 * f.support_radius().max(1.0);
    let err = std::cell::RefCell::new(None);
    let d = fd4_second(
        |x| match radon_radial(f, x) {
            Ok(v) => v,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                0.0
            }
        },
        s,
        step,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(d),
    }
}

/// Forward radiation field of radial data on R^3 through the Radon transform,
/// `R+(s) = (1/4 pi) (d_s R psi(s) + d_s^2 R phi(s))`, i.e. `d_s` of the limit
/// of `r u(s + r, r)`.
pub fn friedlander_r3(phi: &RadialProfile, psi: &RadialProfile, s: f64) -> Result<f64> {
    radon_radial(phi, s)?;
    radon_radial(psi, s)?;
    Ok((radon_radial_ds(psi, s) + radon_radial_dss(phi, s)?) / (4.0 * PI))
}

fn reduced_profile(scenario: &Scenario, p: &RadialProfile) -> RadialProfile {
    if p.is_zero() {
        return RadialProfile::zero();
    }
    let sc = *scenario;
    let q = p.clone();
    let q2 = p.clone();
    RadialProfile::custom_with_derivative(
        p.support(),
        move |x| sc.reduction_weight(x) * q.value(x),
        move |x| {
            let g = sc.point(x);
            g.drho * q2.value(x) + g.rho * q2.derivative(x)
        },
    )
}

/// Closed-form `u(t, xi)` for the three kinds whose reduced field is a free
/// wave: the line itself, and the odd-extended half-line wave for
/// `w = r u` (Euclidean) and `w = sinh(r) u` (hyperbolic).
pub fn exact_solution(scenario: &Scenario, data: &InitialData, t: f64, xi: f64) -> Result<f64> {
    match scenario.kind() {
        ScenarioKind::Wave1D => Ok(dalembert(&data.phi, &data.psi, Extension::None, t, xi)),
        ScenarioKind::EuclideanRadial3D | ScenarioKind::HyperbolicRadial3D => {
            let phi = reduced_profile(scenario, &data.phi);
            let psi = reduced_profile(scenario, &data.psi);
            let u_at = |x: f64| {
                dalembert(&phi, &psi, Extension::Odd, t, x) / scenario.reduction_weight(x)
            };
            let r = xi.abs();
            let near_origin = 1e-3;
            if r < near_origin {
                // even in r: u(0) = (4 u(h) - u(2h)) / 3 up to O(h^4)
                let h = near_origin;
                let u0 = (4.0 * u_at(h) - u_at(2.0 * h)) / 3.0;
                if r == 0.0 {
                    return Ok(u0);
                }
                // quadratic through u(0), u(h), u(2h) in r^2 is exact for even quadratics
                let u1 = u_at(h);
                return Ok(u0 + (u1 - u0) * (r * r) / (h * h));
            }
            Ok(u_at(r))
        }
        ScenarioKind::SchwarzschildRadial => Err(Error::NoClosedForm("schwarzschild")),
        ScenarioKind::SemilinearRadial3D => Err(Error::NoClosedForm("semilinear3d")),
    }
}

/// Reduced field `w = rho u` of the closed-form solution.
pub fn exact_reduced(scenario: &Scenario, data: &InitialData, t: f64, xi: f64) -> Result<f64> {
    match scenario.kind() {
        ScenarioKind::Wave1D => Ok(dalembert(&data.phi, &data.psi, Extension::None, t, xi)),
        ScenarioKind::EuclideanRadial3D | ScenarioKind::HyperbolicRadial3D => {
            let phi = reduced_profile(scenario, &data.phi);
            let psi = reduced_profile(scenario, &data.psi);
            Ok(dalembert(&phi, &psi, Extension::Odd, t, xi))
        }
        _ => exact_solution(scenario, data, t, xi),
    }
}

/// Profiles of the reduced data `(rho phi, rho psi)`.
pub fn reduced_data(scenario: &Scenario, data: &InitialData) -> InitialData {
    InitialData::new(
        reduced_profile(scenario, &data.phi),
        reduced_profile(scenario, &data.psi),
    )
}
