//! The five radial settings as data.
//!
//! Every setting is reduced to a 1+1 equation for `w = rho(xi) * u`,
//!
//! ```text
//! w_tt = w_xixi - V(xi) w - N(w, xi)
//! ```
//!
//! on a coordinate `xi` (the line, the radius, or the tortoise coordinate).
//! This module owns the reduction weight `rho`, the potential `V`, the
//! nonlinearity `N`, the cone coordinate `s(t, xi)` of each asymptotic end
//! and the rescaling used to read off radiation fields.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    #[serde(rename = "wave1d")]
    Wave1D,
    #[serde(rename = "euclidean3d")]
    EuclideanRadial3D,
    #[serde(rename = "hyperbolic3d")]
    HyperbolicRadial3D,
    #[serde(rename = "schwarzschild")]
    SchwarzschildRadial,
    #[serde(rename = "semilinear3d")]
    SemilinearRadial3D,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Wave1D,
        ScenarioKind::EuclideanRadial3D,
        ScenarioKind::HyperbolicRadial3D,
        ScenarioKind::SchwarzschildRadial,
        ScenarioKind::SemilinearRadial3D,
    ];

    /// Name used in config files and reports.
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Wave1D => "wave1d",
            ScenarioKind::EuclideanRadial3D => "euclidean3d",
            ScenarioKind::HyperbolicRadial3D => "hyperbolic3d",
            ScenarioKind::SchwarzschildRadial => "schwarzschild",
            ScenarioKind::SemilinearRadial3D => "semilinear3d",
        }
    }

    /// Spatial dimension of the physical problem.
    pub fn dimension(self) -> usize {
        match self {
            ScenarioKind::Wave1D => 1,
            _ => 3,
        }
    }

    /// Kinds posed on a half-line `r >= 0` with the regularity condition `w(t, 0) = 0`.
    pub fn is_radial(self) -> bool {
        matches!(
            self,
            ScenarioKind::EuclideanRadial3D
                | ScenarioKind::HyperbolicRadial3D
                | ScenarioKind::SemilinearRadial3D
        )
    }

    pub fn is_two_ended(self) -> bool {
        matches!(self, ScenarioKind::Wave1D | ScenarioKind::SchwarzschildRadial)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown scenario `{s}`")))
    }
}

/// Asymptotic end of the evolution coordinate.
///
/// `Right` is `xi -> +inf` (null infinity; `theta = +1` in one dimension).
/// `Left` is `xi -> -inf`: `theta = -1` for the line, the event horizon for
/// Schwarzschild. Radial kinds only have `Right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Right,
    Left,
}

/// Geometric quantities at one point of the evolution coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub xi: f64,
    /// Areal radius `r` (equals `xi` except on Schwarzschild; `|xi|` is not used).
    pub r: f64,
    /// `r - 2M` on Schwarzschild, kept separately to survive cancellation near the horizon.
    pub horizon_offset: f64,
    /// Reduction weight `rho` with `w = rho * u`.
    pub rho: f64,
    /// `d rho / d xi`.
    pub drho: f64,
    pub potential: f64,
    /// `1 - 2M/r` (1 off Schwarzschild).
    pub lapse: f64,
}

/// A fully specified geometric setting. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    kind: ScenarioKind,
    mass: f64,
}

/// Build a scenario; `mass > 0` exactly when the kind is Schwarzschild.
pub fn make_scenario(kind: ScenarioKind, mass: f64) -> Result<Scenario> {
    if !mass.is_finite() {
        return Err(Error::Scenario(format!("mass must be finite, got {mass}")));
    }
    match kind {
        ScenarioKind::SchwarzschildRadial if mass <= 0.0 => Err(Error::Scenario(format!(
            "schwarzschild needs mass > 0, got {mass}"
        ))),
        ScenarioKind::SchwarzschildRadial => Ok(Scenario { kind, mass }),
        _ if mass != 0.0 => Err(Error::Scenario(format!(
            "{kind} takes mass = 0, got {mass}"
        ))),
        _ => Ok(Scenario { kind, mass }),
    }
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Area of the cross-section at infinity: `S^0` has two points, `S^2` has area `4 pi`.
    pub fn boundary_area(&self) -> f64 {
        match self.kind {
            ScenarioKind::Wave1D => 2.0,
            _ => 4.0 * PI,
        }
    }

    /// Weight of one radiation channel in `F^2`: one per point of `S^0`, `4 pi` for spheres.
    pub fn channel_weight(&self) -> f64 {
        match self.kind {
            ScenarioKind::Wave1D => 1.0,
            _ => 4.0 * PI,
        }
    }

    pub fn coordinate_label(&self) -> &'static str {
        match self.kind {
            ScenarioKind::Wave1D => "x",
            ScenarioKind::SchwarzschildRadial => "r*",
            _ => "r",
        }
    }

    pub fn ends(&self) -> &'static [End] {
        if self.kind.is_two_ended() {
            &[End::Right, End::Left]
        } else {
            &[End::Right]
        }
    }

    pub fn check_end(&self, end: End) -> Result<()> {
        if self.ends().contains(&end) {
            Ok(())
        } else {
            Err(Error::InvalidEnd { end })
        }
    }

    /// Areal radius at `xi` (and `r - 2M` on Schwarzschild).
    fn radius_and_offset(&self, xi: f64) -> (f64, f64) {
        match self.kind {
            ScenarioKind::SchwarzschildRadial => {
                let y = tortoise_inverse_offset(self.mass, xi);
                (2.0 * self.mass + y, y)
            }
            _ => (xi, f64::INFINITY),
        }
    }

    pub fn point(&self, xi: f64) -> PointGeometry {
        let (r, horizon_offset) = self.radius_and_offset(xi);
        let (rho, drho, potential, lapse) = match self.kind {
            ScenarioKind::Wave1D => (1.0, 0.0, 0.0, 1.0),
            ScenarioKind::EuclideanRadial3D | ScenarioKind::SemilinearRadial3D => {
                (xi, 1.0, 0.0, 1.0)
            }
            ScenarioKind::HyperbolicRadial3D => (xi.sinh(), xi.cosh(), 0.0, 1.0),
            ScenarioKind::SchwarzschildRadial => {
                let lapse = horizon_offset / r;
                let v = lapse * 2.0 * self.mass / (r * r * r);
                (r, lapse, v, lapse)
            }
        };
        PointGeometry {
            xi,
            r,
            horizon_offset,
            rho,
            drho,
            potential,
            lapse,
        }
    }

    /// `rho(xi)` with `u = w / rho`.
    pub fn reduction_weight(&self, xi: f64) -> f64 {
        self.point(xi).rho
    }

    /// `V(xi)` in the reduced equation.
    pub fn potential(&self, xi: f64) -> f64 {
        self.point(xi).potential
    }

    /// `N(w, xi)`: `w^5 / r^4` on the semilinear kind, evaluated as
    /// `r (w/r)^5` with the limit 0 at the origin; zero elsewhere.
    pub fn nonlinearity(&self, w: f64, xi: f64) -> f64 {
        match self.kind {
            ScenarioKind::SemilinearRadial3D => {
                if xi == 0.0 {
                    0.0
                } else {
                    let u = w / xi;
                    xi * u * u * u * u * u
                }
            }
            _ => 0.0,
        }
    }

    /// Retarded (outgoing) time of `end` at `(t, xi)`: `t - xi` on the right,
    /// `t + xi` on the left.
    pub fn cone_coordinate(&self, t: f64, xi: f64, end: End) -> Result<f64> {
        self.check_end(end)?;
        Ok(match end {
            End::Right => t - xi,
            End::Left => t + xi,
        })
    }

    /// Cone coordinate used for partial energies: the smallest retarded time
    /// over all ends, i.e. `t - |xi|` when two-ended and `t - r` otherwise.
    pub fn region_cone_coordinate(&self, t: f64, xi: f64) -> f64 {
        if self.kind.is_two_ended() {
            t - xi.abs()
        } else {
            t - xi
        }
    }

    /// Boundary defining variable used to extrapolate radiation fields to the end.
    pub fn boundary_variable(&self, xi: f64, end: End) -> f64 {
        match (self.kind, end) {
            (ScenarioKind::Wave1D, _) => 1.0 / xi.abs(),
            (ScenarioKind::HyperbolicRadial3D, _) => (-xi).exp(),
            (ScenarioKind::SchwarzschildRadial, End::Left) => self.point(xi).horizon_offset,
            (_, _) => 1.0 / self.point(xi).r,
        }
    }

    /// Rescaled field `v` at a probe whose reduced value is `w`.
    ///
    /// `v = w` on the line, at Euclidean and Schwarzschild null infinity
    /// (`r u`); `v = u / x` with `x = 2 e^{-r}` on hyperbolic space; and
    /// `v = 2M u` at the Schwarzschild horizon.
    pub fn rescale(&self, w: f64, xi: f64, end: End) -> f64 {
        match (self.kind, end) {
            (ScenarioKind::HyperbolicRadial3D, _) => w / (1.0 - (-2.0 * xi).exp()),
            (ScenarioKind::SchwarzschildRadial, End::Left) => {
                let p = self.point(xi);
                2.0 * self.mass * w / p.r
            }
            _ => w,
        }
    }

    pub fn channel_name(&self, end: End) -> &'static str {
        match (self.kind, end) {
            (ScenarioKind::Wave1D, End::Right) => "right",
            (ScenarioKind::Wave1D, End::Left) => "left",
            (ScenarioKind::SchwarzschildRadial, End::Left) => "horizon",
            _ => "infinity",
        }
    }
}

/// Tortoise coordinate `r* = r + 2M log(r - 2M)`.
pub fn tortoise(mass: f64, r: f64) -> Result<f64> {
    if !(mass > 0.0) || !(r > 2.0 * mass) || !r.is_finite() {
        return Err(Error::InsideHorizon { mass, r });
    }
    Ok(r + 2.0 * mass * (r - 2.0 * mass).ln())
}

/// Inverse of [`tortoise`]: the areal radius `r > 2M` with `tortoise(r) = r_star`.
pub fn tortoise_inverse(mass: f64, r_star: f64) -> Result<f64> {
    if !(mass > 0.0) || !r_star.is_finite() {
        return Err(Error::Scenario(format!(
            "tortoise inverse needs mass > 0 and finite r*, got M = {mass}, r* = {r_star}"
        )));
    }
    Ok(2.0 * mass + tortoise_inverse_offset(mass, r_star))
}

/// `r - 2M` as a function of `r*`.
///
/// Solves `e^z + 2M z = r* - 2M` for `z = log(r - 2M)` by Newton's method
/// safeguarded with bisection; the left side is increasing and convex in `z`.
pub(crate) fn tortoise_inverse_offset(mass: f64, r_star: f64) -> f64 {
    let c = r_star - 2.0 * mass;
    let g = |z: f64| z.exp() + 2.0 * mass * z - c;
    // g(c / 2M) = exp(c / 2M) > 0
    let mut hi = c / (2.0 * mass);
    if c > 0.0 {
        hi = hi.min(c.ln());
        if g(hi) < 0.0 {
            hi = c / (2.0 * mass);
        }
    }
    let mut lo = hi - 1.0;
    let mut width = 1.0;
    while g(lo) > 0.0 {
        width *= 2.0;
        lo = hi - width;
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gz = g(z);
        if gz == 0.0 {
            break;
        }
        if gz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let newton = z - gz / (z.exp() + 2.0 * mass);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= 1e-15 * (1.0 + z.abs()) {
            z = next;
            break;
        }
        z = next;
    }
    z.exp()
}
