//! Initial-data profiles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fd4_first;

/// `exp(-z^2) < 1e-14` for `|z|` beyond this many widths.
pub const GAUSSIAN_SUPPORT_WIDTHS: f64 = 5.677_692_427_555_11;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form profile families. `Bump` is the smooth compactly supported
/// `a * exp(1 - 1 / (1 - z^2))`, `z = (x - center) / width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Zero,
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    Bump {
        center: f64,
        width: f64,
        amplitude: f64,
    },
}

#[derive(Clone)]
enum Shape {
    Spec(ProfileSpec),
    Indicator {
        radius: f64,
        amplitude: f64,
    },
    Custom {
        value: ScalarFn,
        derivative: Option<ScalarFn>,
    },
}

/// A real profile `xi -> value` with a declared support interval.
#[derive(Clone)]
pub struct RadialProfile {
    shape: Shape,
    support: (f64, f64),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shape = match &self.shape {
            Shape::Spec(s) => format!("{s:?}"),
            Shape::Indicator { radius, amplitude } => {
                format!("Indicator {{ radius: {radius}, amplitude: {amplitude} }}")
            }
            Shape::Custom { .. } => "Custom".to_string(),
        };
        f.debug_struct("RadialProfile")
            .field("shape", &shape)
            .field("support", &self.support)
            .finish()
    }
}

impl RadialProfile {
    pub fn zero() -> Self {
        Self::from_spec(ProfileSpec::Zero).expect("zero profile is valid")
    }

    /// `amplitude * exp(-((x - center) / width)^2)`.
    pub fn gaussian(center: f64, width: f64, amplitude: f64) -> Result<Self> {
        Self::from_spec(ProfileSpec::Gaussian {
            center,
            width,
            amplitude,
        })
    }

    pub fn bump(center: f64, width: f64, amplitude: f64) -> Result<Self> {
        Self::from_spec(ProfileSpec::Bump {
            center,
            width,
            amplitude,
        })
    }

    pub fn from_spec(spec: ProfileSpec) -> Result<Self> {
        let support = match spec {
            ProfileSpec::Zero => (0.0, 0.0),
            ProfileSpec::Gaussian {
                center,
                width,
                amplitude,
            } => {
                check_family(center, width, amplitude)?;
                if amplitude == 0.0 {
                    (center, center)
                } else {
                    let half = GAUSSIAN_SUPPORT_WIDTHS * width;
                    (center - half, center + half)
                }
            }
            ProfileSpec::Bump {
                center,
                width,
                amplitude,
            } => {
                check_family(center, width, amplitude)?;
                (center - width, center + width)
            }
        };
        Ok(Self {
            shape: Shape::Spec(spec),
            support,
        })
    }

    /// Indicator of `|x| <= radius` (not differentiable; used for transforms).
    pub fn indicator(radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0 && amplitude.is_finite()) {
            return Err(Error::InitialData(format!(
                "indicator needs a positive finite radius, got {radius}"
            )));
        }
        Ok(Self {
            shape: Shape::Indicator { radius, amplitude },
            support: (-radius, radius),
        })
    }

    /// Arbitrary profile supported in `support`; without a derivative rule,
    /// derivatives fall back to fourth-order finite differences.
    pub fn custom<F>(support: (f64, f64), value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            shape: Shape::Custom {
                value: Arc::new(value),
                derivative: None,
            },
            support,
        }
    }

    pub fn custom_with_derivative<F, D>(support: (f64, f64), value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            shape: Shape::Custom {
                value: Arc::new(value),
                derivative: Some(Arc::new(derivative)),
            },
            support,
        }
    }

    pub fn spec(&self) -> Option<ProfileSpec> {
        match self.shape {
            Shape::Spec(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(
            self.shape,
            Shape::Spec(ProfileSpec::Zero)
                | Shape::Spec(ProfileSpec::Gaussian { amplitude: 0.0, .. })
                | Shape::Spec(ProfileSpec::Bump { amplitude: 0.0, .. })
        )
    }

    /// Closed interval outside which the profile vanishes.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Smallest `R` with the support inside `[-R, R]`.
    pub fn support_radius(&self) -> f64 {
        self.support.0.abs().max(self.support.1.abs())
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Spec(ProfileSpec::Zero) => 0.0,
            Shape::Spec(ProfileSpec::Gaussian {
                center,
                width,
                amplitude,
            }) => {
                let z = (x - center) / width;
                amplitude * (-z * z).exp()
            }
            Shape::Spec(ProfileSpec::Bump {
                center,
                width,
                amplitude,
            }) => {
                let z = (x - center) / width;
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - z * z)).exp()
                }
            }
            Shape::Indicator { radius, amplitude } => {
                if x.abs() <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            Shape::Custom { value, .. } => value(x),
        }
    }

    pub fn has_closed_derivative(&self) -> bool {
        match &self.shape {
            Shape::Spec(_) => true,
            Shape::Indicator { .. } => false,
            Shape::Custom { derivative, .. } => derivative.is_some(),
        }
    }

    /// First derivative; closed form where available, otherwise a
    /// fourth-order centered difference with step `1e-5 * R`.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Spec(ProfileSpec::Zero) => 0.0,
            Shape::Spec(ProfileSpec::Gaussian {
                center,
                width,
                amplitude,
            }) => {
                let z = (x - center) / width;
                -2.0 * z / width * amplitude * (-z * z).exp()
            }
            Shape::Spec(ProfileSpec::Bump {
                center,
                width,
                amplitude,
            }) => {
                let z = (x - center) / width;
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    let q = 1.0 - z * z;
                    amplitude * (1.0 - 1.0 / q).exp() * (-2.0 * z / (q * q)) / width
                }
            }
            Shape::Custom {
                derivative: Some(d),
                ..
            } => d(x),
            _ => {
                let step = 1e-5 * self.support_radius().max(1.0);
                fd4_first(|y| self.value(y), x, step)
            }
        }
    }

    /// Largest absolute value, estimated on a fine sampling of the support.
    pub fn max_abs(&self) -> f64 {
        let (a, b) = self.support;
        if b <= a {
            return 0.0;
        }
        (0..=4000)
            .map(|k| self.value(a + (b - a) * k as f64 / 4000.0).abs())
            .fold(0.0, f64::max)
    }
}

fn check_family(center: f64, width: f64, amplitude: f64) -> Result<()> {
    if !(center.is_finite() && width.is_finite() && amplitude.is_finite()) {
        return Err(Error::InitialData("profile parameters must be finite".into()));
    }
    if width <= 0.0 {
        return Err(Error::InitialData(format!("width must be positive, got {width}")));
    }
    if amplitude < 0.0 {
        return Err(Error::InitialData(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    Ok(())
}

/// The Cauchy pair `(u, du/dt)` at `t = 0`, as profiles in the evolution
/// coordinate.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub phi: RadialProfile,
    pub psi: RadialProfile,
}

impl InitialData {
    pub fn new(phi: RadialProfile, psi: RadialProfile) -> Self {
        Self { phi, psi }
    }

    pub fn zero() -> Self {
        Self::new(RadialProfile::zero(), RadialProfile::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.phi.is_zero() && self.psi.is_zero()
    }

    /// Union of both support intervals.
    pub fn support(&self) -> (f64, f64) {
        let parts: Vec<(f64, f64)> = [&self.phi, &self.psi]
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.support())
            .collect();
        if parts.is_empty() {
            return (0.0, 0.0);
        }
        parts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(a, b)| {
                (lo.min(a), hi.max(b))
            })
    }

    pub fn support_radius(&self) -> f64 {
        let (a, b) = self.support();
        a.abs().max(b.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_support_honors_threshold() {
        let g = RadialProfile::gaussian(1.0, 2.0, 3.0).unwrap();
        let (a, b) = g.support();
        assert!(g.value(a).abs() < 1e-14 * 3.0);
        assert!(g.value(b + 0.1).abs() < 1e-14 * 3.0);
        assert!(g.value(b - 0.5).abs() > 1e-14 * 3.0);
    }

    #[test]
    fn closed_derivatives_match_finite_differences() {
        for p in [
            RadialProfile::gaussian(0.3, 0.7, 2.0).unwrap(),
            RadialProfile::bump(-0.5, 1.5, 1.0).unwrap(),
        ] {
            for x in [-1.2, -0.4, 0.0, 0.35, 0.8] {
                let fd = fd4_first(|y| p.value(y), x, 1e-4);
                assert_abs_diff_eq!(p.derivative(x), fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let p = RadialProfile::bump(2.0, 1.0, 4.0).unwrap();
        assert_eq!(p.value(0.99), 0.0);
        assert_eq!(p.value(3.0), 0.0);
        assert_abs_diff_eq!(p.value(2.0), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadialProfile::gaussian(0.0, 0.0, 1.0).is_err());
        assert!(RadialProfile::bump(0.0, 1.0, -1.0).is_err());
        assert!(RadialProfile::gaussian(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn data_support_is_union() {
        let d = InitialData::new(
            RadialProfile::bump(-2.0, 1.0, 1.0).unwrap(),
            RadialProfile::bump(3.0, 1.0, 1.0).unwrap(),
        );
        assert_eq!(d.support(), (-3.0, 4.0));
        assert_eq!(d.support_radius(), 4.0);
        assert_eq!(InitialData::zero().support_radius(), 0.0);
    }
}
