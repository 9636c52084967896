//! Small numerical kernels shared by the oracle, solver and diagnostics:
//! adaptive Gauss–Kronrod quadrature, trapezoid sums, finite differences and
//! cubic resampling of uniformly spaced series.

/// Absolute tolerance used by every oracle quadrature.
pub const ORACLE_QUAD_TOL: f64 = 1e-10;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive G7–K15 quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`. Reversed limits negate the result.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Adaptive quadrature over consecutive breakpoints (e.g. kinks or support
/// edges of the integrand). The breakpoints must be monotone.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Quadrature {
    if breaks.len() < 2 {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let (sign, pts): (f64, Vec<f64>) = if breaks[0] <= breaks[breaks.len() - 1] {
        (1.0, breaks.to_vec())
    } else {
        (-1.0, breaks.iter().rev().copied().collect())
    };
    let mut panels: Vec<Panel> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss_kronrod_15(&f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= tol || panels.len() >= MAX_INTERVALS {
            let value: f64 = panels.iter().map(|p| p.value).sum();
            return Quadrature {
                value: sign * value,
                error: total_err,
                converged: total_err <= tol,
            };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval exhausted at machine resolution; keep it as is.
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        panels.push(gauss_kronrod_15(&f, p.a, mid));
        panels.push(gauss_kronrod_15(&f, mid, p.b));
    }
}

/// Composite trapezoid rule for samples with uniform spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * values[0] + values[1..n - 1].iter().sum::<f64>() + 0.5 * values[n - 1]),
    }
}

/// Running trapezoid integral; `out[0] = 0`, `out[last]` is the full integral.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * h * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Second-order derivative of uniformly spaced samples: centered in the
/// interior, one-sided second order at both ends.
pub fn derivative_2nd_order(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (values[1] - values[0]) / h;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Fourth-order centered first derivative of `f` at `x` with step `h`.
pub fn fd4_first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order centered second derivative of `f` at `x` with step `h`.
pub fn fd4_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

/// `||a - b||_2 / ||b||_2` over paired samples; `0` when both vanish.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let (num, den) = a
        .iter()
        .zip(b)
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - y) * (x - y), d + y * y));
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// Uniformly sampled series `values[k] = g(start + k * step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl UniformSeries {
    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len().saturating_sub(1)) as f64
    }

    /// Four-point (cubic) Lagrange interpolation; stencils are shifted inward
    /// near the ends. Returns `None` outside the sampled range.
    pub fn cubic_at(&self, x: f64) -> Option<f64> {
        let n = self.values.len();
        if n < 4 {
            return None;
        }
        let pos = (x - self.start) / self.step;
        let slack = 1e-9;
        if pos < -slack || pos > (n - 1) as f64 + slack {
            return None;
        }
        let base = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let local = pos - base as f64;
        let mut acc = 0.0;
        for j in 0..4 {
            let mut weight = 1.0;
            for m in 0..4 {
                if m != j {
                    weight *= (local - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += weight * self.values[base + j];
        }
        Some(acc)
    }
}
