//! Radiation fields from probe time series.
//!
//! Each probe records `w(t, xi_p)`. Along the end's cone coordinate `s` the
//! rescaled series `v_p(s)` is differentiated in `s`, resampled onto a common
//! `s`-grid and then extrapolated to the boundary by a linear fit in the
//! boundary defining variable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::Trace;
use crate::geometry::{End, Scenario};
use crate::numerics::{cumulative_trapezoid, derivative_2nd_order, UniformSeries};

/// Probes closer than this many cells to an outflow boundary are rejected.
pub const BOUNDARY_CLEARANCE_CELLS: f64 = 10.0;

/// Sampled radiation field of one channel on a uniform `s`-grid.
///
/// Before extrapolation `samples` holds one row per probe, ordered by
/// increasing boundary variable (closest to the end first). After
/// extrapolation it holds a single row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiationSignal {
    pub scenario: Scenario,
    pub end: End,
    pub channel: String,
    pub weight: f64,
    pub s_start: f64,
    pub ds: f64,
    pub extraction_radii: Vec<f64>,
    pub boundary_values: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    /// Largest fit residual, set by [`extrapolate_to_boundary`].
    pub residual: Option<f64>,
    pub cells: usize,
}

impl RadiationSignal {
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn s_at(&self, k: usize) -> f64 {
        self.s_start + self.ds * k as f64
    }

    pub fn s_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.s_at(k)).collect()
    }

    pub fn s_end(&self) -> f64 {
        self.s_at(self.len().saturating_sub(1))
    }

    /// The extrapolated row, or the probe closest to the boundary.
    pub fn values(&self) -> &[f64] {
        &self.samples[0]
    }

    pub fn is_extrapolated(&self) -> bool {
        self.residual.is_some()
    }

    /// Squared `L^2(ds)` norm of [`Self::values`] times the channel weight.
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values().iter().map(|v| v * v).collect();
        self.weight * cumulative_trapezoid(&sq, self.ds).last().copied().unwrap_or(0.0)
    }

    /// Cubic resampling of every row onto `len` points from `start` with spacing `ds`.
    pub fn resampled(&self, start: f64, ds: f64, len: usize) -> Result<Self> {
        let rows = self
            .samples
            .iter()
            .map(|row| {
                let series = UniformSeries {
                    start: self.s_start,
                    step: self.ds,
                    values: row.clone(),
                };
                (0..len)
                    .map(|k| {
                        let s = start + ds * k as f64;
                        series.cubic_at(s).ok_or_else(|| {
                            Error::Extraction(format!(
                                "s = {s} outside the {} channel range [{}, {}]",
                                self.channel,
                                self.s_start,
                                self.s_end()
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            s_start: start,
            ds,
            samples: rows,
            ..self.clone()
        })
    }
}

fn on_side(scenario: &Scenario, xi: f64, end: End) -> bool {
    if !scenario.kind().is_two_ended() {
        return end == End::Right;
    }
    match end {
        End::Right => xi > 0.0,
        End::Left => xi < 0.0,
    }
}

/// Per-probe radiation samples for one end, on the intersection of the probe `s`-ranges.
pub fn extract_signal(trace: &Trace, end: End) -> Result<RadiationSignal> {
    let scenario = &trace.scenario;
    scenario.check_end(end)?;
    let grid = &trace.grid;
    let h = grid.spacing();
    let clearance = BOUNDARY_CLEARANCE_CELLS * h;

    let mut series = Vec::new();
    for p in trace.probes.iter().filter(|p| on_side(scenario, p.position, end)) {
        let xi = p.position;
        let too_close = match end {
            End::Right => xi > grid.max - clearance,
            End::Left => scenario.kind().is_two_ended() && xi < grid.min + clearance,
        };
        if too_close {
            return Err(Error::Extraction(format!(
                "probe at {xi} lies within {BOUNDARY_CLEARANCE_CELLS} cells of the outflow boundary"
            )));
        }
        let x = scenario.boundary_variable(xi, end);
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Extraction(format!(
                "probe at {xi} has no usable boundary variable ({x})"
            )));
        }
        if p.t.len() < 4 {
            return Err(Error::Extraction(format!(
                "probe at {xi} has {} samples, need at least 4",
                p.t.len()
            )));
        }
        let v: Vec<f64> = p.w.iter().map(|&w| scenario.rescale(w, xi, end)).collect();
        let start = scenario.cone_coordinate(p.t[0], xi, end)?;
        let dv = derivative_2nd_order(&v, trace.dt);
        series.push((
            x,
            xi,
            UniformSeries {
                start,
                step: trace.dt,
                values: dv,
            },
        ));
    }
    if series.len() < 3 {
        return Err(Error::Extraction(format!(
            "need at least 3 probes for the {} channel, found {}",
            scenario.channel_name(end),
            series.len()
        )));
    }
    series.sort_by(|a, b| a.0.total_cmp(&b.0));

    let start = series.iter().map(|s| s.2.start).fold(f64::NEG_INFINITY, f64::max);
    let stop = series.iter().map(|s| s.2.end()).fold(f64::INFINITY, f64::min);
    if stop - start < 3.0 * trace.dt {
        return Err(Error::Extraction(format!(
            "probe s-ranges do not overlap (common range [{start}, {stop}])"
        )));
    }
    let len = ((stop - start) / trace.dt + 1e-9).floor() as usize + 1;
    let samples = series
        .iter()
        .map(|(_, xi, s)| {
            (0..len)
                .map(|k| {
                    s.cubic_at(start + trace.dt * k as f64).ok_or_else(|| {
                        Error::Extraction(format!("resampling the probe at {xi} failed"))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RadiationSignal {
        scenario: *scenario,
        end,
        channel: scenario.channel_name(end).to_string(),
        weight: scenario.channel_weight(),
        s_start: start,
        ds: trace.dt,
        extraction_radii: series.iter().map(|s| s.1).collect(),
        boundary_values: series.iter().map(|s| s.0).collect(),
        samples,
        residual: None,
        cells: grid.cells,
    })
}

/// Least-squares fit `A + B x_p` per `s`; returns the single-row signal `A`
/// with the largest fit residual attached.
pub fn extrapolate_to_boundary(signal: &RadiationSignal) -> Result<RadiationSignal> {
    let xs = &signal.boundary_values;
    let n = xs.len();
    if n < 3 || signal.samples.len() != n {
        return Err(Error::Extraction(format!("need at least 3 extraction radii, found {n}")));
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(sxx > (1e-10 * scale).powi(2)) {
        return Err(Error::Extraction("extraction radii are degenerate".into()));
    }
    let mut out = Vec::with_capacity(signal.len());
    let mut residual = 0.0f64;
    for k in 0..signal.len() {
        let y0 = signal.samples[0][k];
        if signal.samples.iter().all(|row| row[k] == y0) {
            out.push(y0);
            continue;
        }
        let mean_y = signal.samples.iter().map(|row| row[k]).sum::<f64>() / n as f64;
        let sxy: f64 = xs
            .iter()
            .zip(&signal.samples)
            .map(|(x, row)| (x - mean_x) * (row[k] - mean_y))
            .sum();
        let b = sxy / sxx;
        let a = mean_y - b * mean_x;
        for (x, row) in xs.iter().zip(&signal.samples) {
            residual = residual.max((row[k] - a - b * x).abs());
        }
        out.push(a);
    }
    Ok(RadiationSignal {
        samples: vec![out],
        residual: Some(residual),
        ..signal.clone()
    })
}

/// Resample all signals onto the intersection of their `s`-ranges, using the
/// finest spacing.
pub fn common_grid(signals: &[RadiationSignal]) -> Result<Vec<RadiationSignal>> {
    if signals.is_empty() {
        return Ok(Vec::new());
    }
    let start = signals.iter().map(|s| s.s_start).fold(f64::NEG_INFINITY, f64::max);
    let stop = signals.iter().map(|s| s.s_end()).fold(f64::INFINITY, f64::min);
    let ds = signals.iter().map(|s| s.ds).fold(f64::INFINITY, f64::min);
    if stop - start < 3.0 * ds {
        return Err(Error::Extraction(format!(
            "channel s-ranges do not overlap (common range [{start}, {stop}])"
        )));
    }
    let len = ((stop - start) / ds + 1e-9).floor() as usize + 1;
    signals.iter().map(|s| s.resampled(start, ds, len)).collect()
}

/// Extract and extrapolate every end of the traced scenario on one `s`-grid.
pub fn extract_all(trace: &Trace) -> Result<Vec<RadiationSignal>> {
    let signals = trace
        .scenario
        .ends()
        .iter()
        .map(|&end| extract_signal(trace, end).and_then(|s| extrapolate_to_boundary(&s)))
        .collect::<Result<Vec<_>>>()?;
    common_grid(&signals)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelNorm {
    pub channel: String,
    pub weight: f64,
    pub norm_sq: f64,
}

/// Weighted sum of squared channels and its running integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularAggregate {
    pub s_start: f64,
    pub ds: f64,
    pub f_sq: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub channels: Vec<ChannelNorm>,
}

impl AngularAggregate {
    pub fn s_at(&self, k: usize) -> f64 {
        self.s_start + self.ds * k as f64
    }

    /// `||F||^2`, the last cumulative value.
    pub fn norm_sq(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Running integral at `s` (linear between samples, constant outside).
    pub fn cumulative_at(&self, s: f64) -> f64 {
        let n = self.cumulative.len();
        if n == 0 || s <= self.s_start {
            return 0.0;
        }
        let pos = (s - self.s_start) / self.ds;
        if pos >= (n - 1) as f64 {
            return self.norm_sq();
        }
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        self.cumulative[k] + frac * (self.cumulative[k + 1] - self.cumulative[k])
    }
}

/// `F^2(s) = sum_channels weight |channel(s)|^2` with its trapezoid running integral.
pub fn aggregate(scenario: &Scenario, signals: &[RadiationSignal]) -> Result<AngularAggregate> {
    let ends = scenario.ends();
    if signals.len() != ends.len() || !ends.iter().all(|e| signals.iter().filter(|s| s.end == *e).count() == 1) {
        return Err(Error::Extraction(format!(
            "{} needs one channel per end ({} expected, {} given)",
            scenario.kind(),
            ends.len(),
            signals.len()
        )));
    }
    let first = &signals[0];
    for s in signals {
        let same = s.len() == first.len()
            && (s.ds - first.ds).abs() <= 1e-12 * first.ds
            && (s.s_start - first.s_start).abs() <= 1e-9 * first.ds;
        if !same {
            return Err(Error::Extraction("channels do not share one s-grid".into()));
        }
        if s.weight != scenario.channel_weight() {
            return Err(Error::Extraction(format!("channel {} has the wrong weight", s.channel)));
        }
    }
    let mut f_sq = vec![0.0; first.len()];
    for s in signals {
        for (acc, v) in f_sq.iter_mut().zip(s.values()) {
            *acc += s.weight * v * v;
        }
    }
    let cumulative = cumulative_trapezoid(&f_sq, first.ds);
    Ok(AngularAggregate {
        s_start: first.s_start,
        ds: first.ds,
        f_sq,
        cumulative,
        channels: signals
            .iter()
            .map(|s| ChannelNorm {
                channel: s.channel.clone(),
                weight: s.weight,
                norm_sq: s.norm_sq(),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{RadialGrid, RunPlan, Solver};
    use crate::geometry::{make_scenario, ScenarioKind};
    use crate::numerics::relative_l2;
    use crate::oracle::{friedlander_r3, radiation_1d_exact, reduced_data, Extension, WaveDecomposition};
    use crate::profile::{InitialData, RadialProfile};
    use approx::assert_relative_eq;

    fn run(kind: ScenarioKind, grid: RadialGrid, data: &InitialData, cfl: f64, t_final: f64, probes: Vec<f64>) -> Trace {
        let sc = make_scenario(kind, 0.0).unwrap();
        Solver::new(sc, grid, cfl)
            .unwrap()
            .run(data, &RunPlan { t_final, probes, state_stride: 1000, sample_times: vec![] })
            .unwrap()
    }

    fn gauss() -> RadialProfile {
        RadialProfile::gaussian(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_trace_gives_zero_signal() {
        let grid = RadialGrid::new(-20.0, 20.0, 256).unwrap();
        let trace = run(ScenarioKind::Wave1D, grid, &InitialData::zero(), 0.9, 20.0, vec![-12.0, -10.0, -8.0, 8.0, 10.0, 12.0]);
        let signals = extract_all(&trace).unwrap();
        assert_eq!(signals.len(), 2);
        assert!(signals.iter().all(|s| s.values().iter().all(|v| *v == 0.0)));
        assert!(signals.iter().all(|s| s.residual == Some(0.0)));
        let agg = aggregate(&trace.scenario, &signals).unwrap();
        assert!(agg.f_sq.iter().chain(&agg.cumulative).all(|v| *v == 0.0));
    }

    #[test]
    fn radius_independent_signal_is_unchanged() {
        let sc = make_scenario(ScenarioKind::EuclideanRadial3D, 0.0).unwrap();
        let row: Vec<f64> = (0..20).map(|k| (k as f64 * 0.3).sin() + 0.1).collect();
        let sig = RadiationSignal {
            scenario: sc,
            end: End::Right,
            channel: "infinity".into(),
            weight: sc.channel_weight(),
            s_start: -1.0,
            ds: 0.1,
            extraction_radii: vec![30.0, 25.0, 20.0],
            boundary_values: vec![1.0 / 30.0, 1.0 / 25.0, 1.0 / 20.0],
            samples: vec![row.clone(), row.clone(), row.clone()],
            residual: None,
            cells: 100,
        };
        let ex = extrapolate_to_boundary(&sig).unwrap();
        assert_eq!(ex.values(), &row[..]);
        assert_eq!(ex.residual, Some(0.0));

        let degenerate = RadiationSignal {
            boundary_values: vec![0.05, 0.05, 0.05],
            ..sig.clone()
        };
        assert!(extrapolate_to_boundary(&degenerate).is_err());
    }

    #[test]
    fn extrapolation_removes_linear_dependence() {
        let sc = make_scenario(ScenarioKind::EuclideanRadial3D, 0.0).unwrap();
        let xs = vec![0.02, 0.03, 0.05];
        let samples = xs
            .iter()
            .map(|x| (0..10).map(|k| k as f64 + 7.0 * x).collect())
            .collect();
        let sig = RadiationSignal {
            scenario: sc,
            end: End::Right,
            channel: "infinity".into(),
            weight: sc.channel_weight(),
            s_start: 0.0,
            ds: 1.0,
            extraction_radii: vec![50.0, 33.3, 20.0],
            boundary_values: xs,
            samples,
            residual: None,
            cells: 100,
        };
        let ex = extrapolate_to_boundary(&sig).unwrap();
        for (k, v) in ex.values().iter().enumerate() {
            assert!((v - k as f64).abs() < 1e-12);
        }
        assert!(ex.residual.unwrap() < 1e-12);
    }

    #[test]
    fn wave1d_channels_match_closed_form() {
        let grid = RadialGrid::new(-30.0, 30.0, 2048).unwrap();
        let data = InitialData::new(gauss(), RadialProfile::zero());
        let trace = run(ScenarioKind::Wave1D, grid, &data, 1.0, 30.0, vec![-24.0, -21.0, -18.0, 18.0, 21.0, 24.0]);
        let signals = extract_all(&trace).unwrap();
        for sig in &signals {
            let exact: Vec<f64> = sig
                .s_grid()
                .iter()
                .map(|&s| radiation_1d_exact(&data.phi, &data.psi, s, sig.end))
                .collect();
            let err = relative_l2(sig.values(), &exact);
            assert!(err < 1e-3, "{} channel error {err}", sig.channel);
        }
        let agg = aggregate(&trace.scenario, &signals).unwrap();
        assert_relative_eq!(agg.norm_sq(), 0.626_657_068_657_750, max_relative = 1e-3);
        assert!(agg.cumulative.windows(2).all(|w| w[1] >= w[0]));
        assert_relative_eq!(agg.cumulative_at(0.0), 2.0 * 0.156_664_267_164_438, max_relative = 1e-3);
    }

    #[test]
    fn euclidean_signal_matches_radon_formula() {
        let grid = RadialGrid::new(0.0, 40.0, 4096).unwrap();
        let data = InitialData::new(RadialProfile::zero(), gauss());
        let trace = run(ScenarioKind::EuclideanRadial3D, grid, &data, 0.9, 36.0, vec![22.0, 26.0, 30.0]);
        let sig = extrapolate_to_boundary(&extract_signal(&trace, End::Right).unwrap()).unwrap();
        let exact: Vec<f64> = sig
            .s_grid()
            .iter()
            .map(|&s| friedlander_r3(&data.phi, &data.psi, s).unwrap())
            .collect();
        assert!(relative_l2(sig.values(), &exact) < 1e-3);
        let agg = aggregate(&trace.scenario, &[sig]).unwrap();
        assert_relative_eq!(agg.norm_sq(), 0.984_350_621_607_651, max_relative = 1e-3);
    }

    #[test]
    fn hyperbolic_signal_is_reduced_free_wave() {
        let sc = make_scenario(ScenarioKind::HyperbolicRadial3D, 0.0).unwrap();
        let grid = RadialGrid::new(0.0, 40.0, 4096).unwrap();
        let data = InitialData::new(gauss(), RadialProfile::zero());
        let trace = run(ScenarioKind::HyperbolicRadial3D, grid, &data, 1.0, 36.0, vec![22.0, 26.0, 30.0]);
        let sig = extrapolate_to_boundary(&extract_signal(&trace, End::Right).unwrap()).unwrap();
        let red = reduced_data(&sc, &data);
        let dec = WaveDecomposition::new(&red.phi, &red.psi, Extension::Odd);
        let exact: Vec<f64> = sig.s_grid().iter().map(|&s| -dec.g_prime(-s)).collect();
        assert!(relative_l2(sig.values(), &exact) < 1e-3);
    }

    #[test]
    fn rejects_bad_probe_layouts() {
        let grid = RadialGrid::new(0.0, 20.0, 512).unwrap();
        let data = InitialData::new(gauss(), RadialProfile::zero());
        let few = run(ScenarioKind::EuclideanRadial3D, grid, &data, 0.9, 5.0, vec![10.0, 12.0]);
        assert!(extract_signal(&few, End::Right).is_err());
        assert!(matches!(extract_signal(&few, End::Left), Err(Error::InvalidEnd { .. })));
        let edge = run(ScenarioKind::EuclideanRadial3D, grid, &data, 0.9, 5.0, vec![10.0, 12.0, 19.9]);
        assert!(extract_signal(&edge, End::Right).is_err());
        let sig = extract_signal(
            &run(ScenarioKind::EuclideanRadial3D, grid, &data, 0.9, 15.0, vec![10.0, 12.0, 14.0]),
            End::Right,
        )
        .unwrap();
        let sc = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        assert!(aggregate(&sc, std::slice::from_ref(&sig)).is_err());
        let shifted = RadiationSignal { s_start: sig.s_start + 0.5 * sig.ds, ..sig.clone() };
        let w1 = RadiationSignal { end: End::Left, ..shifted };
        assert!(aggregate(&sc, &[RadiationSignal { weight: 1.0, ..sig }, RadiationSignal { weight: 1.0, ..w1 }]).is_err());
    }
}
