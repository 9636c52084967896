//! Explicit leapfrog evolution of the reduced field `w`.
//!
//! ```text
//! w^{n+1}_i = 2 w^n_i - w^{n-1}_i
//!           + dt^2 ((w^n_{i+1} - 2 w^n_i + w^n_{i-1}) / h^2 - V_i w^n_i - N(w^n_i, xi_i))
//! ```
//!
//! Radial kinds pin `w = 0` at the origin. Open ends use the first-order
//! characteristic outflow condition `w_t +- w_xi = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointGeometry, Scenario, ScenarioKind};
use crate::profile::InitialData;

/// Default Courant number.
pub const DEFAULT_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub min: f64,
    pub max: f64,
    pub cells: usize,
}

impl RadialGrid {
    pub fn new(min: f64, max: f64, cells: usize) -> Result<Self> {
        let g = Self { min, max, cells };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(Error::Grid(format!(
                "need finite min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.cells < 16 {
            return Err(Error::Grid(format!("need at least 16 cells, got {}", self.cells)));
        }
        Ok(())
    }

    /// Check the grid against the coordinate range of a scenario.
    pub fn validate_for(&self, scenario: &Scenario) -> Result<()> {
        self.check()?;
        let kind = scenario.kind();
        if kind.is_radial() && self.min != 0.0 {
            return Err(Error::Grid(format!("{kind} grids start at r = 0, got {}", self.min)));
        }
        if kind == ScenarioKind::SchwarzschildRadial && !(self.min < 0.0 && self.max > 0.0) {
            return Err(Error::Grid(format!(
                "tortoise grids must straddle r* = 0, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.cells as f64
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn position(&self, i: usize) -> f64 {
        if i == self.cells {
            self.max
        } else {
            self.min + self.spacing() * i as f64
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    /// Index of the grid point nearest to `xi`.
    pub fn nearest_index(&self, xi: f64) -> Result<usize> {
        if !(xi >= self.min && xi <= self.max) {
            return Err(Error::Grid(format!(
                "position {xi} outside [{}, {}]",
                self.min, self.max
            )));
        }
        Ok((((xi - self.min) / self.spacing()).round() as usize).min(self.cells))
    }

    /// The same interval with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            cells: self.cells * factor,
            ..*self
        }
    }
}

/// Two consecutive time levels of the reduced field.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub t: f64,
    pub step: u64,
    pub dt: f64,
    pub w_curr: Vec<f64>,
    pub w_prev: Vec<f64>,
}

/// Reduced field and its centered time derivative at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: u64,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
}

impl Snapshot {
    /// Centered velocity from three consecutive levels.
    pub fn centered(t: f64, step: u64, prev: &[f64], curr: &[f64], next: &[f64], dt: f64) -> Self {
        let w_t = next
            .iter()
            .zip(prev)
            .map(|(n, p)| (n - p) / (2.0 * dt))
            .collect();
        Self {
            t,
            step,
            w: curr.to_vec(),
            w_t,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().chain(&self.w_t).all(|v| *v == 0.0)
    }
}

/// Time series at one grid point: samples of `(t, w, w_t)` at every step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSeries {
    pub index: usize,
    pub position: f64,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub t_final: f64,
    pub probes: Vec<f64>,
    pub state_stride: usize,
    /// Extra instants at which snapshots are always kept (the first step at or after each).
    pub sample_times: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub scenario: Scenario,
    pub grid: RadialGrid,
    pub cfl: f64,
    pub dt: f64,
    pub plan: RunPlan,
    pub snapshots: Vec<Snapshot>,
    pub probes: Vec<ProbeSeries>,
}

impl Trace {
    /// Snapshot at the first recorded time `>= t` (within round-off), or the last one.
    pub fn snapshot_at(&self, t: f64) -> &Snapshot {
        let tol = 1e-9 * self.dt;
        self.snapshots
            .iter()
            .find(|s| s.t >= t - tol)
            .unwrap_or_else(|| self.snapshots.last().expect("a trace has at least one snapshot"))
    }
}

/// Number of steps to reach the first time `>= t_final`.
pub fn steps_to_reach(t_final: f64, dt: f64) -> u64 {
    if t_final <= 0.0 {
        return 0;
    }
    let n = (t_final / dt).ceil();
    let n = if (n - 1.0) * dt >= t_final * (1.0 - 1e-12) { n - 1.0 } else { n };
    n.max(0.0) as u64
}

/// Scenario, grid and time step with the geometry sampled once on the grid.
#[derive(Debug, Clone)]
pub struct Solver {
    scenario: Scenario,
    grid: RadialGrid,
    cfl: f64,
    dt: f64,
    points: Vec<PointGeometry>,
}

impl Solver {
    pub fn new(scenario: Scenario, grid: RadialGrid, cfl: f64) -> Result<Self> {
        grid.validate_for(&scenario)?;
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Cfl(cfl));
        }
        let points = grid.positions().into_iter().map(|x| scenario.point(x)).collect();
        Ok(Self {
            scenario,
            grid,
            cfl,
            dt: cfl * grid.spacing(),
            points,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn points(&self) -> &[PointGeometry] {
        &self.points
    }

    fn pinned_origin(&self) -> bool {
        self.scenario.kind().is_radial()
    }

    fn check_support(&self, data: &InitialData) -> Result<()> {
        if data.is_zero() {
            return Ok(());
        }
        let (lo, hi) = data.support();
        let g = &self.grid;
        let below_ok = self.pinned_origin() || lo > g.min;
        if !(below_ok && hi < g.max) {
            return Err(Error::InitialData(format!(
                "support [{lo}, {hi}] escapes the grid [{}, {}]",
                g.min, g.max
            )));
        }
        Ok(())
    }

    /// `w_xixi - V w - N(w)` at interior point `i`.
    #[inline]
    fn acceleration(&self, w: &[f64], i: usize, inv_h2: f64) -> f64 {
        let p = &self.points[i];
        (w[i + 1] - 2.0 * w[i] + w[i - 1]) * inv_h2
            - p.potential * w[i]
            - self.scenario.nonlinearity(w[i], p.xi)
    }

    /// Sample `w = rho phi` and build the `t = -dt` level by a second-order Taylor step.
    pub fn init_state(&self, data: &InitialData) -> Result<WaveState> {
        self.check_support(data)?;
        let n = self.grid.len();
        let dt = self.dt;
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let w: Vec<f64> = self.points.iter().map(|p| p.rho * data.phi.value(p.xi)).collect();
        let v: Vec<f64> = self.points.iter().map(|p| p.rho * data.psi.value(p.xi)).collect();
        let mut prev = vec![0.0; n];
        for i in 0..n {
            let acc = if i == 0 || i == n - 1 {
                0.0
            } else {
                self.acceleration(&w, i, inv_h2)
            };
            prev[i] = w[i] - dt * v[i] + 0.5 * dt * dt * acc;
        }
        let mut curr = w;
        if self.pinned_origin() {
            curr[0] = 0.0;
            prev[0] = 0.0;
        }
        let state = WaveState {
            t: 0.0,
            step: 0,
            dt,
            w_curr: curr,
            w_prev: prev,
        };
        self.check_finite(&state.w_curr, 0.0)?;
        self.check_finite(&state.w_prev, -dt)?;
        Ok(state)
    }

    fn check_finite(&self, w: &[f64], t: f64) -> Result<()> {
        match w.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::Instability {
                index,
                position: self.grid.position(index),
                t,
            }),
            None => Ok(()),
        }
    }

    /// Leapfrog update of `(prev, curr)` into `next`.
    fn advance_into(&self, prev: &[f64], curr: &[f64], next: &mut [f64]) {
        let n = curr.len();
        let h = self.grid.spacing();
        let dt = self.dt;
        let dt2 = dt * dt;
        let inv_h2 = 1.0 / (h * h);
        for i in 1..n - 1 {
            next[i] = 2.0 * curr[i] - prev[i] + dt2 * self.acceleration(curr, i, inv_h2);
        }
        let c = dt / h;
        next[0] = if self.pinned_origin() {
            0.0
        } else {
            // w_t - w_xi = 0 (left-moving waves leave)
            curr[0] + c * (curr[1] - curr[0])
        };
        // w_t + w_xi = 0
        next[n - 1] = curr[n - 1] - c * (curr[n - 1] - curr[n - 2]);
    }

    /// Advance by one step; a non-finite value aborts with an instability error.
    pub fn step(&self, state: &mut WaveState) -> Result<()> {
        let mut next = vec![0.0; state.w_curr.len()];
        self.advance_into(&state.w_prev, &state.w_curr, &mut next);
        let t_next = (state.step + 1) as f64 * self.dt;
        self.check_finite(&next, t_next)?;
        state.w_prev = std::mem::replace(&mut state.w_curr, next);
        state.step += 1;
        state.t = t_next;
        Ok(())
    }

    /// Advance by `steps` steps.
    pub fn evolve_steps(&self, state: &mut WaveState, steps: u64) -> Result<()> {
        let mut next = vec![0.0; state.w_curr.len()];
        for _ in 0..steps {
            self.advance_into(&state.w_prev, &state.w_curr, &mut next);
            let t_next = (state.step + 1) as f64 * self.dt;
            self.check_finite(&next, t_next)?;
            std::mem::swap(&mut state.w_prev, &mut state.w_curr);
            std::mem::swap(&mut state.w_curr, &mut next);
            state.step += 1;
            state.t = t_next;
        }
        Ok(())
    }

    /// Snapshot of `state` with a centered velocity (one step is computed
    /// ahead without modifying the state).
    pub fn snapshot(&self, state: &WaveState) -> Result<Snapshot> {
        let mut next = vec![0.0; state.w_curr.len()];
        self.advance_into(&state.w_prev, &state.w_curr, &mut next);
        self.check_finite(&next, state.t + self.dt)?;
        Ok(Snapshot::centered(
            state.t,
            state.step,
            &state.w_prev,
            &state.w_curr,
            &next,
            self.dt,
        ))
    }

    /// Evolve from `t = 0` to the first step at or after `plan.t_final`,
    /// recording probes every step and snapshots every `state_stride` steps,
    /// at each sample time and at the end.
    pub fn run(&self, data: &InitialData, plan: &RunPlan) -> Result<Trace> {
        if !(plan.t_final >= 0.0 && plan.t_final.is_finite()) {
            return Err(Error::Grid(format!("t_final must be >= 0, got {}", plan.t_final)));
        }
        let stride = plan.state_stride.max(1) as u64;
        let probe_idx: Vec<usize> = plan
            .probes
            .iter()
            .map(|&x| self.grid.nearest_index(x))
            .collect::<Result<_>>()?;
        let total = steps_to_reach(plan.t_final, self.dt);
        let mut sample_steps: Vec<u64> = plan
            .sample_times
            .iter()
            .filter(|t| t.is_finite() && **t >= 0.0)
            .map(|&t| steps_to_reach(t, self.dt).min(total))
            .collect();
        sample_steps.sort_unstable();

        let state = self.init_state(data)?;
        let mut prev = state.w_prev;
        let mut curr = state.w_curr;
        let mut next = vec![0.0; curr.len()];
        let expected = total as usize + 1;
        let mut probes: Vec<ProbeSeries> = probe_idx
            .iter()
            .map(|&index| ProbeSeries {
                index,
                position: self.grid.position(index),
                t: Vec::with_capacity(expected),
                w: Vec::with_capacity(expected),
                w_t: Vec::with_capacity(expected),
            })
            .collect();
        let mut snapshots = Vec::new();
        for n in 0..=total {
            let t = n as f64 * self.dt;
            self.advance_into(&prev, &curr, &mut next);
            self.check_finite(&next, t + self.dt)?;
            for p in probes.iter_mut() {
                p.t.push(t);
                p.w.push(curr[p.index]);
                p.w_t.push((next[p.index] - prev[p.index]) / (2.0 * self.dt));
            }
            if n % stride == 0 || n == total || sample_steps.binary_search(&n).is_ok() {
                snapshots.push(Snapshot::centered(t, n, &prev, &curr, &next, self.dt));
            }
            std::mem::swap(&mut prev, &mut curr);
            std::mem::swap(&mut curr, &mut next);
        }
        Ok(Trace {
            scenario: self.scenario,
            grid: self.grid,
            cfl: self.cfl,
            dt: self.dt,
            plan: plan.clone(),
            snapshots,
            probes,
        })
    }
}

/// Build the initial state for `data` (see [`Solver::init_state`]).
pub fn init_state(
    scenario: &Scenario,
    grid: &RadialGrid,
    data: &InitialData,
    cfl: f64,
) -> Result<WaveState> {
    Solver::new(*scenario, *grid, cfl)?.init_state(data)
}

/// One leapfrog step (see [`Solver::step`]).
pub fn step(scenario: &Scenario, grid: &RadialGrid, state: &WaveState) -> Result<WaveState> {
    let cfl = state.dt / grid.spacing();
    let solver = Solver::new(*scenario, *grid, cfl)?;
    let mut out = state.clone();
    solver.step(&mut out)?;
    Ok(out)
}

/// Full run (see [`Solver::run`]).
pub fn run(
    scenario: &Scenario,
    grid: &RadialGrid,
    data: &InitialData,
    cfl: f64,
    plan: &RunPlan,
) -> Result<Trace> {
    Solver::new(*scenario, *grid, cfl)?.run(data, plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_scenario;
    use crate::oracle::{dalembert, exact_reduced, Extension};
    use crate::profile::RadialProfile;
    use approx::assert_abs_diff_eq;

    fn gaussian_data() -> InitialData {
        InitialData::new(RadialProfile::gaussian(0.0, 1.0, 1.0).unwrap(), RadialProfile::zero())
    }

    fn max_err_vs_dalembert(solver: &Solver, state: &WaveState, data: &InitialData) -> f64 {
        solver
            .grid()
            .positions()
            .iter()
            .zip(&state.w_curr)
            .map(|(&x, w)| (w - dalembert(&data.phi, &data.psi, Extension::None, state.t, x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_validation() {
        let e3 = make_scenario(ScenarioKind::EuclideanRadial3D, 0.0).unwrap();
        let bh = make_scenario(ScenarioKind::SchwarzschildRadial, 1.0).unwrap();
        assert!(RadialGrid::new(0.0, 1.0, 8).is_err());
        assert!(RadialGrid::new(1.0, 1.0, 32).is_err());
        assert!(RadialGrid::new(-1.0, 1.0, 32).unwrap().validate_for(&e3).is_err());
        assert!(RadialGrid::new(1.0, 10.0, 32).unwrap().validate_for(&bh).is_err());
        assert!(RadialGrid::new(-10.0, 10.0, 32).unwrap().validate_for(&bh).is_ok());
        let g = RadialGrid::new(-2.0, 2.0, 16).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.nearest_index(0.1).unwrap(), 8);
        assert!(g.nearest_index(2.5).is_err());
    }

    #[test]
    fn rejects_bad_cfl_and_escaping_support() {
        let w1 = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        let g = RadialGrid::new(-20.0, 20.0, 256).unwrap();
        assert!(matches!(Solver::new(w1, g, 0.0), Err(Error::Cfl(_))));
        assert!(matches!(Solver::new(w1, g, 1.01), Err(Error::Cfl(_))));
        let s = Solver::new(w1, g, 0.9).unwrap();
        let data = InitialData::new(RadialProfile::gaussian(17.0, 1.0, 1.0).unwrap(), RadialProfile::zero());
        assert!(matches!(s.init_state(&data), Err(Error::InitialData(_))));
    }

    #[test]
    fn zero_data_stays_zero() {
        let w1 = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        let s = Solver::new(w1, RadialGrid::new(-5.0, 5.0, 64).unwrap(), 0.9).unwrap();
        let mut st = s.init_state(&InitialData::zero()).unwrap();
        assert!(st.w_curr.iter().chain(&st.w_prev).all(|v| *v == 0.0));
        s.step(&mut st).unwrap();
        assert!(st.w_curr.iter().chain(&st.w_prev).all(|v| *v == 0.0));
    }

    #[test]
    fn taylor_start_matches_dalembert_at_minus_dt() {
        let w1 = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        let data = gaussian_data();
        let mut errs = Vec::new();
        for cells in [512usize, 1024] {
            let s = Solver::new(w1, RadialGrid::new(-10.0, 10.0, cells).unwrap(), 1.0).unwrap();
            let st = s.init_state(&data).unwrap();
            let e = s
                .grid()
                .positions()
                .iter()
                .zip(&st.w_prev)
                .map(|(&x, w)| (w - dalembert(&data.phi, &data.psi, Extension::None, -s.dt(), x)).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        // even data at unit Courant number: the Taylor level is the exact average
        assert!(errs[1] < 1e-14, "{errs:?}");

        // with velocity data the start is third-order accurate
        let data = InitialData::new(RadialProfile::zero(), RadialProfile::gaussian(0.0, 1.0, 1.0).unwrap());
        let mut errs = Vec::new();
        for cells in [256usize, 512, 1024] {
            let s = Solver::new(w1, RadialGrid::new(-10.0, 10.0, cells).unwrap(), 0.5).unwrap();
            let st = s.init_state(&data).unwrap();
            let e = s
                .grid()
                .positions()
                .iter()
                .zip(&st.w_prev)
                .map(|(&x, w)| (w - dalembert(&data.phi, &data.psi, Extension::None, -s.dt(), x)).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let rate = (errs[1] / errs[2]).log2();
        assert!(rate > 2.8, "{errs:?} rate {rate}");
    }

    #[test]
    fn unit_courant_is_exact_in_one_dimension() {
        let w1 = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        let s = Solver::new(w1, RadialGrid::new(-20.0, 20.0, 1024).unwrap(), 1.0).unwrap();
        let data = gaussian_data();
        let mut st = s.init_state(&data).unwrap();
        for _ in 0..4 {
            s.evolve_steps(&mut st, 64).unwrap();
            assert!(max_err_vs_dalembert(&s, &st, &data) < 1e-12);
        }
    }

    #[test]
    fn second_order_convergence_at_half_courant() {
        let w1 = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        let data = gaussian_data();
        let mut errs = Vec::new();
        for cells in [512usize, 1024] {
            let s = Solver::new(w1, RadialGrid::new(-20.0, 20.0, cells).unwrap(), 0.5).unwrap();
            let mut st = s.init_state(&data).unwrap();
            s.evolve_steps(&mut st, steps_to_reach(5.0, s.dt())).unwrap();
            assert_abs_diff_eq!(st.t, 5.0, epsilon = 1e-12);
            errs.push(max_err_vs_dalembert(&s, &st, &data));
        }
        let ratio = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn radial_origin_is_pinned() {
        let e3 = make_scenario(ScenarioKind::EuclideanRadial3D, 0.0).unwrap();
        let s = Solver::new(e3, RadialGrid::new(0.0, 20.0, 512).unwrap(), 0.9).unwrap();
        let data = InitialData::new(RadialProfile::gaussian(5.0, 1.0, 1.0).unwrap(), RadialProfile::zero());
        let mut st = s.init_state(&data).unwrap();
        assert_eq!(st.w_curr[0], 0.0);
        for _ in 0..200 {
            s.step(&mut st).unwrap();
            assert_eq!(st.w_curr[0], 0.0);
        }
    }

    #[test]
    fn hyperbolic_reduced_field_is_free_wave() {
        let h3 = make_scenario(ScenarioKind::HyperbolicRadial3D, 0.0).unwrap();
        let s = Solver::new(h3, RadialGrid::new(0.0, 20.0, 1024).unwrap(), 1.0).unwrap();
        let data = gaussian_data();
        let mut st = s.init_state(&data).unwrap();
        s.evolve_steps(&mut st, 300).unwrap();
        let err = s
            .grid()
            .positions()
            .iter()
            .zip(&st.w_curr)
            .map(|(&x, w)| (w - exact_reduced(&h3, &data, st.t, x).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn instability_is_reported() {
        let nl = make_scenario(ScenarioKind::SemilinearRadial3D, 0.0).unwrap();
        let s = Solver::new(nl, RadialGrid::new(0.0, 10.0, 64).unwrap(), 1.0).unwrap();
        let mut st = s
            .init_state(&InitialData::new(RadialProfile::zero(), RadialProfile::zero()))
            .unwrap();
        st.w_curr[10] = 1e80;
        let mut failure = None;
        for _ in 0..10 {
            if let Err(e) = s.step(&mut st) {
                failure = Some(e);
                break;
            }
        }
        match failure {
            Some(Error::Instability { index, t, .. }) => {
                assert!(index > 0 && t > 0.0);
            }
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn run_records_probes_and_snapshots() {
        let w1 = make_scenario(ScenarioKind::Wave1D, 0.0).unwrap();
        let s = Solver::new(w1, RadialGrid::new(-20.0, 20.0, 1024).unwrap(), 1.0).unwrap();
        let data = gaussian_data();

        let empty = s
            .run(&data, &RunPlan { t_final: 0.0, probes: vec![], state_stride: 10, sample_times: vec![] })
            .unwrap();
        assert_eq!(empty.snapshots.len(), 1);
        assert_eq!(empty.snapshots[0].t, 0.0);

        let plan = RunPlan { t_final: 10.0, probes: vec![8.0], state_stride: 100, sample_times: vec![5.0] };
        let trace = s.run(&data, &plan).unwrap();
        let probe = &trace.probes[0];
        assert!(probe.t.windows(2).all(|w| (w[1] - w[0] - s.dt()).abs() < 1e-12));
        // right-moving half of the pulse arrives at t = xi
        let (k, peak) = probe
            .w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_abs_diff_eq!(*peak, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(probe.t[k], 8.0, epsilon = s.dt());
        assert!(trace.snapshots.iter().any(|sn| (sn.t - 5.0).abs() < s.dt()));
        assert!(trace.snapshot_at(10.0).t >= 10.0 - 1e-12);

        let again = s.run(&data, &plan).unwrap();
        assert_eq!(trace.snapshots, again.snapshots);
        assert_eq!(trace.probes, again.probes);
    }

    #[test]
    fn semilinear_small_amplitude_tracks_linear_run() {
        let nl = make_scenario(ScenarioKind::SemilinearRadial3D, 0.0).unwrap();
        let e3 = make_scenario(ScenarioKind::EuclideanRadial3D, 0.0).unwrap();
        let grid = RadialGrid::new(0.0, 12.0, 1024).unwrap();
        let mut diffs = Vec::new();
        for a in [1e-2, 1e-3] {
            let data = InitialData::new(RadialProfile::gaussian(0.0, 1.0, a).unwrap(), RadialProfile::zero());
            let mut out = Vec::new();
            for sc in [nl, e3] {
                let s = Solver::new(sc, grid, 0.9).unwrap();
                let mut st = s.init_state(&data).unwrap();
                s.evolve_steps(&mut st, steps_to_reach(1.0, s.dt())).unwrap();
                out.push(st.w_curr);
            }
            let d = out[0].iter().zip(&out[1]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            diffs.push(d);
        }
        let exponent = (diffs[0] / diffs[1]).log10();
        assert!((4.8..=5.2).contains(&exponent), "{diffs:?}");
    }


    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn nearest_index_inverts_position(min in -50.0..0.0f64, len in 1.0..100.0f64, cells in 4usize..2000, k in 0usize..2000) {
                let g = RadialGrid::new(min, min + len, cells).unwrap();
                let i = k % g.len();
                prop_assert_eq!(g.nearest_index(g.position(i)).unwrap(), i);
            }

            #[test]
            fn linear_kinds_scale_with_data(a in 0.0..3.0f64, steps in 1u64..60) {
                for kind in [ScenarioKind::Wave1D, ScenarioKind::EuclideanRadial3D, ScenarioKind::HyperbolicRadial3D] {
                    let sc = make_scenario(kind, 0.0).unwrap();
                    let lo = if kind == ScenarioKind::Wave1D { -10.0 } else { 0.0 };
                    let solver = Solver::new(sc, RadialGrid::new(lo, 10.0, 256).unwrap(), 0.9).unwrap();
                    let base = InitialData::new(RadialProfile::gaussian(0.0, 1.0, 1.0).unwrap(), RadialProfile::zero());
                    let scaled = InitialData::new(RadialProfile::gaussian(0.0, 1.0, a).unwrap(), RadialProfile::zero());
                    let mut s1 = solver.init_state(&base).unwrap();
                    let mut s2 = solver.init_state(&scaled).unwrap();
                    solver.evolve_steps(&mut s1, steps).unwrap();
                    solver.evolve_steps(&mut s2, steps).unwrap();
                    for (x, y) in s1.w_curr.iter().zip(&s2.w_curr) {
                        prop_assert!((a * x - y).abs() <= 1e-12 * (1.0 + x.abs()));
                    }
                }
            }
        }
    }
}
