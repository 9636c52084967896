//! Energy accounting: densities, totals, cone-restricted energies, the
//! equipartition gap, unitarity defect and the cone-limit conditions.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{RadialGrid, Snapshot, Trace};
use crate::geometry::{PointGeometry, Scenario, ScenarioKind};
use crate::numerics::{derivative_2nd_order, trapezoid};
use crate::radiation::AngularAggregate;

/// Plateau test for the running radiation integral: relative increase over
/// the last tenth of the `s`-range.
pub const PLATEAU_INCREMENT: f64 = 1e-4;

/// Default relative tolerance on the cone-limit conditions at the final time.
pub const PROP_TOLERANCE: f64 = 1e-2;

/// Default tolerance on the unitarity defect.
pub const DEFECT_TOLERANCE: f64 = 1e-3;

/// Below this fraction of the total energy, cone differences count as
/// converged when judging whether they decrease in `T`.
pub const PROP_NOISE_FLOOR: f64 = 1e-4;

/// Energy densities per unit `xi`, with the volume weight included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyDensityField {
    pub t: f64,
    pub xi: Vec<f64>,
    pub e_k: Vec<f64>,
    /// Potential density; includes the sextic term on the semilinear kind.
    pub e_p: Vec<f64>,
    /// The sextic part `(1/6)|u|^6` of `e_p` (zero for linear kinds).
    pub e_nl: Vec<f64>,
    spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTotals {
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub nonlinear: f64,
}

impl EnergyTotals {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }

    pub fn gap(&self) -> f64 {
        self.kinetic - self.potential
    }

    /// `int |u_t|^2 - |grad u|^2`, i.e. twice the gap without the sextic term.
    pub fn classical_gap(&self) -> f64 {
        2.0 * (self.kinetic - (self.potential - self.nonlinear))
    }
}

impl EnergyDensityField {
    pub fn totals(&self) -> EnergyTotals {
        EnergyTotals {
            t: self.t,
            kinetic: trapezoid(&self.e_k, self.spacing),
            potential: trapezoid(&self.e_p, self.spacing),
            nonlinear: trapezoid(&self.e_nl, self.spacing),
        }
    }
}

/// Densities from a snapshot. `u = w / rho`, `u_t = w_t / rho` and
/// `u_xi = (w_xi - u rho') / rho`; points with `rho = 0` carry zero weight.
pub fn energy_densities(scenario: &Scenario, grid: &RadialGrid, snap: &Snapshot) -> EnergyDensityField {
    let points: Vec<PointGeometry> = grid.positions().into_iter().map(|x| scenario.point(x)).collect();
    densities_on(scenario, grid, &points, snap)
}

fn densities_on(
    scenario: &Scenario,
    grid: &RadialGrid,
    points: &[PointGeometry],
    snap: &Snapshot,
) -> EnergyDensityField {
    let h = grid.spacing();
    let n = grid.len();
    let w_xi = derivative_2nd_order(&snap.w, h);
    let kind = scenario.kind();
    let mut e_k = vec![0.0; n];
    let mut e_p = vec![0.0; n];
    let mut e_nl = vec![0.0; n];
    let mut xi = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.position(i);
        xi.push(x);
        if kind == ScenarioKind::Wave1D {
            e_k[i] = 0.5 * snap.w_t[i] * snap.w_t[i];
            e_p[i] = 0.5 * w_xi[i] * w_xi[i];
            continue;
        }
        let p = &points[i];
        if p.rho == 0.0 {
            continue;
        }
        let weight = 4.0 * PI * p.rho * p.rho;
        let u = snap.w[i] / p.rho;
        let u_t = snap.w_t[i] / p.rho;
        let u_x = (w_xi[i] - u * p.drho) / p.rho;
        e_k[i] = 0.5 * weight * u_t * u_t;
        e_p[i] = 0.5 * weight * u_x * u_x;
        match kind {
            ScenarioKind::HyperbolicRadial3D => e_p[i] -= 0.5 * weight * u * u,
            ScenarioKind::SemilinearRadial3D => {
                e_nl[i] = weight * u.powi(6) / 6.0;
                e_p[i] += e_nl[i];
            }
            _ => {}
        }
    }
    EnergyDensityField {
        t: snap.t,
        xi,
        e_k,
        e_p,
        e_nl,
        spacing: h,
    }
}

/// Kinetic and potential energy inside and outside `{s(t, xi) <= lambda}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSplit {
    pub kinetic_in: f64,
    pub potential_in: f64,
    pub kinetic_out: f64,
    pub potential_out: f64,
}

impl ConeSplit {
    pub fn tail(&self) -> f64 {
        self.kinetic_out + self.potential_out
    }
}

/// Trapezoid integral of a linear piece split at the level `lambda` of a
/// linear `s`; returns `(part with s <= lambda, part with s > lambda)`.
fn split_piece(dx: f64, f: (f64, f64), s: (f64, f64), lambda: f64) -> (f64, f64) {
    let full = 0.5 * dx * (f.0 + f.1);
    let in0 = s.0 <= lambda;
    let in1 = s.1 <= lambda;
    match (in0, in1) {
        (true, true) => (full, 0.0),
        (false, false) => (0.0, full),
        _ => {
            let theta = (lambda - s.0) / (s.1 - s.0);
            let fc = f.0 + theta * (f.1 - f.0);
            let left = 0.5 * theta * dx * (f.0 + fc);
            let right = 0.5 * (1.0 - theta) * dx * (fc + f.1);
            if in0 {
                (left, right)
            } else {
                (right, left)
            }
        }
    }
}

/// Split the energy of `field` at the cone level `lambda`, with the boundary
/// cell divided linearly at `s = lambda`.
pub fn cone_split(scenario: &Scenario, field: &EnergyDensityField, lambda: f64) -> ConeSplit {
    let t = field.t;
    let s_of = |x: f64| scenario.region_cone_coordinate(t, x);
    let mut out = ConeSplit {
        kinetic_in: 0.0,
        potential_in: 0.0,
        kinetic_out: 0.0,
        potential_out: 0.0,
    };
    let mut add = |dx: f64, k: (f64, f64), p: (f64, f64), s: (f64, f64)| {
        let (ki, ko) = split_piece(dx, k, s, lambda);
        let (pi, po) = split_piece(dx, p, s, lambda);
        out.kinetic_in += ki;
        out.kinetic_out += ko;
        out.potential_in += pi;
        out.potential_out += po;
    };
    let two_ended = scenario.kind().is_two_ended();
    for i in 0..field.xi.len().saturating_sub(1) {
        let (x0, x1) = (field.xi[i], field.xi[i + 1]);
        let k = (field.e_k[i], field.e_k[i + 1]);
        let p = (field.e_p[i], field.e_p[i + 1]);
        if two_ended && x0 < 0.0 && x1 > 0.0 {
            // s = t - |xi| has its kink inside this cell
            let theta = -x0 / (x1 - x0);
            let km = k.0 + theta * (k.1 - k.0);
            let pm = p.0 + theta * (p.1 - p.0);
            add(-x0, (k.0, km), (p.0, pm), (s_of(x0), t));
            add(x1, (km, k.1), (pm, p.1), (t, s_of(x1)));
        } else {
            add(x1 - x0, k, p, (s_of(x0), s_of(x1)));
        }
    }
    out
}

/// `(E_K(lambda, t), E_P(lambda, t))`.
pub fn cone_energies(scenario: &Scenario, field: &EnergyDensityField, lambda: f64) -> (f64, f64) {
    let c = cone_split(scenario, field, lambda);
    (c.kinetic_in, c.potential_in)
}

/// Energy over `{s(t, xi) > lambda}`.
pub fn tail_energy(scenario: &Scenario, field: &EnergyDensityField, lambda: f64) -> f64 {
    cone_split(scenario, field, lambda).tail()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeEntry {
    pub lambda: f64,
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub tail: f64,
}

/// Energy time series plus cone partial energies at the sample times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub scenario: Scenario,
    pub dt: f64,
    pub totals: Vec<EnergyTotals>,
    pub cones: Vec<ConeEntry>,
}

impl EnergyLedger {
    /// Totals at every snapshot of `trace`, cones at the snapshot reached
    /// first at or after each of `cone_times`.
    pub fn from_trace(trace: &Trace, lambdas: &[f64], cone_times: &[f64]) -> Result<Self> {
        let sc = &trace.scenario;
        let last = trace.snapshots.last().map_or(0.0, |s| s.t);
        let tol = 1e-9 * trace.dt;
        let points: Vec<PointGeometry> = trace.grid.positions().into_iter().map(|x| sc.point(x)).collect();
        let totals = trace
            .snapshots
            .iter()
            .map(|s| densities_on(sc, &trace.grid, &points, s).totals())
            .collect();
        let mut cones = Vec::new();
        for &t in cone_times {
            if t > last + tol {
                return Err(Error::Diagnostics(format!(
                    "sample time {t} lies beyond the run (last snapshot at {last})"
                )));
            }
            let field = densities_on(sc, &trace.grid, &points, trace.snapshot_at(t));
            for &lambda in lambdas {
                let c = cone_split(sc, &field, lambda);
                cones.push(ConeEntry {
                    lambda,
                    t,
                    kinetic: c.kinetic_in,
                    potential: c.potential_in,
                    tail: c.tail(),
                });
            }
        }
        Ok(Self {
            scenario: *sc,
            dt: trace.dt,
            totals,
            cones,
        })
    }

    pub fn initial_energy(&self) -> f64 {
        self.totals.first().map_or(0.0, EnergyTotals::total)
    }

    /// Totals at the first recorded time at or after `t`.
    pub fn at(&self, t: f64) -> Result<&EnergyTotals> {
        let tol = 1e-9 * self.dt;
        self.totals.iter().find(|e| e.t >= t - tol).ok_or_else(|| {
            Error::Diagnostics(format!("time {t} lies beyond the energy ledger"))
        })
    }

    pub fn cone(&self, lambda: f64, t: f64) -> Option<&ConeEntry> {
        self.cones.iter().find(|c| c.lambda == lambda && c.t == t)
    }

    /// `max_t |E(t) - E(0)| / E(0)` (0 for zero data).
    pub fn max_drift(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            return 0.0;
        }
        self.totals
            .iter()
            .map(|e| (e.total() - e0).abs() / e0)
            .fold(0.0, f64::max)
    }
}

/// `E_K(t) - E_P(t)`.
pub fn equipartition_gap(ledger: &EnergyLedger, t: f64) -> Result<f64> {
    Ok(ledger.at(t)?.gap())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitarityReport {
    pub initial_energy: f64,
    pub norm_sq: f64,
    pub defect: f64,
    /// Relative growth of the running integral over the last tenth of the `s`-range.
    pub plateau_increment: f64,
    pub plateau: bool,
    pub zero_energy: bool,
}

/// `|E(0) - ||F||^2| / E(0)`, with a plateau check on the running integral.
pub fn unitarity_defect(ledger: &EnergyLedger, agg: &AngularAggregate) -> UnitarityReport {
    let e0 = ledger.initial_energy();
    let norm = agg.norm_sq();
    let zero_energy = e0 == 0.0;
    let defect = if zero_energy {
        if norm == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (e0 - norm).abs() / e0
    };
    let n = agg.cumulative.len();
    let plateau_increment = if n < 2 || norm == 0.0 {
        0.0
    } else {
        let s_last = agg.s_at(n - 1);
        let s_cut = s_last - 0.1 * (s_last - agg.s_start);
        (norm - agg.cumulative_at(s_cut)) / norm
    };
    UnitarityReport {
        initial_energy: e0,
        norm_sq: norm,
        defect,
        plateau_increment,
        plateau: plateau_increment < PLATEAU_INCREMENT,
        zero_energy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropRow {
    pub lambda: f64,
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub half_cumulative: f64,
    pub kinetic_diff: f64,
    pub potential_diff: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropSummary {
    pub lambda: f64,
    pub kinetic_decreasing: bool,
    pub potential_decreasing: bool,
    /// Differences at the last time, relative to `E(0)`.
    pub kinetic_final: f64,
    pub potential_final: f64,
    /// `max(dK, dP, ||F||^2 - cumulative(lambda)) / E(0)` at the last time.
    pub epsilon: f64,
    /// Tail energy at the last time, relative to `E(0)`.
    pub tail_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropReport {
    pub times: Vec<f64>,
    pub rows: Vec<PropRow>,
    pub summaries: Vec<PropSummary>,
    pub unitarity: UnitarityReport,
    pub tolerance: f64,
    pub defect_tolerance: f64,
    pub noise_floor: f64,
    pub limits_pass: bool,
    pub defect_pass: bool,
    pub pass: bool,
}

fn decreasing(seq: &[f64], floor: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor)
}

/// Compare cone energies with half the running radiation integral at each
/// `lambda` over the ledger's cone times.
pub fn check_prop_conditions(
    ledger: &EnergyLedger,
    agg: &AngularAggregate,
    lambdas: &[f64],
    support_radius: f64,
    tolerance: f64,
    defect_tolerance: f64,
) -> Result<PropReport> {
    let mut times: Vec<f64> = Vec::new();
    for c in &ledger.cones {
        if !times.contains(&c.t) {
            times.push(c.t);
        }
    }
    times.sort_by(f64::total_cmp);
    if times.len() < 3 {
        return Err(Error::Diagnostics(format!(
            "need at least 3 sample times, got {}",
            times.len()
        )));
    }
    let max_lambda = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_max = *times.last().expect("nonempty");
    let needed = 2.0 * (support_radius + max_lambda.max(0.0));
    if t_max < needed {
        return Err(Error::Diagnostics(format!(
            "largest sample time {t_max} is below 2 (R + max lambda) = {needed}"
        )));
    }
    let e0 = ledger.initial_energy();
    let rel = |x: f64| if e0 == 0.0 { if x == 0.0 { 0.0 } else { f64::INFINITY } } else { x / e0 };
    let floor = PROP_NOISE_FLOOR * e0;
    let norm = agg.norm_sq();

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &lambda in lambdas {
        let half = 0.5 * agg.cumulative_at(lambda);
        let mut dk = Vec::new();
        let mut dp = Vec::new();
        for &t in &times {
            let c = ledger.cone(lambda, t).ok_or_else(|| {
                Error::Diagnostics(format!("no cone energies for lambda = {lambda}, T = {t}"))
            })?;
            let row = PropRow {
                lambda,
                t,
                kinetic: c.kinetic,
                potential: c.potential,
                half_cumulative: half,
                kinetic_diff: (c.kinetic - half).abs(),
                potential_diff: (c.potential - half).abs(),
                tail: c.tail,
            };
            dk.push(row.kinetic_diff);
            dp.push(row.potential_diff);
            rows.push(row);
        }
        let last = rows.last().expect("nonempty");
        let missing = (norm - 2.0 * half).max(0.0);
        summaries.push(PropSummary {
            lambda,
            kinetic_decreasing: decreasing(&dk, floor),
            potential_decreasing: decreasing(&dp, floor),
            kinetic_final: rel(last.kinetic_diff),
            potential_final: rel(last.potential_diff),
            epsilon: rel(last.kinetic_diff.max(last.potential_diff).max(missing)),
            tail_final: rel(last.tail),
        });
    }
    let unitarity = unitarity_defect(ledger, agg);
    let limits_pass = summaries.iter().all(|s| {
        s.kinetic_decreasing
            && s.potential_decreasing
            && s.kinetic_final <= tolerance
            && s.potential_final <= tolerance
    });
    let defect_pass = unitarity.defect <= defect_tolerance;
    Ok(PropReport {
        times,
        rows,
        summaries,
        unitarity,
        tolerance,
        defect_tolerance,
        noise_floor: PROP_NOISE_FLOOR,
        limits_pass,
        defect_pass,
        pass: limits_pass && defect_pass,
    })
}
