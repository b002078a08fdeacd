//! Parameter sweeps over monotone families, plateau detection and
//! tongue-boundary bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, QpfLift};
use crate::rotnum::{perturb, rational_dependence, Estimator, RationalRelation, RotationEstimate};

/// Parameter name for the vertical perturbation `F_ε`.
pub const EPS_PARAM: &str = "eps";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(param: impl Into<String>, lo: f64, hi: f64, points: usize) -> Self {
        Axis { param: param.into(), lo, hi, points }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::invalid(format!("axis {:?} needs at least 2 points", self.param)));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid(format!("axis {:?} has a degenerate range", self.param)));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub family: FamilySpec,
    /// Vertical shift applied to every lift.
    #[serde(default)]
    pub eps: f64,
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub estimator: Estimator,
}

/// Builds the lift for `family` with the named parameters overridden.
pub fn lift_at(family: &FamilySpec, eps: f64, params: &[(&str, f64)]) -> Result<QpfLift> {
    let mut spec = family.clone();
    let mut shift = eps;
    for &(name, value) in params {
        if name == EPS_PARAM {
            shift = value;
        } else {
            spec.set_param(name, value)?;
        }
    }
    let lift = spec.build()?;
    Ok(if shift == 0.0 { lift } else { perturb(&lift, shift) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub estimate: RotationEstimate,
}

pub fn sweep_1d(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    spec.axis1.validate()?;
    let name = spec.axis1.param.as_str();
    // Fail on unknown parameter names before spending any time.
    lift_at(&spec.family, spec.eps, &[(name, spec.axis1.lo)])?;
    spec.axis1
        .values()
        .into_par_iter()
        .map(|v| {
            let lift = lift_at(&spec.family, spec.eps, &[(name, v)])?;
            Ok(SweepPoint { param: v, estimate: spec.estimator.estimate(&lift)? })
        })
        .collect()
}

/// Dense row-major grid: cell `(i, j)` sits at `i * axis2.points + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub rho: Vec<f64>,
    pub error_radius: Vec<f64>,
}

impl SweepGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.points, self.axis2.points)
    }

    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        let idx = i * self.axis2.points + j;
        (self.rho[idx], self.error_radius[idx])
    }
}

pub fn sweep_2d(spec: &SweepSpec) -> Result<SweepGrid> {
    let axis2 = spec.axis2.as_ref().ok_or_else(|| Error::invalid("2-D sweep needs a second axis"))?;
    spec.axis1.validate()?;
    axis2.validate()?;
    let (n1, n2) = (spec.axis1.points, axis2.points);
    let (p1, p2) = (spec.axis1.param.as_str(), axis2.param.as_str());
    lift_at(&spec.family, spec.eps, &[(p1, spec.axis1.lo), (p2, axis2.lo)])?;
    let cells = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n2, idx % n2);
            let lift = lift_at(&spec.family, spec.eps, &[(p1, spec.axis1.value(i)), (p2, axis2.value(j))])?;
            let est = spec.estimator.estimate(&lift)?;
            Ok((est.value, est.error_radius))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rho, error_radius) = cells.into_iter().unzip();
    Ok(SweepGrid { axis1: spec.axis1.clone(), axis2: axis2.clone(), rho, error_radius })
}

/// Bounds for the rational-dependence witness attached to plateaus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSearch {
    pub tol: f64,
    pub qmax: u32,
    pub pmax: u32,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        WitnessSearch { tol: 1e-5, qmax: 20, pmax: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
    pub value: f64,
    pub error_radius: f64,
    pub witness: Option<RationalRelation>,
    /// Plateau width over `2 × error_radius`.
    pub confidence: f64,
    /// Wider than 3 grid cells yet no rational witness: forbidden for a
    /// genuine plateau of a monotone family.
    pub violation: bool,
}

impl PlateauReport {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Maximal runs of consecutive sweep points whose estimates pairwise agree
/// within their error radii, keeping runs at least `min_width` wide.
///
/// Pairwise agreement of the intervals `[ρ − r, ρ + r]` is equivalent to a
/// common point, so the run grows while `max(ρ − r) ≤ min(ρ + r)`.
pub fn detect_plateaus(
    points: &[SweepPoint],
    min_width: f64,
    omega: f64,
    witness: &WitnessSearch,
) -> Vec<PlateauReport> {
    let cell = if points.len() > 1 {
        (points[points.len() - 1].param - points[0].param) / (points.len() - 1) as f64
    } else {
        0.0
    };
    let mut out = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let mut floor = f64::NEG_INFINITY;
        let mut ceil = f64::INFINITY;
        let mut end = start;
        while end < points.len() {
            let e = &points[end].estimate;
            let f = floor.max(e.value - e.error_radius);
            let c = ceil.min(e.value + e.error_radius);
            if f > c {
                break;
            }
            floor = f;
            ceil = c;
            end += 1;
        }
        let run = &points[start..end];
        let width = run[run.len() - 1].param - run[0].param;
        if run.len() >= 2 && width >= min_width {
            let value = run.iter().map(|p| p.estimate.value).sum::<f64>() / run.len() as f64;
            let error_radius = run.iter().map(|p| p.estimate.error_radius).fold(0.0, f64::max);
            let found = rational_dependence(value, omega, witness.tol, witness.qmax, witness.pmax);
            out.push(PlateauReport {
                lo: run[0].param,
                hi: run[run.len() - 1].param,
                cells: run.len() - 1,
                value,
                error_radius,
                witness: found,
                confidence: width / (2.0 * error_radius),
                violation: found.is_none() && width > 3.0 * cell,
            });
        }
        start = end;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// Where ρ first reaches the target from below.
    Left,
    /// Where ρ leaves the target upward.
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySearch {
    pub family: FamilySpec,
    pub param: String,
    pub target: f64,
    pub lo: f64,
    pub hi: f64,
    pub edge: Edge,
    pub tol: f64,
    pub estimator: Estimator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub value: f64,
    /// Final bracket, of width at most `tol`.
    pub bracket: (f64, f64),
    pub steps: usize,
}

/// Bisection for a plateau edge of a monotone response.
///
/// Right edge: `τ* = sup{τ : ρ(τ) ≤ target + 2r}`; left edge:
/// `τ* = inf{τ : ρ(τ) ≥ target − 2r}`, with `r` the estimate's error radius.
/// On a strictly monotone response both reduce to the crossing point.
pub fn tongue_boundary(search: &BoundarySearch) -> Result<Boundary> {
    if !(search.tol > 0.0) || !(search.lo < search.hi) {
        return Err(Error::invalid("boundary search needs lo < hi and tol > 0"));
    }
    let rho_at = |v: f64| -> Result<RotationEstimate> {
        let lift = lift_at(&search.family, 0.0, &[(search.param.as_str(), v)])?;
        search.estimator.estimate(&lift)
    };
    // `ahead(v)`: v is on the far side of the edge.
    let ahead = |v: f64| -> Result<bool> {
        let est = rho_at(v)?;
        Ok(match search.edge {
            Edge::Right => est.value > search.target + 2.0 * est.error_radius,
            Edge::Left => est.value >= search.target - 2.0 * est.error_radius,
        })
    };
    let (mut lo, mut hi) = (search.lo, search.hi);
    if ahead(lo)? || !ahead(hi)? {
        return Err(Error::BracketInvalid { lo, hi });
    }
    let mut steps = 0;
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ahead(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    Ok(Boundary { value: 0.5 * (lo + hi), bracket: (lo, hi), steps })
}
