//! Graphs over the circle, invariant strips and curve iteration.
//!
//! A [`GraphOverTheta`] samples a function `φ: 𝕋¹ → ℝ` on the uniform grid
//! `θ_i = i/N` and interpolates linearly (and periodically) in between. Only
//! graphs of homotopy type (1, 0) are handled: `φ(θ + 1) = φ(θ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{interpolate_periodic, QpfLift};

pub const DEFAULT_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphOverTheta {
    values: Vec<f64>,
}

impl GraphOverTheta {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a graph needs at least one sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("graph samples must be finite"));
        }
        Ok(GraphOverTheta { values })
    }

    pub fn constant(grid: usize, c: f64) -> Self {
        assert!(grid > 0 && c.is_finite());
        GraphOverTheta { values: vec![c; grid] }
    }

    pub fn from_fn(grid: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..grid).map(|i| f(i as f64 / grid as f64)).collect())
    }

    /// Upper and lower hulls of an orbit: per grid cell `[i/N, (i+1)/N)` the
    /// max and min of the sampled fiber coordinates. Empty cells take the
    /// value of the nearest filled cell to the left (cyclically).
    pub fn orbit_hulls(grid: usize, samples: &[(f64, f64)]) -> Result<(Self, Self)> {
        let mut hi = vec![f64::NEG_INFINITY; grid];
        let mut lo = vec![f64::INFINITY; grid];
        for &(theta, x) in samples {
            let i = ((crate::families::frac(theta) * grid as f64) as usize).min(grid - 1);
            hi[i] = hi[i].max(x);
            lo[i] = lo[i].min(x);
        }
        let Some(first) = hi.iter().position(|v| v.is_finite()) else {
            return Err(Error::invalid("no orbit samples"));
        };
        for step in 1..grid {
            let i = (first + step) % grid;
            let prev = (i + grid - 1) % grid;
            if !hi[i].is_finite() {
                hi[i] = hi[prev];
                lo[i] = lo[prev];
            }
        }
        Ok((GraphOverTheta { values: lo }, GraphOverTheta { values: hi }))
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn theta(&self, i: usize) -> f64 {
        i as f64 / self.values.len() as f64
    }

    /// Linear interpolation; returns the sample exactly at grid points.
    pub fn eval(&self, theta: f64) -> f64 {
        interpolate_periodic(&self.values, theta)
    }

    /// Resamples onto a grid of `grid` points by interpolation.
    pub fn resample(&self, grid: usize) -> Self {
        GraphOverTheta { values: (0..grid).map(|i| self.eval(i as f64 / grid as f64)).collect() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        GraphOverTheta { values: self.values.iter().map(|v| v + c).collect() }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid_size() == other.grid_size() {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.grid_size(), other.grid_size()))
        }
    }

    /// Pointwise `self ≤ other` on the grid.
    pub fn le(&self, other: &Self) -> Result<bool> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    /// `max_i |self_i − other_i|`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    fn window_extreme(values: &[f64], radius: usize, pick: fn(f64, f64) -> f64) -> Vec<f64> {
        let n = values.len();
        (0..n)
            .map(|i| {
                (1..=radius.min(n))
                    .fold(values[i], |acc, r| pick(pick(acc, values[(i + r) % n]), values[(i + n - r % n) % n]))
            })
            .collect()
    }
}

/// Discrete upper-semicontinuous hull: max over a window of `radius` cells
/// followed by min over the same window (a morphological closing).
///
/// The result dominates the input, fills narrow downward dips, keeps upward
/// spikes, and is idempotent at fixed radius.
pub fn usc_envelope(phi: &GraphOverTheta, radius: usize) -> GraphOverTheta {
    let dilated = GraphOverTheta::window_extreme(&phi.values, radius, f64::max);
    GraphOverTheta { values: GraphOverTheta::window_extreme(&dilated, radius, f64::min) }
}

/// Discrete lower-semicontinuous hull (morphological opening); dual of
/// [`usc_envelope`]. Removes narrow upward spikes.
pub fn lsc_envelope(phi: &GraphOverTheta, radius: usize) -> GraphOverTheta {
    let eroded = GraphOverTheta::window_extreme(&phi.values, radius, f64::min);
    GraphOverTheta { values: GraphOverTheta::window_extreme(&eroded, radius, f64::max) }
}

/// Image of a graph under the skew product: `(Fγ)(θ) = F_{θ−ω}(γ(θ−ω))`.
pub fn push_graph(lift: &QpfLift, gamma: &GraphOverTheta) -> GraphOverTheta {
    let n = gamma.grid_size();
    let omega = lift.omega();
    let values = (0..n)
        .map(|i| {
            let pre = i as f64 / n as f64 - omega;
            lift.eval(crate::families::frac(pre), gamma.eval(pre))
        })
        .collect();
    GraphOverTheta { values }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationStatus {
    Converged,
    MaxIter,
    NotMonotone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphIteration {
    pub graph: GraphOverTheta,
    pub status: IterationStatus,
    /// Pushes performed before the update fell below tolerance.
    pub steps: usize,
    /// +1 for an increasing sequence, −1 for decreasing, 0 if neither.
    pub direction: i8,
    /// Average vertical drift per push, `(mean γ_n − mean γ_0)/n`.
    pub growth_rate: f64,
    pub last_update: f64,
}

/// Iterates `γ_{n+1} = Fγ_n` from `gamma0`.
///
/// If `Fγ₀ ≥ γ₀` (or `≤`) pointwise, fiber monotonicity makes the whole
/// sequence monotone, and a bounded sequence converges to an invariant
/// graph. The limit is declared once `sup|γ_{n+1} − γ_n| < tol`.
pub fn iterate_graph_to_limit(
    lift: &QpfLift,
    gamma0: &GraphOverTheta,
    tol: f64,
    n_max: usize,
) -> Result<GraphIteration> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut current = gamma0.clone();
    let mut next = push_graph(lift, &current);
    let up = current.le(&next)?;
    let down = next.le(&current)?;
    let direction = match (up, down) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    };
    let mut last_update = next.sup_distance(&current)?;
    if last_update < tol {
        return Ok(GraphIteration {
            growth_rate: next.mean() - gamma0.mean(),
            graph: next,
            status: IterationStatus::Converged,
            steps: 0,
            direction,
            last_update,
        });
    }
    if !(up || down) {
        return Ok(GraphIteration {
            graph: next,
            status: IterationStatus::NotMonotone,
            steps: 1,
            direction,
            growth_rate: f64::NAN,
            last_update,
        });
    }
    for step in 1..=n_max {
        current = next;
        next = push_graph(lift, &current);
        last_update = next.sup_distance(&current)?;
        if last_update < tol {
            return Ok(GraphIteration {
                growth_rate: (next.mean() - gamma0.mean()) / (step + 1) as f64,
                graph: next,
                status: IterationStatus::Converged,
                steps: step,
                direction,
                last_update,
            });
        }
    }
    Ok(GraphIteration {
        growth_rate: (next.mean() - gamma0.mean()) / (n_max + 1) as f64,
        graph: next,
        status: IterationStatus::MaxIter,
        steps: n_max,
        direction,
        last_update,
    })
}

/// A pair of bounding graphs `φ⁻ ≤ φ⁺`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    lower: GraphOverTheta,
    upper: GraphOverTheta,
}

impl Strip {
    pub fn new(lower: GraphOverTheta, upper: GraphOverTheta) -> Result<Self> {
        if !lower.le(&upper)? {
            return Err(Error::invalid("strip lower graph exceeds upper graph"));
        }
        Ok(Strip { lower, upper })
    }

    pub fn curve(graph: GraphOverTheta) -> Self {
        Strip { lower: graph.clone(), upper: graph }
    }

    pub fn lower(&self) -> &GraphOverTheta {
        &self.lower
    }

    pub fn upper(&self) -> &GraphOverTheta {
        &self.upper
    }

    pub fn width(&self) -> Vec<f64> {
        self.upper.values.iter().zip(&self.lower.values).map(|(u, l)| u - l).collect()
    }

    /// Grid-level minimality check: `(φ⁺)⁻ = φ⁻` and `(φ⁻)⁺ = φ⁺` up to
    /// `tol`, with the hulls taken at `radius` cells.
    pub fn is_minimal_at(&self, radius: usize, tol: f64) -> bool {
        let lower_ok = lsc_envelope(&self.upper, radius).sup_distance(&self.lower).is_ok_and(|d| d <= tol);
        let upper_ok = usc_envelope(&self.lower, radius).sup_distance(&self.upper).is_ok_and(|d| d <= tol);
        lower_ok && upper_ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripOrder {
    /// `A ≺ B`: `φ⁺_A < φ⁻_B` everywhere.
    Prec,
    /// `A ≼ B`: `φ⁻_A ≤ φ⁻_B` and `φ⁺_A ≤ φ⁺_B` everywhere.
    Precsim,
    Incomparable,
}

pub fn strip_order(a: &Strip, b: &Strip) -> Result<StripOrder> {
    a.lower.check_grid(&b.lower)?;
    let below = a.upper.values.iter().zip(&b.lower.values).all(|(u, l)| u < l);
    if below {
        return Ok(StripOrder::Prec);
    }
    if a.lower.le(&b.lower)? && a.upper.le(&b.upper)? {
        Ok(StripOrder::Precsim)
    } else {
        Ok(StripOrder::Incomparable)
    }
}

/// `D(A, B) = min_θ (φ⁻_B(θ) − φ⁺_A(θ))`; positive iff `A ≺ B`.
pub fn strip_gap(a: &Strip, b: &Strip) -> Result<f64> {
    a.lower.check_grid(&b.lower)?;
    Ok(b.lower.values.iter().zip(&a.upper.values).map(|(l, u)| l - u).fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchMeasure {
    pub min_width: f64,
    pub theta: f64,
}

impl PinchMeasure {
    pub fn is_pinched(&self, pinch_tol: f64) -> bool {
        self.min_width <= pinch_tol
    }
}

pub fn pinch_measure(strip: &Strip) -> PinchMeasure {
    let (i, w) = strip
        .width()
        .into_iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, w)| if w < best.1 { (i, w) } else { best });
    PinchMeasure { min_width: w, theta: strip.lower.theta(i) }
}

/// Settings for [`annulus_witness`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSearch {
    /// Constant seed curves at heights `j / candidates`.
    pub candidates: usize,
    pub grid: usize,
    pub max_iter: usize,
    pub strict_tol: f64,
}

impl Default for AnnulusSearch {
    fn default() -> Self {
        AnnulusSearch { candidates: 64, grid: DEFAULT_GRID, max_iter: 200, strict_tol: 1e-9 }
    }
}

/// Two constant curves `γ⁻ < γ⁺ < γ⁻ + 1` with `F^N γ⁺ < γ⁺` and
/// `F^N γ⁻ > γ⁻` strictly, bounding an annulus mapped into its interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusWitness {
    pub upper_height: f64,
    pub lower_height: f64,
    pub iterate: usize,
    /// `−max_θ (F^N γ⁺ − γ⁺)` on the verification grid.
    pub upper_margin: f64,
    /// `min_θ (F^N γ⁻ − γ⁻)` on the verification grid.
    pub lower_margin: f64,
    pub verified_grid: usize,
}

impl AnnulusWitness {
    pub fn upper(&self, grid: usize) -> GraphOverTheta {
        GraphOverTheta::constant(grid, self.upper_height)
    }

    pub fn lower(&self, grid: usize) -> GraphOverTheta {
        GraphOverTheta::constant(grid, self.lower_height)
    }
}

/// `F^N` applied to the constant curve at height `c`, evaluated exactly on
/// `grid` points by running each fiber's orbit from `θ_i − Nω`.
pub fn push_constant_exact(lift: &QpfLift, c: f64, iterate: usize, grid: usize) -> Result<GraphOverTheta> {
    let back = crate::families::frac(-(iterate as f64) * lift.omega());
    let values = (0..grid)
        .into_par_iter()
        .map(|i| {
            let theta0 = crate::families::frac(i as f64 / grid as f64 + back);
            lift.advance(theta0, c, iterate as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    GraphOverTheta::new(values)
}

/// Margins `(−max(F^N γ⁺ − γ⁺), min(F^N γ⁻ − γ⁻))` on `grid` points.
pub fn witness_margins(
    lift: &QpfLift,
    upper_height: f64,
    lower_height: f64,
    iterate: usize,
    grid: usize,
) -> Result<(f64, f64)> {
    let up = push_constant_exact(lift, upper_height, iterate, grid)?;
    let down = push_constant_exact(lift, lower_height, iterate, grid)?;
    let upper_margin = up.values.iter().map(|v| upper_height - v).fold(f64::INFINITY, f64::min);
    let lower_margin = down.values.iter().map(|v| v - lower_height).fold(f64::INFINITY, f64::min);
    Ok((upper_margin, lower_margin))
}

/// Searches constant curves for a pair bounding an annulus that some
/// iterate maps into its own interior.
///
/// Candidates are pushed together with [`push_graph`]; at the first iterate
/// where one curve is mapped strictly below itself and another strictly
/// above itself, the best-margin pair is re-checked with exact orbits on the
/// doubled grid. Returns `None` when no iterate up to `max_iter` produces a
/// verified pair.
pub fn annulus_witness(lift: &QpfLift, search: &AnnulusSearch) -> Result<Option<AnnulusWitness>> {
    if search.candidates == 0 || search.grid == 0 || !(search.strict_tol > 0.0) {
        return Err(Error::invalid("annulus search needs candidates, a grid and a positive tolerance"));
    }
    let heights: Vec<f64> = (0..search.candidates).map(|j| j as f64 / search.candidates as f64).collect();
    let mut curves: Vec<GraphOverTheta> = heights.iter().map(|&c| GraphOverTheta::constant(search.grid, c)).collect();

    for iterate in 1..=search.max_iter {
        curves = curves.par_iter().map(|g| push_graph(lift, g)).collect();
        let margins: Vec<(f64, f64)> = curves
            .iter()
            .zip(&heights)
            .map(|(g, &c)| {
                let (lo, hi) =
                    g.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
                (c - hi, lo - c)
            })
            .collect();
        let best = |pick: fn(&(f64, f64)) -> f64| {
            margins.iter().enumerate().filter(|(_, m)| pick(m) > search.strict_tol).fold(
                None,
                |acc: Option<(usize, f64)>, (j, m)| match acc {
                    Some((_, v)) if v >= pick(m) => acc,
                    _ => Some((j, pick(m))),
                },
            )
        };
        let (Some((j_up, _)), Some((j_down, _))) = (best(|m| m.0), best(|m| m.1)) else {
            continue;
        };
        let upper_height = heights[j_up];
        let mut lower_height = heights[j_down];
        if lower_height >= upper_height {
            lower_height -= 1.0;
        }
        let verified_grid = 2 * search.grid;
        let (upper_margin, lower_margin) = witness_margins(lift, upper_height, lower_height, iterate, verified_grid)?;
        if upper_margin > search.strict_tol && lower_margin > search.strict_tol {
            return Ok(Some(AnnulusWitness {
                upper_height,
                lower_height,
                iterate,
                upper_margin,
                lower_margin,
                verified_grid,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_arnold, make_translation, ArnoldParams, GOLDEN_MEAN};
    use std::f64::consts::PI;

    fn arnold(alpha: f64, tau: f64, beta: f64) -> QpfLift {
        make_arnold(ArnoldParams::with_cosine(alpha, tau, beta).unwrap(), GOLDEN_MEAN).unwrap()
    }

    fn spike(n: usize, at: usize, h: f64) -> GraphOverTheta {
        let mut v = vec![0.0; n];
        v[at] = h;
        GraphOverTheta::new(v).unwrap()
    }

    #[test]
    fn evaluation_hits_samples() {
        let g = GraphOverTheta::from_fn(8, |t| (2.0 * PI * t).sin()).unwrap();
        for i in 0..8 {
            assert_eq!(g.eval(i as f64 / 8.0), g.values()[i]);
        }
        assert_eq!(g.eval(1.0), g.values()[0]);
        assert!(GraphOverTheta::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn envelopes_of_constant() {
        let g = GraphOverTheta::constant(16, 2.5);
        assert_eq!(usc_envelope(&g, 1), g);
        assert_eq!(lsc_envelope(&g, 3), g);
    }

    #[test]
    fn envelopes_of_spike() {
        let g = spike(16, 5, 1.0);
        assert_eq!(usc_envelope(&g, 1), g);
        assert_eq!(lsc_envelope(&g, 1), GraphOverTheta::constant(16, 0.0));
        let dip = spike(16, 5, -1.0);
        assert_eq!(usc_envelope(&dip, 1), GraphOverTheta::constant(16, 0.0));
        assert_eq!(lsc_envelope(&dip, 1), dip);
    }

    #[test]
    fn envelopes_sandwich_orbit_samples() {
        let f = arnold(0.9, 0.0, 0.05);
        let orbit = crate::families::iterate(&f, (0.0, 0.3), 100_000);
        let tail: Vec<(f64, f64)> = orbit.samples[1000..].iter().map(|&(t, x)| (t, x - x.floor())).collect();
        let (lo, hi) = GraphOverTheta::orbit_hulls(512, &tail).unwrap();
        let lo = lsc_envelope(&lo, 1);
        let hi = usc_envelope(&hi, 1);
        for &(t, x) in &tail {
            let i = ((t * 512.0) as usize).min(511);
            assert!(lo.values()[i] <= x && x <= hi.values()[i]);
        }
    }

    #[test]
    fn push_translation_constant() {
        let f = make_translation(0.3, GOLDEN_MEAN);
        let g = push_graph(&f, &GraphOverTheta::constant(64, 1.0));
        assert_eq!(g, GraphOverTheta::constant(64, 1.3));
    }

    #[test]
    fn translation_curve_drifts() {
        let f = make_translation(0.25, GOLDEN_MEAN);
        let it = iterate_graph_to_limit(&f, &GraphOverTheta::constant(32, 0.0), 1e-9, 100).unwrap();
        assert_eq!(it.status, IterationStatus::MaxIter);
        assert_eq!(it.direction, 1);
        assert!((it.growth_rate - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fixed_curve_converges_immediately() {
        // x* = 1/2 is fixed by x + (α/2π) sin 2πx for every fiber.
        let f = arnold(0.9, 0.0, 0.0);
        let it = iterate_graph_to_limit(&f, &GraphOverTheta::constant(64, 0.5), 1e-12, 10).unwrap();
        assert_eq!(it.status, IterationStatus::Converged);
        assert_eq!(it.steps, 0);
    }

    #[test]
    fn locked_map_converges_from_far_below() {
        let f = arnold(0.9, 0.0, 0.05);
        let it = iterate_graph_to_limit(&f, &GraphOverTheta::constant(1024, -10.3), 1e-12, 500).unwrap();
        assert_eq!(it.status, IterationStatus::Converged);
        // The attracting curve near x = 1/2 (mod 1) lies below the start.
        assert_eq!(it.direction, -1);
        let again = push_graph(&f, &it.graph);
        assert!(again.sup_distance(&it.graph).unwrap() < 1e-11);
        assert!(it.graph.values().iter().all(|&v| (v + 10.5).abs() < 0.1));
    }

    #[test]
    fn crossing_start_is_not_monotone() {
        let f = arnold(0.9, 0.0, 0.0);
        let g = GraphOverTheta::from_fn(64, |t| 0.5 + 0.4 * (2.0 * PI * t).sin()).unwrap();
        let it = iterate_graph_to_limit(&f, &g, 1e-9, 10).unwrap();
        assert_eq!(it.status, IterationStatus::NotMonotone);
    }

    fn constant_strip(lo: f64, hi: f64) -> Strip {
        Strip::new(GraphOverTheta::constant(8, lo), GraphOverTheta::constant(8, hi)).unwrap()
    }

    #[test]
    fn strip_ordering_examples() {
        let a = constant_strip(0.0, 1.0);
        let b = constant_strip(2.0, 3.0);
        assert_eq!(strip_order(&a, &b).unwrap(), StripOrder::Prec);
        assert_eq!(strip_gap(&a, &b).unwrap(), 1.0);
        assert_eq!(strip_order(&a, &a).unwrap(), StripOrder::Precsim);
        assert_eq!(strip_gap(&a, &a).unwrap(), -1.0);
        let up = GraphOverTheta::from_fn(8, |t| t).unwrap();
        let down = GraphOverTheta::from_fn(8, |t| 1.0 - t).unwrap();
        assert_eq!(strip_order(&Strip::curve(up), &Strip::curve(down)).unwrap(), StripOrder::Incomparable);
        let other = Strip::curve(GraphOverTheta::constant(4, 0.0));
        assert_eq!(strip_gap(&a, &other), Err(Error::GridMismatch(8, 4)));
        assert!(Strip::new(GraphOverTheta::constant(8, 1.0), GraphOverTheta::constant(8, 0.0)).is_err());
    }

    #[test]
    fn pinch_examples() {
        let c = Strip::curve(GraphOverTheta::constant(8, 0.3));
        assert_eq!(pinch_measure(&c).min_width, 0.0);
        let s = constant_strip(0.0, 1.0);
        assert_eq!(pinch_measure(&s).min_width, 1.0);
        let w = Strip::new(GraphOverTheta::constant(8, 0.0), GraphOverTheta::from_fn(8, |t| (PI * t).sin()).unwrap())
            .unwrap();
        let m = pinch_measure(&w);
        assert_eq!((m.min_width, m.theta), (0.0, 0.0));
        assert!(m.is_pinched(1e-3));
    }

    #[test]
    fn minimality_at_grid_level() {
        assert!(Strip::curve(GraphOverTheta::constant(8, 0.3)).is_minimal_at(1, 0.0));
        // A strip with a one-cell spike of width is not the hull of its lower graph.
        let s = Strip::new(GraphOverTheta::constant(16, 0.0), spike(16, 3, 0.5)).unwrap();
        assert!(!s.is_minimal_at(1, 1e-12));
        assert!(!constant_strip(0.0, 1.0).is_minimal_at(1, 1e-12));
    }

    #[test]
    fn translation_has_no_annulus() {
        let f = make_translation(0.1, GOLDEN_MEAN);
        let search = AnnulusSearch { grid: 64, max_iter: 20, ..Default::default() };
        assert_eq!(annulus_witness(&f, &search).unwrap(), None);
    }

    #[test]
    fn unforced_annulus_around_attracting_point() {
        let f = arnold(0.9, 0.0, 0.0);
        let search = AnnulusSearch { grid: 256, ..Default::default() };
        let w = annulus_witness(&f, &search).unwrap().unwrap();
        assert_eq!(w.iterate, 1);
        // γ⁻ in (0, 1/2), γ⁺ in (1/2, 1): around the attracting point 1/2.
        assert!(0.0 < w.lower_height && w.lower_height < 0.5);
        assert!(0.5 < w.upper_height && w.upper_height < 1.0);
        let a = 0.9 / (2.0 * PI);
        let expect_up = -a * (2.0 * PI * w.upper_height).sin();
        assert!((w.upper_margin - expect_up).abs() < 1e-12);
    }
}
