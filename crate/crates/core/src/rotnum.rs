//! Fibered rotation numbers and the diagnostics built on them.
//!
//! The estimator is the Birkhoff quotient `(F^n_θ(x) − x)/n` over a set of
//! seed points. Its error radius is the spread across seeds plus `1/n`:
//! for any lift, two orbits on the same fiber stay within distance 1 of each
//! other, so `1/n` bounds the seed-to-seed disagreement of the quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{frac, QpfLift};

/// `F_ε(θ, x) = (θ + ω, F_θ(x) + ε)`.
pub fn perturb(lift: &QpfLift, eps: f64) -> QpfLift {
    lift.shifted(eps)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain Birkhoff quotient.
    #[default]
    Plain,
    /// Birkhoff average of the displacement `F_θ(x) − x` with the smooth bump
    /// weight `exp(−1/(t(1−t)))`; converges super-polynomially when the
    /// dynamics is smoothly conjugate to a rotation.
    Weighted,
}

/// Seed points for the estimator: `(0, 0)` followed by `count − 1` points
/// drawn uniformly from `[0,1)²` with a ChaCha8 stream keyed by `rng_seed`.
pub fn default_seeds(count: usize, rng_seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count).map(|i| if i == 0 { (0.0, 0.0) } else { (rng.gen(), rng.gen()) }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub n: u64,
    pub seeds: Vec<(f64, f64)>,
    #[serde(default)]
    pub method: Method,
    /// Iterates discarded before averaging starts.
    #[serde(default)]
    pub transient: u64,
}

impl Estimator {
    pub fn new(n: u64, seeds: Vec<(f64, f64)>) -> Self {
        Estimator { n, seeds, method: Method::Plain, transient: 0 }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_transient(mut self, transient: u64) -> Self {
        self.transient = transient;
        self
    }

    pub fn estimate(&self, lift: &QpfLift) -> Result<RotationEstimate> {
        if self.n == 0 {
            return Err(Error::invalid("rotation number needs n >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("rotation number needs at least one seed"));
        }
        let per_seed =
            self.seeds.par_iter().map(|&(theta, x)| self.single(lift, theta, x)).collect::<Result<Vec<f64>>>()?;
        let (lo, hi) = per_seed.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let value = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
        Ok(RotationEstimate {
            value,
            error_radius: (hi - lo) + 1.0 / self.n as f64,
            n_used: self.n,
            seeds: self.seeds.clone(),
            method: self.method,
        })
    }

    fn single(&self, lift: &QpfLift, theta0: f64, x0: f64) -> Result<f64> {
        let x_start = lift.advance(theta0, x0, self.transient)?;
        let theta_start = lift.theta_at(theta0, self.transient);
        match self.method {
            Method::Plain => {
                let x = lift.advance(theta_start, x_start, self.n)?;
                Ok((x - x_start) / self.n as f64)
            }
            Method::Weighted => weighted_displacement(lift, theta_start, x_start, self.n),
        }
    }
}

/// Smooth bump on (0,1), scaled so the peak is 1.
#[inline]
fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (4.0 - 1.0 / (t * (1.0 - t))).exp()
    }
}

fn weighted_displacement(lift: &QpfLift, theta0: f64, x0: f64, n: u64) -> Result<f64> {
    let mut x = x0;
    let mut num = 0.0;
    let mut den = 0.0;
    let scale = 1.0 / (n as f64 + 1.0);
    for k in 0..n {
        let next = lift.eval(lift.theta_at(theta0, k), x);
        if !next.is_finite() {
            return Err(Error::NonFinite { step: k as usize + 1, theta: theta0, x: x0 });
        }
        let w = bump((k as f64 + 1.0) * scale);
        num += w * (next - x);
        den += w;
        x = next;
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    /// Lift rotation number ρ(F), not reduced mod 1.
    pub value: f64,
    pub error_radius: f64,
    pub n_used: u64,
    pub seeds: Vec<(f64, f64)>,
    pub method: Method,
}

impl RotationEstimate {
    /// ρ(f) = ρ(F) mod 1.
    pub fn reduced(&self) -> f64 {
        frac(self.value)
    }

    /// Whether two estimates agree within their combined error radii.
    pub fn agrees_with(&self, other: &RotationEstimate) -> bool {
        (self.value - other.value).abs() <= self.error_radius + other.error_radius
    }
}

/// Plain Birkhoff estimate of ρ(F).
pub fn rotation_number(lift: &QpfLift, n: u64, seeds: &[(f64, f64)]) -> Result<RotationEstimate> {
    Estimator::new(n, seeds.to_vec()).estimate(lift)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSample {
    pub n: u64,
    pub theta: f64,
    pub x: f64,
    /// `F^n_θ(x) − x − nρ`.
    pub value: f64,
}

/// Deviations from rigid rotation along the orbit of `start`, sampled at
/// each requested iterate count (returned in request order).
pub fn deviations(lift: &QpfLift, rho: f64, start: (f64, f64), n_list: &[u64]) -> Result<Vec<DeviationSample>> {
    let (theta0, x0) = start;
    let mut order: Vec<usize> = (0..n_list.len()).collect();
    order.sort_by_key(|&i| n_list[i]);
    let mut out = vec![None; n_list.len()];
    let mut x = x0;
    let mut k = 0u64;
    for i in order {
        let target = n_list[i];
        x = lift.advance(lift.theta_at(theta0, k), x, target - k)?;
        k = target;
        out[i] = Some(DeviationSample { n: target, theta: theta0, x: x0, value: x - x0 - target as f64 * rho });
    }
    Ok(out.into_iter().map(|s| s.expect("every index visited")).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    BoundedLike,
    UnboundedLike,
    Inconclusive,
}

/// Running deviation extremes over `1 ≤ k ≤ n`, across all seeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEnvelope {
    pub n: u64,
    pub sup: f64,
    pub inf: f64,
}

impl ScaleEnvelope {
    pub fn amplitude(&self) -> f64 {
        self.sup.abs().max(self.inf.abs())
    }
}

/// Heuristic verdict on ρ-boundedness. Never a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub verdict: Boundedness,
    pub rho: f64,
    pub scales: Vec<ScaleEnvelope>,
}

/// Minimum per-scale growth ratio for the unbounded verdict.
const SCALE_GROWTH: f64 = 1.05;
/// Minimum total growth across the assessed scales.
const TOTAL_GROWTH: f64 = 2.0;
/// Relative slack for "stopped growing".
const SATURATION_SLACK: f64 = 0.05;

/// Tracks the running `sup`/`inf` of the deviations at dyadic `n ≤ n_max`
/// and classifies the growth of the top `growth_window` scales.
///
/// `unbounded_like`: the envelope amplitude rises at every one of those
/// scales and at least doubles overall. `bounded_like`: the amplitude over
/// the upper half of the window does not exceed the lower half by more than
/// 5%. Anything else is `inconclusive`. When `rho` is `None` it is estimated
/// with the weighted average over `4·n_max` iterates.
pub fn boundedness_diagnostic(
    lift: &QpfLift,
    seeds: &[(f64, f64)],
    n_max: u64,
    growth_window: usize,
    rho: Option<f64>,
) -> Result<BoundednessReport> {
    if growth_window < 4 {
        return Err(Error::invalid("growth window must span at least 4 dyadic scales"));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("boundedness diagnostic needs at least one seed"));
    }
    let top = 63 - n_max.leading_zeros() as usize;
    if n_max == 0 || top < growth_window {
        return Err(Error::invalid(format!("n_max = {n_max} spans fewer than {growth_window} dyadic scales")));
    }
    let rho = match rho {
        Some(r) => r,
        None => Estimator::new(4 * n_max, seeds.to_vec()).with_method(Method::Weighted).estimate(lift)?.value,
    };

    let per_seed = seeds
        .par_iter()
        .map(|&(theta0, x0)| {
            let mut scales = Vec::with_capacity(top);
            let mut x = x0;
            let mut sup = f64::NEG_INFINITY;
            let mut inf = f64::INFINITY;
            let mut j = 1usize;
            for k in 0..(1u64 << top) {
                x = lift.eval(lift.theta_at(theta0, k), x);
                if !x.is_finite() {
                    return Err(Error::NonFinite { step: k as usize + 1, theta: theta0, x: x0 });
                }
                let n = k + 1;
                let d = x - x0 - n as f64 * rho;
                sup = sup.max(d);
                inf = inf.min(d);
                if n == 1u64 << j {
                    scales.push(ScaleEnvelope { n, sup, inf });
                    j += 1;
                }
            }
            Ok(scales)
        })
        .collect::<Result<Vec<_>>>()?;

    let scales: Vec<ScaleEnvelope> = (0..top)
        .map(|j| {
            per_seed
                .iter()
                .map(|s| s[j])
                .reduce(|a, b| ScaleEnvelope { sup: a.sup.max(b.sup), inf: a.inf.min(b.inf), ..a })
                .expect("seeds nonempty")
        })
        .collect();

    let window: Vec<f64> = scales[top - growth_window..].iter().map(ScaleEnvelope::amplitude).collect();
    let rising = window.windows(2).all(|w| w[1] > SCALE_GROWTH * w[0]);
    let verdict = if rising && window[growth_window - 1] >= TOTAL_GROWTH * window[0] {
        Boundedness::UnboundedLike
    } else {
        let half = growth_window / 2;
        let early = window[..half].iter().copied().fold(0.0, f64::max);
        let late = window[half..].iter().copied().fold(0.0, f64::max);
        if late <= (1.0 + SATURATION_SLACK) * early + 1e-12 {
            Boundedness::BoundedLike
        } else {
            Boundedness::Inconclusive
        }
    };
    Ok(BoundednessReport { verdict, rho, scales })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityKind {
    StrictlyMonotone,
    Locked,
    /// Flat for ε ≥ 0 only.
    OneSidedUpper,
    /// Flat for ε ≤ 0 only.
    OneSidedLower,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub kind: MonotonicityKind,
    pub epsilon_grid: Vec<(f64, RotationEstimate)>,
    /// ε-interval around 0 on which ρ(F_ε) agrees with ρ(F).
    pub plateau: Option<(f64, f64)>,
}

/// `{±10⁻¹, …, ±10⁻⁶} ∪ {0}`, ascending.
pub fn default_eps_grid() -> Vec<f64> {
    symmetric_eps_grid(1, 6)
}

/// `{±10^-lo_exp, …, ±10^-hi_exp} ∪ {0}`, ascending.
pub fn symmetric_eps_grid(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    let pos: Vec<f64> = (lo_exp..=hi_exp).map(|e| 10f64.powi(-e)).collect();
    let mut grid: Vec<f64> = pos.iter().map(|&e| -e).collect();
    grid.push(0.0);
    grid.extend(pos.iter().rev());
    grid
}

pub fn monotonicity_probe(lift: &QpfLift, eps_list: &[f64], estimator: &Estimator) -> Result<MonotonicityVerdict> {
    let mut eps: Vec<f64> = eps_list.to_vec();
    if eps.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("epsilon grid must be finite"));
    }
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 3 || !eps.contains(&0.0) || eps.iter().any(|e| !eps.contains(&-e)) {
        return Err(Error::invalid("epsilon grid must contain 0 and be symmetric"));
    }
    let grid =
        eps.par_iter().map(|&e| estimator.estimate(&perturb(lift, e)).map(|r| (e, r))).collect::<Result<Vec<_>>>()?;

    let max_err = grid.iter().map(|(_, r)| r.error_radius).fold(0.0, f64::max);
    let spacing = eps.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if spacing < 4.0 * max_err {
        return Err(Error::GridTooCoarse { spacing, error_radius: max_err });
    }

    let flat = |i: usize, j: usize| grid[i].1.agrees_with(&grid[j].1);
    let last = grid.len() - 1;
    let zero = eps.iter().position(|&e| e == 0.0).expect("checked above");

    let kind = if flat(0, last) {
        MonotonicityKind::Locked
    } else if grid.windows(2).all(|w| w[1].1.value - w[0].1.value > w[0].1.error_radius + w[1].1.error_radius) {
        MonotonicityKind::StrictlyMonotone
    } else {
        match (flat(0, zero), flat(zero, last)) {
            (false, true) => MonotonicityKind::OneSidedUpper,
            (true, false) => MonotonicityKind::OneSidedLower,
            _ => MonotonicityKind::Inconclusive,
        }
    };

    let mut lo = zero;
    while lo > 0 && flat(lo - 1, zero) {
        lo -= 1;
    }
    let mut hi = zero;
    while hi < last && flat(hi + 1, zero) {
        hi += 1;
    }
    let plateau = (lo < hi).then(|| (eps[lo], eps[hi]));

    Ok(MonotonicityVerdict { kind, epsilon_grid: grid, plateau })
}

/// Witness of `ρ ≡ (k/q)ω + l/(pq) (mod 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalRelation {
    pub k: i64,
    pub l: i64,
    pub p: i64,
    pub q: i64,
    pub residual: f64,
}

impl RationalRelation {
    /// `(k/q)ω + l/(pq)`, not reduced.
    pub fn value(&self, omega: f64) -> f64 {
        self.k as f64 * omega / self.q as f64 + self.l as f64 / (self.p * self.q) as f64
    }
}

/// Distance on the circle.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Exhaustive search with `|k| ≤ qmax`; see [`rational_dependence_with`].
pub fn rational_dependence(rho: f64, omega: f64, tol: f64, qmax: u32, pmax: u32) -> Option<RationalRelation> {
    rational_dependence_with(rho, omega, tol, qmax, pmax, qmax)
}

/// Searches `1 ≤ q ≤ qmax`, `1 ≤ p ≤ pmax`, `|k| ≤ kmax`, `0 ≤ l < pq` in
/// lexicographic order of `(q, p, |k|, l)` (k > 0 before k < 0) and returns
/// the first combination whose circle distance to ρ is at most `tol`.
pub fn rational_dependence_with(
    rho: f64,
    omega: f64,
    tol: f64,
    qmax: u32,
    pmax: u32,
    kmax: u32,
) -> Option<RationalRelation> {
    if !(tol > 0.0) || !rho.is_finite() || !omega.is_finite() {
        return None;
    }
    let target = frac(rho);
    for q in 1..=i64::from(qmax) {
        for p in 1..=i64::from(pmax) {
            let pq = p * q;
            for abs_k in 0..=i64::from(kmax) {
                let signs: &[i64] = if abs_k == 0 { &[1] } else { &[1, -1] };
                for &sign in signs {
                    let k = sign * abs_k;
                    let shift = k as f64 * omega / q as f64;
                    for l in 0..pq {
                        let residual = circle_distance(target, shift + l as f64 / pq as f64);
                        if residual <= tol {
                            return Some(RationalRelation { k, l, p, q, residual });
                        }
                    }
                }
            }
        }
    }
    None
}
