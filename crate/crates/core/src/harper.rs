//! The Harper map `(θ, x) ↦ (θ + ω, V(θ) − E − 1/x)` as a circle homeomorphism,
//! and the integrated density of states of the matching Schrödinger operator
//! `(H_θ u)_n = −(u_{n+1} + u_{n−1}) + V(θ + nω) u_n`.
//!
//! The fiber `ℝ ∪ {∞}` is charted by `x = cot(πy)`, `y ∈ ℝ` a lift of
//! `ℝP¹`. The transfer matrix `[[V − E, −1], [1, 0]]` factors as the shear
//! `[[1, V − E], [0, 1]]` after a quarter turn; the quarter turn lifts to
//! `y ↦ y + 1/2` and the shear preserves each half-turn `[k, k + 1]`, which
//! pins down a continuous degree-one lift with no pole. With this chart the
//! free operator (`V ≡ 0`) gives `ρ = arccos(−E/2)/π`, which equals its
//! integrated density of states.

pub mod tridiag;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, FiberMap, PeriodicFn, QpfLift};
use crate::rotnum::{circle_distance, Estimator, RotationEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarperParams {
    pub potential: PeriodicFn,
    pub energy: f64,
    pub omega: f64,
}

impl HarperParams {
    pub fn almost_mathieu(lambda: f64, energy: f64, omega: f64) -> Self {
        HarperParams { potential: PeriodicFn::Cosine { amplitude: 2.0 * lambda }, energy, omega }
    }

    pub fn at_energy(&self, energy: f64) -> Self {
        HarperParams { energy, ..self.clone() }
    }
}

/// One step of the Schrödinger cocycle, `[[V(θ) − E, −1], [1, 0]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CocycleStep {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CocycleStep {
    pub fn at(params: &HarperParams, theta: f64) -> Self {
        CocycleStep { a: params.potential.eval(theta) - params.energy, b: -1.0, c: 1.0, d: 0.0 }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }
}

/// Lift of `x ↦ c − 1/x` in the chart `x = cot(πy)`.
#[inline]
pub(crate) fn projective_step(c: f64, y: f64) -> f64 {
    // Quarter turn, then the shear cot(πs) ↦ cot(πs) + c inside [k, k + 1).
    let t = y + 0.5;
    let k = t.floor();
    let s = PI * (t - k);
    let (sin, cos) = s.sin_cos();
    k + sin.atan2(cos + c * sin) / PI
}

struct HarperFiber {
    potential: PeriodicFn,
    energy: f64,
}

impl FiberMap for HarperFiber {
    #[inline]
    fn eval(&self, theta: f64, y: f64) -> f64 {
        projective_step(self.potential.eval(theta) - self.energy, y)
    }

    fn theta_modulus(&self, dtheta: f64) -> f64 {
        // |∂y'/∂c| ≤ 1/π.
        self.potential.lipschitz() * dtheta / PI
    }
}

pub fn harper_lift(params: &HarperParams) -> QpfLift {
    QpfLift::new(
        params.omega,
        HarperFiber { potential: params.potential.clone(), energy: params.energy },
        FamilySpec::Harper { potential: params.potential.clone(), energy: params.energy, omega: params.omega },
    )
}

/// Rotation number of the free (V ≡ 0) Harper map, clamped to `[0, 1]`.
pub fn free_rotation_number(energy: f64) -> f64 {
    (-energy / 2.0).clamp(-1.0, 1.0).acos() / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsEstimate {
    pub size: usize,
    pub value: f64,
    pub boundary: Boundary,
    pub phases: usize,
}

pub const DEFAULT_IDS_PHASES: usize = 8;

/// Eigenvalues of Dirichlet truncations of `H_θ` at several phases, reusable
/// across energies.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSpectrum {
    size: usize,
    /// One ascending eigenvalue list per phase `θ₀ = j/phases`.
    per_phase: Vec<Vec<f64>>,
}

impl TruncatedSpectrum {
    pub fn compute(potential: &PeriodicFn, omega: f64, size: usize, phases: usize) -> Result<Self> {
        if size < 2 || phases == 0 {
            return Err(Error::invalid("IDS needs N >= 2 and at least one phase"));
        }
        potential.validate()?;
        let per_phase = (0..phases)
            .into_par_iter()
            .map(|j| {
                let (diag, off) = truncated_operator(potential, omega, j as f64 / phases as f64, size);
                tridiag::eigenvalues(&diag, &off)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncatedSpectrum { size, per_phase })
    }

    pub fn ids(&self, energy: f64) -> IdsEstimate {
        let below: usize = self.per_phase.iter().map(|ev| ev.partition_point(|&v| v < energy)).sum();
        IdsEstimate {
            size: self.size,
            value: below as f64 / (self.size * self.per_phase.len()) as f64,
            boundary: Boundary::Dirichlet,
            phases: self.per_phase.len(),
        }
    }

    /// Eigenvalues at phase index `j`.
    pub fn eigenvalues(&self, j: usize) -> &[f64] {
        &self.per_phase[j]
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.per_phase
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), ev| (lo.min(ev[0]), hi.max(ev[ev.len() - 1])))
    }
}

/// Diagonal `V(θ₀ + nω)` and off-diagonal `−1` of the `N × N` truncation.
pub fn truncated_operator(potential: &PeriodicFn, omega: f64, theta0: f64, size: usize) -> (Vec<f64>, Vec<f64>) {
    let phase = crate::families::make_translation(0.0, omega);
    let diag = (0..size as u64).map(|n| potential.eval(phase.theta_at(theta0, n))).collect();
    (diag, vec![-1.0; size.saturating_sub(1)])
}

/// Fraction of eigenvalues below `energy`, averaged over
/// [`DEFAULT_IDS_PHASES`] phases.
pub fn ids(potential: &PeriodicFn, omega: f64, energy: f64, size: usize) -> Result<IdsEstimate> {
    Ok(TruncatedSpectrum::compute(potential, omega, size, DEFAULT_IDS_PHASES)?.ids(energy))
}

/// Smallest `|k| ≤ kmax` (positive first on ties) with `ρ ≡ kω (mod 1)`
/// within `tol`.
pub fn label_rotation(rho: f64, omega: f64, tol: f64, kmax: i64) -> Option<(i64, f64)> {
    (0..=kmax)
        .flat_map(|m| if m == 0 { vec![0] } else { vec![m, -m] })
        .map(|k| (k, circle_distance(rho, k as f64 * omega)))
        .find(|&(_, r)| r <= tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLabel {
    pub k: Option<i64>,
    pub residual: f64,
    pub energy: f64,
    pub rotation: RotationEstimate,
}

pub const DEFAULT_LABEL_KMAX: i64 = 50;

/// Labels the plateau containing `[e_lo, e_hi]` by estimating ρ at the
/// midpoint. `k` is `None` if no `|k| ≤ kmax` matches within `tol`.
pub fn gap_label(
    params: &HarperParams,
    e_lo: f64,
    e_hi: f64,
    tol: f64,
    kmax: i64,
    estimator: &Estimator,
) -> Result<GapLabel> {
    if !(e_lo <= e_hi) {
        return Err(Error::invalid("energy interval is empty"));
    }
    let energy = 0.5 * (e_lo + e_hi);
    let rotation = estimator.estimate(&harper_lift(&params.at_energy(energy)))?;
    let omega = params.omega;
    let residual = |k: i64| circle_distance(rotation.value, k as f64 * omega);
    let (k, residual) = match label_rotation(rotation.value, omega, tol, kmax) {
        Some((k, r)) => (Some(k), r),
        None => {
            let best = (-kmax..=kmax).map(residual).fold(f64::INFINITY, f64::min);
            (None, best)
        }
    };
    Ok(GapLabel { k, residual, energy, rotation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::GOLDEN_MEAN;
    use crate::rotnum::{default_seeds, rotation_number};

    fn free(energy: f64) -> QpfLift {
        harper_lift(&HarperParams { potential: PeriodicFn::Zero, energy, omega: GOLDEN_MEAN })
    }

    #[test]
    fn projective_step_matches_mobius_action() {
        // x' = c − 1/x with x = cot(πy).
        for &c in &[0.0, 1.3, -2.7, 8.0] {
            for &y in &[0.1, 0.37, 0.8, 1.45, -0.3] {
                let x = (PI * y).cos() / (PI * y).sin();
                let y2 = projective_step(c, y);
                let x2 = (PI * y2).cos() / (PI * y2).sin();
                assert!((x2 - (c - 1.0 / x)).abs() < 1e-9 * (1.0 + x2.abs()), "c={c} y={y}");
            }
        }
    }

    #[test]
    fn projective_step_is_continuous_across_branches() {
        for &c in &[0.0, 3.0, -3.0] {
            for k in -2..3 {
                let edge = k as f64 - 0.5;
                let below = projective_step(c, edge - 1e-12);
                let above = projective_step(c, edge + 1e-12);
                assert!((above - below).abs() < 1e-9, "c={c} edge={edge}");
            }
        }
    }

    #[test]
    fn cocycle_has_unit_determinant() {
        let p = HarperParams::almost_mathieu(2.0, 0.7, GOLDEN_MEAN);
        for i in 0..100 {
            let step = CocycleStep::at(&p, i as f64 / 100.0);
            assert_eq!(step.determinant(), 1.0);
        }
    }

    #[test]
    fn free_elliptic_and_parabolic() {
        let seeds = default_seeds(2, 1);
        let half = rotation_number(&free(0.0), 10_000, &seeds).unwrap();
        assert!((half.value - 0.5).abs() < 1e-12);
        let para = rotation_number(&free(-2.0), 100_000, &seeds).unwrap();
        assert!(para.value.abs() <= para.error_radius, "{para:?}");
        assert_eq!(free_rotation_number(0.0), 0.5);
        assert_eq!(free_rotation_number(-2.0), 0.0);
        assert_eq!(free_rotation_number(3.0), 1.0);
    }

    #[test]
    fn free_rotation_matches_eigen_angle() {
        let seeds = default_seeds(2, 3);
        for &e in &[-1.9, -1.0, 0.3, 1.5, 1.99] {
            let est = rotation_number(&free(e), 100_000, &seeds).unwrap();
            assert!((est.value - free_rotation_number(e)).abs() < 2e-5, "E={e}: {}", est.value);
        }
    }

    #[test]
    fn below_spectrum_is_zero() {
        let p = HarperParams::almost_mathieu(1.0, -4.5, GOLDEN_MEAN);
        let est = rotation_number(&harper_lift(&p), 100_000, &default_seeds(3, 2)).unwrap();
        assert!(est.value.abs() <= est.error_radius, "{est:?}");
    }

    #[test]
    fn free_ids() {
        let v = ids(&PeriodicFn::Zero, GOLDEN_MEAN, 0.0, 2000).unwrap();
        assert!((v.value - 0.5).abs() < 1e-3);
        assert_eq!(ids(&PeriodicFn::Zero, GOLDEN_MEAN, -2.5, 100).unwrap().value, 0.0);
        assert_eq!(ids(&PeriodicFn::Zero, GOLDEN_MEAN, 2.5, 100).unwrap().value, 1.0);
        assert!(ids(&PeriodicFn::Zero, GOLDEN_MEAN, 0.0, 1).is_err());
    }

    #[test]
    fn label_search() {
        let w = GOLDEN_MEAN;
        assert_eq!(label_rotation(0.0, w, 1e-6, 10).map(|l| l.0), Some(0));
        assert_eq!(label_rotation(w, w, 1e-6, 10).map(|l| l.0), Some(1));
        assert_eq!(label_rotation(1.0 - w, w, 1e-6, 10).map(|l| l.0), Some(-1));
        assert_eq!(label_rotation((2.0 * w).fract(), w, 1e-6, 10).map(|l| l.0), Some(2));
        assert_eq!(label_rotation(0.5, w, 1e-6, 10), None);
    }

    // Gap locations from scipy's eigh_tridiagonal at N = 2000, θ₀ = 0:
    // k = 1 gap ≈ [0.670, 2.595], k = 2 gap ≈ [−3.487, −3.240].
    #[test]
    fn almost_mathieu_gap_labels() {
        let p = HarperParams::almost_mathieu(2.0, 0.0, GOLDEN_MEAN);
        let est = Estimator::new(200_000, default_seeds(2, 5));
        let one = gap_label(&p, 1.5, 1.7, 1e-4, 10, &est).unwrap();
        assert_eq!(one.k, Some(1), "{one:?}");
        let two = gap_label(&p, -3.40, -3.33, 1e-4, 10, &est).unwrap();
        assert_eq!(two.k, Some(2), "{two:?}");
        let below = gap_label(&p, -5.0, -4.8, 1e-4, 10, &est).unwrap();
        assert_eq!(below.k, Some(0));
    }
}
