//! Lifts of quasiperiodically forced circle homeomorphisms.
//!
//! Every operation in this crate acts on a [`QpfLift`]: a skew product
//! `(θ, x) ↦ (θ + ω, F_θ(x))` on `𝕋¹ × ℝ` whose fiber maps are increasing and
//! commute with integer translation, `F_θ(x + 1) = F_θ(x) + 1`. The fiber
//! coordinate is always kept in lift coordinates; reduction mod 1 only
//! happens when presenting results.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harper::{harper_lift, HarperParams};

/// The golden mean `(√5 − 1)/2`, the default forcing frequency.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

pub(crate) fn golden_mean() -> f64 {
    GOLDEN_MEAN
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// A continuous function on the circle, used for the forcing term of the
/// Arnold family and the potential of the Harper map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PeriodicFn {
    Zero,
    /// `amplitude · cos(2πθ)`
    Cosine {
        amplitude: f64,
    },
    /// `Σ amplitude · cos(2π(freq·θ + phase))`
    Fourier {
        terms: Vec<FourierTerm>,
    },
    /// Samples at `θ_i = i/N`, linearly interpolated.
    Tabulated {
        samples: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub freq: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Default for PeriodicFn {
    fn default() -> Self {
        PeriodicFn::Cosine { amplitude: 1.0 }
    }
}

impl PeriodicFn {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            PeriodicFn::Zero => 0.0,
            PeriodicFn::Cosine { amplitude } => amplitude * (2.0 * PI * theta).cos(),
            PeriodicFn::Fourier { terms } => {
                terms.iter().map(|t| t.amplitude * (2.0 * PI * (f64::from(t.freq) * theta + t.phase)).cos()).sum()
            }
            PeriodicFn::Tabulated { samples } => interpolate_periodic(samples, theta),
        }
    }

    /// Lipschitz constant in θ.
    pub fn lipschitz(&self) -> f64 {
        match self {
            PeriodicFn::Zero => 0.0,
            PeriodicFn::Cosine { amplitude } => 2.0 * PI * amplitude.abs(),
            PeriodicFn::Fourier { terms } => {
                terms.iter().map(|t| 2.0 * PI * f64::from(t.freq) * t.amplitude.abs()).sum()
            }
            PeriodicFn::Tabulated { samples } => {
                let n = samples.len();
                (0..n).map(|i| (samples[(i + 1) % n] - samples[i]).abs()).fold(0.0, f64::max) * n as f64
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let finite = match self {
            PeriodicFn::Zero => true,
            PeriodicFn::Cosine { amplitude } => amplitude.is_finite(),
            PeriodicFn::Fourier { terms } => terms.iter().all(|t| t.amplitude.is_finite() && t.phase.is_finite()),
            PeriodicFn::Tabulated { samples } => {
                if samples.is_empty() {
                    return Err(Error::invalid("tabulated function needs at least one sample"));
                }
                samples.iter().all(|v| v.is_finite())
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::invalid("periodic function has non-finite coefficients"))
        }
    }
}

/// Linear interpolation of samples at `i/N`, periodic in θ.
pub(crate) fn interpolate_periodic(samples: &[f64], theta: f64) -> f64 {
    let n = samples.len();
    let t = frac(theta) * n as f64;
    let i = (t.floor() as usize).min(n - 1);
    let w = t - i as f64;
    if w == 0.0 {
        return samples[i];
    }
    (1.0 - w) * samples[i] + w * samples[(i + 1) % n]
}

/// Fiber map of a skew product: `(θ, x) ↦ F_θ(x)` in lift coordinates.
pub trait FiberMap: Send + Sync {
    fn eval(&self, theta: f64, x: f64) -> f64;

    /// Bound on `|F_θ(x) − F_θ'(x)|` whenever `|θ − θ'| ≤ dtheta`.
    fn theta_modulus(&self, dtheta: f64) -> f64;
}

/// Reproducibility record attached to every lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Translation {
        rho0: f64,
        #[serde(default = "golden_mean")]
        omega: f64,
    },
    Arnold {
        alpha: f64,
        tau: f64,
        beta: f64,
        #[serde(default)]
        forcing: PeriodicFn,
        #[serde(default = "golden_mean")]
        omega: f64,
    },
    Harper {
        potential: PeriodicFn,
        energy: f64,
        #[serde(default = "golden_mean")]
        omega: f64,
    },
    /// A lift assembled directly from a [`FiberMap`]; not rebuildable.
    Custom { name: String },
}

impl FamilySpec {
    pub fn translation(rho0: f64) -> Self {
        FamilySpec::Translation { rho0, omega: GOLDEN_MEAN }
    }

    pub fn arnold(alpha: f64, tau: f64, beta: f64) -> Self {
        FamilySpec::Arnold { alpha, tau, beta, forcing: PeriodicFn::default(), omega: GOLDEN_MEAN }
    }

    /// Almost-Mathieu potential `V(θ) = 2λ cos(2πθ)`.
    pub fn almost_mathieu(lambda: f64, energy: f64) -> Self {
        FamilySpec::Harper { potential: PeriodicFn::Cosine { amplitude: 2.0 * lambda }, energy, omega: GOLDEN_MEAN }
    }

    pub fn build(&self) -> Result<QpfLift> {
        match self {
            FamilySpec::Translation { rho0, omega } => Ok(make_translation(*rho0, *omega)),
            FamilySpec::Arnold { alpha, tau, beta, forcing, omega } => {
                make_arnold(ArnoldParams::new(*alpha, *tau, *beta, forcing.clone())?, *omega)
            }
            FamilySpec::Harper { potential, energy, omega } => {
                potential.validate()?;
                Ok(harper_lift(&HarperParams { potential: potential.clone(), energy: *energy, omega: *omega }))
            }
            FamilySpec::Custom { name } => {
                Err(Error::invalid(format!("custom family {name:?} cannot be rebuilt from its tag")))
            }
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match self {
            FamilySpec::Translation { omega, .. }
            | FamilySpec::Arnold { omega, .. }
            | FamilySpec::Harper { omega, .. } => Some(*omega),
            FamilySpec::Custom { .. } => None,
        }
    }

    /// Sets a named scalar parameter. `lambda` replaces a Harper potential
    /// with the almost-Mathieu cosine of amplitude `2λ`.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match (self, name) {
            (FamilySpec::Translation { omega, .. }, "omega")
            | (FamilySpec::Arnold { omega, .. }, "omega")
            | (FamilySpec::Harper { omega, .. }, "omega") => omega,
            (FamilySpec::Translation { rho0, .. }, "rho0") => rho0,
            (FamilySpec::Arnold { alpha, .. }, "alpha") => alpha,
            (FamilySpec::Arnold { tau, .. }, "tau") => tau,
            (FamilySpec::Arnold { beta, .. }, "beta") => beta,
            (FamilySpec::Harper { energy, .. }, "energy") => energy,
            (FamilySpec::Harper { potential, .. }, "lambda") => {
                *potential = PeriodicFn::Cosine { amplitude: 2.0 * value };
                return Ok(());
            }
            (spec, _) => return Err(Error::invalid(format!("family {} has no parameter {name:?}", spec.name()))),
        };
        *slot = value;
        Ok(())
    }

    pub fn name(&self) -> &str {
        match self {
            FamilySpec::Translation { .. } => "translation",
            FamilySpec::Arnold { .. } => "arnold",
            FamilySpec::Harper { .. } => "harper",
            FamilySpec::Custom { name } => name,
        }
    }
}

/// Exact phase bookkeeping for `θ_k = θ₀ + kω mod 1`.
///
/// ω is split into a 26-bit head and a tail so `k·head` is exact for
/// `k < 2^27`; the phase error then stays at a few ulps of 1 independent of k.
#[derive(Clone, Copy, Debug)]
struct Phase {
    omega: f64,
    head: f64,
    tail: f64,
}

const EXACT_PRODUCT_LIMIT: u64 = 1 << 27;

impl Phase {
    fn new(omega: f64) -> Self {
        let c = 134_217_729.0 * omega;
        let head = c - (c - omega);
        Phase { omega, head, tail: omega - head }
    }

    #[inline]
    fn at(&self, theta0: f64, k: u64) -> f64 {
        let kf = k as f64;
        if k < EXACT_PRODUCT_LIMIT {
            let p = kf * self.head;
            frac(theta0 + (p - p.floor()) + kf * self.tail)
        } else {
            let p = kf * self.omega;
            let err = kf.mul_add(self.omega, -p);
            frac(theta0 + (p - p.floor()) + err)
        }
    }
}

/// A lift `F` of a qpf circle homeomorphism, optionally shifted vertically
/// by a constant (see `rotnum::perturb`).
#[derive(Clone)]
pub struct QpfLift {
    phase: Phase,
    map: Arc<dyn FiberMap>,
    shift: f64,
    tag: FamilySpec,
}

impl fmt::Debug for QpfLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QpfLift")
            .field("omega", &self.phase.omega)
            .field("shift", &self.shift)
            .field("tag", &self.tag)
            .finish()
    }
}

impl QpfLift {
    pub fn new(omega: f64, map: impl FiberMap + 'static, tag: FamilySpec) -> Self {
        QpfLift { phase: Phase::new(omega), map: Arc::new(map), shift: 0.0, tag }
    }

    pub fn omega(&self) -> f64 {
        self.phase.omega
    }

    pub fn tag(&self) -> &FamilySpec {
        &self.tag
    }

    /// Accumulated vertical shift ε.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub(crate) fn shifted(&self, eps: f64) -> Self {
        QpfLift { shift: self.shift + eps, ..self.clone() }
    }

    /// `F_θ(x)`.
    #[inline]
    pub fn eval(&self, theta: f64, x: f64) -> f64 {
        let y = self.map.eval(theta, x);
        if self.shift == 0.0 {
            y
        } else {
            y + self.shift
        }
    }

    /// `θ₀ + kω mod 1`.
    #[inline]
    pub fn theta_at(&self, theta0: f64, k: u64) -> f64 {
        self.phase.at(theta0, k)
    }

    pub fn theta_modulus(&self, dtheta: f64) -> f64 {
        self.map.theta_modulus(dtheta)
    }

    /// `F^n_{θ₀}(x₀)`, without storing the orbit.
    pub fn advance(&self, theta0: f64, x0: f64, n: u64) -> Result<f64> {
        let mut x = x0;
        for k in 0..n {
            x = self.eval(self.theta_at(theta0, k), x);
            if !x.is_finite() {
                return Err(Error::NonFinite { step: k as usize + 1, theta: theta0, x: x0 });
            }
        }
        Ok(x)
    }
}

/// A finite orbit in lift coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub start: (f64, f64),
    /// `(θ_k, x_k)` for `k = 0..=n`.
    pub samples: Vec<(f64, f64)>,
}

impl OrbitSegment {
    pub fn len(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.samples.len() == 1
    }

    pub fn terminal(&self) -> (f64, f64) {
        *self.samples.last().expect("orbit holds its start point")
    }
}

pub fn iterate(lift: &QpfLift, start: (f64, f64), n: usize) -> OrbitSegment {
    let (theta0, x0) = start;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push((frac(theta0), x0));
    let mut x = x0;
    for k in 0..n as u64 {
        x = lift.eval(lift.theta_at(theta0, k), x);
        samples.push((lift.theta_at(theta0, k + 1), x));
    }
    OrbitSegment { start, samples }
}

struct Translation {
    rho0: f64,
}

impl FiberMap for Translation {
    #[inline]
    fn eval(&self, _theta: f64, x: f64) -> f64 {
        x + self.rho0
    }

    fn theta_modulus(&self, _dtheta: f64) -> f64 {
        0.0
    }
}

/// Rigid rotation `(θ, x) ↦ (θ + ω, x + ρ₀)`.
pub fn make_translation(rho0: f64, omega: f64) -> QpfLift {
    QpfLift::new(omega, Translation { rho0 }, FamilySpec::Translation { rho0, omega })
}

/// Parameters of `x + τ + (α/2π) sin(2πx) + β g(θ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArnoldParams {
    alpha: f64,
    pub tau: f64,
    pub beta: f64,
    pub forcing: PeriodicFn,
}

impl ArnoldParams {
    pub fn new(alpha: f64, tau: f64, beta: f64, forcing: PeriodicFn) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !tau.is_finite() || !beta.is_finite() {
            return Err(Error::invalid("tau and beta must be finite"));
        }
        forcing.validate()?;
        Ok(ArnoldParams { alpha, tau, beta, forcing })
    }

    /// Cosine forcing `g(θ) = cos(2πθ)`.
    pub fn with_cosine(alpha: f64, tau: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, tau, beta, PeriodicFn::default())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

struct Arnold {
    tau: f64,
    amp: f64,
    beta: f64,
    forcing: PeriodicFn,
}

impl FiberMap for Arnold {
    #[inline]
    fn eval(&self, theta: f64, x: f64) -> f64 {
        let mut y = x + self.tau + self.amp * (2.0 * PI * x).sin();
        if self.beta != 0.0 {
            y += self.beta * self.forcing.eval(theta);
        }
        y
    }

    fn theta_modulus(&self, dtheta: f64) -> f64 {
        self.beta.abs() * self.forcing.lipschitz() * dtheta
    }
}

pub fn make_arnold(params: ArnoldParams, omega: f64) -> Result<QpfLift> {
    // Re-validate: fields are public apart from alpha.
    let params = ArnoldParams::new(params.alpha, params.tau, params.beta, params.forcing)?;
    let tag = FamilySpec::Arnold {
        alpha: params.alpha,
        tau: params.tau,
        beta: params.beta,
        forcing: params.forcing.clone(),
        omega,
    };
    Ok(QpfLift::new(
        omega,
        Arnold { tau: params.tau, amp: params.alpha / (2.0 * PI), beta: params.beta, forcing: params.forcing },
        tag,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_arnold(alpha: f64, tau: f64, beta: f64) -> QpfLift {
        make_arnold(ArnoldParams::with_cosine(alpha, tau, beta).unwrap(), GOLDEN_MEAN).unwrap()
    }

    #[test]
    fn zero_translation_is_identity() {
        let f = make_translation(0.0, GOLDEN_MEAN);
        for &(t, x) in &[(0.0, 0.0), (0.3, -2.7), (0.99, 15.25)] {
            assert_eq!(f.eval(t, x), x);
        }
    }

    #[test]
    fn translation_orbit() {
        let f = make_translation(0.25, GOLDEN_MEAN);
        let orbit = iterate(&f, (0.0, 0.0), 4);
        assert_eq!(orbit.terminal().1, 1.0);
        assert_eq!(orbit.len(), 4);
    }

    #[test]
    fn empty_orbit_holds_start() {
        let f = golden_arnold(0.8, 0.3, 0.3);
        let orbit = iterate(&f, (0.4, 1.5), 0);
        assert!(orbit.is_empty());
        assert_eq!(orbit.samples, vec![(0.4, 1.5)]);
    }

    #[test]
    fn arnold_fixes_zero_without_drive() {
        let f = golden_arnold(0.5, 0.0, 0.0);
        for &t in &[0.0, 0.2, 0.77] {
            assert_eq!(f.eval(t, 0.0), 0.0);
        }
    }

    #[test]
    fn arnold_reduces_to_translation() {
        let f = golden_arnold(0.0, 0.25, 0.0);
        assert_eq!(f.eval(0.1, 3.0), 3.25);
    }

    #[test]
    fn alpha_range_is_checked() {
        assert_eq!(ArnoldParams::with_cosine(1.2, 0.0, 0.0).unwrap_err(), Error::AlphaOutOfRange(1.2));
        assert!(ArnoldParams::with_cosine(-0.1, 0.0, 0.0).is_err());
        assert!(ArnoldParams::with_cosine(1.0, 0.0, 0.0).is_ok());
    }

    // Second, deliberately naive loop (incremental phase) as oracle.
    #[test]
    fn arnold_orbit_matches_naive_loop() {
        let f = golden_arnold(0.8, 0.3, 0.3);
        let orbit = iterate(&f, (0.0, 0.0), 100);
        let (mut theta, mut x) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            x = x + 0.3 + 0.8 / (2.0 * PI) * (2.0 * PI * x).sin() + 0.3 * (2.0 * PI * theta).cos();
            theta = (theta + GOLDEN_MEAN) % 1.0;
        }
        assert!((orbit.terminal().1 - x).abs() < 1e-9, "{} vs {x}", orbit.terminal().1);
        // Same value from an independent numba loop with n = 100.
        assert!((x - 30.916_021_808_671_62).abs() < 1e-9);
    }

    #[test]
    fn phase_stays_accurate_for_long_orbits() {
        let f = make_translation(0.0, GOLDEN_MEAN);
        // frac(10^7 · ω) for the f64 value of ω, computed in exact rationals.
        let t = f.theta_at(0.0, 10_000_000);
        assert!((t - 0.887_498_949_025_257_4).abs() < 1e-12, "{t}");
        let big = EXACT_PRODUCT_LIMIT + 12_345;
        let t = f.theta_at(0.25, big);
        assert!((0.0..1.0).contains(&t));
    }

    #[test]
    fn iterate_is_deterministic() {
        let f = golden_arnold(0.8, 0.3, 0.3);
        let a = iterate(&f, (0.123, 0.456), 500);
        let b = iterate(&f, (0.123, 0.456), 500);
        assert_eq!(a, b);
    }

    #[test]
    fn tabulated_forcing_interpolates() {
        let g = PeriodicFn::Tabulated { samples: vec![0.0, 1.0, 0.0, -1.0] };
        assert_eq!(g.eval(0.25), 1.0);
        assert_eq!(g.eval(0.125), 0.5);
        assert_eq!(g.eval(0.875), -0.5);
        assert_eq!(g.eval(1.25), 1.0);
        assert_eq!(g.lipschitz(), 4.0);
    }

    #[test]
    fn spec_parameters_can_be_set() {
        let mut spec = FamilySpec::arnold(0.5, 0.0, 0.0);
        spec.set_param("tau", 0.1).unwrap();
        assert!(spec.set_param("energy", 0.1).is_err());
        let f = spec.build().unwrap();
        assert_eq!(f.eval(0.0, 0.0), 0.1);

        let mut harper = FamilySpec::almost_mathieu(0.0, 0.0);
        harper.set_param("lambda", 2.0).unwrap();
        assert_eq!(
            harper,
            FamilySpec::Harper { potential: PeriodicFn::Cosine { amplitude: 4.0 }, energy: 0.0, omega: GOLDEN_MEAN }
        );
    }

    #[test]
    fn spec_json_rejects_unknown_keys() {
        let ok: FamilySpec = serde_json::from_str(r#"{"family":"translation","rho0":0.25}"#).unwrap();
        assert_eq!(ok, FamilySpec::translation(0.25));
        assert!(serde_json::from_str::<FamilySpec>(r#"{"family":"translation","rho0":0.25,"bogus":1}"#).is_err());
    }
}
