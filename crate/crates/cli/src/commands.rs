//! One function per subcommand: resolved configuration in, rendered
//! artifact out. Nothing here touches the filesystem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qpf_core::families::{FamilySpec, PeriodicFn};
use qpf_core::graphs::{
    annulus_witness, iterate_graph_to_limit, pinch_measure, AnnulusSearch, AnnulusWitness, GraphOverTheta,
    IterationStatus, PinchMeasure, Strip,
};
use qpf_core::harper::{gap_label, harper_lift, label_rotation, GapLabel, HarperParams, TruncatedSpectrum};
use qpf_core::rotnum::{
    boundedness_diagnostic, default_seeds, deviations, monotonicity_probe, symmetric_eps_grid, BoundednessReport,
    DeviationSample, MonotonicityVerdict,
};
use qpf_core::scan::{
    detect_plateaus, sweep_1d, sweep_2d, tongue_boundary, Axis, Boundary, BoundarySearch, PlateauReport, SweepPoint,
    SweepSpec,
};
use qpf_core::RotationEstimate;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{float, to_csv, to_f64_le, to_json, Cell};

/// Rendered result of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub body: Vec<u8>,
    /// Extra files, named by a suffix appended to the output path.
    pub extras: Vec<(String, Vec<u8>)>,
    /// Human-readable summary, one line per result.
    pub summary: Vec<String>,
}

impl Artifact {
    fn new(body: Vec<u8>, summary: Vec<String>) -> Self {
        Artifact { body, extras: Vec::new(), summary }
    }
}

fn render<T: Serialize>(
    format: Format,
    record: &T,
    header: &[&str],
    rows: impl FnOnce() -> Vec<Vec<Cell>>,
) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => to_json(record),
        Format::Csv => to_csv(header, rows()),
    }
}

fn family(cfg: &RunConfig) -> CliResult<FamilySpec> {
    cfg.family.clone().ok_or_else(|| CliError::config("no family given (use --family or a [family] section)"))
}

fn harper_params(cfg: &RunConfig) -> CliResult<HarperParams> {
    match family(cfg)? {
        FamilySpec::Harper { potential, energy, omega } => Ok(HarperParams { potential, energy, omega }),
        other => Err(CliError::config(format!("this command needs the harper family, not {}", other.name()))),
    }
}

fn omega_of(spec: &FamilySpec) -> CliResult<f64> {
    spec.omega().ok_or_else(|| CliError::config("family has no frequency"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoRecord {
    pub family: FamilySpec,
    pub estimate: RotationEstimate,
}

pub fn rho(cfg: &RunConfig) -> CliResult<Artifact> {
    let family = family(cfg)?;
    let estimate = cfg.estimator.build(cfg.seed).estimate(&family.build()?)?;
    let summary = vec![format!("rho = {} ± {}", float(estimate.value), float(estimate.error_radius))];
    let record = RhoRecord { family, estimate };
    let body = render(cfg.format, &record, &["value", "error_radius", "n_used"], || {
        let e = &record.estimate;
        vec![vec![e.value.into(), e.error_radius.into(), e.n_used.into()]]
    })?;
    Ok(Artifact::new(body, summary))
}

/// The default `{±10⁻¹, …, ±10⁻⁶} ∪ {0}` grid, cut at the finest scale an
/// `n`-iterate estimate can resolve: spacing at least `100/n`, i.e. 25×
/// the `1/n` floor of the error radius.
pub fn resolvable_eps_grid(n: u64) -> Vec<f64> {
    let finest = ((n as f64).log10().floor() as i32 - 2).clamp(1, 6);
    symmetric_eps_grid(1, finest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub family: FamilySpec,
    pub verdict: MonotonicityVerdict,
}

pub fn probe(cfg: &RunConfig) -> CliResult<Artifact> {
    let family = family(cfg)?;
    let eps = cfg.probe.eps.clone().unwrap_or_else(|| resolvable_eps_grid(cfg.estimator.n));
    let verdict = monotonicity_probe(&family.build()?, &eps, &cfg.estimator.build(cfg.seed))?;
    let kind = serde_json::to_value(verdict.kind).expect("enum serializes");
    let summary = vec![format!("verdict = {}", kind.as_str().unwrap_or_default())];
    let record = ProbeRecord { family, verdict };
    let body = render(cfg.format, &record, &["eps", "rho", "error_radius"], || {
        record
            .verdict
            .epsilon_grid
            .iter()
            .map(|(e, r)| vec![(*e).into(), r.value.into(), r.error_radius.into()])
            .collect()
    })?;
    Ok(Artifact::new(body, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationsRecord {
    pub family: FamilySpec,
    pub rho: f64,
    /// Whether `rho` was supplied or estimated.
    pub rho_estimated: bool,
    pub samples: Vec<DeviationSample>,
    pub boundedness: Option<BoundednessReport>,
}

pub fn deviations_cmd(cfg: &RunConfig) -> CliResult<Artifact> {
    let family = family(cfg)?;
    let lift = family.build()?;
    let d = &cfg.deviations;
    let (rho, rho_estimated) = match d.rho {
        Some(r) => (r, false),
        None => (cfg.estimator.build(cfg.seed).estimate(&lift)?.value, true),
    };
    let samples = deviations(&lift, rho, (d.theta, d.x), &d.n)?;
    let boundedness = d
        .n_max
        .map(|n_max| {
            let seeds = default_seeds(cfg.estimator.seeds, cfg.seed);
            boundedness_diagnostic(&lift, &seeds, n_max, d.growth_window, Some(rho))
        })
        .transpose()?;
    let sup = samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    let mut summary = vec![format!("sup |D| = {} over {} samples", float(sup), samples.len())];
    if let Some(b) = &boundedness {
        let v = serde_json::to_value(b.verdict).expect("enum serializes");
        summary.push(format!("boundedness = {}", v.as_str().unwrap_or_default()));
    }
    let record = DeviationsRecord { family, rho, rho_estimated, samples, boundedness };
    let body = render(cfg.format, &record, &["n", "theta", "x", "value"], || {
        record.samples.iter().map(|s| vec![s.n.into(), s.theta.into(), s.x.into(), s.value.into()]).collect()
    })?;
    Ok(Artifact::new(body, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    pub plateaus: Vec<PlateauReport>,
}

/// JSON sidecar describing the binary grid file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub spec: SweepSpec,
    /// `[axis1.points, axis2.points]`; cell `(i, j)` is at `i * shape[1] + j`.
    pub shape: [usize; 2],
    /// `"f64_le_row_major"`: little-endian 8-byte IEEE doubles.
    pub layout: String,
    /// Blocks stored back to back, each `shape[0] * shape[1]` values.
    pub fields: Vec<String>,
    pub data_suffix: String,
}

pub const GRID_SUFFIX: &str = ".bin";

fn sweep_spec(cfg: &RunConfig) -> CliResult<SweepSpec> {
    let s = &cfg.sweep;
    let axis2 = match (&s.param2, s.lo2, s.hi2, s.points2) {
        (None, None, None, None) => None,
        (Some(p), Some(lo), Some(hi), Some(n)) => Some(Axis::new(p.clone(), lo, hi, n)),
        _ => return Err(CliError::config("a second axis needs param2, lo2, hi2 and points2")),
    };
    Ok(SweepSpec {
        family: family(cfg)?,
        eps: s.eps,
        axis1: Axis::new(s.param.clone(), s.lo, s.hi, s.points),
        axis2,
        estimator: cfg.estimator.build(cfg.seed),
    })
}

pub fn sweep(cfg: &RunConfig) -> CliResult<Artifact> {
    let spec = sweep_spec(cfg)?;
    if spec.axis2.is_some() {
        return sweep_grid(cfg, spec);
    }
    let omega = omega_of(&spec.family)?;
    let points = sweep_1d(&spec)?;
    let plateaus = detect_plateaus(&points, cfg.sweep.min_width, omega, &cfg.sweep.witness);
    let mut summary =
        vec![format!("swept {} = [{}, {}] at {} points", spec.axis1.param, spec.axis1.lo, spec.axis1.hi, points.len())];
    for p in &plateaus {
        let witness = match p.witness {
            Some(w) => format!("k={} l={} p={} q={} residual={:.3e}", w.k, w.l, w.p, w.q, w.residual),
            None => "no witness".into(),
        };
        summary.push(format!(
            "plateau [{}, {}] rho={} {}{}",
            float(p.lo),
            float(p.hi),
            float(p.value),
            witness,
            if p.violation { " VIOLATION" } else { "" }
        ));
    }
    let record = SweepRecord { spec, points, plateaus };
    let header = [record.spec.axis1.param.as_str(), "rho", "error_radius"];
    let body = render(cfg.format, &record, &header, || {
        record
            .points
            .iter()
            .map(|p| vec![p.param.into(), p.estimate.value.into(), p.estimate.error_radius.into()])
            .collect()
    })?;
    Ok(Artifact::new(body, summary))
}

fn sweep_grid(cfg: &RunConfig, spec: SweepSpec) -> CliResult<Artifact> {
    let grid = sweep_2d(&spec)?;
    let (n1, n2) = grid.shape();
    let summary = vec![format!("swept {n1} x {n2} grid over ({}, {})", grid.axis1.param, grid.axis2.param)];
    let sidecar = GridSidecar {
        spec,
        shape: [n1, n2],
        layout: "f64_le_row_major".into(),
        fields: vec!["rho".into(), "error_radius".into()],
        data_suffix: GRID_SUFFIX.into(),
    };
    let header = [grid.axis1.param.as_str(), grid.axis2.param.as_str(), "rho", "error_radius"];
    let body = render(cfg.format, &sidecar, &header, || {
        (0..n1 * n2)
            .map(|idx| {
                let (i, j) = (idx / n2, idx % n2);
                vec![
                    grid.axis1.value(i).into(),
                    grid.axis2.value(j).into(),
                    grid.rho[idx].into(),
                    grid.error_radius[idx].into(),
                ]
            })
            .collect()
    })?;
    let data = to_f64_le(grid.rho.iter().chain(&grid.error_radius).copied());
    Ok(Artifact { body, extras: vec![(GRID_SUFFIX.into(), data)], summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TongueRecord {
    pub search: BoundarySearch,
    pub boundary: Boundary,
}

pub fn tongue(cfg: &RunConfig) -> CliResult<Artifact> {
    let t = &cfg.tongue;
    let search = BoundarySearch {
        family: family(cfg)?,
        param: t.param.clone(),
        target: t.target,
        lo: t.lo,
        hi: t.hi,
        edge: t.edge,
        tol: t.tol,
        estimator: cfg.estimator.build(cfg.seed),
    };
    let boundary = tongue_boundary(&search)?;
    let summary = vec![format!(
        "{}* = {} (bracket [{}, {}], {} steps)",
        search.param,
        float(boundary.value),
        float(boundary.bracket.0),
        float(boundary.bracket.1),
        boundary.steps
    )];
    let record = TongueRecord { search, boundary };
    let body =
        render(cfg.format, &record, &[record.search.param.as_str(), "bracket_lo", "bracket_hi", "steps"], || {
            let b = &record.boundary;
            vec![vec![b.value.into(), b.bracket.0.into(), b.bracket.1.into(), b.steps.into()]]
        })?;
    Ok(Artifact::new(body, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveLimit {
    pub start: f64,
    pub status: IterationStatus,
    pub steps: usize,
    pub direction: i8,
    pub growth_rate: f64,
    pub last_update: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripRecord {
    pub family: FamilySpec,
    pub grid: usize,
    pub from_below: CurveLimit,
    pub from_above: CurveLimit,
    /// Present when both limits converged and are ordered.
    pub pinch: Option<PinchMeasure>,
    pub pinched: Option<bool>,
    pub minimal: Option<bool>,
}

pub fn strip(cfg: &RunConfig) -> CliResult<Artifact> {
    let family = family(cfg)?;
    let lift = family.build()?;
    let s = &cfg.strip;
    if s.grid == 0 {
        return Err(CliError::config("strip.grid must be positive"));
    }
    let limit = |start: f64| -> CliResult<CurveLimit> {
        let it = iterate_graph_to_limit(&lift, &GraphOverTheta::constant(s.grid, start), s.tol, s.max_iter)?;
        Ok(CurveLimit {
            start,
            status: it.status,
            steps: it.steps,
            direction: it.direction,
            growth_rate: it.growth_rate,
            last_update: it.last_update,
            values: it.graph.values().to_vec(),
        })
    };
    let (from_below, from_above) = (limit(s.below)?, limit(s.above)?);
    let converged = |c: &CurveLimit| c.status == IterationStatus::Converged;
    let strip = if converged(&from_below) && converged(&from_above) {
        Strip::new(GraphOverTheta::new(from_below.values.clone())?, GraphOverTheta::new(from_above.values.clone())?)
            .ok()
    } else {
        None
    };
    let pinch = strip.as_ref().map(pinch_measure);
    let pinched = pinch.map(|p| p.is_pinched(s.pinch_tol));
    let minimal = strip.as_ref().map(|st| st.is_minimal_at(s.radius, s.pinch_tol));
    let mut summary = vec![
        format!("from below: {:?} after {} steps", from_below.status, from_below.steps),
        format!("from above: {:?} after {} steps", from_above.status, from_above.steps),
    ];
    summary.push(match pinch {
        Some(p) => format!("min width {} at theta = {}", float(p.min_width), float(p.theta)),
        None => "no ordered strip".into(),
    });
    let record = StripRecord { family, grid: s.grid, from_below, from_above, pinch, pinched, minimal };
    let body = render(cfg.format, &record, &["theta", "lower", "upper"], || {
        (0..record.grid)
            .map(|i| {
                vec![
                    (i as f64 / record.grid as f64).into(),
                    record.from_below.values[i].into(),
                    record.from_above.values[i].into(),
                ]
            })
            .collect()
    })?;
    Ok(Artifact::new(body, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRecord {
    pub family: FamilySpec,
    pub search: AnnulusSearch,
    pub witness: Option<AnnulusWitness>,
}

pub fn annulus(cfg: &RunConfig) -> CliResult<Artifact> {
    let family = family(cfg)?;
    let a = &cfg.annulus;
    let search =
        AnnulusSearch { candidates: a.candidates, grid: a.grid, max_iter: a.max_iter, strict_tol: a.strict_tol };
    let witness = annulus_witness(&family.build()?, &search)?;
    let summary = vec![match &witness {
        Some(w) => format!(
            "witness N = {}: upper {} (margin {}), lower {} (margin {})",
            w.iterate,
            float(w.upper_height),
            float(w.upper_margin),
            float(w.lower_height),
            float(w.lower_margin)
        ),
        None => "no witness".into(),
    }];
    let record = AnnulusRecord { family, search, witness };
    let header = ["iterate", "upper", "upper_margin", "lower", "lower_margin", "verified_grid"];
    let body = render(cfg.format, &record, &header, || {
        record
            .witness
            .iter()
            .map(|w| {
                vec![
                    w.iterate.into(),
                    w.upper_height.into(),
                    w.upper_margin.into(),
                    w.lower_height.into(),
                    w.lower_margin.into(),
                    w.verified_grid.into(),
                ]
            })
            .collect()
    })?;
    Ok(Artifact::new(body, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsRow {
    pub energy: f64,
    pub rho: f64,
    pub error_radius: f64,
    pub ids: f64,
    pub label: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsRecord {
    pub potential: PeriodicFn,
    pub omega: f64,
    pub size: usize,
    pub phases: usize,
    pub rows: Vec<IdsRow>,
}

pub fn ids(cfg: &RunConfig) -> CliResult<Artifact> {
    let params = harper_params(cfg)?;
    let c = &cfg.ids;
    if c.points < 2 || !(c.e_lo < c.e_hi) {
        return Err(CliError::config("ids needs e_lo < e_hi and at least 2 points"));
    }
    let spectrum = TruncatedSpectrum::compute(&params.potential, params.omega, c.size, c.phases)?;
    let estimator = cfg.estimator.build(cfg.seed);
    let axis = Axis::new("energy", c.e_lo, c.e_hi, c.points);
    let rows = axis
        .values()
        .into_par_iter()
        .map(|energy| {
            let est = estimator.estimate(&harper_lift(&params.at_energy(energy)))?;
            Ok(IdsRow {
                energy,
                rho: est.value,
                error_radius: est.error_radius,
                ids: spectrum.ids(energy).value,
                label: label_rotation(est.value, params.omega, c.label_tol, c.kmax).map(|(k, _)| k),
            })
        })
        .collect::<Result<Vec<_>, qpf_core::Error>>()?;
    let worst = rows.iter().map(|r| (r.rho - r.ids).abs()).fold(0.0, f64::max);
    let summary = vec![format!("{} energies, max |rho - ids| = {}", rows.len(), float(worst))];
    let record = IdsRecord { potential: params.potential, omega: params.omega, size: c.size, phases: c.phases, rows };
    let body = render(cfg.format, &record, &["energy", "rho", "error_radius", "ids", "gap_label"], || {
        record
            .rows
            .iter()
            .map(|r| vec![r.energy.into(), r.rho.into(), r.error_radius.into(), r.ids.into(), r.label.into()])
            .collect()
    })?;
    Ok(Artifact::new(body, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLabelRecord {
    pub potential: PeriodicFn,
    pub omega: f64,
    pub e_lo: f64,
    pub e_hi: f64,
    pub tol: f64,
    pub label: GapLabel,
}

pub fn gap_label_cmd(cfg: &RunConfig) -> CliResult<Artifact> {
    let params = harper_params(cfg)?;
    let g = &cfg.gap_label;
    let label = gap_label(&params, g.e_lo, g.e_hi, g.tol, g.kmax, &cfg.estimator.build(cfg.seed))?;
    let summary = vec![match label.k {
        Some(k) => format!("k = {k} (residual {})", float(label.residual)),
        None => format!("no label (best residual {})", float(label.residual)),
    }];
    let record = GapLabelRecord {
        potential: params.potential,
        omega: params.omega,
        e_lo: g.e_lo,
        e_hi: g.e_hi,
        tol: g.tol,
        label,
    };
    let body = render(cfg.format, &record, &["energy", "rho", "k", "residual"], || {
        let l = &record.label;
        vec![vec![l.energy.into(), l.rotation.value.into(), l.k.into(), l.residual.into()]]
    })?;
    Ok(Artifact::new(body, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpf_core::rotnum::default_eps_grid;

    #[test]
    fn eps_grid_follows_iterate_count() {
        assert_eq!(resolvable_eps_grid(100_000).len(), 7);
        assert_eq!(resolvable_eps_grid(100_000_000), default_eps_grid());
        assert_eq!(resolvable_eps_grid(50), vec![-0.1, 0.0, 0.1]);
    }
}
