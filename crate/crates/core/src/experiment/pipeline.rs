use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    blowup, dichotomy_scan, extract_contact_set, fit_power_law, frequency_profile, l2_average,
    monotonicity_fit, radius_ladder, sanity_inequalities, sup_norms, AnalysisError, BlowupOptions,
    BlowupReference, BlowupStage, DichotomyReport, FaceCell, FrequencyProfile, MonotonicityReport,
    SanityReport,
};
use crate::geometry::{read_field, write_field, FieldSampler, GridSampler, HalfGrid, HemisphereRule, Point, ScalarField, THOB_VERSION};
use crate::nonlinearity::{verify_structure, NonlinearityModel, StructureReport};
use crate::solver::{
    discrete_energy, solve_signorini, BoundaryData, BoundarySpec, KktResiduals, Method, SolveError, SolveReport,
    SolveStatus,
};

use super::plots;
use super::{ExperimentError, RunConfig};

pub const MANIFEST_VERSION: u32 = 1;
pub const CSV_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FIELD_FILE: &str = "field.thob";
pub const FREQUENCY_CSV: &str = "frequency.csv";
pub const DECAY_CSV: &str = "decay.csv";
const STRUCTURE_PROBES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Solve,
    FreeBoundary,
    Frequency,
    Monotonicity,
    Decay,
    Blowup,
    Dichotomy,
    Sanity,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Solve,
        Stage::FreeBoundary,
        Stage::Frequency,
        Stage::Monotonicity,
        Stage::Decay,
        Stage::Blowup,
        Stage::Dichotomy,
        Stage::Sanity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Solve => "solve",
            Stage::FreeBoundary => "free_boundary",
            Stage::Frequency => "frequency",
            Stage::Monotonicity => "monotonicity",
            Stage::Decay => "decay",
            Stage::Blowup => "blowup",
            Stage::Dichotomy => "dichotomy",
            Stage::Sanity => "sanity",
        }
    }
}

/// Which stages to run. `field` replaces the solve stage with a field read
/// from disk.
#[derive(Debug, Clone)]
pub struct Plan {
    pub stages: Vec<Stage>,
    pub field: Option<PathBuf>,
}

impl Plan {
    pub fn full() -> Self {
        Self { stages: Stage::ALL.to_vec(), field: None }
    }

    pub fn only(stages: &[Stage]) -> Self {
        Self { stages: stages.to_vec(), field: None }
    }

    fn wants(&self, s: Stage) -> bool {
        self.stages.contains(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatVersions {
    pub manifest: u32,
    pub thob: u32,
    pub frequency_csv: u32,
    pub decay_csv: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub field: String,
    pub method: Method,
    pub status: SolveStatus,
    pub tol_kkt: f64,
    pub iterations: usize,
    pub linear_iterations: usize,
    pub energy: f64,
    pub kkt: KktResiduals,
    pub thin_nodes: usize,
    pub active_nodes: usize,
    /// Most negative normal flux on the active set.
    pub min_active_flux: Option<f64>,
    pub max_gradient_norm: f64,
    pub exceeds_t_bar: bool,
    pub ellipticity_floor: f64,
    /// Max nodal error against the exact solution, when the data has one.
    pub exact_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundarySummary {
    pub epsilon: f64,
    /// Analysis center: the free-boundary point nearest the requested one.
    pub center: Vec<f64>,
    /// False when no free-boundary point exists and the requested center
    /// was used as is.
    pub detected: bool,
    pub contact_nodes: Vec<usize>,
    pub cells: Vec<FaceCell>,
    pub edge_crossings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySummary {
    pub csv: String,
    pub plot: String,
    pub n_min: f64,
    pub n_max: f64,
    pub gamma: f64,
    pub dropped: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub csv: String,
    pub plot: String,
    pub l2_slope: f64,
    pub sup_slope: f64,
    pub sup_gradient_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupSummary {
    pub data: String,
    pub plot: String,
    pub fields: Vec<String>,
    pub stages: Vec<BlowupStage>,
    pub final_degree: Option<f64>,
    pub c1_nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_versions: FormatVersions,
    pub config_digest: String,
    pub config: String,
    pub seed: u64,
    pub model: String,
    pub solver: Option<SolverSummary>,
    pub structure: Option<StructureReport>,
    pub free_boundary: Option<FreeBoundarySummary>,
    pub frequency: Option<FrequencySummary>,
    pub monotonicity: Option<MonotonicityReport>,
    /// The same fit restricted to radii of at least eight grid spacings.
    pub monotonicity_trusted: Option<MonotonicityReport>,
    pub decay: Option<DecaySummary>,
    pub blowup: Option<BlowupSummary>,
    pub dichotomy: Option<DichotomyReport>,
    pub sanity: Option<SanityReport>,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
    pub stage_failures: Vec<StageFailure>,
}

impl RunManifest {
    pub fn solver_status(&self) -> Option<SolveStatus> {
        self.solver.as_ref().map(|s| s.status)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct FrequencyCsvRow {
    rho: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "N")]
    n: f64,
    doubling: f64,
}

/// One radius of the decay table, as written to the decay CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub rho: f64,
    pub l2norm: f64,
    pub supnorm: f64,
    pub supgrad: f64,
}

struct Outputs {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<String, ExperimentError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| ExperimentError::Output { path, source })?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact { path: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(name.into())
    }

    fn field(&mut self, name: &str, field: &ScalarField) -> Result<String, ExperimentError> {
        let mut bytes = Vec::new();
        write_field(&mut bytes, field).expect("writing to memory");
        self.write(name, &bytes)
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).expect("writing to memory");
    }
    for r in rows {
        w.serialize(r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Runs `plan` for `loaded` and writes all artifacts plus the manifest into
/// the configured output directory. Stage failures after the solve are
/// recorded in the manifest; a failed solve stops the analysis.
pub fn execute(cfg: &RunConfig, plan: &Plan) -> Result<RunManifest, ExperimentError> {
    cfg.validate()?;
    let model = cfg.nonlinearity.build().map_err(|e| ExperimentError::Config(format!("nonlinearity: {e}")))?;
    let data = BoundaryData::from_spec(&cfg.boundary, cfg.dim).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let grid = Arc::new(
        HalfGrid::new(cfg.dim, &cfg.nodes_per_axis).map_err(|e| ExperimentError::Config(format!("nodes_per_axis: {e}")))?,
    );
    std::fs::create_dir_all(&cfg.output)
        .map_err(|source| ExperimentError::Output { path: cfg.output.clone(), source })?;
    let mut out = Outputs { dir: cfg.output.clone(), artifacts: Vec::new() };
    let config_name = out.write("config.json", cfg.to_json().as_bytes())?;

    let mut m = RunManifest {
        format_versions: FormatVersions {
            manifest: MANIFEST_VERSION,
            thob: THOB_VERSION,
            frequency_csv: CSV_VERSION,
            decay_csv: CSV_VERSION,
        },
        config_digest: cfg.digest(),
        config: config_name,
        seed: cfg.seed,
        model: model.name().into(),
        solver: None,
        structure: None,
        free_boundary: None,
        frequency: None,
        monotonicity: None,
        monotonicity_trusted: None,
        decay: None,
        blowup: None,
        dichotomy: None,
        sanity: None,
        artifacts: Vec::new(),
        timings: Vec::new(),
        stage_failures: Vec::new(),
    };

    let clock = Instant::now();
    let solved = match &plan.field {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| ExperimentError::Field { path: path.clone(), reason: e.to_string() })?;
            let u = read_field(std::io::BufReader::new(file))
                .map_err(|e| ExperimentError::Field { path: path.clone(), reason: e.to_string() })?;
            if u.grid().nodes_per_axis() != grid.nodes_per_axis() {
                return Err(ExperimentError::Field {
                    path: path.clone(),
                    reason: format!("grid {:?} does not match the configured {:?}", u.grid().nodes_per_axis(), cfg.nodes_per_axis),
                });
            }
            Some(u)
        }
        None => {
            let solve_cfg = &cfg.solver;
            let (u, report, failure) = match solve_signorini(&grid, &model, &data, solve_cfg) {
                Ok((u, r)) => (u, r, None),
                Err(SolveError::NonConverged { field, report }) => {
                    let msg = format!("not converged after {} iterations", report.iterations);
                    (*field, *report, Some(msg))
                }
                Err(SolveError::IllPosed { reason, field, report }) => (*field, *report, Some(reason)),
                Err(e) => return Err(ExperimentError::Config(e.to_string())),
            };
            let name = out.field(FIELD_FILE, &u)?;
            m.solver = Some(summarize(&u, &report, &model, &data, name));
            m.timings.push(Timing { stage: Stage::Solve.name().into(), seconds: clock.elapsed().as_secs_f64() });
            if let Some(message) = failure {
                m.stage_failures.push(StageFailure { stage: Stage::Solve.name().into(), message });
                None
            } else {
                Some(u)
            }
        }
    };

    if let Some(u) = solved {
        let probe_radius = m.solver.as_ref().map_or(1.0, |s| s.max_gradient_norm).max(1e-2);
        m.structure = verify_structure(&model, cfg.dim, probe_radius, STRUCTURE_PROBES, cfg.seed).ok();
        analyze(cfg, plan, &model, u, &mut out, &mut m)?;
    }

    m.artifacts = out.artifacts.clone();
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    let path = cfg.output.join(MANIFEST_FILE);
    std::fs::write(&path, text).map_err(|source| ExperimentError::Output { path, source })?;
    Ok(m)
}

fn summarize(u: &ScalarField, r: &SolveReport, model: &NonlinearityModel, data: &BoundaryData, field: String) -> SolverSummary {
    let active: std::collections::HashSet<usize> = r.active_set.iter().copied().collect();
    let min_active_flux = r
        .thin_nodes
        .iter()
        .zip(&r.normal_flux)
        .filter(|(i, _)| active.contains(i))
        .map(|(_, &s)| s)
        .reduce(f64::min);
    let exact_error = data.exact_solution().map(|s| {
        let g = u.grid();
        u.values().iter().enumerate().map(|(i, v)| (v - s.value(&g.coords(i))).abs()).fold(0.0, f64::max)
    });
    SolverSummary {
        field,
        method: r.method,
        status: r.status,
        tol_kkt: r.tol_kkt,
        iterations: r.iterations,
        linear_iterations: r.linear_iterations,
        energy: discrete_energy(u, model),
        kkt: r.kkt,
        thin_nodes: r.thin_nodes.len(),
        active_nodes: r.active_set.len(),
        min_active_flux,
        max_gradient_norm: r.max_gradient_norm,
        exceeds_t_bar: r.exceeds_t_bar,
        ellipticity_floor: r.ellipticity_floor,
        exact_error,
    }
}

/// Runs `f` as stage `stage`, recording its timing and, on error, a failure.
fn stage<T>(m: &mut RunManifest, stage: Stage, f: impl FnOnce() -> Result<T, AnalysisError>) -> Option<T> {
    let t = Instant::now();
    let r = f();
    m.timings.push(Timing { stage: stage.name().into(), seconds: t.elapsed().as_secs_f64() });
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            m.stage_failures.push(StageFailure { stage: stage.name().into(), message: e.to_string() });
            None
        }
    }
}

fn analyze(
    cfg: &RunConfig,
    plan: &Plan,
    model: &NonlinearityModel,
    u: ScalarField,
    out: &mut Outputs,
    m: &mut RunManifest,
) -> Result<(), ExperimentError> {
    let a = &cfg.analysis;
    let needs_center = [Stage::Frequency, Stage::Monotonicity, Stage::Decay, Stage::Blowup, Stage::Dichotomy, Stage::Sanity]
        .iter()
        .any(|&s| plan.wants(s));
    if !plan.wants(Stage::FreeBoundary) && !needs_center {
        return Ok(());
    }
    let tol = cfg.solver.tolerance_for(model);
    let epsilon = a.epsilon_contact.unwrap_or(10.0 * tol);
    let requested = cfg.requested_center();
    let Some(fb) = stage(m, Stage::FreeBoundary, || extract_contact_set(&u, epsilon)) else {
        return Ok(());
    };
    let found = fb.center(a.center_rule, &requested);
    let center: Point = found.unwrap_or(requested);
    m.free_boundary = Some(FreeBoundarySummary {
        epsilon,
        center: center[..cfg.dim].to_vec(),
        detected: found.is_some(),
        contact_nodes: fb.contact_nodes.clone(),
        cells: fb.free_boundary_cells.clone(),
        edge_crossings: fb.edge_crossings.iter().map(|c| c.point.clone()).collect(),
    });
    if !needs_center {
        return Ok(());
    }

    let rule = HemisphereRule::default_for(cfg.dim).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let radii = radius_ladder(a.rho_min, a.rho_max).map_err(|e| ExperimentError::Config(format!("analysis: {e}")))?;
    let sampler = GridSampler::new(u);

    let mut profile: Option<FrequencyProfile> = None;
    if plan.wants(Stage::Frequency) || plan.wants(Stage::Monotonicity) {
        profile = stage(m, Stage::Frequency, || frequency_profile(&sampler, model, &rule, &center, &radii));
    }
    if let (true, Some(p)) = (plan.wants(Stage::Frequency), &profile) {
        let rows: Vec<FrequencyCsvRow> =
            p.rows.iter().map(|r| FrequencyCsvRow { rho: r.rho, d: r.d, h: r.h, n: r.n, doubling: r.doubling }).collect();
        let csv = out.write(FREQUENCY_CSV, &csv_bytes(&rows, &["rho", "D", "H", "N", "doubling"]))?;
        let plot = out.write("frequency.gp", plots::frequency_script(FREQUENCY_CSV).as_bytes())?;
        m.frequency =
            Some(FrequencySummary { csv, plot, n_min: p.n_min, n_max: p.n_max, gamma: p.gamma, dropped: p.dropped.clone() });
    }
    if plan.wants(Stage::Monotonicity) {
        if let Some(p) = &profile {
            m.monotonicity = stage(m, Stage::Monotonicity, || monotonicity_fit(p, a.alpha, a.slack, a.c_max));
            let mut trusted = p.clone();
            trusted.rows.retain(|r| !r.untrusted);
            m.monotonicity_trusted = monotonicity_fit(&trusted, a.alpha, a.slack, a.c_max).ok();
        }
    }

    if plan.wants(Stage::Decay) {
        let rows = stage(m, Stage::Decay, || decay_table(&sampler, &rule, &center, &radii));
        if let Some((rows, slopes)) = rows {
            let csv = out.write(DECAY_CSV, &csv_bytes(&rows, &["rho", "l2norm", "supnorm", "supgrad"]))?;
            let plot = out.write("decay.gp", plots::decay_script(DECAY_CSV, slopes).as_bytes())?;
            m.decay =
                Some(DecaySummary { csv, plot, l2_slope: slopes[0], sup_slope: slopes[1], sup_gradient_slope: slopes[2] });
        }
    }

    if plan.wants(Stage::Blowup) && a.blowup {
        let reference = blowup_reference(cfg, sampler.field().grid(), &requested);
        if let Err(message) = &reference {
            m.stage_failures.push(StageFailure { stage: "blowup_reference".into(), message: message.clone() });
        }
        let reference = reference.ok();
        let options = BlowupOptions::dyadic(cfg.dim);
        let result = stage(m, Stage::Blowup, || {
            let r = reference.as_ref().map(|(s, c)| BlowupReference { field: s, center: *c });
            blowup(&sampler, &rule, &center, &options, r)
        });
        if let Some(b) = result {
            let mut fields = Vec::new();
            for (j, f) in b.fields.iter().enumerate() {
                fields.push(out.field(&format!("blowup_{j}.thob"), f)?);
            }
            let data = out.write("blowup.dat", plots::blowup_data(&b.stages).as_bytes())?;
            let plot = out.write("blowup.gp", plots::blowup_script("blowup.dat").as_bytes())?;
            let c1_nonincreasing = b.stages.windows(2).all(|w| w[1].c1_distance <= w[0].c1_distance);
            m.blowup = Some(BlowupSummary {
                data,
                plot,
                fields,
                final_degree: b.final_degree(),
                stages: b.stages,
                c1_nonincreasing,
            });
        }
    }

    if plan.wants(Stage::Dichotomy) {
        m.dichotomy = stage(m, Stage::Dichotomy, || dichotomy_scan(&sampler, &rule, &center, a.delta, &radii));
    }
    if plan.wants(Stage::Sanity) {
        m.sanity = stage(m, Stage::Sanity, || sanity_inequalities(&sampler, &rule, &center, &radii));
    }
    Ok(())
}

/// Norms on each radius and the fitted slopes of the L2 average, sup and
/// sup-gradient columns.
pub fn decay_table(
    u: &dyn FieldSampler,
    rule: &HemisphereRule,
    center: &[f64],
    radii: &[f64],
) -> Result<(Vec<DecayRow>, [f64; 3]), AnalysisError> {
    if radii.len() < 5 {
        return Err(AnalysisError::TooFewRadii { found: radii.len(), needed: 5 });
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &rho in radii {
        let l2norm = l2_average(u, rule, center, rho)?;
        let (supnorm, supgrad) = sup_norms(u, rule, center, rho)?;
        rows.push(DecayRow { rho, l2norm, supnorm, supgrad });
    }
    let mut slopes = [0.0; 3];
    let columns: [fn(&DecayRow) -> f64; 3] = [|r| r.l2norm, |r| r.supnorm, |r| r.supgrad];
    for (slot, col) in slopes.iter_mut().zip(columns) {
        let values: Vec<f64> = rows.iter().map(col).collect();
        *slot = fit_power_law(radii, &values)?.slope;
    }
    Ok((rows, slopes))
}

/// Quadratic-model solve with unit oracle trace on the same grid, and its
/// own free-boundary point.
fn blowup_reference(cfg: &RunConfig, grid: &Arc<HalfGrid>, requested: &Point) -> Result<(GridSampler, Point), String> {
    let axis = match &cfg.boundary {
        BoundarySpec::OracleTrace { extrusion_axis, .. } => *extrusion_axis,
        _ => 1,
    };
    let spec = BoundarySpec::OracleTrace { amplitude: 1.0, extrusion_axis: axis };
    let data = BoundaryData::from_spec(&spec, cfg.dim).map_err(|e| e.to_string())?;
    let quadratic = NonlinearityModel::quadratic();
    let (u, report) = solve_signorini(grid, &quadratic, &data, &cfg.solver).map_err(|e| e.to_string())?;
    let fb = extract_contact_set(&u, 10.0 * report.tol_kkt).map_err(|e| e.to_string())?;
    let c = fb.center(cfg.analysis.center_rule, requested).ok_or("reference has no free boundary")?;
    Ok((GridSampler::new(u), c))
}

/// Checks that every artifact listed in the manifest in `dir` exists with
/// the recorded size and digest, that field files round-trip bit-exactly
/// and that CSV files carry their fixed headers. Returns the problems found.
pub fn check_manifest(dir: &Path) -> Result<Vec<String>, ExperimentError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| ExperimentError::Output { path: path.clone(), source })?;
    let m: RunManifest = serde_json::from_str(&text)
        .map_err(|e| ExperimentError::Field { path: path.clone(), reason: e.to_string() })?;
    let mut problems = Vec::new();
    let mut referenced: Vec<&str> = vec![&m.config];
    if let Some(s) = &m.solver {
        referenced.push(&s.field);
    }
    if let Some(f) = &m.frequency {
        referenced.extend([f.csv.as_str(), f.plot.as_str()]);
    }
    if let Some(d) = &m.decay {
        referenced.extend([d.csv.as_str(), d.plot.as_str()]);
    }
    if let Some(b) = &m.blowup {
        referenced.extend([b.data.as_str(), b.plot.as_str()]);
        referenced.extend(b.fields.iter().map(String::as_str));
    }
    for r in referenced {
        if !m.artifacts.iter().any(|a| a.path == r) {
            problems.push(format!("{r}: referenced but not listed as an artifact"));
        }
    }
    for a in &m.artifacts {
        let bytes = match std::fs::read(dir.join(&a.path)) {
            Ok(b) => b,
            Err(e) => {
                problems.push(format!("{}: {e}", a.path));
                continue;
            }
        };
        if bytes.len() as u64 != a.bytes || sha256_hex(&bytes) != a.sha256 {
            problems.push(format!("{}: contents differ from the manifest", a.path));
            continue;
        }
        if a.path.ends_with(".thob") {
            match read_field(bytes.as_slice()) {
                Ok(f) => {
                    let mut again = Vec::new();
                    write_field(&mut again, &f).expect("writing to memory");
                    if again != bytes {
                        problems.push(format!("{}: does not round-trip", a.path));
                    }
                }
                Err(e) => problems.push(format!("{}: {e}", a.path)),
            }
        }
        let header = match a.path.as_str() {
            FREQUENCY_CSV => Some("rho,D,H,N,doubling"),
            DECAY_CSV => Some("rho,l2norm,supnorm,supgrad"),
            _ => None,
        };
        if let Some(h) = header {
            if !bytes.starts_with(format!("{h}\n").as_bytes()) {
                problems.push(format!("{}: header is not `{h}`", a.path));
            }
            let mut rd = csv::Reader::from_reader(bytes.as_slice());
            for rec in rd.records() {
                match rec {
                    Ok(r) if r.iter().all(|x| x.parse::<f64>().is_ok()) => {}
                    _ => {
                        problems.push(format!("{}: unparsable row", a.path));
                        break;
                    }
                }
            }
        }
    }
    Ok(problems)
}
