//! Batch analysis: ingest traces, circle-fit each, assemble sweeps, fit the
//! loss model per resonator and summarize per sample.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circle::{bootstrap_sigma, extract_quality_factors, ResonanceTrace};
use crate::constants::{POWER_SWEEP_TEMPERATURE, TANTALUM_TC};
use crate::error::{Error, IoError, Result};
use crate::io::{self, LabeledTrace, TraceArchive, TraceMetadata};
use crate::physics::{LossModelParams, PhotonNumberConvention};
use crate::report::{
    FailureRecord, FitReport, Provenance, ResonatorReport, TraceFit, REPORT_SCHEMA_VERSION,
};
use crate::sweep::{
    fit_power_sweep, fit_temperature_sweep, summarize_sample, FitOptions, FixedValues, LossParam,
    SweepDataset, SweepKind, SweepPoint,
};
use crate::synth::{linspace, synthesize_power_sweep_traces, ChipSpec, PowerSweepOptions};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "RESLOSS_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub t_c: f64,
    /// Temperature for traces without one in their metadata, K.
    pub temperature_k: Option<f64>,
    /// Power for traces without one in their metadata, dBm at the resonator.
    pub p_app_dbm: Option<f64>,
    pub photon_prefactor: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            t_c: TANTALUM_TC,
            temperature_k: None,
            p_app_dbm: None,
            photon_prefactor: PhotonNumberConvention::default().prefactor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Free parameters; the sweep-type default when absent.
    pub free: Option<Vec<LossParam>>,
    /// Values of frozen parameters.
    pub fixed: FixedValues,
    pub auto_freeze_beta: bool,
    pub max_iterations: usize,
    pub min_decades: f64,
    /// Floor on σ_Qi relative to Q_i.
    pub min_relative_sigma: f64,
    /// Residual-bootstrap resamples per trace for σ_Qi; 0 uses the analytic estimate.
    pub bootstrap: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        let base = FitOptions::power_sweep();
        Self {
            free: None,
            fixed: base.fixed,
            auto_freeze_beta: base.auto_freeze_beta,
            max_iterations: base.max_iterations,
            min_decades: base.min_decades,
            min_relative_sigma: 1e-3,
            bootstrap: 0,
        }
    }
}

/// Batch-run configuration, usually loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Paths or glob patterns of trace files.
    pub inputs: Vec<String>,
    pub sweep: SweepKind,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub seed: u64,
    pub constants: Constants,
    pub fit: FitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            sweep: SweepKind::PowerSweep,
            out: None,
            jobs: 0,
            seed: 0,
            constants: Constants::default(),
            fit: FitConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads a TOML file; relative input patterns resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| IoError::Os {
            path: path.into(),
            source: e,
        })?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for input in &mut config.inputs {
            if Path::new(input.as_str()).is_relative() {
                *input = base.join(&*input).to_string_lossy().into_owned();
            }
        }
        if let Some(out) = &config.out {
            if out.is_relative() {
                config.out = Some(base.join(out));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.constants;
        if self.inputs.is_empty() {
            return Err(Error::Config("no inputs given".into()));
        }
        if !(c.t_c > 0.0 && c.t_c.is_finite())
            || !(c.photon_prefactor > 0.0 && c.photon_prefactor.is_finite())
        {
            return Err(Error::Config(
                "t_c and photon_prefactor must be positive".into(),
            ));
        }
        if c.temperature_k.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("temperature_k must be positive".into()));
        }
        let f = &self.fit;
        if !(f.min_relative_sigma >= 0.0) || f.max_iterations == 0 {
            return Err(Error::Config("invalid fit limits".into()));
        }
        if let Some(free) = &f.free {
            if free.is_empty() {
                return Err(Error::Config(
                    "fit.free must name at least one parameter".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        let mut opts = match self.sweep {
            SweepKind::PowerSweep => FitOptions::power_sweep(),
            SweepKind::TemperatureSweep => FitOptions::temperature_sweep(),
        };
        if let Some(free) = &self.fit.free {
            opts.free = LossParam::ALL
                .iter()
                .copied()
                .filter(|p| free.contains(p))
                .collect();
        }
        opts.fixed = self.fit.fixed;
        opts.max_iterations = self.fit.max_iterations;
        opts.min_decades = self.fit.min_decades;
        opts.auto_freeze_beta = self.fit.auto_freeze_beta && self.sweep == SweepKind::PowerSweep;
        opts
    }

    /// SHA-256 over the canonical JSON form, ignoring output location and
    /// worker count.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            out: None,
            jobs: 0,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn photon_convention(&self) -> PhotonNumberConvention {
        PhotonNumberConvention {
            prefactor: self.constants.photon_prefactor,
        }
    }
}

fn generated_unix() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        })
}

fn derived_seed(seed: u64, sample: &str, resonator: &str, k: usize) -> u64 {
    let digest = Sha256::digest(format!("{seed}/{sample}/{resonator}/{k}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("eight bytes"))
}

struct ResonatorJob {
    sample_id: String,
    resonator_id: String,
    traces: Vec<ResonanceTrace>,
}

fn geometric_mean(values: &[f64]) -> f64 {
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn build_dataset(config: &RunConfig, fits: &[(TraceFit, f64)]) -> SweepDataset {
    let f0 = median(&fits.iter().map(|(t, _)| t.circle.f_r).collect::<Vec<_>>());
    let mut data = match config.sweep {
        SweepKind::PowerSweep => {
            let points = fits
                .iter()
                .map(|(t, sigma)| SweepPoint {
                    x: t.photon_number,
                    q_i: t.circle.q_i,
                    sigma_qi: *sigma,
                    branch: 0,
                })
                .collect();
            let mut d = SweepDataset::power_sweep(points, f0);
            let temps: Vec<f64> = fits.iter().map(|(t, _)| t.temperature_k).collect();
            d.fixed_temperature = Some(temps.iter().sum::<f64>() / temps.len() as f64);
            d
        }
        SweepKind::TemperatureSweep => {
            // Branches are the distinct drive powers, in increasing order.
            let mut powers: Vec<f64> = fits
                .iter()
                .map(|(t, _)| (t.p_app_dbm * 100.0).round() / 100.0)
                .collect();
            powers.sort_by(f64::total_cmp);
            powers.dedup();
            let branch_of = |p: f64| {
                powers
                    .iter()
                    .position(|q| *q == (p * 100.0).round() / 100.0)
                    .unwrap_or(0)
            };
            let mut branch_n: Vec<Vec<f64>> = vec![Vec::new(); powers.len()];
            let points = fits
                .iter()
                .map(|(t, sigma)| {
                    let b = branch_of(t.p_app_dbm);
                    branch_n[b].push(t.photon_number);
                    SweepPoint {
                        x: t.temperature_k,
                        q_i: t.circle.q_i,
                        sigma_qi: *sigma,
                        branch: b,
                    }
                })
                .collect();
            let fixed_n = branch_n.iter().map(|n| geometric_mean(n)).collect();
            SweepDataset::temperature_sweep(points, fixed_n, f0)
        }
    };
    data.t_c = config.constants.t_c;
    data
}

fn process_resonator(
    config: &RunConfig,
    job: ResonatorJob,
) -> (ResonatorReport, Vec<FailureRecord>) {
    let mut failures = Vec::new();
    let fail = |stage: &str, message: String| FailureRecord {
        sample_id: job.sample_id.clone(),
        resonator_id: job.resonator_id.clone(),
        stage: stage.into(),
        message,
    };
    let convention = config.photon_convention();
    let mut fits: Vec<(TraceFit, f64)> = Vec::new();
    for (k, trace) in job.traces.iter().enumerate() {
        let p_dbm = trace.context.p_app_dbm();
        let temp = trace.context.temperature;
        let circle = match extract_quality_factors(trace) {
            Ok(c) => c,
            Err(e) => {
                failures.push(fail("circle", format!("{p_dbm:.2} dBm, {temp} K: {e}")));
                continue;
            }
        };
        let n = match convention.photon_number(
            trace.context.p_app,
            circle.f_r,
            circle.q_l,
            circle.q_c_mag,
        ) {
            Ok(n) => n,
            Err(e) => {
                failures.push(fail("circle", format!("{p_dbm:.2} dBm, {temp} K: {e}")));
                continue;
            }
        };
        let mut sigma = circle.sigma.q_i;
        if config.fit.bootstrap > 0 {
            let seed = derived_seed(config.seed, &job.sample_id, &job.resonator_id, k);
            match bootstrap_sigma(trace, &circle, config.fit.bootstrap, seed) {
                Ok(s) => sigma = s.q_i,
                Err(e) => failures.push(fail("circle", format!("{p_dbm:.2} dBm bootstrap: {e}"))),
            }
        }
        let sigma = sigma.max(config.fit.min_relative_sigma * circle.q_i);
        fits.push((
            TraceFit {
                p_app_dbm: p_dbm,
                temperature_k: temp,
                photon_number: n,
                circle,
            },
            sigma,
        ));
    }

    let mut report = ResonatorReport {
        sample_id: job.sample_id.clone(),
        resonator_id: job.resonator_id.clone(),
        traces: fits.iter().map(|(t, _)| t.clone()).collect(),
        dataset: None,
        fit: None,
    };
    if fits.is_empty() {
        failures.push(fail("sweep", "no usable traces".into()));
        return (report, failures);
    }
    let data = build_dataset(config, &fits);
    let options = config.fit_options();
    let outcome = match config.sweep {
        SweepKind::PowerSweep => fit_power_sweep(&data, &options),
        SweepKind::TemperatureSweep => fit_temperature_sweep(&data, &options),
    };
    match outcome {
        Ok(fit) => report.fit = Some(fit),
        Err(e) => failures.push(fail("sweep", e.to_string())),
    }
    report.dataset = Some(data);
    (report, failures)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Runs the full analysis. Fit failures are recorded in the report rather
/// than returned; I/O and configuration problems are errors.
pub fn run_batch(config: &RunConfig) -> Result<FitReport> {
    config.validate()?;
    let files = io::expand_inputs(&config.inputs)?;
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no input files match {:?}",
            config.inputs
        )));
    }
    let defaults = TraceMetadata {
        p_app_dbm: config.constants.p_app_dbm,
        temperature_k: config.constants.temperature_k,
        resonator_id: None,
        sample_id: None,
    };
    let pool = thread_pool(config.jobs)?;
    pool.install(|| {
        let labeled: Vec<LabeledTrace> = files
            .par_iter()
            .map(|p| io::ingest_trace_file(p, &defaults))
            .collect::<std::result::Result<Vec<_>, IoError>>()?
            .into_iter()
            .flatten()
            .collect();

        let mut groups: BTreeMap<(String, String), Vec<ResonanceTrace>> = BTreeMap::new();
        for t in labeled {
            groups
                .entry((t.sample_id, t.resonator_id))
                .or_default()
                .push(t.trace);
        }
        let jobs: Vec<ResonatorJob> = groups
            .into_iter()
            .map(|((sample_id, resonator_id), mut traces)| {
                traces.sort_by(|a, b| {
                    (a.context.temperature, a.context.p_app)
                        .partial_cmp(&(b.context.temperature, b.context.p_app))
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                ResonatorJob {
                    sample_id,
                    resonator_id,
                    traces,
                }
            })
            .collect();

        let mut results: Vec<(ResonatorReport, Vec<FailureRecord>)> = jobs
            .into_par_iter()
            .map(|job| process_resonator(config, job))
            .collect();
        results.sort_by(|a, b| {
            (&a.0.sample_id, &a.0.resonator_id).cmp(&(&b.0.sample_id, &b.0.resonator_id))
        });

        let mut resonators = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for (r, f) in results {
            resonators.push(r);
            failures.extend(f);
        }

        let mut by_sample: BTreeMap<&str, (Vec<_>, Vec<_>)> = BTreeMap::new();
        for r in &resonators {
            if let (Some(fit), Some(data)) = (&r.fit, &r.dataset) {
                let entry = by_sample.entry(r.sample_id.as_str()).or_default();
                entry.0.push(fit.clone());
                entry.1.push(data.clone());
            }
        }
        let mut samples = Vec::new();
        for (id, (fits, data)) in by_sample {
            match summarize_sample(id, &fits, &data) {
                Ok(s) => samples.push(s),
                Err(e) => failures.push(FailureRecord {
                    sample_id: id.into(),
                    resonator_id: String::new(),
                    stage: "summary".into(),
                    message: e.to_string(),
                }),
            }
        }

        Ok(FitReport {
            schema_version: REPORT_SCHEMA_VERSION,
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME").into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                config_hash: config.hash(),
                generated_unix: generated_unix(),
            },
            sweep: config.sweep,
            resonators,
            samples,
            failures,
        })
    })
}

fn file_stem_for(sample: &str, resonator: &str) -> String {
    let clean = |s: &str| {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect::<String>()
    };
    format!("{}__{}", clean(sample), clean(resonator))
}

/// Creates `out` for writing. An existing non-empty directory is refused
/// unless `force` is set.
pub fn prepare_output_dir(out: &Path, force: bool) -> Result<()> {
    let occupied = out.exists()
        && fs::read_dir(out)
            .map(|mut d| d.next().is_some())
            .unwrap_or(true);
    if occupied && !force {
        return Err(Error::Config(format!(
            "output directory {} already exists; pass --force to overwrite",
            out.display()
        )));
    }
    fs::create_dir_all(out).map_err(|e| IoError::Os {
        path: out.into(),
        source: e,
    })?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| IoError::Os {
        path: path.into(),
        source: e,
    })?;
    Ok(())
}

/// Writes `report.json`, `table.txt` and plot-data files under `out`.
pub fn write_outputs(report: &FitReport, out: &Path) -> Result<()> {
    report.save(&out.join("report.json"))?;
    write_text(&out.join("table.txt"), &crate::report::emit_table(report))?;
    let plots = out.join("plots");
    fs::create_dir_all(&plots).map_err(|e| IoError::Os {
        path: plots.clone(),
        source: e,
    })?;

    for r in &report.resonators {
        let Some(data) = &r.dataset else { continue };
        let stem = file_stem_for(&r.sample_id, &r.resonator_id);
        let mut text = String::from("x\tq_i\tsigma_qi\tbranch_n\n");
        for (i, p) in data.points.iter().enumerate() {
            let (n, _) = data.operating_point(i);
            let _ = writeln!(text, "{:e}\t{:e}\t{:e}\t{:e}", p.x, p.q_i, p.sigma_qi, n);
        }
        write_text(&plots.join(format!("{stem}.data.tsv")), &text)?;

        let Some(fit) = &r.fit else { continue };
        let mut model = String::from("x\tq_i_model\tbranch_n\n");
        let (lo, hi) = data.x_range();
        match data.kind {
            SweepKind::PowerSweep => {
                let t = data.fixed_temperature.unwrap_or(POWER_SWEEP_TEMPERATURE);
                for e in linspace(lo.log10(), hi.log10(), 200) {
                    let n = 10f64.powf(e);
                    if let Ok(q) = fit.model_qi(n, t) {
                        let _ = writeln!(model, "{n:e}\t{q:e}\t{n:e}");
                    }
                }
            }
            SweepKind::TemperatureSweep => {
                for &n in &data.fixed_n {
                    for t in linspace(lo, hi, 200) {
                        if let Ok(q) = fit.model_qi(n, t) {
                            let _ = writeln!(model, "{t:e}\t{q:e}\t{n:e}");
                        }
                    }
                }
            }
        }
        write_text(&plots.join(format!("{stem}.model.tsv")), &model)?;
    }

    let mut quartiles =
        String::from("sample_id\tq1\tmedian\tq3\twhisker_low\twhisker_high\toutliers\n");
    for s in &report.samples {
        let b = &s.q_i_lp_box;
        let outliers: Vec<String> = b.outliers.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(
            quartiles,
            "{}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{}",
            s.sample_id,
            b.q1,
            b.median,
            b.q3,
            b.whisker_low,
            b.whisker_high,
            outliers.join(",")
        );
    }
    write_text(&plots.join("quartiles.tsv"), &quartiles)
}

/// One sample of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePreset {
    pub id: String,
    pub f_delta_tls0: f64,
    pub n_c: f64,
    pub beta: f64,
    pub delta_qp0: f64,
    pub delta_other: f64,
}

impl SamplePreset {
    /// Preset from a TLS loss tangent and a high-power Q_i, with n_c = 2 and β = 0.5.
    pub fn from_loss(id: &str, f_delta_tls0: f64, q_i_hp: f64) -> Self {
        Self {
            id: id.into(),
            f_delta_tls0,
            n_c: 2.0,
            beta: 0.5,
            delta_qp0: 5e-3,
            delta_other: 1.0 / q_i_hp,
        }
    }

    /// Reference samples: (id, Fδ⁰_TLS, high-power Q_i).
    pub fn reference_set() -> Vec<Self> {
        [
            ("R-L", 2.86e-6, 2.29e6),
            ("R-LA", 1.11e-6, 1.57e6),
            ("T-SA", 2.26e-6, 1.48e6),
            ("T-L", 1.17e-6, 1.68e6),
            ("T-LA1", 0.89e-6, 5.38e6),
            ("T-LA2", 0.58e-6, 13.36e6),
        ]
        .iter()
        .map(|(id, f, q)| Self::from_loss(id, *f, *q))
        .collect()
    }

    pub fn reference(id: &str) -> Option<Self> {
        Self::reference_set().into_iter().find(|p| p.id == id)
    }

    fn params(
        &self,
        f0: f64,
        t_c: f64,
    ) -> std::result::Result<LossModelParams, crate::error::PhysicsError> {
        LossModelParams::new(
            self.f_delta_tls0,
            self.n_c,
            self.beta,
            self.delta_qp0,
            self.delta_other,
            t_c,
            f0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    Csv,
    Touchstone,
    Archive,
}

/// Synthetic measurement campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub samples: Vec<SamplePreset>,
    pub chip: ChipSpec,
    pub sweep: SweepKind,
    /// Drive powers of a power sweep, dBm.
    pub powers_dbm: Vec<f64>,
    /// Branch powers of a temperature sweep, dBm.
    pub branch_powers_dbm: Vec<f64>,
    pub temperatures_k: Vec<f64>,
    pub snr_db: f64,
    pub points: usize,
    /// Log-normal resonator-to-resonator spread of Fδ⁰_TLS and δ_other.
    pub spread: f64,
    pub format: CorpusFormat,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        let ids = ["T-LA1", "T-LA2"];
        Self {
            samples: ids
                .iter()
                .filter_map(|id| SamplePreset::reference(id))
                .collect(),
            chip: ChipSpec::default(),
            sweep: SweepKind::PowerSweep,
            powers_dbm: linspace(-162.0, -72.0, 19),
            branch_powers_dbm: linspace(-151.0, -91.0, 6),
            temperatures_k: linspace(0.025, 0.998, 20),
            snr_db: 40.0,
            points: 512,
            spread: 0.08,
            format: CorpusFormat::Csv,
            seed: 0,
        }
    }
}

impl CorpusSpec {
    /// Per-resonator loss parameters: preset values with log-normal spread.
    pub fn resonator_params(&self, sample: usize, resonator: usize) -> Result<LossModelParams> {
        let preset = &self.samples[sample];
        let mut rng =
            ChaCha20Rng::seed_from_u64(derived_seed(self.seed, &preset.id, "params", resonator));
        let mut draw = || -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            (self.spread * z).exp()
        };
        let mut p = preset.params(self.chip.f0[resonator], TANTALUM_TC)?;
        p.f_delta_tls0 *= draw();
        p.delta_other *= draw();
        Ok(p)
    }
}

/// Writes a synthetic corpus under `out`, one directory per sample.
/// Returns the files written (sidecars excluded).
pub fn generate_corpus(spec: &CorpusSpec, out: &Path) -> Result<Vec<PathBuf>> {
    spec.chip.validate()?;
    let mut written = Vec::new();
    for (s, preset) in spec.samples.iter().enumerate() {
        let dir = out.join(&preset.id);
        fs::create_dir_all(&dir).map_err(|e| IoError::Os {
            path: dir.clone(),
            source: e,
        })?;
        let mut archive = Vec::new();
        for r in 0..spec.chip.resonator_count() {
            let params = spec.resonator_params(s, r)?;
            let resonator_id = format!("r{}", r + 1);
            let runs: Vec<(f64, &[f64])> = match spec.sweep {
                SweepKind::PowerSweep => {
                    vec![(POWER_SWEEP_TEMPERATURE, spec.powers_dbm.as_slice())]
                }
                SweepKind::TemperatureSweep => spec
                    .temperatures_k
                    .iter()
                    .map(|&t| (t, spec.branch_powers_dbm.as_slice()))
                    .collect(),
            };
            for (k, (temperature, powers)) in runs.into_iter().enumerate() {
                let options = PowerSweepOptions {
                    temperature,
                    phi: spec.chip.phi,
                    seed: derived_seed(spec.seed, &preset.id, &resonator_id, k),
                    ..PowerSweepOptions::default()
                };
                let traces = synthesize_power_sweep_traces(
                    &params,
                    &spec.chip,
                    powers,
                    &options,
                    spec.snr_db,
                    spec.points,
                )?;
                for trace in traces {
                    let labeled = LabeledTrace {
                        sample_id: preset.id.clone(),
                        resonator_id: resonator_id.clone(),
                        trace,
                    };
                    let name = format!(
                        "{resonator_id}_T{:.1}mK_P{:.1}dBm",
                        labeled.trace.context.temperature * 1e3,
                        labeled.trace.context.p_app_dbm()
                    );
                    match spec.format {
                        CorpusFormat::Csv => {
                            let path = dir.join(format!("{name}.csv"));
                            io::write_text_with_sidecar(&path, &labeled)?;
                            written.push(path);
                        }
                        CorpusFormat::Touchstone => {
                            let path = dir.join(format!("{name}.s2p"));
                            let file = fs::File::create(&path).map_err(|e| IoError::Os {
                                path: path.clone(),
                                source: e,
                            })?;
                            io::write_touchstone(
                                std::io::BufWriter::new(file),
                                &labeled.trace.freqs,
                                &labeled.trace.s21,
                                io::FrequencyUnit::Hz,
                                io::DataFormat::RI,
                            )
                            .map_err(|e| IoError::Os {
                                path: path.clone(),
                                source: e,
                            })?;
                            io::write_sidecar(
                                &path,
                                &TraceMetadata {
                                    p_app_dbm: Some(labeled.trace.context.p_app_dbm()),
                                    temperature_k: Some(labeled.trace.context.temperature),
                                    resonator_id: Some(resonator_id.clone()),
                                    sample_id: Some(preset.id.clone()),
                                },
                            )?;
                            written.push(path);
                        }
                        CorpusFormat::Archive => archive.push(labeled),
                    }
                }
            }
        }
        if spec.format == CorpusFormat::Archive {
            let path = dir.join("traces.json");
            io::write_archive(&path, &TraceArchive::new(archive))?;
            written.push(path);
        }
    }
    Ok(written)
}
