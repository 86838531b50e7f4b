use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::digest_file;
use crate::assessment::{
    self, fit_classifier, fit_lr, hiv_design, lr_impact, qq_points, stat_impact_set, ClassificationBlock, LrBlock,
    LrConfig, SetStatReport,
};
use crate::autoencoder::{AutoencoderConfig, AutoencoderNetwork};
use crate::dataset::io::{read_csv, read_json, write_bytes, write_csv, write_json};
use crate::dataset::{
    clean, encode, generate_synthetic, inject_missing, names, split, validate_record, Dataset, InjectionReport,
    MissingnessPlan, PlantedModel, Schema, SyntheticParams,
};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::imputation::{
    aann_ga_completed, apply_correction, blank_variables, default_ranges, fit_correction, fit_rf_imputer, impute_aann_ga_set, impute_mean, impute_random,
    impute_rf, impute_rf_aann_ga, range_accuracy, CorrectionModel, ImputedSet, ModelRef, RangeAccuracy,
    RfImputer, RfImputerConfig, SetLabel, SetSidecar, Strategy,
};
use crate::optimizer::GaConfig;
use crate::seeding::derive_seed;

/// The JSON file written next to a CSV or model.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn model_ref(path: &Path) -> Result<ModelRef> {
    Ok(ModelRef {
        file: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: digest_file(path)?,
    })
}

fn read(path: &Path) -> Result<Dataset> {
    read_csv(path, &Schema::survey())
}

fn required<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("this step needs {what}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateStep {
    pub n: usize,
    pub seed: u64,
    pub params: SyntheticParams,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSidecar {
    pub n: usize,
    pub seed: u64,
    pub params: SyntheticParams,
    pub planted: PlantedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanStep {
    pub input: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanSidecar {
    pub rows: usize,
    pub missing_before: usize,
    pub missing_after: usize,
    pub violations: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStep {
    pub input: PathBuf,
    pub fractions: [f64; 4],
    pub seed: u64,
    pub out_dir: PathBuf,
}

pub const SPLIT_NAMES: [&str; 4] = ["train", "validation", "test", "experiment"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectStep {
    pub input: PathBuf,
    pub plan: MissingnessPlan,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectSidecar {
    pub plan: MissingnessPlan,
    pub seed: u64,
    pub report: InjectionReport,
    pub missing_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRfStep {
    pub train: PathBuf,
    pub config: RfImputerConfig,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainAannStep {
    pub train: PathBuf,
    pub validation: PathBuf,
    pub config: AutoencoderConfig,
    pub seed: u64,
    pub out: PathBuf,
}

/// A trained network plus what imputation needs alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AannModel {
    pub format: String,
    pub config: AutoencoderConfig,
    pub seed: u64,
    pub selected_cycle: usize,
    /// Training means of the encoded columns (the GA's seeded candidate).
    pub column_means: Vec<f64>,
    pub network: AutoencoderNetwork,
}

pub const AANN_FORMAT: &str = "rfimpute.aann.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCorrectionStep {
    pub aann: PathBuf,
    /// Complete set with known truth.
    pub test: PathBuf,
    pub plan: MissingnessPlan,
    pub ga: GaConfig,
    pub forest: ForestParams,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputeStep {
    pub strategy: Strategy,
    pub label: String,
    /// Variables blanked (whole columns) before imputing; empty imputes the
    /// input's existing gaps.
    pub variables: Vec<String>,
    pub input: PathBuf,
    pub train: Option<PathBuf>,
    pub rf: Option<PathBuf>,
    pub aann: Option<PathBuf>,
    pub correction: Option<PathBuf>,
    pub ga: GaConfig,
    pub exclude_hiv: bool,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssessKind {
    Stats,
    Classify,
    Lr,
    RangeAccuracy,
    Qq,
}

impl AssessKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "stats" => Self::Stats,
            "classify" => Self::Classify,
            "lr" => Self::Lr,
            "range-accuracy" => Self::RangeAccuracy,
            "qq" => Self::Qq,
            other => return Err(Error::invalid(format!("unknown assessment `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessStep {
    pub kind: AssessKind,
    pub target: PathBuf,
    pub sets: Vec<PathBuf>,
    /// Variables to compare; empty means each set's own pattern.
    pub variables: Vec<String>,
    pub train: Option<PathBuf>,
    pub forest: ForestParams,
    pub lr: LrConfig,
    pub qq_points: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// One pipeline step. Every input and output is a file path, so a step can
/// be re-executed with its paths redirected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Step {
    Generate(GenerateStep),
    Clean(CleanStep),
    Split(SplitStep),
    Inject(InjectStep),
    TrainRf(TrainRfStep),
    TrainAann(TrainAannStep),
    TrainCorrection(TrainCorrectionStep),
    Impute(ImputeStep),
    Assess(AssessStep),
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Generate(_) => "generate",
            Step::Clean(_) => "clean",
            Step::Split(_) => "split",
            Step::Inject(_) => "inject",
            Step::TrainRf(_) => "train-rf",
            Step::TrainAann(_) => "train-aann",
            Step::TrainCorrection(_) => "train-correction",
            Step::Impute(_) => "impute",
            Step::Assess(_) => "assess",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Step::Generate(s) => Some(s.seed),
            Step::Clean(_) => None,
            Step::Split(s) => Some(s.seed),
            Step::Inject(s) => Some(s.seed),
            Step::TrainRf(s) => Some(s.seed),
            Step::TrainAann(s) => Some(s.seed),
            Step::TrainCorrection(s) => Some(s.seed),
            Step::Impute(s) => Some(s.seed),
            Step::Assess(s) => Some(s.seed),
        }
    }

    pub fn input_files(&self) -> Vec<PathBuf> {
        let opt = |p: &Option<PathBuf>| p.iter().cloned().collect::<Vec<_>>();
        match self {
            Step::Generate(_) => vec![],
            Step::Clean(s) => vec![s.input.clone()],
            Step::Split(s) => vec![s.input.clone()],
            Step::Inject(s) => vec![s.input.clone()],
            Step::TrainRf(s) => vec![s.train.clone()],
            Step::TrainAann(s) => vec![s.train.clone(), s.validation.clone()],
            Step::TrainCorrection(s) => vec![s.aann.clone(), s.test.clone()],
            Step::Impute(s) => [vec![s.input.clone()], opt(&s.train), opt(&s.rf), opt(&s.aann), opt(&s.correction)]
                .concat(),
            Step::Assess(s) => {
                let mut v = vec![s.target.clone()];
                v.extend(s.sets.iter().cloned());
                v.extend(opt(&s.train));
                v
            }
        }
    }

    pub fn output_files(&self) -> Vec<PathBuf> {
        match self {
            Step::Generate(GenerateStep { out, .. })
            | Step::Clean(CleanStep { out, .. })
            | Step::Inject(InjectStep { out, .. })
            | Step::Impute(ImputeStep { out, .. }) => vec![out.clone(), sidecar_path(out)],
            Step::Split(s) => SPLIT_NAMES
                .iter()
                .map(|n| s.out_dir.join(format!("{n}.csv")))
                .chain([s.out_dir.join("split.json")])
                .collect(),
            Step::TrainRf(s) => vec![s.out.clone()],
            Step::TrainAann(s) => vec![s.out.clone(), with_suffix(&s.out, ".trace.csv")],
            Step::TrainCorrection(s) => vec![s.out.clone()],
            Step::Assess(s) => match s.kind {
                AssessKind::Qq => vec![s.out.clone()],
                _ => vec![s.out.clone(), s.out.with_extension("txt")],
            },
        }
    }

    /// Rewrite every input path with `inputs` and every output location with
    /// `outputs` (a split's output directory counts as one output).
    pub fn remap(&mut self, inputs: &dyn Fn(&Path) -> PathBuf, outputs: &dyn Fn(&Path) -> PathBuf) {
        let map_in = |p: &mut PathBuf| *p = inputs(p);
        let map_opt = |p: &mut Option<PathBuf>| {
            if let Some(x) = p {
                *x = inputs(x);
            }
        };
        match self {
            Step::Generate(s) => s.out = outputs(&s.out),
            Step::Clean(s) => {
                map_in(&mut s.input);
                s.out = outputs(&s.out);
            }
            Step::Split(s) => {
                map_in(&mut s.input);
                s.out_dir = outputs(&s.out_dir);
            }
            Step::Inject(s) => {
                map_in(&mut s.input);
                s.out = outputs(&s.out);
            }
            Step::TrainRf(s) => {
                map_in(&mut s.train);
                s.out = outputs(&s.out);
            }
            Step::TrainAann(s) => {
                map_in(&mut s.train);
                map_in(&mut s.validation);
                s.out = outputs(&s.out);
            }
            Step::TrainCorrection(s) => {
                map_in(&mut s.aann);
                map_in(&mut s.test);
                s.out = outputs(&s.out);
            }
            Step::Impute(s) => {
                map_in(&mut s.input);
                map_opt(&mut s.train);
                map_opt(&mut s.rf);
                map_opt(&mut s.aann);
                map_opt(&mut s.correction);
                s.out = outputs(&s.out);
            }
            Step::Assess(s) => {
                map_in(&mut s.target);
                s.sets.iter_mut().for_each(map_in);
                map_opt(&mut s.train);
                s.out = outputs(&s.out);
            }
        }
    }

    pub fn execute(&self) -> Result<()> {
        match self {
            Step::Generate(s) => generate(s),
            Step::Clean(s) => clean_step(s),
            Step::Split(s) => split_step(s),
            Step::Inject(s) => inject(s),
            Step::TrainRf(s) => train_rf(s),
            Step::TrainAann(s) => train_aann(s),
            Step::TrainCorrection(s) => train_correction(s),
            Step::Impute(s) => impute(s),
            Step::Assess(s) => assess(s),
        }
    }
}

fn generate(s: &GenerateStep) -> Result<()> {
    let (data, planted) = generate_synthetic(s.n, s.seed, &s.params)?;
    write_csv(&s.out, &data)?;
    write_json(
        &sidecar_path(&s.out),
        &GenerateSidecar {
            n: s.n,
            seed: s.seed,
            params: s.params.clone(),
            planted,
        },
    )
}

fn clean_step(s: &CleanStep) -> Result<()> {
    let data = read(&s.input)?;
    let mut violations = BTreeMap::new();
    for row in &data.rows {
        for v in validate_record(row, &data.schema) {
            let key = serde_json::to_value(&v)?;
            let key = match key {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            *violations.entry(key).or_insert(0) += 1;
        }
    }
    let cleaned = clean(&data);
    write_csv(&s.out, &cleaned)?;
    write_json(
        &sidecar_path(&s.out),
        &CleanSidecar {
            rows: data.n_rows(),
            missing_before: data.missing_count(),
            missing_after: cleaned.missing_count(),
            violations,
        },
    )
}

fn split_step(s: &SplitStep) -> Result<()> {
    let data = read(&s.input)?;
    let p = split(&data, s.fractions, s.seed)?;
    let parts = [&p.train, &p.validation, &p.test, &p.experiment];
    let mut sizes = BTreeMap::new();
    for (name, part) in SPLIT_NAMES.iter().zip(parts) {
        write_csv(&s.out_dir.join(format!("{name}.csv")), part)?;
        sizes.insert(name.to_string(), part.n_rows());
    }
    write_json(
        &s.out_dir.join("split.json"),
        &serde_json::json!({ "fractions": s.fractions, "seed": s.seed, "sizes": sizes }),
    )
}

fn inject(s: &InjectStep) -> Result<()> {
    let data = read(&s.input)?;
    let (holed, report) = inject_missing(&data, &s.plan, s.seed)?;
    write_csv(&s.out, &holed)?;
    write_json(
        &sidecar_path(&s.out),
        &InjectSidecar {
            plan: s.plan.clone(),
            seed: s.seed,
            report,
            missing_cells: holed.missing_count(),
        },
    )
}

fn train_rf(s: &TrainRfStep) -> Result<()> {
    let train = read(&s.train)?.complete_rows();
    let imputer = fit_rf_imputer(&train, &s.config, s.seed)?;
    write_json(&s.out, &imputer)
}

fn train_aann(s: &TrainAannStep) -> Result<()> {
    let train = encode(&read(&s.train)?.complete_rows())?;
    let validation = encode(&read(&s.validation)?.complete_rows())?;
    let (network, trace) = s.config.fit(train.width(), &train.values, &validation.values, s.seed)?;
    write_json(
        &s.out,
        &AannModel {
            format: AANN_FORMAT.to_string(),
            config: s.config.clone(),
            seed: s.seed,
            selected_cycle: trace.selected_cycle,
            column_means: train.column_means(),
            network,
        },
    )?;
    write_bytes(&with_suffix(&s.out, ".trace.csv"), trace.to_csv().as_bytes())
}

fn train_correction(s: &TrainCorrectionStep) -> Result<()> {
    let model: AannModel = read_json(&s.aann)?;
    let truth = read(&s.test)?.complete_rows();
    let (holed, _) = inject_missing(&truth, &s.plan, derive_seed(s.seed, "inject", 0))?;
    let completed = aann_ga_completed(
        &model.network,
        &s.ga,
        &holed,
        &model.column_means,
        derive_seed(s.seed, "aann-ga", 0),
    )?;
    let correction = fit_correction(&truth, &holed, &completed, &s.forest, derive_seed(s.seed, "correction", 0))?;
    write_json(&s.out, &correction)
}

fn impute(s: &ImputeStep) -> Result<()> {
    let source = read(&s.input)?;
    let (incomplete, truth_rows) = if s.variables.is_empty() && s.strategy != Strategy::Target {
        (source.clone(), source)
    } else {
        let complete = source.complete_rows();
        (blank_variables(&complete, &s.variables)?, complete)
    };
    let mut models = Vec::new();
    let seed = derive_seed(s.seed, "impute", 0);
    let load_rf = |models: &mut Vec<ModelRef>| -> Result<RfImputer> {
        let path = required(&s.rf, "an RF model (--rf)")?;
        let rf: RfImputer = read_json(path)?;
        if s.exclude_hiv && !rf.config.excluded_inputs.iter().any(|v| v == names::HIV) {
            return Err(Error::invalid(
                "HIV exclusion requested but the RF model was trained with HIV as an input",
            ));
        }
        models.push(model_ref(path)?);
        Ok(rf)
    };
    let load_aann = |models: &mut Vec<ModelRef>| -> Result<AannModel> {
        let path = required(&s.aann, "an autoencoder model (--aann)")?;
        let m: AannModel = read_json(path)?;
        models.push(model_ref(path)?);
        Ok(m)
    };
    let set = match s.strategy {
        Strategy::Target => ImputedSet::target(&truth_rows)?,
        Strategy::Rf => impute_rf(&load_rf(&mut models)?, &incomplete)?,
        Strategy::Random => {
            let train = read(required(&s.train, "a training set (--train)")?)?;
            impute_random(&train, &incomplete, seed)?
        }
        Strategy::Mean => {
            let train = read(required(&s.train, "a training set (--train)")?)?.complete_rows();
            impute_mean(&train, &incomplete)?
        }
        Strategy::AannGa => {
            let m = load_aann(&mut models)?;
            impute_aann_ga_set(&m.network, &s.ga, &incomplete, &m.column_means, seed)?
        }
        Strategy::RfAannGa => {
            let rf = load_rf(&mut models)?;
            let m = load_aann(&mut models)?;
            impute_rf_aann_ga(&rf, &m.network, &s.ga, &incomplete, seed)?
        }
        Strategy::AannGaRf => {
            let m = load_aann(&mut models)?;
            let path = required(&s.correction, "a correction model (--correction)")?;
            let correction: CorrectionModel = read_json(path)?;
            models.push(model_ref(path)?);
            apply_correction(&m.network, &s.ga, &correction, &incomplete, &m.column_means, seed)?
        }
    };
    let mut set = set.with_label(&s.label);
    set.provenance.models = models;
    write_csv(&s.out, &set.data)?;
    write_json(&sidecar_path(&s.out), &StoredSidecar::from_set(&set))
}

/// Imputed-set sidecar as stored on disk: the summary plus, per variable,
/// the rows that were imputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSidecar {
    #[serde(flatten)]
    pub summary: SetSidecar,
    pub imputed_rows: BTreeMap<String, Vec<usize>>,
}

impl StoredSidecar {
    fn from_set(set: &ImputedSet) -> Self {
        let mut imputed_rows = BTreeMap::new();
        for (v, spec) in set.data.schema.variables.iter().enumerate() {
            let rows: Vec<usize> = (0..set.imputed.len()).filter(|&r| set.imputed[r][v]).collect();
            if !rows.is_empty() {
                imputed_rows.insert(spec.name.clone(), rows);
            }
        }
        Self {
            summary: set.sidecar(),
            imputed_rows,
        }
    }
}

/// Load an imputed set written by the impute step. Without a sidecar the
/// file stem is the label and nothing counts as imputed.
pub fn load_set(path: &Path) -> Result<ImputedSet> {
    let data = read(path)?;
    let side = sidecar_path(path);
    let mut imputed = vec![vec![false; data.schema.len()]; data.n_rows()];
    let (label, strategy, pattern, provenance) = if side.exists() {
        let s: StoredSidecar = read_json(&side)?;
        for (name, rows) in &s.imputed_rows {
            let v = data.schema.require(name)?;
            for &r in rows {
                if r < imputed.len() {
                    imputed[r][v] = true;
                }
            }
        }
        (s.summary.label, s.summary.strategy, s.summary.pattern, s.summary.provenance)
    } else {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        (stem, Strategy::Target, Vec::new(), Default::default())
    };
    Ok(ImputedSet {
        label,
        strategy,
        pattern,
        data,
        imputed,
        provenance,
    })
}

fn assess(s: &AssessStep) -> Result<()> {
    let target = load_set(&s.target)?;
    if !target.data.is_complete() {
        return Err(Error::Incomplete("the target set must be complete".into()));
    }
    let sets = s.sets.iter().map(|p| load_set(p)).collect::<Result<Vec<_>>>()?;
    for set in &sets {
        if set.data.n_rows() != target.data.n_rows() {
            return Err(Error::invalid(format!(
                "set {} has {} rows but the target has {}",
                set.label,
                set.data.n_rows(),
                target.data.n_rows()
            )));
        }
    }
    let vars_for = |set: &ImputedSet| -> Vec<String> {
        if s.variables.is_empty() {
            set.pattern.clone()
        } else {
            s.variables.clone()
        }
    };
    let txt = s.out.with_extension("txt");
    match s.kind {
        AssessKind::Stats => {
            let vars = if s.variables.is_empty() {
                sets.iter().find(|x| !x.pattern.is_empty()).map(|x| x.pattern.clone()).unwrap_or_default()
            } else {
                s.variables.clone()
            };
            let mut reports: Vec<SetStatReport> = vec![stat_impact_set(&target.data, &target, &vars)?];
            for set in &sets {
                reports.push(stat_impact_set(&target.data, set, &vars)?);
            }
            write_json(&s.out, &reports)?;
            let text: String = assessment::stats_tables(&reports).iter().map(|t| t.render() + "\n").collect();
            write_bytes(&txt, text.as_bytes())
        }
        AssessKind::Classify => {
            let train = read(required(&s.train, "a training set (--train)")?)?.complete_rows();
            let clf = fit_classifier(&train, names::HIV, &s.forest, s.seed)?;
            let mut blocks = Vec::new();
            for set in std::iter::once(&target).chain(&sets) {
                let (confusion, metrics) = clf.assess(&set.data)?;
                blocks.push(ClassificationBlock {
                    label: set.label.clone(),
                    confusion,
                    metrics,
                });
            }
            write_json(&s.out, &blocks)?;
            write_bytes(&txt, assessment::classification_table(&blocks).render().as_bytes())
        }
        AssessKind::Lr => {
            let train = read(required(&s.train, "a training set (--train)")?)?.complete_rows();
            let (x, y) = hiv_design(&train)?;
            let model = fit_lr(&x, &y, &s.lr)?;
            let (tx, _) = hiv_design(&target.data)?;
            let mut blocks = Vec::new();
            for set in std::iter::once(&target).chain(&sets) {
                let (sx, _) = hiv_design(&set.data)?;
                blocks.push(LrBlock {
                    label: set.label.clone(),
                    report: lr_impact(&model, &tx, &sx)?,
                });
            }
            write_json(&s.out, &serde_json::json!({ "model": model, "sets": blocks }))?;
            write_bytes(&txt, assessment::lr_table(&blocks).render().as_bytes())
        }
        AssessKind::RangeAccuracy => {
            let ranges = default_ranges();
            let reports = sets
                .iter()
                .map(|set| range_accuracy(set, &target.data, &ranges))
                .collect::<Result<Vec<RangeAccuracy>>>()?;
            write_json(&s.out, &reports)?;
            let mut text = String::new();
            for r in &reports {
                for v in &r.variables {
                    let mut t = assessment::TextTable::new(
                        format!("Range accuracy: {} {} ({} cells)", r.label, v.variable, v.imputed_cells),
                        v.within.iter().map(|(k, _)| format!("<= {k}")).collect(),
                    );
                    t.row("Within (%)", v.within.iter().map(|(_, f)| format!("{:.1}", 100.0 * f)).collect());
                    text.push_str(&t.render());
                    text.push('\n');
                }
            }
            write_bytes(&txt, text.as_bytes())
        }
        AssessKind::Qq => {
            let mut out = String::from("label,variable,p,target,set\n");
            for set in &sets {
                for name in vars_for(set) {
                    let v = target.data.schema.require(&name)?;
                    let t = target.data.column_f64(v);
                    let p: Vec<f64> = set.data.rows.iter().map(|r| r[v].unwrap_or(0) as f64).collect();
                    for (i, (a, b)) in qq_points(&t, &p, s.qq_points)?.into_iter().enumerate() {
                        let prob = (i as f64 + 0.5) / s.qq_points as f64;
                        out.push_str(&format!("{},{},{},{},{}\n", set.label, name, prob, a, b));
                    }
                }
            }
            write_bytes(&s.out, out.as_bytes())
        }
    }
}

/// Resolve a label (and optional strategy / variable list) to an impute step.
pub fn impute_step(
    label: &str,
    strategy: Option<Strategy>,
    variables: Option<Vec<String>>,
) -> Result<(Strategy, String, Vec<String>)> {
    if let Ok(parsed) = SetLabel::parse(label) {
        if let Some(st) = strategy {
            if st != parsed.strategy {
                return Err(Error::invalid(format!(
                    "label {label} implies strategy {:?}, not {st:?}",
                    parsed.strategy
                )));
            }
        }
        return Ok((parsed.strategy, label.to_string(), variables.unwrap_or(parsed.variables)));
    }
    let strategy = strategy.ok_or_else(|| Error::invalid(format!("label `{label}` needs an explicit strategy")))?;
    Ok((strategy, label.to_string(), variables.unwrap_or_default()))
}

/// Check that every variable name is in the survey schema.
pub fn check_variables(variables: &[String]) -> Result<()> {
    let schema = Schema::survey();
    for v in variables {
        schema.require(v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_resolve_to_strategies_and_patterns() {
        let (st, _, vars) = impute_step("RF2A", None, None).unwrap();
        assert_eq!(st, Strategy::Rf);
        assert_eq!(vars, vec![names::AGE, names::FATHER_AGE]);
        let (st, _, vars) = impute_step("R1B", None, None).unwrap();
        assert_eq!((st, vars), (Strategy::Random, vec![names::EDUCATION.to_string()]));
        assert!(impute_step("RF2A", Some(Strategy::Mean), None).is_err());
        assert!(impute_step("custom", None, None).is_err());
        let (st, l, v) = impute_step("custom", Some(Strategy::Mean), None).unwrap();
        assert_eq!((st, l.as_str(), v.len()), (Strategy::Mean, "custom", 0));
    }

    #[test]
    fn step_json_round_trips_and_paths_remap() {
        let mut step = Step::Impute(ImputeStep {
            strategy: Strategy::Rf,
            label: "RF1A".into(),
            variables: vec![names::AGE.into()],
            input: "data/x.csv".into(),
            train: None,
            rf: Some("models/rf.json".into()),
            aann: None,
            correction: None,
            ga: GaConfig::default(),
            exclude_hiv: true,
            seed: 3,
            out: "sets/RF1A.csv".into(),
        });
        let json = serde_json::to_string(&step).unwrap();
        assert!(json.contains("\"command\":\"impute\""));
        assert_eq!(serde_json::from_str::<Step>(&json).unwrap(), step);
        step.remap(&|p| Path::new("in").join(p.file_name().unwrap()), &|p| {
            Path::new("out").join(p.file_name().unwrap())
        });
        assert_eq!(step.input_files(), vec![PathBuf::from("in/x.csv"), PathBuf::from("in/rf.json")]);
        assert_eq!(step.output_files(), vec![PathBuf::from("out/RF1A.csv"), PathBuf::from("out/RF1A.json")]);
    }
}
