//! File-based experiment steps, the manifest that records them, and an
//! end-to-end run that chains every step.

mod manifest;
mod steps;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use manifest::{digest_file, replay, ExperimentManifest, FileDigest, ManifestStep, ReplayReport, MANIFEST_FORMAT};
pub use steps::{
    check_variables, impute_step, load_set, sidecar_path, AannModel, AssessKind, AssessStep, CleanSidecar,
    CleanStep, GenerateSidecar, GenerateStep, ImputeStep, InjectSidecar, InjectStep, SplitStep, Step,
    StoredSidecar, TrainAannStep, TrainCorrectionStep, TrainRfStep, AANN_FORMAT, SPLIT_NAMES,
};

use crate::assessment::LrConfig;
use crate::autoencoder::AutoencoderConfig;
use crate::dataset::{names, MissingnessPlan, SyntheticParams};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::imputation::{RfImputerConfig, SetLabel, Strategy};
use crate::optimizer::GaConfig;
use crate::seeding::derive_seed;

fn default_n() -> usize {
    5000
}

fn default_fractions() -> [f64; 4] {
    [0.4, 0.1, 0.25, 0.25]
}

fn default_rf() -> RfImputerConfig {
    RfImputerConfig::default().excluding(names::HIV)
}

fn default_correction_plan() -> MissingnessPlan {
    MissingnessPlan::mcar(&[names::AGE, names::EDUCATION, names::GRAVIDITY], 0.1)
}

fn default_sets() -> Vec<String> {
    let mut v = vec!["T".to_string()];
    for (p, _) in crate::imputation::PATTERNS {
        v.push(format!("RF{p}"));
        v.push(format!("R{p}"));
    }
    v
}

fn default_qq() -> usize {
    20
}

/// Everything an end-to-end run needs. Only `seed` is mandatory in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub synthetic: SyntheticParams,
    /// Train, validation, test and experiment shares.
    #[serde(default = "default_fractions")]
    pub fractions: [f64; 4],
    #[serde(default = "default_rf")]
    pub rf: RfImputerConfig,
    #[serde(default)]
    pub autoencoder: AutoencoderConfig,
    #[serde(default)]
    pub ga: GaConfig,
    /// Cells blanked on the test partition to train the correction forests.
    #[serde(default = "default_correction_plan")]
    pub correction_plan: MissingnessPlan,
    #[serde(default)]
    pub correction_forest: ForestParams,
    /// Set labels to produce, e.g. `RF2A`; `T` is the target.
    #[serde(default = "default_sets")]
    pub sets: Vec<String>,
    /// Forest for the HIV classification impact.
    #[serde(default)]
    pub classifier: ForestParams,
    #[serde(default)]
    pub lr: LrConfig,
    #[serde(default = "default_qq")]
    pub qq_points: usize,
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n: default_n(),
            synthetic: SyntheticParams::default(),
            fractions: default_fractions(),
            rf: default_rf(),
            autoencoder: AutoencoderConfig::default(),
            ga: GaConfig::default(),
            correction_plan: default_correction_plan(),
            correction_forest: ForestParams::default(),
            sets: default_sets(),
            classifier: ForestParams::default(),
            lr: LrConfig::default(),
            qq_points: default_qq(),
        }
    }

    fn labels(&self) -> Result<Vec<SetLabel>> {
        if !self.sets.iter().any(|s| s == "T") {
            return Err(Error::invalid("the set list must include the target `T`"));
        }
        self.sets
            .iter()
            .filter(|s| s.as_str() != "T")
            .map(|s| SetLabel::parse(s))
            .collect()
    }
}

/// Run generate → clean → split → train → impute → assess under `out_dir`
/// and write `out_dir/manifest.json`.
pub fn run_pipeline(config: &RunConfig, out_dir: &Path) -> Result<ExperimentManifest> {
    let labels = config.labels()?;
    let needs = |pred: fn(Strategy) -> bool| labels.iter().any(|l| pred(l.strategy));
    let seed = |label: &str| derive_seed(config.seed, label, 0);
    let data = out_dir.join("data");
    let models = out_dir.join("models");
    let sets_dir = out_dir.join("sets");
    let reports = out_dir.join("reports");
    let split_dir = data.join("split");
    let part = |name: &str| split_dir.join(format!("{name}.csv"));
    let mut m = ExperimentManifest::default();

    m.run(Step::Generate(GenerateStep {
        n: config.n,
        seed: seed("generate"),
        params: config.synthetic.clone(),
        out: data.join("raw.csv"),
    }))?;
    m.run(Step::Clean(CleanStep {
        input: data.join("raw.csv"),
        out: data.join("clean.csv"),
    }))?;
    m.run(Step::Split(SplitStep {
        input: data.join("clean.csv"),
        fractions: config.fractions,
        seed: seed("split"),
        out_dir: split_dir.clone(),
    }))?;

    let rf_path = models.join("rf.json");
    let aann_path = models.join("aann.json");
    let corr_path = models.join("correction.json");
    if needs(|s| matches!(s, Strategy::Rf | Strategy::RfAannGa)) {
        m.run(Step::TrainRf(TrainRfStep {
            train: part("train"),
            config: config.rf.clone(),
            seed: seed("train-rf"),
            out: rf_path.clone(),
        }))?;
    }
    if needs(|s| matches!(s, Strategy::AannGa | Strategy::RfAannGa | Strategy::AannGaRf)) {
        m.run(Step::TrainAann(TrainAannStep {
            train: part("train"),
            validation: part("validation"),
            config: config.autoencoder.clone(),
            seed: seed("train-aann"),
            out: aann_path.clone(),
        }))?;
    }
    if needs(|s| s == Strategy::AannGaRf) {
        m.run(Step::TrainCorrection(TrainCorrectionStep {
            aann: aann_path.clone(),
            test: part("test"),
            plan: config.correction_plan.clone(),
            ga: config.ga.clone(),
            forest: config.correction_forest.clone(),
            seed: seed("train-correction"),
            out: corr_path.clone(),
        }))?;
    }

    let exclude_hiv = config.rf.excluded_inputs.iter().any(|v| v == names::HIV);
    let impute = |strategy: Strategy, label: &str, variables: Vec<String>| {
        let uses = |s: &[Strategy]| s.contains(&strategy);
        Step::Impute(ImputeStep {
            strategy,
            label: label.to_string(),
            variables,
            input: part("experiment"),
            train: uses(&[Strategy::Random, Strategy::Mean]).then(|| part("train")),
            rf: uses(&[Strategy::Rf, Strategy::RfAannGa]).then(|| rf_path.clone()),
            aann: uses(&[Strategy::AannGa, Strategy::RfAannGa, Strategy::AannGaRf]).then(|| aann_path.clone()),
            correction: uses(&[Strategy::AannGaRf]).then(|| corr_path.clone()),
            ga: config.ga.clone(),
            exclude_hiv: exclude_hiv && uses(&[Strategy::Rf, Strategy::RfAannGa]),
            seed: derive_seed(config.seed, &format!("impute-{label}"), 0),
            out: sets_dir.join(format!("{label}.csv")),
        })
    };
    let target = sets_dir.join("T.csv");
    m.run(impute(Strategy::Target, "T", Vec::new()))?;
    for l in &labels {
        m.run(impute(l.strategy, &l.label(), l.variables.clone()))?;
    }

    let set_path = |l: &SetLabel| sets_dir.join(format!("{}.csv", l.label()));
    let assess = |kind: AssessKind, sets: Vec<std::path::PathBuf>, out: std::path::PathBuf| {
        Step::Assess(AssessStep {
            kind,
            target: target.clone(),
            sets,
            variables: Vec::new(),
            train: matches!(kind, AssessKind::Classify | AssessKind::Lr).then(|| part("train")),
            forest: config.classifier.clone(),
            lr: config.lr.clone(),
            qq_points: config.qq_points,
            seed: seed("assess"),
            out,
        })
    };
    let mut by_pattern: BTreeMap<&str, Vec<std::path::PathBuf>> = BTreeMap::new();
    for l in &labels {
        by_pattern.entry(l.pattern.as_str()).or_default().push(set_path(l));
    }
    for (pattern, paths) in by_pattern {
        m.run(assess(AssessKind::Stats, paths, reports.join(format!("stats-{pattern}.json"))))?;
    }
    let all: Vec<_> = labels.iter().map(set_path).collect();
    m.run(assess(AssessKind::Classify, all.clone(), reports.join("classify.json")))?;
    m.run(assess(AssessKind::Lr, all.clone(), reports.join("lr.json")))?;
    if !all.is_empty() {
        m.run(assess(AssessKind::RangeAccuracy, all.clone(), reports.join("range-accuracy.json")))?;
        m.run(assess(AssessKind::Qq, all, reports.join("qq.csv")))?;
    }
    m.save(&out_dir.join("manifest.json"))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::TrainConfig;

    fn small(seed: u64) -> RunConfig {
        let forest = ForestParams {
            n_trees: 5,
            ..ForestParams::default()
        };
        let mut c = RunConfig::new(seed);
        c.n = 400;
        c.rf.forest = forest.clone();
        c.correction_forest = forest.clone();
        c.classifier = forest;
        c.autoencoder.train = TrainConfig {
            max_cycles: 20,
            ..TrainConfig::default()
        };
        c.ga = GaConfig {
            population: 10,
            generations: 5,
            ..GaConfig::default()
        };
        c.sets = ["T", "RF1A", "R1A", "M2A", "AG1A", "RFAG1A", "AGRF1A"].map(String::from).to_vec();
        c
    }

    #[test]
    fn run_then_replay_reproduces_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_pipeline(&small(5), &dir.path().join("run")).unwrap();
        assert!(m.steps.iter().any(|s| s.step.name() == "train-correction"));
        let loaded = ExperimentManifest::load(&dir.path().join("run/manifest.json")).unwrap();
        assert_eq!(loaded, m);
        let report = replay(&loaded, &dir.path().join("replay")).unwrap();
        assert_eq!(report.steps, m.steps.len());

        let mut edited = loaded.clone();
        if let Step::Generate(g) = &mut edited.steps[0].step {
            g.n += 1;
        }
        assert!(matches!(replay(&edited, &dir.path().join("r2")), Err(Error::Reproducibility(_))));
        let mut forged = loaded;
        forged.steps[1].outputs[0].sha256 = "0".repeat(64);
        assert!(matches!(replay(&forged, &dir.path().join("r3")), Err(Error::Reproducibility(_))));
    }

    #[test]
    fn config_needs_only_a_seed_and_a_target() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 9}"#).unwrap();
        assert_eq!(c, RunConfig::new(9));
        assert!(serde_json::from_str::<RunConfig>("{}").is_err());
        let mut bad = RunConfig::new(1);
        bad.sets.retain(|s| s != "T");
        assert!(run_pipeline(&bad, Path::new("/nonexistent")).unwrap_err().is_config_error());
    }
}
