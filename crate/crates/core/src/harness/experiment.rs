//! JSON experiment configs: which instance, generator and stream to run,
//! for how long, and what the run must show.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::game::{run_game, GameConfig, GameSummary, GameTranscript, IndexValidity, Sampling};
use super::report::{csv_string, density_svg};
use crate::adversaries::{
    default_generation_counterexample, demo_collection, identification_counterexample, index_pair_instance,
    lower_density_instance, sperner_hard_instance, window_hard_instance, HardInstance, StreamSpec,
};
use crate::domain::{Density, ProbePolicy};
use crate::error::{Error, Result};
use crate::generators::{
    BufferGenerator, CanonicalIntersection, CodingGenerator, Generator, IdentifierMode, IncrementalIdentifier,
    MemorylessCountable, WindowGenerator, WindowStrategy,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Sperner {
        k: usize,
    },
    Window {
        k: usize,
    },
    LowerDensity {
        k: usize,
    },
    IndexPair,
    Identification,
    Generation,
    Demo {
        name: String,
    },
    /// A serialized [`HardInstance`], relative to the config file.
    File {
        path: PathBuf,
    },
}

impl InstanceSpec {
    pub fn build(&self, base_dir: &Path) -> Result<HardInstance> {
        match self {
            InstanceSpec::Sperner { k } => sperner_hard_instance(*k),
            InstanceSpec::Window { k } => window_hard_instance(*k),
            InstanceSpec::LowerDensity { k } => lower_density_instance(*k),
            InstanceSpec::IndexPair => index_pair_instance(),
            InstanceSpec::Identification => identification_counterexample(),
            InstanceSpec::Generation => default_generation_counterexample(),
            InstanceSpec::Demo { name } => Ok(HardInstance {
                name: name.clone(),
                collection: demo_collection(name)?,
                target: 0,
                enumeration: None,
                certificate: Default::default(),
            }),
            InstanceSpec::File { path } => {
                let full = base_dir.join(path);
                let text = fs::read_to_string(&full)
                    .map_err(|e| Error::InvalidParams(format!("reading {}: {e}", full.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::InvalidParams(format!("{}: {e}", full.display())))
            }
        }
    }
}

fn default_shift() -> u64 {
    1
}

fn default_coding_rounds() -> usize {
    crate::generators::coding::DEFAULT_CODING_ROUNDS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Canonical,
    Buffer {
        b: usize,
    },
    Window {
        w: usize,
        strategy: WindowStrategy,
    },
    Incremental {
        mode: IdentifierMode,
    },
    MemorylessCountable {
        #[serde(default = "default_shift")]
        shift: u64,
    },
    Coding {
        #[serde(default = "default_coding_rounds")]
        max_rounds: usize,
    },
}

impl GeneratorSpec {
    pub fn build(&self, instance: &HardInstance, policy: &ProbePolicy) -> Result<Box<dyn Generator>> {
        let c = &instance.collection;
        let p = policy.clone();
        Ok(match self {
            GeneratorSpec::Canonical => Box::new(CanonicalIntersection::new(c, p)?),
            GeneratorSpec::Buffer { b } => Box::new(BufferGenerator::new(c, *b, p)?),
            GeneratorSpec::Window { w, strategy } => Box::new(WindowGenerator::new(c, *w, *strategy, p)?),
            GeneratorSpec::Incremental { mode } => Box::new(IncrementalIdentifier::new(c, *mode, policy)?),
            GeneratorSpec::MemorylessCountable { shift } => Box::new(MemorylessCountable::new(c, *shift, p)?),
            GeneratorSpec::Coding { max_rounds } => Box::new(CodingGenerator::new(c, p, *max_rounds)?),
        })
    }
}

fn yes() -> bool {
    true
}

/// What a run must show for the experiment to pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default = "yes")]
    pub converges: bool,
    /// Expected supremum of post-convergence densities, as `"p/q"`.
    #[serde(default)]
    pub density_sup: Option<String>,
    #[serde(default)]
    pub density_sup_at_least: Option<String>,
    #[serde(default)]
    pub tolerance: f64,
}

impl Default for Expectations {
    fn default() -> Self {
        Expectations { converges: true, density_sup: None, density_sup_at_least: None, tolerance: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File name stem for the artifacts.
    #[serde(default)]
    pub stem: Option<String>,
}

fn default_rounds() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub instance: InstanceSpec,
    /// Overrides the instance's target index.
    #[serde(default)]
    pub target: Option<usize>,
    pub generator: GeneratorSpec,
    /// Defaults to the instance's enumeration, else the canonical one.
    #[serde(default)]
    pub stream: Option<StreamSpec>,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub validity: IndexValidity,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("config: {e}")))?;
        if config.schema != SCHEMA_VERSION {
            return Err(Error::InvalidParams(format!(
                "config: unsupported schema {} (expected {SCHEMA_VERSION})",
                config.schema
            )));
        }
        for r in [&config.expect.density_sup, &config.expect.density_sup_at_least].into_iter().flatten() {
            parse_ratio(r)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::InvalidParams(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn stem(&self) -> String {
        self.output.stem.clone().or_else(|| self.name.clone()).unwrap_or_else(|| "run".into())
    }
}

fn parse_ratio(s: &str) -> Result<Density> {
    s.trim().parse::<Density>().map_err(|_| Error::InvalidParams(format!("config: {s:?} is not a ratio")))
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rounds: Option<usize>,
    pub policy: Option<ProbePolicy>,
}

pub struct ExperimentOutcome {
    pub transcript: GameTranscript,
    pub summary: GameSummary,
    /// One entry per unmet expectation.
    pub failures: Vec<String>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path, overrides: &Overrides) -> Result<ExperimentOutcome> {
    let policy = match &overrides.policy {
        Some(p) => p.clone(),
        None => ProbePolicy::from_env()?,
    };
    let mut instance = config.instance.build(base_dir)?;
    if let Some(t) = config.target {
        instance.target = t;
    }
    let k = instance.target_language()?;
    let spec = config.stream.clone().or_else(|| instance.enumeration.clone()).unwrap_or(StreamSpec::Canonical);
    let spec = match overrides.seed {
        Some(seed) => spec.with_seed(seed),
        None => spec,
    };
    let mut stream = spec.build(&k, &policy)?;
    let mut generator = config.generator.build(&instance, &policy)?;
    let game = GameConfig {
        rounds: overrides.rounds.unwrap_or(config.rounds),
        index_validity: config.validity,
        sampling: config.sampling.clone(),
        policy,
    };
    let transcript = run_game(generator.as_mut(), &mut stream, &k, Some(&instance.collection), &game)?;
    let summary = transcript.summary();
    let mut failures = Vec::new();
    let e = &config.expect;
    if e.converges && summary.t_star.is_none() {
        failures.push("converges: violations persist into the final tenth of the run".to_string());
    }
    let sup = super::game::density_profile(&transcript).sup;
    let as_f64 = |d: Density| *d.numer() as f64 / *d.denom() as f64;
    if let Some(want) = &e.density_sup {
        let want = parse_ratio(want)?;
        match sup {
            Some(got) if (as_f64(got) - as_f64(want)).abs() <= e.tolerance => {}
            Some(got) => failures.push(format!("density_sup: measured {got}, expected {want} ± {}", e.tolerance)),
            None => failures.push("density_sup: no density samples after convergence".to_string()),
        }
    }
    if let Some(floor) = &e.density_sup_at_least {
        let floor = parse_ratio(floor)?;
        match sup {
            Some(got) if as_f64(got) + e.tolerance >= as_f64(floor) => {}
            Some(got) => failures.push(format!("density_sup_at_least: measured {got}, expected at least {floor}")),
            None => failures.push("density_sup_at_least: no density samples after convergence".to_string()),
        }
    }
    Ok(ExperimentOutcome { transcript, summary, failures })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranscriptFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct RowJson<'a> {
    round: u64,
    input: String,
    output_kind: &'a str,
    output_repr: String,
    valid: crate::domain::Verdict,
    upper_density: Option<String>,
}

/// Writes the transcript, `<stem>.summary.json` and `<stem>.svg` into
/// `dir`, returning the paths written.
pub fn write_artifacts(
    outcome: &ExperimentOutcome,
    dir: &Path,
    stem: &str,
    format: TranscriptFormat,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let tr = &outcome.transcript;
    let transcript_path = match format {
        TranscriptFormat::Csv => {
            let p = dir.join(format!("{stem}.csv"));
            fs::write(&p, csv_string(tr))?;
            p
        }
        TranscriptFormat::Json => {
            let rows: Vec<RowJson> = tr
                .rounds
                .iter()
                .map(|r| RowJson {
                    round: r.round,
                    input: r.input.short_repr(),
                    output_kind: match r.output.mode() {
                        crate::generators::OutputMode::Set => "set",
                        crate::generators::OutputMode::Index => "index",
                        crate::generators::OutputMode::Element => "element",
                    },
                    output_repr: r.output.to_string(),
                    valid: r.valid,
                    upper_density: r.density.as_ref().map(|d| d.upper.to_string()),
                })
                .collect();
            let p = dir.join(format!("{stem}.transcript.json"));
            fs::write(&p, serde_json::to_string_pretty(&rows)? + "\n")?;
            p
        }
    };
    let summary_path = dir.join(format!("{stem}.summary.json"));
    let summary = serde_json::json!({
        "summary": outcome.summary,
        "passed": outcome.passed(),
        "failures": outcome.failures,
    });
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    let svg_path = dir.join(format!("{stem}.svg"));
    fs::write(&svg_path, density_svg(tr, stem))?;
    Ok(vec![transcript_path, summary_path, svg_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let ok = r#"{"schema": 1, "instance": {"kind": "sperner", "k": 3}, "generator": {"kind": "canonical"}}"#;
        let c = ExperimentConfig::from_json(ok).unwrap();
        assert_eq!(c.rounds, 2000);
        let extra = r#"{"schema": 1, "instance": {"kind": "sperner", "k": 3}, "generator": {"kind": "canonical"}, "colour": 1}"#;
        assert!(ExperimentConfig::from_json(extra).unwrap_err().to_string().contains("colour"));
        let v2 = r#"{"schema": 2, "instance": {"kind": "sperner", "k": 3}, "generator": {"kind": "canonical"}}"#;
        assert!(ExperimentConfig::from_json(v2).is_err());
        let bad_ratio = r#"{"schema": 1, "instance": {"kind": "sperner", "k": 3}, "generator": {"kind": "canonical"},
            "expect": {"density_sup": "half"}}"#;
        assert!(ExperimentConfig::from_json(bad_ratio).is_err());
    }

    #[test]
    fn small_run_meets_its_expectations() {
        let text = r#"{"schema": 1, "instance": {"kind": "sperner", "k": 4}, "generator": {"kind": "canonical"},
            "rounds": 300, "sampling": {"every": 30}, "expect": {"density_sup": "1/3"}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let out = run_experiment(&c, Path::new("."), &Overrides::default()).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert_eq!(out.summary.density_sup.as_deref(), Some("1/3"));
    }
}
