//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use counterscope_core::ingest::{qc_filter, CleanDataset};
use counterscope_core::profile::{build_profiles, AggregationMode, ProfileSet, VolumeSummary};
use counterscope_core::scoring::{score_profile_set, ScoreCard};
use counterscope_core::synth::{generate, ScenarioSpec, Truth};

pub mod equivalence;
pub mod golden;
pub mod oracle;
pub mod props;

/// A named check: a short summary on success, a reason on failure.
pub type Check = fn() -> Result<String, String>;

pub struct Run {
    pub data: CleanDataset,
    pub profiles: ProfileSet<f64>,
    pub cards: Vec<ScoreCard<f64>>,
    pub volumes: VolumeSummary,
    pub truth: Truth,
}

/// synth -> QC -> monthly profiles -> scores, the same path the CLI takes.
pub fn run(spec: &ScenarioSpec) -> Run {
    let (records, truth) = generate(spec).expect("valid scenario");
    let data = qc_filter(records);
    let profiles = build_profiles(&data, &spec.holidays, AggregationMode::Monthly);
    let cards = score_profile_set(&profiles).expect("scores");
    let volumes = VolumeSummary::from_dataset(&data, &spec.holidays);
    Run {
        data,
        profiles,
        cards,
        volumes,
        truth,
    }
}

/// Small deterministic value stream for hand-rolled random instances.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
