//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations: render a diff as a template, explore how a template's
//! feedback counts turn into scores and a suppression decision, and mutate one
//! line of source code and template the result.
//!
//! Each export is a thin wrapper over a plain Rust function so the logic can be
//! tested natively.

use murs_core::diff_model::MutantRecord;
use murs_core::feedback::TemplateStats;
use murs_core::lang_profile::{Language, ProfileSet};
use murs_core::mutagen::generate_mutants;
use murs_core::scoring::{bayes_usefulness_score, bayes_weight, controversy, GlobalStats};
use murs_core::suppression::{assess, decide, DrawSource, FeedbackCounts, SuppressionPolicy};
use murs_core::templating::{build_template, Abstraction, PreparedDiff, TemplateConfig, Vocabulary};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn parse<T: std::str::FromStr<Err = murs_core::Error>>(value: &str) -> Result<T, String> {
    value.parse().map_err(|e: murs_core::Error| e.to_string())
}

/// Renders `diff` as a template. `vocabulary` is a whitespace-separated list
/// of tokens kept verbatim.
pub fn template_text(diff: &str, language: &str, abstraction: &str, context: usize, vocabulary: &str) -> Result<String, String> {
    let language: Language = parse(language)?;
    let abstraction: Abstraction = parse(abstraction)?;
    let tokens: Vec<String> = vocabulary.split_whitespace().map(str::to_owned).collect();
    let size = tokens.len();
    let vocab = Vocabulary::new(tokens, size).map_err(|e| e.to_string())?;
    let profiles = ProfileSet::builtin();
    let prepared = PreparedDiff::new(diff, profiles.get(language)).map_err(|e| e.to_string())?;
    Ok(prepared.render(&TemplateConfig::new(abstraction, context, size), &vocab).text)
}

#[wasm_bindgen(js_name = buildTemplate)]
pub fn build_template_js(diff: &str, language: &str, abstraction: &str, context: usize, vocabulary: &str) -> Result<String, JsError> {
    template_text(diff, language, abstraction, context, vocabulary).map_err(|e| JsError::new(&e))
}

/// Scores and the suppression decision for one template.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    /// `NaN` when the template has no useful/not-useful feedback.
    pub usefulness: f64,
    pub bayes_weight: f64,
    pub bayes_usefulness: f64,
    pub controversy: f64,
    /// `NaN` unless the probabilistic policy computed one.
    pub z: f64,
    pub suppress_probability: f64,
    pub suppressed: bool,
    pub reason: String,
    /// Suppression probability at usefulness `i / (curve.len() - 1)`.
    pub curve: Vec<f64>,
}

const CURVE_POINTS: u64 = 101;
const CURVE_SCALE: u64 = 1000;

#[allow(clippy::too_many_arguments)]
pub fn explore_counts(
    pu: u64,
    pnu: u64,
    m: f64,
    avg_us: f64,
    std_us: f64,
    policy: &str,
    seed: u64,
    mutant_id: &str,
) -> Result<Exploration, String> {
    let policy: SuppressionPolicy = parse(policy)?;
    if !(0.0..=1.0).contains(&avg_us) || std_us < 0.0 || !std_us.is_finite() || m < 0.0 || !m.is_finite() {
        return Err("need 0 <= avg_us <= 1, std_us >= 0 and m >= 0".into());
    }
    let global = GlobalStats { m, avg_us, std_us, template_count: 1, degenerate: false };
    let stats = TemplateStats { pu, pnu, g: pu + pnu, nk: pu + pnu, ..TemplateStats::zero() };
    let counts = FeedbackCounts { pu, pnu };
    let draws = DrawSource::new(seed);
    let decision = decide(Some(counts), &global, policy, || draws.draw(mutant_id));
    let curve = (0..CURVE_POINTS)
        .map(|i| {
            let good = i * CURVE_SCALE / (CURVE_POINTS - 1);
            let counts = FeedbackCounts { pu: good, pnu: CURVE_SCALE - good };
            assess(Some(counts), &global, policy).suppress_probability()
        })
        .collect();
    Ok(Exploration {
        usefulness: counts.usefulness().unwrap_or(f64::NAN),
        bayes_weight: bayes_weight(&stats, &global),
        bayes_usefulness: bayes_usefulness_score(&stats, &global),
        controversy: controversy(&stats),
        z: decision.z.unwrap_or(f64::NAN),
        suppress_probability: decision.suppress_probability.unwrap_or(0.0),
        suppressed: decision.suppressed,
        reason: decision.reason.as_str().to_owned(),
        curve,
    })
}

#[wasm_bindgen(js_name = explore)]
#[allow(clippy::too_many_arguments)]
pub fn explore_js(
    pu: u32,
    pnu: u32,
    m: f64,
    avg_us: f64,
    std_us: f64,
    policy: &str,
    seed: u32,
    mutant_id: &str,
) -> Result<Exploration, JsError> {
    explore_counts(pu.into(), pnu.into(), m, avg_us, std_us, policy, seed.into(), mutant_id).map_err(|e| JsError::new(&e))
}

/// `(operator, diff, template)` of the mutant placed on `line` (1-based), if any.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone, PartialEq)]
pub struct Mutation {
    pub operator: String,
    pub diff: String,
    pub template: String,
}

pub fn mutate_source(source: &str, line: usize, language: &str, seed: u64) -> Result<Option<Mutation>, String> {
    let language: Language = parse(language)?;
    let profiles = ProfileSet::builtin();
    let lines: Vec<String> = source.lines().map(str::to_owned).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mutants = generate_mutants(&lines, &[line].into(), profiles.get(language), "demo", "demo", &mut rng)
        .map_err(|e| e.to_string())?;
    let Some(mutant): Option<MutantRecord> = mutants.into_iter().next() else {
        return Ok(None);
    };
    let template = build_template(&mutant, &TemplateConfig::default(), &Vocabulary::empty(), &profiles)
        .map_err(|e| e.to_string())?;
    Ok(Some(Mutation {
        operator: mutant.operator.map(|o| o.as_str().to_owned()).unwrap_or_default(),
        diff: mutant.diff,
        template: template.text,
    }))
}

#[wasm_bindgen(js_name = mutate)]
pub fn mutate_js(source: &str, line: u32, language: &str, seed: u32) -> Result<Option<Mutation>, JsError> {
    mutate_source(source, line as usize, language, seed.into()).map_err(|e| JsError::new(&e))
}
