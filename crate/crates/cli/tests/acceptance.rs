//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each, and exits non-zero if any fails.

// `ensure!(x <= tol)` negates the condition so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use murs_core::diff_model::{write_mutant_record, MutantRecord};
use murs_core::feedback::{derive_killed_status, derive_perceived_feedback, KilledStatus, PerceivedFeedback, TemplateStats};
use murs_core::lang_profile::{Language, LanguageProfile, ProfileSet};
use murs_core::mutagen::{mutation_diff, mutations_for_line, MutationOperator};
use murs_core::pipeline::{
    build_store, chi_square_2x2, expected_suppression_counts, kendall_tau_b, rank_records, replay_nfr, surface,
    templates_for, tune, Correction, EvalSet, NfrMode, RankedRecord, ReplayMode, RunConfig, SurfacingCaps,
};
use murs_core::scoring::{GlobalStats, RankingConfig};
use murs_core::suppression::{decide, DecisionReason, DrawSource, FeedbackCounts, SuppressionPolicy};
use murs_core::synthetic::{generate, SyntheticSpec};
use murs_core::template_store::TemplateStore;
use murs_core::templating::{Abstraction, TemplateConfig, TemplateKey, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn record(id: &str, language: Language, diff: &str, pos: bool, neg: bool, killed: &[bool]) -> MutantRecord {
    MutantRecord {
        mutant_id: id.into(),
        changelist_id: format!("cl-{id}"),
        filename: "f".into(),
        language,
        diff: diff.into(),
        pos_feedback: vec![pos; killed.len()],
        neg_feedback: vec![neg; killed.len()],
        killed: killed.to_vec(),
        operator: None,
        timestamp: None,
    }
}

fn labels_of(r: &MutantRecord) -> (PerceivedFeedback, KilledStatus) {
    (
        derive_perceived_feedback(&r.pos_feedback, &r.neg_feedback).unwrap(),
        derive_killed_status(&r.killed).unwrap(),
    )
}

fn tuning_replay_fixture() -> Outcome {
    let started = Instant::now();
    let profiles = ProfileSet::builtin();
    let py = Language::Python;
    let train = vec![
        record("t1", py, "-    total = base + 1", true, false, &[false]),
        record("t2", py, "-    total = base + 2", true, false, &[false]),
        record("t3", py, "-    log(request)", false, true, &[false]),
        record("t4", py, "-    log(response)", false, true, &[false]),
    ];
    let eval = vec![
        record("A", py, "-    count = seen + 7", true, false, &[false]),
        record("B", py, "-    return first", false, false, &[false]),
        record("C", py, "-    log(answer)", false, true, &[false]),
        record("D", py, "-    del cache[key]", false, true, &[false]),
    ];
    let config = RunConfig {
        template: TemplateConfig::default(),
        ranking: RankingConfig::default(),
        suppression: SuppressionPolicy::AverageThreshold,
    };
    let report = tune(&train, &eval, &[config], 0, &profiles).map_err(|e| e.to_string())?;
    let outcome = report.best_row().outcome;
    ensure!(outcome.retained.retained == 3.0, "retained {} mutants, expected exactly A, B, D", outcome.retained.retained);
    ensure!(outcome.nfr() == Some(1.0 / 3.0), "hypothetical NFR {:?}", outcome.nfr());
    ensure!(outcome.baseline_nfr() == Some(1.0 / 2.0), "baseline NFR {:?}", outcome.baseline_nfr());

    let store = build_store(&train, TemplateConfig::default(), &profiles, 0).store;
    let (ranked, _) = rank_records(&eval, &store, &RankingConfig::default(), SuppressionPolicy::AverageThreshold, 0, &profiles);
    let suppressed: Vec<&str> = ranked.iter().filter(|r| r.suppressed).map(|r| r.mutant_id.as_str()).collect();
    ensure!(suppressed == ["C"], "suppressed {suppressed:?}");
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("nfr=1/3 baseline=1/2 in {elapsed:?}"))
}

fn suppression_probability_fixture() -> Outcome {
    let global = GlobalStats { m: 10.0, avg_us: 0.5, std_us: 0.2, template_count: 10, degenerate: false };
    let counts = FeedbackCounts { pu: 3, pnu: 7 };
    let d = decide(Some(counts), &global, SuppressionPolicy::Probabilistic, || 0.5);
    let (z, p, q) = (d.z.unwrap(), d.p.unwrap(), d.suppress_probability.unwrap());
    ensure!((z + 1.0).abs() < 1e-9, "z = {z}");
    ensure!((p - 0.15866).abs() <= 1e-4, "p = {p}");
    ensure!((q - 0.84134).abs() <= 1e-4, "q = {q}");

    let n = 100_000u64;
    let hits = (0..n)
        .filter(|&seed| {
            let draw = DrawSource::new(seed);
            decide(Some(counts), &global, SuppressionPolicy::Probabilistic, || draw.draw("mutant")).suppressed
        })
        .count();
    let fraction = hits as f64 / n as f64;
    let se = (q * (1.0 - q) / n as f64).sqrt();
    ensure!((fraction - q).abs() <= 3.0 * se, "suppressed fraction {fraction} vs {q} (se {se})");
    Ok(format!("z={z:.6} p={p:.6} q={q:.6} sampled={fraction:.5}"))
}

fn template_recovery_fixture() -> Outcome {
    let profiles = ProfileSet::builtin();
    let cases: [(Language, &[&str], usize, MutationOperator, Option<&str>, &str); 4] = [
        (
            Language::Go,
            &["func check() error {", "\tif err != nil { return err }", "\treturn nil", "}"],
            1,
            MutationOperator::Sbr,
            None,
            "-if GO_IDENTIFIER_0 != GO_IDENTIFIER_1 { return GO_IDENTIFIER_0 }",
        ),
        (
            Language::Java,
            &["class Opts {", "  @Option(name = Flags.VERBOSE, enabled = true)", "  boolean verbose;", "}"],
            1,
            MutationOperator::Uoi,
            Some("!(true)"),
            "-@JAVA_IDENTIFIER_0(JAVA_IDENTIFIER_1 = JAVA_IDENTIFIER_2.JAVA_IDENTIFIER_3, JAVA_IDENTIFIER_4 = true)\n\
             +@JAVA_IDENTIFIER_0(JAVA_IDENTIFIER_1 = JAVA_IDENTIFIER_2.JAVA_IDENTIFIER_3, JAVA_IDENTIFIER_4 = !(true))",
        ),
        (
            Language::Cpp,
            &["  if (lhs < rhs) {", "    return -1;", "  } else if (lhs == rhs) {", "    return 0;", "  }"],
            2,
            MutationOperator::Ror,
            Some("if (true)"),
            "-} else if (CPP_IDENTIFIER_0 == CPP_IDENTIFIER_1) {\n+} else if (true) {",
        ),
        (
            Language::Python,
            &["def handle(id):", "    x = 1", "    log(id)", "    return x"],
            2,
            MutationOperator::Sbr,
            None,
            "-PYTHON_IDENTIFIER_0(PYTHON_IDENTIFIER_1)",
        ),
    ];
    // `needle` picks the replacement; `None` selects the statement deletion.
    for (language, lines, index, op, needle, expected) in cases {
        let source: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        let profile = LanguageProfile::builtin(language);
        let mutations = mutations_for_line(&source[index], op, profile);
        let mutation = mutations
            .iter()
            .find(|m| match (needle, &m.replacement) {
                (None, None) => true,
                (Some(n), Some(r)) => r.contains(n),
                _ => false,
            })
            .ok_or_else(|| format!("{language} {op}: no matching mutation among {mutations:?}"))?;
        let diff = mutation_diff(&source, index, mutation.replacement.as_deref());
        let records = [record("m", language, &diff, true, false, &[true])];
        let store = build_store(&records, TemplateConfig::default(), &profiles, 0).store;
        let keys: Vec<&str> = store.entries().keys().map(|k| k.text.as_str()).collect();
        ensure!(keys == [expected], "{language} {op}: got {keys:?}");
    }
    Ok("Go SBR, Java UOI, C++ ROR, Python SBR templates reproduced bit-exactly".into())
}

/// Pearson statistic computed cell by cell.
fn pearson(table: [[u64; 2]; 2], yates: bool) -> f64 {
    let n: f64 = table.iter().flatten().sum::<u64>() as f64;
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] as f64 * cols[j] as f64 / n;
            let mut d = (table[i][j] as f64 - e).abs();
            if yates {
                d = (d - 0.5).max(0.0);
            }
            stat += d * d / e;
        }
    }
    stat
}

/// Upper tail of chi-square(1) by Simpson integration of its density after `t = u^2`.
fn chi2_1_upper_tail(x: f64) -> f64 {
    let upper = x.sqrt();
    let n = 20_000;
    let h = upper / n as f64;
    let f = |u: f64| 2.0 * (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = f(0.0) + f(upper);
    for i in 1..n {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - sum * h / 3.0
}

fn chi_square_fixture() -> Outcome {
    let table = [[9688, 1253], [11233, 1592]];
    let mut notes = Vec::new();
    for (correction, yates) in [(Correction::None, false), (Correction::Yates, true)] {
        let r = chi_square_2x2(table, correction).map_err(|e| e.to_string())?;
        let stat = pearson(table, yates);
        ensure!((r.statistic - stat).abs() <= 1e-6, "{correction:?}: statistic {} vs {stat}", r.statistic);
        let p = chi2_1_upper_tail(r.statistic);
        ensure!((r.p_value - p).abs() <= 1e-6, "{correction:?}: p {} vs numeric {p}", r.p_value);
        ensure!((0.020..=0.026).contains(&r.p_value), "{correction:?}: p {} outside [0.020, 0.026]", r.p_value);
        notes.push(format!("{correction:?}: stat={:.6} p={:.5}", r.statistic, r.p_value));
    }
    Ok(notes.join(", "))
}

fn write_records(path: &Path, records: &[MutantRecord]) {
    let mut text = String::new();
    for r in records {
        text.push_str(&write_mutant_record(r));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn grid_cardinality_and_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = generate(&SyntheticSpec { records: 10_000, shapes: 400, seed: 5, ..Default::default() });
    let (train, eval) = corpus.records.split_at(8_000);
    let (train_path, eval_path) = (dir.path().join("train.tsv"), dir.path().join("eval.tsv"));
    write_records(&train_path, train);
    write_records(&eval_path, eval);
    let run = || -> Result<(Vec<u8>, Duration), String> {
        let started = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_murs"))
            .args(["tune", "--grid", "full", "--seed", "9", "--train"])
            .arg(&train_path)
            .arg("--eval")
            .arg(&eval_path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "tune failed: {}", String::from_utf8_lossy(&out.stderr));
        Ok((out.stdout, started.elapsed()))
    };
    let (first, t1) = run()?;
    let (second, t2) = run()?;
    let rows = String::from_utf8_lossy(&first).lines().filter(|l| l.starts_with("template=")).count();
    ensure!(rows == 288, "{rows} rows");
    ensure!(first == second, "outputs differ between runs");
    let slowest = t1.max(t2);
    ensure!(slowest < Duration::from_secs(300), "tune took {slowest:?}");
    Ok(format!("288 rows, identical, slowest run {slowest:?} on 10k records"))
}

fn oracle_equivalence() -> Outcome {
    let profiles = ProfileSet::builtin();

    // Aggregation against a recount with independently derived labels.
    let mut corpus = generate(&SyntheticSpec { records: 1000, shapes: 60, mixed_rate: 0.2, seed: 17, ..Default::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for r in &mut corpus.records {
        for v in [&mut r.pos_feedback, &mut r.neg_feedback, &mut r.killed] {
            for b in v.iter_mut() {
                *b = rng.gen_bool(0.3);
            }
        }
    }
    let records = corpus.records;
    let outcome = build_store(&records, TemplateConfig::default(), &profiles, 0);
    let keys = templates_for(&records, &outcome.store, &profiles);
    let mut recount: HashMap<TemplateKey, [u64; 10]> = HashMap::new();
    for (r, key) in records.iter().zip(keys) {
        let c = recount.entry(key.map_err(|e| e.to_string())?).or_default();
        let (p, n) = (r.pos_feedback.contains(&true), r.neg_feedback.contains(&true));
        c[match (p, n) {
            (true, false) => 0,
            (false, true) => 1,
            (true, true) => 2,
            (false, false) => 3,
        }] += 1;
        let first = r.killed.iter().position(|&b| b);
        let class = match first {
            None => 5,
            Some(0) if r.killed.iter().all(|&b| b) => 4,
            Some(i) if r.killed[i..].iter().all(|&b| b) => 6,
            Some(_) => 7,
        };
        c[class] += 1;
        c[8] += 1;
        if first.is_some() {
            c[9] += 1;
        }
    }
    ensure!(recount.len() == outcome.store.len(), "{} templates vs {} recounted", outcome.store.len(), recount.len());
    for (key, c) in &recount {
        let s = outcome.store.lookup(key).ok_or_else(|| format!("missing {key}"))?;
        let got = [s.pu, s.pnu, s.mf, s.nf, s.ak, s.nk, s.ek, s.mk, s.g, s.k];
        ensure!(&got == c, "{key}: {got:?} vs recount {c:?}");
    }

    // Kendall tau-b against pair enumeration.
    let mut checked = 0;
    for n in 2..=50usize {
        for trial in 0..20 {
            let range = if trial % 2 == 0 { 4 } else { 1000 };
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..range) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..range) as f64).collect();
            let (mut nc, mut nd, mut tx, mut ty) = (0u64, 0u64, 0u64, 0u64);
            for i in 0..n {
                for j in i + 1..n {
                    let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
                    if dx == 0.0 && dy == 0.0 {
                    } else if dx == 0.0 {
                        tx += 1;
                    } else if dy == 0.0 {
                        ty += 1;
                    } else if (dx > 0.0) == (dy > 0.0) {
                        nc += 1;
                    } else {
                        nd += 1;
                    }
                }
            }
            let denom = ((nc + nd + tx) as f64) * ((nc + nd + ty) as f64);
            let expected = (denom != 0.0).then(|| (nc as f64 - nd as f64) / denom.sqrt());
            let got = kendall_tau_b(&x, &y).map_err(|e| e.to_string())?;
            ensure!(got == expected, "n={n}: tau-b {got:?} vs {expected:?} for {x:?} / {y:?}");
            checked += 1;
        }
    }

    // Expected suppression counts against Monte-Carlo replays.
    let corpus = generate(&SyntheticSpec { records: 1100, shapes: 30, seed: 23, ..Default::default() });
    let (train, eval) = corpus.records.split_at(1000);
    let store = build_store(train, TemplateConfig::default(), &profiles, 0).store;
    let eval = EvalSet::new(eval, &profiles);
    let expected = expected_suppression_counts(&eval, &store, SuppressionPolicy::Probabilistic);
    let expect = |labels: &[PerceivedFeedback]| labels.iter().map(|l| expected[l]).sum::<f64>();
    use PerceivedFeedback::*;
    let targets = [
        ("all", expect(&[PerceivedUseful, PerceivedNotUseful, MixedFeedback, NoFeedback])),
        ("negative", expect(&[PerceivedNotUseful, MixedFeedback])),
        ("useful", expect(&[PerceivedUseful])),
        ("no-feedback", expect(&[NoFeedback])),
    ];
    let replays = 10_000;
    let mut samples: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(replays)).collect();
    for seed in 0..replays as u64 {
        let o = replay_nfr(&eval, &store, SuppressionPolicy::Probabilistic, seed, ReplayMode::Sampled, NfrMode::AllSurfaced);
        let (b, r) = (o.baseline, o.retained);
        samples[0].push(b.retained - r.retained);
        samples[1].push(b.negative - r.negative);
        samples[2].push((b.with_feedback - b.negative) - (r.with_feedback - r.negative));
        samples[3].push((b.retained - b.with_feedback) - (r.retained - r.with_feedback));
    }
    let mut notes = Vec::new();
    for ((name, target), s) in targets.iter().zip(&samples) {
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let sigma = (var / n).sqrt();
        ensure!((mean - target).abs() <= 3.0 * sigma, "{name}: monte-carlo {mean} vs expected {target} (sigma {sigma})");
        notes.push(format!("{name} {target:.2}/{mean:.2}"));
    }
    Ok(format!(
        "{} templates recounted, {checked} tau-b cases, suppressed expected/sampled: {}",
        recount.len(),
        notes.join(" ")
    ))
}

fn safety_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut suppressions = 0;
    for i in 0..100_000u64 {
        let global = GlobalStats {
            m: rng.gen_range(0.0..50.0),
            avg_us: rng.gen_range(0.0..=1.0),
            std_us: if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..0.5) },
            template_count: rng.gen_range(0..100),
            degenerate: rng.gen_bool(0.05),
        };
        let policy = SuppressionPolicy::ALL[rng.gen_range(0..3)];
        let kind = rng.gen_range(0..3);
        let counts = match kind {
            0 => None,
            1 => Some(FeedbackCounts { pu: 0, pnu: 0 }),
            _ => Some(FeedbackCounts { pu: rng.gen_range(0..20), pnu: rng.gen_range(0..20) }),
        };
        let draw = DrawSource::new(i);
        let d = decide(counts, &global, policy, || draw.draw("m"));
        suppressions += d.suppressed as u64;
        match kind {
            0 => ensure!(!d.suppressed && d.reason == DecisionReason::UnseenTemplate, "unseen template: {d:?}"),
            1 => ensure!(!d.suppressed && d.reason == DecisionReason::NoFeedback, "template without feedback: {d:?}"),
            _ => {}
        }
    }

    let mut caps_checked = 0;
    for trial in 0..200 {
        let n = rng.gen_range(0..200);
        let ranked: Vec<RankedRecord> = (0..n)
            .map(|i| RankedRecord {
                mutant_id: format!("m{i}"),
                changelist_id: format!("cl{}", rng.gen_range(0..4)),
                filename: format!("f{}", rng.gen_range(0..5)),
                rank: i + 1,
                feedback_score: 0.5,
                kill_score: "0.5".into(),
                suppressed: rng.gen_bool(0.3),
                reason: DecisionReason::AboveAverage,
                z: None,
                p: None,
                suppress_probability: None,
            })
            .collect();
        let per_file = rng.gen_range(1..5);
        let caps = SurfacingCaps::new(per_file, rng.gen_range(per_file..12)).map_err(|e| e.to_string())?;
        let shown = surface(&ranked, caps);
        let mut per_cl: HashMap<&str, usize> = HashMap::new();
        let mut per_file: HashMap<(&str, &str), usize> = HashMap::new();
        for r in &shown {
            ensure!(!r.suppressed, "trial {trial}: suppressed mutant surfaced");
            *per_cl.entry(&r.changelist_id).or_default() += 1;
            *per_file.entry((&r.changelist_id, &r.filename)).or_default() += 1;
        }
        ensure!(per_cl.values().all(|&c| c <= caps.per_changelist()), "trial {trial}: changelist cap exceeded");
        ensure!(per_file.values().all(|&c| c <= caps.per_file()), "trial {trial}: file cap exceeded");
        caps_checked += shown.len();
    }
    Ok(format!("10^5 decisions ({suppressions} suppressions, none unsafe), {caps_checked} surfaced mutants within caps"))
}

fn label_exhaustiveness() -> Outcome {
    let bits = |mask: u32, len: u32| (0..len).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>();
    let mut feedback_inputs = 0;
    let mut killed_inputs = 0;
    let mut seen_feedback = BTreeMap::new();
    let mut seen_killed = BTreeMap::new();
    for len in 1..=6u32 {
        for pm in 0..1u32 << len {
            let pos = bits(pm, len);
            for nm in 0..1u32 << len {
                let neg = bits(nm, len);
                let label = derive_perceived_feedback(&pos, &neg).map_err(|e| e.to_string())?;
                let (p, n) = (pos.contains(&true), neg.contains(&true));
                let matches = [
                    (PerceivedFeedback::PerceivedUseful, p && !n),
                    (PerceivedFeedback::PerceivedNotUseful, !p && n),
                    (PerceivedFeedback::MixedFeedback, p && n),
                    (PerceivedFeedback::NoFeedback, !p && !n),
                ];
                let hits: Vec<_> = matches.iter().filter(|m| m.1).map(|m| m.0).collect();
                ensure!(hits == [label], "{pos:?}/{neg:?}: derived {label}, predicates {hits:?}");
                *seen_feedback.entry(label).or_insert(0) += 1;
                feedback_inputs += 1;
            }
            let killed = pos;
            let label = derive_killed_status(&killed).map_err(|e| e.to_string())?;
            let all = killed.iter().all(|&b| b);
            let none = !killed.contains(&true);
            let monotone = killed.windows(2).all(|w| w[0] <= w[1]);
            let matches = [
                (KilledStatus::AlwaysKilled, all),
                (KilledStatus::NeverKilled, none),
                (KilledStatus::EventuallyKilled, !all && !none && monotone),
                (KilledStatus::MixedKilled, !all && !none && !monotone),
            ];
            let hits: Vec<_> = matches.iter().filter(|m| m.1).map(|m| m.0).collect();
            ensure!(hits == [label], "{killed:?}: derived {label}, predicates {hits:?}");
            *seen_killed.entry(label).or_insert(0) += 1;
            killed_inputs += 1;
        }
    }
    ensure!(seen_feedback.len() == 4 && seen_killed.len() == 4, "not every class reached");
    Ok(format!("{feedback_inputs} feedback pairs and {killed_inputs} kill histories classified uniquely"))
}

#[cfg(unix)]
fn run_measured(cmd: &mut Command) -> Result<(Duration, u64), String> {
    let started = Instant::now();
    let child = cmd.spawn().map_err(|e| e.to_string())?;
    let mut status = 0;
    // SAFETY: `rusage` is plain data; wait4 reaps our own child and fills it in.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let pid = unsafe { libc::wait4(child.id() as libc::pid_t, &mut status, 0, &mut usage) };
    let elapsed = started.elapsed();
    ensure!(pid > 0, "wait4 failed");
    ensure!(libc::WIFEXITED(status) && libc::WEXITSTATUS(status) == 0, "child exited with status {status}");
    // ru_maxrss is in KiB on Linux.
    Ok((elapsed, usage.ru_maxrss as u64 * 1024))
}

fn scale_check() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = generate(&SyntheticSpec { records: 100_000, shapes: 2_000, seed: 31, ..Default::default() });
    let records = dir.path().join("records.tsv");
    write_records(&records, &corpus.records);
    drop(corpus);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_murs"));
    cmd.arg("build-store")
        .arg("--records")
        .arg(&records)
        .arg("--out")
        .arg(dir.path().join("s.store"))
        .stderr(std::process::Stdio::null());
    let (elapsed, peak) = run_measured(&mut cmd)?;
    ensure!(elapsed < Duration::from_secs(60), "build-store took {elapsed:?}");
    ensure!(peak < 1 << 30, "peak RSS {} MiB", peak >> 20);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let languages = [Language::Python, Language::Java, Language::Cpp, Language::Go, Language::TypeScript];
    let key = |i: u64| {
        TemplateKey::new(
            languages[(i % 5) as usize],
            format!("-IDENTIFIER_0 = IDENTIFIER_1.IDENTIFIER_{i}(INT_0, {})", i * 7919 % 104_729),
        )
    };
    let entries: HashMap<TemplateKey, TemplateStats> = (0..1_000_000u64)
        .map(|i| {
            let mut s = TemplateStats::zero();
            s.record(PerceivedFeedback::ALL[(i % 4) as usize], KilledStatus::NeverKilled);
            (key(i), s)
        })
        .collect();
    let store = TemplateStore::new(TemplateConfig::new(Abstraction::IndexedTyped, 0, 0), Vocabulary::empty(), entries, 0);
    ensure!(store.len() == 1_000_000, "store has {} entries", store.len());
    let probes: Vec<TemplateKey> = (0..100_000).map(|_| key(rng.gen_range(0..1_200_000))).collect();
    let mut times = Vec::with_capacity(probes.len());
    let mut found = 0;
    for k in &probes {
        let t = Instant::now();
        let hit = store.lookup(std::hint::black_box(k)).is_some();
        times.push(t.elapsed());
        found += hit as usize;
    }
    times.sort();
    let p99 = times[times.len() * 99 / 100];
    ensure!(p99 < Duration::from_micros(10), "lookup p99 {p99:?}");
    Ok(format!(
        "100k records in {elapsed:?}, peak {} MiB; lookup p99 {p99:?} over {} probes ({found} hits) at 10^6 entries",
        peak >> 20,
        probes.len()
    ))
}

fn ranking_behavior() -> Outcome {
    let profiles = ProfileSet::builtin();
    let mut wins = 0;
    let mut worst = f64::INFINITY;
    for seed in 0..100u64 {
        let corpus = generate(&SyntheticSpec { records: 1500, shapes: 40, seed: 1000 + seed, ..Default::default() });
        let (train, eval) = corpus.records.split_at(1000);
        let store = build_store(train, TemplateConfig::default(), &profiles, 0).store;
        let (ranked, diagnostics) = rank_records(eval, &store, &RankingConfig::default(), SuppressionPolicy::None, seed, &profiles);
        ensure!(diagnostics.is_empty() && ranked.len() == eval.len(), "seed {seed}: records skipped");
        let negative: HashMap<&str, bool> = eval.iter().map(|r| (r.mutant_id.as_str(), labels_of(r).0.is_negative())).collect();
        let half = ranked.len() / 2;
        let fraction = |part: &[RankedRecord]| {
            part.iter().filter(|r| negative[r.mutant_id.as_str()]).count() as f64 / part.len() as f64
        };
        let (top, bottom) = (fraction(&ranked[..half]), fraction(&ranked[ranked.len() - half..]));
        if top < bottom {
            wins += 1;
        }
        worst = worst.min(bottom - top);
    }
    ensure!(wins >= 99, "top half less negative in {wins}/100 corpora");
    Ok(format!("{wins}/100 corpora; smallest gap {worst:.3}"))
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("tuning replay fixture", tuning_replay_fixture),
        ("suppression probability fixture", suppression_probability_fixture),
        ("template recovery fixture", template_recovery_fixture),
        ("chi-square fixture", chi_square_fixture),
        ("grid cardinality and determinism", grid_cardinality_and_determinism),
        ("oracle equivalence", oracle_equivalence),
        ("safety properties", safety_properties),
        ("label exhaustiveness", label_exhaustiveness),
        ("scale check", scale_check),
        ("ranking behavior", ranking_behavior),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({:.1?})", i + 1, started.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
