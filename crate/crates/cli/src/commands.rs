use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use murs_core::diff_model::{escape_field, load_mutant_records, write_mutant_record, MutantRecord};
use murs_core::lang_profile::{Language, LanguageProfile, ProfileSet};
use murs_core::mutagen::{generate_mutants, parse_changed_lines};
use murs_core::pipeline::{
    build_store, full_grid, negative_templates, rank_records, read_ranked_records, surface, top_controversial, tune,
    write_ranked_record, RunConfig, SurfacingCaps,
};
use murs_core::scoring::{KillCounterPolarity, RankingConfig};
use murs_core::suppression::SuppressionPolicy;
use murs_core::template_store::TemplateStore;
use murs_core::templating::{Abstraction, TemplateConfig};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{BuildStoreArgs, Cli, Command, MutateArgs, RankArgs, ReportArgs, SurfaceArgs, TuneArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(murs_core::Error),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    /// Downstream closed stdout early, e.g. `murs rank ... | head`.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Data(murs_core::Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<murs_core::Error> for CliError {
    fn from(e: murs_core::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses a flag value, reporting failures as usage errors.
fn flag<T: std::str::FromStr<Err = murs_core::Error>>(value: &str) -> CliResult<T> {
    value.parse().map_err(|e: murs_core::Error| CliError::Usage(e.to_string()))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()))
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_records(path: &Path) -> CliResult<Vec<MutantRecord>> {
    let outcome = load_mutant_records(open(path)?)?;
    for d in &outcome.diagnostics {
        eprintln!("warning: {}:{d}", path.display());
    }
    if outcome.records.is_empty() && outcome.input_records > 0 {
        return Err(CliError::Data(murs_core::Error::Input(format!(
            "{}: all {} records were rejected",
            path.display(),
            outcome.input_records
        ))));
    }
    Ok(outcome.records)
}

fn load_store(path: &Path) -> CliResult<TemplateStore> {
    TemplateStore::load(path).map_err(|e| match e {
        murs_core::Error::Io(io) => CliError::Data(io::Error::new(io.kind(), format!("{}: {io}", path.display())).into()),
        other => CliError::Data(other),
    })
}

pub fn run(cli: Cli) -> CliResult {
    let profiles = match &cli.profiles {
        Some(dir) => ProfileSet::load_dir(dir)?,
        None => ProfileSet::builtin(),
    };
    match cli.command {
        Command::BuildStore(a) => build_store_cmd(a, &profiles),
        Command::Rank(a) => rank_cmd(a, &profiles),
        Command::Surface(a) => surface_cmd(a),
        Command::Tune(a) => tune_cmd(a, &profiles),
        Command::Report(a) => report_cmd(a, &profiles),
        Command::Mutate(a) => mutate_cmd(a, &profiles),
    }
}

fn build_store_cmd(a: BuildStoreArgs, profiles: &ProfileSet) -> CliResult {
    let config = TemplateConfig::new(flag::<Abstraction>(&a.template)?, a.context, a.vocab);
    for w in config.grid_warnings() {
        eprintln!("warning: {w}");
    }
    let built_at = match a.built_at {
        Some(t) => t,
        None => match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("SOURCE_DATE_EPOCH `{v}` is not an integer")))?,
            Err(_) => 0,
        },
    };
    let records = load_records(&a.records)?;
    let outcome = build_store(&records, config, profiles, built_at);
    for d in &outcome.diagnostics {
        eprintln!("warning: {d}");
    }
    if let Some((key, _)) = outcome.store.entries().iter().find(|(_, s)| s.check().is_err()) {
        return Err(CliError::Internal(format!("counter invariant violated for {key}")));
    }
    let g = outcome.store.global();
    if g.degenerate {
        eprintln!("warning: no template has useful/not-useful feedback; using a neutral prior");
    }
    outcome.store.save(&a.out)?;
    eprintln!(
        "built {} templates from {} records ({} skipped); m={} avg_us={} std_us={}",
        outcome.store.len(),
        records.len() - outcome.skipped,
        outcome.skipped,
        g.m,
        g.avg_us,
        g.std_us
    );
    Ok(())
}

fn rank_cmd(a: RankArgs, profiles: &ProfileSet) -> CliResult {
    let mut ranking: RankingConfig = flag(&a.ranking)?;
    if a.fewer_killed_first {
        ranking.kill_counter_polarity = KillCounterPolarity::FewerAlwaysKilledFirst;
    }
    let policy: SuppressionPolicy = flag(&a.suppression)?;
    let store = load_store(&a.store)?;
    let records = load_records(&a.records)?;
    if policy == SuppressionPolicy::Probabilistic && store.global().std_us == 0.0 && !store.global().degenerate {
        eprintln!("warning: usefulness scores have zero spread; below-average templates are always suppressed");
    }
    let (ranked, diagnostics) = rank_records(&records, &store, &ranking, policy, a.seed, profiles);
    for d in &diagnostics {
        eprintln!("warning: {d}");
    }
    let mut out = output(&a.out)?;
    for r in &ranked {
        writeln!(out, "{}", write_ranked_record(r))?;
    }
    out.flush()?;
    Ok(())
}

fn surface_cmd(a: SurfaceArgs) -> CliResult {
    let caps = SurfacingCaps::new(a.per_file, a.per_changelist).map_err(|e| CliError::Usage(e.to_string()))?;
    let ranked = read_ranked_records(open(&a.ranked)?)?;
    let mut out = output(&a.out)?;
    for r in surface(&ranked, caps) {
        writeln!(out, "{}", write_ranked_record(&r))?;
    }
    out.flush()?;
    Ok(())
}

fn tune_cmd(a: TuneArgs, profiles: &ProfileSet) -> CliResult {
    let grid: Vec<RunConfig> = if a.grid == "full" {
        full_grid()
    } else {
        let text = fs::read_to_string(&a.grid)?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|(i, l)| {
                l.parse::<RunConfig>()
                    .map_err(|e| CliError::Data(murs_core::Error::Parse { line: i + 1, message: e.to_string() }))
            })
            .collect::<CliResult<_>>()?
    };
    let train = load_records(&a.train)?;
    let eval = load_records(&a.eval)?;
    let report = tune(&train, &eval, &grid, a.seed, profiles)?;
    let mut out = output(&a.out)?;
    out.write_all(report.render().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn report_cmd(a: ReportArgs, profiles: &ProfileSet) -> CliResult {
    let store = load_store(&a.store)?;
    let mut out = output(&a.out)?;
    if let Some(k) = a.top_controversial {
        for (i, t) in top_controversial(&store, k).iter().enumerate() {
            let s = &t.stats;
            writeln!(
                out,
                "rank={}\tcontroversy={}\tlanguage={}\tpu={}\tpnu={}\tmf={}\tnf={}\tg={}\ttemplate={}",
                i + 1,
                t.controversy,
                t.key.language,
                s.pu,
                s.pnu,
                s.mf,
                s.nf,
                s.g,
                escape_field(&t.key.text)
            )?;
        }
    }
    if a.negative_templates {
        let path = a.records.as_ref().expect("clap requires --records");
        let records = load_records(path)?;
        let undated = records.iter().filter(|r| r.month().is_none()).count();
        if undated > 0 {
            eprintln!("warning: {undated} records without a timestamp were ignored");
        }
        for t in negative_templates(&records, *store.config(), profiles, a.min_monthly, a.threshold) {
            let months: Vec<String> = t
                .months
                .iter()
                .map(|(m, c)| format!("{m}:{}/{}/{}", c.mutants, c.pu, c.pnu))
                .collect();
            writeln!(
                out,
                "average_monthly={}\tlanguage={}\tmonths={}\ttemplate={}",
                t.average_monthly,
                t.key.language,
                months.join(","),
                escape_field(&t.key.text)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn mutate_cmd(a: MutateArgs, profiles: &ProfileSet) -> CliResult {
    let language: Language = flag(&a.language)?;
    let lines = parse_changed_lines(&a.changed_lines).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = fs::read_to_string(&a.source)?;
    let source: Vec<String> = text.lines().map(str::to_owned).collect();
    let profile: &LanguageProfile = profiles.get(language);
    let filename = a.filename.unwrap_or_else(|| a.source.display().to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mutants = generate_mutants(&source, &lines, profile, &filename, &a.changelist, &mut rng)?;
    let mut out = output(&a.out)?;
    for m in &mutants {
        writeln!(out, "{}", write_mutant_record(m))?;
    }
    out.flush()?;
    Ok(())
}
