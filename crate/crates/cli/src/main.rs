mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcscore::abc::{parse_tune, split_tunebook};
use abcscore::analysis::{alphabetic_form, extract_motifs_per_section, terminology_forms};
use abcscore::control_code::{compute_control_code, parse_control_code, serialize_control_code};
use abcscore::dataset::{generate_corpus, parse_task_list, read_corpus, TaskKind, TemplateBank};
use abcscore::mcq::{
    load_bench, load_exemplars, run_eval, PromptMode, PromptStyle, RunOptions, ShuffleProtocol,
};
use abcscore::metrics::{evaluate, parse_success_rate, read_records, repetition_rate};
use abcscore::stats::{corpus_stats, StatsError};
use abcscore::tokenize::{TokenizerMode, TokenizerSpec};
use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use config::{resolve_provider, FileConfig, ProviderSetting};

#[derive(Parser)]
#[command(
    name = "abcscore",
    version,
    about = "ABC notation analysis, dataset synthesis and evaluation"
)]
struct Cli {
    /// TOML settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that ABC files parse. Each file may hold several tunes.
    Parse {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Alphabetic and terminology form of each record.
    Form {
        /// Corpus JSONL, or an ABC file.
        input: Option<PathBuf>,
        /// Control code to analyse directly (repeatable).
        #[arg(long)]
        code: Vec<String>,
    },
    /// Motif of every section, in ABC.
    Motif { file: PathBuf },
    /// Build instruction samples from a corpus JSONL.
    Gen {
        input: PathBuf,
        /// Comma-separated task slugs, or `all`.
        #[arg(long)]
        tasks: Option<String>,
        /// Template bank file (default: built-in bank).
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Output JSONL.
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics over generation records, or over plain ABC files.
    Eval {
        /// Records JSONL.
        records: Option<PathBuf>,
        /// ABC files to check for repeat signs and parseability.
        #[arg(long = "abc")]
        abc: Vec<PathBuf>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiple-choice benchmark run.
    Bench {
        bench: PathBuf,
        /// Provider file, or one of `oracle`, `random[:seed]`, `fixed[:letter]`.
        #[arg(long)]
        provider: Option<String>,
        /// `zero_shot` or `five_shot`.
        #[arg(long)]
        mode: Option<String>,
        /// Held-out exemplars for few-shot prompts.
        #[arg(long)]
        exemplars: Option<PathBuf>,
        /// Option shuffles per item (default 5).
        #[arg(long)]
        shuffles: Option<usize>,
        /// Progress file; an interrupted run resumes from it.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        prompt_prefix: Option<String>,
        #[arg(long)]
        prompt_suffix: Option<String>,
        /// Also write the result here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tokens per song and per second.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// `bytes`, `characters`, `whitespace`, or a tokenizer file (repeatable).
        #[arg(long)]
        tokenizer: Vec<String>,
    },
}

/// Error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const INPUT: u8 = 1;
const EXTERNAL: u8 = 2;

trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn external(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: INPUT,
            error: e.into(),
        })
    }

    fn external(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXTERNAL,
            error: e.into(),
        })
    }
}

fn input_error(msg: impl std::fmt::Display) -> Failure {
    Failure {
        code: INPUT,
        error: anyhow!("{msg}"),
    }
}

struct Context_ {
    file: FileConfig,
    seed: u64,
    jobs: usize,
    pretty: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(INPUT),
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).input()?,
        None => FileConfig::default(),
    };
    let jobs = cli
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let ctx = Context_ {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        jobs,
        pretty: cli.pretty,
        file,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .external()?;
    pool.install(|| match cli.command {
        Command::Parse { files } => cmd_parse(&ctx, &files),
        Command::Form { input, code } => cmd_form(&ctx, input.as_deref(), &code),
        Command::Motif { file } => cmd_motif(&ctx, &file),
        Command::Gen {
            input,
            tasks,
            templates,
            out,
        } => cmd_gen(&ctx, &input, tasks, templates, &out),
        Command::Eval { records, abc, out } => {
            cmd_eval(&ctx, records.as_deref(), &abc, out.as_deref())
        }
        Command::Bench {
            bench,
            provider,
            mode,
            exemplars,
            shuffles,
            checkpoint,
            prompt_prefix,
            prompt_suffix,
            out,
        } => cmd_bench(
            &ctx,
            BenchArgs {
                bench,
                provider,
                mode,
                exemplars,
                shuffles,
                checkpoint,
                prompt_prefix,
                prompt_suffix,
                out,
            },
        ),
        Command::Stats { files, tokenizer } => cmd_stats(&ctx, &files, tokenizer),
    })
}

fn emit<T: Serialize>(
    ctx: &Context_,
    value: &T,
    pretty: impl FnOnce() -> String,
) -> Result<(), Failure> {
    if ctx.pretty {
        print!("{}", pretty());
    } else {
        println!("{}", serde_json::to_string(value).external()?);
    }
    Ok(())
}

fn save<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(value).external()?;
        std::fs::write(path, text + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
            .external()?;
    }
    Ok(())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .input()
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(input_error(format!("{} does not exist", path.display())))
    }
}

fn cmd_parse(ctx: &Context_, files: &[PathBuf]) -> Result<(), Failure> {
    let mut reports = Vec::new();
    let mut failed = 0;
    for path in files {
        let mut errors = Vec::new();
        let mut tunes = 0;
        match std::fs::read_to_string(path) {
            Ok(text) => {
                let book = split_tunebook(&text);
                if book.is_empty() {
                    errors.push(
                        json!({"line": 1, "kind": "empty_body", "detail": "file has no tune"}),
                    );
                }
                for (start, tune) in book {
                    tunes += 1;
                    if let Err(e) = parse_tune(&tune) {
                        let line = start + e.line - 1;
                        eprintln!(
                            "{}:{}:{}: {}: {}",
                            path.display(),
                            line,
                            e.column,
                            e.kind,
                            e.detail
                        );
                        errors.push(json!({"line": line, "column": e.column, "kind": e.kind, "detail": e.detail}));
                    }
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                errors.push(json!({"kind": "io", "detail": e.to_string()}));
            }
        }
        failed += usize::from(!errors.is_empty());
        reports.push(json!({"path": path.display().to_string(), "ok": errors.is_empty(), "tunes": tunes, "errors": errors}));
    }
    let report = json!({"files": reports, "ok": files.len() - failed, "failed": failed});
    emit(ctx, &report, || {
        let mut s = String::new();
        for r in &reports {
            let status = if r["ok"] == Value::Bool(true) {
                "ok"
            } else {
                "FAILED"
            };
            let _ = writeln!(s, "{}: {status}", r["path"].as_str().unwrap_or_default());
        }
        s
    })?;
    if failed > 0 {
        return Err(input_error(format!(
            "{failed} of {} files failed to parse",
            files.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct FormRecord {
    id: String,
    control_code: String,
    alphabetic_form: String,
    terms: Vec<&'static str>,
}

fn form_of(id: String, code_text: Option<&str>, abc: Option<&str>) -> Result<FormRecord, String> {
    let code = match (code_text, abc) {
        (Some(text), _) => parse_control_code(text).map_err(|e| e.to_string())?,
        (None, Some(abc)) => {
            let doc = parse_tune(abc).map_err(|e| e.to_string())?;
            compute_control_code(&doc).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("record has neither control code nor ABC".into()),
    };
    let form = alphabetic_form(&code).map_err(|e| e.to_string())?;
    Ok(FormRecord {
        id,
        control_code: serialize_control_code(&code),
        alphabetic_form: form.to_string(),
        terms: terminology_forms(&form)
            .iter()
            .map(|t| t.identifier())
            .collect(),
    })
}

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json")
    )
}

fn cmd_form(ctx: &Context_, input: Option<&Path>, codes: &[String]) -> Result<(), Failure> {
    if input.is_none() && codes.is_empty() {
        return Err(input_error("give a corpus file or --code"));
    }
    let mut results: Vec<Result<FormRecord, (String, String)>> = Vec::new();
    for (i, code) in codes.iter().enumerate() {
        let id = format!("code-{}", i + 1);
        results.push(form_of(id.clone(), Some(code), None).map_err(|e| (id, e)));
    }
    if let Some(path) = input {
        require_file(path)?;
        if is_jsonl(path) {
            for entry in read_corpus(path).input()? {
                results.push(
                    form_of(
                        entry.id.clone(),
                        entry.control_code.as_deref(),
                        Some(entry.score()),
                    )
                    .map_err(|e| (entry.id, e)),
                );
            }
        } else {
            let text = read_input(path)?;
            for (line, tune) in split_tunebook(&text) {
                let id = tune_id(&tune, line);
                results.push(form_of(id.clone(), None, Some(&tune)).map_err(|e| (id, e)));
            }
        }
    }
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err((id, error)) => {
                eprintln!("{id}: {error}");
                failures.push(json!({"id": id, "error": error}));
            }
        }
    }
    let report = json!({"records": &records, "failures": &failures});
    emit(ctx, &report, || {
        records
            .iter()
            .map(|r| format!("{} / {}\n", r.alphabetic_form, r.terms.join(", ")))
            .collect()
    })?;
    if !failures.is_empty() {
        return Err(input_error(format!(
            "{} records could not be analysed",
            failures.len()
        )));
    }
    Ok(())
}

/// `X:` value of a tune, or its starting line.
fn tune_id(text: &str, line: usize) -> String {
    parse_tune(text)
        .ok()
        .and_then(|d| d.header('X').map(|x| x.trim().to_string()))
        .unwrap_or_else(|| format!("line-{line}"))
}

fn cmd_motif(ctx: &Context_, path: &Path) -> Result<(), Failure> {
    let text = read_input(path)?;
    let mut tunes = Vec::new();
    let mut lines = String::new();
    for (line, tune) in split_tunebook(&text) {
        let doc = parse_tune(&tune)
            .map_err(|e| input_error(format!("{}:{}: {e}", path.display(), line + e.line - 1)))?;
        let motifs = extract_motifs_per_section(&doc)
            .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        for m in &motifs {
            lines.push_str(&m.to_abc());
            lines.push('\n');
        }
        let sections: Vec<Value> = motifs
            .iter()
            .enumerate()
            .map(|(i, m)| json!({"section": i + 1, "abc": m.to_abc(), "frequency": m.frequency}))
            .collect();
        tunes.push(json!({"id": tune_id(&tune, line), "line": line, "motifs": sections}));
    }
    if tunes.is_empty() {
        return Err(input_error(format!("{} has no tune", path.display())));
    }
    emit(ctx, &json!({"tunes": tunes}), || lines)
}

fn cmd_gen(
    ctx: &Context_,
    input: &Path,
    tasks: Option<String>,
    templates: Option<PathBuf>,
    out: &Path,
) -> Result<(), Failure> {
    require_file(input)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(input_error(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
    }
    let tasks: Vec<TaskKind> = match tasks.or_else(|| ctx.file.tasks.clone()) {
        Some(list) => parse_task_list(&list).input()?,
        None => TaskKind::ALL.to_vec(),
    };
    let bank = match templates.or_else(|| ctx.file.templates.clone()) {
        Some(path) => TemplateBank::load(&path)
            .with_context(|| format!("template bank {}", path.display()))
            .input()?,
        None => TemplateBank::default_bank(),
    };
    let summary = generate_corpus(input, &tasks, &bank, ctx.seed, out).map_err(|e| match e {
        abcscore::dataset::DatasetError::Input(abcscore::jsonl::JsonlError::Io { .. })
        | abcscore::dataset::DatasetError::Output { .. } => Failure {
            code: EXTERNAL,
            error: e.into(),
        },
        other => Failure {
            code: INPUT,
            error: other.into(),
        },
    })?;
    emit(ctx, &summary, || {
        let mut s = format!(
            "{} records, {} samples attempted, {} written to {}\n",
            summary.records,
            summary.attempted,
            summary.written,
            out.display()
        );
        for (reason, n) in &summary.skipped {
            let _ = writeln!(s, "skipped {reason}: {n}");
        }
        s
    })
}

fn cmd_eval(
    ctx: &Context_,
    records: Option<&Path>,
    abc: &[PathBuf],
    out: Option<&Path>,
) -> Result<(), Failure> {
    if records.is_none() && abc.is_empty() {
        return Err(input_error("give a records file or --abc files"));
    }
    let mut report = serde_json::Map::new();
    if let Some(path) = records {
        require_file(path)?;
        let recs = read_records(path).input()?;
        let result = evaluate(&recs)
            .with_context(|| path.display().to_string())
            .input()?;
        report.insert("records".into(), serde_json::to_value(result).external()?);
    }
    if !abc.is_empty() {
        let mut texts = Vec::new();
        for path in abc {
            let text = read_input(path)?;
            texts.extend(split_tunebook(&text).into_iter().map(|(_, t)| t));
        }
        if texts.is_empty() {
            return Err(input_error("no tunes in the given files"));
        }
        let parse = parse_success_rate(&texts);
        report.insert(
            "texts".into(),
            json!({
                "n": texts.len(),
                "repetition_rate": repetition_rate(&texts),
                "parse_rate": parse.rate,
                "failures": parse.failures,
            }),
        );
    }
    let report = Value::Object(report);
    save(out, &report)?;
    emit(ctx, &report, || pretty_eval(&report))
}

fn pretty_eval(report: &Value) -> String {
    let mut s = String::new();
    if let Some(systems) = report
        .pointer("/records/systems")
        .and_then(Value::as_object)
    {
        for (system, tasks) in systems {
            for (task, t) in tasks.as_object().into_iter().flatten() {
                let pct = t["avg_percentile"]["value"]
                    .as_f64()
                    .map_or("-".to_string(), |v| format!("{v:.4}"));
                let _ = writeln!(
                    s,
                    "{system}\t{task}\tn={}\tpercentile={pct}\trepetition={:.4}\tparse={:.4}",
                    t["n"],
                    t["repetition_rate"]["value"].as_f64().unwrap_or(0.0),
                    t["parse_rate"]["value"].as_f64().unwrap_or(0.0),
                );
            }
        }
    }
    if let Some(m) = report
        .pointer("/records/memorization")
        .filter(|m| !m.is_null())
    {
        let _ = writeln!(
            s,
            "memorization\tn={}\texact={}\toverlap80={}",
            m["n"], m["exact_fraction"]["exact"], m["overlap80_fraction"]["exact"]
        );
    }
    if let Some(t) = report.get("texts") {
        let _ = writeln!(
            s,
            "texts\tn={}\trepetition={}\tparse={}",
            t["n"], t["repetition_rate"]["exact"], t["parse_rate"]["exact"]
        );
    }
    s
}

struct BenchArgs {
    bench: PathBuf,
    provider: Option<String>,
    mode: Option<String>,
    exemplars: Option<PathBuf>,
    shuffles: Option<usize>,
    checkpoint: Option<PathBuf>,
    prompt_prefix: Option<String>,
    prompt_suffix: Option<String>,
    out: Option<PathBuf>,
}

fn cmd_bench(ctx: &Context_, args: BenchArgs) -> Result<(), Failure> {
    let file = &ctx.file;
    require_file(&args.bench)?;
    let mode: PromptMode = args
        .mode
        .or_else(|| file.mode.clone())
        .as_deref()
        .unwrap_or("zero_shot")
        .parse()
        .map_err(input_error)?;
    let n_shuffles = args.shuffles.or(file.shuffles).unwrap_or(5);
    if n_shuffles == 0 {
        return Err(input_error("--shuffles must be at least 1"));
    }
    let items = load_bench(&args.bench).input()?;
    let exemplars = match (mode, args.exemplars.or_else(|| file.exemplars.clone())) {
        (PromptMode::FewShot, Some(path)) => {
            let ex = load_exemplars(&path, &items).input()?;
            if ex.len() != 5 {
                log::warn!("few-shot prompt with {} exemplars", ex.len());
            }
            ex
        }
        (PromptMode::FewShot, None) => return Err(input_error("five_shot mode needs --exemplars")),
        (PromptMode::ZeroShot, _) => Vec::new(),
    };
    let setting = match args.provider {
        Some(p) => ProviderSetting::Reference(p),
        None => file.provider.clone().ok_or_else(|| Failure {
            code: EXTERNAL,
            error: anyhow!("provider error: no provider configured (use --provider)"),
        })?,
    };
    let provider_config = resolve_provider(&setting)
        .context("provider error")
        .external()?;
    let provider = provider_config
        .build(&items)
        .context("provider error")
        .external()?;
    let options = RunOptions {
        concurrency: ctx.jobs,
        checkpoint: args.checkpoint.or_else(|| file.checkpoint.clone()),
        style: PromptStyle {
            prefix: args.prompt_prefix.or_else(|| file.prompt_prefix.clone()),
            suffix: args.prompt_suffix.or_else(|| file.prompt_suffix.clone()),
        },
    };
    let protocol = ShuffleProtocol {
        n_shuffles,
        seed: ctx.seed,
    };
    let result = run_eval(
        &items,
        provider.as_ref(),
        &protocol,
        mode,
        &exemplars,
        &options,
    )
    .map_err(|e| {
        let code = match e {
            abcscore::mcq::RunError::Provider { .. }
            | abcscore::mcq::RunError::Checkpoint { .. } => EXTERNAL,
            _ => INPUT,
        };
        Failure {
            code,
            error: e.into(),
        }
    })?;
    save(args.out.as_deref(), &result)?;
    emit(ctx, &result, || {
        let mut s = String::new();
        for (subset, r) in &result.subsets {
            let _ = writeln!(
                s,
                "{subset:?}\tn={}\taccuracy={:.4}",
                r.n,
                r.accuracy.to_f64()
            );
        }
        let _ = writeln!(
            s,
            "overall\tn={}\taccuracy={:.4}\textraction_failures={}",
            result.overall.n,
            result.overall.accuracy.to_f64(),
            result.extraction_failure_count
        );
        s
    })
}

fn tokenizer_spec(name: &str) -> Result<TokenizerSpec, Failure> {
    match TokenizerMode::from_name(name) {
        Some(TokenizerMode::Bpe) => Err(input_error(
            "bpe needs a tokenizer file with vocab= and merges=",
        )),
        Some(mode) => Ok(TokenizerSpec::simple(mode)),
        None => TokenizerSpec::from_config_file(Path::new(name)).input(),
    }
}

fn cmd_stats(ctx: &Context_, files: &[PathBuf], tokenizers: Vec<String>) -> Result<(), Failure> {
    for f in files {
        require_file(f)?;
    }
    let names = if !tokenizers.is_empty() {
        tokenizers
    } else {
        ctx.file
            .tokenizer
            .clone()
            .unwrap_or_else(|| vec!["characters".into()])
    };
    let mut loaded = Vec::new();
    for name in &names {
        let spec = tokenizer_spec(name)?;
        loaded.push((name.clone(), spec.load().input()?));
    }
    let mut report = BTreeMap::new();
    for (name, tokenizer) in &loaded {
        let stats = corpus_stats(files, tokenizer).map_err(|e| match e {
            StatsError::Io { .. } => Failure {
                code: EXTERNAL,
                error: e.into(),
            },
            StatsError::EmptyCorpus => input_error(e),
        })?;
        report.insert(name.clone(), stats);
    }
    emit(ctx, &json!({ "tokenizers": &report }), || {
        let mut s = String::new();
        for (name, st) in &report {
            let _ = writeln!(
                s,
                "{name}\tsongs={}\ttokens/song={} ({:.2})\ttokens/second={} ({:.2})",
                st.songs,
                st.tokens_per_song,
                st.tokens_per_song_f64,
                st.tokens_per_second,
                st.tokens_per_second_f64
            );
        }
        s
    })
}
