use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    extract_choice, format_prompt, gold_letter, McqItem, PromptMode, PromptStyle, Provider,
    ProviderError, ShuffleProtocol, Subset,
};
use crate::metrics::Fraction;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Requests in flight at once (at least 1).
    pub concurrency: usize,
    /// Completed answers are appended here and reused on the next run.
    pub checkpoint: Option<PathBuf>,
    pub style: PromptStyle,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            concurrency: 1,
            checkpoint: None,
            style: PromptStyle::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("no items to evaluate")]
    NoItems,
    #[error("few-shot mode needs at least one exemplar")]
    NoExemplars,
    #[error("n_shuffles must be at least 1")]
    NoShuffles,
    #[error("checkpoint {path}: {detail}")]
    Checkpoint { path: String, detail: String },
    #[error("provider failed after {completed} of {total} answers (progress saved): {source}")]
    Provider {
        completed: usize,
        total: usize,
        #[source]
        source: ProviderError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetResult {
    pub accuracy: Fraction,
    pub n: usize,
    pub per_shuffle: Vec<Fraction>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub provider: String,
    pub mode: PromptMode,
    pub n_shuffles: usize,
    pub seed: u64,
    /// Requested from HTTP providers; endpoints may ignore it.
    pub temperature: u32,
    pub n_items: usize,
    pub n_exemplars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub subsets: BTreeMap<Subset, SubsetResult>,
    pub overall: SubsetResult,
    pub extraction_failure_count: usize,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CheckpointHeader {
    seed: u64,
    n_shuffles: usize,
    mode: String,
    items: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Outcome {
    round: usize,
    item: String,
    choice: Option<char>,
    gold: char,
}

impl Outcome {
    fn correct(&self) -> bool {
        self.choice == Some(self.gold)
    }
}

fn checkpoint_error(path: &Path, detail: impl ToString) -> RunError {
    RunError::Checkpoint {
        path: path.display().to_string(),
        detail: detail.to_string(),
    }
}

/// Reads completed outcomes, or writes a fresh header when the file is
/// missing or empty.
fn open_checkpoint(
    path: &Path,
    header: &CheckpointHeader,
) -> Result<(File, Vec<Outcome>), RunError> {
    let mut done = Vec::new();
    if path.exists() {
        let file = File::open(path).map_err(|e| checkpoint_error(path, e))?;
        let mut lines = BufReader::new(file).lines();
        if let Some(first) = lines.next() {
            let first = first.map_err(|e| checkpoint_error(path, e))?;
            let found: CheckpointHeader = serde_json::from_str(&first)
                .map_err(|e| checkpoint_error(path, format!("line 1: {e}")))?;
            if &found != header {
                return Err(checkpoint_error(
                    path,
                    "written by a run with different settings",
                ));
            }
            for (idx, line) in lines.enumerate() {
                let line = line.map_err(|e| checkpoint_error(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Outcome>(&line) {
                    Ok(o) => done.push(o),
                    // a line cut short by an interrupted write
                    Err(e) if e.is_eof() => {
                        log::warn!("ignoring truncated checkpoint line {}", idx + 2)
                    }
                    Err(e) => return Err(checkpoint_error(path, format!("line {}: {e}", idx + 2))),
                }
            }
        }
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| checkpoint_error(path, e))?;
    if file
        .metadata()
        .map_err(|e| checkpoint_error(path, e))?
        .len()
        == 0
    {
        let line = serde_json::to_string(header).expect("header serializes");
        writeln!(file, "{line}").map_err(|e| checkpoint_error(path, e))?;
    } else {
        // make sure a partial trailing line does not swallow the next entry
        writeln!(file).map_err(|e| checkpoint_error(path, e))?;
    }
    Ok((file, done))
}

fn subset_result(outcomes: &[&Outcome], n_items: usize, n_shuffles: usize) -> SubsetResult {
    let per_shuffle: Vec<Fraction> = (0..n_shuffles)
        .map(|r| {
            let correct = outcomes
                .iter()
                .filter(|o| o.round == r && o.correct())
                .count();
            Fraction::of(correct, n_items)
        })
        .collect();
    SubsetResult {
        accuracy: Fraction::mean(&per_shuffle),
        n: n_items,
        per_shuffle,
    }
}

/// Scores every item under every shuffle round. Permutations are drawn
/// before any request, so neither concurrency nor resumption changes them.
pub fn run_eval(
    items: &[McqItem],
    provider: &dyn Provider,
    protocol: &ShuffleProtocol,
    mode: PromptMode,
    exemplars: &[McqItem],
    options: &RunOptions,
) -> Result<BenchResult, RunError> {
    if items.is_empty() {
        return Err(RunError::NoItems);
    }
    if protocol.n_shuffles == 0 {
        return Err(RunError::NoShuffles);
    }
    if mode == PromptMode::FewShot && exemplars.is_empty() {
        return Err(RunError::NoExemplars);
    }
    let perms = protocol.permutations(items.len());
    let header = CheckpointHeader {
        seed: protocol.seed,
        n_shuffles: protocol.n_shuffles,
        mode: mode.name().to_string(),
        items: items.len(),
    };

    let index: HashMap<&str, usize> = items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.id.as_str(), i))
        .collect();
    let (sink, restored) = match &options.checkpoint {
        Some(path) => {
            let (file, done) = open_checkpoint(path, &header)?;
            (Some(Mutex::new(file)), done)
        }
        None => (None, Vec::new()),
    };
    let mut results: HashMap<(usize, usize), Outcome> = HashMap::new();
    for o in restored {
        let Some(&i) = index.get(o.item.as_str()) else {
            return Err(checkpoint_error(
                options.checkpoint.as_deref().unwrap_or(Path::new("")),
                format!("unknown item {}", o.item),
            ));
        };
        results.insert((o.round, i), o);
    }
    if !results.is_empty() {
        log::info!("resuming with {} answers from checkpoint", results.len());
    }

    let pending: Vec<(usize, usize)> = (0..protocol.n_shuffles)
        .flat_map(|r| (0..items.len()).map(move |i| (r, i)))
        .filter(|key| !results.contains_key(key))
        .collect();

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let fresh: Mutex<Vec<((usize, usize), Outcome)>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<ProviderError>> = Mutex::new(None);
    let workers = options.concurrency.max(1).min(pending.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(round, i)) = pending.get(k) else {
                    break;
                };
                let item = &items[i];
                let perm = &perms[round][i];
                let prompt = format_prompt(item, perm, mode, exemplars, &options.style);
                match provider.complete(&prompt) {
                    Ok(response) => {
                        let outcome = Outcome {
                            round,
                            item: item.id.clone(),
                            choice: extract_choice(&response),
                            gold: gold_letter(item, perm),
                        };
                        if let Some(sink) = &sink {
                            let line = serde_json::to_string(&outcome).expect("outcome serializes");
                            let mut f = sink.lock().expect("checkpoint lock");
                            if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
                                log::error!("cannot write checkpoint: {e}");
                            }
                        }
                        fresh
                            .lock()
                            .expect("results lock")
                            .push(((round, i), outcome));
                    }
                    Err(e) => {
                        stop.store(true, Ordering::SeqCst);
                        failure.lock().expect("failure lock").get_or_insert(e);
                        break;
                    }
                }
            });
        }
    });

    results.extend(fresh.into_inner().expect("results lock"));
    let total = protocol.n_shuffles * items.len();
    if let Some(source) = failure.into_inner().expect("failure lock") {
        return Err(RunError::Provider {
            completed: results.len(),
            total,
            source,
        });
    }

    let mut subsets = BTreeMap::new();
    for subset in [Subset::Knowledge, Subset::Reasoning] {
        let n = items.iter().filter(|i| i.subset == subset).count();
        if n == 0 {
            continue;
        }
        let outcomes: Vec<&Outcome> = results
            .iter()
            .filter(|((_, i), _)| items[*i].subset == subset)
            .map(|(_, o)| o)
            .collect();
        subsets.insert(subset, subset_result(&outcomes, n, protocol.n_shuffles));
    }
    let all: Vec<&Outcome> = results.values().collect();
    Ok(BenchResult {
        subsets,
        overall: subset_result(&all, items.len(), protocol.n_shuffles),
        extraction_failure_count: results.values().filter(|o| o.choice.is_none()).count(),
        metadata: RunMetadata {
            provider: provider.label(),
            mode,
            n_shuffles: protocol.n_shuffles,
            seed: protocol.seed,
            temperature: 0,
            n_items: items.len(),
            n_exemplars: if mode == PromptMode::FewShot {
                exemplars.len()
            } else {
                0
            },
        },
    })
}
