//! Acceptance checks. Each criterion prints one PASS/FAIL line; the run
//! exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use abcscore::abc::{split_sections, BodyToken, Note, Rational};
use abcscore::analysis::similarity_levels;
use abcscore::control_code::parse_control_code;
use abcscore::dataset::{generate_corpus, TaskKind, TemplateBank};
use abcscore::mcq::{
    format_prompt, format_question, GoldOracle, Language, PromptMode, PromptStyle, RandomProvider,
    RunOptions, Subset, IDENTITY,
};
use abcscore::metrics::{
    memorization_report, parse_success_rate, percentile_report, percentiles, repetition_rate,
};
use abcscore::stats::corpus_stats;
use abcscore::tokenize::{TokenizerMode, TokenizerSpec};
use abcscore::{
    alphabetic_form, edit_distance, extract_chords, extract_motif, lcs_length, load_bench,
    parse_tune, run_eval, serialize, Fraction, GenerationRecord, McqItem, ShuffleProtocol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Check {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- form

fn form_golden() -> Check {
    let start = Instant::now();
    let code = parse_control_code("S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8")
        .map_err(|e| e.to_string())?;
    let levels: Vec<String> = similarity_levels(&code)
        .iter()
        .map(|row| row.iter().map(|l| l.symbol()).collect())
        .collect();
    let form = alphabetic_form(&code).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(levels == ["d", "dv", "ddd"], || {
        format!("levels {levels:?}")
    })?;
    ensure(form.to_string() == "ABB'C", || format!("form {form}"))?;
    ensure(took < Duration::from_millis(1), || format!("took {took:?}"))
}

// ---------------------------------------------------------------- parser

fn round_trips(text: &str) -> Check {
    let doc = parse_tune(text).map_err(|e| e.to_string())?;
    let once = serialize(&doc);
    let again = parse_tune(&once).map_err(|e| format!("reparse: {e}"))?;
    ensure(again == doc, || "document changed on round trip".into())?;
    ensure(serialize(&again) == once, || {
        "serializer is not idempotent".into()
    })
}

fn parser_goldens() -> Check {
    let waltz = read_fixture("waltz.abc");
    let two_part = read_fixture("generated_two_part.abc");
    round_trips(&waltz)?;
    round_trips(&two_part)?;
    let waltz_doc = parse_tune(&waltz).unwrap();
    ensure(
        waltz_doc
            .body
            .iter()
            .any(|t| matches!(t, BodyToken::Barline(b) if b.as_str() == "::")),
        || "waltz has no :: barline".into(),
    )?;
    let n = split_sections(&waltz_doc.body).len();
    ensure(n == 2, || format!("waltz split into {n} sections"))?;
    let n = split_sections(&parse_tune(&two_part).unwrap().body).len();
    ensure(n == 2, || format!("two-part score split into {n} sections"))
}

// ---------------------------------------------------------------- repetition

fn repetition() -> Check {
    let two_part = read_fixture("generated_two_part.abc");
    let r = repetition_rate(&[two_part.as_str()]);
    ensure(r == Fraction::one(), || format!("two-part score rate {r}"))?;
    let with = |i: usize| format!("X:{i}\nL:1/8\nK:G\n|: GABc dedB :|\n");
    let without = |i: usize| format!("X:{i}\nL:1/8\nK:G\nGABc dedB | BAGF G4 |]\n");
    for k in 0..=10 {
        let corpus: Vec<String> = (0..10)
            .map(|i| if i < k { with(i) } else { without(i) })
            .collect();
        let r = repetition_rate(&corpus);
        ensure(r == Fraction::of(k, 10), || format!("k={k}: rate {r}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- parse rate

fn parse_rate() -> Check {
    let mut corpus: Vec<String> = (0..20)
        .map(|i| format!("X:{i}\nL:1/8\nM:4/4\nK:D\n\"D\" d2 fd A2 F2 | \"G\" G2 B2 d4 |]\n"))
        .collect();
    corpus[3] = "L:1/8\nM:4/4\nK:D\nd2 fd A2 F2 |]\n".into();
    corpus[9] = "X:9\nL:1/8\nK:D\n\"D d2 fd A2 F2 |]\n".into();
    corpus[15] = "X:15\nL:1/8\nK:D\nd0 fd A2 F2 |]\n".into();
    let r = parse_success_rate(&corpus);
    ensure(r.rate == Fraction::new(17, 20), || {
        format!("rate {}", r.rate)
    })?;
    let kinds: Vec<(usize, &str)> = r
        .failures
        .iter()
        .map(|f| (f.index, f.error.kind.as_str()))
        .collect();
    let expected = [
        (3, "missing_X_header"),
        (9, "unbalanced_quote"),
        (15, "bad_duration"),
    ];
    ensure(kinds == expected, || format!("failures {kinds:?}"))
}

// ---------------------------------------------------------------- motif

/// Reference motif finder: counts every n-gram by scanning all windows.
fn oracle_motif(seq: &[BodyToken]) -> (Vec<BodyToken>, usize) {
    let mut best: Option<(Vec<BodyToken>, usize, usize)> = None; // (gram, count, first)
    for n in 1..=8.min(seq.len()) {
        for first in 0..=seq.len() - n {
            let gram = &seq[first..first + n];
            if (0..first).any(|j| &seq[j..j + n] == gram) {
                continue;
            }
            let count = (0..=seq.len() - n)
                .filter(|&j| &seq[j..j + n] == gram)
                .count();
            let better = match &best {
                None => true,
                Some((g, c, f)) => {
                    count > *c || (count == *c && (n > g.len() || (n == g.len() && first < *f)))
                }
            };
            if better {
                best = Some((gram.to_vec(), count, first));
            }
        }
    }
    let (g, c, _) = best.unwrap();
    (g, c)
}

fn random_token(rng: &mut ChaCha8Rng) -> BodyToken {
    let pitches = ['C', 'D', 'E', 'G'];
    match rng.gen_range(0..10) {
        0 => BodyToken::Barline(abcscore::abc::BarlineKind::Single),
        1 => BodyToken::ChordSymbol { text: "G".into() },
        2 => BodyToken::Rest {
            duration: Rational::from_integer(1),
        },
        _ => BodyToken::Note(Note::new(
            pitches[rng.gen_range(0..pitches.len())],
            Rational::from_integer(rng.gen_range(1..=2)),
        )),
    }
}

fn motif_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 200 {
        let len = rng.gen_range(1..=40);
        let raw: Vec<BodyToken> = (0..len).map(|_| random_token(&mut rng)).collect();
        let filtered: Vec<BodyToken> = raw
            .iter()
            .filter(|t| matches!(t, BodyToken::Note(_) | BodyToken::Rest { .. }))
            .cloned()
            .collect();
        if filtered.is_empty() || filtered.len() > 30 {
            continue;
        }
        let got = extract_motif(&raw).map_err(|e| e.to_string())?;
        let (tokens, count) = oracle_motif(&filtered);
        ensure(got.tokens == tokens && got.frequency == count, || {
            format!(
                "sequence {checked}: got {} x{}, oracle x{count}",
                got.to_abc(),
                got.frequency
            )
        })?;
        checked += 1;
    }
    within(start, Duration::from_secs(5))
}

// ---------------------------------------------------------------- sequence metrics

fn dp_edit(a: &[u8], b: &[u8]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    d[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn dp_lcs(a: &[u8], b: &[u8]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            d[i][j] = if a[i - 1] == b[j - 1] {
                d[i - 1][j - 1] + 1
            } else {
                d[i - 1][j].max(d[i][j - 1])
            };
        }
    }
    d[a.len()][b.len()]
}

fn sequence_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let seq = |rng: &mut ChaCha8Rng| -> Vec<u8> {
        let len = rng.gen_range(0..=50);
        let alphabet = rng.gen_range(1..=6);
        (0..len).map(|_| rng.gen_range(0..alphabet)).collect()
    };
    for i in 0..1000 {
        let (a, b, c) = (seq(&mut rng), seq(&mut rng), seq(&mut rng));
        let (e, l) = (edit_distance(&a, &b), lcs_length(&a, &b));
        ensure(e == dp_edit(&a, &b), || {
            format!("pair {i}: edit {e} vs {}", dp_edit(&a, &b))
        })?;
        ensure(l == dp_lcs(&a, &b), || {
            format!("pair {i}: lcs {l} vs {}", dp_lcs(&a, &b))
        })?;
        ensure(
            e == edit_distance(&b, &a) && l == lcs_length(&b, &a),
            || format!("pair {i}: asymmetric"),
        )?;
        ensure(e <= edit_distance(&a, &c) + edit_distance(&c, &b), || {
            format!("pair {i}: triangle")
        })?;
        ensure(
            (edit_distance(&a, &a), lcs_length(&a, &a)) == (0, a.len()),
            || format!("pair {i}: identity"),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------- percentiles

fn chord_record(system: &str, chords: &[&str]) -> GenerationRecord {
    let body: String = chords.iter().map(|c| format!("\"{c}\" c2 d2 | ")).collect();
    GenerationRecord {
        system: system.into(),
        task: TaskKind::ChordConditioned,
        prompt_signals: abcscore::metrics::PromptSignals {
            chords: Some(["C", "G", "Am", "F"].map(String::from).to_vec()),
            ..Default::default()
        },
        generated: format!("X:1\nL:1/8\nK:C\n{body}|]\n"),
        reference: None,
    }
}

fn percentile_metric() -> Check {
    let mut records = vec![
        chord_record("alpha", &["C", "G", "Am", "F"]),
        chord_record("alpha", &["C", "G", "Am"]),
        chord_record("alpha", &["C", "G"]),
        chord_record("beta", &["C", "G", "F", "F"]),
        chord_record("beta", &["F"]),
        chord_record("beta", &[]),
    ];
    records[5].generated = "X:1\nK:C\n\"C c2 |]".into();
    // Initial scores 1, 3/4, 1/2 | 3/4, 1/4, 0 (the last one unparseable).
    // Percentiles over the pool of six: 5/5, 3/5, 2/5 | 3/5, 1/5, 0.
    let report = percentile_report(&records).map_err(|e| e.to_string())?;
    let f = Fraction::new;
    let alpha = &report.systems["alpha"][&TaskKind::ChordConditioned];
    let beta = &report.systems["beta"][&TaskKind::ChordConditioned];
    ensure(alpha.initial_scores == [f(1, 1), f(3, 4), f(1, 2)], || {
        format!("alpha {:?}", alpha.initial_scores)
    })?;
    ensure(beta.initial_scores == [f(3, 4), f(1, 4), f(0, 1)], || {
        format!("beta {:?}", beta.initial_scores)
    })?;
    ensure(alpha.average_percentile == f(2, 3), || {
        format!("alpha avg {}", alpha.average_percentile)
    })?;
    ensure(beta.average_percentile == f(4, 15), || {
        format!("beta avg {}", beta.average_percentile)
    })?;
    ensure(beta.unparseable == 1, || "unparseable count".into())?;

    let scores: Vec<f64> = alpha
        .initial_scores
        .iter()
        .chain(&beta.initial_scores)
        .map(|s| s.to_f64())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for m in 0..10 {
        let (a, p, b): (f64, f64, f64) = (
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(-3.0..3.0),
        );
        let mapped: Vec<f64> = scores.iter().map(|x| a * x.powf(p) + b).collect();
        let pct = percentiles(&mapped);
        let avg_alpha = Fraction::mean(&pct[..3]);
        let avg_beta = Fraction::mean(&pct[3..]);
        ensure(avg_alpha > avg_beta, || format!("map {m}: order flipped"))?;
        ensure(avg_alpha == f(2, 3) && avg_beta == f(4, 15), || {
            format!("map {m}: averages changed")
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------- memorization

fn memorization() -> Check {
    let notes = ["C", "D", "E", "F", "G", "A", "B", "c", "d", "e"];
    let reference = |n: usize| -> Vec<String> {
        (0..n)
            .map(|i| notes[(i * 7 + i / 10) % notes.len()].to_string())
            .collect()
    };
    // Replaced tokens use a pitch absent from the reference, so lcs = n - replaced.
    let altered = |n: usize, replaced: usize| -> Vec<String> {
        let mut r = reference(n);
        for i in 0..replaced {
            r[i * n / replaced] = "^f".into();
        }
        r
    };
    let plain = vec![
        (reference(10), reference(10)),
        (altered(10, 2), reference(10)),
        (altered(100, 21), reference(100)),
    ];
    let f = Fraction::new;
    let ratios: Vec<Fraction> = plain
        .iter()
        .map(|(g, r)| Fraction::of(dp_lcs_str(g, r), g.len().max(r.len())))
        .collect();
    ensure(ratios == [f(1, 1), f(4, 5), f(79, 100)], || {
        format!("constructed ratios {ratios:?}")
    })?;
    let flags: Vec<(bool, bool)> = plain
        .iter()
        .map(|(g, r)| (g == r, abcscore::metrics::overlaps80(g, r)))
        .collect();
    ensure(
        flags == [(true, true), (false, true), (false, false)],
        || format!("flags {flags:?}"),
    )?;
    let report = memorization_report(&plain).map_err(|e| e.to_string())?;
    ensure(
        report.exact_fraction == f(1, 3) && report.overlap80_fraction == f(2, 3),
        || {
            format!(
                "fractions {} {}",
                report.exact_fraction, report.overlap80_fraction
            )
        },
    )
}

fn dp_lcs_str(a: &[String], b: &[String]) -> usize {
    let mut ids: HashMap<&str, u8> = HashMap::new();
    let mut encoded = [Vec::new(), Vec::new()];
    for (seq, out) in [a, b].into_iter().zip(encoded.iter_mut()) {
        for t in seq {
            let next = ids.len() as u8;
            out.push(*ids.entry(t.as_str()).or_insert(next));
        }
    }
    dp_lcs(&encoded[0], &encoded[1])
}

// ---------------------------------------------------------------- bench protocol

fn synthetic_bench(n: usize) -> Vec<McqItem> {
    (0..n)
        .map(|i| McqItem {
            id: format!("s{i}"),
            subset: if i % 2 == 0 {
                Subset::Knowledge
            } else {
                Subset::Reasoning
            },
            stem: format!("Synthetic question {i}: pick the marked option."),
            options: (0..4).map(|k| format!("option {k} of {i}")).collect(),
            answer_index: (i * 7) % 4,
            language: Language::En,
        })
        .collect()
}

fn bench_protocol() -> Check {
    let items = synthetic_bench(40);
    let oracle = GoldOracle::new(items.clone());
    for seed in 0..10 {
        let protocol = ShuffleProtocol {
            n_shuffles: 5,
            seed,
        };
        let r = run_eval(
            &items,
            &oracle,
            &protocol,
            PromptMode::ZeroShot,
            &[],
            &RunOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        ensure(r.overall.accuracy == Fraction::one(), || {
            format!("seed {seed}: oracle accuracy {}", r.overall.accuracy)
        })?;
    }

    let random = RandomProvider::new(17);
    let protocol = ShuffleProtocol {
        n_shuffles: 50,
        seed: 1,
    };
    let r = run_eval(
        &items,
        &random,
        &protocol,
        PromptMode::ZeroShot,
        &[],
        &RunOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let rounds = items.len() * protocol.n_shuffles;
    let acc = r.overall.accuracy.to_f64();
    ensure(rounds >= 2000 && (acc - 0.25).abs() <= 0.03, || {
        format!("random accuracy {acc} over {rounds}")
    })?;

    let exemplars = load_bench(&fixture("fewshot_exemplars.json")).map_err(|e| e.to_string())?;
    let layout = read_fixture("fewshot_layout.txt");
    let item = &items[0];
    let perm = [2, 0, 3, 1];
    let prompt = format_prompt(
        item,
        &perm,
        PromptMode::FewShot,
        &exemplars,
        &PromptStyle::default(),
    );
    let expected = layout.replace(
        "[Actual question here]",
        &(format_question(item, &perm) + "Answer:"),
    );
    let norm = |s: &str| {
        s.lines()
            .map(str::trim_end)
            .collect::<Vec<_>>()
            .join("\n")
            .trim_end()
            .to_string()
    };
    ensure(norm(&prompt) == norm(&expected), || {
        format!("prompt differs:\n{prompt}")
    })?;
    let zero = format_prompt(
        item,
        &IDENTITY,
        PromptMode::ZeroShot,
        &[],
        &PromptStyle::default(),
    );
    ensure(!zero.contains("Answer: "), || {
        "zero-shot prompt contains answered exemplars".into()
    })
}

// ---------------------------------------------------------------- dataset

fn dataset() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = fixture("corpus50.jsonl");
    let bank = TemplateBank::default_bank();
    let out = |name: &str| dir.path().join(name);
    let first = generate_corpus(&input, &TaskKind::ALL, &bank, 31, &out("a.jsonl"))
        .map_err(|e| e.to_string())?;
    generate_corpus(&input, &TaskKind::ALL, &bank, 31, &out("b.jsonl"))
        .map_err(|e| e.to_string())?;
    let a = std::fs::read(out("a.jsonl")).unwrap();
    let b = std::fs::read(out("b.jsonl")).unwrap();
    ensure(first.records == 50, || format!("{} records", first.records))?;
    ensure(a == b, || "outputs differ between runs".into())?;

    let mut chord_samples = 0;
    for line in String::from_utf8(a).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["task"] != "chord" {
            continue;
        }
        chord_samples += 1;
        let user = v["messages"][0]["content"].as_str().unwrap();
        let assistant = v["messages"][1]["content"].as_str().unwrap();
        let template = bank
            .templates(TaskKind::ChordConditioned)
            .iter()
            .find(|t| t.id == v["template_id"])
            .ok_or("unknown template id")?;
        let slot = template
            .text
            .lines()
            .position(|l| l == "{CHORDS}")
            .ok_or("no chord slot")?;
        let prompt_chords: Vec<&str> = user
            .lines()
            .nth(slot)
            .unwrap_or("")
            .split_whitespace()
            .collect();
        let doc = parse_tune(assistant).map_err(|e| e.to_string())?;
        let chords = extract_chords(&doc);
        ensure(chords == prompt_chords, || {
            format!("{}: {chords:?} vs {prompt_chords:?}", v["source_id"])
        })?;
    }
    ensure(chord_samples > 0, || "no chord samples".into())
}

// ---------------------------------------------------------------- fuzz

fn fuzz() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    let abc_chars = b"X:K1LM/\n |:[]\"(){}!~^_=,'ABCDEFGabcdefgz0123456789<>-.%";
    let mut parsed = 0usize;
    for i in 0..100_000 {
        let len = rng.gen_range(0..120);
        let text = if i % 2 == 0 {
            let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            let body: String = (0..len)
                .map(|_| abc_chars[rng.gen_range(0..abc_chars.len())] as char)
                .collect();
            format!("X:1\nL:1/8\nK:C\n{body}")
        };
        match catch_unwind(AssertUnwindSafe(|| parse_tune(&text))) {
            Err(_) => return Err(format!("input {i} panicked: {text:?}")),
            Ok(Ok(_)) => parsed += 1,
            Ok(Err(e)) => ensure(e.line >= 1 && e.column >= 1, || {
                format!("input {i}: bad position {e:?}")
            })?,
        }
    }
    ensure(parsed > 0, || "no input parsed".into())?;
    within(start, Duration::from_secs(60))
}

// ---------------------------------------------------------------- stats

fn stats() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.abc");
    let b = dir.path().join("b.abc");
    // 9 words; 8 quarters (repeat played twice) at 120 qpm = 4 s.
    let t1 = "X:1\nL:1/4\nK:C\n|: C D E F :|\n";
    // 11 words; 12 eighths at 90 qpm = 4 s.
    let t2 = "X:2\nL:1/8\nQ:1/4=90\nM:3/4\nK:G\nG2 A2 B2 | d6 |]\n";
    // 8 words; 6 eighths at 1/8=240 = 3/2 s.
    let t3 = "X:3\nL:1/8\nQ:1/8=240\nK:D\nA>B c2 z2 |\n";
    std::fs::write(&a, format!("{t1}\n{t2}")).unwrap();
    std::fs::write(&b, t3).unwrap();
    let tokenizer = TokenizerSpec::simple(TokenizerMode::Whitespace)
        .load()
        .map_err(|e| e.to_string())?;
    let s = corpus_stats(&[a, b], &tokenizer).map_err(|e| e.to_string())?;
    let got = (
        s.songs,
        s.total_tokens,
        s.total_seconds.to_string(),
        s.tokens_per_song.to_string(),
        s.tokens_per_second.to_string(),
    );
    let expected = (
        3,
        28,
        "19/2".to_string(),
        "28/3".to_string(),
        "56/19".to_string(),
    );
    ensure(got == expected, || format!("got {got:?}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 12] = [
        ("form analysis golden", form_golden),
        ("parser goldens", parser_goldens),
        ("repetition rate", repetition),
        ("parse success rate", parse_rate),
        ("motif oracle equivalence", motif_oracle),
        ("sequence metric oracles", sequence_metrics),
        ("percentile metric", percentile_metric),
        ("memorization", memorization),
        ("bench protocol", bench_protocol),
        ("dataset determinism and chord consistency", dataset),
        ("fuzz robustness", fuzz),
        ("stats sanity", stats),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("PASS  {name}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
