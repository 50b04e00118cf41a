//! Token counting for corpus statistics.
//!
//! Four modes: raw UTF-8 bytes, Unicode characters, whitespace-separated
//! words, and byte-pair encoding driven by an external `vocab.json` +
//! `merges.txt` pair in the common GPT-2 layout.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum TokenizerLoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenizerMode {
    Bytes,
    Characters,
    Whitespace,
    Bpe,
}

impl TokenizerMode {
    pub fn name(self) -> &'static str {
        match self {
            TokenizerMode::Bytes => "bytes",
            TokenizerMode::Characters => "characters",
            TokenizerMode::Whitespace => "whitespace",
            TokenizerMode::Bpe => "bpe",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "bytes" => Some(TokenizerMode::Bytes),
            "characters" | "chars" => Some(TokenizerMode::Characters),
            "whitespace" => Some(TokenizerMode::Whitespace),
            "bpe" => Some(TokenizerMode::Bpe),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerSpec {
    pub mode: TokenizerMode,
    pub bpe_vocab_path: Option<PathBuf>,
    pub bpe_merges_path: Option<PathBuf>,
}

impl TokenizerSpec {
    pub fn simple(mode: TokenizerMode) -> Self {
        TokenizerSpec {
            mode,
            bpe_vocab_path: None,
            bpe_merges_path: None,
        }
    }

    pub fn bpe(vocab: impl Into<PathBuf>, merges: impl Into<PathBuf>) -> Self {
        TokenizerSpec {
            mode: TokenizerMode::Bpe,
            bpe_vocab_path: Some(vocab.into()),
            bpe_merges_path: Some(merges.into()),
        }
    }

    /// Reads a `key=value` config (`mode=`, `vocab=`, `merges=`). Relative
    /// paths resolve against the config file's directory.
    pub fn from_config_file(path: &Path) -> Result<Self, TokenizerLoadError> {
        let text = fs::read_to_string(path).map_err(|source| TokenizerLoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_config_str(&text, base).map_err(|reason| TokenizerLoadError::Invalid {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn from_config_str(text: &str, base: &Path) -> Result<Self, String> {
        let mut mode = None;
        let mut vocab = None;
        let mut merges = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
            let value = value.trim();
            match key.trim() {
                "mode" => {
                    mode = Some(
                        TokenizerMode::from_name(value)
                            .ok_or_else(|| format!("unknown mode {value:?}"))?,
                    )
                }
                "vocab" => vocab = Some(base.join(value)),
                "merges" => merges = Some(base.join(value)),
                other => return Err(format!("line {}: unknown key {other:?}", n + 1)),
            }
        }
        let spec = TokenizerSpec {
            mode: mode.ok_or("missing mode=")?,
            bpe_vocab_path: vocab,
            bpe_merges_path: merges,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), String> {
        let has_paths = (
            self.bpe_vocab_path.is_some(),
            self.bpe_merges_path.is_some(),
        );
        match (self.mode, has_paths) {
            (TokenizerMode::Bpe, (true, true)) => Ok(()),
            (TokenizerMode::Bpe, _) => Err("bpe mode needs both vocab= and merges=".into()),
            (_, (false, false)) => Ok(()),
            (mode, _) => Err(format!("{} mode takes no vocab or merges", mode.name())),
        }
    }

    pub fn load(&self) -> Result<Tokenizer, TokenizerLoadError> {
        self.validate()
            .map_err(|reason| TokenizerLoadError::Invalid {
                path: PathBuf::new(),
                reason,
            })?;
        match self.mode {
            TokenizerMode::Bytes => Ok(Tokenizer::Bytes),
            TokenizerMode::Characters => Ok(Tokenizer::Characters),
            TokenizerMode::Whitespace => Ok(Tokenizer::Whitespace),
            TokenizerMode::Bpe => {
                let vocab = self.bpe_vocab_path.as_deref().unwrap_or(Path::new(""));
                let merges = self.bpe_merges_path.as_deref().unwrap_or(Path::new(""));
                Ok(Tokenizer::Bpe(Box::new(Bpe::from_files(vocab, merges)?)))
            }
        }
    }

    pub fn label(&self) -> String {
        self.mode.name().to_string()
    }
}

/// Loaded tokenizer ready for counting.
#[derive(Debug, Clone)]
pub enum Tokenizer {
    Bytes,
    Characters,
    Whitespace,
    Bpe(Box<Bpe>),
}

impl Tokenizer {
    pub fn count(&self, text: &str) -> usize {
        match self {
            Tokenizer::Bytes => text.len(),
            Tokenizer::Characters => text.chars().count(),
            Tokenizer::Whitespace => text.split_whitespace().count(),
            Tokenizer::Bpe(bpe) => bpe.count(text),
        }
    }
}

/// Loads the tokenizer and counts `text`.
pub fn count_tokens(text: &str, spec: &TokenizerSpec) -> Result<usize, TokenizerLoadError> {
    Ok(spec.load()?.count(text))
}

/// GPT-2's reversible byte-to-printable-character table.
fn byte_to_char() -> [char; 256] {
    let mut table = ['\0'; 256];
    let mut extra = 0u32;
    for b in 0..=255u8 {
        let printable = matches!(b, b'!'..=b'~' | 0xA1..=0xAC | 0xAE..=0xFF);
        table[b as usize] = if printable {
            char::from(b)
        } else {
            let c = char::from_u32(256 + extra).unwrap_or('\u{FFFD}');
            extra += 1;
            c
        };
    }
    table
}

#[derive(Debug, Clone)]
pub struct Bpe {
    ranks: HashMap<(String, String), usize>,
    byte_chars: [char; 256],
}

impl Bpe {
    pub fn from_files(vocab: &Path, merges: &Path) -> Result<Self, TokenizerLoadError> {
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|source| TokenizerLoadError::Io {
                path: path.to_path_buf(),
                source,
            })
        };
        let invalid = |path: &Path, reason: String| TokenizerLoadError::Invalid {
            path: path.to_path_buf(),
            reason,
        };
        let vocab_map: HashMap<String, u64> = serde_json::from_str(&read(vocab)?)
            .map_err(|e| invalid(vocab, format!("expected a JSON object of token ids: {e}")))?;
        let merges_text = read(merges)?;
        let pairs = parse_merges(&merges_text).map_err(|reason| invalid(merges, reason))?;
        for (n, (left, right)) in pairs.iter().enumerate() {
            let merged = format!("{left}{right}");
            if !vocab_map.contains_key(&merged) {
                return Err(invalid(
                    merges,
                    format!(
                        "merge {} produces {merged:?}, which is not in the vocabulary",
                        n + 1
                    ),
                ));
            }
        }
        Ok(Self::from_merges(pairs))
    }

    /// Builds from ranked merge pairs, rank = position in the list.
    pub fn from_merges(pairs: Vec<(String, String)>) -> Self {
        let mut ranks = HashMap::with_capacity(pairs.len());
        for (rank, pair) in pairs.into_iter().enumerate() {
            ranks.entry(pair).or_insert(rank);
        }
        Bpe {
            ranks,
            byte_chars: byte_to_char(),
        }
    }

    /// Each character starts as one symbol, written in the byte-level
    /// alphabet, so counts never exceed the character count.
    fn initial_symbols(&self, piece: &str) -> Vec<String> {
        let mut buf = [0u8; 4];
        piece
            .chars()
            .map(|c| {
                c.encode_utf8(&mut buf)
                    .bytes()
                    .map(|b| self.byte_chars[b as usize])
                    .collect()
            })
            .collect()
    }

    fn count_piece(&self, piece: &str) -> usize {
        let mut symbols = self.initial_symbols(piece);
        while symbols.len() > 1 {
            let best = symbols
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| {
                    self.ranks
                        .get(&(w[0].clone(), w[1].clone()))
                        .map(|&rank| (rank, i))
                })
                .min();
            let Some((rank, _)) = best else { break };
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len()
                    && self
                        .ranks
                        .get(&(symbols[i].clone(), symbols[i + 1].clone()))
                        == Some(&rank)
                {
                    merged.push(format!("{}{}", symbols[i], symbols[i + 1]));
                    i += 2;
                } else {
                    merged.push(symbols[i].clone());
                    i += 1;
                }
            }
            symbols = merged;
        }
        symbols.len()
    }

    pub fn count(&self, text: &str) -> usize {
        pretokenize(text).iter().map(|p| self.count_piece(p)).sum()
    }
}

fn parse_merges(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.starts_with("#version") || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                pairs.push((a.to_string(), b.to_string()))
            }
            _ => {
                return Err(format!(
                    "line {}: expected two space-separated symbols",
                    n + 1
                ))
            }
        }
    }
    Ok(pairs)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Letter,
    Number,
    Other,
    Space,
}

fn class(c: char) -> Class {
    if c.is_whitespace() {
        Class::Space
    } else if c.is_alphabetic() {
        Class::Letter
    } else if c.is_numeric() {
        Class::Number
    } else {
        Class::Other
    }
}

const CONTRACTIONS: [&str; 7] = ["'s", "'t", "'re", "'ve", "'m", "'ll", "'d"];

/// GPT-2 pre-tokenization: contractions, ` ?letters`, ` ?digits`,
/// ` ?other`, and whitespace runs that leave their last space to the next word.
pub fn pretokenize(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let idx: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| idx.get(i).map(|&(b, _)| b).unwrap_or(text.len());
    let mut i = 0;
    while i < idx.len() {
        let start = i;
        let rest = &text[idx[i].0..];
        if let Some(c) = CONTRACTIONS.iter().find(|c| rest.starts_with(*c)) {
            i += c.chars().count();
            pieces.push(&text[byte_at(start)..byte_at(i)]);
            continue;
        }
        let c = idx[i].1;
        let mut j = i;
        if c == ' ' && i + 1 < idx.len() && class(idx[i + 1].1) != Class::Space {
            j += 1;
        }
        let cls = class(idx[j].1);
        if cls == Class::Space {
            let mut end = j;
            while end < idx.len() && class(idx[end].1) == Class::Space {
                end += 1;
            }
            // keep one trailing whitespace char for the following token
            if end < idx.len() && end - j > 1 {
                end -= 1;
            }
            i = end;
        } else {
            let mut end = j + 1;
            while end < idx.len() && class(idx[end].1) == cls {
                end += 1;
            }
            i = end;
        }
        pieces.push(&text[byte_at(start)..byte_at(i)]);
    }
    pieces
}
