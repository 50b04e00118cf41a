//! Settings file support. Values given on the command line win over the
//! file, which wins over built-in defaults.

use std::path::{Path, PathBuf};

use abcscore::mcq::{ProviderConfig, ProviderKind};
use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub tasks: Option<String>,
    pub mode: Option<String>,
    pub tokenizer: Option<Vec<String>>,
    pub templates: Option<PathBuf>,
    pub provider: Option<ProviderSetting>,
    pub exemplars: Option<PathBuf>,
    pub shuffles: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub prompt_prefix: Option<String>,
    pub prompt_suffix: Option<String>,
}

/// A stub name, a path to a provider file, or an inline provider table.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProviderSetting {
    Reference(String),
    Inline(ProviderConfig),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: FileConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                *p = base.join(&*p);
            }
        };
        rebase(&mut config.templates);
        rebase(&mut config.exemplars);
        rebase(&mut config.checkpoint);
        if let Some(ProviderSetting::Reference(r)) = &mut config.provider {
            if stub_provider(r).is_none() {
                *r = base.join(&*r).display().to_string();
            }
        }
        if let Some(list) = &mut config.tokenizer {
            for t in list.iter_mut() {
                if abcscore::tokenize::TokenizerMode::from_name(t).is_none() {
                    *t = base.join(&*t).display().to_string();
                }
            }
        }
        Ok(config)
    }
}

/// `oracle`, `random`, `random:<seed>`, `fixed` or `fixed:<letter>`.
pub fn stub_provider(name: &str) -> Option<ProviderConfig> {
    let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
    let mut config = match kind {
        "oracle" if arg.is_empty() => ProviderConfig::stub(ProviderKind::Oracle),
        "random" => ProviderConfig::stub(ProviderKind::Random),
        "fixed" => ProviderConfig::stub(ProviderKind::Fixed),
        _ => return None,
    };
    if !arg.is_empty() {
        match config.kind {
            ProviderKind::Random => config.seed = Some(arg.parse().ok()?),
            _ => {
                let mut chars = arg.chars();
                config.letter = chars.next();
                if chars.next().is_some() {
                    return None;
                }
            }
        }
    }
    Some(config)
}

pub fn resolve_provider(setting: &ProviderSetting) -> Result<ProviderConfig> {
    match setting {
        ProviderSetting::Inline(config) => Ok(config.clone()),
        ProviderSetting::Reference(name) => {
            if let Some(stub) = stub_provider(name) {
                return Ok(stub);
            }
            let path = Path::new(name);
            if !path.is_file() {
                bail!("provider {name:?} is neither a stub name nor a provider file");
            }
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read provider file {name}"))?;
            toml::from_str(&text).with_context(|| format!("invalid provider file {name}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stub_names() {
        assert_eq!(stub_provider("oracle").unwrap().kind, ProviderKind::Oracle);
        assert_eq!(stub_provider("random:7").unwrap().seed, Some(7));
        assert_eq!(stub_provider("fixed:C").unwrap().letter, Some('C'));
        assert!(stub_provider("fixed:CD").is_none());
        assert!(stub_provider("random:x").is_none());
        assert!(stub_provider("gpt").is_none());
    }

    #[test]
    fn inline_provider_table() {
        let config: FileConfig = toml::from_str(
            "seed = 3\n[provider]\nkind = \"completion\"\nbase_url = \"http://localhost:1/v1\"\nmodel = \"m\"\n",
        )
        .unwrap();
        let p = resolve_provider(config.provider.as_ref().unwrap()).unwrap();
        assert_eq!(p.kind, ProviderKind::Completion);
        assert_eq!(p.max_retries, 3);
        assert_eq!(config.seed, Some(3));
    }
}
