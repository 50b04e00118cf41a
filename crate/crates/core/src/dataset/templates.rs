//! Instruction template banks.
//!
//! File format: `[task]` headers using task slugs, followed by one template
//! per line. Blank lines and lines starting with `#` are ignored. Inside a
//! template `\n` is a line break and `\\` a backslash.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::TaskKind;

const DEFAULT_BANK: &str = include_str!("default_templates.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Placeholder {
    Chords,
    MusicalFormA,
    MusicalFormT,
    Motif,
    Melody,
    Music,
}

impl Placeholder {
    pub const ALL: [Placeholder; 6] = [
        Placeholder::Chords,
        Placeholder::MusicalFormA,
        Placeholder::MusicalFormT,
        Placeholder::Motif,
        Placeholder::Melody,
        Placeholder::Music,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Placeholder::Chords => "CHORDS",
            Placeholder::MusicalFormA => "MUSICAL_FORM_A",
            Placeholder::MusicalFormT => "MUSICAL_FORM_T",
            Placeholder::Motif => "MOTIF",
            Placeholder::Melody => "MELODY",
            Placeholder::Music => "MUSIC",
        }
    }

    pub fn marker(self) -> String {
        format!("{{{}}}", self.name())
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("cannot read template bank: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: unknown task section [{name}]")]
    UnknownTask { line: usize, name: String },
    #[error("line {line}: template outside a task section")]
    OutsideSection { line: usize },
    #[error("line {line}: unknown placeholder {{{name}}}")]
    UnknownPlaceholder { line: usize, name: String },
    #[error("task {task}: no templates")]
    NoTemplates { task: TaskKind },
    #[error("task {task}, line {line}: placeholders {found:?} do not match required {required}")]
    PlaceholderMismatch {
        task: TaskKind,
        line: usize,
        found: Vec<String>,
        required: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub text: String,
}

impl Template {
    /// Placeholders in order of appearance.
    pub fn placeholders(&self) -> Vec<Placeholder> {
        scan_placeholders(&self.text)
            .into_iter()
            .filter_map(|r| r.ok())
            .collect()
    }

    /// The template with placeholders removed and whitespace trimmed.
    pub fn instruction(&self) -> String {
        let mut text = self.text.clone();
        for p in Placeholder::ALL {
            text = text.replace(&p.marker(), "");
        }
        text.lines()
            .map(str::trim_end)
            .filter(|l| !l.trim().is_empty())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn fill(&self, value: impl Fn(Placeholder) -> String) -> String {
        let mut text = self.text.clone();
        for p in Placeholder::ALL {
            let marker = p.marker();
            if text.contains(&marker) {
                text = text.replace(&marker, &value(p));
            }
        }
        text
    }
}

/// Every `{NAME}` where NAME is uppercase letters and underscores.
fn scan_placeholders(text: &str) -> Vec<Result<Placeholder, String>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        rest = &rest[open + 1..];
        let Some(close) = rest.find('}') else { break };
        let name = &rest[..close];
        if !name.is_empty() && name.chars().all(|c| c.is_ascii_uppercase() || c == '_') {
            out.push(
                Placeholder::ALL
                    .into_iter()
                    .find(|p| p.name() == name)
                    .ok_or_else(|| name.to_string()),
            );
            rest = &rest[close + 1..];
        }
    }
    out
}

/// Placeholders a task's templates must contain, as alternatives: a
/// template is valid when its placeholder set equals one of them.
pub fn required_placeholders(task: TaskKind) -> &'static [&'static [Placeholder]] {
    use Placeholder::*;
    match task {
        TaskKind::ChordConditioned => &[&[Chords]],
        TaskKind::FormConditioned => &[&[MusicalFormA], &[MusicalFormT]],
        TaskKind::AlphaFormMotifConditioned => &[&[MusicalFormA, Motif]],
        TaskKind::TermFormMotifConditioned => &[&[MusicalFormT, Motif]],
        TaskKind::MelodyHarmonization => &[&[Melody]],
        TaskKind::BachStyle => &[&[]],
        TaskKind::MotifExtraction | TaskKind::FormExtraction => &[&[Music]],
    }
}

fn describe(alternatives: &[&[Placeholder]]) -> String {
    alternatives
        .iter()
        .map(|set| {
            if set.is_empty() {
                "none".to_string()
            } else {
                set.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        })
        .collect::<Vec<_>>()
        .join(" or ")
}

fn unescape(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateBank {
    templates: BTreeMap<TaskKind, Vec<Template>>,
}

impl TemplateBank {
    /// The built-in bank. The first template of each task is the reference
    /// instruction for that task.
    pub fn default_bank() -> Self {
        Self::parse(DEFAULT_BANK).expect("built-in template bank is valid")
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut templates: BTreeMap<TaskKind, Vec<Template>> = BTreeMap::new();
        let mut current: Option<TaskKind> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let task =
                    name.trim()
                        .parse::<TaskKind>()
                        .map_err(|_| TemplateError::UnknownTask {
                            line: line_no,
                            name: name.to_string(),
                        })?;
                templates.entry(task).or_default();
                current = Some(task);
                continue;
            }
            let task = current.ok_or(TemplateError::OutsideSection { line: line_no })?;
            let text = unescape(line);
            let mut found = Vec::new();
            for p in scan_placeholders(&text) {
                match p {
                    Ok(p) => found.push(p),
                    Err(name) => {
                        return Err(TemplateError::UnknownPlaceholder {
                            line: line_no,
                            name,
                        })
                    }
                }
            }
            found.sort();
            found.dedup();
            let alternatives = required_placeholders(task);
            if !alternatives.iter().any(|set| {
                let mut want = set.to_vec();
                want.sort();
                want == found
            }) {
                return Err(TemplateError::PlaceholderMismatch {
                    task,
                    line: line_no,
                    found: found.iter().map(|p| p.to_string()).collect(),
                    required: describe(alternatives),
                });
            }
            let list = templates.entry(task).or_default();
            list.push(Template {
                id: format!("{}-{}", task.slug(), list.len()),
                text,
            });
        }
        for task in TaskKind::ALL {
            if templates.get(&task).is_none_or(Vec::is_empty) {
                return Err(TemplateError::NoTemplates { task });
            }
        }
        Ok(TemplateBank { templates })
    }

    pub fn templates(&self, task: TaskKind) -> &[Template] {
        &self.templates[&task]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank_with(task_section: &str) -> String {
        let mut text = String::new();
        for task in TaskKind::ALL {
            text.push_str(&format!("[{}]\n", task.slug()));
            let section = format!("[{}]", task.slug());
            if task_section.starts_with(&section) {
                text.push_str(task_section.strip_prefix(&section).unwrap().trim());
                text.push('\n');
            } else {
                text.push_str(
                    DEFAULT_BANK
                        .split(&section)
                        .nth(1)
                        .unwrap()
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .unwrap(),
                );
                text.push('\n');
            }
        }
        text
    }

    #[test]
    fn default_bank_reference_instructions() {
        let bank = TemplateBank::default_bank();
        let first = |t| bank.templates(t)[0].instruction();
        assert_eq!(
            first(TaskKind::ChordConditioned),
            "Develop a musical piece using the given chord progression."
        );
        assert_eq!(
            first(TaskKind::BachStyle),
            "Provide a musical piece that draws inspiration from Bach's compositions."
        );
        assert_eq!(
            first(TaskKind::MotifExtraction),
            "Analyze the musical work and pinpoint the consistent melodic element in every section."
        );
        for task in TaskKind::ALL {
            assert_eq!(bank.templates(task).len(), 3, "{task}");
        }
        assert_eq!(bank.templates(TaskKind::ChordConditioned)[1].id, "chord-1");
    }

    #[test]
    fn placeholder_mismatch() {
        let text = bank_with("[melody]\nHarmonize this.");
        match TemplateBank::parse(&text) {
            Err(TemplateError::PlaceholderMismatch { task, .. }) => {
                assert_eq!(task, TaskKind::MelodyHarmonization)
            }
            other => panic!("{other:?}"),
        }
        let text = bank_with("[chord]\nUse {CHORDS} and {MELODY}");
        assert!(matches!(
            TemplateBank::parse(&text),
            Err(TemplateError::PlaceholderMismatch {
                task: TaskKind::ChordConditioned,
                ..
            })
        ));
        let text = bank_with("[chord]\nUse {CHORD}");
        assert!(matches!(
            TemplateBank::parse(&text),
            Err(TemplateError::UnknownPlaceholder { line: 2, .. })
        ));
    }

    #[test]
    fn structure_errors() {
        assert!(matches!(
            TemplateBank::parse("Hello {CHORDS}"),
            Err(TemplateError::OutsideSection { line: 1 })
        ));
        assert!(matches!(
            TemplateBank::parse("[lyrics]\nSing"),
            Err(TemplateError::UnknownTask { line: 1, .. })
        ));
        assert!(matches!(
            TemplateBank::parse("[chord]\nA {CHORDS}"),
            Err(TemplateError::NoTemplates { .. })
        ));
    }

    #[test]
    fn escapes_and_fill() {
        let t = Template {
            id: "x".into(),
            text: unescape(r"Play\n{CHORDS} \\ end"),
        };
        assert_eq!(t.text, "Play\n{CHORDS} \\ end");
        assert_eq!(t.fill(|_| "F C7".into()), "Play\nF C7 \\ end");
        assert_eq!(t.placeholders(), vec![Placeholder::Chords]);
        // braces that are not placeholders are left alone
        assert!(scan_placeholders("{g}A {abc}").is_empty());
    }
}
