use super::{BarlineKind, BodyToken};

/// A contiguous span of body tokens, delimiters included.
pub type Section = Vec<BodyToken>;

/// Partitions the body into sections.
///
/// `:|`, `::`, `||` and `|]` close the current section unless an ending
/// (volta) follows them; `|:` opens a new one once the current section holds
/// at least one complete bar of music. Spans without music are folded into a
/// neighbour, so a pickup before the first `|:` stays with the first section.
/// Concatenating the result reproduces the body exactly.
pub fn split_sections(body: &[BodyToken]) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    let mut current: Section = Vec::new();

    for (i, token) in body.iter().enumerate() {
        match token.barline() {
            Some(BarlineKind::RepeatStart) => {
                let has_music = current.iter().any(BodyToken::is_timed);
                let has_bar = current.iter().any(|t| t.barline().is_some());
                if has_music && has_bar {
                    sections.push(std::mem::take(&mut current));
                }
                current.push(token.clone());
            }
            Some(
                BarlineKind::RepeatEnd
                | BarlineKind::RepeatBoth
                | BarlineKind::Double
                | BarlineKind::Final,
            ) => {
                current.push(token.clone());
                let volta_follows = matches!(
                    body[i + 1..].iter().find(|t| !t.is_layout()),
                    Some(BodyToken::Volta { .. })
                );
                if !volta_follows && current.iter().any(BodyToken::is_timed) {
                    sections.push(std::mem::take(&mut current));
                }
            }
            _ => current.push(token.clone()),
        }
    }

    if !current.is_empty() {
        match sections.last_mut() {
            Some(last) if !current.iter().any(BodyToken::is_timed) => last.extend(current),
            _ => sections.push(current),
        }
    }
    if sections.is_empty() {
        sections.push(Vec::new());
    }
    sections
}

/// Number of barline-separated measures holding at least one note or rest.
pub fn count_bars(tokens: &[BodyToken]) -> usize {
    let mut bars = 0;
    let mut has_music = false;
    for token in tokens {
        if token.is_timed() {
            has_music = true;
        } else if token.barline().is_some() && has_music {
            bars += 1;
            has_music = false;
        }
    }
    bars + usize::from(has_music)
}
