use std::fmt::Write;

use super::{Accidental, BodyToken, BrokenDirection, Note, Rational, TuneDocument};

/// Renders a document as ABC text: one line per header, then the body.
pub fn serialize(doc: &TuneDocument) -> String {
    let mut out = String::new();
    for (field, value) in &doc.headers {
        let _ = writeln!(out, "{field}:{value}");
    }
    out.push_str(&render_tokens(&doc.body));
    out
}

pub fn render_tokens(tokens: &[BodyToken]) -> String {
    let mut out = String::new();
    for token in tokens {
        render_token(token, &mut out);
    }
    out
}

fn render_duration(duration: Rational, out: &mut String) {
    let (num, den) = (*duration.numer(), *duration.denom());
    match (num, den) {
        (1, 1) => {}
        (n, 1) => {
            let _ = write!(out, "{n}");
        }
        (1, 2) => out.push('/'),
        (1, d) => {
            let _ = write!(out, "/{d}");
        }
        (n, d) => {
            let _ = write!(out, "{n}/{d}");
        }
    }
}

fn render_note(note: &Note, out: &mut String) {
    out.push_str(match note.accidental {
        Accidental::None => "",
        Accidental::Sharp => "^",
        Accidental::DoubleSharp => "^^",
        Accidental::Flat => "_",
        Accidental::DoubleFlat => "__",
        Accidental::Natural => "=",
    });
    out.push(note.pitch);
    let mark = if note.octave_shift > 0 { '\'' } else { ',' };
    for _ in 0..note.octave_shift.unsigned_abs() {
        out.push(mark);
    }
    render_duration(note.duration, out);
}

fn render_token(token: &BodyToken, out: &mut String) {
    match token {
        BodyToken::Note(note) => render_note(note, out),
        BodyToken::Rest { duration } => {
            out.push('z');
            render_duration(*duration, out);
        }
        BodyToken::MultiNote { notes, duration } => {
            out.push('[');
            for note in notes {
                render_note(note, out);
            }
            out.push(']');
            render_duration(*duration, out);
        }
        BodyToken::ChordSymbol { text } => {
            let _ = write!(out, "\"{text}\"");
        }
        BodyToken::Barline(kind) => out.push_str(kind.as_str()),
        BodyToken::Volta { number, bracketed } => {
            if *bracketed {
                out.push('[');
            }
            let _ = write!(out, "{number}");
        }
        BodyToken::Tuplet { n } => {
            let _ = write!(out, "({n}");
        }
        BodyToken::SlurOpen => out.push('('),
        BodyToken::SlurClose => out.push(')'),
        BodyToken::GraceGroup {
            acciaccatura,
            inner,
        } => {
            out.push('{');
            if *acciaccatura {
                out.push('/');
            }
            for t in inner {
                render_token(t, out);
            }
            out.push('}');
        }
        BodyToken::Decoration { text, delimited } => {
            if *delimited {
                let _ = write!(out, "!{text}!");
            } else {
                out.push_str(text);
            }
        }
        BodyToken::BrokenRhythm { direction, count } => {
            let c = match direction {
                BrokenDirection::Left => '<',
                BrokenDirection::Right => '>',
            };
            for _ in 0..*count {
                out.push(c);
            }
        }
        BodyToken::Tie => out.push('-'),
        BodyToken::InlineField {
            field,
            value,
            bracketed,
        } => {
            if *bracketed {
                let _ = write!(out, "[{field}:{value}]");
            } else {
                let _ = write!(out, "{field}:{value}");
            }
        }
        BodyToken::LineBreak => out.push('\n'),
        BodyToken::Comment { text } => {
            let _ = write!(out, "%{text}");
        }
        BodyToken::Space => out.push(' '),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::{parse_fragment, parse_tune};

    #[test]
    fn duration_rendering() {
        let doc = parse_tune("X:1\nK:C\nf3 A/ B3/2 c//").unwrap();
        let text = serialize(&doc);
        assert!(text.contains("f3"));
        assert!(text.ends_with("f3 A/ B3/2 c/4"));
    }

    #[test]
    fn fragment_round_trip() {
        let src =
            "(3abc !trill!d ~e .f {/g}a [ceg]2 \"Am\" z/ A>B C<<D | [1 e :|2 f || g |] [K:G] % end";
        let tokens = parse_fragment(src).unwrap();
        assert_eq!(render_tokens(&tokens), src);
    }
}
