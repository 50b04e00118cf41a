use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::parser::{parse_fraction, parse_tempo};
use super::{BarlineKind, BodyToken, BrokenDirection, Rational, TuneDocument};

pub const DEFAULT_UNIT: (i64, i64) = (1, 8);
pub const DEFAULT_TEMPO_QPM: i64 = 120;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DurationError {
    #[error("tune has no notes or rests")]
    ZeroDuration,
}

/// Performed length of a tune, repeats expanded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DurationInfo {
    #[serde(serialize_with = "ratio_string")]
    pub whole_note_total: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub seconds: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub tempo_qpm: BigRational,
}

fn ratio_string<S: Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

impl DurationInfo {
    pub fn seconds_f64(&self) -> f64 {
        self.seconds.to_f64().unwrap_or(f64::NAN)
    }
}

fn big(r: Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn is_compound(meter: Option<&str>) -> bool {
    meter
        .and_then(parse_fraction)
        .map(|m| {
            let num = *m.numer();
            num > 3 && num % 3 == 0
        })
        .unwrap_or(false)
}

/// Notes a tuplet of `n` squeezes into the time of.
fn tuplet_span(n: u32, compound: bool) -> u32 {
    match n {
        2 | 4 | 8 => 3,
        3 | 6 => 2,
        _ if compound => 3,
        _ => 2,
    }
}

/// Tempo in quarter notes per minute from a `Q:` value and the unit length.
fn tempo_qpm(q: Option<&str>, unit: Rational) -> BigRational {
    match q.and_then(parse_tempo) {
        Some((Some(beat), bpm)) => big(bpm * beat * 4),
        Some((None, bpm)) => big(bpm * unit * 4),
        None => BigRational::from_integer(BigInt::from(DEFAULT_TEMPO_QPM)),
    }
}

struct Accumulator {
    total: BigRational,
    replay: BigRational,
    in_ending: bool,
}

impl Accumulator {
    fn add(&mut self, value: &BigRational) {
        self.total += value;
        if !self.in_ending {
            self.replay += value;
        }
    }

    fn repeat(&mut self) {
        let replay = std::mem::take(&mut self.replay);
        self.total += replay;
        self.in_ending = false;
    }
}

/// Sums note and rest lengths in whole notes and converts them to seconds.
///
/// `|: ... :|` spans are counted twice, `::` closes one span and opens the
/// next, and a `:|` without an opening sign repeats from the start of the
/// tune or the previous repeat. First and second endings are counted once.
/// Grace notes take no time. Defaults: `L:1/8`, `Q:1/4=120`.
pub fn duration_info(doc: &TuneDocument) -> Result<DurationInfo, DurationError> {
    let mut unit = doc
        .header('L')
        .and_then(parse_fraction)
        .unwrap_or(Rational::new(DEFAULT_UNIT.0, DEFAULT_UNIT.1));
    let tempo = tempo_qpm(doc.header('Q'), unit);
    let compound = is_compound(doc.header('M'));

    let mut acc = Accumulator {
        total: BigRational::zero(),
        replay: BigRational::zero(),
        in_ending: false,
    };
    let mut tuplet: Option<(u32, Rational)> = None;
    let mut next_factor: Option<Rational> = None;
    let mut previous: Option<BigRational> = None;
    let mut timed = false;

    for token in &doc.body {
        let base = match token {
            BodyToken::Note(note) => Some(note.duration),
            BodyToken::Rest { duration } => Some(*duration),
            BodyToken::MultiNote { notes, duration } => Some(
                notes
                    .first()
                    .map(|n| n.duration)
                    .unwrap_or(Rational::from_integer(1))
                    * duration,
            ),
            _ => None,
        };
        if let Some(base) = base {
            timed = true;
            let mut length = base * unit;
            if let Some((remaining, factor)) = tuplet.as_mut() {
                length *= *factor;
                *remaining -= 1;
                if *remaining == 0 {
                    tuplet = None;
                }
            }
            if let Some(factor) = next_factor.take() {
                length *= factor;
            }
            let length = big(length);
            acc.add(&length);
            previous = Some(length);
            continue;
        }
        match token {
            BodyToken::BrokenRhythm { direction, count } => {
                let short = Rational::new(1, 1 << count);
                let long = Rational::from_integer(2) - short;
                let (prev_factor, next) = match direction {
                    BrokenDirection::Right => (long, short),
                    BrokenDirection::Left => (short, long),
                };
                if let Some(prev) = previous.take() {
                    let delta = &prev * big(prev_factor) - &prev;
                    acc.add(&delta);
                }
                next_factor = Some(next);
            }
            BodyToken::Tuplet { n } => {
                let span = tuplet_span(*n, compound);
                tuplet = Some((*n, Rational::new(i64::from(span), i64::from(*n))));
            }
            BodyToken::Barline(kind) => match kind {
                BarlineKind::RepeatStart => {
                    acc.replay = BigRational::zero();
                    acc.in_ending = false;
                }
                BarlineKind::RepeatEnd | BarlineKind::RepeatBoth => acc.repeat(),
                BarlineKind::Double | BarlineKind::Final => acc.in_ending = false,
                BarlineKind::Single => {}
            },
            BodyToken::Volta { .. } => acc.in_ending = true,
            BodyToken::InlineField {
                field: 'L', value, ..
            } => {
                if let Some(l) = parse_fraction(value) {
                    unit = l;
                }
            }
            _ => {}
        }
    }

    if !timed || acc.total.is_zero() {
        return Err(DurationError::ZeroDuration);
    }
    let seconds = &acc.total * BigRational::from_integer(BigInt::from(240)) / &tempo;
    Ok(DurationInfo {
        whole_note_total: acc.total,
        seconds,
        tempo_qpm: tempo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::parse_tune;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn info(text: &str) -> DurationInfo {
        duration_info(&parse_tune(text).unwrap()).unwrap()
    }

    #[test]
    fn eight_bars_of_two_four() {
        let d =
            info("X:1\nM:2/4\nL:1/8\nQ:1/4=120\nK:C\nabcd|abcd|abcd|abcd|abcd|abcd|abcd|abcd|]");
        assert_eq!(d.whole_note_total, r(4, 1));
        assert_eq!(d.seconds, r(8, 1));
    }

    #[test]
    fn repeat_doubles() {
        let d =
            info("X:1\nM:2/4\nL:1/8\nQ:1/4=120\nK:C\n|:abcd|abcd|abcd|abcd|abcd|abcd|abcd|abcd:|");
        assert_eq!(d.seconds, r(16, 1));
    }

    #[test]
    fn default_tempo() {
        let d = info("X:1\nK:C\nabcd|");
        assert_eq!(d.tempo_qpm, r(120, 1));
        assert_eq!(d.whole_note_total, r(1, 2));
        assert_eq!(d.seconds, r(1, 1));
    }

    #[test]
    fn endings_counted_once() {
        // A B A C with each letter one whole note
        let d = info("X:1\nL:1/4\nK:C\n|: cccc |1 dddd :|2 eeee |]");
        assert_eq!(d.whole_note_total, r(4, 1));
    }

    #[test]
    fn unmatched_end_repeats_from_start() {
        let d = info("X:1\nL:1/4\nK:C\ncccc | dddd :| eeee |]");
        assert_eq!(d.whole_note_total, r(5, 1));
    }

    #[test]
    fn repeat_both_reopens() {
        let d = info("X:1\nL:1/4\nK:C\ncccc :: dddd :|");
        assert_eq!(d.whole_note_total, r(4, 1));
    }

    #[test]
    fn tuplets_and_broken_rhythm() {
        assert_eq!(info("X:1\nL:1/8\nK:C\n(3abc").whole_note_total, r(1, 4));
        assert_eq!(info("X:1\nL:1/8\nK:C\na>b").whole_note_total, r(1, 4));
        assert_eq!(info("X:1\nL:1/8\nK:C\na<<b").whole_note_total, r(1, 4));
    }

    #[test]
    fn tempo_in_unit_lengths() {
        // 60 eighth notes per minute = 30 quarter notes per minute
        assert_eq!(info("X:1\nL:1/8\nQ:60\nK:C\na").tempo_qpm, r(30, 1));
        assert_eq!(info("X:1\nQ:3/8=60\nK:C\na").tempo_qpm, r(90, 1));
    }

    #[test]
    fn grace_only_body_has_no_duration() {
        let doc = parse_tune("X:1\nK:C\n{ab} |").unwrap();
        assert_eq!(duration_info(&doc), Err(DurationError::ZeroDuration));
    }
}
