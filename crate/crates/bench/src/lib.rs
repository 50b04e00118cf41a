//! Benchmark inputs shared by the criterion targets.

pub const WALTZ: &str = include_str!("../../core/tests/fixtures/waltz.abc");
pub const TWO_PART: &str = include_str!("../../core/tests/fixtures/generated_two_part.abc");

/// `copies` tunes concatenated into one tunebook.
pub fn tunebook(copies: usize) -> String {
    (0..copies)
        .map(|i| TWO_PART.replacen("X:1", &format!("X:{}", i + 1), 1))
        .collect::<Vec<_>>()
        .join("\n")
}
