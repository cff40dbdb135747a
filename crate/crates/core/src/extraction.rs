//! Answer-letter extraction.
//!
//! The extractor returns the first *standalone* capital letter in a model
//! response. A letter is standalone when it forms a maximal alphanumeric run
//! of length one, i.e. it is bounded by non-alphanumeric characters or the
//! ends of the string. Run boundaries use Unicode alphanumerics, but only
//! ASCII `A`..=`Z` can be returned. When nothing matches, the sentinel `X` is
//! returned with no span, which makes a literal `X` in the text
//! indistinguishable from a failure unless the span is inspected.
//!
//! The rule is intentionally brittle: `"I choose B"` extracts `I`.
//! [`extract_answer_in_set`] is the option-set-aware variant that skips
//! letters outside the item's option ids.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A single ASCII uppercase letter, `A`..=`Z`.
///
/// Used for option ids and for every answer channel. `X` doubles as the
/// extraction sentinel.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(char);

impl Letter {
    /// The no-match sentinel.
    pub const SENTINEL: Letter = Letter('X');

    pub fn new(c: char) -> Option<Letter> {
        c.is_ascii_uppercase().then_some(Letter(c))
    }

    /// Option id for a zero-based position (0 -> `A`). `None` past `Z`.
    pub fn from_index(i: usize) -> Option<Letter> {
        (i < 26).then(|| Letter((b'A' + i as u8) as char))
    }

    pub fn index(self) -> usize {
        (self.0 as u8 - b'A') as usize
    }

    pub fn as_char(self) -> char {
        self.0
    }

    pub fn is_sentinel(self) -> bool {
        self == Self::SENTINEL
    }

    /// Parses a string holding exactly one uppercase ASCII letter.
    pub fn parse(s: &str) -> Option<Letter> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Letter::new(c),
            _ => None,
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut buf = [0u8; 4];
        serializer.serialize_str(self.0.encode_utf8(&mut buf))
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Letter::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("expected a single letter A-Z, got {s:?}")))
    }
}

/// Result of one extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionOutcome {
    pub letter: Letter,
    /// Character offsets `[start, end)` of the matched letter; `None` iff the
    /// letter is the no-match sentinel.
    pub matched_span: Option<(usize, usize)>,
    /// Set only by the option-set-aware extractor.
    pub in_option_set: Option<bool>,
}

impl ExtractionOutcome {
    fn no_match(in_option_set: Option<bool>) -> Self {
        ExtractionOutcome {
            letter: Letter::SENTINEL,
            matched_span: None,
            in_option_set,
        }
    }

    /// True when nothing was extracted (as opposed to a literal `X`).
    pub fn is_failure(&self) -> bool {
        self.matched_span.is_none()
    }

    /// True when a literal `X` was matched in the text.
    pub fn is_literal_x(&self) -> bool {
        self.letter.is_sentinel() && self.matched_span.is_some()
    }
}

/// Iterates over standalone capital letters as `(char_offset, letter)`.
fn standalone_letters(text: &str) -> impl Iterator<Item = (usize, Letter)> + '_ {
    let mut chars = text.chars().enumerate().peekable();
    let mut prev_alnum = false;
    std::iter::from_fn(move || {
        while let Some((pos, c)) = chars.next() {
            let alnum = c.is_alphanumeric();
            let starts_run = alnum && !prev_alnum;
            prev_alnum = alnum;
            if !starts_run || !c.is_ascii_uppercase() {
                continue;
            }
            let ends_run = chars.peek().is_none_or(|&(_, next)| !next.is_alphanumeric());
            if ends_run {
                return Some((pos, Letter(c)));
            }
        }
        None
    })
}

/// First standalone capital letter, or the sentinel `X`.
pub fn extract_answer(text: &str) -> ExtractionOutcome {
    match standalone_letters(text).next() {
        Some((pos, letter)) => ExtractionOutcome {
            letter,
            matched_span: Some((pos, pos + 1)),
            in_option_set: None,
        },
        None => ExtractionOutcome::no_match(None),
    }
}

/// First standalone capital letter that is one of `option_ids`, or the
/// sentinel `X`.
///
/// A literal `X` only matches when `X` is itself an option id.
pub fn extract_answer_in_set(text: &str, option_ids: &[Letter]) -> ExtractionOutcome {
    match standalone_letters(text).find(|(_, l)| option_ids.contains(l)) {
        Some((pos, letter)) => ExtractionOutcome {
            letter,
            matched_span: Some((pos, pos + 1)),
            in_option_set: Some(true),
        },
        None => ExtractionOutcome::no_match(Some(false)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn letters(s: &str) -> Vec<Letter> {
        s.chars().map(|c| Letter::new(c).unwrap()).collect()
    }

    /// Independent oracle: split on non-alphanumerics and take the first
    /// one-character uppercase ASCII piece.
    fn oracle(text: &str, set: Option<&[Letter]>) -> Letter {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|piece| piece.chars().count() == 1)
            .filter_map(Letter::parse)
            .find(|l| set.is_none_or(|s| s.contains(l)))
            .unwrap_or(Letter::SENTINEL)
    }

    #[test]
    fn single_letter() {
        let out = extract_answer("B");
        assert_eq!(out.letter.as_char(), 'B');
        assert_eq!(out.matched_span, Some((0, 1)));
    }

    #[test]
    fn no_letters_gives_sentinel() {
        let out = extract_answer("no letters here");
        assert_eq!(out.letter, Letter::SENTINEL);
        assert!(out.is_failure());
        assert_eq!(oracle("no letters here", None), Letter::SENTINEL);
    }

    #[test]
    fn parenthesized_answer() {
        let text = "The answer is (C).";
        assert_eq!(oracle(text, None).as_char(), 'C');
        let out = extract_answer(text);
        assert_eq!(out.letter.as_char(), 'C');
        assert_eq!(out.matched_span, Some((15, 16)));
    }

    #[test]
    fn incidental_capital_wins() {
        assert_eq!(oracle("I choose B", None).as_char(), 'I');
        assert_eq!(extract_answer("I choose B").letter.as_char(), 'I');
    }

    #[test]
    fn in_set_skips_non_members() {
        let set = letters("ABCD");
        assert_eq!(oracle("I choose B", Some(&set)).as_char(), 'B');
        let out = extract_answer_in_set("I choose B", &set);
        assert_eq!(out.letter.as_char(), 'B');
        assert_eq!(out.in_option_set, Some(true));
    }

    #[test]
    fn in_set_no_member() {
        let out = extract_answer_in_set("E", &letters("ABCD"));
        assert_eq!(out.letter, Letter::SENTINEL);
        assert!(out.is_failure());
        assert_eq!(out.in_option_set, Some(false));
        assert_eq!(extract_answer_in_set("B", &letters("AB")).letter.as_char(), 'B');
    }

    #[test]
    fn literal_x_is_distinguishable_by_span() {
        let out = extract_answer("Option X is right");
        assert!(out.is_literal_x());
        assert!(!out.is_failure());
        assert_eq!(out.letter, extract_answer("").letter);
    }

    #[test]
    fn boundaries() {
        assert_eq!(extract_answer("A1").letter, Letter::SENTINEL);
        assert_eq!(extract_answer("**D**").letter.as_char(), 'D');
        assert_eq!(extract_answer("answer_B").letter.as_char(), 'B');
        // non-ASCII alphanumerics extend the run
        assert_eq!(extract_answer("éB").letter, Letter::SENTINEL);
        // non-ASCII capitals never match
        assert_eq!(extract_answer("Ä").letter, Letter::SENTINEL);
        assert_eq!(extract_answer("Ä, then C").matched_span, Some((8, 9)));
    }

    fn lowercase_words() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-z]{1,8}", 0..8)
    }

    proptest! {
        #[test]
        fn matches_split_oracle(text in "[A-Za-z0-9 .,()*:_\\-\n]{0,40}") {
            prop_assert_eq!(extract_answer(&text).letter, oracle(&text, None));
            let set = letters("ABCD");
            prop_assert_eq!(extract_answer_in_set(&text, &set).letter, oracle(&text, Some(&set)));
        }

        #[test]
        fn single_embedded_letter(before in lowercase_words(), after in lowercase_words(), idx in 0usize..26) {
            let l = Letter::from_index(idx).unwrap();
            let text = format!("{} {} {}", before.join(" "), l, after.join(" "));
            prop_assert_eq!(extract_answer(&text).letter, l);
            prop_assert_eq!(extract_answer_in_set(&text, &[l]).letter, l);
        }

        #[test]
        fn in_set_consistency(text in "\\PC{0,30}", mask in 1u32..(1 << 6)) {
            let set: Vec<Letter> = (0..6).filter(|i| mask & (1 << i) != 0)
                .map(|i| Letter::from_index(i).unwrap()).collect();
            let plain = extract_answer(&text);
            let scoped = extract_answer_in_set(&text, &set);
            prop_assert!(plain.letter.as_char().is_ascii_uppercase());
            prop_assert!(scoped.is_failure() || set.contains(&scoped.letter));
            if !plain.is_failure() && set.contains(&plain.letter) {
                prop_assert_eq!(scoped.letter, plain.letter);
            }
        }
    }
}
