//! Surface-text primitives: quantity extraction, answer normalization,
//! list splitting and date recognition.
//!
//! Everything here is a pure function over `&str`.

use chrono::NaiveDate;

use crate::model::Quantity;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

const SMALL_NUMBERS: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];

const TENS: [(&str, u32); 8] = [
    ("twenty", 20),
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
];

/// True when the comma at byte `i` sits between a digit and exactly three
/// digits, i.e. it is a thousands separator rather than a delimiter.
pub fn is_thousands_comma(bytes: &[u8], i: usize) -> bool {
    if bytes.get(i) != Some(&b',') || i == 0 || !bytes[i - 1].is_ascii_digit() {
        return false;
    }
    let group = &bytes[i + 1..];
    group.len() >= 3
        && group[..3].iter().all(u8::is_ascii_digit)
        && group.get(3).is_none_or(|b| !b.is_ascii_digit())
}

/// Byte offset of the first comma that is not a thousands separator.
pub fn find_delimiter_comma(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    (0..bytes.len()).find(|&i| bytes[i] == b',' && !is_thousands_comma(bytes, i))
}

/// Extract a quantity from a cell such as `"34,669"`, `"42-yard"`, `"47%"`
/// or `"eight"`. Returns `None` when the whole cell is not a number with an
/// optional unit suffix.
pub fn parse_quantity(cell: &str) -> Option<Quantity> {
    let s = cell.trim();
    if s.is_empty() {
        return None;
    }
    parse_numeral(s).or_else(|| parse_number_words(s))
}

fn parse_numeral(s: &str) -> Option<Quantity> {
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut digits = String::new();
    if matches!(bytes[0], b'-' | b'+') {
        if bytes[0] == b'-' {
            digits.push('-');
        }
        i = 1;
    }
    let int_start = i;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            i += 1;
        } else if bytes[i] == b',' && i > int_start && is_thousands_comma(bytes, i) {
            i += 1;
        } else {
            break;
        }
    }
    let mut saw_digit = i > int_start;
    if i < bytes.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
        digits.push('.');
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            i += 1;
        }
        saw_digit = true;
    }
    if !saw_digit {
        return None;
    }
    let value: f64 = digits.parse().ok()?;
    let unit = parse_unit_suffix(&s[i..])?;
    Quantity::new(value, unit).ok()
}

/// `Some(None)` for an empty suffix, `Some(Some(unit))` for `-unit` or `%`,
/// `None` when the suffix is not a unit.
fn parse_unit_suffix(rest: &str) -> Option<Option<String>> {
    if rest.is_empty() {
        return Some(None);
    }
    if rest.trim_start() == "%" {
        return Some(Some("%".to_string()));
    }
    let unit = rest.strip_prefix('-')?;
    let well_formed = unit.starts_with(|c: char| c.is_alphabetic())
        && !unit.ends_with('-')
        && unit.chars().all(|c| c.is_alphabetic() || c == '-');
    well_formed.then(|| Some(unit.to_string()))
}

fn parse_number_words(s: &str) -> Option<Quantity> {
    let lower = s.to_lowercase();
    // Candidate ends of the number phrase: the whole string or any `-`/` `.
    let mut cuts: Vec<usize> = lower
        .char_indices()
        .filter(|&(_, c)| c == '-' || c == ' ')
        .map(|(i, _)| i)
        .collect();
    cuts.push(lower.len());
    for &cut in cuts.iter().rev() {
        let Some(value) = number_phrase_value(&lower[..cut]) else {
            continue;
        };
        if let Some(unit) = parse_unit_suffix(&s[cut..]) {
            return Quantity::new(f64::from(value), unit).ok();
        }
    }
    None
}

fn number_phrase_value(phrase: &str) -> Option<u32> {
    let words: Vec<&str> = phrase.split(['-', ' ']).collect();
    let small = |w: &str| SMALL_NUMBERS.iter().position(|&n| n == w).map(|v| v as u32);
    let tens = |w: &str| TENS.iter().find(|(n, _)| *n == w).map(|&(_, v)| v);
    match words.as_slice() {
        ["hundred"] | ["one" | "a", "hundred"] => Some(100),
        [w] => small(w).or_else(|| tens(w)),
        [t, u] => {
            let t = tens(t)?;
            let u = small(u).filter(|&u| (1..10).contains(&u))?;
            Some(t + u)
        }
        _ => None,
    }
}

/// Canonical digit string for a plain numeric token (`"5,666"` → `"5666"`,
/// `"3.50"` → `"3.5"`). Units and signs are not accepted here.
pub fn canonical_number(token: &str) -> Option<String> {
    let bytes = token.as_bytes();
    if bytes.is_empty() || !(bytes[0].is_ascii_digit() || bytes[0] == b'.') {
        return None;
    }
    let q = parse_numeral(token)?;
    q.unit.is_none().then(|| crate::model::format_number(q.value))
}

/// Lowercase, drop articles and punctuation, collapse whitespace and rewrite
/// numbers as canonical digit strings.
pub fn normalize_answer_text(s: &str) -> String {
    let lower = s.to_lowercase();
    let mut out: Vec<String> = Vec::new();
    for raw in lower.split(|c: char| c.is_whitespace() || c == '-') {
        let trimmed = raw.trim_matches(is_punctuation);
        let token = match canonical_number(trimmed) {
            Some(n) => n,
            None => {
                let stripped: String = trimmed.chars().filter(|c| !is_punctuation(*c)).collect();
                canonical_number(&stripped).unwrap_or(stripped)
            }
        };
        if !token.is_empty() && !ARTICLES.contains(&token.as_str()) {
            out.push(token);
        }
    }
    out.join(" ")
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '‘' | '’' | '“' | '”' | '–' | '—' | '…')
}

/// Split a list answer. Semicolons win when present; otherwise commas (not
/// thousands separators) and the conjunction "and" delimit items.
pub fn split_list_answer(s: &str) -> Vec<String> {
    let pieces: Vec<String> = if s.contains(';') {
        s.split(';').map(str::to_string).collect()
    } else {
        let mut parts = Vec::new();
        let mut rest = s;
        while let Some(i) = find_delimiter_comma(rest) {
            parts.push(rest[..i].to_string());
            rest = &rest[i + 1..];
        }
        parts.push(rest.to_string());
        parts.iter().flat_map(|p| split_on_and(p)).collect()
    };
    pieces
        .into_iter()
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

/// Split on standalone "and" words, keeping the items' own spacing.
fn split_on_and(piece: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut word_start = None;
    for (i, c) in piece.char_indices().chain([(piece.len(), ' ')]) {
        if c.is_whitespace() {
            if let Some(ws) = word_start.take() {
                if piece[ws..i].eq_ignore_ascii_case("and") {
                    out.push(piece[start..ws].to_string());
                    start = i;
                }
            }
        } else if word_start.is_none() {
            word_start = Some(i);
        }
    }
    out.push(piece[start.min(piece.len())..].to_string());
    out
}

/// Join items the way a person lists them: `a`, `a and b`, `a, b and c`.
pub fn natural_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// Recognize ISO (`1991-01-23`) and day-month-year (`26 Sep 1990`,
/// `26 September 1990`) dates.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%d %b %Y"))
        .or_else(|_| NaiveDate::parse_from_str(s, "%d %B %Y"))
        .ok()
}

/// Naive English plural for column headers used in questions.
pub fn pluralize(noun: &str) -> String {
    let lower = noun.to_lowercase();
    if lower.ends_with('s') || lower.ends_with('x') || lower.ends_with("ch") || lower.ends_with("sh")
    {
        if lower.ends_with("ss") || !lower.ends_with('s') {
            return format!("{noun}es");
        }
        return noun.to_string();
    }
    if let Some(stem) = noun.strip_suffix('y') {
        if !stem.ends_with(['a', 'e', 'i', 'o', 'u']) {
            return format!("{stem}ies");
        }
    }
    format!("{noun}s")
}

/// `2` → `"second"`; `1` yields an empty string ("the highest").
pub fn ordinal_word(k: usize) -> String {
    const WORDS: [&str; 10] = [
        "", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    ];
    match k {
        1..=10 => WORDS[k - 1].to_string(),
        _ => format!("{k}th"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(value: f64, unit: Option<&str>) -> Option<Quantity> {
        Some(Quantity::new(value, unit.map(str::to_string)).unwrap())
    }

    #[test]
    fn quantities_from_cells() {
        assert_eq!(parse_quantity("34,669"), q(34669.0, None));
        assert_eq!(parse_quantity("42-yard"), q(42.0, Some("yard")));
        assert_eq!(parse_quantity("eight"), q(8.0, None));
        assert_eq!(parse_quantity("0"), q(0.0, None));
        assert_eq!(parse_quantity("eight-yard"), q(8.0, Some("yard")));
        assert_eq!(parse_quantity("twenty-one"), q(21.0, None));
        assert_eq!(parse_quantity("twenty-one-yard"), q(21.0, Some("yard")));
        assert_eq!(parse_quantity("one hundred"), q(100.0, None));
        assert_eq!(parse_quantity("47%"), q(47.0, Some("%")));
        assert_eq!(parse_quantity("3.25"), q(3.25, None));
        assert_eq!(parse_quantity("-12"), q(-12.0, None));
        assert_eq!(parse_quantity(" 1,234,567 "), q(1234567.0, None));
    }

    #[test]
    fn non_quantities() {
        for s in [
            "", "Walsall", "R2 1st Leg", "26 Sep 1990", "2nd", "5,66", "1,5", "thousand", "two hundred",
            "42-", "42 yard",
        ] {
            assert_eq!(parse_quantity(s), None, "{s:?}");
        }
    }

    #[test]
    fn thousands_rule() {
        assert!(is_thousands_comma(b"5,666", 1));
        assert!(!is_thousands_comma(b"2, 5", 1));
        assert!(!is_thousands_comma(b"1,2345", 1));
        assert_eq!(find_delimiter_comma("2, 5,666;10,037"), Some(1));
        assert_eq!(find_delimiter_comma("5,666"), None);
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_answer_text("The Walsall."), "walsall");
        assert_eq!(normalize_answer_text("Matt Bryant"), "matt bryant");
        assert_eq!(normalize_answer_text("5,666 "), "5666");
        assert_eq!(normalize_answer_text("  an  Oxford   United "), "oxford united");
        assert_eq!(normalize_answer_text("3.50"), "3.5");
        assert_eq!(normalize_answer_text("Sheffield Wed."), "sheffield wed");
        assert_eq!(normalize_answer_text("42-yard"), "42 yard");
    }

    #[test]
    fn list_splitting() {
        assert_eq!(
            split_list_answer("Walsall; Liverpool; Sheffield Wed."),
            ["Walsall", "Liverpool", "Sheffield Wed."]
        );
        assert_eq!(split_list_answer("12-yard, 42-yard and 33-yard"), ["12-yard", "42-yard", "33-yard"]);
        assert_eq!(split_list_answer("A"), ["A"]);
        assert_eq!(split_list_answer("20, 24, and 53"), ["20", "24", "53"]);
        assert_eq!(split_list_answer("5,666, 10,037"), ["5,666", "10,037"]);
        assert!(split_list_answer(" ; ;").is_empty());
    }

    #[test]
    fn dates() {
        assert!(parse_date("26 Sep 1990").is_some());
        assert!(parse_date("26 September 1990").is_some());
        assert!(parse_date("1991-01-23").is_some());
        assert!(parse_date("Sep 1990").is_none());
        assert!(parse_date("26 Sep 1990") < parse_date("23 Jan 1991"));
    }

    #[test]
    fn plurals_and_ordinals() {
        assert_eq!(pluralize("opponent"), "opponents");
        assert_eq!(pluralize("attendance"), "attendances");
        assert_eq!(pluralize("city"), "cities");
        assert_eq!(pluralize("class"), "classes");
        assert_eq!(pluralize("goals"), "goals");
        assert_eq!(ordinal_word(1), "");
        assert_eq!(ordinal_word(3), "third");
        assert_eq!(natural_list(&["2".into(), "3".into()]), "2 and 3");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quantity_render_reparses(v in -1_000_000i64..1_000_000, frac in 0u8..4, unit in proptest::option::of("[a-z]{1,6}")) {
                let value = v as f64 + f64::from(frac) * 0.25;
                let original = Quantity::new(value, unit).unwrap();
                let again = parse_quantity(&original.to_string()).unwrap();
                prop_assert_eq!(again, original);
            }

            #[test]
            fn normalize_is_idempotent(s in "[ -~]{0,40}") {
                let once = normalize_answer_text(&s);
                prop_assert_eq!(normalize_answer_text(&once), once.clone());
            }

            #[test]
            fn split_keeps_order_and_drops_empties(items in proptest::collection::vec("[A-Za-z][A-Za-z .]{0,8}", 1..6)) {
                let joined = items.join("; ");
                let split = split_list_answer(&joined);
                prop_assert!(split.iter().all(|s| !s.is_empty()));
                let expected: Vec<String> = items.iter().map(|s| s.trim().to_string()).collect();
                prop_assert_eq!(split, expected);
            }
        }
    }
}
