//! Plain-text file formats.
//!
//! * codes and units: `<utterance_id> <int> <int> ...` per line
//! * alignments: `<utterance_id> <start_ms> <end_ms> <label>` per line
//! * posteriors: an `<utterance_id>` line, then one K-vector line per frame
//!
//! Blank lines are ignored everywhere.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{Corpus, Utterance};
use crate::decode::{UnitPosteriors, UnitSequence};
use crate::error::{Error, Result};
use crate::eval::{Alignment, AlignmentEntry};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(source: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        reason: reason.into(),
    }
}

/// Non-blank lines with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_int_lines(text: &str, source: &str, limit: Option<usize>) -> Result<Vec<(String, Vec<usize>)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (no, line) in lines(text) {
        let mut fields = line.split_whitespace();
        let id = fields.next().expect("non-blank line has a field").to_string();
        let mut values = Vec::new();
        for f in fields {
            let v: usize = f
                .parse()
                .map_err(|_| parse_err(source, no, format!("`{f}` is not a non-negative integer")))?;
            if let Some(limit) = limit {
                if v >= limit {
                    return Err(parse_err(source, no, format!("code {v} outside vocabulary of size {limit}")));
                }
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(parse_err(source, no, format!("utterance {id} has no values")));
        }
        if !seen.insert(id.clone()) {
            return Err(parse_err(source, no, format!("duplicate utterance id {id}")));
        }
        out.push((id, values));
    }
    Ok(out)
}

pub fn parse_codes(text: &str, source: &str, vocab_size: usize) -> Result<Corpus> {
    let rows = parse_int_lines(text, source, Some(vocab_size))?;
    Corpus::new(rows.into_iter().map(|(id, c)| Utterance::new(id, c)).collect(), vocab_size)
}

pub fn parse_codes_file(path: &Path, vocab_size: usize) -> Result<Corpus> {
    parse_codes(&read_text(path)?, &path.display().to_string(), vocab_size)
}

fn int_line(out: &mut String, id: &str, values: &[usize]) {
    out.push_str(id);
    for v in values {
        write!(out, " {v}").expect("writing to a String");
    }
    out.push('\n');
}

pub fn format_codes(corpus: &Corpus) -> String {
    let mut out = String::new();
    for u in corpus.utterances() {
        int_line(&mut out, &u.id, &u.codes);
    }
    out
}

pub fn parse_units(text: &str, source: &str) -> Result<Vec<UnitSequence>> {
    let rows = parse_int_lines(text, source, None)?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("units file"));
    }
    Ok(rows
        .into_iter()
        .map(|(utterance_id, units)| UnitSequence { utterance_id, units })
        .collect())
}

pub fn parse_units_file(path: &Path) -> Result<Vec<UnitSequence>> {
    parse_units(&read_text(path)?, &path.display().to_string())
}

pub fn format_units(units: &[UnitSequence]) -> String {
    let mut out = String::new();
    for u in units {
        int_line(&mut out, &u.utterance_id, &u.units);
    }
    out
}

/// Entries of each utterance are stably sorted by start time and then validated.
pub fn parse_alignments(text: &str, source: &str) -> Result<BTreeMap<String, Alignment>> {
    let mut raw: BTreeMap<String, Vec<AlignmentEntry>> = BTreeMap::new();
    for (no, line) in lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(source, no, format!("expected 4 fields, found {}", fields.len())));
        }
        let time = |f: &str| {
            f.parse::<u64>()
                .map_err(|_| parse_err(source, no, format!("`{f}` is not a non-negative integer")))
        };
        raw.entry(fields[0].to_string()).or_default().push(AlignmentEntry {
            start_ms: time(fields[1])?,
            end_ms: time(fields[2])?,
            label: fields[3].to_string(),
        });
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput("alignments file"));
    }
    raw.into_iter()
        .map(|(id, mut entries)| {
            entries.sort_by_key(|e| e.start_ms);
            Alignment::new(id.clone(), entries).map(|a| (id, a))
        })
        .collect()
}

pub fn parse_alignments_file(path: &Path) -> Result<BTreeMap<String, Alignment>> {
    parse_alignments(&read_text(path)?, &path.display().to_string())
}

pub fn format_alignments<'a>(alignments: impl IntoIterator<Item = &'a Alignment>) -> String {
    let mut out = String::new();
    for a in alignments {
        for e in a.entries() {
            writeln!(out, "{} {} {} {}", a.utterance_id(), e.start_ms, e.end_ms, e.label).expect("writing to a String");
        }
    }
    out
}

/// Probabilities use Rust's shortest round-trip float formatting.
pub fn format_posteriors(posteriors: &[UnitPosteriors]) -> String {
    let mut out = String::new();
    for p in posteriors {
        out.push_str(&p.utterance_id);
        out.push('\n');
        for frame in &p.frames {
            let row: Vec<String> = frame.probs().iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn codes_line_format() {
        let c = parse_codes("utt1 5 5 12\n\n  \nutt2 0\n", "mem", 512).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.utterances()[0].id, "utt1");
        assert_eq!(c.utterances()[0].codes, vec![5, 5, 12]);
    }

    #[test]
    fn codes_errors_name_the_line() {
        match parse_codes("a 1\nutt1 5 512\n", "f.txt", 512) {
            Err(Error::Parse { line, path, .. }) => assert_eq!((line, path.as_str()), (2, "f.txt")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_codes("a 1 x\n", "f", 4), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_codes("a -1\n", "f", 4), Err(Error::Parse { .. })));
        assert!(matches!(parse_codes("a 1\na 2\n", "f", 4), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_codes("\n\n", "f", 4), Err(Error::EmptyCorpus)));
        assert!(matches!(parse_codes("a\n", "f", 4), Err(Error::Parse { .. })));
    }

    #[test]
    fn alignment_examples() {
        let a = parse_alignments("utt1 0 40 a\nutt1 40 100 b\n", "f").unwrap();
        assert_eq!(a["utt1"].entries().len(), 2);
        assert!(matches!(
            parse_alignments("utt1 0 40 a\nutt1 50 100 b\n", "f"),
            Err(Error::InvalidAlignment { .. })
        ));
        let shuffled = parse_alignments("utt1 40 100 b\nutt1 0 40 a\n", "f").unwrap();
        assert_eq!(shuffled, a);
        assert!(parse_alignments("utt1 40 40 b\n", "f").is_err());
        assert!(matches!(parse_alignments("utt1 0 x a\n", "f"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let e = parse_codes_file(Path::new("/nonexistent/codes.txt"), 4).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn posteriors_format() {
        let p = UnitPosteriors {
            utterance_id: "u".into(),
            frames: vec![crate::factor::CategoricalBelief::from_probs(&[0.25, 0.75]).unwrap()],
        };
        let text = format_posteriors(&[p]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "u");
        let row: Vec<f64> = lines[1].split(' ').map(|x| x.parse().unwrap()).collect();
        assert!((row[0] - 0.25).abs() < 1e-12 && (row[1] - 0.75).abs() < 1e-12);
        assert_eq!(lines.len(), 2);
    }

    proptest! {
        #[test]
        fn codes_round_trip(rows in prop::collection::vec(prop::collection::vec(0usize..64, 1..20), 1..8)) {
            let corpus = Corpus::new(
                rows.into_iter().enumerate().map(|(i, c)| Utterance::new(format!("u{i}"), c)).collect(),
                64,
            ).unwrap();
            prop_assert_eq!(parse_codes(&format_codes(&corpus), "mem", 64).unwrap(), corpus);
        }

        #[test]
        fn alignments_round_trip(lens in prop::collection::vec(prop::collection::vec(1u64..200, 1..6), 1..5)) {
            let alis: Vec<Alignment> = lens.iter().enumerate().map(|(i, ls)| {
                let mut start = 0;
                let entries = ls.iter().enumerate().map(|(j, &l)| {
                    let e = AlignmentEntry { start_ms: start, end_ms: start + l, label: format!("p{j}") };
                    start += l;
                    e
                }).collect();
                Alignment::new(format!("u{i}"), entries).unwrap()
            }).collect();
            let parsed = parse_alignments(&format_alignments(&alis), "mem").unwrap();
            prop_assert_eq!(parsed.into_values().collect::<Vec<_>>(), alis);
        }
    }
}
