//! Text-pair classification records and their TSV encoding.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One `text_a <TAB> text_b <TAB> label` row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TextPairRecord {
    pub text_a: String,
    pub text_b: String,
    pub label: u8,
}

fn check_text(t: &str) -> Result<()> {
    if t.trim().is_empty() {
        return Err(Error::Format("empty text".into()));
    }
    if t.contains('\t') || t.contains('\n') || t.contains('\r') {
        return Err(Error::Format(format!("text {t:?} contains a tab or line break")));
    }
    Ok(())
}

impl TextPairRecord {
    pub fn new(text_a: impl Into<String>, text_b: impl Into<String>, label: u8) -> Result<Self> {
        let rec = TextPairRecord {
            text_a: text_a.into(),
            text_b: text_b.into(),
            label,
        };
        check_text(&rec.text_a)?;
        check_text(&rec.text_b)?;
        if label > 1 {
            return Err(Error::Format(format!("label {label} is not 0 or 1")));
        }
        Ok(rec)
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split('\t').collect();
        let [a, b, label] = cols.as_slice() else {
            return Err(Error::Format(format!("expected 3 tab-separated columns, got {}", cols.len())));
        };
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::Format(format!("label {other:?} is not 0 or 1"))),
        };
        TextPairRecord::new(*a, *b, label)
    }

    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}", self.text_a, self.text_b, self.label)
    }
}

/// Reads records, optionally skipping one header line. Blank lines are
/// skipped; anything else malformed is reported with its line number.
pub fn read_tsv<R: BufRead>(reader: R, header: bool) -> Result<Vec<TextPairRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
        if header && i == 0 {
            continue;
        }
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        out.push(TextPairRecord::parse_line(line).map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

pub fn write_tsv<W: Write>(mut writer: W, records: &[TextPairRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(writer, "{}", r.to_line())?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        let r = TextPairRecord::parse_line("how are you\thow old are you\t0").unwrap();
        assert_eq!(r.text_a, "how are you");
        assert_eq!(r.label, 0);
        assert_eq!(r.to_line(), "how are you\thow old are you\t0");
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(TextPairRecord::parse_line("a\tb").is_err());
        assert!(TextPairRecord::parse_line("a\tb\t2").is_err());
        assert!(TextPairRecord::parse_line("a\tb\tc\t1").is_err());
        assert!(TextPairRecord::parse_line(" \tb\t1").is_err());
        assert!(TextPairRecord::new("a\tx", "b", 1).is_err());
    }

    #[test]
    fn header_and_blank_lines() {
        let data = "a\tb\tlabel\nx y\tz\t1\n\nq\tr\t0\r\n";
        let recs = read_tsv(data.as_bytes(), true).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].text_b, "r");
        assert!(read_tsv(data.as_bytes(), false).is_err());
        let mut buf = Vec::new();
        write_tsv(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x y\tz\t1\nq\tr\t0\n");
    }
}
