//! Phase codebooks and their plain-text control-word format.
//!
//! ```text
//! bits=1 rows=2 cols=4
//! 0110
//! 1001
//! ```
//!
//! One line per row, one character `'0'..='7'` per unit. A file may hold
//! several blocks back to back (one per panel). Blank lines and lines
//! starting with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseCodebook {
    rows: usize,
    cols: usize,
    bits: u32,
    states: Vec<u8>,
}

impl PhaseCodebook {
    pub fn new(rows: usize, cols: usize, bits: u32, states: Vec<u8>) -> Result<Self> {
        if !(1..=3).contains(&bits) {
            return Err(invalid(format!("bits must be 1..=3, got {bits}")));
        }
        if rows == 0 || cols == 0 {
            return Err(invalid("codebook must have at least one row and column"));
        }
        if states.len() != rows * cols {
            return Err(invalid(format!(
                "codebook holds {} states, expected {}",
                states.len(),
                rows * cols
            )));
        }
        let k = 1u8 << bits;
        if let Some(bad) = states.iter().find(|&&s| s >= k) {
            return Err(invalid(format!("state {bad} out of range for {bits}-bit codebook")));
        }
        Ok(Self {
            rows,
            cols,
            bits,
            states,
        })
    }

    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        Self::filled(rows, cols, bits, 0)
    }

    pub fn filled(rows: usize, cols: usize, bits: u32, state: u8) -> Self {
        Self::new(rows, cols, bits, vec![state; rows * cols]).expect("valid filled codebook")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn num_states(&self) -> usize {
        1 << self.bits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Row-major state indices.
    pub fn states(&self) -> &[u8] {
        &self.states
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.states[row * self.cols + col]
    }

    pub fn set(&mut self, index: usize, state: u8) -> Result<()> {
        if state as usize >= self.num_states() {
            return Err(invalid("state out of range"));
        }
        self.states[index] = state;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1) + 32);
        writeln!(out, "bits={} rows={} cols={}", self.bits, self.rows, self.cols).unwrap();
        for row in self.states.chunks(self.cols) {
            out.extend(row.iter().map(|&s| char::from(b'0' + s)));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut all = parse_codebooks(text)?;
        match all.len() {
            1 => Ok(all.pop().unwrap()),
            n => Err(Error::Parse {
                line: 1,
                message: format!("expected one codebook, found {n}"),
            }),
        }
    }
}

/// Serialize several codebooks into one document.
pub fn codebooks_to_text(codebooks: &[PhaseCodebook]) -> String {
    codebooks.iter().map(PhaseCodebook::to_text).collect()
}

/// Parsed `key=value` header of a matrix block.
#[derive(Debug, Clone, Default)]
pub(crate) struct Header {
    pub fields: Vec<(String, String)>,
}

impl Header {
    pub fn parse(line: &str, line_no: usize) -> Result<Self> {
        let mut fields = Vec::new();
        for token in line.split_whitespace() {
            let (k, v) = token.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("malformed header field '{token}'"),
            })?;
            if fields.iter().any(|(key, _): &(String, String)| key == k) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate header field '{k}'"),
                });
            }
            fields.push((k.to_string(), v.to_string()));
        }
        Ok(Self { fields })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn usize(&self, key: &str, line: usize) -> Result<usize> {
        let raw = self.get(key).ok_or_else(|| Error::Parse {
            line,
            message: format!("missing header field '{key}'"),
        })?;
        raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("header field '{key}' is not a count: '{raw}'"),
        })
    }

    pub fn check_known(&self, known: &[&str], line: usize) -> Result<()> {
        for (k, _) in &self.fields {
            if !known.contains(&k.as_str()) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown header field '{k}'"),
                });
            }
        }
        Ok(())
    }
}

/// Significant lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_state_row(line: &str, expected: usize, bits: u32, line_no: usize) -> Result<Vec<u8>> {
    if line.chars().count() != expected {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected {expected} states, found {}", line.chars().count()),
        });
    }
    let k = 1u32 << bits;
    line.chars()
        .map(|ch| match ch.to_digit(10) {
            Some(d) if d < k => Ok(d as u8),
            _ => Err(Error::Parse {
                line: line_no,
                message: format!("invalid state character '{ch}' for {bits}-bit code"),
            }),
        })
        .collect()
}

/// Parse every codebook block in a document.
pub fn parse_codebooks(text: &str) -> Result<Vec<PhaseCodebook>> {
    let mut lines = content_lines(text).peekable();
    let mut out = Vec::new();
    while let Some((line_no, header_line)) = lines.next() {
        let header = Header::parse(header_line, line_no)?;
        header.check_known(&["bits", "rows", "cols"], line_no)?;
        let bits = header.usize("bits", line_no)? as u32;
        let rows = header.usize("rows", line_no)?;
        let cols = header.usize("cols", line_no)?;
        if !(1..=3).contains(&bits) || rows == 0 || cols == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "bits must be 1..=3 and dimensions nonzero".into(),
            });
        }
        let mut states = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (n, row) = lines.next().ok_or_else(|| Error::Parse {
                line: line_no + r + 1,
                message: format!("missing row {r} of {rows}"),
            })?;
            states.extend(parse_state_row(row, cols, bits, n)?);
        }
        out.push(PhaseCodebook::new(rows, cols, bits, states)?);
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no codebook found".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_layout() {
        let cb = PhaseCodebook::new(2, 3, 2, vec![0, 1, 2, 3, 2, 1]).unwrap();
        assert_eq!(cb.to_text(), "bits=2 rows=2 cols=3\n012\n321\n");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PhaseCodebook::new(1, 2, 1, vec![0, 2]).is_err());
        assert!(PhaseCodebook::new(1, 2, 4, vec![0, 1]).is_err());
        assert!(PhaseCodebook::new(1, 2, 1, vec![0]).is_err());
        let err = PhaseCodebook::from_text("bits=1 rows=1 cols=2\n02\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = PhaseCodebook::from_text("bits=1 rows=2 cols=2\n01\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(PhaseCodebook::from_text("bits=1 rows=1 cols=1 extra=2\n0\n").is_err());
        assert!(PhaseCodebook::from_text("").is_err());
    }

    #[test]
    fn multiple_blocks() {
        let a = PhaseCodebook::filled(1, 2, 1, 1);
        let b = PhaseCodebook::new(2, 1, 3, vec![7, 5]).unwrap();
        let text = format!("# two panels\n{}\n{}", a.to_text(), b.to_text());
        assert_eq!(parse_codebooks(&text).unwrap(), vec![a.clone(), b.clone()]);
        assert_eq!(codebooks_to_text(&[a.clone(), b.clone()]), format!("{}{}", a.to_text(), b.to_text()));
    }

    proptest! {
        #[test]
        fn round_trip(rows in 1usize..6, cols in 1usize..9, bits in 1u32..4, seed in any::<u64>()) {
            let k = 1u64 << bits;
            let states: Vec<u8> = (0..rows * cols)
                .map(|i| ((seed.rotate_left(i as u32 % 64) ^ i as u64) % k) as u8)
                .collect();
            let cb = PhaseCodebook::new(rows, cols, bits, states).unwrap();
            prop_assert_eq!(PhaseCodebook::from_text(&cb.to_text()).unwrap(), cb);
        }
    }
}
