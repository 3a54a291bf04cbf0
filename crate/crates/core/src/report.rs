//! CSV reports preceded by a comment block identifying the input.

use std::io::{self, Write};

use sha2::{Digest, Sha256};

use crate::VERSION;

/// Identification written at the top of every report.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub input_sha256: String,
    pub seed: u64,
    /// Extra `key: value` lines.
    pub notes: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str, input: &[u8], seed: u64) -> Self {
        Self {
            command: command.into(),
            input_sha256: sha256_hex(input),
            seed,
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# sandwich-forms {VERSION}")?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# input-sha256: {}", self.input_sha256)?;
        writeln!(out, "# seed: {}", self.seed)?;
        for (k, v) in &self.notes {
            writeln!(out, "# {k}: {v}")?;
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A report: header plus one CSV table.
#[derive(Debug, Clone)]
pub struct Report {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(header: Header, columns: &[&str]) -> Self {
        Self {
            header,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows
            .push(fields.into_iter().map(|f| f.to_string()).collect());
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        self.header.write(&mut out)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8_lossy(&buf).into_owned()
    }
}

/// Shortest round-trip decimal form of a float.
pub fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let mut h = Header::new("spectrum", b"abc", 7);
        h.note("form", "graph");
        let mut r = Report::new(h, &["k", "eigenvalue"]);
        r.row(["1", &num(0.5)]);
        let text = r.to_string_lossy();
        assert!(text.starts_with("# sandwich-forms "));
        assert!(text.contains(
            "# input-sha256: ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        ));
        assert!(text.contains("# seed: 7\n# form: graph\nk,eigenvalue\n1,0.5\n"));
    }
}
