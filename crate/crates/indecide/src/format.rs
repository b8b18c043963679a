//! Lossless float formatting and flat key-value documents.
//!
//! A document looks like
//!
//! ```text
//! # indecide report
//! format = indecide-report
//! version = 1
//! gamma_hat = 4.0000000000000002e-1
//! ```
//!
//! Keys are unique and keep their insertion order. Blank lines and lines
//! starting with `#` are ignored when parsing.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::FormatError;

/// Current version written into every document.
pub const DOC_VERSION: u32 = 1;

/// Formats a float with 17 significant digits (`inf`, `-inf`, `nan` for
/// non-finite values).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Parses a float written by [`fmt_f64`] or any standard decimal form.
pub fn parse_f64(s: &str) -> Option<f64> {
    f64::from_str(s.trim()).ok()
}

/// Ordered key-value document with a kind tag.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvDoc {
    kind: String,
    entries: Vec<(String, String)>,
}

impl KvDoc {
    /// Empty document of the given kind (`report`, `rule`, `model`, ...).
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            entries: Vec::new(),
        }
    }

    /// Document kind.
    pub fn kind(&self) -> &str {
        &self.kind
    }

    /// Appends or replaces a raw string value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.into(), value)),
        }
        self
    }

    /// Appends a float in the lossless format.
    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, fmt_f64(value))
    }

    /// Raw value of `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Required string value.
    pub fn require(&self, key: &str) -> Result<&str, FormatError> {
        self.get(key)
            .ok_or_else(|| FormatError::schema(0, format!("missing key `{key}` in {} document", self.kind)))
    }

    /// Required float value.
    pub fn require_f64(&self, key: &str) -> Result<f64, FormatError> {
        let raw = self.require(key)?;
        parse_f64(raw).ok_or_else(|| FormatError::schema(0, format!("key `{key}`: `{raw}` is not a number")))
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Serializes the document.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# indecide {}", self.kind);
        let _ = writeln!(out, "format = indecide-{}", self.kind);
        let _ = writeln!(out, "version = {DOC_VERSION}");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Parses a document, checking the format tag and version.
    pub fn parse(text: &str, expected_kind: &str) -> Result<Self, FormatError> {
        let mut doc = KvDoc::new(expected_kind);
        let mut format = None;
        let mut version = None;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| FormatError::schema(line_no, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(FormatError::schema(line_no, "empty key"));
            }
            match k {
                "format" => format = Some(v.to_string()),
                "version" => version = Some(v.to_string()),
                _ => {
                    if doc.get(k).is_some() {
                        return Err(FormatError::schema(line_no, format!("duplicate key `{k}`")));
                    }
                    doc.set(k, v);
                }
            }
        }
        let want = format!("indecide-{expected_kind}");
        if format.as_deref() != Some(want.as_str()) {
            return Err(FormatError::schema(
                0,
                format!("expected `format = {want}`, found {:?}", format.unwrap_or_default()),
            ));
        }
        if version.as_deref() != Some(DOC_VERSION.to_string().as_str()) {
            return Err(FormatError::schema(0, format!("unsupported version {version:?}")));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, f64::INFINITY, f64::NEG_INFINITY] {
            assert_eq!(parse_f64(&fmt_f64(v)), Some(v));
        }
        assert!(parse_f64(&fmt_f64(f64::NAN)).unwrap().is_nan());
        assert_eq!(fmt_f64(0.8), "8.0000000000000004e-1");
    }

    #[test]
    fn document_round_trip() {
        let mut doc = KvDoc::new("rule");
        doc.set("rule", "selective").set_f64("tau", 0.8);
        let back = KvDoc::parse(&doc.render(), "rule").unwrap();
        assert_eq!(back, doc);
        assert!(KvDoc::parse(&doc.render(), "report").is_err());
        assert!(KvDoc::parse("format = indecide-rule\nversion = 1\nbroken\n", "rule").is_err());
    }
}
