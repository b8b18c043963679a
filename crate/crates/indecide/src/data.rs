//! CSV tables: calibration inputs, features, discrete joints, traces and
//! decisions.
//!
//! Every table has a mandatory header row. Numbers are parsed with the
//! standard float grammar; labels are positive integers.

use std::io::{Read, Write};

use indecide_core::calibration::{
    CalibrationSample, Decision, MlrSample, MulticlassSample, NpTraceRow, Trace,
};
use indecide_core::discrete::DiscreteJoint;

use crate::format::fmt_f64;
use crate::FormatError;

/// Raw table: header names and data rows with their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct Table {
    /// Column names.
    pub header: Vec<String>,
    /// `(line, fields)` per data row.
    pub rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    /// Reads a headed CSV table. Rows must all have the header's width.
    pub fn read(reader: impl Read) -> Result<Self, FormatError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(FormatError::schema(1, "missing header row"));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                FormatError::schema(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Self { header, rows })
    }

    /// Column index of `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Indices of `prefix1..prefixK` when the header holds exactly those
    /// columns plus the listed extras.
    fn numbered(&self, prefix: &str, extras: &[&str]) -> Option<Vec<usize>> {
        let mut idx = Vec::new();
        for k in 1.. {
            match self.column(&format!("{prefix}{k}")) {
                Some(i) => idx.push(i),
                None => break,
            }
        }
        let known = idx.len() + extras.iter().filter(|e| self.column(e).is_some()).count();
        (!idx.is_empty() && known == self.header.len()).then_some(idx)
    }

    fn expect_exact(&self, cols: &[&str]) -> Result<Vec<usize>, FormatError> {
        let found: Option<Vec<usize>> = cols.iter().map(|c| self.column(c)).collect();
        match found {
            Some(idx) if idx.len() == self.header.len() => Ok(idx),
            _ => Err(FormatError::schema(
                1,
                format!("expected columns `{}`, found `{}`", cols.join(","), self.header.join(",")),
            )),
        }
    }
}

fn number(line: u64, field: &str, col: &str) -> Result<f64, FormatError> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| FormatError::schema(line, format!("column `{col}`: `{field}` is not a number")))
}

fn binary_label(line: u64, field: &str) -> Result<u8, FormatError> {
    match field {
        "1" => Ok(1),
        "2" => Ok(2),
        _ => Err(FormatError::schema(line, format!("label must be 1 or 2, found `{field}`"))),
    }
}

fn class_label(line: u64, field: &str, classes: usize) -> Result<usize, FormatError> {
    field
        .parse::<usize>()
        .ok()
        .filter(|k| (1..=classes).contains(k))
        .map(|k| k - 1)
        .ok_or_else(|| FormatError::schema(line, format!("label must be in 1..={classes}, found `{field}`")))
}

/// Scores for applying a saved rule, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreTable {
    /// Column `score`: estimated class-1 posteriors.
    Eta(Vec<f64>),
    /// Column `x`: raw observations.
    Raw(Vec<f64>),
    /// Columns `s_1..s_K`.
    Vector(Vec<Vec<f64>>),
}

impl ScoreTable {
    /// Number of records.
    pub fn len(&self) -> usize {
        match self {
            ScoreTable::Eta(v) | ScoreTable::Raw(v) => v.len(),
            ScoreTable::Vector(v) => v.len(),
        }
    }

    /// Whether the table has no records.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads `score`, `x` or `s_1..s_K` columns; a `label` column is allowed and ignored.
pub fn read_scores(reader: impl Read) -> Result<ScoreTable, FormatError> {
    let t = Table::read(reader)?;
    let extras = usize::from(t.column("label").is_some());
    if let Some(idx) = t.numbered("s_", &["label"]) {
        let mut out = Vec::with_capacity(t.rows.len());
        for (line, row) in &t.rows {
            let v: Result<Vec<f64>, _> = idx.iter().map(|&i| number(*line, &row[i], &t.header[i])).collect();
            out.push(v?);
        }
        return Ok(ScoreTable::Vector(out));
    }
    for (name, raw) in [("score", false), ("x", true)] {
        if let Some(i) = t.column(name) {
            if t.header.len() != 1 + extras {
                break;
            }
            let v: Result<Vec<f64>, _> = t.rows.iter().map(|(line, row)| number(*line, &row[i], name)).collect();
            return Ok(if raw { ScoreTable::Raw(v?) } else { ScoreTable::Eta(v?) });
        }
    }
    Err(FormatError::schema(
        1,
        format!("expected `score`, `x` or `s_1..s_K` columns, found `{}`", t.header.join(",")),
    ))
}

fn scalar_with_labels(t: &Table, col: &str) -> Result<(Vec<f64>, Vec<u8>), FormatError> {
    let idx = t.expect_exact(&[col, "label"])?;
    let mut xs = Vec::with_capacity(t.rows.len());
    let mut ys = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        xs.push(number(*line, &row[idx[0]], col)?);
        ys.push(binary_label(*line, &row[idx[1]])?);
    }
    Ok((xs, ys))
}

/// Reads a binary calibration file with columns `score,label`.
pub fn read_binary(reader: impl Read) -> Result<CalibrationSample, FormatError> {
    let t = Table::read(reader)?;
    let (s, y) = scalar_with_labels(&t, "score")?;
    Ok(CalibrationSample::new(s, y)?)
}

/// Reads raw observations with columns `x,label`.
pub fn read_mlr(reader: impl Read) -> Result<MlrSample, FormatError> {
    let t = Table::read(reader)?;
    let (x, y) = scalar_with_labels(&t, "x")?;
    Ok(MlrSample::new(x, y)?)
}

/// Reads `s_1..s_K[,label]` score vectors.
pub fn read_multiclass(reader: impl Read) -> Result<MulticlassSample, FormatError> {
    let t = Table::read(reader)?;
    let idx = t
        .numbered("s_", &["label"])
        .ok_or_else(|| FormatError::schema(1, format!("expected `s_1..s_K[,label]`, found `{}`", t.header.join(","))))?;
    let label = t.column("label");
    let mut scores = Vec::with_capacity(t.rows.len());
    let mut labels = Vec::new();
    for (line, row) in &t.rows {
        let v: Result<Vec<f64>, _> = idx.iter().map(|&i| number(*line, &row[i], &t.header[i])).collect();
        scores.push(v?);
        if let Some(l) = label {
            labels.push(class_label(*line, &row[l], idx.len())?);
        }
    }
    Ok(MulticlassSample::new(scores, label.map(|_| labels))?)
}

/// Feature matrix with optional binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    /// One row per record.
    pub features: Vec<Vec<f64>>,
    /// Labels when the file has a `label` column.
    pub labels: Option<Vec<u8>>,
}

/// Reads `f_1..f_d[,label]`.
pub fn read_features(reader: impl Read) -> Result<FeatureTable, FormatError> {
    let t = Table::read(reader)?;
    let idx = t
        .numbered("f_", &["label"])
        .ok_or_else(|| FormatError::schema(1, format!("expected `f_1..f_d[,label]`, found `{}`", t.header.join(","))))?;
    let label = t.column("label");
    let mut features = Vec::with_capacity(t.rows.len());
    let mut labels = Vec::new();
    for (line, row) in &t.rows {
        let v: Result<Vec<f64>, _> = idx.iter().map(|&i| number(*line, &row[i], &t.header[i])).collect();
        features.push(v?);
        if let Some(l) = label {
            labels.push(binary_label(*line, &row[l])?);
        }
    }
    Ok(FeatureTable {
        features,
        labels: label.map(|_| labels),
    })
}

/// Reads a discrete joint with columns `id,w_1..w_K`.
pub fn read_joint(reader: impl Read) -> Result<DiscreteJoint, FormatError> {
    let t = Table::read(reader)?;
    let id_col = t.column("id");
    let idx = t
        .numbered("w_", &["id"])
        .filter(|_| id_col.is_some())
        .ok_or_else(|| FormatError::schema(1, format!("expected `id,w_1..w_K`, found `{}`", t.header.join(","))))?;
    let id_col = id_col.unwrap_or(0);
    let mut ids = Vec::with_capacity(t.rows.len());
    let mut rows = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        let id = row[id_col]
            .parse::<u64>()
            .map_err(|_| FormatError::schema(*line, format!("id must be a non-negative integer, found `{}`", row[id_col])))?;
        ids.push(id);
        let w: Result<Vec<f64>, _> = idx.iter().map(|&i| number(*line, &row[i], &t.header[i])).collect();
        rows.push(w?);
    }
    Ok(DiscreteJoint::with_ids(ids, rows)?)
}

/// Writes a discrete joint as `id,w_1..w_K`.
pub fn write_joint(joint: &DiscreteJoint, out: impl Write) -> Result<(), FormatError> {
    let mut w = writer(out);
    let mut header = vec!["id".to_string()];
    header.extend((1..=joint.classes()).map(|k| format!("w_{k}")));
    w.write_record(&header)?;
    for i in 0..joint.len() {
        let mut rec = vec![joint.id(i).to_string()];
        rec.extend(joint.weights(i).iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV writer with LF line endings.
pub fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes a calibration trace; degenerate cells leave their fields empty.
pub fn write_trace(trace: &Trace, out: impl Write) -> Result<(), FormatError> {
    let mut w = writer(out);
    match trace {
        Trace::None => {
            w.write_record(["note"])?;
        }
        Trace::Accuracy(rows) => {
            w.write_record(["rank", "tau", "decided", "errors", "risk", "running_min"])?;
            for r in rows {
                w.write_record([
                    r.rank.to_string(),
                    fmt_f64(r.tau),
                    r.decided.to_string(),
                    r.errors.to_string(),
                    fmt_f64(r.risk),
                    fmt_f64(r.running_min),
                ])?;
            }
        }
        Trace::Np(rows) => {
            w.write_record(["k", "gamma", "k_tilde", "tau1", "tau2", "type1", "type2", "abstained"])?;
            for r in rows {
                w.write_record(np_trace_record(r))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn np_trace_record(r: &NpTraceRow) -> [String; 8] {
    [
        r.k.to_string(),
        fmt_f64(r.gamma),
        r.k_tilde.to_string(),
        opt(r.rule.map(|x| x.tau1)),
        opt(r.rule.map(|x| x.tau2)),
        fmt_f64(r.type1),
        opt(r.type2),
        r.abstained.map(|a| a.to_string()).unwrap_or_default(),
    ]
}

/// Text of a decision cell.
pub fn decision_label(d: Decision) -> String {
    match d {
        Decision::Class(k) => k.to_string(),
        Decision::Abstain => "abstain".into(),
    }
}

/// Writes `index,decision` rows followed by a `#` summary line carrying the
/// abstention fraction.
pub fn write_decisions(decisions: &[Decision], out: impl Write) -> Result<(), FormatError> {
    let mut w = writer(out);
    w.write_record(["index", "decision"])?;
    for (i, &d) in decisions.iter().enumerate() {
        w.write_record([i.to_string(), decision_label(d)])?;
    }
    w.flush()?;
    let mut out = w.into_inner().map_err(|e| FormatError::Io(e.into_error()))?;
    let abstained = decisions.iter().filter(|d| **d == Decision::Abstain).count();
    let fraction = if decisions.is_empty() {
        0.0
    } else {
        abstained as f64 / decisions.len() as f64
    };
    writeln!(
        out,
        "# n={} abstained={abstained} abstention_fraction={}",
        decisions.len(),
        fmt_f64(fraction)
    )?;
    Ok(())
}
