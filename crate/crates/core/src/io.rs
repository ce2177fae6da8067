//! Flat-file formats: trajectory CSV (`trial,x,error,p`) and family CSV
//! (`k_ref` line followed by `e,f,g` rows).
//!
//! Floats are written with Rust's shortest round-trip representation, so a
//! written trajectory reads back bit-identical.

use std::fmt::Write as _;
use std::io::Read;

use crate::analysis::{FamilyPoint, GeneralLinearFamily, UniquenessVerdict};
use crate::error::{Error, Result};
use crate::fitting::Observation;
use crate::paradigm::{Paradigm, Trajectory, TrialRecord};

pub const TRAJECTORY_HEADER: [&str; 4] = ["trial", "x", "error", "p"];
pub const FAMILY_HEADER: [&str; 3] = ["e", "f", "g"];

/// Shortest round-trip decimal, always with a fractional part or exponent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = TRAJECTORY_HEADER.join(",");
    out.push('\n');
    for r in &traj.records {
        let _ = writeln!(out, "{},{:?},{:?},{:?}", r.n, r.x, r.e, r.p);
    }
    out
}

fn parse_f64(field: &str, what: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` is not a number ({what})")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("line {line}: {what} must be finite")));
    }
    Ok(v)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads trajectory records, checking the header and the trial numbering.
pub fn read_trajectory_records(reader: impl Read) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("trajectory header: {e}")))?;
    if header.iter().map(str::trim).ne(TRAJECTORY_HEADER) {
        return Err(Error::Parse(format!(
            "trajectory header must be `{}`, got `{}`",
            TRAJECTORY_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse(format!("trajectory: {e}")))?;
        let line = line_of(&row);
        let n: usize = row[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad trial index `{}`", &row[0])))?;
        if n != records.len() {
            return Err(Error::Parse(format!(
                "line {line}: trial index {n}, expected {}",
                records.len()
            )));
        }
        records.push(TrialRecord {
            n,
            x: parse_f64(&row[1], "x", line)?,
            e: parse_f64(&row[2], "error", line)?,
            p: parse_f64(&row[3], "p", line)?,
        });
    }
    if records.len() < 2 {
        return Err(Error::Parse("trajectory needs at least two rows".into()));
    }
    Ok(records)
}

/// Recovers the paradigm from the error column: constant error is a clamp
/// (zero error is washout), otherwise `error + x` must be a constant target.
pub fn infer_paradigm(records: &[TrialRecord]) -> Result<Paradigm> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    if records.iter().all(|r| r.e == first.e) {
        return Ok(if first.e == 0.0 {
            Paradigm::Washout
        } else {
            Paradigm::Ticvf { e_clamp: first.e }
        });
    }
    let target = first.e + first.x;
    let tol = 1e-9 * target.abs().max(1.0);
    if records.iter().all(|r| (r.e + r.x - target).abs() <= tol) {
        return Ok(Paradigm::Vmr { target });
    }
    Err(Error::InvalidInput(
        "error column is neither constant nor target - x".into(),
    ))
}

pub fn read_observation(reader: impl Read) -> Result<Observation> {
    let records = read_trajectory_records(reader)?;
    let paradigm = infer_paradigm(&records)?;
    Observation::new(paradigm, records.iter().map(|r| r.x).collect())
}

pub fn read_family(reader: impl Read) -> Result<GeneralLinearFamily> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = rdr.records();
    let mut next = |what: &str| -> Result<csv::StringRecord> {
        rows.next()
            .ok_or_else(|| Error::Parse(format!("family file ends before {what}")))?
            .map_err(|e| Error::Parse(format!("family file: {e}")))
    };

    let k_line = next("the k_ref line")?;
    if k_line.len() != 2 || k_line[0].trim() != "k_ref" {
        return Err(Error::Parse(format!(
            "line {}: first line must be `k_ref,<value>`",
            line_of(&k_line)
        )));
    }
    let k_ref = parse_f64(&k_line[1], "k_ref", line_of(&k_line))?;

    let header = next("the e,f,g header")?;
    if header.iter().map(str::trim).ne(FAMILY_HEADER) {
        return Err(Error::Parse(format!(
            "line {}: expected header `e,f,g`",
            line_of(&header)
        )));
    }

    let mut points = Vec::new();
    for row in rows {
        let row = row.map_err(|e| Error::Parse(format!("family file: {e}")))?;
        let line = line_of(&row);
        if row.len() != 3 {
            return Err(Error::Parse(format!("line {line}: expected 3 fields")));
        }
        points.push(FamilyPoint {
            e: parse_f64(&row[0], "e", line)?,
            f: parse_f64(&row[1], "f", line)?,
            g: parse_f64(&row[2], "g", line)?,
        });
    }
    GeneralLinearFamily::new(points, k_ref)
}

pub fn family_to_csv(family: &GeneralLinearFamily) -> String {
    let mut out = format!("k_ref,{:?}\n{}\n", family.k_ref(), FAMILY_HEADER.join(","));
    for p in family.points() {
        let _ = writeln!(out, "{:?},{:?},{:?}", p.e, p.f, p.g);
    }
    out
}

/// Per-point residual table for a uniqueness verdict.
pub fn residuals_to_csv(verdict: &UniquenessVerdict) -> String {
    let mut out = String::from("e,f,g,residual,asymptote,relation_holds,asymptote_at_k,pass\n");
    for p in &verdict.points {
        let asymptote = p.asymptote.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{},{},{},{}",
            p.e,
            p.f,
            p.g,
            p.residual,
            asymptote,
            p.relation_holds,
            p.asymptote_at_k,
            p.passes()
        );
    }
    out
}
