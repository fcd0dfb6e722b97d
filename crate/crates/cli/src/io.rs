//! CSV ingestion of observations and emission of profiles. Every file is
//! written to a temporary sibling first and renamed into place, so a failed
//! run never leaves a partial output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use levy_exit::{ObservationSet, Profile, ProfileKind, TargetSet};

use crate::CliError;

/// Seventeen significant digits: enough to round-trip any `f64` bitwise.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Renders `x,value[,stderr]` rows in ascending `x`. The third column appears
/// when the profile carries standard errors; undefined ones are left empty.
pub fn render_profile(profile: &Profile) -> String {
    let mut order: Vec<usize> = (0..profile.len()).collect();
    order.sort_by(|&i, &j| profile.xs[i].total_cmp(&profile.xs[j]));
    let mut out = String::from(if profile.std_errors.is_some() { "x,value,stderr\n" } else { "x,value\n" });
    for i in order {
        out.push_str(&fmt_f64(profile.xs[i]));
        out.push(',');
        out.push_str(&fmt_f64(profile.values[i]));
        if let Some(se) = &profile.std_errors {
            out.push(',');
            if let Some(s) = se[i] {
                out.push_str(&fmt_f64(s));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_profile(profile: &Profile, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &render_profile(profile))
}

/// Renders a table with a header row; every value in full precision.
pub fn render_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn parse_cell(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// Reads a `x,value` CSV (an optional third `stderr` column is ignored).
/// Rows are sorted by `x`; duplicates, malformed rows and, for escape
/// probabilities, values outside `[0, 1]` are rejected with the line number.
pub fn read_observations(path: &Path, kind: ProfileKind, target: Option<TargetSet>) -> Result<ObservationSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |line: u64, msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(bad(1, e.to_string())),
        None => return Err(bad(1, "empty file, expected header `x,value`".into())),
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if !(names.len() >= 2 && names[0] == "x" && names[1] == "value" && names[2..].iter().all(|n| *n == "stderr")) || names.len() > 3 {
        return Err(bad(1, format!("expected header `x,value`, found `{}`", names.join(","))));
    }

    let mut rows: Vec<(f64, f64, u64)> = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if rec.len() < 2 || rec.len() > names.len() {
            return Err(bad(line, format!("expected {} columns, found {}", names.len(), rec.len())));
        }
        let cell = |i: usize, what: &str| {
            parse_cell(&rec[i])
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(line, format!("malformed {what} `{}`", rec[i].trim())))
        };
        let (x, v) = (cell(0, "x")?, cell(1, "value")?);
        if kind == ProfileKind::EscapeProbability && !(0.0..=1.0).contains(&v) {
            return Err(bad(line, format!("escape probability {v} is outside [0, 1]")));
        }
        rows.push((x, v, line));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        let (first, second) = if w[0].2 < w[1].2 { (w[0].2, w[1].2) } else { (w[1].2, w[0].2) };
        return Err(bad(second, format!("duplicate x = {} (first on line {first})", w[0].0)));
    }
    let (xs, values) = rows.into_iter().map(|(x, v, _)| (x, v)).unzip();
    ObservationSet::new(kind, xs, values, target).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Reads starting points: one number per line, blank lines, `#` comments and
/// an optional `x` header allowed.
pub fn read_points(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        let t = t.split(',').next().unwrap_or("").trim();
        if t.is_empty() || (i == 0 && t == "x") {
            continue;
        }
        match parse_cell(t).filter(|v| v.is_finite()) {
            Some(v) => xs.push(v),
            None => return Err(CliError::Usage(format!("{}:{}: malformed point `{t}`", path.display(), i + 1))),
        }
    }
    if xs.is_empty() {
        return Err(CliError::Usage(format!("{}: no starting points", path.display())));
    }
    Ok(xs)
}
