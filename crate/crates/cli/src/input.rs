//! CSV readers for forecast archives (`p,y`) and daily series (`day,temp`).

use std::fs::File;
use std::path::Path;

use brier_core::ar1::DailySeries;
use brier_core::ForecastSeries;

use crate::error::{CliError, CliResult};

fn open(path: &Path, header: [&str; 2]) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::input(path, e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| CliError::input(path, format!("line 1: {e}")))?
        .clone();
    if found.len() != 2 || found.get(0) != Some(header[0]) || found.get(1) != Some(header[1]) {
        return Err(CliError::input(
            path,
            format!(
                "line 1: expected header `{},{}`, found `{}`",
                header[0],
                header[1],
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(reader)
}

/// Yields `(line, first, second)` for every data row.
fn rows(path: &Path, header: [&str; 2]) -> CliResult<Vec<(u64, String, String)>> {
    let mut reader = open(path, header)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::input(path, format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(CliError::input(
                path,
                format!("line {line}: expected 2 fields, found {}", record.len()),
            ));
        }
        out.push((line, record[0].to_string(), record[1].to_string()));
    }
    if out.is_empty() {
        return Err(CliError::input(path, "no data rows"));
    }
    Ok(out)
}

fn number(path: &Path, line: u64, name: &str, text: &str) -> CliResult<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::input(
            path,
            format!("line {line}: {name} `{text}` is not a finite number"),
        )),
    }
}

pub fn read_forecasts(path: &Path) -> CliResult<ForecastSeries> {
    let mut p = Vec::new();
    let mut y = Vec::new();
    for (line, ptext, ytext) in rows(path, ["p", "y"])? {
        let prob = number(path, line, "p", &ptext)?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(CliError::input(
                path,
                format!("line {line}: p = {prob} is outside [0, 1]"),
            ));
        }
        let v = number(path, line, "y", &ytext)?;
        if v != 0.0 && v != 1.0 {
            return Err(CliError::input(
                path,
                format!("line {line}: y = {v} is not 0 or 1"),
            ));
        }
        let outcome = v == 1.0;
        p.push(prob);
        y.push(outcome);
    }
    Ok(ForecastSeries::new(p, y)?)
}

pub fn read_daily(path: &Path) -> CliResult<DailySeries> {
    let mut days: Vec<i64> = Vec::new();
    let mut temps = Vec::new();
    for (line, dtext, ttext) in rows(path, ["day", "temp"])? {
        let day: i64 = dtext.parse().map_err(|_| {
            CliError::input(
                path,
                format!("line {line}: day `{dtext}` is not an integer"),
            )
        })?;
        if let Some(&prev) = days.last() {
            if day <= prev {
                return Err(CliError::input(
                    path,
                    format!("line {line}: day {day} does not follow day {prev}"),
                ));
            }
        }
        days.push(day);
        temps.push(number(path, line, "temp", &ttext)?);
    }
    Ok(DailySeries::new(days, temps)?)
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_thresholds(text: &str) -> CliResult<Vec<f64>> {
    let bad = |msg: String| CliError::Usage(format!("--thresholds: {msg}"));
    let parse = |s: &str| -> CliResult<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("`{s}` is not a finite number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("ranges take the form start:stop:step".into()));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(bad("range needs step > 0 and stop >= start".into()));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(bad(format!("range has {count} values")));
        }
        Ok((0..count).map(|k| start + k as f64 * step).collect())
    } else {
        text.split(',').map(parse).collect()
    }
}

pub fn parse_list(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("{flag}: `{s}` is not a finite number")))
        })
        .collect()
}
