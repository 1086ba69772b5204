//! Report serialization: JSON with 17-significant-digit numerics (so every
//! f64 round-trips exactly) and the fixed-header CSV formats.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use normsol::radial_domain::RadialFunction;

use crate::CliError;

struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serialize with 17 significant digits on all floats.
pub fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| CliError::Io(format!("non-utf8 report: {e}")))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    write_text(path, &to_json(value)?)
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Profile CSV with the fixed header `r,u`.
pub fn write_profile_csv(path: &Path, u: &RadialFunction) -> Result<(), CliError> {
    let mut text = String::from("r,u\n");
    for (&r, &v) in u.grid().nodes().iter().zip(u.values()) {
        text.push_str(&format!("{r:.16e},{v:.16e}\n"));
    }
    write_text(path, &text)
}

/// Read a profile CSV written by [`write_profile_csv`] (or hand-made with
/// the same columns).
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut rs = Vec::new();
    let mut us = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && line.trim().starts_with('r') {
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(r), Some(u)) = (cols.next(), cols.next()) else {
            return Err(CliError::Io(format!(
                "{}:{}: expected two comma-separated columns",
                path.display(),
                lineno + 1
            )));
        };
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim().parse().map_err(|_| {
                CliError::Io(format!(
                    "{}:{}: cannot parse '{s}' as a number",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        rs.push(parse(r)?);
        us.push(parse(u)?);
    }
    Ok((rs, us))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_serialize_with_17_digits_and_round_trip() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let x = 0.1 + 0.2;
        let json = to_json(&S { x }).unwrap();
        assert!(json.contains("e"), "scientific notation expected: {json}");
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), x.to_bits());
    }
}
