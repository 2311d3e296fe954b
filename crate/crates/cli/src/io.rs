//! Argument parsing helpers, exit-code mapping and file formats.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use qisg::bspline::level_size;
use qisg::dyadic::{Coord, GridPoint};
use qisg::{Error, QIScheme};

use crate::{OutputArgs, SchemeArgs};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage = 1,
    Scheme = 2,
    Samples = 3,
    Fit = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::InvalidMask(_)
            | Error::NotAQuasiInterpolant(_)
            | Error::InvalidOrder(_)
            | Error::NotDivisible { .. }
            | Error::DivisionByZero
            | Error::Parse(_) => Kind::Scheme,
            Error::MissingSamples { .. } => Kind::Samples,
            Error::DegenerateFit(_) => Kind::Fit,
            _ => Kind::Usage,
        };
        let mut message = e.to_string();
        if let Error::MissingSamples { points } = &e {
            for p in points {
                let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                message += &format!("\n  missing {}", coords.join(","));
            }
        }
        Self { kind, message }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// `LO..HI` or `LO..=HI`, both inclusive.
pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got '{s}'"))?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: u32 = lo.trim().parse().map_err(|_| format!("bad lower level '{lo}'"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("bad upper level '{hi}'"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// A norm exponent: a number ≥ 1, or `inf`.
pub fn parse_exponent(s: &str) -> Result<f64, String> {
    let v = match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|_| format!("bad exponent '{s}'"))?,
    };
    if !(v >= 1.0) {
        return Err(format!("exponent must be ≥ 1 or inf, got {s}"));
    }
    Ok(v)
}

pub fn load_scheme(args: &SchemeArgs) -> CliResult<QIScheme> {
    let scheme = if let Some(path) = &args.mask {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::new(Kind::Scheme, format!("cannot read mask {}: {e}", path.display())))?;
        QIScheme::from_mask_json(&text)?
    } else if let Some(name) = &args.builtin {
        QIScheme::builtin(name)?
    } else {
        match args.ell {
            None | Some(4) => QIScheme::builtin("cubic")?,
            Some(2) => QIScheme::builtin("faber")?,
            Some(ell) => {
                return Err(Failure::new(Kind::Usage, format!("no builtin scheme of order {ell}; pass --mask")));
            }
        }
    };
    if let Some(ell) = args.ell {
        if ell != scheme.ell() {
            return Err(Failure::new(
                Kind::Scheme,
                format!("--ell {ell} does not match scheme '{}' of order {}", scheme.name(), scheme.ell()),
            ));
        }
    }
    for w in scheme.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(scheme)
}

fn csv_reader(path: &Path, kind: Kind) -> CliResult<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::new(kind, format!("cannot read {}: {e}", path.display())))
}

fn parse_row(record: &csv::StringRecord, width: usize, line: usize, kind: Kind) -> CliResult<Vec<f64>> {
    if record.len() != width {
        return Err(Failure::new(kind, format!("line {line}: expected {width} columns, got {}", record.len())));
    }
    record
        .iter()
        .map(|v| v.parse::<f64>().map_err(|_| Failure::new(kind, format!("line {line}: bad number '{v}'"))))
        .collect()
}

/// Reads `x_1,..,x_d,value` rows, snapping coordinates onto the finest
/// lattice of level `m`. Rows off that lattice are skipped and counted.
pub fn read_samples(path: &Path, d: usize, m: u32, ell: u32) -> CliResult<(HashMap<GridPoint, f64>, usize)> {
    let den = level_size(ell, m) as u64;
    let mut values = HashMap::new();
    let mut skipped = 0;
    for (i, record) in csv_reader(path, Kind::Samples)?.records().enumerate() {
        let record = record.map_err(|e| Failure::new(Kind::Samples, e.to_string()))?;
        let row = parse_row(&record, d + 1, i + 2, Kind::Samples)?;
        let point: Option<GridPoint> = row[..d].iter().map(|&x| Coord::snap(x, den, 1e-9)).collect();
        match point {
            Some(p) => {
                values.insert(p, row[d]);
            }
            None => skipped += 1,
        }
    }
    Ok((values, skipped))
}

/// Reads `x_1,..,x_d` rows.
pub fn read_points(path: &Path, d: usize) -> CliResult<Vec<Vec<f64>>> {
    csv_reader(path, Kind::Usage)?
        .records()
        .enumerate()
        .map(|(i, record)| {
            let record = record.map_err(|e| Failure::new(Kind::Usage, e.to_string()))?;
            parse_row(&record, d, i + 2, Kind::Usage)
        })
        .collect()
}

/// `x_1,..,x_d,<name>` CSV text.
pub fn points_csv(points: &[Vec<f64>], values: &[f64], name: &str) -> String {
    let d = points.first().map_or(0, |p| p.len());
    let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    header.push(name.into());
    let mut out = header.join(",") + "\n";
    for (p, v) in points.iter().zip(values) {
        let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        row.push(format!("{v:e}"));
        out += &row.join(",");
        out.push('\n');
    }
    out
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

/// Writes `files` under `--out`, creating the directory first.
pub fn write_outputs(output: &OutputArgs, files: &[(&str, String)]) -> CliResult<()> {
    let Some(dir) = &output.out else {
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|e| Failure::new(Kind::Usage, format!("cannot create {}: {e}", dir.display())))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| Failure::new(Kind::Usage, format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
