//! CSV dataset format.
//!
//! Header required. Columns `f0..f{d-1}` (reals), `group` (`T`/`C`),
//! `y_obs` (`-1`/`1`), optional `y_t`, `y_c`, `ratio`. Any other column is
//! rejected unless its name starts with `meta_`, in which case it is ignored.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::domain::{Dataset, Group, Unit};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
struct Layout {
    features: Vec<usize>,
    group: Option<usize>,
    y_obs: Option<usize>,
    y_t: Option<usize>,
    y_c: Option<usize>,
    ratio: Option<usize>,
}

fn layout(headers: &csv::StringRecord) -> Result<Layout> {
    let mut out = Layout::default();
    let mut features: Vec<(usize, usize)> = Vec::new();
    for (col, name) in headers.iter().enumerate() {
        let name = name.trim();
        let slot = match name {
            "group" => &mut out.group,
            "y_obs" => &mut out.y_obs,
            "y_t" => &mut out.y_t,
            "y_c" => &mut out.y_c,
            "ratio" => &mut out.ratio,
            _ if name.starts_with("meta_") => continue,
            _ => {
                let k = name
                    .strip_prefix('f')
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown column `{name}`")))?;
                features.push((k, col));
                continue;
            }
        };
        if slot.replace(col).is_some() {
            return Err(Error::Parse(format!("duplicate column `{name}`")));
        }
    }
    features.sort_unstable();
    for (expected, &(k, _)) in features.iter().enumerate() {
        if k != expected {
            return Err(Error::Parse(format!(
                "feature columns must be f0..f{{d-1}} without gaps; found f{k} where f{expected} was expected"
            )));
        }
    }
    out.features = features.into_iter().map(|(_, c)| c).collect();
    if out.group.is_none() || out.y_obs.is_none() {
        return Err(Error::Parse("columns `group` and `y_obs` are required".into()));
    }
    Ok(out)
}

fn parse_label(s: &str, line: usize, name: &str) -> Result<i8> {
    match s.trim() {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        other => Err(Error::Parse(format!(
            "line {line}: {name} must be -1 or 1, got `{other}`"
        ))),
    }
}

fn optional<'a>(rec: &'a csv::StringRecord, col: Option<usize>) -> Option<&'a str> {
    col.and_then(|c| rec.get(c))
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

/// Parses a dataset from CSV text.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let layout = layout(rdr.headers()?)?;
    let mut units = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let features = layout
            .features
            .iter()
            .map(|&c| {
                rec[c].trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {line}: bad feature value `{}`: {e}", &rec[c]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let group = match rec[layout.group.unwrap()].trim() {
            "T" => Group::Treatment,
            "C" => Group::Control,
            other => {
                return Err(Error::Parse(format!(
                    "line {line}: group must be T or C, got `{other}`"
                )))
            }
        };
        let y_obs = parse_label(&rec[layout.y_obs.unwrap()], line, "y_obs")?;
        let mut unit = Unit::new(features, group, y_obs);
        unit.y_t = optional(&rec, layout.y_t)
            .map(|s| parse_label(s, line, "y_t"))
            .transpose()?;
        unit.y_c = optional(&rec, layout.y_c)
            .map(|s| parse_label(s, line, "y_c"))
            .transpose()?;
        unit.ratio = optional(&rec, layout.ratio)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {line}: bad ratio `{s}`: {e}")))
            })
            .transpose()?;
        units.push(unit);
    }
    Ok(Dataset::new(units))
}

pub fn read_dataset_file(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(File::open(path)?)
}

/// Writes a dataset in canonical order. Optional columns are emitted only
/// when at least one unit carries the value.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let units = dataset.units();
    let has_t = units.iter().any(|u| u.y_t.is_some());
    let has_c = units.iter().any(|u| u.y_c.is_some());
    let has_ratio = units.iter().any(|u| u.ratio.is_some());

    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..dataset.dim()).map(|k| format!("f{k}")).collect();
    header.push("group".into());
    header.push("y_obs".into());
    if has_t {
        header.push("y_t".into());
    }
    if has_c {
        header.push("y_c".into());
    }
    if has_ratio {
        header.push("ratio".into());
    }
    wtr.write_record(&header)?;

    let opt_label = |y: Option<i8>| y.map(|v| v.to_string()).unwrap_or_default();
    for u in units {
        let mut rec: Vec<String> = u.features.iter().map(|v| format!("{v:?}")).collect();
        rec.push(u.group.as_str().into());
        rec.push(u.y_obs.to_string());
        if has_t {
            rec.push(opt_label(u.y_t));
        }
        if has_c {
            rec.push(opt_label(u.y_c));
        }
        if has_ratio {
            rec.push(u.ratio.map(|r| format!("{r:?}")).unwrap_or_default());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_dataset_file(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(dataset, File::create(path)?)
}
