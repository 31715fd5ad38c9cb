use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::table::{Particle, ReferenceTable};
use crate::error::{Error, Result};

pub const PARAM_PREFIX: &str = "param:";
pub const STAT_PREFIX: &str = "stat:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Tab,
    /// Runs of spaces or tabs, as in diyabc text exports.
    Whitespace,
}

impl Delimiter {
    fn for_path(path: &Path) -> Delimiter {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => Delimiter::Tab,
            Some("txt") => Delimiter::Whitespace,
            _ => Delimiter::Comma,
        }
    }
}

/// Which columns of a file hold parameters and which hold statistics.
///
/// The default reads `param:`/`stat:` prefixed headers. An explicit
/// mapping lists column names for foreign files; unlisted columns are
/// ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    #[serde(default)]
    pub params: Option<Vec<String>>,
    #[serde(default)]
    pub stats: Option<Vec<String>>,
    #[serde(default)]
    pub delimiter: Option<Delimiter>,
}

type Columns = Vec<(usize, String)>;

impl ColumnSchema {
    pub fn prefixed() -> Self {
        ColumnSchema::default()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let schema: ColumnSchema = serde_json::from_reader(BufReader::new(file))?;
        if schema.params.is_some() != schema.stats.is_some() {
            return Err(Error::Schema(
                "schema must list both `params` and `stats`, or neither".into(),
            ));
        }
        Ok(schema)
    }

    /// Resolve header positions: (param columns, stat columns), with names.
    fn resolve(&self, header: &[String]) -> Result<(Columns, Columns)> {
        let find = |name: &str| -> Result<usize> {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
        };
        match (&self.params, &self.stats) {
            (Some(params), Some(stats)) => {
                let p = params
                    .iter()
                    .map(|n| find(n).map(|i| (i, n.clone())))
                    .collect::<Result<Vec<_>>>()?;
                let s = stats
                    .iter()
                    .map(|n| find(n).map(|i| (i, n.clone())))
                    .collect::<Result<Vec<_>>>()?;
                if s.is_empty() {
                    return Err(Error::Schema("no statistic columns".into()));
                }
                Ok((p, s))
            }
            _ => {
                let tagged = |prefix: &str| -> Vec<(usize, String)> {
                    header
                        .iter()
                        .enumerate()
                        .filter_map(|(i, h)| h.strip_prefix(prefix).map(|n| (i, n.to_string())))
                        .collect()
                };
                let s = tagged(STAT_PREFIX);
                if s.is_empty() {
                    return Err(Error::Schema(format!(
                        "no `{STAT_PREFIX}` columns in header"
                    )));
                }
                Ok((tagged(PARAM_PREFIX), s))
            }
        }
    }
}

fn read_records(path: &Path, delimiter: Delimiter) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match delimiter {
        Delimiter::Whitespace => {
            let mut lines = BufReader::new(file).lines();
            let header = loop {
                match lines.next() {
                    Some(line) => {
                        let line = line.map_err(|e| Error::io(path, e))?;
                        if !line.trim().is_empty() {
                            break line.split_whitespace().map(str::to_string).collect();
                        }
                    }
                    None => return Err(Error::Schema("file has no header".into())),
                }
            };
            let mut rows = Vec::new();
            for line in lines {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                rows.push(line.split_whitespace().map(str::to_string).collect());
            }
            Ok((header, rows))
        }
        Delimiter::Comma | Delimiter::Tab => {
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(if delimiter == Delimiter::Tab { b'\t' } else { b',' })
                .trim(csv::Trim::All)
                .from_reader(BufReader::new(file));
            let header = reader.headers()?.iter().map(str::to_string).collect();
            let mut rows = Vec::new();
            for record in reader.records() {
                rows.push(record?.iter().map(str::to_string).collect());
            }
            Ok((header, rows))
        }
    }
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    let value: f64 = raw.parse().map_err(|_| Error::Validation {
        row,
        column: column.to_string(),
        message: format!("not a number: `{raw}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::Validation {
            row,
            column: column.to_string(),
            message: format!("non-finite value `{raw}`"),
        });
    }
    Ok(value)
}

/// Load observed summary vectors, one per data row. Columns are matched
/// to `stat_names` by name, with or without the `stat:` prefix; other
/// columns are ignored.
pub fn load_observations(
    path: impl AsRef<Path>,
    schema: &ColumnSchema,
    stat_names: &[String],
) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let delimiter = schema.delimiter.unwrap_or_else(|| Delimiter::for_path(path));
    let (header, rows) = read_records(path, delimiter)?;
    let cols = stat_names
        .iter()
        .map(|name| {
            let prefixed = format!("{STAT_PREFIX}{name}");
            header
                .iter()
                .position(|h| h == name || *h == prefixed)
                .ok_or_else(|| Error::Schema(format!("{}: missing column `{name}`", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    rows.iter()
        .enumerate()
        .map(|(i, record)| {
            if record.len() != header.len() {
                return Err(Error::Validation {
                    row: i + 1,
                    column: "*".into(),
                    message: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            cols.iter()
                .map(|&c| parse_cell(&record[c], i + 1, &header[c]))
                .collect()
        })
        .collect()
}

/// Load a reference table. Row order equals file order; data rows are
/// numbered from 1 in diagnostics.
pub fn load_reference_table(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<ReferenceTable> {
    let path = path.as_ref();
    let delimiter = schema.delimiter.unwrap_or_else(|| Delimiter::for_path(path));
    let (header, rows) = read_records(path, delimiter)?;
    let (param_cols, stat_cols) = schema.resolve(&header)?;
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut particles = Vec::with_capacity(rows.len());
    for (i, record) in rows.iter().enumerate() {
        let row = i + 1;
        if record.len() != header.len() {
            return Err(Error::Validation {
                row,
                column: "*".into(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let params = param_cols
            .iter()
            .map(|(c, _)| parse_cell(&record[*c], row, &header[*c]))
            .collect::<Result<Vec<_>>>()?;
        let summaries = stat_cols
            .iter()
            .map(|(c, _)| parse_cell(&record[*c], row, &header[*c]))
            .collect::<Result<Vec<_>>>()?;
        particles.push(Particle::new(params, summaries));
    }
    ReferenceTable::new(
        param_cols.into_iter().map(|(_, n)| n).collect(),
        stat_cols.into_iter().map(|(_, n)| n).collect(),
        particles,
    )
}

/// Write a table in the prefixed CSV format, optionally with a leading
/// `id` column holding the row ids.
pub fn write_reference_table(path: impl AsRef<Path>, table: &ReferenceTable, with_id: bool) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let mut header: Vec<String> = Vec::new();
    if with_id {
        header.push("id".into());
    }
    header.extend(table.param_names().iter().map(|n| format!("{PARAM_PREFIX}{n}")));
    header.extend(table.stat_names().iter().map(|n| format!("{STAT_PREFIX}{n}")));
    writer.write_record(&header)?;
    for (particle, id) in table.particles().iter().zip(table.ids()) {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if with_id {
            record.push(id.to_string());
        }
        record.extend(particle.params.iter().map(|v| format_float(*v)));
        record.extend(particle.summaries.iter().map(|v| format_float(*v)));
        writer.write_record(&record)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the same bits.
pub(crate) fn format_float(v: f64) -> String {
    format!("{v:?}")
}
