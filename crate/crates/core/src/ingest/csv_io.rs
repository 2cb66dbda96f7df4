use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::ingest::frame::{Column, ColumnData, Frame, FrameStage};
use crate::ingest::schema::{ColumnKind, Schema};

enum Builder {
    Numeric(Vec<f64>),
    Labels {
        levels: Vec<String>,
        index: HashMap<String, u32>,
        codes: Vec<u32>,
    },
}

impl Builder {
    fn push_label(&mut self, cell: &str) {
        if let Builder::Labels {
            levels,
            index,
            codes,
        } = self
        {
            let code = match index.get(cell) {
                Some(&c) => c,
                None => {
                    let c = levels.len() as u32;
                    levels.push(cell.to_string());
                    index.insert(cell.to_string(), c);
                    c
                }
            };
            codes.push(code);
        }
    }

    fn finish(self) -> ColumnData {
        match self {
            Builder::Numeric(v) => ColumnData::Numeric(v),
            Builder::Labels { levels, codes, .. } => ColumnData::Labels { levels, codes },
        }
    }
}

fn open(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(GzDecoder::new(reader)))
    } else {
        Ok(Box::new(reader))
    }
}

/// Reads a CSV (optionally gzip-compressed) into a raw frame typed by `schema`.
///
/// Cells are whitespace-trimmed. Missing markers in numeric columns load as NaN;
/// categorical cells are kept as labels until preprocessing encodes them.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Frame> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(open(path)?);

    // Field position of every schema column in the file.
    let positions: Vec<usize> = if schema.has_header {
        let header = reader.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        let missing: Vec<String> = schema
            .columns
            .iter()
            .filter(|c| !names.contains(&c.name.as_str()))
            .map(|c| c.name.clone())
            .collect();
        let unexpected: Vec<String> = names
            .iter()
            .filter(|n| schema.column(n).is_none())
            .map(|n| n.to_string())
            .collect();
        if !missing.is_empty() || !unexpected.is_empty() {
            return Err(Error::HeaderMismatch {
                missing,
                unexpected,
            });
        }
        schema
            .columns
            .iter()
            .map(|c| names.iter().position(|n| *n == c.name).unwrap_or_default())
            .collect()
    } else {
        (0..schema.columns.len()).collect()
    };

    let width = schema.columns.len();
    let mut builders: Vec<Option<Builder>> = schema
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Dropped => None,
            ColumnKind::Numeric | ColumnKind::Target => Some(Builder::Numeric(Vec::new())),
            ColumnKind::CategoricalBinary => Some(Builder::Labels {
                levels: Vec::new(),
                index: HashMap::new(),
                codes: Vec::new(),
            }),
        })
        .collect();

    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    while reader.read_record(&mut record)? {
        row += 1;
        if record.len() != width {
            return Err(Error::RowWidth {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for ((spec, builder), &pos) in schema.columns.iter().zip(&mut builders).zip(&positions) {
            let Some(builder) = builder else { continue };
            let cell = &record[pos];
            match builder {
                Builder::Numeric(values) => {
                    let value = if spec.is_missing(cell) {
                        f64::NAN
                    } else {
                        cell.parse::<f64>().map_err(|_| Error::ParseCell {
                            row,
                            column: spec.name.clone(),
                            value: cell.to_string(),
                        })?
                    };
                    values.push(value);
                }
                labels => labels.push_label(cell),
            }
        }
    }

    let mut columns = Vec::new();
    let mut target = Vec::new();
    for (spec, builder) in schema.columns.iter().zip(builders) {
        let Some(builder) = builder else { continue };
        let data = builder.finish();
        if spec.kind == ColumnKind::Target {
            if let ColumnData::Numeric(v) = data {
                target = v;
            }
        } else {
            columns.push(Column {
                name: spec.name.clone(),
                kind: spec.kind,
                data,
            });
        }
    }
    let frame = Frame {
        stage: FrameStage::Raw,
        columns,
        target_name: schema.target_name().to_string(),
        target,
        group_labels: Vec::new(),
    };
    frame.check()?;
    Ok(frame)
}

/// Writes a frame with a header row: features in frame order, then the target.
pub fn write_csv(frame: &Frame, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv_to(frame, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_csv_to<W: Write>(frame: &Frame, out: &mut W) -> std::io::Result<()> {
    let mut names: Vec<&str> = frame.columns.iter().map(|c| c.name.as_str()).collect();
    names.push(&frame.target_name);
    writeln!(out, "{}", names.join(","))?;
    let mut line = String::new();
    for i in 0..frame.n_rows() {
        line.clear();
        for col in &frame.columns {
            match &col.data {
                ColumnData::Numeric(v) => line.push_str(&v[i].to_string()),
                ColumnData::Binary(v) => line.push_str(if v[i] == 0 { "0" } else { "1" }),
                ColumnData::Labels { levels, codes } => line.push_str(&levels[codes[i] as usize]),
            }
            line.push(',');
        }
        line.push_str(&frame.target[i].to_string());
        writeln!(out, "{line}")?;
    }
    Ok(())
}
