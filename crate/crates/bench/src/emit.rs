//! CSV and JSON output of result rows.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::config::OutputFormat;
use crate::error::Result;
use crate::experiment::ResultRow;

/// Streams rows as CSV. The header is written up front, so an empty run
/// still produces a header line.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(inner);
        writer.write_record(ResultRow::HEADER)?;
        Ok(CsvSink { writer })
    }

    pub fn push(&mut self, row: &ResultRow) -> Result<()> {
        self.writer.serialize(row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush()?;
        self.writer.into_inner().map_err(|e| e.into_error().into())
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<W> {
    let mut sink = CsvSink::new(out)?;
    for row in rows {
        sink.push(row)?;
    }
    sink.finish()
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<W> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(out)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_reader(input)?)
}

pub fn emit(rows: &[ResultRow], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut file = match format {
        OutputFormat::Csv => write_csv(rows, file)?,
        OutputFormat::Json => write_json(rows, file)?,
    };
    file.flush()?;
    Ok(())
}
