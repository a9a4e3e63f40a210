//! Line-oriented JSON reading and writing shared by every file format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

/// Iterates over the records of a JSON Lines stream. Blank lines are skipped.
pub struct JsonlReader<R, T> {
    lines: std::io::Lines<R>,
    source_name: String,
    line_no: usize,
    _marker: std::marker::PhantomData<fn() -> T>,
}

impl<R: BufRead, T: DeserializeOwned> JsonlReader<R, T> {
    pub fn new(reader: R, source_name: impl Into<String>) -> Self {
        Self {
            lines: reader.lines(),
            source_name: source_name.into(),
            line_no: 0,
            _marker: std::marker::PhantomData,
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Parse {
            source_name: self.source_name.clone(),
            line: self.line_no,
            message,
        }
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonlReader<R, T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line = match line {
                Ok(line) => line,
                Err(e) => return Some(Err(self.error(e.to_string()))),
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(serde_json::from_str(&line).map_err(|e| self.error(e.to_string())));
        }
    }
}

/// Opens `path` and returns a reader over its JSON Lines records.
pub fn open<T: DeserializeOwned>(path: &Path) -> Result<JsonlReader<BufReader<File>, T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(JsonlReader::new(
        BufReader::new(file),
        path.display().to_string(),
    ))
}

/// Reads every record of a JSON Lines file.
pub fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    open(path)?.collect()
}

/// Writes one compact JSON object per line.
pub struct JsonlWriter<W: Write> {
    out: W,
    written: usize,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, written: 0 }
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Writes all `records` to `path`, replacing any existing file.
pub fn write_all<'a, T, I>(path: &Path, records: I) -> Result<usize>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = JsonlWriter::new(BufWriter::new(file));
    for record in records {
        writer.write(record).map_err(|e| Error::io(path, e))?;
    }
    let n = writer.written();
    writer.finish().map_err(|e| Error::io(path, e))?;
    Ok(n)
}
