use std::path::Path;

use super::{io_error, CodecError};
use crate::analysis::Histogram;

pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<(), CodecError> {
    let to_io = |e: csv::Error| std::io::Error::from(e);
    let mut w = csv::Writer::from_path(path).map_err(to_io).map_err(io_error(path))?;
    let mut write = || -> Result<(), csv::Error> {
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|f| f.as_ref()))?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(to_io).map_err(io_error(path))
}

/// `bin_low,bin_high,count` rows, one per bin.
pub fn write_histogram_csv(path: &Path, hist: &Histogram) -> Result<(), CodecError> {
    let rows: Vec<Vec<String>> = hist
        .edges
        .windows(2)
        .zip(&hist.counts)
        .map(|(e, c)| vec![e[0].to_string(), e[1].to_string(), c.to_string()])
        .collect();
    write_csv(path, &["bin_low", "bin_high", "count"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let mut h = Histogram::new(vec![0.0, 0.5, 1.0]).unwrap();
        h.add(0.7);
        write_histogram_csv(&path, &h).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "bin_low,bin_high,count\n0,0.5,0\n0.5,1,1\n");
    }

    #[test]
    fn quotes_fields_with_commas() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        write_csv(&path, &["word", "note"], &[vec!["a,b", "plain"]]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "word,note\n\"a,b\",plain\n");
    }
}
