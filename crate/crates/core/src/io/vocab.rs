use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{io_error, CodecError};
use crate::corpus::Vocabulary;

const VERSION_LINE: &str = "#cover-vocab\t1";

pub fn write_vocab(vocab: &Vocabulary, path: &Path) -> Result<(), CodecError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{VERSION_LINE}")?;
        for c in vocab.covariates() {
            writeln!(w, "#covariate\t{c}")?;
        }
        for (word, count) in vocab.words().iter().zip(vocab.counts()) {
            writeln!(w, "{word}\t{count}")?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_error(path))
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary, CodecError> {
    const FILE: &str = "vocab";
    let file = File::open(path).map_err(io_error(path))?;
    let mut words = Vec::new();
    let mut counts = Vec::new();
    let mut covariates = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(io_error(path))?;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest.split_once('\t').unwrap_or((rest, ""));
            match key {
                "cover-vocab" if value == "1" => {}
                "cover-vocab" => return Err(CodecError::Format(format!("unsupported vocab version '{value}'"))),
                "covariate" if !words.is_empty() => {
                    return Err(CodecError::Parse {
                        file: FILE.into(),
                        line: line_no,
                        msg: "covariate header after the first word".into(),
                    })
                }
                "covariate" => covariates.push(value.to_string()),
                _ => {
                    return Err(CodecError::Parse {
                        file: FILE.into(),
                        line: line_no,
                        msg: format!("unknown header '{line}'"),
                    })
                }
            }
            continue;
        }
        let (word, count) = line.split_once('\t').ok_or_else(|| CodecError::Parse {
            file: FILE.into(),
            line: line_no,
            msg: format!("expected 'word<TAB>count', found '{line}'"),
        })?;
        let count = count.parse::<u64>().map_err(|e| CodecError::Parse {
            file: FILE.into(),
            line: line_no,
            msg: format!("bad count '{count}': {e}"),
        })?;
        words.push(word.to_string());
        counts.push(count);
    }
    Vocabulary::new(words, counts, covariates).map_err(CodecError::Format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = Vocabulary::new(
            vec!["gun".into(), "control".into(), "rights".into()],
            vec![5, 2, 2],
            vec!["left".into(), "right".into()],
        )
        .unwrap();
        write_vocab(&v, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "#cover-vocab\t1\n#covariate\tleft\n#covariate\tright\ngun\t5\ncontrol\t2\nrights\t2\n"
        );
        assert_eq!(read_vocab(&path).unwrap(), v);
    }

    #[test]
    fn out_of_order_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "#covariate\tk\nb\t1\na\t2\n").unwrap();
        assert!(matches!(read_vocab(&path), Err(CodecError::Format(_))));
    }
}
