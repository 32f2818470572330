//! CSV datasets: header `label,f0,...,f{d-1}`, one sample per line.

use sinkclust_core::Matrix;

/// Parses CSV text; errors name the line.
pub fn decode(text: &[u8]) -> Result<(Matrix, Vec<usize>), String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text);
    let header = reader.headers().map_err(|e| format!("line 1: {e}"))?.clone();
    if header.get(0) != Some("label") || header.len() < 2 {
        return Err("line 1: header must be label,f0,f1,...".into());
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{i}") {
            return Err(format!("line 1: column {} is {name:?}, expected \"f{i}\"", i + 1));
        }
    }
    let d = header.len() - 1;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => format!("line {}: {e}", p.line()),
            None => e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let label = &record[0];
        labels.push(
            label
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("line {line}: label {label:?} is not a nonnegative integer"))?,
        );
        for (j, field) in record.iter().skip(1).enumerate() {
            let x: f64 = field.trim().parse().map_err(|_| format!("line {line}: f{j} = {field:?} is not a number"))?;
            if !x.is_finite() {
                return Err(format!("line {line}: f{j} is not finite"));
            }
            data.push(x);
        }
    }
    let rows = labels.len();
    Ok((Matrix::new(rows, d, data).map_err(|e| e.to_string())?, labels))
}

/// Shortest round-trip decimal form of every value.
pub fn encode(features: &Matrix, labels: &[usize]) -> Result<Vec<u8>, String> {
    if labels.len() != features.rows() {
        return Err(format!("{} labels for {} rows", labels.len(), features.rows()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<String> =
        std::iter::once("label".to_string()).chain((0..features.cols()).map(|j| format!("f{j}"))).collect();
    w.write_record(&header).map_err(|e| e.to_string())?;
    for (row, y) in features.iter_rows().zip(labels) {
        let record: Vec<String> = std::iter::once(y.to_string()).chain(row.iter().map(|x| x.to_string())).collect();
        w.write_record(&record).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_row_fixture() {
        let text = b"label,f0,f1\n0,1.5,2\n2,-1,0.25\n1,3e-2,4\n";
        let (m, labels) = decode(text).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(labels, vec![0, 2, 1]);
        assert_eq!(m[(2, 0)], 0.03);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = Matrix::new(2, 3, vec![0.1, 1.0 / 3.0, -2e-300, 7.0, f64::MAX, 5e-324]).unwrap();
        let bytes = encode(&m, &[1, 0]).unwrap();
        let (back, labels) = decode(&bytes).unwrap();
        assert_eq!(labels, vec![1, 0]);
        assert!(back.as_slice().iter().zip(m.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(!bytes.contains(&b'\r'));
    }

    #[test]
    fn malformed_inputs() {
        assert!(decode(b"y,f0\n0,1\n").unwrap_err().contains("header"));
        assert!(decode(b"label,f1\n0,1\n").unwrap_err().contains("expected \"f0\""));
        assert!(decode(b"label,f0,f1\n0,1,2\n1,2\n").unwrap_err().contains("line 3"));
        assert!(decode(b"label,f0\n-1,1\n").unwrap_err().contains("nonnegative"));
        assert!(decode(b"label,f0\n0,abc\n").unwrap_err().contains("line 2"));
        assert!(decode(b"label,f0\n0,inf\n").unwrap_err().contains("not finite"));
    }
}
