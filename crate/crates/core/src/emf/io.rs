use std::io::{BufRead, Write};

use ndarray::{Array2, ArrayView2};

use crate::error::{parse_err, Error, Result};
use crate::graph::NodeIndex;

/// Embeddings read from word2vec text format, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct Word2Vec {
    pub index: NodeIndex,
    pub vectors: Array2<f64>,
}

/// Formats `x` with six significant digits, in the style of C's `%g`.
pub(crate) fn format_g6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        trim_zeros(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Header `rows dim`, then `name v_1 ... v_dim` per row of `vectors`.
pub fn write_word2vec<'a, W: Write>(
    mut out: W,
    names: impl IntoIterator<Item = &'a str>,
    vectors: ArrayView2<f64>,
) -> Result<()> {
    writeln!(out, "{} {}", vectors.nrows(), vectors.ncols())?;
    let mut names = names.into_iter();
    for row in vectors.rows() {
        let name = names.next().ok_or_else(|| Error::Shape("fewer names than embedding rows".into()))?;
        write!(out, "{name}")?;
        for v in row {
            write!(out, " {}", format_g6(*v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_word2vec<R: BufRead>(source: R) -> Result<Word2Vec> {
    let mut lines = source.lines().enumerate();
    let (rows, dim) = loop {
        let (k, line) = lines.next().ok_or(Error::EmptyInput("embedding file"))?;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |t: &str| t.parse::<usize>().map_err(|_| parse_err(k + 1, "header must be `count dim`"));
        if parts.len() != 2 {
            return Err(parse_err(k + 1, "header must be `count dim`"));
        }
        break (parse(parts[0])?, parse(parts[1])?);
    };
    let mut index = NodeIndex::new();
    let mut data = Vec::with_capacity(rows * dim);
    for (k, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut parts = t.split_whitespace();
        let name = parts.next().expect("non-empty line");
        if index.get(name).is_some() {
            return Err(parse_err(k + 1, format!("duplicate embedding for `{name}`")));
        }
        let before = data.len();
        for tok in parts {
            data.push(tok.parse::<f64>().map_err(|_| parse_err(k + 1, format!("invalid value `{tok}`")))?);
        }
        if data.len() - before != dim {
            return Err(parse_err(k + 1, format!("expected {dim} values, found {}", data.len() - before)));
        }
        index.intern(name);
    }
    if index.len() != rows {
        return Err(Error::Shape(format!("header announces {rows} rows, file holds {}", index.len())));
    }
    let vectors = Array2::from_shape_vec((rows, dim), data).expect("row lengths checked");
    Ok(Word2Vec { index, vectors })
}

/// `outer_iter,loss` rows; iteration 0 is the initialization.
pub fn write_trajectory_csv<W: Write>(out: W, trajectory: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["outer_iter", "loss"]).map_err(|e| Error::Io(e.into()))?;
    for (i, loss) in trajectory.iter().enumerate() {
        writer.write_record([i.to_string(), format!("{loss:.10e}")]).map_err(|e| Error::Io(e.into()))?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g6_formatting() {
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(1.0), "1");
        assert_eq!(format_g6(-0.125), "-0.125");
        assert_eq!(format_g6(1.23456789), "1.23457");
        assert_eq!(format_g6(123456789.0), "1.23457e+08");
        assert_eq!(format_g6(0.0000123456789), "1.23457e-05");
        assert_eq!(format_g6(0.000123456789), "0.000123457");
        assert_eq!(format_g6(999999.7), "1e+06");
    }

    #[test]
    fn header_and_rows() {
        let v = Array2::from_shape_vec((2, 2), vec![1.0, -0.5, 0.25, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_word2vec(&mut buf, ["a", "b"], v.view()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2 2\na 1 -0.5\nb 0.25 2\n");
    }

    #[test]
    fn ragged_row_rejected() {
        let text = "2 2\na 1 2\nb 1\n";
        assert!(matches!(read_word2vec(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_word2vec("3 1\na 1\n".as_bytes()), Err(Error::Shape(_))));
    }

    #[test]
    fn trajectory_csv() {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[2.0, 1.5]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("outer_iter,loss\n0,2.0000000000e0\n1,1.5"));
    }

    proptest! {
        #[test]
        fn roundtrip_within_six_digits(values in proptest::collection::vec(-1e6f64..1e6, 1..24)) {
            let dim = values.len();
            let v = Array2::from_shape_vec((1, dim), values.clone()).unwrap();
            let mut buf = Vec::new();
            write_word2vec(&mut buf, ["x"], v.view()).unwrap();
            let back = read_word2vec(&buf[..]).unwrap();
            for (a, b) in values.iter().zip(back.vectors.iter()) {
                prop_assert!((a - b).abs() <= 5e-6 * a.abs().max(1e-300) + 1e-300);
            }
        }
    }
}
