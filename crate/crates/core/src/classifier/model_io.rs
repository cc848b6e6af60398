use std::io::{BufRead, Write};

use super::ClassifierError;
use crate::numerics::{MlpParams, MlpShape};

const HEADER: &str = "input,hidden1,hidden2,classes";

/// Shape header line, widths line, then one parameter per line in storage
/// order (W1, b1, W2, b2, W3, b3, each row-major).
pub fn write_model_csv<W: Write>(mut w: W, model: &MlpParams<f32>) -> std::io::Result<()> {
    let s = model.shape();
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{},{},{},{}", s.input, s.hidden1, s.hidden2, s.classes)?;
    for v in model.as_slice() {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn read_model_csv<R: BufRead>(r: R) -> Result<MlpParams<f32>, ClassifierError> {
    let parse = |line: usize, message: String| ClassifierError::Parse { line, message };
    let mut lines = r.lines();
    let mut next = |n: usize| -> Result<String, ClassifierError> {
        match lines.next() {
            Some(l) => Ok(l?),
            None => Err(parse(n, "unexpected end of file".into())),
        }
    };
    let header = next(1)?;
    if header.trim() != HEADER {
        return Err(parse(1, format!("expected header {HEADER:?}")));
    }
    let widths: Vec<usize> = next(2)?
        .split(',')
        .map(|v| v.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse(2, e.to_string()))?;
    let [input, h1, h2, classes] = widths[..] else {
        return Err(parse(2, format!("expected 4 widths, got {}", widths.len())));
    };
    let shape = MlpShape::new(input, h1, h2, classes);
    let n = shape.num_params();
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let line = i + 3;
        let text = next(line)?;
        data.push(
            text.trim()
                .parse::<f32>()
                .map_err(|e| parse(line, e.to_string()))?,
        );
    }
    if let Some(extra) = lines.next() {
        if !extra?.trim().is_empty() {
            return Err(parse(n + 3, "trailing data after parameters".into()));
        }
    }
    Ok(MlpParams::from_flat(shape, data)?)
}
