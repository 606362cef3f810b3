use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Writes `f0..f{d-1},y,g` with `?` for a missing group. Features use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv_to(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(ds: &Dataset, w: &mut W) -> Result<()> {
    let header: Vec<String> = (0..ds.dim())
        .map(|j| format!("f{j}"))
        .chain(["y".to_string(), "g".to_string()])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..ds.len() {
        let mut line = String::new();
        for v in ds.x.row(i) {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&ds.y[i].to_string());
        line.push(',');
        match ds.g[i] {
            Some(g) => line.push_str(&g.to_string()),
            None => line.push('?'),
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads the format produced by [`write_csv`]. Class and group counts are
/// inferred as one past the largest label seen.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header = reader.headers()?.clone();
    let cols = header.len();
    if cols < 2 || &header[cols - 2] != "y" || &header[cols - 1] != "g" {
        return Err(parse_err(1, "header must be f0..f{d-1},y,g".into()));
    }
    for (j, name) in header.iter().take(cols - 2).enumerate() {
        if name != format!("f{j}") {
            return Err(parse_err(
                1,
                format!("expected column `f{j}`, found `{name}`"),
            ));
        }
    }
    let dim = cols - 2;
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut g = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != cols {
            return Err(parse_err(
                line,
                format!("expected {cols} columns, found {}", record.len()),
            ));
        }
        for (j, field) in record.iter().take(dim).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("column f{j}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column f{j}: non-finite value `{field}`"),
                ));
            }
            data.push(v);
        }
        let yi: usize = record[dim]
            .parse()
            .map_err(|_| parse_err(line, format!("y: `{}` is not a label", &record[dim])))?;
        let gi = match &record[dim + 1] {
            "?" => None,
            s => Some(
                s.parse::<usize>()
                    .map_err(|_| parse_err(line, format!("g: `{s}` is not a label or `?`")))?,
            ),
        };
        y.push(yi);
        g.push(gi);
    }
    let n_classes = y.iter().max().map_or(1, |m| m + 1);
    let n_groups = g.iter().flatten().max().map_or(1, |m| m + 1);
    let x = Matrix::from_vec(y.len(), dim, data)?;
    Dataset::new(x, y, g, n_classes, n_groups)
}
