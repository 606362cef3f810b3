use std::io::{Read, Write};
use std::path::Path;

use super::eval::{EvalReport, PredictionSet};
use crate::error::{Error, Result};

/// Flat JSON-style text with six decimals per field.
pub fn format_report(r: &EvalReport) -> String {
    format!(
        "{{\"accuracy\": {:.6}, \"rms_gap\": {:.6}, \"fairness\": {:.6}, \"dto\": {:.6}}}",
        r.accuracy, r.rms_gap, r.fairness, r.dto
    )
}

pub fn parse_report(text: &str) -> Result<EvalReport> {
    let report: EvalReport = serde_json::from_str(text.trim()).map_err(|e| Error::Format {
        what: "report",
        msg: e.to_string(),
    })?;
    Ok(report)
}

/// Writes `yhat,y,g` rows; unknown groups become `?`.
pub fn write_predictions_to<W: Write>(preds: &PredictionSet, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["yhat", "y", "g"])?;
    for i in 0..preds.len() {
        let g = preds.g[i].map_or_else(|| "?".to_string(), |g| g.to_string());
        out.write_record([preds.yhat[i].to_string(), preds.y[i].to_string(), g])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_predictions(preds: &PredictionSet, path: &Path) -> Result<()> {
    write_predictions_to(preds, std::fs::File::create(path)?)
}

/// Reads `yhat,y,g` rows. Class and group counts are inferred.
pub fn read_predictions_from<R: Read>(r: R, name: &str) -> Result<PredictionSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols != ["yhat", "y", "g"] {
        return Err(Error::Parse {
            path: name.into(),
            line: 1,
            msg: format!("expected header yhat,y,g, found {}", cols.join(",")),
        });
    }
    let (mut yhat, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            path: name.into(),
            line,
            msg: e.to_string(),
        })?;
        let int = |s: &str, col: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                path: name.into(),
                line,
                msg: format!("{col} value {s:?} is not a label"),
            })
        };
        yhat.push(int(&rec[0], "yhat")?);
        y.push(int(&rec[1], "y")?);
        g.push(if &rec[2] == "?" {
            None
        } else {
            Some(int(&rec[2], "g")?)
        });
    }
    PredictionSet::inferred(yhat, y, g)
}

pub fn read_predictions(path: &Path) -> Result<PredictionSet> {
    read_predictions_from(std::fs::File::open(path)?, &path.display().to_string())
}
