use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::regularizers::Method;

pub const CSV_HEADER: [&str; 8] = [
    "method",
    "strength",
    "mean_loss",
    "stderr_loss",
    "mean_mse_plain",
    "mean_mse_absorbing",
    "replications",
    "config_hash",
];

/// One aggregated `(method, strength)` cell. `stderr_loss` is the standard
/// error of the mean loss across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub strength: f64,
    pub mean_loss: f64,
    pub stderr_loss: f64,
    pub mean_mse_plain: f64,
    pub mean_mse_absorbing: f64,
    pub replications: usize,
    pub config_hash: String,
}

/// Twelve significant digits, `%.12g` style.
pub fn format_number(x: f64) -> String {
    const SIG: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIG as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Argument("no result rows to write".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            format_number(r.strength),
            format_number(r.mean_loss),
            format_number(r.stderr_loss),
            format_number(r.mean_mse_plain),
            format_number(r.mean_mse_absorbing),
            r.replications.to_string(),
            r.config_hash.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(rows, file)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Argument(format!("unexpected header {header:?}")));
    }
    let number = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Argument(format!("`{s}` is not a number")))
    };
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok(ResultRow {
                method: rec[0].parse()?,
                strength: number(&rec[1])?,
                mean_loss: number(&rec[2])?,
                stderr_loss: number(&rec[3])?,
                mean_mse_plain: number(&rec[4])?,
                mean_mse_absorbing: number(&rec[5])?,
                replications: rec[6]
                    .parse()
                    .map_err(|_| Error::Argument(format!("`{}` is not a count", &rec[6])))?,
                config_hash: rec[7].to_string(),
            })
        })
        .collect()
}

/// Fixed-width table sorted by method name, then strength.
pub fn emit_summary(rows: &[ResultRow]) -> String {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.method
            .name()
            .cmp(b.method.name())
            .then(a.strength.total_cmp(&b.strength))
    });
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<11} {:>9} {:>13} {:>11} {:>13} {:>13}",
        "method", "strength", "mean_loss", "stderr", "mse_plain", "mse_absorb"
    );
    for r in sorted {
        let _ = writeln!(
            out,
            "{:<11} {:>9} {:>13.6} {:>11.6} {:>13.6e} {:>13.6e}",
            r.method.name(),
            format_number(r.strength),
            r.mean_loss,
            r.stderr_loss,
            r.mean_mse_plain,
            r.mean_mse_absorbing
        );
    }
    out
}
