use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// Significant digits written for every float.
pub const SIG_DIGITS: usize = 10;

/// `%g`-style formatting with [`SIG_DIGITS`] significant digits.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Optional value as a CSV field; missing values are empty.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn create(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

pub fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(10.0), "10");
        assert_eq!(fmt_float(-0.3), "-0.3");
        assert_eq!(fmt_float(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt_float(9.91e-5), "9.91e-05");
        assert_eq!(fmt_float(123456.0), "123456");
        assert_eq!(fmt_float(1.5e12), "1.5e+12");
        assert_eq!(fmt_float(2.0f64.sqrt() * 1e-3), "0.001414213562");
        assert_eq!(fmt_opt(None), "");
    }
}
