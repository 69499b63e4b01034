//! Signal CSV files (`n,value` or `n,y,u`) and their provenance sidecars.
//!
//! Values are written with [`Real::to_decimal`]: 17 significant digits for
//! `f64`, which reload bit-exactly, and 34 for double-double, which reload to
//! within about `1e-33` relative.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Signal;

/// `n,value`
pub fn write_signal<T: Real, W: Write>(signal: &Signal<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,value")?;
    for (n, v) in signal.samples().iter().enumerate() {
        writeln!(out, "{n},{}", v.to_decimal())?;
    }
    Ok(())
}

/// `n,y,u` for an output/input pair of equal length.
pub fn write_signal_pair<T: Real, W: Write>(
    y: &Signal<T>,
    u: &Signal<T>,
    mut out: W,
) -> Result<()> {
    if y.len() != u.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: u.len(),
        });
    }
    writeln!(out, "n,y,u")?;
    for (n, (a, b)) in y.samples().iter().zip(u.samples()).enumerate() {
        writeln!(out, "{n},{},{}", a.to_decimal(), b.to_decimal())?;
    }
    Ok(())
}

/// Parsed signal file: one column for `n,value`, two for `n,y,u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable<T> {
    pub columns: Vec<(String, Vec<T>)>,
}

impl<T: Real> SignalTable<T> {
    /// The response column: `value`, or `y` in a pair file.
    pub fn output(&self) -> &[T] {
        &self.columns[0].1
    }

    pub fn column(&self, name: &str) -> Option<&[T]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Reads `n,value` or `n,y,u`; `n` must run 0, 1, 2, … Lines starting
/// with `#` are skipped.
pub fn read_signal_table<T: Real, R: Read>(input: R) -> Result<SignalTable<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let names: Vec<&str> = headers.iter().map(String::as_str).collect();
    if names != ["n", "value"] && names != ["n", "y", "u"] {
        return Err(Error::Parse(format!(
            "expected header `n,value` or `n,y,u`, found `{}`",
            headers.join(",")
        )));
    }
    let mut columns: Vec<(String, Vec<T>)> = headers[1..]
        .iter()
        .map(|h| (h.clone(), Vec::new()))
        .collect();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = row + 2;
        let n: usize = record[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad sample index `{}`", &record[0])))?;
        if n != row {
            return Err(Error::Parse(format!(
                "line {line}: expected sample index {row}, found {n}"
            )));
        }
        for (k, (name, values)) in columns.iter_mut().enumerate() {
            let text = &record[k + 1];
            let value = T::parse_decimal(text)
                .ok_or_else(|| Error::Parse(format!("line {line}: bad {name} `{text}`")))?;
            values.push(value);
        }
    }
    if columns[0].1.is_empty() {
        return Err(Error::Parse("no samples".into()));
    }
    Ok(SignalTable { columns })
}

/// Sidecar path: `<path>.provenance`.
pub fn provenance_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".provenance");
    PathBuf::from(name)
}

fn provenance_line<T: Real>(signal: &Signal<T>) -> String {
    format!(
        "sample_period={} provenance={}",
        signal.sample_period().to_decimal(),
        signal.provenance().replace('\n', " ")
    )
}

/// Parses a sidecar line into `(sample_period, provenance)`.
fn parse_provenance_line<T: Real>(line: &str) -> Result<(T, String)> {
    let rest = line
        .trim_end()
        .strip_prefix("sample_period=")
        .ok_or_else(|| {
            Error::Parse("provenance sidecar must start with `sample_period=`".into())
        })?;
    let (period, provenance) = rest.split_once(" provenance=").unwrap_or((rest, ""));
    let period = T::parse_decimal(period)
        .ok_or_else(|| Error::Parse(format!("bad sample period `{period}`")))?;
    Ok((period, provenance.to_owned()))
}

/// Writes the signal CSV and its sidecar.
pub fn save_signal<T: Real>(path: &Path, signal: &Signal<T>) -> Result<()> {
    let mut out = Vec::new();
    write_signal(signal, &mut out)?;
    fs::write(path, out)?;
    fs::write(provenance_path(path), provenance_line(signal) + "\n")?;
    Ok(())
}

/// Writes the pair CSV and a sidecar carrying the output's provenance.
pub fn save_signal_pair<T: Real>(path: &Path, y: &Signal<T>, u: &Signal<T>) -> Result<()> {
    let mut out = Vec::new();
    write_signal_pair(y, u, &mut out)?;
    fs::write(path, out)?;
    fs::write(provenance_path(path), provenance_line(y) + "\n")?;
    Ok(())
}

/// Loads the response column of a signal file. Without a sidecar the
/// sample period is 1 and the provenance is the file name.
pub fn load_signal<T: Real>(path: &Path) -> Result<Signal<T>> {
    Ok(load_table(path)?.0)
}

/// Loads a pair file as `(y, u)`.
pub fn load_signal_pair<T: Real>(path: &Path) -> Result<(Signal<T>, Signal<T>)> {
    let (y, table, period) = load_table(path)?;
    let u = table
        .column("u")
        .ok_or_else(|| Error::Parse(format!("{} has no `u` column", path.display())))?;
    let u = Signal::new(u.to_vec(), period, format!("{} [u]", y.provenance()))?;
    Ok((y, u))
}

fn load_table<T: Real>(path: &Path) -> Result<(Signal<T>, SignalTable<T>, T)> {
    let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let table = read_signal_table::<T, _>(file)?;
    let sidecar = provenance_path(path);
    let (period, provenance) = if sidecar.exists() {
        let text = fs::read_to_string(&sidecar)?;
        parse_provenance_line(text.lines().next().unwrap_or(""))?
    } else {
        (T::one(), format!("file {}", path.display()))
    };
    let signal = Signal::new(table.output().to_vec(), period, provenance)?;
    Ok((signal, table, period))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use crate::signal::{gen_nonhomogeneous, gen_y5};
    use num_traits::Float;

    #[test]
    fn csv_layout_has_17_digits() {
        let s = Signal::new(vec![1.0 / 3.0, 2.0], 1.0, "t").unwrap();
        let mut out = Vec::new();
        write_signal(&s, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "n,value\n0,3.3333333333333331e-1\n1,2.0000000000000000e0\n"
        );
    }

    #[test]
    fn round_trip_f64_and_double_double() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y5.csv");
        let y5 = gen_y5::<f64>(20).unwrap();
        save_signal(&path, &y5).unwrap();
        let back: Signal<f64> = load_signal(&path).unwrap();
        assert_eq!(back.samples(), y5.samples());
        assert_eq!(back.provenance(), y5.provenance());

        let dd = gen_y5::<DoubleDouble>(20).unwrap();
        save_signal(&path, &dd).unwrap();
        let back: Signal<DoubleDouble> = load_signal(&path).unwrap();
        for (a, b) in back.samples().iter().zip(dd.samples()) {
            assert!(((*a - *b) / *b).abs().hi() < 1e-32, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn pair_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pair.csv");
        let (y, u) = gen_nonhomogeneous::<f64>(25, 0.5).unwrap();
        save_signal_pair(&path, &y, &u).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,y,u\n"));
        assert_eq!(text.lines().count(), 26);
        let (y2, u2) = load_signal_pair::<f64>(&path).unwrap();
        assert_eq!(y2.samples(), y.samples());
        assert_eq!(u2.samples(), u.samples());
        assert_eq!(*y2.sample_period(), 0.5);
        // a pair file also loads as a single response
        assert_eq!(load_signal::<f64>(&path).unwrap().samples(), y.samples());
    }

    #[test]
    fn rejects_malformed_files() {
        let bad = |text: &str| read_signal_table::<f64, _>(text.as_bytes()).unwrap_err();
        assert!(matches!(bad("a,b\n0,1\n"), Error::Parse(_)));
        assert!(matches!(bad("n,value\n1,1.0\n"), Error::Parse(_)));
        assert!(matches!(bad("n,value\n0,abc\n"), Error::Parse(_)));
        assert!(matches!(bad("n,value\n"), Error::Parse(_)));
        let y = Signal::new(vec![1.0, 2.0], 1.0, "y").unwrap();
        let u = Signal::new(vec![1.0], 1.0, "u").unwrap();
        assert!(write_signal_pair(&y, &u, Vec::new()).is_err());
    }

    #[test]
    fn missing_sidecar_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.csv");
        fs::write(&path, "n,value\n0,1\n1,0.5\n").unwrap();
        let s: Signal<f64> = load_signal(&path).unwrap();
        assert_eq!(s.samples(), &[1.0, 0.5]);
        assert_eq!(*s.sample_period(), 1.0);
        assert!(load_signal::<f64>(&dir.path().join("missing.csv")).is_err());
    }
}
