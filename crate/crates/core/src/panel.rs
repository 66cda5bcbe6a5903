//! Multivariate real time series sampled at consecutive integer times.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `n` real series sampled at `t_start, t_start + 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalPanel {
    t_start: i64,
    len: usize,
    /// Node-major: series `x` occupies `data[x * len .. (x + 1) * len]`.
    data: Vec<f64>,
    labels: Vec<String>,
}

impl SignalPanel {
    /// One inner vector per variable, all the same nonzero length. Labels
    /// default to `x1, x2, …`.
    pub fn new(series: Vec<Vec<f64>>, t_start: i64) -> Result<Self> {
        let labels = (1..=series.len()).map(|i| format!("x{i}")).collect();
        Self::with_labels(series, t_start, labels)
    }

    pub fn with_labels(series: Vec<Vec<f64>>, t_start: i64, labels: Vec<String>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::input("panel needs at least one variable"));
        }
        if labels.len() != series.len() {
            return Err(Error::input("label count does not match variable count"));
        }
        let len = series[0].len();
        if len == 0 {
            return Err(Error::input("panel needs at least one sample"));
        }
        let mut data = Vec::with_capacity(series.len() * len);
        for (x, s) in series.into_iter().enumerate() {
            if s.len() != len {
                return Err(Error::input(format!(
                    "variable {} has {} samples, expected {len}",
                    x + 1,
                    s.len()
                )));
            }
            if let Some(i) = s.iter().position(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "non-finite sample for variable {} at t = {}",
                    x + 1,
                    t_start + i as i64
                )));
            }
            data.extend(s);
        }
        Ok(Self {
            t_start,
            len,
            data,
            labels,
        })
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of time samples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn t_start(&self) -> i64 {
        self.t_start
    }

    /// Last sampled time (inclusive).
    pub fn t_end(&self) -> i64 {
        self.t_start + self.len as i64 - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn series(&self, x: usize) -> &[f64] {
        &self.data[x * self.len..(x + 1) * self.len]
    }

    /// Value of variable `x` at absolute time `t`.
    pub fn value(&self, x: usize, t: i64) -> Result<f64> {
        let i = self.index_of(t)?;
        if x >= self.n() {
            return Err(Error::input(format!("variable {} outside panel", x + 1)));
        }
        Ok(self.data[x * self.len + i])
    }

    /// All variables at absolute time `t`.
    pub fn snapshot(&self, t: i64) -> Result<Vec<f64>> {
        let i = self.index_of(t)?;
        Ok((0..self.n()).map(|x| self.data[x * self.len + i]).collect())
    }

    fn index_of(&self, t: i64) -> Result<usize> {
        if t < self.t_start || t > self.t_end() {
            return Err(Error::input(format!(
                "time {t} outside panel range {}..={}",
                self.t_start,
                self.t_end()
            )));
        }
        Ok((t - self.t_start) as usize)
    }

    /// Sub-panel over the closed time range.
    pub fn window(&self, t_from: i64, t_to: i64) -> Result<Self> {
        if t_from > t_to {
            return Err(Error::input(format!("empty window {t_from}..={t_to}")));
        }
        let a = self.index_of(t_from)?;
        let b = self.index_of(t_to)?;
        let series = (0..self.n()).map(|x| self.series(x)[a..=b].to_vec()).collect();
        Self::with_labels(series, t_from, self.labels.clone())
    }

    /// Keeps the listed variables (0-based) in the given order.
    pub fn select(&self, nodes: &[usize]) -> Result<Self> {
        if let Some(&x) = nodes.iter().find(|&&x| x >= self.n()) {
            return Err(Error::input(format!("variable {} outside panel", x + 1)));
        }
        let series = nodes.iter().map(|&x| self.series(x).to_vec()).collect();
        let labels = nodes.iter().map(|&x| self.labels[x].clone()).collect();
        Self::with_labels(series, self.t_start, labels)
    }

    /// Adds `offsets[x]` to every sample of variable `x`.
    pub fn shifted(&self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.n() {
            return Err(Error::input("offset count does not match variable count"));
        }
        let series = (0..self.n())
            .map(|x| self.series(x).iter().map(|v| v + offsets[x]).collect())
            .collect();
        Self::with_labels(series, self.t_start, self.labels.clone())
    }

    /// Population variance over all samples.
    pub fn variance(&self) -> f64 {
        let m = self.data.len() as f64;
        let mean = self.data.iter().sum::<f64>() / m;
        self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m
    }

    /// CSV with header `t,<labels>` and one row per time.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.len {
            let mut row = vec![(self.t_start + i as i64).to_string()];
            row.extend((0..self.n()).map(|x| format!("{:?}", self.data[x * self.len + i])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Parses the format written by [`SignalPanel::write_csv`]. Times must be
    /// consecutive integers. `origin` names the source in error messages.
    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[0] != "t" {
            return Err(parse_error(
                origin,
                1,
                "t",
                "header must start with t and name at least one variable",
            ));
        }
        let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut series = vec![Vec::new(); labels.len()];
        let mut t_start = 0i64;
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            if rec.len() != header.len() {
                return Err(parse_error(
                    origin,
                    row,
                    "*",
                    &format!("expected {} fields, found {}", header.len(), rec.len()),
                ));
            }
            let t: i64 = rec[0]
                .parse()
                .map_err(|_| parse_error(origin, row, "t", &format!("time {:?} is not an integer", &rec[0])))?;
            if i == 0 {
                t_start = t;
            } else if t != t_start + i as i64 {
                return Err(parse_error(origin, row, "t", "times must be consecutive integers"));
            }
            for (x, s) in series.iter_mut().enumerate() {
                let cell = &rec[x + 1];
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_error(origin, row, &labels[x], &format!("{cell:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_error(origin, row, &labels[x], "value is not finite"));
                }
                s.push(v);
            }
        }
        if series[0].is_empty() {
            return Err(parse_error(origin, 1, "t", "no data rows"));
        }
        Self::with_labels(series, t_start, labels)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, path)
    }
}

pub(crate) fn parse_error(path: &Path, row: usize, column: &str, message: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> SignalPanel {
        SignalPanel::new(vec![vec![1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3]], 5).unwrap()
    }

    #[test]
    fn indexing_by_absolute_time() {
        let p = sample();
        assert_eq!(p.t_end(), 7);
        assert_eq!(p.value(1, 6).unwrap(), 0.2);
        assert_eq!(p.snapshot(7).unwrap(), vec![3.0, 0.3]);
        assert!(p.value(0, 4).is_err());
        assert!(p.value(2, 5).is_err());
    }

    #[test]
    fn window_and_select() {
        let p = sample();
        let w = p.window(6, 7).unwrap();
        assert_eq!(w.t_start(), 6);
        assert_eq!(w.series(0), &[2.0, 3.0]);
        let s = p.select(&[1]).unwrap();
        assert_eq!(s.labels(), &["x2".to_string()]);
        assert!(p.window(7, 6).is_err());
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(SignalPanel::new(vec![vec![1.0], vec![1.0, 2.0]], 0).is_err());
        assert!(SignalPanel::new(vec![vec![f64::NAN]], 0).is_err());
        assert!(SignalPanel::new(vec![], 0).is_err());
        assert!(SignalPanel::new(vec![vec![]], 0).is_err());
    }

    #[test]
    fn csv_errors_carry_location() {
        let text = "t,a,b\n1,0.5,1\n2,oops,1\n";
        let err = SignalPanel::read_csv(text.as_bytes(), Path::new("in.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("column a"), "{msg}");
        let gap = "t,a\n1,0\n3,0\n";
        assert!(SignalPanel::read_csv(gap.as_bytes(), Path::new("g.csv")).is_err());
        let nan = "t,a\n1,NaN\n";
        assert!(SignalPanel::read_csv(nan.as_bytes(), Path::new("n.csv")).is_err());
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_exact(
            rows in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), 1..20),
            t0 in -50i64..50,
        ) {
            let series: Vec<Vec<f64>> = (0..3).map(|x| rows.iter().map(|r| r[x] / 7.0).collect()).collect();
            let p = SignalPanel::new(series, t0).unwrap();
            let mut buf = Vec::new();
            p.write_csv(&mut buf).unwrap();
            let back = SignalPanel::read_csv(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
