//! Artifact serialization. Floats are written with 17 significant digits so
//! every file round-trips bit for bit.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::forward::SpectralDataset;
use crate::metric::{EvalReport, FiniteMetricSpace};
use crate::slicing::BoundaryDistanceFn;
use crate::volume::VolumeReport;
use crate::Result;

/// Pretty or compact JSON with `{:.16e}` floats.
struct Sci<F> {
    inner: F,
}

macro_rules! forward {
    ($($name:ident),*) => {$(
        fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.$name(w)
        }
    )*};
}

impl<F: Formatter> Formatter for Sci<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }

    forward!(end_array, end_array_value, end_object, end_object_value, begin_object_value, begin_array, begin_object);

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
}

fn encode<T: Serialize + ?Sized, F: Formatter>(value: &T, inner: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci { inner });
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Indented JSON.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    encode(value, PrettyFormatter::with_indent(b"  "))
}

/// Single-line JSON for bulky artifacts.
pub fn to_json_compact<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    encode(value, serde_json::ser::CompactFormatter)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_dataset(path: &Path, ds: &SpectralDataset) -> Result<()> {
    write_text(path, &to_json_compact(ds)?)
}

pub fn read_dataset(path: &Path) -> Result<SpectralDataset> {
    read_json(path)
}

pub fn write_rstar(path: &Path, rstar: &[BoundaryDistanceFn]) -> Result<()> {
    write_text(path, &to_json_compact(rstar)?)
}

pub fn read_rstar(path: &Path) -> Result<Vec<BoundaryDistanceFn>> {
    read_json(path)
}

pub fn write_metric_space(path: &Path, x: &FiniteMetricSpace) -> Result<()> {
    write_text(path, &to_json_compact(x)?)
}

pub fn read_metric_space(path: &Path) -> Result<FiniteMetricSpace> {
    read_json(path)
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_text(path, &to_json_pretty(report)?)
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    read_json(path)
}

/// One row of the volume CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub alpha_key: String,
    pub vol_a: f64,
    pub vol_true: Option<f64>,
    pub abs_err: Option<f64>,
    pub solver_iters: usize,
}

impl VolumeRow {
    pub fn new(r: &VolumeReport, vol_true: Option<f64>) -> Self {
        VolumeRow {
            alpha_key: r.key.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"),
            vol_a: r.vol_a,
            vol_true,
            abs_err: vol_true.map(|t| (r.vol_a - t).abs()),
            solver_iters: r.iterations,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn volumes_csv(rows: &[VolumeRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha_key", "vol_a", "vol_true", "abs_err", "solver_iters"])?;
    for r in rows {
        w.write_record([
            r.alpha_key.clone(),
            format!("{:.16e}", r.vol_a),
            fmt_opt(r.vol_true),
            fmt_opt(r.abs_err),
            r.solver_iters.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

pub fn write_volumes(path: &Path, rows: &[VolumeRow]) -> Result<()> {
    write_text(path, &volumes_csv(rows)?)
}

pub fn read_volumes(path: &Path) -> Result<Vec<VolumeRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let v = vec![0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0];
        let text = to_json_compact(&v).unwrap();
        assert!(text.contains("1.0000000000000001e-1"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        let pretty = to_json_pretty(&v).unwrap();
        assert_eq!(serde_json::from_str::<Vec<f64>>(&pretty).unwrap(), v);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            VolumeRow { alpha_key: "0;16;0".into(), vol_a: 0.981, vol_true: Some(1.0), abs_err: Some(0.019), solver_iters: 60 },
            VolumeRow { alpha_key: "0;0;0".into(), vol_a: 0.0, vol_true: None, abs_err: None, solver_iters: 0 },
        ];
        let p = dir.path().join("v.csv");
        write_volumes(&p, &rows).unwrap();
        assert_eq!(read_volumes(&p).unwrap(), rows);
    }
}
