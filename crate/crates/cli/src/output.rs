//! CSV, SVG and manifest writing.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Files produced by one subcommand, kept in memory until written.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
        self.files.push((name.into(), bytes));
        Ok(())
    }

    /// CSV with a header given explicitly, for column sets decided at run time.
    pub fn csv_records(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
        for r in rows {
            w.write_record(r).map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
        self.files.push((name.into(), bytes));
        Ok(())
    }

    pub fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunEntry {
    pub command: String,
    pub config: String,
    pub config_digest: String,
    pub seed: u64,
    pub status: String,
    pub exit_code: i32,
    pub message: String,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub code_version: String,
    pub wall_time_seconds: f64,
    pub workers: usize,
    pub runs: Vec<RunEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact under `dir` and returns the manifest entries.
pub fn write_artifacts(dir: &Path, prefix: &str, artifacts: &Artifacts) -> Result<Vec<OutputEntry>, Failure> {
    let target = dir.join(prefix);
    std::fs::create_dir_all(&target).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", target.display())))?;
    artifacts
        .files
        .iter()
        .map(|(name, bytes)| {
            let path = target.join(name);
            std::fs::write(&path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
            let file = if prefix.is_empty() { name.clone() } else { format!("{prefix}/{name}") };
            Ok(OutputEntry { file, sha256: sha256_hex(bytes) })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let text = toml::to_string_pretty(manifest).map_err(|e| Failure::Runtime(format!("manifest: {e}")))?;
    std::fs::write(dir.join("manifest.toml"), text).map_err(|e| Failure::Runtime(format!("manifest: {e}")))
}

/// Minimal line plot: one polyline per series, log-scaled axes when asked.
pub fn svg_line_plot(title: &str, series: &[(&str, Vec<(f64, f64)>)], log_x: bool, log_y: bool) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let tx = |v: f64| if log_x { v.ln() } else { v };
    let ty = |v: f64| if log_y { v.ln() } else { v };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().map(|&(x, y)| (tx(x), ty(y))))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{pad}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n\
         <rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n",
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for (k, (name, s)) in series.iter().enumerate() {
        let path: Vec<String> = s
            .iter()
            .map(|&(x, y)| (tx(x), ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let c = colours[k % colours.len()];
        out += &format!("<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>\n", path.join(" "));
        out += &format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{c}\">{name}</text>\n",
            w - pad - 120.0,
            pad + 16.0 * (k as f64 + 1.0)
        );
    }
    out += "</svg>\n";
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let s = svg_line_plot("t", &[("a", vec![(1.0, 1.0), (10.0, 5.0)]), ("b", vec![(1.0, 2.0), (10.0, 3.0)])], true, false);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn csv_rows_serialize_with_header() {
        #[derive(Serialize)]
        struct Row {
            k: u64,
            height: f64,
        }
        let mut a = Artifacts::default();
        a.csv("s.csv", &[Row { k: 4, height: 8.0 }]).unwrap();
        assert_eq!(String::from_utf8(a.files[0].1.clone()).unwrap(), "k,height\n4,8.0\n");
    }
}
