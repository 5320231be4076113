//! CSV tables with fixed formatting, so equal inputs give equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Seventeen significant digits; infinities render as `inf`.
pub fn format_value(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `out.csv` with suffix `_ridge` becomes `out_ridge.csv`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed() {
        assert_eq!(format_value(1.0), "1.0000000000000000e0");
        assert_eq!(format_value(f64::INFINITY), "inf");
        assert_eq!(format_value(-0.125), "-1.2500000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(format_value(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn render_uses_lf_and_header() {
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec![1.0, f64::INFINITY]);
        assert_eq!(t.render(), "a,b\n1.0000000000000000e0,inf\n");
        assert_eq!(t.column("b"), Some(vec![f64::INFINITY]));
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(
            sidecar(Path::new("d/fig4.csv"), "_ridge"),
            PathBuf::from("d/fig4_ridge.csv")
        );
        assert_eq!(sidecar(Path::new("out"), "_x"), PathBuf::from("out_x"));
    }
}
