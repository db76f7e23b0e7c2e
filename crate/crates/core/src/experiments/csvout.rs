//! CSV output with `#`-prefixed metadata headers. Files are assembled in
//! memory and written in one call, and floats use the shortest round-trip
//! rendering, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::ExperimentConfig;

pub struct CsvDoc {
    buf: String,
}

impl CsvDoc {
    pub fn new(experiment: &str, cfg: &ExperimentConfig) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# experiment={experiment}");
        let _ = writeln!(buf, "# seed={}", cfg.seed);
        let _ = writeln!(buf, "# config_hash={:016x}", cfg.hash());
        let _ = writeln!(buf, "# version={}", env!("CARGO_PKG_VERSION"));
        CsvDoc { buf }
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        let _ = writeln!(self.buf, "# {text}");
        self
    }

    pub fn header(&mut self, columns: &[&str]) -> &mut Self {
        let _ = writeln!(self.buf, "{}", columns.join(","));
        self
    }

    pub fn row(&mut self, fields: &[String]) -> &mut Self {
        let _ = writeln!(self.buf, "{}", fields.join(","));
        self
    }

    pub fn write_to(&self, path: &Path) -> Result<PathBuf> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &self.buf)?;
        Ok(path.to_path_buf())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes a nodal field as `x,y,value` rows over the full grid.
pub fn field_csv(
    experiment: &str,
    cfg: &ExperimentConfig,
    mesh: &crate::mesh::Mesh,
    full_nodal: &[f64],
    path: &Path,
) -> Result<PathBuf> {
    let mut doc = CsvDoc::new(experiment, cfg);
    doc.header(&["x", "y", "value"]);
    for id in 0..mesh.num_nodes() {
        let (x, y) = mesh.node_coords(id);
        doc.row(&[fmt_f64(x), fmt_f64(y), fmt_f64(full_nodal[id])]);
    }
    doc.write_to(path)
}
