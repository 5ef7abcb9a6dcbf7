use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Unit line shared by every file in the dimensionless variables.
pub const DIMENSIONLESS: &str = "lengths in a0 = sqrt(hbar/(m omega_rho)); time tau = omega_rho t; \
energies in hbar omega_rho, twice the Schrodinger energy (mu is the eigenvalue); Q = 8 pi N |a| / a0; \
u normalized to 1 over the three-dimensional volume";

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvFile {
    name: String,
    path: Option<PathBuf>,
    out: Box<dyn Write>,
}

impl CsvFile {
    /// Creates `path` (and its parent directories), or writes to stdout
    /// when `path` is `None`, and emits the comment lines and the column
    /// header.
    pub fn create(path: Option<&Path>, title: &str, units: &str, notes: &[String], header: &str) -> Result<Self> {
        let (name, out): (String, Box<dyn Write>) = match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                (p.display().to_string(), Box::new(BufWriter::new(file)))
            }
            None => ("stdout".to_string(), Box::new(BufWriter::new(std::io::stdout()))),
        };
        let mut csv = Self {
            name,
            path: path.map(Path::to_path_buf),
            out,
        };
        csv.line(&format!("# {title}"))?;
        csv.line(&format!("# units: {units}"))?;
        for n in notes {
            csv.line(&format!("# {n}"))?;
        }
        csv.line(header)?;
        Ok(csv)
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").with_context(|| format!("writing {}", self.name))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.line(&fields.join(","))
    }

    pub fn finish(mut self) -> Result<Option<PathBuf>> {
        self.out.flush().with_context(|| format!("writing {}", self.name))?;
        Ok(self.path)
    }
}

/// `base` with its extension replaced by `suffix`.
pub fn sibling(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    base.with_file_name(format!("{stem}{suffix}"))
}
