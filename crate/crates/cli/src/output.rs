use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use lasernoise_core::spectra::Spectrum;

/// Destination for CSV tables: files in a directory, or standard output.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self { dir })
    }

    fn open(&self, name: &str) -> Result<Box<dyn Write>> {
        Ok(match &self.dir {
            Some(d) => {
                let path = d.join(name);
                Box::new(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
            }
            None => Box::new(io::stdout().lock()),
        })
    }

    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut w = self.open(name)?;
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_spectrum(&self, name: &str, spec: &Spectrum) -> Result<()> {
        let mut w = self.open(name)?;
        spec.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Formats an optional value, leaving the field empty when absent.
pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
