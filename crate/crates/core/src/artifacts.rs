//! On-disk layout of a generated job.
//!
//! ```text
//! <out>/config.json     resolved job configuration
//! <out>/solutions.json  PDE solutions k on the full grid
//! <out>/patch.json      surface g (versioned)
//! <out>/pair.json       special pair (h, r) (versioned)
//! <out>/mu.csv          conformal factor mu on the pair grid
//! <out>/samples.csv     hypersurface sample cloud
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::JobConfig;
use crate::error::{Error, Result};
use crate::gauss_param::sample::write_samples_csv;
use crate::pair::SpecialPair;
use crate::pde::VectorGrid;
use crate::pipeline::Generated;
use crate::surface::SurfacePatch;

pub const CONFIG_FILE: &str = "config.json";
pub const SOLUTIONS_FILE: &str = "solutions.json";
pub const PATCH_FILE: &str = "patch.json";
pub const PAIR_FILE: &str = "pair.json";
pub const MU_FILE: &str = "mu.csv";
pub const SAMPLES_FILE: &str = "samples.csv";

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| missing(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

fn missing(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        Error::Config(format!("missing artifact {}", path.display()))
    } else {
        Error::Io(e)
    }
}

/// Writes every artifact of `generated` into `dir`, creating it if needed.
/// Returns the paths written.
pub fn write_artifacts(dir: &Path, config: &JobConfig, generated: &Generated) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let path = |name: &str| dir.join(name);
    write_json(&path(CONFIG_FILE), config)?;
    write_json(&path(SOLUTIONS_FILE), &generated.solutions)?;
    write_json(&path(PATCH_FILE), &generated.patch.to_file())?;
    write_json(&path(PAIR_FILE), &generated.pair().to_file())?;
    let mut w = BufWriter::new(File::create(path(MU_FILE))?);
    generated.mu.mu.write_csv(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(path(SAMPLES_FILE))?);
    write_samples_csv(&generated.samples, &mut w)?;
    w.flush()?;
    Ok([CONFIG_FILE, SOLUTIONS_FILE, PATCH_FILE, PAIR_FILE, MU_FILE, SAMPLES_FILE]
        .iter()
        .map(|n| path(n))
        .collect())
}

/// The artifacts verification needs.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub config: JobConfig,
    pub patch: SurfacePatch,
    pub pair: SpecialPair,
    pub solutions: Option<VectorGrid>,
}

impl Artifacts {
    /// Loads `dir`. The solutions file is optional; the others are required.
    pub fn load(dir: &Path) -> Result<Artifacts> {
        let config: JobConfig = read_json(&dir.join(CONFIG_FILE))?;
        let patch = SurfacePatch::from_file(read_json(&dir.join(PATCH_FILE))?)?;
        let pair = SpecialPair::from_file(read_json(&dir.join(PAIR_FILE))?)?;
        let sol_path = dir.join(SOLUTIONS_FILE);
        let solutions = if sol_path.exists() {
            Some(read_json(&sol_path)?)
        } else {
            None
        };
        if !patch.spec().same_as(pair.spec()) {
            return Err(Error::GridMismatch);
        }
        Ok(Artifacts {
            config,
            patch,
            pair,
            solutions,
        })
    }

    pub fn input(&self) -> crate::verify::VerifyInput<'_> {
        crate::verify::VerifyInput {
            patch: &self.patch,
            pair: &self.pair,
            solutions: self.solutions.as_ref(),
        }
    }
}
