use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use confvar_core::artifacts::{write_artifacts, Artifacts};
use confvar_core::gauss_param::sample::{write_samples_csv, write_slice_obj};
use confvar_core::gauss_param::GaussParam;
use confvar_core::pipeline::hypersurface_samples;
use confvar_core::surface::{christoffels, solve_mu};
use confvar_core::{CoefficientSource, Error, JobConfig, Report};
use serde_json::json;

use crate::{Common, Format, What};

pub const REPORT_FILE: &str = "report.json";

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_GENERATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// The data violate a hypothesis of the construction.
    Generation(Error),
    /// The artifacts load but violate a hypothesis verification needs.
    Verification(Error),
    Other(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Generation(_) => EXIT_GENERATION,
            Failure::Verification(_) => EXIT_VERIFY,
            Failure::Other(_) => EXIT_IO,
        }
    }

    pub fn to_json(&self) -> String {
        let v = match self {
            Failure::Generation(e) | Failure::Verification(e) => json!({
                "error": e.code(),
                "message": e.to_string(),
                "exit_code": self.exit_code(),
            }),
            Failure::Other(e) => json!({
                "error": "io_or_config",
                "message": format!("{e:#}"),
                "exit_code": self.exit_code(),
            }),
        };
        v.to_string()
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type CmdResult = Result<u8, Failure>;

/// Maps a core error of a generation step.
fn generation(e: Error) -> Failure {
    if e.is_generation_failure() {
        Failure::Generation(e)
    } else {
        Failure::Other(e.into())
    }
}

/// Reads a job file; `M` given as a relative CSV path is resolved against
/// the directory of the file.
pub fn load_config(path: &Path) -> anyhow::Result<JobConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config: JobConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    if let CoefficientSource::Csv(p) = &config.m {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                config.m = CoefficientSource::Csv(dir.join(p));
            }
        }
    }
    Ok(config)
}

fn with_overrides(mut config: JobConfig, common: &Common) -> JobConfig {
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(o) = &common.out {
        config.output = o.clone();
    }
    config
}

/// Artifact directory from `--out` or the configuration.
fn artifact_dir(common: &Common) -> anyhow::Result<PathBuf> {
    if let Some(o) = &common.out {
        return Ok(o.clone());
    }
    match &common.config {
        Some(c) => Ok(load_config(c)?.output),
        None => Err(anyhow!("give --out or --config to locate the artifacts")),
    }
}

/// Artifacts plus the configuration to run with: `--config` if given,
/// otherwise the one stored with the artifacts.
fn load(common: &Common) -> anyhow::Result<(PathBuf, Artifacts, JobConfig)> {
    let dir = artifact_dir(common)?;
    let artifacts = Artifacts::load(&dir).with_context(|| format!("loading artifacts from {}", dir.display()))?;
    let config = match &common.config {
        Some(c) => load_config(c)?,
        None => artifacts.config.clone(),
    };
    Ok((dir.clone(), artifacts, with_overrides(config, common)))
}

pub fn generate(common: &Common) -> CmdResult {
    let path = common.config.as_ref().ok_or_else(|| anyhow!("generate needs --config"))?;
    let config = with_overrides(load_config(path)?, common);
    let g = confvar_core::generate(&config).map_err(generation)?;
    let files = write_artifacts(&config.output, &config, &g)
        .with_context(|| format!("writing artifacts to {}", config.output.display()))?;
    let summary = json!({
        "out": config.output,
        "files": files,
        "grid": g.spec(),
        "trimmed": g.extraction.trimmed,
        "samples": g.samples.len(),
        "regular_samples": g.samples.iter().filter(|s| s.regular).count(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?);
    Ok(EXIT_PASS)
}

pub fn verify(common: &Common, tol_scale: f64) -> CmdResult {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(anyhow!("--tol-scale must be positive, got {tol_scale}").into());
    }
    let (dir, artifacts, config) = load(common)?;
    let report = confvar_core::verify(&config, artifacts.input(), tol_scale).map_err(|e| {
        if e.is_generation_failure() {
            Failure::Verification(e)
        } else {
            Failure::Other(e.into())
        }
    })?;
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    print_summary(&report);
    Ok(if report.pass { EXIT_PASS } else { EXIT_VERIFY })
}

fn read_report(dir: &Path) -> anyhow::Result<Report> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_summary(report: &Report) {
    println!("{:<48} {:>6} {:>12} {:>12} {:>12}", "check", "status", "residual", "tolerance", "constant");
    for c in &report.checks {
        let status = match (c.pass, c.mandatory) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "info",
        };
        let constant = c.order_constant.map_or("-".to_string(), |k| format!("{k:.3e}"));
        println!(
            "{:<48} {:>6} {:>12.3e} {:>12.3e} {:>12}",
            c.name, status, c.max_residual, c.tolerance, constant
        );
    }
    println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
}

pub fn report(common: &Common) -> CmdResult {
    let report = read_report(&artifact_dir(common)?)?;
    print_summary(&report);
    Ok(if report.pass { EXIT_PASS } else { EXIT_VERIFY })
}

fn sink(dest: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match dest {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn unsupported(what: What, format: Format) -> Failure {
    anyhow!("cannot export {what:?} as {format:?}").into()
}

pub fn export(
    common: &Common,
    what: What,
    format: Option<Format>,
    theta: Option<Vec<f64>>,
    dest: Option<PathBuf>,
) -> CmdResult {
    let format = format.unwrap_or(match what {
        What::Samples | What::Pair | What::Mu => Format::Csv,
        What::Slice => Format::Obj,
        What::Report => Format::Json,
    });
    if what == What::Report {
        let report = read_report(&artifact_dir(common)?)?;
        let mut w = sink(&dest)?;
        match format {
            Format::Json => w.write_all(report.to_json().as_bytes()).map_err(anyhow::Error::from)?,
            Format::Csv => {
                writeln!(w, "name,pass,mandatory,max_residual,tolerance,order").map_err(anyhow::Error::from)?;
                for c in &report.checks {
                    writeln!(
                        w,
                        "\"{}\",{},{},{},{},{}",
                        c.name, c.pass, c.mandatory, c.max_residual, c.tolerance, c.order
                    )
                    .map_err(anyhow::Error::from)?;
                }
            }
            Format::Obj => return Err(unsupported(what, format)),
        }
        w.flush().map_err(anyhow::Error::from)?;
        return Ok(EXIT_PASS);
    }

    let (_, artifacts, config) = load(common)?;
    let core = |r: confvar_core::Result<()>| r.map_err(|e| Failure::Other(e.into()));
    match (what, format) {
        (What::Pair, Format::Csv) => core(artifacts.pair.write_csv(sink(&dest)?))?,
        (What::Pair, Format::Json) => {
            let mut w = sink(&dest)?;
            serde_json::to_writer_pretty(&mut w, &artifacts.pair.to_file()).map_err(anyhow::Error::from)?;
            writeln!(w).map_err(anyhow::Error::from)?;
        }
        (What::Mu, Format::Csv) => {
            let mu = solve_mu(&christoffels(&artifacts.patch), config.kind);
            core(mu.mu.write_csv(sink(&dest)?))?;
        }
        (What::Samples | What::Slice, _) => {
            let conn = christoffels(&artifacts.patch);
            let mu = solve_mu(&conn, config.kind);
            let gauss = GaussParam::new(&artifacts.pair)
                .and_then(|g| g.with_mu(mu.mu))
                .map_err(generation)?;
            match (what, format) {
                (What::Samples, Format::Csv) => {
                    let samples = hypersurface_samples(&gauss, &config).map_err(generation)?;
                    core(write_samples_csv(&samples, sink(&dest)?))?;
                }
                (What::Samples, Format::Json) => {
                    let samples = hypersurface_samples(&gauss, &config).map_err(generation)?;
                    let mut w = sink(&dest)?;
                    serde_json::to_writer_pretty(&mut w, &samples).map_err(anyhow::Error::from)?;
                    writeln!(w).map_err(anyhow::Error::from)?;
                }
                (What::Slice, Format::Obj) => {
                    let theta = theta.unwrap_or_else(|| vec![1.0; gauss.fiber_dim()]);
                    if theta.len() != gauss.fiber_dim() {
                        return Err(anyhow!("--theta needs {} angles, got {}", gauss.fiber_dim(), theta.len()).into());
                    }
                    let mut w = sink(&dest)?;
                    core(write_slice_obj(&gauss, &theta, &mut w))?;
                    w.flush().map_err(anyhow::Error::from)?;
                }
                _ => return Err(unsupported(what, format)),
            }
        }
        _ => return Err(unsupported(what, format)),
    }
    Ok(EXIT_PASS)
}
