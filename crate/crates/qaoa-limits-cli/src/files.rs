//! Angle files, graph files, degree distributions and report output.

use anyhow::{bail, Context, Result};
use qaoa_limits::infinite_limit::DegreeDistribution;
use qaoa_limits::instances::GraphInstance;
use qaoa_limits::Angles;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// On-disk angle file `{p, betas, gammas}`; any other fields are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleFile {
    pub p: usize,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl AngleFile {
    pub fn from_angles(a: &Angles) -> Self {
        Self {
            p: a.p(),
            betas: a.betas.clone(),
            gammas: a.gammas.clone(),
        }
    }
}

pub fn read_angles(path: &Path) -> Result<Angles> {
    let text = fs::read_to_string(path).with_context(|| format!("reading angle file {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing angle file {}", path.display()))?;
    // Reports that embed an angle file under `angles` are accepted too.
    if value.get("p").is_none() {
        if let Some(inner) = value.get_mut("angles") {
            value = inner.take();
        }
    }
    let file: AngleFile =
        serde_json::from_value(value).with_context(|| format!("parsing angle file {}", path.display()))?;
    if file.betas.len() != file.p || file.gammas.len() != file.p {
        bail!(
            "angle file {}: p = {} but {} betas and {} gammas",
            path.display(),
            file.p,
            file.betas.len(),
            file.gammas.len()
        );
    }
    Ok(Angles::new(file.betas, file.gammas)?)
}

pub fn read_graph(path: &Path) -> Result<GraphInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading graph file {}", path.display()))?;
    let g: GraphInstance =
        serde_json::from_str(&text).with_context(|| format!("parsing graph file {}", path.display()))?;
    g.validate()?;
    Ok(g)
}

/// Parses `d1:q1,d2:q2,...`.
pub fn parse_distribution(spec: &str) -> Result<DegreeDistribution> {
    let mut degrees = Vec::new();
    let mut probabilities = Vec::new();
    for part in spec.split(',') {
        let (d, q) = part
            .split_once(':')
            .with_context(|| format!("distribution entry {part:?} is not of the form degree:probability"))?;
        degrees.push(d.trim().parse::<f64>().with_context(|| format!("bad degree {d:?}"))?);
        probabilities.push(q.trim().parse::<f64>().with_context(|| format!("bad probability {q:?}"))?);
    }
    Ok(DegreeDistribution::new(degrees, probabilities)?)
}

/// Writes `bytes` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Serializes CSV records with a header row.
pub fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner().context("flushing CSV")?)
}
