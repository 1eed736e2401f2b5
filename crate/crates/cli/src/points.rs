use std::path::Path;

use serde::Serialize;
use statgeo_core::sampling;

use crate::args::PointArgs;
use crate::report::CliError;

/// Where the points of a run came from, echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSource {
    Listed { count: usize },
    Sampled { count: usize, seed: u64 },
}

pub fn read_points(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read points file {}: {e}", path.display())))?;
    let points: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("points file {}: {e}", path.display())))?;
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(CliError::config(format!("points[{i}]: expected {dim} coordinates, got {}", p.len())));
        }
    }
    Ok(points)
}

/// Listed points, or `count` seeded draws from `domain` that pass `accept`.
pub fn resolve<F>(args: &PointArgs, dim: usize, domain: &[[f64; 2]], accept: F) -> Result<(Vec<Vec<f64>>, PointSource), CliError>
where
    F: Fn(&[f64]) -> bool,
{
    match (&args.points, args.sample) {
        (Some(path), _) => {
            let points = read_points(path, dim)?;
            let count = points.len();
            Ok((points, PointSource::Listed { count }))
        }
        (None, Some(count)) => {
            let seed = args.seed.ok_or_else(|| CliError::config("--sample requires --seed"))?;
            let mut rng = sampling::rng(seed);
            let points = sampling::accepted_points(&mut rng, domain, count, accept).map_err(CliError::from_core)?;
            Ok((points, PointSource::Sampled { count, seed }))
        }
        (None, None) => Err(CliError::config("one of --points or --sample is required")),
    }
}
