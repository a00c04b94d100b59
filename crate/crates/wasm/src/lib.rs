//! WebAssembly bindings for the browser demo in `www/`.
//!
//! All arrays cross the boundary flattened: points as `x, y, z` triples and
//! cells as `theta1, theta2, alpha1, alpha2` quadruples.

use hyperuniform::partition::ZonalPartition;
use hyperuniform::processes::{Process, ProcessSpec};
use hyperuniform::variance::semi_analytic_variance;
use wasm_bindgen::prelude::*;

/// Point pairs per cell for the jittered curve; keeps redraws interactive.
const CURVE_PAIRS: usize = 200;

fn spec(process: &str, size: usize) -> Result<ProcessSpec, JsError> {
    let spec = match process {
        "iid" => ProcessSpec::Iid { d: 2, n: size },
        "spherical" => ProcessSpec::Spherical { n: size },
        "harmonic" => ProcessSpec::Harmonic { d: 2, l: size },
        "jittered" => ProcessSpec::Jittered { n: size },
        other => return Err(JsError::new(&format!("unknown process '{other}'"))),
    };
    spec.validate().map_err(js)?;
    Ok(spec)
}

fn js(e: hyperuniform::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Number of points a process of this size produces.
#[wasm_bindgen]
pub fn point_count(process: &str, size: usize) -> Result<usize, JsError> {
    spec(process, size)?.n_points().map_err(js)
}

/// One sample on S², flattened.
#[wasm_bindgen]
pub fn sample_points(process: &str, size: usize, seed: u64, replicate: u64) -> Result<Vec<f64>, JsError> {
    let sample = Process::new(spec(process, size)?).map_err(js)?.sample(seed, replicate).map_err(js)?;
    Ok(sample.points.into_iter().flat_map(|p| p.into_coords()).collect())
}

/// Formula number variance at `steps` cap angles evenly spaced in `(0, pi)`.
#[wasm_bindgen]
pub fn variance_curve(process: &str, size: usize, steps: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let spec = spec(process, size)?;
    (1..=steps)
        .map(|k| {
            let phi = std::f64::consts::PI * k as f64 / (steps + 1) as f64;
            semi_analytic_variance(spec, phi, CURVE_PAIRS, seed).map(|e| e.value).map_err(js)
        })
        .collect()
}

/// Cells of the `n`-cell equal-area partition, flattened.
#[wasm_bindgen]
pub fn partition_cells(n: usize) -> Result<Vec<f64>, JsError> {
    let p = ZonalPartition::new(n).map_err(js)?;
    Ok(p.cells()
        .iter()
        .flat_map(|c| [c.theta_range.0, c.theta_range.1, c.azimuth_range.0, c.azimuth_range.1])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattened_shapes() {
        assert_eq!(sample_points("harmonic", 2, 1, 0).ok().unwrap().len(), 27);
        assert_eq!(partition_cells(12).ok().unwrap().len(), 48);
        let curve = variance_curve("iid", 10, 5, 0).ok().unwrap();
        // i.i.d. variance n sigma (1 - sigma) peaks at the hemisphere
        assert!((curve[2] - 2.5).abs() < 1e-12);
        assert_eq!(point_count("harmonic", 3).ok(), Some(16));
    }
}
