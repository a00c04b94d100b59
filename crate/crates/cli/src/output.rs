//! Rendering of results as CSV or JSON.
//!
//! CSV files start with a `# config: {...}` comment holding the resolved
//! configuration; JSON files carry it as a `config` object. Nothing
//! time-dependent is written, so identical configurations give identical
//! bytes.

use crate::config::{ExperimentConfig, Format};
use crate::CliError;
use hyperuniform::partition::ZonalPartition;
use hyperuniform::processes::PointSample;
use hyperuniform::variance::{GridPoint, RegimeResult, VarianceReport};
use serde::Serialize;
use serde_json::json;

/// One row of the variance schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub process: &'static str,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub phi: f64,
    pub t: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "R")]
    pub r: Option<usize>,
    pub seed: u64,
    pub v_hat: Option<f64>,
    pub std_err: Option<f64>,
    pub v_semi: Option<f64>,
    pub v_ref: Option<f64>,
}

impl From<&VarianceReport> for VarianceRow {
    fn from(r: &VarianceReport) -> Self {
        Self {
            process: r.process.name(),
            d: r.d,
            n: r.n_points,
            l: r.process.degree(),
            phi: r.phi,
            t: r.t,
            m: Some(r.replicates),
            r: Some(r.centers_per_replicate),
            seed: r.seed,
            v_hat: Some(r.v_hat),
            std_err: Some(r.std_err),
            v_semi: r.v_semi,
            v_ref: r.v_reference,
        }
    }
}

fn grid_row(g: &GridPoint, result: &RegimeResult) -> VarianceRow {
    let mc = g.v_hat.is_some();
    VarianceRow {
        process: g.process.name(),
        d: g.process.dim(),
        n: g.n_points,
        l: g.process.degree(),
        phi: g.phi,
        t: g.t,
        m: mc.then_some(result.config.replicates),
        r: mc.then_some(result.config.centers),
        seed: result.config.seed,
        v_hat: g.v_hat,
        std_err: g.std_err,
        v_semi: g.v_semi,
        v_ref: g.v_reference,
    }
}

#[derive(Serialize)]
struct PartitionRow {
    index: usize,
    theta1: f64,
    theta2: f64,
    alpha1: f64,
    alpha2: f64,
    area: f64,
    diameter: f64,
}

fn csv_error(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("CSV encoding failed: {e}"))
}

fn csv_document<S: Serialize>(comments: &[String], header: Option<&[String]>, rows: &[S]) -> Result<String, CliError> {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new().has_headers(header.is_none()).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).map_err(csv_error)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    out.push_str(&String::from_utf8(bytes).map_err(csv_error)?);
    Ok(out)
}

fn json_document(config: &ExperimentConfig, body: serde_json::Value) -> String {
    let mut doc = json!({ "config": config });
    if let (Some(map), serde_json::Value::Object(extra)) = (doc.as_object_mut(), body) {
        map.extend(extra);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON encoding");
    s.push('\n');
    s
}

fn config_comment(config: &ExperimentConfig) -> String {
    format!("config: {}", config.to_json())
}

fn coordinate_names(d: usize) -> Vec<String> {
    const NAMES: [&str; 4] = ["x", "y", "z", "w"];
    if d + 1 <= NAMES.len() {
        NAMES[..=d].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=d + 1).map(|i| format!("x{i}")).collect()
    }
}

pub fn render_sample(sample: &PointSample, config: &ExperimentConfig, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let rows: Vec<&[f64]> = sample.points.iter().map(|p| p.coords()).collect();
            csv_document(&[config_comment(config)], Some(&coordinate_names(sample.d)), &rows)
        }
        Format::Json => Ok(json_document(
            config,
            json!({
                "process": sample.process,
                "d": sample.d,
                "seed": sample.seed,
                "replicate": sample.replicate,
                "points": sample.points.iter().map(|p| p.coords()).collect::<Vec<_>>(),
            }),
        )),
    }
}

pub fn render_variance(report: &VarianceReport, config: &ExperimentConfig, format: Format) -> Result<String, CliError> {
    let row = VarianceRow::from(report);
    match format {
        Format::Csv => csv_document(&[config_comment(config)], None, &[row]),
        Format::Json => Ok(json_document(config, json!({ "results": [row] }))),
    }
}

pub fn render_regime(result: &RegimeResult, config: &ExperimentConfig, format: Format) -> Result<String, CliError> {
    let rows: Vec<VarianceRow> = result.grid.iter().map(|g| grid_row(g, result)).collect();
    let fit = json!({
        "fitted_exponent": result.fitted_exponent,
        "intercept": result.fit_intercept,
        "residual": result.fit_residual,
    });
    match format {
        Format::Csv => {
            let comments = [config_comment(config), format!("fit: {fit}")];
            csv_document(&comments, None, &rows)
        }
        Format::Json => Ok(json_document(
            config,
            json!({
                "results": rows,
                "profile": result.grid.iter().map(|g| g.profile).collect::<Vec<_>>(),
                "fit": fit,
            }),
        )),
    }
}

pub fn render_partition(partition: &ZonalPartition, config: &ExperimentConfig, format: Format) -> Result<String, CliError> {
    let rows: Vec<PartitionRow> = partition
        .cells()
        .iter()
        .map(|c| PartitionRow {
            index: c.index,
            theta1: c.theta_range.0,
            theta2: c.theta_range.1,
            alpha1: c.azimuth_range.0,
            alpha2: c.azimuth_range.1,
            area: c.area(),
            diameter: c.diameter(),
        })
        .collect();
    match format {
        Format::Csv => csv_document(&[config_comment(config)], None, &rows),
        Format::Json => Ok(json_document(config, json!({ "cells": rows }))),
    }
}
