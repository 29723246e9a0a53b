//! Flat-file serialization of sample sets and coverage curves: UTF-8 CSV
//! with '#'-prefixed metadata comment lines above the header (config hash
//! and seed are always embedded, so any output file can be reproduced), and
//! JSON sidecars carrying the full configuration snapshot.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;
use crate::montecarlo::{CcdfCurve, Provenance, SinrSampleSet};
use crate::numerics::linear_to_db;

/// Infinity-aware float formatting: the +infinity SINR sentinel serializes
/// as "inf" rather than a lossy large number.
fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        x.to_string()
    }
}

fn fmt_db(linear: f64) -> String {
    if linear > 0.0 {
        fmt_f64(if linear.is_infinite() {
            f64::INFINITY
        } else {
            linear_to_db(linear)
        })
    } else {
        "-inf".to_string()
    }
}

fn metadata_block(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

/// One sample per row: drop_index, sinr_linear, sinr_db.
pub fn samples_to_csv(set: &SinrSampleSet) -> String {
    let mut out = metadata_block(&[
        ("config_hash", set.config.config_hash()),
        ("seed", set.seed.to_string()),
        ("model", set.model.as_str().to_string()),
        ("interferers", set.interferers.as_str().to_string()),
        ("sinr_mode", set.sinr_mode.as_str().to_string()),
        ("n_drops", set.n_drops.to_string()),
    ]);
    out.push_str("drop_index,sinr_linear,sinr_db\n");
    for (i, &s) in set.samples.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", fmt_f64(s), fmt_db(s)));
    }
    out
}

/// Full config snapshot plus the sample vector ("inf" for sentinels).
pub fn samples_to_json(set: &SinrSampleSet) -> Result<String> {
    let samples: Vec<Value> = set
        .samples
        .iter()
        .map(|&s| {
            if s.is_finite() {
                json!(s)
            } else {
                json!("inf")
            }
        })
        .collect();
    let doc = json!({
        "config": set.config,
        "config_hash": set.config.config_hash(),
        "model": set.model.as_str(),
        "interferers": set.interferers.as_str(),
        "sinr_mode": set.sinr_mode.as_str(),
        "seed": set.seed,
        "n_drops": set.n_drops,
        "samples": samples,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("static document structure") + "\n")
}

/// Coverage curve rows: t_db, t_linear, coverage, stderr. The standard
/// error is the binomial estimate for empirical curves and 0 for analytic
/// ones. Extra metadata pairs are emitted after the standard ones.
pub fn ccdf_to_csv(curve: &CcdfCurve, extra_meta: &[(&str, String)]) -> String {
    let mut pairs: Vec<(&str, String)> = vec![
        ("provenance", curve.provenance.as_str().to_string()),
        ("n_samples", curve.n_samples.to_string()),
    ];
    pairs.extend(extra_meta.iter().map(|(k, v)| (*k, v.clone())));
    let mut out = metadata_block(&pairs);
    out.push_str("t_db,t_linear,coverage,stderr\n");
    for (&t, &p) in curve.thresholds.iter().zip(curve.coverage.iter()) {
        let se = match curve.provenance {
            Provenance::Empirical if curve.n_samples > 0 => {
                (p * (1.0 - p) / curve.n_samples as f64).sqrt()
            }
            _ => 0.0,
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_db(t),
            fmt_f64(t),
            fmt_f64(p),
            fmt_f64(se)
        ));
    }
    out
}

/// JSON form of a coverage curve with caller-supplied metadata fields.
pub fn ccdf_to_json(curve: &CcdfCurve, extra: &[(&str, Value)]) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("provenance".to_string(), json!(curve.provenance.as_str()));
    doc.insert("n_samples".to_string(), json!(curve.n_samples));
    doc.insert("thresholds".to_string(), json!(curve.thresholds));
    doc.insert("coverage".to_string(), json!(curve.coverage));
    for (k, v) in extra {
        doc.insert((*k).to_string(), v.clone());
    }
    Ok(serde_json::to_string_pretty(&Value::Object(doc)).expect("plain document") + "\n")
}

/// Writes text to a path, creating parent directories as needed.
pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}
