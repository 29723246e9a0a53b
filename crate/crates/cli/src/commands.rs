//! Subcommand implementations. Every command computes all of its outputs in
//! memory first and only then writes them, so a failure in any computation
//! leaves no partial files behind; exit code 0 means every requested output
//! is on disk.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use pilotcell::analytic::argmax_throughput;
use pilotcell::io::{ccdf_to_csv, ccdf_to_json, samples_to_csv, samples_to_json, write_file};
use pilotcell::montecarlo::{run_drops, CcdfCurve, InterfererMode, SinrMode};
use pilotcell::{
    analytic_ccdf_curve, db_to_linear, solve_min_delta, spectral_efficiency_analytic, y_of_delta,
    DeploymentModel, MinDeltaResult, SystemConfig,
};

use crate::appconfig::ExperimentSpec;
use crate::plot::{emit_svg, SvgCurve, SvgStyle};

/// Staged outputs: name -> content, written in one pass at the end.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<PathBuf>, content: String) {
        self.files.push((name.into(), content));
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    /// Writes every staged file under `out_dir`, reporting each path on
    /// stdout.
    pub fn write_all(&self, out_dir: &Path) -> Result<()> {
        if self.files.is_empty() {
            bail!("nothing to write: the requested format set produced no outputs");
        }
        for (name, content) in &self.files {
            let path = out_dir.join(name);
            write_file(&path, content)
                .with_context(|| format!("cannot write {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

/// Figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Fig {
    pub fn parse(name: &str) -> Result<Fig> {
        match name {
            "fig2" => Ok(Fig::Fig2),
            "fig3" => Ok(Fig::Fig3),
            "fig4" => Ok(Fig::Fig4),
            "fig5" => Ok(Fig::Fig5),
            other => bail!("unknown figure preset {other:?}"),
        }
    }
}

/// "0.5" -> "0p5" for file names.
fn tag(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "p").replace('-', "m")
}

fn model_tag(model: DeploymentModel) -> &'static str {
    match model {
        DeploymentModel::RandomPpp => "random",
        DeploymentModel::Hexagonal => "hex",
        DeploymentModel::GuardRegion => "guard",
    }
}

fn curve_points(grid_db: &[f64], curve: &CcdfCurve) -> Vec<(f64, f64)> {
    grid_db
        .iter()
        .copied()
        .zip(curve.coverage.iter().copied())
        .collect()
}

fn standard_meta(spec: &ExperimentSpec) -> Vec<(&'static str, String)> {
    vec![
        ("config_hash", spec.config.config_hash()),
        ("seed", spec.seed.to_string()),
        ("model", spec.model.as_str().to_string()),
        ("interferers", spec.interferers.as_str().to_string()),
        ("sinr_mode", spec.sinr_mode.as_str().to_string()),
    ]
}

/// `simulate`: one Monte Carlo run; emits the raw samples, the empirical
/// CCDF over the threshold grid, and a JSON sidecar with the full
/// configuration and seed.
pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    log::info!(
        "simulating {} drops, model {}, interferers {}, SINR {}",
        spec.n_drops,
        spec.model.as_str(),
        spec.interferers.as_str(),
        spec.sinr_mode.as_str()
    );
    let set = run_drops(
        &spec.config,
        spec.model,
        spec.interferers,
        spec.sinr_mode,
        spec.n_drops,
        spec.seed,
    )?;
    let curve = set.ccdf(&spec.grid_linear())?;
    if spec.formats.csv {
        out.add("samples.csv", samples_to_csv(&set));
        out.add(
            "ccdf_empirical.csv",
            ccdf_to_csv(&curve, &standard_meta(spec)),
        );
    }
    if spec.formats.json {
        out.add("run.json", samples_to_json(&set)?);
    }
    if spec.formats.svg {
        let label = format!(
            "{} M={} eps={}",
            model_tag(spec.model),
            spec.config.m_antennas,
            spec.config.epsilon
        );
        out.add(
            "simulate.svg",
            emit_svg(
                &[SvgCurve {
                    label,
                    points: curve_points(&spec.grid_db, &curve),
                }],
                &SvgStyle {
                    title: "Empirical SINR coverage".to_string(),
                    x_label: "threshold T (dB)".to_string(),
                    y_label: "P[SINR > T]".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

/// `ccdf`: the closed-form coverage curve over the threshold grid.
pub fn cmd_ccdf(spec: &ExperimentSpec) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let cfg = &spec.config;
    let curve = analytic_ccdf_curve(&spec.grid_linear(), cfg).with_context(|| {
        format!(
            "closed-form CCDF evaluation failed (M={}, K={}, Delta={}, alpha={}, eps={})",
            cfg.m_antennas, cfg.k_users, cfg.delta, cfg.alpha, cfg.epsilon
        )
    })?;
    let meta = vec![("config_hash", cfg.config_hash())];
    if spec.formats.csv {
        out.add("ccdf_analytic.csv", ccdf_to_csv(&curve, &meta));
    }
    if spec.formats.json {
        out.add(
            "ccdf_analytic.json",
            ccdf_to_json(
                &curve,
                &[
                    ("config", json!(cfg)),
                    ("config_hash", json!(cfg.config_hash())),
                    ("thresholds_db", json!(spec.grid_db)),
                ],
            )?,
        );
    }
    if spec.formats.svg {
        out.add(
            "ccdf.svg",
            emit_svg(
                &[SvgCurve {
                    label: format!(
                        "M={} eps={} Delta={}",
                        cfg.m_antennas, cfg.epsilon, cfg.delta
                    ),
                    points: curve_points(&spec.grid_db, &curve),
                }],
                &SvgStyle {
                    title: "Closed-form SINR coverage".to_string(),
                    x_label: "threshold T (dB)".to_string(),
                    y_label: "P[SINR > T]".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

fn min_delta_report(cfg: &SystemConfig, gamma: f64, t_db: f64, sol: &MinDeltaResult) -> Value {
    json!({
        "config_hash": cfg.config_hash(),
        "m_antennas": cfg.m_antennas,
        "epsilon": cfg.epsilon,
        "gamma": gamma,
        "t_db": t_db,
        "delta_real": sol.delta_real,
        "delta_int": sol.delta_int,
        "y_at_delta": sol.y_at_delta,
        "feasible": sol.feasible,
        "grid_fallback": sol.grid_fallback,
    })
}

/// `min-delta`: the smallest reuse factor meeting a coverage target. An
/// unattainable target is a report state (`feasible: false`), not an error.
pub fn cmd_min_delta(spec: &ExperimentSpec) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let t_lin = db_to_linear(spec.t_db);
    let sol = solve_min_delta(spec.gamma, t_lin, &spec.config, spec.delta_max)?;
    if !sol.feasible {
        log::warn!(
            "coverage target {} at {} dB is not attainable with Delta <= {}",
            spec.gamma,
            spec.t_db,
            spec.delta_max
        );
    }
    let mut doc = min_delta_report(&spec.config, spec.gamma, spec.t_db, &sol);
    doc["config"] = json!(spec.config);
    doc["delta_max"] = json!(spec.delta_max);
    // The report is the artifact of this command, so it is emitted
    // regardless of the format list.
    out.add(
        "min_delta.json",
        serde_json::to_string_pretty(&doc).expect("plain document") + "\n",
    );
    Ok(out)
}

/// Splits a candidate reuse range by the training-overhead constraint
/// K*Delta <= T_C; the boundary case is valid (zero payload, zero
/// throughput).
fn partition_deltas(k_users: u32, t_coherence: f64, delta_max: u32) -> (Vec<u32>, Vec<u32>) {
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for d in 1..=delta_max {
        if f64::from(k_users) * f64::from(d) <= t_coherence {
            ok.push(d);
        } else {
            skipped.push(d);
        }
    }
    (ok, skipped)
}

struct ThroughputCurve {
    label: String,
    csv_name: String,
    csv: String,
    json: Value,
    points: Vec<(f64, f64)>,
}

/// One tau_S(Delta) sweep at fixed (config, T_C) with overhead-violating
/// points skipped (warning rows in the CSV, nulls in the JSON).
fn throughput_curve(
    config: &SystemConfig,
    delta_max: u32,
    csv_name: String,
    tau0_cache: &mut HashMap<u32, f64>,
) -> Result<ThroughputCurve> {
    let (valid, skipped) = partition_deltas(config.k_users, config.t_coherence, delta_max);
    if valid.is_empty() {
        bail!(
            "no feasible reuse factor: K*1 = {} already exceeds T_C = {}",
            config.k_users,
            config.t_coherence
        );
    }
    for &d in &skipped {
        log::warn!(
            "skipping Delta = {d}: training overhead K*Delta = {} exceeds T_C = {}",
            config.k_users * d,
            config.t_coherence
        );
    }
    let sweep = argmax_throughput(config.k_users, config.t_coherence, &valid, |d| {
        if let Some(&tau) = tau0_cache.get(&d) {
            return Ok(tau);
        }
        let cfg = SystemConfig {
            delta: f64::from(d),
            ..config.clone()
        };
        let tau = spectral_efficiency_analytic(&cfg)?;
        tau0_cache.insert(d, tau);
        Ok(tau)
    })?;

    let mut csv = format!(
        "# config_hash: {}\n# t_coherence: {}\n# m_antennas: {}\n# delta_star: {}\n",
        config.config_hash(),
        config.t_coherence,
        config.m_antennas,
        sweep.delta_star
    );
    csv.push_str("delta,tau_0,tau_s,status\n");
    let mut rows: Vec<Value> = Vec::new();
    let mut points = Vec::new();
    for d in 1..=delta_max {
        if let Some(p) = sweep.points.iter().find(|p| p.delta == d) {
            csv.push_str(&format!("{},{},{},ok\n", p.delta, p.tau_0, p.tau_s));
            rows.push(json!({
                "delta": p.delta,
                "tau_0": p.tau_0,
                "tau_s": p.tau_s,
                "status": "ok",
            }));
            points.push((f64::from(p.delta), p.tau_s));
        } else {
            csv.push_str(&format!("{d},,,skipped_overhead\n"));
            rows.push(json!({
                "delta": d,
                "tau_0": null,
                "tau_s": null,
                "status": "skipped_overhead",
            }));
        }
    }
    let label = format!("M={} T_C={}", config.m_antennas, config.t_coherence);
    Ok(ThroughputCurve {
        label,
        csv_name,
        csv,
        json: json!({
            "m_antennas": config.m_antennas,
            "t_coherence": config.t_coherence,
            "config_hash": config.config_hash(),
            "delta_star": sweep.delta_star,
            "points": rows,
        }),
        points,
    })
}

/// `throughput`: cell throughput against the reuse factor for the
/// configured (M, T_C), reporting the optimal Delta.
pub fn cmd_throughput(spec: &ExperimentSpec) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let delta_max = spec.delta_max.floor() as u32;
    let mut cache = HashMap::new();
    let curve = throughput_curve(
        &spec.config,
        delta_max,
        "throughput.csv".to_string(),
        &mut cache,
    )?;
    if spec.formats.csv {
        out.add(curve.csv_name.clone(), curve.csv.clone());
    }
    if spec.formats.json {
        let mut doc = curve.json.clone();
        doc["config"] = json!(spec.config);
        out.add(
            "throughput.json",
            serde_json::to_string_pretty(&doc).expect("plain document") + "\n",
        );
    }
    if spec.formats.svg {
        out.add(
            "throughput.svg",
            emit_svg(
                &[SvgCurve {
                    label: curve.label.clone(),
                    points: curve.points.clone(),
                }],
                &SvgStyle {
                    title: "Cell throughput vs pilot reuse".to_string(),
                    x_label: "pilot reuse factor Delta".to_string(),
                    y_label: "tau_S (bit/s/Hz per cell)".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

/// `figure`: reproduction presets. The swept parameters are pinned by the
/// preset; everything else (density, path loss, K, ...) comes from the
/// resolved configuration.
pub fn cmd_figure(
    spec: &ExperimentSpec,
    fig: Fig,
    drops_override: Option<u64>,
) -> Result<OutputSet> {
    match fig {
        Fig::Fig2 => figure2(spec, drops_override.unwrap_or(2000)),
        Fig::Fig3 => figure3(spec, drops_override.unwrap_or(10_000)),
        Fig::Fig4 => figure4(spec),
        Fig::Fig5 => figure5(spec),
    }
}

/// Deployment-model comparison: empirical coverage for the three models at
/// (M, eps) in {100, 500} x {0, 0.5}, with Delta = 3, sigma^2 = 0.
fn figure2(spec: &ExperimentSpec, n_drops: u64) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let grid = spec.grid_linear();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for model in [
        DeploymentModel::Hexagonal,
        DeploymentModel::GuardRegion,
        DeploymentModel::RandomPpp,
    ] {
        for (m, eps) in [(100u32, 0.0), (100, 0.5), (500, 0.0), (500, 0.5)] {
            let config = SystemConfig {
                m_antennas: m,
                epsilon: eps,
                delta: 3.0,
                sigma2: 0.0,
                ..spec.config.clone()
            };
            log::info!(
                "fig2: {} M={m} eps={eps}, {n_drops} drops",
                model_tag(model)
            );
            let set = run_drops(
                &config,
                model,
                InterfererMode::Voronoi,
                SinrMode::Instantaneous,
                n_drops,
                spec.seed,
            )?;
            let curve = set.ccdf(&grid)?;
            let name = format!("fig2_{}_M{}_eps{}.csv", model_tag(model), m, tag(eps));
            if spec.formats.csv {
                out.add(
                    name.clone(),
                    ccdf_to_csv(
                        &curve,
                        &[
                            ("config_hash", config.config_hash()),
                            ("seed", spec.seed.to_string()),
                            ("model", model.as_str().to_string()),
                        ],
                    ),
                );
            }
            summary.push(json!({
                "file": name,
                "model": model.as_str(),
                "m_antennas": m,
                "epsilon": eps,
                "thresholds_db": spec.grid_db,
                "coverage": curve.coverage,
            }));
            curves.push(SvgCurve {
                label: format!("{} M={m} eps={eps}", model_tag(model)),
                points: curve_points(&spec.grid_db, &curve),
            });
        }
    }
    if spec.formats.json {
        let doc = json!({
            "seed": spec.seed,
            "n_drops": n_drops,
            "curves": summary,
        });
        out.add(
            "fig2.json",
            serde_json::to_string_pretty(&doc).expect("plain document") + "\n",
        );
    }
    if spec.formats.svg {
        out.add(
            "fig2.svg",
            emit_svg(
                &curves,
                &SvgStyle {
                    title: "Coverage by deployment model".to_string(),
                    x_label: "threshold T (dB)".to_string(),
                    y_label: "P[SINR > T]".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

/// Closed form vs simulation: paired curves for eps in {0, 0.5, 1},
/// Delta in {1, 3}, M in {64, 500} under the exclusion-ball guard-region
/// setup the closed form models.
fn figure3(spec: &ExperimentSpec, n_drops: u64) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let grid = spec.grid_linear();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for m in [64u32, 500] {
        for delta in [1.0f64, 3.0] {
            for eps in [0.0f64, 0.5, 1.0] {
                let config = SystemConfig {
                    m_antennas: m,
                    delta,
                    epsilon: eps,
                    alzer_n: 5,
                    ..spec.config.clone()
                };
                log::info!("fig3: M={m} Delta={delta} eps={eps}, {n_drops} drops");
                let analytic = analytic_ccdf_curve(&grid, &config)?;
                let set = run_drops(
                    &config,
                    DeploymentModel::GuardRegion,
                    InterfererMode::ExclusionBall,
                    SinrMode::Instantaneous,
                    n_drops,
                    spec.seed,
                )?;
                let simulated = set.ccdf(&grid)?;
                let sup = analytic.sup_distance(&simulated);
                let combo = format!("M{}_d{}_eps{}", m, tag(delta), tag(eps));
                let sim_name = format!("fig3_sim_{combo}.csv");
                let ana_name = format!("fig3_analytic_{combo}.csv");
                if spec.formats.csv {
                    out.add(
                        sim_name.clone(),
                        ccdf_to_csv(
                            &simulated,
                            &[
                                ("config_hash", config.config_hash()),
                                ("seed", spec.seed.to_string()),
                            ],
                        ),
                    );
                    out.add(
                        ana_name.clone(),
                        ccdf_to_csv(&analytic, &[("config_hash", config.config_hash())]),
                    );
                }
                summary.push(json!({
                    "sim_file": sim_name,
                    "analytic_file": ana_name,
                    "m_antennas": m,
                    "delta": delta,
                    "epsilon": eps,
                    "sup_gap": sup,
                }));
                curves.push(SvgCurve {
                    label: format!("sim M={m} D={delta} e={eps}"),
                    points: curve_points(&spec.grid_db, &simulated),
                });
                curves.push(SvgCurve {
                    label: format!("ana M={m} D={delta} e={eps}"),
                    points: curve_points(&spec.grid_db, &analytic),
                });
            }
        }
    }
    if spec.formats.json {
        let doc = json!({
            "seed": spec.seed,
            "n_drops": n_drops,
            "pairs": summary,
        });
        out.add(
            "fig3.json",
            serde_json::to_string_pretty(&doc).expect("plain document") + "\n",
        );
    }
    if spec.formats.svg {
        out.add(
            "fig3.svg",
            emit_svg(
                &curves,
                &SvgStyle {
                    title: "Closed form vs simulation".to_string(),
                    x_label: "threshold T (dB)".to_string(),
                    y_label: "P[SINR > T]".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

/// Coverage against the reuse factor for T in {10, 15} dB, M in {64, 500},
/// eps = 0.5, plus the minimum-reuse report at the configured target.
fn figure4(spec: &ExperimentSpec) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let deltas: Vec<f64> = (0..=28).map(|i| 1.0 + 0.25 * f64::from(i)).collect();
    let mut curves = Vec::new();
    let mut reports = Vec::new();
    for m in [64u32, 500] {
        for t_db in [10.0f64, 15.0] {
            let config = SystemConfig {
                m_antennas: m,
                epsilon: 0.5,
                ..spec.config.clone()
            };
            let t_lin = db_to_linear(t_db);
            let mut rows = format!(
                "# config_hash: {}\n# t_db: {t_db}\n# m_antennas: {m}\n",
                config.config_hash()
            );
            rows.push_str("delta,coverage\n");
            let mut points = Vec::new();
            for &d in &deltas {
                let y = y_of_delta(d, t_lin, &config)?;
                rows.push_str(&format!("{d},{y}\n"));
                points.push((d, y));
            }
            if spec.formats.csv {
                out.add(format!("fig4_y_M{}_T{}dB.csv", m, tag(t_db)), rows);
            }
            let sol = solve_min_delta(spec.gamma, t_lin, &config, spec.delta_max)?;
            reports.push(min_delta_report(&config, spec.gamma, t_db, &sol));
            curves.push(SvgCurve {
                label: format!("M={m} T={t_db} dB"),
                points,
            });
        }
    }
    out.add(
        "fig4_min_delta.json",
        serde_json::to_string_pretty(&json!({
            "gamma": spec.gamma,
            "delta_max": spec.delta_max,
            "reports": reports,
        }))
        .expect("plain document")
            + "\n",
    );
    if spec.formats.svg {
        out.add(
            "fig4.svg",
            emit_svg(
                &curves,
                &SvgStyle {
                    title: "Coverage vs pilot reuse factor".to_string(),
                    x_label: "pilot reuse factor Delta".to_string(),
                    y_label: "y(Delta)".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

/// Throughput sweeps for T_C in {50, 200, 500}, M in {100, 500}; tau_0 is
/// shared across T_C values of the same M since it does not depend on the
/// coherence block.
fn figure5(spec: &ExperimentSpec) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for m in [100u32, 500] {
        let mut tau0_cache: HashMap<u32, f64> = HashMap::new();
        for t_c in [50.0f64, 200.0, 500.0] {
            let config = SystemConfig {
                m_antennas: m,
                epsilon: 0.5,
                t_coherence: t_c,
                ..spec.config.clone()
            };
            log::info!("fig5: M={m} T_C={t_c}");
            let name = format!("fig5_M{}_TC{}.csv", m, tag(t_c));
            let curve = throughput_curve(&config, 8, name, &mut tau0_cache)?;
            if spec.formats.csv {
                out.add(curve.csv_name.clone(), curve.csv.clone());
            }
            summary.push(curve.json.clone());
            curves.push(SvgCurve {
                label: curve.label.clone(),
                points: curve.points.clone(),
            });
        }
    }
    if spec.formats.json {
        out.add(
            "fig5.json",
            serde_json::to_string_pretty(&json!({ "curves": summary })).expect("plain document")
                + "\n",
        );
    }
    if spec.formats.svg {
        out.add(
            "fig5.svg",
            emit_svg(
                &curves,
                &SvgStyle {
                    title: "Cell throughput vs pilot reuse".to_string(),
                    x_label: "pilot reuse factor Delta".to_string(),
                    y_label: "tau_S (bit/s/Hz per cell)".to_string(),
                },
            )?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overhead_partition_boundary_is_valid() {
        // K = 10, T_C = 50: Delta = 5 trains the whole block (valid, zero
        // payload); 6..8 are infeasible.
        let (ok, skipped) = partition_deltas(10, 50.0, 8);
        assert_eq!(ok, vec![1, 2, 3, 4, 5]);
        assert_eq!(skipped, vec![6, 7, 8]);
        let (ok, skipped) = partition_deltas(10, 500.0, 8);
        assert_eq!(ok.len(), 8);
        assert!(skipped.is_empty());
    }

    #[test]
    fn tags_are_filesystem_safe() {
        assert_eq!(tag(0.5), "0p5");
        assert_eq!(tag(1.0), "1");
        assert_eq!(tag(-2.5), "m2p5");
        assert_eq!(tag(200.0), "200");
    }

    #[test]
    fn output_set_writes_everything_or_reports() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = OutputSet::default();
        set.add("a.csv", "x\n".to_string());
        set.add("sub/b.json", "{}\n".to_string());
        assert_eq!(set.len(), 2);
        set.write_all(dir.path()).unwrap();
        assert!(dir.path().join("a.csv").is_file());
        assert!(dir.path().join("sub/b.json").is_file());
        let empty = OutputSet::default();
        assert!(empty.write_all(dir.path()).is_err());
    }
}
