//! CSV emission with deterministic column order and round-trip-exact
//! float serialization.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::bounds::deterioration_factor;
use crate::error::Result;

use super::metrics::AggregateMetrics;
use super::{ExperimentConfig, Mode};

/// Serializes a float with 17 significant decimal digits, which always
/// round-trips `f64` exactly.
pub fn format_float(v: f64) -> String {
    format!("{:.16e}", v)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::FixedLeader => "fixed-leader",
        Mode::Subsample => "subsample",
        Mode::Parametric => "parametric",
        Mode::None => "none",
        Mode::Centralized => "centralized",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

/// Writes the run outputs into `dir`:
///
/// * `rmse.csv` — `t, mode, rmse`
/// * `rmsae.csv` — `t, mode, rmsae`
/// * `handoffs.csv` — `trial, t, checked, delta, from, to, values_transmitted`
/// * `deterioration.csv` — `trial, ratio, compression_factor, mode`
/// * `bound_overlay.csv` — `compression_factor, theoretical_ratio, naive_ratio`
/// * `resolved_config.json` — the full configuration the run used
pub fn emit_results(
    metrics: &AggregateMetrics,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mode = mode_name(metrics.mode);

    let mut rmse = String::from("t,mode,rmse\n");
    for (t, v) in metrics.rmse.iter().enumerate() {
        rmse.push_str(&format!("{},{},{}\n", t, mode, format_float(*v)));
    }
    write_file(&dir.join("rmse.csv"), &rmse)?;

    let mut rmsae = String::from("t,mode,rmsae\n");
    for (t, v) in metrics.rmsae.iter().enumerate() {
        rmsae.push_str(&format!("{},{},{}\n", t, mode, format_float(*v)));
    }
    write_file(&dir.join("rmsae.csv"), &rmsae)?;

    let mut handoffs = String::from("trial,t,checked,delta,from,to,values_transmitted\n");
    for (trial, r) in &metrics.handoffs {
        handoffs.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            trial, r.t, r.checked as u8, r.delta as u8, r.from, r.to, r.values_transmitted
        ));
    }
    write_file(&dir.join("handoffs.csv"), &handoffs)?;

    let cf_text = metrics
        .compression_factor
        .map(format_float)
        .unwrap_or_default();
    let mut deterioration = String::from("trial,ratio,compression_factor,mode\n");
    for (i, ratio) in metrics.deterioration_ratio.iter().enumerate() {
        deterioration.push_str(&format!(
            "{},{},{},{}\n",
            i,
            format_float(*ratio),
            cf_text,
            mode
        ));
    }
    write_file(&dir.join("deterioration.csv"), &deterioration)?;

    let mut overlay = String::from("compression_factor,theoretical_ratio,naive_ratio\n");
    if metrics.mode == Mode::Subsample {
        if let (Some(cf), Some(n_b)) = (metrics.compression_factor, config.n_b) {
            let naive = (config.n as f64 / n_b as f64).sqrt();
            let theoretical = if config.n.is_multiple_of(n_b) {
                deterioration_factor(metrics.empirical_q, config.n / n_b, 2)
                    .map(format_float)
                    .unwrap_or_default()
            } else {
                String::new()
            };
            overlay.push_str(&format!(
                "{},{},{}\n",
                format_float(cf),
                theoretical,
                format_float(naive)
            ));
        }
    }
    write_file(&dir.join("bound_overlay.csv"), &overlay)?;

    // Resolved configuration (defaults applied) so runs are replayable.
    let mut resolved = serde_json::to_value(config)?;
    if let serde_json::Value::Object(map) = &mut resolved {
        map.insert("r_d".into(), serde_json::json!(config.resolved_r_d()));
        map.insert(
            "upsample_path".into(),
            serde_json::json!(match (config.mode, config.n_b) {
                (Mode::Subsample, Some(n_b)) if config.n.is_multiple_of(n_b) => "replicate",
                (Mode::Subsample, _) => "resample",
                _ => "none",
            }),
        );
        map.insert(
            "trials_included".into(),
            serde_json::json!(metrics.trials_included),
        );
        map.insert(
            "trials_degenerate".into(),
            serde_json::json!(metrics.trials_degenerate),
        );
        map.insert(
            "empirical_q".into(),
            serde_json::json!(metrics.empirical_q),
        );
    }
    write_file(
        &dir.join("resolved_config.json"),
        &serde_json::to_string_pretty(&resolved)?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::metrics::BoxStats;

    #[test]
    fn float_format_round_trips_exactly() {
        for &v in &[
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            6.02214076e23,
            -0.0,
            1.5,
        ] {
            let text = format_float(v);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{text}");
        }
    }

    fn empty_metrics() -> AggregateMetrics {
        AggregateMetrics {
            mode: Mode::None,
            rmse: Vec::new(),
            rmsae: Vec::new(),
            baseline_rmsae: Vec::new(),
            deterioration_ratio: Vec::new(),
            quantiles: None,
            empirical_q: 0.0,
            handoffs: Vec::new(),
            compression_factor: None,
            trials_included: 0,
            trials_degenerate: 0,
        }
    }

    #[test]
    fn empty_metrics_emit_header_only_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig::default();
        emit_results(&empty_metrics(), &config, dir.path()).unwrap();
        for name in [
            "rmse.csv",
            "rmsae.csv",
            "handoffs.csv",
            "deterioration.csv",
            "bound_overlay.csv",
        ] {
            let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(text.lines().count(), 1, "{name} should be header-only");
        }
        let config_text =
            std::fs::read_to_string(dir.path().join("resolved_config.json")).unwrap();
        assert!(config_text.contains("\"p_d\""));
        assert!(config_text.contains("\"upsample_path\""));
    }

    #[test]
    fn deterioration_rows_match_trials() {
        let dir = tempfile::tempdir().unwrap();
        let mut metrics = empty_metrics();
        metrics.mode = Mode::Subsample;
        metrics.compression_factor = Some(10.0);
        metrics.deterioration_ratio = vec![1.0, 1.25, 0.75];
        metrics.quantiles = BoxStats::from_samples(&metrics.deterioration_ratio);
        metrics.trials_included = 3;
        let config = ExperimentConfig {
            mode: Mode::Subsample,
            n_b: Some(30),
            ..ExperimentConfig::default()
        };
        emit_results(&metrics, &config, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("deterioration.csv")).unwrap();
        assert_eq!(text.lines().count(), 4); // header + one row per trial
        let ratio: f64 = text
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(ratio, 1.25);
        let overlay = std::fs::read_to_string(dir.path().join("bound_overlay.csv")).unwrap();
        assert_eq!(overlay.lines().count(), 2);
    }
}
