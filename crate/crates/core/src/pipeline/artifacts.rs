//! Result emission: per-step field CSVs, metrics and moments JSON, the
//! success-probability and triage CSVs, the resource table, and a gnuplot
//! bundle. Outputs are deterministic for a fixed config and seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::circuits::resources::{reference_reports, reports_to_csv};
use crate::error::Result;
use crate::pipeline::run::RunArtifacts;

/// Write every artifact of a run into `dir`, returning the files created.
pub fn emit_outputs(artifacts: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join("fields"))?;
    let mut written = Vec::new();

    for (t, field) in artifacts.fields.iter().enumerate() {
        let path = dir.join("fields").join(format!("step_{t:03}.csv"));
        let mut f = fs::File::create(&path)?;
        field.to_csv(&mut f)?;
        written.push(path);
    }

    let path = dir.join("success.csv");
    {
        let mut f = fs::File::create(&path)?;
        writeln!(
            f,
            "t,step_success,cumulative_success,legacy_success_log2"
        )?;
        for s in &artifacts.steps {
            let legacy = artifacts
                .legacy_success_log2
                .get(s.t - 1)
                .copied()
                .unwrap_or(f64::NAN);
            writeln!(
                f,
                "{},{:.16e},{:.16e},{:.16e}",
                s.t, s.success_probability, s.cumulative_success, legacy
            )?;
        }
    }
    written.push(path);

    let path = dir.join("triage.csv");
    {
        let mut f = fs::File::create(&path)?;
        writeln!(f, "t,total,perpendicular,flagged,usable,ideal_usable")?;
        for s in &artifacts.steps {
            if let Some(tr) = &s.triage {
                let ideal = (s.success_probability * tr.total as f64).round() as u64;
                writeln!(
                    f,
                    "{},{},{},{},{},{}",
                    s.t, tr.total, tr.perpendicular, tr.flagged, tr.usable, ideal
                )?;
            }
        }
    }
    written.push(path);

    let path = dir.join("moments.json");
    {
        let moments: Vec<_> = artifacts.steps.iter().map(|s| &s.moments).collect();
        fs::write(&path, serde_json::to_string_pretty(&moments)?)?;
    }
    written.push(path);

    let path = dir.join("metrics.json");
    {
        let metrics = serde_json::json!({
            "config": artifacts.config,
            "fidelity_to_oracle": artifacts.steps.iter()
                .map(|s| s.fidelity_to_oracle).collect::<Vec<_>>(),
            "success_product": artifacts.success_product,
            "norm_ratio_sq": artifacts.norm_ratio_sq,
            "noise_estimate": artifacts.noise_estimate,
            "resource": artifacts.resource,
        });
        fs::write(&path, serde_json::to_string_pretty(&metrics)?)?;
    }
    written.push(path);

    let path = dir.join("resources.csv");
    {
        let mut f = fs::File::create(&path)?;
        reports_to_csv(&reference_reports()?, &mut f)?;
    }
    written.push(path);

    let path = dir.join("plots.gp");
    fs::write(&path, gnuplot_script(artifacts))?;
    written.push(path);

    Ok(written)
}

fn gnuplot_script(artifacts: &RunArtifacts) -> String {
    let t = artifacts.steps.len();
    format!(
        "set datafile separator comma\n\
         set key left bottom\n\
         set xlabel 'timestep'\n\
         set terminal pngcairo size 900,600\n\
         set output 'success.png'\n\
         set ylabel 'success probability'\n\
         set logscale y\n\
         plot 'success.csv' skip 1 using 1:3 with linespoints title 'LCU cumulative', \\\n\
         \x20    'success.csv' skip 1 using 1:(2**$4) with linespoints title 'pre-LCU cumulative'\n\
         unset logscale y\n\
         set output 'fidelity.png'\n\
         set ylabel 'fidelity to classical solution'\n\
         set yrange [0:1.05]\n\
         plot '-' using 1:2 with linespoints title 'fidelity'\n\
         {}e\n",
        artifacts
            .steps
            .iter()
            .map(|s| format!("{} {:.12}\n", s.t, s.fidelity_to_oracle))
            .collect::<String>(),
    ) + &format!("# steps={t}\n")
}
