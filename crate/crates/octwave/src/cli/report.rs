use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::commands::RunRecord;
use super::{versions, write_columns, write_json, CliResult, Failure, EXIT_OK, EXIT_USAGE};
use crate::verify::SuiteReport;

/// One line of the aggregated table.
#[derive(Debug, Serialize)]
struct Row {
    source: String,
    kind: String,
    verdict: String,
    detail: String,
}

/// Files below `dir`, two levels deep, sorted.
fn collect_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            for inner in std::fs::read_dir(&path)? {
                let p = inner?.path();
                if p.is_file() {
                    out.push(p);
                }
            }
        } else {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(|x| x.as_f64()).collect()
}

fn relative(dir: &Path, path: &Path) -> String {
    path.strip_prefix(dir).unwrap_or(path).display().to_string()
}

#[derive(Debug, serde::Deserialize)]
struct KernelLine {
    regime: String,
    lambda: f64,
    t: f64,
    which: String,
    value_re: f64,
    value_im: f64,
}

/// Upper envelope `t ↦ max_{τ >= t} max_r |K(τ)|` per (regime, kernel, λ).
fn decay_curves(lines: &[KernelLine]) -> BTreeMap<(String, String, String), Vec<(f64, f64)>> {
    let mut peaks: BTreeMap<(String, String, String), BTreeMap<u64, f64>> = BTreeMap::new();
    for l in lines {
        let key = (l.regime.clone(), l.which.clone(), format!("{}", l.lambda));
        let v = l.value_re.hypot(l.value_im);
        let slot = peaks.entry(key).or_default().entry(l.t.to_bits()).or_insert(0.0);
        *slot = slot.max(v);
    }
    peaks
        .into_iter()
        .map(|(key, by_t)| {
            let mut pts: Vec<(f64, f64)> = by_t.into_iter().map(|(t, v)| (f64::from_bits(t), v)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut running: f64 = 0.0;
            for p in pts.iter_mut().rev() {
                running = running.max(p.1);
                p.1 = running;
            }
            (key, pts)
        })
        .collect()
}

pub fn report(dir: &Path, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    if !dir.is_dir() {
        return Err(Failure::new(EXIT_USAGE, format!("report directory {} does not exist", dir.display())));
    }
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("report"));
    let files: Vec<PathBuf> = collect_files(dir)?.into_iter().filter(|p| !p.starts_with(&out)).collect();

    let mut rows = Vec::new();
    let mut plots: Vec<(String, (&str, &str), Vec<(f64, f64)>)> = Vec::new();
    for path in &files {
        let name = relative(dir, path);
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let Ok(text) = std::fs::read_to_string(path) else { continue };
                let Ok(value) = serde_json::from_str::<Value>(&text) else {
                    writeln!(stderr, "skipping {name}: not valid JSON")?;
                    continue;
                };
                if value.get("suite_name").is_some() {
                    let Ok(report) = serde_json::from_value::<SuiteReport>(value) else {
                        writeln!(stderr, "skipping {name}: malformed suite report")?;
                        continue;
                    };
                    let failed = report.failures().count();
                    rows.push(Row {
                        source: name,
                        kind: format!("suite:{}", report.suite_name),
                        verdict: if report.passed() { "PASS" } else { "FAIL" }.into(),
                        detail: format!("{} cases, {failed} failed, seed {}", report.cases.len(), report.seed),
                    });
                    for case in &report.cases {
                        let lambdas = case.inputs.get("lambdas").and_then(numbers);
                        let ys = ["constants", "ratios", "drifts"].iter().find_map(|k| case.inputs.get(*k).and_then(numbers));
                        if let (Some(xs), Some(ys)) = (lambdas, ys) {
                            if xs.len() == ys.len() {
                                let file = format!("ratio_vs_lambda__{}__{}.dat", report.suite_name, slug(&case.name));
                                plots.push((file, ("lambda", "ratio"), xs.into_iter().zip(ys).collect()));
                            }
                        }
                    }
                } else if value.get("kind").and_then(Value::as_str) == Some("solve_record") {
                    let Ok(rec) = serde_json::from_value::<RunRecord>(value) else {
                        writeln!(stderr, "skipping {name}: malformed solve record")?;
                        continue;
                    };
                    let worst = rec.contraction_factors.iter().copied().fold(0.0, f64::max);
                    rows.push(Row {
                        source: name.clone(),
                        kind: "solve".into(),
                        verdict: if rec.converged { "PASS" } else { "FAIL" }.into(),
                        detail: format!(
                            "lambda {}, {} iterations, max factor {worst:.3e}, residual {:.3e}",
                            rec.problem.lambda, rec.iterations, rec.residual
                        ),
                    });
                    let file = format!("norm_vs_time__{}.dat", slug(&name));
                    plots.push((file, ("t", "norm"), rec.norm_vs_time.clone()));
                }
            }
            Some("csv") if path.file_name().is_some_and(|f| f == "kernels.csv") => {
                let mut reader = csv::Reader::from_path(path).map_err(crate::error::Error::from)?;
                let lines: Vec<KernelLine> = reader.deserialize().collect::<std::result::Result<_, _>>().map_err(crate::error::Error::from)?;
                rows.push(Row {
                    source: name,
                    kind: "kernels".into(),
                    verdict: "-".into(),
                    detail: format!("{} rows", lines.len()),
                });
                for ((regime, which, lambda), pts) in decay_curves(&lines) {
                    let file = format!("decay__{regime}__{which}__lambda{lambda}.dat");
                    plots.push((file, ("t", "envelope"), pts));
                }
            }
            _ => {}
        }
    }
    if rows.is_empty() {
        return Err(Failure::new(EXIT_USAGE, format!("no reports, records or kernel sweeps found in {}", dir.display())));
    }

    std::fs::create_dir_all(out.join("plots"))
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot create {}: {e}", out.display())))?;
    write_json(
        &out.join("manifest.json"),
        &serde_json::json!({ "tool": "octwave", "command": "report", "inputs": files.iter().map(|p| relative(dir, p)).collect::<Vec<_>>(), "versions": versions() }),
    )?;
    let mut table = String::new();
    let _ = writeln!(table, "{:<40} {:<22} {:<7} {}", "source", "kind", "verdict", "detail");
    for r in &rows {
        let _ = writeln!(table, "{:<40} {:<22} {:<7} {}", r.source, r.kind, r.verdict, r.detail);
    }
    std::fs::write(out.join("summary.txt"), &table)?;
    write_json(&out.join("summary.json"), &rows)?;
    for (file, header, pts) in &plots {
        write_columns(&out.join("plots").join(file), *header, pts.iter().copied())?;
    }
    stdout.write_all(table.as_bytes())?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slug_is_filename_safe() {
        assert_eq!(slug("effective homogeneous gamma=1 j=0 flatness"), "effective_homogeneous_gamma_1_j_0_flatness");
        assert_eq!(slug("(1, 0, 2) n=1"), "1_0_2_n_1");
    }

    #[test]
    fn decay_envelope_is_monotone() {
        let mk = |t: f64, v: f64| KernelLine { regime: "effective".into(), lambda: 1.0, t, which: "k0".into(), value_re: v, value_im: 0.0 };
        let curves = decay_curves(&[mk(0.0, 1.0), mk(1.0, 0.2), mk(2.0, 0.5), mk(3.0, 0.1)]);
        let pts = &curves[&("effective".to_string(), "k0".to_string(), "1".to_string())];
        assert_eq!(pts.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1.0, 0.5, 0.5, 0.1]);
    }
}
