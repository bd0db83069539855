use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use super::bench::BenchmarkRun;
use super::manifest::RunManifest;
use super::optimize::{OptimizationHistory, ValidationReport};
use super::sweep::SweepResult;
use super::OrchestratorError;
use crate::ga::GenerationRecord;
use crate::model::Parameter;

/// Float formatting for CSV cells: `inf`, `-inf` and `nan` spelled out.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(cell(v))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>, OrchestratorError> {
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

fn write_generations(dir: &Path, generations: &[GenerationRecord]) -> Result<(), OrchestratorError> {
    let mut w = create(dir, "generations.csv")?;
    writeln!(w, "generation,best_individual,best_cost,mean_cost")?;
    for g in generations {
        writeln!(
            w,
            "{},{},{},{}",
            g.index,
            g.best_index,
            cell(g.best_cost),
            cell(g.mean_cost)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(dir: &Path, value: &Value) -> Result<(), OrchestratorError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| OrchestratorError::Config(e.to_string()))?;
    fs::write(dir.join("summary.json"), text + "\n")?;
    Ok(())
}

fn trace(generations: &[GenerationRecord]) -> Value {
    generations
        .iter()
        .map(|g| json!({"generation": g.index, "best_cost": json_num(g.best_cost), "mean_cost": json_num(g.mean_cost)}))
        .collect()
}

fn prepare(dir: &Path, manifest: &RunManifest) -> Result<(), OrchestratorError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.ini"), manifest.to_ini_string())?;
    Ok(())
}

/// Writes `individuals.csv`, `generations.csv`, `summary.json` and
/// `manifest.ini`.
pub fn write_optimization(
    dir: &Path,
    manifest: &RunManifest,
    history: &OptimizationHistory,
    validation: Option<&ValidationReport>,
) -> Result<(), OrchestratorError> {
    prepare(dir, manifest)?;
    let mut w = create(dir, "individuals.csv")?;
    let genes: Vec<String> = Parameter::ALL.iter().map(|p| format!("gene_{}", p.name())).collect();
    let values: Vec<&str> = Parameter::ALL.iter().map(|p| p.name()).collect();
    writeln!(
        w,
        "generation,individual,{},{},mean_fidelity,fidelity_stderr,mean_time,time_stderr,rate,rate_stderr,cost",
        genes.join(","),
        values.join(",")
    )?;
    let nan5 = vec!["nan".to_string(); 5];
    for (g, evals) in history.evaluations.iter().enumerate() {
        for (i, e) in evals.iter().enumerate() {
            let genes = e
                .genes
                .map_or(nan5.clone(), |n| n.genes().iter().map(|&v| cell(v)).collect());
            let values = e.params.map_or(nan5.clone(), |p| {
                Parameter::ALL.iter().map(|&q| cell(p.get(q))).collect()
            });
            let stats = match &e.stats {
                Some(s) => [
                    s.mean_fidelity,
                    s.fidelity_stderr,
                    s.mean_time,
                    s.time_stderr,
                    s.rate,
                    s.rate_stderr,
                ]
                .map(cell)
                .join(","),
                None => ["nan"; 6].join(","),
            };
            writeln!(
                w,
                "{g},{i},{},{},{stats},{}",
                genes.join(","),
                values.join(","),
                cell(e.cost.value())
            )?;
        }
    }
    w.flush()?;
    write_generations(dir, &history.generations)?;

    let best = history.best().map(|(g, i)| {
        let e = &history.evaluations[g][i];
        json!({
            "generation": g,
            "individual": i,
            "cost": json_num(e.cost.value()),
            "genes": e.genes.map(|n| n.genes().map(json_num).to_vec()),
            "parameters": e.params.map(|p| {
                Parameter::ALL.iter().map(|&q| (q.name().to_string(), json_num(p.get(q)))).collect::<serde_json::Map<_, _>>()
            }),
            "mean_fidelity": e.stats.as_ref().map(|s| json_num(s.mean_fidelity)),
            "rate": e.stats.as_ref().map(|s| json_num(s.rate)),
        })
    });
    let mut summary = json!({
        "mode": manifest.mode.to_string(),
        "seed": manifest.seed,
        "generations": history.generations.len(),
        "searched": history.layout.searched.iter().map(|p| p.name()).collect::<Vec<_>>(),
        "best": best,
        "trace": trace(&history.generations),
    });
    if let Some(v) = validation {
        summary["validation"] = json!({
            "reference_cost": json_num(v.reference.cost),
            "reference_factors": v.reference.factors.map(json_num).to_vec(),
            "reference_fidelity": json_num(v.reference.fidelity),
            "reference_rate": json_num(v.reference.rate),
            "best_cost": v.best_cost.map(json_num),
            "relative_gap": v.relative_gap.map(json_num),
        });
    }
    write_json(dir, &summary)
}

/// [`write_optimization`] without a validation block.
pub fn emit_results(
    dir: &Path,
    manifest: &RunManifest,
    history: &OptimizationHistory,
) -> Result<(), OrchestratorError> {
    write_optimization(dir, manifest, history, None)
}

/// Writes `sweep.csv`, `summary.json` and `manifest.ini`.
pub fn write_sweep(dir: &Path, manifest: &RunManifest, result: &SweepResult) -> Result<(), OrchestratorError> {
    prepare(dir, manifest)?;
    let mut w = create(dir, "sweep.csv")?;
    writeln!(w, "probe,gene,value,response,stderr")?;
    for (k, p) in result.probes.iter().enumerate() {
        writeln!(
            w,
            "{k},{},{},{},{}",
            cell(p.gene),
            cell(p.value),
            cell(p.response),
            cell(p.stderr)
        )?;
    }
    w.flush()?;
    write_json(
        dir,
        &json!({
            "mode": manifest.mode.to_string(),
            "seed": manifest.seed,
            "parameter": result.parameter.name(),
            "metric": result.metric,
            "threshold": json_num(result.threshold),
            "crossing": json_num(result.crossing),
            "interval": [json_num(result.interval.0), json_num(result.interval.1)],
        }),
    )
}

/// Writes `individuals.csv` (one `x_k` column per coordinate),
/// `generations.csv`, `summary.json` and `manifest.ini`.
pub fn write_benchmark(dir: &Path, manifest: &RunManifest, run: &BenchmarkRun) -> Result<(), OrchestratorError> {
    prepare(dir, manifest)?;
    let mut w = create(dir, "individuals.csv")?;
    let d = run
        .generations
        .first()
        .map_or(0, |g| g.population.first().map_or(0, Vec::len));
    let xs: Vec<String> = (1..=d).map(|k| format!("x_{k}")).collect();
    writeln!(w, "generation,individual,{},cost", xs.join(","))?;
    for g in &run.generations {
        for (i, (x, c)) in g.population.iter().zip(&g.costs).enumerate() {
            let coords: Vec<String> = x.iter().map(|&v| cell(v)).collect();
            writeln!(w, "{},{i},{},{}", g.index, coords.join(","), cell(*c))?;
        }
    }
    w.flush()?;
    write_generations(dir, &run.generations)?;
    let last = run.generations.last();
    write_json(
        dir,
        &json!({
            "mode": manifest.mode.to_string(),
            "seed": manifest.seed,
            "function": run.function,
            "generations": run.generations.len(),
            "final_best_cost": last.map(|g| json_num(g.best_cost)),
            "final_clean_cost": json_num(run.final_clean_cost),
            "trace": trace(&run.generations),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_spell_out_non_finite_values() {
        assert_eq!(cell(f64::INFINITY), "inf");
        assert_eq!(cell(f64::NEG_INFINITY), "-inf");
        assert_eq!(cell(f64::NAN), "nan");
        assert_eq!(cell(0.25), "0.25");
    }

    fn manifest(dir: &Path) -> RunManifest {
        fs::write(
            dir.join("chain.ini"),
            "[uniform]\nnodes = 3\nlength_km = 10\nbaseline_f_el = 0.5\nbaseline_p_suc = 0.1\n",
        )
        .unwrap();
        RunManifest::from_ini_str(
            "[run]\nseed = 9\nruns_per_individual = 5\ntopology = chain.ini\nparameters = f_el, s_q\n\
             [ga]\npopulation_size = 6\nn_parents = 2\nn_generations = 3\n[baselines]\nf_el = 0.5\ns_q = 0.5\n",
            dir,
        )
        .unwrap()
    }

    #[test]
    fn empty_history_writes_headers_and_null_best() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(dir.path());
        let layout = super::super::GeneLayout::from_manifest(&m);
        let history = OptimizationHistory {
            layout,
            generations: vec![],
            evaluations: vec![],
        };
        let out = dir.path().join("out");
        emit_results(&out, &m, &history).unwrap();
        let csv = fs::read_to_string(out.join("individuals.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1);
        let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert!(summary["best"].is_null());
    }

    #[test]
    fn rows_match_population_and_reemission_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(dir.path());
        let history = super::super::run_optimization(&m).unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        emit_results(&a, &m, &history).unwrap();
        emit_results(&b, &m, &history).unwrap();
        for name in ["individuals.csv", "generations.csv", "summary.json", "manifest.ini"] {
            assert_eq!(
                fs::read(a.join(name)).unwrap(),
                fs::read(b.join(name)).unwrap(),
                "{name}"
            );
        }
        let csv = fs::read_to_string(a.join("individuals.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3 * 6);
        let header = csv.lines().next().unwrap().split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == header));
    }
}
