//! End-to-end batch run: generate a two-sample corpus on disk, analyse it
//! in parallel, write the report and re-render the summary table from it.
//!
//! cargo run --release --example batch_pipeline

use resloss::batch::{generate_corpus, run_batch, write_outputs, CorpusSpec, RunConfig};
use resloss::report::{emit_table, FitReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let spec = CorpusSpec {
        seed: 5,
        ..CorpusSpec::default()
    };
    let files = generate_corpus(&spec, &dir.path().join("corpus"))?;
    println!("{} trace files", files.len());

    let config = RunConfig {
        inputs: vec![format!("{}/corpus/*/*.csv", dir.path().display())],
        jobs: 4,
        seed: 5,
        ..RunConfig::default()
    };
    let report = run_batch(&config)?;
    for r in &report.resonators {
        if let Some(fit) = &r.fit {
            println!(
                "{}/{}: Fd_TLS = {:.3e}, Q_i HP = {:.3e}",
                r.sample_id,
                r.resonator_id,
                fit.params.f_delta_tls0,
                1.0 / fit.params.delta_other
            );
        }
    }

    let out = dir.path().join("out");
    std::fs::create_dir(&out)?;
    write_outputs(&report, &out)?;
    let reloaded = FitReport::load(&out.join("report.json"))?;
    println!("\nconfig hash {}\n", reloaded.provenance.config_hash);
    print!("{}", emit_table(&reloaded));
    Ok(())
}
