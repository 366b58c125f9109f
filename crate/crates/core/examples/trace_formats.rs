//! Write one trace in every supported format and read each back.
//!
//! cargo run --example trace_formats

use std::fs::File;
use std::io::BufWriter;

use resloss::io::{
    ingest_trace_file, write_archive, write_sidecar, write_text_with_sidecar, write_touchstone,
    DataFormat, FrequencyUnit, LabeledTrace, TraceArchive, TraceMetadata,
};
use resloss::physics::MeasurementContext;
use resloss::synth::{linewidth_grid, synthesize_trace, ForwardParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let p = ForwardParams::noiseless(6.03e9, 9e5, 2e5, -0.3).with_environment(0.6, 1.0, 30e-9);
    let trace = synthesize_trace(
        &p,
        &linewidth_grid(p.f_r, p.q_l(), 10.0, 301),
        MeasurementContext::from_dbm(-110.0, 0.0257)?,
    )?;
    let labeled = LabeledTrace {
        sample_id: "demo".into(),
        resonator_id: "r1".into(),
        trace,
    };
    let meta = TraceMetadata {
        p_app_dbm: Some(-110.0),
        temperature_k: Some(0.0257),
        resonator_id: Some("r1".into()),
        sample_id: Some("demo".into()),
    };

    let csv = dir.path().join("r1.csv");
    write_text_with_sidecar(&csv, &labeled)?;

    let s2p = dir.path().join("r1.s2p");
    write_touchstone(
        BufWriter::new(File::create(&s2p)?),
        &labeled.trace.freqs,
        &labeled.trace.s21,
        FrequencyUnit::MHz,
        DataFormat::MA,
    )?;
    write_sidecar(&s2p, &meta)?;

    let json = dir.path().join("traces.json");
    write_archive(&json, &TraceArchive::new(vec![labeled.clone()]))?;

    for path in [&csv, &s2p, &json] {
        for t in ingest_trace_file(path, &TraceMetadata::default())? {
            let worst = t
                .trace
                .s21
                .iter()
                .zip(&labeled.trace.s21)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            println!(
                "{:<12} {}/{}: {} points, {:.1} dBm, max |ΔS21| = {worst:.1e}",
                path.file_name().unwrap().to_string_lossy(),
                t.sample_id,
                t.resonator_id,
                t.trace.len(),
                t.trace.context.p_app_dbm()
            );
        }
    }
    Ok(())
}
