//! Deterministic result emission: JSON-lines with a config-echo header,
//! plus CSV export of the tabular records. Identical inputs produce
//! byte-identical output.

use serde::Serialize;
use std::io::Write;

use crate::config::ExperimentConfig;
use sdcar::flow::DeficitRow;

use crate::experiments::SweepOutput;
use crate::{ExperimentError, Result};

#[derive(Serialize)]
struct Header<'a> {
    record: &'a str,
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config: &'a ExperimentConfig,
}

/// Writes the header line followed by one JSON object per record.
pub fn write_jsonl<W: Write, T: Serialize>(
    mut w: W,
    command: &str,
    cfg: &ExperimentConfig,
    records: &[T],
) -> Result<()> {
    let header = Header {
        record: "header",
        tool: "sdcar",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
    };
    let io = |e: std::io::Error| ExperimentError::Io(e.to_string());
    let js = |e: serde_json::Error| ExperimentError::Io(e.to_string());
    writeln!(w, "{}", serde_json::to_string(&header).map_err(js)?).map_err(io)?;
    for r in records {
        writeln!(w, "{}", serde_json::to_string(r).map_err(js)?).map_err(io)?;
    }
    Ok(())
}

/// Single-value results (crossing summaries, index reports, aggregates).
pub fn write_jsonl_one<W: Write, T: Serialize>(
    w: W,
    command: &str,
    cfg: &ExperimentConfig,
    record: &T,
) -> Result<()> {
    write_jsonl(w, command, cfg, std::slice::from_ref(record))
}

/// CSV export of a sweep, for plotting.
pub fn sweep_csv<W: Write>(w: W, out: &SweepOutput) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["s", "gap", "sigma", "transport_error", "det_re", "det_im", "deficit"])
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    for p in &out.points {
        wtr.write_record([
            format!("{}", p.s),
            format!("{}", p.gap),
            format!("{}", p.sigma),
            format!("{}", p.transport_error),
            format!("{}", p.det[0]),
            format!("{}", p.det[1]),
            format!("{}", p.deficit),
        ])
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    }
    wtr.flush().map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(())
}

/// CSV export of the finite-size study.
pub fn study_csv<W: Write>(w: W, rows: &[DeficitRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["l", "n_sites", "deficit_per_site", "det_re", "det_im", "transport_error"])
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    for r in rows {
        wtr.write_record([
            format!("{}", r.l),
            format!("{}", r.n_sites),
            format!("{}", r.deficit_per_site),
            format!("{}", r.det_re),
            format!("{}", r.det_im),
            format!("{}", r.transport_error),
        ])
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    }
    wtr.flush().map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(())
}
