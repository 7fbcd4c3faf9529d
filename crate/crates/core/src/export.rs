//! CSV writers for every data product. Floats are written in shortest
//! round-trip form, so identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::choi::InfidelitySeries;
use crate::decoherence::DecoherenceSeries;
use crate::error::{Error, Result};
use crate::harness::{NonMarkVsInfidelity, SweepRecord, SweepSummary};
use crate::measures::TraceDistanceSeries;
use crate::noise::NoiseTrajectory;
use crate::stats::Histogram;

pub const TRAJECTORY_HEADER: [&str; 2] = ["t", "lambda"];
pub const DECOHERENCE_HEADER: [&str; 3] = ["t", "re_g", "im_g"];
pub const DISTANCE_HEADER: [&str; 2] = ["t", "d"];
pub const INFIDELITY_HEADER: [&str; 2] = ["t", "delta"];
pub const SUMMARY_HEADER: [&str; 7] = [
    "noise",
    "gamma",
    "n_realizations",
    "n_repetitions",
    "mean_blp",
    "std_blp",
    "time_avg_infidelity",
];
pub const DETAIL_HEADER: [&str; 3] = ["repetition", "blp", "time_avg_infidelity"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_left", "bin_right", "count"];
pub const PAIRING_HEADER: [&str; 3] = ["n_realizations", "time_avg_infidelity", "mean_blp"];

fn write_rows<W, R>(out: W, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()>
where
    W: Write,
    R: Serialize,
{
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_trajectory<W: Write>(out: W, traj: &NoiseTrajectory) -> Result<()> {
    let grid = traj.grid();
    write_rows(
        out,
        &TRAJECTORY_HEADER,
        traj.values().iter().enumerate().map(|(i, v)| (grid.time(i), *v)),
    )
}

pub fn write_decoherence<W: Write>(out: W, series: &DecoherenceSeries) -> Result<()> {
    let grid = series.grid();
    write_rows(
        out,
        &DECOHERENCE_HEADER,
        series
            .values()
            .iter()
            .enumerate()
            .map(|(i, g)| (grid.time(i), g.re, g.im)),
    )
}

pub fn write_distance<W: Write>(out: W, series: &TraceDistanceSeries) -> Result<()> {
    let grid = series.grid();
    write_rows(
        out,
        &DISTANCE_HEADER,
        series.values().iter().enumerate().map(|(i, d)| (grid.time(i), *d)),
    )
}

pub fn write_infidelity<W: Write>(out: W, series: &InfidelitySeries) -> Result<()> {
    let grid = series.grid();
    write_rows(
        out,
        &INFIDELITY_HEADER,
        series.values().iter().enumerate().map(|(i, d)| (grid.time(i), *d)),
    )
}

pub fn write_summary<W: Write>(out: W, summary: &SweepSummary) -> Result<()> {
    let noise = summary.config.noise;
    write_rows(
        out,
        &SUMMARY_HEADER,
        summary.records.iter().map(|r| {
            (
                noise.kind.name(),
                noise.gamma,
                r.n_realizations,
                r.n_repetitions,
                r.mean_blp,
                r.std_blp,
                r.time_avg_infidelity,
            )
        }),
    )
}

pub fn write_detail<W: Write>(out: W, record: &SweepRecord) -> Result<()> {
    write_rows(
        out,
        &DETAIL_HEADER,
        record
            .blp_values
            .iter()
            .zip(&record.time_avg_values)
            .enumerate()
            .map(|(i, (b, d))| (i, *b, *d)),
    )
}

pub fn write_histogram<W: Write>(out: W, histogram: &Histogram) -> Result<()> {
    write_rows(out, &HISTOGRAM_HEADER, &histogram.bins)
}

pub fn write_pairing<W: Write>(out: W, pairing: &NonMarkVsInfidelity) -> Result<()> {
    write_rows(
        out,
        &PAIRING_HEADER,
        pairing
            .points
            .iter()
            .map(|p| (p.n_realizations, p.time_avg_infidelity, p.mean_blp)),
    )
}

/// Creates `path` and hands a buffered writer to `write`.
pub fn to_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = BufWriter::new(file);
    write(&mut buf)?;
    buf.flush().map_err(|e| Error::io(path, e))
}
