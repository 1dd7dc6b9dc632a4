//! Output serialization: CSV and JSON renderings of the same rows, plus the
//! optional gnuplot companion script. CSV numeric cells use scientific
//! notation with ten significant digits and a `.` decimal separator; JSON
//! carries the identical fields as native numbers (full round-trip
//! precision), in the same order.

use crate::Failure;
use serde::Serialize;
use std::path::Path;

/// Scientific notation with ten significant digits; infinities and NaN are
/// spelled out so every cell stays single-token.
pub fn sci(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.9e}")
    }
}

fn write_text(out_file: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out_file {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn check_format(out: &str) -> Result<(), Failure> {
    match out {
        "csv" | "json" => Ok(()),
        _ => Err(Failure::Usage(format!(
            "unknown output format '{out}' (expected csv or json)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// cdf rows
// ---------------------------------------------------------------------------

pub struct CdfRow {
    pub x: f64,
    pub cdf: f64,
    pub abs_err: f64,
    pub method: &'static str,
    pub wall_ms: f64,
    pub cancellation: bool,
}

#[derive(Serialize)]
struct CdfRowJson {
    x: f64,
    cdf: f64,
    abs_err: f64,
    method: &'static str,
    wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cancellation: Option<bool>,
}

/// The cancellation column appears only when at least one row is flagged, so
/// clean runs keep the plain five-column schema.
pub fn write_cdf(rows: &[CdfRow], out: &str, out_file: Option<&Path>) -> Result<(), Failure> {
    check_format(out)?;
    let flagged = rows.iter().any(|r| r.cancellation);
    let content = if out == "csv" {
        let mut text = String::from("x,cdf,abs_err,method,wall_ms");
        if flagged {
            text.push_str(",cancellation");
        }
        text.push('\n');
        for r in rows {
            text.push_str(&format!(
                "{},{},{},{},{}",
                sci(r.x),
                sci(r.cdf),
                sci(r.abs_err),
                r.method,
                sci(r.wall_ms)
            ));
            if flagged {
                text.push_str(if r.cancellation { ",true" } else { ",false" });
            }
            text.push('\n');
        }
        text
    } else {
        let json_rows: Vec<CdfRowJson> = rows
            .iter()
            .map(|r| CdfRowJson {
                x: r.x,
                cdf: r.cdf,
                abs_err: r.abs_err,
                method: r.method,
                wall_ms: r.wall_ms,
                cancellation: if flagged { Some(r.cancellation) } else { None },
            })
            .collect();
        to_json(&json_rows)?
    };
    write_text(out_file, &content)
}

// ---------------------------------------------------------------------------
// outage rows
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct OutageRow {
    pub gamma_b_db: f64,
    pub x: f64,
    pub outage: f64,
    pub abs_err: f64,
}

pub fn write_outage(rows: &[OutageRow], out: &str, out_file: Option<&Path>) -> Result<(), Failure> {
    check_format(out)?;
    let content = if out == "csv" {
        let mut text = String::from("gamma_b_db,x,outage,abs_err\n");
        for r in rows {
            text.push_str(&format!(
                "{},{},{},{}\n",
                sci(r.gamma_b_db),
                sci(r.x),
                sci(r.outage),
                sci(r.abs_err)
            ));
        }
        text
    } else {
        to_json(rows)?
    };
    write_text(out_file, &content)
}

/// Companion gnuplot script next to the CSV (same stem, `.plt` extension),
/// drawing outage on a log axis against the dB sweep.
pub fn write_outage_plot(csv_path: &Path) -> Result<(), Failure> {
    let data = csv_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Failure::Io(format!("bad data-file path {}", csv_path.display())))?;
    let png = csv_path.with_extension("png");
    let png = png
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("outage.png");
    let script = format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         set xlabel 'average branch SNR (dB)'\n\
         set ylabel 'outage probability'\n\
         set grid\n\
         set terminal pngcairo size 900,600\n\
         set output '{png}'\n\
         plot '{data}' using 1:3 with linespoints pointtype 7 title 'outage'\n"
    );
    write_text(Some(&csv_path.with_extension("plt")), &script)
}

// ---------------------------------------------------------------------------
// bench rows
// ---------------------------------------------------------------------------

pub struct BenchRow {
    pub suite: String,
    pub n_t: u32,
    pub n_r: u32,
    pub method: &'static str,
    pub wall_ms: f64,
    pub max_rel_dev: f64,
    pub points: usize,
}

#[derive(Serialize)]
struct BenchRowJson {
    n_t: u32,
    n_r: u32,
    method: &'static str,
    wall_ms: f64,
    max_rel_dev: f64,
    points: usize,
}

#[derive(Serialize)]
struct Machine {
    os: &'static str,
    arch: &'static str,
    threads: usize,
}

#[derive(Serialize)]
struct BenchReport {
    suite: String,
    version: &'static str,
    machine: Machine,
    rows: Vec<BenchRowJson>,
}

pub fn write_bench(rows: &[BenchRow], out: &str, out_file: Option<&Path>) -> Result<(), Failure> {
    check_format(out)?;
    let content = if out == "csv" {
        let mut text = String::from("suite,n_t,n_r,method,wall_ms,max_rel_dev,points\n");
        for r in rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.suite,
                r.n_t,
                r.n_r,
                r.method,
                sci(r.wall_ms),
                sci(r.max_rel_dev),
                r.points
            ));
        }
        text
    } else {
        let report = BenchReport {
            suite: rows.first().map(|r| r.suite.clone()).unwrap_or_default(),
            version: env!("CARGO_PKG_VERSION"),
            machine: Machine {
                os: std::env::consts::OS,
                arch: std::env::consts::ARCH,
                threads: rayon::current_num_threads(),
            },
            rows: rows
                .iter()
                .map(|r| BenchRowJson {
                    n_t: r.n_t,
                    n_r: r.n_r,
                    method: r.method,
                    wall_ms: r.wall_ms,
                    max_rel_dev: r.max_rel_dev,
                    points: r.points,
                })
                .collect(),
        };
        to_json(&report)?
    };
    write_text(out_file, &content)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Io(format!("cannot serialize output: {e}")))
}
