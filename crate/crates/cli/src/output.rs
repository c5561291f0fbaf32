use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use qsobolev::ensemble::GENERATOR;
use qsobolev::weyl::WeylConvention;

use crate::commands::{Outcome, Table};
use crate::config::{Format, RunConfig, OUT_DIR_ENV};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("QSOBOLEV_GIT_REV"));

#[derive(Serialize)]
struct Conventions {
    weyl: WeylConvention,
    weyl_operator: &'static str,
    qft: &'static str,
    mass_per_point_g: &'static str,
    mass_per_point_dual: &'static str,
    random_generator: &'static str,
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'static str,
    version: &'static str,
    timestamp: u64,
    passed: bool,
    summary: &'a str,
    config: &'a RunConfig,
    conventions: Conventions,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv_columns: Option<&'a [&'static str]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<&'a Value>,
}

/// Where the report goes: the configured path, else `$QSOBOLEV_OUT_DIR/<command>.<ext>`,
/// else standard output.
pub fn destination(cfg: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &cfg.out {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUT_DIR_ENV)?;
    let ext = match cfg.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    Some(Path::new(&dir).join(format!("{}.{ext}", cfg.command.name())))
}

fn envelope<'a>(cfg: &'a RunConfig, outcome: &'a Outcome, with_results: bool) -> Envelope<'a> {
    Envelope {
        command: cfg.command.name(),
        version: VERSION,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        passed: outcome.passed,
        summary: &outcome.summary,
        config: cfg,
        conventions: Conventions {
            weyl: cfg.convention,
            weyl_operator: match cfg.convention {
                WeylConvention::Standard => "(pi(a,b) psi)(t) = omega^{bt} psi(t+a), omega = exp(2 pi i/N)",
                WeylConvention::Symmetric => {
                    "tau^{-ab} (pi_std(a,b) psi)(t), tau = exp(i pi/N), a and b taken in [0, N)"
                }
            },
            qft: "F(T)(xi) = tr(T pi(xi)^*); T = sum_xi F(T)(xi) pi(xi) / N",
            mass_per_point_g: "1/N",
            mass_per_point_dual: "1/N",
            random_generator: GENERATOR,
        },
        csv_columns: (!with_results).then_some(outcome.table.header.as_slice()),
        results: with_results.then_some(&outcome.results),
    }
}

fn write_csv<W: Write>(table: &Table, w: W) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&table.header)?;
    for row in &table.rows {
        wtr.write_record(row)?;
    }
    wtr.flush()
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("reports serialize");
    out.push(b'\n');
    out
}

/// Writes the report and returns the path it went to, if any. CSV output
/// gets a `<path>.meta.json` sidecar carrying config, version and conventions.
pub fn emit(cfg: &RunConfig, outcome: &Outcome) -> io::Result<Option<PathBuf>> {
    let dest = destination(cfg);
    if let Some(parent) = dest.as_ref().and_then(|p| p.parent()) {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    match (cfg.format, &dest) {
        (Format::Json, Some(path)) => fs::write(path, json_bytes(&envelope(cfg, outcome, true)))?,
        (Format::Json, None) => io::stdout().write_all(&json_bytes(&envelope(cfg, outcome, true)))?,
        (Format::Csv, Some(path)) => {
            write_csv(&outcome.table, fs::File::create(path)?)?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta.json");
            fs::write(meta, json_bytes(&envelope(cfg, outcome, false)))?;
        }
        (Format::Csv, None) => write_csv(&outcome.table, io::stdout().lock())?,
    }
    Ok(dest)
}
