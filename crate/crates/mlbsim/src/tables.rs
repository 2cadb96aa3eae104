//! Tab-separated output tables and their readers.
//!
//! Every file starts with a magic line `# mlbsim <kind> v1`, then one header
//! row naming the columns, then data rows. Floats are written with Rust's
//! shortest round-trip formatting, so read(write(x)) is bit-exact. Readers
//! never panic on malformed input; they return an error carrying the
//! offending line number.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn format_err(line: usize, message: impl Into<String>) -> TableError {
    TableError::Format { line, message: message.into() }
}

/// Labels name runs inside merged tables; keep them shell- and
/// filename-safe.
pub fn validate_label(label: &str) -> Result<(), TableError> {
    let ok = !label.is_empty()
        && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'));
    if ok {
        Ok(())
    } else {
        Err(format_err(0, format!("label {label:?} must match [A-Za-z0-9_.-]+")))
    }
}

struct TableSpec {
    kind: &'static str,
    columns: &'static [&'static str],
}

impl TableSpec {
    fn magic(&self) -> String {
        format!("# mlbsim {} v1", self.kind)
    }

    fn render(&self, rows: &[Vec<String>]) -> String {
        let mut out = String::new();
        out.push_str(&self.magic());
        out.push('\n');
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), self.columns.len());
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    fn parse(&self, input: &str) -> Result<Vec<Vec<String>>, TableError> {
        let mut lines = input.lines().enumerate();
        let (_, magic) = lines.next().ok_or_else(|| format_err(1, "empty file"))?;
        if magic.trim_end_matches('\r') != self.magic() {
            return Err(format_err(1, format!("expected {:?}, got {magic:?}", self.magic())));
        }
        let (_, header) =
            lines.next().ok_or_else(|| format_err(2, "missing column header"))?;
        let want = self.columns.join("\t");
        if header.trim_end_matches('\r') != want {
            return Err(format_err(2, format!("expected columns {want:?}, got {header:?}")));
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split('\t').map(str::to_string).collect();
            if cells.len() != self.columns.len() {
                return Err(format_err(
                    idx + 1,
                    format!("{} cells, expected {}", cells.len(), self.columns.len()),
                ));
            }
            rows.push(cells);
        }
        Ok(rows)
    }
}

fn cell<T: FromStr>(row: &[String], col: usize, line: usize, name: &str) -> Result<T, TableError>
where
    T::Err: Display,
{
    row[col]
        .parse()
        .map_err(|e| format_err(line, format!("column {name}: {e} (value {:?})", row[col])))
}

/// `-` stands for an absent vector (e.g. the baseline row has no position).
fn params_to_string(params: &[f64]) -> String {
    if params.is_empty() {
        "-".to_string()
    } else {
        params.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
    }
}

fn params_from_str(s: &str, line: usize) -> Result<Vec<f64>, TableError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| format_err(line, format!("column params: {e} (value {p:?})")))
        })
        .collect()
}

/// Data rows start on line 3 (magic + header above them).
const FIRST_DATA_LINE: usize = 3;

// --- kpi ---

const KPI: TableSpec = TableSpec {
    kind: "kpi",
    columns: &[
        "label",
        "seed",
        "duration_s",
        "snapshots",
        "access_attempts",
        "access_successes",
        "p_access",
        "zero_attempts",
        "throughput_bps",
        "handover_count",
        "pingpong_count",
        "mean_load",
        "load_std",
    ],
};

/// Scalar KPI record for one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiRow {
    pub label: String,
    pub seed: u64,
    pub duration_s: f64,
    pub snapshots: u64,
    pub access_attempts: u64,
    pub access_successes: u64,
    pub p_access: f64,
    pub zero_attempts: bool,
    pub throughput_bps: f64,
    pub handover_count: u64,
    pub pingpong_count: u64,
    pub mean_load: f64,
    pub load_std: f64,
}

pub fn kpi_to_string(rows: &[KpiRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        out.push(vec![
            r.label.clone(),
            r.seed.to_string(),
            r.duration_s.to_string(),
            r.snapshots.to_string(),
            r.access_attempts.to_string(),
            r.access_successes.to_string(),
            r.p_access.to_string(),
            r.zero_attempts.to_string(),
            r.throughput_bps.to_string(),
            r.handover_count.to_string(),
            r.pingpong_count.to_string(),
            r.mean_load.to_string(),
            r.load_std.to_string(),
        ]);
    }
    Ok(KPI.render(&out))
}

pub fn kpi_from_str(input: &str) -> Result<Vec<KpiRow>, TableError> {
    KPI.parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            let label: String = cell(row, 0, line, "label")?;
            validate_label(&label).map_err(|_| format_err(line, "invalid label"))?;
            Ok(KpiRow {
                label,
                seed: cell(row, 1, line, "seed")?,
                duration_s: cell(row, 2, line, "duration_s")?,
                snapshots: cell(row, 3, line, "snapshots")?,
                access_attempts: cell(row, 4, line, "access_attempts")?,
                access_successes: cell(row, 5, line, "access_successes")?,
                p_access: cell(row, 6, line, "p_access")?,
                zero_attempts: cell(row, 7, line, "zero_attempts")?,
                throughput_bps: cell(row, 8, line, "throughput_bps")?,
                handover_count: cell(row, 9, line, "handover_count")?,
                pingpong_count: cell(row, 10, line, "pingpong_count")?,
                mean_load: cell(row, 11, line, "mean_load")?,
                load_std: cell(row, 12, line, "load_std")?,
            })
        })
        .collect()
}

// --- cell-loads ---

const CELL_LOADS: TableSpec = TableSpec {
    kind: "cell-loads",
    columns: &["label", "cell_id", "mean_load", "delivered_bits"],
};

/// Per-cell load histogram data.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLoadRow {
    pub label: String,
    pub cell_id: u32,
    pub mean_load: f64,
    pub delivered_bits: u64,
}

pub fn cell_loads_to_string(rows: &[CellLoadRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        out.push(vec![
            r.label.clone(),
            r.cell_id.to_string(),
            r.mean_load.to_string(),
            r.delivered_bits.to_string(),
        ]);
    }
    Ok(CELL_LOADS.render(&out))
}

pub fn cell_loads_from_str(input: &str) -> Result<Vec<CellLoadRow>, TableError> {
    CELL_LOADS
        .parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            Ok(CellLoadRow {
                label: cell(row, 0, line, "label")?,
                cell_id: cell(row, 1, line, "cell_id")?,
                mean_load: cell(row, 2, line, "mean_load")?,
                delivered_bits: cell(row, 3, line, "delivered_bits")?,
            })
        })
        .collect()
}

// --- hm-pairs ---

const HM_PAIRS: TableSpec = TableSpec {
    kind: "hm-pairs",
    columns: &["label", "cell_id", "neighbor_id", "mean_hm_db", "exchange_count"],
};

/// Margin histogram data: each cell paired with its busiest handover
/// neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct HmPairRow {
    pub label: String,
    pub cell_id: u32,
    pub neighbor_id: u32,
    pub mean_hm_db: f64,
    pub exchange_count: u64,
}

pub fn hm_pairs_to_string(rows: &[HmPairRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        out.push(vec![
            r.label.clone(),
            r.cell_id.to_string(),
            r.neighbor_id.to_string(),
            r.mean_hm_db.to_string(),
            r.exchange_count.to_string(),
        ]);
    }
    Ok(HM_PAIRS.render(&out))
}

pub fn hm_pairs_from_str(input: &str) -> Result<Vec<HmPairRow>, TableError> {
    HM_PAIRS
        .parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            Ok(HmPairRow {
                label: cell(row, 0, line, "label")?,
                cell_id: cell(row, 1, line, "cell_id")?,
                neighbor_id: cell(row, 2, line, "neighbor_id")?,
                mean_hm_db: cell(row, 3, line, "mean_hm_db")?,
                exchange_count: cell(row, 4, line, "exchange_count")?,
            })
        })
        .collect()
}

// --- archive / front ---

const ARCHIVE_COLUMNS: &[&str] = &["label", "params", "throughput_bps", "p_access"];
const ARCHIVE: TableSpec = TableSpec { kind: "archive", columns: ARCHIVE_COLUMNS };
const FRONT: TableSpec = TableSpec { kind: "front", columns: ARCHIVE_COLUMNS };

/// One non-dominated solution: its position and objective values. The same
/// schema serves both raw campaign archives and merged fronts.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveRow {
    pub label: String,
    /// Empty for position-less reference points (e.g. the planning run).
    pub params: Vec<f64>,
    pub throughput_bps: f64,
    pub p_access: f64,
}

fn solution_rows_to_string(spec: &TableSpec, rows: &[ArchiveRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        out.push(vec![
            r.label.clone(),
            params_to_string(&r.params),
            r.throughput_bps.to_string(),
            r.p_access.to_string(),
        ]);
    }
    Ok(spec.render(&out))
}

fn solution_rows_from_str(spec: &TableSpec, input: &str) -> Result<Vec<ArchiveRow>, TableError> {
    spec.parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            let label: String = cell(row, 0, line, "label")?;
            validate_label(&label).map_err(|_| format_err(line, "invalid label"))?;
            Ok(ArchiveRow {
                label,
                params: params_from_str(&row[1], line)?,
                throughput_bps: cell(row, 2, line, "throughput_bps")?,
                p_access: cell(row, 3, line, "p_access")?,
            })
        })
        .collect()
}

pub fn archive_to_string(rows: &[ArchiveRow]) -> Result<String, TableError> {
    solution_rows_to_string(&ARCHIVE, rows)
}

pub fn archive_from_str(input: &str) -> Result<Vec<ArchiveRow>, TableError> {
    solution_rows_from_str(&ARCHIVE, input)
}

pub fn front_to_string(rows: &[ArchiveRow]) -> Result<String, TableError> {
    solution_rows_to_string(&FRONT, rows)
}

pub fn front_from_str(input: &str) -> Result<Vec<ArchiveRow>, TableError> {
    solution_rows_from_str(&FRONT, input)
}

// --- eval-log ---

const EVAL_LOG: TableSpec = TableSpec {
    kind: "eval-log",
    columns: &["label", "iteration", "particle", "params", "throughput_bps", "p_access", "error"],
};

/// One fitness evaluation; failed evaluations carry an error note instead of
/// objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub label: String,
    pub iteration: u64,
    pub particle: u64,
    pub params: Vec<f64>,
    pub objectives: Option<(f64, f64)>,
    pub error: Option<String>,
}

pub fn eval_log_to_string(rows: &[EvalRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        let (f1, f2) = match r.objectives {
            Some((f1, f2)) => (f1.to_string(), f2.to_string()),
            None => ("NA".to_string(), "NA".to_string()),
        };
        // Error notes are free text; tabs and newlines would break the row.
        let error = match &r.error {
            Some(e) => e.replace(['\t', '\n', '\r'], " "),
            None => "-".to_string(),
        };
        out.push(vec![
            r.label.clone(),
            r.iteration.to_string(),
            r.particle.to_string(),
            params_to_string(&r.params),
            f1,
            f2,
            error,
        ]);
    }
    Ok(EVAL_LOG.render(&out))
}

pub fn eval_log_from_str(input: &str) -> Result<Vec<EvalRow>, TableError> {
    EVAL_LOG
        .parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            let objectives = match (row[4].as_str(), row[5].as_str()) {
                ("NA", "NA") => None,
                _ => Some((
                    cell::<f64>(row, 4, line, "throughput_bps")?,
                    cell::<f64>(row, 5, line, "p_access")?,
                )),
            };
            Ok(EvalRow {
                label: cell(row, 0, line, "label")?,
                iteration: cell(row, 1, line, "iteration")?,
                particle: cell(row, 2, line, "particle")?,
                params: params_from_str(&row[3], line)?,
                objectives,
                error: (row[6] != "-").then(|| row[6].clone()),
            })
        })
        .collect()
}

// --- hv ---

const HV: TableSpec = TableSpec {
    kind: "hv",
    columns: &["label", "points", "hypervolume", "ref_throughput_bps", "ref_p_access"],
};

/// Hypervolume of one front against a shared reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct HvRow {
    pub label: String,
    pub points: u64,
    pub hypervolume: f64,
    pub ref_throughput_bps: f64,
    pub ref_p_access: f64,
}

pub fn hv_to_string(rows: &[HvRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        out.push(vec![
            r.label.clone(),
            r.points.to_string(),
            r.hypervolume.to_string(),
            r.ref_throughput_bps.to_string(),
            r.ref_p_access.to_string(),
        ]);
    }
    Ok(HV.render(&out))
}

pub fn hv_from_str(input: &str) -> Result<Vec<HvRow>, TableError> {
    HV.parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            Ok(HvRow {
                label: cell(row, 0, line, "label")?,
                points: cell(row, 1, line, "points")?,
                hypervolume: cell(row, 2, line, "hypervolume")?,
                ref_throughput_bps: cell(row, 3, line, "ref_throughput_bps")?,
                ref_p_access: cell(row, 4, line, "ref_p_access")?,
            })
        })
        .collect()
}

// --- summary ---

const SUMMARY: TableSpec = TableSpec {
    kind: "summary",
    columns: &[
        "label",
        "p_access",
        "p_access_ci",
        "throughput_bps",
        "mean_load",
        "load_std",
        "cells_overloaded",
        "cells_underloaded",
        "handover_count",
        "pingpong_count",
    ],
};

/// Aggregated run statistics for side-by-side comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub p_access: f64,
    /// Half-width of the 95% binomial confidence interval.
    pub p_access_ci: f64,
    pub throughput_bps: f64,
    pub mean_load: f64,
    pub load_std: f64,
    pub cells_overloaded: u64,
    pub cells_underloaded: u64,
    pub handover_count: u64,
    pub pingpong_count: u64,
}

pub fn summary_to_string(rows: &[SummaryRow]) -> Result<String, TableError> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        validate_label(&r.label)?;
        out.push(vec![
            r.label.clone(),
            r.p_access.to_string(),
            r.p_access_ci.to_string(),
            r.throughput_bps.to_string(),
            r.mean_load.to_string(),
            r.load_std.to_string(),
            r.cells_overloaded.to_string(),
            r.cells_underloaded.to_string(),
            r.handover_count.to_string(),
            r.pingpong_count.to_string(),
        ]);
    }
    Ok(SUMMARY.render(&out))
}

pub fn summary_from_str(input: &str) -> Result<Vec<SummaryRow>, TableError> {
    SUMMARY
        .parse(input)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + FIRST_DATA_LINE;
            Ok(SummaryRow {
                label: cell(row, 0, line, "label")?,
                p_access: cell(row, 1, line, "p_access")?,
                p_access_ci: cell(row, 2, line, "p_access_ci")?,
                throughput_bps: cell(row, 3, line, "throughput_bps")?,
                mean_load: cell(row, 4, line, "mean_load")?,
                load_std: cell(row, 5, line, "load_std")?,
                cells_overloaded: cell(row, 6, line, "cells_overloaded")?,
                cells_underloaded: cell(row, 7, line, "cells_underloaded")?,
                handover_count: cell(row, 8, line, "handover_count")?,
                pingpong_count: cell(row, 9, line, "pingpong_count")?,
            })
        })
        .collect()
}

// --- file helpers ---

pub fn read_to_string(path: &Path) -> Result<String, TableError> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_string(path: &Path, contents: &str) -> Result<(), TableError> {
    Ok(std::fs::write(path, contents)?)
}
