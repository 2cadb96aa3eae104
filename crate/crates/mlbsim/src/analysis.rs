//! Post-processing: merging archived solutions into combined fronts,
//! hypervolume comparison against a shared reference, and run summaries.
//! This is also the bridge between runtime structs and the output tables.

use crate::mopso::{dominates, hypervolume, rel_eq, MopsoError, ObjectiveVector, ParetoArchive};
use crate::mopso::{EvalRecord, SwarmRun};
use crate::sim::KpiReport;
use crate::tables::{ArchiveRow, CellLoadRow, EvalRow, HmPairRow, HvRow, KpiRow, SummaryRow};

fn objectives(row: &ArchiveRow) -> ObjectiveVector {
    ObjectiveVector::new(row.throughput_bps, row.p_access)
}

/// Non-dominated filter over solution rows from any number of runs. Labels
/// are preserved; duplicates (1e-12 relative) keep the first occurrence;
/// rows with non-finite objectives are dropped.
pub fn merge_fronts(rows: &[ArchiveRow]) -> Vec<ArchiveRow> {
    let mut front: Vec<ArchiveRow> = Vec::new();
    for row in rows {
        let cand = objectives(row);
        if !cand.is_finite() {
            continue;
        }
        let rejected = front.iter().any(|kept| {
            let k = objectives(kept);
            dominates(&k, &cand)
                || (rel_eq(k.f1, cand.f1) && rel_eq(k.f2, cand.f2))
        });
        if rejected {
            continue;
        }
        front.retain(|kept| !dominates(&cand, &objectives(kept)));
        front.push(row.clone());
    }
    front
}

/// Reference point for hypervolume comparison: component-wise minimum of the
/// points, pushed out by 10% of each objective's span (or by 0.1 where the
/// span collapses), so every point strictly dominates it.
pub fn shared_reference(points: &[ObjectiveVector]) -> Option<ObjectiveVector> {
    if points.is_empty() {
        return None;
    }
    let min1 = points.iter().map(|p| p.f1).fold(f64::INFINITY, f64::min);
    let max1 = points.iter().map(|p| p.f1).fold(f64::NEG_INFINITY, f64::max);
    let min2 = points.iter().map(|p| p.f2).fold(f64::INFINITY, f64::min);
    let max2 = points.iter().map(|p| p.f2).fold(f64::NEG_INFINITY, f64::max);
    let pad = |span: f64| if span > 0.0 { 0.1 * span } else { 0.1 };
    Some(ObjectiveVector::new(min1 - pad(max1 - min1), min2 - pad(max2 - min2)))
}

/// Hypervolume of each label's own front against one shared reference.
/// Rows are pre-filtered per label, so dominated rows within a label don't
/// distort its score.
pub fn hypervolumes_by_label(
    rows: &[ArchiveRow],
    reference: &ObjectiveVector,
) -> Result<Vec<HvRow>, MopsoError> {
    let mut labels: Vec<String> = Vec::new();
    for r in rows {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let mut out = Vec::with_capacity(labels.len());
    for label in labels {
        let subset: Vec<ArchiveRow> =
            rows.iter().filter(|r| r.label == label).cloned().collect();
        let front = merge_fronts(&subset);
        let points: Vec<ObjectiveVector> = front.iter().map(objectives).collect();
        let hv = hypervolume(&points, reference)?;
        out.push(HvRow {
            label,
            points: points.len() as u64,
            hypervolume: hv,
            ref_throughput_bps: reference.f1,
            ref_p_access: reference.f2,
        });
    }
    Ok(out)
}

/// Load tail thresholds for the summary counts.
pub const OVERLOAD_THRESHOLD: f64 = 0.9;
pub const UNDERLOAD_THRESHOLD: f64 = 0.1;

fn load_tails(loads: &[f64]) -> (u64, u64) {
    let over = loads.iter().filter(|&&l| l > OVERLOAD_THRESHOLD).count() as u64;
    let under = loads.iter().filter(|&&l| l < UNDERLOAD_THRESHOLD).count() as u64;
    (over, under)
}

/// Half-width of the 95% normal-approximation interval for a proportion.
fn proportion_ci(p: f64, attempts: u64) -> f64 {
    if attempts == 0 {
        return 0.0;
    }
    1.96 * (p * (1.0 - p) / attempts as f64).sqrt()
}

pub fn summarize_report(label: &str, report: &KpiReport) -> SummaryRow {
    let (over, under) = load_tails(&report.cell_load_avg);
    SummaryRow {
        label: label.to_string(),
        p_access: report.p_access,
        p_access_ci: proportion_ci(report.p_access, report.access_attempts),
        throughput_bps: report.throughput_bps,
        mean_load: report.mean_load(),
        load_std: report.load_std(),
        cells_overloaded: over,
        cells_underloaded: under,
        handover_count: report.handover_count,
        pingpong_count: report.pingpong_count,
    }
}

/// Summary from previously written tables (the file-reading path).
pub fn summarize_rows(kpi: &KpiRow, loads: &[CellLoadRow]) -> SummaryRow {
    let load_values: Vec<f64> = loads.iter().map(|l| l.mean_load).collect();
    let (over, under) = load_tails(&load_values);
    SummaryRow {
        label: kpi.label.clone(),
        p_access: kpi.p_access,
        p_access_ci: proportion_ci(kpi.p_access, kpi.access_attempts),
        throughput_bps: kpi.throughput_bps,
        mean_load: kpi.mean_load,
        load_std: kpi.load_std,
        cells_overloaded: over,
        cells_underloaded: under,
        handover_count: kpi.handover_count,
        pingpong_count: kpi.pingpong_count,
    }
}

/// Pools replicated runs sharing one label. Access counts and handover
/// totals add up; the access probability and its interval come from the
/// pooled counts, so the interval shrinks as 1/sqrt(replications). Per-cell
/// loads are averaged across replications before the spread statistics.
pub fn summarize_group(label: &str, kpis: &[KpiRow], loads: &[CellLoadRow]) -> Option<SummaryRow> {
    if kpis.is_empty() {
        return None;
    }
    if kpis.len() == 1 {
        let only = &kpis[0];
        let mut s = summarize_rows(only, loads);
        s.label = label.to_string();
        return Some(s);
    }
    let attempts: u64 = kpis.iter().map(|k| k.access_attempts).sum();
    let successes: u64 = kpis.iter().map(|k| k.access_successes).sum();
    let p_access =
        if attempts == 0 { 1.0 } else { successes as f64 / attempts as f64 };
    let n = kpis.len() as f64;
    let throughput_bps = kpis.iter().map(|k| k.throughput_bps).sum::<f64>() / n;

    // Per-cell mean over replications, in first-seen cell order.
    let mut ids: Vec<u32> = Vec::new();
    let mut sums: Vec<(f64, u64)> = Vec::new();
    for l in loads {
        match ids.iter().position(|&id| id == l.cell_id) {
            Some(i) => {
                sums[i].0 += l.mean_load;
                sums[i].1 += 1;
            }
            None => {
                ids.push(l.cell_id);
                sums.push((l.mean_load, 1));
            }
        }
    }
    let cell_means: Vec<f64> = sums.iter().map(|&(s, c)| s / c as f64).collect();
    let (over, under) = load_tails(&cell_means);
    let (mean_load, load_std) = if cell_means.is_empty() {
        (
            kpis.iter().map(|k| k.mean_load).sum::<f64>() / n,
            kpis.iter().map(|k| k.load_std).sum::<f64>() / n,
        )
    } else {
        let m = cell_means.iter().sum::<f64>() / cell_means.len() as f64;
        let var =
            cell_means.iter().map(|l| (l - m) * (l - m)).sum::<f64>() / cell_means.len() as f64;
        (m, var.sqrt())
    };

    Some(SummaryRow {
        label: label.to_string(),
        p_access,
        p_access_ci: proportion_ci(p_access, attempts),
        throughput_bps,
        mean_load,
        load_std,
        cells_overloaded: over,
        cells_underloaded: under,
        handover_count: kpis.iter().map(|k| k.handover_count).sum(),
        pingpong_count: kpis.iter().map(|k| k.pingpong_count).sum(),
    })
}

// --- runtime structs to table rows ---

pub fn kpi_row(label: &str, seed: u64, report: &KpiReport) -> KpiRow {
    KpiRow {
        label: label.to_string(),
        seed,
        duration_s: report.duration_s,
        snapshots: report.snapshots,
        access_attempts: report.access_attempts,
        access_successes: report.access_successes,
        p_access: report.p_access,
        zero_attempts: report.zero_attempts,
        throughput_bps: report.throughput_bps,
        handover_count: report.handover_count,
        pingpong_count: report.pingpong_count,
        mean_load: report.mean_load(),
        load_std: report.load_std(),
    }
}

/// One row per cell, in scenario order; `ids` supplies the cell identifiers.
pub fn cell_load_rows(label: &str, ids: &[u32], report: &KpiReport) -> Vec<CellLoadRow> {
    debug_assert_eq!(ids.len(), report.cell_load_avg.len());
    ids.iter()
        .zip(report.cell_load_avg.iter().zip(report.delivered_bits_per_cell.iter()))
        .map(|(&cell_id, (&mean_load, &delivered_bits))| CellLoadRow {
            label: label.to_string(),
            cell_id,
            mean_load,
            delivered_bits,
        })
        .collect()
}

pub fn hm_pair_rows(label: &str, report: &KpiReport) -> Vec<HmPairRow> {
    report
        .hm_pairs
        .iter()
        .map(|p| HmPairRow {
            label: label.to_string(),
            cell_id: p.cell_id,
            neighbor_id: p.neighbor_id,
            mean_hm_db: p.mean_hm_db,
            exchange_count: p.exchange_count,
        })
        .collect()
}

pub fn archive_rows(label: &str, archive: &ParetoArchive) -> Vec<ArchiveRow> {
    archive
        .entries()
        .iter()
        .map(|e| ArchiveRow {
            label: label.to_string(),
            params: e.position.clone(),
            throughput_bps: e.objectives.f1,
            p_access: e.objectives.f2,
        })
        .collect()
}

pub fn eval_rows(label: &str, evals: &[EvalRecord]) -> Vec<EvalRow> {
    evals
        .iter()
        .map(|e| EvalRow {
            label: label.to_string(),
            iteration: e.iteration as u64,
            particle: e.particle as u64,
            params: e.position.clone(),
            objectives: e.objectives.map(|o| (o.f1, o.f2)),
            error: e.error.clone(),
        })
        .collect()
}

/// Archive and log rows for a finished swarm run.
pub fn swarm_rows(label: &str, run: &SwarmRun) -> (Vec<ArchiveRow>, Vec<EvalRow>) {
    (archive_rows(label, &run.archive), eval_rows(label, &run.evals))
}
