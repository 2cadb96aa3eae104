//! KPI accumulation and the end-of-run report.

/// Margin statistics for one cell and its busiest handover partner.
#[derive(Debug, Clone, PartialEq)]
pub struct HmPairStat {
    pub cell_id: u32,
    pub neighbor_id: u32,
    /// Time-averaged HM(cell, neighbor) over the measured window.
    pub mean_hm_db: f64,
    /// Handovers in both directions between the pair.
    pub exchange_count: u64,
}

/// Everything a finished run reports. All counters cover the measured window
/// only (warmup excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct KpiReport {
    /// Measured duration in seconds.
    pub duration_s: f64,
    pub snapshots: u64,
    pub access_attempts: u64,
    pub access_successes: u64,
    /// successes / attempts; 1.0 when no attempt was ever made.
    pub p_access: f64,
    /// True iff p_access is the zero-attempts convention, not a measurement.
    pub zero_attempts: bool,
    /// Total delivered bits across cells over the measured duration.
    pub throughput_bps: f64,
    pub delivered_bits_per_cell: Vec<u64>,
    /// Time-averaged instantaneous load per cell.
    pub cell_load_avg: Vec<f64>,
    pub handover_count: u64,
    pub pingpong_count: u64,
    /// One row per cell that exchanged handovers with anyone.
    pub hm_pairs: Vec<HmPairStat>,
}

impl KpiReport {
    pub fn mean_load(&self) -> f64 {
        if self.cell_load_avg.is_empty() {
            return 0.0;
        }
        self.cell_load_avg.iter().sum::<f64>() / self.cell_load_avg.len() as f64
    }

    /// Population standard deviation of the per-cell average loads.
    pub fn load_std(&self) -> f64 {
        let n = self.cell_load_avg.len();
        if n == 0 {
            return 0.0;
        }
        let mean = self.mean_load();
        (self.cell_load_avg.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
    }
}

/// Running counters; gated on the warmup boundary by the engine.
#[derive(Debug, Clone)]
pub(crate) struct KpiCounters {
    pub attempts: u64,
    pub successes: u64,
    pub delivered_bits: Vec<u64>,
    pub load_sum: Vec<f64>,
    pub counted_snapshots: u64,
    pub handover_count: u64,
    pub pingpong_count: u64,
    /// Handover counts by ordered (from, to) pair.
    pub ho_matrix: Vec<u64>,
    /// Sum and count of finite HM(k, i) entries per ordered pair.
    pub hm_sum: Vec<f64>,
    pub hm_snapshots: Vec<u64>,
}

impl KpiCounters {
    pub fn new(n_cells: usize) -> Self {
        KpiCounters {
            attempts: 0,
            successes: 0,
            delivered_bits: vec![0; n_cells],
            load_sum: vec![0.0; n_cells],
            counted_snapshots: 0,
            handover_count: 0,
            pingpong_count: 0,
            ho_matrix: vec![0; n_cells * n_cells],
            hm_sum: vec![0.0; n_cells * n_cells],
            hm_snapshots: vec![0; n_cells * n_cells],
        }
    }
}
