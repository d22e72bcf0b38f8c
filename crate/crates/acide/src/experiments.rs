//! Scenario generation and the admission sweeps behind the experiment tables.
//!
//! Candidate pools are drawn with ChaCha8 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64(seed)` with the stream number set to the pool
//! size, so every pool size gets an independent sequence from one seed.
//! Uniform draws use the top 53 bits of `next_u64`:
//! `low + (high - low) * (x >> 11) * 2^-53`.

use acide_core::{
    allocated_bandwidth, join_cluster, min_bandwidth, AdmissionBudget, Error as ModelError,
    PeerProfile, StreamParams,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use acide_core::{baseline_bandwidths, Baselines};

pub const DEFAULT_SEED: u64 = 20_231_213;
/// Environment variable that replaces [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "ACIDE_SEED";
/// Redraw limit for the `max(u) <= min(d)` rejection loop.
pub const MAX_REDRAWS: usize = 10_000;
pub const DEFAULT_DELAY_S: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid range [{low}, {high}]: bounds must be positive with low <= high")]
    InvalidRange { low: f64, high: f64 },
    #[error(
        "upload range starts at {upload_low} bps, above the download range end {download_high} bps"
    )]
    ImpossibleConstraint { upload_low: f64, download_high: f64 },
    #[error("no draw satisfied max upload <= min download after {0} attempts")]
    RejectionLimit(usize),
    #[error("no bandwidth range row covers cluster size {0}")]
    NoRange(usize),
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("cluster of {size}: block/bandwidth ratios are not all equal to T1")]
    RatioMismatch { size: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

/// Inclusive `[low, high]` in bits per second. Serialised as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRange(pub f64, pub f64);

impl BandwidthRange {
    pub fn low(&self) -> f64 {
        self.0
    }

    pub fn high(&self) -> f64 {
        self.1
    }

    fn check(&self) -> Result<()> {
        let (low, high) = (self.0, self.1);
        if !(low.is_finite() && high.is_finite() && low > 0.0 && low <= high) {
            return Err(ExperimentError::InvalidRange { low, high });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub size: usize,
    pub upload_bps: BandwidthRange,
    pub download_bps: BandwidthRange,
}

/// Upload and download ranges per cluster size used by the reference experiments.
pub fn default_ranges() -> Vec<RangeRow> {
    [
        (5, 20_000.0, 20_000.0, 30_000.0),
        (10, 30_000.0, 30_000.0, 50_000.0),
        (15, 40_000.0, 40_000.0, 70_000.0),
        (20, 50_000.0, 50_000.0, 90_000.0),
        (40, 60_000.0, 60_000.0, 110_000.0),
        (60, 70_000.0, 70_000.0, 130_000.0),
        (80, 80_000.0, 80_000.0, 150_000.0),
        (100, 90_000.0, 90_000.0, 170_000.0),
        (120, 100_000.0, 100_000.0, 190_000.0),
    ]
    .into_iter()
    .map(|(size, up_high, down_low, down_high)| RangeRow {
        size,
        upload_bps: BandwidthRange(10_000.0, up_high),
        download_bps: BandwidthRange(down_low, down_high),
    })
    .collect()
}

/// Parameters of a sweep. Missing JSON fields fall back to the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub cluster_sizes: Vec<usize>,
    pub ranges: Vec<RangeRow>,
    pub delay_s: f64,
    pub livestream_bps: Vec<f64>,
    pub budgets_bps: Vec<f64>,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            cluster_sizes: vec![5, 10, 15, 20, 40, 60],
            ranges: default_ranges(),
            delay_s: DEFAULT_DELAY_S,
            livestream_bps: vec![10_000.0, 12_000.0, 14_000.0, 16_000.0],
            // Union of the budget columns reported for 10 kbps and 16 kbps.
            budgets_bps: vec![
                60_000.0, 50_000.0, 40_000.0, 30_000.0, 20_000.0, 18_000.0, 16_000.0, 14_000.0,
                12_000.0, 10_000.0,
            ],
            seed: DEFAULT_SEED,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(ExperimentError::InvalidSpec(msg.to_string()));
        if self.cluster_sizes.is_empty() || self.cluster_sizes.contains(&0) {
            return invalid("cluster_sizes must be non-empty and every size >= 1");
        }
        if !(self.delay_s.is_finite() && self.delay_s > 0.0) {
            return invalid("delay_s must be positive");
        }
        let positive = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x > 0.0);
        if self.livestream_bps.is_empty() || !positive(&self.livestream_bps) {
            return invalid("livestream_bps must be non-empty and positive");
        }
        if self.budgets_bps.is_empty() || !positive(&self.budgets_bps) {
            return invalid("budgets_bps must be non-empty and positive");
        }
        for row in &self.ranges {
            if row.size == 0 {
                return invalid("range rows need size >= 1");
            }
            row.upload_bps.check()?;
            row.download_bps.check()?;
        }
        for &n in &self.cluster_sizes {
            self.range_for(n)?;
        }
        Ok(())
    }

    /// The row for `size`, or else the smallest row covering a larger size.
    pub fn range_for(&self, size: usize) -> Result<&RangeRow> {
        self.ranges
            .iter()
            .find(|r| r.size == size)
            .or_else(|| {
                self.ranges
                    .iter()
                    .filter(|r| r.size > size)
                    .min_by_key(|r| r.size)
            })
            .ok_or(ExperimentError::NoRange(size))
    }

    pub fn stream(&self, livestream_bps: f64) -> Result<StreamParams> {
        Ok(StreamParams::from_livestream(livestream_bps, self.delay_s)?)
    }

    /// Candidate pool for `size` under this spec's ranges and seed.
    pub fn pool(&self, size: usize) -> Result<Vec<PeerProfile>> {
        let row = self.range_for(size)?;
        generate_peers(size, row.upload_bps, row.download_bps, self.seed)
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn draw(rng: &mut ChaCha8Rng, range: BandwidthRange) -> f64 {
    range.low() + (range.high() - range.low()) * unit(rng)
}

/// Draws `size` peers whose uploads all sit below every download, sorted by
/// upload. Ids are `p001`, `p002`, ... in that order.
pub fn generate_peers(
    size: usize,
    upload: BandwidthRange,
    download: BandwidthRange,
    seed: u64,
) -> Result<Vec<PeerProfile>> {
    upload.check()?;
    download.check()?;
    if upload.low() > download.high() {
        return Err(ExperimentError::ImpossibleConstraint {
            upload_low: upload.low(),
            download_high: download.high(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(size as u64);
    for _ in 0..MAX_REDRAWS {
        let mut ups: Vec<f64> = (0..size).map(|_| draw(&mut rng, upload)).collect();
        let downs: Vec<f64> = (0..size).map(|_| draw(&mut rng, download)).collect();
        let max_up = ups.iter().cloned().fold(f64::MIN, f64::max);
        let min_down = downs.iter().cloned().fold(f64::MAX, f64::min);
        if max_up > min_down {
            continue;
        }
        ups.sort_by(f64::total_cmp);
        return ups
            .into_iter()
            .zip(downs)
            .enumerate()
            .map(|(i, (u, d))| Ok(PeerProfile::new(format!("p{:03}", i + 1), u, d)?))
            .collect();
    }
    Err(ExperimentError::RejectionLimit(MAX_REDRAWS))
}

/// One cell of the admission sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    #[serde(rename = "N")]
    pub candidates: usize,
    pub livestream_bps: f64,
    #[serde(rename = "BW_bps")]
    pub budget_bps: f64,
    pub n_admitted: usize,
    pub bw_bps: f64,
    pub efficiency_pct: f64,
    /// False when the budget is below the livestream bandwidth.
    pub feasible: bool,
}

fn admit(
    pool: &[PeerProfile],
    stream: StreamParams,
    budget: f64,
    n: usize,
    v: f64,
) -> Result<ExperimentRecord> {
    let mut record = ExperimentRecord {
        candidates: n,
        livestream_bps: v,
        budget_bps: budget,
        n_admitted: 0,
        bw_bps: 0.0,
        efficiency_pct: 0.0,
        feasible: false,
    };
    match join_cluster(&AdmissionBudget::new(budget, pool.to_vec(), stream)?) {
        Ok(out) => {
            record.n_admitted = out.admitted_count();
            record.bw_bps = out.plan.total_bandwidth;
            record.efficiency_pct = out.efficiency * 100.0;
            record.feasible = true;
        }
        Err(ModelError::InsufficientBudget { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(record)
}

fn sorted_unique<T: Copy + PartialOrd>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("validated values are finite"));
    v.dedup_by(|a, b| a == b);
    v
}

/// Runs greedy admission over every (N, v, BW) combination.
///
/// Records come out ordered by N ascending, v ascending, BW descending. One
/// candidate pool is drawn per N and shared by every v and BW.
pub fn run_admission_sweep(spec: &ScenarioSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let sizes = sorted_unique(&spec.cluster_sizes);
    let speeds = sorted_unique(&spec.livestream_bps);
    let mut budgets = sorted_unique(&spec.budgets_bps);
    budgets.reverse();

    let mut records = Vec::with_capacity(sizes.len() * speeds.len() * budgets.len());
    for &n in &sizes {
        let pool = spec.pool(n)?;
        for &v in &speeds {
            let stream = spec.stream(v)?;
            for &bw in &budgets {
                records.push(admit(&pool, stream, bw, n, v)?);
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "BW_bps")]
    pub budget_bps: f64,
    #[serde(rename = "n")]
    pub admitted: usize,
}

/// Admitted count over `n` evenly spaced budgets, from `S/T` up to the cost
/// of admitting the whole pool.
///
/// Fails with an infeasibility error if the whole pool has no finite
/// allocation at this livestream bandwidth.
pub fn admitted_vs_budget_curve(
    spec: &ScenarioSpec,
    n: usize,
    livestream_bps: f64,
) -> Result<Vec<CurvePoint>> {
    let pool = spec.pool(n)?;
    let stream = spec.stream(livestream_bps)?;
    let floor = stream.livestream_bandwidth();
    let top = allocated_bandwidth(&pool, &stream)?;

    (0..n)
        .map(|i| {
            let budget = if i + 1 == n {
                top
            } else {
                floor + (top - floor) * i as f64 / (n - 1) as f64
            };
            let out = join_cluster(&AdmissionBudget::new(budget, pool.clone(), stream)?)?;
            Ok(CurvePoint {
                budget_bps: budget,
                admitted: out.admitted_count(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    /// 1-based position in upload order.
    pub peer_index: usize,
    pub u_bps: f64,
    pub s_bits: f64,
    pub bw_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub size: usize,
    pub phase1_s: f64,
    pub total_bandwidth_bps: f64,
    pub rows: Vec<ProfileRow>,
}

/// Optimal block sizes and bandwidths per peer for each cluster size.
///
/// Fails if any block's transfer time differs from the plan's Phase 1 time.
pub fn block_size_profile(
    spec: &ScenarioSpec,
    sizes: &[usize],
    livestream_bps: f64,
) -> Result<Vec<ClusterProfile>> {
    let stream = spec.stream(livestream_bps)?;
    sizes
        .iter()
        .map(|&size| {
            let plan = min_bandwidth(&spec.pool(size)?, &stream)?;
            let equal_ratio = plan
                .block_sizes
                .iter()
                .zip(&plan.peer_bandwidths)
                .all(|(s, bw)| acide_core::tolerance::approx_eq(s / bw, plan.phase1_time));
            if !equal_ratio {
                return Err(ExperimentError::RatioMismatch { size });
            }
            let rows = plan
                .peers
                .iter()
                .zip(plan.block_sizes.iter().zip(&plan.peer_bandwidths))
                .enumerate()
                .map(|(i, (p, (&s, &bw)))| ProfileRow {
                    peer_index: i + 1,
                    u_bps: p.upload,
                    s_bits: s,
                    bw_bps: bw,
                })
                .collect();
            Ok(ClusterProfile {
                size,
                phase1_s: plan.phase1_time,
                total_bandwidth_bps: plan.total_bandwidth,
                rows,
            })
        })
        .collect()
}
