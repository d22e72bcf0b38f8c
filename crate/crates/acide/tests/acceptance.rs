//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use acide::experiments::{generate_peers, run_admission_sweep, ScenarioSpec};
use acide::formats::records_csv;
use acide_core::{
    admitted_upper_bound, brute_force_admission, build_schedule, join_cluster, min_bandwidth,
    simulate, solve_block_sizes, sort_peers, validate_cluster, AdmissionBudget, AllocationPlan,
    Endpoint, PeerProfile, StreamParams,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const REL: f64 = 1e-9;
const SIZES: [usize; 6] = [5, 10, 15, 20, 40, 60];
const SPEEDS: [f64; 4] = [10_000.0, 12_000.0, 14_000.0, 16_000.0];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1e-12)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

/// 1000 seeded clusters, n in 1..=120, reference ranges, livestream rates
/// 10-16 kbps; clusters that break the mean-upload condition are redrawn.
fn clusters() -> Vec<(Vec<PeerProfile>, StreamParams)> {
    let spec = ScenarioSpec::default();
    let mut out = Vec::with_capacity(1000);
    let mut seed = 0u64;
    while out.len() < 1000 {
        seed += 1;
        let n = 1 + (seed as usize * 37) % 120;
        let row = spec.range_for(n).unwrap();
        let peers = generate_peers(n, row.upload_bps, row.download_bps, seed).unwrap();
        let stream = StreamParams::from_livestream(SPEEDS[seed as usize % 4], 0.2).unwrap();
        if validate_cluster(&peers, &stream).is_ok() {
            out.push((peers, stream));
        }
    }
    out
}

fn plans() -> Vec<AllocationPlan> {
    clusters()
        .iter()
        .map(|(p, s)| min_bandwidth(p, s).unwrap())
        .collect()
}

fn unicast_boundary() -> Outcome {
    let start = Instant::now();
    let spec = ScenarioSpec {
        cluster_sizes: SIZES.to_vec(),
        livestream_bps: vec![10_000.0, 16_000.0],
        budgets_bps: vec![10_000.0, 16_000.0],
        ..Default::default()
    };
    let records = run_admission_sweep(&spec).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for r in records.iter().filter(|r| r.budget_bps == r.livestream_bps) {
        let pct = format!("{:.2}", r.efficiency_pct);
        ensure(r.n_admitted == 1 && pct == "100.00", || {
            format!(
                "N={} v={}: n={} efficiency={pct}",
                r.candidates, r.livestream_bps, r.n_admitted
            )
        })?;
        cells += 1;
    }
    ensure(cells == 12, || format!("expected 12 cells, got {cells}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{cells} cells read n=1, 100.00%"))
}

/// Row `k` of the triangular system evaluated straight from the uploads.
fn row_lhs(uploads: &[f64], sizes: &[f64], k: usize) -> f64 {
    if k == 0 {
        return sizes.iter().sum();
    }
    let prefix: f64 = uploads[..=k].iter().sum();
    prefix / uploads[k] * sizes[k] + sizes[k + 1..].iter().sum::<f64>()
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst_row = 0f64;
    let mut worst_closed = 0f64;
    let all = clusters();
    for (peers, stream) in &all {
        let sorted = sort_peers(peers.clone());
        let uploads: Vec<f64> = sorted.iter().map(|p| p.upload).collect();
        let s = solve_block_sizes(&sorted, stream).map_err(|e| e.to_string())?;
        let total: f64 = uploads.iter().sum();
        for k in 0..uploads.len() {
            worst_row = worst_row.max(rel(row_lhs(&uploads, &s, k), stream.package_size));
            worst_closed = worst_closed.max(rel(s[k], stream.package_size * uploads[k] / total));
        }
    }
    ensure(worst_row < REL, || format!("row residual {worst_row:e}"))?;
    ensure(worst_closed < REL, || {
        format!("closed-form deviation {worst_closed:e}")
    })?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "{} clusters, max row residual {worst_row:.1e}, max closed-form error {worst_closed:.1e}",
        all.len()
    ))
}

fn identity_suite() -> Outcome {
    let mut worst = 0f64;
    for plan in plans() {
        let (package, delay) = (plan.stream.package_size, plan.stream.delay_bound);
        let n = plan.len() as f64;
        let upload_sum = plan.upload_sum();
        let closed_form = package * upload_sum / (delay * upload_sum - (n - 1.0) * package);
        let mut errs = vec![
            rel(plan.phase1_time + plan.phase2_time, delay),
            rel(plan.block_sizes.iter().sum(), package),
            rel(plan.peer_bandwidths.iter().sum(), closed_form),
        ];
        errs.extend(
            plan.block_sizes
                .iter()
                .zip(&plan.peer_bandwidths)
                .map(|(s, bw)| rel(s / bw, plan.phase1_time)),
        );
        worst = errs.into_iter().fold(worst, f64::max);
    }
    ensure(worst < REL, || format!("max identity error {worst:e}"))?;
    Ok(format!("max identity error {worst:.1e}"))
}

fn simulation_makespan() -> Outcome {
    let mut worst = 0f64;
    for plan in plans() {
        let trace = simulate(&plan).map_err(|e| e.to_string())?;
        let n = plan.len();
        worst = worst.max(rel(trace.makespan, plan.stream.delay_bound));
        for pos in 0..n {
            let mut blocks = trace.blocks_received(pos);
            blocks.sort_unstable();
            ensure(blocks == (0..n).collect::<Vec<_>>(), || {
                format!("n={n}: peer {pos} holds {blocks:?}")
            })?;
        }
        for step in 1..n {
            let mut sends = vec![0; n];
            let mut recvs = vec![0; n];
            for e in trace.events.iter().filter(|e| e.step == step) {
                let Endpoint::Peer(id) = &e.sender else {
                    return Err(format!("base station send in step {step}"));
                };
                sends[plan.peers.iter().position(|p| &p.id == id).unwrap()] += 1;
                recvs[plan.peers.iter().position(|p| p.id == e.receiver).unwrap()] += 1;
            }
            ensure(sends.iter().chain(&recvs).all(|&c| c == 1), || {
                format!("n={n} step {step} is not a matching")
            })?;
        }
    }
    ensure(worst < REL, || format!("makespan deviation {worst:e}"))?;

    for n in 1..=128 {
        let schedule = build_schedule(n);
        for step in 1..n {
            let mut sends = vec![0; n];
            let mut recvs = vec![0; n];
            for t in schedule.iter().filter(|t| t.step == step) {
                ensure(t.sender != t.receiver, || format!("self-send at n={n}"))?;
                sends[t.sender] += 1;
                recvs[t.receiver] += 1;
            }
            ensure(sends.iter().chain(&recvs).all(|&c| c == 1), || {
                format!("schedule n={n} step {step}")
            })?;
        }
    }
    Ok(format!(
        "max makespan deviation {worst:.1e}; schedules n<=128 are matchings"
    ))
}

fn greedy_matches_oracle() -> Outcome {
    let start = Instant::now();
    let spec = ScenarioSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..250u64 {
        let n = 1 + (rng.next_u64() % 12) as usize;
        let row = spec.range_for(n).unwrap();
        let pool = generate_peers(n, row.upload_bps, row.download_bps, 1000 + i).unwrap();
        let v = SPEEDS[(rng.next_u64() % 4) as usize];
        let stream = StreamParams::from_livestream(v, 0.2).unwrap();
        let top = min_bandwidth(&pool, &stream)
            .map(|p| p.total_bandwidth)
            .unwrap_or(n as f64 * v);
        let t = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let budget = AdmissionBudget::new(v + t * (top - v), pool.clone(), stream).unwrap();

        let greedy = join_cluster(&budget).map_err(|e| e.to_string())?;
        let oracle = brute_force_admission(&budget).map_err(|e| e.to_string())?;
        ensure(greedy.admitted_count() == oracle.admitted_count(), || {
            format!(
                "instance {i}: greedy {} vs oracle {}",
                greedy.admitted_count(),
                oracle.admitted_count()
            )
        })?;
        let bound = admitted_upper_bound(&pool, &stream, greedy.plan.total_bandwidth)
            .map_err(|e| e.to_string())?;
        let floor = (bound + REL * bound.abs().max(1.0)).floor();
        ensure(greedy.admitted_count() as f64 <= floor, || {
            format!(
                "instance {i}: n={} above bound {bound}",
                greedy.admitted_count()
            )
        })?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok("250 instances agree with exhaustive search and respect the admitted-peer bound".into())
}

fn trend_reproduction() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for seed in [20_231_213u64, 1, 2, 3, 4] {
        let spec = ScenarioSpec {
            seed,
            ..Default::default()
        };
        let records = run_admission_sweep(&spec).map_err(|e| e.to_string())?;

        let mut by_nv: BTreeMap<(usize, u64), Vec<_>> = BTreeMap::new();
        let mut by_nb: BTreeMap<(usize, u64), Vec<_>> = BTreeMap::new();
        for r in &records {
            by_nv
                .entry((r.candidates, r.livestream_bps as u64))
                .or_default()
                .push(r);
            by_nb
                .entry((r.candidates, r.budget_bps as u64))
                .or_default()
                .push(r);
        }
        for ((n, v), mut rows) in by_nv {
            rows.sort_by(|a, b| a.budget_bps.total_cmp(&b.budget_bps));
            for w in rows.windows(2) {
                ensure(w[0].n_admitted <= w[1].n_admitted, || {
                    format!(
                        "seed {seed} N={n} v={v}: n falls from {} to {} as BW grows",
                        w[0].n_admitted, w[1].n_admitted
                    )
                })?;
            }
            let full: Vec<_> = rows.iter().filter(|r| r.n_admitted == n).collect();
            for w in full.windows(2) {
                ensure(w[1].efficiency_pct < w[0].efficiency_pct, || {
                    format!(
                        "seed {seed} N={n} v={v}: efficiency does not fall between BW {} and {}",
                        w[0].budget_bps, w[1].budget_bps
                    )
                })?;
            }
            checked += rows.len();
        }
        for ((n, bw), mut rows) in by_nb {
            rows.sort_by(|a, b| a.livestream_bps.total_cmp(&b.livestream_bps));
            for w in rows.windows(2) {
                ensure(w[1].n_admitted <= w[0].n_admitted, || {
                    format!(
                        "seed {seed} N={n} BW={bw}: n rises from {} to {} as v grows",
                        w[0].n_admitted, w[1].n_admitted
                    )
                })?;
            }
        }
        for r in records.iter().filter(|r| r.feasible) {
            ensure(r.efficiency_pct > 0.0 && r.efficiency_pct <= 100.0, || {
                format!("efficiency {}", r.efficiency_pct)
            })?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{checked} sweep cells over 5 seeds, zero trend violations"
    ))
}

fn reproducibility() -> Outcome {
    let spec = ScenarioSpec::default();
    let a = records_csv(&run_admission_sweep(&spec).map_err(|e| e.to_string())?);
    let b = records_csv(&run_admission_sweep(&spec).map_err(|e| e.to_string())?);
    ensure(a == b, || "library sweep CSVs differ".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_acide"))
            .args(["sweep", "--table1-defaults", "--seed", "7", "--output"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("sweep exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "CLI sweep CSVs differ".into())?;
    Ok(format!(
        "{} byte CSV identical across runs (library and CLI)",
        outputs[0].len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 unicast boundary", unicast_boundary),
        ("2 solver oracle equivalence", solver_oracle),
        ("3 identity suite", identity_suite),
        ("4 simulation makespan", simulation_makespan),
        ("5 greedy = oracle cardinality", greedy_matches_oracle),
        ("6 trend reproduction", trend_reproduction),
        ("7 reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
