//! Reading peer lists, plans and scenario files; writing CSV tables.
//!
//! Peer lists come as CSV with header `id,u_bps,d_bps`, or as JSON: either a
//! bare array of `{"id", "upload_bps", "download_bps"}` objects or a cluster
//! object
//!
//! ```json
//! {
//!   "peers": [{"id": "a", "upload_bps": 10000, "download_bps": 20000}],
//!   "stream": {"package_bits": 2000, "delay_s": 0.2},
//!   "budget_bps": 15000
//! }
//! ```
//!
//! where `stream` and `budget_bps` are optional. Bandwidths are written with
//! two decimals, sizes with four and times with nine.

use std::fs;
use std::path::{Path, PathBuf};

use acide_core::{AllocationPlan, PeerProfile, SimulationTrace, StreamParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{ClusterProfile, CurvePoint, ExperimentRecord, ScenarioSpec};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_error(path: &Path, e: serde_json::Error) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line: Some(e.line() as u64),
        message: e.to_string(),
    }
}

fn is_json(path: &Path, text: &str) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with(['{', '['])
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterInput {
    pub peers: Vec<PeerProfile>,
    pub stream: Option<StreamParams>,
    pub budget_bps: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterFile {
    peers: Vec<PeerProfile>,
    stream: Option<StreamParams>,
    budget_bps: Option<f64>,
}

#[derive(Deserialize)]
struct CsvPeer {
    id: String,
    u_bps: f64,
    d_bps: f64,
}

fn checked_peer(path: &Path, line: Option<u64>, p: PeerProfile) -> Result<PeerProfile> {
    PeerProfile::new(p.id, p.upload, p.download).map_err(|e| FormatError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

fn parse_csv_peers(path: &Path, text: &str) -> Result<Vec<PeerProfile>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut peers = Vec::new();
    for row in reader.deserialize::<CsvPeer>() {
        let row = row.map_err(|e| FormatError::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()),
            message: e.to_string(),
        })?;
        let line = Some(peers.len() as u64 + 2);
        peers.push(checked_peer(
            path,
            line,
            PeerProfile {
                id: row.id,
                upload: row.u_bps,
                download: row.d_bps,
            },
        )?);
    }
    Ok(peers)
}

fn parse_json_cluster(path: &Path, text: &str) -> Result<ClusterInput> {
    let (peers, stream, budget_bps) = if text.trim_start().starts_with('[') {
        let peers: Vec<PeerProfile> =
            serde_json::from_str(text).map_err(|e| json_error(path, e))?;
        (peers, None, None)
    } else {
        let file: ClusterFile = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
        (file.peers, file.stream, file.budget_bps)
    };
    let peers = peers
        .into_iter()
        .map(|p| checked_peer(path, None, p))
        .collect::<Result<_>>()?;
    let stream = stream
        .map(|s| StreamParams::new(s.package_size, s.delay_bound))
        .transpose()
        .map_err(|e| FormatError::Parse {
            path: path.to_path_buf(),
            line: None,
            message: e.to_string(),
        })?;
    Ok(ClusterInput {
        peers,
        stream,
        budget_bps,
    })
}

/// Reads a peer list from CSV or JSON, picked by extension or content.
pub fn read_cluster(path: &Path) -> Result<ClusterInput> {
    let text = read(path)?;
    if is_json(path, &text) {
        parse_json_cluster(path, &text)
    } else {
        Ok(ClusterInput {
            peers: parse_csv_peers(path, &text)?,
            ..Default::default()
        })
    }
}

/// What `simulate` accepts: a cluster to solve first, or an already solved plan.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationInput {
    Cluster(ClusterInput),
    Plan(AllocationPlan),
}

pub fn read_simulation_input(path: &Path) -> Result<SimulationInput> {
    let text = read(path)?;
    if !is_json(path, &text) {
        return Ok(SimulationInput::Cluster(ClusterInput {
            peers: parse_csv_peers(path, &text)?,
            ..Default::default()
        }));
    }
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    if value.get("block_sizes_bits").is_some() {
        let plan = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
        Ok(SimulationInput::Plan(plan))
    } else {
        parse_json_cluster(path, &text).map(SimulationInput::Cluster)
    }
}

/// Reads a scenario file; the flag reports whether it set `seed` explicitly.
pub fn read_scenario(path: &Path) -> Result<(ScenarioSpec, bool)> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    let has_seed = value.get("seed").is_some();
    let spec = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    Ok((spec, has_seed))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data always serialises");
    s.push('\n');
    s
}

fn csv_table<const N: usize>(
    header: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn bps(x: f64) -> String {
    format!("{x:.2}")
}

fn bits(x: f64) -> String {
    format!("{x:.4}")
}

fn secs(x: f64) -> String {
    format!("{x:.9}")
}

pub fn records_csv(records: &[ExperimentRecord]) -> String {
    csv_table(
        [
            "N",
            "livestream_bps",
            "BW_bps",
            "n_admitted",
            "bw_bps",
            "efficiency_pct",
        ],
        records.iter().map(|r| {
            [
                r.candidates.to_string(),
                bps(r.livestream_bps),
                bps(r.budget_bps),
                r.n_admitted.to_string(),
                bps(r.bw_bps),
                format!("{:.2}", r.efficiency_pct),
            ]
        }),
    )
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    csv_table(
        ["BW_bps", "n"],
        points
            .iter()
            .map(|p| [bps(p.budget_bps), p.admitted.to_string()]),
    )
}

pub fn profile_csv(profile: &ClusterProfile) -> String {
    csv_table(
        ["peer_index", "u_bps", "s_bits", "bw_bps"],
        profile.rows.iter().map(|r| {
            [
                r.peer_index.to_string(),
                bps(r.u_bps),
                bits(r.s_bits),
                bps(r.bw_bps),
            ]
        }),
    )
}

/// Per-peer view of a plan: `id,u_bps,d_bps,s_bits,bw_bps`.
pub fn plan_csv(plan: &AllocationPlan) -> String {
    csv_table(
        ["id", "u_bps", "d_bps", "s_bits", "bw_bps"],
        plan.peers
            .iter()
            .zip(plan.block_sizes.iter().zip(&plan.peer_bandwidths))
            .map(|(p, (&s, &bw))| {
                [
                    p.id.clone(),
                    bps(p.upload),
                    bps(p.download),
                    bits(s),
                    bps(bw),
                ]
            }),
    )
}

pub fn trace_csv(trace: &SimulationTrace) -> String {
    csv_table(
        [
            "phase", "step", "sender", "receiver", "block", "start_s", "end_s", "rate_bps",
        ],
        trace.events.iter().map(|e| {
            [
                e.phase.to_string(),
                e.step.to_string(),
                e.sender.to_string(),
                e.receiver.clone(),
                e.block_index.to_string(),
                secs(e.start_time),
                secs(e.end_time),
                bps(e.rate),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(name: &str, contents: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        fs::File::create(&path)
            .unwrap()
            .write_all(contents.as_bytes())
            .unwrap();
        (dir, path)
    }

    #[test]
    fn reads_csv_peers() {
        let (_d, path) = temp(
            "peers.csv",
            "id,u_bps,d_bps\na,10000,20000\nb, 15000 ,30000\n",
        );
        let input = read_cluster(&path).unwrap();
        assert_eq!(input.peers.len(), 2);
        assert_eq!(input.peers[1].upload, 15000.0);
        assert!(input.stream.is_none());
    }

    #[test]
    fn csv_errors_name_the_line() {
        let (_d, path) = temp("peers.csv", "id,u_bps,d_bps\na,10000,20000\nb,fast,30000\n");
        match read_cluster(&path) {
            Err(FormatError::Parse { line: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let (_d, path) = temp("peers.csv", "id,u_bps,d_bps\na,10000,20000\nb,-5,30000\n");
        let err = read_cluster(&path).unwrap_err();
        assert!(err.to_string().contains("peers.csv:3"), "{err}");
    }

    #[test]
    fn reads_json_cluster_object_and_array() {
        let (_d, path) = temp(
            "c.json",
            r#"{"peers":[{"id":"a","upload_bps":10000,"download_bps":20000}],
                "stream":{"package_bits":2000,"delay_s":0.2},"budget_bps":15000}"#,
        );
        let input = read_cluster(&path).unwrap();
        assert_eq!(input.peers[0].id, "a");
        assert_eq!(input.stream.unwrap().package_size, 2000.0);
        assert_eq!(input.budget_bps, Some(15000.0));

        let (_d, path) = temp("c.json", r#"[{"id":"a","upload_bps":1,"download_bps":2}]"#);
        assert_eq!(read_cluster(&path).unwrap().peers.len(), 1);
    }

    #[test]
    fn json_errors_name_the_line() {
        let (_d, path) = temp(
            "c.json",
            "{\n  \"peers\": [\n    {\"id\": \"a\", \"upload_bps\": \"x\"}\n  ]\n}",
        );
        match read_cluster(&path) {
            Err(FormatError::Parse { line: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scenario_defaults_fill_missing_fields() {
        let (_d, path) = temp("s.json", r#"{"cluster_sizes":[5,10]}"#);
        let (spec, has_seed) = read_scenario(&path).unwrap();
        assert_eq!(spec.cluster_sizes, [5, 10]);
        assert_eq!(spec.delay_s, 0.2);
        assert!(!has_seed);

        let (_d, path) = temp(
            "s.json",
            r#"{"seed":9,"ranges":[{"size":3,"upload_bps":[1,2],"download_bps":[2,3]}]}"#,
        );
        let (spec, has_seed) = read_scenario(&path).unwrap();
        assert!(has_seed);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.ranges[0].upload_bps.high(), 2.0);

        let (_d, path) = temp("s.json", r#"{"sizes":[5]}"#);
        assert!(read_scenario(&path).is_err());
    }

    #[test]
    fn plan_json_is_detected_for_simulation() {
        let peers = vec![PeerProfile::new("a", 10000.0, 20000.0).unwrap()];
        let plan =
            acide_core::min_bandwidth(&peers, &StreamParams::new(2000.0, 0.2).unwrap()).unwrap();
        let (_d, path) = temp("plan.json", &to_json(&plan));
        assert_eq!(
            read_simulation_input(&path).unwrap(),
            SimulationInput::Plan(plan)
        );
    }

    #[test]
    fn csv_formatting() {
        let points = [CurvePoint {
            budget_bps: 10000.0,
            admitted: 1,
        }];
        assert_eq!(curve_csv(&points), "BW_bps,n\n10000.00,1\n");
    }
}
