//! CSV formats for edge lists, estimates, ground truth and experiment output.
//!
//! All files carry a header row and purely numeric fields. Floats are written
//! with Rust's shortest round-trip formatting, so write-then-parse is exact.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

use crate::evaluation::{ExperimentRecord, SmoothedCurve};
use crate::graph::TimestampedGraph;

pub const EDGE_LIST_HEADER: [&str; 3] = ["src", "dst", "date"];
pub const NODE_ESTIMATE_HEADER: [&str; 3] = ["node", "z_local", "z_model"];
pub const TRUTH_HEADER: [&str; 2] = ["node", "z_true"];
pub const CURVE_HEADER: [&str; 2] = ["edges_per_vertex", "smoothed_improvement"];
pub const RECORD_HEADER: [&str; 12] = [
    "scenario",
    "rewire_fraction",
    "target_density",
    "seed",
    "n_lcc",
    "edges",
    "edges_per_vertex",
    "mse_local",
    "mse_model",
    "improvement",
    "converged",
    "accepted",
];

/// Largest vertex count accepted without `compact`; sparse huge ids would
/// otherwise allocate enormous adjacency tables.
pub const MAX_UNCOMPACTED_VERTICES: usize = 50_000_000;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing header: expected {expected:?}")]
    MissingHeader { expected: String },
    #[error("line {line}: {message}")]
    Field { line: u64, message: String },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: u64, vertex: u64 },
    #[error("line {line}: duplicate pair ({u}, {v}), first seen at line {first_line}")]
    Duplicate {
        line: u64,
        first_line: u64,
        u: u64,
        v: u64,
    },
    #[error("vertex id {max_id} is too large; use compaction")]
    TooManyVertices { max_id: u64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn read_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<(), ParseError> {
    let mut rec = csv::StringRecord::new();
    let missing = || ParseError::MissingHeader {
        expected: expected.join(","),
    };
    if !rdr.read_record(&mut rec)? {
        return Err(missing());
    }
    if rec.iter().ne(expected.iter().copied()) {
        return Err(missing());
    }
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T, ParseError> {
    let line = line_of(rec);
    let raw = rec.get(idx).ok_or_else(|| ParseError::Field {
        line,
        message: format!("missing field {name:?}"),
    })?;
    raw.parse().map_err(|_| ParseError::Field {
        line,
        message: format!("{name}: cannot parse {raw:?}"),
    })
}

/// Edge list rows as `(src, dst, date)` in file order, validated for
/// self-loops and repeated pairs.
fn read_edge_rows<R: Read>(input: R) -> Result<Vec<(u64, u64, f64)>, ParseError> {
    let mut rdr = reader(input);
    read_header(&mut rdr, &EDGE_LIST_HEADER)?;
    let mut rows = Vec::new();
    let mut first_seen: HashMap<(u64, u64), u64> = HashMap::new();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec)? {
        let line = line_of(&rec);
        if rec.len() != 3 {
            return Err(ParseError::Field {
                line,
                message: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let src: u64 = field(&rec, 0, "src")?;
        let dst: u64 = field(&rec, 1, "dst")?;
        let date: f64 = field(&rec, 2, "date")?;
        if !date.is_finite() {
            return Err(ParseError::Field {
                line,
                message: format!("date must be finite, got {date}"),
            });
        }
        if src == dst {
            return Err(ParseError::SelfLoop { line, vertex: src });
        }
        let key = (src.min(dst), src.max(dst));
        if let Some(&first_line) = first_seen.get(&key) {
            return Err(ParseError::Duplicate {
                line,
                first_line,
                u: key.0,
                v: key.1,
            });
        }
        first_seen.insert(key, line);
        rows.push((src, dst, date));
    }
    Ok(rows)
}

/// Parses an edge list. Vertex ids are used as is, so `n = 1 + max id` and
/// unused ids become isolated vertices.
pub fn parse_edge_list<R: Read>(input: R) -> Result<TimestampedGraph, ParseError> {
    let rows = read_edge_rows(input)?;
    let n = match rows.iter().map(|&(s, d, _)| s.max(d)).max() {
        None => 0,
        Some(max_id) if max_id as u128 >= MAX_UNCOMPACTED_VERTICES as u128 => {
            return Err(ParseError::TooManyVertices { max_id })
        }
        Some(max_id) => max_id as usize + 1,
    };
    let edges = rows.into_iter().map(|(s, d, t)| (s as usize, d as usize, t));
    Ok(TimestampedGraph::new(n, edges).expect("rows validated"))
}

/// Parses an edge list and renumbers the ids that occur to `0..k` in
/// ascending order. Returns the graph and the original id of each vertex.
pub fn parse_edge_list_compacted<R: Read>(
    input: R,
) -> Result<(TimestampedGraph, Vec<u64>), ParseError> {
    let rows = read_edge_rows(input)?;
    let ids: Vec<u64> = rows
        .iter()
        .flat_map(|&(s, d, _)| [s, d])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let edges = rows.into_iter().map(|(s, d, t)| (index[&s], index[&d], t));
    let graph = TimestampedGraph::new(ids.len(), edges).expect("rows validated");
    Ok((graph, ids))
}

pub fn write_edge_list<W: Write>(mut out: W, graph: &TimestampedGraph) -> std::io::Result<()> {
    writeln!(out, "{}", EDGE_LIST_HEADER.join(","))?;
    for e in graph.edges() {
        writeln!(out, "{},{},{}", e.u, e.v, e.date)?;
    }
    out.flush()
}

/// One row per vertex: id, local-average estimate, model estimate. `ids`
/// overrides the written vertex ids (e.g. original ids after compaction).
pub fn write_node_estimates<W: Write>(
    mut out: W,
    z_local: &[f64],
    z_model: &[f64],
    ids: Option<&[u64]>,
) -> std::io::Result<()> {
    assert_eq!(z_local.len(), z_model.len());
    writeln!(out, "{}", NODE_ESTIMATE_HEADER.join(","))?;
    for (k, (l, m)) in z_local.iter().zip(z_model).enumerate() {
        let id = ids.map_or(k as u64, |ids| ids[k]);
        writeln!(out, "{id},{l},{m}")?;
    }
    out.flush()
}

/// Rows of a node estimate file as `(node, z_local, z_model)`.
pub fn parse_node_estimates<R: Read>(input: R) -> Result<Vec<(u64, f64, f64)>, ParseError> {
    let mut rdr = reader(input);
    read_header(&mut rdr, &NODE_ESTIMATE_HEADER)?;
    let mut rows = Vec::new();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec)? {
        rows.push((
            field(&rec, 0, "node")?,
            field(&rec, 1, "z_local")?,
            field(&rec, 2, "z_model")?,
        ));
    }
    Ok(rows)
}

pub fn write_truth<W: Write>(mut out: W, z_true: &[f64]) -> std::io::Result<()> {
    writeln!(out, "{}", TRUTH_HEADER.join(","))?;
    for (k, z) in z_true.iter().enumerate() {
        writeln!(out, "{k},{z}")?;
    }
    out.flush()
}

/// Ground-truth dates, which must be listed for nodes `0..n` in order.
pub fn parse_truth<R: Read>(input: R) -> Result<Vec<f64>, ParseError> {
    let mut rdr = reader(input);
    read_header(&mut rdr, &TRUTH_HEADER)?;
    let mut z = Vec::new();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec)? {
        let node: u64 = field(&rec, 0, "node")?;
        if node != z.len() as u64 {
            return Err(ParseError::Field {
                line: line_of(&rec),
                message: format!("expected node {}, found {node}", z.len()),
            });
        }
        z.push(field(&rec, 1, "z_true")?);
    }
    Ok(z)
}

/// Log-likelihood per accepted iteration, starting with the initial value.
pub fn write_trace<W: Write>(mut out: W, trace: &[f64]) -> std::io::Result<()> {
    writeln!(out, "iteration,log_likelihood")?;
    for (k, v) in trace.iter().enumerate() {
        writeln!(out, "{k},{v}")?;
    }
    out.flush()
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Experiment records; fields without a value (discarded networks, failed
/// fits) are left empty.
pub fn write_records<W: Write>(mut out: W, records: &[ExperimentRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", RECORD_HEADER.join(","))?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario.as_str(),
            r.rewire_fraction,
            r.target_density,
            r.seed,
            r.n_lcc,
            r.edges,
            r.edges_per_vertex,
            opt(r.mse_local),
            opt(r.mse_model),
            opt(r.improvement),
            r.converged,
            r.accepted,
        )?;
    }
    out.flush()
}

/// Smoothed curve; grid points without a value get an empty second field.
pub fn write_curve<W: Write>(mut out: W, curve: &SmoothedCurve) -> std::io::Result<()> {
    writeln!(out, "{}", CURVE_HEADER.join(","))?;
    for (x, v) in curve.grid_x.iter().zip(&curve.values) {
        writeln!(out, "{x},{}", opt(*v))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_file() {
        let g = parse_edge_list("src,dst,date\n0,1,1300".as_bytes()).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].date, 1300.0);
    }

    #[test]
    fn gaps_become_isolated_vertices() {
        let g = parse_edge_list("src,dst,date\n0,4,1300.5\n".as_bytes()).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn compaction_renumbers_in_id_order() {
        let (g, ids) = parse_edge_list_compacted("src,dst,date\n40,7,1\n7,12,2\n".as_bytes()).unwrap();
        assert_eq!(ids, vec![7, 12, 40]);
        assert_eq!(g.n(), 3);
        assert!(g.has_edge(0, 2) && g.has_edge(0, 1));
    }

    #[test]
    fn self_loop_reports_line() {
        let err = parse_edge_list("src,dst,date\n3,3,1300\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ParseError::SelfLoop { line: 2, vertex: 3 }), "{err}");
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn duplicate_reports_both_lines() {
        let err = parse_edge_list("src,dst,date\n0,1,1300\n2,3,1\n1,0,1310\n".as_bytes()).unwrap_err();
        assert!(
            matches!(err, ParseError::Duplicate { line: 4, first_line: 2, u: 0, v: 1 }),
            "{err}"
        );
    }

    #[test]
    fn rejects_bad_fields_and_headers() {
        let err = parse_edge_list("src,dst,date\n0,x,1300\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ParseError::Field { line: 2, .. }), "{err}");
        let err = parse_edge_list("src,dst,date\n0,1,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ParseError::Field { line: 2, .. }), "{err}");
        let err = parse_edge_list("src,dst,date\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ParseError::Field { line: 2, .. }), "{err}");
        assert!(matches!(
            parse_edge_list("0,1,1300\n".as_bytes()),
            Err(ParseError::MissingHeader { .. })
        ));
        assert!(matches!(
            parse_edge_list("".as_bytes()),
            Err(ParseError::MissingHeader { .. })
        ));
        assert!(matches!(
            parse_edge_list("src,dst,date\n0,99999999999,1\n".as_bytes()),
            Err(ParseError::TooManyVertices { .. })
        ));
    }

    #[test]
    fn header_only_is_empty_graph() {
        let g = parse_edge_list("src,dst,date\n".as_bytes()).unwrap();
        assert_eq!((g.n(), g.edge_count()), (0, 0));
    }

    #[test]
    fn truth_round_trip() {
        let z = [1234.5678901234567, 1300.0, 1e-3];
        let mut buf = Vec::new();
        write_truth(&mut buf, &z).unwrap();
        assert_eq!(parse_truth(buf.as_slice()).unwrap(), z);
    }

    #[test]
    fn node_estimates_layout() {
        let mut buf = Vec::new();
        write_node_estimates(&mut buf, &[1.5, 2.0], &[1.25, 2.5], None).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "node,z_local,z_model\n0,1.5,1.25\n1,2,2.5\n"
        );
        assert_eq!(
            parse_node_estimates(buf.as_slice()).unwrap(),
            vec![(0, 1.5, 1.25), (1, 2.0, 2.5)]
        );
    }

    #[test]
    fn curve_writes_missing_as_empty() {
        let c = SmoothedCurve {
            grid_x: vec![1.0, 2.0],
            values: vec![Some(-0.5), None],
            bandwidth: 1.0,
        };
        let mut buf = Vec::new();
        write_curve(&mut buf, &c).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "edges_per_vertex,smoothed_improvement\n1,-0.5\n2,\n"
        );
    }
}
