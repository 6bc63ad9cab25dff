//! Tab-separated graph files and CSV measurement files.
//!
//! * edges: `u<TAB>v` per line, 1-based node ids, `u < v`;
//! * memberships: `node<TAB>c1,c2,...` per line, 1-based community ids,
//!   `0` for outliers;
//! * provenance: `u<TAB>v<TAB>tag`, tag 0 for background edges and `j` for
//!   community `j`;
//! * coordinates: `element<TAB>x1<TAB>...<TAB>x_dim`, 1-based element ids;
//! * sequences: one non-negative integer per line.
//!
//! Readers skip blank lines and lines starting with `#`, and accept any
//! whitespace as field separator.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::edges::{edge, Edge};
use crate::error::{Error, Result};
use crate::metrics::{
    background_edge_fraction, communities_per_node_ccdf, community_size_ccdf, ief_summary, ief_top_k,
    intersection_density_profile, intersection_size_ccdf, realized_rho, realized_xi, Ecdf, LabeledNetwork,
};
use crate::reference_layer::ReferencePoints;

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_edges(path: &Path, edges: &[Edge]) -> Result<()> {
    let mut w = create(path)?;
    for &(a, b) in edges {
        writeln!(w, "{}\t{}", a + 1, b + 1)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_memberships(path: &Path, memberships: &[Vec<u32>]) -> Result<()> {
    let mut w = create(path)?;
    let mut line = String::new();
    for (v, m) in memberships.iter().enumerate() {
        line.clear();
        if m.is_empty() {
            line.push('0');
        }
        for (i, c) in m.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&(c + 1).to_string());
        }
        writeln!(w, "{}\t{}", v + 1, line)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_provenance(path: &Path, edges: &[Edge], tags: &[u32]) -> Result<()> {
    assert_eq!(edges.len(), tags.len());
    let mut w = create(path)?;
    for (&(a, b), t) in edges.iter().zip(tags) {
        writeln!(w, "{}\t{}\t{}", a + 1, b + 1, t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coordinates(path: &Path, points: &ReferencePoints) -> Result<()> {
    let mut w = create(path)?;
    for i in 0..points.len() {
        write!(w, "{}", i + 1)?;
        for x in points.point(i) {
            write!(w, "\t{x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sequence(path: &Path, values: &[u32]) -> Result<()> {
    let mut w = create(path)?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Data lines of a file as `(line number, fields)`.
fn records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((i + 1, trimmed.split_whitespace().map(str::to_string).collect()));
    }
    Ok(out)
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, text: &str, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| parse_error(path, line, format!("cannot parse {what} `{text}`")))
}

fn expect_fields(path: &Path, line: usize, fields: &[String], count: usize) -> Result<()> {
    if fields.len() != count {
        return Err(parse_error(
            path,
            line,
            format!("expected {count} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

pub fn read_sequence(path: &Path) -> Result<Vec<u32>> {
    records(path)?
        .into_iter()
        .map(|(line, fields)| {
            expect_fields(path, line, &fields, 1)?;
            field(path, line, &fields[0], "integer")
        })
        .collect()
}

/// 0-based node id from a 1-based field, checked against `n`.
fn node_id(path: &Path, line: usize, text: &str, n: usize) -> Result<u32> {
    let id: u64 = field(path, line, text, "node id")?;
    if id == 0 || id > n as u64 {
        return Err(parse_error(
            path,
            line,
            format!("unknown node id {id}; the membership file defines nodes 1..={n}"),
        ));
    }
    Ok((id - 1) as u32)
}

/// Memberships by external community label; `n` is the number of lines and
/// every node `1..=n` must appear exactly once.
pub fn read_membership_labels(path: &Path) -> Result<Vec<Vec<u64>>> {
    let recs = records(path)?;
    let n = recs.len();
    let mut out: Vec<Option<Vec<u64>>> = vec![None; n];
    for (line, fields) in recs {
        if fields.is_empty() || fields.len() > 2 {
            return Err(parse_error(path, line, "expected `node<TAB>c1,c2,...`"));
        }
        let v = node_id(path, line, &fields[0], n)? as usize;
        if out[v].is_some() {
            return Err(parse_error(path, line, format!("node {} listed twice", v + 1)));
        }
        let mut labels = BTreeSet::new();
        if let Some(list) = fields.get(1) {
            for part in list.split(',') {
                let c: u64 = field(path, line, part, "community id")?;
                if c != 0 {
                    labels.insert(c);
                }
            }
        }
        out[v] = Some(labels.into_iter().collect());
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Edges between nodes `0..n`, normalized; self-loops and repeated edges
/// are rejected.
pub fn read_edges(path: &Path, n: usize) -> Result<Vec<Edge>> {
    let mut seen = HashMap::new();
    let mut edges = Vec::new();
    for (line, fields) in records(path)? {
        expect_fields(path, line, &fields, 2)?;
        let a = node_id(path, line, &fields[0], n)?;
        let b = node_id(path, line, &fields[1], n)?;
        if a == b {
            return Err(parse_error(path, line, format!("self-loop at node {}", a + 1)));
        }
        let e = edge(a, b);
        if let Some(first) = seen.insert(e, line) {
            return Err(parse_error(path, line, format!("edge repeats line {first}")));
        }
        edges.push(e);
    }
    Ok(edges)
}

/// Provenance tags aligned with `edges`.
pub fn read_provenance(path: &Path, edges: &[Edge], n: usize) -> Result<Vec<u32>> {
    let mut tag_of = HashMap::with_capacity(edges.len());
    for (line, fields) in records(path)? {
        expect_fields(path, line, &fields, 3)?;
        let a = node_id(path, line, &fields[0], n)?;
        let b = node_id(path, line, &fields[1], n)?;
        let tag: u32 = field(path, line, &fields[2], "tag")?;
        if tag_of.insert(edge(a, b), tag).is_some() {
            return Err(parse_error(path, line, "edge tagged twice"));
        }
    }
    if tag_of.len() != edges.len() {
        return Err(Error::Domain(format!(
            "{}: {} tagged edges for {} edges",
            path.display(),
            tag_of.len(),
            edges.len()
        )));
    }
    edges
        .iter()
        .map(|e| {
            tag_of.get(e).copied().ok_or_else(|| {
                Error::Domain(format!(
                    "{}: edge ({}, {}) has no tag",
                    path.display(),
                    e.0 + 1,
                    e.1 + 1
                ))
            })
        })
        .collect()
}

/// Builds a network from an edge file, a membership file and optionally a
/// provenance file. Community labels are mapped to dense ids in ascending
/// label order.
pub fn read_labeled_network(edges: &Path, memberships: &Path, provenance: Option<&Path>) -> Result<LabeledNetwork> {
    let raw = read_membership_labels(memberships)?;
    let n = raw.len();
    let labels: Vec<u64> = raw.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let dense: HashMap<u64, u32> = labels.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
    let memberships = raw
        .into_iter()
        .map(|m| m.into_iter().map(|l| dense[&l]).collect())
        .collect();
    let edge_list = read_edges(edges, n)?;
    let tags = match provenance {
        Some(p) => Some(read_provenance(p, &edge_list, n)?),
        None => None,
    };
    LabeledNetwork::new(n, edge_list, memberships, labels, tags)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureOptions {
    pub min_overlap: u64,
    pub ratio_cap: f64,
    pub ief_k: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            min_overlap: 25,
            ratio_cap: 0.5,
            ief_k: 5,
        }
    }
}

fn write_ecdf(path: &Path, column: &str, ecdf: &Ecdf) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{column},ccdf")?;
    for (x, y) in ecdf.values.iter().zip(&ecdf.ccdf) {
        writeln!(w, "{x},{y}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every measurement of `net` into `dir` and returns the paths.
///
/// | file | header |
/// |---|---|
/// | `community_sizes.csv` | `size,ccdf` |
/// | `communities_per_node.csv` | `memberships,ccdf` |
/// | `overlap_k2.csv`, `overlap_k3.csv`, `overlap_k4.csv` | `size,ccdf` |
/// | `intersection_density.csv` | `community_a,community_b,overlap_size,size_a,size_b,overlap_density,density_a,density_b` |
/// | `ief_top{k}.csv` | `node,memberships,ief_1,...,ief_k` |
/// | `ief_summary.csv` | `memberships,rank,count,q25,median,q75` |
/// | `summary.csv` | `key,value` |
///
/// Node and community ids in the files are the external 1-based ones.
pub fn write_metrics(dir: &Path, net: &LabeledNetwork, options: &MeasureOptions) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    write_ecdf(&emit("community_sizes.csv".into()), "size", &community_size_ccdf(net))?;
    write_ecdf(
        &emit("communities_per_node.csv".into()),
        "memberships",
        &communities_per_node_ccdf(net),
    )?;
    for k in 2..=4 {
        write_ecdf(&emit(format!("overlap_k{k}.csv")), "size", &intersection_size_ccdf(net, k))?;
    }

    let mut w = create(&emit("intersection_density.csv".into()))?;
    writeln!(
        w,
        "community_a,community_b,overlap_size,size_a,size_b,overlap_density,density_a,density_b"
    )?;
    for r in intersection_density_profile(net, options.min_overlap, options.ratio_cap) {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            net.labels[r.community_a as usize],
            net.labels[r.community_b as usize],
            r.overlap_size,
            r.size_a,
            r.size_b,
            r.overlap_density,
            r.density_a,
            r.density_b
        )?;
    }
    w.flush()?;

    let profile = ief_top_k(net, options.ief_k);
    let mut w = create(&emit(format!("ief_top{}.csv", options.ief_k)))?;
    write!(w, "node,memberships")?;
    for i in 1..=options.ief_k {
        write!(w, ",ief_{i}")?;
    }
    writeln!(w)?;
    for row in &profile.rows {
        write!(w, "{},{}", row.node + 1, row.memberships)?;
        for v in &row.top {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let mut w = create(&emit("ief_summary.csv".into()))?;
    writeln!(w, "memberships,rank,count,q25,median,q75")?;
    for q in ief_summary(&profile) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            q.memberships, q.rank, q.count, q.q25, q.median, q.q75
        )?;
    }
    w.flush()?;

    let mut w = create(&emit("summary.csv".into()))?;
    writeln!(w, "key,value")?;
    let outliers = net.memberships.iter().filter(|m| m.is_empty()).count();
    writeln!(w, "nodes,{}", net.n)?;
    writeln!(w, "edges,{}", net.edges.len())?;
    writeln!(w, "communities,{}", net.community_count())?;
    writeln!(w, "outliers,{outliers}")?;
    writeln!(w, "realized_xi,{}", realized_xi(net))?;
    match realized_rho(net) {
        Ok(rho) => writeln!(w, "realized_rho,{rho}")?,
        Err(_) => writeln!(w, "realized_rho,")?,
    }
    if let Some(bg) = background_edge_fraction(net) {
        writeln!(w, "background_edge_fraction,{bg}")?;
    }
    writeln!(w, "ief_isolated_skipped,{}", profile.isolated_skipped)?;
    w.flush()?;

    Ok(written)
}
