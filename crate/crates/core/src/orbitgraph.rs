//! The weighted orbit-compatibility graph.
//!
//! Once a group is prescribed, a code that is a union of orbits is
//! determined by which orbits it uses.  An orbit is *admissible* when its
//! own members stay within the inner-product bound, and two orbits are
//! *compatible* when every cross pair does.  Because the group acts
//! transitively on each orbit and preserves inner products, both checks
//! reduce to scanning one representative against one orbit's members.
//! The admissible orbits become vertices weighted by orbit size, edges
//! mark compatible pairs, and maximum codes correspond to maximum-weight
//! cliques of the resulting graph.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::shellgeom::{inner_unchecked, CodeSpec};
use crate::symgroup::{GroupSpec, OrbitTable};
use crate::{Error, Result};

/// Default cap on admissible orbits per graph.
pub const DEFAULT_MAX_VERTICES: usize = 50_000;
/// Default budget on member-vs-representative scans across all pairs.
pub const DEFAULT_PAIR_SCAN_BUDGET: u128 = 2_000_000_000;

/// Resource limits for graph construction; exceeding either is a clean,
/// reported skip rather than an open-ended computation.
#[derive(Debug, Clone, Copy)]
pub struct BuildLimits {
    pub max_vertices: usize,
    pub pair_scan_budget: u128,
}

impl Default for BuildLimits {
    fn default() -> Self {
        BuildLimits {
            max_vertices: DEFAULT_MAX_VERTICES,
            pair_scan_budget: DEFAULT_PAIR_SCAN_BUDGET,
        }
    }
}

/// One admissible orbit, viewed as a weighted vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitVertex {
    /// Index into the originating [`OrbitTable`].
    pub orbit_index: usize,
    /// Orbit size.
    pub weight: u64,
    /// Max inner product over distinct pairs inside the orbit; `None` for
    /// singleton orbits, which have no such pair.
    pub internal_max_ip: Option<i64>,
}

/// Bit-packed symmetric adjacency without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitGraph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitGraph { n, words, bits: vec![0; n * words] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    pub fn set_edge(&mut self, i: usize, j: usize) {
        debug_assert!(i != j && i < self.n && j < self.n);
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        let total: usize = self.bits.iter().map(|w| w.count_ones() as usize).sum();
        total / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(wi, &w)| {
            std::iter::successors((w != 0).then_some(w), |&w| {
                let rest = w & (w - 1);
                (rest != 0).then_some(rest)
            })
            .map(move |w| wi * 64 + w.trailing_zeros() as usize)
        })
    }

    fn from_upper_rows(n: usize, rows: Vec<Vec<u64>>) -> Self {
        let words = n.div_ceil(64);
        let mut bits = Vec::with_capacity(n * words);
        for row in rows {
            bits.extend_from_slice(&row);
        }
        let mut g = BitGraph { n, words, bits };
        // mirror the strictly-upper half
        for i in 0..n {
            let js: Vec<usize> = g.neighbors(i).filter(|&j| j > i).collect();
            for j in js {
                g.bits[j * words + i / 64] |= 1 << (i % 64);
            }
        }
        g
    }
}

/// Admissible orbits of a shell plus their pairwise compatibility.
#[derive(Debug, Clone)]
pub struct CompatibilityGraph {
    pub spec: CodeSpec,
    pub group: GroupSpec,
    pub vertices: Vec<OrbitVertex>,
    pub adjacency: BitGraph,
}

impl CompatibilityGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.edge_count()
    }

    pub fn weights(&self) -> Vec<u64> {
        self.vertices.iter().map(|v| v.weight).collect()
    }

    /// DIMACS-like text: `p edge V E`, one `n <vertex> <weight>` line per
    /// vertex and one `e <i> <j>` line per edge, all 1-based.
    pub fn write_dimacs(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "c {} within {}, bound {}", self.group.label, self.spec.shell, self.spec.t)?;
        writeln!(out, "p edge {} {}", self.vertex_count(), self.edge_count())?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "n {} {}", i + 1, v.weight)?;
        }
        for i in 0..self.vertex_count() {
            for j in self.adjacency.neighbors(i) {
                if j > i {
                    writeln!(out, "e {} {}", i + 1, j + 1)?;
                }
            }
        }
        Ok(())
    }
}

/// Keep exactly the orbits whose internal max pairwise inner product is at
/// most `t`.  Singleton orbits carry no internal pair and always pass.
/// Transitivity makes the representative-vs-member scan exact.
pub fn admissible_orbits(table: &OrbitTable, t: i64) -> Vec<OrbitVertex> {
    (0..table.orbit_count())
        .filter_map(|idx| {
            let rep = table.rep(idx).coords();
            // the representative is the first member; the rest are w ≠ rep
            let internal_max_ip = table.members(idx).skip(1).map(|m| inner_unchecked(rep, m)).max();
            match internal_max_ip {
                Some(v) if v > t => None,
                _ => Some(OrbitVertex {
                    orbit_index: idx,
                    weight: table.orbits()[idx].size,
                    internal_max_ip,
                }),
            }
        })
        .collect()
}

/// Whether every cross pair between two distinct orbits has inner product
/// at most `t`.  Scans the smaller orbit's members against the larger
/// orbit's representative; transitivity makes this exact.
pub fn cross_compatible(table: &OrbitTable, i: usize, j: usize, t: i64) -> bool {
    debug_assert!(i != j);
    let (scan, rep) = if table.orbits()[i].size <= table.orbits()[j].size {
        (i, table.rep(j).coords())
    } else {
        (j, table.rep(i).coords())
    };
    table.members(scan).all(|m| inner_unchecked(rep, m) <= t)
}

/// Build the compatibility graph with default limits.
pub fn build_graph(table: &OrbitTable, t: i64) -> Result<CompatibilityGraph> {
    build_graph_with_limits(table, t, &BuildLimits::default())
}

/// Build the compatibility graph: vertices are [`admissible_orbits`] in
/// table order (sorted by representative), edges come from
/// [`cross_compatible`] over all unordered pairs.  Deterministic; edge rows
/// are computed in parallel.
pub fn build_graph_with_limits(
    table: &OrbitTable,
    t: i64,
    limits: &BuildLimits,
) -> Result<CompatibilityGraph> {
    let spec = CodeSpec::new(table.shell, t)?;
    let vertices = admissible_orbits(table, t);
    let nv = vertices.len();
    if nv > limits.max_vertices {
        return Err(Error::CapExceeded {
            what: "admissible orbits in one graph",
            needed: nv as u128,
            cap: limits.max_vertices as u128,
        });
    }
    let scan_cost: u128 = vertices
        .iter()
        .enumerate()
        .map(|(a, va)| {
            vertices[a + 1..]
                .iter()
                .map(|vb| u128::from(va.weight.min(vb.weight)))
                .sum::<u128>()
        })
        .sum();
    if scan_cost > limits.pair_scan_budget {
        return Err(Error::CapExceeded {
            what: "cross-pair scans",
            needed: scan_cost,
            cap: limits.pair_scan_budget,
        });
    }
    let words = nv.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..nv)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0u64; words];
            for b in a + 1..nv {
                if cross_compatible(table, vertices[a].orbit_index, vertices[b].orbit_index, t) {
                    row[b / 64] |= 1 << (b % 64);
                }
            }
            row
        })
        .collect();
    let adjacency = BitGraph::from_upper_rows(nv, rows);
    Ok(CompatibilityGraph { spec, group: table.group.clone(), vertices, adjacency })
}

/// Read a DIMACS-like graph: `p edge V E` first, optional `n <v> <w>`
/// weight lines (weights default to 1), `e <i> <j>` edges, `c` comments.
pub fn read_dimacs(path: &Path) -> Result<(Vec<u64>, BitGraph)> {
    let file = std::fs::File::open(path)?;
    let mut weights: Vec<u64> = Vec::new();
    let mut adj: Option<BitGraph> = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let malformed =
            |msg: String| Error::MalformedFile { format: "dimacs", line: lineno, msg };
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let mut fields = t.split_whitespace();
        match fields.next() {
            Some("p") => {
                if adj.is_some() {
                    return Err(malformed("duplicate p line".into()));
                }
                if fields.next() != Some("edge") {
                    return Err(malformed("expected `p edge V E`".into()));
                }
                let nv: usize = fields
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| malformed("bad vertex count".into()))?;
                weights = vec![1; nv];
                adj = Some(BitGraph::new(nv));
            }
            Some("n") => {
                let adj = adj.as_ref().ok_or_else(|| malformed("n line before p line".into()))?;
                let v: usize = fields
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| malformed("bad vertex index".into()))?;
                let w: u64 = fields
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| malformed("bad vertex weight".into()))?;
                if v == 0 || v > adj.n() {
                    return Err(malformed(format!("vertex {v} out of range")));
                }
                weights[v - 1] = w;
            }
            Some("e") => {
                let adj = adj.as_mut().ok_or_else(|| malformed("e line before p line".into()))?;
                let i: usize = fields
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| malformed("bad edge endpoint".into()))?;
                let j: usize = fields
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| malformed("bad edge endpoint".into()))?;
                if i == 0 || j == 0 || i > adj.n() || j > adj.n() || i == j {
                    return Err(malformed(format!("bad edge ({i}, {j})")));
                }
                adj.set_edge(i - 1, j - 1);
            }
            _ => return Err(malformed(format!("unrecognized line {t:?}"))),
        }
    }
    let adj = adj.ok_or(Error::MalformedFile {
        format: "dimacs",
        line: 0,
        msg: "missing p line".into(),
    })?;
    Ok((weights, adj))
}

// ---------------------------------------------------------------------------
// binary adjacency cache

const CACHE_MAGIC: &[u8; 4] = b"OGC1";

/// Cache key over (shell, group generators, bound); FNV-1a.
pub fn graph_cache_key(table: &OrbitTable, t: i64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    };
    eat(&(table.shell.n as u64).to_le_bytes());
    eat(&u64::from(table.shell.k).to_le_bytes());
    eat(&t.to_le_bytes());
    eat(table.group.canonical_text().as_bytes());
    h
}

fn cache_path(dir: &Path, key: u64) -> PathBuf {
    dir.join(format!("graph-{key:016x}.bin"))
}

/// Store a graph's vertex list and adjacency for later reuse.
pub fn write_graph_cache(dir: &Path, table: &OrbitTable, graph: &CompatibilityGraph) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let key = graph_cache_key(table, graph.spec.t);
    let path = cache_path(dir, key);
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&key.to_le_bytes());
    buf.extend_from_slice(&(graph.vertices.len() as u64).to_le_bytes());
    for v in &graph.vertices {
        buf.extend_from_slice(&(v.orbit_index as u64).to_le_bytes());
        buf.extend_from_slice(&v.weight.to_le_bytes());
        match v.internal_max_ip {
            Some(ip) => {
                buf.push(1);
                buf.extend_from_slice(&ip.to_le_bytes());
            }
            None => {
                buf.push(0);
                buf.extend_from_slice(&0i64.to_le_bytes());
            }
        }
    }
    for word in &graph.adjacency.bits {
        buf.extend_from_slice(&word.to_le_bytes());
    }
    std::fs::write(&path, buf)?;
    Ok(path)
}

/// Load a cached graph if a valid entry exists for (shell, group, t) and
/// its vertex list matches the freshly partitioned table; anything else is
/// a miss.
pub fn read_graph_cache(dir: &Path, table: &OrbitTable, t: i64) -> Result<Option<CompatibilityGraph>> {
    let key = graph_cache_key(table, t);
    let path = cache_path(dir, key);
    let data = match std::fs::read(&path) {
        Ok(d) => d,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut r = data.as_slice();
    let mut magic = [0u8; 4];
    if r.read_exact(&mut magic).is_err() || &magic != CACHE_MAGIC {
        return Ok(None);
    }
    let mut u64buf = [0u8; 8];
    let mut next_u64 = |r: &mut &[u8]| -> Option<u64> {
        r.read_exact(&mut u64buf).ok()?;
        Some(u64::from_le_bytes(u64buf))
    };
    if next_u64(&mut r) != Some(key) {
        return Ok(None);
    }
    let nv = match next_u64(&mut r) {
        Some(v) => v as usize,
        None => return Ok(None),
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let orbit_index = match next_u64(&mut r) {
            Some(v) => v as usize,
            None => return Ok(None),
        };
        let weight = match next_u64(&mut r) {
            Some(v) => v,
            None => return Ok(None),
        };
        let mut flag = [0u8; 1];
        if r.read_exact(&mut flag).is_err() {
            return Ok(None);
        }
        let ip = match next_u64(&mut r) {
            Some(v) => v as i64,
            None => return Ok(None),
        };
        vertices.push(OrbitVertex {
            orbit_index,
            weight,
            internal_max_ip: (flag[0] == 1).then_some(ip),
        });
    }
    // stale-entry guard: the cached vertex list must match what the table
    // would produce now
    if vertices != admissible_orbits(table, t) {
        return Ok(None);
    }
    let words = nv.div_ceil(64);
    let mut bits = Vec::with_capacity(nv * words);
    for _ in 0..nv * words {
        match next_u64(&mut r) {
            Some(w) => bits.push(w),
            None => return Ok(None),
        }
    }
    let spec = CodeSpec::new(table.shell, t)?;
    Ok(Some(CompatibilityGraph {
        spec,
        group: table.group.clone(),
        vertices,
        adjacency: BitGraph { n: nv, words, bits },
    }))
}
