//! Turning search output into checked artifacts.
//!
//! A clique of orbit vertices becomes an explicit code with provenance; the
//! code is verified vector by vector and pair by pair; embeddings move codes
//! between shells with inner products scaled exactly; unions glue codes
//! across shells on the unit sphere; and bound records catalog the results.
//! Everything here re-derives what it claims to check rather than trusting
//! upstream bookkeeping.

pub mod embed;
pub mod rational;
pub mod records;
pub mod spherical;

pub use embed::{
    builtin_orthogonal, embed_scale, hadamard4, read_matrix, write_matrix,
    IntegerOrthogonalMatrix,
};
pub use rational::{rational_embed, rational_embed_gram, realized_inner_products};
pub use records::{
    lookup, merge_records, read_records, render_table, validate_record, write_records,
    BoundRecord,
};
pub use spherical::{
    parse_ratio, read_spherical, spherical_params, union_scaled, write_spherical, ExactCosine,
    SphericalCode,
};

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num::rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::orbitgraph::{admissible_orbits, CompatibilityGraph};
use crate::shellgeom::{inner_unchecked, CodeSpec, LatticeVector, ShellId};
use crate::symgroup::OrbitTable;
use crate::{Error, Result};

/// How a code was obtained, carried along with it for reproducibility.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Canonical text of the symmetry group the search ran under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Chosen vertex indices in the compatibility graph, ascending.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clique: Vec<usize>,
    /// Human-readable pipeline steps, oldest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<String>,
}

/// An explicit code: vectors of one shell, pairwise inner products meant to
/// stay at or below `spec.t`.  Construction does not verify; call
/// [`verify_shell_code`] for the full check.
#[derive(Debug, Clone)]
pub struct ShellCode {
    pub spec: CodeSpec,
    pub vectors: Vec<LatticeVector>,
    pub provenance: Provenance,
}

impl ShellCode {
    pub fn new(spec: CodeSpec, vectors: Vec<LatticeVector>) -> ShellCode {
        ShellCode { spec, vectors, provenance: Provenance::default() }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Everything a full re-check of a code found, pass or fail.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub k: u32,
    pub t: i64,
    pub size: usize,
    /// Indices of vectors with the wrong number of coordinates.
    pub wrong_dimension: Vec<usize>,
    /// Indices of vectors whose squared norm is not `k`.
    pub wrong_norm: Vec<usize>,
    /// Index pairs of equal vectors.
    pub duplicates: Vec<(usize, usize)>,
    /// Largest inner product over distinct pairs; `None` below two vectors.
    pub max_inner: Option<i64>,
    /// A pair realizing `max_inner`.
    pub worst_pair: Option<(usize, usize)>,
    /// Every inner product value realized by a distinct pair.
    pub inner_products: BTreeSet<i64>,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.wrong_dimension.is_empty()
            && self.wrong_norm.is_empty()
            && self.duplicates.is_empty()
            && self.max_inner.is_none_or(|m| m <= self.t)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passes() {
            return write!(
                f,
                "ok: {} vectors in s_{}(Z^{}), max inner product {} <= {}",
                self.size,
                self.k,
                self.n,
                self.max_inner.map_or("none".to_string(), |m| m.to_string()),
                self.t
            );
        }
        write!(f, "failed:")?;
        if !self.wrong_dimension.is_empty() {
            write!(f, " {} vectors of wrong dimension;", self.wrong_dimension.len())?;
        }
        if !self.wrong_norm.is_empty() {
            write!(f, " {} vectors of wrong norm;", self.wrong_norm.len())?;
        }
        if !self.duplicates.is_empty() {
            write!(f, " {} duplicate pairs;", self.duplicates.len())?;
        }
        if let (Some(m), Some((i, j))) = (self.max_inner, self.worst_pair) {
            if m > self.t {
                write!(f, " inner product {m} > {} at pair ({i}, {j});", self.t)?;
            }
        }
        Ok(())
    }
}

/// Re-check a code from scratch: dimensions, norms, distinctness, and every
/// pairwise inner product.  Nothing is trusted from the code's provenance.
pub fn verify_shell_code(code: &ShellCode) -> VerifyReport {
    let n = code.spec.shell.n;
    let k = i64::from(code.spec.shell.k);
    let vectors = &code.vectors;

    let mut wrong_dimension = Vec::new();
    let mut wrong_norm = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if v.dim() != n {
            wrong_dimension.push(i);
        } else if v.norm_sq() != k {
            wrong_norm.push(i);
        }
    }

    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| vectors[a].coords().cmp(vectors[b].coords()));
    let mut duplicates = Vec::new();
    for w in order.windows(2) {
        if vectors[w[0]].coords() == vectors[w[1]].coords() {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            duplicates.push((a, b));
        }
    }
    duplicates.sort_unstable();

    // Pair scan, parallel over the first index; the merge runs in index
    // order so the reported worst pair is deterministic.
    type RowScan = (Option<(i64, usize)>, BTreeSet<i64>);
    let comparable = wrong_dimension.is_empty();
    let (max_inner, worst_pair, inner_products) = if comparable && vectors.len() >= 2 {
        let per_row: Vec<RowScan> = (0..vectors.len() - 1)
            .into_par_iter()
            .map(|i| {
                let mut best: Option<(i64, usize)> = None;
                let mut set = BTreeSet::new();
                for j in i + 1..vectors.len() {
                    let ip = inner_unchecked(vectors[i].coords(), vectors[j].coords());
                    set.insert(ip);
                    if best.is_none_or(|(b, _)| ip > b) {
                        best = Some((ip, j));
                    }
                }
                (best, set)
            })
            .collect();
        let mut max: Option<i64> = None;
        let mut pair = None;
        let mut all = BTreeSet::new();
        for (i, (best, set)) in per_row.into_iter().enumerate() {
            if let Some((ip, j)) = best {
                if max.is_none_or(|m| ip > m) {
                    max = Some(ip);
                    pair = Some((i, j));
                }
            }
            all.extend(set);
        }
        (max, pair, all)
    } else {
        (None, None, BTreeSet::new())
    };

    VerifyReport {
        n,
        k: code.spec.shell.k,
        t: code.spec.t,
        size: vectors.len(),
        wrong_dimension,
        wrong_norm,
        duplicates,
        max_inner,
        worst_pair,
        inner_products,
    }
}

/// Expand chosen orbit vertices into an explicit code.  The admissible
/// vertex list is recomputed from the orbit table and compared against the
/// graph, the choice is checked to be a clique, and the final code is fully
/// verified before being returned.
pub fn assemble(
    table: &OrbitTable,
    graph: &CompatibilityGraph,
    chosen: &[usize],
) -> Result<ShellCode> {
    if graph.spec.shell != table.shell {
        return Err(Error::InvalidParameter(format!(
            "graph is over {}, orbit table over {}",
            graph.spec.shell, table.shell
        )));
    }
    if graph.group.canonical_text() != table.group.canonical_text() {
        return Err(Error::InvalidParameter(
            "graph and orbit table use different groups".into(),
        ));
    }
    let fresh = admissible_orbits(table, graph.spec.t);
    if fresh != graph.vertices {
        return Err(Error::VerificationFailed(
            "graph vertices do not match the orbit table (stale or corrupted graph)".into(),
        ));
    }

    let mut chosen: Vec<usize> = chosen.to_vec();
    chosen.sort_unstable();
    for w in chosen.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidParameter(format!("vertex {} chosen twice", w[0])));
        }
    }
    for &v in &chosen {
        if v >= graph.vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} out of range ({} vertices)",
                graph.vertices.len()
            )));
        }
    }
    for (a, &i) in chosen.iter().enumerate() {
        for &j in &chosen[a + 1..] {
            if !graph.adjacency.has_edge(i, j) {
                return Err(Error::VerificationFailed(format!(
                    "chosen vertices {i} and {j} are not compatible"
                )));
            }
        }
    }

    let mut vectors = Vec::new();
    let mut expected = 0u64;
    for &v in &chosen {
        let orbit_index = graph.vertices[v].orbit_index;
        expected += graph.vertices[v].weight;
        for chunk in table.members(orbit_index) {
            vectors.push(LatticeVector::new(chunk.to_vec()));
        }
    }
    if vectors.len() as u64 != expected {
        return Err(Error::VerificationFailed(format!(
            "expanded {} vectors, vertex weights sum to {expected}",
            vectors.len()
        )));
    }
    vectors.sort_by(|a, b| b.coords().cmp(a.coords()));

    let code = ShellCode {
        spec: graph.spec,
        vectors,
        provenance: Provenance {
            group: Some(table.group.canonical_text()),
            clique: chosen.clone(),
            steps: vec![format!(
                "expanded {} orbit(s) under {} into {expected} vectors",
                chosen.len(),
                table.group.label
            )],
        },
    };
    let report = verify_shell_code(&code);
    if !report.passes() {
        return Err(Error::VerificationFailed(format!(
            "assembled code fails verification: {report}"
        )));
    }
    Ok(code)
}

/// View a code on the unit sphere together with extra scaled points, checked
/// against the exact cosine bound `tmax`.
pub fn augment(
    base: &ShellCode,
    extras: &[(LatticeVector, u32)],
    tmax: Ratio<i64>,
) -> Result<SphericalCode> {
    let k = base.spec.shell.k;
    let mut points: Vec<(LatticeVector, u32)> = base
        .vectors
        .iter()
        .map(|v| (v.clone(), k))
        .collect();
    points.extend_from_slice(extras);
    union_scaled(&points, tmax)
}

/// Write a code as text: `n=<n> k=<k> t=<t>` then one vector per line.
pub fn write_witness(path: &Path, code: &ShellCode) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {} vectors", code.vectors.len())?;
    writeln!(out, "n={} k={} t={}", code.spec.shell.n, code.spec.shell.k, code.spec.t)?;
    for v in &code.vectors {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a code written by [`write_witness`].  Parsing checks shapes only;
/// run [`verify_shell_code`] on the result for the full check.
pub fn read_witness(path: &Path) -> Result<ShellCode> {
    let text = fs::read_to_string(path)?;
    let mut header: Option<CodeSpec> = None;
    let mut vectors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::MalformedFile {
            format: "witness",
            line: lineno,
            msg,
        };
        if header.is_none() {
            let mut n = None;
            let mut k = None;
            let mut t = None;
            for field in line.split_whitespace() {
                if let Some(v) = field.strip_prefix("n=") {
                    n = v.parse::<usize>().ok();
                } else if let Some(v) = field.strip_prefix("k=") {
                    k = v.parse::<u32>().ok();
                } else if let Some(v) = field.strip_prefix("t=") {
                    t = v.parse::<i64>().ok();
                } else {
                    return Err(bad(format!("unexpected header field {field:?}")));
                }
            }
            match (n, k, t) {
                (Some(n), Some(k), Some(t)) => {
                    header = Some(CodeSpec::new(ShellId::new(n, k)?, t)?);
                }
                _ => return Err(bad("expected `n=<n> k=<k> t=<t>`".into())),
            }
            continue;
        }
        let v: LatticeVector = line
            .parse()
            .map_err(|_| bad(format!("bad vector {line:?}")))?;
        if v.dim() != header.as_ref().unwrap().shell.n {
            return Err(bad(format!(
                "vector has {} coordinates, header says {}",
                v.dim(),
                header.as_ref().unwrap().shell.n
            )));
        }
        vectors.push(v);
    }
    let spec = header.ok_or(Error::MalformedFile {
        format: "witness",
        line: text.lines().count(),
        msg: "missing header".into(),
    })?;
    Ok(ShellCode::new(spec, vectors))
}
