//! Shell geometry of the integer lattice.
//!
//! The shell `s_k` of `Z^n` is the finite set of integer vectors with
//! squared norm exactly `k`.  Everything downstream rests on three facts:
//!
//! * inner products between shell vectors are integers in `[-k, k]`, and
//!   between *distinct* vectors in `[-k, k-1]`;
//! * the signed permutations act on each shell, and every orbit has a unique
//!   canonical representative (absolute values sorted descending);
//! * shell sizes can be counted without enumeration by convolving the
//!   one-dimensional squared-norm counts, which gives an independent check
//!   on the enumerator.
//!
//! | function            | role                                            |
//! |---------------------|-------------------------------------------------|
//! | [`enumerate_shell`] | all shell vectors in lexicographic order        |
//! | [`shell_size`]      | counting via convolution, no enumeration        |
//! | [`canonical_form`]  | orbit invariant under all signed permutations   |
//! | [`aut_orbit_reps`]  | canonical representatives without enumeration   |
//! | [`aut_orbit_size`]  | orbit size from the multiset shape alone        |
//! | [`expand_aut_orbit`]| materialize one full orbit from its rep         |

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

/// Default cap on materialized shell sizes.
pub const DEFAULT_SHELL_CAP: u64 = 10_000_000;

/// Identifies the shell `s_k` inside `Z^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct ShellId {
    pub n: usize,
    pub k: u32,
}

impl ShellId {
    pub fn new(n: usize, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension n must be positive".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("squared norm k must be positive".into()));
        }
        Ok(ShellId { n, k })
    }
}

impl fmt::Display for ShellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s_{} of Z^{}", self.k, self.n)
    }
}

/// What a search is after: a shell plus an inner-product bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct CodeSpec {
    pub shell: ShellId,
    pub t: i64,
}

impl CodeSpec {
    /// `t` must be a realizable bound between distinct shell vectors,
    /// i.e. `-k <= t <= k-1`.
    pub fn new(shell: ShellId, t: i64) -> Result<Self> {
        let k = i64::from(shell.k);
        if t < -k || t > k - 1 {
            return Err(Error::InvalidParameter(format!(
                "inner product bound t={t} outside [{}, {}] for k={k}",
                -k,
                k - 1
            )));
        }
        Ok(CodeSpec { shell, t })
    }
}

/// An integer vector, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&a| a * a).sum()
    }

    pub fn negated(&self) -> Self {
        LatticeVector(self.0.iter().map(|&a| -a).collect())
    }

    pub fn scaled(&self, c: i64) -> Self {
        LatticeVector(self.0.iter().map(|&a| c * a).collect())
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        Ok(())
    }
}

impl std::str::FromStr for LatticeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coords: std::result::Result<Vec<i64>, _> =
            s.split_whitespace().map(str::parse::<i64>).collect();
        match coords {
            Ok(c) if !c.is_empty() => Ok(LatticeVector(c)),
            _ => Err(Error::InvalidParameter(format!("not an integer vector: {s:?}"))),
        }
    }
}

/// Inner product of two vectors of equal dimension.
pub fn inner(u: &LatticeVector, v: &LatticeVector) -> Result<i64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: v.dim() });
    }
    Ok(inner_unchecked(u.coords(), v.coords()))
}

/// Inner product on raw slices; callers guarantee equal length.
#[inline]
pub fn inner_unchecked(u: &[i64], v: &[i64]) -> i64 {
    u.iter().zip(v).map(|(&a, &b)| a * b).sum()
}

/// Integer square root (floor).
pub fn isqrt(x: u64) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as u64;
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    while r * r > x {
        r -= 1;
    }
    r
}

/// Number of integers `a` with `a^2 == j`.
fn line_count(j: u32) -> u128 {
    if j == 0 {
        1
    } else {
        let r = isqrt(u64::from(j));
        if r * r == u64::from(j) {
            2
        } else {
            0
        }
    }
}

/// Size of the shell, computed by an n-fold convolution of the
/// one-dimensional counts.  Shares no code with [`enumerate_shell`].
pub fn shell_size(shell: ShellId) -> u128 {
    let k = shell.k as usize;
    // ways[j] = number of integer vectors of the current dimension with
    // squared norm j
    let mut ways = vec![0u128; k + 1];
    for (j, w) in ways.iter_mut().enumerate() {
        *w = line_count(j as u32);
    }
    for _ in 1..shell.n {
        let mut next = vec![0u128; k + 1];
        for j in 0..=k {
            if ways[j] == 0 {
                continue;
            }
            let mut a = 0usize;
            while j + a * a <= k {
                let add = if a == 0 { 1 } else { 2 };
                next[j + a * a] += ways[j] * add;
                a += 1;
            }
        }
        ways = next;
    }
    ways[k]
}

/// All vectors of the shell in lexicographic order, using the default cap.
pub fn enumerate_shell(shell: ShellId) -> Result<Vec<LatticeVector>> {
    enumerate_shell_capped(shell, DEFAULT_SHELL_CAP)
}

/// All vectors of the shell in lexicographic order.
///
/// Fails with [`Error::CapExceeded`] before allocating anything when the
/// predicted size exceeds `cap`; such instances should be handled orbit by
/// orbit via [`aut_orbit_reps`] and [`expand_aut_orbit`] instead.
pub fn enumerate_shell_capped(shell: ShellId, cap: u64) -> Result<Vec<LatticeVector>> {
    let predicted = shell_size(shell);
    if predicted > u128::from(cap) {
        return Err(Error::CapExceeded {
            what: "shell enumeration",
            needed: predicted,
            cap: u128::from(cap),
        });
    }
    let mut out = Vec::with_capacity(predicted as usize);
    let mut prefix = vec![0i64; shell.n];
    descend(&mut prefix, 0, i64::from(shell.k), &mut out);
    debug_assert_eq!(out.len() as u128, predicted);
    Ok(out)
}

fn descend(prefix: &mut [i64], pos: usize, rem: i64, out: &mut Vec<LatticeVector>) {
    if pos == prefix.len() {
        if rem == 0 {
            out.push(LatticeVector(prefix.to_vec()));
        }
        return;
    }
    let m = isqrt(rem as u64) as i64;
    // ascending coordinate values yield lexicographic output order
    for a in -m..=m {
        prefix[pos] = a;
        descend(prefix, pos + 1, rem - a * a, out);
    }
    prefix[pos] = 0;
}

/// Canonical form of a vector under all signed permutations: absolute
/// values sorted descending.  Two vectors lie in the same orbit of the full
/// signed permutation group exactly when their canonical forms agree.
pub fn canonical_form(v: &LatticeVector) -> LatticeVector {
    let mut abs: Vec<i64> = v.coords().iter().map(|a| a.abs()).collect();
    abs.sort_unstable_by(|a, b| b.cmp(a));
    LatticeVector(abs)
}

/// Canonical representatives of all orbits of the full signed permutation
/// group on the shell, sorted lexicographically descending.  Generated
/// directly as partitions of `k` into at most `n` squares, with no shell
/// enumeration involved.
pub fn aut_orbit_reps(shell: ShellId) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    let mut parts: Vec<i64> = Vec::new();
    let max = isqrt(u64::from(shell.k)) as i64;
    rep_descend(max, i64::from(shell.k), shell.n, &mut parts, &mut out);
    out
}

fn rep_descend(max_val: i64, rem: i64, n: usize, parts: &mut Vec<i64>, out: &mut Vec<LatticeVector>) {
    if rem == 0 {
        let mut v = parts.clone();
        v.resize(n, 0);
        out.push(LatticeVector(v));
        return;
    }
    if parts.len() == n {
        return;
    }
    let hi = std::cmp::min(max_val, isqrt(rem as u64) as i64);
    // largest first part first gives lexicographically descending output
    for a in (1..=hi).rev() {
        parts.push(a);
        rep_descend(a, rem - a * a, n, parts, out);
        parts.pop();
    }
}

/// Orbit size of the full signed permutation group through a vector,
/// computed from the multiset shape: permutations of the coordinates
/// divided by multiplicities, times a sign choice per nonzero entry.
pub fn aut_orbit_size(rep: &LatticeVector) -> u128 {
    let canon = canonical_form(rep);
    let n = canon.dim();
    let mut perms: u128 = 1;
    for i in 1..=n {
        perms *= i as u128;
    }
    let mut run = 1usize;
    let mut nonzero = 0u32;
    let coords = canon.coords();
    for i in 0..n {
        if coords[i] != 0 {
            nonzero += 1;
        }
        if i + 1 < n && coords[i + 1] == coords[i] {
            run += 1;
        } else {
            let mut fact: u128 = 1;
            for j in 1..=run {
                fact *= j as u128;
            }
            perms /= fact;
            run = 1;
        }
    }
    perms << nonzero
}

/// Materialize the full orbit of the signed permutation group through a
/// vector: all distinct coordinate permutations combined with all sign
/// patterns on the nonzero entries.  Output is sorted lexicographically.
pub fn expand_aut_orbit(rep: &LatticeVector) -> Vec<LatticeVector> {
    let canon = canonical_form(rep);
    let mut perm = canon.into_coords();
    perm.sort_unstable();
    let mut out = Vec::new();
    loop {
        let nz: Vec<usize> = (0..perm.len()).filter(|&i| perm[i] != 0).collect();
        for mask in 0u32..(1 << nz.len()) {
            let mut v = perm.clone();
            for (b, &i) in nz.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    v[i] = -v[i];
                }
            }
            out.push(LatticeVector(v));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out.sort_unstable();
    out
}

/// Advance to the next lexicographic permutation of a multiset in place.
fn next_permutation(a: &mut [i64]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Largest inner product over all unordered pairs of distinct positions.
pub fn max_pairwise_inner(vectors: &[LatticeVector]) -> Result<i64> {
    if vectors.len() < 2 {
        return Err(Error::TooFewVectors { need: 2, got: vectors.len() });
    }
    let dim = vectors[0].dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
        }
    }
    let mut best = i64::MIN;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            best = best.max(inner_unchecked(vectors[i].coords(), vectors[j].coords()));
        }
    }
    Ok(best)
}

/// Read vectors from a text file: one vector per line of space-separated
/// integers; blank lines and lines starting with `#` are ignored.
pub fn read_vectors(path: &Path) -> Result<Vec<LatticeVector>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: LatticeVector = trimmed.parse().map_err(|_| Error::MalformedFile {
            format: "vector",
            line: idx + 1,
            msg: format!("not an integer vector: {trimmed:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Write vectors as a text file readable by [`read_vectors`].
pub fn write_vectors(path: &Path, vectors: &[LatticeVector], comment: Option<&str>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(file, "# {line}")?;
        }
    }
    for v in vectors {
        writeln!(file, "{v}")?;
    }
    Ok(())
}
