//! Signed permutations and prescribed symmetry groups.
//!
//! A signed permutation permutes coordinates and flips signs; these are
//! exactly the linear maps preserving `Z^n`, so they act on every shell.
//! The key structural tool is the faithful degree-`2n` permutation
//! representation obtained by splitting each coordinate `i` into the point
//! pair `(2i-1, 2i)` for `+a_i` and `-a_i`: a permutation of the `2n`
//! points comes from a signed permutation exactly when it stabilizes that
//! pairing, and sign flips become transpositions inside a pair.
//!
//! Groups are given by generators ([`GroupSpec`]), either from the
//! built-in families ([`builtin_family`]) or from files.  [`group_order`]
//! computes exact orders with a deterministic stabilizer chain on the
//! degree-`2n` points, and [`partition_orbits`] splits a shell into orbits
//! with canonical representatives (the lexicographically greatest member).

use std::fmt;
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;

use crate::shellgeom::{self, LatticeVector, ShellId};
use crate::{Error, Result};

/// A signed permutation of `Z^n`.
///
/// `image[i]` is the coordinate that position `i` is sent to (0-based) and
/// `sign[i]` the sign applied on the way, so `(g v)[image[i]] = sign[i] * v[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    image: Vec<usize>,
    sign: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(image: Vec<usize>, sign: Vec<i8>) -> Result<Self> {
        let n = image.len();
        if sign.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: sign.len() });
        }
        let mut seen = vec![false; n];
        for &p in &image {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "image {image:?} is not a permutation of 0..{n}"
                )));
            }
            seen[p] = true;
        }
        if sign.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
        }
        Ok(SignedPermutation { image, sign })
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation { image: (0..n).collect(), sign: vec![1; n] }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn sign(&self) -> &[i8] {
        &self.sign
    }

    pub fn is_identity(&self) -> bool {
        self.sign.iter().all(|&s| s == 1) && self.image.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Apply to a vector of matching dimension.
    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        if v.dim() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: v.dim() });
        }
        let mut out = vec![0i64; self.n()];
        self.apply_slice(v.coords(), &mut out);
        Ok(LatticeVector::new(out))
    }

    /// Apply on raw slices; callers guarantee matching lengths.
    #[inline]
    pub fn apply_slice(&self, v: &[i64], out: &mut [i64]) {
        for i in 0..self.image.len() {
            out[self.image[i]] = i64::from(self.sign[i]) * v[i];
        }
    }

    /// Composition acting as `self` after `other`:
    /// `compose(a, b).apply(v) == a.apply(&b.apply(v))`.
    pub fn compose(&self, other: &SignedPermutation) -> Result<SignedPermutation> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        let n = self.n();
        let mut image = vec![0usize; n];
        let mut sign = vec![1i8; n];
        for i in 0..n {
            let mid = other.image[i];
            image[i] = self.image[mid];
            sign[i] = self.sign[mid] * other.sign[i];
        }
        Ok(SignedPermutation { image, sign })
    }

    pub fn inverse(&self) -> SignedPermutation {
        let n = self.n();
        let mut image = vec![0usize; n];
        let mut sign = vec![1i8; n];
        for i in 0..n {
            image[self.image[i]] = i;
            sign[self.image[i]] = self.sign[i];
        }
        SignedPermutation { image, sign }
    }

    /// The degree-`2n` permutation: coordinate `i` splits into points `2i`
    /// (value `+a_i`) and `2i+1` (value `-a_i`).
    pub fn to_degree_2n_perm(&self) -> Vec<usize> {
        let n = self.n();
        let mut p = vec![0usize; 2 * n];
        for i in 0..n {
            let q = self.image[i];
            if self.sign[i] > 0 {
                p[2 * i] = 2 * q;
                p[2 * i + 1] = 2 * q + 1;
            } else {
                p[2 * i] = 2 * q + 1;
                p[2 * i + 1] = 2 * q;
            }
        }
        p
    }

    /// Inverse of [`Self::to_degree_2n_perm`].  Fails with
    /// [`Error::BlockSystemViolation`] when the permutation does not
    /// stabilize the pairing `{0,1},{2,3},...`.
    pub fn from_degree_2n_perm(p: &[usize]) -> Result<SignedPermutation> {
        if !p.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("degree must be even".into()));
        }
        let n = p.len() / 2;
        let mut seen = vec![false; 2 * n];
        for &x in p {
            if x >= 2 * n || seen[x] {
                return Err(Error::InvalidParameter(format!(
                    "not a permutation of 0..{}",
                    2 * n
                )));
            }
            seen[x] = true;
        }
        let mut image = vec![0usize; n];
        let mut sign = vec![1i8; n];
        for i in 0..n {
            let a = p[2 * i];
            let b = p[2 * i + 1];
            if a / 2 != b / 2 {
                return Err(Error::BlockSystemViolation { point: 2 * i });
            }
            image[i] = a / 2;
            sign[i] = if a.is_multiple_of(2) { 1 } else { -1 };
        }
        Ok(SignedPermutation { image, sign })
    }

    /// Multiplicative order of the element.
    pub fn order(&self) -> u64 {
        let mut acc = self.clone();
        let mut ord = 1u64;
        while !acc.is_identity() {
            acc = acc.compose(self).expect("same dimension");
            ord += 1;
        }
        ord
    }
}

impl fmt::Display for SignedPermutation {
    /// File form, 1-based: `img: 2 3 1 ; sgn: 1 1 -1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "img:")?;
        for &p in &self.image {
            write!(f, " {}", p + 1)?;
        }
        write!(f, " ; sgn:")?;
        for &s in &self.sign {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// Coarse classification of a prescribed group, used in records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FamilyTag {
    /// Signed permutations moving every coordinate/sign pair.
    Signed,
    /// Signed, but a tail of coordinate/sign pairs is fixed pointwise.
    SignedFixed,
    /// Pure coordinate permutations, no sign flips.
    Perm,
    /// Pure permutations with a fixed tail.
    PermFixed,
    /// Direct products acting on disjoint coordinate blocks.
    Intransitive,
    /// Generators supplied by the caller or a file.
    Custom,
}

/// The shipped generator constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyVariant {
    /// All signed permutations of the active coordinates.
    Full,
    /// One generator: cyclic shift that negates the wrapped coordinate;
    /// its degree-2m representation is a single 2m-cycle.
    Negacyclic,
    /// Cyclic coordinate shift plus one sign flip (all signs, cyclic moves).
    WreathCyclic,
    /// Dihedral coordinate action plus one sign flip.
    WreathDihedral,
    /// Full signed action inside blocks of `d` coordinates combined with
    /// all permutations of the blocks.
    BlockWreath(usize),
    /// Blocks of two coordinates: all sign flips and all block
    /// permutations, but within-block swaps only in pairs.
    EvenSwapBlocks,
    /// Pure cyclic shift.
    Cyclic,
    /// Pure dihedral action.
    Dihedral,
    /// All pure permutations of the active coordinates.
    Symmetric,
    /// No generators.
    Trivial,
}

impl FamilyVariant {
    fn is_pure(self) -> bool {
        matches!(self, FamilyVariant::Cyclic | FamilyVariant::Dihedral | FamilyVariant::Symmetric)
    }

    pub fn name(self) -> String {
        match self {
            FamilyVariant::Full => "full".into(),
            FamilyVariant::Negacyclic => "negacyclic".into(),
            FamilyVariant::WreathCyclic => "wreathcyclic".into(),
            FamilyVariant::WreathDihedral => "wreathdihedral".into(),
            FamilyVariant::BlockWreath(d) => format!("block{d}"),
            FamilyVariant::EvenSwapBlocks => "eblock".into(),
            FamilyVariant::Cyclic => "cyclic".into(),
            FamilyVariant::Dihedral => "dihedral".into(),
            FamilyVariant::Symmetric => "symmetric".into(),
            FamilyVariant::Trivial => "trivial".into(),
        }
    }
}

/// A prescribed group: ambient dimension, generators, and bookkeeping for
/// records and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub n: usize,
    /// Number of trailing coordinate/sign pairs fixed pointwise.
    pub q: usize,
    pub tag: FamilyTag,
    pub label: String,
    generators: Vec<SignedPermutation>,
}

impl GroupSpec {
    pub fn from_generators(
        n: usize,
        generators: Vec<SignedPermutation>,
        tag: FamilyTag,
        label: impl Into<String>,
    ) -> Result<Self> {
        for g in &generators {
            if g.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.n() });
            }
        }
        Ok(GroupSpec { n, q: 0, tag, label: label.into(), generators })
    }

    pub fn generators(&self) -> &[SignedPermutation] {
        &self.generators
    }

    /// Tag string used in bound records, e.g. `s`, `s2`, `p1`, `n`.
    pub fn tag_string(&self) -> String {
        let base = match self.tag {
            FamilyTag::Signed => "s",
            FamilyTag::SignedFixed => "s",
            FamilyTag::Perm => "p",
            FamilyTag::PermFixed => "p",
            FamilyTag::Intransitive => "n",
            FamilyTag::Custom => "custom",
        };
        if self.q > 0 {
            format!("{base}{}", self.q)
        } else {
            base.to_string()
        }
    }

    /// Deterministic text form, used for cache keys and provenance.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for g in &self.generators {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Whether the group moves every coordinate/sign pair into every other,
    /// checked on the degree-2n points.
    pub fn is_transitive_on_pairs(&self) -> bool {
        let n2 = 2 * self.n;
        if self.generators.is_empty() {
            return false;
        }
        let perms: Vec<Vec<usize>> = self.generators.iter().map(|g| g.to_degree_2n_perm()).collect();
        let mut seen = vec![false; n2];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = stack.pop() {
            for perm in &perms {
                let q = perm[p];
                if !seen[q] {
                    seen[q] = true;
                    count += 1;
                    stack.push(q);
                }
            }
        }
        count == n2
    }

    /// Direct product acting on the concatenation of the parts' coordinates.
    pub fn direct_product(parts: &[GroupSpec]) -> Result<GroupSpec> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("empty product".into()));
        }
        let n: usize = parts.iter().map(|p| p.n).sum();
        let mut generators = Vec::new();
        let mut offset = 0;
        for part in parts {
            for g in &part.generators {
                let mut image: Vec<usize> = (0..n).collect();
                let mut sign = vec![1i8; n];
                for i in 0..part.n {
                    image[offset + i] = offset + g.image[i];
                    sign[offset + i] = g.sign[i];
                }
                generators.push(SignedPermutation { image, sign });
            }
            offset += part.n;
        }
        let label = parts.iter().map(|p| format!("{}@{}", p.label, p.n)).collect::<Vec<_>>().join("+");
        Ok(GroupSpec { n, q: 0, tag: FamilyTag::Intransitive, label: format!("prod:{label}"), generators })
    }
}

fn transposition(n: usize, a: usize, b: usize) -> SignedPermutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.swap(a, b);
    SignedPermutation { image, sign: vec![1; n] }
}

fn coordinate_cycle(n: usize, m: usize) -> SignedPermutation {
    // 0 -> 1 -> ... -> m-1 -> 0
    let mut image: Vec<usize> = (0..n).collect();
    for (i, x) in image.iter_mut().take(m).enumerate() {
        *x = (i + 1) % m;
    }
    SignedPermutation { image, sign: vec![1; n] }
}

fn sign_flip(n: usize, coord: usize) -> SignedPermutation {
    let mut sign = vec![1i8; n];
    sign[coord] = -1;
    SignedPermutation { image: (0..n).collect(), sign }
}

fn reversal(n: usize, m: usize) -> SignedPermutation {
    let mut image: Vec<usize> = (0..n).collect();
    for (i, x) in image.iter_mut().take(m).enumerate() {
        *x = m - 1 - i;
    }
    SignedPermutation { image, sign: vec![1; n] }
}

fn negacyclic_shift(n: usize, m: usize) -> SignedPermutation {
    let mut g = coordinate_cycle(n, m);
    g.sign[m - 1] = -1;
    g
}

/// Product of the disjoint transpositions `(a b)` for each listed pair.
fn paired_swaps(n: usize, pairs: &[(usize, usize)]) -> SignedPermutation {
    let mut image: Vec<usize> = (0..n).collect();
    for &(a, b) in pairs {
        image.swap(a, b);
    }
    SignedPermutation { image, sign: vec![1; n] }
}

/// Shift all active coordinates forward by `d` (mod `m`), moving blocks of
/// size `d` cyclically.
fn block_cycle(n: usize, m: usize, d: usize) -> SignedPermutation {
    let mut image: Vec<usize> = (0..n).collect();
    for (i, x) in image.iter_mut().take(m).enumerate() {
        *x = (i + d) % m;
    }
    SignedPermutation { image, sign: vec![1; n] }
}

/// Build one of the shipped families on the first `n - q` coordinates; the
/// trailing `q` coordinate/sign pairs stay fixed pointwise.
pub fn builtin_family(variant: FamilyVariant, n: usize, q: usize) -> Result<GroupSpec> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if q >= n {
        return Err(Error::UnsupportedFamily(format!(
            "cannot fix {q} of {n} coordinate pairs"
        )));
    }
    let m = n - q;
    let mut gens: Vec<SignedPermutation> = Vec::new();
    match variant {
        FamilyVariant::Full => {
            if m >= 2 {
                gens.push(transposition(n, 0, 1));
            }
            if m >= 3 {
                gens.push(coordinate_cycle(n, m));
            }
            gens.push(sign_flip(n, 0));
        }
        FamilyVariant::Negacyclic => {
            gens.push(negacyclic_shift(n, m));
        }
        FamilyVariant::WreathCyclic => {
            if m >= 2 {
                gens.push(coordinate_cycle(n, m));
            }
            gens.push(sign_flip(n, 0));
        }
        FamilyVariant::WreathDihedral => {
            if m >= 2 {
                gens.push(coordinate_cycle(n, m));
                gens.push(reversal(n, m));
            }
            gens.push(sign_flip(n, 0));
        }
        FamilyVariant::BlockWreath(d) => {
            if d == 0 || !m.is_multiple_of(d) {
                return Err(Error::UnsupportedFamily(format!(
                    "block size {d} does not divide {m} active coordinates"
                )));
            }
            let b = m / d;
            if d >= 2 {
                gens.push(transposition(n, 0, 1));
            }
            if d >= 3 {
                gens.push(coordinate_cycle(n, d));
            }
            gens.push(sign_flip(n, 0));
            if b >= 2 {
                gens.push(block_cycle(n, m, d));
                let swaps: Vec<(usize, usize)> = (0..d).map(|i| (i, d + i)).collect();
                gens.push(paired_swaps(n, &swaps));
            }
        }
        FamilyVariant::EvenSwapBlocks => {
            if !m.is_multiple_of(2) || m < 4 {
                return Err(Error::UnsupportedFamily(format!(
                    "paired-swap blocks need an even active dimension of at least 4, got {m}"
                )));
            }
            gens.push(sign_flip(n, 0));
            gens.push(block_cycle(n, m, 2));
            gens.push(paired_swaps(n, &[(0, 2), (1, 3)]));
            gens.push(paired_swaps(n, &[(0, 1), (2, 3)]));
        }
        FamilyVariant::Cyclic => {
            if m >= 2 {
                gens.push(coordinate_cycle(n, m));
            }
        }
        FamilyVariant::Dihedral => {
            if m >= 2 {
                gens.push(coordinate_cycle(n, m));
                gens.push(reversal(n, m));
            }
        }
        FamilyVariant::Symmetric => {
            if m >= 2 {
                gens.push(transposition(n, 0, 1));
            }
            if m >= 3 {
                gens.push(coordinate_cycle(n, m));
            }
        }
        FamilyVariant::Trivial => {}
    }
    let tag = match (variant.is_pure(), variant, q) {
        (_, FamilyVariant::Trivial, _) => FamilyTag::Custom,
        (true, _, 0) => FamilyTag::Perm,
        (true, _, _) => FamilyTag::PermFixed,
        (false, _, 0) => FamilyTag::Signed,
        (false, _, _) => FamilyTag::SignedFixed,
    };
    let label = if q > 0 {
        format!("{}/fix{q}", variant.name())
    } else {
        variant.name()
    };
    Ok(GroupSpec { n, q, tag, label, generators: gens })
}

/// Parse a group description as used on the command line and in config
/// files: `aut`, `trivial`, `negacyclic`, `s2:full`, `p:cyclic`,
/// `block2`, `prod:full@3+cyclic@3`, or `file:<path>`.
pub fn parse_group(text: &str, n: usize) -> Result<GroupSpec> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix("file:") {
        return read_group(Path::new(path));
    }
    if let Some(spec) = text.strip_prefix("prod:") {
        let mut parts = Vec::new();
        for item in spec.split('+') {
            let (name, dim) = item.rsplit_once('@').ok_or_else(|| {
                Error::InvalidParameter(format!("product part {item:?} needs the form variant@dim"))
            })?;
            let d: usize = dim.parse().map_err(|_| {
                Error::InvalidParameter(format!("bad dimension in product part {item:?}"))
            })?;
            parts.push(parse_group(name, d)?);
        }
        let g = GroupSpec::direct_product(&parts)?;
        if g.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.n });
        }
        return Ok(g);
    }
    // optional fixed-tail prefix: s<q>: or p<q>:
    let (prefix, rest) = match text.split_once(':') {
        Some((p, r)) => (Some(p), r),
        None => (None, text),
    };
    let mut q = 0usize;
    if let Some(p) = prefix {
        let (kind, digits) = p.split_at(1);
        if kind != "s" && kind != "p" {
            return Err(Error::UnsupportedFamily(format!("unknown family prefix {p:?}")));
        }
        if !digits.is_empty() {
            q = digits.parse().map_err(|_| {
                Error::UnsupportedFamily(format!("bad fixed-pair count in {p:?}"))
            })?;
        }
        if rest.is_empty() {
            let variant = if kind == "s" { FamilyVariant::Full } else { FamilyVariant::Symmetric };
            return builtin_family(variant, n, q);
        }
    }
    let variant = match rest {
        "aut" | "full" | "s" => FamilyVariant::Full,
        "negacyclic" => FamilyVariant::Negacyclic,
        "wreathcyclic" | "wreath" => FamilyVariant::WreathCyclic,
        "wreathdihedral" => FamilyVariant::WreathDihedral,
        "eblock" => FamilyVariant::EvenSwapBlocks,
        "cyclic" => FamilyVariant::Cyclic,
        "dihedral" => FamilyVariant::Dihedral,
        "symmetric" | "p" => FamilyVariant::Symmetric,
        "trivial" => FamilyVariant::Trivial,
        other => {
            if let Some(d) = other.strip_prefix("block") {
                let d: usize = d.parse().map_err(|_| {
                    Error::UnsupportedFamily(format!("bad block size in {other:?}"))
                })?;
                FamilyVariant::BlockWreath(d)
            } else {
                // bare tag like "s2" or "p1"
                let (kind, digits) = other.split_at(1);
                let parsed_q: Option<usize> = digits.parse().ok();
                match (kind, parsed_q) {
                    ("s", Some(qq)) => return builtin_family(FamilyVariant::Full, n, qq),
                    ("p", Some(qq)) => return builtin_family(FamilyVariant::Symmetric, n, qq),
                    _ => return Err(Error::UnsupportedFamily(format!("unknown family {other:?}"))),
                }
            }
        }
    };
    builtin_family(variant, n, q)
}

/// Read a generator file.
///
/// ```text
/// # comment
/// n=6
/// img: 2 3 4 5 6 1 ; sgn: 1 1 1 1 1 -1
/// perm2n: 3 4 5 6 7 8 9 10 11 12 2 1
/// ```
///
/// Images and points are 1-based; `perm2n` lines give the degree-2n form
/// and must stabilize the coordinate pairing.
pub fn read_group(path: &Path) -> Result<GroupSpec> {
    let file = std::fs::File::open(path)?;
    let mut n: Option<usize> = None;
    let mut gens: Vec<SignedPermutation> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let malformed = |msg: String| Error::MalformedFile { format: "group", line: lineno, msg };
        if let Some(dim) = t.strip_prefix("n=") {
            n = Some(dim.trim().parse().map_err(|_| malformed(format!("bad dimension {dim:?}")))?);
        } else if let Some(body) = t.strip_prefix("img:") {
            let n = n.ok_or_else(|| malformed("generator before n= header".into()))?;
            let (img_part, sgn_part) = body
                .split_once(';')
                .ok_or_else(|| malformed("missing `; sgn:` part".into()))?;
            let sgn_part = sgn_part
                .trim()
                .strip_prefix("sgn:")
                .ok_or_else(|| malformed("missing `sgn:` keyword".into()))?;
            let image: Vec<usize> = img_part
                .split_whitespace()
                .map(|w| w.parse::<usize>().map(|p| p.wrapping_sub(1)))
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| malformed("bad image entry".into()))?;
            let sign: Vec<i8> = sgn_part
                .split_whitespace()
                .map(str::parse::<i8>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| malformed("bad sign entry".into()))?;
            if image.len() != n || sign.len() != n {
                return Err(malformed(format!("expected {n} entries")));
            }
            gens.push(SignedPermutation::new(image, sign)?);
        } else if let Some(body) = t.strip_prefix("perm2n:") {
            let n = n.ok_or_else(|| malformed("generator before n= header".into()))?;
            let points: Vec<usize> = body
                .split_whitespace()
                .map(|w| w.parse::<usize>().map(|p| p.wrapping_sub(1)))
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| malformed("bad point entry".into()))?;
            if points.len() != 2 * n {
                return Err(malformed(format!("expected {} points", 2 * n)));
            }
            gens.push(SignedPermutation::from_degree_2n_perm(&points)?);
        } else {
            return Err(malformed(format!("unrecognized line {t:?}")));
        }
    }
    let n = n.ok_or(Error::MalformedFile {
        format: "group",
        line: 0,
        msg: "missing n= header".into(),
    })?;
    let label = path
        .file_name()
        .map(|f| format!("file:{}", f.to_string_lossy()))
        .unwrap_or_else(|| "file".into());
    GroupSpec::from_generators(n, gens, FamilyTag::Custom, label)
}

/// Write a generator file readable by [`read_group`].
pub fn write_group(path: &Path, group: &GroupSpec) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# {}", group.label)?;
    writeln!(file, "n={}", group.n)?;
    for g in &group.generators {
        writeln!(file, "{g}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// group order via a stabilizer chain on the degree-2n points

type Perm = Vec<usize>;

fn p_identity(d: usize) -> Perm {
    (0..d).collect()
}

fn p_is_identity(p: &Perm) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

fn p_compose(a: &Perm, b: &Perm) -> Perm {
    // apply b first, then a
    b.iter().map(|&x| a[x]).collect()
}

fn p_inverse(a: &Perm) -> Perm {
    let mut inv = vec![0usize; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

struct ChainLevel {
    point: usize,
    gens: Vec<Perm>,
    /// `transversal[p]` maps `point` to `p`.
    transversal: Vec<Option<Perm>>,
}

struct StabChain {
    degree: usize,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    fn build(degree: usize, gens: &[Perm]) -> StabChain {
        let mut chain = StabChain { degree, levels: Vec::new() };
        for g in gens {
            if let Some(j) = chain.install(0, g.clone()) {
                // the new generator enlarges the known group at every level
                // up to its stick level; re-complete them deepest-first so
                // each completion can assume the levels below it are done
                for m in (0..=j).rev() {
                    chain.complete_level(m);
                }
            }
        }
        chain
    }

    fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| l.transversal.iter().flatten().count() as u128)
            .product()
    }

    /// Sift `g` through levels `lvl..`; if it does not reduce to the
    /// identity, record the residue as a strong generator at the level
    /// where it sticks (creating that level if needed) and return that
    /// level.  The residue fixes the base points of every earlier level,
    /// so it belongs to all the stabilizer subgroups in between.
    fn install(&mut self, lvl: usize, g: Perm) -> Option<usize> {
        if p_is_identity(&g) {
            return None;
        }
        let mut h = g;
        let mut at = lvl;
        loop {
            if at == self.levels.len() {
                let point = (0..self.degree).find(|&i| h[i] != i).expect("h is not the identity");
                let mut transversal: Vec<Option<Perm>> = vec![None; self.degree];
                transversal[point] = Some(p_identity(self.degree));
                self.levels.push(ChainLevel { point, gens: Vec::new(), transversal });
                break;
            }
            let level = &self.levels[at];
            match &level.transversal[h[level.point]] {
                Some(t) => {
                    h = p_compose(&p_inverse(t), &h);
                    if p_is_identity(&h) {
                        return None;
                    }
                    at += 1;
                }
                None => break,
            }
        }
        self.levels[at].gens.push(h);
        Some(at)
    }

    /// Recompute the orbit and transversal at `lvl`.  The acting
    /// generators are those of this and all deeper levels: deeper strong
    /// generators also fix every earlier base point, so they belong to
    /// this level's stabilizer subgroup.
    fn refresh(&mut self, lvl: usize) {
        let gens: Vec<Perm> =
            self.levels[lvl..].iter().flat_map(|l| l.gens.iter().cloned()).collect();
        let point = self.levels[lvl].point;
        let mut transversal: Vec<Option<Perm>> = vec![None; self.degree];
        transversal[point] = Some(p_identity(self.degree));
        let mut queue = std::collections::VecDeque::from([point]);
        while let Some(p) = queue.pop_front() {
            for s in &gens {
                let q = s[p];
                if transversal[q].is_none() {
                    let t = p_compose(s, transversal[p].as_ref().expect("p is in the orbit"));
                    transversal[q] = Some(t);
                    queue.push_back(q);
                }
            }
        }
        self.levels[lvl].transversal = transversal;
    }

    /// Make level `i` complete, assuming all deeper levels are complete:
    /// refresh the transversal, then sift every Schreier generator into the
    /// deeper chain, re-completing from each stick level back up before
    /// sifting further.  When the scan finishes, every Schreier generator
    /// lies in the (complete) deeper chain, which by the Schreier lemma
    /// makes the transversal a full coset enumeration.  Sifting residues
    /// never enlarges the group generated at this level, so the orbit
    /// snapshot stays valid throughout the scan.
    fn complete_level(&mut self, i: usize) {
        self.refresh(i);
        let gens: Vec<Perm> =
            self.levels[i..].iter().flat_map(|l| l.gens.iter().cloned()).collect();
        let orbit: Vec<usize> = (0..self.degree)
            .filter(|&p| self.levels[i].transversal[p].is_some())
            .collect();
        for &p in &orbit {
            for s in &gens {
                let q = s[p];
                let r = {
                    let tp = self.levels[i].transversal[p].as_ref().expect("orbit point");
                    let tq = self.levels[i].transversal[q].as_ref().expect("orbit point");
                    p_compose(&p_inverse(tq), &p_compose(s, tp))
                };
                if let Some(j) = self.install(i + 1, r) {
                    for m in (i + 1..=j).rev() {
                        self.complete_level(m);
                    }
                }
            }
        }
    }
}

/// Exact group order, via a deterministic stabilizer chain on the
/// degree-2n permutation representation.
pub fn group_order(group: &GroupSpec) -> u128 {
    let perms: Vec<Perm> = group.generators.iter().map(|g| g.to_degree_2n_perm()).collect();
    StabChain::build(2 * group.n, &perms).order()
}

// ---------------------------------------------------------------------------
// orbit partition of a shell

/// One group orbit on a shell.  `rep` is the lexicographically greatest
/// member; `members` indexes the flat buffer of the owning table.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub rep: LatticeVector,
    pub size: u64,
    members: std::ops::Range<usize>,
}

/// All orbits of a group on a shell, sorted by representative descending.
/// Member vectors are stored flat and handed out as slices.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    pub shell: ShellId,
    pub group: GroupSpec,
    orbits: Vec<Orbit>,
    buf: Vec<i64>,
}

impl OrbitTable {
    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn rep(&self, i: usize) -> &LatticeVector {
        &self.orbits[i].rep
    }

    /// Member vectors of orbit `i` in lexicographically descending order.
    pub fn members(&self, i: usize) -> impl Iterator<Item = &[i64]> {
        let n = self.shell.n;
        let r = &self.orbits[i].members;
        self.buf[r.start * n..r.end * n].chunks_exact(n)
    }

    pub fn total_vectors(&self) -> u64 {
        self.orbits.iter().map(|o| o.size).sum()
    }
}

/// Partition the shell into orbits of the group, using the default shell cap.
pub fn partition_orbits(shell: ShellId, group: &GroupSpec) -> Result<OrbitTable> {
    partition_orbits_capped(shell, group, shellgeom::DEFAULT_SHELL_CAP)
}

/// Partition the shell into orbits of the group.
///
/// Deterministic: orbits are sorted by their representative (the
/// lexicographically greatest member) in descending order, and members
/// within an orbit are sorted descending as well.
pub fn partition_orbits_capped(shell: ShellId, group: &GroupSpec, cap: u64) -> Result<OrbitTable> {
    if group.n != shell.n {
        return Err(Error::DimensionMismatch { expected: shell.n, got: group.n });
    }
    let vectors = shellgeom::enumerate_shell_capped(shell, cap)?;
    let n = shell.n;
    let mut assigned = vec![false; vectors.len()];
    let mut orbits: Vec<Orbit> = Vec::new();
    let mut buf: Vec<i64> = Vec::with_capacity(vectors.len() * n);
    let mut scratch = vec![0i64; n];
    // seeds in descending order: each seed is the greatest member of its
    // orbit, so orbits come out sorted by representative descending
    for seed in (0..vectors.len()).rev() {
        if assigned[seed] {
            continue;
        }
        let mut stack = vec![seed];
        let mut members: Vec<usize> = vec![seed];
        assigned[seed] = true;
        while let Some(idx) = stack.pop() {
            for g in group.generators() {
                g.apply_slice(vectors[idx].coords(), &mut scratch);
                let j = vectors
                    .binary_search_by(|probe| probe.coords().cmp(scratch.as_slice()))
                    .expect("group maps the shell to itself");
                if !assigned[j] {
                    assigned[j] = true;
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable_by(|a, b| b.cmp(a));
        let start = buf.len() / n;
        for &idx in &members {
            buf.extend_from_slice(vectors[idx].coords());
        }
        orbits.push(Orbit {
            rep: vectors[members[0]].clone(),
            size: members.len() as u64,
            members: start..start + members.len(),
        });
    }
    Ok(OrbitTable { shell, group: group.clone(), orbits, buf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shellgeom::{aut_orbit_reps, shell_size};
    use std::collections::BTreeSet;

    fn sp(image: &[usize], sign: &[i8]) -> SignedPermutation {
        SignedPermutation::new(image.to_vec(), sign.to_vec()).unwrap()
    }

    fn lv(coords: &[i64]) -> LatticeVector {
        LatticeVector::new(coords.to_vec())
    }

    /// Independent oracle: enumerate all group elements by closure.
    fn brute_order(group: &GroupSpec, cap: usize) -> usize {
        let id = SignedPermutation::identity(group.n);
        let mut seen: BTreeSet<SignedPermutation> = BTreeSet::new();
        seen.insert(id.clone());
        let mut frontier = vec![id];
        while let Some(g) = frontier.pop() {
            for s in group.generators() {
                let h = s.compose(&g).unwrap();
                if seen.insert(h.clone()) {
                    assert!(seen.len() <= cap, "group larger than test cap");
                    frontier.push(h);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn apply_moves_coordinates_with_signs() {
        // coordinate 0 goes to slot 1 negated, coordinate 1 to slot 0
        let g = sp(&[1, 0], &[-1, 1]);
        assert_eq!(g.apply(&lv(&[5, 7])).unwrap(), lv(&[7, -5]));
    }

    #[test]
    fn compose_is_apply_after_apply() {
        let a = sp(&[1, 2, 0], &[1, -1, 1]);
        let b = sp(&[0, 2, 1], &[-1, 1, -1]);
        let v = lv(&[3, -4, 5]);
        let lhs = a.compose(&b).unwrap().apply(&v).unwrap();
        let rhs = a.apply(&b.apply(&v).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_undoes_apply() {
        let g = sp(&[2, 0, 3, 1], &[-1, 1, -1, -1]);
        let v = lv(&[1, -2, 3, -4]);
        assert_eq!(g.inverse().apply(&g.apply(&v).unwrap()).unwrap(), v);
        assert!(g.compose(&g.inverse()).unwrap().is_identity());
    }

    #[test]
    fn degree_2n_of_a_sign_flip_is_a_pair_transposition() {
        let g = sign_flip(3, 1);
        assert_eq!(g.to_degree_2n_perm(), vec![0, 1, 3, 2, 4, 5]);
    }

    #[test]
    fn degree_2n_round_trip() {
        let g = sp(&[2, 0, 1], &[-1, 1, -1]);
        let p = g.to_degree_2n_perm();
        assert_eq!(SignedPermutation::from_degree_2n_perm(&p).unwrap(), g);
    }

    #[test]
    fn crossing_the_pairing_is_rejected() {
        // transposition of points 0 and 2 moves across pairs {0,1} and {2,3}
        let p = vec![2, 1, 0, 3];
        assert!(matches!(
            SignedPermutation::from_degree_2n_perm(&p),
            Err(Error::BlockSystemViolation { point: 0 })
        ));
    }

    #[test]
    fn full_family_has_hyperoctahedral_order() {
        let g = builtin_family(FamilyVariant::Full, 6, 0).unwrap();
        assert_eq!(group_order(&g), 46080); // 2^6 * 6!
        let g4 = builtin_family(FamilyVariant::Full, 4, 0).unwrap();
        assert_eq!(group_order(&g4), 384);
        assert_eq!(brute_order(&g4, 1000), 384);
    }

    #[test]
    fn negacyclic_is_a_single_long_cycle() {
        let g = builtin_family(FamilyVariant::Negacyclic, 6, 0).unwrap();
        assert_eq!(g.generators().len(), 1);
        assert_eq!(group_order(&g), 12);
        let p = g.generators()[0].to_degree_2n_perm();
        // one cycle through all 12 points
        let mut seen = 1;
        let mut at = p[0];
        while at != 0 {
            at = p[at];
            seen += 1;
        }
        assert_eq!(seen, 12);
        assert!(g.is_transitive_on_pairs());
    }

    #[test]
    fn chain_order_matches_brute_closure() {
        let cases: Vec<(GroupSpec, usize)> = vec![
            (builtin_family(FamilyVariant::Full, 3, 0).unwrap(), 48),
            (builtin_family(FamilyVariant::Negacyclic, 5, 0).unwrap(), 10),
            (builtin_family(FamilyVariant::WreathCyclic, 4, 0).unwrap(), 64),
            (builtin_family(FamilyVariant::WreathDihedral, 4, 0).unwrap(), 128),
            (builtin_family(FamilyVariant::Cyclic, 7, 0).unwrap(), 7),
            (builtin_family(FamilyVariant::Dihedral, 5, 0).unwrap(), 10),
            (builtin_family(FamilyVariant::Symmetric, 4, 0).unwrap(), 24),
            (builtin_family(FamilyVariant::BlockWreath(2), 6, 0).unwrap(), 3072),
            (builtin_family(FamilyVariant::EvenSwapBlocks, 6, 0).unwrap(), 1536),
            (builtin_family(FamilyVariant::Trivial, 5, 0).unwrap(), 1),
            (builtin_family(FamilyVariant::Full, 5, 2).unwrap(), 48),
        ];
        for (g, want) in cases {
            assert_eq!(brute_order(&g, 200_000), want, "brute order of {}", g.label);
            assert_eq!(group_order(&g), want as u128, "chain order of {}", g.label);
        }
    }

    #[test]
    fn even_swap_blocks_order_in_dimension_eight() {
        let g = builtin_family(FamilyVariant::EvenSwapBlocks, 8, 0).unwrap();
        // all signs, all block permutations, within-block swaps in pairs:
        // 2^8 * 4! * 2^3
        assert_eq!(group_order(&g), 49152);
        assert_eq!(brute_order(&g, 100_000), 49152);
        assert!(g.is_transitive_on_pairs());
    }

    #[test]
    fn fixed_tail_families_leave_the_tail_alone() {
        let g = builtin_family(FamilyVariant::Full, 6, 2).unwrap();
        assert_eq!(g.q, 2);
        assert_eq!(g.tag_string(), "s2");
        for gen in g.generators() {
            for i in 4..6 {
                assert_eq!(gen.image()[i], i);
                assert_eq!(gen.sign()[i], 1);
            }
        }
        assert!(!g.is_transitive_on_pairs());
    }

    #[test]
    fn orbit_partition_of_unit_shell() {
        let shell = ShellId::new(6, 1).unwrap();
        let g = builtin_family(FamilyVariant::Full, 6, 0).unwrap();
        let table = partition_orbits(shell, &g).unwrap();
        assert_eq!(table.orbit_count(), 1);
        assert_eq!(table.orbits()[0].size, 12);
        assert_eq!(table.rep(0), &lv(&[1, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn orbit_partition_matches_shape_reps_for_full_group() {
        for (n, k) in [(6usize, 4u32), (10, 9), (5, 6)] {
            let shell = ShellId::new(n, k).unwrap();
            let g = builtin_family(FamilyVariant::Full, n, 0).unwrap();
            let table = partition_orbits(shell, &g).unwrap();
            let reps: Vec<LatticeVector> = table.orbits().iter().map(|o| o.rep.clone()).collect();
            assert_eq!(reps, aut_orbit_reps(shell), "n={n} k={k}");
            assert_eq!(u128::from(table.total_vectors()), shell_size(shell));
        }
    }

    #[test]
    fn trivial_group_gives_singletons() {
        let shell = ShellId::new(6, 4).unwrap();
        let g = builtin_family(FamilyVariant::Trivial, 6, 0).unwrap();
        let table = partition_orbits(shell, &g).unwrap();
        assert_eq!(table.orbit_count(), 252);
        assert!(table.orbits().iter().all(|o| o.size == 1));
        // sorted descending by representative
        for w in table.orbits().windows(2) {
            assert!(w[0].rep > w[1].rep);
        }
    }

    #[test]
    fn orbit_sizes_divide_group_order_and_close_under_generators() {
        let shell = ShellId::new(6, 6).unwrap();
        for variant in [
            FamilyVariant::Negacyclic,
            FamilyVariant::WreathCyclic,
            FamilyVariant::BlockWreath(3),
            FamilyVariant::EvenSwapBlocks,
        ] {
            let g = builtin_family(variant, 6, 0).unwrap();
            let order = group_order(&g);
            let table = partition_orbits(shell, &g).unwrap();
            assert_eq!(u128::from(table.total_vectors()), shell_size(shell));
            for i in 0..table.orbit_count() {
                assert_eq!(order % u128::from(table.orbits()[i].size), 0);
                let members: BTreeSet<Vec<i64>> =
                    table.members(i).map(|m| m.to_vec()).collect();
                for m in table.members(i) {
                    for gen in g.generators() {
                        let mut out = vec![0i64; 6];
                        gen.apply_slice(m, &mut out);
                        assert!(members.contains(&out), "orbit not closed under {}", g.label);
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_members_are_sorted_descending_with_rep_first() {
        let shell = ShellId::new(4, 4).unwrap();
        let g = builtin_family(FamilyVariant::Negacyclic, 4, 0).unwrap();
        let table = partition_orbits(shell, &g).unwrap();
        for i in 0..table.orbit_count() {
            let members: Vec<&[i64]> = table.members(i).collect();
            assert_eq!(members[0], table.rep(i).coords());
            for w in members.windows(2) {
                assert!(w[0] > w[1]);
            }
        }
    }

    #[test]
    fn partition_is_deterministic() {
        let shell = ShellId::new(5, 5).unwrap();
        let g = builtin_family(FamilyVariant::WreathCyclic, 5, 0).unwrap();
        let a = partition_orbits(shell, &g).unwrap();
        let b = partition_orbits(shell, &g).unwrap();
        assert_eq!(a.orbit_count(), b.orbit_count());
        for i in 0..a.orbit_count() {
            assert_eq!(a.rep(i), b.rep(i));
            assert!(a.members(i).eq(b.members(i)));
        }
    }

    #[test]
    fn group_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.grp");
        let g = builtin_family(FamilyVariant::EvenSwapBlocks, 8, 0).unwrap();
        write_group(&path, &g).unwrap();
        let back = read_group(&path).unwrap();
        assert_eq!(back.n, 8);
        assert_eq!(back.generators(), g.generators());
        assert_eq!(group_order(&back), group_order(&g));
    }

    #[test]
    fn group_file_accepts_degree_2n_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g2n.grp");
        let g = builtin_family(FamilyVariant::Negacyclic, 6, 0).unwrap();
        let p = g.generators()[0].to_degree_2n_perm();
        let body: Vec<String> = p.iter().map(|&x| (x + 1).to_string()).collect();
        std::fs::write(&path, format!("n=6\nperm2n: {}\n", body.join(" "))).unwrap();
        let back = read_group(&path).unwrap();
        assert_eq!(back.generators(), g.generators());
    }

    #[test]
    fn parse_group_strings() {
        assert_eq!(parse_group("aut", 6).unwrap().label, "full");
        assert_eq!(parse_group("s2:negacyclic", 6).unwrap().q, 2);
        assert_eq!(parse_group("s2", 6).unwrap().tag_string(), "s2");
        assert_eq!(parse_group("p:cyclic", 5).unwrap().tag, FamilyTag::Perm);
        assert_eq!(parse_group("block2", 6).unwrap().label, "block2");
        let prod = parse_group("prod:full@3+cyclic@3", 6).unwrap();
        assert_eq!(prod.n, 6);
        assert_eq!(prod.tag, FamilyTag::Intransitive);
        assert_eq!(group_order(&prod), 48 * 3);
        assert!(parse_group("nonsense", 6).is_err());
        assert!(parse_group("prod:full@3+cyclic@4", 6).is_err());
    }

    #[test]
    fn direct_product_acts_blockwise() {
        let a = builtin_family(FamilyVariant::Full, 2, 0).unwrap();
        let b = builtin_family(FamilyVariant::Cyclic, 3, 0).unwrap();
        let prod = GroupSpec::direct_product(&[a, b]).unwrap();
        assert_eq!(prod.n, 5);
        assert_eq!(group_order(&prod), 8 * 3);
        for g in prod.generators() {
            // no generator mixes the two blocks
            for i in 0..2 {
                assert!(g.image()[i] < 2);
            }
            for i in 2..5 {
                assert!(g.image()[i] >= 2);
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_signed_perm(n: usize) -> impl Strategy<Value = SignedPermutation> {
            any::<u64>().prop_map(move |seed| {
                use rand::seq::SliceRandom;
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut image: Vec<usize> = (0..n).collect();
                image.shuffle(&mut rng);
                let sign: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
                SignedPermutation::new(image, sign).unwrap()
            })
        }

        proptest! {
            #[test]
            fn degree_2n_is_a_homomorphism(
                a in arb_signed_perm(6),
                b in arb_signed_perm(6),
            ) {
                let lhs = a.compose(&b).unwrap().to_degree_2n_perm();
                let pa = a.to_degree_2n_perm();
                let pb = b.to_degree_2n_perm();
                let rhs: Vec<usize> = pb.iter().map(|&x| pa[x]).collect();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn apply_preserves_norm_and_round_trips(
                g in arb_signed_perm(5),
                coords in proptest::collection::vec(-7i64..=7, 5),
            ) {
                let v = LatticeVector::new(coords);
                let w = g.apply(&v).unwrap();
                prop_assert_eq!(w.norm_sq(), v.norm_sq());
                prop_assert_eq!(g.inverse().apply(&w).unwrap(), v);
                prop_assert_eq!(
                    SignedPermutation::from_degree_2n_perm(&g.to_degree_2n_perm()).unwrap(),
                    g.clone()
                );
            }
        }
    }
}
