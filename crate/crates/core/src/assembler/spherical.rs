//! Gluing points from several shells on the unit sphere.
//!
//! A vector `v` with squared norm `k` stands for the unit point `v / sqrt(k)`;
//! the cosine between two such points is `<v, w> / sqrt(k1 * k2)`.  Every
//! comparison here is exact: cosines are compared to rational bounds by
//! sign-aware cross multiplication of squares, never through floating point.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num::rational::Ratio;
use num::BigInt;

use crate::shellgeom::{inner_unchecked, isqrt, LatticeVector};
use crate::{Error, Result};

/// Split `x > 0` as `m^2 * r` with `r` free of small square factors.  Any
/// square factor left in `r` only makes the stored surd less reduced, never
/// wrong, since all comparisons cross-multiply exactly.
pub(crate) fn split_square(x: u64) -> (u64, u64) {
    debug_assert!(x > 0);
    let mut m = 1u64;
    let mut r = x;
    let mut p = 2u64;
    while p <= 1000 && p * p <= r {
        while r.is_multiple_of(p * p) {
            r /= p * p;
            m *= p;
        }
        p += 1;
    }
    let s = isqrt(r);
    if s * s == r {
        m *= s;
        r = 1;
    }
    (m, r)
}

/// The exact value `num / (den * sqrt(root))`, used for cosines between unit
/// points coming from integral shells.  Equality and ordering are exact and
/// independent of how the surd happens to be factored.
#[derive(Debug, Clone, Copy)]
pub struct ExactCosine {
    num: i64,
    den: u64,
    root: u64,
}

impl ExactCosine {
    fn normalized(num: i64, den: u64, root: u64) -> ExactCosine {
        debug_assert!(den > 0 && root > 0);
        if num == 0 {
            return ExactCosine { num: 0, den: 1, root: 1 };
        }
        let (m, r) = split_square(root);
        let den = den * m;
        let g = gcd_u64(num.unsigned_abs(), den);
        ExactCosine {
            num: num / g as i64,
            den: den / g,
            root: r,
        }
    }

    pub fn zero() -> ExactCosine {
        ExactCosine { num: 0, den: 1, root: 1 }
    }

    /// The cosine realized by inner product `ip` between vectors of squared
    /// norms `ka` and `kb`.
    pub fn from_inner(ip: i64, ka: u32, kb: u32) -> ExactCosine {
        assert!(ka > 0 && kb > 0, "shell norms must be positive");
        ExactCosine::normalized(ip, 1, u64::from(ka) * u64::from(kb))
    }

    /// The rational value `num / den`.
    pub fn from_fraction(num: i64, den: u64) -> ExactCosine {
        assert!(den > 0, "denominator must be positive");
        ExactCosine::normalized(num, den, 1)
    }

    pub fn is_rational(&self) -> bool {
        self.root == 1
    }

    pub fn approx(&self) -> f64 {
        self.num as f64 / (self.den as f64 * (self.root as f64).sqrt())
    }

    /// Exact comparison: signs first, then squares cross-multiplied in
    /// arbitrary precision.
    fn value_cmp(&self, other: &ExactCosine) -> Ordering {
        let sa = self.num.signum();
        let sb = other.num.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // |a|^2 = num^2 / (den^2 * root); compare via cross multiplication.
        let lhs = BigInt::from(self.num) * BigInt::from(self.num)
            * BigInt::from(other.den) * BigInt::from(other.den)
            * BigInt::from(other.root);
        let rhs = BigInt::from(other.num) * BigInt::from(other.num)
            * BigInt::from(self.den) * BigInt::from(self.den)
            * BigInt::from(self.root);
        if sa > 0 {
            lhs.cmp(&rhs)
        } else {
            rhs.cmp(&lhs)
        }
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.max(1)
}

impl PartialEq for ExactCosine {
    fn eq(&self, other: &Self) -> bool {
        self.value_cmp(other) == Ordering::Equal
    }
}

impl Eq for ExactCosine {}

impl PartialOrd for ExactCosine {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactCosine {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value_cmp(other)
    }
}

impl fmt::Display for ExactCosine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.den, self.root) {
            (1, 1) => write!(f, "{}", self.num),
            (d, 1) => write!(f, "{}/{d}", self.num),
            (1, r) => write!(f, "{}/sqrt({r})", self.num),
            (d, r) => write!(f, "{}/({d}*sqrt({r}))", self.num),
        }
    }
}

/// A finite set of unit points, each stored as an integral vector together
/// with its squared norm, plus the exact angle statistics of the set.
#[derive(Debug, Clone)]
pub struct SphericalCode {
    pub n: usize,
    pub tmax: Ratio<i64>,
    pub points: Vec<(LatticeVector, u32)>,
    pub max_cosine: Option<ExactCosine>,
    pub angle_set: BTreeSet<ExactCosine>,
}

impl SphericalCode {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(dimension, size, max cosine, distinct cosine values)` of a code.
pub fn spherical_params(
    code: &SphericalCode,
) -> (usize, usize, Option<&ExactCosine>, &BTreeSet<ExactCosine>) {
    (
        code.n,
        code.points.len(),
        code.max_cosine.as_ref(),
        &code.angle_set,
    )
}

/// Compare `ip / sqrt(kk)` against `bound` exactly via i128 cross
/// multiplication of squares; `kk` is the product of the two squared norms.
fn cmp_cosine_to_ratio(ip: i64, kk: u64, bound: Ratio<i64>) -> Ordering {
    let p = *bound.numer();
    let q = *bound.denom();
    debug_assert!(q > 0);
    let sa = ip.signum();
    let sb = p.signum();
    if sa != sb {
        return sa.cmp(&sb);
    }
    if sa == 0 {
        return Ordering::Equal;
    }
    let lhs = i128::from(ip) * i128::from(ip) * i128::from(q) * i128::from(q);
    let rhs = i128::from(p) * i128::from(p) * kk as i128;
    if sa > 0 {
        lhs.cmp(&rhs)
    } else {
        rhs.cmp(&lhs)
    }
}

/// Whether `a / sqrt(ka)` and `b / sqrt(kb)` are the same unit point:
/// coordinatewise `a_i^2 * kb == b_i^2 * ka` with matching signs.
fn same_direction(a: &LatticeVector, ka: u32, b: &LatticeVector, kb: u32) -> bool {
    a.coords().iter().zip(b.coords()).all(|(&x, &y)| {
        x.signum() == y.signum()
            && i128::from(x) * i128::from(x) * i128::from(kb)
                == i128::from(y) * i128::from(y) * i128::from(ka)
    })
}

/// Glue scaled shell vectors into one spherical code, rejecting any pair
/// whose exact cosine exceeds `tmax` and any pair normalizing to the same
/// point.  Every acceptance is double-checked through a second, structurally
/// independent exact comparison.
pub fn union_scaled(
    points: &[(LatticeVector, u32)],
    tmax: Ratio<i64>,
) -> Result<SphericalCode> {
    if points.is_empty() {
        return Err(Error::TooFewVectors { need: 1, got: 0 });
    }
    let n = points[0].0.dim();
    for (v, k) in points {
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
        }
        if *k == 0 {
            return Err(Error::InvalidParameter(
                "spherical point with squared norm 0".into(),
            ));
        }
        if v.norm_sq() != i64::from(*k) {
            return Err(Error::InvalidParameter(format!(
                "vector {v} has squared norm {}, not the declared {k}",
                v.norm_sq()
            )));
        }
    }

    let bound_cos = ExactCosine::from_fraction(*tmax.numer(), *tmax.denom() as u64);
    let mut angle_set = BTreeSet::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (a, ka) = &points[i];
            let (b, kb) = &points[j];
            if same_direction(a, *ka, b, *kb) {
                return Err(Error::DuplicatePoint {
                    a: a.clone(),
                    ka: *ka,
                    b: b.clone(),
                    kb: *kb,
                });
            }
            let ip = inner_unchecked(a.coords(), b.coords());
            let kk = u64::from(*ka) * u64::from(*kb);
            let fast = cmp_cosine_to_ratio(ip, kk, tmax);
            let cosine = ExactCosine::from_inner(ip, *ka, *kb);
            // Independent recheck of the same comparison through the surd
            // representation; disagreement would be an arithmetic bug.
            assert_eq!(fast, cosine.cmp(&bound_cos), "exact cosine comparison paths diverged");
            if fast == Ordering::Greater {
                return Err(Error::CosineExceeded {
                    a: a.clone(),
                    ka: *ka,
                    b: b.clone(),
                    kb: *kb,
                });
            }
            angle_set.insert(cosine);
        }
    }

    let max_cosine = angle_set.iter().next_back().copied();
    Ok(SphericalCode {
        n,
        tmax,
        points: points.to_vec(),
        max_cosine,
        angle_set,
    })
}

/// Write a spherical code as text: a header `n=<n> tmax=<p>/<q>` followed by
/// one `k=<k>: <vector>` line per point.
pub fn write_spherical(path: &Path, code: &SphericalCode) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {} unit points in dimension {}", code.points.len(), code.n)?;
    if let Some(mc) = &code.max_cosine {
        writeln!(out, "# max cosine {mc}")?;
    }
    writeln!(out, "n={} tmax={}/{}", code.n, code.tmax.numer(), code.tmax.denom())?;
    for (v, k) in &code.points {
        writeln!(out, "k={k}: {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a spherical code written by [`write_spherical`], re-running all the
/// exact pair checks so a tampered file cannot load.
pub fn read_spherical(path: &Path) -> Result<SphericalCode> {
    let text = fs::read_to_string(path)?;
    let mut header: Option<(usize, Ratio<i64>)> = None;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::MalformedFile {
            format: "spherical",
            line: lineno,
            msg,
        };
        if header.is_none() {
            let mut n = None;
            let mut tmax = None;
            for field in line.split_whitespace() {
                if let Some(v) = field.strip_prefix("n=") {
                    n = v.parse::<usize>().ok();
                } else if let Some(v) = field.strip_prefix("tmax=") {
                    tmax = parse_ratio(v);
                } else {
                    return Err(bad(format!("unexpected header field {field:?}")));
                }
            }
            match (n, tmax) {
                (Some(n), Some(t)) => header = Some((n, t)),
                _ => return Err(bad("expected `n=<n> tmax=<p>/<q>`".into())),
            }
            continue;
        }
        let rest = line
            .strip_prefix("k=")
            .ok_or_else(|| bad("expected `k=<k>: <vector>`".into()))?;
        let (kpart, vpart) = rest
            .split_once(':')
            .ok_or_else(|| bad("missing `:` after shell norm".into()))?;
        let k: u32 = kpart
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad squared norm {kpart:?}")))?;
        let v: LatticeVector = vpart
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad vector {vpart:?}")))?;
        points.push((v, k));
    }
    let (n, tmax) = header.ok_or(Error::MalformedFile {
        format: "spherical",
        line: text.lines().count(),
        msg: "missing header".into(),
    })?;
    let code = union_scaled(&points, tmax)?;
    if code.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: code.n });
    }
    Ok(code)
}

/// Parse `p/q` or a bare integer as an exact ratio.
pub fn parse_ratio(text: &str) -> Option<Ratio<i64>> {
    match text.split_once('/') {
        Some((p, q)) => {
            let p = p.trim().parse::<i64>().ok()?;
            let q = q.trim().parse::<i64>().ok()?;
            if q <= 0 {
                return None;
            }
            Some(Ratio::new(p, q))
        }
        None => Some(Ratio::from_integer(text.trim().parse::<i64>().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_of(coords: &[i64]) -> LatticeVector {
        LatticeVector::new(coords.to_vec())
    }

    #[test]
    fn split_square_pulls_out_small_squares() {
        assert_eq!(split_square(1), (1, 1));
        assert_eq!(split_square(49), (7, 1));
        assert_eq!(split_square(8), (2, 2));
        assert_eq!(split_square(360), (6, 10));
        assert_eq!(split_square(7), (1, 7));
    }

    #[test]
    fn cosine_equality_across_factorizations() {
        // 2/sqrt(8) = 1/sqrt(2) = 3/sqrt(18).
        let a = ExactCosine::from_inner(2, 8, 1);
        let b = ExactCosine::from_inner(1, 2, 1);
        let c = ExactCosine::from_inner(3, 9, 2);
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(ExactCosine::from_inner(5, 7, 7), ExactCosine::from_fraction(5, 7));
    }

    #[test]
    fn cosine_ordering_matches_known_values() {
        // 1/sqrt(2) is strictly between 7/10 and 71/100.
        let r = ExactCosine::from_inner(1, 2, 1);
        assert!(r > ExactCosine::from_fraction(7, 10));
        assert!(r < ExactCosine::from_fraction(71, 100));
        // Negative side flips the order.
        let neg = ExactCosine::from_inner(-1, 2, 1);
        assert!(neg < ExactCosine::from_fraction(-7, 10));
        assert!(neg > ExactCosine::from_fraction(-71, 100));
        assert!(ExactCosine::zero() < r);
        assert!(neg < ExactCosine::zero());
    }

    #[test]
    fn cosine_display_forms() {
        assert_eq!(ExactCosine::from_fraction(5, 7).to_string(), "5/7");
        assert_eq!(ExactCosine::from_fraction(-3, 1).to_string(), "-3");
        assert_eq!(ExactCosine::from_inner(1, 2, 1).to_string(), "1/sqrt(2)");
        assert_eq!(ExactCosine::from_inner(-1, 12, 1).to_string(), "-1/(2*sqrt(3))");
        assert_eq!(ExactCosine::zero().to_string(), "0");
    }

    proptest! {
        #[test]
        fn cosine_order_agrees_with_floats_when_separated(
            ip1 in -20i64..=20, ka1 in 1u32..30, kb1 in 1u32..30,
            ip2 in -20i64..=20, ka2 in 1u32..30, kb2 in 1u32..30,
        ) {
            let a = ExactCosine::from_inner(ip1, ka1, kb1);
            let b = ExactCosine::from_inner(ip2, ka2, kb2);
            let fa = a.approx();
            let fb = b.approx();
            if (fa - fb).abs() > 1e-9 {
                prop_assert_eq!(a.cmp(&b), fa.partial_cmp(&fb).unwrap());
            }
        }
    }

    #[test]
    fn union_accepts_and_reports_exact_max() {
        // Two vectors of squared norm 7 realizing inner product 5.
        let pts = vec![
            (vec_of(&[2, 1, 1, 1, 0, 0, 0, 0]), 7),
            (vec_of(&[2, 1, 1, -1, 0, 0, 0, 0]), 7),
            (vec_of(&[-2, 1, 1, 1, 0, 0, 0, 0]), 7),
        ];
        let code = union_scaled(&pts, Ratio::new(5, 7)).unwrap();
        assert_eq!(code.len(), 3);
        assert_eq!(code.max_cosine.unwrap(), ExactCosine::from_fraction(5, 7));
        assert!(code.angle_set.contains(&ExactCosine::from_fraction(-1, 7)));
    }

    #[test]
    fn union_rejects_cosine_just_over_the_bound() {
        let pts = vec![
            (vec_of(&[1, 0]), 1),
            (vec_of(&[1, 1]), 2),
        ];
        // cos = 1/sqrt(2): above 7/10, below 3/4.
        assert!(union_scaled(&pts, Ratio::new(3, 4)).is_ok());
        match union_scaled(&pts, Ratio::new(7, 10)) {
            Err(Error::CosineExceeded { ka: 1, kb: 2, .. }) => {}
            other => panic!("expected CosineExceeded, got {other:?}"),
        }
    }

    #[test]
    fn union_negative_bound_requires_negative_cosines() {
        let pts = vec![
            (vec_of(&[1, 0]), 1),
            (vec_of(&[-1, 1]), 2),
        ];
        // cos = -1/sqrt(2) <= -1/3 holds, but -9/10 does not.
        assert!(union_scaled(&pts, Ratio::new(-1, 3)).is_ok());
        assert!(matches!(
            union_scaled(&pts, Ratio::new(-9, 10)),
            Err(Error::CosineExceeded { .. })
        ));
    }

    #[test]
    fn union_detects_same_direction_across_shells() {
        let pts = vec![
            (vec_of(&[1, 0, 0]), 1),
            (vec_of(&[2, 0, 0]), 4),
        ];
        assert!(matches!(
            union_scaled(&pts, Ratio::new(1, 1)),
            Err(Error::DuplicatePoint { ka: 1, kb: 4, .. })
        ));
        // Sign flip is a genuine antipode, not a duplicate.
        let pts = vec![
            (vec_of(&[1, 0, 0]), 1),
            (vec_of(&[-2, 0, 0]), 4),
        ];
        assert!(union_scaled(&pts, Ratio::new(1, 1)).is_ok());
    }

    #[test]
    fn union_validates_declared_norms() {
        let pts = vec![(vec_of(&[1, 1]), 3)];
        assert!(matches!(
            union_scaled(&pts, Ratio::new(1, 2)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            union_scaled(&[], Ratio::new(1, 2)),
            Err(Error::TooFewVectors { .. })
        ));
    }

    #[test]
    fn cross_polytope_params_are_exact() {
        let mut pts = Vec::new();
        for i in 0..3 {
            for s in [1i64, -1] {
                let mut c = vec![0i64; 3];
                c[i] = s;
                pts.push((LatticeVector::new(c), 1u32));
            }
        }
        let code = union_scaled(&pts, Ratio::new(0, 1)).unwrap();
        let (n, size, max, angles) = spherical_params(&code);
        assert_eq!((n, size), (3, 6));
        assert_eq!(max.unwrap(), &ExactCosine::zero());
        let expected: BTreeSet<ExactCosine> =
            [ExactCosine::zero(), ExactCosine::from_fraction(-1, 1)].into();
        assert_eq!(angles, &expected);
    }

    #[test]
    fn spherical_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("code.sph");
        let pts = vec![
            (vec_of(&[2, 1, 1, 1, 0, 0, 0, 0]), 7),
            (vec_of(&[2, 1, 1, -1, 0, 0, 0, 0]), 7),
            (vec_of(&[1, -1, 0, 0, 0, 0, 0, 0]), 2),
        ];
        let code = union_scaled(&pts, Ratio::new(4, 5)).unwrap();
        write_spherical(&path, &code).unwrap();
        let back = read_spherical(&path).unwrap();
        assert_eq!(back.n, code.n);
        assert_eq!(back.points, code.points);
        assert_eq!(back.max_cosine, code.max_cosine);
        assert_eq!(back.tmax, code.tmax);
    }

    #[test]
    fn tampered_spherical_file_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("code.sph");
        // Claims tmax = 1/2 but contains a pair at cosine 1/sqrt(2).
        std::fs::write(&path, "n=2 tmax=1/2\nk=1: 1 0\nk=2: 1 1\n").unwrap();
        assert!(matches!(
            read_spherical(&path),
            Err(Error::CosineExceeded { .. })
        ));
        std::fs::write(&path, "n=2 tmax=1/2\nk=1: 1 1\n").unwrap();
        assert!(matches!(read_spherical(&path), Err(Error::InvalidParameter(_))));
        std::fs::write(&path, "k=1: 1 0\n").unwrap();
        assert!(matches!(read_spherical(&path), Err(Error::MalformedFile { .. })));
    }

    #[test]
    fn ratio_parsing_accepts_fractions_and_integers() {
        assert_eq!(parse_ratio("4/5"), Some(Ratio::new(4, 5)));
        assert_eq!(parse_ratio("-1/3"), Some(Ratio::new(-1, 3)));
        assert_eq!(parse_ratio("2"), Some(Ratio::from_integer(2)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("x"), None);
    }
}
