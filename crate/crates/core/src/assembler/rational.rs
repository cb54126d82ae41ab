//! Exact integral realizations of rational angle systems.
//!
//! Any finite set of directions whose pairwise cosines are rational can be
//! realized by integer vectors of a common squared norm: orthogonalize the
//! directions symbolically over the rationals, scale each orthogonal
//! component so that it maps to a block of equal coordinates, and clear all
//! denominators at the end.  Inner products survive the trip exactly, so the
//! output code has the same cosines as the input directions.

use std::collections::BTreeSet;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::assembler::{Provenance, ShellCode};
use crate::shellgeom::{inner_unchecked, CodeSpec, LatticeVector, ShellId};
use crate::{Error, Result};

/// Hard cap on the output dimension; inputs with wild denominators fail
/// cleanly instead of allocating without bound.
pub const EMBED_DIM_CAP: usize = 100_000;

fn exact_sqrt(x: &BigInt) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let s = x.sqrt();
    (&s * &s == *x).then_some(s)
}

/// The smallest convenient `h` with `q | h^2`: square factors below 1000 are
/// halved exactly; a leftover perfect square contributes its root; any other
/// leftover is taken whole, which is still sound.
fn sqrt_multiple(q: &BigInt) -> BigInt {
    debug_assert!(q.is_positive());
    let mut h = BigInt::one();
    let mut r = q.clone();
    for p in 2u64..=1000 {
        let pb = BigInt::from(p);
        if &pb * &pb > r {
            break;
        }
        let mut e = 0u32;
        while (&r % &pb).is_zero() {
            r /= &pb;
            e += 1;
        }
        h *= pb.pow(e.div_ceil(2));
    }
    if !r.is_one() {
        match exact_sqrt(&r) {
            Some(s) => h *= s,
            None => h *= r,
        }
    }
    h
}

/// Rational square root of a positive rational, when it exists.
fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    let num = exact_sqrt(x.numer())?;
    let den = exact_sqrt(x.denom())?;
    Some(BigRational::new(num, den))
}

/// Realize directions given by their cosine matrix `c` (unit diagonal,
/// symmetric, entries in [-1, 1]) as integer vectors of one common squared
/// norm with exactly those cosines.
fn embed_cosine_matrix(c: &[Vec<BigRational>]) -> Result<ShellCode> {
    let npts = c.len();
    let one = BigRational::one();

    for (i, row) in c.iter().enumerate() {
        for (j, cij) in row.iter().enumerate().skip(i + 1) {
            if cij.abs() > one {
                return Err(Error::InvalidParameter(format!(
                    "cosine {cij} between points {i} and {j} lies outside [-1, 1]"
                )));
            }
            if *cij == one {
                return Err(Error::InvalidParameter(format!(
                    "points {i} and {j} are the same direction"
                )));
            }
        }
    }

    // Symbolic orthogonalization: each basis vector is kept as its
    // coefficient vector over the input directions, so every inner product
    // is a rational combination of cosine entries.
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    let mut basis_norm: Vec<BigRational> = Vec::new();
    let dot = |coeffs: &[BigRational], k: usize| -> BigRational {
        let mut acc = BigRational::zero();
        for (i, w) in coeffs.iter().enumerate() {
            if !w.is_zero() {
                acc += w * &c[i][k];
            }
        }
        acc
    };
    for k in 0..npts {
        let mut coeffs = vec![BigRational::zero(); npts];
        coeffs[k] = one.clone();
        let mut norm = one.clone();
        for (bj, nj) in basis.iter().zip(&basis_norm) {
            let d = dot(bj, k);
            if d.is_zero() {
                continue;
            }
            let proj = &d / nj;
            for (w, b) in coeffs.iter_mut().zip(bj) {
                *w -= &proj * b;
            }
            norm -= &d * &d / nj;
        }
        if norm.is_negative() {
            return Err(Error::InvalidParameter(
                "cosine matrix is not realizable by real directions".into(),
            ));
        }
        if !norm.is_zero() {
            basis.push(coeffs);
            basis_norm.push(norm);
        }
    }
    debug_assert!(!basis.is_empty());

    // cs[k][j] = <x_k, u_j>; scale u_j by an integer lambda so that all
    // these products become integers and the scaled norm becomes a natural
    // number m_j.  Each u_j then maps to a block of m_j equal coordinates.
    let rank = basis.len();
    let mut cs = vec![vec![BigRational::zero(); rank]; npts];
    for (j, bj) in basis.iter().enumerate() {
        for (k, row) in cs.iter_mut().enumerate() {
            row[j] = dot(bj, k);
        }
    }
    let mut block_size: Vec<BigInt> = Vec::with_capacity(rank);
    let mut scaled: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); rank]; npts];
    for j in 0..rank {
        let mut lambda = BigInt::one();
        for row in &cs {
            lambda = lambda.lcm(row[j].denom());
        }
        lambda = lambda.lcm(&sqrt_multiple(basis_norm[j].denom()));
        let m_rat = &basis_norm[j] * BigRational::from_integer(&lambda * &lambda);
        debug_assert!(m_rat.is_integer());
        let m = m_rat.to_integer();
        debug_assert!(m.is_positive());
        for (k, row) in cs.iter().enumerate() {
            let z = &row[j] * BigRational::from_integer(lambda.clone());
            debug_assert!(z.is_integer());
            scaled[k][j] = z.to_integer();
        }
        block_size.push(m);
    }

    let total: BigInt = block_size.iter().sum();
    let dim = total.to_usize().unwrap_or(usize::MAX);
    if dim > EMBED_DIM_CAP {
        return Err(Error::CapExceeded {
            what: "embedding dimension",
            needed: total.to_u128().unwrap_or(u128::MAX),
            cap: EMBED_DIM_CAP as u128,
        });
    }
    let mut scale = BigInt::one();
    for m in &block_size {
        scale = scale.lcm(m);
    }
    let k_out = (&scale * &scale).to_u32().ok_or_else(|| {
        Error::CapExceeded {
            what: "embedding squared norm",
            needed: (&scale * &scale).to_u128().unwrap_or(u128::MAX),
            cap: u128::from(u32::MAX),
        }
    })?;

    let mut vectors = Vec::with_capacity(npts);
    for row in &scaled {
        let mut coords = Vec::with_capacity(dim);
        for (j, m) in block_size.iter().enumerate() {
            let w = (&scale * &row[j]) / m;
            debug_assert_eq!(&w * m, &scale * &row[j]);
            let w = w.to_i64().ok_or_else(|| {
                Error::InvalidParameter("embedded coordinate exceeds i64".into())
            })?;
            coords.extend(std::iter::repeat_n(w, m.to_usize().unwrap()));
        }
        let v = LatticeVector::new(coords);
        debug_assert_eq!(v.norm_sq(), i64::from(k_out));
        vectors.push(v);
    }

    // Realized inner products are integers by construction; the largest one
    // is the tightest bound the output satisfies.
    let mut t_out = -i64::from(k_out);
    for i in 0..npts {
        for j in i + 1..npts {
            let ip = inner_unchecked(vectors[i].coords(), vectors[j].coords());
            debug_assert_eq!(
                BigRational::from_integer(BigInt::from(ip)),
                &c[i][j] * BigRational::from_integer(BigInt::from(k_out))
            );
            t_out = t_out.max(ip);
        }
    }
    if npts == 1 {
        t_out = i64::from(k_out) - 1;
    }

    let spec = CodeSpec::new(ShellId::new(dim, k_out)?, t_out)?;
    let provenance = Provenance {
        steps: vec![format!(
            "realized {npts} rational directions in {dim} coordinates at squared norm {k_out}"
        )],
        ..Provenance::default()
    };
    Ok(ShellCode { spec, vectors, provenance })
}

/// Realize rational vectors (arbitrary norms, any rank) as integer vectors
/// of one common squared norm whose pairwise cosines match the inputs
/// exactly.  Fails with [`Error::IrrationalAngle`] when a pair of inputs has
/// an irrational cosine.
pub fn rational_embed(points: &[Vec<BigRational>]) -> Result<ShellCode> {
    if points.is_empty() {
        return Err(Error::DegenerateSpan("no input points".into()));
    }
    let d = points[0].len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
    }
    let ip = |a: &[BigRational], b: &[BigRational]| -> BigRational {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    };
    let norms: Vec<BigRational> = points.iter().map(|p| ip(p, p)).collect();
    for (i, n) in norms.iter().enumerate() {
        if n.is_zero() {
            return Err(Error::DegenerateSpan(format!("input point {i} has zero norm")));
        }
    }
    let npts = points.len();
    let mut c = vec![vec![BigRational::one(); npts]; npts];
    for i in 0..npts {
        for j in i + 1..npts {
            let p = ip(&points[i], &points[j]);
            let entry = if p.is_zero() {
                BigRational::zero()
            } else {
                let s = rational_sqrt(&(&norms[i] * &norms[j]))
                    .ok_or(Error::IrrationalAngle { a: i, b: j })?;
                p / s
            };
            c[i][j] = entry.clone();
            c[j][i] = entry;
        }
    }
    embed_cosine_matrix(&c)
}

/// Like [`rational_embed`], but starting from the Gram matrix of the points
/// instead of their coordinates.
pub fn rational_embed_gram(gram: &[Vec<BigRational>]) -> Result<ShellCode> {
    let npts = gram.len();
    if npts == 0 {
        return Err(Error::DegenerateSpan("empty matrix".into()));
    }
    for row in gram {
        if row.len() != npts {
            return Err(Error::DimensionMismatch { expected: npts, got: row.len() });
        }
    }
    for (i, row) in gram.iter().enumerate() {
        for (j, gij) in row.iter().enumerate().skip(i + 1) {
            if *gij != gram[j][i] {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
        if row[i].is_zero() {
            return Err(Error::DegenerateSpan(format!("point {i} has zero norm")));
        }
        if row[i].is_negative() {
            return Err(Error::InvalidParameter(format!(
                "negative squared norm at point {i}"
            )));
        }
    }
    let mut c = vec![vec![BigRational::one(); npts]; npts];
    for i in 0..npts {
        for j in i + 1..npts {
            let entry = if gram[i][j].is_zero() {
                BigRational::zero()
            } else {
                let s = rational_sqrt(&(&gram[i][i] * &gram[j][j]))
                    .ok_or(Error::IrrationalAngle { a: i, b: j })?;
                &gram[i][j] / s
            };
            c[i][j] = entry.clone();
            c[j][i] = entry;
        }
    }
    embed_cosine_matrix(&c)
}

/// The distinct exact cosines realized by a common-norm integer code,
/// reported as inner products (the norm is fixed, so these determine the
/// angles).
pub fn realized_inner_products(code: &ShellCode) -> BTreeSet<i64> {
    let mut set = BTreeSet::new();
    for i in 0..code.vectors.len() {
        for j in i + 1..code.vectors.len() {
            set.insert(inner_unchecked(
                code.vectors[i].coords(),
                code.vectors[j].coords(),
            ));
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn br(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn int_points(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| br(x, 1)).collect())
            .collect()
    }

    /// Exact cosine of an output pair, as a rational.
    fn out_cosine(code: &ShellCode, i: usize, j: usize) -> BigRational {
        let ip = inner_unchecked(code.vectors[i].coords(), code.vectors[j].coords());
        br(ip, i64::from(code.spec.shell.k))
    }

    #[test]
    fn orthonormal_basis_maps_to_unit_vectors() {
        let pts = int_points(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let code = rational_embed(&pts).unwrap();
        assert_eq!(code.spec.shell.k, 1);
        assert_eq!(code.spec.shell.n, 3);
        for (i, v) in code.vectors.iter().enumerate() {
            let mut expect = [0i64; 3];
            expect[i] = 1;
            assert_eq!(v.coords(), &expect[..]);
        }
    }

    #[test]
    fn equilateral_triangle_realizes_minus_one_half() {
        // Three unit directions at pairwise cosine -1/2, given by their
        // cosine matrix (plane coordinates for these are irrational).
        let c = vec![
            vec![br(1, 1), br(-1, 2), br(-1, 2)],
            vec![br(-1, 2), br(1, 1), br(-1, 2)],
            vec![br(-1, 2), br(-1, 2), br(1, 1)],
        ];
        let code = rational_embed_gram(&c).unwrap();
        assert_eq!(code.vectors.len(), 3);
        for i in 0..3 {
            assert_eq!(code.vectors[i].norm_sq(), i64::from(code.spec.shell.k));
            for j in i + 1..3 {
                assert_eq!(out_cosine(&code, i, j), br(-1, 2));
            }
        }
        assert_eq!(realized_inner_products(&code).len(), 1);
    }

    #[test]
    fn cross_polytope_comes_back_unchanged_in_spirit() {
        let pts = int_points(&[
            &[1, 0, 0],
            &[-1, 0, 0],
            &[0, 1, 0],
            &[0, -1, 0],
            &[0, 0, 1],
            &[0, 0, -1],
        ]);
        let code = rational_embed(&pts).unwrap();
        assert_eq!(code.vectors.len(), 6);
        let k = i64::from(code.spec.shell.k);
        for i in 0..6 {
            for j in i + 1..6 {
                let ip = inner_unchecked(code.vectors[i].coords(), code.vectors[j].coords());
                assert!(ip == 0 || ip == -k, "unexpected inner product {ip}");
            }
        }
    }

    #[test]
    fn mixed_norms_in_one_square_class_embed_exactly() {
        // Norms 1, 4, 4: all pairwise products are perfect squares.
        let pts = int_points(&[
            &[0, 0, 0, 1],
            &[1, 1, 1, 1],
            &[1, 1, -1, -1],
        ]);
        let code = rational_embed(&pts).unwrap();
        assert_eq!(out_cosine(&code, 0, 1), br(1, 2));
        assert_eq!(out_cosine(&code, 0, 2), br(-1, 2));
        assert_eq!(out_cosine(&code, 1, 2), br(0, 1));
    }

    #[test]
    fn rank_deficient_inputs_are_fine() {
        // Four directions in the plane, one with denominator 5.
        let pts = vec![
            vec![br(1, 1), br(0, 1)],
            vec![br(0, 1), br(1, 1)],
            vec![br(-1, 1), br(0, 1)],
            vec![br(3, 5), br(4, 5)],
        ];
        let code = rational_embed(&pts).unwrap();
        assert_eq!(code.vectors.len(), 4);
        assert_eq!(out_cosine(&code, 0, 3), br(3, 5));
        assert_eq!(out_cosine(&code, 1, 3), br(4, 5));
        assert_eq!(out_cosine(&code, 0, 2), br(-1, 1));
        assert_eq!(out_cosine(&code, 2, 3), br(-3, 5));
    }

    #[test]
    fn irrational_cosines_are_reported_with_the_pair() {
        let pts = int_points(&[&[1, 0], &[1, 1]]);
        assert!(matches!(
            rational_embed(&pts),
            Err(Error::IrrationalAngle { a: 0, b: 1 })
        ));
        // Orthogonal pairs never trip the check even with bad norm products.
        let pts = int_points(&[&[1, 0], &[0, 1], &[0, 2]]);
        let err = rational_embed(&pts);
        assert!(matches!(err, Err(Error::InvalidParameter(_))), "duplicate direction");
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            rational_embed(&[]),
            Err(Error::DegenerateSpan(_))
        ));
        let pts = vec![vec![br(0, 1), br(0, 1)]];
        assert!(matches!(
            rational_embed(&pts),
            Err(Error::DegenerateSpan(_))
        ));
        let pts = vec![vec![br(1, 1)], vec![br(1, 1), br(0, 1)]];
        assert!(matches!(
            rational_embed(&pts),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_point_embeds_to_one_vector() {
        let code = rational_embed(&int_points(&[&[2, 1]])).unwrap();
        assert_eq!(code.vectors.len(), 1);
        assert_eq!(code.vectors[0].norm_sq(), i64::from(code.spec.shell.k));
    }

    #[test]
    fn gram_input_checks_shape_and_realizability() {
        // Valid: two norm-2 points at cosine -1/2.
        let g = vec![
            vec![br(2, 1), br(-1, 1)],
            vec![br(-1, 1), br(2, 1)],
        ];
        let code = rational_embed_gram(&g).unwrap();
        assert_eq!(out_cosine(&code, 0, 1), br(-1, 2));

        // Cosine outside [-1, 1].
        let g = vec![
            vec![br(1, 1), br(2, 1)],
            vec![br(2, 1), br(1, 1)],
        ];
        assert!(matches!(rational_embed_gram(&g), Err(Error::InvalidParameter(_))));

        // Entrywise plausible but not realizable: x3 = -x2 forces
        // inconsistent cosines with x1.
        let g = vec![
            vec![br(1, 1), br(-1, 2), br(-1, 2)],
            vec![br(-1, 2), br(1, 1), br(-1, 1)],
            vec![br(-1, 2), br(-1, 1), br(1, 1)],
        ];
        assert!(matches!(rational_embed_gram(&g), Err(Error::InvalidParameter(_))));

        // Asymmetric.
        let g = vec![
            vec![br(1, 1), br(1, 2)],
            vec![br(0, 1), br(1, 1)],
        ];
        assert!(matches!(rational_embed_gram(&g), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sqrt_multiple_is_sound() {
        for q in [1u64, 2, 4, 8, 12, 49, 50, 360, 1009 * 1009] {
            let qb = BigInt::from(q);
            let h = sqrt_multiple(&qb);
            assert!((&h * &h % &qb).is_zero(), "q={q} h={h}");
        }
        assert_eq!(sqrt_multiple(&BigInt::from(4u32)), BigInt::from(2u32));
        assert_eq!(sqrt_multiple(&BigInt::from(12u32)), BigInt::from(6u32));
        assert_eq!(sqrt_multiple(&BigInt::from(49u32)), BigInt::from(7u32));
    }
}
