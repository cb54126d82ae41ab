//! Integral embeddings between shells.
//!
//! A matrix whose rows are pairwise orthogonal integer vectors of common
//! squared norm `c` maps `s_k` in its row count many dimensions into
//! `s_{c*k}` of its column count, multiplying every inner product by exactly
//! `c`.  Built-in constructions cover `c = s^2 * f` for squarefree
//! `f` in {1, 2, 5, 10}, subject to a divisibility condition on the
//! dimension.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::assembler::spherical::split_square;
use crate::assembler::ShellCode;
use crate::shellgeom::{inner_unchecked, CodeSpec, LatticeVector, ShellId};
use crate::{Error, Result};

/// An integer matrix with pairwise orthogonal rows of equal squared norm.
/// The row count may be smaller than the dimension, embedding a lower
/// dimensional lattice into a higher one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerOrthogonalMatrix {
    rows: Vec<LatticeVector>,
    dim: usize,
    row_norm_sq: u64,
}

impl IntegerOrthogonalMatrix {
    /// Validate rows: equal dimensions, `rows <= dim`, equal positive
    /// squared norms, pairwise orthogonal.
    pub fn new(rows: Vec<LatticeVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix with no rows".into()));
        }
        let dim = rows[0].dim();
        for r in &rows {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.dim() });
            }
        }
        if rows.len() > dim {
            return Err(Error::InvalidParameter(format!(
                "{} orthogonal rows cannot fit in dimension {dim}",
                rows.len()
            )));
        }
        let expected = rows[0].norm_sq();
        if expected == 0 {
            return Err(Error::InvalidParameter("matrix row of squared norm 0".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            let got = r.norm_sq();
            if got != expected {
                return Err(Error::UnequalRowNorms { row: i, got, expected });
            }
        }
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let ip = inner_unchecked(rows[i].coords(), rows[j].coords());
                if ip != 0 {
                    return Err(Error::NotOrthogonal { row_a: i, row_b: j, ip });
                }
            }
        }
        Ok(IntegerOrthogonalMatrix {
            dim,
            row_norm_sq: expected as u64,
            rows,
        })
    }

    pub fn rows(&self) -> &[LatticeVector] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The common squared row norm, i.e. the factor by which every inner
    /// product is scaled.
    pub fn row_norm_sq(&self) -> u64 {
        self.row_norm_sq
    }

    /// Image of `v`: the linear combination of the rows with coefficients
    /// `v_i`, so that `<Av, Aw> = c * <v, w>` exactly.
    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        if v.dim() != self.nrows() {
            return Err(Error::DimensionMismatch { expected: self.nrows(), got: v.dim() });
        }
        let mut out = vec![0i64; self.dim];
        for (coeff, row) in v.coords().iter().zip(&self.rows) {
            for (o, &r) in out.iter_mut().zip(row.coords()) {
                *o += coeff * r;
            }
        }
        Ok(LatticeVector::new(out))
    }
}

/// Move a whole code through an orthogonal-row matrix: `s_k` lands in
/// `s_{c*k}` of the matrix's column count, every inner product scales by
/// exactly `c`, and the admissibility bound `t` scales along with it.
pub fn embed_scale(code: &ShellCode, m: &IntegerOrthogonalMatrix) -> Result<ShellCode> {
    if m.nrows() != code.spec.shell.n {
        return Err(Error::DimensionMismatch {
            expected: code.spec.shell.n,
            got: m.nrows(),
        });
    }
    let c = m.row_norm_sq();
    let k_new = u64::from(code.spec.shell.k)
        .checked_mul(c)
        .and_then(|k| u32::try_from(k).ok())
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "scaled squared norm {c} * {} exceeds the supported range",
                code.spec.shell.k
            ))
        })?;
    let t_new = code
        .spec
        .t
        .checked_mul(c as i64)
        .ok_or_else(|| Error::InvalidParameter("scaled bound overflows".into()))?;
    let spec = CodeSpec::new(ShellId::new(m.dim(), k_new)?, t_new)?;
    let mut vectors = Vec::with_capacity(code.vectors.len());
    for v in &code.vectors {
        let image = m.apply(v)?;
        debug_assert_eq!(image.norm_sq(), i64::from(k_new));
        vectors.push(image);
    }
    let mut provenance = code.provenance.clone();
    provenance.steps.push(format!(
        "scaled inner products by {c} into dimension {}",
        m.dim()
    ));
    Ok(ShellCode { spec, vectors, provenance })
}

/// Tile `block` (a square matrix given as rows) down the diagonal of an
/// `n x n` matrix; `n` must be a multiple of the block size.
fn block_diagonal(block: &[Vec<i64>], n: usize, scale: i64) -> Vec<LatticeVector> {
    let b = block.len();
    debug_assert!(n.is_multiple_of(b));
    let mut rows = Vec::with_capacity(n);
    for start in (0..n).step_by(b) {
        for r in block {
            let mut row = vec![0i64; n];
            for (j, &x) in r.iter().enumerate() {
                row[start + j] = scale * x;
            }
            rows.push(LatticeVector::new(row));
        }
    }
    rows
}

/// A built-in orthogonal matrix with squared row norm `c` in dimension `n`,
/// when one exists.  Writing `c = s^2 * f` with `f` squarefree, the cases
/// are: `f = 1` (diagonal, any `n`), `f = 2` and `f = 5` (2x2 blocks, `n`
/// even), and `f = 10` (4x4 blocks, `n` divisible by 4).
pub fn builtin_orthogonal(c: u64, n: usize) -> Result<IntegerOrthogonalMatrix> {
    if c == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "orthogonal matrix needs c >= 1 and n >= 1, got c={c}, n={n}"
        )));
    }
    let (s, f) = split_square(c);
    let s = s as i64;
    let rows = match f {
        1 => {
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let mut row = vec![0i64; n];
                row[i] = s;
                rows.push(LatticeVector::new(row));
            }
            rows
        }
        2 if n.is_multiple_of(2) => block_diagonal(&[vec![1, 1], vec![1, -1]], n, s),
        5 if n.is_multiple_of(2) => block_diagonal(&[vec![1, 2], vec![2, -1]], n, s),
        10 if n.is_multiple_of(4) => block_diagonal(
            &[
                vec![1, 2, 1, 2],
                vec![2, -1, 2, -1],
                vec![1, 2, -1, -2],
                vec![2, -1, -2, 1],
            ],
            n,
            s,
        ),
        _ => return Err(Error::NoKnownConstruction { c, n }),
    };
    let m = IntegerOrthogonalMatrix::new(rows)?;
    debug_assert_eq!(m.row_norm_sq(), c);
    Ok(m)
}

/// The 4x4 matrix of +-1 entries with pairwise orthogonal rows: a denser
/// alternative to `2 * I` for squared row norm 4 in dimension 4.
pub fn hadamard4() -> IntegerOrthogonalMatrix {
    let rows = vec![
        LatticeVector::new(vec![1, 1, 1, 1]),
        LatticeVector::new(vec![1, -1, 1, -1]),
        LatticeVector::new(vec![1, 1, -1, -1]),
        LatticeVector::new(vec![1, -1, -1, 1]),
    ];
    IntegerOrthogonalMatrix::new(rows).expect("constant matrix is orthogonal")
}

/// Write a matrix as text: `c=<c>` followed by one row per line.
pub fn write_matrix(path: &Path, m: &IntegerOrthogonalMatrix) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "c={}", m.row_norm_sq())?;
    for r in m.rows() {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a matrix written by [`write_matrix`], re-validating orthogonality,
/// norms, and the declared `c`.
pub fn read_matrix(path: &Path) -> Result<IntegerOrthogonalMatrix> {
    let text = fs::read_to_string(path)?;
    let mut declared: Option<u64> = None;
    let mut declared_line = 0usize;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if declared.is_none() {
            let v = line.strip_prefix("c=").and_then(|v| v.parse::<u64>().ok());
            match v {
                Some(c) => {
                    declared = Some(c);
                    declared_line = lineno;
                }
                None => {
                    return Err(Error::MalformedFile {
                        format: "matrix",
                        line: lineno,
                        msg: format!("expected `c=<c>`, got {line:?}"),
                    })
                }
            }
            continue;
        }
        let row: LatticeVector = line.parse().map_err(|_| Error::MalformedFile {
            format: "matrix",
            line: lineno,
            msg: format!("bad row {line:?}"),
        })?;
        rows.push(row);
    }
    let declared = declared.ok_or(Error::MalformedFile {
        format: "matrix",
        line: text.lines().count(),
        msg: "missing `c=<c>` header".into(),
    })?;
    let m = IntegerOrthogonalMatrix::new(rows)?;
    if m.row_norm_sq() != declared {
        return Err(Error::MalformedFile {
            format: "matrix",
            line: declared_line,
            msg: format!("declared c={declared} but rows have squared norm {}", m.row_norm_sq()),
        });
    }
    Ok(m)
}
