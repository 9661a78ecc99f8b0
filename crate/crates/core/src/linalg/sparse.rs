use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::linalg::rng::Rng;

/// Coordinate-format sparse matrix.
///
/// Entries are sorted row-major, positions are unique and in range, and
/// stored values are finite and nonzero. An empty entry list is a valid
/// all-zero matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() || v == 0.0 {
                return Err(Error::InvalidArgument(
                    "sparse entries must be finite and nonzero".into(),
                ));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidArgument(
                "duplicate sparse entry position".into(),
            ));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// y = A x. Entries are visited in row-major order, so per-row addition
    /// order matches the dense dot product over the same values.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec input length");
        assert_eq!(y.len(), self.rows, "matvec output length");
        y.fill(0.0);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    pub fn scale(&self, factor: f64) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, v * factor))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            out.set(r, c, v);
        }
        out
    }
}

/// Random sparse matrix: each position is kept with probability `density`
/// and filled with a uniform draw from `[lo, hi)`; draws that land on exact
/// zero are repeated so the entry list stays nonzero. Positions are visited
/// row-major, which pins the draw order for a given seed.
pub fn sparse_uniform(
    rows: usize,
    cols: usize,
    density: f64,
    range: (f64, f64),
    rng: &mut Rng,
) -> Result<SparseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(
            "matrix dimensions must be positive".into(),
        ));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must be in (0, 1], got {density}"
        )));
    }
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "invalid value range ({lo}, {hi})"
        )));
    }
    let mut entries = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.chance(density) {
                let mut v = rng.uniform(lo, hi);
                while v == 0.0 {
                    v = rng.uniform(lo, hi);
                }
                entries.push((r, c, v));
            }
        }
    }
    SparseMatrix::new(rows, cols, entries)
}
