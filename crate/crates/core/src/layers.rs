//! Seedable constructors for input and reservoir matrices.
//!
//! Every constructor is a pure function of its arguments: equal parameters
//! and an equally seeded generator produce bit-identical matrices. Random
//! entries are always drawn in row-major order.

use crate::error::{Error, Result};
use crate::linalg::{rescale_spectral_radius, sparse_uniform, DenseMatrix, Matrix, Rng, SparseMatrix};

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn check_finite(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{name} must be finite, got {value}"
        )));
    }
    Ok(())
}

fn check_dims(res_size: usize, in_size: usize) -> Result<()> {
    if res_size == 0 || in_size == 0 {
        return Err(Error::InvalidArgument(format!(
            "layer dimensions must be positive, got {res_size}x{in_size}"
        )));
    }
    Ok(())
}

/// Fully dense input layer with entries uniform on [-scaling, scaling].
pub fn dense_uniform_input(
    res_size: usize,
    in_size: usize,
    scaling: f64,
    rng: &mut Rng,
) -> Result<DenseMatrix> {
    check_dims(res_size, in_size)?;
    check_positive("scaling", scaling)?;
    let values = (0..res_size * in_size)
        .map(|_| rng.uniform(-scaling, scaling))
        .collect();
    DenseMatrix::new(res_size, in_size, values)
}

/// Input layer that partitions the reservoir rows into one contiguous group
/// per input dimension: ⌊res_size/in_size⌋ rows each, remainder rows joining
/// the last group. Each row carries a single uniform weight in its group's
/// column.
pub fn weighted_input(
    res_size: usize,
    in_size: usize,
    scaling: f64,
    rng: &mut Rng,
) -> Result<DenseMatrix> {
    check_dims(res_size, in_size)?;
    check_positive("scaling", scaling)?;
    if res_size < in_size {
        return Err(Error::InvalidArgument(format!(
            "weighted input needs at least one row per input, got {res_size} rows for {in_size} inputs"
        )));
    }
    let group = res_size / in_size;
    let mut m = DenseMatrix::zeros(res_size, in_size);
    for row in 0..res_size {
        let col = (row / group).min(in_size - 1);
        m.set(row, col, rng.uniform(-scaling, scaling));
    }
    Ok(m)
}

/// Where the signs of a minimal input layer come from.
pub enum SignSource<'a> {
    /// Independent fair coin flips.
    Random(&'a mut Rng),
    /// Fixed bits read row-major; false maps to minus, true to plus.
    Deterministic(&'a [bool]),
}

/// Input layer whose entries all share one magnitude and differ only in sign.
pub fn minimal_input(
    res_size: usize,
    in_size: usize,
    weight: f64,
    signs: SignSource,
) -> Result<DenseMatrix> {
    check_dims(res_size, in_size)?;
    check_positive("weight", weight)?;
    let count = res_size * in_size;
    let values = match signs {
        SignSource::Random(rng) => (0..count)
            .map(|_| if rng.chance(0.5) { weight } else { -weight })
            .collect(),
        SignSource::Deterministic(bits) => {
            if bits.len() < count {
                return Err(Error::InvalidArgument(format!(
                    "sign sequence has {} bits, need {count}",
                    bits.len()
                )));
            }
            bits[..count]
                .iter()
                .map(|b| if *b { weight } else { -weight })
                .collect()
        }
    };
    DenseMatrix::new(res_size, in_size, values)
}

/// Reservoir sampled uniformly on (-1, 1) at the given density, then rescaled
/// to the requested spectral radius. A draw that happens to be nilpotent is
/// retried from derived generator streams up to three times. Full density
/// returns a dense representation, sampled values unchanged.
pub fn rand_sparse_reservoir(
    size: usize,
    density: f64,
    radius: f64,
    rng: &mut Rng,
) -> Result<Matrix> {
    if size == 0 {
        return Err(Error::InvalidArgument("reservoir size must be positive".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    check_positive("radius", radius)?;
    let mut attempt = 0u64;
    loop {
        let sampled = if attempt == 0 {
            sparse_uniform(size, size, density, (-1.0, 1.0), rng)?
        } else {
            sparse_uniform(size, size, density, (-1.0, 1.0), &mut rng.retry_fork(attempt))?
        };
        let m = if density == 1.0 {
            Matrix::Dense(sampled.to_dense())
        } else {
            Matrix::Sparse(sampled)
        };
        match rescale_spectral_radius(m, radius) {
            Ok(scaled) => return Ok(scaled),
            Err(Error::CannotRescale) if attempt < 3 => attempt += 1,
            Err(e) => return Err(e),
        }
    }
}

fn check_reservoir_size(size: usize) -> Result<()> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!(
            "structured reservoirs need size of at least 2, got {size}"
        )));
    }
    Ok(())
}

/// Single directed cycle through all units with one shared weight. Its
/// spectral radius is exactly |r|.
pub fn simple_cycle_reservoir(size: usize, r: f64) -> Result<Matrix> {
    check_reservoir_size(size)?;
    check_finite("cycle weight", r)?;
    let mut entries = Vec::with_capacity(size);
    if r != 0.0 {
        entries.push((0, size - 1, r));
        for i in 1..size {
            entries.push((i, i - 1, r));
        }
    }
    Ok(Matrix::Sparse(SparseMatrix::new(size, size, entries)?))
}

/// Chain of units passing activation down one step per update; nilpotent, so
/// its spectral radius is zero.
pub fn delay_line_reservoir(size: usize, r: f64) -> Result<Matrix> {
    check_reservoir_size(size)?;
    check_finite("delay weight", r)?;
    let mut entries = Vec::with_capacity(size - 1);
    if r != 0.0 {
        for i in 1..size {
            entries.push((i, i - 1, r));
        }
    }
    Ok(Matrix::Sparse(SparseMatrix::new(size, size, entries)?))
}

/// Delay chain with a feedback connection one step back up the line.
pub fn delay_line_backward_reservoir(size: usize, r: f64, b: f64) -> Result<Matrix> {
    check_reservoir_size(size)?;
    check_finite("delay weight", r)?;
    check_finite("feedback weight", b)?;
    let mut entries = Vec::new();
    for i in 1..size {
        if b != 0.0 {
            entries.push((i - 1, i, b));
        }
        if r != 0.0 {
            entries.push((i, i - 1, r));
        }
    }
    Ok(Matrix::Sparse(SparseMatrix::new(size, size, entries)?))
}

/// Reservoir with prescribed singular values: a positive diagonal is filled
/// in by random plane rotations until at most the requested fraction of
/// entries is zero (or a budget of size² rotations runs out). Orthogonal
/// rotations leave the singular values untouched, so the spectral radius
/// never exceeds the largest diagonal value.
pub fn pseudo_svd_reservoir(
    size: usize,
    max_value: f64,
    sparsity: f64,
    rng: &mut Rng,
) -> Result<Matrix> {
    check_reservoir_size(size)?;
    check_positive("max_value", max_value)?;
    if !(sparsity > 0.0 && sparsity < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sparsity must lie in (0, 1), got {sparsity}"
        )));
    }
    let mut m = DenseMatrix::zeros(size, size);
    for i in 0..size {
        // uniform on (0, max_value]
        m.set(i, i, max_value * (1.0 - rng.uniform(0.0, 1.0)));
    }
    let mut zeros = size * size - size;
    let budget = size * size;
    let total = (size * size) as f64;
    let mut applied = 0;
    while zeros as f64 / total > sparsity && applied < budget {
        let i = rng.index(size);
        let mut j = rng.index(size - 1);
        if j >= i {
            j += 1;
        }
        let mut angle = rng.uniform(0.0, std::f64::consts::TAU);
        while angle == 0.0 {
            angle = rng.uniform(0.0, std::f64::consts::TAU);
        }
        let (sin, cos) = angle.sin_cos();
        for row in 0..size {
            let a = m[(row, i)];
            let b = m[(row, j)];
            zeros -= (a == 0.0) as usize + (b == 0.0) as usize;
            let a2 = cos * a - sin * b;
            let b2 = sin * a + cos * b;
            m.set(row, i, a2);
            m.set(row, j, b2);
            zeros += (a2 == 0.0) as usize + (b2 == 0.0) as usize;
        }
        applied += 1;
    }
    Ok(Matrix::Dense(m))
}
