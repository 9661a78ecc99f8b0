use crate::error::{Error, Result};

/// Linear operator view shared by dense and sparse matrices.
pub trait MatVec {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// y = A x.
    fn matvec(&self, x: &[f64], y: &mut [f64]);
}

/// Stagnation tolerance used when no explicit tolerance is given.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Matrix-vector product budget used when no explicit budget is given.
pub fn default_max_iter(n: usize) -> usize {
    (10 * n).max(500)
}

/// Krylov subspace dimension. Matrices up to this size are reduced fully,
/// which makes the estimate exact to rounding; larger ones go through
/// filtered restarts.
const KRYLOV_DIM: usize = 64;

/// Dominant directions spared by the restart filter.
const FILTER_KEEP: usize = 8;

const RESTART_ATTEMPTS: usize = 3;

/// Largest eigenvalue magnitude of a square matrix.
///
/// Two phases, both deterministic. A power sequence from the normalized
/// all-ones vector first watches for exact annihilation: structured
/// nilpotent matrices (shift chains, strictly triangular fills) drive any
/// vector to an exact floating-point zero within `n` products, which no
/// eigenvalue computation detects reliably. An annihilated start is retried
/// from a deterministically perturbed vector; when every retry annihilates
/// the radius is zero. A surviving vector seeds the second phase: the
/// operator is projected onto a Krylov basis and the projection's
/// eigenvalues are computed with the implicit double-shift QR algorithm,
/// whose largest magnitude is the estimate. Matrices of size at most
/// [`KRYLOV_DIM`] are reduced completely, making the estimate exact up to
/// rounding. Larger matrices go through polynomial-filtered restarts that
/// damp every non-dominant Ritz direction until the estimate stagnates
/// within `tol` over consecutive cycles. `max_iter` caps the total number
/// of matrix-vector products across both phases.
pub fn spectral_radius<M: MatVec>(a: &M, tol: f64, max_iter: usize) -> Result<f64> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "spectral radius needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be positive".into()));
    }

    let n = a.rows();
    let mut used = 0usize;
    let mut attempts = 0usize;
    let mut v = normalized_ones(n);
    let mut running = 0.0;
    'probe: loop {
        let mut w = vec![0.0; n];
        for _ in 0..=n {
            if used >= max_iter {
                return Err(Error::NonConvergence {
                    iterations: used,
                    last_estimate: running,
                });
            }
            a.matvec(&v, &mut w);
            used += 1;
            let s = norm(&w);
            if s == 0.0 {
                attempts += 1;
                if attempts >= RESTART_ATTEMPTS {
                    return Ok(0.0);
                }
                v = perturbed_start(n, attempts);
                continue 'probe;
            }
            running = s;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / s;
            }
        }
        break;
    }

    if n <= KRYLOV_DIM {
        return full_reduction(a, n, v);
    }
    restarted(a, n, tol, max_iter, used, v, attempts)
}

/// Complete Hessenberg reduction; exact up to rounding, no restarts needed.
fn full_reduction<M: MatVec>(a: &M, n: usize, start: Vec<f64>) -> Result<f64> {
    let mut arn = Arnoldi::new(a, start, n);
    arn.extend_to(n);
    let h = arn.square_h();
    let scale = max_abs(&h);
    match eigenvalues_of_hessenberg(h, n) {
        Some(eigs) => {
            let rho = eigs.iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max);
            Ok(clamp_noise(rho, n, scale))
        }
        None => Err(Error::NonConvergence {
            iterations: n,
            last_estimate: 0.0,
        }),
    }
}

fn restarted<M: MatVec>(
    a: &M,
    n: usize,
    tol: f64,
    max_iter: usize,
    mut used: usize,
    mut v: Vec<f64>,
    mut annihilations: usize,
) -> Result<f64> {
    let m = KRYLOV_DIM;
    let mut previous: Option<f64> = None;
    let mut agree = 0usize;
    let mut last_estimate = 0.0;

    loop {
        let mut arn = Arnoldi::new(a, v.clone(), m);
        arn.extend_to(m);
        used += arn.matvecs;
        let h = arn.square_h();
        let scale = max_abs(&h);
        let eigs = match eigenvalues_of_hessenberg(h, m) {
            Some(e) => e,
            None => {
                return Err(Error::NonConvergence {
                    iterations: used,
                    last_estimate,
                })
            }
        };
        let mut order: Vec<usize> = (0..eigs.len()).collect();
        order.sort_by(|&i, &j| {
            let mi = eigs[i].0.hypot(eigs[i].1);
            let mj = eigs[j].0.hypot(eigs[j].1);
            mj.partial_cmp(&mi).unwrap()
        });
        let top = eigs[order[0]];
        let estimate = clamp_noise(top.0.hypot(top.1), m, scale);
        last_estimate = estimate;

        if let Some(prev) = previous {
            if (estimate - prev).abs() <= tol * estimate.max(1e-300) {
                agree += 1;
                if agree >= 2 {
                    return Ok(estimate);
                }
            } else {
                agree = 0;
            }
        }
        previous = Some(estimate);

        if used >= max_iter {
            return Err(Error::NonConvergence {
                iterations: used,
                last_estimate,
            });
        }

        // Restart direction: damp every Ritz direction outside the dominant
        // group by applying the corresponding real linear or quadratic
        // factors of the characteristic polynomial to the current vector.
        let mut keep = FILTER_KEEP.min(eigs.len());
        if keep < eigs.len() && keep > 0 {
            let a_edge = eigs[order[keep - 1]];
            let b_edge = eigs[order[keep]];
            // do not split a conjugate pair at the cut
            if a_edge.1 != 0.0 && a_edge.0 == b_edge.0 && a_edge.1 == -b_edge.1 {
                keep += 1;
            }
        }
        v = arn.basis.remove(0); // current cycle's start direction
        let mut used_flag = vec![false; eigs.len()];
        let mut work = vec![0.0; n];
        let mut annihilated = false;
        for &idx in order.iter().skip(keep) {
            if used_flag[idx] {
                continue;
            }
            used_flag[idx] = true;
            let (re, im) = eigs[idx];
            if im == 0.0 {
                // v <- (A - re I) v
                a.matvec(&v, &mut work);
                used += 1;
                for i in 0..n {
                    v[i] = work[i] - re * v[i];
                }
            } else {
                // v <- (A^2 - 2 re A + (re^2 + im^2) I) v
                if let Some(&pair) = order
                    .iter()
                    .find(|&&j| !used_flag[j] && eigs[j].0 == re && eigs[j].1 == -im)
                {
                    used_flag[pair] = true;
                }
                a.matvec(&v, &mut work);
                let mut w2 = vec![0.0; n];
                a.matvec(&work, &mut w2);
                used += 2;
                let norm2 = re * re + im * im;
                for i in 0..n {
                    v[i] = w2[i] - 2.0 * re * work[i] + norm2 * v[i];
                }
            }
            let s = norm(&v);
            if s <= 1e-300 || !s.is_finite() {
                annihilated = true;
                break;
            }
            for x in &mut v {
                *x /= s;
            }
        }
        if annihilated || norm(&v) <= 1e-300 {
            annihilations += 1;
            if annihilations >= RESTART_ATTEMPTS {
                return Ok(0.0);
            }
            v = perturbed_start(n, annihilations);
        }
    }
}

/// Arnoldi factorization with full reorthogonalization. A breakdown (the
/// next direction vanishes) records a zero coupling and continues with a
/// fresh orthogonal direction, so the factorization always reaches the
/// requested size; the zero subdiagonal simply decouples the blocks.
struct Arnoldi<'a, M: MatVec> {
    a: &'a M,
    n: usize,
    m: usize,
    basis: Vec<Vec<f64>>,
    h: Vec<f64>, // (m+1) x m, row-major
    matvecs: usize,
}

impl<'a, M: MatVec> Arnoldi<'a, M> {
    fn new(a: &'a M, start: Vec<f64>, m: usize) -> Self {
        let n = start.len();
        let mut v0 = start;
        let s = norm(&v0);
        if s > 0.0 {
            for x in &mut v0 {
                *x /= s;
            }
        } else {
            v0 = normalized_ones(n);
        }
        Arnoldi {
            a,
            n,
            m,
            basis: vec![v0],
            h: vec![0.0; (m + 1) * m],
            matvecs: 0,
        }
    }

    fn extend_to(&mut self, size: usize) {
        let m = self.m;
        for j in self.basis.len() - 1..size {
            let mut w = vec![0.0; self.n];
            self.a.matvec(&self.basis[j], &mut w);
            self.matvecs += 1;
            let w_scale = norm(&w);
            for pass in 0..2 {
                for (i, vi) in self.basis.iter().enumerate() {
                    let c = dot(&w, vi);
                    if pass == 0 {
                        self.h[i * m + j] = c;
                    } else {
                        self.h[i * m + j] += c;
                    }
                    for (wk, vk) in w.iter_mut().zip(vi) {
                        *wk -= c * vk;
                    }
                }
            }
            if j + 1 == size && size == m {
                self.h[(j + 1) * m + j] = norm(&w);
                break;
            }
            let hnext = norm(&w);
            if hnext > 1e-13 * w_scale.max(1e-300) {
                self.h[(j + 1) * m + j] = hnext;
                for x in &mut w {
                    *x /= hnext;
                }
                self.basis.push(w);
            } else {
                self.h[(j + 1) * m + j] = 0.0;
                match self.fresh_direction() {
                    Some(next) => self.basis.push(next),
                    None => break,
                }
            }
        }
    }

    /// Coordinate direction with the largest component outside the current
    /// basis, orthonormalized against it.
    fn fresh_direction(&self) -> Option<Vec<f64>> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..self.n {
            let mut cand = vec![0.0; self.n];
            cand[k] = 1.0;
            for vi in &self.basis {
                let c = dot(&cand, vi);
                for (ck, vk) in cand.iter_mut().zip(vi) {
                    *ck -= c * vk;
                }
            }
            let s = norm(&cand);
            if s > 0.5 {
                for x in &mut cand {
                    *x /= s;
                }
                return Some(cand);
            }
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, cand));
            }
        }
        match best {
            Some((s, mut cand)) if s > 1e-8 => {
                for x in &mut cand {
                    *x /= s;
                }
                Some(cand)
            }
            _ => None,
        }
    }

    fn square_h(&self) -> Vec<f64> {
        let m = self.basis.len().min(self.m);
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.h[i * self.m + j];
            }
        }
        out
    }
}

/// Eigenvalues of a real upper Hessenberg matrix by the implicit
/// double-shift QR algorithm, returned as (real, imaginary) pairs. Returns
/// None if some eigenvalue fails to deflate within the iteration cap.
fn eigenvalues_of_hessenberg(mut h: Vec<f64>, n: usize) -> Option<Vec<(f64, f64)>> {
    if n == 0 {
        return Some(Vec::new());
    }
    if n == 1 {
        return Some(vec![(h[0], 0.0)]);
    }
    let eps = f64::EPSILON;
    let idx = |i: usize, j: usize| i * n + j;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[idx(i, j)].abs();
        }
    }
    if anorm == 0.0 {
        return Some(vec![(0.0, 0.0); n]);
    }
    let mut eigs = Vec::with_capacity(n);
    let mut t = 0.0;
    let mut hi = n - 1; // index of the trailing active row
    'outer: loop {
        let mut its = 0;
        loop {
            // look for a negligible subdiagonal element
            let mut l = hi;
            while l >= 1 {
                let mut s = h[idx(l - 1, l - 1)].abs() + h[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[idx(l, l - 1)].abs() <= eps * s {
                    h[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[idx(hi, hi)];
            if l == hi {
                eigs.push((x + t, 0.0));
                if hi == 0 {
                    break 'outer;
                }
                hi -= 1;
                break;
            }
            let mut y = h[idx(hi - 1, hi - 1)];
            let mut w = h[idx(hi, hi - 1)] * h[idx(hi - 1, hi)];
            if l + 1 == hi {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x2 = x + t;
                if q >= 0.0 {
                    let z = p + if p >= 0.0 { z } else { -z };
                    let first = x2 + z;
                    let second = if z != 0.0 { x2 - w / z } else { first };
                    eigs.push((first, 0.0));
                    eigs.push((second, 0.0));
                } else {
                    eigs.push((x2 + p, z));
                    eigs.push((x2 + p, -z));
                }
                if hi == 1 {
                    break 'outer;
                }
                hi -= 2;
                break;
            }
            if its == 30 {
                return None;
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=hi {
                    h[idx(i, i)] -= x;
                }
                let s = h[idx(hi, hi - 1)].abs() + h[idx(hi - 1, hi - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // two consecutive small subdiagonals
            let mut m = hi - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = h[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[idx(m + 1, m)] + h[idx(m, m + 1)];
                q = h[idx(m + 1, m + 1)] - z - rr - ss;
                r = h[idx(m + 2, m + 1)];
                let scale = p.abs() + q.abs() + r.abs();
                p /= scale;
                q /= scale;
                r /= scale;
                if m == l {
                    break;
                }
                let u = h[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (h[idx(m - 1, m - 1)].abs() + z.abs() + h[idx(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=hi {
                h[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    h[idx(i, i - 3)] = 0.0;
                }
            }
            // double QR sweep on rows l..=hi
            for k in m..hi {
                if k != m {
                    p = h[idx(k, k - 1)];
                    q = h[idx(k + 1, k - 1)];
                    r = if k != hi - 1 { h[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s_raw = (p * p + q * q + r * r).sqrt();
                let s = if p >= 0.0 { s_raw } else { -s_raw };
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        h[idx(k, k - 1)] = -h[idx(k, k - 1)];
                    }
                } else {
                    h[idx(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=hi {
                    let mut pp = h[idx(k, j)] + q * h[idx(k + 1, j)];
                    if k != hi - 1 {
                        pp += r * h[idx(k + 2, j)];
                        h[idx(k + 2, j)] -= pp * z;
                    }
                    h[idx(k + 1, j)] -= pp * y;
                    h[idx(k, j)] -= pp * x;
                }
                let mmin = hi.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * h[idx(i, k)] + y * h[idx(i, k + 1)];
                    if k != hi - 1 {
                        pp += z * h[idx(i, k + 2)];
                        h[idx(i, k + 2)] -= pp * r;
                    }
                    h[idx(i, k + 1)] -= pp * q;
                    h[idx(i, k)] -= pp;
                }
            }
        }
    }
    Some(eigs)
}

/// Magnitudes at or below the projection's rounding noise are exact zeros
/// for every practical purpose (nilpotent and strictly triangular inputs).
fn clamp_noise(rho: f64, n: usize, scale: f64) -> f64 {
    if rho <= 8.0 * n as f64 * f64::EPSILON * scale {
        0.0
    } else {
        rho
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn normalized_ones(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

fn perturbed_start(n: usize, attempt: usize) -> Vec<f64> {
    let phase = 1.618 + attempt as f64;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i + 1) as f64 * phase).sin())
        .collect();
    let s = norm(&v);
    for x in &mut v {
        *x /= s;
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
