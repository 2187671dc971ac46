//! Small dense kernels on row-major `Vec<f64>` storage.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // independent accumulators over exact chunks let the loop vectorise
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    let mut acc = [0.0f64; 8];
    for (x, y) in ca.zip(cb) {
        let x: &[f64; 8] = x.try_into().expect("chunk of 8");
        let y: &[f64; 8] = y.try_into().expect("chunk of 8");
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `(a . b, a . c)` sharing the loads of `a`.
#[inline]
pub(crate) fn dot2(a: &[f64], b: &[f64], c: &[f64]) -> (f64, f64) {
    let n = a.len().min(b.len()).min(c.len());
    let (a, b, c) = (&a[..n], &b[..n], &c[..n]);
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let cc = c.chunks_exact(4);
    let (mut tb, mut tc) = (0.0, 0.0);
    for ((x, y), z) in ca.remainder().iter().zip(cb.remainder()).zip(cc.remainder()) {
        tb += x * y;
        tc += x * z;
    }
    let mut sb = [0.0f64; 4];
    let mut sc = [0.0f64; 4];
    for ((x, y), z) in ca.zip(cb).zip(cc) {
        let x: &[f64; 4] = x.try_into().expect("chunk of 4");
        let y: &[f64; 4] = y.try_into().expect("chunk of 4");
        let z: &[f64; 4] = z.try_into().expect("chunk of 4");
        for k in 0..4 {
            sb[k] += x[k] * y[k];
            sc[k] += x[k] * z[k];
        }
    }
    (
        (sb[0] + sb[2]) + (sb[1] + sb[3]) + tb,
        (sc[0] + sc[2]) + (sc[1] + sc[3]) + tc,
    )
}

/// In-place lower Cholesky factor of the symmetric matrix `a` (`n x n`).
/// Only the lower triangle is read; the strict upper triangle is zeroed.
/// Returns `false` when a non-positive pivot is met.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let (upper, lower) = a.split_at_mut((j + 1) * n);
        let row_j = &mut upper[j * n..];
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let ljj = libm::sqrt(d);
        row_j[j] = ljj;
        for v in row_j[j + 1..].iter_mut() {
            *v = 0.0;
        }
        let row_j = &upper[j * n..j * n + j];
        let inv = 1.0 / ljj;
        // rows in pairs share the loads of row j
        let mut i = j + 1;
        while i + 1 < n {
            let (ri, rk) = lower[(i - j - 1) * n..(i - j + 1) * n].split_at_mut(n);
            let (x, y) = dot2(row_j, &ri[..j], &rk[..j]);
            ri[j] = (ri[j] - x) * inv;
            rk[j] = (rk[j] - y) * inv;
            i += 2;
        }
        if i < n {
            let ri = &mut lower[(i - j - 1) * n..(i - j) * n];
            ri[j] = (ri[j] - dot(&ri[..j], row_j)) * inv;
        }
    }
    true
}

/// Solves `L x = b` for lower-triangular `L`.
pub(crate) fn solve_lower(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        b[i] = (b[i] - dot(row, &b[..i])) / l[i * n + i];
    }
}

/// Solves `L^T x = b` for lower-triangular `L`.
pub(crate) fn solve_lower_transposed(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let xi = b[i] / l[i * n + i];
        b[i] = xi;
        let row = &l[i * n..i * n + i];
        for (bk, lk) in b[..i].iter_mut().zip(row) {
            *bk -= lk * xi;
        }
    }
}

/// `(L L^T)^{-1}` from a lower Cholesky factor, as a full symmetric matrix.
pub(crate) fn inverse_from_cholesky(l: &[f64], n: usize) -> Vec<f64> {
    // rows of u are the columns of L^{-1}; u[i][k] is non-zero for k >= i
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        let ci = &mut u[i * n..(i + 1) * n];
        ci[i] = 1.0 / l[i * n + i];
        for r in i + 1..n {
            ci[r] = -dot(&l[r * n + i..r * n + r], &ci[i..r]) / l[r * n + r];
        }
    }
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        let ui = &u[i * n + i..(i + 1) * n];
        let mut j = 0;
        while j + 1 < i {
            let (x, y) = dot2(ui, &u[j * n + i..(j + 1) * n], &u[(j + 1) * n + i..(j + 2) * n]);
            inv[i * n + j] = x;
            inv[j * n + i] = x;
            inv[i * n + j + 1] = y;
            inv[(j + 1) * n + i] = y;
            j += 2;
        }
        while j <= i {
            let x = dot(ui, &u[j * n + i..(j + 1) * n]);
            inv[i * n + j] = x;
            inv[j * n + i] = x;
            j += 1;
        }
    }
    inv
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub(crate) fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = {
                    let r = libm::sqrt(theta * theta + 1.0);
                    let t = 1.0 / (theta.abs() + r);
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> Vec<f64> {
        // B B^T + n I from a tiny LCG
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b: Vec<f64> = (0..n * n).map(|_| next()).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += n as f64;
        }
        a
    }

    #[test]
    fn cholesky_reconstructs() {
        let n = 9;
        let a = spd(n, 3);
        let mut l = a.clone();
        assert!(cholesky_in_place(&mut l, n));
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
                assert!((v - a[i * n + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(!cholesky_in_place(&mut a, 2));
    }

    #[test]
    fn triangular_solves_and_inverse() {
        let n = 7;
        let a = spd(n, 11);
        let mut l = a.clone();
        assert!(cholesky_in_place(&mut l, n));
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut x = b.clone();
        solve_lower(&l, n, &mut x);
        solve_lower_transposed(&l, n, &mut x);
        for i in 0..n {
            let ax: f64 = (0..n).map(|k| a[i * n + k] * x[k]).sum();
            assert!((ax - b[i]).abs() < 1e-10);
        }
        let inv = inverse_from_cholesky(&l, n);
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| a[i * n + k] * inv[k * n + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_on_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let e = symmetric_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
        let n = 6;
        let a = spd(n, 5);
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let e = symmetric_eigenvalues(a, n);
        assert!((e.iter().sum::<f64>() - trace).abs() < 1e-10);
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }
}
