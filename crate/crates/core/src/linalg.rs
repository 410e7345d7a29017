//! Dense linear algebra over a `GaloisField`. Matrices are row-major `Vec<Symbol>`.

use crate::gf::{GaloisField, Symbol};

/// Inverts the `n x n` matrix `a`. Returns `None` if it is singular.
pub fn invert(f: &GaloisField, a: &[Symbol], n: usize) -> Option<Vec<Symbol>> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1;
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r * n + col] != 0)?;
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
        }
        let scale = f.inv(m[col * n + col]);
        for c in 0..n {
            m[col * n + c] = f.mul(m[col * n + c], scale);
            inv[col * n + c] = f.mul(inv[col * n + c], scale);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * n + col];
            if factor == 0 {
                continue;
            }
            for c in 0..n {
                m[r * n + c] = f.sub(m[r * n + c], f.mul(factor, m[col * n + c]));
                inv[r * n + c] = f.sub(inv[r * n + c], f.mul(factor, inv[col * n + c]));
            }
        }
    }
    Some(inv)
}

/// `y = A x` for an `rows x cols` matrix.
pub fn mat_vec(f: &GaloisField, a: &[Symbol], rows: usize, cols: usize, x: &[Symbol]) -> Vec<Symbol> {
    (0..rows).map(|r| f.dot(&a[r * cols..(r + 1) * cols], x)).collect()
}

/// `C = A B` with `A: r x s`, `B: s x c`.
pub fn mat_mul(f: &GaloisField, a: &[Symbol], b: &[Symbol], r: usize, s: usize, c: usize) -> Vec<Symbol> {
    let mut out = vec![0; r * c];
    for i in 0..r {
        for l in 0..s {
            let x = a[i * s + l];
            if x == 0 {
                continue;
            }
            for j in 0..c {
                out[i * c + j] = f.mul_add(out[i * c + j], x, b[l * c + j]);
            }
        }
    }
    out
}

/// Rank of a `rows x cols` matrix.
pub fn rank(f: &GaloisField, a: &[Symbol], rows: usize, cols: usize) -> usize {
    let mut m = a.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        for c in 0..cols {
            m.swap(pivot * cols + c, rank * cols + c);
        }
        let scale = f.inv(m[rank * cols + col]);
        for c in 0..cols {
            m[rank * cols + c] = f.mul(m[rank * cols + c], scale);
        }
        for r in 0..rows {
            if r != rank && m[r * cols + col] != 0 {
                let factor = m[r * cols + col];
                for c in 0..cols {
                    m[r * cols + c] = f.sub(m[r * cols + c], f.mul(factor, m[rank * cols + c]));
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Solves `A x = b` for a square nonsingular `A`.
pub fn solve(f: &GaloisField, a: &[Symbol], n: usize, b: &[Symbol]) -> Option<Vec<Symbol>> {
    invert(f, a, n).map(|inv| mat_vec(f, &inv, n, n, b))
}
