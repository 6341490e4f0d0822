//! Small dense matrices over the rationals. Row-major; all routines are exact and
//! deterministic (pivot = first nonzero entry in basis order).

use num_traits::{One, Zero};

use super::scalar::Scalar;

pub type Mat = Vec<Vec<Scalar>>;
pub type Vector = Vec<Scalar>;

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![Scalar::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Scalar::one();
    }
    m
}

pub fn mul(a: &Mat, b: &Mat, inner: usize, cols: usize) -> Mat {
    let rows = a.len();
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    let t = &a[i][k] * &b[k][j];
                    out[i][j] += t;
                }
            }
        }
    }
    out
}

pub fn mul_vec(a: &Mat, v: &[Scalar]) -> Vector {
    a.iter()
        .map(|row| {
            let mut s = Scalar::zero();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    s += x * y;
                }
            }
            s
        })
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn add_into(a: &mut Mat, b: &Mat) {
    for (r, s) in a.iter_mut().zip(b) {
        for (x, y) in r.iter_mut().zip(s) {
            *x += y;
        }
    }
}

pub fn scale(a: &mut Mat, c: &Scalar) {
    for r in a.iter_mut() {
        for x in r.iter_mut() {
            *x *= c;
        }
    }
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Mat, cols: usize) -> Vec<usize> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Scalar::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..m[r].len() {
                    if !m[r][j].is_zero() {
                        let t = &factor * &m[r][j];
                        m[i][j] -= t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the kernel of `m` (as column vectors of length `cols`).
pub fn kernel(m: &Mat, cols: usize) -> Vec<Vector> {
    let mut a = m.clone();
    let pivots = rref(&mut a, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); cols];
            v[f] = Scalar::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// A basis of the span of `vectors` drawn from the vectors themselves (first
/// independent ones in order).
pub fn independent_subset(vectors: &[Vector], dim: usize) -> Vec<Vector> {
    let mut chosen: Vec<Vector> = Vec::new();
    let mut echelon: Mat = Vec::new();
    for v in vectors {
        let mut trial = echelon.clone();
        trial.push(v.clone());
        let piv = rref(&mut trial, dim);
        if piv.len() > echelon.len() {
            chosen.push(v.clone());
            trial.truncate(piv.len());
            echelon = trial;
        }
    }
    chosen
}

pub fn rank(vectors: &[Vector], dim: usize) -> usize {
    let mut m = vectors.to_vec();
    rref(&mut m, dim).len()
}

/// Extends a basis of a subspace to a basis of the whole space with standard vectors
/// (first ones in order not already in the span).
pub fn complete_basis(sub: &[Vector], dim: usize) -> Vec<Vector> {
    let mut all = sub.to_vec();
    for i in 0..dim {
        let mut e = vec![Scalar::zero(); dim];
        e[i] = Scalar::one();
        let mut trial = all.clone();
        trial.push(e.clone());
        if rank(&trial, dim) > all.len() {
            all.push(e);
        }
        if all.len() == dim {
            break;
        }
    }
    all
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(cols: &[Vector], rows: usize) -> Mat {
    let mut m = zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for i in 0..rows {
            m[i][j] = c[i].clone();
        }
    }
    m
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse(m: &Mat) -> Option<Mat> {
    let n = m.len();
    let mut aug: Mat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug, n);
    if piv.len() < n || piv.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `a x = b` for a matrix with full column rank; `None` if inconsistent.
pub fn solve(a: &Mat, b: &[Scalar], cols: usize) -> Option<Vector> {
    let rows = a.len();
    let mut aug: Mat = (0..rows)
        .map(|i| {
            let mut r = a[i].clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let piv = rref(&mut aug, cols + 1);
    if piv.contains(&cols) {
        return None;
    }
    let mut x = vec![Scalar::zero(); cols];
    for (r, &p) in piv.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Some(x)
}

/// Projection onto `span(sub)` along the span of the standard vectors completing it.
pub fn projection_onto(sub: &[Vector], dim: usize) -> Mat {
    let full = complete_basis(sub, dim);
    let p = from_columns(&full, dim);
    let pinv = inverse(&p).expect("completed basis is invertible");
    let mut keep = zeros(dim, dim);
    for i in 0..sub.len() {
        keep[i][i] = Scalar::one();
    }
    let t = mul(&p, &keep, dim, dim);
    mul(&t, &pinv, dim, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scalar::int;

    #[test]
    fn kernel_of_rank_one() {
        let m = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        let k = kernel(&m, 2);
        assert_eq!(k, vec![vec![int(-2), int(1)]]);
    }

    #[test]
    fn projection_is_idempotent() {
        let sub = vec![vec![int(1), int(1), int(0)]];
        let p = projection_onto(&sub, 3);
        let p2 = mul(&p, &p, 3, 3);
        assert_eq!(p, p2);
        assert_eq!(mul_vec(&p, &sub[0]), sub[0]);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = vec![vec![int(2), int(1)], vec![int(1), int(1)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(mul(&m, &inv, 2, 2), identity(2));
        assert!(inverse(&vec![vec![int(1), int(1)], vec![int(1), int(1)]]).is_none());
    }
}
