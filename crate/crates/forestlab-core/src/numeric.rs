//! Small numeric helpers shared by the flow and determinantal modules:
//! modified Gram-Schmidt, projector matrices, and exact integer kernels.

use nalgebra::DMatrix;

/// Relative rank cutoff for Gram-Schmidt: a candidate whose residual norm is
/// below `RANK_TOL * max(1, original norm)` is treated as dependent.
pub(crate) const RANK_TOL: f64 = 1e-9;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Returns an
/// orthonormal basis of the span; dependent inputs are dropped.
pub(crate) fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let original = norm(v);
        let mut w = v.clone();
        // Two passes of MGS keep the basis orthonormal to machine precision
        // even when inputs are nearly dependent.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let r = norm(&w);
        if r > RANK_TOL * original.max(1.0) {
            for wi in w.iter_mut() {
                *wi /= r;
            }
            basis.push(w);
        }
    }
    basis
}

/// Orthogonal projector `B Bᵀ` onto the span of an orthonormal basis.
pub(crate) fn projector(basis: &[Vec<f64>], ambient: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(ambient, ambient);
    for b in basis {
        for i in 0..ambient {
            if b[i] == 0.0 {
                continue;
            }
            for j in 0..ambient {
                p[(i, j)] += b[i] * b[j];
            }
        }
    }
    p
}

/// Frobenius distance between the projectors of two orthonormal families.
pub(crate) fn projector_distance(a: &[Vec<f64>], b: &[Vec<f64>], ambient: usize) -> f64 {
    (projector(a, ambient) - projector(b, ambient)).norm()
}

/// Basis of `{ a ∈ Z^m : sum_k a_k rows[k] = 0 }` for integer rows, computed
/// exactly by integer row reduction of `[rows | I]`: rows whose lattice part
/// is eliminated to zero yield kernel combinations.
pub(crate) fn integer_kernel(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let m = rows.len();
    if m == 0 {
        return Vec::new();
    }
    let r = rows[0].len();
    let mut w: Vec<Vec<i128>> = rows
        .iter()
        .enumerate()
        .map(|(k, row)| {
            assert_eq!(row.len(), r, "voltage rows must have equal rank");
            let mut ext: Vec<i128> = row.iter().map(|&x| x as i128).collect();
            ext.extend((0..m).map(|j| if j == k { 1 } else { 0 }));
            ext
        })
        .collect();
    let mut pivot_rows: Vec<usize> = Vec::new();
    for col in 0..r {
        loop {
            // Euclidean elimination: repeatedly reduce by the row with the
            // smallest nonzero entry in this column until one remains.
            let mut candidates: Vec<usize> = (0..m)
                .filter(|i| !pivot_rows.contains(i) && w[*i][col] != 0)
                .collect();
            if candidates.is_empty() {
                break;
            }
            candidates.sort_by_key(|&i| w[i][col].abs());
            let p = candidates[0];
            if candidates.len() == 1 {
                pivot_rows.push(p);
                break;
            }
            for &i in &candidates[1..] {
                let q = w[i][col] / w[p][col];
                if q != 0 {
                    for j in 0..(r + m) {
                        w[i][j] -= q * w[p][j];
                    }
                }
            }
        }
    }
    (0..m)
        .filter(|i| !pivot_rows.contains(i))
        .map(|i| {
            w[i][r..]
                .iter()
                .map(|&x| i64::try_from(x).expect("kernel coefficient overflow"))
                .collect()
        })
        .collect()
}

/// Rank of an integer matrix (rows of equal length), computed exactly.
pub(crate) fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let m = rows.len();
    if m == 0 {
        return 0;
    }
    m - integer_kernel(rows).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormalize_drops_dependent() {
        let vecs = vec![
            vec![1.0, 1.0, 0.0],
            vec![2.0, 2.0, 0.0],
            vec![0.0, 1.0, 1.0],
        ];
        let basis = orthonormalize(&vecs);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!((norm(b) - 1.0).abs() < 1e-12);
        }
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_handles_zero_vector() {
        let basis = orthonormalize(&[vec![0.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(basis.len(), 1);
    }

    #[test]
    fn integer_kernel_of_zero_map_is_everything() {
        let rows = vec![vec![0, 0], vec![0, 0], vec![0, 0]];
        assert_eq!(integer_kernel(&rows).len(), 3);
        assert_eq!(integer_rank(&rows), 0);
    }

    #[test]
    fn integer_kernel_simple_relation() {
        // rows 3, 1, 2 over Z^1: kernel is rank 2, e.g. (1,-3,0),(0,2,-1).
        let rows = vec![vec![3], vec![1], vec![2]];
        let ker = integer_kernel(&rows);
        assert_eq!(ker.len(), 2);
        for a in &ker {
            let s: i64 = a[0] * 3 + a[1] + a[2] * 2;
            assert_eq!(s, 0);
        }
        assert_eq!(integer_rank(&rows), 1);
    }

    #[test]
    fn integer_rank_full() {
        let rows = vec![vec![2, 0], vec![0, 3], vec![4, 6]];
        assert_eq!(integer_rank(&rows), 2);
    }
}
