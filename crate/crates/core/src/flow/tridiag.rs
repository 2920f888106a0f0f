//! Thomas algorithm for tridiagonal systems.

use alloc::vec::Vec;

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place of `rhs`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting, so the matrix should be
/// diagonally dominant. Returns `false` on a zero pivot.
pub(crate) fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> bool {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return true;
    }
    let mut c = Vec::with_capacity(n);
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return false;
    }
    c.push(upper[0] / pivot);
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 {
            return false;
        }
        c.push(upper[i] / pivot);
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= c[i] * next;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_small_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1, 0, 1] → x = [1, 1, 1]
        let lower = vec![0.0, -1.0, -1.0];
        let diag = vec![2.0, 2.0, 2.0];
        let upper = vec![-1.0, -1.0, 0.0];
        let mut rhs = vec![1.0, 0.0, 1.0];
        assert!(solve(&lower, &diag, &upper, &mut rhs));
        for x in rhs {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }
}
