//! Generalized squared-Euclidean distance transforms (lower-envelope
//! algorithm), the message kernel of quadratic-pairwise min-sum BP:
//! `values[q] = min_p costs[p] + weight·‖q − p‖²` in O(n).

use crate::scalar::Scalar;

/// 1D transform. Returns per-position minima and the attaining source index
/// (smallest on ties). `weight = 0` degenerates to the global minimum.
pub fn dt1d_quadratic<S: Scalar>(costs: &[S], weight: S) -> (Vec<S>, Vec<usize>) {
    let n = costs.len();
    assert!(n >= 1, "dt1d needs at least one position");
    debug_assert!(costs.iter().all(|c| c.is_finite()), "dt1d costs must be finite");

    if weight <= S::zero() {
        let mut best = 0;
        for p in 1..n {
            if costs[p] < costs[best] {
                best = p;
            }
        }
        return (vec![costs[best]; n], vec![best; n]);
    }

    let pos = |p: usize| S::from_usize(p).expect("grid index fits scalar");
    // lower envelope: v = parabola sites, z = interval boundaries
    let mut v = vec![0usize; n];
    let mut z = vec![S::zero(); n + 1];
    let mut k = 0usize;
    z[0] = S::neg_infinity();
    z[1] = S::infinity();

    let intersect = |q: usize, p: usize| -> S {
        let (fq, fp) = (costs[q], costs[p]);
        let (xq, xp) = (pos(q), pos(p));
        ((fq + weight * xq * xq) - (fp + weight * xp * xp))
            / (S::from_f64_c(2.0) * weight * (xq - xp))
    };

    for q in 1..n {
        let mut s = intersect(q, v[k]);
        while k > 0 && s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = S::infinity();
    }

    let mut values = vec![S::zero(); n];
    let mut argmin = vec![0usize; n];
    let mut k = 0usize;
    for q in 0..n {
        let xq = pos(q);
        while z[k + 1] < xq {
            k += 1;
        }
        let p = v[k];
        let d = xq - pos(p);
        values[q] = costs[p] + weight * d * d;
        argmin[q] = p;
    }
    (values, argmin)
}

/// 2D transform over a row-major `rows × cols` lattice, by separable 1D
/// passes (rows, then columns). Argmins are `(row, col)` source positions.
pub fn dt2d_quadratic<S: Scalar>(
    costs: &[S],
    rows: usize,
    cols: usize,
    weight: S,
) -> (Vec<S>, Vec<(usize, usize)>) {
    assert_eq!(costs.len(), rows * cols, "dt2d shape mismatch");
    assert!(rows >= 1 && cols >= 1);

    // pass 1: along each row; remember the best source column per position
    let mut row_vals = vec![S::zero(); rows * cols];
    let mut row_arg = vec![0usize; rows * cols];
    for r in 0..rows {
        let (vals, arg) = dt1d_quadratic(&costs[r * cols..(r + 1) * cols], weight);
        row_vals[r * cols..(r + 1) * cols].copy_from_slice(&vals);
        row_arg[r * cols..(r + 1) * cols].copy_from_slice(&arg);
    }

    // pass 2: along each column of the row-transformed costs
    let mut values = vec![S::zero(); rows * cols];
    let mut argmin = vec![(0usize, 0usize); rows * cols];
    let mut col_buf = vec![S::zero(); rows];
    for c in 0..cols {
        for r in 0..rows {
            col_buf[r] = row_vals[r * cols + c];
        }
        let (vals, arg) = dt1d_quadratic(&col_buf, weight);
        for r in 0..rows {
            let src_row = arg[r];
            values[r * cols + c] = vals[r];
            argmin[r * cols + c] = (src_row, row_arg[src_row * cols + c]);
        }
    }
    (values, argmin)
}
