//! Min-sum (max-product) belief propagation on the 4-connected grid with
//! squared-Euclidean pairwise costs, messages computed by the 2D distance
//! transform over the label lattice.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gridgeom::FeatureGrid;
use crate::scalar::Scalar;

use super::dt::dt2d_quadratic;
use super::{feature_distance, flow_energy, EnergyBreakdown, FlowConfig, FlowField};

/// Cost assigned to labels whose target cell falls outside the grid; large
/// enough to never win against any real data cost at desk scale.
const FORBIDDEN: f64 = 1e9;

/// Incoming-message directions at a node: the sender sits above, below,
/// left of, or right of the receiver. `opposite` pairs the reverse edge.
const DIRS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

fn opposite(dir: usize) -> usize {
    dir ^ 1
}

/// Aligns `src` to `tgt` by loopy BP over displacement labels
/// `‖w‖∞ ≤ label_radius` intersected with in-bounds targets.
///
/// Synchronous damped sweeps; after `bp_iterations` each cell takes the
/// label minimizing its belief (ties: smallest `‖w‖₂²`, then lexicographic
/// `(dy, dx)`). The returned energy is recomputed exactly by [`flow_energy`];
/// if the decoded flow scores worse than the zero flow, the zero flow is
/// returned instead.
pub fn bp_align<S: Scalar>(
    src: &FeatureGrid<S>,
    tgt: &FeatureGrid<S>,
    config: &FlowConfig,
) -> Result<(FlowField, EnergyBreakdown<S>)> {
    config.validate()?;
    if src.height() != tgt.height() || src.width() != tgt.width() || src.dim() != tgt.dim() {
        return Err(Error::mismatch(format!(
            "grids {}×{}×{} vs {}×{}×{}",
            src.height(),
            src.width(),
            src.dim(),
            tgt.height(),
            tgt.width(),
            tgt.dim()
        )));
    }
    let (h, w) = (src.height(), src.width());
    let r = config.label_radius as i64;
    let side = (2 * r + 1) as usize;
    let nl = side * side;
    let n = h * w;
    let beta = S::from_f64_c(config.beta);
    let damping = S::from_f64_c(config.damping);
    let keep = S::one() - damping;
    let big = S::from_f64_c(FORBIDDEN);

    // unary data costs; forbidden labels keep the sentinel
    let mut unary = vec![big; n * nl];
    unary
        .par_chunks_mut(nl)
        .enumerate()
        .for_each(|(q, costs)| {
            let (i, j) = (q / w, q % w);
            for (l, cost) in costs.iter_mut().enumerate() {
                let dy = (l / side) as i64 - r;
                let dx = (l % side) as i64 - r;
                let (ti, tj) = (i as i64 + dy, j as i64 + dx);
                if ti >= 0 && tj >= 0 && ti < h as i64 && tj < w as i64 {
                    *cost = feature_distance(
                        src.descriptor(i, j),
                        tgt.descriptor(ti as usize, tj as usize),
                    );
                }
            }
        });

    // messages indexed by receiver and incoming direction
    let mut msgs: Vec<Vec<S>> = (0..4).map(|_| vec![S::zero(); n * nl]).collect();
    let mut next: Vec<Vec<S>> = (0..4).map(|_| vec![S::zero(); n * nl]).collect();

    for _ in 0..config.bp_iterations {
        for dir in 0..4 {
            let (di, dj) = DIRS[dir];
            let exclude = opposite(dir);
            let msgs_ref = &msgs;
            let unary_ref = &unary;
            next[dir]
                .par_chunks_mut(nl)
                .enumerate()
                .for_each(|(q, out)| {
                    let (i, j) = ((q / w) as i64, (q % w) as i64);
                    let (pi, pj) = (i + di, j + dj);
                    if pi < 0 || pj < 0 || pi >= h as i64 || pj >= w as i64 {
                        out.fill(S::zero());
                        return;
                    }
                    let p = (pi as usize) * w + pj as usize;
                    let mut hvec = vec![S::zero(); nl];
                    hvec.copy_from_slice(&unary_ref[p * nl..(p + 1) * nl]);
                    for (d, buf) in msgs_ref.iter().enumerate() {
                        if d == exclude {
                            continue;
                        }
                        for (hv, &m) in hvec.iter_mut().zip(&buf[p * nl..(p + 1) * nl]) {
                            *hv += m;
                        }
                    }
                    let (vals, _) = dt2d_quadratic(&hvec, side, side, beta);
                    let old = &msgs_ref[dir][q * nl..(q + 1) * nl];
                    let mut lo = S::infinity();
                    for (slot, (v, &o)) in out.iter_mut().zip(vals.iter().zip(old)) {
                        *slot = keep * *v + damping * o;
                        if *slot < lo {
                            lo = *slot;
                        }
                    }
                    for slot in out.iter_mut() {
                        *slot -= lo;
                    }
                });
        }
        std::mem::swap(&mut msgs, &mut next);
    }

    // decode: per-cell belief argmin with deterministic tie-breaking
    let mut d: Vec<(i16, i16)> = vec![(0, 0); n];
    d.par_iter_mut().enumerate().for_each(|(q, out)| {
        let mut best_belief = S::infinity();
        let mut best_key = (i64::MAX, i64::MAX, i64::MAX);
        let mut best = (0i16, 0i16);
        for l in 0..nl {
            let dy = (l / side) as i64 - r;
            let dx = (l % side) as i64 - r;
            let mut b = unary[q * nl + l];
            if b >= big {
                continue;
            }
            for buf in &msgs {
                b += buf[q * nl + l];
            }
            let key = (dy * dy + dx * dx, dy, dx);
            if b < best_belief || (b == best_belief && key < best_key) {
                best_belief = b;
                best_key = key;
                best = (dy as i16, dx as i16);
            }
        }
        *out = best;
    });

    let flow = FlowField::from_vec(h, w, config.label_radius, d)?;
    let energy = flow_energy(src, tgt, &flow, beta)?;
    let zero = FlowField::zero(h, w, config.label_radius);
    let zero_energy = flow_energy(src, tgt, &zero, beta)?;
    if energy.total > zero_energy.total {
        return Ok((zero, zero_energy));
    }
    Ok((flow, energy))
}
