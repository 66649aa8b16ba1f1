use super::*;
use crate::evalviz::{BoundingBox, Keypoint};
use crate::gridgeom::{GridGeometry, Rational};
use crate::imgutil::GrayF32;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_from(h: usize, w: usize, dim: usize, data: Vec<f64>) -> FeatureGrid<f64> {
    let geom = GridGeometry::new(8, 17, Rational::from_integer(8)).unwrap();
    FeatureGrid::new(h, w, dim, geom, data, "g").unwrap()
}

fn random_grid(rng: &mut ChaCha8Rng, h: usize, w: usize, dim: usize) -> FeatureGrid<f64> {
    let data = (0..h * w * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    grid_from(h, w, dim, data)
}

/// Independent, deliberately naive energy evaluator: builds the explicit
/// edge list and loops features per dimension.
fn naive_energy(
    src: &FeatureGrid<f64>,
    tgt: &FeatureGrid<f64>,
    flow: &FlowField,
    beta: f64,
) -> (f64, f64, f64) {
    let mut data = 0.0;
    for i in 0..src.height() {
        for j in 0..src.width() {
            let (dy, dx) = flow.displacement(i, j);
            let (ti, tj) = ((i as i64 + dy as i64) as usize, (j as i64 + dx as i64) as usize);
            let mut sq = 0.0;
            for d in 0..src.dim() {
                let diff = src.descriptor(i, j)[d] - tgt.descriptor(ti, tj)[d];
                sq += diff * diff;
            }
            data += sq.sqrt();
        }
    }
    let mut edges = Vec::new();
    for i in 0..src.height() {
        for j in 0..src.width() {
            if i + 1 < src.height() {
                edges.push(((i, j), (i + 1, j)));
            }
            if j + 1 < src.width() {
                edges.push(((i, j), (i, j + 1)));
            }
        }
    }
    let mut smooth = 0.0;
    for ((ai, aj), (bi, bj)) in edges {
        let (ay, ax) = flow.displacement(ai, aj);
        let (by, bx) = flow.displacement(bi, bj);
        smooth += ((ay - by) as f64).powi(2) + ((ax - bx) as f64).powi(2);
    }
    (data, smooth, data + beta * smooth)
}

#[test]
fn identity_flow_zero_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_grid(&mut rng, 4, 5, 3);
    let flow = FlowField::zero(4, 5, 2);
    let e = flow_energy(&g, &g, &flow, 0.01).unwrap();
    assert_eq!(e.data_term, 0.0);
    assert_eq!(e.smoothness_term, 0.0);
    assert_eq!(e.total, 0.0);
}

#[test]
fn orthonormal_swap_example() {
    // f_s = [a, b], f_t = [b, a] with a, b orthonormal; w = ((0,+1),(0,−1))
    let src = grid_from(1, 2, 2, vec![1.0, 0.0, 0.0, 1.0]);
    let tgt = grid_from(1, 2, 2, vec![0.0, 1.0, 1.0, 0.0]);
    let flow = FlowField::from_vec(1, 2, 1, vec![(0, 1), (0, -1)]).unwrap();
    let beta = 0.25;
    let e = flow_energy(&src, &tgt, &flow, beta).unwrap();
    assert_eq!(e.data_term, 0.0);
    assert_eq!(e.smoothness_term, 4.0);
    assert_eq!(e.total, 4.0 * beta);
}

#[test]
fn energy_matches_naive_evaluator() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let (h, w) = (rng.gen_range(1..5), rng.gen_range(1..5));
        let src = random_grid(&mut rng, h, w, 4);
        let tgt = random_grid(&mut rng, h, w, 4);
        let flow = random_flow(&mut rng, h, w, 1);
        let beta = rng.gen_range(0.0..2.0);
        let e = flow_energy(&src, &tgt, &flow, beta).unwrap();
        let (data, smooth, total) = naive_energy(&src, &tgt, &flow, beta);
        assert!((e.data_term - data).abs() < 1e-12);
        assert_eq!(e.smoothness_term, smooth);
        assert!((e.total - total).abs() < 1e-12);
        // stored total is exactly data + β·smooth
        assert_eq!(e.total, e.data_term + beta * e.smoothness_term);
    }
}

fn random_flow(rng: &mut ChaCha8Rng, h: usize, w: usize, radius: i16) -> FlowField {
    let d = (0..h * w)
        .map(|q| {
            let (i, j) = (q / w, q % w);
            loop {
                let dy = rng.gen_range(-radius..=radius);
                let dx = rng.gen_range(-radius..=radius);
                let (ti, tj) = (i as i64 + dy as i64, j as i64 + dx as i64);
                if ti >= 0 && tj >= 0 && ti < h as i64 && tj < w as i64 {
                    return (dy, dx);
                }
            }
        })
        .collect();
    FlowField::from_vec(h, w, radius as u32, d).unwrap()
}

#[test]
fn energy_invariant_under_transposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (h, w) = (rng.gen_range(1..5), rng.gen_range(1..5));
        let src = random_grid(&mut rng, h, w, 3);
        let tgt = random_grid(&mut rng, h, w, 3);
        let flow = random_flow(&mut rng, h, w, 1);
        let beta = 0.7;

        let transpose_grid = |g: &FeatureGrid<f64>| {
            FeatureGrid::from_fn(w, h, 3, *g.geometry(), "t", |i, j| {
                g.descriptor(j, i).to_vec()
            })
            .unwrap()
        };
        let td: Vec<(i16, i16)> = (0..w * h)
            .map(|q| {
                let (i, j) = (q / h, q % h);
                let (dy, dx) = flow.displacement(j, i);
                (dx, dy)
            })
            .collect();
        let tflow = FlowField::from_vec(w, h, flow.label_radius(), td).unwrap();

        let a = flow_energy(&src, &tgt, &flow, beta).unwrap();
        let b = flow_energy(&transpose_grid(&src), &transpose_grid(&tgt), &tflow, beta).unwrap();
        assert!((a.total - b.total).abs() <= 1e-12 * a.total.abs().max(1.0));
    }
}

#[test]
fn flow_field_invariants_enforced() {
    assert!(FlowField::from_vec(2, 2, 1, vec![(0, 0); 3]).is_err());
    // exceeds radius
    assert!(FlowField::from_vec(2, 2, 1, vec![(0, 0), (0, 0), (0, 0), (2, 0)]).is_err());
    // leaves the grid
    assert!(FlowField::from_vec(2, 2, 1, vec![(-1, 0), (0, 0), (0, 0), (0, 0)]).is_err());
}

// ---- BP against exact oracles -------------------------------------------

/// Exact chain optimum by dynamic programming (Viterbi); the MRF on a 1×N
/// grid is a chain, so DP is exact. The selected assignment is re-evaluated
/// with `flow_energy`.
fn dp_chain(
    src: &FeatureGrid<f64>,
    tgt: &FeatureGrid<f64>,
    config: &FlowConfig,
) -> (FlowField, EnergyBreakdown<f64>) {
    assert_eq!(src.height(), 1);
    let n = src.width();
    let r = config.label_radius as i64;
    let labels = |j: usize| -> Vec<i64> {
        (-r..=r)
            .filter(|dx| {
                let t = j as i64 + dx;
                t >= 0 && t < n as i64
            })
            .collect()
    };
    let unary = |j: usize, dx: i64| -> f64 {
        feature_distance(src.descriptor(0, j), tgt.descriptor(0, (j as i64 + dx) as usize))
    };

    let mut cost: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(n);
    let l0 = labels(0);
    cost.push(l0.iter().map(|&dx| unary(0, dx)).collect());
    back.push(vec![0; l0.len()]);
    for j in 1..n {
        let prev_labels = labels(j - 1);
        let cur_labels = labels(j);
        let mut row = Vec::with_capacity(cur_labels.len());
        let mut arg = Vec::with_capacity(cur_labels.len());
        for &dx in &cur_labels {
            let mut best = f64::INFINITY;
            let mut best_k = 0;
            for (k, &pdx) in prev_labels.iter().enumerate() {
                let pair = config.beta * ((dx - pdx) as f64).powi(2);
                let v = cost[j - 1][k] + pair;
                if v < best {
                    best = v;
                    best_k = k;
                }
            }
            row.push(best + unary(j, dx));
            arg.push(best_k);
        }
        cost.push(row);
        back.push(arg);
    }
    let last_labels = labels(n - 1);
    let mut k = 0;
    for idx in 1..last_labels.len() {
        if cost[n - 1][idx] < cost[n - 1][k] {
            k = idx;
        }
    }
    let mut picked = vec![0i64; n];
    for j in (0..n).rev() {
        picked[j] = labels(j)[k];
        k = back[j][k];
    }
    let d: Vec<(i16, i16)> = picked.iter().map(|&dx| (0i16, dx as i16)).collect();
    let flow = FlowField::from_vec(1, n, config.label_radius, d).unwrap();
    let energy = flow_energy(src, tgt, &flow, config.beta).unwrap();
    (flow, energy)
}

/// Exact 2×2 optimum by exhaustive enumeration of all label assignments.
fn exhaustive_2x2(
    src: &FeatureGrid<f64>,
    tgt: &FeatureGrid<f64>,
    config: &FlowConfig,
) -> EnergyBreakdown<f64> {
    let r = config.label_radius as i16;
    let cell_labels = |i: usize, j: usize| -> Vec<(i16, i16)> {
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let (ti, tj) = (i as i64 + dy as i64, j as i64 + dx as i64);
                if ti >= 0 && tj >= 0 && ti < 2 && tj < 2 {
                    out.push((dy, dx));
                }
            }
        }
        out
    };
    let lists: Vec<Vec<(i16, i16)>> = vec![
        cell_labels(0, 0),
        cell_labels(0, 1),
        cell_labels(1, 0),
        cell_labels(1, 1),
    ];
    let mut best: Option<EnergyBreakdown<f64>> = None;
    for &a in &lists[0] {
        for &b in &lists[1] {
            for &c in &lists[2] {
                for &d in &lists[3] {
                    let flow = FlowField::from_vec(2, 2, config.label_radius, vec![a, b, c, d])
                        .unwrap();
                    let e = flow_energy(src, tgt, &flow, config.beta).unwrap();
                    if best.is_none_or(|cur| e.total < cur.total) {
                        best = Some(e);
                    }
                }
            }
        }
    }
    best.unwrap()
}

#[test]
fn bp_identity_returns_zero_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let g = random_grid(&mut rng, 4, 4, 4);
        let config = FlowConfig {
            beta: 0.01,
            label_radius: 2,
            bp_iterations: 10,
            damping: 0.5,
        };
        let (flow, e) = bp_align(&g, &g, &config).unwrap();
        assert!(flow.is_zero());
        assert_eq!(e.total, 0.0);
    }
}

#[test]
fn bp_matches_chain_dp() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..40 {
        let n = rng.gen_range(2..=12);
        let src = random_grid(&mut rng, 1, n, 4);
        let tgt = random_grid(&mut rng, 1, n, 4);
        let config = FlowConfig {
            beta: rng.gen_range(0.001..0.5),
            label_radius: rng.gen_range(1..=2),
            bp_iterations: (n + 2) as u32,
            damping: 0.0,
        };
        let (_, bp_e) = bp_align(&src, &tgt, &config).unwrap();
        let (_, dp_e) = dp_chain(&src, &tgt, &config);
        assert_eq!(bp_e.total, dp_e.total, "trial {trial}, n={n}");
    }
}

#[test]
fn bp_matches_exhaustive_on_2x2() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..30 {
        let src = random_grid(&mut rng, 2, 2, 3);
        let tgt = random_grid(&mut rng, 2, 2, 3);
        let config = FlowConfig {
            beta: rng.gen_range(0.001..0.5),
            label_radius: 1,
            bp_iterations: 60,
            damping: 0.5,
        };
        let (_, bp_e) = bp_align(&src, &tgt, &config).unwrap();
        let best = exhaustive_2x2(&src, &tgt, &config);
        assert_eq!(bp_e.total, best.total, "trial {trial}");
    }
}

#[test]
fn bp_energy_is_self_consistent_and_bounded_by_zero_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..15 {
        let (h, w) = (rng.gen_range(1..5), rng.gen_range(2..5));
        let src = random_grid(&mut rng, h, w, 4);
        let tgt = random_grid(&mut rng, h, w, 4);
        let config = FlowConfig {
            beta: 0.05,
            label_radius: 1,
            bp_iterations: 30,
            damping: 0.5,
        };
        let (flow, e) = bp_align(&src, &tgt, &config).unwrap();
        let again = flow_energy(&src, &tgt, &flow, config.beta).unwrap();
        assert_eq!(e, again);
        let zero = flow_energy(&src, &tgt, &FlowField::zero(h, w, 1), config.beta).unwrap();
        assert!(e.total <= zero.total);
    }
}

#[test]
fn bp_result_is_identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let src = random_grid(&mut rng, 4, 5, 6);
    let tgt = random_grid(&mut rng, 4, 5, 6);
    let config = FlowConfig {
        beta: 0.02,
        label_radius: 2,
        bp_iterations: 25,
        damping: 0.5,
    };
    let mut results = Vec::new();
    for threads in [1usize, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        results.push(pool.install(|| bp_align(&src, &tgt, &config).unwrap()));
    }
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
}

#[test]
fn bp_rejects_mismatched_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a = random_grid(&mut rng, 2, 3, 4);
    let b = random_grid(&mut rng, 3, 2, 4);
    assert!(bp_align(&a, &b, &FlowConfig::default()).is_err());
}

// ---- warping and transfer -------------------------------------------------

fn smooth_image(seed: u64, w: u32, h: u32) -> GrayF32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut waves = Vec::new();
    for _ in 0..8 {
        waves.push((
            rng.gen_range(0.02..0.2),
            rng.gen_range(0.02..0.2),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(10.0..40.0),
        ));
    }
    GrayF32::from_fn(w, h, |x, y| {
        let mut v = 128.0;
        for &(fx, fy, ph, amp) in &waves {
            v += amp * (fx * x as f64 + fy * y as f64 + ph).sin();
        }
        image::Luma([v as f32])
    })
}

#[test]
fn warp_zero_flow_is_identity() {
    let img = smooth_image(20, 40, 32);
    let geom = GridGeometry::new(8, 8, Rational::from_integer(4)).unwrap();
    let flow = FlowField::zero(4, 5, 2);
    let out = warp_gray(&img, &flow, &geom);
    assert_eq!(img.as_raw(), out.as_raw());

    let mut rgb = image::RgbImage::new(40, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for px in rgb.pixels_mut() {
        *px = image::Rgb([rng.gen(), rng.gen(), rng.gen()]);
    }
    let out = warp_rgb(&rgb, &flow, &geom);
    assert_eq!(rgb, out);
}

#[test]
fn warp_constant_flow_recovers_translated_pair() {
    // tgt(x) = src(x − s): warping tgt with a constant (+1 cell) flow gives
    // out(x) = tgt(x + s) = src(x) away from the boundary band
    let stride = 8u32;
    let src_img = smooth_image(22, 72, 48);
    let tgt_img = GrayF32::from_fn(72, 48, |x, y| {
        image::Luma([crate::imgutil::sample_clamped(
            &src_img,
            x as i64 - stride as i64,
            y as i64,
        )])
    });
    let geom = GridGeometry::new(stride, 8, Rational::from_integer(4)).unwrap();
    // +1 cell everywhere except the last column, which must stay in-bounds
    let d: Vec<(i16, i16)> = (0..54)
        .map(|q| if q % 9 == 8 { (0, 0) } else { (0, 1) })
        .collect();
    let flow = FlowField::from_vec(6, 9, 1, d).unwrap();
    let out = warp_gray(&tgt_img, &flow, &geom);
    // interior: the pixel flow equals one full cell left of the blend band
    // between the last two cell centers
    let x_hi = 4 + 7 * stride - 1; // center of column 7
    let mut mse = 0.0;
    let mut count = 0usize;
    for y in stride..(48 - stride) {
        for x in stride..x_hi {
            let a = src_img.get_pixel(x, y).0[0] as f64;
            let b = out.get_pixel(x, y).0[0] as f64;
            mse += (a - b) * (a - b);
            count += 1;
        }
    }
    mse /= count as f64;
    let psnr = 10.0 * (255.0f64 * 255.0 / mse.max(1e-12)).log10();
    assert!(psnr > 30.0, "psnr {psnr}");
}

#[test]
fn warp_shifts_stripes_by_stride() {
    let stride = 8u32;
    // vertical stripes, 16px period, aligned to cells
    let img = GrayF32::from_fn(64, 32, |x, _| {
        image::Luma([if (x / 16) % 2 == 0 { 0.0 } else { 200.0 }])
    });
    let geom = GridGeometry::new(stride, 8, Rational::from_integer(4)).unwrap();
    let d: Vec<(i16, i16)> = (0..32)
        .map(|q| if q % 8 == 7 { (0, 0) } else { (0, 1) })
        .collect();
    let flow = FlowField::from_vec(4, 8, 1, d).unwrap();
    let out = warp_gray(&img, &flow, &geom);
    // up to the center of column 6 the upsampled flow is exactly one cell
    let x_hi = 4 + 6 * stride;
    for y in 0..32 {
        for x in 0..=x_hi {
            assert_eq!(
                out.get_pixel(x, y).0[0],
                img.get_pixel(x + stride, y).0[0],
                "({x},{y})"
            );
        }
    }
}

#[test]
fn transfer_basics() {
    let geom = GridGeometry::new(8, 8, Rational::from_integer(4)).unwrap();
    let mut kps = KeypointSet::new(
        "a",
        BoundingBox {
            x: 0.0,
            y: 0.0,
            w: 64.0,
            h: 64.0,
        },
    );
    kps.insert("nose", Keypoint { x: 20.0, y: 28.0, visible: true });
    kps.insert("tail", Keypoint { x: 5.0, y: 6.0, visible: false });

    let zero = FlowField::zero(8, 8, 2);
    assert_eq!(transfer_keypoints(&kps, &zero, &geom), kps);

    // +1 row everywhere except the last row; the keypoints sit well inside
    let d: Vec<(i16, i16)> = (0..64)
        .map(|q| if q / 8 == 7 { (0, 0) } else { (1, 0) })
        .collect();
    let shifted = FlowField::from_vec(8, 8, 1, d).unwrap();
    let moved = transfer_keypoints(&kps, &shifted, &geom);
    let nose = moved.points["nose"];
    assert_eq!((nose.x, nose.y), (20.0, 36.0));
    // invisible keypoints stay put
    let tail = moved.points["tail"];
    assert_eq!((tail.x, tail.y), (5.0, 6.0));
}

#[test]
fn transfer_recovers_known_translation() {
    use crate::descriptors::{dense_descriptors, DenseDescriptorConfig};
    let stride = 8i64;
    let src_img = smooth_image(25, 96, 64);
    // target = source shifted one cell right
    let tgt_img = GrayF32::from_fn(96, 64, |x, y| {
        image::Luma([crate::imgutil::sample_clamped(&src_img, x as i64 - stride, y as i64)])
    });
    let desc = DenseDescriptorConfig {
        grid_stride: stride as u32,
        radius: 8,
        spatial_bins: 4,
        orientation_bins: 8,
    };
    let src = dense_descriptors(&src_img, &desc).unwrap().convert::<f64>();
    let tgt = dense_descriptors(&tgt_img, &desc).unwrap().convert::<f64>();
    let config = FlowConfig {
        beta: 0.02,
        label_radius: 2,
        bp_iterations: 30,
        damping: 0.5,
    };
    let (flow, _) = bp_align(&src, &tgt, &config).unwrap();

    let mut kps = KeypointSet::new(
        "src",
        BoundingBox { x: 0.0, y: 0.0, w: 96.0, h: 64.0 },
    );
    for (i, (x, y)) in [(24.0, 24.0), (40.0, 32.0), (56.0, 40.0)].iter().enumerate() {
        kps.insert(format!("p{i}"), Keypoint { x: *x, y: *y, visible: true });
    }
    let moved = transfer_keypoints(&kps, &flow, src.geometry());
    for (name, kp) in &moved.points {
        let truth = (kps.points[name].x + stride as f64, kps.points[name].y);
        let err = ((kp.x - truth.0).powi(2) + (kp.y - truth.1).powi(2)).sqrt();
        assert!(err <= 0.5 * stride as f64, "{name}: err {err}");
    }
}

#[test]
fn ranking_and_aggregation() {
    let e = |s: f64| EnergyBreakdown::<f64> {
        data_term: 9.0,
        smoothness_term: s,
        total: 0.0,
    };
    // zero-flow (smoothness 0) ranks first
    let order = rank_by_deformation(&[e(1.0), e(0.0), e(2.0)]).unwrap();
    assert_eq!(order, vec![1, 0, 2]);
    let order = rank_by_deformation(&[e(1.0), e(2.0)]).unwrap();
    assert_eq!(order, vec![0, 1]);
    assert!(rank_by_deformation::<f64>(&[]).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let values: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..10.0)).collect();
    let list: Vec<EnergyBreakdown<f64>> = values.iter().map(|&s| e(s)).collect();
    let order = rank_by_deformation(&list).unwrap();
    let mut expect: Vec<usize> = (0..20).collect();
    expect.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    assert_eq!(order, expect);
}

#[test]
fn median_aggregation_rules() {
    let bbox = BoundingBox {
        x: 0.0,
        y: 0.0,
        w: 100.0,
        h: 100.0,
    };
    let mk = |x: f64, visible: bool| {
        let mut s = KeypointSet::new("t", bbox);
        s.insert("p", Keypoint { x, y: 2.0 * x, visible });
        s
    };

    // identical predictions → that prediction
    let same = vec![mk(7.0, true); 3];
    let agg = aggregate_median(&same, 5).unwrap();
    assert_eq!(agg.points["p"], Keypoint { x: 7.0, y: 14.0, visible: true });

    // odd count: median of {0,1,2,4,10} is 2
    let sets: Vec<KeypointSet> = [0.0, 1.0, 2.0, 4.0, 10.0].iter().map(|&x| mk(x, true)).collect();
    let agg = aggregate_median(&sets, 5).unwrap();
    assert_eq!(agg.points["p"].x, 2.0);

    // even count: {1,2,3,10} → 2.5
    let sets: Vec<KeypointSet> = [1.0, 2.0, 3.0, 10.0].iter().map(|&x| mk(x, true)).collect();
    let agg = aggregate_median(&sets, 5).unwrap();
    assert_eq!(agg.points["p"].x, 2.5);

    // only the first top_n visible sets count; invisible sets are skipped
    let sets = vec![mk(1.0, false), mk(5.0, true), mk(9.0, true), mk(100.0, true)];
    let agg = aggregate_median(&sets, 2).unwrap();
    assert_eq!(agg.points["p"].x, 7.0);

    // visible nowhere → not visible
    let sets = vec![mk(1.0, false), mk(2.0, false)];
    let agg = aggregate_median(&sets, 5).unwrap();
    assert!(!agg.points["p"].visible);
    assert!(aggregate_median(&[], 5).is_err());
}

#[test]
fn flow_file_roundtrip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.dcfw");
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let flow = random_flow(&mut rng, 3, 4, 2);
    let energy = EnergyBreakdown::new(12.5, 3.25, 0.003);
    write_flow(&flow, &energy, &path).unwrap();
    let (back_flow, back_energy) = read_flow(&path).unwrap();
    assert_eq!(flow, back_flow);
    assert_eq!(energy, back_energy);

    let bad = dir.path().join("bad.dcfw");
    std::fs::write(&bad, b"XXXX").unwrap();
    assert!(matches!(read_flow(&bad), Err(crate::error::Error::BadMagic { .. })));

    let trunc = dir.path().join("trunc.dcfw");
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&trunc, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(read_flow(&trunc), Err(crate::error::Error::Truncated { .. })));
}
