//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Oracles here are written independently of the library paths they check:
//! brute-force min-convolution, chain Viterbi, exhaustive enumeration, and
//! hand-evaluated metric cases.

use std::time::Instant;

use densecorr::descriptors::{dense_descriptors, DenseDescriptorConfig};
use densecorr::evalviz::{
    patch_reconstruction, pck, uniform_rf_baseline, BoundingBox, Keypoint, KeypointSet,
    PatchDatabase,
};
use densecorr::flow::{
    bp_align, dt1d_quadratic, dt2d_quadratic, flow_energy, transfer_keypoints, EnergyBreakdown,
    FlowConfig, FlowField,
};
use densecorr::gridgeom::{
    compose_prefixes, parse_arch_config, FeatureGrid, GridGeometry, Rational, REFERENCE_ARCH,
};
use densecorr::imgutil::GrayF32;
use densecorr::parts::{
    detector_score_map, fuse_with_prior, predict_keypoint, stack_neighborhood, svm_objective,
    train_svm, train_svm_seeded, DetectorConfig, LinearModel,
};
use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, name: &str, ok: bool, detail: &str, started: Instant) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!(
        "criterion {criterion:2} ({name}): {status} [{detail}] in {:.2?}",
        started.elapsed()
    );
}

fn random_grid(rng: &mut ChaCha8Rng, h: usize, w: usize, dim: usize) -> FeatureGrid<f64> {
    let geom = GridGeometry::new(8, 17, Rational::from_integer(8)).unwrap();
    let data = (0..h * w * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FeatureGrid::new(h, w, dim, geom, data, "g").unwrap()
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_geometry_reproduction() {
    let t = Instant::now();
    let layers = parse_arch_config(REFERENCE_ARCH).unwrap();
    let rows = compose_prefixes(&layers).unwrap();
    let lookup: std::collections::HashMap<&str, (u32, u32)> = rows
        .iter()
        .map(|(name, g)| (name.as_str(), (g.rf_size, g.stride)))
        .collect();
    let expected = [
        ("conv1", (11, 4)),
        ("conv2", (51, 8)),
        ("conv3", (99, 16)),
        ("conv4", (131, 16)),
        ("conv5", (163, 16)),
        ("pool5", (195, 32)),
    ];
    let ok = expected.iter().all(|&(name, rf_stride)| lookup[name] == rf_stride);
    report(1, "geometry reproduction", ok, "6 rows exact", t);
    assert!(ok);
}

#[test]
fn criterion_02_distance_transform_oracle() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD7);
    let mut max_rel = 0.0f64;

    for _ in 0..500 {
        let n = rng.gen_range(1..=64);
        let w = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let (vals, _) = dt1d_quadratic(&costs, w);
        for (q, val) in vals.iter().enumerate() {
            let brute = (0..n)
                .map(|p| costs[p] + w * (q as f64 - p as f64).powi(2))
                .fold(f64::INFINITY, f64::min);
            max_rel = max_rel.max((val - brute).abs() / brute.abs().max(1.0));
        }
    }
    for _ in 0..500 {
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=8);
        let w = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let costs: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..100.0)).collect();
        let (vals, _) = dt2d_quadratic(&costs, rows, cols, w);
        for qr in 0..rows {
            for qc in 0..cols {
                let mut brute = f64::INFINITY;
                for pr in 0..rows {
                    for pc in 0..cols {
                        let d2 =
                            (qr as f64 - pr as f64).powi(2) + (qc as f64 - pc as f64).powi(2);
                        brute = brute.min(costs[pr * cols + pc] + w * d2);
                    }
                }
                let got = vals[qr * cols + qc];
                max_rel = max_rel.max((got - brute).abs() / brute.abs().max(1.0));
            }
        }
    }
    let ok = max_rel <= 1e-9;
    report(
        2,
        "distance-transform oracle",
        ok,
        &format!("1000 instances, max rel err {max_rel:.2e}"),
        t,
    );
    assert!(ok);
}

/// Viterbi over the chain MRF: exact optimum for 1×N grids.
fn chain_dp_energy(
    src: &FeatureGrid<f64>,
    tgt: &FeatureGrid<f64>,
    config: &FlowConfig,
) -> EnergyBreakdown<f64> {
    let n = src.width();
    let r = config.label_radius as i64;
    let labels = |j: usize| -> Vec<i64> {
        (-r..=r)
            .filter(|dx| (0..n as i64).contains(&(j as i64 + dx)))
            .collect()
    };
    let unary = |j: usize, dx: i64| -> f64 {
        let a = src.descriptor(0, j);
        let b = tgt.descriptor(0, (j as i64 + dx) as usize);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut cost: Vec<Vec<f64>> = vec![labels(0).iter().map(|&dx| unary(0, dx)).collect()];
    let mut back: Vec<Vec<usize>> = vec![vec![0; labels(0).len()]];
    for j in 1..n {
        let prev = labels(j - 1);
        let mut row = Vec::new();
        let mut arg = Vec::new();
        for &dx in &labels(j) {
            let (mut best, mut best_k) = (f64::INFINITY, 0);
            for (k, &pdx) in prev.iter().enumerate() {
                let v = cost[j - 1][k] + config.beta * ((dx - pdx) as f64).powi(2);
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
    let mut k = (0..cost[n - 1].len())
        .min_by(|&a, &b| cost[n - 1][a].partial_cmp(&cost[n - 1][b]).unwrap())
        .unwrap();
    let mut d = vec![(0i16, 0i16); n];
    for j in (0..n).rev() {
        d[j] = (0, labels(j)[k] as i16);
        k = back[j][k];
    }
    let flow = FlowField::from_vec(1, n, config.label_radius, d).unwrap();
    flow_energy(src, tgt, &flow, config.beta).unwrap()
}

#[test]
fn criterion_03_bp_exact_on_chains() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=12);
        let dim = rng.gen_range(1..=8);
        let src = random_grid(&mut rng, 1, n, dim);
        let tgt = random_grid(&mut rng, 1, n, dim);
        let config = FlowConfig {
            beta: rng.gen_range(0.001..0.5),
            label_radius: rng.gen_range(1..=2),
            bp_iterations: (n + 2) as u32,
            damping: 0.0,
        };
        let (_, bp) = bp_align(&src, &tgt, &config).unwrap();
        let dp = chain_dp_energy(&src, &tgt, &config);
        if bp.total != dp.total {
            failures += 1;
        }
    }
    let ok = failures == 0;
    report(
        3,
        "BP exactness on chains",
        ok,
        &format!("200 instances, {failures} mismatches"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_04_bp_vs_exhaustive_2x2() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut failures = 0;
    for _ in 0..100 {
        let src = random_grid(&mut rng, 2, 2, 3);
        let tgt = random_grid(&mut rng, 2, 2, 3);
        let config = FlowConfig {
            beta: rng.gen_range(0.001..0.5),
            label_radius: 1,
            bp_iterations: 80,
            damping: 0.5,
        };
        let (_, bp) = bp_align(&src, &tgt, &config).unwrap();

        // exhaustive oracle over all assignments
        let cell_labels = |i: i64, j: i64| -> Vec<(i16, i16)> {
            let mut out = Vec::new();
            for dy in -1i16..=1 {
                for dx in -1i16..=1 {
                    let (ti, tj) = (i + dy as i64, j + dx as i64);
                    if (0..2).contains(&ti) && (0..2).contains(&tj) {
                        out.push((dy, dx));
                    }
                }
            }
            out
        };
        let mut best = f64::INFINITY;
        for &a in &cell_labels(0, 0) {
            for &b in &cell_labels(0, 1) {
                for &c in &cell_labels(1, 0) {
                    for &d in &cell_labels(1, 1) {
                        let flow =
                            FlowField::from_vec(2, 2, 1, vec![a, b, c, d]).unwrap();
                        let e = flow_energy(&src, &tgt, &flow, config.beta).unwrap();
                        if e.total < best {
                            best = e.total;
                        }
                    }
                }
            }
        }
        if bp.total != best {
            failures += 1;
        }
    }
    let ok = failures == 0;
    report(
        4,
        "BP vs exhaustive on 2×2",
        ok,
        &format!("100 instances, {failures} mismatches"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_05_identity_alignment() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut failures = 0;
    for _ in 0..50 {
        let (h, w) = (rng.gen_range(2..6), rng.gen_range(2..6));
        let g = random_grid(&mut rng, h, w, 4);
        let config = FlowConfig {
            beta: rng.gen_range(0.001..0.1),
            label_radius: rng.gen_range(1..=3),
            bp_iterations: 20,
            damping: 0.5,
        };
        let (flow, e) = bp_align(&g, &g, &config).unwrap();
        if !flow.is_zero() || e.total != 0.0 {
            failures += 1;
        }
    }
    let ok = failures == 0;
    report(
        5,
        "identity alignment",
        ok,
        &format!("50 grids, {failures} failures"),
        t,
    );
    assert!(ok);
}

/// Broadband but smooth test texture: white noise box-blurred twice.
/// Aperiodic local structure keeps patch matches unambiguous.
fn smooth_base_image(rng: &mut ChaCha8Rng, size: u32) -> GrayF32 {
    let n = size as usize;
    let mut buf: Vec<f32> = (0..n * n).map(|_| rng.gen_range(0.0f32..255.0)).collect();
    let mut tmp = vec![0f32; n * n];
    for _ in 0..2 {
        // horizontal then vertical 5-tap box blur, clamped at borders
        for y in 0..n {
            for x in 0..n {
                let mut acc = 0.0;
                for d in -2i64..=2 {
                    let xx = (x as i64 + d).clamp(0, n as i64 - 1) as usize;
                    acc += buf[y * n + xx];
                }
                tmp[y * n + x] = acc / 5.0;
            }
        }
        for y in 0..n {
            for x in 0..n {
                let mut acc = 0.0;
                for d in -2i64..=2 {
                    let yy = (y as i64 + d).clamp(0, n as i64 - 1) as usize;
                    acc += tmp[yy * n + x];
                }
                buf[y * n + x] = acc / 5.0;
            }
        }
    }
    GrayF32::from_vec(size, size, buf).unwrap()
}

#[test]
fn criterion_06_synthetic_correspondence_recovery() {
    let t = Instant::now();
    let size = 112u32;
    let desc = DenseDescriptorConfig {
        grid_stride: 8,
        radius: 8,
        spatial_bins: 4,
        orientation_bins: 8,
    };
    // β is scaled to the unit-norm descriptors used here (data distances in
    // [0, 2] per cell, an order of magnitude below conv-style features)
    let flow_config = FlowConfig {
        beta: 2e-2,
        label_radius: 2,
        bp_iterations: 60,
        damping: 0.5,
    };

    let mut truths = Vec::new();
    let mut preds = Vec::new();
    for pair in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x600 + pair);
        let base = smooth_base_image(&mut rng, size);

        // smooth deformation, max displacement ≤ label_radius·stride = 16px;
        // low spatial frequency keeps the warp locally near-translational
        let (ax, ay) = (rng.gen_range(6.0..11.0), rng.gen_range(6.0..11.0));
        let (fx, fy) = (rng.gen_range(0.2..0.4), rng.gen_range(0.2..0.4));
        let (px, py) = (
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let tau = std::f64::consts::TAU;
        let disp = |x: f64, y: f64| -> (f64, f64) {
            (
                ax * (tau * fx * y / size as f64 + px).sin(),
                ay * (tau * fy * x / size as f64 + py).sin(),
            )
        };
        // deformed(x) = base(x + d(x)), sampled bilinearly
        let deformed = GrayF32::from_fn(size, size, |x, y| {
            let (dx, dy) = disp(x as f64, y as f64);
            let (sx, sy) = (x as f64 + dx, y as f64 + dy);
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = ((sx - x0) as f32, (sy - y0) as f32);
            let get = |ix: i64, iy: i64| densecorr::imgutil::sample_clamped(&base, ix, iy);
            let (xi, yi) = (x0 as i64, y0 as i64);
            let v = (1.0 - fy) * ((1.0 - fx) * get(xi, yi) + fx * get(xi + 1, yi))
                + fy * ((1.0 - fx) * get(xi, yi + 1) + fx * get(xi + 1, yi + 1));
            image::Luma([v])
        });

        let grid_base = dense_descriptors(&base, &desc).unwrap().convert::<f64>();
        let grid_def = dense_descriptors(&deformed, &desc).unwrap().convert::<f64>();
        let (flow, _) = bp_align(&grid_def, &grid_base, &flow_config).unwrap();

        // keypoints live in the deformed frame; truth in the base frame
        let bbox = BoundingBox {
            x: 0.0,
            y: 0.0,
            w: size as f64,
            h: size as f64,
        };
        let id = format!("pair{pair}");
        let mut kps = KeypointSet::new(id.clone(), bbox);
        let mut truth = KeypointSet::new(id.clone(), bbox);
        for gy in 0..4 {
            for gx in 0..4 {
                let (x, y) = (26.0 + 20.0 * gx as f64, 26.0 + 20.0 * gy as f64);
                let name = format!("p{gy}{gx}");
                kps.insert(name.clone(), Keypoint { x, y, visible: true });
                let (dx, dy) = disp(x, y);
                truth.insert(
                    name,
                    Keypoint {
                        x: x + dx,
                        y: y + dy,
                        visible: true,
                    },
                );
            }
        }
        let pred = transfer_keypoints(&kps, &flow, grid_def.geometry());
        if std::env::var("DC_DEBUG").is_ok() {
            let mut errs: Vec<f64> = pred
                .points
                .iter()
                .map(|(name, p)| {
                    let t = truth.points[name];
                    ((p.x - t.x).powi(2) + (p.y - t.y).powi(2)).sqrt()
                })
                .collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            println!(
                "pair {pair}: amp=({ax:.1},{ay:.1}) f=({fx:.2},{fy:.2}) median err {:.1}px max {:.1}px",
                errs[errs.len() / 2],
                errs[errs.len() - 1]
            );
        }
        preds.push(pred);
        truths.push(truth);
    }

    let reportv = pck(&preds, &truths, 0.1).unwrap();
    let ok = reportv.mean >= 0.9;
    report(
        6,
        "synthetic correspondence recovery",
        ok,
        &format!("PCK@0.1 = {:.3} over 20 pairs", reportv.mean),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_07_svm_correctness() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut all_separable_ok = true;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for _ in 0..3 {
        pos.clear();
        neg.clear();
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (wx, wy) = (theta.cos(), theta.sin());
        while pos.len() < 40 || neg.len() < 40 {
            let x = rng.gen_range(-3.0..3.0);
            let y = rng.gen_range(-3.0..3.0);
            let m = wx * x + wy * y + 0.2;
            if m > 0.4 && pos.len() < 40 {
                pos.push(vec![x, y]);
            } else if m < -0.4 && neg.len() < 40 {
                neg.push(vec![x, y]);
            }
        }
        let model = train_svm(&pos, &neg, 1.0, "p").unwrap();
        all_separable_ok &= pos.iter().all(|x| model.margin(x) > 0.0)
            && neg.iter().all(|x| model.margin(x) < 0.0);
    }

    let objectives: Vec<f64> = (0..5)
        .map(|seed| {
            let m = train_svm_seeded(&pos, &neg, 0.5, "p", Some(seed)).unwrap();
            svm_objective(&m, &pos, &neg, 0.5)
        })
        .collect();
    let lo = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo.abs().max(1e-12);
    let ok = all_separable_ok && spread < 1e-5;
    report(
        7,
        "SVM correctness",
        ok,
        &format!("separable 100%: {all_separable_ok}, restart spread {spread:.2e}"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_08_detector_pipeline_property() {
    let t = Instant::now();
    let mut planted_hits = 0;
    let mut eta_zero_ok = true;
    let mut scale_ok = true;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x800 + seed);
        let geom = GridGeometry::new(16, 99, Rational::from_integer(17)).unwrap();
        let grid = FeatureGrid::from_fn(6, 6, 8, geom, "g", |_, _| {
            let mut v: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            v
        })
        .unwrap();
        let target = (rng.gen_range(0..6), rng.gen_range(0..6));
        let model = LinearModel {
            weights: stack_neighborhood(&grid, target, 3).unwrap(),
            bias: 0.0,
            class_label: "planted".to_string(),
        };

        let flat = DetectorConfig {
            sigma: 1e12,
            ..DetectorConfig::default()
        };
        let ((x, y), _) = predict_keypoint(&grid, &model, (0.0, 0.0), &flat).unwrap();
        if (x, y) == grid.geometry().rf_center_f64(target) {
            planted_hits += 1;
        }

        // η = 0 equals the detector-only argmax
        let scores = detector_score_map(&grid, &model, 3).unwrap();
        let eta0 = DetectorConfig {
            eta: 0.0,
            sigma: 7.0,
            ..DetectorConfig::default()
        };
        let ((ex, ey), _) = predict_keypoint(&grid, &model, (1e5, -3e4), &eta0).unwrap();
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        let best_center = grid.geometry().rf_center_f64((best / 6, best % 6));
        eta_zero_ok &= (ex, ey) == best_center;

        // argmax invariant to scaling all squashed scores by 0.5
        let cfg = DetectorConfig {
            sigma: 50.0,
            ..DetectorConfig::default()
        };
        let mu = grid.geometry().rf_center_f64((3, 2));
        let shape = (grid.geometry(), 6, 6);
        let (a, _) = fuse_with_prior(shape, &scores, mu, &cfg).unwrap();
        let halved: Vec<f64> = scores.iter().map(|s| s * 0.5).collect();
        let (b, _) = fuse_with_prior(shape, &halved, mu, &cfg).unwrap();
        scale_ok &= a == b;
    }
    let ok = planted_hits == 100 && eta_zero_ok && scale_ok;
    report(
        8,
        "detector pipeline property",
        ok,
        &format!("planted {planted_hits}/100, η=0 {eta_zero_ok}, scaling {scale_ok}"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_09_pck_metric_unit_suite() {
    let t = Instant::now();
    let bbox = BoundingBox {
        x: 0.0,
        y: 0.0,
        w: 100.0,
        h: 50.0,
    };
    let truth_at = |x: f64, y: f64, visible: bool| {
        let mut s = KeypointSet::new("a", bbox);
        s.insert("p", Keypoint { x, y, visible });
        s
    };
    // strict inequality at the threshold: 0.1·max(100,50) = 10
    let truth = vec![truth_at(50.0, 25.0, true)];
    let at = |d: f64| {
        let mut s = KeypointSet::new("a", bbox);
        s.insert("p", Keypoint { x: 50.0 + d, y: 25.0, visible: true });
        pck(&[s], &truth, 0.1).unwrap().mean
    };
    let boundary_ok = at(9.9) == 1.0 && at(10.0) == 0.0;

    // visibility exclusion
    let hidden_truth = vec![truth_at(50.0, 25.0, false)];
    let empty_pred = vec![KeypointSet::new("a", bbox)];
    let vis_report = pck(&empty_pred, &hidden_truth, 0.1).unwrap();
    let visibility_ok = vis_report.per_type.is_empty();

    // monotonicity in α
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let mut truths = Vec::new();
    let mut preds = Vec::new();
    for i in 0..10 {
        let mut tset = KeypointSet::new(format!("im{i}"), bbox);
        let mut pset = KeypointSet::new(format!("im{i}"), bbox);
        for name in ["u", "v", "w"] {
            let (x, y) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..50.0));
            tset.insert(name, Keypoint { x, y, visible: true });
            pset.insert(
                name,
                Keypoint {
                    x: x + rng.gen_range(-15.0..15.0),
                    y: y + rng.gen_range(-15.0..15.0),
                    visible: true,
                },
            );
        }
        truths.push(tset);
        preds.push(pset);
    }
    let mut monotone_ok = true;
    let mut last = -1.0;
    for alpha in [0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let mean = pck(&preds, &truths, alpha).unwrap().mean;
        monotone_ok &= mean >= last;
        last = mean;
    }

    let ok = boundary_ok && visibility_ok && monotone_ok;
    report(
        9,
        "PCK metric unit suite",
        ok,
        &format!("boundary {boundary_ok}, visibility {visibility_ok}, monotone {monotone_ok}"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_10_visualization_self_consistency() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA);
    let img = RgbImage::from_fn(64, 64, |_, _| Rgb([rng.gen(), rng.gen(), rng.gen()]));
    let gray = densecorr::imgutil::rgb_to_gray_f32(&img);
    let desc = DenseDescriptorConfig {
        grid_stride: 8,
        radius: 8,
        spatial_bins: 4,
        orientation_bins: 8,
    };
    let grid = dense_descriptors(&gray, &desc).unwrap();
    let db = PatchDatabase::build(vec![("self".into(), img.clone(), grid.clone())]).unwrap();
    let rec = patch_reconstruction(&img, &grid, &db, 1).unwrap();
    let self_ok = rec == img;

    let geom = *grid.geometry();
    let a = uniform_rf_baseline(&img, &geom, &db, 1234).unwrap();
    let b = uniform_rf_baseline(&img, &geom, &db, 1234).unwrap();
    let c = uniform_rf_baseline(&img, &geom, &db, 1235).unwrap();
    let det_ok = a == b && a != c;

    let ok = self_ok && det_ok;
    report(
        10,
        "visualization self-consistency",
        ok,
        &format!("self-db byte-exact {self_ok}, seed-deterministic {det_ok}"),
        t,
    );
    assert!(ok);
}
