use maxwave_core::examples::{random_annulus, random_annulus_localized};
use maxwave_core::localization::*;
use maxwave_core::*;

fn cap_at(g: GridSpec, centre: [f64; 2], half: f64) -> FrequencyField {
    let w = 0.25 * half;
    let p = BumpProfile::smoothed(Shape::Box { center: centre, half: [half - w / 2.0; 2] }, w).unwrap();
    let f = FrequencyField::from_fn(g, |xi| Complex64::new(p.eval(xi), 0.0), None).unwrap();
    let n = f.l2_norm();
    f.scale(Complex64::new(1.0 / n, 0.0))
}

fn unit_mode(g: GridSpec, m: [i64; 2]) -> FrequencyField {
    // physical norm of a single mode is |a| L
    FrequencyField::single_mode(g, m, Complex64::new(1.0 / g.l(), 0.0)).unwrap()
}

#[test]
fn zero_field_gives_zero_pieces() {
    let g = make_grid(8).unwrap();
    let d = build_time_blocks(&FrequencyField::zeros(g), 8).unwrap();
    assert_eq!(d.blocks.len(), 8);
    assert!(d.blocks.iter().all(|b| b.piece.values().iter().all(|v| v.norm() == 0.0)));
    assert_eq!(d.orthogonality, 0.0);
}

#[test]
fn intervals_tile_and_pieces_stay_near_the_annulus() {
    let g = make_grid(8).unwrap();
    let f = random_annulus(&g, 4).unwrap();
    let d = build_time_blocks(&f, 8).unwrap();
    assert!(d.tiles());
    for (k, b) in d.blocks.iter().enumerate() {
        assert_eq!(b.j, k + 1);
        assert_eq!(b.interval, [(k as f64) * 8.0, (k as f64 + 1.0) * 8.0]);
        let keep = Support::unit_annulus().dilate(8.0 / 8.0);
        for (idx, v) in b.piece.values().iter().enumerate() {
            if v.norm() > 0.0 {
                assert!(keep.contains(b.piece.xi_at(idx)));
            }
        }
    }
    assert!(d.truncation_loss <= 1e-6, "loss {}", d.truncation_loss);
}

#[test]
fn pieces_of_a_cap_are_bounded_by_the_data() {
    let g = make_grid(8).unwrap();
    let f = cap_at(g, [0.75, 0.0], 0.1);
    let d = build_time_blocks(&f, 8).unwrap();
    for b in &d.blocks {
        assert!(b.piece_norm <= (1.0 + 1e-3) * f.l2_norm(), "block {} norm {}", b.j, b.piece_norm);
    }
}

#[test]
fn data_outside_the_annulus_is_rejected() {
    let g = make_grid(8).unwrap();
    let f = cap_at(g, [0.2, 0.0], 0.05);
    assert!(matches!(build_time_blocks(&f, 8), Err(Error::Support(_))));
}

#[test]
fn orthogonality_constant_is_stable_in_scale() {
    // localized data on cells wide enough that nothing wraps around by t = N^2
    let c8 = {
        let g = GridSpec::new(512.0, 256).unwrap();
        build_time_blocks(&random_annulus_localized(&g, 2, 8.0).unwrap(), 8).unwrap().orthogonality
    };
    let c16 = {
        let g = GridSpec::new(1024.0, 512).unwrap();
        build_time_blocks(&random_annulus_localized(&g, 2, 8.0).unwrap(), 16).unwrap().orthogonality
    };
    let r = c16 / c8;
    assert!((0.5..=1.5).contains(&r), "C(8) = {c8}, C(16) = {c16}");
}

#[test]
fn domination_holds_for_a_single_mode() {
    let g = make_grid(16).unwrap();
    let f = unit_mode(g, [30, 20]);
    let d = build_time_blocks(&f, 16).unwrap();
    let rep = domination_check(&f, &d).unwrap();
    // only the frequency re-truncation contributes here
    assert!(rep.defect <= 1e-5, "defect {}", rep.defect);
}

#[test]
fn domination_holds_for_random_data() {
    let g = make_grid(16).unwrap();
    let f = random_annulus(&g, 3).unwrap();
    let d = build_time_blocks(&f, 16).unwrap();
    let rep = domination_check(&f, &d).unwrap();
    assert_eq!(rep.per_block.len(), 16);
    assert!(rep.defect <= 1e-4, "defect {}", rep.defect);
}

#[test]
fn narrow_cutoff_breaks_domination() {
    let g = make_grid(16).unwrap();
    let f = random_annulus(&g, 3).unwrap();
    let wide = domination_check(&f, &build_time_blocks(&f, 16).unwrap()).unwrap().defect;
    let narrow_bump = BumpProfile::smoothed(Shape::Disk { center: [0.0, 0.0], radius: 1.0 * 16.0 }, 16.0).unwrap();
    let narrow = build_time_blocks_with(&f, 16, &narrow_bump);
    let narrow = match narrow {
        Ok(d) => domination_check(&f, &d).unwrap().defect,
        Err(Error::Accuracy { .. }) => f64::INFINITY,
        Err(e) => panic!("{e}"),
    };
    assert!(narrow > 10.0 * wide, "wide {wide}, narrow {narrow}");
}

#[test]
fn single_mode_ratios_are_trivial() {
    let g = make_grid(8).unwrap();
    let f = unit_mode(g, [12, 9]);
    assert!((short_to_long_time_ratio(&f, 8).unwrap() - 1.0).abs() < 1e-12);
    for lambda in [2u32, 4] {
        let nodes = |r: f64| Ball::origin(r).unwrap().nodes(&g).len() as f64;
        let expect = (nodes(lambda as f64 * 8.0) / nodes(8.0)).sqrt();
        let r = wide_ball_ratio(&f, 8, lambda).unwrap();
        assert!((r - expect).abs() < 1e-12);
        assert!((r / lambda as f64 - 1.0).abs() < 0.05);
    }
    let lg = local_global_experiment(&f, 8).unwrap();
    let nodes = Ball::origin(8.0).unwrap().nodes(&g).len() as f64;
    assert!((lg.local - nodes.sqrt() * g.h() / g.l()).abs() < 1e-12);
    assert!((lg.global - 1.0).abs() < 1e-12);
}

#[test]
fn ratio_error_paths() {
    let g = make_grid(8).unwrap();
    let z = FrequencyField::zeros(g);
    assert!(matches!(short_to_long_time_ratio(&z, 8), Err(Error::UndefinedRatio(_))));
    assert!(matches!(wide_ball_ratio(&z, 8, 2), Err(Error::UndefinedRatio(_))));
    assert!(matches!(wide_ball_ratio(&z, 8, 3), Err(Error::Argument(_))));
    // 4N + 2N exceeds half of a 10N cell
    let tight = GridSpec::new(80.0, 64).unwrap();
    assert!(matches!(wide_ball_ratio(&FrequencyField::zeros(tight), 8, 4), Err(Error::Domain(_))));
    let f = random_annulus(&g, 1).unwrap().scale(Complex64::new(2.0, 0.0));
    assert!(matches!(local_global_experiment(&f, 8), Err(Error::Precondition(_))));
}

#[test]
fn far_data_is_global_not_local() {
    let g = make_grid(8).unwrap();
    let f = random_annulus_localized(&g, 6, 4.0).unwrap();
    let far = propagator::translate_spacetime(&f, [40.0, 40.0], 0.0).unwrap();
    let lg = local_global_experiment(&far, 8).unwrap();
    assert!(lg.global > 10.0 * lg.local, "{lg:?}");
}
