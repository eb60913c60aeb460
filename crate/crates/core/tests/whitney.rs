use maxwave_core::examples::random_annulus;
use maxwave_core::whitney::*;
use maxwave_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let r = f64::hypot(p[0], p[1]);
        if (0.5..=1.0).contains(&r) {
            return p;
        }
    }
}

fn ac10_grid() -> GridSpec {
    GridSpec::new(94.0, 32).unwrap()
}

#[test]
fn unit_scale_count() {
    let d = decompose_annulus(0).unwrap();
    let n = d.cubes(0).unwrap().len();
    assert!((4..=12).contains(&n), "{n} unit cubes");
}

#[test]
fn depth_limits() {
    assert!(matches!(decompose_annulus(-9), Err(Error::Depth(_))));
    assert!(matches!(decompose_annulus(1), Err(Error::Depth(_))));
    assert_eq!(default_depth(&ac10_grid()), -6);
}

#[test]
fn nesting_and_coverage() {
    let d = decompose_annulus(-5).unwrap();
    for j in -5..0 {
        let coarse: std::collections::HashSet<_> = d.cubes(j + 1).unwrap().iter().copied().collect();
        for c in d.cubes(j).unwrap() {
            let p = c.parent();
            assert_eq!(p.side(), 2.0 * c.side());
            assert!(p.contains(c.center()));
            assert_eq!(WhitneyCube::containing(j + 1, c.center()), p);
            assert!(coarse.contains(&p));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let p = random_point(&mut rng);
        for j in -5..=0 {
            assert!(d.cubes(j).unwrap().contains(&WhitneyCube::containing(j, p)));
        }
    }
}

#[test]
fn relation_definition() {
    let a = WhitneyCube::new(-3, [4, 1]);
    // sharing a face means the closed cubes meet, so they are not disjoint
    assert!(!a.related(&WhitneyCube::new(-3, [5, 1])));
    assert!(!a.related(&a));
    assert!(a.related(&WhitneyCube::new(-3, [6, 1])));
    assert!(!a.related(&WhitneyCube::new(-3, [8, 1])));
}

#[test]
fn partner_counts_and_separation() {
    let d = decompose_annulus(-6).unwrap();
    for j in -6..=0 {
        let pairs = whitney_pairs(&d, j).unwrap();
        let mut count = std::collections::HashMap::new();
        for p in &pairs {
            *count.entry(p.a).or_insert(0usize) += 1;
            let dist = p.a.distance(&p.b);
            assert!(dist > 0.0 && dist <= 8.0 * p.a.side());
            assert!(p.b.related(&p.a));
        }
        let max = count.values().copied().max().unwrap_or(0);
        assert!(max <= 27, "scale {j}: {max} partners");
        if j == -3 {
            assert!(max <= 24, "scale -3: {max} partners");
        }
    }
}

#[test]
fn coverage_examples() {
    let d = decompose_annulus(-6).unwrap();
    let c = pair_coverage_check(&d, [0.75, 0.0], [0.0, 0.75]).unwrap();
    // at scale -1 the two cubes meet at the corner (1/2, 1/2), so they are not disjoint
    assert_eq!(c.j, -2);
    let e = pair_coverage_check(&d, [0.7001, 0.3001], [0.7002, 0.3002]);
    assert!(matches!(e, Err(Error::Depth(_))));
}

#[test]
fn monte_carlo_coverage() {
    let d = decompose_annulus(-6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut done = 0;
    while done < 10_000 {
        let (a, b) = (random_point(&mut rng), random_point(&mut rng));
        if f64::hypot(a[0] - b[0], a[1] - b[1]) <= 4.0 * 2f64.powi(-6) {
            continue;
        }
        let c = pair_coverage_check(&d, a, b).unwrap();
        assert!((1..=4).contains(&c.multiplicity));
        done += 1;
    }
}

#[test]
fn partition_reconstructs_the_data() {
    let g = ac10_grid();
    let f = random_annulus(&g, 8).unwrap();
    let d = decompose_annulus(default_depth(&g)).unwrap();
    for j in [0, -2, -4, -6] {
        let mut sum = FrequencyField::zeros(g);
        for c in d.cubes(j).unwrap() {
            sum = sum.add(&frequency_piece(&f, c, &d).unwrap()).unwrap();
        }
        let err = f.values().iter().zip(sum.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "scale {j}: {err}");
    }
    for r in piece_energy_ratios(&f, &d).unwrap() {
        assert!((0.25..=4.0).contains(&r), "{r}");
    }
}

#[test]
fn single_cube_piece_is_the_data() {
    let g = ac10_grid();
    let p = BumpProfile::smoothed(Shape::Box { center: [0.6, 0.5], half: [0.1; 2] }, 0.05).unwrap();
    let f = FrequencyField::from_fn(g, |xi| Complex64::new(p.eval(xi), 0.0), None).unwrap();
    let d = decompose_annulus(-2).unwrap();
    let piece = frequency_piece(&f, &WhitneyCube::new(0, [0, 0]), &d).unwrap();
    assert_eq!(piece.values(), f.values());
}

#[test]
fn product_identity_with_remainder() {
    let g = ac10_grid();
    let d = decompose_annulus(default_depth(&g)).unwrap();
    for seed in 0..3 {
        let f = random_annulus(&g, seed).unwrap();
        let rep = product_identity(&f, &d, 3.0).unwrap();
        assert!(rep.relative_error <= 1e-6, "{rep:?}");
        assert!(rep.remainder_share < 0.05, "{rep:?}");
        assert!(rep.pair_terms > 0);
    }
}
