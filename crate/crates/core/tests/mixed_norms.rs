use maxwave_core::examples::{knapp_cap, random_annulus, random_annulus_localized, strip_data, Edge, StripForm, StripPair};
use maxwave_core::mixed_norms::*;
use maxwave_core::*;

/// Independent trapezoid rule on the uniform grid that hits both endpoints.
fn trapezoid(t0: f64, t1: f64, dt: f64) -> Vec<(f64, f64)> {
    let k = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    let step = (t1 - t0) / k as f64;
    (0..=k)
        .map(|i| {
            let w = if i == 0 || i == k { 0.5 * step } else { step };
            (t0 + i as f64 * step, w)
        })
        .collect()
}

/// Direct-summation evolution sampled at every region time, restricted to ball nodes.
fn oracle_samples(f: &FrequencyField, centre: [f64; 2], radius: f64, t0: f64, t1: f64, dt: f64) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let g = *f.grid();
    let n = g.n();
    let nodes: Vec<usize> = (0..g.len())
        .filter(|&i| (g.x(i / n) - centre[0]).hypot(g.x(i % n) - centre[1]) <= radius)
        .collect();
    let mut w = Vec::new();
    let mut rows = Vec::new();
    for (t, wt) in trapezoid(t0, t1, dt) {
        let u = evolve_oracle(f, t).unwrap();
        rows.push(nodes.iter().map(|&i| u.values()[i]).collect());
        w.push(wt);
    }
    (w, rows)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn small_grids() -> [GridSpec; 2] {
    [GridSpec::new(32.0, 16).unwrap(), GridSpec::new(64.0, 32).unwrap()]
}

#[test]
fn maximal_function_trivial_cases() {
    let g = make_grid(8).unwrap();
    let q = SpacetimeRegion::q_box(8.0, 0.125).unwrap();
    let z = maximal_function(&FrequencyField::zeros(g), &q).unwrap();
    assert!(z.values.iter().all(|v| *v == 0.0));

    let amp = Complex64::new(0.6, -0.8) * 0.5;
    let f = FrequencyField::single_mode(g, [5, -7], amp).unwrap();
    let mf = maximal_function(&f, &q).unwrap();
    let ball = Ball::origin(8.0).unwrap();
    for i in ball.nodes(&g) {
        assert!((mf.values[i] - 0.5).abs() < 1e-12);
    }
    let empty = SpacetimeRegion::q_box(8.0, 0.125).unwrap();
    let empty = SpacetimeRegion { t1: empty.t0, ..empty };
    assert!(matches!(maximal_function(&f, &empty), Err(Error::Argument(_))));
}

#[test]
fn maximal_function_dominates_every_slice() {
    let g = GridSpec::new(64.0, 32).unwrap();
    let f = random_annulus(&g, 11).unwrap();
    let q = SpacetimeRegion::ball([0.0, 0.0], 12.0, 1.0, 4.0, 0.25).unwrap();
    let mf = maximal_function(&f, &q).unwrap();
    for (t, _) in trapezoid(1.0, 4.0, 0.25) {
        let u = evolve(&f, t).unwrap();
        for i in Ball::origin(12.0).unwrap().nodes(&g) {
            assert!(mf.values[i] >= u.values()[i].norm() - 1e-12);
        }
    }
}

#[test]
fn mixed_norms_match_direct_summation() {
    for g in small_grids() {
        let f = random_annulus(&g, 3).unwrap();
        let h2 = g.h() * g.h();
        let r = 0.25 * g.l();
        let (t0, t1, dt) = (r / 2.0, r, 0.125);
        let q = SpacetimeRegion::ball([0.0, 0.0], r, t0, t1, dt).unwrap();
        let (w, rows) = oracle_samples(&f, [0.0, 0.0], r, t0, t1, dt);
        let npts = rows[0].len();

        let mut l4 = 0.0;
        let mut l2 = 0.0;
        let mut linf = 0.0;
        for p in 0..npts {
            let s4: f64 = rows.iter().zip(&w).map(|(row, wt)| wt * row[p].norm().powi(4)).sum();
            let s2: f64 = rows.iter().zip(&w).map(|(row, wt)| wt * row[p].norm_sqr()).sum();
            let m = rows.iter().map(|row| row[p].norm()).fold(0.0, f64::max);
            l4 += s4.sqrt() * h2;
            l2 += s2 * h2;
            linf += m * m * h2;
        }
        assert!(rel(l2x_l4t_norm(&f, &q).unwrap(), l4.sqrt()) < 1e-9);
        assert!(rel(l2xt_norm(&f, &q).unwrap(), l2.sqrt()) < 1e-9);
        assert!(rel(l2x_linfty_t(&f, &q, None).unwrap(), linf.sqrt()) < 1e-9);
        let mf = maximal_function(&f, &q).unwrap();
        assert!(rel(mf.restricted_l2(&Ball::origin(r).unwrap()).unwrap(), linf.sqrt()) < 1e-9);

        let gf = random_annulus(&g, 4).unwrap();
        let (_, rows_g) = oracle_samples(&gf, [0.0, 0.0], r, t0, t1, dt);
        let mut bil = 0.0;
        for p in 0..npts {
            let s: f64 = (0..w.len()).map(|k| w[k] * (rows[k][p] * rows_g[k][p]).norm_sqr()).sum();
            bil += s.sqrt() * h2;
        }
        assert!(rel(l1x_l2t_bilinear(&f, &gf, &q).unwrap(), bil) < 1e-9);
    }
}

/// Nonzero modes `(xi, dxi^2 f_hat)` for direct summation.
fn sparse_modes(f: &FrequencyField) -> Vec<([f64; 2], Complex64)> {
    let g = f.grid();
    let n = g.n();
    let d2 = g.dxi() * g.dxi();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(idx, v)| ([g.xi(idx / n), g.xi(idx % n)], v * d2))
        .collect()
}

/// `sum_m c_m e^{i x xi_m + i t |xi_m|^2}`.
fn sparse_sum(modes: &[([f64; 2], Complex64)], x: [f64; 2], t: f64) -> Complex64 {
    modes
        .iter()
        .map(|(xi, c)| c * Complex64::from_polar(1.0, x[0] * xi[0] + x[1] * xi[1] + t * (xi[0] * xi[0] + xi[1] * xi[1])))
        .sum()
}

#[test]
fn bilinear_on_strip_data_matches_oracle() {
    // strips need dxi <= 0.01 and the band must reach 5/4
    let g = GridSpec::new(640.0, 264).unwrap();
    let (f, gg) = strip_data(&g, &StripPair::new(1.0).unwrap(), StripForm::Normalized, 7).unwrap();
    let r = 32.0;
    let q = SpacetimeRegion::ball([0.0, 0.0], r, r / 2.0, r, 0.125).unwrap();
    let n = g.n();
    let h2 = g.h() * g.h();
    let times = trapezoid(r / 2.0, r, 0.125);
    let (mf, mg) = (sparse_modes(&f), sparse_modes(&gg));
    let mut expect = 0.0;
    for i in 0..g.len() {
        let x = [g.x(i / n), g.x(i % n)];
        if x[0].hypot(x[1]) > r {
            continue;
        }
        let s: f64 = times.iter().map(|&(t, w)| w * (sparse_sum(&mf, x, t) * sparse_sum(&mg, x, t)).norm_sqr()).sum();
        expect += s.sqrt() * h2;
    }
    assert!(rel(l1x_l2t_bilinear(&f, &gg, &q).unwrap(), expect) < 1e-9);
}

#[test]
fn bilinear_trivial_cases() {
    let g = make_grid(8).unwrap();
    let f = random_annulus(&g, 1).unwrap();
    let q = SpacetimeRegion::q_box(8.0, 0.125).unwrap();
    assert_eq!(l1x_l2t_bilinear(&f, &FrequencyField::zeros(g), &q).unwrap(), 0.0);

    let amp = 0.25;
    let s = FrequencyField::single_mode(g, [6, 2], Complex64::new(amp, 0.0)).unwrap();
    let nodes = Ball::origin(8.0).unwrap().nodes(&g).len() as f64;
    let expect = nodes * g.h() * g.h() * (8.0f64 / 2.0).sqrt() * amp * amp;
    assert!(rel(l1x_l2t_bilinear(&s, &s, &q).unwrap(), expect) < 1e-12);
}

#[test]
fn l2xt_over_all_space_is_plancherel() {
    let g = make_grid(8).unwrap();
    let f = random_annulus(&g, 9).unwrap();
    let r = 24.0;
    let q = all_space(0.0, r, 0.125).unwrap();
    assert!(rel(l2xt_norm(&f, &q).unwrap(), r.sqrt() * f.l2_norm()) < 1e-12);
}

#[test]
fn linfty_path_enforces_cube_pairing() {
    let g = make_grid(16).unwrap();
    let f = FrequencyField::zeros(g);
    let q = SpacetimeRegion::q_box(16.0, 0.125).unwrap();
    assert!(l2x_linfty_t(&f, &q, Some(0.25)).is_ok());
    assert!(matches!(l2x_linfty_t(&f, &q, Some(0.3)), Err(Error::Precondition(_))));
}

#[test]
fn norms_are_homogeneous() {
    let g = GridSpec::new(64.0, 32).unwrap();
    let f = random_annulus(&g, 21).unwrap();
    let gg = random_annulus(&g, 22).unwrap();
    let q = SpacetimeRegion::ball([0.0, 0.0], 10.0, 5.0, 10.0, 0.125).unwrap();
    let c = Complex64::new(-1.5, 2.0);
    let fc = f.scale(c);
    let a = c.norm();
    assert!(rel(l2x_l4t_norm(&fc, &q).unwrap(), a * l2x_l4t_norm(&f, &q).unwrap()) < 1e-12);
    assert!(rel(l2xt_norm(&fc, &q).unwrap(), a * l2xt_norm(&f, &q).unwrap()) < 1e-12);
    assert!(rel(l2x_linfty_t(&fc, &q, None).unwrap(), a * l2x_linfty_t(&f, &q, None).unwrap()) < 1e-12);
    let b0 = l1x_l2t_bilinear(&f, &gg, &q).unwrap();
    assert!(rel(l1x_l2t_bilinear(&fc, &gg.scale(c), &q).unwrap(), a * a * b0) < 1e-12);
}

#[test]
fn knapp_maximal_norm_follows_quarter_power() {
    let ratio = |n: u32| {
        let g = make_grid(n).unwrap();
        let f = knapp_cap(&g, n as f64, Edge::Smoothed).unwrap();
        let q = SpacetimeRegion::ball([0.0, 0.0], n as f64, 0.0, n as f64, 0.125).unwrap();
        maximal_function(&f, &q).unwrap().restricted_l2(&Ball::origin(n as f64).unwrap()).unwrap() / f.l2_norm()
    };
    let c = ratio(16) / 16f64.powf(0.25);
    let r32 = ratio(32) / (c * 32f64.powf(0.25));
    assert!((0.5..=2.0).contains(&r32), "N=32 normalized ratio {r32}");
}

#[test]
fn strichartz_constant_is_stable() {
    let cs: Vec<f64> = [16u32, 32, 64]
        .iter()
        .map(|&n| {
            let g = make_grid(n).unwrap();
            let f = random_annulus_localized(&g, 5, 8.0).unwrap();
            let q = SpacetimeRegion::q_box(n as f64, 0.125).unwrap();
            let v = l2x_l4t_norm(&f, &q).unwrap();
            v / ((n as f64).sqrt() * f.l2_norm())
        })
        .collect();
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    for c in &cs {
        assert!((c / mean - 1.0).abs() <= 0.25, "constants {cs:?}");
    }
}
