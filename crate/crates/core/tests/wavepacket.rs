use maxwave_core::examples::{strip_data, StripForm, StripPair};
use maxwave_core::field_core::Spatial;
use maxwave_core::wavepacket::*;
use maxwave_core::*;

fn strip_grid() -> GridSpec {
    GridSpec::new(1024.0, 512).unwrap()
}

fn data(seed: u64) -> FrequencyField {
    strip_data(&strip_grid(), &StripPair::new(1.0).unwrap(), StripForm::Normalized, seed).unwrap().0
}

fn region(centre: [f64; 2], radius: f64, t0: f64, t1: f64) -> SpacetimeRegion {
    SpacetimeRegion::new(Spatial::Ball(Ball::new(centre, radius).unwrap()), t0, t1, 0.25).unwrap()
}

fn top_entry(d: &WavePacketDecomp) -> PacketEntry {
    *d.entries.iter().max_by(|a, b| a.coefficient.total_cmp(&b.coefficient)).unwrap()
}

#[test]
fn reconstruction_on_the_window() {
    let f = data(1);
    for r in [16.0, 64.0, 256.0] {
        let d = decompose(&f, r).unwrap();
        for t in [0.5 * r, 0.75 * r, r] {
            let e = reconstruction_error(&d, &f, t).unwrap();
            assert!(e <= 1e-6, "R {r}, t {t}: {e:e}");
        }
    }
}

#[test]
fn coefficient_constant_is_bounded_and_stable() {
    let mut all = Vec::new();
    for r in [64.0, 256.0] {
        for seed in 0..5 {
            let c = decompose(&data(seed), r).unwrap().coefficient_constant().unwrap();
            assert!(c <= 8.0, "R {r} seed {seed}: {c}");
            all.push(c);
        }
    }
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    for c in all {
        assert!((c / mean - 1.0).abs() <= 0.5, "{c} vs mean {mean}");
    }
}

#[test]
fn zero_data_has_no_tubes() {
    let z = FrequencyField::zeros(strip_grid()).with_support(Some(StripTag::First.support())).unwrap();
    assert!(decompose(&z, 64.0).unwrap().entries.is_empty());
}

#[test]
fn generators_are_frequency_localized() {
    let f = data(2);
    for r in [64.0, 256.0] {
        let d = decompose(&f, r).unwrap();
        let s = r.sqrt().recip();
        let mut entries = d.entries.clone();
        entries.sort_by(|a, b| b.coefficient.total_cmp(&a.coefficient));
        for e in entries.iter().take(4) {
            let g = d.generator(&e.tube).unwrap();
            assert!((g.l2_norm() - 1.0).abs() < 1e-9);
            let v = e.tube.velocity();
            let (mut out, mut total) = (0.0, 0.0);
            for (idx, z) in g.values().iter().enumerate() {
                let xi = g.xi_at(idx);
                total += z.norm_sqr();
                if (xi[0] - v[0]).hypot(xi[1] - v[1]) > 4.0 * s {
                    out += z.norm_sqr();
                }
            }
            assert!(out <= 1e-20 * total, "R {r}: outside mass {out:e} of {total:e}");
        }
    }
}

#[test]
fn packets_are_bounded_and_concentrated() {
    let f = data(3);
    for r in [64.0, 256.0] {
        let d = decompose(&f, r).unwrap();
        let tube = top_entry(&d).tube;
        let g = *d.grid();
        for t in [0.5 * r, r] {
            let p = packet_field(&tube, &d, t).unwrap();
            let sup = p.max_abs();
            assert!(sup <= 10.0 / r.sqrt(), "R {r}, t {t}: sup {sup}");
            let core = tube.core(t);
            let rad = 10.0 * r.sqrt() * r.ln();
            let n = g.n();
            let (mut inside, mut total) = (0.0, 0.0);
            for (idx, z) in p.values().iter().enumerate() {
                let x = [g.x(idx / n), g.x(idx % n)];
                // nearest periodic image of the core
                let dx = |a: f64, b: f64| {
                    let d = (a - b).rem_euclid(g.l());
                    d.min(g.l() - d)
                };
                total += z.norm_sqr();
                if dx(x[0], core[0]).hypot(dx(x[1], core[1])) <= rad {
                    inside += z.norm_sqr();
                }
            }
            assert!(inside >= 0.9 * total, "R {r}, t {t}: {}", inside / total);
        }
    }
}

#[test]
fn disjoint_velocities_are_nearly_orthogonal() {
    let g = strip_grid();
    let r = 64.0;
    let a = single_packet(&g, r, [0, 0], [6, 0]).unwrap();
    let b = single_packet(&g, r, [0, 0], [6, 8]).unwrap();
    for t in [0.5 * r, r] {
        let ip = evolve(&a, t).unwrap().inner(&evolve(&b, t).unwrap()).unwrap();
        assert!(ip.norm() <= 1e-4, "{ip}");
    }
}

#[test]
fn overlap_constant() {
    let f = data(4);
    for r in [64.0, 256.0] {
        let d = decompose(&f, r).unwrap().restrict(&region([0.0, 0.0], r, 0.5 * r, r)).unwrap();
        assert!(!d.entries.is_empty());
        for t in [0.5 * r, 0.75 * r, r] {
            let c = overlap_norm_check(&d, t).unwrap();
            assert!(c <= 4.0, "R {r}, t {t}: {c}");
        }
    }
}

#[test]
fn overlap_trivial_cases() {
    let f = data(4);
    let r = 64.0;
    let mut d = decompose(&f, r).unwrap();
    let top = top_entry(&d);
    d.entries = vec![top];
    assert!((overlap_norm_check(&d, 0.75 * r).unwrap() - 1.0).abs() < 1e-9);
    d.entries = vec![top, top];
    let c = overlap_norm_check(&d, 0.75 * r).unwrap();
    assert!((c - 2f64.sqrt()).abs() < 1e-9, "{c}");
}

#[test]
fn window_bounds() {
    let f = data(5);
    let d = decompose(&f, 64.0).unwrap();
    let tube = top_entry(&d).tube;
    assert!(matches!(packet_field(&tube, &d, 31.0), Err(Error::Range(_))));
    assert!(matches!(packet_field(&tube, &d, 65.0), Err(Error::Range(_))));
    assert!(matches!(overlap_norm_check(&d, 10.0), Err(Error::Range(_))));
}

#[test]
fn decompose_error_paths() {
    let coarse = GridSpec::new(64.0, 64).unwrap();
    let z = FrequencyField::zeros(coarse).with_support(Some(StripTag::First.support())).unwrap();
    assert!(matches!(decompose(&z, 1024.0), Err(Error::Resolution(_))));
    let g = strip_grid();
    let annulus = FrequencyField::zeros(g).with_support(Some(Support::unit_annulus())).unwrap();
    assert!(matches!(decompose(&annulus, 64.0), Err(Error::Support(_))));
    assert!(matches!(decompose(&FrequencyField::zeros(g), 64.0), Err(Error::Support(_))));
    assert!(matches!(decompose(&data(0), 48.0), Err(Error::Argument(_))));
}

#[test]
fn single_packet_is_found() {
    let g = strip_grid();
    let r = 64.0;
    let f = single_packet(&g, r, [2, -1], [6, 0]).unwrap();
    let d = decompose_general(&f, r).unwrap();
    let top = top_entry(&d);
    assert_eq!(top.tube.lattice, [2, -1]);
    assert_eq!(top.tube.cell, [6, 0]);
    for t in [0.5 * r, r] {
        assert!(reconstruction_error(&d, &f, t).unwrap() <= 1e-6);
    }
}

#[test]
#[ignore = "a window with Fourier support inside 4 R^-1/2 spreads a packet over many lattice and velocity cells; top share is about 0.005"]
fn single_packet_dominates() {
    let g = strip_grid();
    let r = 64.0;
    let f = single_packet(&g, r, [2, -1], [6, 0]).unwrap();
    let d = decompose_general(&f, r).unwrap();
    let total: f64 = d.entries.iter().map(|e| e.coefficient.powi(2)).sum();
    let top = top_entry(&d).coefficient.powi(2);
    assert!(top >= 0.9 * total, "share {}", top / total);
}

/// Cells whose closed square, widened by the transition, meets the open strip.
fn oracle_cells(r: f64) -> Vec<[i64; 2]> {
    let s = r.sqrt().recip();
    let b = StripTag::First.support().bounding_box();
    let mut out = Vec::new();
    for c1 in -40..=40 {
        for c2 in -40..=40 {
            let (lo1, hi1) = ((c1 as f64 - 0.5625) * s, (c1 as f64 + 0.5625) * s);
            let (lo2, hi2) = ((c2 as f64 - 0.5625) * s, (c2 as f64 + 0.5625) * s);
            if hi1 > b[0] && lo1 < b[1] && hi2 > b[2] && lo2 < b[3] {
                out.push([c1, c2]);
            }
        }
    }
    out
}

fn brute_force_count(r: f64, centre: [f64; 2], radius: f64, t0: f64, t1: f64) -> usize {
    let sq = r.sqrt();
    let (t0, t1) = (t0.max(0.5 * r), t1.min(r));
    if t0 > t1 {
        return 0;
    }
    let steps = 4000;
    let mut count = 0;
    for c in oracle_cells(r) {
        let v = [c[0] as f64 / sq, c[1] as f64 / sq];
        for p1 in -60i64..=60 {
            for p2 in -60i64..=60 {
                let x = [p1 as f64 * sq, p2 as f64 * sq];
                let hit = (0..=steps).any(|k| {
                    let t = t0 + (t1 - t0) * k as f64 / steps as f64;
                    (x[0] - 2.0 * t * v[0] - centre[0]).hypot(x[1] - 2.0 * t * v[1] - centre[1]) <= sq + radius + 1e-9
                });
                count += hit as usize;
            }
        }
    }
    count
}

#[test]
fn tube_lattice_matches_brute_force() {
    // off-lattice centre so that no tube is exactly tangent to the region
    let c = [0.37, 0.21];
    let tubes = tube_lattice(64.0, StripTag::First, &region(c, 64.0, 32.0, 64.0)).unwrap();
    assert_eq!(tubes.len(), brute_force_count(64.0, c, 64.0, 32.0, 64.0));
    assert!(tubes.iter().all(|t| t.strip == StripTag::First));
}

#[test]
fn tube_lattice_small_regions() {
    let r = 64.0;
    // lattice spacing equals the tube radius, so a point meets between one and five tubes
    let tiny = region([0.3, 0.2], 1e-3, 48.0, 48.0);
    let tubes = tube_lattice(r, StripTag::First, &tiny).unwrap();
    assert!((1..=5).contains(&tubes.len()), "{}", tubes.len());
    assert_eq!(tubes.len(), brute_force_count(r, [0.3, 0.2], 1e-3, 48.0, 48.0));
    let before = region([0.0, 0.0], 10.0, 0.0, 16.0);
    assert!(tube_lattice(r, StripTag::First, &before).unwrap().is_empty());
    let all = SpacetimeRegion::new(Spatial::All, 32.0, 64.0, 0.25).unwrap();
    assert!(matches!(tube_lattice(r, StripTag::First, &all), Err(Error::Argument(_))));
}

#[test]
fn record_round_trip() {
    let d = decompose(&data(6), 256.0).unwrap();
    let rec = d.record();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("packets.json");
    save_record(&rec, &path).unwrap();
    assert_eq!(load_record(&path).unwrap(), rec);
}

