use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::numeric::mahler_centered_simplex;

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Simplex {
    loop {
        let v: Vec<DVector<f64>> = (0..=n).map(|_| gaussian_vec(rng, n)).collect();
        if let Ok(s) = Simplex::new(v) {
            return s;
        }
    }
}

fn centered(s: &Simplex) -> Simplex {
    s.translate(&-s.barycenter())
}

fn random_hpolytope(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ConvexBody {
    loop {
        let normals = DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal));
        let offsets = DVector::from_fn(m, |_, _| rng.random_range(0.5..1.5));
        if let Ok(b) = ConvexBody::hpolytope(normals, offsets) {
            return b;
        }
    }
}

#[test]
fn membership_examples() {
    let ball = ConvexBody::ball(3, 1.0).unwrap();
    assert!(ball.contains(&DVector::zeros(3)));
    let cube = ConvexBody::unit_cube(3).unwrap();
    assert!(!cube.contains(&DVector::from_vec(vec![0.5, 0.5, 1.2])));
    assert!(cube.contains(&DVector::from_vec(vec![0.5, 0.5, 1.0])));
}

#[test]
fn point_on_hpolytope_facet_is_inside() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let body = random_hpolytope(&mut rng, 3, 9);
        let BodyKind::HPolytope { normals, offsets } = body.kind() else { unreachable!() };
        // walk from the Chebyshev center to the boundary along a random ray
        let c = body.interior_point();
        let u = gaussian_vec(&mut rng, 3).normalize();
        let t = (0..normals.nrows())
            .filter_map(|i| {
                let a = normals.row(i).transpose();
                let au = a.dot(&u);
                (au > 0.0).then(|| (offsets[i] - a.dot(&c)) / au)
            })
            .fold(f64::INFINITY, f64::min);
        let on_facet = &c + &u * t;
        assert!(body.contains(&on_facet));
        assert!(!body.contains(&(&c + &u * (t * 1.01))));
    }
}

#[test]
fn support_examples() {
    let ball = ConvexBody::ball(4, 2.5).unwrap();
    let u = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
    assert!((ball.support(&u).unwrap() - 2.5).abs() < 1e-15);
    for n in 1..=6 {
        let cube = ConvexBody::unit_cube(n).unwrap();
        let u = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        assert!((cube.support(&u).unwrap() - (n as f64).sqrt()).abs() < 1e-12);
    }
    assert!(ball.support(&DVector::zeros(4)).is_err());
}

#[test]
fn vpolytope_support_matches_lp_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let pts: Vec<DVector<f64>> = (0..12).map(|_| gaussian_vec(&mut rng, 4)).collect();
        let body = ConvexBody::vpolytope(pts.clone()).unwrap();
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().copied().collect()).collect();
        let u = gaussian_vec(&mut rng, 4);
        let us: Vec<f64> = u.iter().copied().collect();
        let lp::LpOutcome::Optimal { value, .. } = lp::maximize_over_hull(&rows, &us) else {
            panic!("oracle LP failed")
        };
        assert!((body.support(&u).unwrap() - value).abs() < 1e-9);
    }
}

#[test]
fn hpolytope_support_is_lp_and_matches_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let body = random_hpolytope(&mut rng, 3, 10);
        let verts = body.polytope_vertices().unwrap();
        let u = gaussian_vec(&mut rng, 3);
        let by_vertices = verts.iter().map(|v| v.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
        assert!((body.support(&u).unwrap() - by_vertices).abs() < 1e-8);
    }
}

#[test]
fn unbounded_hpolytope_is_not_a_body() {
    let normals = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0]);
    let r = ConvexBody::hpolytope(normals, DVector::from_element(3, 1.0));
    assert!(matches!(r, Err(GeomError::NotABody(_))));
}

#[test]
fn exact_volume_examples() {
    let ball = ConvexBody::ball(3, 1.0).unwrap();
    assert!((ball.exact_volume().unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((ball.exact_volume().unwrap() - 4.18879).abs() < 1e-5);
    assert!((ConvexBody::unit_cube(5).unwrap().exact_volume().unwrap() - 1.0).abs() < 1e-15);
    // cross-polytope: 2ⁿ/n!
    let cp = ConvexBody::cross_polytope(4, 1.0).unwrap();
    assert!((cp.exact_volume().unwrap() - 16.0 / 24.0).abs() < 1e-12);
}

#[test]
fn ellipsoid_volume_against_monte_carlo() {
    let a = DMatrix::from_row_slice(3, 3, &[1.5, 0.3, 0.0, -0.2, 0.8, 0.4, 0.1, 0.0, 1.2]);
    let body = ConvexBody::ball(3, 1.0).unwrap().transform(&AffineMap::linear_only(a.clone()).unwrap()).unwrap();
    let exact = body.exact_volume().unwrap();
    assert!((exact - a.determinant().abs() * 4.0 * PI / 3.0).abs() < 1e-12);
    // rejection estimate inside the bounding box
    let (lo, hi) = body.bounding_box();
    let box_vol: f64 = (0..3).map(|i| hi[i] - lo[i]).product();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 400_000;
    let mut hits = 0usize;
    for _ in 0..n {
        let x = DVector::from_fn(3, |i, _| rng.random_range(lo[i]..hi[i]));
        if body.contains(&x) {
            hits += 1;
        }
    }
    let est = box_vol * hits as f64 / n as f64;
    assert!((est / exact - 1.0).abs() < 0.01, "{est} vs {exact}");
}

#[test]
fn random_tetrahedron_volume_matches_hull_triangulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let s = random_simplex(&mut rng, 3);
        let hull = Hull::new(s.vertices()).unwrap();
        assert!((simplex_volume(&s).unwrap() - hull.volume()).abs() < 1e-10 * s.volume().max(1.0));
    }
}

#[test]
fn standard_centered_polar_pair() {
    for n in 2..=10 {
        let s = Simplex::standard_centered(n);
        let p = s.polar().unwrap();
        let v0 = DVector::from_element(n, 1.0);
        let mut expected = vec![v0.clone()];
        for j in 0..n {
            let mut v = v0.clone();
            v[j] -= (n + 1) as f64;
            expected.push(v);
        }
        for e in &expected {
            assert!(p.vertices().iter().any(|w| (w - e).amax() < 1e-10));
        }
        let nf = crate::numeric::factorial(n);
        assert!((s.volume() - (n + 1) as f64 / nf).abs() < 1e-10);
        assert!((p.volume() - ((n + 1) as f64).powi(n as i32) / nf).abs() < 1e-10 * p.volume());
    }
}

#[test]
fn polar_body_examples() {
    let p = ConvexBody::ball(3, 2.0).unwrap().polar().unwrap();
    assert_eq!(p, ConvexBody::ball(3, 0.5).unwrap());

    let cube = ConvexBody::cube(3, 1.0, true).unwrap();
    let cp = cube.polar().unwrap();
    let BodyKind::VPolytope { vertices } = cp.kind() else { panic!("expected V-polytope") };
    assert_eq!(vertices.len(), 6);
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(3);
            e[i] = s;
            assert!(vertices.iter().any(|v| (v - &e).amax() < 1e-15));
        }
    }

    for n in 2..=5 {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let s = centered(&random_simplex(&mut rng, n));
        let body = ConvexBody::simplex(s);
        let m = body.exact_volume().unwrap() * body.polar().unwrap().exact_volume().unwrap();
        assert!((m / mahler_centered_simplex(n) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn polar_requires_interior_origin() {
    let cube = ConvexBody::unit_cube(2).unwrap();
    assert!(matches!(cube.polar(), Err(GeomError::PolarUnbounded { .. })));
    let off = ConvexBody::ball_at(DVector::from_vec(vec![2.0, 0.0]), 1.0).unwrap();
    assert!(matches!(off.polar(), Err(GeomError::PolarUnbounded { .. })));
}

#[test]
fn off_center_ball_polar_is_exact() {
    // polar of a ball of radius r centered at c (|c| < r): check support
    // identities h_{K°}(y) ≤ 1 exactly on boundary points y of K
    let c = DVector::from_vec(vec![0.3, -0.2, 0.1]);
    let k = ConvexBody::ball_at(c.clone(), 1.0).unwrap();
    let polar = k.polar().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let y = &c + gaussian_vec(&mut rng, 3).normalize();
        assert!((polar.support(&y).unwrap() - 1.0).abs() < 1e-10);
    }
    let back = polar.polar().unwrap();
    let BodyKind::Ellipsoid { shape, center } = back.kind() else { panic!() };
    assert!((center - &c).amax() < 1e-10);
    assert!((shape - DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);
}

#[test]
fn bipolar_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    // V -> H -> V
    let pts: Vec<DVector<f64>> = Simplex::regular(3, 1.0)
        .vertices()
        .iter()
        .chain(Simplex::regular(3, 1.0).scaled_about(&DVector::zeros(3), -1.0).vertices())
        .cloned()
        .collect();
    let v = ConvexBody::vpolytope(pts.clone()).unwrap();
    let vv = v.polar().unwrap().polar().unwrap();
    let BodyKind::VPolytope { vertices } = vv.kind() else { panic!() };
    for (a, b) in vertices.iter().zip(&pts) {
        assert!((a - b).amax() < 1e-9);
    }
    // H -> V -> H, compared after normalizing each row to offset 1
    let h = random_hpolytope(&mut rng, 3, 8);
    let hh = h.polar().unwrap().polar().unwrap();
    let (BodyKind::HPolytope { normals: a0, offsets: b0 }, BodyKind::HPolytope { normals: a1, offsets: b1 }) =
        (h.kind(), hh.kind())
    else {
        panic!()
    };
    for i in 0..a0.nrows() {
        let r0 = a0.row(i) / b0[i];
        let r1 = a1.row(i) / b1[i];
        assert!((r0 - r1).amax() < 1e-9);
    }
    // simplex and ellipsoid
    let s = centered(&random_simplex(&mut rng, 4));
    let ss = ConvexBody::simplex(s.clone()).polar().unwrap().polar().unwrap();
    let BodyKind::Simplex(back) = ss.kind() else { panic!() };
    for (a, b) in back.vertices().iter().zip(s.vertices()) {
        assert!((a - b).amax() < 1e-9);
    }
}

#[test]
fn containment_examples() {
    for n in 2..=8 {
        let ball = ConvexBody::ball(n, 1.0).unwrap();
        // inradius of the regular simplex is circumradius / n
        let reg = Simplex::regular(n, n as f64);
        assert!(simplex_contains_body(&reg, &ball).unwrap());
        assert!(!simplex_contains_body(&reg.scaled_about(&DVector::zeros(n), 0.99), &ball).unwrap());

        let corner = Simplex::corner(n, n as f64);
        let cube = ConvexBody::unit_cube(n).unwrap();
        assert!(simplex_contains_body(&corner, &cube).unwrap());
        let shrunk = corner.scaled_about(&corner.barycenter(), 0.99);
        assert!(!simplex_contains_body(&shrunk, &cube).unwrap());
    }
}

#[test]
fn transform_keeps_kind_when_possible() {
    let cube = ConvexBody::unit_cube(3).unwrap();
    let m = AffineMap::new(DMatrix::identity(3, 3) * 2.0, DVector::from_element(3, -1.0)).unwrap();
    assert_eq!(cube.transform(&m).unwrap(), ConvexBody::cube(3, 1.0, true).unwrap());
    let shear = AffineMap::linear_only(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).unwrap();
    let sq = ConvexBody::cube(2, 1.0, true).unwrap().transform(&shear).unwrap();
    assert_eq!(sq.kind_name(), "hpolytope");
    assert!((sq.exact_volume().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn exact_moments_of_polytopes_match_closed_forms() {
    // cube as an H-polytope against the Cube closed form
    let cube = ConvexBody::cube(3, 0.5, true).unwrap();
    let as_h = ConvexBody::from_halfspaces(&cube.halfspaces().unwrap()).unwrap();
    let a = cube.exact_moments().unwrap();
    let b = as_h.exact_moments().unwrap();
    assert!((a.covariance - DMatrix::<f64>::identity(3, 3) / 12.0).amax() < 1e-15);
    assert!((b.covariance - DMatrix::<f64>::identity(3, 3) / 12.0).amax() < 1e-12);
    assert!(b.barycenter.amax() < 1e-12);
    // simplex closed form against its own hull triangulation
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_simplex(&mut rng, 4);
    let sm = ConvexBody::simplex(s.clone()).exact_moments().unwrap();
    let vm = ConvexBody::vpolytope(s.vertices().to_vec()).unwrap().exact_moments().unwrap();
    assert!((sm.covariance - vm.covariance).amax() < 1e-10);
    assert!((sm.barycenter - vm.barycenter).amax() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_scales_with_determinant(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_simplex(&mut rng, n);
        let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        prop_assume!(a.determinant().abs() > 1e-3);
        let map = AffineMap::new(a.clone(), gaussian_vec(&mut rng, n)).unwrap();
        let image = s.transform(&map);
        let want = a.determinant().abs() * s.volume();
        prop_assert!((image.volume() / want - 1.0).abs() < 1e-9);
        // barycenter equivariance
        prop_assert!((image.barycenter() - map.apply(&s.barycenter())).amax() < 1e-10 * image.scale().max(1.0));
    }

    #[test]
    fn centered_simplex_polar_invariants(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // perturbed regular simplex, so the polar stays well conditioned
        let reg = Simplex::regular(n, 1.0);
        let s = Simplex::new(
            reg.vertices().iter().map(|v| v + gaussian_vec(&mut rng, n) * 0.4 / (n as f64).sqrt()).collect(),
        ).unwrap();
        let s = centered(&s);
        let p = s.polar().unwrap();
        let m = s.volume() * p.volume();
        prop_assert!((m / mahler_centered_simplex(n) - 1.0).abs() < 1e-9);
        let sum = p.vertices().iter().fold(DVector::zeros(n), |a, w| a + w);
        let max_norm = p.max_vertex_norm();
        prop_assert!(sum.norm() <= 1e-9 * max_norm);
        let pp = p.polar().unwrap();
        for (a, b) in pp.vertices().iter().zip(s.vertices()) {
            prop_assert!((a - b).amax() < 1e-9 * s.scale().max(1.0));
        }
    }

    #[test]
    fn membership_consistent_with_support(seed in any::<u64>(), which in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let body = match which {
            0 => ConvexBody::ball_at(gaussian_vec(&mut rng, n), 1.3).unwrap(),
            1 => ConvexBody::cube(n, 0.7, false).unwrap(),
            2 => ConvexBody::vpolytope((0..8).map(|_| gaussian_vec(&mut rng, n)).collect()).unwrap(),
            3 => random_hpolytope(&mut rng, n, 8),
            _ => ConvexBody::simplex(random_simplex(&mut rng, n)),
        };
        let (lo, hi) = body.bounding_box();
        for _ in 0..20 {
            let x = DVector::from_fn(n, |i, _| rng.random_range(lo[i]..=hi[i]));
            if body.contains(&x) {
                for _ in 0..5 {
                    let u = gaussian_vec(&mut rng, n);
                    prop_assert!(x.dot(&u) <= body.support(&u).unwrap() + 1e-9 * body.scale() * u.norm());
                }
            }
        }
    }
}
