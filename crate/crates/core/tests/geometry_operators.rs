//! Mesh, point location and operator assembly properties.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transbem::geometry::{locate_point, presets, signed_area, BoundaryMesh, InterfaceShape, Vec2};
use transbem::operators::{assemble_all, element_integrals, targets_of, QuadratureRule, Target};

#[test]
fn unit_square_mesh_has_equal_elements() {
    let scene = presets::square(1.0, 2.0, 1.5, 100).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    assert_eq!(mesh.len(), 400);
    for e in mesh.elements() {
        assert!((e.length - 0.01).abs() < 1e-14);
    }
}

#[test]
fn element_midpoints_and_normals() {
    for scene in [
        presets::junction(2.0, 3.0, 1.0, 200).unwrap(),
        presets::sectors(1.0, 200).unwrap(),
        presets::squares_with_inclusion(1.0, 200).unwrap(),
    ] {
        let mesh = BoundaryMesh::from_scene(&scene).unwrap();
        for e in mesh.elements() {
            let mid = (e.a + e.b) * 0.5;
            assert!(mid.distance(e.midpoint) < 1e-15);
            assert!((e.normal.norm() - 1.0).abs() < 1e-14);
            assert!(e.normal.dot(e.b - e.a).abs() < 1e-14);
        }
        // Consecutive elements of an interface share endpoints and collocation
        // points never sit on a vertex.
        for (id, range) in mesh.ranges() {
            let elems = &mesh.elements()[range.clone()];
            for pair in elems.windows(2) {
                assert_eq!(pair[0].b, pair[1].a, "gap in interface {id}");
            }
            let iface = scene.interface(*id).unwrap();
            if let InterfaceShape::Polyline { vertices, .. } = &iface.shape {
                for e in elems {
                    assert!(vertices.iter().all(|v| v.distance(e.midpoint) > 1e-6));
                }
            }
        }
    }
}

#[test]
fn closed_interfaces_have_consistent_orientation() {
    // Host on the left means the closed curve is traversed clockwise.
    for scene in [presets::circle(1.0, 2.0, 1.0, 64).unwrap(), presets::square(1.0, 2.0, 1.0, 8).unwrap()] {
        let mesh = BoundaryMesh::from_scene(&scene).unwrap();
        let pts: Vec<Vec2> = mesh.elements().iter().map(|e| e.a).collect();
        assert!(signed_area(&pts) < 0.0);
    }
    let scene = presets::concentric(1.0, 2.0, 2.0, 3.0, 1.0, 90).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    let inner: Vec<Vec2> = mesh.interface_elements(2).iter().map(|e| e.a).collect();
    assert!(signed_area(&inner) > 0.0, "domain 3 is left of the inner circle");
}

#[test]
fn locate_point_matches_circle_membership() {
    let scene = presets::concentric(1.0, 2.0, 2.0, 3.0, 1.0, 300).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 10_000 {
        let x = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let r = x.norm();
        // Stay clear of the gap between the circles and their inscribed polygons.
        let sag = |radius: f64, n: f64| radius * (1.0 - (PI / n).cos()) + 1e-9;
        if (r - 2.0).abs() < sag(2.0, 200.0) || (r - 1.0).abs() < sag(1.0, 100.0) {
            continue;
        }
        let expected = if r > 2.0 { 1 } else if r > 1.0 { 2 } else { 3 };
        assert_eq!(locate_point(&scene, &mesh, x).unwrap(), expected, "point {x:?}");
        checked += 1;
    }
}

#[test]
fn locate_point_examples() {
    let scene = presets::circle(1.0, 2.0, 1.0, 64).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    assert_eq!(locate_point(&scene, &mesh, Vec2::new(0.0, 0.0)).unwrap(), 2);
    assert_eq!(locate_point(&scene, &mesh, Vec2::new(10.0, 0.0)).unwrap(), 1);
    let on = mesh.elements()[3].midpoint;
    assert!(locate_point(&scene, &mesh, on).is_err());
}

#[test]
fn quadrature_refinement_for_separated_elements() {
    let scene = presets::circle(1.0, 2.0, 1.0, 60).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    let r10 = QuadratureRule::standard();
    let r20 = QuadratureRule::gauss_legendre(20);
    let x = mesh.elements()[0];
    for e in &mesh.elements()[10..50] {
        let a = element_integrals(x.midpoint, x.normal, e, 2.0, &r10, false);
        let b = element_integrals(x.midpoint, x.normal, e, 2.0, &r20, false);
        assert!((a.single - b.single).norm() < 1e-9);
        assert!((a.double - b.double).norm() < 1e-9);
    }
}

#[test]
fn calderon_identities_on_the_circle() {
    let scene = presets::circle(1.0, 2.0, 1.5, 200).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    let r = transbem::spectra::calderon_check(&mesh, 1.5).unwrap();
    for (i, d) in r.identities().iter().enumerate() {
        assert!(*d <= 5e-2, "identity {i}: {d}");
    }
}

fn rotate(v: Vec2, c: f64, s: f64) -> Vec2 {
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operators_are_invariant_under_rigid_motion(
        dx in -5.0f64..5.0, dy in -5.0f64..5.0, theta in 0.0f64..(2.0 * PI), k in 0.5f64..4.0,
    ) {
        let scene = presets::square(1.0, 2.0, 1.0, 6).unwrap();
        let mesh = BoundaryMesh::from_scene(&scene).unwrap();
        let n = mesh.len();
        let base = assemble_all(&mesh, 0..n, &targets_of(&mesh, 0..n), k).unwrap();

        let shifted = mesh.translated(Vec2::new(dx, dy));
        let moved = assemble_all(&shifted, 0..n, &targets_of(&shifted, 0..n), k).unwrap();
        for kind in transbem::operators::OperatorKind::ALL {
            let diff = base.get(kind).sub(moved.get(kind)).max_abs();
            prop_assert!(diff < 1e-11 * base.get(kind).max_abs().max(1.0), "{kind}: {diff}");
        }

        // Rotation: rebuild elements from rotated endpoints.
        let (c, s) = (theta.cos(), theta.sin());
        let elems: Vec<_> = mesh
            .elements()
            .iter()
            .map(|e| transbem::geometry::Element::new(e.interface, rotate(e.a, c, s), rotate(e.b, c, s)))
            .collect();
        let rule = QuadratureRule::standard();
        for (j, t) in mesh.elements().iter().enumerate().step_by(5) {
            let rt = Target { point: rotate(t.midpoint, c, s), normal: rotate(t.normal, c, s) };
            for (m, e) in elems.iter().enumerate() {
                let v = element_integrals(rt.point, rt.normal, e, k, &rule, j == m);
                let w: Complex64 = base.hyper[(j, m)];
                prop_assert!((v.hyper - w).norm() < 1e-9 * w.norm().max(1.0));
                prop_assert!((v.single - base.single[(j, m)]).norm() < 1e-12);
            }
        }
    }
}
