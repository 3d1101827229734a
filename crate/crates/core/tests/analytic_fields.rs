//! Series solution robustness and off-boundary field evaluation.

use num_complex::Complex64;
use transbem::analytic::{solve_circle, solve_concentric};
use transbem::fields::{default_grid, evaluate_field, evaluate_in_domain, l2_error, reference_field, Densities};
use transbem::formulations::{build, FormulationTag, OperatorBlocks};
use transbem::geometry::{presets, BoundaryMesh, Scene, Vec2};
use transbem::krylov::{gmres, GmresOptions};

fn solve(scene: &Scene, tag: FormulationTag) -> (BoundaryMesh, Densities) {
    let mesh = BoundaryMesh::from_scene(scene).unwrap();
    let blocks = OperatorBlocks::assemble(scene, &mesh).unwrap();
    let sys = build(tag.into(), scene, &mesh, &blocks).unwrap();
    let r = gmres(&sys, GmresOptions::default());
    assert!(r.converged);
    let dens = Densities::from_solution(&sys, &mesh, &r.solution).unwrap();
    (mesh, dens)
}

#[test]
fn truncation_fifty_is_converged_on_the_grid() {
    let grid = default_grid();
    for omega in [1.0, 5.0, 10.0] {
        let pairs = [
            (solve_circle(1.0, 2.0, omega, 50).unwrap(), solve_circle(1.0, 2.0, omega, 60).unwrap()),
            (
                solve_concentric(1.0, 2.0, 2.0, 3.0, omega, 50).unwrap(),
                solve_concentric(1.0, 2.0, 2.0, 3.0, omega, 60).unwrap(),
            ),
        ];
        for (low, high) in &pairs {
            let worst = grid.iter().map(|&x| (low.evaluate(x) - high.evaluate(x)).norm()).fold(0.0, f64::max);
            assert!(worst <= 1e-10, "omega={omega}: {worst:e}");
        }
    }
}

#[test]
fn concentric_flux_and_value_match_per_mode() {
    for omega in [0.5, 3.0, 8.0] {
        let s = solve_concentric(1.0, 2.0, 2.0, 3.0, omega, 50).unwrap();
        for (mode, du, dw) in s.boundary_residuals() {
            assert!(du <= 1e-10 && dw <= 1e-10, "omega={omega} mode {mode}: {du:e} {dw:e}");
        }
    }
}

#[test]
fn transparent_scatterer_reproduces_the_incident_wave() {
    let omega = 5.0;
    let scene = presets::circle(1.0, 1.0, omega, 300).unwrap();
    let (mesh, dens) = solve(&scene, FormulationTag::CalderonBMBetaMinusAlpha);
    for x in [Vec2::new(0.1, 0.2), Vec2::new(-0.4, 0.0), Vec2::new(0.0, -0.5)] {
        let got = evaluate_in_domain(&scene, &mesh, &dens, 2, x);
        let want = Complex64::new(0.0, omega * x.x).exp();
        assert!((got - want).norm() < 1e-2, "{x:?}: {got} vs {want}");
    }
}

#[test]
fn two_sided_values_agree_near_the_boundary() {
    let (omega, eps2) = (5.0, 2.0);
    let scene = presets::circle(1.0, eps2, omega, 600).unwrap();
    let (mesh, dens) = solve(&scene, FormulationTag::CalderonBMBetaMinusAlpha);
    let series = solve_circle(1.0, eps2, omega, 50).unwrap();
    let density_error = mesh
        .elements()
        .iter()
        .zip(&dens.u)
        .map(|(e, u)| (u - series.evaluate_in(e.midpoint, 1)).norm())
        .fold(0.0, f64::max);
    let delta = 1e-3;
    for e in mesh.elements().iter().step_by(37) {
        // The normal points into the scatterer.
        let outside = e.midpoint - e.normal * delta;
        let inside = e.midpoint + e.normal * delta;
        let jump = evaluate_in_domain(&scene, &mesh, &dens, 1, outside) - evaluate_in_domain(&scene, &mesh, &dens, 2, inside);
        let exact_jump = series.evaluate_in(outside, 0) - series.evaluate_in(inside, 1);
        let mismatch = (jump - exact_jump).norm();
        assert!(mismatch <= 5.0 * density_error, "element at {:?}: {mismatch:e} vs {density_error:e}", e.midpoint);
    }
}

#[test]
fn grid_field_is_accurate_and_rarely_flagged() {
    let (omega, eps2) = (5.0, 2.0);
    let scene = presets::circle(1.0, eps2, omega, 300).unwrap();
    let (mesh, dens) = solve(&scene, FormulationTag::CalderonBMBetaMinusAlpha);
    let grid = default_grid();
    let field = evaluate_field(&scene, &mesh, &dens, &grid).unwrap();
    assert!((field.flagged() as f64) < 0.01 * grid.len() as f64, "{} flagged", field.flagged());
    let reference = reference_field(&solve_circle(1.0, eps2, omega, 50).unwrap(), &grid);
    for (d, r) in field.domains.iter().zip(&reference.domains) {
        if let Some(d) = d {
            assert_eq!(Some(*d), *r);
        }
    }
    let err = l2_error(&field, &reference).unwrap();
    assert!(err < 2e-2, "{err:e}");
}

#[test]
fn concentric_grid_field_matches_the_series() {
    let scene = presets::concentric(1.0, 2.0, 2.0, 3.0, 2.0, 450).unwrap();
    let (mesh, dens) = solve(&scene, FormulationTag::MultiCalderonMod);
    let points: Vec<Vec2> = transbem::fields::uniform_grid(31, 2.9);
    let field = evaluate_field(&scene, &mesh, &dens, &points).unwrap();
    let reference = reference_field(&solve_concentric(1.0, 2.0, 2.0, 3.0, 2.0, 50).unwrap(), &points);
    let err = l2_error(&field, &reference).unwrap();
    assert!(err < 2e-2, "{err:e}");
}
