//! Acceptance run: one line per criterion, nonzero exit on any hard failure.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use transbem::analytic::{solve_circle, solve_concentric};
use transbem::cli::{max_and_median, run_converge, run_sweep, EpsilonRule, ExperimentConfig, SweepConfig, SweepParameter, SweepRow};
use transbem::formulations::{build, predict_accumulation, BlockSystem, FormulationKind, FormulationTag, OperatorBlocks};
use transbem::geometry::{presets, BoundaryMesh, Scene};
use transbem::krylov::{gmres, gmres_dense, GmresOptions};
use transbem::linalg::{lu_solve, norm2, DenseComplexMatrix};
use transbem::spectra::{calderon_check, square_and_report, SpectrumReport};

use FormulationTag::*;

enum Verdict {
    Pass,
    Fail,
    SoftFail,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
    }
}

type Check = anyhow::Result<Outcome>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn system(scene: &Scene, tag: FormulationTag) -> anyhow::Result<BlockSystem> {
    let mesh = BoundaryMesh::from_scene(scene)?;
    let blocks = OperatorBlocks::assemble(scene, &mesh)?;
    Ok(build(tag.into(), scene, &mesh, &blocks)?)
}

fn spectrum(scene: &Scene, tag: FormulationTag, radius: f64) -> anyhow::Result<SpectrumReport> {
    let sys = system(scene, tag)?;
    let prediction = predict_accumulation(tag.into(), scene).ok();
    Ok(square_and_report(&sys, prediction, radius)?)
}

fn calderon_square() -> Check {
    let scene = presets::square(1.0, 2.0, 1.5, 100)?;
    let mesh = BoundaryMesh::from_scene(&scene)?;
    let r = calderon_check(&mesh, 1.5)?;
    Ok(Outcome::check(
        r.neg_sn <= 7e-2 && r.neg_ns <= 7e-2,
        format!("-SN {:.4e}, -NS {:.4e} (bound 7e-2; reference 5.394e-2, 6.213e-2)", r.neg_sn, r.neg_ns),
    ))
}

fn circle_config(omega: f64) -> anyhow::Result<ExperimentConfig> {
    let text = format!("[scene]\npreset = \"circle\"\nomega = {omega}\nepsilon = [2.0]\n");
    Ok(ExperimentConfig::parse(&text, std::path::Path::new("."))?)
}

const SINGLE: [FormulationTag; 3] = [ConventionalBM, CalderonBMBeta1, CalderonBMBetaMinusAlpha];

fn accuracy_and_iterations() -> anyhow::Result<(Outcome, Outcome)> {
    let mut cfg = circle_config(5.0)?;
    cfg.converge.elements = vec![75, 150, 300, 600];
    let rows = run_converge(&cfg, &SINGLE, FormulationKind::new)?;
    let find = |n: usize, t: FormulationTag| rows.iter().find(|r| r.elements == n && r.formulation == t).unwrap();

    let mut ok = rows.iter().all(|r| r.converged);
    let mut slopes = Vec::new();
    for t in SINGLE {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| r.formulation == t).map(|r| (r.elements as f64, r.error)).unzip();
        let s = transbem::cli::loglog_slope(&xs, &ys);
        ok &= (-1.3..=-0.7).contains(&s);
        slopes.push(format!("{t} {s:.3}"));
    }
    let mut worst_ratio = 1.0_f64;
    for n in cfg.converge.elements.clone() {
        let errs: Vec<f64> = SINGLE.iter().map(|&t| find(n, t).error).collect();
        let max = errs.iter().cloned().fold(0.0, f64::max);
        let min = errs.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_ratio = worst_ratio.max(max / min);
    }
    ok &= worst_ratio <= 1.2;
    let errors600: Vec<String> = SINGLE.iter().map(|&t| format!("{:.3e}", find(600, t).error)).collect();
    let accuracy = Outcome::check(
        ok,
        format!(
            "slopes [{}], worst pairwise error ratio {worst_ratio:.3}, errors at N=600 [{}]",
            slopes.join(", "),
            errors600.join(", ")
        ),
    );

    let its = |n: usize, t: FormulationTag| find(n, t).iterations;
    let (m150, m600) = (its(150, CalderonBMBetaMinusAlpha), its(600, CalderonBMBetaMinusAlpha));
    let conv: Vec<usize> = [150, 300, 600].iter().map(|&n| its(n, ConventionalBM)).collect();
    let b1 = its(600, CalderonBMBeta1);
    let flat = (m600 as f64 - m150 as f64).abs() <= 0.2 * m150 as f64;
    let growing = conv.windows(2).all(|w| w[1] > w[0]);
    let ordered = m600 <= b1 && b1 <= conv[2] && conv[2] >= 2 * m600;
    let iterations = Outcome::check(
        flat && growing && ordered,
        format!(
            "beta=-alpha {m150} -> {m600} (N=150 -> 600), conventional {conv:?} (N=150, 300, 600), \
             at N=600 beta=-alpha {m600} <= beta=1 {b1} <= conventional {}",
            conv[2]
        ),
    );
    Ok((accuracy, iterations))
}

fn single_material_spectra() -> Check {
    let scene = presets::circle(1.0, 2.0, 1.0, 100)?;
    let minus = spectrum(&scene, CalderonBMBetaMinusAlpha, 0.25)?;
    let beta1 = spectrum(&scene, CalderonBMBeta1, 0.25)?;
    let conventional = spectrum(&scene, ConventionalBM, 0.25)?;
    let f_minus = minus.fraction_within(&[c(-0.75, 0.0)], 0.25);
    let f_beta1 = beta1.fraction_within(&[c(0.25, 0.5), c(-0.25, 0.5)], 0.25);
    let ratio = conventional.spectral_radius / minus.spectral_radius;
    let clauses = [f_minus >= 0.8, f_beta1 >= 0.8, ratio >= 10.0];
    let failed: Vec<&str> = ["beta=-alpha clustering", "beta=1 clustering", "conventional spectral radius"]
        .iter()
        .zip(clauses)
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| *name)
        .collect();
    let mut detail = format!(
        "{:.0}% within 0.25 of -3/4 (beta=-alpha), {:.0}% within 0.25 of ±1/4+i/2 (beta=1), rho ratio {ratio:.1}",
        100.0 * f_minus,
        100.0 * f_beta1
    );
    if !failed.is_empty() {
        detail += &format!("; failing: {}", failed.join(", "));
    }
    Ok(Outcome::check(failed.is_empty(), detail))
}

fn multi_material_spectra() -> Check {
    let scene = presets::concentric_with_counts(1.0, 2.0, 2.0, 3.0, 1.0, 200, 100)?;
    let orig = spectrum(&scene, MultiCalderonOrig, 0.1)?;
    let modified = spectrum(&scene, MultiCalderonMod, 0.1)?;
    let origin = [c(0.0, 0.0)];
    let near_orig = orig.count_within(&origin, 0.1);
    let near_mod = modified.count_within(&origin, 0.1);
    let structure = near_orig > 0 && near_mod == 0;
    let d_orig = orig.dominant().unwrap_or_default();
    let d_mod = modified.dominant().unwrap_or_default();
    let (ref_orig, ref_mod) = (c(2.1706, -2.4538), c(-5.9178, 3.9583));
    let dev_orig = (d_orig - ref_orig).norm() / ref_orig.norm();
    let dev_mod = (d_mod - ref_mod).norm() / ref_mod.norm();
    let dominant_ok = dev_orig <= 0.2 && dev_mod <= 0.2;
    let verdict = match (structure, dominant_ok) {
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::SoftFail,
        _ => Verdict::Fail,
    };
    Ok(Outcome {
        verdict,
        detail: format!(
            "{near_orig} orig and {near_mod} mod eigenvalues within 0.1 of 0; dominant orig {:.4}{:+.4}i ({:.1}% off), \
             mod {:.4}{:+.4}i ({:.1}% off)",
            d_orig.re,
            d_orig.im,
            100.0 * dev_orig,
            d_mod.re,
            d_mod.im,
            100.0 * dev_mod
        ),
    })
}

fn sweep(base: &Scene, parameter: SweepParameter, rule: EpsilonRule, tags: &[FormulationTag]) -> Vec<SweepRow> {
    let cfg = SweepConfig {
        parameter,
        start: 0.1,
        stop: 10.0,
        points: 100,
        rule,
        domain: 2,
        formulations: None,
    };
    run_sweep(base, &cfg, tags, GmresOptions::default(), FormulationKind::new)
}

fn peak_ratio(rows: &[SweepRow], tag: FormulationTag) -> f64 {
    max_and_median(rows, tag).map_or(f64::INFINITY, |(max, median)| max as f64 / median)
}

/// Fraction of sweep values where `a` needs no more iterations than `b`.
fn fraction_not_worse(rows: &[SweepRow], a: FormulationTag, b: FormulationTag) -> f64 {
    let its = |t: FormulationTag| -> Vec<Option<usize>> {
        rows.iter().filter(|r| r.formulation == t).map(|r| if r.converged { r.iterations } else { None }).collect()
    };
    let (ia, ib) = (its(a), its(b));
    let good = ia.iter().zip(&ib).filter(|(x, y)| matches!((x, y), (Some(x), Some(y)) if x <= y) || (x.is_some() && y.is_none())).count();
    good as f64 / ia.len().max(1) as f64
}

fn resonance_robustness() -> Check {
    const N: usize = 300;
    let mut ok = true;
    let mut parts = Vec::new();

    let circle = presets::circle(1.0, 2.0, 5.0, N)?;
    for (label, parameter, base) in [
        ("circle eps2 sweep (omega=5)", SweepParameter::Epsilon, circle.clone()),
        ("circle omega sweep (eps2=2)", SweepParameter::Omega, circle),
    ] {
        let rows = sweep(&base, parameter, EpsilonRule::Single, &SINGLE);
        let r: Vec<f64> = SINGLE.iter().map(|&t| peak_ratio(&rows, t)).collect();
        let converged = rows.iter().all(|r| r.converged);
        ok &= converged && r[0] > 2.0 && r[1] <= 2.0 && r[2] <= 2.0;
        parts.push(format!(
            "{label}: max/median conventional {:.2}, beta=1 {:.2}, beta=-alpha {:.2}{}",
            r[0],
            r[1],
            r[2],
            if converged { "" } else { ", not all converged" }
        ));
    }

    let multi = [MultiConventional, MultiCalderonOrig, MultiCalderonMod];
    let concentric = presets::concentric(1.0, 2.0, 2.0, 3.0, 1.0, N)?;
    let rows = sweep(&concentric, SweepParameter::Omega, EpsilonRule::Single, &multi);
    let (rc, rm) = (peak_ratio(&rows, MultiConventional), peak_ratio(&rows, MultiCalderonMod));
    let vs_conv = fraction_not_worse(&rows, MultiCalderonMod, MultiConventional);
    let vs_orig = fraction_not_worse(&rows, MultiCalderonMod, MultiCalderonOrig);
    ok &= rc > 2.0 && rm <= 2.0 && vs_conv >= 0.95 && vs_orig >= 0.9;
    parts.push(format!(
        "concentric omega sweep: max/median conventional {rc:.2}, mod {rm:.2}; mod <= conventional at {:.0}%, mod <= orig at {:.0}%",
        100.0 * vs_conv,
        100.0 * vs_orig
    ));

    let concentric = presets::concentric(1.0, 2.0, 2.0, 3.0, 5.0, N)?;
    let rows = sweep(&concentric, SweepParameter::Epsilon, EpsilonRule::Reciprocal, &multi);
    let (rc, rm) = (peak_ratio(&rows, MultiConventional), peak_ratio(&rows, MultiCalderonMod));
    let vs_orig = fraction_not_worse(&rows, MultiCalderonMod, MultiCalderonOrig);
    ok &= rc > 2.0 && rm <= 2.0 && vs_orig >= 0.9;
    parts.push(format!(
        "concentric eps3 sweep (eps2=1/eps3, omega=5): max/median conventional {rc:.2}, mod {rm:.2}; mod <= orig at {:.0}%",
        100.0 * vs_orig
    ));
    Ok(Outcome::check(ok, parts.join("; ")))
}

fn junction_and_general_geometries() -> Check {
    let scene = presets::junction(2.0, 3.0, 1.0, 1066)?;
    let mesh = BoundaryMesh::from_scene(&scene)?;
    let blocks = OperatorBlocks::assemble(&scene, &mesh)?;
    let run = |sys: BlockSystem| gmres(&sys, GmresOptions::default());
    let recipe = run(transbem::formulations::build_recipe(&scene, &mesh, &blocks)?);
    let orig = run(build(MultiCalderonOrig.into(), &scene, &mesh, &blocks)?);
    let conventional = run(build(MultiConventional.into(), &scene, &mesh, &blocks)?);
    let mut ok = recipe.converged && recipe.iterations < orig.iterations && recipe.iterations < conventional.iterations;
    let mut detail = format!(
        "junction N=1066: recipe {} iterations (converged {}), orig {}, conventional {}",
        recipe.iterations, recipe.converged, orig.iterations, conventional.iterations
    );
    for (name, scene) in [
        ("junction", presets::junction(2.0, 3.0, 1.0, 300)?),
        ("sectors", presets::sectors(1.0, 300)?),
        ("squares with inclusion", presets::squares_with_inclusion(1.0, 300)?),
    ] {
        let r = spectrum(&scene, Recipe, 0.1)?;
        let near_zero = r.count_within(&[c(0.0, 0.0)], 0.1);
        ok &= r.spectral_radius <= 10.0 && near_zero == 0;
        detail += &format!("; {name}: rho(A^2) {:.2}, {near_zero} eigenvalues within 0.1 of 0", r.spectral_radius);
    }
    Ok(Outcome::check(ok, detail))
}

fn oracle_suites() -> Check {
    let n = 50;
    let mut seed = 0x2545_f491_4f6c_dd1d_u64;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let a = DenseComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
    let b: Vec<Complex64> = (0..n).map(|_| c(next(), next())).collect();
    let g = gmres_dense(&a, &b, GmresOptions { tol: 1e-12, max_iter: None });
    let x = lu_solve(&a, &b).ok_or_else(|| anyhow::anyhow!("singular test matrix"))?;
    let diff: Vec<Complex64> = g.solution.iter().zip(&x).map(|(p, q)| p - q).collect();
    let gmres_err = norm2(&diff) / norm2(&x);

    let mut worst_bc = 0.0_f64;
    for omega in [0.5, 1.0, 5.0, 10.0] {
        for (_, du, dw) in solve_circle(1.0, 2.0, omega, 50)?.boundary_residuals() {
            worst_bc = worst_bc.max(du).max(dw);
        }
        for (_, du, dw) in solve_concentric(1.0, 2.0, 2.0, 3.0, omega, 50)?.boundary_residuals() {
            worst_bc = worst_bc.max(du).max(dw);
        }
    }

    let circle = presets::circle(1.0, 2.0, 1.5, 200)?;
    let cal = calderon_check(&BoundaryMesh::from_scene(&circle)?, 1.5)?;
    let worst_cal = cal.identities().into_iter().fold(0.0, f64::max);

    Ok(Outcome::check(
        gmres_err <= 1e-7 && worst_bc <= 1e-10 && worst_cal <= 5e-2,
        format!(
            "GMRES vs LU {gmres_err:.2e} (bound 1e-7), series boundary residual {worst_bc:.2e} (bound 1e-10), \
             circle Calderon identities {worst_cal:.3e} (bound 5e-2); example suites run as separate test targets"
        ),
    ))
}

fn report(number: usize, started: Instant, outcome: anyhow::Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(o) => {
            let tag = match o.verdict {
                Verdict::Pass => "PASS",
                Verdict::SoftFail => "SOFT FAIL",
                Verdict::Fail => "FAIL",
            };
            println!("criterion {number}: {tag} [{secs:.1} s] {}", o.detail);
            !matches!(o.verdict, Verdict::Fail)
        }
        Err(e) => {
            println!("criterion {number}: FAIL [{secs:.1} s] error: {e:#}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut all = true;

    let t = Instant::now();
    all &= report(1, t, calderon_square());

    let t = Instant::now();
    match accuracy_and_iterations() {
        Ok((accuracy, iterations)) => {
            all &= report(2, t, Ok(accuracy));
            all &= report(3, t, Ok(iterations));
        }
        Err(e) => {
            let msg = format!("{e:#}");
            all &= report(2, t, Err(anyhow::anyhow!(msg.clone())));
            all &= report(3, t, Err(anyhow::anyhow!(msg)));
        }
    }

    let checks: [(usize, fn() -> Check); 5] = [
        (4, single_material_spectra),
        (5, multi_material_spectra),
        (6, resonance_robustness),
        (7, junction_and_general_geometries),
        (8, oracle_suites),
    ];
    for (number, check) in checks {
        let t = Instant::now();
        all &= report(number, t, check());
    }

    if all {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: at least one criterion failed");
        ExitCode::FAILURE
    }
}
