mod common;

use common::*;
use shellfem::assembly::LoadSpec;
use shellfem::exact::ExactFields;
use shellfem::fe_space::{project_primal, Difference, DiscreteField, SpaceOptions};
use shellfem::geometry::SurfaceChart;
use shellfem::mesh::{BoundaryTag, SideTags};
use shellfem::norms::norm_squares;
use shellfem::problem::ShellProblem;
use shellfem::regime::{detect_regime, recommend_solution, Thresholds, Verdict};
use shellfem::solve::Method;
use shellfem::study::{
    convergence_study, locking_study, observed_order, LockingReference, Prolonged, Reference,
};
use shellfem::Error;

fn left_clamped() -> SideTags {
    SideTags {
        left: BoundaryTag::D,
        right: BoundaryTag::F,
        bottom: BoundaryTag::F,
        top: BoundaryTag::F,
    }
}

#[test]
fn prolonged_field_is_reproduced_on_refined_mesh() {
    let chart = SurfaceChart::cylinder(1.0);
    let coarse = problem(
        unit_square(2, left_clamped()),
        chart.clone(),
        SpaceOptions::dg(),
    );
    let x: Vec<f64> = (0..coarse.layout.n_primal())
        .map(|i| (i as f64 * 0.71).cos())
        .collect();
    let src = DiscreteField {
        layout: &coarse.layout,
        coeffs: &x,
    };
    let fine_mesh = coarse.mesh.refine_uniform().refine_uniform();
    let fine = problem(fine_mesh, chart, SpaceOptions::dg());
    let pro = Prolonged {
        coarse: src,
        levels: 2,
    };
    let (rule, line) = fine.quad.rules();
    let y = project_primal(&pro, &fine.mesh, &fine.chart, &fine.layout, &rule, &line).unwrap();
    let fy = DiscreteField {
        layout: &fine.layout,
        coeffs: &y,
    };
    let (diff, _) =
        norm_squares(&Difference(&fy, &pro), &fine.mesh, &fine.chart, &fine.quad).unwrap();
    let (size, _) = norm_squares(&pro, &fine.mesh, &fine.chart, &fine.quad).unwrap();
    assert!(diff.h <= 1e-20 * size.h, "{} vs {}", diff.h, size.h);
}

#[test]
fn observed_order_of_halved_error() {
    assert!((observed_order(1.0, 0.25, 0.2, 0.1).unwrap() - 2.0).abs() < 1e-14);
    assert!(observed_order(0.0, 1.0, 0.2, 0.1).is_none());
    assert!(observed_order(1.0, 0.5, 0.1, 0.1).is_none());
}

#[test]
fn self_convergence_without_exact_solution() {
    let p = ShellProblem::new(
        SurfaceChart::cylinder(1.0),
        unit_square(2, left_clamped()),
        0.05,
        LoadSpec::transverse(1.0),
    );
    let s = convergence_study(&p, Method::Mixed, 3).unwrap();
    assert_eq!(s.reference, Reference::SelfConvergence);
    assert_eq!(s.rows.len(), 3);
    assert!(s
        .rows
        .windows(2)
        .all(|w| w[1].rel_error_h < w[0].rel_error_h));
    assert!(s.rows[0].order_h.is_none() && s.rows[1].order_h.is_some());
}

#[test]
fn locking_reference_follows_problem() {
    let p = ShellProblem::new(
        SurfaceChart::cylinder(1.0),
        unit_square(2, left_clamped()),
        0.01,
        LoadSpec::transverse(1.0),
    );
    let s = locking_study(&p, &[1e-2, 1e-3], &[Method::Mixed, Method::Dg]).unwrap();
    assert_eq!(s.reference, LockingReference::MixedRefined);
    assert_eq!(s.rows.len(), 4);
    assert!(s.h_norm(Method::Dg, 1e-3).unwrap() < s.h_norm(Method::Dg, 1e-2).unwrap());
    assert!(locking_study(&p, &[], &[Method::Dg]).is_err());

    let mut m = p.clone();
    m.manufactured = Some(ExactFields::parse(["0", "0", "0", "0", "x1*x2"]).unwrap());
    assert_eq!(
        locking_study(&m, &[1e-2], &[Method::Dg]).unwrap().reference,
        LockingReference::Manufactured
    );
}

#[test]
fn regime_verdicts_select_solution() {
    let th = Thresholds::default();
    let cyl = ShellProblem::new(
        SurfaceChart::cylinder(1.0),
        unit_square(6, left_clamped()),
        1e-3,
        LoadSpec::transverse(1.0),
    );
    let (report, sols) = detect_regime(&cyl, &th).unwrap();
    assert_eq!(report.verdict, Verdict::Bending);
    assert_eq!(
        recommend_solution(&report, &sols).unwrap().disc.method,
        Method::Mixed
    );

    let sphere = ShellProblem::new(
        SurfaceChart::sphere(2.0),
        rect([0.5, 1.5], [0.0, 1.0], 8, 8, clamped()),
        1e-3,
        LoadSpec::transverse(1.0),
    );
    let (report, sols) = detect_regime(&sphere, &th).unwrap();
    assert_eq!(report.verdict, Verdict::NonBending);
    assert_eq!(
        recommend_solution(&report, &sols).unwrap().disc.method,
        Method::Dg
    );

    let undecided = shellfem::regime::RegimeReport {
        verdict: Verdict::Inconclusive,
        ..report
    };
    assert!(matches!(
        recommend_solution(&undecided, &sols),
        Err(Error::Inconclusive)
    ));
}

#[test]
fn regime_rejects_manufactured_loads() {
    let mut p = ShellProblem::new(
        SurfaceChart::plate(),
        unit_square(2, clamped()),
        0.1,
        LoadSpec::default(),
    );
    p.manufactured = Some(ExactFields::zero());
    assert!(detect_regime(&p, &Thresholds::default()).is_err());
}

#[test]
fn theta_override_matches_method_default() {
    let base = ShellProblem::new(
        SurfaceChart::cylinder(1.0),
        unit_square(3, left_clamped()),
        0.05,
        LoadSpec::transverse(1.0),
    );
    let mut mixed = base.clone();
    mixed.theta = Some(1.0);
    let a = shellfem::problem::solve_problem(&base, Method::Mixed).unwrap();
    let b = shellfem::problem::solve_problem(&mixed, Method::Mixed).unwrap();
    assert_eq!(a.solution.primal, b.solution.primal);

    let mut dg = base.clone();
    dg.theta = Some(1.0 / (0.05 * 0.05));
    let a = shellfem::problem::solve_problem(&base, Method::Dg).unwrap();
    let b = shellfem::problem::solve_problem(&dg, Method::Dg).unwrap();
    let scale = a
        .solution
        .primal
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let dev = a
        .solution
        .primal
        .iter()
        .zip(&b.solution.primal)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(dev <= 1e-10 * scale, "{dev} vs {scale}");

    let mut stiff = base.clone();
    stiff.theta = Some(1e4);
    let c = shellfem::problem::solve_problem(&stiff, Method::Dg).unwrap();
    assert!(
        shellfem::sparse::norm2(&c.solution.primal) < shellfem::sparse::norm2(&a.solution.primal)
    );
}
