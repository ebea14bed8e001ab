mod common;

use common::*;
use shellfem::assembly::{assemble_load, default_penalty, probe_penalty, LoadSpec};
use shellfem::fe_space::SpaceOptions;
use shellfem::geometry::SurfaceChart;
use shellfem::mesh::{BoundaryTag, SideTags};
use shellfem::solve::{
    dg_matrix, realize_via_theta, solve_dg, solve_dg_physical, solve_mixed, solve_mixed_assembled,
    split_epsilon_sq, DgScaling, Method,
};
use shellfem::sparse::{
    leading_block, norm2, permute_symmetric, saddle_point, spmv, to_dense, transpose,
};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn plate_problem(options: SpaceOptions) -> (Problem, f64, Vec<f64>) {
    let p = problem(unit_square(1, clamped()), SurfaceChart::plate(), options);
    let c0 = default_penalty(&p.asm, &p.mat);
    let (c, _) = probe_penalty(&p.asm.primal, c0).unwrap();
    let f = assemble_load(
        &p.mesh,
        &p.chart,
        &p.layout,
        &LoadSpec::transverse(1.0),
        &p.quad,
    )
    .unwrap();
    (p, c, f)
}

#[test]
fn zero_load_gives_zero_solution() {
    let (p, c, f) = plate_problem(SpaceOptions::mixed());
    let z = vec![0.0; f.len()];
    let s = solve_mixed_assembled(&p.asm, c, &z, 0.1).unwrap();
    assert!(s
        .primal
        .iter()
        .chain(s.aux.as_ref().unwrap())
        .all(|v| *v == 0.0));
    let d = solve_dg_physical(&p.asm.primal, c, &z, 0.1).unwrap();
    assert!(d.primal.iter().all(|v| *v == 0.0));
}

#[test]
fn mixed_matches_dense_lu() {
    let (p, c, f) = plate_problem(SpaceOptions::mixed());
    let eps = 0.1;
    let s = solve_mixed_assembled(&p.asm, c, &f, eps).unwrap();
    let m = p.asm.mixed.as_ref().unwrap();
    let k = saddle_point(
        &p.asm.primal.a_theta(c, 1.0),
        &m.b,
        &m.c,
        split_epsilon_sq(eps).unwrap(),
    );
    let mut rhs = f.clone();
    rhs.resize(k.rows(), 0.0);
    let dense = to_dense(&k)
        .lu()
        .solve(&nalgebra::DVector::from_vec(rhs))
        .unwrap();
    let mut got = s.primal.clone();
    got.extend(s.aux.unwrap());
    let scale = dense.amax();
    assert!(max_diff(&got, dense.as_slice()) <= 1e-10 * scale);
    assert!(s.stats.relative_residual <= 1e-10);
}

#[test]
fn dg_matches_dense_lu() {
    let (p, c, f) = plate_problem(SpaceOptions::dg());
    let eps = 0.1;
    let s = solve_dg_physical(&p.asm.primal, c, &f, eps).unwrap();
    let k = dg_matrix(
        &p.asm.primal.rho(c),
        &p.asm.primal.gamma(c),
        &p.asm.primal.tau(c),
        eps,
        DgScaling::Original,
    )
    .unwrap();
    let dense = to_dense(&k)
        .lu()
        .solve(&nalgebra::DVector::from_vec(f))
        .unwrap();
    assert!(max_diff(&s.primal, dense.as_slice()) <= 1e-10 * dense.amax());
}

#[test]
fn solutions_scale_linearly() {
    let (p, c, f) = plate_problem(SpaceOptions::mixed());
    let s = 3.5;
    let fs: Vec<f64> = f.iter().map(|v| v * s).collect();
    let a = solve_mixed_assembled(&p.asm, c, &f, 0.05).unwrap();
    let b = solve_mixed_assembled(&p.asm, c, &fs, 0.05).unwrap();
    let scaled: Vec<f64> = a.primal.iter().map(|v| v * s).collect();
    assert!(max_diff(&scaled, &b.primal) <= 1e-12 * norm2(&b.primal).max(1.0));
}

#[test]
fn dg_scalings_agree_when_loads_are_related() {
    let (p, c, f) = plate_problem(SpaceOptions::dg());
    let (r, g, t) = (
        p.asm.primal.rho(c),
        p.asm.primal.gamma(c),
        p.asm.primal.tau(c),
    );
    for eps in [0.3, 1e-2, 1e-3] {
        let e2 = split_epsilon_sq(eps).unwrap();
        let orig = solve_dg(&r, &g, &t, &f, eps, DgScaling::Original, c).unwrap();
        let fs: Vec<f64> = f.iter().map(|v| v * e2).collect();
        let scaled = solve_dg(&r, &g, &t, &fs, eps, DgScaling::Scaled, c).unwrap();
        let scale = norm2(&orig.primal);
        assert!(
            max_diff(&orig.primal, &scaled.primal) <= 1e-10 * scale,
            "eps {eps}"
        );
    }
}

#[test]
fn theta_path_reproduces_both_solvers() {
    let mesh = unit_square(
        2,
        SideTags {
            left: BoundaryTag::D,
            right: BoundaryTag::F,
            bottom: BoundaryTag::S,
            top: BoundaryTag::F,
        },
    );
    let p = problem(mesh, SurfaceChart::cylinder(2.0), SpaceOptions::mixed());
    let (c, _) = probe_penalty(&p.asm.primal, default_penalty(&p.asm, &p.mat)).unwrap();
    let f = assemble_load(
        &p.mesh,
        &p.chart,
        &p.layout,
        &LoadSpec::transverse(1.0),
        &p.quad,
    )
    .unwrap();
    let eps = 0.05;
    let direct = solve_mixed_assembled(&p.asm, c, &f, eps).unwrap();
    let via = realize_via_theta(&p.asm, p.layout.block1, c, &f, eps, Method::Mixed).unwrap();
    assert_eq!(direct.primal, via.primal);
    assert_eq!(direct.aux, via.aux);

    let dg = realize_via_theta(&p.asm, p.layout.block1, c, &f, eps, Method::Dg).unwrap();
    let b1 = p.layout.block1;
    let cut = |m| leading_block(m, b1);
    let reference = solve_dg(
        &cut(&p.asm.primal.rho(c)),
        &cut(&p.asm.primal.gamma(c)),
        &cut(&p.asm.primal.tau(c)),
        &f[..b1],
        eps,
        DgScaling::Original,
        c,
    )
    .unwrap();
    assert!(max_diff(&dg.primal, &reference.primal) <= 1e-10 * norm2(&reference.primal));
}

#[test]
fn constitutive_row_holds_at_solution() {
    let (p, c, f) = plate_problem(SpaceOptions::mixed());
    let eps = 0.02;
    let s = solve_mixed_assembled(&p.asm, c, &f, eps).unwrap();
    let m = p.asm.mixed.as_ref().unwrap();
    let bx = spmv(&m.b, &s.primal);
    let cm = spmv(&m.c, s.aux.as_ref().unwrap());
    let e2 = split_epsilon_sq(eps).unwrap();
    let r: Vec<f64> = bx.iter().zip(&cm).map(|(a, b)| a - e2 * b).collect();
    assert!(norm2(&r) <= 1e-9 * norm2(&bx) + 1e-12);
}

#[test]
fn invariant_under_renumbering() {
    let (p, c, f) = plate_problem(SpaceOptions::mixed());
    let eps = 0.1;
    let m = p.asm.mixed.as_ref().unwrap();
    let e2 = split_epsilon_sq(eps).unwrap();
    let k = saddle_point(&p.asm.primal.a_theta(c, 1.0), &m.b, &m.c, e2);
    let n = k.rows();
    let mut rhs = f.clone();
    rhs.resize(n, 0.0);
    let base = solve_mixed_assembled(&p.asm, c, &f, eps).unwrap();
    let mut base_x = base.primal.clone();
    base_x.extend(base.aux.unwrap());
    // perm[new] = old: reverse, then interleave
    let perm: Vec<usize> = (0..n)
        .map(|i| if i % 2 == 0 { i / 2 } else { n - 1 - i / 2 })
        .collect();
    let kp = permute_symmetric(&k, &perm);
    let rp: Vec<f64> = perm.iter().map(|&o| rhs[o]).collect();
    let fac = shellfem::sparse::LdlFactor::new(&kp).unwrap();
    let (xp, _) = shellfem::sparse::solve_checked(&kp, &fac, &rp).unwrap();
    let mut back = vec![0.0; n];
    for (new, &old) in perm.iter().enumerate() {
        back[old] = xp[new];
    }
    assert!(max_diff(&back, &base_x) <= 1e-10 * norm2(&base_x));
}

#[test]
fn leading_block_extraction_is_symmetric() {
    let (p, c, _) = plate_problem(SpaceOptions::mixed());
    let a = leading_block(&p.asm.primal.a_theta(c, 100.0), p.layout.block1);
    let at = transpose(&a);
    assert!(shellfem::sparse::lin_comb(1.0, &a, -1.0, &at)
        .data()
        .iter()
        .all(|v| v.abs() <= 1e-12 * 1e4));
}

#[test]
fn epsilon_must_lie_in_unit_interval() {
    assert!(split_epsilon_sq(0.0).is_err());
    assert!(split_epsilon_sq(1.0).is_err());
    let e = 0.3f64;
    let e2 = split_epsilon_sq(e).unwrap();
    assert!((1.0 / (e * e) - (1.0 / e2 + 1.0)).abs() < 1e-12);
}

#[test]
fn eliminating_stresses_reproduces_primal_part() {
    let (p, c, f) = plate_problem(SpaceOptions::mixed());
    let eps = 0.1;
    let e2 = split_epsilon_sq(eps).unwrap();
    let m = p.asm.mixed.as_ref().unwrap();
    let a = to_dense(&p.asm.primal.a_theta(c, 1.0));
    let b = to_dense(&m.b);
    let cinv = to_dense(&m.c).try_inverse().unwrap();
    let schur = &a + (b.transpose() * &cinv * &b) / e2;
    let x = schur
        .lu()
        .solve(&nalgebra::DVector::from_vec(f.clone()))
        .unwrap();
    let s = solve_mixed(&p.asm.primal.a_theta(c, 1.0), &m.b, &m.c, &f, eps, c).unwrap();
    assert!(max_diff(&s.primal, x.as_slice()) <= 1e-9 * x.amax());
}
