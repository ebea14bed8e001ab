//! Discrete norms, their Gram matrices, the Korn equivalence diagnostic, the weak
//! stress norm and consistency residuals.
//!
//! All norms integrate over parameter-domain elements and edges (dx, ds) with
//! h_e^{-1}-weighted jump terms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::QuadratureOptions;
use crate::error::{Error, Result};
use crate::fe_space::{edge_quadrature, element_quadrature, DofLayout, FieldSource};
use crate::geometry::{GeometryEval, SurfaceChart};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::{
    dot, norm2, quad_form, solve_checked, spmv, spmv_t, LdlFactor, SpMat, TripletBuilder,
};
use crate::strain::{strains, FieldSample};

/// Squared pieces of the discrete norms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormSquares {
    pub rho: f64,
    pub gamma: f64,
    pub tau: f64,
    pub h: f64,
}

impl NormSquares {
    fn add(&mut self, o: &NormSquares) {
        self.rho += o.rho;
        self.gamma += o.gamma;
        self.tau += o.tau;
        self.h += o.h;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Energies {
    pub bending: f64,
    pub membrane: f64,
    pub shear: f64,
    /// ρ_h + ε^{-2}(γ_h + τ_h)
    pub total_original: f64,
    /// ϵ²ρ_h + (1 + ϵ²)(γ_h + τ_h)
    pub total_scaled: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormReport {
    pub rho_norm: f64,
    pub gamma_norm: f64,
    pub tau_norm: f64,
    pub a_norm: f64,
    pub h_norm: f64,
    pub v_norm: Option<f64>,
    pub weak_v_norm: Option<f64>,
    pub energies: Option<Energies>,
}

impl NormReport {
    pub fn from_squares(sq: &NormSquares) -> NormReport {
        NormReport {
            rho_norm: sq.rho.sqrt(),
            gamma_norm: sq.gamma.sqrt(),
            tau_norm: sq.tau.sqrt(),
            a_norm: (sq.rho + sq.gamma + sq.tau).sqrt(),
            h_norm: sq.h.sqrt(),
            ..Default::default()
        }
    }
}

fn sum_sq2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]
}

fn volume_squares(s: &FieldSample, g: &GeometryEval) -> NormSquares {
    let e = strains(s, g);
    let h = s.theta[0] * s.theta[0]
        + s.theta[1] * s.theta[1]
        + s.u[0] * s.u[0]
        + s.u[1] * s.u[1]
        + s.w * s.w
        + sum_sq2(&s.grad_theta)
        + sum_sq2(&s.grad_u)
        + s.grad_w[0] * s.grad_w[0]
        + s.grad_w[1] * s.grad_w[1];
    NormSquares {
        rho: sum_sq2(&e.rho),
        gamma: sum_sq2(&e.gamma),
        tau: e.tau[0] * e.tau[0] + e.tau[1] * e.tau[1],
        h,
    }
}

/// Edge jump pieces for the jump (or trace) `j` on an edge of type `tag` (None = interior).
fn edge_squares(j: &FieldSample, tag: Option<BoundaryTag>) -> NormSquares {
    let th = j.theta[0] * j.theta[0] + j.theta[1] * j.theta[1];
    let u = j.u[0] * j.u[0] + j.u[1] * j.u[1];
    let w = j.w * j.w;
    match tag {
        None => NormSquares {
            rho: th,
            gamma: u,
            tau: w,
            h: th + u + w,
        },
        Some(BoundaryTag::D) => NormSquares {
            rho: th,
            gamma: u,
            tau: w,
            h: u + w + th,
        },
        Some(BoundaryTag::S) => NormSquares {
            rho: 0.0,
            gamma: u,
            tau: w,
            h: u + w,
        },
        Some(BoundaryTag::F) => NormSquares::default(),
    }
}

/// Squared norms of a field, plus the per-element volume H_h pieces.
pub fn norm_squares(
    source: &dyn FieldSource,
    mesh: &Mesh,
    chart: &SurfaceChart,
    quad: &QuadratureOptions,
) -> Result<(NormSquares, Vec<f64>)> {
    let (rule, line) = quad.rules();
    let vols: Vec<NormSquares> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let eq = element_quadrature(mesh, chart, t, &rule)?;
            let mut acc = NormSquares::default();
            for k in 0..eq.xref.len() {
                let s = source.sample(t, eq.xref[k], eq.x[k]);
                let v = volume_squares(&s, &eq.geom[k]);
                acc.rho += eq.weights[k] * v.rho;
                acc.gamma += eq.weights[k] * v.gamma;
                acc.tau += eq.weights[k] * v.tau;
                acc.h += eq.weights[k] * v.h;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_element: Vec<f64> = vols.iter().map(|v| v.h).collect();
    let mut total = NormSquares::default();
    for v in &vols {
        total.add(v);
    }
    let maps: Vec<_> = (0..mesh.num_triangles())
        .map(|t| crate::poly::AffineMap::new(mesh.tri_points(t)))
        .collect();
    let interior: Vec<NormSquares> = mesh
        .interior_edges
        .par_iter()
        .map(|e| {
            let eqd = edge_quadrature(mesh, chart, e.left, e.left_local, &line)?;
            let mut acc = NormSquares::default();
            for k in 0..eqd.s.len() {
                let x = eqd.x[k];
                let mut j = source.sample(e.left, maps[e.left].to_reference(x), x);
                j.axpy(
                    -1.0,
                    &source.sample(e.right, maps[e.right].to_reference(x), x),
                );
                let v = edge_squares(&j, None);
                let w = eqd.weights[k] / eqd.length;
                acc.rho += w * v.rho;
                acc.gamma += w * v.gamma;
                acc.tau += w * v.tau;
                acc.h += w * v.h;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary: Vec<NormSquares> = mesh
        .boundary_edges
        .par_iter()
        .filter(|e| e.tag != BoundaryTag::F)
        .map(|e| {
            let eqd = edge_quadrature(mesh, chart, e.tri, e.local, &line)?;
            let mut acc = NormSquares::default();
            for k in 0..eqd.s.len() {
                let x = eqd.x[k];
                let j = source.sample(e.tri, maps[e.tri].to_reference(x), x);
                let v = edge_squares(&j, Some(e.tag));
                let w = eqd.weights[k] / eqd.length;
                acc.rho += w * v.rho;
                acc.gamma += w * v.gamma;
                acc.tau += w * v.tau;
                acc.h += w * v.h;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    for v in interior.iter().chain(&boundary) {
        total.add(v);
    }
    Ok((total, per_element))
}

/// Norms of a field given by any source (discrete, exact, or a difference).
pub fn discrete_norms(
    source: &dyn FieldSource,
    mesh: &Mesh,
    chart: &SurfaceChart,
    quad: &QuadratureOptions,
) -> Result<NormReport> {
    let (sq, _) = norm_squares(source, mesh, chart, quad)?;
    Ok(NormReport::from_squares(&sq))
}

/// Gram matrices of the squared norms over the primal blocks of a layout.
#[derive(Debug, Clone)]
pub struct NormGrams {
    pub q_rho: SpMat,
    pub q_gamma: SpMat,
    pub q_tau: SpMat,
    pub q_h: SpMat,
}

impl NormGrams {
    /// Gram of ‖·‖²_{a_h}.
    pub fn q_a(&self) -> SpMat {
        let s = crate::sparse::lin_comb(1.0, &self.q_rho, 1.0, &self.q_gamma);
        crate::sparse::lin_comb(1.0, &s, 1.0, &self.q_tau)
    }

    pub fn squares(&self, x: &[f64]) -> NormSquares {
        NormSquares {
            rho: quad_form(&self.q_rho, x),
            gamma: quad_form(&self.q_gamma, x),
            tau: quad_form(&self.q_tau, x),
            h: quad_form(&self.q_h, x),
        }
    }
}

struct LocalGram {
    dofs: Vec<usize>,
    m: [Vec<f64>; 4],
}

fn gram_sample(layout: &DofLayout, t: usize, xref: [f64; 2]) -> Vec<FieldSample> {
    layout
        .eval_local(t, xref)
        .into_iter()
        .map(|(f, v, g)| DofLayout::basis_sample(f, v, g))
        .collect()
}

fn bilinear_volume(
    a: &FieldSample,
    b: &FieldSample,
    ea: &crate::strain::StrainSample,
    eb: &crate::strain::StrainSample,
) -> [f64; 4] {
    let dd = |x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]| {
        x[0][0] * y[0][0] + x[0][1] * y[0][1] + x[1][0] * y[1][0] + x[1][1] * y[1][1]
    };
    let h = a.theta[0] * b.theta[0]
        + a.theta[1] * b.theta[1]
        + a.u[0] * b.u[0]
        + a.u[1] * b.u[1]
        + a.w * b.w
        + dd(&a.grad_theta, &b.grad_theta)
        + dd(&a.grad_u, &b.grad_u)
        + a.grad_w[0] * b.grad_w[0]
        + a.grad_w[1] * b.grad_w[1];
    [
        dd(&ea.rho, &eb.rho),
        dd(&ea.gamma, &eb.gamma),
        ea.tau[0] * eb.tau[0] + ea.tau[1] * eb.tau[1],
        h,
    ]
}

fn bilinear_edge(a: &FieldSample, b: &FieldSample, tag: Option<BoundaryTag>) -> [f64; 4] {
    let th = a.theta[0] * b.theta[0] + a.theta[1] * b.theta[1];
    let u = a.u[0] * b.u[0] + a.u[1] * b.u[1];
    let w = a.w * b.w;
    match tag {
        None | Some(BoundaryTag::D) => [th, u, w, th + u + w],
        Some(BoundaryTag::S) => [0.0, u, w, u + w],
        Some(BoundaryTag::F) => [0.0; 4],
    }
}

pub fn assemble_norm_grams(
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    quad: &QuadratureOptions,
) -> Result<NormGrams> {
    let (rule, line) = quad.rules();
    let vols: Vec<LocalGram> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let eq = element_quadrature(mesh, chart, t, &rule)?;
            let dofs = layout.local_dofs(t);
            let n = dofs.len();
            let mut m: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n * n]);
            for k in 0..eq.xref.len() {
                let s = gram_sample(layout, t, eq.xref[k]);
                let e: Vec<_> = s.iter().map(|x| strains(x, &eq.geom[k])).collect();
                for i in 0..n {
                    for j in 0..n {
                        let v = bilinear_volume(&s[i], &s[j], &e[i], &e[j]);
                        for c in 0..4 {
                            m[c][i * n + j] += eq.weights[k] * v[c];
                        }
                    }
                }
            }
            Ok(LocalGram { dofs, m })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut edges: Vec<(Vec<(usize, f64)>, Option<BoundaryTag>, usize, usize)> = Vec::new();
    for e in &mesh.interior_edges {
        edges.push((
            vec![(e.left, 1.0), (e.right, -1.0)],
            None,
            e.left,
            e.left_local,
        ));
    }
    for e in &mesh.boundary_edges {
        if e.tag != BoundaryTag::F {
            edges.push((vec![(e.tri, 1.0)], Some(e.tag), e.tri, e.local));
        }
    }
    let eds: Vec<LocalGram> = edges
        .par_iter()
        .map(|(sides, tag, t0, l0)| {
            let eqd = edge_quadrature(mesh, chart, *t0, *l0, &line)?;
            let mut dofs = Vec::new();
            for &(t, _) in sides {
                dofs.extend(layout.local_dofs(t));
            }
            let n = dofs.len();
            let mut m: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n * n]);
            for k in 0..eqd.s.len() {
                let x = eqd.x[k];
                let mut s: Vec<FieldSample> = Vec::with_capacity(n);
                for &(t, sign) in sides {
                    let xr = layout.maps[t].to_reference(x);
                    s.extend(
                        gram_sample(layout, t, xr)
                            .into_iter()
                            .map(|f| f.scaled(sign)),
                    );
                }
                let w = eqd.weights[k] / eqd.length;
                for i in 0..n {
                    for j in 0..n {
                        let v = bilinear_edge(&s[i], &s[j], *tag);
                        for c in 0..4 {
                            m[c][i * n + j] += w * v[c];
                        }
                    }
                }
            }
            Ok(LocalGram { dofs, m })
        })
        .collect::<Result<Vec<_>>>()?;
    let np = layout.n_primal();
    let mut tb: Vec<TripletBuilder> = (0..4).map(|_| TripletBuilder::new(np, np)).collect();
    for lg in vols.iter().chain(&eds) {
        let n = lg.dofs.len();
        for c in 0..4 {
            for i in 0..n {
                for j in 0..n {
                    tb[c].push(lg.dofs[i], lg.dofs[j], lg.m[c][i * n + j]);
                }
            }
        }
    }
    let mut it = tb.into_iter().map(|t| t.build());
    Ok(NormGrams {
        q_rho: it.next().unwrap(),
        q_gamma: it.next().unwrap(),
        q_tau: it.next().unwrap(),
        q_h: it.next().unwrap(),
    })
}

/// Gram of the auxiliary L² norm Σ_{αβ}‖N^{αβ}‖² + Σ_α‖η^α‖² (N^{12} counted twice).
pub fn assemble_v_gram(mesh: &Mesh, layout: &DofLayout) -> SpMat {
    let nv = mesh.num_vertices();
    let mut t = TripletBuilder::new(5 * nv, 5 * nv);
    for (tt, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.area(tt);
        for (i, &a) in tri.iter().enumerate() {
            for (j, &b) in tri.iter().enumerate() {
                let mass = if i == j { area / 6.0 } else { area / 12.0 };
                for c in 0..5 {
                    let mult = if c == 2 { 2.0 } else { 1.0 };
                    t.push(5 * a + c, 5 * b + c, mult * mass);
                }
            }
        }
    }
    debug_assert_eq!(layout.block3, 5 * nv);
    t.build()
}

/// Energies of a primal vector under the given (penalized) forms.
pub fn energies(r: &SpMat, g: &SpMat, t: &SpMat, x: &[f64], epsilon: f64) -> Result<Energies> {
    let e2 = crate::solve::split_epsilon_sq(epsilon)?;
    let bending = quad_form(r, x);
    let membrane = quad_form(g, x);
    let shear = quad_form(t, x);
    Ok(Energies {
        bending,
        membrane,
        shear,
        total_original: bending + (membrane + shear) / (epsilon * epsilon),
        total_scaled: e2 * bending + (1.0 + e2) * (membrane + shear),
    })
}

/// Factorization of Q_H, reused for dual norms.
pub struct DualNorm {
    q: SpMat,
    factor: LdlFactor,
}

impl DualNorm {
    pub fn new(q: &SpMat) -> Result<DualNorm> {
        let factor = LdlFactor::new(q)?;
        if !factor.is_positive_definite() {
            return Err(Error::Factorization(
                "norm Gram matrix is not positive definite".into(),
            ));
        }
        Ok(DualNorm {
            q: q.clone(),
            factor,
        })
    }

    /// sup_y (rᵀy)/‖y‖ = √(rᵀQ^{-1}r), and the maximizer Q^{-1}r.
    pub fn norm_and_maximizer(&self, r: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (y, _) = solve_checked(&self.q, &self.factor, r)?;
        Ok((dot(r, &y).max(0.0).sqrt(), y))
    }

    pub fn norm(&self, r: &[f64]) -> Result<f64> {
        Ok(self.norm_and_maximizer(r)?.0)
    }
}

/// sup over primal fields of b_h(N, η; ψ)/‖ψ‖_{H_h}: √(rᵀQ_H^{-1}r) with r = Bᵀ(N, η).
pub fn weak_vbar_norm(b: &SpMat, aux: &[f64], q_h: &DualNorm) -> Result<f64> {
    q_h.norm(&spmv_t(b, aux))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornReport {
    /// Extreme generalized eigenvalues of Q_a x = λ Q_H x.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Extremes of ‖x‖²_{a_h}/‖x‖²_{H_h} over random vectors.
    pub sample_min: f64,
    pub sample_max: f64,
    pub lanczos_steps: usize,
}

/// Largest eigenvalue of an operator self-adjoint in the `q` inner product, by
/// Lanczos with full reorthogonalization.
fn lanczos_max(
    op: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    q: &SpMat,
    n: usize,
    seed: u64,
) -> Result<(f64, usize)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nv = quad_form(q, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut qbasis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    let max_steps = n.min(300);
    for k in 0..max_steps {
        let qv = spmv(q, &v);
        basis.push(v.clone());
        qbasis.push(qv.clone());
        let mut w = op(&v)?;
        let a = dot(&qv, &w);
        alpha.push(a);
        // full reorthogonalization in the q inner product (twice for stability)
        for _ in 0..2 {
            for (b, qb) in basis.iter().zip(&qbasis) {
                let c = dot(qb, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let bnorm = quad_form(q, &w).max(0.0).sqrt();
        let ritz = tridiag_max(&alpha, &beta);
        if k > 3 && ((ritz - last).abs() <= 1e-10 * ritz.abs() || bnorm <= 1e-12 * ritz.abs()) {
            return Ok((ritz, k + 1));
        }
        last = ritz;
        if bnorm == 0.0 {
            return Ok((ritz, k + 1));
        }
        beta.push(bnorm);
        v = w.iter().map(|x| x / bnorm).collect();
    }
    Ok((last, max_steps))
}

fn tridiag_max(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut t = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = alpha[i];
        if i + 1 < n {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t.symmetric_eigenvalues().max()
}

/// Extreme generalized Rayleigh quotients between ‖·‖²_{a_h} and ‖·‖²_{H_h}.
pub fn korn_ratio(grams: &NormGrams, n_samples: usize, seed: u64) -> Result<KornReport> {
    use rand::Rng;
    let qa = grams.q_a();
    let qh = &grams.q_h;
    let n = qh.rows();
    let fh = LdlFactor::new(qh)?;
    let fa = LdlFactor::new(&qa)?;
    if !fh.is_positive_definite() {
        return Err(Error::Factorization("H_h Gram matrix is singular".into()));
    }
    if !fa.is_positive_definite() {
        return Err(Error::Factorization("a_h Gram matrix is singular".into()));
    }
    let op_max = |v: &[f64]| -> Result<Vec<f64>> { Ok(solve_checked(qh, &fh, &spmv(&qa, v))?.0) };
    let op_min = |v: &[f64]| -> Result<Vec<f64>> { Ok(solve_checked(&qa, &fa, &spmv(qh, v))?.0) };
    let (lmax, s1) = lanczos_max(&op_max, qh, n, seed)?;
    let (inv_min, s2) = lanczos_max(&op_min, qh, n, seed.wrapping_add(1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut smin = f64::INFINITY;
    let mut smax = 0.0f64;
    for _ in 0..n_samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let r = quad_form(&qa, &x) / quad_form(qh, &x);
        smin = smin.min(r);
        smax = smax.max(r);
    }
    Ok(KornReport {
        min_ratio: 1.0 / inv_min,
        max_ratio: lmax,
        sample_min: smin,
        sample_max: smax,
        lanczos_steps: s1 + s2,
    })
}

/// ‖r‖ in the dual of the H_h norm.
pub fn dual_h_norm(r: &[f64], q_h: &DualNorm) -> Result<f64> {
    q_h.norm(r)
}

pub fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a
    } else {
        a / b
    }
}

pub fn vec_norm(x: &[f64]) -> f64 {
    norm2(x)
}

/// Residuals of the discrete equations for a smooth solution `X`, in dual norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyResidual {
    /// Primal equation with `X` sampled at quadrature points (and, for the mixed
    /// method, its exact stresses), dual H_h norm.
    pub exact: f64,
    /// Constitutive equation with `X` and its exact stresses, dual V_h norm (mixed only).
    pub exact_constitutive: Option<f64>,
    /// Primal equation at the interpolant of `X` (and the nodal stress interpolant).
    pub interpolant: f64,
    /// Constitutive equation at the interpolants (mixed only).
    pub interpolant_constitutive: Option<f64>,
    /// H_h norm of the interpolant, for scale.
    pub interpolant_norm: f64,
}

/// Inputs shared by [`consistency_residual`].
pub struct ConsistencyProblem<'a> {
    pub mesh: &'a Mesh,
    pub chart: &'a SurfaceChart,
    pub layout: &'a DofLayout,
    pub material: &'a crate::geometry::Material,
    pub exact: &'a dyn FieldSource,
    pub epsilon: f64,
    pub penalty: f64,
    pub quad: QuadratureOptions,
}

/// Nodal values of ϵ^{-2}(a:γ(X), κμ a τ(X)) in block-3 order.
pub fn stress_interpolant(p: &ConsistencyProblem) -> Result<Vec<f64>> {
    let e2 = crate::solve::split_epsilon_sq(p.epsilon)?;
    let mut m = vec![0.0; p.layout.block3];
    let mut done = vec![false; p.mesh.num_vertices()];
    for (t, tri) in p.mesh.triangles.iter().enumerate() {
        for (i, &v) in tri.iter().enumerate() {
            if done[v] {
                continue;
            }
            done[v] = true;
            let x = p.mesh.vertices[v];
            let xref = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]][i];
            let g = p.chart.eval(x)?;
            let e = strains(&p.exact.sample(t, xref, x), &g);
            let n = p.material.stress(&g, &e.gamma);
            let q = p.material.shear_stress(&g, &e.tau);
            let vals = [n[0][0], n[1][1], n[0][1], q[0], q[1]];
            for c in 0..5 {
                m[5 * v + c] = vals[c] / e2;
            }
        }
    }
    Ok(m)
}

fn subtract(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
}

/// Consistency residuals of `method` for a smooth solution, with the load built so
/// that the solution satisfies the continuous problem for half-thickness ε.
pub fn consistency_residual(
    p: &ConsistencyProblem,
    method: crate::solve::Method,
) -> Result<ConsistencyResidual> {
    use crate::assembly::{apply_forms, assemble_forms, manufactured_load, stress_terms};
    use crate::fe_space::project_primal;
    use crate::solve::{split_epsilon_sq, Method};
    let (rule, line) = p.quad.rules();
    let w_mem = 1.0 / (p.epsilon * p.epsilon);
    let xi = project_primal(p.exact, p.mesh, p.chart, p.layout, &rule, &line)?;
    let asm = assemble_forms(p.mesh, p.chart, p.layout, p.material, &p.quad)?;
    let applied = apply_forms(p.mesh, p.chart, p.layout, p.material, p.exact, &p.quad)?;
    let f = manufactured_load(
        p.mesh, p.chart, p.layout, p.material, p.exact, w_mem, &p.quad,
    )?;
    let grams = assemble_norm_grams(p.mesh, p.chart, p.layout, &p.quad)?;
    let dual = DualNorm::new(&grams.q_h)?;
    let interpolant_norm = quad_form(&grams.q_h, &xi).max(0.0).sqrt();
    match method {
        Method::Dg => {
            let mut re = applied.a_theta(p.penalty, w_mem);
            subtract(&mut re, &f);
            let mut ri = spmv(&asm.primal.a_theta(p.penalty, w_mem), &xi);
            subtract(&mut ri, &f);
            Ok(ConsistencyResidual {
                exact: dual.norm(&re)?,
                exact_constitutive: None,
                interpolant: dual.norm(&ri)?,
                interpolant_constitutive: None,
                interpolant_norm,
            })
        }
        Method::Mixed => {
            let mixed = asm.mixed.as_ref().ok_or_else(|| {
                Error::InvalidParameter("mixed residual needs the auxiliary block".into())
            })?;
            let e2 = split_epsilon_sq(p.epsilon)?;
            let v = DualNorm::new(&assemble_v_gram(p.mesh, p.layout))?;
            let st = stress_terms(p.mesh, p.chart, p.layout, p.material, p.exact, &p.quad)?;

            let mut r1 = applied.a_theta(p.penalty, 1.0);
            for i in 0..r1.len() {
                r1[i] += st.coupling[i] / e2 - f[i];
            }
            let mut r2 = applied.b.clone().unwrap_or_default();
            subtract(&mut r2, &st.strain);

            let mi = stress_interpolant(p)?;
            let mut s1 = spmv(&asm.primal.a_theta(p.penalty, 1.0), &xi);
            let bt = spmv_t(&mixed.b, &mi);
            for i in 0..s1.len() {
                s1[i] += bt[i] - f[i];
            }
            let mut s2 = spmv(&mixed.b, &xi);
            let cm = spmv(&mixed.c, &mi);
            s2.iter_mut().zip(&cm).for_each(|(a, b)| *a -= e2 * b);
            Ok(ConsistencyResidual {
                exact: dual.norm(&r1)?,
                exact_constitutive: Some(v.norm(&r2)?),
                interpolant: dual.norm(&s1)?,
                interpolant_constitutive: Some(v.norm(&s2)?),
                interpolant_norm,
            })
        }
    }
}
