//! Assembly of the discrete bending, membrane and shear forms with their interior
//! penalty edge terms, the stress coupling and compliance blocks of the mixed
//! method, and the load functionals.
//!
//! Every form is split into a penalty-free part and a penalty part so that the
//! penalty constant can be changed without reassembly: `X = X0 + C·Xp`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::fe_space::{
    edge_quadrature, element_quadrature, DofLayout, EdgeQuad, ElementQuad, FieldSource,
};
use crate::geometry::{GeometryEval, Mat2, Material, SurfaceChart, Vec2};
use crate::mesh::{BoundaryTag, Mesh};
use crate::quadrature::{LineRule, TriangleRule};
use crate::sparse::{lin_comb, LdlFactor, SpMat, TripletBuilder};
use crate::strain::{strains, FieldSample, StrainSample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Triangle rule exactness degree.
    pub tri_degree: usize,
    /// Gauss points per edge.
    pub edge_points: usize,
}

impl Default for QuadratureOptions {
    fn default() -> QuadratureOptions {
        QuadratureOptions {
            tri_degree: 8,
            edge_points: 5,
        }
    }
}

impl QuadratureOptions {
    pub fn rules(&self) -> (TriangleRule, LineRule) {
        (
            TriangleRule::with_degree(self.tri_degree),
            LineRule::gauss(self.edge_points),
        )
    }
}

/// Penalty-free (`*0`) and penalty (`*p`) parts of the three primal forms.
#[derive(Debug, Clone)]
pub struct PrimalForms {
    pub r0: SpMat,
    pub rp: SpMat,
    pub g0: SpMat,
    pub gp: SpMat,
    pub t0: SpMat,
    pub tp: SpMat,
}

impl PrimalForms {
    pub fn rho(&self, penalty: f64) -> SpMat {
        lin_comb(1.0, &self.r0, penalty, &self.rp)
    }

    pub fn gamma(&self, penalty: f64) -> SpMat {
        lin_comb(1.0, &self.g0, penalty, &self.gp)
    }

    pub fn tau(&self, penalty: f64) -> SpMat {
        lin_comb(1.0, &self.t0, penalty, &self.tp)
    }

    /// ρ_h + ϑ(γ_h + τ_h)
    pub fn a_theta(&self, penalty: f64, theta: f64) -> SpMat {
        let gt = lin_comb(1.0, &self.gamma(penalty), 1.0, &self.tau(penalty));
        lin_comb(1.0, &self.rho(penalty), theta, &gt)
    }

    pub fn size(&self) -> usize {
        self.r0.rows()
    }
}

/// Stress coupling `B` (aux × primal) and compliance `C` (aux × aux).
#[derive(Debug, Clone)]
pub struct MixedBlocks {
    pub b: SpMat,
    pub c: SpMat,
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub primal: PrimalForms,
    pub mixed: Option<MixedBlocks>,
    /// Sup over quadrature points of |b| and |Γ| entries.
    pub coefficient_sup: (f64, f64),
}

/// Per-DOF data at one quadrature point.
#[derive(Debug, Clone, Copy, Default)]
struct DofPoint {
    s: FieldSample,
    e: StrainSample,
}

fn dof_points(layout: &DofLayout, t: usize, xref: [f64; 2], g: &GeometryEval) -> Vec<DofPoint> {
    layout
        .eval_local(t, xref)
        .into_iter()
        .map(|(f, v, gr)| {
            let s = DofLayout::basis_sample(f, v, gr);
            DofPoint {
                s,
                e: strains(&s, g),
            }
        })
        .collect()
}

/// Basis functions of `t` followed, when given, by a sample of the source field.
fn points_with_source(
    layout: &DofLayout,
    t: usize,
    xref: [f64; 2],
    x: Vec2,
    g: &GeometryEval,
    src: Option<&dyn FieldSource>,
) -> Vec<DofPoint> {
    let mut pts = dof_points(layout, t, xref, g);
    if let Some(src) = src {
        let s = src.sample(t, xref, x);
        pts.push(DofPoint {
            s,
            e: strains(&s, g),
        });
    }
    pts
}

/// Column index marking the source field in a local block.
const SOURCE: usize = usize::MAX;

#[inline]
fn ddot(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// m^{αβ} t_α n_β
#[inline]
fn flux(m: &Mat2, t: &Vec2, n: &Vec2) -> f64 {
    m[0][0] * t[0] * n[0] + m[0][1] * t[0] * n[1] + m[1][0] * t[1] * n[0] + m[1][1] * t[1] * n[1]
}

#[inline]
fn dot2(a: &Vec2, b: &Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// θ_α − b^δ_α u_δ
#[inline]
fn theta_minus_bu(s: &FieldSample, g: &GeometryEval, with_theta: bool) -> Vec2 {
    let bm = &g.b_mix;
    let mut t = [0.0; 2];
    for a in 0..2 {
        let th = if with_theta { s.theta[a] } else { 0.0 };
        t[a] = th - (bm[0][a] * s.u[0] + bm[1][a] * s.u[1]);
    }
    t
}

/// Auxiliary basis tensor/vector of component `c` scaled by `v`.
#[inline]
fn aux_basis(c: usize, v: f64) -> (Mat2, Vec2) {
    match c {
        0 => ([[v, 0.0], [0.0, 0.0]], [0.0; 2]),
        1 => ([[0.0, 0.0], [0.0, v]], [0.0; 2]),
        2 => ([[0.0, v], [v, 0.0]], [0.0; 2]),
        3 => ([[0.0; 2]; 2], [v, 0.0]),
        _ => ([[0.0; 2]; 2], [0.0, v]),
    }
}

/// Dense local block with global row/col indices.
#[derive(Debug, Clone, Default)]
struct Local {
    rows: Vec<usize>,
    cols: Vec<usize>,
    m: Vec<f64>,
}

impl Local {
    fn new(rows: Vec<usize>, cols: Vec<usize>) -> Local {
        let n = rows.len() * cols.len();
        Local {
            rows,
            cols,
            m: vec![0.0; n],
        }
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let nc = self.cols.len();
        self.m[i * nc + j] += v;
    }

    fn scatter(&self, t: &mut TripletBuilder) {
        let nc = self.cols.len();
        for (i, &r) in self.rows.iter().enumerate() {
            for (j, &c) in self.cols.iter().enumerate() {
                if c != SOURCE {
                    t.push(r, c, self.m[i * nc + j]);
                }
            }
        }
    }

    /// Adds the source columns into `out[row]`.
    fn scatter_source(&self, out: &mut [f64]) {
        let nc = self.cols.len();
        for (i, &r) in self.rows.iter().enumerate() {
            for (j, &c) in self.cols.iter().enumerate() {
                if c == SOURCE {
                    out[r] += self.m[i * nc + j];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
struct LocalSet {
    r0: Local,
    rp: Local,
    g0: Local,
    gp: Local,
    t0: Local,
    tp: Local,
    b: Option<Local>,
    c: Option<Local>,
    sup: (f64, f64),
}

/// Block-3-relative auxiliary indices of the vertices of `t`.
fn aux_rows(layout: &DofLayout, t: usize) -> Vec<usize> {
    let tri = layout.triangles[t];
    let mut v = Vec::with_capacity(15);
    for &vert in &tri {
        for c in 0..5 {
            v.push(5 * vert + c);
        }
    }
    v
}

fn volume_local(
    layout: &DofLayout,
    mat: &Material,
    t: usize,
    eq: &ElementQuad,
    src: Option<&dyn FieldSource>,
) -> LocalSet {
    let dofs = layout.local_dofs(t);
    let n = dofs.len();
    let mut cols = dofs.clone();
    if src.is_some() {
        cols.push(SOURCE);
    }
    let nc = cols.len();
    let mut set = LocalSet {
        r0: Local::new(dofs.clone(), cols.clone()),
        g0: Local::new(dofs.clone(), cols.clone()),
        t0: Local::new(dofs.clone(), cols.clone()),
        ..Default::default()
    };
    let with_aux = layout.block3 > 0;
    if with_aux {
        let rows = aux_rows(layout, t);
        set.b = Some(Local::new(rows.clone(), cols.clone()));
        if src.is_none() {
            set.c = Some(Local::new(rows.clone(), rows));
        }
    }
    let mut sup = (0.0f64, 0.0f64);
    for k in 0..eq.xref.len() {
        let g = &eq.geom[k];
        let cs = g.coefficient_sup();
        sup = (sup.0.max(cs.0), sup.1.max(cs.1));
        let dw = eq.weights[k] * g.sqrt_a;
        let pts = points_with_source(layout, t, eq.xref[k], eq.x[k], g, src);
        let mr: Vec<Mat2> = pts.iter().map(|p| mat.stress(g, &p.e.rho)).collect();
        let mg: Vec<Mat2> = pts.iter().map(|p| mat.stress(g, &p.e.gamma)).collect();
        let mt: Vec<Vec2> = pts.iter().map(|p| mat.shear_stress(g, &p.e.tau)).collect();
        for i in 0..n {
            for j in 0..nc {
                set.r0.add(i, j, dw / 3.0 * ddot(&mr[i], &pts[j].e.rho));
                set.g0.add(i, j, dw * ddot(&mg[i], &pts[j].e.gamma));
                set.t0.add(i, j, dw * dot2(&mt[i], &pts[j].e.tau));
            }
        }
        if with_aux {
            let b = set.b.as_mut().unwrap();
            let lam: [f64; 3] =
                std::array::from_fn(|i| crate::poly::Poly::lambda(i).eval(eq.xref[k]));
            let mut aux: Vec<(Mat2, Vec2)> = Vec::with_capacity(15);
            for l in lam {
                for c in 0..5 {
                    aux.push(aux_basis(c, l));
                }
            }
            for (a, (m, xi)) in aux.iter().enumerate() {
                for j in 0..nc {
                    b.add(
                        a,
                        j,
                        dw * (ddot(m, &pts[j].e.gamma) + dot2(xi, &pts[j].e.tau)),
                    );
                }
            }
            let Some(c) = set.c.as_mut() else { continue };
            for (a, (ma, xa)) in aux.iter().enumerate() {
                let cm = mat.compliance_apply(g, ma);
                let cx = mat.shear_compliance(g, xa);
                for (bb, (mb, xb)) in aux.iter().enumerate() {
                    c.add(a, bb, dw * (ddot(&cm, mb) + dot2(&cx, xb)));
                }
            }
        }
    }
    set.sup = sup;
    set
}

/// Edge-point data of one DOF: averaged fluxes and signed traces.
#[derive(Debug, Clone, Copy)]
struct EdgeDof {
    /// averaged a:ρ, a:γ, κμ a τ
    m_rho: Mat2,
    m_gam: Mat2,
    q: Vec2,
    /// signed traces
    t_rho: Vec2,
    theta: Vec2,
    u: Vec2,
    w: f64,
}

#[allow(clippy::too_many_arguments)]
fn edge_dofs(
    layout: &DofLayout,
    mat: &Material,
    t: usize,
    xref: [f64; 2],
    x: Vec2,
    g: &GeometryEval,
    sign: f64,
    avg: f64,
    with_theta: bool,
    src: Option<&dyn FieldSource>,
) -> Vec<EdgeDof> {
    points_with_source(layout, t, xref, x, g, src)
        .into_iter()
        .map(|p| {
            let mr = mat.stress(g, &p.e.rho);
            let mg = mat.stress(g, &p.e.gamma);
            let q = mat.shear_stress(g, &p.e.tau);
            let tr = theta_minus_bu(&p.s, g, with_theta);
            EdgeDof {
                m_rho: [
                    [avg * mr[0][0], avg * mr[0][1]],
                    [avg * mr[1][0], avg * mr[1][1]],
                ],
                m_gam: [
                    [avg * mg[0][0], avg * mg[0][1]],
                    [avg * mg[1][0], avg * mg[1][1]],
                ],
                q: [avg * q[0], avg * q[1]],
                t_rho: [sign * tr[0], sign * tr[1]],
                theta: [sign * p.s.theta[0], sign * p.s.theta[1]],
                u: [sign * p.s.u[0], sign * p.s.u[1]],
                w: sign * p.s.w,
            }
        })
        .collect()
}

/// Which terms an edge carries.
#[derive(Debug, Clone, Copy)]
struct EdgeTerms {
    /// θ appears in the bending consistency term and θ is penalized
    theta: bool,
    /// membrane/shear consistency terms and u, w penalties
    displacement: bool,
}

fn edge_terms(tag: Option<BoundaryTag>) -> EdgeTerms {
    match tag {
        None | Some(BoundaryTag::D) => EdgeTerms {
            theta: true,
            displacement: true,
        },
        Some(BoundaryTag::S) => EdgeTerms {
            theta: false,
            displacement: true,
        },
        Some(BoundaryTag::F) => EdgeTerms {
            theta: false,
            displacement: false,
        },
    }
}

/// Edge contributions. `sides` lists (element, sign); one side for boundary edges.
fn edge_local(
    layout: &DofLayout,
    mat: &Material,
    eqd: &EdgeQuad,
    sides: &[(usize, f64)],
    tag: Option<BoundaryTag>,
    src: Option<&dyn FieldSource>,
) -> LocalSet {
    let terms = edge_terms(tag);
    // columns: each side's basis functions, then that side's source sample
    let mut dofs = Vec::new();
    let mut cols = Vec::new();
    let mut row_pos = Vec::new();
    for &(t, _) in sides {
        let ld = layout.local_dofs(t);
        row_pos.extend(cols.len()..cols.len() + ld.len());
        dofs.extend(ld.iter().copied());
        cols.extend(ld);
        if src.is_some() {
            cols.push(SOURCE);
        }
    }
    let nc = cols.len();
    let local = || Local::new(dofs.clone(), cols.clone());
    let mut set = LocalSet {
        r0: local(),
        rp: local(),
        g0: local(),
        gp: local(),
        t0: local(),
        tp: local(),
        ..Default::default()
    };
    let with_aux = layout.block3 > 0 && terms.displacement;
    let (t_left, _) = sides[0];
    if with_aux {
        set.b = Some(Local::new(aux_rows(layout, t_left), cols.clone()));
    }
    let avg = 1.0 / sides.len() as f64;
    let nbar = eqd.nbar;
    let inv_h = 1.0 / eqd.length;
    for k in 0..eqd.s.len() {
        let g = &eqd.geom[k];
        let x = eqd.x[k];
        let ds = eqd.weights[k];
        let dsa = ds * g.sqrt_a;
        let mut d: Vec<EdgeDof> = Vec::with_capacity(nc);
        for &(t, sign) in sides {
            let xref = layout.maps[t].to_reference(x);
            d.extend(edge_dofs(
                layout,
                mat,
                t,
                xref,
                x,
                g,
                sign,
                avg,
                terms.theta,
                src,
            ));
        }
        for (i, &pi) in row_pos.iter().enumerate() {
            let di = &d[pi];
            for j in 0..nc {
                let dj = &d[j];
                if terms.theta || terms.displacement {
                    // bending consistency: {a:ρ} paired with [θ − b u] (D, interior) or [−b u] (S)
                    let v = flux(&di.m_rho, &dj.t_rho, &nbar) + flux(&dj.m_rho, &di.t_rho, &nbar);
                    set.r0.add(i, j, -dsa / 3.0 * v);
                }
                if terms.theta {
                    set.rp.add(i, j, ds * inv_h * dot2(&di.theta, &dj.theta));
                }
                if terms.displacement {
                    let v = flux(&di.m_gam, &dj.u, &nbar) + flux(&dj.m_gam, &di.u, &nbar);
                    set.g0.add(i, j, -dsa * v);
                    set.gp
                        .add(i, j, ds * inv_h * (dot2(&di.u, &dj.u) + di.w * dj.w));
                    let v = dot2(&di.q, &nbar) * dj.w + dot2(&dj.q, &nbar) * di.w;
                    set.t0.add(i, j, -dsa * v);
                    set.tp.add(i, j, ds * inv_h * di.w * dj.w);
                }
            }
        }
        if with_aux {
            let b = set.b.as_mut().unwrap();
            let xl = layout.maps[t_left].to_reference(x);
            let lam: [f64; 3] = std::array::from_fn(|i| crate::poly::Poly::lambda(i).eval(xl));
            let mut a = 0;
            for l in lam {
                for c in 0..5 {
                    let (m, xi) = aux_basis(c, l);
                    if l != 0.0 {
                        for j in 0..nc {
                            let v = flux(&m, &d[j].u, &nbar) + dot2(&xi, &nbar) * d[j].w;
                            b.add(a, j, -dsa * v);
                        }
                    }
                    a += 1;
                }
            }
        }
    }
    set
}

/// Assembles every block of the discrete problem over `layout`.
pub fn assemble_forms(
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    mat: &Material,
    quad: &QuadratureOptions,
) -> Result<Assembled> {
    let (rule, line) = quad.rules();
    let vols: Vec<LocalSet> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let eq = element_quadrature(mesh, chart, t, &rule)?;
            Ok(volume_local(layout, mat, t, &eq, None))
        })
        .collect::<Result<Vec<_>>>()?;
    let interior: Vec<LocalSet> = mesh
        .interior_edges
        .par_iter()
        .map(|e| {
            let eqd = edge_quadrature(mesh, chart, e.left, e.left_local, &line)?;
            Ok(edge_local(
                layout,
                mat,
                &eqd,
                &[(e.left, 1.0), (e.right, -1.0)],
                None,
                None,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary: Vec<LocalSet> = mesh
        .boundary_edges
        .par_iter()
        .filter(|e| e.tag != BoundaryTag::F)
        .map(|e| {
            let eqd = edge_quadrature(mesh, chart, e.tri, e.local, &line)?;
            Ok(edge_local(
                layout,
                mat,
                &eqd,
                &[(e.tri, 1.0)],
                Some(e.tag),
                None,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let np = layout.n_primal();
    let na = layout.block3;
    let mut tb: Vec<TripletBuilder> = (0..6).map(|_| TripletBuilder::new(np, np)).collect();
    let mut bb = TripletBuilder::new(na, np);
    let mut cb = TripletBuilder::new(na, na);
    let mut sup = (0.0f64, 0.0f64);
    for set in vols.iter().chain(&interior).chain(&boundary) {
        for (k, l) in [&set.r0, &set.rp, &set.g0, &set.gp, &set.t0, &set.tp]
            .iter()
            .enumerate()
        {
            l.scatter(&mut tb[k]);
        }
        if let Some(b) = &set.b {
            b.scatter(&mut bb);
        }
        if let Some(c) = &set.c {
            c.scatter(&mut cb);
        }
        sup = (sup.0.max(set.sup.0), sup.1.max(set.sup.1));
    }
    let mut it = tb.into_iter().map(|t| t.build());
    let primal = PrimalForms {
        r0: it.next().unwrap(),
        rp: it.next().unwrap(),
        g0: it.next().unwrap(),
        gp: it.next().unwrap(),
        t0: it.next().unwrap(),
        tp: it.next().unwrap(),
    };
    let mixed = if na > 0 {
        Some(MixedBlocks {
            b: bb.build(),
            c: cb.build(),
        })
    } else {
        None
    };
    Ok(Assembled {
        primal,
        mixed,
        coefficient_sup: sup,
    })
}

/// The forms of [`assemble_forms`] applied to a field sampled at quadrature points:
/// entry `i` of each vector is the form evaluated at (field, basis function `i`).
#[derive(Debug, Clone)]
pub struct AppliedForms {
    pub r0: Vec<f64>,
    pub rp: Vec<f64>,
    pub g0: Vec<f64>,
    pub gp: Vec<f64>,
    pub t0: Vec<f64>,
    pub tp: Vec<f64>,
    /// b_h(basis function of block 3; field), block-3-relative.
    pub b: Option<Vec<f64>>,
}

impl AppliedForms {
    /// (ρ_h + ϑ(γ_h + τ_h))(field, ·)
    pub fn a_theta(&self, penalty: f64, theta: f64) -> Vec<f64> {
        (0..self.r0.len())
            .map(|i| {
                self.r0[i]
                    + penalty * self.rp[i]
                    + theta
                        * (self.g0[i] + penalty * self.gp[i] + self.t0[i] + penalty * self.tp[i])
            })
            .collect()
    }
}

pub fn apply_forms(
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    mat: &Material,
    field: &dyn FieldSource,
    quad: &QuadratureOptions,
) -> Result<AppliedForms> {
    let (rule, line) = quad.rules();
    let src = Some(field);
    let mut sets: Vec<LocalSet> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let eq = element_quadrature(mesh, chart, t, &rule)?;
            Ok(volume_local(layout, mat, t, &eq, src))
        })
        .collect::<Result<Vec<_>>>()?;
    sets.extend(
        mesh.interior_edges
            .par_iter()
            .map(|e| {
                let eqd = edge_quadrature(mesh, chart, e.left, e.left_local, &line)?;
                Ok(edge_local(
                    layout,
                    mat,
                    &eqd,
                    &[(e.left, 1.0), (e.right, -1.0)],
                    None,
                    src,
                ))
            })
            .collect::<Result<Vec<_>>>()?,
    );
    sets.extend(
        mesh.boundary_edges
            .par_iter()
            .filter(|e| e.tag != BoundaryTag::F)
            .map(|e| {
                let eqd = edge_quadrature(mesh, chart, e.tri, e.local, &line)?;
                Ok(edge_local(
                    layout,
                    mat,
                    &eqd,
                    &[(e.tri, 1.0)],
                    Some(e.tag),
                    src,
                ))
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let np = layout.n_primal();
    let mut v: Vec<Vec<f64>> = vec![vec![0.0; np]; 6];
    let mut b = (layout.block3 > 0).then(|| vec![0.0; layout.block3]);
    for set in &sets {
        for (k, l) in [&set.r0, &set.rp, &set.g0, &set.gp, &set.t0, &set.tp]
            .iter()
            .enumerate()
        {
            l.scatter_source(&mut v[k]);
        }
        if let (Some(out), Some(l)) = (b.as_mut(), set.b.as_ref()) {
            l.scatter_source(out);
        }
    }
    let mut it = v.into_iter();
    let mut next = || it.next().unwrap();
    Ok(AppliedForms {
        r0: next(),
        rp: next(),
        g0: next(),
        gp: next(),
        t0: next(),
        tp: next(),
        b,
    })
}

pub fn assemble_rho_h(asm: &Assembled, penalty: f64) -> SpMat {
    asm.primal.rho(penalty)
}

pub fn assemble_gamma_h(asm: &Assembled, penalty: f64) -> SpMat {
    asm.primal.gamma(penalty)
}

pub fn assemble_tau_h(asm: &Assembled, penalty: f64) -> SpMat {
    asm.primal.tau(penalty)
}

pub fn assemble_a_theta(asm: &Assembled, penalty: f64, theta: f64) -> SpMat {
    asm.primal.a_theta(penalty, theta)
}

/// Default penalty 10μ(1 + |b|²∞ + |Γ|²∞).
pub fn default_penalty(asm: &Assembled, mat: &Material) -> f64 {
    let (b, g) = asm.coefficient_sup;
    10.0 * mat.mu * (1.0 + b * b + g * g)
}

pub const MAX_PENALTY_DOUBLINGS: usize = 10;

/// Doubles the penalty from `start` until ρ_h + γ_h + τ_h factors with positive pivots.
/// Returns the accepted penalty and the number of doublings.
pub fn probe_penalty(forms: &PrimalForms, start: f64) -> Result<(f64, usize)> {
    let mut c = start;
    for k in 0..=MAX_PENALTY_DOUBLINGS {
        let a = forms.a_theta(c, 1.0);
        if let Ok(f) = LdlFactor::new(&a) {
            if f.is_positive_definite() {
                return Ok((c, k));
            }
        }
        if k < MAX_PENALTY_DOUBLINGS {
            c *= 2.0;
        }
    }
    Err(Error::PenaltyProbe {
        doublings: MAX_PENALTY_DOUBLINGS,
        penalty: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeIntegrand {
    /// ∫_ẽ f: Gauss weights times the metric arc-length factor.
    ScalarArcLength,
    /// ∫_ẽ f^α n_α: Gauss weights times √a, paired with the constant n̄.
    VectorNormal,
}

/// Points and weights turning an integral over the curved image of a straight
/// parameter edge into a weighted sum.
pub fn quadrature_edge_transform(
    mesh: &Mesh,
    chart: &SurfaceChart,
    t: usize,
    local: usize,
    kind: EdgeIntegrand,
    rule: &LineRule,
) -> Result<Vec<(Vec2, f64)>> {
    let eqd = edge_quadrature(mesh, chart, t, local, rule)?;
    Ok((0..eqd.s.len())
        .map(|k| {
            let factor = match kind {
                EdgeIntegrand::ScalarArcLength => eqd.geom[k].arc_factor(eqd.tangent),
                EdgeIntegrand::VectorNormal => eqd.geom[k].sqrt_a,
            };
            (eqd.x[k], eqd.weights[k] * factor)
        })
        .collect())
}

/// |∫_τ̃ f^α|_α − ∫_∂τ f^α n̄_α √a ds| for a vector field given by value and
/// gradient `d[α][β] = ∂_β f^α`.
pub fn green_identity_check(
    mesh: &Mesh,
    chart: &SurfaceChart,
    t: usize,
    f: &dyn Fn(Vec2) -> (Vec2, Mat2),
    quad: &QuadratureOptions,
) -> Result<f64> {
    let (rule, line) = quad.rules();
    let eq = element_quadrature(mesh, chart, t, &rule)?;
    let mut vol = 0.0;
    for k in 0..eq.xref.len() {
        let g = &eq.geom[k];
        let (v, d) = f(eq.x[k]);
        let mut div = d[0][0] + d[1][1];
        for a in 0..2 {
            for b in 0..2 {
                div += g.christoffel[a][a][b] * v[b];
            }
        }
        vol += eq.weights[k] * g.sqrt_a * div;
    }
    let mut bnd = 0.0;
    for l in 0..3 {
        let eg = mesh.edge_geometry(t, l);
        for (x, w) in
            quadrature_edge_transform(mesh, chart, t, l, EdgeIntegrand::VectorNormal, &line)?
        {
            let (v, _) = f(x);
            bnd += w * dot2(&v, &eg.nbar);
        }
    }
    Ok((vol - bnd).abs())
}

/// Surface and boundary loads: p^α, p³ on Ω; q^α, q³, r^α on free edges; r^α on
/// soft simply supported edges.
#[derive(Debug, Clone, Default)]
pub struct LoadSpec {
    pub p: [Option<Expr>; 3],
    pub q: [Option<Expr>; 3],
    pub r: [Option<Expr>; 2],
}

impl LoadSpec {
    pub fn transverse(p3: f64) -> LoadSpec {
        LoadSpec {
            p: [None, None, Some(Expr::num(p3))],
            ..Default::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p
            .iter()
            .chain(&self.q)
            .chain(&self.r)
            .all(|e| e.as_ref().is_none_or(|e| e.is_zero()))
    }

    /// Scales every load by `s`.
    pub fn scaled(&self, s: f64) -> LoadSpec {
        let sc = |e: &Option<Expr>| {
            e.as_ref()
                .map(|e| crate::expr::mul(Expr::num(s), e.clone()))
        };
        LoadSpec {
            p: std::array::from_fn(|i| sc(&self.p[i])),
            q: std::array::from_fn(|i| sc(&self.q[i])),
            r: std::array::from_fn(|i| sc(&self.r[i])),
        }
    }
}

fn compile_opt(e: &Option<Expr>) -> Option<Program> {
    e.as_ref().filter(|e| !e.is_zero()).map(|e| e.compile())
}

fn eval_checked(p: &Option<Program>, x: Vec2) -> Result<f64> {
    match p {
        None => Ok(0.0),
        Some(p) => {
            let v = p.eval(x[0], x[1]);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain(format!(
                    "load is not finite at ({}, {})",
                    x[0], x[1]
                )))
            }
        }
    }
}

/// Load functional ⟨f; φ, v, z⟩ over the primal blocks.
pub fn assemble_load(
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    loads: &LoadSpec,
    quad: &QuadratureOptions,
) -> Result<Vec<f64>> {
    let (rule, line) = quad.rules();
    let p: [Option<Program>; 3] = std::array::from_fn(|i| compile_opt(&loads.p[i]));
    let q: [Option<Program>; 3] = std::array::from_fn(|i| compile_opt(&loads.q[i]));
    let r: [Option<Program>; 2] = std::array::from_fn(|i| compile_opt(&loads.r[i]));
    let mut f = vec![0.0; layout.n_primal()];
    let has_p = p.iter().any(|x| x.is_some());
    if has_p {
        let locals: Vec<Vec<f64>> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let eq = element_quadrature(mesh, chart, t, &rule)?;
                let mut loc = vec![0.0; layout.local_size(t)];
                for k in 0..eq.xref.len() {
                    let dw = eq.weights[k] * eq.geom[k].sqrt_a;
                    let pv = [
                        eval_checked(&p[0], eq.x[k])?,
                        eval_checked(&p[1], eq.x[k])?,
                        eval_checked(&p[2], eq.x[k])?,
                    ];
                    for (i, (fld, v, gr)) in
                        layout.eval_local(t, eq.xref[k]).into_iter().enumerate()
                    {
                        let s = DofLayout::basis_sample(fld, v, gr);
                        loc[i] += dw * (pv[0] * s.u[0] + pv[1] * s.u[1] + pv[2] * s.w);
                    }
                }
                Ok(loc)
            })
            .collect::<Result<Vec<_>>>()?;
        for (t, loc) in locals.iter().enumerate() {
            for (i, v) in loc.iter().enumerate() {
                f[layout.global(t, i)] += v;
            }
        }
    }
    for e in &mesh.boundary_edges {
        let (qa, ra) = match e.tag {
            BoundaryTag::F => (true, true),
            BoundaryTag::S => (false, true),
            BoundaryTag::D => continue,
        };
        if !(qa && q.iter().any(|x| x.is_some())) && !(ra && r.iter().any(|x| x.is_some())) {
            continue;
        }
        let eqd = edge_quadrature(mesh, chart, e.tri, e.local, &line)?;
        for k in 0..eqd.s.len() {
            let x = eqd.x[k];
            let dw = eqd.weights[k] * eqd.geom[k].arc_factor(eqd.tangent);
            let qv = if qa {
                [
                    eval_checked(&q[0], x)?,
                    eval_checked(&q[1], x)?,
                    eval_checked(&q[2], x)?,
                ]
            } else {
                [0.0; 3]
            };
            let rv = [eval_checked(&r[0], x)?, eval_checked(&r[1], x)?];
            for (i, (fld, v, gr)) in layout
                .eval_local(e.tri, eqd.xref[k])
                .into_iter()
                .enumerate()
            {
                let s = DofLayout::basis_sample(fld, v, gr);
                let val = qv[0] * s.u[0]
                    + qv[1] * s.u[1]
                    + qv[2] * s.w
                    + rv[0] * s.theta[0]
                    + rv[1] * s.theta[1];
                f[layout.global(e.tri, i)] += dw * val;
            }
        }
    }
    Ok(f)
}

/// Load functional for which the smooth field `x` solves the continuous problem
/// ρ(x; ψ) + w_mem·[γ(x; ψ) + τ(x; ψ)] = ⟨f; ψ⟩ with the boundary conditions
/// implied by the tags: the elementwise volume forms minus the element-boundary
/// fluxes that are not natural on the edge type.
pub fn manufactured_load(
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    mat: &Material,
    x: &dyn FieldSource,
    w_mem: f64,
    quad: &QuadratureOptions,
) -> Result<Vec<f64>> {
    let (rule, line) = quad.rules();
    let vols: Vec<(usize, Vec<f64>)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let eq = element_quadrature(mesh, chart, t, &rule)?;
            let mut loc = vec![0.0; layout.local_size(t)];
            for k in 0..eq.xref.len() {
                let g = &eq.geom[k];
                let dw = eq.weights[k] * g.sqrt_a;
                let xs = x.sample(t, eq.xref[k], eq.x[k]);
                let xe = strains(&xs, g);
                let mr = mat.stress(g, &xe.rho);
                let mg = mat.stress(g, &xe.gamma);
                let q = mat.shear_stress(g, &xe.tau);
                for (i, p) in dof_points(layout, t, eq.xref[k], g).iter().enumerate() {
                    loc[i] += dw
                        * (ddot(&mr, &p.e.rho) / 3.0
                            + w_mem * (ddot(&mg, &p.e.gamma) + dot2(&q, &p.e.tau)));
                }
            }
            Ok((t, loc))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut f = vec![0.0; layout.n_primal()];
    for (t, loc) in vols {
        for (i, v) in loc.iter().enumerate() {
            f[layout.global(t, i)] += v;
        }
    }
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
    let contribs: Vec<Vec<(usize, f64)>> = edges
        .par_iter()
        .map(|(sides, tag, t0, l0)| {
            let terms = edge_terms(*tag);
            let eqd = edge_quadrature(mesh, chart, *t0, *l0, &line)?;
            let mut out: Vec<(usize, f64)> = Vec::new();
            let avg = 1.0 / sides.len() as f64;
            for k in 0..eqd.s.len() {
                let g = &eqd.geom[k];
                let dsa = eqd.weights[k] * g.sqrt_a;
                let xp = eqd.x[k];
                // averaged fluxes of the smooth field
                let mut mr = [[0.0; 2]; 2];
                let mut mg = [[0.0; 2]; 2];
                let mut q = [0.0; 2];
                for &(t, _) in sides {
                    let xref = layout.maps[t].to_reference(xp);
                    let e = strains(&x.sample(t, xref, xp), g);
                    let a = mat.stress(g, &e.rho);
                    let b = mat.stress(g, &e.gamma);
                    let c = mat.shear_stress(g, &e.tau);
                    for i in 0..2 {
                        q[i] += avg * c[i];
                        for j in 0..2 {
                            mr[i][j] += avg * a[i][j];
                            mg[i][j] += avg * b[i][j];
                        }
                    }
                }
                for &(t, sign) in sides {
                    let xref = layout.maps[t].to_reference(xp);
                    for (i, p) in dof_points(layout, t, xref, g).iter().enumerate() {
                        let tr = theta_minus_bu(&p.s, g, terms.theta);
                        let mut v = flux(&mr, &tr, &eqd.nbar) / 3.0;
                        if terms.displacement {
                            v += w_mem
                                * (flux(&mg, &p.s.u, &eqd.nbar) + dot2(&q, &eqd.nbar) * p.s.w);
                        }
                        out.push((layout.global(t, i), -dsa * sign * v));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    for c in contribs {
        for (i, v) in c {
            f[i] += v;
        }
    }
    Ok(f)
}

/// Mixed-method terms driven by the smooth stresses σ(x) = (a:γ(x), κμ a τ(x)) of a
/// field `x`: `coupling[i] = b_h(σ(x); ψ_i)` over primal basis functions and
/// `strain[k] = ∫ (γ(x):N_k + τ(x)·η_k)` over auxiliary basis functions (block-3 relative).
#[derive(Debug, Clone)]
pub struct StressTerms {
    pub coupling: Vec<f64>,
    pub strain: Vec<f64>,
}

pub fn stress_terms(
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    mat: &Material,
    x: &dyn FieldSource,
    quad: &QuadratureOptions,
) -> Result<StressTerms> {
    let (rule, line) = quad.rules();
    let vols: Vec<(Vec<f64>, Vec<f64>)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let eq = element_quadrature(mesh, chart, t, &rule)?;
            let mut loc = vec![0.0; layout.local_size(t)];
            let mut aux = vec![0.0; 15];
            for k in 0..eq.xref.len() {
                let g = &eq.geom[k];
                let dw = eq.weights[k] * g.sqrt_a;
                let e = strains(&x.sample(t, eq.xref[k], eq.x[k]), g);
                let m = mat.stress(g, &e.gamma);
                let q = mat.shear_stress(g, &e.tau);
                for (i, p) in dof_points(layout, t, eq.xref[k], g).iter().enumerate() {
                    loc[i] += dw * (ddot(&m, &p.e.gamma) + dot2(&q, &p.e.tau));
                }
                for (v, l) in (0..3)
                    .map(|i| crate::poly::Poly::lambda(i).eval(eq.xref[k]))
                    .enumerate()
                {
                    for c in 0..5 {
                        let (n, eta) = aux_basis(c, l);
                        aux[5 * v + c] += dw * (ddot(&e.gamma, &n) + dot2(&e.tau, &eta));
                    }
                }
            }
            Ok((loc, aux))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coupling = vec![0.0; layout.n_primal()];
    let mut strain = vec![0.0; 5 * mesh.num_vertices()];
    for (t, (loc, aux)) in vols.iter().enumerate() {
        for (i, v) in loc.iter().enumerate() {
            coupling[layout.global(t, i)] += v;
        }
        for (r, v) in aux_rows(layout, t).into_iter().zip(aux) {
            strain[r] += v;
        }
    }
    let mut edges: Vec<(Vec<(usize, f64)>, usize, usize)> = Vec::new();
    for e in &mesh.interior_edges {
        edges.push((vec![(e.left, 1.0), (e.right, -1.0)], e.left, e.left_local));
    }
    for e in &mesh.boundary_edges {
        if e.tag != BoundaryTag::F {
            edges.push((vec![(e.tri, 1.0)], e.tri, e.local));
        }
    }
    let contribs: Vec<Vec<(usize, f64)>> = edges
        .par_iter()
        .map(|(sides, t0, l0)| {
            let eqd = edge_quadrature(mesh, chart, *t0, *l0, &line)?;
            let avg = 1.0 / sides.len() as f64;
            let mut out = Vec::new();
            for k in 0..eqd.s.len() {
                let g = &eqd.geom[k];
                let dsa = eqd.weights[k] * g.sqrt_a;
                let xp = eqd.x[k];
                let mut m = [[0.0; 2]; 2];
                let mut q = [0.0; 2];
                for &(t, _) in sides {
                    let e = strains(&x.sample(t, layout.maps[t].to_reference(xp), xp), g);
                    let a = mat.stress(g, &e.gamma);
                    let b = mat.shear_stress(g, &e.tau);
                    for i in 0..2 {
                        q[i] += avg * b[i];
                        for j in 0..2 {
                            m[i][j] += avg * a[i][j];
                        }
                    }
                }
                for &(t, sign) in sides {
                    let xref = layout.maps[t].to_reference(xp);
                    for (i, p) in dof_points(layout, t, xref, g).iter().enumerate() {
                        let v = flux(&m, &p.s.u, &eqd.nbar) + dot2(&q, &eqd.nbar) * p.s.w;
                        out.push((layout.global(t, i), -dsa * sign * v));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    for c in contribs {
        for (i, v) in c {
            coupling[i] += v;
        }
    }
    Ok(StressTerms { coupling, strain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::{build_dof_layout, SpaceOptions};
    use crate::mesh::{generate_rect_mesh, RectMeshSpec, SideTags};
    use crate::sparse::{asymmetry, bilinear, quad_form};

    fn mesh(tags: SideTags, n: usize, x1: [f64; 2], x2: [f64; 2]) -> Mesh {
        generate_rect_mesh(&RectMeshSpec {
            x1,
            x2,
            nx: n,
            ny: n,
            grading_x1: None,
            grading_x2: None,
            tags,
        })
        .unwrap()
    }

    #[test]
    fn forms_are_symmetric_and_penalty_split_is_linear() {
        let chart = SurfaceChart::cylinder(1.5);
        let mut tags = SideTags::all(BoundaryTag::D);
        tags.top = BoundaryTag::F;
        tags.right = BoundaryTag::S;
        let m = mesh(tags, 3, [0.0, 1.0], [0.0, 1.0]);
        let layout = build_dof_layout(&m, &chart, SpaceOptions::mixed()).unwrap();
        let asm = assemble_forms(
            &m,
            &chart,
            &layout,
            &Material::default(),
            &QuadratureOptions::default(),
        )
        .unwrap();
        for mtx in [
            &asm.primal.r0,
            &asm.primal.rp,
            &asm.primal.g0,
            &asm.primal.gp,
            &asm.primal.t0,
            &asm.primal.tp,
        ] {
            assert!(asymmetry(mtx) < 1e-12);
        }
        let mixed = asm.mixed.as_ref().unwrap();
        assert!(asymmetry(&mixed.c) < 1e-12);
        let a2 = asm.primal.a_theta(7.0, 2.0);
        let a1 = asm.primal.a_theta(7.0, 1.0);
        let d = lin_comb(1.0, &a2, -1.0, &a1);
        let gt = lin_comb(1.0, &asm.primal.gamma(7.0), 1.0, &asm.primal.tau(7.0));
        let diff = lin_comb(1.0, &d, -1.0, &gt);
        assert!(diff.data().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn single_jump_penalty() {
        let chart = SurfaceChart::plate();
        let m = mesh(SideTags::all(BoundaryTag::F), 1, [0.0, 1.0], [0.0, 1.0]);
        let layout = build_dof_layout(&m, &chart, SpaceOptions::dg()).unwrap();
        let asm = assemble_forms(
            &m,
            &chart,
            &layout,
            &Material::default(),
            &QuadratureOptions::default(),
        )
        .unwrap();
        // θ1 = 1 on element 0, 0 on element 1: jump of size 1 on the diagonal of length √2
        let mut x = vec![0.0; layout.n_primal()];
        for i in 0..3 {
            x[layout.global(0, i)] = 1.0;
        }
        assert!((quad_form(&asm.primal.rp, &x) - 1.0).abs() < 1e-13);
        // unit jump in w: τ_h penalty part = 1
        let mut x = vec![0.0; layout.n_primal()];
        for i in 12..15 {
            x[layout.global(0, i)] = 1.0;
        }
        assert!((quad_form(&asm.primal.tp, &x) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn continuous_fields_see_only_volume_terms() {
        // continuous P1 θ vanishing on the boundary: θ1 = hat function at the centre vertex
        let chart = SurfaceChart::plate();
        let m = mesh(SideTags::all(BoundaryTag::D), 2, [0.0, 1.0], [0.0, 1.0]);
        let layout = build_dof_layout(&m, &chart, SpaceOptions::dg()).unwrap();
        let asm = assemble_forms(
            &m,
            &chart,
            &layout,
            &Material::default(),
            &QuadratureOptions::default(),
        )
        .unwrap();
        let centre = m
            .vertices
            .iter()
            .position(|v| (v[0] - 0.5).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12)
            .unwrap();
        let mut x = vec![0.0; layout.n_primal()];
        for (t, tri) in m.triangles.iter().enumerate() {
            for (i, &v) in tri.iter().enumerate() {
                if v == centre {
                    x[layout.global(t, i)] = 1.0; // θ1
                    x[layout.global(t, 6 + i)] = 0.5; // u1
                    x[layout.global(t, 12 + i)] = -0.25; // w
                }
            }
        }
        let r = quad_form(&asm.primal.rho(123.0), &x);
        let g = quad_form(&asm.primal.gamma(123.0), &x);
        let t = quad_form(&asm.primal.tau(123.0), &x);
        // volume-only values from the same field
        let mut rv = 0.0;
        let mut gv = 0.0;
        let mut tv = 0.0;
        let rule = TriangleRule::with_degree(8);
        let mat = Material::default();
        let field = crate::fe_space::DiscreteField {
            layout: &layout,
            coeffs: &x,
        };
        for tt in 0..m.num_triangles() {
            let eq = element_quadrature(&m, &chart, tt, &rule).unwrap();
            for k in 0..eq.xref.len() {
                let s = field.sample(tt, eq.xref[k], eq.x[k]);
                let e = strains(&s, &eq.geom[k]);
                rv += eq.weights[k] / 3.0 * ddot(&mat.stress(&eq.geom[k], &e.rho), &e.rho);
                gv += eq.weights[k] * ddot(&mat.stress(&eq.geom[k], &e.gamma), &e.gamma);
                tv += eq.weights[k] * dot2(&mat.shear_stress(&eq.geom[k], &e.tau), &e.tau);
            }
        }
        assert!((r - rv).abs() < 1e-12 * rv.max(1.0));
        assert!((g - gv).abs() < 1e-12 * gv.max(1.0));
        assert!((t - tv).abs() < 1e-12 * tv.max(1.0));
    }

    #[test]
    fn p1_elasticity_element_matrix() {
        // one triangle (0,0),(1,0),(0,1), all free: γ_h is the plane P1 stiffness
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            &[
                ([0, 1], BoundaryTag::F),
                ([1, 2], BoundaryTag::F),
                ([2, 0], BoundaryTag::F),
            ],
        )
        .unwrap();
        let chart = SurfaceChart::plate();
        let layout = build_dof_layout(&m, &chart, SpaceOptions::dg()).unwrap();
        let mat = Material::new(1.0, 1.0, 5.0 / 6.0).unwrap();
        let asm = assemble_forms(&m, &chart, &layout, &mat, &QuadratureOptions::default()).unwrap();
        // hand oracle: K = area · Bᵀ D B with D = [[λ*+2μ, λ*, 0], [λ*, λ*+2μ, 0], [0, 0, μ]], λ* = 2/3
        let ls = 2.0 / 3.0;
        let dmat = [[ls + 2.0, ls, 0.0], [ls, ls + 2.0, 0.0], [0.0, 0.0, 1.0]];
        let grads = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        // dof ordering: u1 at nodes 0..2 then u2 at nodes 0..2
        let bcol = |d: usize| -> [f64; 3] {
            let (c, n) = (d / 3, d % 3);
            if c == 0 {
                [grads[n][0], 0.0, grads[n][1]]
            } else {
                [0.0, grads[n][1], grads[n][0]]
            }
        };
        for i in 0..6 {
            for j in 0..6 {
                let (bi, bj) = (bcol(i), bcol(j));
                let mut k = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        k += bi[a] * dmat[a][b] * bj[b];
                    }
                }
                k *= 0.5;
                let gi = layout.global(0, 6 + i);
                let gj = layout.global(0, 6 + j);
                let v = asm.primal.g0.get(gi, gj).copied().unwrap_or(0.0);
                assert!((v - k).abs() < 1e-12, "{i} {j}: {v} vs {k}");
            }
        }
    }

    #[test]
    fn shear_form_one_element() {
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            &[
                ([0, 1], BoundaryTag::F),
                ([1, 2], BoundaryTag::F),
                ([2, 0], BoundaryTag::F),
            ],
        )
        .unwrap();
        let chart = SurfaceChart::plate();
        let layout = build_dof_layout(&m, &chart, SpaceOptions::dg()).unwrap();
        let mat = Material::new(1.0, 2.0, 0.5).unwrap();
        let asm = assemble_forms(&m, &chart, &layout, &mat, &QuadratureOptions::default()).unwrap();
        // w = x1 (nodal 0, 2, 0), θ1 = 1: τ = (2, 0), κμ∫|τ|² = 1·4·area = 4
        let mut x = vec![0.0; layout.n_primal()];
        x[layout.global(0, 12 + 1)] = 2.0;
        for i in 0..3 {
            x[layout.global(0, i)] = 1.0;
        }
        assert!((quad_form(&asm.primal.t0, &x) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_coupling_single_edge() {
        // M = 0, ξ = (1, 0.5), w with a unit jump across the diagonal edge
        let chart = SurfaceChart::plate();
        let m = mesh(SideTags::all(BoundaryTag::F), 1, [0.0, 1.0], [0.0, 1.0]);
        let layout = build_dof_layout(&m, &chart, SpaceOptions::mixed()).unwrap();
        let asm = assemble_forms(
            &m,
            &chart,
            &layout,
            &Material::default(),
            &QuadratureOptions::default(),
        )
        .unwrap();
        let b = &asm.mixed.as_ref().unwrap().b;
        let mut aux = vec![0.0; layout.block3];
        for v in 0..4 {
            aux[5 * v + 3] = 1.0;
            aux[5 * v + 4] = 0.5;
        }
        let mut x = vec![0.0; layout.n_primal()];
        for i in 12..15 {
            x[layout.global(0, i)] = 1.0;
        }
        let e = &m.interior_edges[0];
        let eg = m.edge_geometry(e.left, e.left_local);
        let sign = if e.left == 0 { 1.0 } else { -1.0 };
        // volume part: ∫_T0 ξ·∇w = 0 (w constant), edge part −ξ·n̄ [w] h_e
        let expect = -(1.0 * eg.nbar[0] + 0.5 * eg.nbar[1]) * sign * eg.length;
        assert!((bilinear(b, &aux, &x) - expect).abs() < 1e-13);
    }

    #[test]
    fn compliance_block_closed_form() {
        // plate, unit square, M = identity: ∫ a_{αβγδ} δ^{γδ} δ^{αβ} = (1/2μ)(2 − 4λ/(2μ+3λ))
        let chart = SurfaceChart::plate();
        let m = mesh(SideTags::all(BoundaryTag::D), 2, [0.0, 1.0], [0.0, 1.0]);
        let layout = build_dof_layout(&m, &chart, SpaceOptions::mixed()).unwrap();
        let mat = Material::new(1.5, 0.8, 5.0 / 6.0).unwrap();
        let asm = assemble_forms(&m, &chart, &layout, &mat, &QuadratureOptions::default()).unwrap();
        let c = &asm.mixed.as_ref().unwrap().c;
        let mut aux = vec![0.0; layout.block3];
        for v in 0..m.num_vertices() {
            aux[5 * v] = 1.0;
            aux[5 * v + 1] = 1.0;
        }
        let expect = (2.0 - 4.0 * 1.5 / (1.6 + 4.5)) / 1.6;
        assert!((quad_form(c, &aux) - expect).abs() < 1e-12);
        let f = LdlFactor::new(c).unwrap();
        assert!(f.is_positive_definite());
    }

    #[test]
    fn load_p3_barycentric_integral() {
        let chart = SurfaceChart::plate();
        let m = mesh(SideTags::all(BoundaryTag::D), 1, [0.0, 1.0], [0.0, 1.0]);
        let layout = build_dof_layout(&m, &chart, SpaceOptions::dg()).unwrap();
        let f = assemble_load(
            &m,
            &chart,
            &layout,
            &LoadSpec::transverse(1.0),
            &QuadratureOptions::default(),
        )
        .unwrap();
        for i in 0..3 {
            assert!((f[layout.global(0, 12 + i)] - 0.5 / 3.0).abs() < 1e-15);
            assert_eq!(f[layout.global(0, i)], 0.0);
        }
        let z = assemble_load(
            &m,
            &chart,
            &layout,
            &LoadSpec::default(),
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn edge_transform_on_sphere() {
        let r = 2.0;
        let chart = SurfaceChart::sphere(r);
        let x1 = std::f64::consts::FRAC_PI_3;
        let m = Mesh::from_parts(
            vec![[x1, 0.0], [x1, 0.5], [x1 - 0.3, 0.0]],
            vec![[0, 1, 2]],
            &[
                ([0, 1], BoundaryTag::F),
                ([1, 2], BoundaryTag::F),
                ([2, 0], BoundaryTag::F),
            ],
        )
        .unwrap();
        // local edge 2 joins vertices 0 and 1 (x1 = π/3)
        let pts = quadrature_edge_transform(
            &m,
            &chart,
            0,
            2,
            EdgeIntegrand::ScalarArcLength,
            &LineRule::gauss(5),
        )
        .unwrap();
        let len: f64 = pts.iter().map(|p| p.1).sum();
        assert!((len - r * x1.sin() * 0.5).abs() < 1e-10);
        let plate = SurfaceChart::plate();
        let pts = quadrature_edge_transform(
            &m,
            &plate,
            0,
            0,
            EdgeIntegrand::VectorNormal,
            &LineRule::gauss(3),
        )
        .unwrap();
        let rule = LineRule::gauss(3);
        let eg = m.edge_geometry(0, 0);
        for (k, p) in pts.iter().enumerate() {
            assert!((p.1 - rule.weights[k] * eg.length).abs() < 1e-15);
        }
    }

    #[test]
    fn green_identity_probe() {
        let quad = QuadratureOptions::default();
        let f = |x: Vec2| -> (Vec2, Mat2) {
            let (a, b) = (x[0], x[1]);
            (
                [a * a * b + 0.5 * b * b * b, a - 2.0 * a * b * b],
                [
                    [2.0 * a * b, a * a + 1.5 * b * b],
                    [1.0 - 2.0 * b * b, -4.0 * a * b],
                ],
            )
        };
        let m = mesh(SideTags::all(BoundaryTag::D), 2, [0.3, 1.1], [0.2, 0.9]);
        for chart in [SurfaceChart::plate(), SurfaceChart::cylinder(1.2)] {
            for t in 0..m.num_triangles() {
                assert!(green_identity_check(&m, &chart, t, &f, &quad).unwrap() < 1e-12);
            }
        }
        let sphere = SurfaceChart::sphere(1.0);
        for t in 0..m.num_triangles() {
            assert!(green_identity_check(&m, &sphere, t, &f, &quad).unwrap() < 1e-8);
        }
    }
}
