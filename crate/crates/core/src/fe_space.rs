//! Discrete spaces: element-wise discontinuous P1 primal fields with edge/vertex
//! enrichment of (u, w) on free-boundary elements, continuous P1 auxiliary fields
//! (M, ξ), the global DOF numbering and the interpolation operators.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{GeometryEval, SurfaceChart, Vec2};
use crate::mesh::Mesh;
use crate::poly::{AffineMap, Poly};
use crate::quadrature::{LineRule, TriangleRule};
use crate::strain::FieldSample;

/// Largest admissible condition number of a local moment or Gram matrix.
pub const LOCAL_COND_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Theta1,
    Theta2,
    U1,
    U2,
    W,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::Theta1, Field::Theta2, Field::U1, Field::U2, Field::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Field {
        Field::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Theta1 => "theta1",
            Field::Theta2 => "theta2",
            Field::U1 => "u1",
            Field::U2 => "u2",
            Field::W => "w",
        }
    }
}

/// Auxiliary components, in DOF order.
pub const AUX_NAMES: [&str; 5] = ["M11", "M22", "M12", "xi1", "xi2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    P1,
    /// One free edge: P1 plus two quadratics.
    Pe,
    /// Two free edges: P1 plus four cubics.
    Pv,
    /// Full quadratics (one free edge, full-enrichment option).
    P2,
    /// Full cubics (two free edges, full-enrichment option).
    P3,
}

impl LocalKind {
    pub fn extra_count(self) -> usize {
        match self {
            LocalKind::P1 => 0,
            LocalKind::Pe => 2,
            LocalKind::Pv => 4,
            LocalKind::P2 => 3,
            LocalKind::P3 => 7,
        }
    }
}

/// Local space for u and w on one element. θ always uses λ0, λ1, λ2.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub kind: LocalKind,
    pub free_edges: Vec<usize>,
    /// Functions added to {λ0, λ1, λ2}.
    pub extras: Vec<Poly>,
}

impl LocalBasis {
    pub fn p1() -> LocalBasis {
        LocalBasis {
            kind: LocalKind::P1,
            free_edges: Vec::new(),
            extras: Vec::new(),
        }
    }

    /// All displacement basis functions: λ0, λ1, λ2, then the extras.
    pub fn displacement_functions(&self) -> Vec<Poly> {
        let mut v: Vec<Poly> = (0..3).map(Poly::lambda).collect();
        v.extend(self.extras.iter().copied());
        v
    }
}

/// Quadrature data of one element: reference points, physical points,
/// physical weights (reference weight × |det J|) and geometry at each point.
#[derive(Debug, Clone)]
pub struct ElementQuad {
    pub map: AffineMap,
    pub xref: Vec<[f64; 2]>,
    pub x: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub geom: Vec<GeometryEval>,
}

pub fn element_quadrature(
    mesh: &Mesh,
    chart: &SurfaceChart,
    t: usize,
    rule: &TriangleRule,
) -> Result<ElementQuad> {
    let map = AffineMap::new(mesh.tri_points(t));
    let mut x = Vec::with_capacity(rule.len());
    let mut geom = Vec::with_capacity(rule.len());
    for p in &rule.points {
        let xp = map.to_physical(*p);
        geom.push(chart.eval(xp)?);
        x.push(xp);
    }
    Ok(ElementQuad {
        map,
        xref: rule.points.clone(),
        x,
        weights: rule.weights.iter().map(|w| w * map.det.abs()).collect(),
        geom,
    })
}

/// Quadrature data on one local edge of an element: parameter s ∈ [0, 1] from
/// vertex (l+1) to vertex (l+2), reference coordinates in the element, geometry,
/// and the plain arc weight (Gauss weight × edge length).
#[derive(Debug, Clone)]
pub struct EdgeQuad {
    pub s: Vec<f64>,
    pub xref: Vec<[f64; 2]>,
    pub x: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub geom: Vec<GeometryEval>,
    pub nbar: Vec2,
    pub tangent: Vec2,
    pub length: f64,
}

pub fn edge_quadrature(
    mesh: &Mesh,
    chart: &SurfaceChart,
    t: usize,
    local: usize,
    rule: &LineRule,
) -> Result<EdgeQuad> {
    let eg = mesh.edge_geometry(t, local);
    let map = AffineMap::new(mesh.tri_points(t));
    let mut xref = Vec::with_capacity(rule.len());
    let mut x = Vec::with_capacity(rule.len());
    let mut geom = Vec::with_capacity(rule.len());
    for &s in &rule.points {
        let p = eg.point(s);
        xref.push(map.to_reference(p));
        geom.push(chart.eval(p)?);
        x.push(p);
    }
    Ok(EdgeQuad {
        s: rule.points.clone(),
        xref,
        x,
        weights: rule.weights.iter().map(|w| w * eg.length).collect(),
        geom,
        nbar: eg.nbar,
        tangent: eg.tangent,
        length: eg.length,
    })
}

fn check_cond(m: &DMatrix<f64>, element: usize) -> Result<()> {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(cond < LOCAL_COND_LIMIT) {
        return Err(Error::IllConditioned { element, cond });
    }
    Ok(())
}

/// Solves for q ∈ P1 (in the λ basis) with ∫ (weight·q + g) λ_i √a = 0 for i = 0, 1, 2.
fn orthogonal_correction(
    eq: &ElementQuad,
    weight: &Poly,
    g: &Poly,
    element: usize,
) -> Result<Poly> {
    let lam: Vec<Poly> = (0..3).map(Poly::lambda).collect();
    let mut m = DMatrix::<f64>::zeros(3, 3);
    let mut r = DVector::<f64>::zeros(3);
    for (k, xr) in eq.xref.iter().enumerate() {
        let dw = eq.weights[k] * eq.geom[k].sqrt_a;
        let wv = weight.eval(*xr);
        let gv = g.eval(*xr);
        let lv: Vec<f64> = lam.iter().map(|l| l.eval(*xr)).collect();
        for i in 0..3 {
            r[i] -= dw * gv * lv[i];
            for j in 0..3 {
                m[(i, j)] += dw * wv * lv[j] * lv[i];
            }
        }
    }
    check_cond(&m, element)?;
    let c = m.lu().solve(&r).ok_or(Error::IllConditioned {
        element,
        cond: f64::INFINITY,
    })?;
    let mut q = Poly::zero();
    for i in 0..3 {
        q.axpy(c[i], &lam[i]);
    }
    Ok(weight.mul(&q).add(g))
}

/// Builds the local displacement space of element `t` from its free edges.
pub fn build_local_basis(
    mesh: &Mesh,
    chart: &SurfaceChart,
    t: usize,
    full_enrichment: bool,
    rule: &TriangleRule,
) -> Result<LocalBasis> {
    let free = mesh.free_edges(t);
    match free.len() {
        0 => Ok(LocalBasis::p1()),
        1 | 2 if full_enrichment => {
            let (kind, extras) = full_extras(free.len());
            Ok(LocalBasis {
                kind,
                free_edges: free,
                extras,
            })
        }
        1 => {
            let eq = element_quadrature(mesh, chart, t, rule)?;
            let f = free[0];
            let lf = Poly::lambda(f);
            let e1 = orthogonal_correction(&eq, &lf, &Poly::constant(1.0), t)?;
            let e2 = orthogonal_correction(&eq, &lf, &Poly::lambda((f + 1) % 3), t)?;
            Ok(LocalBasis {
                kind: LocalKind::Pe,
                free_edges: free,
                extras: vec![e1, e2],
            })
        }
        2 => {
            let eq = element_quadrature(mesh, chart, t, rule)?;
            let (f2, f3) = (free[0], free[1]);
            let l2 = Poly::lambda(f2);
            let l3 = Poly::lambda(f3);
            let weight = l2.mul(&l3);
            let mut extras = Vec::with_capacity(4);
            for g in [l3, l3.mul(&l3), l2, l2.mul(&l2)] {
                extras.push(orthogonal_correction(&eq, &weight, &g, t)?);
            }
            Ok(LocalBasis {
                kind: LocalKind::Pv,
                free_edges: free,
                extras,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "element {t} has three free edges; enrichment is defined for one or two"
        ))),
    }
}

fn full_extras(n_free: usize) -> (LocalKind, Vec<Poly>) {
    let l: Vec<Poly> = (0..3).map(Poly::lambda).collect();
    let mut extras = vec![l[1].mul(&l[2]), l[2].mul(&l[0]), l[0].mul(&l[1])];
    if n_free == 1 {
        return (LocalKind::P2, extras);
    }
    extras.push(l[0].mul(&l[1]).mul(&l[2]));
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let diff = l[a].add(&l[b].scale(-1.0));
        extras.push(l[a].mul(&l[b]).mul(&diff));
    }
    (LocalKind::P3, extras)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceOptions {
    /// Enrich u, w on free-boundary elements (the mixed space); off gives all-P1.
    pub enrichment: bool,
    /// Use full P2/P3 instead of the minimal enrichment.
    pub full_enrichment: bool,
    /// Include the continuous P1 auxiliary block.
    pub aux: bool,
}

impl SpaceOptions {
    pub fn mixed() -> SpaceOptions {
        SpaceOptions {
            enrichment: true,
            full_enrichment: false,
            aux: true,
        }
    }

    pub fn dg() -> SpaceOptions {
        SpaceOptions {
            enrichment: false,
            full_enrichment: false,
            aux: false,
        }
    }
}

/// Global numbering: block 1 (15 P1 DOFs per element, element-private), block 2
/// (enrichment of u1, u2, w), block 3 (5 continuous P1 auxiliary fields per vertex).
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub n_triangles: usize,
    pub n_vertices: usize,
    pub block1: usize,
    pub block2: usize,
    pub block3: usize,
    pub options: SpaceOptions,
    pub bases: Vec<LocalBasis>,
    pub maps: Vec<AffineMap>,
    /// Offset of each element's enrichment DOFs inside block 2.
    pub enrichment_offset: Vec<usize>,
    pub triangles: Vec<[usize; 3]>,
}

/// Degree of the rule used to orthogonalize enrichment functions against P1.
pub const ENRICHMENT_RULE_DEGREE: usize = 16;

pub fn build_dof_layout(
    mesh: &Mesh,
    chart: &SurfaceChart,
    options: SpaceOptions,
) -> Result<DofLayout> {
    let rule = TriangleRule::with_degree(ENRICHMENT_RULE_DEGREE);
    let nt = mesh.num_triangles();
    for t in 0..nt {
        if options.enrichment && mesh.free_edges(t).len() == 3 {
            return Err(Error::Unsupported(format!(
                "element {t} has three free edges; enrichment is defined for one or two"
            )));
        }
    }
    let bases: Vec<LocalBasis> = if options.enrichment {
        (0..nt)
            .into_par_iter()
            .map(|t| build_local_basis(mesh, chart, t, options.full_enrichment, &rule))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![LocalBasis::p1(); nt]
    };
    let mut enrichment_offset = Vec::with_capacity(nt);
    let mut block2 = 0;
    for b in &bases {
        enrichment_offset.push(block2);
        block2 += 3 * b.extras.len();
    }
    Ok(DofLayout {
        n_triangles: nt,
        n_vertices: mesh.num_vertices(),
        block1: 15 * nt,
        block2,
        block3: if options.aux {
            5 * mesh.num_vertices()
        } else {
            0
        },
        options,
        bases,
        maps: (0..nt)
            .map(|t| AffineMap::new(mesh.tri_points(t)))
            .collect(),
        enrichment_offset,
        triangles: mesh.triangles.clone(),
    })
}

impl DofLayout {
    pub fn n_primal(&self) -> usize {
        self.block1 + self.block2
    }

    pub fn n_total(&self) -> usize {
        self.block1 + self.block2 + self.block3
    }

    pub fn extras(&self, t: usize) -> usize {
        self.bases[t].extras.len()
    }

    pub fn local_size(&self, t: usize) -> usize {
        15 + 3 * self.extras(t)
    }

    /// Global index of local DOF `i` of element `t`. Local order: θ1, θ2, u1, u2, w
    /// (three λ coefficients each), then the extras of u1, u2, w.
    #[inline]
    pub fn global(&self, t: usize, i: usize) -> usize {
        if i < 15 {
            15 * t + i
        } else {
            self.block1 + self.enrichment_offset[t] + (i - 15)
        }
    }

    pub fn local_dofs(&self, t: usize) -> Vec<usize> {
        (0..self.local_size(t)).map(|i| self.global(t, i)).collect()
    }

    /// Field and polynomial of local DOF `i`.
    pub fn local_function(&self, t: usize, i: usize) -> (Field, Poly) {
        if i < 15 {
            (Field::from_index(i / 3), Poly::lambda(i % 3))
        } else {
            let k = self.extras(t);
            let j = i - 15;
            (Field::from_index(2 + j / k), self.bases[t].extras[j % k])
        }
    }

    #[inline]
    pub fn aux(&self, vertex: usize, component: usize) -> usize {
        self.block1 + self.block2 + 5 * vertex + component
    }

    /// Values and parameter-domain gradients of all local basis functions of `t` at `xref`.
    pub fn eval_local(&self, t: usize, xref: [f64; 2]) -> Vec<(Field, f64, Vec2)> {
        let map = &self.maps[t];
        (0..self.local_size(t))
            .map(|i| {
                let (f, p) = self.local_function(t, i);
                let (v, g) = p.eval_grad(xref);
                (f, v, map.grad(g))
            })
            .collect()
    }

    /// Sample of a single local basis function as a field.
    pub fn basis_sample(field: Field, value: f64, grad: Vec2) -> FieldSample {
        let mut s = FieldSample::default();
        match field {
            Field::Theta1 => {
                s.theta[0] = value;
                s.grad_theta[0] = grad;
            }
            Field::Theta2 => {
                s.theta[1] = value;
                s.grad_theta[1] = grad;
            }
            Field::U1 => {
                s.u[0] = value;
                s.grad_u[0] = grad;
            }
            Field::U2 => {
                s.u[1] = value;
                s.grad_u[1] = grad;
            }
            Field::W => {
                s.w = value;
                s.grad_w = grad;
            }
        }
        s
    }

    /// Restriction of a primal vector to block 1 (drops enrichment).
    pub fn block1_part<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.block1]
    }
}

/// A primal field that can be sampled on any element.
pub trait FieldSource: Sync {
    /// Sample at reference point `xref` of element `t`, which maps to parameter point `x`.
    fn sample(&self, t: usize, xref: [f64; 2], x: Vec2) -> FieldSample;
}

/// Finite element field given by a coefficient vector over a layout's primal blocks.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteField<'a> {
    pub layout: &'a DofLayout,
    pub coeffs: &'a [f64],
}

impl FieldSource for DiscreteField<'_> {
    fn sample(&self, t: usize, xref: [f64; 2], _x: Vec2) -> FieldSample {
        let mut s = FieldSample::default();
        let map = &self.layout.maps[t];
        for i in 0..self.layout.local_size(t) {
            let g = self.layout.global(t, i);
            let c = if g < self.coeffs.len() {
                self.coeffs[g]
            } else {
                0.0
            };
            if c == 0.0 {
                continue;
            }
            let (f, p) = self.layout.local_function(t, i);
            let (v, gr) = p.eval_grad(xref);
            s.axpy(c, &DofLayout::basis_sample(f, v, map.grad(gr)));
        }
        s
    }
}

/// Field given pointwise on the parameter domain.
pub struct FnField<F>(pub F);

impl<F: Fn(Vec2) -> FieldSample + Sync> FieldSource for FnField<F> {
    fn sample(&self, _t: usize, _xref: [f64; 2], x: Vec2) -> FieldSample {
        (self.0)(x)
    }
}

/// a − b
pub struct Difference<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: FieldSource + ?Sized, B: FieldSource + ?Sized> FieldSource for Difference<'_, A, B> {
    fn sample(&self, t: usize, xref: [f64; 2], x: Vec2) -> FieldSample {
        let mut s = self.0.sample(t, xref, x);
        s.axpy(-1.0, &self.1.sample(t, xref, x));
        s
    }
}

pub struct ZeroField;

impl FieldSource for ZeroField {
    fn sample(&self, _t: usize, _xref: [f64; 2], _x: Vec2) -> FieldSample {
        FieldSample::default()
    }
}

fn field_value(s: &FieldSample, f: Field) -> f64 {
    match f {
        Field::Theta1 => s.theta[0],
        Field::Theta2 => s.theta[1],
        Field::U1 => s.u[0],
        Field::U2 => s.u[1],
        Field::W => s.w,
    }
}

/// Interpolant of a smooth primal field: √a-weighted L² projection onto P1 for θ and
/// on P1 elements; on enriched elements, P1 volume moments plus degree-0/1 moments on
/// each free edge (full-enrichment option: weighted L² projection onto P2/P3).
pub fn project_primal(
    source: &dyn FieldSource,
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    rule: &TriangleRule,
    edge_rule: &LineRule,
) -> Result<Vec<f64>> {
    let locals: Vec<Vec<f64>> = (0..layout.n_triangles)
        .into_par_iter()
        .map(|t| project_element(source, mesh, chart, layout, t, rule, edge_rule))
        .collect::<Result<Vec<_>>>()?;
    let mut x = vec![0.0; layout.n_primal()];
    for (t, loc) in locals.iter().enumerate() {
        for (i, v) in loc.iter().enumerate() {
            x[layout.global(t, i)] = *v;
        }
    }
    Ok(x)
}

fn project_element(
    source: &dyn FieldSource,
    mesh: &Mesh,
    chart: &SurfaceChart,
    layout: &DofLayout,
    t: usize,
    rule: &TriangleRule,
    edge_rule: &LineRule,
) -> Result<Vec<f64>> {
    let eq = element_quadrature(mesh, chart, t, rule)?;
    let basis = &layout.bases[t];
    let samples: Vec<FieldSample> = (0..eq.xref.len())
        .map(|k| source.sample(t, eq.xref[k], eq.x[k]))
        .collect();
    let lam: Vec<Poly> = (0..3).map(Poly::lambda).collect();
    let mut out = vec![0.0; layout.local_size(t)];

    // P1 projection for θ (and for u, w on unenriched elements)
    let mut gram = DMatrix::<f64>::zeros(3, 3);
    let mut rhs = DMatrix::<f64>::zeros(3, 5);
    for k in 0..eq.xref.len() {
        let dw = eq.weights[k] * eq.geom[k].sqrt_a;
        let lv: Vec<f64> = lam.iter().map(|l| l.eval(eq.xref[k])).collect();
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] += dw * lv[i] * lv[j];
            }
            for f in Field::ALL {
                rhs[(i, f.index())] += dw * lv[i] * field_value(&samples[k], f);
            }
        }
    }
    check_cond(&gram, t)?;
    let sol = gram.lu().solve(&rhs).ok_or(Error::IllConditioned {
        element: t,
        cond: f64::INFINITY,
    })?;
    let enriched = !basis.extras.is_empty();
    for f in Field::ALL {
        if enriched && f.index() >= 2 {
            continue;
        }
        for i in 0..3 {
            out[3 * f.index() + i] = sol[(i, f.index())];
        }
    }
    if !enriched {
        return Ok(out);
    }

    let funcs = basis.displacement_functions();
    let n = funcs.len();
    let k_extra = basis.extras.len();
    let minimal = matches!(basis.kind, LocalKind::Pe | LocalKind::Pv);
    // conditions: rows = moments, columns = basis functions
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut r = DMatrix::<f64>::zeros(n, 3);
    let disp = [Field::U1, Field::U2, Field::W];
    let vol_tests: Vec<Poly> = if minimal { lam.clone() } else { funcs.clone() };
    for k in 0..eq.xref.len() {
        let dw = eq.weights[k] * eq.geom[k].sqrt_a;
        let fv: Vec<f64> = funcs.iter().map(|p| p.eval(eq.xref[k])).collect();
        for (i, q) in vol_tests.iter().enumerate() {
            let qv = q.eval(eq.xref[k]);
            for j in 0..n {
                m[(i, j)] += dw * qv * fv[j];
            }
            for (c, f) in disp.iter().enumerate() {
                r[(i, c)] += dw * qv * field_value(&samples[k], *f);
            }
        }
    }
    if minimal {
        let mut row = 3;
        for &e in &basis.free_edges {
            let ed = edge_quadrature(mesh, chart, t, e, edge_rule)?;
            for k in 0..ed.s.len() {
                let dw = ed.weights[k] * ed.geom[k].sqrt_a;
                let sv = source.sample(t, ed.xref[k], ed.x[k]);
                let fv: Vec<f64> = funcs.iter().map(|p| p.eval(ed.xref[k])).collect();
                for (d, q) in [1.0, ed.s[k]].iter().enumerate() {
                    for j in 0..n {
                        m[(row + d, j)] += dw * q * fv[j];
                    }
                    for (c, f) in disp.iter().enumerate() {
                        r[(row + d, c)] += dw * q * field_value(&sv, *f);
                    }
                }
            }
            row += 2;
        }
        debug_assert_eq!(row, n);
    }
    check_cond(&m, t)?;
    let sol = m.lu().solve(&r).ok_or(Error::IllConditioned {
        element: t,
        cond: f64::INFINITY,
    })?;
    for (c, f) in disp.iter().enumerate() {
        for i in 0..3 {
            out[3 * f.index() + i] = sol[(i, c)];
        }
        for j in 0..k_extra {
            out[15 + c * k_extra + j] = sol[(3 + j, c)];
        }
    }
    Ok(out)
}

/// Nodal interpolant of auxiliary fields (M11, M22, M12, ξ1, ξ2) into block 3.
pub fn interpolate_aux(
    mesh: &Mesh,
    layout: &DofLayout,
    f: &(dyn Fn(Vec2) -> [f64; 5] + Sync),
) -> Vec<f64> {
    let mut m = vec![0.0; layout.block3];
    for (v, p) in mesh.vertices.iter().enumerate() {
        let vals = f(*p);
        for c in 0..5 {
            m[5 * v + c] = vals[c];
        }
    }
    m
}

/// Evaluates auxiliary fields from block-3 coefficients at a reference point of element `t`.
pub fn eval_aux(layout: &DofLayout, aux: &[f64], t: usize, xref: [f64; 2]) -> [f64; 5] {
    let tri = layout.triangles[t];
    let mut out = [0.0; 5];
    for (i, &v) in tri.iter().enumerate() {
        let l = Poly::lambda(i).eval(xref);
        for c in 0..5 {
            out[c] += l * aux[5 * v + c];
        }
    }
    out
}
