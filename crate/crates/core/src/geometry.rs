//! Differential geometry of the shell midsurface Φ: Ω ⊂ R² → R³.
//!
//! Orientation: a_3 = (a_1 × a_2)/|a_1 × a_2|, which fixes the sign of b_{αβ}
//! (b_{11} = −1/R on the cylinder chart `(R cos(x1/R), R sin(x1/R), x2)`).
//! Flipping the orientation flips b and b^α_β together; c is unchanged.

use crate::error::{Error, Result};
use crate::expr::{Expr, Program, Var};

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];
pub type Mat2 = [[f64; 2]; 2];
/// `t[g][a][b]`, e.g. Γ^g_{ab}.
pub type Tensor3 = [[[f64; 2]; 2]; 2];
pub type Tensor4 = [[[[f64; 2]; 2]; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum ChartKind {
    Plate,
    Cylinder {
        radius: f64,
    },
    Sphere {
        radius: f64,
    },
    /// Quadratic graph z = c11 x1² + c12 x1 x2 + c22 x2² (hyperbolic paraboloid when c11 c22 < c12²/4).
    Hypar {
        c11: f64,
        c12: f64,
        c22: f64,
    },
    Expression {
        phi: [String; 3],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Rect { x1: [f64; 2], x2: [f64; 2] },
    Polygon(Vec<Vec2>),
}

impl Domain {
    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Domain::Rect { x1, x2 } => {
                let t1 = 1e-9 * (1.0 + (x1[1] - x1[0]).abs());
                let t2 = 1e-9 * (1.0 + (x2[1] - x2[0]).abs());
                p[0] >= x1[0] - t1 && p[0] <= x1[1] + t1 && p[1] >= x2[0] - t2 && p[1] <= x2[1] + t2
            }
            Domain::Polygon(pts) => point_in_polygon(pts, p),
        }
    }
}

fn point_in_polygon(pts: &[Vec2], p: Vec2) -> bool {
    let n = pts.len();
    let scale = pts
        .iter()
        .fold(0.0f64, |m, q| m.max(q[0].abs()).max(q[1].abs()))
        .max(1.0);
    let tol = 1e-9 * scale;
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        // on-edge test
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        if len2 > 0.0 {
            let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
            let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
            if (d[0] * d[0] + d[1] * d[1]).sqrt() <= tol {
                return true;
            }
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Φ and its partial derivatives up to order three, as compiled programs.
#[derive(Debug, Clone)]
struct ChartJet {
    phi: [Program; 3],
    d1: [[Program; 2]; 3],
    /// index 0: 11, 1: 12, 2: 22
    d2: [[Program; 3]; 3],
    /// index 0: 111, 1: 112, 2: 122, 3: 222
    d3: [[Program; 4]; 3],
}

impl ChartJet {
    fn new(phi: [Expr; 3]) -> ChartJet {
        let p = [phi[0].compile(), phi[1].compile(), phi[2].compile()];
        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        let mut d3 = Vec::new();
        for e in &phi {
            let e1 = e.derivative(Var::X1);
            let e2 = e.derivative(Var::X2);
            let e11 = e1.derivative(Var::X1);
            let e12 = e1.derivative(Var::X2);
            let e22 = e2.derivative(Var::X2);
            let e111 = e11.derivative(Var::X1);
            let e112 = e11.derivative(Var::X2);
            let e122 = e12.derivative(Var::X2);
            let e222 = e22.derivative(Var::X2);
            d1.push([e1.compile(), e2.compile()]);
            d2.push([e11.compile(), e12.compile(), e22.compile()]);
            d3.push([
                e111.compile(),
                e112.compile(),
                e122.compile(),
                e222.compile(),
            ]);
        }
        ChartJet {
            phi: p,
            d1: take3(d1),
            d2: take3(d2),
            d3: take3(d3),
        }
    }
}

fn take3<T>(v: Vec<T>) -> [T; 3] {
    let mut it = v.into_iter();
    [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
}

#[inline]
fn idx2(a: usize, b: usize) -> usize {
    a + b
}

#[inline]
fn idx3(a: usize, b: usize, c: usize) -> usize {
    a + b + c
}

#[derive(Debug, Clone)]
pub struct SurfaceChart {
    pub kind: ChartKind,
    pub domain: Option<Domain>,
    jet: ChartJet,
}

impl SurfaceChart {
    pub fn new(kind: ChartKind, domain: Option<Domain>) -> Result<SurfaceChart> {
        let f = |v: f64| format!("{v:?}");
        let src: [String; 3] = match &kind {
            ChartKind::Plate => ["x1".into(), "x2".into(), "0".into()],
            ChartKind::Cylinder { radius } => {
                check_positive("cylinder radius", *radius)?;
                let r = f(*radius);
                [
                    format!("{r}*cos(x1/{r})"),
                    format!("{r}*sin(x1/{r})"),
                    "x2".into(),
                ]
            }
            ChartKind::Sphere { radius } => {
                check_positive("sphere radius", *radius)?;
                let r = f(*radius);
                [
                    format!("{r}*sin(x1)*cos(x2)"),
                    format!("{r}*sin(x1)*sin(x2)"),
                    format!("{r}*cos(x1)"),
                ]
            }
            ChartKind::Hypar { c11, c12, c22 } => [
                "x1".into(),
                "x2".into(),
                format!("{}*x1^2 + {}*x1*x2 + {}*x2^2", f(*c11), f(*c12), f(*c22)),
            ],
            ChartKind::Expression { phi } => phi.clone(),
        };
        let phi = [
            Expr::parse(&src[0])?,
            Expr::parse(&src[1])?,
            Expr::parse(&src[2])?,
        ];
        Ok(SurfaceChart {
            kind,
            domain,
            jet: ChartJet::new(phi),
        })
    }

    pub fn plate() -> SurfaceChart {
        SurfaceChart::new(ChartKind::Plate, None).expect("plate chart")
    }

    pub fn cylinder(radius: f64) -> SurfaceChart {
        SurfaceChart::new(ChartKind::Cylinder { radius }, None).expect("cylinder chart")
    }

    pub fn sphere(radius: f64) -> SurfaceChart {
        SurfaceChart::new(ChartKind::Sphere { radius }, None).expect("sphere chart")
    }

    pub fn with_domain(mut self, domain: Domain) -> SurfaceChart {
        self.domain = Some(domain);
        self
    }

    pub fn position(&self, p: Vec2) -> Vec3 {
        let j = &self.jet;
        [
            j.phi[0].eval(p[0], p[1]),
            j.phi[1].eval(p[0], p[1]),
            j.phi[2].eval(p[0], p[1]),
        ]
    }

    /// Tangent vectors a_1, a_2 at `p`.
    pub fn tangents(&self, p: Vec2) -> [Vec3; 2] {
        let j = &self.jet;
        let mut out = [[0.0; 3]; 2];
        for i in 0..3 {
            for a in 0..2 {
                out[a][i] = j.d1[i][a].eval(p[0], p[1]);
            }
        }
        out
    }

    /// Checked evaluation: rejects points outside the chart domain.
    pub fn eval(&self, p: Vec2) -> Result<GeometryEval> {
        if let Some(d) = &self.domain {
            if !d.contains(p) {
                return Err(Error::OutOfDomain { x1: p[0], x2: p[1] });
            }
        }
        self.eval_unchecked(p)
    }

    /// Evaluation without the domain test (degenerate tangents still reported).
    pub fn eval_unchecked(&self, p: Vec2) -> Result<GeometryEval> {
        let j = &self.jet;
        let (x, y) = (p[0], p[1]);
        let mut a = [[0.0; 3]; 2];
        let mut d2 = [[[0.0; 3]; 2]; 2];
        let mut d3 = [[[[0.0; 3]; 2]; 2]; 2];
        for i in 0..3 {
            for al in 0..2 {
                a[al][i] = j.d1[i][al].eval(x, y);
            }
            let v2 = [
                j.d2[i][0].eval(x, y),
                j.d2[i][1].eval(x, y),
                j.d2[i][2].eval(x, y),
            ];
            let v3 = [
                j.d3[i][0].eval(x, y),
                j.d3[i][1].eval(x, y),
                j.d3[i][2].eval(x, y),
                j.d3[i][3].eval(x, y),
            ];
            for al in 0..2 {
                for be in 0..2 {
                    d2[al][be][i] = v2[idx2(al, be)];
                    for de in 0..2 {
                        d3[al][be][de][i] = v3[idx3(al, be, de)];
                    }
                }
            }
        }
        let position = self.position(p);
        GeometryEval::from_jet(p, position, a, d2, d3)
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be positive, got {v}"
        )))
    }
}

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn axpy3(s: f64, x: Vec3, y: &mut Vec3) {
    y[0] += s * x[0];
    y[1] += s * x[1];
    y[2] += s * x[2];
}

pub fn inv2(m: Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

pub fn matmul2(a: Mat2, b: Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Geometric coefficients at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryEval {
    pub point: Vec2,
    pub position: Vec3,
    pub a_vec: [Vec3; 2],
    pub a3: Vec3,
    pub a_cov: Mat2,
    pub a_con: Mat2,
    pub sqrt_a: f64,
    pub b_cov: Mat2,
    /// `b_mix[a][b]` = b^a_b
    pub b_mix: Mat2,
    pub c_cov: Mat2,
    /// `christoffel[g][a][b]` = Γ^g_{ab}
    pub christoffel: Tensor3,
    /// `d_b_cov[d][a][b]` = ∂_d b_{ab}
    pub d_b_cov: Tensor3,
    /// `d_b_mix[d][a][b]` = ∂_d b^a_b
    pub d_b_mix: Tensor3,
    /// `d_christoffel[d][g][a][b]` = ∂_d Γ^g_{ab}
    pub d_christoffel: Tensor4,
}

impl GeometryEval {
    /// Builds all coefficients from Φ_α (`a`), Φ_αβ (`d2`) and Φ_αβγ (`d3`).
    pub fn from_jet(
        point: Vec2,
        position: Vec3,
        a: [Vec3; 2],
        d2: [[Vec3; 2]; 2],
        d3: [[[Vec3; 2]; 2]; 2],
    ) -> Result<GeometryEval> {
        let n = cross3(a[0], a[1]);
        let norm = dot3(n, n).sqrt();
        if !(norm >= 1e-12) {
            return Err(Error::DegenerateTangents {
                x1: point[0],
                x2: point[1],
                norm,
            });
        }
        let a3 = [n[0] / norm, n[1] / norm, n[2] / norm];
        let mut a_cov = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a_cov[i][j] = dot3(a[i], a[j]);
            }
        }
        let a_con = inv2(a_cov);
        // contravariant basis a^g = a^{gm} a_m
        let mut a_up = [[0.0; 3]; 2];
        for g in 0..2 {
            for m in 0..2 {
                axpy3(a_con[g][m], a[m], &mut a_up[g]);
            }
        }
        let mut b_cov = [[0.0; 2]; 2];
        let mut christoffel = [[[0.0; 2]; 2]; 2];
        for al in 0..2 {
            for be in 0..2 {
                b_cov[al][be] = dot3(a3, d2[al][be]);
                for g in 0..2 {
                    christoffel[g][al][be] = dot3(a_up[g], d2[al][be]);
                }
            }
        }
        let b_mix = matmul2(a_con, b_cov);
        let mut c_cov = [[0.0; 2]; 2];
        for al in 0..2 {
            for be in 0..2 {
                c_cov[al][be] = b_mix[0][al] * b_cov[0][be] + b_mix[1][al] * b_cov[1][be];
            }
        }

        let mut d_b_cov = [[[0.0; 2]; 2]; 2];
        let mut d_b_mix = [[[0.0; 2]; 2]; 2];
        let mut d_christoffel = [[[[0.0; 2]; 2]; 2]; 2];
        for de in 0..2 {
            // ∂_δ a_{μν}
            let mut da = [[0.0; 2]; 2];
            for m in 0..2 {
                for nu in 0..2 {
                    da[m][nu] = dot3(d2[m][de], a[nu]) + dot3(a[m], d2[nu][de]);
                }
            }
            // ∂_δ a^{αβ} = −a^{αμ} ∂_δ a_{μν} a^{νβ}
            let t = matmul2(matmul2(a_con, da), a_con);
            let da_con = [[-t[0][0], -t[0][1]], [-t[1][0], -t[1][1]]];
            // ∂_δ a_3 = −b^μ_δ a_μ
            let mut da3 = [0.0; 3];
            for m in 0..2 {
                axpy3(-b_mix[m][de], a[m], &mut da3);
            }
            // ∂_δ a^γ = ∂_δ a^{γμ} a_μ + a^{γμ} Φ_{μδ}
            let mut da_up = [[0.0; 3]; 2];
            for g in 0..2 {
                for m in 0..2 {
                    axpy3(da_con[g][m], a[m], &mut da_up[g]);
                    axpy3(a_con[g][m], d2[m][de], &mut da_up[g]);
                }
            }
            for al in 0..2 {
                for be in 0..2 {
                    d_b_cov[de][al][be] = dot3(da3, d2[al][be]) + dot3(a3, d3[al][be][de]);
                    for g in 0..2 {
                        d_christoffel[de][g][al][be] =
                            dot3(da_up[g], d2[al][be]) + dot3(a_up[g], d3[al][be][de]);
                    }
                }
            }
            for al in 0..2 {
                for be in 0..2 {
                    let mut s = 0.0;
                    for g in 0..2 {
                        s += da_con[al][g] * b_cov[g][be] + a_con[al][g] * d_b_cov[de][g][be];
                    }
                    d_b_mix[de][al][be] = s;
                }
            }
        }

        Ok(GeometryEval {
            point,
            position,
            a_vec: a,
            a3,
            a_cov,
            a_con,
            sqrt_a: norm,
            b_cov,
            b_mix,
            c_cov,
            christoffel,
            d_b_cov,
            d_b_mix,
            d_christoffel,
        })
    }

    /// Arc-length factor √(a_{γβ} t^γ t^β) for a unit parameter direction t.
    pub fn arc_factor(&self, t: Vec2) -> f64 {
        let a = &self.a_cov;
        (a[0][0] * t[0] * t[0] + 2.0 * a[0][1] * t[0] * t[1] + a[1][1] * t[1] * t[1]).sqrt()
    }

    /// Max absolute entry of b_{αβ} plus that of Γ, used for the default penalty.
    pub fn coefficient_sup(&self) -> (f64, f64) {
        let mut b = 0.0f64;
        let mut g = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                b = b.max(self.b_cov[i][j].abs()).max(self.b_mix[i][j].abs());
                for k in 0..2 {
                    g = g.max(self.christoffel[k][i][j].abs());
                }
            }
        }
        (b, g)
    }
}

pub fn eval_geometry(chart: &SurfaceChart, point: Vec2) -> Result<GeometryEval> {
    chart.eval(point)
}

/// Elastic and compliance tensors at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticTensors {
    pub elastic: Tensor4,
    pub compliance: Tensor4,
    pub lam: f64,
    pub mu: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub lam: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            lam: 1.0,
            mu: 1.0,
            kappa: 5.0 / 6.0,
        }
    }
}

impl Material {
    pub fn new(lam: f64, mu: f64, kappa: f64) -> Result<Material> {
        if !(mu > 0.0 && lam >= 0.0 && kappa > 0.0)
            || !(lam.is_finite() && mu.is_finite() && kappa.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "material requires mu > 0, lambda >= 0, kappa > 0 (got lambda={lam}, mu={mu}, kappa={kappa})"
            )));
        }
        Ok(Material { lam, mu, kappa })
    }

    /// 2μλ/(2μ+λ)
    pub fn lam_star(&self) -> f64 {
        2.0 * self.mu * self.lam / (2.0 * self.mu + self.lam)
    }

    /// m^{αβ} = a^{αβλγ} e_{λγ} for symmetric e.
    #[inline]
    pub fn stress(&self, g: &GeometryEval, e: &Mat2) -> Mat2 {
        let ac = &g.a_con;
        let t = matmul2(matmul2(*ac, *e), *ac);
        let tr = ac[0][0] * e[0][0] + ac[0][1] * e[0][1] + ac[1][0] * e[1][0] + ac[1][1] * e[1][1];
        let ls = self.lam_star();
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.mu * (t[i][j] + t[j][i]) + ls * tr * ac[i][j];
            }
        }
        m
    }

    /// a_{αβγδ} M^{γδ} for symmetric M.
    #[inline]
    pub fn compliance_apply(&self, g: &GeometryEval, m: &Mat2) -> Mat2 {
        let ac = &g.a_cov;
        let t = matmul2(matmul2(*ac, *m), *ac);
        let tr = ac[0][0] * m[0][0] + ac[0][1] * m[0][1] + ac[1][0] * m[1][0] + ac[1][1] * m[1][1];
        let k = self.lam / (2.0 * self.mu + 3.0 * self.lam);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (0.5 * (t[i][j] + t[j][i]) - k * ac[i][j] * tr) / (2.0 * self.mu);
            }
        }
        out
    }

    /// κμ a^{αβ} τ_β
    #[inline]
    pub fn shear_stress(&self, g: &GeometryEval, tau: &Vec2) -> Vec2 {
        let s = self.kappa * self.mu;
        let ac = &g.a_con;
        [
            s * (ac[0][0] * tau[0] + ac[0][1] * tau[1]),
            s * (ac[1][0] * tau[0] + ac[1][1] * tau[1]),
        ]
    }

    /// (1/κμ) a_{αβ} ξ^β
    #[inline]
    pub fn shear_compliance(&self, g: &GeometryEval, xi: &Vec2) -> Vec2 {
        let s = 1.0 / (self.kappa * self.mu);
        let a = &g.a_cov;
        [
            s * (a[0][0] * xi[0] + a[0][1] * xi[1]),
            s * (a[1][0] * xi[0] + a[1][1] * xi[1]),
        ]
    }
}

pub fn eval_elastic(geom: &GeometryEval, lam: f64, mu: f64, kappa: f64) -> Result<ElasticTensors> {
    let mat = Material::new(lam, mu, kappa)?;
    let ac = &geom.a_con;
    let a = &geom.a_cov;
    let ls = mat.lam_star();
    let k = lam / (2.0 * mu + 3.0 * lam);
    let mut elastic = [[[[0.0; 2]; 2]; 2]; 2];
    let mut compliance = [[[[0.0; 2]; 2]; 2]; 2];
    for al in 0..2 {
        for be in 0..2 {
            for ga in 0..2 {
                for de in 0..2 {
                    elastic[al][be][ga][de] = mu
                        * (ac[al][ga] * ac[be][de] + ac[be][ga] * ac[al][de])
                        + ls * ac[al][be] * ac[ga][de];
                    compliance[al][be][ga][de] = (0.5
                        * (a[al][de] * a[be][ga] + a[be][de] * a[al][ga])
                        - k * a[al][be] * a[ga][de])
                        / (2.0 * mu);
                }
            }
        }
    }
    Ok(ElasticTensors {
        elastic,
        compliance,
        lam,
        mu,
        kappa,
    })
}

/// Sums over components of per-component sup seminorms on one element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeometrySeminorms {
    pub christoffel: f64,
    pub b_cov: f64,
    pub b_mix: f64,
}

impl GeometrySeminorms {
    pub fn total(&self) -> f64 {
        self.christoffel + self.b_cov + self.b_mix
    }
}

/// Sample points: the three vertices and three edge midpoints.
pub fn six_point_samples(tri: &[Vec2; 3]) -> Vec<Vec2> {
    let mid = |a: Vec2, b: Vec2| [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
    vec![
        tri[0],
        tri[1],
        tri[2],
        mid(tri[0], tri[1]),
        mid(tri[1], tri[2]),
        mid(tri[2], tri[0]),
    ]
}

const SECOND_DERIVATIVE_STEP: f64 = 1e-4;

/// |Γ|_{k,∞,τ}, |b_{αβ}|_{k,∞,τ}, |b^α_β|_{k,∞,τ} sampled at `samples` (k ∈ {0, 1, 2}).
///
/// Order 2 uses central differences of the analytic first derivatives.
pub fn geometry_seminorms_at(
    chart: &SurfaceChart,
    samples: &[Vec2],
    order: usize,
) -> Result<GeometrySeminorms> {
    if order > 2 {
        return Err(Error::InvalidParameter(format!(
            "seminorm order {order} not supported"
        )));
    }
    let mut g_max = [[[0.0f64; 2]; 2]; 2];
    let mut bc_max = [[0.0f64; 2]; 2];
    let mut bm_max = [[0.0f64; 2]; 2];
    for &p in samples {
        let g = chart.eval(p)?;
        let (gv, bcv, bmv) = match order {
            0 => (
                g.christoffel.map(|r| r.map(|c| c.map(f64::abs))),
                g.b_cov.map(|r| r.map(f64::abs)),
                g.b_mix.map(|r| r.map(f64::abs)),
            ),
            1 => {
                let mut gv = [[[0.0f64; 2]; 2]; 2];
                let mut bcv = [[0.0f64; 2]; 2];
                let mut bmv = [[0.0f64; 2]; 2];
                for d in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            bcv[i][j] = bcv[i][j].max(g.d_b_cov[d][i][j].abs());
                            bmv[i][j] = bmv[i][j].max(g.d_b_mix[d][i][j].abs());
                            for k in 0..2 {
                                gv[k][i][j] = gv[k][i][j].max(g.d_christoffel[d][k][i][j].abs());
                            }
                        }
                    }
                }
                (gv, bcv, bmv)
            }
            _ => {
                let h = SECOND_DERIVATIVE_STEP;
                let mut gv = [[[0.0f64; 2]; 2]; 2];
                let mut bcv = [[0.0f64; 2]; 2];
                let mut bmv = [[0.0f64; 2]; 2];
                for e in 0..2 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[e] += h;
                    pm[e] -= h;
                    let gp = chart.eval_unchecked(pp)?;
                    let gm = chart.eval_unchecked(pm)?;
                    for d in 0..2 {
                        for i in 0..2 {
                            for j in 0..2 {
                                let v = (gp.d_b_cov[d][i][j] - gm.d_b_cov[d][i][j]) / (2.0 * h);
                                bcv[i][j] = bcv[i][j].max(v.abs());
                                let v = (gp.d_b_mix[d][i][j] - gm.d_b_mix[d][i][j]) / (2.0 * h);
                                bmv[i][j] = bmv[i][j].max(v.abs());
                                for k in 0..2 {
                                    let v = (gp.d_christoffel[d][k][i][j]
                                        - gm.d_christoffel[d][k][i][j])
                                        / (2.0 * h);
                                    gv[k][i][j] = gv[k][i][j].max(v.abs());
                                }
                            }
                        }
                    }
                }
                (gv, bcv, bmv)
            }
        };
        for i in 0..2 {
            for j in 0..2 {
                bc_max[i][j] = bc_max[i][j].max(bcv[i][j]);
                bm_max[i][j] = bm_max[i][j].max(bmv[i][j]);
                for k in 0..2 {
                    g_max[k][i][j] = g_max[k][i][j].max(gv[k][i][j]);
                }
            }
        }
    }
    let sum2 = |m: &Mat2| m[0][0] + m[0][1] + m[1][0] + m[1][1];
    Ok(GeometrySeminorms {
        christoffel: sum2(&g_max[0]) + sum2(&g_max[1]),
        b_cov: sum2(&bc_max),
        b_mix: sum2(&bm_max),
    })
}

/// Seminorms on a triangle with the default six-point sampling rule.
pub fn geometry_seminorms(
    chart: &SurfaceChart,
    tri: &[Vec2; 3],
    order: usize,
) -> Result<GeometrySeminorms> {
    geometry_seminorms_at(chart, &six_point_samples(tri), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn plate_is_flat() {
        let g = SurfaceChart::plate().eval([0.3, -2.0]).unwrap();
        assert_eq!(g.a_cov, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(g.b_cov, [[0.0; 2]; 2]);
        assert_eq!(g.christoffel, [[[0.0; 2]; 2]; 2]);
        assert_eq!(g.sqrt_a, 1.0);
    }

    #[test]
    fn cylinder_coefficients() {
        let r = 2.0;
        let g = SurfaceChart::cylinder(r).eval([0.7, 0.2]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!(close(g.a_cov[i][j], id, 1e-14));
                for k in 0..2 {
                    assert!(close(g.christoffel[k][i][j], 0.0, 1e-14));
                }
            }
        }
        assert!(close(g.b_cov[0][0], -1.0 / r, 1e-14));
        assert!(close(g.b_cov[1][1], 0.0, 1e-14));
        assert!(close(g.c_cov[0][0], 1.0 / (r * r), 1e-14));
        assert!(close(g.sqrt_a, 1.0, 1e-14));
    }

    #[test]
    fn sphere_equator_christoffel() {
        let g = SurfaceChart::sphere(1.5)
            .eval([std::f64::consts::FRAC_PI_2, 0.4])
            .unwrap();
        assert!(g.christoffel[0][1][1].abs() < 1e-14);
        assert!(g.christoffel[1][0][1].abs() < 1e-14);
    }

    #[test]
    fn sphere_closed_form() {
        let r = 1.3;
        let (x1, x2) = (0.8, 0.3);
        let g = SurfaceChart::sphere(r).eval([x1, x2]).unwrap();
        assert!(close(g.sqrt_a, r * r * x1.sin(), 1e-13));
        assert!(close(g.christoffel[0][1][1], -x1.sin() * x1.cos(), 1e-13));
        assert!(close(g.christoffel[1][0][1], x1.cos() / x1.sin(), 1e-13));
        assert!(close(g.b_cov[0][0], -r, 1e-13));
        assert!(close(g.b_cov[1][1], -r * x1.sin().powi(2), 1e-13));
        assert!(close(g.b_mix[0][0], -1.0 / r, 1e-13));
        assert!(close(g.b_mix[1][1], -1.0 / r, 1e-13));
        // ∂_1 Γ^1_{22} = −cos(2 x1)
        assert!(close(g.d_christoffel[0][0][1][1], -(2.0 * x1).cos(), 1e-12));
    }

    #[test]
    fn out_of_domain_and_degenerate() {
        let c = SurfaceChart::plate().with_domain(Domain::Rect {
            x1: [0.0, 1.0],
            x2: [0.0, 1.0],
        });
        assert!(matches!(c.eval([1.5, 0.5]), Err(Error::OutOfDomain { .. })));
        assert!(c.eval([1.0, 0.0]).is_ok());
        let s = SurfaceChart::sphere(1.0);
        assert!(matches!(
            s.eval([0.0, 0.3]),
            Err(Error::DegenerateTangents { .. })
        ));
    }

    #[test]
    fn elastic_plate_values() {
        let g = SurfaceChart::plate().eval([0.0, 0.0]).unwrap();
        let t = eval_elastic(&g, 1.0, 1.0, 5.0 / 6.0).unwrap();
        assert!(close(t.elastic[0][0][0][0], 8.0 / 3.0, 1e-14));
        assert!(close(t.elastic[0][0][1][1], 2.0 / 3.0, 1e-14));
        assert!(close(t.elastic[0][1][0][1], 1.0, 1e-14));
    }

    #[test]
    fn elastic_without_lambda() {
        let g = SurfaceChart::sphere(2.0).eval([0.9, 0.1]).unwrap();
        let t = eval_elastic(&g, 0.0, 1.7, 1.0).unwrap();
        let ac = g.a_con;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let v = 1.7 * (ac[a][c] * ac[b][d] + ac[b][c] * ac[a][d]);
                        assert!(close(t.elastic[a][b][c][d], v, 1e-13));
                    }
                }
            }
        }
    }

    #[test]
    fn stress_helper_matches_tensor() {
        let g = SurfaceChart::new(
            ChartKind::Hypar {
                c11: 0.3,
                c12: -0.7,
                c22: 0.2,
            },
            None,
        )
        .unwrap()
        .eval([0.4, -0.6])
        .unwrap();
        let mat = Material::new(0.6, 1.3, 5.0 / 6.0).unwrap();
        let t = eval_elastic(&g, mat.lam, mat.mu, mat.kappa).unwrap();
        let e = [[0.3, -0.2], [-0.2, 1.1]];
        let m = mat.stress(&g, &e);
        let back = mat.compliance_apply(&g, &m);
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for c in 0..2 {
                    for d in 0..2 {
                        s += t.elastic[a][b][c][d] * e[c][d];
                    }
                }
                assert!(close(m[a][b], s, 1e-13));
                assert!(close(back[a][b], e[a][b], 1e-13));
            }
        }
    }

    #[test]
    fn seminorms_vanish_on_plate_and_cylinder() {
        let tri = [[0.1, 0.1], [0.6, 0.2], [0.3, 0.7]];
        for c in [SurfaceChart::plate(), SurfaceChart::cylinder(1.0)] {
            for k in 1..=2 {
                let s = geometry_seminorms(&c, &tri, k).unwrap();
                assert!(s.total() < 1e-8, "{s:?}");
            }
        }
    }
}
