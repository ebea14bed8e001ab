//! Cubic polynomials on the reference triangle, in the coordinates (ξ, η).
//!
//! Barycentric coordinates: λ0 = 1 − ξ − η, λ1 = ξ, λ2 = η. Local edge `i` is the
//! edge opposite vertex `i`, so λi vanishes on it.

/// Exponents of the ten monomials ξ^i η^j with i + j ≤ 3.
pub const MONOMIALS: [(u32, u32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

fn monomial_index(i: u32, j: u32) -> Option<usize> {
    MONOMIALS.iter().position(|&m| m == (i, j))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poly {
    pub c: [f64; 10],
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: [0.0; 10] }
    }

    pub fn constant(v: f64) -> Poly {
        let mut p = Poly::zero();
        p.c[0] = v;
        p
    }

    /// Barycentric coordinate λi.
    pub fn lambda(i: usize) -> Poly {
        let mut p = Poly::zero();
        match i {
            0 => {
                p.c[0] = 1.0;
                p.c[1] = -1.0;
                p.c[2] = -1.0;
            }
            1 => p.c[1] = 1.0,
            2 => p.c[2] = 1.0,
            _ => panic!("barycentric index out of range"),
        }
        p
    }

    pub fn degree(&self) -> usize {
        MONOMIALS
            .iter()
            .zip(&self.c)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, _)| (m.0 + m.1) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = *self;
        for k in 0..10 {
            p.c[k] += o.c[k];
        }
        p
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = *self;
        for v in &mut p.c {
            *v *= s;
        }
        p
    }

    pub fn axpy(&mut self, s: f64, o: &Poly) {
        for k in 0..10 {
            self.c[k] += s * o.c[k];
        }
    }

    /// Product; panics if the result would exceed degree 3.
    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (a, &(i1, j1)) in MONOMIALS.iter().enumerate() {
            if self.c[a] == 0.0 {
                continue;
            }
            for (b, &(i2, j2)) in MONOMIALS.iter().enumerate() {
                if o.c[b] == 0.0 {
                    continue;
                }
                let k = monomial_index(i1 + i2, j1 + j2).expect("product exceeds degree 3");
                p.c[k] += self.c[a] * o.c[b];
            }
        }
        p
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let (s, t) = (x[0], x[1]);
        let c = &self.c;
        c[0] + s * (c[1] + s * (c[3] + s * c[6]) + t * (c[4] + s * c[7]))
            + t * (c[2] + t * (c[5] + t * c[9]) + s * t * c[8])
    }

    /// (value, ∂ξ, ∂η)
    #[inline]
    pub fn eval_grad(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let (s, t) = (x[0], x[1]);
        let c = &self.c;
        let v = self.eval(x);
        let ds = c[1]
            + 2.0 * c[3] * s
            + c[4] * t
            + 3.0 * c[6] * s * s
            + 2.0 * c[7] * s * t
            + c[8] * t * t;
        let dt = c[2]
            + c[4] * s
            + 2.0 * c[5] * t
            + c[7] * s * s
            + 2.0 * c[8] * s * t
            + 3.0 * c[9] * t * t;
        (v, [ds, dt])
    }
}

/// Affine map from the reference triangle to a parameter-domain triangle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: [f64; 2],
    /// Columns are v1 − v0 and v2 − v0.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// J^{-T}, mapping reference gradients to parameter-domain gradients.
    pub jinv_t: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn new(p: [[f64; 2]; 3]) -> AffineMap {
        let jac = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jinv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        AffineMap {
            origin: p[0],
            jac,
            det,
            jinv_t,
        }
    }

    #[inline]
    pub fn to_physical(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * x[0] + self.jac[0][1] * x[1],
            self.origin[1] + self.jac[1][0] * x[0] + self.jac[1][1] * x[1],
        ]
    }

    #[inline]
    pub fn to_reference(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        // J^{-1} = (J^{-T})ᵀ
        [
            self.jinv_t[0][0] * d[0] + self.jinv_t[1][0] * d[1],
            self.jinv_t[0][1] * d[0] + self.jinv_t[1][1] * d[1],
        ]
    }

    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv_t[0][0] * g[0] + self.jinv_t[0][1] * g[1],
            self.jinv_t[1][0] * g[0] + self.jinv_t[1][1] * g[1],
        ]
    }
}
