//! Bending, membrane and transverse shear strains of a field sample.

use crate::geometry::{GeometryEval, Mat2, Vec2};

/// Values and parameter-domain partial derivatives of (θ, u, w) at a point.
/// `grad_theta[α][β]` = ∂_β θ_α, likewise for u.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldSample {
    pub theta: Vec2,
    pub u: Vec2,
    pub w: f64,
    pub grad_theta: Mat2,
    pub grad_u: Mat2,
    pub grad_w: Vec2,
}

impl FieldSample {
    pub fn axpy(&mut self, s: f64, o: &FieldSample) {
        for a in 0..2 {
            self.theta[a] += s * o.theta[a];
            self.u[a] += s * o.u[a];
            self.grad_w[a] += s * o.grad_w[a];
            for b in 0..2 {
                self.grad_theta[a][b] += s * o.grad_theta[a][b];
                self.grad_u[a][b] += s * o.grad_u[a][b];
            }
        }
        self.w += s * o.w;
    }

    pub fn scaled(&self, s: f64) -> FieldSample {
        let mut r = FieldSample::default();
        r.axpy(s, self);
        r
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StrainSample {
    pub rho: Mat2,
    pub gamma: Mat2,
    pub tau: Vec2,
}

/// Covariant derivatives (u_{α|β}, θ_{α|β}), indexed [α][β].
pub fn covariant_derivatives(s: &FieldSample, g: &GeometryEval) -> (Mat2, Mat2) {
    let gam = &g.christoffel;
    let mut du = [[0.0; 2]; 2];
    let mut dt = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut cu = 0.0;
            let mut ct = 0.0;
            for c in 0..2 {
                cu += gam[c][a][b] * s.u[c];
                ct += gam[c][a][b] * s.theta[c];
            }
            du[a][b] = s.grad_u[a][b] - cu;
            dt[a][b] = s.grad_theta[a][b] - ct;
        }
    }
    (du, dt)
}

pub fn strains(s: &FieldSample, g: &GeometryEval) -> StrainSample {
    let (du, dt) = covariant_derivatives(s, g);
    let bm = &g.b_mix;
    let mut rho = [[0.0; 2]; 2];
    let mut gamma = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            // b^γ_α u_{γ|β} with b_mix[γ][α] = b^γ_α
            let mut bu_ab = 0.0;
            let mut bu_ba = 0.0;
            for c in 0..2 {
                bu_ab += bm[c][a] * du[c][b];
                bu_ba += bm[c][b] * du[c][a];
            }
            rho[a][b] = 0.5 * (dt[a][b] + dt[b][a]) - 0.5 * (bu_ab + bu_ba) + g.c_cov[a][b] * s.w;
            gamma[a][b] = 0.5 * (du[a][b] + du[b][a]) - g.b_cov[a][b] * s.w;
        }
    }
    let mut tau = [0.0; 2];
    for a in 0..2 {
        let mut bu = 0.0;
        for c in 0..2 {
            bu += bm[c][a] * s.u[c];
        }
        tau[a] = s.grad_w[a] + bu + s.theta[a];
    }
    StrainSample { rho, gamma, tau }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SurfaceChart;

    #[test]
    fn plate_reduces_to_reissner_mindlin() {
        let g = SurfaceChart::plate().eval([0.3, 0.4]).unwrap();
        let s = FieldSample {
            theta: [0.1, 0.2],
            u: [0.5, -0.3],
            w: 0.7,
            grad_theta: [[1.0, 2.0], [3.0, 4.0]],
            grad_u: [[0.5, 0.25], [-0.75, 1.5]],
            grad_w: [0.3, -0.2],
        };
        let e = strains(&s, &g);
        assert_eq!(e.rho, [[1.0, 2.5], [2.5, 4.0]]);
        assert_eq!(e.gamma, [[0.5, -0.25], [-0.25, 1.5]]);
        assert!((e.tau[0] - 0.4).abs() < 1e-15 && (e.tau[1] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn plate_rigid_motion_has_no_membrane_strain() {
        let g = SurfaceChart::plate().eval([0.3, 0.4]).unwrap();
        let omega = 0.7;
        let s = FieldSample {
            u: [1.0 - omega * 0.4, 2.0 + omega * 0.3],
            grad_u: [[0.0, -omega], [omega, 0.0]],
            ..Default::default()
        };
        assert_eq!(strains(&s, &g).gamma, [[0.0; 2]; 2]);
    }

    #[test]
    fn cylinder_normal_displacement() {
        let r = 2.0;
        let g = SurfaceChart::cylinder(r).eval([0.3, 0.4]).unwrap();
        let s = FieldSample {
            w: 1.0,
            ..Default::default()
        };
        let e = strains(&s, &g);
        assert!((e.gamma[0][0] - 1.0 / r).abs() < 1e-14);
        assert!((e.rho[0][0] - 1.0 / (r * r)).abs() < 1e-14);
        assert_eq!(e.tau, [0.0, 0.0]);
    }

    #[test]
    fn sphere_covariant_derivative_of_constant_field() {
        let g = SurfaceChart::sphere(1.5).eval([1.0, 0.3]).unwrap();
        let s = FieldSample {
            u: [1.0, 0.0],
            ..Default::default()
        };
        let (du, _) = covariant_derivatives(&s, &g);
        // Γ^1_12 = 0 and Γ^2_12 = cot x1 for the polar chart
        assert!((du[0][1] + g.christoffel[0][0][1]).abs() < 1e-15);
        assert!(g.christoffel[0][0][1].abs() < 1e-14);
        let (_, dt) = covariant_derivatives(
            &FieldSample {
                theta: [0.0, 1.0],
                ..Default::default()
            },
            &g,
        );
        assert!((dt[1][1] + g.christoffel[1][1][1]).abs() < 1e-15);
        assert!((g.christoffel[1][0][1] - 1.0f64.cos() / 1.0f64.sin()).abs() < 1e-12);
    }
}
