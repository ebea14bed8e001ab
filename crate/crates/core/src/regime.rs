//! Asymptotic regime detection: compare the mixed and DG solutions and extrapolate
//! the mixed solution in the thickness, (4u^{ε/2} − u^ε)/3, to expose whether a
//! nonzero thickness-independent limit exists.

use crate::error::{Error, Result};
use crate::mesh::MeshConditionReport;
use crate::norms::norm_squares;
use crate::problem::{discretize, ShellProblem, Solved};
use crate::solve::{Method, ShellSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// mixed/DG norm ratio that signals locking of the DG solution
    pub t_big: f64,
    /// extrapolated/mixed norm ratio regarded as zero
    pub t_zero: f64,
    /// relative change regarded as a stabilized sequence
    pub stabilization: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            t_big: 10.0,
            t_zero: 0.1,
            stabilization: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bending,
    NonBending,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Bending => "bending-dominated",
            Verdict::NonBending => "non-bending (membrane/shear or intermediate)",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeNorms {
    pub mixed_eps: f64,
    pub mixed_half_eps: f64,
    pub extrap: f64,
    pub dg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub epsilon: f64,
    pub norms: RegimeNorms,
    pub dg_over_mixed: f64,
    pub extrap_over_eps: f64,
    pub half_over_eps: f64,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
    pub mesh_condition: [MeshConditionReport; 2],
    /// Per-element H_h volume norm of the extrapolated field.
    pub extrap_per_element: Vec<f64>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// The decision rule applied to the four H_h norms.
pub fn classify(n: &RegimeNorms, th: &Thresholds) -> Verdict {
    if ratio(n.mixed_eps, n.dg) >= th.t_big {
        return Verdict::Bending;
    }
    let decreasing = n.mixed_half_eps < n.mixed_eps && n.extrap < n.mixed_half_eps;
    if decreasing && n.extrap <= th.t_zero * n.mixed_eps {
        return Verdict::NonBending;
    }
    let stable = (n.extrap - n.mixed_half_eps).abs() <= th.stabilization * n.mixed_half_eps;
    if stable && n.extrap > th.t_zero * n.mixed_eps {
        return Verdict::Bending;
    }
    Verdict::Inconclusive
}

/// (4 u_half − u_eps)/3, entrywise, evaluated as u_eps + 4(u_half − u_eps)/3.
pub fn extrapolate(u_eps: &[f64], u_half: &[f64]) -> Vec<f64> {
    u_eps
        .iter()
        .zip(u_half)
        .map(|(a, b)| a + 4.0 * (b - a) / 3.0)
        .collect()
}

/// The three solves behind a report.
#[derive(Debug, Clone)]
pub struct RegimeSolutions {
    pub mixed_eps: Solved,
    pub mixed_half_eps: ShellSolution,
    pub extrap: Vec<f64>,
    pub dg: Solved,
}

pub fn detect_regime(p: &ShellProblem, th: &Thresholds) -> Result<(RegimeReport, RegimeSolutions)> {
    if p.manufactured.is_some() {
        return Err(Error::InvalidParameter(
            "regime detection needs thickness-independent loads, not a manufactured solution"
                .into(),
        ));
    }
    let eps = p.epsilon;
    let (mixed, dg) = rayon::join(
        || discretize(p, Method::Mixed),
        || discretize(p, Method::Dg),
    );
    let (mixed, dg) = (mixed?, dg?);
    let (r1, r2) = rayon::join(
        || rayon::join(|| mixed.solve(eps), || mixed.solve(eps / 2.0)),
        || dg.solve(eps),
    );
    let ((u_eps, u_half), u_dg) = ((r1.0?, r1.1?), r2?);
    let extrap = extrapolate(&u_eps.primal, &u_half.primal);
    let h = |d: &crate::problem::Discretization, x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (sq, per) = norm_squares(&d.field(x), &p.mesh, &p.chart, &p.quad)?;
        Ok((sq.h.sqrt(), per))
    };
    let (n_eps, _) = h(&mixed, &u_eps.primal)?;
    let (n_half, _) = h(&mixed, &u_half.primal)?;
    let (n_ext, per) = h(&mixed, &extrap)?;
    let (n_dg, _) = h(&dg, &u_dg.primal)?;
    let norms = RegimeNorms {
        mixed_eps: n_eps,
        mixed_half_eps: n_half,
        extrap: n_ext,
        dg: n_dg,
    };
    let report = RegimeReport {
        epsilon: eps,
        norms,
        dg_over_mixed: ratio(n_dg, n_eps),
        extrap_over_eps: ratio(n_ext, n_eps),
        half_over_eps: ratio(n_half, n_eps),
        verdict: classify(&norms, th),
        thresholds: *th,
        mesh_condition: [
            p.mesh_condition()?,
            p.with_epsilon(eps / 2.0).mesh_condition()?,
        ],
        extrap_per_element: per.into_iter().map(f64::sqrt).collect(),
    };
    let sols = RegimeSolutions {
        mixed_eps: Solved {
            disc: mixed,
            solution: u_eps,
        },
        mixed_half_eps: u_half,
        extrap,
        dg: Solved {
            disc: dg,
            solution: u_dg,
        },
    };
    Ok((report, sols))
}

/// The solution to use for the detected regime.
pub fn recommend_solution<'a>(
    report: &RegimeReport,
    sols: &'a RegimeSolutions,
) -> Result<&'a Solved> {
    match report.verdict {
        Verdict::Bending => Ok(&sols.mixed_eps),
        Verdict::NonBending => Ok(&sols.dg),
        Verdict::Inconclusive => Err(Error::Inconclusive),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(m: f64, h: f64, e: f64, d: f64) -> RegimeNorms {
        RegimeNorms {
            mixed_eps: m,
            mixed_half_eps: h,
            extrap: e,
            dg: d,
        }
    }

    #[test]
    fn decision_rule() {
        let th = Thresholds::default();
        assert_eq!(classify(&norms(1.0, 1.0, 1.0, 0.05), &th), Verdict::Bending);
        assert_eq!(
            classify(&norms(1.0, 0.25, 0.01, 0.9), &th),
            Verdict::NonBending
        );
        assert_eq!(
            classify(&norms(1.0, 0.99, 0.985, 0.5), &th),
            Verdict::Bending
        );
        assert_eq!(
            classify(&norms(1.0, 0.7, 0.5, 0.5), &th),
            Verdict::Inconclusive
        );
        assert_eq!(
            classify(&norms(0.0, 0.0, 0.0, 0.0), &th),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn extrapolation_of_identical_inputs_is_identity() {
        let u: Vec<f64> = (0..50).map(|i| (i as f64 * 0.731).sin() * 1e3).collect();
        let e = extrapolate(&u, &u);
        assert_eq!(u, e);
        let v: Vec<f64> = u.iter().map(|x| x * 0.5).collect();
        for ((a, b), c) in u.iter().zip(&v).zip(extrapolate(&u, &v)) {
            assert!((c - (4.0 * b - a) / 3.0).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }
}
