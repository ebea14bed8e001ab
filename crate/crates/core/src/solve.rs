//! Linear solves for the mixed saddle-point system and the DG system.

use crate::assembly::{Assembled, PrimalForms};
use crate::error::{Error, Result};
use crate::sparse::{
    leading_block, lin_comb, saddle_point, solve_checked, LdlFactor, SolveStats, SpMat,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mixed,
    Dg,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mixed => "mixed",
            Method::Dg => "dg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgScaling {
    /// a_h + ϵ^{-2}(γ_h + τ_h) = ρ_h + ε^{-2}(γ_h + τ_h)
    Original,
    /// ϵ² a_h + γ_h + τ_h
    Scaled,
}

/// ϵ² with ϵ^{-2} = ε^{-2} − 1, for half-thickness 0 < ε < 1.
pub fn split_epsilon_sq(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "half-thickness epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(epsilon * epsilon / (1.0 - epsilon * epsilon))
}

#[derive(Debug, Clone)]
pub struct ShellSolution {
    pub method: Method,
    /// Coefficients over blocks 1 and 2.
    pub primal: Vec<f64>,
    /// Coefficients over block 3 (mixed only).
    pub aux: Option<Vec<f64>>,
    pub epsilon: f64,
    pub penalty: f64,
    pub stats: SolveStats,
}

fn factor_with_hint(k: &SpMat, hint: &str) -> Result<LdlFactor> {
    LdlFactor::new(k).map_err(|e| match e {
        Error::Factorization(m) => Error::Factorization(format!("{m}; {hint}")),
        other => other,
    })
}

const MIXED_HINT: &str =
    "raise the penalty constant or refine the mesh (see the mesh factor in meshcond.csv)";
const DG_HINT: &str =
    "the mesh may violate the curvature-variation condition; refine (see meshcond.csv)";

/// Solves [A Bᵀ; B −ϵ²C] [x; m] = [f; 0].
pub fn solve_mixed(
    a: &SpMat,
    b: &SpMat,
    c: &SpMat,
    f: &[f64],
    epsilon: f64,
    penalty: f64,
) -> Result<ShellSolution> {
    let e2 = split_epsilon_sq(epsilon)?;
    let n = a.rows();
    let k = saddle_point(a, b, c, e2);
    let mut rhs = f.to_vec();
    rhs.resize(n + c.rows(), 0.0);
    let fac = factor_with_hint(&k, MIXED_HINT)?;
    let (x, stats) = solve_checked(&k, &fac, &rhs)?;
    Ok(ShellSolution {
        method: Method::Mixed,
        primal: x[..n].to_vec(),
        aux: Some(x[n..].to_vec()),
        epsilon,
        penalty,
        stats,
    })
}

/// DG system matrix for the given scaling.
pub fn dg_matrix(
    r: &SpMat,
    g: &SpMat,
    t: &SpMat,
    epsilon: f64,
    scaling: DgScaling,
) -> Result<SpMat> {
    let e2 = split_epsilon_sq(epsilon)?;
    let gt = lin_comb(1.0, g, 1.0, t);
    Ok(match scaling {
        DgScaling::Original => lin_comb(1.0, r, 1.0 / (epsilon * epsilon), &gt),
        DgScaling::Scaled => lin_comb(e2, r, 1.0 + e2, &gt),
    })
}

/// Solves the DG system with the given scaling and right-hand side as stated:
/// with the same `f`, the scaled solution is ϵ^{-2} times the original one.
pub fn solve_dg(
    r: &SpMat,
    g: &SpMat,
    t: &SpMat,
    f: &[f64],
    epsilon: f64,
    scaling: DgScaling,
    penalty: f64,
) -> Result<ShellSolution> {
    let k = dg_matrix(r, g, t, epsilon, scaling)?;
    let fac = factor_with_hint(&k, DG_HINT)?;
    let (x, stats) = solve_checked(&k, &fac, f)?;
    Ok(ShellSolution {
        method: Method::Dg,
        primal: x,
        aux: None,
        epsilon,
        penalty,
        stats,
    })
}

/// DG solve of the physical problem ρ_h + ε^{-2}(γ_h + τ_h) = f; for ε ≤ 1e-2 the
/// scaled matrix is used with the right-hand side multiplied by ϵ².
pub fn solve_dg_physical(
    forms: &PrimalForms,
    penalty: f64,
    f: &[f64],
    epsilon: f64,
) -> Result<ShellSolution> {
    let (r, g, t) = (forms.rho(penalty), forms.gamma(penalty), forms.tau(penalty));
    if epsilon <= 1e-2 {
        let e2 = split_epsilon_sq(epsilon)?;
        let fs: Vec<f64> = f.iter().map(|v| v * e2).collect();
        solve_dg(&r, &g, &t, &fs, epsilon, DgScaling::Scaled, penalty)
    } else {
        solve_dg(&r, &g, &t, f, epsilon, DgScaling::Original, penalty)
    }
}

/// Mixed solve straight from assembled blocks.
pub fn solve_mixed_assembled(
    asm: &Assembled,
    penalty: f64,
    f: &[f64],
    epsilon: f64,
) -> Result<ShellSolution> {
    let mixed = asm
        .mixed
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("mixed solve needs the auxiliary block".into()))?;
    let a = asm.primal.a_theta(penalty, 1.0);
    solve_mixed(&a, &mixed.b, &mixed.c, f, epsilon, penalty)
}

/// Both methods from one mixed assembly: ϑ = 1 and the full system for the
/// mixed method; ϑ = ε^{-2} and the leading block-1 submatrix for the DG method.
pub fn realize_via_theta(
    asm: &Assembled,
    block1: usize,
    penalty: f64,
    f: &[f64],
    epsilon: f64,
    method: Method,
) -> Result<ShellSolution> {
    let theta = match method {
        Method::Mixed => 1.0,
        Method::Dg => 1.0 / (epsilon * epsilon),
    };
    solve_with_theta(asm, block1, penalty, f, epsilon, method, theta)
}

/// Like [`realize_via_theta`] with an explicit ϑ in A(ϑ) = R + ϑ(G + T).
pub fn solve_with_theta(
    asm: &Assembled,
    block1: usize,
    penalty: f64,
    f: &[f64],
    epsilon: f64,
    method: Method,
    theta: f64,
) -> Result<ShellSolution> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "theta must be finite and nonnegative, got {theta}"
        )));
    }
    let a = asm.primal.a_theta(penalty, theta);
    match method {
        Method::Mixed => {
            let mixed = asm.mixed.as_ref().ok_or_else(|| {
                Error::InvalidParameter("mixed solve needs the auxiliary block".into())
            })?;
            solve_mixed(&a, &mixed.b, &mixed.c, f, epsilon, penalty)
        }
        Method::Dg => {
            let k = leading_block(&a, block1);
            let fac = factor_with_hint(&k, DG_HINT)?;
            let (x, stats) = solve_checked(&k, &fac, &f[..block1])?;
            Ok(ShellSolution {
                method: Method::Dg,
                primal: x,
                aux: None,
                epsilon,
                penalty,
                stats,
            })
        }
    }
}
