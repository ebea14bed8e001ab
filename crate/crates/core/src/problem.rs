//! A complete shell problem (surface, mesh, material, thickness, loads) and its
//! discretization by either method.

use crate::assembly::{
    assemble_forms, assemble_load, default_penalty, manufactured_load, probe_penalty, Assembled,
    LoadSpec, QuadratureOptions,
};
use crate::error::Result;
use crate::exact::ExactFields;
use crate::fe_space::{build_dof_layout, DiscreteField, DofLayout, SpaceOptions};
use crate::geometry::{Material, SurfaceChart};
use crate::mesh::{mesh_condition_report, Mesh, MeshConditionReport};
use crate::norms::{norm_squares, NormReport, NormSquares};
use crate::solve::{
    solve_dg_physical, solve_mixed_assembled, solve_with_theta, Method, ShellSolution,
};

#[derive(Debug, Clone)]
pub struct ShellProblem {
    pub chart: SurfaceChart,
    pub mesh: Mesh,
    pub material: Material,
    /// Half-thickness.
    pub epsilon: f64,
    pub loads: LoadSpec,
    /// When set, the load is derived from these fields so that they solve the problem.
    pub manufactured: Option<ExactFields>,
    /// Fixed penalty constant; `None` probes from the default.
    pub penalty: Option<f64>,
    pub quad: QuadratureOptions,
    /// Use full P2/P3 local spaces on free-boundary elements.
    pub full_enrichment: bool,
    /// Replaces the method's ϑ in A(ϑ) = R + ϑ(G + T) (1 for mixed, ε^{-2} for DG).
    pub theta: Option<f64>,
}

impl ShellProblem {
    pub fn new(chart: SurfaceChart, mesh: Mesh, epsilon: f64, loads: LoadSpec) -> ShellProblem {
        ShellProblem {
            chart,
            mesh,
            material: Material::default(),
            epsilon,
            loads,
            manufactured: None,
            penalty: None,
            quad: QuadratureOptions::default(),
            full_enrichment: false,
            theta: None,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> ShellProblem {
        ShellProblem {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_mesh(&self, mesh: Mesh) -> ShellProblem {
        ShellProblem {
            mesh,
            ..self.clone()
        }
    }

    pub fn space_options(&self, method: Method) -> SpaceOptions {
        match method {
            Method::Mixed => SpaceOptions {
                full_enrichment: self.full_enrichment,
                ..SpaceOptions::mixed()
            },
            Method::Dg => SpaceOptions::dg(),
        }
    }

    pub fn mesh_condition(&self) -> Result<MeshConditionReport> {
        mesh_condition_report(&self.mesh, &self.chart, self.epsilon)
    }
}

/// Assembled system of one method on one problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub method: Method,
    pub layout: DofLayout,
    pub asm: Assembled,
    pub penalty: f64,
    pub penalty_doublings: usize,
    pub load: Vec<f64>,
    pub theta: Option<f64>,
}

pub fn discretize(p: &ShellProblem, method: Method) -> Result<Discretization> {
    let layout = build_dof_layout(&p.mesh, &p.chart, p.space_options(method))?;
    let asm = assemble_forms(&p.mesh, &p.chart, &layout, &p.material, &p.quad)?;
    let (penalty, penalty_doublings) = match p.penalty {
        Some(c) => (c, 0),
        None => probe_penalty(&asm.primal, default_penalty(&asm, &p.material))?,
    };
    let mut load = assemble_load(&p.mesh, &p.chart, &layout, &p.loads, &p.quad)?;
    if let Some(x) = &p.manufactured {
        let w_mem = 1.0 / (p.epsilon * p.epsilon);
        let m = manufactured_load(&p.mesh, &p.chart, &layout, &p.material, x, w_mem, &p.quad)?;
        load.iter_mut().zip(&m).for_each(|(a, b)| *a += b);
    }
    Ok(Discretization {
        method,
        layout,
        asm,
        penalty,
        penalty_doublings,
        load,
        theta: p.theta,
    })
}

impl Discretization {
    /// Solves for half-thickness `epsilon` (the load is used as assembled).
    pub fn solve(&self, epsilon: f64) -> Result<ShellSolution> {
        if let Some(theta) = self.theta {
            let block1 = self.layout.block1;
            return solve_with_theta(
                &self.asm,
                block1,
                self.penalty,
                &self.load,
                epsilon,
                self.method,
                theta,
            );
        }
        match self.method {
            Method::Mixed => solve_mixed_assembled(&self.asm, self.penalty, &self.load, epsilon),
            Method::Dg => solve_dg_physical(&self.asm.primal, self.penalty, &self.load, epsilon),
        }
    }

    pub fn field<'a>(&'a self, x: &'a [f64]) -> DiscreteField<'a> {
        DiscreteField {
            layout: &self.layout,
            coeffs: x,
        }
    }
}

/// A solved problem with its discretization.
#[derive(Debug, Clone)]
pub struct Solved {
    pub disc: Discretization,
    pub solution: ShellSolution,
}

impl Solved {
    pub fn field(&self) -> DiscreteField<'_> {
        self.disc.field(&self.solution.primal)
    }

    /// Norm squares and per-element volume H_h squares of the primal solution.
    pub fn norm_squares(&self, p: &ShellProblem) -> Result<(NormSquares, Vec<f64>)> {
        norm_squares(&self.field(), &p.mesh, &p.chart, &p.quad)
    }

    pub fn norms(&self, p: &ShellProblem) -> Result<NormReport> {
        let (sq, _) = self.norm_squares(p)?;
        let mut r = NormReport::from_squares(&sq);
        let c = self.disc.penalty;
        let f = &self.disc.asm.primal;
        r.energies = Some(crate::norms::energies(
            &f.rho(c),
            &f.gamma(c),
            &f.tau(c),
            &self.solution.primal,
            p.epsilon,
        )?);
        if let (Some(aux), Some(mixed)) = (&self.solution.aux, &self.disc.asm.mixed) {
            let qv = crate::norms::assemble_v_gram(&p.mesh, &self.disc.layout);
            r.v_norm = Some(crate::sparse::quad_form(&qv, aux).max(0.0).sqrt());
            let grams =
                crate::norms::assemble_norm_grams(&p.mesh, &p.chart, &self.disc.layout, &p.quad)?;
            let dual = crate::norms::DualNorm::new(&grams.q_h)?;
            r.weak_v_norm = Some(crate::norms::weak_vbar_norm(&mixed.b, aux, &dual)?);
        }
        Ok(r)
    }
}

pub fn solve_problem(p: &ShellProblem, method: Method) -> Result<Solved> {
    let disc = discretize(p, method)?;
    let solution = disc.solve(p.epsilon)?;
    Ok(Solved { disc, solution })
}
