//! Convergence and locking studies over mesh levels and thicknesses.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fe_space::{Difference, DiscreteField, FieldSource};
use crate::mesh::{Mesh, MeshConditionReport};
use crate::norms::{norm_squares, relative, NormSquares};
use crate::problem::{discretize, solve_problem, ShellProblem, Solved};
use crate::solve::Method;
use crate::strain::FieldSample;

/// A field on a coarse mesh sampled on a mesh obtained from it by `levels` uniform
/// refinements (children of triangle t are numbered 4t..4t+3).
pub struct Prolonged<'a> {
    pub coarse: DiscreteField<'a>,
    pub levels: u32,
}

impl FieldSource for Prolonged<'_> {
    fn sample(&self, t: usize, _xref: [f64; 2], x: [f64; 2]) -> FieldSample {
        let parent = t >> (2 * self.levels);
        let xref = self.coarse.layout.maps[parent].to_reference(x);
        self.coarse.sample(parent, xref, x)
    }
}

/// ρ + ε^{-2}(γ + τ) from norm squares.
pub fn energy_sq(sq: &NormSquares, epsilon: f64) -> f64 {
    sq.rho + (sq.gamma + sq.tau) / (epsilon * epsilon)
}

/// Observed order log(e0/e1)/log(h0/h1).
pub fn observed_order(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    (e0 > 0.0 && e1 > 0.0 && h0 > h1).then(|| (e0 / e1).ln() / (h0 / h1).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Manufactured,
    /// Difference to the solution on the next finer level.
    SelfConvergence,
}

impl Reference {
    pub fn name(self) -> &'static str {
        match self {
            Reference::Manufactured => "manufactured",
            Reference::SelfConvergence => "self-convergence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub triangles: usize,
    pub h: f64,
    pub dofs: usize,
    pub error_h: f64,
    pub rel_error_h: f64,
    /// Error in the energy norm ρ + ε^{-2}(γ + τ).
    pub error_energy: f64,
    pub rel_error_energy: f64,
    pub order_h: Option<f64>,
    pub order_energy: Option<f64>,
    pub condition: MeshConditionReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub method: Method,
    pub reference: Reference,
    pub epsilon: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Smallest observed H_h order over the table.
    pub fn min_order_h(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order_h).reduce(f64::min)
    }

    pub fn min_order_energy(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.order_energy)
            .reduce(f64::min)
    }
}

/// Meshes `p.mesh` refined 0..count times.
pub fn mesh_levels(mesh: &Mesh, count: usize) -> Vec<Mesh> {
    let mut out = Vec::with_capacity(count);
    let mut m = mesh.clone();
    for k in 0..count {
        if k > 0 {
            m = m.refine_uniform();
        }
        out.push(m.clone());
    }
    out
}

fn squares(p: &ShellProblem, src: &dyn FieldSource) -> Result<NormSquares> {
    Ok(norm_squares(src, &p.mesh, &p.chart, &p.quad)?.0)
}

/// Error table over `levels` meshes (the initial mesh and its uniform refinements).
/// Without a manufactured solution, each level is compared with the next finer one,
/// which costs one extra solve.
pub fn convergence_study(
    p: &ShellProblem,
    method: Method,
    levels: usize,
) -> Result<ConvergenceStudy> {
    if levels == 0 {
        return Err(Error::InvalidParameter(
            "convergence study needs at least one level".into(),
        ));
    }
    let reference = if p.manufactured.is_some() {
        Reference::Manufactured
    } else {
        Reference::SelfConvergence
    };
    let n_solves = levels + usize::from(reference == Reference::SelfConvergence);
    let problems: Vec<ShellProblem> = mesh_levels(&p.mesh, n_solves)
        .into_iter()
        .map(|m| p.with_mesh(m))
        .collect();
    let solved: Vec<Solved> = problems
        .par_iter()
        .map(|q| solve_problem(q, method))
        .collect::<Result<_>>()?;
    let eps = p.epsilon;
    let mut rows: Vec<ConvergenceRow> = (0..levels)
        .into_par_iter()
        .map(|k| -> Result<ConvergenceRow> {
            let (err, refn) = match &p.manufactured {
                Some(exact) => {
                    let q = &problems[k];
                    let u = solved[k].field();
                    (squares(q, &Difference(&u, exact))?, squares(q, exact)?)
                }
                None => {
                    let q = &problems[k + 1];
                    let fine = solved[k + 1].field();
                    let coarse = Prolonged {
                        coarse: solved[k].field(),
                        levels: 1,
                    };
                    (squares(q, &Difference(&coarse, &fine))?, squares(q, &fine)?)
                }
            };
            let q = &problems[k];
            Ok(ConvergenceRow {
                level: k,
                triangles: q.mesh.num_triangles(),
                h: q.mesh.h_max(),
                dofs: solved[k].disc.layout.n_total(),
                error_h: err.h.sqrt(),
                rel_error_h: relative(err.h.sqrt(), refn.h.sqrt()),
                error_energy: energy_sq(&err, eps).sqrt(),
                rel_error_energy: relative(
                    energy_sq(&err, eps).sqrt(),
                    energy_sq(&refn, eps).sqrt(),
                ),
                order_h: None,
                order_energy: None,
                condition: q.mesh_condition()?,
            })
        })
        .collect::<Result<_>>()?;
    for k in 1..rows.len() {
        let (a, b) = (&rows[k - 1], &rows[k]);
        let oh = observed_order(a.error_h, b.error_h, a.h, b.h);
        let oe = observed_order(a.error_energy, b.error_energy, a.h, b.h);
        rows[k].order_h = oh;
        rows[k].order_energy = oe;
    }
    Ok(ConvergenceStudy {
        method,
        reference,
        epsilon: eps,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockingReference {
    Manufactured,
    /// Mixed solution on the once-refined mesh.
    MixedRefined,
}

impl LockingReference {
    pub fn name(self) -> &'static str {
        match self {
            LockingReference::Manufactured => "manufactured",
            LockingReference::MixedRefined => "mixed-refined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockingRow {
    pub epsilon: f64,
    pub method: Method,
    pub h_norm: f64,
    /// Energy norm ρ + ε^{-2}(γ + τ) of the solution.
    pub energy_norm: f64,
    pub rel_error_energy: f64,
    pub rel_error_h: f64,
    pub condition: MeshConditionReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockingStudy {
    pub reference: LockingReference,
    pub rows: Vec<LockingRow>,
}

impl LockingStudy {
    pub fn h_norm(&self, method: Method, epsilon: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.epsilon == epsilon)
            .map(|r| r.h_norm)
    }
}

/// Solutions of both methods at fixed mesh over a range of half-thicknesses.
pub fn locking_study(
    p: &ShellProblem,
    epsilons: &[f64],
    methods: &[Method],
) -> Result<LockingStudy> {
    if epsilons.is_empty() || methods.is_empty() {
        return Err(Error::InvalidParameter(
            "locking study needs thicknesses and methods".into(),
        ));
    }
    let reference = if p.manufactured.is_some() {
        LockingReference::Manufactured
    } else {
        LockingReference::MixedRefined
    };
    let shared: Vec<Option<crate::problem::Discretization>> = if p.manufactured.is_none() {
        methods
            .par_iter()
            .map(|&m| discretize(p, m).map(Some))
            .collect::<Result<_>>()?
    } else {
        vec![None; methods.len()]
    };
    let fine_problem = p.with_mesh(p.mesh.refine_uniform());
    let fine = match reference {
        LockingReference::MixedRefined => {
            let d = discretize(&fine_problem, Method::Mixed)?;
            let sols: Vec<Vec<f64>> = epsilons
                .par_iter()
                .map(|&e| d.solve(e).map(|s| s.primal))
                .collect::<Result<_>>()?;
            Some((d, sols))
        }
        LockingReference::Manufactured => None,
    };
    let jobs: Vec<(f64, usize)> = epsilons
        .iter()
        .flat_map(|&e| (0..methods.len()).map(move |i| (e, i)))
        .collect();
    let rows: Vec<LockingRow> = jobs
        .par_iter()
        .enumerate()
        .map(|(j, &(eps, i))| -> Result<LockingRow> {
            let q = p.with_epsilon(eps);
            let solved = match &shared[i] {
                Some(d) => Solved {
                    disc: d.clone(),
                    solution: d.solve(eps)?,
                },
                None => solve_problem(&q, methods[i])?,
            };
            let own = squares(&q, &solved.field())?;
            let (err, refn) = match (&q.manufactured, &fine) {
                (Some(exact), _) => (
                    squares(&q, &Difference(&solved.field(), exact))?,
                    squares(&q, exact)?,
                ),
                (None, Some((fd, sols))) => {
                    let fq = fine_problem.with_epsilon(eps);
                    let ref_field = fd.field(&sols[j / methods.len()]);
                    let coarse = Prolonged {
                        coarse: solved.field(),
                        levels: 1,
                    };
                    (
                        squares(&fq, &Difference(&coarse, &ref_field))?,
                        squares(&fq, &ref_field)?,
                    )
                }
                (None, None) => unreachable!("reference chosen above"),
            };
            Ok(LockingRow {
                epsilon: eps,
                method: methods[i],
                h_norm: own.h.sqrt(),
                energy_norm: energy_sq(&own, eps).sqrt(),
                rel_error_energy: relative(
                    energy_sq(&err, eps).sqrt(),
                    energy_sq(&refn, eps).sqrt(),
                ),
                rel_error_h: relative(err.h.sqrt(), refn.h.sqrt()),
                condition: q.mesh_condition()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LockingStudy { reference, rows })
}
