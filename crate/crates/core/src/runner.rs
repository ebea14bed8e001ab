//! Runs a configured study and writes its artifacts.

use std::path::{Path, PathBuf};

use crate::config::{ProblemSpec, StudyKind};
use crate::error::Result;
use crate::fe_space::{Difference, FieldSource};
use crate::norms::{norm_squares, relative};
use crate::output::{
    convergence_csv, fields_vtk, locking_csv, meshcond_csv, norms_csv, regime_csv, regime_text,
    MeshConditionRow, NormsEntry,
};
use crate::problem::{solve_problem, ShellProblem, Solved};
use crate::regime::{detect_regime, recommend_solution};
use crate::study::{convergence_study, energy_sq, locking_study};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// One-line human-readable outcome.
    pub message: String,
}

fn meshcond_row(p: &ShellProblem, level: usize) -> Result<MeshConditionRow> {
    Ok(MeshConditionRow {
        level,
        epsilon: p.epsilon,
        triangles: p.mesh.num_triangles(),
        h: p.mesh.h_max(),
        report: p.mesh_condition()?,
    })
}

fn norms_entry(p: &ShellProblem, s: &Solved) -> Result<NormsEntry> {
    let errors = match &p.manufactured {
        Some(exact) => {
            let (err, _) =
                norm_squares(&Difference(&s.field(), exact), &p.mesh, &p.chart, &p.quad)?;
            let (refn, _) = norm_squares(exact, &p.mesh, &p.chart, &p.quad)?;
            Some((
                relative(err.h.sqrt(), refn.h.sqrt()),
                relative(
                    energy_sq(&err, p.epsilon).sqrt(),
                    energy_sq(&refn, p.epsilon).sqrt(),
                ),
            ))
        }
        None => None,
    };
    Ok(NormsEntry {
        method: s.disc.method,
        epsilon: p.epsilon,
        penalty: s.disc.penalty,
        penalty_doublings: s.disc.penalty_doublings,
        dofs: s.disc.layout.n_total(),
        norms: s.norms(p)?,
        stats: s.solution.stats,
        errors,
    })
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs `kind` on `spec` and writes the results into `out`.
pub fn run_study(spec: &ProblemSpec, kind: StudyKind, out: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out)?;
    let p = spec.problem()?;
    let methods = spec.method.methods();
    let mut w = Writer {
        dir: out,
        files: Vec::new(),
    };
    let message = match kind {
        StudyKind::Solve => {
            let solved: Vec<Solved> = methods
                .iter()
                .map(|&m| solve_problem(&p, m))
                .collect::<Result<_>>()?;
            let entries: Vec<NormsEntry> = solved
                .iter()
                .map(|s| norms_entry(&p, s))
                .collect::<Result<_>>()?;
            let fields: Vec<_> = solved.iter().map(|s| s.field()).collect();
            let mut named: Vec<(&str, &dyn FieldSource)> = solved
                .iter()
                .zip(&fields)
                .map(|(s, f)| (s.disc.method.name(), f as &dyn FieldSource))
                .collect();
            if let Some(x) = &p.manufactured {
                named.push(("exact", x));
            }
            w.write("norms.csv", &norms_csv(&entries))?;
            w.write("meshcond.csv", &meshcond_csv(&[meshcond_row(&p, 0)?]))?;
            w.write("fields.vtk", &fields_vtk(&p.mesh, &p.chart, &named, &[])?)?;
            let parts: Vec<String> = entries
                .iter()
                .map(|e| format!("{} H_h norm {:.6e}", e.method.name(), e.norms.h_norm))
                .collect();
            parts.join("; ")
        }
        StudyKind::Convergence => {
            let studies = methods
                .iter()
                .map(|&m| convergence_study(&p, m, spec.study.levels))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<MeshConditionRow> = studies[0]
                .rows
                .iter()
                .map(|r| MeshConditionRow {
                    level: r.level,
                    epsilon: p.epsilon,
                    triangles: r.triangles,
                    h: r.h,
                    report: r.condition,
                })
                .collect();
            w.write("convergence.csv", &convergence_csv(&studies))?;
            w.write("meshcond.csv", &meshcond_csv(&rows))?;
            let parts: Vec<String> = studies
                .iter()
                .map(|s| {
                    let o = s.min_order_h().map_or("n/a".into(), |o| format!("{o:.3}"));
                    format!(
                        "{} ({}) min H_h order {o}",
                        s.method.name(),
                        s.reference.name()
                    )
                })
                .collect();
            parts.join("; ")
        }
        StudyKind::Locking => {
            let study = locking_study(&p, &spec.study.epsilons, &methods)?;
            let rows: Vec<MeshConditionRow> = spec
                .study
                .epsilons
                .iter()
                .map(|&e| meshcond_row(&p.with_epsilon(e), 0))
                .collect::<Result<_>>()?;
            w.write("locking.csv", &locking_csv(&study))?;
            w.write("meshcond.csv", &meshcond_csv(&rows))?;
            format!(
                "{} rows against the {} reference",
                study.rows.len(),
                study.reference.name()
            )
        }
        StudyKind::Regime => {
            let (report, sols) = detect_regime(&p, &spec.study.thresholds)?;
            let mut text = regime_text(&report);
            match recommend_solution(&report, &sols) {
                Ok(s) => {
                    text.push_str(&format!("recommended solution: {}\n", s.disc.method.name()))
                }
                Err(e) => text.push_str(&format!("recommended solution: none ({e})\n")),
            }
            let mixed = sols.mixed_eps.field();
            let dg = sols.dg.field();
            let extrap = sols.mixed_eps.disc.field(&sols.extrap);
            let named: Vec<(&str, &dyn FieldSource)> =
                vec![("mixed", &mixed), ("dg", &dg), ("extrap", &extrap)];
            let cell = [("extrap_h_norm", report.extrap_per_element.as_slice())];
            let rows = [
                meshcond_row(&p, 0)?,
                meshcond_row(&p.with_epsilon(p.epsilon / 2.0), 0)?,
            ];
            let entries = [
                norms_entry(&p, &sols.mixed_eps)?,
                norms_entry(&p, &sols.dg)?,
            ];
            w.write("regime.txt", &text)?;
            w.write("regime.csv", &regime_csv(&report))?;
            w.write("norms.csv", &norms_csv(&entries))?;
            w.write("meshcond.csv", &meshcond_csv(&rows))?;
            w.write("fields.vtk", &fields_vtk(&p.mesh, &p.chart, &named, &cell)?)?;
            format!("verdict: {}", report.verdict.name())
        }
    };
    Ok(RunSummary {
        files: w.files,
        message,
    })
}
