//! CSV tables, the regime text block and legacy ASCII VTK output.
//!
//! Numbers are printed in a fixed scientific format so that output is byte-for-byte
//! reproducible.

use std::fmt::Write as _;

use crate::error::Result;
use crate::fe_space::FieldSource;
use crate::geometry::SurfaceChart;
use crate::mesh::{Mesh, MeshConditionReport};
use crate::norms::NormReport;
use crate::regime::RegimeReport;
use crate::solve::Method;
use crate::sparse::SolveStats;
use crate::study::{ConvergenceStudy, LockingStudy};

pub fn num(v: f64) -> String {
    format!("{v:.10e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Csv {
    out: String,
}

impl Csv {
    fn new(header: &[&str]) -> Csv {
        Csv {
            out: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }
}

/// One solved method for `norms.csv`.
#[derive(Debug, Clone)]
pub struct NormsEntry {
    pub method: Method,
    pub epsilon: f64,
    pub penalty: f64,
    pub penalty_doublings: usize,
    pub dofs: usize,
    pub norms: NormReport,
    pub stats: SolveStats,
    /// Relative H_h and energy errors against a manufactured solution.
    pub errors: Option<(f64, f64)>,
}

pub fn norms_csv(entries: &[NormsEntry]) -> String {
    let mut c = Csv::new(&[
        "method",
        "epsilon",
        "penalty",
        "penalty_doublings",
        "dofs",
        "rho_norm",
        "gamma_norm",
        "tau_norm",
        "a_norm",
        "h_norm",
        "v_norm",
        "weak_v_norm",
        "energy_bending",
        "energy_membrane",
        "energy_shear",
        "energy_total",
        "rel_error_h",
        "rel_error_energy",
        "relative_residual",
        "backward_error",
    ]);
    for e in entries {
        let n = &e.norms;
        let en = n.energies.unwrap_or_default();
        c.row(&[
            e.method.name().into(),
            num(e.epsilon),
            num(e.penalty),
            e.penalty_doublings.to_string(),
            e.dofs.to_string(),
            num(n.rho_norm),
            num(n.gamma_norm),
            num(n.tau_norm),
            num(n.a_norm),
            num(n.h_norm),
            opt(n.v_norm),
            opt(n.weak_v_norm),
            num(en.bending),
            num(en.membrane),
            num(en.shear),
            num(en.total_original),
            opt(e.errors.map(|x| x.0)),
            opt(e.errors.map(|x| x.1)),
            num(e.stats.relative_residual),
            num(e.stats.backward_error),
        ]);
    }
    c.out
}

pub fn convergence_csv(studies: &[ConvergenceStudy]) -> String {
    let mut c = Csv::new(&[
        "method",
        "reference",
        "epsilon",
        "level",
        "triangles",
        "h",
        "dofs",
        "error_h",
        "rel_error_h",
        "order_h",
        "error_energy",
        "rel_error_energy",
        "order_energy",
        "mixed_error_factor",
        "resolution_lhs",
        "geometry_resolved",
    ]);
    for s in studies {
        for r in &s.rows {
            c.row(&[
                s.method.name().into(),
                s.reference.name().into(),
                num(s.epsilon),
                r.level.to_string(),
                r.triangles.to_string(),
                num(r.h),
                r.dofs.to_string(),
                num(r.error_h),
                num(r.rel_error_h),
                opt(r.order_h),
                num(r.error_energy),
                num(r.rel_error_energy),
                opt(r.order_energy),
                num(r.condition.mixed_error_factor),
                num(r.condition.resolution_lhs),
                r.condition.geometry_resolved.to_string(),
            ]);
        }
    }
    c.out
}

pub fn locking_csv(study: &LockingStudy) -> String {
    let mut c = Csv::new(&[
        "epsilon",
        "method",
        "reference",
        "h_norm",
        "energy_norm",
        "rel_error_energy",
        "rel_error_h",
        "geometry_resolved",
    ]);
    for r in &study.rows {
        c.row(&[
            num(r.epsilon),
            r.method.name().into(),
            study.reference.name().into(),
            num(r.h_norm),
            num(r.energy_norm),
            num(r.rel_error_energy),
            num(r.rel_error_h),
            r.condition.geometry_resolved.to_string(),
        ]);
    }
    c.out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConditionRow {
    pub level: usize,
    pub epsilon: f64,
    pub triangles: usize,
    pub h: f64,
    pub report: MeshConditionReport,
}

pub fn meshcond_csv(rows: &[MeshConditionRow]) -> String {
    let mut c = Csv::new(&[
        "level",
        "epsilon",
        "triangles",
        "h",
        "mixed_error_factor",
        "resolution_lhs",
        "geometry_resolved",
    ]);
    for r in rows {
        c.row(&[
            r.level.to_string(),
            num(r.epsilon),
            r.triangles.to_string(),
            num(r.h),
            num(r.report.mixed_error_factor),
            num(r.report.resolution_lhs),
            r.report.geometry_resolved.to_string(),
        ]);
    }
    c.out
}

pub fn regime_csv(r: &RegimeReport) -> String {
    let mut c = Csv::new(&["quantity", "value"]);
    let n = &r.norms;
    for (k, v) in [
        ("epsilon", r.epsilon),
        ("norm_mixed_eps", n.mixed_eps),
        ("norm_mixed_half_eps", n.mixed_half_eps),
        ("norm_extrap", n.extrap),
        ("norm_dg", n.dg),
        ("dg_over_mixed", r.dg_over_mixed),
        ("extrap_over_eps", r.extrap_over_eps),
        ("half_over_eps", r.half_over_eps),
        ("t_big", r.thresholds.t_big),
        ("t_zero", r.thresholds.t_zero),
        ("stabilization", r.thresholds.stabilization),
    ] {
        c.row(&[k.into(), num(v)]);
    }
    c.row(&["verdict".into(), r.verdict.name().into()]);
    c.out
}

pub fn regime_text(r: &RegimeReport) -> String {
    let n = &r.norms;
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", r.verdict.name());
    let _ = writeln!(s, "epsilon: {}", num(r.epsilon));
    let _ = writeln!(s, "H_h norms:");
    let _ = writeln!(s, "  mixed, epsilon      {}", num(n.mixed_eps));
    let _ = writeln!(s, "  mixed, epsilon/2    {}", num(n.mixed_half_eps));
    let _ = writeln!(s, "  extrapolated        {}", num(n.extrap));
    let _ = writeln!(s, "  dg, epsilon         {}", num(n.dg));
    let _ = writeln!(s, "ratios:");
    let _ = writeln!(s, "  dg / mixed          {}", num(r.dg_over_mixed));
    let _ = writeln!(s, "  extrap / mixed      {}", num(r.extrap_over_eps));
    let _ = writeln!(s, "  half / mixed        {}", num(r.half_over_eps));
    let th = &r.thresholds;
    let _ = writeln!(
        s,
        "thresholds: t_big = {}, t_zero = {}, stabilization = {}",
        th.t_big, th.t_zero, th.stabilization
    );
    for (label, m) in [
        ("epsilon", &r.mesh_condition[0]),
        ("epsilon/2", &r.mesh_condition[1]),
    ] {
        let _ = writeln!(
            s,
            "mesh condition at {label}: mixed_error_factor = {}, resolution_lhs = {}, geometry_resolved = {}",
            num(m.mixed_error_factor),
            num(m.resolution_lhs),
            m.geometry_resolved
        );
    }
    if r.mesh_condition.iter().any(|m| !m.geometry_resolved) {
        let _ = writeln!(
            s,
            "warning: the mesh does not resolve the geometry at this thickness; refine"
        );
    }
    s
}

/// Legacy ASCII VTK unstructured grid with per-corner (discontinuous) point data.
/// Points are placed on the midsurface. Each field contributes its five components
/// and a 3D displacement vector u_α a^α + w a_3.
pub fn fields_vtk(
    mesh: &Mesh,
    chart: &SurfaceChart,
    fields: &[(&str, &dyn FieldSource)],
    cell_data: &[(&str, &[f64])],
) -> Result<String> {
    let nt = mesh.num_triangles();
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut geoms = Vec::with_capacity(3 * nt);
    for t in 0..nt {
        let p = mesh.tri_points(t);
        for x in p {
            geoms.push(chart.eval_unchecked(x)?);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "shell fields");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", 3 * nt);
    for g in &geoms {
        let _ = writeln!(
            s,
            "{} {} {}",
            num(g.position[0]),
            num(g.position[1]),
            num(g.position[2])
        );
    }
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in 0..nt {
        let _ = writeln!(s, "3 {} {} {}", 3 * t, 3 * t + 1, 3 * t + 2);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "5");
    }
    let _ = writeln!(s, "CELL_DATA {nt}");
    let _ = writeln!(s, "SCALARS h_tau double 1\nLOOKUP_TABLE default");
    for h in &mesh.h_tau {
        let _ = writeln!(s, "{}", num(*h));
    }
    for (name, data) in cell_data {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in data.iter() {
            let _ = writeln!(s, "{}", num(*v));
        }
    }
    if fields.is_empty() {
        return Ok(s);
    }
    let _ = writeln!(s, "POINT_DATA {}", 3 * nt);
    for (name, f) in fields {
        let samples: Vec<_> = (0..nt)
            .flat_map(|t| {
                let p = mesh.tri_points(t);
                (0..3).map(move |k| (t, k, p[k]))
            })
            .map(|(t, k, x)| f.sample(t, corners[k], x))
            .collect();
        let comps: [(&str, fn(&crate::strain::FieldSample) -> f64); 5] = [
            ("theta1", |v| v.theta[0]),
            ("theta2", |v| v.theta[1]),
            ("u1", |v| v.u[0]),
            ("u2", |v| v.u[1]),
            ("w", |v| v.w),
        ];
        for (cname, get) in comps {
            let _ = writeln!(s, "SCALARS {name}_{cname} double 1\nLOOKUP_TABLE default");
            for v in &samples {
                let _ = writeln!(s, "{}", num(get(v)));
            }
        }
        let _ = writeln!(s, "VECTORS {name}_displacement double");
        for (v, g) in samples.iter().zip(&geoms) {
            let mut d = [0.0; 3];
            for i in 0..3 {
                for al in 0..2 {
                    let a_up = g.a_con[al][0] * g.a_vec[0][i] + g.a_con[al][1] * g.a_vec[1][i];
                    d[i] += v.u[al] * a_up;
                }
                d[i] += v.w * g.a3[i];
            }
            let _ = writeln!(s, "{} {} {}", num(d[0]), num(d[1]), num(d[2]));
        }
    }
    Ok(s)
}
