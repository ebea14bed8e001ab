//! Fixtures shared by the benchmarks.

use shellfem::assembly::LoadSpec;
use shellfem::geometry::SurfaceChart;
use shellfem::mesh::{generate_rect_mesh, BoundaryTag, RectMeshSpec, SideTags};
use shellfem::problem::ShellProblem;

/// Unit-square cylinder patch clamped on one ruling edge under unit pressure.
pub fn cylinder_problem(n: usize, epsilon: f64) -> ShellProblem {
    let mesh = generate_rect_mesh(&RectMeshSpec {
        x1: [0.0, 1.0],
        x2: [0.0, 1.0],
        nx: n,
        ny: n,
        grading_x1: None,
        grading_x2: None,
        tags: SideTags {
            left: BoundaryTag::D,
            right: BoundaryTag::F,
            bottom: BoundaryTag::F,
            top: BoundaryTag::F,
        },
    })
    .expect("valid rectangle");
    ShellProblem::new(
        SurfaceChart::cylinder(1.0),
        mesh,
        epsilon,
        LoadSpec::transverse(1.0),
    )
}
