#![allow(dead_code)]

use shellfem::assembly::{assemble_forms, Assembled, QuadratureOptions};
use shellfem::fe_space::{build_dof_layout, DofLayout, SpaceOptions};
use shellfem::geometry::{Material, SurfaceChart};
use shellfem::mesh::{generate_rect_mesh, BoundaryTag, Mesh, RectMeshSpec, SideTags};

pub fn rect(x1: [f64; 2], x2: [f64; 2], nx: usize, ny: usize, tags: SideTags) -> Mesh {
    generate_rect_mesh(&RectMeshSpec {
        x1,
        x2,
        nx,
        ny,
        grading_x1: None,
        grading_x2: None,
        tags,
    })
    .unwrap()
}

pub fn unit_square(n: usize, tags: SideTags) -> Mesh {
    rect([0.0, 1.0], [0.0, 1.0], n, n, tags)
}

pub fn clamped() -> SideTags {
    SideTags::all(BoundaryTag::D)
}

pub struct Problem {
    pub mesh: Mesh,
    pub chart: SurfaceChart,
    pub layout: DofLayout,
    pub asm: Assembled,
    pub mat: Material,
    pub quad: QuadratureOptions,
}

pub fn problem(mesh: Mesh, chart: SurfaceChart, options: SpaceOptions) -> Problem {
    let layout = build_dof_layout(&mesh, &chart, options).unwrap();
    let mat = Material::default();
    let quad = QuadratureOptions::default();
    let asm = assemble_forms(&mesh, &chart, &layout, &mat, &quad).unwrap();
    Problem {
        mesh,
        chart,
        layout,
        asm,
        mat,
        quad,
    }
}
