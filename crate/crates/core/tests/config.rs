use shellfem::config::{MeshSource, MethodChoice, ProblemSpec, StudyKind};
use shellfem::geometry::ChartKind;
use shellfem::mesh::{BoundaryTag, GradeToward};
use shellfem::Error;

const FULL: &str = "\
# a full example
[geometry]
chart = sphere
radius = 2
x1 = 0.5, 1.5   # polar angle
x2 = 0, 1
[mesh]
nx = 6
ny = 4
grading_x1 = 0.8 both
refine = 1
[boundary]
left = D
right = S
bottom = F
top = d
[material]
lambda = 2
mu = 1.5
kappa = 0.8
epsilon = 0.005
[loads]
p3 = sin(pi*x2)
q1 = 0.5
r2 = -x1
[method]
method = dg
penalty = 40
tri_degree = 6
edge_points = 4
[study]
kind = locking
epsilons = 1e-2, 1e-3
levels = 4
t_big = 20
seed = 7
";

#[test]
fn parses_every_section() {
    let s = ProblemSpec::parse(FULL).unwrap();
    assert!(matches!(s.chart_kind, ChartKind::Sphere { radius } if radius == 2.0));
    assert_eq!((s.x1, s.x2), ([0.5, 1.5], [0.0, 1.0]));
    match &s.mesh {
        MeshSource::Rect {
            nx,
            ny,
            grading_x1,
            grading_x2,
        } => {
            assert_eq!((*nx, *ny), (6, 4));
            let g = grading_x1.unwrap();
            assert_eq!((g.ratio, g.toward), (0.8, GradeToward::Both));
            assert!(grading_x2.is_none());
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(s.refine, 1);
    assert_eq!(
        [s.tags.left, s.tags.right, s.tags.bottom, s.tags.top],
        [
            BoundaryTag::D,
            BoundaryTag::S,
            BoundaryTag::F,
            BoundaryTag::D
        ]
    );
    assert_eq!(
        (s.material.lam, s.material.mu, s.material.kappa),
        (2.0, 1.5, 0.8)
    );
    assert_eq!(s.epsilon, 0.005);
    assert!(s.loads.p[2].is_some() && s.loads.q[0].is_some() && s.loads.r[1].is_some());
    assert!(s.loads.p[0].is_none());
    assert_eq!(s.method, MethodChoice::Dg);
    assert_eq!(s.penalty, Some(40.0));
    assert_eq!((s.quad.tri_degree, s.quad.edge_points), (6, 4));
    assert_eq!(s.study.kind, StudyKind::Locking);
    assert_eq!(s.study.epsilons, vec![1e-2, 1e-3]);
    assert_eq!((s.study.levels, s.study.seed), (4, 7));
    assert_eq!(s.study.thresholds.t_big, 20.0);
    assert_eq!(s.study.thresholds.t_zero, 0.1);
    let p = s.problem().unwrap();
    assert_eq!(p.mesh.num_triangles(), 4 * 2 * 6 * 4);
}

#[test]
fn defaults() {
    let s = ProblemSpec::parse("[material]\nepsilon = 0.1\n").unwrap();
    assert!(matches!(s.chart_kind, ChartKind::Plate));
    assert_eq!(s.method, MethodChoice::Both);
    assert_eq!(s.material.kappa, 5.0 / 6.0);
    assert_eq!(s.tags.left, BoundaryTag::D);
    assert!(s.exact.is_none() && s.penalty.is_none());
    assert_eq!(s.study.kind, StudyKind::Solve);
}

fn err_line(text: &str) -> usize {
    match ProblemSpec::parse(text) {
        Err(Error::Config { line, .. }) => line,
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn errors_carry_line_numbers() {
    assert_eq!(err_line("[material]\nepsilon = 0.1\n[bogus]\n"), 3);
    assert_eq!(err_line("[material]\nepsilon = 0.1\nfoo = 1\n"), 3);
    assert_eq!(err_line("epsilon = 0.1\n"), 1);
    assert_eq!(err_line("[material]\nepsilon = 0.1\nepsilon = 0.2\n"), 3);
    assert_eq!(err_line("[material]\n\n# c\nepsilon = 1.5\n"), 4);
    assert_eq!(
        err_line("[material]\nepsilon = 0.1\n[loads]\np3 = 1 + * 2\n"),
        4
    );
    assert_eq!(
        err_line("[material]\nepsilon = 0.1\n[boundary]\nleft = X\n"),
        4
    );
    assert_eq!(err_line("[material]\nepsilon = 0.1\n[mesh]\nnx = -3\n"), 4);
    assert_eq!(
        err_line("[material]\nepsilon = 0.1\n[geometry]\nx1 = 1, 0\n"),
        4
    );
    assert_eq!(
        err_line("[material]\nepsilon = 0.1\n[study]\nkind = everything\n"),
        4
    );
    assert_eq!(err_line("[material]\nepsilon\n"), 2);
    assert_eq!(err_line("[material\n"), 1);
    assert_eq!(err_line("[material]\nmu = 0\nepsilon = 0.1\n"), 2);
}

#[test]
fn missing_thickness_is_an_error() {
    assert!(matches!(
        ProblemSpec::parse("[geometry]\nchart = plate\n"),
        Err(Error::Config { .. })
    ));
}

#[test]
fn expression_chart_and_exact_fields() {
    let s = ProblemSpec::parse(
        "[geometry]\nchart = expression\nphi1 = x1\nphi2 = x2\nphi3 = 0.1*x1*x2\n[material]\nepsilon = 0.1\n[exact]\nw = x1*(1-x1)\n",
    )
    .unwrap();
    let ChartKind::Expression { phi } = &s.chart_kind else {
        panic!("expected an expression chart")
    };
    assert_eq!(phi[0], "x1");
    let ex = s.exact.as_ref().unwrap();
    assert!(ex[0].is_zero() && !ex[4].is_zero());
    assert!(s.problem().unwrap().manufactured.is_some());
}

#[test]
fn relative_mesh_file_resolves_against_config_dir() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = shellfem::mesh::generate_rect_mesh(&shellfem::mesh::RectMeshSpec {
        x1: [0.0, 1.0],
        x2: [0.0, 1.0],
        nx: 2,
        ny: 2,
        grading_x1: None,
        grading_x2: None,
        tags: shellfem::mesh::SideTags::all(BoundaryTag::F),
    })
    .unwrap();
    std::fs::write(dir.path().join("m.mesh"), shellfem::mesh::save_mesh(&mesh)).unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(
        &cfg,
        "[mesh]\nfile = m.mesh\nrefine = 1\n[material]\nepsilon = 0.1\n",
    )
    .unwrap();
    let s = ProblemSpec::from_file(&cfg).unwrap();
    let m = s.build_mesh().unwrap();
    assert_eq!(m.num_triangles(), 32);
    assert!(m.boundary_edges.iter().all(|b| b.tag == BoundaryTag::F));
}

#[test]
fn theta_override() {
    let s = ProblemSpec::parse("[material]\nepsilon = 0.1\n[method]\ntheta = 100\n").unwrap();
    assert_eq!(s.theta, Some(100.0));
    assert_eq!(s.problem().unwrap().theta, Some(100.0));
    assert_eq!(
        err_line("[material]\nepsilon = 0.1\n[method]\ntheta = -1\n"),
        4
    );
}
