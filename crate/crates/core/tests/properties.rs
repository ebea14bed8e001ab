mod common;

use common::*;
use proptest::prelude::*;
use shellfem::mesh::{load_mesh, save_mesh, BoundaryTag, SideTags};
use shellfem::poly::{AffineMap, Poly};
use shellfem::regime::extrapolate;

fn tag() -> impl Strategy<Value = BoundaryTag> {
    prop_oneof![
        Just(BoundaryTag::D),
        Just(BoundaryTag::S),
        Just(BoundaryTag::F)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_preserves_area_and_tags(n in 1usize..5, l in tag(), r in tag(), b in tag(), t in tag()) {
        let m = unit_square(n, SideTags { left: l, right: r, bottom: b, top: t });
        let f = m.refine_uniform();
        let area = |m: &shellfem::mesh::Mesh| (0..m.num_triangles()).map(|t| m.area(t)).sum::<f64>();
        prop_assert!((area(&m) - area(&f)).abs() < 1e-13);
        prop_assert_eq!(f.num_triangles(), 4 * m.num_triangles());
        prop_assert!((f.h_max() - 0.5 * m.h_max()).abs() < 1e-13);
        let count = |m: &shellfem::mesh::Mesh, tag| m.boundary_edges.iter().filter(|e| e.tag == tag).count();
        for tag in [BoundaryTag::D, BoundaryTag::S, BoundaryTag::F] {
            prop_assert_eq!(count(&f, tag), 2 * count(&m, tag));
        }
    }

    #[test]
    fn mesh_text_round_trips(n in 1usize..4, l in tag(), t in tag()) {
        let m = unit_square(n, SideTags { left: l, right: BoundaryTag::D, bottom: BoundaryTag::S, top: t });
        let back = load_mesh(&save_mesh(&m)).unwrap();
        prop_assert_eq!(save_mesh(&back), save_mesh(&m));
    }

    #[test]
    fn barycentrics_partition_unity(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let s: f64 = (0..3).map(|i| Poly::lambda(i).eval([x, y])).sum();
        prop_assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_map_inverts(
        p in prop::array::uniform3(prop::array::uniform2(-2.0f64..2.0)),
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
    ) {
        let area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        prop_assume!(area.abs() > 0.1);
        let m = AffineMap::new(p);
        let back = m.to_reference(m.to_physical([u, v]));
        prop_assert!((back[0] - u).abs() < 1e-12 && (back[1] - v).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_is_affine(a in prop::collection::vec(-1e3f64..1e3, 1..20), s in -3.0f64..3.0) {
        let b: Vec<f64> = a.iter().map(|v| v * 0.5 + 1.0).collect();
        let e = extrapolate(&a, &b);
        let sa: Vec<f64> = a.iter().map(|v| s * v).collect();
        let sb: Vec<f64> = b.iter().map(|v| s * v).collect();
        let es = extrapolate(&sa, &sb);
        for (x, y) in e.iter().zip(&es) {
            prop_assert!((s * x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        prop_assert_eq!(extrapolate(&a, &a), a);
    }
}
