//! Triangulations of the polygonal parameter domain with tagged boundary edges.
//!
//! Local edge `i` of a triangle is the edge opposite its vertex `i`, running
//! from vertex `i+1` to vertex `i+2` (counterclockwise).

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{geometry_seminorms, SurfaceChart, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// clamped
    D,
    /// soft simply supported
    S,
    /// free
    F,
}

impl BoundaryTag {
    pub fn parse(s: &str) -> Option<BoundaryTag> {
        match s {
            "D" | "d" => Some(BoundaryTag::D),
            "S" | "s" => Some(BoundaryTag::S),
            "F" | "f" => Some(BoundaryTag::F),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::D => "D",
            BoundaryTag::S => "S",
            BoundaryTag::F => "F",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorEdge {
    /// vertices as oriented in the left (first) triangle
    pub v: [usize; 2],
    pub left: usize,
    pub left_local: usize,
    pub right: usize,
    pub right_local: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// vertices oriented counterclockwise around the owning triangle
    pub v: [usize; 2],
    pub tri: usize,
    pub local: usize,
    pub tag: BoundaryTag,
}

/// Straight-edge data seen from one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    pub start: Vec2,
    pub end: Vec2,
    /// unit outward normal n̄ of the side triangle
    pub nbar: Vec2,
    pub tangent: Vec2,
    pub length: f64,
}

impl EdgeGeometry {
    pub fn new(start: Vec2, end: Vec2) -> EdgeGeometry {
        let d = [end[0] - start[0], end[1] - start[1]];
        let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let tangent = [d[0] / length, d[1] / length];
        EdgeGeometry {
            start,
            end,
            nbar: [tangent[1], -tangent[0]],
            tangent,
            length,
        }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub interior_edges: Vec<InteriorEdge>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h_tau: Vec<f64>,
    pub shape_regularity: f64,
    /// per triangle and local edge: boundary edge index if on the boundary
    pub tri_boundary: Vec<[Option<usize>; 3]>,
    /// per triangle and local edge: interior edge index if interior
    pub tri_interior: Vec<[Option<usize>; 3]>,
    /// repairs applied while loading (e.g. reoriented triangles)
    pub notes: Vec<String>,
}

fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Vec2, b: Vec2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Diameter of the smallest circle containing the triangle over 4·area/perimeter.
pub fn triangle_shape_ratio(p: [Vec2; 3]) -> f64 {
    let l = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
    let area = signed_area(p[0], p[1], p[2]).abs();
    let per = l[0] + l[1] + l[2];
    let lmax = l[0].max(l[1]).max(l[2]);
    let l2: Vec<f64> = l.iter().map(|x| x * x).collect();
    let (imax, _) = l2.iter().enumerate().fold(
        (0, f64::MIN),
        |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
    );
    let others: f64 = l2
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != imax)
        .map(|(_, v)| v)
        .sum();
    let outer = if l2[imax] >= others {
        lmax
    } else {
        // circumcircle diameter abc / (2 area)
        l[0] * l[1] * l[2] / (2.0 * area)
    };
    outer / (4.0 * area / per)
}

impl Mesh {
    /// Builds adjacency and validates a triangulation.
    ///
    /// `tags` lists boundary edges by unordered vertex pair. Clockwise
    /// triangles are reoriented (recorded in `notes`).
    pub fn from_parts(
        vertices: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
        tags: &[([usize; 2], BoundaryTag)],
    ) -> Result<Mesh> {
        let nv = vertices.len();
        let mut notes = Vec::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(Error::Nonconforming(format!(
                        "triangle {t} references vertex {v}, but only {nv} vertices exist"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Nonconforming(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a == 0.0 || !a.is_finite() {
                return Err(Error::Orientation(format!("triangle {t} is degenerate")));
            }
            if a < 0.0 {
                tri.swap(1, 2);
                notes.push(format!("triangle {t} reordered to counterclockwise"));
            }
        }

        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                edge_map
                    .entry((a.min(b), a.max(b)))
                    .or_default()
                    .push((t, i));
            }
        }
        let mut tag_map: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        for (k, &([a, b], tag)) in tags.iter().enumerate() {
            let key = (a.min(b), a.max(b));
            match edge_map.get(&key) {
                Some(owners) if owners.len() == 1 => {}
                Some(_) => {
                    return Err(Error::Nonconforming(format!(
                        "boundary entry {k} ({a}, {b}) is an interior edge"
                    )))
                }
                None => {
                    return Err(Error::Nonconforming(format!(
                        "boundary entry {k} ({a}, {b}) is not an edge of any triangle"
                    )))
                }
            }
            if tag_map.insert(key, tag).is_some() {
                return Err(Error::Nonconforming(format!(
                    "boundary edge ({a}, {b}) tagged twice"
                )));
            }
        }

        let nt = triangles.len();
        let mut tri_boundary = vec![[None; 3]; nt];
        let mut tri_interior = vec![[None; 3]; nt];
        let mut interior_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        // deterministic order: by (triangle, local edge)
        for t in 0..nt {
            for i in 0..3 {
                let a = triangles[t][(i + 1) % 3];
                let b = triangles[t][(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let owners = &edge_map[&key];
                match owners.len() {
                    1 => {
                        let Some(&tag) = tag_map.get(&key) else {
                            return Err(Error::Nonconforming(format!(
                                "boundary edge ({a}, {b}) of triangle {t} has no tag"
                            )));
                        };
                        tri_boundary[t][i] = Some(boundary_edges.len());
                        boundary_edges.push(BoundaryEdge {
                            v: [a, b],
                            tri: t,
                            local: i,
                            tag,
                        });
                    }
                    2 => {
                        let (o, ol) = if owners[0].0 == t {
                            owners[1]
                        } else {
                            owners[0]
                        };
                        if o == t {
                            return Err(Error::Nonconforming(format!(
                                "triangle {t} uses edge ({a}, {b}) twice"
                            )));
                        }
                        if t < o {
                            let tb = triangles[o];
                            let (oa, ob) = (tb[(ol + 1) % 3], tb[(ol + 2) % 3]);
                            if oa != b || ob != a {
                                return Err(Error::Nonconforming(format!(
                                    "triangles {t} and {o} overlap across edge ({a}, {b})"
                                )));
                            }
                            let idx = interior_edges.len();
                            tri_interior[t][i] = Some(idx);
                            tri_interior[o][ol] = Some(idx);
                            interior_edges.push(InteriorEdge {
                                v: [a, b],
                                left: t,
                                left_local: i,
                                right: o,
                                right_local: ol,
                            });
                        }
                    }
                    n => {
                        return Err(Error::Nonconforming(format!(
                            "edge ({a}, {b}) is shared by {n} triangles"
                        )))
                    }
                }
            }
        }

        let mut h_tau = Vec::with_capacity(nt);
        let mut shape_regularity = 0.0f64;
        for tri in &triangles {
            let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let h = dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]));
            h_tau.push(h);
            shape_regularity = shape_regularity.max(triangle_shape_ratio(p));
        }

        Ok(Mesh {
            vertices,
            triangles,
            interior_edges,
            boundary_edges,
            h_tau,
            shape_regularity,
            tri_boundary,
            tri_interior,
            notes,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.interior_edges.len() + self.boundary_edges.len()
    }

    pub fn tri_points(&self, t: usize) -> [Vec2; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ]
    }

    pub fn area(&self, t: usize) -> f64 {
        let p = self.tri_points(t);
        signed_area(p[0], p[1], p[2])
    }

    /// Geometry of local edge `local` of triangle `t`, with n̄ outward from `t`.
    pub fn edge_geometry(&self, t: usize, local: usize) -> EdgeGeometry {
        let tri = self.triangles[t];
        EdgeGeometry::new(
            self.vertices[tri[(local + 1) % 3]],
            self.vertices[tri[(local + 2) % 3]],
        )
    }

    pub fn h_e_interior(&self, e: usize) -> f64 {
        let ed = &self.interior_edges[e];
        dist(self.vertices[ed.v[0]], self.vertices[ed.v[1]])
    }

    pub fn h_e_boundary(&self, e: usize) -> f64 {
        let ed = &self.boundary_edges[e];
        dist(self.vertices[ed.v[0]], self.vertices[ed.v[1]])
    }

    /// Local edges of `t` tagged free.
    pub fn free_edges(&self, t: usize) -> Vec<usize> {
        (0..3)
            .filter(|&i| {
                self.tri_boundary[t][i]
                    .is_some_and(|b| self.boundary_edges[b].tag == BoundaryTag::F)
            })
            .collect()
    }

    pub fn h_max(&self) -> f64 {
        self.h_tau.iter().copied().fold(0.0, f64::max)
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec2>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for tri in &self.triangles {
            let [v0, v1, v2] = *tri;
            let m0 = midpoint(v1, v2, &mut vertices);
            let m1 = midpoint(v2, v0, &mut vertices);
            let m2 = midpoint(v0, v1, &mut vertices);
            triangles.push([v0, m2, m1]);
            triangles.push([m2, v1, m0]);
            triangles.push([m1, m0, v2]);
            triangles.push([m0, m1, m2]);
        }
        let mut tags = Vec::with_capacity(2 * self.boundary_edges.len());
        for b in &self.boundary_edges {
            let m = midpoint(b.v[0], b.v[1], &mut vertices);
            tags.push(([b.v[0], m], b.tag));
            tags.push(([m, b.v[1]], b.tag));
        }
        Mesh::from_parts(vertices, triangles, &tags).expect("refinement of a valid mesh is valid")
    }

    /// Canonical text form (see `load_mesh`).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("naghdi-mesh 1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "boundary {}", self.boundary_edges.len());
        for b in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", b.v[0], b.v[1], b.tag.as_str());
        }
        s
    }
}

/// Which sides of a rectangle a geometric grading concentrates cells toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradeToward {
    Low,
    High,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    /// ratio of consecutive cell widths moving toward the refined side, in (0, 1]
    pub ratio: f64,
    pub toward: GradeToward,
}

/// Boundary tags for the four sides of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideTags {
    /// x1 = x1_min
    pub left: BoundaryTag,
    /// x1 = x1_max
    pub right: BoundaryTag,
    /// x2 = x2_min
    pub bottom: BoundaryTag,
    /// x2 = x2_max
    pub top: BoundaryTag,
}

impl SideTags {
    pub fn all(tag: BoundaryTag) -> SideTags {
        SideTags {
            left: tag,
            right: tag,
            bottom: tag,
            top: tag,
        }
    }
}

/// Breakpoints of `[a, b]` split into `n` cells, optionally graded.
pub fn graded_breakpoints(a: f64, b: f64, n: usize, grading: Option<Grading>) -> Result<Vec<f64>> {
    let widths: Vec<f64> = match grading {
        None => vec![1.0; n],
        Some(g) => {
            if !(g.ratio > 0.0 && g.ratio <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "grading ratio must lie in (0, 1], got {}",
                    g.ratio
                )));
            }
            let r = g.ratio;
            match g.toward {
                GradeToward::Low => (0..n).map(|k| r.powi((n - 1 - k) as i32)).collect(),
                GradeToward::High => (0..n).map(|k| r.powi(k as i32)).collect(),
                GradeToward::Both => (0..n)
                    .map(|k| {
                        let d = k.min(n - 1 - k);
                        r.powi(((n - 1) / 2 - d.min((n - 1) / 2)) as i32)
                    })
                    .collect(),
            }
        }
    };
    let total: f64 = widths.iter().sum();
    let mut pts = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    pts.push(a);
    for (k, w) in widths.iter().enumerate() {
        acc += w;
        if k + 1 == n {
            pts.push(b);
        } else {
            pts.push(a + (b - a) * acc / total);
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectMeshSpec {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub grading_x1: Option<Grading>,
    pub grading_x2: Option<Grading>,
    pub tags: SideTags,
}

/// Structured triangulation: each cell split along its (low, low)–(high, high) diagonal.
pub fn generate_rect_mesh(spec: &RectMeshSpec) -> Result<Mesh> {
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::InvalidParameter(
            "nx and ny must be at least 1".into(),
        ));
    }
    if !(spec.x1[1] > spec.x1[0] && spec.x2[1] > spec.x2[0]) {
        return Err(Error::InvalidParameter(
            "rectangle must have positive extent".into(),
        ));
    }
    let xs = graded_breakpoints(spec.x1[0], spec.x1[1], spec.nx, spec.grading_x1)?;
    let ys = graded_breakpoints(spec.x2[0], spec.x2[1], spec.ny, spec.grading_x2)?;
    let (nx, ny) = (spec.nx, spec.ny);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for y in &ys {
        for x in &xs {
            vertices.push([*x, *y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut tags = Vec::new();
    for i in 0..nx {
        tags.push(([id(i, 0), id(i + 1, 0)], spec.tags.bottom));
        tags.push(([id(i + 1, ny), id(i, ny)], spec.tags.top));
    }
    for j in 0..ny {
        tags.push(([id(nx, j), id(nx, j + 1)], spec.tags.right));
        tags.push(([id(0, j + 1), id(0, j)], spec.tags.left));
    }
    Mesh::from_parts(vertices, triangles, &tags)
}

/// Parses the `naghdi-mesh 1` text format.
pub fn load_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, message: String| Error::MeshParse { line, message };
    let last_line = text.lines().count().max(1);

    let (ln, header) = lines
        .next()
        .ok_or_else(|| perr(last_line, "empty mesh file".into()))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["naghdi-mesh", "1"] {
        return Err(perr(
            ln,
            format!("expected header `naghdi-mesh 1`, found `{header}`"),
        ));
    }
    let section =
        |name: &str, lines: &mut dyn Iterator<Item = (usize, &str)>| -> Result<(usize, usize)> {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| perr(last_line, format!("missing `{name}` section")))?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 || parts[0] != name {
                return Err(perr(ln, format!("expected `{name} <count>`, found `{l}`")));
            }
            let n: usize = parts[1]
                .parse()
                .map_err(|_| perr(ln, format!("invalid count `{}`", parts[1])))?;
            Ok((ln, n))
        };

    let (_, nv) = section("vertices", &mut lines)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(last_line, "unexpected end in vertices".into()))?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(perr(ln, format!("expected `x1 x2`, found `{l}`")));
        }
        let x: f64 = parts[0]
            .parse()
            .map_err(|_| perr(ln, format!("invalid number `{}`", parts[0])))?;
        let y: f64 = parts[1]
            .parse()
            .map_err(|_| perr(ln, format!("invalid number `{}`", parts[1])))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(perr(ln, "vertex coordinates must be finite".into()));
        }
        vertices.push([x, y]);
    }
    let (_, nt) = section("triangles", &mut lines)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(last_line, "unexpected end in triangles".into()))?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(perr(ln, format!("expected `i j k`, found `{l}`")));
        }
        let mut t = [0usize; 3];
        for (k, p) in parts.iter().enumerate() {
            t[k] = p
                .parse()
                .map_err(|_| perr(ln, format!("invalid index `{p}`")))?;
            if t[k] >= nv {
                return Err(Error::Nonconforming(format!(
                    "line {ln}: vertex index {} out of range (0..{nv})",
                    t[k]
                )));
            }
        }
        triangles.push(t);
    }
    let (_, nb) = section("boundary", &mut lines)?;
    let mut tags = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(last_line, "unexpected end in boundary".into()))?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(perr(ln, format!("expected `i j TAG`, found `{l}`")));
        }
        let a: usize = parts[0]
            .parse()
            .map_err(|_| perr(ln, format!("invalid index `{}`", parts[0])))?;
        let b: usize = parts[1]
            .parse()
            .map_err(|_| perr(ln, format!("invalid index `{}`", parts[1])))?;
        let tag = BoundaryTag::parse(parts[2]).ok_or_else(|| {
            perr(
                ln,
                format!("invalid tag `{}` (expected D, S or F)", parts[2]),
            )
        })?;
        if a >= nv || b >= nv {
            return Err(Error::Nonconforming(format!(
                "line {ln}: boundary vertex out of range"
            )));
        }
        tags.push(([a, b], tag));
    }
    if let Some((ln, l)) = lines.next() {
        return Err(perr(ln, format!("unexpected trailing content `{l}`")));
    }
    let mesh = Mesh::from_parts(vertices, triangles, &tags)?;
    // keep the boundary list in file order for canonical round trips
    let mut order: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, ([a, b], _)) in tags.iter().enumerate() {
        order.insert(((*a).min(*b), (*a).max(*b)), k);
    }
    Ok(reorder_boundary(mesh, |b| {
        order[&(b.v[0].min(b.v[1]), b.v[0].max(b.v[1]))]
    }))
}

fn reorder_boundary(mut mesh: Mesh, key: impl Fn(&BoundaryEdge) -> usize) -> Mesh {
    let mut idx: Vec<usize> = (0..mesh.boundary_edges.len()).collect();
    idx.sort_by_key(|&i| key(&mesh.boundary_edges[i]));
    let old = std::mem::take(&mut mesh.boundary_edges);
    let mut new_of_old = vec![0; old.len()];
    for (new, &o) in idx.iter().enumerate() {
        new_of_old[o] = new;
        mesh.boundary_edges.push(old[o]);
    }
    for tb in mesh.tri_boundary.iter_mut() {
        for e in tb.iter_mut() {
            if let Some(b) = e {
                *b = new_of_old[*b];
            }
        }
    }
    mesh
}

pub fn save_mesh(mesh: &Mesh) -> String {
    mesh.to_text()
}

pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    mesh.refine_uniform()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConditionReport {
    pub mixed_error_factor: f64,
    pub resolution_lhs: f64,
    pub geometry_resolved: bool,
}

/// Geometry-resolution diagnostics of a mesh for half-thickness `epsilon`.
///
/// `mixed_error_factor = 1 + ε⁻¹ max_τ h_τ² S₁(τ)` and `resolution_lhs = max_τ h_τ² (S₁(τ) + S₂(τ))`,
/// where S_k sums the order-k sup seminorms of Γ, b_{αβ} and b^α_β.
pub fn mesh_condition_report(
    mesh: &Mesh,
    chart: &SurfaceChart,
    epsilon: f64,
) -> Result<MeshConditionReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let per: Vec<(f64, f64)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let p = mesh.tri_points(t);
            let s1 = geometry_seminorms(chart, &p, 1)?.total();
            let s2 = geometry_seminorms(chart, &p, 2)?.total();
            let h2 = mesh.h_tau[t] * mesh.h_tau[t];
            Ok((h2 * s1, h2 * (s1 + s2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let m1 = per.iter().map(|x| x.0).fold(0.0, f64::max);
    let m2 = per.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(MeshConditionReport {
        mixed_error_factor: 1.0 + m1 / epsilon,
        resolution_lhs: m2,
        geometry_resolved: m2 <= epsilon,
    })
}
