//! Problem configuration: a line-oriented `key = value` format with `[section]` headers.
//!
//! ```text
//! # comment
//! [geometry]
//! chart = cylinder        # plate | cylinder | sphere | hypar | expression
//! radius = 1
//! x1 = 0, 1
//! x2 = 0, 1
//! [mesh]
//! nx = 8
//! ny = 8
//! [boundary]
//! left = D
//! [material]
//! epsilon = 0.01
//! [loads]
//! p3 = 1
//! [method]
//! method = both
//! [study]
//! kind = regime
//! ```
//!
//! Unknown sections or keys, repeated keys and malformed values are errors that carry
//! the 1-based line number.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::assembly::{LoadSpec, QuadratureOptions};
use crate::error::{Error, Result};
use crate::exact::ExactFields;
use crate::expr::Expr;
use crate::geometry::{ChartKind, Domain, Material, SurfaceChart};
use crate::mesh::{
    generate_rect_mesh, load_mesh, BoundaryTag, GradeToward, Grading, Mesh, RectMeshSpec, SideTags,
};
use crate::problem::ShellProblem;
use crate::regime::Thresholds;
use crate::solve::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Solve,
    Convergence,
    Locking,
    Regime,
}

impl StudyKind {
    pub fn parse(s: &str) -> Option<StudyKind> {
        match s {
            "solve" => Some(StudyKind::Solve),
            "convergence" | "converge" => Some(StudyKind::Convergence),
            "locking" => Some(StudyKind::Locking),
            "regime" => Some(StudyKind::Regime),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Solve => "solve",
            StudyKind::Convergence => "convergence",
            StudyKind::Locking => "locking",
            StudyKind::Regime => "regime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Mixed,
    Dg,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Mixed => vec![Method::Mixed],
            MethodChoice::Dg => vec![Method::Dg],
            MethodChoice::Both => vec![Method::Mixed, Method::Dg],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Rect {
        nx: usize,
        ny: usize,
        grading_x1: Option<Grading>,
        grading_x2: Option<Grading>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub kind: StudyKind,
    /// Mesh levels of a convergence study.
    pub levels: usize,
    /// Half-thicknesses of a locking study.
    pub epsilons: Vec<f64>,
    pub thresholds: Thresholds,
    /// Seed for randomized diagnostics.
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> StudyConfig {
        StudyConfig {
            kind: StudyKind::Solve,
            levels: 3,
            epsilons: vec![1e-2, 1e-3, 1e-4],
            thresholds: Thresholds::default(),
            seed: 0,
        }
    }
}

/// Everything a config file specifies.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub chart_kind: ChartKind,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub mesh: MeshSource,
    /// Extra uniform refinements applied to the mesh.
    pub refine: usize,
    pub tags: SideTags,
    pub material: Material,
    pub epsilon: f64,
    pub loads: LoadSpec,
    pub exact: Option<[Expr; 5]>,
    pub method: MethodChoice,
    pub penalty: Option<f64>,
    pub quad: QuadratureOptions,
    pub full_enrichment: bool,
    /// Overrides ϑ in A(ϑ) = R + ϑ(G + T).
    pub theta: Option<f64>,
    pub study: StudyConfig,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

const SECTIONS: [&str; 8] = [
    "geometry", "mesh", "boundary", "material", "loads", "method", "exact", "study",
];

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn split_sections(text: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line, "section header must end with `]`"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(cfg_err(line, format!("unknown section [{name}]")));
            }
            out.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got `{s}`")))?;
        let section = current
            .as_ref()
            .ok_or_else(|| cfg_err(line, "key outside of any section"))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(cfg_err(line, "empty key"));
        }
        let sec = out.get_mut(section).expect("section inserted on header");
        if let Some(prev) = sec.get(&k) {
            return Err(cfg_err(
                line,
                format!("duplicate key `{k}` (first set on line {})", prev.line),
            ));
        }
        sec.insert(
            k,
            Entry {
                value: v,
                line,
                used: false,
            },
        );
    }
    Ok(out)
}

struct Reader {
    sections: Sections,
}

impl Reader {
    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.sections.get_mut(section)?.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn parsed<T: std::str::FromStr>(
        &mut self,
        section: &str,
        key: &str,
        what: &str,
    ) -> Result<Option<T>> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| cfg_err(line, format!("{section}.{key}: expected {what}, got `{v}`"))),
        }
    }

    fn float(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        self.parsed(section, key, "a number")
    }

    fn count(&mut self, section: &str, key: &str) -> Result<Option<usize>> {
        self.parsed(section, key, "a nonnegative integer")
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => {
                let xs = v
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| {
                        cfg_err(
                            line,
                            format!("{section}.{key}: expected comma-separated numbers, got `{v}`"),
                        )
                    })?;
                Ok(Some((xs, line)))
            }
        }
    }

    fn interval(&mut self, section: &str, key: &str, default: [f64; 2]) -> Result<[f64; 2]> {
        match self.list(section, key)? {
            None => Ok(default),
            Some((xs, line)) => match xs[..] {
                [a, b] if a < b => Ok([a, b]),
                _ => Err(cfg_err(
                    line,
                    format!("{section}.{key}: expected `lo, hi` with lo < hi"),
                )),
            },
        }
    }

    fn expr(&mut self, section: &str, key: &str) -> Result<Option<Expr>> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => Expr::parse(&v)
                .map(Some)
                .map_err(|e| cfg_err(line, format!("{section}.{key}: {e}"))),
        }
    }

    fn boolean(&mut self, section: &str, key: &str) -> Result<Option<bool>> {
        self.parsed(section, key, "true or false")
    }

    fn grading(&mut self, key: &str) -> Result<Option<Grading>> {
        match self.take("mesh", key) {
            None => Ok(None),
            Some((v, line)) => {
                let bad = || {
                    cfg_err(
                        line,
                        format!("mesh.{key}: expected `ratio toward` (toward: low, high, both)"),
                    )
                };
                let mut it = v.split_whitespace();
                let ratio: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                let toward = match it.next() {
                    Some("low") => GradeToward::Low,
                    Some("high") => GradeToward::High,
                    Some("both") => GradeToward::Both,
                    _ => return Err(bad()),
                };
                if it.next().is_some() || !(ratio > 0.0 && ratio <= 1.0) {
                    return Err(bad());
                }
                Ok(Some(Grading { ratio, toward }))
            }
        }
    }

    fn finish(self) -> Result<()> {
        for (name, sec) in &self.sections {
            if let Some((k, e)) = sec.iter().find(|(_, e)| !e.used) {
                return Err(cfg_err(e.line, format!("unknown key `{k}` in [{name}]")));
            }
        }
        Ok(())
    }
}

fn positive(v: f64, what: &str, line: usize) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(line, format!("{what} must be positive, got {v}")))
    }
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<ProblemSpec> {
        let mut r = Reader {
            sections: split_sections(text)?,
        };
        let line_of = |r: &Reader, s: &str, k: &str| {
            r.sections
                .get(s)
                .and_then(|m| m.get(k))
                .map_or(0, |e| e.line)
        };

        let chart_line = line_of(&r, "geometry", "chart");
        let chart = r
            .take("geometry", "chart")
            .map(|v| v.0)
            .unwrap_or_else(|| "plate".into());
        let radius_line = line_of(&r, "geometry", "radius");
        let radius = r.float("geometry", "radius")?;
        let chart_kind = match chart.as_str() {
            "plate" => ChartKind::Plate,
            "cylinder" => ChartKind::Cylinder {
                radius: positive(radius.unwrap_or(1.0), "geometry.radius", radius_line)?,
            },
            "sphere" => ChartKind::Sphere {
                radius: positive(radius.unwrap_or(1.0), "geometry.radius", radius_line)?,
            },
            "hypar" => ChartKind::Hypar {
                c11: r.float("geometry", "c11")?.unwrap_or(0.0),
                c12: r.float("geometry", "c12")?.unwrap_or(1.0),
                c22: r.float("geometry", "c22")?.unwrap_or(0.0),
            },
            "expression" => {
                let mut phi: [String; 3] = Default::default();
                for (i, key) in ["phi1", "phi2", "phi3"].iter().enumerate() {
                    let e = r.expr("geometry", key)?.ok_or_else(|| {
                        cfg_err(chart_line, format!("expression chart needs geometry.{key}"))
                    })?;
                    phi[i] = e.to_string();
                }
                ChartKind::Expression { phi }
            }
            other => return Err(cfg_err(chart_line, format!("unknown chart `{other}`"))),
        };
        let x1 = r.interval("geometry", "x1", [0.0, 1.0])?;
        let x2 = r.interval("geometry", "x2", [0.0, 1.0])?;

        let mesh = match r.take("mesh", "file") {
            Some((path, _)) => MeshSource::File(PathBuf::from(path)),
            None => {
                let nx_line = line_of(&r, "mesh", "nx");
                let ny_line = line_of(&r, "mesh", "ny");
                let nx = r.count("mesh", "nx")?.unwrap_or(8);
                let ny = r.count("mesh", "ny")?.unwrap_or(nx);
                if nx == 0 {
                    return Err(cfg_err(nx_line, "mesh.nx must be at least 1"));
                }
                if ny == 0 {
                    return Err(cfg_err(ny_line, "mesh.ny must be at least 1"));
                }
                MeshSource::Rect {
                    nx,
                    ny,
                    grading_x1: r.grading("grading_x1")?,
                    grading_x2: r.grading("grading_x2")?,
                }
            }
        };
        let refine = r.count("mesh", "refine")?.unwrap_or(0);

        let mut tags = SideTags::all(BoundaryTag::D);
        for (key, slot) in [
            ("left", &mut tags.left),
            ("right", &mut tags.right),
            ("bottom", &mut tags.bottom),
            ("top", &mut tags.top),
        ] {
            if let Some((v, line)) = r.take("boundary", key) {
                *slot = BoundaryTag::parse(&v).ok_or_else(|| {
                    cfg_err(
                        line,
                        format!("boundary.{key}: expected D, S or F, got `{v}`"),
                    )
                })?;
            }
        }

        let d = Material::default();
        let mat_line = line_of(&r, "material", "mu").max(line_of(&r, "material", "lambda"));
        let material = Material::new(
            r.float("material", "lambda")?.unwrap_or(d.lam),
            r.float("material", "mu")?.unwrap_or(d.mu),
            r.float("material", "kappa")?.unwrap_or(d.kappa),
        )
        .map_err(|e| cfg_err(mat_line, e.to_string()))?;
        let eps_line = line_of(&r, "material", "epsilon");
        let epsilon = r
            .float("material", "epsilon")?
            .ok_or_else(|| cfg_err(eps_line, "material.epsilon is required"))?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(cfg_err(
                eps_line,
                format!("material.epsilon must lie in (0, 1), got {epsilon}"),
            ));
        }

        let mut loads = LoadSpec::default();
        for (i, key) in ["p1", "p2", "p3"].iter().enumerate() {
            loads.p[i] = r.expr("loads", key)?;
        }
        for (i, key) in ["q1", "q2", "q3"].iter().enumerate() {
            loads.q[i] = r.expr("loads", key)?;
        }
        for (i, key) in ["r1", "r2"].iter().enumerate() {
            loads.r[i] = r.expr("loads", key)?;
        }

        let exact_keys = ["theta1", "theta2", "u1", "u2", "w"];
        let exact = if r.sections.get("exact").is_some_and(|s| !s.is_empty()) {
            let mut out: Vec<Expr> = Vec::with_capacity(5);
            for key in exact_keys {
                out.push(r.expr("exact", key)?.unwrap_or(Expr::num(0.0)));
            }
            Some(<[Expr; 5]>::try_from(out).expect("five fields"))
        } else {
            None
        };

        let method = match r.take("method", "method") {
            None => MethodChoice::Both,
            Some((v, line)) => match v.as_str() {
                "mixed" => MethodChoice::Mixed,
                "dg" => MethodChoice::Dg,
                "both" => MethodChoice::Both,
                _ => {
                    return Err(cfg_err(
                        line,
                        format!("method.method: expected mixed, dg or both, got `{v}`"),
                    ))
                }
            },
        };
        let pen_line = line_of(&r, "method", "penalty");
        let penalty = match r.float("method", "penalty")? {
            Some(c) => Some(positive(c, "method.penalty", pen_line)?),
            None => None,
        };
        let dq = QuadratureOptions::default();
        let quad = QuadratureOptions {
            tri_degree: r.count("method", "tri_degree")?.unwrap_or(dq.tri_degree),
            edge_points: r.count("method", "edge_points")?.unwrap_or(dq.edge_points),
        };
        if quad.edge_points == 0 {
            return Err(cfg_err(
                line_of(&r, "method", "edge_points"),
                "method.edge_points must be at least 1",
            ));
        }
        let full_enrichment = r.boolean("method", "full_enrichment")?.unwrap_or(false);
        let theta_line = line_of(&r, "method", "theta");
        let theta = r.float("method", "theta")?;
        if theta.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
            return Err(cfg_err(
                theta_line,
                "method.theta must be finite and nonnegative",
            ));
        }

        let mut study = StudyConfig::default();
        if let Some((v, line)) = r.take("study", "kind") {
            study.kind = StudyKind::parse(&v).ok_or_else(|| {
                cfg_err(
                    line,
                    format!(
                        "study.kind: expected solve, convergence, locking or regime, got `{v}`"
                    ),
                )
            })?;
        }
        if let Some(l) = r.count("study", "levels")? {
            if l == 0 {
                return Err(cfg_err(
                    line_of(&r, "study", "levels"),
                    "study.levels must be at least 1",
                ));
            }
            study.levels = l;
        }
        if let Some((xs, line)) = r.list("study", "epsilons")? {
            if xs.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                return Err(cfg_err(line, "study.epsilons must lie in (0, 1)"));
            }
            study.epsilons = xs;
        }
        let th = &mut study.thresholds;
        th.t_big = r.float("study", "t_big")?.unwrap_or(th.t_big);
        th.t_zero = r.float("study", "t_zero")?.unwrap_or(th.t_zero);
        th.stabilization = r
            .float("study", "stabilization")?
            .unwrap_or(th.stabilization);
        study.seed = r
            .parsed("study", "seed", "a nonnegative integer")?
            .unwrap_or(0);

        r.finish()?;
        Ok(ProblemSpec {
            chart_kind,
            x1,
            x2,
            mesh,
            refine,
            tags,
            material,
            epsilon,
            loads,
            exact,
            method,
            penalty,
            quad,
            full_enrichment,
            theta,
            study,
        })
    }

    pub fn from_file(path: &Path) -> Result<ProblemSpec> {
        let text = std::fs::read_to_string(path)?;
        let mut spec = ProblemSpec::parse(&text)?;
        if let MeshSource::File(p) = &mut spec.mesh {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        Ok(spec)
    }

    pub fn chart(&self) -> Result<SurfaceChart> {
        let domain = match self.mesh {
            MeshSource::Rect { .. } => Some(Domain::Rect {
                x1: self.x1,
                x2: self.x2,
            }),
            MeshSource::File(_) => None,
        };
        SurfaceChart::new(self.chart_kind.clone(), domain)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let mut mesh = match &self.mesh {
            MeshSource::File(path) => load_mesh(&std::fs::read_to_string(path)?)?,
            MeshSource::Rect {
                nx,
                ny,
                grading_x1,
                grading_x2,
            } => generate_rect_mesh(&RectMeshSpec {
                x1: self.x1,
                x2: self.x2,
                nx: *nx,
                ny: *ny,
                grading_x1: *grading_x1,
                grading_x2: *grading_x2,
                tags: self.tags,
            })?,
        };
        for _ in 0..self.refine {
            mesh = mesh.refine_uniform();
        }
        Ok(mesh)
    }

    pub fn problem(&self) -> Result<ShellProblem> {
        let mut p = ShellProblem::new(
            self.chart()?,
            self.build_mesh()?,
            self.epsilon,
            self.loads.clone(),
        );
        p.material = self.material;
        p.manufactured = self.exact.clone().map(ExactFields::new);
        p.penalty = self.penalty;
        p.quad = self.quad;
        p.full_enrichment = self.full_enrichment;
        p.theta = self.theta;
        Ok(p)
    }
}
