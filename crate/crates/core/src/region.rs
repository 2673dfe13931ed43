//! Exponent regions for the average, lacunary and full maximal operators.
//!
//! Points are reciprocal-exponent tuples `(1/p_1, ..., 1/p_n)` in the unit
//! cube. The full maximal operator is strong below the corner threshold
//! `sum = (nd - 1)/d`, fails on the Dirac set `N` (all coordinates in
//! `{0, 1}`) except the origin, and on the threshold facet only its relative
//! interior is strong.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par;

/// Ties on the threshold hyperplane and on cube faces.
pub const EQ_TOL: f64 = 1e-12;

/// Lattice pitch of emitted CSV tables is `1 / CSV_DENOMINATOR`.
pub const CSV_DENOMINATOR: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Average,
    Lacunary,
    FullMaximal,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Average => "average",
            OperatorKind::Lacunary => "lacunary",
            OperatorKind::FullMaximal => "full_maximal",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(OperatorKind::Average),
            "lacunary" => Ok(OperatorKind::Lacunary),
            "full_maximal" | "full-maximal" => Ok(OperatorKind::FullMaximal),
            _ => Err(invalid(
                "operator",
                format!("unknown operator {s:?} (average, lacunary, full_maximal)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub operator: OperatorKind,
    pub n: usize,
    pub d: usize,
}

impl RegionSpec {
    pub fn new(operator: OperatorKind, n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("arity must be at least 2, got {n}")));
        }
        if d < 2 {
            return Err(invalid("d", format!("dimension must be at least 2, got {d}")));
        }
        Ok(RegionSpec { operator, n, d })
    }

    /// Corner threshold `(nd - 1)/d` on the coordinate sum.
    pub fn threshold(&self) -> f64 {
        (self.n * self.d - 1) as f64 / self.d as f64
    }

    /// `(d - 1)/d`, the axis mark of the corner cut.
    pub fn cut_mark(&self) -> f64 {
        (self.d - 1) as f64 / self.d as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Strong,
    Fails,
    Open,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Strong => "strong",
            Classification::Fails => "fails",
            Classification::Open => "open",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn is_one(x: f64) -> bool {
    (x - 1.0).abs() <= EQ_TOL
}

fn is_zero(x: f64) -> bool {
    x.abs() <= EQ_TOL
}

pub fn classify(point: &[f64], spec: &RegionSpec) -> Result<Classification> {
    if point.len() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: point.len(),
        });
    }
    if let Some(x) = point
        .iter()
        .find(|x| !x.is_finite() || **x < -EQ_TOL || **x > 1.0 + EQ_TOL)
    {
        return Err(invalid("point", format!("coordinate {x} outside [0, 1]")));
    }
    Ok(match spec.operator {
        OperatorKind::Average => Classification::Strong,
        OperatorKind::Lacunary => lacunary(point, spec),
        OperatorKind::FullMaximal => full_maximal(point, spec),
    })
}

fn lacunary(point: &[f64], spec: &RegionSpec) -> Classification {
    if !point.iter().any(|&x| is_one(x)) {
        return Classification::Strong;
    }
    if spec.n > 2 {
        return Classification::Open;
    }
    let m = spec.cut_mark();
    let (a, b) = (point[0], point[1]);
    let near = |x: f64, y: f64| (a - x).abs() <= EQ_TOL && (b - y).abs() <= EQ_TOL;
    let red = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, m), (m, 1.0)];
    if red.iter().any(|&(x, y)| near(x, y)) {
        Classification::Fails
    } else {
        Classification::Open
    }
}

fn full_maximal(point: &[f64], spec: &RegionSpec) -> Classification {
    if point.iter().all(|&x| is_zero(x)) {
        return Classification::Strong;
    }
    if point.iter().all(|&x| is_zero(x) || is_one(x)) {
        return Classification::Fails;
    }
    let gap = point.iter().sum::<f64>() - spec.threshold();
    if gap > EQ_TOL {
        Classification::Fails
    } else if gap >= -EQ_TOL {
        // on the facet: strong only off its relative boundary
        if point.iter().any(|&x| is_one(x)) {
            Classification::Fails
        } else {
            Classification::Strong
        }
    } else {
        Classification::Strong
    }
}

/// Extreme points of the region's distinguished face.
#[derive(Clone, Debug, PartialEq)]
pub enum Facet {
    /// The corner-cut facet (full maximal) or the closed cube (average).
    Vertices(Vec<Vec<f64>>),
    /// Lacunary: the cube with every face `x_i = 1` removed. `vertices` are
    /// the closure's corners; only the origin is attained.
    OpenCube { n: usize, vertices: Vec<Vec<f64>> },
}

impl Facet {
    pub fn vertices(&self) -> &[Vec<f64>] {
        match self {
            Facet::Vertices(v) => v,
            Facet::OpenCube { vertices, .. } => vertices,
        }
    }
}

fn cube_vertices(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|m| (0..n).map(|i| ((m >> i) & 1) as f64).collect())
        .collect()
}

pub fn facet_vertices(spec: &RegionSpec) -> Facet {
    let n = spec.n;
    match spec.operator {
        OperatorKind::Average => Facet::Vertices(cube_vertices(n)),
        OperatorKind::Lacunary => Facet::OpenCube {
            n,
            vertices: cube_vertices(n),
        },
        OperatorKind::FullMaximal => Facet::Vertices(
            (0..n)
                .map(|j| {
                    let mut v = vec![1.0; n];
                    v[n - 1 - j] = spec.cut_mark();
                    v
                })
                .collect(),
        ),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureFormat {
    Csv,
    Svg,
}

impl FromStr for FigureFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FigureFormat::Csv),
            "svg" => Ok(FigureFormat::Svg),
            _ => Err(invalid("format", format!("unknown format {s:?} (csv, svg)"))),
        }
    }
}

/// Classifies the lattice `{0, 1/m, ..., 1}^n` in row-major order, last
/// coordinate fastest.
pub fn classify_lattice(spec: &RegionSpec, denominator: usize) -> Vec<Classification> {
    let side = denominator + 1;
    let total = side.pow(spec.n as u32);
    par::map_indexed(total, |idx| {
        let p = lattice_point(idx, spec.n, denominator);
        classify(&p, spec).expect("lattice point in cube")
    })
}

fn lattice_point(mut idx: usize, n: usize, denominator: usize) -> Vec<f64> {
    let side = denominator + 1;
    let mut p = vec![0.0; n];
    for c in p.iter_mut().rev() {
        *c = (idx % side) as f64 / denominator as f64;
        idx /= side;
    }
    p
}

pub fn emit_figure(spec: &RegionSpec, format: FigureFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        FigureFormat::Csv => emit_csv(spec, out),
        FigureFormat::Svg => emit_svg(spec, out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Unsupported(format!("write failed: {e}"))
}

fn emit_csv(spec: &RegionSpec, out: &mut dyn Write) -> Result<()> {
    let m = CSV_DENOMINATOR;
    let header: Vec<String> = (1..=spec.n).map(|i| format!("coord_{i}")).collect();
    writeln!(out, "{},classification", header.join(",")).map_err(io_err)?;
    let classes = classify_lattice(spec, m);
    let mut line = String::new();
    for (idx, c) in classes.iter().enumerate() {
        line.clear();
        for x in lattice_point(idx, spec.n, m) {
            line.push_str(&format!("{x},"));
        }
        line.push_str(c.as_str());
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(())
}

// ---- SVG ----------------------------------------------------------------

const BLUE: &str = "#3a6fd8";
const RED: &str = "#d8342c";

struct Canvas {
    body: String,
    project: fn(&[f64]) -> (f64, f64),
}

impl Canvas {
    fn xy(&self, p: &[f64]) -> (f64, f64) {
        let (u, v) = (self.project)(p);
        (60.0 + 300.0 * u, 380.0 - 300.0 * v)
    }

    fn polygon(&mut self, pts: &[Vec<f64>], fill: &str, opacity: f64) {
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = self.xy(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        self.body.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"{fill}\" fill-opacity=\"{opacity}\" stroke=\"{BLUE}\" stroke-width=\"1\"/>\n",
            coords.join(" ")
        ));
    }

    fn line(&mut self, a: &[f64], b: &[f64], color: &str, dashed: bool) {
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        self.body.push_str(&format!(
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{color}\" stroke-width=\"2.5\"{dash}/>\n"
        ));
    }

    fn dot(&mut self, p: &[f64], color: &str) {
        let (x, y) = self.xy(p);
        self.body.push_str(&format!(
            "  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"{color}\"/>\n"
        ));
    }

    fn text(&mut self, p: &[f64], dx: f64, dy: f64, s: &str) {
        let (x, y) = self.xy(p);
        self.body.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\">{s}</text>\n",
            x + dx,
            y + dy
        ));
    }
}

fn planar(p: &[f64]) -> (f64, f64) {
    (p[0], p[1])
}

fn oblique(p: &[f64]) -> (f64, f64) {
    // cabinet projection, second axis receding
    (0.75 * p[0] + 0.4 * p[1], 0.75 * p[2] + 0.3 * p[1])
}

/// Clips a convex polygon to `sum <= level` (Sutherland–Hodgman, one plane).
fn clip_below(poly: &[Vec<f64>], level: f64) -> Vec<Vec<f64>> {
    let s = |p: &Vec<f64>| p.iter().sum::<f64>() - level;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        let (sa, sb) = (s(a), s(b));
        if sa <= EQ_TOL {
            out.push(a.clone());
        }
        if (sa < -EQ_TOL && sb > EQ_TOL) || (sa > EQ_TOL && sb < -EQ_TOL) {
            let t = sa / (sa - sb);
            out.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
        }
    }
    out
}

fn cube_faces(n: usize) -> Vec<Vec<Vec<f64>>> {
    if n == 2 {
        return vec![vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]];
    }
    let mut faces = Vec::new();
    for axis in 0..3 {
        for side in [0.0, 1.0] {
            let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
            let face = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
                .iter()
                .map(|&(a, b)| {
                    let mut p = vec![0.0; 3];
                    p[axis] = side;
                    p[i] = a;
                    p[j] = b;
                    p
                })
                .collect();
            faces.push(face);
        }
    }
    faces
}

fn emit_svg(spec: &RegionSpec, out: &mut dyn Write) -> Result<()> {
    let n = spec.n;
    if n != 2 && n != 3 {
        return Err(Error::Unsupported(format!(
            "svg figures need n in {{2, 3}}, got {n}"
        )));
    }
    let mut c = Canvas {
        body: String::new(),
        project: if n == 2 { planar } else { oblique },
    };
    let t = spec.threshold();
    let opacity = if n == 2 { 0.55 } else { 0.25 };
    for face in cube_faces(n) {
        let poly = match spec.operator {
            OperatorKind::FullMaximal => clip_below(&face, t),
            _ => face,
        };
        if poly.len() >= 3 {
            c.polygon(&poly, BLUE, opacity);
        }
    }
    let facet = facet_vertices(spec);
    let verts = facet.vertices().to_vec();
    match spec.operator {
        OperatorKind::Average => {
            for v in &verts {
                c.dot(v, BLUE);
            }
        }
        OperatorKind::Lacunary => {
            // faces through the all-ones corner are not strong
            for v in &verts {
                for w in &verts {
                    let diff: Vec<usize> = (0..n).filter(|&i| v[i] != w[i]).collect();
                    let on_one_face = (0..n).any(|i| v[i] == 1.0 && w[i] == 1.0);
                    if diff.len() == 1 && v < w && on_one_face {
                        c.line(v, w, RED, true);
                    }
                }
            }
            if n == 2 {
                let m = spec.cut_mark();
                for p in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, m], [m, 1.0]] {
                    c.dot(&p, RED);
                }
            }
        }
        OperatorKind::FullMaximal => {
            if n == 3 {
                c.polygon(&verts, BLUE, 0.45);
            }
            for i in 0..verts.len() {
                for j in i + 1..verts.len() {
                    c.line(&verts[i], &verts[j], if n == 2 { BLUE } else { RED }, true);
                }
            }
            for v in cube_vertices(n).iter().skip(1) {
                c.dot(v, RED);
            }
            for v in &verts {
                c.dot(v, RED);
            }
            c.dot(&vec![0.0; n], BLUE);
        }
    }
    // axes
    let origin = vec![0.0; n];
    for i in 0..n {
        let mut e = origin.clone();
        e[i] = 1.08;
        c.line(&origin, &e, "#333333", false);
        let mut l = origin.clone();
        l[i] = 1.1;
        c.text(&l, -4.0, 4.0, &format!("1/p{}", i + 1));
    }
    if spec.operator == OperatorKind::FullMaximal || spec.operator == OperatorKind::Lacunary {
        let mut m = origin.clone();
        m[0] = spec.cut_mark();
        c.text(&m, -10.0, 18.0, &format!("{}/{}", spec.d - 1, spec.d));
    }
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"440\" height=\"440\" viewBox=\"0 0 440 440\">\n  <title>{} region, n={}, d={}</title>\n  <rect width=\"440\" height=\"440\" fill=\"white\"/>\n{}</svg>\n",
        spec.operator, n, spec.d, c.body
    )
    .map_err(io_err)
}
