//! Triangulation of the truncated water domain, boundary tagging, the mesh
//! text format and point location.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::Decomposition;
use crate::polygon::{self, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeTag {
    FreeSurface,
    Wetted,
    Bottom,
    TruncLeft,
    TruncRight,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::FreeSurface => "FREE_SURFACE",
            EdgeTag::Wetted => "WETTED",
            EdgeTag::Bottom => "BOTTOM",
            EdgeTag::TruncLeft => "TRUNC_LEFT",
            EdgeTag::TruncRight => "TRUNC_RIGHT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "FREE_SURFACE" => EdgeTag::FreeSurface,
            "WETTED" => EdgeTag::Wetted,
            "BOTTOM" => EdgeTag::Bottom,
            "TRUNC_LEFT" => EdgeTag::TruncLeft,
            "TRUNC_RIGHT" => EdgeTag::TruncRight,
            _ => return None,
        })
    }
}

/// A boundary edge oriented with the water on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: EdgeTag,
    /// `(part, segment)` of the wetted contour for `Wetted` edges.
    pub segment: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Depth of the meshed strip (the artificial bottom in deep water).
    pub depth: f64,
    pub x_t: f64,
    /// `mirror[i]` is the node at the reflection of node `i` in `x = 0`.
    pub mirror: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshConfig {
    pub h_mesh: f64,
    /// Depth of the meshed strip.
    pub depth: f64,
    /// Truncation abscissa; defaults to `a + 2 depth`.
    pub x_t: Option<f64>,
    /// Edge length near the waterline corner points is `h_mesh / refinement`.
    pub refinement: f64,
    /// Mesh half of the domain and reflect it when the body allows.
    pub symmetric: bool,
}

impl MeshConfig {
    pub fn new(h_mesh: f64, depth: f64) -> Self {
        Self {
            h_mesh,
            depth,
            x_t: None,
            refinement: 4.0,
            symmetric: true,
        }
    }

    pub fn truncation(&self, dec: &Decomposition) -> f64 {
        self.x_t.unwrap_or(dec.half_width() + 2.0 * self.depth)
    }
}

/// Artificial bottom depth used to approximate infinite depth at `nu`.
pub fn deep_truncation_depth(nu: f64, draft: f64) -> f64 {
    (10.0 / nu).max(3.0 * draft)
}

/// Default truncation abscissa of a deep-water strip of depth `h_eff`.
pub fn deep_truncation_abscissa(dec: &Decomposition, h_eff: f64) -> f64 {
    dec.half_width() + 0.5 * h_eff
}

const GRADING: f64 = 0.5;
const MIN_ANGLE_DEG: f64 = 10.0;

pub fn generate_mesh(dec: &Decomposition, cfg: &MeshConfig) -> Result<Mesh> {
    let h = cfg.h_mesh;
    let depth = cfg.depth;
    let x_t = cfg.truncation(dec);
    if !(h > 0.0 && h.is_finite()) || !(depth > 0.0) || !(cfg.refinement >= 1.0) {
        return Err(Error::MeshGeneration("mesh controls must be positive".into()));
    }
    if depth <= dec.draft() {
        return Err(Error::MeshGeneration(format!(
            "depth {depth} does not exceed the draft {}",
            dec.draft()
        )));
    }
    if x_t <= dec.half_width() {
        return Err(Error::MeshGeneration(format!(
            "truncation {x_t} does not enclose the body (half width {})",
            dec.half_width()
        )));
    }
    let corners: Vec<Point> = dec
        .parts
        .iter()
        .flat_map(|p| [Point::new(p.waterplane.0, 0.0), Point::new(p.waterplane.1, 0.0)])
        .collect();
    let r = cfg.refinement;
    let size = |p: Point| -> f64 {
        let d = corners.iter().map(|c| c.dist(p)).fold(f64::INFINITY, f64::min);
        h.min(h / r + GRADING * d)
    };
    let full = water_loop(dec, depth, x_t);
    let half = if cfg.symmetric && mirror_symmetric_decomposition(dec) {
        half_loop(&full)
    } else {
        None
    };
    let region = half.clone().unwrap_or_else(|| full.clone());
    let x_max = if half.is_some() { 0.0 } else { x_t };

    let span = x_max + x_t;
    let nx = ((span / h) - 1e-9).ceil().max(1.0) as usize;
    let ny = ((depth / h) - 1e-9).ceil().max(1.0) as usize;
    let column = |i: usize| -x_t + span * (i as f64 / nx as f64);

    let mut points: Vec<Point> = Vec::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let n = region.len();
    let mut ring = Vec::new();
    for i in 0..n {
        let (a, b) = (region[i], region[(i + 1) % n]);
        ring.push(a);
        ring.extend(subdivide_from_truncation(a, b, x_t, nx, &column, &size));
    }
    for i in 0..ring.len() {
        edges.push([i, (i + 1) % ring.len()]);
    }
    points.extend(ring);
    let wetted = dec.wetted_segments();
    let (dx, dy) = (span / nx as f64, depth / ny as f64);
    let clearance = 0.7 * dx.max(dy);
    for i in 1..nx {
        let x = -x_t + span * (i as f64 / nx as f64);
        for j in 1..ny {
            let y = -depth + depth * (j as f64 / ny as f64);
            let p = Point::new(x, y);
            if dec.parts.iter().any(|part| polygon::contains(&part.polygon, p)) {
                continue;
            }
            if wetted
                .iter()
                .any(|s| polygon::point_segment_distance(p, s.a, s.b) < clearance)
            {
                continue;
            }
            if corners.iter().any(|c| c.dist(p) < clearance) {
                continue;
            }
            points.push(p);
        }
    }

    let verts: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(verts, edges)
        .map_err(|e| Error::MeshGeneration(format!("{e:?}")))?;
    let h_min = h / r;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(25.0))
        .with_max_allowed_area(0.55 * h * h)
        .with_min_required_area(0.02 * h_min * h_min)
        .with_max_additional_vertices(20 * cdt.num_vertices() + 1000)
        .exclude_outer_faces(true);
    cdt.refine(params);

    let mut index = HashMap::new();
    let mut nodes: Vec<Point> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for face in cdt.inner_faces() {
        let pos = face.vertices().map(|v| {
            let p = v.position();
            (v.fix().index(), Point::new(p.x, p.y))
        });
        let c = Point::new(
            (pos[0].1.x + pos[1].1.x + pos[2].1.x) / 3.0,
            (pos[0].1.y + pos[1].1.y + pos[2].1.y) / 3.0,
        );
        if !polygon::contains(&region, c) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, (id, p)) in pos.iter().enumerate() {
            tri[k] = *index.entry(*id).or_insert_with(|| {
                nodes.push(*p);
                nodes.len() - 1
            });
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::MeshGeneration("no triangles inside the water domain".into()));
    }
    orient_ccw(&nodes, &mut triangles);

    if min_angle_deg(&nodes, &triangles) < MIN_ANGLE_DEG {
        smooth(&mut nodes, &triangles, 5);
    }

    if half.is_some() {
        let base = nodes.len();
        let mut image = vec![0usize; base];
        for i in 0..base {
            if nodes[i].x == 0.0 {
                image[i] = i;
            } else {
                image[i] = nodes.len();
                nodes.push(nodes[i].mirrored());
            }
        }
        let count = triangles.len();
        for t in 0..count {
            let [a, b, c] = triangles[t];
            triangles.push([image[a], image[c], image[b]]);
        }
    }
    Mesh::from_parts(nodes, triangles, depth, x_t, Some(dec))
}

fn orient_ccw(nodes: &[Point], triangles: &mut [[usize; 3]]) {
    for t in triangles.iter_mut() {
        if tri_signed_area(nodes, *t) < 0.0 {
            t.swap(1, 2);
        }
    }
}

fn tri_signed_area(nodes: &[Point], t: [usize; 3]) -> f64 {
    let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

fn triangle_min_angle(a: Point, b: Point, c: Point) -> f64 {
    let ang = |p: Point, q: Point, r: Point| {
        let (ux, uy, vx, vy) = (q.x - p.x, q.y - p.y, r.x - p.x, r.y - p.y);
        (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy)
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b)).to_degrees()
}

pub fn min_angle_deg(nodes: &[Point], triangles: &[[usize; 3]]) -> f64 {
    triangles
        .iter()
        .map(|t| triangle_min_angle(nodes[t[0]], nodes[t[1]], nodes[t[2]]))
        .fold(180.0, f64::min)
}

/// Laplacian smoothing of interior nodes, keeping a move only when it
/// improves the worst angle of the surrounding triangles.
fn smooth(nodes: &mut [Point], triangles: &[[usize; 3]], passes: usize) {
    let boundary: std::collections::HashSet<usize> =
        boundary_edge_list(triangles).iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (ti, t) in triangles.iter().enumerate() {
        for &v in t {
            adj[v].push(ti);
        }
    }
    for _ in 0..passes {
        for v in 0..nodes.len() {
            if boundary.contains(&v) || adj[v].is_empty() {
                continue;
            }
            let local = |nodes: &[Point]| {
                adj[v]
                    .iter()
                    .map(|&t| {
                        let t = triangles[t];
                        if tri_signed_area(nodes, t) <= 0.0 {
                            -1.0
                        } else {
                            triangle_min_angle(nodes[t[0]], nodes[t[1]], nodes[t[2]])
                        }
                    })
                    .fold(180.0, f64::min)
            };
            let before = local(nodes);
            let (mut sx, mut sy, mut cnt) = (0.0, 0.0, 0.0);
            for &t in &adj[v] {
                for &u in &triangles[t] {
                    if u != v {
                        sx += nodes[u].x;
                        sy += nodes[u].y;
                        cnt += 1.0;
                    }
                }
            }
            let old = nodes[v];
            nodes[v] = Point::new(sx / cnt, sy / cnt);
            if local(nodes) <= before {
                nodes[v] = old;
            }
        }
    }
}

fn boundary_edge_list(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = count.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
            e.0 += 1;
        }
    }
    let mut out: Vec<(usize, usize)> = count
        .into_values()
        .filter(|(c, _)| *c == 1)
        .map(|(_, e)| e)
        .collect();
    out.sort_unstable();
    out
}

/// Counterclockwise boundary of the truncated water domain.
fn water_loop(dec: &Decomposition, depth: f64, x_t: f64) -> Vec<Point> {
    let mut pts = vec![
        Point::new(-x_t, 0.0),
        Point::new(-x_t, -depth),
        Point::new(x_t, -depth),
        Point::new(x_t, 0.0),
    ];
    let mut parts: Vec<_> = dec.parts.iter().collect();
    parts.sort_by(|a, b| b.waterplane.0.total_cmp(&a.waterplane.0));
    for part in parts {
        pts.extend(part.wetted.iter().rev().copied());
    }
    polygon::dedup_closed(&pts, dec.tol)
}

/// Left half `x <= 0` of the loop when it crosses `x = 0` exactly twice.
fn half_loop(full: &[Point]) -> Option<Vec<Point>> {
    let n = full.len();
    let crossings = (0..n)
        .filter(|&i| {
            let (a, b) = (full[i].x, full[(i + 1) % n].x);
            (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)
        })
        .count();
    if crossings != 2 {
        return None;
    }
    let mut half = polygon::clip_halfplane(full, 1.0, 0.0, 0.0);
    for p in &mut half {
        if p.x.abs() <= 1e-14 {
            p.x = 0.0;
        }
    }
    let half = polygon::dedup_closed(&half, 1e-12);
    (half.len() >= 3).then_some(half)
}

fn mirror_symmetric_decomposition(dec: &Decomposition) -> bool {
    if dec.center_of_mass.x.abs() > dec.tol {
        return false;
    }
    dec.parts.iter().all(|p| {
        let m = polygon::mirror(&p.polygon);
        dec.parts
            .iter()
            .any(|q| polygon::same_polygon(&m, &q.polygon, dec.tol))
    })
}

/// Subdivision of a free-surface segment leaving a truncation line: lattice
/// columns up to where the grading starts, graded points after, so the nodes
/// near the body do not depend on `x_t`.
fn subdivide_from_truncation(
    a: Point,
    b: Point,
    x_t: f64,
    nx: usize,
    column: &dyn Fn(usize) -> f64,
    size: &dyn Fn(Point) -> f64,
) -> Vec<Point> {
    let horizontal = a.y == 0.0 && b.y == 0.0;
    let (start, end, reversed) = if horizontal && a.x == -x_t {
        (a, b, false)
    } else if horizontal && b.x == -x_t {
        (b, a, true)
    } else if horizontal && a.x == x_t {
        (a, b, false)
    } else if horizontal && b.x == x_t {
        (b, a, true)
    } else {
        return subdivide(a, b, size);
    };
    let from_left = start.x == -x_t;
    let h = size(start);
    let mut out = Vec::new();
    let mut last = start;
    for i in 1..nx {
        let x = if from_left { column(i) } else { column(nx - i) };
        let p = Point::new(x, 0.0);
        let beyond = if from_left { x >= end.x } else { x <= end.x };
        if beyond || size(p) < h || (end.x - x).abs() < 2.0 * h {
            break;
        }
        out.push(p);
        last = p;
    }
    out.extend(subdivide(last, end, size));
    if reversed {
        out.reverse();
    }
    out
}

/// Interior points of `[a, b]` spaced according to `size`.
fn subdivide(a: Point, b: Point, size: &dyn Fn(Point) -> f64) -> Vec<Point> {
    let len = a.dist(b);
    let samples = 512usize;
    let mut cum = vec![0.0; samples + 1];
    for i in 0..samples {
        let t = (i as f64 + 0.5) / samples as f64;
        cum[i + 1] = cum[i] + len / samples as f64 / size(a.lerp(b, t));
    }
    let total = cum[samples];
    let n = (total - 1e-9).ceil().max(1.0) as usize;
    let uniform = cum
        .windows(2)
        .all(|w| ((w[1] - w[0]) - total / samples as f64).abs() <= 1e-12 * total);
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let t = if uniform {
            k as f64 / n as f64
        } else {
            let target = total * k as f64 / n as f64;
            let i = cum.partition_point(|&c| c < target).clamp(1, samples);
            let f = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
            (i as f64 - 1.0 + f) / samples as f64
        };
        out.push(a.lerp(b, t));
    }
    out
}

impl Mesh {
    /// Sorts nodes by `(x, y)`, extracts and tags the boundary and detects
    /// mirror symmetry.
    pub fn from_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        depth: f64,
        x_t: f64,
        dec: Option<&Decomposition>,
    ) -> Result<Mesh> {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&i, &j| {
            nodes[i]
                .x
                .total_cmp(&nodes[j].x)
                .then(nodes[i].y.total_cmp(&nodes[j].y))
        });
        let mut new_index = vec![0usize; nodes.len()];
        for (k, &i) in order.iter().enumerate() {
            new_index[i] = k;
        }
        let nodes: Vec<Point> = order.iter().map(|&i| nodes[i]).collect();
        let triangles: Vec<[usize; 3]> = triangles
            .iter()
            .map(|t| [new_index[t[0]], new_index[t[1]], new_index[t[2]]])
            .collect();
        let mut mesh = Mesh {
            nodes,
            triangles,
            boundary_edges: Vec::new(),
            depth,
            x_t,
            mirror: None,
        };
        mesh.boundary_edges = mesh.tag_boundary()?;
        if let Some(dec) = dec {
            mesh.attach_segments(dec)?;
        }
        mesh.mirror = mesh.find_mirror();
        let q = mesh.min_angle_deg();
        if q < MIN_ANGLE_DEG {
            return Err(Error::MeshQuality { min_angle_deg: q });
        }
        Ok(mesh)
    }

    fn tag_boundary(&self) -> Result<Vec<BoundaryEdge>> {
        let tol = 1e-9 * self.x_t.max(self.depth);
        let mut out = Vec::new();
        for (a, b) in boundary_edge_list(&self.triangles) {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            let tag = if p.y.abs() <= tol && q.y.abs() <= tol {
                EdgeTag::FreeSurface
            } else if (p.y + self.depth).abs() <= tol && (q.y + self.depth).abs() <= tol {
                EdgeTag::Bottom
            } else if (p.x + self.x_t).abs() <= tol && (q.x + self.x_t).abs() <= tol {
                EdgeTag::TruncLeft
            } else if (p.x - self.x_t).abs() <= tol && (q.x - self.x_t).abs() <= tol {
                EdgeTag::TruncRight
            } else {
                EdgeTag::Wetted
            };
            out.push(BoundaryEdge {
                a,
                b,
                tag,
                segment: None,
            });
        }
        Ok(out)
    }

    /// Links every wetted edge to the contour segment it lies on.
    pub fn attach_segments(&mut self, dec: &Decomposition) -> Result<()> {
        let segs = dec.wetted_segments();
        let tol = 1e-7 * self.x_t.max(self.depth).max(1.0);
        for e in self.boundary_edges.iter_mut().filter(|e| e.tag == EdgeTag::Wetted) {
            let (p, q) = (self.nodes[e.a], self.nodes[e.b]);
            let mid = p.lerp(q, 0.5);
            let hit = segs.iter().find(|s| {
                polygon::point_segment_distance(p, s.a, s.b) <= tol
                    && polygon::point_segment_distance(q, s.a, s.b) <= tol
                    && polygon::point_segment_distance(mid, s.a, s.b) <= tol
            });
            match hit {
                Some(s) => e.segment = Some((s.part, s.index)),
                None => {
                    return Err(Error::MeshGeneration(format!(
                        "boundary edge ({}, {}) - ({}, {}) matches no tag",
                        p.x, p.y, q.x, q.y
                    )))
                }
            }
        }
        Ok(())
    }

    fn find_mirror(&self) -> Option<Vec<usize>> {
        let key = |p: Point| {
            let x = if p.x == 0.0 { 0.0 } else { p.x };
            (x.to_bits(), p.y.to_bits())
        };
        let lookup: HashMap<(u64, u64), usize> =
            self.nodes.iter().enumerate().map(|(i, &p)| (key(p), i)).collect();
        let map: Option<Vec<usize>> = self
            .nodes
            .iter()
            .map(|&p| lookup.get(&key(Point::new(-p.x, p.y))).copied())
            .collect();
        let map = map?;
        let tris: std::collections::HashSet<[usize; 3]> =
            self.triangles.iter().map(|&t| sorted3(t)).collect();
        self.triangles
            .iter()
            .all(|t| tris.contains(&sorted3([map[t[0]], map[t[1]], map[t[2]]])))
            .then_some(map)
    }

    pub fn min_angle_deg(&self) -> f64 {
        min_angle_deg(&self.nodes, &self.triangles)
    }

    pub fn area(&self, t: usize) -> f64 {
        tri_signed_area(&self.nodes, self.triangles[t])
    }

    pub fn edges_with_tag(&self, tag: EdgeTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Outward (out of the water) unit normal of a boundary edge.
    pub fn edge_normal(&self, e: &BoundaryEdge) -> (f64, f64) {
        let (p, q) = (self.nodes[e.a], self.nodes[e.b]);
        let len = p.dist(q);
        ((q.y - p.y) / len, -(q.x - p.x) / len)
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        self.nodes[e.a].dist(self.nodes[e.b])
    }

    /// All distinct triangle edges as sorted node pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "NODES {}", self.nodes.len());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{i} {:.16e} {:.16e}", p.x, p.y);
        }
        let _ = writeln!(s, "TRIS {}", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "BEDGES {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", e.a, e.b, e.tag.as_str());
        }
        s
    }

    /// Parses the text format; depth and truncation are read off the nodes.
    pub fn from_text(text: &str) -> Result<Mesh> {
        let err = |line: usize, msg: &str| Error::MeshFormat(format!("line {line}: {msg}"));
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let count = |rows: &mut dyn Iterator<Item = (usize, &str)>, name: &str| -> Result<usize> {
            let (ln, l) = rows.next().ok_or_else(|| err(0, "unexpected end of file"))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(err(ln, &format!("expected {name}")));
            }
            it.next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(ln, "bad count"))
        };
        let n = count(&mut rows, "NODES")?;
        let mut nodes = Vec::with_capacity(n);
        for k in 0..n {
            let (ln, l) = rows.next().ok_or_else(|| err(0, "missing node"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 || f[0].parse::<usize>().ok() != Some(k) {
                return Err(err(ln, "expected `id x y`"));
            }
            let x: f64 = f[1].parse().map_err(|_| err(ln, "bad x"))?;
            let y: f64 = f[2].parse().map_err(|_| err(ln, "bad y"))?;
            nodes.push(Point::new(x, y));
        }
        let m = count(&mut rows, "TRIS")?;
        let mut triangles = Vec::with_capacity(m);
        for k in 0..m {
            let (ln, l) = rows.next().ok_or_else(|| err(0, "missing triangle"))?;
            let f: Vec<usize> = l
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| err(ln, "bad index")))
                .collect::<Result<_>>()?;
            if f.len() != 4 || f[0] != k || f[1..].iter().any(|&v| v >= n) {
                return Err(err(ln, "expected `id a b c`"));
            }
            triangles.push([f[1], f[2], f[3]]);
        }
        let p = count(&mut rows, "BEDGES")?;
        let mut boundary_edges = Vec::with_capacity(p);
        for _ in 0..p {
            let (ln, l) = rows.next().ok_or_else(|| err(0, "missing boundary edge"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(err(ln, "expected `a b TAG`"));
            }
            let a: usize = f[0].parse().map_err(|_| err(ln, "bad index"))?;
            let b: usize = f[1].parse().map_err(|_| err(ln, "bad index"))?;
            let tag = EdgeTag::parse(f[2]).ok_or_else(|| err(ln, "unknown tag"))?;
            if a >= n || b >= n {
                return Err(err(ln, "index out of range"));
            }
            boundary_edges.push(BoundaryEdge {
                a,
                b,
                tag,
                segment: None,
            });
        }
        if let Some((ln, _)) = rows.next() {
            return Err(err(ln, "trailing content"));
        }
        let depth = -nodes.iter().map(|p| p.y).fold(0.0, f64::min);
        let x_t = nodes.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
        let mut mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            depth,
            x_t,
            mirror: None,
        };
        mesh.mirror = mesh.find_mirror();
        Ok(mesh)
    }
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

/// Bucket grid over the triangles for point location.
pub struct Locator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (lo, hi) = polygon::bounding_box(mesh.nodes.iter().copied());
        let total: f64 = (0..mesh.triangles.len()).map(|t| mesh.area(t)).sum();
        let cell = (2.0 * total / mesh.triangles.len().max(1) as f64).sqrt().max(1e-12) * 2.0;
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (ti, t) in mesh.triangles.iter().enumerate() {
            let (a, b) = polygon::bounding_box(t.iter().map(|&v| mesh.nodes[v]));
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, a);
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, b);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push(ti as u32);
                }
            }
        }
        Self {
            mesh,
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn cell_of(lo: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let i = (((p.x - lo.x) / cell).floor().max(0.0) as usize).min(nx - 1);
        let j = (((p.y - lo.y) / cell).floor().max(0.0) as usize).min(ny - 1);
        (i, j)
    }

    /// Triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.nx + i] {
            let tri = self.mesh.triangles[t as usize];
            let (a, b, c) = (
                self.mesh.nodes[tri[0]],
                self.mesh.nodes[tri[1]],
                self.mesh.nodes[tri[2]],
            );
            let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
            let l1 = ((p.x - a.x) * (c.y - a.y) - (p.y - a.y) * (c.x - a.x)) / det;
            let l2 = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / det;
            let l = [1.0 - l1 - l2, l1, l2];
            let worst = l.iter().copied().fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, _, w)| worst > w) {
                best = Some((t as usize, l, worst));
            }
        }
        best.filter(|(_, _, w)| *w >= -1e-9).map(|(t, l, _)| (t, l))
    }

    pub fn interpolate<T>(&self, values: &[T], p: Point) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (t, l) = self.locate(p)?;
        let tri = self.mesh.triangles[t];
        Some(values[tri[0]] * l[0] + values[tri[1]] * l[1] + values[tri[2]] * l[2])
    }
}
