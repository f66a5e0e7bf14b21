//! Planar polygon primitives: exact moments, clipping, containment and
//! triangle-based intersection areas.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn mirrored(self) -> Self {
        Self::new(-self.x, self.y)
    }

    pub fn translated(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Area moments of a polygon about a chosen origin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub area: f64,
    pub sx: f64,
    pub sy: f64,
    pub sxx: f64,
    pub syy: f64,
    pub sxy: f64,
}

impl Moments {
    pub fn scaled(self, c: f64) -> Self {
        Self {
            area: c * self.area,
            sx: c * self.sx,
            sy: c * self.sy,
            sxx: c * self.sxx,
            syy: c * self.syy,
            sxy: c * self.sxy,
        }
    }
}

impl std::ops::Add for Moments {
    type Output = Moments;
    fn add(self, o: Moments) -> Moments {
        Moments {
            area: self.area + o.area,
            sx: self.sx + o.sx,
            sy: self.sy + o.sy,
            sxx: self.sxx + o.sxx,
            syy: self.syy + o.syy,
            sxy: self.sxy + o.sxy,
        }
    }
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

/// Exact polynomial moments up to second order, by Green's theorem on each
/// edge. Vertices are shifted to `origin` before accumulation.
pub fn moments_about(poly: &[Point], origin: Point) -> Moments {
    let n = poly.len();
    let mut m = Moments::default();
    for i in 0..n {
        let (x0, y0) = (poly[i].x - origin.x, poly[i].y - origin.y);
        let j = (i + 1) % n;
        let (x1, y1) = (poly[j].x - origin.x, poly[j].y - origin.y);
        let c = x0 * y1 - x1 * y0;
        m.area += c;
        m.sx += (x0 + x1) * c;
        m.sy += (y0 + y1) * c;
        m.sxx += (x0 * x0 + x0 * x1 + x1 * x1) * c;
        m.syy += (y0 * y0 + y0 * y1 + y1 * y1) * c;
        m.sxy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * c;
    }
    m.area /= 2.0;
    m.sx /= 6.0;
    m.sy /= 6.0;
    m.sxx /= 12.0;
    m.syy /= 12.0;
    m.sxy /= 24.0;
    m
}

pub fn moments(poly: &[Point]) -> Moments {
    moments_about(poly, Point::new(0.0, 0.0))
}

pub fn centroid(poly: &[Point]) -> Point {
    let m = moments(poly);
    Point::new(m.sx / m.area, m.sy / m.area)
}

pub fn bounding_box(points: impl IntoIterator<Item = Point>) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub fn diameter(poly: &[Point]) -> f64 {
    let (lo, hi) = bounding_box(poly.iter().copied());
    (hi.x - lo.x).hypot(hi.y - lo.y)
}

/// Even-odd containment test; points on the boundary are unspecified.
pub fn contains(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    // collinear overlaps and touching configurations
    let on = |p: Point, q: Point, r: Point| point_segment_distance(r, p, q) <= tol;
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

/// True when no two non-adjacent edges meet and no edge is degenerate.
pub fn is_simple(poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if poly[i].dist(poly[(i + 1) % n]) <= tol {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

/// Sutherland-Hodgman clip against the half-plane `nx*x + ny*y <= c`.
/// Exact for convex subjects; for non-convex subjects the result may carry
/// zero-width bridges along the clip line, which leaves area integrals intact.
pub fn clip_halfplane(poly: &[Point], nx: f64, ny: f64, c: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 4);
    if n == 0 {
        return out;
    }
    let side = |p: Point| nx * p.x + ny * p.y - c;
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let (sc, sn) = (side(cur), side(nxt));
        if sc <= 0.0 {
            out.push(cur);
        }
        if (sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0) {
            let t = sc / (sc - sn);
            out.push(cur.lerp(nxt, t));
        }
    }
    out
}

/// Clips `subject` by a convex CCW polygon.
pub fn clip_convex(subject: &[Point], convex: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    let n = convex.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = convex[i];
        let b = convex[(i + 1) % n];
        // inside is to the left of a->b: -(b-a) x (p-a) <= 0
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let nx = ey;
        let ny = -ex;
        out = clip_halfplane(&out, nx, ny, nx * a.x + ny * a.y);
    }
    out
}

/// Ear-clipping triangulation of a simple polygon (either orientation).
/// Returned triangles are counterclockwise.
pub fn triangulate(poly: &[Point]) -> Vec<[Point; 3]> {
    let mut pts: Vec<Point> = poly.to_vec();
    if signed_area(&pts) < 0.0 {
        pts.reverse();
    }
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::with_capacity(pts.len().saturating_sub(2));
    let mut guard = 0usize;
    while idx.len() > 3 && guard < 10 * pts.len() * pts.len() + 10 {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let ia = idx[(k + m - 1) % m];
            let ib = idx[k];
            let ic = idx[(k + 1) % m];
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if orient(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = pts[j];
                orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
            });
            if blocked {
                continue;
            }
            tris.push([a, b, c]);
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (pts[idx[0]], pts[idx[1]], pts[idx[2]]);
        if orient(a, b, c) > 0.0 {
            tris.push([a, b, c]);
        }
    }
    tris
}

/// Area of the intersection of two simple polygons.
pub fn intersection_area(a: &[Point], b: &[Point]) -> f64 {
    let ta = triangulate(a);
    let tb = triangulate(b);
    let mut s = 0.0;
    for t in &ta {
        for u in &tb {
            let clipped = clip_convex(t, u);
            if clipped.len() >= 3 {
                s += signed_area(&clipped).abs();
            }
        }
    }
    s
}

/// Whether two closed polygons coincide up to a cyclic relabelling of vertices.
pub fn same_polygon(a: &[Point], b: &[Point], tol: f64) -> bool {
    let a = dedup_closed(a, tol);
    let b = dedup_closed(b, tol);
    if a.len() != b.len() || a.is_empty() {
        return false;
    }
    let n = a.len();
    (0..n).any(|shift| (0..n).all(|i| a[i].dist(b[(i + shift) % n]) <= tol))
}

/// Removes repeated consecutive vertices and collinear midpoints.
pub fn dedup_closed(poly: &[Point], tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(poly.len());
    for &p in poly {
        if out.last().is_none_or(|q| q.dist(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
        out.pop();
    }
    let mut changed = true;
    while changed && out.len() > 3 {
        changed = false;
        let n = out.len();
        for i in 0..n {
            let a = out[(i + n - 1) % n];
            let b = out[i];
            let c = out[(i + 1) % n];
            if point_segment_distance(b, a, c) <= tol {
                out.remove(i);
                changed = true;
                break;
            }
        }
    }
    out
}

/// Mirror image in x -> -x, reversed so orientation is preserved.
pub fn mirror(poly: &[Point]) -> Vec<Point> {
    poly.iter().rev().map(|p| p.mirrored()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
        vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ]
    }

    #[test]
    fn rectangle_moments() {
        let r = rect(-1.0, -0.5, 1.0, 0.5);
        let m = moments(&r);
        assert!((m.area - 2.0).abs() < 1e-15);
        assert!(m.sx.abs() < 1e-15 && m.sy.abs() < 1e-15);
        assert!((m.sxx - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.syy - 1.0 / 6.0).abs() < 1e-15);
        assert!(m.sxy.abs() < 1e-15);
        let m = moments(&rect(0.0, 0.0, 2.0, 3.0));
        assert!((m.sxy - 9.0).abs() < 1e-12);
    }

    #[test]
    fn simple_detection() {
        assert!(is_simple(&rect(0.0, 0.0, 1.0, 1.0), 1e-12));
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&bowtie, 1e-12));
    }

    #[test]
    fn intersection_of_overlapping_squares() {
        let a = rect(0.0, 0.0, 2.0, 2.0);
        let b = rect(1.0, 1.0, 3.0, 3.0);
        assert!((intersection_area(&a, &b) - 1.0).abs() < 1e-12);
        let l_shape = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert!((intersection_area(&l_shape, &a) - 3.0).abs() < 1e-12);
        assert!(intersection_area(&l_shape, &rect(1.5, 1.5, 3.0, 3.0)).abs() < 1e-12);
    }

    #[test]
    fn cyclic_polygon_equality() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let mut b = a.clone();
        b.rotate_left(2);
        assert!(same_polygon(&a, &b, 1e-12));
        assert!(same_polygon(&mirror(&rect(-1.0, 0.0, 1.0, 1.0)), &rect(-1.0, 0.0, 1.0, 1.0), 1e-12));
        assert!(!same_polygon(&a, &rect(0.0, 0.0, 1.0, 2.0), 1e-12));
    }
}
