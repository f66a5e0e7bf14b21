//! Cross-section geometry of the floating cylinder and its waterline split.
//!
//! Contours are counterclockwise polygons in the `(x, y)` plane with `y`
//! pointing up and the mean free surface on `y = 0`. The body is cut at the
//! waterline into immersed parts, each bounded by a wetted polyline and a
//! waterplane lid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygon::{self, Point};

/// Relative tolerance for vertex coincidence, clipping and symmetry tests.
pub const GEOMETRY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRegion {
    pub polygon: Vec<Point>,
    /// Mass per unit area, in the same units as the water density.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodySection {
    outer: Vec<Point>,
    regions: Vec<DensityRegion>,
    water_density: f64,
    tol: f64,
}

impl BodySection {
    /// Validates and normalizes a cross-section. Clockwise input is reversed.
    pub fn new(outer: Vec<Point>, regions: Vec<DensityRegion>, water_density: f64) -> Result<Self> {
        if outer.len() < 3 {
            return Err(Error::InvalidBody("contour needs at least three vertices".into()));
        }
        if outer.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidBody("non-finite contour coordinate".into()));
        }
        if !(water_density > 0.0 && water_density.is_finite()) {
            return Err(Error::InvalidBody("water density must be positive".into()));
        }
        let tol = GEOMETRY_RTOL * polygon::diameter(&outer);
        let mut outer = outer;
        if polygon::signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        if !polygon::is_simple(&outer, tol) {
            return Err(Error::InvalidBody("contour is not a simple polygon".into()));
        }
        let area = polygon::signed_area(&outer);
        if area <= tol * tol {
            return Err(Error::InvalidBody("contour has no area".into()));
        }
        let mut regions = regions;
        for (i, r) in regions.iter_mut().enumerate() {
            if !(r.rho >= 0.0 && r.rho.is_finite()) {
                return Err(Error::InvalidBody(format!("density region {i}: negative density")));
            }
            if r.polygon.len() < 3 || !polygon::is_simple(&r.polygon, tol) {
                return Err(Error::InvalidBody(format!("density region {i}: not a simple polygon")));
            }
            if polygon::signed_area(&r.polygon) < 0.0 {
                r.polygon.reverse();
            }
            let own = polygon::signed_area(&r.polygon);
            let inside = polygon::intersection_area(&r.polygon, &outer);
            if (own - inside).abs() > 1e-9 * area.max(own) {
                return Err(Error::InvalidBody(format!(
                    "density region {i} extends outside the contour"
                )));
            }
        }
        for i in 0..regions.len() {
            for j in (i + 1)..regions.len() {
                let overlap = polygon::intersection_area(&regions[i].polygon, &regions[j].polygon);
                if overlap > 1e-9 * area {
                    return Err(Error::InvalidBody(format!(
                        "density regions {i} and {j} overlap (area {overlap:e})"
                    )));
                }
            }
        }
        let (_, hi) = polygon::bounding_box(outer.iter().copied());
        if hi.y <= tol {
            return Err(Error::NotSurfacePiercing("submerged"));
        }
        Ok(Self {
            outer,
            regions,
            water_density,
            tol,
        })
    }

    /// A body of uniform density filling the whole contour.
    pub fn uniform(outer: Vec<Point>, rho: f64) -> Result<Self> {
        let region = DensityRegion {
            polygon: outer.clone(),
            rho,
        };
        Self::new(outer, vec![region], 1.0)
    }

    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn regions(&self) -> &[DensityRegion] {
        &self.regions
    }

    pub fn water_density(&self) -> f64 {
        self.water_density
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn area(&self) -> f64 {
        polygon::signed_area(&self.outer)
    }

    /// Mass-weighted moments about `origin`, divided by the water density.
    pub fn mass_moments_about(&self, origin: Point) -> polygon::Moments {
        self.regions
            .iter()
            .map(|r| polygon::moments_about(&r.polygon, origin).scaled(r.rho / self.water_density))
            .fold(polygon::Moments::default(), |a, b| a + b)
    }

    /// Centre of mass; `None` for a massless body.
    pub fn center_of_mass(&self) -> Option<Point> {
        let m = self.mass_moments_about(Point::new(0.0, 0.0));
        (m.area > 0.0).then(|| Point::new(m.sx / m.area, m.sy / m.area))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        let outer = self.outer.iter().map(|p| p.translated(dx, dy)).collect();
        let regions = self
            .regions
            .iter()
            .map(|r| DensityRegion {
                polygon: r.polygon.iter().map(|p| p.translated(dx, dy)).collect(),
                rho: r.rho,
            })
            .collect();
        Self::new(outer, regions, self.water_density)
    }

    pub fn mirrored(&self) -> Result<Self> {
        let outer = polygon::mirror(&self.outer);
        let regions = self
            .regions
            .iter()
            .map(|r| DensityRegion {
                polygon: polygon::mirror(&r.polygon),
                rho: r.rho,
            })
            .collect();
        Self::new(outer, regions, self.water_density)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    Infinite,
    Finite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterConfig {
    pub depth: Depth,
    pub gravity: f64,
}

impl WaterConfig {
    pub fn validate(&self, dec: &Decomposition) -> Result<()> {
        if !(self.gravity > 0.0 && self.gravity.is_finite()) {
            return Err(Error::InvalidWater("gravity must be positive".into()));
        }
        if let Depth::Finite(h) = self.depth {
            if !(h > dec.draft()) {
                return Err(Error::InvalidWater(format!(
                    "depth {h} must exceed the maximal submergence {}",
                    dec.draft()
                )));
            }
        }
        Ok(())
    }
}

/// One connected component of the body below `y = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersedPart {
    /// Closed counterclockwise polygon (wetted chain followed by the lid).
    pub polygon: Vec<Point>,
    /// Waterplane interval `(x_left, x_right)` on `y = 0`.
    pub waterplane: (f64, f64),
    /// Wetted contour from the left to the right waterline point.
    pub wetted: Vec<Point>,
}

impl ImmersedPart {
    pub fn x_extent(&self) -> (f64, f64) {
        let (lo, hi) = polygon::bounding_box(self.polygon.iter().copied());
        (lo.x, hi.x)
    }

    pub fn area(&self) -> f64 {
        polygon::signed_area(&self.polygon)
    }
}

/// Free-surface piece on `y = 0`; `None` marks an unbounded end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSurfacePiece {
    pub start: Option<f64>,
    pub end: Option<f64>,
}

impl FreeSurfacePiece {
    pub fn is_interior(&self) -> bool {
        self.start.is_some() && self.end.is_some()
    }
}

/// A straight piece of the wetted contour with its generalized normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WettedSegment {
    pub part: usize,
    pub index: usize,
    pub a: Point,
    pub b: Point,
    /// Unit normal pointing out of the water, into the body.
    pub normal: (f64, f64),
}

impl WettedSegment {
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub parts: Vec<ImmersedPart>,
    pub free_surface: Vec<FreeSurfacePiece>,
    pub center_of_mass: Point,
    pub tol: f64,
}

impl Decomposition {
    /// Water without any body; used for free-propagation checks.
    pub fn empty() -> Self {
        Self {
            parts: Vec::new(),
            free_surface: vec![FreeSurfacePiece {
                start: None,
                end: None,
            }],
            center_of_mass: Point::new(0.0, 0.0),
            tol: 1e-12,
        }
    }

    /// Maximal submergence `b0` of the immersed parts.
    pub fn draft(&self) -> f64 {
        self.parts
            .iter()
            .flat_map(|p| p.polygon.iter())
            .map(|p| -p.y)
            .fold(0.0, f64::max)
    }

    /// Largest |x| reached by the immersed parts.
    pub fn half_width(&self) -> f64 {
        self.parts
            .iter()
            .flat_map(|p| p.polygon.iter())
            .map(|p| p.x.abs())
            .fold(0.0, f64::max)
    }

    pub fn waterplane_length(&self) -> f64 {
        self.parts.iter().map(|p| p.waterplane.1 - p.waterplane.0).sum()
    }

    /// Half of the gap between the two waterplane intervals of a two-part body.
    pub fn half_spacing(&self) -> Option<f64> {
        match self.parts.as_slice() {
            [l, r] => Some(0.5 * (r.waterplane.0 - l.waterplane.1)),
            _ => None,
        }
    }

    pub fn wetted_segments(&self) -> Vec<WettedSegment> {
        let mut out = Vec::new();
        for (pi, part) in self.parts.iter().enumerate() {
            for (si, w) in part.wetted.windows(2).enumerate() {
                let (a, b) = (w[0], w[1]);
                let len = a.dist(b);
                out.push(WettedSegment {
                    part: pi,
                    index: si,
                    a,
                    b,
                    normal: (-(b.y - a.y) / len, (b.x - a.x) / len),
                });
            }
        }
        out
    }

    /// Generalized normal `(N1, N2, N3)` at `p` for the unit normal `n`.
    pub fn generalized_normal(&self, p: Point, n: (f64, f64)) -> [f64; 3] {
        generalized_normal(self.center_of_mass, p, n)
    }
}

/// `N3 = (x - x0) N2 - (y - y0) N1`, the rotational component about `center`.
pub fn generalized_normal(center: Point, p: Point, n: (f64, f64)) -> [f64; 3] {
    [n.0, n.1, (p.x - center.x) * n.1 - (p.y - center.y) * n.0]
}

fn sign_of(y: f64) -> i8 {
    if y > 0.0 {
        1
    } else if y < 0.0 {
        -1
    } else {
        0
    }
}

/// Splits the body at the waterline into immersed parts, waterplane intervals,
/// wetted contours and free-surface pieces.
pub fn split_at_waterline(body: &BodySection) -> Result<Decomposition> {
    let tol = body.tol;
    let snapped: Vec<Point> = body
        .outer
        .iter()
        .map(|p| Point::new(p.x, if p.y.abs() <= tol { 0.0 } else { p.y }))
        .collect();
    if snapped.iter().all(|p| p.y >= 0.0) {
        return Err(Error::NotSurfacePiercing("dry"));
    }
    if snapped.iter().all(|p| p.y <= 0.0) {
        return Err(Error::NotSurfacePiercing("submerged"));
    }
    // insert exact waterline vertices on crossing edges
    let n = snapped.len();
    let mut verts = Vec::with_capacity(n + 8);
    for i in 0..n {
        let p = snapped[i];
        let q = snapped[(i + 1) % n];
        verts.push(p);
        if (p.y < 0.0 && q.y > 0.0) || (p.y > 0.0 && q.y < 0.0) {
            let t = p.y / (p.y - q.y);
            verts.push(Point::new(p.x + t * (q.x - p.x), 0.0));
        }
    }
    let first_dry = verts.iter().position(|p| p.y > 0.0).expect("dry vertex exists");
    verts.rotate_left(first_dry);
    let m = verts.len();

    // wetted chains: waterline vertex, strictly submerged vertices, waterline vertex
    let mut chains: Vec<Vec<Point>> = Vec::new();
    let mut i = 0;
    while i < m {
        let j = (i + 1) % m;
        if sign_of(verts[i].y) == 0 && sign_of(verts[j].y) < 0 {
            let mut chain = vec![verts[i]];
            let mut k = j;
            loop {
                chain.push(verts[k]);
                if sign_of(verts[k].y) == 0 {
                    break;
                }
                k = (k + 1) % m;
            }
            chains.push(chain);
        }
        i += 1;
    }
    if chains.is_empty() {
        return Err(Error::NotSurfacePiercing("dry"));
    }

    // walk left along y = 0 from each chain end to the nearest waterline point
    let starts: Vec<f64> = chains.iter().map(|c| c[0].x).collect();
    let ends: Vec<f64> = chains.iter().map(|c| c[c.len() - 1].x).collect();
    let mut next = vec![usize::MAX; chains.len()];
    let mut lids = vec![(0.0, 0.0); chains.len()];
    for (ci, &xe) in ends.iter().enumerate() {
        let mut best: Option<(f64, bool, usize)> = None;
        for (cj, &xs) in starts.iter().enumerate() {
            if xs <= xe && best.is_none_or(|b| xs > b.0) {
                best = Some((xs, true, cj));
            }
        }
        for (cj, &xo) in ends.iter().enumerate() {
            if cj != ci && xo < xe && best.is_none_or(|b| xo > b.0) {
                best = Some((xo, false, cj));
            }
        }
        match best {
            Some((xs, true, cj)) => {
                if xe - xs <= tol {
                    return Err(Error::DegenerateImmersedPart(format!(
                        "immersed boundary touches the waterline at the single point x = {xs}"
                    )));
                }
                next[ci] = cj;
                lids[ci] = (xs, xe);
            }
            _ => {
                return Err(Error::InvalidBody(
                    "waterline crossings are inconsistent with a counterclockwise contour".into(),
                ))
            }
        }
    }

    let mut seen = vec![false; chains.len()];
    let mut parts = Vec::new();
    for c0 in 0..chains.len() {
        if seen[c0] {
            continue;
        }
        let mut members = Vec::new();
        let mut c = c0;
        while !seen[c] {
            seen[c] = true;
            members.push(c);
            c = next[c];
        }
        if members.len() != 1 {
            return Err(Error::DegenerateImmersedPart(format!(
                "an immersed part meets the waterline in {} separate intervals",
                members.len()
            )));
        }
        let chain = &chains[c0];
        let area = polygon::signed_area(chain);
        if area <= tol * polygon::diameter(&body.outer) {
            return Err(Error::DegenerateImmersedPart(format!("immersed area {area:e}")));
        }
        parts.push(ImmersedPart {
            polygon: chain.clone(),
            waterplane: lids[c0],
            wetted: chain.clone(),
        });
    }
    parts.sort_by(|a, b| a.waterplane.0.total_cmp(&b.waterplane.0));
    for w in parts.windows(2) {
        if w[1].waterplane.0 - w[0].waterplane.1 <= tol {
            return Err(Error::DegenerateImmersedPart(
                "immersed parts touch each other at the waterline".into(),
            ));
        }
    }

    let mut free_surface = Vec::with_capacity(parts.len() + 1);
    let mut left: Option<f64> = None;
    for p in &parts {
        free_surface.push(FreeSurfacePiece {
            start: left,
            end: Some(p.waterplane.0),
        });
        left = Some(p.waterplane.1);
    }
    free_surface.push(FreeSurfacePiece {
        start: left,
        end: None,
    });

    let center_of_mass = body
        .center_of_mass()
        .ok_or_else(|| Error::InvalidBody("body has zero mass".into()))?;
    Ok(Decomposition {
        parts,
        free_surface,
        center_of_mass,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JohnReport {
    pub per_part: Vec<bool>,
    pub all: bool,
}

/// Each immersed part must lie in the vertical strip over its waterplane.
pub fn check_john_condition(dec: &Decomposition) -> JohnReport {
    let per_part: Vec<bool> = dec
        .parts
        .iter()
        .map(|p| {
            let (lo, hi) = p.x_extent();
            lo >= p.waterplane.0 - dec.tol && hi <= p.waterplane.1 + dec.tol
        })
        .collect();
    let all = !per_part.is_empty() && per_part.iter().all(|&b| b);
    JohnReport { per_part, all }
}

/// Mirror symmetry about the y-axis of both the contour and the density.
pub fn check_symmetry(body: &BodySection) -> bool {
    let tol = body.tol;
    if !polygon::same_polygon(&polygon::mirror(&body.outer), &body.outer, tol) {
        return false;
    }
    let rho_scale = body.regions.iter().map(|r| r.rho).fold(0.0, f64::max);
    body.regions.iter().all(|r| {
        let m = polygon::mirror(&r.polygon);
        body.regions.iter().any(|s| {
            (s.rho - r.rho).abs() <= 1e-12 * rho_scale.max(1e-300)
                && polygon::same_polygon(&m, &s.polygon, tol)
        })
    })
}

/// The JSON body document accepted on the command line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDocument {
    pub contour: Vec<Point>,
    pub density_regions: Vec<DensityRegion>,
    pub depth: Depth,
    pub gravity: f64,
    #[serde(default = "default_water_density")]
    pub water_density: f64,
}

fn default_water_density() -> f64 {
    1.0
}

impl BodyDocument {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build(&self) -> Result<(BodySection, WaterConfig)> {
        let body = BodySection::new(
            self.contour.clone(),
            self.density_regions.clone(),
            self.water_density,
        )?;
        let water = WaterConfig {
            depth: self.depth,
            gravity: self.gravity,
        };
        Ok((body, water))
    }
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

    pub(crate) fn catamaran() -> Vec<Point> {
        vec![
            Point::new(-2.0, -1.0),
            Point::new(-1.0, -1.0),
            Point::new(-1.0, 0.5),
            Point::new(1.0, 0.5),
            Point::new(1.0, -1.0),
            Point::new(2.0, -1.0),
            Point::new(2.0, 1.0),
            Point::new(-2.0, 1.0),
        ]
    }

    #[test]
    fn rectangle_split() {
        let body = BodySection::uniform(rect(-1.0, -0.5, 1.0, 0.5), 0.5).unwrap();
        let dec = split_at_waterline(&body).unwrap();
        assert_eq!(dec.parts.len(), 1);
        let p = &dec.parts[0];
        assert_eq!(p.waterplane, (-1.0, 1.0));
        assert_eq!(
            p.wetted,
            vec![
                Point::new(-1.0, 0.0),
                Point::new(-1.0, -0.5),
                Point::new(1.0, -0.5),
                Point::new(1.0, 0.0)
            ]
        );
        assert!((p.area() - 1.0).abs() < 1e-15);
        assert_eq!(dec.center_of_mass, Point::new(0.0, 0.0));
        assert_eq!(dec.free_surface.len(), 2);
        assert!(!dec.free_surface[0].is_interior());
        assert_eq!(dec.draft(), 0.5);
        let segs = dec.wetted_segments();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[1].normal, (0.0, 1.0));
        assert_eq!(segs[0].normal, (1.0, 0.0));
    }

    #[test]
    fn catamaran_topology() {
        let body = BodySection::uniform(catamaran(), 0.4).unwrap();
        let dec = split_at_waterline(&body).unwrap();
        assert_eq!(dec.parts.len(), 2);
        assert_eq!(dec.parts[0].waterplane, (-2.0, -1.0));
        assert_eq!(dec.parts[1].waterplane, (1.0, 2.0));
        let interior: Vec<_> = dec.free_surface.iter().filter(|f| f.is_interior()).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!((interior[0].start, interior[0].end), (Some(-1.0), Some(1.0)));
        assert_eq!(dec.half_spacing(), Some(1.0));
        assert_eq!(dec.half_width(), 2.0);
        let john = check_john_condition(&dec);
        assert_eq!(john.per_part, vec![true, true]);
        assert!(john.all);
        assert!(check_symmetry(&body));
    }

    #[test]
    fn translation_equivariance() {
        let body = BodySection::uniform(catamaran(), 0.4).unwrap();
        let dec = split_at_waterline(&body).unwrap();
        let moved = split_at_waterline(&body.translated(0.75, 0.0).unwrap()).unwrap();
        for (a, b) in dec.parts.iter().zip(&moved.parts) {
            assert!((a.waterplane.0 + 0.75 - b.waterplane.0).abs() < 1e-14);
            for (p, q) in a.wetted.iter().zip(&b.wetted) {
                assert!((p.x + 0.75 - q.x).abs() < 1e-14 && p.y == q.y);
            }
        }
        assert!((dec.center_of_mass.x + 0.75 - moved.center_of_mass.x).abs() < 1e-14);
    }

    #[test]
    fn surface_piercing_errors() {
        let sub = BodySection::uniform(rect(-1.0, -2.0, 1.0, -1.0), 1.0);
        assert_eq!(sub.unwrap_err(), Error::NotSurfacePiercing("submerged"));
        let dry = BodySection::uniform(rect(-1.0, 1.0, 1.0, 2.0), 1.0).unwrap();
        assert_eq!(split_at_waterline(&dry).unwrap_err(), Error::NotSurfacePiercing("dry"));
    }

    #[test]
    fn single_point_contact_is_degenerate() {
        // W-shaped keel touching y = 0 at x = 0 from below
        let w = vec![
            Point::new(-2.0, -1.0),
            Point::new(-1.0, -1.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, -1.0),
            Point::new(2.0, -1.0),
            Point::new(2.0, 1.0),
            Point::new(-2.0, 1.0),
        ];
        let body = BodySection::uniform(w, 0.3).unwrap();
        assert!(matches!(
            split_at_waterline(&body),
            Err(Error::DegenerateImmersedPart(_))
        ));
    }

    #[test]
    fn u_shape_has_mismatched_waterplane() {
        // cup open to the air with water inside: one part, two lids
        let cup = vec![
            Point::new(-2.0, -1.0),
            Point::new(2.0, -1.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, -0.5),
            Point::new(-1.0, -0.5),
            Point::new(-1.0, 1.0),
            Point::new(-2.0, 1.0),
        ];
        let body = BodySection::uniform(cup, 0.3).unwrap();
        assert!(matches!(
            split_at_waterline(&body),
            Err(Error::DegenerateImmersedPart(_))
        ));
    }

    #[test]
    fn john_condition_fails_for_bulging_part() {
        let trap = vec![
            Point::new(-1.0, 0.5),
            Point::new(-1.0, 0.0),
            Point::new(-1.3, -0.3),
            Point::new(-1.0, -0.6),
            Point::new(1.0, -0.6),
            Point::new(1.0, 0.5),
        ];
        let body = BodySection::uniform(trap, 0.5).unwrap();
        let dec = split_at_waterline(&body).unwrap();
        let john = check_john_condition(&dec);
        assert!(!john.all);
        assert!(check_john_condition(&split_at_waterline(&body.mirrored().unwrap()).unwrap()).per_part == vec![false]);
    }

    #[test]
    fn symmetry_checks() {
        let cat = catamaran();
        let uneven = BodySection::new(
            cat.clone(),
            vec![
                DensityRegion {
                    polygon: rect(-2.0, -1.0, -1.0, 1.0),
                    rho: 0.5,
                },
                DensityRegion {
                    polygon: rect(1.0, -1.0, 2.0, 1.0),
                    rho: 0.7,
                },
            ],
            1.0,
        )
        .unwrap();
        assert!(!check_symmetry(&uneven));
        let shifted = BodySection::uniform(rect(-0.5, -0.5, 1.5, 0.5), 0.5).unwrap();
        assert!(!check_symmetry(&shifted));
        let rect_body = BodySection::uniform(rect(-1.0, -0.5, 1.0, 0.5), 0.5).unwrap();
        assert!(check_symmetry(&rect_body));
    }

    #[test]
    fn rejects_overlapping_regions() {
        let r = rect(-1.0, -0.5, 1.0, 0.5);
        let res = BodySection::new(
            r.clone(),
            vec![
                DensityRegion {
                    polygon: rect(-1.0, -0.5, 0.5, 0.5),
                    rho: 0.5,
                },
                DensityRegion {
                    polygon: rect(0.0, -0.5, 1.0, 0.5),
                    rho: 0.5,
                },
            ],
            1.0,
        );
        assert!(matches!(res, Err(Error::InvalidBody(_))));
    }

    #[test]
    fn document_parsing() {
        let text = r#"{"contour": [[-1,-0.5],[1,-0.5],[1,0.5],[-1,0.5]],
            "density_regions": [{"polygon": [[-1,-0.5],[1,-0.5],[1,0.5],[-1,0.5]], "rho": 0.5}],
            "depth": {"finite": 2.0}, "gravity": 9.81}"#;
        let doc = BodyDocument::from_json(text).unwrap();
        assert_eq!(doc.depth, Depth::Finite(2.0));
        let (body, water) = doc.build().unwrap();
        assert_eq!(body.area(), 2.0);
        assert_eq!(water.gravity, 9.81);
        let inf = text.replace(r#"{"finite": 2.0}"#, r#""infinite""#);
        assert_eq!(BodyDocument::from_json(&inf).unwrap().depth, Depth::Infinite);
        let err = BodyDocument::from_json("{\"contour\": [[1,2],]}").unwrap_err();
        assert_eq!(err.line(), 1);
    }
}
