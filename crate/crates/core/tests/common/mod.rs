#![allow(dead_code)]

use floatwave::geometry::{split_at_waterline, BodySection, Decomposition};
use floatwave::hydrostatics::{compute_matrices, HydrostaticModel};
use floatwave::polygon::Point;

pub const G: f64 = 9.81;

pub struct Body {
    pub section: BodySection,
    pub dec: Decomposition,
    pub model: HydrostaticModel,
}

fn build(pts: &[(f64, f64)], rho: f64) -> Body {
    let section = BodySection::uniform(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), rho).unwrap();
    let dec = split_at_waterline(&section).unwrap();
    let model = compute_matrices(&section, &dec);
    Body { section, dec, model }
}

pub fn rectangle() -> Body {
    build(&[(-1.0, -0.5), (1.0, -0.5), (1.0, 0.5), (-1.0, 0.5)], 0.5)
}

pub fn catamaran() -> Body {
    build(
        &[(-2.0, -1.0), (-1.0, -1.0), (-1.0, 0.5), (1.0, 0.5), (1.0, -1.0), (2.0, -1.0), (2.0, 1.0), (-2.0, 1.0)],
        0.4,
    )
}

/// Hulls of draft 0.25, so that `I^D / I^M = 4`.
pub fn shallow_catamaran() -> Body {
    build(
        &[(-2.0, -0.25), (-1.0, -0.25), (-1.0, 0.5), (1.0, 0.5), (1.0, -0.25), (2.0, -0.25), (2.0, 1.0), (-2.0, 1.0)],
        1.0 / 7.0,
    )
}
