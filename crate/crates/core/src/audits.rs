//! Energy identities evaluated on discrete solutions, the John transform
//! check on the free surface and uniqueness certificates.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::coupled::{Motion, Restriction};
use crate::dispersion::{band_classifier, VerticalMode, WaveParameters};
use crate::error::{Error, Result};
use crate::field_solver::{FieldSolution, Parity, Problem};
use crate::geometry::{check_john_condition, check_symmetry, BodySection, Decomposition, Depth};
use crate::hydrostatics::{check_equilibrium, lambda0, EquilibriumTolerances, HydrostaticModel};
use crate::mesh::{EdgeTag, Locator, Mesh};
use crate::polygon::Point;

const ZERO: C64 = C64::new(0.0, 0.0);
const EPS: f64 = 1e-14;

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 0.277_777_777_777_777_8),
    (0.5, 0.444_444_444_444_444_4),
    (0.887_298_334_620_741_7, 0.277_777_777_777_777_8),
];

/// Both sides of an identity and their difference relative to `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
    pub relative: f64,
}

impl Residual {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self::scaled(lhs, rhs, (lhs - rhs).abs(), 0.0)
    }

    fn scaled(lhs: f64, rhs: f64, diff: f64, extra_scale: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(extra_scale).max(EPS);
        Self {
            lhs,
            rhs,
            relative: diff / scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    /// Outgoing flux through measurement lines against `-Im int_S phi_bar dphi/dn`.
    pub energy_flux: Residual,
    /// `omega^2 z^H E z - g z^H K z` against `-int_S phi_bar dphi/dn`.
    pub transposed_identity: Option<Residual>,
    /// Outgoing flux against `Im{omega^2 z^H E z - g z^H K z}`.
    pub combined_identity: Option<Residual>,
    /// Kinetic against potential energy of the truncated domain.
    pub equipartition: Residual,
    /// `nu int_F |phi|^2 - int_W |grad phi|^2 + k^2 |phi|^2`.
    pub ineq_margin: f64,
    pub john_transform: Option<f64>,
}

/// Energy balance of the truncated domain. Without `z`:
/// `KE = PE + Re(Phi_S + Phi_T)`; with a body solution:
/// `KE + omega^2 z^H E z = PE + g z^H K z + Re Phi_T`.
pub fn equipartition(problem: &Problem, sol: &FieldSolution, body: Option<(&[C64; 3], &HydrostaticModel)>) -> Residual {
    let flux_t = problem.truncation_flux(sol).re;
    match body {
        None => Residual::new(sol.kinetic, sol.potential + sol.wetted_flux().re + flux_t),
        Some((z, model)) => {
            let w = problem.params.omega;
            let (ez, kz) = model.energies(z);
            Residual::new(
                sol.kinetic + w * w * ez,
                sol.potential + problem.params.g * kz + flux_t,
            )
        }
    }
}

/// `int_{-h}^0 v(x, y) f(y) dy` by composite Gauss rules.
fn vertical_integral(depth: f64, pieces: usize, f: &dyn Fn(f64) -> f64, v: &mut dyn FnMut(f64) -> Option<C64>) -> Option<C64> {
    let dy = depth / pieces as f64;
    let mut s = ZERO;
    for k in 0..pieces {
        for (t, w) in GAUSS3 {
            let y = -depth + (k as f64 + t) * dy;
            s += v(y)? * (f(y) * w * dy);
        }
    }
    Some(s)
}

fn mode0(problem: &Problem) -> (f64, VerticalMode) {
    let m = problem.modes[0];
    (problem.solver_params.outgoing_ell(), m)
}

/// Net outgoing flux `ell0 (|A+|^2 + |A-|^2 - |I|^2)` measured on the
/// vertical lines `x = +-(a + x_T) / 2`, and the incoming flux `ell0 |I|^2`.
pub fn measured_flux(problem: &Problem, sol: &FieldSolution, half_width: f64) -> (f64, f64) {
    let mesh = problem.mesh;
    let locator = Locator::new(mesh);
    let (ell0, f0) = mode0(problem);
    let depth = mesh.depth;
    let pieces = ((depth / min_edge(mesh)).ceil() as usize * 2).clamp(64, 4000);
    let x_m = 0.5 * (half_width + mesh.x_t);
    let f = |y: f64| f0.value(y);
    let proj = |x: f64| {
        vertical_integral(depth, pieces, &f, &mut |y| locator.interpolate(&sol.phi, Point::new(x, y))).unwrap_or(ZERO)
    };
    let right = proj(x_m);
    let left = proj(-x_m);
    let inc = sol.incident.map_or(ZERO, |w| {
        vertical_integral(depth, pieces, &f, &mut |y| Some(w.value(Point::new(-x_m, y)))).unwrap_or(ZERO)
    });
    let incoming = ell0 * inc.norm_sqr();
    (ell0 * (right.norm_sqr() + (left - inc).norm_sqr()) - incoming, incoming)
}

fn min_edge(mesh: &Mesh) -> f64 {
    mesh.edges()
        .iter()
        .map(|&(a, b)| mesh.nodes[a].dist(mesh.nodes[b]))
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates the energy identities on a solution. `body` carries the motion
/// amplitudes when `sol` solves the coupled problem.
pub fn audit_solution(
    problem: &Problem,
    sol: &FieldSolution,
    dec: &Decomposition,
    body: Option<(&[C64; 3], &HydrostaticModel)>,
) -> AuditReport {
    let wetted = sol.wetted_flux();
    let (outgoing, incoming) = measured_flux(problem, sol, dec.half_width());
    let rhs12 = -wetted.im;
    let energy_flux = Residual::scaled(outgoing, rhs12, (outgoing - rhs12).abs(), incoming);
    let (transposed_identity, combined_identity) = match body {
        None => (None, None),
        Some((z, model)) => {
            let w = problem.params.omega;
            let (ez, kz) = model.energies(z);
            let lhs = w * w * ez - problem.params.g * kz;
            let rhs = -wetted.conj();
            let t = Residual::scaled(lhs, rhs.re, (C64::new(lhs, 0.0) - rhs).norm(), 0.0);
            let c = Residual::scaled(outgoing, 0.0, outgoing.abs(), incoming);
            (Some(t), Some(c))
        }
    };
    let john_transform = john_transform_residual(problem.mesh, dec, &sol.phi, &problem.params)
        .ok()
        .map(|r| r.max);
    AuditReport {
        energy_flux,
        transposed_identity,
        combined_identity,
        equipartition: equipartition(problem, sol, body),
        ineq_margin: sol.potential - sol.kinetic,
        john_transform,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JohnResidual {
    /// `(x, |a'' + ell^2 a| / (ell^2 max|a|))` per sample.
    pub points: Vec<(f64, f64)>,
    pub max: f64,
}

/// Checks `a'' + ell^2 a = 0` for `a(x) = int phi(x, y) e^{nu y} dy` on the
/// free surface, with `ell = sqrt(nu^2 - k^2)`.
pub fn john_transform_residual(mesh: &Mesh, dec: &Decomposition, phi: &[C64], params: &WaveParameters) -> Result<JohnResidual> {
    let (nu, ell) = (params.nu, params.ell);
    let depth = mesh.depth;
    if nu * depth < 10.0 {
        return Err(Error::NotDeepEnough { nu_h: nu * depth });
    }
    let fs_edge = mesh
        .edges_with_tag(EdgeTag::FreeSurface)
        .map(|e| mesh.edge_length(e))
        .fold(0.0, f64::max);
    let step = (0.5 / ell).max(3.0 * fs_edge);
    let locator = Locator::new(mesh);
    let pieces = ((nu * depth * 40.0).ceil() as usize).max(400);
    let weight = |y: f64| (nu * y).exp();
    let transform = |x: f64| {
        vertical_integral(depth, pieces, &weight, &mut |y| locator.interpolate(phi, Point::new(x, y)))
    };
    let mut samples: Vec<Vec<(f64, C64)>> = Vec::new();
    for piece in &dec.free_surface {
        let lo = piece.start.unwrap_or(-mesh.x_t) + 0.5 * step;
        let hi = piece.end.unwrap_or(mesh.x_t) - 0.5 * step;
        if hi <= lo {
            continue;
        }
        let n = ((hi - lo) / step).floor() as usize + 1;
        if n < 5 {
            continue;
        }
        let dx = (hi - lo) / (n - 1) as f64;
        let row: Option<Vec<(f64, C64)>> = (0..n)
            .map(|i| {
                let x = lo + dx * i as f64;
                transform(x).map(|a| (x, a))
            })
            .collect();
        if let Some(row) = row {
            samples.push(row);
        }
    }
    let a_max = samples.iter().flatten().map(|(_, a)| a.norm()).fold(0.0, f64::max);
    let scale = (ell * ell * a_max).max(EPS);
    let mut points = Vec::new();
    for row in &samples {
        let dx = row[1].0 - row[0].0;
        for i in 2..row.len() - 2 {
            let a = |j: usize| row[j].1;
            let d2 = (-a(i - 2) + a(i - 1) * 16.0 - a(i) * 30.0 + a(i + 1) * 16.0 - a(i + 2)) / (12.0 * dx * dx);
            points.push((row[i].0, (d2 + a(i) * (ell * ell)).norm() / scale));
        }
    }
    let max = points.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(JohnResidual { points, max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement {
    Corollary1,
    Prop2,
    Prop3,
    Prop4,
    Prop5,
    Prop6,
    Prop7,
    Prop8,
    None,
}

impl Statement {
    pub fn as_str(self) -> &'static str {
        match self {
            Statement::Corollary1 => "corollary1",
            Statement::Prop2 => "prop2",
            Statement::Prop3 => "prop3",
            Statement::Prop4 => "prop4",
            Statement::Prop5 => "prop5",
            Statement::Prop6 => "prop6",
            Statement::Prop7 => "prop7",
            Statement::Prop8 => "prop8",
            Statement::None => "none",
        }
    }
}

/// Frequency-independent facts about a floating body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyFacts {
    pub parts: usize,
    pub john: bool,
    /// Mirror symmetric with the centre of mass on the axis.
    pub symmetric: bool,
    pub equilibrium: bool,
    pub lambda0: Option<f64>,
    pub half_spacing: Option<f64>,
    /// `g I^D / I^M`.
    pub heave_bound: f64,
    /// `g (I^D_xx + I^B_y) / I^M_2`.
    pub roll_bound: f64,
}

impl BodyFacts {
    pub fn new(body: &BodySection, dec: &Decomposition, model: &HydrostaticModel, g: f64) -> Self {
        let i = &model.integrals;
        Self {
            parts: dec.parts.len(),
            john: check_john_condition(dec).all,
            symmetric: check_symmetry(body) && dec.center_of_mass.x.abs() <= dec.tol,
            equilibrium: check_equilibrium(model, body, EquilibriumTolerances::default()).passes(),
            lambda0: lambda0(model, g).ok(),
            half_spacing: dec.half_spacing(),
            heave_bound: g * i.i_d / i.i_m,
            roll_bound: g * (i.i_dxx + i.i_by) / i.i_m2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    pub statement: Statement,
    pub conditions: Vec<(String, bool)>,
    /// Set when a statement is applied in water of finite depth with `ell0`.
    pub finite_depth_analogue: bool,
}

/// Picks the uniqueness statement whose hypotheses all hold.
pub fn certify(facts: &BodyFacts, params: &WaveParameters, restriction: Restriction) -> UniquenessCertificate {
    let w2 = params.omega * params.omega;
    let mut conditions: Vec<(String, bool)> = vec![
        ("equilibrium".into(), facts.equilibrium),
        ("john".into(), facts.john),
    ];
    let mut statement = Statement::None;
    if facts.parts == 1 {
        let omega = facts.lambda0.is_some_and(|l| w2 >= l);
        conditions.push(("single_part".into(), true));
        conditions.push(("omega".into(), omega));
        if facts.john && facts.equilibrium && omega {
            statement = Statement::Corollary1;
        }
    } else if let (2, Some(b)) = (facts.parts, facts.half_spacing) {
        let band = band_classifier(params, b);
        conditions.push(("symmetry".into(), facts.symmetric));
        conditions.push(("omega_minus".into(), band.omega_minus));
        conditions.push(("omega_plus".into(), band.omega_plus));
        let base = facts.symmetric && facts.john && facts.equilibrium;
        let candidate = match (restriction.motion, restriction.parity) {
            (Motion::Sway, Parity::Odd) => Some((Statement::Prop3, band.omega_minus, None)),
            (Motion::Sway, Parity::Even) => Some((Statement::Prop4, band.omega_plus, None)),
            (Motion::Heave, Parity::Odd) => Some((Statement::Prop5, band.omega_minus, None)),
            (Motion::Heave, Parity::Even) => {
                Some((Statement::Prop6, band.omega_plus, Some(("heave_bound", w2 >= facts.heave_bound))))
            }
            (Motion::Roll, Parity::Even) => Some((Statement::Prop7, band.omega_plus, None)),
            (Motion::Roll, Parity::Odd) => {
                Some((Statement::Prop8, band.omega_minus, Some(("roll_bound", w2 >= facts.roll_bound))))
            }
            _ => None,
        };
        conditions.push(("motion_restriction".into(), candidate.is_some()));
        if let Some((s, in_band, extra)) = candidate {
            let extra_ok = extra.is_none_or(|(name, ok)| {
                conditions.push((name.into(), ok));
                ok
            });
            if base && in_band && extra_ok {
                statement = s;
            }
        }
    } else {
        conditions.push(("single_part".into(), false));
    }
    UniquenessCertificate {
        statement,
        conditions,
        finite_depth_analogue: statement != Statement::None && matches!(params.depth, Depth::Finite(_)),
    }
}
