//! Radiation potentials, the coupled water/body matrix `T(omega)`, the
//! trapped-mode frequency sweep and the scattering of oblique waves.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::audits::{self, BodyFacts, Statement};
use crate::dispersion::{make_wave_parameters_with_modes, WaveParameters};
use crate::error::{Error, Result};
use crate::field_solver::{
    assemble, DofMap, Factored, FieldSolution, IncidentWave, Load, Parity, Problem, SolverOptions,
};
use crate::geometry::{check_symmetry, BodySection, Decomposition, Depth, WaterConfig};
use crate::hydrostatics::{check_equilibrium, EquilibriumTolerances, HydrostaticModel};
use crate::mesh::{deep_truncation_abscissa, deep_truncation_depth, generate_mesh, EdgeTag, Mesh, MeshConfig};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Trapped-mode flag thresholds.
pub const SIGMA_THRESHOLD: f64 = 1e-6;
pub const RADIATION_THRESHOLD: f64 = 1e-8;
pub const ORTHOGONALITY_THRESHOLD: f64 = 1e-3;
/// `sigma_min(T) / ||T||` below which scattering is refused.
pub const SCATTERING_SIGMA_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Motion {
    Full,
    Sway,
    Heave,
    Roll,
}

impl Motion {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Motion::Full),
            "sway" => Some(Motion::Sway),
            "heave" => Some(Motion::Heave),
            "roll" => Some(Motion::Roll),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Motion::Full => "full",
            Motion::Sway => "sway",
            Motion::Heave => "heave",
            Motion::Roll => "roll",
        }
    }

    /// Free components of `z`.
    pub fn components(self) -> &'static [usize] {
        match self {
            Motion::Full => &[0, 1, 2],
            Motion::Sway => &[0],
            Motion::Heave => &[1],
            Motion::Roll => &[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Restriction {
    pub motion: Motion,
    pub parity: Parity,
}

impl Restriction {
    pub const FREE: Restriction = Restriction {
        motion: Motion::Full,
        parity: Parity::Any,
    };

    pub fn new(motion: Motion, parity: Parity) -> Self {
        Self { motion, parity }
    }

    /// Free components whose Neumann data have the parity of the potential:
    /// on a symmetric contour `N1` and `N3` are odd in `x` and `N2` is even.
    pub fn active(self) -> Vec<usize> {
        self.motion
            .components()
            .iter()
            .copied()
            .filter(|&j| match self.parity {
                Parity::Any => true,
                Parity::Odd => j != 1,
                Parity::Even => j == 1,
            })
            .collect()
    }
}

/// Loads `int_S psi omega N_j ds`, one per motion.
pub fn wetted_loads(problem: &Problem, dec: &Decomposition) -> [Load; 3] {
    let omega = problem.params.omega;
    [0, 1, 2].map(|j| {
        problem.neumann_load(&[EdgeTag::Wetted], &|_, p, n| {
            C64::new(omega * dec.generalized_normal(p, n)[j], 0.0)
        })
    })
}

#[derive(Debug, Clone)]
pub struct RadiationSet {
    pub omega: f64,
    /// Potentials with `dphi/dn = omega N_j` on `S` for the active motions.
    pub phi: [Option<FieldSolution>; 3],
    /// `int_S phi_j N_i ds` at row `i`, column `j` (zero for inactive `j`).
    pub reaction: [[C64; 3]; 3],
    /// `omega int_S phi_j N_i ds = omega^2 (A_ij + i B_ij)`.
    pub added_mass: [[f64; 3]; 3],
    pub damping: [[f64; 3]; 3],
    pub loads: [Load; 3],
}

impl RadiationSet {
    /// `int_S phi N_i ds` for a nodal field.
    pub fn normal_integrals(&self, phi: &[C64]) -> [C64; 3] {
        [0, 1, 2].map(|i| {
            phi.iter()
                .zip(&self.loads[i].wetted)
                .map(|(p, l)| p * l)
                .sum::<C64>()
                / self.omega
        })
    }

    /// `phi = sum z_j phi_j`.
    pub fn potential(&self, z: &[C64; 3], problem: &Problem) -> FieldSolution {
        let parts: Vec<(&FieldSolution, C64)> = (0..3)
            .filter_map(|j| self.phi[j].as_ref().map(|s| (s, z[j])))
            .collect();
        FieldSolution::combine(&parts, problem)
    }
}

pub fn radiation_from(factored: &Factored, dec: &Decomposition, active: &[usize]) -> Result<RadiationSet> {
    let problem = factored.problem;
    let omega = problem.params.omega;
    let loads = wetted_loads(problem, dec);
    let mut phi: [Option<FieldSolution>; 3] = [None, None, None];
    for &j in active {
        phi[j] = Some(factored.solve(&loads[j], None)?);
    }
    let mut set = RadiationSet {
        omega,
        phi,
        reaction: [[ZERO; 3]; 3],
        added_mass: [[0.0; 3]; 3],
        damping: [[0.0; 3]; 3],
        loads,
    };
    for j in 0..3 {
        if let Some(s) = &set.phi[j] {
            let col = set.normal_integrals(&s.phi);
            for i in 0..3 {
                set.reaction[i][j] = col[i];
                set.added_mass[i][j] = col[i].re / omega;
                set.damping[i][j] = col[i].im / omega;
            }
        }
    }
    Ok(set)
}

pub fn radiation_set(
    mesh: &Mesh,
    params: &WaveParameters,
    dec: &Decomposition,
    restriction: Restriction,
    opts: SolverOptions,
) -> Result<RadiationSet> {
    let dofs = DofMap::new(mesh, restriction.parity)?;
    let problem = assemble(mesh, params, dofs, opts)?;
    let factored = problem.factor()?;
    radiation_from(&factored, dec, &restriction.active())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledMatrix {
    /// `T = -omega^2 E + g K - omega int_S phi_j N_i ds`.
    pub t: [[C64; 3]; 3],
    /// Spectral norm of `T`.
    pub norm: f64,
    pub sigma_min: f64,
}

fn svd_extremes(m: DMatrix<C64>) -> (f64, f64, Vec<C64>) {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (mut lo, mut hi, mut idx) = (f64::INFINITY, 0.0f64, 0);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        hi = hi.max(s);
        if s < lo {
            lo = s;
            idx = i;
        }
    }
    let v = (0..v_t.ncols()).map(|c| v_t[(idx, c)].conj()).collect();
    (lo, hi, v)
}

impl CoupledMatrix {
    /// Smallest singular value of the columns `active` of `T` with its unit
    /// right singular vector spread over the three components.
    pub fn restricted(&self, active: &[usize]) -> Option<(f64, [C64; 3])> {
        if active.is_empty() {
            return None;
        }
        let m = DMatrix::from_fn(3, active.len(), |i, c| self.t[i][active[c]]);
        let (lo, _, v) = svd_extremes(m);
        let mut z = [ZERO; 3];
        for (c, &j) in active.iter().enumerate() {
            z[j] = v[c];
        }
        Some((lo, z))
    }

    pub fn sigma_ratio(&self) -> f64 {
        if self.norm > 0.0 {
            self.sigma_min / self.norm
        } else {
            0.0
        }
    }
}

pub fn coupled_matrix(rad: &RadiationSet, model: &HydrostaticModel, params: &WaveParameters) -> CoupledMatrix {
    let (w, g) = (params.omega, params.g);
    let e = model.e_matrix();
    let mut t = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = C64::new(-w * w * e[i][j] + g * model.k[i][j], 0.0) - w * rad.reaction[i][j];
        }
    }
    let (sigma_min, norm, _) = svd_extremes(DMatrix::from_fn(3, 3, |i, j| t[i][j]));
    CoupledMatrix { t, norm, sigma_min }
}

#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub z: [C64; 3],
    pub phi: FieldSolution,
    pub sigma_min: Option<f64>,
    pub sigma_ratio: Option<f64>,
    pub restriction: Restriction,
}

#[derive(Debug, Clone)]
pub struct Scattering {
    pub solution: CoupledSolution,
    /// Total field around the body held fixed.
    pub diffraction: FieldSolution,
    pub reflection: C64,
    pub transmission: C64,
    /// `omega int_S phi_D N_i ds`.
    pub exciting: [C64; 3],
    /// The exciting force from the left far-field amplitudes of the
    /// radiation potentials.
    pub exciting_haskind: [C64; 3],
    pub added_mass: [[f64; 3]; 3],
    pub damping: [[f64; 3]; 3],
}

/// Freely floating body in a plane wave of free-surface amplitude
/// `amplitude` coming from `x = -infinity`.
pub fn solve_scattering(
    mesh: &Mesh,
    params: &WaveParameters,
    dec: &Decomposition,
    model: Option<&HydrostaticModel>,
    amplitude: C64,
    opts: SolverOptions,
) -> Result<Scattering> {
    let problem = assemble(mesh, params, DofMap::full(mesh.nodes.len()), opts)?;
    let factored = problem.factor()?;
    let inc = IncidentWave::new(&problem).with_amplitude(amplitude);
    let diffraction = factored.solve(&problem.incident_closure_load(&inc), Some(inc))?;
    let x_t = mesh.x_t;
    let free_body = model.filter(|_| !dec.parts.is_empty());
    let (solution, exciting, exciting_haskind, added_mass, damping) = match free_body {
        None => (
            CoupledSolution {
                z: [ZERO; 3],
                phi: diffraction.clone(),
                sigma_min: None,
                sigma_ratio: None,
                restriction: Restriction::FREE,
            },
            [ZERO; 3],
            [ZERO; 3],
            [[0.0; 3]; 3],
            [[0.0; 3]; 3],
        ),
        Some(model) => {
            let rad = radiation_from(&factored, dec, &[0, 1, 2])?;
            let t = coupled_matrix(&rad, model, params);
            if t.sigma_ratio() < SCATTERING_SIGMA_THRESHOLD {
                return Err(Error::NearlySingularT {
                    ratio: t.sigma_ratio(),
                });
            }
            let f = rad.normal_integrals(&diffraction.phi).map(|v| v * params.omega);
            let s = problem.closures[0].flux_ell;
            let haskind = [0, 1, 2].map(|j| {
                let c = rad.phi[j].as_ref().map_or(ZERO, |p| p.modal[0][0]);
                C64::new(0.0, -2.0 * s) * inc.modal(-x_t) * c
            });
            let tm = DMatrix::from_fn(3, 3, |i, j| t.t[i][j]);
            let rhs = nalgebra::DVector::from_column_slice(&f);
            let zv = tm.lu().solve(&rhs).ok_or(Error::NearlySingularT {
                ratio: t.sigma_ratio(),
            })?;
            let z = [zv[0], zv[1], zv[2]];
            let mut parts: Vec<(&FieldSolution, C64)> = vec![(&diffraction, C64::new(1.0, 0.0))];
            for j in 0..3 {
                if let Some(p) = &rad.phi[j] {
                    parts.push((p, z[j]));
                }
            }
            let phi = FieldSolution::combine(&parts, &problem);
            (
                CoupledSolution {
                    z,
                    phi,
                    sigma_min: Some(t.sigma_min),
                    sigma_ratio: Some(t.sigma_ratio()),
                    restriction: Restriction::FREE,
                },
                f,
                haskind,
                rad.added_mass,
                rad.damping,
            )
        }
    };
    let scale = amplitude * inc.alpha;
    Ok(Scattering {
        reflection: solution.phi.amplitude[0] / scale,
        transmission: solution.phi.amplitude[1] / scale,
        solution,
        diffraction,
        exciting,
        exciting_haskind,
        added_mass,
        damping,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub k: f64,
    pub restriction: Restriction,
    pub h_mesh: f64,
    pub x_t: Option<f64>,
    pub refinement: f64,
    pub solver: SolverOptions,
    pub sigma_threshold: f64,
    pub radiation_threshold: f64,
    pub orthogonality_threshold: f64,
    /// Scan bodies that fail the equilibrium conditions; no row is certified.
    pub allow_unbalanced: bool,
}

impl ScanConfig {
    pub fn new(k: f64, restriction: Restriction, h_mesh: f64) -> Self {
        Self {
            k,
            restriction,
            h_mesh,
            x_t: None,
            refinement: 4.0,
            solver: SolverOptions::default(),
            sigma_threshold: SIGMA_THRESHOLD,
            radiation_threshold: RADIATION_THRESHOLD,
            orthogonality_threshold: ORTHOGONALITY_THRESHOLD,
            allow_unbalanced: false,
        }
    }

    fn mesh_config(&self, depth: f64) -> MeshConfig {
        let mut c = MeshConfig::new(self.h_mesh, depth);
        c.x_t = self.x_t;
        c.refinement = self.refinement;
        c
    }

    fn deep_mesh_config(&self, dec: &Decomposition, nu: f64) -> MeshConfig {
        let h_eff = deep_truncation_depth(nu, dec.draft());
        let mut c = MeshConfig::new(self.h_mesh, h_eff);
        c.x_t = Some(self.x_t.unwrap_or_else(|| deep_truncation_abscissa(dec, h_eff)));
        c.refinement = self.refinement;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub index: usize,
    pub omega: f64,
    pub k: f64,
    pub motion: Motion,
    pub parity: Parity,
    pub ell_b: Option<f64>,
    /// `sigma_min / ||T||` over the free components.
    pub sigma_ratio: Option<f64>,
    /// Radiated flux over fluid kinetic energy for the near-null `z`.
    pub radiated_ratio: Option<f64>,
    pub equipartition: Option<f64>,
    /// Smallest singular value of the field operator over its norm.
    pub fluid_sigma_ratio: Option<f64>,
    pub fluid_radiated_ratio: Option<f64>,
    /// Largest normalized `|int_S phi N_i ds|` of the field near-null vector.
    pub orthogonality: Option<f64>,
    pub flagged: bool,
    pub certificate: Statement,
    pub finite_depth_analogue: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub flags: usize,
    /// Rows flagged although a uniqueness statement covers them.
    pub contradictions: Vec<usize>,
    /// Rows whose `sigma_ratio` differs by more than 10x from the previous row.
    pub grid_jumps: Vec<usize>,
}

fn radiated_ratio(problem: &Problem, sol: &FieldSolution) -> f64 {
    let flux = problem.truncation_flux(sol).im.abs();
    if sol.kinetic > 0.0 {
        flux / sol.kinetic
    } else {
        0.0
    }
}

/// `max_i |int_S phi N_i| / (||phi||_S ||N_i||_S)` over the wetted edges.
fn orthogonality(mesh: &Mesh, dec: &Decomposition, phi: &[C64]) -> f64 {
    let mut dot = [ZERO; 3];
    let mut nn = [0.0; 3];
    let mut pp = 0.0;
    const RULE: [(f64, f64); 2] = [(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)];
    for e in mesh.edges_with_tag(EdgeTag::Wetted) {
        let (a, b) = (mesh.nodes[e.a], mesh.nodes[e.b]);
        let (len, n) = (mesh.edge_length(e), mesh.edge_normal(e));
        for (t, w) in RULE {
            let v = phi[e.a] * (1.0 - t) + phi[e.b] * t;
            let big_n = dec.generalized_normal(a.lerp(b, t), n);
            pp += w * len * v.norm_sqr();
            for i in 0..3 {
                dot[i] += v * (w * len * big_n[i]);
                nn[i] += w * len * big_n[i] * big_n[i];
            }
        }
    }
    (0..3)
        .map(|i| {
            let d = (pp * nn[i]).sqrt();
            if d > 0.0 {
                dot[i].norm() / d
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

struct ScanContext<'a> {
    dec: &'a Decomposition,
    model: &'a HydrostaticModel,
    water: &'a WaterConfig,
    facts: &'a BodyFacts,
    cfg: &'a ScanConfig,
    shared_mesh: Option<&'a Mesh>,
}

fn scan_point(ctx: &ScanContext, index: usize, omega: f64) -> ScanRow {
    let r = ctx.cfg.restriction;
    let mut row = ScanRow {
        index,
        omega,
        k: ctx.cfg.k,
        motion: r.motion,
        parity: r.parity,
        ell_b: None,
        sigma_ratio: None,
        radiated_ratio: None,
        equipartition: None,
        fluid_sigma_ratio: None,
        fluid_radiated_ratio: None,
        orthogonality: None,
        flagged: false,
        certificate: Statement::None,
        finite_depth_analogue: false,
        error: None,
    };
    if let Err(e) = scan_fill(ctx, omega, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn scan_fill(ctx: &ScanContext, omega: f64, row: &mut ScanRow) -> Result<()> {
    let cfg = ctx.cfg;
    let params = make_wave_parameters_with_modes(omega, cfg.k, ctx.water.gravity, ctx.water.depth, cfg.solver.modes)?;
    let cert = audits::certify(ctx.facts, &params, cfg.restriction);
    row.certificate = cert.statement;
    row.finite_depth_analogue = cert.finite_depth_analogue;
    row.ell_b = ctx.facts.half_spacing.map(|b| params.outgoing_ell() * b);
    let owned;
    let mesh = match ctx.shared_mesh {
        Some(m) => m,
        None => {
            owned = generate_mesh(ctx.dec, &cfg.deep_mesh_config(ctx.dec, params.nu))?;
            &owned
        }
    };
    let dofs = DofMap::new(mesh, cfg.restriction.parity)?;
    let problem = assemble(mesh, &params, dofs, cfg.solver)?;
    let factored = problem.factor()?;
    let active = cfg.restriction.active();
    let rad = radiation_from(&factored, ctx.dec, &active)?;
    let t = coupled_matrix(&rad, ctx.model, &params);
    let mut flag = false;
    if let Some((sigma, z)) = t.restricted(&active) {
        let ratio = if t.norm > 0.0 { sigma / t.norm } else { 0.0 };
        let sol = rad.potential(&z, &problem);
        let radiated = radiated_ratio(&problem, &sol);
        let eq = audits::equipartition(&problem, &sol, Some((&z, ctx.model)));
        row.sigma_ratio = Some(ratio);
        row.radiated_ratio = Some(radiated);
        row.equipartition = Some(eq.relative);
        flag |= ratio < cfg.sigma_threshold && radiated < cfg.radiation_threshold;
    }
    let a_norm = problem.matrix().norm_inf();
    let (sigma_f, v) = factored.lu().smallest_singular_estimate(12);
    let phi_f = problem.dofs.expand(&v);
    let sol_f = problem.solution(phi_f, &Load::zeros(mesh.nodes.len()), None);
    let fluid_ratio = sigma_f / a_norm;
    let fluid_radiated = radiated_ratio(&problem, &sol_f);
    let ortho = orthogonality(mesh, ctx.dec, &sol_f.phi);
    row.fluid_sigma_ratio = Some(fluid_ratio);
    row.fluid_radiated_ratio = Some(fluid_radiated);
    row.orthogonality = Some(ortho);
    flag |= fluid_ratio < cfg.sigma_threshold
        && fluid_radiated < cfg.radiation_threshold
        && ortho < cfg.orthogonality_threshold;
    row.flagged = flag;
    Ok(())
}

/// Sweeps `omegas` for trapped-mode candidates under `cfg.restriction`.
/// Frequencies run in parallel; rows keep the order of `omegas`.
pub fn trapped_mode_scan(
    body: &BodySection,
    dec: &Decomposition,
    model: &HydrostaticModel,
    water: &WaterConfig,
    omegas: &[f64],
    cfg: &ScanConfig,
) -> Result<ScanReport> {
    let eq = check_equilibrium(model, body, EquilibriumTolerances::default());
    if !eq.passes() && !cfg.allow_unbalanced {
        return Err(Error::InvalidBody("equilibrium conditions fail".into()));
    }
    if cfg.restriction.parity != Parity::Any {
        if !check_symmetry(body) {
            return Err(Error::InvalidBody("parity restriction needs a symmetric body".into()));
        }
        if dec.center_of_mass.x.abs() > dec.tol {
            return Err(Error::InvalidBody("centre of mass is off the symmetry axis".into()));
        }
    }
    let facts = BodyFacts::new(body, dec, model, water.gravity);
    let shared = match water.depth {
        Depth::Finite(h) => Some(generate_mesh(dec, &cfg.mesh_config(h))?),
        Depth::Infinite => None,
    };
    let ctx = ScanContext {
        dec,
        model,
        water,
        facts: &facts,
        cfg,
        shared_mesh: shared.as_ref(),
    };
    let rows: Vec<ScanRow> = omegas
        .par_iter()
        .enumerate()
        .map(|(i, &w)| scan_point(&ctx, i, w))
        .collect();
    let flags = rows.iter().filter(|r| r.flagged).count();
    let contradictions = rows
        .iter()
        .filter(|r| r.flagged && r.certificate != Statement::None)
        .map(|r| r.index)
        .collect();
    let grid_jumps = rows
        .windows(2)
        .filter_map(|w| match (w[0].sigma_ratio, w[1].sigma_ratio) {
            (Some(a), Some(b)) if a.max(b) > 10.0 * a.min(b) => Some(w[1].index),
            _ => None,
        })
        .collect();
    Ok(ScanReport {
        rows,
        flags,
        contradictions,
        grid_jumps,
    })
}

/// `n` frequencies evenly spaced in `omega^2` over `[lo, hi]`.
pub fn omega_grid(omega_min: f64, omega_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![omega_min];
    }
    let (a, b) = (omega_min * omega_min, omega_max * omega_max);
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).sqrt())
        .collect()
}
