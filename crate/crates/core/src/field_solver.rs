//! Linear finite elements for `(Laplace - k^2) phi = 0` in the truncated
//! water domain with a modal Dirichlet-to-Neumann closure on the truncation
//! lines.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::banded::{BandLu, BandMatrix};
use crate::dispersion::{vertical_modes, VerticalMode, WaveParameters, DEFAULT_EVANESCENT_MODES};
use crate::error::{Error, Result};
use crate::geometry::Depth;
use crate::mesh::{BoundaryEdge, EdgeTag, Locator, Mesh};
use crate::polygon::Point;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Gauss-Legendre rules on `[0, 1]` as `(abscissa, weight)`.
const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 0.277_777_777_777_777_8),
    (0.5, 0.444_444_444_444_444_4),
    (0.887_298_334_620_741_7, 0.277_777_777_777_777_8),
];

const GAUSS6: [(f64, f64); 6] = [
    (0.033_765_242_898_423_99, 0.085_662_246_189_585_17),
    (0.169_395_306_766_867_74, 0.180_380_786_524_069_3),
    (0.380_690_406_958_401_56, 0.233_956_967_286_345_5),
    (0.619_309_593_041_598_4, 0.233_956_967_286_345_5),
    (0.830_604_693_233_132_3, 0.180_380_786_524_069_3),
    (0.966_234_757_101_576, 0.085_662_246_189_585_17),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Any,
    Odd,
    Even,
}

impl Parity {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "any" => Some(Parity::Any),
            "odd" => Some(Parity::Odd),
            "even" => Some(Parity::Even),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Any => "any",
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }

    fn sign(self) -> f64 {
        if self == Parity::Odd {
            -1.0
        } else {
            1.0
        }
    }
}

/// Map from mesh nodes to unknowns; parity restrictions tie each node to its
/// mirror image with a sign.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    map: Vec<Option<(usize, f64)>>,
    n_dofs: usize,
    parity: Parity,
}

impl DofMap {
    pub fn full(n_nodes: usize) -> Self {
        Self {
            map: (0..n_nodes).map(|i| Some((i, 1.0))).collect(),
            n_dofs: n_nodes,
            parity: Parity::Any,
        }
    }

    pub fn new(mesh: &Mesh, parity: Parity) -> Result<Self> {
        if parity == Parity::Any {
            return Ok(Self::full(mesh.nodes.len()));
        }
        let mirror = mesh.mirror.as_ref().ok_or(Error::ParityUnavailable)?;
        let mut map = vec![None; mesh.nodes.len()];
        let mut n = 0;
        for (i, p) in mesh.nodes.iter().enumerate() {
            if p.x < 0.0 || (p.x == 0.0 && parity == Parity::Even) {
                map[i] = Some((n, 1.0));
                n += 1;
            }
        }
        for (i, p) in mesh.nodes.iter().enumerate() {
            if p.x > 0.0 {
                map[i] = map[mirror[i]].map(|(d, _)| (d, parity.sign()));
            }
        }
        Ok(Self {
            map,
            n_dofs: n,
            parity,
        })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn get(&self, node: usize) -> Option<(usize, f64)> {
        self.map[node]
    }

    pub fn restrict(&self, nodal: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n_dofs];
        for (i, m) in self.map.iter().enumerate() {
            if let Some((d, s)) = m {
                out[*d] += nodal[i] * *s;
            }
        }
        out
    }

    pub fn expand(&self, dofs: &[C64]) -> Vec<C64> {
        self.map
            .iter()
            .map(|m| m.map_or(ZERO, |(d, s)| dofs[d] * s))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DtnSides {
    pub left: bool,
    pub right: bool,
}

impl DtnSides {
    pub const BOTH: DtnSides = DtnSides {
        left: true,
        right: true,
    };
    pub const NONE: DtnSides = DtnSides {
        left: false,
        right: false,
    };
}

/// Boundary load `int psi_i g ds` per node, with its wetted-contour part kept
/// separately for the energy audits.
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub nodal: Vec<C64>,
    pub wetted: Vec<C64>,
}

impl Load {
    pub fn zeros(n: usize) -> Self {
        Self {
            nodal: vec![ZERO; n],
            wetted: vec![ZERO; n],
        }
    }
}

impl Add for &Load {
    type Output = Load;
    fn add(self, o: &Load) -> Load {
        Load {
            nodal: self.nodal.iter().zip(&o.nodal).map(|(a, b)| a + b).collect(),
            wetted: self.wetted.iter().zip(&o.wetted).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Mul<C64> for &Load {
    type Output = Load;
    fn mul(self, c: C64) -> Load {
        Load {
            nodal: self.nodal.iter().map(|a| a * c).collect(),
            wetted: self.wetted.iter().map(|a| a * c).collect(),
        }
    }
}

/// Plane wave `cosh(kappa0 (y + h)) / cosh(kappa0 h) exp(i ell0 x)` coming
/// from `x = -infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncidentWave {
    pub kappa0: f64,
    pub ell0: f64,
    pub depth: f64,
    /// Projection of the vertical profile on the unit mode 0.
    pub alpha: f64,
    /// Free-surface amplitude at `x = 0`.
    pub amplitude: C64,
}

impl IncidentWave {
    pub fn new(problem: &Problem) -> Self {
        let VerticalMode::Propagating { kappa, h, .. } = problem.modes[0] else {
            unreachable!("mode 0 propagates")
        };
        let left = &problem.closures[0];
        Self {
            kappa0: kappa,
            ell0: left.phase_ell,
            depth: h,
            alpha: left.incident_coef,
            amplitude: C64::new(1.0, 0.0),
        }
    }

    pub fn with_amplitude(self, amplitude: C64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn value(&self, p: Point) -> C64 {
        let prof = crate::dispersion::scaled_cosh(self.kappa0, p.y, self.depth);
        self.amplitude * C64::from_polar(prof, self.ell0 * p.x)
    }

    pub fn gradient(&self, p: Point) -> (C64, C64) {
        let e = self.amplitude * C64::from_polar(1.0, self.ell0 * p.x);
        let c = crate::dispersion::scaled_cosh(self.kappa0, p.y, self.depth);
        let s = crate::dispersion::scaled_sinh(self.kappa0, p.y, self.depth);
        (C64::new(0.0, self.ell0 * c) * e, e * (self.kappa0 * s))
    }

    /// Mode-0 coefficient of the incident trace at abscissa `x`.
    pub fn modal(&self, x: f64) -> C64 {
        self.amplitude * C64::from_polar(self.alpha, self.ell0 * x)
    }
}

/// Assembled system for one `(omega, k)`, mesh and parity class.
#[derive(Debug, Clone)]
pub struct Problem<'m> {
    pub mesh: &'m Mesh,
    /// Parameters as requested (possibly infinite depth).
    pub params: WaveParameters,
    /// Parameters over the meshed depth, used by the discretization.
    pub solver_params: WaveParameters,
    pub modes: Vec<VerticalMode>,
    pub dofs: DofMap,
    pub dtn: DtnSides,
    /// Radiation closures on the left and right truncation lines.
    pub closures: [SideClosure; 2],
    matrix: BandMatrix,
}

/// How the outgoing condition is imposed on the truncation lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Closure {
    /// Exact condition for the mesh continued as a semi-infinite lattice of
    /// right triangles beyond the line, using all discrete vertical modes.
    Lattice,
    /// Continuous vertical modes `f_0 .. f_M` with their exact DtN eigenvalues.
    Modal,
}

/// Modal radiation condition `dphi/dn = lambda_n phi` on one truncation line.
#[derive(Debug, Clone, PartialEq)]
pub struct SideClosure {
    /// Per mode, node weights `g_n` with coefficient `c_n = sum g_n(i) phi_i`.
    pub weights: Vec<Vec<(usize, f64)>>,
    pub eigenvalues: Vec<C64>,
    /// Wavenumber carrying the energy flux of mode 0.
    pub flux_ell: f64,
    /// Phase speed wavenumber of mode 0 along `x`.
    pub phase_ell: f64,
    /// Mode-0 coefficient of the incident wave with unit free-surface value.
    pub incident_coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Evanescent modes kept by the continuous vertical modes.
    pub modes: usize,
    pub dtn: DtnSides,
    pub closure: Closure,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            modes: DEFAULT_EVANESCENT_MODES,
            dtn: DtnSides::BOTH,
            closure: Closure::Lattice,
        }
    }
}

pub fn assemble<'m>(
    mesh: &'m Mesh,
    params: &WaveParameters,
    dofs: DofMap,
    opts: SolverOptions,
) -> Result<Problem<'m>> {
    let solver_params = match params.depth {
        Depth::Finite(h) => {
            if (h - mesh.depth).abs() > 1e-9 * h {
                return Err(Error::InvalidWater(format!(
                    "mesh depth {} differs from water depth {h}",
                    mesh.depth
                )));
            }
            if params.evanescent_roots.len() >= opts.modes {
                params.clone()
            } else {
                params.at_depth(h, opts.modes)?
            }
        }
        Depth::Infinite => params.at_depth(mesh.depth, opts.modes)?,
    };
    let modes = vertical_modes(&solver_params, opts.modes)?;
    let closures = match opts.closure {
        Closure::Modal => [
            modal_closure(mesh, EdgeTag::TruncLeft, &modes),
            modal_closure(mesh, EdgeTag::TruncRight, &modes),
        ],
        Closure::Lattice => [
            lattice_closure(mesh, EdgeTag::TruncLeft, &solver_params)?,
            lattice_closure(mesh, EdgeTag::TruncRight, &solver_params)?,
        ],
    };

    let n = dofs.n_dofs();
    let mut bw = 0usize;
    let dof = |i: usize| dofs.get(i).map(|(d, _)| d);
    for t in &mesh.triangles {
        let ds: Vec<usize> = t.iter().filter_map(|&i| dof(i)).collect();
        for &a in &ds {
            for &b in &ds {
                bw = bw.max(a.abs_diff(b));
            }
        }
    }
    for (side, on) in [(0, opts.dtn.left), (1, opts.dtn.right)] {
        if on {
            let ds: Vec<usize> = closures[side].weights[0].iter().filter_map(|&(i, _)| dof(i)).collect();
            if let (Some(lo), Some(hi)) = (ds.iter().min(), ds.iter().max()) {
                bw = bw.max(hi - lo);
            }
        }
    }
    let mut matrix = BandMatrix::zeros(n, bw, bw);
    let mut put = |i: usize, j: usize, v: C64| {
        if let (Some((a, sa)), Some((b, sb))) = (dofs.get(i), dofs.get(j)) {
            let w = v * (sa * sb);
            if i == j {
                matrix.add(a, b, w);
            } else {
                matrix.add(a, b, w);
                matrix.add(b, a, w);
            }
        }
    };
    let k2 = solver_params.k * solver_params.k;
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x));
        let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
        let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
        let mass = lumped_mass(p, area);
        for a in 0..3 {
            for q in a..3 {
                let stiff = (b[a] * b[q] + c[a] * c[q]) / (4.0 * area);
                let m = if a == q { k2 * mass[a] } else { 0.0 };
                put(t[a], t[q], C64::new(stiff + m, 0.0));
            }
        }
    }
    let nu = solver_params.nu;
    for e in mesh.edges_with_tag(EdgeTag::FreeSurface) {
        let half = 0.5 * mesh.edge_length(e);
        put(e.a, e.a, C64::new(-nu * half, 0.0));
        put(e.b, e.b, C64::new(-nu * half, 0.0));
    }
    for (side, on) in [(0, opts.dtn.left), (1, opts.dtn.right)] {
        if !on {
            continue;
        }
        let cl = &closures[side];
        for (&lambda, proj) in cl.eigenvalues.iter().zip(&cl.weights) {
            for (x, &(i, gi)) in proj.iter().enumerate() {
                for &(j, gj) in &proj[x..] {
                    put(i, j, -lambda * (gi * gj));
                }
            }
        }
    }
    Ok(Problem {
        mesh,
        params: params.clone(),
        solver_params,
        modes,
        dofs,
        dtn: opts.dtn,
        closures,
        matrix,
    })
}

/// Lumped mass of a P1 triangle. Right triangles are split at the
/// circumcentre (the midpoint of the hypotenuse), so that a lattice of
/// rectangles gets the trapezoidal weights whatever its diagonals; other
/// triangles are split in thirds.
fn lumped_mass(p: [Point; 3], area: f64) -> [f64; 3] {
    for a in 0..3 {
        let (u, v) = (p[(a + 1) % 3], p[(a + 2) % 3]);
        let (ux, uy, vx, vy) = (u.x - p[a].x, u.y - p[a].y, v.x - p[a].x, v.y - p[a].y);
        if (ux * vx + uy * vy).abs() <= 1e-10 * (ux.hypot(uy) * vx.hypot(vy)) {
            let mut w = [0.25 * area; 3];
            w[a] = 0.5 * area;
            return w;
        }
    }
    [area / 3.0; 3]
}

fn line_nodes(mesh: &Mesh, tag: EdgeTag) -> Vec<usize> {
    let mut nodes: Vec<usize> = mesh.edges_with_tag(tag).flat_map(|e| [e.a, e.b]).collect();
    nodes.sort_unstable_by(|&a, &b| mesh.nodes[a].y.total_cmp(&mesh.nodes[b].y).then(a.cmp(&b)));
    nodes.dedup();
    nodes
}

fn modal_closure(mesh: &Mesh, tag: EdgeTag, modes: &[VerticalMode]) -> SideClosure {
    let VerticalMode::Propagating { inv_norm, ell0, .. } = modes[0] else {
        unreachable!("mode 0 propagates")
    };
    SideClosure {
        weights: trunc_projections(mesh, tag, modes),
        eigenvalues: modes.iter().map(|m| m.dtn_eigenvalue()).collect(),
        flux_ell: ell0,
        phase_ell: ell0,
        incident_coef: 1.0 / inv_norm,
    }
}

/// Exact closure of the discrete problem continued beyond the truncation
/// line by columns of rectangles split into right triangles. On that lattice
/// the operator separates into `S_x (x) L_y + L_x (x) Q` with
/// `Q = S_y + k^2 L_y - nu e e^T`; each eigenvector `Q v = sigma L_y v`
/// propagates column to column by the root `mu` of
/// `mu + 1/mu = 2 + sigma dx^2` that is outgoing.
fn lattice_closure(mesh: &Mesh, tag: EdgeTag, params: &WaveParameters) -> Result<SideClosure> {
    let nodes = line_nodes(mesh, tag);
    let m = nodes.len();
    if m < 2 {
        return Err(Error::MeshFormat(format!("truncation line {} has no edges", tag.as_str())));
    }
    let x_line = mesh.nodes[nodes[0]].x;
    let on_line = |i: usize| nodes.binary_search_by(|&n| {
        mesh.nodes[n].y.total_cmp(&mesh.nodes[i].y).then(n.cmp(&i))
    }).is_ok();
    let mut dx = f64::INFINITY;
    for t in &mesh.triangles {
        if t.iter().any(|&i| on_line(i)) {
            for &j in t {
                if !on_line(j) {
                    dx = dx.min((mesh.nodes[j].x - x_line).abs());
                }
            }
        }
    }
    if !dx.is_finite() || dx <= 0.0 {
        return Err(Error::MeshFormat("no column next to the truncation line".into()));
    }
    let y: Vec<f64> = nodes.iter().map(|&i| mesh.nodes[i].y).collect();
    let mut q = DMatrix::<f64>::zeros(m, m);
    let mut l = vec![0.0; m];
    for w in 0..m - 1 {
        let d = y[w + 1] - y[w];
        l[w] += 0.5 * d;
        l[w + 1] += 0.5 * d;
        q[(w, w)] += 1.0 / d;
        q[(w + 1, w + 1)] += 1.0 / d;
        q[(w, w + 1)] -= 1.0 / d;
        q[(w + 1, w)] -= 1.0 / d;
    }
    let k2 = params.k * params.k;
    for i in 0..m {
        q[(i, i)] += k2 * l[i];
    }
    q[(m - 1, m - 1)] -= params.nu;
    let sq: Vec<f64> = l.iter().map(|v| v.sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| q[(i, j)] / (sq[i] * sq[j]));
    let eig = SymmetricEigen::new(scaled);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut weights = Vec::with_capacity(m);
    let mut eigenvalues = Vec::with_capacity(m);
    let (mut theta, mut incident_coef) = (0.0, 0.0);
    for (n, &col) in order.iter().enumerate() {
        let sigma = eig.eigenvalues[col];
        let mut w: Vec<f64> = (0..m).map(|i| eig.eigenvectors[(i, col)]).collect();
        if w[m - 1] < 0.0 {
            w.iter_mut().for_each(|v| *v = -*v);
        }
        let c = 1.0 + 0.5 * sigma * dx * dx;
        let mu = if c.abs() < 1.0 {
            C64::from_polar(1.0, c.acos())
        } else if c.abs() == 1.0 {
            return Err(Error::CutOff {
                kappa0: params.kappa0.unwrap_or(0.0),
                k: params.k,
            });
        } else {
            C64::new(c - c.signum() * (c * c - 1.0).sqrt(), 0.0)
        };
        if n == 0 {
            if mu.im <= 0.0 {
                return Err(Error::CutOff {
                    kappa0: params.kappa0.unwrap_or(0.0),
                    k: params.k,
                });
            }
            theta = mu.arg();
            incident_coef = sq[m - 1] / w[m - 1];
        }
        let d = (1.0 - mu) / dx + 0.5 * sigma * dx;
        eigenvalues.push(-d);
        weights.push(nodes.iter().enumerate().map(|(i, &node)| (node, w[i] * sq[i])).collect());
    }
    Ok(SideClosure {
        weights,
        eigenvalues,
        flux_ell: theta.sin() / dx,
        phase_ell: theta / dx,
        incident_coef,
    })
}

/// Node weights `int psi_i f_n dy` over the edges with `tag`, per mode.
fn trunc_projections(mesh: &Mesh, tag: EdgeTag, modes: &[VerticalMode]) -> Vec<Vec<(usize, f64)>> {
    let mut nodes: Vec<usize> = mesh.edges_with_tag(tag).flat_map(|e| [e.a, e.b]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let pos = |i: usize| nodes.binary_search(&i).unwrap();
    modes
        .iter()
        .map(|m| {
            let mut w = vec![0.0; nodes.len()];
            for e in mesh.edges_with_tag(tag) {
                let (p, q) = (mesh.nodes[e.a], mesh.nodes[e.b]);
                let len = p.dist(q);
                for (t, wt) in GAUSS6 {
                    let f = m.value(p.y + t * (q.y - p.y)) * wt * len;
                    w[pos(e.a)] += (1.0 - t) * f;
                    w[pos(e.b)] += t * f;
                }
            }
            nodes.iter().copied().zip(w).collect()
        })
        .collect()
}

impl<'m> Problem<'m> {
    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    /// Load from Neumann data `g(edge, point, outward normal)` on the edges
    /// whose tag is listed.
    pub fn neumann_load(
        &self,
        tags: &[EdgeTag],
        g: &dyn Fn(&BoundaryEdge, Point, (f64, f64)) -> C64,
    ) -> Load {
        let mesh = self.mesh;
        let mut load = Load::zeros(mesh.nodes.len());
        for e in mesh.boundary_edges.iter().filter(|e| tags.contains(&e.tag)) {
            let (p, q) = (mesh.nodes[e.a], mesh.nodes[e.b]);
            let len = p.dist(q);
            let n = mesh.edge_normal(e);
            let (mut fa, mut fb) = (ZERO, ZERO);
            for (t, w) in GAUSS3 {
                let v = g(e, p.lerp(q, t), n) * (w * len);
                fa += v * (1.0 - t);
                fb += v * t;
            }
            load.nodal[e.a] += fa;
            load.nodal[e.b] += fb;
            if e.tag == EdgeTag::Wetted {
                load.wetted[e.a] += fa;
                load.wetted[e.b] += fb;
            }
        }
        load
    }

    /// Load of the incident wave on the left truncation line, where the
    /// closure acts on the scattered part only.
    pub fn incident_closure_load(&self, inc: &IncidentWave) -> Load {
        let mut load = Load::zeros(self.mesh.nodes.len());
        let c = C64::new(0.0, -2.0 * self.closures[0].flux_ell) * inc.modal(-self.mesh.x_t);
        for &(i, g) in &self.closures[0].weights[0] {
            load.nodal[i] += c * g;
        }
        load
    }

    pub fn factor(&self) -> Result<Factored<'_, 'm>> {
        Ok(Factored {
            problem: self,
            lu: self.matrix.factor()?,
        })
    }

    /// Modal coefficients of a nodal field on both truncation lines.
    pub fn modal_coefficients(&self, phi: &[C64]) -> [Vec<C64>; 2] {
        let side = |s: usize| -> Vec<C64> {
            self.closures[s]
                .weights
                .iter()
                .map(|proj| proj.iter().map(|&(i, g)| phi[i] * g).sum())
                .collect()
        };
        [side(0), side(1)]
    }

    pub fn solution(&self, phi: Vec<C64>, load: &Load, incident: Option<IncidentWave>) -> FieldSolution {
        let modal = self.modal_coefficients(&phi);
        let x_t = self.mesh.x_t;
        let inc_left = incident.map_or(ZERO, |w| w.modal(-x_t));
        let amplitude = [
            (modal[0][0] - inc_left) * C64::from_polar(1.0, -self.closures[0].phase_ell * x_t),
            modal[1][0] * C64::from_polar(1.0, -self.closures[1].phase_ell * x_t),
        ];
        let (kinetic, potential) = energies(self.mesh, &phi, self.solver_params.k, self.solver_params.nu);
        FieldSolution {
            phi,
            params: self.params.clone(),
            solver_params: self.solver_params.clone(),
            modal,
            amplitude,
            kinetic,
            potential,
            wetted_load: load.wetted.clone(),
            incident,
        }
    }

    /// Trace integral `int phi_bar dphi/dn` over both truncation lines implied
    /// by the closure (and the incident wave on the left).
    pub fn truncation_flux(&self, sol: &FieldSolution) -> C64 {
        let mut total = ZERO;
        let x_t = self.mesh.x_t;
        for side in 0..2 {
            let cl = &self.closures[side];
            for (n, &lambda) in cl.eigenvalues.iter().enumerate() {
                let c = sol.modal[side][n];
                let inc = if side == 0 && n == 0 {
                    sol.incident.map_or(ZERO, |w| w.modal(-x_t))
                } else {
                    ZERO
                };
                total += c.conj() * lambda * (c - inc);
                if inc != ZERO {
                    total += c.conj() * C64::new(0.0, -cl.flux_ell) * inc;
                }
            }
        }
        total
    }
}

pub struct Factored<'p, 'm> {
    pub problem: &'p Problem<'m>,
    lu: BandLu,
}

impl<'p, 'm> Factored<'p, 'm> {
    pub fn lu(&self) -> &BandLu {
        &self.lu
    }

    pub fn solve_nodal(&self, load: &Load) -> Result<Vec<C64>> {
        let rhs = self.problem.dofs.restrict(&load.nodal);
        let x = self.lu.solve(&rhs)?;
        Ok(self.problem.dofs.expand(&x))
    }

    pub fn solve(&self, load: &Load, incident: Option<IncidentWave>) -> Result<FieldSolution> {
        let phi = self.solve_nodal(load)?;
        Ok(self.problem.solution(phi, load, incident))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub phi: Vec<C64>,
    pub params: WaveParameters,
    pub solver_params: WaveParameters,
    /// Mode coefficients on the left and right truncation lines.
    pub modal: [Vec<C64>; 2],
    /// Outgoing propagating amplitudes `[A-, A+]` with
    /// `phi ~ A f0(y) exp(i ell0 |x|)`.
    pub amplitude: [C64; 2],
    /// `int_W |grad phi|^2 + k^2 |phi|^2`.
    pub kinetic: f64,
    /// `nu int_F |phi|^2`.
    pub potential: f64,
    /// `int_S psi_i dphi/dn ds` per node.
    pub wetted_load: Vec<C64>,
    pub incident: Option<IncidentWave>,
}

impl FieldSolution {
    /// `int_S phi_bar dphi/dn ds`.
    pub fn wetted_flux(&self) -> C64 {
        self.phi
            .iter()
            .zip(&self.wetted_load)
            .map(|(p, g)| p.conj() * g)
            .sum()
    }

    pub fn combine(parts: &[(&FieldSolution, C64)], problem: &Problem) -> FieldSolution {
        let n = problem.mesh.nodes.len();
        let mut phi = vec![ZERO; n];
        let mut load = Load::zeros(n);
        let mut incident = None;
        for (s, c) in parts {
            for i in 0..n {
                phi[i] += s.phi[i] * c;
                load.wetted[i] += s.wetted_load[i] * c;
            }
            incident = incident.or(s.incident);
        }
        problem.solution(phi, &load, incident)
    }
}

/// Exact P1 integrals `int_W |grad phi|^2 + k^2 |phi|^2` and `nu int_F |phi|^2`.
pub fn energies(mesh: &Mesh, phi: &[C64], k: f64, nu: f64) -> (f64, f64) {
    let mut kin = 0.0;
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x));
        let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
        let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
        let v = t.map(|i| phi[i]);
        let gx: C64 = (0..3).map(|a| v[a] * b[a]).sum::<C64>() / (2.0 * area);
        let gy: C64 = (0..3).map(|a| v[a] * c[a]).sum::<C64>() / (2.0 * area);
        let s: C64 = v.iter().sum();
        let m = area / 12.0 * (v.iter().map(|z| z.norm_sqr()).sum::<f64>() + s.norm_sqr());
        kin += area * (gx.norm_sqr() + gy.norm_sqr()) + k * k * m;
    }
    let mut pot = 0.0;
    for e in mesh.edges_with_tag(EdgeTag::FreeSurface) {
        let (a, b) = (phi[e.a], phi[e.b]);
        pot += mesh.edge_length(e) / 6.0 * (2.0 * a.norm_sqr() + 2.0 * b.norm_sqr() + 2.0 * (a.conj() * b).re);
    }
    (kin, nu * pot)
}

/// `int phi(x, y) f(y) dy` along the vertical line at `x` through the mesh.
pub fn line_projection(
    locator: &Locator,
    phi: &[C64],
    x: f64,
    depth: f64,
    f: &dyn Fn(f64) -> f64,
    pieces: usize,
) -> Option<C64> {
    let dy = depth / pieces as f64;
    let mut s = ZERO;
    for k in 0..pieces {
        for (t, w) in GAUSS3 {
            let y = -depth + (k as f64 + t) * dy;
            s += locator.interpolate(phi, Point::new(x, y))? * (f(y) * w * dy);
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::make_wave_parameters;
    use crate::geometry::Decomposition;
    use crate::mesh::{generate_mesh, MeshConfig};

    fn strip(h_mesh: f64, depth: f64, x_t: f64) -> Mesh {
        let mut cfg = MeshConfig::new(h_mesh, depth);
        cfg.x_t = Some(x_t);
        generate_mesh(&Decomposition::empty(), &cfg).unwrap()
    }

    #[test]
    fn matrix_is_bitwise_symmetric() {
        let mesh = strip(0.25, 1.0, 2.0);
        let p = make_wave_parameters(3.0, 0.5, 9.81, Depth::Finite(1.0)).unwrap();
        for parity in [Parity::Any, Parity::Odd, Parity::Even] {
            let pr = assemble(&mesh, &p, DofMap::new(&mesh, parity).unwrap(), SolverOptions::default())
                .unwrap();
            assert!(pr.matrix().is_bitwise_symmetric());
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let mesh = strip(0.25, 1.0, 2.0);
        let p = make_wave_parameters(3.0, 0.5, 9.81, Depth::Finite(1.0)).unwrap();
        let pr = assemble(&mesh, &p, DofMap::full(mesh.nodes.len()), SolverOptions::default()).unwrap();
        let sol = pr.factor().unwrap().solve(&Load::zeros(mesh.nodes.len()), None).unwrap();
        assert!(sol.phi.iter().all(|z| *z == ZERO));
        assert_eq!(sol.kinetic, 0.0);
    }

    #[test]
    fn dof_map_round_trip() {
        let mesh = strip(0.5, 1.0, 2.0);
        let odd = DofMap::new(&mesh, Parity::Odd).unwrap();
        let even = DofMap::new(&mesh, Parity::Even).unwrap();
        let on_axis = mesh.nodes.iter().filter(|p| p.x == 0.0).count();
        assert_eq!(even.n_dofs() - odd.n_dofs(), on_axis);
        let v: Vec<C64> = (0..odd.n_dofs()).map(|i| C64::new(i as f64, 1.0)).collect();
        let nodal = odd.expand(&v);
        let m = mesh.mirror.as_ref().unwrap();
        for i in 0..nodal.len() {
            assert_eq!(nodal[i], -nodal[m[i]]);
        }
    }

    #[test]
    fn incident_wave_passes_through_empty_box() {
        let mesh = strip(0.1, 1.0, 2.0);
        let p = make_wave_parameters(3.5, 0.4, 9.81, Depth::Finite(1.0)).unwrap();
        let pr = assemble(&mesh, &p, DofMap::full(mesh.nodes.len()), SolverOptions::default()).unwrap();
        let inc = IncidentWave::new(&pr);
        let load = pr.incident_closure_load(&inc);
        let sol = pr.factor().unwrap().solve(&load, Some(inc)).unwrap();
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (i, q) in mesh.nodes.iter().enumerate() {
            err = err.max((sol.phi[i] - inc.value(*q)).norm());
            scale = scale.max(inc.value(*q).norm());
        }
        assert!(err < 0.05 * scale, "{err}");
        assert!(sol.amplitude[0].norm() < 1e-10 * inc.alpha, "{}", sol.amplitude[0]);
        assert!((sol.amplitude[1].norm() - inc.alpha).abs() < 1e-10 * inc.alpha);
        let flux = pr.truncation_flux(&sol);
        assert!(flux.norm() < 1e-10, "{flux}");
    }
}
