//! Mass/inertia and hydrostatic restoring matrices, equilibrium checks and
//! the stability threshold `lambda0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BodySection, Decomposition};
use crate::polygon::{self, Point};

/// Body and waterplane integrals entering the matrices `E` and `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integrals {
    /// Mass over water density.
    pub i_m: f64,
    /// Moment of inertia about the centre of mass, over water density.
    pub i_m2: f64,
    /// Waterplane length.
    pub i_d: f64,
    pub i_dx: f64,
    pub i_dxx: f64,
    /// First vertical moment of the immersed area about the centre of mass.
    pub i_by: f64,
    /// Immersed area.
    pub displaced_area: f64,
    /// First horizontal moment of the immersed area about the centre of mass.
    pub buoyancy_x_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HydrostaticModel {
    pub integrals: Integrals,
    pub center_of_mass: Point,
    /// Diagonal of `E`.
    pub e: [f64; 3],
    pub k: [[f64; 3]; 3],
}

impl HydrostaticModel {
    pub fn e_matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][i] = self.e[i];
        }
        m
    }

    /// Same restoring matrix with `E` multiplied by `c`.
    pub fn with_scaled_inertia(&self, c: f64) -> Self {
        let mut m = self.clone();
        for e in &mut m.e {
            *e *= c;
        }
        m
    }

    /// `conj(z)^T E z` and `conj(z)^T K z` for complex motion amplitudes.
    pub fn energies(&self, z: &[num_complex::Complex64; 3]) -> (f64, f64) {
        let mut ez = 0.0;
        let mut kz = num_complex::Complex64::new(0.0, 0.0);
        for i in 0..3 {
            ez += self.e[i] * z[i].norm_sqr();
            for j in 0..3 {
                kz += z[i].conj() * self.k[i][j] * z[j];
            }
        }
        (ez, kz.re)
    }
}

pub fn compute_matrices(body: &BodySection, dec: &Decomposition) -> HydrostaticModel {
    let c = dec.center_of_mass;
    let mass = body.mass_moments_about(c);
    let i_m = mass.area;
    let i_m2 = mass.sxx + mass.syy;
    let (mut i_d, mut i_dx, mut i_dxx) = (0.0, 0.0, 0.0);
    for p in &dec.parts {
        let (a, b) = (p.waterplane.0 - c.x, p.waterplane.1 - c.x);
        i_d += b - a;
        i_dx += 0.5 * (b * b - a * a);
        i_dxx += (b * b * b - a * a * a) / 3.0;
    }
    let immersed = dec
        .parts
        .iter()
        .map(|p| polygon::moments_about(&p.polygon, c))
        .fold(polygon::Moments::default(), |a, b| a + b);
    let integrals = Integrals {
        i_m,
        i_m2,
        i_d,
        i_dx,
        i_dxx,
        i_by: immersed.sy,
        displaced_area: immersed.area,
        buoyancy_x_moment: immersed.sx,
    };
    let k = [
        [0.0, 0.0, 0.0],
        [0.0, i_d, i_dx],
        [0.0, i_dx, i_dxx + immersed.sy],
    ];
    HydrostaticModel {
        integrals,
        center_of_mass: c,
        e: [i_m, i_m, i_m2],
        k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumTolerances {
    /// Relative tolerance of the Archimedes and alignment residuals.
    pub residual_rtol: f64,
    /// Relative eigenvalue tolerance for the definiteness checks.
    pub eigen_rtol: f64,
}

impl Default for EquilibriumTolerances {
    fn default() -> Self {
        Self {
            residual_rtol: 1e-8,
            eigen_rtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub archimedes_residual: f64,
    pub archimedes_ok: bool,
    pub alignment_residual: f64,
    pub alignment_ok: bool,
    pub k_eigenvalues: [f64; 3],
    pub k_psd: bool,
    pub k_prime_eigenvalues: [f64; 2],
    pub k_prime_pd: bool,
    pub stable: bool,
    pub in_equilibrium: bool,
}

impl EquilibriumReport {
    /// All subsidiary conditions hold.
    pub fn passes(&self) -> bool {
        self.in_equilibrium && self.stable
    }
}

pub fn check_equilibrium(
    model: &HydrostaticModel,
    body: &BodySection,
    tols: EquilibriumTolerances,
) -> EquilibriumReport {
    let it = &model.integrals;
    let area_scale = it.displaced_area.max(it.i_m).max(f64::MIN_POSITIVE);
    let archimedes_residual = (it.i_m - it.displaced_area).abs();
    let alignment_residual = it.buoyancy_x_moment.abs();
    let length = polygon::diameter(body.outer());
    let k_eigenvalues = symmetric_eigenvalues(model.k);
    let kp = [[model.k[1][1], model.k[1][2]], [model.k[2][1], model.k[2][2]]];
    let k_prime_eigenvalues = symmetric_eigenvalues_2(kp);
    let k_scale = model
        .k
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let archimedes_ok = archimedes_residual <= tols.residual_rtol * area_scale;
    let alignment_ok = alignment_residual <= tols.residual_rtol * area_scale * length;
    let k_psd = k_eigenvalues.iter().all(|&l| l >= -tols.eigen_rtol * k_scale);
    let k_prime_pd = k_prime_eigenvalues.iter().all(|&l| l > tols.eigen_rtol * k_scale);
    EquilibriumReport {
        archimedes_residual,
        archimedes_ok,
        alignment_residual,
        alignment_ok,
        k_eigenvalues,
        k_psd,
        k_prime_eigenvalues,
        k_prime_pd,
        stable: k_psd && k_prime_pd,
        in_equilibrium: archimedes_ok && alignment_ok,
    }
}

/// Largest root of `det(lambda E - g K) = 0`.
pub fn lambda0(model: &HydrostaticModel, g: f64) -> Result<f64> {
    let kp = [[model.k[1][1], model.k[1][2]], [model.k[2][1], model.k[2][2]]];
    let kp_eig = symmetric_eigenvalues_2(kp);
    let all_zero = model.k.iter().flatten().all(|&v| v == 0.0);
    if !all_zero && kp_eig.iter().any(|&l| l <= 0.0) {
        return Err(Error::Unstable(format!(
            "restoring sub-matrix eigenvalues {kp_eig:?} are not positive"
        )));
    }
    Ok(generalized_eigenvalues(model, g)[2])
}

/// Eigenvalues of `g K v = lambda E v` in ascending order, via the symmetric
/// reduction `E^{-1/2} g K E^{-1/2}`.
pub fn generalized_eigenvalues(model: &HydrostaticModel, g: f64) -> [f64; 3] {
    let s: Vec<f64> = model.e.iter().map(|e| 1.0 / e.sqrt()).collect();
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = g * s[i] * model.k[i][j] * s[j];
        }
    }
    symmetric_eigenvalues(c)
}

/// Property `Omega`: `omega^2 >= lambda0`.
pub fn has_property_omega(omega: f64, lambda0: f64) -> bool {
    omega * omega >= lambda0
}

/// Closed-form eigenvalues of a symmetric 3x3 matrix, ascending.
pub fn symmetric_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let mut eig = if p1 == 0.0 {
        [a[0][0], a[1][1], a[2][2]]
    } else {
        let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = a;
        for (i, row) in b.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - if i == j { q } else { 0.0 }) / p;
            }
        }
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [lo, 3.0 * q - hi - lo, hi]
    };
    eig.sort_by(f64::total_cmp);
    eig
}

pub fn symmetric_eigenvalues_2(a: [[f64; 2]; 2]) -> [f64; 2] {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let d = (0.5 * (a[0][0] - a[1][1])).hypot(a[0][1]);
    [m - d, m + d]
}
