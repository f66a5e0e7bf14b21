//! Wave parameters, finite-depth dispersion roots and the vertical mode basis.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Depth;

pub const DEFAULT_EVANESCENT_MODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveParameters {
    pub omega: f64,
    pub k: f64,
    pub g: f64,
    pub nu: f64,
    /// `sqrt(nu^2 - k^2)`.
    pub ell: f64,
    pub depth: Depth,
    /// Propagating root of `kappa tanh(kappa h) = nu` (finite depth only).
    pub kappa0: Option<f64>,
    /// Evanescent roots of `kappa tan(kappa h) = -nu`, one per interval
    /// `((n - 1/2) pi / h, n pi / h)`.
    pub evanescent_roots: Vec<f64>,
    /// Outgoing x-wavenumber `sqrt(kappa0^2 - k^2)` used by the solver.
    pub ell0: Option<f64>,
    /// Root of `l tanh(l h) = ell`, reported for comparison only.
    pub ell0_alt: Option<f64>,
}

impl WaveParameters {
    /// x-wavenumber of outgoing waves: `ell0` in finite depth, `ell` otherwise.
    pub fn outgoing_ell(&self) -> f64 {
        self.ell0.unwrap_or(self.ell)
    }

    pub fn depth_value(&self) -> Option<f64> {
        match self.depth {
            Depth::Finite(h) => Some(h),
            Depth::Infinite => None,
        }
    }

    /// Same frequency and axial wavenumber over finite depth `h`.
    pub fn at_depth(&self, h: f64, modes: usize) -> Result<WaveParameters> {
        make_wave_parameters_with_modes(self.omega, self.k, self.g, Depth::Finite(h), modes)
    }

    /// Relative discrepancy between the two finite-depth outgoing wavenumbers.
    pub fn ell0_discrepancy(&self) -> Option<f64> {
        match (self.ell0, self.ell0_alt) {
            (Some(a), Some(b)) => Some((a - b).abs() / a),
            _ => None,
        }
    }
}

pub fn make_wave_parameters(omega: f64, k: f64, g: f64, depth: Depth) -> Result<WaveParameters> {
    make_wave_parameters_with_modes(omega, k, g, depth, DEFAULT_EVANESCENT_MODES)
}

pub fn make_wave_parameters_with_modes(
    omega: f64,
    k: f64,
    g: f64,
    depth: Depth,
    modes: usize,
) -> Result<WaveParameters> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidWave(format!("omega = {omega} must be positive")));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidWater(format!("gravity = {g} must be positive")));
    }
    let nu = omega * omega / g;
    if !(k >= 0.0) {
        return Err(Error::InvalidWave(format!("k = {k} must be non-negative")));
    }
    if k >= nu {
        return Err(Error::ObliqueAngleTooLarge { k, nu });
    }
    let ell = ((nu - k) * (nu + k)).sqrt();
    let mut p = WaveParameters {
        omega,
        k,
        g,
        nu,
        ell,
        depth,
        kappa0: None,
        evanescent_roots: Vec::new(),
        ell0: None,
        ell0_alt: None,
    };
    if let Depth::Finite(h) = depth {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidWater(format!("depth {h} must be positive")));
        }
        let kappa0 = propagating_root(nu, h);
        if kappa0 <= k {
            return Err(Error::CutOff { kappa0, k });
        }
        p.kappa0 = Some(kappa0);
        p.ell0 = Some(((kappa0 - k) * (kappa0 + k)).sqrt());
        p.ell0_alt = Some(propagating_root(ell, h));
        p.evanescent_roots = (1..=modes).map(|n| evanescent_root(nu, h, n)).collect();
    }
    Ok(p)
}

/// Positive root of `kappa tanh(kappa h) = nu`.
pub fn propagating_root(nu: f64, h: f64) -> f64 {
    let f = |x: f64| x * (x * h).tanh() - nu;
    let df = |x: f64| (x * h).tanh() + x * h / (x * h).cosh().powi(2);
    let (lo, hi) = (nu, nu / (nu * h).tanh());
    polish(bisect(f, lo, hi, h), f, df, lo, hi)
}

/// `n`-th root of `kappa tan(kappa h) = -nu`, located in
/// `((n - 1/2) pi / h, n pi / h)`.
pub fn evanescent_root(nu: f64, h: f64, n: usize) -> f64 {
    let f = |x: f64| x * (x * h).sin() + nu * (x * h).cos();
    let df = |x: f64| (x * h).sin() * (1.0 - nu * h) + x * h * (x * h).cos();
    let (lo, hi) = ((n as f64 - 0.5) * PI / h, n as f64 * PI / h);
    polish(bisect(f, lo, hi, h), f, df, lo, hi)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, h: f64) -> f64 {
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-14 * h.min(1.0 / hi) * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polish(mut x: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..2 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f(x) / d;
        if next.is_finite() && next >= lo && next <= hi && f(next).abs() <= f(x).abs() {
            x = next;
        }
    }
    x
}

/// A vertical eigenfunction on `(-h, 0)` with unit L2 norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerticalMode {
    /// `cosh(kappa (y + h))` carried by `exp(i ell0 |x|)`.
    Propagating { kappa: f64, h: f64, inv_norm: f64, ell0: f64 },
    /// `cos(kappa (y + h))` decaying as `exp(-decay |x|)`.
    Evanescent { kappa: f64, h: f64, inv_norm: f64, decay: f64 },
}

impl VerticalMode {
    pub fn value(&self, y: f64) -> f64 {
        match *self {
            VerticalMode::Propagating { kappa, h, inv_norm, .. } => {
                inv_norm * scaled_cosh(kappa, y, h)
            }
            VerticalMode::Evanescent { kappa, h, inv_norm, .. } => inv_norm * (kappa * (y + h)).cos(),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match *self {
            VerticalMode::Propagating { kappa, h, inv_norm, .. } => {
                inv_norm * kappa * scaled_sinh(kappa, y, h)
            }
            VerticalMode::Evanescent { kappa, h, inv_norm, .. } => {
                -inv_norm * kappa * (kappa * (y + h)).sin()
            }
        }
    }

    /// `lambda` with `d/dx` of the x-factor equal to `lambda` times itself for
    /// `x > 0`.
    pub fn dtn_eigenvalue(&self) -> num_complex::Complex64 {
        match *self {
            VerticalMode::Propagating { ell0, .. } => num_complex::Complex64::new(0.0, ell0),
            VerticalMode::Evanescent { decay, .. } => num_complex::Complex64::new(-decay, 0.0),
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            VerticalMode::Propagating { kappa, .. } | VerticalMode::Evanescent { kappa, .. } => kappa,
        }
    }
}

/// `cosh(kappa (y + h)) / cosh(kappa h)` without overflow.
pub fn scaled_cosh(kappa: f64, y: f64, h: f64) -> f64 {
    ((kappa * y).exp() + (-kappa * (y + 2.0 * h)).exp()) / (1.0 + (-2.0 * kappa * h).exp())
}

/// `sinh(kappa (y + h)) / cosh(kappa h)` without overflow.
pub fn scaled_sinh(kappa: f64, y: f64, h: f64) -> f64 {
    ((kappa * y).exp() - (-kappa * (y + 2.0 * h)).exp()) / (1.0 + (-2.0 * kappa * h).exp())
}

/// Mode 0 followed by `M` evanescent modes (as many as `params` carries).
pub fn vertical_modes(params: &WaveParameters, m: usize) -> Result<Vec<VerticalMode>> {
    let h = params
        .depth_value()
        .ok_or_else(|| Error::InvalidWater("vertical modes need finite depth".into()))?;
    let kappa0 = params.kappa0.expect("finite depth carries kappa0");
    let ell0 = params.ell0.ok_or(Error::CutOff { kappa0, k: params.k })?;
    let sech = 1.0 / (kappa0 * h).cosh();
    let norm2 = 0.5 * h * sech * sech + (kappa0 * h).tanh() / (2.0 * kappa0);
    let mut out = vec![VerticalMode::Propagating {
        kappa: kappa0,
        h,
        inv_norm: 1.0 / norm2.sqrt(),
        ell0,
    }];
    let roots: Vec<f64> = if m <= params.evanescent_roots.len() {
        params.evanescent_roots[..m].to_vec()
    } else {
        (1..=m).map(|n| evanescent_root(params.nu, h, n)).collect()
    };
    for kappa in roots {
        let norm2 = 0.5 * h + (2.0 * kappa * h).sin() / (4.0 * kappa);
        out.push(VerticalMode::Evanescent {
            kappa,
            h,
            inv_norm: 1.0 / norm2.sqrt(),
            decay: kappa.hypot(params.k),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandClass {
    pub ell_b: f64,
    pub omega_minus: bool,
    pub omega_plus: bool,
    pub m: u64,
}

/// Places `ell b` (with `ell0` in finite depth) in the half-period bands.
pub fn band_classifier(params: &WaveParameters, b: f64) -> BandClass {
    classify_ell_b(params.outgoing_ell() * b)
}

pub fn classify_ell_b(ell_b: f64) -> BandClass {
    let m0 = (ell_b / PI).floor().max(0.0) as u64;
    let (mut minus, mut plus) = (false, false);
    for m in m0.saturating_sub(1)..=m0 + 1 {
        let (lo, mid, hi) = band_edges(m);
        minus |= lo <= ell_b && ell_b <= mid;
        plus |= mid <= ell_b && ell_b <= hi;
    }
    BandClass {
        ell_b,
        omega_minus: minus,
        omega_plus: plus,
        m: m0,
    }
}

/// `(pi m, pi (2m + 1) / 2, pi (m + 1))`.
pub fn band_edges(m: u64) -> (f64, f64, f64) {
    let m = m as f64;
    (PI * m, PI * (2.0 * m + 1.0) / 2.0, PI * (m + 1.0))
}

/// Frequency at which the outgoing x-wavenumber equals `ell`.
pub fn omega_for_ell(ell: f64, k: f64, g: f64, depth: Depth) -> f64 {
    let kappa = ell.hypot(k);
    let nu = match depth {
        Depth::Infinite => kappa,
        Depth::Finite(h) => kappa * (kappa * h).tanh(),
    };
    (g * nu).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle_bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let slo = f(lo).signum();
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn three_four_five() {
        let p = make_wave_parameters(9.81f64.sqrt(), 0.6, 9.81, Depth::Infinite).unwrap();
        assert!((p.nu - 1.0).abs() < 1e-15);
        assert!((p.ell - 0.8).abs() < 1e-14);
        let p0 = make_wave_parameters(2.0, 0.0, 9.81, Depth::Infinite).unwrap();
        assert_eq!(p0.ell, p0.nu);
    }

    #[test]
    fn unit_depth_root() {
        let oracle = oracle_bisect(|x| x * x.tanh() - 1.0, 1.0, 2.0);
        let p = make_wave_parameters(9.81f64.sqrt(), 0.0, 9.81, Depth::Finite(1.0)).unwrap();
        let k0 = p.kappa0.unwrap();
        assert!((k0 - oracle).abs() < 1e-9);
        assert!((k0 - 1.199678640).abs() < 1e-9);
        assert!((p.ell0.unwrap() - k0).abs() < 1e-15);
        assert!((p.ell0_alt.unwrap() - k0).abs() < 1e-12);
    }

    #[test]
    fn evanescent_roots_in_intervals() {
        let p = make_wave_parameters_with_modes(9.81f64.sqrt(), 0.0, 9.81, Depth::Finite(1.0), 2)
            .unwrap();
        let g = |x: f64| x * x.tan() + 1.0;
        for (n, &r) in p.evanescent_roots.iter().enumerate() {
            let (lo, hi) = ((n as f64 + 0.5) * PI, (n as f64 + 1.0) * PI);
            assert!(r > lo && r < hi);
            let o = oracle_bisect(g, lo + 1e-9, hi - 1e-9);
            assert!((r - o).abs() < 1e-9, "{r} {o}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            make_wave_parameters(1.0, 1.0, 1.0, Depth::Infinite),
            Err(Error::ObliqueAngleTooLarge { .. })
        ));
        assert!(make_wave_parameters(0.0, 0.0, 1.0, Depth::Infinite).is_err());
        assert!(make_wave_parameters(1.0, 0.0, -1.0, Depth::Infinite).is_err());
    }

    #[test]
    fn modes_gram_and_boundary_conditions() {
        for (omega, k, h) in [(1.0, 0.03, 1.0), (3.0, 0.5, 2.0), (2.0, 0.1, 40.0)] {
            let p = make_wave_parameters(omega, k, 1.0, Depth::Finite(h)).unwrap();
            let modes = vertical_modes(&p, 6).unwrap();
            let n = 10_000;
            let dy = h / n as f64;
            for i in 0..modes.len() {
                for j in 0..modes.len() {
                    let mut s = 0.0;
                    for q in 0..=n {
                        let y = -h + q as f64 * dy;
                        let w = if q == 0 || q == n { 0.5 } else { 1.0 };
                        s += w * modes[i].value(y) * modes[j].value(y);
                    }
                    let df = |y: f64| {
                        modes[i].derivative(y) * modes[j].value(y)
                            + modes[i].value(y) * modes[j].derivative(y)
                    };
                    let s = s * dy - dy * dy / 12.0 * (df(0.0) - df(-h));
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-8, "{i} {j} {s}");
                }
            }
            for m in &modes {
                let scale = m.value(0.0).abs().max(1.0) * p.nu.max(1.0);
                assert!((m.derivative(0.0) - p.nu * m.value(0.0)).abs() < 1e-10 * scale);
                assert!(m.derivative(-h).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn deep_limit() {
        let nu = 2.0;
        let p = make_wave_parameters((nu * 9.81f64).sqrt(), 0.5, 9.81, Depth::Finite(10.0)).unwrap();
        assert!((p.kappa0.unwrap() - nu).abs() < 1e-8 * nu);
        assert!((p.ell0.unwrap() - p.ell).abs() < 1e-7);
    }

    #[test]
    fn band_examples() {
        let c = classify_ell_b(PI / 4.0);
        assert!(c.omega_minus && !c.omega_plus && c.m == 0);
        let c = classify_ell_b(3.0 * PI / 4.0);
        assert!(!c.omega_minus && c.omega_plus && c.m == 0);
        let c = classify_ell_b(PI / 2.0);
        assert!(c.omega_minus && c.omega_plus);
        let c = classify_ell_b(0.0);
        assert!(c.omega_minus && !c.omega_plus);
        let c = classify_ell_b(PI);
        assert!(c.omega_minus && c.omega_plus && c.m == 1);
    }

    #[test]
    fn omega_for_ell_inverts() {
        for depth in [Depth::Infinite, Depth::Finite(1.5)] {
            let w = omega_for_ell(1.3, 0.4, 9.81, depth);
            let p = make_wave_parameters(w, 0.4, 9.81, depth).unwrap();
            assert!((p.outgoing_ell() - 1.3).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn dispersion_residual(nu in 0.1f64..10.0, h in 0.1f64..10.0) {
            let k0 = propagating_root(nu, h);
            prop_assert!((k0 * (k0 * h).tanh() - nu).abs() <= 1e-12 * nu);
        }

        #[test]
        fn evanescent_residual(nu in 0.1f64..10.0, h in 0.1f64..10.0, n in 1usize..20) {
            let r = evanescent_root(nu, h, n);
            prop_assert!(r > (n as f64 - 0.5) * PI / h && r < n as f64 * PI / h);
            let res = r * (r * h).sin() + nu * (r * h).cos();
            prop_assert!(res.abs() <= 1e-11 * (r + nu));
        }

        #[test]
        fn kappa0_increasing(nu in 0.1f64..10.0, dnu in 1e-6f64..1.0, h in 0.1f64..10.0) {
            prop_assert!(propagating_root(nu + dnu, h) > propagating_root(nu, h));
        }

        #[test]
        fn band_complementarity(x in 0.0f64..100.0) {
            let c = classify_ell_b(x);
            prop_assert!(c.omega_minus || c.omega_plus);
            if c.omega_minus && c.omega_plus {
                let r = x / (PI / 2.0);
                prop_assert!((r - r.round()).abs() < 1e-12);
            }
        }
    }
}
