use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use floatwave::audits::{audit_solution, Statement};
use floatwave::coupled::{
    omega_grid, radiation_from, radiation_set, solve_scattering, trapped_mode_scan, Motion, Restriction, ScanConfig,
};
use floatwave::dispersion::{classify_ell_b, make_wave_parameters, omega_for_ell, propagating_root};
use floatwave::field_solver::{assemble, DofMap, DtnSides, Parity, SolverOptions};
use floatwave::geometry::{split_at_waterline, BodySection, Decomposition, Depth, WaterConfig};
use floatwave::hydrostatics::{compute_matrices, lambda0, HydrostaticModel};
use floatwave::mesh::{generate_mesh, EdgeTag, Mesh, MeshConfig};
use floatwave::polygon::Point;
use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G: f64 = 9.81;

type Check = Result<String, String>;

struct Body {
    section: BodySection,
    dec: Decomposition,
    model: HydrostaticModel,
}

fn body(pts: &[(f64, f64)], rho: f64) -> Body {
    let section = BodySection::uniform(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), rho).unwrap();
    let dec = split_at_waterline(&section).unwrap();
    let model = compute_matrices(&section, &dec);
    Body { section, dec, model }
}

fn rectangle() -> Body {
    body(&[(-1.0, -0.5), (1.0, -0.5), (1.0, 0.5), (-1.0, 0.5)], 0.5)
}

fn catamaran() -> Body {
    body(
        &[(-2.0, -1.0), (-1.0, -1.0), (-1.0, 0.5), (1.0, 0.5), (1.0, -1.0), (2.0, -1.0), (2.0, 1.0), (-2.0, 1.0)],
        0.4,
    )
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hydrostatics() -> Check {
    let b = rectangle();
    let i = &b.model.integrals;
    let got = [i.i_m, i.i_m2, i.i_d, i.i_dxx, i.i_by];
    let want = [1.0, 5.0 / 12.0, 2.0, 2.0 / 3.0, -0.25];
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let l0 = lambda0(&b.model, G).map_err(|e| e.to_string())?;
    let lerr = (l0 / (2.0 * G) - 1.0).abs();
    ensure(err <= 1e-12 && lerr <= 1e-12, format!("integrals max err {err:.1e}, lambda0 rel err {lerr:.1e}"))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s = f(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dispersion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let nu = 10f64.powf(rng.random_range(-2.0..1.5));
        let h = 10f64.powf(rng.random_range(-1.5..1.5));
        let k0 = propagating_root(nu, h);
        worst = worst.max((k0 * (k0 * h).tanh() - nu).abs() / nu);
    }
    let root = propagating_root(1.0, 1.0);
    let oracle = bisect(|x| x * x.tanh() - 1.0, 0.5, 2.0);
    let err = (root - oracle).abs().max((root - 1.199678640).abs());
    ensure(worst <= 1e-12 && err <= 1e-9, format!("max rel residual {worst:.1e}, root {root:.12}"))
}

fn strip(h_mesh: f64, depth: f64, x_t: f64) -> Mesh {
    let mut cfg = MeshConfig::new(h_mesh, depth);
    cfg.x_t = Some(x_t);
    generate_mesh(&Decomposition::empty(), &cfg).unwrap()
}

fn manufactured() -> Check {
    let (nu, k, ell) = (1.0, 0.6, 0.8);
    let params = make_wave_parameters((G * nu).sqrt(), k, G, Depth::Finite(1.0)).map_err(|e| e.to_string())?;
    let exact = |p: Point| (nu * p.y).exp() * (ell * p.x).cos();
    let mut errors = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let mesh = strip(h, 1.0, 2.0);
        let opts = SolverOptions {
            dtn: DtnSides::NONE,
            ..SolverOptions::default()
        };
        let pr = assemble(&mesh, &params, DofMap::full(mesh.nodes.len()), opts).map_err(|e| e.to_string())?;
        let load = pr.neumann_load(&[EdgeTag::Bottom, EdgeTag::TruncLeft, EdgeTag::TruncRight], &|_, p, n| {
            let e = (nu * p.y).exp();
            C64::new(n.0 * (-ell * e * (ell * p.x).sin()) + n.1 * nu * e * (ell * p.x).cos(), 0.0)
        });
        let sol = pr.factor().unwrap().solve(&load, None).map_err(|e| e.to_string())?;
        let mut s = 0.0;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for j in 0..3 {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                let v = 0.5 * (sol.phi[a] + sol.phi[b]);
                s += mesh.area(t) / 3.0 * (v - exact(mesh.nodes[a].lerp(mesh.nodes[b], 0.5))).norm_sqr();
            }
        }
        errors.push(s.sqrt());
    }
    let rates: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(
        rates.iter().all(|&r| r >= 1.8),
        format!("errors {:.2e} {:.2e} {:.2e}, orders {:.2} {:.2}", errors[0], errors[1], errors[2], rates[0], rates[1]),
    )
}

fn energy_flux() -> Check {
    let b = rectangle();
    let params = make_wave_parameters(G.sqrt(), 0.5, G, Depth::Finite(1.0)).map_err(|e| e.to_string())?;
    let mut r = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let mesh = generate_mesh(&b.dec, &MeshConfig::new(h, 1.0)).map_err(|e| e.to_string())?;
        let pr = assemble(&mesh, &params, DofMap::full(mesh.nodes.len()), SolverOptions::default())
            .map_err(|e| e.to_string())?;
        let rad = radiation_from(&pr.factor().unwrap(), &b.dec, &[1]).map_err(|e| e.to_string())?;
        r.push(audit_solution(&pr, rad.phi[1].as_ref().unwrap(), &b.dec, None).energy_flux.relative);
    }
    ensure(
        r[2] <= 0.02 && r[2] < r[1] && r[1] < r[0],
        format!("residuals {:.2e} {:.2e} {:.2e}", r[0], r[1], r[2]),
    )
}

fn equipartition() -> Check {
    let b = rectangle();
    let params = make_wave_parameters(3.0, 0.5, G, Depth::Finite(1.0)).map_err(|e| e.to_string())?;
    let mesh = generate_mesh(&b.dec, &MeshConfig::new(0.05, 1.0)).map_err(|e| e.to_string())?;
    let pr = assemble(&mesh, &params, DofMap::full(mesh.nodes.len()), SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let s = solve_scattering(&mesh, &params, &b.dec, Some(&b.model), C64::new(1.0, 0.0), SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let coupled = audit_solution(&pr, &s.solution.phi, &b.dec, Some((&s.solution.z, &b.model)));
    let fixed = audit_solution(&pr, &s.diffraction, &b.dec, None);
    let (c, f) = (coupled.equipartition.relative, fixed.equipartition.relative);
    ensure(c <= 0.02 && f <= 0.02, format!("coupled {c:.2e}, fixed body {f:.2e}"))
}

fn frobenius(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn reciprocity() -> Check {
    let (mut asym, mut neg) = (0.0f64, 0.0f64);
    for (b, depth) in [(rectangle(), 1.0), (catamaran(), 3.0)] {
        for omega in [2.0, 3.0, 4.5] {
            let params = make_wave_parameters(omega, 0.4, G, Depth::Finite(depth)).map_err(|e| e.to_string())?;
            let mesh = generate_mesh(&b.dec, &MeshConfig::new(0.1, depth)).map_err(|e| e.to_string())?;
            let rad = radiation_set(&mesh, &params, &b.dec, Restriction::FREE, SolverOptions::default())
                .map_err(|e| e.to_string())?;
            let (a, bm) = (rad.added_mass, rad.damping);
            let mut d = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = a[i][j] - a[j][i];
                }
            }
            asym = asym.max(frobenius(&d) / frobenius(&a));
            let sym = Matrix3::from_fn(|i, j| 0.5 * (bm[i][j] + bm[j][i]));
            let lmin = SymmetricEigen::new(sym).eigenvalues.min();
            neg = neg.max(-lmin / frobenius(&bm));
        }
    }
    ensure(asym <= 1e-8 && neg <= 1e-8, format!("max asymmetry {asym:.1e}, max -lambda_min/||B|| {neg:.1e}"))
}

fn bodies_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../bodies"))
}

fn corollary_scan() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lo = (2.0 * G).sqrt();
    let hi = (4.0 * G).sqrt();
    let out = Command::new(env!("CARGO_BIN_EXE_floatwave"))
        .args(["scan", "--body"])
        .arg(bodies_dir().join("rectangle.json"))
        .args(["--omega-min", &lo.to_string(), "--omega-max", &hi.to_string(), "--n-omega", "200"])
        .args(["--k", "0.2", "--hmesh", "0.1", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code();
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).map_err(|e| e.to_string())?;
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (fc, cc, ec) = (col("flagged"), col("certificate"), col("error"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let flags = rows.iter().filter(|r| r[fc] == "true").count();
    let certified = rows.iter().filter(|r| r[cc] == "corollary1").count();
    let errors = rows.iter().filter(|r| !r[ec].is_empty()).count();
    ensure(
        code == Some(0) && rows.len() == 200 && flags == 0 && certified == 200 && errors == 0,
        format!("exit {code:?}, {} rows, {certified} certified, {flags} flags, {errors} errors", rows.len()),
    )
}

fn two_part_sweeps() -> Check {
    let cat = catamaran();
    let water = WaterConfig {
        depth: Depth::Finite(3.0),
        gravity: G,
    };
    let b = cat.dec.half_spacing().ok_or("catamaran has no half spacing")?;
    let k = 0.3;
    let facts = floatwave::audits::BodyFacts::new(&cat.section, &cat.dec, &cat.model, G);
    let combos = [
        (Motion::Sway, Parity::Odd, false, None),
        (Motion::Sway, Parity::Even, true, None),
        (Motion::Heave, Parity::Odd, false, None),
        (Motion::Heave, Parity::Even, true, Some(facts.heave_bound)),
        (Motion::Roll, Parity::Even, true, None),
        (Motion::Roll, Parity::Odd, false, Some(facts.roll_bound)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (motion, parity, plus, bound) in combos {
        let (l_lo, l_hi) = if plus { (FRAC_PI_2, PI) } else { (0.02, FRAC_PI_2) };
        let mut lo = omega_for_ell(l_lo / b, k, G, water.depth).max((G * k).sqrt() * (1.0 + 1e-9));
        let hi = omega_for_ell(l_hi / b, k, G, water.depth);
        if let Some(w2) = bound {
            lo = lo.max(w2.sqrt());
        }
        if lo >= hi {
            parts.push(format!("{}-{} empty band", motion.as_str(), parity.as_str()));
            ok = false;
            continue;
        }
        let cfg = ScanConfig::new(k, Restriction::new(motion, parity), 0.1);
        let rep = trapped_mode_scan(&cat.section, &cat.dec, &cat.model, &water, &omega_grid(lo, hi, 50), &cfg)
            .map_err(|e| e.to_string())?;
        let certified: Vec<_> = rep.rows.iter().filter(|r| r.certificate != Statement::None).collect();
        let flags = certified.iter().filter(|r| r.flagged).count();
        let errors = certified.iter().filter(|r| r.error.is_some()).count();
        let name = certified.first().map_or("none", |r| r.certificate.as_str());
        ok &= certified.len() >= 40 && flags == 0 && errors == 0;
        parts.push(format!("{}-{} {name} {}/50 certified {flags} flags", motion.as_str(), parity.as_str(), certified.len()));
    }
    ensure(ok, parts.join("; "))
}

fn band_oracle(ell_b: f64) -> (bool, bool) {
    let (mut minus, mut plus) = (false, false);
    for m in 0..2000 {
        let m = m as f64;
        minus |= PI * m <= ell_b && ell_b <= PI * (2.0 * m + 1.0) / 2.0;
        plus |= PI * (2.0 * m + 1.0) / 2.0 <= ell_b && ell_b <= PI * (m + 1.0);
    }
    (minus, plus)
}

fn band_classifier() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut values: Vec<f64> = (0..40).map(|m| m as f64 * FRAC_PI_2).collect();
    values.extend((0..40).map(|m| PI * m as f64));
    values.extend((0..40).map(|m| PI * (2.0 * m as f64 + 1.0) / 2.0));
    while values.len() < 1000 {
        values.push(rng.random_range(0.0..60.0));
    }
    let (mut mismatches, mut complement) = (0, 0);
    for &v in &values {
        let c = classify_ell_b(v);
        if (c.omega_minus, c.omega_plus) != band_oracle(v) {
            mismatches += 1;
        }
        if !(c.omega_minus || c.omega_plus) {
            complement += 1;
        }
    }
    ensure(
        mismatches == 0 && complement == 0,
        format!("{} values, {mismatches} mismatches, {complement} uncovered", values.len()),
    )
}

fn parity_enforcement() -> Check {
    let cat = catamaran();
    let params = make_wave_parameters(3.5, 0.3, G, Depth::Finite(3.0)).map_err(|e| e.to_string())?;
    let mesh = generate_mesh(&cat.dec, &MeshConfig::new(0.1, 3.0)).map_err(|e| e.to_string())?;
    let mirror = mesh.mirror.clone().ok_or("mesh is not mirror symmetric")?;
    let rad = radiation_set(&mesh, &params, &cat.dec, Restriction::FREE, SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let defect = |j: usize, sign: f64| {
        let phi = &rad.phi[j].as_ref().unwrap().phi;
        let scale = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (0..phi.len()).map(|i| (phi[i] - sign * phi[mirror[i]]).norm()).fold(0.0, f64::max) / scale
    };
    let (sway, heave) = (defect(0, -1.0), defect(1, 1.0));
    ensure(sway <= 1e-10 && heave <= 1e-10, format!("sway odd defect {sway:.1e}, heave even defect {heave:.1e}"))
}

fn scattering() -> Check {
    let params = make_wave_parameters(3.0, 0.5, G, Depth::Finite(1.0)).map_err(|e| e.to_string())?;
    let mesh = generate_mesh(&Decomposition::empty(), &MeshConfig::new(0.1, 1.0)).map_err(|e| e.to_string())?;
    let s = solve_scattering(&mesh, &params, &Decomposition::empty(), None, C64::new(1.0, 0.0), SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let (r0, t0) = (s.reflection.norm(), (s.transmission.norm() - 1.0).abs());
    let b = rectangle();
    let omega = (3.0 * G).sqrt();
    let params = make_wave_parameters(omega, 0.2, G, Depth::Finite(2.0)).map_err(|e| e.to_string())?;
    let mesh = generate_mesh(&b.dec, &MeshConfig::new(0.05, 2.0)).map_err(|e| e.to_string())?;
    let s = solve_scattering(&mesh, &params, &b.dec, Some(&b.model), C64::new(1.0, 0.0), SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let e = s.reflection.norm_sqr() + s.transmission.norm_sqr();
    ensure(
        r0 <= 1e-8 && t0 <= 1e-8 && (e - 1.0).abs() <= 0.01,
        format!("empty |R| {r0:.1e}, ||T|-1| {t0:.1e}; rectangle |R|^2+|T|^2 = {e:.6}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 11] = [
        ("hydrostatics oracle", Duration::from_secs(1), hydrostatics),
        ("dispersion roots", Duration::from_secs(1), dispersion),
        ("manufactured solution order", Duration::from_secs(60), manufactured),
        ("energy flux identity", Duration::from_secs(60), energy_flux),
        ("equipartition", Duration::from_secs(60), equipartition),
        ("added mass and damping symmetry", Duration::from_secs(600), reciprocity),
        ("single-part scan", Duration::from_secs(600), corollary_scan),
        ("two-part band sweeps", Duration::from_secs(1800), two_part_sweeps),
        ("band classifier", Duration::from_secs(60), band_classifier),
        ("parity enforcement", Duration::from_secs(600), parity_enforcement),
        ("scattering sanity", Duration::from_secs(600), scattering),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(d) => (took <= *limit, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {name}: {detail} ({:.2}s, limit {}s)", i + 1, took.as_secs_f64(), limit.as_secs());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
