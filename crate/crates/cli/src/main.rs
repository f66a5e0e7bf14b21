use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use floatwave::audits::{audit_solution, certify, AuditReport, BodyFacts, UniquenessCertificate};
use floatwave::coupled::{
    coupled_matrix, omega_grid, radiation_from, solve_scattering, trapped_mode_scan, Motion, Restriction, ScanConfig,
    ScanRow,
};
use floatwave::dispersion::{band_classifier, make_wave_parameters_with_modes, WaveParameters, DEFAULT_EVANESCENT_MODES};
use floatwave::field_solver::{assemble, DofMap, Parity, SolverOptions};
use floatwave::geometry::{
    check_john_condition, check_symmetry, split_at_waterline, BodyDocument, BodySection, Decomposition, Depth,
    WaterConfig,
};
use floatwave::hydrostatics::{
    check_equilibrium, compute_matrices, generalized_eigenvalues, lambda0, EquilibriumTolerances, HydrostaticModel,
};
use floatwave::mesh::{deep_truncation_abscissa, deep_truncation_depth, generate_mesh, Mesh, MeshConfig};
use floatwave::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const WORKERS_ENV: &str = "FLOATWAVE_WORKERS";

#[derive(Parser)]
#[command(name = "floatwave", version, about = "Oblique waves and freely floating cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Waterline split, John condition, symmetry and equilibrium.
    CheckGeometry(RunArgs),
    /// Hydrostatic integrals, E, K and lambda0.
    Hydrostatics(RunArgs),
    /// Band classification of `ell b` over the frequency grid.
    Bands(RunArgs),
    /// Added mass, damping and the coupled matrix over the frequency grid.
    Solve(RunArgs),
    /// Trapped-mode sweep with uniqueness certificates.
    Scan(RunArgs),
    /// Reflection and transmission of an oblique incident wave.
    Scatter(RunArgs),
    /// Energy identities and certificates per frequency.
    Audit(RunArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunArgs {
    /// JSON body document.
    #[arg(long)]
    #[serde(skip)]
    body: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    omega_min: f64,
    /// Defaults to `omega-min`.
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    n_omega: usize,
    /// Axial wavenumber.
    #[arg(long, default_value_t = 0.0)]
    k: f64,
    /// Water depth override: a number or `inf`.
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    gravity: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    hmesh: f64,
    /// Truncation abscissa.
    #[arg(long)]
    xt: Option<f64>,
    /// Edge-length reduction near waterline corners.
    #[arg(long, default_value_t = 4.0)]
    refinement: f64,
    /// Evanescent modes of the continuous vertical basis.
    #[arg(long, default_value_t = DEFAULT_EVANESCENT_MODES)]
    modes: usize,
    /// full, sway, heave or roll.
    #[arg(long, default_value = "full")]
    restriction: String,
    /// any, odd or even.
    #[arg(long, default_value = "any")]
    parity: String,
    /// Incident free-surface amplitude for `scatter`.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = floatwave::coupled::SIGMA_THRESHOLD)]
    sigma_threshold: f64,
    #[arg(long, default_value_t = floatwave::coupled::RADIATION_THRESHOLD)]
    radiation_threshold: f64,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    out: PathBuf,
    /// Overwrite existing output files and solve bodies out of equilibrium.
    #[arg(long)]
    force: bool,
}

enum Failure {
    Config(String),
    Solver(String),
    Contradiction(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Contradiction(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Contradiction(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidBody(_)
            | Error::NotSurfacePiercing(_)
            | Error::DegenerateImmersedPart(_)
            | Error::InvalidWater(_)
            | Error::ObliqueAngleTooLarge { .. }
            | Error::InvalidWave(_)
            | Error::CutOff { .. }
            | Error::Unstable(_)
            | Error::ParityUnavailable => Failure::Config(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

/// Everything a run depends on, hashed into the output headers.
#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a str,
    args: &'a RunArgs,
    body_sha256: String,
}

struct Setup {
    args: RunArgs,
    body: BodySection,
    water: WaterConfig,
    dec: Decomposition,
    model: HydrostaticModel,
    restriction: Restriction,
    omegas: Vec<f64>,
    header: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn parse_depth(s: &str) -> Outcome<Depth> {
    if s == "inf" || s == "infinite" {
        return Ok(Depth::Infinite);
    }
    match s.parse::<f64>() {
        Ok(h) if h > 0.0 && h.is_finite() => Ok(Depth::Finite(h)),
        _ => Err(Failure::Config(format!("--depth must be a positive number or inf, got {s}"))),
    }
}

fn validate(a: &RunArgs) -> Outcome<()> {
    let bad = |m: &str| Err(Failure::Config(m.to_string()));
    if !(a.omega_min > 0.0 && a.omega_min.is_finite()) {
        return bad("--omega-min must be positive");
    }
    if a.omega_max.is_some_and(|w| !(w >= a.omega_min && w.is_finite())) {
        return bad("--omega-max must not be below --omega-min");
    }
    if a.n_omega == 0 {
        return bad("--n-omega must be at least 1");
    }
    if !(a.k >= 0.0 && a.k.is_finite()) {
        return bad("--k must be non-negative");
    }
    if !(a.hmesh > 0.0 && a.hmesh.is_finite()) {
        return bad("--hmesh must be positive");
    }
    if a.xt.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
        return bad("--xt must be positive");
    }
    if !(a.refinement >= 1.0) {
        return bad("--refinement must be at least 1");
    }
    if a.gravity.is_some_and(|g| !(g > 0.0 && g.is_finite())) {
        return bad("--gravity must be positive");
    }
    if !(a.sigma_threshold > 0.0 && a.radiation_threshold > 0.0) {
        return bad("thresholds must be positive");
    }
    Ok(())
}

fn setup(command: &str, args: RunArgs) -> Outcome<Setup> {
    validate(&args)?;
    let motion = Motion::parse(&args.restriction)
        .ok_or_else(|| Failure::Config(format!("unknown restriction {}", args.restriction)))?;
    let parity =
        Parity::parse(&args.parity).ok_or_else(|| Failure::Config(format!("unknown parity {}", args.parity)))?;
    let text = fs::read_to_string(&args.body)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.body.display())))?;
    let doc = BodyDocument::from_json(&text).map_err(|e| {
        Failure::Config(format!(
            "{}: line {}, column {}: {e}",
            args.body.display(),
            e.line(),
            e.column()
        ))
    })?;
    let (body, mut water) = doc.build()?;
    if let Some(d) = &args.depth {
        water.depth = parse_depth(d)?;
    }
    if let Some(g) = args.gravity {
        water.gravity = g;
    }
    let dec = split_at_waterline(&body)?;
    water.validate(&dec)?;
    let model = compute_matrices(&body, &dec);
    let config = RunConfig {
        command,
        args: &args,
        body_sha256: hex(&Sha256::digest(text.as_bytes())),
    };
    let json = serde_json::to_string(&config).expect("config serializes");
    let header = format!(
        "# floatwave {VERSION}\n# command {command}\n# config-sha256 {}\n",
        hex(&Sha256::digest(json.as_bytes()))
    );
    let omegas = omega_grid(args.omega_min, args.omega_max.unwrap_or(args.omega_min), args.n_omega);
    Ok(Setup {
        restriction: Restriction::new(motion, parity),
        args,
        body,
        water,
        dec,
        model,
        omegas,
        header,
    })
}

/// Round-trip formatting with 17 significant digits.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_output(s: &Setup, name: &str, body: &str) -> Outcome<PathBuf> {
    let dir = &s.args.out;
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    if path.exists() && !s.args.force {
        return Err(Failure::Config(format!("{} exists; pass --force to overwrite", path.display())));
    }
    fs::write(&path, format!("{}{body}", s.header))
        .map_err(|e| Failure::Solver(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// JSON files carry the same header, as `#` lines ahead of the document.
fn write_json<T: Serialize>(s: &Setup, name: &str, value: &T) -> Outcome<PathBuf> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_output(s, name, &(text + "\n"))
}

fn params_at(s: &Setup, omega: f64) -> floatwave::Result<WaveParameters> {
    make_wave_parameters_with_modes(omega, s.args.k, s.water.gravity, s.water.depth, s.args.modes)
}

fn mesh_for(s: &Setup, params: &WaveParameters) -> floatwave::Result<Mesh> {
    let mut cfg = match s.water.depth {
        Depth::Finite(h) => MeshConfig::new(s.args.hmesh, h),
        Depth::Infinite => {
            let h_eff = deep_truncation_depth(params.nu, s.dec.draft());
            let mut c = MeshConfig::new(s.args.hmesh, h_eff);
            c.x_t = Some(deep_truncation_abscissa(&s.dec, h_eff));
            c
        }
    };
    if s.args.xt.is_some() {
        cfg.x_t = s.args.xt;
    }
    cfg.refinement = s.args.refinement;
    generate_mesh(&s.dec, &cfg)
}

/// Wave solves assume a body in equilibrium; `--force` overrides.
fn require_equilibrium(s: &Setup) -> Outcome<()> {
    let report = check_equilibrium(&s.model, &s.body, EquilibriumTolerances::default());
    if report.passes() || s.args.force {
        Ok(())
    } else {
        Err(Failure::Config("body fails the equilibrium conditions; pass --force to solve anyway".into()))
    }
}

fn solver_options(s: &Setup) -> SolverOptions {
    SolverOptions {
        modes: s.args.modes,
        ..SolverOptions::default()
    }
}

fn check_geometry(s: &Setup) -> Outcome<String> {
    #[derive(Serialize)]
    struct Report<'a> {
        parts: usize,
        waterplanes: Vec<(f64, f64)>,
        john: floatwave::geometry::JohnReport,
        symmetric: bool,
        center_of_mass: floatwave::polygon::Point,
        draft: f64,
        half_spacing: Option<f64>,
        equilibrium: floatwave::hydrostatics::EquilibriumReport,
        water: &'a WaterConfig,
    }
    let report = Report {
        parts: s.dec.parts.len(),
        waterplanes: s.dec.parts.iter().map(|p| p.waterplane).collect(),
        john: check_john_condition(&s.dec),
        symmetric: check_symmetry(&s.body),
        center_of_mass: s.dec.center_of_mass,
        draft: s.dec.draft(),
        half_spacing: s.dec.half_spacing(),
        equilibrium: check_equilibrium(&s.model, &s.body, EquilibriumTolerances::default()),
        water: &s.water,
    };
    let path = write_json(s, "geometry.json", &report)?;
    Ok(format!(
        "parts {} john {} symmetric {} equilibrium {} -> {}",
        report.parts,
        report.john.all,
        report.symmetric,
        report.equilibrium.passes(),
        path.display()
    ))
}

fn hydrostatics(s: &Setup) -> Outcome<String> {
    #[derive(Serialize)]
    struct Report<'a> {
        model: &'a HydrostaticModel,
        lambda0: Option<f64>,
        generalized_eigenvalues: [f64; 3],
        equilibrium: floatwave::hydrostatics::EquilibriumReport,
    }
    let g = s.water.gravity;
    let report = Report {
        model: &s.model,
        lambda0: lambda0(&s.model, g).ok(),
        generalized_eigenvalues: generalized_eigenvalues(&s.model, g),
        equilibrium: check_equilibrium(&s.model, &s.body, EquilibriumTolerances::default()),
    };
    let path = write_json(s, "hydrostatics.json", &report)?;
    Ok(format!("lambda0 {} -> {}", opt(report.lambda0), path.display()))
}

fn bands(s: &Setup) -> Outcome<String> {
    let b = s.dec.half_spacing();
    let mut out = String::from("omega,k,nu,ell,ell0,ell_b,omega_minus,omega_plus,m,error\n");
    for &w in &s.omegas {
        match params_at(s, w) {
            Ok(p) => {
                let band = b.map(|b| band_classifier(&p, b));
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},",
                    num(w),
                    num(p.k),
                    num(p.nu),
                    num(p.ell),
                    opt(p.ell0),
                    opt(band.map(|c| c.ell_b)),
                    band.map(|c| c.omega_minus.to_string()).unwrap_or_default(),
                    band.map(|c| c.omega_plus.to_string()).unwrap_or_default(),
                    band.map(|c| c.m.to_string()).unwrap_or_default(),
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{},{},,,,,,,,{}", num(w), num(s.args.k), csv_field(&e.to_string()));
            }
        }
    }
    let path = write_output(s, "bands.csv", &out)?;
    Ok(format!("{} rows -> {}", s.omegas.len(), path.display()))
}

fn solve(s: &Setup) -> Outcome<String> {
    require_equilibrium(s)?;
    let mut out = String::from("omega,k,motion,parity");
    for name in ["a", "b"] {
        for i in 1..=3 {
            for j in 1..=3 {
                let _ = write!(out, ",{name}{i}{j}");
            }
        }
    }
    out.push_str(",sigma_min,t_norm,sigma_ratio,error\n");
    let active = s.restriction.active();
    let mut failures = 0;
    for &w in &s.omegas {
        let row = (|| -> floatwave::Result<String> {
            let params = params_at(s, w)?;
            let mesh = mesh_for(s, &params)?;
            let dofs = DofMap::new(&mesh, s.restriction.parity)?;
            let pr = assemble(&mesh, &params, dofs, solver_options(s))?;
            let rad = radiation_from(&pr.factor()?, &s.dec, &active)?;
            let t = coupled_matrix(&rad, &s.model, &params);
            let mut line = String::new();
            for m in [rad.added_mass, rad.damping] {
                for v in m.iter().flatten() {
                    let _ = write!(line, ",{}", num(*v));
                }
            }
            let restricted = t.restricted(&active).map(|r| r.0);
            let ratio = restricted.map(|v| if t.norm > 0.0 { v / t.norm } else { 0.0 });
            let _ = write!(line, ",{},{},{},", opt(restricted), num(t.norm), opt(ratio));
            Ok(line)
        })();
        let prefix = format!(
            "{},{},{},{}",
            num(w),
            num(s.args.k),
            s.restriction.motion.as_str(),
            s.restriction.parity.as_str()
        );
        match row {
            Ok(line) => {
                let _ = writeln!(out, "{prefix}{line}");
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(out, "{prefix}{},{}", ",".repeat(21), csv_field(&e.to_string()));
            }
        }
    }
    let path = write_output(s, "radiation.csv", &out)?;
    if failures > 0 {
        return Err(Failure::Solver(format!("{failures} frequencies failed, see {}", path.display())));
    }
    Ok(format!("{} rows -> {}", s.omegas.len(), path.display()))
}

fn scan_line(r: &ScanRow, g: f64) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        r.index,
        num(r.omega),
        num(r.omega * r.omega / g),
        num(r.k),
        r.motion.as_str(),
        r.parity.as_str(),
        opt(r.ell_b),
        opt(r.sigma_ratio),
        opt(r.radiated_ratio),
        opt(r.equipartition),
        opt(r.fluid_sigma_ratio),
        opt(r.fluid_radiated_ratio),
        opt(r.orthogonality),
        r.flagged,
        r.certificate.as_str(),
        r.finite_depth_analogue,
        csv_field(r.error.as_deref().unwrap_or("")),
    )
}

const SCAN_COLUMNS: &str = "index,omega,omega2_over_g,k,motion,parity,ell_b,sigma_ratio,radiated_ratio,\
equipartition,fluid_sigma_ratio,fluid_radiated_ratio,orthogonality,flagged,certificate,finite_depth_analogue,error\n";

fn scan(s: &Setup) -> Outcome<String> {
    require_equilibrium(s)?;
    let mut cfg = ScanConfig::new(s.args.k, s.restriction, s.args.hmesh);
    cfg.x_t = s.args.xt;
    cfg.refinement = s.args.refinement;
    cfg.solver = solver_options(s);
    cfg.sigma_threshold = s.args.sigma_threshold;
    cfg.radiation_threshold = s.args.radiation_threshold;
    cfg.allow_unbalanced = s.args.force;
    let rep = trapped_mode_scan(&s.body, &s.dec, &s.model, &s.water, &s.omegas, &cfg)?;
    let mut out = String::from(SCAN_COLUMNS);
    for r in &rep.rows {
        out.push_str(&scan_line(r, s.water.gravity));
    }
    let path = write_output(s, "scan.csv", &out)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        rows: usize,
        flags: usize,
        certified: usize,
        errors: usize,
        contradictions: &'a [usize],
        grid_jumps: &'a [usize],
    }
    let summary = Summary {
        rows: rep.rows.len(),
        flags: rep.flags,
        certified: rep
            .rows
            .iter()
            .filter(|r| r.certificate != floatwave::audits::Statement::None)
            .count(),
        errors: rep.rows.iter().filter(|r| r.error.is_some()).count(),
        contradictions: &rep.contradictions,
        grid_jumps: &rep.grid_jumps,
    };
    write_json(s, "scan.json", &summary)?;
    let msg = format!(
        "{} rows, {} flags, {} certified, {} errors -> {}",
        summary.rows,
        summary.flags,
        summary.certified,
        summary.errors,
        path.display()
    );
    if !rep.contradictions.is_empty() {
        return Err(Failure::Contradiction(format!(
            "{msg}\nflagged rows inside certified bands: {:?}",
            rep.contradictions
        )));
    }
    Ok(msg)
}

fn scatter(s: &Setup) -> Outcome<String> {
    require_equilibrium(s)?;
    let mut out = String::from(
        "omega,k,r_re,r_im,t_re,t_im,r_abs,t_abs,energy,z1_re,z1_im,z2_re,z2_im,z3_re,z3_im,sigma_ratio,error\n",
    );
    let amplitude = C64::new(s.args.amplitude, 0.0);
    let mut failures = 0;
    for &w in &s.omegas {
        let row = (|| -> floatwave::Result<String> {
            let params = params_at(s, w)?;
            let mesh = mesh_for(s, &params)?;
            let sc = solve_scattering(&mesh, &params, &s.dec, Some(&s.model), amplitude, solver_options(s))?;
            let (r, t) = (sc.reflection, sc.transmission);
            let mut line = format!(
                ",{},{},{},{},{},{},{}",
                num(r.re),
                num(r.im),
                num(t.re),
                num(t.im),
                num(r.norm()),
                num(t.norm()),
                num(r.norm_sqr() + t.norm_sqr())
            );
            for z in sc.solution.z {
                let _ = write!(line, ",{},{}", num(z.re), num(z.im));
            }
            let _ = write!(line, ",{},", opt(sc.solution.sigma_ratio));
            Ok(line)
        })();
        let prefix = format!("{},{}", num(w), num(s.args.k));
        match row {
            Ok(line) => {
                let _ = writeln!(out, "{prefix}{line}");
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(out, "{prefix}{},{}", ",".repeat(14), csv_field(&e.to_string()));
            }
        }
    }
    let path = write_output(s, "scatter.csv", &out)?;
    if failures > 0 {
        return Err(Failure::Solver(format!("{failures} frequencies failed, see {}", path.display())));
    }
    Ok(format!("{} rows -> {}", s.omegas.len(), path.display()))
}

#[derive(Serialize)]
struct AuditEntry {
    omega: f64,
    k: f64,
    radiation: Vec<(Motion, AuditReport)>,
    diffraction: Option<AuditReport>,
    coupled: Option<AuditReport>,
    certificate: UniquenessCertificate,
    error: Option<String>,
}

fn audit(s: &Setup) -> Outcome<String> {
    require_equilibrium(s)?;
    let facts = BodyFacts::new(&s.body, &s.dec, &s.model, s.water.gravity);
    let mut entries = Vec::new();
    for &w in &s.omegas {
        let params = params_at(s, w)?;
        let mut entry = AuditEntry {
            omega: w,
            k: s.args.k,
            radiation: Vec::new(),
            diffraction: None,
            coupled: None,
            certificate: certify(&facts, &params, s.restriction),
            error: None,
        };
        let run = (|| -> floatwave::Result<()> {
            let mesh = mesh_for(s, &params)?;
            let pr = assemble(&mesh, &params, DofMap::full(mesh.nodes.len()), solver_options(s))?;
            let rad = radiation_from(&pr.factor()?, &s.dec, &[0, 1, 2])?;
            for (j, m) in [Motion::Sway, Motion::Heave, Motion::Roll].into_iter().enumerate() {
                if let Some(phi) = &rad.phi[j] {
                    entry.radiation.push((m, audit_solution(&pr, phi, &s.dec, None)));
                }
            }
            let sc = solve_scattering(&mesh, &params, &s.dec, Some(&s.model), C64::new(1.0, 0.0), solver_options(s))?;
            entry.diffraction = Some(audit_solution(&pr, &sc.diffraction, &s.dec, None));
            entry.coupled = Some(audit_solution(
                &pr,
                &sc.solution.phi,
                &s.dec,
                Some((&sc.solution.z, &s.model)),
            ));
            Ok(())
        })();
        if let Err(e) = run {
            entry.error = Some(e.to_string());
        }
        entries.push(entry);
    }
    let failures = entries.iter().filter(|e| e.error.is_some()).count();
    let path = write_json(s, "audit.json", &entries)?;
    if failures > 0 {
        return Err(Failure::Solver(format!("{failures} frequencies failed, see {}", path.display())));
    }
    let worst = entries
        .iter()
        .flat_map(|e| e.radiation.iter().map(|r| &r.1).chain(e.diffraction.iter()).chain(e.coupled.iter()))
        .map(|r| r.equipartition.relative.max(r.energy_flux.relative))
        .fold(0.0, f64::max);
    Ok(format!(
        "{} frequencies, worst flux/equipartition residual {} -> {}",
        entries.len(),
        num(worst),
        path.display()
    ))
}

fn configure_workers() -> Outcome<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_ENV} must be a positive integer, got {v}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: Cli) -> Outcome<String> {
    configure_workers()?;
    let (name, args, f): (&str, RunArgs, fn(&Setup) -> Outcome<String>) = match cli.command {
        Command::CheckGeometry(a) => ("check-geometry", a, check_geometry),
        Command::Hydrostatics(a) => ("hydrostatics", a, hydrostatics),
        Command::Bands(a) => ("bands", a, bands),
        Command::Solve(a) => ("solve", a, solve),
        Command::Scan(a) => ("scan", a, scan),
        Command::Scatter(a) => ("scatter", a, scatter),
        Command::Audit(a) => ("audit", a, audit),
    };
    let s = setup(name, args)?;
    f(&s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
