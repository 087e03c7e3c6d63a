//! The five commands. Each builds its report in memory; [`write_report`] is
//! the single writer.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use hflow_core::euler::{build_steady, coset_triviality_check, residual_report, worst_row};
use hflow_core::geometry::DiskPoint;
use hflow_core::grid::PolarGrid;
use hflow_core::harmonic::{harmonic_extend, spectral_dirichlet_energy, HarmonicPotential};
use hflow_core::higher_dim::{dichotomy_experiment, growth_rows, Classification};
use hflow_core::navier_stokes::{
    dissipation_bridge, energy_report, initial_data_distance, leray_hopf_admissible, nonuniqueness_demo,
    ns_residual_terms, residual_sweep, time_grid, NonuniquenessOptions, NsSolution,
};
use hflow_core::quadrature::{norm_report, rule_for, DeformationOptions, DiskRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::{line_chart, Series};

/// Default residual tolerance of the verification commands.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Required agreement of the deformation and Dirichlet energies.
pub const BRIDGE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub command: String,
    pub pass: bool,
    pub metrics: Value,
    pub config_echo: Value,
}

/// Summary plus named output files.
#[derive(Clone, Debug)]
pub struct Report {
    pub summary: Summary,
    pub files: Vec<(String, Vec<u8>)>,
    /// Printed to stderr when the check fails.
    pub failure: Option<String>,
}

impl Report {
    fn new(command: &str, cfg: &RunConfig, pass: bool, metrics: Value) -> Self {
        Report {
            summary: Summary {
                command: command.to_string(),
                pass,
                metrics,
                config_echo: serde_json::to_value(cfg).expect("config serializes"),
            },
            files: Vec::new(),
            failure: None,
        }
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| io_error(name, e.into()))?;
        }
        let bytes = w.into_inner().map_err(|e| io_error(name, e.into_error()))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn svg(&mut self, cfg: &RunConfig, name: &str, svg: impl FnOnce() -> String) {
        if cfg.plot {
            self.files.push((name.to_string(), svg().into_bytes()));
        }
    }

    pub fn summary_file(&self) -> String {
        format!("{}_summary.json", self.summary.command.replace([' ', '-'], "_"))
    }
}

fn io_error(path: &str, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_string(), source }
}

/// Writes every file of the report plus the JSON summary into `dir`.
pub fn write_report(dir: &Path, report: &Report) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(&dir.display().to_string(), e))?;
    let summary = serde_json::to_vec_pretty(&report.summary).expect("summary serializes");
    let summary_name = report.summary_file();
    for (name, bytes) in report.files.iter().map(|(n, b)| (n.as_str(), b)).chain([(summary_name.as_str(), &summary)]) {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_error(&path.display().to_string(), e))?;
    }
    Ok(())
}

fn disk_rule(cfg: &RunConfig, pot: &HarmonicPotential) -> DiskRule {
    match (cfg.quadrature.m_r, cfg.quadrature.m_theta) {
        (None, None) => rule_for(pot),
        (m_r, m_theta) => {
            let d = rule_for(pot);
            DiskRule::gauss(m_r.unwrap_or(d.radial_len()), m_theta.unwrap_or(d.angular_len()))
        }
    }
}

/// Seeded points, uniform in area on `|x| ≤ r_cut`.
pub fn probe_points(seed: u64, n: usize, r_cut: f64) -> Vec<DiskPoint<2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = r_cut * rng.gen::<f64>().sqrt();
            let t = 2.0 * PI * rng.gen::<f64>();
            DiskPoint::polar(r, t).expect("probe inside the disk")
        })
        .collect()
}

fn probe_times(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    if cfg.probes.times == 1 {
        return Ok(vec![0.0]);
    }
    Ok(time_grid(cfg.t_max, cfg.probes.times - 1)?)
}

pub fn verify_euler(cfg: &RunConfig) -> Result<Report, CliError> {
    let data = cfg.boundary_data()?;
    let scale = if cfg.negative_control { 2.0 } else { 1.0 };
    let sol = build_steady(&data).with_pressure_scale(scale);
    let g = cfg.grid;
    let grid = PolarGrid::new(g.radial, g.angular, g.r_cut);
    let rows = residual_report(&sol, &grid)?;
    let tol = cfg.tolerance.unwrap_or(RESIDUAL_TOLERANCE);
    let worst = worst_row(&rows).expect("non-empty grid");
    let mut max_div = 0.0f64;
    for p in grid.points() {
        max_div = max_div.max(sol.divergence(&p)?.abs());
    }
    let rule = disk_rule(cfg, sol.potential());
    let coset = coset_triviality_check(&sol, &rule)?;
    let pass = worst.residual_norm <= tol;
    let metrics = json!({
        "max_residual": worst.residual_norm,
        "worst_point": [worst.point_x, worst.point_y],
        "tolerance": tol,
        "grid_points": rows.len(),
        "pressure_scale": scale,
        "max_divergence": max_div,
        "coset_relative_defect": coset,
        "dirichlet_energy_oracle": spectral_dirichlet_energy(&data),
    });
    let mut report = Report::new("verify euler", cfg, pass, metrics);
    if let Some(bad) = rows.iter().find(|r| r.residual_norm > tol) {
        report.failure = Some(format!(
            "Euler residual {:e} exceeds tolerance {tol:e} at ({}, {})",
            bad.residual_norm, bad.point_x, bad.point_y
        ));
    }
    report.csv("euler_residuals.csv", &rows)?;
    report.csv("norms.csv", &norm_report(&data)?)?;
    report.svg(cfg, "euler_residuals.svg", || {
        // largest residual on each ring
        let rings: Vec<(f64, f64)> = rows
            .chunks(g.angular)
            .map(|ring| {
                let r = ring[0].point_x.hypot(ring[0].point_y);
                let m = ring.iter().map(|x| x.residual_norm).fold(0.0, f64::max);
                (r, if m > 0.0 { m.log10() } else { f64::NAN })
            })
            .collect();
        line_chart("Euler residual", "r", "log10 max |residual|", &[Series { label: "grid ring", points: rings }])
    });
    Ok(report)
}

#[derive(Serialize)]
struct ProbeRow {
    t: f64,
    point_x: f64,
    point_y: f64,
    residual_norm: f64,
    ricci_norm: f64,
    advection_defect: f64,
}

pub fn verify_ns(cfg: &RunConfig) -> Result<Report, CliError> {
    let data = cfg.boundary_data()?;
    let profile = cfg.profiles[0].build()?;
    let sol = NsSolution::new(harmonic_extend(&data), profile.clone());
    let adm = leray_hopf_admissible(&profile, cfg.t_max, cfg.steps)?;
    let points = probe_points(cfg.seed, cfg.probes.points, cfg.grid.r_cut);
    let times = probe_times(cfg)?;
    let sweep = residual_sweep(&sol, &times, &points)?;
    let tol = cfg.tolerance.unwrap_or(RESIDUAL_TOLERANCE);
    let mut rows = Vec::with_capacity(times.len() * points.len());
    for &t in &times {
        for p in &points {
            let terms = ns_residual_terms(&sol, t, p)?;
            let closed = sol.advection_closed_form(t, p);
            let [x, y] = *p.coords();
            rows.push(ProbeRow {
                t,
                point_x: x,
                point_y: y,
                residual_norm: terms.sum[0].hypot(terms.sum[1]),
                ricci_norm: terms.ricci[0].hypot(terms.ricci[1]),
                advection_defect: (terms.advection[0] - closed[0]).hypot(terms.advection[1] - closed[1]),
            });
        }
    }
    let nontrivial = sweep.max_ricci > 0.0;
    let pass = adm.pass && sweep.max_residual <= tol && sweep.max_advection_defect <= tol && nontrivial;
    let metrics = json!({
        "max_residual": sweep.max_residual,
        "min_margin": adm.min_margin,
        "admissible": adm.pass,
        "max_ricci_term": sweep.max_ricci,
        "max_advection_defect": sweep.max_advection_defect,
        "max_viscous_term": sweep.max_viscous,
        "tolerance": tol,
        "probes": rows.len(),
        "profile": cfg.profiles[0].to_string(),
    });
    let mut report = Report::new("verify ns", cfg, pass, metrics);
    if !adm.pass {
        report.failure =
            Some(format!("energy inequality violated at t = {} (margin {:e})", adm.worst_time, adm.min_margin));
    } else if let Some(bad) = rows.iter().find(|r| r.residual_norm > tol || r.advection_defect > tol) {
        report.failure = Some(format!(
            "Navier-Stokes residual {:e} exceeds tolerance {tol:e} at t = {}, ({}, {})",
            bad.residual_norm.max(bad.advection_defect),
            bad.t,
            bad.point_x,
            bad.point_y
        ));
    } else if !nontrivial {
        report.failure = Some("the velocity field vanishes identically".to_string());
    }
    report.csv("ns_residuals.csv", &rows)?;
    report.svg(cfg, "ns_margin.svg", || {
        line_chart(
            "Energy margin",
            "t",
            "f(0)² - f(t)² - 4F₂(t)",
            &[Series { label: "margin", points: adm.curve.clone() }],
        )
    });
    Ok(report)
}

pub fn energy(cfg: &RunConfig) -> Result<Report, CliError> {
    let data = cfg.boundary_data()?;
    let profile = cfg.profiles[0].build()?;
    let pot = harmonic_extend(&data);
    let sol = NsSolution::new(pot.clone(), profile.clone());
    let adm = leray_hopf_admissible(&profile, cfg.t_max, cfg.steps)?;
    let rows = energy_report(&sol, cfg.t_max, cfg.steps)?;
    let bridge = dissipation_bridge(&pot, &DeformationOptions::for_potential(&pot))?;
    let first_step = cfg.t_max / cfg.steps as f64;
    let tol = cfg.tolerance.unwrap_or(BRIDGE_TOLERANCE);
    let pass = adm.pass && bridge.relative_gap <= tol;
    let metrics = json!({
        "min_margin": rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        "admissible": adm.pass,
        "dirichlet_energy": bridge.l2_hyperbolic,
        "deformation_energy": bridge.deformation.value,
        "deformation_levels": bridge.deformation.levels,
        "bridge_relative_gap": bridge.relative_gap,
        "bridge_tolerance": tol,
        "initial_distance_first_step": initial_data_distance(&sol, first_step)?,
        "profile": cfg.profiles[0].to_string(),
    });
    let mut report = Report::new("energy-report", cfg, pass, metrics);
    if !adm.pass {
        report.failure =
            Some(format!("energy inequality violated at t = {} (margin {:e})", adm.worst_time, adm.min_margin));
    } else if bridge.relative_gap > tol {
        report.failure = Some(format!("deformation energy differs from ‖dΦ‖² by {:e}", bridge.relative_gap));
    }
    report.csv("energy.csv", &rows)?;
    report.svg(cfg, "energy.svg", || {
        line_chart(
            "Energy inequality",
            "t",
            "energy",
            &[
                Series { label: "lhs", points: rows.iter().map(|r| (r.t, r.lhs)).collect() },
                Series { label: "rhs", points: rows.iter().map(|r| (r.t, r.rhs)).collect() },
                Series { label: "E", points: rows.iter().map(|r| (r.t, r.e)).collect() },
            ],
        )
    });
    Ok(report)
}

pub fn nonuniq(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.profiles.len() < 2 {
        return Err(CliError::Config("nonuniq needs two profiles (repeat --profile)".to_string()));
    }
    let data = cfg.boundary_data()?;
    let f1 = cfg.profiles[0].build()?;
    let f2 = cfg.profiles[1].build()?;
    let points = probe_points(cfg.seed, cfg.probes.points, cfg.grid.r_cut);
    let times = probe_times(cfg)?;
    let tol = cfg.tolerance.unwrap_or(RESIDUAL_TOLERANCE);
    let opts = NonuniquenessOptions {
        horizon: cfg.t_max,
        steps: cfg.steps,
        probe_times: &times,
        probe_points: &points,
        residual_tolerance: tol,
    };
    let demo = nonuniqueness_demo(&harmonic_extend(&data), &f1, &f2, &opts)?;
    let sep_at_one = demo.rows[0].iter().find(|r| r.t == 1.0).map(|r| r.sep);
    let residuals_pass = demo.sweeps.iter().all(|s| s.max_residual <= tol);
    let metrics = json!({
        "same_initial_data": demo.initial_separation == 0.0,
        "residuals_pass": residuals_pass,
        "separated": demo.max_separation > 0.0,
        "initial_separation": demo.initial_separation,
        "max_residual": [demo.sweeps[0].max_residual, demo.sweeps[1].max_residual],
        "min_margin": [demo.admissibility[0].min_margin, demo.admissibility[1].min_margin],
        "max_separation": demo.max_separation,
        "separation_at_t1": sep_at_one,
        "dirichlet_energy": demo.dirichlet_energy,
        "tolerance": tol,
        "profiles": [cfg.profiles[0].to_string(), cfg.profiles[1].to_string()],
    });
    let mut report = Report::new("nonuniq", cfg, demo.certified, metrics);
    if !demo.certified {
        report.failure = Some(if !residuals_pass {
            format!("a Navier-Stokes residual exceeds {tol:e}")
        } else {
            "the two solutions never separate".to_string()
        });
    }
    report.csv("nonuniq_f1.csv", &demo.rows[0])?;
    report.csv("nonuniq_f2.csv", &demo.rows[1])?;
    report.svg(cfg, "separation.svg", || {
        line_chart(
            "Separation of two Leray-Hopf solutions",
            "t",
            "‖v₁ - v₂‖",
            &[Series { label: "sep", points: demo.rows[0].iter().map(|r| (r.t, r.sep)).collect() }],
        )
    });
    Ok(report)
}

pub fn dodziuk(cfg: &RunConfig) -> Result<Report, CliError> {
    let data = cfg.boundary_data()?;
    let sphere = cfg.sphere;
    let opts = cfg.dichotomy_options();
    let d = dichotomy_experiment(&data, move |xi: &[f64; 3]| sphere.eval(xi), &opts)?;
    let (c2, c3) = (d.n2.classification, d.n3.classification);
    let pass = c2 == Classification::Convergent && c3 != Classification::Inconclusive;
    let interpretation = match (c2, c3) {
        (Classification::Convergent, Classification::Divergent) => {
            "consistent with Dodziuk's theorem: finite energy on H², unbounded truncated energy on H³"
        }
        (Classification::Convergent, Classification::Convergent) => "both energies finite (trivial data)",
        _ => "inconclusive at this resolution",
    };
    let dim = |r: &hflow_core::higher_dim::DimensionReport| {
        json!({
            "classification": r.classification.label(),
            "energy_at_r_max": r.curve.last_energy(),
            "fit_slope": r.fit.map(|f| f.slope),
            "fit_residual": r.fit.map(|f| f.residual),
            "refined_fit_slope": r.refined_fit.map(|f| f.slope),
            "slope_change": if r.slope_change.is_finite() { Some(r.slope_change) } else { None },
            "tail_estimate": r.tail_estimate,
            "limit_estimate": r.limit_estimate(),
        })
    };
    let metrics = json!({
        "n2": dim(&d.n2),
        "n3": dim(&d.n3),
        "n2_spectral_oracle": spectral_dirichlet_energy(&data),
        "interpretation": interpretation,
        "growth_note": "linear growth in R for n = 3 is a derived asymptotic, measured here, not a proved rate",
    });
    let mut report = Report::new("dodziuk", cfg, pass, metrics);
    if !pass {
        report.failure = Some(format!("classification n2 = {c2}, n3 = {c3}"));
    }
    let labels = json!({"n2": c2.label(), "n3": c3.label()});
    report.files.push(("dodziuk.json".to_string(), serde_json::to_vec(&labels).expect("labels serialize")));
    report.csv("growth_n2.csv", &growth_rows(&d.n2.curve))?;
    report.csv("growth_n3.csv", &growth_rows(&d.n3.curve))?;
    report.svg(cfg, "growth.svg", || {
        let pts =
            |c: &hflow_core::quadrature::GrowthCurve| c.radii.iter().copied().zip(c.energies.iter().copied()).collect();
        line_chart(
            "Truncated Dirichlet energy",
            "hyperbolic radius R",
            "E(R)",
            &[Series { label: "n = 2", points: pts(&d.n2.curve) }, Series { label: "n = 3", points: pts(&d.n3.curve) }],
        )
    });
    Ok(report)
}
