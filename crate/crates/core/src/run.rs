//! Scenario orchestration: runs a configured computation and writes its
//! artifacts plus a checksummed manifest.
//!
//! Artifacts never contain timings, so identical configurations reproduce
//! identical files. Wall time is recorded only in `manifest.txt`.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::barriers::decay_sweep;
use crate::config::{RunConfig, Scenario};
use crate::continuation::{continue_beta, SweepRecord};
use crate::diagnostics::{
    acf_quotient, almgren_eh, clusters, extraction_threshold, fit_local_exponent, free_boundary,
    free_boundary_point, hat_field, holder_quotient, morrey_quotient, multiplicity, reflection_residual,
    segregation_system_residual, Subdomain,
};
use crate::config::DiagnosticsSection;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::io::{load_field, write_field};
use crate::par::Execution;
use crate::solver::{residual, solve_system};
use crate::spherical::{optimize_mu, optimize_nu};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub artifacts: Vec<Artifact>,
    pub wall_time: f64,
}

struct Outputs<'a> {
    dir: &'a Path,
    artifacts: Vec<Artifact>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, data: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), data)?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len(),
        });
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let data = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write(name, &data)
    }

    fn field(&mut self, name: &str, field: &Field) -> Result<()> {
        let mut buf = Vec::new();
        write_field(field, &mut buf)?;
        self.write(name, &buf)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub step: usize,
    pub beta: f64,
    pub iterations: usize,
    pub residual: f64,
    pub overlap_12: f64,
    pub beta_overlap_12: f64,
    pub trace_product_12: f64,
    pub reflection_residual: Option<f64>,
}

pub fn sweep_rows(record: &SweepRecord) -> Vec<SweepRow> {
    let k = record.k;
    record
        .steps
        .iter()
        .enumerate()
        .map(|(n, st)| {
            let pair = |m: &[f64]| if k >= 2 { m[1] } else { 0.0 };
            SweepRow {
                step: n,
                beta: st.beta,
                iterations: st.report.iterations,
                residual: st.report.final_residual,
                overlap_12: pair(&st.overlap),
                beta_overlap_12: pair(&st.scaled_overlap),
                trace_product_12: pair(&st.trace_product),
                reflection_residual: st.reflection_residual,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScalarRow {
    pub quantity: String,
    pub component: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RadialRow {
    pub functional: String,
    pub center_x: f64,
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentRow {
    pub s: f64,
    pub nu: f64,
    pub mu: f64,
    pub theta_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayCsvRow {
    pub m: f64,
    pub p: f64,
    pub s: f64,
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Zero of the first reflected trace nearest to node `n0`, by linear
/// interpolation; `x[n0]` when the trace does not change sign.
pub fn hat_trace_root(field: &Field, n0: usize) -> f64 {
    let x = &field.grid.x_nodes;
    let t = hat_field(field).components[0].trace();
    let mut best: Option<(usize, f64)> = None;
    for n in 0..x.len() - 1 {
        if t[n] == 0.0 || t[n] * t[n + 1] < 0.0 {
            let root = if t[n] == 0.0 {
                x[n]
            } else {
                x[n] + (x[n + 1] - x[n]) * t[n] / (t[n] - t[n + 1])
            };
            let d = n.abs_diff(n0);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, root));
            }
        }
    }
    best.map_or(x[n0], |b| b.1)
}

/// Geometric radii `first * ratio^m`, kept while they fit in `room`.
pub fn geometric_radii(first: f64, ratio: f64, count: usize, room: f64) -> Vec<f64> {
    (0..count)
        .map(|m| first * ratio.powi(m as i32))
        .filter(|&r| r <= room)
        .collect()
}

/// Scalar and radial diagnostics of a field.
pub fn field_diagnostics(
    field: &Field,
    d: &DiagnosticsSection,
    tolerance: f64,
) -> Result<(Vec<ScalarRow>, Vec<RadialRow>)> {
    let g = &*field.grid;
    let k = field.k();
    let x = &g.x_nodes;
    let dx = (g.x_hi() - g.x_lo()) / (g.nx() - 1) as f64;
    let mut scalars = Vec::new();
    let mut push = |q: &str, c: Option<usize>, v: f64| {
        scalars.push(ScalarRow {
            quantity: q.to_string(),
            component: c,
            value: v,
        })
    };
    push("residual", None, residual(field));

    let (n0, center) = if k >= 2 {
        let n0 = free_boundary_point(field);
        let threshold = extraction_threshold(field, tolerance);
        let fb = free_boundary(field, threshold);
        push("free_boundary_x", None, x[n0]);
        push("free_boundary_threshold", None, threshold);
        push("free_boundary_nodes", None, fb.len() as f64);
        push("free_boundary_clusters", None, clusters(&fb).len() as f64);
        push(
            "multiplicity",
            None,
            multiplicity(field, n0, threshold, d.first_radius_cells * dx) as f64,
        );
        (n0, hat_trace_root(field, n0))
    } else {
        let n0 = g.nx() / 2;
        (n0, x[n0])
    };

    let room_fit = (x[n0] - g.x_lo()).min(g.x_hi() - x[n0]);
    let fit_radii = geometric_radii(d.first_radius_cells * dx, d.radius_ratio, d.radii, room_fit);
    for c in 0..k {
        if let Ok(alpha) = fit_local_exponent(x, &field.trace(c), n0, &fit_radii) {
            push("local_exponent", Some(c), alpha);
        }
    }
    if k == 2 {
        push("reflection_residual", None, reflection_residual(field)?);
    }
    for (c, r) in segregation_system_residual(field).iter().enumerate() {
        push("segregation_upper", Some(c), r[0]);
        push("segregation_lower", Some(c), r[1]);
        push("segregation_complementarity", Some(c), r[2]);
    }
    let whole = Subdomain {
        x_lo: g.x_lo(),
        x_hi: g.x_hi(),
        y_lo: 0.0,
        y_hi: g.height(),
    };
    for c in 0..k {
        push("holder_quotient", Some(c), holder_quotient(field, c, d.holder_alpha, &whole)?);
    }

    let mut radial = Vec::new();
    let room = (center - g.x_lo()).min(g.x_hi() - center).min(g.height());
    let radii = geometric_radii(d.first_radius_cells * dx, d.radius_ratio, d.radii, room);
    if radii.len() >= 3 {
        let mut add = |name: &str, rs: &[f64], vals: &[f64]| {
            for (r, v) in rs.iter().zip(vals) {
                radial.push(RadialRow {
                    functional: name.to_string(),
                    center_x: center,
                    r: *r,
                    value: *v,
                });
            }
        };
        let m = morrey_quotient(field, center, &radii, d.morrey_eps)?;
        add("morrey", &radii, &m.values);
        if k >= 2 {
            let hat = &hat_field(field).components[0];
            let mu = match d.acf_mu {
                Some(mu) => mu,
                None => optimize_mu(field.params.s, 256, &Default::default())?.value,
            };
            match acf_quotient(&hat.positive_part(), &hat.negative_part(), center, mu, &radii) {
                Ok(p) => add("acf", &radii, &p.values),
                Err(Error::NotSegregated { .. }) | Err(Error::Precondition(_)) => {
                    scalars.push(ScalarRow {
                        quantity: "acf_skipped".into(),
                        component: None,
                        value: 1.0,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let eh = almgren_eh(field, 0, center, &radii)?;
        add("energy", &radii, &eh.e.values);
        add("height", &radii, &eh.h.values);
        add("height_identity_defect", &radii, &eh.identity_defect);
    }
    Ok((scalars, radial))
}

/// Runs `scenario` with `cfg`, writing artifacts into `out`.
pub fn run(cfg: &RunConfig, scenario: Scenario, out: &Path) -> Result<RunSummary> {
    let scenario = cfg.resolve_scenario(scenario)?;
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let mut outputs = Outputs {
        dir: out,
        artifacts: Vec::new(),
    };
    match scenario {
        Scenario::Solve => {
            let params = cfg.params()?;
            let grid = Arc::new(cfg.grid.build(params.a())?);
            let bd = cfg.boundary.data(&grid, params.k, &cfg.base_dir)?;
            let init = Field::zeros(Arc::clone(&params), Arc::clone(&grid));
            let (field, rep) = solve_system(&params, &grid, &bd, &init, &cfg.solver)?;
            if !rep.converged {
                return Err(Error::StepNotConverged {
                    step: 0,
                    beta: params.beta,
                    residual: rep.final_residual,
                    iterations: rep.iterations,
                });
            }
            #[derive(Serialize)]
            struct Row {
                iterations: usize,
                residual: f64,
                converged: bool,
            }
            outputs.csv(
                "solve.csv",
                &[Row {
                    iterations: rep.iterations,
                    residual: rep.final_residual,
                    converged: rep.converged,
                }],
            )?;
            outputs.field("field.txt", &field)?;
        }
        Scenario::SweepBeta => {
            let params = cfg.params()?;
            let grid = Arc::new(cfg.grid.build(params.a())?);
            let bd = cfg.boundary.data(&grid, params.k, &cfg.base_dir)?;
            let (field, record) = continue_beta(&params, &grid, &bd, &cfg.ladder, &cfg.solver)?;
            outputs.csv("sweep.csv", &sweep_rows(&record))?;
            outputs.field("field_final.txt", &field)?;
            let (scalars, radial) = field_diagnostics(&field, &cfg.diagnostics, cfg.solver.tolerance)?;
            outputs.csv("diagnostics.csv", &scalars)?;
            outputs.csv("radial.csv", &radial)?;
        }
        Scenario::Diagnose => {
            let path = cfg
                .diagnostics
                .field
                .as_ref()
                .ok_or_else(|| Error::Config("diagnostics.field is required for diagnose".into()))?;
            let stored = load_field(&cfg.base_dir.join(path))?;
            let params = Arc::new(cfg.problem.params()?.with_beta(stored.header.beta));
            let field = stored.into_field(params)?;
            let (scalars, radial) = field_diagnostics(&field, &cfg.diagnostics, cfg.solver.tolerance)?;
            outputs.csv("diagnostics.csv", &scalars)?;
            outputs.csv("radial.csv", &radial)?;
        }
        Scenario::Exponents => {
            let e = &cfg.exponents;
            let mut rows = Vec::with_capacity(e.s_values.len());
            for &s in &e.s_values {
                let mu = optimize_mu(s, e.resolution, &e.optimizer)?;
                let nu = optimize_nu(s, e.resolution, &e.optimizer)?;
                rows.push(ExponentRow {
                    s,
                    nu: nu.value,
                    mu: mu.value,
                    theta_star: mu.argmin[0],
                });
            }
            outputs.csv("exponents.csv", &rows)?;
        }
        Scenario::BarrierCheck => {
            let b = &cfg.barrier;
            let rows = decay_sweep(&b.cases(), &b.setup, &cfg.solver, Execution::Parallel)?;
            let csv_rows: Vec<DecayCsvRow> = rows
                .iter()
                .map(|r| DecayCsvRow {
                    m: r.case.m,
                    p: r.case.p,
                    s: r.case.s,
                    delta: b.setup.delta,
                    lhs: r.outcome.lhs,
                    rhs: r.outcome.rhs,
                    margin: r.outcome.margin,
                    pass: r.outcome.pass,
                })
                .collect();
            outputs.csv("decay.csv", &csv_rows)?;
        }
    }
    let wall_time = start.elapsed().as_secs_f64();
    let mut manifest = format!("scenario {}\nwall_time_seconds {wall_time:.3}\n", scenario.name());
    for a in &outputs.artifacts {
        manifest.push_str(&format!("artifact {} {} {}\n", a.sha256, a.bytes, a.name));
    }
    fs::write(out.join("manifest.txt"), manifest)?;
    Ok(RunSummary {
        scenario,
        artifacts: outputs.artifacts,
        wall_time,
    })
}

/// Process exit status for an error: 2 configuration, 3 solver, 4 I/O, 1 other.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) => 2,
        Error::StepNotConverged { .. } | Error::NonFinite(_) => 3,
        Error::Io(_) | Error::Csv(_) | Error::Format(_) => 4,
        _ => 1,
    }
}
