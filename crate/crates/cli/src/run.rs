//! Executes a resolved scenario and writes its artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dsl_core::gaussian::{integrate_params, params_to_field, GaussianSolitonParams};
use dsl_core::gravity::{
    compton_radius, final_state_soliton, final_state_standard, self_coupling_ratio, single_device_dephasing,
    soliton_spring_constant, sphere_potential, theta_soliton, theta_standard, tomography_report, SelfGravitySphere,
    BRANCH_LABELS,
};
use dsl_core::guidance::{
    evolve_ensemble, integrate_configuration, integrate_trajectory, relaxation_h, Bins, Ensemble, ManyBodyPilot,
    Trajectory,
};
use dsl_core::pilot::{PilotSpec, PilotWave};
use dsl_core::soliton::{evolve_soliton_sampled, profiles, shape_error, SolitonState};
use dsl_core::spectral::io::{fmt_num, write_field_csv, FieldHeader};
use dsl_core::spectral::{ComplexField, Grid};
use dsl_core::{Point, Warning};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::scenario::{
    steps_for, BinsSpec, EvolveScenario, GaussianScenario, PhasesScenario, Profile, RelaxScenario, Scenario,
    SelfgravScenario, TrajectoriesScenario,
};
use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Breach,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Breach => 3,
        }
    }
}

/// Machine-readable outcome of one run, written as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub dsl_version: &'static str,
    pub kind: String,
    pub status: Status,
    pub exit_code: i32,
    pub seed: u64,
    pub runtime_seconds: f64,
    pub scenario: Scenario,
    pub constants: dsl_core::PhysicalConstants<f64>,
    /// Files written by the run, relative to the output directory. On
    /// failure this is the manifest of partial output.
    pub artifacts: Vec<String>,
    pub metrics: Map<String, Value>,
    pub warnings: Vec<Warning>,
    pub errors: Vec<String>,
}

/// Collects artifacts and metrics while a run progresses.
struct Sink {
    dir: PathBuf,
    artifacts: Vec<String>,
    metrics: Map<String, Value>,
    warnings: Vec<Warning>,
    errors: Vec<String>,
    breach: bool,
}

impl Sink {
    fn csv(
        &mut self,
        name: &str,
        header: &[String],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn field(&mut self, stem: &str, field: &ComplexField<f64>, time: f64) -> Result<(), CliError> {
        let csv_name = format!("{stem}.csv");
        let path = self.dir.join(&csv_name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        write_field_csv(field, BufWriter::new(file))?;
        self.artifacts.push(csv_name);
        self.json(&format!("{stem}.json"), &FieldHeader::for_grid(field.grid(), time))
    }

    fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn num(x: f64) -> String {
    fmt_num(x)
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn axis_columns(prefix: &str, dims: usize) -> Vec<String> {
    AXES[..dims].iter().map(|a| format!("{prefix}{a}")).collect()
}

fn point_cells(p: &Point<f64>, dims: usize) -> Vec<String> {
    p[..dims].iter().map(|v| num(*v)).collect()
}

fn speed(v: &Point<f64>) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn to_point(v: &[f64], dims: usize, what: &str) -> Result<Point<f64>, CliError> {
    if v.len() != dims {
        return Err(CliError::Config(format!(
            "{what}: expected {dims} components, got {}",
            v.len()
        )));
    }
    let mut p = [0.0; 3];
    p[..dims].copy_from_slice(v);
    Ok(p)
}

/// Runs `scenario`, writing artifacts and `summary.json` into `out_dir`.
///
/// Solver failures are recorded in the report rather than returned; the
/// error path is reserved for output that cannot be written.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<Report, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let start = Instant::now();
    let mut sink = Sink {
        dir: out_dir.to_path_buf(),
        artifacts: Vec::new(),
        metrics: Map::new(),
        warnings: Vec::new(),
        errors: Vec::new(),
        breach: false,
    };
    let outcome = match scenario {
        Scenario::Evolve(s) => run_evolve(s, &mut sink),
        Scenario::Gaussian(s) => run_gaussian(s, &mut sink),
        Scenario::Trajectories(s) => run_trajectories(s, &mut sink),
        Scenario::Relax(s) => run_relax(s, &mut sink),
        Scenario::Phases(s) => run_phases(s, &mut sink),
        Scenario::Selfgrav(s) => run_selfgrav(s, &mut sink),
    };
    if let Err(e) = outcome {
        if matches!(e, CliError::Io(_)) {
            return Err(e);
        }
        sink.errors.push(e.to_string());
    }
    let status = if !sink.errors.is_empty() {
        Status::Failed
    } else if sink.breach {
        Status::Breach
    } else {
        Status::Ok
    };
    let mut artifacts = sink.artifacts;
    artifacts.push(SUMMARY_FILE.to_string());
    let report = Report {
        dsl_version: env!("CARGO_PKG_VERSION"),
        kind: scenario.kind().to_string(),
        status,
        exit_code: status.exit_code(),
        seed: scenario.seed(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        scenario: scenario.clone(),
        constants: *scenario.constants(),
        artifacts,
        metrics: sink.metrics,
        warnings: sink.warnings,
        errors: sink.errors,
    };
    write_json(&out_dir.join(SUMMARY_FILE), &report)?;
    Ok(report)
}

fn run_evolve(s: &EvolveScenario, sink: &mut Sink) -> Result<(), CliError> {
    let pilot = PilotWave::new(s.pilot.clone(), &s.constants)?;
    let grid = s.grid.build()?;
    let dims = grid.dims();
    let center = to_point(&s.soliton.center, dims, "soliton.center")?;
    let mut phi = match s.soliton.profile {
        Profile::Gaussian => profiles::gaussian(&grid, &center, s.soliton.width),
        Profile::Sech => profiles::sech(&grid, &center, s.soliton.width),
        Profile::RaisedCosine => profiles::raised_cosine(&grid, &center, s.soliton.width),
    };
    if !s.soliton.momentum.is_empty() {
        phi = profiles::with_momentum(&phi, &to_point(&s.soliton.momentum, dims, "soliton.momentum")?);
    }
    let state = SolitonState::new(phi, s.t0, pilot)?;
    sink.field("field_initial", state.field(), s.t0)?;

    let dt = s.dt.expect("defaults filled");
    let steps = steps_for(s.t0, s.t_final, dt);
    let h = (s.t_final - s.t0) / steps as f64;
    let every = s.sample_every.expect("defaults filled");
    sink.metric("steps", steps);
    sink.metric("dt_used", h);

    let (last, samples) = evolve_soliton_sampled(&state, h, steps, every)?;

    let mut header = vec!["t".to_string()];
    header.extend(axis_columns("x0_", dims));
    header.push("norm".into());
    header.extend(axis_columns("v_int_", dims));
    header.extend(axis_columns("v_drift_", dims));
    header.extend(axis_columns("v_dbb_", dims));
    header.extend(["drift_residual".into(), "shape_error".into(), "width_ratio".into()]);
    let blank = vec![String::new(); dims];
    let rows = samples.iter().map(|r| {
        let mut row = vec![num(r.t)];
        row.extend(point_cells(&r.x0, dims));
        row.push(num(r.norm));
        row.extend(point_cells(&r.v_int, dims));
        match &r.drift {
            Some(d) => {
                row.extend(point_cells(&d.v_drift, dims));
                row.extend(point_cells(&d.v_dbb, dims));
                row.push(num(d.residual));
            }
            None => {
                row.extend(blank.clone());
                row.extend(blank.clone());
                row.push(String::new());
            }
        }
        row.push(num(r.shape_error));
        row.push(num(r.width_ratio));
        row
    });
    sink.csv("trajectory.csv", &header, rows)?;
    sink.field("field_final", last.field(), last.time())?;

    let x_start = state.barycentre()?;
    let x_end = last.barycentre()?;
    let shift: Point<f64> = std::array::from_fn(|a| x_end[a] - x_start[a]);
    sink.metric("final_time", last.time());
    sink.metric("barycentre_initial", &x_start[..dims]);
    sink.metric("barycentre_final", &x_end[..dims]);
    sink.metric("shape_error", shape_error(last.field(), state.field(), &shift)?);
    sink.metric(
        "max_shape_error",
        samples.iter().map(|r| r.shape_error).fold(0.0, f64::max),
    );
    sink.metric(
        "max_relative_drift_residual",
        samples
            .iter()
            .filter_map(|r| r.drift.as_ref())
            .map(|d| d.residual / speed(&d.v_drift).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max),
    );
    sink.metric("norm_ratio_final", last.norm_sqr() / state.norm_sqr());
    sink.metric("max_width_ratio", last.max_width_ratio());
    let severity = s.breach_severity.expect("defaults filled");
    sink.metric("breach_severity", severity);
    sink.warnings.extend(last.warnings().iter().cloned());
    sink.breach = last.max_width_ratio() > severity;
    Ok(())
}

/// Closed-form barycentre for pilots with a uniform phase gradient.
fn reference_barycentre(spec: &PilotSpec<f64>, hbar_over_m: f64, x0: &[f64], t0: f64, t: f64) -> Option<Vec<f64>> {
    match spec {
        PilotSpec::PlaneWave { k } => Some(x0.iter().zip(k).map(|(x, k)| x + hbar_over_m * k * (t - t0)).collect()),
        PilotSpec::CoherentState {
            omega,
            amplitude,
            phase_offsets,
            ..
        } => Some(
            x0.iter()
                .enumerate()
                .map(|(a, x)| {
                    let delta = phase_offsets.as_ref().map_or(0.0, |p| p[a]);
                    let centre = |s: f64| amplitude[a] * (omega * s + delta).cos();
                    x + centre(t) - centre(t0)
                })
                .collect(),
        ),
        _ => None,
    }
}

fn run_gaussian(s: &GaussianScenario, sink: &mut Sink) -> Result<(), CliError> {
    let pilot = PilotWave::new(s.pilot.clone(), &s.constants)?;
    let p0 = GaussianSolitonParams::real(&s.a0, &s.x0, s.t0)?;
    let dims = p0.dims();
    let history = integrate_params(&p0, &pilot, s.t_final, s.dt.expect("defaults filled"))?;

    let mut header = vec!["t".to_string()];
    for a in AXES[..dims].iter() {
        for part in [
            "a_re",
            "a_im",
            "b_re",
            "b_im",
            "c_re",
            "c_im",
            "barycentre",
            "rms_width",
        ] {
            header.push(format!("{part}_{a}"));
        }
    }
    let rows = history.samples.iter().map(|p| {
        let mut row = vec![num(p.time)];
        for ax in &p.axes {
            row.extend(
                [
                    ax.a.re,
                    ax.a.im,
                    ax.b.re,
                    ax.b.im,
                    ax.c.re,
                    ax.c.im,
                    ax.barycentre(),
                    ax.rms_width(),
                ]
                .map(num),
            );
        }
        row
    });
    sink.csv("params.csv", &header, rows)?;

    let last = history.samples.last().expect("history holds the initial sample");
    sink.metric("steps", history.samples.len() - 1);
    sink.metric("max_a_drift", history.max_a_drift);
    sink.metric("max_im_b_drift", history.max_im_b_drift);
    sink.metric("barycentre_final", &last.barycentre()[..dims]);
    let hm = s.constants.hbar_over_m();
    if reference_barycentre(&s.pilot, hm, &s.x0, s.t0, s.t0).is_some() {
        let dev = history
            .samples
            .iter()
            .map(|p| {
                let want = reference_barycentre(&s.pilot, hm, &s.x0, s.t0, p.time).unwrap_or_default();
                let got = p.barycentre();
                want.iter().zip(got).fold(0.0, |m: f64, (w, g)| m.max((w - g).abs()))
            })
            .fold(0.0, f64::max);
        sink.metric("max_barycentre_deviation", dev);
    }
    if let Some(spec) = &s.grid {
        let grid: Grid<f64> = spec.build()?;
        sink.field("field_final", &params_to_field(last, &grid)?, last.time)?;
    }
    Ok(())
}

fn trajectory_rows(tr: &Trajectory<f64>, dims: usize, every: usize) -> Vec<Vec<String>> {
    let n = tr.len();
    (0..n)
        .filter(|&k| k % every == 0 || k + 1 == n)
        .map(|k| {
            let mut row = vec![tr.id.to_string(), num(tr.times[k])];
            row.extend(point_cells(&tr.positions[k], dims));
            row.extend(point_cells(&tr.velocities[k], dims));
            row
        })
        .collect()
}

fn run_trajectories(s: &TrajectoriesScenario, sink: &mut Sink) -> Result<(), CliError> {
    let dt = s.dt.expect("defaults filled");
    let every = s.record_every.expect("defaults filled");
    let (results, dims): (Vec<Result<Trajectory<f64>, CliError>>, usize) = match (&s.pilot, &s.orbitals) {
        (Some(spec), _) => {
            let pilot = PilotWave::new(spec.clone(), &s.constants)?;
            let dims = pilot.dims();
            let starts: Vec<Point<f64>> = match (&s.initial_positions, &s.ensemble) {
                (Some(xs), _) => xs
                    .iter()
                    .enumerate()
                    .map(|(i, x)| to_point(x, dims, &format!("initial_positions[{i}]")))
                    .collect::<Result<_, _>>()?,
                (None, Some(e)) => Ensemble::sample(&pilot, e.sampling.clone(), e.count, s.t0, s.seed)?.positions,
                (None, None) => unreachable!("validated"),
            };
            let results = starts
                .par_iter()
                .enumerate()
                .map(|(id, x0)| {
                    integrate_trajectory(&pilot, x0, s.t0, s.t_final, dt)
                        .map(|mut t| {
                            t.id = id;
                            t
                        })
                        .map_err(|e| CliError::Solver(format!("particle {id}: {e}")))
                })
                .collect();
            (results, dims)
        }
        (None, Some(orbitals)) => {
            let waves = orbitals
                .iter()
                .map(|o| PilotWave::new(o.clone(), &s.constants))
                .collect::<Result<Vec<_>, _>>()?;
            let mb = ManyBodyPilot::new(waves, s.symmetry.expect("defaults filled"))?;
            let dims = mb.dims();
            let xs = s.initial_positions.as_ref().expect("validated");
            let starts = xs
                .iter()
                .enumerate()
                .map(|(i, x)| to_point(x, dims, &format!("initial_positions[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let results = match integrate_configuration(&mb, &starts, s.t0, s.t_final, dt) {
                Ok(trs) => trs.into_iter().map(Ok).collect(),
                Err(e) => vec![Err(CliError::Solver(format!("configuration: {e}")))],
            };
            (results, dims)
        }
        (None, None) => unreachable!("validated"),
    };

    let mut header = vec!["id".to_string(), "t".to_string()];
    header.extend(axis_columns("", dims));
    header.extend(axis_columns("v", dims));
    let rows: Vec<Vec<String>> = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .flat_map(|tr| trajectory_rows(tr, dims, every))
        .collect();
    sink.csv("trajectories.csv", &header, rows)?;

    let finished: Vec<Point<f64>> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().and_then(|t| t.last_position()))
        .collect();
    sink.metric("particles", results.len());
    sink.metric("completed", finished.len());
    if !finished.is_empty() {
        let mean: Vec<f64> = (0..dims)
            .map(|a| finished.iter().map(|p| p[a]).sum::<f64>() / finished.len() as f64)
            .collect();
        sink.metric("mean_final_position", mean);
    }
    for r in results {
        if let Err(e) = r {
            sink.errors.push(e.to_string());
        }
    }
    Ok(())
}

fn build_bins(spec: &BinsSpec) -> Result<Bins<f64>, CliError> {
    Ok(match (&spec.cells, spec.width) {
        (Some(cells), _) => Bins::new(&spec.lo, &spec.hi, cells)?,
        (None, Some(w)) => Bins::with_width(&spec.lo, &spec.hi, w)?,
        (None, None) => Bins::default_for(&spec.lo, &spec.hi)?,
    })
}

fn run_relax(s: &RelaxScenario, sink: &mut Sink) -> Result<(), CliError> {
    let pilot = PilotWave::new(s.pilot.clone(), &s.constants)?;
    let bins = build_bins(&s.bins)?;
    let ensemble = Ensemble::sample(&pilot, s.ensemble.sampling.clone(), s.ensemble.count, s.t0, s.seed)?;
    let intervals = s.intervals.expect("defaults filled");
    let times: Vec<f64> = (0..=intervals)
        .map(|k| {
            if k == intervals {
                s.t_final
            } else {
                s.t0 + (s.t_final - s.t0) * k as f64 / intervals as f64
            }
        })
        .collect();
    let run = evolve_ensemble(&ensemble, &pilot, &times, s.dt.expect("defaults filled"))?;
    let mut h = Vec::with_capacity(times.len());
    for (t, xs) in run.times.iter().zip(&run.positions) {
        h.push(relaxation_h(xs, &pilot, *t, &bins)?);
    }
    let header = ["t".to_string(), "h".to_string()];
    let rows = times.iter().zip(&h).map(|(t, v)| vec![num(*t), num(*v)]);
    sink.csv("relaxation.csv", &header, rows)?;
    sink.metric("cells", bins.len());
    sink.metric("h_initial", h[0]);
    sink.metric("h_final", h[h.len() - 1]);
    sink.metric("h_ratio", h[h.len() - 1] / h[0]);
    Ok(())
}

fn run_phases(s: &PhasesScenario, sink: &mut Sink) -> Result<(), CliError> {
    let c = &s.constants;
    let cfg = &s.experiment;
    let header = ["model", "k", "l", "i", "j", "theta"].map(String::from);
    let mut rows = Vec::with_capacity(20);
    let standard = theta_standard(cfg, c)?;
    for (i, row) in standard.iter().enumerate() {
        for (j, th) in row.iter().enumerate() {
            rows.push(vec![
                "standard".into(),
                String::new(),
                String::new(),
                BRANCH_LABELS[i].into(),
                BRANCH_LABELS[j].into(),
                num(*th),
            ]);
        }
    }
    for k in 0..2 {
        for l in 0..2 {
            let table = theta_soliton(cfg, k, l, c)?;
            for (i, row) in table.iter().enumerate() {
                for (j, th) in row.iter().enumerate() {
                    rows.push(vec![
                        "soliton".into(),
                        BRANCH_LABELS[k].into(),
                        BRANCH_LABELS[l].into(),
                        BRANCH_LABELS[i].into(),
                        BRANCH_LABELS[j].into(),
                        num(*th),
                    ]);
                }
            }
        }
    }
    sink.csv("phases.csv", &header, rows)?;

    let rho_standard = final_state_standard(cfg, c)?;
    let rho_soliton = final_state_soliton(cfg, None, c)?;
    let report = tomography_report(&rho_standard, &rho_soliton);
    sink.json(
        "density_matrices.json",
        &json!({
            "basis": ["++", "+-", "-+", "--"],
            "standard": rho_standard,
            "soliton": rho_soliton,
            "branch_probabilities": cfg.branch_probabilities(),
        }),
    )?;
    sink.metric("purity_standard", report.purity_standard);
    sink.metric("purity_soliton", report.purity_soliton);
    sink.metric("fidelity", report.fidelity);
    sink.metric("negativity_standard", report.negativity_standard);
    sink.metric("negativity_soliton", report.negativity_soliton);
    sink.metric("phase_differences", report.phase_differences);
    Ok(())
}

fn run_selfgrav(s: &SelfgravScenario, sink: &mut Sink) -> Result<(), CliError> {
    let c = &s.constants;
    let sphere = SelfGravitySphere::new(s.sphere.mass, s.sphere.radius)?;
    let mut rows = Vec::with_capacity(s.distances.len());
    for &d in &s.distances {
        let potential = sphere_potential(&sphere, d, c)?;
        let dephasing = if d > sphere.radius {
            num(single_device_dephasing(&sphere, d, s.tau, s.alpha, s.beta, c)?.magnitude)
        } else {
            String::new()
        };
        rows.push(vec![num(d), num(potential), dephasing]);
    }
    let header = ["d", "potential", "dephasing"].map(String::from);
    sink.csv("selfgrav.csv", &header, rows)?;
    let m = sphere.mass;
    sink.metric("compton_radius", compton_radius(m, c)?);
    sink.metric("self_coupling_ratio", self_coupling_ratio(m, c)?);
    sink.metric("spring_constants", soliton_spring_constant(m, c)?);
    sink.metric("potential_at_centre", sphere_potential(&sphere, 0.0, c)?);
    Ok(())
}
