//! Experiment harness: wires the forward model, surrogates, and samplers
//! into the named sweeps, with seeded determinism and CSV/SVG outputs.
//!
//! Every runner builds its own [`EllipticContext`] (one shared PDE-solve
//! counter per run), attributes solve counts to phases, and reconciles the
//! per-phase sums against the counter in the returned [`RunReport`]. Output
//! files carry `# key=value` metadata headers with the config hash and seed;
//! identical configs produce byte-identical files.

pub mod config;
pub mod csvout;
pub mod svg;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{derive_seed, ExperimentConfig};

use crate::bayes::{self, ClaimRow, PosteriorSpec, ToyKind, ToyModel};
use crate::error::{Error, Result};
use crate::exec;
use crate::fem::{SolveCounter, SolverSettings};
use crate::forward::{FemForward, ForwardModel, ObservedForward};
use crate::gauss_field::{kl_decompose, CovarianceSpec, KlBasis};
use crate::mesh::{build_mesh, default_observation, Mesh, ObservationOperator};
use crate::pce::{self, PceModel};
use crate::samplers::{
    conditional_mean, estimation_error, find_mode, implicit_sample, rw_metropolis,
};

use csvout::{field_csv, fmt_f64, CsvDoc};
use svg::{Chart, Series};

/// The spatial probe used by the pointwise error table: grid point
/// (0.5, 0.5625), i.e. node (8, 9) of the 16-cell mesh.
pub const TABLE1_POINT: (f64, f64) = (0.5, 0.5625);

/// Shared infrastructure for one experiment run.
pub struct EllipticContext {
    pub mesh: Mesh,
    pub basis: KlBasis,
    pub observation: ObservationOperator,
    pub settings: SolverSettings,
}

impl EllipticContext {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let mesh = build_mesh(cfg.cells_per_side)?;
        let basis = kl_decompose(&CovarianceSpec::default(), &mesh, cfg.parameter_dim)?;
        let observation = default_observation(&mesh)?;
        Ok(EllipticContext {
            mesh,
            basis,
            observation,
            settings: SolverSettings::default(),
        })
    }

    pub fn counter(&self) -> &SolveCounter {
        &self.settings.counter
    }

    pub fn fem_forward(&self) -> FemForward<'_> {
        FemForward::new(&self.mesh, &self.basis, self.settings.clone())
    }
}

/// Cost attribution and reconciliation for one run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub experiment: String,
    /// `(phase name, PDE solves consumed)`
    pub phases: Vec<(String, u64)>,
    /// final value of the run's solve counter
    pub total_pde_solves: u64,
    pub wall_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    /// Phase-attributed counts must add up to the counter exactly.
    pub fn reconciles(&self) -> bool {
        self.phases.iter().map(|p| p.1).sum::<u64>() == self.total_pde_solves
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "experiment {}: {} PDE solves in {:.2} s\n",
            self.experiment, self.total_pde_solves, self.wall_seconds
        );
        for (name, count) in &self.phases {
            out.push_str(&format!("  {name}: {count}\n"));
        }
        out.push_str(&format!(
            "  reconciled: {}\n",
            if self.reconciles() { "yes" } else { "NO" }
        ));
        for path in &self.outputs {
            out.push_str(&format!("  wrote {}\n", path.display()));
        }
        out
    }
}

struct PhaseTracker<'a> {
    counter: &'a SolveCounter,
    last: u64,
    phases: Vec<(String, u64)>,
}

impl<'a> PhaseTracker<'a> {
    fn new(counter: &'a SolveCounter) -> Self {
        PhaseTracker {
            counter,
            last: counter.count(),
            phases: Vec::new(),
        }
    }

    fn mark(&mut self, name: &str) {
        let now = self.counter.count();
        self.phases.push((name.to_string(), now - self.last));
        self.last = now;
    }
}

fn build_surrogates(
    ctx: &EllipticContext,
    cfg: &ExperimentConfig,
    tracker: &mut PhaseTracker<'_>,
) -> Result<Vec<(u32, PceModel)>> {
    let mut surrogates = Vec::with_capacity(cfg.orders.len());
    for &order in &cfg.orders {
        let model = pce::build_pce(&ctx.fem_forward(), order)?;
        tracker.mark(&format!("pce build N={order}"));
        surrogates.push((order, model));
    }
    Ok(surrogates)
}

// ---------------------------------------------------------------------------
// build-pce
// ---------------------------------------------------------------------------

pub struct BuildPceRun {
    pub model: PceModel,
    pub report: RunReport,
}

/// Builds the order-`N` surrogate of the full-field forward map and persists
/// the coefficient table plus a provenance sidecar.
pub fn run_build_pce(cfg: &ExperimentConfig, order: u32) -> Result<BuildPceRun> {
    let started = Instant::now();
    let ctx = EllipticContext::build(cfg)?;
    let mut tracker = PhaseTracker::new(ctx.counter());

    let model = pce::build_pce(&ctx.fem_forward(), order)?;
    tracker.mark(&format!("pce build N={order}"));

    std::fs::create_dir_all(&cfg.out_dir)?;
    let table_path = cfg.out_dir.join(format!("pce_n{order}.csv"));
    let mut buf = Vec::new();
    model.write_csv(&mut buf)?;
    std::fs::write(&table_path, &buf)?;

    let sidecar_path = cfg.out_dir.join(format!("pce_n{order}.provenance.txt"));
    let sidecar = format!(
        "order={}\nquadrature_points_per_dim={}\nforward_solves={}\nconfig_hash={:016x}\n",
        order,
        model.provenance().quadrature_points_per_dim,
        model.provenance().forward_solves,
        cfg.hash()
    );
    std::fs::write(&sidecar_path, sidecar)?;

    Ok(BuildPceRun {
        model,
        report: RunReport {
            experiment: "build-pce".into(),
            phases: tracker.phases,
            total_pde_solves: ctx.counter().count(),
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs: vec![table_path, sidecar_path],
        },
    })
}

// ---------------------------------------------------------------------------
// table1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Table1Row {
    pub theta1: f64,
    /// relative error (percent) per configured order
    pub errors_pct: Vec<f64>,
    pub fem_value: f64,
    /// set when the solution magnitude at the probe is below the noise sd
    pub near_zero_signal: bool,
}

pub struct Table1Run {
    pub rows: Vec<Table1Row>,
    pub report: RunReport,
}

/// Relative pointwise error of the surrogates at (0.5, 0.5625) over the θ₁
/// sweep (default −8..=2), θ₂ = −1, θ₃ = 1.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<Table1Run> {
    let started = Instant::now();
    let ctx = EllipticContext::build(cfg)?;
    let mut tracker = PhaseTracker::new(ctx.counter());

    let surrogates = build_surrogates(&ctx, cfg, &mut tracker)?;

    let fem = ctx.fem_forward();
    let sweep = cfg.theta1_values((-8, 2));
    let mut rows = Vec::with_capacity(sweep.len());
    for &t1 in &sweep {
        let theta = [t1 as f64, cfg.theta2, cfg.theta3];
        let mut errors = Vec::with_capacity(surrogates.len());
        let mut fem_value = f64::NAN;
        for (_, model) in &surrogates {
            let cmp = pce::pointwise_comparison(model, &fem, &ctx.mesh, &theta, TABLE1_POINT)?;
            errors.push(cmp.relative_error_pct);
            fem_value = cmp.fem_value;
        }
        // inference is hopeless once the observable sinks to the noise floor
        rows.push(Table1Row {
            theta1: t1 as f64,
            errors_pct: errors,
            fem_value,
            near_zero_signal: fem_value.abs() < 2.0 * cfg.noise_sd,
        });
    }
    tracker.mark("pointwise comparisons");

    let mut doc = CsvDoc::new("table1", cfg);
    let order_cols: Vec<String> = cfg.orders.iter().map(|o| format!("err_pct_n{o}")).collect();
    let mut cols = vec!["theta1".to_string()];
    cols.extend(order_cols);
    cols.push("fem_value".into());
    cols.push("near_zero_signal".into());
    doc.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &rows {
        let mut fields = vec![fmt_f64(row.theta1)];
        fields.extend(row.errors_pct.iter().map(|&e| fmt_f64(e)));
        fields.push(fmt_f64(row.fem_value));
        fields.push(row.near_zero_signal.to_string());
        doc.row(&fields);
    }
    let path = doc.write_to(&cfg.out_dir.join("table1.csv"))?;

    Ok(Table1Run {
        rows,
        report: RunReport {
            experiment: "table1".into(),
            phases: tracker.phases,
            total_pde_solves: ctx.counter().count(),
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs: vec![path],
        },
    })
}

// ---------------------------------------------------------------------------
// figure1
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Figure1Case {
    pub theta: [f64; 3],
    pub fem_max_abs: f64,
    /// per configured order: max-abs discrepancy against the FEM field
    pub max_abs_discrepancy: Vec<f64>,
}

pub struct Figure1Run {
    pub cases: Vec<Figure1Case>,
    pub report: RunReport,
}

/// Full-field contours of the FEM solution and its surrogates at
/// θ = (−2, −1, 1) and θ = (−8, −1, 1).
pub fn run_figure1(cfg: &ExperimentConfig) -> Result<Figure1Run> {
    let started = Instant::now();
    let ctx = EllipticContext::build(cfg)?;
    let mut tracker = PhaseTracker::new(ctx.counter());

    let surrogates = build_surrogates(&ctx, cfg, &mut tracker)?;

    let fem = ctx.fem_forward();
    let mut outputs = Vec::new();
    let mut cases = Vec::new();
    for theta1 in [-2.0f64, -8.0] {
        let theta = [theta1, cfg.theta2, cfg.theta3];
        let u_fem = fem.evaluate(&theta)?;
        let fem_max_abs = u_fem.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let tag = format!("theta{theta1}");
        outputs.push(field_csv(
            "figure1",
            cfg,
            &ctx.mesh,
            &ctx.mesh.expand_interior(&u_fem)?,
            &cfg.out_dir.join(format!("figure1_{tag}_fem.csv")),
        )?);
        let mut discrepancies = Vec::new();
        for (order, model) in &surrogates {
            let u_pce = model.evaluate(&theta)?;
            let disc = u_fem
                .iter()
                .zip(&u_pce)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            discrepancies.push(disc);
            outputs.push(field_csv(
                "figure1",
                cfg,
                &ctx.mesh,
                &ctx.mesh.expand_interior(&u_pce)?,
                &cfg.out_dir.join(format!("figure1_{tag}_n{order}.csv")),
            )?);
        }
        cases.push(Figure1Case {
            theta,
            fem_max_abs,
            max_abs_discrepancy: discrepancies,
        });
    }
    tracker.mark("field evaluations");

    Ok(Figure1Run {
        cases,
        report: RunReport {
            experiment: "figure1".into(),
            phases: tracker.phases,
            total_pde_solves: ctx.counter().count(),
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs,
        },
    })
}

// ---------------------------------------------------------------------------
// figure2
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct SamplerStats {
    pub error: f64,
    pub ess: f64,
    pub degenerate: bool,
    pub posterior_evals: u64,
}

#[derive(Debug, Clone)]
pub struct Figure2Row {
    pub theta1: f64,
    pub exact: SamplerStats,
    /// one entry per configured order
    pub surrogate: Vec<SamplerStats>,
}

pub struct Figure2Run {
    pub rows: Vec<Figure2Row>,
    pub report: RunReport,
}

fn sample_posterior(
    spec: &PosteriorSpec<'_>,
    theta_true: &[f64],
    particles: usize,
    mode_tol: f64,
    xi_seed: u64,
) -> Result<SamplerStats> {
    let mode = find_mode(spec, &vec![0.0; spec.parameter_dim()], mode_tol)?;
    let ensemble = implicit_sample(spec, &mode, particles, xi_seed)?;
    let estimate = conditional_mean(&ensemble);
    Ok(SamplerStats {
        error: estimation_error(&estimate, theta_true),
        ess: ensemble.ess,
        degenerate: ensemble.degenerate,
        posterior_evals: ensemble.eval_count,
    })
}

/// Estimation error of implicit sampling against the exact posterior and the
/// PCE surrogates over the θ₁ sweep (default −10..=2). Data are synthesized
/// per sweep point with seeds derived from the master seed; the ξ streams
/// are shared across the three posteriors of a point.
pub fn run_figure2(cfg: &ExperimentConfig) -> Result<Figure2Run> {
    let started = Instant::now();
    let ctx = EllipticContext::build(cfg)?;
    let mut tracker = PhaseTracker::new(ctx.counter());

    let surrogates = build_surrogates(&ctx, cfg, &mut tracker)?;

    let fem = ctx.fem_forward();
    let observed_fem = ObservedForward::new(&fem, &ctx.observation);
    let sweep = cfg.theta1_values((-10, 2));

    let results = exec::map_indexed(sweep.len(), |i| -> Result<Figure2Row> {
        let theta1 = sweep[i] as f64;
        let theta_true = [theta1, cfg.theta2, cfg.theta3];
        // keyed by the θ₁ value, not the sweep position, so partial sweeps
        // reproduce the same per-point data
        let data_seed = derive_seed(cfg.seed, 1, sweep[i] as u64);
        let xi_seed = derive_seed(cfg.seed, 2, sweep[i] as u64);
        let data = bayes::synthesize_data(&observed_fem, &theta_true, cfg.noise_sd, data_seed)?;

        let spec = PosteriorSpec::new(data.clone(), cfg.noise_sd, &observed_fem)?;
        let exact = sample_posterior(&spec, &theta_true, cfg.particles, cfg.mode_tol, xi_seed)?;

        let mut surrogate = Vec::with_capacity(surrogates.len());
        for (_, model) in &surrogates {
            let observed_pce = ObservedForward::new(model, &ctx.observation);
            let spec_n = PosteriorSpec::new(data.clone(), cfg.noise_sd, &observed_pce)?;
            surrogate.push(sample_posterior(
                &spec_n,
                &theta_true,
                cfg.particles,
                cfg.mode_tol,
                xi_seed,
            )?);
        }
        Ok(Figure2Row {
            theta1,
            exact,
            surrogate,
        })
    });
    let rows: Vec<Figure2Row> = results.into_iter().collect::<Result<_>>()?;
    tracker.mark("sweep (data synthesis, mode finding, sampling)");

    let mut doc = CsvDoc::new("figure2", cfg);
    let mut cols = vec![
        "theta1".to_string(),
        "err_exact".into(),
        "ess_exact".into(),
        "degenerate_exact".into(),
        "evals_exact".into(),
    ];
    for (order, _) in &surrogates {
        cols.push(format!("err_n{order}"));
        cols.push(format!("ess_n{order}"));
        cols.push(format!("degenerate_n{order}"));
    }
    doc.header(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &rows {
        let mut fields = vec![
            fmt_f64(row.theta1),
            fmt_f64(row.exact.error),
            fmt_f64(row.exact.ess),
            row.exact.degenerate.to_string(),
            row.exact.posterior_evals.to_string(),
        ];
        for stats in &row.surrogate {
            fields.push(fmt_f64(stats.error));
            fields.push(fmt_f64(stats.ess));
            fields.push(stats.degenerate.to_string());
        }
        doc.row(&fields);
    }
    let csv_path = doc.write_to(&cfg.out_dir.join("figure2.csv"))?;

    let palette = ["#1f6fb2", "#2ab0a4", "#7d4ab2", "#b2572a"];
    let mut series = vec![Series {
        name: "exact posterior".into(),
        color: palette[0],
        points: rows.iter().map(|r| (r.theta1, r.exact.error)).collect(),
    }];
    for (k, (order, _)) in surrogates.iter().enumerate() {
        series.push(Series {
            name: format!("surrogate N={order}"),
            color: palette[(k + 1) % palette.len()],
            points: rows
                .iter()
                .map(|r| (r.theta1, r.surrogate[k].error))
                .collect(),
        });
    }
    let chart = Chart {
        title: "Estimation error vs theta1".into(),
        x_label: "theta1".into(),
        y_label: "|| estimate - truth ||".into(),
        log_x: false,
        log_y: false,
        series,
    };
    let svg_path = cfg.out_dir.join("figure2.svg");
    std::fs::write(&svg_path, chart.render())?;

    Ok(Figure2Run {
        rows,
        report: RunReport {
            experiment: "figure2".into(),
            phases: tracker.phases,
            total_pde_solves: ctx.counter().count(),
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs: vec![csv_path, svg_path],
        },
    })
}

// ---------------------------------------------------------------------------
// fields (figure 3)
// ---------------------------------------------------------------------------

pub struct FieldsRun {
    pub truth_theta: [f64; 3],
    /// grid-RMS error of the log-permeability reconstructed from the
    /// exact-posterior estimate
    pub exact_rms_error: f64,
    /// same for the N = max(orders) surrogate sampled by Metropolis
    pub surrogate_rms_error: f64,
    pub report: RunReport,
}

/// Log-permeability reconstructions at a strongly informative parameter
/// (default θ = (−15, −1, 1)): truth, exact-posterior implicit-sampling
/// estimate, and the highest-order surrogate sampled by random-walk
/// Metropolis.
pub fn run_fields(cfg: &ExperimentConfig, theta1_true: f64) -> Result<FieldsRun> {
    let started = Instant::now();
    let ctx = EllipticContext::build(cfg)?;
    let mut tracker = PhaseTracker::new(ctx.counter());

    let order = *cfg.orders.iter().max().ok_or_else(|| {
        Error::Config("fields experiment needs at least one PCE order".into())
    })?;
    let model = pce::build_pce(&ctx.fem_forward(), order)?;
    tracker.mark(&format!("pce build N={order}"));

    let theta_true = [theta1_true, cfg.theta2, cfg.theta3];
    let fem = ctx.fem_forward();
    let observed_fem = ObservedForward::new(&fem, &ctx.observation);
    let data = bayes::synthesize_data(
        &observed_fem,
        &theta_true,
        cfg.noise_sd,
        derive_seed(cfg.seed, 4, 0),
    )?;
    tracker.mark("data synthesis");

    let spec = PosteriorSpec::new(data.clone(), cfg.noise_sd, &observed_fem)?;
    let mode = find_mode(&spec, &[0.0; 3], cfg.mode_tol)?;
    let ensemble = implicit_sample(&spec, &mode, cfg.particles, derive_seed(cfg.seed, 2, 0))?;
    let exact_estimate = conditional_mean(&ensemble);
    tracker.mark("exact-posterior implicit sampling");

    let observed_pce = ObservedForward::new(&model, &ctx.observation);
    let spec_n = PosteriorSpec::new(data, cfg.noise_sd, &observed_pce)?;
    let chain = rw_metropolis(
        &spec_n,
        &[0.0; 3],
        cfg.metropolis_steps,
        cfg.metropolis_step_sd,
        derive_seed(cfg.seed, 3, 0),
    )?;
    let burn = (chain.states.len() as f64 * cfg.metropolis_burn_in) as usize;
    let kept = &chain.states[burn..];
    let mut surrogate_estimate = vec![0.0; 3];
    for state in kept {
        for (acc, &v) in surrogate_estimate.iter_mut().zip(state) {
            *acc += v;
        }
    }
    surrogate_estimate
        .iter_mut()
        .for_each(|v| *v /= kept.len() as f64);
    tracker.mark("surrogate Metropolis sampling");

    let truth_field = ctx.basis.field_from_params(&theta_true)?;
    let exact_field = ctx.basis.field_from_params(&exact_estimate)?;
    let surrogate_field = ctx.basis.field_from_params(&surrogate_estimate)?;

    let rms = |a: &[f64], b: &[f64]| -> f64 {
        (a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / a.len() as f64)
            .sqrt()
    };
    let exact_rms_error = rms(&exact_field, &truth_field);
    let surrogate_rms_error = rms(&surrogate_field, &truth_field);

    let outputs = vec![
        field_csv("fields", cfg, &ctx.mesh, &truth_field, &cfg.out_dir.join("fields_truth.csv"))?,
        field_csv("fields", cfg, &ctx.mesh, &exact_field, &cfg.out_dir.join("fields_exact.csv"))?,
        field_csv(
            "fields",
            cfg,
            &ctx.mesh,
            &surrogate_field,
            &cfg.out_dir.join(format!("fields_n{order}.csv")),
        )?,
    ];

    Ok(FieldsRun {
        truth_theta: theta_true,
        exact_rms_error,
        surrogate_rms_error,
        report: RunReport {
            experiment: "fields".into(),
            phases: tracker.phases,
            total_pde_solves: ctx.counter().count(),
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs,
        },
    })
}

// ---------------------------------------------------------------------------
// smallnoise
// ---------------------------------------------------------------------------

pub struct SmallnoiseRun {
    pub claim1: Vec<ClaimRow>,
    pub claim2: Vec<ClaimRow>,
    pub report: RunReport,
}

/// Small-noise claim curves for the configured toy model; no PDE solves.
pub fn run_smallnoise(cfg: &ExperimentConfig) -> Result<SmallnoiseRun> {
    let started = Instant::now();
    let toy = ToyModel {
        kind: match cfg.toy.as_str() {
            "linear" => ToyKind::Linear,
            "cubic" => ToyKind::Cubic {
                coeff: cfg.toy_cubic_coeff,
            },
            other => return Err(Error::Config(format!("unknown toy model: {other}"))),
        },
        data: cfg.toy_data,
        noise_sd: cfg.toy_noise_sd,
    };
    let mut eps = cfg.eps_list.clone();
    eps.sort_by(|a, b| b.total_cmp(a));

    let claim1 = bayes::claim1_curve(&toy, &eps)?;
    let claim2 = bayes::claim2_curve(&toy, cfg.toy_order, &eps)?;

    let mut outputs = Vec::new();
    for (name, rows) in [("claim1", &claim1), ("claim2", &claim2)] {
        let mut doc = CsvDoc::new("smallnoise", cfg);
        doc.comment(&format!(
            "toy={} d={} sigma={} c={} order={}",
            cfg.toy, cfg.toy_data, cfg.toy_noise_sd, cfg.toy_cubic_coeff, cfg.toy_order
        ));
        doc.header(&["eps", "scaled_kld", "analytic_limit"]);
        for row in rows.iter() {
            doc.row(&[fmt_f64(row.eps), fmt_f64(row.scaled_kld), fmt_f64(row.limit)]);
        }
        outputs.push(doc.write_to(&cfg.out_dir.join(format!("smallnoise_{name}.csv")))?);
    }

    let chart = Chart {
        title: "Scaled KLD vs eps".into(),
        x_label: "eps".into(),
        y_label: "eps * KLD".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series {
                name: "claim 1: prior vs posterior".into(),
                color: "#1f6fb2",
                points: claim1.iter().map(|r| (r.eps, r.scaled_kld)).collect(),
            },
            Series {
                name: "claim 2: surrogate vs posterior".into(),
                color: "#b2572a",
                points: claim2.iter().map(|r| (r.eps, r.scaled_kld)).collect(),
            },
            Series {
                name: "claim 1 limit".into(),
                color: "#9db2c9",
                points: claim1.iter().map(|r| (r.eps, r.limit)).collect(),
            },
            Series {
                name: "claim 2 limit".into(),
                color: "#c9a89d",
                points: claim2.iter().map(|r| (r.eps, r.limit)).collect(),
            },
        ],
    };
    let svg_path = cfg.out_dir.join("smallnoise.svg");
    if let Some(parent) = svg_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&svg_path, chart.render())?;
    outputs.push(svg_path);

    Ok(SmallnoiseRun {
        claim1,
        claim2,
        report: RunReport {
            experiment: "smallnoise".into(),
            phases: vec![("toy quadrature".into(), 0)],
            total_pde_solves: 0,
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs,
        },
    })
}

// ---------------------------------------------------------------------------
// cost
// ---------------------------------------------------------------------------

pub struct CostRun {
    /// posterior (= PDE) evaluations of the implicit-sampling run on one
    /// elliptic datum, measured on the solve counter
    pub sampling_pde_solves: u64,
    pub report: RunReport,
}

/// Cost accounting: PCE build counts for every configured order and the
/// posterior-evaluation cost of implicit sampling on one elliptic datum
/// (θ_true = (−2, −1, 1)).
pub fn run_cost_report(cfg: &ExperimentConfig) -> Result<CostRun> {
    let started = Instant::now();
    let ctx = EllipticContext::build(cfg)?;
    let mut tracker = PhaseTracker::new(ctx.counter());

    for &order in &cfg.orders {
        let model = pce::build_pce(&ctx.fem_forward(), order)?;
        debug_assert_eq!(
            model.provenance().forward_solves,
            (order as u64 + 2).pow(3)
        );
        tracker.mark(&format!("pce build N={order}"));
    }

    let theta_true = [-2.0, cfg.theta2, cfg.theta3];
    let fem = ctx.fem_forward();
    let observed_fem = ObservedForward::new(&fem, &ctx.observation);
    let data = bayes::synthesize_data(
        &observed_fem,
        &theta_true,
        cfg.noise_sd,
        derive_seed(cfg.seed, 1, 0),
    )?;
    tracker.mark("data synthesis");

    let before_sampling = ctx.counter().count();
    let spec = PosteriorSpec::new(data, cfg.noise_sd, &observed_fem)?;
    let mode = find_mode(&spec, &[0.0; 3], cfg.mode_tol)?;
    let ensemble = implicit_sample(&spec, &mode, cfg.particles, derive_seed(cfg.seed, 2, 0))?;
    let sampling_pde_solves = ctx.counter().count() - before_sampling;
    tracker.mark("implicit sampling (mode search + weights)");

    let mut doc = CsvDoc::new("cost", cfg);
    doc.comment(&format!(
        "implicit sampling posterior evals (sampler bookkeeping): {}",
        ensemble.eval_count
    ));
    doc.header(&["phase", "pde_solves"]);
    for (name, count) in &tracker.phases {
        doc.row(&[name.clone(), count.to_string()]);
    }
    doc.row(&["total".into(), ctx.counter().count().to_string()]);
    let path = doc.write_to(&cfg.out_dir.join("cost.csv"))?;

    Ok(CostRun {
        sampling_pde_solves,
        report: RunReport {
            experiment: "cost".into(),
            phases: tracker.phases,
            total_pde_solves: ctx.counter().count(),
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs: vec![path],
        },
    })
}
