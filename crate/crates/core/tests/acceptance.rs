//! Acceptance suite: one test per acceptance criterion, each printing a
//! single `ACCEPTANCE <n> <name>: PASS/FAIL` line with the measured values.
//!
//! Criterion 6c (surrogate-vs-exact error ratio at θ₁ ∈ {−6, −5}) is known
//! to be unattainable with the pinned √λ KL scaling: the exact posterior at
//! those sweep points is sharp enough that implicit sampling lands within
//! ~5e-3 of the truth, while the N = 8 surrogate's minimizer is displaced
//! ~0.02–0.08 by its own truncation error, so the per-point ratio exceeds 2
//! for every noise realization. The criterion is asserted as stated and the
//! failure is reported, not masked.

use chaos_core::bayes::{
    self, claim1_curve, claim2_curve, laplace_normalizer_residual, PosteriorSpec, ToyKind,
    ToyModel,
};
use chaos_core::experiments::{
    derive_seed, run_cost_report, run_figure2, run_table1, EllipticContext, ExperimentConfig,
};
use chaos_core::fem::{assemble, solve, SolverSettings};
use chaos_core::forward::{FnForward, ForwardModel, ObservedForward};
use chaos_core::gauss_field::{kl_decompose, CovarianceSpec};
use chaos_core::hermite::{multi_indices, phi_eval, tensor_rule};
use chaos_core::mesh::build_mesh;
use chaos_core::pce::build_pce;
use chaos_core::samplers::{conditional_mean, find_mode, implicit_sample, rw_metropolis};

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn scratch_config(tag: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.out_dir = std::env::temp_dir().join(format!("chaos-acceptance-{tag}-{}", std::process::id()));
    cfg
}

/// Criterion 1: Gram matrix of the m=3, N=8 basis under the 10-point tensor
/// rule is the identity to 1e-10, and Gaussian moments up to degree 18 are
/// reproduced to 1e-9 (relative; odd moments vanish at the cancellation
/// scale of the adjacent even moment).
#[test]
fn criterion_1_basis_and_quadrature() {
    let indices = multi_indices(3, 8).unwrap();
    let rule = tensor_rule(3, 10).unwrap();
    let p = indices.len();
    assert_eq!(p, 165);

    let mut gram = vec![vec![0.0f64; p]; p];
    for k in 0..rule.len() {
        let (theta, w) = rule.node(k);
        let phis: Vec<f64> = indices.iter().map(|i| phi_eval(i, &theta).unwrap()).collect();
        for a in 0..p {
            for b in 0..p {
                gram[a][b] += w * phis[a] * phis[b];
            }
        }
    }
    let mut gram_defect = 0.0f64;
    for a in 0..p {
        for b in 0..p {
            let want = if a == b { 1.0 } else { 0.0 };
            gram_defect = gram_defect.max((gram[a][b] - want).abs());
        }
    }

    let one_d = chaos_core::hermite::gauss_hermite_rule(10).unwrap();
    let moment = |degree: u32| -> f64 {
        if degree % 2 == 1 {
            return 0.0;
        }
        let mut m = 1.0;
        let mut k = 1;
        while k < degree {
            m *= k as f64;
            k += 2;
        }
        m
    };
    let mut moment_defect = 0.0f64;
    for degree in 0..=18u32 {
        let got = one_d.integrate(|x| x.powi(degree as i32));
        let want = moment(degree);
        let scale = if degree % 2 == 0 {
            want.abs().max(1.0)
        } else {
            moment(degree + 1)
        };
        moment_defect = moment_defect.max((got - want).abs() / scale);
    }

    let ok = gram_defect <= 1e-10 && moment_defect <= 1e-9;
    println!(
        "ACCEPTANCE 1 basis/quadrature: {} (gram defect {gram_defect:.3e}, moment defect {moment_defect:.3e})",
        verdict(ok)
    );
    assert!(ok, "gram defect {gram_defect:.3e}, moment defect {moment_defect:.3e}");
}

/// Criterion 2: the Y≡0 solution matches ½·sin(πx₁)sin(πx₂) to 1% relative
/// L² error at h = 1/16, with a 4 ± 0.5 error ratio from h = 1/8.
#[test]
fn criterion_2_fem_oracle() {
    let analytic = |x: f64, y: f64| 0.5 * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin();
    let mut errors = Vec::new();
    for n in [8usize, 16] {
        let mesh = build_mesh(n).unwrap();
        let y = vec![0.0; mesh.num_nodes()];
        let problem = assemble(&mesh, &y, &SolverSettings::default()).unwrap();
        let sol = solve(&problem).unwrap();
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for id in 0..mesh.num_nodes() {
            if let Some(ii) = mesh.interior_index(id) {
                let (x, yy) = mesh.node_coords(id);
                let exact = analytic(x, yy);
                err2 += (sol.interior[ii] - exact).powi(2);
                ref2 += exact * exact;
            }
        }
        errors.push((err2 / ref2).sqrt());
    }
    let ratio = errors[0] / errors[1];
    let ok = errors[1] <= 0.01 && (ratio - 4.0).abs() <= 0.5;
    println!(
        "ACCEPTANCE 2 fem-oracle: {} (rel L2 at h=1/16: {:.4e}, ratio {ratio:.3})",
        verdict(ok),
        errors[1]
    );
    assert!(ok, "rel L2 {:.4e}, ratio {ratio}", errors[1]);
}

/// Criterion 3: the captured-variance fraction at m = 3 equals
/// 96.66% ± 0.2 pp from the dense 289×289 eigensolve.
#[test]
fn criterion_3_kl_variance() {
    let mesh = build_mesh(16).unwrap();
    assert_eq!(mesh.num_nodes(), 289);
    let basis = kl_decompose(&CovarianceSpec::default(), &mesh, 3).unwrap();
    let fraction = basis.captured_fraction();
    let ok = (fraction - 0.9666).abs() <= 0.002;
    println!(
        "ACCEPTANCE 3 kl-variance: {} (captured fraction {:.4}%)",
        verdict(ok),
        100.0 * fraction
    );
    assert!(ok, "captured fraction {fraction}");
}

/// Criterion 4: polynomial stubs of total degree ≤ N are reproduced to 1e-8
/// relative, and builds consume exactly 216 (N=4) and 1000 (N=8) forward
/// solves, including the full-field elliptic build.
#[test]
fn criterion_4_pce_exactness_and_cost() {
    use rand::Rng;
    use rand::SeedableRng;

    // degree-4 and degree-8 vector stubs
    let stub4 = FnForward::new(3, 2, |t: &[f64]| {
        let (a, b, c) = (t[0], t[1], t[2]);
        vec![
            1.0 + a * b - 0.3 * c * c + a * a * b * b,
            a - b * c + 0.1 * a * a * a * c,
        ]
    });
    let stub8 = FnForward::new(3, 1, |t: &[f64]| {
        let (a, b, c) = (t[0], t[1], t[2]);
        vec![0.5 + a * a * b * b * c * c * a * b - 2.0 * a * a * a + b * b * c]
    });

    let mut worst_rel = 0.0f64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for (order, stub) in [(4u32, &stub4 as &dyn ForwardModel), (8, &stub8)] {
        let model = build_pce(stub, order).unwrap();
        let want_solves = (order as u64 + 2).pow(3);
        assert_eq!(model.provenance().forward_solves, want_solves);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = model.evaluate(&theta).unwrap();
            let want = stub.evaluate(&theta).unwrap();
            for (g, w) in got.iter().zip(&want) {
                worst_rel = worst_rel.max((g - w).abs() / w.abs().max(1.0));
            }
        }
    }

    // full-field elliptic build at N = 8 costs exactly 1000 solves
    let cfg = ExperimentConfig::default();
    let ctx = EllipticContext::build(&cfg).unwrap();
    let model = build_pce(&ctx.fem_forward(), 8).unwrap();
    let full_field_solves = ctx.counter().count();
    assert_eq!(model.output_dim(), 225);

    let ok = worst_rel <= 1e-8 && full_field_solves == 1000;
    println!(
        "ACCEPTANCE 4 pce-exactness/cost: {} (worst stub error {worst_rel:.3e}, full-field solves {full_field_solves})",
        verdict(ok)
    );
    assert!(ok);
}

/// Criterion 5: Table 1 regeneration. The N=8 row matches the paper within
/// max(30% relative, 0.5 pp) for θ₁ ≥ −6; the N=4 row reproduces the
/// qualitative structure (sub-10% near the prior mean, >50% blow-up at
/// θ₁ ≤ −6 and θ₁ = 2).
#[test]
fn criterion_5_table1() {
    let cfg = scratch_config("table1");
    let run = run_table1(&cfg).unwrap();
    let paper_n8: &[(i64, f64)] = &[
        (-6, 3.51),
        (-5, 0.39),
        (-4, 0.13),
        (-3, 0.03),
        (-2, 0.02),
        (-1, 0.01),
        (0, 0.02),
        (1, 0.04),
        (2, 0.02),
    ];
    let mut detail = String::new();
    let mut ok = true;

    for &(theta1, paper) in paper_n8 {
        let row = run
            .rows
            .iter()
            .find(|r| r.theta1 == theta1 as f64)
            .expect("row present");
        let got = row.errors_pct[1];
        let band = (0.3 * paper).max(0.5);
        if (got - paper).abs() > band {
            ok = false;
            detail.push_str(&format!("N8 θ1={theta1}: {got:.3}% vs paper {paper}% ±{band:.2}; "));
        }
    }
    for row in &run.rows {
        let n4 = row.errors_pct[0];
        let t = row.theta1 as i64;
        if (-3..=0).contains(&t) && n4 >= 10.0 {
            ok = false;
            detail.push_str(&format!("N4 θ1={t}: {n4:.2}% ≥ 10%; "));
        }
        if (t <= -6 || t == 2) && n4 <= 50.0 {
            ok = false;
            detail.push_str(&format!("N4 θ1={t}: {n4:.2}% ≤ 50%; "));
        }
    }
    println!("ACCEPTANCE 5 table1: {} {detail}", verdict(ok));
    assert!(ok, "{detail}");
    assert!(run.report.reconciles());
}

/// Criterion 6: Figure 2 trends over θ₁ ∈ {−10,…,2}: (a) exact-posterior
/// error bounded by 1.5 everywhere, (b) the N=4 surrogate error at least 5×
/// the exact error for θ₁ ≤ −6, (c) the N=8 surrogate within 2× the exact
/// error for θ₁ ≥ −6. Part (c) is structurally unattainable at θ₁ ∈
/// {−6, −5} (see the module comment); the assertion is kept as stated.
#[test]
fn criterion_6_figure2_trends() {
    let cfg = scratch_config("figure2");
    let run = run_figure2(&cfg).unwrap();
    assert!(run.report.reconciles());

    let mut ok_a = true;
    let mut ok_b = true;
    let mut ok_c = true;
    let mut detail = String::new();
    for row in &run.rows {
        let t = row.theta1 as i64;
        let exact = row.exact.error;
        let n4 = row.surrogate[0].error;
        let n8 = row.surrogate[1].error;
        if exact >= 1.5 {
            ok_a = false;
            detail.push_str(&format!("(a) θ1={t}: exact {exact:.3} ≥ 1.5; "));
        }
        if t <= -6 && n4 < 5.0 * exact {
            ok_b = false;
            detail.push_str(&format!("(b) θ1={t}: N4 {n4:.3} < 5×{exact:.3}; "));
        }
        if t >= -6 && n8 > 2.0 * exact {
            ok_c = false;
            detail.push_str(&format!("(c) θ1={t}: N8 {n8:.4} > 2×{exact:.4}; "));
        }
    }
    let ok = ok_a && ok_b && ok_c;
    println!(
        "ACCEPTANCE 6 figure2-trends: {} (a:{} b:{} c:{}) {detail}",
        verdict(ok),
        verdict(ok_a),
        verdict(ok_b),
        verdict(ok_c)
    );
    assert!(ok, "{detail}");
}

/// Criterion 7: small-noise claims at desk scale. Linear toy: ε·KLD within
/// 5% of F(0)−minF = 0.25 at ε = 1e-3, cross-checked against the closed-form
/// Gaussian KLD; cubic toy with N = 1: within 5% of the dense-scan limit;
/// Laplace normalizer residual within 5% (relative to minF/ε) at ε = 1e-3.
#[test]
fn criterion_7_claims() {
    let linear = ToyModel {
        kind: ToyKind::Linear,
        data: 1.0,
        noise_sd: 1.0,
    };
    let rows = claim1_curve(&linear, &[1e-3]).unwrap();
    let scaled = rows[0].scaled_kld;
    let ok_limit = (scaled - 0.25).abs() <= 0.05 * 0.25;

    // closed-form oracle: p_{0,ε} = N(0, ε), p_ε = N(½, ε/2)
    let eps: f64 = 1e-3;
    let closed_form = eps
        * (((eps / 2.0).sqrt() / eps.sqrt()).ln() + (eps + 0.25) / (2.0 * (eps / 2.0)) - 0.5);
    let ok_closed = (scaled - closed_form).abs() <= 1e-4;

    // independent dense-scan oracle for the cubic claim-2 limit
    let cubic = ToyModel {
        kind: ToyKind::Cubic { coeff: 0.2 },
        data: 3.6,
        noise_sd: 1.0,
    };
    let surrogate = cubic.pce(1).unwrap();
    let scan = |f: &dyn Fn(f64) -> f64| -> (f64, f64) {
        let n = 200_000;
        let (lo, hi) = (-8.0, 8.0);
        let mut best = (lo, f64::INFINITY);
        for k in 0..=n {
            let t = lo + (hi - lo) * k as f64 / n as f64;
            let v = f(t);
            if v < best.1 {
                best = (t, v);
            }
        }
        best
    };
    let (_, min_f) = scan(&|t| cubic.neg_log(t));
    let (t_n, _) = scan(&|t| surrogate.neg_log(t));
    let oracle_limit = cubic.neg_log(t_n) - min_f;
    let rows2 = claim2_curve(&cubic, 1, &[1e-3]).unwrap();
    let ok_claim2 = (rows2[0].scaled_kld - oracle_limit).abs() <= 0.05 * oracle_limit;

    let mut ok_laplace = true;
    let mut laplace_detail = String::new();
    for toy in [&linear, &cubic] {
        let res = laplace_normalizer_residual(toy, 1e-3).unwrap();
        let (_, min_f) = scan(&|t| toy.neg_log(t));
        let rel = res.abs() / (min_f / 1e-3);
        laplace_detail.push_str(&format!("residual {res:.4} (rel {rel:.2e}); "));
        if rel > 0.05 {
            ok_laplace = false;
        }
    }

    let ok = ok_limit && ok_closed && ok_claim2 && ok_laplace;
    println!(
        "ACCEPTANCE 7 claims-1-2: {} (claim1 {scaled:.5} vs 0.25 and closed form {closed_form:.5}; claim2 {:.5} vs oracle {oracle_limit:.5}; {laplace_detail})",
        verdict(ok),
        rows2[0].scaled_kld
    );
    assert!(ok);
}

/// Criterion 8: implicit-sampling weights uniform to 1e-10 on a quadratic F;
/// Metropolis reproduces the N(0,1) stub variance to 5% over 1e5 steps;
/// implicit and Metropolis conditional means agree to 0.2 per coordinate on
/// a shared surrogate posterior.
#[test]
fn criterion_8_sampler_properties() {
    // quadratic F via the linear toy
    let toy = ToyModel {
        kind: ToyKind::Linear,
        data: 1.0,
        noise_sd: 1.0,
    };
    let spec = PosteriorSpec::new(vec![toy.data], toy.noise_sd, &toy).unwrap();
    let mode = find_mode(&spec, &[0.0], 1e-8).unwrap();
    let ensemble = implicit_sample(&spec, &mode, 64, 11).unwrap();
    let max_dev = ensemble
        .weights
        .iter()
        .fold(0.0f64, |m, &w| m.max((w - 1.0 / 64.0).abs()));

    // N(0,1) stub target
    let stub = FnForward::new(1, 1, |_: &[f64]| vec![0.0]);
    let stub_spec = PosteriorSpec::new(vec![0.0], 1.0, &stub).unwrap();
    let chain = rw_metropolis(&stub_spec, &[0.0], 100_000, 2.4, 2024).unwrap();
    let n = chain.states.len() as f64;
    let mean: f64 = chain.states.iter().map(|s| s[0]).sum::<f64>() / n;
    let var: f64 = chain.states.iter().map(|s| (s[0] - mean).powi(2)).sum::<f64>() / n;

    // shared surrogate posterior: N = 8 at θ_true = (−5, −1, 1)
    let cfg = ExperimentConfig::default();
    let ctx = EllipticContext::build(&cfg).unwrap();
    let model = build_pce(&ctx.fem_forward(), 8).unwrap();
    let fem = ctx.fem_forward();
    let observed_fem = ObservedForward::new(&fem, &ctx.observation);
    let theta_true = [-5.0, -1.0, 1.0];
    let data = bayes::synthesize_data(
        &observed_fem,
        &theta_true,
        cfg.noise_sd,
        derive_seed(cfg.seed, 1, 5),
    )
    .unwrap();
    let observed_pce = ObservedForward::new(&model, &ctx.observation);
    let surrogate_spec = PosteriorSpec::new(data, cfg.noise_sd, &observed_pce).unwrap();
    let surrogate_mode = find_mode(&surrogate_spec, &[0.0; 3], 1e-4).unwrap();
    let is_mean = conditional_mean(
        &implicit_sample(&surrogate_spec, &surrogate_mode, 20, derive_seed(cfg.seed, 2, 5)).unwrap(),
    );
    let chain = rw_metropolis(
        &surrogate_spec,
        &[0.0; 3],
        50_000,
        0.02,
        derive_seed(cfg.seed, 3, 5),
    )
    .unwrap();
    let burn = chain.states.len() / 5;
    let kept = &chain.states[burn..];
    let mut mcmc_mean = [0.0; 3];
    for state in kept {
        for (acc, &v) in mcmc_mean.iter_mut().zip(state) {
            *acc += v;
        }
    }
    mcmc_mean.iter_mut().for_each(|v| *v /= kept.len() as f64);
    let max_gap = is_mean
        .iter()
        .zip(&mcmc_mean)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let ok = max_dev <= 1e-10 && (var - 1.0).abs() <= 0.05 && max_gap <= 0.2;
    println!(
        "ACCEPTANCE 8 samplers: {} (weight dev {max_dev:.2e}, stub variance {var:.4}, mean gap {max_gap:.4}, mcmc acceptance {:.2})",
        verdict(ok),
        chain.acceptance_rate
    );
    assert!(
        ok,
        "weight dev {max_dev:.2e}, variance {var}, mean gap {max_gap}"
    );
}

/// Criterion 9: implicit sampling on one elliptic datum costs between 75 and
/// 300 posterior (= PDE) evaluations, and the cost report reconciles with
/// the atomic solve counter exactly.
#[test]
fn criterion_9_cost_accounting() {
    let cfg = scratch_config("cost");
    let run = run_cost_report(&cfg).unwrap();
    let solves = run.sampling_pde_solves;
    let reconciled = run.report.reconciles();
    let n4 = run
        .report
        .phases
        .iter()
        .find(|p| p.0.contains("N=4"))
        .map(|p| p.1);
    let n8 = run
        .report
        .phases
        .iter()
        .find(|p| p.0.contains("N=8"))
        .map(|p| p.1);
    let ok = (75..=300).contains(&solves)
        && reconciled
        && n4 == Some(216)
        && n8 == Some(1000);
    println!(
        "ACCEPTANCE 9 cost-accounting: {} (sampling solves {solves}, N4 build {n4:?}, N8 build {n8:?}, reconciled {reconciled})",
        verdict(ok)
    );
    assert!(ok);
}
