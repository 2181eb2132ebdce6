//! The `validate` subcommand: golden values, theorem checks, oracle
//! comparisons and bound inequalities, printed one line per check.

use std::io::Write;
use std::time::Instant;

use dispest_core::bayes::{marginal_py, posterior_summary, vp_bayes, window_average, Prior};
use dispest_core::filter::{mixture_filter, normalization_integral, Filter};
use dispest_core::fock::{
    displacement_matrix, lossy_single_photon, wigner_eval_real, DisplacementParams,
    TruncatedOperator,
};
use dispest_core::gaussian::{
    classical_bound, det_inequality_holds, gaussian_bound, squeeze_scan_vp, Covariance2,
};
use dispest_core::ghosh::{
    single_photon_limit_product, single_photon_py_closed, single_photon_vp_closed, fisher_sweep, ghosh_report,
};
use dispest_core::oracle::{
    displacement_oracle, mc_posterior, random_pure_state, v2_theorem_check,
};
use dispest_core::sweeps::{log_grid, loss_threshold};
use num_complex::Complex64;

struct Report<'a> {
    out: &'a mut dyn Write,
    failures: usize,
    checks: usize,
}

impl<'a> Report<'a> {
    fn check(&mut self, name: &str, pass: bool, detail: &str) {
        self.checks += 1;
        if !pass {
            self.failures += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(self.out, "{tag} {name}: {detail}");
    }
}

fn origin() -> DisplacementParams {
    DisplacementParams::new(0.0, 0.0).unwrap()
}

/// Runs the whole suite; returns the number of failing checks.
pub fn run(out: &mut dyn Write, seed: u64, n_cut: usize, tol: f64) -> usize {
    let started = Instant::now();
    let mut r = Report {
        out,
        failures: 0,
        checks: 0,
    };

    // --- closed-form anchors -------------------------------------------
    let spot = single_photon_vp_closed(1.0, 0.0).unwrap();
    r.check(
        "closed-form v'(1,0) = 0.4",
        (spot - 0.4).abs() < 1e-12,
        &format!("value {spot:.15}"),
    );
    let spot2 = single_photon_vp_closed(2.0, 0.0).unwrap();
    r.check(
        "closed-form v'(2,0) = 1",
        (spot2 - 1.0).abs() < 1e-12,
        &format!("value {spot2:.15}"),
    );

    let f1 = Filter::fock(1);
    let mut worst = 0.0_f64;
    for v in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let prior = Prior::new(v).unwrap();
        for q in [0.0, 0.5, 1.0, 2.0] {
            let y = DisplacementParams::new(q, 0.0).unwrap();
            let vp = posterior_summary(&prior, &f1, y).unwrap().v_prime;
            let closed = single_photon_vp_closed(v, q).unwrap();
            worst = worst.max(((vp - closed) / closed).abs());
            let py = marginal_py(&prior, &f1, y).unwrap();
            let closed_p = single_photon_py_closed(v, q).unwrap();
            worst = worst.max(((py - closed_p) / closed_p).abs());
        }
    }
    r.check(
        "closed-form grid vs pipeline",
        worst < 1e-8,
        &format!("max rel err {worst:.2e}"),
    );

    let product = single_photon_limit_product(1e-3).unwrap();
    let inv_e = std::f64::consts::E.recip();
    r.check(
        "closed-form limit product 1/e",
        ((product - inv_e) / inv_e).abs() < 1e-3,
        &format!("value {product:.9} vs {inv_e:.9}"),
    );

    // --- classical and Gaussian bounds ----------------------------------
    let mut worst = 0.0_f64;
    for v in log_grid(0.05, 20.0, 60) {
        let prior = Prior::new(v).unwrap();
        let vp = posterior_summary(&prior, &Filter::fock(0), origin())
            .unwrap()
            .v_prime;
        worst = worst.max((vp - classical_bound(v).unwrap()).abs());
    }
    r.check(
        "classical-bound oracle (n = 0 pipeline)",
        worst < 1e-10,
        &format!("max abs err {worst:.2e}"),
    );

    let mut ok = true;
    for v in log_grid(0.05, 20.0, 40) {
        ok &= gaussian_bound(v).unwrap() <= classical_bound(v).unwrap() + 1e-15;
    }
    for a in [0.3, 1.0, 4.0] {
        let cov = Covariance2::diagonal(a, 1.0 / a).unwrap();
        let prior = Prior::new(1.3).unwrap();
        let vp = posterior_summary(&prior, &Filter::gaussian(cov), origin())
            .unwrap()
            .v_prime;
        ok &= (vp - squeeze_scan_vp(a, 1.3)).abs() < 1e-12;
    }
    r.check(
        "bound ordering and squeeze-scan consistency",
        ok,
        "gaussian <= classical; covariance route matches the displayed form",
    );

    // --- determinant inequality -----------------------------------------
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut min_slack = f64::INFINITY;
    for _ in 0..1000 {
        let spd = |l1: f64, l2: f64, t: f64| {
            let (c, s) = ((t * std::f64::consts::PI).cos(), (t * std::f64::consts::PI).sin());
            Covariance2::from_matrix([
                [l1 * c * c + l2 * s * s, (l1 - l2) * c * s],
                [(l1 - l2) * c * s, l1 * s * s + l2 * c * c],
            ])
            .unwrap()
        };
        let a = spd(0.02 + 4.0 * next(), 0.02 + 4.0 * next(), next());
        let b = spd(0.02 + 4.0 * next(), 0.02 + 4.0 * next(), next());
        let (_, slack) = det_inequality_holds(&a, &b);
        min_slack = min_slack.min(slack);
    }
    r.check(
        "determinant inequality, 1000 random SPD pairs",
        min_slack >= -1e-12,
        &format!("min slack {min_slack:.2e}"),
    );

    // --- displacement operators ------------------------------------------
    let mut worst = 0.0_f64;
    for (xi, eta) in [(0.7, 0.0), (1.3, -1.1), (2.0, 2.0)] {
        let params = DisplacementParams::new(xi, eta).unwrap();
        let closed = displacement_matrix(params, 40).unwrap();
        let oracle = displacement_oracle(params, 40).unwrap();
        for m in 0..=20 {
            for n in 0..=20 {
                worst = worst.max((closed.mat()[[m, n]] - oracle.mat()[[m, n]]).norm());
            }
        }
    }
    r.check(
        "displacement closed form vs exponentiation oracle",
        worst < 1e-8,
        &format!("max entry diff {worst:.2e}"),
    );

    // --- Wigner values -----------------------------------------------------
    let vac = TruncatedOperator::fock_projector(0, 10).unwrap();
    let one = TruncatedOperator::fock_projector(1, 10).unwrap();
    let w0 = wigner_eval_real(&vac, 0.0, 0.0).unwrap();
    let w1 = wigner_eval_real(&one, 0.0, 0.0).unwrap();
    r.check(
        "Wigner spot values at the origin",
        (w0 - std::f64::consts::FRAC_1_PI).abs() < 1e-12
            && (w1 + std::f64::consts::FRAC_1_PI).abs() < 1e-12,
        &format!("vacuum {w0:.9}, single photon {w1:.9}"),
    );

    // --- filter normalization and shape -----------------------------------
    let mut worst = 0.0_f64;
    for n in 0..=3usize {
        worst =
            worst.max((normalization_integral(&Filter::fock(n), tol).unwrap() - 1.0).abs());
    }
    for l in [0.0, 0.1, 0.5] {
        let rho = lossy_single_photon(l, 6).unwrap();
        let f = mixture_filter(&rho, &rho).unwrap();
        worst = worst.max((normalization_integral(&f, tol).unwrap() - 1.0).abs());
    }
    let conv = Filter::numeric_convolution(
        &TruncatedOperator::fock_projector(1, 8).unwrap(),
        &TruncatedOperator::fock_projector(1, 8).unwrap(),
        tol,
    )
    .unwrap();
    worst = worst.max((normalization_integral(&conv, tol).unwrap() - 1.0).abs());
    r.check(
        "filter normalization (Fock, lossy, numeric convolution)",
        worst < 1e-6,
        &format!("max deviation {worst:.2e}"),
    );

    let mut ok = true;
    for n in 0..=3usize {
        let f = Filter::fock(n);
        let peak = f.eval(0.0, 0.0).unwrap();
        ok &= (peak - 0.5 * std::f64::consts::FRAC_1_PI).abs() < 1e-12;
        let mut r0 = 0.05;
        while r0 < 5.0 {
            ok &= f.eval(r0, 0.0).unwrap() <= peak + 1e-12;
            r0 += 0.2;
        }
    }
    r.check(
        "matched filters peak at 1/(2 pi)",
        ok,
        "maximum at the origin for n = 0..3",
    );

    // --- v = 2 theorem ---------------------------------------------------
    let bs_cut = n_cut.clamp(8, 24);
    let mut worst_dev = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    let mut min_slack = f64::INFINITY;
    for n in 1..=3usize {
        let proj = TruncatedOperator::fock_projector(n, bs_cut.min(12)).unwrap();
        let report = v2_theorem_check(&proj, &proj, bs_cut.min(12)).unwrap();
        worst_dev = worst_dev.max((report.vp_sigma - 1.0).abs());
        worst_gap = worst_gap.max((report.vp_sigma - report.vp_direct).abs());
    }
    for k in 0..5u64 {
        let rho = TruncatedOperator::pure_state(&random_pure_state(seed + k, 4), 16).unwrap();
        let report = v2_theorem_check(&rho, &rho, 16).unwrap();
        worst_dev = worst_dev.max((report.vp_sigma - 1.0).abs());
        let e = TruncatedOperator::pure_state(&random_pure_state(seed + 100 + k, 4), 16).unwrap();
        let mixed = v2_theorem_check(&rho, &e, 16).unwrap();
        min_slack = min_slack.min(mixed.slack);
        worst_gap = worst_gap.max((mixed.vp_sigma - mixed.vp_direct).abs());
    }
    r.check(
        "v=2 construction: matched pairs saturate v' = 1",
        worst_dev < 1e-6,
        &format!("max deviation {worst_dev:.2e}"),
    );
    r.check(
        "v=2 construction: sigma-ratio vs direct pipeline",
        worst_gap < 1e-6,
        &format!("max route gap {worst_gap:.2e}"),
    );
    r.check(
        "v=2 construction: mismatched pairs stay above 1",
        min_slack >= -1e-8,
        &format!("min slack {min_slack:.2e}"),
    );

    // --- grid-state probe --------------------------------------------------
    let gkp2 = posterior_summary(&Prior::new(2.0).unwrap(), &Filter::gkp(), origin())
        .unwrap()
        .v_prime;
    let gkp_half = posterior_summary(&Prior::new(0.5).unwrap(), &Filter::gkp(), origin())
        .unwrap()
        .v_prime;
    r.check(
        "grid-state errors at v = 2 and v = 0.5",
        (gkp2 - 1.0).abs() < 1e-6 && gkp_half < 1e-3,
        &format!("v'(2) = {gkp2:.9}, v'(0.5) = {gkp_half:.2e}"),
    );

    // --- bound chain -------------------------------------------------------
    let het = |op: &TruncatedOperator| {
        op.conjugate()
            .scale(Complex64::new(0.5 * std::f64::consts::FRAC_1_PI, 0.0))
    };
    let mut worst_violation = f64::NEG_INFINITY;
    for v in [0.5, 1.0, 2.0] {
        let prior = Prior::new(v).unwrap();
        for n in 0..=3usize {
            let rho = TruncatedOperator::fock_projector(n, 8).unwrap();
            let report = ghosh_report(&prior, &rho, &het(&rho), n).unwrap();
            let vp = posterior_summary(&prior, &Filter::fock(n), origin())
                .unwrap()
                .v_prime;
            worst_violation = worst_violation
                .max(1.0 / vp - 1.0 / v - report.fisher / 4.0)
                .max(report.fisher - report.fisher_upper)
                .max(1.0 / vp - report.photon_bound);
        }
        for l in [0.0, 0.3] {
            let rho = lossy_single_photon(l, 8).unwrap();
            let filter = mixture_filter(&rho, &rho).unwrap();
            let report = ghosh_report(&prior, &rho, &het(&rho), 1).unwrap();
            let vp = posterior_summary(&prior, &filter, origin()).unwrap().v_prime;
            worst_violation = worst_violation
                .max(1.0 / vp - 1.0 / v - report.fisher / 4.0)
                .max(report.fisher - report.fisher_upper)
                .max(1.0 / vp - report.photon_bound);
        }
    }
    r.check(
        "information bound chain (Fock n <= 3, lossy, vacuum)",
        worst_violation <= 1e-9,
        &format!("worst violation {worst_violation:.2e}"),
    );

    // --- photon-number sweep shape ------------------------------------------
    let rows = fisher_sweep(0.5, 20).unwrap();
    let vals: Vec<f64> = rows.iter().map(|row| row.inv_vp_minus_inv_v).collect();
    let peak = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let mut ok = peak > 0 && peak < vals.len() - 1;
    for k in peak..(vals.len() - 1) {
        ok &= vals[k + 1] < vals[k];
    }
    for k in 1..(rows.len() - 1) {
        ok &= rows[k + 1].p_y < rows[k].p_y;
    }
    r.check(
        "photon-number sweep shape at v = 0.5",
        ok,
        &format!("information peaks at n = {peak}, p(y) decreasing"),
    );

    // --- Monte-Carlo oracle ---------------------------------------------------
    let mut worst_pull = 0.0_f64;
    let scenarios: Vec<(Filter, f64)> = vec![
        (Filter::fock(0), 1.0),
        (Filter::fock(1), 1.0),
        (
            mixture_filter(
                &lossy_single_photon(0.3, 4).unwrap(),
                &lossy_single_photon(0.3, 4).unwrap(),
            )
            .unwrap(),
            0.7,
        ),
    ];
    for (i, (filter, v)) in scenarios.iter().enumerate() {
        let prior = Prior::new(*v).unwrap();
        let exact = posterior_summary(&prior, filter, origin()).unwrap().v_prime;
        let mc = mc_posterior(&prior, filter, origin(), 100_000, seed + 7 + i as u64).unwrap();
        worst_pull = worst_pull.max((mc.v_prime - exact).abs() / mc.std_err);
    }
    r.check(
        "Monte-Carlo posterior vs quadrature (3 sigma)",
        worst_pull <= 3.0,
        &format!("worst pull {worst_pull:.2} se"),
    );

    // --- windowed post-selection ------------------------------------------------
    let prior = Prior::new(1.0).unwrap();
    let big = window_average(&prior, &f1, 12.0).unwrap();
    let vb = vp_bayes(&prior, &f1).unwrap();
    let small = window_average(&prior, &f1, 0.5).unwrap();
    r.check(
        "window limits and Gaussian-bound beating at v = 1",
        (big.avg_vp - vb).abs() < 1e-4
            && (big.p_select - 1.0).abs() < 1e-6
            && small.p_select > 0.0
            && small.avg_vp < gaussian_bound(1.0).unwrap(),
        &format!(
            "wide window: |<v'> - Bayes| = {:.1e}, 1 - P = {:.1e}; narrow window <v'> = {:.4} at P = {:.3}",
            (big.avg_vp - vb).abs(),
            (big.p_select - 1.0).abs(),
            small.avg_vp,
            small.p_select
        ),
    );

    // --- loss thresholds ----------------------------------------------------------
    let t_gauss = loss_threshold(&|v| gaussian_bound(v), 1e-4).unwrap();
    let t_classical = loss_threshold(&|v| classical_bound(v), 1e-4).unwrap();
    r.check(
        "loss thresholds",
        (t_gauss - 0.089).abs() <= 0.005 && (t_classical - 0.50).abs() <= 0.01,
        &format!("gaussian {t_gauss:.4}, classical {t_classical:.4}"),
    );

    let elapsed = started.elapsed();
    let _ = writeln!(
        r.out,
        "{} checks, {} failed, {elapsed:.1?}",
        r.checks, r.failures
    );
    r.failures
}
