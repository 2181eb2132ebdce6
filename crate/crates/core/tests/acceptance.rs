//! End-to-end acceptance checks. One test per criterion; each prints a
//! single PASS line with the measured slack when it holds, and fails loudly
//! otherwise. Every tolerance is pinned here, not configurable.

use std::time::Instant;

use dispest_core::bayes::{marginal_py, posterior_summary, vp_bayes, window_average, Prior};
use dispest_core::filter::{mixture_filter, normalization_integral, Filter};
use dispest_core::fock::{lossy_single_photon, DisplacementParams, TruncatedOperator};
use dispest_core::gaussian::{classical_bound, det_inequality_holds, gaussian_bound, Covariance2};
use dispest_core::ghosh::{
    single_photon_limit_product, single_photon_py_closed, single_photon_vp_closed, fisher_sweep, ghosh_report,
};
use dispest_core::oracle::{
    displacement_oracle, mc_posterior, random_pure_state, v2_theorem_check,
};
use dispest_core::sweeps::{log_grid, loss_threshold};
use num_complex::Complex64;

fn origin() -> DisplacementParams {
    DisplacementParams::new(0.0, 0.0).unwrap()
}

fn at(xi: f64, eta: f64) -> DisplacementParams {
    DisplacementParams::new(xi, eta).unwrap()
}

#[test]
fn criterion_01_closed_form_golden_equivalence() {
    let start = Instant::now();
    let filter = Filter::fock(1);
    let mut worst = 0.0_f64;
    for v in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let prior = Prior::new(v).unwrap();
        for q in [0.0, 0.5, 1.0, 2.0] {
            let pipeline = posterior_summary(&prior, &filter, at(q, 0.0))
                .unwrap()
                .v_prime;
            let closed = single_photon_vp_closed(v, q).unwrap();
            let rel = ((pipeline - closed) / closed).abs();
            worst = worst.max(rel);
            assert!(
                rel <= 1e-8,
                "v' mismatch at (v, q) = ({v}, {q}): {pipeline} vs {closed} (rel {rel:.2e})"
            );
        }
    }
    // Exact spot values.
    let spot1 = single_photon_vp_closed(1.0, 0.0).unwrap();
    let spot2 = single_photon_vp_closed(2.0, 0.0).unwrap();
    assert!((spot1 - 0.4).abs() <= 1e-12, "v'(1, 0) = {spot1}");
    assert!((spot2 - 1.0).abs() <= 1e-12, "v'(2, 0) = {spot2}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:.1?}");
    println!(
        "[criterion 01] PASS closed-form v' equivalence: max rel err {worst:.2e}, {elapsed:.1?}"
    );
}

#[test]
fn criterion_02_closed_form_marginal() {
    let filter = Filter::fock(1);
    let mut worst = 0.0_f64;
    for v in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let prior = Prior::new(v).unwrap();
        for q in [0.0, 0.5, 1.0, 2.0] {
            let pipeline = marginal_py(&prior, &filter, at(q, 0.0)).unwrap();
            let closed = single_photon_py_closed(v, q).unwrap();
            let rel = ((pipeline - closed) / closed).abs();
            worst = worst.max(rel);
            assert!(
                rel <= 1e-8,
                "p(q, 0) mismatch at (v, q) = ({v}, {q}): rel {rel:.2e}"
            );
        }
    }
    let product = single_photon_limit_product(1e-3).unwrap();
    let target = std::f64::consts::E.recip();
    let rel = ((product - target) / target).abs();
    assert!(rel <= 1e-3, "limit product {product} vs 1/e (rel {rel:.2e})");
    println!(
        "[criterion 02] PASS closed-form marginal: max rel err {worst:.2e}, limit product rel err {rel:.2e}"
    );
}

#[test]
fn criterion_03_classical_bound_oracle() {
    let filter = Filter::fock(0);
    let mut worst = 0.0_f64;
    for v in log_grid(0.05, 20.0, 60) {
        let prior = Prior::new(v).unwrap();
        let vp = posterior_summary(&prior, &filter, origin()).unwrap().v_prime;
        let exact = classical_bound(v).unwrap();
        let err = (vp - exact).abs();
        worst = worst.max(err);
        assert!(err <= 1e-10, "classical oracle off at v = {v}: {err:.2e}");
    }
    println!("[criterion 03] PASS classical-bound oracle: max abs err {worst:.2e}");
}

#[test]
fn criterion_04_v2_theorem() {
    let mut worst_eq = 0.0_f64;
    let mut worst_gap = 0.0_f64;

    // Matched Fock projectors.
    for n in 1..=3usize {
        let proj = TruncatedOperator::fock_projector(n, 12).unwrap();
        let report = v2_theorem_check(&proj, &proj, 12).unwrap();
        worst_eq = worst_eq
            .max((report.vp_sigma - 1.0).abs())
            .max((report.vp_direct - 1.0).abs());
        worst_gap = worst_gap.max((report.vp_sigma - report.vp_direct).abs());
        assert!((report.vp_sigma - 1.0).abs() <= 1e-6, "|{n}> sigma route");
        assert!((report.vp_direct - 1.0).abs() <= 1e-6, "|{n}> direct route");
    }
    // 20 seeded random matched pure pairs.
    for seed in 1000..1020u64 {
        let rho = TruncatedOperator::pure_state(&random_pure_state(seed, 5), 16).unwrap();
        let report = v2_theorem_check(&rho, &rho, 16).unwrap();
        worst_eq = worst_eq.max((report.vp_sigma - 1.0).abs());
        worst_gap = worst_gap.max((report.vp_sigma - report.vp_direct).abs());
        assert!(
            (report.vp_sigma - 1.0).abs() <= 1e-6,
            "matched pair seed {seed}: vp {}",
            report.vp_sigma
        );
        assert!((report.vp_sigma - report.vp_direct).abs() <= 1e-6);
    }
    // 20 mismatched pairs stay above 1.
    let mut min_slack = f64::INFINITY;
    for seed in 2000..2020u64 {
        let rho = TruncatedOperator::pure_state(&random_pure_state(seed, 5), 16).unwrap();
        let e = TruncatedOperator::pure_state(&random_pure_state(seed + 7777, 5), 16).unwrap();
        let report = v2_theorem_check(&rho, &e, 16).unwrap();
        min_slack = min_slack.min(report.slack);
        worst_gap = worst_gap.max((report.vp_sigma - report.vp_direct).abs());
        assert!(
            report.vp_sigma >= 1.0 - 1e-8,
            "mismatched pair seed {seed} fell below 1: {}",
            report.vp_sigma
        );
        assert!((report.vp_sigma - report.vp_direct).abs() <= 1e-6);
    }
    println!(
        "[criterion 04] PASS v = 2 theorem: matched dev {worst_eq:.2e}, route gap {worst_gap:.2e}, min mismatch slack {min_slack:.2e}"
    );
}

#[test]
fn criterion_05_fig3_reproduction() {
    // Single photon beats the Gaussian bound at v = 1.
    let prior1 = Prior::new(1.0).unwrap();
    let vp1 = posterior_summary(&prior1, &Filter::fock(1), origin())
        .unwrap()
        .v_prime;
    assert!((vp1 - 0.4).abs() <= 1e-10);
    assert!(vp1 < gaussian_bound(1.0).unwrap());

    // Grid-state error collapses at small prior variance.
    let prior_half = Prior::new(0.5).unwrap();
    let vp_gkp = posterior_summary(&prior_half, &Filter::gkp(), origin())
        .unwrap()
        .v_prime;
    assert!(vp_gkp < 1e-3, "grid-state v'(0.5) = {vp_gkp:.3e}");

    // Every matched pure curve passes through (2, 1).
    let prior2 = Prior::new(2.0).unwrap();
    for filter in [
        Filter::fock(1),
        Filter::fock(2),
        Filter::fock(3),
        Filter::gkp(),
    ] {
        let vp = posterior_summary(&prior2, &filter, origin()).unwrap().v_prime;
        assert!((vp - 1.0).abs() <= 1e-6, "curve missed (2, 1): {vp}");
    }

    println!(
        "[criterion 05] PASS post-selected curves: v'(1) = 0.4 < 0.5, grid-state {vp_gkp:.1e}, all matched curves through (2, 1)"
    );
}

/// The Bayes average is required to dominate the post-selected error on the
/// whole default grid. That holds wherever post-selection helps (v below
/// roughly 2.5) but reverses at larger prior variance: conditioning on the
/// central outcome of the single-photon kernel is a bad draw there (for
/// example v'(y = 0) = 2.4 at v = 4 while the outcome average sits lower),
/// so the full-grid assertion fails by construction. It is kept as stated;
/// the failure message reports the measured crossing.
#[test]
fn criterion_05_bayes_average_dominates_post_selection() {
    let f1 = Filter::fock(1);
    let mut min_margin = f64::INFINITY;
    let mut argmin = f64::NAN;
    for v in log_grid(0.05, 10.0, 60) {
        let prior = Prior::new(v).unwrap();
        let post = posterior_summary(&prior, &f1, origin()).unwrap().v_prime;
        let bayes = vp_bayes(&prior, &f1).unwrap();
        if bayes - post < min_margin {
            min_margin = bayes - post;
            argmin = v;
        }
    }
    assert!(
        min_margin >= 0.0,
        "Bayes average dips below the post-selected error by {:.4} at v = {argmin:.3}",
        -min_margin
    );
    println!("[criterion 05] PASS Bayes average dominates post-selection on the grid");
}

#[test]
fn criterion_06_loss_thresholds() {
    let start = Instant::now();
    let t_gauss = loss_threshold(&|v| gaussian_bound(v), 1e-4).unwrap();
    let t_classical = loss_threshold(&|v| classical_bound(v), 1e-4).unwrap();
    let elapsed = start.elapsed();
    assert!(
        (t_gauss - 0.089).abs() <= 0.005,
        "gaussian-bound loss threshold {t_gauss:.4}"
    );
    assert!(
        (t_classical - 0.50).abs() <= 0.01,
        "classical-bound loss threshold {t_classical:.4}"
    );
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:.1?}");
    println!(
        "[criterion 06] PASS loss thresholds: gaussian {t_gauss:.4}, classical {t_classical:.4}, {elapsed:.1?}"
    );
}

#[test]
fn criterion_07_ghosh_chain() {
    let n_cut = 8;
    let het = |op: &TruncatedOperator| {
        op.conjugate()
            .scale(Complex64::new(0.5 * std::f64::consts::FRAC_1_PI, 0.0))
    };
    let mut scenarios: Vec<(String, TruncatedOperator, Filter, usize)> = Vec::new();
    scenarios.push((
        "vacuum".into(),
        TruncatedOperator::fock_projector(0, n_cut).unwrap(),
        Filter::fock(0),
        0,
    ));
    for n in 1..=3usize {
        scenarios.push((
            format!("fock {n}"),
            TruncatedOperator::fock_projector(n, n_cut).unwrap(),
            Filter::fock(n),
            n,
        ));
    }
    for l in [0.0, 0.3] {
        let rho = lossy_single_photon(l, n_cut).unwrap();
        let f = mixture_filter(&rho, &rho).unwrap();
        scenarios.push((format!("lossy {l}"), rho, f, 1));
    }

    let mut worst = f64::NEG_INFINITY;
    for v in [0.5, 1.0, 2.0] {
        let prior = Prior::new(v).unwrap();
        for (name, rho, filter, n_max) in &scenarios {
            let e = het(rho);
            let report = ghosh_report(&prior, rho, &e, *n_max).unwrap();
            let vp = posterior_summary(&prior, filter, origin()).unwrap().v_prime;

            let ghosh_slack = 1.0 / v + report.fisher / 4.0 - 1.0 / vp;
            let schwarz_slack = report.fisher_upper - report.fisher;
            let photon_slack = report.photon_bound - 1.0 / vp;
            worst = worst.max(-ghosh_slack).max(-schwarz_slack).max(-photon_slack);
            assert!(
                ghosh_slack >= -1e-9,
                "conditioned bound violated for {name} at v = {v}: {ghosh_slack:.2e}"
            );
            assert!(
                schwarz_slack >= -1e-9,
                "F above its Schwarz bound for {name} at v = {v}"
            );
            assert!(
                photon_slack >= -1e-9,
                "photon-number bound violated for {name} at v = {v}"
            );
        }
    }
    println!("[criterion 07] PASS bound chain on all scenarios: worst violation {worst:.2e}");
}

#[test]
fn criterion_08_photon_sweep_shape() {
    for v in [0.1, 0.5] {
        let rows = fisher_sweep(v, 30).unwrap();
        let info: Vec<f64> = rows.iter().map(|r| r.inv_vp_minus_inv_v).collect();
        let peak = info
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(
            peak > 0 && peak < info.len() - 1,
            "no interior maximum at v = {v} (peak index {peak})"
        );
        for k in peak..(info.len() - 1) {
            assert!(
                info[k + 1] < info[k],
                "information not strictly decreasing after the peak at v = {v}, n = {k}"
            );
        }
        // A single interior maximum: strictly rising up to the peak.
        for k in 0..peak {
            assert!(
                info[k + 1] > info[k],
                "information not rising before the peak at v = {v}, n = {k}"
            );
        }
        let probs: Vec<f64> = rows.iter().map(|r| r.p_y).collect();
        let n0 = (1..probs.len())
            .find(|&k| (k..probs.len() - 1).all(|j| probs[j + 1] < probs[j]))
            .expect("outcome probability never settles into decrease");
        assert!(
            n0 <= 15,
            "outcome probability only decreasing from n = {n0} at v = {v}"
        );
        println!(
            "[criterion 08] PASS sweep shape at v = {v}: peak n = {peak}, p(y) decreasing from n = {n0}"
        );
    }
}

#[test]
fn criterion_09_window_limits() {
    let f1 = Filter::fock(1);
    for v in [0.5, 1.0, 1.5] {
        let prior = Prior::new(v).unwrap();
        let r_big = ((v + 2.0) * 42.0).sqrt();
        let report = window_average(&prior, &f1, r_big).unwrap();
        let bayes = vp_bayes(&prior, &f1).unwrap();
        assert!(
            (report.avg_vp - bayes).abs() <= 1e-4,
            "windowed average did not reach the Bayes value at v = {v}: {} vs {bayes}",
            report.avg_vp
        );
        assert!(
            (report.p_select - 1.0).abs() <= 1e-6,
            "selection probability did not saturate at v = {v}: {}",
            report.p_select
        );
        println!(
            "[criterion 09] PASS window limits at v = {v}: |<v'> - Bayes| = {:.2e}, 1 - P_sel = {:.2e}",
            (report.avg_vp - bayes).abs(),
            (1.0 - report.p_select).abs()
        );
    }
}

/// The windowed average at v = 0.5 is required to drop below the Gaussian
/// bound v/2 = 0.25 on some window. By the closed form, v'(y) at v = 0.5 is
/// 0.25882 at y = 0 and bottoms out near 0.25851 around |y| = 0.3, so the
/// pointwise error never reaches 0.25 and no p(y)-weighted window average
/// can either. The single-photon pair beats the Gaussian bound only for
/// prior variances above roughly 0.53. The check is kept as stated and the
/// measured minimum is reported by the failure message.
#[test]
fn criterion_09_window_beats_gaussian_bound_at_half_variance() {
    let f1 = Filter::fock(1);
    let prior = Prior::new(0.5).unwrap();
    let bound = gaussian_bound(0.5).unwrap();
    let mut best = f64::INFINITY;
    let mut found = false;
    for i in 1..=60 {
        let r = 0.1 * i as f64;
        let report = window_average(&prior, &f1, r).unwrap();
        if report.p_select > 0.0 {
            best = best.min(report.avg_vp);
            if report.avg_vp < bound {
                found = true;
            }
        }
    }
    assert!(
        found,
        "no window at v = 0.5 reaches <v'> < {bound}: minimum windowed average {best:.6}"
    );
    println!("[criterion 09] PASS window beats the Gaussian bound at v = 0.5");
}

#[test]
fn criterion_10_oracle_agreement() {
    // Monte-Carlo vs quadrature on six benchmark scenarios.
    let benchmarks: Vec<(Filter, f64, DisplacementParams, u64)> = vec![
        (Filter::fock(0), 1.0, origin(), 41),
        (Filter::fock(1), 1.0, origin(), 42),
        (Filter::fock(1), 0.5, at(1.0, 0.0), 43),
        (Filter::fock(2), 2.0, origin(), 44),
        (
            mixture_filter(
                &lossy_single_photon(0.3, 4).unwrap(),
                &lossy_single_photon(0.3, 4).unwrap(),
            )
            .unwrap(),
            1.0,
            origin(),
            45,
        ),
        (
            Filter::gaussian(Covariance2::diagonal(1.5, 1.0 / 1.5).unwrap()),
            1.0,
            at(0.3, -0.2),
            46,
        ),
    ];
    let mut worst_pull = 0.0_f64;
    for (filter, v, y, seed) in &benchmarks {
        let prior = Prior::new(*v).unwrap();
        let exact = posterior_summary(&prior, filter, *y).unwrap().v_prime;
        let mc = mc_posterior(&prior, filter, *y, 100_000, *seed).unwrap();
        let pull = (mc.v_prime - exact).abs() / mc.std_err;
        worst_pull = worst_pull.max(pull);
        assert!(
            pull <= 3.0,
            "MC disagrees at v = {v}, seed {seed}: {} vs {exact} ({pull:.2} se)",
            mc.v_prime
        );
    }

    // Closed-form displacement vs exponentiation.
    let mut worst_entry = 0.0_f64;
    for (xi, eta) in [(0.6, 0.2), (1.4, -1.4), (2.0, 2.0)] {
        let params = at(xi, eta);
        let closed = dispest_core::fock::displacement_matrix(params, 40).unwrap();
        let oracle = displacement_oracle(params, 40).unwrap();
        for m in 0..=20 {
            for n in 0..=20 {
                let d = (closed.mat()[[m, n]] - oracle.mat()[[m, n]]).norm();
                worst_entry = worst_entry.max(d);
                assert!(d <= 1e-8, "displacement entry ({m},{n}) off by {d:.2e}");
            }
        }
    }

    // Filter normalization.
    let mut worst_norm = 0.0_f64;
    for n in 0..=3usize {
        let norm = normalization_integral(&Filter::fock(n), 1e-10).unwrap();
        worst_norm = worst_norm.max((norm - 1.0).abs());
    }
    for l in [0.0, 0.1, 0.5] {
        let rho = lossy_single_photon(l, 6).unwrap();
        let f = mixture_filter(&rho, &rho).unwrap();
        let norm = normalization_integral(&f, 1e-10).unwrap();
        worst_norm = worst_norm.max((norm - 1.0).abs());
    }
    let one = TruncatedOperator::fock_projector(1, 8).unwrap();
    let conv = Filter::numeric_convolution(&one, &one, 1e-9).unwrap();
    let norm = normalization_integral(&conv, 1e-10).unwrap();
    worst_norm = worst_norm.max((norm - 1.0).abs());
    assert!(worst_norm <= 1e-6, "filter normalization off by {worst_norm:.2e}");

    // Determinant inequality on 1000 seeded SPD pairs.
    let mut state = 0x6a09e667f3bcc908_u64;
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
        let (ok, slack) = det_inequality_holds(&a, &b);
        min_slack = min_slack.min(slack);
        assert!(ok, "determinant inequality violated: slack {slack:.2e}");
    }
    assert!(min_slack >= -1e-12);

    println!(
        "[criterion 10] PASS oracles: worst MC pull {worst_pull:.2} se, displacement {worst_entry:.2e}, normalization {worst_norm:.2e}, det slack {min_slack:.2e}"
    );
}
