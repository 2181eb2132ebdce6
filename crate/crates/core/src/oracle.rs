//! Independent validation paths.
//!
//! - Monte-Carlo importance sampling of the posterior, with jackknife
//!   standard errors; deterministic per seed.
//! - Displacement matrices by direct exponentiation of the truncated
//!   generator, checked against the Laguerre closed form.
//! - The v = 2 construction: sigma = Tr_1[B^dag (rho (x) E_y) B] turns the
//!   conditioned error into an operator ratio that is bounded below by 1;
//!   matching pure pairs saturate it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bayes::{posterior_summary, Prior};
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::fock::{
    annihilation, beamsplitter_half, expm, DisplacementParams, TruncatedOperator,
};

/// Self-normalized importance-sampling estimate of the posterior moments.
#[derive(Debug, Clone, Copy)]
pub struct McResult {
    pub mean: (f64, f64),
    pub v_prime: f64,
    /// Jackknife standard error of `v_prime`.
    pub std_err: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Posterior moments by importance sampling: draw from the prior, weight by
/// the filter at the outcome-shifted point. Bit-identical results per seed.
pub fn mc_posterior(
    prior: &Prior,
    filter: &Filter,
    y: DisplacementParams,
    n_samples: usize,
    seed: u64,
) -> Result<McResult> {
    if n_samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "mc_posterior needs at least 1000 samples, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = (prior.v() / 2.0).sqrt();

    let mut xs = Vec::with_capacity(n_samples);
    let mut ps = Vec::with_capacity(n_samples);
    let mut ws = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (z0, z1) = box_muller(&mut rng);
        let xi = sigma * z0;
        let eta = sigma * z1;
        let w = filter.eval(xi - y.xi, eta - y.eta)?;
        xs.push(xi);
        ps.push(eta);
        ws.push(w.max(0.0));
    }

    let sw: f64 = ws.iter().sum();
    let sw2: f64 = ws.iter().map(|w| w * w).sum();
    if sw <= 0.0 {
        return Err(Error::UnreliableEstimate(0.0));
    }
    let ess = sw * sw / sw2;
    if ess < 100.0 {
        return Err(Error::UnreliableEstimate(ess));
    }

    let swx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x).sum();
    let swy: f64 = ws.iter().zip(&ps).map(|(w, p)| w * p).sum();
    let swxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x * x).sum();
    let swyy: f64 = ws.iter().zip(&ps).map(|(w, p)| w * p * p).sum();

    let vp_of = |sw: f64, swx: f64, swy: f64, swxx: f64, swyy: f64| -> f64 {
        let mx = swx / sw;
        let my = swy / sw;
        (swxx / sw - mx * mx) + (swyy / sw - my * my)
    };
    let v_prime = vp_of(sw, swx, swy, swxx, swyy);
    let mean = (swx / sw, swy / sw);

    // Jackknife over samples, O(n) via the leave-one-out totals.
    let n = n_samples as f64;
    let mut jk_sum = 0.0;
    let mut jk_sq = 0.0;
    for i in 0..n_samples {
        let w = ws[i];
        let x = xs[i];
        let p = ps[i];
        let vp_i = vp_of(
            sw - w,
            swx - w * x,
            swy - w * p,
            swxx - w * x * x,
            swyy - w * p * p,
        );
        jk_sum += vp_i;
        jk_sq += vp_i * vp_i;
    }
    let jk_mean = jk_sum / n;
    let var = ((n - 1.0) / n) * (jk_sq - n * jk_mean * jk_mean).max(0.0);
    let std_err = var.sqrt().max(f64::MIN_POSITIVE);

    Ok(McResult {
        mean,
        v_prime,
        std_err,
        n_samples,
        seed,
    })
}

fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// D(xi, eta) by scaling-and-squaring exponentiation of the truncated
/// generator i eta x - i xi p = alpha a^dag - conj(alpha) a. Used only to
/// validate the closed-form matrix elements.
pub fn displacement_oracle(params: DisplacementParams, n_cut: usize) -> Result<TruncatedOperator> {
    if n_cut > 80 {
        return Err(Error::OutOfRange(format!(
            "displacement_oracle: n_cut = {n_cut} exceeds 80"
        )));
    }
    let alpha = params.alpha();
    let a = annihilation(n_cut);
    let dim = n_cut + 1;
    let mut gen = ndarray::Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for i in 0..dim {
        for j in 0..dim {
            gen[[i, j]] = alpha * a.mat()[[j, i]].conj() - alpha.conj() * a.mat()[[i, j]];
        }
    }
    let result = expm(&gen);
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::QuadratureNonConvergence(
            "displacement_oracle: exponential series overflowed".into(),
        ));
    }
    TruncatedOperator::new(n_cut, result)
}

/// Seeded Fock amplitudes of a random pure state on indices 0..=max_index.
pub fn random_pure_state(seed: u64, max_index: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = Vec::with_capacity(max_index + 1);
    for _ in 0..=max_index {
        let (re, im) = box_muller(&mut rng);
        amps.push(Complex64::new(re, im));
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.into_iter().map(|a| a / norm).collect()
}

/// Outcome of the v = 2 construction for one (rho, E_y) pair.
#[derive(Debug, Clone, Copy)]
pub struct V2CheckReport {
    /// Tr sigma = Tr rho Tr E_y.
    pub sigma_trace: f64,
    /// The ratio Tr[(|0><0| + |phi><phi|) sigma] / Tr[|0><0| sigma].
    pub vp_sigma: f64,
    /// Estimate point used, in the halved coordinates of the construction.
    pub x0: f64,
    pub p0: f64,
    /// v' from the posterior pipeline at v = 2, y = (0, 0).
    pub vp_direct: f64,
    /// vp_sigma - 1; nonnegative up to rounding.
    pub slack: f64,
}

/// Builds sigma = Tr_1[B^dag (rho (x) E_y) B] and compares the operator-ratio
/// error against the direct posterior error at v = 2. Inputs must be rank-1
/// within tolerance; the estimate point is the posterior mean.
pub fn v2_theorem_check(
    rho: &TruncatedOperator,
    e_y: &TruncatedOperator,
    n_cut: usize,
) -> Result<V2CheckReport> {
    let rho_vec = rho.rank_one_vector(1e-8)?;
    let e_vec = e_y.rank_one_vector(1e-8)?;

    // Direct route: the likelihood of a pure pair is a pure-state filter.
    let filter = Filter::pure_pair(&rho_vec, &e_vec)?;
    let prior = Prior::new(2.0)?;
    let post = posterior_summary(&prior, &filter, DisplacementParams::new(0.0, 0.0)?)?;
    let vp_direct = post.v_prime;
    // The reduced mode of the beamsplitter construction carries the
    // likelihood parity-flipped: pi W_sigma(-xi/sqrt2, -eta/sqrt2) is the
    // conditional density, so the estimate point enters negated.
    let x0 = -post.mean.0 / std::f64::consts::SQRT_2;
    let p0 = -post.mean.1 / std::f64::consts::SQRT_2;

    // Sigma route.
    let sigma = sigma_from_pair(rho, e_y, n_cut)?;
    let t0 = sigma.mat()[[0, 0]].re;
    let scale = sigma.trace().re.abs().max(1e-300);
    if t0 <= 1e-14 * scale {
        return Err(Error::DegenerateConditioning(format!(
            "vacuum weight of sigma is {t0:.3e}"
        )));
    }
    // |phi> = alpha |0> + |1>. With the Wigner phase convention used here
    // (W_{|1><0|} carries x - i p), the weight that reproduces
    // (2/pi)[(x - x0)^2 + (p - p0)^2] e^{-x^2-p^2} is
    // alpha = -sqrt(2) (x0 - i p0).
    let alpha = -std::f64::consts::SQRT_2 * Complex64::new(x0, -p0);
    let s = sigma.mat();
    let t_phi = (alpha.conj() * s[[0, 0]] * alpha
        + alpha.conj() * s[[0, 1]]
        + s[[1, 0]] * alpha
        + s[[1, 1]])
        .re;
    let vp_sigma = (t0 + t_phi) / t0;

    Ok(V2CheckReport {
        sigma_trace: sigma.trace().re,
        vp_sigma,
        x0,
        p0,
        vp_direct,
        slack: vp_sigma - 1.0,
    })
}

/// Tr_1[B^dag (rho (x) e) B] without forming the dense two-mode product;
/// only the support entries of rho (x) e contribute.
pub fn sigma_from_pair(
    rho: &TruncatedOperator,
    e_y: &TruncatedOperator,
    n_cut: usize,
) -> Result<TruncatedOperator> {
    let bs = beamsplitter_half(n_cut)?;
    let d1 = n_cut + 1;
    let dim2 = d1 * d1;

    let entries = support_entries(rho, e_y, n_cut)?;
    if entries.is_empty() {
        return Err(Error::InvalidInput("sigma_from_pair: zero product".into()));
    }

    // Row set of M = rho (x) e with nonzero support.
    let mut rows: Vec<usize> = entries.iter().map(|&(i, _, _)| i).collect();
    rows.sort_unstable();
    rows.dedup();
    let row_pos: std::collections::HashMap<usize, usize> =
        rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();

    // T = M . B restricted to those rows.
    let mut t = vec![Complex64::new(0.0, 0.0); rows.len() * dim2];
    for &(i, j, val) in &entries {
        let k = row_pos[&i];
        for c in 0..dim2 {
            t[k * dim2 + c] += val * bs.mat()[[j, c]];
        }
    }

    // sigma[n][n'] = sum_m sum_i conj(B[i][(m,n)]) T[i][(m,n')].
    let mut sigma = TruncatedOperator::zeros(n_cut);
    for n in 0..d1 {
        for np in 0..d1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..d1 {
                let col_left = m * d1 + n;
                let col_right = m * d1 + np;
                for (k, &i) in rows.iter().enumerate() {
                    acc += bs.mat()[[i, col_left]].conj() * t[k * dim2 + col_right];
                }
            }
            sigma.mat_mut()[[n, np]] = acc;
        }
    }
    Ok(sigma)
}

fn support_entries(
    rho: &TruncatedOperator,
    e_y: &TruncatedOperator,
    n_cut: usize,
) -> Result<Vec<(usize, usize, Complex64)>> {
    let d1 = n_cut + 1;
    let top_rho = top_support(rho);
    let top_e = top_support(e_y);
    if top_rho > n_cut || top_e > n_cut {
        return Err(Error::ShapeMismatch(format!(
            "operator support ({top_rho}, {top_e}) exceeds the two-mode cutoff {n_cut}"
        )));
    }
    let mut entries = Vec::new();
    for m in 0..rho.dim().min(d1) {
        for mp in 0..rho.dim().min(d1) {
            let a = rho.mat()[[m, mp]];
            if a.norm() <= 1e-16 {
                continue;
            }
            for n in 0..e_y.dim().min(d1) {
                for np in 0..e_y.dim().min(d1) {
                    let b = e_y.mat()[[n, np]];
                    if b.norm() <= 1e-16 {
                        continue;
                    }
                    entries.push((m * d1 + n, mp * d1 + np, a * b));
                }
            }
        }
    }
    Ok(entries)
}

fn top_support(op: &TruncatedOperator) -> usize {
    let mut top = 0;
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            if op.mat()[[i, j]].norm() > 1e-14 {
                top = top.max(i.max(j));
            }
        }
    }
    top
}
