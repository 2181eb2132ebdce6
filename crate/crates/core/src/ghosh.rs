//! Fisher-type lower bounds for the post-selected error, and the closed
//! forms used as golden regression anchors.
//!
//! Conditioned on an outcome y, the error obeys v' >= 4 / (F0(y) + F(y)):
//! F0 is the prior curvature term (4/v for the isotropic Gaussian prior) and
//! F(y) the posterior-averaged likelihood curvature. F(y) is evaluated from
//! Fock-basis traces of displaced POVM elements; a Schwarz-type surrogate
//! caps the score-squared quotient wherever the likelihood passes through a
//! zero, which keeps the integrand finite without biasing the integral.

use num_complex::Complex64;

use crate::bayes::Prior;
use crate::error::{Error, Result};
use crate::filter::FRAC_1_2PI;
use crate::fock::{displacement_table, momentum_op, position_op, TruncatedOperator};
use crate::quad::{adaptive_1d, adaptive_2d, gauss_laguerre};
use crate::special::assoc_laguerre_unchecked;

/// Everything the photon-number bound chain produces for one scenario.
#[derive(Debug, Clone, Copy)]
pub struct GhoshReport {
    /// Prior Fisher term 4/v.
    pub f0: f64,
    /// Likelihood Fisher term F(y).
    pub fisher: f64,
    /// Schwarz upper bound on F(y).
    pub fisher_upper: f64,
    /// Resulting lower bound 4/(F0 + F) on v'.
    pub vp_lower: f64,
    /// Right side of the photon-number bound on 1/v'.
    pub photon_bound: f64,
}

/// Prior Fisher information of the isotropic Gaussian prior: 4/v.
pub fn prior_fisher(v: f64) -> Result<f64> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidInput(format!(
            "prior variance must be positive, got {v}"
        )));
    }
    Ok(4.0 / v)
}

struct TraceKernels {
    dim: usize,
    e_y: TruncatedOperator,
    rho: TruncatedOperator,
    comm_x: TruncatedOperator,
    comm_p: TruncatedOperator,
    sandwich: TruncatedOperator, // x rho x + p rho p
    anti: TruncatedOperator,     // q^2 rho + rho q^2 summed over axes
}

impl TraceKernels {
    fn build(rho: &TruncatedOperator, e_y: &TruncatedOperator) -> Result<Self> {
        let support = support_index(rho).max(support_index(e_y));
        let dim = support + 4;
        let rho = embed(rho, dim - 1)?.symmetrized_hermitian(1e-10)?;
        let e_y = embed(e_y, dim - 1)?.symmetrized_hermitian(1e-10)?;
        let x = position_op(dim - 1);
        let p = momentum_op(dim - 1);

        let xr = x.matmul(&rho)?;
        let rx = rho.matmul(&x)?;
        let pr = p.matmul(&rho)?;
        let rp = rho.matmul(&p)?;
        let comm_x = xr.add(&rx.scale(Complex64::new(-1.0, 0.0)))?;
        let comm_p = pr.add(&rp.scale(Complex64::new(-1.0, 0.0)))?;
        let sandwich = xr.matmul(&x)?.add(&pr.matmul(&p)?)?;
        let q2 = x.matmul(&x)?.add(&p.matmul(&p)?)?;
        let anti = q2.matmul(&rho)?.add(&rho.matmul(&q2)?)?;

        Ok(Self {
            dim,
            e_y,
            rho,
            comm_x,
            comm_p,
            sandwich,
            anti,
        })
    }

    /// Traces against E displaced to the frame of theta:
    /// (Tr rho E~, |Tr C_x E~|^2 + |Tr C_p E~|^2, Tr sandwich E~, Tr anti E~).
    fn traces_at(&self, xi: f64, eta: f64) -> (f64, f64, f64, f64) {
        let alpha = Complex64::new(xi, eta) / std::f64::consts::SQRT_2;
        let d = displacement_table(alpha, self.dim, true);
        // E~ = D^dag E D
        let mut g = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for i in 0..self.dim {
            for k in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..self.dim {
                    acc += self.e_y.mat()[[i, j]] * d[[j, k]];
                }
                g[i * self.dim + k] = acc;
            }
        }
        let mut e_disp = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for l in 0..self.dim {
            for k in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..self.dim {
                    acc += d[[i, l]].conj() * g[i * self.dim + k];
                }
                e_disp[l * self.dim + k] = acc;
            }
        }
        let tr = |m: &TruncatedOperator| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..self.dim {
                for l in 0..self.dim {
                    acc += m.mat()[[k, l]] * e_disp[l * self.dim + k];
                }
            }
            acc
        };
        let likelihood = tr(&self.rho).re;
        let score_sq = tr(&self.comm_x).norm_sqr() + tr(&self.comm_p).norm_sqr();
        (likelihood, score_sq, tr(&self.sandwich).re, tr(&self.anti).re)
    }

    fn is_radial(&self) -> bool {
        off_diagonal_max(&self.rho) < 1e-13 && off_diagonal_max(&self.e_y) < 1e-13
    }
}

fn support_index(op: &TruncatedOperator) -> usize {
    let mut top = 0usize;
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            if op.mat()[[i, j]].norm() > 1e-14 {
                top = top.max(i.max(j));
            }
        }
    }
    top
}

fn off_diagonal_max(op: &TruncatedOperator) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            if i != j {
                worst = worst.max(op.mat()[[i, j]].norm());
            }
        }
    }
    worst
}

fn embed(op: &TruncatedOperator, n_cut: usize) -> Result<TruncatedOperator> {
    let mut out = TruncatedOperator::zeros(n_cut);
    let copy = op.dim().min(n_cut + 1);
    if op.dim() > n_cut + 1 && support_index(op) > n_cut {
        return Err(Error::ShapeMismatch(format!(
            "operator support exceeds target cutoff {n_cut}"
        )));
    }
    for i in 0..copy {
        for j in 0..copy {
            out.mat_mut()[[i, j]] = op.mat()[[i, j]];
        }
    }
    Ok(out)
}

/// Integrate `node -> g(theta)` against the prior over the plane; radial
/// scenarios collapse to one dimension.
fn prior_integral<G>(prior: &Prior, radial: bool, reach: f64, g: G) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    if radial {
        adaptive_1d(
            |r: f64| {
                Ok(2.0 * std::f64::consts::PI * r * prior.pdf(r, 0.0) * g(r, 0.0))
            },
            0.0,
            reach,
            1e-10,
            1e-14,
        )
    } else {
        adaptive_2d(
            |xi, eta| Ok(prior.pdf(xi, eta) * g(xi, eta)),
            (-reach, reach),
            (-reach, reach),
            1e-9,
            1e-13,
        )
    }
}

fn fisher_parts(prior: &Prior, rho: &TruncatedOperator, e_y: &TruncatedOperator) -> Result<(f64, f64, f64)> {
    let kernels = TraceKernels::build(rho, e_y)?;
    let radial = kernels.is_radial();
    let reach = (prior.v() * 41.0).sqrt() + (2.0 * (kernels.dim as f64)).sqrt() + 6.0;

    let p_y = prior_integral(prior, radial, reach, |xi, eta| {
        kernels.traces_at(xi, eta).0
    })?;
    if p_y <= 0.0 {
        return Err(Error::NullConditioning(p_y));
    }
    let fisher = prior_integral(prior, radial, reach, |xi, eta| {
        let (likelihood, score_sq, sandwich, anti) = kernels.traces_at(xi, eta);
        // The Schwarz inequality caps the quotient by 4 Tr(q rho q E~)
        // pointwise; applying the cap unconditionally also rides over the
        // double zeros of the likelihood where 0/0 would otherwise appear.
        let quotient = (score_sq / likelihood.max(1e-300)).min(4.0 * sandwich);
        quotient + (anti - 2.0 * sandwich)
    })? / p_y;
    let fisher_upper = prior_integral(prior, radial, reach, |xi, eta| {
        let (_, _, sandwich, anti) = kernels.traces_at(xi, eta);
        2.0 * sandwich + anti
    })? / p_y;
    Ok((p_y, fisher, fisher_upper))
}

/// F(y): the likelihood curvature term of the conditioned bound, from
/// Fock-basis traces and quadrature over the prior.
pub fn fisher_f(prior: &Prior, rho: &TruncatedOperator, e_y: &TruncatedOperator) -> Result<f64> {
    Ok(fisher_parts(prior, rho, e_y)?.1)
}

/// The Schwarz upper bound on F(y).
pub fn fisher_upper_bound(
    prior: &Prior,
    rho: &TruncatedOperator,
    e_y: &TruncatedOperator,
) -> Result<f64> {
    Ok(fisher_parts(prior, rho, e_y)?.2)
}

/// Right side of the photon-number bound on 1/v':
/// 1/v + (sqrt(2)+1)(n + 1/2) sqrt(Tr E^2)/p(y).
pub fn photon_number_bound(v: f64, n: usize, trace_ey_sq: f64, p_y: f64) -> Result<f64> {
    if v <= 0.0 || trace_ey_sq <= 0.0 {
        return Err(Error::InvalidInput(
            "photon_number_bound requires positive v and Tr E^2".into(),
        ));
    }
    if p_y <= 0.0 {
        return Err(Error::NullConditioning(p_y));
    }
    Ok(1.0 / v
        + (std::f64::consts::SQRT_2 + 1.0) * (n as f64 + 0.5) * trace_ey_sq.sqrt() / p_y)
}

/// The full bound chain for one (prior, rho, E_y) scenario. `max_photon` is
/// the largest Fock index populated by the probe.
pub fn ghosh_report(
    prior: &Prior,
    rho: &TruncatedOperator,
    e_y: &TruncatedOperator,
    max_photon: usize,
) -> Result<GhoshReport> {
    let (p_y, fisher, fisher_upper) = fisher_parts(prior, rho, e_y)?;
    let f0 = prior_fisher(prior.v())?;
    let tr_e_sq = e_y.trace_product(e_y)?.re;
    Ok(GhoshReport {
        f0,
        fisher,
        fisher_upper,
        vp_lower: 4.0 / (f0 + fisher),
        photon_bound: photon_number_bound(prior.v(), max_photon, tr_e_sq, p_y)?,
    })
}

// ---------------------------------------------------------------------------
// Closed forms for the single-photon probe conditioned at y = (q, 0)
// ---------------------------------------------------------------------------

fn single_photon_poly_numer(v: f64, q: f64) -> f64 {
    let q2 = q * q;
    let q4 = q2 * q2;
    let q6 = q4 * q2;
    let q8 = q4 * q4;
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v2 * v2;
    let v5 = v4 * v;
    let v6 = v4 * v2;
    let v7 = v6 * v;
    let v8 = v4 * v4;
    2.0 * v
        * (16.0 * q8 + 32.0 * q6 * v2 - 128.0 * q6 + 32.0 * q4 * v4 + 48.0 * q4 * v3
            - 96.0 * q4 * v2
            + 64.0 * q4 * v
            + 384.0 * q4
            + 16.0 * q2 * v6
            + 80.0 * q2 * v5
            + 160.0 * q2 * v4
            + 256.0 * q2 * v3
            + 256.0 * q2 * v2
            - 256.0 * q2 * v
            - 512.0 * q2
            + 3.0 * v8
            + 20.0 * v7
            + 56.0 * v6
            + 112.0 * v5
            + 192.0 * v4
            + 192.0 * v3
            + 128.0 * v2
            + 256.0 * v
            + 256.0)
}

fn single_photon_poly_denom(v: f64, q: f64) -> f64 {
    let q2 = q * q;
    let q4 = q2 * q2;
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v2 * v2;
    let inner = 4.0 * q4 + 4.0 * q2 * v2 - 16.0 * q2 + v4 + 4.0 * v3 + 8.0 * v2 + 16.0 * v + 16.0;
    (v + 2.0) * inner * inner
}

/// Closed-form post-selected error for the single-photon pair at y = (q, 0).
pub fn single_photon_vp_closed(v: f64, q: f64) -> Result<f64> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidInput(format!("v must be positive, got {v}")));
    }
    let pd = single_photon_poly_denom(v, q);
    if pd == 0.0 {
        return Err(Error::InvalidInput(format!(
            "closed-form denominator vanishes at v = {v}, q = {q}"
        )));
    }
    Ok(single_photon_poly_numer(v, q) / pd)
}

/// Closed-form outcome density p(q, 0) for the single-photon pair.
pub fn single_photon_py_closed(v: f64, q: f64) -> Result<f64> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidInput(format!("v must be positive, got {v}")));
    }
    let q2 = q * q;
    let q4 = q2 * q2;
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v2 * v2;
    let v5 = v4 * v;
    let numer = (4.0 * q4 + 4.0 * q2 * v2 - 16.0 * q2 + v4 + 4.0 * v3 + 8.0 * v2
        + 16.0 * v
        + 16.0)
        * (-(q2) / (v + 2.0)).exp();
    let denom =
        std::f64::consts::PI * (v5 + 10.0 * v4 + 40.0 * v3 + 80.0 * v2 + 80.0 * v + 32.0);
    Ok(numer / denom)
}

/// One evaluation of the single-photon closed forms at (v, q).
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormPoint {
    pub v: f64,
    pub q: f64,
    pub vp: f64,
    pub py: f64,
}

impl ClosedFormPoint {
    pub fn evaluate(v: f64, q: f64) -> Result<Self> {
        Ok(Self {
            v,
            q,
            vp: single_photon_vp_closed(v, q)?,
            py: single_photon_py_closed(v, q)?,
        })
    }
}

/// The v -> 0 limit of 1/v' - 1/v at y = (q, 0): (q^4 - 4q^2 + 12)/(2 (q^2 - 2)^2).
pub fn single_photon_info_limit(q: f64) -> Result<f64> {
    let q2 = q * q;
    let denom = 2.0 * (q2 - 2.0) * (q2 - 2.0);
    if denom == 0.0 {
        return Err(Error::InvalidInput(
            "information limit has a pole at q^2 = 2".into(),
        ));
    }
    Ok((q2 * q2 - 4.0 * q2 + 12.0) / denom)
}

/// The v -> 0 limit of p(q, 0): (q^2 - 2)^2 e^{-q^2/2} / (8 pi).
pub fn single_photon_py_limit(q: f64) -> f64 {
    let q2 = q * q;
    (q2 - 2.0) * (q2 - 2.0) * (-0.5 * q2).exp() / (8.0 * std::f64::consts::PI)
}

/// The normalized product lim_{v->0} (1/v' - 1/v) p(q,0)/sqrt(Tr E^2) at
/// q^2 = 2 + epsilon; approaches 1/e as epsilon -> 0.
pub fn single_photon_limit_product(epsilon: f64) -> Result<f64> {
    if epsilon == 0.0 {
        return Err(Error::InvalidInput(
            "epsilon = 0 sits exactly on the pole".into(),
        ));
    }
    if epsilon <= -2.0 {
        return Err(Error::InvalidInput(format!(
            "epsilon = {epsilon} puts q^2 below zero"
        )));
    }
    let q = (2.0 + epsilon).sqrt();
    // Heterodyne POVM elements are pure up to 1/(2 pi): Tr E^2 = 1/(2 pi)^2.
    let sqrt_tr_e_sq = FRAC_1_2PI;
    Ok(single_photon_info_limit(q)? * single_photon_py_limit(q) / sqrt_tr_e_sq)
}

// ---------------------------------------------------------------------------
// Photon-number sweep (rho = E_y = |n><n| conditioned at the filter maximum)
// ---------------------------------------------------------------------------

/// One row of the photon-number sweep.
#[derive(Debug, Clone, Copy)]
pub struct FisherSweepRow {
    pub n: usize,
    /// 1/v' - 1/v at the maximum-likelihood outcome.
    pub inv_vp_minus_inv_v: f64,
    /// Outcome probability p(y) with E_y = |n><n| taken as a dimensionless
    /// overlap (no heterodyne 1/(2 pi) factor).
    pub p_y: f64,
}

/// Sweep the probe/POVM photon number at fixed prior variance. All radial
/// integrals reduce to Gauss-Laguerre sums that are exact for the Laguerre
/// polynomial integrands.
pub fn fisher_sweep(v: f64, n_max: usize) -> Result<Vec<FisherSweepRow>> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::InvalidInput(format!("v must be positive, got {v}")));
    }
    if n_max > 50 {
        return Err(Error::OutOfRange(format!(
            "fisher_sweep: n_max = {n_max} exceeds 50"
        )));
    }
    let b = 1.0 / v + 0.5;
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let rule = gauss_laguerre(n + 3);
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = u / b;
            let l = assoc_laguerre_unchecked(n, 0, 0.5 * t);
            let g = l * l;
            m0 += w * g;
            m1 += w * g * t;
        }
        m0 /= b;
        m1 /= b;
        let vp = m1 / m0;
        rows.push(FisherSweepRow {
            n,
            inv_vp_minus_inv_v: 1.0 / vp - 1.0 / v,
            p_y: m0 / v,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{marginal_py, posterior_summary};
    use crate::filter::Filter;
    use crate::fock::{lossy_single_photon, DisplacementParams};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn at(xi: f64, eta: f64) -> DisplacementParams {
        DisplacementParams::new(xi, eta).unwrap()
    }

    fn heterodyne_povm(op: &TruncatedOperator) -> TruncatedOperator {
        op.conjugate().scale(Complex64::new(FRAC_1_2PI, 0.0))
    }

    #[test]
    fn prior_fisher_values() {
        assert_relative_eq!(prior_fisher(4.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(prior_fisher(2.0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(prior_fisher(0.0).is_err());
    }

    #[test]
    fn prior_fisher_matches_posterior_average() {
        // The prior curvature is constant, so its posterior average is 4/v
        // whatever the conditioning; evaluated through the pipeline.
        let prior = Prior::new(1.0).unwrap();
        let f = Filter::fock(1);
        let p_y = marginal_py(&prior, &f, at(0.3, -0.2)).unwrap();
        let numer = crate::quad::adaptive_2d(
            |xi, eta| {
                Ok(prior.pdf(xi, eta)
                    * f.eval(xi - 0.3, eta + 0.2).unwrap()
                    * prior_fisher(1.0).unwrap())
            },
            (-9.0, 9.0),
            (-9.0, 9.0),
            1e-9,
            1e-13,
        )
        .unwrap();
        assert_abs_diff_eq!(numer / p_y, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn closed_form_spot_values() {
        // P_n(1, 0) = 2430, P_d(1, 0) = 6075, ratio 0.4.
        assert_relative_eq!(single_photon_poly_numer(1.0, 0.0), 2430.0, epsilon = 1e-12);
        assert_relative_eq!(single_photon_poly_denom(1.0, 0.0), 6075.0, epsilon = 1e-12);
        assert_relative_eq!(single_photon_vp_closed(1.0, 0.0).unwrap(), 0.4, epsilon = 1e-14);
        assert_relative_eq!(single_photon_vp_closed(2.0, 0.0).unwrap(), 1.0, epsilon = 1e-14);

        let point = ClosedFormPoint::evaluate(1.0, 0.0).unwrap();
        assert_relative_eq!(point.vp, 0.4, epsilon = 1e-14);
        assert!(point.py > 0.0);
    }

    #[test]
    fn closed_forms_match_pipeline_on_grid() {
        let f = Filter::fock(1);
        for v in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let prior = Prior::new(v).unwrap();
            for q in [0.0, 0.5, 1.0, 2.0] {
                let post = posterior_summary(&prior, &f, at(q, 0.0)).unwrap();
                let closed = single_photon_vp_closed(v, q).unwrap();
                assert_relative_eq!(post.v_prime, closed, max_relative = 1e-10);

                let marg = marginal_py(&prior, &f, at(q, 0.0)).unwrap();
                let closed_p = single_photon_py_closed(v, q).unwrap();
                assert_relative_eq!(marg, closed_p, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_small_v_limits() {
        assert_relative_eq!(single_photon_info_limit(0.0).unwrap(), 1.5, epsilon = 1e-15);
        // p(0, 0) -> 2/(8 pi) * ... at q = 0: (0 - 2)^2/(8 pi) = 1/(2 pi).
        assert_relative_eq!(
            single_photon_py_limit(0.0),
            FRAC_1_2PI,
            epsilon = 1e-15
        );
        // Pipeline approaches the printed limits as v -> 0.
        let v = 1e-3;
        let q = 1.0;
        let vp = single_photon_vp_closed(v, q).unwrap();
        assert_relative_eq!(
            1.0 / vp - 1.0 / v,
            single_photon_info_limit(q).unwrap(),
            max_relative = 1e-2
        );
        assert_relative_eq!(
            single_photon_py_closed(v, q).unwrap(),
            single_photon_py_limit(q),
            max_relative = 1e-2
        );
    }

    #[test]
    fn limit_product_approaches_inverse_e() {
        let p = single_photon_limit_product(1e-3).unwrap();
        assert_relative_eq!(p, std::f64::consts::E.recip(), max_relative = 1e-3);
        // The normalized density itself is O(eps^2).
        let q = (2.0 + 1e-3_f64).sqrt();
        assert!(single_photon_py_limit(q) / FRAC_1_2PI < 1e-4);
        assert!(single_photon_limit_product(0.0).is_err());
    }

    #[test]
    fn gaussian_scenario_saturates_the_bound() {
        // rho = E ~ vacuum: F = 2 exactly and the bound 4/(F0 + F) equals the
        // classical error 2v/(v + 2).
        let vac = TruncatedOperator::fock_projector(0, 6).unwrap();
        let e = heterodyne_povm(&vac);
        for v in [0.5, 1.0, 3.0] {
            let prior = Prior::new(v).unwrap();
            let f = fisher_f(&prior, &vac, &e).unwrap();
            assert_relative_eq!(f, 2.0, max_relative = 1e-8);
            let report = ghosh_report(&prior, &vac, &e, 0).unwrap();
            assert_relative_eq!(
                report.vp_lower,
                crate::gaussian::classical_bound(v).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn ghosh_chain_holds_for_fock_and_lossy_scenarios() {
        let n_cut = 8;
        let mut scenarios: Vec<(TruncatedOperator, Filter, usize)> = Vec::new();
        for n in 0..=3usize {
            scenarios.push((
                TruncatedOperator::fock_projector(n, n_cut).unwrap(),
                Filter::fock(n),
                n,
            ));
        }
        for l in [0.0, 0.3] {
            let rho = lossy_single_photon(l, n_cut).unwrap();
            let f = crate::filter::mixture_filter(&rho, &rho).unwrap();
            scenarios.push((rho, f, 1));
        }

        for v in [0.5, 1.0, 2.0] {
            let prior = Prior::new(v).unwrap();
            for (rho, filter, max_photon) in &scenarios {
                let e = heterodyne_povm(rho);
                let report = ghosh_report(&prior, rho, &e, *max_photon).unwrap();
                let post = posterior_summary(&prior, filter, at(0.0, 0.0)).unwrap();

                // 1/v' <= 1/v + F/4.
                assert!(
                    1.0 / post.v_prime <= 1.0 / v + report.fisher / 4.0 + 1e-9,
                    "conditioned bound violated at v = {v}, n <= {max_photon}"
                );
                // Equivalently v' >= 4/(F0 + F).
                assert!(post.v_prime >= report.vp_lower - 1e-9);
                // F <= its Schwarz bound <= the printed photon-number form.
                assert!(report.fisher <= report.fisher_upper + 1e-9);
                let tr_e_sq = e.trace_product(&e).unwrap().re;
                let p_y = marginal_py(&prior, filter, at(0.0, 0.0)).unwrap();
                let printed = 2.0
                    * (std::f64::consts::SQRT_2 + 1.0)
                    * (2.0 * *max_photon as f64 + 1.0)
                    * tr_e_sq.sqrt()
                    / p_y;
                assert!(report.fisher_upper <= printed + 1e-9);
                // Photon-number bound on 1/v'.
                assert!(1.0 / post.v_prime <= report.photon_bound + 1e-9);
                // F is nonnegative on every scenario.
                assert!(report.fisher >= -1e-10);
            }
        }
    }

    #[test]
    fn single_photon_information_reference() {
        // rho = E = |1><1| at v = 1: 1/v' - 1/v = 1.5 must sit below F/4.
        let one = TruncatedOperator::fock_projector(1, 6).unwrap();
        let e = heterodyne_povm(&one);
        let prior = Prior::new(1.0).unwrap();
        let f = fisher_f(&prior, &one, &e).unwrap();
        assert!(f / 4.0 >= 1.5 - 1e-9);
    }

    #[test]
    fn photon_number_bound_holds_through_n_five() {
        let prior = Prior::new(1.0).unwrap();
        for n in 0..=5usize {
            let rho = TruncatedOperator::fock_projector(n, 8).unwrap();
            let e = heterodyne_povm(&rho);
            let vp = posterior_summary(&prior, &Filter::fock(n), at(0.0, 0.0))
                .unwrap()
                .v_prime;
            let p_y = marginal_py(&prior, &Filter::fock(n), at(0.0, 0.0)).unwrap();
            let tr_e_sq = e.trace_product(&e).unwrap().re;
            let bound = photon_number_bound(1.0, n, tr_e_sq, p_y).unwrap();
            assert!(
                1.0 / vp <= bound + 1e-9,
                "photon bound fails at n = {n}: 1/v' = {} vs {bound}",
                1.0 / vp
            );
        }
        // The bound grows linearly in n at fixed v, Tr E^2 and p(y).
        let b_small = photon_number_bound(1.0, 10, 1.0, 0.1).unwrap();
        let b_large = photon_number_bound(1.0, 1000, 1.0, 0.1).unwrap();
        assert_relative_eq!((b_large - 1.0) / (b_small - 1.0), 1000.5 / 10.5, epsilon = 1e-12);
    }

    #[test]
    fn heterodyne_povm_purity_trace() {
        // Tr E^2 = 1/(2 pi)^2 for a pure ancilla.
        let one = TruncatedOperator::fock_projector(1, 6).unwrap();
        let e = heterodyne_povm(&one);
        assert_relative_eq!(
            e.trace_product(&e).unwrap().re,
            FRAC_1_2PI * FRAC_1_2PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn fisher_scale_invariance_in_the_povm() {
        let one = TruncatedOperator::fock_projector(1, 6).unwrap();
        let prior = Prior::new(0.7).unwrap();
        let f1 = fisher_f(&prior, &one, &one).unwrap();
        let f2 = fisher_f(&prior, &one, &one.scale(Complex64::new(0.042, 0.0))).unwrap();
        assert_relative_eq!(f1, f2, max_relative = 1e-9);
    }

    #[test]
    fn sweep_reference_row_and_pipeline_agreement() {
        for v in [0.5, 1.0] {
            let rows = fisher_sweep(v, 6).unwrap();
            // n = 0: 1/v' - 1/v = 1/2 and p_y = 2/(v + 2) exactly.
            assert_relative_eq!(rows[0].inv_vp_minus_inv_v, 0.5, epsilon = 1e-12);
            assert_relative_eq!(rows[0].p_y, 2.0 / (v + 2.0), epsilon = 1e-12);
            // Radial Gauss-Laguerre route vs the planar Gauss-Hermite route.
            let prior = Prior::new(v).unwrap();
            for row in &rows {
                let post =
                    posterior_summary(&prior, &Filter::fock(row.n), at(0.0, 0.0)).unwrap();
                assert_relative_eq!(
                    1.0 / post.v_prime - 1.0 / v,
                    row.inv_vp_minus_inv_v,
                    max_relative = 1e-10
                );
                let overlap = 2.0
                    * std::f64::consts::PI
                    * marginal_py(&prior, &Filter::fock(row.n), at(0.0, 0.0)).unwrap();
                assert_relative_eq!(overlap, row.p_y, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn sweep_rises_then_decays_at_small_v() {
        let rows = fisher_sweep(0.5, 12).unwrap();
        let vals: Vec<f64> = rows.iter().map(|r| r.inv_vp_minus_inv_v).collect();
        let peak = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(peak > 0 && peak < vals.len() - 1, "peak at {peak}");
        for k in peak..(vals.len() - 1) {
            assert!(vals[k + 1] < vals[k]);
        }
        let probs: Vec<f64> = rows.iter().map(|r| r.p_y).collect();
        for k in 1..(probs.len() - 1) {
            assert!(probs[k + 1] < probs[k], "p_y not decreasing at n = {k}");
        }
    }
}
