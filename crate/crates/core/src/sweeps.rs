//! Parameter sweeps shared by the command-line surface and the acceptance
//! checks: the loss-rate study and its bound-beating thresholds.

use crate::bayes::{posterior_summary, Prior};
use crate::error::{Error, Result};
use crate::filter::mixture_filter;
use crate::fock::{lossy_single_photon, DisplacementParams};

/// Post-selected error at y = (0, 0) when both the probe and the ancilla are
/// single photons through a loss channel of rate l.
pub fn lossy_vp(l: f64, v: f64) -> Result<f64> {
    let rho = lossy_single_photon(l, 4)?;
    let filter = mixture_filter(&rho, &rho)?;
    let prior = Prior::new(v)?;
    Ok(posterior_summary(&prior, &filter, DisplacementParams::new(0.0, 0.0)?)?.v_prime)
}

/// Logarithmic grid, inclusive of both endpoints.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (step * i as f64).exp()).collect()
}

/// min over v of (lossy v'(l, v) - bound(v)), scanned on a log grid and
/// polished by golden-section refinement around the best grid point.
pub fn lossy_margin<B>(l: f64, bound: &B) -> Result<f64>
where
    B: Fn(f64) -> Result<f64>,
{
    // The classical-bound beating region collapses toward v = 0 as the loss
    // approaches 1/2; the scan has to reach well below v = 0.01 to resolve
    // the threshold there.
    let grid = log_grid(0.005, 10.0, 200);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for (i, &v) in grid.iter().enumerate() {
        let m = lossy_vp(l, v)? - bound(v)?;
        if m < best {
            best = m;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let margin = |v: f64| -> Result<f64> { Ok(lossy_vp(l, v)? - bound(v)?) };
    let mut fc = margin(c)?;
    let mut fd = margin(d)?;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = margin(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = margin(d)?;
        }
    }
    Ok(best.min(fc).min(fd))
}

/// Largest loss rate for which the lossy single-photon pair still beats the
/// given bound somewhere in v, bisected to `tol_l`.
pub fn loss_threshold<B>(bound: &B, tol_l: f64) -> Result<f64>
where
    B: Fn(f64) -> Result<f64>,
{
    let beaten = |l: f64| -> Result<bool> { Ok(lossy_margin(l, bound)? < 0.0) };
    if !beaten(0.0)? {
        return Err(Error::InvalidInput(
            "the lossless pair does not beat the bound anywhere".into(),
        ));
    }
    let mut lo = 0.0_f64; // beaten
    let mut hi = 1.0_f64; // not beaten (full loss is classical)
    while hi - lo > tol_l {
        let mid = 0.5 * (lo + hi);
        if beaten(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::classical_bound;
    use approx::assert_relative_eq;

    #[test]
    fn lossless_matches_single_photon_curve() {
        for v in [0.5, 1.0, 2.0] {
            assert_relative_eq!(
                lossy_vp(0.0, v).unwrap(),
                crate::ghosh::single_photon_vp_closed(v, 0.0).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.05, 20.0, 60);
        assert_eq!(g.len(), 60);
        assert_relative_eq!(g[0], 0.05, epsilon = 1e-12);
        assert_relative_eq!(g[59], 20.0, max_relative = 1e-12);
    }

    #[test]
    fn lossy_vp_matches_independent_moment_algebra() {
        // The lossy kernel is (c0 + c1 t + c2 t^2) e^{-bt} in t = r^2 up to
        // normalization, so the error has the closed ratio
        // v' = (c0 + 2 c1/b + 6 c2/b^2) / (b (c0 + c1/b + 2 c2/b^2)).
        for l in [0.0, 0.1, 0.3, 0.45, 0.8] {
            for v in [0.05, 0.5, 1.0, 4.0] {
                let b = 1.0 / v + 0.5;
                let c0 = (1.0 - l) * (1.0 - l) + l * l;
                let c1 = (1.0 - l) * (2.0 * l - 1.0);
                let c2 = (1.0 - l) * (1.0 - l) / 4.0;
                let closed = (c0 + 2.0 * c1 / b + 6.0 * c2 / (b * b))
                    / (b * (c0 + c1 / b + 2.0 * c2 / (b * b)));
                assert_relative_eq!(lossy_vp(l, v).unwrap(), closed, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn classical_margin_sign_flips_near_half() {
        // The classical bound stops being beaten exactly at l = 1/2.
        let bound = |v: f64| classical_bound(v);
        assert!(lossy_margin(0.45, &bound).unwrap() < 0.0);
        assert!(lossy_margin(0.55, &bound).unwrap() > 0.0);
    }
}
