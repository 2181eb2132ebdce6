//! CSV emitters for the sweep subcommands.
//!
//! All numeric columns print with 17 significant digits so files are
//! byte-identical across runs and round-trip through any reader.

use std::io::Write;

use dispest_core::bayes::{posterior_summary, vp_bayes, window_average, Prior};
use dispest_core::filter::{mixture_filter, Filter};
use dispest_core::fock::{lossy_single_photon, DisplacementParams, TruncatedOperator};
use dispest_core::gaussian::{classical_bound, gaussian_bound, Covariance2};
use dispest_core::ghosh::fisher_sweep;
use dispest_core::sweeps::{log_grid, loss_threshold, lossy_vp};
use rayon::prelude::*;

use crate::config::{Ancilla, Family, Outcome, ScenarioConfig};

/// 17-significant-digit scientific formatting (round-trips f64 exactly).
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

pub type CmdResult = Result<(), String>;

fn emit(out: &mut dyn Write, line: &str) -> CmdResult {
    writeln!(out, "{line}").map_err(|e| format!("write failed: {e}"))
}

/// `v,vp_classical,vp_gaussian` over a prior-variance grid.
pub fn cmd_bounds(out: &mut dyn Write, grid: &[f64]) -> CmdResult {
    emit(out, "v,vp_classical,vp_gaussian")?;
    for &v in grid {
        let c = classical_bound(v).map_err(|e| e.to_string())?;
        let g = gaussian_bound(v).map_err(|e| e.to_string())?;
        emit(out, &format!("{},{},{}", f17(v), f17(c), f17(g)))?;
    }
    Ok(())
}

/// Build the likelihood kernel for a probe/ancilla pairing.
pub fn build_filter(probe: Family, ancilla: Ancilla, n_cut: usize) -> Result<Filter, String> {
    let resolved = match ancilla {
        Ancilla::Same => probe,
        Ancilla::Family(f) => f,
    };
    match (probe, resolved) {
        (Family::Gkp, Family::Gkp) => Ok(Filter::gkp()),
        (Family::Gkp, other) | (other, Family::Gkp) => Err(format!(
            "a grid-state probe needs a grid-state ancilla, got {other}"
        )),
        (Family::Gaussian(a), Family::Gaussian(b)) => {
            // Summed Wigner covariances of two axis-squeezed pure states.
            let cov = Covariance2::diagonal(0.5 * (a + b), 0.5 * (1.0 / a + 1.0 / b))
                .map_err(|e| e.to_string())?;
            Ok(Filter::gaussian(cov))
        }
        (Family::Gaussian(_), other) | (other, Family::Gaussian(_)) => Err(format!(
            "a Gaussian probe needs a Gaussian ancilla, got {other}"
        )),
        (p, a) => {
            let op = |family: Family| -> Result<TruncatedOperator, String> {
                match family {
                    Family::Fock(n) => TruncatedOperator::fock_projector(n, n_cut.max(n))
                        .map_err(|e| e.to_string()),
                    Family::Lossy(l) => {
                        lossy_single_photon(l, n_cut.max(1)).map_err(|e| e.to_string())
                    }
                    _ => unreachable!("gaussian and gkp handled above"),
                }
            };
            mixture_filter(&op(p)?, &op(a)?).map_err(|e| e.to_string())
        }
    }
}

/// `v,vp[,p_y]` for one scenario over the configured prior grid.
pub fn cmd_curve(out: &mut dyn Write, cfg: &ScenarioConfig) -> CmdResult {
    let filter = build_filter(cfg.probe, cfg.ancilla, cfg.n_cut)?;
    let grid = cfg.prior.values();

    match cfg.outcome {
        Outcome::Point(yx, yp) => {
            emit(out, "v,vp,p_y")?;
            let y = DisplacementParams::new(yx, yp).map_err(|e| e.to_string())?;
            let rows: Result<Vec<String>, String> = grid
                .par_iter()
                .map(|&v| {
                    let prior = Prior::new(v).map_err(|e| e.to_string())?;
                    let post =
                        posterior_summary(&prior, &filter, y).map_err(|e| e.to_string())?;
                    Ok(format!(
                        "{},{},{}",
                        f17(v),
                        f17(post.v_prime),
                        f17(post.p_y)
                    ))
                })
                .collect();
            for row in rows? {
                emit(out, &row)?;
            }
        }
        Outcome::Bayes => {
            emit(out, "v,vp")?;
            let rows: Result<Vec<String>, String> = grid
                .par_iter()
                .map(|&v| {
                    let prior = Prior::new(v).map_err(|e| e.to_string())?;
                    let vb = vp_bayes(&prior, &filter).map_err(|e| e.to_string())?;
                    Ok(format!("{},{}", f17(v), f17(vb)))
                })
                .collect();
            for row in rows? {
                emit(out, &row)?;
            }
        }
        Outcome::Window(r) => {
            emit(out, "v,vp,p_y")?;
            let rows: Result<Vec<String>, String> = grid
                .par_iter()
                .map(|&v| {
                    let prior = Prior::new(v).map_err(|e| e.to_string())?;
                    let w = window_average(&prior, &filter, r).map_err(|e| e.to_string())?;
                    Ok(format!(
                        "{},{},{}",
                        f17(v),
                        f17(w.avg_vp),
                        f17(w.p_select)
                    ))
                })
                .collect();
            for row in rows? {
                emit(out, &row)?;
            }
        }
    }
    Ok(())
}

/// `l,v,vp` over a loss-rate and prior-variance grid, plus the bisected
/// bound-beating thresholds written to `report`.
pub fn cmd_loss_sweep(
    out: &mut dyn Write,
    report: &mut dyn Write,
    l_grid: &[f64],
    v_grid: &[f64],
) -> CmdResult {
    emit(out, "l,v,vp")?;
    let rows: Result<Vec<String>, String> = l_grid
        .par_iter()
        .map(|&l| {
            let mut block = String::new();
            for &v in v_grid {
                let vp = lossy_vp(l, v).map_err(|e| e.to_string())?;
                block.push_str(&format!("{},{},{}\n", f17(l), f17(v), f17(vp)));
            }
            Ok(block)
        })
        .collect();
    for block in rows? {
        write!(out, "{block}").map_err(|e| format!("write failed: {e}"))?;
    }

    let t_gauss =
        loss_threshold(&|v| gaussian_bound(v), 1e-4).map_err(|e| e.to_string())?;
    let t_classical =
        loss_threshold(&|v| classical_bound(v), 1e-4).map_err(|e| e.to_string())?;
    writeln!(report, "threshold_gaussian = {}", f17(t_gauss))
        .map_err(|e| format!("report write failed: {e}"))?;
    writeln!(report, "threshold_classical = {}", f17(t_classical))
        .map_err(|e| format!("report write failed: {e}"))?;
    Ok(())
}

/// `n,inv_vp_minus_inv_v,p_y` for the photon-number sweep at fixed v.
pub fn cmd_fisher_sweep(out: &mut dyn Write, v: f64, n_max: usize) -> CmdResult {
    emit(out, "n,inv_vp_minus_inv_v,p_y")?;
    let rows = fisher_sweep(v, n_max).map_err(|e| e.to_string())?;
    for row in rows {
        emit(
            out,
            &format!("{},{},{}", row.n, f17(row.inv_vp_minus_inv_v), f17(row.p_y)),
        )?;
    }
    Ok(())
}

/// `r,p_select,avg_vp` for windowed post-selection at fixed prior variance.
pub fn cmd_window(
    out: &mut dyn Write,
    cfg: &ScenarioConfig,
    v: f64,
    r_grid: &[f64],
) -> CmdResult {
    let filter = build_filter(cfg.probe, cfg.ancilla, cfg.n_cut)?;
    let prior = Prior::new(v).map_err(|e| e.to_string())?;
    emit(out, "r,p_select,avg_vp")?;
    let rows: Result<Vec<String>, String> = r_grid
        .par_iter()
        .map(|&r| {
            let w = window_average(&prior, &filter, r).map_err(|e| e.to_string())?;
            Ok(format!("{},{},{}", f17(r), f17(w.p_select), f17(w.avg_vp)))
        })
        .collect();
    for row in rows? {
        emit(out, &row)?;
    }
    Ok(())
}

/// Linear grid helper for radii and loss rates.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Prior grid shared by bounds/loss sweeps.
pub fn default_v_grid(min: f64, max: f64, points: usize, linear: bool) -> Vec<f64> {
    if linear {
        linear_grid(min, max, points)
    } else {
        log_grid(min, max, points)
    }
}
