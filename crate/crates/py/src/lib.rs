//! Python bindings: the main scenario families and posterior operations,
//! exposed one level above the core crate so scripts can sweep and plot
//! without the CLI.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dispest_core::bayes::{self, Prior};
use dispest_core::filter::{mixture_filter, Filter};
use dispest_core::fock::{lossy_single_photon, DisplacementParams, TruncatedOperator};
use dispest_core::gaussian::{self, Covariance2};
use dispest_core::ghosh;
use dispest_core::oracle;
use dispest_core::sweeps;

fn err(e: dispest_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn outcome(yx: f64, yp: f64) -> PyResult<DisplacementParams> {
    DisplacementParams::new(yx, yp).map_err(err)
}

/// Posterior mean, covariance, error and outcome density at one outcome.
#[pyclass(frozen)]
struct Posterior {
    #[pyo3(get)]
    mean: (f64, f64),
    #[pyo3(get)]
    cov: ((f64, f64), (f64, f64)),
    #[pyo3(get)]
    v_prime: f64,
    #[pyo3(get)]
    p_y: f64,
}

impl From<bayes::PosteriorSummary> for Posterior {
    fn from(s: bayes::PosteriorSummary) -> Self {
        Posterior {
            mean: s.mean,
            cov: ((s.cov.xx(), s.cov.xy()), (s.cov.xy(), s.cov.yy())),
            v_prime: s.v_prime,
            p_y: s.p_y,
        }
    }
}

#[pymethods]
impl Posterior {
    fn __repr__(&self) -> String {
        format!(
            "Posterior(v_prime={:.6e}, p_y={:.6e}, mean=({:.3e}, {:.3e}))",
            self.v_prime, self.p_y, self.mean.0, self.mean.1
        )
    }
}

fn build_filter(probe: &str, ancilla: Option<&str>) -> PyResult<Filter> {
    let probe_kind = parse_family(probe)?;
    let ancilla_kind = match ancilla {
        None => probe_kind,
        Some(a) => parse_family(a)?,
    };
    match (probe_kind, ancilla_kind) {
        (FamilySpec::Gkp, FamilySpec::Gkp) => Ok(Filter::gkp()),
        (FamilySpec::Gaussian(a), FamilySpec::Gaussian(b)) => {
            let cov = Covariance2::diagonal(0.5 * (a + b), 0.5 * (1.0 / a + 1.0 / b))
                .map_err(err)?;
            Ok(Filter::gaussian(cov))
        }
        (FamilySpec::Gkp, _) | (_, FamilySpec::Gkp) => Err(PyValueError::new_err(
            "a grid-state probe needs a grid-state ancilla",
        )),
        (FamilySpec::Gaussian(_), _) | (_, FamilySpec::Gaussian(_)) => Err(
            PyValueError::new_err("a Gaussian probe needs a Gaussian ancilla"),
        ),
        (p, a) => {
            let op = |f: FamilySpec| -> PyResult<TruncatedOperator> {
                match f {
                    FamilySpec::Fock(n) => {
                        TruncatedOperator::fock_projector(n, n.max(1)).map_err(err)
                    }
                    FamilySpec::Lossy(l) => lossy_single_photon(l, 1).map_err(err),
                    _ => unreachable!(),
                }
            };
            mixture_filter(&op(p)?, &op(a)?).map_err(err)
        }
    }
}

#[derive(Clone, Copy)]
enum FamilySpec {
    Fock(usize),
    Lossy(f64),
    Gaussian(f64),
    Gkp,
}

fn parse_family(spec: &str) -> PyResult<FamilySpec> {
    let spec = spec.trim();
    if spec == "gkp" {
        return Ok(FamilySpec::Gkp);
    }
    let (kind, arg) = spec.split_once(':').ok_or_else(|| {
        PyValueError::new_err(format!(
            "state family `{spec}` must be fock:N, lossy:L, gaussian:A or gkp"
        ))
    })?;
    match kind {
        "fock" => Ok(FamilySpec::Fock(arg.parse().map_err(|e| {
            PyValueError::new_err(format!("fock photon number: {e}"))
        })?)),
        "lossy" => Ok(FamilySpec::Lossy(arg.parse().map_err(|e| {
            PyValueError::new_err(format!("loss rate: {e}"))
        })?)),
        "gaussian" => Ok(FamilySpec::Gaussian(arg.parse().map_err(|e| {
            PyValueError::new_err(format!("squeeze parameter: {e}"))
        })?)),
        other => Err(PyValueError::new_err(format!("unknown family `{other}`"))),
    }
}

/// Classical lower bound 2v/(v + 2) on the post-selected error.
#[pyfunction]
fn classical_bound(v: f64) -> PyResult<f64> {
    gaussian::classical_bound(v).map_err(err)
}

/// Gaussian lower bound: v/2 below v = 2, the classical bound above.
#[pyfunction]
fn gaussian_bound(v: f64) -> PyResult<f64> {
    gaussian::gaussian_bound(v).map_err(err)
}

/// Error of the axis-squeezed Gaussian scenario with likelihood eigenvalues
/// a and 1/a.
#[pyfunction]
fn squeeze_scan_vp(a: f64, v: f64) -> PyResult<f64> {
    if a <= 0.0 || v <= 0.0 {
        return Err(PyValueError::new_err("a and v must be positive"));
    }
    Ok(gaussian::squeeze_scan_vp(a, v))
}

/// Likelihood kernel value f(x, p) for the given probe/ancilla pair.
#[pyfunction]
#[pyo3(signature = (probe, x, p, ancilla=None))]
fn filter_value(probe: &str, x: f64, p: f64, ancilla: Option<&str>) -> PyResult<f64> {
    build_filter(probe, ancilla)?.eval(x, p).map_err(err)
}

/// Prior density (1/pi v) exp(-(xi^2 + eta^2)/v).
#[pyfunction]
fn prior_pdf(v: f64, xi: f64, eta: f64) -> PyResult<f64> {
    Ok(Prior::new(v).map_err(err)?.pdf(xi, eta))
}

/// Posterior summary given the outcome (y_x, y_p).
#[pyfunction]
#[pyo3(signature = (probe, v, yx=0.0, yp=0.0, ancilla=None))]
fn posterior(probe: &str, v: f64, yx: f64, yp: f64, ancilla: Option<&str>) -> PyResult<Posterior> {
    let filter = build_filter(probe, ancilla)?;
    let prior = Prior::new(v).map_err(err)?;
    bayes::posterior_summary(&prior, &filter, outcome(yx, yp)?)
        .map(Posterior::from)
        .map_err(err)
}

/// Marginal outcome density p(y).
#[pyfunction]
#[pyo3(signature = (probe, v, yx=0.0, yp=0.0, ancilla=None))]
fn marginal_py(probe: &str, v: f64, yx: f64, yp: f64, ancilla: Option<&str>) -> PyResult<f64> {
    let filter = build_filter(probe, ancilla)?;
    let prior = Prior::new(v).map_err(err)?;
    bayes::marginal_py(&prior, &filter, outcome(yx, yp)?).map_err(err)
}

/// Outcome-averaged error without post-selection.
#[pyfunction]
#[pyo3(signature = (probe, v, ancilla=None))]
fn vp_bayes(probe: &str, v: f64, ancilla: Option<&str>) -> PyResult<f64> {
    let filter = build_filter(probe, ancilla)?;
    let prior = Prior::new(v).map_err(err)?;
    bayes::vp_bayes(&prior, &filter).map_err(err)
}

/// Windowed post-selection over |y| <= r: returns (avg_vp, p_select).
#[pyfunction]
#[pyo3(signature = (probe, v, r, ancilla=None))]
fn window_average(probe: &str, v: f64, r: f64, ancilla: Option<&str>) -> PyResult<(f64, f64)> {
    let filter = build_filter(probe, ancilla)?;
    let prior = Prior::new(v).map_err(err)?;
    let report = bayes::window_average(&prior, &filter, r).map_err(err)?;
    Ok((report.avg_vp, report.p_select))
}

/// Closed-form single-photon error v'(v, q) at outcome (q, 0).
#[pyfunction]
fn single_photon_vp_closed(v: f64, q: f64) -> PyResult<f64> {
    ghosh::single_photon_vp_closed(v, q).map_err(err)
}

/// Closed-form single-photon outcome density p(q, 0).
#[pyfunction]
fn single_photon_py_closed(v: f64, q: f64) -> PyResult<f64> {
    ghosh::single_photon_py_closed(v, q).map_err(err)
}

/// Photon-number sweep at fixed prior variance: rows of
/// (n, 1/v' - 1/v, p_y).
#[pyfunction]
fn fisher_sweep(v: f64, n_max: usize) -> PyResult<Vec<(usize, f64, f64)>> {
    Ok(ghosh::fisher_sweep(v, n_max)
        .map_err(err)?
        .into_iter()
        .map(|row| (row.n, row.inv_vp_minus_inv_v, row.p_y))
        .collect())
}

/// Largest loss rates at which the lossy single-photon pair still beats the
/// Gaussian and classical bounds: returns (gaussian, classical).
#[pyfunction]
fn loss_thresholds() -> PyResult<(f64, f64)> {
    let g = sweeps::loss_threshold(&|v| gaussian::gaussian_bound(v), 1e-4).map_err(err)?;
    let c = sweeps::loss_threshold(&|v| gaussian::classical_bound(v), 1e-4).map_err(err)?;
    Ok((g, c))
}

/// Monte-Carlo importance-sampling cross-check of the posterior: returns
/// (v_prime, std_err). Deterministic per seed.
#[pyfunction]
#[pyo3(signature = (probe, v, yx=0.0, yp=0.0, n_samples=100_000, seed=7, ancilla=None))]
fn mc_posterior(
    probe: &str,
    v: f64,
    yx: f64,
    yp: f64,
    n_samples: usize,
    seed: u64,
    ancilla: Option<&str>,
) -> PyResult<(f64, f64)> {
    let filter = build_filter(probe, ancilla)?;
    let prior = Prior::new(v).map_err(err)?;
    let result =
        oracle::mc_posterior(&prior, &filter, outcome(yx, yp)?, n_samples, seed).map_err(err)?;
    Ok((result.v_prime, result.std_err))
}

/// The v = 2 operator-ratio check for a pure Fock pair: returns
/// (vp_sigma, vp_direct, slack).
#[pyfunction]
#[pyo3(signature = (n_probe, n_povm, n_cut=12))]
fn v2_check_fock(n_probe: usize, n_povm: usize, n_cut: usize) -> PyResult<(f64, f64, f64)> {
    let rho = TruncatedOperator::fock_projector(n_probe, n_cut).map_err(err)?;
    let e = TruncatedOperator::fock_projector(n_povm, n_cut).map_err(err)?;
    let report = oracle::v2_theorem_check(&rho, &e, n_cut).map_err(err)?;
    Ok((report.vp_sigma, report.vp_direct, report.slack))
}

/// Wigner function of the Fock state |n><n| at a phase-space point.
#[pyfunction]
fn wigner_fock(n: usize, x: f64, p: f64) -> PyResult<f64> {
    let op = TruncatedOperator::fock_projector(n, n.max(1)).map_err(err)?;
    dispest_core::fock::wigner_eval_real(&op, x, p).map_err(err)
}

/// Displacement matrix element <m| D(xi, eta) |n>, returned as (re, im).
#[pyfunction]
fn displacement_element(m: usize, n: usize, xi: f64, eta: f64) -> PyResult<(f64, f64)> {
    let n_cut = m.max(n).max(1);
    let d = dispest_core::fock::displacement_matrix(outcome(xi, eta)?, n_cut).map_err(err)?;
    let z: Complex64 = d.mat()[[m, n]];
    Ok((z.re, z.im))
}

#[pymodule]
fn dispest_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Posterior>()?;
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_bound, m)?)?;
    m.add_function(wrap_pyfunction!(squeeze_scan_vp, m)?)?;
    m.add_function(wrap_pyfunction!(filter_value, m)?)?;
    m.add_function(wrap_pyfunction!(prior_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(posterior, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_py, m)?)?;
    m.add_function(wrap_pyfunction!(vp_bayes, m)?)?;
    m.add_function(wrap_pyfunction!(window_average, m)?)?;
    m.add_function(wrap_pyfunction!(single_photon_vp_closed, m)?)?;
    m.add_function(wrap_pyfunction!(single_photon_py_closed, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(loss_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(mc_posterior, m)?)?;
    m.add_function(wrap_pyfunction!(v2_check_fock, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_fock, m)?)?;
    m.add_function(wrap_pyfunction!(displacement_element, m)?)?;
    Ok(())
}
