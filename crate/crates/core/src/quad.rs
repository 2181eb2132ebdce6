//! Quadrature machinery.
//!
//! Three layers:
//! - globally adaptive Gauss-Kronrod (7-15) on finite intervals, used for
//!   generic radial and planar integrals;
//! - Gauss-Hermite rules (weight e^{-x^2}) generated by Golub-Welsch, used
//!   where integrands are polynomials under a Gaussian envelope so the result
//!   is exact up to rounding;
//! - Gauss-Laguerre rules (weight e^{-x}) for radial moments on [0, inf).
//!
//! Everything is deterministic: interval subdivision order is fixed by a
//! total order on (error, position), rules are cached per node count.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights of a fixed Gaussian rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Golub-Welsch
// ---------------------------------------------------------------------------

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QR with
/// Wilkinson shifts. Works in place; no eigenvectors are accumulated.
fn tridiag_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Vec<f64> {
    let eps = 1e-15;
    let max_iter = 200usize;

    let mut n = diag.len();
    while n > 1 {
        let mut converged = false;
        for _ in 0..max_iter {
            let mut m = n - 1;
            while m > 0 {
                if off[m - 1].abs() <= eps * (diag[m - 1].abs() + diag[m].abs()) {
                    off[m - 1] = 0.0;
                    break;
                }
                m -= 1;
            }
            if m == n - 1 {
                n -= 1;
                converged = true;
                break;
            }

            let shift = wilkinson_shift(diag[n - 2], diag[n - 1], off[n - 2]);
            let mut x = diag[m] - shift;
            let mut y = off[m];
            for k in m..(n - 1) {
                let (c, s) = if y.abs() > eps {
                    let r = x.hypot(y);
                    if r > 0.0 && r.is_finite() {
                        (x / r, -y / r)
                    } else {
                        (1.0, 0.0)
                    }
                } else {
                    (1.0, 0.0)
                };
                if k > m {
                    off[k - 1] = x.hypot(y);
                }
                let d1 = diag[k];
                let d2 = diag[k + 1];
                let e_k = off[k];
                diag[k] = c * c * d1 + s * s * d2 - 2.0 * c * s * e_k;
                diag[k + 1] = s * s * d1 + c * c * d2 + 2.0 * c * s * e_k;
                off[k] = c * s * (d1 - d2) + (c * c - s * s) * e_k;
                if k < n - 2 {
                    x = off[k];
                    y = -s * off[k + 1];
                    off[k + 1] *= c;
                }
            }
        }
        if !converged {
            off[n - 2] = 0.0;
            n -= 1;
        }
    }
    diag.to_vec()
}

#[inline]
fn wilkinson_shift(a: f64, c: f64, b: f64) -> f64 {
    let d = (a - c) * 0.5;
    let t = d.hypot(b);
    let sgn = if d >= 0.0 { 1.0 } else { -1.0 };
    let denom = d + sgn * t;
    if denom.abs() > f64::EPSILON * t.max(1.0) {
        c - (b * b) / denom
    } else {
        c - t
    }
}

/// Golub-Welsch: nodes are the Jacobi-matrix eigenvalues; the weight at a
/// node x is mu0 / sum_k p_k(x)^2 with p_k the orthonormal polynomials of
/// the same recurrence (the reciprocal Christoffel function), which is
/// stable and keeps each weight tied to its own node.
fn golub_welsch(diag: Vec<f64>, off: Vec<f64>, mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut d = diag.clone();
    let mut e = off.clone();
    let mut nodes = tridiag_eigenvalues(&mut d, &mut e);
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));

    let weights = nodes
        .iter()
        .map(|&x| {
            // Orthonormal recurrence: b_{k+1} p_{k+1} = (x - a_k) p_k - b_k p_{k-1}.
            let mut p_prev = 0.0_f64;
            let mut p_cur = 1.0_f64; // p_0 up to the 1/sqrt(mu0) factor
            let mut sum_sq = p_cur * p_cur;
            for k in 0..(n - 1) {
                let b_next = off[k];
                let p_next = ((x - diag[k]) * p_cur - if k == 0 { 0.0 } else { off[k - 1] } * p_prev)
                    / b_next;
                p_prev = p_cur;
                p_cur = p_next;
                sum_sq += p_cur * p_cur;
            }
            mu0 / sum_sq
        })
        .collect();

    GaussRule { nodes, weights }
}

#[derive(Hash, PartialEq, Eq, Clone, Copy)]
enum RuleKind {
    Hermite,
    Laguerre,
}

#[allow(clippy::type_complexity)]
fn rule_cache() -> &'static Mutex<HashMap<(RuleKind, usize), Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(RuleKind, usize), Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Hermite rule with weight e^{-x^2}; exact for polynomials of degree
/// <= 2n - 1.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    assert!(n >= 1, "gauss_hermite: need at least one node");
    let mut cache = rule_cache().lock().unwrap();
    cache
        .entry((RuleKind::Hermite, n))
        .or_insert_with(|| {
            let diag = vec![0.0; n];
            let off: Vec<f64> = (1..n).map(|i| (i as f64 / 2.0).sqrt()).collect();
            Arc::new(golub_welsch(diag, off, std::f64::consts::PI.sqrt()))
        })
        .clone()
}

/// Gauss-Laguerre rule with weight e^{-x} on [0, inf); exact for polynomials
/// of degree <= 2n - 1.
pub fn gauss_laguerre(n: usize) -> Arc<GaussRule> {
    assert!(n >= 1, "gauss_laguerre: need at least one node");
    let mut cache = rule_cache().lock().unwrap();
    cache
        .entry((RuleKind::Laguerre, n))
        .or_insert_with(|| {
            let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
            let off: Vec<f64> = (1..n).map(|i| i as f64).collect();
            Arc::new(golub_welsch(diag, off, 1.0))
        })
        .clone()
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7-15
// ---------------------------------------------------------------------------

// Kronrod abscissae on [-1, 1] (positive half, descending) and weights,
// with the embedded 7-point Gauss weights. Standard QUADPACK constants,
// kept verbatim at published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 7-15 panel: returns (kronrod value, error estimate).
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center)?;
    let mut result_gauss = fc * WG[3];
    let mut result_kronrod = fc * WGK[7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let sum = f1 + f2;
        result_kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            // XGK[1], XGK[3], XGK[5] are the non-central Gauss nodes.
            result_gauss += WG[j / 2] * sum;
        }
    }
    result_kronrod *= half;
    result_gauss *= half;
    Ok((result_kronrod, (result_kronrod - result_gauss).abs()))
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Globally adaptive integration of `f` on [a, b]. Converges when the summed
/// error estimate drops below `max(abs_tol, rel_tol * |integral|)`.
pub fn adaptive_1d<F>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_SEGMENTS: usize = 4000;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "adaptive_1d: non-finite interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }

    let (v, e) = gk15(&mut f, a, b)?;
    let mut segments = vec![Segment {
        a,
        b,
        value: v,
        error: e,
    }];

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNonConvergence(format!(
                "adaptive_1d: error {err:.3e} after {MAX_SEGMENTS} segments on [{a}, {b}]"
            )));
        }
        // Split the segment with the largest error; ties broken by position
        // so the subdivision order is deterministic.
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, s1), (_, s2)| {
                s1.error
                    .total_cmp(&s2.error)
                    .then(s2.a.total_cmp(&s1.a))
            })
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval at floating-point resolution; keep it as-is.
            segments.push(seg);
            let total: f64 = segments.iter().map(|s| s.value).sum();
            return Ok(total);
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, seg.b)?;
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
}

/// Adaptive tensor quadrature over an axis-aligned box. The inner integral is
/// resolved tighter than the outer one, so the outer error estimate stays
/// meaningful.
pub fn adaptive_2d<F>(
    f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    adaptive_1d(
        |x| {
            adaptive_1d(
                |y| f(x, y),
                y_range.0,
                y_range.1,
                rel_tol * 0.1,
                abs_tol * 0.1,
            )
        },
        x_range.0,
        x_range.1,
        rel_tol,
        abs_tol,
    )
}

/// Integrate `g` against the Gaussian weight e^{-a (s - c)^2} over the real
/// line with an n-node Gauss-Hermite rule: exact when g is a polynomial of
/// degree <= 2n - 1.
pub fn hermite_expect<F>(rule: &GaussRule, a: f64, c: f64, mut g: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(a > 0.0);
    let scale = a.sqrt().recip();
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * g(c + x * scale);
    }
    acc * scale
}
