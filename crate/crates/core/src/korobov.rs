//! Worst-case error bounds for the weighted space, rate-parameter
//! selection, tractability constants, and approximation/sampling numbers.
//!
//! The chain of estimates: a verified multiple lattice with `L` members has
//! worst-case sampling error at most `(L+1) sqrt(tail)` where `tail` is the
//! truncation error of the frequency set; inserting the cardinality bound
//! and the lattice-size window turns this into explicit functions of the
//! sample count `M`, with free parameters `tau` (tail exponent) and `delta`
//! (log-removal exponent) that the rate selector fixes to reach `M^{-t}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::{build_in, check_tau, truncation_error, FrequencySet, WeightSpec};
use crate::lattice::{partition, MultipleRank1Lattice};
use crate::spectral::TrigPolynomial;
use crate::zeta::zeta;

/// The `(L+1) sqrt(tail)` budget of a concrete verified lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Exact truncation tail of the frequency set.
    pub wc_truncation: f64,
    /// Number of member lattices.
    #[serde(rename = "L")]
    pub l: usize,
    /// `(L + 1) * sqrt(wc_truncation)`.
    pub bound: f64,
    /// Distinct sampling nodes of the union.
    pub sample_count: u64,
}

/// Worst-case sampling error bound for a verified lattice: recomputes the
/// partition, rejects lattices that do not cover `set`, and returns
/// `(L+1) sqrt(truncation_error)` with the node count.
pub fn wc_error_bound(
    mlat: &MultipleRank1Lattice,
    spec: &WeightSpec,
    set: &FrequencySet,
) -> Result<ErrorBudget> {
    let part = partition(mlat.lattices(), set)?;
    if part.covered != set.len() {
        return Err(Error::NotReconstructing {
            covered: part.covered,
            target: set.len(),
        });
    }
    let tail = truncation_error(spec, set);
    let l = mlat.count();
    Ok(ErrorBudget {
        wc_truncation: tail,
        l,
        bound: (l as f64 + 1.0) * tail.sqrt(),
        sample_count: mlat.node_count(),
    })
}

/// Explicit worst-case error bound as a function of the sample count `M`.
///
/// Without `delta`:
/// `4 * 3^(1/tau-1) (ln M)^((1+tau)/(2 tau)) M^((tau-1)/(2 tau))
///  sqrt(tau/(1-tau)) prod_j (1 + 2 zeta(alpha tau) gamma_j^tau)^(1/(2 tau))`.
///
/// With `delta` in `(0,1)` the logarithm is absorbed:
/// the middle factors become
/// `delta^(-(1+tau)/(2 tau)) M^((1+delta)/2 - (1-delta)/(2 tau))`.
pub fn theorem_bound(spec: &WeightSpec, m: u64, tau: f64, delta: Option<f64>) -> Result<f64> {
    check_tau(spec.alpha(), tau)?;
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "sample count must be >= 3, got {m}"
        )));
    }
    if let Some(d) = delta {
        if !(d.is_finite() && d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {d}"
            )));
        }
    }
    let m = m as f64;
    let z = zeta(spec.alpha() * tau);
    let product: f64 = spec
        .gamma()
        .iter()
        .map(|g| (1.0 + 2.0 * z * g.powf(tau)).powf(1.0 / (2.0 * tau)))
        .product();
    let shared = 4.0 * 3f64.powf(1.0 / tau - 1.0) * (tau / (1.0 - tau)).sqrt() * product;
    let middle = match delta {
        None => m.ln().powf((1.0 + tau) / (2.0 * tau)) * m.powf((tau - 1.0) / (2.0 * tau)),
        Some(d) => {
            d.powf(-(1.0 + tau) / (2.0 * tau))
                * m.powf((1.0 + d) / 2.0 - (1.0 - d) / (2.0 * tau))
        }
    };
    Ok(shared * middle)
}

/// Rate parameters `(delta, tau)` realizing the convergence order `M^{-t}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateParams {
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub t: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub tau: f64,
}

/// Chooses `delta` and `tau` for a requested rate `t in (0, (at-1)/2)`:
/// `epsilon = at - 1 - 2t`,
/// `delta = (2+at)/2 - sqrt(((2+at)/2)^2 - epsilon)`,
/// `tau = 1/(at - delta)`.
///
/// The identity `(1+delta)/2 - (1-delta)/(2 tau) = -t` is checked to 1e-12
/// along with the range constraints `delta in (0,1)`,
/// `tau in (1/at, 2/(at+1))`.
pub fn choose_rate(alpha: f64, alpha_tilde: f64, t: f64) -> Result<RateParams> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 1, got {alpha}"
        )));
    }
    if !(alpha_tilde.is_finite() && alpha_tilde > 1.0 && alpha_tilde <= alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha_tilde must lie in (1, alpha], got {alpha_tilde}"
        )));
    }
    let t_max = (alpha_tilde - 1.0) / 2.0;
    if !(t.is_finite() && t > 0.0 && t < t_max) {
        return Err(Error::InvalidParameter(format!(
            "t must lie in (0, {t_max}), got {t}"
        )));
    }
    let epsilon = alpha_tilde - 1.0 - 2.0 * t;
    let half = (2.0 + alpha_tilde) / 2.0;
    let delta = half - (half * half - epsilon).sqrt();
    let tau = 1.0 / (alpha_tilde - delta);

    let params = RateParams {
        alpha,
        alpha_tilde,
        t,
        epsilon,
        delta,
        tau,
    };
    let identity = (1.0 + delta) / 2.0 - (1.0 - delta) / (2.0 * tau);
    if (identity + t).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "rate identity violated: {identity} vs -{t}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0 && delta < t_max) {
        return Err(Error::InvalidParameter(format!(
            "derived delta {delta} out of range"
        )));
    }
    if !(tau > 1.0 / alpha_tilde && tau < 2.0 / (alpha_tilde + 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "derived tau {tau} out of range"
        )));
    }
    Ok(params)
}

/// The explicit constant in front of `M^{-t}` and, in the polynomial mode,
/// its dimension-free factorization `c * d^beta`.
#[derive(Debug, Clone, Serialize)]
pub struct TractabilityConstant {
    /// `c_{alpha, at, t, d}`: the full d-dependent constant.
    pub constant: f64,
    /// `prod_j (1 + 2 zeta(alpha tau) gamma_j^tau)^(1/(2 tau))`.
    pub product_factor: f64,
    /// `exp(zeta(alpha tau) sum_j gamma_j^tau / tau)`, an upper bound on the
    /// product factor; bounded in `d` exactly when the weight sum is.
    pub product_bound: f64,
    /// `sum_j gamma_j^tau`, reported so callers can study d-dependence.
    pub weight_sum_tau: f64,
    pub poly: Option<PolyFactorization>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyFactorization {
    /// `sum_j gamma_j^tau / ln(d+1)`.
    pub s: f64,
    /// `ceil(zeta(alpha tau) * s / tau)`.
    pub beta: u32,
    /// Dimension-free constant `c` with `constant <= c * d^beta`.
    pub dim_free_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TractabilityMode {
    Strong,
    Poly,
}

pub fn tractability_constant(
    spec: &WeightSpec,
    params: &RateParams,
    mode: TractabilityMode,
) -> Result<TractabilityConstant> {
    if (params.alpha - spec.alpha()).abs() > 1e-15 {
        return Err(Error::InvalidParameter(
            "rate parameters were derived for a different alpha".into(),
        ));
    }
    let tau = params.tau;
    let delta = params.delta;
    let z = zeta(spec.alpha() * tau);
    let product_factor: f64 = spec
        .gamma()
        .iter()
        .map(|g| (1.0 + 2.0 * z * g.powf(tau)).powf(1.0 / (2.0 * tau)))
        .product();
    let weight_sum_tau: f64 = spec.gamma().iter().map(|g| g.powf(tau)).sum();
    let product_bound = (z * weight_sum_tau / tau).exp();
    let prefactor = 4.0
        * 3f64.powf(1.0 / tau - 1.0)
        * delta.powf(-(1.0 + tau) / (2.0 * tau))
        * (tau / (1.0 - tau)).sqrt();
    let poly = match mode {
        TractabilityMode::Strong => None,
        TractabilityMode::Poly => {
            let d = spec.dim() as f64;
            let s = weight_sum_tau / (d + 1.0).ln();
            let exponent = z * s / tau;
            let beta = exponent.ceil().max(0.0).min(u32::MAX as f64) as u32;
            Some(PolyFactorization {
                s,
                beta,
                dim_free_constant: prefactor * 2f64.powf(exponent),
            })
        }
    };
    Ok(TractabilityConstant {
        constant: prefactor * product_factor,
        product_factor,
        product_bound,
        weight_sum_tau,
        poly,
    })
}

/// `a_n = sqrt(sum_{j >= n} r_d(k_j)^{-1})` along the non-decreasing weight
/// rearrangement: the tail left after keeping the `n-1` best frequencies.
pub fn approximation_number(spec: &WeightSpec, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "approximation numbers start at n = 1".into(),
        ));
    }
    if n == 1 {
        return Ok(spec.full_inverse_weight_sum().sqrt());
    }
    let set = build_in(spec, n)?;
    Ok(truncation_error(spec, &set).sqrt())
}

/// Sampling-number budget derived from the `n`-th approximation number.
#[derive(Debug, Clone, Serialize)]
pub struct SamplingNumberBound {
    /// `9 (n-1) max(ln(n-1), 1)`: enough nodes for a covering lattice.
    pub m_bound: f64,
    /// `max(3 ln(n-1) + 1, 2) * a_n`: the bound on the sampling number at
    /// that many nodes.
    pub value: f64,
    pub a_n: f64,
}

pub fn sampling_number_bound(spec: &WeightSpec, n: usize) -> Result<SamplingNumberBound> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "sampling-number bound needs n >= 2".into(),
        ));
    }
    let set = build_in(spec, n)?;
    let box_half = (n - 1) as i64;
    let violations = box_bound_violations(&set, box_half);
    if !violations.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "hypothesis violated: {} frequencies outside [-{box_half}, {box_half}]^d, \
             first {:?}",
            violations.len(),
            violations[0]
        )));
    }
    let a_n = truncation_error(spec, &set).sqrt();
    let nn = (n - 1) as f64;
    Ok(SamplingNumberBound {
        m_bound: 9.0 * nn * nn.ln().max(1.0),
        value: (3.0 * nn.ln() + 1.0).max(2.0) * a_n,
        a_n,
    })
}

pub(crate) fn box_bound_violations(set: &FrequencySet, half: i64) -> Vec<Vec<i64>> {
    set.iter()
        .filter(|h| h.iter().any(|c| c.abs() > half))
        .map(|h| h.to_vec())
        .collect()
}

/// Norm of a finitely supported function in the weighted space:
/// `sqrt(sum_h r_d(h) |c_h|^2)`.
pub fn hr_norm(spec: &WeightSpec, p: &TrigPolynomial) -> f64 {
    assert_eq!(spec.dim(), p.dim(), "dimension mismatch");
    p.iter()
        .map(|(h, c)| spec.weight(h) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Deterministic point budget for measuring sup deviations: a full grid in
/// low dimension, a Halton set otherwise, plus seeded random points. The
/// true sup norm is not computable; the bounds must dominate any finite
/// sample of it.
#[derive(Debug, Clone, Copy)]
pub struct MeasureProtocol {
    pub grid_side: usize,
    pub lowdisc_points: usize,
    pub random_points: usize,
    pub seed: u64,
}

impl Default for MeasureProtocol {
    fn default() -> Self {
        MeasureProtocol {
            grid_side: 64,
            lowdisc_points: 100_000,
            random_points: 10_000,
            seed: 0,
        }
    }
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// The deterministic evaluation points of the protocol for dimension `d`.
pub fn measurement_points(d: usize, protocol: &MeasureProtocol) -> Vec<Vec<f64>> {
    assert!(d <= HALTON_BASES.len(), "dimension too large for protocol");
    let mut points = Vec::new();
    if d <= 2 {
        let side = protocol.grid_side;
        let mut idx = vec![0usize; d];
        loop {
            points.push(idx.iter().map(|&i| i as f64 / side as f64).collect());
            let mut j = 0;
            loop {
                if j == d {
                    break;
                }
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == d {
                break;
            }
        }
    } else {
        for k in 0..protocol.lowdisc_points {
            points.push(
                (0..d)
                    .map(|j| halton(k as u64 + 1, HALTON_BASES[j]))
                    .collect(),
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
    for _ in 0..protocol.random_points {
        points.push((0..d).map(|_| rng.gen_range(0.0..1.0)).collect());
    }
    points
}

/// Largest observed `|f(x) - g(x)|` over the protocol points, reduced in
/// deterministic point order.
pub fn measure_sup_deviation(
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    protocol: &MeasureProtocol,
) -> f64 {
    let diff = f.sub(g);
    measure_sup_value(&diff, protocol)
}

/// Largest observed `|p(x)|` over the protocol points. The terms are
/// flattened once so the point loop runs over contiguous arrays.
pub fn measure_sup_value(p: &TrigPolynomial, protocol: &MeasureProtocol) -> f64 {
    let d = p.dim();
    let mut freqs: Vec<f64> = Vec::with_capacity(p.len() * d);
    let mut coeffs: Vec<Complex64> = Vec::with_capacity(p.len());
    for (h, c) in p.iter() {
        freqs.extend(h.iter().map(|&v| v as f64));
        coeffs.push(*c);
    }
    let tau = std::f64::consts::TAU;
    let mut worst = 0.0f64;
    for x in measurement_points(d, protocol) {
        let mut acc = Complex64::ZERO;
        for (row, c) in freqs.chunks_exact(d).zip(&coeffs) {
            let phase: f64 = row.iter().zip(&x).map(|(h, xi)| h * xi).sum();
            let reduced = phase - phase.round();
            let (sin, cos) = (tau * reduced).sin_cos();
            acc += c * Complex64::new(cos, sin);
        }
        worst = worst.max(acc.norm());
    }
    worst
}

/// Complex coefficients drawn uniformly and rescaled so the weighted norm
/// is exactly one. The support is the whole of `set`.
pub fn unit_ball_polynomial(
    spec: &WeightSpec,
    set: &FrequencySet,
    seed: u64,
) -> Result<TrigPolynomial> {
    if set.is_empty() {
        return Err(Error::InvalidParameter(
            "unit-ball polynomial needs a non-empty support".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = TrigPolynomial::from_entries(
        set.dim(),
        set.iter().map(|h| {
            (
                h.to_vec(),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        }),
    )?;
    let norm = hr_norm(spec, &p);
    p.scale(Complex64::new(1.0 / norm, 0.0));
    Ok(p)
}
