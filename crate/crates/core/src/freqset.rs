//! Product weight functions and the frequency sets they induce.
//!
//! The weight `r_d(h) = prod_j max(1, gamma_j^{-1} |h_j|^alpha)` grades the
//! frequencies of the d-torus by importance. Two families of index sets are
//! built from it:
//!
//! * the sublevel set `A_d(N) = { h : r_d(h) <= N }`, and
//! * the set of the `n - 1` globally smallest weights (used for
//!   approximation numbers).
//!
//! Both come back sorted by non-decreasing weight, with ties broken by
//! (max-norm, lexicographic) so that every construction is reproducible.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::zeta::zeta;

/// Smoothness/weight parameters of the space: dimension `d`, smoothness
/// `alpha > 1` and product weights `1 >= gamma_1 >= ... >= gamma_d > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    alpha: f64,
    gamma: Vec<f64>,
}

impl WeightSpec {
    pub fn new(alpha: f64, gamma: Vec<f64>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be a finite real > 1, got {alpha}"
            )));
        }
        if gamma.is_empty() {
            return Err(Error::InvalidParameter("gamma must be non-empty".into()));
        }
        let mut prev = 1.0f64;
        for (j, &g) in gamma.iter().enumerate() {
            if !(g.is_finite() && g > 0.0 && g <= prev) {
                return Err(Error::InvalidParameter(format!(
                    "weights must satisfy 1 >= gamma_1 >= ... >= gamma_d > 0, \
                     violated at gamma_{} = {g}",
                    j + 1
                )));
            }
            prev = g;
        }
        Ok(WeightSpec { alpha, gamma })
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// The weight `r_d(h) = prod_j max(1, gamma_j^{-1} |h_j|^alpha)`.
    ///
    /// Total on `Z^d`; always `>= 1` and symmetric under `h -> -h`.
    pub fn weight(&self, h: &[i64]) -> f64 {
        assert_eq!(h.len(), self.dim(), "frequency dimension mismatch");
        let mut w = 1.0;
        for (hj, &g) in h.iter().zip(&self.gamma) {
            w *= coordinate_factor(self.alpha, g, *hj);
        }
        w
    }

    /// `sum_{h in Z^d} r_d(h)^{-1} = prod_j (1 + 2 gamma_j zeta(alpha))`.
    pub fn full_inverse_weight_sum(&self) -> f64 {
        let z = zeta(self.alpha);
        self.gamma.iter().map(|g| 1.0 + 2.0 * g * z).product()
    }

    /// Stable 64-bit fingerprint of `(alpha, gamma)`, recorded in set
    /// metadata so downstream consumers can detect mismatched inputs.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.alpha.to_bits());
        for g in &self.gamma {
            h.write_u64(g.to_bits());
        }
        h.finish()
    }
}

fn coordinate_factor(alpha: f64, gamma: f64, h: i64) -> f64 {
    if h == 0 {
        1.0
    } else {
        let t = (h.unsigned_abs() as f64).powf(alpha) / gamma;
        t.max(1.0)
    }
}

/// How a [`FrequencySet`] was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum SetProvenance {
    /// All frequencies with weight `<= n`.
    SublevelSet { n: f64 },
    /// The `count` globally smallest weights.
    SmallestWeights { count: usize },
    /// Read from a file or supplied by the caller; weights may be absent.
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetMeta {
    pub provenance: SetProvenance,
    pub spec_fingerprint: Option<u64>,
}

/// A finite frequency set: `count` integer d-vectors in flat row-major
/// storage, optionally with their weights (parallel, non-decreasing when the
/// set was built from a [`WeightSpec`]).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    d: usize,
    freqs: Vec<i64>,
    weights: Vec<f64>,
    meta: SetMeta,
}

impl FrequencySet {
    /// Wraps caller-provided frequencies (no weights attached). Duplicates
    /// are rejected.
    pub fn from_frequencies(d: usize, freqs: Vec<Vec<i64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let mut flat = Vec::with_capacity(freqs.len() * d);
        for f in &freqs {
            if f.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: f.len(),
                });
            }
            flat.extend_from_slice(f);
        }
        let set = FrequencySet {
            d,
            freqs: flat,
            weights: Vec::new(),
            meta: SetMeta {
                provenance: SetProvenance::External,
                spec_fingerprint: None,
            },
        };
        if set.has_duplicates() {
            return Err(Error::InvalidParameter(
                "frequency set contains duplicates".into(),
            ));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.freqs.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freq(&self, i: usize) -> &[i64] {
        &self.freqs[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.freqs.chunks_exact(self.d)
    }

    /// Weights parallel to the frequencies; empty for external sets.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &SetMeta {
        &self.meta
    }

    pub fn position(&self, h: &[i64]) -> Option<usize> {
        self.iter().position(|f| f == h)
    }

    pub fn contains(&self, h: &[i64]) -> bool {
        self.position(h).is_some()
    }

    /// Recomputes weights from `spec` (order preserved). Used after reading
    /// a set from a file.
    pub fn with_weights_from(mut self, spec: &WeightSpec) -> Result<Self> {
        if spec.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: spec.dim(),
            });
        }
        self.weights = self.iter().map(|h| spec.weight(h)).collect();
        self.meta.spec_fingerprint = Some(spec.fingerprint());
        Ok(self)
    }

    fn has_duplicates(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.len());
        !self.iter().all(|f| seen.insert(f))
    }

    /// Writes the set in the plain text interchange format:
    /// a header `d=<d> count=<count>` followed by one frequency per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "d={} count={}", self.d, self.len())?;
        for f in self.iter() {
            let line: Vec<String> = f.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Reads a set written by [`FrequencySet::write_text`]. Weights are not
    /// stored in the file; attach them with [`FrequencySet::with_weights_from`].
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty frequency-set file".into()))??;
        let (d, count) = parse_header(&header)?;
        let mut freqs = Vec::with_capacity(d * count);
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<i64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))
                })
                .collect::<Result<_>>()?;
            if row.len() != d {
                return Err(Error::Parse(format!(
                    "line {}: expected {d} components, got {}",
                    k + 2,
                    row.len()
                )));
            }
            freqs.extend_from_slice(&row);
        }
        if freqs.len() != d * count {
            return Err(Error::Parse(format!(
                "header announced {count} frequencies, file holds {}",
                freqs.len() / d
            )));
        }
        let set = FrequencySet {
            d,
            freqs,
            weights: Vec::new(),
            meta: SetMeta {
                provenance: SetProvenance::External,
                spec_fingerprint: None,
            },
        };
        if set.has_duplicates() {
            return Err(Error::Parse("file contains duplicate frequencies".into()));
        }
        Ok(set)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut d = None;
    let mut count = None;
    for token in header.split_whitespace() {
        if let Some(v) = token.strip_prefix("d=") {
            d = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("count=") {
            count = v.parse::<usize>().ok();
        }
    }
    match (d, count) {
        (Some(d), Some(c)) if d >= 1 => Ok((d, c)),
        _ => Err(Error::Parse(format!("malformed header: {header:?}"))),
    }
}

/// Caps on the sublevel-set enumeration, guarding against runaway
/// parameter choices.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    /// Upper bound on the bounding-box volume and on candidate visits.
    pub max_visits: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_visits: 100_000_000,
        }
    }
}

/// Builds the sublevel set `A_d(N) = { h : r_d(h) <= N }`, sorted by
/// non-decreasing weight (ties by max-norm then lexicographic order).
///
/// Requires `N >= 1` so the set contains the origin. Membership is the
/// exact `<=` predicate on double-precision weights.
pub fn build_adn(spec: &WeightSpec, n: f64) -> Result<FrequencySet> {
    build_adn_with(spec, n, &EnumerationLimits::default())
}

pub fn build_adn_with(
    spec: &WeightSpec,
    n: f64,
    limits: &EnumerationLimits,
) -> Result<FrequencySet> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sublevel threshold must satisfy N >= 1, got {n}"
        )));
    }
    let predicted = predicted_visits(spec, n);
    if predicted > limits.max_visits {
        return Err(Error::EnumerationCap {
            visited: predicted,
            cap: limits.max_visits,
        });
    }

    let d = spec.dim();
    let mut out: Vec<i64> = Vec::new();
    let mut buf = vec![0i64; d];
    let mut visits: u64 = 0;
    dfs_collect(spec, n, 0, 1.0, &mut buf, &mut out, &mut visits, limits)?;

    let mut set = FrequencySet {
        d,
        freqs: out,
        weights: Vec::new(),
        meta: SetMeta {
            provenance: SetProvenance::SublevelSet { n },
            spec_fingerprint: Some(spec.fingerprint()),
        },
    };
    sort_by_weight(spec, &mut set);
    Ok(set)
}

/// Upper bound on the pruned DFS visit count. The feasible prefixes at
/// depth `j` form the sublevel set of the first `j` coordinates, whose
/// cardinality is bounded by `N^q prod_{i<=j} (1 + 2 zeta(alpha q)
/// gamma_i^q)` for every `q > 1/alpha`; each prefix costs at most two
/// predicate probes per child plus one failing probe.
fn predicted_visits(spec: &WeightSpec, n: f64) -> u64 {
    let lo = 1.0 / spec.alpha();
    let mut best = vec![f64::INFINITY; spec.dim()];
    for k in 1..10 {
        let q = lo + (1.0 - lo) * k as f64 / 10.0;
        let z = zeta(spec.alpha() * q);
        let mut prefix = n.powf(q);
        for (j, &g) in spec.gamma().iter().enumerate() {
            prefix *= 1.0 + 2.0 * z * g.powf(q);
            best[j] = best[j].min(prefix);
        }
    }
    let total: f64 = best.iter().sum();
    (4.0 * total + 16.0).min(u64::MAX as f64) as u64
}

/// Depth-first enumeration over coordinates; a prefix whose partial weight
/// already exceeds `n` cannot be extended (remaining factors are >= 1).
#[allow(clippy::too_many_arguments)]
fn dfs_collect(
    spec: &WeightSpec,
    n: f64,
    j: usize,
    partial: f64,
    buf: &mut [i64],
    out: &mut Vec<i64>,
    visits: &mut u64,
    limits: &EnumerationLimits,
) -> Result<()> {
    if j == spec.dim() {
        out.extend_from_slice(buf);
        return Ok(());
    }
    let gamma_j = spec.gamma()[j];
    let mut k: i64 = 0;
    loop {
        *visits += 1;
        if *visits > limits.max_visits {
            return Err(Error::EnumerationCap {
                visited: *visits,
                cap: limits.max_visits,
            });
        }
        let w = partial * coordinate_factor(spec.alpha(), gamma_j, k);
        if w > n {
            break;
        }
        buf[j] = k;
        dfs_collect(spec, n, j + 1, w, buf, out, visits, limits)?;
        if k > 0 {
            buf[j] = -k;
            dfs_collect(spec, n, j + 1, w, buf, out, visits, limits)?;
        }
        k += 1;
    }
    Ok(())
}

fn sort_by_weight(spec: &WeightSpec, set: &mut FrequencySet) {
    let d = set.d;
    let count = set.len();
    let mut rows: Vec<(f64, Vec<i64>)> = (0..count)
        .map(|i| {
            let f = set.freq(i).to_vec();
            (spec.weight(&f), f)
        })
        .collect();
    rows.sort_by(compare_weighted);
    set.freqs.clear();
    set.weights.clear();
    for (w, f) in rows {
        set.weights.push(w);
        set.freqs.extend_from_slice(&f);
    }
    debug_assert_eq!(set.freqs.len(), count * d);
}

/// Total order: weight, then max-norm, then lexicographic on the vector.
fn compare_weighted(a: &(f64, Vec<i64>), b: &(f64, Vec<i64>)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .expect("weights are finite")
        .then_with(|| linf(&a.1).cmp(&linf(&b.1)))
        .then_with(|| a.1.cmp(&b.1))
}

fn linf(h: &[i64]) -> u64 {
    h.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// Builds the set of the `n - 1` frequencies with the globally smallest
/// weights (`n >= 2`). When the cut falls inside a class of equal weights
/// the class is truncated in the deterministic tie order.
pub fn build_in(spec: &WeightSpec, n: usize) -> Result<FrequencySet> {
    build_in_with(spec, n, &EnumerationLimits::default())
}

pub fn build_in_with(
    spec: &WeightSpec,
    n: usize,
    limits: &EnumerationLimits,
) -> Result<FrequencySet> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "smallest-weights set needs n >= 2, got {n}"
        )));
    }
    let want = n - 1;
    // Grow the sublevel threshold until it captures enough frequencies; the
    // sorted prefix of a sublevel set is the global prefix.
    let mut level = 1.0f64;
    loop {
        let set = build_adn_with(spec, level, limits)?;
        if set.len() >= want {
            let mut trimmed = FrequencySet {
                d: set.d,
                freqs: set.freqs[..want * set.d].to_vec(),
                weights: set.weights[..want].to_vec(),
                meta: SetMeta {
                    provenance: SetProvenance::SmallestWeights { count: want },
                    spec_fingerprint: Some(spec.fingerprint()),
                },
            };
            trimmed.freqs.shrink_to_fit();
            return Ok(trimmed);
        }
        level *= 4.0;
    }
}

/// The exact worst-case truncation tail `sum_{h not in I} r_d(h)^{-1}`,
/// computed as the factorized full sum minus the in-set partial sum.
///
/// Non-negative, and strictly decreasing as `I` grows along the weight
/// ordering.
pub fn truncation_error(spec: &WeightSpec, set: &FrequencySet) -> f64 {
    let full = spec.full_inverse_weight_sum();
    let inset: f64 = set.iter().map(|h| 1.0 / spec.weight(h)).sum();
    (full - inset).max(0.0)
}

/// Upper bound on the truncation tail in terms of the cardinality alone:
/// `|A|^{-(1/tau - 1)} * tau/(1-tau) * prod_j (1 + 2 zeta(alpha tau) gamma_j^tau)^{1/tau}`
/// for any `tau` in `(1/alpha, 1)`.
pub fn truncation_bound(spec: &WeightSpec, cardinality: usize, tau: f64) -> Result<f64> {
    if cardinality == 0 {
        return Err(Error::InvalidParameter(
            "truncation bound needs cardinality >= 1".into(),
        ));
    }
    check_tau(spec.alpha(), tau)?;
    let z = zeta(spec.alpha() * tau);
    let product: f64 = spec
        .gamma()
        .iter()
        .map(|g| (1.0 + 2.0 * z * g.powf(tau)).powf(1.0 / tau))
        .product();
    let card = cardinality as f64;
    Ok(card.powf(-(1.0 / tau - 1.0)) * (tau / (1.0 - tau)) * product)
}

pub(crate) fn check_tau(alpha: f64, tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 1.0 / alpha && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (1/alpha, 1) = ({:.6}, 1), got {tau}",
            1.0 / alpha
        )));
    }
    Ok(())
}

/// Minimal FNV-1a, used for stable fingerprints in file headers.
pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write_u64(&mut self, v: u64) {
        for byte in v.to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}
