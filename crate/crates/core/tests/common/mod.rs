//! Brute-force oracles shared by the integration tests. Everything here is
//! independent of the library's fast paths: sums are enumerated over
//! explicit boxes with certified tail bounds, and aliasing indicators are
//! evaluated straight from their definition.

use lattice_approx::freqset::{FrequencySet, WeightSpec};
use lattice_approx::lattice::{Partition, Rank1Lattice};

/// Per-coordinate partial sum `1 + 2 gamma sum_{k<=K} k^{-alpha}`.
fn coordinate_partial(alpha: f64, gamma: f64, half: i64) -> f64 {
    let mut s = 0.0;
    for k in (1..=half).rev() {
        s += (k as f64).powf(-alpha);
    }
    1.0 + 2.0 * gamma * s
}

/// Exact inverse-weight mass outside the box `[-half, half]^d`:
/// `prod_j S_j - prod_j S_j(half)`.
pub fn tail_outside_box(spec: &WeightSpec, half: i64) -> f64 {
    let full = spec.full_inverse_weight_sum();
    let inside: f64 = spec
        .gamma()
        .iter()
        .map(|&g| coordinate_partial(spec.alpha(), g, half))
        .product();
    (full - inside).max(0.0)
}

/// Smallest box half-width whose outside mass is certified below `tol`.
pub fn certified_box_half(spec: &WeightSpec, tol: f64) -> i64 {
    let mut half = 1i64;
    while tail_outside_box(spec, half) >= tol {
        half += 1;
        assert!(half < 2_000, "certified box does not stay enumerable");
    }
    half
}

/// All integer vectors in `[-half, half]^d`.
pub fn enumerate_box(d: usize, half: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut h = vec![-half; d];
    'outer: loop {
        out.push(h.clone());
        for j in 0..d {
            h[j] += 1;
            if h[j] <= half {
                continue 'outer;
            }
            h[j] = -half;
        }
        break;
    }
    out
}

/// The aliasing indicator from its definition: 1 iff `k` is in part `ell`,
/// `h != k`, and `h . z_ell = k . z_ell (mod M_ell)`.
pub fn delta_indicator(
    lattices: &[Rank1Lattice],
    set: &FrequencySet,
    part: &Partition,
    k_index: usize,
    ell: usize,
    h: &[i64],
) -> u32 {
    if part.assignment[k_index] != Some(ell as u32) {
        return 0;
    }
    let k = set.freq(k_index);
    if k == h {
        return 0;
    }
    (lattices[ell].residue(h) == lattices[ell].residue(k)) as u32
}

/// `sum_ell sum_{k in I_ell} delta_k^(ell)(h)`, evaluated by definition.
pub fn delta_row_sum(
    lattices: &[Rank1Lattice],
    set: &FrequencySet,
    part: &Partition,
    h: &[i64],
) -> u32 {
    let mut total = 0;
    for ell in 0..lattices.len() {
        for &k in &part.per_lattice[ell] {
            total += delta_indicator(lattices, set, part, k as usize, ell, h);
        }
    }
    total
}

/// Relative max-norm coefficient distance between two coefficient maps on
/// a common support: `max |a_h - b_h| / max |b_h|`.
pub fn relative_linf(
    got: &lattice_approx::spectral::TrigPolynomial,
    want: &lattice_approx::spectral::TrigPolynomial,
    support: &FrequencySet,
) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for h in support.iter() {
        worst = worst.max((got.coefficient(h) - want.coefficient(h)).norm());
        scale = scale.max(want.coefficient(h).norm());
    }
    worst / scale.max(f64::MIN_POSITIVE)
}
