//! One-dimensional FFTs of arbitrary length and the lattice sampling /
//! reconstruction pair built on them.
//!
//! On a rank-1 lattice the multivariate transform collapses to one
//! dimension: scattering coefficients onto the residue classes
//! `t = h . z mod M` turns evaluation into a length-M inverse FFT, and one
//! forward FFT per member lattice recovers the coefficients assigned to it.
//! Since the constructed lattice sizes are prime, the transform must handle
//! arbitrary lengths; composite powers of two go through a radix-2 kernel
//! and everything else through a Bluestein chirp embedding into a
//! power-of-two cyclic convolution.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::lattice::{MultipleRank1Lattice, Rank1Lattice};

const TAU: f64 = std::f64::consts::TAU;

/// Reference DFT, `g_t = sum_j v_j e^(-2 pi i j t / M)`, in O(M^2).
///
/// The unit roots are tabulated once and indexed by `j t mod M`, so the
/// oracle keeps full phase accuracy at large `M`.
pub fn dft_naive(v: &[Complex64]) -> Vec<Complex64> {
    let m = v.len();
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / m as f64))
        .collect();
    let mut out = vec![Complex64::ZERO; m];
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for (j, &x) in v.iter().enumerate() {
            acc += x * roots[j * t % m];
        }
        *slot = acc;
    }
    out
}

/// Forward DFT of arbitrary length, same contract as [`dft_naive`].
pub fn fft(v: &[Complex64]) -> Vec<Complex64> {
    Fft::new(v.len()).forward(v)
}

/// A reusable transform plan for one fixed length.
pub struct Fft {
    len: usize,
    kind: PlanKind,
}

enum PlanKind {
    Identity,
    /// Small non-power-of-two lengths go through the direct sum.
    Direct,
    Pow2 {
        twiddles: Vec<Complex64>,
    },
    Bluestein {
        /// `w_j = e^(-i pi j^2 / n)`, with `j^2` reduced mod `2n` before the
        /// trigonometric call.
        chirp: Vec<Complex64>,
        /// Forward FFT of the wrapped conjugate chirp.
        kernel_fft: Vec<Complex64>,
        conv: Box<Fft>,
    },
}

impl Fft {
    pub fn new(len: usize) -> Fft {
        assert!(len >= 1, "transform length must be >= 1");
        let kind = if len == 1 {
            PlanKind::Identity
        } else if len.is_power_of_two() {
            PlanKind::Pow2 {
                twiddles: forward_twiddles(len),
            }
        } else if len < 32 {
            PlanKind::Direct
        } else {
            let conv_len = (2 * len - 1).next_power_of_two();
            let chirp = chirp_vector(len);
            let mut kernel = vec![Complex64::ZERO; conv_len];
            kernel[0] = chirp[0].conj();
            for j in 1..len {
                kernel[j] = chirp[j].conj();
                kernel[conv_len - j] = chirp[j].conj();
            }
            let conv = Box::new(Fft::new(conv_len));
            let kernel_fft = conv.forward(&kernel);
            PlanKind::Bluestein {
                chirp,
                kernel_fft,
                conv,
            }
        };
        Fft { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `g_t = sum_j v_j e^(-2 pi i j t / M)`.
    pub fn forward(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.len, "plan length mismatch");
        match &self.kind {
            PlanKind::Identity => v.to_vec(),
            PlanKind::Direct => dft_naive(v),
            PlanKind::Pow2 { twiddles } => {
                let mut buf = v.to_vec();
                fft_pow2(&mut buf, twiddles);
                buf
            }
            PlanKind::Bluestein {
                chirp,
                kernel_fft,
                conv,
            } => {
                let n = self.len;
                let conv_len = conv.len();
                let mut a = vec![Complex64::ZERO; conv_len];
                for j in 0..n {
                    a[j] = v[j] * chirp[j];
                }
                let mut spectrum = conv.forward(&a);
                for (s, k) in spectrum.iter_mut().zip(kernel_fft) {
                    *s *= k;
                }
                let folded = conv.inverse_unscaled(&spectrum);
                let scale = 1.0 / conv_len as f64;
                (0..n).map(|t| folded[t] * chirp[t] * scale).collect()
            }
        }
    }

    /// Unscaled inverse, `v_j = sum_t g_t e^(+2 pi i j t / M)`.
    pub fn inverse_unscaled(&self, v: &[Complex64]) -> Vec<Complex64> {
        let conjugated: Vec<Complex64> = v.iter().map(|c| c.conj()).collect();
        self.forward(&conjugated)
            .into_iter()
            .map(|c| c.conj())
            .collect()
    }
}

fn forward_twiddles(len: usize) -> Vec<Complex64> {
    (0..len / 2)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / len as f64))
        .collect()
}

/// Iterative radix-2 with a shared half-length twiddle table.
fn fft_pow2(buf: &mut [Complex64], twiddles: &[Complex64]) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i as u64).reverse_bits() >> (64 - bits);
        let j = j as usize;
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut span = 2;
    while span <= n {
        let half = span / 2;
        let stride = n / span;
        for chunk in buf.chunks_exact_mut(span) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let lo = chunk[k];
                let hi = chunk[k + half] * w;
                chunk[k] = lo + hi;
                chunk[k + half] = lo - hi;
            }
        }
        span *= 2;
    }
}

fn chirp_vector(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            // j^2 mod 2n keeps the phase argument small for large prime n
            let sq = (j as u128 * j as u128 % (2 * n) as u128) as f64;
            Complex64::from_polar(1.0, -std::f64::consts::PI * sq / n as f64)
        })
        .collect()
}

/// A sparse trigonometric polynomial `sum_h c_h e^(2 pi i h . x)`.
///
/// Coefficients are kept in a deterministic (lexicographic) order; exact
/// zeros are dropped on canonicalization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    d: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPolynomial {
    pub fn new(d: usize) -> Self {
        TrigPolynomial {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(d: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut p = TrigPolynomial::new(d);
        for (h, c) in entries {
            p.add_term(h, c)?;
        }
        p.canonicalize();
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c` to the coefficient at `h`.
    pub fn add_term(&mut self, h: Vec<i64>, c: Complex64) -> Result<()> {
        if h.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: h.len(),
            });
        }
        match self.coeffs.entry(h) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, h: &[i64]) -> Complex64 {
        self.coeffs.get(h).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coeffs.iter()
    }

    /// Drops exact-zero entries.
    pub fn canonicalize(&mut self) {
        self.coeffs.retain(|_, c| c.re != 0.0 || c.im != 0.0);
    }

    /// Pointwise evaluation `sum_h c_h e^(2 pi i h . x)`. The phase is
    /// reduced to `[-1/2, 1/2)` before the trigonometric call.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.d, "evaluation point dimension mismatch");
        let mut acc = Complex64::ZERO;
        for (h, c) in &self.coeffs {
            let phase: f64 = h.iter().zip(x).map(|(&hj, &xj)| hj as f64 * xj).sum();
            let reduced = phase - phase.round();
            acc += c * Complex64::from_polar(1.0, TAU * reduced);
        }
        acc
    }

    pub fn scale(&mut self, factor: Complex64) {
        for c in self.coeffs.values_mut() {
            *c *= factor;
        }
    }

    /// `self - other`, canonicalized.
    pub fn sub(&self, other: &TrigPolynomial) -> TrigPolynomial {
        assert_eq!(self.d, other.d);
        let mut out = self.clone();
        for (h, c) in &other.coeffs {
            out.add_term(h.clone(), -c).expect("dimensions match");
        }
        out.canonicalize();
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_coefficient_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Serialized coefficient list, the on-disk form of a [`TrigPolynomial`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffFile {
    pub d: usize,
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub h: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

impl CoeffFile {
    pub fn from_polynomial(p: &TrigPolynomial) -> Self {
        CoeffFile {
            d: p.dim(),
            coeffs: p
                .iter()
                .map(|(h, c)| CoeffEntry {
                    h: h.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn to_polynomial(&self) -> Result<TrigPolynomial> {
        TrigPolynomial::from_entries(
            self.d,
            self.coeffs
                .iter()
                .map(|e| (e.h.clone(), Complex64::new(e.re, e.im))),
        )
    }
}

/// Evaluates `p` at every node of `lat`: scatter the coefficients onto the
/// residue classes `t = h . z mod M`, then one unscaled inverse FFT.
pub fn evaluate_on_lattice(p: &TrigPolynomial, lat: &Rank1Lattice) -> Result<Vec<Complex64>> {
    let plan = Fft::new(lat.size() as usize);
    evaluate_on_lattice_with(p, lat, &plan)
}

pub fn evaluate_on_lattice_with(
    p: &TrigPolynomial,
    lat: &Rank1Lattice,
    plan: &Fft,
) -> Result<Vec<Complex64>> {
    if p.dim() != lat.dim() {
        return Err(Error::DimensionMismatch {
            expected: lat.dim(),
            got: p.dim(),
        });
    }
    let m = lat.size() as usize;
    assert_eq!(plan.len(), m, "plan length must equal the lattice size");
    let mut buckets = vec![Complex64::ZERO; m];
    for (h, c) in p.iter() {
        buckets[lat.residue(h) as usize] += c;
    }
    Ok(plan.inverse_unscaled(&buckets))
}

/// Per-lattice sample vectors, tied to the lattice they were taken on by a
/// fingerprint. Vector `l` holds `f((j/M_l) z_l mod 1)` for `j = 0..M_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSamples {
    vectors: Vec<Vec<Complex64>>,
    lattice_hash: u64,
}

impl LatticeSamples {
    /// Wraps raw vectors, checking lengths and that the shared origin node
    /// carries one value (within 1e-12, scaled).
    pub fn new(mlat: &MultipleRank1Lattice, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.len() != mlat.count() {
            return Err(Error::SampleLengthMismatch {
                index: 0,
                expected: mlat.count(),
                got: vectors.len(),
            });
        }
        for (i, (v, lat)) in vectors.iter().zip(mlat.lattices()).enumerate() {
            if v.len() != lat.size() as usize {
                return Err(Error::SampleLengthMismatch {
                    index: i,
                    expected: lat.size() as usize,
                    got: v.len(),
                });
            }
        }
        if let Some(first) = vectors.first() {
            let origin = first[0];
            let scale = origin.norm().max(1.0);
            for (i, v) in vectors.iter().enumerate().skip(1) {
                let deviation = (v[0] - origin).norm();
                if deviation > 1e-12 * scale {
                    return Err(Error::InconsistentOrigin {
                        index: i,
                        deviation,
                    });
                }
            }
        }
        Ok(LatticeSamples {
            vectors,
            lattice_hash: mlat.fingerprint(),
        })
    }

    /// Exact per-node samples of a trigonometric polynomial.
    pub fn from_polynomial(p: &TrigPolynomial, mlat: &MultipleRank1Lattice) -> Result<Self> {
        let mut plans: HashMap<usize, Fft> = HashMap::new();
        let vectors = mlat
            .lattices()
            .iter()
            .map(|lat| {
                let m = lat.size() as usize;
                let plan = plans.entry(m).or_insert_with(|| Fft::new(m));
                evaluate_on_lattice_with(p, lat, plan)
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeSamples::new(mlat, vectors)
    }

    /// Samples a black-box function at every lattice node.
    pub fn from_fn<F>(mlat: &MultipleRank1Lattice, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        let vectors = mlat
            .lattices()
            .iter()
            .map(|lat| (0..lat.size()).map(|j| f(&lat.node(j))).collect())
            .collect();
        LatticeSamples::new(mlat, vectors)
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn lattice_hash(&self) -> u64 {
        self.lattice_hash
    }

    pub fn to_file(&self) -> SamplesFile {
        SamplesFile {
            lattice_hash: format!("{:#018x}", self.lattice_hash),
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|c| (c.re, c.im)).collect())
                .collect(),
        }
    }

    /// Rebuilds samples from the on-disk form, re-validating against `mlat`.
    pub fn from_file(file: &SamplesFile, mlat: &MultipleRank1Lattice) -> Result<Self> {
        let hash = u64::from_str_radix(file.lattice_hash.trim_start_matches("0x"), 16)
            .map_err(|e| Error::Parse(format!("bad lattice hash: {e}")))?;
        if hash != mlat.fingerprint() {
            return Err(Error::SampleHashMismatch {
                expected: mlat.fingerprint(),
                got: hash,
            });
        }
        let vectors = file
            .vectors
            .iter()
            .map(|v| v.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            .collect();
        LatticeSamples::new(mlat, vectors)
    }
}

/// On-disk JSON form of [`LatticeSamples`]: a header with the lattice hash
/// and per-lattice arrays of (re, im) pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplesFile {
    pub lattice_hash: String,
    pub vectors: Vec<Vec<(f64, f64)>>,
}

/// Recovers the coefficients supported on `set` from lattice samples: one
/// forward FFT per member lattice, then for every frequency assigned to
/// lattice `l` read bin `h . z_l mod M_l` and scale by `1/M_l`.
///
/// Requires the partition stored in `mlat` to cover `set` and the samples
/// to match `mlat` (lengths and fingerprint).
pub fn reconstruct(
    samples: &LatticeSamples,
    mlat: &MultipleRank1Lattice,
    set: &FrequencySet,
) -> Result<TrigPolynomial> {
    let part = mlat.partition();
    if part.assignment.len() != set.len() || part.covered != set.len() {
        return Err(Error::NotReconstructing {
            covered: part.covered,
            target: set.len(),
        });
    }
    if samples.lattice_hash() != mlat.fingerprint() {
        return Err(Error::SampleHashMismatch {
            expected: mlat.fingerprint(),
            got: samples.lattice_hash(),
        });
    }
    for (i, (v, lat)) in samples.vectors().iter().zip(mlat.lattices()).enumerate() {
        if v.len() != lat.size() as usize {
            return Err(Error::SampleLengthMismatch {
                index: i,
                expected: lat.size() as usize,
                got: v.len(),
            });
        }
    }

    let mut plans: HashMap<usize, Fft> = HashMap::new();
    let mut out = TrigPolynomial::new(set.dim());
    for (ell, lat) in mlat.lattices().iter().enumerate() {
        let indices = &part.per_lattice[ell];
        if indices.is_empty() {
            continue;
        }
        let m = lat.size() as usize;
        let plan = plans.entry(m).or_insert_with(|| Fft::new(m));
        let spectrum = plan.forward(&samples.vectors()[ell]);
        let scale = 1.0 / m as f64;
        for &i in indices {
            let h = set.freq(i as usize);
            let t = lat.residue(h) as usize;
            out.add_term(h.to_vec(), spectrum[t] * scale)?;
        }
    }
    out.canonicalize();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freqset::{build_adn, WeightSpec};
    use crate::lattice::{construct, ConstructOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn naive_impulse_constant_tone() {
        let impulse: Vec<Complex64> = [1.0, 0.0, 0.0, 0.0, 0.0]
            .iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect();
        for g in dft_naive(&impulse) {
            assert!((g - Complex64::ONE).norm() < 1e-15);
        }

        let constant = vec![Complex64::ONE; 5];
        let g = dft_naive(&constant);
        assert!((g[0] - Complex64::new(5.0, 0.0)).norm() < 1e-15);
        for t in 1..5 {
            assert!(g[t].norm() < 1e-14);
        }

        let tone: Vec<Complex64> = (0..5)
            .map(|j| Complex64::from_polar(1.0, TAU * (j as f64) * 2.0 / 5.0))
            .collect();
        let g = dft_naive(&tone);
        assert!((g[2] - Complex64::new(5.0, 0.0)).norm() < 1e-13);
        for t in [0usize, 1, 3, 4] {
            assert!(g[t].norm() < 1e-13);
        }
    }

    #[test]
    fn fft_length_one() {
        let v = vec![Complex64::new(2.5, -1.0)];
        assert_eq!(fft(&v), v);
    }

    #[test]
    fn fft_matches_naive_small_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in 1..=64usize {
            let v = random_vector(&mut rng, len);
            let l1: f64 = v.iter().map(|c| c.norm()).sum();
            let diff = max_abs_diff(&fft(&v), &dft_naive(&v));
            assert!(diff < 1e-9 * l1.max(1.0), "len={len}: {diff:e}");
        }
    }

    #[test]
    fn fft_matches_naive_prime_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for len in [97usize, 257, 1009, 4099] {
            let v = random_vector(&mut rng, len);
            let l1: f64 = v.iter().map(|c| c.norm()).sum();
            let diff = max_abs_diff(&fft(&v), &dft_naive(&v));
            assert!(diff < 1e-9 * l1, "len={len}: {diff:e}");
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in [8usize, 31, 101, 256, 1009] {
            let v = random_vector(&mut rng, len);
            let g = fft(&v);
            let left: f64 = g.iter().map(|c| c.norm_sqr()).sum();
            let right: f64 = len as f64 * v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            assert!((left - right).abs() < 1e-10 * right, "len={len}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for len in [16usize, 43, 100] {
            let plan = Fft::new(len);
            let v = random_vector(&mut rng, len);
            let back: Vec<Complex64> = plan
                .inverse_unscaled(&plan.forward(&v))
                .into_iter()
                .map(|c| c / len as f64)
                .collect();
            assert!(max_abs_diff(&back, &v) < 1e-11, "len={len}");
        }
    }

    #[test]
    fn evaluate_constant_polynomial() {
        let mut p = TrigPolynomial::new(2);
        p.add_term(vec![0, 0], Complex64::ONE).unwrap();
        let lat = Rank1Lattice::new(&[1, 3], 5).unwrap();
        let v = evaluate_on_lattice(&p, &lat).unwrap();
        for x in v {
            assert!((x - Complex64::ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn evaluate_single_exponential() {
        let mut p = TrigPolynomial::new(2);
        p.add_term(vec![1, 0], Complex64::ONE).unwrap();
        let lat = Rank1Lattice::new(&[1, 3], 5).unwrap();
        let v = evaluate_on_lattice(&p, &lat).unwrap();
        for (j, x) in v.iter().enumerate() {
            let want = Complex64::from_polar(1.0, TAU * j as f64 / 5.0);
            assert!((x - want).norm() < 1e-12);
        }
    }

    #[test]
    fn evaluate_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = TrigPolynomial::new(3);
        for _ in 0..12 {
            let h: Vec<i64> = (0..3).map(|_| rng.gen_range(-6i64..7)).collect();
            p.add_term(
                h,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
            .unwrap();
        }
        let lat = Rank1Lattice::new(&[3, 7, 11], 53).unwrap();
        let fast = evaluate_on_lattice(&p, &lat).unwrap();
        for j in 0..53 {
            let direct = p.evaluate(&lat.node(j));
            assert!((fast[j as usize] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn bucket_sums_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut p = TrigPolynomial::new(2);
        for _ in 0..9 {
            let h: Vec<i64> = (0..2).map(|_| rng.gen_range(-8i64..9)).collect();
            p.add_term(
                h,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
            .unwrap();
        }
        let lat = Rank1Lattice::new(&[2, 5], 31).unwrap();
        let mut buckets = vec![Complex64::ZERO; 31];
        for (h, c) in p.iter() {
            buckets[lat.residue(h) as usize] += c;
        }
        let nodes = evaluate_on_lattice(&p, &lat).unwrap();
        let plan = Fft::new(31);
        let recovered: Vec<Complex64> = plan
            .forward(&nodes)
            .into_iter()
            .map(|c| c / 31.0)
            .collect();
        let scale = buckets.iter().map(|c| c.norm()).fold(1.0, f64::max);
        assert!(max_abs_diff(&recovered, &buckets) < 1e-10 * scale);
    }

    fn singleton_cover_setup() -> (FrequencySet, MultipleRank1Lattice) {
        let set = FrequencySet::from_frequencies(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]])
            .unwrap();
        let lat = Rank1Lattice::new(&[1, 3], 5).unwrap();
        let mlat = MultipleRank1Lattice::from_lattices(vec![lat], &set).unwrap();
        (set, mlat)
    }

    #[test]
    fn reconstruct_single_exponential() {
        let (set, mlat) = singleton_cover_setup();
        let mut f = TrigPolynomial::new(2);
        f.add_term(vec![1, 0], Complex64::ONE).unwrap();
        let samples = LatticeSamples::from_polynomial(&f, &mlat).unwrap();
        let got = reconstruct(&samples, &mlat, &set).unwrap();
        assert!((got.coefficient(&[1, 0]) - Complex64::ONE).norm() < 1e-12);
        assert!(got.coefficient(&[0, 0]).norm() < 1e-12);
        assert!(got.coefficient(&[0, 1]).norm() < 1e-12);
    }

    #[test]
    fn reconstruct_is_exact_on_supported_polynomials() {
        let spec = WeightSpec::new(2.0, vec![1.0, 1.0]).unwrap();
        let set = build_adn(&spec, 9.0).unwrap();
        let mlat = construct(&set, 17, &ConstructOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = TrigPolynomial::from_entries(
            2,
            set.iter().map(|h| {
                (
                    h.to_vec(),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            }),
        )
        .unwrap();
        let samples = LatticeSamples::from_polynomial(&f, &mlat).unwrap();
        let got = reconstruct(&samples, &mlat, &set).unwrap();
        let worst = set
            .iter()
            .map(|h| (got.coefficient(h) - f.coefficient(h)).norm() / f.coefficient(h).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "relative coefficient error {worst:e}");
    }

    #[test]
    fn reconstruct_aliasing_matches_brute_force() {
        let (set, mlat) = singleton_cover_setup();
        let lat = &mlat.lattices()[0];
        // support J strictly larger than I
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut f = TrigPolynomial::new(2);
        for h1 in -3i64..=3 {
            for h2 in -3i64..=3 {
                f.add_term(
                    vec![h1, h2],
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
                .unwrap();
            }
        }
        let samples = LatticeSamples::from_polynomial(&f, &mlat).unwrap();
        let got = reconstruct(&samples, &mlat, &set).unwrap();
        for h in set.iter() {
            let mut want = Complex64::ZERO;
            for (k, c) in f.iter() {
                if lat.residue(k) == lat.residue(h) {
                    want += c;
                }
            }
            assert!((got.coefficient(h) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_is_linear() {
        let (set, mlat) = singleton_cover_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut make = || {
            TrigPolynomial::from_entries(
                2,
                set.iter().map(|h| {
                    (
                        h.to_vec(),
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                }),
            )
            .unwrap()
        };
        let f1 = make();
        let f2 = make();
        let (a, b) = (Complex64::new(0.3, -1.1), Complex64::new(2.0, 0.4));
        let mut combo = f1.clone();
        combo.scale(a);
        let mut f2b = f2.clone();
        f2b.scale(b);
        for (h, c) in f2b.iter() {
            combo.add_term(h.clone(), *c).unwrap();
        }

        let r1 = reconstruct(
            &LatticeSamples::from_polynomial(&f1, &mlat).unwrap(),
            &mlat,
            &set,
        )
        .unwrap();
        let r2 = reconstruct(
            &LatticeSamples::from_polynomial(&f2, &mlat).unwrap(),
            &mlat,
            &set,
        )
        .unwrap();
        let rc = reconstruct(
            &LatticeSamples::from_polynomial(&combo, &mlat).unwrap(),
            &mlat,
            &set,
        )
        .unwrap();
        for h in set.iter() {
            let want = a * r1.coefficient(h) + b * r2.coefficient(h);
            assert!((rc.coefficient(h) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_rejects_uncovered_partition() {
        let set = FrequencySet::from_frequencies(2, vec![vec![0, 0], vec![2, 0], vec![0, 1]])
            .unwrap();
        // residues 0, 2, 2: two frequencies collide, coverage is partial
        let lat = Rank1Lattice::new(&[1, 2], 5).unwrap();
        let mlat = MultipleRank1Lattice::from_lattices(vec![lat], &set).unwrap();
        assert_eq!(mlat.covered(), 1);
        let samples =
            LatticeSamples::from_polynomial(&TrigPolynomial::new(2), &mlat).unwrap();
        assert!(matches!(
            reconstruct(&samples, &mlat, &set),
            Err(Error::NotReconstructing { covered: 1, .. })
        ));
    }

    #[test]
    fn samples_validation() {
        let (_, mlat) = singleton_cover_setup();
        // wrong length
        let bad = vec![vec![Complex64::ZERO; 4]];
        assert!(matches!(
            LatticeSamples::new(&mlat, bad),
            Err(Error::SampleLengthMismatch { .. })
        ));
    }

    #[test]
    fn samples_origin_consistency() {
        let set = FrequencySet::from_frequencies(1, vec![vec![0], vec![1], vec![2]]).unwrap();
        let mlat = MultipleRank1Lattice::from_lattices(
            vec![
                Rank1Lattice::new(&[1], 7).unwrap(),
                Rank1Lattice::new(&[2], 7).unwrap(),
            ],
            &set,
        )
        .unwrap();
        let mut vectors = vec![vec![Complex64::ONE; 7], vec![Complex64::ONE; 7]];
        vectors[1][0] = Complex64::new(1.0 + 1e-6, 0.0);
        assert!(matches!(
            LatticeSamples::new(&mlat, vectors),
            Err(Error::InconsistentOrigin { index: 1, .. })
        ));
    }

    #[test]
    fn samples_file_round_trip() {
        let (set, mlat) = singleton_cover_setup();
        let mut f = TrigPolynomial::new(2);
        f.add_term(vec![0, 1], Complex64::new(0.5, -0.25)).unwrap();
        let samples = LatticeSamples::from_polynomial(&f, &mlat).unwrap();
        let file = samples.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: SamplesFile = serde_json::from_str(&json).unwrap();
        let back = LatticeSamples::from_file(&parsed, &mlat).unwrap();
        assert_eq!(back, samples);

        // a different lattice refuses the file
        let other = MultipleRank1Lattice::from_lattices(
            vec![Rank1Lattice::new(&[1, 4], 7).unwrap()],
            &set,
        )
        .unwrap();
        assert!(matches!(
            LatticeSamples::from_file(&parsed, &other),
            Err(Error::SampleHashMismatch { .. })
        ));
    }

    #[test]
    fn coeff_file_round_trip() {
        let mut p = TrigPolynomial::new(2);
        p.add_term(vec![1, -2], Complex64::new(0.25, 1.5)).unwrap();
        p.add_term(vec![0, 0], Complex64::new(-1.0, 0.0)).unwrap();
        let file = CoeffFile::from_polynomial(&p);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: CoeffFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.to_polynomial().unwrap(), p);
    }

    #[test]
    fn canonicalize_drops_exact_zeros() {
        let mut p = TrigPolynomial::new(1);
        p.add_term(vec![3], Complex64::new(1.0, 0.0)).unwrap();
        p.add_term(vec![3], Complex64::new(-1.0, 0.0)).unwrap();
        p.canonicalize();
        assert!(p.is_empty());
    }
}
