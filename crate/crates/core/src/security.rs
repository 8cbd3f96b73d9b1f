//! Executable checks of the passive-security properties.
//!
//! * Blinding: averaging over one honest client's padding bit leaves any
//!   XZ-plane qubit maximally mixed.
//! * Flatness: the server's announced bit is uniform for every input.
//! * Share privacy: every strict subset of XOR shares is uniform.
//! * Transcript leakage: exact mutual information between the honest inputs
//!   and a party's classical-quantum view.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::{map_reduce, stream_rng, Execution};
use crate::oracle::BitVector;
use crate::protocol::{
    chain_prefix_state, chain_state, run_protocol, shares_from_draws, PartyId, ProtocolConfig,
};
use crate::qubit::{gate_u, gate_v, DensityMatrix, QubitState, C64};

/// `cos(angle/2)|0> + sin(angle/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XZPlaneState {
    pub angle: f64,
}

impl XZPlaneState {
    pub fn new(angle: f64) -> Self {
        XZPlaneState { angle }
    }

    pub fn state(&self) -> QubitState {
        let (s, c) = (self.angle / 2.0).sin_cos();
        QubitState::new(C64::new(c, 0.0), C64::new(s, 0.0)).expect("real unit vector")
    }
}

/// `1/2 sum_r V^r U^x |psi><psi| (U^dagger)^x (V^dagger)^r`.
pub fn blinding_check(x: bool, psi: &XZPlaneState) -> DensityMatrix {
    blinded(x, &psi.state())
}

/// [`blinding_check`] for an arbitrary pure state. Only the XZ-plane part of
/// the Bloch vector is randomised; the `y` component passes through.
pub fn blinding_check_general(x: bool, psi: &QubitState) -> DensityMatrix {
    blinded(x, psi)
}

fn blinded(x: bool, psi: &QubitState) -> DensityMatrix {
    let rho = DensityMatrix::from_pure(psi);
    let u = gate_u().pow_bit(x);
    let vu = gate_v() * u;
    DensityMatrix::mix(&[(0.5, rho.conjugate(&u)), (0.5, rho.conjugate(&vu))]).expect("weights sum to one")
}

/// `count` evenly spaced XZ-plane states on `[0, 2 pi)`.
pub fn xz_grid(count: usize) -> impl Iterator<Item = XZPlaneState> {
    (0..count).map(move |k| XZPlaneState::new(2.0 * PI * k as f64 / count as f64))
}

const MAX_ANALYTIC_BITS: usize = 20;

/// Probability that the server announces 1, averaged over all `2^n` padding
/// vectors.
pub fn server_marginal_analytic(inputs: &BitVector) -> Result<f64> {
    let n = inputs.len();
    if n < 2 {
        return Err(invalid(format!("need at least 2 clients, got {n}")));
    }
    if n > MAX_ANALYTIC_BITS {
        return Err(Error::UnsupportedSize(format!("n = {n} exceeds {MAX_ANALYTIC_BITS}")));
    }
    let mut total = 0.0;
    for p in BitVector::all(n) {
        total += chain_state(inputs, &p)?.prob_one();
    }
    Ok(total / (1u64 << n) as f64)
}

/// Probability of outcome 1 with the paddings held fixed.
pub fn server_marginal_fixed(inputs: &BitVector, paddings: &BitVector) -> Result<f64> {
    Ok(chain_state(inputs, paddings)?.prob_one())
}

/// Fraction of outcome-1 announcements over `shots` protocol runs, each with
/// fresh uniform paddings drawn from stream `(seed, shot)`.
pub fn server_marginal_sampled(inputs: &BitVector, shots: u64, seed: u64, exec: Execution) -> Result<f64> {
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    let n = inputs.len();
    let config = ProtocolConfig::default();
    let ones = map_reduce(
        exec,
        shots,
        |shot| -> Result<u64> {
            let mut rng = stream_rng(seed, shot);
            let paddings = BitVector::new((0..n).map(|_| rand::Rng::random(&mut rng)).collect());
            Ok(run_protocol(inputs, &paddings, &mut rng, &config)?.server_outcome as u64)
        },
        || Ok(0),
        |a, b| Ok(a? + b?),
    )?;
    Ok(ones as f64 / shots as f64)
}

/// Standard error of a binomial proportion.
pub fn binomial_stderr(p: f64, shots: u64) -> f64 {
    (p * (1.0 - p) / shots as f64).sqrt()
}

/// Whether `estimate` lies within `k` standard errors of `p`.
pub fn within_sigma(estimate: f64, p: f64, shots: u64, k: f64) -> bool {
    (estimate - p).abs() <= k * binomial_stderr(p, shots)
}

const MAX_PRIVACY_N: usize = 5;

/// For both secret values, every subset of `subset_size` shares is exactly
/// uniform over all share draws.
pub fn share_privacy_check(n: usize, subset_size: usize) -> Result<bool> {
    if n > MAX_PRIVACY_N {
        return Err(Error::UnsupportedSize(format!("n = {n} exceeds {MAX_PRIVACY_N}")));
    }
    if subset_size == 0 || subset_size >= n {
        return Err(invalid(format!(
            "subset size {subset_size} must be in 1..{n}; the full set reconstructs the secret"
        )));
    }
    let draws: Vec<BitVector> = BitVector::all(n - 1).collect();
    let patterns = 1usize << subset_size;
    for secret in [false, true] {
        let shares: Vec<Vec<bool>> = draws.iter().map(|d| shares_from_draws(secret, d.bits())).collect();
        for mask in (0u32..1 << n).filter(|m| m.count_ones() as usize == subset_size) {
            let mut counts = vec![0usize; patterns];
            for s in &shares {
                let key = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .fold(0usize, |acc, i| (acc << 1) | s[i] as usize);
                counts[key] += 1;
            }
            if counts.iter().any(|&c| c * patterns != draws.len()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact joint distribution of a secret and a classical-quantum view.
///
/// Each entry stores `p(secret, c) * rho(secret, c)`, a sub-normalised
/// density matrix whose trace is the probability.
pub(crate) struct CqDistribution<K> {
    blocks: HashMap<(u64, K), DensityMatrix>,
}

impl<K: Hash + Eq + Clone> CqDistribution<K> {
    pub(crate) fn new() -> Self {
        CqDistribution { blocks: HashMap::new() }
    }

    pub(crate) fn add(&mut self, secret: u64, view: K, weight: f64, rho: &DensityMatrix) {
        self.blocks.entry((secret, view)).or_insert_with(DensityMatrix::zero).add_scaled(weight, rho);
    }

    /// `I(S; V) = H(S) + S(V) - S(SV)` in bits, with the classical parts
    /// block-diagonal.
    pub(crate) fn mutual_information_bits(&self) -> f64 {
        let mut secret_marginal: HashMap<u64, f64> = HashMap::new();
        let mut view_marginal: HashMap<&K, DensityMatrix> = HashMap::new();
        let mut joint = 0.0;
        for ((s, v), block) in &self.blocks {
            *secret_marginal.entry(*s).or_default() += block.trace();
            view_marginal.entry(v).or_insert_with(DensityMatrix::zero).add_scaled(1.0, block);
            joint += block_entropy(block);
        }
        let h_secret: f64 = secret_marginal.values().map(|&p| eta(p)).sum();
        let h_view: f64 = view_marginal.values().map(block_entropy).sum();
        (h_secret + h_view - joint).max(0.0)
    }
}

fn eta(p: f64) -> f64 {
    if p > 1e-15 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn block_entropy(block: &DensityMatrix) -> f64 {
    block.eigenvalues().iter().map(|&l| eta(l)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub party: String,
    pub mutual_information_bits: f64,
    /// Size of the probability space summed over: inputs, paddings and all
    /// share draws.
    pub enumeration_size: u64,
}

pub const MAX_LEAKAGE_N: usize = 4;

/// Mutual information between the honest clients' inputs and `party`'s
/// view, exact over uniform inputs, paddings and share randomness, with the
/// default final rotator `C_n`.
///
/// A view is the classical messages a party sent or received together with
/// the qubit it received. For clients the output reveal (outcome
/// announcement and `r~` broadcasts) is left out, since it delivers `f`
/// by design; the server keeps its own announcement.
///
/// Share randomness is summed out sender by sender. A client's own shares
/// are independent of everything else once the `x~_k` it receives are
/// re-expressed as `x~_k ^ x_i^k`, so they are dropped from the view.
pub fn transcript_leakage(n: usize, party: PartyId) -> Result<LeakageReport> {
    if n > MAX_LEAKAGE_N {
        return Err(Error::UnsupportedSize(format!("leakage enumeration supports n <= {MAX_LEAKAGE_N}, got {n}")));
    }
    if n < 2 {
        return Err(invalid(format!("need at least 2 clients, got {n}")));
    }
    if let PartyId::Client(i) = party {
        if !(1..=n).contains(&i) {
            return Err(invalid(format!("client {i} outside 1..={n}")));
        }
    }
    let mutual_information_bits = match party {
        PartyId::Server => server_view_distribution(n)?.mutual_information_bits(),
        PartyId::Client(i) => client_view_distribution(n, i).mutual_information_bits(),
    };
    Ok(LeakageReport {
        party: party.to_string(),
        mutual_information_bits,
        enumeration_size: 1u64 << (2 * n + 2 * n * (n - 1)),
    })
}

fn server_view_distribution(n: usize) -> Result<CqDistribution<bool>> {
    let mut dist = CqDistribution::new();
    let w = 1.0 / (1u64 << (2 * n)) as f64;
    for x in BitVector::all(n) {
        for r in BitVector::all(n) {
            let received = chain_state(&x, &r)?;
            let outcome = received.prob_one() > 0.5;
            dist.add(x.index(), outcome, w, &DensityMatrix::from_pure(&received));
        }
    }
    Ok(dist)
}

/// Classical part of a client's reduced view: own `(x_i, r_i)`, the received
/// share pairs and, for the rotator, the `x~_k ^ x_i^k` accumulators.
type ClientViewKey = (bool, bool, u64, u64);

fn client_view_distribution(n: usize, i: usize) -> CqDistribution<ClientViewKey> {
    let me = i - 1;
    let rotator = i == n;
    let draws: Vec<BitVector> = BitVector::all(n - 1).collect();
    let per_sender = (draws.len() * draws.len()) as f64;
    let w = 1.0 / (1u64 << (2 * n)) as f64;
    let mut dist = CqDistribution::new();
    for x in BitVector::all(n) {
        let honest = drop_bit(&x, me);
        for r in BitVector::all(n) {
            let received = DensityMatrix::from_pure(&chain_prefix_state(&x, &r, me));
            // (received shares, accumulators) -> probability
            let mut views: HashMap<(u64, u64), f64> = HashMap::from([((0, 0), 1.0)]);
            for j in (0..n).filter(|&j| j != me) {
                let mut next: HashMap<(u64, u64), f64> = HashMap::new();
                for dx in &draws {
                    let xs = shares_from_draws(x.get(j), dx.bits());
                    let acc_delta = if rotator { drop_bit(&BitVector::new(xs.clone()), me) } else { 0 };
                    for dr in &draws {
                        let rs = shares_from_draws(r.get(j), dr.bits());
                        for (&(seen, acc), &p) in &views {
                            let seen = (seen << 2) | ((xs[me] as u64) << 1) | rs[me] as u64;
                            *next.entry((seen, acc ^ acc_delta)).or_default() += p / per_sender;
                        }
                    }
                }
                views = next;
            }
            for ((seen, acc), p) in views {
                dist.add(honest, (x.get(me), r.get(me), seen, acc), w * p, &received);
            }
        }
    }
    dist
}

/// Index of `v` with position `pos` removed.
fn drop_bit(v: &BitVector, pos: usize) -> u64 {
    v.bits()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != pos)
        .fold(0, |acc, (_, &b)| (acc << 1) | b as u64)
}
