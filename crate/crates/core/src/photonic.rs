//! Half-wave-plate realisation of the protocol and its noisy Monte Carlo
//! model.
//!
//! Polarisation encodes the qubit: horizontal is `|0>`, vertical is `|1>`.
//! Client `C_i` holds two plates, first at `-pi/8 * x_i` and then at
//! `pi/4 * r_i`, and the last client adds a plate at `pi/8 * (x_1 ^ ... ^
//! x_n)`. Two plates compose to `hwp(b) hwp(a) = R_y(4 (b - a))`, so each
//! client pair is exactly `V^r U^x` and the final plate is `U^dagger` up to
//! a trailing `hwp(0)`, which only flips the sign of `|1>`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::exec::{map_reduce, stream_rng, Execution};
use crate::oracle::{pairwise_and, BitVector};
use crate::protocol::chain_state;
use crate::qubit::{exact_sin_cos, DensityMatrix, QubitState, Unitary2, ALGEBRA_TOL};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

/// Optical-axis angle of a half-wave plate, radians from horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavePlateSetting(f64);

impl WavePlateSetting {
    pub fn new(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(invalid(format!("plate angle {angle} is not finite")));
        }
        Ok(WavePlateSetting(angle))
    }

    pub fn angle(&self) -> f64 {
        self.0
    }

    /// The same physical plate with its angle in `[-pi/2, pi/2)`.
    pub fn canonical(&self) -> Self {
        WavePlateSetting((self.0 + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2)
    }

    pub fn jones(&self) -> Unitary2 {
        hwp(self.0).expect("finite by construction")
    }
}

/// Jones matrix `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`.
pub fn hwp(theta: f64) -> Result<Unitary2> {
    if !theta.is_finite() {
        return Err(invalid(format!("plate angle {theta} is not finite")));
    }
    let (s, c) = exact_sin_cos(2.0 * theta);
    Ok(Unitary2::from_real(c, s, s, -c))
}

/// `(x plate, r plate)` in the order the photon meets them.
pub fn compile_client(x: bool, r: bool) -> [WavePlateSetting; 2] {
    let x_angle = if x { -FRAC_PI_8 } else { 0.0 };
    let r_angle = if r { FRAC_PI_4 } else { 0.0 };
    [WavePlateSetting(x_angle), WavePlateSetting(r_angle)]
}

/// All plates in path order: each client's pair, then the final rotation.
pub fn compile_chain(inputs: &BitVector, paddings: &BitVector) -> Result<Vec<WavePlateSetting>> {
    if inputs.len() != paddings.len() {
        return Err(invalid(format!(
            "inputs have {} bits but paddings have {}",
            inputs.len(),
            paddings.len()
        )));
    }
    if inputs.len() < 2 {
        return Err(invalid(format!("need at least 2 clients, got {}", inputs.len())));
    }
    let mut plates: Vec<WavePlateSetting> = inputs
        .bits()
        .iter()
        .zip(paddings.bits())
        .flat_map(|(&x, &r)| compile_client(x, r))
        .collect();
    plates.push(WavePlateSetting(if inputs.parity() { FRAC_PI_8 } else { 0.0 }));
    Ok(plates)
}

/// Product of the plates' Jones matrices, first plate rightmost.
pub fn chain_unitary(plates: &[WavePlateSetting]) -> Unitary2 {
    plates.iter().fold(Unitary2::IDENTITY, |acc, p| p.jones() * acc)
}

/// The plate chain on `|0>` gives the same computational-basis statistics
/// as the ideal gate chain, within `1e-12`.
pub fn chain_equivalence(inputs: &BitVector, paddings: &BitVector) -> Result<bool> {
    let optical = chain_unitary(&compile_chain(inputs, paddings)?).apply(&QubitState::ZERO);
    let ideal = chain_state(inputs, paddings)?;
    Ok((optical.prob_one() - ideal.prob_one()).abs() <= ALGEBRA_TOL
        && ((1.0 - optical.prob_one()) - (1.0 - ideal.prob_one())).abs() <= ALGEBRA_TOL)
}

/// Imperfections of the optical setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Standard deviation of each plate's angle error, radians.
    pub angle_jitter_sigma: f64,
    /// Probability that a detected shot carries a dark count instead.
    pub dark_count_prob: f64,
    /// Probability that a fibre hop erases the polarisation coherence.
    pub crosstalk_prob: f64,
    /// Polarising-splitter extinction ratio in dB; `null` in JSON is perfect.
    #[serde(serialize_with = "ser_db", deserialize_with = "de_db")]
    pub extinction_ratio_db: f64,
    /// Probability that a photon reaches the detectors.
    pub coupling_efficiency: f64,
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_db<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Default for NoiseModel {
    /// Calibration defaults landing near 99.5% correctness. These are chosen
    /// values, not measured ones.
    fn default() -> Self {
        NoiseModel {
            angle_jitter_sigma: 0.004,
            dark_count_prob: 0.001,
            crosstalk_prob: 0.002,
            extinction_ratio_db: 60.0,
            coupling_efficiency: 0.5,
        }
    }
}

impl NoiseModel {
    /// No imperfections at all.
    pub fn ideal() -> Self {
        NoiseModel {
            angle_jitter_sigma: 0.0,
            dark_count_prob: 0.0,
            crosstalk_prob: 0.0,
            extinction_ratio_db: f64::INFINITY,
            coupling_efficiency: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("dark_count_prob", self.dark_count_prob),
            ("crosstalk_prob", self.crosstalk_prob),
            ("coupling_efficiency", self.coupling_efficiency),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.angle_jitter_sigma >= 0.0 && self.angle_jitter_sigma.is_finite()) {
            return Err(invalid(format!("angle_jitter_sigma = {} must be >= 0", self.angle_jitter_sigma)));
        }
        if self.extinction_ratio_db.is_nan() || self.extinction_ratio_db <= 0.0 {
            return Err(invalid(format!("extinction_ratio_db = {} must be > 0", self.extinction_ratio_db)));
        }
        Ok(())
    }

    /// Probability of a click in the wrong splitter port.
    pub fn wrong_port_prob(&self) -> f64 {
        10f64.powf(-self.extinction_ratio_db / 10.0)
    }
}

/// `(1 - p) rho + p * dephased(rho)`.
pub fn crosstalk_channel(rho: &DensityMatrix, p: f64) -> DensityMatrix {
    DensityMatrix::weighted_sum(&[(1.0 - p, *rho), (p, rho.dephased())])
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub shots: u64,
    pub detected: u64,
    pub counts: [u64; 2],
    pub correct: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            shots: self.shots + other.shots,
            detected: self.detected + other.detected,
            counts: [self.counts[0] + other.counts[0], self.counts[1] + other.counts[1]],
            correct: self.correct + other.correct,
        }
    }

    /// Fraction of detected shots decoding to the right value (0 if none).
    pub fn correctness(&self) -> f64 {
        if self.detected == 0 {
            0.0
        } else {
            self.correct as f64 / self.detected as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.detected == 0 {
            return 0.0;
        }
        let c = self.correctness();
        (c * (1.0 - c) / self.detected as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentStats {
    pub inputs: BitVector,
    pub paddings: BitVector,
    pub noise: NoiseModel,
    pub tally: Tally,
}

impl ExperimentStats {
    pub fn shots(&self) -> u64 {
        self.tally.shots
    }

    pub fn detected(&self) -> u64 {
        self.tally.detected
    }

    pub fn correctness(&self) -> f64 {
        self.tally.correctness()
    }

    pub fn stderr(&self) -> f64 {
        self.tally.stderr()
    }
}

#[derive(Serialize)]
struct Counts {
    #[serde(rename = "0")]
    zero: u64,
    #[serde(rename = "1")]
    one: u64,
}

#[derive(Serialize)]
struct StatsJson<'a> {
    inputs: &'a BitVector,
    paddings: &'a BitVector,
    shots: u64,
    detected: u64,
    counts: Counts,
    correctness: f64,
    stderr: f64,
    noise: &'a NoiseModel,
}

impl Serialize for ExperimentStats {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StatsJson {
            inputs: &self.inputs,
            paddings: &self.paddings,
            shots: self.tally.shots,
            detected: self.tally.detected,
            counts: Counts { zero: self.tally.counts[0], one: self.tally.counts[1] },
            correctness: self.correctness(),
            stderr: self.stderr(),
            noise: &self.noise,
        }
        .serialize(s)
    }
}

/// One photon through jittered plates and lossy, crosstalking fibre.
/// Returns the announced bit, or `None` if nothing was detected.
///
/// Crosstalk is sampled as a trajectory: with probability `p` the
/// polarisation collapses to H or V with the Born weights, which averages
/// to [`crosstalk_channel`].
fn simulate_shot<R: Rng>(plates: &[WavePlateSetting], noise: &NoiseModel, rng: &mut R) -> Option<bool> {
    let mut state = QubitState::ZERO;
    let hop = |state: QubitState, rng: &mut R| {
        let hit = rng.random::<f64>() < noise.crosstalk_prob;
        let sample = rng.random::<f64>();
        if hit {
            QubitState::basis(sample < state.prob_one())
        } else {
            state
        }
    };
    // server -> C_1
    state = hop(state, rng);
    let clients = plates.len() / 2;
    for (k, plate) in plates.iter().enumerate() {
        let z: f64 = StandardNormal.sample(rng);
        let jones = hwp(plate.angle() + noise.angle_jitter_sigma * z).expect("finite angle");
        state = jones.apply(&state);
        // After each client's pair except the last one's, and after the
        // final plate (C_n -> server).
        let end_of_client = k % 2 == 1 && k / 2 + 1 < clients;
        if end_of_client || k == plates.len() - 1 {
            state = hop(state, rng);
        }
    }
    let survived = rng.random::<f64>() < noise.coupling_efficiency;
    let measure = rng.random::<f64>();
    let wrong_port = rng.random::<f64>() < noise.wrong_port_prob();
    let dark = rng.random::<f64>() < noise.dark_count_prob;
    let dark_bit: bool = rng.random();
    if !survived {
        return None;
    }
    let outcome = (measure < state.prob_one()) ^ wrong_port;
    Some(if dark { dark_bit } else { outcome })
}

/// Monte Carlo run of one `(inputs, paddings)` configuration. Shot `k`
/// draws from stream `(seed, k)`, so every [`Execution`] gives the same
/// statistics.
pub fn run_noisy_experiment(
    inputs: &BitVector,
    paddings: &BitVector,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentStats> {
    noise.validate()?;
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    let plates = compile_chain(inputs, paddings)?;
    let f = pairwise_and(inputs)?;
    let r = paddings.parity();
    let tally = map_reduce(
        exec,
        shots,
        |shot| {
            let mut rng = stream_rng(seed, shot);
            let mut t = Tally { shots: 1, ..Tally::default() };
            if let Some(outcome) = simulate_shot(&plates, noise, &mut rng) {
                t.detected = 1;
                t.counts[outcome as usize] = 1;
                t.correct = ((outcome ^ r) == f) as u64;
            }
            t
        },
        Tally::default,
        Tally::merge,
    );
    Ok(ExperimentStats { inputs: inputs.clone(), paddings: paddings.clone(), noise: *noise, tally })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{global_phase_equiv, ry};

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn angles(plates: &[WavePlateSetting]) -> Vec<f64> {
        plates.iter().map(|p| p.angle()).collect()
    }

    #[test]
    fn hwp_examples() {
        let eq = |a: &QubitState, b: &QubitState| global_phase_equiv(a, b, ALGEBRA_TOL);
        assert_eq!(hwp(0.0).unwrap().apply(&QubitState::ZERO), QubitState::ZERO);
        assert!(eq(&hwp(FRAC_PI_4).unwrap().apply(&QubitState::ZERO), &QubitState::ONE));
        assert!(eq(&hwp(FRAC_PI_8).unwrap().apply(&QubitState::ZERO), &QubitState::PLUS));
        assert!(hwp(f64::NAN).is_err());
    }

    #[test]
    fn hwp_is_a_reflection() {
        for k in 0..200 {
            let theta = -3.0 + 0.03 * k as f64;
            let h = hwp(theta).unwrap();
            assert!(h.is_unitary(ALGEBRA_TOL));
            assert!(h.dagger().approx_eq(&h, ALGEBRA_TOL));
            assert!((h * h).approx_eq(&Unitary2::IDENTITY, ALGEBRA_TOL));
        }
    }

    #[test]
    fn two_plate_identity() {
        // Fixed once by evaluation: hwp(pi/8) hwp(0) = R_y(+pi/2) exactly.
        let pair = hwp(FRAC_PI_8).unwrap() * hwp(0.0).unwrap();
        assert!(pair.approx_eq(&ry(FRAC_PI_2).unwrap(), ALGEBRA_TOL));
        for k in 0..50 {
            let (a, b) = (0.1 * k as f64 - 2.0, 0.07 * k as f64);
            let pair = hwp(b).unwrap() * hwp(a).unwrap();
            assert!(pair.approx_eq(&ry(4.0 * (b - a)).unwrap(), ALGEBRA_TOL));
        }
    }

    #[test]
    fn client_pair_is_exactly_the_gate() {
        for x in [false, true] {
            for r in [false, true] {
                let plates = compile_client(x, r);
                let optical = chain_unitary(&plates);
                let ideal = crate::qubit::gate_v().pow_bit(r) * crate::qubit::gate_u().pow_bit(x);
                assert!(optical.approx_eq(&ideal, ALGEBRA_TOL), "x={x} r={r}");
            }
        }
        let undo = hwp(0.0).unwrap() * hwp(FRAC_PI_8).unwrap();
        assert!(undo.approx_eq(&crate::qubit::gate_u().dagger(), ALGEBRA_TOL));
    }

    #[test]
    fn compile_client_examples() {
        assert_eq!(angles(&compile_client(false, false)), vec![0.0, 0.0]);
        assert_eq!(angles(&compile_client(true, false)), vec![-FRAC_PI_8, 0.0]);
        assert_eq!(angles(&compile_client(true, true)), vec![-FRAC_PI_8, FRAC_PI_4]);
    }

    #[test]
    fn compile_chain_examples() {
        assert_eq!(angles(&compile_chain(&bv("00"), &bv("00")).unwrap()), vec![0.0; 5]);
        assert_eq!(
            angles(&compile_chain(&bv("10"), &bv("00")).unwrap()),
            vec![-FRAC_PI_8, 0.0, 0.0, 0.0, FRAC_PI_8]
        );
        let all_ones = angles(&compile_chain(&bv("1111"), &bv("0000")).unwrap());
        let mut expected: Vec<f64> = [-FRAC_PI_8, 0.0].repeat(4);
        expected.push(0.0);
        assert_eq!(all_ones, expected);
        assert!(compile_chain(&bv("101"), &bv("10")).is_err());
    }

    #[test]
    fn chain_equivalence_examples() {
        assert!(chain_equivalence(&bv("00"), &bv("00")).unwrap());
        assert!(chain_equivalence(&bv("11"), &bv("00")).unwrap());
        let optical = chain_unitary(&compile_chain(&bv("11"), &bv("00")).unwrap()).apply(&QubitState::ZERO);
        assert!((optical.prob_one() - 1.0).abs() < ALGEBRA_TOL);
        for x in BitVector::all(4) {
            for p in BitVector::all(4) {
                assert!(chain_equivalence(&x, &p).unwrap());
            }
        }
    }

    #[test]
    fn canonical_angle_range() {
        for a in [-4.0, -FRAC_PI_2, 0.3, FRAC_PI_2, 7.0] {
            let c = WavePlateSetting::new(a).unwrap().canonical();
            assert!((-FRAC_PI_2..FRAC_PI_2).contains(&c.angle()));
            assert!(c.jones().approx_eq(&hwp(a).unwrap(), 1e-12));
        }
        assert!(WavePlateSetting::new(f64::INFINITY).is_err());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::default().validate().is_ok());
        assert!(NoiseModel::ideal().validate().is_ok());
        let bad = [
            NoiseModel { dark_count_prob: 1.5, ..NoiseModel::default() },
            NoiseModel { crosstalk_prob: -0.1, ..NoiseModel::default() },
            NoiseModel { angle_jitter_sigma: -1.0, ..NoiseModel::default() },
            NoiseModel { extinction_ratio_db: 0.0, ..NoiseModel::default() },
            NoiseModel { coupling_efficiency: f64::NAN, ..NoiseModel::default() },
        ];
        for n in bad {
            assert!(n.validate().is_err(), "{n:?}");
        }
        assert!((NoiseModel::default().wrong_port_prob() - 1e-6).abs() < 1e-18);
        assert_eq!(NoiseModel::ideal().wrong_port_prob(), 0.0);
    }

    #[test]
    fn noise_json_round_trip() {
        let ideal = serde_json::to_string(&NoiseModel::ideal()).unwrap();
        assert!(ideal.contains("\"extinction_ratio_db\":null"));
        assert_eq!(serde_json::from_str::<NoiseModel>(&ideal).unwrap(), NoiseModel::ideal());
        let d = NoiseModel::default();
        assert_eq!(serde_json::from_str::<NoiseModel>(&serde_json::to_string(&d).unwrap()).unwrap(), d);
        assert!(serde_json::from_str::<NoiseModel>("{\"angle_jitter_sigma\": 0.1}").is_err());
    }

    #[test]
    fn zero_noise_is_exactly_correct() {
        for x in BitVector::all(4) {
            let p = BitVector::from_index(x.index() ^ 0b0110, 4);
            let stats = run_noisy_experiment(&x, &p, &NoiseModel::ideal(), 1000, 3, Execution::default()).unwrap();
            assert_eq!(stats.detected(), 1000);
            assert_eq!(stats.correctness(), 1.0);
        }
    }

    #[test]
    fn dark_counts_cost_half_their_rate() {
        let noise = NoiseModel { dark_count_prob: 0.01, ..NoiseModel::ideal() };
        let shots = 200_000;
        let stats = run_noisy_experiment(&bv("1111"), &bv("0101"), &noise, shots, 8, Execution::default()).unwrap();
        let expected = 1.0 - 0.005;
        let sigma = (expected * (1.0 - expected) / shots as f64).sqrt();
        assert!((stats.correctness() - expected).abs() < 4.0 * sigma, "{}", stats.correctness());
    }

    #[test]
    fn losses_shrink_the_denominator_only() {
        let noise = NoiseModel { coupling_efficiency: 0.3, ..NoiseModel::ideal() };
        let stats = run_noisy_experiment(&bv("1101"), &bv("0011"), &noise, 20_000, 2, Execution::default()).unwrap();
        let frac = stats.detected() as f64 / 20_000.0;
        assert!((frac - 0.3).abs() < 4.0 * (0.3f64 * 0.7 / 20_000.0).sqrt());
        assert_eq!(stats.correctness(), 1.0);
        assert_eq!(stats.tally.counts[0] + stats.tally.counts[1], stats.detected());
    }

    #[test]
    fn crosstalk_trajectories_average_to_the_channel() {
        let rho = DensityMatrix::from_pure(&QubitState::PLUS);
        let out = crosstalk_channel(&rho, 0.3);
        assert!((out.entries()[0][1].re - 0.35).abs() < 1e-12);
        assert!((out.prob_one() - 0.5).abs() < 1e-12);
        // Inputs 0010 leave only the C_3 -> C_4 hop in superposition; a
        // collapse there is wrong half the time.
        let noise = NoiseModel { crosstalk_prob: 0.1, ..NoiseModel::ideal() };
        let shots = 100_000;
        let stats = run_noisy_experiment(&bv("0010"), &bv("0000"), &noise, shots, 4, Execution::default()).unwrap();
        let expected = 1.0 - 0.1 * 0.5;
        let sigma = (expected * (1.0 - expected) / shots as f64).sqrt();
        assert!((stats.correctness() - expected).abs() < 4.0 * sigma, "{}", stats.correctness());
    }

    #[test]
    fn sequential_and_default_execution_agree() {
        let n = NoiseModel::default();
        let a = run_noisy_experiment(&bv("1011"), &bv("1100"), &n, 5000, 21, Execution::Sequential).unwrap();
        let b = run_noisy_experiment(&bv("1011"), &bv("1100"), &n, 5000, 21, Execution::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn correctness_falls_with_jitter() {
        let shots = 20_000;
        let x = bv("1111");
        let p = bv("0000");
        let mut prev: Option<(f64, f64)> = None;
        for sigma in [0.0, 0.002, 0.005, 0.01, 0.02] {
            let noise = NoiseModel { angle_jitter_sigma: sigma, ..NoiseModel::ideal() };
            let s = run_noisy_experiment(&x, &p, &noise, shots, 17, Execution::default()).unwrap();
            if let Some((c, e)) = prev {
                assert!(s.correctness() <= c + e.max(s.stderr()), "sigma={sigma}");
            }
            prev = Some((s.correctness(), s.stderr()));
        }
    }

    #[test]
    fn stats_json_shape() {
        let stats = run_noisy_experiment(&bv("11"), &bv("01"), &NoiseModel::default(), 50, 1, Execution::Sequential).unwrap();
        let v = serde_json::to_value(&stats).unwrap();
        for key in ["inputs", "paddings", "shots", "detected", "counts", "correctness", "stderr", "noise"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["counts"].get("0").is_some() && v["counts"].get("1").is_some());
        assert_eq!(v["noise"].as_object().unwrap().len(), 5);
        assert!(run_noisy_experiment(&bv("11"), &bv("01"), &NoiseModel::default(), 0, 1, Execution::Sequential).is_err());
    }
}
