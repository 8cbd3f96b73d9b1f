//! The delegated pairwise-AND protocol.
//!
//! A run is a deterministic single-threaded event loop over an ordered
//! message queue. It proceeds in three phases:
//!
//! 1. XOR routine: every client splits `x_j` and `r_j` into XOR shares, sends
//!    share `i` to client `C_i`, aggregates `x~_i` and `r~_i`, and the
//!    non-rotators send `x~_i` to the final rotator, which recovers the
//!    global XOR.
//! 2. Qubit chain: the server sends `|0>` to `C_1`; each client applies
//!    `V^r_i U^x_i` and forwards; the final rotator applies
//!    `(U^dagger)^gxor` after the whole chain and returns the qubit to the
//!    server, which measures and announces `r ^ f`.
//! 3. Reveal: the clients broadcast `r~_i` simultaneously and decode.
//!
//! Classical channels are ideal, ordered and authenticated.

mod party;
mod transcript;

use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

pub use party::{ClientState, PartyId, ServerState};
pub use transcript::{Message, ShareKind, Transcript};

use crate::error::{invalid, Result};
use crate::oracle::{pairwise_and, BitVector};
use crate::qubit::{gate_u, gate_v, measure_z, QubitState};

/// Splits `secret` into `n` XOR shares: the first `n - 1` are uniform
/// draws, the last is the correction.
pub fn share_split<R: Rng + ?Sized>(secret: bool, n: usize, rng: &mut R) -> Result<Vec<bool>> {
    if n == 0 {
        return Err(invalid("cannot split a secret into zero shares"));
    }
    let draws: Vec<bool> = (0..n - 1).map(|_| rng.random()).collect();
    Ok(shares_from_draws(secret, &draws))
}

/// The deterministic part of [`share_split`]: `draws` followed by the
/// correction bit.
pub fn shares_from_draws(secret: bool, draws: &[bool]) -> Vec<bool> {
    let correction = draws.iter().fold(secret, |acc, &b| acc ^ b);
    let mut shares = draws.to_vec();
    shares.push(correction);
    shares
}

/// `V^r U^x s`.
pub fn client_apply(s: &QubitState, x: bool, r: bool) -> QubitState {
    let s = gate_u().pow_bit(x).apply(s);
    gate_v().pow_bit(r).apply(&s)
}

/// `(U^dagger)^gxor s`.
pub fn final_rotation(s: &QubitState, gxor: bool) -> QubitState {
    gate_u().dagger().pow_bit(gxor).apply(s)
}

/// `server_outcome ^ r~_1 ^ ... ^ r~_k`.
pub fn decode(server_outcome: bool, tilde_rs: &[bool]) -> bool {
    tilde_rs.iter().fold(server_outcome, |acc, &b| acc ^ b)
}

fn check_inputs(inputs: &BitVector, paddings: &BitVector) -> Result<()> {
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
    Ok(())
}

/// The qubit after the first `upto` clients of the chain, without the final
/// rotation.
pub fn chain_prefix_state(inputs: &BitVector, paddings: &BitVector, upto: usize) -> QubitState {
    inputs
        .bits()
        .iter()
        .zip(paddings.bits())
        .take(upto)
        .fold(QubitState::ZERO, |s, (&x, &r)| client_apply(&s, x, r))
}

/// The state handed to the server's measurement in the noiseless model.
pub fn chain_state(inputs: &BitVector, paddings: &BitVector) -> Result<QubitState> {
    check_inputs(inputs, paddings)?;
    let s = chain_prefix_state(inputs, paddings, inputs.len());
    Ok(final_rotation(&s, inputs.parity()))
}

/// `(U^dagger)^gxor U^x_n ... U^x_1 |0>`, equal to `|f(x)>` up to phase.
pub fn run_without_padding(inputs: &BitVector) -> Result<QubitState> {
    chain_state(inputs, &BitVector::new(vec![false; inputs.len()]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProtocolConfig {
    /// 1-based index of the client applying `(U^dagger)^gxor`; `None` is `C_n`.
    pub final_rotator: Option<usize>,
}

impl ProtocolConfig {
    pub fn rotator(&self, n: usize) -> Result<usize> {
        let j = self.final_rotator.unwrap_or(n);
        if !(1..=n).contains(&j) {
            return Err(invalid(format!("final rotator {j} outside 1..={n}")));
        }
        Ok(j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub inputs: BitVector,
    pub paddings: BitVector,
    pub server_outcome: bool,
    pub decoded: bool,
    /// The oracle's `f(inputs)`.
    pub expected: bool,
    /// The qubit as it entered the server's measurement.
    pub measured_state: QubitState,
    pub clients: Vec<ClientState>,
    pub transcript: Transcript,
}

/// JSON form of a [`ProtocolResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub n: usize,
    pub inputs: BitVector,
    pub paddings: BitVector,
    pub server_outcome: u8,
    pub decoded: u8,
    pub expected: u8,
    pub transcript_len: usize,
    pub seed: u64,
}

impl ProtocolReport {
    pub fn new(result: &ProtocolResult, seed: u64) -> Self {
        ProtocolReport {
            n: result.inputs.len(),
            inputs: result.inputs.clone(),
            paddings: result.paddings.clone(),
            server_outcome: result.server_outcome as u8,
            decoded: result.decoded as u8,
            expected: result.expected as u8,
            transcript_len: result.transcript.len(),
            seed,
        }
    }
}

struct Network<'a, R: ?Sized> {
    clients: Vec<ClientState>,
    server: ServerState,
    rotator: usize,
    queue: VecDeque<Message>,
    transcript: Transcript,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> Network<'a, R> {
    fn new(clients: Vec<ClientState>, rng: &'a mut R) -> Result<Self> {
        let n = clients.len();
        if n < 2 {
            return Err(invalid(format!("need at least 2 clients, got {n}")));
        }
        if clients.iter().enumerate().any(|(pos, c)| c.index != pos + 1 || c.n() != n) {
            return Err(invalid("client indices must be 1..=n in order"));
        }
        let rotators: Vec<usize> = clients.iter().filter(|c| c.is_final_rotator).map(|c| c.index).collect();
        let [rotator] = rotators[..] else {
            return Err(invalid(format!("expected exactly one final rotator, got {}", rotators.len())));
        };
        Ok(Network {
            clients,
            server: ServerState::default(),
            rotator,
            queue: VecDeque::new(),
            transcript: Transcript::default(),
            rng,
        })
    }

    fn n(&self) -> usize {
        self.clients.len()
    }

    fn client(&mut self, id: PartyId) -> &mut ClientState {
        match id {
            PartyId::Client(i) => &mut self.clients[i - 1],
            PartyId::Server => unreachable!("server is not a client"),
        }
    }

    /// Delivers queued messages, in order, until the queue is empty.
    fn run_until_quiet(&mut self) -> Result<()> {
        while let Some(msg) = self.queue.pop_front() {
            self.transcript.push(msg.clone());
            self.deliver(msg)?;
        }
        Ok(())
    }

    fn deliver(&mut self, msg: Message) -> Result<()> {
        match msg {
            Message::Share { kind, value, from, to } => self.on_share(kind, value, from, to),
            Message::TildeX { value, from, to } => {
                let rotator = self.client(to);
                rotator.received_tilde_x[index_of(from)] = Some(value);
                try_finish_gxor(rotator);
            }
            Message::Qubit { state, from, to } => self.on_qubit(state, from, to)?,
            Message::Outcome { value } => {
                for c in &mut self.clients {
                    c.outcome = Some(value);
                }
            }
            Message::TildeR { value, from } => {
                for c in &mut self.clients {
                    c.received_tilde_r[index_of(from)] = Some(value);
                    if let (Some(outcome), Some(rs)) = (c.outcome, collect(&c.received_tilde_r)) {
                        c.decoded = Some(decode(outcome, &rs));
                    }
                }
            }
        }
        Ok(())
    }

    fn xor_phase(&mut self) -> Result<()> {
        let n = self.n();
        for pos in 0..n {
            let xs = share_split(self.clients[pos].x, n, self.rng)?;
            let rs = share_split(self.clients[pos].r, n, self.rng)?;
            let c = &mut self.clients[pos];
            c.in_shares_x[pos] = Some(xs[pos]);
            c.in_shares_r[pos] = Some(rs[pos]);
            c.out_shares_x = xs.clone();
            c.out_shares_r = rs.clone();
            let from = c.id();
            for (to, (&x, &r)) in xs.iter().zip(&rs).enumerate().filter(|(to, _)| *to != pos) {
                let to = PartyId::Client(to + 1);
                self.queue.push_back(Message::Share { kind: ShareKind::X, value: x, from, to });
                self.queue.push_back(Message::Share { kind: ShareKind::R, value: r, from, to });
            }
        }
        self.run_until_quiet()
    }

    fn on_share(&mut self, kind: ShareKind, value: bool, from: PartyId, to: PartyId) {
        let rotator = PartyId::Client(self.rotator);
        let c = self.client(to);
        let slot = index_of(from);
        match kind {
            ShareKind::X => c.in_shares_x[slot] = Some(value),
            ShareKind::R => c.in_shares_r[slot] = Some(value),
        }
        if c.tilde_x.is_some() {
            return;
        }
        if let (Some(xs), Some(rs)) = (collect(&c.in_shares_x), collect(&c.in_shares_r)) {
            let tx = xs.iter().fold(false, |a, &b| a ^ b);
            c.tilde_x = Some(tx);
            c.tilde_r = Some(rs.iter().fold(false, |a, &b| a ^ b));
            let me = c.id();
            if c.is_final_rotator {
                let slot = c.slot();
                c.received_tilde_x[slot] = Some(tx);
                try_finish_gxor(c);
            } else {
                self.queue.push_back(Message::TildeX { value: tx, from: me, to: rotator });
            }
        }
    }

    fn qubit_phase(&mut self) -> Result<()> {
        self.queue.push_back(Message::Qubit {
            state: QubitState::ZERO,
            from: PartyId::Server,
            to: PartyId::Client(1),
        });
        self.run_until_quiet()
    }

    fn on_qubit(&mut self, state: QubitState, from: PartyId, to: PartyId) -> Result<()> {
        let n = self.n();
        let last = PartyId::Client(n);
        let (next, out) = match to {
            PartyId::Server => {
                if self.server.announced_outcome.is_some() {
                    return Err(invalid("server received a second qubit"));
                }
                let (outcome, _) = measure_z(&state, self.rng.random::<f64>())?;
                self.server.received = Some(state);
                self.server.announced_outcome = Some(outcome);
                self.queue.push_back(Message::Outcome { value: outcome });
                return Ok(());
            }
            PartyId::Client(i) => {
                let c = self.client(to);
                if c.is_final_rotator && from == last && i != n {
                    // Second visit: the chain is complete.
                    (PartyId::Server, final_rotation(&state, expect_gxor(c)?))
                } else {
                    let s = client_apply(&state, c.x, c.r);
                    match (i == n, c.is_final_rotator) {
                        (false, _) => (PartyId::Client(i + 1), s),
                        (true, true) => (PartyId::Server, final_rotation(&s, expect_gxor(c)?)),
                        (true, false) => (PartyId::Client(self.rotator), s),
                    }
                }
            }
        };
        self.queue.push_back(Message::Qubit { state: out, from: to, to: next });
        Ok(())
    }

    /// Simultaneous broadcast: every `r~_i` is committed before any is
    /// delivered.
    fn reveal_phase(&mut self) -> Result<()> {
        let committed = self
            .clients
            .iter()
            .map(|c| c.tilde_r.map(|v| (v, c.id())))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| invalid("reveal before the XOR routine completed"))?;
        for (value, from) in committed {
            self.queue.push_back(Message::TildeR { value, from });
        }
        self.run_until_quiet()
    }
}

fn index_of(id: PartyId) -> usize {
    match id {
        PartyId::Client(i) => i - 1,
        PartyId::Server => unreachable!("server holds no shares"),
    }
}

fn collect(slots: &[Option<bool>]) -> Option<Vec<bool>> {
    slots.iter().copied().collect()
}

fn try_finish_gxor(c: &mut ClientState) {
    if let Some(all) = collect(&c.received_tilde_x) {
        c.gxor = Some(all.iter().fold(false, |a, &b| a ^ b));
    }
}

fn expect_gxor(c: &ClientState) -> Result<bool> {
    c.gxor.ok_or_else(|| invalid(format!("{} holds the qubit before knowing the global XOR", c.id())))
}

fn make_clients(inputs: &BitVector, paddings: &BitVector, rotator: usize) -> Vec<ClientState> {
    let n = inputs.len();
    (0..n)
        .map(|pos| ClientState::new(pos + 1, n, inputs.get(pos), paddings.get(pos), pos + 1 == rotator))
        .collect()
}

/// Runs the XOR share routine over `clients` (which carry `x`, `r` and the
/// rotator flag). Returns the updated clients and the share traffic.
pub fn run_xor_routine<R: Rng + ?Sized>(
    clients: Vec<ClientState>,
    rng: &mut R,
) -> Result<(Vec<ClientState>, Transcript)> {
    let mut net = Network::new(clients, rng)?;
    net.xor_phase()?;
    Ok((net.clients, net.transcript))
}

/// Executes the full padded protocol.
pub fn run_protocol<R: Rng + ?Sized>(
    inputs: &BitVector,
    paddings: &BitVector,
    rng: &mut R,
    config: &ProtocolConfig,
) -> Result<ProtocolResult> {
    check_inputs(inputs, paddings)?;
    let rotator = config.rotator(inputs.len())?;
    let mut net = Network::new(make_clients(inputs, paddings, rotator), rng)?;
    net.xor_phase()?;
    net.qubit_phase()?;
    net.reveal_phase()?;

    let server_outcome = net.server.announced_outcome.ok_or_else(|| invalid("server never measured"))?;
    let measured_state = net.server.received.ok_or_else(|| invalid("server never received the qubit"))?;
    let decoded: Vec<bool> = net
        .clients
        .iter()
        .map(|c| c.decoded.ok_or_else(|| invalid(format!("{} did not decode", c.id()))))
        .collect::<Result<_>>()?;
    let mut transcript = net.transcript;
    transcript.decoded = decoded;
    let decoded = transcript.agreed_output().ok_or_else(|| invalid("clients decoded different outputs"))?;
    Ok(ProtocolResult {
        inputs: inputs.clone(),
        paddings: paddings.clone(),
        server_outcome,
        decoded,
        expected: pairwise_and(inputs)?,
        measured_state,
        clients: net.clients,
        transcript,
    })
}
