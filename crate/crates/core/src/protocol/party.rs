use std::fmt;

use crate::qubit::QubitState;

/// A protocol participant. Client indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartyId {
    Server,
    Client(usize),
}

impl PartyId {
    pub fn is_client(&self) -> bool {
        matches!(self, PartyId::Client(_))
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyId::Server => f.write_str("server"),
            PartyId::Client(i) => write!(f, "C{i}"),
        }
    }
}

/// Local state of client `C_index`.
///
/// Share tables are indexed by client (0-based position `i - 1`). The
/// client's own share of its secrets sits at its own position and is never
/// sent over the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientState {
    pub index: usize,
    pub x: bool,
    pub r: bool,
    /// `x_index^i`: the share of `x` destined for client `i`.
    pub out_shares_x: Vec<bool>,
    pub out_shares_r: Vec<bool>,
    /// `x_j^index`: the share of `x_j` received from client `j`.
    pub in_shares_x: Vec<Option<bool>>,
    pub in_shares_r: Vec<Option<bool>>,
    pub tilde_x: Option<bool>,
    pub tilde_r: Option<bool>,
    pub is_final_rotator: bool,
    /// `x~_j` values collected by the final rotator.
    pub received_tilde_x: Vec<Option<bool>>,
    pub gxor: Option<bool>,
    pub outcome: Option<bool>,
    pub received_tilde_r: Vec<Option<bool>>,
    pub decoded: Option<bool>,
}

impl ClientState {
    pub fn new(index: usize, n: usize, x: bool, r: bool, is_final_rotator: bool) -> Self {
        ClientState {
            index,
            x,
            r,
            out_shares_x: Vec::new(),
            out_shares_r: Vec::new(),
            in_shares_x: vec![None; n],
            in_shares_r: vec![None; n],
            tilde_x: None,
            tilde_r: None,
            is_final_rotator,
            received_tilde_x: vec![None; n],
            gxor: None,
            outcome: None,
            received_tilde_r: vec![None; n],
            decoded: None,
        }
    }

    pub fn id(&self) -> PartyId {
        PartyId::Client(self.index)
    }

    pub(crate) fn slot(&self) -> usize {
        self.index - 1
    }

    pub(crate) fn n(&self) -> usize {
        self.in_shares_x.len()
    }

    /// Both share tables XOR back to the client's secrets.
    pub fn shares_consistent(&self) -> bool {
        let xor = |v: &[bool]| v.iter().fold(false, |a, &b| a ^ b);
        self.out_shares_x.len() == self.n()
            && self.out_shares_r.len() == self.n()
            && xor(&self.out_shares_x) == self.x
            && xor(&self.out_shares_r) == self.r
    }

    /// `x~` and `r~` equal the XOR of the received share columns.
    pub fn aggregates_consistent(&self) -> bool {
        let xor = |v: &[Option<bool>]| v.iter().try_fold(false, |a, b| b.map(|b| a ^ b));
        matches!((xor(&self.in_shares_x), self.tilde_x), (Some(a), Some(b)) if a == b)
            && matches!((xor(&self.in_shares_r), self.tilde_r), (Some(a), Some(b)) if a == b)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServerState {
    pub announced_outcome: Option<bool>,
    /// The qubit as it arrived for measurement.
    pub received: Option<QubitState>,
}
