use crate::qubit::QubitState;

use super::party::PartyId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShareKind {
    X,
    R,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Qubit { state: QubitState, from: PartyId, to: PartyId },
    Share { kind: ShareKind, value: bool, from: PartyId, to: PartyId },
    TildeX { value: bool, from: PartyId, to: PartyId },
    /// The server's announcement of `r ^ f` to every client.
    Outcome { value: bool },
    /// A client's `r~` on the client broadcast channel.
    TildeR { value: bool, from: PartyId },
}

impl Message {
    pub fn sender(&self) -> PartyId {
        match self {
            Message::Qubit { from, .. } | Message::Share { from, .. } | Message::TildeX { from, .. } => *from,
            Message::TildeR { from, .. } => *from,
            Message::Outcome { .. } => PartyId::Server,
        }
    }

    /// Whether `party` sent or received this message. Broadcasts reach every
    /// client; the server is not on the client broadcast channel.
    pub fn visible_to(&self, party: PartyId) -> bool {
        match self {
            Message::Qubit { from, to, .. } | Message::Share { from, to, .. } | Message::TildeX { from, to, .. } => {
                *from == party || *to == party
            }
            Message::Outcome { .. } => true,
            Message::TildeR { .. } => party.is_client(),
        }
    }

    /// Messages of the output reveal, which deliver `f` to the clients.
    pub fn is_reveal(&self) -> bool {
        matches!(self, Message::Outcome { .. } | Message::TildeR { .. })
    }
}

/// Ordered log of a protocol run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    pub messages: Vec<Message>,
    /// Decoded output held by each client, in client order.
    pub decoded: Vec<bool>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn push(&mut self, msg: Message) {
        self.messages.push(msg);
    }

    pub fn view(&self, party: PartyId) -> Vec<&Message> {
        self.messages.iter().filter(|m| m.visible_to(party)).collect()
    }

    /// The view before the output reveal. The server keeps its own
    /// announcement, which it produced during the computation.
    pub fn computation_view(&self, party: PartyId) -> Vec<&Message> {
        self.messages
            .iter()
            .filter(|m| m.visible_to(party))
            .filter(|m| party == PartyId::Server || !m.is_reveal())
            .collect()
    }

    pub fn qubit_hops(&self) -> Vec<(PartyId, PartyId)> {
        self.messages
            .iter()
            .filter_map(|m| match m {
                Message::Qubit { from, to, .. } => Some((*from, *to)),
                _ => None,
            })
            .collect()
    }

    pub fn count_shares(&self, kind: ShareKind) -> usize {
        self.messages.iter().filter(|m| matches!(m, Message::Share { kind: k, .. } if *k == kind)).count()
    }

    pub fn count_tilde_x(&self) -> usize {
        self.messages.iter().filter(|m| matches!(m, Message::TildeX { .. })).count()
    }

    pub fn count_outcomes(&self) -> usize {
        self.messages.iter().filter(|m| matches!(m, Message::Outcome { .. })).count()
    }

    pub fn count_tilde_r(&self) -> usize {
        self.messages.iter().filter(|m| matches!(m, Message::TildeR { .. })).count()
    }

    /// Every client decoded the same bit.
    pub fn agreed_output(&self) -> Option<bool> {
        let first = *self.decoded.first()?;
        self.decoded.iter().all(|&d| d == first).then_some(first)
    }

    /// The first `r~` broadcast comes after the outcome announcement.
    pub fn reveal_after_outcome(&self) -> bool {
        let outcome = self.messages.iter().position(|m| matches!(m, Message::Outcome { .. }));
        let first_r = self.messages.iter().position(|m| matches!(m, Message::TildeR { .. }));
        matches!((outcome, first_r), (Some(o), Some(r)) if o < r)
    }
}
