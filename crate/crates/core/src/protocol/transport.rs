use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ledger::PrivacyLedger;
use super::message::{Message, MessageKind, Party};

/// Message delivery between parties. Delivery is FIFO per (sender, receiver).
pub trait Transport {
    fn send(&mut self, msg: Message);
    fn recv(&mut self, from: Party, to: Party) -> Option<Message>;
}

/// In-process mailboxes.
#[derive(Debug, Default)]
pub struct Mailbox {
    queues: BTreeMap<(Party, Party), VecDeque<Message>>,
}

impl Mailbox {
    pub fn pending(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum()
    }
}

impl Transport for Mailbox {
    fn send(&mut self, msg: Message) {
        self.queues
            .entry((msg.sender, msg.receiver))
            .or_default()
            .push_back(msg);
    }

    fn recv(&mut self, from: Party, to: Party) -> Option<Message> {
        self.queues.get_mut(&(from, to))?.pop_front()
    }
}

/// One line of the protocol trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: u64,
    pub kind: MessageKind,
    pub sender: String,
    pub receiver: String,
    pub summary: String,
    pub raw_points_disclosed: usize,
    pub incidental_disclosures: usize,
    pub scalar_reports: usize,
}

impl TraceRecord {
    pub(crate) fn new(msg: &Message, ledger: &PrivacyLedger) -> Self {
        Self {
            seq: msg.seq,
            kind: msg.kind(),
            sender: msg.sender.to_string(),
            receiver: msg.receiver.to_string(),
            summary: msg.payload.summary(),
            raw_points_disclosed: ledger.raw_points_disclosed(),
            incidental_disclosures: ledger.incidental_disclosures(),
            scalar_reports: ledger.scalar_reports(),
        }
    }
}

/// Writes records as newline-delimited JSON.
pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::message::Payload;

    #[test]
    fn fifo_per_pair() {
        let mut mb = Mailbox::default();
        for (seq, rows) in [(0, 1), (1, 2)] {
            mb.send(Message {
                seq,
                sender: Party::Client(0),
                receiver: Party::Server,
                payload: Payload::SizeReport { rows },
            });
        }
        assert!(mb.recv(Party::Client(1), Party::Server).is_none());
        assert_eq!(mb.recv(Party::Client(0), Party::Server).unwrap().seq, 0);
        assert_eq!(mb.recv(Party::Client(0), Party::Server).unwrap().seq, 1);
        assert_eq!(mb.pending(), 0);
    }
}
