use serde::{Deserialize, Serialize};

use super::message::{Message, Party, Payload};

/// Audit of what clients disclosed.
///
/// Only [`Payload::CentroidReveal`] counts as a protocol reveal of a raw row.
/// A [`Payload::LocalUpdate`] entry backed by a single row is a mean of one
/// point, i.e. that row; those are tallied separately as incidental.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyLedger {
    raw_points: Vec<usize>,
    incidental: Vec<usize>,
    scalar_reports: usize,
    messages: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub raw_points_disclosed: usize,
    pub incidental_disclosures: usize,
    pub scalar_reports: usize,
    pub messages: usize,
}

impl PrivacyLedger {
    pub fn new(n_clients: usize) -> Self {
        Self {
            raw_points: vec![0; n_clients],
            incidental: vec![0; n_clients],
            ..Self::default()
        }
    }

    pub fn record(&mut self, msg: &Message) {
        self.messages += 1;
        let Party::Client(j) = msg.sender else {
            return;
        };
        match &msg.payload {
            Payload::CentroidReveal { .. } => self.raw_points[j] += 1,
            Payload::LocalUpdate { sizes, .. } => {
                self.incidental[j] += sizes.iter().filter(|&&s| s == 1).count();
            }
            Payload::SizeReport { .. }
            | Payload::PotentialReport { .. }
            | Payload::VoteReport { .. }
            | Payload::SilhouetteReport { .. } => self.scalar_reports += 1,
            Payload::SampleRequest { .. } | Payload::GlobalModel { .. } => {}
        }
    }

    pub fn raw_points_by_client(&self) -> &[usize] {
        &self.raw_points
    }

    pub fn raw_points_disclosed(&self) -> usize {
        self.raw_points.iter().sum()
    }

    pub fn incidental_by_client(&self) -> &[usize] {
        &self.incidental
    }

    pub fn incidental_disclosures(&self) -> usize {
        self.incidental.iter().sum()
    }

    pub fn scalar_reports(&self) -> usize {
        self.scalar_reports
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            raw_points_disclosed: self.raw_points_disclosed(),
            incidental_disclosures: self.incidental_disclosures(),
            scalar_reports: self.scalar_reports,
            messages: self.messages,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn msg(sender: Party, payload: Payload) -> Message {
        Message {
            seq: 0,
            sender,
            receiver: Party::Server,
            payload,
        }
    }

    #[test]
    fn only_reveals_count_as_raw_points() {
        let mut l = PrivacyLedger::new(2);
        l.record(&msg(Party::Client(1), Payload::SizeReport { rows: 4 }));
        l.record(&msg(
            Party::Client(1),
            Payload::PotentialReport { potential: 1.0 },
        ));
        assert_eq!(l.raw_points_disclosed(), 0);
        l.record(&msg(
            Party::Client(1),
            Payload::CentroidReveal {
                point: vec![0.0],
                cluster_size: None,
            },
        ));
        assert_eq!(l.raw_points_by_client(), &[0, 1]);
        assert_eq!(l.scalar_reports(), 2);
        assert_eq!(l.messages(), 3);
    }

    #[test]
    fn singleton_updates_are_incidental() {
        let mut l = PrivacyLedger::new(1);
        l.record(&msg(
            Party::Client(0),
            Payload::LocalUpdate {
                centroids: Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap(),
                sizes: vec![1, 5, 1],
            },
        ));
        assert_eq!(l.incidental_disclosures(), 2);
        assert_eq!(l.raw_points_disclosed(), 0);
    }
}
