//! Federated clustering protocol.
//!
//! Message flow of a run:
//!
//! ```text
//! seeding   client -> server  SizeReport
//!           server -> client  SampleRequest(Uniform)      -> CentroidReveal
//!           repeat k-1 times:
//!           server -> all     GlobalModel(reply=Potential) -> PotentialReport
//!           server -> client  SampleRequest(D2)            -> CentroidReveal
//! round     server -> all     GlobalModel(reply=LocalUpdate) -> LocalUpdate
//! scoring   server -> all     GlobalModel(reply=Silhouette)  -> SilhouetteReport
//! voting    server -> all     GlobalModel(reply=Vote)        -> VoteReport
//! ```

mod client;
mod federation;
mod law;
mod ledger;
mod message;
mod server;
mod transport;

pub use client::Client;
pub use federation::{
    fed_kmeanspp_init, run_federated_kmeans, run_garst_reinders, FederatedRun, Federation, Protocol,
};
pub use law::federated_sequence_probability;
pub use ledger::{LedgerSummary, PrivacyLedger};
pub use message::{Message, MessageKind, Party, Payload, Reply, SampleMode};
pub use server::Server;
pub use transport::{write_trace, Mailbox, TraceRecord, Transport};
