//! Subset-adaptive streaming erasure codes for a source, a relay and a destination.
//!
//! The source protects every message with a diagonally interleaved systematic MDS
//! code. The relay re-encodes what it has at one of two rates depending on how many
//! source packets it lost, and the destination recovers each message within `T` slots
//! whenever both links stay inside their sliding-window erasure budgets.

pub mod channel;
pub mod dest;
pub mod error;
pub mod figures;
pub mod gf;
pub mod linalg;
pub mod mac;
pub mod mds;
pub mod params;
pub mod relay;
pub mod sim;
pub mod source;

pub use channel::{ChannelConfig, ErasurePattern, Link};
pub use dest::{DecodeOutcome, Destination, SymbolRecord};
pub use error::{Error, Result};
pub use gf::{GaloisField, Symbol};
pub use mac::{MacParams, RateRegion};
pub use mds::MdsCode;
pub use params::{DerivedDims, PacketRole, Rate, SchemeParams};
pub use relay::{Mutation, ParityKind, Relay, RelayConfig, RelayPacket, Schedule};
pub use sim::{EpisodeReport, LossEstimate, LossMode, Scheme};
pub use source::{EstimateLedger, SourceEncoder, SourcePacket};
