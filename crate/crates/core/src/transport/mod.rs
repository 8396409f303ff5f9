//! Message transports and the ping-pong protocol run by the benchmark harness.
//!
//! Wire format per message: `[u64 little-endian length][payload]`.

mod endpoint;
mod pingpong;

pub use endpoint::{make_pair, Endpoint, Role, TransportKind};
pub use pingpong::{
    ping_round, pingpong_packed, pingpong_typed, pong_round, recv_payload, run_session,
    send_payload, Method, Party, SessionConfig, SessionResult,
};
