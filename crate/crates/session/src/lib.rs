//! Interactive optimization sessions.
//!
//! A session holds a problem, the current region of interest and its mapped
//! reference points, and the current population. Each cycle optionally
//! remaps the reference points to a revised region and continues the
//! optimizer from the previous cycle's final population. [`api`] exposes the
//! same operations over HTTP/JSON.

pub mod api;
pub mod error;
pub mod session;

pub use error::{SessionError, SessionResult};
pub use session::{
    CreateSession, CycleRecord, CycleRequest, CycleTicket, SessionManager, SessionSnapshot, Status,
};
