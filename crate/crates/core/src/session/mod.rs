//! Objective-driven interactive session. Every command goes through
//! [`SessionState::tick`], which appends it to an event log; saved files
//! are verified by replaying that log.

pub mod objective;
pub mod persist;
pub mod state;

pub use objective::{ApScope, Objective, ObjectiveKind, ObjectiveStatus};
pub use persist::{load_session, parse_session, save_session};
pub use state::{Command, EventRecord, SessionConfig, SessionState, StateDelta, Suggestion, MAX_WALK_DISTANCE, SESSION_FORMAT};
