//! Front end for the `chi-walk` binary: headless evaluation, event-log
//! replay and the session HTTP service.

pub mod run;
pub mod server;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    /// An acceptance property checked by the command did not hold.
    pub const VIOLATION: i32 = 3;
}
