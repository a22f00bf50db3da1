use std::path::Path;

use super::state::{SessionState, SESSION_FORMAT};
use crate::error::{Error, Result};

/// Parses a saved session, checks the format tag and verifies that the
/// event log replays to exactly the saved state.
pub fn parse_session(text: &str) -> Result<SessionState> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
    let format = raw.get("format").and_then(|f| f.as_str()).unwrap_or("<missing>");
    if format != SESSION_FORMAT {
        return Err(Error::VersionMismatch { found: format.to_string(), expected: SESSION_FORMAT.to_string() });
    }
    let state: SessionState = serde_json::from_value(raw).map_err(|e| {
        // an unknown field means a newer writer, anything else is damage
        if e.to_string().contains("unknown field") {
            Error::VersionMismatch { found: format!("{SESSION_FORMAT} with {e}"), expected: SESSION_FORMAT.to_string() }
        } else {
            Error::Corrupt(e.to_string())
        }
    })?;
    state.verify_replay()?;
    Ok(state)
}

pub fn load_session(path: impl AsRef<Path>) -> Result<SessionState> {
    parse_session(&std::fs::read_to_string(path)?)
}

pub fn save_session(state: &SessionState, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, state.to_canonical_json()?)?;
    Ok(())
}
