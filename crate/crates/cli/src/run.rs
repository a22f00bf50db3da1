use std::fs;
use std::path::{Path, PathBuf};

use chiwalk_core::eval::{run_eval, Approach, EvalResult, DEFAULT_CHECKPOINT_EVERY, DEFAULT_ERROR_TARGETS};
use chiwalk_core::session::{SessionState, SESSION_FORMAT};
use chiwalk_core::Error;

use crate::exit;

/// Time at which `--check` compares CHI against the other approaches.
pub const CHECK_TIME: f64 = 8000.0;

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub scenario: String,
    pub approaches: Vec<Approach>,
    pub seeds: u64,
    pub horizon: f64,
    pub every: f64,
    pub out: PathBuf,
    pub svg: bool,
    pub check: bool,
}

impl Default for EvalArgs {
    fn default() -> Self {
        EvalArgs {
            scenario: "builtin:grid100".into(),
            approaches: vec![Approach::Chi],
            seeds: 1,
            horizon: 8000.0,
            every: DEFAULT_CHECKPOINT_EVERY,
            out: PathBuf::from("out"),
            svg: false,
            check: false,
        }
    }
}

/// Outcome of a subcommand: exit code plus a line for the user.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

impl Outcome {
    fn ok(message: impl Into<String>) -> Self {
        Outcome { code: exit::OK, message: message.into() }
    }
    fn config(message: impl Into<String>) -> Self {
        Outcome { code: exit::CONFIG, message: message.into() }
    }
    fn violation(message: impl Into<String>) -> Self {
        Outcome { code: exit::VIOLATION, message: message.into() }
    }
}

fn write_outputs(result: &EvalResult, args: &EvalArgs) -> chiwalk_core::Result<()> {
    fs::create_dir_all(&args.out)?;
    result.write_curves_csv(fs::File::create(args.out.join("curves.csv"))?)?;
    result.write_expense_csv(fs::File::create(args.out.join("expense.csv"))?, &DEFAULT_ERROR_TARGETS)?;
    if args.svg {
        fs::write(args.out.join("curves.svg"), result.to_svg())?;
    }
    Ok(())
}

/// Properties every run must satisfy: finite errors, and once the horizon
/// reaches [`CHECK_TIME`], CHI below every other approach there.
pub fn check_properties(result: &EvalResult) -> Vec<String> {
    let mut bad = Vec::new();
    if result.rows.iter().any(|r| !r.avg_error.is_finite()) {
        bad.push("non-finite average error".to_string());
    }
    if result.horizon >= CHECK_TIME && result.approaches.contains(&Approach::Chi) {
        let chi = result.mean_at(&Approach::Chi, CHECK_TIME);
        for a in result.approaches.iter().filter(|a| **a != Approach::Chi) {
            if let (Some(c), Some(o)) = (chi, result.mean_at(a, CHECK_TIME)) {
                if c >= o {
                    bad.push(format!("chi {c:.3} not below {a} {o:.3} at t={CHECK_TIME}"));
                }
            }
        }
    }
    bad
}

pub fn eval(args: &EvalArgs) -> Outcome {
    if args.seeds == 0 || !(args.horizon >= 0.0) || !(args.every > 0.0) || args.approaches.is_empty() {
        return Outcome::config("need --seeds >= 1, --horizon >= 0, --every > 0 and at least one --approach");
    }
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let result = match run_eval(&args.scenario, &args.approaches, &seeds, args.horizon, args.every) {
        Ok(r) => r,
        Err(e) => return Outcome::config(format!("eval failed: {e}")),
    };
    if let Err(e) = write_outputs(&result, args) {
        return Outcome::config(format!("cannot write to {}: {e}", args.out.display()));
    }
    let mut summary: Vec<String> = args
        .approaches
        .iter()
        .map(|a| format!("{a}: {:.3}", result.mean_at(a, args.horizon).unwrap_or(f64::NAN)))
        .collect();
    summary.insert(0, format!("mean error at t={}", args.horizon));
    if args.check {
        let bad = check_properties(&result);
        if !bad.is_empty() {
            return Outcome::violation(format!("{}\nproperty violated: {}", summary.join("\n"), bad.join("; ")));
        }
    }
    Outcome::ok(summary.join("\n"))
}

/// Loads a save file and replays its event log. A file that cannot be read
/// as a session is a config error; a log that does not reproduce the saved
/// state is a property violation.
pub fn replay(path: &Path) -> Outcome {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Outcome::config(format!("cannot read {}: {e}", path.display())),
    };
    let raw: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return Outcome::config(format!("corrupt session file: {e}")),
    };
    if raw.get("format").and_then(|f| f.as_str()) != Some(SESSION_FORMAT) {
        return Outcome::config(format!("not a {SESSION_FORMAT} file"));
    }
    let state: SessionState = match serde_json::from_value(raw) {
        Ok(s) => s,
        Err(e) => return Outcome::config(format!("session file does not match {SESSION_FORMAT}: {e}")),
    };
    match state.verify_replay() {
        Ok(()) => Outcome::ok(format!(
            "replayed {} commands: {} steps, {} marks, {} pools, closed={}",
            state.seq(),
            state.steps.len(),
            state.marks.len(),
            state.pools.len(),
            state.closed
        )),
        Err(Error::Corrupt(m)) => Outcome::violation(m),
        Err(e) => Outcome::violation(format!("replay failed: {e}")),
    }
}
