//! Floor-plan inference from walked trajectories: passages by default,
//! dead ends and rooms from closed paths, rooms from long curved turns,
//! plus manual correction and locking.

pub mod component;
pub mod export;
pub mod infer;
pub mod rules;

pub use component::{ComponentKind, FloorComponent, Geometry, PlanRuleConfig, Source};
pub use export::{to_json, to_svg};
pub use infer::{apply_inference, apply_inference_with_diff, correct_component, InferenceDiff};
pub use rules::{classify_loop, classify_turn, detect_closed_paths, find_turns, LoopClass, TurnRoom};
