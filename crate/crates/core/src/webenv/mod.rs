//! Abstract web domain: primitive catalog, website designs, renderer,
//! episode dynamics, evaluation suite, and HTML export.

pub mod catalog;
pub mod design;
pub mod episode;
pub mod html;
pub mod render;
pub mod suite;

pub use catalog::{catalog, catalog_index, lookup, value_vocab, PrimitiveSpec, Template, CATALOG};
pub use design::{Placement, WebsiteDesign};
pub use episode::{
    optimal_actions, Actionable, NavAction, WebEpisode, WebObservation, WebStepOutcome,
    DEFAULT_STEP_PENALTY,
};
pub use html::export_html;
pub use render::{DomNode, DomTree, ElementBinding, Instruction, RenderedSite};
pub use suite::{fixture_text, suite_design, test_suite, SUITE_LEVELS, SUITE_TASKS};
