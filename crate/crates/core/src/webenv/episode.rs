//! Episode dynamics over a rendered site.
//!
//! Actions pair an element with an instruction field (or with no field, a
//! click). Correct pairings fire the element's transition for 1/F potential
//! reward; the gate click advances the page once its fields are in. Wrong
//! pairings and clicks on inert elements burn a step. Reaching the final
//! marking pays +1, running out the horizon pays −1, and every step costs κ.

use std::sync::Arc;

use super::render::{ElementBinding, Instruction, RenderedSite};
use crate::petri::{NetPomdp, PomdpStep};
use crate::{Error, Result};

pub const DEFAULT_STEP_PENALTY: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NavAction {
    pub element: usize,
    /// Instruction field index, or `None` for a click.
    pub field: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WebStepOutcome {
    pub reward: f64,
    pub done: bool,
    pub succeeded: bool,
}

#[derive(Debug, Clone)]
pub struct Actionable {
    pub element: usize,
    /// Whether this element's effect has already been spent.
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct WebObservation<'a> {
    pub page_index: usize,
    pub dom: &'a super::render::DomTree,
    pub instruction: &'a Instruction,
    /// Actionable elements on the current page, in DOM order.
    pub actionable: Vec<Actionable>,
    /// Per instruction field: already satisfied somewhere.
    pub field_done: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct WebEpisode {
    site: Arc<RenderedSite>,
    pomdp: NetPomdp,
    current_page: usize,
    done: bool,
    succeeded: bool,
}

impl WebEpisode {
    pub fn new(site: Arc<RenderedSite>, step_penalty: f64) -> Result<Self> {
        let horizon = site.horizon;
        Self::with_horizon(site, step_penalty, horizon)
    }

    /// Same episode dynamics under a caller-chosen step budget instead of
    /// the site's own.
    pub fn with_horizon(
        site: Arc<RenderedSite>,
        step_penalty: f64,
        horizon: usize,
    ) -> Result<Self> {
        let pomdp = NetPomdp::new(site.net.clone(), horizon, step_penalty)?;
        Ok(Self { site, pomdp, current_page: 0, done: false, succeeded: false })
    }

    pub fn site(&self) -> &RenderedSite {
        &self.site
    }

    pub fn current_page(&self) -> usize {
        self.current_page
    }

    pub fn steps(&self) -> usize {
        self.pomdp.steps()
    }

    pub fn horizon(&self) -> usize {
        self.pomdp.horizon()
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn succeeded(&self) -> bool {
        self.succeeded
    }

    pub fn observe(&self) -> WebObservation<'_> {
        let page = self.current_page;
        let actionable = self.site.page_actionables[page]
            .iter()
            .map(|&id| Actionable { element: id, done: self.element_done(id) })
            .collect();
        let field_done = self
            .site
            .instruction
            .fields
            .iter()
            .map(|(key, _)| self.pomdp.credited().contains(key))
            .collect();
        WebObservation {
            page_index: page,
            dom: &self.site.pages[page],
            instruction: &self.site.instruction,
            actionable,
            field_done,
        }
    }

    fn element_done(&self, id: usize) -> bool {
        match self.site.bindings.get(&id) {
            Some(ElementBinding::Field { transition, .. }) => !self
                .pomdp
                .net()
                .is_enabled(self.pomdp.marking(), *transition)
                .unwrap_or(false),
            _ => false,
        }
    }

    pub fn step(&mut self, action: NavAction) -> Result<WebStepOutcome> {
        if self.done {
            return Err(Error::Contract("episode is already terminal".into()));
        }
        let page = *self
            .site
            .element_page
            .get(&action.element)
            .ok_or_else(|| Error::Contract(format!("element {} is not actionable", action.element)))?;
        if page != self.current_page {
            return Err(Error::Contract(format!(
                "element {} belongs to page {page}, current page is {}",
                action.element, self.current_page
            )));
        }
        if let Some(f) = action.field {
            if f >= self.site.instruction.len() {
                return Err(Error::Contract(format!("field index {f} out of range")));
            }
        }

        let binding = self.site.bindings[&action.element];
        let fired = match binding {
            ElementBinding::Field { transition, field } => {
                if action.field == Some(field)
                    && self.pomdp.net().is_enabled(self.pomdp.marking(), transition)?
                {
                    Some(transition)
                } else {
                    None
                }
            }
            ElementBinding::Gate { transition } => {
                if action.field.is_none()
                    && self.pomdp.net().is_enabled(self.pomdp.marking(), transition)?
                {
                    Some(transition)
                } else {
                    None
                }
            }
            ElementBinding::Noop => None,
        };

        let step: PomdpStep = match fired {
            Some(t) => {
                let s = self.pomdp.step(t)?;
                if matches!(binding, ElementBinding::Gate { .. }) && !s.succeeded {
                    self.current_page += 1;
                }
                s
            }
            None => self.pomdp.noop()?,
        };
        self.done = step.done;
        self.succeeded = step.succeeded;
        Ok(WebStepOutcome { reward: step.reward, done: step.done, succeeded: step.succeeded })
    }
}

/// The scripted optimal playout: on each page, pair the first element of
/// every required field with that field (duplicates on a page are skipped,
/// but a key repeated on a later page is re-entered there because that
/// page's gate demands it), then click the gate.
pub fn optimal_actions(site: &RenderedSite) -> Vec<NavAction> {
    let mut plan = Vec::new();
    for page in &site.page_actionables {
        let mut fields_seen = Vec::new();
        let mut gate = None;
        for &id in page {
            match site.bindings[&id] {
                ElementBinding::Field { field, .. } => {
                    if !fields_seen.contains(&field) {
                        fields_seen.push(field);
                        plan.push(NavAction { element: id, field: Some(field) });
                    }
                }
                ElementBinding::Gate { .. } => gate = Some(id),
                ElementBinding::Noop => {}
            }
        }
        plan.push(NavAction { element: gate.expect("every page has a gate"), field: None });
    }
    plan
}
