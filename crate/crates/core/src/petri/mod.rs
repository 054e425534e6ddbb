//! Colored Petri nets as a task formalism.
//!
//! A task is a bipartite net of places and transitions. Small serial
//! fragments ("primitives") are composed into pages; each page funnels into a
//! gate transition, and gates chain the pages into a workflow that ends at a
//! single final place. Token colors are field keys: firing a colored
//! transition stands for supplying that field's value.

mod compose;
mod pomdp;

pub use compose::{compose, PrimitiveNet};
pub use pomdp::{NetPomdp, PomdpStep};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Place {
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    /// A step inside a primitive.
    Step,
    /// Page-closing transition; enabled once the page's required colors are in.
    Gate,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Transition {
    pub label: String,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    /// Required token color on inputs; `None` accepts any token.
    pub guard: Option<String>,
    /// Color stamped on produced tokens; `None` produces plain tokens.
    pub emit: Option<String>,
    pub kind: TransitionKind,
}

/// Identity of one placed primitive inside a composed net.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlacedPrimitive {
    pub name: String,
    pub page: usize,
    pub active: bool,
    pub color: Option<String>,
    /// Transitions of this primitive's serial chain, in firing order.
    pub transitions: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PetriTaskNet {
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    /// Gate transition indices, in page order.
    pub gates: Vec<usize>,
    /// Distinct colors, in first-appearance order.
    pub colors: Vec<String>,
    pub primitives: Vec<PlacedPrimitive>,
    /// Places initially holding one plain token each.
    pub initial: Vec<usize>,
    pub final_place: usize,
    pub pages: usize,
}

/// A token sits on a place and optionally carries a color.
pub type Token = (usize, Option<String>);

/// Multiset of tokens, kept sorted for canonical comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marking {
    tokens: Vec<Token>,
}

impl Marking {
    pub fn new(mut tokens: Vec<Token>) -> Self {
        tokens.sort();
        Self { tokens }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn count_at(&self, place: usize) -> usize {
        self.tokens.iter().filter(|(p, _)| *p == place).count()
    }

    pub fn has_match(&self, place: usize, guard: &Option<String>) -> bool {
        self.tokens.iter().any(|(p, c)| {
            *p == place && guard.as_ref().map_or(true, |g| c.as_deref() == Some(g.as_str()))
        })
    }

    fn remove_match(&mut self, place: usize, guard: &Option<String>) -> bool {
        let pos = self.tokens.iter().position(|(p, c)| {
            *p == place && guard.as_ref().map_or(true, |g| c.as_deref() == Some(g.as_str()))
        });
        match pos {
            Some(i) => {
                self.tokens.remove(i);
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, token: Token) {
        let pos = self.tokens.partition_point(|t| *t <= token);
        self.tokens.insert(pos, token);
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl PetriTaskNet {
    pub fn initial_marking(&self) -> Marking {
        Marking::new(self.initial.iter().map(|p| (*p, None)).collect())
    }

    /// Transition is enabled when every input place holds a token matching
    /// the guard color (any token if unguarded).
    pub fn is_enabled(&self, marking: &Marking, transition: usize) -> Result<bool> {
        let t = self
            .transitions
            .get(transition)
            .ok_or_else(|| Error::Structure(format!("no transition {transition}")))?;
        // A place listed twice must hold two tokens; check by consuming a copy.
        let mut probe = marking.clone();
        for input in &t.inputs {
            if !probe.remove_match(*input, &t.guard) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn enabled(&self, marking: &Marking) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|t| self.is_enabled(marking, *t).unwrap_or(false))
            .collect()
    }

    /// Fire a transition: consume one matching token per input place, then
    /// produce one token per output place stamped with the emit color.
    pub fn fire(&self, marking: &Marking, transition: usize) -> Result<Marking> {
        let t = self
            .transitions
            .get(transition)
            .ok_or_else(|| Error::Structure(format!("no transition {transition}")))?;
        let mut next = marking.clone();
        for input in &t.inputs {
            if !next.remove_match(*input, &t.guard) {
                return Err(Error::Contract(format!(
                    "transition '{}' is not enabled",
                    t.label
                )));
            }
        }
        for output in &t.outputs {
            next.insert((*output, t.emit.clone()));
        }
        Ok(next)
    }

    pub fn is_final(&self, marking: &Marking) -> bool {
        marking.count_at(self.final_place) > 0
    }

    /// Directed bipartite edges (from, to) over node ids: places are
    /// `0..places.len()`, transitions follow.
    fn edges(&self) -> Vec<(usize, usize)> {
        let np = self.places.len();
        let mut edges = Vec::new();
        for (ti, t) in self.transitions.iter().enumerate() {
            for p in &t.inputs {
                edges.push((*p, np + ti));
            }
            for p in &t.outputs {
                edges.push((np + ti, *p));
            }
        }
        edges
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let np = self.places.len();
        let nt = self.transitions.len();
        let n = np + nt;
        let edges = self.edges();
        let mut succ = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (a, b) in &edges {
            succ[*a].push(*b);
            indegree[*b] += 1;
        }

        // Acyclicity by Kahn's algorithm.
        let mut queue: Vec<usize> = (0..n).filter(|i| indegree[*i] == 0).collect();
        let mut seen = 0;
        let mut indeg = indegree.clone();
        while let Some(i) = queue.pop() {
            seen += 1;
            for j in &succ[i] {
                indeg[*j] -= 1;
                if indeg[*j] == 0 {
                    queue.push(*j);
                }
            }
        }
        if seen != n {
            report.violations.push("net contains a cycle".into());
        }

        if self.gates.is_empty() {
            report.violations.push("net has no gate".into());
        }

        // Forward reachability from gate outputs and initially marked places.
        let mut reach = vec![false; n];
        let mut stack: Vec<usize> = self.initial.to_vec();
        for g in &self.gates {
            stack.push(np + *g);
        }
        while let Some(i) = stack.pop() {
            if reach[i] {
                continue;
            }
            reach[i] = true;
            for j in &succ[i] {
                stack.push(*j);
            }
        }
        for prim in &self.primitives {
            let unreachable = prim
                .transitions
                .iter()
                .any(|t| !reach[np + *t]);
            if unreachable {
                report
                    .violations
                    .push(format!("primitive '{}' unreachable from gate", prim.name));
            }
        }

        // Every active primitive must feed a gate: a path from its last
        // transition to some gate transition.
        let gate_nodes: Vec<usize> = self.gates.iter().map(|g| np + *g).collect();
        for prim in &self.primitives {
            if !prim.active {
                continue;
            }
            let Some(last) = prim.transitions.last() else {
                report
                    .violations
                    .push(format!("primitive '{}' has no transitions", prim.name));
                continue;
            };
            let mut reach_fwd = vec![false; n];
            let mut stack = vec![np + *last];
            let mut hits_gate = false;
            while let Some(i) = stack.pop() {
                if reach_fwd[i] {
                    continue;
                }
                reach_fwd[i] = true;
                if gate_nodes.contains(&i) {
                    hits_gate = true;
                    break;
                }
                for j in &succ[i] {
                    stack.push(*j);
                }
            }
            if !hits_gate {
                report.violations.push(format!(
                    "active primitive '{}' is not a predecessor of any gate",
                    prim.name
                ));
            }
        }

        // Dangling nodes are tolerated (passive primitives end in sinks) but
        // reported, except designated sinks.
        for (pi, place) in self.places.iter().enumerate() {
            let has_out = succ[pi].iter().next().is_some();
            if !has_out && pi != self.final_place && !place.label.ends_with(".exit") {
                report
                    .warnings
                    .push(format!("place '{}' has no outgoing edge", place.label));
            }
        }

        report
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("net serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(format!("net parse: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
