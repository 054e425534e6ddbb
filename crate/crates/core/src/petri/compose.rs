//! Composition of primitive fragments into a paged task net.
//!
//! Layout of the composed net, for k pages:
//!
//! ```text
//!   [c0]--.                       [c1]--.
//!         |                             |
//!   entry->t->exit --(color)--> [field]-+->gate0 --> entries page 1 ... gateK-1 --> [final]
//!   entry->t->exit   (passive, sink)    |
//! ```
//!
//! Page i's gate consumes the page control token plus one field token per
//! distinct color on the page, so a gate fires only when every active
//! primitive on its page has completed. Duplicate colors on one page share a
//! field place: completing either placement satisfies the requirement.

use super::{Place, PlacedPrimitive, PetriTaskNet, Transition, TransitionKind};
use crate::{Error, Result};

/// A serial workflow fragment: one entry place, a chain of `steps`
/// transitions, one exit place. Active fragments carry the field color on
/// their final transition.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveNet {
    pub name: String,
    pub active: bool,
    pub color: Option<String>,
    pub steps: usize,
}

impl PrimitiveNet {
    pub fn active(name: &str, color: &str) -> Self {
        Self { name: name.into(), active: true, color: Some(color.into()), steps: 1 }
    }

    pub fn passive(name: &str) -> Self {
        Self { name: name.into(), active: false, color: None, steps: 1 }
    }
}

/// Compose primitives into pages. `page_ends[i]` is the end index
/// (exclusive) of page i within `primitives`; the last entry must equal
/// `primitives.len()`, so every primitive belongs to exactly one page.
pub fn compose(primitives: &[PrimitiveNet], page_ends: &[usize]) -> Result<PetriTaskNet> {
    if page_ends.is_empty() {
        return Err(Error::Structure("page set is empty".into()));
    }
    let mut prev = 0usize;
    for (i, e) in page_ends.iter().enumerate() {
        if *e < prev || *e > primitives.len() {
            return Err(Error::Structure(format!(
                "page boundary {i} at {e} is out of order"
            )));
        }
        prev = *e;
    }
    if prev != primitives.len() {
        return Err(Error::Structure(format!(
            "{} primitives are not covered by any page",
            primitives.len() - prev
        )));
    }
    for p in primitives {
        if p.steps == 0 {
            return Err(Error::Structure(format!("primitive '{}' has no steps", p.name)));
        }
        if p.active != p.color.is_some() {
            return Err(Error::Structure(format!(
                "primitive '{}': active flag and color disagree",
                p.name
            )));
        }
    }

    let k = page_ends.len();
    let mut net = PetriTaskNet {
        places: Vec::new(),
        transitions: Vec::new(),
        gates: Vec::new(),
        colors: Vec::new(),
        primitives: Vec::new(),
        initial: Vec::new(),
        final_place: 0,
        pages: k,
    };
    let add_place = |net: &mut PetriTaskNet, label: String| -> usize {
        net.places.push(Place { label });
        net.places.len() - 1
    };

    // Page control places.
    let controls: Vec<usize> = (0..k).map(|i| add_place(&mut net, format!("c{i}"))).collect();
    let final_place = add_place(&mut net, "final".into());
    net.final_place = final_place;
    net.initial.push(controls[0]);

    // Per page: build primitive chains and collect entries / field places.
    let mut page_entries: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut page_fields: Vec<Vec<(String, usize)>> = vec![Vec::new(); k];
    let mut start = 0usize;
    for (page, end) in page_ends.iter().enumerate() {
        for (slot, prim) in primitives[start..*end].iter().enumerate() {
            let tag = format!("{}#{page}.{slot}", prim.name);
            let entry = add_place(&mut net, format!("{tag}.entry"));
            page_entries[page].push(entry);

            let mut chain = Vec::new();
            let mut cur = entry;
            for s in 0..prim.steps {
                let last = s + 1 == prim.steps;
                let out = if last {
                    add_place(&mut net, format!("{tag}.exit"))
                } else {
                    add_place(&mut net, format!("{tag}.p{s}"))
                };
                let mut outputs = vec![out];
                let mut emit = None;
                if last && prim.active {
                    let color = prim.color.clone().unwrap();
                    // Shared per (page, color): either duplicate satisfies it.
                    let field = match page_fields[page].iter().find(|(c, _)| *c == color) {
                        Some((_, p)) => *p,
                        None => {
                            let p = add_place(&mut net, format!("field:{page}:{color}"));
                            page_fields[page].push((color.clone(), p));
                            p
                        }
                    };
                    outputs.push(field);
                    emit = Some(color.clone());
                    if !net.colors.contains(&color) {
                        net.colors.push(color);
                    }
                }
                net.transitions.push(Transition {
                    label: format!("{tag}.t{s}"),
                    inputs: vec![cur],
                    outputs,
                    guard: None,
                    emit,
                    kind: TransitionKind::Step,
                });
                chain.push(net.transitions.len() - 1);
                cur = out;
            }
            net.primitives.push(PlacedPrimitive {
                name: prim.name.clone(),
                page,
                active: prim.active,
                color: prim.color.clone(),
                transitions: chain,
            });
        }
        start = *end;
    }

    // Page 0 primitives are live from the start.
    net.initial.extend(page_entries[0].iter().copied());

    // Gates: consume control + field tokens, release the next page.
    for page in 0..k {
        let mut inputs = vec![controls[page]];
        inputs.extend(page_fields[page].iter().map(|(_, p)| *p));
        let mut outputs = Vec::new();
        if page + 1 < k {
            outputs.push(controls[page + 1]);
            outputs.extend(page_entries[page + 1].iter().copied());
        } else {
            outputs.push(final_place);
        }
        net.transitions.push(Transition {
            label: format!("gate{page}"),
            inputs,
            outputs,
            guard: None,
            emit: None,
            kind: TransitionKind::Gate,
        });
        net.gates.push(net.transitions.len() - 1);
    }

    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn login_like() -> Vec<PrimitiveNet> {
        vec![
            PrimitiveNet::active("username", "username"),
            PrimitiveNet::active("password", "password"),
            PrimitiveNet::passive("footer"),
        ]
    }

    #[test]
    fn single_page_gate_waits_for_both_fields() {
        let net = compose(&login_like(), &[3]).unwrap();
        assert_eq!(net.pages, 1);
        assert_eq!(net.gates.len(), 1);
        assert_eq!(net.colors, vec!["username", "password"]);

        let gate = net.gates[0];
        let m0 = net.initial_marking();
        assert!(!net.is_enabled(&m0, gate).unwrap());

        // Fire username only: gate still blocked.
        let t_user = net.primitives[0].transitions[0];
        let m1 = net.fire(&m0, t_user).unwrap();
        assert!(!net.is_enabled(&m1, gate).unwrap());

        // Fire password too: gate opens; firing it reaches the final place.
        let t_pass = net.primitives[1].transitions[0];
        let m2 = net.fire(&m1, t_pass).unwrap();
        assert!(net.is_enabled(&m2, gate).unwrap());
        let m3 = net.fire(&m2, gate).unwrap();
        assert!(net.is_final(&m3));
    }

    #[test]
    fn passive_primitive_is_not_required_by_gate() {
        let net = compose(&login_like(), &[3]).unwrap();
        let m0 = net.initial_marking();
        let t_user = net.primitives[0].transitions[0];
        let t_pass = net.primitives[1].transitions[0];
        let m = net.fire(&m0, t_user).unwrap();
        let m = net.fire(&m, t_pass).unwrap();
        // Footer never fired, gate opens anyway.
        assert!(net.is_enabled(&m, net.gates[0]).unwrap());
    }

    #[test]
    fn two_pages_fire_in_order() {
        let prims = vec![
            PrimitiveNet::active("username", "username"),
            PrimitiveNet::active("zipcode", "zipcode"),
        ];
        let net = compose(&prims, &[1, 2]).unwrap();
        assert_eq!(net.pages, 2);

        // Page 1's primitive is dead until gate 0 fires.
        let m0 = net.initial_marking();
        let t_zip = net.primitives[1].transitions[0];
        assert!(!net.is_enabled(&m0, t_zip).unwrap());
        assert!(net.fire(&m0, t_zip).is_err());

        let t_user = net.primitives[0].transitions[0];
        let m = net.fire(&m0, t_user).unwrap();
        let m = net.fire(&m, net.gates[0]).unwrap();
        assert!(net.is_enabled(&m, t_zip).unwrap());
        let m = net.fire(&m, t_zip).unwrap();
        let m = net.fire(&m, net.gates[1]).unwrap();
        assert!(net.is_final(&m));
    }

    #[test]
    fn duplicate_color_on_page_either_satisfies() {
        let prims = vec![
            PrimitiveNet::active("username", "username"),
            PrimitiveNet::active("username", "username"),
        ];
        let net = compose(&prims, &[2]).unwrap();
        let m0 = net.initial_marking();
        let m = net.fire(&m0, net.primitives[1].transitions[0]).unwrap();
        assert!(net.is_enabled(&m, net.gates[0]).unwrap());
    }

    #[test]
    fn orphan_primitive_is_rejected() {
        let prims = login_like();
        assert!(compose(&prims, &[2]).is_err()); // footer uncovered
        assert!(compose(&prims, &[]).is_err());
        assert!(compose(&prims, &[3, 2]).is_err());
    }

    #[test]
    fn empty_pages_are_allowed() {
        let prims = vec![PrimitiveNet::active("username", "username")];
        let net = compose(&prims, &[1, 1]).unwrap(); // page 1 empty
        let m = net.initial_marking();
        let m = net.fire(&m, net.primitives[0].transitions[0]).unwrap();
        let m = net.fire(&m, net.gates[0]).unwrap();
        assert!(net.is_enabled(&m, net.gates[1]).unwrap());
        let m = net.fire(&m, net.gates[1]).unwrap();
        assert!(net.is_final(&m));
    }

    #[test]
    fn fired_tokens_carry_field_color() {
        let net = compose(&[PrimitiveNet::active("city", "city")], &[1]).unwrap();
        let m = net.fire(&net.initial_marking(), net.primitives[0].transitions[0]).unwrap();
        assert!(m.tokens().iter().any(|(_, c)| c.as_deref() == Some("city")));
    }

    #[test]
    fn compose_is_deterministic() {
        let a = compose(&login_like(), &[3]).unwrap();
        let b = compose(&login_like(), &[3]).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn validate_accepts_composed_nets() {
        let net = compose(&login_like(), &[2, 3]).unwrap();
        let report = net.validate();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn validate_flags_unreachable_primitive() {
        let mut net = compose(&login_like(), &[3]).unwrap();
        // Detach the username entry from the initial marking: nothing can
        // reach its transition any more.
        net.initial.retain(|p| !net.places[*p].label.starts_with("username"));
        let report = net.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("unreachable from gate")));
    }

    #[test]
    fn validate_flags_active_not_feeding_gate() {
        let mut net = compose(&login_like(), &[3]).unwrap();
        // Cut the username field token out of the gate's inputs and out of
        // the fill transition's outputs.
        let field = net
            .places
            .iter()
            .position(|p| p.label == "field:0:username")
            .unwrap();
        for t in &mut net.transitions {
            t.inputs.retain(|p| *p != field);
            t.outputs.retain(|p| *p != field);
        }
        let report = net.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("not a predecessor of any gate")));
    }

    #[test]
    fn validate_flags_cycle() {
        let mut net = compose(&login_like(), &[3]).unwrap();
        // Wire the gate back into an entry it already consumed from.
        let gate = net.gates[0];
        let input0 = net.transitions[gate].inputs[0];
        net.transitions[gate].outputs.push(input0);
        let report = net.validate();
        assert!(report.violations.iter().any(|v| v.contains("cycle")));
    }

    #[test]
    fn json_roundtrip() {
        let net = compose(&login_like(), &[3]).unwrap();
        let parsed = PetriTaskNet::from_json(&net.to_json()).unwrap();
        assert_eq!(net, parsed);
    }
}
