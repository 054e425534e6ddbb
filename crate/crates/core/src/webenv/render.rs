//! Renderer: website design → pages, instruction, and backing task net.

use std::collections::BTreeMap;

use super::catalog::{self, PrimitiveSpec, Template};
use super::design::{Placement, WebsiteDesign};
use crate::petri::{compose, PetriTaskNet, PrimitiveNet};
use crate::rng::RandomStream;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    /// Unique across the whole site, assigned in render order.
    pub id: usize,
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    pub text: Option<String>,
    pub children: Vec<DomNode>,
}

impl DomNode {
    fn new(id: &mut usize, tag: &str) -> Self {
        let node = Self { id: *id, tag: tag.into(), attrs: Vec::new(), text: None, children: Vec::new() };
        *id += 1;
        node
    }

    fn class(mut self, value: &str) -> Self {
        self.attrs.push(("class".into(), value.into()));
        self
    }

    fn attr(mut self, key: &str, value: &str) -> Self {
        self.attrs.push((key.into(), value.into()));
        self
    }

    fn text(mut self, value: &str) -> Self {
        self.text = Some(value.into());
        self
    }

    fn child(mut self, node: DomNode) -> Self {
        self.children.push(node);
        self
    }

    pub fn walk<'a>(&'a self, out: &mut Vec<&'a DomNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }

    /// Count of nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DomNode::size).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomTree {
    pub root: DomNode,
}

impl DomTree {
    pub fn size(&self) -> usize {
        self.root.size()
    }
}

/// Key → value pairs the agent must supply, in placement order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instruction {
    pub fields: Vec<(String, String)>,
}

impl Instruction {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.fields.iter().position(|(k, _)| k == key)
    }
}

/// What interacting with an element does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementBinding {
    /// Pairing the element with instruction field `field` fires `transition`.
    Field { transition: usize, field: usize },
    /// Clicking (null field) fires the page gate.
    Gate { transition: usize },
    /// Clickable but without effect.
    Noop,
}

#[derive(Debug, Clone)]
pub struct RenderedSite {
    pub design: WebsiteDesign,
    pub pages: Vec<DomTree>,
    pub instruction: Instruction,
    pub net: PetriTaskNet,
    /// element id → what it does, for ids present in the map; other ids are
    /// decoration.
    pub bindings: BTreeMap<usize, ElementBinding>,
    /// element id → page index, for actionable ids.
    pub element_page: BTreeMap<usize, usize>,
    /// Actionable element ids per page, in DOM order.
    pub page_actionables: Vec<Vec<usize>>,
    /// Distinct required field count per page.
    pub page_fields: Vec<usize>,
    /// Episode step budget.
    pub horizon: usize,
}

fn display_text(spec: &PrimitiveSpec) -> &'static str {
    match spec.name {
        "header" => "Welcome",
        "header_login" => "Sign in",
        "header_select_items" => "Select items",
        "next_checkout" => "Checkout",
        "next_login" | "next_login_page" => "Next",
        "submit" => "Submit",
        "forgotpassword" => "Forgot password?",
        "forgotusername" => "Forgot username?",
        "addressline1" => "Address line 1",
        "addressline2" => "Address line 2",
        "cabin" => "Cabin",
        "captcha" => "Captcha",
        "cart" => "Your cart",
        "cc" => "Card type",
        "cccvv" => "CVV",
        "ccexpdate" => "Expiration date",
        "ccnumber" => "Card number",
        "city" => "City",
        "departureairport" => "Departure airport",
        "departuredate" => "Departure date",
        "destinationairport" => "Destination airport",
        "destinationdate" => "Destination date",
        "firstname" => "First name",
        "flighttype" => "Flight type",
        "fullname" => "Full name",
        "inpgroup" => "Search",
        "lastname" => "Last name",
        "numberofpeople" => "Number of people",
        "password" => "Password",
        "rememberme" => "Remember me",
        "state" => "State",
        "stayloggedin" => "Stay logged in",
        "username" => "Username",
        "zipcode" => "Zipcode",
        _ => "",
    }
}

/// Render one primitive into DOM nodes. Returns the subtree plus the id of
/// the interaction point: `Some(id)` for active field elements and clickable
/// passives, `None` for decoration.
fn render_primitive(spec: &PrimitiveSpec, next_id: &mut usize) -> (DomNode, Option<usize>, bool) {
    let label = display_text(spec);
    let key = spec.field_key.unwrap_or("");
    match spec.template {
        Template::Input => {
            let input = DomNode::new(next_id, "input").class(key).attr("type", "text");
            let hot = input.id;
            let group = DomNode::new(next_id, "div")
                .class(spec.name)
                .child(DomNode::new(next_id, "label").text(label))
                .child(input);
            (group, Some(hot), true)
        }
        Template::MultiSelection => {
            let mut select = DomNode::new(next_id, "select").class(key);
            let hot = select.id;
            for v in catalog::value_vocab(key).unwrap_or(&[]) {
                select = select.child(DomNode::new(next_id, "option").text(v));
            }
            let group = DomNode::new(next_id, "div")
                .class(spec.name)
                .child(DomNode::new(next_id, "label").text(label))
                .child(select);
            (group, Some(hot), true)
        }
        Template::Selection => {
            let input = DomNode::new(next_id, "input").class(key).attr("type", "checkbox");
            let hot = input.id;
            let group = DomNode::new(next_id, "div")
                .class(spec.name)
                .child(input)
                .child(DomNode::new(next_id, "label").text(label));
            (group, Some(hot), true)
        }
        Template::Button => {
            let node = DomNode::new(next_id, "button").class(spec.name).text(label);
            let hot = node.id;
            (node, Some(hot), false)
        }
        Template::Link => {
            let node = DomNode::new(next_id, "a").class(spec.name).text(label);
            let hot = node.id;
            (node, Some(hot), false)
        }
        Template::Label => {
            (DomNode::new(next_id, "h2").class(spec.name).text(label), None, false)
        }
        Template::Navbar => {
            let nav = DomNode::new(next_id, "nav")
                .class(spec.name)
                .child(DomNode::new(next_id, "a").text("Home"))
                .child(DomNode::new(next_id, "a").text("Products"))
                .child(DomNode::new(next_id, "a").text("About"));
            (nav, None, false)
        }
        Template::Carousel => {
            let mut node = DomNode::new(next_id, "div")
                .class(spec.name)
                .child(DomNode::new(next_id, "button").text("Prev"));
            for i in 0..3 {
                node = node.child(
                    DomNode::new(next_id, "div")
                        .class("item")
                        .child(DomNode::new(next_id, "img").attr("src", "#"))
                        .child(DomNode::new(next_id, "span").text(&format!("Item {}", i + 1))),
                );
            }
            (node.child(DomNode::new(next_id, "button").text("Next")), None, false)
        }
        Template::Deck => {
            let mut node = DomNode::new(next_id, "div").class(spec.name);
            for i in 0..3 {
                node = node.child(
                    DomNode::new(next_id, "div")
                        .class("card")
                        .child(DomNode::new(next_id, "img").attr("src", "#"))
                        .child(DomNode::new(next_id, "h3").text(&format!("Product {}", i + 1)))
                        .child(DomNode::new(next_id, "a").text("More")),
                );
            }
            (node, None, false)
        }
        Template::Cart => {
            let input = DomNode::new(next_id, "input").class(key).attr("type", "text");
            let hot = input.id;
            let node = DomNode::new(next_id, "div")
                .class(spec.name)
                .child(DomNode::new(next_id, "div").class("item").text("Item 1"))
                .child(DomNode::new(next_id, "div").class("item").text("Item 2"))
                .child(
                    DomNode::new(next_id, "div")
                        .class("promo")
                        .child(DomNode::new(next_id, "label").text("Promo code"))
                        .child(input),
                );
            (node, Some(hot), true)
        }
        Template::Media => {
            let node = DomNode::new(next_id, "div")
                .class(spec.name)
                .child(DomNode::new(next_id, "img").attr("src", "#"))
                .child(DomNode::new(next_id, "span").text("Deal of the day"))
                .child(DomNode::new(next_id, "a").text("Details"));
            (node, None, false)
        }
        Template::Footer => {
            let node = DomNode::new(next_id, "footer")
                .class(spec.name)
                .child(DomNode::new(next_id, "a").text("Privacy"))
                .child(DomNode::new(next_id, "a").text("Terms"))
                .child(DomNode::new(next_id, "span").text("© 2022"));
            (node, None, false)
        }
    }
}

/// Build the observable site from a design. Pure in (design, stream): the
/// same inputs give an identical site. An empty or zero-page design still
/// renders one trivial page so the episode is well defined.
pub fn render(design: &WebsiteDesign, stream: &mut RandomStream) -> Result<RenderedSite> {
    design.validate(usize::MAX, usize::MAX)?;
    let k = design.pages.max(1);

    // Group renderable placements by page, keeping placement order.
    let mut per_page: Vec<Vec<&'static PrimitiveSpec>> = vec![Vec::new(); k];
    for p in &design.placements {
        if let Placement::Put { primitive, page } = p {
            per_page[*page].push(catalog::lookup(primitive)?);
        }
    }

    // Instruction: one field per distinct key, in first-appearance order.
    let mut values = stream.child("values");
    let mut instruction = Instruction::default();
    for spec in per_page.iter().flatten() {
        if let Some(key) = spec.field_key {
            if instruction.index_of(key).is_none() {
                let pool = catalog::value_vocab(key)?;
                let v = pool[values.below(pool.len())];
                instruction.fields.push((key.into(), v.into()));
            }
        }
    }

    // Backing net: one fragment per rendered primitive, page gates chained.
    let mut fragments = Vec::new();
    let mut page_ends = Vec::new();
    for page in &per_page {
        for spec in page {
            fragments.push(match spec.field_key {
                Some(key) => PrimitiveNet::active(spec.name, key),
                None => PrimitiveNet::passive(spec.name),
            });
        }
        page_ends.push(fragments.len());
    }
    let net = compose(&fragments, &page_ends)?;

    // DOM pages + bindings. net.primitives is grouped by page in the same
    // order as per_page, so a running cursor lines the two up.
    let mut next_id = 0usize;
    let mut pages = Vec::with_capacity(k);
    let mut bindings = BTreeMap::new();
    let mut element_page = BTreeMap::new();
    let mut page_actionables = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for (page_idx, page) in per_page.iter().enumerate() {
        let mut root = DomNode::new(&mut next_id, "div").class("page");
        for spec in page {
            let placed = &net.primitives[cursor];
            debug_assert_eq!(placed.name, spec.name);
            let (subtree, hot, is_field) = render_primitive(spec, &mut next_id);
            if let Some(id) = hot {
                let binding = if is_field {
                    let key = spec.field_key.expect("field elements come from active rows");
                    ElementBinding::Field {
                        transition: *placed.transitions.last().expect("chains are nonempty"),
                        field: instruction.index_of(key).expect("key was just recorded"),
                    }
                } else {
                    ElementBinding::Noop
                };
                bindings.insert(id, binding);
                element_page.insert(id, page_idx);
                page_actionables[page_idx].push(id);
            }
            root = root.child(subtree);
            cursor += 1;
        }
        let last = page_idx + 1 == k;
        let gate = DomNode::new(&mut next_id, "button")
            .class(if last { "submit" } else { "next" })
            .text(if last { "Submit" } else { "Next" });
        bindings.insert(gate.id, ElementBinding::Gate { transition: net.gates[page_idx] });
        element_page.insert(gate.id, page_idx);
        page_actionables[page_idx].push(gate.id);
        root = root.child(gate);
        pages.push(DomTree { root });
    }

    // Per-page required-field counts and the step budget: 4 + 3·F per page.
    let mut page_fields = vec![0usize; k];
    for (page_idx, page) in per_page.iter().enumerate() {
        let mut keys: Vec<&str> = page.iter().filter_map(|s| s.field_key).collect();
        keys.sort_unstable();
        keys.dedup();
        page_fields[page_idx] = keys.len();
    }
    let horizon = page_fields.iter().map(|f| 4 + 3 * f).sum();

    Ok(RenderedSite {
        design: design.clone(),
        pages,
        instruction,
        net,
        bindings,
        element_page,
        page_actionables,
        page_fields,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream() -> RandomStream {
        RandomStream::from_seed(7)
    }

    #[test]
    fn login_like_design_renders_fields_and_gate() {
        let d = WebsiteDesign::new(1).put("username", 0).put("password", 0).skip();
        let site = render(&d, &mut stream()).unwrap();
        assert_eq!(site.pages.len(), 1);
        assert_eq!(site.instruction.len(), 2);
        assert_eq!(site.instruction.fields[0].0, "username");
        assert_eq!(site.page_actionables[0].len(), 3);
        let gate_id = *site.page_actionables[0].last().unwrap();
        assert!(matches!(site.bindings[&gate_id], ElementBinding::Gate { .. }));
        assert_eq!(site.horizon, 4 + 3 * 2);
    }

    #[test]
    fn all_skip_design_renders_one_trivial_page() {
        let d = WebsiteDesign::new(0).skip().skip();
        let site = render(&d, &mut stream()).unwrap();
        assert_eq!(site.pages.len(), 1);
        assert!(site.instruction.is_empty());
        assert_eq!(site.page_actionables[0].len(), 1);
        assert_eq!(site.horizon, 4);
    }

    #[test]
    fn rendering_is_deterministic() {
        let d = WebsiteDesign::new(2)
            .put("username", 0)
            .put("footer", 0)
            .put("firstname", 1)
            .put("carousel", 1);
        let a = render(&d, &mut stream()).unwrap();
        let b = render(&d, &mut stream()).unwrap();
        assert_eq!(a.pages, b.pages);
        assert_eq!(a.instruction, b.instruction);
        assert_eq!(a.net, b.net);
    }

    #[test]
    fn passive_primitives_do_not_touch_instruction_or_fields() {
        let base = WebsiteDesign::new(1).put("username", 0);
        let noisy = WebsiteDesign::new(1).put("username", 0).put("navbar", 0).put("footer", 0);
        let a = render(&base, &mut stream()).unwrap();
        let b = render(&noisy, &mut stream()).unwrap();
        assert_eq!(a.instruction, b.instruction);
        assert_eq!(a.page_fields, b.page_fields);
        assert!(b.pages[0].size() > a.pages[0].size());
    }

    #[test]
    fn duplicate_key_placements_share_one_instruction_field() {
        let d = WebsiteDesign::new(1).put("username", 0).put("username", 0);
        let site = render(&d, &mut stream()).unwrap();
        assert_eq!(site.instruction.len(), 1);
        let fields: Vec<_> = site
            .bindings
            .values()
            .filter_map(|b| match b {
                ElementBinding::Field { field, .. } => Some(*field),
                _ => None,
            })
            .collect();
        assert_eq!(fields, vec![0, 0]);
        assert_eq!(site.page_fields[0], 1);
    }

    #[test]
    fn clickable_passives_are_actionable_noops() {
        let d = WebsiteDesign::new(1).put("forgotpassword", 0).put("header", 0);
        let site = render(&d, &mut stream()).unwrap();
        // link is actionable, label is not, gate is appended
        assert_eq!(site.page_actionables[0].len(), 2);
        let link = site.page_actionables[0][0];
        assert_eq!(site.bindings[&link], ElementBinding::Noop);
    }

    #[test]
    fn unknown_primitive_is_a_catalog_error() {
        let d = WebsiteDesign::new(1).put("blinktag", 0);
        assert!(render(&d, &mut stream()).is_err());
    }

    #[test]
    fn values_come_from_the_key_pool() {
        let d = WebsiteDesign::new(1).put("cabin", 0).put("cart", 0);
        let site = render(&d, &mut stream()).unwrap();
        for (key, value) in &site.instruction.fields {
            assert!(catalog::value_vocab(key).unwrap().contains(&value.as_str()));
        }
    }
}
