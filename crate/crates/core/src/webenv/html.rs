//! HTML export for rendered sites: an inspection aid, not an execution
//! surface. Output is a plain self-contained document, byte-identical for
//! identical input.

use std::fmt::Write;

use super::render::{DomNode, RenderedSite};

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const VOID_TAGS: [&str; 2] = ["img", "input"];

fn write_node(out: &mut String, node: &DomNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let mut open = format!("{}<{} data-id=\"{}\"", pad, node.tag, node.id);
    for (k, v) in &node.attrs {
        write!(open, " {}=\"{}\"", k, escape(v)).unwrap();
    }
    if VOID_TAGS.contains(&node.tag.as_str()) {
        out.push_str(&open);
        out.push_str("/>\n");
        return;
    }
    open.push('>');
    out.push_str(&open);
    if node.children.is_empty() {
        if let Some(t) = &node.text {
            out.push_str(&escape(t));
        }
        writeln!(out, "</{}>", node.tag).unwrap();
        return;
    }
    out.push('\n');
    if let Some(t) = &node.text {
        writeln!(out, "{}  {}", pad, escape(t)).unwrap();
    }
    for c in &node.children {
        write_node(out, c, depth + 1);
    }
    writeln!(out, "{}</{}>", pad, node.tag).unwrap();
}

pub fn export_html(site: &RenderedSite) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n");
    out.push_str("<title>generated site</title>\n</head>\n<body>\n");
    for (i, page) in site.pages.iter().enumerate() {
        writeln!(out, "<section data-page=\"{i}\">").unwrap();
        write_node(&mut out, &page.root, 1);
        out.push_str("</section>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::webenv::design::WebsiteDesign;
    use crate::webenv::render::render;

    #[test]
    fn trivial_page_is_a_skeleton_document() {
        let site = render(&WebsiteDesign::new(0), &mut RandomStream::from_seed(1)).unwrap();
        let html = export_html(&site);
        assert!(html.starts_with("<!DOCTYPE html>"));
        assert!(html.contains("data-page=\"0\""));
        assert!(html.contains("Submit"));
    }

    #[test]
    fn login_page_contains_two_inputs() {
        let d = WebsiteDesign::new(1).put("username", 0).put("password", 0);
        let site = render(&d, &mut RandomStream::from_seed(1)).unwrap();
        let html = export_html(&site);
        assert_eq!(html.matches("<input").count(), 2);
        assert!(html.contains("class=\"username\""));
    }

    #[test]
    fn export_is_deterministic() {
        let d = WebsiteDesign::new(2)
            .put("navbar", 0)
            .put("username", 0)
            .put("deck", 1)
            .put("cart", 1);
        let a = export_html(&render(&d, &mut RandomStream::from_seed(9)).unwrap());
        let b = export_html(&render(&d, &mut RandomStream::from_seed(9)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn element_order_follows_placement_order() {
        let d = WebsiteDesign::new(1).put("password", 0).put("username", 0);
        let site = render(&d, &mut RandomStream::from_seed(1)).unwrap();
        let html = export_html(&site);
        let p = html.find("class=\"password\"").unwrap();
        let u = html.find("class=\"username\"").unwrap();
        assert!(p < u);
    }
}
