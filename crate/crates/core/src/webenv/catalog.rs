//! The fixed primitive catalog for the web domain.
//!
//! Active primitives carry a field key: placing one adds that key to the
//! episode instruction, and the rendered element must be paired with it.
//! Passive primitives render but never gate progress.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Input,
    MultiSelection,
    Selection,
    Button,
    Link,
    Label,
    Navbar,
    Carousel,
    Deck,
    Cart,
    Media,
    Footer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveSpec {
    pub name: &'static str,
    pub template: Template,
    pub active: bool,
    /// Instruction key; present exactly when the primitive is active.
    pub field_key: Option<&'static str>,
}

const fn active(name: &'static str, template: Template, key: &'static str) -> PrimitiveSpec {
    PrimitiveSpec { name, template, active: true, field_key: Some(key) }
}

const fn passive(name: &'static str, template: Template) -> PrimitiveSpec {
    PrimitiveSpec { name, template, active: false, field_key: None }
}

use Template::*;

pub const CATALOG: [PrimitiveSpec; 40] = [
    active("addressline1", Input, "addressline1"),
    active("addressline2", Input, "addressline2"),
    active("cabin", MultiSelection, "cabin"),
    active("captcha", Input, "captcha"),
    passive("carousel", Carousel),
    active("cart", Cart, "promocode"),
    active("cc", MultiSelection, "cc"),
    active("cccvv", Input, "cccvv"),
    active("ccexpdate", Input, "ccexpdate"),
    active("ccnumber", Input, "ccnumber"),
    active("city", Input, "city"),
    passive("dealmedia", Media),
    passive("deck", Deck),
    active("departureairport", Input, "departureairport"),
    active("departuredate", Input, "departuredate"),
    active("destinationairport", Input, "destinationairport"),
    active("destinationdate", Input, "destinationdate"),
    active("firstname", Input, "firstname"),
    active("flighttype", MultiSelection, "flighttype"),
    passive("footer", Footer),
    passive("forgotpassword", Link),
    passive("forgotusername", Link),
    active("fullname", Input, "fullname"),
    passive("header", Label),
    passive("header_login", Label),
    passive("header_select_items", Label),
    active("inpgroup", Input, "search"),
    active("lastname", Input, "lastname"),
    passive("navbar", Navbar),
    passive("next_checkout", Button),
    passive("next_login", Button),
    passive("next_login_page", Button),
    active("numberofpeople", MultiSelection, "numberofpeople"),
    active("password", Input, "password"),
    active("rememberme", Selection, "rememberme"),
    active("state", Input, "state"),
    active("stayloggedin", Selection, "stayloggedin"),
    passive("submit", Button),
    active("username", Input, "username"),
    active("zipcode", Input, "zipcode"),
];

pub fn catalog() -> &'static [PrimitiveSpec] {
    &CATALOG
}

pub fn lookup(name: &str) -> Result<&'static PrimitiveSpec> {
    CATALOG
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Catalog(format!("unknown primitive '{name}'")))
}

pub fn catalog_index(name: &str) -> Result<usize> {
    CATALOG
        .iter()
        .position(|p| p.name == name)
        .ok_or_else(|| Error::Catalog(format!("unknown primitive '{name}'")))
}

/// Candidate instruction values per field key. Values are sampled from these
/// pools when a design is rendered.
pub fn value_vocab(field_key: &str) -> Result<&'static [&'static str]> {
    let pool: &'static [&'static str] = match field_key {
        "addressline1" => &["12 Elm St", "908 Pine Ave", "77 Harbor Rd"],
        "addressline2" => &["Apt 4B", "Suite 210", "Unit 7"],
        "cabin" => &["economy", "business", "first"],
        "captcha" => &["x7f2q", "9kd3a", "zz41m"],
        "promocode" => &["SAVE10", "FREESHIP", "WELCOME5"],
        "cc" => &["visa", "mastercard", "amex"],
        "cccvv" => &["123", "447", "902"],
        "ccexpdate" => &["01/27", "11/25", "06/26"],
        "ccnumber" => &["4111111111111111", "5500005555555559", "340000000000009"],
        "city" => &["Springfield", "Riverton", "Lakewood"],
        "departureairport" => &["SFO", "JFK", "LHR"],
        "departuredate" => &["03/14/2022", "06/02/2022", "09/30/2022"],
        "destinationairport" => &["NRT", "CDG", "SYD"],
        "destinationdate" => &["03/21/2022", "06/09/2022", "10/07/2022"],
        "firstname" => &["Alice", "Marco", "Yuki", "Priya"],
        "flighttype" => &["oneway", "roundtrip"],
        "fullname" => &["Alice Nguyen", "Marco Garcia", "Yuki Sato"],
        "search" => &["laptop", "running shoes", "desk lamp"],
        "lastname" => &["Nguyen", "Garcia", "Okafor", "Larsen"],
        "numberofpeople" => &["1", "2", "3", "4"],
        "password" => &["hunter2", "s3cr3t!", "qwerty99"],
        "rememberme" => &["true", "false"],
        "state" => &["CA", "NY", "TX", "WA"],
        "stayloggedin" => &["true", "false"],
        "username" => &["marcus", "elena_v", "jsmith42"],
        "zipcode" => &["94016", "10001", "73301"],
        other => return Err(Error::Catalog(format!("no value pool for field '{other}'"))),
    };
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_primitives_twenty_six_active() {
        assert_eq!(CATALOG.len(), 40);
        let active = CATALOG.iter().filter(|p| p.active).count();
        assert_eq!(active, 26);
        assert_eq!(CATALOG.len() - active, 14);
    }

    #[test]
    fn names_unique_and_sorted() {
        for w in CATALOG.windows(2) {
            assert!(w[0].name < w[1].name, "{} !< {}", w[0].name, w[1].name);
        }
    }

    #[test]
    fn active_iff_field_key() {
        for p in &CATALOG {
            assert_eq!(p.active, p.field_key.is_some(), "{}", p.name);
        }
    }

    #[test]
    fn known_rows() {
        let u = lookup("username").unwrap();
        assert!(u.active);
        assert_eq!(u.template, Template::Input);
        assert!(!lookup("footer").unwrap().active);
        assert!(lookup("nosuch").is_err());
    }

    #[test]
    fn every_active_has_a_value_pool() {
        for p in CATALOG.iter().filter(|p| p.active) {
            let pool = value_vocab(p.field_key.unwrap()).unwrap();
            assert!(!pool.is_empty());
        }
        assert!(value_vocab("footer").is_err());
    }
}
