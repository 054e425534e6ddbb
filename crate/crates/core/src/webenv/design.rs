//! Website designs: the generator's output format.
//!
//! A design is a page count plus an ordered list of placements. SKIP is a
//! no-op slot kept so that fixed-length design budgets are expressible; NULL
//! occupies a slot without rendering anything. JSON writes drop both (they
//! have no rendered content) but reads accept them for hand-written files.

use serde::{Deserialize, Serialize};

use super::catalog;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placement {
    Skip,
    Null { page: usize },
    Put { primitive: String, page: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WebsiteDesign {
    pub pages: usize,
    pub placements: Vec<Placement>,
}

impl WebsiteDesign {
    pub fn new(pages: usize) -> Self {
        Self { pages, placements: Vec::new() }
    }

    pub fn put(mut self, primitive: &str, page: usize) -> Self {
        self.placements.push(Placement::Put { primitive: primitive.into(), page });
        self
    }

    pub fn skip(mut self) -> Self {
        self.placements.push(Placement::Skip);
        self
    }

    /// Placements that consume design budget (everything but SKIP).
    pub fn non_skip_count(&self) -> usize {
        self.placements.iter().filter(|p| !matches!(p, Placement::Skip)).count()
    }

    pub fn active_count(&self) -> usize {
        self.rendered().filter(|(spec, _)| spec.active).count()
    }

    pub fn passive_count(&self) -> usize {
        self.rendered().filter(|(spec, _)| !spec.active).count()
    }

    /// Placements that produce page content, with their catalog rows.
    /// Placements naming unknown primitives are skipped here; `validate`
    /// reports them.
    fn rendered(&self) -> impl Iterator<Item = (&'static catalog::PrimitiveSpec, usize)> + '_ {
        self.placements.iter().filter_map(|p| match p {
            Placement::Put { primitive, page } => {
                catalog::lookup(primitive).ok().map(|spec| (spec, *page))
            }
            _ => None,
        })
    }

    pub fn validate(&self, max_pages: usize, max_placements: usize) -> Result<()> {
        if self.pages > max_pages {
            return Err(Error::Design(format!(
                "{} pages exceeds the maximum of {max_pages}",
                self.pages
            )));
        }
        if self.placements.len() > max_placements {
            return Err(Error::Design(format!(
                "{} placements exceed the budget of {max_placements}",
                self.placements.len()
            )));
        }
        for p in &self.placements {
            match p {
                Placement::Skip => {}
                Placement::Null { page } | Placement::Put { page, .. } => {
                    if *page >= self.pages {
                        return Err(Error::Design(format!(
                            "page {page} out of range for a {}-page design",
                            self.pages
                        )));
                    }
                }
            }
            if let Placement::Put { primitive, .. } = p {
                catalog::lookup(primitive)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let placements = self
            .placements
            .iter()
            .filter_map(|p| match p {
                Placement::Put { primitive, page } => {
                    Some(PlacementJson { primitive: primitive.clone(), page: Some(*page) })
                }
                _ => None,
            })
            .collect();
        serde_json::to_string_pretty(&DesignJson { pages: self.pages, placements })
            .expect("design serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DesignJson =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let placements = raw
            .placements
            .into_iter()
            .map(|p| {
                let page = p.page.unwrap_or(0);
                match p.primitive.as_str() {
                    "SKIP" => Placement::Skip,
                    "NULL" => Placement::Null { page },
                    _ => Placement::Put { primitive: p.primitive, page },
                }
            })
            .collect();
        Ok(Self { pages: raw.pages, placements })
    }
}

#[derive(Serialize, Deserialize)]
struct DesignJson {
    pages: usize,
    placements: Vec<PlacementJson>,
}

#[derive(Serialize, Deserialize)]
struct PlacementJson {
    primitive: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    page: Option<usize>,
}
