//! The fixed evaluation suite: five form-filling tasks at four difficulty
//! levels. Level d keeps the first ⌈d/4 · F₄⌉ required fields of the task's
//! full field list plus the first d−1 passive distractors, so every level is
//! a sub-multiset of the next. The shipped fixture pins the exact designs;
//! `fixture_text` must stay byte-identical to the fixture file.

use std::collections::BTreeMap;

use super::design::WebsiteDesign;
use crate::Result;

pub const SUITE_TASKS: [&str; 5] = ["login", "address", "payment", "shopping", "flight"];
pub const SUITE_LEVELS: [usize; 4] = [1, 2, 3, 4];

struct TaskPlan {
    /// (primitive, page) in placement order; all active.
    actives: &'static [(&'static str, usize)],
    /// Passives in inclusion order; `pre` ones render before the actives.
    passives: &'static [(&'static str, usize, bool)],
    pages: usize,
}

fn plan(task: &str) -> Result<TaskPlan> {
    let plan = match task {
        "login" => TaskPlan {
            actives: &[
                ("username", 0),
                ("password", 0),
                ("captcha", 0),
                ("rememberme", 0),
                ("stayloggedin", 0),
            ],
            passives: &[
                ("header_login", 0, true),
                ("forgotpassword", 0, false),
                ("footer", 0, false),
            ],
            pages: 1,
        },
        "address" => TaskPlan {
            actives: &[
                ("firstname", 0),
                ("lastname", 0),
                ("addressline1", 0),
                ("addressline2", 0),
                ("city", 0),
                ("state", 0),
                ("zipcode", 0),
            ],
            passives: &[("header", 0, true), ("dealmedia", 0, false), ("footer", 0, false)],
            pages: 1,
        },
        "payment" => TaskPlan {
            actives: &[
                ("fullname", 0),
                ("ccnumber", 0),
                ("ccexpdate", 0),
                ("cccvv", 0),
                ("cc", 0),
            ],
            passives: &[("header", 0, true), ("next_checkout", 0, false), ("footer", 0, false)],
            pages: 1,
        },
        "flight" => TaskPlan {
            actives: &[
                ("departureairport", 0),
                ("destinationairport", 0),
                ("departuredate", 0),
                ("destinationdate", 0),
                ("numberofpeople", 0),
                ("cabin", 0),
                ("flighttype", 0),
            ],
            passives: &[("header", 0, true), ("navbar", 0, true), ("footer", 0, false)],
            pages: 1,
        },
        "shopping" => TaskPlan {
            actives: &[
                ("username", 1),
                ("password", 1),
                ("captcha", 1),
                ("rememberme", 1),
                ("stayloggedin", 1),
                ("firstname", 2),
                ("lastname", 2),
                ("addressline1", 2),
                ("addressline2", 2),
                ("city", 2),
                ("state", 2),
                ("zipcode", 2),
            ],
            passives: &[("navbar", 0, true), ("carousel", 0, true), ("deck", 0, true)],
            pages: 3,
        },
        other => return Err(crate::Error::Config(format!("unknown suite task '{other}'"))),
    };
    Ok(plan)
}

pub fn suite_design(task: &str, level: usize) -> Result<WebsiteDesign> {
    if !(1..=4).contains(&level) {
        return Err(crate::Error::Config(format!("suite level {level} out of range 1..=4")));
    }
    let plan = plan(task)?;
    let f4 = plan.actives.len();
    let fields = (level * f4).div_ceil(4);
    let distractors = level - 1;

    let mut d = WebsiteDesign::new(plan.pages);
    for (name, page, _) in plan.passives.iter().take(distractors).filter(|(_, _, pre)| *pre) {
        d = d.put(name, *page);
    }
    for (name, page) in plan.actives.iter().take(fields) {
        d = d.put(name, *page);
    }
    for (name, page, _) in plan.passives.iter().take(distractors).filter(|(_, _, pre)| !*pre) {
        d = d.put(name, *page);
    }
    Ok(d)
}

/// level → task → design, all twenty entries.
pub fn test_suite() -> BTreeMap<usize, BTreeMap<String, WebsiteDesign>> {
    let mut suite = BTreeMap::new();
    for level in SUITE_LEVELS {
        let mut tasks = BTreeMap::new();
        for task in SUITE_TASKS {
            tasks.insert(
                task.to_string(),
                suite_design(task, level).expect("suite tables are well formed"),
            );
        }
        suite.insert(level, tasks);
    }
    suite
}

/// Canonical serialized form of the whole suite; the fixture file holds
/// exactly this text.
pub fn fixture_text() -> String {
    let mut out = String::from("{\n");
    let suite = test_suite();
    let mut first_level = true;
    for (level, tasks) in &suite {
        if !first_level {
            out.push_str(",\n");
        }
        first_level = false;
        out.push_str(&format!("  \"{level}\": {{\n"));
        let mut first_task = true;
        for (task, design) in tasks {
            if !first_task {
                out.push_str(",\n");
            }
            first_task = false;
            let body = design
                .to_json()
                .lines()
                .map(|l| format!("    {l}"))
                .collect::<Vec<_>>()
                .join("\n");
            out.push_str(&format!("    \"{task}\": {}", body.trim_start()));
        }
        out.push_str("\n  }");
    }
    out.push_str("\n}\n");
    out
}
