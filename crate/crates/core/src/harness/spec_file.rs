//! Experiment and school benchmark files.
//!
//! Both use the sectioned `key=value` syntax of scenario files. Each
//! `[experiment]` or `[school]` section is followed by the `[variation]`
//! sections that belong to it:
//!
//! ```text
//! [experiment]
//! name=Small space
//! scenario=../scenarios/small_space.scn   # relative to this file
//! runs=6
//!
//! [variation]
//! label=No NPI
//! masks=false
//! vaccines=false
//! ```
//!
//! A `[school]` section takes `name`, `enrollment`, `per_room`, `grid_x`,
//! `grid_y` and `true_pos_pct`, plus any `[params]` or `[planner]` key.

use std::path::{Path, PathBuf};

use super::{ExperimentSpec, HarnessError, SchoolBenchmarkSpec, Variation, DEFAULT_SEED};
use crate::scenario::{
    parse_scenario, set_param, set_planner, EpiParams, ParseError, PlannerSettings,
};
use crate::text::{entries, sections, Entry, Section};

/// Experiment file contents with scenario paths still unresolved.
struct Draft<T> {
    head: T,
    variations: Vec<Variation>,
    line: usize,
}

fn group<'a, T>(
    text: &'a str,
    head_name: &'static str,
    mut head: impl FnMut(&Section<'a>) -> Result<T, ParseError>,
) -> Result<Vec<Draft<T>>, ParseError> {
    let mut out: Vec<Draft<T>> = Vec::new();
    for section in sections(text)? {
        match section.name {
            n if n == head_name => out.push(Draft {
                head: head(&section)?,
                variations: Vec::new(),
                line: section.line,
            }),
            "variation" => {
                let Some(current) = out.last_mut() else {
                    return Err(ParseError::SectionOrder {
                        section: "variation".into(),
                        line: section.line,
                    });
                };
                current.variations.push(variation(&section)?);
            }
            other => {
                return Err(ParseError::UnknownSection {
                    section: other.to_string(),
                    line: section.line,
                })
            }
        }
    }
    if out.is_empty() {
        return Err(ParseError::MissingSection { section: head_name });
    }
    Ok(out)
}

fn variation(section: &Section<'_>) -> Result<Variation, ParseError> {
    let mut label = None;
    let mut masks = false;
    let mut vaccines = false;
    for e in entries(section, &[])? {
        match e.key {
            "label" => label = Some(e.value.to_string()),
            "masks" => masks = e.boolean()?,
            "vaccines" => vaccines = e.boolean()?,
            _ => return Err(e.unknown("variation")),
        }
    }
    Ok(Variation {
        label: label.ok_or_else(|| missing_key("label", section))?,
        masks,
        vaccines,
    })
}

fn missing_key(key: &str, section: &Section<'_>) -> ParseError {
    ParseError::Syntax {
        line: section.line,
        column: 1,
        message: format!("[{}] is missing `{key}`", section.name),
    }
}

fn usize_of(e: &Entry<'_>) -> Result<usize, ParseError> {
    usize::try_from(e.integer()?).map_err(|_| e.out_of_range("too large"))
}

struct ExperimentHead {
    name: String,
    scenario: String,
    runs: usize,
    seed: Option<u64>,
    horizon: Option<usize>,
    rounds: Option<usize>,
}

fn experiment_head(section: &Section<'_>) -> Result<ExperimentHead, ParseError> {
    let (mut name, mut scenario) = (None, None);
    let mut head = ExperimentHead {
        name: String::new(),
        scenario: String::new(),
        runs: 1,
        seed: None,
        horizon: None,
        rounds: None,
    };
    for e in entries(section, &[])? {
        match e.key {
            "name" => name = Some(e.value.to_string()),
            "scenario" => scenario = Some(e.value.to_string()),
            "runs" => head.runs = e.positive_integer()?,
            "seed" => head.seed = Some(e.integer()?),
            "horizon" => head.horizon = Some(usize_of(&e)?),
            "rounds" => head.rounds = Some(e.positive_integer()?),
            _ => return Err(e.unknown("experiment")),
        }
    }
    head.name = name.ok_or_else(|| missing_key("name", section))?;
    head.scenario = scenario.ok_or_else(|| missing_key("scenario", section))?;
    Ok(head)
}

/// Parses an experiment file. `base` is the directory scenario paths are
/// relative to.
pub fn parse_experiments(text: &str, base: &Path) -> Result<Vec<ExperimentSpec>, HarnessError> {
    let origin = base.display().to_string();
    let drafts =
        group(text, "experiment", experiment_head).map_err(|source| HarnessError::Parse {
            path: origin.clone(),
            source,
        })?;
    drafts
        .into_iter()
        .map(|d| {
            if d.variations.is_empty() {
                return Err(HarnessError::Spec {
                    path: origin.clone(),
                    message: format!("experiment at line {} has no [variation]", d.line),
                });
            }
            let path: PathBuf = base.join(&d.head.scenario);
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&shown, e))?;
            let scenario = parse_scenario(&text).map_err(|source| HarnessError::Parse {
                path: shown,
                source,
            })?;
            Ok(ExperimentSpec {
                name: d.head.name,
                scenario,
                variations: d.variations,
                runs: d.head.runs,
                seed: d.head.seed.unwrap_or(DEFAULT_SEED),
                horizon: d.head.horizon,
                rounds: d.head.rounds,
            })
        })
        .collect()
}

pub fn load_experiments(path: &Path) -> Result<Vec<ExperimentSpec>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::io(path.display().to_string(), e))?;
    parse_experiments(&text, path.parent().unwrap_or(Path::new(".")))
}

fn school_head(section: &Section<'_>) -> Result<SchoolBenchmarkSpec, ParseError> {
    let mut name = None;
    let mut fields: [Option<usize>; 4] = [None; 4];
    let mut true_pos = None;
    let mut params = EpiParams::default();
    let mut planner = PlannerSettings::default();
    for e in entries(section, &[])? {
        match e.key {
            "name" => name = Some(e.value.to_string()),
            "enrollment" => fields[0] = Some(e.positive_integer()?),
            "per_room" => fields[1] = Some(e.positive_integer()?),
            "grid_x" => fields[2] = Some(e.positive_integer()?),
            "grid_y" => fields[3] = Some(e.positive_integer()?),
            "true_pos_pct" => {
                let v = e.real()?;
                if !(0.0..=100.0).contains(&v) {
                    return Err(e.out_of_range("must lie in [0, 100]"));
                }
                true_pos = Some(v);
            }
            _ => match set_param(&mut params, &e) {
                Err(ParseError::UnknownKey { .. }) => match set_planner(&mut planner, &e) {
                    Err(ParseError::UnknownKey { .. }) => return Err(e.unknown("school")),
                    other => other?,
                },
                other => other?,
            },
        }
    }
    let keys = ["enrollment", "per_room", "grid_x", "grid_y"];
    let mut values = [0usize; 4];
    for (slot, (value, key)) in values.iter_mut().zip(fields.iter().zip(keys)) {
        *slot = value.ok_or_else(|| missing_key(key, section))?;
    }
    let [enrollment, per_room, grid_x, grid_y] = values;
    if per_room > grid_x * grid_y {
        return Err(ParseError::OutOfRange {
            key: "per_room".into(),
            line: section.line,
            reason: "exceeds the number of classroom tiles",
        });
    }
    Ok(SchoolBenchmarkSpec {
        name: name.ok_or_else(|| missing_key("name", section))?,
        enrollment,
        per_room,
        grid_x,
        grid_y,
        true_pos_pct: true_pos.ok_or_else(|| missing_key("true_pos_pct", section))?,
        variations: Vec::new(),
        params,
        planner,
    })
}

pub fn parse_schools(text: &str, origin: &str) -> Result<Vec<SchoolBenchmarkSpec>, HarnessError> {
    let drafts = group(text, "school", school_head).map_err(|source| HarnessError::Parse {
        path: origin.to_string(),
        source,
    })?;
    drafts
        .into_iter()
        .map(|d| {
            if d.variations.is_empty() {
                return Err(HarnessError::Spec {
                    path: origin.to_string(),
                    message: format!("school at line {} has no [variation]", d.line),
                });
            }
            Ok(SchoolBenchmarkSpec {
                variations: d.variations,
                ..d.head
            })
        })
        .collect()
}

pub fn load_schools(path: &Path) -> Result<Vec<SchoolBenchmarkSpec>, HarnessError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(&shown, e))?;
    parse_schools(&text, &shown)
}
