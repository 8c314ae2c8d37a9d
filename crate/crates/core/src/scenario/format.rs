//! Scenario file reader and writer.
//!
//! ```text
//! [scenario]
//! name=Small space
//! [grid]
//! #..#
//! .IS.
//! ..S.
//! #S.#
//! [params]
//! beta=0.78
//! [planner]
//! horizon=15
//! ```
//!
//! Only `[grid]` is required and sections must appear in the order above.
//! Map glyphs: `#` wall, `.` empty, `S` `E` `I` `R` a person in that
//! compartment, `V` a pre-vaccinated susceptible. Person ids follow
//! row-major scan order.

use std::fmt::Write as _;

use super::{EpiParams, GridMap, Placement, PlannerSettings, Pos, ScenarioConfig, Tile};
use crate::dynamics::HealthCompartment;
use crate::text::{self, Entry, Section};

pub use crate::text::ParseError;

const SECTION_ORDER: [&str; 4] = ["scenario", "grid", "params", "planner"];

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ParseError> {
    let sections = text::sections(text)?;
    let mut last_rank: Option<usize> = None;
    let mut name = String::new();
    let mut grid = None;
    let mut params = EpiParams::default();
    let mut planner = PlannerSettings::default();

    for section in &sections {
        let Some(rank) = SECTION_ORDER.iter().position(|&s| s == section.name) else {
            return Err(ParseError::UnknownSection {
                section: section.name.to_string(),
                line: section.line,
            });
        };
        match last_rank {
            Some(prev) if prev == rank => {
                return Err(ParseError::DuplicateSection {
                    section: section.name.to_string(),
                    line: section.line,
                })
            }
            Some(prev) if prev > rank => {
                return Err(ParseError::SectionOrder {
                    section: section.name.to_string(),
                    line: section.line,
                })
            }
            _ => last_rank = Some(rank),
        }
        match section.name {
            "scenario" => {
                for entry in text::entries(section, &[])? {
                    match entry.key {
                        "name" => name = entry.value.to_string(),
                        _ => return Err(entry.unknown("scenario")),
                    }
                }
            }
            "grid" => grid = Some(parse_grid(section)?),
            "params" => {
                for entry in text::entries(section, &[])? {
                    set_param(&mut params, &entry)?;
                }
            }
            "planner" => {
                for entry in text::entries(section, &[])? {
                    set_planner(&mut planner, &entry)?;
                }
            }
            _ => unreachable!(),
        }
    }

    let (grid, placements) = grid.ok_or(ParseError::MissingSection { section: "grid" })?;
    Ok(ScenarioConfig {
        name,
        grid,
        placements,
        params,
        planner,
    })
}

fn parse_grid(section: &Section<'_>) -> Result<(GridMap, Vec<Placement>), ParseError> {
    let mut rows: Vec<(usize, &str)> = Vec::new();
    let mut ended_at: Option<usize> = None;
    for line in &section.body {
        let row = line.text.trim_end();
        if row.is_empty() {
            if !rows.is_empty() && ended_at.is_none() {
                ended_at = Some(line.number);
            }
            continue;
        }
        if let Some(blank) = ended_at {
            return Err(ParseError::Syntax {
                line: line.number,
                column: 1,
                message: format!("grid rows must be consecutive (blank line at {blank})"),
            });
        }
        rows.push((line.number, row));
    }
    let Some(&(_, first)) = rows.first() else {
        return Err(ParseError::Syntax {
            line: section.line,
            column: 1,
            message: "empty [grid] section".into(),
        });
    };
    let width = first.chars().count();
    let mut tiles = Vec::with_capacity(width * rows.len());
    let mut placements = Vec::new();
    for (y, &(number, row)) in rows.iter().enumerate() {
        let found = row.chars().count();
        if found != width {
            return Err(ParseError::RaggedGrid {
                line: number,
                expected: width,
                found,
            });
        }
        for (x, glyph) in row.chars().enumerate() {
            let (tile, person) = match glyph {
                '#' => (Tile::Wall, None),
                '.' => (Tile::Walkable, None),
                'S' => (Tile::Walkable, Some((HealthCompartment::S, false))),
                'E' => (Tile::Walkable, Some((HealthCompartment::E, false))),
                'I' => (Tile::Walkable, Some((HealthCompartment::I, false))),
                'R' => (Tile::Walkable, Some((HealthCompartment::R, false))),
                'V' => (Tile::Walkable, Some((HealthCompartment::S, true))),
                _ => {
                    return Err(ParseError::UnknownGlyph {
                        glyph,
                        line: number,
                        column: x + 1,
                    })
                }
            };
            tiles.push(tile);
            if let Some((initial_compartment, pre_vaccinated)) = person {
                placements.push(Placement {
                    person_id: placements.len(),
                    position: Pos::new(x, y),
                    initial_compartment,
                    pre_vaccinated,
                });
            }
        }
    }
    let grid = GridMap::new(width, rows.len(), tiles).expect("rows checked rectangular");
    Ok((grid, placements))
}

pub(crate) fn set_param(p: &mut EpiParams, e: &Entry<'_>) -> Result<(), ParseError> {
    match e.key {
        "beta" => p.beta = e.probability()?,
        "sigma" => p.sigma = e.probability()?,
        "gamma" => p.gamma = e.probability()?,
        "mu" => p.mu = e.probability()?,
        "k" => {
            let k = e.real()?;
            if !(k > 0.0 && k <= 1.0) {
                return Err(e.out_of_range("must lie in (0, 1]"));
            }
            p.k = k;
        }
        "p_mv" => p.p_mv = e.probability()?,
        "infected_persistence" => p.infected_persistence = e.probability()?,
        "mask_sus_mult" => p.mask_sus_mult = e.probability()?,
        "mask_inf_mult" => p.mask_inf_mult = e.probability()?,
        "mask_noncompliance" => p.mask_noncompliance = e.probability()?,
        "vax_noncompliance" => p.vax_noncompliance = e.probability()?,
        "vax_protection" => p.vax_protection = e.probability()?,
        "exposure_radius" => p.exposure_radius = e.positive_integer()?,
        _ => return Err(e.unknown("params")),
    }
    Ok(())
}

pub(crate) fn set_planner(p: &mut PlannerSettings, e: &Entry<'_>) -> Result<(), ParseError> {
    let negative = |e: &Entry<'_>| {
        let v = e.real()?;
        if v < 0.0 {
            Ok(v)
        } else {
            Err(e.out_of_range("must be negative"))
        }
    };
    let non_positive = |e: &Entry<'_>| {
        let v = e.real()?;
        if v <= 0.0 {
            Ok(v)
        } else {
            Err(e.out_of_range("must be non-positive"))
        }
    };
    match e.key {
        "masks_available" => p.masks_available = e.boolean()?,
        "vaccines_available" => p.vaccines_available = e.boolean()?,
        "pen_i" => p.pen_i = negative(e)?,
        "pen_d" => p.pen_d = negative(e)?,
        "cost_mask_action" => p.cost_mask_action = non_positive(e)?,
        "cost_vax_action" => p.cost_vax_action = non_positive(e)?,
        "horizon" => {
            p.horizon = usize::try_from(e.integer()?).map_err(|_| e.out_of_range("too large"))?
        }
        "rounds" => p.rounds = e.positive_integer()?,
        "uct_iterations" => p.uct_iterations = e.positive_integer()?,
        "uct_exploration" => {
            let v = e.real()?;
            if v <= 0.0 {
                return Err(e.out_of_range("must be positive"));
            }
            p.uct_exploration = v;
        }
        _ => return Err(e.unknown("planner")),
    }
    Ok(())
}

fn glyph(placement: Option<&Placement>, tile: Tile) -> char {
    match (tile, placement) {
        (Tile::Wall, _) => '#',
        (Tile::Walkable, None) => '.',
        (Tile::Walkable, Some(p)) => match (p.initial_compartment, p.pre_vaccinated) {
            (HealthCompartment::S, true) => 'V',
            (HealthCompartment::S, false) => 'S',
            (HealthCompartment::E, _) => 'E',
            (HealthCompartment::I, _) => 'I',
            (HealthCompartment::R, _) => 'R',
            (HealthCompartment::D, _) => unreachable!("validated configs never start dead"),
        },
    }
}

/// Writes every section and every key explicitly, in canonical order.
pub fn serialize_scenario(config: &ScenarioConfig) -> String {
    let grid = &config.grid;
    let mut by_tile: Vec<Option<&Placement>> = vec![None; grid.total_tiles()];
    for p in &config.placements {
        by_tile[grid.index(p.position)] = Some(p);
    }

    let mut out = String::new();
    out.push_str("[scenario]\n");
    let _ = writeln!(out, "name={}", config.name);

    out.push_str("\n[grid]\n");
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            let i = grid.index(Pos::new(x, y));
            out.push(glyph(by_tile[i], grid.tiles()[i]));
        }
        out.push('\n');
    }

    let p = &config.params;
    out.push_str("\n[params]\n");
    for (key, value) in p.probabilities() {
        let _ = writeln!(out, "{key}={value}");
    }
    let _ = writeln!(out, "exposure_radius={}", p.exposure_radius);

    let s = &config.planner;
    out.push_str("\n[planner]\n");
    let _ = writeln!(out, "masks_available={}", s.masks_available);
    let _ = writeln!(out, "vaccines_available={}", s.vaccines_available);
    let _ = writeln!(out, "pen_i={}", s.pen_i);
    let _ = writeln!(out, "pen_d={}", s.pen_d);
    let _ = writeln!(out, "cost_mask_action={}", s.cost_mask_action);
    let _ = writeln!(out, "cost_vax_action={}", s.cost_vax_action);
    let _ = writeln!(out, "horizon={}", s.horizon);
    let _ = writeln!(out, "rounds={}", s.rounds);
    let _ = writeln!(out, "uct_iterations={}", s.uct_iterations);
    let _ = writeln!(out, "uct_exploration={}", s.uct_exploration);
    out
}
