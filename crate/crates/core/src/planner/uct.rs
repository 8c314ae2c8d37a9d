//! UCT over the simulator: UCB1 selection, one expansion per iteration,
//! uniformly random rollouts to the horizon.
//!
//! Decision nodes are keyed by a hash of the decision-relevant state, so an
//! action edge fans out into one child per distinct sampled successor.

use std::borrow::Cow;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{action_count, available_actions, nth_action, Action};
use crate::dynamics::{advance, SimState};
use crate::rng::SimRng;
use crate::scenario::{PlannerSettings, ValidatedScenario};

/// Hash of everything the dynamics and action model read.
pub fn state_key(state: &SimState) -> u64 {
    let mut h = DefaultHasher::new();
    state.step.hash(&mut h);
    state.mask_mandate_active.hash(&mut h);
    for p in &state.persons {
        p.compartment.hash(&mut h);
        p.position.hash(&mut h);
        p.masked.hash(&mut h);
        p.vaccinated.hash(&mut h);
    }
    h.finish()
}

#[derive(Debug, Clone)]
struct Edge {
    action: Action,
    visits: u64,
    total: f64,
    children: BTreeMap<u64, SearchNode>,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state_key: u64,
    pub visit_count: u64,
    pub total_return: f64,
    edges: Vec<Edge>,
    expanded: bool,
}

impl SearchNode {
    fn new(state_key: u64) -> Self {
        Self {
            state_key,
            visit_count: 0,
            total_return: 0.0,
            edges: Vec::new(),
            expanded: false,
        }
    }

    pub fn mean_return(&self) -> Option<f64> {
        (self.visit_count > 0).then(|| self.total_return / self.visit_count as f64)
    }

    /// Sum of visits over all action edges.
    pub fn child_visits(&self) -> u64 {
        self.edges.iter().map(|e| e.visits).sum()
    }

    /// Checks `visit_count >= child visits` on the whole subtree.
    pub fn visits_consistent(&self) -> bool {
        self.visit_count >= self.child_visits()
            && self.edges.iter().all(|e| {
                e.visits >= e.children.values().map(|c| c.visit_count).sum::<u64>()
                    && e.children.values().all(SearchNode::visits_consistent)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub action: Action,
    pub visits: u64,
    pub mean_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub chosen: Action,
    pub root_visits: u64,
    pub per_action: Vec<ActionStats>,
}

struct Search<'a> {
    validated: &'a ValidatedScenario,
    settings: &'a PlannerSettings,
}

impl Search<'_> {
    fn reward(&self, inf_before: usize, dead_before: usize, after: &SimState, cost: f64) -> f64 {
        self.settings.pen_i * (after.cumulative_infections - inf_before) as f64
            + self.settings.pen_d * (after.cumulative_deaths - dead_before) as f64
            + cost
    }

    fn transition(&self, state: &mut SimState, action: &Action, rng: &mut SimRng) -> f64 {
        let (inf, dead) = (state.cumulative_infections, state.cumulative_deaths);
        let cost = advance(state, action, self.validated, rng, None)
            .expect("search only takes available actions");
        self.reward(inf, dead, state, cost)
    }

    fn rollout(&self, state: &mut SimState, rng: &mut SimRng) -> f64 {
        let mut total = 0.0;
        while state.step < self.settings.horizon {
            let n = action_count(state, self.settings);
            let action = nth_action(state, self.settings, rng.random_range(0..n));
            total += self.transition(state, &action, rng);
        }
        total
    }

    fn select(&self, node: &SearchNode) -> usize {
        if let Some(untried) = node.edges.iter().position(|e| e.visits == 0) {
            return untried;
        }
        let ln_n = (node.visit_count as f64).ln();
        let c = self.settings.uct_exploration;
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, e) in node.edges.iter().enumerate() {
            let n = e.visits as f64;
            let score = e.total / n + c * (ln_n / n).sqrt();
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        best
    }

    fn simulate(&self, node: &mut SearchNode, state: &mut SimState, rng: &mut SimRng) -> f64 {
        if state.step >= self.settings.horizon {
            node.visit_count += 1;
            return 0.0;
        }
        if !node.expanded {
            node.edges = available_actions(state, self.settings)
                .into_iter()
                .map(|action| Edge {
                    action,
                    visits: 0,
                    total: 0.0,
                    children: BTreeMap::new(),
                })
                .collect();
            node.expanded = true;
        }
        let idx = self.select(node);
        let action = node.edges[idx].action;
        let r = self.transition(state, &action, rng);
        let key = state_key(state);
        let child = node.edges[idx]
            .children
            .entry(key)
            .or_insert_with(|| SearchNode::new(key));
        let rest = if child.visit_count == 0 {
            let v = self.rollout(state, rng);
            child.visit_count = 1;
            child.total_return = v;
            v
        } else {
            self.simulate(child, state, rng)
        };
        let g = r + rest;
        let edge = &mut node.edges[idx];
        edge.visits += 1;
        edge.total += g;
        node.visit_count += 1;
        node.total_return += g;
        g
    }
}

/// Runs the search and returns the root statistics.
///
/// The root action with the most visits wins; ties go to the earlier action
/// in [`available_actions`] order. With a zero budget the answer is `Noop`.
/// `rng` must be a planning stream: the environment's stream is never touched.
pub fn plan_with_report(
    state: &SimState,
    validated: &ValidatedScenario,
    settings: &PlannerSettings,
    rng: &mut SimRng,
) -> PlanReport {
    let actions = available_actions(state, settings);
    let trivial = |chosen| PlanReport {
        chosen,
        root_visits: 0,
        per_action: Vec::new(),
    };
    if settings.uct_iterations == 0 || state.step >= settings.horizon {
        return trivial(Action::Noop);
    }
    if actions.len() == 1 {
        return trivial(actions[0]);
    }

    let validated: Cow<'_, ValidatedScenario> = if validated.planner() == settings {
        Cow::Borrowed(validated)
    } else {
        Cow::Owned(
            validated
                .with_planner(settings.clone())
                .expect("planner settings already validated"),
        )
    };
    let search = Search {
        validated: &validated,
        settings,
    };
    let mut root = SearchNode::new(state_key(state));
    for _ in 0..settings.uct_iterations {
        let mut scratch = state.clone();
        search.simulate(&mut root, &mut scratch, rng);
    }
    debug_assert!(root.visits_consistent());

    let mut best = 0;
    for (i, e) in root.edges.iter().enumerate() {
        if e.visits > root.edges[best].visits {
            best = i;
        }
    }
    PlanReport {
        chosen: root.edges[best].action,
        root_visits: root.visit_count,
        per_action: root
            .edges
            .iter()
            .map(|e| ActionStats {
                action: e.action,
                visits: e.visits,
                mean_return: if e.visits > 0 {
                    e.total / e.visits as f64
                } else {
                    0.0
                },
            })
            .collect(),
    }
}

pub fn plan(
    state: &SimState,
    validated: &ValidatedScenario,
    settings: &PlannerSettings,
    rng: &mut SimRng,
) -> Action {
    plan_with_report(state, validated, settings, rng).chosen
}
