use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::dynamics::{init_state, transition_outcomes, Census, HealthCompartment, SimState};
use crate::scenario::ValidatedScenario;

pub const MAX_PERSONS: usize = 3;
pub const MAX_WALKABLE: usize = 9;

/// Exact terminal census distribution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    pub probs: BTreeMap<Census, f64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn get(&self, census: &Census) -> f64 {
        self.probs.get(census).copied().unwrap_or(0.0)
    }

    /// `{"S,E,I,R,D": probability}`.
    pub fn to_json_map(&self) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .map(|(c, p)| (c.to_string(), *p))
            .collect()
    }
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json_map().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut probs = BTreeMap::new();
        for (key, p) in raw {
            let parts: Vec<usize> = key
                .split(',')
                .map(|x| x.trim().parse().map_err(D::Error::custom))
                .collect::<Result<_, _>>()?;
            let [s, e, i, r, d] = parts[..] else {
                return Err(D::Error::custom(format!(
                    "census key {key:?} needs 5 counts"
                )));
            };
            probs.insert(Census { s, e, i, r, d }, p);
        }
        Ok(Self { probs })
    }
}

fn guard(validated: &ValidatedScenario) -> Result<(), OracleError> {
    let n = validated.population();
    if n > MAX_PERSONS {
        return Err(OracleError::TooManyPersons {
            max: MAX_PERSONS,
            found: n,
        });
    }
    if validated.walkable() > MAX_WALKABLE {
        return Err(OracleError::TooManyTiles {
            max: MAX_WALKABLE,
            found: validated.walkable(),
        });
    }
    let p_mv = validated.params().p_mv;
    if p_mv != 0.0 {
        return Err(OracleError::MovingPersons(p_mv));
    }
    Ok(())
}

/// Exact distribution of the joint compartment vector after `horizon`
/// no-op steps. Per-person laws come from
/// [`transition_outcomes`], the same function the simulator samples from;
/// persons are conditionally independent given the start-of-step state, so
/// each step is a product over persons.
pub fn enumerate_joint(
    validated: &ValidatedScenario,
    horizon: usize,
) -> Result<BTreeMap<Vec<HealthCompartment>, f64>, OracleError> {
    guard(validated)?;
    let params = validated.params();
    let template: SimState = init_state(validated, 0);
    let start: Vec<HealthCompartment> = template.persons.iter().map(|p| p.compartment).collect();
    let mut dist = BTreeMap::from([(start, 1.0)]);

    for _ in 0..horizon {
        let mut next: BTreeMap<Vec<HealthCompartment>, f64> = BTreeMap::new();
        for (joint, p) in &dist {
            let mut state = template.clone();
            for (person, &c) in state.persons.iter_mut().zip(joint) {
                person.compartment = c;
            }
            let laws: Vec<_> = (0..joint.len())
                .map(|id| transition_outcomes(&state, id, params))
                .collect();
            let mut partial: Vec<(Vec<HealthCompartment>, f64)> = vec![(Vec::new(), *p)];
            for law in &laws {
                partial = partial
                    .into_iter()
                    .flat_map(|(prefix, q)| {
                        law.as_slice()
                            .iter()
                            .filter(|(_, w)| *w > 0.0)
                            .map(move |&(c, w)| {
                                let mut v = prefix.clone();
                                v.push(c);
                                (v, q * w)
                            })
                    })
                    .collect();
            }
            for (v, q) in partial {
                *next.entry(v).or_insert(0.0) += q;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// Exact terminal census distribution under the no-op policy.
pub fn enumerate_exact(
    validated: &ValidatedScenario,
    horizon: usize,
) -> Result<OutcomeDistribution, OracleError> {
    let mut probs = BTreeMap::new();
    for (joint, p) in enumerate_joint(validated, horizon)? {
        *probs.entry(Census::of(&joint)).or_insert(0.0) += p;
    }
    Ok(OutcomeDistribution { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, validate};

    fn load(text: &str) -> ValidatedScenario {
        validate(parse_scenario(text).unwrap()).unwrap()
    }

    fn census(s: usize, e: usize, i: usize, r: usize, d: usize) -> Census {
        Census { s, e, i, r, d }
    }

    #[test]
    fn lone_infected_one_step() {
        let v = load("[grid]\nI.\n[params]\np_mv=0\n");
        let dist = enumerate_exact(&v, 1).unwrap();
        assert!((dist.get(&census(0, 0, 1, 0, 0)) - 0.8).abs() < 1e-12);
        assert!((dist.get(&census(0, 0, 0, 1, 0)) - 0.186).abs() < 1e-12);
        assert!((dist.get(&census(0, 0, 0, 0, 1)) - 0.014).abs() < 1e-12);
    }

    #[test]
    fn adjacent_pair_one_step() {
        let v = load("[grid]\nIS\n[params]\np_mv=0\n");
        let joint = enumerate_joint(&v, 1).unwrap();
        let exposed: f64 = joint
            .iter()
            .filter(|(j, _)| j[1] == HealthCompartment::E)
            .map(|(_, p)| p)
            .sum();
        assert!((exposed - 0.78).abs() < 1e-12);
    }

    #[test]
    fn two_step_infection_chain() {
        let v = load("[grid]\nIS\n[params]\np_mv=0\n");
        let joint = enumerate_joint(&v, 2).unwrap();
        let infected: f64 = joint
            .iter()
            .filter(|(j, _)| j[1] == HealthCompartment::I)
            .map(|(_, p)| p)
            .sum();
        assert!((infected - 0.78 * 0.95).abs() < 1e-12);
    }

    #[test]
    fn recovered_are_absorbing() {
        let v = load("[grid]\nR.R\n.R.\n[params]\np_mv=0\n");
        let dist = enumerate_exact(&v, 7).unwrap();
        assert_eq!(dist.probs.len(), 1);
        assert_eq!(dist.get(&census(0, 0, 0, 3, 0)), 1.0);
    }

    #[test]
    fn sums_to_one() {
        let v = load("[grid]\nISV\n[params]\np_mv=0\n");
        for h in 0..6 {
            let dist = enumerate_exact(&v, h).unwrap();
            assert!((dist.total() - 1.0).abs() < 1e-12);
            assert!(dist.probs.keys().all(|c| c.total() == 3));
        }
    }

    #[test]
    fn guards() {
        let moving = load("[grid]\nIS\n");
        assert!(matches!(
            enumerate_exact(&moving, 1),
            Err(OracleError::MovingPersons(_))
        ));
        let crowd = load("[grid]\nISSS\n[params]\np_mv=0\n");
        assert!(matches!(
            enumerate_exact(&crowd, 1),
            Err(OracleError::TooManyPersons { .. })
        ));
        let big = load("[grid]\nIS...\n.....\n[params]\np_mv=0\n");
        assert!(matches!(
            enumerate_exact(&big, 1),
            Err(OracleError::TooManyTiles { .. })
        ));
    }

    #[test]
    fn json_keys() {
        let v = load("[grid]\nI.\n[params]\np_mv=0\n");
        let dist = enumerate_exact(&v, 1).unwrap();
        let json = serde_json::to_string(&dist).unwrap();
        assert!(json.contains("\"0,0,1,0,0\":0.8"));
        let back: OutcomeDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dist);
    }
}
