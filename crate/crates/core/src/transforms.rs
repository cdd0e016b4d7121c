//! Renaming transforms between mixed and segregated models, and the auditor
//! that certifies two models return the same statistics.
//!
//! [`segregate`] renames every cell `λ` in the support of `ψ` as the pair
//! `(λ, ψ)`. The renamed spaces of distinct states are disjoint, and every
//! audited probability is the same finite sum over renamed indices.
//!
//! [`mix`] goes the other way: it lays the per-state blocks of a segregated
//! model side by side, refines them to a common partition by relative
//! measure, and identifies the `k`-th cell of every block with one shared
//! cell `c{k}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hvframe::{
    classify, Cell, CellId, HVModel, HVSpace, Mixing, ModelParts, ObservableId, ResponseSet,
    ResponseTable, StateDensity, StateId, StateTag,
};
use crate::qcore::OutcomeSet;

/// Renames each `λ ∈ supp(p_ψ)` as `(λ, ψ)`.
pub fn segregate(model: &HVModel) -> Result<HVModel> {
    let mut cells = Vec::new();
    let mut densities = BTreeMap::new();
    let mut renamed: BTreeMap<&StateId, Vec<(CellId, CellId)>> = BTreeMap::new();
    for (sid, density) in model.densities() {
        let mut block = Vec::new();
        let mut weights = BTreeMap::new();
        for cell in model.space().cells() {
            let w = density.weight(&cell.id);
            if w > 0.0 {
                let pair = CellId(format!("({},{sid})", cell.id));
                cells.push(Cell::new(pair.clone(), cell.measure));
                weights.insert(pair.clone(), w);
                block.push((cell.id.clone(), pair));
            }
        }
        densities.insert(sid.clone(), StateDensity::new(weights));
        renamed.insert(sid, block);
    }

    let rename_rows = |table: &ResponseTable,
                       blocks: &mut dyn Iterator<Item = &(CellId, CellId)>| {
        blocks
            .filter_map(|(old, new)| table.row(old).map(|r| (new.clone(), r.to_vec())))
            .collect::<BTreeMap<_, _>>()
    };

    let mut responses = Vec::new();
    for set in model.responses().values() {
        match set {
            ResponseSet::Independent(t) => {
                let rows = rename_rows(t, &mut renamed.values().flatten());
                responses.push(ResponseTable { rows, ..t.clone() });
            }
            ResponseSet::PerState(map) => {
                for (sid, t) in map {
                    let block = renamed.get(sid).map(Vec::as_slice).unwrap_or(&[]);
                    let rows = rename_rows(t, &mut block.iter());
                    responses.push(ResponseTable { rows, ..t.clone() });
                }
            }
        }
    }

    HVModel::new(ModelParts {
        space: HVSpace::new(format!("segregated {}", model.space().label()), cells)?,
        states: model.states().clone(),
        observables: model.observables().clone(),
        densities,
        responses,
    })
}

/// One state's block of a segregated model: its support cells in order.
struct Block<'a> {
    state: &'a StateId,
    cells: Vec<&'a Cell>,
    weights: Vec<f64>,
}

impl Block<'_> {
    fn measures(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.measure).collect()
    }

    fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }
}

/// Shared partition of a mix: per shared cell, its measure and, for every
/// block, the index of the source cell it is identified with.
struct Alignment {
    measures: Vec<f64>,
    sources: Vec<Vec<usize>>,
    /// Per block, the factor turning a source weight into a shared weight.
    scale: Vec<f64>,
}

fn align(blocks: &[Block<'_>]) -> Result<Alignment> {
    let first = blocks[0].measures();
    if blocks.iter().all(|b| b.measures() == first) {
        return Ok(Alignment {
            sources: (0..first.len()).map(|k| vec![k; blocks.len()]).collect(),
            measures: first,
            scale: vec![1.0; blocks.len()],
        });
    }

    // Common refinement by relative measure within each block.
    let mut bounds: Vec<Vec<f64>> = Vec::with_capacity(blocks.len());
    for b in blocks {
        let total = b.total();
        if total <= 0.0 {
            return Err(Error::Precondition(format!(
                "block of `{}` has zero measure and cannot be aligned",
                b.state
            )));
        }
        let mut acc = 0.0;
        let mut ends = Vec::with_capacity(b.cells.len());
        for c in &b.cells {
            acc += c.measure;
            ends.push(acc / total);
        }
        *ends.last_mut().expect("nonempty block") = 1.0;
        bounds.push(ends);
    }
    let mut cuts: Vec<f64> = bounds.iter().flatten().copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut measures = Vec::new();
    let mut sources = Vec::new();
    let mut lo = 0.0;
    for hi in cuts {
        if hi > lo {
            let mid = 0.5 * (lo + hi);
            let src = bounds
                .iter()
                .map(|ends| ends.partition_point(|&e| e < mid).min(ends.len() - 1))
                .collect();
            measures.push(hi - lo);
            sources.push(src);
        }
        lo = hi;
    }
    Ok(Alignment {
        measures,
        sources,
        scale: blocks.iter().map(Block::total).collect(),
    })
}

/// Identifies the per-state blocks of a segregated model with one shared
/// space.
pub fn mix(model: &HVModel) -> Result<HVModel> {
    if classify(model).mixing != Mixing::Segregated {
        return Err(Error::Precondition(
            "mix expects a segregated model; some supports overlap".into(),
        ));
    }
    let blocks: Vec<Block<'_>> = model
        .densities()
        .iter()
        .map(|(sid, d)| {
            let cells: Vec<&Cell> = model
                .space()
                .cells()
                .iter()
                .filter(|c| d.in_support(&c.id))
                .collect();
            let weights = cells.iter().map(|c| d.weight(&c.id)).collect();
            Block {
                state: sid,
                cells,
                weights,
            }
        })
        .collect();
    if blocks.is_empty() {
        return Err(Error::Precondition("model has no prepared states".into()));
    }
    let alignment = align(&blocks)?;
    let shared: Vec<CellId> = (0..alignment.measures.len())
        .map(|k| CellId(format!("c{k}")))
        .collect();

    let cells = shared
        .iter()
        .zip(&alignment.measures)
        .map(|(id, &m)| Cell::new(id.clone(), m))
        .collect();
    let densities = blocks
        .iter()
        .enumerate()
        .map(|(bi, b)| {
            let weights = shared
                .iter()
                .zip(&alignment.sources)
                .map(|(id, src)| (id.clone(), b.weights[src[bi]] * alignment.scale[bi]))
                .collect();
            (b.state.clone(), StateDensity::new(weights))
        })
        .collect();

    // Image of a table under block `bi`: shared cell k gets the row of the
    // block cell it was identified with.
    let image = |t: &ResponseTable, bi: usize| -> BTreeMap<CellId, Vec<f64>> {
        shared
            .iter()
            .zip(&alignment.sources)
            .filter_map(|(id, src)| {
                t.row(&blocks[bi].cells[src[bi]].id)
                    .map(|r| (id.clone(), r.to_vec()))
            })
            .collect()
    };
    let block_of = |sid: &StateId| blocks.iter().position(|b| b.state == sid);

    let mut responses = Vec::new();
    for (obs, set) in model.responses() {
        match set {
            ResponseSet::Independent(t) => {
                let images: Vec<_> = (0..blocks.len()).map(|bi| image(t, bi)).collect();
                if images.windows(2).all(|w| w[0] == w[1]) {
                    let rows = images.into_iter().next().unwrap_or_default();
                    responses.push(ResponseTable { rows, ..t.clone() });
                } else {
                    for (b, rows) in blocks.iter().zip(images) {
                        responses.push(retag(t, obs, b.state, rows));
                    }
                }
            }
            ResponseSet::PerState(map) => {
                for (sid, t) in map {
                    let rows = block_of(sid).map(|bi| image(t, bi)).unwrap_or_default();
                    responses.push(ResponseTable { rows, ..t.clone() });
                }
            }
        }
    }

    HVModel::new(ModelParts {
        space: HVSpace::new(format!("mixed {}", model.space().label()), cells)?,
        states: model.states().clone(),
        observables: model.observables().clone(),
        densities,
        responses,
    })
}

fn retag(
    t: &ResponseTable,
    obs: &ObservableId,
    state: &StateId,
    rows: BTreeMap<CellId, Vec<f64>>,
) -> ResponseTable {
    ResponseTable {
        observable: obs.clone(),
        state_tag: StateTag::State(state.clone()),
        rows,
        ..t.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub state: StateId,
    pub observable: ObservableId,
    pub outcomes: OutcomeSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSuite {
    pub triples: Vec<Triple>,
    #[serde(default)]
    pub tolerance: f64,
}

impl EquivalenceSuite {
    /// Every (prepared state, observable, singleton outcome) for which the
    /// model has a governing response table. Tolerance 0.
    pub fn full(model: &HVModel) -> Self {
        let mut triples = Vec::new();
        for (obs, meas) in model.observables() {
            for sid in model.prepared_states() {
                if model.response_table(sid, obs).is_err() {
                    continue;
                }
                for o in meas.outcomes() {
                    triples.push(Triple {
                        state: sid.clone(),
                        observable: obs.clone(),
                        outcomes: OutcomeSet::singleton(o.clone()),
                    });
                }
            }
        }
        EquivalenceSuite {
            triples,
            tolerance: 0.0,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceEntry {
    pub triple: Triple,
    pub in_a: f64,
    pub in_b: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub entries: Vec<EquivalenceEntry>,
    pub max_delta: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Audits every triple in both models (plain reproduction or, for augmented
/// tables, conditional reproduction) and compares.
pub fn assert_equivalent(
    a: &HVModel,
    b: &HVModel,
    suite: &EquivalenceSuite,
) -> Result<EquivalenceReport> {
    let mut entries = Vec::with_capacity(suite.triples.len());
    let mut max_delta: f64 = 0.0;
    for t in &suite.triples {
        let eval = |m: &HVModel, which: &str| {
            m.audited_probability(&t.state, &t.observable, &t.outcomes)
                .map_err(|e| {
                    Error::Lookup(format!(
                        "triple ({}, {}, {}) in model {which}: {e}",
                        t.state, t.observable, t.outcomes
                    ))
                })
        };
        let in_a = eval(a, "a")?;
        let in_b = eval(b, "b")?;
        let delta = (in_a - in_b).abs();
        max_delta = max_delta.max(delta);
        entries.push(EquivalenceEntry {
            triple: t.clone(),
            in_a,
            in_b,
            delta,
        });
    }
    Ok(EquivalenceReport {
        entries,
        max_delta,
        tolerance: suite.tolerance,
        pass: max_delta <= suite.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvframe::{overlap_report, Dependence};
    use crate::qcore::PureState;
    use crate::toymodels::{
        build_mixed_toy, build_segregated_toy, reference_states, Geometry, ToyObservable,
    };

    fn toy() -> HVModel {
        build_mixed_toy(&reference_states(), &ToyObservable::paulis()).unwrap()
    }

    #[test]
    fn segregated_output_has_disjoint_supports() {
        let s = segregate(&toy()).unwrap();
        let ids: Vec<_> = s.prepared_states().cloned().collect();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                assert_eq!(overlap_report(&s, a, b).unwrap().q_base, 0.0);
            }
        }
        assert!(s
            .space()
            .cells()
            .iter()
            .all(|c| c.id.as_str().ends_with(")")));
    }

    #[test]
    fn segregate_is_idempotent_on_statistics() {
        let seg = build_segregated_toy(
            &reference_states(),
            &ToyObservable::paulis(),
            Geometry::DisjointIntervals,
        )
        .unwrap();
        let again = segregate(&seg).unwrap();
        assert_eq!(classify(&again).mixing, Mixing::Segregated);
        let r = assert_equivalent(&seg, &again, &EquivalenceSuite::full(&seg)).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_delta, 0.0);
    }

    #[test]
    fn mix_rejects_mixed_input() {
        assert!(matches!(mix(&toy()), Err(Error::Precondition(_))));
    }

    #[test]
    fn mix_refines_unequal_blocks() {
        // Blocks with different cut points: (0.5, 0.5) and (0.25, 0.75).
        let cells = vec![
            Cell::new("a1", 0.5),
            Cell::new("a2", 0.5),
            Cell::new("b1", 0.25),
            Cell::new("b2", 0.75),
        ];
        let parts = ModelParts {
            space: HVSpace::new("two blocks", cells).unwrap(),
            states: BTreeMap::from([
                ("zero".into(), PureState::zero()),
                ("plus".into(), PureState::plus()),
            ]),
            observables: BTreeMap::from([(
                "Z".into(),
                crate::qcore::ProjectiveMeasurement::pauli_z(),
            )]),
            densities: BTreeMap::from([
                (
                    "zero".into(),
                    StateDensity::new(BTreeMap::from([("a1".into(), 1.0), ("a2".into(), 1.0)])),
                ),
                (
                    "plus".into(),
                    StateDensity::new(BTreeMap::from([
                        ("b1".into(), 2.0),
                        ("b2".into(), 2.0 / 3.0),
                    ])),
                ),
            ]),
            responses: vec![ResponseTable::new(
                "Z",
                StateTag::Any,
                false,
                BTreeMap::from([
                    ("a1".into(), vec![1.0, 0.0]),
                    ("a2".into(), vec![1.0, 0.0]),
                    ("b1".into(), vec![1.0, 0.0]),
                    ("b2".into(), vec![0.0, 1.0]),
                ]),
            )],
        };
        let seg = HVModel::new(parts).unwrap();
        let mixed = mix(&seg).unwrap();
        assert_eq!(mixed.space().len(), 3);
        assert_eq!(classify(&mixed).mixing, Mixing::Mixed);
        // Images differ on the last two shared cells, so ANY becomes per-state.
        assert_eq!(classify(&mixed).dependence, Dependence::StateDependent);
        let r = assert_equivalent(
            &seg,
            &mixed,
            &EquivalenceSuite::full(&seg).with_tolerance(1e-12),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn independent_table_survives_when_images_agree() {
        let cells = vec![Cell::new("a", 1.0), Cell::new("b", 1.0)];
        let parts = ModelParts {
            space: HVSpace::new("two", cells).unwrap(),
            states: BTreeMap::from([
                ("zero".into(), PureState::zero()),
                ("one".into(), PureState::one()),
            ]),
            observables: BTreeMap::from([(
                "Z".into(),
                crate::qcore::ProjectiveMeasurement::pauli_z(),
            )]),
            densities: BTreeMap::from([
                ("zero".into(), StateDensity::uniform_on([&CellId::new("a")])),
                ("one".into(), StateDensity::uniform_on([&CellId::new("b")])),
            ]),
            responses: vec![ResponseTable::new(
                "Z",
                StateTag::Any,
                true,
                BTreeMap::from([
                    ("a".into(), vec![0.5, 0.5, 0.0]),
                    ("b".into(), vec![0.5, 0.5, 0.0]),
                ]),
            )],
        };
        let seg = HVModel::new(parts).unwrap();
        let mixed = mix(&seg).unwrap();
        assert_eq!(classify(&mixed).dependence, Dependence::StateIndependent);
    }

    #[test]
    fn missing_triple_is_reported() {
        let m = toy();
        let suite = EquivalenceSuite {
            triples: vec![Triple {
                state: "nobody".into(),
                observable: "Z".into(),
                outcomes: OutcomeSet::singleton("+1"),
            }],
            tolerance: 0.0,
        };
        let err = assert_equivalent(&m, &m, &suite).unwrap_err();
        assert!(err.to_string().contains("nobody"));
    }
}
