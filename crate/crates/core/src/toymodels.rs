//! Concrete qubit models: the mixed toy model on a shared `(0,1]`, its
//! segregated variants, and the uniform state-dependent model whose response
//! rows are the Born probabilities themselves.
//!
//! In the toy models a bivalent observable `A` takes the value `+1` at `λ`
//! exactly when `0 < λ ≤ P_A^ψ(+1)`. The shared space is partitioned at the
//! sorted union of every such threshold, so each response is constant on
//! every cell and reproduction is a sum of cell measures.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hvframe::{
    Cell, CellId, HVModel, HVSpace, ModelParts, ObservableId, ResponseTable, StateDensity, StateId,
    StateTag,
};
use crate::qcore::{born_probability, OutcomeSet, ProjectiveMeasurement, PureState};
use crate::TOL;

/// A bivalent qubit observable with outcomes `+1` and `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyObservable {
    pub id: ObservableId,
    pub measurement: ProjectiveMeasurement,
}

impl ToyObservable {
    pub fn new(id: impl Into<ObservableId>, measurement: ProjectiveMeasurement) -> Result<Self> {
        if measurement.dim() != 2 {
            return Err(Error::Argument(format!(
                "toy observables act on a qubit, got dimension {}",
                measurement.dim()
            )));
        }
        let labels: Vec<&str> = measurement.outcomes().iter().map(|o| o.as_str()).collect();
        if labels != ["+1", "-1"] {
            return Err(Error::Argument(format!(
                "toy observables have outcomes (+1, -1), got {labels:?}"
            )));
        }
        Ok(ToyObservable {
            id: id.into(),
            measurement,
        })
    }

    pub fn x() -> Self {
        ToyObservable {
            id: "X".into(),
            measurement: ProjectiveMeasurement::pauli_x(),
        }
    }

    pub fn y() -> Self {
        ToyObservable {
            id: "Y".into(),
            measurement: ProjectiveMeasurement::pauli_y(),
        }
    }

    pub fn z() -> Self {
        ToyObservable {
            id: "Z".into(),
            measurement: ProjectiveMeasurement::pauli_z(),
        }
    }

    pub fn paulis() -> Vec<Self> {
        vec![Self::x(), Self::y(), Self::z()]
    }

    fn up_probability(&self, state: &PureState) -> Result<f64> {
        let p = born_probability(state, &self.measurement, &OutcomeSet::singleton("+1"))?;
        Ok(p.clamp(0.0, 1.0))
    }
}

/// `|0⟩`, `|+⟩` and `(|0⟩ + i|1⟩)/√2`, keyed `zero`, `plus`, `plus_i`.
pub fn reference_states() -> Vec<(StateId, PureState)> {
    vec![
        ("zero".into(), PureState::zero()),
        ("plus".into(), PureState::plus()),
        ("plus_i".into(), PureState::plus_i()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    SharedUnitInterval,
    /// State `k` owns the interval `(k, k+1]`.
    DisjointIntervals,
    /// State `ψ` owns the unit radius in direction `ψ̂`.
    UnitCircleRays,
}

/// A half-open interval `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    fn label(&self) -> String {
        format!("({},{}]", self.lo, self.hi)
    }
}

/// Partition of `(0,1]` cut at every threshold strictly inside it.
fn unit_partition(thresholds: impl IntoIterator<Item = f64>) -> Vec<Interval> {
    let mut cuts: Vec<f64> = thresholds
        .into_iter()
        .filter(|t| *t > 0.0 && *t < 1.0)
        .collect();
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut lo = 0.0;
    cuts.into_iter()
        .map(|hi| {
            let iv = Interval { lo, hi };
            lo = hi;
            iv
        })
        .collect()
}

fn check_inputs(states: &[(StateId, PureState)], observables: &[ToyObservable]) -> Result<()> {
    for (id, s) in states {
        if s.dim() != 2 {
            return Err(Error::Argument(format!(
                "state `{id}` has dimension {}, toy models are qubit models",
                s.dim()
            )));
        }
    }
    for (i, (a, sa)) in states.iter().enumerate() {
        for (b, sb) in &states[i + 1..] {
            if a == b || sa.approx_eq(sb, TOL) {
                return Err(Error::Argument(format!(
                    "states `{a}` and `{b}` are not distinct"
                )));
            }
        }
    }
    for (i, o) in observables.iter().enumerate() {
        ToyObservable::new(o.id.clone(), o.measurement.clone())?;
        if observables[..i].iter().any(|p| p.id == o.id) {
            return Err(Error::Argument(format!(
                "observable `{}` listed twice",
                o.id
            )));
        }
    }
    Ok(())
}

fn thresholds(
    states: &[(StateId, PureState)],
    observables: &[ToyObservable],
) -> Result<Vec<Interval>> {
    let mut ts = Vec::new();
    for (_, s) in states {
        for o in observables {
            ts.push(o.up_probability(s)?);
        }
    }
    Ok(unit_partition(ts))
}

/// `[1, 0]` on cells inside `(0, threshold]`, `[0, 1]` elsewhere.
fn toy_row(iv: &Interval, threshold: f64) -> Vec<f64> {
    if iv.hi <= threshold {
        vec![1.0, 0.0]
    } else {
        vec![0.0, 1.0]
    }
}

fn observable_catalog(
    observables: &[ToyObservable],
) -> BTreeMap<ObservableId, ProjectiveMeasurement> {
    observables
        .iter()
        .map(|o| (o.id.clone(), o.measurement.clone()))
        .collect()
}

/// The mixed toy model: every state shares the hidden variables `(0,1]`
/// with a uniform density, and the responses carry the state dependence.
pub fn build_mixed_toy(
    states: &[(StateId, PureState)],
    observables: &[ToyObservable],
) -> Result<HVModel> {
    check_inputs(states, observables)?;
    let parts = thresholds(states, observables)?;
    let cells: Vec<Cell> = parts
        .iter()
        .map(|iv| Cell::new(iv.label(), iv.hi - iv.lo))
        .collect();
    let ids: Vec<CellId> = cells.iter().map(|c| c.id.clone()).collect();
    let space = HVSpace::new("(0,1]", cells)?;

    let mut responses = Vec::new();
    for (sid, s) in states {
        for o in observables {
            let t = o.up_probability(s)?;
            let rows = parts
                .iter()
                .zip(&ids)
                .map(|(iv, id)| (id.clone(), toy_row(iv, t)))
                .collect();
            responses.push(ResponseTable::new(
                o.id.clone(),
                StateTag::State(sid.clone()),
                false,
                rows,
            ));
        }
    }

    HVModel::new(ModelParts {
        space,
        states: states.iter().cloned().collect(),
        observables: observable_catalog(observables),
        densities: states
            .iter()
            .map(|(sid, _)| (sid.clone(), StateDensity::uniform_on(&ids)))
            .collect(),
        responses,
    })
}

/// The toy construction repeated on a separate copy of `(0,1]` per state.
pub fn build_segregated_toy(
    states: &[(StateId, PureState)],
    observables: &[ToyObservable],
    geometry: Geometry,
) -> Result<HVModel> {
    if geometry == Geometry::SharedUnitInterval {
        return Err(Error::Argument(
            "a shared unit interval gives the mixed toy model, not a segregated one".into(),
        ));
    }
    check_inputs(states, observables)?;
    let parts = thresholds(states, observables)?;

    let mut cells = Vec::new();
    let mut densities = BTreeMap::new();
    let mut responses = Vec::new();
    for (k, (sid, s)) in states.iter().enumerate() {
        let block: Vec<CellId> = parts
            .iter()
            .map(|iv| match geometry {
                Geometry::DisjointIntervals => CellId(format!("{k}+{}", iv.label())),
                _ => CellId(format!("ray({sid}):{}", iv.label())),
            })
            .collect();
        cells.extend(
            parts
                .iter()
                .zip(&block)
                .map(|(iv, id)| Cell::new(id.clone(), iv.hi - iv.lo)),
        );
        densities.insert(sid.clone(), StateDensity::uniform_on(&block));
        for o in observables {
            let t = o.up_probability(s)?;
            let rows = parts
                .iter()
                .zip(&block)
                .map(|(iv, id)| (id.clone(), toy_row(iv, t)))
                .collect();
            responses.push(ResponseTable::new(
                o.id.clone(),
                StateTag::State(sid.clone()),
                false,
                rows,
            ));
        }
    }
    let label = match geometry {
        Geometry::DisjointIntervals => "disjoint unit intervals",
        _ => "unit radii",
    };

    HVModel::new(ModelParts {
        space: HVSpace::new(label, cells)?,
        states: states.iter().cloned().collect(),
        observables: observable_catalog(observables),
        densities,
        responses,
    })
}

/// One shared cell of unit measure; for each state the response row is that
/// state's Born vector under `meas`.
pub fn build_uniform_state_dependent(
    observable: impl Into<ObservableId>,
    meas: &ProjectiveMeasurement,
    states: &[(StateId, PureState)],
) -> Result<HVModel> {
    let observable = observable.into();
    let cell = CellId::new("(0,1]");
    let mut responses = Vec::new();
    for (sid, s) in states {
        if s.dim() != meas.dim() {
            return Err(Error::DimensionMismatch {
                expected: meas.dim(),
                found: s.dim(),
            });
        }
        let row = meas.born_vector(s)?;
        responses.push(ResponseTable::new(
            observable.clone(),
            StateTag::State(sid.clone()),
            false,
            BTreeMap::from([(cell.clone(), row)]),
        ));
    }
    HVModel::new(ModelParts {
        space: HVSpace::new("(0,1]", vec![Cell::new(cell.clone(), 1.0)])?,
        states: states.iter().cloned().collect(),
        observables: BTreeMap::from([(observable, meas.clone())]),
        densities: states
            .iter()
            .map(|(sid, _)| (sid.clone(), StateDensity::uniform_on([&cell])))
            .collect(),
        responses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvframe::{check_born_reproduction, classify, overlap_report, Mixing};

    fn two_states() -> Vec<(StateId, PureState)> {
        vec![
            ("zero".into(), PureState::zero()),
            ("plus".into(), PureState::plus()),
        ]
    }

    #[test]
    fn plus_threshold_splits_at_one_half() {
        let m = build_mixed_toy(&two_states(), &[ToyObservable::z()]).unwrap();
        let table = m.response_table(&"plus".into(), &"Z".into()).unwrap();
        for cell in m.space().cells() {
            let up = table.row(&cell.id).unwrap()[0];
            let hi: f64 = cell
                .id
                .as_str()
                .trim_end_matches(']')
                .rsplit(',')
                .next()
                .unwrap()
                .parse()
                .unwrap();
            assert_eq!(up == 1.0, hi <= 0.5000000000000001, "cell {}", cell.id);
        }
    }

    #[test]
    fn threshold_point_three_reproduced() {
        // cos²(θ/2) = 0.3
        let a = 0.3f64.sqrt();
        let b = (1.0 - 0.3f64).sqrt();
        let s = PureState::from_real(&[a, b]).unwrap();
        let states = vec![("s".into(), s.clone())];
        let m = build_mixed_toy(&states, &[ToyObservable::z()]).unwrap();
        let p = m
            .reproduced_mass(&"s".into(), &"Z".into(), &OutcomeSet::singleton("+1"))
            .unwrap();
        let born = born_probability(
            &s,
            &ProjectiveMeasurement::pauli_z(),
            &OutcomeSet::singleton("+1"),
        )
        .unwrap();
        assert_eq!(p, born);
        assert!((p - 0.3).abs() < 1e-15);
    }

    #[test]
    fn segregated_geometries_are_disjoint() {
        for g in [Geometry::DisjointIntervals, Geometry::UnitCircleRays] {
            let m = build_segregated_toy(&two_states(), &ToyObservable::paulis(), g).unwrap();
            let r = overlap_report(&m, &"zero".into(), &"plus".into()).unwrap();
            assert_eq!(r.q_base, 0.0);
            assert_eq!(classify(&m).mixing, Mixing::Segregated);
        }
        let m = build_segregated_toy(
            &two_states(),
            &[ToyObservable::z()],
            Geometry::UnitCircleRays,
        )
        .unwrap();
        assert!(m
            .space()
            .cells()
            .iter()
            .all(|c| c.id.as_str().starts_with("ray(")));
    }

    #[test]
    fn shared_geometry_is_not_segregated() {
        assert!(build_segregated_toy(&two_states(), &[], Geometry::SharedUnitInterval).is_err());
    }

    #[test]
    fn rejects_non_qubits_and_duplicates() {
        let big = vec![("b".into(), PureState::basis(4, 0).unwrap())];
        assert!(matches!(
            build_mixed_toy(&big, &[]),
            Err(Error::Argument(_))
        ));
        let dup = vec![
            ("a".into(), PureState::zero()),
            ("b".into(), PureState::zero()),
        ];
        assert!(build_mixed_toy(&dup, &[]).is_err());
        let four = ProjectiveMeasurement::computational(4).unwrap();
        assert!(ToyObservable::new("M", four).is_err());
    }

    #[test]
    fn uniform_model_reproduces_born() {
        let z = ProjectiveMeasurement::pauli_z();
        let m = build_uniform_state_dependent("Z", &z, &two_states()).unwrap();
        for sid in ["zero", "plus"] {
            for o in ["+1", "-1"] {
                let r = check_born_reproduction(
                    &m,
                    &sid.into(),
                    &"Z".into(),
                    &OutcomeSet::singleton(o),
                )
                .unwrap();
                assert!(r <= 1e-15);
            }
        }
        let four = vec![("q".into(), PureState::basis(4, 1).unwrap())];
        assert!(matches!(
            build_uniform_state_dependent("Z", &z, &four),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
