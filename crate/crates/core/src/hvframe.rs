//! Hidden-variables models over finite measurable partitions.
//!
//! A hidden-variable space is a finite list of cells, each carrying a base
//! measure. Every model in this crate is piecewise constant over its cells,
//! so the integrals that define Born reproduction become finite sums:
//!
//! ```text
//! P(s | ψ) = Σ_c R(s, c) · p_ψ(c) · μ(c)
//! ```
//!
//! Response tables are either tagged with one state (state-dependent) or
//! with `ANY` (state-independent). That tag is the only place where state
//! dependence is recorded. An augmented table carries one extra column for
//! the null outcome [`NO_SHOW`](crate::qcore::NO_SHOW).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{born_probability, OutcomeSet, ProjectiveMeasurement, PureState};
use crate::TOL;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

id_type!(
    /// Identifier of one cell of a hidden-variable partition.
    CellId
);
id_type!(StateId);
id_type!(ObservableId);

/// Tag string that marks a state-independent response table.
pub const ANY_TAG: &str = "ANY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub measure: f64,
}

impl Cell {
    pub fn new(id: impl Into<CellId>, measure: f64) -> Self {
        Cell {
            id: id.into(),
            measure,
        }
    }
}

/// A finite measurable partition. Cell order is significant: every sum in
/// the crate runs over cells in this order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct HVSpace {
    label: String,
    cells: Vec<Cell>,
    index: HashMap<CellId, usize>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    label: String,
    cells: Vec<Cell>,
}

impl TryFrom<SpaceRepr> for HVSpace {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        HVSpace::new(r.label, r.cells)
    }
}

impl From<HVSpace> for SpaceRepr {
    fn from(s: HVSpace) -> Self {
        SpaceRepr {
            label: s.label,
            cells: s.cells,
        }
    }
}

impl PartialEq for HVSpace {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.cells == other.cells
    }
}

impl HVSpace {
    pub fn new(label: impl Into<String>, cells: Vec<Cell>) -> Result<Self> {
        let mut index = HashMap::with_capacity(cells.len());
        for (i, c) in cells.iter().enumerate() {
            if !(c.measure.is_finite() && c.measure >= 0.0) {
                return Err(Error::invariant(
                    "nonnegative cell measure",
                    format!("cell `{}`", c.id),
                    format!("measure {}", c.measure),
                ));
            }
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::invariant(
                    "distinct cell ids",
                    format!("cell `{}`", c.id),
                    "duplicate id",
                ));
            }
        }
        let space = HVSpace {
            label: label.into(),
            cells,
            index,
        };
        if space.total_measure() <= 0.0 {
            return Err(Error::invariant(
                "positive total measure",
                "space",
                "the space has no measure",
            ));
        }
        Ok(space)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, id: &CellId) -> bool {
        self.index.contains_key(id)
    }

    pub fn position(&self, id: &CellId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn measure(&self, id: &CellId) -> Option<f64> {
        self.position(id).map(|i| self.cells[i].measure)
    }

    pub fn total_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }
}

/// Piecewise-constant density over a space; cells absent from the map have
/// weight zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateDensity {
    pub weights: BTreeMap<CellId, f64>,
}

impl StateDensity {
    pub fn new(weights: BTreeMap<CellId, f64>) -> Self {
        StateDensity { weights }
    }

    /// Weight 1 on every listed cell.
    pub fn uniform_on<'a>(cells: impl IntoIterator<Item = &'a CellId>) -> Self {
        StateDensity {
            weights: cells.into_iter().map(|c| (c.clone(), 1.0)).collect(),
        }
    }

    pub fn weight(&self, cell: &CellId) -> f64 {
        self.weights.get(cell).copied().unwrap_or(0.0)
    }

    pub fn in_support(&self, cell: &CellId) -> bool {
        self.weight(cell) > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateTag {
    Any,
    State(StateId),
}

impl Serialize for StateTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StateTag::Any => s.serialize_str(ANY_TAG),
            StateTag::State(id) => s.serialize_str(id.as_str()),
        }
    }
}

impl<'de> Deserialize<'de> for StateTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == ANY_TAG {
            StateTag::Any
        } else {
            StateTag::State(StateId(s))
        })
    }
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateTag::Any => f.write_str(ANY_TAG),
            StateTag::State(id) => write!(f, "{id}"),
        }
    }
}

/// Response function of one observable, tabulated per cell.
///
/// Each row lists the probability of every outcome in the measurement's
/// outcome order, followed by the null-outcome probability when `augmented`.
/// Rows need only exist on cells that some audited density charges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub observable: ObservableId,
    pub state_tag: StateTag,
    #[serde(default)]
    pub augmented: bool,
    /// Rows may sum to less than one. Only used for the tables forced by the
    /// zero-probability constraints of an antidistinguishing measurement,
    /// whose failure of outcome totality is the point of the exercise.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub relaxed_totality: bool,
    pub rows: BTreeMap<CellId, Vec<f64>>,
}

impl ResponseTable {
    pub fn new(
        observable: impl Into<ObservableId>,
        state_tag: StateTag,
        augmented: bool,
        rows: BTreeMap<CellId, Vec<f64>>,
    ) -> Self {
        ResponseTable {
            observable: observable.into(),
            state_tag,
            augmented,
            relaxed_totality: false,
            rows,
        }
    }

    pub fn row(&self, cell: &CellId) -> Option<&[f64]> {
        self.rows.get(cell).map(Vec::as_slice)
    }

    pub fn is_deterministic(&self) -> bool {
        self.rows
            .values()
            .flatten()
            .all(|&v| v.abs() <= TOL || (v - 1.0).abs() <= TOL)
    }

    /// Null-outcome weight at `cell` (zero for non-augmented tables).
    pub fn no_show(&self, cell: &CellId) -> Option<f64> {
        let row = self.row(cell)?;
        Some(if self.augmented {
            row[row.len() - 1]
        } else {
            0.0
        })
    }

    fn validate(&self, meas: &ProjectiveMeasurement, space: &HVSpace) -> Result<()> {
        let width = meas.outcomes().len() + usize::from(self.augmented);
        let loc = |c: &CellId| {
            format!(
                "observable `{}`, table `{}`, cell `{c}`",
                self.observable, self.state_tag
            )
        };
        for (cell, row) in &self.rows {
            if !space.contains(cell) {
                return Err(Error::invariant(
                    "rows indexed by space cells",
                    loc(cell),
                    "unknown cell",
                ));
            }
            if row.len() != width {
                return Err(Error::invariant(
                    "row width matches spectrum",
                    loc(cell),
                    format!("{} entries, expected {width}", row.len()),
                ));
            }
            if let Some(v) = row
                .iter()
                .find(|v| !(v.is_finite() && **v >= -TOL && **v <= 1.0 + TOL))
            {
                return Err(Error::invariant(
                    "response entries in [0,1]",
                    loc(cell),
                    format!("entry {v}"),
                ));
            }
            let sum: f64 = row.iter().sum();
            let ok = if self.relaxed_totality {
                sum <= 1.0 + TOL
            } else {
                (sum - 1.0).abs() <= TOL
            };
            if !ok {
                let invariant = if self.augmented {
                    "row sums to 1 over the augmented spectrum"
                } else {
                    "row sums to 1 over the spectrum"
                };
                return Err(Error::invariant(
                    invariant,
                    loc(cell),
                    format!("row sums to {sum}"),
                ));
            }
        }
        Ok(())
    }
}

/// Response tables of one observable: one `ANY` table or one per state.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSet {
    Independent(ResponseTable),
    PerState(BTreeMap<StateId, ResponseTable>),
}

impl ResponseSet {
    pub fn tables(&self) -> Box<dyn Iterator<Item = &ResponseTable> + '_> {
        match self {
            ResponseSet::Independent(t) => Box::new(std::iter::once(t)),
            ResponseSet::PerState(m) => Box::new(m.values()),
        }
    }
}

/// Serializable form of a model; also the on-disk model file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParts {
    pub space: HVSpace,
    pub states: BTreeMap<StateId, PureState>,
    #[serde(default)]
    pub observables: BTreeMap<ObservableId, ProjectiveMeasurement>,
    pub densities: BTreeMap<StateId, StateDensity>,
    #[serde(default)]
    pub responses: Vec<ResponseTable>,
}

/// A validated hidden-variables model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelParts", into = "ModelParts")]
pub struct HVModel {
    space: HVSpace,
    states: BTreeMap<StateId, PureState>,
    observables: BTreeMap<ObservableId, ProjectiveMeasurement>,
    densities: BTreeMap<StateId, StateDensity>,
    responses: BTreeMap<ObservableId, ResponseSet>,
}

impl TryFrom<ModelParts> for HVModel {
    type Error = Error;

    fn try_from(p: ModelParts) -> Result<Self> {
        HVModel::new(p)
    }
}

impl From<HVModel> for ModelParts {
    fn from(m: HVModel) -> Self {
        let responses = m
            .responses
            .into_values()
            .flat_map(|set| match set {
                ResponseSet::Independent(t) => vec![t],
                ResponseSet::PerState(map) => map.into_values().collect(),
            })
            .collect();
        ModelParts {
            space: m.space,
            states: m.states,
            observables: m.observables,
            densities: m.densities,
            responses,
        }
    }
}

impl HVModel {
    /// Validates every structural invariant and reports the first violation.
    pub fn new(parts: ModelParts) -> Result<Self> {
        let ModelParts {
            space,
            states,
            observables,
            densities,
            responses,
        } = parts;

        if states.contains_key(&StateId::new(ANY_TAG)) {
            return Err(Error::invariant(
                "state ids distinct from the ANY tag",
                format!("state `{ANY_TAG}`"),
                "reserved id",
            ));
        }

        for (id, density) in &densities {
            if !states.contains_key(id) {
                return Err(Error::invariant(
                    "densities reference catalogued states",
                    format!("state `{id}`"),
                    "no state vector in the catalog",
                ));
            }
            let mut mass = 0.0;
            for cell in space.cells() {
                mass += density.weight(&cell.id) * cell.measure;
            }
            for (cell, w) in &density.weights {
                if !space.contains(cell) {
                    return Err(Error::invariant(
                        "density indexed by space cells",
                        format!("state `{id}`, cell `{cell}`"),
                        "unknown cell",
                    ));
                }
                if !(w.is_finite() && *w >= 0.0) {
                    return Err(Error::invariant(
                        "nonnegative density",
                        format!("state `{id}`, cell `{cell}`"),
                        format!("weight {w}"),
                    ));
                }
            }
            if (mass - 1.0).abs() > TOL {
                return Err(Error::invariant(
                    "density normalised",
                    format!("state `{id}`"),
                    format!("integrates to {mass}"),
                ));
            }
        }

        let mut grouped: BTreeMap<ObservableId, ResponseSet> = BTreeMap::new();
        for table in responses {
            let obs = table.observable.clone();
            let meas = observables.get(&obs).ok_or_else(|| {
                Error::invariant(
                    "responses reference catalogued observables",
                    format!("observable `{obs}`"),
                    "no measurement in the catalog",
                )
            })?;
            table.validate(meas, &space)?;
            let mixed_tags = || {
                Error::invariant(
                    "one tagging style per observable",
                    format!("observable `{obs}`"),
                    "mixes ANY-tagged and per-state tables or repeats a tag",
                )
            };
            match (&table.state_tag, grouped.get_mut(&obs)) {
                (StateTag::Any, None) => {
                    grouped.insert(obs, ResponseSet::Independent(table));
                }
                (StateTag::State(s), existing) => {
                    if !states.contains_key(s) {
                        return Err(Error::invariant(
                            "response tags reference catalogued states",
                            format!("observable `{obs}`, state `{s}`"),
                            "unknown state",
                        ));
                    }
                    match existing {
                        None => {
                            let map = BTreeMap::from([(s.clone(), table)]);
                            grouped.insert(obs, ResponseSet::PerState(map));
                        }
                        Some(ResponseSet::PerState(map)) => {
                            if map.insert(s.clone(), table).is_some() {
                                return Err(mixed_tags());
                            }
                        }
                        Some(ResponseSet::Independent(_)) => return Err(mixed_tags()),
                    }
                }
                (StateTag::Any, Some(_)) => return Err(mixed_tags()),
            }
        }

        Ok(HVModel {
            space,
            states,
            observables,
            densities,
            responses: grouped,
        })
    }

    pub fn space(&self) -> &HVSpace {
        &self.space
    }

    pub fn states(&self) -> &BTreeMap<StateId, PureState> {
        &self.states
    }

    pub fn observables(&self) -> &BTreeMap<ObservableId, ProjectiveMeasurement> {
        &self.observables
    }

    pub fn densities(&self) -> &BTreeMap<StateId, StateDensity> {
        &self.densities
    }

    pub fn responses(&self) -> &BTreeMap<ObservableId, ResponseSet> {
        &self.responses
    }

    pub fn into_parts(self) -> ModelParts {
        self.into()
    }

    pub fn state(&self, id: &StateId) -> Result<&PureState> {
        self.states
            .get(id)
            .ok_or_else(|| Error::Lookup(format!("state `{id}`")))
    }

    pub fn density(&self, id: &StateId) -> Result<&StateDensity> {
        self.densities
            .get(id)
            .ok_or_else(|| Error::Lookup(format!("density for state `{id}`")))
    }

    pub fn measurement(&self, id: &ObservableId) -> Result<&ProjectiveMeasurement> {
        self.observables
            .get(id)
            .ok_or_else(|| Error::Lookup(format!("observable `{id}`")))
    }

    /// The table that governs `obs` when the system is prepared in `state`.
    pub fn response_table(&self, state: &StateId, obs: &ObservableId) -> Result<&ResponseTable> {
        match self.responses.get(obs) {
            None => Err(Error::Lookup(format!(
                "response table for observable `{obs}`"
            ))),
            Some(ResponseSet::Independent(t)) => Ok(t),
            Some(ResponseSet::PerState(map)) => map.get(state).ok_or_else(|| {
                Error::Lookup(format!(
                    "response table for observable `{obs}` in state `{state}`"
                ))
            }),
        }
    }

    /// Cells where the state's density is positive, in space order.
    pub fn support(&self, state: &StateId) -> Result<Vec<CellId>> {
        let d = self.density(state)?;
        Ok(self
            .space
            .cells()
            .iter()
            .filter(|c| d.in_support(&c.id))
            .map(|c| c.id.clone())
            .collect())
    }

    /// Ids of the states that carry a density, in catalog order.
    pub fn prepared_states(&self) -> impl Iterator<Item = &StateId> {
        self.densities.keys()
    }

    /// `Σ_c R(s, c) · p(c) · μ(c)` for the state's governing table.
    pub fn reproduced_mass(
        &self,
        state: &StateId,
        obs: &ObservableId,
        s: &OutcomeSet,
    ) -> Result<f64> {
        let meas = self.measurement(obs)?;
        meas.check_outcome_set(s)?;
        let idx: Vec<usize> = s.iter().filter_map(|o| meas.index_of(o)).collect();
        let table = self.response_table(state, obs)?;
        self.weighted_sum(state, table, |row| idx.iter().map(|&j| row[j]).sum())
    }

    /// `Σ_c f(row_c) · p(c) · μ(c)` over the support of `state`.
    pub(crate) fn weighted_sum(
        &self,
        state: &StateId,
        table: &ResponseTable,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<f64> {
        let density = self.density(state)?;
        let mut total = 0.0;
        for cell in self.space.cells() {
            let w = density.weight(&cell.id);
            if w <= 0.0 {
                continue;
            }
            let row = table.row(&cell.id).ok_or_else(|| {
                Error::Lookup(format!(
                    "response row of `{}` at cell `{}` (in the support of `{state}`)",
                    table.observable, cell.id
                ))
            })?;
            total += f(row) * w * cell.measure;
        }
        Ok(total)
    }

    /// Probability the model assigns to `s`: plain reproduction for ordinary
    /// tables, conditional on detection for augmented ones.
    pub fn audited_probability(
        &self,
        state: &StateId,
        obs: &ObservableId,
        s: &OutcomeSet,
    ) -> Result<f64> {
        let table = self.response_table(state, obs)?;
        if table.augmented {
            conditional_probability(self, state, obs, s)
        } else {
            self.reproduced_mass(state, obs, s)
        }
    }
}

fn born_for(model: &HVModel, state: &StateId, obs: &ObservableId, s: &OutcomeSet) -> Result<f64> {
    born_probability(model.state(state)?, model.measurement(obs)?, s)
}

/// Residual of Born reproduction: `|Σ_c R(s,c)p(c)μ(c) − P_Born(s)|`.
pub fn check_born_reproduction(
    model: &HVModel,
    state: &StateId,
    obs: &ObservableId,
    s: &OutcomeSet,
) -> Result<f64> {
    if model.response_table(state, obs)?.augmented {
        return Err(Error::WrongAudit(format!(
            "observable `{obs}` has an augmented table; use the conditional check"
        )));
    }
    let reproduced = model.reproduced_mass(state, obs, s)?;
    Ok((reproduced - born_for(model, state, obs, s)?).abs())
}

fn conditional_probability(
    model: &HVModel,
    state: &StateId,
    obs: &ObservableId,
    s: &OutcomeSet,
) -> Result<f64> {
    let table = model.response_table(state, obs)?;
    let n = model.measurement(obs)?.outcomes().len();
    let detected = model.weighted_sum(state, table, |row| row[..n].iter().sum())?;
    if detected.abs() <= TOL {
        return Err(Error::TotalNoShow(state.to_string()));
    }
    Ok(model.reproduced_mass(state, obs, s)? / detected)
}

/// Residual of Born reproduction conditional on some outcome being produced.
pub fn check_conditional_reproduction(
    model: &HVModel,
    state: &StateId,
    obs: &ObservableId,
    s: &OutcomeSet,
) -> Result<f64> {
    let conditional = conditional_probability(model, state, obs, s)?;
    Ok((conditional - born_for(model, state, obs, s)?).abs())
}

/// Measures of the intersection of two supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub pair: (StateId, StateId),
    /// Base measure of `supp(a) ∩ supp(b)`.
    pub q_base: f64,
    pub q_under_first: f64,
    pub q_under_second: f64,
}

impl OverlapReport {
    /// The default reading of the overlap `q`: the base measure.
    pub fn q(&self) -> f64 {
        self.q_base
    }
}

pub fn overlap_report(model: &HVModel, a: &StateId, b: &StateId) -> Result<OverlapReport> {
    let da = model.density(a)?;
    let db = model.density(b)?;
    let mut report = OverlapReport {
        pair: (a.clone(), b.clone()),
        q_base: 0.0,
        q_under_first: 0.0,
        q_under_second: 0.0,
    };
    for cell in model.space().cells() {
        let (wa, wb) = (da.weight(&cell.id), db.weight(&cell.id));
        if wa > 0.0 && wb > 0.0 {
            report.q_base += cell.measure;
            report.q_under_first += wa * cell.measure;
            report.q_under_second += wb * cell.measure;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mixing {
    Mixed,
    Segregated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dependence {
    StateDependent,
    StateIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Determinism {
    Deterministic,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub mixing: Mixing,
    pub dependence: Dependence,
    pub determinism: Determinism,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.mixing {
            Mixing::Mixed => "mixed",
            Mixing::Segregated => "segregated",
        };
        let d = match self.dependence {
            Dependence::StateDependent => "state-dependent",
            Dependence::StateIndependent => "state-independent",
        };
        let t = match self.determinism {
            Determinism::Deterministic => "deterministic",
            Determinism::Stochastic => "stochastic",
        };
        write!(f, "({m}, {d}, {t})")
    }
}

pub fn classify(model: &HVModel) -> Classification {
    let ids: Vec<&StateId> = model.prepared_states().collect();
    let mixed = ids.iter().enumerate().any(|(i, a)| {
        ids[i + 1..].iter().any(|b| {
            overlap_report(model, a, b)
                .map(|r| r.q_base > 0.0)
                .unwrap_or(false)
        })
    });
    let independent = model
        .responses()
        .values()
        .all(|set| matches!(set, ResponseSet::Independent(_)));
    // Rows on cells no governed state charges never enter a probability.
    let deterministic = model
        .responses()
        .values()
        .flat_map(ResponseSet::tables)
        .all(|table| {
            let charged = |cell: &CellId| match &table.state_tag {
                StateTag::Any => model.densities().values().any(|d| d.in_support(cell)),
                StateTag::State(id) => model
                    .densities()
                    .get(id)
                    .is_some_and(|d| d.in_support(cell)),
            };
            table
                .rows
                .iter()
                .filter(|(cell, _)| charged(cell))
                .flat_map(|(_, row)| row)
                .all(|&v| v.abs() <= TOL || (v - 1.0).abs() <= TOL)
        });
    Classification {
        mixing: if mixed {
            Mixing::Mixed
        } else {
            Mixing::Segregated
        },
        dependence: if independent {
            Dependence::StateIndependent
        } else {
            Dependence::StateDependent
        },
        determinism: if deterministic {
            Determinism::Deterministic
        } else {
            Determinism::Stochastic
        },
    }
}

/// Cells charged by `state` where the response to `s` is positive. Empty
/// whenever the model reproduces a Born probability of zero for `s`.
pub fn positive_response_on_support(
    model: &HVModel,
    state: &StateId,
    obs: &ObservableId,
    s: &OutcomeSet,
) -> Result<Vec<CellId>> {
    let meas = model.measurement(obs)?;
    meas.check_outcome_set(s)?;
    let idx: BTreeSet<usize> = s.iter().filter_map(|o| meas.index_of(o)).collect();
    let table = model.response_table(state, obs)?;
    let density = model.density(state)?;
    let mut out = Vec::new();
    for cell in model.space().cells() {
        if density.weight(&cell.id) * cell.measure <= 0.0 {
            continue;
        }
        let row = table
            .row(&cell.id)
            .ok_or_else(|| Error::Lookup(format!("response row at cell `{}`", cell.id)))?;
        if idx.iter().any(|&j| row[j] > 0.0) {
            out.push(cell.id.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_fixture() -> HVModel {
        // (0,0.25] (0.25,0.5] (0.5,0.75] (0.75,1]
        let cells: Vec<Cell> = ["a", "b", "c", "d"]
            .iter()
            .map(|id| Cell::new(*id, 0.25))
            .collect();
        let space = HVSpace::new("unit", cells).unwrap();
        let first = StateDensity::new(BTreeMap::from([("a".into(), 2.0), ("b".into(), 2.0)]));
        let second = StateDensity::new(BTreeMap::from([("b".into(), 2.0), ("c".into(), 2.0)]));
        HVModel::new(ModelParts {
            space,
            states: BTreeMap::from([
                ("zero".into(), PureState::zero()),
                ("plus".into(), PureState::plus()),
            ]),
            observables: BTreeMap::new(),
            densities: BTreeMap::from([("zero".into(), first), ("plus".into(), second)]),
            responses: vec![],
        })
        .unwrap()
    }

    #[test]
    fn overlap_of_shifted_intervals() {
        let m = interval_fixture();
        let r = overlap_report(&m, &"zero".into(), &"plus".into()).unwrap();
        assert_eq!(r.q_base, 0.25);
        assert_eq!(r.q_under_first, 0.5);
        assert_eq!(r.q_under_second, 0.5);
        assert!(overlap_report(&m, &"zero".into(), &"nope".into()).is_err());
    }

    #[test]
    fn density_must_be_normalised() {
        let mut parts = interval_fixture().into_parts();
        parts
            .densities
            .get_mut(&StateId::new("plus"))
            .unwrap()
            .weights
            .insert("c".into(), 1.6);
        match HVModel::new(parts) {
            Err(Error::Invariant {
                invariant,
                location,
                ..
            }) => {
                assert_eq!(invariant, "density normalised");
                assert!(location.contains("plus"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tagging_styles_cannot_mix() {
        let mut parts = interval_fixture().into_parts();
        parts
            .observables
            .insert("Z".into(), ProjectiveMeasurement::pauli_z());
        let rows: BTreeMap<CellId, Vec<f64>> = ["a", "b", "c", "d"]
            .iter()
            .map(|c| (CellId::new(*c), vec![1.0, 0.0]))
            .collect();
        parts
            .responses
            .push(ResponseTable::new("Z", StateTag::Any, false, rows.clone()));
        parts.responses.push(ResponseTable::new(
            "Z",
            StateTag::State("zero".into()),
            false,
            rows,
        ));
        let err = HVModel::new(parts).unwrap_err();
        assert!(err.to_string().contains("one tagging style"));
    }

    #[test]
    fn row_totality_enforced_unless_relaxed() {
        let mut parts = interval_fixture().into_parts();
        parts
            .observables
            .insert("Z".into(), ProjectiveMeasurement::pauli_z());
        let rows = BTreeMap::from([(CellId::new("a"), vec![0.6, 0.5])]);
        parts
            .responses
            .push(ResponseTable::new("Z", StateTag::Any, false, rows.clone()));
        let err = HVModel::new(parts.clone()).unwrap_err();
        assert!(err.to_string().contains("cell `a`"));

        let mut zero_row = ResponseTable::new(
            "Z",
            StateTag::Any,
            false,
            BTreeMap::from([(CellId::new("a"), vec![0.0, 0.0])]),
        );
        parts.responses = vec![zero_row.clone()];
        assert!(HVModel::new(parts.clone()).is_err());
        zero_row.relaxed_totality = true;
        parts.responses = vec![zero_row];
        assert!(HVModel::new(parts).is_ok());
    }

    #[test]
    fn augmented_table_rejected_by_plain_audit() {
        let mut parts = interval_fixture().into_parts();
        parts
            .observables
            .insert("Z".into(), ProjectiveMeasurement::pauli_z());
        let rows: BTreeMap<CellId, Vec<f64>> = ["a", "b", "c", "d"]
            .iter()
            .map(|c| (CellId::new(*c), vec![1.0, 0.0, 0.0]))
            .collect();
        parts
            .responses
            .push(ResponseTable::new("Z", StateTag::Any, true, rows));
        let m = HVModel::new(parts).unwrap();
        let s = OutcomeSet::singleton("+1");
        assert!(matches!(
            check_born_reproduction(&m, &"zero".into(), &"Z".into(), &s),
            Err(Error::WrongAudit(_))
        ));
        let r = check_conditional_reproduction(&m, &"zero".into(), &"Z".into(), &s).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn all_no_show_is_an_error() {
        let mut parts = interval_fixture().into_parts();
        parts
            .observables
            .insert("Z".into(), ProjectiveMeasurement::pauli_z());
        let rows: BTreeMap<CellId, Vec<f64>> = ["a", "b", "c", "d"]
            .iter()
            .map(|c| (CellId::new(*c), vec![0.0, 0.0, 1.0]))
            .collect();
        parts
            .responses
            .push(ResponseTable::new("Z", StateTag::Any, true, rows));
        let m = HVModel::new(parts).unwrap();
        let err = check_conditional_reproduction(
            &m,
            &"plus".into(),
            &"Z".into(),
            &OutcomeSet::singleton("-1"),
        )
        .unwrap_err();
        assert_eq!(err, Error::TotalNoShow("plus".into()));
    }

    #[test]
    fn reserved_and_unknown_ids_rejected() {
        let mut parts = interval_fixture().into_parts();
        parts.states.insert(ANY_TAG.into(), PureState::one());
        assert!(HVModel::new(parts).is_err());

        let mut parts = interval_fixture().into_parts();
        parts.densities.insert(
            "ghost".into(),
            StateDensity::uniform_on([&CellId::new("a")]),
        );
        assert!(HVModel::new(parts).is_err());

        let mut parts = interval_fixture().into_parts();
        parts.responses.push(ResponseTable::new(
            "Q",
            StateTag::Any,
            false,
            BTreeMap::new(),
        ));
        assert!(HVModel::new(parts).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = interval_fixture();
        let text = serde_json::to_string(&m).unwrap();
        let back: HVModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
