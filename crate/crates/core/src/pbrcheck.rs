//! Antidistinguishing scenarios on product preparations and the checks that
//! run on composites built for them.
//!
//! For a measurement `M` with outcome `j` impossible for preparation `φ_j`,
//! Born reproduction forces `R_M({j}, λ) = 0` on every `λ` charged by `φ_j`.
//! A state-independent table evaluated at a `λ_c` charged by every `φ_j` is
//! therefore zero on the whole spectrum. Without a null outcome that breaks
//! outcome totality; with one, `λ_c` never produces a result.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::composer::{compose_independent, CompositeModel, Preparation, JOINT_OBSERVABLE};
use crate::error::{Error, Result};
use crate::hvframe::{
    Cell, CellId, HVModel, HVSpace, ModelParts, ObservableId, ResponseSet, ResponseTable,
    StateDensity, StateId, StateTag,
};
use crate::qcore::{
    born_probability, identity_resolution_residual, tensor_product, Outcome, OutcomeSet,
    ProjectiveMeasurement, PureState,
};
use crate::toymodels::build_uniform_state_dependent;
use crate::TOL;

/// All `2^L` products `ψ_{x1} ⊗ … ⊗ ψ_{xL}`, binary order, `ψ1` as digit 0.
pub fn build_product_states(
    psi1: &PureState,
    psi2: &PureState,
    systems: usize,
) -> Result<Vec<PureState>> {
    if systems == 0 {
        return Err(Error::Argument("L must be at least 1".into()));
    }
    if psi1.inner(psi2)?.norm() >= 1.0 - TOL {
        return Err(Error::Argument("the two states are not distinct".into()));
    }
    (0..1usize << systems)
        .map(|x| {
            let factors: Vec<PureState> = (0..systems)
                .map(|i| {
                    if (x >> (systems - 1 - i)) & 1 == 0 {
                        psi1.clone()
                    } else {
                        psi2.clone()
                    }
                })
                .collect();
            tensor_product(&factors)
        })
        .collect()
}

/// Per-preparation residuals `P(φ_j, {j})`; all vanish for an
/// antidistinguishing measurement.
pub fn verify_antidistinguishing(
    meas: &ProjectiveMeasurement,
    products: &[PureState],
) -> Result<Vec<f64>> {
    if meas.outcomes().len() != products.len() {
        return Err(Error::Argument(format!(
            "{} outcomes for {} preparations",
            meas.outcomes().len(),
            products.len()
        )));
    }
    products
        .iter()
        .zip(meas.outcomes())
        .map(|(phi, j)| born_probability(phi, meas, &OutcomeSet::singleton(j.clone())))
        .collect()
}

/// The four-outcome measurement that antidistinguishes
/// `|00⟩, |0+⟩, |+0⟩, |++⟩`:
///
/// ```text
/// Φ1 = (|0 1⟩ + |1 0⟩)/√2     Φ2 = (|0 −⟩ + |1 +⟩)/√2
/// Φ3 = (|+ 1⟩ + |− 0⟩)/√2     Φ4 = (|+ −⟩ + |− +⟩)/√2
/// ```
///
/// Outcomes are labelled `1` to `4`.
pub fn pbr_basis_l2() -> Result<ProjectiveMeasurement> {
    let (zero, one) = (PureState::zero(), PureState::one());
    let (plus, minus) = (PureState::plus(), PureState::minus());
    let pair_sum = |a: [&PureState; 2], b: [&PureState; 2]| -> Result<PureState> {
        let u = tensor_product(&[a[0].clone(), a[1].clone()])?;
        let v = tensor_product(&[b[0].clone(), b[1].clone()])?;
        let amps = u
            .amplitudes()
            .iter()
            .zip(v.amplitudes())
            .map(|(x, y)| (x + y) * std::f64::consts::FRAC_1_SQRT_2)
            .collect();
        PureState::new(amps)
    };
    let basis = vec![
        pair_sum([&zero, &one], [&one, &zero])?,
        pair_sum([&zero, &minus], [&one, &plus])?,
        pair_sum([&plus, &one], [&minus, &zero])?,
        pair_sum([&plus, &minus], [&minus, &plus])?,
    ];
    let outcomes = (1..=4).map(|j| Outcome::new(j.to_string())).collect();
    let meas = ProjectiveMeasurement::new(basis, outcomes)
        .map_err(|e| Error::Construction(format!("basis not orthonormal: {e}")))?;
    if identity_resolution_residual(&meas) > TOL {
        return Err(Error::Construction(
            "basis does not resolve the identity".into(),
        ));
    }
    let products = build_product_states(&zero, &plus, 2)?;
    if verify_antidistinguishing(&meas, &products)?
        .iter()
        .any(|r| *r > TOL)
    {
        return Err(Error::Construction(
            "basis is not antidistinguishing".into(),
        ));
    }
    Ok(meas)
}

/// A pair of states, the number of systems, the product preparations and a
/// measurement that antidistinguishes them.
#[derive(Debug, Clone, PartialEq)]
pub struct PbrScenario {
    psi1: PureState,
    psi2: PureState,
    systems: usize,
    products: Vec<PureState>,
    meas: ProjectiveMeasurement,
}

impl PbrScenario {
    pub fn new(
        psi1: PureState,
        psi2: PureState,
        systems: usize,
        meas: ProjectiveMeasurement,
    ) -> Result<Self> {
        let products = build_product_states(&psi1, &psi2, systems)?;
        let residuals = verify_antidistinguishing(&meas, &products)?;
        if let Some((j, r)) = residuals.iter().enumerate().find(|(_, r)| **r > TOL) {
            return Err(Error::invariant(
                "antidistinguishing measurement",
                format!("preparation {}", j + 1),
                format!("P(φ_j, {{j}}) = {r}"),
            ));
        }
        Ok(PbrScenario {
            psi1,
            psi2,
            systems,
            products,
            meas,
        })
    }

    /// `|0⟩`, `|+⟩`, two systems, [`pbr_basis_l2`].
    pub fn canonical() -> Result<Self> {
        Self::new(PureState::zero(), PureState::plus(), 2, pbr_basis_l2()?)
    }

    pub fn psi1(&self) -> &PureState {
        &self.psi1
    }

    pub fn psi2(&self) -> &PureState {
        &self.psi2
    }

    pub fn systems(&self) -> usize {
        self.systems
    }

    pub fn products(&self) -> &[PureState] {
        &self.products
    }

    pub fn measurement(&self) -> &ProjectiveMeasurement {
        &self.meas
    }

    fn outcome_count(&self) -> usize {
        self.meas.outcomes().len()
    }

    /// The composite's observable carrying this scenario's measurement.
    fn observable_in<'a>(&self, composite: &'a CompositeModel) -> Result<&'a ObservableId> {
        composite
            .base()
            .observables()
            .iter()
            .find(|(_, m)| m.approx_eq(&self.meas, TOL))
            .map(|(id, _)| id)
            .ok_or_else(|| {
                Error::Lookup(
                    "no observable of the composite matches the scenario measurement".into(),
                )
            })
    }

    fn check_preparations(&self, composite: &CompositeModel) -> Result<()> {
        let preps = composite.preparations();
        if preps.len() != self.products.len() {
            return Err(Error::Argument(format!(
                "composite has {} preparations, scenario {}",
                preps.len(),
                self.products.len()
            )));
        }
        for (p, phi) in preps.iter().zip(&self.products) {
            if !composite.base().state(&p.id)?.approx_eq(phi, TOL) {
                return Err(Error::Argument(format!(
                    "preparation `{}` is not the scenario's product state",
                    p.id
                )));
            }
        }
        Ok(())
    }
}

/// On-disk scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub psi1: PureState,
    pub psi2: PureState,
    #[serde(rename = "L")]
    pub systems: usize,
    #[serde(default, rename = "canonical-basis")]
    pub canonical_basis: bool,
    #[serde(default)]
    pub basis: Option<ProjectiveMeasurement>,
}

impl ScenarioFile {
    pub fn measurement(&self) -> Result<ProjectiveMeasurement> {
        match (&self.basis, self.canonical_basis) {
            (Some(_), true) => Err(Error::Argument(
                "give either `canonical-basis: true` or an explicit basis, not both".into(),
            )),
            (Some(m), false) => Ok(m.clone()),
            (None, true) => pbr_basis_l2(),
            (None, false) => Err(Error::Argument("scenario names no measurement".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    Contradiction,
    ConsistentStateDependent,
    Inefficiency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub kind: VerdictKind,
    pub witness: Option<CellId>,
    /// `R({j}, λ_c)` for `j = 1..N`.
    pub chain: Vec<f64>,
    /// `R(S(M), λ_c)`.
    pub totality: f64,
    /// `R({θ}, λ_c)`, zero for non-augmented tables.
    pub no_show: f64,
}

/// Evaluates the state-independent response at a hidden variable common to
/// every preparation.
pub fn detect_lemma_contradiction(
    composite: &CompositeModel,
    scenario: &PbrScenario,
) -> Result<LemmaVerdict> {
    scenario.check_preparations(composite)?;
    let obs = scenario.observable_in(composite)?;
    let set = composite
        .base()
        .responses()
        .get(obs)
        .ok_or_else(|| Error::Lookup(format!("response table for `{obs}`")))?;
    let table = match set {
        ResponseSet::PerState(_) => {
            return Ok(LemmaVerdict {
                kind: VerdictKind::ConsistentStateDependent,
                witness: composite.common_support_witness(),
                chain: Vec::new(),
                totality: 1.0,
                no_show: 0.0,
            })
        }
        ResponseSet::Independent(t) => t,
    };
    let witness = composite.common_support_witness().ok_or_else(|| {
        Error::NoWitness("no cell is charged by every preparation; the premise fails".into())
    })?;
    let row = table
        .row(&witness)
        .ok_or_else(|| Error::Lookup(format!("response row at `{witness}`")))?;
    let n = scenario.outcome_count();
    let chain = row[..n].to_vec();
    if let Some(j) = chain.iter().position(|v| *v > TOL) {
        return Err(Error::Precondition(format!(
            "R({{{}}}, {witness}) = {} although `{}` charges the cell and gives outcome {} \
             probability zero; the table does not reproduce the Born rule",
            scenario.meas.outcomes()[j],
            chain[j],
            composite.preparations()[j].id,
            scenario.meas.outcomes()[j],
        )));
    }
    let totality = chain.iter().sum();
    let no_show = if table.augmented { row[n] } else { 0.0 };
    let kind = if table.augmented {
        VerdictKind::Inefficiency
    } else {
        VerdictKind::Contradiction
    };
    Ok(LemmaVerdict {
        kind,
        witness: Some(witness),
        chain,
        totality,
        no_show,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InefficiencyReport {
    pub per_cell: Vec<(CellId, f64)>,
    pub per_preparation: Vec<(StateId, f64)>,
    pub worst: f64,
    pub note: Option<String>,
}

/// No-show weight per cell and aggregate no-show probability per
/// preparation, `Σ_c R({θ}, c) · p_φ(c) · μ(c)`.
pub fn builtin_inefficiency(
    composite: &CompositeModel,
    scenario: &PbrScenario,
) -> Result<InefficiencyReport> {
    scenario.check_preparations(composite)?;
    let obs = scenario.observable_in(composite)?;
    let table = match composite.base().responses().get(obs) {
        Some(ResponseSet::Independent(t)) => t,
        Some(ResponseSet::PerState(_)) => {
            return Err(Error::Precondition(
                "built-in inefficiency is defined for state-independent tables".into(),
            ))
        }
        None => return Err(Error::Lookup(format!("response table for `{obs}`"))),
    };
    let per_cell: Vec<(CellId, f64)> = composite
        .base()
        .space()
        .cells()
        .iter()
        .filter_map(|c| table.no_show(&c.id).map(|w| (c.id.clone(), w)))
        .collect();
    let mut per_preparation = Vec::new();
    for p in composite.preparations() {
        let v = if table.augmented {
            composite
                .base()
                .weighted_sum(&p.id, table, |row| row[row.len() - 1])?
        } else {
            0.0
        };
        per_preparation.push((p.id.clone(), v));
    }
    let worst = per_preparation.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let note = (!table.augmented)
        .then(|| "table has no null outcome; inefficiency is zero by definition".to_string());
    Ok(InefficiencyReport {
        per_cell,
        per_preparation,
        worst,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResolutionAudit {
    pub cell: CellId,
    pub projector_values: Vec<u8>,
    pub identity_value: u8,
    pub sum_of_values: u8,
    pub mismatch: bool,
    pub operator_residual: f64,
}

/// Compares the value of `I = Σ_j P_j` at `cell` (always 1) with the sum of
/// the projector values read off a deterministic state-independent table.
pub fn additivity_audit(
    composite: &CompositeModel,
    scenario: &PbrScenario,
    cell: &CellId,
) -> Result<IdentityResolutionAudit> {
    let obs = scenario.observable_in(composite)?;
    let table = match composite.base().responses().get(obs) {
        Some(ResponseSet::Independent(t)) => t,
        Some(ResponseSet::PerState(_)) => {
            return Err(Error::Precondition(
                "additivity audit needs a state-independent table".into(),
            ))
        }
        None => return Err(Error::Lookup(format!("response table for `{obs}`"))),
    };
    if !table.is_deterministic() {
        return Err(Error::Precondition(
            "projector values are undefined for a stochastic table".into(),
        ));
    }
    if !composite.base().space().contains(cell) {
        return Err(Error::Lookup(format!("cell `{cell}`")));
    }
    let row = table
        .row(cell)
        .ok_or_else(|| Error::Lookup(format!("response row at `{cell}`")))?;
    let projector_values: Vec<u8> = row[..scenario.outcome_count()]
        .iter()
        .map(|v| u8::from(*v > 0.5))
        .collect();
    let sum_of_values = projector_values.iter().sum();
    Ok(IdentityResolutionAudit {
        cell: cell.clone(),
        projector_values,
        identity_value: 1,
        sum_of_values,
        mismatch: sum_of_values != 1,
        operator_residual: identity_resolution_residual(&scenario.meas),
    })
}

/// Independent composite of `component` with a deterministic,
/// state-independent, non-augmented table for the scenario measurement whose
/// entries are forced by the zero Born probabilities:
///
/// * a cell charged by one preparation only is split into sub-cells
///   `cell#j` of measure proportional to that preparation's Born
///   probabilities, each answering `j`;
/// * a cell charged by several preparations answers the first outcome none
///   of them forbids, or nothing at all when all are forbidden.
///
/// The table therefore reproduces every zero Born probability exactly and
/// violates outcome totality precisely on cells charged by every
/// preparation.
pub fn build_forced_composite(
    component: &HVModel,
    pair: &(StateId, StateId),
    scenario: &PbrScenario,
) -> Result<CompositeModel> {
    let independent = compose_independent(component, pair, scenario.systems)?;
    scenario.check_preparations(&independent)?;
    let meas = &scenario.meas;
    let n = scenario.outcome_count();
    let base = independent.base();
    let preps = independent.preparations();
    let densities: Vec<&StateDensity> = preps
        .iter()
        .map(|p| base.density(&p.id))
        .collect::<Result<_>>()?;
    let born: Vec<Vec<f64>> = scenario
        .products
        .iter()
        .map(|phi| meas.born_vector(phi))
        .collect::<Result<_>>()?;

    let mut meta = independent.meta().clone();
    let mut cells = Vec::new();
    let mut weights: Vec<BTreeMap<CellId, f64>> = vec![BTreeMap::new(); preps.len()];
    let mut rows = BTreeMap::new();
    let mut relaxed = false;
    let unit = |j: usize| {
        let mut r = vec![0.0; n];
        r[j] = 1.0;
        r
    };

    for cell in base.space().cells() {
        let charging: Vec<usize> = (0..preps.len())
            .filter(|&x| densities[x].in_support(&cell.id))
            .collect();
        if let [x] = charging[..] {
            let tuple = meta.product_cells.remove(&cell.id).ok_or_else(|| {
                Error::Construction(format!("`{}` is not a product cell", cell.id))
            })?;
            for (j, &p) in born[x].iter().enumerate() {
                if p <= TOL {
                    continue;
                }
                let id = CellId(format!("{}#{}", cell.id, meas.outcomes()[j]));
                cells.push(Cell::new(id.clone(), cell.measure * p));
                weights[x].insert(id.clone(), densities[x].weight(&cell.id));
                rows.insert(id.clone(), unit(j));
                meta.product_cells.insert(id, tuple.clone());
            }
            continue;
        }
        cells.push(cell.clone());
        for &x in &charging {
            weights[x].insert(cell.id.clone(), densities[x].weight(&cell.id));
        }
        let row = match (0..n).find(|j| !charging.contains(j)) {
            Some(j) => unit(j),
            None => {
                relaxed = true;
                vec![0.0; n]
            }
        };
        rows.insert(cell.id.clone(), row);
    }

    let mut table = ResponseTable::new(JOINT_OBSERVABLE, StateTag::Any, false, rows);
    table.relaxed_totality = relaxed;
    let parts = ModelParts {
        space: HVSpace::new(format!("forced {}", base.space().label()), cells)?,
        states: base.states().clone(),
        observables: BTreeMap::from([(ObservableId::new(JOINT_OBSERVABLE), meas.clone())]),
        densities: preps
            .iter()
            .zip(weights)
            .map(|(p, w)| (p.id.clone(), StateDensity::new(w)))
            .collect(),
        responses: vec![table],
    };
    CompositeModel::new(HVModel::new(parts)?, meta)
}

/// The uniform state-dependent model for the scenario measurement, with the
/// product preparations as its states, wrapped as a composite.
pub fn uniform_state_dependent_composite(
    scenario: &PbrScenario,
    pair: &(StateId, StateId),
) -> Result<CompositeModel> {
    let preparations: Vec<Preparation> = (0..scenario.products.len())
        .map(|x| {
            let factors = crate::composer::preparation_factors(pair, scenario.systems, x);
            let id = StateId(
                factors
                    .iter()
                    .map(StateId::as_str)
                    .collect::<Vec<_>>()
                    .join(crate::composer::FACTOR_SEP),
            );
            Preparation { id, factors }
        })
        .collect();
    let states: Vec<(StateId, PureState)> = preparations
        .iter()
        .zip(&scenario.products)
        .map(|(p, s)| (p.id.clone(), s.clone()))
        .collect();
    let model = build_uniform_state_dependent(JOINT_OBSERVABLE, &scenario.meas, &states)?;
    CompositeModel::from_joint_model(model, pair.clone(), scenario.systems, preparations)
}
