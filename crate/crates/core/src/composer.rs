//! Composite-system models built from a component model and a pair of its
//! states.
//!
//! A composite of `L` systems lives on the `L`-fold product of the component
//! partition (first factor slowest), optionally extended by native cells
//! that belong to the composite alone. It carries one density per product
//! preparation `ψ_{x1} ⊗ … ⊗ ψ_{xL}`, enumerated in binary order with the
//! first member of the pair as digit 0.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hvframe::{
    Cell, CellId, HVModel, HVSpace, ModelParts, ObservableId, ResponseTable, StateDensity, StateId,
    StateTag,
};
use crate::qcore::{tensor_product, ProjectiveMeasurement, PureState};
use crate::TOL;

/// Separator used to build composite cell and state ids from their factors.
pub const FACTOR_SEP: &str = "⊗";

/// Upper bound on product cells, to keep exhaustive scans cheap.
const MAX_PRODUCT_CELLS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositionRule {
    /// Component hidden variables contribute independently; densities
    /// multiply.
    IndependentProduct,
    /// Shared component hidden variables stay in every product preparation's
    /// support.
    Compatible,
    /// Only some composite hidden variable, possibly native, is shared.
    CompactNative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preparation {
    pub id: StateId,
    pub factors: Vec<StateId>,
}

/// Provenance carried next to the composite's base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeMeta {
    pub rule: CompositionRule,
    pub systems: usize,
    pub pair: (StateId, StateId),
    /// Component cells in component order; empty for purely native
    /// composites.
    pub component_cells: Vec<CellId>,
    pub preparations: Vec<Preparation>,
    /// Composite cell → the component cells it is a product of.
    pub product_cells: BTreeMap<CellId, Vec<CellId>>,
    pub native_cells: Vec<CellId>,
}

/// A composite model: a validated [`HVModel`] plus its product structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompositeFile", into = "CompositeFile")]
pub struct CompositeModel {
    pub(crate) base: HVModel,
    pub(crate) meta: CompositeMeta,
}

/// On-disk form of a composite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositeFile {
    pub model: HVModel,
    pub composite: CompositeMeta,
}

impl TryFrom<CompositeFile> for CompositeModel {
    type Error = Error;

    fn try_from(f: CompositeFile) -> Result<Self> {
        CompositeModel::new(f.model, f.composite)
    }
}

impl From<CompositeModel> for CompositeFile {
    fn from(c: CompositeModel) -> Self {
        CompositeFile {
            model: c.base,
            composite: c.meta,
        }
    }
}

impl CompositeModel {
    pub fn new(base: HVModel, meta: CompositeMeta) -> Result<Self> {
        if meta.systems == 0 {
            return Err(Error::Argument(
                "a composite needs at least one system".into(),
            ));
        }
        let expected = 1usize
            .checked_shl(meta.systems as u32)
            .ok_or_else(|| Error::Argument("too many systems".into()))?;
        if meta.preparations.len() != expected {
            return Err(Error::invariant(
                "2^L preparations",
                "composite",
                format!(
                    "{} preparations for L = {}",
                    meta.preparations.len(),
                    meta.systems
                ),
            ));
        }
        for p in &meta.preparations {
            if p.factors.len() != meta.systems
                || p.factors
                    .iter()
                    .any(|f| *f != meta.pair.0 && *f != meta.pair.1)
            {
                return Err(Error::invariant(
                    "preparations are products of the pair",
                    format!("preparation `{}`", p.id),
                    format!("factors {:?}", p.factors),
                ));
            }
            base.density(&p.id).map_err(|_| {
                Error::invariant(
                    "density for every preparation",
                    format!("preparation `{}`", p.id),
                    "missing density",
                )
            })?;
        }
        for (cell, tuple) in &meta.product_cells {
            if !base.space().contains(cell) || tuple.len() != meta.systems {
                return Err(Error::invariant(
                    "product cells belong to the space",
                    format!("cell `{cell}`"),
                    "unknown cell or wrong arity",
                ));
            }
        }
        for cell in &meta.native_cells {
            if !base.space().contains(cell) || meta.product_cells.contains_key(cell) {
                return Err(Error::invariant(
                    "native cells belong to the space",
                    format!("cell `{cell}`"),
                    "unknown cell or also a product cell",
                ));
            }
        }
        if base.space().len() != meta.product_cells.len() + meta.native_cells.len() {
            return Err(Error::invariant(
                "every cell is a product or native cell",
                "composite",
                "unclassified cells in the space",
            ));
        }
        Ok(CompositeModel { base, meta })
    }

    /// Wraps a model of the joint system whose states are the preparations;
    /// every cell counts as native.
    pub fn from_joint_model(
        base: HVModel,
        pair: (StateId, StateId),
        systems: usize,
        preparations: Vec<Preparation>,
    ) -> Result<Self> {
        let native_cells = base.space().cells().iter().map(|c| c.id.clone()).collect();
        let meta = CompositeMeta {
            rule: CompositionRule::CompactNative,
            systems,
            pair,
            component_cells: Vec::new(),
            preparations,
            product_cells: BTreeMap::new(),
            native_cells,
        };
        CompositeModel::new(base, meta)
    }

    pub fn base(&self) -> &HVModel {
        &self.base
    }

    pub fn meta(&self) -> &CompositeMeta {
        &self.meta
    }

    pub fn rule(&self) -> CompositionRule {
        self.meta.rule
    }

    pub fn systems(&self) -> usize {
        self.meta.systems
    }

    pub fn preparations(&self) -> &[Preparation] {
        &self.meta.preparations
    }

    pub fn native_cells(&self) -> &[CellId] {
        &self.meta.native_cells
    }

    pub fn component_tuple(&self, cell: &CellId) -> Option<&[CellId]> {
        self.meta.product_cells.get(cell).map(Vec::as_slice)
    }

    /// First cell, in space order, charged by every preparation.
    pub fn common_support_witness(&self) -> Option<CellId> {
        let densities: Vec<&StateDensity> = self
            .meta
            .preparations
            .iter()
            .filter_map(|p| self.base.density(&p.id).ok())
            .collect();
        self.base
            .space()
            .cells()
            .iter()
            .find(|c| densities.iter().all(|d| d.in_support(&c.id)))
            .map(|c| c.id.clone())
    }

    /// Base measure of the set charged by every preparation.
    pub fn common_support_measure(&self) -> f64 {
        let densities: Vec<&StateDensity> = self
            .meta
            .preparations
            .iter()
            .filter_map(|p| self.base.density(&p.id).ok())
            .collect();
        self.base
            .space()
            .cells()
            .iter()
            .filter(|c| densities.iter().all(|d| d.in_support(&c.id)))
            .map(|c| c.measure)
            .sum()
    }

    fn check_provenance(&self, component: &HVModel, pair: &(StateId, StateId)) -> Result<()> {
        let cells: Vec<&CellId> = component.space().cells().iter().map(|c| &c.id).collect();
        let same_cells = self.meta.component_cells.iter().collect::<Vec<_>>() == cells;
        if self.meta.pair != *pair || !same_cells {
            return Err(Error::Argument(
                "composite was not built over this component and pair".into(),
            ));
        }
        Ok(())
    }

    /// Replaces the base model, keeping the product structure.
    pub(crate) fn with_base(&self, base: HVModel) -> Result<Self> {
        CompositeModel::new(base, self.meta.clone())
    }
}

/// Index of the `x`-th preparation's factors: bit `L-1-i` of `x` selects the
/// `i`-th factor, so the first system varies slowest.
pub(crate) fn preparation_factors(
    pair: &(StateId, StateId),
    systems: usize,
    x: usize,
) -> Vec<StateId> {
    (0..systems)
        .map(|i| {
            if (x >> (systems - 1 - i)) & 1 == 0 {
                pair.0.clone()
            } else {
                pair.1.clone()
            }
        })
        .collect()
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(FACTOR_SEP)
}

/// Product cells of an `L`-fold product, lexicographic with the first
/// factor slowest.
fn product_tuples(cells: &[Cell], systems: usize) -> Result<Vec<Vec<&Cell>>> {
    let count = cells
        .len()
        .checked_pow(systems as u32)
        .filter(|&n| n <= MAX_PRODUCT_CELLS)
        .ok_or_else(|| {
            Error::Argument(format!(
                "{} cells to the power {systems} exceeds the product-cell limit",
                cells.len()
            ))
        })?;
    let mut out = Vec::with_capacity(count);
    for mut k in 0..count {
        let mut tuple = vec![&cells[0]; systems];
        for slot in tuple.iter_mut().rev() {
            *slot = &cells[k % cells.len()];
            k /= cells.len();
        }
        out.push(tuple);
    }
    Ok(out)
}

/// Shared scaffolding of every product composite: cells, states and the
/// provenance, with densities left to the caller.
struct Frame {
    product_cells: Vec<(CellId, Vec<CellId>, f64)>,
    preparations: Vec<(Preparation, PureState)>,
    component_cells: Vec<CellId>,
}

fn frame(component: &HVModel, pair: &(StateId, StateId), systems: usize) -> Result<Frame> {
    if systems == 0 {
        return Err(Error::Argument("L must be at least 1".into()));
    }
    if pair.0 == pair.1 {
        return Err(Error::Argument(
            "the pair must name two distinct states".into(),
        ));
    }
    let s1 = component.state(&pair.0)?.clone();
    let s2 = component.state(&pair.1)?.clone();
    component.density(&pair.0)?;
    component.density(&pair.1)?;

    let cells = component.space().cells();
    let product_cells = product_tuples(cells, systems)?
        .into_iter()
        .map(|tuple| {
            let ids: Vec<CellId> = tuple.iter().map(|c| c.id.clone()).collect();
            let measure = tuple.iter().map(|c| c.measure).product();
            (CellId(join(&ids)), ids, measure)
        })
        .collect();

    let mut preparations = Vec::with_capacity(1 << systems);
    for x in 0..1usize << systems {
        let factors = preparation_factors(pair, systems, x);
        let vectors: Vec<PureState> = factors
            .iter()
            .map(|f| if *f == pair.0 { s1.clone() } else { s2.clone() })
            .collect();
        let state = tensor_product(&vectors)?;
        preparations.push((
            Preparation {
                id: StateId(join(&factors)),
                factors,
            },
            state,
        ));
    }
    Ok(Frame {
        product_cells,
        preparations,
        component_cells: cells.iter().map(|c| c.id.clone()).collect(),
    })
}

fn product_weight(component: &HVModel, factors: &[StateId], tuple: &[CellId]) -> Result<f64> {
    let mut w = 1.0;
    for (f, c) in factors.iter().zip(tuple) {
        w *= component.density(f)?.weight(c);
    }
    Ok(w)
}

fn assemble(
    frame: Frame,
    pair: &(StateId, StateId),
    systems: usize,
    rule: CompositionRule,
    natives: Vec<Cell>,
    product_scale: f64,
    densities: Vec<StateDensity>,
) -> Result<CompositeModel> {
    let mut cells: Vec<Cell> = frame
        .product_cells
        .iter()
        .map(|(id, _, m)| Cell::new(id.clone(), m * product_scale))
        .collect();
    let native_cells = natives.iter().map(|c| c.id.clone()).collect();
    cells.extend(natives);
    let space = HVSpace::new(format!("{rule:?} composite of {systems}"), cells)?;
    let states = frame
        .preparations
        .iter()
        .map(|(p, s)| (p.id.clone(), s.clone()))
        .collect();
    let densities = frame
        .preparations
        .iter()
        .map(|(p, _)| p.id.clone())
        .zip(densities)
        .collect();
    let base = HVModel::new(ModelParts {
        space,
        states,
        observables: BTreeMap::new(),
        densities,
        responses: Vec::new(),
    })?;
    let meta = CompositeMeta {
        rule,
        systems,
        pair: pair.clone(),
        component_cells: frame.component_cells,
        preparations: frame.preparations.into_iter().map(|(p, _)| p).collect(),
        product_cells: frame
            .product_cells
            .into_iter()
            .map(|(id, tuple, _)| (id, tuple))
            .collect(),
        native_cells,
    };
    CompositeModel::new(base, meta)
}

/// Composite whose preparation densities are products of component
/// densities.
pub fn compose_independent(
    component: &HVModel,
    pair: &(StateId, StateId),
    systems: usize,
) -> Result<CompositeModel> {
    let fr = frame(component, pair, systems)?;
    let mut densities = Vec::with_capacity(fr.preparations.len());
    for (p, _) in &fr.preparations {
        let mut weights = BTreeMap::new();
        for (id, tuple, _) in &fr.product_cells {
            let w = product_weight(component, &p.factors, tuple)?;
            if w > 0.0 {
                weights.insert(id.clone(), w);
            }
        }
        densities.push(StateDensity::new(weights));
    }
    assemble(
        fr,
        pair,
        systems,
        CompositionRule::IndependentProduct,
        Vec::new(),
        1.0,
        densities,
    )
}

/// Perfectly correlated composite: a preparation's mass sits on diagonal
/// cells `(λ, …, λ)` with `λ` charged by every factor, proportional to the
/// product of factor weights. Preparations whose factors share no `λ` fall
/// back to the product density.
pub fn compose_compatible(
    component: &HVModel,
    pair: &(StateId, StateId),
    systems: usize,
) -> Result<CompositeModel> {
    let fr = frame(component, pair, systems)?;
    let mut densities = Vec::with_capacity(fr.preparations.len());
    for (p, _) in &fr.preparations {
        let mut weights = BTreeMap::new();
        let mut mass = 0.0;
        let mut diagonal = Vec::new();
        for cell in component.space().cells() {
            let tuple = vec![cell.id.clone(); systems];
            let w = product_weight(component, &p.factors, &tuple)?;
            if w > 0.0 {
                mass += w * cell.measure;
                diagonal.push((CellId(join(&tuple)), w, cell.measure));
            }
        }
        if mass > 0.0 {
            for (id, w, m) in diagonal {
                // The diagonal cell has measure m^L; a null cell keeps its
                // support membership without carrying mass.
                let composite_measure = m.powi(systems as i32);
                let weight = if composite_measure > 0.0 {
                    w * m / mass / composite_measure
                } else {
                    1.0
                };
                weights.insert(id, weight);
            }
        } else {
            for (id, tuple, _) in &fr.product_cells {
                let w = product_weight(component, &p.factors, tuple)?;
                if w > 0.0 {
                    weights.insert(id.clone(), w);
                }
            }
        }
        densities.push(StateDensity::new(weights));
    }
    assemble(
        fr,
        pair,
        systems,
        CompositionRule::Compatible,
        Vec::new(),
        1.0,
        densities,
    )
}

/// Composite with one native cell `native` of measure `native_measure`,
/// shared by every preparation with mass `native_share`. The product part of
/// each preparation avoids every cell with a component in the pair's
/// overlap, so compatibility fails whenever the pair overlaps while
/// compactness holds through the native cell.
pub fn compose_compact_native(
    component: &HVModel,
    pair: &(StateId, StateId),
    systems: usize,
    native_measure: f64,
    native_share: f64,
) -> Result<CompositeModel> {
    if !(native_measure > 0.0 && native_measure < 1.0) {
        return Err(Error::Argument("native measure must lie in (0,1)".into()));
    }
    if !(native_share > 0.0 && native_share <= 1.0) {
        return Err(Error::Argument("native share must lie in (0,1]".into()));
    }
    let fr = frame(component, pair, systems)?;
    let overlap = overlap_cells(component, pair)?;
    let scale = 1.0 - native_measure;
    let native = CellId::new("native");
    let mut densities = Vec::with_capacity(fr.preparations.len());
    for (p, _) in &fr.preparations {
        let mut kept = Vec::new();
        let mut mass = 0.0;
        for (id, tuple, m) in &fr.product_cells {
            if tuple.iter().any(|c| overlap.contains(c)) {
                continue;
            }
            let w = product_weight(component, &p.factors, tuple)?;
            if w > 0.0 {
                mass += w * m;
                kept.push((id.clone(), w));
            }
        }
        let share = if mass > 0.0 { native_share } else { 1.0 };
        let mut weights: BTreeMap<CellId, f64> = kept
            .into_iter()
            .map(|(id, w)| (id, w * (1.0 - share) / (mass * scale)))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        weights.insert(native.clone(), share / native_measure);
        densities.push(StateDensity::new(weights));
    }
    assemble(
        fr,
        pair,
        systems,
        CompositionRule::CompactNative,
        vec![Cell::new(native, native_measure)],
        scale,
        densities,
    )
}

/// Composite with caller-supplied native cells and densities, one density
/// per preparation in binary order. Product cells are scaled by
/// `1 − Σ native measures`.
pub fn compose_with_natives(
    component: &HVModel,
    pair: &(StateId, StateId),
    systems: usize,
    rule: CompositionRule,
    natives: Vec<Cell>,
    densities: Vec<StateDensity>,
) -> Result<CompositeModel> {
    let fr = frame(component, pair, systems)?;
    if densities.len() != fr.preparations.len() {
        return Err(Error::Argument(format!(
            "{} densities for {} preparations",
            densities.len(),
            fr.preparations.len()
        )));
    }
    let native_total: f64 = natives.iter().map(|c| c.measure).sum();
    if native_total >= 1.0 {
        return Err(Error::Argument(
            "native cells must have total measure below 1".into(),
        ));
    }
    assemble(
        fr,
        pair,
        systems,
        rule,
        natives,
        1.0 - native_total,
        densities,
    )
}

/// Component cells charged by both members of the pair.
pub fn overlap_cells(component: &HVModel, pair: &(StateId, StateId)) -> Result<BTreeSet<CellId>> {
    let a = component.density(&pair.0)?;
    let b = component.density(&pair.1)?;
    Ok(component
        .space()
        .cells()
        .iter()
        .filter(|c| a.in_support(&c.id) && b.in_support(&c.id))
        .map(|c| c.id.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityCheck {
    pub holds: bool,
    /// A diagonal cell over a shared component variable that some
    /// preparation does not charge.
    pub counterexample: Option<CellId>,
}

/// Every shared component `λ` must appear, as the diagonal cell
/// `(λ, …, λ)`, in the support of every preparation.
pub fn check_compatibility(
    composite: &CompositeModel,
    component: &HVModel,
    pair: &(StateId, StateId),
) -> Result<CompatibilityCheck> {
    composite.check_provenance(component, pair)?;
    let densities: Vec<&StateDensity> = composite
        .preparations()
        .iter()
        .map(|p| composite.base.density(&p.id))
        .collect::<Result<_>>()?;
    for lambda in overlap_cells(component, pair)? {
        let diagonal = vec![lambda; composite.systems()];
        let candidates: Vec<&CellId> = composite
            .meta
            .product_cells
            .iter()
            .filter(|(_, t)| **t == diagonal)
            .map(|(id, _)| id)
            .collect();
        let ok = candidates
            .iter()
            .any(|id| densities.iter().all(|d| d.in_support(id)));
        if !ok {
            return Ok(CompatibilityCheck {
                holds: false,
                counterexample: Some(
                    candidates
                        .first()
                        .map(|c| (*c).clone())
                        .unwrap_or_else(|| CellId(join(&diagonal))),
                ),
            });
        }
    }
    Ok(CompatibilityCheck {
        holds: true,
        counterexample: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "cell")]
pub enum Compactness {
    /// The pair shares no component variable.
    Vacuous,
    Witness(CellId),
    Violated,
}

/// Searches product cells in lexicographic order, then native cells in
/// declaration order, for one charged by every preparation.
pub fn check_compactness(
    composite: &CompositeModel,
    component: &HVModel,
    pair: &(StateId, StateId),
) -> Result<Compactness> {
    composite.check_provenance(component, pair)?;
    if overlap_cells(component, pair)?.is_empty() {
        return Ok(Compactness::Vacuous);
    }
    Ok(match composite.common_support_witness() {
        Some(c) => Compactness::Witness(c),
        None => Compactness::Violated,
    })
}

/// Observable id under which composite builders attach the joint measurement.
pub const JOINT_OBSERVABLE: &str = "M";

/// Independent composite with a single state-independent augmented table
/// for `meas`: a cell whose components each lie in exactly one of the two
/// supports fixes the preparation and answers with its Born vector; a cell
/// with any component in the overlap answers with the null outcome.
pub fn build_prism_composite(
    component: &HVModel,
    pair: &(StateId, StateId),
    systems: usize,
    meas: &ProjectiveMeasurement,
) -> Result<CompositeModel> {
    let composite = compose_independent(component, pair, systems)?;
    let dim = component.state(&pair.0)?.dim();
    let expected = dim.pow(systems as u32);
    if meas.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: meas.dim(),
        });
    }
    let da = component.density(&pair.0)?;
    let db = component.density(&pair.1)?;
    let n = meas.outcomes().len();
    let mut born_cache: BTreeMap<Vec<bool>, Vec<f64>> = BTreeMap::new();

    let mut rows = BTreeMap::new();
    for (cell, tuple) in &composite.meta.product_cells {
        let mut which = Vec::with_capacity(systems);
        for c in tuple {
            match (da.in_support(c), db.in_support(c)) {
                (true, false) => which.push(false),
                (false, true) => which.push(true),
                _ => break,
            }
        }
        let row = if which.len() == systems {
            if !born_cache.contains_key(&which) {
                let x = which
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
                let prep = &composite.meta.preparations[x];
                let born = meas.born_vector(composite.base.state(&prep.id)?)?;
                born_cache.insert(which.clone(), born);
            }
            let mut row = born_cache[&which].clone();
            row.push(0.0);
            row
        } else {
            let mut row = vec![0.0; n];
            row.push(1.0);
            row
        };
        rows.insert(cell.clone(), row);
    }

    let table = ResponseTable::new(JOINT_OBSERVABLE, StateTag::Any, true, rows);
    let prism = attach_table(&composite, meas, table)?;
    let obs = ObservableId::new(JOINT_OBSERVABLE);
    for p in prism.preparations() {
        let t = prism.base.response_table(&p.id, &obs)?;
        let detected = prism
            .base
            .weighted_sum(&p.id, t, |row| row[..n].iter().sum())?;
        if detected <= TOL {
            return Err(Error::TotalNoShow(p.id.to_string()));
        }
    }
    Ok(prism)
}

/// Adds `meas` and `table` to the composite's base model.
pub fn attach_table(
    composite: &CompositeModel,
    meas: &ProjectiveMeasurement,
    table: ResponseTable,
) -> Result<CompositeModel> {
    let mut parts = composite.base.clone().into_parts();
    parts
        .observables
        .insert(table.observable.clone(), meas.clone());
    parts.responses.retain(|t| t.observable != table.observable);
    parts.responses.push(table);
    composite.with_base(HVModel::new(parts)?)
}

/// A three-cell component on `(0,1]` whose pair overlaps on a middle cell of
/// base measure `q`, with densities that give the overlap probability `q`
/// under either state. The pair is `(|0⟩, |+⟩)`, keyed `zero` and `plus`.
pub fn overlap_fixture(q: f64) -> Result<HVModel> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Argument(format!("overlap {q} outside (0,1]")));
    }
    let side = (1.0 - q) / 2.0;
    let mut cells = Vec::new();
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    if side > 0.0 {
        cells.push(Cell::new("A", side));
        a.insert(CellId::new("A"), 2.0);
    }
    cells.push(Cell::new("AB", q));
    a.insert(CellId::new("AB"), 1.0);
    b.insert(CellId::new("AB"), 1.0);
    if side > 0.0 {
        cells.push(Cell::new("B", side));
        b.insert(CellId::new("B"), 2.0);
    }
    HVModel::new(ModelParts {
        space: HVSpace::new(format!("overlap {q}"), cells)?,
        states: BTreeMap::from([
            ("zero".into(), PureState::zero()),
            ("plus".into(), PureState::plus()),
        ]),
        observables: BTreeMap::new(),
        densities: BTreeMap::from([
            ("zero".into(), StateDensity::new(a)),
            ("plus".into(), StateDensity::new(b)),
        ]),
        responses: Vec::new(),
    })
}

/// The canonical pair `(zero, plus)`.
pub fn canonical_pair() -> (StateId, StateId) {
    ("zero".into(), "plus".into())
}

/// A random component and composite for property checks: 2 to 4 component
/// cells, random supports for the pair, `L ∈ {1, 2}`, up to two native
/// cells, and random preparation supports.
pub fn random_fixture<R: Rng>(rng: &mut R) -> Result<(HVModel, CompositeModel)> {
    let n = rng.gen_range(2..=4);
    let cells: Vec<Cell> = (0..n)
        .map(|i| Cell::new(format!("c{i}"), 1.0 / n as f64))
        .collect();
    let random_density = |rng: &mut R, ids: &[CellId], measures: &[f64]| {
        let mut chosen: Vec<usize> = (0..ids.len()).filter(|_| rng.gen_bool(0.5)).collect();
        if chosen.is_empty() {
            chosen.push(rng.gen_range(0..ids.len()));
        }
        let raw: Vec<f64> = chosen.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let mass: f64 = chosen.iter().zip(&raw).map(|(&i, w)| w * measures[i]).sum();
        StateDensity::new(
            chosen
                .iter()
                .zip(raw)
                .map(|(&i, w)| (ids[i].clone(), w / mass))
                .collect(),
        )
    };
    let ids: Vec<CellId> = cells.iter().map(|c| c.id.clone()).collect();
    let measures: Vec<f64> = cells.iter().map(|c| c.measure).collect();
    let da = random_density(rng, &ids, &measures);
    let db = random_density(rng, &ids, &measures);
    let component = HVModel::new(ModelParts {
        space: HVSpace::new("random", cells)?,
        states: BTreeMap::from([
            ("zero".into(), PureState::zero()),
            ("plus".into(), PureState::plus()),
        ]),
        observables: BTreeMap::new(),
        densities: BTreeMap::from([("zero".into(), da), ("plus".into(), db)]),
        responses: Vec::new(),
    })?;

    let pair = canonical_pair();
    let systems = rng.gen_range(1..=2);
    let natives: Vec<Cell> = (0..rng.gen_range(0..=2))
        .map(|i| Cell::new(format!("native{i}"), 0.1))
        .collect();
    let fr = frame(&component, &pair, systems)?;
    let scale = 1.0 - natives.iter().map(|c| c.measure).sum::<f64>();
    let mut all_ids: Vec<CellId> = fr
        .product_cells
        .iter()
        .map(|(id, _, _)| id.clone())
        .collect();
    let mut all_measures: Vec<f64> = fr.product_cells.iter().map(|(_, _, m)| m * scale).collect();
    all_ids.extend(natives.iter().map(|c| c.id.clone()));
    all_measures.extend(natives.iter().map(|c| c.measure));
    // Half of the fixtures start from the independent composite, so that the
    // compatible region of the space is exercised as well.
    let densities: Vec<StateDensity> = if rng.gen_bool(0.5) {
        let independent = compose_independent(&component, &pair, systems)?;
        let mut ds: Vec<StateDensity> = independent
            .preparations()
            .iter()
            .map(|p| independent.base.density(&p.id).cloned())
            .collect::<Result<_>>()?;
        if !natives.is_empty() {
            // Move a random share of each preparation onto the natives.
            for d in &mut ds {
                let share = rng.gen_range(0.1..0.9);
                for w in d.weights.values_mut() {
                    *w *= (1.0 - share) / scale;
                }
                let per = share / natives.len() as f64;
                for c in &natives {
                    d.weights.insert(c.id.clone(), per / c.measure);
                }
            }
        }
        if rng.gen_bool(0.3) {
            // Knock out one cell from one preparation, renormalising.
            let k = rng.gen_range(0..ds.len());
            let cell = all_ids[rng.gen_range(0..all_ids.len())].clone();
            let d = &mut ds[k];
            if d.weights.len() > 1 {
                d.weights.remove(&cell);
                let mass: f64 = all_ids
                    .iter()
                    .zip(&all_measures)
                    .map(|(id, m)| d.weight(id) * m)
                    .sum();
                for w in d.weights.values_mut() {
                    *w /= mass;
                }
            }
        }
        ds
    } else {
        (0..fr.preparations.len())
            .map(|_| random_density(rng, &all_ids, &all_measures))
            .collect()
    };
    let composite = assemble(
        fr,
        &pair,
        systems,
        CompositionRule::CompactNative,
        natives,
        scale,
        densities,
    )?;
    Ok((component, composite))
}
