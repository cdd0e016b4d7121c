//! End-to-end demonstrations and the randomized composition property suite.
//! Every demo is deterministic.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::composer::{
    build_prism_composite, canonical_pair, check_compactness, check_compatibility,
    compose_compact_native, overlap_fixture, random_fixture, Compactness, CompositeModel,
};
use crate::error::{Error, Result};
use crate::hvframe::{
    check_born_reproduction, check_conditional_reproduction, classify, overlap_report, CellId,
    HVModel, Mixing, ObservableId,
};
use crate::pbrcheck::{
    additivity_audit, build_forced_composite, builtin_inefficiency, detect_lemma_contradiction,
    uniform_state_dependent_composite, PbrScenario, VerdictKind,
};
use crate::qcore::{identity_resolution_residual, OutcomeSet};
use crate::report::{Check, RunReport};
use crate::toymodels::{
    build_mixed_toy, build_segregated_toy, reference_states, Geometry, ToyObservable,
};
use crate::transforms::{assert_equivalent, mix, segregate, EquivalenceSuite};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoName {
    Toy,
    Segregate,
    Mix,
    Pbr,
    Additivity,
}

impl FromStr for DemoName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "toy" => DemoName::Toy,
            "segregate" => DemoName::Segregate,
            "mix" => DemoName::Mix,
            "pbr" => DemoName::Pbr,
            "additivity" => DemoName::Additivity,
            other => {
                return Err(Error::Argument(format!(
                    "unknown demo `{other}` (expected toy, segregate, mix, pbr or additivity)"
                )))
            }
        })
    }
}

/// Overlap of the component used by the inefficiency and additivity demos.
pub const DEMO_OVERLAP: f64 = 0.25;

/// The mixed toy model over `|0⟩`, `|+⟩`, `|+i⟩` and `X`, `Y`, `Z`.
pub fn reference_toy() -> Result<HVModel> {
    build_mixed_toy(&reference_states(), &ToyObservable::paulis())
}

pub fn run_demo(name: DemoName, tolerance: f64) -> Result<RunReport> {
    match name {
        DemoName::Toy => toy_demo(tolerance),
        DemoName::Segregate => segregate_demo(),
        DemoName::Mix => mix_demo(),
        DemoName::Pbr => pbr_demo(tolerance),
        DemoName::Additivity => additivity_demo(tolerance),
    }
}

/// Born or conditional reproduction of every triple in the full suite.
pub fn reproduction_checks(model: &HVModel, tolerance: f64) -> Result<Vec<Check>> {
    let suite = EquivalenceSuite::full(model);
    let mut out = Vec::with_capacity(suite.triples.len());
    for t in &suite.triples {
        let table = model.response_table(&t.state, &t.observable)?;
        let (kind, residual) = if table.augmented {
            let r = check_conditional_reproduction(model, &t.state, &t.observable, &t.outcomes)?;
            ("conditional", r)
        } else {
            let r = check_born_reproduction(model, &t.state, &t.observable, &t.outcomes)?;
            ("born", r)
        };
        out.push(Check::residual(
            format!("{kind}[{},{},{}]", t.state, t.observable, t.outcomes),
            residual,
            tolerance,
        ));
    }
    Ok(out)
}

fn classification_check(model: &HVModel, expect: Mixing) -> Check {
    let c = classify(model);
    Check::new("classify", c.mixing == expect).value("classification", c.to_string())
}

fn pairwise_overlap_checks(model: &HVModel, expect_zero: bool) -> Result<Vec<Check>> {
    let ids: Vec<_> = model.prepared_states().cloned().collect();
    let mut out = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let q = overlap_report(model, a, b)?.q_base;
            let ok = if expect_zero { q == 0.0 } else { q > 0.0 };
            out.push(Check::new(format!("overlap[{a},{b}]"), ok).value("q_base", q));
        }
    }
    Ok(out)
}

fn equivalence_check(name: &str, a: &HVModel, b: &HVModel) -> Result<Check> {
    let r = assert_equivalent(a, b, &EquivalenceSuite::full(a))?;
    Ok(Check::residual(name, r.max_delta, r.tolerance).value("triples", r.entries.len()))
}

fn toy_demo(tolerance: f64) -> Result<RunReport> {
    let toy = reference_toy()?;
    let mut report = RunReport::new("demo toy");
    report.extend(reproduction_checks(&toy, tolerance)?);
    report.push(classification_check(&toy, Mixing::Mixed));
    Ok(report)
}

fn segregate_demo() -> Result<RunReport> {
    let toy = reference_toy()?;
    let seg = segregate(&toy)?;
    let mut report = RunReport::new("demo segregate");
    report.push(classification_check(&seg, Mixing::Segregated));
    report.extend(pairwise_overlap_checks(&seg, true)?);
    report.push(equivalence_check(
        "equivalence[toy,segregate(toy)]",
        &toy,
        &seg,
    )?);
    Ok(report)
}

fn mix_demo() -> Result<RunReport> {
    let seg = build_segregated_toy(
        &reference_states(),
        &ToyObservable::paulis(),
        Geometry::DisjointIntervals,
    )?;
    let mixed = mix(&seg)?;
    let toy = reference_toy()?;
    let round_trip = mix(&segregate(&toy)?)?;
    let mut report = RunReport::new("demo mix");
    report.push(classification_check(&mixed, Mixing::Mixed));
    report.extend(pairwise_overlap_checks(&mixed, false)?);
    report.push(equivalence_check(
        "equivalence[segregated,mix(segregated)]",
        &seg,
        &mixed,
    )?);
    report.push(equivalence_check(
        "equivalence[toy,mix(segregate(toy))]",
        &toy,
        &round_trip,
    )?);
    Ok(report)
}

/// Forced state-independent composite of the mixed toy model.
pub fn contradiction_fixture() -> Result<(CompositeModel, PbrScenario)> {
    let scenario = PbrScenario::canonical()?;
    let composite = build_forced_composite(&reference_toy()?, &canonical_pair(), &scenario)?;
    Ok((composite, scenario))
}

/// Prism composite of the overlap fixture for the canonical scenario.
pub fn prism_fixture(q: f64) -> Result<(CompositeModel, PbrScenario)> {
    let scenario = PbrScenario::canonical()?;
    let composite = build_prism_composite(
        &overlap_fixture(q)?,
        &canonical_pair(),
        scenario.systems(),
        scenario.measurement(),
    )?;
    Ok((composite, scenario))
}

fn verdict_check(
    name: &str,
    composite: &CompositeModel,
    scenario: &PbrScenario,
    expect: VerdictKind,
) -> Result<Check> {
    let v = detect_lemma_contradiction(composite, scenario)?;
    let mut ok = v.kind == expect;
    match expect {
        VerdictKind::Contradiction => {
            ok &= v.chain.iter().all(|r| *r == 0.0) && v.totality == 0.0;
        }
        VerdictKind::Inefficiency => ok &= v.no_show > 0.0,
        VerdictKind::ConsistentStateDependent => {}
    }
    let mut check = Check::new(name, ok)
        .value("kind", v.kind)
        .value("chain", &v.chain)
        .value("totality", v.totality);
    if let Some(w) = &v.witness {
        check = check.value("witness", w);
    }
    if expect == VerdictKind::Inefficiency {
        check = check.value("no_show", v.no_show);
    }
    Ok(check)
}

/// Orthonormality, identity resolution and antidistinguishing residuals.
pub fn scenario_checks(scenario: &PbrScenario, tolerance: f64) -> Result<Vec<Check>> {
    let meas = scenario.measurement();
    let mut out = vec![
        Check::residual("scenario/gram", meas.gram_residual(), tolerance),
        Check::residual(
            "scenario/identity",
            identity_resolution_residual(meas),
            tolerance,
        ),
    ];
    let residuals = crate::pbrcheck::verify_antidistinguishing(meas, scenario.products())?;
    for (j, r) in residuals.iter().enumerate() {
        out.push(Check::residual(
            format!("scenario/antidistinguishing[{}]", j + 1),
            *r,
            tolerance,
        ));
    }
    Ok(out)
}

/// Value assignment audit at one cell of a deterministic composite. At a
/// cell charged by every preparation the projector values all vanish while
/// the identity keeps value 1.
pub fn additivity_check(
    composite: &CompositeModel,
    scenario: &PbrScenario,
    cell: &CellId,
) -> Result<Check> {
    let audit = additivity_audit(composite, scenario, cell)?;
    let charged_by_all = composite.preparations().iter().all(|p| {
        composite
            .base()
            .density(&p.id)
            .map(|d| d.in_support(cell))
            .unwrap_or(false)
    });
    let ok = if charged_by_all {
        audit.mismatch && audit.sum_of_values == 0 && audit.identity_value == 1
    } else {
        !audit.mismatch
    };
    Ok(Check::new("additivity/witness", ok)
        .value("cell", &audit.cell)
        .value("projector_values", &audit.projector_values)
        .value("identity_value", audit.identity_value)
        .value("sum_of_values", audit.sum_of_values)
        .value("mismatch", audit.mismatch)
        .residual_value(audit.operator_residual)
        .detail(format!(
            "sum of values {}, value of sum {}",
            audit.sum_of_values, audit.identity_value
        )))
}

fn pbr_demo(tolerance: f64) -> Result<RunReport> {
    let scenario = PbrScenario::canonical()?;
    let meas = scenario.measurement();
    let mut report = RunReport::new("demo pbr");
    report.extend(scenario_checks(&scenario, tolerance)?);

    let (forced, _) = contradiction_fixture()?;
    report.push(verdict_check(
        "lemma/CONTRADICTION",
        &forced,
        &scenario,
        VerdictKind::Contradiction,
    )?);

    let uniform = uniform_state_dependent_composite(&scenario, &canonical_pair())?;
    report.push(verdict_check(
        "lemma/CONSISTENT_STATE_DEPENDENT",
        &uniform,
        &scenario,
        VerdictKind::ConsistentStateDependent,
    )?);
    report.extend(
        reproduction_checks(uniform.base(), tolerance)?
            .into_iter()
            .map(|c| Check {
                name: format!("uniform/{}", c.name),
                ..c
            }),
    );

    let (prism, _) = prism_fixture(DEMO_OVERLAP)?;
    report.push(verdict_check(
        "lemma/INEFFICIENCY",
        &prism,
        &scenario,
        VerdictKind::Inefficiency,
    )?);
    let obs = ObservableId::new(crate::composer::JOINT_OBSERVABLE);
    for p in prism.preparations() {
        for o in meas.outcomes() {
            let r = check_conditional_reproduction(
                prism.base(),
                &p.id,
                &obs,
                &OutcomeSet::singleton(o.clone()),
            )?;
            report.push(Check::residual(
                format!("prism/conditional[{},{o}]", p.id),
                r,
                tolerance,
            ));
        }
    }
    let expected = 1.0 - (1.0 - DEMO_OVERLAP).powi(scenario.systems() as i32);
    let ineff = builtin_inefficiency(&prism, &scenario)?;
    for (id, v) in &ineff.per_preparation {
        report.push(
            Check::residual(
                format!("prism/no-show[{id}]"),
                (v - expected).abs(),
                tolerance,
            )
            .value("no_show", v)
            .value("expected", expected),
        );
    }
    Ok(report)
}

/// Forced deterministic composite of the overlap fixture: cells charged by
/// all four preparations next to cells charged by exactly one.
pub fn additivity_fixture() -> Result<(CompositeModel, PbrScenario)> {
    let scenario = PbrScenario::canonical()?;
    let composite = build_forced_composite(
        &overlap_fixture(DEMO_OVERLAP)?,
        &canonical_pair(),
        &scenario,
    )?;
    Ok((composite, scenario))
}

fn additivity_demo(tolerance: f64) -> Result<RunReport> {
    let (composite, scenario) = additivity_fixture()?;
    let witness = composite
        .common_support_witness()
        .ok_or_else(|| Error::NoWitness("fixture has no common cell".into()))?;
    let mut report = RunReport::new("demo additivity");

    let witness_check = additivity_check(&composite, &scenario, &witness)?;
    let operator_residual = witness_check.residual.unwrap_or(f64::INFINITY);
    report.push(witness_check);

    let mut audited = 0usize;
    let mut bad = Vec::new();
    for cell in composite.base().space().cells() {
        let charging = composite
            .preparations()
            .iter()
            .filter(|p| {
                composite
                    .base()
                    .density(&p.id)
                    .map(|d| d.in_support(&cell.id))
                    .unwrap_or(false)
            })
            .count();
        if charging != 1 {
            continue;
        }
        audited += 1;
        let a = additivity_audit(&composite, &scenario, &cell.id)?;
        if a.sum_of_values != 1 || a.mismatch {
            bad.push(cell.id.to_string());
        }
    }
    report.push(
        Check::new("additivity/non-overlap", bad.is_empty() && audited > 0)
            .value("cells", audited)
            .value("violations", &bad),
    );
    report.push(Check::residual(
        "additivity/operator-residual",
        operator_residual,
        tolerance,
    ));
    Ok(report)
}

/// Seeded random composites: compatibility must imply compactness, and at
/// least one fixture (the compact-native construction) is compact without
/// being compatible.
pub fn run_property_suite(seed: u64, count: usize) -> Result<RunReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = canonical_pair();
    let mut compatible = 0usize;
    let mut strict = 0usize;
    let mut violations = Vec::new();
    for i in 0..count {
        let (component, composite) = random_fixture(&mut rng)?;
        let compat = check_compatibility(&composite, &component, &pair)?;
        let compact = check_compactness(&composite, &component, &pair)?;
        let is_compact = !matches!(compact, Compactness::Violated);
        if compat.holds {
            compatible += 1;
            if !is_compact {
                violations.push(i);
            }
        } else if is_compact {
            strict += 1;
        }
    }

    let component = overlap_fixture(DEMO_OVERLAP)?;
    let native = compose_compact_native(&component, &pair, 2, 0.1, 0.5)?;
    let native_compat = check_compatibility(&native, &component, &pair)?;
    let native_compact = check_compactness(&native, &component, &pair)?;

    let mut report = RunReport::new(format!("props --seed {seed} --count {count}"));
    report.push(
        Check::new("compatibility-implies-compactness", violations.is_empty())
            .value("fixtures", count)
            .value("compatible", compatible)
            .value("compact_not_compatible", strict)
            .value("violations", &violations),
    );
    report.push(
        Check::new(
            "compactness-strictly-weaker",
            !native_compat.holds && matches!(native_compact, Compactness::Witness(_)),
        )
        .value(
            "compatibility_counterexample",
            &native_compat.counterexample,
        )
        .value("compactness", &native_compact),
    );
    Ok(report)
}

/// Classification plus reproduction audits for a loaded model.
pub fn check_model(model: &HVModel, tolerance: f64) -> Result<RunReport> {
    let mut report = RunReport::new("check");
    report.push(Check::new("load", true).value("classification", classify(model).to_string()));
    report.extend(reproduction_checks(model, tolerance)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_passes() {
        for name in ["toy", "segregate", "mix", "pbr", "additivity"] {
            let r = run_demo(name.parse().unwrap(), crate::TOL).unwrap();
            assert!(r.passed(), "{name}: {r:#?}");
        }
        assert!("bogus".parse::<DemoName>().is_err());
    }

    #[test]
    fn property_suite_passes_for_a_few_seeds() {
        for seed in [0, 1, 42] {
            let r = run_property_suite(seed, 120).unwrap();
            assert!(r.passed(), "{r:#?}");
        }
    }
}
