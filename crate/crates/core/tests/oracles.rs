//! Library results against values computed here with plain real arithmetic.

use hvkit::composer::{canonical_pair, compose_independent, overlap_fixture};
use hvkit::demo::prism_fixture;
use hvkit::pbrcheck::{build_product_states, builtin_inefficiency, pbr_basis_l2};
use hvkit::qcore::{born_probability, OutcomeSet, ProjectiveMeasurement, PureState};
use hvkit::TOL;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
const ZERO: [f64; 2] = [1.0, 0.0];
const ONE: [f64; 2] = [0.0, 1.0];
const PLUS: [f64; 2] = [H, H];
const MINUS: [f64; 2] = [H, -H];

fn kron(a: [f64; 2], b: [f64; 2]) -> [f64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

fn sum_scaled(x: [f64; 4], y: [f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| H * (x[i] + y[i]))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn oracle_basis() -> [[f64; 4]; 4] {
    [
        sum_scaled(kron(ZERO, ONE), kron(ONE, ZERO)),
        sum_scaled(kron(ZERO, MINUS), kron(ONE, PLUS)),
        sum_scaled(kron(PLUS, ONE), kron(MINUS, ZERO)),
        sum_scaled(kron(PLUS, MINUS), kron(MINUS, PLUS)),
    ]
}

fn oracle_products() -> [[f64; 4]; 4] {
    [
        kron(ZERO, ZERO),
        kron(ZERO, PLUS),
        kron(PLUS, ZERO),
        kron(PLUS, PLUS),
    ]
}

fn real_parts(s: &PureState) -> Vec<f64> {
    assert!(s.amplitudes().iter().all(|a| a.im.abs() <= TOL));
    s.amplitudes().iter().map(|a| a.re).collect()
}

#[test]
fn basis_matches_oracle_vectors() {
    let m = pbr_basis_l2().unwrap();
    for (got, want) in m.basis().iter().zip(oracle_basis()) {
        let got = real_parts(got);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= TOL, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn oracle_gram_matrix_is_identity() {
    let b = oracle_basis();
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot(&b[i], &b[j]) - want).abs() <= TOL);
        }
    }
}

#[test]
fn born_table_of_products() {
    // P(φ_x, j) = ⟨Φ_j|φ_x⟩², rows x = 00, 0+, +0, ++.
    let expected = [
        [0.0, 0.25, 0.25, 0.5],
        [0.25, 0.0, 0.5, 0.25],
        [0.25, 0.5, 0.0, 0.25],
        [0.5, 0.25, 0.25, 0.0],
    ];
    let basis = oracle_basis();
    let m = pbr_basis_l2().unwrap();
    let products = build_product_states(&PureState::zero(), &PureState::plus(), 2).unwrap();
    for (x, phi) in oracle_products().iter().enumerate() {
        assert_eq!(real_parts(&products[x]), phi.to_vec());
        for j in 0..4 {
            let oracle = dot(&basis[j], phi).powi(2);
            assert!((oracle - expected[x][j]).abs() <= TOL);
            let lib = born_probability(
                &products[x],
                &m,
                &OutcomeSet::singleton((j + 1).to_string()),
            )
            .unwrap();
            assert!((lib - expected[x][j]).abs() <= TOL, "x={x} j={j}");
        }
    }
}

#[test]
fn single_qubit_born_values() {
    let cases = [
        (
            PureState::plus(),
            ProjectiveMeasurement::pauli_z(),
            "+1",
            0.5,
        ),
        (
            PureState::zero(),
            ProjectiveMeasurement::pauli_z(),
            "+1",
            1.0,
        ),
        (
            PureState::zero(),
            ProjectiveMeasurement::pauli_x(),
            "-1",
            0.5,
        ),
        (
            PureState::plus_i(),
            ProjectiveMeasurement::pauli_y(),
            "+1",
            1.0,
        ),
        (
            PureState::plus_i(),
            ProjectiveMeasurement::pauli_x(),
            "+1",
            0.5,
        ),
        (
            PureState::minus(),
            ProjectiveMeasurement::pauli_x(),
            "+1",
            0.0,
        ),
    ];
    for (state, meas, o, want) in cases {
        let p = born_probability(&state, &meas, &OutcomeSet::singleton(o)).unwrap();
        assert!((p - want).abs() <= TOL, "{o}: {p} != {want}");
    }
}

#[test]
fn prism_no_show_equals_closed_form() {
    for q in [0.1, 0.25, 0.5] {
        let (composite, scenario) = prism_fixture(q).unwrap();
        let r = builtin_inefficiency(&composite, &scenario).unwrap();
        let want = 1.0 - (1.0 - q) * (1.0 - q);
        for (id, v) in &r.per_preparation {
            assert!((v - want).abs() <= TOL, "q={q} {id}: {v} != {want}");
        }
    }
    let (_, scenario) = prism_fixture(0.25).unwrap();
    let r = builtin_inefficiency(&prism_fixture(0.25).unwrap().0, &scenario).unwrap();
    assert!((r.worst - 0.4375).abs() <= TOL);
}

#[test]
fn common_support_is_q_to_the_l() {
    let pair = canonical_pair();
    for q in [0.1, 0.25, 0.5, 1.0] {
        let component = overlap_fixture(q).unwrap();
        for l in 1..=3 {
            let c = compose_independent(&component, &pair, l).unwrap();
            let want = q.powi(l as i32);
            assert!(
                (c.common_support_measure() - want).abs() <= TOL,
                "q={q} L={l}"
            );
        }
    }
}
