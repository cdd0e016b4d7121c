//! Small-dimension complex linear algebra: pure states, tensor products,
//! projective measurements and Born probabilities.
//!
//! Everything here works on dense amplitude vectors of dimension at most a
//! few dozen. Tensor products use the big-endian index convention: the first
//! factor varies slowest, so `|0⟩ ⊗ |+⟩` has amplitudes `(1/√2, 1/√2, 0, 0)`.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOL;

/// Label reserved for the null "no result" outcome of an augmented spectrum.
/// It can never be an ordinary outcome label of a measurement.
pub const NO_SHOW: &str = "θ";

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A unit vector in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Argument(
                "a state needs at least one amplitude".into(),
            ));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL {
            return Err(Error::invariant(
                "unit norm",
                "state",
                format!("squared norm is {norm_sq}"),
            ));
        }
        Ok(PureState { amplitudes })
    }

    /// Real amplitudes, normalised only if already within tolerance.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// The computational basis vector `|index⟩` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Argument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { amplitudes })
    }

    pub fn zero() -> Self {
        Self::qubit(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::qubit(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn plus() -> Self {
        Self::qubit(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
    }

    pub fn minus() -> Self {
        Self::qubit(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        )
    }

    /// `(|0⟩ + i|1⟩)/√2`, the +1 eigenstate of Pauli Y.
    pub fn plus_i() -> Self {
        Self::qubit(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        )
    }

    /// `(|0⟩ - i|1⟩)/√2`, the -1 eigenstate of Pauli Y.
    pub fn minus_i() -> Self {
        Self::qubit(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
        )
    }

    fn qubit(a: Complex64, b: Complex64) -> Self {
        PureState {
            amplitudes: vec![a, b],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Entry-wise equality within `tol` (no global-phase quotient).
    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

impl TryFrom<Vec<Complex64>> for PureState {
    type Error = Error;

    fn try_from(value: Vec<Complex64>) -> Result<Self> {
        PureState::new(value)
    }
}

impl From<PureState> for Vec<Complex64> {
    fn from(value: PureState) -> Self {
        value.amplitudes
    }
}

/// Kronecker product of the factors, first factor slowest.
pub fn tensor_product(factors: &[PureState]) -> Result<PureState> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Argument("tensor product of an empty factor list".into()))?;
    let mut acc = first.amplitudes.clone();
    for factor in rest {
        acc = acc
            .iter()
            .flat_map(|a| factor.amplitudes.iter().map(move |b| a * b))
            .collect();
    }
    Ok(PureState { amplitudes: acc })
}

/// An opaque outcome label. Outcomes are indices, not eigenvalues.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(pub String);

impl Outcome {
    pub fn new(label: impl Into<String>) -> Self {
        Outcome(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Outcome {
    fn from(value: &str) -> Self {
        Outcome(value.to_owned())
    }
}

impl From<String> for Outcome {
    fn from(value: String) -> Self {
        Outcome(value)
    }
}

/// A subset of a measurement's spectrum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeSet(pub BTreeSet<Outcome>);

impl OutcomeSet {
    pub fn new<I, O>(members: I) -> Self
    where
        I: IntoIterator<Item = O>,
        O: Into<Outcome>,
    {
        OutcomeSet(members.into_iter().map(Into::into).collect())
    }

    pub fn singleton(outcome: impl Into<Outcome>) -> Self {
        Self::new([outcome.into()])
    }

    pub fn contains(&self, outcome: &Outcome) -> bool {
        self.0.contains(outcome)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Outcome> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &OutcomeSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("}")
    }
}

/// A nondegenerate projective measurement given by an orthonormal eigenbasis
/// and one distinct label per eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementRepr", into = "MeasurementRepr")]
pub struct ProjectiveMeasurement {
    basis: Vec<PureState>,
    outcomes: Vec<Outcome>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementRepr {
    outcomes: Vec<Outcome>,
    basis: Vec<PureState>,
}

impl TryFrom<MeasurementRepr> for ProjectiveMeasurement {
    type Error = Error;

    fn try_from(r: MeasurementRepr) -> Result<Self> {
        ProjectiveMeasurement::new(r.basis, r.outcomes)
    }
}

impl From<ProjectiveMeasurement> for MeasurementRepr {
    fn from(m: ProjectiveMeasurement) -> Self {
        MeasurementRepr {
            outcomes: m.outcomes,
            basis: m.basis,
        }
    }
}

impl ProjectiveMeasurement {
    /// A complete measurement: orthonormal basis spanning the space.
    pub fn new(basis: Vec<PureState>, outcomes: Vec<Outcome>) -> Result<Self> {
        let m = Self::partial(basis, outcomes)?;
        if m.basis.len() != m.dim() {
            return Err(Error::invariant(
                "basis spans the space",
                "measurement",
                format!("{} vectors in dimension {}", m.basis.len(), m.dim()),
            ));
        }
        Ok(m)
    }

    /// An orthonormal but possibly incomplete set of projectors, for
    /// diagnostics such as [`identity_resolution_residual`].
    pub fn partial(basis: Vec<PureState>, outcomes: Vec<Outcome>) -> Result<Self> {
        let Some(dim) = basis.first().map(PureState::dim) else {
            return Err(Error::Argument("measurement without basis vectors".into()));
        };
        if outcomes.len() != basis.len() {
            return Err(Error::Argument(format!(
                "{} outcome labels for {} basis vectors",
                outcomes.len(),
                basis.len()
            )));
        }
        if let Some(v) = basis.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        let distinct: BTreeSet<_> = outcomes.iter().collect();
        if distinct.len() != outcomes.len() {
            return Err(Error::invariant(
                "distinct outcome labels",
                "measurement",
                "duplicate label",
            ));
        }
        if outcomes.iter().any(|o| o.as_str() == NO_SHOW) {
            return Err(Error::invariant(
                "null outcome is reserved",
                "measurement",
                format!("`{NO_SHOW}` used as an ordinary outcome"),
            ));
        }
        let m = ProjectiveMeasurement { basis, outcomes };
        let gram = m.gram_residual();
        if gram > TOL {
            return Err(Error::invariant(
                "orthonormal basis",
                "measurement",
                format!("Gram matrix deviates from identity by {gram:e}"),
            ));
        }
        Ok(m)
    }

    /// Single-qubit Pauli measurement with outcomes `+1` (first) and `-1`.
    pub fn pauli_x() -> Self {
        Self::bivalent(PureState::plus(), PureState::minus())
    }

    pub fn pauli_y() -> Self {
        Self::bivalent(PureState::plus_i(), PureState::minus_i())
    }

    pub fn pauli_z() -> Self {
        Self::bivalent(PureState::zero(), PureState::one())
    }

    fn bivalent(up: PureState, down: PureState) -> Self {
        ProjectiveMeasurement {
            basis: vec![up, down],
            outcomes: vec![Outcome::new("+1"), Outcome::new("-1")],
        }
    }

    /// Computational basis of dimension `dim`, outcomes labelled `0..dim`.
    pub fn computational(dim: usize) -> Result<Self> {
        let basis = (0..dim)
            .map(|i| PureState::basis(dim, i))
            .collect::<Result<Vec<_>>>()?;
        let outcomes = (0..dim).map(|i| Outcome::new(i.to_string())).collect();
        Self::new(basis, outcomes)
    }

    /// Product measurement `M_1 ⊗ … ⊗ M_k`; outcome labels are the factor
    /// labels joined by commas, enumerated first factor slowest.
    pub fn product(factors: &[ProjectiveMeasurement]) -> Result<Self> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::Argument("product of an empty measurement list".into()))?;
        let mut basis = first.basis.clone();
        let mut outcomes: Vec<String> = first.outcomes.iter().map(|o| o.0.clone()).collect();
        for f in rest {
            let mut next_basis = Vec::with_capacity(basis.len() * f.basis.len());
            let mut next_outcomes = Vec::with_capacity(next_basis.capacity());
            for (v, o) in basis.iter().zip(&outcomes) {
                for (w, p) in f.basis.iter().zip(&f.outcomes) {
                    next_basis.push(tensor_product(&[v.clone(), w.clone()])?);
                    next_outcomes.push(format!("{o},{p}"));
                }
            }
            basis = next_basis;
            outcomes = next_outcomes;
        }
        Self::new(basis, outcomes.into_iter().map(Outcome).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn basis(&self) -> &[PureState] {
        &self.basis
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// The full spectrum `S(M)` as an outcome set.
    pub fn spectrum(&self) -> OutcomeSet {
        OutcomeSet(self.outcomes.iter().cloned().collect())
    }

    pub fn index_of(&self, outcome: &Outcome) -> Option<usize> {
        self.outcomes.iter().position(|o| o == outcome)
    }

    /// Checks that every member of `s` is one of this measurement's labels.
    pub fn check_outcome_set(&self, s: &OutcomeSet) -> Result<()> {
        match s.iter().find(|o| self.index_of(o).is_none()) {
            Some(o) => Err(Error::Argument(format!(
                "outcome `{o}` is not in the spectrum of this measurement"
            ))),
            None => Ok(()),
        }
    }

    /// Largest entry-wise deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = a.inner(b).expect("dimensions checked at construction");
                worst = worst.max((g - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Entry-wise comparison of basis vectors and labels.
    pub fn approx_eq(&self, other: &ProjectiveMeasurement, tol: f64) -> bool {
        self.outcomes == other.outcomes
            && self.basis.len() == other.basis.len()
            && self
                .basis
                .iter()
                .zip(&other.basis)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Born probability of every outcome, in outcome order.
    pub fn born_vector(&self, state: &PureState) -> Result<Vec<f64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        self.basis
            .iter()
            .map(|v| v.inner(state).map(|a| a.norm_sqr()))
            .collect()
    }
}

/// `Σ_{j∈s} |⟨basis_j|state⟩|²`.
pub fn born_probability(
    state: &PureState,
    meas: &ProjectiveMeasurement,
    s: &OutcomeSet,
) -> Result<f64> {
    meas.check_outcome_set(s)?;
    let probs = meas.born_vector(state)?;
    Ok(s.iter()
        .filter_map(|o| meas.index_of(o))
        .map(|j| probs[j])
        .sum())
}

/// Max-entry deviation of `Σ_j |b_j⟩⟨b_j|` from the identity matrix.
pub fn identity_resolution_residual(meas: &ProjectiveMeasurement) -> f64 {
    let d = meas.dim();
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            let sum: Complex64 = meas
                .basis
                .iter()
                .map(|b| b.amplitudes[r] * b.amplitudes[c].conj())
                .sum();
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((sum - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &PureState) -> Vec<f64> {
        v.amplitudes().iter().map(|a| a.re).collect()
    }

    #[test]
    fn tensor_examples() {
        let s = tensor_product(&[PureState::zero(), PureState::zero()]).unwrap();
        assert_eq!(re(&s), vec![1.0, 0.0, 0.0, 0.0]);

        let s = tensor_product(&[PureState::plus(), PureState::plus()]).unwrap();
        for a in re(&s) {
            assert!((a - 0.5).abs() < 1e-15);
        }

        let s = tensor_product(&[PureState::zero(), PureState::plus()]).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_eq!(re(&s), vec![h, h, 0.0, 0.0]);
    }

    #[test]
    fn tensor_of_nothing_is_an_error() {
        assert!(matches!(tensor_product(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn born_examples() {
        let z = ProjectiveMeasurement::pauli_z();
        let p = born_probability(&PureState::zero(), &z, &OutcomeSet::singleton("+1")).unwrap();
        assert_eq!(p, 1.0);
        let p = born_probability(&PureState::plus(), &z, &OutcomeSet::singleton("+1")).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn born_rejects_dimension_mismatch_and_foreign_labels() {
        let z = ProjectiveMeasurement::pauli_z();
        let two = tensor_product(&[PureState::zero(), PureState::zero()]).unwrap();
        assert!(matches!(
            born_probability(&two, &z, &OutcomeSet::singleton("+1")),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(born_probability(&PureState::zero(), &z, &OutcomeSet::singleton("7")).is_err());
    }

    #[test]
    fn identity_residual_examples() {
        assert_eq!(
            identity_resolution_residual(&ProjectiveMeasurement::pauli_z()),
            0.0
        );
        let single =
            ProjectiveMeasurement::partial(vec![PureState::zero()], vec![Outcome::new("0")])
                .unwrap();
        assert_eq!(identity_resolution_residual(&single), 1.0);
        assert!(ProjectiveMeasurement::new(vec![PureState::zero()], vec!["0".into()]).is_err());
    }

    #[test]
    fn rejects_bad_states_and_bases() {
        assert!(PureState::from_real(&[1.0, 1.0]).is_err());
        assert!(PureState::new(vec![]).is_err());
        let not_orthogonal = ProjectiveMeasurement::new(
            vec![PureState::zero(), PureState::plus()],
            vec!["a".into(), "b".into()],
        );
        assert!(not_orthogonal.is_err());
        let reserved = ProjectiveMeasurement::new(
            vec![PureState::zero(), PureState::one()],
            vec!["a".into(), NO_SHOW.into()],
        );
        assert!(reserved.is_err());
    }

    #[test]
    fn pauli_bases_are_complete() {
        for m in [
            ProjectiveMeasurement::pauli_x(),
            ProjectiveMeasurement::pauli_y(),
            ProjectiveMeasurement::pauli_z(),
        ] {
            assert!(identity_resolution_residual(&m) < 1e-15);
            assert!(ProjectiveMeasurement::new(m.basis().to_vec(), m.outcomes().to_vec()).is_ok());
        }
    }

    #[test]
    fn serde_round_trip_validates() {
        let json = serde_json::to_string(&PureState::plus_i()).unwrap();
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, PureState::plus_i());
        assert!(serde_json::from_str::<PureState>("[[1.0,0.0],[1.0,0.0]]").is_err());
    }
}
