//! Optimal unambiguous filtering.
//!
//! Given a target state `rho0` and one or more states `rho1..rhos` that must
//! never be reported as the target, the measurement with the highest
//! detection probability `tr[Π0 rho0]` subject to `tr[Π0 rho_j] = 0` is
//!
//! ```text
//! Π1 = projector onto supp(rho1) ∪ ... ∪ supp(rhos)
//! Π0 = I - Π1
//! ```
//!
//! The detection probability is `P = 1 - Σ_k <Ψk|rho0|Ψk>` over an
//! orthonormal basis `{Ψk}` of that union. `P = 0` whenever the support of
//! `rho0` lies inside the union and `P = 1` when the supports are orthogonal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eig_hermitian, support_projector, trace_product, union_projector, ComplexMatrix,
    ComplexVector, MatrixJson, Projector,
};
use crate::states::DensityOperator;

/// Probabilities at or below this are sampled as exactly zero.
pub const ZERO_PROBABILITY_CUTOFF: f64 = 1e-10;
/// Largest completeness residual absorbed by the inconclusive outcome when sampling.
pub const SAMPLING_RESIDUAL_TOL: f64 = 1e-9;
/// False-alarm values at or below this count as zero.
pub const FALSE_ALARM_TOL: f64 = 1e-10;

/// Ordered measurement. Element 0 announces the target, element 1 is the
/// inconclusive ("other") outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = linalg::ensure_square(first)?;
        for e in &elements {
            if e.shape() != (d, d) {
                return Err(Error::dims(d, e.nrows().max(e.ncols())));
            }
            if !linalg::is_finite(e) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Povm { elements })
    }

    /// `{I - P, P}`: announce the target outside the range of `P`.
    pub fn from_rejection(rejection: &Projector) -> Self {
        Povm {
            elements: vec![
                rejection.complement().into_matrix(),
                rejection.matrix().clone(),
            ],
        }
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// `tr[Π_k rho]` for every element.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::dims(self.dim(), rho.dim()));
        }
        Ok(self
            .elements
            .iter()
            .map(|e| trace_product(e, rho.matrix()).re)
            .collect())
    }
}

/// Support dimensions: `n` of the union of all supports, `m` of the union of
/// the supports to be filtered out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportDims {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone)]
pub struct FilterResult {
    pub povm: Povm,
    /// `tr[Π0 rho0]`, clamped to `[0, 1]`.
    pub detection_probability: f64,
    /// Largest `tr[Π0 rho_j]` over the filtered-out states, as computed.
    pub false_alarm: f64,
    /// Not computed by [`pure_filter`], which avoids diagonalizing `rho0`.
    pub support_dims: Option<SupportDims>,
}

impl FilterResult {
    pub fn to_report(&self) -> FilterReport {
        FilterReport {
            p: self.detection_probability,
            false_alarm: self.false_alarm,
            n: self.support_dims.map(|s| s.n),
            m: self.support_dims.map(|s| s.m),
            povm: self.povm.elements().iter().map(MatrixJson::from).collect(),
            outcome_counts: None,
        }
    }
}

/// JSON shape of a [`FilterResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    #[serde(rename = "P")]
    pub p: f64,
    pub false_alarm: f64,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub povm: Vec<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub outcome_counts: Option<Vec<u64>>,
}

fn finish(
    rejection: Projector,
    rho0: &DensityOperator,
    others: &[&DensityOperator],
    support_dims: Option<SupportDims>,
) -> Result<FilterResult> {
    let povm = Povm::from_rejection(&rejection);
    let p = trace_product(&povm.elements[0], rho0.matrix()).re;
    let mut alarm = f64::NEG_INFINITY;
    for rho in others {
        alarm = alarm.max(false_alarm(&povm, rho)?);
    }
    Ok(FilterResult {
        povm,
        detection_probability: p.clamp(0.0, 1.0),
        false_alarm: alarm,
        support_dims,
    })
}

/// Optimal filter of `rho0` against a single state `rho1`.
pub fn optimal_filter(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    rel_tol: f64,
) -> Result<FilterResult> {
    optimal_multifilter(rho0, std::slice::from_ref(rho1), rel_tol)
}

/// Optimal filter of `rho0` against every state in `others`.
pub fn optimal_multifilter(
    rho0: &DensityOperator,
    others: &[DensityOperator],
    rel_tol: f64,
) -> Result<FilterResult> {
    if others.is_empty() {
        return Err(Error::EmptyOtherSet);
    }
    let d = rho0.dim();
    for rho in others {
        if rho.dim() != d {
            return Err(Error::dims(d, rho.dim()));
        }
    }
    let supports = others
        .iter()
        .map(|rho| support_projector(rho, rel_tol))
        .collect::<Result<Vec<_>>>()?;
    let rejection = if supports.len() == 1 {
        supports[0].clone()
    } else {
        union_projector(&supports, rel_tol)?
    };
    let target = support_projector(rho0, rel_tol)?;
    let everything = union_projector(&[target, rejection.clone()], rel_tol)?;
    let dims = SupportDims {
        n: everything.rank(),
        m: rejection.rank(),
    };
    let refs: Vec<&DensityOperator> = others.iter().collect();
    finish(rejection, rho0, &refs, Some(dims))
}

/// Optimal filter against a pure state `psi`: `Π0 = I - |ψ><ψ|`.
///
/// Skips every eigendecomposition, so it stays cheap on large two-mode Fock
/// spaces.
pub fn pure_filter(psi: &ComplexVector, rho0: &DensityOperator) -> Result<FilterResult> {
    if psi.len() != rho0.dim() {
        return Err(Error::dims(rho0.dim(), psi.len()));
    }
    let rejection = Projector::onto(psi)?;
    let rho1 = DensityOperator::from_pure(psi)?;
    finish(rejection, rho0, &[&rho1], None)
}

/// `tr[Π0 rho]`: probability of announcing the target on input `rho`.
pub fn false_alarm(povm: &Povm, rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != povm.dim() {
        return Err(Error::dims(povm.dim(), rho.dim()));
    }
    Ok(trace_product(&povm.elements[0], rho.matrix()).re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmDiagnostics {
    /// `max |Σ Π_k - I|`.
    pub completeness_residual: f64,
    /// Largest `max |Π_k - Π_k†|` over elements.
    pub hermitian_residual: f64,
    pub min_eigenvalues: Vec<f64>,
    pub max_eigenvalues: Vec<f64>,
    pub passed: bool,
}

/// Checks Hermiticity, `0 <= Π_k <= I` and completeness, each to `tol`.
pub fn validate_povm(povm: &Povm, tol: f64) -> PovmDiagnostics {
    let d = povm.dim();
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut herm: f64 = 0.0;
    let mut mins = Vec::with_capacity(povm.len());
    let mut maxs = Vec::with_capacity(povm.len());
    for e in &povm.elements {
        sum += e;
        herm = herm.max(linalg::hermitian_residual(e));
        match eig_hermitian(&linalg::hermitian_part(e)) {
            Ok(eig) => {
                maxs.push(eig.eigenvalues.first().copied().unwrap_or(0.0));
                mins.push(eig.eigenvalues.last().copied().unwrap_or(0.0));
            }
            Err(_) => {
                maxs.push(f64::NAN);
                mins.push(f64::NAN);
            }
        }
    }
    let completeness = linalg::max_abs_diff(&sum, &ComplexMatrix::identity(d, d));
    let passed = completeness <= tol
        && herm <= tol
        && mins.iter().all(|&l| l >= -tol)
        && maxs.iter().all(|&l| l <= 1.0 + tol);
    PovmDiagnostics {
        completeness_residual: completeness,
        hermitian_residual: herm,
        min_eigenvalues: mins,
        max_eigenvalues: maxs,
        passed,
    }
}

/// Sampling distribution over outcomes: probabilities at or below
/// [`ZERO_PROBABILITY_CUTOFF`] become zero, the rest are clamped to `[0, 1]`,
/// and the remaining residual goes to the inconclusive outcome.
pub fn sampling_distribution(povm: &Povm, rho: &DensityOperator) -> Result<Vec<f64>> {
    let mut probs = povm.probabilities(rho)?;
    for p in probs.iter_mut() {
        *p = if *p <= ZERO_PROBABILITY_CUTOFF {
            0.0
        } else {
            p.min(1.0)
        };
    }
    let total: f64 = probs.iter().sum();
    let residual = 1.0 - total;
    if !(residual.abs() <= SAMPLING_RESIDUAL_TOL) {
        return Err(Error::InvalidPovm(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    let sink = if probs.len() > 1 { 1 } else { 0 };
    probs[sink] = (probs[sink] + residual).max(0.0);
    Ok(probs)
}

/// Samples `trials` measurement outcomes by inverse CDF with a ChaCha8
/// generator seeded from `seed`. Returns counts per POVM element.
pub fn simulate_outcomes(
    povm: &Povm,
    rho: &DensityOperator,
    trials: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let probs = sampling_distribution(povm, rho)?;
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let last = probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..trials {
        let u: f64 = rng.random();
        let k = cdf
            .iter()
            .zip(&probs)
            .position(|(&c, &p)| p > 0.0 && u < c)
            .unwrap_or(last);
        counts[k] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarize, DepolarizingChannel};
    use crate::linalg::{max_abs_diff, DEFAULT_REL_TOL};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus3() -> ComplexVector {
        let h = 0.5f64.sqrt();
        ComplexVector::from_vec(vec![c(h, 0.0), c(h, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn orthogonal_states_are_detected_with_certainty() {
        let rho0 = DensityOperator::basis(2, 1).unwrap();
        let rho1 = DensityOperator::basis(2, 0).unwrap();
        let r = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        assert!((r.detection_probability - 1.0).abs() < 1e-14);
        let expect = Projector::diagonal(2, [1]).unwrap();
        assert!(max_abs_diff(&r.povm.elements()[0], expect.matrix()) < 1e-14);
        assert_eq!(r.support_dims, Some(SupportDims { n: 2, m: 1 }));
    }

    #[test]
    fn identical_supports_give_zero() {
        let rho = DensityOperator::maximally_mixed(2);
        let r = optimal_filter(&rho, &rho, DEFAULT_REL_TOL).unwrap();
        assert!(r.detection_probability < 1e-14);
        assert!(linalg::max_abs(&r.povm.elements()[0]) < 1e-14);
        assert_eq!(r.support_dims, Some(SupportDims { n: 2, m: 2 }));
    }

    #[test]
    fn depolarized_qubit() {
        let rho1 = DensityOperator::basis(2, 0).unwrap();
        let rho0 = depolarize(&rho1, &DepolarizingChannel::new(2, 0.5).unwrap()).unwrap();
        let r = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        assert!((r.detection_probability - 0.25).abs() < 1e-14);
        assert!(r.false_alarm.abs() < 1e-14);
    }

    #[test]
    fn multifilter_with_one_state_reduces_to_filter() {
        let rho1 = DensityOperator::from_pure(&plus3()).unwrap();
        let rho0 = DensityOperator::maximally_mixed(3);
        let a = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        let b = optimal_multifilter(&rho0, &[rho1], DEFAULT_REL_TOL).unwrap();
        assert!((a.detection_probability - b.detection_probability).abs() < 1e-15);
        assert!(max_abs_diff(&a.povm.elements()[0], &b.povm.elements()[0]) < 1e-15);
    }

    #[test]
    fn multifilter_examples() {
        let others = vec![
            DensityOperator::basis(3, 0).unwrap(),
            DensityOperator::basis(3, 1).unwrap(),
        ];
        let r = optimal_multifilter(
            &DensityOperator::basis(3, 2).unwrap(),
            &others,
            DEFAULT_REL_TOL,
        )
        .unwrap();
        assert!((r.detection_probability - 1.0).abs() < 1e-14);

        let others = vec![
            DensityOperator::basis(3, 0).unwrap(),
            DensityOperator::basis(3, 2).unwrap(),
        ];
        let rho0 = DensityOperator::from_pure(&plus3()).unwrap();
        let r = optimal_multifilter(&rho0, &others, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.support_dims.unwrap().m, 2);
        assert!((r.detection_probability - 0.5).abs() < 1e-14);
        for rho in &others {
            assert!(false_alarm(&r.povm, rho).unwrap() < 1e-14);
        }
    }

    #[test]
    fn multifilter_errors() {
        let rho = DensityOperator::basis(2, 0).unwrap();
        assert_eq!(
            optimal_multifilter(&rho, &[], DEFAULT_REL_TOL).unwrap_err(),
            Error::EmptyOtherSet
        );
        let other = DensityOperator::basis(3, 0).unwrap();
        assert!(matches!(
            optimal_filter(&rho, &other, DEFAULT_REL_TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn false_alarm_extremes() {
        let rho = DensityOperator::maximally_mixed(3);
        let zero = Povm::new(vec![
            ComplexMatrix::zeros(3, 3),
            ComplexMatrix::identity(3, 3),
        ])
        .unwrap();
        assert_eq!(false_alarm(&zero, &rho).unwrap(), 0.0);
        let all = Povm::new(vec![
            ComplexMatrix::identity(3, 3),
            ComplexMatrix::zeros(3, 3),
        ])
        .unwrap();
        assert!((false_alarm(&all, &rho).unwrap() - 1.0).abs() < 1e-15);
        assert!(false_alarm(&all, &DensityOperator::maximally_mixed(2)).is_err());
    }

    #[test]
    fn validate_povm_examples() {
        let p0 = Projector::diagonal(2, [0]).unwrap();
        let good = Povm::from_rejection(&p0);
        assert!(validate_povm(&good, 1e-10).passed);

        let over = p0.matrix().scale(1.5);
        let bad = Povm::new(vec![over.clone(), ComplexMatrix::identity(2, 2) - over]).unwrap();
        let diag = validate_povm(&bad, 1e-10);
        assert!(!diag.passed);
        assert!(diag.min_eigenvalues[1] < -0.4);

        let psi = ComplexVector::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.5, -0.4)]);
        let rho0 = DensityOperator::maximally_mixed(3);
        let pure = pure_filter(&psi, &rho0).unwrap();
        assert!(validate_povm(&pure.povm, 1e-10).passed);
    }

    #[test]
    fn pure_filter_matches_general_construction() {
        let psi = ComplexVector::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.5, -0.4)]);
        let rho1 = DensityOperator::from_pure(&psi).unwrap();
        let rho0 = depolarize(&rho1, &DepolarizingChannel::new(3, 0.3).unwrap()).unwrap();
        let a = pure_filter(&psi, &rho0).unwrap();
        let b = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        assert!(max_abs_diff(&a.povm.elements()[0], &b.povm.elements()[0]) < 1e-12);
        assert!((a.detection_probability - 0.2).abs() < 1e-14);
        assert!((b.detection_probability - 0.2).abs() < 1e-14);
        assert!(a.support_dims.is_none());
    }

    #[test]
    fn simulation_edge_cases() {
        let rho = DensityOperator::maximally_mixed(2);
        let all = Povm::new(vec![
            ComplexMatrix::identity(2, 2),
            ComplexMatrix::zeros(2, 2),
        ])
        .unwrap();
        assert_eq!(
            simulate_outcomes(&all, &rho, 1000, 7).unwrap(),
            vec![1000, 0]
        );

        let rho1 = DensityOperator::basis(2, 0).unwrap();
        let rho0 = depolarize(&rho1, &DepolarizingChannel::new(2, 0.5).unwrap()).unwrap();
        let r = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        assert_eq!(simulate_outcomes(&r.povm, &rho1, 10_000, 1).unwrap()[0], 0);

        let a = simulate_outcomes(&r.povm, &rho0, 5000, 42).unwrap();
        let b = simulate_outcomes(&r.povm, &rho0, 5000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 5000);

        let broken = Povm::new(vec![
            ComplexMatrix::identity(2, 2),
            ComplexMatrix::identity(2, 2),
        ])
        .unwrap();
        assert!(matches!(
            simulate_outcomes(&broken, &rho, 10, 0),
            Err(Error::InvalidPovm(_))
        ));
    }

    #[test]
    fn report_json_shape() {
        let rho0 = DensityOperator::basis(2, 1).unwrap();
        let rho1 = DensityOperator::basis(2, 0).unwrap();
        let r = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        let v = serde_json::to_value(r.to_report()).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["m"], 1);
        assert!((v["P"].as_f64().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(v["povm"].as_array().unwrap().len(), 2);
        assert!(v.get("outcome_counts").is_none());
    }
}
