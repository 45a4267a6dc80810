//! Constructs certified input triples on the finite model `Z/p^n`.
//!
//! For `CounterexampleExists` verdicts this builds, from the classifier's
//! recipe, a triple of exact distributions whose statistics are independent
//! although one distribution is not idempotent — then certifies the claim
//! with the exact verifier.  For `IdempotentForced` verdicts it builds the
//! canonical independent idempotent triple the verdict predicts.
//!
//! Every template follows the same scheme on the dual side: two of the
//! three characteristic functions are subgroup indicators, the third is a
//! non-idempotent inner function supported on a torsion subgroup `Y_(p^m)`
//! (the `p^m`-torsion points) and extended by zero.  On the distribution
//! side the inner function corresponds to a `p^m`-periodic density, built
//! exactly by [`lift_periodic`].

use crate::classifier::{classify, Template, Verdict, WitnessRecipe};
use crate::finite::{haar_on, CyclicGroup, FiniteDistribution, FiniteError};
use crate::forms::NormalizedForms;
use crate::padic::pow_u64;
use crate::verifier::{independence_exact, FiniteForms, IndependenceReport, VerifierError};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum WitnessError {
    #[error("verdict {0:?} does not admit this construction")]
    WrongVerdict(Verdict),
    #[error("constructed triple failed certification: {reason}")]
    CertificationFailed { reason: String },
    #[error("inner distribution must live on Z/{expected_prime}^{expected_exponent}")]
    InvalidInner {
        expected_prime: u64,
        expected_exponent: u32,
    },
    #[error(transparent)]
    Classifier(#[from] crate::classifier::ClassifierError),
    #[error(transparent)]
    Finite(#[from] FiniteError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

/// A certified counterexample: input distributions making the statistics
/// independent while `distributions[non_idempotent_index - 1]` is not
/// idempotent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessBundle {
    pub recipe: WitnessRecipe,
    pub model_exponent: u32,
    pub forms: FiniteForms,
    pub distributions: Vec<FiniteDistribution>,
    /// 1-based position of the non-idempotent distribution.
    pub non_idempotent_index: usize,
    pub report: IndependenceReport,
}

/// A certified forced-verdict example: the canonical independent triple in
/// which every distribution is idempotent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForcedExample {
    pub model_exponent: u32,
    pub forms: FiniteForms,
    pub distributions: Vec<FiniteDistribution>,
    pub report: IndependenceReport,
}

/// Default model exponent: two more than the largest coefficient valuation,
/// so every torsion subgroup a construction mentions is proper and
/// nontrivial.
pub fn model_exponent(nf: &NormalizedForms) -> u32 {
    let (k1, k2, l1, l2) = nf.exponents();
    (k1.max(k2).max(l1).max(l2).max(0) as u32) + 2
}

/// The symmetric three-atom non-idempotent distribution
/// `(1/2)E_0 + (1/4)E_1 + (1/4)E_{-1}` on `Z/p^m`.  When that group has
/// order 2 the symmetric version degenerates to an idempotent, so
/// `(3/4)E_0 + (1/4)E_1` is used instead.
pub fn three_atom_inner(p: u64, m: u32) -> FiniteDistribution {
    scaled_three_atom(p, m, 0)
}

/// Non-idempotent distribution on `Z/p^l` whose characteristic function is
/// exactly 1 on the index-`p^(l-k)` subgroup (the image of `Y_(p^k)` inside
/// `Y_(p^l)`): atoms at `0, p^k, -p^k`.
pub fn flat_inner(p: u64, l: u32, k: u32) -> FiniteDistribution {
    assert!(k < l, "the flat construction needs k < l");
    scaled_three_atom(p, l, k)
}

fn scaled_three_atom(p: u64, m: u32, atom_exponent: u32) -> FiniteDistribution {
    let group = CyclicGroup::new(p, m);
    let ord = group.order();
    let x0 = pow_u64(p, atom_exponent) % ord;
    let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let atoms: Vec<(u64, BigRational)> = if (x0 + x0) % ord == 0 {
        // x0 and -x0 coincide: the symmetric version would be the
        // idempotent (1/2, 1/2); fall back to an asymmetric mix.
        vec![(0, rat(3, 4)), (x0, rat(1, 4))]
    } else {
        vec![(0, rat(1, 2)), (x0, rat(1, 4)), (ord - x0, rat(1, 4))]
    };
    FiniteDistribution::from_atoms(group, &atoms).expect("weights sum to 1")
}

/// Lifts a distribution on `Z/p^m` to the `p^m`-periodic distribution on a
/// larger group `Z/p^n`: `probs[x] = inner[x mod p^m] / p^(n-m)`.  Its
/// characteristic function is the inner one extended by zero off the
/// `p^m`-torsion subgroup of the dual.
pub fn lift_periodic(inner: &FiniteDistribution, target: CyclicGroup) -> FiniteDistribution {
    let p = target.prime();
    assert_eq!(inner.group().prime(), p);
    let m = inner.group().exponent();
    assert!(m <= target.exponent());
    let period = inner.group().order();
    let copies = BigRational::new(
        BigInt::from(1),
        BigInt::from(pow_u64(p, target.exponent() - m)),
    );
    let probs = (0..target.order())
        .map(|x| &inner.probs()[(x % period) as usize] * &copies)
        .collect();
    FiniteDistribution::new(target, probs).expect("mass is preserved")
}

/// Builds and certifies the witness triple for a `CounterexampleExists`
/// instance, using the classifier's own recipe.
pub fn build_witness(nf: &NormalizedForms) -> Result<WitnessBundle, WitnessError> {
    build_witness_with(nf, None, None)
}

/// [`build_witness`] with an optional model-exponent override and an
/// optional caller-supplied inner distribution replacing the three-atom
/// default (it must live on `Z/p^level` for the recipe's level and is
/// still subject to certification).
pub fn build_witness_with(
    nf: &NormalizedForms,
    exponent_override: Option<u32>,
    inner_override: Option<&FiniteDistribution>,
) -> Result<WitnessBundle, WitnessError> {
    let cls = classify(nf)?;
    if cls.verdict != Verdict::CounterexampleExists {
        return Err(WitnessError::WrongVerdict(cls.verdict));
    }
    let recipe = cls.recipe.expect("counterexample verdicts carry a recipe");
    let n = exponent_override.unwrap_or_else(|| model_exponent(nf));
    let min_n = (recipe.level.max(recipe.k + 1) as u32) + 1;
    let n = n.max(min_n);
    let p = nf.prime();
    let group = CyclicGroup::new(p, n);

    let level = recipe.level as u32;
    if let Some(inner) = inner_override {
        if inner.group() != CyclicGroup::new(p, level) {
            return Err(WitnessError::InvalidInner {
                expected_prime: p,
                expected_exponent: level,
            });
        }
    }
    let non_idem = match (recipe.template, inner_override) {
        (_, Some(inner)) => lift_periodic(inner, group),
        (Template::DeepCaseB, None) => {
            lift_periodic(&flat_inner(p, level, recipe.k as u32), group)
        }
        (_, None) => lift_periodic(&three_atom_inner(p, level), group),
    };
    let uniform = FiniteDistribution::uniform(group);
    let k = recipe.k as u32;

    // Template bodies in oriented coordinates (the arrangement the
    // construction was derived for).
    let (mut triple, oriented_idx) = match recipe.template {
        Template::OneUnitRow2 | Template::RowPairUnits | Template::Shape2Row3NonUnit => {
            ([non_idem, uniform.clone(), uniform], 0)
        }
        Template::Shape2Row2NonUnit => ([uniform.clone(), non_idem, uniform], 1),
        Template::ColumnPairUnits => {
            let h = haar_on(group.subgroup(1));
            ([h.clone(), h, non_idem], 2)
        }
        Template::DeepCaseA => (
            [
                haar_on(group.subgroup(k + 1)),
                haar_on(group.subgroup(1)),
                non_idem,
            ],
            2,
        ),
        Template::DeepCaseB => ([non_idem, uniform.clone(), uniform], 0),
    };

    // Undo the column swap: the oriented variables 2 and 3 are the raw
    // variables 3 and 2.  (The row swap exchanges statistics, not inputs,
    // and independence of a set of statistics is order-free.)
    let mut idx = oriented_idx;
    if recipe.col_swap {
        triple.swap(1, 2);
        idx = match idx {
            1 => 2,
            2 => 1,
            other => other,
        };
    }

    let forms = FiniteForms::from_normalized(nf, n)?;
    let report = independence_exact(&forms, [&triple[0], &triple[1], &triple[2]])?;
    if !report.independent {
        return Err(WitnessError::CertificationFailed {
            reason: format!(
                "triple is not independent (cell {:?}, template {:?})",
                report.failing_cell, recipe.template
            ),
        });
    }
    if triple[idx].is_idempotent() {
        return Err(WitnessError::CertificationFailed {
            reason: format!(
                "designated distribution {} is idempotent (template {:?})",
                idx + 1,
                recipe.template
            ),
        });
    }
    Ok(WitnessBundle {
        recipe,
        model_exponent: n,
        forms,
        distributions: triple.to_vec(),
        non_idempotent_index: idx + 1,
        report,
    })
}

/// Builds and certifies the canonical independent idempotent triple for an
/// `IdempotentForced` instance: all-uniform when `q = 0`, and
/// `(Haar on p^k Z, uniform, uniform)` in the deep forced case `q = k`.
pub fn forced_instance_examples(nf: &NormalizedForms) -> Result<ForcedExample, WitnessError> {
    let cls = classify(nf)?;
    if cls.verdict != Verdict::IdempotentForced {
        return Err(WitnessError::WrongVerdict(cls.verdict));
    }
    let n = model_exponent(nf);
    let group = CyclicGroup::new(nf.prime(), n);
    let uniform = FiniteDistribution::uniform(group);
    let triple = if cls.q == Some(0) {
        vec![uniform.clone(), uniform.clone(), uniform]
    } else {
        vec![
            haar_on(group.subgroup(cls.k as u32)),
            uniform.clone(),
            uniform,
        ]
    };
    let forms = FiniteForms::from_normalized(nf, n)?;
    let report = independence_exact(&forms, [&triple[0], &triple[1], &triple[2]])?;
    if !report.independent {
        return Err(WitnessError::CertificationFailed {
            reason: format!(
                "canonical idempotent triple not independent (cell {:?})",
                report.failing_cell
            ),
        });
    }
    Ok(ForcedExample {
        model_exponent: n,
        forms,
        distributions: triple,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::char_fn;
    use crate::forms::{normalize, RawForms};
    use num_complex::Complex64;

    fn normalized(text: &str, p: u64) -> NormalizedForms {
        normalize(&RawForms::parse(text, p).unwrap()).unwrap()
    }

    #[test]
    fn three_atom_inner_transform_values() {
        // [DERIVED] order-2 group: char of (3/4, 1/4) is (1, 1/2).
        let f = char_fn(&three_atom_inner(2, 1));
        assert!((f.values()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((f.values()[1] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        // [DERIVED] order-3 group: values (1, 1/4, 1/4).
        let f3 = char_fn(&three_atom_inner(3, 1));
        for y in 1..3 {
            assert!((f3.values()[y] - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        }
        assert!(!three_atom_inner(2, 1).is_idempotent());
        assert!(!three_atom_inner(3, 2).is_idempotent());
    }

    #[test]
    fn flat_inner_is_one_exactly_on_subgroup() {
        // Atoms at 0, +-p^k on Z/p^l: the transform equals 1 exactly on
        // the index-p^(l-k) subgroup.
        for (p, l, k) in [(3u64, 2u32, 1u32), (2, 3, 1), (2, 2, 1), (5, 2, 1)] {
            let mu = flat_inner(p, l, k);
            let f = char_fn(&mu);
            let sub = mu.group().subgroup(l - k);
            for y in 0..mu.group().order() {
                let is_one = (f.values()[y as usize] - Complex64::new(1.0, 0.0)).norm() < 1e-9;
                assert_eq!(is_one, sub.contains(y), "p={p} l={l} k={k} y={y}");
            }
            assert!(!mu.is_idempotent());
        }
    }

    #[test]
    fn lift_periodic_matches_layer_example() {
        // [DERIVED] (3/4, 1/4) on Z/2 lifts to (3/8, 1/8, 3/8, 1/8) on Z/4.
        let lifted = lift_periodic(&three_atom_inner(2, 1), CyclicGroup::new(2, 2));
        let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(
            lifted.probs().to_vec(),
            vec![rat(3, 8), rat(1, 8), rat(3, 8), rat(1, 8)]
        );
        // Transform is the inner transform extended by zero.
        let f = char_fn(&lifted);
        assert!((f.values()[1]).norm() < 1e-12);
        assert!((f.values()[3]).norm() < 1e-12);
        assert!((f.values()[2] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn deep_case_a_example_certifies() {
        // [DERIVED] p=3, coefficients (3, 9, 6, 18): q = k = 1, deep
        // construction A: mu1 = Haar on p^2 Z, mu2 = Haar on p Z, mu3
        // non-idempotent on the p-torsion layer; model exponent 4.
        let nf = normalized("1,1,1;1,3,9;1,6,18", 3);
        let bundle = build_witness(&nf).unwrap();
        assert_eq!(bundle.recipe.template, Template::DeepCaseA);
        assert_eq!(bundle.model_exponent, 4);
        assert_eq!(bundle.non_idempotent_index, 3);
        assert!(bundle.report.independent);
        assert!(bundle.distributions[0].is_idempotent());
        assert!(bundle.distributions[1].is_idempotent());
        assert!(!bundle.distributions[2].is_idempotent());
    }

    #[test]
    fn one_unit_example_certifies() {
        // [DERIVED] p=2, unit-grid failure with a single unit coefficient:
        // mu1 non-idempotent, mu2 = mu3 uniform.
        let nf = normalized("1,1,1;1,3,2;1,2,2", 2);
        let bundle = build_witness(&nf).unwrap();
        assert_eq!(bundle.non_idempotent_index, 1);
        assert!(bundle.report.independent);
    }

    #[test]
    fn deep_case_b_example_certifies() {
        // [DERIVED] p=3, coefficients (3, 6, 9, 18), valuations (1,1,2,2):
        // det = 54 - 54 - 3 + 6 + 9 - 18 = -6, so q = k = 1; no orientation
        // puts the minimum in both row-2 slots, so construction B fires
        // with a flat inner function at level 2.
        let nf = normalized("1,1,1;1,3,6;1,9,18", 3);
        let cls = classify(&nf).unwrap();
        assert_eq!(cls.verdict, Verdict::CounterexampleExists);
        let bundle = build_witness(&nf).unwrap();
        assert_eq!(bundle.recipe.template, Template::DeepCaseB);
        assert!(bundle.report.independent);
        assert!(!bundle.distributions[bundle.non_idempotent_index - 1].is_idempotent());
    }

    #[test]
    fn witness_certifies_at_larger_model_too() {
        // Model-size monotonicity, spot-checked one level up.
        let nf = normalized("1,1,1;1,3,2;1,2,2", 2);
        let n = model_exponent(&nf);
        let bundle = build_witness_with(&nf, Some(n + 1), None).unwrap();
        assert_eq!(bundle.model_exponent, n + 1);
        assert!(bundle.report.independent);
    }

    #[test]
    fn custom_inner_is_certified() {
        let nf = normalized("1,1,1;1,3,2;1,2,2", 2);
        // Valid alternative inner distribution on Z/2: (5/8, 3/8).
        let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let inner = FiniteDistribution::from_atoms(
            CyclicGroup::new(2, 1),
            &[(0, rat(5, 8)), (1, rat(3, 8))],
        )
        .unwrap();
        let bundle = build_witness_with(&nf, None, Some(&inner)).unwrap();
        assert!(bundle.report.independent);
        // An idempotent "inner" must be rejected at certification.
        let idem = FiniteDistribution::point_mass(CyclicGroup::new(2, 1), 0);
        assert!(matches!(
            build_witness_with(&nf, None, Some(&idem)),
            Err(WitnessError::CertificationFailed { .. })
        ));
        // Wrong-group inner is rejected up front.
        let wrong = FiniteDistribution::uniform(CyclicGroup::new(2, 3));
        assert!(matches!(
            build_witness_with(&nf, None, Some(&wrong)),
            Err(WitnessError::InvalidInner { .. })
        ));
    }

    #[test]
    fn forced_examples_certify() {
        // q = 0 forced instance: all-uniform triple.
        let nf = normalized("1,1,1;1,2,3;1,3,2", 5);
        let ex = forced_instance_examples(&nf).unwrap();
        assert!(ex.report.independent);
        assert!(ex.distributions.iter().all(|m| m.is_idempotent()));
        // Deep forced instance (q = k = 1, pattern case 5): Haar component.
        let nf2 = normalized("1,1,1;1,3,9;1,9,3", 3);
        let ex2 = forced_instance_examples(&nf2).unwrap();
        assert!(ex2.report.independent);
        assert_eq!(ex2.distributions[0].support().len() as u64, 3u64.pow(ex2.model_exponent - 1));
        // Counterexample instances are rejected.
        let nf3 = normalized("1,1,1;1,3,2;1,2,2", 2);
        assert!(matches!(
            forced_instance_examples(&nf3),
            Err(WitnessError::WrongVerdict(_))
        ));
    }

    #[test]
    fn witness_rejected_for_forced_instance() {
        let nf = normalized("1,1,1;1,3,9;1,9,3", 3);
        assert!(matches!(
            build_witness(&nf),
            Err(WitnessError::WrongVerdict(Verdict::IdempotentForced))
        ));
    }
}
