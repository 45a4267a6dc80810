//! Decision tree over canonical form matrices.
//!
//! For a nonsingular canonical matrix the classifier decides, purely from
//! exact valuation data, which regime independence of the three forms
//! imposes on the underlying distributions:
//!
//! * [`Verdict::IdempotentForced`] — all three must be shifted Haar
//!   measures of compact subgroups;
//! * [`Verdict::DegenerateForced`] — all three must be point masses;
//! * [`Verdict::CounterexampleExists`] — a non-idempotent admissible triple
//!   exists, and a [`WitnessRecipe`] names the construction template that
//!   the witness module instantiates and certifies.
//!
//! Writing `q` for the valuation of the determinant and `k` for the minimal
//! valuation among the four free entries, the tree is: `q = 0` forces
//! idempotents exactly when every row and column of the matrix carries at
//! least two valuation-zero entries; `q > 0` with some free entry a unit
//! forces degenerates; otherwise (Shape1 only) `q > k` forces degenerates,
//! `q = k` forces idempotents precisely for the exponent patterns
//! `k1 = l2 = k` or `k2 = l1 = k`, and every remaining pattern admits a
//! counterexample.

use crate::forms::{det_decompose, FormsError, NormalizedForms, Shape};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("operation precondition violated: {0}")]
    PreconditionViolation(String),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    IdempotentForced,
    DegenerateForced,
    CounterexampleExists,
    Singular,
}

/// Construction template for a counterexample witness, in the oriented
/// coordinates described by `col_swap`/`row_swap` (see [`WitnessRecipe`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Template {
    /// Shape1, q = 0: exactly one free entry is a unit (oriented to d1).
    /// mu1 non-idempotent on the order-p torsion layer, mu2 = mu3 uniform.
    OneUnitRow2,
    /// Shape1, q = 0: row 2 entries are units, row 3 entries are not.
    /// Same distributions as [`Template::OneUnitRow2`].
    RowPairUnits,
    /// q = 0: column-2 entries d1, e1 are units, column-3 entries are not
    /// (used for both shapes).  mu1 = mu2 = Haar on the index-p subgroup,
    /// mu3 non-idempotent.
    ColumnPairUnits,
    /// Shape2, q = 0: d1, d2 non-units.  mu2 non-idempotent, mu1 = mu3
    /// uniform.
    Shape2Row2NonUnit,
    /// Shape2, q = 0: e1, e2 non-units.  mu1 non-idempotent, mu2 = mu3
    /// uniform.
    Shape2Row3NonUnit,
    /// Shape1, q = k > 0, oriented so k1 = l1 = k: mu1 and mu2 Haar on
    /// subgroups of index p^(k+1) and p, mu3 non-idempotent.
    DeepCaseA,
    /// Shape1, q = k > 0, oriented so k1 = k < l1: mu1 non-idempotent,
    /// supported on the p^l1-torsion and flat on the p^k-torsion,
    /// mu2 = mu3 uniform.
    DeepCaseB,
}

/// How to build a certified counterexample.
///
/// `col_swap` renames variables x2 <-> x3 (matrix columns 2 and 3);
/// `row_swap` exchanges forms L2 and L3.  The template preconditions hold
/// after applying the recorded swaps to the canonical matrix; the finished
/// distributions are swapped back so they certify against the unmodified
/// canonical matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecipe {
    pub template: Template,
    pub col_swap: bool,
    pub row_swap: bool,
    /// Minimal free-entry valuation of the (unswapped) matrix.
    pub k: i64,
    /// Torsion level p^level supporting the non-idempotent distribution.
    pub level: i64,
}

/// Classifier output: verdict plus the exact quantities that drove it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub shape: Shape,
    pub verdict: Verdict,
    /// Valuation of the determinant; `None` when singular.
    pub q: Option<i64>,
    /// Minimal valuation among the four free entries.
    pub k: i64,
    /// Free-entry valuations (k1, k2, l1, l2).
    pub exponents: (i64, i64, i64, i64),
    pub recipe: Option<WitnessRecipe>,
    /// Conditions evaluated along the decision path, in order.
    pub trace: Vec<(String, bool)>,
}

/// True when every row and every column of the canonical matrix contains at
/// least two valuation-zero entries (the literal 1s count).
pub fn unit_grid_condition(nf: &NormalizedForms) -> bool {
    let u1 = nf.delta1.is_unit();
    let u2 = nf.delta2.is_unit();
    let v1 = nf.eps1.is_unit();
    let v2 = nf.eps2.is_unit();
    match nf.shape() {
        // Rows 2, 3 and columns 2, 3 each hold exactly one literal 1.
        Shape::Shape1 => (u1 || u2) && (v1 || v2) && (u1 || v1) && (u2 || v2),
        // Columns 1 and 2 hold two literal 1s already.
        Shape::Shape2 => (u1 || u2) && (v1 || v2) && (u2 || v2),
    }
}

/// Exponent tuple (k1, l1, k2, l2) images under the four symmetries: identity,
/// row swap (forms L2 <-> L3), column swap (variables x2 <-> x3), both.
fn orientations(k1: i64, l1: i64, k2: i64, l2: i64) -> [(bool, bool, (i64, i64, i64, i64)); 4] {
    [
        (false, false, (k1, l1, k2, l2)),
        (true, false, (l1, k1, l2, k2)),
        (false, true, (k2, l2, k1, l1)),
        (true, true, (l2, k2, l1, k1)),
    ]
}

pub fn classify(nf: &NormalizedForms) -> Result<Classification, ClassifierError> {
    let (k1, k2, l1, l2) = nf.exponents();
    let k = nf.min_exponent();
    let mut trace: Vec<(String, bool)> = Vec::new();
    let push = |t: &mut Vec<(String, bool)>, name: &str, v: bool| {
        t.push((name.to_string(), v));
        v
    };

    let dd = match det_decompose(nf) {
        Ok(dd) => dd,
        Err(FormsError::SingularForms) => {
            trace.push(("nonsingular".to_string(), false));
            return Ok(Classification {
                shape: nf.shape(),
                verdict: Verdict::Singular,
                q: None,
                k,
                exponents: (k1, k2, l1, l2),
                recipe: None,
                trace,
            });
        }
        Err(e) => return Err(e.into()),
    };
    push(&mut trace, "nonsingular", true);
    let q = dd.q;

    let done = |verdict: Verdict, recipe: Option<WitnessRecipe>, trace: Vec<(String, bool)>| {
        Ok(Classification {
            shape: nf.shape(),
            verdict,
            q: Some(q),
            k,
            exponents: (k1, k2, l1, l2),
            recipe,
            trace,
        })
    };

    if push(&mut trace, "q_zero", q == 0) {
        if push(&mut trace, "unit_grid", unit_grid_condition(nf)) {
            return done(Verdict::IdempotentForced, None, trace);
        }
        let recipe = zero_q_recipe(nf, k)?;
        return done(Verdict::CounterexampleExists, Some(recipe), trace);
    }

    // q > 0.
    let u = [
        nf.delta1.is_unit(),
        nf.delta2.is_unit(),
        nf.eps1.is_unit(),
        nf.eps2.is_unit(),
    ];
    if push(&mut trace, "some_free_unit", u.iter().any(|&b| b)) {
        return done(Verdict::DegenerateForced, None, trace);
    }
    // All four free entries are non-units.  For Shape2 the determinant is
    // then congruent to -1 mod p, contradicting q > 0.
    if nf.shape() == Shape::Shape2 {
        return Err(ClassifierError::PreconditionViolation(
            "Shape2 with all free entries non-units cannot have q > 0".into(),
        ));
    }
    debug_assert!(q >= k, "determinant valuation below minimal exponent");
    if push(&mut trace, "q_gt_k", q > k) {
        return done(Verdict::DegenerateForced, None, trace);
    }
    // q = k > 0.
    let forced = (k1 == k && l2 == k) || (k2 == k && l1 == k);
    if push(&mut trace, "forced_pattern", forced) {
        return done(Verdict::IdempotentForced, None, trace);
    }
    let recipe = deep_recipe(k1, k2, l1, l2, k);
    done(Verdict::CounterexampleExists, Some(recipe), trace)
}

/// Template selection for q = 0 instances failing the unit grid.
fn zero_q_recipe(nf: &NormalizedForms, k: i64) -> Result<WitnessRecipe, ClassifierError> {
    let u1 = nf.delta1.is_unit();
    let u2 = nf.delta2.is_unit();
    let v1 = nf.eps1.is_unit();
    let v2 = nf.eps2.is_unit();
    let mk = |template, col_swap, row_swap| WitnessRecipe {
        template,
        col_swap,
        row_swap,
        k,
        level: 1,
    };
    match nf.shape() {
        Shape::Shape1 => {
            let units = [u1, u2, v1, v2];
            match units.iter().filter(|&&b| b).count() {
                // With q = 0 at least one free entry must be a unit, and
                // with three or more the grid cannot fail.
                1 => {
                    // Move the single unit to the d1 slot.
                    let (col_swap, row_swap) = match units {
                        [true, _, _, _] => (false, false),
                        [_, true, _, _] => (true, false),
                        [_, _, true, _] => (false, true),
                        _ => (true, true),
                    };
                    Ok(mk(Template::OneUnitRow2, col_swap, row_swap))
                }
                2 => {
                    if u1 && u2 {
                        Ok(mk(Template::RowPairUnits, false, false))
                    } else if v1 && v2 {
                        Ok(mk(Template::RowPairUnits, false, true))
                    } else if u1 && v1 {
                        Ok(mk(Template::ColumnPairUnits, false, false))
                    } else if u2 && v2 {
                        Ok(mk(Template::ColumnPairUnits, true, false))
                    } else {
                        // Diagonal unit pairs satisfy the grid.
                        Err(ClassifierError::PreconditionViolation(
                            "grid failure with a diagonal unit pair".into(),
                        ))
                    }
                }
                n => Err(ClassifierError::PreconditionViolation(format!(
                    "grid failure with {n} unit entries and q = 0"
                ))),
            }
        }
        Shape::Shape2 => {
            if !u1 && !u2 {
                Ok(mk(Template::Shape2Row2NonUnit, false, false))
            } else if !v1 && !v2 {
                Ok(mk(Template::Shape2Row3NonUnit, false, false))
            } else if !u2 && !v2 {
                // d1 and e1 are then units.
                Ok(mk(Template::ColumnPairUnits, false, false))
            } else {
                Err(ClassifierError::PreconditionViolation(
                    "Shape2 grid failure without a failing pair".into(),
                ))
            }
        }
    }
}

/// Template selection for Shape1, q = k > 0, non-forced exponent patterns.
fn deep_recipe(k1: i64, k2: i64, l1: i64, l2: i64, k: i64) -> WitnessRecipe {
    // Prefer the orientation(s) exhibiting k1 = l1 = k (column-2 pair at the
    // minimum): these take construction A.  Such orientations exist exactly
    // when (k1, l1) or (k2, l2) are both k.
    for (row_swap, col_swap, (ok1, ol1, _, _)) in orientations(k1, l1, k2, l2) {
        if ok1 == k && ol1 == k {
            return WitnessRecipe {
                template: Template::DeepCaseA,
                col_swap,
                row_swap,
                k,
                level: 1,
            };
        }
    }
    // Otherwise bring k into the k1 slot with the smallest available l1.
    let mut best: Option<(bool, bool, i64)> = None;
    for (row_swap, col_swap, (ok1, ol1, _, _)) in orientations(k1, l1, k2, l2) {
        if ok1 == k {
            let better = match best {
                Some((_, _, l)) => ol1 < l,
                None => true,
            };
            if better {
                best = Some((row_swap, col_swap, ol1));
            }
        }
    }
    let (row_swap, col_swap, level) =
        best.expect("the minimum k occurs in some slot, reachable by a symmetry");
    debug_assert!(level > k, "case A orientations were handled above");
    WitnessRecipe {
        template: Template::DeepCaseB,
        col_swap,
        row_swap,
        k,
        level,
    }
}

/// The 21 exponent patterns (k1, l1, k2, l2) over symbols ranked
/// 0 <= 1 <= 2 <= 3, one representative per symmetry orbit.
const PATTERNS: [(u8, u8, u8, u8); 21] = [
    (0, 0, 0, 0), // 1
    (0, 0, 0, 1), // 2
    (0, 0, 1, 1), // 3
    (0, 1, 0, 1), // 4
    (0, 1, 1, 0), // 5
    (0, 0, 1, 2), // 6
    (0, 1, 0, 2), // 7
    (0, 1, 2, 0), // 8
    (0, 1, 1, 1), // 9
    (0, 1, 1, 2), // 10
    (0, 1, 2, 1), // 11
    (0, 2, 1, 1), // 12
    (0, 1, 2, 2), // 13
    (0, 2, 1, 2), // 14
    (0, 2, 2, 1), // 15
    (0, 1, 2, 3), // 16
    (0, 1, 3, 2), // 17
    (0, 2, 1, 3), // 18
    (0, 2, 3, 1), // 19
    (0, 3, 1, 2), // 20
    (0, 3, 2, 1), // 21
];

/// Exponent patterns that force idempotents in the `q = k` branch.
pub const FORCED_PATTERN_CASES: [u8; 4] = [1, 2, 5, 8];

fn rank_tuple(t: (i64, i64, i64, i64)) -> (u8, u8, u8, u8) {
    let mut levels = vec![t.0, t.1, t.2, t.3];
    levels.sort_unstable();
    levels.dedup();
    let rank = |x: i64| levels.iter().position(|&v| v == x).unwrap() as u8;
    (rank(t.0), rank(t.1), rank(t.2), rank(t.3))
}

/// Matches the exponent tuple of a Shape1 matrix with all free entries
/// non-units against the 21-pattern table, up to the row/column symmetries.
/// Returns the 1-based case index.
pub fn pattern_case_index(nf: &NormalizedForms) -> Result<u8, ClassifierError> {
    if nf.shape() != Shape::Shape1 {
        return Err(ClassifierError::PreconditionViolation(
            "pattern table applies to Shape1 only".into(),
        ));
    }
    let (k1, k2, l1, l2) = nf.exponents();
    if [k1, k2, l1, l2].iter().any(|&v| v < 1) {
        return Err(ClassifierError::PreconditionViolation(
            "pattern table requires all free entries to be non-units".into(),
        ));
    }
    Ok(case_index_of(k1, l1, k2, l2))
}

/// Core matcher on a raw (k1, l1, k2, l2) tuple.
pub(crate) fn case_index_of(k1: i64, l1: i64, k2: i64, l2: i64) -> u8 {
    for (case, pat) in PATTERNS.iter().enumerate() {
        for (_, _, img) in orientations(k1, l1, k2, l2) {
            if rank_tuple(img) == *pat {
                return case as u8 + 1;
            }
        }
    }
    unreachable!("the 21 patterns are exhaustive up to symmetry")
}
