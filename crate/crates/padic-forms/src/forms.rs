//! Canonical shapes and determinant decomposition for triples of linear
//! forms in three variables.
//!
//! A raw coefficient matrix with all entries nonzero is reduced, without
//! changing the independence question, to one of two canonical shapes
//!
//! ```text
//! Shape1:  ( 1   1    1  )        Shape2:  ( 1   1    1  )
//!          ( 1  d1   d2  )                 ( d1  1   d2  )
//!          ( 1  e1   e2  )                 ( 1   e1  e2  )
//! ```
//!
//! where the four free entries are p-adic integers (valuation >= 0).  The
//! reduction divides each column by its first-row entry, moves a
//! minimal-valuation entry of row 2 into the pivot column, and rescales rows
//! 2 and 3 by their pivot entries; all steps are recorded so the raw matrix
//! can be reconstructed exactly.

use crate::padic::{PAdicError, PAdicScalar, Valuation};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FormsError {
    #[error("form coefficient at row {row}, column {col} is zero")]
    ZeroCoefficient { row: usize, col: usize },
    #[error("the three forms are linearly dependent (zero determinant)")]
    SingularForms,
    #[error("internal determinant cross-check failed")]
    DeterminantMismatch,
    #[error("operation requires shape {expected:?}, got {found:?}")]
    WrongShape { expected: Shape, found: Shape },
    #[error("canonical entry has negative valuation")]
    NotIntegral,
    #[error(transparent)]
    Scalar(#[from] PAdicError),
}

/// 3x3 matrix of nonzero p-adic coefficients; rows are forms, columns are
/// variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawForms {
    prime: u64,
    coeffs: [[PAdicScalar; 3]; 3],
}

impl RawForms {
    pub fn new(coeffs: [[PAdicScalar; 3]; 3]) -> Result<Self, FormsError> {
        let prime = coeffs[0][0].prime();
        for (i, row) in coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    return Err(FormsError::ZeroCoefficient { row: i, col: j });
                }
                if c.prime() != prime {
                    return Err(PAdicError::PrimeMismatch(prime, c.prime()).into());
                }
            }
        }
        Ok(RawForms { prime, coeffs })
    }

    /// Parses `;`-separated rows of `,`-separated p-adic literals.
    pub fn parse(text: &str, prime: u64) -> Result<Self, FormsError> {
        if !crate::padic::is_prime(prime) {
            return Err(PAdicError::NotPrime(prime).into());
        }
        let rows: Vec<&str> = text.split(';').collect();
        if rows.len() != 3 {
            return Err(PAdicError::MalformedLiteral(text.to_string()).into());
        }
        let mut coeffs: Vec<[PAdicScalar; 3]> = Vec::with_capacity(3);
        for row in rows {
            let entries: Vec<&str> = row.split(',').collect();
            if entries.len() != 3 {
                return Err(PAdicError::MalformedLiteral(row.to_string()).into());
            }
            coeffs.push([
                PAdicScalar::parse_literal(entries[0], prime)?,
                PAdicScalar::parse_literal(entries[1], prime)?,
                PAdicScalar::parse_literal(entries[2], prime)?,
            ]);
        }
        let arr: [[PAdicScalar; 3]; 3] = [
            coeffs[0].clone(),
            coeffs[1].clone(),
            coeffs[2].clone(),
        ];
        Self::new(arr)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn coeffs(&self) -> &[[PAdicScalar; 3]; 3] {
        &self.coeffs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Shape1,
    Shape2,
}

/// Canonical reduced matrix together with the transformations that produced
/// it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedForms {
    prime: u64,
    shape: Shape,
    /// Row-2 free entries (d1, d2) and row-3 free entries (e1, e2).
    pub delta1: PAdicScalar,
    pub delta2: PAdicScalar,
    pub eps1: PAdicScalar,
    pub eps2: PAdicScalar,
    /// `column_permutation[j]` = index of the raw column now sitting at
    /// canonical column `j`.
    pub column_permutation: [usize; 3],
    /// Raw first-row entries: canonical column j was divided by this.
    pub column_scalings: [PAdicScalar; 3],
    /// Rows 1..3 of the (column-reduced, permuted) matrix were divided by
    /// these.
    pub row_scalings: [PAdicScalar; 3],
}

/// Decomposition `det = sign * p^q * unit` of a nonzero determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetDecomposition {
    /// p-adic valuation of the determinant (>= 0 for canonical forms).
    pub q: i64,
    /// The unit cofactor, `det / p^q`.
    pub lambda_unit: PAdicScalar,
}

impl NormalizedForms {
    /// Builds a canonical matrix directly from its four free entries (used by
    /// grid sweeps).  All entries must be integral.
    pub fn from_parts(
        shape: Shape,
        delta1: PAdicScalar,
        delta2: PAdicScalar,
        eps1: PAdicScalar,
        eps2: PAdicScalar,
    ) -> Result<Self, FormsError> {
        let prime = delta1.prime();
        let one = PAdicScalar::one(prime);
        for c in [&delta1, &delta2, &eps1, &eps2] {
            if c.is_zero() {
                return Err(FormsError::ZeroCoefficient { row: 0, col: 0 });
            }
            if !c.is_integral() {
                return Err(FormsError::NotIntegral);
            }
            if c.prime() != prime {
                return Err(PAdicError::PrimeMismatch(prime, c.prime()).into());
            }
        }
        Ok(NormalizedForms {
            prime,
            shape,
            delta1,
            delta2,
            eps1,
            eps2,
            column_permutation: [0, 1, 2],
            column_scalings: [one.clone(), one.clone(), one.clone()],
            row_scalings: [one.clone(), one.clone(), one],
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Valuations (k1, k2) of row 2 and (l1, l2) of row 3 free entries.
    pub fn exponents(&self) -> (i64, i64, i64, i64) {
        let v = |s: &PAdicScalar| s.valuation().finite().expect("entries are nonzero");
        (v(&self.delta1), v(&self.delta2), v(&self.eps1), v(&self.eps2))
    }

    /// The minimum of the four free-entry valuations.
    pub fn min_exponent(&self) -> i64 {
        let (k1, k2, l1, l2) = self.exponents();
        k1.min(k2).min(l1).min(l2)
    }

    /// The canonical 3x3 matrix as scalars.
    pub fn canonical_matrix(&self) -> [[PAdicScalar; 3]; 3] {
        let one = PAdicScalar::one(self.prime);
        match self.shape {
            Shape::Shape1 => [
                [one.clone(), one.clone(), one.clone()],
                [one.clone(), self.delta1.clone(), self.delta2.clone()],
                [one, self.eps1.clone(), self.eps2.clone()],
            ],
            Shape::Shape2 => [
                [one.clone(), one.clone(), one.clone()],
                [self.delta1.clone(), one.clone(), self.delta2.clone()],
                [one, self.eps1.clone(), self.eps2.clone()],
            ],
        }
    }

    /// Undoes the recorded scalings/permutation, reproducing the raw matrix.
    pub fn reconstruct_raw(&self) -> Result<RawForms, FormsError> {
        let canon = self.canonical_matrix();
        let mut out: Vec<Vec<PAdicScalar>> = vec![vec![PAdicScalar::zero(self.prime); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // canonical[i][j] = raw[i][perm[j]] / col_scale[j] / row_scale[i]
                let raw = canon[i][j]
                    .mul(&self.column_scalings[j])?
                    .mul(&self.row_scalings[i])?;
                out[i][self.column_permutation[j]] = raw;
            }
        }
        RawForms::new([
            [out[0][0].clone(), out[0][1].clone(), out[0][2].clone()],
            [out[1][0].clone(), out[1][1].clone(), out[1][2].clone()],
            [out[2][0].clone(), out[2][1].clone(), out[2][2].clone()],
        ])
    }
}

fn val(s: &PAdicScalar) -> i64 {
    s.valuation().finite().expect("nonzero entry")
}

/// Reduces a raw matrix to canonical shape.
pub fn normalize(raw: &RawForms) -> Result<NormalizedForms, FormsError> {
    let p = raw.prime();
    let c = raw.coeffs();

    // Step 1: divide each column by its first-row entry.
    let col_scale = [c[0][0].clone(), c[0][1].clone(), c[0][2].clone()];
    let mut m: Vec<Vec<PAdicScalar>> = (0..3)
        .map(|i| (0..3).map(|j| c[i][j].div(&col_scale[j]).unwrap()).collect())
        .collect();
    let mut perm = [0usize, 1, 2];

    let swap_cols = |m: &mut Vec<Vec<PAdicScalar>>, perm: &mut [usize; 3], a: usize, b: usize| {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
        perm.swap(a, b);
    };

    // Step 2: put a minimal-valuation entry of row 2 into column 1
    // (lowest column index wins ties).
    let kmin = (0..3).min_by_key(|&j| (val(&m[1][j]), j)).unwrap();
    if kmin != 0 {
        swap_cols(&mut m, &mut perm, 0, kmin);
    }

    // Step 3: pick the shape from where row 3 attains its minimum.
    let lmin = (0..3).min_by_key(|&j| (val(&m[2][j]), j)).unwrap();
    let one = PAdicScalar::one(p);
    if lmin == 0 {
        // Shape1: rescale rows 2 and 3 by their column-1 entries.
        let r2 = m[1][0].clone();
        let r3 = m[2][0].clone();
        let delta1 = m[1][1].div(&r2)?;
        let delta2 = m[1][2].div(&r2)?;
        let eps1 = m[2][1].div(&r3)?;
        let eps2 = m[2][2].div(&r3)?;
        let col_scalings = [
            col_scale[perm[0]].clone(),
            col_scale[perm[1]].clone(),
            col_scale[perm[2]].clone(),
        ];
        Ok(NormalizedForms {
            prime: p,
            shape: Shape::Shape1,
            delta1,
            delta2,
            eps1,
            eps2,
            column_permutation: perm,
            column_scalings: col_scalings,
            row_scalings: [one, r2, r3],
        })
    } else {
        // Shape2: row 3 minimum lives outside the pivot column.  Bring it to
        // column 2, rescale row 2 by its column-1 entry and row 3 by its
        // column-2 entry, then swap columns 1 and 2 so the matrix reads
        // (1,1,1; d1,1,d2; 1,e1,e2).
        if lmin == 2 {
            swap_cols(&mut m, &mut perm, 1, 2);
        }
        let r2 = m[1][0].clone();
        let r3 = m[2][1].clone();
        let row2 = [
            m[1][0].div(&r2)?,
            m[1][1].div(&r2)?,
            m[1][2].div(&r2)?,
        ];
        let row3 = [
            m[2][0].div(&r3)?,
            m[2][1].div(&r3)?,
            m[2][2].div(&r3)?,
        ];
        // Final column swap 1 <-> 2.
        perm.swap(0, 1);
        let delta1 = row2[1].clone(); // was column 2... after swap sits at column 1
        let delta2 = row2[2].clone();
        let eps1 = row3[0].clone();
        let eps2 = row3[2].clone();
        debug_assert!(row2[0] == PAdicScalar::one(p) && row3[1] == PAdicScalar::one(p));
        let col_scalings = [
            col_scale[perm[0]].clone(),
            col_scale[perm[1]].clone(),
            col_scale[perm[2]].clone(),
        ];
        let nf = NormalizedForms {
            prime: p,
            shape: Shape::Shape2,
            delta1,
            delta2,
            eps1,
            eps2,
            column_permutation: perm,
            column_scalings: col_scalings,
            row_scalings: [one, r2, r3],
        };
        for e in [&nf.delta1, &nf.delta2, &nf.eps1, &nf.eps2] {
            debug_assert!(e.is_integral());
        }
        Ok(nf)
    }
}

/// Closed-form determinant of the canonical matrix.
pub fn determinant(nf: &NormalizedForms) -> PAdicScalar {
    let d1 = &nf.delta1;
    let d2 = &nf.delta2;
    let e1 = &nf.eps1;
    let e2 = &nf.eps2;
    let one = PAdicScalar::one(nf.prime());
    let det = match nf.shape() {
        // d1*e2 - d2*e1 - d1 + d2 + e1 - e2
        Shape::Shape1 => d1
            .mul(e2)
            .and_then(|t| t.sub(&d2.mul(e1)?))
            .and_then(|t| t.sub(d1))
            .and_then(|t| t.add(d2))
            .and_then(|t| t.add(e1))
            .and_then(|t| t.sub(e2)),
        // d1*e1 - d2*e1 - d1*e2 + d2 + e2 - 1
        Shape::Shape2 => d1
            .mul(e1)
            .and_then(|t| t.sub(&d2.mul(e1)?))
            .and_then(|t| t.sub(&d1.mul(e2)?))
            .and_then(|t| t.add(d2))
            .and_then(|t| t.add(e2))
            .and_then(|t| t.sub(&one)),
    }
    .expect("scalars share a prime");
    det
}

/// Cofactor expansion of the full canonical 3x3 matrix; used as an internal
/// cross-check of the closed forms.
pub fn determinant_cofactor(nf: &NormalizedForms) -> PAdicScalar {
    let m = nf.canonical_matrix();
    let minor = |a: &PAdicScalar, b: &PAdicScalar, c: &PAdicScalar, d: &PAdicScalar| {
        a.mul(d).unwrap().sub(&b.mul(c).unwrap()).unwrap()
    };
    let t0 = m[0][0].mul(&minor(&m[1][1], &m[1][2], &m[2][1], &m[2][2])).unwrap();
    let t1 = m[0][1].mul(&minor(&m[1][0], &m[1][2], &m[2][0], &m[2][2])).unwrap();
    let t2 = m[0][2].mul(&minor(&m[1][0], &m[1][1], &m[2][0], &m[2][1])).unwrap();
    t0.sub(&t1).unwrap().add(&t2).unwrap()
}

/// Term-by-term expansion of the Shape1 determinant from the
/// valuation/unit presentation of the four entries:
///
/// ```text
/// p^(k1+l2) c1 d2 - p^(k2+l1) c2 d1 + p^k2 c2 - p^k1 c1 + p^l1 d1 - p^l2 d2
/// ```
///
/// where `d_j = p^(k_j) c_j` are the row-2 entries and `e_j = p^(l_j) d_j`
/// the row-3 entries.  Only defined for Shape1.
pub fn expand_det_terms(nf: &NormalizedForms) -> Result<PAdicScalar, FormsError> {
    if nf.shape() != Shape::Shape1 {
        return Err(FormsError::WrongShape {
            expected: Shape::Shape1,
            found: nf.shape(),
        });
    }
    let p = nf.prime();
    let (k1, k2, l1, l2) = nf.exponents();
    // Unit parts: entry / p^valuation.
    let unit_of = |s: &PAdicScalar, v: i64| {
        let pv = PAdicScalar::from_parts(false, v, num_bigint::BigUint::from(1u32), p);
        s.div(&pv).unwrap()
    };
    let c1 = unit_of(&nf.delta1, k1);
    let c2 = unit_of(&nf.delta2, k2);
    let d1 = unit_of(&nf.eps1, l1);
    let d2 = unit_of(&nf.eps2, l2);
    let ppow = |e: i64| PAdicScalar::from_parts(false, e, num_bigint::BigUint::from(1u32), p);
    let term = |e: i64, u: &PAdicScalar| ppow(e).mul(u).unwrap();
    let t1 = term(k1 + l2, &c1.mul(&d2).unwrap());
    let t2 = term(k2 + l1, &c2.mul(&d1).unwrap());
    let t3 = term(k2, &c2);
    let t4 = term(k1, &c1);
    let t5 = term(l1, &d1);
    let t6 = term(l2, &d2);
    Ok(t1
        .sub(&t2)
        .unwrap()
        .add(&t3)
        .unwrap()
        .sub(&t4)
        .unwrap()
        .add(&t5)
        .unwrap()
        .sub(&t6)
        .unwrap())
}

/// Splits the determinant as `p^q * unit`, failing on singular matrices.
/// The closed form is cross-checked against a cofactor expansion.
pub fn det_decompose(nf: &NormalizedForms) -> Result<DetDecomposition, FormsError> {
    let det = determinant(nf);
    if det != determinant_cofactor(nf) {
        return Err(FormsError::DeterminantMismatch);
    }
    match det.valuation() {
        Valuation::Infinite => Err(FormsError::SingularForms),
        Valuation::Finite(q) => {
            let ppow =
                PAdicScalar::from_parts(false, q, num_bigint::BigUint::from(1u32), nf.prime());
            let lambda_unit = det.div(&ppow)?;
            debug_assert!(lambda_unit.is_unit());
            Ok(DetDecomposition { q, lambda_unit })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn nf_parts(shape: Shape, p: u64, d1: i64, d2: i64, e1: i64, e2: i64) -> NormalizedForms {
        let s = |n: i64| {
            PAdicScalar::from_parts(n < 0, 0, BigUint::from(n.unsigned_abs()), p)
        };
        NormalizedForms::from_parts(shape, s(d1), s(d2), s(e1), s(e2)).unwrap()
    }

    #[test]
    fn normalize_shape2_example() {
        // [DERIVED] Row-2 valuations after column scaling are (1,0,2), so the
        // pivot column is column 2; row 3 then has its minimum outside the
        // pivot column, forcing Shape2.
        let raw = RawForms::parse("1,1,1;2,1,4;1,2,2", 2).unwrap();
        let nf = normalize(&raw).unwrap();
        assert_eq!(nf.shape(), Shape::Shape2);
        let (k1, k2, l1, l2) = nf.exponents();
        assert_eq!((k1, k2, l1, l2), (1, 2, 1, 1));
        // Reconstruction is exact.
        assert_eq!(nf.reconstruct_raw().unwrap(), raw);
    }

    #[test]
    fn normalize_shape1_example() {
        let raw = RawForms::parse("3,3,3;3,9,27;3,27,9", 3).unwrap();
        let nf = normalize(&raw).unwrap();
        assert_eq!(nf.shape(), Shape::Shape1);
        let (k1, k2, l1, l2) = nf.exponents();
        assert_eq!((k1, k2, l1, l2), (1, 2, 2, 1));
        assert_eq!(nf.min_exponent(), 1);
        assert_eq!(nf.reconstruct_raw().unwrap(), raw);
    }

    #[test]
    fn determinant_example_shape1() {
        // [DERIVED] 3*3 - 9*9 - 3 + 9 + 9 - 3 = -60 = 3^1 * (-20).
        let nf = nf_parts(Shape::Shape1, 3, 3, 9, 9, 3);
        let det = determinant(&nf);
        assert_eq!(
            det.to_rational(),
            num_rational::BigRational::from_integer((-60).into())
        );
        let dd = det_decompose(&nf).unwrap();
        assert_eq!(dd.q, 1);
        assert_eq!(
            dd.lambda_unit.to_rational(),
            num_rational::BigRational::from_integer((-20).into())
        );
    }

    #[test]
    fn determinant_example_shape2() {
        // [DERIVED] all entries 3: 9 - 9 - 9 + 3 + 3 - 1 = -4, a unit at p=3.
        let nf = nf_parts(Shape::Shape2, 3, 3, 3, 3, 3);
        let dd = det_decompose(&nf).unwrap();
        assert_eq!(dd.q, 0);
        assert_eq!(
            dd.lambda_unit.to_rational(),
            num_rational::BigRational::from_integer((-4).into())
        );
    }

    #[test]
    fn singular_matrix_is_rejected() {
        // d1 = d2 = e1 = e2 = 1 collapses rows.
        let nf = nf_parts(Shape::Shape1, 2, 1, 1, 1, 1);
        assert_eq!(det_decompose(&nf).unwrap_err(), FormsError::SingularForms);
    }

    #[test]
    fn expansion_requires_shape1() {
        let nf = nf_parts(Shape::Shape2, 3, 3, 3, 3, 3);
        assert!(matches!(
            expand_det_terms(&nf),
            Err(FormsError::WrongShape { .. })
        ));
    }

    #[test]
    fn zero_coefficient_rejected() {
        assert!(matches!(
            RawForms::parse("1,1,1;1,0,2;1,2,2", 2),
            Err(FormsError::ZeroCoefficient { row: 1, col: 1 })
        ));
    }

    fn arb_prime() -> impl Strategy<Value = u64> {
        prop_oneof![Just(2u64), Just(3u64), Just(5u64)]
    }

    proptest! {
        /// Closed forms agree with cofactor expansion for both shapes, and
        /// the Shape1 term expansion agrees with both.
        #[test]
        fn determinant_routes_agree(p in arb_prime(), shape in prop_oneof![Just(Shape::Shape1), Just(Shape::Shape2)], es in prop::collection::vec((any::<bool>(), 0i64..=3, 1u64..50), 4)) {
            let s = |t: &(bool, i64, u64)| PAdicScalar::from_parts(t.0, t.1, BigUint::from(t.2), p);
            let nf = NormalizedForms::from_parts(shape, s(&es[0]), s(&es[1]), s(&es[2]), s(&es[3])).unwrap();
            let closed = determinant(&nf);
            prop_assert_eq!(closed.clone(), determinant_cofactor(&nf));
            if shape == Shape::Shape1 {
                prop_assert_eq!(closed, expand_det_terms(&nf).unwrap());
            }
        }

        /// For Shape1 with all entries non-units, q >= k (the determinant
        /// valuation is at least the minimal entry valuation).
        #[test]
        fn shape1_nonunit_q_at_least_k(p in arb_prime(), es in prop::collection::vec((any::<bool>(), 1i64..=3, 1u64..50), 4)) {
            let s = |t: &(bool, i64, u64)| PAdicScalar::from_parts(t.0, t.1, BigUint::from(t.2), p);
            let nf = NormalizedForms::from_parts(Shape::Shape1, s(&es[0]), s(&es[1]), s(&es[2]), s(&es[3])).unwrap();
            if let Ok(dd) = det_decompose(&nf) {
                prop_assert!(dd.q >= nf.min_exponent());
            }
        }

        /// For Shape2 with all entries non-units, the determinant is a unit
        /// (q = 0): the constant -1 term dominates.
        #[test]
        fn shape2_nonunit_det_is_unit(p in arb_prime(), es in prop::collection::vec((any::<bool>(), 1i64..=3, 1u64..50), 4)) {
            let s = |t: &(bool, i64, u64)| PAdicScalar::from_parts(t.0, t.1, BigUint::from(t.2), p);
            let nf = NormalizedForms::from_parts(Shape::Shape2, s(&es[0]), s(&es[1]), s(&es[2]), s(&es[3])).unwrap();
            let dd = det_decompose(&nf).unwrap();
            prop_assert_eq!(dd.q, 0);
        }

        /// normalize produces integral canonical entries with the pivot
        /// minima in the documented columns, and reconstructs the raw matrix
        /// exactly.
        #[test]
        fn normalize_soundness(p in arb_prime(), es in prop::collection::vec((any::<bool>(), -2i64..=3, 1u64..50), 9)) {
            let s = |t: &(bool, i64, u64)| PAdicScalar::from_parts(t.0, t.1, BigUint::from(t.2), p);
            let raw = RawForms::new([
                [s(&es[0]), s(&es[1]), s(&es[2])],
                [s(&es[3]), s(&es[4]), s(&es[5])],
                [s(&es[6]), s(&es[7]), s(&es[8])],
            ]).unwrap();
            let nf = normalize(&raw).unwrap();
            let (k1, k2, l1, l2) = nf.exponents();
            prop_assert!(k1 >= 0 && k2 >= 0 && l1 >= 0 && l2 >= 0);
            if nf.shape() == Shape::Shape2 {
                // Shape2 arises only when row 3 strictly prefers a column
                // other than the row-2 pivot, so e1 is a non-unit.
                prop_assert!(l1 >= 1);
            }
            prop_assert_eq!(nf.reconstruct_raw().unwrap(), raw);
        }

        /// Normalizing an already-canonical matrix is idempotent up to a
        /// trivial permutation: the canonical entries are reproduced.
        #[test]
        fn normalize_idempotent(p in arb_prime(), es in prop::collection::vec((any::<bool>(), 0i64..=3, 1u64..50), 4)) {
            let s = |t: &(bool, i64, u64)| PAdicScalar::from_parts(t.0, t.1, BigUint::from(t.2), p);
            let nf = NormalizedForms::from_parts(Shape::Shape1, s(&es[0]), s(&es[1]), s(&es[2]), s(&es[3])).unwrap();
            // The literal 1 in column 1 always attains the row minima, so an
            // already-canonical Shape1 matrix normalizes to itself.
            let raw = nf.reconstruct_raw().unwrap();
            let again = normalize(&raw).unwrap();
            prop_assert_eq!(again.shape(), Shape::Shape1);
            prop_assert_eq!(again.delta1, nf.delta1);
            prop_assert_eq!(again.delta2, nf.delta2);
            prop_assert_eq!(again.eps1, nf.eps1);
            prop_assert_eq!(again.eps2, nf.eps2);
        }

        /// The classification inputs are invariant under scaling a raw row by
        /// a nonzero scalar: normalize absorbs it.
        #[test]
        fn row_scaling_invariance(p in arb_prime(), es in prop::collection::vec((any::<bool>(), -2i64..=3, 1u64..50), 9), sn in any::<bool>(), sv in -2i64..=2, su in 1u64..20) {
            let s = |t: &(bool, i64, u64)| PAdicScalar::from_parts(t.0, t.1, BigUint::from(t.2), p);
            let scale = PAdicScalar::from_parts(sn, sv, BigUint::from(su), p);
            let mk = |scaled: bool| {
                let f = |i: usize, j: usize| {
                    let base = s(&es[i * 3 + j]);
                    if scaled && i == 1 { base.mul(&scale).unwrap() } else { base }
                };
                RawForms::new([
                    [f(0,0), f(0,1), f(0,2)],
                    [f(1,0), f(1,1), f(1,2)],
                    [f(2,0), f(2,1), f(2,2)],
                ]).unwrap()
            };
            let a = normalize(&mk(false)).unwrap();
            let b = normalize(&mk(true)).unwrap();
            prop_assert_eq!(a.shape(), b.shape());
            prop_assert_eq!(a.delta1, b.delta1);
            prop_assert_eq!(a.delta2, b.delta2);
            prop_assert_eq!(a.eps1, b.eps1);
            prop_assert_eq!(a.eps2, b.eps2);
        }
    }
}
