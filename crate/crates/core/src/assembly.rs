//! Constraint blocks of the input-oriented, variable-returns-to-scale
//! efficiency program and the matching row uncertainty matrices.
//!
//! For object `t` in a category with members `C` (ascending), the program
//! variables are `eta = (lambda_1..lambda_|C|, phi, theta)` and
//!
//! ```text
//!     A = [ -Y_C | y_t |  0   ]   (M output rows)
//!         [  X_C |  0  | -x_t ]   (N input rows)
//!     B = [ 1..1 |  0  |  0 ]
//!         [ 0..0 |  1  |  0 ]
//!     c = (0, .., 0, 1)
//! ```
//!
//! with the efficiency score `min { c'eta : A eta <= 0, B eta = e, eta >= 0 }`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CharacteristicTable, UncertaintySpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DeaBlocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    /// Position of the assessed object among the category members.
    pub target_column: usize,
    /// Category members in column order.
    pub members: Vec<usize>,
}

impl DeaBlocks {
    /// Number of program variables, `|C| + 2`.
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    /// The always-feasible point with ones at the target column and at the
    /// two trailing positions.
    pub fn eta_hat(&self) -> DVector<f64> {
        let n = self.members.len();
        let mut eta = DVector::zeros(n + 2);
        eta[self.target_column] = 1.0;
        eta[n] = 1.0;
        eta[n + 1] = 1.0;
        eta
    }
}

/// `R_i = [R'_i | R''_i]` for one constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowUncertainty {
    pub r_prime: DMatrix<f64>,
    pub r_double_prime: DMatrix<f64>,
    pub row_index: usize,
}

impl RowUncertainty {
    /// The full `R_i`, with `|C| + 2` columns.
    pub fn full(&self) -> DMatrix<f64> {
        let rows = self.r_prime.nrows();
        let n = self.r_prime.ncols();
        let mut r = DMatrix::zeros(rows, n + 2);
        r.view_mut((0, 0), (rows, n)).copy_from(&self.r_prime);
        r.view_mut((0, n), (rows, 2)).copy_from(&self.r_double_prime);
        r
    }
}

/// Sorted copy of `category` and the position of `t` within it.
pub(crate) fn locate(table: &CharacteristicTable, category: &[usize], t: usize) -> Result<(Vec<usize>, usize)> {
    let mut members = category.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.len() != category.len() {
        return Err(Error::DimensionMismatch("category lists an object twice".into()));
    }
    if let Some(&bad) = members.iter().find(|&&k| k >= table.num_objects()) {
        return Err(Error::DimensionMismatch(format!(
            "object index {bad} out of range for {} objects",
            table.num_objects()
        )));
    }
    let pos = members
        .binary_search(&t)
        .map_err(|_| Error::ObjectNotInCategory { object: t })?;
    Ok((members, pos))
}

pub fn build_blocks(table: &CharacteristicTable, category: &[usize], t: usize) -> Result<DeaBlocks> {
    let (members, pos) = locate(table, category, t)?;
    let n = members.len();
    let m_out = table.num_outputs();
    let n_in = table.num_inputs();
    let x = table.inputs();
    let y = table.outputs();

    let mut a = DMatrix::zeros(m_out + n_in, n + 2);
    for i in 0..m_out {
        for (col, &k) in members.iter().enumerate() {
            a[(i, col)] = -y[(i, k)];
        }
        a[(i, n)] = y[(i, t)];
    }
    for i in 0..n_in {
        for (col, &k) in members.iter().enumerate() {
            a[(m_out + i, col)] = x[(i, k)];
        }
        a[(m_out + i, n + 1)] = -x[(i, t)];
    }

    let mut b = DMatrix::zeros(2, n + 2);
    for col in 0..n {
        b[(0, col)] = 1.0;
    }
    b[(1, n)] = 1.0;

    let mut c = DVector::zeros(n + 2);
    c[n + 1] = 1.0;

    Ok(DeaBlocks {
        a,
        b,
        c,
        target_column: pos,
        members,
    })
}

/// Uncertainty matrix of constraint row `row` for object `t` in `category`.
///
/// `R''_i` keeps the duplicated characteristic of `t` consistent with its
/// category column: the slot holding `y_t` (output rows) or `x_t` (input
/// rows) is `-R'_i[:, t]`, the other slot is zero.
pub fn build_row_uncertainty(
    spec: &UncertaintySpec,
    table: &CharacteristicTable,
    category: &[usize],
    t: usize,
    row: usize,
) -> Result<RowUncertainty> {
    let (members, pos) = locate(table, category, t)?;
    let n = members.len();
    if row >= table.num_rows() {
        return Err(Error::DimensionMismatch(format!(
            "row {row} out of range for {} constraint rows",
            table.num_rows()
        )));
    }
    let r_prime = match spec {
        UncertaintySpec::Identity => DMatrix::identity(n, n),
        UncertaintySpec::Diagonal(w) => DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            members.iter().map(|&k| UncertaintySpec::diagonal_weight(w, k)),
        )),
        UncertaintySpec::Explicit(rows) => {
            let r = rows
                .get(row)
                .ok_or_else(|| Error::InvalidUncertainty(format!("no explicit matrix for row {row}")))?;
            if r.ncols() != n {
                return Err(Error::BadExplicitShape {
                    row,
                    expected: n,
                    found: r.ncols(),
                });
            }
            r.clone()
        }
    };
    let slot = if row < table.num_outputs() { 0 } else { 1 };
    let mut r_double_prime = DMatrix::zeros(r_prime.nrows(), 2);
    for k in 0..r_prime.nrows() {
        r_double_prime[(k, slot)] = -r_prime[(k, pos)];
    }
    Ok(RowUncertainty {
        r_prime,
        r_double_prime,
        row_index: row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> CharacteristicTable {
        CharacteristicTable::from_rows(
            vec!["1".into(), "2".into()],
            &[vec![1.2], vec![0.8]],
            &[vec![0.9, 0.6], vec![0.5, 0.7]],
        )
        .unwrap()
    }

    #[test]
    fn worked_example_a_matrix() {
        let blocks = build_blocks(&worked_example(), &[0, 1], 1).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 4, &[-0.9, -0.5, 0.5, 0.0, -0.6, -0.7, 0.7, 0.0, 1.2, 0.8, 0.0, -0.8]);
        assert_eq!(blocks.a, expected);
        assert_eq!(
            blocks.b,
            DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        );
        assert_eq!(blocks.c.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn singleton_eta_hat_is_exactly_feasible() {
        let table = worked_example();
        let blocks = build_blocks(&table, &[1], 1).unwrap();
        assert_eq!(blocks.num_vars(), 3);
        let eta = blocks.eta_hat();
        assert_eq!(eta.as_slice(), &[1.0, 1.0, 1.0]);
        assert!((&blocks.a * &eta).iter().all(|v| *v == 0.0));
        assert_eq!(blocks.c.dot(&eta), 1.0);
    }

    #[test]
    fn object_outside_category() {
        let err = build_blocks(&worked_example(), &[0], 1).unwrap_err();
        assert_eq!(err, Error::ObjectNotInCategory { object: 1 });
    }

    #[test]
    fn identity_input_row_matches_worked_example() {
        let r = build_row_uncertainty(&UncertaintySpec::Identity, &worked_example(), &[0, 1], 1, 2).unwrap();
        let expected = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        assert_eq!(r.full(), expected);
    }

    #[test]
    fn explicit_output_row_duplicates_target_column() {
        let r1 = DMatrix::from_row_slice(2, 2, &[-0.2, 0.1, 0.3, -0.2]);
        let r2 = DMatrix::from_row_slice(2, 2, &[0.7, 0.6, 0.1, -0.3]);
        let r3 = DMatrix::identity(2, 2);
        let spec = UncertaintySpec::Explicit(vec![r1, r2, r3]);
        let table = worked_example();
        let row0 = build_row_uncertainty(&spec, &table, &[0, 1], 1, 0).unwrap();
        assert_eq!(
            row0.r_double_prime,
            DMatrix::from_row_slice(2, 2, &[-0.1, 0.0, 0.2, 0.0])
        );
        let row1 = build_row_uncertainty(&spec, &table, &[0, 1], 1, 1).unwrap();
        assert_eq!(
            row1.r_double_prime,
            DMatrix::from_row_slice(2, 2, &[-0.6, 0.0, 0.3, 0.0])
        );
    }

    #[test]
    fn diagonal_weights_fill_input_slot() {
        let table = worked_example();
        let w = 0.4;
        let r = build_row_uncertainty(&UncertaintySpec::Diagonal(vec![w]), &table, &[0, 1], 0, 2).unwrap();
        assert_eq!(r.r_double_prime.column(0).as_slice(), &[0.0, 0.0]);
        assert_eq!(r.r_double_prime.column(1).as_slice(), &[-w, 0.0]);
    }

    #[test]
    fn explicit_shape_is_checked() {
        let spec = UncertaintySpec::Explicit(vec![DMatrix::identity(3, 3); 3]);
        let err = build_row_uncertainty(&spec, &worked_example(), &[0, 1], 1, 0).unwrap_err();
        assert_eq!(
            err,
            Error::BadExplicitShape {
                row: 0,
                expected: 2,
                found: 3
            }
        );
    }
}
