//! Exact rational feasibility for `A·x = b, x ≥ 0` (phase one of the simplex
//! method with Bland's rule, so it terminates without cycling).

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A nonnegative solution of `A·x = b`, or `None` if there is none.
/// `a` is row-major with one row per equation.
pub fn feasible_point(a: &[Vec<Scalar>], b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
    let rows = a.len();
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            left: rows,
            right: b.len(),
        });
    }
    let cols = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("ragged constraint matrix".into()));
    }

    // Tableau [A | I | b] with b ≥ 0 and the artificials as the starting basis.
    let width = cols + rows + 1;
    let mut tab: Vec<Vec<Scalar>> = Vec::with_capacity(rows);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let flip = rhs.is_negative();
        let mut t = vec![Scalar::zero(); width];
        for (j, v) in row.iter().enumerate() {
            t[j] = if flip { -v.clone() } else { v.clone() };
        }
        t[cols + i] = Scalar::from_integer(1.into());
        t[width - 1] = if flip { -rhs.clone() } else { rhs.clone() };
        tab.push(t);
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs of "minimize the sum of artificials".
    let mut cost = vec![Scalar::zero(); width];
    for t in &tab {
        for j in 0..cols {
            cost[j] -= &t[j];
        }
        cost[width - 1] -= &t[width - 1];
    }

    while let Some(enter) = (0..width - 1).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &tab[i][width - 1] / &tab[i][enter];
            leave = match leave {
                None => Some(i),
                Some(l) => {
                    let best = &tab[l][width - 1] / &tab[l][enter];
                    if ratio < best || (ratio == best && basis[i] < basis[l]) {
                        Some(i)
                    } else {
                        Some(l)
                    }
                }
            };
        }
        // The phase-one objective is bounded below by zero.
        let leave = leave.expect("phase one is bounded");
        pivot(&mut tab, &mut cost, leave, enter);
        basis[leave] = enter;
    }

    if !cost[width - 1].is_zero() {
        return Ok(None);
    }
    let mut x = vec![Scalar::zero(); cols];
    for (i, &j) in basis.iter().enumerate() {
        if j < cols {
            x[j] = tab[i][width - 1].clone();
        }
    }
    Ok(Some(x))
}

fn pivot(tab: &mut [Vec<Scalar>], cost: &mut [Scalar], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v /= &p;
    }
    let pivot_row = tab[row].clone();
    for (i, t) in tab.iter_mut().enumerate() {
        if i == row || t[col].is_zero() {
            continue;
        }
        let f = t[col].clone();
        for (v, pv) in t.iter_mut().zip(&pivot_row) {
            *v -= &f * pv;
        }
    }
    if !cost[col].is_zero() {
        let f = cost[col].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v -= &f * pv;
        }
    }
}
