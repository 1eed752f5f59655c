//! The Picard lattice of a blown-up plane.
//!
//! Internally every class is written in the orthogonal basis
//! `(L, 𝓔_1, …, 𝓔_N)`: the pulled-back line class and the total transforms of
//! the exceptional curves, with form `diag(1, −1, …, −1)`. The display basis
//! is `H♯` followed by the irreducible exceptional curves, where
//!
//! * `H♯ = L − Σ 𝓔_k` over the centers lying on the strict transform of `H`,
//! * `E_k = 𝓔_k − Σ 𝓔_j` over the later centers lying on the strict transform of `E_k`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::blowup::{Curve, Family, ResolutionTower, Tower};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Coefficients of a divisor class over the display basis of a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorClass {
    #[serde(with = "scalar::serde_vec")]
    pub coefficients: Vec<Scalar>,
}

impl DivisorClass {
    pub fn new(coefficients: Vec<Scalar>) -> Self {
        DivisorClass { coefficients }
    }

    pub fn zero(rank: usize) -> Self {
        DivisorClass::new(vec![Scalar::zero(); rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut c = DivisorClass::zero(rank);
        c.coefficients[i] = Scalar::one();
        c
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.check(other)?;
        Ok(DivisorClass::new(
            self.coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> DivisorClass {
        DivisorClass::new(self.coefficients.iter().map(|a| a * c).collect())
    }

    fn check(&self, other: &DivisorClass) -> Result<()> {
        if self.rank() == other.rank() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.rank(),
                right: other.rank(),
            })
        }
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct IntersectionLattice {
    labels: Vec<String>,
    /// Blow-up index of each display basis element (`None` for `H♯`).
    blowup_of: Vec<Option<usize>>,
    /// Display position of each blow-up.
    position_of: Vec<usize>,
    /// Display basis vectors written in the orthogonal basis, one per row.
    change_of_basis: Vec<Vec<Scalar>>,
    gram: Vec<Vec<Scalar>>,
}

fn orthogonal_form(u: &[Scalar], v: &[Scalar]) -> Scalar {
    let mut total = &u[0] * &v[0];
    for (a, b) in u.iter().zip(v).skip(1) {
        total -= a * b;
    }
    total
}

impl IntersectionLattice {
    /// Lattice with display basis `H♯, E1, …, EN` in blow-up order.
    pub fn for_tower(tower: &Tower) -> Self {
        let order: Vec<(String, usize)> = (0..tower.blowups().len())
            .map(|k| (format!("E{}", k + 1), k))
            .collect();
        IntersectionLattice::with_order(tower, &order)
    }

    /// Lattice with display basis `H♯, E_1…E_n, F_{i0+1}…F_m`.
    pub fn for_resolution(res: &ResolutionTower) -> Self {
        let mut order = Vec::new();
        for &r in &res.forward_family {
            order.push((res.records[r].label.to_string(), res.records[r].blowup));
        }
        for &r in res.inverse_family.iter().skip(res.i0) {
            order.push((res.records[r].label.to_string(), res.records[r].blowup));
        }
        IntersectionLattice::with_order(&res.tower, &order)
    }

    /// `order` lists every blow-up exactly once, with its display label.
    pub fn with_order(tower: &Tower, order: &[(String, usize)]) -> Self {
        let nb = tower.blowups().len();
        assert_eq!(order.len(), nb, "every blow-up needs a label");
        let rank = nb + 1;
        let mut labels = vec!["H#".to_string()];
        let mut blowup_of = vec![None];
        let mut position_of = vec![0; nb];
        for (pos, (label, k)) in order.iter().enumerate() {
            labels.push(label.clone());
            blowup_of.push(Some(*k));
            position_of[*k] = pos + 1;
        }
        let mut change_of_basis = vec![vec![Scalar::zero(); rank]; rank];
        change_of_basis[0][0] = Scalar::one();
        for (k, pos) in position_of.iter().enumerate() {
            change_of_basis[*pos][k + 1] = Scalar::one();
        }
        for (j, b) in tower.blowups().iter().enumerate() {
            for curve in &b.curves_through_center {
                let row = match curve {
                    Curve::H => 0,
                    Curve::Exceptional(k) => position_of[*k],
                };
                change_of_basis[row][j + 1] -= Scalar::one();
            }
        }
        let gram = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| orthogonal_form(&change_of_basis[i], &change_of_basis[j]))
                    .collect()
            })
            .collect();
        IntersectionLattice {
            labels,
            blowup_of,
            position_of,
            change_of_basis,
            gram,
        }
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> &[Vec<Scalar>] {
        &self.gram
    }

    /// Rows: display basis vectors in the orthogonal basis.
    pub fn change_of_basis(&self) -> &[Vec<Scalar>] {
        &self.change_of_basis
    }

    pub fn position_of_blowup(&self, blowup: usize) -> usize {
        self.position_of[blowup]
    }

    pub fn blowup_at_position(&self, position: usize) -> Option<usize> {
        self.blowup_of[position]
    }

    pub fn basis_class(&self, position: usize) -> DivisorClass {
        DivisorClass::unit(self.rank(), position)
    }

    pub fn h_sharp(&self) -> DivisorClass {
        self.basis_class(0)
    }

    /// Strict transform of the exceptional curve of `blowup`.
    pub fn exceptional_curve(&self, blowup: usize) -> DivisorClass {
        self.basis_class(self.position_of[blowup])
    }

    /// Rewrites a class given in the orthogonal basis over the display basis.
    pub fn from_orthogonal(&self, v: &[Scalar]) -> Result<DivisorClass> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                left: self.rank(),
                right: v.len(),
            });
        }
        // w · M = v, i.e. Mᵀ wᵀ = vᵀ.
        let n = self.rank();
        let mut aug: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                let mut row: Vec<Scalar> =
                    (0..n).map(|j| self.change_of_basis[j][i].clone()).collect();
                row.push(v[i].clone());
                row
            })
            .collect();
        solve_in_place(&mut aug).map(DivisorClass::new)
    }

    pub fn to_orthogonal(&self, d: &DivisorClass) -> Result<Vec<Scalar>> {
        if d.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                left: self.rank(),
                right: d.rank(),
            });
        }
        let mut out = vec![Scalar::zero(); self.rank()];
        for (c, row) in d.coefficients.iter().zip(&self.change_of_basis) {
            if c.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        Ok(out)
    }

    /// The pulled-back line class `L`.
    pub fn line_class(&self) -> DivisorClass {
        let mut v = vec![Scalar::zero(); self.rank()];
        v[0] = Scalar::one();
        self.from_orthogonal(&v)
            .expect("unimodular change of basis")
    }

    /// `K = −3L + Σ 𝓔_k`.
    pub fn canonical_class(&self) -> DivisorClass {
        let mut v = vec![Scalar::one(); self.rank()];
        v[0] = Scalar::from_integer((-3).into());
        self.from_orthogonal(&v)
            .expect("unimodular change of basis")
    }

    pub fn intersect(&self, u: &DivisorClass, v: &DivisorClass) -> Result<Scalar> {
        for d in [u, v] {
            if d.rank() != self.rank() {
                return Err(Error::DimensionMismatch {
                    left: self.rank(),
                    right: d.rank(),
                });
            }
        }
        let mut total = Scalar::zero();
        for (i, a) in u.coefficients.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in v.coefficients.iter().enumerate() {
                if !b.is_zero() {
                    total += a * b * &self.gram[i][j];
                }
            }
        }
        Ok(total)
    }

    /// Numbers of positive, negative and zero squares in a diagonalization of the Gram matrix.
    pub fn signature(&self) -> (usize, usize, usize) {
        inertia(&self.gram)
    }

    /// The known irreducible curves (`H♯` and the exceptional curves) with
    /// negative self-intersection. Other negative curves may exist.
    pub fn negative_curves(&self) -> Vec<NegativeCurve> {
        (0..self.rank())
            .filter(|&i| self.gram[i][i].is_negative())
            .map(|i| NegativeCurve {
                label: self.labels[i].clone(),
                class: self.basis_class(i),
                self_intersection: self.gram[i][i].clone(),
            })
            .collect()
    }

    /// Position of `E_n`/`F_m`-style labels in a resolution lattice.
    pub fn position_of_label(
        &self,
        res: &ResolutionTower,
        family: Family,
        index: usize,
    ) -> Option<usize> {
        let record = res.record_of(crate::blowup::Label { family, index })?;
        Some(self.position_of[res.records[record].blowup])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeCurve {
    pub label: String,
    pub class: DivisorClass,
    #[serde(with = "scalar::serde_str")]
    pub self_intersection: Scalar,
}

/// Solves a square augmented system `[A | b]` by Gauss–Jordan elimination.
fn solve_in_place(aug: &mut [Vec<Scalar>]) -> Result<Vec<Scalar>> {
    let n = aug.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or_else(|| Error::ExactnessViolation("singular change of basis".into()))?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v /= &p;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
    }
    Ok(aug.iter().map(|row| row[n].clone()).collect())
}

#[allow(clippy::needless_range_loop)]
/// Sylvester inertia of a symmetric rational matrix by congruence diagonalization.
pub fn inertia(matrix: &[Vec<Scalar>]) -> (usize, usize, usize) {
    let mut a: Vec<Vec<Scalar>> = matrix.to_vec();
    let n = a.len();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    let mut k = 0;
    while k < n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // Replace e_k by e_k + e_j: the new diagonal entry is 2·a[k][j] ≠ 0.
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            } else {
                zero += 1;
                k += 1;
                continue;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &p;
            for c in k..n {
                let v = &f * &a[k][c];
                a[r][c] -= v;
            }
        }
        for c in k + 1..n {
            a[k][c] = Scalar::zero();
        }
        for r in k + 1..n {
            a[r][k] = Scalar::zero();
        }
        k += 1;
    }
    (pos, neg, zero)
}
