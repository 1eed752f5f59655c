//! Sparse multivariate polynomials with exact rational coefficients.

mod parse;
pub mod univariate;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use parse::parse_poly;
pub use univariate::UniPoly;

/// Ordered variable names of a polynomial ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vars(Arc<[String]>);

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Vars(names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    /// The affine coordinates `{x, y}`.
    pub fn xy() -> Self {
        Vars::new(&["x", "y"])
    }

    /// The homogeneous coordinates `{X, Y, Z}`.
    pub fn xyz() -> Self {
        Vars::new(&["X", "Y", "Z"])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

/// Exponent vector, one entry per ring variable. Ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total degree, with the zero polynomial at minus infinity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: Vars,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Polynomial {
    pub fn zero(vars: &Vars) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Scalar) -> Self {
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Polynomial::constant(vars, Scalar::one())
    }

    /// The coordinate function of variable `index`.
    pub fn var(vars: &Vars, index: usize) -> Self {
        Polynomial::monomial(vars, Monomial::var(vars.len(), index), Scalar::one())
    }

    /// The coordinate function named `name`.
    pub fn var_named(vars: &Vars, name: &str) -> Result<Self> {
        let index = vars.index_of(name).ok_or_else(|| Error::UnknownVariable {
            name: name.to_string(),
            expected: vars.names().join(", "),
        })?;
        Ok(Polynomial::var(vars, index))
    }

    pub fn monomial(vars: &Vars, m: Monomial, c: Scalar) -> Self {
        assert_eq!(m.0.len(), vars.len(), "monomial arity");
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I>(vars: &Vars, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Scalar)>,
    {
        let mut p = Polynomial::zero(vars);
        for (e, c) in terms {
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Scalar {
        self.terms
            .get(&Monomial::one(self.vars.len()))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Scalar {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .next_back()
            .map_or(Degree::MinusInfinity, |m| Degree::Finite(m.degree()))
    }

    /// Smallest total degree among the terms (the order of vanishing at the origin).
    pub fn order(&self) -> Degree {
        self.terms
            .keys()
            .next()
            .map_or(Degree::MinusInfinity, |m| Degree::Finite(m.degree()))
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    /// Largest `k` with `var^k` dividing every term (`None` for the zero polynomial).
    pub fn min_exponent(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).min()
    }

    /// Divides by `var^k`; every term must carry at least that power.
    pub fn divide_by_var_power(&self, var: usize, k: u32) -> Result<Self> {
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.0[var] < k {
                return Err(Error::ExactnessViolation(format!(
                    "{} is not divisible by {}^{k}",
                    self,
                    self.vars.names()[var]
                )));
            }
            let mut e = m.0.clone();
            e[var] -= k;
            out.terms.insert(Monomial(e), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &Polynomial) -> Result<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VariableMismatch {
                left: self.vars.names().join(", "),
                right: other.vars.names().join(", "),
            })
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Self> {
        self.mul_budgeted(other, usize::MAX)
    }

    /// Product, failing with [`Error::BudgetExceeded`] if the result has more than `cap` terms.
    pub fn mul_budgeted(&self, other: &Polynomial, cap: usize) -> Result<Self> {
        self.check_vars(other)?;
        let mut acc: HashMap<Monomial, Scalar> =
            HashMap::with_capacity(self.terms.len().max(other.terms.len()));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                acc.entry(ma.mul(mb)).and_modify(|v| *v += &c).or_insert(c);
            }
            if acc.len() > cap {
                return Err(Error::BudgetExceeded {
                    terms: acc.len(),
                    cap,
                });
            }
        }
        let terms: BTreeMap<_, _> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.len() > cap {
            return Err(Error::BudgetExceeded {
                terms: terms.len(),
                cap,
            });
        }
        Ok(Polynomial {
            vars: self.vars.clone(),
            terms,
        })
    }

    pub fn pow(&self, exp: u32) -> Self {
        self.pow_budgeted(exp, usize::MAX)
            .expect("unbounded budget cannot be exceeded")
    }

    pub fn pow_budgeted(&self, mut exp: u32, cap: usize) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.vars);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_budgeted(&base, cap)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_budgeted(&base, cap)?;
            }
        }
        Ok(acc)
    }

    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        assert_eq!(point.len(), self.vars.len(), "evaluation arity");
        let mut total = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        total
    }

    /// Substitutes `images[i]` for variable `i`. All images share one ring, which
    /// becomes the ring of the result.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Self> {
        self.substitute_budgeted(images, usize::MAX)
    }

    pub fn substitute_budgeted(&self, images: &[Polynomial], cap: usize) -> Result<Self> {
        if images.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                left: self.vars.len(),
                right: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.vars.clone(),
            None => return Ok(self.clone()),
        };
        for img in images {
            if img.vars != target {
                return Err(Error::VariableMismatch {
                    left: target.names().join(", "),
                    right: img.vars.names().join(", "),
                });
            }
        }
        // Cached powers images[i]^k, filled on demand.
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|_| vec![Polynomial::one(&target)])
            .collect();
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_budgeted(&images[i], cap)?;
                    powers[i].push(next);
                }
                term = term.mul_budgeted(&powers[i][e as usize], cap)?;
            }
            for (tm, tc) in term.terms {
                acc.entry(tm).and_modify(|v| *v += &tc).or_insert(tc);
            }
            if acc.len() > cap {
                return Err(Error::BudgetExceeded {
                    terms: acc.len(),
                    cap,
                });
            }
        }
        Ok(Polynomial {
            vars: target,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Same polynomial viewed in another ring with the same number of variables.
    pub fn rename(&self, vars: &Vars) -> Self {
        assert_eq!(vars.len(), self.vars.len(), "rename arity");
        Polynomial {
            vars: vars.clone(),
            terms: self.terms.clone(),
        }
    }

    /// Shifts the origin to `point`: returns `p(point + v)`.
    pub fn translate(&self, point: &[Scalar]) -> Self {
        let images: Vec<Polynomial> = point
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Polynomial::var(&self.vars, i)
                    .add(&Polynomial::constant(&self.vars, c.clone()))
                    .expect("same ring")
            })
            .collect();
        self.substitute(&images).expect("same ring")
    }

    /// Fixes variable `var` to `value`, keeping the ring.
    pub fn specialize(&self, var: usize, value: &Scalar) -> Self {
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = std::mem::replace(&mut e[var], 0);
            out.add_term(Monomial(e), c * num_traits::pow(value.clone(), k as usize));
        }
        out
    }

    /// Reads a polynomial involving only variable `var` as a univariate one.
    pub fn to_univariate(&self, var: usize) -> Result<UniPoly> {
        let mut coeffs: Vec<Scalar> = Vec::new();
        for (m, c) in &self.terms {
            if m.0.iter().enumerate().any(|(i, &e)| i != var && e > 0) {
                return Err(Error::InvalidArgument(format!(
                    "{self} involves variables other than {}",
                    self.vars.names()[var]
                )));
            }
            let k = m.0[var] as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, Scalar::zero());
            }
            coeffs[k] = c.clone();
        }
        Ok(UniPoly::new(coeffs))
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

/// Substitutes `x ↦ sx`, `y ↦ sy` into a polynomial in `{x, y}`.
pub fn poly_compose(p: &Polynomial, sx: &Polynomial, sy: &Polynomial) -> Result<Polynomial> {
    if p.vars().len() != 2 {
        return Err(Error::DimensionMismatch {
            left: p.vars().len(),
            right: 2,
        });
    }
    p.substitute(&[sx.clone(), sy.clone()])
}

/// `x^i y^j c ↦ X^i Y^j Z^(d-i-j) c`.
pub fn homogenize(p: &Polynomial, d: u32) -> Result<Polynomial> {
    if p.vars().len() != 2 {
        return Err(Error::DimensionMismatch {
            left: p.vars().len(),
            right: 2,
        });
    }
    if let Degree::Finite(deg) = p.total_degree() {
        if deg > d {
            return Err(Error::DegreeTooSmall {
                degree: deg,
                requested: d,
            });
        }
    }
    let vars = Vars::xyz();
    Ok(Polynomial::from_terms(
        &vars,
        p.terms()
            .map(|(m, c)| (vec![m.0[0], m.0[1], d - m.degree()], c.clone())),
    ))
}

fn write_coefficient_and_monomial(
    f: &mut fmt::Formatter<'_>,
    vars: &Vars,
    m: &Monomial,
    c: &Scalar,
    first: bool,
) -> fmt::Result {
    let negative = c.is_negative();
    let magnitude = c.abs();
    if first {
        if negative {
            write!(f, "-")?;
        }
    } else if negative {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let mut factors: Vec<String> = Vec::new();
    for (name, &e) in vars.names().iter().zip(&m.0) {
        match e {
            0 => {}
            1 => factors.push(name.clone()),
            _ => factors.push(format!("{name}^{e}")),
        }
    }
    if factors.is_empty() {
        write!(f, "{magnitude}")
    } else if magnitude.is_one() {
        write!(f, "{}", factors.join("*"))
    } else {
        write!(f, "{magnitude}*{}", factors.join("*"))
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending graded-lexicographic order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            write_coefficient_and_monomial(f, &self.vars, m, c, i == 0)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} in {:?}", self.vars)
    }
}

/// An ordered pair of polynomials in `{x, y}` defining a plane map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMap {
    pub components: [Polynomial; 2],
}

impl PolyMap {
    pub fn new(p1: Polynomial, p2: Polynomial) -> Result<Self> {
        let xy = Vars::xy();
        for p in [&p1, &p2] {
            if p.vars() != &xy {
                return Err(Error::VariableMismatch {
                    left: "x, y".into(),
                    right: p.vars().names().join(", "),
                });
            }
        }
        Ok(PolyMap {
            components: [p1, p2],
        })
    }

    pub fn identity() -> Self {
        let xy = Vars::xy();
        PolyMap {
            components: [Polynomial::var(&xy, 0), Polynomial::var(&xy, 1)],
        }
    }

    /// Maximum of the component degrees.
    pub fn degree(&self) -> Degree {
        self.components[0]
            .total_degree()
            .max(self.components[1].total_degree())
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Polynomial::is_constant)
    }

    /// `self ∘ inner`, i.e. `(x, y) ↦ self(inner(x, y))`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        self.compose_budgeted(inner, usize::MAX)
    }

    pub fn compose_budgeted(&self, inner: &PolyMap, cap: usize) -> Result<PolyMap> {
        let images = [inner.components[0].clone(), inner.components[1].clone()];
        Ok(PolyMap {
            components: [
                self.components[0].substitute_budgeted(&images, cap)?,
                self.components[1].substitute_budgeted(&images, cap)?,
            ],
        })
    }

    pub fn num_terms(&self) -> usize {
        self.components.iter().map(Polynomial::num_terms).sum()
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.components[0], self.components[1])
    }
}
