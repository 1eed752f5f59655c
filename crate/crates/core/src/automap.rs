//! Plane polynomial automorphisms: validation, the table builders, degree
//! growth of iterates, projective lifts and the indeterminacy locus on the
//! line at infinity.

use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{homogenize, Degree, PolyMap, Polynomial, UniPoly, Vars};
use crate::scalar::{self, Scalar};

/// Default cap on the number of terms of an iterate.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineAutomorphism {
    forward: PolyMap,
    inverse: PolyMap,
    degree_fwd: u32,
    degree_inv: u32,
}

fn identity_residual(composite: &PolyMap) -> Option<Polynomial> {
    let id = PolyMap::identity();
    composite
        .components
        .iter()
        .zip(&id.components)
        .map(|(c, i)| c.sub(i).expect("same ring"))
        .find(|r| !r.is_zero())
}

impl AffineAutomorphism {
    /// Checks `fwd ∘ inv = inv ∘ fwd = id` exactly.
    pub fn new(forward: PolyMap, inverse: PolyMap) -> Result<Self> {
        if forward.is_constant() || inverse.is_constant() {
            return Err(Error::ConstantMap);
        }
        for composite in [forward.compose(&inverse)?, inverse.compose(&forward)?] {
            if let Some(residual) = identity_residual(&composite) {
                return Err(Error::NotInverse {
                    residual: residual.to_string(),
                });
            }
        }
        let degree = |m: &PolyMap| m.degree().finite().unwrap_or(0);
        Ok(AffineAutomorphism {
            degree_fwd: degree(&forward),
            degree_inv: degree(&inverse),
            forward,
            inverse,
        })
    }

    pub fn identity() -> Self {
        AffineAutomorphism::new(PolyMap::identity(), PolyMap::identity()).expect("identity")
    }

    /// Parses `"P1; P2; Q1; Q2"` in the variables `x, y`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(';').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "expected four `;`-separated polynomials, found {}",
                parts.len()
            )));
        }
        let xy = Vars::xy();
        let p: Vec<Polynomial> = parts
            .iter()
            .map(|t| crate::parse_poly(t, &xy))
            .collect::<Result<_>>()?;
        AffineAutomorphism::new(
            PolyMap::new(p[0].clone(), p[1].clone())?,
            PolyMap::new(p[2].clone(), p[3].clone())?,
        )
    }

    pub fn forward(&self) -> &PolyMap {
        &self.forward
    }

    pub fn inverse(&self) -> &PolyMap {
        &self.inverse
    }

    pub fn degree(&self) -> u32 {
        self.degree_fwd
    }

    pub fn degree_inv(&self) -> u32 {
        self.degree_inv
    }

    /// The automorphism with forward and inverse exchanged.
    pub fn inverted(&self) -> Self {
        AffineAutomorphism {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            degree_fwd: self.degree_inv,
            degree_inv: self.degree_fwd,
        }
    }

    /// Text form accepted by [`AffineAutomorphism::parse`].
    pub fn to_map_string(&self) -> String {
        format!(
            "{}; {}; {}; {}",
            self.forward.components[0],
            self.forward.components[1],
            self.inverse.components[0],
            self.inverse.components[1]
        )
    }
}

impl fmt::Display for AffineAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.forward)
    }
}

/// `(x, y) ↦ (y, q(y) + a·x)` with inverse `((y − q(x))/a, x)`.
/// `q` lives in the `{x, y}` ring and may only involve `y`.
pub fn henon_builder(q: &Polynomial, a: &Scalar) -> Result<AffineAutomorphism> {
    let xy = Vars::xy();
    if q.vars() != &xy {
        return Err(Error::VariableMismatch {
            left: "x, y".into(),
            right: q.vars().names().join(", "),
        });
    }
    if a.is_zero() {
        return Err(Error::DegenerateParameter("a must be nonzero".into()));
    }
    if q.terms().any(|(m, _)| m.0[0] > 0) {
        return Err(Error::DegenerateParameter(format!(
            "q = {q} must depend on y only"
        )));
    }
    if q.total_degree() < Degree::Finite(2) {
        return Err(Error::DegenerateParameter(format!(
            "q = {q} must have degree at least 2"
        )));
    }
    let x = Polynomial::var(&xy, 0);
    let y = Polynomial::var(&xy, 1);
    let forward = PolyMap::new(y.clone(), q.add(&x.scale(a))?)?;
    let q_of_x = q.substitute(&[y.clone(), x.clone()])?;
    let inverse = PolyMap::new(y.sub(&q_of_x)?.scale(&(Scalar::one() / a)), x)?;
    AffineAutomorphism::new(forward, inverse)
}

/// The quadratic family `(y, y² + b + a·x)`.
pub fn quadratic_henon(a: &Scalar, b: &Scalar) -> Result<AffineAutomorphism> {
    let xy = Vars::xy();
    let q = Polynomial::var(&xy, 1)
        .pow(2)
        .add(&Polynomial::constant(&xy, b.clone()))?;
    henon_builder(&q, a)
}

/// `(x, y) ↦ (y + a·x^d, x)` with inverse `(y, x − a·y^d)`.
pub fn transposed_henon_builder(d: u32, a: &Scalar) -> Result<AffineAutomorphism> {
    if d < 2 {
        return Err(Error::DegenerateParameter(format!(
            "d = {d} must be at least 2"
        )));
    }
    if a.is_zero() {
        return Err(Error::DegenerateParameter("a must be nonzero".into()));
    }
    let xy = Vars::xy();
    let x = Polynomial::var(&xy, 0);
    let y = Polynomial::var(&xy, 1);
    let forward = PolyMap::new(y.add(&x.pow(d).scale(a))?, x.clone())?;
    let inverse = PolyMap::new(y.clone(), x.sub(&y.pow(d).scale(a))?)?;
    AffineAutomorphism::new(forward, inverse)
}

/// The triangular map `(x, y + x^d)`, the standard non-regular example.
pub fn elementary_builder(d: u32, a: &Scalar) -> Result<AffineAutomorphism> {
    if d < 2 || a.is_zero() {
        return Err(Error::DegenerateParameter(format!(
            "elementary map needs d >= 2 and a != 0 (got d = {d}, a = {a})"
        )));
    }
    let xy = Vars::xy();
    let x = Polynomial::var(&xy, 0);
    let y = Polynomial::var(&xy, 1);
    let xd = x.pow(d).scale(a);
    AffineAutomorphism::new(
        PolyMap::new(x.clone(), y.add(&xd)?)?,
        PolyMap::new(x, y.sub(&xd)?)?,
    )
}

/// `outer ∘ inner`.
pub fn compose_automorphisms(
    outer: &AffineAutomorphism,
    inner: &AffineAutomorphism,
) -> Result<AffineAutomorphism> {
    AffineAutomorphism::new(
        outer.forward.compose(&inner.forward)?,
        inner.inverse.compose(&outer.inverse)?,
    )
}

/// Exact degrees `[deg φ¹, …, deg φᴺ]` of the symbolic iterates.
pub fn degree_sequence(phi: &AffineAutomorphism, n: usize, term_budget: usize) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "iterate count must be at least 1".into(),
        ));
    }
    let mut iterate = phi.forward.clone();
    let mut degrees = vec![phi.degree()];
    for _ in 1..n {
        iterate = iterate.compose_budgeted(&phi.forward, term_budget)?;
        if iterate.num_terms() > term_budget {
            return Err(Error::BudgetExceeded {
                terms: iterate.num_terms(),
                cap: term_budget,
            });
        }
        degrees.push(iterate.degree().finite().unwrap_or(0));
    }
    Ok(degrees)
}

/// `deg(φ^(m+n)) ≤ deg(φ^m)·deg(φ^n)` over every sampled pair.
pub fn is_submultiplicative(degrees: &[u32]) -> bool {
    let n = degrees.len();
    (1..=n).all(|i| {
        (1..=n - i).all(|j| {
            u64::from(degrees[i + j - 1]) <= u64::from(degrees[i - 1]) * u64::from(degrees[j - 1])
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicalDegreeEstimate {
    pub degrees: Vec<u32>,
    /// `deg(φᴺ)` together with `N`.
    pub last: (u32, usize),
    /// `deg(φᴺ)^(1/N)`, for display only.
    pub approximate: f64,
    pub stabilized: bool,
    /// The common ratio `deg(φⁿ⁺¹)/deg(φⁿ)` when it is constant over every sample.
    #[serde(with = "scalar::serde_opt")]
    pub exact: Option<Scalar>,
}

pub fn dynamical_degree_estimate(
    phi: &AffineAutomorphism,
    n: usize,
    term_budget: usize,
) -> Result<DynamicalDegreeEstimate> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two iterates".into()));
    }
    let degrees = degree_sequence(phi, n, term_budget)?;
    Ok(estimate_from_degrees(degrees))
}

pub fn estimate_from_degrees(degrees: Vec<u32>) -> DynamicalDegreeEstimate {
    let ratios: Vec<Scalar> = degrees
        .windows(2)
        .map(|w| scalar::rat(i64::from(w[1]), i64::from(w[0])))
        .collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let stabilized = !tail.is_empty() && tail.iter().all(|r| r == &tail[0]);
    let exact = (stabilized && ratios.iter().all(|r| r == &ratios[0])).then(|| ratios[0].clone());
    let n = degrees.len();
    let last = (*degrees.last().unwrap(), n);
    DynamicalDegreeEstimate {
        approximate: f64::from(last.0).powf(1.0 / n as f64),
        degrees,
        last,
        stabilized,
        exact,
    }
}

/// Homogeneous triple `[G0 : G1 : G2]` in `{X, Y, Z}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectiveMapLift {
    pub components: [Polynomial; 3],
    pub degree: u32,
}

impl ProjectiveMapLift {
    pub fn evaluate(&self, point: &[Scalar; 3]) -> [Scalar; 3] {
        [
            self.components[0].evaluate(point),
            self.components[1].evaluate(point),
            self.components[2].evaluate(point),
        ]
    }
}

impl fmt::Display for ProjectiveMapLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} : {} : {}]",
            self.components[0], self.components[1], self.components[2]
        )
    }
}

/// `[homog(P1, d) : homog(P2, d) : Z^d]` with any common monomial factor removed.
pub fn projective_lift(m: &PolyMap) -> Result<ProjectiveMapLift> {
    let d = m.degree().finite().ok_or(Error::ConstantMap)?;
    if m.is_constant() {
        return Err(Error::ConstantMap);
    }
    let xyz = Vars::xyz();
    let mut comps = [
        homogenize(&m.components[0], d)?,
        homogenize(&m.components[1], d)?,
        Polynomial::var(&xyz, 2).pow(d),
    ];
    let mut degree = d;
    for var in 0..3 {
        let k = comps
            .iter()
            .filter_map(|c| c.min_exponent(var))
            .min()
            .unwrap_or(0);
        if k > 0 {
            for c in comps.iter_mut() {
                *c = c.divide_by_var_power(var, k)?;
            }
            degree -= k;
        }
    }
    Ok(ProjectiveMapLift {
        components: comps,
        degree,
    })
}

/// A point `[u : v : 0]` of the line at infinity, first nonzero coordinate 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InfinityPoint {
    pub u: Scalar,
    pub v: Scalar,
}

impl InfinityPoint {
    pub fn new(u: Scalar, v: Scalar) -> Result<Self> {
        if !u.is_zero() {
            Ok(InfinityPoint {
                v: v / &u,
                u: Scalar::one(),
            })
        } else if !v.is_zero() {
            Ok(InfinityPoint {
                u: Scalar::zero(),
                v: Scalar::one(),
            })
        } else {
            Err(Error::InvalidArgument("[0 : 0 : 0] is not a point".into()))
        }
    }
}

impl fmt::Display for InfinityPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}:0]", self.u, self.v)
    }
}

/// Distinct common zeros of `polys`, all of which must be rational.
/// Zero polynomials impose no condition; `None` if every polynomial is zero.
pub(crate) fn common_rational_zeros(polys: &[UniPoly]) -> Result<Option<Vec<Scalar>>> {
    let mut g: Option<UniPoly> = None;
    for p in polys.iter().filter(|p| !p.is_zero()) {
        g = Some(match g {
            None => p.monic(),
            Some(acc) => acc.gcd(p),
        });
    }
    let Some(g) = g else { return Ok(None) };
    let sf = g.squarefree_part();
    let roots = sf
        .rational_roots()
        .ok_or_else(|| Error::NonRationalIndeterminacy {
            polynomial: sf.to_string(),
        })?;
    if roots.len() < sf.degree().unwrap_or(0) {
        return Err(Error::NonRationalIndeterminacy {
            polynomial: sf.to_string(),
        });
    }
    Ok(Some(roots))
}

/// Common zeros of the three components on `Z = 0`.
pub fn indeterminacy_points(lift: &ProjectiveMapLift) -> Result<Vec<InfinityPoint>> {
    let xyz = Vars::xyz();
    let one = Polynomial::one(&xyz);
    let zero = Polynomial::zero(&xyz);
    let t = Polynomial::var(&xyz, 1);
    // Affine piece [1 : t : 0].
    let restricted: Vec<UniPoly> = lift
        .components
        .iter()
        .map(|c| {
            c.substitute(&[one.clone(), t.clone(), zero.clone()])
                .and_then(|p| p.to_univariate(1))
        })
        .collect::<Result<_>>()?;
    let roots = common_rational_zeros(&restricted)?.ok_or_else(|| {
        Error::InvalidArgument("the whole line at infinity is indeterminate".into())
    })?;
    let mut points: Vec<InfinityPoint> = roots
        .into_iter()
        .map(|v| InfinityPoint::new(Scalar::one(), v))
        .collect::<Result<_>>()?;
    let pole = [Scalar::zero(), Scalar::one(), Scalar::zero()];
    if lift.evaluate(&pole).iter().all(Zero::is_zero) {
        points.push(InfinityPoint::new(Scalar::zero(), Scalar::one())?);
    }
    Ok(points)
}

/// The indeterminacy locus `Z(φ)` of a lift: empty for linear maps, a single
/// point for automorphisms of degree at least 2.
pub fn indeterminacy_on_h(lift: &ProjectiveMapLift) -> Result<Vec<InfinityPoint>> {
    let points = indeterminacy_points(lift)?;
    if points.len() > 1 {
        return Err(Error::UniquenessViolated {
            count: points.len(),
        });
    }
    Ok(points)
}

fn single_point(m: &PolyMap) -> Result<InfinityPoint> {
    let points = indeterminacy_on_h(&projective_lift(m)?)?;
    points
        .into_iter()
        .next()
        .ok_or(Error::UniquenessViolated { count: 0 })
}

/// `Z(φ) ∩ Z(φ⁻¹) = ∅`.
pub fn is_regular(phi: &AffineAutomorphism) -> Result<bool> {
    if phi.degree() < 2 {
        return Err(Error::DegreeTooLow {
            degree: phi.degree(),
        });
    }
    Ok(single_point(&phi.forward)? != single_point(&phi.inverse)?)
}

/// Samples rational points `p` of `H \ Z(φ)` and checks that the lift sends
/// each of them to the point `Z(φ⁻¹)`. Returns the number of points checked.
pub fn check_infinity_collapse<R: Rng + ?Sized>(
    phi: &AffineAutomorphism,
    samples: usize,
    rng: &mut R,
) -> Result<usize> {
    if phi.degree() < 2 {
        return Err(Error::DegreeTooLow {
            degree: phi.degree(),
        });
    }
    let lift = projective_lift(&phi.forward)?;
    let source = single_point(&phi.forward)?;
    let target = single_point(&phi.inverse)?;
    let mut checked = 0;
    while checked < samples {
        let v = scalar::random_nonzero(rng, 1000);
        let p = InfinityPoint::new(Scalar::one(), v)?;
        if p == source {
            continue;
        }
        let image = lift.evaluate(&[p.u.clone(), p.v.clone(), Scalar::zero()]);
        if !image[2].is_zero() {
            return Ok(checked);
        }
        match InfinityPoint::new(image[0].clone(), image[1].clone()) {
            Ok(q) if q == target => checked += 1,
            _ => return Ok(checked),
        }
    }
    Ok(checked)
}
