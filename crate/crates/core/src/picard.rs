//! Pullback classes, intersection identities and index bounds on the
//! canonical resolution.
//!
//! With `ψ = φ∘π` and `ψ′ = φ⁻¹∘π`, the class of interest is
//! `D(α) = ψ*H + ψ′*H − α·π*H`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::automap::{dynamical_degree_estimate, AffineAutomorphism, DynamicalDegreeEstimate};
use crate::blowup::{canonical_resolution, ResolutionConfig, ResolutionTower};
use crate::error::{Error, Result};
use crate::lattice::{DivisorClass, IntersectionLattice};
use crate::scalar::{self, int, Scalar};
use crate::simplex::feasible_point;

/// Denominator of the grid searched for the lower effective bound.
pub const GRID_DENOMINATOR: i64 = 10_000;

/// Coefficients of `ψ*H`, `ψ′*H`, `π*H` and `K` over `H♯, E_i, F_j`.
///
/// `bp_vec[j-1]`, `cp_vec[j-1]`, `ep_vec[j-1]` and `ap_vec[j-1]` are the
/// coefficients on `F_j`; for `j ≤ i0` this is the shared curve `E_j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolutionInvariants {
    pub n: usize,
    pub m: usize,
    pub i0: usize,
    #[serde(with = "scalar::serde_str")]
    pub b: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub c: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub e: Scalar,
    #[serde(with = "scalar::serde_vec")]
    pub b_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub c_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub e_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub bp_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub cp_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub ep_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub a_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_vec")]
    pub ap_vec: Vec<Scalar>,
    #[serde(with = "scalar::serde_str")]
    pub c_n: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub bp_m: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub e_n: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub ep_m: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub a_n: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub ap_m: Scalar,
    /// Display positions of `E_1 … E_n` and `F_1 … F_m`.
    pub e_positions: Vec<usize>,
    pub f_positions: Vec<usize>,
    pub psi: DivisorClass,
    pub psi_prime: DivisorClass,
    pub pi: DivisorClass,
    pub canonical: DivisorClass,
}

impl ResolutionInvariants {
    pub fn d_alpha(&self, alpha: &Scalar) -> DivisorClass {
        d_alpha(self, alpha)
    }
}

/// Lattice and invariants of a resolution, computed together.
#[derive(Clone, Debug)]
pub struct PicardData {
    pub lattice: IntersectionLattice,
    pub invariants: ResolutionInvariants,
}

impl PicardData {
    pub fn new(res: &ResolutionTower) -> Result<Self> {
        let lattice = IntersectionLattice::for_resolution(res);
        let invariants = pullback_classes(res, &lattice)?;
        Ok(PicardData {
            lattice,
            invariants,
        })
    }
}

pub fn build_lattice(res: &ResolutionTower) -> IntersectionLattice {
    IntersectionLattice::for_resolution(res)
}

/// Reads `ψ*H`, `ψ′*H` and `π*H` off the multiplicity ledger:
/// the pullback of a degree `d` system is `d·L − Σ mult_k 𝓔_k`.
pub fn pullback_classes(
    res: &ResolutionTower,
    lattice: &IntersectionLattice,
) -> Result<ResolutionInvariants> {
    let rank = lattice.rank();
    let ledger_class = |degree: u32, mult: &dyn Fn(usize) -> u32| -> Result<DivisorClass> {
        let mut v = vec![Scalar::zero(); rank];
        v[0] = int(i64::from(degree));
        for (k, record) in res.records.iter().enumerate() {
            v[record.blowup + 1] = -int(i64::from(mult(k)));
        }
        lattice.from_orthogonal(&v)
    };
    let psi = ledger_class(res.forward_lift.degree, &|k| res.records[k].mult_psi)?;
    let psi_prime = ledger_class(res.inverse_lift.degree, &|k| res.records[k].mult_psi_prime)?;
    let pi = ledger_class(1, &|k| res.records[k].mult_pi)?;
    let canonical = lattice.canonical_class();

    let e_positions: Vec<usize> = res
        .forward_family
        .iter()
        .map(|&r| lattice.position_of_blowup(res.records[r].blowup))
        .collect();
    let f_positions: Vec<usize> = res
        .inverse_family
        .iter()
        .map(|&r| lattice.position_of_blowup(res.records[r].blowup))
        .collect();
    let pick = |class: &DivisorClass, positions: &[usize]| -> Vec<Scalar> {
        positions
            .iter()
            .map(|&p| class.coefficients[p].clone())
            .collect()
    };
    let last = |v: &[Scalar]| v.last().cloned().unwrap_or_else(Scalar::zero);

    let e = pi.coefficients[0].clone();
    if !e.is_one() {
        return Err(Error::HyperplaneCoefficient(scalar::format_scalar(&e)));
    }
    let b_vec = pick(&psi, &e_positions);
    let c_vec = pick(&psi_prime, &e_positions);
    let e_vec = pick(&pi, &e_positions);
    let bp_vec = pick(&psi, &f_positions);
    let cp_vec = pick(&psi_prime, &f_positions);
    let ep_vec = pick(&pi, &f_positions);
    let a_vec = pick(&canonical, &e_positions);
    let ap_vec = pick(&canonical, &f_positions);
    Ok(ResolutionInvariants {
        n: res.n,
        m: res.m,
        i0: res.i0,
        b: psi.coefficients[0].clone(),
        c: psi_prime.coefficients[0].clone(),
        e,
        c_n: last(&c_vec),
        bp_m: last(&bp_vec),
        e_n: last(&e_vec),
        ep_m: last(&ep_vec),
        a_n: last(&a_vec),
        ap_m: last(&ap_vec),
        b_vec,
        c_vec,
        e_vec,
        bp_vec,
        cp_vec,
        ep_vec,
        a_vec,
        ap_vec,
        e_positions,
        f_positions,
        psi,
        psi_prime,
        pi,
        canonical,
    })
}

/// `ψ*H + ψ′*H − α·π*H`.
pub fn d_alpha(inv: &ResolutionInvariants, alpha: &Scalar) -> DivisorClass {
    inv.psi
        .add(&inv.psi_prime)
        .and_then(|s| s.sub(&inv.pi.scale(alpha)))
        .expect("classes share one lattice")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    #[serde(with = "scalar::serde_str")]
    pub lhs: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub rhs: Scalar,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, lhs: Scalar, rhs: Scalar) -> Self {
        IdentityCheck {
            name: name.into(),
            passed: lhs == rhs,
            lhs,
            rhs,
        }
    }
}

/// Evaluates every intersection identity of the resolution, and the
/// `D(α)` identities at each of `alphas`. Failures are returned as data.
pub fn verify_identities(
    inv: &ResolutionInvariants,
    lattice: &IntersectionLattice,
    alphas: &[Scalar],
) -> Result<Vec<IdentityCheck>> {
    let dot = |u: &DivisorClass, v: &DivisorClass| lattice.intersect(u, v);
    let basis = |p: usize| lattice.basis_class(p);
    let (psi, psi_p, pi, k) = (&inv.psi, &inv.psi_prime, &inv.pi, &inv.canonical);
    let h = lattice.h_sharp();
    let (n, m) = (inv.n, inv.m);
    let mut checks = vec![
        IdentityCheck::new("psi.psi' = c_n", dot(psi, psi_p)?, inv.c_n.clone()),
        IdentityCheck::new("psi.psi' = b'_m", dot(psi, psi_p)?, inv.bp_m.clone()),
        IdentityCheck::new("psi.pi = e_n", dot(psi, pi)?, inv.e_n.clone()),
        IdentityCheck::new("psi.pi = b", dot(psi, pi)?, inv.b.clone()),
        IdentityCheck::new("psi'.pi = e'_m", dot(psi_p, pi)?, inv.ep_m.clone()),
        IdentityCheck::new("psi'.pi = c", dot(psi_p, pi)?, inv.c.clone()),
        IdentityCheck::new("e = 1", inv.e.clone(), Scalar::one()),
    ];

    for (name, class) in [("psi^2", psi), ("psi'^2", psi_p), ("pi^2", pi)] {
        checks.push(IdentityCheck::new(
            format!("{name} = 1"),
            dot(class, class)?,
            Scalar::one(),
        ));
    }
    checks.push(IdentityCheck::new(
        "psi.H# = 0",
        dot(psi, &h)?,
        Scalar::zero(),
    ));
    checks.push(IdentityCheck::new(
        "psi'.H# = 0",
        dot(psi_p, &h)?,
        Scalar::zero(),
    ));
    for (i, &p) in inv.e_positions.iter().enumerate() {
        let expected = if i + 1 == n {
            Scalar::one()
        } else {
            Scalar::zero()
        };
        checks.push(IdentityCheck::new(
            format!("psi.E{}", i + 1),
            dot(psi, &basis(p))?,
            expected,
        ));
    }
    for (j, &p) in inv.f_positions.iter().enumerate() {
        let expected = if j + 1 == m {
            Scalar::one()
        } else {
            Scalar::zero()
        };
        checks.push(IdentityCheck::new(
            format!("psi'.F{}", j + 1),
            dot(psi_p, &basis(p))?,
            expected,
        ));
        // ψ contracts every F_j, including F_m.
        if j >= inv.i0 {
            checks.push(IdentityCheck::new(
                format!("psi.F{}", j + 1),
                dot(psi, &basis(p))?,
                Scalar::zero(),
            ));
        }
    }
    for (i, &p) in inv.e_positions.iter().enumerate().skip(inv.i0) {
        checks.push(IdentityCheck::new(
            format!("psi'.E{}", i + 1),
            dot(psi_p, &basis(p))?,
            Scalar::zero(),
        ));
    }

    let rank = lattice.rank();
    let (pos, neg, zero) = lattice.signature();
    checks.push(IdentityCheck::new(
        "signature positive",
        int(pos as i64),
        Scalar::one(),
    ));
    checks.push(IdentityCheck::new(
        "signature negative",
        int(neg as i64),
        int(rank as i64 - 1),
    ));
    checks.push(IdentityCheck::new(
        "signature null",
        int(zero as i64),
        Scalar::zero(),
    ));
    checks.push(IdentityCheck::new(
        "K^2 = 9 - (n + m - i0)",
        dot(k, k)?,
        int(9 - (n + m - inv.i0) as i64),
    ));

    for alpha in alphas {
        let d = d_alpha(inv, alpha);
        let tag = scalar::format_scalar(alpha);
        checks.push(IdentityCheck::new(
            format!("D({tag}).H# = -alpha"),
            dot(&d, &h)?,
            -alpha.clone(),
        ));
        for (i, &p) in inv.e_positions.iter().enumerate() {
            let expected = if i + 1 == n {
                Scalar::one()
            } else {
                Scalar::zero()
            };
            checks.push(IdentityCheck::new(
                format!("D({tag}).E{}", i + 1),
                dot(&d, &basis(p))?,
                expected,
            ));
        }
        for (j, &p) in inv.f_positions.iter().enumerate().skip(inv.i0) {
            let expected = if j + 1 == m {
                Scalar::one()
            } else {
                Scalar::zero()
            };
            checks.push(IdentityCheck::new(
                format!("D({tag}).F{}", j + 1),
                dot(&d, &basis(p))?,
                expected,
            ));
        }
        let two = int(2);
        let closed =
            &two * (Scalar::one() + &inv.c_n) - &two * alpha * (&inv.b + &inv.c) + alpha * alpha;
        checks.push(IdentityCheck::new(
            format!("D({tag})^2"),
            dot(&d, &d)?,
            closed,
        ));
        let kd = &inv.a_n + &inv.ap_m + int(3) * alpha;
        checks.push(IdentityCheck::new(format!("D({tag}).K"), dot(&d, k)?, kd));
    }
    Ok(checks)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpleWitness {
    #[serde(with = "scalar::serde_str")]
    pub alpha: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub intersection: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpleBound {
    #[serde(with = "scalar::serde_str")]
    pub bound: Scalar,
    pub witness: String,
    pub samples: Vec<AmpleWitness>,
}

/// `D(α)·H♯ = −α < 0` for every `α > 0`, so `D(α)` is not nef and the
/// ample index is at most 0. `samples` are evaluated on the lattice.
pub fn ample_index_upper_bound(
    inv: &ResolutionInvariants,
    lattice: &IntersectionLattice,
    samples: &[Scalar],
) -> Result<AmpleBound> {
    let h = lattice.h_sharp();
    let samples = samples
        .iter()
        .map(|alpha| {
            Ok(AmpleWitness {
                alpha: alpha.clone(),
                intersection: lattice.intersect(&d_alpha(inv, alpha), &h)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AmpleBound {
        bound: Scalar::zero(),
        witness: lattice.labels()[0].clone(),
        samples,
    })
}

/// Default `α` values at which the ample witness is evaluated.
pub fn ample_samples() -> Vec<Scalar> {
    vec![scalar::rat(1, 2), int(1), int(2)]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveBracket {
    #[serde(with = "scalar::serde_str")]
    pub lower: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub upper: Scalar,
    /// Nonnegative coefficients writing `D(lower)` over the generators.
    #[serde(with = "scalar::serde_vec")]
    pub certificate: Vec<Scalar>,
    pub generators: Vec<String>,
}

impl EffectiveBracket {
    pub fn exact(&self) -> Option<&Scalar> {
        (self.lower == self.upper).then_some(&self.lower)
    }
}

/// Upper bound from nef witnesses `N ∈ {π*H, ψ*H, ψ′*H}`: `D(α)·N ≥ 0`.
pub fn nef_upper_bound(
    inv: &ResolutionInvariants,
    lattice: &IntersectionLattice,
) -> Result<Scalar> {
    let sum = inv.psi.add(&inv.psi_prime)?;
    let mut best: Option<Scalar> = None;
    for witness in [&inv.pi, &inv.psi, &inv.psi_prime] {
        let denom = lattice.intersect(&inv.pi, witness)?;
        if !denom.is_positive() {
            continue;
        }
        let bound = lattice.intersect(&sum, witness)? / denom;
        if best.as_ref().is_none_or(|b| bound < *b) {
            best = Some(bound);
        }
    }
    best.ok_or_else(|| Error::ExactnessViolation("no nef witness meets pi*H positively".into()))
}

/// `min(b + c, (1 + c_n)/b, (1 + b′_m)/c)`.
pub fn closed_form_upper_bound(inv: &ResolutionInvariants) -> Scalar {
    let one = Scalar::one();
    let candidates = [
        &inv.b + &inv.c,
        (&one + &inv.c_n) / &inv.b,
        (&one + &inv.bp_m) / &inv.c,
    ];
    candidates.into_iter().min().expect("three candidates")
}

fn generators(
    inv: &ResolutionInvariants,
    lattice: &IntersectionLattice,
) -> Vec<(String, DivisorClass)> {
    let mut gens: Vec<(String, DivisorClass)> = (0..lattice.rank())
        .map(|p| (lattice.labels()[p].clone(), lattice.basis_class(p)))
        .collect();
    gens.push(("pi*H".into(), inv.pi.clone()));
    gens.push(("psi*H".into(), inv.psi.clone()));
    gens.push(("psi'*H".into(), inv.psi_prime.clone()));
    gens
}

/// Nonnegative coefficients of `D(α)` over the generators, if any.
fn decompose(
    inv: &ResolutionInvariants,
    gens: &[(String, DivisorClass)],
    alpha: &Scalar,
) -> Result<Option<Vec<Scalar>>> {
    let target = d_alpha(inv, alpha);
    let rank = target.rank();
    let a: Vec<Vec<Scalar>> = (0..rank)
        .map(|row| {
            gens.iter()
                .map(|(_, g)| g.coefficients[row].clone())
                .collect()
        })
        .collect();
    feasible_point(&a, &target.coefficients)
}

/// Lower bound: the largest grid point (or the upper bound itself) at which
/// `D(α)` is a nonnegative combination of known effective classes.
/// Upper bound: [`nef_upper_bound`].
pub fn effective_index_bracket(
    inv: &ResolutionInvariants,
    lattice: &IntersectionLattice,
) -> Result<EffectiveBracket> {
    let upper = nef_upper_bound(inv, lattice)?;
    let gens = generators(inv, lattice);
    let names = gens.iter().map(|(n, _)| n.clone()).collect();
    if let Some(cert) = decompose(inv, &gens, &upper)? {
        return Ok(EffectiveBracket {
            lower: upper.clone(),
            upper,
            certificate: cert,
            generators: names,
        });
    }
    let mut lo = Scalar::zero();
    let mut cert = decompose(inv, &gens, &lo)?.ok_or(Error::InfeasibleAtZero)?;
    let grid = Scalar::from_integer(GRID_DENOMINATOR.into());
    // Grid indices: lo_k feasible, hi_k infeasible (hi_k may be off-grid, rounded up).
    let mut lo_k = num_bigint::BigInt::zero();
    let mut hi_k = (&upper * &grid).ceil().to_integer();
    while &hi_k - &lo_k > num_bigint::BigInt::one() {
        let mid: num_bigint::BigInt = (&lo_k + &hi_k) / 2;
        let alpha = Scalar::from_integer(mid.clone()) / &grid;
        match decompose(inv, &gens, &alpha)? {
            Some(c) => {
                lo_k = mid;
                lo = alpha;
                cert = c;
            }
            None => hi_k = mid,
        }
    }
    Ok(EffectiveBracket {
        lower: lo,
        upper,
        certificate: cert,
        generators: names,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Polyhedral,
    Boundary,
    NotPolyhedral,
    Inconclusive,
}

/// `−(a_n + a′_m)/3`.
pub fn polyhedrality_threshold(a_n: &Scalar, ap_m: &Scalar) -> Scalar {
    -(a_n + ap_m) / int(3)
}

/// Compares the bracket with the threshold `t = −(a_n + a′_m)/3`.
/// `Boundary` means `lower < t = upper`: the index may equal `t`.
pub fn classify_effective_cone(
    lower: &Scalar,
    upper: &Scalar,
    a_n: &Scalar,
    ap_m: &Scalar,
) -> Verdict {
    let t = polyhedrality_threshold(a_n, ap_m);
    if *lower > t {
        Verdict::NotPolyhedral
    } else if *lower == t && *upper == t {
        Verdict::Polyhedral
    } else if *upper == t {
        Verdict::Boundary
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CanonicalSign {
    PolyhedralPart,
    KZeroBoundary,
    KPositivePart,
}

/// Sign of `D(α)·K = a_n + a′_m + 3α`.
pub fn canonical_sign_region(inv: &ResolutionInvariants, alpha: &Scalar) -> CanonicalSign {
    let value = &inv.a_n + &inv.ap_m + int(3) * alpha;
    if value.is_negative() {
        CanonicalSign::PolyhedralPart
    } else if value.is_zero() {
        CanonicalSign::KZeroBoundary
    } else {
        CanonicalSign::KPositivePart
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaComparison {
    /// `δ + 1/deg`, when `δ` is known exactly.
    #[serde(with = "scalar::serde_opt")]
    pub predicted: Option<Scalar>,
    pub matches: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub degrees: Vec<u32>,
    pub approximate: f64,
    pub stabilized: bool,
    #[serde(with = "scalar::serde_opt")]
    pub exact: Option<Scalar>,
}

impl From<&DynamicalDegreeEstimate> for DeltaEstimate {
    fn from(e: &DynamicalDegreeEstimate) -> Self {
        DeltaEstimate {
            degrees: e.degrees.clone(),
            approximate: e.approximate,
            stabilized: e.stabilized,
            exact: e.exact.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexReport {
    pub map: String,
    pub degree: u32,
    pub delta_estimate: DeltaEstimate,
    pub n: usize,
    pub m: usize,
    pub i0: usize,
    pub regular: bool,
    pub swapped: bool,
    pub basis: Vec<String>,
    pub coefficients: ResolutionInvariants,
    pub identity_checks: Vec<IdentityCheck>,
    pub ample_bound: AmpleBound,
    #[serde(with = "scalar::serde_str")]
    pub eff_upper_closed_form: Scalar,
    pub effective: EffectiveBracket,
    #[serde(with = "scalar::serde_str")]
    pub eff_lower: Scalar,
    #[serde(with = "scalar::serde_str")]
    pub eff_upper: Scalar,
    #[serde(with = "scalar::serde_opt")]
    pub eff_exact: Option<Scalar>,
    #[serde(with = "scalar::serde_str")]
    pub polyhedrality_threshold: Scalar,
    pub cone_verdict: Verdict,
    pub delta_comparison: DeltaComparison,
}

impl IndexReport {
    pub fn all_identities_pass(&self) -> bool {
        self.identity_checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct IndexConfig {
    pub resolution: ResolutionConfig,
    pub iterates: usize,
    pub term_budget: usize,
    /// `α` values used by the `D(α)` identities.
    pub alphas: Vec<Scalar>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            resolution: ResolutionConfig::default(),
            iterates: 5,
            term_budget: crate::automap::DEFAULT_TERM_BUDGET,
            alphas: vec![
                Scalar::zero(),
                scalar::rat(1, 2),
                int(1),
                scalar::rat(5, 2),
                int(-3),
            ],
        }
    }
}

/// Runs the whole pipeline: degree growth, resolution, lattice and indices.
pub fn index_report(phi: &AffineAutomorphism, config: &IndexConfig) -> Result<IndexReport> {
    let estimate = dynamical_degree_estimate(phi, config.iterates, config.term_budget)?;
    let res = canonical_resolution(phi, &config.resolution)?;
    report_for_resolution(phi, &res, &estimate, config)
}

pub fn report_for_resolution(
    phi: &AffineAutomorphism,
    res: &ResolutionTower,
    estimate: &DynamicalDegreeEstimate,
    config: &IndexConfig,
) -> Result<IndexReport> {
    let PicardData {
        lattice,
        invariants,
    } = PicardData::new(res)?;
    let identity_checks = verify_identities(&invariants, &lattice, &config.alphas)?;
    let ample_bound = ample_index_upper_bound(&invariants, &lattice, &ample_samples())?;
    let effective = effective_index_bracket(&invariants, &lattice)?;
    let eff_exact = effective.exact().cloned();
    let threshold = polyhedrality_threshold(&invariants.a_n, &invariants.ap_m);
    let verdict = classify_effective_cone(
        &effective.lower,
        &effective.upper,
        &invariants.a_n,
        &invariants.ap_m,
    );
    let predicted = estimate
        .exact
        .as_ref()
        .map(|delta| delta + scalar::rat(1, i64::from(phi.degree())));
    let matches = match (&predicted, &eff_exact) {
        (Some(p), Some(e)) => Some(p == e),
        _ => None,
    };
    Ok(IndexReport {
        map: phi.to_map_string(),
        degree: phi.degree(),
        delta_estimate: estimate.into(),
        n: res.n,
        m: res.m,
        i0: res.i0,
        regular: res.regular,
        swapped: res.swapped,
        basis: lattice.labels().to_vec(),
        eff_upper_closed_form: closed_form_upper_bound(&invariants),
        coefficients: invariants,
        identity_checks,
        ample_bound,
        eff_lower: effective.lower.clone(),
        eff_upper: effective.upper.clone(),
        effective,
        eff_exact,
        polyhedrality_threshold: threshold,
        cone_verdict: verdict,
        delta_comparison: DeltaComparison { predicted, matches },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automap::{elementary_builder, quadratic_henon, transposed_henon_builder};
    use crate::scalar::rat;

    fn data(phi: &AffineAutomorphism) -> (ResolutionTower, PicardData) {
        let res = canonical_resolution(phi, &ResolutionConfig::default()).unwrap();
        let data = PicardData::new(&res).unwrap();
        (res, data)
    }

    fn henon() -> AffineAutomorphism {
        quadratic_henon(&int(1), &int(1)).unwrap()
    }

    #[test]
    fn henon_invariants() {
        let (
            _,
            PicardData {
                lattice,
                invariants: inv,
            },
        ) = data(&henon());
        assert_eq!(
            (inv.b.clone(), inv.c.clone(), inv.e.clone()),
            (int(2), int(2), int(1))
        );
        assert_eq!(inv.c_n, int(4));
        assert_eq!(inv.bp_m, int(4));
        assert_eq!(lattice.intersect(&inv.psi, &inv.pi).unwrap(), int(2));
        assert_eq!(lattice.intersect(&inv.psi, &inv.psi_prime).unwrap(), int(4));
        assert_eq!(lattice.intersect(&inv.pi, &inv.pi).unwrap(), int(1));
        let rank = lattice.rank() as i64;
        assert_eq!(lattice.signature(), (1, (rank - 1) as usize, 0));
    }

    #[test]
    fn henon_identities_pass() {
        let (
            _,
            PicardData {
                lattice,
                invariants,
            },
        ) = data(&henon());
        let alphas = [rat(1, 3), int(-2), rat(7, 5)];
        for check in verify_identities(&invariants, &lattice, &alphas).unwrap() {
            assert!(check.passed, "{check:?}");
        }
    }

    #[test]
    fn corrupted_ledger_is_detected() {
        let (mut res, _) = data(&henon());
        let last = *res.forward_family.last().unwrap();
        res.records[last].mult_psi += 1;
        let PicardData {
            lattice,
            invariants,
        } = PicardData::new(&res).unwrap();
        let checks = verify_identities(&invariants, &lattice, &[int(1)]).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
    }

    #[test]
    fn henon_bracket_collapses() {
        let (
            _,
            PicardData {
                lattice,
                invariants,
            },
        ) = data(&henon());
        let bracket = effective_index_bracket(&invariants, &lattice).unwrap();
        assert_eq!(bracket.exact(), Some(&rat(5, 2)));
        assert_eq!(closed_form_upper_bound(&invariants), rat(5, 2));
        let d = invariants.d_alpha(&rat(5, 2));
        let mut sum = DivisorClass::zero(lattice.rank());
        for (coef, (_, g)) in bracket
            .certificate
            .iter()
            .zip(generators(&invariants, &lattice))
        {
            assert!(!coef.is_negative());
            sum = sum.add(&g.scale(coef)).unwrap();
        }
        assert_eq!(sum, d);
    }

    #[test]
    fn cubic_transposed_bracket() {
        let phi = transposed_henon_builder(3, &int(1)).unwrap();
        let (
            _,
            PicardData {
                lattice,
                invariants,
            },
        ) = data(&phi);
        assert_eq!(
            (invariants.b.clone(), invariants.c.clone()),
            (int(3), int(3))
        );
        let bracket = effective_index_bracket(&invariants, &lattice).unwrap();
        assert_eq!(bracket.exact(), Some(&rat(10, 3)));
        for check in verify_identities(&invariants, &lattice, &[rat(2, 7)]).unwrap() {
            assert!(check.passed, "{check:?}");
        }
    }

    #[test]
    fn ample_witness() {
        let (
            _,
            PicardData {
                lattice,
                invariants,
            },
        ) = data(&henon());
        let bound = ample_index_upper_bound(&invariants, &lattice, &[int(1), int(-1)]).unwrap();
        assert!(bound.bound.is_zero());
        assert_eq!(bound.witness, "H#");
        assert_eq!(bound.samples[0].intersection, int(-1));
        assert_eq!(bound.samples[1].intersection, int(1));
    }

    #[test]
    fn classification() {
        let (a, ap) = (int(-3), int(-3));
        assert_eq!(polyhedrality_threshold(&a, &ap), int(2));
        assert_eq!(
            classify_effective_cone(&rat(5, 2), &rat(5, 2), &a, &ap),
            Verdict::NotPolyhedral
        );
        assert_eq!(
            classify_effective_cone(&int(2), &int(2), &a, &ap),
            Verdict::Polyhedral
        );
        assert_eq!(
            classify_effective_cone(&int(1), &int(3), &a, &ap),
            Verdict::Inconclusive
        );
        assert_eq!(
            classify_effective_cone(&int(1), &int(2), &a, &ap),
            Verdict::Boundary
        );
        assert_eq!(
            classify_effective_cone(&int(0), &int(1), &a, &ap),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn canonical_sign_regions() {
        let (_, PicardData { invariants, .. }) = data(&henon());
        let t = polyhedrality_threshold(&invariants.a_n, &invariants.ap_m);
        assert_eq!(
            canonical_sign_region(&invariants, &t),
            CanonicalSign::KZeroBoundary
        );
        assert_eq!(
            canonical_sign_region(&invariants, &(&t - int(1))),
            CanonicalSign::PolyhedralPart
        );
        assert_eq!(
            canonical_sign_region(&invariants, &(&t + rat(1, 9))),
            CanonicalSign::KPositivePart
        );
    }

    #[test]
    fn elementary_map_identities() {
        let phi = elementary_builder(2, &int(1)).unwrap();
        let (
            res,
            PicardData {
                lattice,
                invariants,
            },
        ) = data(&phi);
        assert!(res.i0 >= 1);
        assert_eq!(lattice.rank(), 1 + res.n + res.m - res.i0);
        for check in verify_identities(&invariants, &lattice, &[rat(1, 2)]).unwrap() {
            assert!(check.passed, "{check:?}");
        }
    }

    #[test]
    fn report_serializes() {
        let report = index_report(&henon(), &IndexConfig::default()).unwrap();
        assert!(report.all_identities_pass());
        assert_eq!(report.eff_exact, Some(rat(5, 2)));
        assert_eq!(report.delta_comparison.matches, Some(true));
        let json = serde_json::to_string(&report).unwrap();
        let back: IndexReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.eff_exact, report.eff_exact);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
