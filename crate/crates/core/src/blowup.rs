//! Iterated blow-ups over the line at infinity and the canonical resolution of
//! a plane automorphism.
//!
//! A [`Tower`] is a chart forest. The three roots are the standard affine
//! charts of the projective plane. Blowing up a point `p = (p1, p2)` of a chart
//! with coordinates `(u, v)` adds two charts with coordinates `(s, t)`:
//!
//! * chart A: `(u, v) = (p1 + s, p2 + s·t)`, exceptional curve `{s = 0}`;
//! * chart B: `(u, v) = (p1 + s·t, p2 + t)`, exceptional curve `{t = 0}`.
//!
//! Chart A sees the whole exceptional curve except the single point at the
//! origin of chart B, so every point of the curve has exactly one canonical
//! representative: `(0, t)` in chart A or `(0, 0)` in chart B.
//!
//! Each chart also carries the local equations of the boundary curves (the
//! strict transforms of `H` and of earlier exceptional curves) it sees. A chart
//! is only trusted near its own exceptional curve; later blow-ups elsewhere do
//! not update it.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use crate::automap::{
    common_rational_zeros, indeterminacy_on_h, projective_lift, AffineAutomorphism, InfinityPoint,
    ProjectiveMapLift,
};
use crate::error::{Error, Result};
use crate::poly::{Polynomial, UniPoly, Vars};
use crate::scalar::{self, Scalar};

pub type ChartId = usize;

/// Default cap on the number of blow-ups in a canonical resolution.
pub const DEFAULT_STEP_BUDGET: usize = 64;

/// The affine chart of the projective plane where the named coordinate is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RootChart {
    X,
    Y,
    Z,
}

/// A curve of the boundary: the line at infinity or an exceptional curve
/// (indexed by its blow-up).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Curve {
    H,
    Exceptional(usize),
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub id: ChartId,
    pub parent: Option<ChartId>,
    pub root: Option<RootChart>,
    /// Parent coordinates written in this chart's coordinates.
    pub transition: Option<[Polynomial; 2]>,
    /// Index of the coordinate cutting out the newest exceptional curve.
    pub exceptional_coordinate: Option<usize>,
    /// Blow-up that created the chart.
    pub created_by: Option<usize>,
    pub vars: Vars,
    curves: Vec<(Curve, Polynomial)>,
}

impl Chart {
    /// Local equations of the boundary curves visible in this chart.
    pub fn curves(&self) -> &[(Curve, Polynomial)] {
        &self.curves
    }

    pub fn curve_equation(&self, curve: Curve) -> Option<&Polynomial> {
        self.curves
            .iter()
            .find(|(c, _)| *c == curve)
            .map(|(_, p)| p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TowerPoint {
    pub chart: ChartId,
    pub coords: [Scalar; 2],
}

impl fmt::Display for TowerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chart {} ({}, {})",
            self.chart, self.coords[0], self.coords[1]
        )
    }
}

#[derive(Clone, Debug)]
pub struct BlowUp {
    pub center: TowerPoint,
    /// Charts A and B.
    pub charts: [ChartId; 2],
    /// Boundary curves passing through the center when it was blown up.
    pub curves_through_center: Vec<Curve>,
}

/// Geometry of an iterated blow-up of the projective plane.
#[derive(Clone, Debug)]
pub struct Tower {
    charts: Vec<Chart>,
    blowups: Vec<BlowUp>,
}

impl Default for Tower {
    fn default() -> Self {
        Tower::new()
    }
}

impl Tower {
    pub fn new() -> Self {
        let mut charts = Vec::new();
        for (id, (root, names)) in [
            (RootChart::X, ["y", "z"]),
            (RootChart::Y, ["x", "z"]),
            (RootChart::Z, ["x", "y"]),
        ]
        .into_iter()
        .enumerate()
        {
            let vars = Vars::new(&names);
            let curves = match root {
                RootChart::Z => Vec::new(),
                _ => vec![(Curve::H, Polynomial::var(&vars, 1))],
            };
            charts.push(Chart {
                id,
                parent: None,
                root: Some(root),
                transition: None,
                exceptional_coordinate: None,
                created_by: None,
                vars,
                curves,
            });
        }
        Tower {
            charts,
            blowups: Vec::new(),
        }
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, id: ChartId) -> &Chart {
        &self.charts[id]
    }

    pub fn blowups(&self) -> &[BlowUp] {
        &self.blowups
    }

    pub fn root_chart(&self, root: RootChart) -> ChartId {
        match root {
            RootChart::X => 0,
            RootChart::Y => 1,
            RootChart::Z => 2,
        }
    }

    /// Canonical representative of a point of the line at infinity.
    pub fn infinity_point(&self, p: &InfinityPoint) -> TowerPoint {
        if p.u.is_zero() {
            TowerPoint {
                chart: self.root_chart(RootChart::Y),
                coords: [Scalar::zero(), Scalar::zero()],
            }
        } else {
            TowerPoint {
                chart: self.root_chart(RootChart::X),
                coords: [&p.v / &p.u, Scalar::zero()],
            }
        }
    }

    /// The point `(x, y)` of the affine plane.
    pub fn affine_point(&self, x: Scalar, y: Scalar) -> TowerPoint {
        TowerPoint {
            chart: self.root_chart(RootChart::Z),
            coords: [x, y],
        }
    }

    /// Index of the blow-up centered at `p`, if any.
    pub fn blowup_at(&self, p: &TowerPoint) -> Option<usize> {
        self.blowups.iter().position(|b| &b.center == p)
    }

    /// Blows up `p` and returns the index of the new blow-up.
    pub fn blow_up_at(&mut self, p: &TowerPoint) -> Result<usize> {
        if p.chart >= self.charts.len() {
            return Err(Error::InvalidArgument(format!("no chart {}", p.chart)));
        }
        if self.blowup_at(p).is_some() {
            return Err(Error::DuplicateCenter(p.to_string()));
        }
        let index = self.blowups.len();
        let parent = &self.charts[p.chart];
        let curves_through_center: Vec<Curve> = parent
            .curves
            .iter()
            .filter(|(_, eq)| eq.evaluate(&p.coords).is_zero())
            .map(|(c, _)| *c)
            .collect();

        let vars = Vars::new(&["s", "t"]);
        let s = Polynomial::var(&vars, 0);
        let t = Polynomial::var(&vars, 1);
        let st = s.mul(&t)?;
        let shift = |c: &Scalar, q: &Polynomial| q.add(&Polynomial::constant(&vars, c.clone()));
        let transitions = [
            [shift(&p.coords[0], &s)?, shift(&p.coords[1], &st)?],
            [shift(&p.coords[0], &st)?, shift(&p.coords[1], &t)?],
        ];

        let mut new_ids = [0; 2];
        for (k, transition) in transitions.into_iter().enumerate() {
            let id = self.charts.len();
            let parent = &self.charts[p.chart];
            let mut curves = Vec::new();
            for (curve, eq) in &parent.curves {
                let pulled = eq.substitute(&transition)?;
                let power = pulled.min_exponent(k).unwrap_or(0);
                let strict = pulled.divide_by_var_power(k, power)?;
                if !strict.is_constant() {
                    curves.push((*curve, strict));
                }
            }
            curves.push((Curve::Exceptional(index), Polynomial::var(&vars, k)));
            self.charts.push(Chart {
                id,
                parent: Some(p.chart),
                root: None,
                transition: Some(transition),
                exceptional_coordinate: Some(k),
                created_by: Some(index),
                vars: vars.clone(),
                curves,
            });
            new_ids[k] = id;
        }
        self.blowups.push(BlowUp {
            center: p.clone(),
            charts: new_ids,
            curves_through_center,
        });
        Ok(index)
    }

    /// Replays the blow-ups not in `drop`, in order. Blow-ups centered on
    /// charts of a dropped blow-up are dropped as well. Returns the new tower
    /// and the map from old to new blow-up indices.
    pub fn without(&self, drop: &[usize]) -> Result<(Tower, Vec<Option<usize>>)> {
        let mut out = Tower::new();
        let mut chart_map: HashMap<ChartId, ChartId> = (0..3).map(|i| (i, i)).collect();
        let mut index_map = vec![None; self.blowups.len()];
        for (k, b) in self.blowups.iter().enumerate() {
            if drop.contains(&k) {
                continue;
            }
            let Some(&chart) = chart_map.get(&b.center.chart) else {
                continue;
            };
            let new_index = out.blow_up_at(&TowerPoint {
                chart,
                coords: b.center.coords.clone(),
            })?;
            index_map[k] = Some(new_index);
            for (old, new) in b.charts.iter().zip(out.blowups[new_index].charts) {
                chart_map.insert(*old, new);
            }
        }
        Ok((out, index_map))
    }

    /// Candidate points of the boundary, grouped by where they are searched:
    /// the line `H` in the root charts, and every exceptional curve.
    fn boundary_pieces(&self) -> Vec<BoundaryPiece> {
        let mut pieces = vec![
            BoundaryPiece::Line {
                chart: self.root_chart(RootChart::X),
                coordinate: 1,
            },
            BoundaryPiece::Origin(self.root_chart(RootChart::Y)),
        ];
        for b in &self.blowups {
            pieces.push(BoundaryPiece::Line {
                chart: b.charts[0],
                coordinate: 0,
            });
            pieces.push(BoundaryPiece::Origin(b.charts[1]));
        }
        pieces
    }
}

/// A piece of boundary on which base points are searched: the line
/// `{coordinate = 0}` of a chart, or the origin of a chart.
#[derive(Clone, Copy, Debug)]
enum BoundaryPiece {
    Line { chart: ChartId, coordinate: usize },
    Origin(ChartId),
}

/// Components of a lift written in one chart, with the power of the chart's
/// exceptional coordinate that was divided out.
#[derive(Clone, Debug)]
pub struct CleanedLift {
    pub components: Vec<Polynomial>,
    pub extracted: u32,
}

/// Cleaned pullbacks of a fixed family of homogeneous forms to every chart of
/// a tower, computed on demand.
#[derive(Clone, Debug)]
pub struct LiftCache {
    forms: Vec<Polynomial>,
    cleaned: HashMap<ChartId, CleanedLift>,
}

impl LiftCache {
    pub fn new(forms: Vec<Polynomial>) -> Self {
        LiftCache {
            forms,
            cleaned: HashMap::new(),
        }
    }

    pub fn for_lift(lift: &ProjectiveMapLift) -> Self {
        LiftCache::new(lift.components.to_vec())
    }

    /// Pulls the forms back to `chart` and divides by the largest common power
    /// of the chart's exceptional coordinate.
    pub fn get(&mut self, tower: &Tower, chart: ChartId) -> Result<&CleanedLift> {
        if !self.cleaned.contains_key(&chart) {
            let value = self.compute(tower, chart)?;
            self.cleaned.insert(chart, value);
        }
        Ok(&self.cleaned[&chart])
    }

    fn compute(&mut self, tower: &Tower, chart: ChartId) -> Result<CleanedLift> {
        let c = tower.chart(chart);
        match (c.root, c.parent, &c.transition) {
            (Some(root), _, _) => {
                let one = Polynomial::one(&c.vars);
                let u = Polynomial::var(&c.vars, 0);
                let v = Polynomial::var(&c.vars, 1);
                let images = match root {
                    RootChart::X => [one, u, v],
                    RootChart::Y => [u, one, v],
                    RootChart::Z => [u, v, one],
                };
                let components = self
                    .forms
                    .iter()
                    .map(|f| f.substitute(&images))
                    .collect::<Result<_>>()?;
                Ok(CleanedLift {
                    components,
                    extracted: 0,
                })
            }
            (None, Some(parent), Some(transition)) => {
                let k = c.exceptional_coordinate.expect("blow-up chart");
                let parent_components = self.get(tower, parent)?.components.clone();
                let pulled: Vec<Polynomial> = parent_components
                    .iter()
                    .map(|p| p.substitute(transition))
                    .collect::<Result<_>>()?;
                let power = pulled
                    .iter()
                    .filter_map(|p| p.min_exponent(k))
                    .min()
                    .unwrap_or(0);
                let components = pulled
                    .iter()
                    .map(|p| p.divide_by_var_power(k, power))
                    .collect::<Result<_>>()?;
                Ok(CleanedLift {
                    components,
                    extracted: power,
                })
            }
            _ => unreachable!("chart is either a root or has a parent"),
        }
    }

    /// Power divided out when blowing up `blowup` (the multiplicity of a
    /// general member of the linear system at the center). Both charts must
    /// agree.
    pub fn multiplicity(&mut self, tower: &Tower, blowup: usize) -> Result<u32> {
        let [a, b] = tower.blowups()[blowup].charts;
        let ma = self.get(tower, a)?.extracted;
        let mb = self.get(tower, b)?.extracted;
        if ma != mb {
            return Err(Error::ExactnessViolation(format!(
                "charts of blow-up {blowup} disagree on multiplicity ({ma} vs {mb})"
            )));
        }
        Ok(ma)
    }

    fn base_points_on(&mut self, tower: &Tower, piece: BoundaryPiece) -> Result<Vec<TowerPoint>> {
        match piece {
            BoundaryPiece::Origin(chart) => {
                let origin = [Scalar::zero(), Scalar::zero()];
                let cleaned = self.get(tower, chart)?;
                if cleaned
                    .components
                    .iter()
                    .all(|c| c.evaluate(&origin).is_zero())
                {
                    Ok(vec![TowerPoint {
                        chart,
                        coords: origin,
                    }])
                } else {
                    Ok(Vec::new())
                }
            }
            BoundaryPiece::Line { chart, coordinate } => {
                let free = 1 - coordinate;
                let cleaned = self.get(tower, chart)?;
                let restricted: Vec<UniPoly> = cleaned
                    .components
                    .iter()
                    .map(|c| {
                        c.specialize(coordinate, &Scalar::zero())
                            .to_univariate(free)
                    })
                    .collect::<Result<_>>()?;
                let roots = common_rational_zeros(&restricted)?.ok_or_else(|| {
                    Error::ExactnessViolation(format!(
                        "lift vanishes identically on a boundary curve of chart {chart}"
                    ))
                })?;
                Ok(roots
                    .into_iter()
                    .map(|r| {
                        let mut coords = [Scalar::zero(), Scalar::zero()];
                        coords[free] = r;
                        TowerPoint { chart, coords }
                    })
                    .collect())
            }
        }
    }

    /// The indeterminacy point of the lifted map on the exceptional curve of
    /// `blowup` (or on `H` when `blowup` is `None`).
    pub fn indeterminacy_on_tower(
        &mut self,
        tower: &Tower,
        blowup: Option<usize>,
    ) -> Result<Option<TowerPoint>> {
        let pieces = match blowup {
            None => vec![
                BoundaryPiece::Line {
                    chart: tower.root_chart(RootChart::X),
                    coordinate: 1,
                },
                BoundaryPiece::Origin(tower.root_chart(RootChart::Y)),
            ],
            Some(k) => {
                let [a, b] = tower.blowups()[k].charts;
                vec![
                    BoundaryPiece::Line {
                        chart: a,
                        coordinate: 0,
                    },
                    BoundaryPiece::Origin(b),
                ]
            }
        };
        let mut found = Vec::new();
        for piece in pieces {
            found.extend(self.base_points_on(tower, piece)?);
        }
        if found.len() > 1 {
            return Err(Error::UniquenessViolated { count: found.len() });
        }
        Ok(found.pop())
    }

    /// Base points anywhere on the boundary that have not been blown up. The
    /// lifted map is a morphism on the tower iff this is empty.
    pub fn unresolved_base_points(&mut self, tower: &Tower) -> Result<Vec<TowerPoint>> {
        let mut out = Vec::new();
        for piece in tower.boundary_pieces() {
            for p in self.base_points_on(tower, piece)? {
                if tower.blowup_at(&p).is_none() {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

/// Pulls `lift` back to `chart` and strips the exceptional factor.
pub fn lift_and_clean(
    tower: &Tower,
    lift: &ProjectiveMapLift,
    chart: ChartId,
) -> Result<CleanedLift> {
    LiftCache::for_lift(lift).get(tower, chart).cloned()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub enum Family {
    E,
    F,
}

/// `E_i` or `F_j`, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub struct Label {
    pub family: Family,
    pub index: usize,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.family {
            Family::E => "E",
            Family::F => "F",
        };
        write!(f, "{name}{}", self.index)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalRecord {
    pub label: Label,
    /// Index of the blow-up in the tower.
    pub blowup: usize,
    #[serde(serialize_with = "serialize_point")]
    pub center: TowerPoint,
    /// Record whose exceptional curve carries the center.
    pub parent_label: Option<Label>,
    /// Multiplicities of the forward map, the inverse map and a general line
    /// at the center.
    pub mult_psi: u32,
    pub mult_psi_prime: u32,
    pub mult_pi: u32,
    /// Whether the strict transform of `H` passes through the center.
    pub on_h: bool,
}

fn serialize_point<S: serde::Serializer>(
    p: &TowerPoint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("TowerPoint", 2)?;
    st.serialize_field("chart", &p.chart)?;
    st.serialize_field(
        "coords",
        &[
            scalar::format_scalar(&p.coords[0]),
            scalar::format_scalar(&p.coords[1]),
        ],
    )?;
    st.end()
}

#[derive(Clone, Debug)]
pub struct ResolutionConfig {
    pub step_budget: usize,
    pub seed: u64,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        ResolutionConfig {
            step_budget: DEFAULT_STEP_BUDGET,
            seed: 0,
        }
    }
}

/// The canonical resolution: the tower together with both exceptional
/// families and the multiplicity ledger.
#[derive(Clone, Debug)]
pub struct ResolutionTower {
    pub tower: Tower,
    /// Records in blow-up order (`records[k].blowup == k`).
    pub records: Vec<ExceptionalRecord>,
    /// Record indices of `E_1 … E_n`.
    pub forward_family: Vec<usize>,
    /// Record indices of `F_1 … F_m`; the first `i0` are shared with the forward family.
    pub inverse_family: Vec<usize>,
    pub i0: usize,
    pub n: usize,
    pub m: usize,
    pub regular: bool,
    /// True when the input was replaced by its inverse to get `n ≤ m`.
    pub swapped: bool,
    /// The automorphism the families refer to (already swapped).
    pub map: AffineAutomorphism,
    pub forward_lift: ProjectiveMapLift,
    pub inverse_lift: ProjectiveMapLift,
    pub proper_points: (InfinityPoint, InfinityPoint),
}

impl ResolutionTower {
    pub fn label_of(&self, record: usize) -> Label {
        self.records[record].label
    }

    /// The record carrying `label` (`F_j` for `j ≤ i0` resolves to `E_j`).
    pub fn record_of(&self, label: Label) -> Option<usize> {
        match label.family {
            Family::E => self
                .forward_family
                .get(label.index.checked_sub(1)?)
                .copied(),
            Family::F => self
                .inverse_family
                .get(label.index.checked_sub(1)?)
                .copied(),
        }
    }

    /// Tower with the last blow-up of `family` (and anything built on it) removed.
    pub fn truncated(&self, family: Family) -> Result<Tower> {
        let last = match family {
            Family::E => self.forward_family.last(),
            Family::F => self.inverse_family.last(),
        }
        .copied()
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
        Ok(self.tower.without(&[last])?.0)
    }

    /// Both lifted maps are morphisms on the tower.
    pub fn is_resolved(&self) -> Result<bool> {
        Ok(LiftCache::for_lift(&self.forward_lift)
            .unresolved_base_points(&self.tower)?
            .is_empty()
            && LiftCache::for_lift(&self.inverse_lift)
                .unresolved_base_points(&self.tower)?
                .is_empty())
    }

    /// Each center after the first lies on the curve of the previous one in its family.
    pub fn satisfies_chain_condition(&self) -> bool {
        [&self.forward_family, &self.inverse_family]
            .iter()
            .all(|family| {
                family.windows(2).all(|w| {
                    let chart = self.records[w[1]].center.chart;
                    self.tower.chart(chart).created_by == Some(self.records[w[0]].blowup)
                })
            })
    }
}

fn random_line<R: rand::Rng>(rng: &mut R) -> Polynomial {
    let xyz = Vars::xyz();
    let mut line = Polynomial::zero(&xyz);
    for i in 0..3 {
        line = line
            .add(&Polynomial::var(&xyz, i).scale(&scalar::random_nonzero(rng, 97)))
            .expect("same ring");
    }
    line
}

struct Engine {
    tower: Tower,
    fwd: LiftCache,
    inv: LiftCache,
    lines: [LiftCache; 2],
    records: Vec<ExceptionalRecord>,
}

impl Engine {
    fn blow_up(&mut self, p: &TowerPoint, label: Label) -> Result<usize> {
        let k = self.tower.blow_up_at(p)?;
        let mult_psi = self.fwd.multiplicity(&self.tower, k)?;
        let mult_psi_prime = self.inv.multiplicity(&self.tower, k)?;
        let m1 = self.lines[0].multiplicity(&self.tower, k)?;
        let m2 = self.lines[1].multiplicity(&self.tower, k)?;
        if m1 != m2 {
            return Err(Error::GenericityFailure(format!(
                "random lines have multiplicities {m1} and {m2} at {p}"
            )));
        }
        let parent_label = self
            .tower
            .chart(p.chart)
            .created_by
            .map(|b| self.records[b].label);
        let on_h = self.tower.blowups()[k]
            .curves_through_center
            .contains(&Curve::H);
        self.records.push(ExceptionalRecord {
            label,
            blowup: k,
            center: p.clone(),
            parent_label,
            mult_psi,
            mult_psi_prime,
            mult_pi: m1,
            on_h,
        });
        Ok(k)
    }
}

/// Blows up the indeterminacy points of `φ∘π` and `φ⁻¹∘π` until both are
/// morphisms. While the two maps share their indeterminacy point the blow-up
/// is counted once, in the common prefix of length `i0`.
pub fn canonical_resolution(
    phi: &AffineAutomorphism,
    config: &ResolutionConfig,
) -> Result<ResolutionTower> {
    if phi.degree() < 2 {
        return Err(Error::DegreeTooLow {
            degree: phi.degree(),
        });
    }
    let forward_lift = projective_lift(phi.forward())?;
    let inverse_lift = projective_lift(phi.inverse())?;
    let proper = |lift: &ProjectiveMapLift| -> Result<InfinityPoint> {
        indeterminacy_on_h(lift)?
            .pop()
            .ok_or(Error::UniquenessViolated { count: 0 })
    };
    let proper_points = (proper(&forward_lift)?, proper(&inverse_lift)?);

    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut engine = Engine {
        tower: Tower::new(),
        fwd: LiftCache::for_lift(&forward_lift),
        inv: LiftCache::for_lift(&inverse_lift),
        lines: [
            LiftCache::new(vec![random_line(&mut rng)]),
            LiftCache::new(vec![random_line(&mut rng)]),
        ],
        records: Vec::new(),
    };
    let mut p = engine.fwd.indeterminacy_on_tower(&engine.tower, None)?;
    let mut q = engine.inv.indeterminacy_on_tower(&engine.tower, None)?;
    let (mut forward_family, mut inverse_family) = (Vec::new(), Vec::new());
    let mut i0 = 0;
    let mut shared = true;

    while p.is_some() || q.is_some() {
        if engine.records.len() >= config.step_budget {
            return Err(Error::StepBudgetExceeded {
                cap: config.step_budget,
            });
        }
        if shared && p.is_some() && p == q {
            let center = p.take().unwrap();
            i0 += 1;
            let label = Label {
                family: Family::E,
                index: i0,
            };
            let k = engine.blow_up(&center, label)?;
            forward_family.push(k);
            inverse_family.push(k);
            p = engine.fwd.indeterminacy_on_tower(&engine.tower, Some(k))?;
            q = engine.inv.indeterminacy_on_tower(&engine.tower, Some(k))?;
            continue;
        }
        shared = false;
        if let Some(center) = p.take() {
            let label = Label {
                family: Family::E,
                index: forward_family.len() + 1,
            };
            let k = engine.blow_up(&center, label)?;
            forward_family.push(k);
            p = engine.fwd.indeterminacy_on_tower(&engine.tower, Some(k))?;
        }
        if let Some(center) = q.take() {
            let label = Label {
                family: Family::F,
                index: inverse_family.len() + 1,
            };
            let k = engine.blow_up(&center, label)?;
            inverse_family.push(k);
            q = engine.inv.indeterminacy_on_tower(&engine.tower, Some(k))?;
        }
    }

    for cache in [&mut engine.fwd, &mut engine.inv] {
        let left = cache.unresolved_base_points(&engine.tower)?;
        if !left.is_empty() {
            return Err(Error::ExactnessViolation(format!(
                "lifted map still has {} base point(s) after the resolution loop",
                left.len()
            )));
        }
    }

    let mut tower = ResolutionTower {
        tower: engine.tower,
        records: engine.records,
        n: forward_family.len(),
        m: inverse_family.len(),
        forward_family,
        inverse_family,
        i0,
        regular: i0 == 0,
        swapped: false,
        map: phi.clone(),
        forward_lift,
        inverse_lift,
        proper_points,
    };
    if tower.n > tower.m {
        swap_families(&mut tower);
    }
    Ok(tower)
}

fn swap_families(t: &mut ResolutionTower) {
    std::mem::swap(&mut t.forward_family, &mut t.inverse_family);
    std::mem::swap(&mut t.n, &mut t.m);
    std::mem::swap(&mut t.forward_lift, &mut t.inverse_lift);
    t.proper_points = (t.proper_points.1.clone(), t.proper_points.0.clone());
    t.map = t.map.inverted();
    t.swapped = true;
    for r in &mut t.records {
        std::mem::swap(&mut r.mult_psi, &mut r.mult_psi_prime);
    }
    for (i, &k) in t.forward_family.iter().enumerate() {
        t.records[k].label = Label {
            family: Family::E,
            index: i + 1,
        };
    }
    for (j, &k) in t.inverse_family.iter().enumerate().skip(t.i0) {
        t.records[k].label = Label {
            family: Family::F,
            index: j + 1,
        };
    }
    let labels: Vec<Label> = t.records.iter().map(|r| r.label).collect();
    for r in &mut t.records {
        if let Some(b) = t.tower.chart(r.center.chart).created_by {
            r.parent_label = Some(labels[b]);
        }
    }
}

impl Serialize for ResolutionTower {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct ChartView {
            id: ChartId,
            parent: Option<ChartId>,
            root: Option<RootChart>,
            transition: Option<[String; 2]>,
            exceptional_coordinate: Option<usize>,
            created_by: Option<usize>,
        }
        let charts: Vec<ChartView> = self
            .tower
            .charts()
            .iter()
            .map(|c| ChartView {
                id: c.id,
                parent: c.parent,
                root: c.root,
                transition: c
                    .transition
                    .as_ref()
                    .map(|[a, b]| [a.to_string(), b.to_string()]),
                exceptional_coordinate: c.exceptional_coordinate,
                created_by: c.created_by,
            })
            .collect();
        let labels = |f: &[usize]| -> Vec<String> {
            f.iter()
                .map(|&k| self.records[k].label.to_string())
                .collect()
        };
        let mut st = s.serialize_struct("ResolutionTower", 11)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("i0", &self.i0)?;
        st.serialize_field("regular", &self.regular)?;
        st.serialize_field("swapped", &self.swapped)?;
        st.serialize_field("z_phi", &self.proper_points.0.to_string())?;
        st.serialize_field("z_phi_inverse", &self.proper_points.1.to_string())?;
        st.serialize_field("forward_family", &labels(&self.forward_family))?;
        st.serialize_field("inverse_family", &labels(&self.inverse_family))?;
        st.serialize_field("records", &self.records)?;
        st.serialize_field("charts", &charts)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automap::{elementary_builder, quadratic_henon, transposed_henon_builder};
    use crate::parse_poly;
    use crate::scalar::int;

    fn chart_poly(t: &str) -> Polynomial {
        parse_poly(t, &Vars::new(&["s", "t"])).unwrap()
    }

    #[test]
    fn blow_up_root_point_on_h() {
        let mut tower = Tower::new();
        let p = tower.infinity_point(&InfinityPoint::new(int(1), int(0)).unwrap());
        let k = tower.blow_up_at(&p).unwrap();
        assert_eq!(tower.blowups()[k].curves_through_center, vec![Curve::H]);
        let [a, b] = tower.blowups()[k].charts;
        // z = s·t, so H's strict transform is {t = 0} in chart A and invisible in chart B.
        assert_eq!(
            tower.chart(a).curve_equation(Curve::H),
            Some(&chart_poly("t"))
        );
        assert_eq!(tower.chart(b).curve_equation(Curve::H), None);
        // It meets the exceptional curve {s = 0} at the single point (0, 0).
        let h = tower.chart(a).curve_equation(Curve::H).unwrap();
        let e = tower
            .chart(a)
            .curve_equation(Curve::Exceptional(k))
            .unwrap();
        assert_eq!(h, &chart_poly("t"));
        assert_eq!(e, &chart_poly("s"));
        assert!(matches!(
            tower.blow_up_at(&p),
            Err(Error::DuplicateCenter(_))
        ));
    }

    #[test]
    fn blow_up_off_h_leaves_h_alone() {
        let mut tower = Tower::new();
        let p = tower.affine_point(int(2), int(3));
        let k = tower.blow_up_at(&p).unwrap();
        assert!(tower.blowups()[k].curves_through_center.is_empty());
        let mut cache = LiftCache::new(vec![parse_poly("Z", &Vars::xyz()).unwrap()]);
        assert_eq!(cache.multiplicity(&tower, k).unwrap(), 0);
    }

    #[test]
    fn identity_lift_has_no_multiplicity() {
        let mut tower = Tower::new();
        let p = tower.infinity_point(&InfinityPoint::new(int(1), int(0)).unwrap());
        let k = tower.blow_up_at(&p).unwrap();
        let id = projective_lift(&crate::PolyMap::identity()).unwrap();
        for chart in tower.blowups()[k].charts {
            assert_eq!(lift_and_clean(&tower, &id, chart).unwrap().extracted, 0);
        }
        let mut cache = LiftCache::for_lift(&id);
        assert_eq!(cache.indeterminacy_on_tower(&tower, None).unwrap(), None);
        assert_eq!(cache.indeterminacy_on_tower(&tower, Some(k)).unwrap(), None);
    }

    #[test]
    fn henon_first_chart_by_hand() {
        // Lift [YZ : Y²+Z²+XZ : Z²] in chart X=1 is [yz : y²+z²+z : z²]; with
        // y = s, z = s·t every component is divisible by s exactly once,
        // leaving [st : s + st² + t : st²].
        let h = quadratic_henon(&int(1), &int(1)).unwrap();
        let lift = projective_lift(h.forward()).unwrap();
        let mut tower = Tower::new();
        let p = tower.infinity_point(&InfinityPoint::new(int(1), int(0)).unwrap());
        let k = tower.blow_up_at(&p).unwrap();
        let cleaned = lift_and_clean(&tower, &lift, tower.blowups()[k].charts[0]).unwrap();
        assert_eq!(cleaned.extracted, 1);
        assert_eq!(
            cleaned.components,
            vec![
                chart_poly("s*t"),
                chart_poly("s + s*t^2 + t"),
                chart_poly("s*t^2")
            ]
        );
        let mut cache = LiftCache::for_lift(&lift);
        let next = cache.indeterminacy_on_tower(&tower, Some(k)).unwrap();
        assert_eq!(
            next,
            Some(TowerPoint {
                chart: tower.blowups()[k].charts[0],
                coords: [int(0), int(0)]
            })
        );
    }

    #[test]
    fn henon_resolution_is_regular() {
        let h = quadratic_henon(&int(1), &int(1)).unwrap();
        let r = canonical_resolution(&h, &ResolutionConfig::default()).unwrap();
        assert!(r.regular);
        assert_eq!(r.i0, 0);
        assert_eq!(
            r.proper_points.0,
            InfinityPoint::new(int(1), int(0)).unwrap()
        );
        assert_eq!(
            r.proper_points.1,
            InfinityPoint::new(int(0), int(1)).unwrap()
        );
        assert!(r.n >= 2 && r.n <= r.m);
        assert!(r.is_resolved().unwrap());
        assert!(r.satisfies_chain_condition());
    }

    #[test]
    fn elementary_resolution_shares_a_prefix() {
        let e = elementary_builder(2, &int(1)).unwrap();
        let r = canonical_resolution(&e, &ResolutionConfig::default()).unwrap();
        assert!(!r.regular);
        assert!(r.i0 >= 1);
        assert_eq!(r.forward_family[..r.i0], r.inverse_family[..r.i0]);
        assert!(r.is_resolved().unwrap());
    }

    #[test]
    fn minimality() {
        for phi in [
            quadratic_henon(&int(1), &int(1)).unwrap(),
            transposed_henon_builder(3, &int(1)).unwrap(),
            elementary_builder(2, &int(1)).unwrap(),
        ] {
            let r = canonical_resolution(&phi, &ResolutionConfig::default()).unwrap();
            let fwd_cut = r.truncated(Family::E).unwrap();
            assert!(!LiftCache::for_lift(&r.forward_lift)
                .unresolved_base_points(&fwd_cut)
                .unwrap()
                .is_empty());
            let inv_cut = r.truncated(Family::F).unwrap();
            assert!(!LiftCache::for_lift(&r.inverse_lift)
                .unresolved_base_points(&inv_cut)
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn precondition_and_budget() {
        assert!(matches!(
            canonical_resolution(
                &AffineAutomorphism::identity(),
                &ResolutionConfig::default()
            ),
            Err(Error::DegreeTooLow { degree: 1 })
        ));
        let h = quadratic_henon(&int(1), &int(1)).unwrap();
        let cfg = ResolutionConfig {
            step_budget: 2,
            seed: 0,
        };
        assert!(matches!(
            canonical_resolution(&h, &cfg),
            Err(Error::StepBudgetExceeded { cap: 2 })
        ));
    }

    #[test]
    fn after_one_blow_up_henon_is_still_indeterminate() {
        let h = quadratic_henon(&int(1), &int(1)).unwrap();
        let lift = projective_lift(h.forward()).unwrap();
        let mut tower = Tower::new();
        let mut cache = LiftCache::for_lift(&lift);
        let p = cache.indeterminacy_on_tower(&tower, None).unwrap().unwrap();
        let k = tower.blow_up_at(&p).unwrap();
        assert!(cache
            .indeterminacy_on_tower(&tower, Some(k))
            .unwrap()
            .is_some());
    }
}
