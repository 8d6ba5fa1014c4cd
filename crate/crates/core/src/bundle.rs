//! Poisson vector bundles over finite or sampled base spaces, sections
//! with values in the fiber function algebras, fiberwise star products,
//! sup seminorms, the C0(X)-module action, and a sampling-based
//! falsification check for upper semicontinuity.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{MoyalError, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::planewave::PlaneWaveSum;
use crate::poisson::PoissonVectorSpace;
use crate::star::StarContext;
use crate::weyl::GridRep;

/// One sampled base point.
#[derive(Debug, Clone)]
pub struct BasePoint {
    pub id: String,
    pub coords: Vec<f64>,
    /// Marks membership in the compact window used for sup seminorms.
    pub compact: bool,
}

/// An ordered collection of base samples, optionally carrying a neighbor
/// graph when the space is a sampling of a continuum.
#[derive(Debug, Clone)]
pub struct BaseSpace {
    pub points: Vec<BasePoint>,
    /// True when the space is genuinely finite (exact functor mode) rather
    /// than a sampling of a continuum.
    pub finite: bool,
    /// Adjacency lists by point index; empty when no graph is attached.
    pub neighbors: Vec<Vec<usize>>,
}

impl BaseSpace {
    pub fn finite_from_ids(ids: &[&str]) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if seen.insert(id.to_string(), i).is_some() {
                return Err(MoyalError::Parse(format!("duplicate base point id {id}")));
            }
        }
        Ok(Self {
            points: ids
                .iter()
                .map(|id| BasePoint {
                    id: id.to_string(),
                    coords: Vec::new(),
                    compact: true,
                })
                .collect(),
            finite: true,
            neighbors: vec![Vec::new(); ids.len()],
        })
    }

    pub fn sampled(points: Vec<BasePoint>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if seen.insert(p.id.clone(), i).is_some() {
                return Err(MoyalError::Parse(format!("duplicate base point id {}", p.id)));
            }
        }
        if neighbors.len() != points.len() {
            return Err(MoyalError::Parse("neighbor table size mismatch".into()));
        }
        Ok(Self {
            points,
            finite: false,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| MoyalError::UnknownPoint(id.to_string()))
    }
}

/// A Poisson vector bundle: one Poisson structure per sampled base point.
/// Fibers are shared `Arc`s so that pull-backs preserve reference identity.
#[derive(Debug, Clone)]
pub struct PoissonBundle {
    pub base: BaseSpace,
    pub fiber_dim: usize,
    pub sigma_at: Vec<Arc<PoissonVectorSpace>>,
}

impl PoissonBundle {
    pub fn new(base: BaseSpace, fiber_dim: usize, sigmas: Vec<PoissonVectorSpace>) -> Result<Self> {
        if sigmas.len() != base.len() {
            return Err(MoyalError::Parse(
                "one Poisson structure required per base point".into(),
            ));
        }
        for s in &sigmas {
            if s.dim() != fiber_dim {
                return Err(MoyalError::DimensionMismatch {
                    expected: fiber_dim,
                    got: s.dim(),
                });
            }
        }
        Ok(Self {
            base,
            fiber_dim,
            sigma_at: sigmas.into_iter().map(Arc::new).collect(),
        })
    }

    /// Pull-back along a map of base spaces given by indices into this
    /// bundle's base: (f* B)_x = B_{f(x)} by reference.
    pub fn pullback(&self, new_base: BaseSpace, f: &[usize]) -> Result<Self> {
        if f.len() != new_base.len() {
            return Err(MoyalError::Parse("pullback map must be total".into()));
        }
        let mut fibers = Vec::with_capacity(f.len());
        for &target in f {
            if target >= self.base.len() {
                return Err(MoyalError::UnknownPoint(format!("index {target}")));
            }
            fibers.push(Arc::clone(&self.sigma_at[target]));
        }
        Ok(Self {
            base: new_base,
            fiber_dim: self.fiber_dim,
            sigma_at: fibers,
        })
    }
}

/// Fiber element of a section: the exact or the numeric representation.
#[derive(Debug, Clone)]
pub enum FiberValue {
    PlaneWave(PlaneWaveSum),
    Grid(GridFunction),
}

impl FiberValue {
    fn kind(&self) -> &'static str {
        match self {
            FiberValue::PlaneWave(_) => "plane-wave",
            FiberValue::Grid(_) => "grid",
        }
    }

    /// Coordinate multiplication: defined on grid fibers only; plane waves
    /// leave the bounded-function algebra under x-multiplication.
    pub fn x_multiply(&self, axis: usize) -> Result<FiberValue> {
        match self {
            FiberValue::Grid(f) => Ok(FiberValue::Grid(f.x_multiply(axis)?)),
            FiberValue::PlaneWave(_) => Err(MoyalError::UnsupportedRepresentation(
                "x_multiply on a plane-wave sum",
            )),
        }
    }

    pub fn partial_deriv(&self, axis: usize) -> Result<FiberValue> {
        match self {
            FiberValue::Grid(f) => Ok(FiberValue::Grid(f.partial_deriv(axis)?)),
            FiberValue::PlaneWave(pw) => Ok(FiberValue::PlaneWave(pw.partial_deriv(axis)?)),
        }
    }
}

/// A section: one fiber element per base point, uniform kind.
#[derive(Debug, Clone)]
pub struct SectionOverBase {
    pub values: Vec<FiberValue>,
}

impl SectionOverBase {
    pub fn new(values: Vec<FiberValue>) -> Result<Self> {
        if let Some(first) = values.first() {
            let kind = first.kind();
            for v in &values {
                if v.kind() != kind {
                    return Err(MoyalError::KindMismatch(format!(
                        "{} vs {}",
                        kind,
                        v.kind()
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluation map delta_x: returns the fiber element over a point id.
pub fn evaluation<'a>(
    bundle: &PoissonBundle,
    section: &'a SectionOverBase,
    id: &str,
) -> Result<&'a FiberValue> {
    let idx = bundle.base.index_of(id)?;
    Ok(&section.values[idx])
}

/// Pointwise star product of two sections with the fiberwise Poisson
/// structure sigma(x).
pub fn fiber_star(
    bundle: &PoissonBundle,
    phi: &SectionOverBase,
    psi: &SectionOverBase,
) -> Result<SectionOverBase> {
    if phi.len() != bundle.base.len() || psi.len() != bundle.base.len() {
        return Err(MoyalError::Parse("section length differs from base".into()));
    }
    let mut out = Vec::with_capacity(bundle.base.len());
    for (i, (a, b)) in phi.values.iter().zip(&psi.values).enumerate() {
        let pvs = bundle.sigma_at[i].as_ref().clone();
        match (a, b) {
            (FiberValue::PlaneWave(f), FiberValue::PlaneWave(g)) => {
                let ctx = StarContext::exact(pvs);
                out.push(FiberValue::PlaneWave(ctx.star_exact(f, g)?));
            }
            (FiberValue::Grid(f), FiberValue::Grid(g)) => {
                let ctx = StarContext::grid(pvs, f.spec)?;
                out.push(FiberValue::Grid(ctx.star_grid(f, g)?));
            }
            _ => {
                return Err(MoyalError::KindMismatch(format!(
                    "{} vs {}",
                    a.kind(),
                    b.kind()
                )))
            }
        }
    }
    SectionOverBase::new(out)
}

/// Fiberwise Schwartz seminorm. Grid fibers evaluate s_{p,q} on the grid;
/// plane-wave fibers are bounded functions, so s_{0,q} is bounded by the
/// triangle inequality while any p > 0 gives an unbounded supremum.
pub fn fiber_seminorm(value: &FiberValue, p: usize, q: usize) -> f64 {
    match value {
        FiberValue::Grid(f) => f.seminorm(p, q),
        FiberValue::PlaneWave(pw) => {
            if pw.is_zero() {
                return 0.0;
            }
            if p > 0 {
                return f64::INFINITY;
            }
            let n = pw.dim();
            let betas = crate::grid::multi_indices(n, q);
            let mut total = 0.0;
            for beta in &betas {
                let mut bound = 0.0;
                for t in pw.terms() {
                    let mut fac = t.coeff.norm();
                    for (a, &e) in beta.iter().enumerate() {
                        fac *= t.freq[a].abs().powi(e as i32);
                    }
                    bound += fac;
                }
                total += bound;
            }
            total
        }
    }
}

/// Sup seminorm over a compact subset K of base points (by id).
pub fn section_sup_seminorm(
    bundle: &PoissonBundle,
    section: &SectionOverBase,
    p: usize,
    q: usize,
    subset: &[&str],
) -> Result<f64> {
    if subset.is_empty() {
        return Err(MoyalError::EmptySubset);
    }
    let mut sup = 0.0f64;
    for id in subset {
        let idx = bundle.base.index_of(id)?;
        sup = sup.max(fiber_seminorm(&section.values[idx], p, q));
    }
    Ok(sup)
}

/// Module action of a scalar function on the base: pointwise scaling.
pub fn module_action(
    bundle: &PoissonBundle,
    scalar: &[Complex64],
    section: &SectionOverBase,
) -> Result<SectionOverBase> {
    if scalar.len() != bundle.base.len() {
        return Err(MoyalError::Parse("scalar values must cover the base".into()));
    }
    let values = section
        .values
        .iter()
        .zip(scalar)
        .map(|(v, c)| match v {
            FiberValue::PlaneWave(pw) => FiberValue::PlaneWave(pw.scale(*c)),
            FiberValue::Grid(g) => FiberValue::Grid(g.scale(*c)),
        })
        .collect();
    SectionOverBase::new(values)
}

/// Desk-scale realization of the bundle-completion norm: the sup over base
/// points of the operator norm of left translation by the fiber value.
/// Plane-wave fibers are quantized exactly on `carrier`.
pub fn cstar_fiber_sup_norm(
    bundle: &PoissonBundle,
    section: &SectionOverBase,
    carrier: Option<GridSpec>,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for (i, v) in section.values.iter().enumerate() {
        let pvs = bundle.sigma_at[i].as_ref().clone();
        let norm = match v {
            FiberValue::Grid(f) => {
                let ctx = StarContext::grid(pvs.clone(), f.spec)?;
                let rep = GridRep::new(pvs, f.spec)?;
                let lf = rep.left_translation(&ctx, f)?;
                lf.operator_norm()?.value
            }
            FiberValue::PlaneWave(pw) => {
                let spec = carrier.ok_or(MoyalError::SpecMismatch(
                    "plane-wave fibers need a carrier grid for operator norms".into(),
                ))?;
                if pw.is_zero() {
                    0.0
                } else {
                    let rep = GridRep::new(pvs, spec)?;
                    let w = rep.weyl_quantize_planewave(pw)?;
                    w.operator_norm()?.value
                }
            }
        };
        sup = sup.max(norm);
    }
    Ok(sup)
}

/// One line of the upper-semicontinuity sampling report.
#[derive(Debug, Clone)]
pub struct UscViolation {
    pub point: String,
    pub value: f64,
    pub neighborhood_min: f64,
}

/// Falsification-only sampling test: flags points whose fiber seminorm
/// exceeds the minimum over their neighbors by more than `jump_threshold`.
/// A clean report never proves semicontinuity of the underlying continuum
/// object; it only fails to refute it.
pub fn usc_sample_check(
    bundle: &PoissonBundle,
    section: &SectionOverBase,
    p: usize,
    q: usize,
    jump_threshold: f64,
) -> Result<Vec<UscViolation>> {
    if section.len() != bundle.base.len() {
        return Err(MoyalError::Parse("section length differs from base".into()));
    }
    let mut violations = Vec::new();
    for (i, point) in bundle.base.points.iter().enumerate() {
        let nbrs = &bundle.base.neighbors[i];
        if nbrs.is_empty() {
            continue;
        }
        let value = fiber_seminorm(&section.values[i], p, q);
        let neighborhood_min = nbrs
            .iter()
            .map(|&j| fiber_seminorm(&section.values[j], p, q))
            .fold(f64::INFINITY, f64::min);
        if value > neighborhood_min + jump_threshold {
            violations.push(UscViolation {
                point: point.id.clone(),
                value,
                neighborhood_min,
            });
        }
    }
    Ok(violations)
}
