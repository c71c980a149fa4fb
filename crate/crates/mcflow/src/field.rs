//! Uniform-grid scalar fields.
//!
//! Grids are row-major with the last axis fastest. In axisymmetric mode the
//! grid is two-dimensional with axes (x, rho), rho >= 0, and the field stands
//! for a surface of revolution in three-space; stencils then see mirrored
//! ghost values across the rho = 0 axis.

use crate::error::{Error, Result};
use crate::scenarios::Shape;

/// Grid multi-index; only the leading `dim` entries are meaningful.
pub type Idx = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldLabel {
    LevelSet,
    Arrival,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub counts: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: f64,
    pub axisymmetric: bool,
}

impl GridSpec {
    pub fn new(
        dim: usize,
        counts: &[usize],
        origin: &[f64],
        spacing: f64,
        axisymmetric: bool,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in {{2,3}}")));
        }
        if counts.len() != dim || origin.len() != dim {
            return Err(Error::InvalidParameter(
                "counts/origin length must equal dimension".into(),
            ));
        }
        if counts.iter().any(|&c| c < 8) {
            return Err(Error::InvalidParameter("all axis counts must be >= 8".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter("spacing must be positive".into()));
        }
        if axisymmetric {
            if dim != 2 {
                return Err(Error::InvalidParameter(
                    "axisymmetric grids are two-dimensional (x, rho)".into(),
                ));
            }
            if origin[1] != 0.0 {
                return Err(Error::InvalidParameter(
                    "axisymmetric grids must start at rho = 0".into(),
                ));
            }
        }
        let mut c = [1usize; 3];
        let mut o = [0.0f64; 3];
        c[..dim].copy_from_slice(counts);
        o[..dim].copy_from_slice(origin);
        Ok(Self {
            dim,
            counts: c,
            origin: o,
            spacing,
            axisymmetric,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.counts[..self.dim].iter().product()
    }

    pub fn linear(&self, idx: Idx) -> usize {
        let mut lin = idx[0];
        for a in 1..self.dim {
            lin = lin * self.counts[a] + idx[a];
        }
        lin
    }

    pub fn unravel(&self, mut lin: usize) -> Idx {
        let mut idx = [0usize; 3];
        for a in (1..self.dim).rev() {
            idx[a] = lin % self.counts[a];
            lin /= self.counts[a];
        }
        idx[0] = lin;
        idx
    }

    pub fn position(&self, idx: Idx) -> [f64; 3] {
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + idx[a] as f64 * self.spacing;
        }
        p
    }

    /// Physical extent along an axis: (count - 1) * h.
    pub fn extent(&self, axis: usize) -> f64 {
        (self.counts[axis] - 1) as f64 * self.spacing
    }

    /// Iterate all multi-indexes in row-major order.
    pub fn indexes(&self) -> impl Iterator<Item = Idx> + '_ {
        (0..self.n_nodes()).map(|lin| self.unravel(lin))
    }

    /// Resolve an offset along one axis, mirroring across rho = 0 on
    /// axisymmetric grids. Returns None when the neighbor leaves the grid.
    pub fn offset(&self, idx: Idx, axis: usize, step: isize) -> Option<Idx> {
        let i = idx[axis] as isize + step;
        let i = if i < 0 {
            if self.axisymmetric && axis == 1 {
                -i // ghost mirror: v(x, -rho) = v(x, rho)
            } else {
                return None;
            }
        } else {
            i
        };
        if i as usize >= self.counts[axis] {
            return None;
        }
        let mut out = idx;
        out[axis] = i as usize;
        Some(out)
    }

    /// True when every node of the 3^d cube around `idx` resolves (with the
    /// axis mirror); this is the footprint of the second-order stencils.
    pub fn has_stencil(&self, idx: Idx) -> bool {
        for a in 0..self.dim {
            if self.offset(idx, a, -1).is_none() || self.offset(idx, a, 1).is_none() {
                return false;
            }
        }
        true
    }

    /// Whether a physical position lies in the grid's bounding box.
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..self.dim).all(|a| {
            let t = p[a] - self.origin[a];
            t >= -1e-12 && t <= self.extent(a) + 1e-12
        })
    }
}

/// Scalar samples over a grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub label: FieldLabel,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>, label: FieldLabel) -> Result<Self> {
        if values.len() != spec.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match the grid's {} nodes",
                values.len(),
                spec.n_nodes()
            )));
        }
        if let Some(lin) = values.iter().position(|v| !v.is_finite()) {
            if label == FieldLabel::LevelSet {
                return Err(Error::InvalidParameter(format!(
                    "non-finite value at node {:?}",
                    spec.unravel(lin)
                )));
            }
        }
        Ok(Self { spec, values, label })
    }

    pub fn from_fn(spec: GridSpec, label: FieldLabel, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = (0..spec.n_nodes())
            .map(|lin| f(&spec.position(spec.unravel(lin))))
            .collect();
        Self { spec, values, label }
    }

    pub fn at(&self, idx: Idx) -> f64 {
        self.values[self.spec.linear(idx)]
    }

    pub fn set(&mut self, idx: Idx, v: f64) {
        let lin = self.spec.linear(idx);
        self.values[lin] = v;
    }
}

/// Node-value access used by the finite-difference operators. ScalarField
/// exposes every node, ArrivalField only swept ones.
pub trait NodeField {
    fn grid(&self) -> &GridSpec;
    fn node(&self, idx: Idx) -> Option<f64>;

    fn neighbor(&self, idx: Idx, axis: usize, step: isize) -> Option<f64> {
        self.node(self.grid().offset(idx, axis, step)?)
    }
}

impl NodeField for ScalarField {
    fn grid(&self) -> &GridSpec {
        &self.spec
    }
    fn node(&self, idx: Idx) -> Option<f64> {
        Some(self.at(idx))
    }
}

/// Sample an implicit shape on a grid: values are positive inside the initial
/// hypersurface. Fails when the zero level set comes within 4h of the domain
/// boundary (the axis rho = 0 does not count as a boundary).
pub fn sample_implicit(shape: &Shape, spec: &GridSpec) -> Result<ScalarField> {
    if shape.axisymmetric() != spec.axisymmetric {
        return Err(Error::InvalidParameter(format!(
            "shape '{}' expects axisymmetric = {}",
            shape.name(),
            shape.axisymmetric()
        )));
    }
    const MARGIN: usize = 4;
    let mut values = vec![0.0; spec.n_nodes()];
    let mut any_positive = false;
    for lin in 0..values.len() {
        let idx = spec.unravel(lin);
        let p = spec.position(idx);
        let v = shape.implicit(&p);
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "implicit function not finite at {:?}",
                &p[..spec.dim]
            )));
        }
        if v > 0.0 {
            any_positive = true;
            let in_margin = (0..spec.dim).any(|a| {
                let near_low = idx[a] < MARGIN && !(spec.axisymmetric && a == 1);
                let near_high = idx[a] + MARGIN >= spec.counts[a];
                near_low || near_high
            });
            if in_margin {
                return Err(Error::DomainTooSmall(MARGIN));
            }
        }
        values[lin] = v;
    }
    if !any_positive {
        return Err(Error::DomainTooSmall(MARGIN));
    }
    ScalarField::new(spec.clone(), values, FieldLabel::LevelSet)
}
