//! Stasis domains: the force box `C(t)`, its shape-space image `C_sh(t)` and
//! the translation directions attainable from each boundary face.
//!
//! `C_sh = {ζ : Dᵀζ ∈ C}` where `(Dᵀζ)_i = ζ_{i-1} - ζ_i`. Vertices are stored
//! in both shape coordinates `ζ` and force coordinates `Dᵀζ`; the two differ
//! by a linear map that is not an isometry.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dissipation::DissipationSpec;
use crate::error::{Error, Result};
use crate::model::{d_transpose, QuadraticEnergy};

/// Absolute force tolerance for feasibility and face activity.
pub const FACE_TOL: f64 = 1e-10;

/// Which bound of a point's friction interval a halfspace encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `(Dᵀζ)_i ≤ w_i μ₊ⁱ`.
    Plus,
    /// `(Dᵀζ)_i ≥ -w_i μ₋ⁱ`.
    Minus,
}

/// `normal · ζ ≤ offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub point: usize,
    pub bound: Bound,
}

/// Possible signs of the net translation velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSet {
    Zero,
    NonNegative,
    NonPositive,
    All,
}

impl SignSet {
    fn from_bounds(bounds: impl IntoIterator<Item = Bound>) -> Self {
        let (mut plus, mut minus) = (false, false);
        for b in bounds {
            match b {
                Bound::Plus => plus = true,
                Bound::Minus => minus = true,
            }
        }
        match (plus, minus) {
            (false, false) => SignSet::Zero,
            (true, false) => SignSet::NonNegative,
            (false, true) => SignSet::NonPositive,
            (true, true) => SignSet::All,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            SignSet::Zero => "0",
            SignSet::NonNegative => ">=0",
            SignSet::NonPositive => "<=0",
            SignSet::All => "R",
        }
    }
}

/// Boundary face of `C_sh` with its direction label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Face {
    /// Indices into [`StasisGeometry::vertices`].
    pub vertices: Vec<usize>,
    /// Indices into [`StasisGeometry::halfspaces`] active on the whole face.
    pub halfspaces: Vec<usize>,
    pub label: SignSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StasisGeometry {
    pub t: f64,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub halfspaces: Vec<Halfspace>,
    /// Vertices in shape coordinates; empty when `N - 1 > 3`.
    pub vertices: Vec<Vec<f64>>,
    /// The same vertices as force vectors `Dᵀζ`.
    pub vertices_full: Vec<Vec<f64>>,
    pub vertex_labels: Vec<SignSet>,
    /// Facets; for `N = 3` ordered along the polygon boundary.
    pub facets: Vec<Face>,
}

impl StasisGeometry {
    pub fn dim(&self) -> usize {
        self.box_lo.len() - 1
    }

    pub fn has_vertices(&self) -> bool {
        !self.vertices.is_empty()
    }

    /// Largest violation of the halfspaces by `zeta` (negative inside).
    pub fn excess(&self, zeta: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| dot(&h.normal, zeta) - h.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Support function `max_{ζ ∈ C_sh} <ζ, w>` over the stored vertices.
    pub fn support(&self, w: &[f64]) -> Option<f64> {
        if self.vertices.is_empty() {
            return None;
        }
        Some(self.vertices.iter().map(|v| dot(v, w)).fold(f64::NEG_INFINITY, f64::max))
    }

    fn active(&self, zeta: &[f64]) -> Vec<usize> {
        self.halfspaces
            .iter()
            .enumerate()
            .filter(|(_, h)| h.offset - dot(&h.normal, zeta) <= FACE_TOL)
            .map(|(k, _)| k)
            .collect()
    }

    fn label_of(&self, active: &[usize]) -> SignSet {
        SignSet::from_bounds(active.iter().map(|&k| self.halfspaces[k].bound))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Halfspace and (for `N ≤ 4`) vertex description of `C_sh(t)`.
pub fn build_geometry(d: &DissipationSpec, t: f64) -> Result<StasisGeometry> {
    let n = d.n();
    if n < 2 {
        return Err(Error::Structural("stasis geometry needs at least 2 points".into()));
    }
    let (box_lo, box_hi) = d.coefficients(t)?.stasis_box();
    let dim = n - 1;
    let mut halfspaces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut row = vec![0.0; dim];
        if i > 0 {
            row[i - 1] = 1.0;
        }
        if i < dim {
            row[i] = -1.0;
        }
        halfspaces.push(Halfspace { normal: row.clone(), offset: box_hi[i], point: i, bound: Bound::Plus });
        halfspaces.push(Halfspace {
            normal: row.iter().map(|v| -v).collect(),
            offset: -box_lo[i],
            point: i,
            bound: Bound::Minus,
        });
    }
    let mut geo = StasisGeometry {
        t,
        box_lo,
        box_hi,
        halfspaces,
        vertices: Vec::new(),
        vertices_full: Vec::new(),
        vertex_labels: Vec::new(),
        facets: Vec::new(),
    };
    if dim <= 3 {
        enumerate_vertices(&mut geo);
    }
    Ok(geo)
}

fn enumerate_vertices(geo: &mut StasisGeometry) {
    let dim = geo.dim();
    let m = geo.halfspaces.len();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for combo in combinations(m, dim) {
        let a = DMatrix::from_fn(dim, dim, |r, c| geo.halfspaces[combo[r]].normal[c]);
        let b = DVector::from_fn(dim, |r, _| geo.halfspaces[combo[r]].offset);
        if a.determinant().abs() <= 1e-12 {
            continue;
        }
        let Some(v) = a.lu().solve(&b) else { continue };
        let v: Vec<f64> = v.iter().copied().collect();
        let feasible = geo.excess(&v) <= FACE_TOL;
        let fresh = vertices
            .iter()
            .all(|u| u.iter().zip(&v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) > 1e-9);
        if feasible && fresh {
            vertices.push(v);
        }
    }

    match dim {
        1 => vertices.sort_by(|a, b| a[0].total_cmp(&b[0])),
        2 => {
            let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / vertices.len() as f64;
            let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / vertices.len() as f64;
            vertices.sort_by(|a, b| {
                let ta = (a[1] - cy).atan2(a[0] - cx);
                let tb = (b[1] - cy).atan2(b[0] - cx);
                ta.total_cmp(&tb)
            });
        }
        _ => {}
    }

    let actives: Vec<Vec<usize>> = vertices.iter().map(|v| geo.active(v)).collect();
    geo.vertex_labels = actives.iter().map(|a| geo.label_of(a)).collect();
    geo.vertices_full = vertices.iter().map(|v| d_transpose(v)).collect();

    let mut facets = Vec::new();
    match dim {
        1 => {
            for (k, a) in actives.iter().enumerate() {
                facets.push(Face { vertices: vec![k], halfspaces: a.clone(), label: geo.label_of(a) });
            }
        }
        2 => {
            let nv = vertices.len();
            for k in 0..nv {
                let next = (k + 1) % nv;
                let shared: Vec<usize> =
                    actives[k].iter().copied().filter(|h| actives[next].contains(h)).collect();
                facets.push(Face { vertices: vec![k, next], label: geo.label_of(&shared), halfspaces: shared });
            }
        }
        _ => {
            for h in 0..geo.halfspaces.len() {
                let on: Vec<usize> = (0..vertices.len()).filter(|&k| actives[k].contains(&h)).collect();
                if on.len() < dim {
                    continue;
                }
                let shared: Vec<usize> = (0..geo.halfspaces.len())
                    .filter(|g| on.iter().all(|&k| actives[k].contains(g)))
                    .collect();
                if facets.iter().any(|f: &Face| f.vertices == on) {
                    continue;
                }
                facets.push(Face { vertices: on, label: geo.label_of(&shared), halfspaces: shared });
            }
        }
    }
    geo.vertices = vertices;
    geo.facets = facets;
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for last in k - 1..m {
        for mut c in combinations(last, k - 1) {
            c.push(last);
            out.push(c);
        }
    }
    out
}

/// Attainable translation directions for a force `xi ∈ C(t)`.
pub fn normal_cone_direction(d: &DissipationSpec, t: f64, xi: &[f64]) -> Result<SignSet> {
    let (lo, hi) = d.coefficients(t)?.stasis_box();
    let excess = xi
        .iter()
        .zip(lo.iter().zip(&hi))
        .map(|(&x, (&l, &h))| (x - h).max(l - x))
        .fold(f64::NEG_INFINITY, f64::max);
    if excess > FACE_TOL {
        return Err(Error::OutsideDomain { excess });
    }
    let mut bounds = Vec::new();
    for i in 0..xi.len() {
        if hi[i] - xi[i] <= FACE_TOL {
            bounds.push(Bound::Plus);
        }
        if xi[i] - lo[i] <= FACE_TOL {
            bounds.push(Bound::Minus);
        }
    }
    Ok(SignSet::from_bounds(bounds))
}

/// Stress admissibility of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Smallest slack of `ℓ(t) - 2 A x` inside `C(t)`; negative outside.
    pub margin: f64,
}

pub fn is_admissible(
    energy: &QuadraticEnergy,
    d: &DissipationSpec,
    t: f64,
    x: &[f64],
) -> Result<Admissibility> {
    let tension = energy.tension(t, x)?;
    let (lo, hi) = d.coefficients(t)?.stasis_box();
    let margin = tension
        .full
        .iter()
        .zip(lo.iter().zip(&hi))
        .map(|(&s, (&l, &h))| (h - s).min(s - l))
        .fold(f64::INFINITY, f64::min);
    Ok(Admissibility { admissible: margin >= -FACE_TOL, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::Friction;
    use crate::model::{chi, CrawlerModel, Spring};
    use crate::timeprog::TimeProgram;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_interval() {
        let d = DissipationSpec::homogeneous(2, 1.5, 0.5);
        let g = build_geometry(&d, 0.0).unwrap();
        assert_eq!(g.halfspaces.len(), 4);
        assert_eq!(g.vertices, vec![vec![-0.5], vec![0.5]]);
    }

    #[test]
    fn triangle_regime() {
        let g = build_geometry(&DissipationSpec::homogeneous(3, 3.0, 1.0), 0.0).unwrap();
        assert_eq!(g.vertices.len(), 3);
        assert!(g.facets.iter().all(|f| f.label == SignSet::NonNegative));
        for v in &g.vertices_full {
            assert!(v.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn hexagon_regime() {
        let g = build_geometry(&DissipationSpec::homogeneous(3, 1.3, 1.0), 0.0).unwrap();
        assert_eq!(g.vertices.len(), 6);
        assert_eq!(g.facets.len(), 6);
        for k in 0..6 {
            let (a, b) = (g.facets[k].label, g.facets[(k + 1) % 6].label);
            assert!(matches!(
                (a, b),
                (SignSet::NonNegative, SignSet::NonPositive) | (SignSet::NonPositive, SignSet::NonNegative)
            ));
        }
        assert!(g.vertex_labels.iter().all(|l| *l == SignSet::All));
    }

    #[test]
    fn four_points_polytope() {
        let d = DissipationSpec::constant(&[1.0, 0.8, 1.2, 0.6], &[0.9, 1.1, 0.7, 1.3]).unwrap();
        let g = build_geometry(&d, 0.0).unwrap();
        assert!(g.has_vertices());
        for w in [[0.3, -0.2, 0.9], [-1.0, 0.5, 0.1], [0.0, 0.0, 1.0]] {
            let r = d.shape_reduced(0.0, &w).unwrap().value;
            assert_relative_eq!(g.support(&w).unwrap(), r, epsilon = 1e-9);
        }
    }

    #[test]
    fn cone_labels() {
        let d = DissipationSpec::homogeneous(3, 1.0, 1.0);
        assert_eq!(normal_cone_direction(&d, 0.0, &[0.1, -0.2, 0.1]).unwrap(), SignSet::Zero);
        assert_eq!(normal_cone_direction(&d, 0.0, &[1.0, -0.5, -0.5]).unwrap(), SignSet::NonNegative);
        assert_eq!(normal_cone_direction(&d, 0.0, &[1.0, 0.0, -1.0]).unwrap(), SignSet::All);
        assert!(matches!(
            normal_cone_direction(&d, 0.0, &[1.5, -0.75, -0.75]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    fn two_point(mu: f64) -> CrawlerModel {
        CrawlerModel::new(
            vec![0.0, 1.0],
            vec![Spring::new(0, 1, 1.0, TimeProgram::constant(0.0))],
            vec![Friction::constant(mu, mu), Friction::constant(mu, mu)],
        )
        .unwrap()
    }

    #[test]
    fn admissibility() {
        let mu = 0.8;
        let m = two_point(mu);
        let e = m.assemble().unwrap();
        let relaxed = is_admissible(&e, m.dissipation(), 0.0, &[0.0, 0.0]).unwrap();
        assert!(relaxed.admissible);
        assert_relative_eq!(relaxed.margin, mu);
        let over = is_admissible(&e, m.dissipation(), 0.0, &chi(&[mu + 0.1], 0.0)).unwrap();
        assert!(!over.admissible);
        let edge = is_admissible(&e, m.dissipation(), 0.0, &chi(&[mu], 0.0)).unwrap();
        assert!(edge.admissible);
        assert!(edge.margin.abs() < 1e-15);
    }
}
