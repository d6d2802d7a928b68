//! Crawler description and quadratic energy assembly.
//!
//! Positions are displacements `x` of the contact points from their reference
//! positions. Shape coordinates are consecutive differences `z = σ(x)` and the
//! net translation is the barycenter `y = π(x)`. The energy is
//! `E(t, x) = <A x, x> - <ℓ(t), x>` (no factor one half), so the force
//! balance reads `ℓ(t) - 2 A x ∈ ∂R(ẋ)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dissipation::{DissipationSpec, Friction};
use crate::error::{Error, Result};
use crate::timeprog::TimeProgram;

/// Elastic link between two contact points with a programmable rest offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spring {
    pub i: usize,
    pub j: usize,
    pub k: f64,
    /// Rest offset `L(t)`: the link is relaxed when `x_j - x_i = L(t)`.
    #[serde(rename = "L")]
    pub rest: TimeProgram,
}

impl Spring {
    pub fn new(i: usize, j: usize, k: f64, rest: TimeProgram) -> Self {
        Spring { i, j, k, rest }
    }
}

/// Contact points, springs and per-point friction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct CrawlerModel {
    points: Vec<f64>,
    springs: Vec<Spring>,
    friction: DissipationSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    points: Vec<f64>,
    springs: Vec<Spring>,
    friction: Vec<Friction>,
}

impl TryFrom<RawModel> for CrawlerModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        CrawlerModel::new(raw.points, raw.springs, raw.friction)
    }
}

impl From<CrawlerModel> for RawModel {
    fn from(m: CrawlerModel) -> Self {
        RawModel {
            points: m.points,
            springs: m.springs,
            friction: m.friction.points().to_vec(),
        }
    }
}

impl CrawlerModel {
    pub fn new(points: Vec<f64>, springs: Vec<Spring>, friction: Vec<Friction>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::Structural("a crawler needs at least 2 points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Structural(
                "reference positions must be finite and strictly increasing".into(),
            ));
        }
        if friction.len() != n {
            return Err(Error::Structural(format!(
                "{} friction entries for {n} points",
                friction.len()
            )));
        }
        for (e, s) in springs.iter().enumerate() {
            if s.i >= n || s.j >= n || s.i == s.j {
                return Err(Error::Structural(format!(
                    "spring {e} has invalid endpoints ({}, {})",
                    s.i, s.j
                )));
            }
            if !(s.k > 0.0) || !s.k.is_finite() {
                return Err(Error::Structural(format!(
                    "spring {e} has non-positive stiffness {}",
                    s.k
                )));
            }
        }
        if !is_connected(n, &springs) {
            return Err(Error::Structural("spring graph is not connected".into()));
        }
        let friction = DissipationSpec::new(friction)?;
        Ok(CrawlerModel { points, springs, friction })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn springs(&self) -> &[Spring] {
        &self.springs
    }

    pub fn dissipation(&self) -> &DissipationSpec {
        &self.friction
    }

    /// Every input program of the model, for breakpoint alignment.
    pub fn programs(&self) -> Vec<&TimeProgram> {
        let mut out: Vec<&TimeProgram> = self.springs.iter().map(|s| &s.rest).collect();
        out.extend(self.friction.programs());
        out
    }

    /// Same crawler with every input program reparametrized as `t -> p(factor * t)`.
    pub fn time_scaled(&self, factor: f64) -> Self {
        CrawlerModel {
            points: self.points.clone(),
            springs: self
                .springs
                .iter()
                .map(|s| Spring::new(s.i, s.j, s.k, s.rest.time_scaled(factor)))
                .collect(),
            friction: self.friction.time_scaled(factor),
        }
    }

    pub fn assemble(&self) -> Result<QuadraticEnergy> {
        QuadraticEnergy::assemble(self)
    }
}

fn is_connected(n: usize, springs: &[Spring]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut components = n;
    for s in springs {
        let (a, b) = (find(&mut parent, s.i), find(&mut parent, s.j));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

/// Consecutive differences `(x_2 - x_1, ..., x_N - x_{N-1})`.
pub fn sigma(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Barycenter of the displacement.
pub fn pi(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Zero-mean vector with consecutive differences `z`, shifted by `y`.
pub fn chi(z: &[f64], y: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(z.len() + 1);
    x.push(0.0);
    for (m, dz) in z.iter().enumerate() {
        x.push(x[m] + dz);
    }
    let shift = y - pi(&x);
    x.iter_mut().for_each(|v| *v += shift);
    x
}

/// `Dᵀζ`: the force vector induced by a shape-space tension.
pub fn d_transpose(zeta: &[f64]) -> Vec<f64> {
    let n = zeta.len() + 1;
    (0..n)
        .map(|i| {
            let left = if i > 0 { zeta[i - 1] } else { 0.0 };
            let right = if i + 1 < n { zeta[i] } else { 0.0 };
            left - right
        })
        .collect()
}

/// Inverse of [`d_transpose`] on zero-sum vectors.
pub fn shape_tension_of(full: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    full[..full.len() - 1]
        .iter()
        .map(|f| {
            acc -= f;
            acc
        })
        .collect()
}

/// Tension in full and shape coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Tension {
    /// `ℓ(t) - 2 A x`.
    pub full: Vec<f64>,
    /// `ℓ_sh(t) - 2 A_sh σ(x)`.
    pub sh: Vec<f64>,
}

/// Assembled quadratic energy of a crawler.
#[derive(Debug, Clone)]
pub struct QuadraticEnergy {
    springs: Vec<Spring>,
    a: DMatrix<f64>,
    a_sh: DMatrix<f64>,
    lambda_max: f64,
    bandwidth: usize,
}

impl QuadraticEnergy {
    pub fn assemble(model: &CrawlerModel) -> Result<Self> {
        let n = model.n();
        let mut a = DMatrix::zeros(n, n);
        let mut a_sh = DMatrix::zeros(n - 1, n - 1);
        let mut bandwidth = 0;
        for s in model.springs() {
            let h = s.k / 2.0;
            a[(s.i, s.i)] += h;
            a[(s.j, s.j)] += h;
            a[(s.i, s.j)] -= h;
            a[(s.j, s.i)] -= h;
            let (lo, hi) = (s.i.min(s.j), s.i.max(s.j));
            bandwidth = bandwidth.max(hi - lo);
            // x_j - x_i = ±(z_lo + ... + z_{hi-1}); the sign cancels in g gᵀ
            for p in lo..hi {
                for q in lo..hi {
                    a_sh[(p, q)] += h;
                }
            }
        }
        let eig = SymmetricEigen::new(a_sh.clone());
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(Error::Structural(format!(
                "shape stiffness is not positive definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        let lambda_max = SymmetricEigen::new(a.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(0.0, f64::max);
        Ok(QuadraticEnergy {
            springs: model.springs().to_vec(),
            a,
            a_sh,
            lambda_max,
            bandwidth,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_sh(&self) -> &DMatrix<f64> {
        &self.a_sh
    }

    /// Largest eigenvalue of `A`.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Largest index distance `|i - j|` over springs.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn springs(&self) -> &[Spring] {
        &self.springs
    }

    pub fn load(&self, t: f64) -> Result<Vec<f64>> {
        let mut l = vec![0.0; self.n()];
        for s in &self.springs {
            let f = s.k * s.rest.eval(t)?;
            l[s.j] += f;
            l[s.i] -= f;
        }
        Ok(l)
    }

    pub fn load_sh(&self, t: f64) -> Result<Vec<f64>> {
        let mut l = vec![0.0; self.n() - 1];
        for s in &self.springs {
            let f = s.k * s.rest.eval(t)?;
            let (lo, hi, sign) = if s.j > s.i { (s.i, s.j, 1.0) } else { (s.j, s.i, -1.0) };
            for v in &mut l[lo..hi] {
                *v += sign * f;
            }
        }
        Ok(l)
    }

    /// `2 A x`, computed spring by spring.
    pub fn apply_2a(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for s in &self.springs {
            let f = s.k * (x[s.j] - x[s.i]);
            out[s.j] += f;
            out[s.i] -= f;
        }
        out
    }

    pub fn energy(&self, t: f64, x: &[f64]) -> Result<f64> {
        let mut e = 0.0;
        for s in &self.springs {
            let d = x[s.j] - x[s.i];
            e += 0.5 * s.k * d * d - s.k * s.rest.eval(t)? * d;
        }
        Ok(e)
    }

    pub fn energy_sh(&self, t: f64, z: &[f64]) -> Result<f64> {
        let zv = DVector::from_column_slice(z);
        let l = DVector::from_vec(self.load_sh(t)?);
        Ok((&self.a_sh * &zv).dot(&zv) - l.dot(&zv))
    }

    /// `D_x E(t, x) = 2 A x - ℓ(t)`.
    pub fn gradient(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let l = self.load(t)?;
        Ok(self.apply_2a(x).iter().zip(&l).map(|(a, b)| a - b).collect())
    }

    pub fn tension(&self, t: f64, x: &[f64]) -> Result<Tension> {
        let full: Vec<f64> = self.gradient(t, x)?.iter().map(|g| -g).collect();
        let sh = shape_tension_of(&full);
        Ok(Tension { full, sh })
    }

    /// Shape whose tension equals `zeta`: solves `ℓ_sh(t) - 2 A_sh z = ζ`.
    pub fn shape_for_tension(&self, t: f64, zeta: &[f64]) -> Result<Vec<f64>> {
        let l = self.load_sh(t)?;
        let rhs = DVector::from_iterator(l.len(), l.iter().zip(zeta).map(|(a, b)| 0.5 * (a - b)));
        let chol = self
            .a_sh
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Structural("shape stiffness is not positive definite".into()))?;
        Ok(chol.solve(&rhs).iter().copied().collect())
    }

    /// Stress-free shape at time `t`.
    pub fn relaxed_shape(&self, t: f64) -> Result<Vec<f64>> {
        self.shape_for_tension(t, &vec![0.0; self.n() - 1])
    }
}
