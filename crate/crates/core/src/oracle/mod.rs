//! Discrete Neumann Laplacians used as independent checks on the analytic
//! spectra: periodic finite differences on circles, cotangent Laplacians on
//! icospheres and on their quotients by a rotation.

mod eigen;
mod matching;
mod mesh;

pub use eigen::{lowest_eigenvalues, lowest_eigenvalues_with, EigenOptions};
pub use matching::{spectrum_match, ClusterMatch, MatchReport};
pub use mesh::{Mesh, Point};

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finest supported icosphere refinement.
pub const MAX_LEVEL: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Circle { circumference: f64 },
    Icosphere { level: u32 },
    Football { q: u64, level: u32 },
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Circle { circumference } => write!(f, "circle(L={circumference})"),
            Shape::Icosphere { level } => write!(f, "icosphere(level={level})"),
            Shape::Football { q, level } => write!(f, "football(q={q}, level={level})"),
        }
    }
}

/// Generalized eigenproblem `K x = λ M x` with `K` given by nonnegative edge
/// weights (so `K·1 = 0` exactly) and `M` diagonal.
#[derive(Clone, Debug)]
pub struct DiscreteLaplacian {
    edges: Vec<(usize, usize, f64)>,
    mass: Vec<f64>,
    shape: Shape,
    mesh: Option<Mesh>,
}

impl DiscreteLaplacian {
    /// Builds from sorted, distinct edges `(i, j, w)` with `i < j`.
    pub fn new(edges: Vec<(usize, usize, f64)>, mass: Vec<f64>, shape: Shape) -> Result<Self> {
        let n = mass.len();
        if mass.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::domain("mass entries must be positive and finite"));
        }
        if edges.iter().any(|&(i, j, w)| i >= j || j >= n || !(w >= 0.0 && w.is_finite())) {
            return Err(Error::domain("edges must satisfy i < j < size with finite weights >= 0"));
        }
        if edges.windows(2).any(|e| (e[0].0, e[0].1) >= (e[1].0, e[1].1)) {
            return Err(Error::domain("edges must be sorted and distinct"));
        }
        Ok(DiscreteLaplacian {
            edges,
            mass,
            shape,
            mesh: None,
        })
    }

    pub fn size(&self) -> usize {
        self.mass.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Generating mesh (the full sphere for quotients), when there is one.
    pub fn mesh(&self) -> Option<&Mesh> {
        self.mesh.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `y = K x`, accumulated edge by edge from differences.
    pub fn apply_stiffness(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, w) in &self.edges {
            let f = w * (x[i] - x[j]);
            y[i] += f;
            y[j] -= f;
        }
    }

    /// `xᵀ K x = Σ w_ij (x_i - x_j)²`.
    pub fn stiffness_form(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, w)| w * (x[i] - x[j]).powi(2))
            .sum()
    }

    /// Row sums of `K`; zero by construction.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.size()];
        self.apply_stiffness(&vec![1.0; self.size()], &mut y);
        y
    }

    /// Writes the ASCII mesh dump; circles are written as planar polygons
    /// without triangles.
    pub fn write_mesh<W: Write>(&self, mut out: W) -> Result<()> {
        match (&self.mesh, self.shape) {
            (Some(m), _) => m.write_ascii(out),
            (None, Shape::Circle { circumference }) => {
                let n = self.size();
                let radius = circumference / std::f64::consts::TAU;
                for i in 0..n {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    writeln!(out, "v {:?} {:?} {:?}", radius * t.cos(), radius * t.sin(), 0.0)?;
                }
                Ok(())
            }
            (None, _) => Err(Error::domain("no mesh is attached to this discretization")),
        }
    }
}

/// Periodic second-difference Laplacian on `N` equally spaced points of a
/// circle of length `L`: stiffness weights `1/h`, mass `h`.
pub fn build_circle(n: usize, circumference: f64) -> Result<DiscreteLaplacian> {
    if n < 3 {
        return Err(Error::domain(format!("circle needs N >= 3 points, got {n}")));
    }
    if !(circumference > 0.0 && circumference <= std::f64::consts::TAU * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "circumference must lie in (0, 2π], got {circumference}"
        )));
    }
    let h = circumference / n as f64;
    let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0 / h)).collect();
    edges.push((0, n - 1, 1.0 / h));
    edges.sort_by_key(|e| (e.0, e.1));
    DiscreteLaplacian::new(edges, vec![h; n], Shape::Circle { circumference })
}

/// Cotangent Laplacian with lumped mass on the icosphere of the given level.
/// For `q > 1` the mesh is built `q`-fold symmetric and its vertices are
/// identified along rotation orbits; stiffness and mass are divided by `q` so
/// that the quotient carries the measure of the orbifold.
pub fn build_icosphere(level: u32, q: u64) -> Result<DiscreteLaplacian> {
    if level > MAX_LEVEL {
        return Err(Error::Resource(format!(
            "icosphere level {level} exceeds the supported maximum {MAX_LEVEL}"
        )));
    }
    if q == 0 {
        return Err(Error::domain("rotation order q must be >= 1"));
    }
    let sym = mesh::symmetric_icosphere(level, q)?;
    let weights = sym.mesh.cotangent_weights();
    let full_mass = sym.mesh.lumped_mass();
    if q == 1 {
        let mut lap = DiscreteLaplacian::new(weights, full_mass, Shape::Icosphere { level })?;
        lap.mesh = Some(sym.mesh);
        return Ok(lap);
    }

    let nv = full_mass.len();
    let mut orbit = vec![usize::MAX; nv];
    let mut count = 0;
    for start in 0..nv {
        if orbit[start] != usize::MAX {
            continue;
        }
        let mut v = start;
        while orbit[v] == usize::MAX {
            orbit[v] = count;
            v = sym.rotation[v];
        }
        count += 1;
    }
    let scale = 1.0 / q as f64;
    let mut mass = vec![0.0; count];
    for (v, m) in full_mass.iter().enumerate() {
        mass[orbit[v]] += m * scale;
    }
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, j, w) in weights {
        let (a, b) = (orbit[i], orbit[j]);
        if a != b {
            *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += w * scale;
        }
    }
    let edges = acc.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    let mut lap = DiscreteLaplacian::new(edges, mass, Shape::Football { q, level })?;
    lap.mesh = Some(sym.mesh);
    Ok(lap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn circle_invariants() {
        let lap = build_circle(16, TAU * 0.7).unwrap();
        assert_eq!(lap.size(), 16);
        assert!(lap.row_sums().iter().all(|&s| s == 0.0));
        assert!((lap.total_mass() - TAU * 0.7).abs() < 1e-12);
        assert!(build_circle(2, 1.0).is_err());
        assert!(build_circle(8, 7.0).is_err());
        assert!(build_circle(8, 0.0).is_err());
    }

    #[test]
    fn icosphere_invariants() {
        for (level, q) in [(3, 1), (3, 2), (3, 3), (3, 5)] {
            let lap = build_icosphere(level, q).unwrap();
            let target = 4.0 * PI / q as f64;
            let mass = lap.total_mass();
            assert!((mass - target).abs() < 0.01 * target, "q={q} mass={mass}");
            let sums = lap.row_sums();
            assert!(sums.iter().all(|s| s.abs() < 1e-12));
            assert!(lap.edges().iter().all(|e| e.2 > 0.0));
        }
        let whole = build_icosphere(2, 1).unwrap().size();
        assert_eq!(whole, 162);
        // q = 5 fixes the two axis vertices, q = 3 and q = 2 (level ≥ 1) as noted
        assert_eq!(build_icosphere(2, 5).unwrap().size(), (162 - 2) / 5 + 2);
        assert_eq!(build_icosphere(2, 3).unwrap().size(), 162 / 3);
        assert_eq!(build_icosphere(2, 2).unwrap().size(), (162 - 2) / 2 + 2);
        assert!(matches!(build_icosphere(8, 1), Err(Error::Resource(_))));
        assert!(build_icosphere(2, 4).is_err());
    }
}
