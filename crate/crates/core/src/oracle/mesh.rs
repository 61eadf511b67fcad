use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 3];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: Point) -> Point {
    let l = norm(a);
    [a[0] / l, a[1] / l, a[2] / l]
}

/// Triangle mesh with vertices on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// ASCII dump: `v x y z` lines followed by 0-based `t i j k` lines.
    pub fn write_ascii<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {:?} {:?} {:?}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Cotangent edge weights `(cot α + cot β) / 2`, sorted by edge.
    pub fn cotangent_weights(&self) -> Vec<(usize, usize, f64)> {
        let mut w: HashMap<(usize, usize), f64> = HashMap::new();
        for t in &self.triangles {
            for c in 0..3 {
                let (i, j, k) = (t[c], t[(c + 1) % 3], t[(c + 2) % 3]);
                let a = sub(self.vertices[i], self.vertices[k]);
                let b = sub(self.vertices[j], self.vertices[k]);
                let cot = dot(a, b) / norm(cross(a, b));
                *w.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
            }
        }
        let mut edges: Vec<_> = w.into_iter().map(|((i, j), x)| (i, j, x)).collect();
        edges.sort_by_key(|e| (e.0, e.1));
        edges
    }

    /// Lumped barycentric mass: a third of each incident flat triangle area.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let area = 0.5 * norm(cross(sub(b, a), sub(c, a)));
            for &i in t {
                m[i] += area / 3.0;
            }
        }
        m
    }
}

/// Icosphere refined `level` times together with the vertex permutation induced
/// by a rotation of order `q` about a symmetry axis of the base icosahedron.
pub(crate) struct SymmetricIcosphere {
    pub mesh: Mesh,
    pub rotation: Vec<usize>,
}

fn icosahedron() -> Mesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut raw = Vec::new();
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            raw.push([0.0, s1, s2 * phi]);
            raw.push([s1, s2 * phi, 0.0]);
            raw.push([s2 * phi, 0.0, s1]);
        }
    }
    // edges have length 2 before projection
    let adjacent =
        |i: usize, j: usize| (dot(sub(raw[i], raw[j]), sub(raw[i], raw[j])) - 4.0).abs() < 1e-9;
    let mut triangles = Vec::new();
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                    let n = cross(sub(raw[j], raw[i]), sub(raw[k], raw[i]));
                    let centroid = [
                        raw[i][0] + raw[j][0] + raw[k][0],
                        raw[i][1] + raw[j][1] + raw[k][1],
                        raw[i][2] + raw[j][2] + raw[k][2],
                    ];
                    triangles.push(if dot(n, centroid) > 0.0 { [i, j, k] } else { [i, k, j] });
                }
            }
        }
    }
    debug_assert_eq!(triangles.len(), 20);
    Mesh {
        vertices: raw.into_iter().map(normalize).collect(),
        triangles,
    }
}

fn rotate(p: Point, axis: Point, angle: f64) -> Point {
    // Rodrigues
    let (s, c) = angle.sin_cos();
    let kxp = cross(axis, p);
    let kdp = dot(axis, p);
    [
        p[0] * c + kxp[0] * s + axis[0] * kdp * (1.0 - c),
        p[1] * c + kxp[1] * s + axis[1] * kdp * (1.0 - c),
        p[2] * c + kxp[2] * s + axis[2] * kdp * (1.0 - c),
    ]
}

fn symmetry_axis(base: &Mesh, q: u64) -> Result<Point> {
    let [a, b, c] = base.triangles[0].map(|i| base.vertices[i]);
    match q {
        1 | 5 => Ok(a),
        3 => Ok(normalize([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]])),
        2 => Ok(normalize([a[0] + b[0], a[1] + b[1], a[2] + b[2]])),
        _ => Err(Error::domain(format!(
            "q = {q} is not a rotation order of the icosahedral mesh (use 1, 2, 3 or 5)"
        ))),
    }
}

pub(crate) fn symmetric_icosphere(level: u32, q: u64) -> Result<SymmetricIcosphere> {
    let mut mesh = icosahedron();
    let axis = symmetry_axis(&mesh, q)?;
    let mut rotation = Vec::with_capacity(12);
    for &p in &mesh.vertices {
        let r = rotate(p, axis, TAU / q as f64);
        let j = mesh
            .vertices
            .iter()
            .position(|&v| norm(sub(v, r)) < 1e-9)
            .ok_or_else(|| Error::domain("rotation does not map the icosahedron to itself"))?;
        rotation.push(j);
    }

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut vertices = mesh.vertices.clone();
        let mut parents = Vec::new();
        let mut mid = |i: usize, j: usize, vertices: &mut Vec<Point>| -> usize {
            let key = (i.min(j), i.max(j));
            *midpoint.entry(key).or_insert_with(|| {
                let (a, b) = (vertices[i], vertices[j]);
                vertices.push(normalize([a[0] + b[0], a[1] + b[1], a[2] + b[2]]));
                parents.push(key);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(mesh.triangles.len() * 4);
        for &[a, b, c] in &mesh.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        // a rotation maps the midpoint of (i, j) to the midpoint of (σi, σj)
        for &(i, j) in &parents {
            let (si, sj) = (rotation[i], rotation[j]);
            rotation.push(midpoint[&(si.min(sj), si.max(sj))]);
        }
        mesh = Mesh {
            vertices,
            triangles,
        };
    }
    Ok(SymmetricIcosphere { mesh, rotation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts() {
        for level in 0..4 {
            let s = symmetric_icosphere(level, 1).unwrap();
            assert_eq!(s.mesh.vertices.len(), 10 * 4usize.pow(level) + 2);
            assert_eq!(s.mesh.triangles.len(), 20 * 4usize.pow(level));
        }
    }

    #[test]
    fn rotations_are_geometric_symmetries() {
        for q in [2, 3, 5] {
            let s = symmetric_icosphere(3, q).unwrap();
            let axis = symmetry_axis(&icosahedron(), q).unwrap();
            for (i, &j) in s.rotation.iter().enumerate() {
                let r = rotate(s.mesh.vertices[i], axis, TAU / q as f64);
                assert!(norm(sub(r, s.mesh.vertices[j])) < 1e-12);
            }
            // order exactly q
            for i in 0..s.rotation.len() {
                let mut j = i;
                for _ in 0..q {
                    j = s.rotation[j];
                }
                assert_eq!(j, i);
            }
        }
        assert!(symmetric_icosphere(1, 4).is_err());
    }

    #[test]
    fn weights_positive_and_area_converges() {
        let s = symmetric_icosphere(3, 1).unwrap();
        assert!(s.mesh.cotangent_weights().iter().all(|e| e.2 > 0.0));
        let area: f64 = s.mesh.lumped_mass().iter().sum();
        let sphere = 2.0 * TAU;
        assert!(area < sphere && area > 0.99 * sphere, "area {area}");
    }

    #[test]
    fn ascii_dump() {
        let s = symmetric_icosphere(0, 1).unwrap();
        let mut buf = Vec::new();
        s.mesh.write_ascii(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12);
        assert_eq!(text.lines().filter(|l| l.starts_with("t ")).count(), 20);
    }
}
