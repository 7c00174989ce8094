use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary edge of a rectangular structured grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

/// Rectangular grid of `nx × ny` bilinear quads split into `groups.len()`
/// equal-width material blocks along x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub length: f64,
    pub height: f64,
    /// Material group (0 = "a", 1 = "b") of each block, left to right.
    pub groups: Vec<usize>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            nx: 20,
            ny: 4,
            origin: [-0.08, -0.008],
            length: 0.16,
            height: 0.016,
            groups: vec![0, 0, 1, 0, 1],
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadMesh {
    coords: Vec<[f64; 2]>,
    elements: Vec<[usize; 4]>,
    element_group: Vec<usize>,
    edges: [Vec<usize>; 4],
}

const GAUSS: f64 = 0.577_350_269_189_625_8;

/// 2×2 Gauss points on the reference square, unit weights.
pub const GAUSS_POINTS: [[f64; 2]; 4] = [[-GAUSS, -GAUSS], [GAUSS, -GAUSS], [GAUSS, GAUSS], [-GAUSS, GAUSS]];

/// Q1 shape functions and their reference derivatives, nodes ordered
/// counter-clockwise from (−1, −1).
pub fn shape(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let s = [-1.0, 1.0, 1.0, -1.0];
    let t = [-1.0, -1.0, 1.0, 1.0];
    let mut n = [0.0; 4];
    let mut d = [[0.0; 2]; 4];
    for a in 0..4 {
        n[a] = 0.25 * (1.0 + s[a] * xi) * (1.0 + t[a] * eta);
        d[a] = [0.25 * s[a] * (1.0 + t[a] * eta), 0.25 * t[a] * (1.0 + s[a] * xi)];
    }
    (n, d)
}

impl QuadMesh {
    /// Structured grid. Nodes are numbered column by column, `i (ny+1) + j`,
    /// which keeps the Jacobian bandwidth proportional to `ny`.
    pub fn structured(spec: &MeshSpec) -> Result<Self> {
        let MeshSpec { nx, ny, origin, length, height, ref groups } = *spec;
        if nx == 0 || ny == 0 {
            return Err(Error::Mesh("grid needs at least one element per direction".into()));
        }
        if groups.is_empty() || groups.len() > nx {
            return Err(Error::Mesh(format!("{} blocks for {nx} element columns", groups.len())));
        }
        let node = |i: usize, j: usize| i * (ny + 1) + j;
        let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
        for i in 0..=nx {
            for j in 0..=ny {
                coords.push([
                    origin[0] + length * i as f64 / nx as f64,
                    origin[1] + height * j as f64 / ny as f64,
                ]);
            }
        }
        let mut elements = Vec::with_capacity(nx * ny);
        let mut element_group = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let g = groups[i * groups.len() / nx];
            for j in 0..ny {
                elements.push([node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]);
                element_group.push(g);
            }
        }
        let edges = [
            (0..=ny).map(|j| node(0, j)).collect(),
            (0..=ny).map(|j| node(nx, j)).collect(),
            (0..=nx).map(|i| node(i, 0)).collect(),
            (0..=nx).map(|i| node(i, ny)).collect(),
        ];
        Self::from_parts(coords, elements, element_group, edges)
    }

    /// General quad mesh; edges are ordered node chains (left, right, bottom, top).
    pub fn from_parts(
        coords: Vec<[f64; 2]>,
        elements: Vec<[usize; 4]>,
        element_group: Vec<usize>,
        edges: [Vec<usize>; 4],
    ) -> Result<Self> {
        if element_group.len() != elements.len() {
            return Err(Error::Mesh("one group per element required".into()));
        }
        let mesh = Self {
            coords,
            elements,
            element_group,
            edges,
        };
        for (e, conn) in mesh.elements.iter().enumerate() {
            if conn.iter().any(|&n| n >= mesh.coords.len()) {
                return Err(Error::Mesh(format!("element {e} references a missing node")));
            }
            for gp in GAUSS_POINTS {
                let det = mesh.map_jacobian(e, gp[0], gp[1]).1;
                if !(det > 0.0) {
                    return Err(Error::Mesh(format!("element {e} has non-positive map determinant {det}")));
                }
            }
        }
        if mesh.edges.iter().flatten().any(|&n| n >= mesh.coords.len()) {
            return Err(Error::Mesh("edge references a missing node".into()));
        }
        Ok(mesh)
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn element_group(&self, e: usize) -> usize {
        self.element_group[e]
    }

    pub fn edge_nodes(&self, edge: Edge) -> &[usize] {
        &self.edges[edge as usize]
    }

    /// `∂X/∂ξ` at a reference point and its determinant.
    pub fn map_jacobian(&self, e: usize, xi: f64, eta: f64) -> ([[f64; 2]; 2], f64) {
        let (_, d) = shape(xi, eta);
        let mut jm = [[0.0; 2]; 2];
        for (a, &n) in self.elements[e].iter().enumerate() {
            for k in 0..2 {
                for r in 0..2 {
                    jm[k][r] += self.coords[n][k] * d[a][r];
                }
            }
        }
        let det = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0];
        (jm, det)
    }

    /// Shape values, physical gradients and `det(∂X/∂ξ)` at a reference point.
    pub fn physical_gradients(&self, e: usize, xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4], f64) {
        let (n, d) = shape(xi, eta);
        let (jm, det) = self.map_jacobian(e, xi, eta);
        let inv = [[jm[1][1] / det, -jm[0][1] / det], [-jm[1][0] / det, jm[0][0] / det]];
        let mut g = [[0.0; 2]; 4];
        for a in 0..4 {
            for k in 0..2 {
                g[a][k] = d[a][0] * inv[0][k] + d[a][1] * inv[1][k];
            }
        }
        (n, g, det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts_and_edges() {
        let m = QuadMesh::structured(&MeshSpec::default()).unwrap();
        assert_eq!(m.num_nodes(), 21 * 5);
        assert_eq!(m.num_elements(), 80);
        assert_eq!(m.edge_nodes(Edge::Left), &[0, 1, 2, 3, 4]);
        assert_eq!(m.edge_nodes(Edge::Bottom).len(), 21);
        let groups: Vec<usize> = (0..20).map(|i| m.element_group(i * 4)).collect();
        assert_eq!(&groups[..4], &[0, 0, 0, 0]);
        assert_eq!(&groups[8..12], &[1, 1, 1, 1]);
        assert_eq!(&groups[16..], &[1, 1, 1, 1]);
    }

    #[test]
    fn gradients_of_rectangle() {
        let spec = MeshSpec {
            nx: 1,
            ny: 1,
            origin: [0.0, 0.0],
            length: 2.0,
            height: 0.5,
            groups: vec![0],
        };
        let m = QuadMesh::structured(&spec).unwrap();
        let (_, g, det) = m.physical_gradients(0, 0.0, 0.0);
        assert!((det - 0.25).abs() < 1e-15);
        // linear field x reproduced exactly
        let x: Vec<f64> = m.elements()[0].iter().map(|&n| m.coords()[n][0]).collect();
        let gx: f64 = (0..4).map(|a| g[a][0] * x[a]).sum();
        assert!((gx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn clockwise_element_is_a_mesh_error() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let r = QuadMesh::from_parts(coords, vec![[0, 3, 2, 1]], vec![0], Default::default());
        assert!(matches!(r, Err(Error::Mesh(_))));
    }
}
