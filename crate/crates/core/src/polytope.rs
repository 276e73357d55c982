//! Momentum polytopes in dimension one and two.
//!
//! A polytope is the set `{p : <n_F, p> + c_F >= 0}` for a list of facets
//! with primitive inward integer normals. The boundary carries the lattice
//! measure `dσ` fixed facet-wise by `dσ ∧ dL_F = dμ`; on an interval this is
//! a unit atom at each endpoint, on a polygon it is arc length divided by
//! `|n_F|` along each edge.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::gauss::GaussRule;

/// Default number of Gauss points for intervals.
pub const DEFAULT_ORDER_1D: usize = 32;
/// Default per-triangle order for polygons.
pub const DEFAULT_ORDER_2D: usize = 12;

const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("not Delzant: normals at vertex {vertex:?} have determinant {det}")]
    NotDelzant { vertex: Vec<f64>, det: i64 },
    #[error("facet normal {0:?} is not a primitive integer vector")]
    NotPrimitive(Vec<i64>),
    #[error("unsupported dimension {0} (expected 1 or 2)")]
    BadDimension(usize),
    #[error("need at least {need} facets, got {got}")]
    TooFewFacets { need: usize, got: usize },
    #[error("facet {0} is redundant or meets the polytope only in a vertex")]
    RedundantFacet(usize),
    #[error("quadrature order must be at least 1")]
    BadOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: f64,
}

impl Facet {
    pub fn new(normal: Vec<i64>, offset: f64) -> Self {
        Facet { normal, offset }
    }

    /// The affine function `L_F(p) = <n_F, p> + c_F`.
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(p)
            .map(|(&n, &x)| n as f64 * x)
            .sum::<f64>()
            + self.offset
    }

    fn norm(&self) -> f64 {
        self.normal
            .iter()
            .map(|&n| (n * n) as f64)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumPolytope {
    dim: usize,
    facets: Vec<Facet>,
    /// Interval: `[lo, hi]`. Polygon: counter-clockwise.
    vertices: Vec<Vec<f64>>,
    /// Polygon only: `edge_facets[i]` carries the edge from vertex `i` to `i + 1`.
    edge_facets: Vec<usize>,
}

impl MomentumPolytope {
    pub fn build(facets: Vec<Facet>) -> Result<Self, PolytopeError> {
        let dim = facets.first().map(|f| f.normal.len()).unwrap_or(0);
        if !(dim == 1 || dim == 2) || facets.iter().any(|f| f.normal.len() != dim) {
            return Err(PolytopeError::BadDimension(dim));
        }
        if facets.len() < dim + 1 {
            return Err(PolytopeError::TooFewFacets {
                need: dim + 1,
                got: facets.len(),
            });
        }
        for f in &facets {
            if !is_primitive(&f.normal) {
                return Err(PolytopeError::NotPrimitive(f.normal.clone()));
            }
        }
        match dim {
            1 => Self::build_interval(facets),
            _ => Self::build_polygon(facets),
        }
    }

    /// `[lo, hi]` with its two unit-normal facets.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, PolytopeError> {
        Self::build(vec![Facet::new(vec![1], -lo), Facet::new(vec![-1], hi)])
    }

    fn build_interval(facets: Vec<Facet>) -> Result<Self, PolytopeError> {
        if facets.len() != 2 {
            return Err(PolytopeError::RedundantFacet(2));
        }
        let (left, right) = match (facets[0].normal[0], facets[1].normal[0]) {
            (1, -1) => (&facets[0], &facets[1]),
            (-1, 1) => (&facets[1], &facets[0]),
            _ => return Err(PolytopeError::Unbounded),
        };
        let lo = -left.offset;
        let hi = right.offset;
        if !(hi - lo > GEOM_TOL * (1.0 + lo.abs().max(hi.abs()))) {
            return Err(PolytopeError::EmptyInterior);
        }
        Ok(MomentumPolytope {
            dim: 1,
            facets,
            vertices: vec![vec![lo], vec![hi]],
            edge_facets: Vec::new(),
        })
    }

    fn build_polygon(facets: Vec<Facet>) -> Result<Self, PolytopeError> {
        // bounded iff the normals are not confined to a closed half-plane
        let mut angles: Vec<f64> = facets
            .iter()
            .map(|f| (f.normal[1] as f64).atan2(f.normal[0] as f64))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut max_gap = angles[0] + 2.0 * std::f64::consts::PI - angles[angles.len() - 1];
        for w in angles.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        if max_gap >= std::f64::consts::PI - 1e-12 {
            return Err(PolytopeError::Unbounded);
        }

        let scale = 1.0 + facets.iter().fold(0.0_f64, |m, f| m.max(f.offset.abs()));
        let tol = GEOM_TOL * scale;
        let mut verts: Vec<[f64; 2]> = Vec::new();
        for i in 0..facets.len() {
            for j in (i + 1)..facets.len() {
                let (a, b) = (&facets[i].normal, &facets[j].normal);
                let det = (a[0] * b[1] - a[1] * b[0]) as f64;
                if det == 0.0 {
                    continue;
                }
                let (ci, cj) = (-facets[i].offset, -facets[j].offset);
                let p = [
                    (ci * b[1] as f64 - cj * a[1] as f64) / det,
                    (a[0] as f64 * cj - b[0] as f64 * ci) / det,
                ];
                if facets.iter().all(|f| f.eval(&p) >= -tol)
                    && !verts
                        .iter()
                        .any(|q| (q[0] - p[0]).abs() <= tol && (q[1] - p[1]).abs() <= tol)
                {
                    verts.push(p);
                }
            }
        }
        if verts.len() < 3 {
            return Err(PolytopeError::EmptyInterior);
        }
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / verts.len() as f64;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / verts.len() as f64;
        if facets.iter().any(|f| f.eval(&[cx, cy]) <= tol) {
            return Err(PolytopeError::EmptyInterior);
        }
        verts.sort_by(|p, q| {
            let ap = (p[1] - cy).atan2(p[0] - cx);
            let aq = (q[1] - cy).atan2(q[0] - cx);
            ap.partial_cmp(&aq).unwrap()
        });

        let incident = |p: &[f64; 2]| -> Vec<usize> {
            (0..facets.len())
                .filter(|&k| facets[k].eval(p).abs() <= tol)
                .collect()
        };
        let n = verts.len();
        let mut edge_facets = Vec::with_capacity(n);
        for i in 0..n {
            let here = incident(&verts[i]);
            if here.len() != 2 {
                let extra = here.get(2).copied().unwrap_or(0);
                return Err(PolytopeError::RedundantFacet(extra));
            }
            let next = incident(&verts[(i + 1) % n]);
            let shared = here.iter().find(|k| next.contains(k)).copied();
            match shared {
                Some(k) => edge_facets.push(k),
                None => return Err(PolytopeError::EmptyInterior),
            }
        }
        let mut used = vec![false; facets.len()];
        edge_facets.iter().for_each(|&k| used[k] = true);
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(PolytopeError::RedundantFacet(k));
        }
        for v in &verts {
            let inc = incident(v);
            let (a, b) = (&facets[inc[0]].normal, &facets[inc[1]].normal);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() != 1 {
                return Err(PolytopeError::NotDelzant {
                    vertex: v.to_vec(),
                    det,
                });
            }
        }
        Ok(MomentumPolytope {
            dim: 2,
            facets,
            vertices: verts.into_iter().map(|v| v.to_vec()).collect(),
            edge_facets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// `Some((lo, hi))` for intervals.
    pub fn as_interval(&self) -> Option<(f64, f64)> {
        (self.dim == 1).then(|| (self.vertices[0][0], self.vertices[1][0]))
    }

    /// Vertex average; strictly interior.
    pub fn center(&self) -> Vec<f64> {
        let n = self.vertices.len() as f64;
        (0..self.dim)
            .map(|k| self.vertices.iter().map(|v| v[k]).sum::<f64>() / n)
            .collect()
    }

    /// Lebesgue measure of the polytope.
    pub fn volume(&self) -> f64 {
        match self.dim {
            1 => self.vertices[1][0] - self.vertices[0][0],
            _ => {
                let n = self.vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let (p, q) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
                        p[0] * q[1] - p[1] * q[0]
                    })
                    .sum::<f64>()
            }
        }
    }

    /// Number of facets containing `p` up to the geometric tolerance.
    pub fn facets_through(&self, p: &[f64]) -> usize {
        self.facets
            .iter()
            .filter(|f| f.eval(p).abs() <= 1e-12)
            .count()
    }

    pub fn quadrature(&self, order: usize) -> Result<QuadratureRule, PolytopeError> {
        if order == 0 {
            return Err(PolytopeError::BadOrder);
        }
        Ok(match self.dim {
            1 => self.interval_rule(order),
            _ => self.polygon_rule(order),
        })
    }

    /// Quadrature at the default order for the dimension.
    pub fn default_quadrature(&self) -> QuadratureRule {
        let order = if self.dim == 1 {
            DEFAULT_ORDER_1D
        } else {
            DEFAULT_ORDER_2D
        };
        self.quadrature(order).expect("default order is positive")
    }

    fn interval_rule(&self, order: usize) -> QuadratureRule {
        let (lo, hi) = self.as_interval().unwrap();
        let g = GaussRule::on_interval(order, lo, hi);
        let facets = self
            .facets
            .iter()
            .enumerate()
            .map(|(k, f)| FacetRule {
                facet: k,
                nodes: vec![if f.normal[0] == 1 { lo } else { hi }],
                weights: vec![1.0],
            })
            .collect();
        QuadratureRule {
            dim: 1,
            nodes: g.nodes,
            weights: g.weights,
            facets,
            exact_degree: 2 * order - 1,
        }
    }

    fn polygon_rule(&self, order: usize) -> QuadratureRule {
        let q = order + 1;
        let g = GaussRule::on_interval(q, 0.0, 1.0);
        let c = self.center();
        let n = self.vertices.len();
        let mut nodes = Vec::with_capacity(2 * n * q * q);
        let mut weights = Vec::with_capacity(n * q * q);
        for i in 0..n {
            let (v0, v1) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
            let e0 = [v0[0] - c[0], v0[1] - c[1]];
            let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
            let jac = (e0[0] * e1[1] - e0[1] * e1[0]).abs();
            for (&xi, &wx) in g.nodes.iter().zip(&g.weights) {
                for (&eta, &wy) in g.nodes.iter().zip(&g.weights) {
                    nodes.push(c[0] + xi * e0[0] + xi * eta * e1[0]);
                    nodes.push(c[1] + xi * e0[1] + xi * eta * e1[1]);
                    weights.push(wx * wy * xi * jac);
                }
            }
        }
        let facets = (0..n)
            .map(|i| {
                let (v0, v1) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
                let k = self.edge_facets[i];
                let len = ((v1[0] - v0[0]).powi(2) + (v1[1] - v0[1]).powi(2)).sqrt();
                let lattice_len = len / self.facets[k].norm();
                let mut fnodes = Vec::with_capacity(2 * q);
                for &s in &g.nodes {
                    fnodes.push(v0[0] + s * (v1[0] - v0[0]));
                    fnodes.push(v0[1] + s * (v1[1] - v0[1]));
                }
                FacetRule {
                    facet: k,
                    nodes: fnodes,
                    weights: g.weights.iter().map(|w| w * lattice_len).collect(),
                }
            })
            .collect();
        QuadratureRule {
            dim: 2,
            nodes,
            weights,
            facets,
            exact_degree: 2 * order,
        }
    }
}

/// Nodes are stored flat with stride `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub facets: Vec<FacetRule>,
    /// Interior rule integrates polynomials of total degree up to this exactly.
    pub exact_degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetRule {
    pub facet: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FacetRule {
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, dim: usize, mut f: F) -> f64 {
        self.nodes
            .chunks(dim)
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

impl QuadratureRule {
    pub fn points(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.nodes
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.points().map(|(p, w)| w * f(p)).sum()
    }

    /// `∫_{∂P} f dσ`.
    pub fn integrate_boundary<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.facets
            .iter()
            .map(|r| r.integrate(self.dim, &mut f))
            .sum()
    }
}

/// Moments of the density `f` against `{1, μ_1, .., μ_ℓ}`.
#[derive(Debug, Clone)]
pub struct AffineMoments {
    pub mass: f64,
    pub first: Vec<f64>,
    /// `(ℓ+1) x (ℓ+1)`, symmetric.
    pub gram: DMatrix<f64>,
    /// Eigenvalue of the Gram matrix closest to zero.
    pub min_eigenvalue: f64,
    pub singular: bool,
}

pub fn affine_moments<F: FnMut(&[f64]) -> f64>(rule: &QuadratureRule, mut f: F) -> AffineMoments {
    let d = rule.dim;
    let mut gram = DMatrix::<f64>::zeros(d + 1, d + 1);
    let mut basis = vec![1.0; d + 1];
    for (p, w) in rule.points() {
        basis[1..].copy_from_slice(p);
        let fw = w * f(p);
        for i in 0..=d {
            for j in 0..=d {
                gram[(i, j)] += fw * basis[i] * basis[j];
            }
        }
    }
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let largest = eig.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let min_eigenvalue = eig
        .iter()
        .copied()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap();
    let singular = largest == 0.0 || min_eigenvalue.abs() <= 1e-12 * largest;
    AffineMoments {
        mass: gram[(0, 0)],
        first: (1..=d).map(|i| gram[(0, i)]).collect(),
        gram,
        min_eigenvalue,
        singular,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn is_primitive(n: &[i64]) -> bool {
    n.iter().fold(0, |g, &x| gcd(g, x)) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex() -> MomentumPolytope {
        MomentumPolytope::build(vec![
            Facet::new(vec![1, 0], 0.0),
            Facet::new(vec![0, 1], 0.0),
            Facet::new(vec![-1, -1], 1.0),
        ])
        .unwrap()
    }

    fn unit_square() -> MomentumPolytope {
        MomentumPolytope::build(vec![
            Facet::new(vec![1, 0], 0.0),
            Facet::new(vec![0, 1], 0.0),
            Facet::new(vec![-1, 0], 1.0),
            Facet::new(vec![0, -1], 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn interval_from_two_half_lines() {
        let p = MomentumPolytope::build(vec![Facet::new(vec![1], 1.0), Facet::new(vec![-1], 1.0)])
            .unwrap();
        assert_eq!(p.as_interval(), Some((-1.0, 1.0)));
    }

    #[test]
    fn standard_simplex_is_delzant() {
        let p = simplex();
        assert_eq!(p.vertices().len(), 3);
        for v in p.vertices() {
            assert_eq!(p.facets_through(v), 2);
        }
        assert!((p.volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_delzant_triangle_is_rejected() {
        let err = MomentumPolytope::build(vec![
            Facet::new(vec![1, 0], 0.0),
            Facet::new(vec![0, 1], 0.0),
            Facet::new(vec![-1, -2], 1.0),
        ])
        .unwrap_err();
        match err {
            PolytopeError::NotDelzant { det, vertex } => {
                assert_eq!(det.abs(), 2);
                assert!((vertex[1] - 0.5).abs() < 1e-15);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            MomentumPolytope::build(vec![
                Facet::new(vec![1, 0], 0.0),
                Facet::new(vec![0, 1], 0.0),
                Facet::new(vec![1, 1], 1.0),
            ])
            .unwrap_err(),
            PolytopeError::Unbounded
        );
        assert_eq!(
            MomentumPolytope::interval(1.0, 1.0).unwrap_err(),
            PolytopeError::EmptyInterior
        );
        assert!(matches!(
            MomentumPolytope::build(vec![Facet::new(vec![2], 0.0), Facet::new(vec![-1], 1.0)]),
            Err(PolytopeError::NotPrimitive(_))
        ));
        assert!(matches!(
            MomentumPolytope::build(vec![
                Facet::new(vec![1, 0], 0.0),
                Facet::new(vec![0, 1], 0.0),
                Facet::new(vec![-1, -1], 1.0),
                Facet::new(vec![-1, 0], 5.0),
            ]),
            Err(PolytopeError::RedundantFacet(3))
        ));
        assert!(matches!(
            MomentumPolytope::build(vec![
                Facet::new(vec![1, 0], 0.0),
                Facet::new(vec![0, 1], 0.0),
                Facet::new(vec![-1, -1], -1.0),
            ]),
            Err(PolytopeError::EmptyInterior)
        ));
    }

    #[test]
    fn interval_quadrature_and_boundary_atoms() {
        let p = MomentumPolytope::interval(-1.0, 1.0).unwrap();
        let q = p.quadrature(5).unwrap();
        assert!((q.integrate(|x| x[0] * x[0]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((q.integrate_boundary(|_| 1.0) - 2.0).abs() < 1e-15);
        assert_eq!(q.facets.len(), 2);
        assert!(q.facets.iter().all(|f| f.weights == vec![1.0]));
    }

    #[test]
    fn square_boundary_has_lattice_length_four() {
        let q = unit_square().quadrature(3).unwrap();
        assert!((q.integrate_boundary(|_| 1.0) - 4.0).abs() < 1e-14);
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_measure_on_slanted_edge() {
        // hypotenuse of the simplex has Euclidean length sqrt(2) and |n| = sqrt(2)
        let p = simplex();
        let q = p.quadrature(4).unwrap();
        assert!((q.integrate_boundary(|_| 1.0) - 3.0).abs() < 1e-14);
        for r in &q.facets {
            let f = &p.facets()[r.facet];
            assert!(r.integrate(2, |p| f.eval(p)).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_moments_examples() {
        let q = MomentumPolytope::interval(-1.0, 1.0)
            .unwrap()
            .default_quadrature();
        let m = affine_moments(&q, |_| 1.0);
        assert!((m.gram[(0, 0)] - 2.0).abs() < 1e-14);
        assert!(m.gram[(0, 1)].abs() < 1e-14);
        assert!((m.gram[(1, 1)] - 2.0 / 3.0).abs() < 1e-14);
        assert!(!m.singular);

        let m = affine_moments(&q, |p| p[0]);
        assert!(m.gram[(0, 0)].abs() < 1e-14);
        assert!((m.gram[(0, 1)] - 2.0 / 3.0).abs() < 1e-14);
        assert!(m.gram[(1, 1)].abs() < 1e-14);
        assert!((m.min_eigenvalue.abs() - 2.0 / 3.0).abs() < 1e-12);
        assert!(!m.singular);

        let m = affine_moments(&q, |_| 0.0);
        assert!(m.singular);
        let m2 = affine_moments(&unit_square().default_quadrature(), |_| 0.0);
        assert!(m2.singular);
    }

    #[test]
    fn zero_order_is_rejected() {
        assert_eq!(
            simplex().quadrature(0).unwrap_err(),
            PolytopeError::BadOrder
        );
    }
}
