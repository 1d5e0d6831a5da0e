//! Finite volumes as residual distribution, and recovery of two-point
//! fluxes from element residuals.
//!
//! Given residuals `Psi_sigma` of an element with `sum Psi = 0`, we look for
//! antisymmetric edge fluxes on a graph over the element's DoFs with
//! `Psi_sigma = sum_{sigma'} fhat_{sigma sigma'}`.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{dot, Vec2};
use crate::problems::ConservationLaw;
use crate::residuals::ElementResidual;
use crate::space::Space;
use crate::{Error, Result};

/// Edge fluxes on a graph; `flux[k]` goes from `edges[k].0` to `edges[k].1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxGraph {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub flux: Vec<f64>,
}

impl FluxGraph {
    /// `fhat_{ab}` for either orientation of a stored edge.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.iter().zip(&self.flux).find_map(|(&(i, j), &f)| {
            if (i, j) == (a, b) {
                Some(f)
            } else if (j, i) == (a, b) {
                Some(-f)
            } else {
                None
            }
        })
    }

    /// `sum_{sigma'} fhat_{sigma sigma'}` for every node.
    pub fn node_sums(&self) -> Vec<f64> {
        node_sums(self.n_nodes, &self.edges, &self.flux)
    }

    /// `max_sigma |sum fhat - Psi_sigma|`.
    pub fn defect(&self, psi: &[f64]) -> f64 {
        self.node_sums()
            .iter()
            .zip(psi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn node_sums(n: usize, edges: &[(usize, usize)], flux: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for (&(a, b), &f) in edges.iter().zip(flux) {
        s[a] += f;
        s[b] -= f;
    }
    s
}

/// The three edges of a P1 element.
pub const P1_EDGES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Sub-triangulation edges of a P2 element. Local nodes are the vertices
/// 0, 1, 2 followed by the midpoints of edges 0-1, 1-2, 2-0.
pub const P2_EDGES: [(usize, usize); 9] = [
    (0, 3),
    (3, 1),
    (1, 4),
    (4, 2),
    (2, 5),
    (5, 0),
    (3, 4),
    (4, 5),
    (5, 3),
];

fn check_zero_sum(psi: &[f64]) -> Result<()> {
    let sum: f64 = psi.iter().sum();
    let scale: f64 = psi.iter().map(|x| x.abs()).sum();
    if !sum.is_finite() || sum.abs() > 1e-12 * scale {
        return Err(Error::invalid(format!("residuals must sum to zero, sum is {sum:e}")));
    }
    Ok(())
}

/// `fhat_{sigma sigma'} = (Psi_sigma - Psi_sigma') / 3` on the three edges.
pub fn recover_p1(psi: [f64; 3]) -> Result<FluxGraph> {
    check_zero_sum(&psi)?;
    Ok(FluxGraph {
        n_nodes: 3,
        edges: P1_EDGES.to_vec(),
        flux: P1_EDGES.iter().map(|&(a, b)| (psi[a] - psi[b]) / 3.0).collect(),
    })
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for &(i, j) in edges {
            let other = if i == a {
                j
            } else if j == a {
                i
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Minimum-norm fluxes `fhat_{ab} = p_a - p_b` with `L p = Psi`, `L` the
/// graph Laplacian. Solved as `(L + 11^T / n) p = Psi`.
pub fn recover_laplacian(psi: &[f64], edges: &[(usize, usize)]) -> Result<FluxGraph> {
    let n = psi.len();
    if n == 0 {
        return Err(Error::invalid("empty graph"));
    }
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
        return Err(Error::invalid(format!("bad edge ({a}, {b})")));
    }
    if !connected(n, edges) {
        return Err(Error::invalid("graph is not connected"));
    }
    check_zero_sum(psi)?;
    let mut l = DMatrix::<f64>::from_element(n, n, 1.0 / n as f64);
    for &(a, b) in edges {
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    let p = l
        .cholesky()
        .ok_or_else(|| Error::Numerical("graph Laplacian is not positive definite".into()))?
        .solve(&DVector::from_column_slice(psi));
    Ok(FluxGraph {
        n_nodes: n,
        edges: edges.to_vec(),
        flux: edges.iter().map(|&(a, b)| p[a] - p[b]).collect(),
    })
}

/// The closed-form P2 flux table as printed, one entry per sub-edge in the
/// printed orientation (1-based node labels).
pub fn p2_table(psi: &[f64; 6]) -> [((usize, usize), f64); 9] {
    let p = |i: usize| psi[i - 1];
    let (a, b, c, d) = (1.0 / 12.0, 1.0 / 36.0, 5.0 / 36.0, 7.0 / 36.0);
    [
        ((1, 4), a * (p(1) - p(4)) + b * (p(6) - p(5)) + d * (p(1) - p(2)) + c * (p(3) - p(1))),
        ((1, 6), a * (p(4) - p(1)) + c * (p(5) - p(1)) + d * (p(6) - p(1)) + b * (p(3) - p(2))),
        ((4, 6), 2.0 / 9.0 * (p(2) - p(6)) + 1.0 / 9.0 * (p(3) - p(5))),
        ((5, 4), 2.0 / 9.0 * (p(5) - p(2)) + 1.0 / 9.0 * (p(5) - p(1))),
        ((4, 2), d * (p(2) - p(3)) + c * (p(1) - p(3)) + a * (p(6) - p(3)) + b * (p(5) - p(4))),
        ((2, 5), b * (p(2) - p(1)) + c * (p(3) - p(5)) + d * (p(3) - p(5)) + a * (p(3) - p(6))),
        ((5, 3), b * (p(1) - p(6)) + c * (p(3) - p(5)) + d * (p(4) - p(5)) + a * (p(2) - p(5))),
        ((6, 3), b * (p(4) - p(3)) + c * (p(5) - p(1)) + d * (p(5) - p(6)) + a * (p(5) - p(2))),
        ((6, 5), 1.0 / 9.0 * (p(1) - p(3)) + 2.0 / 9.0 * (p(6) - p(4))),
    ]
}

/// Node-identity defects of the printed P2 table.
#[derive(Debug, Clone, PartialEq)]
pub struct P2TableReport {
    /// Per node `sum fhat - Psi` with the printed orientations.
    pub printed: [f64; 6],
    /// Best per-node defects over all 2^9 sign choices.
    pub best: [f64; 6],
    /// Sign flips (bit k for entry k) giving `best`.
    pub best_signs: u16,
}

/// Evaluates the printed P2 table on `psi` and reports how far it is from
/// satisfying `Psi_sigma = sum fhat_{sigma sigma'}`. Diagnostic only.
pub fn verify_p2_table(psi: &[f64; 6]) -> P2TableReport {
    let table = p2_table(psi);
    let defects = |signs: u16| {
        let mut s = [0.0; 6];
        for (k, &((a, b), f)) in table.iter().enumerate() {
            let f = if signs >> k & 1 == 1 { -f } else { f };
            s[a - 1] += f;
            s[b - 1] -= f;
        }
        let mut d = [0.0; 6];
        for i in 0..6 {
            d[i] = s[i] - psi[i];
        }
        d
    };
    let norm = |d: &[f64; 6]| d.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let printed = defects(0);
    let (best_signs, best) = (0..512u16)
        .map(|s| (s, defects(s)))
        .min_by(|x, y| norm(&x.1).total_cmp(&norm(&y.1)))
        .expect("non-empty range");
    P2TableReport {
        printed,
        best,
        best_signs,
    }
}

/// Scaled normal of the median-dual sub-edge of a P1 element leading from
/// the cell of vertex `i` into the cell of vertex `j`.
pub fn dual_normal(space: &Space, e: usize, i: usize, j: usize) -> Vec2 {
    let g = &space.geometry[e];
    let (gi, gj) = (g.grad_lambda[i], g.grad_lambda[j]);
    [g.area * (gj[0] - gi[0]) / 3.0, g.area * (gj[1] - gi[1]) / 3.0]
}

/// Vertex-centred finite volume scheme written as element residuals:
/// `Phi_i = sum_{j != i} (fhat(u_i, u_j; nu_ij) - f(u_i) . nu_ij)`.
/// `flux` takes two states and a scaled normal.
pub fn fv_as_rd(
    space: &Space,
    law: &dyn ConservationLaw,
    e: usize,
    u: &[f64],
    flux: &dyn Fn(f64, f64, Vec2) -> Result<f64>,
) -> Result<ElementResidual> {
    if space.degree() != 1 {
        return Err(Error::invalid("finite volume residuals need a P1 space"));
    }
    let c = space.local(e, u);
    let mut r = ElementResidual::zero(3);
    for i in 0..3 {
        for j in (0..3).filter(|&j| j != i) {
            let nu = dual_normal(space, e, i, j);
            r.phi[i] += flux(c[i], c[j], nu)? - dot(law.flux(c[i]), nu);
        }
    }
    r.flux_integral = interpolated_flux_integral(space, law, e, u);
    Ok(r)
}

/// `oint_{dK} f^h . n` with `f^h` the P1 interpolant of the flux, by the
/// face rule.
pub fn interpolated_flux_integral(space: &Space, law: &dyn ConservationLaw, e: usize, u: &[f64]) -> f64 {
    let c = space.local(e, u);
    let g = &space.geometry[e];
    let fv: Vec<Vec2> = (0..3).map(|i| law.flux(c[i])).collect();
    let mut s = 0.0;
    for i in 0..3 {
        for p in space.face_points(e, i) {
            let mut fh = [0.0; 2];
            for (k, f) in fv.iter().enumerate() {
                fh[0] += p.lambda[k] * f[0];
                fh[1] += p.lambda[k] * f[1];
            }
            s += p.weight * g.lengths[i] * dot(fh, g.normals[i]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_hand_example() {
        let g = recover_p1([2.0, -1.0, -1.0]).unwrap();
        assert_eq!(g.get(0, 1), Some(1.0));
        assert_eq!(g.get(0, 2), Some(1.0));
        assert_eq!(g.get(1, 2), Some(0.0));
        assert_eq!(g.get(1, 0), Some(-1.0));
        assert_eq!(g.node_sums(), vec![2.0, -1.0, -1.0]);
        assert!(recover_p1([1.0, 0.0, 0.0]).is_err());
        assert!(recover_p1([0.0; 3]).unwrap().flux.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn path_graph() {
        let g = recover_laplacian(&[1.0, 0.0, -1.0], &[(0, 1), (1, 2)]).unwrap();
        assert!((g.flux[0] - 1.0).abs() < 1e-14);
        assert!((g.flux[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disconnected_or_inconsistent() {
        assert!(recover_laplacian(&[1.0, -1.0, 0.0, 0.0], &[(0, 1), (2, 3)]).is_err());
        assert!(recover_laplacian(&[1.0, 1.0, 0.0], &[(0, 1), (1, 2)]).is_err());
        assert!(recover_laplacian(&[1.0, -1.0], &[(0, 3)]).is_err());
    }

    #[test]
    fn p2_table_zero_input() {
        let r = verify_p2_table(&[0.0; 6]);
        assert_eq!(r.printed, [0.0; 6]);
        assert_eq!(r.best, [0.0; 6]);
    }
}
