//! Ghost cells at network nodes.
//!
//! Every edge end is first brought into a local frame in which the line
//! starts at the node: for an edge ending at the node the mirror `x ↦ ℓ − x`
//! maps `(ξ⁺, ξ⁻)` to `(−ξ⁻, −ξ⁺)`. In that frame `η⁺` enters the line, `η⁻`
//! leaves it, the current flowing from the node into the line is `η⁺ + η⁻`
//! and the voltage is `c (η⁺ − η⁻)`.
//!
//! The outgoing family is extrapolated linearly from the two interior cells
//! nearest the node to the node itself. The coupling condition then fixes the
//! incoming values at the node, and the two incoming ghost cells continue the
//! line through that node value and the nearest interior cell.

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::network::{Network, NodeKind};
use crate::scalar::Scalar;
use crate::solver::EdgeGrid;

/// Minimum interior cells an edge needs for the two-point extrapolations at both ends.
pub const MIN_CELLS: usize = 4;

/// `M`, `S`, `U = M⁻¹ S M` and `M⁻¹` for a load node with lines of characteristic ratios `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices<T> {
    pub m: DenseMatrix<T>,
    pub s: DenseMatrix<T>,
    pub u: DenseMatrix<T>,
    pub m_inv: DenseMatrix<T>,
    /// `det M` from the LU factorization.
    pub det: T,
}

/// Closed form `det M = −(−1)^N (Π c_i)(Σ 1/c_i)`.
pub fn coupling_determinant<T: Scalar>(c: &[T]) -> T {
    let sign = if c.len().is_multiple_of(2) {
        -T::one()
    } else {
        T::one()
    };
    let prod = c.iter().fold(T::one(), |acc, &v| acc * v);
    let sum = c.iter().fold(T::zero(), |acc, &v| acc + v.recip());
    sign * prod * sum
}

pub fn build_coupling_matrices<T: Scalar>(c: &[T]) -> Result<CouplingMatrices<T>> {
    let n = c.len();
    assert!(n >= 1, "a node needs at least one line");
    let m = DenseMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            T::one()
        } else if j == i - 1 {
            c[i - 1]
        } else if j == i {
            -c[i]
        } else {
            T::zero()
        }
    });
    let mut sdiag = vec![T::one(); n];
    sdiag[0] = -T::one();
    let s = DenseMatrix::from_diagonal(&sdiag);
    let lu = m.lu()?;
    let m_inv = lu.inverse();
    let u = m_inv.mul_mat(&s.mul_mat(&m));
    Ok(CouplingMatrices {
        det: lu.determinant(),
        m,
        s,
        u,
        m_inv,
    })
}

/// Incoming node values for a load: `ξ⁺ = U ξ⁻ + M⁻¹ (i_n, 0, …, 0)ᵀ`.
pub fn load_ghost<T: Scalar>(mats: &CouplingMatrices<T>, outgoing: &[T], current: T) -> Vec<T> {
    let mut incoming = mats.u.mul_vec(outgoing);
    for (k, v) in incoming.iter_mut().enumerate() {
        *v += mats.m_inv[(k, 0)] * current;
    }
    incoming
}

/// Incoming node values for a generator: `ξ⁺_e = ξ⁻_e + v_n / c_e`.
pub fn generator_ghost<T: Scalar>(c: &[T], outgoing: &[T], voltage: T) -> Vec<T> {
    outgoing
        .iter()
        .zip(c)
        .map(|(&out, &ce)| out + voltage / ce)
        .collect()
}

/// Linear extrapolation one spacing past `boundary`, away from `interior`.
pub fn second_ghost<T: Scalar>(boundary: T, interior: T) -> T {
    T::two() * boundary - interior
}

/// Which end of an edge touches a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeEnd {
    pub edge: usize,
    /// True if the edge starts at the node (`x = 0`).
    pub at_start: bool,
}

/// Characteristic family, in the edge's own orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Plus,
    Minus,
}

impl EdgeEnd {
    /// Family entering the line from the node.
    pub fn incoming(&self) -> Family {
        if self.at_start {
            Family::Plus
        } else {
            Family::Minus
        }
    }

    pub fn outgoing(&self) -> Family {
        if self.at_start {
            Family::Minus
        } else {
            Family::Plus
        }
    }

    /// Orientation sign of the node on the edge: `−1` at the start, `+1` at the end.
    pub fn orientation(&self) -> i32 {
        if self.at_start {
            -1
        } else {
            1
        }
    }

    /// Sign converting edge-frame characteristics to the node-local frame.
    fn frame<T: Scalar>(&self) -> T {
        if self.at_start {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Local-frame `(η_1, η_2)` of a family: the two cells nearest the node.
    fn nearest<T: Scalar>(&self, grid: &EdgeGrid<T>, family: Family) -> (T, T) {
        let cells = match family {
            Family::Plus => &grid.plus,
            Family::Minus => &grid.minus,
        };
        let n = cells.len();
        let f = self.frame::<T>();
        if self.at_start {
            (cells[0], cells[1])
        } else {
            (f * cells[n - 1], f * cells[n - 2])
        }
    }
}

pub fn orient_edge_end<T: Scalar>(
    network: &Network<T>,
    edge: usize,
    node: usize,
) -> Result<EdgeEnd> {
    let sign = network.orientation_sign(edge, node)?;
    Ok(EdgeEnd {
        edge,
        at_start: sign < 0,
    })
}

/// Ghost values for one end of an edge, in the edge's own orientation.
///
/// `incoming[0]` is the ghost cell next to the boundary, `incoming[1]` the one beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EndGhosts<T> {
    pub incoming: [T; 2],
    pub outgoing: T,
}

/// Ghosts at both ends of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GhostCells<T> {
    pub start: EndGhosts<T>,
    pub end: EndGhosts<T>,
}

/// Characteristic values at the node itself, in the node-local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace<T> {
    pub incoming: Vec<T>,
    pub outgoing: Vec<T>,
}

impl<T: Scalar> NodeTrace<T> {
    /// Line voltages `c_e (η⁺ − η⁻)`.
    pub fn voltages(&self, c: &[T]) -> Vec<T> {
        self.incoming
            .iter()
            .zip(&self.outgoing)
            .zip(c)
            .map(|((&i, &o), &ce)| ce * (i - o))
            .collect()
    }

    /// Net current leaving the node, `Σ (η⁺ + η⁻)`.
    pub fn net_current(&self) -> T {
        self.incoming
            .iter()
            .zip(&self.outgoing)
            .fold(T::zero(), |acc, (&i, &o)| acc + i + o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeRule<T> {
    Generator,
    Load(CouplingMatrices<T>),
}

/// Precomputed coupling data for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCoupling<T> {
    pub node: usize,
    pub ends: Vec<EdgeEnd>,
    /// Characteristic ratio of each incident line, in `ends` order.
    pub c: Vec<T>,
    pub rule: NodeRule<T>,
}

impl<T: Scalar> NodeCoupling<T> {
    pub fn new(network: &Network<T>, node: usize) -> Result<Self> {
        let ends = network
            .incident_edges(node)
            .into_iter()
            .map(|e| orient_edge_end(network, e, node))
            .collect::<Result<Vec<_>>>()?;
        let c: Vec<T> = ends
            .iter()
            .map(|end| network.edges()[end.edge].params.derived().c)
            .collect();
        let rule = match network.nodes()[node].kind {
            NodeKind::Generator(_) => NodeRule::Generator,
            NodeKind::Load(_) => NodeRule::Load(build_coupling_matrices(&c)?),
        };
        Ok(Self {
            node,
            ends,
            c,
            rule,
        })
    }

    /// Outgoing values extrapolated to the node, local frame.
    pub fn outgoing_trace(&self, grids: &[EdgeGrid<T>]) -> Vec<T> {
        let three_halves = T::lit(1.5);
        self.ends
            .iter()
            .map(|end| {
                let (u1, u2) = end.nearest(&grids[end.edge], end.outgoing());
                three_halves * u1 - T::half() * u2
            })
            .collect()
    }

    /// Node values satisfying the coupling condition for boundary value `value`
    /// (voltage at a generator, net current at a load).
    pub fn trace(&self, grids: &[EdgeGrid<T>], value: T) -> NodeTrace<T> {
        let outgoing = self.outgoing_trace(grids);
        let incoming = match &self.rule {
            NodeRule::Generator => generator_ghost(&self.c, &outgoing, value),
            NodeRule::Load(mats) => load_ghost(mats, &outgoing, value),
        };
        NodeTrace { incoming, outgoing }
    }

    /// Writes the ghost cells of every incident edge end into `ghosts` (indexed by edge).
    pub fn assemble(
        &self,
        grids: &[EdgeGrid<T>],
        value: T,
        ghosts: &mut [GhostCells<T>],
    ) -> NodeTrace<T> {
        let trace = self.trace(grids, value);
        for (k, end) in self.ends.iter().enumerate() {
            let grid = &grids[end.edge];
            let (in1, _) = end.nearest(grid, end.incoming());
            let (out1, out2) = end.nearest(grid, end.outgoing());
            let g0 = second_ghost(trace.incoming[k], in1);
            let g1 = second_ghost(g0, in1);
            let out_ghost = second_ghost(out1, out2);

            let f = end.frame::<T>();
            let slot = EndGhosts {
                incoming: [f * g0, f * g1],
                outgoing: f * out_ghost,
            };
            if end.at_start {
                ghosts[end.edge].start = slot;
            } else {
                ghosts[end.edge].end = slot;
            }
        }
        trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, LineParams, Node};
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex;
    use proptest::prelude::*;

    fn spectral_norm(a: &DenseMatrix<f64>) -> f64 {
        let m = DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)]);
        m.singular_values().max()
    }

    #[test]
    fn scalar_case_reflects() {
        let mats = build_coupling_matrices(&[2.5]).unwrap();
        assert_eq!(mats.m[(0, 0)], 1.0);
        assert_eq!(mats.s[(0, 0)], -1.0);
        assert_eq!(mats.u[(0, 0)], -1.0);
        // zero net current: pure reflection
        assert_eq!(load_ghost(&mats, &[0.7], 0.0), vec![-0.7]);
    }

    #[test]
    fn two_line_matrices() {
        let mats = build_coupling_matrices(&[1.0, 2.0]).unwrap();
        assert_eq!(mats.m.row(0), &[1.0, 1.0]);
        assert_eq!(mats.m.row(1), &[1.0, -2.0]);
        assert!((mats.det + 3.0f64).abs() < 1e-14);
        assert!((coupling_determinant(&[1.0f64, 2.0]) + 3.0).abs() < 1e-15);
    }

    #[test]
    fn equal_ratios_give_unit_spectral_norm() {
        for n in 1..=8 {
            let c = vec![1.7; n];
            let mats = build_coupling_matrices(&c).unwrap();
            assert!((spectral_norm(&mats.u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_ratios_exceed_unit_spectral_norm() {
        // U is only an isometry in the c-weighted norm; see the weighted property below.
        let mats = build_coupling_matrices(&[1.0, 2.0]).unwrap();
        assert!(spectral_norm(&mats.u) > 1.3);
    }

    #[test]
    fn homogeneous_load_is_zero() {
        let mats = build_coupling_matrices(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(load_ghost(&mats, &[0.0; 3], 0.0), vec![0.0; 3]);
    }

    #[test]
    fn three_line_load_matches_direct_solve() {
        let c = [6f64.sqrt(), 6f64.sqrt(), 3.0];
        let mats = build_coupling_matrices(&c).unwrap();
        let out = [0.3, -1.2, 0.8];
        let inc = load_ghost(&mats, &out, 10.0);

        // Independent route: unknowns ξ⁺, equations Σξ⁺ = 10 − Σξ⁻ and equal voltages.
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 1.0, c[0], -c[1], 0.0, c[0], 0.0, -c[2]]);
        let b = DVector::from_row_slice(&[
            10.0 - out.iter().sum::<f64>(),
            c[0] * out[0] - c[1] * out[1],
            c[0] * out[0] - c[2] * out[2],
        ]);
        let x = a.lu().solve(&b).unwrap();
        for k in 0..3 {
            assert!((x[k] - inc[k]).abs() < 1e-12);
        }
        let trace = NodeTrace {
            incoming: inc,
            outgoing: out.to_vec(),
        };
        assert!((trace.net_current() - 10.0).abs() < 1e-12);
        let v = trace.voltages(&c);
        assert!((v[0] - v[1]).abs() < 1e-12 && (v[0] - v[2]).abs() < 1e-12);
    }

    #[test]
    fn generator_rule() {
        assert_eq!(generator_ghost(&[2.0], &[0.4], 0.0), vec![0.4]);
        let inc = generator_ghost(&[2.0], &[0.4], 2.0);
        assert!((inc[0] - 0.4 - 1.0f64).abs() < 1e-15);
        let trace = NodeTrace {
            incoming: generator_ghost(&[2.0, 3.0], &[0.1, -0.2], 1.5),
            outgoing: vec![0.1, -0.2],
        };
        for v in trace.voltages(&[2.0, 3.0]) {
            assert!((v - 1.5f64).abs() < 1e-15);
        }
    }

    #[test]
    fn second_ghost_extrapolates_linearly() {
        assert_eq!(second_ghost(3.0, 1.0), 5.0);
        assert_eq!(second_ghost(2.0, 2.0), 2.0);
        // points of the line 1 + 2x at x = 1 (boundary) and x = 2 (interior)
        assert_eq!(second_ghost(3.0, 5.0), 1.0);
    }

    fn spokes(reversed: bool) -> Network<f64> {
        let lines = [
            (2.0, 6.0, 2.0, 1.0),
            (3.0, 6.0, 1.0, 1.0),
            (1.0, 9.0, 2.0, 1.0),
        ];
        let edges = lines
            .iter()
            .enumerate()
            .map(|(k, &(r, l, g, c))| {
                let other = format!("N{}", k + 2);
                let p = LineParams::new(r, l, g, c, 2.0);
                if reversed && k == 1 {
                    Edge::new(other, "N1", p)
                } else {
                    Edge::new("N1", other, p)
                }
            })
            .collect();
        Network::new(
            vec![
                Node::new("N1", NodeKind::Load(Complex::new(10.0, 3.0))),
                Node::new("N2", NodeKind::Generator(Complex::new(4.0, 4.0))),
                Node::new("N3", NodeKind::Generator(Complex::new(2.0, 5.0))),
                Node::new("N4", NodeKind::Generator(Complex::new(3.0, 6.0))),
            ],
            edges,
            4.0,
        )
        .unwrap()
    }

    fn grids_for(net: &Network<f64>) -> Vec<EdgeGrid<f64>> {
        net.edges()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let mut g = EdgeGrid::new(e.params.length, 8).unwrap();
                for j in 0..8 {
                    g.plus[j] = (0.3 * j as f64 + k as f64).sin();
                    g.minus[j] = (0.7 * j as f64 - k as f64).cos();
                }
                g
            })
            .collect()
    }

    #[test]
    fn orientation_descriptor() {
        let net = spokes(true);
        let start = orient_edge_end(&net, 0, 0).unwrap();
        assert!(start.at_start);
        assert_eq!(start.incoming(), Family::Plus);
        assert_eq!(start.orientation(), -1);
        let end = orient_edge_end(&net, 1, 0).unwrap();
        assert!(!end.at_start);
        assert_eq!(end.incoming(), Family::Minus);
        assert_eq!(end.orientation(), 1);
        assert!(orient_edge_end(&net, 0, 2).is_err());
    }

    #[test]
    fn load_assembly_satisfies_coupling() {
        let net = spokes(true);
        let grids = grids_for(&net);
        let nc = NodeCoupling::new(&net, 0).unwrap();
        let mut ghosts = vec![GhostCells::default(); 3];
        let trace = nc.assemble(&grids, 10.0, &mut ghosts);
        assert!((trace.net_current() - 10.0).abs() < 1e-12);
        let v = trace.voltages(&nc.c);
        for w in &v {
            assert!((w - v[0]).abs() < 1e-12 * v[0].abs().max(1.0));
        }
        // Reversed edge 1: its incoming ghosts sit at the end, in the minus family.
        let n = grids[1].n_cells();
        let in1 = -grids[1].minus[n - 1];
        let g0 = -ghosts[1].end.incoming[0];
        assert!((g0 - (2.0 * trace.incoming[1] - in1)).abs() < 1e-14);
    }

    #[test]
    fn generator_assembly_reproduces_voltage() {
        let net = spokes(false);
        let grids = grids_for(&net);
        for node in 1..4 {
            let nc = NodeCoupling::new(&net, node).unwrap();
            let mut ghosts = vec![GhostCells::default(); 3];
            let v_now = net.nodes()[node].kind.phasor().re;
            let trace = nc.assemble(&grids, v_now, &mut ghosts);
            for v in trace.voltages(&nc.c) {
                assert!((v - v_now).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flipping_an_edge_mirrors_its_ghosts() {
        let a = spokes(false);
        let b = spokes(true);
        let ga = grids_for(&a);
        let mut gb = ga.clone();
        gb[1].plus = ga[1].minus.iter().rev().map(|v| -v).collect();
        gb[1].minus = ga[1].plus.iter().rev().map(|v| -v).collect();
        let mut ghosts_a = vec![GhostCells::default(); 3];
        let mut ghosts_b = vec![GhostCells::default(); 3];
        NodeCoupling::new(&a, 0)
            .unwrap()
            .assemble(&ga, 10.0, &mut ghosts_a);
        NodeCoupling::new(&b, 0)
            .unwrap()
            .assemble(&gb, 10.0, &mut ghosts_b);
        let sa = ghosts_a[1].start;
        let eb = ghosts_b[1].end;
        assert_eq!(sa.incoming[0], -eb.incoming[0]);
        assert_eq!(sa.incoming[1], -eb.incoming[1]);
        assert_eq!(sa.outgoing, -eb.outgoing);
    }

    fn ratio() -> impl Strategy<Value = f64> {
        (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #[test]
        fn determinant_matches_closed_form(c in prop::collection::vec(ratio(), 1..=16)) {
            let mats = build_coupling_matrices(&c).unwrap();
            let closed = coupling_determinant(&c);
            prop_assert!(((mats.det - closed) / closed).abs() < 1e-10);
        }

        #[test]
        fn involution_and_weighted_isometry(
            c in prop::collection::vec(ratio(), 1..=8),
            seed in prop::collection::vec(-1.0f64..1.0, 8),
        ) {
            let n = c.len();
            let mats = build_coupling_matrices(&c).unwrap();
            // U² = I
            let u2 = mats.u.mul_mat(&mats.u);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((u2[(i, j)] - want).abs() < 1e-9);
                }
            }
            // zero net current: Σ c_e (η⁺)² = Σ c_e (η⁻)², the node injects no energy
            let out = &seed[..n];
            let inc = load_ghost(&mats, out, 0.0);
            let e_in: f64 = inc.iter().zip(&c).map(|(v, w)| w * v * v).sum();
            let e_out: f64 = out.iter().zip(&c).map(|(v, w)| w * v * v).sum();
            prop_assert!((e_in - e_out).abs() < 1e-9 * e_out.max(1e-3));
            // continuity of voltage after assembly
            let trace = NodeTrace { incoming: inc, outgoing: out.to_vec() };
            let v = trace.voltages(&c);
            let scale = v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            for w in &v {
                prop_assert!((w - v[0]).abs() < 1e-12 * scale * 10.0);
            }
            prop_assert!(trace.net_current().abs() < 1e-12 * scale * 10.0);
        }
    }
}
