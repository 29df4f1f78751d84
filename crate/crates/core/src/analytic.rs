//! Exact time-periodic solution of the network, one Fourier mode at a time.
//!
//! For a mode `m` each line reduces to a complex linear ODE whose solution is
//! fixed by the two end voltages. Eliminating the currents gives the nodal
//! system `I = Y V` with the hyperbolic admittance matrix `Y`; generator rows
//! are moved to the right-hand side and the remaining load block is solved
//! by LU. Line profiles, characteristic values and powers follow from the
//! nodal voltages.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::network::{LineParams, Network, NodeKind};
use crate::scalar::Scalar;

/// Characteristic admittance and propagation constant of one line for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeLineConstants<T> {
    /// `Y⁰_m = √(G + jmωC) / √(R + jmωL)`.
    pub char_admittance: Complex<T>,
    /// `γ_m = √(R + jmωL) · √(G + jmωC)`.
    pub propagation: Complex<T>,
    pub mode: i32,
}

/// Principal-branch constants. `γ` is the product of the two roots, not the root of the product.
pub fn mode_constants<T: Scalar>(params: &LineParams<T>, m: i32, omega: T) -> ModeLineConstants<T> {
    let mw = T::lit(f64::from(m)) * omega;
    let series = Complex::new(params.r, mw * params.l).sqrt();
    let shunt = Complex::new(params.g, mw * params.c).sqrt();
    ModeLineConstants {
        char_admittance: shunt / series,
        propagation: series * shunt,
        mode: m,
    }
}

/// Beyond this real part, `sinh` and `cosh` of the propagation argument are
/// evaluated through decaying exponentials so long lossy lines do not overflow.
const EXP_FORM_THRESHOLD: f64 = 16.0;

/// `sinh(a) / sinh(b)` for `Re a, Re b ≥ 0`.
pub(crate) fn sinh_ratio<T: Scalar>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    if b.re < T::lit(EXP_FORM_THRESHOLD) {
        return a.sinh() / b.sinh();
    }
    let one = Complex::new(T::one(), T::zero());
    let two = T::two();
    (a - b).exp() * (one - (-a * two).exp()) / (one - (-b * two).exp())
}

/// `cosh(a) / sinh(b)` for `Re a, Re b ≥ 0`.
pub(crate) fn cosh_ratio<T: Scalar>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    if b.re < T::lit(EXP_FORM_THRESHOLD) {
        return a.cosh() / b.sinh();
    }
    let one = Complex::new(T::one(), T::zero());
    let two = T::two();
    (a - b).exp() * (one + (-a * two).exp()) / (one - (-b * two).exp())
}

/// Complex voltage and current at `x` on a line with end voltages `v0` (at 0) and `vl` (at `len`).
pub fn line_profile<T: Scalar>(
    consts: &ModeLineConstants<T>,
    v0: Complex<T>,
    vl: Complex<T>,
    len: T,
    x: T,
) -> (Complex<T>, Complex<T>) {
    let g = consts.propagation;
    let gl = g * len;
    let gx = g * x;
    let grest = g * (len - x);
    let v = vl * sinh_ratio(gx, gl) + v0 * sinh_ratio(grest, gl);
    let i = -consts.char_admittance * (vl * cosh_ratio(gx, gl) - v0 * cosh_ratio(grest, gl));
    (v, i)
}

/// Nodal admittance matrix for one mode; rows and columns follow network node order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix<T> {
    pub mode: i32,
    pub matrix: DenseMatrix<Complex<T>>,
}

impl<T: Scalar> AdmittanceMatrix<T> {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[(i, j)]
    }

    /// Net currents leaving each node, `Y V`.
    pub fn currents(&self, voltages: &[Complex<T>]) -> Vec<Complex<T>> {
        self.matrix.mul_vec(voltages)
    }
}

pub fn assemble_admittance<T: Scalar>(network: &Network<T>, m: i32) -> Result<AdmittanceMatrix<T>> {
    let n = network.nodes().len();
    let mut y = DenseMatrix::<Complex<T>>::zeros(n, n);
    let mut connected = vec![false; n * n];
    for (k, edge) in network.edges().iter().enumerate() {
        let (s, t) = network.endpoints(k);
        if connected[s * n + t] {
            return Err(Error::ParallelEdges(edge.from.clone(), edge.to.clone()));
        }
        connected[s * n + t] = true;
        connected[t * n + s] = true;

        let c = mode_constants(&edge.params, m, network.omega());
        let gl = c.propagation * edge.params.length;
        let zero = Complex::zero();
        let diag = c.char_admittance * cosh_ratio(gl, gl);
        let off = -c.char_admittance * cosh_ratio(zero, gl);
        y[(s, s)] += diag;
        y[(t, t)] += diag;
        y[(s, t)] += off;
        y[(t, s)] += off;
    }
    Ok(AdmittanceMatrix { mode: m, matrix: y })
}

/// Boundary phasor a node prescribes for mode `m` of a sinusoidal input.
///
/// Modes `±1` carry the phasor and its conjugate; all other modes are zero.
pub fn mode_boundary_value<T: Scalar>(kind: &NodeKind<T>, m: i32) -> Complex<T> {
    match m {
        1 => kind.phasor(),
        -1 => kind.phasor().conj(),
        _ => Complex::zero(),
    }
}

/// Per-edge data the reference needs for evaluation on a line.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePhasor<T> {
    pub start: usize,
    pub end: usize,
    pub params: LineParams<T>,
    pub consts: ModeLineConstants<T>,
}

/// Nodal voltages of one mode plus everything needed to evaluate line profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorSolution<T> {
    pub mode: i32,
    pub omega: T,
    pub node_voltages: Vec<Complex<T>>,
    /// Net currents leaving each node, `Y V`.
    pub node_currents: Vec<Complex<T>>,
    pub edges: Vec<EdgePhasor<T>>,
    /// Relative residual of the coupling conditions at the solution.
    pub residual: T,
}

impl<T: Scalar> PhasorSolution<T> {
    /// `(V⁰, V^ℓ)`: node voltages at the start and end of `edge`.
    pub fn edge_boundary(&self, edge: usize) -> (Complex<T>, Complex<T>) {
        let e = &self.edges[edge];
        (self.node_voltages[e.start], self.node_voltages[e.end])
    }

    /// Complex voltage and current at `x` along `edge`.
    pub fn profile(&self, edge: usize, x: T) -> (Complex<T>, Complex<T>) {
        let (v0, vl) = self.edge_boundary(edge);
        let e = &self.edges[edge];
        line_profile(&e.consts, v0, vl, e.params.length, x)
    }
}

/// Solves the coupling conditions for mode `m`: generator voltages fixed, load net currents prescribed.
pub fn solve_node_phasors<T: Scalar>(network: &Network<T>, m: i32) -> Result<PhasorSolution<T>> {
    let y = assemble_admittance(network, m)?;
    let n = y.dim();
    let nodes = network.nodes();

    let mut fixed = vec![Complex::<T>::zero(); n];
    let mut loads = Vec::new();
    for (k, node) in nodes.iter().enumerate() {
        match node.kind {
            NodeKind::Generator(_) => fixed[k] = mode_boundary_value(&node.kind, m),
            NodeKind::Load(_) => loads.push(k),
        }
    }

    let mut voltages = fixed.clone();
    if !loads.is_empty() {
        // Shift the known generator voltages to the right-hand side and keep only load rows.
        let shifted = y.currents(&fixed);
        let rhs: Vec<_> = loads
            .iter()
            .map(|&l| mode_boundary_value(&nodes[l].kind, m) - shifted[l])
            .collect();
        let reduced = y.matrix.select(&loads, &loads);
        let solved = reduced.lu()?.solve(&rhs);
        for (&l, v) in loads.iter().zip(solved) {
            voltages[l] = v;
        }
    }

    let currents = y.currents(&voltages);
    let mut err = T::zero();
    let mut scale = T::zero();
    for (k, node) in nodes.iter().enumerate() {
        let target = mode_boundary_value(&node.kind, m);
        let got = if node.kind.is_generator() {
            voltages[k]
        } else {
            currents[k]
        };
        err = err.max((got - target).norm());
        scale = scale.max(target.norm());
    }
    let residual = if scale > T::zero() { err / scale } else { err };

    let edges = network
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (start, end) = network.endpoints(k);
            EdgePhasor {
                start,
                end,
                params: e.params,
                consts: mode_constants(&e.params, m, network.omega()),
            }
        })
        .collect();

    Ok(PhasorSolution {
        mode: m,
        omega: network.omega(),
        node_voltages: voltages,
        node_currents: currents,
        edges,
        residual,
    })
}

/// `ξ± = (i ± √(C/L) v) / 2`.
pub fn to_characteristic<T: Scalar>(v: T, i: T, params: &LineParams<T>) -> (T, T) {
    let sv = params.voltage_scale() * v;
    (T::half() * (i + sv), T::half() * (i - sv))
}

/// Inverse of [`to_characteristic`]: `√(C/L) v = ξ⁺ − ξ⁻`, `i = ξ⁺ + ξ⁻`.
pub fn from_characteristic<T: Scalar>(xi_plus: T, xi_minus: T, params: &LineParams<T>) -> (T, T) {
    (
        (xi_plus - xi_minus) / params.voltage_scale(),
        xi_plus + xi_minus,
    )
}

/// Real voltage and current `Re(X(x) e^{jmωt})` on `edge` at position `x` and time `t`.
pub fn evaluate_time_domain<T: Scalar>(sol: &PhasorSolution<T>, edge: usize, x: T, t: T) -> (T, T) {
    let (v, i) = sol.profile(edge, x);
    let rot = Complex::from_polar(T::one(), T::lit(f64::from(sol.mode)) * sol.omega * t);
    ((v * rot).re, (i * rot).re)
}

/// Characteristic values of the reference on `edge` at `(x, t)`.
pub fn reference_characteristic<T: Scalar>(
    sol: &PhasorSolution<T>,
    edge: usize,
    x: T,
    t: T,
) -> (T, T) {
    let (v, i) = evaluate_time_domain(sol, edge, x, t);
    to_characteristic(v, i, &sol.edges[edge].params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerQuantities<T> {
    /// Complex apparent power per node.
    pub s: Vec<Complex<T>>,
    pub p: Vec<T>,
    pub q: Vec<T>,
}

/// `S = diag(V) Y* V*`, `P = Re S`, `Q = Im S`.
pub fn apparent_power<T: Scalar>(
    sol: &PhasorSolution<T>,
    y: &AdmittanceMatrix<T>,
) -> PowerQuantities<T> {
    let v = &sol.node_voltages;
    let s: Vec<Complex<T>> = (0..y.dim())
        .map(|r| {
            let conj_current = (0..y.dim()).fold(Complex::zero(), |acc: Complex<T>, k| {
                acc + y.get(r, k).conj() * v[k].conj()
            });
            v[r] * conj_current
        })
        .collect();
    let p = s.iter().map(|z| z.re).collect();
    let q = s.iter().map(|z| z.im).collect();
    PowerQuantities { s, p, q }
}

/// Componentwise powerflow sums in polar form with `Y = G + jB`.
pub fn powerflow_equations<T: Scalar>(
    voltages: &[Complex<T>],
    y: &AdmittanceMatrix<T>,
) -> (Vec<T>, Vec<T>) {
    let n = y.dim();
    let polar: Vec<(T, T)> = voltages.iter().map(|v| v.to_polar()).collect();
    let mut p = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    for s in 0..n {
        let (ms, phs) = polar[s];
        for (i, &(mi, phi)) in polar.iter().enumerate() {
            let yy = y.get(s, i);
            let (sin, cos) = (phs - phi).sin_cos();
            p[s] += ms * mi * (yy.re * cos + yy.im * sin);
            q[s] += ms * mi * (yy.re * sin - yy.im * cos);
        }
    }
    (p, q)
}

/// Largest `|X|` over a slice, used to scale residual checks.
pub fn max_norm<T: Scalar>(values: &[Complex<T>]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc.max(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Node};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn single_line() -> Network<f64> {
        Network::new(
            vec![
                Node::new("start", NodeKind::Generator(c(5.0, 3.0))),
                Node::new("end", NodeKind::Load(c(2.0, 5.0))),
            ],
            vec![Edge::new(
                "start",
                "end",
                LineParams::new(4.0, 6.0, 2.0, 1.0, 1.0),
            )],
            4.0,
        )
        .unwrap()
    }

    fn spokes() -> Network<f64> {
        let lines = [
            (2.0, 6.0, 2.0, 1.0),
            (3.0, 6.0, 1.0, 1.0),
            (1.0, 9.0, 2.0, 1.0),
        ];
        Network::new(
            vec![
                Node::new("N1", NodeKind::Load(c(10.0, 3.0))),
                Node::new("N2", NodeKind::Generator(c(4.0, 4.0))),
                Node::new("N3", NodeKind::Generator(c(2.0, 5.0))),
                Node::new("N4", NodeKind::Generator(c(3.0, 6.0))),
            ],
            lines
                .iter()
                .enumerate()
                .map(|(k, &(r, l, g, cap))| {
                    Edge::new(
                        "N1",
                        format!("N{}", k + 2),
                        LineParams::new(r, l, g, cap, 2.0),
                    )
                })
                .collect(),
            4.0,
        )
        .unwrap()
    }

    #[test]
    fn dc_mode_constants_are_real() {
        let p = LineParams::new(4.0, 6.0, 2.0, 1.0, 1.0);
        let k = mode_constants(&p, 0, 4.0);
        assert!((k.char_admittance - c((2.0f64 / 4.0).sqrt(), 0.0)).norm() < 1e-15);
        assert!((k.propagation - c(8f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn propagation_constant_matches_product_of_roots() {
        let p = LineParams::new(4.0, 6.0, 2.0, 1.0, 1.0);
        let k = mode_constants(&p, 1, 4.0);
        let expected = c(4.0, 24.0).sqrt() * c(2.0, 4.0).sqrt();
        assert!((k.propagation - expected).norm() < 1e-14);
        let sq = k.propagation * k.propagation;
        assert!((sq - c(4.0, 24.0) * c(2.0, 4.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_mode_is_conjugate() {
        let p = LineParams::new(4.0, 6.0, 2.0, 1.0, 1.0);
        let plus = mode_constants(&p, 1, 4.0);
        let minus = mode_constants(&p, -1, 4.0);
        assert!((plus.char_admittance.conj() - minus.char_admittance).norm() < 1e-15);
        assert!((plus.propagation.conj() - minus.propagation).norm() < 1e-15);
    }

    #[test]
    fn profile_interpolates_end_voltages() {
        let p = LineParams::new(4.0, 6.0, 2.0, 1.0, 1.5);
        let k = mode_constants(&p, 1, 4.0);
        let (v0, vl) = (c(1.0, -2.0), c(0.5, 3.0));
        assert!((line_profile(&k, v0, vl, 1.5, 0.0).0 - v0).norm() < 1e-14);
        assert!((line_profile(&k, v0, vl, 1.5, 1.5).0 - vl).norm() < 1e-14);
        let (v, i) = line_profile(&k, C::zero(), C::zero(), 1.5, 0.7);
        assert_eq!((v, i), (C::zero(), C::zero()));
    }

    fn ode_residual(h: f64) -> f64 {
        let p = LineParams::new(4.0, 6.0, 2.0, 1.0, 1.0);
        let (m, w) = (1, 4.0);
        let k = mode_constants(&p, m, w);
        let (v0, vl) = (c(5.0, 3.0), c(-1.0, 2.0));
        let z = c(p.r, w * p.l);
        let y = c(p.g, w * p.c);
        let mut worst = 0.0f64;
        for x in [0.2, 0.5, 0.8] {
            let (vp, ip) = line_profile(&k, v0, vl, 1.0, x + h);
            let (vm, im) = line_profile(&k, v0, vl, 1.0, x - h);
            let (v, i) = line_profile(&k, v0, vl, 1.0, x);
            let dv = (vp - vm) / (2.0 * h);
            let di = (ip - im) / (2.0 * h);
            worst = worst.max((dv + z * i).norm() / v.norm().max(1.0));
            worst = worst.max((di + y * v).norm() / v.norm().max(1.0));
        }
        worst
    }

    #[test]
    fn profile_satisfies_line_odes() {
        assert!(ode_residual(1e-5) < 1e-6);
        // Central differences: halving the probe step quarters the residual.
        let ratio = ode_residual(1e-2) / ode_residual(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn single_line_admittance() {
        let net = single_line();
        let y = assemble_admittance(&net, 1).unwrap();
        let k = mode_constants(&net.edges()[0].params, 1, 4.0);
        let diag = k.char_admittance / k.propagation.tanh();
        let off = -k.char_admittance / k.propagation.sinh();
        let close = |a: C, b: C| (a - b).norm() <= 1e-14 * b.norm();
        assert!(close(y.get(0, 0), diag) && close(y.get(1, 1), diag));
        assert!(close(y.get(0, 1), off) && close(y.get(1, 0), off));
        let row_sum = y.get(0, 0) + y.get(0, 1);
        assert!(row_sum.norm() > 1e-3);
    }

    #[test]
    fn spoke_admittance_is_sparse_and_symmetric() {
        let y = assemble_admittance(&spokes(), 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(y.get(i, j), y.get(j, i));
                if i != j && i != 0 && j != 0 {
                    assert_eq!(y.get(i, j), C::zero());
                }
            }
        }
        assert_ne!(y.get(0, 3), C::zero());
    }

    #[test]
    fn exponential_form_matches_direct_ratios() {
        for &(a, b) in &[
            (C::new(3.0, 1.0), C::new(17.0, -2.0)),
            (C::new(0.0, 0.0), C::new(18.0, 5.0)),
            (C::new(17.5, 0.3), C::new(17.5, 0.3)),
        ] {
            let direct_s = a.sinh() / b.sinh();
            let direct_c = a.cosh() / b.sinh();
            assert!((sinh_ratio(a, b) - direct_s).norm() <= 1e-13 * direct_s.norm().max(1e-300));
            assert!((cosh_ratio(a, b) - direct_c).norm() <= 1e-13 * direct_c.norm());
        }
    }

    #[test]
    fn long_lossy_line_decouples() {
        let p = LineParams::new(400.0, 1.0, 400.0, 1.0, 1.0);
        let net = Network::new(
            vec![
                Node::new("a", NodeKind::Generator(c(1.0, 0.0))),
                Node::new("b", NodeKind::Load(c(0.0, 0.0))),
            ],
            vec![Edge::new("a", "b", p)],
            1.0,
        )
        .unwrap();
        let k = mode_constants(&p, 1, 1.0);
        assert!(k.propagation.re > 30.0);
        let y = assemble_admittance(&net, 1).unwrap();
        assert!(y.get(0, 1).norm() < 1e-12);
        assert!((y.get(0, 0) - k.char_admittance).norm() < 1e-12);
    }

    #[test]
    fn parallel_edges_are_rejected() {
        let p = LineParams::new(1.0, 1.0, 1.0, 1.0, 1.0);
        let net = Network::new(
            vec![
                Node::new("a", NodeKind::Generator(c(1.0, 0.0))),
                Node::new("b", NodeKind::Load(c(0.0, 0.0))),
            ],
            vec![Edge::new("a", "b", p), Edge::new("b", "a", p)],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            assemble_admittance(&net, 1),
            Err(Error::ParallelEdges(..))
        ));
    }

    #[test]
    fn all_generator_network_keeps_prescribed_voltages() {
        let p = LineParams::new(1.0, 1.0, 1.0, 1.0, 1.0);
        let net = Network::new(
            vec![
                Node::new("a", NodeKind::Generator(c(1.0, 2.0))),
                Node::new("b", NodeKind::Generator(c(-3.0, 0.5))),
            ],
            vec![Edge::new("a", "b", p)],
            2.0,
        )
        .unwrap();
        let sol = solve_node_phasors(&net, 1).unwrap();
        assert_eq!(sol.node_voltages, vec![c(1.0, 2.0), c(-3.0, 0.5)]);
    }

    /// Net current leaving node `r`, summed over its lines without the matrix.
    fn kirchhoff_current(net: &Network<f64>, v: &[C], r: usize) -> C {
        let mut total = C::zero();
        for (k, e) in net.edges().iter().enumerate() {
            let (s, t) = net.endpoints(k);
            let other = if s == r {
                t
            } else if t == r {
                s
            } else {
                continue;
            };
            let kk = mode_constants(&e.params, 1, net.omega());
            let gl = kk.propagation * e.params.length;
            total += -(kk.char_admittance / gl.sinh()) * (-v[r] * gl.cosh() + v[other]);
        }
        total
    }

    #[test]
    fn single_line_solve_satisfies_coupling() {
        let net = single_line();
        let sol = solve_node_phasors(&net, 1).unwrap();
        assert_eq!(sol.node_voltages[0], c(5.0, 3.0));
        assert!(sol.residual < 1e-12);
        let i_end = kirchhoff_current(&net, &sol.node_voltages, 1);
        assert!((i_end - c(2.0, 5.0)).norm() < 1e-12 * c(2.0, 5.0).norm());
        // Current into the line at its end is the negative of the line current there.
        let (_, i_at_end) = sol.profile(0, 1.0);
        assert!((-i_at_end - c(2.0, 5.0)).norm() < 1e-12 * 10.0);
    }

    #[test]
    fn spoke_solve_satisfies_coupling() {
        let net = spokes();
        let sol = solve_node_phasors(&net, 1).unwrap();
        assert!(sol.residual < 1e-12);
        let i1 = kirchhoff_current(&net, &sol.node_voltages, 0);
        assert!((i1 - c(10.0, 3.0)).norm() < 1e-12 * 10.0);
        // Line currents at N1 add up to the prescribed net current.
        let sum: C = (0..3).map(|e| sol.profile(e, 0.0).1).sum();
        assert!((sum - c(10.0, 3.0)).norm() < 1e-11);
        for e in 0..3 {
            let (v0, _) = sol.profile(e, 0.0);
            assert!((v0 - sol.node_voltages[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_mode_reconstruction_is_real() {
        let net = spokes();
        let plus = solve_node_phasors(&net, 1).unwrap();
        let minus = solve_node_phasors(&net, -1).unwrap();
        for e in 0..3 {
            for &x in &[0.0, 0.3, 1.1, 2.0] {
                for &t in &[0.0, 0.4, 1.3] {
                    let rot = C::from_polar(1.0, 4.0 * t);
                    let (vp, ip) = plus.profile(e, x);
                    let (vm, im) = minus.profile(e, x);
                    let v = vp * rot + vm * rot.conj();
                    let i = ip * rot + im * rot.conj();
                    assert!(v.im.abs() < 1e-13 && i.im.abs() < 1e-13);
                    // The phasor convention Re(V e^{jωt}) is half the two-mode sum.
                    let (vt, it) = evaluate_time_domain(&plus, e, x, t);
                    assert!((v.re - 2.0 * vt).abs() < 1e-12 && (i.re - 2.0 * it).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn time_domain_periodicity_and_quarter_period() {
        let net = single_line();
        let sol = solve_node_phasors(&net, 1).unwrap();
        let x = 0.37;
        let (v, _) = sol.profile(0, x);
        let (v0, i0) = evaluate_time_domain(&sol, 0, x, 0.0);
        assert_eq!(v0, v.re);
        let period = 2.0 * std::f64::consts::PI / 4.0;
        let (vp, ip) = evaluate_time_domain(&sol, 0, x, period);
        assert!((vp - v0).abs() < 1e-12 && (ip - i0).abs() < 1e-12);
        let (vq, _) = evaluate_time_domain(&sol, 0, x, period / 4.0);
        assert!((vq + v.im).abs() < 1e-12);
    }

    #[test]
    fn characteristic_transform() {
        let p = LineParams::new(1.0, 6.0, 1.0, 1.0, 1.0);
        assert_eq!(to_characteristic(0.0, 1.0, &p), (0.5, 0.5));
        let unit = LineParams::new(1.0, 2.0, 1.0, 2.0, 1.0);
        assert_eq!(to_characteristic(3.0, 1.0, &unit), (2.0, -1.0));
        for &(v, i) in &[(1.0f64, 2.0f64), (-3.5, 0.25), (1e3, -7.0)] {
            let (xp, xm) = to_characteristic(v, i, &p);
            let (v2, i2) = from_characteristic(xp, xm, &p);
            assert!((v2 - v).abs() <= 1e-15 * v.abs().max(1.0) * 4.0);
            assert!((i2 - i).abs() <= 1e-15 * i.abs().max(1.0) * 4.0);
        }
    }

    #[test]
    fn power_zero_voltage_and_real_case() {
        let net = single_line();
        let y = assemble_admittance(&net, 1).unwrap();
        let mut sol = solve_node_phasors(&net, 1).unwrap();
        sol.node_voltages = vec![C::zero(); 2];
        let pq = apparent_power(&sol, &y);
        assert!(pq.s.iter().all(|s| *s == C::zero()));

        let real_y = AdmittanceMatrix {
            mode: 1,
            matrix: DenseMatrix::from_fn(
                2,
                2,
                |i, j| if i == j { c(2.0, 0.0) } else { c(-1.0, 0.0) },
            ),
        };
        sol.node_voltages = vec![c(1.5, 0.0), c(-0.5, 0.0)];
        let pq = apparent_power(&sol, &real_y);
        assert!(pq.q.iter().all(|q| *q == 0.0));
    }

    #[test]
    fn power_matches_powerflow_sums() {
        for net in [single_line(), spokes()] {
            let y = assemble_admittance(&net, 1).unwrap();
            let sol = solve_node_phasors(&net, 1).unwrap();
            let pq = apparent_power(&sol, &y);
            let (p, q) = powerflow_equations(&sol.node_voltages, &y);
            let scale = pq.s.iter().fold(1.0f64, |a, s| a.max(s.norm()));
            for k in 0..y.dim() {
                assert!((pq.p[k] - p[k]).abs() < 1e-12 * scale);
                assert!((pq.q[k] - q[k]).abs() < 1e-12 * scale);
                assert_eq!(pq.p[k], pq.s[k].re);
                assert_eq!(pq.q[k], pq.s[k].im);
            }
        }
    }
}
