//! Lyapunov function, total variation, error against the periodic reference
//! and convergence-order estimates.

use num_complex::Complex;

use crate::analytic::{reference_characteristic, PhasorSolution};
use crate::error::{Error, Result};
use crate::network::{LineParams, Network};
use crate::scalar::Scalar;
use crate::solver::EdgeGrid;

/// Discrete Lyapunov function `½ Σ_e Σ_j ((ξ⁺_j)² + (ξ⁻_j)²) Δx_e`.
pub fn lyapunov<T: Scalar>(grids: &[EdgeGrid<T>]) -> T {
    grids.iter().fold(T::zero(), |acc, g| {
        let sq = g
            .plus
            .iter()
            .chain(&g.minus)
            .fold(T::zero(), |s, &v| s + v * v);
        acc + T::half() * sq * g.dx
    })
}

/// Physical energy `½ Σ_e ∫ C v² + L i²`, which equals `Σ_e L_e Σ_j ((ξ⁺)² + (ξ⁻)²) Δx_e`.
pub fn physical_energy<T: Scalar>(grids: &[EdgeGrid<T>], params: &[LineParams<T>]) -> T {
    grids.iter().zip(params).fold(T::zero(), |acc, (g, p)| {
        let sq = g
            .plus
            .iter()
            .chain(&g.minus)
            .fold(T::zero(), |s, &v| s + v * v);
        acc + p.l * sq * g.dx
    })
}

/// `Σ_j |ξ⁺_{j+1} − ξ⁺_j| + |ξ⁻_{j+1} − ξ⁻_j|` over interior cells.
pub fn total_variation<T: Scalar>(grid: &EdgeGrid<T>) -> T {
    component_variation(&grid.plus) + component_variation(&grid.minus)
}

pub fn component_variation<T: Scalar>(values: &[T]) -> T {
    values
        .windows(2)
        .fold(T::zero(), |acc, w| acc + (w[1] - w[0]).abs())
}

/// Total variation summed over edges in edge order.
pub fn network_variation<T: Scalar>(grids: &[EdgeGrid<T>]) -> T {
    grids
        .iter()
        .fold(T::zero(), |acc, g| acc + total_variation(g))
}

/// `max_e max_k max(|ξ⁺ − ζ⁺|, |ξ⁻ − ζ⁻|)` at one time, `ζ` sampled at cell centres.
pub fn state_error<T: Scalar>(grids: &[EdgeGrid<T>], reference: &PhasorSolution<T>, t: T) -> T {
    let mut worst = T::zero();
    for (e, g) in grids.iter().enumerate() {
        for k in 0..g.n_cells() {
            let (zp, zm) = reference_characteristic(reference, e, g.cell_center(k), t);
            worst = worst
                .max((g.plus[k] - zp).abs())
                .max((g.minus[k] - zm).abs());
        }
    }
    worst
}

/// Reference phasors of `ξ±` cached at the cell centres of a fixed set of grids.
///
/// Evaluating the reference then costs one complex rotation per cell instead of
/// a line-profile evaluation.
#[derive(Debug, Clone)]
pub struct SampledReference<T> {
    mode_omega: T,
    edges: Vec<Vec<(Complex<T>, Complex<T>)>>,
}

impl<T: Scalar> SampledReference<T> {
    pub fn new(reference: &PhasorSolution<T>, grids: &[EdgeGrid<T>]) -> Self {
        let edges = grids
            .iter()
            .enumerate()
            .map(|(e, g)| {
                let k = reference.edges[e].params.voltage_scale();
                (0..g.n_cells())
                    .map(|j| {
                        let (v, i) = reference.profile(e, g.cell_center(j));
                        ((i + v * k) * T::half(), (i - v * k) * T::half())
                    })
                    .collect()
            })
            .collect();
        Self {
            mode_omega: T::lit(f64::from(reference.mode)) * reference.omega,
            edges,
        }
    }

    /// `(ζ⁺, ζ⁻)` at cell `j` of `edge` and time `t`.
    pub fn at(&self, edge: usize, j: usize, t: T) -> (T, T) {
        let rot = Complex::from_polar(T::one(), self.mode_omega * t);
        let (p, m) = self.edges[edge][j];
        ((p * rot).re, (m * rot).re)
    }

    /// Same quantity as [`state_error`], for the cached grids.
    pub fn error(&self, grids: &[EdgeGrid<T>], t: T) -> T {
        let rot = Complex::from_polar(T::one(), self.mode_omega * t);
        let mut worst = T::zero();
        for (g, cells) in grids.iter().zip(&self.edges) {
            for ((&p, &m), &(zp, zm)) in g.plus.iter().zip(&g.minus).zip(cells) {
                worst = worst
                    .max((p - (zp * rot).re).abs())
                    .max((m - (zm * rot).re).abs());
            }
        }
        worst
    }
}

/// Maximum of [`state_error`] over a sequence of `(time, state)` pairs.
pub fn max_error<'a, T: Scalar>(
    history: impl IntoIterator<Item = (T, &'a [EdgeGrid<T>])>,
    reference: &PhasorSolution<T>,
) -> T {
    history.into_iter().fold(T::zero(), |acc, (t, grids)| {
        acc.max(state_error(grids, reference, t))
    })
}

/// `c_i = ln(Δξ_{i−1}/Δξ_i) / ln(Δx_{i−1}/Δx_i)` for consecutive levels.
pub fn convergence_orders<T: Scalar>(levels: &[(T, T)]) -> Result<Vec<T>> {
    if let Some(&(_, err)) = levels.iter().find(|(_, e)| !(*e > T::zero())) {
        return Err(Error::Config(format!(
            "convergence orders need positive errors, got {err}"
        )));
    }
    Ok(levels
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect())
}

/// `v0 · exp(−2 μ t)` with `μ = min_e min(R_e/L_e, G_e/C_e)`.
pub fn analytic_decay_bound<T: Scalar>(network: &Network<T>, v0: T, t: T) -> T {
    v0 * (-T::two() * network.damping_rate() * t).exp()
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope<T: Scalar>(times: &[T], values: &[T]) -> T {
    let n = T::from_usize_lossy(times.len());
    let logs: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let mt = times.iter().fold(T::zero(), |a, &t| a + t) / n;
    let ml = logs.iter().fold(T::zero(), |a, &l| a + l) / n;
    let (mut num, mut den) = (T::zero(), T::zero());
    for (&t, &l) in times.iter().zip(&logs) {
        num += (t - mt) * (l - ml);
        den += (t - mt) * (t - mt);
    }
    num / den
}

/// Time series of the diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsTrace<T> {
    pub times: Vec<T>,
    pub lyapunov: Vec<T>,
    pub energy: Vec<T>,
    pub tv: Vec<T>,
    /// Present only when a reference is tracked.
    pub max_err: Vec<T>,
}

impl<T: Scalar> DiagnosticsTrace<T> {
    pub fn record(
        &mut self,
        t: T,
        grids: &[EdgeGrid<T>],
        params: &[LineParams<T>],
        reference: Option<&PhasorSolution<T>>,
    ) {
        self.times.push(t);
        self.lyapunov.push(lyapunov(grids));
        self.energy.push(physical_energy(grids, params));
        self.tv.push(network_variation(grids));
        if let Some(r) = reference {
            self.max_err.push(state_error(grids, r, t));
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// True if the Lyapunov value never rises by more than `rel_tol` relative between records.
    pub fn lyapunov_non_increasing(&self, rel_tol: T) -> bool {
        self.lyapunov
            .windows(2)
            .all(|w| w[1] <= w[0] * (T::one() + rel_tol))
    }
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel<T> {
    pub level: i32,
    pub dx: T,
    pub max_error: T,
    /// Order estimate against the previous level; absent for the first.
    pub order: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub levels: Vec<ConvergenceLevel<T>>,
}

impl<T: Scalar> ConvergenceStudy<T> {
    /// Builds the table from `(level, dx, error)` rows with strictly decreasing `dx`.
    pub fn from_errors(rows: &[(i32, T, T)]) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[1].1 < w[0].1)) {
            return Err(Error::Config("grid spacings must strictly decrease".into()));
        }
        let pairs: Vec<(T, T)> = rows.iter().map(|&(_, dx, e)| (dx, e)).collect();
        let orders = convergence_orders(&pairs)?;
        let levels = rows
            .iter()
            .enumerate()
            .map(|(k, &(level, dx, max_error))| ConvergenceLevel {
                level,
                dx,
                max_error,
                order: if k == 0 { None } else { Some(orders[k - 1]) },
            })
            .collect();
        Ok(Self { levels })
    }

    pub fn orders(&self) -> Vec<T> {
        self.levels.iter().filter_map(|l| l.order).collect()
    }
}
