//! Strang-split finite-volume solver in characteristic variables.
//!
//! One step advances every edge by `ODE(Δt/2) ∘ PDE(Δt) ∘ ODE(Δt/2)`. The ODE
//! part `ξ_t = −Bξ` is integrated exactly with the closed-form `exp(−BΔt)`;
//! the PDE part transports `ξ⁺` right and `ξ⁻` left at speed `λ` with a
//! flux-limited Lax-Wendroff scheme. Ghost cells for the PDE substep come
//! from [`crate::coupling`] and are assembled for all nodes before any edge
//! moves, so results do not depend on edge order.

use std::str::FromStr;

use crate::analytic::{reference_characteristic, PhasorSolution};
use crate::coupling::{GhostCells, NodeCoupling, MIN_CELLS};
use crate::error::{Error, Result};
use crate::network::{DerivedLineConstants, Network};
use crate::scalar::Scalar;

/// Cell-centred characteristic values on one edge; cell `k` sits at `(k + ½) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGrid<T> {
    pub dx: T,
    pub plus: Vec<T>,
    pub minus: Vec<T>,
}

impl<T: Scalar> EdgeGrid<T> {
    pub fn new(length: T, n_cells: usize) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::TooFewCells {
                edge: 0,
                cells: n_cells,
                required: MIN_CELLS,
            });
        }
        Ok(Self {
            dx: length / T::from_usize_lossy(n_cells),
            plus: vec![T::zero(); n_cells],
            minus: vec![T::zero(); n_cells],
        })
    }

    /// Grid whose cells tile `length` exactly with spacing close to `dx_target`.
    pub fn with_target_spacing(length: T, dx_target: T) -> Result<Self> {
        let n = (length / dx_target).round().to_usize().unwrap_or(0);
        Self::new(length, n)
    }

    pub fn n_cells(&self) -> usize {
        self.plus.len()
    }

    pub fn cell_center(&self, k: usize) -> T {
        (T::from_usize_lossy(k) + T::half()) * self.dx
    }

    pub fn length(&self) -> T {
        self.dx * T::from_usize_lossy(self.n_cells())
    }

    pub fn fill(&mut self, mut f: impl FnMut(T) -> (T, T)) {
        for k in 0..self.n_cells() {
            let (p, m) = f(self.cell_center(k));
            self.plus[k] = p;
            self.minus[k] = m;
        }
    }
}

/// `exp(−B dt) = [[r, s], [s, r]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeStepMatrix<T> {
    pub r: T,
    pub s: T,
    pub dt: T,
}

impl<T: Scalar> OdeStepMatrix<T> {
    /// `(r + s, r − s) = (e^{−(a+b)dt}, e^{−(a−b)dt})`.
    pub fn eigenvalues(&self) -> (T, T) {
        (self.r + self.s, self.r - self.s)
    }

    pub fn apply(&self, plus: T, minus: T) -> (T, T) {
        (
            self.r * plus + self.s * minus,
            self.s * plus + self.r * minus,
        )
    }
}

/// `exp(−B dt)` with `B = [[a, b], [b, a]]`.
pub fn build_ode_matrix<T: Scalar>(consts: &DerivedLineConstants<T>, dt: T) -> OdeStepMatrix<T> {
    let decay = (-consts.a * dt).exp();
    let bt = consts.b * dt;
    OdeStepMatrix {
        r: decay * bt.cosh(),
        s: -decay * bt.sinh(),
        dt,
    }
}

/// Propagator of the line source over `dt`.
///
/// Written in `ξ±`, the line equations carry the source `½B`, whose eigenvalues
/// are the physical decay rates `R/L` and `G/C`; this is `exp(−½B dt)`.
pub fn source_propagator<T: Scalar>(consts: &DerivedLineConstants<T>, dt: T) -> OdeStepMatrix<T> {
    let mut m = build_ode_matrix(consts, T::half() * dt);
    m.dt = dt;
    m
}

/// Applies `M` cellwise.
pub fn ode_half_step<T: Scalar>(grid: &mut EdgeGrid<T>, m: &OdeStepMatrix<T>) {
    for (p, q) in grid.plus.iter_mut().zip(grid.minus.iter_mut()) {
        let (np, nq) = m.apply(*p, *q);
        *p = np;
        *q = nq;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limiter {
    #[default]
    Minmod,
    /// `φ ≡ 1`: classical Lax-Wendroff.
    #[serde(alias = "lax-wendroff")]
    None,
}

impl Limiter {
    pub fn name(&self) -> &'static str {
        match self {
            Limiter::Minmod => "minmod",
            Limiter::None => "none",
        }
    }
}

impl FromStr for Limiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minmod" => Ok(Limiter::Minmod),
            "none" | "lax-wendroff" => Ok(Limiter::None),
            other => Err(Error::Config(format!(
                "unknown limiter `{other}` (expected minmod or none)"
            ))),
        }
    }
}

pub fn minmod_phi<T: Scalar>(theta: T) -> T {
    theta.max(T::zero()).min(T::one())
}

/// `φ(θ) Δ` at an interface with upwind difference `upwind` and local difference `local`.
///
/// A zero local difference gives a zero correction regardless of `θ`.
fn limited_difference<T: Scalar>(upwind: T, local: T, limiter: Limiter) -> T {
    match limiter {
        Limiter::None => local,
        Limiter::Minmod => {
            if local == T::zero() {
                T::zero()
            } else {
                minmod_phi(upwind / local) * local
            }
        }
    }
}

/// One limited Lax-Wendroff step for `u_t + λ u_x = 0` with `λ > 0`.
///
/// `ext` holds two upwind ghosts, the interior cells and one downwind ghost;
/// the returned vector holds the updated interior cells.
pub fn advect_right<T: Scalar>(ext: &[T], courant: T, limiter: Limiter) -> Vec<T> {
    let n = ext.len() - 3;
    let corr = T::half() * courant * (T::one() - courant);
    // flux[k] is the limited difference at the interface between ext[k] and ext[k + 1], k = 1..=n + 1
    let flux: Vec<T> = (1..=n + 1)
        .map(|k| limited_difference(ext[k] - ext[k - 1], ext[k + 1] - ext[k], limiter))
        .collect();
    (0..n)
        .map(|j| {
            let k = j + 2;
            ext[k] - courant * (ext[k] - ext[k - 1]) - corr * (flux[j + 1] - flux[j])
        })
        .collect()
}

/// Courant number `λ dt / dx`, clamped to 1 against rounding; errors above `1 + 1e-12`.
pub fn courant_number<T: Scalar>(lambda: T, dt: T, dx: T) -> Result<T> {
    let nu = lambda.abs() * dt / dx;
    if nu > T::one() + T::lit(1e-12) || !nu.is_finite() {
        return Err(Error::CflViolation {
            courant: nu.to_f64_lossy(),
        });
    }
    Ok(nu.min(T::one()))
}

/// Transport substep on one edge with frozen ghosts.
pub fn pde_step<T: Scalar>(
    grid: &EdgeGrid<T>,
    ghosts: &GhostCells<T>,
    consts: &DerivedLineConstants<T>,
    dt: T,
    limiter: Limiter,
) -> Result<EdgeGrid<T>> {
    let nu = courant_number(consts.lambda, dt, grid.dx)?;
    let n = grid.n_cells();

    let mut ext = Vec::with_capacity(n + 3);
    ext.push(ghosts.start.incoming[1]);
    ext.push(ghosts.start.incoming[0]);
    ext.extend_from_slice(&grid.plus);
    ext.push(ghosts.end.outgoing);
    let plus = advect_right(&ext, nu, limiter);

    // ξ⁻ moves left: run the same update on the mirrored sequence.
    ext.clear();
    ext.push(ghosts.end.incoming[1]);
    ext.push(ghosts.end.incoming[0]);
    ext.extend(grid.minus.iter().rev());
    ext.push(ghosts.start.outgoing);
    let mut minus = advect_right(&ext, nu, limiter);
    minus.reverse();

    Ok(EdgeGrid {
        dx: grid.dx,
        plus,
        minus,
    })
}

/// Applies the source propagator to the ghost cells of `grid` (not yet stepped).
///
/// The outgoing family at the second ghost layer is extrapolated linearly from the
/// first ghost and the adjacent interior cell.
pub fn propagate_ghosts<T: Scalar>(
    ghosts: &mut GhostCells<T>,
    grid: &EdgeGrid<T>,
    m: &OdeStepMatrix<T>,
) {
    let n = grid.n_cells();
    let ends = [
        (&mut ghosts.start, grid.minus[0]),
        (&mut ghosts.end, grid.plus[n - 1]),
    ];
    for (end, inner) in ends {
        let far_outgoing = T::two() * end.outgoing - inner;
        let (inc0, out0) = m.apply(end.incoming[0], end.outgoing);
        let (inc1, _) = m.apply(end.incoming[1], far_outgoing);
        end.incoming = [inc0, inc1];
        end.outgoing = out0;
    }
}

/// Numerical parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig<T> {
    /// Target `max_e λ_e Δt / Δx_e`, in `(0, 1]`.
    pub cfl: T,
    pub limiter: Limiter,
    pub dx_target: T,
    pub t_end: T,
}

impl<T: Scalar> SchemeConfig<T> {
    pub fn check(&self) -> Result<()> {
        if self.cfl > T::one() && self.cfl.is_finite() {
            return Err(Error::CflViolation {
                courant: self.cfl.to_f64_lossy(),
            });
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.dx_target > T::zero()) || !self.dx_target.is_finite() {
            return Err(Error::Config(format!(
                "dx must be positive, got {}",
                self.dx_target
            )));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        Ok(())
    }
}

/// Global time step `cfl · min_e dx_e / λ_e`.
pub fn stable_time_step<T: Scalar>(
    cfl: T,
    grids: &[EdgeGrid<T>],
    consts: &[DerivedLineConstants<T>],
) -> T {
    grids
        .iter()
        .zip(consts)
        .map(|(g, c)| g.dx / c.lambda)
        .fold(T::infinity(), T::min)
        * cfl
}

/// Boundary data at time `t` for every node: `Re(X e^{jωt})`.
pub fn boundary_values<T: Scalar>(network: &Network<T>, t: T) -> Vec<T> {
    let (sin, cos) = (network.omega() * t).sin_cos();
    network
        .nodes()
        .iter()
        .map(|n| {
            let p = n.kind.phasor();
            p.re * cos - p.im * sin
        })
        .collect()
}

/// Solver state for a whole network.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    network: Network<T>,
    config: SchemeConfig<T>,
    consts: Vec<DerivedLineConstants<T>>,
    couplings: Vec<NodeCoupling<T>>,
    grids: Vec<EdgeGrid<T>>,
    ghosts: Vec<GhostCells<T>>,
    dt: T,
    time: T,
    steps: usize,
}

impl<T: Scalar> Simulation<T> {
    /// Sets up grids (zero state), coupling matrices and the global time step.
    pub fn new(network: Network<T>, config: SchemeConfig<T>) -> Result<Self> {
        config.check()?;
        let consts: Vec<_> = network.edges().iter().map(|e| e.params.derived()).collect();
        let grids = network
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                EdgeGrid::with_target_spacing(e.params.length, config.dx_target).map_err(|err| {
                    match err {
                        Error::TooFewCells {
                            cells, required, ..
                        } => Error::TooFewCells {
                            edge: k,
                            cells,
                            required,
                        },
                        other => other,
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let couplings = (0..network.nodes().len())
            .map(|n| NodeCoupling::new(&network, n))
            .collect::<Result<Vec<_>>>()?;
        let dt = stable_time_step(config.cfl, &grids, &consts);
        let ghosts = vec![GhostCells::default(); grids.len()];
        Ok(Self {
            network,
            config,
            consts,
            couplings,
            grids,
            ghosts,
            dt,
            time: T::zero(),
            steps: 0,
        })
    }

    pub fn network(&self) -> &Network<T> {
        &self.network
    }

    pub fn config(&self) -> &SchemeConfig<T> {
        &self.config
    }

    pub fn grids(&self) -> &[EdgeGrid<T>] {
        &self.grids
    }

    pub fn grids_mut(&mut self) -> &mut [EdgeGrid<T>] {
        &mut self.grids
    }

    pub fn constants(&self) -> &[DerivedLineConstants<T>] {
        &self.consts
    }

    pub fn couplings(&self) -> &[NodeCoupling<T>] {
        &self.couplings
    }

    /// Ghost cells used by the most recent PDE substep.
    pub fn ghosts(&self) -> &[GhostCells<T>] {
        &self.ghosts
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Sets every edge from `f(edge, x) -> (ξ⁺, ξ⁻)`.
    pub fn set_state(&mut self, mut f: impl FnMut(usize, T) -> (T, T)) {
        for (e, g) in self.grids.iter_mut().enumerate() {
            g.fill(|x| f(e, x));
        }
    }

    /// Samples a periodic reference at the current time.
    pub fn set_state_from_reference(&mut self, reference: &PhasorSolution<T>) {
        let t = self.time;
        self.set_state(|e, x| reference_characteristic(reference, e, x, t));
    }

    /// Writes ghost cells for all nodes from the current state and boundary data at `t`.
    pub fn assemble_ghosts(&mut self, t: T) {
        let values = boundary_values(&self.network, t);
        for nc in &self.couplings {
            nc.assemble(&self.grids, values[nc.node], &mut self.ghosts);
        }
    }

    /// One Strang step of length `dt`.
    ///
    /// Ghosts are assembled from the state and boundary data at the start of the
    /// step and then pass through the same source half step as the interior, so the
    /// transport sees one consistent extended grid.
    pub fn strang_step(&mut self, dt: T) -> Result<()> {
        let half: Vec<_> = self
            .consts
            .iter()
            .map(|c| source_propagator(c, T::half() * dt))
            .collect();
        self.assemble_ghosts(self.time);
        for ((g, gh), m) in self.grids.iter_mut().zip(&mut self.ghosts).zip(&half) {
            propagate_ghosts(gh, g, m);
            ode_half_step(g, m);
        }
        let mut next = Vec::with_capacity(self.grids.len());
        for (e, g) in self.grids.iter().enumerate() {
            next.push(pde_step(
                g,
                &self.ghosts[e],
                &self.consts[e],
                dt,
                self.config.limiter,
            )?);
        }
        self.grids = next;
        for (g, m) in self.grids.iter_mut().zip(&half) {
            ode_half_step(g, m);
        }
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// Steps until `target`, shortening the last step to land on it; `observe` runs after every step.
    pub fn advance_to(&mut self, target: T, mut observe: impl FnMut(&Self)) -> Result<()> {
        let tiny = self.dt * T::lit(1e-9);
        while target - self.time > tiny {
            let remaining = target - self.time;
            let dt = if remaining < self.dt + tiny {
                remaining
            } else {
                self.dt
            };
            self.strang_step(dt)?;
            if target - self.time <= tiny {
                self.time = target;
            }
            observe(self);
        }
        Ok(())
    }
}
