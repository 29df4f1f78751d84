//! Run drivers behind the command line: simulate, converge, power.

use std::path::Path;

use crate::analytic::{
    apparent_power, assemble_admittance, from_characteristic, solve_node_phasors, PhasorSolution,
};
use crate::diagnostics::{
    lyapunov, network_variation, ConvergenceStudy, DiagnosticsTrace, SampledReference,
};
use crate::error::Result;
use crate::io::{
    create_dir, csv_writer, field_file_name, fmt_float, InitialCondition, Outputs, RunConfig,
};
use crate::network::Network;
use crate::solver::{EdgeGrid, Limiter, SchemeConfig, Simulation};
use crate::Complex;

/// In-memory result of a simulation run.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub snapshots: Vec<(f64, Vec<EdgeGrid<f64>>)>,
    pub trace: DiagnosticsTrace<f64>,
    pub steps: usize,
    pub dt: f64,
}

/// Sets the initial state of `sim`.
pub fn apply_initial_condition(
    sim: &mut Simulation<f64>,
    init: InitialCondition,
    reference: &PhasorSolution<f64>,
) {
    match init {
        InitialCondition::Zero => sim.set_state(|_, _| (0.0, 0.0)),
        InitialCondition::Analytic => sim.set_state_from_reference(reference),
        InitialCondition::Sine => {
            let lines: Vec<(f64, f64)> = sim
                .network()
                .edges()
                .iter()
                .map(|e| (e.params.voltage_scale(), e.params.length))
                .collect();
            sim.set_state(|e, x| {
                let (k, len) = lines[e];
                let sv = k * (std::f64::consts::PI * x / len).sin();
                (0.5 * sv, -0.5 * sv)
            });
        }
    }
}

fn record(
    trace: &mut DiagnosticsTrace<f64>,
    outputs: &Outputs,
    sampled: &SampledReference<f64>,
    sim: &Simulation<f64>,
) {
    trace.times.push(sim.time());
    if outputs.lyapunov {
        trace.lyapunov.push(lyapunov(sim.grids()));
    }
    if outputs.tv {
        trace.tv.push(network_variation(sim.grids()));
    }
    if outputs.error {
        trace.max_err.push(sampled.error(sim.grids(), sim.time()));
    }
}

/// Runs the configured simulation, keeping snapshots and the diagnostics trace in memory.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput> {
    cfg.check()?;
    let network = cfg.effective_network();
    let reference = solve_node_phasors(&network, 1)?;
    let mut sim = Simulation::new(network, cfg.scheme)?;
    apply_initial_condition(&mut sim, cfg.init, &reference);
    let sampled = SampledReference::new(&reference, sim.grids());

    let mut trace = DiagnosticsTrace::default();
    let outputs = cfg.outputs;
    if outputs.wants_trace() {
        record(&mut trace, &outputs, &sampled, &sim);
    }
    let mut snapshots = Vec::new();
    let mut targets = cfg.snapshot_times();
    if targets.last().is_none_or(|&t| t < cfg.scheme.t_end) {
        targets.push(cfg.scheme.t_end);
    }
    let keep: Vec<f64> = cfg.snapshot_times();
    for t in targets {
        sim.advance_to(t, |s| {
            if outputs.wants_trace() {
                record(&mut trace, &outputs, &sampled, s);
            }
        })?;
        if keep.contains(&t) {
            snapshots.push((t, sim.grids().to_vec()));
        }
    }
    Ok(SimulationOutput {
        snapshots,
        trace,
        steps: sim.steps(),
        dt: sim.dt(),
    })
}

/// Rows `(edge, x, ξ⁺, ξ⁻, v, i)` of a field snapshot.
pub fn field_rows(
    network: &Network<f64>,
    grids: &[EdgeGrid<f64>],
) -> Vec<(usize, f64, f64, f64, f64, f64)> {
    let mut rows = Vec::new();
    for (e, g) in grids.iter().enumerate() {
        let params = &network.edges()[e].params;
        for j in 0..g.n_cells() {
            let (v, i) = from_characteristic(g.plus[j], g.minus[j], params);
            rows.push((e, g.cell_center(j), g.plus[j], g.minus[j], v, i));
        }
    }
    rows
}

fn write_fields(path: &Path, network: &Network<f64>, grids: &[EdgeGrid<f64>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["edge", "x", "xi_plus", "xi_minus", "v", "i"])?;
    for (e, x, p, m, v, i) in field_rows(network, grids) {
        w.write_record([
            e.to_string(),
            fmt_float(x),
            fmt_float(p),
            fmt_float(m),
            fmt_float(v),
            fmt_float(i),
        ])?;
    }
    w.flush()
        .map_err(|e| crate::Error::io(path.display().to_string(), e))
}

fn write_trace(path: &Path, outputs: &Outputs, trace: &DiagnosticsTrace<f64>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["time"];
    if outputs.lyapunov {
        header.push("lyapunov");
    }
    if outputs.tv {
        header.push("tv");
    }
    if outputs.error {
        header.push("max_err");
    }
    w.write_record(&header)?;
    for k in 0..trace.len() {
        let mut row = vec![fmt_float(trace.times[k])];
        if outputs.lyapunov {
            row.push(fmt_float(trace.lyapunov[k]));
        }
        if outputs.tv {
            row.push(fmt_float(trace.tv[k]));
        }
        if outputs.error {
            row.push(fmt_float(trace.max_err[k]));
        }
        w.write_record(&row)?;
    }
    w.flush()
        .map_err(|e| crate::Error::io(path.display().to_string(), e))
}

/// [`simulate`] plus `fields_<time>.csv` and `trace.csv` in `out`.
pub fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulationOutput> {
    let result = simulate(cfg)?;
    create_dir(out)?;
    let network = cfg.effective_network();
    if cfg.outputs.fields {
        for (t, grids) in &result.snapshots {
            write_fields(&out.join(field_file_name(*t)), &network, grids)?;
        }
    }
    if cfg.outputs.wants_trace() {
        write_trace(&out.join("trace.csv"), &cfg.outputs, &result.trace)?;
    }
    Ok(result)
}

/// Largest error against the periodic reference over all steps of one level, `Δx = 2^{-level}`.
///
/// The state starts on the reference at `t = 0`.
pub fn level_error(
    network: &Network<f64>,
    scheme: SchemeConfig<f64>,
    level: i32,
) -> Result<(f64, f64)> {
    let reference = solve_node_phasors(network, 1)?;
    let scheme = SchemeConfig {
        dx_target: 2f64.powi(-level),
        ..scheme
    };
    let mut sim = Simulation::new(network.clone(), scheme)?;
    sim.set_state_from_reference(&reference);
    let sampled = SampledReference::new(&reference, sim.grids());
    let mut worst = sampled.error(sim.grids(), 0.0);
    sim.advance_to(scheme.t_end, |s| {
        worst = worst.max(sampled.error(s.grids(), s.time()))
    })?;
    let dx = sim.grids().iter().map(|g| g.dx).fold(0.0, f64::max);
    Ok((dx, worst))
}

/// One convergence study per limiter over the configured level range.
pub fn converge(cfg: &RunConfig) -> Result<Vec<(Limiter, ConvergenceStudy<f64>)>> {
    cfg.check()?;
    let network = cfg.effective_network();
    let (lo, hi) = cfg.levels;
    cfg.converge_limiters()
        .into_iter()
        .map(|limiter| {
            let scheme = SchemeConfig {
                limiter,
                ..cfg.scheme
            };
            let rows = (lo..=hi)
                .map(|level| level_error(&network, scheme, level).map(|(dx, e)| (level, dx, e)))
                .collect::<Result<Vec<_>>>()?;
            Ok((limiter, ConvergenceStudy::from_errors(&rows)?))
        })
        .collect()
}

/// [`converge`] plus `convergence.csv` in `out`.
pub fn run_converge(cfg: &RunConfig, out: &Path) -> Result<Vec<(Limiter, ConvergenceStudy<f64>)>> {
    let studies = converge(cfg)?;
    create_dir(out)?;
    let path = out.join("convergence.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["scheme", "level", "dx", "max_error", "order"])?;
    for (limiter, study) in &studies {
        for l in &study.levels {
            w.write_record([
                limiter.name().to_string(),
                l.level.to_string(),
                fmt_float(l.dx),
                fmt_float(l.max_error),
                l.order.map(fmt_float).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()
        .map_err(|e| crate::Error::io(path.display().to_string(), e))?;
    Ok(studies)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub node: String,
    pub kind: &'static str,
    pub voltage: Complex<f64>,
    /// Net current leaving the node into its lines.
    pub current: Complex<f64>,
    pub p: f64,
    pub q: f64,
}

/// Nodal voltages, currents and powers of the periodic solution.
pub fn power_table(network: &Network<f64>) -> Result<Vec<PowerRow>> {
    let sol = solve_node_phasors(network, 1)?;
    let y = assemble_admittance(network, 1)?;
    let power = apparent_power(&sol, &y);
    Ok(network
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| PowerRow {
            node: n.id.clone(),
            kind: n.kind.label(),
            voltage: sol.node_voltages[k],
            current: sol.node_currents[k],
            p: power.p[k],
            q: power.q[k],
        })
        .collect())
}

/// [`power_table`] plus `power.csv` in `out`.
pub fn run_power(cfg: &RunConfig, out: &Path) -> Result<Vec<PowerRow>> {
    let rows = power_table(&cfg.effective_network())?;
    create_dir(out)?;
    let path = out.join("power.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["node", "kind", "v_re", "v_im", "i_re", "i_im", "p", "q"])?;
    for r in &rows {
        w.write_record([
            r.node.clone(),
            r.kind.to_string(),
            fmt_float(r.voltage.re),
            fmt_float(r.voltage.im),
            fmt_float(r.current.re),
            fmt_float(r.current.im),
            fmt_float(r.p),
            fmt_float(r.q),
        ])?;
    }
    w.flush()
        .map_err(|e| crate::Error::io(path.display().to_string(), e))?;
    Ok(rows)
}
