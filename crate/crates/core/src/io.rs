//! Network and run files (TOML) and CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Edge, LineParams, Network, Node, NodeKind};
use crate::solver::{Limiter, SchemeConfig};
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasorEntry {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    Generator,
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: NodeType,
    pub phasor: PhasorEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub length: f64,
}

/// On-disk layout of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub omega: f64,
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

impl NetworkFile {
    pub fn from_network(network: &Network<f64>) -> Self {
        let nodes = network
            .nodes()
            .iter()
            .map(|n| {
                let p = n.kind.phasor();
                NodeEntry {
                    id: n.id.clone(),
                    kind: if n.kind.is_generator() {
                        NodeType::Generator
                    } else {
                        NodeType::Load
                    },
                    phasor: PhasorEntry { re: p.re, im: p.im },
                }
            })
            .collect();
        let edges = network
            .edges()
            .iter()
            .map(|e| EdgeEntry {
                from: e.from.clone(),
                to: e.to.clone(),
                r: e.params.r,
                l: e.params.l,
                g: e.params.g,
                c: e.params.c,
                length: e.params.length,
            })
            .collect();
        Self {
            omega: network.omega(),
            nodes,
            edges,
        }
    }

    /// Validated network; nodes keep file order.
    pub fn into_network(self) -> Result<Network<f64>> {
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| {
                let p = Complex::new(n.phasor.re, n.phasor.im);
                let kind = match n.kind {
                    NodeType::Generator => NodeKind::Generator(p),
                    NodeType::Load => NodeKind::Load(p),
                };
                Node::new(n.id, kind)
            })
            .collect();
        let edges = self
            .edges
            .into_iter()
            .map(|e| Edge::new(e.from, e.to, LineParams::new(e.r, e.l, e.g, e.c, e.length)))
            .collect();
        Network::new(nodes, edges, self.omega)
    }
}

/// Turns a TOML error into a message naming the line and the offending key.
fn describe_toml_error(text: &str, err: &toml::de::Error) -> String {
    let detail = err.message().trim().to_string();
    let Some(span) = err.span() else {
        return detail;
    };
    let line_no = text[..span.start.min(text.len())].matches('\n').count() + 1;
    let line = text.lines().nth(line_no - 1).unwrap_or("").trim();
    match line.split_once('=') {
        Some((key, _)) if !key.trim().starts_with('[') => {
            format!("line {line_no}, field `{}`: {detail}", key.trim())
        }
        _ => format!("line {line_no} (`{line}`): {detail}"),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn parse_toml<D: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<D> {
    toml::from_str(text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: describe_toml_error(text, &e),
    })
}

pub fn parse_network(path: &Path, text: &str) -> Result<Network<f64>> {
    parse_toml::<NetworkFile>(path, text)?.into_network()
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network<f64>> {
    let path = path.as_ref();
    parse_network(path, &read_text(path)?)
}

pub fn network_to_toml(network: &Network<f64>) -> String {
    toml::to_string(&NetworkFile::from_network(network)).expect("network tables always serialize")
}

pub fn write_network(network: &Network<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, network_to_toml(network)).map_err(|e| Error::io(path.display().to_string(), e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialCondition {
    #[default]
    Zero,
    /// The periodic reference sampled at `t = 0`.
    Analytic,
    /// `v = sin(π x / ℓ)`, `i = 0` on every edge.
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Node phasors from the network file.
    #[default]
    Periodic,
    /// All node phasors replaced by zero.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub limiter: Limiter,
    pub cfl: f64,
    pub dx: f64,
    pub t_end: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            limiter: Limiter::Minmod,
            cfl: 0.8,
            dx: 2f64.powi(-9),
            t_end: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub fields: bool,
    pub lyapunov: bool,
    pub tv: bool,
    pub error: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            fields: true,
            lyapunov: true,
            tv: true,
            error: false,
        }
    }
}

impl Outputs {
    pub fn wants_trace(&self) -> bool {
        self.lyapunov || self.tv || self.error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    /// Inclusive range of exponents `i` with `Δx = 2^{-i}`.
    pub levels: [i32; 2],
    /// Empty means both Lax-Wendroff and minmod.
    pub limiters: Vec<Limiter>,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            levels: [1, 9],
            limiters: Vec::new(),
        }
    }
}

/// On-disk layout of a run file. `network` is resolved relative to the run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub network: PathBuf,
    #[serde(default)]
    pub init: InitialCondition,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub converge: ConvergeSection,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network: Network<f64>,
    pub init: InitialCondition,
    pub boundary: BoundaryMode,
    pub snapshots: Vec<f64>,
    pub scheme: SchemeConfig<f64>,
    pub outputs: Outputs,
    pub levels: (i32, i32),
    pub limiters: Vec<Limiter>,
}

impl RunConfig {
    /// Defaults around a network, as used when a bare network file is given.
    pub fn for_network(network: Network<f64>) -> Self {
        Self::assemble(
            network,
            RunFile {
                network: PathBuf::new(),
                init: InitialCondition::default(),
                boundary: BoundaryMode::default(),
                snapshots: Vec::new(),
                scheme: SchemeSection::default(),
                outputs: Outputs::default(),
                converge: ConvergeSection::default(),
            },
        )
    }

    fn assemble(network: Network<f64>, file: RunFile) -> Self {
        Self {
            network,
            init: file.init,
            boundary: file.boundary,
            snapshots: file.snapshots,
            scheme: SchemeConfig {
                cfl: file.scheme.cfl,
                limiter: file.scheme.limiter,
                dx_target: file.scheme.dx,
                t_end: file.scheme.t_end,
            },
            outputs: file.outputs,
            levels: (file.converge.levels[0], file.converge.levels[1]),
            limiters: file.converge.limiters,
        }
    }

    /// Checks numeric settings, including `t_end > 0` and snapshot times within `[0, t_end]`.
    pub fn check(&self) -> Result<()> {
        self.scheme.check()?;
        if let Some(t) = self
            .snapshots
            .iter()
            .find(|&&t| !(0.0..=self.scheme.t_end).contains(&t))
        {
            return Err(Error::Config(format!(
                "snapshot time {t} lies outside [0, {}]",
                self.scheme.t_end
            )));
        }
        if self.levels.0 < 0 || self.levels.0 > self.levels.1 {
            return Err(Error::Config(format!(
                "invalid level range {}..{}",
                self.levels.0, self.levels.1
            )));
        }
        Ok(())
    }

    /// Network with the boundary mode applied.
    pub fn effective_network(&self) -> Network<f64> {
        match self.boundary {
            BoundaryMode::Periodic => self.network.clone(),
            BoundaryMode::Homogeneous => self.network.homogeneous(),
        }
    }

    /// Sorted, deduplicated snapshot times; `0` and `t_end` when none are given.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut times = if self.snapshots.is_empty() {
            vec![0.0, self.scheme.t_end]
        } else {
            self.snapshots.clone()
        };
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    pub fn converge_limiters(&self) -> Vec<Limiter> {
        if self.limiters.is_empty() {
            vec![Limiter::None, Limiter::Minmod]
        } else {
            self.limiters.clone()
        }
    }
}

/// Loads a run file, or a bare network file (recognised by a top-level `nodes` table) with default settings.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let probe: toml::Table = parse_toml(path, &text)?;
    if probe.contains_key("nodes") {
        return Ok(RunConfig::for_network(parse_network(path, &text)?));
    }
    let file: RunFile = parse_toml(path, &text)?;
    let net_path = path.parent().unwrap_or(Path::new("")).join(&file.network);
    let network = load_network(&net_path)?;
    Ok(RunConfig::assemble(network, file))
}

/// Full-precision scientific notation (17 significant digits).
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `fields_<time>.csv` with the time at fixed precision.
pub fn field_file_name(t: f64) -> String {
    format!("fields_{t:.6}.csv")
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path.display().to_string(), e))
}
