//! Experiment configuration: a sectioned text file with `[topology]`,
//! `[channels]`, `[scheme]` and `[experiment]` blocks.
//!
//! ```text
//! [topology]
//! star = 3                 # or: nodes/root/edges/end_nodes for a tree
//!
//! [channels]
//! axis = X                 # one Pauli axis for every edge
//! theta = 0.8, 0.3, 0.4    # identity probability per edge
//! # theta4_0 = 0.7,0.1,0.1,0.1   # per-edge depolarizing (dense engine)
//!
//! [scheme]
//! preset = z_basis         # z_basis | ghz_x | ghz_y | ghz_z
//! regime = low             # optional, default low
//!
//! [experiment]
//! shots = 1000, 10000      # strictly increasing schedule
//! trials = 5               # optional, default 1
//! seed = 7
//! out = results            # optional output directory, default "."
//! engine = flip            # optional: flip | dense (default flip)
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use qnt_core::channels::{ChannelModel, PauliAxis};
use qnt_core::distribution::SchemeKind;
use qnt_core::estimators::Regime;
use qnt_core::topology::{build_star, build_tree, RootedTree, StarTopology};

/// Configuration error with the line it came from when known.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, field: &str, message: impl Into<String>) -> Self {
        Self { line: Some(line), field: Some(field.to_string()), message: message.into() }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        Self { line: None, field: Some(field.to_string()), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { line: None, field: None, message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.line, &self.field) {
            (Some(line), Some(field)) => {
                write!(f, "line {line}, field {field:?}: {}", self.message)
            }
            (None, Some(field)) => write!(f, "field {field:?}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub enum TopologySpec {
    Star(usize),
    Tree {
        nodes: usize,
        root: usize,
        edges: Vec<(usize, usize)>,
        end_nodes: BTreeSet<usize>,
    },
}

impl TopologySpec {
    pub fn edge_count(&self) -> usize {
        match self {
            TopologySpec::Star(n) => *n,
            TopologySpec::Tree { edges, .. } => edges.len(),
        }
    }

    pub fn build_star(&self) -> Result<StarTopology, ConfigError> {
        match self {
            TopologySpec::Star(n) => {
                build_star(*n).map_err(|e| ConfigError::field("topology.star", e.to_string()))
            }
            TopologySpec::Tree { .. } => Err(ConfigError::general(
                "this command requires a star topology; general trees are only supported by \
                 the qfim command for single-edge networks",
            )),
        }
    }

    pub fn build_tree(&self) -> Result<RootedTree, ConfigError> {
        match self {
            TopologySpec::Star(n) => Ok(build_star(*n)
                .map_err(|e| ConfigError::field("topology.star", e.to_string()))?
                .tree()
                .clone()),
            TopologySpec::Tree { nodes, root, edges, end_nodes } => {
                build_tree(*nodes, *root, edges.clone(), end_nodes.clone())
                    .map_err(|e| ConfigError::field("topology", e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum ChannelSpec {
    SinglePauli { axis: PauliAxis, thetas: Vec<f64> },
    Depolarizing { theta4: Vec<[f64; 4]> },
}

impl ChannelSpec {
    pub fn thetas(&self) -> Result<&[f64], ConfigError> {
        match self {
            ChannelSpec::SinglePauli { thetas, .. } => Ok(thetas),
            ChannelSpec::Depolarizing { .. } => Err(ConfigError::general(
                "unsupported model: depolarizing channels are simulate-only (dense engine); \
                 the estimators require single-Pauli channels",
            )),
        }
    }

    pub fn models(&self) -> Result<Vec<ChannelModel>, ConfigError> {
        match self {
            ChannelSpec::SinglePauli { axis, thetas } => thetas
                .iter()
                .map(|&t| {
                    qnt_core::channels::make_single_pauli(*axis, t)
                        .map(|c| c.to_model())
                        .map_err(|e| ConfigError::field("channels.theta", e.to_string()))
                })
                .collect(),
            ChannelSpec::Depolarizing { theta4 } => theta4
                .iter()
                .map(|&t4| {
                    ChannelModel::depolarizing(t4)
                        .map_err(|e| ConfigError::field("channels.theta4", e.to_string()))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Flip,
    Dense,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    pub channels: ChannelSpec,
    pub scheme: SchemeKind,
    pub regime: Regime,
    pub shots: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub engine: EngineChoice,
}

struct RawItem {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn parse_items(text: &str) -> Result<Vec<RawItem>, ConfigError> {
    let mut section = String::new();
    let mut items = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                ConfigError::at(line_no, "section", "unterminated section header")
            })?;
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::at(line_no, line, "expected `key = value`")
        })?;
        if section.is_empty() {
            return Err(ConfigError::at(line_no, key.trim(), "entry outside any [section]"));
        }
        items.push(RawItem {
            line: line_no,
            section: section.clone(),
            key: key.trim().to_ascii_lowercase(),
            value: value.trim().to_string(),
        });
    }
    Ok(items)
}

fn split_list(value: &str) -> Vec<&str> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_f64_list(item: &RawItem) -> Result<Vec<f64>, ConfigError> {
    split_list(&item.value)
        .into_iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                ConfigError::at(item.line, &item.key, format!("{s:?} is not a number"))
            })
        })
        .collect()
}

fn parse_u64_list(item: &RawItem) -> Result<Vec<u64>, ConfigError> {
    split_list(&item.value)
        .into_iter()
        .map(|s| {
            s.parse::<u64>().map_err(|_| {
                ConfigError::at(item.line, &item.key, format!("{s:?} is not an integer"))
            })
        })
        .collect()
}

fn parse_usize(item: &RawItem) -> Result<usize, ConfigError> {
    item.value.parse::<usize>().map_err(|_| {
        ConfigError::at(item.line, &item.key, format!("{:?} is not an integer", item.value))
    })
}

impl ExperimentConfig {
    /// Parse and validate a config file's contents.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let items = parse_items(text)?;

        let mut star: Option<usize> = None;
        let mut nodes: Option<usize> = None;
        let mut root: Option<usize> = None;
        let mut edges: Option<Vec<(usize, usize)>> = None;
        let mut end_nodes: Option<BTreeSet<usize>> = None;
        let mut axis: Option<(usize, PauliAxis)> = None;
        let mut axes: Option<(usize, Vec<PauliAxis>)> = None;
        let mut thetas: Option<(usize, Vec<f64>)> = None;
        let mut theta4: Vec<(usize, usize, [f64; 4])> = Vec::new();
        let mut scheme: Option<(usize, SchemeKind)> = None;
        let mut regime: Option<Regime> = None;
        let mut shots: Option<(usize, Vec<u64>)> = None;
        let mut trials: Option<(usize, u64)> = None;
        let mut seed: Option<u64> = None;
        let mut out_dir: Option<PathBuf> = None;
        let mut engine: Option<(usize, EngineChoice)> = None;

        for item in &items {
            match (item.section.as_str(), item.key.as_str()) {
                ("topology", "star") => star = Some(parse_usize(item)?),
                ("topology", "nodes") => nodes = Some(parse_usize(item)?),
                ("topology", "root") => root = Some(parse_usize(item)?),
                ("topology", "edges") => {
                    let mut list = Vec::new();
                    for pair in split_list(&item.value) {
                        let (u, v) = pair.split_once('-').ok_or_else(|| {
                            ConfigError::at(item.line, &item.key, format!("edge {pair:?} is not `u-v`"))
                        })?;
                        let parse = |s: &str| {
                            s.trim().parse::<usize>().map_err(|_| {
                                ConfigError::at(item.line, &item.key, format!("{s:?} is not a node id"))
                            })
                        };
                        list.push((parse(u)?, parse(v)?));
                    }
                    edges = Some(list);
                }
                ("topology", "end_nodes") => {
                    let mut set = BTreeSet::new();
                    for v in split_list(&item.value) {
                        set.insert(v.parse::<usize>().map_err(|_| {
                            ConfigError::at(item.line, &item.key, format!("{v:?} is not a node id"))
                        })?);
                    }
                    end_nodes = Some(set);
                }
                ("channels", "axis") => {
                    let parsed = item.value.parse::<PauliAxis>().map_err(|e| {
                        ConfigError::at(item.line, &item.key, e.to_string())
                    })?;
                    axis = Some((item.line, parsed));
                }
                ("channels", "axes") => {
                    let mut list = Vec::new();
                    for s in split_list(&item.value) {
                        list.push(s.parse::<PauliAxis>().map_err(|e| {
                            ConfigError::at(item.line, &item.key, e.to_string())
                        })?);
                    }
                    axes = Some((item.line, list));
                }
                ("channels", "theta") => thetas = Some((item.line, parse_f64_list(item)?)),
                ("channels", key) if key.starts_with("theta4_") => {
                    let edge: usize = key["theta4_".len()..].parse().map_err(|_| {
                        ConfigError::at(item.line, key, "expected theta4_<edge index>")
                    })?;
                    let values = parse_f64_list(item)?;
                    if values.len() != 4 {
                        return Err(ConfigError::at(item.line, key, "theta4 needs 4 entries"));
                    }
                    theta4.push((item.line, edge, [values[0], values[1], values[2], values[3]]));
                }
                ("scheme", "preset") => {
                    let parsed = item.value.parse::<SchemeKind>().map_err(|e| {
                        ConfigError::at(item.line, &item.key, e.to_string())
                    })?;
                    scheme = Some((item.line, parsed));
                }
                ("scheme", "regime") => {
                    regime = Some(item.value.parse::<Regime>().map_err(|e| {
                        ConfigError::at(item.line, &item.key, e.to_string())
                    })?);
                }
                ("experiment", "shots") => shots = Some((item.line, parse_u64_list(item)?)),
                ("experiment", "trials") => {
                    trials = Some((item.line, item.value.parse::<u64>().map_err(|_| {
                        ConfigError::at(item.line, &item.key, "not an integer")
                    })?));
                }
                ("experiment", "seed") => {
                    seed = Some(item.value.parse::<u64>().map_err(|_| {
                        ConfigError::at(item.line, &item.key, "not an integer")
                    })?);
                }
                ("experiment", "out") => out_dir = Some(PathBuf::from(&item.value)),
                ("experiment", "engine") => {
                    let parsed = match item.value.to_ascii_lowercase().as_str() {
                        "flip" => EngineChoice::Flip,
                        "dense" => EngineChoice::Dense,
                        other => {
                            return Err(ConfigError::at(
                                item.line,
                                &item.key,
                                format!("unknown engine {other:?} (flip | dense)"),
                            ))
                        }
                    };
                    engine = Some((item.line, parsed));
                }
                (section, key) => {
                    return Err(ConfigError::at(
                        item.line,
                        key,
                        format!("unknown entry in [{section}]"),
                    ));
                }
            }
        }

        // Topology.
        let topology = match (star, nodes) {
            (Some(n), None) => TopologySpec::Star(n),
            (None, Some(node_count)) => TopologySpec::Tree {
                nodes: node_count,
                root: root.ok_or_else(|| ConfigError::field("topology.root", "missing"))?,
                edges: edges.ok_or_else(|| ConfigError::field("topology.edges", "missing"))?,
                end_nodes: end_nodes
                    .ok_or_else(|| ConfigError::field("topology.end_nodes", "missing"))?,
            },
            (Some(_), Some(_)) => {
                return Err(ConfigError::field(
                    "topology",
                    "give either `star` or `nodes`/`root`/`edges`/`end_nodes`, not both",
                ))
            }
            (None, None) => return Err(ConfigError::field("topology", "missing [topology] section")),
        };
        // Surface obvious topology errors at config time.
        topology.build_tree()?;
        let edge_count = topology.edge_count();

        // Channels.
        let channels = if !theta4.is_empty() {
            if axis.is_some() || axes.is_some() || thetas.is_some() {
                return Err(ConfigError::field(
                    "channels",
                    "give either single-Pauli (`axis`/`theta`) or depolarizing (`theta4_*`), not both",
                ));
            }
            let mut by_edge = vec![None; edge_count];
            for (line, edge, values) in theta4 {
                if edge >= edge_count {
                    return Err(ConfigError::at(
                        line,
                        &format!("theta4_{edge}"),
                        format!("edge index out of range for {edge_count} edges"),
                    ));
                }
                by_edge[edge] = Some(values);
            }
            let mut list = Vec::with_capacity(edge_count);
            for (e, entry) in by_edge.into_iter().enumerate() {
                list.push(entry.ok_or_else(|| {
                    ConfigError::field(&format!("channels.theta4_{e}"), "missing edge entry")
                })?);
            }
            ChannelSpec::Depolarizing { theta4: list }
        } else {
            let (theta_line, theta_values) =
                thetas.ok_or_else(|| ConfigError::field("channels.theta", "missing"))?;
            if theta_values.len() != edge_count {
                return Err(ConfigError::at(
                    theta_line,
                    "theta",
                    format!("{} entries for {edge_count} edges", theta_values.len()),
                ));
            }
            for &t in &theta_values {
                if !(0.0..=1.0).contains(&t) {
                    return Err(ConfigError::at(theta_line, "theta", format!("{t} outside [0, 1]")));
                }
            }
            let channel_axis = match (axis, axes) {
                (Some((_, a)), None) => a,
                (None, Some((line, list))) => {
                    if list.len() != edge_count {
                        return Err(ConfigError::at(
                            line,
                            "axes",
                            format!("{} entries for {edge_count} edges", list.len()),
                        ));
                    }
                    let first = list[0];
                    if list.iter().any(|&a| a != first) {
                        return Err(ConfigError::at(
                            line,
                            "axes",
                            "unsupported model: mixed Pauli axes across edges; every channel \
                             must use the same Pauli operator",
                        ));
                    }
                    first
                }
                (Some(_), Some(_)) => {
                    return Err(ConfigError::field("channels", "give `axis` or `axes`, not both"))
                }
                (None, None) => return Err(ConfigError::field("channels.axis", "missing")),
            };
            ChannelSpec::SinglePauli { axis: channel_axis, thetas: theta_values }
        };

        // Scheme.
        let (scheme_line, scheme) =
            scheme.ok_or_else(|| ConfigError::field("scheme.preset", "missing"))?;
        if let ChannelSpec::SinglePauli { axis, .. } = &channels {
            if *axis != scheme.axis() {
                return Err(ConfigError::at(
                    scheme_line,
                    "preset",
                    format!(
                        "unsupported model: scheme {} expects {} channels, config has {}",
                        scheme,
                        scheme.axis(),
                        axis
                    ),
                ));
            }
        }

        // Experiment.
        let (shots_line, shots) =
            shots.ok_or_else(|| ConfigError::field("experiment.shots", "missing"))?;
        if shots.is_empty() {
            return Err(ConfigError::at(shots_line, "shots", "schedule is empty"));
        }
        for window in shots.windows(2) {
            if window[1] <= window[0] {
                return Err(ConfigError::at(
                    shots_line,
                    "shots",
                    "schedule must be strictly increasing",
                ));
            }
        }
        if shots[0] == 0 {
            return Err(ConfigError::at(shots_line, "shots", "shot counts must be positive"));
        }
        let trials = match trials {
            Some((line, 0)) => {
                return Err(ConfigError::at(line, "trials", "must be at least 1"))
            }
            Some((_, t)) => t,
            None => 1,
        };
        let seed = seed.ok_or_else(|| ConfigError::field("experiment.seed", "missing"))?;

        let engine = match (engine, &channels) {
            (Some((line, EngineChoice::Flip)), ChannelSpec::Depolarizing { .. }) => {
                return Err(ConfigError::at(
                    line,
                    "engine",
                    "depolarizing channels require the dense engine",
                ));
            }
            (Some((_, e)), _) => e,
            (None, ChannelSpec::Depolarizing { .. }) => EngineChoice::Dense,
            (None, _) => EngineChoice::Flip,
        };

        Ok(Self {
            topology,
            channels,
            scheme,
            regime: regime.unwrap_or(Regime::Low),
            shots,
            trials,
            seed,
            out_dir: out_dir.unwrap_or_else(|| PathBuf::from(".")),
            engine,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::general(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Largest entry of the shot schedule; what `simulate` and `estimate` run.
    pub fn max_shots(&self) -> u64 {
        *self.shots.last().expect("validated non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
[topology]
star = 3

[channels]
axis = X
theta = 0.8, 0.3, 0.4

[scheme]
preset = ghz_x

[experiment]
shots = 1000, 10000
trials = 2
seed = 7
";

    #[test]
    fn parses_complete_config() {
        let cfg = ExperimentConfig::parse(GOOD).unwrap();
        assert!(matches!(cfg.topology, TopologySpec::Star(3)));
        assert_eq!(cfg.scheme, SchemeKind::GhzX);
        assert_eq!(cfg.shots, vec![1000, 10000]);
        assert_eq!(cfg.trials, 2);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.regime, Regime::Low);
        assert_eq!(cfg.engine, EngineChoice::Flip);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = GOOD.replace("theta = 0.8, 0.3, 0.4", "theta = 0.8, 1.3, 0.4");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert_eq!(err.line, Some(6));
        assert!(err.message.contains("outside"));
    }

    #[test]
    fn rejects_mixed_axes() {
        let bad = GOOD.replace("axis = X", "axes = X, Y, X");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.message.contains("mixed Pauli axes"), "{err}");
    }

    #[test]
    fn rejects_axis_scheme_mismatch() {
        let bad = GOOD.replace("preset = ghz_x", "preset = ghz_z");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.message.contains("expects Z channels"), "{err}");
    }

    #[test]
    fn rejects_non_increasing_schedule() {
        let bad = GOOD.replace("shots = 1000, 10000", "shots = 1000, 1000");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn rejects_zero_shots_and_trials() {
        let bad = GOOD.replace("shots = 1000, 10000", "shots = 0");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let bad = GOOD.replace("trials = 2", "trials = 0");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn parses_tree_topology() {
        let text = GOOD.replace(
            "star = 3",
            "nodes = 2\nroot = 0\nedges = 0-1\nend_nodes = 0, 1",
        );
        let text = text.replace("theta = 0.8, 0.3, 0.4", "theta = 0.8");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.topology.edge_count(), 1);
    }

    #[test]
    fn depolarizing_forces_dense_engine() {
        let text = GOOD
            .replace("axis = X\ntheta = 0.8, 0.3, 0.4", "theta4_0 = 0.7,0.1,0.1,0.1\ntheta4_1 = 1,0,0,0\ntheta4_2 = 0.9,0.1,0,0")
            .replace("preset = ghz_x", "preset = z_basis");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.engine, EngineChoice::Dense);
        assert!(cfg.channels.thetas().is_err());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = format!("{GOOD}\n[experiment]\nbogus = 1\n");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.message.contains("unknown entry"));
    }
}
