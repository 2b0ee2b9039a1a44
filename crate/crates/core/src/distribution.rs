//! Tree state distribution: per-node circuits and a qubit index map executed
//! level by level, with the edge channel applied on every transmission.
//!
//! Two engines realize the process. The dense engine runs the circuits on an
//! exact density matrix and works for any circuit and any mixed-unitary
//! channels. The flip engine tracks the outcome label directly: for the
//! scheme presets every channel flip acts on the final label as a fixed XOR
//! mask, so a distribution run is a handful of bit operations per shot, and
//! the exact outcome distribution is a sum over the 2^edges flip patterns.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::channels::{ChannelModel, PauliAxis};
use crate::dense::DensityMatrix;
use crate::error::{Error, Result};
use crate::labels::{BasisKind, BitString, DiagonalState, LabelSpace};
use crate::topology::{NodeId, RootedTree, StarTopology};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gate alphabet for node circuits. Wire indices are local to the node's
/// register; wire 0 of a non-root node is the received qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    /// The composite single-qubit gate X·H·X.
    Xhx(usize),
    /// The composite single-qubit gate H·Z.
    Hz(usize),
    /// Controlled-X; the first wire is the control.
    Cnot(usize, usize),
    /// Generalized Toffoli: X on every target when the control is |1>.
    ToffoliN { control: usize, targets: Vec<usize> },
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::H(w) | Gate::X(w) | Gate::Z(w) | Gate::Xhx(w) | Gate::Hz(w) => vec![*w],
            Gate::Cnot(c, t) => vec![*c, *t],
            Gate::ToffoliN { control, targets } => {
                let mut v = vec![*control];
                v.extend_from_slice(targets);
                v
            }
        }
    }

    fn single_qubit_matrix(&self) -> Option<[Complex64; 4]> {
        let r = |x: f64| Complex64::new(x, 0.0);
        match self {
            Gate::H(_) => Some([
                r(FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
                r(-FRAC_1_SQRT_2),
            ]),
            Gate::X(_) => Some([r(0.0), r(1.0), r(1.0), r(0.0)]),
            Gate::Z(_) => Some([r(1.0), r(0.0), r(0.0), r(-1.0)]),
            Gate::Xhx(_) => Some([
                r(-FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
            ]),
            Gate::Hz(_) => Some([
                r(FRAC_1_SQRT_2),
                r(-FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
                r(FRAC_1_SQRT_2),
            ]),
            _ => None,
        }
    }
}

fn cnot_matrix() -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); 16];
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[i * 4 + j] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Ordered gate list applied at one node, and the size of its register
/// (received qubit included for non-root nodes).
#[derive(Debug, Clone)]
pub struct NodeCircuit {
    pub wires: usize,
    pub gates: Vec<Gate>,
}

impl NodeCircuit {
    pub fn trivial() -> Self {
        Self { wires: 1, gates: Vec::new() }
    }
}

/// Per-node circuits, indexed by node id.
#[derive(Debug, Clone)]
pub struct CircuitSpec {
    pub circuits: Vec<NodeCircuit>,
}

/// Qubit index map: which output wire of the sender travels to which
/// successor.
#[derive(Debug, Clone, Default)]
pub struct IndexMap {
    eta: BTreeMap<(NodeId, NodeId), usize>,
}

impl IndexMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, from: NodeId, to: NodeId, wire: usize) {
        self.eta.insert((from, to), wire);
    }

    pub fn get(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.eta.get(&(from, to)).copied()
    }
}

/// Check the circuit and index map against the tree: intermediate nodes keep
/// no qubits, the root keeps at most one, childless nodes hold exactly their
/// received qubit, and the index map is a well-formed injection per node.
pub fn validate_circuit(tree: &RootedTree, spec: &CircuitSpec, eta: &IndexMap) -> Result<()> {
    if spec.circuits.len() != tree.node_count() {
        return Err(Error::InvalidCircuit(format!(
            "circuit spec covers {} nodes, tree has {}",
            spec.circuits.len(),
            tree.node_count()
        )));
    }
    for v in 0..tree.node_count() {
        let circuit = &spec.circuits[v];
        let succ = tree.successors(v);
        if circuit.wires == 0 {
            return Err(Error::InvalidCircuit(format!("node {v} has no wires")));
        }
        if v == tree.root() {
            if circuit.wires < succ.len() || circuit.wires > succ.len() + 1 {
                return Err(Error::InvalidCircuit(format!(
                    "root has {} wires for {} successors; it may retain at most one qubit",
                    circuit.wires,
                    succ.len()
                )));
            }
        } else if succ.is_empty() {
            if circuit.wires != 1 {
                return Err(Error::InvalidCircuit(format!(
                    "childless node {v} must hold exactly its received qubit"
                )));
            }
        } else if circuit.wires != succ.len() {
            return Err(Error::InvalidCircuit(format!(
                "node {v} has {} wires for {} successors; intermediate nodes keep no qubits",
                circuit.wires,
                succ.len()
            )));
        }
        for gate in &circuit.gates {
            let wires = gate.wires();
            for &w in &wires {
                if w >= circuit.wires {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {gate:?} at node {v} references wire {w} of {}",
                        circuit.wires
                    )));
                }
            }
            for (i, &w) in wires.iter().enumerate() {
                if wires[..i].contains(&w) {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {gate:?} at node {v} repeats wire {w}"
                    )));
                }
            }
        }
        let mut used = Vec::new();
        for &u in succ {
            let wire = eta.get(v, u).ok_or_else(|| {
                Error::InvalidCircuit(format!("index map missing entry for edge ({v}, {u})"))
            })?;
            if wire >= circuit.wires {
                return Err(Error::InvalidCircuit(format!(
                    "index map sends wire {wire} of node {v}, which has {} wires",
                    circuit.wires
                )));
            }
            if used.contains(&wire) {
                return Err(Error::InvalidCircuit(format!(
                    "index map reuses wire {wire} at node {v}"
                )));
            }
            used.push(wire);
        }
    }
    Ok(())
}

/// Run the distribution process on the dense engine.
///
/// Returns the state over the root-retained qubits followed by the qubits
/// held by childless nodes in ascending node order. Each edge's channel is
/// applied exactly once, when its qubit is transmitted.
pub fn distribute_dense(
    tree: &RootedTree,
    spec: &CircuitSpec,
    eta: &IndexMap,
    channels: &[ChannelModel],
) -> Result<DensityMatrix> {
    validate_circuit(tree, spec, eta)?;
    if channels.len() != tree.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "{} channels for {} edges",
            channels.len(),
            tree.edge_count()
        )));
    }

    let root = tree.root();
    let total_qubits: usize = spec.circuits[root].wires
        + (0..tree.node_count())
            .filter(|&v| v != root)
            .map(|v| spec.circuits[v].wires - 1)
            .sum::<usize>();
    let mut state = DensityMatrix::zero_state(total_qubits)?;

    let mut next_fresh = 0usize;
    let mut received: Vec<Option<usize>> = vec![None; tree.node_count()];
    let mut kept: Vec<Vec<usize>> = vec![Vec::new(); tree.node_count()];

    for k in 0..=tree.h_max() {
        for &v in tree.level(k) {
            let circuit = &spec.circuits[v];
            // Wire 0 of a non-root node is the received qubit; the rest are
            // fresh |0> registers allocated here.
            let mut wire_to_global = Vec::with_capacity(circuit.wires);
            if v != root {
                wire_to_global.push(received[v].expect("level order guarantees receipt"));
            }
            while wire_to_global.len() < circuit.wires {
                wire_to_global.push(next_fresh);
                next_fresh += 1;
            }

            for gate in &circuit.gates {
                apply_gate(&mut state, gate, &wire_to_global)?;
            }

            let mut sent = vec![false; circuit.wires];
            for &u in tree.successors(v) {
                let wire = eta.get(v, u).expect("validated");
                sent[wire] = true;
                let global = wire_to_global[wire];
                let edge = tree
                    .edge_index(v, u)
                    .ok_or_else(|| Error::InvalidTopology(format!("no edge ({v}, {u})")))?;
                state.apply_channel(&channels[edge], global)?;
                received[u] = Some(global);
            }
            for (wire, &global) in wire_to_global.iter().enumerate() {
                if !sent[wire] {
                    kept[v].push(global);
                }
            }
        }
    }

    let mut output_order = Vec::with_capacity(total_qubits);
    output_order.extend_from_slice(&kept[root]);
    for v in 0..tree.node_count() {
        if v != root && tree.successors(v).is_empty() {
            output_order.extend_from_slice(&kept[v]);
        }
    }
    debug_assert_eq!(output_order.len(), total_qubits);
    state.reorder_qubits(&output_order)
}

fn apply_gate(state: &mut DensityMatrix, gate: &Gate, wire_to_global: &[usize]) -> Result<()> {
    if let Some(m) = gate.single_qubit_matrix() {
        let w = gate.wires()[0];
        return state.apply_unitary(&m, &[wire_to_global[w]]);
    }
    match gate {
        Gate::Cnot(c, t) => {
            state.apply_unitary(&cnot_matrix(), &[wire_to_global[*c], wire_to_global[*t]])
        }
        Gate::ToffoliN { control, targets } => {
            // T_n is the product of commuting CX gates, one per target.
            for &t in targets {
                state.apply_unitary(
                    &cnot_matrix(),
                    &[wire_to_global[*control], wire_to_global[t]],
                )?;
            }
            Ok(())
        }
        _ => unreachable!("single-qubit gates handled above"),
    }
}

/// The concrete schemes shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Local Z-basis scheme for bit-flip (X) channels.
    ZBasis,
    GhzX,
    GhzY,
    GhzZ,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::ZBasis => "z_basis",
            SchemeKind::GhzX => "ghz_x",
            SchemeKind::GhzY => "ghz_y",
            SchemeKind::GhzZ => "ghz_z",
        }
    }

    /// The Pauli axis the scheme's channels must use.
    pub fn axis(&self) -> PauliAxis {
        match self {
            SchemeKind::ZBasis | SchemeKind::GhzX => PauliAxis::X,
            SchemeKind::GhzY => PauliAxis::Y,
            SchemeKind::GhzZ => PauliAxis::Z,
        }
    }

    pub fn basis(&self) -> BasisKind {
        match self {
            SchemeKind::ZBasis => BasisKind::Computational,
            _ => BasisKind::Ghz,
        }
    }

    pub fn is_ghz(&self) -> bool {
        !matches!(self, SchemeKind::ZBasis)
    }

    /// Label space of the final state for a star with `n` end-nodes.
    pub fn label_space(&self, n: usize) -> LabelSpace {
        match self {
            SchemeKind::ZBasis => LabelSpace::z_bits(n - 1),
            _ => LabelSpace::ghz(n),
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "z_basis" | "z_basis_x_channels" => Ok(SchemeKind::ZBasis),
            "ghz_x" => Ok(SchemeKind::GhzX),
            "ghz_y" => Ok(SchemeKind::GhzY),
            "ghz_z" => Ok(SchemeKind::GhzZ),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A scheme instantiated on a star: circuits, index map, and the label
/// algebra the flip engine uses.
#[derive(Debug, Clone)]
pub struct SchemePreset {
    kind: SchemeKind,
    star: StarTopology,
    circuit: CircuitSpec,
    eta: IndexMap,
}

impl SchemePreset {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn star(&self) -> &StarTopology {
        &self.star
    }

    pub fn n(&self) -> usize {
        self.star.n()
    }

    pub fn circuit(&self) -> &CircuitSpec {
        &self.circuit
    }

    /// Mutable circuit access, for deliberately corrupting a preset in
    /// validation negative controls.
    pub fn circuit_mut(&mut self) -> &mut CircuitSpec {
        &mut self.circuit
    }

    pub fn eta(&self) -> &IndexMap {
        &self.eta
    }

    pub fn label_space(&self) -> LabelSpace {
        self.kind.label_space(self.n())
    }

    /// XOR masks on the packed label code, one per channel: the label
    /// algebra of a single Pauli flip on that edge, read off the GHZ
    /// evolution rules (or the Toffoli fan-out for the Z scheme).
    pub fn edge_label_actions(&self) -> Vec<usize> {
        let n = self.n();
        let width = n - 1;
        let full = BitString::full_mask(width);
        let unit = |j: usize| BitString::unit_mask(j, width);
        match self.kind {
            SchemeKind::ZBasis => {
                // A flip on the root edge toggles the Toffoli control and
                // with it every leaf bit; a flip on edge j toggles bit j.
                std::iter::once(full)
                    .chain((1..n).map(unit))
                    .collect()
            }
            SchemeKind::GhzX | SchemeKind::GhzZ => {
                // Root-edge flips become phase flips (b), leaf flips move s.
                std::iter::once(1usize)
                    .chain((1..n).map(|j| unit(j) << 1))
                    .collect()
            }
            SchemeKind::GhzY => {
                // Y acts as the combined X·Z label move on every edge.
                std::iter::once((full << 1) | 1)
                    .chain((1..n).map(|j| (unit(j) << 1) | 1))
                    .collect()
            }
        }
    }

    /// Check that the channels are single-Pauli on the scheme's axis and
    /// return the identity probabilities in edge order.
    pub fn check_channels(&self, channels: &[ChannelModel]) -> Result<Vec<f64>> {
        if channels.len() != self.star.tree().edge_count() {
            return Err(Error::InvalidParameter(format!(
                "{} channels for {} edges",
                channels.len(),
                self.star.tree().edge_count()
            )));
        }
        let mut thetas = Vec::with_capacity(channels.len());
        for (e, model) in channels.iter().enumerate() {
            let single = model.as_single_pauli().ok_or_else(|| {
                Error::UnsupportedModel(format!(
                    "edge {e} is not a single-Pauli channel; the flip engine and the \
                     estimators require one"
                ))
            })?;
            // A channel that never applies its Pauli is compatible with any
            // axis.
            if single.flip_probability() > 0.0 && single.axis() != self.kind.axis() {
                return Err(Error::UnsupportedModel(format!(
                    "edge {e} uses axis {} but scheme {} expects {}",
                    single.axis(),
                    self.kind,
                    self.kind.axis()
                )));
            }
            thetas.push(single.theta());
        }
        Ok(thetas)
    }

    /// Exact outcome distribution by enumeration of all flip patterns,
    /// weighted by the product of per-edge probabilities.
    pub fn exact_distribution(&self, thetas: &[f64]) -> Result<DiagonalState> {
        let edges = self.star.tree().edge_count();
        if thetas.len() != edges {
            return Err(Error::InvalidParameter(format!(
                "{} parameters for {edges} edges",
                thetas.len()
            )));
        }
        if edges > 20 {
            return Err(Error::InvalidParameter(format!(
                "exact enumeration supports at most 20 edges, got {edges}"
            )));
        }
        for &t in thetas {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!("theta {t} outside [0, 1]")));
            }
        }
        let actions = self.edge_label_actions();
        let space = self.label_space();
        let mut probs = vec![0.0; space.len()];
        for pattern in 0..(1usize << edges) {
            let mut weight = 1.0;
            let mut label = 0usize;
            for e in 0..edges {
                if (pattern >> e) & 1 == 1 {
                    weight *= 1.0 - thetas[e];
                    label ^= actions[e];
                } else {
                    weight *= thetas[e];
                }
            }
            probs[label] += weight;
        }
        DiagonalState::new_renormalized(space, probs, 1e-12)
    }

    /// One Monte Carlo shot: sample a flip per edge and fold the label
    /// algebra. Returns the packed label code.
    pub fn simulate_shot(&self, thetas: &[f64], rng: &mut impl Rng) -> usize {
        let actions = self.edge_label_actions();
        let mut label = 0usize;
        for (e, &theta) in thetas.iter().enumerate() {
            if rng.random::<f64>() >= theta {
                label ^= actions[e];
            }
        }
        label
    }

    /// Dense-engine run of the preset circuits.
    pub fn distribute_dense(&self, channels: &[ChannelModel]) -> Result<DensityMatrix> {
        distribute_dense(self.star.tree(), &self.circuit, &self.eta, channels)
    }
}

/// Final state of a distribution run, engine dependent.
#[derive(Debug, Clone)]
pub enum FinalState {
    Dense(DensityMatrix),
    Diagonal(DiagonalState),
}

/// Engine selector for [`distribute`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Dense,
    Flip,
}

/// Run a preset end to end on the chosen engine.
///
/// The flip engine requires single-Pauli channels matching the scheme's
/// axis; the dense engine accepts any mixed-unitary channels.
pub fn distribute(
    preset: &SchemePreset,
    channels: &[ChannelModel],
    engine: EngineKind,
) -> Result<FinalState> {
    match engine {
        EngineKind::Dense => preset.distribute_dense(channels).map(FinalState::Dense),
        EngineKind::Flip => {
            let thetas = preset.check_channels(channels)?;
            preset.exact_distribution(&thetas).map(FinalState::Diagonal)
        }
    }
}

/// Z-basis scheme: the root relays |0> through the star center, which fans
/// the bit out to every leaf with a generalized Toffoli.
pub fn preset_z_basis(star: &StarTopology) -> SchemePreset {
    let n = star.n();
    let center = star.center();
    let mut circuits = vec![NodeCircuit::trivial(); star.tree().node_count()];
    circuits[0] = NodeCircuit { wires: 1, gates: Vec::new() };
    circuits[center] = NodeCircuit {
        wires: n - 1,
        gates: vec![Gate::ToffoliN { control: 0, targets: (1..n - 1).collect() }],
    };
    let mut eta = IndexMap::new();
    eta.set(0, center, 0);
    for j in 0..n - 1 {
        eta.set(center, j + 1, j);
    }
    SchemePreset { kind: SchemeKind::ZBasis, star: star.clone(), circuit: CircuitSpec { circuits }, eta }
}

/// GHZ schemes: the root prepares a Bell pair and keeps the reference
/// qubit; the center fans the transit qubit out into an n-qubit GHZ state.
///
/// For X and Y channels the root and the center each apply a Hadamard
/// around the root edge so that a root-edge flip lands on the phase bit
/// (the gate pair is verified against the dense engine by the test suite).
/// For Z channels a root-edge flip is a phase flip already, and every
/// center-to-leaf transmission is wrapped in Hadamards so that leaf-edge
/// flips move the string bits instead.
pub fn preset_ghz(star: &StarTopology, axis: PauliAxis) -> SchemePreset {
    let n = star.n();
    let center = star.center();
    let kind = match axis {
        PauliAxis::X => SchemeKind::GhzX,
        PauliAxis::Y => SchemeKind::GhzY,
        PauliAxis::Z => SchemeKind::GhzZ,
    };
    let mut circuits = vec![NodeCircuit::trivial(); star.tree().node_count()];
    let toffoli = Gate::ToffoliN { control: 0, targets: (1..n - 1).collect() };
    match kind {
        SchemeKind::GhzX | SchemeKind::GhzY => {
            circuits[0] = NodeCircuit {
                wires: 2,
                gates: vec![Gate::H(0), Gate::Cnot(0, 1), Gate::H(0)],
            };
            circuits[center] = NodeCircuit {
                wires: n - 1,
                gates: vec![Gate::H(0), toffoli],
            };
        }
        SchemeKind::GhzZ => {
            circuits[0] = NodeCircuit { wires: 2, gates: vec![Gate::H(0), Gate::Cnot(0, 1)] };
            let mut gates = vec![toffoli];
            gates.extend((0..n - 1).map(Gate::H));
            circuits[center] = NodeCircuit { wires: n - 1, gates };
            for j in 1..n {
                circuits[j] = NodeCircuit { wires: 1, gates: vec![Gate::H(0)] };
            }
        }
        SchemeKind::ZBasis => unreachable!(),
    }
    let mut eta = IndexMap::new();
    eta.set(0, center, 1);
    for j in 0..n - 1 {
        eta.set(center, j + 1, j);
    }
    SchemePreset { kind, star: star.clone(), circuit: CircuitSpec { circuits }, eta }
}

/// Preset constructor by kind.
pub fn preset(star: &StarTopology, kind: SchemeKind) -> SchemePreset {
    match kind {
        SchemeKind::ZBasis => preset_z_basis(star),
        SchemeKind::GhzX => preset_ghz(star, PauliAxis::X),
        SchemeKind::GhzY => preset_ghz(star, PauliAxis::Y),
        SchemeKind::GhzZ => preset_ghz(star, PauliAxis::Z),
    }
}
