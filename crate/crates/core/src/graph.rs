//! Transition graphs over measurement domains.
//!
//! Nodes are the regular and switching domains, ordered along `y`. The
//! predicted graph follows from the stabilization conditions and the
//! placement of the equilibria; the empirical graph is read off simulated
//! trajectories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::controller::{check_conditions, DilutionSchedule};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantizer::{DomainLabel, RegionSet};
use crate::scalar::Scalar;
use crate::simulator::{Classification, SimOutcome};

pub type Edge = (DomainLabel, DomainLabel);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeInfo {
    /// Holds a stable (possibly sliding) equilibrium.
    pub equilibrium: bool,
    /// Never left once entered.
    pub invariant: bool,
}

impl NodeInfo {
    pub fn is_transient(&self) -> bool {
        !self.equilibrium && !self.invariant
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransitionGraph {
    nodes: BTreeMap<DomainLabel, NodeInfo>,
    edges: BTreeSet<Edge>,
}

impl TransitionGraph {
    pub fn empty() -> Self {
        TransitionGraph::default()
    }

    fn with_domains(n: usize) -> Self {
        let nodes = (2..=2 * n)
            .map(|r| (DomainLabel::from_rank(r), NodeInfo::default()))
            .collect();
        TransitionGraph {
            nodes,
            edges: BTreeSet::new(),
        }
    }

    fn add_edge(&mut self, from: DomainLabel, to: DomainLabel) {
        debug_assert!(from.is_adjacent(&to));
        self.nodes.entry(from).or_default();
        self.nodes.entry(to).or_default();
        self.edges.insert((from, to));
    }

    fn node_mut(&mut self, l: DomainLabel) -> &mut NodeInfo {
        self.nodes.entry(l).or_default()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (DomainLabel, NodeInfo)> + '_ {
        self.nodes.iter().map(|(l, i)| (*l, *i))
    }

    pub fn node(&self, l: DomainLabel) -> Option<NodeInfo> {
        self.nodes.get(&l).copied()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, from: DomainLabel, to: DomainLabel) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn downward_edges(&self) -> Vec<Edge> {
        self.edges
            .iter()
            .filter(|(a, b)| a.rank() > b.rank())
            .copied()
            .collect()
    }

    /// Single upward path: no downward edge and at most one successor per
    /// regular node.
    pub fn is_deterministic(&self) -> bool {
        self.downward_edges().is_empty()
            && self
                .nodes
                .keys()
                .filter(|l| l.is_regular())
                .all(|l| self.edges.iter().filter(|(a, _)| a == l).count() <= 1)
    }

    /// Successor lists in `y` order.
    pub fn adjacency(&self) -> Vec<(String, Vec<String>)> {
        self.nodes
            .keys()
            .map(|l| {
                let to = self
                    .edges
                    .iter()
                    .filter(|(a, _)| a == l)
                    .map(|(_, b)| b.id())
                    .collect();
                (l.id(), to)
            })
            .collect()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self
                .nodes
                .iter()
                .map(|(l, i)| NodeJson {
                    id: l.id(),
                    regular: l.is_regular(),
                    equilibrium: i.equilibrium,
                    invariant: i.invariant,
                })
                .collect(),
            edges: self.edges.iter().map(|(a, b)| [a.id(), b.id()]).collect(),
            deterministic: self.is_deterministic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: String,
    pub regular: bool,
    pub equilibrium: bool,
    pub invariant: bool,
}

/// Serializable form of a graph; nodes and edges in `y` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<[String; 2]>,
    pub deterministic: bool,
}

/// Graph implied by the stabilization conditions.
///
/// The upward chain is always present. A violated lower-bound condition at
/// region `i` adds the edge `Y_i -> Y_{i-1|i}` and puts a sliding
/// equilibrium in that switching domain (for `i = 1`, washout in `Y_1`). A
/// violated upper-bound condition puts the operating point in `Y_i`, or adds
/// a downward edge when it lies below the region. The last region is
/// invariant when its conditions hold.
pub fn predict_graph<T: Scalar>(
    p: &ModelParams<T>,
    rs: &RegionSet<T>,
    sched: &DilutionSchedule<T>,
) -> Result<TransitionGraph> {
    let rep = check_conditions(p, rs, sched)?;
    let n = rs.n();
    let mut g = TransitionGraph::with_domains(n);
    for i in 1..n {
        g.add_edge(DomainLabel::Regular(i), DomainLabel::Switching(i));
        g.add_edge(DomainLabel::Switching(i), DomainLabel::Regular(i + 1));
    }
    let fall = |g: &mut TransitionGraph, i: usize| {
        if i > 1 {
            g.add_edge(DomainLabel::Regular(i), DomainLabel::Switching(i - 1));
        } else {
            g.node_mut(DomainLabel::Regular(1)).equilibrium = true;
        }
    };
    for i in 1..=n {
        if !rep.cond_lb[i - 1] {
            fall(&mut g, i);
            if i > 1 {
                g.node_mut(DomainLabel::Switching(i - 1)).equilibrium = true;
            }
        }
        if i < n && !rep.cond_ub[i - 1] {
            match p.y_equilibria(sched.rate(i)) {
                Ok((ya, _)) if ya >= rs.lower_of(i) => {
                    g.node_mut(DomainLabel::Regular(i)).equilibrium = true
                }
                _ => fall(&mut g, i),
            }
        }
    }
    let top = DomainLabel::Regular(n);
    if rep.cond_lb[n - 1] && rep.cond_top {
        let node = g.node_mut(top);
        node.equilibrium = true;
        node.invariant = true;
    } else {
        fall(&mut g, n);
    }
    Ok(g)
}

/// Graph of the domain moves observed in a batch. Nodes are the visited
/// domains; a node holding a terminal state and never left is invariant.
pub fn empirical_graph<'a, T: Scalar>(
    outcomes: impl IntoIterator<Item = &'a SimOutcome<T>>,
) -> Result<TransitionGraph> {
    let mut g = TransitionGraph::empty();
    let mut terminal = BTreeSet::new();
    let mut any = false;
    for o in outcomes {
        any = true;
        g.node_mut(o.initial_label);
        g.node_mut(o.final_label);
        for &(a, b) in &o.transitions {
            g.add_edge(a, b);
        }
        let rest = match o.classification {
            Classification::ConvergedToTarget | Classification::TrappedAt { .. } => {
                Some(o.final_label)
            }
            Classification::SlidingEquilibrium { boundary } => {
                Some(DomainLabel::Switching(boundary))
            }
            Classification::Washout => Some(DomainLabel::Regular(1)),
            Classification::Undecided => None,
        };
        if let Some(l) = rest {
            g.node_mut(l).equilibrium = true;
            terminal.insert(l);
        }
    }
    if !any {
        return Err(Error::domain("batch", "no outcomes"));
    }
    for l in terminal {
        if !g.edges.iter().any(|(a, _)| *a == l) {
            g.node_mut(l).invariant = true;
        }
    }
    Ok(g)
}

/// Edge-set comparison of two graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDiff {
    /// In the reference but not observed.
    pub missing: Vec<[String; 2]>,
    /// Observed but not in the reference.
    pub extra: Vec<[String; 2]>,
}

impl GraphDiff {
    pub fn is_exact(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

pub fn compare(reference: &TransitionGraph, observed: &TransitionGraph) -> GraphDiff {
    let ids = |e: &Edge| [e.0.id(), e.1.id()];
    GraphDiff {
        missing: reference
            .edges
            .difference(&observed.edges)
            .map(ids)
            .collect(),
        extra: observed
            .edges
            .difference(&reference.edges)
            .map(ids)
            .collect(),
    }
}

/// DOT rendering: ellipses for regular domains, boxes for switching ones,
/// grey fill for equilibria and a double border for invariant nodes.
pub fn export_dot(g: &TransitionGraph) -> String {
    let mut out = String::from("digraph transitions {\n");
    if !g.nodes.is_empty() {
        out.push_str("  rankdir=BT;\n");
    }
    for (l, info) in &g.nodes {
        let mut attrs = vec![format!(
            "shape={}",
            if l.is_regular() { "ellipse" } else { "box" }
        )];
        if info.equilibrium {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=grey".into());
        }
        if info.invariant {
            attrs.push("peripheries=2".into());
        }
        let _ = writeln!(out, "  \"{}\" [{}];", l.id(), attrs.join(", "));
    }
    for (a, b) in &g.edges {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", a.id(), b.id());
    }
    out.push_str("}\n");
    out
}
