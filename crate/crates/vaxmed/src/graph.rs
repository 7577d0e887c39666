//! Causal DAGs: structure validation, d-separation, edge surgery, and
//! graphical checks of the four mediation identification assumptions.
//!
//! Node identifiers are opaque case-sensitive strings. Graphs here are
//! small (a dozen nodes at most), so d-separation enumerates undirected
//! paths by depth-first search with no caching.

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node `{0}` is not declared in the graph")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("graph has a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("edge {0} -> {1} does not exist")]
    MissingEdge(String, String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

/// Outcome of structural validation on a candidate node/edge list.
///
/// A cycle is a reportable outcome, not a fault; the witness lists the
/// offending nodes with the first one repeated at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DagValidation {
    Valid(CausalDag),
    Cycle(Vec<String>),
}

/// Directed acyclic graph over named nodes.
#[derive(Clone, PartialEq, Eq)]
pub struct CausalDag {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl fmt::Debug for CausalDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        write!(f, "CausalDag({}; {})", self.names.join(","), edges.join(" "))
    }
}

impl CausalDag {
    /// Builds a DAG, rejecting duplicate nodes/edges, self-loops,
    /// undeclared endpoints, and cycles.
    pub fn new<N, S>(nodes: N, edges: &[(&str, &str)]) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = S>,
        S: Into<String>,
    {
        match Self::validate(nodes, edges)? {
            DagValidation::Valid(dag) => Ok(dag),
            DagValidation::Cycle(witness) => Err(GraphError::Cycle(witness)),
        }
    }

    /// Structural validation with an explicit cycle witness on failure.
    pub fn validate<N, S>(nodes: N, edges: &[(&str, &str)]) -> Result<DagValidation, GraphError>
    where
        N: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(name.clone()));
            }
        }
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(from, to) in edges {
            let f = *index
                .get(from)
                .ok_or_else(|| GraphError::UnknownNode(from.to_string()))?;
            let t = *index
                .get(to)
                .ok_or_else(|| GraphError::UnknownNode(to.to_string()))?;
            if f == t {
                return Err(GraphError::SelfLoop(from.to_string()));
            }
            if children[f].contains(&t) {
                return Err(GraphError::DuplicateEdge(from.to_string(), to.to_string()));
            }
            children[f].push(t);
            parents[t].push(f);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let dag = CausalDag {
            names,
            index,
            parents,
            children,
        };
        match dag.find_cycle() {
            Some(witness) => Ok(DagValidation::Cycle(
                witness.into_iter().map(|i| dag.names[i].clone()).collect(),
            )),
            None => Ok(DagValidation::Valid(dag)),
        }
    }

    fn find_cycle(&self) -> Option<Vec<usize>> {
        // Colors: 0 unvisited, 1 on stack, 2 done.
        let n = self.names.len();
        let mut color = vec![0u8; n];
        let mut stack = Vec::new();
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            if let Some(cycle) = self.cycle_dfs(start, &mut color, &mut stack) {
                return Some(cycle);
            }
        }
        None
    }

    fn cycle_dfs(&self, v: usize, color: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        color[v] = 1;
        stack.push(v);
        for &c in &self.children[v] {
            if color[c] == 1 {
                let pos = stack.iter().position(|&x| x == c).unwrap();
                let mut cycle: Vec<usize> = stack[pos..].to_vec();
                cycle.push(c);
                return Some(cycle);
            }
            if color[c] == 0 {
                if let Some(cycle) = self.cycle_dfs(c, color, stack) {
                    return Some(cycle);
                }
            }
        }
        stack.pop();
        color[v] = 2;
        None
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn has_node(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&f), Some(&t)) => self.children[f].contains(&t),
            _ => false,
        }
    }

    /// Edges in declaration-independent sorted order.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (f, kids) in self.children.iter().enumerate() {
            for &t in kids {
                out.push((self.names[f].as_str(), self.names[t].as_str()));
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn idx(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn parents_of(&self, name: &str) -> Result<Vec<&str>, GraphError> {
        let i = self.idx(name)?;
        Ok(self.parents[i].iter().map(|&p| self.names[p].as_str()).collect())
    }

    pub fn children_of(&self, name: &str) -> Result<Vec<&str>, GraphError> {
        let i = self.idx(name)?;
        Ok(self.children[i].iter().map(|&c| self.names[c].as_str()).collect())
    }

    pub(crate) fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub(crate) fn name_of(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Topological order; the graph is acyclic by construction.
    pub(crate) fn topological_order(&self) -> Vec<usize> {
        let n = self.names.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        order
    }

    /// New graph with the listed edges removed; the input is unchanged.
    pub fn remove_edges(&self, edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        let mut out = self.clone();
        for &(from, to) in edges {
            let f = out.idx(from)?;
            let t = out.idx(to)?;
            let pos = out.children[f].iter().position(|&x| x == t);
            match pos {
                Some(p) => {
                    out.children[f].remove(p);
                    let q = out.parents[t].iter().position(|&x| x == f).unwrap();
                    out.parents[t].remove(q);
                }
                None => return Err(GraphError::MissingEdge(from.to_string(), to.to_string())),
            }
        }
        Ok(out)
    }

    /// New graph with every edge out of `node` removed.
    pub fn remove_outgoing(&self, node: &str) -> Result<Self, GraphError> {
        let i = self.idx(node)?;
        let out_edges: Vec<(String, String)> = self.children[i]
            .iter()
            .map(|&c| (self.names[i].clone(), self.names[c].clone()))
            .collect();
        let borrowed: Vec<(&str, &str)> =
            out_edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        self.remove_edges(&borrowed)
    }

    fn descendant_mask(&self, start: usize) -> Vec<bool> {
        // Proper descendants only.
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }

    fn ancestor_mask(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Proper descendants of `node`, sorted by name.
    pub fn descendants(&self, node: &str) -> Result<Vec<&str>, GraphError> {
        let mask = self.descendant_mask(self.idx(node)?);
        Ok(self.mask_names(&mask))
    }

    /// Proper ancestors of `node`, sorted by name.
    pub fn ancestors(&self, node: &str) -> Result<Vec<&str>, GraphError> {
        let mask = self.ancestor_mask(self.idx(node)?);
        Ok(self.mask_names(&mask))
    }

    fn mask_names(&self, mask: &[bool]) -> Vec<&str> {
        let mut out: Vec<&str> = mask
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m)
            .map(|(i, _)| self.names[i].as_str())
            .collect();
        out.sort_unstable();
        out
    }

    fn check_dsep_query(&self, x: &str, y: &str, z: &[&str]) -> Result<(usize, usize, Vec<bool>), GraphError> {
        let xi = self.idx(x)?;
        let yi = self.idx(y)?;
        if xi == yi {
            return Err(GraphError::InvalidQuery(format!("x and y are both `{x}`")));
        }
        let mut zmask = vec![false; self.names.len()];
        for &node in z {
            let i = self.idx(node)?;
            if i == xi || i == yi {
                return Err(GraphError::InvalidQuery(format!(
                    "conditioning set contains endpoint `{node}`"
                )));
            }
            zmask[i] = true;
        }
        Ok((xi, yi, zmask))
    }

    /// Whether `x` and `y` are d-separated given `z`.
    ///
    /// Walks undirected simple paths depth-first and stops at the first
    /// open one. A non-collider blocks when conditioned on; a collider is
    /// open only when itself or one of its descendants is conditioned on.
    pub fn d_separated(&self, x: &str, y: &str, z: &[&str]) -> Result<bool, GraphError> {
        Ok(self.find_open_path(x, y, z)?.is_none())
    }

    /// First open path found between `x` and `y` given `z`, as a node
    /// sequence starting at `x`, or `None` when d-separated.
    pub fn find_open_path(&self, x: &str, y: &str, z: &[&str]) -> Result<Option<Vec<String>>, GraphError> {
        let (xi, yi, zmask) = self.check_dsep_query(x, y, z)?;
        let cond_desc = self.conditioned_or_descendant(&zmask);
        let mut on_path = vec![false; self.names.len()];
        on_path[xi] = true;
        let mut path = vec![xi];
        let found = self.open_path_dfs(xi, None, yi, &zmask, &cond_desc, &mut on_path, &mut path);
        Ok(found.then(|| path.into_iter().map(|i| self.names[i].clone()).collect()))
    }

    /// Nodes that are conditioned on or have a conditioned descendant.
    fn conditioned_or_descendant(&self, zmask: &[bool]) -> Vec<bool> {
        let mut mask = zmask.to_vec();
        for (i, &inz) in zmask.iter().enumerate() {
            if inz {
                for (a, reach) in self.ancestor_mask(i).into_iter().enumerate() {
                    if reach {
                        mask[a] = true;
                    }
                }
            }
        }
        mask
    }

    /// Extends the current path from `v`; `arrived_into` is true when the
    /// previous edge points into `v`. Returns true once `target` is reached
    /// via an open path; `path` then holds the witness.
    #[allow(clippy::too_many_arguments)]
    fn open_path_dfs(
        &self,
        v: usize,
        arrived_into: Option<bool>,
        target: usize,
        zmask: &[bool],
        cond_desc: &[bool],
        on_path: &mut [bool],
        path: &mut Vec<usize>,
    ) -> bool {
        let steps: Vec<(usize, bool)> = self.children[v]
            .iter()
            .map(|&c| (c, false)) // leave along v -> c
            .chain(self.parents[v].iter().map(|&p| (p, true))) // leave against p -> v
            .collect();
        for (next, against_arrow) in steps {
            if on_path[next] {
                continue;
            }
            if let Some(prev_into) = arrived_into {
                // Passing through v: collider iff both edges point into v.
                let leave_into_v = against_arrow;
                let collider = prev_into && leave_into_v;
                let open = if collider { cond_desc[v] } else { !zmask[v] };
                if !open {
                    continue;
                }
            }
            let next_arrived_into = !against_arrow;
            on_path[next] = true;
            path.push(next);
            if next == target
                || self.open_path_dfs(next, Some(next_arrived_into), target, zmask, cond_desc, on_path, path)
            {
                return true;
            }
            path.pop();
            on_path[next] = false;
        }
        false
    }

    /// Nodes that confound the mediator-outcome relation and are themselves
    /// affected by the exposure: descendants of `a` that are ancestors of
    /// `b` and reach `y` by a directed path avoiding `b`.
    pub fn find_exposure_induced_confounders(
        &self,
        a: &str,
        b: &str,
        y: &str,
    ) -> Result<Vec<String>, GraphError> {
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        let yi = self.idx(y)?;
        if ai == bi || ai == yi || bi == yi {
            return Err(GraphError::InvalidQuery(
                "roles a, b, y must be distinct".to_string(),
            ));
        }
        let desc_a = self.descendant_mask(ai);
        let anc_b = self.ancestor_mask(bi);
        let anc_y_avoiding_b = self.ancestors_avoiding(yi, bi);
        let mut out: Vec<String> = (0..self.names.len())
            .filter(|&i| desc_a[i] && anc_b[i] && anc_y_avoiding_b[i])
            .map(|i| self.names[i].clone())
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    fn ancestors_avoiding(&self, target: usize, avoid: usize) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![target];
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if p != avoid && !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen[target] = false;
        seen
    }

    /// Graphical check of the four mediation identification assumptions
    /// for exposure `a`, mediator `b`, outcome `y`, adjustment set `l`.
    pub fn check_nde_assumptions(
        &self,
        a: &str,
        b: &str,
        y: &str,
        l: &[&str],
    ) -> Result<AssumptionReport, GraphError> {
        for (left, right) in [(a, b), (a, y), (b, y)] {
            if left == right {
                return Err(GraphError::InvalidQuery(format!(
                    "roles overlap: `{left}` used twice"
                )));
            }
        }
        for &node in l {
            self.idx(node)?;
            if node == a || node == b || node == y {
                return Err(GraphError::InvalidQuery(format!(
                    "adjustment set contains role node `{node}`"
                )));
            }
        }
        let g_no_a_out = self.remove_outgoing(a)?;
        let g_no_b_out = self.remove_outgoing(b)?;
        let mut z_ab: Vec<&str> = l.to_vec();
        z_ab.push(a);

        let a1 = verdict_from_path(g_no_a_out.find_open_path(a, y, l)?);
        let a2 = verdict_from_path(g_no_b_out.find_open_path(b, y, &z_ab)?);
        let a3 = verdict_from_path(g_no_a_out.find_open_path(a, b, l)?);
        let confounders = self.find_exposure_induced_confounders(a, b, y)?;
        let a4 = if confounders.is_empty() {
            AssumptionVerdict::HoldsGraphically
        } else {
            AssumptionVerdict::Violated(AssumptionWitness::Nodes(confounders))
        };
        Ok(AssumptionReport {
            verdicts: [a1, a2, a3, a4],
        })
    }
}

fn verdict_from_path(open: Option<Vec<String>>) -> AssumptionVerdict {
    match open {
        None => AssumptionVerdict::HoldsGraphically,
        Some(path) => AssumptionVerdict::Violated(AssumptionWitness::OpenPath(path)),
    }
}

/// Evidence attached to a violated assumption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssumptionWitness {
    /// An open path that should be blocked.
    OpenPath(Vec<String>),
    /// Offending nodes (exposure-induced mediator-outcome confounders).
    Nodes(Vec<String>),
}

/// Three-valued verdict for one assumption.
///
/// `HoldsGraphically` flags that the conclusion rests on the graph plus
/// independent-noise semantics, not on distributional faithfulness.
/// `NotDecidableGraphically` is part of the report vocabulary but is not
/// produced by [`CausalDag::check_nde_assumptions`], which resolves even the
/// cross-world assumption structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssumptionVerdict {
    HoldsGraphically,
    Violated(AssumptionWitness),
    NotDecidableGraphically,
}

impl AssumptionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, AssumptionVerdict::HoldsGraphically)
    }
}

impl fmt::Display for AssumptionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssumptionVerdict::HoldsGraphically => write!(f, "holds-graphically"),
            AssumptionVerdict::NotDecidableGraphically => write!(f, "not-decidable-graphically"),
            AssumptionVerdict::Violated(AssumptionWitness::OpenPath(p)) => {
                write!(f, "violated(open path {})", p.join("-"))
            }
            AssumptionVerdict::Violated(AssumptionWitness::Nodes(ns)) => {
                write!(f, "violated({})", ns.join(","))
            }
        }
    }
}

/// Verdicts for assumptions 1 through 4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionReport {
    verdicts: [AssumptionVerdict; 4],
}

impl AssumptionReport {
    /// Verdict for assumption `k`, with `k` in `1..=4`.
    pub fn verdict(&self, k: usize) -> &AssumptionVerdict {
        assert!((1..=4).contains(&k), "assumptions are numbered 1..=4");
        &self.verdicts[k - 1]
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(AssumptionVerdict::holds)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &AssumptionVerdict)> {
        self.verdicts.iter().enumerate().map(|(i, v)| (i + 1, v))
    }
}
