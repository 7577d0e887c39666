//! Structural causal models over small discrete variables.
//!
//! Every node carries an independent exogenous noise variable with finite
//! support `0..k` and a total response table mapping (parent values, noise
//! value) to a node value. All counterfactual machinery reduces to
//! deterministic evaluation at a noise configuration, so cross-world
//! quantities come from evaluating several intervention sets against the
//! same configuration, and exact expectations come from enumerating the
//! product noise space.
//!
//! For enumeration and sampling, noise values whose response rows agree on
//! every parent combination are pre-grouped into probability-summed
//! classes. Estimands are invariant to that regrouping (it is a relabeling
//! of noise support); a test checks class-based and raw enumeration agree.

use crate::estimation::Dataset;
use crate::graph::{CausalDag, GraphError};
use crate::scalar::Scalar;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Node value. Binary nodes use {0, 1}; a perception node may use −1.
pub type Value = i8;

/// Default ceiling on enumerated noise configurations.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

const RATIO_DENOM: i64 = 1_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node `{0}` is not part of the model")]
    UnknownNode(String),
    #[error("node `{node}` was declared twice")]
    DuplicateDeclaration { node: String },
    #[error("node `{node}` has no declaration")]
    MissingDeclaration { node: String },
    #[error("node `{node}`: declared parents do not match the graph")]
    ParentMismatch { node: String },
    #[error("node `{node}`: invalid support (need a strictly increasing, non-empty subset of {{-1,0,1}})")]
    InvalidSupport { node: String },
    #[error("node `{node}`: distribution invalid ({detail})")]
    InvalidDistribution { node: String, detail: String },
    #[error("node `{node}`: probability {p} is not representable at resolution 1/{resolution}")]
    UnrepresentableProbability { node: String, p: f64, resolution: u32 },
    #[error("node `{node}`: expected {expected} table entries, got {got}")]
    TableSize { node: String, expected: usize, got: usize },
    #[error("node `{node}`: table value {value} outside the declared support")]
    TableValue { node: String, value: Value },
    #[error("node `{node}`: independent coupling needs {size} noise values, over the limit")]
    NoiseTooLarge { node: String, size: u128 },
    #[error("value {value} outside the support of `{node}`")]
    ValueOutsideSupport { node: String, value: Value },
    #[error("node `{node}` assigned more than once in the query")]
    DuplicateAssignment { node: String },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("noise configuration does not match the model ({0})")]
    BadNoise(String),
    #[error(
        "enumeration needs {required} noise configurations, over the cap of {cap}; \
         use Monte Carlo sampling (`sample_units`) instead"
    )]
    EnumerationCapExceeded { required: u128, cap: u64 },
}

/// One noise value per node, indexed like the graph's node list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseConfig(pub(crate) Vec<u32>);

impl NoiseConfig {
    pub fn new(values: Vec<u32>) -> Self {
        NoiseConfig(values)
    }
    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

/// Counterfactual query: a target node plus an intervention world.
///
/// An assignment either fixes a node to a constant or fixes it to the
/// value the node takes under a sub-world of constant interventions
/// (shared noise), e.g. `Y` under `{A := 1, B := B^{A := 0}}`. Nesting
/// stops at that depth by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualQuery {
    target: String,
    assignments: Vec<(String, AssignedValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssignedValue {
    Constant(Value),
    /// The assigned node's potential value under these interventions.
    UnderWorld(Vec<(String, Value)>),
}

impl CounterfactualQuery {
    pub fn new(target: impl Into<String>) -> Self {
        CounterfactualQuery {
            target: target.into(),
            assignments: Vec::new(),
        }
    }

    /// Fix `node` to a constant in the outer world.
    pub fn fix(mut self, node: impl Into<String>, value: Value) -> Self {
        self.assignments
            .push((node.into(), AssignedValue::Constant(value)));
        self
    }

    /// Fix `node` to its own potential value under `world`.
    pub fn fix_to_world(mut self, node: impl Into<String>, world: &[(&str, Value)]) -> Self {
        self.assignments.push((
            node.into(),
            AssignedValue::UnderWorld(world.iter().map(|&(n, v)| (n.to_string(), v)).collect()),
        ));
        self
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn assignments(&self) -> &[(String, AssignedValue)] {
        &self.assignments
    }
}

#[derive(Debug)]
struct NodeFunction<T> {
    support: Vec<Value>,
    /// Parent graph indices in the order the response table reads them.
    parents: Vec<usize>,
    noise_probs: Vec<T>,
    /// Dense response: `table[combo * noise_len + u]`.
    table: Vec<Value>,
    /// Noise values grouped by identical response rows: (representative, mass).
    classes: Vec<(u32, T)>,
    /// Cumulative class masses as f64, for sampling.
    class_cdf: Vec<f64>,
}

impl<T: Scalar> NodeFunction<T> {
    fn noise_len(&self) -> usize {
        self.noise_probs.len()
    }

    fn combos(&self) -> usize {
        if self.noise_probs.is_empty() {
            0
        } else {
            self.table.len() / self.noise_probs.len()
        }
    }

    fn build_classes(&mut self) {
        let noise_len = self.noise_len();
        let combos = self.combos();
        let mut first_of: HashMap<Vec<Value>, usize> = HashMap::new();
        let mut classes: Vec<(u32, T)> = Vec::new();
        for u in 0..noise_len {
            let signature: Vec<Value> = (0..combos)
                .map(|c| self.table[c * noise_len + u])
                .collect();
            match first_of.get(&signature) {
                Some(&k) => {
                    let mass = classes[k].1.clone() + self.noise_probs[u].clone();
                    classes[k].1 = mass;
                }
                None => {
                    first_of.insert(signature, classes.len());
                    classes.push((u as u32, self.noise_probs[u].clone()));
                }
            }
        }
        classes.retain(|(_, p)| !p.is_zero());
        let mut acc = 0.0;
        self.class_cdf = classes
            .iter()
            .map(|(_, p)| {
                acc += p.to_f64();
                acc
            })
            .collect();
        self.classes = classes;
    }
}

/// How a conditional distribution's rows share noise.
///
/// `Monotone` realizes all rows from one shared uniform quantile (the event
/// "value below a threshold" is nested across rows), so e.g. the units with
/// `B^{a=0} = 1` are a subset of those with `B^{a=1} = 1`. `Independent`
/// draws each row's value from its own noise coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    #[default]
    Monotone,
    Independent,
}

enum NodeDecl {
    Cpt {
        parents: Vec<String>,
        support: Vec<Value>,
        /// Row-major: one distribution over `support` per parent combo.
        rows: Vec<Vec<f64>>,
        coupling: Coupling,
        resolution: u32,
    },
    Raw {
        parents: Vec<String>,
        support: Vec<Value>,
        noise_probs: Vec<f64>,
        table: Vec<Value>,
    },
}

/// Declarative model construction over a fixed DAG.
pub struct ModelBuilder {
    dag: CausalDag,
    resolution: u32,
    coupling: Coupling,
    decls: Vec<(String, NodeDecl)>,
}

impl ModelBuilder {
    pub fn new(dag: CausalDag) -> Self {
        ModelBuilder {
            dag,
            resolution: 1000,
            coupling: Coupling::Monotone,
            decls: Vec::new(),
        }
    }

    /// Quantile resolution for conditional-probability declarations;
    /// every probability must be a multiple of `1/resolution`.
    pub fn resolution(mut self, resolution: u32) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    /// Binary node: `p1[combo]` is Pr(node = 1) per parent combination.
    /// Combos are row-major in declared parent order (first parent most
    /// significant), each parent's support ascending.
    pub fn bernoulli(mut self, node: &str, parents: &[&str], p1: &[f64]) -> Self {
        let rows = p1.iter().map(|&p| vec![1.0 - p, p]).collect();
        self.decls.push((
            node.to_string(),
            NodeDecl::Cpt {
                parents: parents.iter().map(|s| s.to_string()).collect(),
                support: vec![0, 1],
                rows,
                coupling: self.coupling,
                resolution: self.resolution,
            },
        ));
        self
    }

    /// General discrete node: one distribution over `support` per parent
    /// combination, same row order as [`ModelBuilder::bernoulli`].
    pub fn categorical(
        mut self,
        node: &str,
        parents: &[&str],
        support: &[Value],
        rows: &[Vec<f64>],
    ) -> Self {
        self.decls.push((
            node.to_string(),
            NodeDecl::Cpt {
                parents: parents.iter().map(|s| s.to_string()).collect(),
                support: support.to_vec(),
                rows: rows.to_vec(),
                coupling: self.coupling,
                resolution: self.resolution,
            },
        ));
        self
    }

    /// Fully explicit node: noise distribution plus dense response table
    /// `table[combo * noise_len + u]`.
    pub fn raw_node(
        mut self,
        node: &str,
        parents: &[&str],
        support: &[Value],
        noise_probs: &[f64],
        table: &[Value],
    ) -> Self {
        self.decls.push((
            node.to_string(),
            NodeDecl::Raw {
                parents: parents.iter().map(|s| s.to_string()).collect(),
                support: support.to_vec(),
                noise_probs: noise_probs.to_vec(),
                table: table.to_vec(),
            },
        ));
        self
    }

    pub fn build<T: Scalar>(self) -> Result<StructuralModel<T>, ModelError> {
        let n = self.dag.node_count();
        let mut slots: Vec<Option<NodeFunction<T>>> = (0..n).map(|_| None).collect();
        let mut supports: Vec<Option<Vec<Value>>> = vec![None; n];
        let mut by_index: Vec<Option<(String, NodeDecl)>> = (0..n).map(|_| None).collect();
        for (name, decl) in self.decls {
            let i = self.dag.idx(&name)?;
            if by_index[i].is_some() {
                return Err(ModelError::DuplicateDeclaration { node: name });
            }
            let support = match &decl {
                NodeDecl::Cpt { support, .. } | NodeDecl::Raw { support, .. } => support.clone(),
            };
            check_support(&name, &support)?;
            supports[i] = Some(support);
            by_index[i] = Some((name, decl));
        }
        for (i, slot) in by_index.iter().enumerate() {
            if slot.is_none() {
                return Err(ModelError::MissingDeclaration {
                    node: self.dag.name_of(i).to_string(),
                });
            }
        }
        for (i, slot) in by_index.into_iter().enumerate() {
            let (name, decl) = slot.unwrap();
            let nf = build_node(&self.dag, &name, i, decl, &supports)?;
            slots[i] = Some(nf);
        }
        let nodes: Vec<NodeFunction<T>> = slots.into_iter().map(Option::unwrap).collect();
        let topo = self.dag.topological_order();
        let model = StructuralModel {
            dag: self.dag,
            nodes,
            topo,
        };
        model.check_invariants()?;
        Ok(model)
    }
}

fn check_support(node: &str, support: &[Value]) -> Result<(), ModelError> {
    let ok = !support.is_empty()
        && support.windows(2).all(|w| w[0] < w[1])
        && support.iter().all(|v| (-1..=1).contains(v));
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidSupport {
            node: node.to_string(),
        })
    }
}

fn resolve_parents(
    dag: &CausalDag,
    node: &str,
    declared: &[String],
) -> Result<Vec<usize>, ModelError> {
    let mut idxs = Vec::with_capacity(declared.len());
    for p in declared {
        idxs.push(dag.idx(p)?);
    }
    let mut sorted = idxs.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted != dag.parent_indices(dag.idx(node)?) || sorted.len() != idxs.len() {
        return Err(ModelError::ParentMismatch {
            node: node.to_string(),
        });
    }
    Ok(idxs)
}

/// Converts a probability to exact counts out of `resolution`.
pub(crate) fn to_units(node: &str, p: f64, resolution: u32) -> Result<i64, ModelError> {
    let scaled = p * f64::from(resolution);
    let units = scaled.round();
    if !(0.0..=f64::from(resolution)).contains(&units) || (scaled - units).abs() > 1e-6 {
        return Err(ModelError::UnrepresentableProbability {
            node: node.to_string(),
            p,
            resolution,
        });
    }
    Ok(units as i64)
}

fn build_node<T: Scalar>(
    dag: &CausalDag,
    name: &str,
    index: usize,
    decl: NodeDecl,
    supports: &[Option<Vec<Value>>],
) -> Result<NodeFunction<T>, ModelError> {
    let _ = index;
    match decl {
        NodeDecl::Raw {
            parents,
            support,
            noise_probs,
            table,
        } => {
            let parent_idx = resolve_parents(dag, name, &parents)?;
            let combos: usize = parent_idx
                .iter()
                .map(|&p| supports[p].as_ref().unwrap().len())
                .product();
            let expected = combos * noise_probs.len();
            if table.len() != expected {
                return Err(ModelError::TableSize {
                    node: name.to_string(),
                    expected,
                    got: table.len(),
                });
            }
            if noise_probs.is_empty() || noise_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(ModelError::InvalidDistribution {
                    node: name.to_string(),
                    detail: "noise probabilities must lie in [0,1]".to_string(),
                });
            }
            for &v in &table {
                if !support.contains(&v) {
                    return Err(ModelError::TableValue {
                        node: name.to_string(),
                        value: v,
                    });
                }
            }
            let probs: Vec<T> = noise_probs
                .iter()
                .map(|&p| T::from_ratio((p * RATIO_DENOM as f64).round() as i64, RATIO_DENOM))
                .collect();
            let mut nf = NodeFunction {
                support,
                parents: parent_idx,
                noise_probs: probs,
                table,
                classes: Vec::new(),
                class_cdf: Vec::new(),
            };
            nf.build_classes();
            Ok(nf)
        }
        NodeDecl::Cpt {
            parents,
            support,
            rows,
            coupling,
            resolution,
        } => {
            let parent_idx = resolve_parents(dag, name, &parents)?;
            let combos: usize = parent_idx
                .iter()
                .map(|&p| supports[p].as_ref().unwrap().len())
                .product();
            if rows.len() != combos {
                return Err(ModelError::TableSize {
                    node: name.to_string(),
                    expected: combos,
                    got: rows.len(),
                });
            }
            let res = resolution;
            let mut unit_rows: Vec<Vec<i64>> = Vec::with_capacity(rows.len());
            for row in &rows {
                if row.len() != support.len() {
                    return Err(ModelError::InvalidDistribution {
                        node: name.to_string(),
                        detail: format!(
                            "row has {} weights for a support of {}",
                            row.len(),
                            support.len()
                        ),
                    });
                }
                let units: Vec<i64> = row
                    .iter()
                    .map(|&p| to_units(name, p, res))
                    .collect::<Result<_, _>>()?;
                let total: i64 = units.iter().sum();
                if total != i64::from(res) {
                    return Err(ModelError::InvalidDistribution {
                        node: name.to_string(),
                        detail: format!(
                            "weights sum to {}, expected 1",
                            total as f64 / f64::from(res)
                        ),
                    });
                }
                unit_rows.push(units);
            }
            let (noise_probs, table) = match coupling {
                Coupling::Monotone => realize_monotone::<T>(&support, &unit_rows, res),
                Coupling::Independent => realize_independent::<T>(name, &support, &unit_rows, res)?,
            };
            let mut nf = NodeFunction {
                support,
                parents: parent_idx,
                noise_probs,
                table,
                classes: Vec::new(),
                class_cdf: Vec::new(),
            };
            nf.build_classes();
            Ok(nf)
        }
    }
}

/// Shared-quantile realization: noise is uniform on `0..res`; each row maps
/// the quantile through its inverse CDF.
fn realize_monotone<T: Scalar>(
    support: &[Value],
    unit_rows: &[Vec<i64>],
    res: u32,
) -> (Vec<T>, Vec<Value>) {
    let noise_len = res as usize;
    let probs = vec![T::from_ratio(1, i64::from(res)); noise_len];
    let mut table = Vec::with_capacity(unit_rows.len() * noise_len);
    for units in unit_rows {
        let mut cum = Vec::with_capacity(units.len());
        let mut acc = 0i64;
        for &u in units {
            acc += u;
            cum.push(acc);
        }
        for u in 0..noise_len {
            let k = cum.iter().position(|&c| (u as i64) < c).unwrap();
            table.push(support[k]);
        }
    }
    (probs, table)
}

/// Independent realization: one noise coordinate per row; the noise index
/// encodes a support choice for every row and each combo reads its own.
fn realize_independent<T: Scalar>(
    node: &str,
    support: &[Value],
    unit_rows: &[Vec<i64>],
    res: u32,
) -> Result<(Vec<T>, Vec<Value>), ModelError> {
    let k = support.len();
    let combos = unit_rows.len();
    let size = (k as u128).pow(combos as u32);
    if size > (1u128 << 20) {
        return Err(ModelError::NoiseTooLarge {
            node: node.to_string(),
            size,
        });
    }
    let noise_len = size as usize;
    let mut probs = Vec::with_capacity(noise_len);
    for u in 0..noise_len {
        let mut p = T::one();
        let mut rest = u;
        // Least significant digit belongs to the last row.
        for units in unit_rows.iter().rev() {
            let choice = rest % k;
            rest /= k;
            p = p * T::from_ratio(units[choice], i64::from(res));
        }
        probs.push(p);
    }
    let mut table = Vec::with_capacity(combos * noise_len);
    for (c, _) in unit_rows.iter().enumerate() {
        let digit_pos = combos - 1 - c;
        let stride = k.pow(digit_pos as u32);
        for u in 0..noise_len {
            let choice = (u / stride) % k;
            table.push(support[choice]);
        }
    }
    Ok((probs, table))
}

/// A structural causal model: DAG plus per-node noise and response tables.
#[derive(Debug)]
pub struct StructuralModel<T: Scalar> {
    dag: CausalDag,
    nodes: Vec<NodeFunction<T>>,
    topo: Vec<usize>,
}

impl<T: Scalar> StructuralModel<T> {
    pub fn dag(&self) -> &CausalDag {
        &self.dag
    }

    pub fn node_support(&self, node: &str) -> Result<&[Value], ModelError> {
        Ok(&self.nodes[self.dag.idx(node)?].support)
    }

    pub fn noise_size(&self, node: &str) -> Result<usize, ModelError> {
        Ok(self.nodes[self.dag.idx(node)?].noise_len())
    }

    /// Number of probability-summed noise classes per node (enumeration size).
    pub fn class_sizes(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.classes.len()).collect()
    }

    fn check_invariants(&self) -> Result<(), ModelError> {
        let tol = T::from_ratio(1, RATIO_DENOM);
        for (i, nf) in self.nodes.iter().enumerate() {
            let name = self.dag.name_of(i);
            let sum = nf
                .noise_probs
                .iter()
                .fold(T::zero(), |acc, p| acc + p.clone());
            if (sum - T::one()).abs() > tol {
                return Err(ModelError::InvalidDistribution {
                    node: name.to_string(),
                    detail: "noise probabilities do not sum to 1".to_string(),
                });
            }
            if nf.noise_probs.iter().any(|p| p < &T::zero()) {
                return Err(ModelError::InvalidDistribution {
                    node: name.to_string(),
                    detail: "negative noise probability".to_string(),
                });
            }
            for &v in &nf.table {
                if !nf.support.contains(&v) {
                    return Err(ModelError::TableValue {
                        node: name.to_string(),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// A noise configuration from per-node values; every node must appear.
    pub fn noise_config(&self, by_name: &[(&str, u32)]) -> Result<NoiseConfig, ModelError> {
        let n = self.nodes.len();
        let mut vals = vec![u32::MAX; n];
        for &(name, u) in by_name {
            let i = self.dag.idx(name)?;
            if vals[i] != u32::MAX {
                return Err(ModelError::DuplicateAssignment {
                    node: name.to_string(),
                });
            }
            vals[i] = u;
        }
        if vals.contains(&u32::MAX) {
            return Err(ModelError::BadNoise(
                "every node needs exactly one noise value".to_string(),
            ));
        }
        let cfg = NoiseConfig(vals);
        self.check_noise(&cfg)?;
        Ok(cfg)
    }

    fn check_noise(&self, noise: &NoiseConfig) -> Result<(), ModelError> {
        if noise.0.len() != self.nodes.len() {
            return Err(ModelError::BadNoise(format!(
                "expected {} values, got {}",
                self.nodes.len(),
                noise.0.len()
            )));
        }
        for (i, (&u, nf)) in noise.0.iter().zip(&self.nodes).enumerate() {
            if u as usize >= nf.noise_len() {
                return Err(ModelError::BadNoise(format!(
                    "noise value {u} outside support of `{}`",
                    self.dag.name_of(i)
                )));
            }
        }
        Ok(())
    }

    fn check_value(&self, node_idx: usize, value: Value) -> Result<(), ModelError> {
        if self.nodes[node_idx].support.contains(&value) {
            Ok(())
        } else {
            Err(ModelError::ValueOutsideSupport {
                node: self.dag.name_of(node_idx).to_string(),
                value,
            })
        }
    }

    fn interventions_from(&self, list: &[(&str, Value)]) -> Result<Vec<Option<Value>>, ModelError> {
        let mut interv = vec![None; self.nodes.len()];
        for &(name, value) in list {
            let i = self.dag.idx(name)?;
            if interv[i].is_some() {
                return Err(ModelError::DuplicateAssignment {
                    node: name.to_string(),
                });
            }
            self.check_value(i, value)?;
            interv[i] = Some(value);
        }
        Ok(interv)
    }

    fn eval_into(&self, noise: &[u32], interventions: &[Option<Value>], out: &mut [Value]) {
        for &i in &self.topo {
            if let Some(v) = interventions[i] {
                out[i] = v;
                continue;
            }
            let nf = &self.nodes[i];
            let mut combo = 0usize;
            for &p in &nf.parents {
                let psup = &self.nodes[p].support;
                let pos = psup.iter().position(|&s| s == out[p]).unwrap();
                combo = combo * psup.len() + pos;
            }
            out[i] = nf.table[combo * nf.noise_len() + noise[i] as usize];
        }
    }

    /// Deterministic evaluation under interventions at a noise configuration.
    pub fn evaluate(
        &self,
        noise: &NoiseConfig,
        interventions: &[(&str, Value)],
    ) -> Result<BTreeMap<String, Value>, ModelError> {
        self.check_noise(noise)?;
        let interv = self.interventions_from(interventions)?;
        let mut out = vec![0; self.nodes.len()];
        self.eval_into(&noise.0, &interv, &mut out);
        Ok(out
            .into_iter()
            .enumerate()
            .map(|(i, v)| (self.dag.name_of(i).to_string(), v))
            .collect())
    }

    /// Checks the query statically: names exist, values are in support,
    /// no node is assigned twice, the target is free.
    fn check_query(&self, query: &CounterfactualQuery) -> Result<usize, ModelError> {
        let target = self.dag.idx(query.target())?;
        let mut assigned = vec![false; self.nodes.len()];
        for (name, assignment) in query.assignments() {
            let i = self.dag.idx(name)?;
            if assigned[i] {
                return Err(ModelError::DuplicateAssignment { node: name.clone() });
            }
            assigned[i] = true;
            if i == target {
                return Err(ModelError::InvalidQuery(format!(
                    "target `{name}` cannot be assigned"
                )));
            }
            match assignment {
                AssignedValue::Constant(v) => self.check_value(i, *v)?,
                AssignedValue::UnderWorld(world) => {
                    let mut seen = vec![false; self.nodes.len()];
                    for (wname, wvalue) in world {
                        let wi = self.dag.idx(wname)?;
                        if seen[wi] {
                            return Err(ModelError::DuplicateAssignment { node: wname.clone() });
                        }
                        seen[wi] = true;
                        self.check_value(wi, *wvalue)?;
                    }
                }
            }
        }
        Ok(target)
    }

    fn resolve_assignments(
        &self,
        noise: &[u32],
        query: &CounterfactualQuery,
        scratch: &mut Vec<Value>,
    ) -> Vec<Option<Value>> {
        let mut outer = vec![None; self.nodes.len()];
        for (name, assignment) in query.assignments() {
            let i = self.dag.idx(name).unwrap();
            let value = match assignment {
                AssignedValue::Constant(v) => *v,
                AssignedValue::UnderWorld(world) => {
                    let mut sub = vec![None; self.nodes.len()];
                    for (wname, wvalue) in world {
                        sub[self.dag.idx(wname).unwrap()] = Some(*wvalue);
                    }
                    scratch.resize(self.nodes.len(), 0);
                    self.eval_into(noise, &sub, scratch);
                    scratch[i]
                }
            };
            outer[i] = Some(value);
        }
        outer
    }

    /// The target's value in the query world, at shared noise `noise`.
    pub fn counterfactual(
        &self,
        noise: &NoiseConfig,
        query: &CounterfactualQuery,
    ) -> Result<Value, ModelError> {
        self.check_noise(noise)?;
        let target = self.check_query(query)?;
        let mut scratch = Vec::new();
        let outer = self.resolve_assignments(&noise.0, query, &mut scratch);
        let mut out = vec![0; self.nodes.len()];
        self.eval_into(&noise.0, &outer, &mut out);
        Ok(out[target])
    }

    /// Noise coordinates that can influence the query: for each evaluation
    /// world, the nodes with a directed path to that world's target running
    /// only through unassigned nodes. All other coordinates marginalize out
    /// and are skipped during enumeration.
    fn relevant_noise(&self, query: &CounterfactualQuery) -> Vec<bool> {
        fn mark(dag: &CausalDag, target: usize, assigned: &[bool], relevant: &mut [bool]) {
            let mut seen = vec![false; relevant.len()];
            let mut stack = vec![target];
            seen[target] = true;
            while let Some(u) = stack.pop() {
                if assigned[u] {
                    continue;
                }
                relevant[u] = true;
                for &p in dag.parent_indices(u) {
                    if !seen[p] {
                        seen[p] = true;
                        stack.push(p);
                    }
                }
            }
        }
        let n = self.nodes.len();
        let mut relevant = vec![false; n];
        let mut outer_assigned = vec![false; n];
        for (name, _) in query.assignments() {
            outer_assigned[self.dag.idx(name).unwrap()] = true;
        }
        let target = self.dag.idx(query.target()).unwrap();
        mark(&self.dag, target, &outer_assigned, &mut relevant);
        for (name, assignment) in query.assignments() {
            if let AssignedValue::UnderWorld(world) = assignment {
                let mut sub_assigned = vec![false; n];
                for (wname, _) in world {
                    sub_assigned[self.dag.idx(wname).unwrap()] = true;
                }
                let sub_target = self.dag.idx(name).unwrap();
                mark(&self.dag, sub_target, &sub_assigned, &mut relevant);
            }
        }
        relevant
    }

    /// Exact expectation of the query target over the noise distribution,
    /// by enumeration (default cap [`DEFAULT_ENUMERATION_CAP`]).
    pub fn analytic_expectation(&self, query: &CounterfactualQuery) -> Result<T, ModelError> {
        self.analytic_expectation_capped(query, DEFAULT_ENUMERATION_CAP)
    }

    pub fn analytic_expectation_capped(
        &self,
        query: &CounterfactualQuery,
        cap: u64,
    ) -> Result<T, ModelError> {
        let target = self.check_query(query)?;
        let relevant = self.relevant_noise(query);
        let mut acc = T::zero();
        let mut scratch = Vec::new();
        let mut out = vec![0; self.nodes.len()];
        self.for_each_class_config(cap, &relevant, |noise, prob| {
            let outer = self.resolve_assignments(noise, query, &mut scratch);
            self.eval_into(noise, &outer, &mut out);
            let v = out[target];
            if v != 0 {
                acc = acc.clone() + prob.clone() * T::from_ratio(i64::from(v), 1);
            }
        })?;
        Ok(acc)
    }

    /// Exact joint distribution of `nodes` with no interventions.
    pub fn joint_distribution(&self, nodes: &[&str]) -> Result<Vec<(Vec<Value>, T)>, ModelError> {
        let idxs: Vec<usize> = nodes
            .iter()
            .map(|n| self.dag.idx(n))
            .collect::<Result<_, _>>()?;
        let none = vec![None; self.nodes.len()];
        let mut out = vec![0; self.nodes.len()];
        let mut table: BTreeMap<Vec<Value>, T> = BTreeMap::new();
        let mut relevant = vec![false; self.nodes.len()];
        for &i in &idxs {
            relevant[i] = true;
        }
        // Ancestors of any queried node matter for the joint law.
        let mut stack: Vec<usize> = idxs.clone();
        while let Some(u) = stack.pop() {
            for &p in self.dag.parent_indices(u) {
                if !relevant[p] {
                    relevant[p] = true;
                    stack.push(p);
                }
            }
        }
        self.for_each_class_config(DEFAULT_ENUMERATION_CAP, &relevant, |noise, prob| {
            self.eval_into(noise, &none, &mut out);
            let key: Vec<Value> = idxs.iter().map(|&i| out[i]).collect();
            match table.get_mut(&key) {
                Some(mass) => *mass = mass.clone() + prob.clone(),
                None => {
                    table.insert(key, prob.clone());
                }
            }
        })?;
        Ok(table.into_iter().collect())
    }

    /// All probability-summed noise-class configurations with their masses.
    /// Intended for small models (tests, partition arguments).
    pub fn collapsed_noise_space(&self) -> Result<Vec<(NoiseConfig, T)>, ModelError> {
        let mut space = Vec::new();
        let all = vec![true; self.nodes.len()];
        self.for_each_class_config(DEFAULT_ENUMERATION_CAP, &all, |noise, prob| {
            space.push((NoiseConfig(noise.to_vec()), prob.clone()));
        })?;
        Ok(space)
    }

    /// Enumerates class configurations over the `relevant` coordinates;
    /// irrelevant nodes sit at their first class with no probability factor
    /// (they marginalize to 1 by construction).
    fn for_each_class_config(
        &self,
        cap: u64,
        relevant: &[bool],
        mut f: impl FnMut(&[u32], &T),
    ) -> Result<(), ModelError> {
        let dims: Vec<usize> = self
            .nodes
            .iter()
            .zip(relevant)
            .map(|(n, &r)| if r { n.classes.len() } else { 1 })
            .collect();
        let total: u128 = dims.iter().map(|&d| d as u128).product();
        if total > u128::from(cap) {
            return Err(ModelError::EnumerationCapExceeded {
                required: total,
                cap,
            });
        }
        let n = self.nodes.len();
        let mut digits = vec![0usize; n];
        let mut noise = vec![0u32; n];
        loop {
            let mut prob = T::one();
            for (i, nf) in self.nodes.iter().enumerate() {
                let (rep, mass) = &nf.classes[digits[i]];
                noise[i] = *rep;
                if relevant[i] {
                    prob = prob * mass.clone();
                }
            }
            f(&noise, &prob);
            // Mixed-radix increment, last node fastest.
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < dims[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Draws `n` units observationally; deterministic in `seed`.
    pub fn sample_units(&self, n: usize, seed: u64) -> Result<Dataset, ModelError> {
        self.sample_units_with_counterfactuals(n, seed, &[])
    }

    /// As [`StructuralModel::sample_units`], plus derived columns holding
    /// counterfactual values at each unit's sampled noise. Derived columns
    /// are marked non-observable in the dataset.
    pub fn sample_units_with_counterfactuals(
        &self,
        n: usize,
        seed: u64,
        extras: &[(String, CounterfactualQuery)],
    ) -> Result<Dataset, ModelError> {
        for (_, q) in extras {
            self.check_query(q)?;
        }
        let node_count = self.nodes.len();
        let mut columns: Vec<Vec<Value>> = vec![Vec::with_capacity(n); node_count + extras.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let none = vec![None; node_count];
        let mut noise = vec![0u32; node_count];
        let mut out = vec![0; node_count];
        let mut scratch = Vec::new();
        for _ in 0..n {
            for (i, nf) in self.nodes.iter().enumerate() {
                let r: f64 = rng.gen();
                let k = nf
                    .class_cdf
                    .iter()
                    .position(|&c| r < c)
                    .unwrap_or(nf.classes.len() - 1);
                noise[i] = nf.classes[k].0;
            }
            self.eval_into(&noise, &none, &mut out);
            for (i, col) in columns[..node_count].iter_mut().enumerate() {
                col.push(out[i]);
            }
            for (j, (_, q)) in extras.iter().enumerate() {
                let target = self.dag.idx(q.target()).unwrap();
                let outer = self.resolve_assignments(&noise, q, &mut scratch);
                let mut cf_out = vec![0; node_count];
                self.eval_into(&noise, &outer, &mut cf_out);
                columns[node_count + j].push(cf_out[target]);
            }
        }
        let mut data = Dataset::new();
        for (i, col) in columns.iter().take(node_count).enumerate() {
            data.push_column(self.dag.name_of(i), col.clone(), true)
                .expect("node names are unique");
        }
        for (j, (name, _)) in extras.iter().enumerate() {
            data.push_column(name, columns[node_count + j].clone(), false)
                .map_err(|_| ModelError::DuplicateDeclaration { node: name.clone() })?;
        }
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CausalDag;
    use num_rational::BigRational;

    /// The worked two-decimal example: A randomized, B raised by A,
    /// mediator raising infection risk in both arms.
    pub(crate) fn table1_model<T: Scalar>() -> StructuralModel<T> {
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "B"), ("A", "Y"), ("B", "Y")]).unwrap();
        ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("B", &["A"], &[0.30, 0.70])
            .bernoulli("Y", &["A", "B"], &[0.25, 0.35, 0.14, 0.21])
            .build()
            .unwrap()
    }

    fn q(target: &str) -> CounterfactualQuery {
        CounterfactualQuery::new(target)
    }

    #[test]
    fn full_override_returns_exactly_those_values() {
        let m = table1_model::<f64>();
        let noise = m.noise_config(&[("A", 0), ("B", 500), ("Y", 999)]).unwrap();
        let vals = m
            .evaluate(&noise, &[("A", 1), ("B", 0), ("Y", 1)])
            .unwrap();
        assert_eq!(vals["A"], 1);
        assert_eq!(vals["B"], 0);
        assert_eq!(vals["Y"], 1);
    }

    #[test]
    fn threshold_rows_read_off_the_table() {
        let m = table1_model::<f64>();
        // Ascending support puts the B = 1 mass at the top of the unit
        // interval: B = 1 iff quantile >= Pr(B=0 | A) * res, so the
        // threshold sits at 700 when A=0 and at 300 when A=1.
        let below = m.noise_config(&[("A", 0), ("B", 699), ("Y", 0)]).unwrap();
        let at = m.noise_config(&[("A", 0), ("B", 700), ("Y", 0)]).unwrap();
        assert_eq!(m.evaluate(&below, &[("A", 0)]).unwrap()["B"], 0);
        assert_eq!(m.evaluate(&at, &[("A", 0)]).unwrap()["B"], 1);
        assert_eq!(m.evaluate(&below, &[("A", 1)]).unwrap()["B"], 1);
        let low = m.noise_config(&[("A", 0), ("B", 299), ("Y", 0)]).unwrap();
        assert_eq!(m.evaluate(&low, &[("A", 1)]).unwrap()["B"], 0);
    }

    #[test]
    fn monotone_coupling_nests_events() {
        // No noise value may give B=1 at a=0 but B=0 at a=1.
        let m = table1_model::<f64>();
        for u in 0..m.noise_size("B").unwrap() as u32 {
            let noise = m.noise_config(&[("A", 0), ("B", u), ("Y", 0)]).unwrap();
            let b0 = m.evaluate(&noise, &[("A", 0)]).unwrap()["B"];
            let b1 = m.evaluate(&noise, &[("A", 1)]).unwrap()["B"];
            assert!(b0 <= b1);
        }
    }

    #[test]
    fn counterfactual_composition_at_every_noise() {
        let m = table1_model::<f64>();
        let nested = q("Y").fix("A", 1).fix_to_world("B", &[("A", 1)]);
        let plain = q("Y").fix("A", 1);
        for (noise, _) in m.collapsed_noise_space().unwrap() {
            assert_eq!(
                m.counterfactual(&noise, &nested).unwrap(),
                m.counterfactual(&noise, &plain).unwrap()
            );
        }
    }

    #[test]
    fn table1_expectations() {
        let m = table1_model::<f64>();
        let e1 = m.analytic_expectation(&q("Y").fix("A", 1)).unwrap();
        let e0 = m.analytic_expectation(&q("Y").fix("A", 0)).unwrap();
        let cross = m
            .analytic_expectation(&q("Y").fix("A", 1).fix_to_world("B", &[("A", 0)]))
            .unwrap();
        assert!((e1 - 0.189).abs() < 1e-12);
        assert!((e0 - 0.280).abs() < 1e-12);
        assert!((cross - 0.161).abs() < 1e-12);
        let b0 = m.analytic_expectation(&q("B").fix("A", 0)).unwrap();
        assert!((b0 - 0.30).abs() < 1e-12);
    }

    #[test]
    fn table1_expectations_exact() {
        let m = table1_model::<BigRational>();
        let e1 = m.analytic_expectation(&q("Y").fix("A", 1)).unwrap();
        assert_eq!(e1, BigRational::from_ratio(189, 1000));
        let cross = m
            .analytic_expectation(&q("Y").fix("A", 1).fix_to_world("B", &[("A", 0)]))
            .unwrap();
        assert_eq!(cross, BigRational::from_ratio(161, 1000));
    }

    #[test]
    fn exact_and_float_enumeration_agree() {
        let mf = table1_model::<f64>();
        let mq = table1_model::<BigRational>();
        let query = q("Y").fix("A", 1).fix_to_world("B", &[("A", 0)]);
        let f = mf.analytic_expectation(&query).unwrap();
        let r = mq.analytic_expectation(&query).unwrap().to_f64();
        assert!((f - r).abs() < 1e-14);
    }

    #[test]
    fn class_collapse_matches_raw_enumeration() {
        // Same model built with resolution 1000 and with raw minimal noise.
        let m = table1_model::<f64>();
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "B"), ("A", "Y"), ("B", "Y")]).unwrap();
        // Hand-collapsed intervals of the shared quantile.
        let raw = ModelBuilder::new(dag)
            .raw_node("A", &[], &[0, 1], &[0.5, 0.5], &[1, 0])
            .raw_node(
                "B",
                &["A"],
                &[0, 1],
                &[0.30, 0.40, 0.30],
                // u in {<0.3, 0.3..0.7, >=0.7} for rows a=0, a=1
                &[1, 0, 0, 1, 1, 0],
            )
            .raw_node(
                "Y",
                &["A", "B"],
                &[0, 1],
                &[0.14, 0.07, 0.04, 0.10, 0.65],
                // rows (a,b) = (0,0),(0,1),(1,0),(1,1); intervals at
                // 0.14 / 0.21 / 0.25 / 0.35 thresholds
                &[
                    1, 1, 1, 0, 0, // 0.25
                    1, 1, 1, 1, 0, // 0.35
                    1, 0, 0, 0, 0, // 0.14
                    1, 1, 0, 0, 0, // 0.21
                ],
            )
            .build::<f64>()
            .unwrap();
        for query in [
            q("Y").fix("A", 1),
            q("Y").fix("A", 0),
            q("Y").fix("A", 1).fix_to_world("B", &[("A", 0)]),
        ] {
            let a = m.analytic_expectation(&query).unwrap();
            let b = raw.analytic_expectation(&query).unwrap();
            assert!((a - b).abs() < 1e-12, "{query:?}: {a} vs {b}");
        }
        // The resolution-1000 model really collapses to the raw class counts.
        assert_eq!(m.class_sizes(), vec![2, 3, 5]);
    }

    #[test]
    fn expectation_partitions_over_a_node_class() {
        let m = table1_model::<f64>();
        let query = q("Y").fix("A", 1);
        let total = m.analytic_expectation(&query).unwrap();
        // Partition the noise space by B's class and recombine.
        let space = m.collapsed_noise_space().unwrap();
        let b_idx = 1usize;
        let mut by_class: BTreeMap<u32, f64> = BTreeMap::new();
        for (noise, p) in &space {
            let v = m.counterfactual(noise, &query).unwrap();
            *by_class.entry(noise.values()[b_idx]).or_insert(0.0) += p * f64::from(v);
        }
        let recombined: f64 = by_class.values().sum();
        assert!((recombined - total).abs() < 1e-12);
    }

    #[test]
    fn intervened_noise_is_irrelevant() {
        // Permuting B's noise distribution cannot change expectations under do(B).
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "B"), ("A", "Y"), ("B", "Y")]).unwrap();
        let shuffled = ModelBuilder::new(dag)
            .raw_node("A", &[], &[0, 1], &[0.5, 0.5], &[1, 0])
            .raw_node("B", &["A"], &[0, 1], &[0.40, 0.30, 0.30], &[0, 1, 0, 1, 0, 1])
            .raw_node(
                "Y",
                &["A", "B"],
                &[0, 1],
                &[0.14, 0.07, 0.04, 0.10, 0.65],
                &[
                    1, 1, 1, 0, 0, //
                    1, 1, 1, 1, 0, //
                    1, 0, 0, 0, 0, //
                    1, 1, 0, 0, 0,
                ],
            )
            .build::<f64>()
            .unwrap();
        let m = table1_model::<f64>();
        for b in [0, 1] {
            for a in [0, 1] {
                let query = q("Y").fix("A", a).fix("B", b);
                let lhs = m.analytic_expectation(&query).unwrap();
                let rhs = shuffled.analytic_expectation(&query).unwrap();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn independent_coupling_changes_joints_not_margins() {
        let dag = CausalDag::new(["A", "B"], &[("A", "B")]).unwrap();
        let build = |coupling| {
            ModelBuilder::new(CausalDag::new(["A", "B"], &[("A", "B")]).unwrap())
                .coupling(coupling)
                .bernoulli("A", &[], &[0.5])
                .bernoulli("B", &["A"], &[0.30, 0.70])
                .build::<f64>()
                .unwrap()
        };
        let _ = dag;
        let mono = build(Coupling::Monotone);
        let indep = build(Coupling::Independent);
        let qb = |a| q("B").fix("A", a);
        for a in [0, 1] {
            let lhs = mono.analytic_expectation(&qb(a)).unwrap();
            let rhs = indep.analytic_expectation(&qb(a)).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
        // Joint law of (B^{a=0}, B^{a=1}) differs: count noise classes where
        // both worlds give B=1.
        let both = |m: &StructuralModel<f64>| {
            let mut p = 0.0;
            for (noise, mass) in m.collapsed_noise_space().unwrap() {
                let b0 = m.counterfactual(&noise, &qb(0)).unwrap();
                let b1 = m.counterfactual(&noise, &qb(1)).unwrap();
                if b0 == 1 && b1 == 1 {
                    p += mass;
                }
            }
            p
        };
        assert!((both(&mono) - 0.30).abs() < 1e-12);
        assert!((both(&indep) - 0.21).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let m = table1_model::<f64>();
        // With A intervened only B (3 classes) and Y (5 classes) count.
        let err = m
            .analytic_expectation_capped(&q("Y").fix("A", 1), 4)
            .unwrap_err();
        match err {
            ModelError::EnumerationCapExceeded { required, cap } => {
                assert_eq!(required, 15);
                assert_eq!(cap, 4);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.to_string().contains("Monte Carlo"));
    }

    #[test]
    fn irrelevant_noise_is_not_enumerated() {
        // An observational query on A alone must not enumerate B or Y.
        let m = table1_model::<f64>();
        let e = m.analytic_expectation_capped(&q("A"), 2).unwrap();
        assert!((e - 0.5).abs() < 1e-12);
    }

    #[test]
    fn joint_distribution_masses() {
        let m = table1_model::<f64>();
        let joint = m.joint_distribution(&["A", "B"]).unwrap();
        let total: f64 = joint.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let p_a1_b1 = joint
            .iter()
            .find(|(k, _)| k == &vec![1, 1])
            .map(|(_, p)| *p)
            .unwrap();
        assert!((p_a1_b1 - 0.35).abs() < 1e-12);
    }

    #[test]
    fn query_validation_errors() {
        let m = table1_model::<f64>();
        let noise = m.noise_config(&[("A", 0), ("B", 0), ("Y", 0)]).unwrap();
        assert!(matches!(
            m.counterfactual(&noise, &q("Y").fix("A", 2)),
            Err(ModelError::ValueOutsideSupport { .. })
        ));
        assert!(matches!(
            m.counterfactual(&noise, &q("Y").fix("A", 1).fix("A", 0)),
            Err(ModelError::DuplicateAssignment { .. })
        ));
        assert!(matches!(
            m.counterfactual(&noise, &q("Z").fix("A", 1)),
            Err(ModelError::Graph(GraphError::UnknownNode(_)))
        ));
        assert!(matches!(
            m.counterfactual(&noise, &q("Y").fix("Y", 1)),
            Err(ModelError::InvalidQuery(_))
        ));
    }

    #[test]
    fn builder_validation_errors() {
        let dag = || CausalDag::new(["A", "B"], &[("A", "B")]).unwrap();
        // Weights not summing to one name the node.
        let err = ModelBuilder::new(dag())
            .bernoulli("A", &[], &[0.5])
            .categorical("B", &["A"], &[0, 1], &[vec![0.5, 0.4], vec![0.3, 0.7]])
            .build::<f64>()
            .unwrap_err();
        assert!(err.to_string().contains('B'), "{err}");
        // Missing declaration.
        assert!(matches!(
            ModelBuilder::new(dag())
                .bernoulli("A", &[], &[0.5])
                .build::<f64>(),
            Err(ModelError::MissingDeclaration { .. })
        ));
        // Wrong parent set.
        assert!(matches!(
            ModelBuilder::new(dag())
                .bernoulli("A", &[], &[0.5])
                .bernoulli("B", &[], &[0.5])
                .build::<f64>(),
            Err(ModelError::ParentMismatch { .. })
        ));
        // Unrepresentable probability at the declared resolution.
        assert!(matches!(
            ModelBuilder::new(dag())
                .resolution(10)
                .bernoulli("A", &[], &[0.5])
                .bernoulli("B", &["A"], &[0.33, 0.7])
                .build::<f64>(),
            Err(ModelError::UnrepresentableProbability { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_consistent() {
        let m = table1_model::<f64>();
        let d1 = m.sample_units(2000, 42).unwrap();
        let d2 = m.sample_units(2000, 42).unwrap();
        assert_eq!(d1.column("B").unwrap(), d2.column("B").unwrap());
        let d3 = m.sample_units(2000, 43).unwrap();
        assert_ne!(d1.column("B").unwrap(), d3.column("B").unwrap());
    }

    #[test]
    fn sample_frequencies_match_analytic() {
        let m = table1_model::<f64>();
        let n = 1_000_000;
        let data = m.sample_units(n, 7).unwrap();
        let a = data.column("A").unwrap();
        let b = data.column("B").unwrap();
        let (mut n1, mut b1) = (0u64, 0u64);
        for i in 0..n {
            if a[i] == 1 {
                n1 += 1;
                if b[i] == 1 {
                    b1 += 1;
                }
            }
        }
        let phat = b1 as f64 / n1 as f64;
        let se = (0.7 * 0.3 / n1 as f64).sqrt();
        assert!(
            (phat - 0.70).abs() < 3.0 * se,
            "phat={phat}, se={se}"
        );
    }

    #[test]
    fn monte_carlo_counterfactual_mean_converges() {
        let m = table1_model::<f64>();
        let query = q("Y").fix("A", 1).fix_to_world("B", &[("A", 0)]);
        let n = 1_000_000;
        let data = m
            .sample_units_with_counterfactuals(n, 11, &[("cf".to_string(), query.clone())])
            .unwrap();
        let col = data.column("cf").unwrap();
        let mean = col.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
        let exact = m.analytic_expectation(&query).unwrap();
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((mean - exact).abs() < 4.0 * se, "mean={mean}, exact={exact}");
        assert!(!data.is_observable("cf").unwrap());
    }

    #[test]
    fn single_unit_sample_within_support() {
        let m = table1_model::<f64>();
        let d = m.sample_units(1, 0).unwrap();
        for col in ["A", "B", "Y"] {
            let v = d.column(col).unwrap()[0];
            assert!(m.node_support(col).unwrap().contains(&v));
        }
    }
}
