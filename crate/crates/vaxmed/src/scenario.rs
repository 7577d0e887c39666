//! Scenario files: a versioned JSON format declaring a model, role
//! bindings, requested analyses, and sampling options.
//!
//! Parsing is strict (unknown fields rejected, every semantic problem
//! reported with the field it sits on) so that `check` can vet a file
//! before anything runs. A scenario may declare a unit-level model, a
//! grouped interference model, or both; each analysis states which parts
//! it needs and validation cross-checks the requests against the
//! declared roles.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CausalDag;
use crate::interference::{GroupedModel, InterferenceError, Weighting};
use crate::scalar::Scalar;
use crate::scm::{Coupling, ModelBuilder, ModelError, StructuralModel, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// One located problem in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// Dotted path of the offending field, e.g. `model.functions.B`.
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn render_issues(issues: &[Issue]) -> String {
    let lines: Vec<String> = issues.iter().map(Issue::to_string).collect();
    format!("invalid scenario: {}", lines.join("; "))
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", render_issues(.0))]
    Invalid(Vec<Issue>),
    /// Well-formed but too large to enumerate.
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A complete scenario: what to build, what to compute, how to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<Roles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<GroupsSection>,
    /// Analysis requests in the compact string form understood by
    /// [`Analysis::parse`], e.g. `"nde"` or `"cde:0"`.
    pub analyses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
}

/// Unit-level structural model: DAG plus one response declaration per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dag: DagSpec,
    pub functions: BTreeMap<String, NodeSpec>,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    #[serde(default)]
    pub coupling: CouplingSpec,
}

fn default_resolution() -> u32 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

/// Response declaration: binary shorthand (`p1` = Pr(node=1) per parent
/// combination) or a general categorical table (`support` + `rows`).
/// Parent combinations are row-major in declared parent order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingSpec {
    #[default]
    Monotone,
    Independent,
}

impl From<CouplingSpec> for Coupling {
    fn from(spec: CouplingSpec) -> Coupling {
        match spec {
            CouplingSpec::Monotone => Coupling::Monotone,
            CouplingSpec::Independent => Coupling::Independent,
        }
    }
}

/// Which node plays which part. `a`/`y` anchor every unit-level analysis;
/// the rest are needed only by analyses that use them. `l` is the
/// adjustment or conditioning set and may deliberately include nodes that
/// make a test invalid (the graph checks will say so).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Roles {
    pub a: String,
    pub y: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_m: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_sc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// Negative-control flag: 1 marks units whose outcome ignores the
    /// exposure's protective mechanism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub l: Vec<String>,
}

impl Roles {
    /// Mediator nodes for graph readings: `b` if bound, else the split pair.
    pub fn behaviour_nodes(&self) -> Vec<&str> {
        let mut out = Vec::new();
        if let Some(b) = &self.b {
            out.push(b.as_str());
        }
        if let Some(bm) = &self.b_m {
            out.push(bm.as_str());
        }
        if let Some(bsc) = &self.b_sc {
            out.push(bsc.as_str());
        }
        out
    }

    pub fn l_refs(&self) -> Vec<&str> {
        self.l.iter().map(String::as_str).collect()
    }
}

/// Grouped interference model: every group shares one response template.
/// `mediator_p1` is indexed by own assignment (and by the
/// vaccinated-others count too when `mediator_reads_summary`);
/// `outcome_p1` is laid out as (a, b) pairs by count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupsSection {
    pub sizes: Vec<usize>,
    /// Assignment probability for the average (Bernoulli-allocation) effects.
    pub alpha: f64,
    #[serde(default)]
    pub mediator_reads_summary: bool,
    pub mediator_p1: Vec<f64>,
    pub outcome_p1: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub n: usize,
    pub seed: u64,
    /// Bootstrap replicates for estimator standard errors; omit to skip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<u32>,
}

/// A parsed analysis request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analysis {
    TotalEffect,
    Nde,
    Nie,
    Cde(Value),
    TrialEstimand,
    PathSpecific,
    Assumptions,
    PluginNde,
    PluginTotal,
    Positivity,
    MisclassifyNde(f64),
    AltOutcome,
    PanelInterpretation,
    NegativeControl,
    InterferenceTotal,
    InterferenceNde,
    InterferenceSpillover,
    InterferenceAverageTotal(Weighting),
    InterferenceAverageNde(Weighting),
}

impl Analysis {
    pub fn parse(text: &str) -> Result<Analysis, String> {
        if let Some(level) = text.strip_prefix("cde:") {
            let v: Value = level
                .parse()
                .map_err(|_| format!("mediator level `{level}` is not a small integer"))?;
            return Ok(Analysis::Cde(v));
        }
        if let Some(q) = text.strip_prefix("misclassify_nde:") {
            let q: f64 = q
                .parse()
                .map_err(|_| format!("flip probability `{q}` is not a number"))?;
            if !(0.0..=0.5).contains(&q) {
                return Err(format!("flip probability {q} outside [0, 0.5]"));
            }
            return Ok(Analysis::MisclassifyNde(q));
        }
        Ok(match text {
            "tau_rw" => Analysis::TotalEffect,
            "nde" => Analysis::Nde,
            "nie" => Analysis::Nie,
            "tau_vt" => Analysis::TrialEstimand,
            "path_specific" => Analysis::PathSpecific,
            "assumptions" => Analysis::Assumptions,
            "plugin_nde" => Analysis::PluginNde,
            "plugin_total" => Analysis::PluginTotal,
            "positivity" => Analysis::Positivity,
            "alt_outcome" => Analysis::AltOutcome,
            "panel_interpretation" => Analysis::PanelInterpretation,
            "negative_control" => Analysis::NegativeControl,
            "interference_total" => Analysis::InterferenceTotal,
            "interference_nde" => Analysis::InterferenceNde,
            "interference_spillover" => Analysis::InterferenceSpillover,
            "interference_average_total:units" => {
                Analysis::InterferenceAverageTotal(Weighting::UniformOverUnits)
            }
            "interference_average_total:groups" => {
                Analysis::InterferenceAverageTotal(Weighting::UniformOverGroups)
            }
            "interference_average_nde:units" => {
                Analysis::InterferenceAverageNde(Weighting::UniformOverUnits)
            }
            "interference_average_nde:groups" => {
                Analysis::InterferenceAverageNde(Weighting::UniformOverGroups)
            }
            other => return Err(format!("unknown analysis `{other}`")),
        })
    }

    fn needs_sample(&self) -> bool {
        matches!(
            self,
            Analysis::PluginNde
                | Analysis::PluginTotal
                | Analysis::Positivity
                | Analysis::MisclassifyNde(_)
                | Analysis::AltOutcome
                | Analysis::NegativeControl
        )
    }

    fn needs_groups(&self) -> bool {
        matches!(
            self,
            Analysis::InterferenceTotal
                | Analysis::InterferenceNde
                | Analysis::InterferenceSpillover
                | Analysis::InterferenceAverageTotal(_)
                | Analysis::InterferenceAverageNde(_)
        )
    }

    fn needs_model(&self) -> bool {
        !self.needs_groups()
    }
}

impl std::fmt::Display for Analysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let weight_tag = |w: &Weighting| match w {
            Weighting::UniformOverUnits => "units",
            Weighting::UniformOverGroups => "groups",
        };
        match self {
            Analysis::TotalEffect => f.write_str("tau_rw"),
            Analysis::Nde => f.write_str("nde"),
            Analysis::Nie => f.write_str("nie"),
            Analysis::Cde(v) => write!(f, "cde:{v}"),
            Analysis::TrialEstimand => f.write_str("tau_vt"),
            Analysis::PathSpecific => f.write_str("path_specific"),
            Analysis::Assumptions => f.write_str("assumptions"),
            Analysis::PluginNde => f.write_str("plugin_nde"),
            Analysis::PluginTotal => f.write_str("plugin_total"),
            Analysis::Positivity => f.write_str("positivity"),
            Analysis::MisclassifyNde(q) => write!(f, "misclassify_nde:{q}"),
            Analysis::AltOutcome => f.write_str("alt_outcome"),
            Analysis::PanelInterpretation => f.write_str("panel_interpretation"),
            Analysis::NegativeControl => f.write_str("negative_control"),
            Analysis::InterferenceTotal => f.write_str("interference_total"),
            Analysis::InterferenceNde => f.write_str("interference_nde"),
            Analysis::InterferenceSpillover => f.write_str("interference_spillover"),
            Analysis::InterferenceAverageTotal(w) => {
                write!(f, "interference_average_total:{}", weight_tag(w))
            }
            Analysis::InterferenceAverageNde(w) => {
                write!(f, "interference_average_nde:{}", weight_tag(w))
            }
        }
    }
}

/// Parses and fully validates a scenario from JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let issues = scenario.validate();
    if issues.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(issues))
    }
}

/// Canonical JSON rendering; `parse_scenario` inverts it exactly.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let mut text =
        serde_json::to_string_pretty(scenario).expect("scenario types serialize infallibly");
    text.push('\n');
    text
}

pub fn read_scenario_file(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

impl ModelSection {
    fn structural_issues(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let mut push = |field: String, message: String| issues.push(Issue { field, message });
        match self.dag() {
            Ok(dag) => {
                for node in dag.nodes() {
                    if !self.functions.contains_key(node) {
                        push(
                            format!("model.functions.{node}"),
                            "declared in the dag but has no response".to_string(),
                        );
                    }
                }
            }
            Err(e) => push("model.dag".to_string(), e.to_string()),
        }
        for (node, spec) in &self.functions {
            let field = format!("model.functions.{node}");
            if !self.dag.nodes.contains(node) {
                push(field.clone(), "not a dag node".to_string());
            }
            match (&spec.p1, &spec.rows) {
                (Some(_), Some(_)) => {
                    push(field, "give `p1` or `rows`, not both".to_string());
                }
                (None, None) => {
                    push(field, "needs `p1` or `rows`".to_string());
                }
                (Some(_), None) => {
                    if spec.support.is_some() {
                        push(field, "`support` only combines with `rows`".to_string());
                    }
                }
                (None, Some(_)) => {
                    if spec.support.is_none() {
                        push(field, "`rows` needs an explicit `support`".to_string());
                    }
                }
            }
        }
        issues
    }

    pub fn dag(&self) -> Result<CausalDag, ScenarioError> {
        let edges: Vec<(&str, &str)> = self
            .dag
            .edges
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        CausalDag::new(self.dag.nodes.iter().map(String::as_str), &edges).map_err(|e| {
            ScenarioError::Invalid(vec![Issue {
                field: "model.dag".to_string(),
                message: e.to_string(),
            }])
        })
    }

    /// Builds the declared structural model, reporting any response-table
    /// problem (lengths, weights, probabilities) against its node.
    pub fn build<T: Scalar>(&self) -> Result<StructuralModel<T>, ScenarioError> {
        let issues = self.structural_issues();
        if !issues.is_empty() {
            return Err(ScenarioError::Invalid(issues));
        }
        let mut builder = ModelBuilder::new(self.dag()?)
            .resolution(self.resolution)
            .coupling(self.coupling.into());
        for (node, spec) in &self.functions {
            let parents: Vec<&str> = spec.parents.iter().map(String::as_str).collect();
            builder = match (&spec.p1, &spec.rows) {
                (Some(p1), None) => builder.bernoulli(node, &parents, p1),
                (None, Some(rows)) => {
                    let support = spec.support.as_ref().expect("checked above");
                    builder.categorical(node, &parents, support, rows)
                }
                _ => unreachable!("structural_issues rejects other shapes"),
            };
        }
        builder.build::<T>().map_err(|e| match e {
            ModelError::NoiseTooLarge { .. } => ScenarioError::Capacity(e.to_string()),
            _ => ScenarioError::Invalid(vec![Issue {
                field: "model.functions".to_string(),
                message: e.to_string(),
            }]),
        })
    }
}

impl GroupsSection {
    pub fn build<T: Scalar>(&self) -> Result<GroupedModel<T>, ScenarioError> {
        GroupedModel::with_options(
            &self.sizes,
            &self.mediator_p1,
            &self.outcome_p1,
            self.mediator_reads_summary,
            self.resolution,
        )
        .map_err(|e| match e {
            InterferenceError::CapacityExceeded { .. } => ScenarioError::Capacity(e.to_string()),
            _ => ScenarioError::Invalid(vec![Issue {
                field: "groups".to_string(),
                message: e.to_string(),
            }]),
        })
    }
}

impl Scenario {
    /// Every problem in the scenario, empty when it is runnable.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let mut push = |field: &str, message: String| {
            issues.push(Issue {
                field: field.to_string(),
                message,
            })
        };

        if self.schema_version != SCHEMA_VERSION {
            push(
                "schema_version",
                format!(
                    "unsupported version {}, this toolkit reads {SCHEMA_VERSION}",
                    self.schema_version
                ),
            );
        }
        if self.name.trim().is_empty() {
            push("name", "must not be empty".to_string());
        }
        if self.analyses.is_empty() {
            push("analyses", "nothing requested".to_string());
        }

        let mut model: Option<StructuralModel<f64>> = None;
        if let Some(section) = &self.model {
            match section.build::<f64>() {
                Ok(m) => model = Some(m),
                Err(ScenarioError::Invalid(mut inner)) => issues.append(&mut inner),
                // size limits are a runtime concern, not a shape problem
                Err(ScenarioError::Capacity(_)) => {}
                Err(other) => push("model", other.to_string()),
            }
        }
        if let Some(groups) = &self.groups {
            if !(0.0..=1.0).contains(&groups.alpha) {
                issues.push(Issue {
                    field: "groups.alpha".to_string(),
                    message: format!("{} outside [0, 1]", groups.alpha),
                });
            } else if let Err(ScenarioError::Invalid(mut inner)) = groups.build::<f64>() {
                issues.append(&mut inner);
            }
        }
        if let Some(roles) = &self.roles {
            // Role names are checked against the declared node list, not the
            // built model, so they are still validated when the model is too
            // large to build.
            let node_names: Option<BTreeSet<&str>> = self
                .model
                .as_ref()
                .map(|s| s.dag.nodes.iter().map(String::as_str).collect());
            issues.extend(self.role_issues(roles, node_names.as_ref()));
        }

        let mut parsed = Vec::new();
        for (i, text) in self.analyses.iter().enumerate() {
            match Analysis::parse(text) {
                Ok(a) => parsed.push((i, a)),
                Err(message) => issues.push(Issue {
                    field: format!("analyses[{i}]"),
                    message,
                }),
            }
        }
        for (i, analysis) in parsed {
            issues.extend(self.analysis_issues(i, analysis, model.as_ref()));
        }
        issues
    }

    fn role_issues(&self, roles: &Roles, nodes: Option<&BTreeSet<&str>>) -> Vec<Issue> {
        let mut issues = Vec::new();
        let singles: [(&str, Option<&String>); 9] = [
            ("a", Some(&roles.a)),
            ("y", Some(&roles.y)),
            ("b", roles.b.as_ref()),
            ("b_m", roles.b_m.as_ref()),
            ("b_sc", roles.b_sc.as_ref()),
            ("h", roles.h.as_ref()),
            ("p", roles.p.as_ref()),
            ("r", roles.r.as_ref()),
            ("f", roles.f.as_ref()),
        ];
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (role, node) in singles {
            let Some(node) = node else { continue };
            if let Some(names) = nodes {
                if !names.contains(node.as_str()) {
                    issues.push(Issue {
                        field: format!("roles.{role}"),
                        message: format!("node `{node}` is not in the model"),
                    });
                }
            }
            if let Some(prev) = seen.insert(node.as_str(), role) {
                issues.push(Issue {
                    field: format!("roles.{role}"),
                    message: format!("node `{node}` already bound to role `{prev}`"),
                });
            }
        }
        if roles.b_m.is_some() != roles.b_sc.is_some() {
            issues.push(Issue {
                field: "roles.b_m".to_string(),
                message: "split mediators come as a pair".to_string(),
            });
        }
        for (i, node) in roles.l.iter().enumerate() {
            if let Some(names) = nodes {
                if !names.contains(node.as_str()) {
                    issues.push(Issue {
                        field: format!("roles.l[{i}]"),
                        message: format!("node `{node}` is not in the model"),
                    });
                }
            }
            if node == &roles.a {
                issues.push(Issue {
                    field: format!("roles.l[{i}]"),
                    message: "conditioning on the exposure is never meaningful".to_string(),
                });
            }
        }
        let unique: BTreeSet<&String> = roles.l.iter().collect();
        if unique.len() != roles.l.len() {
            issues.push(Issue {
                field: "roles.l".to_string(),
                message: "duplicate adjustment nodes".to_string(),
            });
        }
        issues
    }

    fn analysis_issues(
        &self,
        index: usize,
        analysis: Analysis,
        model: Option<&StructuralModel<f64>>,
    ) -> Vec<Issue> {
        let mut issues = Vec::new();
        let field = format!("analyses[{index}]");
        let mut unmet = |what: &str| {
            issues.push(Issue {
                field: field.clone(),
                message: format!("`{analysis}` needs {what}"),
            })
        };
        let roles = self.roles.as_ref();
        if analysis.needs_model() {
            if self.model.is_none() {
                unmet("a `model` section");
            }
            if roles.is_none() {
                unmet("a `roles` section");
                return issues;
            }
        }
        if analysis.needs_sample() && self.sample.is_none() {
            unmet("a `sample` section");
        }
        if analysis.needs_groups() && self.groups.is_none() {
            unmet("a `groups` section");
        }
        let needs_b = matches!(
            analysis,
            Analysis::Nde
                | Analysis::Nie
                | Analysis::Cde(_)
                | Analysis::Assumptions
                | Analysis::PluginNde
                | Analysis::Positivity
                | Analysis::MisclassifyNde(_)
        );
        if let Some(roles) = roles {
            if needs_b && roles.b.is_none() {
                unmet("a `b` role");
            }
            match analysis {
                Analysis::TrialEstimand if roles.p.is_none() => unmet("a `p` role"),
                Analysis::PathSpecific if roles.b_m.is_none() || roles.b_sc.is_none() => {
                    unmet("`b_m` and `b_sc` roles")
                }
                Analysis::AltOutcome if roles.r.is_none() => unmet("an `r` role"),
                Analysis::PanelInterpretation => {
                    if roles.r.is_none() {
                        unmet("an `r` role");
                    }
                    if roles.behaviour_nodes().is_empty() {
                        unmet("a mediator role (`b` or the split pair)");
                    }
                }
                Analysis::NegativeControl if roles.f.is_none() => unmet("an `f` role"),
                Analysis::Cde(level) => {
                    if let (Some(m), Some(b)) = (model, &roles.b) {
                        if let Ok(support) = m.node_support(b) {
                            if !support.contains(&level) {
                                issues.push(Issue {
                                    field: field.clone(),
                                    message: format!(
                                        "mediator level {level} outside the support of `{b}`"
                                    ),
                                });
                            }
                        }
                    }
                }
                Analysis::PluginNde | Analysis::Positivity | Analysis::MisclassifyNde(_) => {
                    if let Some(b) = &roles.b {
                        if roles.l.contains(b) {
                            issues.push(Issue {
                                field: field.clone(),
                                message: "adjustment set must not contain the mediator"
                                    .to_string(),
                            });
                        }
                    }
                }
                _ => {}
            }
        }
        if matches!(
            analysis,
            Analysis::InterferenceNde | Analysis::InterferenceAverageNde(_)
        ) {
            if let Some(groups) = &self.groups {
                if groups.mediator_reads_summary {
                    issues.push(Issue {
                        field,
                        message: format!(
                            "`{analysis}` is undefined when the mediator reads the summary"
                        ),
                    });
                }
            }
        }
        issues
    }

    pub fn build_model<T: Scalar>(&self) -> Result<StructuralModel<T>, ScenarioError> {
        match &self.model {
            Some(section) => section.build(),
            None => Err(ScenarioError::Invalid(vec![Issue {
                field: "model".to_string(),
                message: "scenario has no model section".to_string(),
            }])),
        }
    }

    pub fn build_grouped<T: Scalar>(&self) -> Result<GroupedModel<T>, ScenarioError> {
        match &self.groups {
            Some(section) => section.build(),
            None => Err(ScenarioError::Invalid(vec![Issue {
                field: "groups".to_string(),
                message: "scenario has no groups section".to_string(),
            }])),
        }
    }
}
