//! Post-deployment detection of behaviour change and what it implies.
//!
//! Two statistical tests run on unit-level data: a stratified contrast of
//! an alternative outcome between vaccination arms, and the same contrast
//! of the primary outcome restricted to a negative-control subgroup whose
//! units cannot benefit biologically. Two graphical readings complement
//! them: whether the alternative-outcome test is valid at all for a given
//! conditioning set, and whether a detected association says anything
//! about outcome-relevant behaviour.

use std::collections::{BTreeMap, BTreeSet};

use crate::estimation::{Dataset, EstimationError};
use crate::graph::{CausalDag, GraphError};
use crate::scalar::Scalar;
use crate::scm::{StructuralModel, Value};

/// Decision thresholds shared by the detection tests.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    /// An association is declared when the pooled difference exceeds this
    /// many standard errors in magnitude.
    pub z_threshold: f64,
    /// Smallest analysable group; below it the verdict is
    /// [`Verdict::InsufficientData`] and no contrast is computed.
    pub min_subgroup: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            z_threshold: 3.0,
            min_subgroup: 200,
        }
    }
}

/// Conclusion of an association test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Association,
    NoAssociation,
    InsufficientData,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Association => "association",
            Verdict::NoAssociation => "no-association",
            Verdict::InsufficientData => "insufficient-data",
        };
        f.write_str(s)
    }
}

/// A stratified arm contrast on a binary outcome.
///
/// Per-stratum risk differences are pooled with weights proportional to
/// stratum size; the standard error combines per-arm binomial variances
/// with the same weights. The verdict is [`Verdict::NoAssociation`]
/// exactly when `|difference| <= z_threshold * se`. Strata where either
/// arm is empty are dropped and listed in `excluded_strata`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub verdict: Verdict,
    /// Pooled risk difference; `None` when the data were insufficient.
    pub difference: Option<f64>,
    pub se: Option<f64>,
    /// Units the contrast was computed from (after any subgroup
    /// restriction, excluding dropped strata).
    pub n: usize,
    pub strata_used: usize,
    pub excluded_strata: Vec<Vec<Value>>,
}

/// What an arm difference in the alternative outcome would mean for the
/// primary outcome, read off the graph alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PanelInterpretation {
    /// Every open directed exposure-to-alternative-outcome path passes
    /// through a behaviour node upstream of the primary outcome, so an
    /// association signals outcome-relevant behaviour change.
    BehaviourRelevantToY,
    /// Some open directed path reaches the alternative outcome through no
    /// such node; an association could reflect behaviour with no bearing
    /// on the primary outcome. The witness is one such path.
    InconclusiveForY { witness: Vec<String> },
}

impl std::fmt::Display for PanelInterpretation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PanelInterpretation::BehaviourRelevantToY => f.write_str("behaviour-relevant-to-outcome"),
            PanelInterpretation::InconclusiveForY { witness } => {
                write!(f, "inconclusive-for-outcome(witness={})", witness.join("->"))
            }
        }
    }
}

/// Whether the alternative-outcome test can be read causally: after
/// cutting the exposure-to-behaviour edges, any remaining open path
/// between exposure and alternative outcome is a non-behavioural source
/// of association the test cannot tell apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestValidity {
    Valid,
    Invalid { open_path: Vec<String> },
}

impl std::fmt::Display for TestValidity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestValidity::Valid => f.write_str("valid"),
            TestValidity::Invalid { open_path } => {
                write!(f, "invalid(open-path={})", open_path.join("->"))
            }
        }
    }
}

/// Tests whether an auxiliary outcome `r` differs between arms of `a`
/// within strata of `cond`, pooling per-stratum differences.
pub fn alt_outcome_test(
    data: &Dataset,
    a: &str,
    r: &str,
    cond: &[&str],
    config: &DetectConfig,
) -> Result<AssociationResult, EstimationError> {
    pooled_contrast(data, a, r, cond, None, config)
}

/// Contrasts the primary outcome `y` between arms of `a` inside the
/// subgroup where the binary `flag` column equals one (units with no
/// biological pathway from vaccination to outcome). Any arm difference
/// there is attributable to behaviour.
pub fn negative_control_population_test(
    data: &Dataset,
    a: &str,
    y: &str,
    flag: &str,
    cond: &[&str],
    config: &DetectConfig,
) -> Result<AssociationResult, EstimationError> {
    let flag_col = data.observable_column(flag)?;
    require_binary(flag, flag_col)?;
    pooled_contrast(data, a, y, cond, Some(flag_col), config)
}

fn require_binary(name: &str, col: &[Value]) -> Result<(), EstimationError> {
    if col.iter().any(|&v| v != 0 && v != 1) {
        return Err(EstimationError::NonBinary {
            column: name.to_string(),
        });
    }
    Ok(())
}

/// Shared stratified machinery. `restrict` keeps only rows where the
/// given column equals one.
fn pooled_contrast(
    data: &Dataset,
    a: &str,
    outcome: &str,
    cond: &[&str],
    restrict: Option<&[Value]>,
    config: &DetectConfig,
) -> Result<AssociationResult, EstimationError> {
    if data.is_empty() {
        return Err(EstimationError::EmptyDataset);
    }
    let a_col = data.observable_column(a)?;
    let out_col = data.observable_column(outcome)?;
    require_binary(a, a_col)?;
    require_binary(outcome, out_col)?;
    let cond_cols: Vec<&[Value]> = cond
        .iter()
        .map(|c| data.observable_column(c))
        .collect::<Result<_, _>>()?;

    // counts[stratum][arm] = (units, outcome-positive units)
    let mut counts: BTreeMap<Vec<Value>, [(u64, u64); 2]> = BTreeMap::new();
    let mut kept = 0usize;
    for row in 0..data.len() {
        if let Some(flags) = restrict {
            if flags[row] != 1 {
                continue;
            }
        }
        kept += 1;
        let key: Vec<Value> = cond_cols.iter().map(|c| c[row]).collect();
        let arm = usize::from(a_col[row] == 1);
        let entry = &mut counts.entry(key).or_insert([(0, 0); 2])[arm];
        entry.0 += 1;
        entry.1 += u64::from(out_col[row] == 1);
    }

    if kept < config.min_subgroup {
        return Ok(AssociationResult {
            verdict: Verdict::InsufficientData,
            difference: None,
            se: None,
            n: kept,
            strata_used: 0,
            excluded_strata: Vec::new(),
        });
    }

    let mut excluded = Vec::new();
    let mut used = Vec::new();
    for (key, arms) in counts {
        if arms[0].0 == 0 || arms[1].0 == 0 {
            excluded.push(key);
        } else {
            used.push(arms);
        }
    }
    let total: u64 = used.iter().map(|arms| arms[0].0 + arms[1].0).sum();
    if total == 0 {
        return Ok(AssociationResult {
            verdict: Verdict::InsufficientData,
            difference: None,
            se: None,
            n: 0,
            strata_used: 0,
            excluded_strata: excluded,
        });
    }

    let mut difference = 0.0;
    let mut variance = 0.0;
    for arms in &used {
        let w = (arms[0].0 + arms[1].0) as f64 / total as f64;
        let mut rates = [0.0; 2];
        let mut var = 0.0;
        for arm in 0..2 {
            let n = arms[arm].0 as f64;
            let p = arms[arm].1 as f64 / n;
            rates[arm] = p;
            var += p * (1.0 - p) / n;
        }
        difference += w * (rates[1] - rates[0]);
        variance += w * w * var;
    }
    let se = variance.sqrt();
    let verdict = if difference.abs() <= config.z_threshold * se {
        Verdict::NoAssociation
    } else {
        Verdict::Association
    };
    Ok(AssociationResult {
        verdict,
        difference: Some(difference),
        se: Some(se),
        n: total as usize,
        strata_used: used.len(),
        excluded_strata: excluded,
    })
}

/// What the same stratified contrast converges to: the exact per-stratum
/// arm differences in `E[r]` under the model's joint law, sorted by
/// stratum. Errs when a positive-probability stratum lacks an arm.
pub fn population_stratum_contrasts<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    r: &str,
    cond: &[&str],
) -> Result<Vec<(Vec<Value>, T)>, EstimationError> {
    if model.node_support(a)? != [0, 1] {
        return Err(EstimationError::NonBinary {
            column: a.to_string(),
        });
    }
    let mut nodes: Vec<&str> = cond.to_vec();
    nodes.push(a);
    nodes.push(r);
    let joint = model.joint_distribution(&nodes)?;
    // stratum -> per-arm (mass, outcome-weighted mass)
    let mut cells: BTreeMap<Vec<Value>, [(T, T); 2]> = BTreeMap::new();
    for (vals, mass) in joint {
        let r_val = vals[cond.len() + 1];
        let arm = usize::from(vals[cond.len()] == 1);
        let key = vals[..cond.len()].to_vec();
        let entry = &mut cells
            .entry(key)
            .or_insert_with(|| [(T::zero(), T::zero()), (T::zero(), T::zero())])[arm];
        entry.0 = entry.0.clone() + mass.clone();
        entry.1 = entry.1.clone() + mass * T::from_ratio(i64::from(r_val), 1);
    }
    let mut out = Vec::new();
    for (key, arms) in cells {
        for (arm, cell) in arms.iter().enumerate() {
            if cell.0.is_zero() {
                return Err(EstimationError::PositivityViolation(format!(
                    "no mass in arm {arm} within covariate cell {key:?}"
                )));
            }
        }
        let contrast =
            arms[1].1.clone() / arms[1].0.clone() - arms[0].1.clone() / arms[0].0.clone();
        out.push((key, contrast));
    }
    Ok(out)
}

/// Reads off the graph whether an arm difference in `r` must come from
/// behaviour that matters for `y`.
///
/// Every directed path from `a` to `r` that stays open given `cond`
/// (no intermediate node conditioned on) is inspected; the reading is
/// [`PanelInterpretation::BehaviourRelevantToY`] when each such path
/// passes through a node of `b_nodes` that is an ancestor of `y`, and
/// otherwise names a violating path. With no open directed path at all
/// the first reading holds vacuously.
pub fn panel_interpretation(
    dag: &CausalDag,
    a: &str,
    b_nodes: &[&str],
    y: &str,
    r: &str,
    cond: &[&str],
) -> Result<PanelInterpretation, GraphError> {
    for b in b_nodes {
        dag.parents_of(b)?;
    }
    let y_upstream: BTreeSet<&str> = dag.ancestors(y)?.into_iter().collect();
    let relevant: BTreeSet<&str> = b_nodes
        .iter()
        .copied()
        .filter(|b| y_upstream.contains(b))
        .collect();
    for path in open_directed_paths(dag, a, r, cond)? {
        if !path[1..path.len() - 1].iter().any(|n| relevant.contains(n.as_str())) {
            return Ok(PanelInterpretation::InconclusiveForY { witness: path });
        }
    }
    Ok(PanelInterpretation::BehaviourRelevantToY)
}

/// All directed `from -> .. -> to` paths whose intermediate nodes avoid
/// `cond`. Graphs here are small; plain DFS.
fn open_directed_paths(
    dag: &CausalDag,
    from: &str,
    to: &str,
    cond: &[&str],
) -> Result<Vec<Vec<String>>, GraphError> {
    let fi = dag.idx(from)?;
    let ti = dag.idx(to)?;
    if fi == ti {
        return Err(GraphError::InvalidQuery(format!(
            "path endpoints are both `{from}`"
        )));
    }
    let mut blocked = vec![false; dag.node_count()];
    for c in cond {
        let ci = dag.idx(c)?;
        if ci == fi || ci == ti {
            return Err(GraphError::InvalidQuery(format!(
                "conditioning set contains endpoint `{c}`"
            )));
        }
        blocked[ci] = true;
    }
    let mut kids: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for node in dag.nodes() {
        kids.insert(node, dag.children_of(node)?);
    }
    let mut out = Vec::new();
    let mut path = vec![from];
    dfs_paths(&kids, dag, from, to, &blocked, &mut path, &mut out)?;
    Ok(out)
}

fn dfs_paths<'g>(
    kids: &BTreeMap<&'g str, Vec<&'g str>>,
    dag: &CausalDag,
    v: &'g str,
    to: &str,
    blocked: &[bool],
    path: &mut Vec<&'g str>,
    out: &mut Vec<Vec<String>>,
) -> Result<(), GraphError> {
    for &child in &kids[v] {
        if child == to {
            let mut full: Vec<String> = path.iter().map(|s| s.to_string()).collect();
            full.push(to.to_string());
            out.push(full);
            continue;
        }
        if blocked[dag.idx(child)?] {
            continue;
        }
        path.push(child);
        dfs_paths(kids, dag, child, to, blocked, path, out)?;
        path.pop();
    }
    Ok(())
}

/// Checks that an alternative-outcome test could only fire through
/// behaviour: with the `a -> b` edges removed, `a` and `r` must be
/// d-separated given `cond`. A surviving open path (confounding, or a
/// collider opened by the conditioning set) invalidates the test.
pub fn alt_outcome_validity(
    dag: &CausalDag,
    a: &str,
    b_nodes: &[&str],
    r: &str,
    cond: &[&str],
) -> Result<TestValidity, GraphError> {
    let mut cut = Vec::new();
    for b in b_nodes {
        dag.parents_of(b)?;
        if dag.has_edge(a, b) {
            cut.push((a, *b));
        }
    }
    let pruned = dag.remove_edges(&cut)?;
    Ok(match pruned.find_open_path(a, r, cond)? {
        None => TestValidity::Valid,
        Some(open_path) => TestValidity::Invalid { open_path },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::ModelBuilder;
    use approx::assert_abs_diff_eq;

    // Behaviour responds to vaccination (optional), and drives both the
    // primary outcome Y and the vaccine-irrelevant outcome R; H confounds
    // everything downstream.
    fn panel1_model(risk_compensation: bool) -> StructuralModel<f64> {
        let mut edges = vec![
            ("H", "A"),
            ("H", "Y"),
            ("H", "R"),
            ("A", "Y"),
            ("B", "Y"),
            ("B", "R"),
        ];
        if risk_compensation {
            edges.push(("A", "B"));
        }
        let dag = CausalDag::new(["H", "A", "B", "Y", "R"], &edges).unwrap();
        let builder = ModelBuilder::new(dag)
            .bernoulli("H", &[], &[0.4])
            .bernoulli("A", &["H"], &[0.3, 0.6]);
        let builder = if risk_compensation {
            builder.bernoulli("B", &["A"], &[0.3, 0.7])
        } else {
            builder.bernoulli("B", &[], &[0.3])
        };
        builder
            .bernoulli(
                "Y",
                &["H", "A", "B"],
                &[0.15, 0.30, 0.05, 0.20, 0.35, 0.50, 0.25, 0.40],
            )
            .bernoulli("R", &["H", "B"], &[0.10, 0.35, 0.25, 0.50])
            .build::<f64>()
            .unwrap()
    }

    // Vaccination only protects responsive units (F = 0); behaviour acts
    // on everyone. Within F = 1 any arm difference is behavioural.
    fn negctrl_model(behaviour_channel: bool) -> StructuralModel<f64> {
        let mut edges = vec![("A", "Y"), ("B", "Y"), ("F", "Y")];
        if behaviour_channel {
            edges.push(("A", "B"));
        }
        let dag = CausalDag::new(["A", "F", "B", "Y"], &edges).unwrap();
        let builder = ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("F", &[], &[0.3]);
        let builder = if behaviour_channel {
            builder.bernoulli("B", &["A"], &[0.3, 0.7])
        } else {
            builder.bernoulli("B", &[], &[0.3])
        };
        builder
            .bernoulli(
                "Y",
                &["A", "B", "F"],
                &[0.15, 0.15, 0.25, 0.25, 0.05, 0.15, 0.15, 0.25],
            )
            .build::<f64>()
            .unwrap()
    }

    fn panel2_dag() -> CausalDag {
        CausalDag::new(
            ["A", "B1", "B2", "Y", "R"],
            &[
                ("A", "B1"),
                ("A", "B2"),
                ("B1", "Y"),
                ("B2", "Y"),
                ("B2", "R"),
                ("A", "Y"),
            ],
        )
        .unwrap()
    }

    fn panel3_dag() -> CausalDag {
        CausalDag::new(
            ["A", "B1", "B2", "Y", "R"],
            &[
                ("A", "B1"),
                ("A", "B2"),
                ("B1", "Y"),
                ("B2", "R"),
                ("A", "Y"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn alt_outcome_flags_risk_compensation() {
        let m = panel1_model(true);
        let data = m.sample_units(100_000, 41).unwrap();
        let res = alt_outcome_test(&data, "A", "R", &["H"], &DetectConfig::default()).unwrap();
        assert_eq!(res.verdict, Verdict::Association);
        assert_abs_diff_eq!(res.difference.unwrap(), 0.10, epsilon = 0.02);
        assert_eq!(res.strata_used, 2);
        assert!(res.excluded_strata.is_empty());
        assert_eq!(res.n, 100_000);

        // The test converges onto a real signal: both strata of the exact
        // law carry the same positive contrast.
        let truth = population_stratum_contrasts(&m, "A", "R", &["H"]).unwrap();
        assert_eq!(truth.len(), 2);
        for (_, d) in truth {
            assert_abs_diff_eq!(d, 0.10, epsilon = 1e-9);
        }
    }

    #[test]
    fn alt_outcome_clean_when_channel_absent() {
        let m = panel1_model(false);
        let data = m.sample_units(100_000, 43).unwrap();
        let res = alt_outcome_test(&data, "A", "R", &["H"], &DetectConfig::default()).unwrap();
        assert_eq!(res.verdict, Verdict::NoAssociation);

        assert!(m.dag().d_separated("A", "R", &["H"]).unwrap());
        let truth = population_stratum_contrasts(&m, "A", "R", &["H"]).unwrap();
        for (_, d) in truth {
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pooling_matches_hand_computation() {
        // Stratum 0: arms 4/4, rates 0.5 vs 0.75. Stratum 1: arms 2/2,
        // rates 0 vs 1. Stratum 2 lacks a control arm and is dropped.
        let mut data = Dataset::new();
        let l = vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2];
        let a = vec![0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1];
        let r = vec![0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1, 0];
        data.push_column("L", l, true).unwrap();
        data.push_column("A", a, true).unwrap();
        data.push_column("R", r, true).unwrap();

        let cfg = DetectConfig {
            z_threshold: 3.0,
            min_subgroup: 1,
        };
        let res = alt_outcome_test(&data, "A", "R", &["L"], &cfg).unwrap();
        assert_eq!(res.excluded_strata, vec![vec![2]]);
        assert_eq!(res.strata_used, 2);
        assert_eq!(res.n, 12);

        let d0 = 0.75 - 0.5;
        let v0 = 0.75 * 0.25 / 4.0 + 0.5 * 0.5 / 4.0;
        let pooled = (8.0 * d0 + 4.0 * 1.0) / 12.0;
        let var = (8.0f64 / 12.0).powi(2) * v0;
        assert_abs_diff_eq!(res.difference.unwrap(), pooled, epsilon = 1e-12);
        assert_abs_diff_eq!(res.se.unwrap(), var.sqrt(), epsilon = 1e-12);

        // 0.5 sits inside three standard errors (0.66) but outside two.
        assert_eq!(res.verdict, Verdict::NoAssociation);
        let tighter = DetectConfig {
            z_threshold: 2.0,
            min_subgroup: 1,
        };
        let res2 = alt_outcome_test(&data, "A", "R", &["L"], &tighter).unwrap();
        assert_eq!(res2.verdict, Verdict::Association);
    }

    #[test]
    fn small_samples_refuse_a_verdict() {
        let mut data = Dataset::new();
        data.push_column("A", vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1], true)
            .unwrap();
        data.push_column("R", vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1], true)
            .unwrap();
        let res = alt_outcome_test(&data, "A", "R", &[], &DetectConfig::default()).unwrap();
        assert_eq!(res.verdict, Verdict::InsufficientData);
        assert_eq!(res.difference, None);
        assert_eq!(res.se, None);
        assert_eq!(res.n, 10);

        // Negative control: the flagged subgroup is what must be large,
        // not the full sample.
        let mut big = Dataset::new();
        let n = 300;
        big.push_column("A", (0..n).map(|i| (i % 2) as Value).collect(), true)
            .unwrap();
        big.push_column("Y", (0..n).map(|i| (i % 3 % 2) as Value).collect(), true)
            .unwrap();
        big.push_column("F", (0..n).map(|i| Value::from(i < 5)).collect(), true)
            .unwrap();
        let res = negative_control_population_test(
            &big,
            "A",
            "Y",
            "F",
            &[],
            &DetectConfig::default(),
        )
        .unwrap();
        assert_eq!(res.verdict, Verdict::InsufficientData);
        assert_eq!(res.n, 5);
    }

    #[test]
    fn negative_control_isolates_behaviour_channel() {
        let m = negctrl_model(true);
        let data = m.sample_units(200_000, 47).unwrap();
        let res = negative_control_population_test(
            &data,
            "A",
            "Y",
            "F",
            &[],
            &DetectConfig::default(),
        )
        .unwrap();
        assert_eq!(res.verdict, Verdict::Association);
        assert_abs_diff_eq!(res.difference.unwrap(), 0.04, epsilon = 0.015);
        assert!(res.n > 50_000 && res.n < 70_000);

        // Exact within-flag contrast is the behavioural push alone.
        let truth = population_stratum_contrasts(&m, "A", "Y", &["F"]).unwrap();
        let flagged = truth.iter().find(|(k, _)| k == &vec![1]).unwrap();
        assert_abs_diff_eq!(flagged.1, 0.04, epsilon = 1e-9);

        // No behaviour channel: flagged units show nothing even though
        // responsive units still benefit directly.
        let m0 = negctrl_model(false);
        let truth0 = population_stratum_contrasts(&m0, "A", "Y", &["F"]).unwrap();
        let flagged0 = truth0.iter().find(|(k, _)| k == &vec![1]).unwrap();
        assert_abs_diff_eq!(flagged0.1, 0.0, epsilon = 1e-12);
        let unflagged0 = truth0.iter().find(|(k, _)| k == &vec![0]).unwrap();
        assert!(unflagged0.1 < -0.05);

        let data0 = m0.sample_units(200_000, 49).unwrap();
        let res0 = negative_control_population_test(
            &data0,
            "A",
            "Y",
            "F",
            &[],
            &DetectConfig::default(),
        )
        .unwrap();
        assert_eq!(res0.verdict, Verdict::NoAssociation);
    }

    #[test]
    fn panel_readings_distinguish_outcome_relevance() {
        let single = panel1_model(true);
        let reading =
            panel_interpretation(single.dag(), "A", &["B"], "Y", "R", &["H"]).unwrap();
        assert_eq!(reading, PanelInterpretation::BehaviourRelevantToY);

        // Two behaviours, both feeding Y: still conclusive.
        let reading = panel_interpretation(&panel2_dag(), "A", &["B1", "B2"], "Y", "R", &[]).unwrap();
        assert_eq!(reading, PanelInterpretation::BehaviourRelevantToY);

        // R hangs off a behaviour that no longer reaches Y: a change in R
        // says nothing about outcome-relevant behaviour.
        let reading = panel_interpretation(&panel3_dag(), "A", &["B1", "B2"], "Y", "R", &[]).unwrap();
        assert_eq!(
            reading,
            PanelInterpretation::InconclusiveForY {
                witness: vec!["A".into(), "B2".into(), "R".into()]
            }
        );
    }

    #[test]
    fn conditioning_can_close_every_witness_path() {
        // Holding B2 fixed blocks the only directed route into R, so the
        // conclusive reading holds vacuously.
        let reading =
            panel_interpretation(&panel3_dag(), "A", &["B1", "B2"], "Y", "R", &["B2"]).unwrap();
        assert_eq!(reading, PanelInterpretation::BehaviourRelevantToY);
    }

    #[test]
    fn validity_depends_on_conditioning_set() {
        let m = panel1_model(true);
        let dag = m.dag();
        // Adjusting for the confounder leaves no non-behavioural path.
        assert_eq!(
            alt_outcome_validity(dag, "A", &["B"], "R", &["H"]).unwrap(),
            TestValidity::Valid
        );
        // Unadjusted, H links the arms to R directly.
        assert_eq!(
            alt_outcome_validity(dag, "A", &["B"], "R", &[]).unwrap(),
            TestValidity::Invalid {
                open_path: vec!["A".into(), "H".into(), "R".into()]
            }
        );
    }

    #[test]
    fn conditioning_on_outcome_invalidates_the_test() {
        // Y -> R plus conditioning on Y opens the collider route
        // A -> Y <- B -> R even with the behaviour edge cut.
        let dag = CausalDag::new(
            ["H", "A", "B", "Y", "R"],
            &[
                ("H", "A"),
                ("H", "Y"),
                ("H", "R"),
                ("A", "B"),
                ("A", "Y"),
                ("B", "Y"),
                ("B", "R"),
                ("Y", "R"),
            ],
        )
        .unwrap();
        match alt_outcome_validity(&dag, "A", &["B"], "R", &["H", "Y"]).unwrap() {
            TestValidity::Invalid { open_path } => {
                assert_eq!(open_path.first().map(String::as_str), Some("A"));
                assert_eq!(open_path.last().map(String::as_str), Some("R"));
                assert!(open_path.contains(&"Y".to_string()));
            }
            TestValidity::Valid => panic!("collider route should stay open"),
        }
    }

    #[test]
    fn collider_distractor_does_not_invalidate() {
        // C2 points into both B and R; without the behaviour edge there
        // is still no open A-R path given H, because B collides.
        let dag = CausalDag::new(
            ["H", "A", "B", "C2", "Y", "R"],
            &[
                ("H", "A"),
                ("H", "Y"),
                ("H", "R"),
                ("A", "Y"),
                ("B", "Y"),
                ("B", "R"),
                ("C2", "B"),
                ("C2", "R"),
            ],
        )
        .unwrap();
        assert_eq!(
            alt_outcome_validity(&dag, "A", &["B"], "R", &["H"]).unwrap(),
            TestValidity::Valid
        );
    }

    #[test]
    fn population_contrast_requires_both_arms() {
        let dag = CausalDag::new(["L", "A", "R"], &[("L", "A"), ("A", "R")]).unwrap();
        let m = ModelBuilder::new(dag)
            .bernoulli("L", &[], &[0.5])
            .bernoulli("A", &["L"], &[0.5, 1.0])
            .bernoulli("R", &["A"], &[0.2, 0.6])
            .build::<f64>()
            .unwrap();
        assert!(matches!(
            population_stratum_contrasts(&m, "A", "R", &["L"]),
            Err(EstimationError::PositivityViolation(_))
        ));
    }

    #[test]
    fn input_validation() {
        let mut data = Dataset::new();
        data.push_column("A", vec![0, 1, 2, 1], true).unwrap();
        data.push_column("R", vec![0, 1, 0, 1], true).unwrap();
        data.push_column("Y^", vec![0, 1, 0, 1], false).unwrap();
        let cfg = DetectConfig {
            z_threshold: 3.0,
            min_subgroup: 1,
        };
        assert!(matches!(
            alt_outcome_test(&data, "A", "R", &[], &cfg),
            Err(EstimationError::NonBinary { .. })
        ));
        assert!(matches!(
            alt_outcome_test(&data, "missing", "R", &[], &cfg),
            Err(EstimationError::UnknownColumn(_))
        ));
        assert!(matches!(
            alt_outcome_test(&data, "R", "Y^", &[], &cfg),
            Err(EstimationError::NotObservable(_))
        ));

        let dag = panel2_dag();
        assert!(matches!(
            panel_interpretation(&dag, "A", &["B9"], "Y", "R", &[]),
            Err(GraphError::UnknownNode(_))
        ));
        assert!(matches!(
            panel_interpretation(&dag, "A", &["B1"], "Y", "R", &["R"]),
            Err(GraphError::InvalidQuery(_))
        ));
        assert!(matches!(
            alt_outcome_validity(&dag, "A", &["nope"], "R", &[]),
            Err(GraphError::UnknownNode(_))
        ));
    }
}
