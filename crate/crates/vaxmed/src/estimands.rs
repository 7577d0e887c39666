//! Exact causal estimands computed by enumeration.
//!
//! Every estimand is a contrast of two potential-outcome risks, reported as
//! a risk difference together with the derived effectiveness `1 −
//! risk_treated / risk_control`. The cross-world quantities (natural direct
//! effect, path-specific effects) share exogenous noise across worlds via
//! [`crate::scm::CounterfactualQuery::fix_to_world`].

use crate::graph::GraphError;
use crate::scalar::Scalar;
use crate::scm::{CounterfactualQuery, ModelError, StructuralModel, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimandError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid roles: {0}")]
    Roles(String),
}

/// A named contrast of two potential-outcome risks.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimandValue<T> {
    pub name: String,
    pub risk_treated: T,
    pub risk_control: T,
    /// Always `risk_treated - risk_control`.
    pub difference: T,
    /// `1 - risk_treated / risk_control`; absent when the control risk is 0.
    pub ve: Option<T>,
}

impl<T: Scalar> EstimandValue<T> {
    pub(crate) fn contrast(name: impl Into<String>, treated: T, control: T) -> Self {
        let difference = treated.clone() - control.clone();
        let ve = if control > T::zero() {
            Some(T::one() - treated.clone() / control.clone())
        } else {
            None
        };
        EstimandValue {
            name: name.into(),
            risk_treated: treated,
            risk_control: control,
            difference,
            ve,
        }
    }
}

fn require_distinct(roles: &[(&str, &str)]) -> Result<(), EstimandError> {
    for (i, (_, a)) in roles.iter().enumerate() {
        for (_, b) in &roles[i + 1..] {
            if a == b {
                return Err(EstimandError::Roles(format!(
                    "`{a}` cannot play two roles at once"
                )));
            }
        }
    }
    Ok(())
}

fn q(target: &str) -> CounterfactualQuery {
    CounterfactualQuery::new(target)
}

/// Total effect of setting `a` to 1 versus 0 on `y`: the real-world
/// vaccination contrast. Named `tau_rw`.
pub fn total_effect<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    y: &str,
) -> Result<EstimandValue<T>, EstimandError> {
    require_distinct(&[("a", a), ("y", y)])?;
    let treated = model.analytic_expectation(&q(y).fix(a, 1))?;
    let control = model.analytic_expectation(&q(y).fix(a, 0))?;
    Ok(EstimandValue::contrast("tau_rw", treated, control))
}

/// Natural direct effect: treatment applied but the mediator held at the
/// value it would take without treatment. Named `nde`.
pub fn natural_direct_effect<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b: &str,
    y: &str,
) -> Result<EstimandValue<T>, EstimandError> {
    require_distinct(&[("a", a), ("b", b), ("y", y)])?;
    let treated =
        model.analytic_expectation(&q(y).fix(a, 1).fix_to_world(b, &[(a, 0)]))?;
    let control = model.analytic_expectation(&q(y).fix(a, 0))?;
    Ok(EstimandValue::contrast("nde", treated, control))
}

/// Natural indirect effect: complement of the natural direct effect, so that
/// `nde + nie` equals the total effect. Named `nie`.
pub fn natural_indirect_effect<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b: &str,
    y: &str,
) -> Result<EstimandValue<T>, EstimandError> {
    require_distinct(&[("a", a), ("b", b), ("y", y)])?;
    let treated =
        model.analytic_expectation(&q(y).fix(a, 1).fix_to_world(b, &[(a, 1)]))?;
    let control =
        model.analytic_expectation(&q(y).fix(a, 1).fix_to_world(b, &[(a, 0)]))?;
    Ok(EstimandValue::contrast("nie", treated, control))
}

/// Controlled direct effect with the mediator forced to `b_level` for
/// everyone. Named `cde(<b_level>)`.
pub fn controlled_direct_effect<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b: &str,
    y: &str,
    b_level: Value,
) -> Result<EstimandValue<T>, EstimandError> {
    require_distinct(&[("a", a), ("b", b), ("y", y)])?;
    let treated = model.analytic_expectation(&q(y).fix(a, 1).fix(b, b_level))?;
    let control = model.analytic_expectation(&q(y).fix(a, 0).fix(b, b_level))?;
    Ok(EstimandValue::contrast(
        format!("cde({b_level})"),
        treated,
        control,
    ))
}

/// Blinded-trial estimand: the treatment contrast with perception held at
/// the blinded value −1 in both arms. Named `tau_vt`.
///
/// Requires a perception node `p` with support {−1, 0, 1}, a declared
/// `a → p` edge, and no children of `a` besides `p` and `y` (behaviour must
/// react to perception, not to assignment itself).
pub fn trial_estimand<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    p: &str,
    y: &str,
) -> Result<EstimandValue<T>, EstimandError> {
    require_distinct(&[("a", a), ("p", p), ("y", y)])?;
    let support = model.node_support(p)?;
    if support != [-1, 0, 1] {
        return Err(EstimandError::Roles(format!(
            "perception node `{p}` must have support {{-1,0,1}}, found {support:?}"
        )));
    }
    let dag = model.dag();
    if !dag.has_edge(a, p) {
        return Err(EstimandError::Roles(format!(
            "perception `{p}` must be a child of `{a}`"
        )));
    }
    for child in dag.children_of(a)? {
        if child != p && child != y {
            return Err(EstimandError::Roles(format!(
                "`{child}` reads `{a}` directly; only `{p}` and `{y}` may"
            )));
        }
    }
    let treated = model.analytic_expectation(&q(y).fix(a, 1).fix(p, -1))?;
    let control = model.analytic_expectation(&q(y).fix(a, 0).fix(p, -1))?;
    Ok(EstimandValue::contrast("tau_vt", treated, control))
}

/// Effects through subsets of two parallel mediator channels.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpecificEffects<T> {
    /// Treatment contrast with the `b_m` channel held at its untreated
    /// response (that channel's contribution switched off).
    pub bm_path_blocked: EstimandValue<T>,
    /// Same with the `b_sc` channel switched off.
    pub bsc_path_blocked: EstimandValue<T>,
    /// Three-term telescoping split of the total effect: the share moved
    /// through `b_m`, through `b_sc`, and the remaining direct share.
    pub via_bm: EstimandValue<T>,
    pub via_bsc: EstimandValue<T>,
    pub direct: EstimandValue<T>,
    /// Total effect minus the three terms; identically 0.
    pub residual: T,
}

/// Path-specific effects for a structure with two mediators that do not
/// affect one another. Requires `b_m` and `b_sc` to be causally unordered
/// (no edge between them) and `a` to be upstream of both and of `y`.
pub fn path_specific_effects<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b_m: &str,
    b_sc: &str,
    y: &str,
) -> Result<PathSpecificEffects<T>, EstimandError> {
    require_distinct(&[("a", a), ("b_m", b_m), ("b_sc", b_sc), ("y", y)])?;
    let dag = model.dag();
    if dag.has_edge(b_m, b_sc) || dag.has_edge(b_sc, b_m) {
        return Err(EstimandError::Roles(format!(
            "mediators `{b_m}` and `{b_sc}` must not affect one another"
        )));
    }
    let upstream_of = dag.ancestors(a)?;
    for node in [b_m, b_sc, y] {
        if upstream_of.contains(&node) {
            return Err(EstimandError::Roles(format!(
                "`{node}` is an ancestor of the treatment `{a}`"
            )));
        }
    }
    let e = |a_val: Value, sc_world: Value, m_world: Value| {
        model.analytic_expectation(
            &q(y)
                .fix(a, a_val)
                .fix_to_world(b_sc, &[(a, sc_world)])
                .fix_to_world(b_m, &[(a, m_world)]),
        )
    };
    let y_111 = e(1, 1, 1)?;
    let y_110 = e(1, 1, 0)?;
    let y_101 = e(1, 0, 1)?;
    let y_010 = e(0, 1, 0)?;
    let y_000 = e(0, 0, 0)?;
    let bm_path_blocked =
        EstimandValue::contrast("pse(bm-blocked)", y_110.clone(), y_000.clone());
    let bsc_path_blocked =
        EstimandValue::contrast("pse(bsc-blocked)", y_101, y_000.clone());
    let via_bm = EstimandValue::contrast("pse(via-bm)", y_111.clone(), y_110.clone());
    let via_bsc = EstimandValue::contrast("pse(via-bsc)", y_010.clone(), y_000.clone());
    let direct = EstimandValue::contrast("pse(direct)", y_110, y_010);
    let total = y_111 - y_000;
    let residual = total
        - (via_bm.difference.clone() + via_bsc.difference.clone() + direct.difference.clone());
    Ok(PathSpecificEffects {
        bm_path_blocked,
        bsc_path_blocked,
        via_bm,
        via_bsc,
        direct,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CausalDag;
    use crate::scm::{Coupling, ModelBuilder};
    use num_rational::BigRational;

    fn table1_model<T: Scalar>() -> StructuralModel<T> {
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "B"), ("A", "Y"), ("B", "Y")]).unwrap();
        ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("B", &["A"], &[0.30, 0.70])
            .bernoulli("Y", &["A", "B"], &[0.25, 0.35, 0.14, 0.21])
            .build()
            .unwrap()
    }

    /// Same mediation structure with configurable mediator marginals and
    /// outcome risks (rows in (a,b) order (0,0),(0,1),(1,0),(1,1)).
    fn family_model(p_b0: f64, p_b1: f64, y_rows: [f64; 4]) -> StructuralModel<f64> {
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "B"), ("A", "Y"), ("B", "Y")]).unwrap();
        ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("B", &["A"], &[p_b0, p_b1])
            .bernoulli("Y", &["A", "B"], &y_rows)
            .build()
            .unwrap()
    }

    fn fig_s1_model(bm_rows: [f64; 2], bsc_rows: [f64; 2], y_fn: impl Fn(Value, Value, Value) -> f64) -> StructuralModel<f64> {
        let dag = CausalDag::new(
            ["A", "BM", "BSC", "Y"],
            &[
                ("A", "BM"),
                ("A", "BSC"),
                ("A", "Y"),
                ("BM", "Y"),
                ("BSC", "Y"),
            ],
        )
        .unwrap();
        let mut y_rows = Vec::new();
        for a in [0, 1] {
            for bm in [0, 1] {
                for bsc in [0, 1] {
                    y_rows.push(y_fn(a, bm, bsc));
                }
            }
        }
        ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("BM", &["A"], &bm_rows)
            .bernoulli("BSC", &["A"], &bsc_rows)
            .bernoulli("Y", &["A", "BM", "BSC"], &y_rows)
            .build()
            .unwrap()
    }

    #[test]
    fn table1_estimand_values() {
        let m = table1_model::<f64>();
        let tau = total_effect(&m, "A", "Y").unwrap();
        assert_eq!(tau.name, "tau_rw");
        assert!((tau.risk_treated - 0.189).abs() < 1e-12);
        assert!((tau.risk_control - 0.280).abs() < 1e-12);
        assert!((tau.difference - (-0.091)).abs() < 1e-12);
        assert!((tau.ve.unwrap() - 0.325).abs() < 1e-12);

        let nde = natural_direct_effect(&m, "A", "B", "Y").unwrap();
        assert_eq!(nde.name, "nde");
        assert!((nde.risk_treated - 0.161).abs() < 1e-12);
        assert!((nde.risk_control - 0.280).abs() < 1e-12);
        assert!((nde.difference - (-0.119)).abs() < 1e-12);
        assert!((nde.ve.unwrap() - 0.425).abs() < 1e-12);

        let nie = natural_indirect_effect(&m, "A", "B", "Y").unwrap();
        assert!((nie.difference - 0.028).abs() < 1e-12);

        let cde0 = controlled_direct_effect(&m, "A", "B", "Y", 0).unwrap();
        assert_eq!(cde0.name, "cde(0)");
        assert!((cde0.difference - (-0.11)).abs() < 1e-12);
        let cde1 = controlled_direct_effect(&m, "A", "B", "Y", 1).unwrap();
        assert!((cde1.difference - (-0.14)).abs() < 1e-12);
    }

    #[test]
    fn nde_control_arm_two_forms_agree_exactly() {
        // E[Y^{a=0}] equals E[Y^{a=0, B^{a=0}}]: intervening with the value
        // the world would produce anyway changes nothing.
        let m = table1_model::<BigRational>();
        let plain = m
            .analytic_expectation(&CounterfactualQuery::new("Y").fix("A", 0))
            .unwrap();
        let cross = m
            .analytic_expectation(
                &CounterfactualQuery::new("Y")
                    .fix("A", 0)
                    .fix_to_world("B", &[("A", 0)]),
            )
            .unwrap();
        assert_eq!(plain, cross);
    }

    #[test]
    fn nde_plus_nie_is_total() {
        for m in [
            table1_model::<f64>(),
            family_model(0.1, 0.5, [0.22, 0.38, 0.11, 0.24]),
            family_model(0.5, 0.6, [0.28, 0.32, 0.17, 0.18]),
        ] {
            let tau = total_effect(&m, "A", "Y").unwrap().difference;
            let nde = natural_direct_effect(&m, "A", "B", "Y").unwrap().difference;
            let nie = natural_indirect_effect(&m, "A", "B", "Y").unwrap().difference;
            assert!((nde + nie - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn unmediated_model_collapses_nde_to_total() {
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "Y"), ("B", "Y")]).unwrap();
        let m = ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("B", &[], &[0.3])
            .bernoulli("Y", &["A", "B"], &[0.25, 0.35, 0.14, 0.21])
            .build::<f64>()
            .unwrap();
        let tau = total_effect(&m, "A", "Y").unwrap();
        let nde = natural_direct_effect(&m, "A", "B", "Y").unwrap();
        let nie = natural_indirect_effect(&m, "A", "B", "Y").unwrap();
        assert!((nde.difference - tau.difference).abs() < 1e-12);
        assert!(nie.difference.abs() < 1e-12);
    }

    #[test]
    fn outcome_ignoring_mediator_makes_cde_total() {
        let m = family_model(0.3, 0.7, [0.28, 0.28, 0.19, 0.19]);
        let tau = total_effect(&m, "A", "Y").unwrap().difference;
        for level in [0, 1] {
            let cde = controlled_direct_effect(&m, "A", "B", "Y", level).unwrap();
            assert!((cde.difference - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn null_effect_when_outcome_ignores_treatment() {
        let m = family_model(0.3, 0.7, [0.2, 0.2, 0.2, 0.2]);
        let tau = total_effect(&m, "A", "Y").unwrap();
        assert!(tau.difference.abs() < 1e-12);
    }

    #[test]
    fn effectiveness_decreases_as_treated_risk_rises() {
        let mut last = f64::INFINITY;
        for treated_scale in [1, 2, 3] {
            let v = EstimandValue::contrast(
                "probe",
                0.07 * f64::from(treated_scale),
                0.28,
            );
            let ve = v.ve.unwrap();
            assert!(ve < last);
            last = ve;
        }
        let zero_control = EstimandValue::contrast("probe", 0.1, 0.0);
        assert!(zero_control.ve.is_none());
    }

    fn blinded_model(
        b_by_p: [f64; 3],
        y_rows: [f64; 4],
    ) -> StructuralModel<f64> {
        let dag = CausalDag::new(
            ["A", "P", "B", "Y"],
            &[("A", "P"), ("P", "B"), ("A", "Y"), ("B", "Y")],
        )
        .unwrap();
        ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            // Fully blinded: perception is "uncertain" in both arms.
            .categorical(
                "P",
                &["A"],
                &[-1, 0, 1],
                &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            )
            .bernoulli("B", &["P"], &b_by_p)
            .bernoulli("Y", &["A", "B"], &y_rows)
            .build()
            .unwrap()
    }

    #[test]
    fn trial_estimand_matches_unblinded_nde() {
        // Behaviour at blinded perception equals behaviour at "knows
        // unvaccinated", so the trial contrast reproduces the direct effect
        // of the unblinded mediation model.
        let m = blinded_model([0.30, 0.30, 0.70], [0.25, 0.35, 0.14, 0.21]);
        let vt = trial_estimand(&m, "A", "P", "Y").unwrap();
        assert_eq!(vt.name, "tau_vt");
        let unblinded_nde = natural_direct_effect(&table1_model::<f64>(), "A", "B", "Y").unwrap();
        assert!((vt.difference - unblinded_nde.difference).abs() < 1e-12);
        assert!((vt.risk_treated - 0.161).abs() < 1e-12);
        assert!((vt.risk_control - 0.280).abs() < 1e-12);
    }

    #[test]
    fn trial_estimand_with_inert_mediator_is_total_effect() {
        let m = blinded_model([0.30, 0.30, 0.70], [0.25, 0.25, 0.14, 0.14]);
        let vt = trial_estimand(&m, "A", "P", "Y").unwrap();
        let tau = total_effect(&m, "A", "Y").unwrap();
        assert!((vt.difference - tau.difference).abs() < 1e-12);
    }

    #[test]
    fn trial_estimand_role_validation() {
        // Perception support must be exactly {-1,0,1}.
        let dag = CausalDag::new(
            ["A", "P", "B", "Y"],
            &[("A", "P"), ("P", "B"), ("A", "Y"), ("B", "Y")],
        )
        .unwrap();
        let binary_p = ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("P", &["A"], &[0.5, 0.5])
            .bernoulli("B", &["P"], &[0.3, 0.7])
            .bernoulli("Y", &["A", "B"], &[0.25, 0.35, 0.14, 0.21])
            .build::<f64>()
            .unwrap();
        assert!(matches!(
            trial_estimand(&binary_p, "A", "P", "Y"),
            Err(EstimandError::Roles(_))
        ));
        // Behaviour reading assignment directly breaks the blinding story.
        let dag = CausalDag::new(
            ["A", "P", "B", "Y"],
            &[("A", "P"), ("A", "B"), ("P", "B"), ("A", "Y"), ("B", "Y")],
        )
        .unwrap();
        let leaky = ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .categorical(
                "P",
                &["A"],
                &[-1, 0, 1],
                &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            )
            .bernoulli("B", &["A", "P"], &[0.3, 0.3, 0.7, 0.3, 0.3, 0.7])
            .bernoulli("Y", &["A", "B"], &[0.25, 0.35, 0.14, 0.21])
            .build::<f64>()
            .unwrap();
        assert!(matches!(
            trial_estimand(&leaky, "A", "P", "Y"),
            Err(EstimandError::Roles(_))
        ));
    }

    #[test]
    fn path_specific_decomposition_telescopes() {
        let m = fig_s1_model([0.6, 0.3], [0.3, 0.7], |a, bm, bsc| {
            0.25 - 0.05 * f64::from(a) - 0.10 * f64::from(bm) + 0.12 * f64::from(bsc)
        });
        let tau = total_effect(&m, "A", "Y").unwrap().difference;
        let pse = path_specific_effects(&m, "A", "BM", "BSC", "Y").unwrap();
        let sum = pse.via_bm.difference + pse.via_bsc.difference + pse.direct.difference;
        assert!((sum - tau).abs() < 1e-12);
        assert!(pse.residual.abs() < 1e-12);
        // Vaccination lowers mask use here, which raises risk through BM.
        assert!(pse.via_bm.difference > 0.0);
        // And raises contacts, which also raises risk through BSC.
        assert!(pse.via_bsc.difference > 0.0);
        assert!(pse.direct.difference < 0.0);
    }

    #[test]
    fn blocked_channel_reductions() {
        // No A -> BM edge: blocking the BM channel changes nothing.
        let dag = CausalDag::new(
            ["A", "BM", "BSC", "Y"],
            &[("A", "BSC"), ("A", "Y"), ("BM", "Y"), ("BSC", "Y")],
        )
        .unwrap();
        let m = ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("BM", &[], &[0.4])
            .bernoulli("BSC", &["A"], &[0.3, 0.7])
            .bernoulli(
                "Y",
                &["A", "BM", "BSC"],
                &[0.25, 0.37, 0.15, 0.27, 0.20, 0.32, 0.10, 0.22],
            )
            .build::<f64>()
            .unwrap();
        let tau = total_effect(&m, "A", "Y").unwrap().difference;
        let pse = path_specific_effects(&m, "A", "BM", "BSC", "Y").unwrap();
        assert!((pse.bm_path_blocked.difference - tau).abs() < 1e-12);
        assert!(pse.via_bm.difference.abs() < 1e-12);

        // Outcome ignores BM: blocking the BSC channel leaves exactly the
        // direct effect, i.e. the natural direct effect w.r.t. BSC.
        let inert_bm = fig_s1_model([0.6, 0.3], [0.3, 0.7], |a, _, bsc| {
            0.25 - 0.05 * f64::from(a) + 0.12 * f64::from(bsc)
        });
        let pse = path_specific_effects(&inert_bm, "A", "BM", "BSC", "Y").unwrap();
        let nde_sc = natural_direct_effect(&inert_bm, "A", "BSC", "Y").unwrap();
        assert!((pse.bsc_path_blocked.difference - nde_sc.difference).abs() < 1e-12);
    }

    #[test]
    fn path_specific_role_validation() {
        // An edge between the two mediators is rejected.
        let dag = CausalDag::new(
            ["A", "BM", "BSC", "Y"],
            &[
                ("A", "BM"),
                ("A", "BSC"),
                ("A", "Y"),
                ("BM", "BSC"),
                ("BM", "Y"),
                ("BSC", "Y"),
            ],
        )
        .unwrap();
        let m = ModelBuilder::new(dag)
            .bernoulli("A", &[], &[0.5])
            .bernoulli("BM", &["A"], &[0.6, 0.3])
            .bernoulli("BSC", &["A", "BM"], &[0.3, 0.2, 0.7, 0.6])
            .bernoulli(
                "Y",
                &["A", "BM", "BSC"],
                &[0.25, 0.37, 0.15, 0.27, 0.20, 0.32, 0.10, 0.22],
            )
            .build::<f64>()
            .unwrap();
        assert!(matches!(
            path_specific_effects(&m, "A", "BM", "BSC", "Y"),
            Err(EstimandError::Roles(_))
        ));
        assert!(matches!(
            natural_direct_effect(&table1_model::<f64>(), "A", "A", "Y"),
            Err(EstimandError::Roles(_))
        ));
    }

    #[test]
    fn capacity_errors_propagate() {
        // The outcome reads four middle-layer nodes, each with 256
        // independent-coupling noise classes: the relevant noise space for
        // the treatment contrast is far over the enumeration cap.
        let names = ["P1", "P2", "P3", "C1", "C2", "C3", "C4", "D"];
        let mut edges = Vec::new();
        for p in ["P1", "P2", "P3"] {
            for c in ["C1", "C2", "C3", "C4"] {
                edges.push((p, c));
            }
        }
        for c in ["C1", "C2", "C3", "C4"] {
            edges.push((c, "D"));
        }
        let dag = CausalDag::new(names, &edges).unwrap();
        let mut b = ModelBuilder::new(dag).coupling(Coupling::Independent);
        for p in ["P1", "P2", "P3"] {
            b = b.bernoulli(p, &[], &[0.5]);
        }
        for c in ["C1", "C2", "C3", "C4"] {
            b = b.bernoulli(
                c,
                &["P1", "P2", "P3"],
                &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            );
        }
        let d_rows: Vec<f64> = (0..16).map(|i| 0.1 + 0.05 * f64::from(i)).collect();
        let m = b
            .bernoulli("D", &["C1", "C2", "C3", "C4"], &d_rows)
            .build::<f64>()
            .unwrap();
        match total_effect(&m, "P1", "D") {
            Err(EstimandError::Model(ModelError::EnumerationCapExceeded { .. })) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    /// In this mediation regime (vaccination raises the risk behaviour,
    /// the behaviour raises infection risk in both arms, protection reduces
    /// risk at either behaviour level) the indirect effect pushes against
    /// the direct one, so the real-world contrast is never larger in
    /// magnitude than the direct effect.
    #[test]
    fn real_world_effect_never_exceeds_direct_effect_in_magnitude() {
        let deltas = [-0.03, 0.0, 0.03];
        let mut checked = 0usize;
        for p_b0_tenths in 1..=5 {
            let p_b0 = f64::from(p_b0_tenths) / 10.0;
            for uplift_tenths in 1..=4 {
                let p_b1 = p_b0 + f64::from(uplift_tenths) / 10.0;
                for d00 in deltas {
                    for d01 in deltas {
                        for d10 in deltas {
                            for d11 in deltas {
                                let rows = [0.25 + d00, 0.35 + d01, 0.14 + d10, 0.21 + d11];
                                let m = family_model(p_b0, p_b1, rows);
                                let tau = total_effect(&m, "A", "Y").unwrap().difference;
                                let nde =
                                    natural_direct_effect(&m, "A", "B", "Y").unwrap().difference;
                                assert!(
                                    tau.abs() <= nde.abs() + 1e-12,
                                    "p_b0={p_b0} p_b1={p_b1} rows={rows:?}: tau={tau} nde={nde}"
                                );
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(checked, 5 * 4 * 81);
    }
}
