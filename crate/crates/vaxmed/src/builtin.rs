//! Scenarios shipped with the toolkit.
//!
//! Each one exercises a distinct causal structure: the worked
//! two-decimal contrast table, confounded and non-identified mediation
//! regimes, the blinded-trial estimand, split-mediator decompositions,
//! alternative-outcome detection panels, a negative-control population,
//! and a grouped interference demo. `get` hands back a fully validated
//! [`Scenario`]; `names` lists everything in a stable order.

use crate::scenario::{
    DagSpec, GroupsSection, ModelSection, NodeSpec, Roles, SampleSection, Scenario,
};
use crate::scm::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 14] = [
    "table1",
    "fig1-panel1",
    "fig1-panel2",
    "fig1-panel3",
    "fig2",
    "fig3-panel1",
    "fig3-panel1-noedge",
    "fig3-panel1-yr",
    "fig3-panel2",
    "fig3-panel3",
    "figS1",
    "figS2-blinded",
    "negctrl-pop",
    "interference-demo",
];

pub fn names() -> Vec<&'static str> {
    NAMES.to_vec()
}

pub fn get(name: &str) -> Option<Scenario> {
    let scenario = match name {
        "table1" => table1(),
        "fig1-panel1" => fig1_panel1(),
        "fig1-panel2" => fig1_panel2(),
        "fig1-panel3" => fig1_panel3(),
        "fig2" => fig2(),
        "fig3-panel1" => fig3_panel1(),
        "fig3-panel1-noedge" => fig3_panel1_noedge(),
        "fig3-panel1-yr" => fig3_panel1_yr(),
        "fig3-panel2" => fig3_panel2(),
        "fig3-panel3" => fig3_panel3(),
        "figS1" => fig_s1(),
        "figS2-blinded" => fig_s2_blinded(),
        "negctrl-pop" => negctrl_pop(),
        "interference-demo" => interference_demo(),
        _ => return None,
    };
    Some(scenario)
}

fn bern(parents: &[&str], p1: &[f64]) -> NodeSpec {
    NodeSpec {
        parents: parents.iter().map(|s| s.to_string()).collect(),
        support: None,
        p1: Some(p1.to_vec()),
        rows: None,
    }
}

fn cat(parents: &[&str], support: &[Value], rows: &[&[f64]]) -> NodeSpec {
    NodeSpec {
        parents: parents.iter().map(|s| s.to_string()).collect(),
        support: Some(support.to_vec()),
        p1: None,
        rows: Some(rows.iter().map(|r| r.to_vec()).collect()),
    }
}

fn model(nodes: &[&str], edges: &[(&str, &str)], functions: Vec<(&str, NodeSpec)>) -> ModelSection {
    ModelSection {
        dag: DagSpec {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        },
        functions: functions
            .into_iter()
            .map(|(n, spec)| (n.to_string(), spec))
            .collect(),
        resolution: 1000,
        coupling: Default::default(),
    }
}

fn roles(a: &str, y: &str) -> Roles {
    Roles {
        a: a.to_string(),
        y: y.to_string(),
        b: None,
        b_m: None,
        b_sc: None,
        h: None,
        p: None,
        r: None,
        f: None,
        l: Vec::new(),
    }
}

fn sample(n: usize) -> SampleSection {
    SampleSection {
        n,
        seed: 1,
        bootstrap: None,
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn scenario(name: &str) -> Scenario {
    Scenario {
        schema_version: 1,
        name: name.to_string(),
        model: None,
        roles: None,
        groups: None,
        analyses: Vec::new(),
        sample: None,
    }
}

/// The worked contrast table: randomized vaccination, behaviour uplift
/// 0.30 to 0.70, infection risk higher under riskier behaviour in both
/// arms and lower under vaccination at either behaviour level.
fn table1() -> Scenario {
    Scenario {
        model: Some(model(
            &["A", "B", "Y"],
            &[("A", "B"), ("A", "Y"), ("B", "Y")],
            vec![
                ("A", bern(&[], &[0.5])),
                ("B", bern(&["A"], &[0.30, 0.70])),
                ("Y", bern(&["A", "B"], &[0.25, 0.35, 0.14, 0.21])),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            ..roles("A", "Y")
        }),
        analyses: strings(&[
            "tau_rw",
            "nde",
            "nie",
            "cde:0",
            "cde:1",
            "assumptions",
            "plugin_nde",
            "plugin_total",
            "positivity",
        ]),
        sample: Some(SampleSection {
            n: 100_000,
            seed: 1,
            bootstrap: Some(200),
        }),
        ..scenario("table1")
    }
}

/// Unconfounded mediation with a different parameterization than the
/// contrast table.
fn fig1_panel1() -> Scenario {
    Scenario {
        model: Some(model(
            &["A", "B", "Y"],
            &[("A", "B"), ("A", "Y"), ("B", "Y")],
            vec![
                ("A", bern(&[], &[0.5])),
                ("B", bern(&["A"], &[0.25, 0.60])),
                ("Y", bern(&["A", "B"], &[0.20, 0.32, 0.10, 0.22])),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "nde", "nie", "assumptions"]),
        sample: Some(sample(100_000)),
        ..scenario("fig1-panel1")
    }
}

/// Healthcare seeking drives both vaccination and outcome hard enough
/// that the crude arm contrast flips sign against the true effect.
fn fig1_panel2() -> Scenario {
    Scenario {
        model: Some(model(
            &["H", "A", "B", "Y"],
            &[
                ("H", "A"),
                ("H", "Y"),
                ("A", "B"),
                ("A", "Y"),
                ("B", "Y"),
            ],
            vec![
                ("H", bern(&[], &[0.5])),
                ("A", bern(&["H"], &[0.2, 0.8])),
                ("B", bern(&["A"], &[0.3, 0.7])),
                (
                    "Y",
                    bern(
                        &["H", "A", "B"],
                        &[0.12, 0.19, 0.02, 0.09, 0.42, 0.49, 0.32, 0.39],
                    ),
                ),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            h: Some("H".to_string()),
            l: vec!["H".to_string()],
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "nde", "assumptions", "plugin_total", "plugin_nde"]),
        sample: Some(SampleSection {
            n: 100_000,
            seed: 1,
            bootstrap: Some(200),
        }),
        ..scenario("fig1-panel2")
    }
}

/// Healthcare seeking additionally drives behaviour, and work environment
/// drives behaviour alone; adjusting for H identifies the direct effect.
fn fig1_panel3() -> Scenario {
    Scenario {
        model: Some(model(
            &["H", "W", "A", "B", "Y"],
            &[
                ("H", "A"),
                ("H", "B"),
                ("H", "Y"),
                ("W", "B"),
                ("A", "B"),
                ("A", "Y"),
                ("B", "Y"),
            ],
            vec![
                ("H", bern(&[], &[0.5])),
                ("W", bern(&[], &[0.5])),
                ("A", bern(&["H"], &[0.2, 0.8])),
                (
                    "B",
                    bern(
                        &["A", "H", "W"],
                        &[0.15, 0.25, 0.30, 0.40, 0.55, 0.65, 0.70, 0.80],
                    ),
                ),
                (
                    "Y",
                    bern(
                        &["H", "A", "B"],
                        &[0.25, 0.35, 0.14, 0.21, 0.40, 0.50, 0.29, 0.36],
                    ),
                ),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            h: Some("H".to_string()),
            l: vec!["H".to_string()],
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "nde", "nie", "assumptions", "plugin_nde"]),
        sample: Some(SampleSection {
            n: 100_000,
            seed: 1,
            bootstrap: Some(200),
        }),
        ..scenario("fig1-panel3")
    }
}

/// Healthcare seeking responds to vaccination (H2), confounding the
/// behaviour-outcome relation from inside the mediating machinery: the
/// cross-world assumption fails and no adjustment set fixes it.
fn fig2() -> Scenario {
    Scenario {
        model: Some(model(
            &["H1", "A", "H2", "B", "Y"],
            &[
                ("H1", "A"),
                ("H1", "Y"),
                ("A", "H2"),
                ("A", "B"),
                ("A", "Y"),
                ("H2", "B"),
                ("H2", "Y"),
                ("B", "Y"),
            ],
            vec![
                ("H1", bern(&[], &[0.5])),
                ("A", bern(&["H1"], &[0.3, 0.6])),
                ("H2", bern(&["A"], &[0.2, 0.8])),
                ("B", bern(&["A", "H2"], &[0.2, 0.5, 0.5, 0.8])),
                (
                    "Y",
                    bern(
                        &["H1", "A", "H2", "B"],
                        &[
                            0.05, 0.20, 0.30, 0.45, 0.00, 0.15, 0.25, 0.40, //
                            0.25, 0.40, 0.50, 0.65, 0.20, 0.35, 0.45, 0.60,
                        ],
                    ),
                ),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            h: Some("H1".to_string()),
            l: vec!["H1".to_string()],
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "nde", "assumptions", "plugin_nde"]),
        sample: Some(SampleSection {
            n: 100_000,
            seed: 1,
            bootstrap: Some(200),
        }),
        ..scenario("fig2")
    }
}

type Edges = Vec<(&'static str, &'static str)>;
type NodeFns = Vec<(&'static str, NodeSpec)>;

fn fig3_panel1_nodes(risk_compensation: bool, y_to_r: bool) -> (Edges, NodeFns) {
    let mut edges = vec![
        ("H", "A"),
        ("H", "Y"),
        ("H", "R"),
        ("A", "Y"),
        ("B", "Y"),
        ("B", "R"),
    ];
    let b = if risk_compensation {
        edges.push(("A", "B"));
        bern(&["A"], &[0.3, 0.7])
    } else {
        bern(&[], &[0.3])
    };
    let r = if y_to_r {
        edges.push(("Y", "R"));
        bern(
            &["H", "B", "Y"],
            &[0.10, 0.30, 0.35, 0.55, 0.25, 0.45, 0.50, 0.70],
        )
    } else {
        bern(&["H", "B"], &[0.10, 0.35, 0.25, 0.50])
    };
    let functions = vec![
        ("H", bern(&[], &[0.4])),
        ("A", bern(&["H"], &[0.3, 0.6])),
        ("B", b),
        (
            "Y",
            bern(
                &["H", "A", "B"],
                &[0.15, 0.30, 0.05, 0.20, 0.35, 0.50, 0.25, 0.40],
            ),
        ),
        ("R", r),
    ];
    (edges, functions)
}

/// Behaviour feeds both the vaccine-targeted outcome and an alternative
/// infection; conditioned on H, an arm difference in R flags behaviour.
fn fig3_panel1() -> Scenario {
    let (edges, functions) = fig3_panel1_nodes(true, false);
    Scenario {
        model: Some(model(&["H", "A", "B", "Y", "R"], &edges, functions)),
        roles: Some(Roles {
            b: Some("B".to_string()),
            h: Some("H".to_string()),
            r: Some("R".to_string()),
            l: vec!["H".to_string()],
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "nde", "alt_outcome", "panel_interpretation"]),
        sample: Some(sample(100_000)),
        ..scenario("fig3-panel1")
    }
}

/// Identical structure with the behaviour response to vaccination removed.
fn fig3_panel1_noedge() -> Scenario {
    let (edges, functions) = fig3_panel1_nodes(false, false);
    Scenario {
        model: Some(model(&["H", "A", "B", "Y", "R"], &edges, functions)),
        roles: Some(Roles {
            b: Some("B".to_string()),
            h: Some("H".to_string()),
            r: Some("R".to_string()),
            l: vec!["H".to_string()],
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "alt_outcome", "panel_interpretation"]),
        sample: Some(sample(100_000)),
        ..scenario("fig3-panel1-noedge")
    }
}

/// Disease resistance links Y into R, and the conditioning set includes
/// Y: the graph check flags the alternative-outcome test as invalid
/// through the opened collider route.
fn fig3_panel1_yr() -> Scenario {
    let (edges, functions) = fig3_panel1_nodes(true, true);
    Scenario {
        model: Some(model(&["H", "A", "B", "Y", "R"], &edges, functions)),
        roles: Some(Roles {
            b: Some("B".to_string()),
            h: Some("H".to_string()),
            r: Some("R".to_string()),
            l: vec!["H".to_string(), "Y".to_string()],
            ..roles("A", "Y")
        }),
        analyses: strings(&["alt_outcome"]),
        sample: Some(sample(100_000)),
        ..scenario("fig3-panel1-yr")
    }
}

fn fig3_split_model(b2_affects_y: bool) -> ModelSection {
    let mut edges = vec![("A", "B1"), ("A", "B2"), ("B1", "Y"), ("B2", "R"), ("A", "Y")];
    let y = if b2_affects_y {
        edges.push(("B2", "Y"));
        bern(
            &["A", "B1", "B2"],
            &[0.30, 0.40, 0.45, 0.55, 0.20, 0.30, 0.35, 0.45],
        )
    } else {
        bern(&["A", "B1"], &[0.30, 0.45, 0.20, 0.35])
    };
    model(
        &["A", "B1", "B2", "Y", "R"],
        &edges,
        vec![
            ("A", bern(&[], &[0.5])),
            ("B1", bern(&["A"], &[0.3, 0.6])),
            ("B2", bern(&["A"], &[0.3, 0.5])),
            ("Y", y),
            ("R", bern(&["B2"], &[0.2, 0.6])),
        ],
    )
}

fn fig3_split_roles() -> Roles {
    Roles {
        b_m: Some("B1".to_string()),
        b_sc: Some("B2".to_string()),
        r: Some("R".to_string()),
        ..roles("A", "Y")
    }
}

/// Both behaviour aspects matter for Y; one also drives R, so an arm
/// difference in R still signals outcome-relevant behaviour change.
fn fig3_panel2() -> Scenario {
    Scenario {
        model: Some(fig3_split_model(true)),
        roles: Some(fig3_split_roles()),
        analyses: strings(&["tau_rw", "alt_outcome", "panel_interpretation"]),
        sample: Some(sample(100_000)),
        ..scenario("fig3-panel2")
    }
}

/// The R-relevant behaviour aspect no longer reaches Y: an arm difference
/// in R is real but says nothing about the outcome of interest.
fn fig3_panel3() -> Scenario {
    Scenario {
        model: Some(fig3_split_model(false)),
        roles: Some(fig3_split_roles()),
        analyses: strings(&["tau_rw", "alt_outcome", "panel_interpretation"]),
        sample: Some(sample(100_000)),
        ..scenario("fig3-panel3")
    }
}

/// Split mediators: vaccination reduces mask wearing and increases
/// social contact, each channel pushing infection its own way.
fn fig_s1() -> Scenario {
    Scenario {
        model: Some(model(
            &["A", "BM", "BSC", "Y"],
            &[
                ("A", "BM"),
                ("A", "BSC"),
                ("A", "Y"),
                ("BM", "Y"),
                ("BSC", "Y"),
            ],
            vec![
                ("A", bern(&[], &[0.5])),
                ("BM", bern(&["A"], &[0.6, 0.3])),
                ("BSC", bern(&["A"], &[0.3, 0.7])),
                (
                    "Y",
                    bern(
                        &["A", "BM", "BSC"],
                        &[0.25, 0.37, 0.15, 0.27, 0.20, 0.32, 0.10, 0.22],
                    ),
                ),
            ],
        )),
        roles: Some(Roles {
            b_m: Some("BM".to_string()),
            b_sc: Some("BSC".to_string()),
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "path_specific"]),
        sample: Some(sample(100_000)),
        ..scenario("figS1")
    }
}

/// Blinded trial: assignment shapes behaviour only through perceived
/// protection, and blinding pins perception at "uncertain" in both arms,
/// so behaviour at P = -1 matches the unblinded control behaviour.
fn fig_s2_blinded() -> Scenario {
    Scenario {
        model: Some(model(
            &["A", "P", "B", "Y"],
            &[("A", "P"), ("P", "B"), ("A", "Y"), ("B", "Y")],
            vec![
                ("A", bern(&[], &[0.5])),
                (
                    "P",
                    cat(&["A"], &[-1, 0, 1], &[&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]),
                ),
                ("B", bern(&["P"], &[0.30, 0.30, 0.70])),
                ("Y", bern(&["A", "B"], &[0.25, 0.35, 0.14, 0.21])),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            p: Some("P".to_string()),
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_vt", "tau_rw"]),
        sample: Some(sample(100_000)),
        ..scenario("figS2-blinded")
    }
}

/// A subgroup (F = 1) gains no biological protection from vaccination;
/// behaviour still responds, so any arm contrast inside the subgroup
/// exposes the behavioural channel.
fn negctrl_pop() -> Scenario {
    Scenario {
        model: Some(model(
            &["A", "F", "B", "Y"],
            &[("A", "B"), ("A", "Y"), ("B", "Y"), ("F", "Y")],
            vec![
                ("A", bern(&[], &[0.5])),
                ("F", bern(&[], &[0.3])),
                ("B", bern(&["A"], &[0.3, 0.7])),
                (
                    "Y",
                    bern(
                        &["A", "B", "F"],
                        &[0.15, 0.15, 0.25, 0.25, 0.05, 0.15, 0.15, 0.25],
                    ),
                ),
            ],
        )),
        roles: Some(Roles {
            b: Some("B".to_string()),
            f: Some("F".to_string()),
            ..roles("A", "Y")
        }),
        analyses: strings(&["tau_rw", "nde", "negative_control"]),
        sample: Some(sample(200_000)),
        ..scenario("negctrl-pop")
    }
}

/// Two households sharing one response template: vaccinated others lower
/// a unit's infection risk through the contact summary.
fn interference_demo() -> Scenario {
    Scenario {
        groups: Some(GroupsSection {
            sizes: vec![3, 2],
            alpha: 0.3,
            mediator_reads_summary: false,
            mediator_p1: vec![0.30, 0.70],
            outcome_p1: vec![
                0.30, 0.23, 0.16, //
                0.45, 0.38, 0.31, //
                0.20, 0.13, 0.06, //
                0.35, 0.28, 0.21,
            ],
            resolution: 1000,
        }),
        analyses: strings(&[
            "interference_total",
            "interference_nde",
            "interference_spillover",
            "interference_average_total:units",
            "interference_average_total:groups",
            "interference_average_nde:units",
        ]),
        ..scenario("interference-demo")
    }
}

/// A random split-mediator model in the same shape as `figS1`: every
/// probability is drawn on the representable 1/1000 grid inside
/// [0.05, 0.95]. Decomposition identities must hold on all of them.
pub fn random_fig_s1(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = || f64::from(rng.gen_range(50u32..=950)) / 1000.0;
    let bm = [p(), p()];
    let bsc = [p(), p()];
    let y: Vec<f64> = (0..8).map(|_| p()).collect();
    let mut s = fig_s1();
    s.name = format!("figS1-random-{seed}");
    let functions = &mut s.model.as_mut().expect("figS1 has a model").functions;
    functions.insert("BM".to_string(), bern(&["A"], &bm));
    functions.insert("BSC".to_string(), bern(&["A"], &bsc));
    functions.insert("Y".to_string(), bern(&["A", "BM", "BSC"], &y));
    s
}
