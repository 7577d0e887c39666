//! Partial interference: units live in disjoint groups, and a unit's
//! outcome may depend on the whole group assignment vector, but only
//! through the count of vaccinated *other* members (a permutation-invariant
//! summary). Across groups there is no dependence at all.
//!
//! Every unit shares one response template: a mediator read off its own
//! assignment (optionally also the summary, behind an explicit flag) and an
//! outcome read off own assignment, own mediator, and the summary. Noise is
//! a pair of independent uniform quantiles per unit, so all group-level
//! quantities reduce to small exact sums; [`GroupedModel::expand_group`]
//! builds the equivalent flat structural model as an independent oracle.

use crate::estimands::EstimandValue;
use crate::scalar::Scalar;
use crate::scm::{self, ModelBuilder, ModelError, StructuralModel, Value};
use crate::graph::CausalDag;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::marker::PhantomData;
use thiserror::Error;

/// Most assignment vectors enumerable per group before erroring.
pub const ASSIGNMENT_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("group index {i} out of range ({groups} groups)")]
    GroupIndex { i: usize, groups: usize },
    #[error("unit index {j} out of range (group has {size} units)")]
    UnitIndex { j: usize, size: usize },
    #[error("assignment vector has {got} entries, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("assignment values must be 0 or 1")]
    AssignmentValue,
    #[error("noise value {u} outside 0..{resolution}")]
    NoiseRange { u: u32, resolution: u32 },
    #[error("invalid grouped model: {0}")]
    Invalid(String),
    #[error(
        "the mediator reads the group summary, so holding it at its own-assignment-0 value \
         is ambiguous about others' assignments; the cross-world direct effect is not \
         defined for this model"
    )]
    MediatorInterference,
    #[error("{required} assignment vectors exceed the cap of {cap}")]
    CapacityExceeded { required: u128, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One unit's exogenous noise: quantiles for the mediator and the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitNoise {
    pub u_b: u32,
    pub u_y: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectKind {
    Total,
    NaturalDirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    UniformOverUnits,
    UniformOverGroups,
}

/// A population of groups sharing one unit response template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedModel<T> {
    sizes: Vec<usize>,
    resolution: u32,
    mediator_reads_summary: bool,
    /// Pr(B=1) thresholds in resolution units: `[a]`, or `[a * s_count + s]`
    /// when the mediator reads the summary.
    med_units: Vec<i64>,
    /// Pr(Y=1) thresholds in resolution units: `[(a * 2 + b) * s_count + s]`.
    out_units: Vec<i64>,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> GroupedModel<T> {
    /// `mediator_p1` holds Pr(B=1 | own a) for a = 0, 1; `outcome_p1` holds
    /// Pr(Y=1 | own a, own b, s) for s = 0 .. max group size − 1, laid out
    /// with a most significant and s least.
    pub fn new(
        sizes: &[usize],
        mediator_p1: &[f64],
        outcome_p1: &[f64],
    ) -> Result<Self, InterferenceError> {
        Self::with_options(sizes, mediator_p1, outcome_p1, false, 1000)
    }

    /// As [`GroupedModel::new`]; with `mediator_reads_summary` the mediator
    /// rows are Pr(B=1 | own a, s) in the same layout as the outcome.
    pub fn with_options(
        sizes: &[usize],
        mediator_p1: &[f64],
        outcome_p1: &[f64],
        mediator_reads_summary: bool,
        resolution: u32,
    ) -> Result<Self, InterferenceError> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(InterferenceError::Invalid(
                "need at least one group, all non-empty".to_string(),
            ));
        }
        if resolution == 0 {
            return Err(InterferenceError::Invalid("resolution must be positive".to_string()));
        }
        let s_count = *sizes.iter().max().unwrap();
        let med_len = if mediator_reads_summary { 2 * s_count } else { 2 };
        if mediator_p1.len() != med_len {
            return Err(InterferenceError::Invalid(format!(
                "mediator needs {med_len} probabilities, got {}",
                mediator_p1.len()
            )));
        }
        if outcome_p1.len() != 4 * s_count {
            return Err(InterferenceError::Invalid(format!(
                "outcome needs {} probabilities, got {}",
                4 * s_count,
                outcome_p1.len()
            )));
        }
        let med_units = mediator_p1
            .iter()
            .map(|&p| scm::to_units("mediator", p, resolution))
            .collect::<Result<_, _>>()?;
        let out_units = outcome_p1
            .iter()
            .map(|&p| scm::to_units("outcome", p, resolution))
            .collect::<Result<_, _>>()?;
        Ok(GroupedModel {
            sizes: sizes.to_vec(),
            resolution,
            mediator_reads_summary,
            med_units,
            out_units,
            _scalar: PhantomData,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn mediator_reads_summary(&self) -> bool {
        self.mediator_reads_summary
    }

    fn s_count(&self) -> usize {
        *self.sizes.iter().max().unwrap()
    }

    fn check_group(&self, i: usize) -> Result<usize, InterferenceError> {
        self.sizes
            .get(i)
            .copied()
            .ok_or(InterferenceError::GroupIndex {
                i,
                groups: self.sizes.len(),
            })
    }

    fn check_unit(&self, i: usize, j: usize) -> Result<usize, InterferenceError> {
        let size = self.check_group(i)?;
        if j >= size {
            return Err(InterferenceError::UnitIndex { j, size });
        }
        Ok(size)
    }

    fn check_assignment(values: &[Value], expected: usize) -> Result<(), InterferenceError> {
        if values.len() != expected {
            return Err(InterferenceError::AssignmentLength {
                expected,
                got: values.len(),
            });
        }
        if values.iter().any(|&v| v != 0 && v != 1) {
            return Err(InterferenceError::AssignmentValue);
        }
        Ok(())
    }

    fn med_threshold(&self, a: Value, s: usize) -> i64 {
        if self.mediator_reads_summary {
            self.med_units[a as usize * self.s_count() + s]
        } else {
            self.med_units[a as usize]
        }
    }

    fn out_threshold(&self, a: Value, b: Value, s: usize) -> i64 {
        self.out_units[(a as usize * 2 + b as usize) * self.s_count() + s]
    }

    fn prob(&self, units: i64) -> T {
        T::from_ratio(units, i64::from(self.resolution))
    }

    /// Pr(B = 1 | own assignment, summary) as an exact scalar.
    fn p_med(&self, a: Value, s: usize) -> T {
        self.prob(self.med_threshold(a, s))
    }

    /// Pr(Y = 1 | own assignment, own mediator, summary).
    fn p_out(&self, a: Value, b: Value, s: usize) -> T {
        self.prob(self.out_threshold(a, b, s))
    }

    /// E[Y] with own assignment `a_own`, mediator drawn at assignment
    /// `a_med`, others' vaccinated count `s_med` for the mediator and
    /// `s_out` for the outcome.
    fn risk(&self, a_own: Value, a_med: Value, s_med: usize, s_out: usize) -> T {
        let pb = self.p_med(a_med, s_med);
        pb.clone() * self.p_out(a_own, 1, s_out)
            + (T::one() - pb) * self.p_out(a_own, 0, s_out)
    }

    /// Deterministic potential outcome of unit `j` in group `i` under the
    /// full assignment vector, at the given unit noise.
    pub fn group_potential_outcome(
        &self,
        i: usize,
        j: usize,
        assignment: &[Value],
        noise: UnitNoise,
    ) -> Result<Value, InterferenceError> {
        let size = self.check_unit(i, j)?;
        Self::check_assignment(assignment, size)?;
        for u in [noise.u_b, noise.u_y] {
            if u >= self.resolution {
                return Err(InterferenceError::NoiseRange {
                    u,
                    resolution: self.resolution,
                });
            }
        }
        let s = assignment
            .iter()
            .enumerate()
            .filter(|&(k, &v)| k != j && v == 1)
            .count();
        let a = assignment[j];
        let b = Value::from(i64::from(noise.u_b) < self.med_threshold(a, s));
        let y = i64::from(noise.u_y) < self.out_threshold(a, b, s);
        Ok(Value::from(y))
    }

    fn others_count(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
    ) -> Result<usize, InterferenceError> {
        let size = self.check_unit(i, j)?;
        Self::check_assignment(a_minus_j, size - 1)?;
        Ok(a_minus_j.iter().filter(|&&v| v == 1).count())
    }

    /// E[Y^{a_j=1} − Y^{a_j=0}] for unit `j` with the rest of the group
    /// held at `a_minus_j`.
    pub fn individual_total_effect(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
    ) -> Result<T, InterferenceError> {
        let s = self.others_count(i, j, a_minus_j)?;
        Ok(self.risk(1, 1, s, s) - self.risk(0, 0, s, s))
    }

    /// E[Y^{a_j=1, B^{a_j=0}} − Y^{a_j=0}]: own assignment switched on with
    /// the mediator held at its unvaccinated response, others fixed.
    pub fn individual_nde_interf(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
    ) -> Result<T, InterferenceError> {
        if self.mediator_reads_summary {
            return Err(InterferenceError::MediatorInterference);
        }
        let s = self.others_count(i, j, a_minus_j)?;
        Ok(self.risk(1, 0, s, s) - self.risk(0, 0, s, s))
    }

    /// E[Y^{a_j=0, a_minus_j} − Y^{a_j=0, a_minus_j_star}]: the effect on an
    /// unvaccinated unit of changing only the others' assignments.
    pub fn spillover_effect(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
        a_minus_j_star: &[Value],
    ) -> Result<T, InterferenceError> {
        let s = self.others_count(i, j, a_minus_j)?;
        let s_star = self.others_count(i, j, a_minus_j_star)?;
        Ok(self.risk(0, 0, s, s) - self.risk(0, 0, s_star, s_star))
    }

    /// Average of the per-unit effect over every unit, with others'
    /// assignments weighted as i.i.d. Bernoulli(alpha) over all vectors.
    /// `UniformOverUnits` weights each unit equally; `UniformOverGroups`
    /// averages within groups first.
    pub fn average_effects(
        &self,
        kind: EffectKind,
        weighting: Weighting,
        alpha: f64,
    ) -> Result<T, InterferenceError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(InterferenceError::Invalid(format!(
                "alpha {alpha} outside [0,1]"
            )));
        }
        let alpha_t = T::from_ratio((alpha * 1e12).round() as i64, 1_000_000_000_000);
        let one_minus = T::one() - alpha_t.clone();
        let mut group_means: Vec<T> = Vec::with_capacity(self.sizes.len());
        for (i, &size) in self.sizes.iter().enumerate() {
            let others = size - 1;
            let vectors = 1u128 << others.min(127);
            if vectors > u128::from(ASSIGNMENT_CAP) {
                return Err(InterferenceError::CapacityExceeded {
                    required: vectors,
                    cap: ASSIGNMENT_CAP,
                });
            }
            let mut unit_sum = T::zero();
            for j in 0..size {
                let mut expect = T::zero();
                for mask in 0..(1u64 << others) {
                    let a_minus_j: Vec<Value> = (0..others)
                        .map(|k| Value::from((mask >> k) & 1 == 1))
                        .collect();
                    let effect = match kind {
                        EffectKind::Total => self.individual_total_effect(i, j, &a_minus_j)?,
                        EffectKind::NaturalDirect => {
                            self.individual_nde_interf(i, j, &a_minus_j)?
                        }
                    };
                    let ones = mask.count_ones();
                    let mut weight = T::one();
                    for _ in 0..ones {
                        weight = weight * alpha_t.clone();
                    }
                    for _ in 0..(others as u32 - ones) {
                        weight = weight * one_minus.clone();
                    }
                    expect = expect + weight * effect;
                }
                unit_sum = unit_sum + expect;
            }
            group_means.push(unit_sum / T::from_ratio(size as i64, 1));
        }
        let total_units: i64 = self.sizes.iter().map(|&n| n as i64).sum();
        Ok(match weighting {
            Weighting::UniformOverUnits => {
                let mut acc = T::zero();
                for (mean, &size) in group_means.iter().zip(&self.sizes) {
                    acc = acc + mean.clone() * T::from_ratio(size as i64, 1);
                }
                acc / T::from_ratio(total_units, 1)
            }
            Weighting::UniformOverGroups => {
                let mut acc = T::zero();
                let groups = group_means.len() as i64;
                for mean in group_means {
                    acc = acc + mean;
                }
                acc / T::from_ratio(groups, 1)
            }
        })
    }

    /// The single-unit structural model this population collapses to when
    /// the outcome ignores the summary. Errors if any response actually
    /// reads the summary. Treatment is Bernoulli(alpha).
    pub fn unit_model(&self, alpha: f64) -> Result<StructuralModel<T>, InterferenceError> {
        let s_count = self.s_count();
        if self.mediator_reads_summary {
            for a in 0..2 {
                let base = self.med_units[a * s_count];
                for s in 0..s_count {
                    if self.med_units[a * s_count + s] != base {
                        return Err(InterferenceError::Invalid(
                            "mediator reads the summary; no unit model exists".to_string(),
                        ));
                    }
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let base = self.out_units[(a * 2 + b) * s_count];
                for s in 0..s_count {
                    if self.out_units[(a * 2 + b) * s_count + s] != base {
                        return Err(InterferenceError::Invalid(
                            "outcome reads the summary; no unit model exists".to_string(),
                        ));
                    }
                }
            }
        }
        let res = f64::from(self.resolution);
        let dag = CausalDag::new(["A", "B", "Y"], &[("A", "B"), ("A", "Y"), ("B", "Y")])
            .map_err(ModelError::from)?;
        let model = ModelBuilder::new(dag)
            .resolution(self.resolution)
            .bernoulli("A", &[], &[alpha])
            .bernoulli(
                "B",
                &["A"],
                &[
                    self.med_threshold(0, 0) as f64 / res,
                    self.med_threshold(1, 0) as f64 / res,
                ],
            )
            .bernoulli(
                "Y",
                &["A", "B"],
                &[
                    self.out_threshold(0, 0, 0) as f64 / res,
                    self.out_threshold(0, 1, 0) as f64 / res,
                    self.out_threshold(1, 0, 0) as f64 / res,
                    self.out_threshold(1, 1, 0) as f64 / res,
                ],
            )
            .build()?;
        Ok(model)
    }

    /// Builds group `i` as a flat structural model with nodes `A1..`, `B1..`,
    /// `Y1..` (unit numbering 1-based) and treatment Bernoulli(alpha).
    /// Exponential in the group size; intended as a brute-force oracle.
    pub fn expand_group(
        &self,
        i: usize,
        alpha: f64,
    ) -> Result<StructuralModel<T>, InterferenceError> {
        let size = self.check_group(i)?;
        let res = f64::from(self.resolution);
        let a_names: Vec<String> = (1..=size).map(|j| format!("A{j}")).collect();
        let b_names: Vec<String> = (1..=size).map(|j| format!("B{j}")).collect();
        let y_names: Vec<String> = (1..=size).map(|j| format!("Y{j}")).collect();
        let mut names: Vec<&str> = Vec::new();
        for list in [&a_names, &b_names, &y_names] {
            names.extend(list.iter().map(String::as_str));
        }
        let mut edges: Vec<(&str, &str)> = Vec::new();
        for j in 0..size {
            if self.mediator_reads_summary {
                for a in &a_names {
                    edges.push((a, &b_names[j]));
                }
            } else {
                edges.push((&a_names[j], &b_names[j]));
            }
            for a in &a_names {
                edges.push((a, &y_names[j]));
            }
            edges.push((&b_names[j], &y_names[j]));
        }
        let dag = CausalDag::new(names, &edges).map_err(ModelError::from)?;
        let mut builder = ModelBuilder::new(dag).resolution(self.resolution);
        for a in &a_names {
            builder = builder.bernoulli(a, &[], &[alpha]);
        }
        for j in 0..size {
            if self.mediator_reads_summary {
                let parents: Vec<&str> = a_names.iter().map(String::as_str).collect();
                let mut rows = Vec::with_capacity(1 << size);
                for combo in 0..(1usize << size) {
                    // First parent most significant.
                    let bit = |k: usize| (combo >> (size - 1 - k)) & 1;
                    let own = bit(j) as Value;
                    let s: usize = (0..size).filter(|&k| k != j && bit(k) == 1).count();
                    rows.push(self.med_threshold(own, s) as f64 / res);
                }
                builder = builder.bernoulli(&b_names[j], &parents, &rows);
            } else {
                builder = builder.bernoulli(
                    &b_names[j],
                    &[&a_names[j]],
                    &[
                        self.med_threshold(0, 0) as f64 / res,
                        self.med_threshold(1, 0) as f64 / res,
                    ],
                );
            }
            let mut parents: Vec<&str> = a_names.iter().map(String::as_str).collect();
            parents.push(&b_names[j]);
            let mut rows = Vec::with_capacity(1 << (size + 1));
            for combo in 0..(1usize << (size + 1)) {
                let bit = |k: usize| (combo >> (size - k)) & 1;
                let own = bit(j) as Value;
                let b = (combo & 1) as Value;
                let s: usize = (0..size).filter(|&k| k != j && bit(k) == 1).count();
                rows.push(self.out_threshold(own, b, s) as f64 / res);
            }
            builder = builder.bernoulli(&y_names[j], &parents, &rows);
        }
        Ok(builder.build()?)
    }

    fn mc_contrast(
        &self,
        i: usize,
        j: usize,
        n: usize,
        seed: u64,
        eval: impl Fn(u32, u32) -> f64,
    ) -> Result<(f64, f64), InterferenceError> {
        self.check_unit(i, j)?;
        if n < 2 {
            return Err(InterferenceError::Invalid(
                "need at least two draws".to_string(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let u_b = rng.gen_range(0..self.resolution);
            let u_y = rng.gen_range(0..self.resolution);
            let d = eval(u_b, u_y);
            sum += d;
            sum_sq += d * d;
        }
        let mean = sum / n as f64;
        let var = (sum_sq - sum * sum / n as f64) / (n as f64 - 1.0);
        let se = (var.max(0.0) / n as f64).sqrt();
        Ok((mean, se))
    }

    fn y_at(&self, a_own: Value, a_med: Value, s: usize, u_b: u32, u_y: u32) -> f64 {
        let b = Value::from(i64::from(u_b) < self.med_threshold(a_med, s));
        f64::from(i64::from(u_y) < self.out_threshold(a_own, b, s))
    }

    /// Monte Carlo mean and standard error of the individual total effect,
    /// pairing both arms on shared unit noise.
    pub fn mc_total(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
        n: usize,
        seed: u64,
    ) -> Result<(f64, f64), InterferenceError> {
        let s = self.others_count(i, j, a_minus_j)?;
        self.mc_contrast(i, j, n, seed, |u_b, u_y| {
            self.y_at(1, 1, s, u_b, u_y) - self.y_at(0, 0, s, u_b, u_y)
        })
    }

    /// Monte Carlo counterpart of [`GroupedModel::individual_nde_interf`].
    pub fn mc_nde(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
        n: usize,
        seed: u64,
    ) -> Result<(f64, f64), InterferenceError> {
        if self.mediator_reads_summary {
            return Err(InterferenceError::MediatorInterference);
        }
        let s = self.others_count(i, j, a_minus_j)?;
        self.mc_contrast(i, j, n, seed, |u_b, u_y| {
            self.y_at(1, 0, s, u_b, u_y) - self.y_at(0, 0, s, u_b, u_y)
        })
    }

    /// Monte Carlo counterpart of [`GroupedModel::spillover_effect`].
    pub fn mc_spillover(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
        a_minus_j_star: &[Value],
        n: usize,
        seed: u64,
    ) -> Result<(f64, f64), InterferenceError> {
        let s = self.others_count(i, j, a_minus_j)?;
        let s_star = self.others_count(i, j, a_minus_j_star)?;
        self.mc_contrast(i, j, n, seed, |u_b, u_y| {
            self.y_at(0, 0, s, u_b, u_y) - self.y_at(0, 0, s_star, u_b, u_y)
        })
    }

    /// The individual total effect as a treated/control risk pair, for
    /// report rows.
    pub fn total_contrast(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
    ) -> Result<EstimandValue<T>, InterferenceError> {
        let s = self.others_count(i, j, a_minus_j)?;
        Ok(EstimandValue::contrast(
            "tau(interf)",
            self.risk(1, 1, s, s),
            self.risk(0, 0, s, s),
        ))
    }

    /// The interference direct effect as a treated/control risk pair.
    pub fn nde_contrast(
        &self,
        i: usize,
        j: usize,
        a_minus_j: &[Value],
    ) -> Result<EstimandValue<T>, InterferenceError> {
        if self.mediator_reads_summary {
            return Err(InterferenceError::MediatorInterference);
        }
        let s = self.others_count(i, j, a_minus_j)?;
        Ok(EstimandValue::contrast(
            "nde(interf)",
            self.risk(1, 0, s, s),
            self.risk(0, 0, s, s),
        ))
    }
}
