//! Finite-sample estimation on unit-level data.
//!
//! The central estimator is the mediator-standardized risk difference
//!
//! ```text
//! sum over l, b of { mean(Y | A=1, b, l) - mean(Y | A=0, b, l) }
//!                  * share(b | A=0, l) * share(l)
//! ```
//!
//! computed from a cross-tabulation of the data. Uncertainty comes from a
//! multinomial bootstrap over the cross-tabulation cells, which is
//! distributionally the same as resampling units with replacement and makes
//! the whole procedure invariant to row order. Terms whose required cells
//! are empty are dropped and flagged rather than imputed; any flag marks
//! the estimate unreliable.
//!
//! Population (infinite-data) versions of the same formulas are provided
//! for use as convergence targets; they evaluate the plug-in functional on
//! a model's exact joint distribution.

use crate::scalar::Scalar;
use crate::scm::{ModelError, StructuralModel, Value};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("column `{0}` does not exist")]
    UnknownColumn(String),
    #[error("column `{0}` already exists")]
    DuplicateColumn(String),
    #[error("column `{column}` has {got} rows, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        got: usize,
    },
    #[error("`{0}` is a reserved column name")]
    ReservedName(String),
    #[error("column `{0}` is not observable; estimators only read observable data")]
    NotObservable(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("column `{column}` must be binary over {{0,1}}")]
    NonBinary { column: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("population positivity violated: {0}")]
    PositivityViolation(String),
    #[error("group labels have {got} entries, expected {expected}")]
    GroupMismatch { expected: usize, got: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: cannot parse `{text}` as a small integer value")]
    Parse { row: usize, text: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Column-oriented unit-level data. Columns marked non-observable (sampled
/// counterfactuals) are carried for oracle comparisons but refused by the
/// estimators. An optional group label per row supports clustered designs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<Value>>,
    observable: Vec<bool>,
    group: Option<Vec<u32>>,
}

const GROUP_COLUMN: &str = "group";

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn push_column(
        &mut self,
        name: &str,
        values: Vec<Value>,
        observable: bool,
    ) -> Result<(), EstimationError> {
        if name == GROUP_COLUMN {
            return Err(EstimationError::ReservedName(name.to_string()));
        }
        if self.names.iter().any(|n| n == name) {
            return Err(EstimationError::DuplicateColumn(name.to_string()));
        }
        if !self.columns.is_empty() && values.len() != self.len() {
            return Err(EstimationError::LengthMismatch {
                column: name.to_string(),
                expected: self.len(),
                got: values.len(),
            });
        }
        self.names.push(name.to_string());
        self.columns.push(values);
        self.observable.push(observable);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[Value]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn is_observable(&self, name: &str) -> Option<bool> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.observable[i])
    }

    pub fn set_groups(&mut self, groups: Vec<u32>) -> Result<(), EstimationError> {
        if groups.len() != self.len() {
            return Err(EstimationError::GroupMismatch {
                expected: self.len(),
                got: groups.len(),
            });
        }
        self.group = Some(groups);
        Ok(())
    }

    pub fn groups(&self) -> Option<&[u32]> {
        self.group.as_deref()
    }

    pub(crate) fn observable_column(&self, name: &str) -> Result<&[Value], EstimationError> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| EstimationError::UnknownColumn(name.to_string()))?;
        if !self.observable[i] {
            return Err(EstimationError::NotObservable(name.to_string()));
        }
        Ok(&self.columns[i])
    }

    /// Writes one row per unit with a header of column names. A `group`
    /// column is appended when group labels are present. Observability is
    /// not persisted; every column reads back as observable.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<(), EstimationError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        if self.group.is_some() {
            header.push(GROUP_COLUMN);
        }
        w.write_record(&header)?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for row in 0..self.len() {
            record.clear();
            for col in &self.columns {
                record.push(format!("{:?}", col[row]));
            }
            if let Some(g) = &self.group {
                record.push(format!("{:?}", g[row]));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<(), EstimationError> {
        self.to_csv(std::fs::File::create(path)?)
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self, EstimationError> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let group_at = header.iter().position(|h| h == GROUP_COLUMN);
        let mut columns: Vec<Vec<Value>> = vec![Vec::new(); header.len()];
        let mut groups: Vec<u32> = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            for (i, field) in record.iter().enumerate() {
                if Some(i) == group_at {
                    groups.push(field.parse().map_err(|_| EstimationError::Parse {
                        row,
                        text: field.to_string(),
                    })?);
                } else {
                    columns[i].push(field.parse().map_err(|_| EstimationError::Parse {
                        row,
                        text: field.to_string(),
                    })?);
                }
            }
        }
        let mut data = Dataset::new();
        for (i, name) in header.iter().enumerate() {
            if Some(i) == group_at {
                continue;
            }
            data.push_column(name, std::mem::take(&mut columns[i]), true)?;
        }
        if group_at.is_some() {
            data.set_groups(groups)?;
        }
        Ok(data)
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self, EstimationError> {
        Self::from_csv(std::fs::File::open(path)?)
    }
}

/// Why a term was dropped from a plug-in estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositivityFlag {
    /// No units in arm `a` within covariate cell `l`.
    EmptyArm { l: Vec<Value>, a: Value },
    /// No units with mediator level `b` in arm `a` within cell `l`.
    EmptyCell { l: Vec<Value>, a: Value, b: Value },
}

impl std::fmt::Display for PositivityFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PositivityFlag::EmptyArm { l, a } => write!(f, "empty-arm(l={l:?},a={a})"),
            PositivityFlag::EmptyCell { l, a, b } => {
                write!(f, "empty-cell(l={l:?},a={a},b={b})")
            }
        }
    }
}

/// A plug-in estimate with optional bootstrap uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct PluginEstimate {
    pub estimate: f64,
    /// Bootstrap standard error; absent when no bootstrap was requested.
    pub se: Option<f64>,
    pub replicates: Vec<f64>,
    /// Contrast terms that entered the sum.
    pub cells_used: usize,
    pub flags: Vec<PositivityFlag>,
}

impl PluginEstimate {
    /// True when no term had to be dropped.
    pub fn is_reliable(&self) -> bool {
        self.flags.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        BootstrapConfig {
            replicates: 500,
            seed,
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }
}

pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Cross-tabulation keyed by (covariate values, treatment, mediator,
/// outcome); the mediator slot is unused (fixed 0) for total effects.
type Cells = BTreeMap<(Vec<Value>, Value, Value, Value), u64>;

fn tabulate(
    data: &Dataset,
    a: &str,
    b: Option<&str>,
    y: &str,
    l: &[&str],
) -> Result<Cells, EstimationError> {
    if data.is_empty() {
        return Err(EstimationError::EmptyDataset);
    }
    let a_col = data.observable_column(a)?;
    let b_col = b.map(|b| data.observable_column(b)).transpose()?;
    let y_col = data.observable_column(y)?;
    let l_cols: Vec<&[Value]> = l
        .iter()
        .map(|c| data.observable_column(c))
        .collect::<Result<_, _>>()?;
    let mut cells = Cells::new();
    for row in 0..data.len() {
        let key = (
            l_cols.iter().map(|c| c[row]).collect::<Vec<_>>(),
            a_col[row],
            b_col.map_or(0, |c| c[row]),
            y_col[row],
        );
        *cells.entry(key).or_insert(0) += 1;
    }
    Ok(cells)
}

fn distinct_b(cells: &Cells) -> Vec<Value> {
    let mut out: Vec<Value> = cells.keys().map(|k| k.2).collect();
    out.sort_unstable();
    out.dedup();
    out
}

struct StratumStats {
    /// Per arm: count and outcome sum, indexed by arm value 0/1.
    arm_n: [u64; 2],
    arm_y: [i64; 2],
    /// Per (arm, mediator level): count and outcome sum.
    cell_n: BTreeMap<(Value, Value), (u64, i64)>,
    total: u64,
}

fn stratify(cells: &Cells) -> BTreeMap<Vec<Value>, StratumStats> {
    let mut strata: BTreeMap<Vec<Value>, StratumStats> = BTreeMap::new();
    for ((l, a, b, y), &count) in cells {
        let s = strata.entry(l.clone()).or_insert_with(|| StratumStats {
            arm_n: [0; 2],
            arm_y: [0; 2],
            cell_n: BTreeMap::new(),
            total: 0,
        });
        s.total += count;
        let y_sum = count as i64 * i64::from(*y);
        if *a == 0 || *a == 1 {
            s.arm_n[*a as usize] += count;
            s.arm_y[*a as usize] += y_sum;
        }
        let e = s.cell_n.entry((*a, *b)).or_insert((0, 0));
        e.0 += count;
        e.1 += y_sum;
    }
    strata
}

/// Mediator-standardized contrast from a cross-tabulation. Control-arm
/// mediator shares weight the per-level outcome contrasts; stratum shares
/// weight strata. Flags record dropped terms.
fn nde_from_cells(cells: &Cells, b_levels: &[Value]) -> (f64, usize, Vec<PositivityFlag>) {
    let strata = stratify(cells);
    let n: u64 = strata.values().map(|s| s.total).sum();
    let mut estimate = 0.0;
    let mut used = 0;
    let mut flags = Vec::new();
    for (l, s) in &strata {
        let p_l = s.total as f64 / n as f64;
        let mut arm_missing = false;
        for arm in [0, 1] {
            if s.arm_n[arm] == 0 {
                flags.push(PositivityFlag::EmptyArm {
                    l: l.clone(),
                    a: arm as Value,
                });
                arm_missing = true;
            }
        }
        if arm_missing {
            continue;
        }
        for &b in b_levels {
            let (n0b, y0b) = s.cell_n.get(&(0, b)).copied().unwrap_or((0, 0));
            if n0b == 0 {
                // Zero weight under the control arm: the term vanishes.
                continue;
            }
            let weight = n0b as f64 / s.arm_n[0] as f64;
            let (n1b, y1b) = s.cell_n.get(&(1, b)).copied().unwrap_or((0, 0));
            if n1b == 0 {
                flags.push(PositivityFlag::EmptyCell {
                    l: l.clone(),
                    a: 1,
                    b,
                });
                continue;
            }
            let contrast = y1b as f64 / n1b as f64 - y0b as f64 / n0b as f64;
            estimate += p_l * weight * contrast;
            used += 1;
        }
    }
    (estimate, used, flags)
}

/// Covariate-standardized risk difference from a cross-tabulation.
fn total_from_cells(cells: &Cells) -> (f64, usize, Vec<PositivityFlag>) {
    let strata = stratify(cells);
    let n: u64 = strata.values().map(|s| s.total).sum();
    let mut estimate = 0.0;
    let mut used = 0;
    let mut flags = Vec::new();
    for (l, s) in &strata {
        let p_l = s.total as f64 / n as f64;
        let mut arm_missing = false;
        for arm in [0, 1] {
            if s.arm_n[arm] == 0 {
                flags.push(PositivityFlag::EmptyArm {
                    l: l.clone(),
                    a: arm as Value,
                });
                arm_missing = true;
            }
        }
        if arm_missing {
            continue;
        }
        let contrast = s.arm_y[1] as f64 / s.arm_n[1] as f64 - s.arm_y[0] as f64 / s.arm_n[0] as f64;
        estimate += p_l * contrast;
        used += 1;
    }
    (estimate, used, flags)
}

/// Multinomial draw over the cells, total preserved, by sequential
/// conditional binomials in cell order.
fn resample_cells(cells: &Cells, rng: &mut ChaCha8Rng) -> Cells {
    let n: u64 = cells.values().sum();
    let mut out = Cells::new();
    let mut remaining_n = n;
    let mut remaining_mass = n as f64;
    let last = cells.len().saturating_sub(1);
    for (i, (key, &count)) in cells.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        let drawn = if i == last {
            remaining_n
        } else {
            let p = (count as f64 / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_n, p)
                .expect("probability in range")
                .sample(rng)
        };
        if drawn > 0 {
            out.insert(key.clone(), drawn);
        }
        remaining_n -= drawn;
        remaining_mass -= count as f64;
    }
    out
}

fn bootstrap(
    cells: &Cells,
    cfg: &BootstrapConfig,
    evaluate: impl Fn(&Cells) -> f64,
) -> (Option<f64>, Vec<f64>) {
    if cfg.replicates < 2 {
        return (None, Vec::new());
    }
    let replicates: Vec<f64> = (0..cfg.replicates)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, r as u64));
            evaluate(&resample_cells(cells, &mut rng))
        })
        .collect();
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let var = replicates.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
        / (replicates.len() - 1) as f64;
    (Some(var.sqrt()), replicates)
}

/// Mediator-standardized risk difference (direct-effect plug-in) from
/// observable columns, with optional multinomial-cell bootstrap.
pub fn plugin_nde(
    data: &Dataset,
    a: &str,
    b: &str,
    y: &str,
    l: &[&str],
    boot: Option<&BootstrapConfig>,
) -> Result<PluginEstimate, EstimationError> {
    let cells = tabulate(data, a, Some(b), y, l)?;
    let b_levels = distinct_b(&cells);
    let (estimate, cells_used, flags) = nde_from_cells(&cells, &b_levels);
    let (se, replicates) = match boot {
        Some(cfg) => bootstrap(&cells, cfg, |c| nde_from_cells(c, &b_levels).0),
        None => (None, Vec::new()),
    };
    Ok(PluginEstimate {
        estimate,
        se,
        replicates,
        cells_used,
        flags,
    })
}

/// Covariate-standardized risk difference (total-effect plug-in).
pub fn plugin_total(
    data: &Dataset,
    a: &str,
    y: &str,
    l: &[&str],
    boot: Option<&BootstrapConfig>,
) -> Result<PluginEstimate, EstimationError> {
    let cells = tabulate(data, a, None, y, l)?;
    let (estimate, cells_used, flags) = total_from_cells(&cells);
    let (se, replicates) = match boot {
        Some(cfg) => bootstrap(&cells, cfg, |c| total_from_cells(c).0),
        None => (None, Vec::new()),
    };
    Ok(PluginEstimate {
        estimate,
        se,
        replicates,
        cells_used,
        flags,
    })
}

/// Returns a copy of the data with the given binary column flipped
/// independently with probability `flip_prob` (deterministic in `seed`).
pub fn misclassify_mediator(
    data: &Dataset,
    column: &str,
    flip_prob: f64,
    seed: u64,
) -> Result<Dataset, EstimationError> {
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(EstimationError::InvalidParameter(format!(
            "flip probability {flip_prob} outside [0,1]"
        )));
    }
    let col = data
        .column(column)
        .ok_or_else(|| EstimationError::UnknownColumn(column.to_string()))?;
    if col.iter().any(|&v| v != 0 && v != 1) {
        return Err(EstimationError::NonBinary {
            column: column.to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flipped: Vec<Value> = col
        .iter()
        .map(|&v| {
            if rng.gen::<f64>() < flip_prob {
                1 - v
            } else {
                v
            }
        })
        .collect();
    let mut out = Dataset::new();
    for name in data.names.clone() {
        let values = if name == column {
            flipped.clone()
        } else {
            data.column(&name).unwrap().to_vec()
        };
        out.push_column(&name, values, data.is_observable(&name).unwrap())?;
    }
    if let Some(g) = data.groups() {
        out.set_groups(g.to_vec())?;
    }
    Ok(out)
}

/// Cell counts relevant to positivity: every observed covariate stratum
/// crossed with both arms, and with each observed mediator level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositivityReport {
    /// (covariate cell, arm, count)
    pub arm_cells: Vec<(Vec<Value>, Value, u64)>,
    /// (covariate cell, arm, mediator level, count)
    pub mediator_cells: Vec<(Vec<Value>, Value, Value, u64)>,
}

impl PositivityReport {
    pub fn empty_arm_cells(&self) -> impl Iterator<Item = &(Vec<Value>, Value, u64)> {
        self.arm_cells.iter().filter(|(_, _, c)| *c == 0)
    }

    pub fn empty_mediator_cells(&self) -> impl Iterator<Item = &(Vec<Value>, Value, Value, u64)> {
        self.mediator_cells.iter().filter(|(_, _, _, c)| *c == 0)
    }

    pub fn has_violations(&self) -> bool {
        self.empty_arm_cells().next().is_some() || self.empty_mediator_cells().next().is_some()
    }
}

pub fn positivity_report(
    data: &Dataset,
    a: &str,
    b: &str,
    y: &str,
    l: &[&str],
) -> Result<PositivityReport, EstimationError> {
    let cells = tabulate(data, a, Some(b), y, l)?;
    let strata = stratify(&cells);
    let b_levels = distinct_b(&cells);
    let mut arm_cells = Vec::new();
    let mut mediator_cells = Vec::new();
    for (l_vals, s) in &strata {
        for arm in [0 as Value, 1] {
            arm_cells.push((l_vals.clone(), arm, s.arm_n[arm as usize]));
            for &b_val in &b_levels {
                let count = s.cell_n.get(&(arm, b_val)).map_or(0, |e| e.0);
                mediator_cells.push((l_vals.clone(), arm, b_val, count));
            }
        }
    }
    Ok(PositivityReport {
        arm_cells,
        mediator_cells,
    })
}

/// Exact joint masses keyed like the estimator's cross-tabulation.
type PopulationCells<T> = BTreeMap<(Vec<Value>, Value, Value, Value), T>;

fn population_cells<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b: Option<&str>,
    y: &str,
    l: &[&str],
) -> Result<PopulationCells<T>, EstimationError> {
    let mut names: Vec<&str> = l.to_vec();
    names.push(a);
    if let Some(b) = b {
        names.push(b);
    }
    names.push(y);
    let joint = model.joint_distribution(&names)?;
    let mut cells = PopulationCells::<T>::new();
    for (values, mass) in joint {
        if mass.is_zero() {
            continue;
        }
        let l_vals = values[..l.len()].to_vec();
        let a_val = values[l.len()];
        let (b_val, y_val) = if b.is_some() {
            (values[l.len() + 1], values[l.len() + 2])
        } else {
            (0, values[l.len() + 1])
        };
        let key = (l_vals, a_val, b_val, y_val);
        match cells.get_mut(&key) {
            Some(m) => *m = m.clone() + mass,
            None => {
                cells.insert(key, mass);
            }
        }
    }
    Ok(cells)
}

struct PopulationStratum<T> {
    mass: T,
    arm_mass: [T; 2],
    arm_y: [T; 2],
    cell: BTreeMap<(Value, Value), (T, T)>,
}

fn population_strata<T: Scalar>(
    cells: &PopulationCells<T>,
) -> BTreeMap<Vec<Value>, PopulationStratum<T>> {
    let mut strata: BTreeMap<Vec<Value>, PopulationStratum<T>> = BTreeMap::new();
    for ((l, a, b, y), mass) in cells {
        let s = strata
            .entry(l.clone())
            .or_insert_with(|| PopulationStratum {
                mass: T::zero(),
                arm_mass: [T::zero(), T::zero()],
                arm_y: [T::zero(), T::zero()],
                cell: BTreeMap::new(),
            });
        s.mass = s.mass.clone() + mass.clone();
        let y_mass = mass.clone() * T::from_ratio(i64::from(*y), 1);
        if *a == 0 || *a == 1 {
            s.arm_mass[*a as usize] = s.arm_mass[*a as usize].clone() + mass.clone();
            s.arm_y[*a as usize] = s.arm_y[*a as usize].clone() + y_mass.clone();
        }
        let e = s
            .cell
            .entry((*a, *b))
            .or_insert((T::zero(), T::zero()));
        e.0 = e.0.clone() + mass.clone();
        e.1 = e.1.clone() + y_mass;
    }
    strata
}

fn population_nde_from_cells<T: Scalar>(cells: &PopulationCells<T>) -> Result<T, EstimationError> {
    let strata = population_strata(cells);
    let b_levels: Vec<Value> = {
        let mut out: Vec<Value> = cells.keys().map(|k| k.2).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let mut estimand = T::zero();
    for (l, s) in &strata {
        for arm in [0, 1] {
            if s.arm_mass[arm].is_zero() {
                return Err(EstimationError::PositivityViolation(format!(
                    "no mass in arm {arm} within covariate cell {l:?}"
                )));
            }
        }
        for &b in &b_levels {
            let (m0, y0) = s
                .cell
                .get(&(0, b))
                .cloned()
                .unwrap_or((T::zero(), T::zero()));
            if m0.is_zero() {
                continue;
            }
            let weight = m0.clone() / s.arm_mass[0].clone();
            let (m1, y1) = s
                .cell
                .get(&(1, b))
                .cloned()
                .unwrap_or((T::zero(), T::zero()));
            if m1.is_zero() {
                return Err(EstimationError::PositivityViolation(format!(
                    "mediator level {b} has mass under control but not treatment in cell {l:?}"
                )));
            }
            let contrast = y1 / m1 - y0 / m0;
            estimand = estimand + s.mass.clone() * weight * contrast;
        }
    }
    Ok(estimand)
}

fn population_total_from_cells<T: Scalar>(
    cells: &PopulationCells<T>,
) -> Result<T, EstimationError> {
    let strata = population_strata(cells);
    let mut estimand = T::zero();
    for (l, s) in &strata {
        for arm in [0, 1] {
            if s.arm_mass[arm].is_zero() {
                return Err(EstimationError::PositivityViolation(format!(
                    "no mass in arm {arm} within covariate cell {l:?}"
                )));
            }
        }
        let contrast =
            s.arm_y[1].clone() / s.arm_mass[1].clone() - s.arm_y[0].clone() / s.arm_mass[0].clone();
        estimand = estimand + s.mass.clone() * contrast;
    }
    Ok(estimand)
}

/// The mediator-standardized functional evaluated on the model's exact
/// joint law: the infinite-data limit of [`plugin_nde`].
pub fn population_plugin_nde<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b: &str,
    y: &str,
    l: &[&str],
) -> Result<T, EstimationError> {
    let cells = population_cells(model, a, Some(b), y, l)?;
    population_nde_from_cells(&cells)
}

/// The covariate-standardized functional on the exact joint law: the
/// infinite-data limit of [`plugin_total`].
pub fn population_plugin_total<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    y: &str,
    l: &[&str],
) -> Result<T, EstimationError> {
    let cells = population_cells(model, a, None, y, l)?;
    population_total_from_cells(&cells)
}

/// Infinite-data limit of [`plugin_nde`] when the binary mediator column is
/// independently flipped with probability `flip_prob` before estimation:
/// the joint law is pushed through the flip channel, then the same
/// functional is applied.
pub fn population_plugin_nde_misclassified<T: Scalar>(
    model: &StructuralModel<T>,
    a: &str,
    b: &str,
    y: &str,
    l: &[&str],
    flip_prob: f64,
) -> Result<T, EstimationError> {
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(EstimationError::InvalidParameter(format!(
            "flip probability {flip_prob} outside [0,1]"
        )));
    }
    let cells = population_cells(model, a, Some(b), y, l)?;
    for key in cells.keys() {
        if key.2 != 0 && key.2 != 1 {
            return Err(EstimationError::NonBinary {
                column: b.to_string(),
            });
        }
    }
    let q = T::from_ratio((flip_prob * 1e12).round() as i64, 1_000_000_000_000);
    let keep = T::from_ratio(1, 1) - q.clone();
    let mut mixed = PopulationCells::<T>::new();
    for ((l_vals, a_val, b_val, y_val), mass) in &cells {
        for (b_star, factor) in [(*b_val, keep.clone()), (1 - *b_val, q.clone())] {
            let add = mass.clone() * factor;
            if add.is_zero() {
                continue;
            }
            let key = (l_vals.clone(), *a_val, b_star, *y_val);
            match mixed.get_mut(&key) {
                Some(m) => *m = m.clone() + add,
                None => {
                    mixed.insert(key, add);
                }
            }
        }
    }
    population_nde_from_cells(&mixed)
}
