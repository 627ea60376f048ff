//! Fixed-effects linear models for crossover exam-score data.
//!
//! Factors are dummy coded against their first level, with an intercept.
//! Terms are fitted in the order the [`ModelSpec`] lists them and each term
//! gets the sum of squares it adds given the earlier terms (Type I). The
//! same fit drives backward elimination and the treatment-contrast interval.

mod dist;
mod linalg;
pub mod records;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dist::{beta_inc, f_pvalue, ln_beta, ln_gamma, t_quantile_two_sided, t_two_sided};
pub use linalg::ALIAS_TOL;
pub use records::{MathBackground, Treatment, TrialRecord};

/// p-values below this are reported as 0 with the underflow flag set.
pub const P_UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum AnovaError {
    #[error("need at least two observations")]
    EmptyData,
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("factor `{factor}` has {got} values for {expected} observations")]
    LengthMismatch { factor: String, expected: usize, got: usize },
    #[error("design has {rows} rows but {responses} responses")]
    DimensionMismatch { rows: usize, responses: usize },
    #[error("term `{0}` appears before one of its main effects")]
    NonHierarchical(String),
    #[error("invalid degrees of freedom ({df1}, {df2})")]
    InvalidDf { df1: f64, df2: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("term `{0}` is not estimable")]
    NotEstimable(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

/// A categorical predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    /// Level labels; the first is the reference level.
    pub levels: Vec<String>,
    /// Level index of each observation.
    pub codes: Vec<usize>,
}

/// Response vector plus named factors over the same observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub response: Vec<f64>,
    pub factors: Vec<Factor>,
}

impl Dataset {
    pub fn new(response: Vec<f64>) -> Self {
        Dataset { response, factors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// Adds a factor. Levels are those present in `values`, ordered by
    /// `preferred` where listed and then by string order.
    pub fn add_factor<S: AsRef<str>>(
        &mut self,
        name: &str,
        values: &[S],
        preferred: &[&str],
    ) -> Result<&mut Self, AnovaError> {
        if values.len() != self.response.len() {
            return Err(AnovaError::LengthMismatch {
                factor: name.to_owned(),
                expected: self.response.len(),
                got: values.len(),
            });
        }
        let present: BTreeSet<&str> = values.iter().map(|v| v.as_ref()).collect();
        let mut levels: Vec<String> =
            preferred.iter().filter(|p| present.contains(*p)).map(|p| p.to_string()).collect();
        for v in &present {
            if !preferred.contains(v) {
                levels.push(v.to_string());
            }
        }
        let index: BTreeMap<&str, usize> = levels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let codes = values.iter().map(|v| index[v.as_ref()]).collect();
        self.factors.retain(|f| f.name != name);
        self.factors.push(Factor { name: name.to_owned(), levels, codes });
        Ok(self)
    }

    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name == name)
    }

    /// Keeps only the observations at `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            response: rows.iter().map(|&r| self.response[r]).collect(),
            factors: self
                .factors
                .iter()
                .map(|f| Factor {
                    name: f.name.clone(),
                    levels: f.levels.clone(),
                    codes: rows.iter().map(|&r| f.codes[r]).collect(),
                })
                .collect(),
        }
    }
}

/// A main effect (one factor) or an interaction (several).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub factors: Vec<String>,
}

impl Term {
    pub fn main(factor: &str) -> Self {
        Term { factors: vec![factor.to_owned()] }
    }

    pub fn interaction(factors: &[&str]) -> Self {
        Term { factors: factors.iter().map(|f| f.to_string()).collect() }
    }

    pub fn name(&self) -> String {
        self.factors.join(":")
    }

    pub fn is_interaction(&self) -> bool {
        self.factors.len() > 1
    }

    /// True when every factor of `self` is also in `other` and they differ.
    pub fn is_marginal_to(&self, other: &Term) -> bool {
        self != other && self.factors.iter().all(|f| other.factors.contains(f))
    }
}

/// Ordered list of model terms. The intercept is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub terms: Vec<Term>,
}

impl ModelSpec {
    pub fn new(terms: Vec<Term>) -> Self {
        ModelSpec { terms }
    }

    /// treatment, math, treatment:math, exam, student.
    pub fn crossover() -> Self {
        ModelSpec::new(vec![
            Term::main(records::TREATMENT),
            Term::main(records::MATH),
            Term::interaction(&[records::TREATMENT, records::MATH]),
            Term::main(records::EXAM),
            Term::main(records::STUDENT),
        ])
    }

    /// Checks that each interaction follows the main effects of its factors.
    pub fn validate(&self) -> Result<(), AnovaError> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.factors.is_empty() {
                return Err(AnovaError::UnknownTerm(String::new()));
            }
            if t.is_interaction() {
                for f in &t.factors {
                    if !self.terms[..i].iter().any(|e| e.factors == [f.clone()]) {
                        return Err(AnovaError::NonHierarchical(t.name()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn without(&self, name: &str) -> ModelSpec {
        ModelSpec::new(self.terms.iter().filter(|t| t.name() != name).cloned().collect())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name() == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(Term::name).collect()
    }
}

/// Dense dummy-coded design matrix.
#[derive(Debug, Clone)]
pub struct Design {
    pub n_rows: usize,
    /// Column-major values.
    pub columns: Vec<Vec<f64>>,
    /// Owning term index per column; `None` for the intercept.
    pub column_terms: Vec<Option<usize>>,
    pub labels: Vec<String>,
    pub term_names: Vec<String>,
    /// Factors observed at a single level (they contribute no columns).
    pub single_level_factors: Vec<String>,
}

impl Design {
    /// Nominal column count per term before aliasing.
    pub fn term_columns(&self, term: usize) -> usize {
        self.column_terms.iter().filter(|t| **t == Some(term)).count()
    }
}

pub fn encode_design(data: &Dataset, spec: &ModelSpec) -> Result<Design, AnovaError> {
    let n = data.len();
    if n < 2 {
        return Err(AnovaError::EmptyData);
    }
    spec.validate()?;
    let mut columns = vec![vec![1.0; n]];
    let mut column_terms = vec![None];
    let mut labels = vec!["(intercept)".to_owned()];
    let mut single = BTreeSet::new();
    for (ti, term) in spec.terms.iter().enumerate() {
        let factors: Vec<&Factor> = term
            .factors
            .iter()
            .map(|name| data.factor(name).ok_or_else(|| AnovaError::UnknownFactor(name.clone())))
            .collect::<Result<_, _>>()?;
        for f in &factors {
            if f.codes.len() != n {
                return Err(AnovaError::LengthMismatch { factor: f.name.clone(), expected: n, got: f.codes.len() });
            }
            if f.levels.len() < 2 {
                single.insert(f.name.clone());
            }
        }
        // Cartesian product of non-reference levels across the term's factors.
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for f in &factors {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (1..f.levels.len()).map(move |l| {
                        let mut c = c.clone();
                        c.push(l);
                        c
                    })
                })
                .collect();
        }
        if factors.iter().any(|f| f.levels.len() < 2) {
            combos.clear();
        }
        for combo in combos {
            let col: Vec<f64> = (0..n)
                .map(|row| {
                    let hit = factors.iter().zip(&combo).all(|(f, &l)| f.codes[row] == l);
                    if hit {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let label = factors
                .iter()
                .zip(&combo)
                .map(|(f, &l)| format!("{}[{}]", f.name, f.levels[l]))
                .collect::<Vec<_>>()
                .join(":");
            columns.push(col);
            column_terms.push(Some(ti));
            labels.push(label);
        }
    }
    Ok(Design {
        n_rows: n,
        columns,
        column_terms,
        labels,
        term_names: spec.names(),
        single_level_factors: single.into_iter().collect(),
    })
}

/// Least-squares fit of a design.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// One entry per design column; `None` marks an aliased column.
    pub coefficients: Vec<Option<f64>>,
    pub aliased: Vec<bool>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub rank: usize,
    pub residual_df: usize,
    /// `rss / residual_df`, or `None` with zero residual df.
    pub residual_variance: Option<f64>,
    /// Effect (`Q^T y` entry) per accepted column, in column order.
    effects: Vec<(usize, f64)>,
    /// Unscaled variance per design column (None when aliased).
    unscaled_var: Vec<Option<f64>>,
}

impl FitResult {
    pub fn standard_error(&self, column: usize) -> Option<f64> {
        Some((self.residual_variance? * self.unscaled_var.get(column).copied()??).sqrt())
    }
}

pub fn fit_ls(design: &Design, response: &[f64]) -> Result<FitResult, AnovaError> {
    if design.n_rows != response.len() || design.columns.iter().any(|c| c.len() != response.len()) {
        return Err(AnovaError::DimensionMismatch { rows: design.n_rows, responses: response.len() });
    }
    if response.is_empty() {
        return Err(AnovaError::EmptyData);
    }
    let qr = linalg::householder_qr(&design.columns, response);
    let beta = qr.solve();
    let var = qr.unscaled_variances();
    let p = design.columns.len();
    let mut coefficients = vec![None; p];
    let mut unscaled_var = vec![None; p];
    for (k, &col) in qr.accepted.iter().enumerate() {
        coefficients[col] = Some(beta[k]);
        unscaled_var[col] = Some(var[k]);
    }
    let residuals: Vec<f64> = (0..response.len())
        .map(|row| {
            let fitted: f64 = qr.accepted.iter().zip(&beta).map(|(&col, b)| design.columns[col][row] * b).sum();
            response[row] - fitted
        })
        .collect();
    let rank = qr.rank();
    let residual_df = response.len() - rank;
    let rss = qr.rss();
    Ok(FitResult {
        coefficients,
        aliased: qr.aliased.clone(),
        residuals,
        rss,
        rank,
        residual_df,
        residual_variance: (residual_df > 0).then(|| rss / residual_df as f64),
        effects: qr.accepted.iter().enumerate().map(|(k, &col)| (col, qr.effects[k])).collect(),
        unscaled_var,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub term: String,
    pub df: usize,
    pub ss: f64,
    pub ms: Option<f64>,
    pub f: Option<f64>,
    pub p: Option<f64>,
    /// Set when the true p-value is below `P_UNDERFLOW` and `p` reads 0.
    #[serde(default)]
    pub p_underflow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub residual_df: usize,
    pub residual_ss: f64,
    pub total_ss: f64,
    pub n_obs: usize,
    /// Residual SS is zero while some term explains variation; F undefined.
    pub zero_residual_variance: bool,
}

impl AnovaTable {
    pub fn row(&self, term: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.term == term)
    }

    pub fn residual_ms(&self) -> Option<f64> {
        (self.residual_df > 0).then(|| self.residual_ss / self.residual_df as f64)
    }

    /// Fixed-column text rendering.
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut out =
            format!("{:<16} {:>6} {:>14} {:>12} {:>10} {:>12}\n", "term", "df", "sum sq", "mean sq", "F", "p-value");
        for r in &self.rows {
            let f = r.f.map_or("-".to_owned(), |f| format!("{f:.4}"));
            let p = match (r.p, r.p_underflow) {
                (_, true) => format!("<{P_UNDERFLOW:.0e}"),
                (Some(p), _) => format!("{p:.4e}"),
                (None, _) => "-".to_owned(),
            };
            let ms = r.ms.map_or("-".to_owned(), |m| format!("{m:.4}"));
            let _ = writeln!(out, "{:<16} {:>6} {:>14.4} {:>12} {:>10} {:>12}", r.term, r.df, r.ss, ms, f, p);
        }
        let ms = self.residual_ms().map_or("-".to_owned(), |m| format!("{m:.4}"));
        let _ = writeln!(out, "{:<16} {:>6} {:>14.4} {:>12}", "residuals", self.residual_df, self.residual_ss, ms);
        out
    }
}

/// A fitted model together with its sequential table.
#[derive(Debug, Clone)]
pub struct Anova {
    pub spec: ModelSpec,
    pub design: Design,
    pub fit: FitResult,
    pub table: AnovaTable,
}

impl Anova {
    pub fn fit(data: &Dataset, spec: &ModelSpec) -> Result<Anova, AnovaError> {
        let design = encode_design(data, spec)?;
        let fit = fit_ls(&design, &data.response)?;
        let n = data.len();
        let mean = data.response.iter().sum::<f64>() / n as f64;
        let total_ss: f64 = data.response.iter().map(|y| (y - mean).powi(2)).sum();
        let mut term_ss = vec![0.0; spec.terms.len()];
        let mut term_df = vec![0usize; spec.terms.len()];
        for &(col, effect) in &fit.effects {
            if let Some(t) = design.column_terms[col] {
                term_ss[t] += effect * effect;
                term_df[t] += 1;
            }
        }
        // Anything below the rounding floor of |y|^2 is zero.
        let floor = 64.0 * f64::EPSILON * f64::EPSILON * data.response.iter().map(|y| y * y).sum::<f64>();
        for ss in &mut term_ss {
            if *ss <= floor {
                *ss = 0.0;
            }
        }
        let residual_ss = if fit.rss <= floor { 0.0 } else { fit.rss };
        let residual_df = fit.residual_df;
        let scale = total_ss.max(residual_ss).max(f64::MIN_POSITIVE);
        let residual_zero = residual_ss <= 1e-20 * scale.max(1.0) || residual_df == 0;
        let mut any_signal = false;
        let rows = spec
            .terms
            .iter()
            .enumerate()
            .map(|(t, term)| {
                let df = term_df[t];
                let ss = term_ss[t];
                let ms = (df > 0).then(|| ss / df as f64);
                if df > 0 && ss > 1e-12 * scale {
                    any_signal = true;
                }
                let (f, p, under) = match ms {
                    Some(ms) if !residual_zero => {
                        let f = ms / (residual_ss / residual_df as f64);
                        let p = f_pvalue(f, df as f64, residual_df as f64)?;
                        if p < P_UNDERFLOW {
                            (Some(f), Some(0.0), true)
                        } else {
                            (Some(f), Some(p), false)
                        }
                    }
                    _ => (None, None, false),
                };
                Ok(AnovaRow { term: term.name(), df, ss, ms, f, p, p_underflow: under })
            })
            .collect::<Result<Vec<_>, AnovaError>>()?;
        let table = AnovaTable {
            rows,
            residual_df,
            residual_ss,
            total_ss,
            n_obs: n,
            zero_residual_variance: residual_zero && any_signal,
        };
        Ok(Anova { spec: spec.clone(), design, fit, table })
    }

    /// Estimate and interval for a single-column term's coefficient.
    pub fn contrast_confint(&self, term: &str, level: f64) -> Result<ConfInt, AnovaError> {
        let t = self.spec.position(term).ok_or_else(|| AnovaError::UnknownTerm(term.to_owned()))?;
        let cols: Vec<usize> =
            (0..self.design.columns.len()).filter(|&c| self.design.column_terms[c] == Some(t)).collect();
        let [col] = cols[..] else {
            return Err(AnovaError::NotEstimable(term.to_owned()));
        };
        let estimate = self.fit.coefficients[col].ok_or_else(|| AnovaError::NotEstimable(term.to_owned()))?;
        if self.fit.residual_df == 0 {
            return Err(AnovaError::NotEstimable(term.to_owned()));
        }
        let se = self.fit.standard_error(col).ok_or_else(|| AnovaError::NotEstimable(term.to_owned()))?;
        let df = self.fit.residual_df;
        let q = t_quantile_two_sided(level, df as f64)?;
        Ok(ConfInt {
            term: term.to_owned(),
            contrast: self.design.labels[col].clone(),
            estimate,
            se,
            df,
            level,
            lo: estimate - q * se,
            hi: estimate + q * se,
        })
    }
}

pub fn sequential_anova(data: &Dataset, spec: &ModelSpec) -> Result<AnovaTable, AnovaError> {
    Ok(Anova::fit(data, spec)?.table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfInt {
    pub term: String,
    /// Label of the coefficient, e.g. `treatment[tutorweb]`.
    pub contrast: String,
    pub estimate: f64,
    pub se: f64,
    pub df: usize,
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConfInt {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Interval for the tutor-web minus traditional contrast.
///
/// With a treatment interaction in the model this is the contrast at the
/// reference levels of the interacting factors.
pub fn treatment_confint(data: &Dataset, spec: &ModelSpec, level: f64) -> Result<ConfInt, AnovaError> {
    Anova::fit(data, spec)?.contrast_confint(records::TREATMENT, level)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub term: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub initial: AnovaTable,
    pub trace: Vec<Removal>,
    pub spec: ModelSpec,
    pub table: AnovaTable,
}

/// Backward elimination on sequential p-values.
///
/// At each step the candidate terms are those not marginal to another
/// remaining term; the one with the largest p above `alpha` is dropped and
/// the model refitted.
pub fn backward_eliminate(data: &Dataset, spec: &ModelSpec, alpha: f64) -> Result<Elimination, AnovaError> {
    let mut spec = spec.clone();
    let mut table = sequential_anova(data, &spec)?;
    let initial = table.clone();
    let mut trace = Vec::new();
    loop {
        let candidate = spec
            .terms
            .iter()
            .filter(|t| !spec.terms.iter().any(|o| t.is_marginal_to(o)))
            .filter_map(|t| {
                let row = table.row(&t.name())?;
                Some((t.name(), row.p?))
            })
            .filter(|(_, p)| *p > alpha)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((name, p)) = candidate else { break };
        spec = spec.without(&name);
        trace.push(Removal { term: name, p });
        table = sequential_anova(data, &spec)?;
    }
    Ok(Elimination { initial, trace, spec, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_way() -> Dataset {
        let mut d = Dataset::new(vec![1.0, 2.0, 3.0, 3.0, 4.0, 5.0]);
        d.add_factor("group", &["a", "a", "a", "b", "b", "b"], &[]).unwrap();
        d
    }

    #[test]
    fn one_way_table() {
        let t = sequential_anova(&one_way(), &ModelSpec::new(vec![Term::main("group")])).unwrap();
        let r = t.row("group").unwrap();
        assert_eq!(r.df, 1);
        assert!((r.ss - 6.0).abs() < 1e-10);
        assert!((t.residual_ss - 4.0).abs() < 1e-10);
        assert_eq!(t.residual_df, 4);
        assert!((r.f.unwrap() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn constant_response_has_zero_ss() {
        let mut d = Dataset::new(vec![2.0; 6]);
        d.add_factor("group", &["a", "a", "a", "b", "b", "b"], &[]).unwrap();
        let t = sequential_anova(&d, &ModelSpec::new(vec![Term::main("group")])).unwrap();
        assert_eq!(t.row("group").unwrap().ss, 0.0);
        assert_eq!(t.residual_ss, 0.0);
        assert!(!t.zero_residual_variance);
        assert_eq!(t.row("group").unwrap().f, None);
    }

    #[test]
    fn perfect_fit_flags_zero_residual_variance() {
        let mut d = Dataset::new(vec![1.0, 1.0, 3.0, 3.0]);
        d.add_factor("group", &["a", "a", "b", "b"], &[]).unwrap();
        let t = sequential_anova(&d, &ModelSpec::new(vec![Term::main("group")])).unwrap();
        assert!(t.zero_residual_variance);
        assert_eq!(t.row("group").unwrap().f, None);
        assert!((t.row("group").unwrap().ss - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_level_factor_has_zero_df() {
        let mut d = one_way();
        d.add_factor("site", &["x"; 6], &[]).unwrap();
        let spec = ModelSpec::new(vec![Term::main("site"), Term::main("group")]);
        let design = encode_design(&d, &spec).unwrap();
        assert_eq!(design.single_level_factors, vec!["site".to_string()]);
        let t = sequential_anova(&d, &spec).unwrap();
        assert_eq!(t.row("site").unwrap().df, 0);
        assert_eq!(t.row("site").unwrap().p, None);
        assert_eq!(t.row("group").unwrap().df, 1);
    }

    #[test]
    fn design_errors() {
        let d = one_way();
        assert_eq!(
            encode_design(&d, &ModelSpec::new(vec![Term::main("nope")])).unwrap_err(),
            AnovaError::UnknownFactor("nope".into())
        );
        let bad = ModelSpec::new(vec![Term::interaction(&["group", "x"]), Term::main("group")]);
        assert!(matches!(encode_design(&d, &bad), Err(AnovaError::NonHierarchical(_))));
        let tiny = Dataset::new(vec![1.0]);
        assert_eq!(encode_design(&tiny, &ModelSpec::new(vec![])).unwrap_err(), AnovaError::EmptyData);
        let mut short = Dataset::new(vec![1.0, 2.0]);
        assert!(matches!(short.add_factor("g", &["a"], &[]), Err(AnovaError::LengthMismatch { .. })));
    }

    #[test]
    fn fit_dimension_mismatch() {
        let d = one_way();
        let design = encode_design(&d, &ModelSpec::new(vec![Term::main("group")])).unwrap();
        assert!(matches!(fit_ls(&design, &[1.0, 2.0]), Err(AnovaError::DimensionMismatch { .. })));
    }

    #[test]
    fn confint_one_way() {
        let mut d = one_way();
        d.add_factor(
            "treatment",
            &["traditional", "traditional", "traditional", "tutorweb", "tutorweb", "tutorweb"],
            &[],
        )
        .unwrap();
        let ci = treatment_confint(&d, &ModelSpec::new(vec![Term::main("treatment")]), 0.95).unwrap();
        assert!((ci.estimate - 2.0).abs() < 1e-12);
        assert!((ci.se - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(ci.df, 4);
        assert!(ci.contains(0.0));
        assert_eq!(ci.contrast, "treatment[tutorweb]");
    }

    #[test]
    fn confint_requires_the_term() {
        let d = one_way();
        assert!(matches!(
            treatment_confint(&d, &ModelSpec::new(vec![Term::main("group")]), 0.95),
            Err(AnovaError::UnknownTerm(_))
        ));
    }

    #[test]
    fn hierarchy_blocks_main_effect_removal() {
        // y depends on the a:b interaction only, so a and b have tiny SS.
        let mut y = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let noise = [0.01, -0.02, 0.015, -0.005];
        for rep in 0..4 {
            for (ai, bi) in [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")] {
                let v = if ai == bi { 1.0 } else { -1.0 };
                y.push(v + noise[rep] * if ai == "1" { 1.0 } else { -1.0 });
                a.push(ai);
                b.push(bi);
            }
        }
        let mut d = Dataset::new(y);
        d.add_factor("a", &a, &[]).unwrap();
        d.add_factor("b", &b, &[]).unwrap();
        let spec = ModelSpec::new(vec![Term::main("b"), Term::main("a"), Term::interaction(&["a", "b"])]);
        let e = backward_eliminate(&d, &spec, 0.05).unwrap();
        assert!(e.initial.row("b").unwrap().p.unwrap() > 0.05);
        assert!(e.trace.is_empty(), "{:?}", e.trace);
        assert_eq!(e.spec, spec);
    }
}
