//! Catalogue of published security bounds for wPRF-based leakage-resilient
//! stream ciphers.
//!
//! Every bound has the shape `k' ≈ α·k − β·λ + γ` with rational `α, β, γ`,
//! where `k` is the wPRF key length (bits of time-success security) and `λ`
//! the leakage per round in bits. The additive constants are not published,
//! so `γ` defaults to zero and can be overridden per entry.

use std::fmt::{self, Write as _};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{closed_form_security, ReductionError, ReductionParams, SecurityLevel};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown technique id `{0}`")]
    UnknownTechnique(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("serialisation failed: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CipherId {
    /// Alternating two-key construction (EUROCRYPT'09).
    #[serde(rename = "EC09")]
    Ec09,
    /// Single key with fresh public randomness (CSS'10 / CHES'12).
    #[serde(rename = "CSS10_CHES12")]
    Css10Ches12,
    /// Single key with public values from a PRF in counter mode (CT-RSA'13).
    #[serde(rename = "CTRSA13")]
    Ctrsa13,
}

impl CipherId {
    pub fn table_label(&self) -> &'static str {
        match self {
            CipherId::Ec09 => "(1)",
            CipherId::Css10Ches12 => "(2)",
            CipherId::Ctrsa13 => "(3)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Proven,
    Corrected,
    Improved,
    DreamUnproven,
}

/// How the printed bound relates to the achievable level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `k' ≈ formula`.
    Approximately,
    /// `k' ≪ formula`: only a strict upper bound, not an achievable level.
    StrictUpperBound,
}

/// `k' = k_coeff·k − lambda_coeff·λ + constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineBound {
    pub k_coeff: Rational64,
    pub lambda_coeff: Rational64,
    pub constant: Rational64,
}

impl AffineBound {
    pub fn new(k_coeff: (i64, i64), lambda_coeff: (i64, i64)) -> Self {
        Self {
            k_coeff: Rational64::new(k_coeff.0, k_coeff.1),
            lambda_coeff: Rational64::new(lambda_coeff.0, lambda_coeff.1),
            constant: Rational64::from_integer(0),
        }
    }

    pub fn eval_exact(&self, k: Rational64, lambda: Rational64) -> Rational64 {
        self.k_coeff * k - self.lambda_coeff * lambda + self.constant
    }

    pub fn eval(&self, k: f64, lambda: f64) -> f64 {
        ratio_f64(self.k_coeff) * k - ratio_f64(self.lambda_coeff) * lambda + ratio_f64(self.constant)
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn fmt_coeff(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for AffineBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = Rational64::from_integer(1);
        if self.k_coeff.numer() != &0 {
            if self.k_coeff == one {
                f.write_str("k")?;
            } else {
                write!(f, "{}·k", fmt_coeff(self.k_coeff))?;
            }
        }
        if self.lambda_coeff.numer() != &0 {
            if self.lambda_coeff == one {
                f.write_str(" − λ")?;
            } else {
                write!(f, " − {}·λ", fmt_coeff(self.lambda_coeff))?;
            }
        }
        if self.constant.numer() != &0 {
            write!(f, " + {}", fmt_coeff(self.constant))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueEntry {
    pub id: String,
    pub cipher_id: CipherId,
    pub analysis_name: String,
    pub proof_technique: String,
    pub formula: AffineBound,
    pub relation: Relation,
    pub status: Status,
    pub comment: String,
    /// Candidate reduction constants registered for this analysis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionParams>,
}

impl TechniqueEntry {
    /// The formula value; `≤ 0` means no guarantee.
    pub fn security_level(&self, k: f64, lambda: f64) -> f64 {
        self.formula.eval(k, lambda)
    }

    pub fn security_level_exact(&self, k: Rational64, lambda: Rational64) -> Rational64 {
        self.formula.eval_exact(k, lambda)
    }

    /// Smallest `k` with `security_level(k, λ) ≥ target`. `None` for strict
    /// upper bounds and for formulas whose `k` coefficient is not positive.
    pub fn minimum_key_for_target(&self, target: f64, lambda: f64) -> Option<f64> {
        if self.relation == Relation::StrictUpperBound || *self.formula.k_coeff.numer() <= 0 {
            return None;
        }
        let f = &self.formula;
        Some((target + ratio_f64(f.lambda_coeff) * lambda - ratio_f64(f.constant)) / ratio_f64(f.k_coeff))
    }

    pub fn minimum_key_for_target_exact(&self, target: Rational64, lambda: Rational64) -> Option<Rational64> {
        if self.relation == Relation::StrictUpperBound || *self.formula.k_coeff.numer() <= 0 {
            return None;
        }
        let f = &self.formula;
        Some((target + f.lambda_coeff * lambda - f.constant) / f.k_coeff)
    }

    /// Whether the bound certifies anything at `(k, λ)`. An unproven bound
    /// never does.
    pub fn guarantees(&self, k: f64, lambda: f64) -> bool {
        self.status != Status::DreamUnproven
            && self.relation == Relation::Approximately
            && self.security_level(k, lambda) > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    entries: Vec<TechniqueEntry>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::published()
    }
}

/// Identifier of the improved auxiliary-input simulator analysis.
pub const IMPROVED_SIMULATOR: &str = "improved_simulator";
/// Identifier of the unproven bound a flawed simulator analysis would give.
pub const DREAM_BOUND: &str = "dream_bound";

impl Catalog {
    /// The seven published bounds, in their customary order.
    pub fn published() -> Self {
        let entry = |id: &str,
                     cipher_id,
                     analysis_name: &str,
                     proof_technique: &str,
                     formula,
                     relation,
                     status,
                     comment: &str| TechniqueEntry {
            id: id.to_owned(),
            cipher_id,
            analysis_name: analysis_name.to_owned(),
            proof_technique: proof_technique.to_owned(),
            formula,
            relation,
            status,
            comment: comment.to_owned(),
            reduction: None,
        };
        use CipherId::*;
        use Relation::*;
        use Status::*;
        Self {
            entries: vec![
                entry(
                    "pietrzak09",
                    Ec09,
                    "Pietrzak '09",
                    "Pseudoentropy chain rules",
                    AffineBound::new((1, 8), (0, 1)),
                    StrictUpperBound,
                    Proven,
                    "large number of blocks",
                ),
                entry(
                    "jetchev_pietrzak14",
                    Ec09,
                    "Jetchev–Pietrzak '14",
                    "Aux. inputs simulator (corr.)",
                    AffineBound::new((1, 6), (5, 6)),
                    Approximately,
                    Corrected,
                    "",
                ),
                entry(
                    "vadhan_zheng13",
                    Ec09,
                    "Vadhan–Zheng '13",
                    "Aux. inputs simulator",
                    AffineBound::new((1, 6), (1, 3)),
                    Approximately,
                    Proven,
                    "",
                ),
                entry(
                    IMPROVED_SIMULATOR,
                    Ec09,
                    "Improved simulator",
                    "Aux. inputs simulator (impr.)",
                    AffineBound::new((1, 6), (1, 2)),
                    Approximately,
                    Improved,
                    "",
                ),
                entry(
                    DREAM_BOUND,
                    Ec09,
                    "Dream bound",
                    "Aux. inputs simulator (impr.)",
                    AffineBound::new((1, 4), (1, 1)),
                    Approximately,
                    DreamUnproven,
                    "unproven (the flaw)",
                ),
                entry(
                    "faust12",
                    Css10Ches12,
                    "Faust et al. '12",
                    "Pseudoentropy chain rules",
                    AffineBound::new((1, 5), (3, 5)),
                    Approximately,
                    Proven,
                    "large public seed",
                ),
                entry(
                    "yu_standaert13",
                    Ctrsa13,
                    "Yu–Standaert '13",
                    "Square-friendly apps.",
                    AffineBound::new((1, 4), (3, 4)),
                    Approximately,
                    Proven,
                    "only in minicrypt",
                ),
            ],
        }
    }

    pub fn entries(&self) -> &[TechniqueEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&TechniqueEntry, CatalogError> {
        self.entries.iter().find(|e| e.id == id).ok_or_else(|| CatalogError::UnknownTechnique(id.to_owned()))
    }

    fn get_mut(&mut self, id: &str) -> Result<&mut TechniqueEntry, CatalogError> {
        self.entries.iter_mut().find(|e| e.id == id).ok_or_else(|| CatalogError::UnknownTechnique(id.to_owned()))
    }

    /// Override the (unpublished) additive constant of an entry.
    pub fn set_constant(&mut self, id: &str, constant: Rational64) -> Result<(), CatalogError> {
        self.get_mut(id)?.formula.constant = constant;
        Ok(())
    }

    /// Attach candidate reduction constants to an entry.
    pub fn register_reduction(&mut self, id: &str, params: ReductionParams) -> Result<(), CatalogError> {
        self.get_mut(id)?.reduction = Some(params);
        Ok(())
    }

    /// Closed-form level of the registered constants minus the catalogued
    /// formula at `(k, λ)`. `None` when nothing is registered.
    pub fn reduction_gap(&self, id: &str, k: f64, lambda: f64) -> Result<Option<f64>, CatalogError> {
        let entry = self.get(id)?;
        let Some(params) = entry.reduction else {
            return Ok(None);
        };
        let derived = closed_form_security(&params, SecurityLevel::bits(k))?;
        Ok(Some(derived.raw() - entry.security_level(k, lambda)))
    }

    pub fn to_json(&self) -> Result<String, CatalogError> {
        serde_json::to_string_pretty(self).map_err(|e| CatalogError::Serialize(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown table format `{other}`")),
        }
    }
}

/// One rendered row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub id: String,
    pub cipher: CipherId,
    pub analysis: String,
    pub proof_technique: String,
    pub formula: String,
    pub k_coeff: Rational64,
    pub lambda_coeff: Rational64,
    pub constant: Rational64,
    pub relation: Relation,
    /// Formula value as an exact fraction, e.g. `"116/3"`.
    pub level_exact: String,
    pub level: f64,
    pub guarantee: bool,
    pub status: Status,
    pub comment: String,
}

impl TableRow {
    /// Human rendering of the value column.
    pub fn rendered_level(&self) -> String {
        match self.relation {
            Relation::StrictUpperBound => {
                format!("≪ {:.2} (upper bound; no guarantee)", self.level)
            }
            Relation::Approximately if self.guarantee => format!("≈ {:.2}", self.level),
            Relation::Approximately => format!("{:.2} (no guarantee)", self.level),
        }
    }

    pub fn status_label(&self) -> &'static str {
        match self.status {
            Status::Proven => "proven",
            Status::Corrected => "corrected",
            Status::Improved => "improved",
            Status::DreamUnproven => "UNPROVEN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub k: Rational64,
    pub lambda: Rational64,
    pub rows: Vec<TableRow>,
}

fn fmt_exact(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Evaluate every entry at `(k, λ)`, keeping catalogue order.
pub fn build_table(catalog: &Catalog, k: Rational64, lambda: Rational64) -> Table {
    let rows = catalog
        .entries()
        .iter()
        .map(|e| {
            let exact = e.security_level_exact(k, lambda);
            let level = ratio_f64(exact);
            TableRow {
                id: e.id.clone(),
                cipher: e.cipher_id,
                analysis: e.analysis_name.clone(),
                proof_technique: e.proof_technique.clone(),
                formula: e.formula.to_string(),
                k_coeff: e.formula.k_coeff,
                lambda_coeff: e.formula.lambda_coeff,
                constant: e.formula.constant,
                relation: e.relation,
                level_exact: fmt_exact(exact),
                level,
                guarantee: e.status != Status::DreamUnproven && e.relation == Relation::Approximately && level > 0.0,
                status: e.status,
                comment: e.comment.clone(),
            }
        })
        .collect();
    Table { k, lambda, rows }
}

/// Render the comparison table at `(k, λ)`.
pub fn emit_table(
    catalog: &Catalog,
    k: Rational64,
    lambda: Rational64,
    format: TableFormat,
) -> Result<String, CatalogError> {
    let table = build_table(catalog, k, lambda);
    match format {
        TableFormat::Json => serde_json::to_string_pretty(&table)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CatalogError::Serialize(e.to_string())),
        TableFormat::Csv => render_csv(&table),
        TableFormat::Markdown => Ok(render_markdown(&table)),
    }
}

fn render_markdown(table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Security levels at k = {}, λ = {}\n", fmt_exact(table.k), fmt_exact(table.lambda));
    out.push_str("| Cipher | Analysis | Proof technique | Bound | k' | Status | Comments |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for row in &table.rows {
        let marker = match row.relation {
            Relation::Approximately => "≈",
            Relation::StrictUpperBound => "≪",
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | k' {} {} | {} | {} | {} |",
            row.cipher.table_label(),
            row.analysis,
            row.proof_technique,
            marker,
            row.formula,
            row.rendered_level(),
            row.status_label(),
            row.comment
        );
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    cipher: CipherId,
    analysis: &'a str,
    k_coeff: String,
    lambda_coeff: String,
    constant: String,
    relation: Relation,
    level_exact: &'a str,
    level: f64,
    guarantee: &'static str,
    status: Status,
    comment: &'a str,
}

fn render_csv(table: &Table) -> Result<String, CatalogError> {
    let err = |e: csv::Error| CatalogError::Serialize(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(CsvRow {
            id: &row.id,
            cipher: row.cipher,
            analysis: &row.analysis,
            k_coeff: fmt_exact(row.k_coeff),
            lambda_coeff: fmt_exact(row.lambda_coeff),
            constant: fmt_exact(row.constant),
            relation: row.relation,
            level_exact: &row.level_exact,
            level: row.level,
            guarantee: if row.guarantee { "yes" } else { "no guarantee" },
            status: row.status,
            comment: &row.comment,
        })
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CatalogError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CatalogError::Serialize(e.to_string()))
}
