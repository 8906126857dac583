//! JSON (nested rows, one per `x`) and CSV (one line per cell) encodings.

use serde::{Deserialize, Serialize};

use super::{DistinguisherTable, JointDistribution, SimError, SweepRow};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct RawDistribution {
    lambda: usize,
    /// `prob[x][z]`.
    prob: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct RawDistinguisher {
    lambda: usize,
    #[serde(default = "unit_size")]
    size: f64,
    /// `values[x][z]`.
    values: Vec<Vec<f64>>,
}

fn unit_size() -> f64 {
    1.0
}

fn split_rows(flat: &[f64], lambda: usize) -> Vec<Vec<f64>> {
    flat.chunks(1 << lambda).map(<[f64]>::to_vec).collect()
}

fn flatten(rows: Vec<Vec<f64>>, lambda: usize) -> Result<(usize, Vec<f64>), SimError> {
    let width = 1usize << lambda.min(super::MAX_LAMBDA + 1);
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(SimError::DimensionMismatch(format!("row of {} entries, expected 2^λ = {width}", r.len())));
    }
    Ok((rows.len(), rows.concat()))
}

impl TryFrom<RawDistribution> for JointDistribution {
    type Error = SimError;

    fn try_from(raw: RawDistribution) -> Result<Self, SimError> {
        let (x_count, prob) = flatten(raw.prob, raw.lambda)?;
        JointDistribution::new(x_count, raw.lambda, prob)
    }
}

impl From<JointDistribution> for RawDistribution {
    fn from(d: JointDistribution) -> Self {
        Self { lambda: d.lambda, prob: split_rows(&d.prob, d.lambda) }
    }
}

impl TryFrom<RawDistinguisher> for DistinguisherTable {
    type Error = SimError;

    fn try_from(raw: RawDistinguisher) -> Result<Self, SimError> {
        let (x_count, values) = flatten(raw.values, raw.lambda)?;
        DistinguisherTable::new(x_count, raw.lambda, values, raw.size)
    }
}

impl From<DistinguisherTable> for RawDistinguisher {
    fn from(d: DistinguisherTable) -> Self {
        Self { lambda: d.lambda, size: d.size, values: split_rows(&d.values, d.lambda) }
    }
}

fn csv_err(e: impl std::fmt::Display) -> SimError {
    SimError::Io(e.to_string())
}

#[derive(Serialize, Deserialize)]
struct DistCell {
    x: usize,
    z: usize,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct FamilyCell {
    d: usize,
    x: usize,
    z: usize,
    value: f64,
    size: f64,
}

/// Lines `x,z,p` for every cell.
pub fn write_distribution_csv(dist: &JointDistribution) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let zc = dist.z_count();
    for (i, &p) in dist.prob.iter().enumerate() {
        w.serialize(DistCell { x: i / zc, z: i % zc, p }).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

/// Parse `x,z,p` lines; every cell must be present exactly once.
pub fn read_distribution_csv(text: &str, lambda: usize) -> Result<JointDistribution, SimError> {
    let cells: Vec<DistCell> =
        csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<Result<_, _>>().map_err(csv_err)?;
    let (x_count, prob) = assemble(cells.iter().map(|c| (c.x, c.z, c.p)), lambda)?;
    JointDistribution::new(x_count, lambda, prob)
}

/// Lines `d,x,z,value,size` for every member and cell.
pub fn write_family_csv(family: &[DistinguisherTable]) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (d, table) in family.iter().enumerate() {
        let zc = 1 << table.lambda;
        for (i, &value) in table.values.iter().enumerate() {
            w.serialize(FamilyCell { d, x: i / zc, z: i % zc, value, size: table.size }).map_err(csv_err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

pub fn read_family_csv(text: &str, lambda: usize) -> Result<Vec<DistinguisherTable>, SimError> {
    let cells: Vec<FamilyCell> =
        csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<Result<_, _>>().map_err(csv_err)?;
    let members = cells.iter().map(|c| c.d + 1).max().unwrap_or(0);
    (0..members)
        .map(|d| {
            let mine: Vec<&FamilyCell> = cells.iter().filter(|c| c.d == d).collect();
            let size = mine.first().map_or(1.0, |c| c.size);
            let (x_count, values) = assemble(mine.iter().map(|c| (c.x, c.z, c.value)), lambda)?;
            DistinguisherTable::new(x_count, lambda, values, size)
        })
        .collect()
}

fn assemble(cells: impl Iterator<Item = (usize, usize, f64)>, lambda: usize) -> Result<(usize, Vec<f64>), SimError> {
    if lambda > super::MAX_LAMBDA {
        return Err(SimError::DimensionMismatch(format!("λ = {lambda} > {}", super::MAX_LAMBDA)));
    }
    let zc = 1usize << lambda;
    let cells: Vec<_> = cells.collect();
    let x_count = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let mut out = vec![None; x_count * zc];
    for (x, z, v) in cells {
        if z >= zc {
            return Err(SimError::DimensionMismatch(format!("z = {z} outside {{0,1}}^{lambda}")));
        }
        if out[x * zc + z].replace(v).is_some() {
            return Err(SimError::Io(format!("cell ({x}, {z}) given twice")));
        }
    }
    let values = out
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| SimError::Io(format!("cell ({}, {}) missing", i / zc, i % zc))))
        .collect::<Result<_, _>>()?;
    Ok((x_count, values))
}

/// `lambda,eps,rounds,advantage,complexity_units` lines.
pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}
