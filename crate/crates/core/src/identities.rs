//! Two-sided tables for the weighted-count identities, each side computed
//! by its own route.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::enumerate::numbers::catalan;
use crate::enumerate::{count, product_enumerate, CategoryId};
use crate::error::{Error, Result};
use crate::moments::{block_count_sum, character_count, ncjoin_count, Weighting};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Identity {
    /// `Σ_{NC(0,k)} 2^{k-ν(π)} = |NC_•(0,k)|`.
    PoissonCount,
    /// `Σ_{NC(0,k)} Π_b (2^{|b|-1}+1) = |(NC_• ⋆ NC)(0,k)|`.
    CatFree,
    /// `|NC_{•,even}(0,2k)| = Σ_{NC_even(0,2k)} Π_b 2^{|b|-1}`, with the
    /// block-count form `Σ 2^{k-ν(π)}` as an extra column.
    BesselCount,
    /// `Σ_{C(0,k)} 2^{ν(π)} = |(C ⋆ C)(0,k)|` for `C ∈ {NC, NC_even}`.
    FreeP,
    /// `ncjoin_count(0,k) = Catalan(k)`.
    NcJoin,
}

impl Identity {
    pub const ALL: [Identity; 5] = [
        Identity::PoissonCount,
        Identity::CatFree,
        Identity::BesselCount,
        Identity::FreeP,
        Identity::NcJoin,
    ];

    pub fn columns(self) -> (&'static str, &'static str) {
        match self {
            Identity::PoissonCount => ("weightedNC", "countNCbullet"),
            Identity::CatFree => ("weightedNC", "countProduct"),
            Identity::BesselCount => ("countNCbulletEven", "perBlockNCeven"),
            Identity::FreeP => ("weighted", "countProduct"),
            Identity::NcJoin => ("ncjoin", "catalan"),
        }
    }

    pub fn extra_column(self) -> Option<&'static str> {
        match self {
            Identity::BesselCount => Some("printedFormula"),
            _ => None,
        }
    }

    fn first_k(self) -> usize {
        match self {
            Identity::NcJoin => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::PoissonCount => "poissoncount",
            Identity::CatFree => "catfree",
            Identity::BesselCount => "besselcount",
            Identity::FreeP => "freep",
            Identity::NcJoin => "ncjoin",
        })
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|i| i.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameters(format!("unknown identity {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityRow {
    /// Category the row is about, for identities stated over several.
    pub label: Option<String>,
    pub k: usize,
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub extra: Option<BigRational>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityTable {
    pub identity: Identity,
    pub rows: Vec<IdentityRow>,
}

impl IdentityTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Rows where the extra column differs from the left side.
    pub fn extra_divergences(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| {
                r.extra
                    .as_ref()
                    .is_some_and(|e| *e != BigRational::from_integer(r.lhs.clone().into()))
            })
            .map(|r| r.k)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let (lhs, rhs) = self.identity.columns();
        let mut header = vec!["k", lhs, rhs];
        let labelled = self.rows.iter().any(|r| r.label.is_some());
        if labelled {
            header.insert(0, "category");
        }
        if let Some(extra) = self.identity.extra_column() {
            header.push(extra);
        }
        header.push("pass");
        let mut out = header.join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = Vec::new();
            if labelled {
                cells.push(r.label.clone().unwrap_or_default());
            }
            cells.push(r.k.to_string());
            cells.push(r.lhs.to_string());
            cells.push(r.rhs.to_string());
            if self.identity.extra_column().is_some() {
                cells.push(r.extra.as_ref().map(ToString::to_string).unwrap_or_default());
            }
            cells.push(r.pass.to_string());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let (lhs, rhs) = self.identity.columns();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = json!({
                    "k": r.k,
                    lhs: r.lhs.to_string(),
                    rhs: r.rhs.to_string(),
                    "pass": r.pass,
                });
                if let Some(label) = &r.label {
                    row["category"] = json!(label);
                }
                if let (Some(name), Some(extra)) = (self.identity.extra_column(), &r.extra) {
                    row[name] = json!(extra.to_string());
                }
                row
            })
            .collect();
        json!({
            "identity": self.identity.to_string(),
            "allPass": self.all_pass(),
            "rows": rows,
        })
    }
}

fn row(label: Option<String>, k: usize, lhs: BigUint, rhs: BigUint, extra: Option<BigRational>) -> IdentityRow {
    let pass = lhs == rhs;
    IdentityRow {
        label,
        k,
        lhs,
        rhs,
        extra,
        pass,
    }
}

fn integral(x: BigRational) -> Result<BigUint> {
    if !x.is_integer() {
        return Err(Error::PrecondFailed(format!("{x} is not an integer")));
    }
    x.to_integer()
        .try_into()
        .map_err(|_| Error::PrecondFailed(format!("{x} is negative")))
}

fn compute_row(identity: Identity, label: Option<&CategoryId>, k: usize) -> Result<IdentityRow> {
    Ok(match identity {
        Identity::PoissonCount => {
            let lhs = integral(block_count_sum(&CategoryId::NC, k, |k, v| k as i64 - v as i64)?)?;
            row(None, k, lhs, count(&CategoryId::NCbullet, k)?, None)
        }
        Identity::CatFree => {
            let lhs = character_count(&CategoryId::NC, k, &Weighting::bulleted_plus_one())?;
            let rhs = product_enumerate(&CategoryId::NCbullet, &CategoryId::NC, 0, k)?.len();
            row(None, k, lhs, rhs.into(), None)
        }
        Identity::BesselCount => {
            let lhs = count(&CategoryId::NCbulletEven, 2 * k)?;
            let rhs = character_count(&CategoryId::NCeven, 2 * k, &Weighting::bulleted())?;
            let printed = block_count_sum(&CategoryId::NCeven, 2 * k, |pts, v| (pts / 2) as i64 - v as i64)?;
            row(None, k, lhs, rhs, Some(printed))
        }
        Identity::FreeP => {
            let c = label.expect("freep rows carry a category");
            let lhs = character_count(c, k, &Weighting::constant(2))?;
            let rhs = product_enumerate(c, c, 0, k)?.len();
            row(Some(c.name()), k, lhs, rhs.into(), None)
        }
        Identity::NcJoin => row(None, k, ncjoin_count(0, k)?, catalan(k as u64), None),
    })
}

/// Evaluates an identity for `k` up to `upto` on `jobs` worker threads;
/// row order does not depend on `jobs`.
pub fn table(identity: Identity, upto: usize, jobs: usize) -> Result<IdentityTable> {
    let mut tasks: Vec<(Option<CategoryId>, usize)> = Vec::new();
    match identity {
        Identity::FreeP => {
            for c in [CategoryId::NC, CategoryId::NCeven] {
                for k in identity.first_k()..=upto {
                    tasks.push((Some(c.clone()), k));
                }
            }
        }
        _ => tasks.extend((identity.first_k()..=upto).map(|k| (None, k))),
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameters(e.to_string()))?;
    let rows: Result<Vec<IdentityRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(c, k)| compute_row(identity, c.as_ref(), *k))
            .collect()
    });
    Ok(IdentityTable {
        identity,
        rows: rows?,
    })
}
