//! Numeric block-matrix models `U = (U_{z,y})` with entries in `M_d(ℂ)`,
//! relation checkers, basis changes and classical samplers.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tensor_rep::{c_matrix, relative_residual, IndexSpace};

pub const DEFAULT_TOL: f64 = 1e-9;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrixModel {
    n: usize,
    d: usize,
    /// Row-major `n × n` grid of `d × d` blocks.
    entries: Vec<CMat>,
}

impl BlockMatrixModel {
    pub fn new(n: usize, d: usize, entries: Vec<CMat>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for an {n}×{n} model",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| e.nrows() != d || e.ncols() != d) {
            return Err(Error::ShapeMismatch(format!(
                "entry of size {}×{} in a model with d={d}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        Ok(Self { n, d, entries })
    }

    /// Scalar model from an `n × n` complex matrix.
    pub fn scalar(m: &CMat) -> Self {
        Self::from_big(m, 1).expect("square matrix")
    }

    /// Splits an `nd × nd` matrix into `d × d` blocks.
    pub fn from_big(big: &CMat, d: usize) -> Result<Self> {
        if big.nrows() != big.ncols() || d == 0 || big.nrows() % d != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} matrix does not split into {d}×{d} blocks",
                big.nrows(),
                big.ncols()
            )));
        }
        let n = big.nrows() / d;
        let entries = (0..n * n)
            .map(|i| big.view(((i / n) * d, (i % n) * d), (d, d)).into_owned())
            .collect();
        Ok(Self { n, d, entries })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self::from_big(&CMat::identity(n * d, n * d), d).expect("square matrix")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, z: usize, y: usize) -> &CMat {
        &self.entries[z * self.n + y]
    }

    pub fn to_big(&self) -> CMat {
        let (n, d) = (self.n, self.d);
        let mut big = CMat::zeros(n * d, n * d);
        for z in 0..n {
            for y in 0..n {
                big.view_mut((z * d, y * d), (d, d)).copy_from(self.entry(z, y));
            }
        }
        big
    }

    fn map_entries(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self {
            n: self.n,
            d: self.d,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// `V_{π(z),π(y)} = U_{z,y}`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut entries = vec![CMat::zeros(self.d, self.d); self.n * self.n];
        for z in 0..self.n {
            for y in 0..self.n {
                entries[perm[z] * self.n + perm[y]] = self.entry(z, y).clone();
            }
        }
        Self {
            n: self.n,
            d: self.d,
            entries,
        }
    }

    pub fn to_json_value(&self) -> Value {
        let grid: Vec<Vec<Value>> = (0..self.n)
            .map(|z| {
                (0..self.n)
                    .map(|y| {
                        let e = self.entry(z, y);
                        let rows: Vec<Vec<[f64; 2]>> = (0..self.d)
                            .map(|r| (0..self.d).map(|s| [e[(r, s)].re, e[(r, s)].im]).collect())
                            .collect();
                        json!(rows)
                    })
                    .collect()
            })
            .collect();
        json!({"n": self.n, "d": self.d, "entries": grid})
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            message: e.to_string(),
            position: Some((e.line(), e.column())),
        })?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            message: m.to_string(),
            position: None,
        };
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("field \"n\" must be an integer"))?
            as usize;
        let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| bad("field \"d\" must be an integer"))?
            as usize;
        let grid = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("field \"entries\" must be an array"))?;
        if grid.len() != n {
            return Err(bad("entries must have n rows"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in grid {
            let row = row.as_array().filter(|r| r.len() == n).ok_or_else(|| bad("entries rows must have n blocks"))?;
            for block in row {
                let rows = block.as_array().filter(|r| r.len() == d).ok_or_else(|| bad("blocks must have d rows"))?;
                let mut m = CMat::zeros(d, d);
                for (r, brow) in rows.iter().enumerate() {
                    let cells = brow.as_array().filter(|r| r.len() == d).ok_or_else(|| bad("blocks must have d columns"))?;
                    for (s, cell) in cells.iter().enumerate() {
                        m[(r, s)] = parse_complex(cell).ok_or_else(|| bad("entries must be numbers or [re,im] pairs"))?;
                    }
                }
                entries.push(m);
            }
        }
        Self::new(n, d, entries)
    }
}

fn parse_complex(v: &Value) -> Option<Complex64> {
    if let Some(x) = v.as_f64() {
        return Some(c(x, 0.0));
    }
    let a = v.as_array()?;
    if a.len() != 2 {
        return None;
    }
    Some(c(a[0].as_f64()?, a[1].as_f64()?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationPreset {
    Opq,
    Bpq,
    Spq,
    Hpq,
    Hspq,
    H4,
    Magic,
    Cubic,
    Sudoku,
    DoubleSudoku,
}

impl RelationPreset {
    /// Presets whose relations are stated on `J_{p,q}` with the bar involution.
    pub fn uses_index_space(self) -> bool {
        matches!(
            self,
            RelationPreset::Opq
                | RelationPreset::Bpq
                | RelationPreset::Spq
                | RelationPreset::Hpq
                | RelationPreset::Hspq
                | RelationPreset::H4
        )
    }
}

impl fmt::Display for RelationPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationPreset::Opq => "opq",
            RelationPreset::Bpq => "bpq",
            RelationPreset::Spq => "spq",
            RelationPreset::Hpq => "hpq",
            RelationPreset::Hspq => "hspq",
            RelationPreset::H4 => "h4",
            RelationPreset::Magic => "magic",
            RelationPreset::Cubic => "cubic",
            RelationPreset::Sudoku => "sudoku",
            RelationPreset::DoubleSudoku => "double-sudoku",
        };
        f.write_str(s)
    }
}

impl FromStr for RelationPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_'))
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "opq" => RelationPreset::Opq,
            "bpq" => RelationPreset::Bpq,
            "spq" => RelationPreset::Spq,
            "hpq" => RelationPreset::Hpq,
            "hspq" => RelationPreset::Hspq,
            "h4" => RelationPreset::H4,
            "magic" => RelationPreset::Magic,
            "cubic" => RelationPreset::Cubic,
            "sudoku" => RelationPreset::Sudoku,
            "doublesudoku" => RelationPreset::DoubleSudoku,
            _ => return Err(Error::InvalidParameters(format!("unknown preset {s}"))),
        })
    }
}

/// Per-relation residuals of a preset check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub preset: RelationPreset,
    pub pass: bool,
    pub tol: f64,
    pub residuals: Vec<(String, f64)>,
}

impl CheckReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn residual(&self, relation: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|(name, _)| name == relation)
            .map(|(_, r)| *r)
    }

    pub fn to_json_value(&self) -> Value {
        let residuals: serde_json::Map<String, Value> = self
            .residuals
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        json!({
            "preset": self.preset.to_string(),
            "pass": self.pass,
            "tol": self.tol,
            "maxResidual": self.max_residual(),
            "residuals": residuals,
        })
    }
}

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Relative deviation of two matrices, with zero matrices compared absolutely.
fn dev(x: &CMat, y: &CMat) -> f64 {
    relative_residual(x, y)
}

pub fn unitarity_residual(u: &BlockMatrixModel) -> f64 {
    let big = u.to_big();
    let id = CMat::identity(big.nrows(), big.ncols());
    dev(&(&big * big.adjoint()), &id).max(dev(&(big.adjoint() * &big), &id))
}

/// Unitarity of `Ū = (U_{z,y}^*)`.
pub fn conjugate_unitarity_residual(u: &BlockMatrixModel) -> f64 {
    unitarity_residual(&u.map_entries(|e| e.adjoint()))
}

/// `U_{z,y}^* = U_{z̄,ȳ}`.
pub fn bar_residual(u: &BlockMatrixModel, space: &IndexSpace) -> f64 {
    let n = u.n();
    max_over((0..n).flat_map(|z| {
        (0..n).map(move |y| dev(&u.entry(z, y).adjoint(), u.entry(space.bar(z), space.bar(y))))
    }))
}

pub fn selfadjoint_residual(u: &BlockMatrixModel) -> f64 {
    max_over(u.entries.iter().map(|e| dev(e, &e.adjoint())))
}

fn projection_residual(u: &BlockMatrixModel) -> f64 {
    max_over(u.entries.iter().map(|e| dev(e, &e.adjoint()).max(dev(e, &(e * e)))))
}

fn partial_isometry_residual(u: &BlockMatrixModel) -> f64 {
    max_over(u.entries.iter().map(|e| dev(e, &(e * e.adjoint() * e))))
}

fn sums_residual(u: &BlockMatrixModel) -> (f64, f64) {
    let (n, d) = (u.n(), u.d());
    let id = CMat::identity(d, d);
    let row = max_over((0..n).map(|z| {
        let s = (0..n).fold(CMat::zeros(d, d), |acc, y| acc + u.entry(z, y));
        dev(&s, &id)
    }));
    let col = max_over((0..n).map(|y| {
        let s = (0..n).fold(CMat::zeros(d, d), |acc, z| acc + u.entry(z, y));
        dev(&s, &id)
    }));
    (row, col)
}

/// `x y = 0` for distinct entries in one row, and `x^* y = 0` in one column
/// (scaled by `1/max(1,‖x‖‖y‖)`).
fn row_column_orthogonality(u: &BlockMatrixModel) -> f64 {
    let n = u.n();
    let zero = CMat::zeros(u.d(), u.d());
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                worst = worst
                    .max(dev(&(u.entry(a, x) * u.entry(a, y)), &zero))
                    .max(dev(&(u.entry(x, a) * u.entry(y, a)), &zero));
            }
        }
    }
    worst
}

/// Residual of `U_{y,z}U_{x,z}^* = U_{z,y}^*U_{z,x} = 0` for `x ≠ y`.
pub fn orthogonality_residual(u: &BlockMatrixModel) -> f64 {
    let n = u.n();
    let zero = CMat::zeros(u.d(), u.d());
    let mut worst: f64 = 0.0;
    for z in 0..n {
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    worst = worst
                        .max(dev(&(u.entry(y, z) * u.entry(x, z).adjoint()), &zero))
                        .max(dev(&(u.entry(z, y).adjoint() * u.entry(z, x)), &zero));
                }
            }
        }
    }
    worst
}

fn pattern_residual(u: &BlockMatrixModel, layout: &[&[usize]]) -> Result<f64> {
    let parts = layout.len();
    if u.n() % parts != 0 {
        return Err(Error::ShapeMismatch(format!(
            "n={} is not a multiple of {parts}",
            u.n()
        )));
    }
    let m = u.n() / parts;
    // block (R,S) must equal block (0, layout[R][S])
    let mut worst: f64 = 0.0;
    for (r, row) in layout.iter().enumerate() {
        for (s, &src) in row.iter().enumerate() {
            for a in 0..m {
                for b in 0..m {
                    worst = worst.max(dev(u.entry(r * m + a, s * m + b), u.entry(a, src * m + b)));
                }
            }
        }
    }
    Ok(worst)
}

const SUDOKU: [&[usize]; 2] = [&[0, 1], &[1, 0]];
const DOUBLE_SUDOKU: [&[usize]; 4] = [&[0, 1, 2, 3], &[1, 0, 3, 2], &[2, 3, 0, 1], &[3, 2, 1, 0]];

/// Checks a model against a relation preset; index-space presets require `n = 2p+q`.
pub fn check(
    u: &BlockMatrixModel,
    preset: RelationPreset,
    p: usize,
    q: usize,
    tol: f64,
) -> Result<CheckReport> {
    let mut r: Vec<(String, f64)> = Vec::new();
    let mut push = |name: &str, v: f64| r.push((name.to_string(), v));
    if preset.uses_index_space() {
        let space = IndexSpace::new(p, q)?;
        if space.n() != u.n() {
            return Err(Error::ShapeMismatch(format!(
                "model has n={}, but 2p+q={}",
                u.n(),
                space.n()
            )));
        }
        push("unitary", unitarity_residual(u));
        push("bar", bar_residual(u, &space));
        match preset {
            RelationPreset::Bpq => {
                let (row, col) = sums_residual(u);
                push("rowSums", row);
                push("columnSums", col);
            }
            RelationPreset::Spq => push("projections", projection_residual(u)),
            RelationPreset::Hpq => push("partialIsometries", partial_isometry_residual(u)),
            RelationPreset::Hspq => {
                push("selfadjoint", selfadjoint_residual(u));
                push("cube", max_over(u.entries.iter().map(|e| dev(e, &(e * e * e)))));
            }
            RelationPreset::H4 => {
                push("conjugateUnitary", conjugate_unitarity_residual(u));
                push(
                    "normal",
                    max_over(u.entries.iter().map(|e| dev(&(e * e.adjoint()), &(e.adjoint() * e)))),
                );
                push(
                    "fourthPower",
                    max_over(u.entries.iter().map(|e| {
                        let sq = e * e;
                        dev(&(&sq * &sq), &(e * e.adjoint()))
                    })),
                );
                push(
                    "projections",
                    max_over(u.entries.iter().map(|e| {
                        let x = e * e.adjoint();
                        dev(&x, &(&x * &x))
                    })),
                );
            }
            _ => {}
        }
    } else {
        match preset {
            RelationPreset::Cubic => {
                push("unitary", unitarity_residual(u));
                push("selfadjoint", selfadjoint_residual(u));
                push("rowColumnProducts", row_column_orthogonality(u));
            }
            _ => {
                push("projections", projection_residual(u));
                let (row, col) = sums_residual(u);
                push("rowSums", row);
                push("columnSums", col);
                push("unitary", unitarity_residual(u));
                match preset {
                    RelationPreset::Sudoku => push("pattern", pattern_residual(u, &SUDOKU)?),
                    RelationPreset::DoubleSudoku => {
                        push("pattern", pattern_residual(u, &DOUBLE_SUDOKU)?)
                    }
                    _ => {}
                }
            }
        }
    }
    let pass = r.iter().all(|(_, v)| *v <= tol);
    Ok(CheckReport {
        preset,
        pass,
        tol,
        residuals: r,
    })
}

fn require_n(u: &BlockMatrixModel, n: usize) -> Result<()> {
    if u.n() != n {
        return Err(Error::ShapeMismatch(format!("model has n={}, expected {n}", u.n())));
    }
    Ok(())
}

/// `(C ⊗ 1_d) U (C^* ⊗ 1_d)`.
pub fn conjugate_by_c(u: &BlockMatrixModel, p: usize, q: usize) -> Result<BlockMatrixModel> {
    let space = IndexSpace::new(p, q)?;
    require_n(u, space.n())?;
    let cd = c_matrix(&space).kronecker(&CMat::identity(u.d(), u.d()));
    BlockMatrixModel::from_big(&(&cd * u.to_big() * cd.adjoint()), u.d())
}

/// Inverse of [`conjugate_by_c`].
pub fn unconjugate_by_c(v: &BlockMatrixModel, p: usize, q: usize) -> Result<BlockMatrixModel> {
    let space = IndexSpace::new(p, q)?;
    require_n(v, space.n())?;
    let cd = c_matrix(&space).kronecker(&CMat::identity(v.d(), v.d()));
    BlockMatrixModel::from_big(&(cd.adjoint() * v.to_big() * &cd), v.d())
}

/// Reorders `(0,1),(1,1),…,(0,p),(1,p)` into `(0,1),…,(0,p),(1,1),…,(1,p)`.
pub fn sudoku_transform(u: &BlockMatrixModel, p: usize) -> Result<BlockMatrixModel> {
    require_n(u, 2 * p)?;
    let perm: Vec<usize> = (0..2 * p).map(|idx| (idx % 2) * p + idx / 2).collect();
    Ok(u.permute(&perm))
}

/// Splits the entries of a `2p × 2p` partial-symmetry model into positive and
/// negative parts and arranges them in the `4p × 4p` double-sudoku layout.
pub fn double_sudoku(u: &BlockMatrixModel, p: usize) -> Result<BlockMatrixModel> {
    let s = sudoku_transform(u, p)?;
    let d = u.d();
    let half = 0.5;
    let pos = |x: &CMat| (x * x + x) * c(half, 0.0);
    let neg = |x: &CMat| (x * x - x) * c(half, 0.0);
    // P=A⁺, Q=A⁻, R=B⁺, S=B⁻ where s = [[A,B],[B,A]]
    let part = |which: usize, a: usize, b: usize| -> CMat {
        let (src, positive) = match which {
            0 => (s.entry(a, b), true),
            1 => (s.entry(a, b), false),
            2 => (s.entry(a, p + b), true),
            _ => (s.entry(a, p + b), false),
        };
        if positive {
            pos(src)
        } else {
            neg(src)
        }
    };
    let n = 4 * p;
    let mut entries = Vec::with_capacity(n * n);
    for z in 0..n {
        for y in 0..n {
            let which = DOUBLE_SUDOKU[z / p][y / p];
            entries.push(part(which, z % p, y % p));
        }
    }
    BlockMatrixModel::new(n, d, entries)
}

/// The `p × p` form with entries `U_{0α,0β} + i·U_{0α,1β}`.
pub fn bessel_form(u: &BlockMatrixModel, p: usize) -> Result<BlockMatrixModel> {
    if u.n() < 2 * p {
        return Err(Error::ShapeMismatch(format!("model has n={} < 2p={}", u.n(), 2 * p)));
    }
    let mut entries = Vec::with_capacity(p * p);
    for a in 0..p {
        for b in 0..p {
            entries.push(u.entry(2 * a, 2 * b) + u.entry(2 * a, 2 * b + 1) * c(0.0, 1.0));
        }
    }
    BlockMatrixModel::new(p, u.d(), entries)
}

/// `P_{z,y} = U_{z,y}^* U_{z,y}` for a model passing the partial-isometry preset.
pub fn quotient_projections(
    u: &BlockMatrixModel,
    p: usize,
    q: usize,
    tol: f64,
) -> Result<BlockMatrixModel> {
    let report = check(u, RelationPreset::Hpq, p, q, tol)?;
    if !report.pass {
        return Err(Error::PrecondFailed(format!(
            "model fails hpq with residual {:.3e}",
            report.max_residual()
        )));
    }
    Ok(u.map_entries(|e| e.adjoint() * e))
}

/// The value in `{-1, 0, 1}` a scalar partial symmetry equals, if any.
pub fn classify_partial_symmetry(z: Complex64, tol: f64) -> Option<i8> {
    let relation = (z - z.conj()).norm().max((z * z * z - z).norm());
    if relation > tol {
        return None;
    }
    [-1i8, 0, 1]
        .into_iter()
        .find(|&v| (z - c(f64::from(v), 0.0)).norm() <= tol.sqrt().max(tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassicalGroup {
    O,
    B,
    HxS,
    TorusH,
    H4,
    Hq,
    Sq,
}

impl ClassicalGroup {
    pub const ALL: [ClassicalGroup; 7] = [
        ClassicalGroup::O,
        ClassicalGroup::B,
        ClassicalGroup::HxS,
        ClassicalGroup::TorusH,
        ClassicalGroup::H4,
        ClassicalGroup::Hq,
        ClassicalGroup::Sq,
    ];

    /// Presets every sample of this group satisfies, checked with the
    /// sampler's `(p, q)`.
    pub fn presets(self) -> &'static [RelationPreset] {
        match self {
            ClassicalGroup::O => &[RelationPreset::Opq],
            ClassicalGroup::B => &[RelationPreset::Opq, RelationPreset::Bpq],
            ClassicalGroup::HxS => &[RelationPreset::Spq, RelationPreset::Hpq],
            ClassicalGroup::TorusH => &[RelationPreset::Hpq],
            ClassicalGroup::H4 => &[RelationPreset::H4, RelationPreset::Hspq, RelationPreset::Hpq],
            ClassicalGroup::Hq => &[RelationPreset::Hpq, RelationPreset::Hspq],
            ClassicalGroup::Sq => &[RelationPreset::Spq, RelationPreset::Magic],
        }
    }

    /// Groups that live on the `q` part only.
    pub fn q_only(self) -> bool {
        matches!(self, ClassicalGroup::Hq | ClassicalGroup::Sq)
    }
}

impl fmt::Display for ClassicalGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassicalGroup::O => "o",
            ClassicalGroup::B => "b",
            ClassicalGroup::HxS => "hxs",
            ClassicalGroup::TorusH => "torus-h",
            ClassicalGroup::H4 => "h4",
            ClassicalGroup::Hq => "hq",
            ClassicalGroup::Sq => "sq",
        };
        f.write_str(s)
    }
}

impl FromStr for ClassicalGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_'))
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "o" => ClassicalGroup::O,
            "b" => ClassicalGroup::B,
            "hxs" => ClassicalGroup::HxS,
            "torush" => ClassicalGroup::TorusH,
            "h4" => ClassicalGroup::H4,
            "hq" => ClassicalGroup::Hq,
            "sq" => ClassicalGroup::Sq,
            _ => return Err(Error::InvalidParameters(format!("unknown group {s}"))),
        })
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed real orthogonal matrix: QR of a Gaussian matrix with
/// `R` given a positive diagonal.
pub fn haar_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut qm = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            qm.column_mut(j).neg_mut();
        }
    }
    qm
}

fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| c(x, 0.0))
}

/// Orthonormal basis of `span(vs)` by Gram–Schmidt, dropping vectors
/// within `1e-9` of the span so far.
fn orthonormal_frame(vs: &[nalgebra::DVector<f64>]) -> Vec<nalgebra::DVector<f64>> {
    let mut out: Vec<nalgebra::DVector<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for e in &out {
            w -= e * e.dot(&w);
        }
        let norm = w.norm();
        if norm > 1e-9 * v.norm().max(1.0) {
            out.push(w / norm);
        }
    }
    out
}

/// Real orthogonal `n × n` matrix whose first columns are `frame`.
fn complete_frame(frame: &[nalgebra::DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut vs: Vec<nalgebra::DVector<f64>> = frame.to_vec();
    for i in 0..n {
        vs.push(nalgebra::DVector::from_fn(n, |r, _| f64::from(u8::from(r == i))));
    }
    let basis = orthonormal_frame(&vs);
    DMatrix::from_columns(&basis[..n])
}

/// Random permutation of `0..m`.
fn permutation(m: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..m).collect();
    v.shuffle(rng);
    v
}

fn signed_permutation(m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let sigma = permutation(m, rng);
    let mut out = DMatrix::zeros(m, m);
    for (col, &row) in sigma.iter().enumerate() {
        out[(row, col)] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    }
    out
}

/// Deterministic scalar sample of a classical version of the group.
pub fn sample_classical(
    group: ClassicalGroup,
    p: usize,
    q: usize,
    seed: u64,
) -> Result<BlockMatrixModel> {
    if group.q_only() && p != 0 {
        return Err(Error::InvalidParameters(format!("{group} samples require p = 0")));
    }
    let space = IndexSpace::new(p, q)?;
    let n = space.n();
    let mut rng = rng_for(seed);
    let cm = c_matrix(&space);
    let u = match group {
        ClassicalGroup::O => {
            let o = to_complex(&haar_orthogonal(n, &mut rng));
            cm.adjoint() * o * &cm
        }
        ClassicalGroup::B => {
            let v = &cm * CMat::from_element(n, 1, c(1.0, 0.0));
            let re = nalgebra::DVector::from_fn(n, |r, _| v[(r, 0)].re);
            let im = nalgebra::DVector::from_fn(n, |r, _| v[(r, 0)].im);
            let frame = orthonormal_frame(&[re, im]);
            let basis = complete_frame(&frame, n);
            let fixed = frame.len();
            let mut inner = DMatrix::<f64>::identity(n, n);
            let o = haar_orthogonal(n - fixed, &mut rng);
            inner.view_mut((fixed, fixed), (n - fixed, n - fixed)).copy_from(&o);
            let orth = &basis * inner * basis.transpose();
            cm.adjoint() * to_complex(&orth) * &cm
        }
        ClassicalGroup::HxS => {
            let mut m = DMatrix::<f64>::zeros(n, n);
            place_pair_permutation(&mut m, p, &mut rng, |_, flip| {
                if flip {
                    [[0.0, 1.0], [1.0, 0.0]]
                } else {
                    [[1.0, 0.0], [0.0, 1.0]]
                }
            });
            let sigma = permutation(q, &mut rng);
            for (col, &row) in sigma.iter().enumerate() {
                m[(2 * p + row, 2 * p + col)] = 1.0;
            }
            to_complex(&m)
        }
        ClassicalGroup::TorusH => {
            let mut out = CMat::zeros(n, n);
            let sigma = permutation(p, &mut rng);
            for (alpha, &beta) in sigma.iter().enumerate() {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let z = Complex64::from_polar(1.0, theta);
                let (r, s) = (2 * beta, 2 * alpha);
                if rng.gen::<bool>() {
                    out[(r, s + 1)] = z;
                    out[(r + 1, s)] = z.conj();
                } else {
                    out[(r, s)] = z;
                    out[(r + 1, s + 1)] = z.conj();
                }
            }
            let h = signed_permutation(q, &mut rng);
            out.view_mut((2 * p, 2 * p), (q, q)).copy_from(&to_complex(&h));
            out
        }
        ClassicalGroup::H4 => {
            let mut m = DMatrix::<f64>::zeros(n, n);
            place_pair_permutation(&mut m, p, &mut rng, |rng, _| {
                // a + ib ∈ {1, i, −1, −i}
                let (a, b) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][rng.gen_range(0..4)];
                [[a, b], [b, a]]
            });
            let h = signed_permutation(q, &mut rng);
            m.view_mut((2 * p, 2 * p), (q, q)).copy_from(&h);
            to_complex(&m)
        }
        ClassicalGroup::Hq => to_complex(&signed_permutation(q, &mut rng)),
        ClassicalGroup::Sq => {
            let mut m = DMatrix::<f64>::zeros(q, q);
            for (col, &row) in permutation(q, &mut rng).iter().enumerate() {
                m[(row, col)] = 1.0;
            }
            to_complex(&m)
        }
    };
    Ok(BlockMatrixModel::scalar(&u))
}

/// Places a 2×2 block at pair position `(σ(α), α)` for a random `σ`.
fn place_pair_permutation(
    m: &mut DMatrix<f64>,
    p: usize,
    rng: &mut ChaCha8Rng,
    mut block: impl FnMut(&mut ChaCha8Rng, bool) -> [[f64; 2]; 2],
) {
    let sigma = permutation(p, rng);
    for (alpha, &beta) in sigma.iter().enumerate() {
        let flip = rng.gen::<bool>();
        let b = block(rng, flip);
        for (i, row) in b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(2 * beta + i, 2 * alpha + j)] = v;
            }
        }
    }
}

/// Largest block norm between the pair part and the `q` part.
pub fn off_diagonal_norm(u: &BlockMatrixModel, p: usize) -> f64 {
    let n = u.n();
    let mut worst: f64 = 0.0;
    for z in 0..2 * p {
        for y in 2 * p..n {
            worst = worst.max(u.entry(z, y).norm()).max(u.entry(y, z).norm());
        }
    }
    worst
}

fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

fn round_partial_isometry(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = svd
        .singular_values
        .map(|x| c(if x >= 0.5 { 1.0 } else { 0.0 }, 0.0));
    u * CMat::from_diagonal(&s) * vt
}

/// Alternating-projection search for a `(1,1)` partial-isometry model with a
/// block linking the pair and `q` parts of norm above `0.1`. `budget` counts
/// projection sweeps over all restarts.
pub fn witness_search(
    p: usize,
    q: usize,
    d: usize,
    budget: usize,
    seed: u64,
) -> Result<Option<BlockMatrixModel>> {
    if d == 0 || d > 6 {
        return Err(Error::InvalidParameters(format!("d must lie in 1..=6, got {d}")));
    }
    let space = IndexSpace::new(p, q)?;
    let n = space.n();
    let mut rng = rng_for(seed);
    let sweeps_per_restart = 200;
    let mut spent = 0;
    while spent < budget {
        let g = CMat::from_fn(n * d, n * d, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let mut big = polar_unitary(&g);
        for _ in 0..sweeps_per_restart.min(budget - spent) {
            spent += 1;
            let mut model = BlockMatrixModel::from_big(&big, d)?;
            // average with the barred adjoint, then round each block
            let barred: Vec<CMat> = (0..n * n)
                .map(|i| {
                    let (z, y) = (i / n, i % n);
                    let avg = (model.entry(z, y) + model.entry(space.bar(z), space.bar(y)).adjoint())
                        * c(0.5, 0.0);
                    round_partial_isometry(&avg)
                })
                .collect();
            model.entries = barred;
            big = polar_unitary(&model.to_big());
            let candidate = BlockMatrixModel::from_big(&big, d)?;
            let report = check(&candidate, RelationPreset::Hpq, p, q, 1e-6)?;
            if report.pass && off_diagonal_norm(&candidate, p) > 0.1 {
                return Ok(Some(candidate));
            }
        }
    }
    Ok(None)
}
