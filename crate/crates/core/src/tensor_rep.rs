//! Exact intertwiner matrices `T_π : (ℂⁿ)^{⊗k} → (ℂⁿ)^{⊗l}` over the index
//! set `J_{p,q}`, Gram ranks and intertwiner checks against block models.
//!
//! Tensor-power bases are ordered with the first factor most significant,
//! so `T_{a ⊗ b} = T_a ⊗ T_b` as Kronecker products.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::category::Composite;
use crate::enumerate::{enumerate, CategoryId};
use crate::error::{check_limit, Error, Result};
use crate::models::BlockMatrixModel;
use crate::partition::{BlockTag, Diagram, Kind, Parts};

pub const MAX_TENSOR_DIM: usize = 1 << 15;
pub const MAX_INTERTWINER_DIM: usize = 1 << 13;

/// `J_{p,q}`: indices `(0,1),(1,1),…,(0,p),(1,p)` followed by `1..q`.
/// Index `2(α−1)+i` is the pair index `(i,α)`; index `2p+M−1` is `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexSpace {
    p: usize,
    q: usize,
}

impl IndexSpace {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::InvalidParameters("p and q cannot both be zero".into()));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        2 * self.p + self.q
    }

    pub fn is_pair(&self, idx: usize) -> bool {
        idx < 2 * self.p
    }

    pub fn bar(&self, idx: usize) -> usize {
        if self.is_pair(idx) {
            idx ^ 1
        } else {
            idx
        }
    }

    pub fn pair_index(&self, i: usize, alpha: usize) -> usize {
        2 * (alpha - 1) + i
    }

    pub fn q_index(&self, m: usize) -> usize {
        2 * self.p + m - 1
    }

    pub fn label(&self, idx: usize) -> String {
        if self.is_pair(idx) {
            format!("({},{})", idx % 2, idx / 2 + 1)
        } else {
            format!("{}", idx - 2 * self.p + 1)
        }
    }
}

/// `F[z,y] = 1` iff `y = z̄`.
pub fn f_matrix(space: &IndexSpace) -> DMatrix<i64> {
    let n = space.n();
    DMatrix::from_fn(n, n, |z, y| i64::from(y == space.bar(z)))
}

/// Block-diagonal unitary with `(1/√2)[[ρ,ρ⁷],[ρ³,ρ⁵]]`, `ρ = e^{2πi/8}`, on
/// each pair and the identity on the `q` part.
pub fn c_matrix(space: &IndexSpace) -> DMatrix<Complex64> {
    let n = space.n();
    let rho = |e: i32| Complex64::from_polar(1.0, 2.0 * PI * f64::from(e) / 8.0) / 2f64.sqrt();
    let mut c = DMatrix::zeros(n, n);
    for a in 0..space.p {
        let (r, s) = (2 * a, 2 * a + 1);
        c[(r, r)] = rho(1);
        c[(r, s)] = rho(7);
        c[(s, r)] = rho(3);
        c[(s, s)] = rho(5);
    }
    for m in 2 * space.p..n {
        c[(m, m)] = Complex64::new(1.0, 0.0);
    }
    c
}

/// How block index patterns are read off a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TImpl {
    Plain,
    Bulleted,
    Product,
    /// Horizontal pairs weighted by `F`, vertical pairs by `δ`; pairings only.
    GeneralF(DMatrix<i64>),
}

impl TImpl {
    /// The implementation matching a diagram's decoration.
    pub fn for_kind(kind: Kind) -> Self {
        match kind {
            Kind::Plain => TImpl::Plain,
            Kind::Bulleted => TImpl::Bulleted,
            Kind::Product { .. } => TImpl::Product,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            TImpl::Plain => "plain",
            TImpl::Bulleted => "bulleted",
            TImpl::Product => "product",
            TImpl::GeneralF(_) => "generalF",
        }
    }
}

impl fmt::Display for TImpl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_impl(d: &Diagram, imp: &TImpl) -> Result<()> {
    let ok = match (imp, d) {
        (TImpl::Plain, Diagram::Plain(_)) => true,
        (TImpl::Bulleted, Diagram::Bulleted(_)) => true,
        (TImpl::Product, Diagram::Product(_)) => true,
        (TImpl::GeneralF(_), Diagram::Plain(p)) => p.block_sizes().all(|s| s == 2),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::UnsupportedImpl {
            implementation: imp.name().into(),
            kind: d.kind().to_string(),
        })
    }
}

/// Sector of `J_{p,q}` a block's common value ranges over.
fn sector(space: &IndexSpace, imp: &TImpl, tag: BlockTag) -> std::ops::Range<usize> {
    match (imp, tag) {
        (TImpl::Bulleted, _) | (TImpl::Product, BlockTag::First) => 0..2 * space.p,
        (TImpl::Product, BlockTag::Second) => 2 * space.p..space.n(),
        _ => 0..space.n(),
    }
}

/// Reference evaluation of `δ_π(i, j)` straight from the block rules.
pub fn delta(
    d: &Diagram,
    upper: &[usize],
    lower: &[usize],
    space: &IndexSpace,
    imp: &TImpl,
) -> Result<i64> {
    check_impl(d, imp)?;
    let (k, l) = (d.k(), d.l());
    if upper.len() != k || lower.len() != l {
        return Err(Error::ShapeMismatch(format!(
            "index tuples have lengths {},{} for a {k}→{l} diagram",
            upper.len(),
            lower.len()
        )));
    }
    let n = space.n();
    if let Some(&bad) = upper.iter().chain(lower).find(|&&x| x >= n) {
        return Err(Error::ShapeMismatch(format!("index {bad} outside J of size {n}")));
    }
    let index = |pt: usize| if pt <= k { upper[pt - 1] } else { lower[pt - k - 1] };
    let parts = d.to_parts();
    if let TImpl::GeneralF(f) = imp {
        let mut v = 1;
        for b in &parts.blocks {
            let (a, c) = (b[0], b[1]);
            let same_row = (a <= k) == (c <= k);
            v *= if same_row {
                f[(index(a), index(c))]
            } else {
                i64::from(index(a) == index(c))
            };
        }
        return Ok(v);
    }
    for (b, tag) in parts.blocks.iter().zip(&parts.tags) {
        let range = sector(space, imp, *tag);
        if b.iter().any(|&pt| !range.contains(&index(pt))) {
            return Ok(0);
        }
        let ok = match imp {
            TImpl::Plain => {
                // upper points then lower points, each row alternating from x
                let ups: Vec<usize> = b.iter().copied().filter(|&pt| pt <= k).collect();
                let lows: Vec<usize> = b.iter().copied().filter(|&pt| pt > k).collect();
                let x = index(*ups.first().or(lows.first()).expect("nonempty block"));
                let row_ok = |row: &[usize]| {
                    row.iter().enumerate().all(|(r, &pt)| {
                        index(pt) == if r % 2 == 0 { x } else { space.bar(x) }
                    })
                };
                row_ok(&ups) && row_ok(&lows)
            }
            _ => {
                // equal colours carry equal indices, different colours barred ones
                let bulleted = Parts::bulleted(parts.kind, *tag);
                let x = index(b[0]);
                b.iter().all(|&pt| {
                    let differs = parts.colors[pt - 1] != parts.colors[b[0] - 1];
                    let want = if bulleted && differs { space.bar(x) } else { x };
                    index(pt) == want
                })
            }
        };
        if !ok {
            return Ok(0);
        }
    }
    Ok(1)
}

/// Sparse integer matrix in compressed-column form with no stored zeros.
#[derive(Clone, Debug)]
pub struct IntertwinerMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<i64>,
    shape: Option<TShape>,
}

/// Provenance of a matrix built from a diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TShape {
    pub k: usize,
    pub l: usize,
    pub p: usize,
    pub q: usize,
}

impl PartialEq for IntertwinerMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.col_ptr == other.col_ptr
            && self.row_idx == other.row_idx
            && self.vals == other.vals
    }
}

impl Eq for IntertwinerMatrix {}

impl IntertwinerMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, i64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0; cols + 1];
        let mut row_idx = Vec::with_capacity(t.len());
        let mut vals: Vec<i64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                vals.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            vals,
            shape: None,
        };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|&v| v != 0) {
            return;
        }
        let mut t = Vec::with_capacity(self.vals.len());
        for c in 0..self.cols {
            for (r, v) in self.column(c) {
                if v != 0 {
                    t.push((r, c, v));
                }
            }
        }
        *self = Self::from_triplets(self.rows, self.cols, t);
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn shape(&self) -> Option<TShape> {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    /// Nonzero `(row, value)` pairs of column `c`, rows ascending.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.cols).flat_map(move |c| self.column(c).map(move |(r, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        match self.row_idx[range.clone()].binary_search(&r) {
            Ok(i) => self.vals[range.start + i],
            Err(_) => 0,
        }
    }

    pub fn scale(&self, s: i64) -> Self {
        let t = self.triplets().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::from_triplets(self.rows, self.cols, t)
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    /// `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = vec![0i64; self.rows];
        let mut touched = Vec::new();
        let mut t = Vec::new();
        for c in 0..other.cols {
            for (mid, v) in other.column(c) {
                for (r, w) in self.column(mid) {
                    if acc[r] == 0 {
                        touched.push(r);
                    }
                    acc[r] += v * w;
                }
            }
            for &r in &touched {
                if acc[r] != 0 {
                    t.push((r, c, acc[r]));
                }
                acc[r] = 0;
            }
            touched.clear();
        }
        Ok(Self::from_triplets(self.rows, other.cols, t))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                t.push((r1 * other.rows + r2, c1 * other.cols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, t)
    }

    /// Frobenius inner product `Σ a_{rc} b_{rc}`.
    pub fn dot(&self, other: &Self) -> Result<i64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("dot product of different shapes".into()));
        }
        let mut s = 0;
        for c in 0..self.cols {
            let mut a = self.column(c).peekable();
            let mut b = other.column(c).peekable();
            while let (Some(&(ra, va)), Some(&(rb, vb))) = (a.peek(), b.peek()) {
                match ra.cmp(&rb) {
                    std::cmp::Ordering::Less => {
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        s += va * vb;
                        a.next();
                        b.next();
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            m[r][c] = v;
        }
        m
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = Complex64::new(v as f64, 0.0);
        }
        m
    }

    pub fn to_json_value(&self) -> Value {
        json!({"rows": self.rows, "cols": self.cols, "entries": self.to_dense()})
    }

    /// One line per row, comma-separated, LF endings, with a `c0..` header.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (0..self.cols).map(|c| format!("c{c}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per block: every admissible `(column offset, row offset, coefficient)`.
fn block_options(
    d: &Diagram,
    space: &IndexSpace,
    imp: &TImpl,
) -> Vec<Vec<(usize, usize, i64)>> {
    let (k, l) = (d.k(), d.l());
    let n = space.n();
    // weight of a point in the row/column index
    let col_w = |pt: usize| n.pow((k - pt) as u32);
    let row_w = |pt: usize| n.pow((k + l - pt) as u32);
    let offset = |pt: usize, value: usize| {
        if pt <= k {
            (value * col_w(pt), 0)
        } else {
            (0, value * row_w(pt))
        }
    };
    let parts = d.to_parts();
    let mut out = Vec::with_capacity(parts.blocks.len());
    for (b, tag) in parts.blocks.iter().zip(&parts.tags) {
        let mut opts = Vec::new();
        if let TImpl::GeneralF(f) = imp {
            let (a, c) = (b[0], b[1]);
            for x in 0..n {
                for y in 0..n {
                    let coeff = if (a <= k) == (c <= k) {
                        f[(x, y)]
                    } else {
                        i64::from(x == y)
                    };
                    if coeff != 0 {
                        let (c1, r1) = offset(a, x);
                        let (c2, r2) = offset(c, y);
                        opts.push((c1 + c2, r1 + r2, coeff));
                    }
                }
            }
            out.push(opts);
            continue;
        }
        // parity of each point relative to the block value
        let parity: Vec<bool> = match imp {
            TImpl::Plain => {
                let mut up = 0;
                let mut low = 0;
                b.iter()
                    .map(|&pt| {
                        let r = if pt <= k { &mut up } else { &mut low };
                        *r += 1;
                        *r % 2 == 0
                    })
                    .collect()
            }
            _ => {
                let bulleted = Parts::bulleted(parts.kind, *tag);
                b.iter()
                    .map(|&pt| bulleted && parts.colors[pt - 1] != parts.colors[b[0] - 1])
                    .collect()
            }
        };
        for x in sector(space, imp, *tag) {
            let (mut co, mut ro) = (0, 0);
            for (&pt, &bar) in b.iter().zip(&parity) {
                let v = if bar { space.bar(x) } else { x };
                let (c, r) = offset(pt, v);
                co += c;
                ro += r;
            }
            opts.push((co, ro, 1));
        }
        out.push(opts);
    }
    out
}


/// `T_π` as a sparse integer matrix with `n^l` rows and `n^k` columns.
pub fn t_matrix(d: &Diagram, space: &IndexSpace, imp: &TImpl) -> Result<IntertwinerMatrix> {
    check_impl(d, imp)?;
    let n = space.n();
    let (k, l) = (d.k(), d.l());
    let dim = |e: usize| n.checked_pow(e as u32).unwrap_or(usize::MAX);
    check_limit("tensor dimension", dim(k), MAX_TENSOR_DIM)?;
    check_limit("tensor dimension", dim(l), MAX_TENSOR_DIM)?;
    let options = block_options(d, space, imp);
    let mut triplets = Vec::new();
    if options.iter().all(|o| !o.is_empty()) {
        let mut pos = vec![0usize; options.len()];
        loop {
            let (mut c, mut r, mut v) = (0, 0, 1);
            for (o, &i) in options.iter().zip(&pos) {
                c += o[i].0;
                r += o[i].1;
                v *= o[i].2;
            }
            triplets.push((r, c, v));
            let mut j = 0;
            loop {
                if j == pos.len() {
                    let mut m = IntertwinerMatrix::from_triplets(dim(l), dim(k), triplets);
                    m.shape = Some(TShape {
                        k,
                        l,
                        p: space.p,
                        q: space.q,
                    });
                    return Ok(m);
                }
                pos[j] += 1;
                if pos[j] < options[j].len() {
                    break;
                }
                pos[j] = 0;
                j += 1;
            }
        }
    }
    let mut m = IntertwinerMatrix::zeros(dim(l), dim(k));
    m.shape = Some(TShape {
        k,
        l,
        p: space.p,
        q: space.q,
    });
    Ok(m)
}

/// Number of values a closed block contributes when it is removed.
pub fn loop_factor(space: &IndexSpace, imp: &TImpl, composite: &Composite) -> Result<i64> {
    let pow = |base: usize, e: usize| -> Result<i64> {
        i64::try_from(base)
            .ok()
            .and_then(|b| b.checked_pow(e as u32))
            .ok_or_else(|| Error::InvalidParameters("loop factor overflows i64".into()))
    };
    let first = sector(space, imp, BlockTag::First).len();
    let second = sector(space, imp, BlockTag::Second).len();
    Ok(pow(first, composite.first_loops)? * pow(second, composite.second_loops)?)
}

/// Exact rank of an integer matrix by fraction-free elimination.
pub fn exact_rank(m: &[Vec<i64>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..rows {
            for cc in c + 1..cols {
                let v = (&a[rank][c] * &a[r][cc] - &a[r][c] * &a[rank][cc]) / &prev;
                a[r][cc] = v;
            }
            a[r][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// `dim span{T_π}` via the exact rank of the Gram matrix.
pub fn gram_rank(diagrams: &[Diagram], space: &IndexSpace, imp: &TImpl) -> Result<usize> {
    Ok(exact_rank(&gram_matrix(diagrams, space, imp)?))
}

/// `G[π,σ] = ⟨T_π, T_σ⟩`.
pub fn gram_matrix(diagrams: &[Diagram], space: &IndexSpace, imp: &TImpl) -> Result<Vec<Vec<i64>>> {
    if let Some(first) = diagrams.first() {
        if let Some(bad) = diagrams.iter().find(|d| (d.k(), d.l()) != (first.k(), first.l())) {
            return Err(Error::ShapeMismatch(format!(
                "gram inputs mix shapes {}→{} and {}→{}",
                first.k(),
                first.l(),
                bad.k(),
                bad.l()
            )));
        }
    }
    let ts = diagrams
        .iter()
        .map(|d| t_matrix(d, space, imp))
        .collect::<Result<Vec<_>>>()?;
    let mut g = vec![vec![0; ts.len()]; ts.len()];
    for i in 0..ts.len() {
        for j in i..ts.len() {
            let v = ts[i].dot(&ts[j])?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// `dim Fix(U^{⊗k})` predicted by `cat(0,k)`.
pub fn fix_dim(cat: &CategoryId, k: usize, space: &IndexSpace, imp: &TImpl) -> Result<usize> {
    gram_rank(&enumerate(cat, 0, k)?, space, imp)
}

/// Whether `T_lower · T_upper` equals the loop-weighted matrix of the composite
/// (or vanishes when the composite is zero).
pub fn composition_holds(
    upper: &Diagram,
    lower: &Diagram,
    space: &IndexSpace,
    imp: &TImpl,
) -> Result<bool> {
    let product = t_matrix(lower, space, imp)?.mul(&t_matrix(upper, space, imp)?)?;
    match crate::category::compose(upper, lower)?.into_composite() {
        None => Ok(product.is_zero()),
        Some(c) => {
            let expected = t_matrix(&c.diagram, space, imp)?.scale(loop_factor(space, imp, &c)?);
            Ok(product == expected)
        }
    }
}

/// Memoised `T_π` for one space and implementation.
pub struct TMatrixCache {
    space: IndexSpace,
    imp: TImpl,
    cache: HashMap<Diagram, IntertwinerMatrix>,
}

impl TMatrixCache {
    pub fn new(space: IndexSpace, imp: TImpl) -> Self {
        Self {
            space,
            imp,
            cache: HashMap::new(),
        }
    }

    pub fn get(&mut self, d: &Diagram) -> Result<&IntertwinerMatrix> {
        if !self.cache.contains_key(d) {
            let t = t_matrix(d, &self.space, &self.imp)?;
            self.cache.insert(d.clone(), t);
        }
        Ok(&self.cache[d])
    }

    /// [`composition_holds`] with every matrix taken from the cache.
    pub fn composition_holds(&mut self, upper: &Diagram, lower: &Diagram) -> Result<bool> {
        self.get(upper)?;
        self.get(lower)?;
        let product = self.cache[lower].mul(&self.cache[upper])?;
        match crate::category::compose(upper, lower)?.into_composite() {
            None => Ok(product.is_zero()),
            Some(c) => {
                let factor = loop_factor(&self.space, &self.imp, &c)?;
                Ok(product == self.get(&c.diagram)?.scale(factor))
            }
        }
    }
}

/// Outcome of an intertwiner check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntertwinerCheck {
    pub holds: bool,
    pub residual: f64,
}

/// `‖x − y‖ / max(1, ‖x‖, ‖y‖)` in Frobenius norm.
pub fn relative_residual(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    let scale = 1f64.max(x.norm()).max(y.norm());
    (x - y).norm() / scale
}

/// `U^{⊗k}` as an `n^k d` square matrix whose `(Z,Y)` block is the ordered
/// product `U_{z₁y₁}⋯U_{z_k y_k}`.
pub fn tensor_power(u: &BlockMatrixModel, k: usize) -> DMatrix<Complex64> {
    let (n, d) = (u.n(), u.d());
    let mut w = DMatrix::<Complex64>::identity(d, d);
    let mut size = 1;
    for _ in 0..k {
        let next_size = size * n;
        let mut next = DMatrix::zeros(next_size * d, next_size * d);
        for zr in 0..size {
            for yc in 0..size {
                let prev = w.view((zr * d, yc * d), (d, d)).into_owned();
                for z in 0..n {
                    for y in 0..n {
                        let block = &prev * u.entry(z, y);
                        next.view_mut(((zr * n + z) * d, (yc * n + y) * d), (d, d))
                            .copy_from(&block);
                    }
                }
            }
        }
        w = next;
        size = next_size;
    }
    w
}

/// Checks `U^{⊗l}(T⊗1_d) = (T⊗1_d)U^{⊗k}` for an explicit `n^l × n^k` matrix.
pub fn is_intertwiner_dense(
    t: &DMatrix<Complex64>,
    u: &BlockMatrixModel,
    k: usize,
    l: usize,
    tol: f64,
) -> Result<IntertwinerCheck> {
    let (n, d) = (u.n(), u.d());
    let dim = |e: usize| n.checked_pow(e as u32).unwrap_or(usize::MAX);
    if t.nrows() != dim(l) || t.ncols() != dim(k) {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}×{}, expected {}×{} for n={n}, k={k}, l={l}",
            t.nrows(),
            t.ncols(),
            dim(l),
            dim(k)
        )));
    }
    check_limit(
        "tensor dimension times d",
        dim(k.max(l)).saturating_mul(d),
        MAX_INTERTWINER_DIM,
    )?;
    let t1 = t.kronecker(&DMatrix::<Complex64>::identity(d, d));
    let left = tensor_power(u, l) * &t1;
    let right = &t1 * tensor_power(u, k);
    let residual = relative_residual(&left, &right);
    Ok(IntertwinerCheck {
        holds: residual <= tol,
        residual,
    })
}

pub fn is_intertwiner(
    t: &IntertwinerMatrix,
    u: &BlockMatrixModel,
    k: usize,
    l: usize,
    tol: f64,
) -> Result<IntertwinerCheck> {
    is_intertwiner_dense(&t.to_complex(), u, k, l, tol)
}

/// `ξ = Σ e_{iα}⊗e_{īα} + Σ e_M⊗e_M` as an `n² × 1` column.
pub fn xi_vector(space: &IndexSpace) -> IntertwinerMatrix {
    let n = space.n();
    let t = (0..n).map(|x| (x * n + space.bar(x), 0, 1)).collect();
    IntertwinerMatrix::from_triplets(n * n, 1, t)
}

/// `C η` where `η = Σ_z e_z`, the candidate fixed vector of bistochastic models.
pub fn c_eta(space: &IndexSpace) -> DMatrix<Complex64> {
    let n = space.n();
    c_matrix(space) * DMatrix::from_element(n, 1, Complex64::new(1.0, 0.0))
}

/// The map `e_z ↦ e_z ⊗ e_z̄ ⊗ e_z` as an `n³ × n` matrix.
pub fn triple_map(space: &IndexSpace) -> IntertwinerMatrix {
    let n = space.n();
    let t = (0..n)
        .map(|x| ((x * n + space.bar(x)) * n + x, x, 1))
        .collect();
    IntertwinerMatrix::from_triplets(n * n * n, n, t)
}

/// The map `e_z ↦ e_z̄ ⊗ e_z ⊗ e_z̄` as an `n³ × n` matrix.
pub fn barred_triple_map(space: &IndexSpace) -> IntertwinerMatrix {
    let n = space.n();
    let t = (0..n)
        .map(|x| ((space.bar(x) * n + x) * n + space.bar(x), x, 1))
        .collect();
    IntertwinerMatrix::from_triplets(n * n * n, n, t)
}
