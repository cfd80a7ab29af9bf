//! Named categories of partitions, membership, enumeration and counting.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{check_limit, Error, Result};
use crate::partition::{
    BlockTag, BulletedPartition, Color, Diagram, Kind, Partition, ProductPartition,
};

pub const MAX_PLAIN_POINTS: usize = 16;
pub const MAX_DECORATED_POINTS: usize = 12;
pub const MAX_PRODUCT_ENUMERATE_POINTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CategoryId {
    P,
    NC,
    P2,
    NC2,
    P12,
    NC12,
    Peven,
    NCeven,
    Pbullet,
    NCbullet,
    NCbulletEven,
    Product(Box<CategoryId>, Box<CategoryId>),
}

/// Block-size condition shared by the named categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SizeRule {
    Any,
    Pairs,
    AtMostTwo,
    Even,
}

impl SizeRule {
    pub fn admits(self, size: usize) -> bool {
        match self {
            SizeRule::Any => true,
            SizeRule::Pairs => size == 2,
            SizeRule::AtMostTwo => size <= 2,
            SizeRule::Even => size % 2 == 0,
        }
    }

    fn max_block(self) -> Option<usize> {
        match self {
            SizeRule::Pairs | SizeRule::AtMostTwo => Some(2),
            _ => None,
        }
    }
}

impl CategoryId {
    /// Builds `c1 ⋆ c2`, rejecting nested products and a bulleted second factor.
    pub fn product(c1: CategoryId, c2: CategoryId) -> Result<Self> {
        if c1.is_product() || c2.is_product() {
            return Err(Error::UnsupportedCategory(
                "products of products are not supported".into(),
            ));
        }
        if c2.is_bulleted() {
            return Err(Error::UnsupportedCategory(format!(
                "the second factor of a product must be unbulleted, got {c2}"
            )));
        }
        Ok(CategoryId::Product(Box::new(c1), Box::new(c2)))
    }

    pub fn is_product(&self) -> bool {
        matches!(self, CategoryId::Product(..))
    }

    pub fn is_bulleted(&self) -> bool {
        matches!(
            self,
            CategoryId::Pbullet | CategoryId::NCbullet | CategoryId::NCbulletEven
        )
    }

    pub fn is_noncrossing(&self) -> bool {
        match self {
            CategoryId::NC
            | CategoryId::NC2
            | CategoryId::NC12
            | CategoryId::NCeven
            | CategoryId::NCbullet
            | CategoryId::NCbulletEven => true,
            CategoryId::Product(a, b) => a.is_noncrossing() && b.is_noncrossing(),
            _ => false,
        }
    }

    pub(crate) fn size_rule(&self) -> SizeRule {
        match self {
            CategoryId::P2 | CategoryId::NC2 => SizeRule::Pairs,
            CategoryId::P12 | CategoryId::NC12 => SizeRule::AtMostTwo,
            CategoryId::Peven | CategoryId::NCeven | CategoryId::NCbulletEven => SizeRule::Even,
            _ => SizeRule::Any,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            CategoryId::Product(a, _) => Kind::Product {
                bulleted_first: a.is_bulleted(),
            },
            c if c.is_bulleted() => Kind::Bulleted,
            _ => Kind::Plain,
        }
    }

    fn point_limit(&self) -> usize {
        match self.kind() {
            Kind::Plain => MAX_PLAIN_POINTS,
            _ => MAX_DECORATED_POINTS,
        }
    }

    /// Whether the undecorated partition satisfies this (non-product) category's shape rules.
    pub(crate) fn admits_base(&self, p: &Partition) -> bool {
        (!self.is_noncrossing() || p.is_noncrossing())
            && p.block_sizes().all(|s| self.size_rule().admits(s))
    }

    pub fn contains(&self, d: &Diagram) -> bool {
        match (self, d) {
            (CategoryId::Product(c1, c2), Diagram::Product(pp)) => {
                pp.is_bulleted() == c1.is_bulleted()
                    && product_admits(c1, c2, pp.base(), pp.tags())
            }
            (CategoryId::Product(..), _) => false,
            (c, Diagram::Bulleted(bp)) if c.is_bulleted() => c.admits_base(bp.base()),
            (c, Diagram::Plain(p)) if !c.is_bulleted() => c.admits_base(p),
            _ => false,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

/// Restriction of a base partition to the blocks carrying `tag`.
fn restrict(base: &Partition, tags: &[BlockTag], tag: BlockTag) -> Partition {
    let kept: Vec<&Vec<usize>> = base
        .blocks()
        .iter()
        .zip(tags)
        .filter(|(_, t)| **t == tag)
        .map(|(b, _)| b)
        .collect();
    let mut points: Vec<usize> = kept.iter().flat_map(|b| b.iter().copied()).collect();
    points.sort_unstable();
    let k = points.iter().filter(|&&pt| pt <= base.k()).count();
    let relabel = |pt: usize| points.binary_search(&pt).unwrap() + 1;
    let blocks = kept
        .iter()
        .map(|b| b.iter().map(|&pt| relabel(pt)).collect())
        .collect();
    Partition::from_blocks_unchecked(k, points.len() - k, blocks)
}

pub(crate) fn product_admits(
    c1: &CategoryId,
    c2: &CategoryId,
    base: &Partition,
    tags: &[BlockTag],
) -> bool {
    if c1.is_noncrossing() && c2.is_noncrossing() && !base.is_noncrossing() {
        return false;
    }
    c1.admits_base(&restrict(base, tags, BlockTag::First))
        && c2.admits_base(&restrict(base, tags, BlockTag::Second))
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CategoryId::P => "P",
            CategoryId::NC => "NC",
            CategoryId::P2 => "P2",
            CategoryId::NC2 => "NC2",
            CategoryId::P12 => "P12",
            CategoryId::NC12 => "NC12",
            CategoryId::Peven => "Peven",
            CategoryId::NCeven => "NCeven",
            CategoryId::Pbullet => "Pbullet",
            CategoryId::NCbullet => "NCbullet",
            CategoryId::NCbulletEven => "NCbulletEven",
            CategoryId::Product(a, b) => return write!(f, "{a}*{b}"),
        };
        f.write_str(s)
    }
}

impl FromStr for CategoryId {
    type Err = Error;

    /// Accepts names case-insensitively, with optional `-`/`_` separators,
    /// and products written `A*B`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some((a, b)) = s.split_once('*') {
            return CategoryId::product(a.parse()?, b.parse()?);
        }
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "p" => CategoryId::P,
            "nc" => CategoryId::NC,
            "p2" => CategoryId::P2,
            "nc2" => CategoryId::NC2,
            "p12" => CategoryId::P12,
            "nc12" => CategoryId::NC12,
            "peven" => CategoryId::Peven,
            "nceven" => CategoryId::NCeven,
            "pbullet" => CategoryId::Pbullet,
            "ncbullet" => CategoryId::NCbullet,
            "ncbulleteven" => CategoryId::NCbulletEven,
            _ => return Err(Error::UnsupportedCategory(s.to_string())),
        })
    }
}

/// Visits every set partition of the `k+l` points, optionally only the
/// noncrossing ones and with a cap on block size.
pub(crate) fn for_each_base(
    k: usize,
    l: usize,
    noncrossing: bool,
    max_block: Option<usize>,
    f: &mut dyn FnMut(&Partition),
) {
    let n = k + l;
    // point id (0-based) at each circular position
    let point_at: Vec<usize> = (0..n)
        .map(|pos| if pos < k { pos } else { k + (n - 1 - pos) })
        .collect();
    let mut gen = Generator {
        n,
        noncrossing,
        max_block: max_block.unwrap_or(usize::MAX),
        label: vec![0; n],
        first: Vec::new(),
        last: Vec::new(),
        size: Vec::new(),
    };
    let mut emit = |labels: &[usize]| {
        let mut by_point = vec![0; n];
        for (pos, &lab) in labels.iter().enumerate() {
            by_point[point_at[pos]] = lab;
        }
        f(&Partition::from_labels(k, l, &by_point));
    };
    gen.run(0, &mut emit);
}

struct Generator {
    n: usize,
    noncrossing: bool,
    max_block: usize,
    label: Vec<usize>,
    first: Vec<usize>,
    last: Vec<usize>,
    size: Vec<usize>,
}

impl Generator {
    fn run(&mut self, pos: usize, emit: &mut dyn FnMut(&[usize])) {
        if pos == self.n {
            emit(&self.label);
            return;
        }
        for b in 0..self.first.len() {
            if self.size[b] >= self.max_block {
                continue;
            }
            if self.noncrossing {
                // joining pos to b must not enclose part of a block that began before last(b)
                let lb = self.last[b];
                let crosses = (0..self.first.len())
                    .any(|c| c != b && self.last[c] > lb && self.first[c] < lb);
                if crosses {
                    continue;
                }
            }
            let saved = self.last[b];
            self.label[pos] = b;
            self.last[b] = pos;
            self.size[b] += 1;
            self.run(pos + 1, emit);
            self.size[b] -= 1;
            self.last[b] = saved;
        }
        let b = self.first.len();
        self.label[pos] = b;
        self.first.push(pos);
        self.last.push(pos);
        self.size.push(1);
        self.run(pos + 1, emit);
        self.first.pop();
        self.last.pop();
        self.size.pop();
    }
}

/// All colourings of `base` with each block's minimal point black.
pub(crate) fn for_each_bulleting(
    base: &Partition,
    bulleted_blocks: &[bool],
    f: &mut dyn FnMut(Vec<Color>),
) {
    let free: Vec<usize> = base
        .blocks()
        .iter()
        .zip(bulleted_blocks)
        .filter(|(_, &on)| on)
        .flat_map(|(b, _)| b[1..].iter().copied())
        .collect();
    for mask in 0u64..(1u64 << free.len()) {
        let mut colors = vec![Color::Black; base.points()];
        for (bit, &pt) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                colors[pt - 1] = Color::White;
            }
        }
        f(colors);
    }
}

/// Visits every member of `cat(k, l)` in canonical form (unsorted).
pub fn for_each_member(cat: &CategoryId, k: usize, l: usize, f: &mut dyn FnMut(Diagram)) {
    match cat {
        CategoryId::Product(c1, c2) => {
            let nc = c1.is_noncrossing() && c2.is_noncrossing();
            let bulleted = c1.is_bulleted();
            for_each_base(k, l, nc, None, &mut |base| {
                let nb = base.num_blocks();
                for mask in 0u64..(1u64 << nb) {
                    let tags: Vec<BlockTag> = (0..nb)
                        .map(|i| {
                            if mask >> i & 1 == 0 {
                                BlockTag::First
                            } else {
                                BlockTag::Second
                            }
                        })
                        .collect();
                    if !product_admits(c1, c2, base, &tags) {
                        continue;
                    }
                    let assemble = |colors: Option<Vec<Color>>| {
                        Diagram::Product(ProductPartition::assemble(
                            k,
                            l,
                            base.blocks().to_vec(),
                            tags.clone(),
                            colors,
                        ))
                    };
                    if bulleted {
                        let on: Vec<bool> = tags.iter().map(|t| *t == BlockTag::First).collect();
                        for_each_bulleting(base, &on, &mut |c| f(assemble(Some(c))));
                    } else {
                        f(assemble(None));
                    }
                }
            });
        }
        c => {
            let rule = c.size_rule();
            let bulleted = c.is_bulleted();
            for_each_base(k, l, c.is_noncrossing(), rule.max_block(), &mut |base| {
                if !base.block_sizes().all(|s| rule.admits(s)) {
                    return;
                }
                if bulleted {
                    let on = vec![true; base.num_blocks()];
                    for_each_bulleting(base, &on, &mut |colors| {
                        let bp = BulletedPartition::new(base.clone(), colors)
                            .expect("colouring matches point count");
                        f(Diagram::Bulleted(bp));
                    });
                } else {
                    f(Diagram::Plain(base.clone()));
                }
            });
        }
    }
}

/// Every member of `cat(k, l)`, sorted by canonical encoding.
pub fn enumerate(cat: &CategoryId, k: usize, l: usize) -> Result<Vec<Diagram>> {
    check_limit("points", k + l, cat.point_limit())?;
    let mut out = Vec::new();
    for_each_member(cat, k, l, &mut |d| out.push(d));
    out.sort_unstable();
    Ok(out)
}

/// `|cat(0, k)|`.
pub fn count(cat: &CategoryId, k: usize) -> Result<BigUint> {
    check_limit("points", k, cat.point_limit())?;
    let mut n: u64 = 0;
    for_each_member(cat, 0, k, &mut |_| n += 1);
    Ok(BigUint::from(n))
}

/// Decorated members of the product category `c1 ⋆ c2`.
pub fn product_enumerate(
    c1: &CategoryId,
    c2: &CategoryId,
    k: usize,
    l: usize,
) -> Result<Vec<ProductPartition>> {
    let cat = CategoryId::product(c1.clone(), c2.clone())?;
    check_limit("points", k + l, MAX_PRODUCT_ENUMERATE_POINTS)?;
    let mut out = Vec::new();
    for_each_member(&cat, k, l, &mut |d| {
        if let Diagram::Product(pp) = d {
            out.push(pp);
        }
    });
    out.sort_unstable();
    Ok(out)
}

/// Closed-form counting sequences.
pub mod numbers {
    use num_bigint::BigUint;
    use num_traits::{One, Zero};

    pub fn binomial(n: u64, r: u64) -> BigUint {
        if r > n {
            return BigUint::zero();
        }
        let r = r.min(n - r);
        let mut acc = BigUint::one();
        for i in 0..r {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    pub fn catalan(n: u64) -> BigUint {
        binomial(2 * n, n) / (n + 1)
    }

    /// Bell numbers via the Bell triangle.
    pub fn bell(n: u64) -> BigUint {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![row.last().unwrap().clone()];
            for x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            row = next;
        }
        row[0].clone()
    }

    /// Motzkin numbers, `M_{n+1} = M_n + Σ M_i M_{n-1-i}`.
    pub fn motzkin(n: u64) -> BigUint {
        let n = n as usize;
        let mut m = vec![BigUint::one()];
        for j in 1..=n {
            let mut v = m[j - 1].clone();
            for i in 0..j.saturating_sub(1) {
                v += &m[i] * &m[j - 2 - i];
            }
            m.push(v);
        }
        m[n].clone()
    }

    /// Noncrossing partitions of `n` points with exactly `b` blocks.
    pub fn narayana(n: u64, b: u64) -> BigUint {
        if n == 0 {
            return if b == 0 { BigUint::one() } else { BigUint::zero() };
        }
        if b == 0 || b > n {
            return BigUint::zero();
        }
        binomial(n, b) * binomial(n, b - 1) / n
    }
}
