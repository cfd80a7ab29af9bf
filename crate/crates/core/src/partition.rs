//! Set partitions between `k` upper and `l` lower points, with optional
//! bullet colourings and two-colour block tags.
//!
//! Points are numbered `1..=k` along the upper row (left to right) and
//! `k+1..=k+l` along the lower row (left to right). Every value stored here
//! is in canonical form: blocks sorted ascending and ordered by their minimal
//! element, and in every bulleted block the minimal point is black.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    k: usize,
    l: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates and canonicalizes a block list.
    pub fn new(k: usize, l: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let total = k + l;
        let mut seen = vec![false; total + 1];
        for (bi, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {bi} is empty")));
            }
            for &pt in block {
                if pt == 0 || pt > total {
                    return Err(Error::InvalidPartition(format!(
                        "point {pt} in block {bi} is outside 1..={total}"
                    )));
                }
                if seen[pt] {
                    return Err(Error::InvalidPartition(format!(
                        "point {pt} appears more than once (block {bi})"
                    )));
                }
                seen[pt] = true;
            }
        }
        if let Some(missing) = (1..=total).find(|&pt| !seen[pt]) {
            return Err(Error::InvalidPartition(format!(
                "point {missing} is not covered by any block"
            )));
        }
        Ok(Self::from_blocks_unchecked(k, l, blocks))
    }

    /// Canonicalizes without validation; callers guarantee a set partition.
    pub(crate) fn from_blocks_unchecked(k: usize, l: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { k, l, blocks }
    }

    /// Builds a partition from a block label per point (`labels[pt - 1]`).
    pub(crate) fn from_labels(k: usize, l: usize, labels: &[usize]) -> Self {
        let nblocks = labels.iter().map(|&x| x + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &lab) in labels.iter().enumerate() {
            blocks[lab].push(i + 1);
        }
        blocks.retain(|b| !b.is_empty());
        Self::from_blocks_unchecked(k, l, blocks)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn points(&self) -> usize {
        self.k + self.l
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_upper(&self, point: usize) -> bool {
        point <= self.k
    }

    /// Index of the block containing each point, `labels()[pt - 1]`.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.points()];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &pt in b {
                labels[pt - 1] = bi;
            }
        }
        labels
    }

    /// The identity on `n` strings.
    pub fn identity(n: usize) -> Self {
        Self::from_blocks_unchecked(n, n, (1..=n).map(|i| vec![i, n + i]).collect())
    }

    /// The pair `∩` with no upper and two lower points.
    pub fn cap() -> Self {
        Self::from_blocks_unchecked(0, 2, vec![vec![1, 2]])
    }

    /// The pair `∪` with two upper and no lower points.
    pub fn cup() -> Self {
        Self::from_blocks_unchecked(2, 0, vec![vec![1, 2]])
    }

    /// The empty partition between zero points.
    pub fn empty() -> Self {
        Self::from_blocks_unchecked(0, 0, Vec::new())
    }

    /// Position of a point on the circle `u_1..u_k, l_l..l_1`.
    pub fn circular_position(&self, point: usize) -> usize {
        if point <= self.k {
            point - 1
        } else {
            let j = point - self.k;
            self.k + (self.l - j)
        }
    }

    pub fn is_noncrossing(&self) -> bool {
        let n = self.points();
        let mut by_position = vec![0usize; n];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &pt in b {
                by_position[self.circular_position(pt)] = bi;
            }
        }
        let mut remaining: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        let mut started = vec![false; self.blocks.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &b in &by_position {
            if stack.last() != Some(&b) {
                if started[b] {
                    return false;
                }
                stack.push(b);
            }
            started[b] = true;
            remaining[b] -= 1;
            if remaining[b] == 0 {
                stack.pop();
            }
        }
        true
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(Vec::len)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}→{})", self.k, self.l)?;
        for b in &self.blocks {
            let pts: Vec<String> = b.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", pts.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flip(self) -> Self {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn flipped_if(self, flip: bool) -> Self {
        if flip {
            self.flip()
        } else {
            self
        }
    }

    pub fn is_white(self) -> bool {
        self == Color::White
    }

    fn symbol(self) -> &'static str {
        match self {
            Color::Black => "b",
            Color::White => "w",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BulletedPartition {
    base: Partition,
    colors: Vec<Color>,
}

impl BulletedPartition {
    /// Accepts any colouring and flips blocks into canonical form.
    pub fn new(base: Partition, colors: Vec<Color>) -> Result<Self> {
        if colors.len() != base.points() {
            return Err(Error::InvalidPartition(format!(
                "colouring has {} entries for {} points",
                colors.len(),
                base.points()
            )));
        }
        let mut bp = Self { base, colors };
        bp.canonicalize_in_place();
        Ok(bp)
    }

    fn canonicalize_in_place(&mut self) {
        for b in &self.base.blocks {
            if self.colors[b[0] - 1].is_white() {
                for &pt in b {
                    self.colors[pt - 1] = self.colors[pt - 1].flip();
                }
            }
        }
    }

    /// Identity through-strings with every point black.
    pub fn identity(n: usize) -> Self {
        let base = Partition::identity(n);
        let colors = vec![Color::Black; 2 * n];
        Self { base, colors }
    }

    pub fn base(&self) -> &Partition {
        &self.base
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn color(&self, point: usize) -> Color {
        self.colors[point - 1]
    }
}

impl fmt::Display for BulletedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}→{})", self.base.k, self.base.l)?;
        for b in &self.base.blocks {
            let pts: Vec<String> = b
                .iter()
                .map(|&p| format!("{}{}", p, self.color(p).symbol()))
                .collect();
            write!(f, "{{{}}}", pts.join(","))?;
        }
        Ok(())
    }
}

/// Colour class of a block in a free-product partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockTag {
    First,
    Second,
}

impl BlockTag {
    pub fn as_number(self) -> u8 {
        match self {
            BlockTag::First => 1,
            BlockTag::Second => 2,
        }
    }

    pub fn from_number(n: u64) -> Option<Self> {
        match n {
            1 => Some(BlockTag::First),
            2 => Some(BlockTag::Second),
            _ => None,
        }
    }
}

/// A partition whose blocks carry tags 1/2; when `colors` is present the
/// tag-1 blocks are bulleted and tag-2 points are stored as black.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductPartition {
    base: Partition,
    tags: Vec<BlockTag>,
    colors: Option<Vec<Color>>,
}

impl ProductPartition {
    /// `tags[i]` refers to `blocks[i]` in the order given.
    pub fn new(
        k: usize,
        l: usize,
        blocks: Vec<Vec<usize>>,
        tags: Vec<BlockTag>,
        colors: Option<Vec<Color>>,
    ) -> Result<Self> {
        if tags.len() != blocks.len() {
            return Err(Error::InvalidPartition(format!(
                "{} block tags for {} blocks",
                tags.len(),
                blocks.len()
            )));
        }
        // validate through Partition::new, then rebuild the tag order
        Partition::new(k, l, blocks.clone())?;
        if let Some(c) = &colors {
            if c.len() != k + l {
                return Err(Error::InvalidPartition(format!(
                    "colouring has {} entries for {} points",
                    c.len(),
                    k + l
                )));
            }
        }
        Ok(Self::assemble(k, l, blocks, tags, colors))
    }

    pub(crate) fn assemble(
        k: usize,
        l: usize,
        blocks: Vec<Vec<usize>>,
        tags: Vec<BlockTag>,
        colors: Option<Vec<Color>>,
    ) -> Self {
        let mut tagged: Vec<(Vec<usize>, BlockTag)> = blocks
            .into_iter()
            .zip(tags)
            .map(|(mut b, t)| {
                b.sort_unstable();
                (b, t)
            })
            .collect();
        tagged.sort_unstable_by_key(|(b, _)| b[0]);
        let mut colors = colors;
        if let Some(c) = colors.as_mut() {
            for (b, t) in &tagged {
                let flip = match t {
                    BlockTag::First => c[b[0] - 1].is_white(),
                    BlockTag::Second => false,
                };
                for &pt in b {
                    c[pt - 1] = match t {
                        BlockTag::First => c[pt - 1].flipped_if(flip),
                        BlockTag::Second => Color::Black,
                    };
                }
            }
        }
        let (blocks, tags) = tagged.into_iter().unzip();
        Self {
            base: Partition { k, l, blocks },
            tags,
            colors,
        }
    }

    pub fn base(&self) -> &Partition {
        &self.base
    }

    pub fn tags(&self) -> &[BlockTag] {
        &self.tags
    }

    pub fn colors(&self) -> Option<&[Color]> {
        self.colors.as_deref()
    }

    pub fn is_bulleted(&self) -> bool {
        self.colors.is_some()
    }
}

impl fmt::Display for ProductPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}→{})", self.base.k, self.base.l)?;
        for (b, t) in self.base.blocks.iter().zip(&self.tags) {
            let pts: Vec<String> = b
                .iter()
                .map(|&p| match &self.colors {
                    Some(c) if *t == BlockTag::First => format!("{}{}", p, c[p - 1].symbol()),
                    _ => p.to_string(),
                })
                .collect();
            write!(f, "{}{{{}}}", t.as_number(), pts.join(","))?;
        }
        Ok(())
    }
}

/// Decoration family of a diagram; operations only combine equal kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Plain,
    Bulleted,
    Product { bulleted_first: bool },
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Plain => write!(f, "plain"),
            Kind::Bulleted => write!(f, "bulleted"),
            Kind::Product {
                bulleted_first: true,
            } => write!(f, "product(bulleted)"),
            Kind::Product {
                bulleted_first: false,
            } => write!(f, "product"),
        }
    }
}

/// Any of the three partition flavours.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Diagram {
    Plain(Partition),
    Bulleted(BulletedPartition),
    Product(ProductPartition),
}

impl Diagram {
    pub fn kind(&self) -> Kind {
        match self {
            Diagram::Plain(_) => Kind::Plain,
            Diagram::Bulleted(_) => Kind::Bulleted,
            Diagram::Product(p) => Kind::Product {
                bulleted_first: p.is_bulleted(),
            },
        }
    }

    pub fn base(&self) -> &Partition {
        match self {
            Diagram::Plain(p) => p,
            Diagram::Bulleted(b) => &b.base,
            Diagram::Product(p) => &p.base,
        }
    }

    pub fn k(&self) -> usize {
        self.base().k
    }

    pub fn l(&self) -> usize {
        self.base().l
    }

    pub fn points(&self) -> usize {
        self.base().points()
    }

    /// Identity through-strings of the given kind (all black, tag 1).
    pub fn identity(kind: Kind, n: usize) -> Self {
        let base = Partition::identity(n);
        match kind {
            Kind::Plain => Diagram::Plain(base),
            Kind::Bulleted => Diagram::Bulleted(BulletedPartition::identity(n)),
            Kind::Product { bulleted_first } => {
                let tags = vec![BlockTag::First; n];
                let colors = bulleted_first.then(|| vec![Color::Black; 2 * n]);
                Diagram::Product(ProductPartition {
                    base,
                    tags,
                    colors,
                })
            }
        }
    }

    pub(crate) fn to_parts(&self) -> Parts {
        let base = self.base();
        let n = base.points();
        let (colors, tags) = match self {
            Diagram::Plain(p) => (vec![Color::Black; n], vec![BlockTag::First; p.num_blocks()]),
            Diagram::Bulleted(b) => (b.colors.clone(), vec![BlockTag::First; b.base.num_blocks()]),
            Diagram::Product(p) => (
                p.colors.clone().unwrap_or_else(|| vec![Color::Black; n]),
                p.tags.clone(),
            ),
        };
        Parts {
            kind: self.kind(),
            k: base.k,
            l: base.l,
            blocks: base.blocks.clone(),
            tags,
            colors,
        }
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagram::Plain(p) => p.fmt(f),
            Diagram::Bulleted(b) => b.fmt(f),
            Diagram::Product(p) => p.fmt(f),
        }
    }
}

impl From<Partition> for Diagram {
    fn from(p: Partition) -> Self {
        Diagram::Plain(p)
    }
}

impl From<BulletedPartition> for Diagram {
    fn from(p: BulletedPartition) -> Self {
        Diagram::Bulleted(p)
    }
}

impl From<ProductPartition> for Diagram {
    fn from(p: ProductPartition) -> Self {
        Diagram::Product(p)
    }
}

/// Unpacked working form shared by the category operations. Blocks need not
/// be canonical; `into_diagram` restores canonical form.
#[derive(Clone, Debug)]
pub(crate) struct Parts {
    pub kind: Kind,
    pub k: usize,
    pub l: usize,
    pub blocks: Vec<Vec<usize>>,
    pub tags: Vec<BlockTag>,
    pub colors: Vec<Color>,
}

impl Parts {
    /// Whether the bullet rule applies to blocks carrying `tag`.
    pub fn bulleted(kind: Kind, tag: BlockTag) -> bool {
        match kind {
            Kind::Plain => false,
            Kind::Bulleted => true,
            Kind::Product { bulleted_first } => bulleted_first && tag == BlockTag::First,
        }
    }

    pub fn into_diagram(self) -> Diagram {
        let Parts {
            kind,
            k,
            l,
            blocks,
            tags,
            colors,
        } = self;
        match kind {
            Kind::Plain => Diagram::Plain(Partition::from_blocks_unchecked(k, l, blocks)),
            Kind::Bulleted => {
                let mut bp = BulletedPartition {
                    base: Partition::from_blocks_unchecked(k, l, blocks),
                    colors,
                };
                bp.canonicalize_in_place();
                Diagram::Bulleted(bp)
            }
            Kind::Product { bulleted_first } => Diagram::Product(ProductPartition::assemble(
                k,
                l,
                blocks,
                tags,
                bulleted_first.then_some(colors),
            )),
        }
    }
}

/// Flips colours block-by-block so every block's minimal point is black.
pub fn canonicalize(bp: &BulletedPartition) -> BulletedPartition {
    let mut out = bp.clone();
    out.canonicalize_in_place();
    out
}

pub fn is_noncrossing(p: &Partition) -> bool {
    p.is_noncrossing()
}

/// Canonical JSON text (sorted keys, absent optional fields omitted).
pub fn to_json(d: &Diagram) -> String {
    to_json_value(d).to_string()
}

pub fn to_json_value(d: &Diagram) -> Value {
    let base = d.base();
    let mut obj = Map::new();
    obj.insert("k".into(), json!(base.k));
    obj.insert("l".into(), json!(base.l));
    obj.insert("blocks".into(), json!(base.blocks));
    let colors = match d {
        Diagram::Plain(_) => None,
        Diagram::Bulleted(b) => Some(b.colors.as_slice()),
        Diagram::Product(p) => p.colors.as_deref(),
    };
    if let Some(c) = colors {
        let map: BTreeMap<String, &str> = c
            .iter()
            .enumerate()
            .map(|(i, col)| ((i + 1).to_string(), col.symbol()))
            .collect();
        obj.insert("colors".into(), json!(map));
    }
    if let Diagram::Product(p) = d {
        let tags: Vec<u8> = p.tags.iter().map(|t| t.as_number()).collect();
        obj.insert("blockTags".into(), json!(tags));
    }
    Value::Object(obj)
}

fn semantic(message: impl Into<String>) -> Error {
    Error::Parse {
        message: message.into(),
        position: None,
    }
}

pub fn from_json(text: &str) -> Result<Diagram> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        message: e.to_string(),
        position: Some((e.line(), e.column())),
    })?;
    from_json_value(&value)
}

pub fn from_json_value(value: &Value) -> Result<Diagram> {
    let obj = value
        .as_object()
        .ok_or_else(|| semantic("expected a JSON object"))?;
    let count = |key: &str| -> Result<usize> {
        obj.get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| semantic(format!("field \"{key}\" must be a non-negative integer")))
    };
    let k = count("k")?;
    let l = count("l")?;
    let raw_blocks = obj
        .get("blocks")
        .and_then(Value::as_array)
        .ok_or_else(|| semantic("field \"blocks\" must be an array"))?;
    let mut blocks = Vec::with_capacity(raw_blocks.len());
    for (bi, b) in raw_blocks.iter().enumerate() {
        let arr = b
            .as_array()
            .ok_or_else(|| semantic(format!("blocks[{bi}] must be an array")))?;
        let mut block = Vec::with_capacity(arr.len());
        for (pi, pt) in arr.iter().enumerate() {
            let v = pt
                .as_u64()
                .ok_or_else(|| semantic(format!("blocks[{bi}][{pi}] must be a positive integer")))?;
            block.push(v as usize);
        }
        blocks.push(block);
    }
    let invalid = |e: Error| match e {
        Error::InvalidPartition(m) => semantic(m),
        other => other,
    };
    let colors = match obj.get("colors") {
        None => None,
        Some(c) => {
            let map = c
                .as_object()
                .ok_or_else(|| semantic("field \"colors\" must be an object"))?;
            let mut colors = vec![None; k + l];
            for (key, v) in map {
                let pt: usize = key
                    .parse()
                    .map_err(|_| semantic(format!("colour key \"{key}\" is not a point id")))?;
                if pt == 0 || pt > k + l {
                    return Err(semantic(format!("colour key {pt} is outside 1..={}", k + l)));
                }
                colors[pt - 1] = Some(match v.as_str() {
                    Some("b") => Color::Black,
                    Some("w") => Color::White,
                    _ => return Err(semantic(format!("colour of point {pt} must be \"b\" or \"w\""))),
                });
            }
            let colors: Option<Vec<Color>> = colors.into_iter().collect();
            Some(colors.ok_or_else(|| semantic("colouring must cover every point"))?)
        }
    };
    match obj.get("blockTags") {
        None => {
            let base = Partition::new(k, l, blocks).map_err(invalid)?;
            Ok(match colors {
                None => Diagram::Plain(base),
                Some(c) => Diagram::Bulleted(BulletedPartition::new(base, c).map_err(invalid)?),
            })
        }
        Some(t) => {
            let arr = t
                .as_array()
                .ok_or_else(|| semantic("field \"blockTags\" must be an array"))?;
            let tags = arr
                .iter()
                .map(|v| v.as_u64().and_then(BlockTag::from_number))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| semantic("block tags must be 1 or 2"))?;
            Ok(Diagram::Product(
                ProductPartition::new(k, l, blocks, tags, colors).map_err(invalid)?,
            ))
        }
    }
}
