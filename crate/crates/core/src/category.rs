//! Tensor, composition, involution and rotation of partitions, plus
//! closure from generators and bounded-size category comparison.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::enumerate::{enumerate, CategoryId};
use crate::error::{check_limit, Error, Result};
use crate::partition::{BlockTag, Color, Diagram, Kind, Parts};

pub const MAX_CLOSURE_POINTS: usize = 8;
pub const MAX_EQUAL_POINTS: usize = 10;

/// A nonzero composite together with the closed blocks removed from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composite {
    pub diagram: Diagram,
    /// Closed blocks with tag 1 (all of them for unproducted kinds).
    pub first_loops: usize,
    /// Closed blocks with tag 2.
    pub second_loops: usize,
}

impl Composite {
    pub fn loops(&self) -> usize {
        self.first_loops + self.second_loops
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComposeResult {
    Zero,
    NonZero(Composite),
}

impl ComposeResult {
    pub fn is_zero(&self) -> bool {
        matches!(self, ComposeResult::Zero)
    }

    pub fn diagram(&self) -> Option<&Diagram> {
        match self {
            ComposeResult::Zero => None,
            ComposeResult::NonZero(c) => Some(&c.diagram),
        }
    }

    pub fn loops(&self) -> Option<usize> {
        match self {
            ComposeResult::Zero => None,
            ComposeResult::NonZero(c) => Some(c.loops()),
        }
    }

    pub fn into_composite(self) -> Option<Composite> {
        match self {
            ComposeResult::Zero => None,
            ComposeResult::NonZero(c) => Some(c),
        }
    }
}

fn same_kind(a: &Diagram, b: &Diagram) -> Result<Kind> {
    if a.kind() != b.kind() {
        return Err(Error::KindMismatch(a.kind().to_string(), b.kind().to_string()));
    }
    Ok(a.kind())
}

/// Rebuilds `parts` with each point id `x` moved to `map(x)`.
fn relabel(parts: &Parts, k: usize, l: usize, map: impl Fn(usize) -> usize) -> Parts {
    let mut colors = vec![Color::Black; k + l];
    for (i, &c) in parts.colors.iter().enumerate() {
        colors[map(i + 1) - 1] = c;
    }
    Parts {
        kind: parts.kind,
        k,
        l,
        blocks: parts
            .blocks
            .iter()
            .map(|b| b.iter().map(|&x| map(x)).collect())
            .collect(),
        tags: parts.tags.clone(),
        colors,
    }
}

/// Horizontal juxtaposition, `a` on the left.
pub fn tensor(a: &Diagram, b: &Diagram) -> Result<Diagram> {
    let kind = same_kind(a, b)?;
    let (ka, la, kb, lb) = (a.k(), a.l(), b.k(), b.l());
    let (k, l) = (ka + kb, la + lb);
    let pa = relabel(&a.to_parts(), k, l, |x| if x <= ka { x } else { x + kb });
    let pb = relabel(&b.to_parts(), k, l, |x| {
        if x <= kb {
            x + ka
        } else {
            x + ka + la
        }
    });
    let mut colors = pa.colors;
    for (c, pt) in pb.colors.iter().zip(1..) {
        let owned_by_b = (pt > ka && pt <= k) || pt > k + la;
        if owned_by_b {
            colors[pt - 1] = *c;
        }
    }
    let mut blocks = pa.blocks;
    blocks.extend(pb.blocks);
    let mut tags = pa.tags;
    tags.extend(pb.tags);
    Ok(Parts {
        kind,
        k,
        l,
        blocks,
        tags,
        colors,
    }
    .into_diagram())
}

/// Union-find over blocks with a parity bit relative to the parent.
struct ParityForest {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl ParityForest {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            parity: vec![false; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, pp) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= pp;
        (root, self.parity[x])
    }

    /// Records `x ⊕ y = parity`; false on contradiction.
    fn union(&mut self, x: usize, y: usize, parity: bool) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == parity;
        }
        self.parent[ry] = rx;
        self.parity[ry] = px ^ py ^ parity;
        true
    }
}

/// Vertical concatenation: `upper` is `k→m`, `lower` is `m→l`; the result is `k→l`.
pub fn compose(upper: &Diagram, lower: &Diagram) -> Result<ComposeResult> {
    let kind = same_kind(upper, lower)?;
    if upper.l() != lower.k() {
        return Err(Error::ShapeMismatch(format!(
            "upper has {} lower points, lower has {} upper points",
            upper.l(),
            lower.k()
        )));
    }
    let (k, m, l) = (upper.k(), upper.l(), lower.l());
    let u = upper.to_parts();
    let w = lower.to_parts();
    let nu = u.blocks.len();
    let nb = nu + w.blocks.len();
    let block_u = block_index(&u);
    let block_w = block_index(&w);
    let mut forest = ParityForest::new(nb);
    let mut tags: Vec<BlockTag> = u.tags.iter().chain(&w.tags).copied().collect();
    for j in 1..=m {
        let a = block_u[k + j - 1];
        let b = nu + block_w[j - 1];
        if tags[a] != tags[b] {
            return Ok(ComposeResult::Zero);
        }
        let parity = Parts::bulleted(kind, tags[a]) && u.colors[k + j - 1] != w.colors[j - 1];
        if !forest.union(a, b, parity) {
            return Ok(ComposeResult::Zero);
        }
    }
    // external points: upper row of `upper`, lower row of `lower`
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut colors = vec![Color::Black; k + l];
    let mut place = |forest: &mut ParityForest, block: usize, pt: usize, c: Color| {
        let (root, par) = forest.find(block);
        groups.entry(root).or_default().push(pt);
        colors[pt - 1] = c.flipped_if(par);
    };
    for i in 1..=k {
        place(&mut forest, block_u[i - 1], i, u.colors[i - 1]);
    }
    for j in 1..=l {
        place(&mut forest, nu + block_w[m + j - 1], k + j, w.colors[m + j - 1]);
    }
    let mut first_loops = 0;
    let mut second_loops = 0;
    let mut roots_seen = HashSet::new();
    for b in 0..nb {
        let (root, _) = forest.find(b);
        if roots_seen.insert(root) && !groups.contains_key(&root) {
            match tags[root] {
                BlockTag::First => first_loops += 1,
                BlockTag::Second => second_loops += 1,
            }
        }
    }
    let mut blocks = Vec::with_capacity(groups.len());
    let mut out_tags = Vec::with_capacity(groups.len());
    for (root, pts) in groups {
        blocks.push(pts);
        out_tags.push(tags[root]);
    }
    tags.clear();
    let diagram = Parts {
        kind,
        k,
        l,
        blocks,
        tags: out_tags,
        colors,
    }
    .into_diagram();
    Ok(ComposeResult::NonZero(Composite {
        diagram,
        first_loops,
        second_loops,
    }))
}

fn block_index(parts: &Parts) -> Vec<usize> {
    let mut idx = vec![0; parts.k + parts.l];
    for (bi, b) in parts.blocks.iter().enumerate() {
        for &pt in b {
            idx[pt - 1] = bi;
        }
    }
    idx
}

/// Turns the diagram upside down.
pub fn involute(d: &Diagram) -> Diagram {
    let (k, l) = (d.k(), d.l());
    relabel(&d.to_parts(), l, k, |x| if x <= k { l + x } else { x - k }).into_diagram()
}

fn flip_point(parts: &mut Parts, point: usize) {
    let block = parts
        .blocks
        .iter()
        .position(|b| b.contains(&point))
        .expect("every point lies in a block");
    if Parts::bulleted(parts.kind, parts.tags[block]) {
        parts.colors[point - 1] = parts.colors[point - 1].flip();
    }
}

/// Moves the leftmost upper point to the leftmost lower position,
/// flipping its bullet.
pub fn rotate(d: &Diagram) -> Result<Diagram> {
    let (k, l) = (d.k(), d.l());
    if k == 0 {
        return Err(Error::NothingToRotate);
    }
    let mut parts = relabel(&d.to_parts(), k - 1, l + 1, |x| match x {
        1 => k,
        x if x <= k => x - 1,
        x => x,
    });
    flip_point(&mut parts, k);
    Ok(parts.into_diagram())
}

/// Moves the rightmost lower point to the rightmost upper position,
/// flipping its bullet.
pub fn rotate_right(d: &Diagram) -> Result<Diagram> {
    let (k, l) = (d.k(), d.l());
    if l == 0 {
        return Err(Error::NothingToRotate);
    }
    let mut parts = relabel(&d.to_parts(), k + 1, l - 1, |x| match x {
        x if x == k + l => k + 1,
        x if x <= k => x,
        x => x + 1,
    });
    flip_point(&mut parts, k + 1);
    Ok(parts.into_diagram())
}

/// One step of the cyclic rotation that keeps the shape `(k, l)`;
/// `k + l` steps give back the original diagram.
pub fn cycle(d: &Diagram) -> Result<Diagram> {
    rotate_right(&rotate(d)?)
}

/// Members of the closure, grouped by `(k, l)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiagramSet {
    by_shape: BTreeMap<(usize, usize), HashSet<Diagram>>,
}

impl DiagramSet {
    pub fn insert(&mut self, d: Diagram) -> bool {
        self.by_shape.entry((d.k(), d.l())).or_default().insert(d)
    }

    pub fn contains(&self, d: &Diagram) -> bool {
        self.by_shape
            .get(&(d.k(), d.l()))
            .is_some_and(|s| s.contains(d))
    }

    pub fn len(&self) -> usize {
        self.by_shape.values().map(HashSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members of shape `(k, l)`, sorted.
    pub fn shape(&self, k: usize, l: usize) -> Vec<Diagram> {
        let mut v: Vec<Diagram> = self
            .by_shape
            .get(&(k, l))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default();
        v.sort_unstable();
        v
    }

    /// All members, sorted by shape and then canonical encoding.
    pub fn sorted(&self) -> Vec<Diagram> {
        self.by_shape
            .keys()
            .flat_map(|&(k, l)| self.shape(k, l))
            .collect()
    }

    fn with_upper(&self, k: usize) -> impl Iterator<Item = &Diagram> {
        self.by_shape
            .iter()
            .filter(move |((kk, _), _)| *kk == k)
            .flat_map(|(_, s)| s.iter())
    }

    fn with_lower(&self, l: usize) -> impl Iterator<Item = &Diagram> {
        self.by_shape
            .iter()
            .filter(move |((_, ll), _)| *ll == l)
            .flat_map(|(_, s)| s.iter())
    }

    fn iter(&self) -> impl Iterator<Item = &Diagram> {
        self.by_shape.values().flat_map(|s| s.iter())
    }
}

/// Least set containing the generators and the identity string that is
/// closed under tensor, compose, involute and rotate, truncated to
/// `max_points` points.
pub fn closure(generators: &[Diagram], max_points: usize) -> Result<DiagramSet> {
    check_limit("points", max_points, MAX_CLOSURE_POINTS)?;
    let kind = match generators.first() {
        Some(g) => g.kind(),
        None => Kind::Plain,
    };
    for g in generators {
        same_kind(&generators[0], g)?;
    }
    let mut all = DiagramSet::default();
    let mut frontier = Vec::new();
    let seeds = std::iter::once(Diagram::identity(kind, 1)).chain(generators.iter().cloned());
    for g in seeds {
        if g.points() <= max_points && all.insert(g.clone()) {
            frontier.push(g);
        }
    }
    while !frontier.is_empty() {
        let mut found = Vec::new();
        {
            let mut offer = |d: Diagram| {
                if d.points() <= max_points && !all.contains(&d) {
                    found.push(d);
                }
            };
            for x in &frontier {
                offer(involute(x));
                if x.k() > 0 {
                    offer(rotate(x)?);
                }
                for y in all.iter() {
                    if x.points() + y.points() <= max_points {
                        offer(tensor(x, y)?);
                        offer(tensor(y, x)?);
                    }
                }
                for y in all.with_upper(x.l()) {
                    if let Some(c) = compose(x, y)?.into_composite() {
                        offer(c.diagram);
                    }
                }
                for y in all.with_lower(x.k()) {
                    if let Some(c) = compose(y, x)?.into_composite() {
                        offer(c.diagram);
                    }
                }
            }
        }
        frontier.clear();
        for d in found {
            if all.insert(d.clone()) {
                frontier.push(d);
            }
        }
    }
    Ok(all)
}

/// A category or an intersection of categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CategoryExpr {
    Cat(CategoryId),
    Intersect(Vec<CategoryId>),
}

impl CategoryExpr {
    fn members(&self, k: usize, l: usize) -> Result<HashSet<Diagram>> {
        let cats = match self {
            CategoryExpr::Cat(c) => std::slice::from_ref(c),
            CategoryExpr::Intersect(cs) => cs.as_slice(),
        };
        let (first, rest) = cats
            .split_first()
            .ok_or_else(|| Error::InvalidParameters("empty intersection".into()))?;
        let mut set: HashSet<Diagram> = enumerate(first, k, l)?.into_iter().collect();
        for c in rest {
            let other: HashSet<Diagram> = enumerate(c, k, l)?.into_iter().collect();
            set.retain(|d| other.contains(d));
        }
        Ok(set)
    }
}

impl fmt::Display for CategoryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryExpr::Cat(c) => c.fmt(f),
            CategoryExpr::Intersect(cs) => {
                let names: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                f.write_str(&names.join("&"))
            }
        }
    }
}

impl FromStr for CategoryExpr {
    type Err = Error;

    /// `A` or `A&B&...`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['&', '∩']).map(str::trim).collect();
        if parts.len() == 1 {
            return Ok(CategoryExpr::Cat(parts[0].parse()?));
        }
        Ok(CategoryExpr::Intersect(
            parts.iter().map(|p| p.parse()).collect::<Result<_>>()?,
        ))
    }
}

impl From<CategoryId> for CategoryExpr {
    fn from(c: CategoryId) -> Self {
        CategoryExpr::Cat(c)
    }
}

/// Which side of a comparison holds a diagram the other lacks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    OnlyInFirst(Diagram),
    OnlyInSecond(Diagram),
}

impl Counterexample {
    pub fn diagram(&self) -> &Diagram {
        match self {
            Counterexample::OnlyInFirst(d) | Counterexample::OnlyInSecond(d) => d,
        }
    }
}

/// Compares member sets for every `(k, l)` with `k + l ≤ max_points`, by
/// increasing size; returns the first difference found.
pub fn category_equal(
    a: &CategoryExpr,
    b: &CategoryExpr,
    max_points: usize,
) -> Result<Option<Counterexample>> {
    check_limit("points", max_points, MAX_EQUAL_POINTS)?;
    for n in 0..=max_points {
        for k in 0..=n {
            let sa = a.members(k, n - k)?;
            let sb = b.members(k, n - k)?;
            if let Some(d) = sa.difference(&sb).min() {
                return Ok(Some(Counterexample::OnlyInFirst(d.clone())));
            }
            if let Some(d) = sb.difference(&sa).min() {
                return Ok(Some(Counterexample::OnlyInSecond(d.clone())));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{BulletedPartition, Partition};
    use proptest::prelude::*;

    fn plain(k: usize, l: usize, blocks: &[&[usize]]) -> Diagram {
        Diagram::Plain(Partition::new(k, l, blocks.iter().map(|b| b.to_vec()).collect()).unwrap())
    }

    fn bulleted(k: usize, l: usize, blocks: &[&[usize]], colors: &[Color]) -> Diagram {
        let base = Partition::new(k, l, blocks.iter().map(|b| b.to_vec()).collect()).unwrap();
        Diagram::Bulleted(BulletedPartition::new(base, colors.to_vec()).unwrap())
    }

    fn members_upto(cat: &CategoryId, max: usize) -> Vec<Diagram> {
        let mut v = Vec::new();
        for n in 0..=max {
            for k in 0..=n {
                v.extend(enumerate(cat, k, n - k).unwrap());
            }
        }
        v
    }

    #[test]
    fn tensor_examples() {
        let cap: Diagram = Partition::cap().into();
        assert_eq!(tensor(&cap, &cap).unwrap(), plain(0, 4, &[&[1, 2], &[3, 4]]));
        let id1 = Diagram::identity(Kind::Plain, 1);
        assert_eq!(tensor(&id1, &id1).unwrap(), Diagram::identity(Kind::Plain, 2));
        let a = plain(1, 1, &[&[1], &[2]]);
        let b = plain(1, 2, &[&[1, 3], &[2]]);
        // a: upper 1, lower 3; b: upper 2, lower 4,5
        assert_eq!(tensor(&a, &b).unwrap(), plain(2, 3, &[&[1], &[3], &[2, 5], &[4]]));
        let bp = Diagram::identity(Kind::Bulleted, 1);
        assert!(matches!(tensor(&a, &bp), Err(Error::KindMismatch(..))));
    }

    #[test]
    fn compose_examples() {
        let cup: Diagram = Partition::cup().into();
        let cap: Diagram = Partition::cap().into();
        let r = compose(&cap, &cup).unwrap().into_composite().unwrap();
        assert_eq!(r.diagram, Diagram::Plain(Partition::empty()));
        assert_eq!(r.loops(), 1);
        // cup over cap gives the 2→2 diagram {1,2},{3,4} with no loop
        let r = compose(&cup, &cap).unwrap().into_composite().unwrap();
        assert_eq!(r.diagram, plain(2, 2, &[&[1, 2], &[3, 4]]));
        assert_eq!(r.loops(), 0);

        let pi = plain(2, 3, &[&[1, 3], &[2, 5], &[4]]);
        let r = compose(&Diagram::identity(Kind::Plain, 2), &pi).unwrap();
        assert_eq!(r.diagram(), Some(&pi));
        assert_eq!(r.loops(), Some(0));

        assert!(matches!(compose(&cap, &cap), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn bulleted_compose_zero() {
        use Color::*;
        let cap_bw = bulleted(0, 2, &[&[1, 2]], &[Black, White]);
        let cup_bb = bulleted(2, 0, &[&[1, 2]], &[Black, Black]);
        assert!(compose(&cap_bw, &cup_bb).unwrap().is_zero());
        let cup_bw = bulleted(2, 0, &[&[1, 2]], &[Black, White]);
        let r = compose(&cap_bw, &cup_bw).unwrap();
        assert_eq!(r.loops(), Some(1));
    }

    #[test]
    fn involute_and_rotate_examples() {
        use Color::*;
        let cap: Diagram = Partition::cap().into();
        let cup: Diagram = Partition::cup().into();
        assert_eq!(involute(&cap), cup);
        let id = Diagram::identity(Kind::Plain, 2);
        assert_eq!(involute(&id), id);
        assert_eq!(rotate(&Diagram::identity(Kind::Plain, 1)).unwrap(), cap);
        assert_eq!(
            rotate(&Diagram::identity(Kind::Bulleted, 1)).unwrap(),
            bulleted(0, 2, &[&[1, 2]], &[Black, White])
        );
        assert!(matches!(rotate(&cap), Err(Error::NothingToRotate)));
    }

    #[test]
    fn full_cycle_restores() {
        for cat in [CategoryId::P, CategoryId::Pbullet] {
            for k in 1..=3 {
                for d in enumerate(&cat, k, k).unwrap() {
                    let mut x = d.clone();
                    for _ in 0..2 * k {
                        x = cycle(&x).unwrap();
                    }
                    assert_eq!(x, d);
                }
            }
        }
    }

    #[test]
    fn categories_closed_under_operations() {
        let cats = [
            CategoryId::P,
            CategoryId::NC,
            CategoryId::NC2,
            CategoryId::P12,
            CategoryId::NC12,
            CategoryId::Peven,
            CategoryId::NCeven,
            CategoryId::NCbullet,
            CategoryId::NCbulletEven,
            CategoryId::product(CategoryId::NCbullet, CategoryId::NC).unwrap(),
            CategoryId::product(CategoryId::NCeven, CategoryId::NCeven).unwrap(),
        ];
        for cat in &cats {
            let all = members_upto(cat, 4);
            for x in &all {
                assert!(cat.contains(&involute(x)), "{cat} involute {x}");
                if x.k() > 0 {
                    assert!(cat.contains(&rotate(x).unwrap()), "{cat} rotate {x}");
                }
                for y in &all {
                    if x.points() + y.points() <= 6 {
                        assert!(cat.contains(&tensor(x, y).unwrap()), "{cat} {x}⊗{y}");
                    }
                    if x.l() == y.k() && x.points() + y.points() <= 8 {
                        if let Some(d) = compose(x, y).unwrap().diagram() {
                            assert!(cat.contains(d), "{cat} {x}∘{y}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn compose_is_associative_with_additive_loops() {
        for cat in [CategoryId::NC, CategoryId::NCbullet, CategoryId::P12] {
            let by_shape = |k, l| enumerate(&cat, k, l).unwrap();
            for (k, m, r, l) in [(1, 1, 1, 1), (0, 2, 2, 0), (2, 1, 1, 2), (1, 2, 1, 2)] {
                for a in by_shape(k, m) {
                    for b in by_shape(m, r) {
                        for c in by_shape(r, l) {
                            let left = compose(&a, &b).unwrap().into_composite().and_then(|ab| {
                                compose(&ab.diagram, &c)
                                    .unwrap()
                                    .into_composite()
                                    .map(|x| (x.diagram.clone(), x.loops() + ab.loops()))
                            });
                            let right = compose(&b, &c).unwrap().into_composite().and_then(|bc| {
                                compose(&a, &bc.diagram)
                                    .unwrap()
                                    .into_composite()
                                    .map(|x| (x.diagram.clone(), x.loops() + bc.loops()))
                            });
                            assert_eq!(left, right, "{a} {b} {c}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn involute_reverses_composition() {
        for cat in [CategoryId::P, CategoryId::Pbullet] {
            for (k, m, l) in [(1, 2, 1), (2, 2, 0), (0, 3, 1)] {
                for a in enumerate(&cat, k, m).unwrap() {
                    for b in enumerate(&cat, m, l).unwrap() {
                        let ab = compose(&a, &b).unwrap();
                        let ba = compose(&involute(&b), &involute(&a)).unwrap();
                        assert_eq!(ab.loops(), ba.loops());
                        assert_eq!(ab.diagram().map(involute), ba.diagram().cloned());
                    }
                }
            }
        }
    }

    #[test]
    fn closure_of_cap_is_pairings() {
        let gens = [Diagram::from(Partition::cap())];
        let got = closure(&gens, 4).unwrap();
        let want = members_upto(&CategoryId::NC2, 4);
        assert_eq!(got.len(), want.len());
        assert!(want.iter().all(|d| got.contains(d)));
    }

    #[test]
    fn closure_ignores_generator_order() {
        use Color::*;
        let a = bulleted(0, 2, &[&[1, 2]], &[Black, White]);
        let b = bulleted(1, 2, &[&[1, 2, 3]], &[Black, Black, White]);
        let x = closure(&[a.clone(), b.clone()], 4).unwrap();
        let y = closure(&[b, a], 4).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn category_equal_examples() {
        let nc2: CategoryExpr = "nc2".parse().unwrap();
        let meet: CategoryExpr = "nc12&nceven".parse().unwrap();
        assert_eq!(category_equal(&nc2, &meet, 6).unwrap(), None);

        let ce = category_equal(&CategoryId::NC.into(), &CategoryId::NCeven.into(), 3)
            .unwrap()
            .unwrap();
        assert_eq!(ce, Counterexample::OnlyInFirst(plain(0, 1, &[&[1]])));

        let ce = category_equal(&CategoryId::P.into(), &CategoryId::NC.into(), 4)
            .unwrap()
            .unwrap();
        assert_eq!(ce, Counterexample::OnlyInFirst(plain(0, 4, &[&[1, 3], &[2, 4]])));
    }

    fn arb_bulleted(max_points: usize) -> impl Strategy<Value = Diagram> {
        (0..=max_points)
            .prop_flat_map(|n| (Just(n), 0..=n))
            .prop_flat_map(|(n, k)| {
                let all = enumerate(&CategoryId::Pbullet, k, n - k).unwrap();
                proptest::sample::select(all)
            })
    }

    proptest! {
        #[test]
        fn involution_is_an_involution(d in arb_bulleted(6)) {
            prop_assert_eq!(involute(&involute(&d)), d);
        }

        #[test]
        fn involute_distributes_over_tensor(a in arb_bulleted(4), b in arb_bulleted(4)) {
            prop_assert_eq!(
                involute(&tensor(&a, &b).unwrap()),
                tensor(&involute(&a), &involute(&b)).unwrap()
            );
        }
    }
}
