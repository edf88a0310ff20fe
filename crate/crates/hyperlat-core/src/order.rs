//! Finite posets, their upward-closed subsets, and the Brouwer algebras these
//! form.
//!
//! Throughout, the algebra of upsets is ordered by *reverse* inclusion:
//! `U <= V` means `U ⊇ V`. The bottom `0` is the full node set (the easiest
//! element, "solved everywhere"), the top `1` is the empty set, join `⊕` is
//! intersection, meet `⊗` is union, and implication is residuation for join:
//! `x ⊕ y >= z` iff `y >= x → z`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::verdict::Verdict;

/// Default node cap for poset construction; upset counts grow exponentially.
pub const DEFAULT_NODE_CAP: usize = 12;

/// Node sets are `u32` bitmasks, so nothing can ever exceed 32 nodes.
pub const HARD_NODE_CAP: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("poset has {got} nodes, cap is {cap}")]
    TooManyNodes { got: usize, cap: usize },
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("antisymmetry violated: `{0}` and `{1}` lie on a cycle")]
    Cycle(String, String),
    #[error("node set {0:#b} is not upward closed")]
    NotAnUpset(u32),
    #[error("element index {0} out of range")]
    BadElement(usize),
    #[error("interval endpoints out of order: `{lo}` must lie below `{hi}`")]
    BadInterval { lo: String, hi: String },
}

/// A finite poset on named nodes, stored as upward cones: `up[i]` is the
/// bitmask of all `j` with `i <= j` (including `i` itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    names: Vec<String>,
    up: Vec<u32>,
}

impl FinitePoset {
    /// Builds a poset from a relation given by pairs `(a, b)` meaning
    /// `a <= b`. The reflexive-transitive closure is computed here; cycles
    /// (antisymmetry violations) are an error. Uses [`DEFAULT_NODE_CAP`].
    pub fn from_pairs<S: AsRef<str>>(names: &[S], pairs: &[(S, S)]) -> Result<Self, OrderError> {
        Self::from_pairs_capped(names, pairs, DEFAULT_NODE_CAP)
    }

    /// [`FinitePoset::from_pairs`] with an explicit node cap (hard limit 32).
    pub fn from_pairs_capped<S: AsRef<str>>(
        names: &[S],
        pairs: &[(S, S)],
        cap: usize,
    ) -> Result<Self, OrderError> {
        let cap = cap.min(HARD_NODE_CAP);
        if names.len() > cap {
            return Err(OrderError::TooManyNodes { got: names.len(), cap });
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(OrderError::DuplicateNode(name.clone()));
            }
        }
        let index = |name: &str| -> Result<usize, OrderError> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| OrderError::UnknownNode(name.to_string()))
        };
        let n = names.len();
        let mut up: Vec<u32> = (0..n).map(|i| 1 << i).collect();
        for (a, b) in pairs {
            let (i, j) = (index(a.as_ref())?, index(b.as_ref())?);
            up[i] |= 1 << j;
        }
        // Transitive closure, one node at a time.
        for k in 0..n {
            for i in 0..n {
                if up[i] & (1 << k) != 0 {
                    up[i] |= up[k];
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if up[i] & (1 << j) != 0 && up[j] & (1 << i) != 0 {
                    return Err(OrderError::Cycle(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(FinitePoset { names, up })
    }

    /// The discrete order on `n` nodes named `0`, `1`, ...
    pub fn antichain(n: usize) -> Self {
        FinitePoset {
            names: (0..n).map(|i| i.to_string()).collect(),
            up: (0..n).map(|i| 1 << i).collect(),
        }
    }

    /// The linear order `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let full: u32 = if n == 0 { 0 } else { (1u64 << n).wrapping_sub(1) as u32 };
        FinitePoset {
            names: (0..n).map(|i| i.to_string()).collect(),
            up: (0..n).map(|i| full & !((1 << i) - 1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `i <= j` in the order.
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.up[i] & (1 << j) != 0
    }

    /// Bitmask of everything above `i`, inclusive.
    pub fn up_mask(&self, i: usize) -> u32 {
        self.up[i]
    }

    /// Bitmask of everything below `i`, inclusive.
    pub fn down_mask(&self, i: usize) -> u32 {
        (0..self.len()).filter(|&j| self.le(j, i)).fold(0, |m, j| m | (1 << j))
    }

    pub fn full_mask(&self) -> u32 {
        if self.is_empty() {
            0
        } else {
            (1u64 << self.len()).wrapping_sub(1) as u32
        }
    }

    /// Is `mask` upward closed?
    pub fn is_upset(&self, mask: u32) -> bool {
        (0..self.len()).all(|i| mask & (1 << i) == 0 || self.up[i] & !mask == 0)
    }

    /// Downward closure of an arbitrary node set.
    pub fn down_closure(&self, mask: u32) -> u32 {
        (0..self.len())
            .filter(|&i| self.up[i] & mask != 0)
            .fold(0, |m, i| m | (1 << i))
    }

    /// Every upset, in ascending bitmask order. The empty set comes first and
    /// the full node set last.
    pub fn all_upsets(&self) -> Vec<Upset> {
        let n = self.len();
        (0..(1u64 << n))
            .map(|m| m as u32)
            .filter(|&m| self.is_upset(m))
            .map(|mask| Upset { mask })
            .collect()
    }

    /// All labeled posets on `n` nodes (named `0`, ..., `n-1`), grown node by
    /// node, in a fixed deterministic order. Counts for n = 0.. are
    /// 1, 1, 3, 19, 219, 4231, ...
    pub fn enumerate(n: usize) -> Vec<FinitePoset> {
        let mut current = vec![FinitePoset::antichain(0)];
        for k in 0..n {
            let mut next = Vec::new();
            for p in &current {
                // The new node `k` sits above `below` and below `above`.
                for below in 0u32..(1 << k) {
                    if !p.is_downset(below) {
                        continue;
                    }
                    for above in 0u32..(1 << k) {
                        if below & above != 0 || !p.is_upset(above) {
                            continue;
                        }
                        if !p.dominates(below, above) {
                            continue;
                        }
                        next.push(p.extend(below, above));
                    }
                }
            }
            current = next;
        }
        current
    }

    fn is_downset(&self, mask: u32) -> bool {
        (0..self.len()).all(|i| mask & (1 << i) == 0 || self.down_mask(i) & !mask == 0)
    }

    /// Does `i <= j` hold for every `i` in `below`, `j` in `above`?
    fn dominates(&self, below: u32, above: u32) -> bool {
        (0..self.len())
            .filter(|&i| below & (1 << i) != 0)
            .all(|i| self.up[i] & above == above)
    }

    fn extend(&self, below: u32, above: u32) -> FinitePoset {
        let k = self.len();
        let mut names = self.names.clone();
        names.push(k.to_string());
        let mut up: Vec<u32> = self
            .up
            .iter()
            .enumerate()
            .map(|(i, &m)| if below & (1 << i) != 0 { m | (1 << k) } else { m })
            .collect();
        up.push((1 << k) | above);
        FinitePoset { names, up }
    }
}

/// An upward-closed node set of some poset, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Upset {
    mask: u32,
}

impl Upset {
    pub fn new(poset: &FinitePoset, mask: u32) -> Result<Upset, OrderError> {
        if !poset.is_upset(mask) {
            return Err(OrderError::NotAnUpset(mask));
        }
        Ok(Upset { mask })
    }

    pub fn from_nodes<S: AsRef<str>>(poset: &FinitePoset, nodes: &[S]) -> Result<Upset, OrderError> {
        let mut mask = 0u32;
        for node in nodes {
            let i = poset
                .node_index(node.as_ref())
                .ok_or_else(|| OrderError::UnknownNode(node.as_ref().to_string()))?;
            mask |= 1 << i;
        }
        Upset::new(poset, mask)
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn contains(self, node: usize) -> bool {
        self.mask & (1 << node) != 0
    }

    pub fn node_names(self, poset: &FinitePoset) -> Vec<String> {
        (0..poset.len())
            .filter(|&i| self.contains(i))
            .map(|i| poset.name(i).to_string())
            .collect()
    }
}

fn set_label(poset: &FinitePoset, mask: u32) -> String {
    let mut out = String::from("{");
    let mut first = true;
    for i in 0..poset.len() {
        if mask & (1 << i) != 0 {
            if !first {
                out.push_str(", ");
            }
            let _ = write!(out, "{}", poset.name(i));
            first = false;
        }
    }
    out.push('}');
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Backing {
    /// Elements are the upsets of a poset; operations are bitmask work.
    Upsets { poset: FinitePoset, masks: Vec<u32> },
    /// Dense operation tables, `size * size`, row-major.
    Tables { join: Vec<usize>, meet: Vec<usize>, imp: Vec<usize>, le: Vec<bool> },
}

/// A finite Brouwer algebra: a bounded distributive lattice whose join `⊕`
/// has a residual `→`, characterized by `x ⊕ y >= z` iff `y >= x → z`.
///
/// `0` (bottom) is the easiest element and `1` (top) the hardest; for upset
/// algebras those are the full node set and the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrouwerAlgebra {
    size: usize,
    bottom: usize,
    top: usize,
    labels: Vec<String>,
    backing: Backing,
}

/// The algebra of all upsets of `poset` under reverse inclusion. Elements are
/// indexed in ascending bitmask order, so `top` (the empty set) is element 0
/// and `bottom` (the full set) is the last element.
pub fn upset_algebra(poset: &FinitePoset) -> BrouwerAlgebra {
    let upsets = poset.all_upsets();
    let masks: Vec<u32> = upsets.iter().map(|u| u.mask()).collect();
    let labels = masks.iter().map(|&m| set_label(poset, m)).collect();
    let bottom = masks.len() - 1;
    BrouwerAlgebra {
        size: masks.len(),
        bottom,
        top: 0,
        labels,
        backing: Backing::Upsets { poset: poset.clone(), masks },
    }
}

impl BrouwerAlgebra {
    /// Builds an algebra from explicit operation tables (`size * size`,
    /// row-major). Only shapes are validated here; whether the tables satisfy
    /// the laws is [`check_brouwer`]'s business.
    pub fn from_tables(
        labels: Vec<String>,
        join: Vec<usize>,
        meet: Vec<usize>,
        imp: Vec<usize>,
        le: Vec<bool>,
        bottom: usize,
        top: usize,
    ) -> Result<Self, OrderError> {
        let size = labels.len();
        for table_len in [join.len(), meet.len(), imp.len(), le.len()] {
            if table_len != size * size {
                return Err(OrderError::BadElement(table_len));
            }
        }
        if bottom >= size || top >= size {
            return Err(OrderError::BadElement(bottom.max(top)));
        }
        if let Some(&bad) = join.iter().chain(&meet).chain(&imp).find(|&&v| v >= size) {
            return Err(OrderError::BadElement(bad));
        }
        Ok(BrouwerAlgebra {
            size,
            bottom,
            top,
            labels,
            backing: Backing::Tables { join, meet, imp, le },
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    /// The poset this algebra was built from, if it is an upset algebra.
    pub fn poset(&self) -> Option<&FinitePoset> {
        match &self.backing {
            Backing::Upsets { poset, .. } => Some(poset),
            Backing::Tables { .. } => None,
        }
    }

    /// Element index of an upset bitmask, for upset algebras.
    pub fn element_of_mask(&self, mask: u32) -> Option<usize> {
        match &self.backing {
            Backing::Upsets { masks, .. } => masks.binary_search(&mask).ok(),
            Backing::Tables { .. } => None,
        }
    }

    /// Upset bitmask of an element, for upset algebras.
    pub fn mask_of(&self, x: usize) -> Option<u32> {
        match &self.backing {
            Backing::Upsets { masks, .. } => masks.get(x).copied(),
            Backing::Tables { .. } => None,
        }
    }

    pub fn le(&self, x: usize, y: usize) -> bool {
        match &self.backing {
            Backing::Upsets { masks, .. } => masks[x] & masks[y] == masks[y],
            Backing::Tables { le, .. } => le[x * self.size + y],
        }
    }

    /// Join `⊕`: least upper bound; intersection of upsets.
    pub fn join(&self, x: usize, y: usize) -> usize {
        match &self.backing {
            Backing::Upsets { masks, .. } => self.index_of(masks[x] & masks[y]),
            Backing::Tables { join, .. } => join[x * self.size + y],
        }
    }

    /// Meet `⊗`: greatest lower bound; union of upsets.
    pub fn meet(&self, x: usize, y: usize) -> usize {
        match &self.backing {
            Backing::Upsets { masks, .. } => self.index_of(masks[x] | masks[y]),
            Backing::Tables { meet, .. } => meet[x * self.size + y],
        }
    }

    /// Implication `x → z`: the least `y` with `x ⊕ y >= z`. On upsets this
    /// is computed by the closed formula
    /// `{w : every v >= w in x is also in z}`.
    pub fn imp(&self, x: usize, z: usize) -> usize {
        match &self.backing {
            Backing::Upsets { poset, masks } => {
                let bad = masks[x] & !masks[z];
                let mask = poset.full_mask() & !poset.down_closure(bad);
                self.index_of(mask)
            }
            Backing::Tables { imp, .. } => imp[x * self.size + z],
        }
    }

    fn index_of(&self, mask: u32) -> usize {
        match &self.backing {
            Backing::Upsets { masks, .. } => masks
                .binary_search(&mask)
                .unwrap_or_else(|_| panic!("mask {mask:#b} is not an upset of the poset")),
            Backing::Tables { .. } => unreachable!("index_of is an upset-backing helper"),
        }
    }

    /// Rebuilds this algebra with dense operation tables. Handy as a base for
    /// deliberate corruption in tests.
    pub fn materialize(&self) -> BrouwerAlgebra {
        let n = self.size;
        let mut join = vec![0; n * n];
        let mut meet = vec![0; n * n];
        let mut imp = vec![0; n * n];
        let mut le = vec![false; n * n];
        for x in 0..n {
            for y in 0..n {
                join[x * n + y] = self.join(x, y);
                meet[x * n + y] = self.meet(x, y);
                imp[x * n + y] = self.imp(x, y);
                le[x * n + y] = self.le(x, y);
            }
        }
        BrouwerAlgebra {
            size: n,
            bottom: self.bottom,
            top: self.top,
            labels: self.labels.clone(),
            backing: Backing::Tables { join, meet, imp, le },
        }
    }

    /// A copy with one implication entry overridden — a mutation control for
    /// [`check_brouwer`].
    pub fn with_imp_entry(&self, x: usize, z: usize, value: usize) -> BrouwerAlgebra {
        let mut copy = self.materialize();
        match &mut copy.backing {
            Backing::Tables { imp, .. } => imp[x * copy.size + z] = value,
            Backing::Upsets { .. } => unreachable!("materialize returns tables"),
        }
        copy
    }
}

/// An interval `[lo, hi]` of a Brouwer algebra, which is again a Brouwer
/// algebra: join and meet are inherited and implication is
/// `(u → v) ⊕ lo`.
#[derive(Debug, Clone)]
pub struct IntervalAlgebra {
    carrier: Vec<usize>,
    lo: usize,
    hi: usize,
    algebra: BrouwerAlgebra,
}

/// Carves the interval `[lo, hi]` (in algebra order: easiest to hardest) out
/// of `parent`.
pub fn interval_algebra(
    parent: &BrouwerAlgebra,
    lo: usize,
    hi: usize,
) -> Result<IntervalAlgebra, OrderError> {
    if lo >= parent.size() || hi >= parent.size() {
        return Err(OrderError::BadElement(lo.max(hi)));
    }
    if !parent.le(lo, hi) {
        return Err(OrderError::BadInterval {
            lo: parent.label(lo).to_string(),
            hi: parent.label(hi).to_string(),
        });
    }
    let carrier: Vec<usize> =
        (0..parent.size()).filter(|&x| parent.le(lo, x) && parent.le(x, hi)).collect();
    let local = |p: usize| carrier.binary_search(&p).expect("interval is closed under the ops");
    let n = carrier.len();
    let mut join = vec![0; n * n];
    let mut meet = vec![0; n * n];
    let mut imp = vec![0; n * n];
    let mut le = vec![false; n * n];
    for (i, &x) in carrier.iter().enumerate() {
        for (j, &y) in carrier.iter().enumerate() {
            join[i * n + j] = local(parent.join(x, y));
            meet[i * n + j] = local(parent.meet(x, y));
            imp[i * n + j] = local(parent.join(parent.imp(x, y), lo));
            le[i * n + j] = parent.le(x, y);
        }
    }
    let labels = carrier.iter().map(|&x| parent.label(x).to_string()).collect();
    let algebra = BrouwerAlgebra {
        size: n,
        bottom: local(lo),
        top: local(hi),
        labels,
        backing: Backing::Tables { join, meet, imp, le },
    };
    Ok(IntervalAlgebra { carrier, lo, hi, algebra })
}

impl IntervalAlgebra {
    pub fn as_algebra(&self) -> &BrouwerAlgebra {
        &self.algebra
    }

    /// Parent-algebra element behind local element `i`.
    pub fn parent_element(&self, i: usize) -> usize {
        self.carrier[i]
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }
}

/// Checks every Brouwer-algebra law on every tuple: bounds, lattice laws,
/// distributivity, consistency of `le` with join and meet, and residuation
/// (`x ⊕ y >= z` iff `y >= x → z`). Reports the first violating tuple.
pub fn check_brouwer(alg: &BrouwerAlgebra) -> Verdict {
    let alg = alg.materialize();
    let n = alg.size();
    let mut checks = 0u64;
    let wit1 = |x: usize| format!("x = {}", alg.label(x));
    let wit2 = |x: usize, y: usize| format!("x = {}, y = {}", alg.label(x), alg.label(y));

    for x in 0..n {
        checks += 4;
        if !alg.le(alg.bottom(), x) {
            return Verdict::fail(checks, "0 is least", wit1(x));
        }
        if !alg.le(x, alg.top()) {
            return Verdict::fail(checks, "1 is greatest", wit1(x));
        }
        if alg.join(x, x) != x || alg.meet(x, x) != x {
            return Verdict::fail(checks, "idempotence", wit1(x));
        }
        if alg.join(alg.bottom(), x) != x || alg.meet(alg.top(), x) != x {
            return Verdict::fail(checks, "neutral elements", wit1(x));
        }
    }
    for x in 0..n {
        for y in 0..n {
            checks += 5;
            if alg.join(x, y) != alg.join(y, x) {
                return Verdict::fail(checks, "join commutativity", wit2(x, y));
            }
            if alg.meet(x, y) != alg.meet(y, x) {
                return Verdict::fail(checks, "meet commutativity", wit2(x, y));
            }
            if alg.le(x, y) != (alg.join(x, y) == y) {
                return Verdict::fail(checks, "le agrees with join", wit2(x, y));
            }
            if alg.le(x, y) != (alg.meet(x, y) == x) {
                return Verdict::fail(checks, "le agrees with meet", wit2(x, y));
            }
            if alg.le(x, y) && alg.le(y, x) && x != y {
                return Verdict::fail(checks, "antisymmetry", wit2(x, y));
            }
            checks += 2;
            if alg.join(x, alg.meet(x, y)) != x || alg.meet(x, alg.join(x, y)) != x {
                return Verdict::fail(checks, "absorption", wit2(x, y));
            }
            // x ⊕ (x → z) >= z: the residual really is an upper-bound witness.
            if !alg.le(y, alg.join(x, alg.imp(x, y))) {
                return Verdict::fail(checks, "residual bounds", wit2(x, y));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let witness = || {
                    format!(
                        "x = {}, y = {}, z = {}",
                        alg.label(x),
                        alg.label(y),
                        alg.label(z)
                    )
                };
                checks += 5;
                if alg.join(alg.join(x, y), z) != alg.join(x, alg.join(y, z)) {
                    return Verdict::fail(checks, "join associativity", witness());
                }
                if alg.meet(alg.meet(x, y), z) != alg.meet(x, alg.meet(y, z)) {
                    return Verdict::fail(checks, "meet associativity", witness());
                }
                if alg.meet(x, alg.join(y, z)) != alg.join(alg.meet(x, y), alg.meet(x, z)) {
                    return Verdict::fail(checks, "meet distributes over join", witness());
                }
                if alg.join(x, alg.meet(y, z)) != alg.meet(alg.join(x, y), alg.join(x, z)) {
                    return Verdict::fail(checks, "join distributes over meet", witness());
                }
                // Residuation: x ⊕ y >= z iff y >= x → z.
                if alg.le(z, alg.join(x, y)) != alg.le(alg.imp(x, z), y) {
                    return Verdict::fail(checks, "residuation", witness());
                }
            }
        }
    }
    Verdict::pass(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_chain() -> FinitePoset {
        FinitePoset::from_pairs(&["0", "a"], &[("0", "a")]).unwrap()
    }

    #[test]
    fn closure_is_computed_and_cycles_rejected() {
        let p = FinitePoset::from_pairs(&["x", "y", "z"], &[("x", "y"), ("y", "z")]).unwrap();
        assert!(p.le(0, 2), "transitive closure should give x <= z");
        let err = FinitePoset::from_pairs(&["x", "y"], &[("x", "y"), ("y", "x")]).unwrap_err();
        assert_eq!(err, OrderError::Cycle("x".into(), "y".into()));
    }

    #[test]
    fn node_cap_is_enforced() {
        let names: Vec<String> = (0..13).map(|i| i.to_string()).collect();
        let err = FinitePoset::from_pairs(&names, &[]).unwrap_err();
        assert_eq!(err, OrderError::TooManyNodes { got: 13, cap: 12 });
    }

    #[test]
    fn upsets_of_the_two_chain() {
        let p = two_chain();
        let upsets = p.all_upsets();
        let as_names: Vec<Vec<String>> = upsets.iter().map(|u| u.node_names(&p)).collect();
        assert_eq!(
            as_names,
            vec![vec![], vec!["a".to_string()], vec!["0".to_string(), "a".to_string()]]
        );
    }

    #[test]
    fn upset_counts_for_chains_and_antichains() {
        for n in 0..=6 {
            assert_eq!(FinitePoset::chain(n).all_upsets().len(), n + 1);
            assert_eq!(FinitePoset::antichain(n).all_upsets().len(), 1 << n);
        }
    }

    #[test]
    fn non_upsets_are_rejected() {
        let p = two_chain();
        assert!(Upset::new(&p, 0b01).is_err()); // {0} without a above it
        assert!(Upset::new(&p, 0b10).is_ok());
    }

    #[test]
    fn labeled_poset_counts() {
        let expected = [1usize, 1, 3, 19, 219];
        for (n, want) in expected.iter().enumerate() {
            assert_eq!(FinitePoset::enumerate(n).len(), *want, "n = {n}");
        }
    }

    #[test]
    fn five_node_count_matches_the_literature() {
        assert_eq!(FinitePoset::enumerate(5).len(), 4231);
    }

    #[test]
    fn implication_on_the_two_chain() {
        let p = two_chain();
        let alg = upset_algebra(&p);
        let full = alg.element_of_mask(p.full_mask()).unwrap();
        let just_a = alg.element_of_mask(0b10).unwrap();
        assert_eq!(alg.bottom(), full);
        assert_eq!(alg.imp(full, just_a), just_a);
        assert_eq!(alg.label(alg.imp(full, just_a)), "{a}");
    }

    /// Independent oracle: implication must be the least `y` with
    /// `x ⊕ y >= z`, found by brute-force search over all elements.
    fn residuation_search(alg: &BrouwerAlgebra, x: usize, z: usize) -> usize {
        let candidates: Vec<usize> =
            (0..alg.size()).filter(|&y| alg.le(z, alg.join(x, y))).collect();
        candidates
            .iter()
            .copied()
            .find(|&y| candidates.iter().all(|&other| alg.le(y, other)))
            .expect("the set of residual candidates has a least element")
    }

    #[test]
    fn implication_matches_residuation_search() {
        for poset in FinitePoset::enumerate(3) {
            let alg = upset_algebra(&poset);
            for x in 0..alg.size() {
                for z in 0..alg.size() {
                    let searched = residuation_search(&alg, x, z);
                    assert_eq!(
                        alg.imp(x, z),
                        searched,
                        "x = {}, z = {} in upsets of a 3-node poset",
                        alg.label(x),
                        alg.label(z)
                    );
                }
            }
        }
    }

    #[test]
    fn upset_algebras_pass_the_law_checker() {
        for n in 0..=4 {
            for poset in FinitePoset::enumerate(n) {
                let verdict = check_brouwer(&upset_algebra(&poset));
                assert!(verdict.passed, "n = {n}: {verdict}");
            }
        }
    }

    #[test]
    fn corrupted_implication_table_is_caught() {
        let alg = upset_algebra(&two_chain());
        // 1 → 1 = 0; override it with 1 and watch residuation break.
        let broken = alg.with_imp_entry(alg.top(), alg.top(), alg.top());
        assert_eq!(alg.imp(alg.top(), alg.top()), alg.bottom());
        let verdict = check_brouwer(&broken);
        assert!(!verdict.passed);
        let failure = verdict.failure.expect("failed verdicts carry a witness");
        assert!(failure.law.contains("residua"), "law was {}", failure.law);
    }

    #[test]
    fn interval_of_the_two_chain() {
        let p = two_chain();
        let alg = upset_algebra(&p);
        let lo = alg.element_of_mask(0b10).unwrap(); // {a}
        let hi = alg.top(); // {}
        let interval = interval_algebra(&alg, lo, hi).unwrap();
        let sub = interval.as_algebra();
        assert_eq!(sub.size(), 2);
        // {a} → {} in the interval: ({a} → {}) ⊕ {a} = {} ⊕ {a} = {}.
        let l = sub.bottom();
        let h = sub.top();
        assert_eq!(sub.imp(l, h), h);
        assert_eq!(interval.parent_element(sub.imp(l, h)), alg.top());
        assert!(check_brouwer(sub).passed);
    }

    #[test]
    fn interval_endpoints_must_be_ordered() {
        let alg = upset_algebra(&two_chain());
        let err = interval_algebra(&alg, alg.top(), alg.bottom()).unwrap_err();
        assert!(matches!(err, OrderError::BadInterval { .. }));
    }

    #[test]
    fn intervals_of_small_upset_algebras_are_brouwer() {
        for poset in FinitePoset::enumerate(3) {
            let alg = upset_algebra(&poset);
            for lo in 0..alg.size() {
                for hi in 0..alg.size() {
                    if !alg.le(lo, hi) {
                        continue;
                    }
                    let interval = interval_algebra(&alg, lo, hi).unwrap();
                    let verdict = check_brouwer(interval.as_algebra());
                    assert!(verdict.passed, "[{}, {}]: {verdict}", alg.label(lo), alg.label(hi));
                }
            }
        }
    }
}
