//! Predicates valued in a finite Brouwer algebra, indexed by powers of a
//! finite universe, together with the first-order interpretation built on
//! them.
//!
//! Two modes share all the code paths:
//!
//! * **plain** — every fiber is the whole algebra; quantifiers are pointwise
//!   join (`forall`) and meet (`exists`) over the last coordinate, equality is
//!   `0` on the diagonal and `1` off it.
//! * **interval** — an [`IntervalSpec`] relativizes each fiber to
//!   `[bottom(t), top]`, where `bottom(t)` joins a base element with one
//!   element per tuple entry. Pullback joins the target fiber bottom onto
//!   every value, `forall` guards each coordinate with an implication from
//!   that coordinate's element, implication joins the fiber bottom, and
//!   equality returns the fiber bottom on the diagonal and the fiber top off
//!   it.
//!
//! Truth of a closed formula means: its interpretation in the empty context
//! is the fiber bottom (`0` plain, the base element in interval mode).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::order::BrouwerAlgebra;
use crate::syntax::{check_context, Formula, Signature, SyntaxError, Term};
use crate::verdict::Verdict;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperError {
    #[error("the universe must be nonempty")]
    EmptyUniverse,
    #[error("interval family is invalid: {0}")]
    BadIntervalSpec(String),
    #[error("function table for `{name}` is invalid: {detail}")]
    BadFunctionTable { name: String, detail: String },
    #[error("relation table for `{name}` is invalid: {detail}")]
    BadRelationTable { name: String, detail: String },
    #[error("function `{name}` breaks the fiber-bottom condition at {tuple}")]
    MorphismCondition { name: String, tuple: String },
    #[error("relation `{name}` leaves its fiber at {tuple}")]
    OutsideFiber { name: String, tuple: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Number of `n`-tuples over a universe of size `m`.
pub fn tuple_count(universe: usize, arity: usize) -> usize {
    universe.pow(arity as u32)
}

/// Index of a tuple in lexicographic order, first coordinate most
/// significant.
pub fn tuple_index(universe: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &t| {
        debug_assert!(t < universe);
        acc * universe + t
    })
}

/// Inverse of [`tuple_index`].
pub fn decode_tuple(universe: usize, arity: usize, mut index: usize) -> Vec<usize> {
    let mut tuple = vec![0; arity];
    for slot in tuple.iter_mut().rev() {
        *slot = index % universe;
        index /= universe;
    }
    tuple
}

/// A table `M^arity -> B`, stored densely in tuple order. Values are element
/// indices of some Brouwer algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    universe: usize,
    arity: usize,
    values: Vec<usize>,
}

impl Predicate {
    pub fn new(universe: usize, arity: usize, values: Vec<usize>) -> Self {
        assert_eq!(values.len(), tuple_count(universe, arity), "dense table expected");
        Predicate { universe, arity, values }
    }

    pub fn constant(universe: usize, arity: usize, value: usize) -> Self {
        Predicate { universe, arity, values: vec![value; tuple_count(universe, arity)] }
    }

    pub fn from_fn(universe: usize, arity: usize, mut f: impl FnMut(&[usize]) -> usize) -> Self {
        let values = (0..tuple_count(universe, arity))
            .map(|i| f(&decode_tuple(universe, arity, i)))
            .collect();
        Predicate { universe, arity, values }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, tuple: &[usize]) -> usize {
        self.values[tuple_index(self.universe, tuple)]
    }
}

/// A map `M^src_arity -> M^dst_arity`, stored as the destination tuple index
/// for each source tuple index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleMap {
    universe: usize,
    src_arity: usize,
    dst_arity: usize,
    table: Vec<usize>,
}

impl TupleMap {
    pub fn from_fn(
        universe: usize,
        src_arity: usize,
        dst_arity: usize,
        mut f: impl FnMut(&[usize]) -> Vec<usize>,
    ) -> Self {
        let table = (0..tuple_count(universe, src_arity))
            .map(|i| {
                let out = f(&decode_tuple(universe, src_arity, i));
                assert_eq!(out.len(), dst_arity);
                tuple_index(universe, &out)
            })
            .collect();
        TupleMap { universe, src_arity, dst_arity, table }
    }

    /// `M^(n+1) -> M^n`, dropping the last coordinate.
    pub fn projection(universe: usize, n: usize) -> Self {
        TupleMap::from_fn(universe, n + 1, n, |t| t[..n].to_vec())
    }

    /// `M -> M^2`, `a` to `(a, a)`.
    pub fn diagonal(universe: usize) -> Self {
        TupleMap::from_fn(universe, 1, 2, |t| vec![t[0], t[0]])
    }

    pub fn identity(universe: usize, n: usize) -> Self {
        TupleMap::from_fn(universe, n, n, |t| t.to_vec())
    }

    /// `M^n -> M^0`.
    pub fn collapse(universe: usize, n: usize) -> Self {
        TupleMap::from_fn(universe, n, 0, |_| Vec::new())
    }

    /// `s × id`: pairs this map with an untouched extra last coordinate.
    pub fn times_coordinate(&self) -> TupleMap {
        let m = self.universe;
        let table = (0..tuple_count(m, self.src_arity + 1))
            .map(|i| self.table[i / m] * m + (i % m))
            .collect();
        TupleMap {
            universe: m,
            src_arity: self.src_arity + 1,
            dst_arity: self.dst_arity + 1,
            table,
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn src_arity(&self) -> usize {
        self.src_arity
    }

    pub fn dst_arity(&self) -> usize {
        self.dst_arity
    }

    pub fn apply_index(&self, src_index: usize) -> usize {
        self.table[src_index]
    }
}

/// The data that relativizes fibers in interval mode: a hardest element
/// `top`, a base bottom for the empty tuple, and one element per universe
/// member. The fiber bottom at a tuple is `base ⊕ elem[t_1] ⊕ ... ⊕ elem[t_n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSpec {
    pub top: usize,
    pub base: usize,
    pub elem: Vec<usize>,
}

impl IntervalSpec {
    /// Checks the family against the algebra: `base <= elem[i] <= top`, with
    /// `top` strictly above every bottom (so no fiber collapses to a point
    /// from above).
    pub fn validate(&self, alg: &BrouwerAlgebra, universe: usize) -> Result<(), HyperError> {
        let bad = |msg: String| Err(HyperError::BadIntervalSpec(msg));
        if self.elem.len() != universe {
            return bad(format!("expected {} elements, got {}", universe, self.elem.len()));
        }
        for &x in self.elem.iter().chain([&self.top, &self.base]) {
            if x >= alg.size() {
                return bad(format!("element index {x} out of range"));
            }
        }
        if self.base == self.top || !alg.le(self.base, self.top) {
            return bad(format!(
                "base {} must lie strictly below top {}",
                alg.label(self.base),
                alg.label(self.top)
            ));
        }
        for (i, &b) in self.elem.iter().enumerate() {
            if !alg.le(self.base, b) || !alg.le(b, self.top) || b == self.top {
                return bad(format!(
                    "element {} for universe member {} must lie in [{}, {}) strictly",
                    alg.label(b),
                    i,
                    alg.label(self.base),
                    alg.label(self.top)
                ));
            }
        }
        Ok(())
    }

    pub fn bottom_at(&self, alg: &BrouwerAlgebra, tuple: &[usize]) -> usize {
        tuple.iter().fold(self.base, |acc, &t| alg.join(acc, self.elem[t]))
    }
}

/// An algebra together with an optional interval family: everything the
/// predicate operations need to know about fibers.
#[derive(Clone, Copy)]
pub struct Fiber<'a> {
    pub algebra: &'a BrouwerAlgebra,
    pub interval: Option<&'a IntervalSpec>,
}

impl<'a> Fiber<'a> {
    pub fn plain(algebra: &'a BrouwerAlgebra) -> Self {
        Fiber { algebra, interval: None }
    }

    pub fn bottom_at(&self, tuple: &[usize]) -> usize {
        match self.interval {
            None => self.algebra.bottom(),
            Some(spec) => spec.bottom_at(self.algebra, tuple),
        }
    }

    pub fn top(&self) -> usize {
        match self.interval {
            None => self.algebra.top(),
            Some(spec) => spec.top,
        }
    }

    /// Implication inside the fiber at `tuple`.
    pub fn imp_at(&self, tuple: &[usize], u: usize, v: usize) -> usize {
        let raw = self.algebra.imp(u, v);
        match self.interval {
            None => raw,
            Some(spec) => self.algebra.join(raw, spec.bottom_at(self.algebra, tuple)),
        }
    }

    /// Elements of the fiber at `tuple`, ascending.
    pub fn elements_at(&self, tuple: &[usize]) -> Vec<usize> {
        let bottom = self.bottom_at(tuple);
        let top = self.top();
        (0..self.algebra.size())
            .filter(|&x| self.algebra.le(bottom, x) && self.algebra.le(x, top))
            .collect()
    }
}

/// Reindexing along `map`: `result(t) = p(map(t))`, joined with the source
/// fiber bottom in interval mode.
pub fn pullback(fiber: Fiber<'_>, map: &TupleMap, p: &Predicate) -> Predicate {
    assert_eq!(map.dst_arity(), p.arity());
    assert_eq!(map.universe(), p.universe());
    let m = map.universe();
    let n = map.src_arity();
    let values = (0..tuple_count(m, n))
        .map(|i| {
            let v = p.values()[map.apply_index(i)];
            match fiber.interval {
                None => v,
                Some(_) => fiber.algebra.join(v, fiber.bottom_at(&decode_tuple(m, n, i))),
            }
        })
        .collect();
    Predicate::new(m, n, values)
}

/// Universal quantification along the last coordinate. Plain mode: pointwise
/// join. Interval mode: join of `elem[x] → p(γ, x)` over `x`, joined with the
/// fiber bottom of `γ`.
pub fn forall_along(fiber: Fiber<'_>, p: &Predicate) -> Predicate {
    forall_along_with(fiber, p, ForallRule::Residuated)
}

/// Existential quantification along the last coordinate: pointwise meet in
/// both modes.
pub fn exists_along(fiber: Fiber<'_>, p: &Predicate) -> Predicate {
    assert!(p.arity() > 0, "nothing to quantify");
    let m = p.universe();
    let n = p.arity() - 1;
    let alg = fiber.algebra;
    let values = (0..tuple_count(m, n))
        .map(|g| (0..m).map(|x| p.values()[g * m + x]).reduce(|a, b| alg.meet(a, b)).unwrap())
        .collect();
    Predicate::new(m, n, values)
}

/// How [`forall_along_with`] treats the interval guard. `Unguarded` skips the
/// `elem[x] →` step; it is deliberately wrong and exists as a mutation
/// control for the checkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForallRule {
    Residuated,
    Unguarded,
}

pub fn forall_along_with(fiber: Fiber<'_>, p: &Predicate, rule: ForallRule) -> Predicate {
    assert!(p.arity() > 0, "nothing to quantify");
    let m = p.universe();
    let n = p.arity() - 1;
    let alg = fiber.algebra;
    let values = (0..tuple_count(m, n))
        .map(|g| {
            let joined = (0..m)
                .map(|x| {
                    let v = p.values()[g * m + x];
                    match (fiber.interval, rule) {
                        (Some(spec), ForallRule::Residuated) => alg.imp(spec.elem[x], v),
                        _ => v,
                    }
                })
                .reduce(|a, b| alg.join(a, b))
                .unwrap();
            match fiber.interval {
                None => joined,
                Some(_) => alg.join(joined, fiber.bottom_at(&decode_tuple(m, n, g))),
            }
        })
        .collect();
    Predicate::new(m, n, values)
}

/// The equality predicate over `M^2`: fiber bottom on the diagonal, fiber top
/// off it.
pub fn equality_predicate(fiber: Fiber<'_>, universe: usize) -> Predicate {
    Predicate::from_fn(universe, 2, |t| {
        if t[0] == t[1] {
            fiber.bottom_at(t)
        } else {
            fiber.top()
        }
    })
}

/// A dense function table `M^arity -> M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    arity: usize,
    values: Vec<usize>,
}

impl FunctionTable {
    pub fn new(universe: usize, arity: usize, values: Vec<usize>) -> Result<Self, String> {
        if values.len() != tuple_count(universe, arity) {
            return Err(format!(
                "expected {} entries, got {}",
                tuple_count(universe, arity),
                values.len()
            ));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= universe) {
            return Err(format!("value {bad} outside the universe"));
        }
        Ok(FunctionTable { arity, values })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply_index(&self, index: usize) -> usize {
        self.values[index]
    }
}

/// A first-order structure: a universe `{0, .., m-1}`, an ambient algebra,
/// optionally an interval family, function tables, and one predicate per
/// relation symbol. Everything is validated on construction.
#[derive(Debug, Clone)]
pub struct Structure {
    universe: usize,
    algebra: BrouwerAlgebra,
    interval: Option<IntervalSpec>,
    functions: BTreeMap<String, FunctionTable>,
    relations: BTreeMap<String, Predicate>,
}

impl Structure {
    pub fn new(
        universe: usize,
        algebra: BrouwerAlgebra,
        interval: Option<IntervalSpec>,
        functions: BTreeMap<String, FunctionTable>,
        relations: BTreeMap<String, Predicate>,
    ) -> Result<Self, HyperError> {
        if universe == 0 {
            return Err(HyperError::EmptyUniverse);
        }
        if let Some(spec) = &interval {
            spec.validate(&algebra, universe)?;
        }
        let s = Structure { universe, algebra, interval, functions, relations };
        for (name, table) in &s.functions {
            if table.values.len() != tuple_count(universe, table.arity) {
                return Err(HyperError::BadFunctionTable {
                    name: name.clone(),
                    detail: "table is not total".into(),
                });
            }
            if let Some(&bad) = table.values.iter().find(|&&v| v >= universe) {
                return Err(HyperError::BadFunctionTable {
                    name: name.clone(),
                    detail: format!("value {bad} outside the universe"),
                });
            }
            if let Some(spec) = &s.interval {
                // Substitution along the function must preserve fiber
                // bottoms: the bottom of the output may not exceed the bottom
                // of the inputs.
                for (i, &out) in table.values.iter().enumerate() {
                    let args = decode_tuple(universe, table.arity, i);
                    let arg_bottom = spec.bottom_at(&s.algebra, &args);
                    let out_bottom = spec.bottom_at(&s.algebra, &[out]);
                    if !s.algebra.le(out_bottom, arg_bottom) {
                        return Err(HyperError::MorphismCondition {
                            name: name.clone(),
                            tuple: format!("{args:?}"),
                        });
                    }
                }
            }
        }
        let fiber = s.fiber();
        for (name, p) in &s.relations {
            if p.universe() != universe {
                return Err(HyperError::BadRelationTable {
                    name: name.clone(),
                    detail: "universe size mismatch".into(),
                });
            }
            if let Some(&bad) = p.values().iter().find(|&&v| v >= s.algebra.size()) {
                return Err(HyperError::BadRelationTable {
                    name: name.clone(),
                    detail: format!("element index {bad} out of range"),
                });
            }
            for i in 0..p.values().len() {
                let tuple = decode_tuple(universe, p.arity(), i);
                let v = p.values()[i];
                if !s.algebra.le(fiber.bottom_at(&tuple), v) || !s.algebra.le(v, fiber.top()) {
                    return Err(HyperError::OutsideFiber {
                        name: name.clone(),
                        tuple: format!("{tuple:?}"),
                    });
                }
            }
        }
        Ok(s)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn algebra(&self) -> &BrouwerAlgebra {
        &self.algebra
    }

    pub fn interval(&self) -> Option<&IntervalSpec> {
        self.interval.as_ref()
    }

    pub fn fiber(&self) -> Fiber<'_> {
        Fiber { algebra: &self.algebra, interval: self.interval.as_ref() }
    }

    pub fn relation(&self, name: &str) -> Option<&Predicate> {
        self.relations.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionTable> {
        self.functions.get(name)
    }

    /// The signature this structure interprets, reconstructed from its
    /// tables.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (name, table) in &self.functions {
            sig = sig.with_function(name, table.arity);
        }
        for (name, p) in &self.relations {
            sig = sig.with_relation(name, p.arity());
        }
        sig
    }
}

/// Evaluates `term` to a map `M^|ctx| -> M`, one output per context tuple.
pub fn interpret_term(
    s: &Structure,
    ctx: &[String],
    term: &Term,
) -> Result<Vec<usize>, HyperError> {
    term.check(&s.signature())?;
    for v in term_vars(term) {
        if !ctx.contains(&v) {
            return Err(SyntaxError::FreeVariableNotInContext(v).into());
        }
    }
    Ok(eval_term(s, ctx, term))
}

fn term_vars(term: &Term) -> Vec<String> {
    match term {
        Term::Var(v) => vec![v.clone()],
        Term::App(_, args) => args.iter().flat_map(term_vars).collect(),
    }
}

fn eval_term(s: &Structure, ctx: &[String], term: &Term) -> Vec<usize> {
    let m = s.universe();
    let n = ctx.len();
    match term {
        Term::Var(v) => {
            let pos = ctx.iter().position(|c| c == v).expect("context was checked");
            (0..tuple_count(m, n)).map(|i| decode_tuple(m, n, i)[pos]).collect()
        }
        Term::App(f, args) => {
            let table = s.function(f).expect("signature was checked");
            let arg_values: Vec<Vec<usize>> = args.iter().map(|a| eval_term(s, ctx, a)).collect();
            (0..tuple_count(m, n))
                .map(|i| {
                    let tuple: Vec<usize> = arg_values.iter().map(|av| av[i]).collect();
                    table.apply_index(tuple_index(m, &tuple))
                })
                .collect()
        }
    }
}

/// Interprets `formula` in context `ctx` as a predicate over `M^|ctx|`.
///
/// Quantifiers extend the context on the right and quantify along that last
/// coordinate; a bound variable that collides with the context is renamed
/// first.
pub fn interpret_formula(
    s: &Structure,
    ctx: &[String],
    formula: &Formula,
) -> Result<Predicate, HyperError> {
    let sig = s.signature();
    formula.well_formed(&sig)?;
    check_context(ctx, formula)?;
    for v in ctx {
        if sig.declares(v) {
            return Err(SyntaxError::VariableShadowsSymbol(v.clone()).into());
        }
    }
    Ok(interpret_rec(s, &ctx.to_vec(), formula))
}

fn interpret_rec(s: &Structure, ctx: &[String], formula: &Formula) -> Predicate {
    let m = s.universe();
    let n = ctx.len();
    let fiber = s.fiber();
    let alg = &s.algebra;
    match formula {
        Formula::Top => Predicate::from_fn(m, n, |t| fiber.bottom_at(t)),
        Formula::Bottom => Predicate::constant(m, n, fiber.top()),
        Formula::Atom(r, args) => {
            let p = s.relation(r).expect("signature was checked").clone();
            let map = args_map(s, ctx, args);
            pullback(fiber, &map, &p)
        }
        Formula::Equals(l, r) => {
            let eq = equality_predicate(fiber, m);
            let lv = eval_term(s, ctx, l);
            let rv = eval_term(s, ctx, r);
            let map = TupleMap::from_fn(m, n, 2, |t| {
                let i = tuple_index(m, t);
                vec![lv[i], rv[i]]
            });
            pullback(fiber, &map, &eq)
        }
        Formula::And(a, b) => {
            let pa = interpret_rec(s, ctx, a);
            let pb = interpret_rec(s, ctx, b);
            zip_with(&pa, &pb, |x, y| alg.join(x, y))
        }
        Formula::Or(a, b) => {
            let pa = interpret_rec(s, ctx, a);
            let pb = interpret_rec(s, ctx, b);
            zip_with(&pa, &pb, |x, y| alg.meet(x, y))
        }
        Formula::Implies(a, b) => {
            let pa = interpret_rec(s, ctx, a);
            let pb = interpret_rec(s, ctx, b);
            let values = (0..tuple_count(m, n))
                .map(|i| {
                    fiber.imp_at(&decode_tuple(m, n, i), pa.values()[i], pb.values()[i])
                })
                .collect();
            Predicate::new(m, n, values)
        }
        Formula::Exists(v, body) => {
            let (ctx2, body2) = extend_context(ctx, v, body);
            let inner = interpret_rec(s, &ctx2, &body2);
            exists_along(fiber, &inner)
        }
        Formula::Forall(v, body) => {
            let (ctx2, body2) = extend_context(ctx, v, body);
            let inner = interpret_rec(s, &ctx2, &body2);
            forall_along(fiber, &inner)
        }
    }
}

fn args_map(s: &Structure, ctx: &[String], args: &[Term]) -> TupleMap {
    let m = s.universe();
    let tables: Vec<Vec<usize>> = args.iter().map(|a| eval_term(s, ctx, a)).collect();
    TupleMap::from_fn(m, ctx.len(), args.len(), |t| {
        let i = tuple_index(m, t);
        tables.iter().map(|tv| tv[i]).collect()
    })
}

/// Appends the bound variable to the context, renaming it if the context
/// already uses the name.
fn extend_context(ctx: &[String], var: &str, body: &Formula) -> (Vec<String>, Formula) {
    let mut ctx2 = ctx.to_vec();
    if ctx.iter().any(|c| c == var) {
        let mut taken: std::collections::BTreeSet<String> = ctx.iter().cloned().collect();
        taken.extend(body.free_variables());
        let fresh = crate::syntax::fresh_variable(var, &taken);
        ctx2.push(fresh.clone());
        (ctx2, body.rename_free(var, &fresh))
    } else {
        ctx2.push(var.to_string());
        (ctx2, body.clone())
    }
}

fn zip_with(a: &Predicate, b: &Predicate, mut f: impl FnMut(usize, usize) -> usize) -> Predicate {
    assert_eq!(a.arity(), b.arity());
    let values = a.values().iter().zip(b.values()).map(|(&x, &y)| f(x, y)).collect();
    Predicate::new(a.universe(), a.arity(), values)
}

/// Is the closed formula true in `s`: does it denote the fiber bottom of the
/// empty context?
pub fn satisfied(s: &Structure, formula: &Formula) -> Result<bool, HyperError> {
    let p = interpret_formula(s, &[], formula)?;
    Ok(p.values()[0] == s.fiber().bottom_at(&[]))
}

/// Budget and seed for the exhaustive-or-sampled checkers. When a search
/// space exceeds `budget` comparisons the checker draws that many samples
/// from a [`ChaCha8Rng`] seeded with `seed` instead, and says so in the
/// verdict.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub budget: u64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { budget: 1_000_000, seed: 7 }
    }
}

/// All valid interval families over `alg` for a universe of `m` elements, in
/// lexicographic order; `None` if there would be more than `cap`.
fn enumerate_interval_specs(
    alg: &BrouwerAlgebra,
    m: usize,
    cap: usize,
) -> Option<Vec<IntervalSpec>> {
    let mut specs = Vec::new();
    for top in 0..alg.size() {
        for base in 0..alg.size() {
            if base == top || !alg.le(base, top) {
                continue;
            }
            let candidates: Vec<usize> = (0..alg.size())
                .filter(|&x| alg.le(base, x) && alg.le(x, top) && x != top)
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let mut elem = vec![0usize; m];
            loop {
                specs.push(IntervalSpec {
                    top,
                    base,
                    elem: elem.iter().map(|&i| candidates[i]).collect(),
                });
                if specs.len() > cap {
                    return None;
                }
                // Next choice vector, odometer style.
                let mut pos = m;
                while pos > 0 {
                    pos -= 1;
                    elem[pos] += 1;
                    if elem[pos] < candidates.len() {
                        break;
                    }
                    elem[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX || m == 0 {
                    break;
                }
            }
        }
    }
    Some(specs)
}

/// Interval families to test against: exhaustive when small, otherwise a
/// seeded sample (second component says which).
fn interval_specs_for_check(
    alg: &BrouwerAlgebra,
    m: usize,
    opts: &CheckOptions,
) -> (Vec<IntervalSpec>, bool) {
    const SPEC_CAP: usize = 4096;
    if let Some(specs) = enumerate_interval_specs(alg, m, SPEC_CAP) {
        return (specs, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5bec5);
    let mut specs = Vec::new();
    let mut attempts = 0usize;
    while specs.len() < 256 && attempts < 65536 {
        attempts += 1;
        let spec = IntervalSpec {
            top: rng.gen_range(0..alg.size()),
            base: rng.gen_range(0..alg.size()),
            elem: (0..m).map(|_| rng.gen_range(0..alg.size())).collect(),
        };
        if spec.validate(alg, m).is_ok() {
            specs.push(spec);
        }
    }
    (specs, true)
}

/// Per-tuple lists of admissible predicate values for a given mode.
fn fiber_lists(fiber: Fiber<'_>, m: usize, arity: usize) -> Vec<Vec<usize>> {
    (0..tuple_count(m, arity))
        .map(|i| fiber.elements_at(&decode_tuple(m, arity, i)))
        .collect()
}

fn space_size(lists: &[Vec<usize>]) -> u128 {
    lists.iter().fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128))
}

/// Decodes a mixed-radix index into one value per list.
fn decode_choice(lists: &[Vec<usize>], mut index: u128) -> Vec<usize> {
    let mut out = vec![0; lists.len()];
    for (slot, list) in out.iter_mut().zip(lists).rev() {
        let r = list.len() as u128;
        *slot = list[(index % r) as usize];
        index /= r;
    }
    out
}

fn describe_spec(alg: &BrouwerAlgebra, spec: Option<&IntervalSpec>) -> String {
    match spec {
        None => "plain".to_string(),
        Some(s) => {
            let elems: Vec<&str> = s.elem.iter().map(|&e| alg.label(e)).collect();
            format!(
                "interval(top = {}, base = {}, elem = [{}])",
                alg.label(s.top),
                alg.label(s.base),
                elems.join(", ")
            )
        }
    }
}

fn describe_table(alg: &BrouwerAlgebra, values: &[usize]) -> String {
    let parts: Vec<&str> = values.iter().map(|&v| alg.label(v)).collect();
    format!("[{}]", parts.join(", "))
}

enum BlockKind {
    /// Both quantifier adjunctions for context arity `n`.
    Adjunction { n: usize },
    /// The equality condition: pulling back along the diagonal lands at the
    /// fiber bottom exactly for predicates below the equality predicate.
    Equality,
}

struct Block {
    spec: Option<IntervalSpec>,
    kind: BlockKind,
    c_lists: Vec<Vec<usize>>,
    d_lists: Vec<Vec<usize>>,
    size: u128,
}

fn adjunction_blocks(
    alg: &BrouwerAlgebra,
    m: usize,
    specs: &[IntervalSpec],
) -> Vec<Block> {
    let mut blocks = Vec::new();
    let modes: Vec<Option<IntervalSpec>> =
        std::iter::once(None).chain(specs.iter().cloned().map(Some)).collect();
    for spec in &modes {
        let fiber = Fiber { algebra: alg, interval: spec.as_ref() };
        for n in 0..=1usize {
            let c_lists = fiber_lists(fiber, m, n + 1);
            let d_lists = fiber_lists(fiber, m, n);
            let size = space_size(&c_lists).saturating_mul(space_size(&d_lists));
            blocks.push(Block { spec: spec.clone(), kind: BlockKind::Adjunction { n }, c_lists, d_lists, size });
        }
        let c_lists = fiber_lists(fiber, m, 2);
        let size = space_size(&c_lists);
        blocks.push(Block {
            spec: spec.clone(),
            kind: BlockKind::Equality,
            c_lists,
            d_lists: Vec::new(),
            size,
        });
    }
    blocks
}

/// One adjunction comparison. Returns the broken law and a witness if the
/// biconditional fails.
fn adjunction_check(
    alg: &BrouwerAlgebra,
    spec: Option<&IntervalSpec>,
    m: usize,
    n: usize,
    c: &[usize],
    d: &[usize],
    rule: ForallRule,
) -> Result<(), (String, String)> {
    let fiber = Fiber { algebra: alg, interval: spec };
    let gammas = tuple_count(m, n);
    let witness = |law: &str| {
        (
            law.to_string(),
            format!(
                "{}, n = {n}, C = {}, D = {}",
                describe_spec(alg, spec),
                describe_table(alg, c),
                describe_table(alg, d)
            ),
        )
    };
    // π*(D), computed once.
    let mut pb = vec![0usize; gammas * m];
    for g in 0..gammas {
        for x in 0..m {
            let mut t = decode_tuple(m, n, g);
            t.push(x);
            pb[g * m + x] = match spec {
                None => d[g],
                Some(_) => alg.join(d[g], fiber.bottom_at(&t)),
            };
        }
    }
    // Exists: π*(D) <= C iff D <= ∃(C).
    let lhs = (0..gammas * m).all(|i| alg.le(pb[i], c[i]));
    let rhs = (0..gammas).all(|g| {
        let ex = (0..m).map(|x| c[g * m + x]).reduce(|a, b| alg.meet(a, b)).unwrap();
        alg.le(d[g], ex)
    });
    if lhs != rhs {
        return Err(witness("exists adjunction"));
    }
    // Forall: C <= π*(D) iff ∀(C) <= D.
    let lhs = (0..gammas * m).all(|i| alg.le(c[i], pb[i]));
    let rhs = (0..gammas).all(|g| {
        let fa = {
            let joined = (0..m)
                .map(|x| match (spec, rule) {
                    (Some(sp), ForallRule::Residuated) => alg.imp(sp.elem[x], c[g * m + x]),
                    _ => c[g * m + x],
                })
                .reduce(|a, b| alg.join(a, b))
                .unwrap();
            match spec {
                None => joined,
                Some(_) => alg.join(joined, fiber.bottom_at(&decode_tuple(m, n, g))),
            }
        };
        alg.le(fa, d[g])
    });
    if lhs != rhs {
        return Err(witness("forall adjunction"));
    }
    Ok(())
}

/// The equality condition on one candidate predicate over `M^2`.
fn equality_check(
    alg: &BrouwerAlgebra,
    spec: Option<&IntervalSpec>,
    m: usize,
    a: &[usize],
) -> Result<(), (String, String)> {
    let fiber = Fiber { algebra: alg, interval: spec };
    let eq = equality_predicate(fiber, m);
    let lhs = (0..m).all(|x| {
        let diag = a[x * m + x];
        let pulled = match spec {
            None => diag,
            Some(_) => alg.join(diag, fiber.bottom_at(&[x])),
        };
        alg.le(pulled, fiber.bottom_at(&[x]))
    });
    let rhs = (0..m * m).all(|i| alg.le(a[i], eq.values()[i]));
    if lhs != rhs {
        return Err((
            "equality adjunction".to_string(),
            format!("{}, A = {}", describe_spec(alg, spec), describe_table(alg, a)),
        ));
    }
    Ok(())
}

fn run_blocks(
    alg: &BrouwerAlgebra,
    m: usize,
    blocks: &[Block],
    rule: ForallRule,
    opts: &CheckOptions,
    spec_sampled: bool,
    mut check: impl FnMut(&Block, &[usize], &[usize]) -> Result<(), (String, String)>,
) -> Verdict {
    let total: u128 = blocks.iter().map(|b| b.size).sum();
    let _ = (m, rule);
    let mut checks = 0u64;
    if total <= opts.budget as u128 {
        for block in blocks {
            for idx in 0..block.size {
                let c_size = space_size(&block.c_lists);
                let c = decode_choice(&block.c_lists, idx % c_size);
                let d = decode_choice(&block.d_lists, idx / c_size);
                checks += 1;
                if let Err((law, witness)) = check(block, &c, &d) {
                    let mut v = Verdict::fail(checks, law, witness);
                    if spec_sampled {
                        v = v.with_sampling(opts.seed);
                    }
                    return v;
                }
            }
        }
        let mut v = Verdict::pass(checks);
        if spec_sampled {
            v = v.with_sampling(opts.seed);
        }
        return v;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cumulative: Vec<u128> = blocks
        .iter()
        .scan(0u128, |acc, b| {
            *acc += b.size;
            Some(*acc)
        })
        .collect();
    for _ in 0..opts.budget {
        let r = rng.gen_range(0..total);
        let bi = cumulative.partition_point(|&c| c <= r);
        let block = &blocks[bi];
        let local = r - (cumulative[bi] - block.size);
        let c_size = space_size(&block.c_lists);
        let c = decode_choice(&block.c_lists, local % c_size);
        let d = decode_choice(&block.d_lists, local / c_size);
        checks += 1;
        if let Err((law, witness)) = check(block, &c, &d) {
            return Verdict::fail(checks, law, witness).with_sampling(opts.seed);
        }
    }
    Verdict::pass(checks).with_sampling(opts.seed)
}

/// Checks, over every mode (plain plus every interval family within reach),
/// that pullback along the projection is adjoint to `exists_along` on one
/// side and `forall_along` on the other, and that equality satisfies its
/// diagonal condition. Exhausts predicate pairs drawn from the fibers when
/// that fits in the budget, otherwise samples.
pub fn check_adjunctions(alg: &BrouwerAlgebra, m: usize, opts: &CheckOptions) -> Verdict {
    check_adjunctions_with(alg, m, ForallRule::Residuated, opts)
}

/// [`check_adjunctions`] with a selectable `forall` rule, so tests can watch
/// the unguarded mutation fail.
pub fn check_adjunctions_with(
    alg: &BrouwerAlgebra,
    m: usize,
    rule: ForallRule,
    opts: &CheckOptions,
) -> Verdict {
    assert!(m >= 1, "the universe must be nonempty");
    let (specs, spec_sampled) = interval_specs_for_check(alg, m, opts);
    let blocks = adjunction_blocks(alg, m, &specs);
    run_blocks(alg, m, &blocks, rule, opts, spec_sampled, |block, c, d| match block.kind {
        BlockKind::Adjunction { n } => {
            adjunction_check(alg, block.spec.as_ref(), m, n, c, d, rule)
        }
        BlockKind::Equality => equality_check(alg, block.spec.as_ref(), m, c),
    })
}

/// Checks both change-of-context squares for the map `s`: quantifying after
/// pulling back along `s × id` agrees with pulling back after quantifying.
/// In interval mode only families for which `s` respects fiber bottoms are
/// eligible, and those bottoms make the squares genuinely nontrivial.
pub fn check_beck_chevalley(alg: &BrouwerAlgebra, s: &TupleMap, opts: &CheckOptions) -> Verdict {
    check_beck_chevalley_with(alg, s, ForallRule::Residuated, opts)
}

pub fn check_beck_chevalley_with(
    alg: &BrouwerAlgebra,
    s: &TupleMap,
    rule: ForallRule,
    opts: &CheckOptions,
) -> Verdict {
    let m = s.universe();
    assert!(m >= 1, "the universe must be nonempty");
    let (specs, spec_sampled) = interval_specs_for_check(alg, m, opts);
    let eligible = |spec: &IntervalSpec| {
        (0..tuple_count(m, s.src_arity())).all(|i| {
            let src = decode_tuple(m, s.src_arity(), i);
            let dst = decode_tuple(m, s.dst_arity(), s.apply_index(i));
            alg.le(spec.bottom_at(alg, &dst), spec.bottom_at(alg, &src))
        })
    };
    let mut blocks = Vec::new();
    let modes: Vec<Option<IntervalSpec>> = std::iter::once(None)
        .chain(specs.into_iter().filter(|sp| eligible(sp)).map(Some))
        .collect();
    for spec in modes {
        let fiber = Fiber { algebra: alg, interval: spec.as_ref() };
        let c_lists = fiber_lists(fiber, m, s.dst_arity() + 1);
        let size = space_size(&c_lists);
        blocks.push(Block { spec, kind: BlockKind::Equality, c_lists, d_lists: Vec::new(), size });
    }
    run_blocks(alg, m, &blocks, rule, opts, spec_sampled, |block, c, _d| {
        beck_chevalley_check(alg, block.spec.as_ref(), s, c, rule)
    })
}

fn beck_chevalley_check(
    alg: &BrouwerAlgebra,
    spec: Option<&IntervalSpec>,
    s: &TupleMap,
    c: &[usize],
    rule: ForallRule,
) -> Result<(), (String, String)> {
    let m = s.universe();
    let fiber = Fiber { algebra: alg, interval: spec };
    let j = s.src_arity();
    let k = s.dst_arity();
    let c_pred = Predicate::new(m, k + 1, c.to_vec());
    let s1 = s.times_coordinate();
    let pulled = pullback(fiber, &s1, &c_pred);
    let witness = |law: &str| {
        (
            law.to_string(),
            format!("{}, C = {}", describe_spec(alg, spec), describe_table(alg, c)),
        )
    };
    // Exists square.
    let lhs = exists_along(fiber, &pulled);
    let rhs = pullback(fiber, s, &exists_along(fiber, &c_pred));
    if lhs != rhs {
        return Err(witness("exists square"));
    }
    // Forall square.
    let lhs = forall_along_with(fiber, &pulled, rule);
    let rhs = pullback(fiber, s, &forall_along_with(fiber, &c_pred, rule));
    if lhs != rhs {
        return Err(witness("forall square"));
    }
    let _ = (j, tuple_count(m, j));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{upset_algebra, FinitePoset};
    use crate::syntax::parse_formula;

    fn two_chain_alg() -> (FinitePoset, BrouwerAlgebra) {
        let p = FinitePoset::from_pairs(&["0", "a"], &[("0", "a")]).unwrap();
        let alg = upset_algebra(&p);
        (p, alg)
    }

    /// Boolean structure: two worlds of truth values, classical behaviour.
    fn classical_structure() -> Structure {
        let alg = upset_algebra(&FinitePoset::chain(1));
        // R(0) holds, R(1) fails.
        let r = Predicate::new(2, 1, vec![alg.bottom(), alg.top()]);
        Structure::new(
            2,
            alg,
            None,
            BTreeMap::new(),
            BTreeMap::from([("R".to_string(), r)]),
        )
        .unwrap()
    }

    #[test]
    fn classical_quantifiers() {
        let s = classical_structure();
        let sig = s.signature();
        let exists = parse_formula(&sig, "exists x. R(x)").unwrap();
        let forall = parse_formula(&sig, "forall x. R(x)").unwrap();
        let lem = parse_formula(&sig, "forall x. R(x) \\/ ~R(x)").unwrap();
        assert!(satisfied(&s, &exists).unwrap());
        assert!(!satisfied(&s, &forall).unwrap());
        assert!(satisfied(&s, &lem).unwrap());
    }

    #[test]
    fn pullback_of_a_constant_along_identity_recovers_the_fiber_bottoms() {
        let (_, alg) = two_chain_alg();
        let full = alg.bottom();
        let just_a = alg.element_of_mask(0b10).unwrap();
        let spec = IntervalSpec { top: alg.top(), base: full, elem: vec![full, just_a] };
        spec.validate(&alg, 2).unwrap();
        let fiber = Fiber { algebra: &alg, interval: Some(&spec) };
        let p = Predicate::constant(2, 1, spec.base);
        let result = pullback(fiber, &TupleMap::identity(2, 1), &p);
        assert_eq!(result.values(), &[spec.elem[0], spec.elem[1]]);
    }

    #[test]
    fn quantifiers_along_the_last_coordinate_plain() {
        let (p, alg) = two_chain_alg();
        let just_a = alg.element_of_mask(0b10).unwrap();
        let full = alg.element_of_mask(p.full_mask()).unwrap();
        let fiber = Fiber::plain(&alg);
        let pred = Predicate::new(2, 1, vec![just_a, full]);
        let fa = forall_along(fiber, &pred);
        let ex = exists_along(fiber, &pred);
        assert_eq!(fa.values(), &[just_a], "join is intersection");
        assert_eq!(ex.values(), &[full], "meet is union");
    }

    #[test]
    fn equality_is_diagonal_bottom() {
        let (_, alg) = two_chain_alg();
        let full = alg.bottom();
        let just_a = alg.element_of_mask(0b10).unwrap();
        let spec = IntervalSpec { top: alg.top(), base: full, elem: vec![full, just_a] };
        let fiber = Fiber { algebra: &alg, interval: Some(&spec) };
        let eq = equality_predicate(fiber, 2);
        assert_eq!(eq.get(&[0, 0]), full);
        assert_eq!(eq.get(&[1, 1]), just_a, "base ⊕ elem[1]");
        assert_eq!(eq.get(&[0, 1]), alg.top());
        let plain = equality_predicate(Fiber::plain(&alg), 2);
        assert_eq!(plain.get(&[0, 0]), alg.bottom());
        assert_eq!(plain.get(&[0, 1]), alg.top());
    }

    #[test]
    fn term_interpretation_tabulates_composites() {
        let alg = upset_algebra(&FinitePoset::chain(1));
        let max3 = FunctionTable::new(3, 2, vec![0, 1, 2, 1, 1, 2, 2, 2, 2]).unwrap();
        let s = Structure::new(
            3,
            alg,
            None,
            BTreeMap::from([("max".to_string(), max3)]),
            BTreeMap::new(),
        )
        .unwrap();
        let term = Term::app("max", vec![Term::var("x"), Term::var("x")]);
        let table = interpret_term(&s, &["x".to_string()], &term).unwrap();
        assert_eq!(table, vec![0, 1, 2]);
    }

    #[test]
    fn decidable_equality_holds_in_interval_structures() {
        let (_, alg) = two_chain_alg();
        let full = alg.bottom();
        let just_a = alg.element_of_mask(0b10).unwrap();
        let spec = IntervalSpec { top: alg.top(), base: full, elem: vec![full, just_a] };
        let s = Structure::new(2, alg, Some(spec), BTreeMap::new(), BTreeMap::new()).unwrap();
        let f = parse_formula(&Signature::new(), "forall x, y. x = y \\/ ~x = y").unwrap();
        assert!(satisfied(&s, &f).unwrap());
    }

    #[test]
    fn shadowed_bound_variables_are_renamed() {
        let s = classical_structure();
        let sig = s.signature();
        let f = parse_formula(&sig, "forall x. exists x. R(x)").unwrap();
        assert!(satisfied(&s, &f).unwrap());
    }

    #[test]
    fn structure_validation_catches_bad_tables() {
        let alg = upset_algebra(&FinitePoset::chain(1));
        assert!(matches!(
            Structure::new(0, alg.clone(), None, BTreeMap::new(), BTreeMap::new()),
            Err(HyperError::EmptyUniverse)
        ));
        // Relation value out of algebra range.
        let bad = Predicate::new(1, 0, vec![17]);
        assert!(matches!(
            Structure::new(
                1,
                alg.clone(),
                None,
                BTreeMap::new(),
                BTreeMap::from([("R".to_string(), bad)])
            ),
            Err(HyperError::BadRelationTable { .. })
        ));
    }

    #[test]
    fn interval_structure_validation() {
        let (_, alg) = two_chain_alg();
        let full = alg.bottom();
        let just_a = alg.element_of_mask(0b10).unwrap();
        // top must be strictly above every element of the family.
        let collapse = IntervalSpec { top: alg.top(), base: full, elem: vec![alg.top(), full] };
        assert!(collapse.validate(&alg, 2).is_err());
        // Predicates must live inside their fibers.
        let spec = IntervalSpec { top: alg.top(), base: full, elem: vec![full, just_a] };
        let outside = Predicate::new(2, 1, vec![full, full]); // fiber at 1 starts at {a}
        assert!(matches!(
            Structure::new(
                2,
                alg.clone(),
                Some(spec.clone()),
                BTreeMap::new(),
                BTreeMap::from([("R".to_string(), outside)])
            ),
            Err(HyperError::OutsideFiber { .. })
        ));
        // A constant naming an element with a nontrivial bottom breaks the
        // substitution condition.
        let c = FunctionTable::new(2, 0, vec![1]).unwrap();
        assert!(matches!(
            Structure::new(
                2,
                alg,
                Some(spec),
                BTreeMap::from([("c".to_string(), c)]),
                BTreeMap::new()
            ),
            Err(HyperError::MorphismCondition { .. })
        ));
    }

    #[test]
    fn adjunctions_hold_for_the_two_element_algebra() {
        let alg = upset_algebra(&FinitePoset::chain(1));
        let verdict = check_adjunctions(&alg, 2, &CheckOptions::default());
        assert!(verdict.passed, "{verdict}");
        assert!(!verdict.sampled, "the two-element algebra fits in the budget");
    }

    #[test]
    fn adjunctions_hold_for_the_two_chain_algebra() {
        let (_, alg) = two_chain_alg();
        let verdict = check_adjunctions(&alg, 2, &CheckOptions::default());
        assert!(verdict.passed, "{verdict}");
    }

    #[test]
    fn unguarded_forall_fails_the_adjunction_check() {
        let (_, alg) = two_chain_alg();
        let verdict =
            check_adjunctions_with(&alg, 2, ForallRule::Unguarded, &CheckOptions::default());
        assert!(!verdict.passed, "dropping the guard must be caught");
        let failure = verdict.failure.expect("a witness is reported");
        assert_eq!(failure.law, "forall adjunction");
        assert!(failure.witness.contains("interval"), "{}", failure.witness);
    }

    #[test]
    fn beck_chevalley_for_the_collapse_map() {
        let (_, alg) = two_chain_alg();
        let collapse = TupleMap::collapse(2, 1);
        let verdict = check_beck_chevalley(&alg, &collapse, &CheckOptions::default());
        assert!(verdict.passed, "{verdict}");
    }

    #[test]
    fn beck_chevalley_catches_the_unguarded_forall() {
        let (_, alg) = two_chain_alg();
        let collapse = TupleMap::collapse(2, 1);
        let verdict = check_beck_chevalley_with(
            &alg,
            &collapse,
            ForallRule::Unguarded,
            &CheckOptions::default(),
        );
        assert!(!verdict.passed);
        assert_eq!(verdict.failure.unwrap().law, "forall square");
    }

    #[test]
    fn beck_chevalley_for_all_endomaps_of_a_small_universe() {
        let (_, alg) = two_chain_alg();
        for table in [[0usize, 0], [0, 1], [1, 0], [1, 1]] {
            let s = TupleMap::from_fn(2, 1, 1, |t| vec![table[t[0]]]);
            let verdict = check_beck_chevalley(&alg, &s, &CheckOptions::default());
            assert!(verdict.passed, "table {table:?}: {verdict}");
        }
    }
}
