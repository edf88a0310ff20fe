//! Finite-model semantics for first-order intuitionistic logic.
//!
//! The pieces, bottom to top:
//!
//! * [`syntax`] — signatures, terms, formulas, a parser and a printer.
//! * [`order`] — finite posets, their upward-closed subsets, and the Brouwer
//!   algebras (order duals of Heyting algebras) those upsets form. `0` is the
//!   easiest element, `1` the hardest, and `U <= V` means `U ⊇ V`.
//! * [`hyper`] — predicates valued in a Brouwer algebra, indexed by powers of
//!   a finite universe, with the quantifier adjoints, equality, and the
//!   interval ("relativized bottom") variant of all of the above.
//! * [`kripke`] — Kripke models with expanding domains, the forcing relation,
//!   and bounded model enumeration.
//! * [`bridge`] — compiles a Kripke model to an interval structure over the
//!   upset algebra of its frame, and checks that forcing and algebraic
//!   satisfaction agree, formula by formula.
//! * [`gen`] — bounded formula generation for the checkers.
//! * [`suite`] — the formula catalogue, countermodel search, and the batteries
//!   run by the `hyperlat` binary.

pub mod bridge;
pub mod files;
pub mod gen;
pub mod hyper;
pub mod kripke;
pub mod order;
pub mod suite;
pub mod syntax;
pub mod verdict;
