//! SLTL formulas over finite traces: abstract syntax, trace semantics,
//! step-wise progression and the constraint templates.
//!
//! State predicates are type-taxonomy constraints; the next-step modalities
//! `<sc>`/`[sc]` are indexed by service-taxonomy constraints. Traces are
//! finite, so `<sc>phi` is strong (fails at the trace end) and `[sc]phi`
//! is weak (holds at the trace end).

mod parse;

pub use parse::{parse_constraint_file, parse_constraint_line, parse_formula, parse_service_constraint};

use std::fmt;

use thiserror::Error;

use crate::domain::{DomainModel, TypeState};
use crate::ontology::{TermKind, TermRef};

#[derive(Debug, Error)]
pub enum SltlError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("cannot resolve '{0}': {1}")]
    Resolve(String, String),
    #[error("unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("template '{kind}' expects {expected} argument(s), got {got}")]
    Arity {
        kind: String,
        expected: String,
        got: usize,
    },
    #[error("trace position {pos} out of range 0..={max}")]
    Position { pos: usize, max: usize },
}

/// Boolean combination over service-taxonomy terms; indexes the modalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServiceConstraint {
    True,
    Atom(TermRef),
    Not(Box<ServiceConstraint>),
    And(Box<ServiceConstraint>, Box<ServiceConstraint>),
    Or(Box<ServiceConstraint>, Box<ServiceConstraint>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    TypeAtom(TermRef),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Diamond(ServiceConstraint, Box<Formula>),
    Box_(ServiceConstraint, Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

/// Smart constructors with constant folding; progression relies on residuals
/// collapsing to `True`/`False` where possible.
impl Formula {
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, b) => b,
            (a, Formula::True) => a,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (Formula::False, b) => b,
            (a, Formula::False) => a,
            (a, b) => Formula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) => Formula::True,
            (_, Formula::True) => Formula::True,
            (Formula::True, b) => b,
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn diamond(sc: ServiceConstraint, f: Formula) -> Formula {
        match f {
            Formula::False => Formula::False,
            f => Formula::Diamond(sc, Box::new(f)),
        }
    }

    pub fn box_(sc: ServiceConstraint, f: Formula) -> Formula {
        match f {
            Formula::True => Formula::True,
            f => Formula::Box_(sc, Box::new(f)),
        }
    }

    /// `X phi` is sugar for `<true> phi`.
    pub fn next(f: Formula) -> Formula {
        Formula::diamond(ServiceConstraint::True, f)
    }

    pub fn finally(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            f => Formula::Finally(Box::new(f)),
        }
    }

    pub fn globally(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            f => Formula::Globally(Box::new(f)),
        }
    }

    pub fn until(l: Formula, r: Formula) -> Formula {
        match (l, r) {
            (_, Formula::True) => Formula::True,
            (_, Formula::False) => Formula::False,
            (l, r) => Formula::Until(Box::new(l), Box::new(r)),
        }
    }
}

/// A finite execution: n actions and n+1 states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<TypeState>,
    pub actions: Vec<String>,
}

impl Trace {
    pub fn new(states: Vec<TypeState>, actions: Vec<String>) -> Self {
        assert_eq!(states.len(), actions.len() + 1, "trace shape");
        Trace { states, actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Semantics, generic over how atoms are decided. The engine substitutes a
// bitmask-backed context; the public API resolves against the taxonomies.

pub(crate) fn eval_sc<A>(sc: &ServiceConstraint, action_sat: &A) -> bool
where
    A: Fn(&TermRef) -> bool,
{
    match sc {
        ServiceConstraint::True => true,
        ServiceConstraint::Atom(t) => action_sat(t),
        ServiceConstraint::Not(inner) => !eval_sc(inner, action_sat),
        ServiceConstraint::And(a, b) => eval_sc(a, action_sat) && eval_sc(b, action_sat),
        ServiceConstraint::Or(a, b) => eval_sc(a, action_sat) || eval_sc(b, action_sat),
    }
}

fn constant(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// One progression step: resolve state atoms against the current state and
/// the modalities against the action taken, returning the residual
/// obligation on the rest of the trace.
pub(crate) fn progress_impl<S, A>(f: &Formula, state_sat: &S, action_sat: &A) -> Formula
where
    S: Fn(&TermRef) -> bool,
    A: Fn(&TermRef) -> bool,
{
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::TypeAtom(t) => constant(state_sat(t)),
        Formula::Not(g) => Formula::not(progress_impl(g, state_sat, action_sat)),
        Formula::And(a, b) => Formula::and(
            progress_impl(a, state_sat, action_sat),
            progress_impl(b, state_sat, action_sat),
        ),
        Formula::Or(a, b) => Formula::or(
            progress_impl(a, state_sat, action_sat),
            progress_impl(b, state_sat, action_sat),
        ),
        Formula::Implies(a, b) => Formula::implies(
            progress_impl(a, state_sat, action_sat),
            progress_impl(b, state_sat, action_sat),
        ),
        Formula::Diamond(sc, g) => {
            if eval_sc(sc, action_sat) {
                (**g).clone()
            } else {
                Formula::False
            }
        }
        Formula::Box_(sc, g) => {
            if eval_sc(sc, action_sat) {
                (**g).clone()
            } else {
                Formula::True
            }
        }
        Formula::Finally(g) => Formula::or(
            progress_impl(g, state_sat, action_sat),
            Formula::finally((**g).clone()),
        ),
        Formula::Globally(g) => Formula::and(
            progress_impl(g, state_sat, action_sat),
            Formula::globally((**g).clone()),
        ),
        Formula::Until(l, r) => Formula::or(
            progress_impl(r, state_sat, action_sat),
            Formula::and(
                progress_impl(l, state_sat, action_sat),
                Formula::until((**l).clone(), (**r).clone()),
            ),
        ),
    }
}

/// Decide a formula on the zero-action trace consisting of one state.
pub(crate) fn accepts_end_impl<S>(f: &Formula, state_sat: &S) -> bool
where
    S: Fn(&TermRef) -> bool,
{
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::TypeAtom(t) => state_sat(t),
        Formula::Not(g) => !accepts_end_impl(g, state_sat),
        Formula::And(a, b) => accepts_end_impl(a, state_sat) && accepts_end_impl(b, state_sat),
        Formula::Or(a, b) => accepts_end_impl(a, state_sat) || accepts_end_impl(b, state_sat),
        Formula::Implies(a, b) => !accepts_end_impl(a, state_sat) || accepts_end_impl(b, state_sat),
        Formula::Diamond(_, _) => false,
        Formula::Box_(_, _) => true,
        Formula::Finally(g) | Formula::Globally(g) => accepts_end_impl(g, state_sat),
        Formula::Until(_, r) => accepts_end_impl(r, state_sat),
    }
}

fn state_sat_fn<'a>(model: &'a DomainModel, state: &'a TypeState) -> impl Fn(&TermRef) -> bool + 'a {
    move |atom: &TermRef| {
        state
            .iter()
            .any(|provided| model.type_taxonomy.ref_satisfies(provided, atom).unwrap_or(false))
    }
}

fn action_sat_fn<'a>(model: &'a DomainModel, action: &'a str) -> impl Fn(&TermRef) -> bool + 'a {
    move |atom: &TermRef| match atom.kind {
        TermKind::Instance => action == atom.id,
        TermKind::Class => model
            .service_taxonomy
            .satisfies(&TermRef::instance(action), &atom.id)
            .unwrap_or(false),
    }
}

/// Finite-trace evaluation at position `pos` (`0 ..= trace.len()`).
pub fn eval_trace(
    f: &Formula,
    model: &DomainModel,
    trace: &Trace,
    pos: usize,
) -> Result<bool, SltlError> {
    let n = trace.len();
    if pos > n {
        return Err(SltlError::Position { pos, max: n });
    }
    Ok(eval_at(f, model, trace, pos))
}

fn eval_at(f: &Formula, model: &DomainModel, trace: &Trace, i: usize) -> bool {
    let n = trace.len();
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::TypeAtom(t) => state_sat_fn(model, &trace.states[i])(t),
        Formula::Not(g) => !eval_at(g, model, trace, i),
        Formula::And(a, b) => eval_at(a, model, trace, i) && eval_at(b, model, trace, i),
        Formula::Or(a, b) => eval_at(a, model, trace, i) || eval_at(b, model, trace, i),
        Formula::Implies(a, b) => !eval_at(a, model, trace, i) || eval_at(b, model, trace, i),
        Formula::Diamond(sc, g) => {
            i < n && eval_sc(sc, &action_sat_fn(model, &trace.actions[i])) && eval_at(g, model, trace, i + 1)
        }
        Formula::Box_(sc, g) => {
            i == n
                || !eval_sc(sc, &action_sat_fn(model, &trace.actions[i]))
                || eval_at(g, model, trace, i + 1)
        }
        Formula::Finally(g) => (i..=n).any(|j| eval_at(g, model, trace, j)),
        Formula::Globally(g) => (i..=n).all(|j| eval_at(g, model, trace, j)),
        Formula::Until(l, r) => (i..=n).any(|j| {
            eval_at(r, model, trace, j) && (i..j).all(|k| eval_at(l, model, trace, k))
        }),
    }
}

/// Progress `f` over one step taken from `state` by `action`.
pub fn progress(f: &Formula, model: &DomainModel, state: &TypeState, action: &str) -> Formula {
    progress_impl(f, &state_sat_fn(model, state), &action_sat_fn(model, action))
}

/// End-of-trace acceptance; equals `eval_trace` on the zero-action trace.
pub fn accepts_end(f: &Formula, model: &DomainModel, state: &TypeState) -> bool {
    accepts_end_impl(f, &state_sat_fn(model, state))
}

// ---------------------------------------------------------------------------
// Constraint templates

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// No listed service may ever occur.
    Exclude,
    /// The service occurs at most once.
    AtMostOnce,
    /// Every occurrence of the first is eventually followed by the second.
    FollowedBy,
    /// The first occurs, with the second strictly after it.
    ExistsFollowedBy,
    /// Alias of `ExistsFollowedBy` for type-level "A then B" patterns.
    ExistsThen,
    /// The service (or class) occurs somewhere.
    Exists,
}

impl TemplateKind {
    pub fn from_name(name: &str) -> Result<Self, SltlError> {
        Ok(match name {
            "exclude" => TemplateKind::Exclude,
            "at_most_once" => TemplateKind::AtMostOnce,
            "followed_by" => TemplateKind::FollowedBy,
            "exists_followed_by" => TemplateKind::ExistsFollowedBy,
            "exists_then" => TemplateKind::ExistsThen,
            "exists" => TemplateKind::Exists,
            other => return Err(SltlError::UnknownTemplate(other.to_string())),
        })
    }
}

/// Instantiate a template over service-taxonomy terms.
pub fn template(kind: TemplateKind, args: &[TermRef]) -> Result<Formula, SltlError> {
    let arity = |expected: &str, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(SltlError::Arity {
                kind: format!("{kind:?}"),
                expected: expected.to_string(),
                got: args.len(),
            })
        }
    };
    let atom = |t: &TermRef| ServiceConstraint::Atom(t.clone());
    match kind {
        TemplateKind::Exclude => {
            arity(">= 1", !args.is_empty())?;
            Ok(conjoin(args.iter().map(|s| {
                Formula::globally(Formula::not(Formula::diamond(atom(s), Formula::True)))
            })))
        }
        TemplateKind::AtMostOnce => {
            arity("1", args.len() == 1)?;
            let s = &args[0];
            Ok(Formula::globally(Formula::box_(
                atom(s),
                Formula::globally(Formula::not(Formula::diamond(atom(s), Formula::True))),
            )))
        }
        TemplateKind::FollowedBy => {
            arity("2", args.len() == 2)?;
            Ok(Formula::globally(Formula::implies(
                Formula::diamond(atom(&args[0]), Formula::True),
                Formula::next(Formula::finally(Formula::diamond(atom(&args[1]), Formula::True))),
            )))
        }
        TemplateKind::ExistsFollowedBy | TemplateKind::ExistsThen => {
            arity("2", args.len() == 2)?;
            Ok(Formula::finally(Formula::diamond(
                atom(&args[0]),
                Formula::finally(Formula::diamond(atom(&args[1]), Formula::True)),
            )))
        }
        TemplateKind::Exists => {
            arity("1", args.len() == 1)?;
            Ok(Formula::finally(Formula::diamond(atom(&args[0]), Formula::True)))
        }
    }
}

/// Right-folded conjunction; the empty conjunction is `true`.
pub fn conjoin<I>(formulas: I) -> Formula
where
    I: IntoIterator<Item = Formula>,
{
    let items: Vec<Formula> = formulas.into_iter().collect();
    items
        .into_iter()
        .rev()
        .fold(Formula::True, |acc, f| Formula::and(f, acc))
}

// ---------------------------------------------------------------------------
// Display (re-parseable concrete syntax)

fn fmt_id(id: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let plain = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | ':' | '.'));
    if plain {
        write!(f, "{id}")
    } else {
        write!(f, "\"{id}\"")
    }
}

impl fmt::Display for ServiceConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServiceConstraint::True => write!(f, "true"),
            ServiceConstraint::Atom(t) => fmt_id(&t.id, f),
            ServiceConstraint::Not(g) => write!(f, "!({g})"),
            ServiceConstraint::And(a, b) => write!(f, "({a} & {b})"),
            ServiceConstraint::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::TypeAtom(t) => {
                write!(f, "type(")?;
                fmt_id(&t.id, f)?;
                write!(f, ")")
            }
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Diamond(sc, g) => write!(f, "<{sc}>({g})"),
            Formula::Box_(sc, g) => write!(f, "[{sc}]({g})"),
            Formula::Finally(g) => write!(f, "F({g})"),
            Formula::Globally(g) => write!(f, "G({g})"),
            Formula::Until(l, r) => write!(f, "({l} U {r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::domain::{DomainModel, UniverseMode};
    use proptest::prelude::*;

    fn model() -> DomainModel {
        bundled::domain()
    }

    fn state(model: &DomainModel, ids: &[&str]) -> TypeState {
        ids.iter().map(|i| model.type_taxonomy.resolve(i).unwrap()).collect()
    }

    // -- parsing ----------------------------------------------------------

    #[test]
    fn parse_globally_not_diamond() {
        let m = model();
        let f = parse_formula("G(!<ReadFile>true)", &m).unwrap();
        match &f {
            Formula::Globally(inner) => match &**inner {
                Formula::Not(g) => assert!(matches!(&**g, Formula::Diamond(_, _))),
                other => panic!("expected Not, got {other}"),
            },
            other => panic!("expected Globally, got {other}"),
        }
    }

    #[test]
    fn parse_resolves_display_names_and_smart_quotes() {
        let m = model();
        let f = parse_formula("F(type(\u{201c}DNA sequence\u{201d}))", &m).unwrap();
        assert_eq!(f.to_string(), "F(type(data:dna_sequence))");
        let sc = parse_service_constraint("\"Sequence database search by sequence\"", &m).unwrap();
        assert_eq!(
            sc,
            ServiceConstraint::Atom(TermRef::class("op:sequence_database_search_by_sequence"))
        );
    }

    #[test]
    fn parse_syntax_error_reports_offset() {
        let m = model();
        match parse_formula("G(", &m) {
            Err(SltlError::Syntax { .. }) => {}
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn parse_unknown_name_is_resolve_error() {
        let m = model();
        assert!(matches!(
            parse_formula("<NoSuchService>true", &m),
            Err(SltlError::Resolve(..))
        ));
    }

    #[test]
    fn parse_precedence_and_display_round_trip() {
        let m = model();
        for src in [
            "type(data:sequence) -> F(<WUBlast>true) | G([Gblocks]false)",
            "(type(data:data) U <ClustalW>true) & !type(data:image)",
            "F(<WUBlast & !ReadFile>true)",
            "G(<WUBlast>true -> X(F(<WUBlastParser>true)))",
        ] {
            let f = parse_formula(src, &m).unwrap();
            let again = parse_formula(&f.to_string(), &m).unwrap();
            assert_eq!(f, again, "display round trip for {src}");
        }
    }

    #[test]
    fn constraint_line_accepts_templates_and_formulas() {
        let m = model();
        let t = parse_constraint_line("template: exists(ClustalW)", &m).unwrap();
        assert_eq!(t, Formula::finally(Formula::diamond(
            ServiceConstraint::Atom(m.service_taxonomy.resolve("ClustalW").unwrap_or(TermRef::instance("ClustalW"))),
            Formula::True,
        )));
        let f = parse_constraint_line("F(type(data:image))", &m).unwrap();
        assert!(matches!(f, Formula::Finally(_)));
    }

    #[test]
    fn constraint_file_conjoins_lines_and_skips_comments() {
        let m = model();
        let f = parse_constraint_file(
            "# a comment\nF(<ClustalW>true)\n\nF(<Gblocks>true)\n",
            &m,
        )
        .unwrap();
        assert!(matches!(f, Formula::And(_, _)));
    }

    #[test]
    fn template_arity_checked() {
        assert!(matches!(
            template(TemplateKind::FollowedBy, &[TermRef::instance("A")]),
            Err(SltlError::Arity { .. })
        ));
        assert!(matches!(
            template(TemplateKind::Exclude, &[]),
            Err(SltlError::Arity { .. })
        ));
        assert!(matches!(
            TemplateKind::from_name("nope"),
            Err(SltlError::UnknownTemplate(_))
        ));
    }

    // -- evaluation -------------------------------------------------------

    /// WUBlast then WUBlastParser from a DNA-sequence start, pipelining.
    fn sample_trace(m: &DomainModel) -> Trace {
        let s0 = state(m, &["data:dna_sequence"]);
        let mut states = vec![s0.clone()];
        let mut actions = Vec::new();
        let mut cur = s0;
        for name in ["WUBlast", "WUBlastParser"] {
            let svc = m.service(name).unwrap();
            cur = m.successor(&cur, svc, UniverseMode::Pipelining).unwrap();
            states.push(cur.clone());
            actions.push(name.to_string());
        }
        Trace::new(states, actions)
    }

    #[test]
    fn eval_examples() {
        let m = model();
        let t = sample_trace(&m);
        let cases = [
            ("type(data:sequence)", true),             // dna ⊑ sequence
            ("type(data:protein_sequence)", false),    // downward only
            ("<WUBlast>true", true),
            ("<\"Sequence database search\">true", true), // class constraint on the action
            ("<WUBlastParser>true", false),
            ("X(type(data:sequence_database_hits))", true),
            ("F(type(data:sequence_identifier))", true),
            ("G(!<ReadFile>true)", true),
            ("F(<WUBlast & !ReadFile>true)", true),
            ("(!type(data:sequence_identifier) U <WUBlastParser>true)", true),
            ("[ReadFile]false", true),                 // weak: action isn't ReadFile
            ("[WUBlast]false", false),
        ];
        for (src, expected) in cases {
            let f = parse_formula(src, &m).unwrap();
            assert_eq!(eval_trace(&f, &m, &t, 0).unwrap(), expected, "{src}");
        }
    }

    #[test]
    fn eval_position_bounds() {
        let m = model();
        let t = sample_trace(&m);
        let f = parse_formula("true", &m).unwrap();
        assert!(eval_trace(&f, &m, &t, 2).unwrap());
        assert!(matches!(
            eval_trace(&f, &m, &t, 3),
            Err(SltlError::Position { pos: 3, max: 2 })
        ));
    }

    #[test]
    fn modalities_at_trace_end() {
        let m = model();
        let t = sample_trace(&m);
        let diamond = parse_formula("<WUBlast>true", &m).unwrap();
        let weak = parse_formula("[WUBlast]false", &m).unwrap();
        // strong next fails at the end, weak next holds vacuously
        assert!(!eval_trace(&diamond, &m, &t, 2).unwrap());
        assert!(eval_trace(&weak, &m, &t, 2).unwrap());
    }

    #[test]
    fn progress_examples() {
        let m = model();
        let t = sample_trace(&m);
        let f = parse_formula("F(<WUBlastParser>true)", &m).unwrap();
        let after = progress(&f, &m, &t.states[0], "WUBlast");
        assert_eq!(after, f, "obligation survives a non-matching step");
        let done = progress(&after, &m, &t.states[1], "WUBlastParser");
        assert_eq!(done, Formula::True);

        let g = parse_formula("G(!<ReadFile>true)", &m).unwrap();
        assert_eq!(progress(&g, &m, &t.states[0], "WUBlast"), g);
        assert_eq!(progress(&g, &m, &t.states[0], "ReadFile"), Formula::False);
    }

    #[test]
    fn accepts_end_examples() {
        let m = model();
        let s = state(&m, &["data:dna_sequence"]);
        let cases = [
            ("type(data:sequence)", true),
            ("F(type(data:sequence))", true),
            ("F(<WUBlast>true)", false), // no step left to take
            ("G(!<ReadFile>true)", true),
            ("[ReadFile]false", true),
            ("(type(data:image) U type(data:sequence))", true),
        ];
        for (src, expected) in cases {
            let f = parse_formula(src, &m).unwrap();
            assert_eq!(accepts_end(&f, &m, &s), expected, "{src}");
        }
    }

    #[test]
    fn exclude_template_equals_occurrence_scan() {
        let m = model();
        let t = sample_trace(&m);
        for name in ["ReadFile", "WUBlast", "WUBlastParser"] {
            let excl = template(TemplateKind::Exclude, &[TermRef::instance(name)]).unwrap();
            let occurs = t.actions.iter().any(|a| a == name);
            assert_eq!(eval_trace(&excl, &m, &t, 0).unwrap(), !occurs, "{name}");
        }
    }

    // -- randomized semantics checks --------------------------------------

    fn arb_sc() -> impl Strategy<Value = ServiceConstraint> {
        let leaf = prop_oneof![
            Just(ServiceConstraint::True),
            prop_oneof![
                Just("op:file_loading"),
                Just("op:sequence_database_search"),
                Just("op:global_multiple_sequence_alignment"),
                Just("op:operation"),
            ]
            .prop_map(|id| ServiceConstraint::Atom(TermRef::class(id))),
            prop_oneof![Just("WUBlast"), Just("Gblocks"), Just("ClustalW")]
                .prop_map(|n| ServiceConstraint::Atom(TermRef::instance(n))),
        ];
        leaf.prop_recursive(2, 8, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|s| ServiceConstraint::Not(Box::new(s))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ServiceConstraint::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner)
                    .prop_map(|(a, b)| ServiceConstraint::Or(Box::new(a), Box::new(b))),
            ]
        })
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            prop_oneof![
                Just("data:sequence"),
                Just("data:dna_sequence"),
                Just("data:multiple_sequence_alignment"),
                Just("data:sequence_database_hits"),
                Just("data:data"),
            ]
            .prop_map(|id| Formula::TypeAtom(TermRef::class(id))),
        ];
        // raw variants on purpose: the smart constructors fold constants,
        // which would bias the sample toward trivial formulas
        leaf.prop_recursive(5, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
                (arb_sc(), inner.clone())
                    .prop_map(|(sc, f)| Formula::Diamond(sc, Box::new(f))),
                (arb_sc(), inner.clone())
                    .prop_map(|(sc, f)| Formula::Box_(sc, Box::new(f))),
                inner.clone().prop_map(|f| Formula::Finally(Box::new(f))),
                inner.clone().prop_map(|f| Formula::Globally(Box::new(f))),
                (inner.clone(), inner)
                    .prop_map(|(a, b)| Formula::Until(Box::new(a), Box::new(b))),
            ]
        })
    }

    /// Random type-consistent walk through the universe, seeded by `picks`.
    pub(crate) fn random_walk(model: &DomainModel, picks: &[u8], mode: UniverseMode) -> Trace {
        let start: TypeState = model.service("ReadDNASequence").unwrap().outputs.iter().cloned().collect();
        let mut states = vec![start.clone()];
        let mut actions = Vec::new();
        let mut cur = start;
        for &p in picks {
            let applicable: Vec<_> = model
                .services
                .iter()
                .filter(|s| model.applicable(&cur, s))
                .collect();
            if applicable.is_empty() {
                break;
            }
            let svc = applicable[p as usize % applicable.len()];
            cur = model.successor(&cur, svc, mode).unwrap();
            states.push(cur.clone());
            actions.push(svc.name.clone());
        }
        Trace::new(states, actions)
    }

    fn check_progression_soundness(m: &DomainModel, f: &Formula, t: &Trace) {
        let mut residual = f.clone();
        for i in 0..t.len() {
            residual = progress(&residual, m, &t.states[i], &t.actions[i]);
        }
        let progressed = accepts_end(&residual, m, &t.states[t.len()]);
        let direct = eval_trace(f, m, t, 0).unwrap();
        assert_eq!(progressed, direct, "formula {f} on trace {:?}", t.actions);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn progression_soundness(f in arb_formula(), picks in proptest::collection::vec(any::<u8>(), 0..=6)) {
            let m = model();
            let t = random_walk(&m, &picks, UniverseMode::Pipelining);
            check_progression_soundness(&m, &f, &t);
        }

        #[test]
        fn box_is_dual_of_diamond(sc in arb_sc(), f in arb_formula(), picks in proptest::collection::vec(any::<u8>(), 0..=4)) {
            let m = model();
            let t = random_walk(&m, &picks, UniverseMode::Accumulating);
            let boxed = Formula::Box_(sc.clone(), Box::new(f.clone()));
            let dual = Formula::Not(Box::new(Formula::Diamond(
                sc,
                Box::new(Formula::Not(Box::new(f))),
            )));
            for pos in 0..=t.len() {
                prop_assert_eq!(
                    eval_trace(&boxed, &m, &t, pos).unwrap(),
                    eval_trace(&dual, &m, &t, pos).unwrap()
                );
            }
        }

        #[test]
        fn until_unrolls(l in arb_formula(), r in arb_formula(), picks in proptest::collection::vec(any::<u8>(), 0..=4)) {
            let m = model();
            let t = random_walk(&m, &picks, UniverseMode::Pipelining);
            let until = Formula::Until(Box::new(l.clone()), Box::new(r.clone()));
            // φ U ψ  ≡  ψ ∨ (φ ∧ ⟨true⟩(φ U ψ)) on finite traces
            let unrolled = Formula::Or(
                Box::new(r),
                Box::new(Formula::And(
                    Box::new(l),
                    Box::new(Formula::Diamond(ServiceConstraint::True, Box::new(until.clone()))),
                )),
            );
            for pos in 0..=t.len() {
                prop_assert_eq!(
                    eval_trace(&until, &m, &t, pos).unwrap(),
                    eval_trace(&unrolled, &m, &t, pos).unwrap()
                );
            }
        }

        #[test]
        fn display_parse_round_trip(f in arb_formula()) {
            let m = model();
            let text = f.to_string();
            let parsed = parse_formula(&text, &m).unwrap();
            // smart constructors may fold constants, so compare semantically
            let picks: Vec<u8> = (0..4).collect();
            let t = random_walk(&m, &picks, UniverseMode::Pipelining);
            for pos in 0..=t.len() {
                prop_assert_eq!(
                    eval_trace(&f, &m, &t, pos).unwrap(),
                    eval_trace(&parsed, &m, &t, pos).unwrap()
                );
            }
        }
    }
}
