//! flowsynth: constraint-guided synthesis of service workflows over
//! taxonomic domain models.
//!
//! The crate is organized bottom-up:
//!
//! - [`ontology`]: OBO-subset parsing, rooted is-a taxonomies, subsumption.
//! - [`domain`]: service descriptions, domain-model loading and validation,
//!   the configuration universe (pipelining / accumulating state updates).
//! - [`sltl`]: the temporal constraint language — syntax, parsing,
//!   evaluation over finite traces, formula progression, templates.
//! - [`synthesis`]: the iterative-deepening product search, permutation
//!   filtering, solution replay, and the constraint-grid harness.
//! - [`bundled`]: the embedded 22-service example domain, its constraint
//!   library, and published reference counts for comparison reports.

pub mod bundled;
pub mod domain;
pub mod ontology;
pub mod sltl;
pub mod synthesis;

pub use domain::{DomainError, DomainModel, ServiceDescription, TypeState, UniverseMode};
pub use ontology::{build_taxonomy, parse_obo, OntologyError, Taxonomy, TermKind, TermRef};
pub use sltl::{Formula, ServiceConstraint, SltlError, Trace};
pub use synthesis::{
    derive_problem, enumerate_universe, synthesize, SynthesisError, SynthesisProblem,
    SynthesisResult,
};
