//! Bundled example domain, constraint library and published reference
//! counts for the reproduction harness.

use std::fmt::Write as _;

use crate::domain::DomainModel;
use crate::sltl::{self, Formula};
use crate::synthesis::{self, csv_field, NamedConstraint, SynthesisError, SynthesisProblem};

/// The reconstructed 22-service example domain (inline taxonomies).
pub const DOMAIN_JSON: &str = include_str!("../data/example.domain.json");

/// A ~100-term synthetic EDAM-style ontology for the OBO importer.
pub const EDAM_SAMPLE_OBO: &str = include_str!("../data/edam_sample.obo");

pub const CONSTRAINT_C1: &str = include_str!("../data/constraints/c1.sltl");
pub const CONSTRAINT_C2: &str = include_str!("../data/constraints/c2.sltl");
pub const CONSTRAINT_C3: &str = include_str!("../data/constraints/c3.sltl");
pub const CONSTRAINT_C4: &str = include_str!("../data/constraints/c4.sltl");
pub const CONSTRAINT_C4P: &str = include_str!("../data/constraints/c4p.sltl");

/// Load the bundled domain. Panics only if the embedded data is broken,
/// which the test suite rules out.
pub fn domain() -> DomainModel {
    DomainModel::from_json_str(DOMAIN_JSON, None).expect("bundled domain is valid")
}

/// Source text of a named bundled constraint (`c1`, `c2`, `c3`, `c4`,
/// `c4'`/`c4p`).
pub fn constraint_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "c1" | "1" => CONSTRAINT_C1,
        "c2" | "2" => CONSTRAINT_C2,
        "c3" | "3" => CONSTRAINT_C3,
        "c4" | "4" => CONSTRAINT_C4,
        "c4'" | "c4p" | "4'" => CONSTRAINT_C4P,
        _ => return None,
    })
}

/// The five named constraints, parsed against the given model, in grid
/// order: 1, 2, 3, 4, 4'.
pub fn constraints(model: &DomainModel) -> Vec<NamedConstraint> {
    [
        ("1", CONSTRAINT_C1),
        ("2", CONSTRAINT_C2),
        ("3", CONSTRAINT_C3),
        ("4", CONSTRAINT_C4),
        ("4'", CONSTRAINT_C4P),
    ]
    .into_iter()
    .map(|(name, source)| NamedConstraint {
        name: name.to_string(),
        formula: sltl::parse_constraint_file(source, model)
            .expect("bundled constraint parses"),
    })
    .collect()
}

/// Published results (visited nodes, solutions) per constraint subset,
/// depth 5. Labels use the same subset order as [`constraints`].
pub const PUBLISHED_TABLE: &[(&str, u64, u64)] = &[
    ("none", 34_026, 2_269),
    ("1", 1_139, 55),
    ("2", 82_343, 2_194),
    ("3", 132_809, 1_916),
    ("4", 436_102, 471),
    ("4'", 129_200, 406),
    ("1, 2", 1_103, 49),
    ("1, 3", 3_123, 52),
    ("1, 4", 8_309, 24),
    ("1, 4'", 2_336, 1),
    ("2, 3", 138_137, 1_847),
    ("2, 4", 443_860, 459),
    ("2, 4'", 181_365, 394),
    ("3, 4", 910_672, 138),
    ("3, 4'", 277_239, 359),
    ("4, 4'", 847_845, 18),
    ("1, 2, 3", 9_603, 31),
    ("1, 2, 4", 8_057, 24),
    ("1, 2, 4'", 2_084, 1),
    ("1, 3, 4", 28_545, 24),
    ("1, 3, 4'", 18_699, 0),
    ("1, 4, 4'", 15_919, 0),
    ("2, 3, 4", 919_162, 138),
    ("2, 3, 4'", 284_463, 347),
    ("2, 4, 4'", 859_047, 18),
    ("3, 4, 4'", 1_752_153, 0),
    ("1, 2, 3, 4", 28_545, 24),
    ("1, 2, 3, 4'", 2_084, 1),
    ("1, 2, 4, 4'", 15_235, 0),
    ("1, 3, 4, 4'", 54_711, 0),
    ("2, 3, 4, 4'", 1_764_843, 0),
    ("1, 2, 3, 4, 4'", 54_027, 0),
];

pub fn published_solutions(label: &str) -> Option<u64> {
    PUBLISHED_TABLE
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|(_, _, s)| *s)
}

/// Subset-inclusion pairs where the published table itself reports more
/// solutions for the larger constraint set.
pub fn published_monotonicity_violations() -> Vec<String> {
    let names = ["1", "2", "3", "4", "4'"];
    let label_of = |mask: u32| {
        let selected: Vec<&str> = (0..names.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| names[i])
            .collect();
        if selected.is_empty() {
            "none".to_string()
        } else {
            selected.join(", ")
        }
    };
    let mut out = Vec::new();
    for a in 0u32..32 {
        for b in 0u32..32 {
            if a != b && (a & b) == a {
                let (la, lb) = (label_of(a), label_of(b));
                if let (Some(sa), Some(sb)) = (published_solutions(&la), published_solutions(&lb)) {
                    if sb > sa {
                        out.push(format!(
                            "published table: {{{lb}}} -> {sb} exceeds {{{la}}} -> {sa}"
                        ));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ReproReport {
    /// `constraints,visited_nodes,solutions,published_solutions,delta`
    pub csv: String,
    pub rows: usize,
    /// Monotonicity violations inside the published table itself.
    pub published_violations: Vec<String>,
    /// Monotonicity violations in our own results (expected empty).
    pub our_violations: Vec<String>,
}

/// Run the full 32-subset grid at depth 5, pipelining, permutation filter
/// off, and compare solution counts against the published table. Output is
/// byte-stable across runs on the same build.
pub fn repro_table2(model: &DomainModel) -> Result<ReproReport, SynthesisError> {
    let named = constraints(model);
    let base: SynthesisProblem = synthesis::derive_problem(
        model,
        "ReadDNASequence",
        "Viewer",
        Formula::True,
        5,
        crate::domain::UniverseMode::Pipelining,
    )
    .map_err(SynthesisError::Domain)?;
    let report = synthesis::run_constraint_grid(model, &base, &named)?;
    let mut csv = String::from("constraints,visited_nodes,solutions,published_solutions,delta\n");
    for row in &report.rows {
        let published = published_solutions(&row.label);
        let (published_s, delta) = match published {
            Some(p) => (p.to_string(), (row.solutions as i64 - p as i64).to_string()),
            None => ("".to_string(), "".to_string()),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{published_s},{delta}",
            csv_field(&row.label),
            row.visited_nodes,
            row.solutions
        );
    }
    Ok(ReproReport {
        csv,
        rows: report.rows.len(),
        published_violations: published_monotonicity_violations(),
        our_violations: report.monotonicity_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_domain_loads_and_validates() {
        let model = domain();
        assert_eq!(model.services.len(), 22);
        // warnings are fine, the load itself must succeed
        let _ = model.validate();
    }

    #[test]
    fn bundled_subsumption_facts() {
        let model = domain();
        let t = &model.type_taxonomy;
        assert!(!t.is_subsumed("data:multiple_sequence_alignment", "data:sequence").unwrap());
        assert!(t.is_subsumed("data:dna_sequence", "data:sequence").unwrap());
        assert!(t.is_subsumed("data:phylogenetic_tree_image", "data:image").unwrap());
        assert!(!t.is_subsumed("data:sequence", "data:dna_sequence").unwrap());
    }

    #[test]
    fn all_five_constraints_parse() {
        let model = domain();
        let named = constraints(&model);
        assert_eq!(named.len(), 5);
        let names: Vec<&str> = named.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["1", "2", "3", "4", "4'"]);
    }

    #[test]
    fn published_table_is_non_monotone_in_known_rows() {
        let violations = published_monotonicity_violations();
        assert!(violations
            .iter()
            .any(|v| v.contains("{1, 2, 3, 4'}") && v.contains("{1, 3, 4'}")));
    }
}
