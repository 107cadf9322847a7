//! Enumeration of constraint-satisfying, type-consistent service sequences.
//!
//! The search runs over the on-the-fly product of the configuration
//! universe and the constraint formula: nodes are (state, residual
//! obligation) pairs, deepened iteratively up to the depth bound. States
//! are interned into bitmasks so applicability and successor computation
//! are a few bit operations per step.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde_json::json;
use thiserror::Error;

use crate::domain::{DomainError, DomainModel, TypeState, UniverseMode};
use crate::ontology::TermRef;
use crate::sltl::{self, Formula, ServiceConstraint};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("state space needs {0} distinct terms; at most 128 supported")]
    TooManyStateTerms(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Everything the engine needs besides the domain model itself.
#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    pub start: TypeState,
    pub goal: Vec<TermRef>,
    pub constraint: Formula,
    pub max_depth: usize,
    pub mode: UniverseMode,
    pub filter_permutations: bool,
    pub allow_empty_solution: bool,
    pub max_solutions: u64,
    pub max_visited: u64,
}

pub const DEFAULT_MAX_SOLUTIONS: u64 = 1_000_000;
pub const DEFAULT_MAX_VISITED: u64 = 10_000_000;

impl SynthesisProblem {
    pub fn new(start: TypeState, goal: Vec<TermRef>, max_depth: usize, mode: UniverseMode) -> Self {
        SynthesisProblem {
            start,
            goal,
            constraint: Formula::True,
            max_depth,
            mode,
            filter_permutations: false,
            allow_empty_solution: false,
            max_solutions: DEFAULT_MAX_SOLUTIONS,
            max_visited: DEFAULT_MAX_VISITED,
        }
    }

    pub fn with_constraint(mut self, constraint: Formula) -> Self {
        self.constraint = constraint;
        self
    }
}

/// Build a problem from the two fixed endpoints of a loose branch: the
/// source's outputs become the start state, the sink's inputs the goal.
pub fn derive_problem(
    model: &DomainModel,
    source_service: &str,
    sink_service: &str,
    constraint: Formula,
    max_depth: usize,
    mode: UniverseMode,
) -> Result<SynthesisProblem, DomainError> {
    let source = model.service(source_service)?;
    let sink = model.service(sink_service)?;
    let start: TypeState = source.outputs.iter().cloned().collect();
    let goal = sink.inputs.clone();
    Ok(SynthesisProblem::new(start, goal, max_depth, mode).with_constraint(constraint))
}

/// One concretization: the chosen services plus the induced state trace
/// (interned; resolve through the owning [`SynthesisResult`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub services: Vec<u16>,
    pub states: Vec<u128>,
}

#[derive(Debug, Clone, Default)]
pub struct DepthStats {
    pub depth: usize,
    pub visited: u64,
    pub found: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub visited_nodes: u64,
    pub solutions_found: u64,
    pub per_depth: Vec<DepthStats>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
    pub truncated: bool,
    service_names: Vec<String>,
    terms: Vec<TermRef>,
}

impl SynthesisResult {
    pub fn service_names(&self, solution: &Solution) -> Vec<&str> {
        solution
            .services
            .iter()
            .map(|&s| self.service_names[s as usize].as_str())
            .collect()
    }

    pub fn trace(&self, solution: &Solution) -> Vec<TypeState> {
        solution
            .states
            .iter()
            .map(|&mask| {
                self.terms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1u128 << i) != 0)
                    .map(|(_, t)| t.clone())
                    .collect()
            })
            .collect()
    }

    /// Keep one representative per multiset of service names: the
    /// canonically least sequence of each permutation class.
    pub fn filter_permutations(&mut self) {
        self.solutions = filter_permutations(std::mem::take(&mut self.solutions));
    }

    /// Result document per the on-disk schema.
    pub fn to_json(&self, problem: &SynthesisProblem) -> serde_json::Value {
        json!({
            "problem": {
                "start": problem.start.iter().map(|t| t.id.clone()).collect::<Vec<_>>(),
                "goal": problem.goal.iter().map(|t| t.id.clone()).collect::<Vec<_>>(),
                "constraint": problem.constraint.to_string(),
                "max_depth": problem.max_depth,
                "mode": problem.mode,
                "filter_permutations": problem.filter_permutations,
                "allow_empty_solution": problem.allow_empty_solution,
            },
            "solutions": self.solutions.iter().map(|s| json!({
                "services": self.service_names(s),
                "trace": self.trace(s).iter().map(|state| {
                    state.iter().map(|t| t.id.clone()).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "stats": {
                "visited_nodes": self.stats.visited_nodes,
                "solutions_found": self.stats.solutions_found,
                "per_depth": self.stats.per_depth.iter().map(|d| json!({
                    "depth": d.depth, "visited": d.visited, "found": d.found,
                })).collect::<Vec<_>>(),
                "wall_time_ms": self.stats.wall_time.as_millis() as u64,
            },
            "truncated": self.truncated,
        })
    }
}

/// Permutation filter on interned solutions. Solutions sharing a service
/// multiset have equal length, so the first one in canonical order is the
/// representative.
pub fn filter_permutations(solutions: Vec<Solution>) -> Vec<Solution> {
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    solutions
        .into_iter()
        .filter(|s| {
            let mut key = s.services.clone();
            key.sort_unstable();
            seen.insert(key)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Interned domain index

struct Index {
    terms: Vec<TermRef>,
    service_names: Vec<String>,
    svc_inputs: Vec<Vec<u128>>,
    svc_outputs: Vec<u128>,
    /// Canonical rank of each service: position in name-sorted order.
    name_rank: Vec<u32>,
    atom_mask: HashMap<TermRef, u128>,
    sc_sat: HashMap<TermRef, Vec<bool>>,
    goal_masks: Vec<u128>,
    start_mask: u128,
}

impl Index {
    fn build(model: &DomainModel, problem: &SynthesisProblem) -> Result<Index, SynthesisError> {
        let mut terms: Vec<TermRef> = Vec::new();
        let mut pos: HashMap<TermRef, usize> = HashMap::new();
        let intern = |t: &TermRef, terms: &mut Vec<TermRef>, pos: &mut HashMap<TermRef, usize>| {
            if !pos.contains_key(t) {
                pos.insert(t.clone(), terms.len());
                terms.push(t.clone());
            }
        };
        for svc in &model.services {
            for o in &svc.outputs {
                intern(o, &mut terms, &mut pos);
            }
        }
        for t in &problem.start {
            intern(t, &mut terms, &mut pos);
        }
        if terms.len() > 128 {
            return Err(SynthesisError::TooManyStateTerms(terms.len()));
        }

        let satisfier_mask = |required: &TermRef| -> u128 {
            terms
                .iter()
                .enumerate()
                .filter(|(_, provided)| {
                    model
                        .type_taxonomy
                        .ref_satisfies(provided, required)
                        .unwrap_or(false)
                })
                .fold(0u128, |acc, (i, _)| acc | (1u128 << i))
        };

        let svc_inputs: Vec<Vec<u128>> = model
            .services
            .iter()
            .map(|s| s.inputs.iter().map(&satisfier_mask).collect())
            .collect();
        let svc_outputs: Vec<u128> = model
            .services
            .iter()
            .map(|s| s.outputs.iter().fold(0u128, |acc, o| acc | (1u128 << pos[o])))
            .collect();

        let service_names: Vec<String> = model.services.iter().map(|s| s.name.clone()).collect();
        let mut order: Vec<usize> = (0..service_names.len()).collect();
        order.sort_by(|&a, &b| service_names[a].cmp(&service_names[b]));
        let mut name_rank = vec![0u32; service_names.len()];
        for (rank, &svc) in order.iter().enumerate() {
            name_rank[svc] = rank as u32;
        }

        let mut type_atoms: BTreeSet<TermRef> = BTreeSet::new();
        let mut sc_atoms: BTreeSet<TermRef> = BTreeSet::new();
        collect_atoms(&problem.constraint, &mut type_atoms, &mut sc_atoms);
        type_atoms.extend(problem.goal.iter().cloned());

        let atom_mask: HashMap<TermRef, u128> = type_atoms
            .iter()
            .map(|t| (t.clone(), satisfier_mask(t)))
            .collect();
        let sc_sat: HashMap<TermRef, Vec<bool>> = sc_atoms
            .iter()
            .map(|atom| {
                let sat = model
                    .services
                    .iter()
                    .map(|svc| match atom.kind {
                        crate::ontology::TermKind::Instance => svc.name == atom.id,
                        crate::ontology::TermKind::Class => model
                            .service_taxonomy
                            .satisfies(&TermRef::instance(&svc.name), &atom.id)
                            .unwrap_or(false),
                    })
                    .collect();
                (atom.clone(), sat)
            })
            .collect();

        let goal_masks: Vec<u128> = problem.goal.iter().map(|g| atom_mask[g]).collect();
        let start_mask = problem
            .start
            .iter()
            .fold(0u128, |acc, t| acc | (1u128 << pos[t]));

        Ok(Index {
            terms,
            service_names,
            svc_inputs,
            svc_outputs,
            name_rank,
            atom_mask,
            sc_sat,
            goal_masks,
            start_mask,
        })
    }

    fn applicable(&self, svc: usize, state: u128) -> bool {
        self.svc_inputs[svc].iter().all(|&m| state & m != 0)
    }

    fn successor(&self, svc: usize, state: u128, mode: UniverseMode) -> u128 {
        match mode {
            UniverseMode::Pipelining => self.svc_outputs[svc],
            UniverseMode::Accumulating => state | self.svc_outputs[svc],
        }
    }

    fn goal_holds(&self, state: u128) -> bool {
        self.goal_masks.iter().all(|&m| state & m != 0)
    }

    fn progress(&self, f: &Formula, state: u128, svc: usize) -> Formula {
        sltl::progress_impl(
            f,
            &|atom: &TermRef| self.atom_mask[atom] & state != 0,
            &|atom: &TermRef| self.sc_sat[atom][svc],
        )
    }

    fn accepts_end(&self, f: &Formula, state: u128) -> bool {
        sltl::accepts_end_impl(f, &|atom: &TermRef| self.atom_mask[atom] & state != 0)
    }

    fn canonical_sort(&self, solutions: &mut [Solution]) {
        solutions.sort_by(|a, b| {
            a.services.len().cmp(&b.services.len()).then_with(|| {
                let ra = a.services.iter().map(|&s| self.name_rank[s as usize]);
                let rb = b.services.iter().map(|&s| self.name_rank[s as usize]);
                ra.cmp(rb)
            })
        });
    }
}

fn collect_atoms(f: &Formula, type_atoms: &mut BTreeSet<TermRef>, sc_atoms: &mut BTreeSet<TermRef>) {
    fn collect_sc(sc: &ServiceConstraint, sc_atoms: &mut BTreeSet<TermRef>) {
        match sc {
            ServiceConstraint::True => {}
            ServiceConstraint::Atom(t) => {
                sc_atoms.insert(t.clone());
            }
            ServiceConstraint::Not(a) => collect_sc(a, sc_atoms),
            ServiceConstraint::And(a, b) | ServiceConstraint::Or(a, b) => {
                collect_sc(a, sc_atoms);
                collect_sc(b, sc_atoms);
            }
        }
    }
    match f {
        Formula::True | Formula::False => {}
        Formula::TypeAtom(t) => {
            type_atoms.insert(t.clone());
        }
        Formula::Not(g) | Formula::Finally(g) | Formula::Globally(g) => {
            collect_atoms(g, type_atoms, sc_atoms)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            collect_atoms(a, type_atoms, sc_atoms);
            collect_atoms(b, type_atoms, sc_atoms);
        }
        Formula::Diamond(sc, g) | Formula::Box_(sc, g) => {
            collect_sc(sc, sc_atoms);
            collect_atoms(g, type_atoms, sc_atoms);
        }
    }
}

// ---------------------------------------------------------------------------
// Search

struct Search<'a> {
    idx: &'a Index,
    problem: &'a SynthesisProblem,
    solutions: Vec<Solution>,
    visited_total: u64,
    visited_round: u64,
    found_round: u64,
    truncated: bool,
    stopped: bool,
}

impl<'a> Search<'a> {
    fn new(idx: &'a Index, problem: &'a SynthesisProblem) -> Self {
        Search {
            idx,
            problem,
            solutions: Vec::new(),
            visited_total: 0,
            visited_round: 0,
            found_round: 0,
            truncated: false,
            stopped: false,
        }
    }

    fn visit(&mut self) -> bool {
        self.visited_total += 1;
        self.visited_round += 1;
        if self.visited_total >= self.problem.max_visited {
            self.truncated = true;
            self.stopped = true;
            return false;
        }
        true
    }

    fn emit(&mut self, seq: &[u16], states: &[u128]) {
        self.solutions.push(Solution {
            services: seq.to_vec(),
            states: states.to_vec(),
        });
        self.found_round += 1;
        if self.solutions.len() as u64 >= self.problem.max_solutions {
            self.truncated = true;
            self.stopped = true;
        }
    }

    /// Product-node expansion for one deepening round. Solutions are only
    /// emitted at exactly the round's target length, so each sequence is
    /// counted once, in the round equal to its length.
    fn dfs(
        &mut self,
        state: u128,
        residual: &Formula,
        len: usize,
        target: usize,
        seq: &mut Vec<u16>,
        states: &mut Vec<u128>,
    ) {
        if self.stopped || !self.visit() {
            return;
        }
        if len == target {
            if self.idx.goal_holds(state) && self.idx.accepts_end(residual, state) {
                self.emit(seq, states);
            }
            return;
        }
        for svc in 0..self.idx.service_names.len() {
            if self.stopped {
                return;
            }
            if !self.idx.applicable(svc, state) {
                continue;
            }
            let next_residual = self.idx.progress(residual, state, svc);
            if next_residual == Formula::False {
                continue;
            }
            let next_state = self.idx.successor(svc, state, self.problem.mode);
            seq.push(svc as u16);
            states.push(next_state);
            self.dfs(next_state, &next_residual, len + 1, target, seq, states);
            seq.pop();
            states.pop();
        }
    }

    /// Plain exhaustive expansion without progression; the brute-force
    /// oracle for the progression-based search.
    fn dfs_universe(
        &mut self,
        state: u128,
        len: usize,
        min_len: usize,
        per_depth: &mut Vec<DepthStats>,
        seq: &mut Vec<u16>,
        states: &mut Vec<u128>,
    ) {
        if self.stopped || !self.visit() {
            return;
        }
        per_depth[len].visited += 1;
        if len >= min_len && self.idx.goal_holds(state) {
            self.emit(seq, states);
            per_depth[len].found += 1;
        }
        if len == self.problem.max_depth {
            return;
        }
        for svc in 0..self.idx.service_names.len() {
            if self.stopped {
                return;
            }
            if !self.idx.applicable(svc, state) {
                continue;
            }
            let next_state = self.idx.successor(svc, state, self.problem.mode);
            seq.push(svc as u16);
            states.push(next_state);
            self.dfs_universe(next_state, len + 1, min_len, per_depth, seq, states);
            seq.pop();
            states.pop();
        }
    }
}

fn finish(
    idx: &Index,
    problem: &SynthesisProblem,
    mut search_solutions: Vec<Solution>,
    stats: SearchStats,
    truncated: bool,
) -> SynthesisResult {
    idx.canonical_sort(&mut search_solutions);
    if problem.filter_permutations {
        search_solutions = filter_permutations(search_solutions);
    }
    SynthesisResult {
        solutions: search_solutions,
        stats,
        truncated,
        service_names: idx.service_names.clone(),
        terms: idx.terms.clone(),
    }
}

/// Iterative-deepening depth-first search over the product of the
/// configuration universe and the constraint formula.
pub fn synthesize(
    model: &DomainModel,
    problem: &SynthesisProblem,
) -> Result<SynthesisResult, SynthesisError> {
    let started = Instant::now();
    let idx = Index::build(model, problem)?;
    let mut search = Search::new(&idx, problem);
    let mut per_depth = Vec::new();
    let min_len = if problem.allow_empty_solution { 0 } else { 1 };
    for target in min_len..=problem.max_depth {
        if search.stopped {
            break;
        }
        search.visited_round = 0;
        search.found_round = 0;
        let mut seq = Vec::with_capacity(target);
        let mut states = vec![idx.start_mask];
        let residual = problem.constraint.clone();
        search.dfs(idx.start_mask, &residual, 0, target, &mut seq, &mut states);
        per_depth.push(DepthStats {
            depth: target,
            visited: search.visited_round,
            found: search.found_round,
        });
    }
    let stats = SearchStats {
        visited_nodes: search.visited_total,
        solutions_found: search.solutions.len() as u64,
        per_depth,
        wall_time: started.elapsed(),
    };
    let truncated = search.truncated;
    let solutions = std::mem::take(&mut search.solutions);
    Ok(finish(&idx, problem, solutions, stats, truncated))
}

/// Exhaustively enumerate the configuration universe up to the depth bound,
/// ignoring the problem's constraint formula entirely.
pub fn enumerate_universe(
    model: &DomainModel,
    problem: &SynthesisProblem,
) -> Result<SynthesisResult, SynthesisError> {
    let started = Instant::now();
    let idx = Index::build(model, problem)?;
    let mut search = Search::new(&idx, problem);
    let mut per_depth: Vec<DepthStats> = (0..=problem.max_depth)
        .map(|d| DepthStats {
            depth: d,
            ..DepthStats::default()
        })
        .collect();
    let min_len = if problem.allow_empty_solution { 0 } else { 1 };
    let mut seq = Vec::with_capacity(problem.max_depth);
    let mut states = vec![idx.start_mask];
    search.dfs_universe(idx.start_mask, 0, min_len, &mut per_depth, &mut seq, &mut states);
    let stats = SearchStats {
        visited_nodes: search.visited_total,
        solutions_found: search.solutions.len() as u64,
        per_depth,
        wall_time: started.elapsed(),
    };
    let truncated = search.truncated;
    let solutions = std::mem::take(&mut search.solutions);
    Ok(finish(&idx, problem, solutions, stats, truncated))
}

/// Replay a solution's service sequence through the domain semantics,
/// checking executability, the goal and the constraint. Returns the
/// induced state trace.
pub fn replay(
    model: &DomainModel,
    problem: &SynthesisProblem,
    services: &[&str],
) -> Result<Vec<TypeState>, String> {
    let mut states = vec![problem.start.clone()];
    let mut actions = Vec::new();
    for name in services {
        let svc = model.service(name).map_err(|e| e.to_string())?;
        let current = states.last().unwrap();
        if !model.applicable(current, svc) {
            return Err(format!("service '{name}' not applicable"));
        }
        let next = model
            .successor(current, svc, problem.mode)
            .map_err(|e| e.to_string())?;
        states.push(next);
        actions.push(name.to_string());
    }
    let last = states.last().unwrap();
    for goal in &problem.goal {
        let ok = last
            .iter()
            .any(|t| model.type_taxonomy.ref_satisfies(t, goal).unwrap_or(false));
        if !ok {
            return Err(format!("goal '{}' unsatisfied in final state", goal.id));
        }
    }
    let trace = sltl::Trace::new(states.clone(), actions);
    match sltl::eval_trace(&problem.constraint, model, &trace, 0) {
        Ok(true) => Ok(states),
        Ok(false) => Err("constraint formula unsatisfied".into()),
        Err(e) => Err(e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Constraint grid

#[derive(Debug, Clone)]
pub struct NamedConstraint {
    pub name: String,
    pub formula: Formula,
}

#[derive(Debug, Clone)]
pub struct GridRow {
    pub label: String,
    /// Bitmask over the named-constraint list, identifying the subset.
    pub subset: u32,
    pub visited_nodes: u64,
    pub solutions: u64,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub monotonicity_violations: Vec<String>,
}

impl GridReport {
    /// CSV with header `constraints,visited_nodes,solutions`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("constraints,visited_nodes,solutions\n");
        for row in &self.rows {
            let label = csv_field(&row.label);
            let _ = writeln!(out, "{label},{},{}", row.visited_nodes, row.solutions);
        }
        out
    }
}

pub(crate) fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn subset_label(names: &[&str]) -> String {
    if names.is_empty() {
        "none".to_string()
    } else {
        names.join(", ")
    }
}

/// All subsets of the named constraints in canonical order: by size, then
/// lexicographically by constraint position.
pub fn grid_subsets(n: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    let indices = |m: u32| -> Vec<u32> { (0..n as u32).filter(|i| m & (1 << i) != 0).collect() };
    masks.sort_by_key(|&m| (m.count_ones(), indices(m)));
    masks
}

/// Run `synthesize` once per constraint subset, check solution-set
/// monotonicity across subset inclusion, and report counts.
pub fn run_constraint_grid(
    model: &DomainModel,
    base: &SynthesisProblem,
    named: &[NamedConstraint],
) -> Result<GridReport, SynthesisError> {
    let masks = grid_subsets(named.len());
    let mut rows = Vec::with_capacity(masks.len());
    let mut solution_sets: HashMap<u32, HashSet<Vec<u16>>> = HashMap::new();
    for &mask in &masks {
        let selected: Vec<&NamedConstraint> = (0..named.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &named[i])
            .collect();
        let mut problem = base.clone();
        problem.constraint = sltl::conjoin(selected.iter().map(|c| c.formula.clone()));
        let result = synthesize(model, &problem)?;
        solution_sets.insert(
            mask,
            result.solutions.iter().map(|s| s.services.clone()).collect(),
        );
        rows.push(GridRow {
            label: subset_label(&selected.iter().map(|c| c.name.as_str()).collect::<Vec<_>>()),
            subset: mask,
            visited_nodes: result.stats.visited_nodes,
            solutions: result.solutions.len() as u64,
        });
    }
    let mut monotonicity_violations = Vec::new();
    for a in &rows {
        for b in &rows {
            if a.subset != b.subset && (a.subset & b.subset) == a.subset {
                // a ⊂ b: b's solutions must be a subset of a's
                let sub = &solution_sets[&b.subset];
                let sup = &solution_sets[&a.subset];
                if !sub.is_subset(sup) {
                    monotonicity_violations.push(format!(
                        "solutions({{{}}}) ⊄ solutions({{{}}})",
                        b.label, a.label
                    ));
                }
            }
        }
    }
    Ok(GridReport {
        rows,
        monotonicity_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn base_problem(model: &DomainModel, depth: usize, mode: UniverseMode) -> SynthesisProblem {
        derive_problem(model, "ReadDNASequence", "Viewer", Formula::True, depth, mode).unwrap()
    }

    #[test]
    fn derive_problem_endpoints() {
        let model = bundled::domain();
        let p = base_problem(&model, 5, UniverseMode::Pipelining);
        assert_eq!(p.start, [TermRef::class("data:dna_sequence")].into());
        assert_eq!(p.goal, vec![TermRef::class("data:data")]);
        let rf = derive_problem(
            &model,
            "ReadFile",
            "WriteFile",
            Formula::True,
            5,
            UniverseMode::Pipelining,
        )
        .unwrap();
        assert_eq!(rf.start, [TermRef::class("data:data")].into());
        assert_eq!(rf.goal, vec![TermRef::class("data:data")]);
        assert!(matches!(
            derive_problem(&model, "Nope", "Viewer", Formula::True, 5, UniverseMode::Pipelining),
            Err(DomainError::UnknownService(_))
        ));
    }

    #[test]
    fn depth_one_universe_has_ten_solutions() {
        // Every no-input service is applicable anywhere, and anything
        // satisfies the `Data` goal, so the two readers count too.
        let model = bundled::domain();
        let problem = base_problem(&model, 1, UniverseMode::Pipelining);
        let result = enumerate_universe(&model, &problem).unwrap();
        let mut names: Vec<String> = result
            .solutions
            .iter()
            .map(|s| result.service_names(s).join(" "))
            .collect();
        names.sort();
        assert_eq!(
            names,
            vec![
                "ClustalW", "ClustalW2", "KAlign", "Mafft", "Muscle", "PhyML_DNA",
                "ReadDNASequence", "ReadFile", "TCoffee", "WUBlast"
            ]
        );
    }

    #[test]
    fn depth_zero_with_empty_allowed() {
        let model = bundled::domain();
        let mut problem = base_problem(&model, 0, UniverseMode::Pipelining);
        problem.allow_empty_solution = true;
        let result = enumerate_universe(&model, &problem).unwrap();
        assert_eq!(result.solutions.len(), 1);
        assert!(result.solutions[0].services.is_empty());
        // and via the progression-based search too
        let result = synthesize(&model, &problem).unwrap();
        assert_eq!(result.solutions.len(), 1);
    }

    #[test]
    fn false_constraint_visits_only_roots() {
        let model = bundled::domain();
        let mut problem = base_problem(&model, 5, UniverseMode::Pipelining);
        problem.constraint = Formula::False;
        let result = synthesize(&model, &problem).unwrap();
        assert_eq!(result.solutions.len(), 0);
        // one root expansion per deepening round
        assert_eq!(result.stats.visited_nodes, 5);
    }

    #[test]
    fn empty_domain_has_no_solutions() {
        let doc = r#"{
            "service_taxonomy": {"root": "op", "classes": [{"id":"op","name":"Operation","parents":[]}]},
            "type_taxonomy": {"root": "data", "classes": [{"id":"data","name":"Data","parents":[]}]},
            "services": []
        }"#;
        let model = DomainModel::from_json_str(doc, None).unwrap();
        let problem = SynthesisProblem::new(
            [TermRef::class("data")].into(),
            vec![TermRef::class("data")],
            5,
            UniverseMode::Pipelining,
        );
        let result = enumerate_universe(&model, &problem).unwrap();
        assert!(result.solutions.is_empty());
    }

    #[test]
    fn anchor_row_c1_c4_is_24_solutions() {
        let model = bundled::domain();
        let named = bundled::constraints(&model);
        let mut problem = base_problem(&model, 5, UniverseMode::Pipelining);
        problem.constraint = sltl::conjoin(
            named
                .iter()
                .filter(|c| c.name == "1" || c.name == "4")
                .map(|c| c.formula.clone()),
        );
        let result = synthesize(&model, &problem).unwrap();
        assert_eq!(result.solutions.len(), 24);
        let gblocks_enders = result
            .solutions
            .iter()
            .filter(|s| result.service_names(s).last() == Some(&"Gblocks"))
            .count();
        assert_eq!(gblocks_enders, 12);
    }

    #[test]
    fn anchor_row_c1_c4p_is_phyml_dna() {
        let model = bundled::domain();
        let named = bundled::constraints(&model);
        let mut problem = base_problem(&model, 5, UniverseMode::Pipelining);
        problem.constraint = sltl::conjoin(
            named
                .iter()
                .filter(|c| c.name == "1" || c.name == "4'")
                .map(|c| c.formula.clone()),
        );
        let result = synthesize(&model, &problem).unwrap();
        assert_eq!(result.solutions.len(), 1);
        assert_eq!(result.service_names(&result.solutions[0]), vec!["PhyML_DNA"]);
    }

    #[test]
    fn filter_permutations_keeps_least_representative() {
        let a = Solution { services: vec![0, 1], states: vec![0, 0, 0] };
        let b = Solution { services: vec![1, 0], states: vec![0, 0, 0] };
        let c = Solution { services: vec![0, 0, 1], states: vec![0, 0, 0, 0] };
        let d = Solution { services: vec![0, 1, 0], states: vec![0, 0, 0, 0] };
        let kept = filter_permutations(vec![a.clone(), b, c.clone(), d]);
        assert_eq!(kept, vec![a, c]);
    }

    #[test]
    fn depth_monotonicity() {
        let model = bundled::domain();
        let named = bundled::constraints(&model);
        let c1 = named.iter().find(|c| c.name == "1").unwrap().formula.clone();
        let mut shallow = base_problem(&model, 3, UniverseMode::Pipelining);
        shallow.constraint = c1.clone();
        let mut deep = base_problem(&model, 4, UniverseMode::Pipelining);
        deep.constraint = c1;
        let shallow_result = synthesize(&model, &shallow).unwrap();
        let deep_result = synthesize(&model, &deep).unwrap();
        let shallow_set: HashSet<Vec<u16>> = shallow_result
            .solutions
            .iter()
            .map(|s| s.services.clone())
            .collect();
        let deep_set: HashSet<Vec<u16>> = deep_result
            .solutions
            .iter()
            .map(|s| s.services.clone())
            .collect();
        assert!(shallow_set.is_subset(&deep_set));
    }

    #[test]
    fn solutions_replay() {
        let model = bundled::domain();
        let named = bundled::constraints(&model);
        let mut problem = base_problem(&model, 5, UniverseMode::Pipelining);
        problem.constraint = sltl::conjoin(
            named
                .iter()
                .filter(|c| c.name == "1" || c.name == "4")
                .map(|c| c.formula.clone()),
        );
        let result = synthesize(&model, &problem).unwrap();
        for solution in &result.solutions {
            let names = result.service_names(solution);
            let states = replay(&model, &problem, &names).expect("solution must replay");
            assert_eq!(states, result.trace(solution));
        }
    }

    #[test]
    fn grid_has_32_rows_and_subset_pairs_hold() {
        let model = bundled::domain();
        let named = bundled::constraints(&model);
        let problem = base_problem(&model, 3, UniverseMode::Pipelining);
        let report = run_constraint_grid(&model, &problem, &named).unwrap();
        assert_eq!(report.rows.len(), 32);
        assert!(report.monotonicity_violations.is_empty());
        assert_eq!(report.rows[0].label, "none");
        let csv = report.to_csv();
        assert!(csv.starts_with("constraints,visited_nodes,solutions\n"));
        assert_eq!(csv.lines().count(), 33);
    }

    #[test]
    fn truncation_sets_flag() {
        let model = bundled::domain();
        let mut problem = base_problem(&model, 5, UniverseMode::Accumulating);
        problem.max_visited = 100;
        let result = synthesize(&model, &problem).unwrap();
        assert!(result.truncated);
        assert!(result.stats.visited_nodes <= 100);
    }
}
