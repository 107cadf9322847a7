//! OBO-subset parsing, rooted taxonomies and subsumption queries.
//!
//! A [`Taxonomy`] is a rooted is-a DAG of classes plus a set of concrete
//! instances attached to one or more classes. Subsumption is plain
//! reflexive-transitive reachability along the is-a links.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate term id '{id}'")]
    DuplicateTerm { id: String, line: usize },
    #[error("term '{id}' has dangling is_a reference to '{parent}'")]
    DanglingIsA { id: String, parent: String },
    #[error("root term '{0}' not found")]
    RootMissing(String),
    #[error("cycle detected involving class '{0}'")]
    Cycle(String),
    #[error("unknown class '{0}'")]
    UnknownClass(String),
    #[error("unknown term '{0}'")]
    UnknownTerm(String),
    #[error("duplicate instance id '{0}'")]
    DuplicateInstance(String),
    #[error("instance id '{0}' collides with a class id")]
    InstanceClassCollision(String),
    #[error("name '{0}' is ambiguous ({1} classes carry it)")]
    AmbiguousName(String, usize),
    #[error("invalid taxonomy document: {0}")]
    Document(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One `[Term]` stanza as parsed from an OBO file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceTerm {
    pub id: String,
    pub name: String,
    pub parents: Vec<String>,
}

/// The interpreted content of an OBO file: all non-obsolete terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OntologySource {
    pub terms: Vec<SourceTerm>,
}

impl OntologySource {
    pub fn term(&self, id: &str) -> Option<&SourceTerm> {
        self.terms.iter().find(|t| t.id == id)
    }
}

/// Parse OBO 1.2-style stanza text. Only `[Term]` stanzas are interpreted,
/// and within them only `id:`, `name:`, `is_a:` and `is_obsolete:`; every
/// other tag and stanza kind is skipped. Obsolete terms are dropped, along
/// with any is_a links pointing at them.
pub fn parse_obo(text: &str) -> Result<OntologySource, OntologyError> {
    struct Pending {
        start_line: usize,
        id: Option<(String, usize)>,
        name: String,
        parents: Vec<String>,
        obsolete: bool,
    }

    let mut terms: Vec<SourceTerm> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut obsolete_ids: HashSet<String> = HashSet::new();
    let mut current: Option<Pending> = None;

    let flush = |p: Pending,
                     terms: &mut Vec<SourceTerm>,
                     seen: &mut HashMap<String, usize>,
                     obsolete_ids: &mut HashSet<String>|
     -> Result<(), OntologyError> {
        let (id, id_line) = p.id.ok_or(OntologyError::Parse {
            line: p.start_line,
            msg: "[Term] stanza without id".into(),
        })?;
        if seen.insert(id.clone(), id_line).is_some() {
            return Err(OntologyError::DuplicateTerm { id, line: id_line });
        }
        if p.obsolete {
            obsolete_ids.insert(id);
        } else {
            terms.push(SourceTerm {
                id,
                name: p.name,
                parents: p.parents,
            });
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') {
            if let Some(p) = current.take() {
                flush(p, &mut terms, &mut seen, &mut obsolete_ids)?;
            }
            if line == "[Term]" {
                current = Some(Pending {
                    start_line: lineno,
                    id: None,
                    name: String::new(),
                    parents: Vec::new(),
                    obsolete: false,
                });
            }
            continue;
        }
        let Some(p) = current.as_mut() else { continue };
        let Some((tag, value)) = line.split_once(':') else {
            return Err(OntologyError::Parse {
                line: lineno,
                msg: format!("expected 'tag: value', got '{line}'"),
            });
        };
        let value = strip_comment(value).trim();
        match tag.trim() {
            "id" => {
                if value.is_empty() {
                    return Err(OntologyError::Parse {
                        line: lineno,
                        msg: "empty id".into(),
                    });
                }
                p.id = Some((value.to_string(), lineno));
            }
            "name" => p.name = value.to_string(),
            "is_a" => {
                if value.is_empty() {
                    return Err(OntologyError::Parse {
                        line: lineno,
                        msg: "empty is_a target".into(),
                    });
                }
                p.parents.push(value.to_string());
            }
            "is_obsolete" => p.obsolete = value.starts_with("true"),
            _ => {}
        }
    }
    if let Some(p) = current.take() {
        flush(p, &mut terms, &mut seen, &mut obsolete_ids)?;
    }

    // Links to obsolete terms vanish with the term; anything else must resolve.
    for term in &mut terms {
        term.parents.retain(|p| !obsolete_ids.contains(p));
        for parent in &term.parents {
            if !seen.contains_key(parent) {
                return Err(OntologyError::DanglingIsA {
                    id: term.id.clone(),
                    parent: parent.clone(),
                });
            }
        }
    }
    Ok(OntologySource { terms })
}

fn strip_comment(value: &str) -> &str {
    match value.find('!') {
        Some(pos) => &value[..pos],
        None => value,
    }
}

/// Render a source back to OBO text (test aid; parse∘render is identity).
pub fn to_obo_string(source: &OntologySource) -> String {
    let mut out = String::from("format-version: 1.2\n");
    for term in &source.terms {
        out.push_str("\n[Term]\n");
        out.push_str(&format!("id: {}\n", term.id));
        if !term.name.is_empty() {
            out.push_str(&format!("name: {}\n", term.name));
        }
        for p in &term.parents {
            out.push_str(&format!("is_a: {}\n", p));
        }
    }
    out
}

/// Whether an id names a class or a concrete instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Class,
    Instance,
}

/// Uniform handle for a class or instance of one taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermRef {
    pub id: String,
    pub kind: TermKind,
}

impl TermRef {
    pub fn class(id: impl Into<String>) -> Self {
        TermRef {
            id: id.into(),
            kind: TermKind::Class,
        }
    }

    pub fn instance(id: impl Into<String>) -> Self {
        TermRef {
            id: id.into(),
            kind: TermKind::Instance,
        }
    }
}

impl fmt::Display for TermRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyClass {
    pub id: String,
    pub name: String,
    pub parents: Vec<String>,
}

/// Rooted class hierarchy with instance-of links.
///
/// Immutable once built; all query methods take `&self`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    root: String,
    classes: BTreeMap<String, TaxonomyClass>,
    instances: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaxonomyDoc {
    root: String,
    classes: Vec<TaxonomyClass>,
    instances: Vec<InstanceDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    id: String,
    member_of: Vec<String>,
}

impl Taxonomy {
    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn is_class(&self, id: &str) -> bool {
        self.classes.contains_key(id)
    }

    pub fn is_instance(&self, id: &str) -> bool {
        self.instances.contains_key(id)
    }

    pub fn class(&self, id: &str) -> Option<&TaxonomyClass> {
        self.classes.get(id)
    }

    pub fn class_ids(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn instance_ids(&self) -> impl Iterator<Item = &str> {
        self.instances.keys().map(String::as_str)
    }

    pub fn instance_member_of(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.instances.get(id)
    }

    /// Register a concrete instance under one or more existing classes.
    pub fn add_instance<I, S>(&mut self, instance_id: &str, member_of: I) -> Result<(), OntologyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if self.classes.contains_key(instance_id) {
            return Err(OntologyError::InstanceClassCollision(instance_id.to_string()));
        }
        if self.instances.contains_key(instance_id) {
            return Err(OntologyError::DuplicateInstance(instance_id.to_string()));
        }
        let member_of: BTreeSet<String> = member_of.into_iter().map(Into::into).collect();
        if member_of.is_empty() {
            return Err(OntologyError::Document(format!(
                "instance '{instance_id}' has no member_of classes"
            )));
        }
        for class in &member_of {
            if !self.classes.contains_key(class) {
                return Err(OntologyError::UnknownClass(class.clone()));
            }
        }
        self.instances.insert(instance_id.to_string(), member_of);
        Ok(())
    }

    /// Reflexive-transitive is-a reachability between two classes.
    pub fn is_subsumed(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        if !self.classes.contains_key(b) {
            return Err(OntologyError::UnknownClass(b.to_string()));
        }
        let mut stack = vec![a];
        let mut seen: HashSet<&str> = HashSet::new();
        while let Some(id) = stack.pop() {
            if id == b {
                return Ok(true);
            }
            if !seen.insert(id) {
                continue;
            }
            let class = self
                .classes
                .get(id)
                .ok_or_else(|| OntologyError::UnknownClass(id.to_string()))?;
            stack.extend(class.parents.iter().map(String::as_str));
        }
        Ok(false)
    }

    /// Does `provided` (class or instance) satisfy the required class?
    /// A class satisfies downward only; an instance satisfies through any
    /// of its member classes.
    pub fn satisfies(&self, provided: &TermRef, required: &str) -> Result<bool, OntologyError> {
        match provided.kind {
            TermKind::Class => self.is_subsumed(&provided.id, required),
            TermKind::Instance => {
                let members = self
                    .instances
                    .get(&provided.id)
                    .ok_or_else(|| OntologyError::UnknownTerm(provided.id.clone()))?;
                for m in members {
                    if self.is_subsumed(m, required)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Satisfaction against a requirement that may itself be a concrete
    /// instance. Instances have no subclasses, so an instance requirement
    /// is met only by that exact instance.
    pub fn ref_satisfies(&self, provided: &TermRef, required: &TermRef) -> Result<bool, OntologyError> {
        match required.kind {
            TermKind::Class => self.satisfies(provided, &required.id),
            TermKind::Instance => {
                if !self.instances.contains_key(&required.id) {
                    return Err(OntologyError::UnknownTerm(required.id.clone()));
                }
                Ok(provided.kind == TermKind::Instance && provided.id == required.id)
            }
        }
    }

    /// Resolve an id or display name to a term handle. Ids take precedence;
    /// display names must be unique among classes to resolve.
    pub fn resolve(&self, text: &str) -> Result<TermRef, OntologyError> {
        if self.classes.contains_key(text) {
            return Ok(TermRef::class(text));
        }
        if self.instances.contains_key(text) {
            return Ok(TermRef::instance(text));
        }
        let matches: Vec<&str> = self
            .classes
            .values()
            .filter(|c| c.name == text)
            .map(|c| c.id.as_str())
            .collect();
        match matches.len() {
            0 => Err(OntologyError::UnknownTerm(text.to_string())),
            1 => Ok(TermRef::class(matches[0])),
            n => Err(OntologyError::AmbiguousName(text.to_string(), n)),
        }
    }

    pub fn display_name<'a>(&'a self, term: &'a TermRef) -> &'a str {
        match term.kind {
            TermKind::Class => self
                .classes
                .get(&term.id)
                .map(|c| c.name.as_str())
                .unwrap_or(&term.id),
            TermKind::Instance => &term.id,
        }
    }

    /// Canonical JSON rendering; stable byte-for-byte across runs.
    pub fn to_json_string(&self) -> String {
        let doc = TaxonomyDoc {
            root: self.root.clone(),
            classes: self
                .classes
                .values()
                .map(|c| {
                    let mut c = c.clone();
                    c.parents.sort();
                    c
                })
                .collect(),
            instances: self
                .instances
                .iter()
                .map(|(id, member_of)| InstanceDoc {
                    id: id.clone(),
                    member_of: member_of.iter().cloned().collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("taxonomy serialization");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self, OntologyError> {
        let doc: TaxonomyDoc = serde_json::from_str(text)?;
        let mut classes = BTreeMap::new();
        for class in doc.classes {
            if classes.insert(class.id.clone(), class.clone()).is_some() {
                return Err(OntologyError::Document(format!(
                    "duplicate class id '{}'",
                    class.id
                )));
            }
        }
        if !classes.contains_key(&doc.root) {
            return Err(OntologyError::RootMissing(doc.root));
        }
        let mut taxonomy = Taxonomy {
            root: doc.root,
            classes,
            instances: BTreeMap::new(),
        };
        taxonomy.check_structure()?;
        for inst in doc.instances {
            taxonomy.add_instance(&inst.id, inst.member_of)?;
        }
        Ok(taxonomy)
    }

    /// Every class must reach the root, acyclically, via in-taxonomy parents.
    fn check_structure(&self) -> Result<(), OntologyError> {
        for class in self.classes.values() {
            for p in &class.parents {
                if !self.classes.contains_key(p) {
                    return Err(OntologyError::Document(format!(
                        "class '{}' has unknown parent '{}'",
                        class.id, p
                    )));
                }
            }
        }
        check_acyclic(&self.classes)?;
        for id in self.classes.keys() {
            if !self.is_subsumed(id, &self.root)? {
                return Err(OntologyError::Document(format!(
                    "class '{id}' does not reach root '{}'",
                    self.root
                )));
            }
        }
        Ok(())
    }
}

fn check_acyclic(classes: &BTreeMap<String, TaxonomyClass>) -> Result<(), OntologyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut marks: HashMap<&str, Mark> = classes.keys().map(|k| (k.as_str(), Mark::White)).collect();
    fn visit<'a>(
        id: &'a str,
        classes: &'a BTreeMap<String, TaxonomyClass>,
        marks: &mut HashMap<&'a str, Mark>,
    ) -> Result<(), OntologyError> {
        match marks[id] {
            Mark::Black => return Ok(()),
            Mark::Grey => return Err(OntologyError::Cycle(id.to_string())),
            Mark::White => {}
        }
        marks.insert(id, Mark::Grey);
        for p in &classes[id].parents {
            visit(p, classes, marks)?;
        }
        marks.insert(id, Mark::Black);
        Ok(())
    }
    let ids: Vec<&str> = classes.keys().map(String::as_str).collect();
    for id in ids {
        visit(id, classes, &mut marks)?;
    }
    Ok(())
}

/// Extract the rooted sub-taxonomy of all terms that reach `root` via is_a.
/// Parent links leaving the subtree are dropped; the result has no instances.
pub fn build_taxonomy(source: &OntologySource, root: &str) -> Result<Taxonomy, OntologyError> {
    let by_id: HashMap<&str, &SourceTerm> = source.terms.iter().map(|t| (t.id.as_str(), t)).collect();
    if !by_id.contains_key(root) {
        return Err(OntologyError::RootMissing(root.to_string()));
    }
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for term in &source.terms {
        for p in &term.parents {
            children.entry(p.as_str()).or_default().push(term.id.as_str());
        }
    }
    let mut retained: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::from([root]);
    while let Some(id) = queue.pop_front() {
        if !retained.insert(id) {
            continue;
        }
        if let Some(kids) = children.get(id) {
            queue.extend(kids.iter().copied());
        }
    }
    let mut classes = BTreeMap::new();
    for id in &retained {
        let term = by_id[id];
        let parents: Vec<String> = if *id == root {
            Vec::new()
        } else {
            term.parents
                .iter()
                .filter(|p| retained.contains(p.as_str()))
                .cloned()
                .collect()
        };
        classes.insert(
            term.id.clone(),
            TaxonomyClass {
                id: term.id.clone(),
                name: term.name.clone(),
                parents,
            },
        );
    }
    check_acyclic(&classes)?;
    Ok(Taxonomy {
        root: root.to_string(),
        classes,
        instances: BTreeMap::new(),
    })
}

/// Build a taxonomy directly from class descriptions (used by domain files
/// with inline taxonomies).
pub fn taxonomy_from_classes(
    root: &str,
    classes: Vec<TaxonomyClass>,
) -> Result<Taxonomy, OntologyError> {
    let mut map = BTreeMap::new();
    for class in classes {
        if map.insert(class.id.clone(), class.clone()).is_some() {
            return Err(OntologyError::Document(format!(
                "duplicate class id '{}'",
                class.id
            )));
        }
    }
    if !map.contains_key(root) {
        return Err(OntologyError::RootMissing(root.to_string()));
    }
    let taxonomy = Taxonomy {
        root: root.to_string(),
        classes: map,
        instances: BTreeMap::new(),
    };
    taxonomy.check_structure()?;
    Ok(taxonomy)
}
