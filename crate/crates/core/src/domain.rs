//! Domain model: service descriptions over a service and a type taxonomy,
//! plus the transition semantics of the configuration universe.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{OntologyError, Taxonomy, TaxonomyClass, TermKind, TermRef};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("domain file schema error: {0}")]
    Schema(String),
    #[error("service '{service}': unresolved {role} reference '{reference}'")]
    Unresolved {
        service: String,
        role: String,
        reference: String,
    },
    #[error("duplicate service name '{0}'")]
    DuplicateService(String),
    #[error("unknown service '{0}'")]
    UnknownService(String),
    #[error("service '{service}' is not applicable in the given state")]
    NotApplicable { service: String },
    #[error("io error reading '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One service with its semantic classifications and typed interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceDescription {
    pub name: String,
    pub classifications: BTreeSet<String>,
    pub inputs: Vec<TermRef>,
    pub outputs: Vec<TermRef>,
}

/// The validated domain: two taxonomies plus the services sorted into them.
#[derive(Debug, Clone)]
pub struct DomainModel {
    pub service_taxonomy: Taxonomy,
    pub type_taxonomy: Taxonomy,
    pub services: Vec<ServiceDescription>,
}

/// A set of available data types/items; the state of the universe.
pub type TypeState = BTreeSet<TermRef>;

/// How service outputs flow into the next state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniverseMode {
    /// Outputs are unioned into the state.
    Accumulating,
    /// Outputs replace the state; data flows only to the direct successor.
    Pipelining,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

// ---------------------------------------------------------------------------
// Domain file schema

#[derive(Debug, Serialize, Deserialize)]
struct DomainDoc {
    service_taxonomy: TaxonomySpec,
    type_taxonomy: TaxonomySpec,
    services: Vec<ServiceDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TaxonomySpec {
    Path(String),
    Inline {
        root: String,
        classes: Vec<TaxonomyClass>,
        #[serde(default)]
        instances: Vec<InstanceDoc>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    id: String,
    member_of: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ServiceDoc {
    name: String,
    classifications: Vec<String>,
    #[serde(default)]
    inputs: Vec<RefDoc>,
    #[serde(default)]
    outputs: Vec<RefDoc>,
}

/// A reference is either a bare id (resolved against the taxonomy) or an
/// explicit `{id, kind}` pair.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RefDoc {
    Bare(String),
    Tagged { id: String, kind: TermKind },
}

impl TaxonomySpec {
    fn load(&self, base: Option<&Path>) -> Result<Taxonomy, DomainError> {
        match self {
            TaxonomySpec::Path(p) => {
                let path = match base {
                    Some(dir) => dir.join(p),
                    None => Path::new(p).to_path_buf(),
                };
                let text = fs::read_to_string(&path).map_err(|e| DomainError::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                Ok(Taxonomy::from_json_str(&text)?)
            }
            TaxonomySpec::Inline {
                root,
                classes,
                instances,
            } => {
                let mut tax = crate::ontology::taxonomy_from_classes(root, classes.clone())?;
                for inst in instances {
                    tax.add_instance(&inst.id, inst.member_of.clone())?;
                }
                Ok(tax)
            }
        }
    }
}

impl DomainModel {
    /// Load and validate a domain document. Relative taxonomy paths resolve
    /// against `base_dir`. Service instances are registered in the service
    /// taxonomy from their classifications.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self, DomainError> {
        let doc: DomainDoc =
            serde_json::from_str(text).map_err(|e| DomainError::Schema(e.to_string()))?;
        let mut service_taxonomy = doc.service_taxonomy.load(base_dir)?;
        let type_taxonomy = doc.type_taxonomy.load(base_dir)?;

        let mut services = Vec::with_capacity(doc.services.len());
        let mut names: BTreeSet<String> = BTreeSet::new();
        for svc in doc.services {
            if !names.insert(svc.name.clone()) {
                return Err(DomainError::DuplicateService(svc.name));
            }
            let classifications: BTreeSet<String> = svc.classifications.into_iter().collect();
            if classifications.is_empty() {
                return Err(DomainError::Schema(format!(
                    "service '{}' has no classifications",
                    svc.name
                )));
            }
            for class in &classifications {
                if !service_taxonomy.is_class(class) {
                    return Err(DomainError::Unresolved {
                        service: svc.name.clone(),
                        role: "classification".into(),
                        reference: class.clone(),
                    });
                }
            }
            let inputs = resolve_refs(&type_taxonomy, &svc.name, "input", svc.inputs)?;
            let outputs = resolve_refs(&type_taxonomy, &svc.name, "output", svc.outputs)?;
            service_taxonomy.add_instance(&svc.name, classifications.iter().cloned())?;
            services.push(ServiceDescription {
                name: svc.name,
                classifications,
                inputs,
                outputs,
            });
        }
        Ok(DomainModel {
            service_taxonomy,
            type_taxonomy,
            services,
        })
    }

    pub fn load_file(path: &Path) -> Result<Self, DomainError> {
        let text = fs::read_to_string(path).map_err(|e| DomainError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_str(&text, path.parent())
    }

    pub fn service(&self, name: &str) -> Result<&ServiceDescription, DomainError> {
        self.services
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| DomainError::UnknownService(name.to_string()))
    }

    /// A service is applicable when every input requirement is satisfied by
    /// some element of the state. No inputs means always applicable.
    pub fn applicable(&self, state: &TypeState, service: &ServiceDescription) -> bool {
        service.inputs.iter().all(|required| {
            state
                .iter()
                .any(|provided| self.type_taxonomy.ref_satisfies(provided, required).unwrap_or(false))
        })
    }

    /// The state after running `service` in `state` under `mode`.
    pub fn successor(
        &self,
        state: &TypeState,
        service: &ServiceDescription,
        mode: UniverseMode,
    ) -> Result<TypeState, DomainError> {
        if !self.applicable(state, service) {
            return Err(DomainError::NotApplicable {
                service: service.name.clone(),
            });
        }
        let outputs = service.outputs.iter().cloned();
        Ok(match mode {
            UniverseMode::Pipelining => outputs.collect(),
            UniverseMode::Accumulating => state.iter().cloned().chain(outputs).collect(),
        })
    }

    /// Best-effort consistency report; never fails. Flags dead-on-arrival
    /// inputs, outputs nobody consumes and taxonomy classes nobody uses.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let warn = |out: &mut Vec<Diagnostic>, message: String| {
            out.push(Diagnostic {
                severity: Severity::Warning,
                message,
            })
        };

        let all_outputs: Vec<&TermRef> = self.services.iter().flat_map(|s| &s.outputs).collect();
        for svc in &self.services {
            for required in &svc.inputs {
                let producible = all_outputs.iter().any(|provided| {
                    self.type_taxonomy
                        .ref_satisfies(provided, required)
                        .unwrap_or(false)
                });
                if !producible {
                    warn(
                        &mut out,
                        format!(
                            "{}: input '{}' ({}) is produced by no service",
                            svc.name,
                            self.type_taxonomy.display_name(required),
                            required.id
                        ),
                    );
                }
            }
        }
        for svc in &self.services {
            for provided in &svc.outputs {
                let consumable = self.services.iter().any(|other| {
                    other.name != svc.name
                        && other.inputs.iter().any(|required| {
                            self.type_taxonomy
                                .ref_satisfies(provided, required)
                                .unwrap_or(false)
                        })
                });
                if !consumable {
                    warn(
                        &mut out,
                        format!(
                            "{}: output '{}' ({}) is consumed by no service",
                            svc.name,
                            self.type_taxonomy.display_name(provided),
                            provided.id
                        ),
                    );
                }
            }
        }
        let used: BTreeSet<&str> = self
            .services
            .iter()
            .flat_map(|s| s.inputs.iter().chain(&s.outputs))
            .filter(|r| r.kind == TermKind::Class)
            .map(|r| r.id.as_str())
            .collect();
        for class in self.type_taxonomy.class_ids() {
            // A class counts as used if it or any subclass is referenced,
            // or an instance lives under it.
            let referenced = used.iter().any(|u| {
                self.type_taxonomy.is_subsumed(u, class).unwrap_or(false)
            }) || self.type_taxonomy.instance_ids().any(|i| {
                self.type_taxonomy
                    .satisfies(&TermRef::instance(i), class)
                    .unwrap_or(false)
            });
            if !referenced {
                warn(
                    &mut out,
                    format!("type class '{class}' is referenced by no service"),
                );
            }
        }
        out
    }
}

fn resolve_refs(
    taxonomy: &Taxonomy,
    service: &str,
    role: &str,
    docs: Vec<RefDoc>,
) -> Result<Vec<TermRef>, DomainError> {
    docs.into_iter()
        .map(|doc| {
            let (id, kind) = match doc {
                RefDoc::Bare(id) => {
                    let kind = if taxonomy.is_class(&id) {
                        TermKind::Class
                    } else if taxonomy.is_instance(&id) {
                        TermKind::Instance
                    } else {
                        return Err(DomainError::Unresolved {
                            service: service.to_string(),
                            role: role.to_string(),
                            reference: id,
                        });
                    };
                    (id, kind)
                }
                RefDoc::Tagged { id, kind } => (id, kind),
            };
            let valid = match kind {
                TermKind::Class => taxonomy.is_class(&id),
                TermKind::Instance => taxonomy.is_instance(&id),
            };
            if !valid {
                return Err(DomainError::Unresolved {
                    service: service.to_string(),
                    role: role.to_string(),
                    reference: id,
                });
            }
            Ok(TermRef { id, kind })
        })
        .collect()
}
