//! Concepts, categories, the semantic hierarchy, and the sibling-exclusive
//! candidate check.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Broad concept category. Drives which prompt assets are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    General,
    Instance,
    Celebrity,
    ArtistStyle,
    Nsfw,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::General,
        Category::Instance,
        Category::Celebrity,
        Category::ArtistStyle,
        Category::Nsfw,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::General => "general",
            Category::Instance => "instance",
            Category::Celebrity => "celebrity",
            Category::ArtistStyle => "artist_style",
            Category::Nsfw => "nsfw",
        }
    }

    pub fn parse(text: &str) -> Result<Category, ConceptError> {
        match normalize_name(text).as_str() {
            "general" => Ok(Category::General),
            "instance" => Ok(Category::Instance),
            "celebrity" => Ok(Category::Celebrity),
            "artist_style" | "artist style" | "artist" => Ok(Category::ArtistStyle),
            "nsfw" => Ok(Category::Nsfw),
            other => Err(ConceptError::UnknownCategory(other.to_owned())),
        }
    }
}

impl core::fmt::Display for Category {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lowercase a name and collapse every whitespace run to a single space.
/// Idempotent; all name comparisons go through this.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_space = false;
    for ch in name.trim().chars() {
        if ch.is_whitespace() {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        for lower in ch.to_lowercase() {
            out.push(lower);
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum ConceptError {
    #[error("concept name is empty after trimming")]
    EmptyName,
    #[error(
        "unknown category `{0}` (expected general, instance, celebrity, artist_style, or nsfw)"
    )]
    UnknownCategory(String),
    #[error("hierarchy parse error at line {line}: {message}")]
    HierarchyParse { line: usize, message: String },
    #[error("hierarchy contains a cycle: {chain}")]
    HierarchyCycle { chain: String },
}

/// A named concept with its category and optional explicit hierarchy parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

impl Concept {
    pub fn new(name: &str, category: Category) -> Result<Concept, ConceptError> {
        let trimmed = name.trim();
        if trimmed.is_empty() {
            return Err(ConceptError::EmptyName);
        }
        Ok(Concept {
            name: trimmed.to_owned(),
            category,
            parent: None,
        })
    }

    pub fn with_parent(mut self, parent: &str) -> Concept {
        self.parent = Some(parent.trim().to_owned());
        self
    }

    /// Normalized form used for every comparison.
    pub fn normalized(&self) -> String {
        normalize_name(&self.name)
    }

    pub fn same_name(&self, other: &Concept) -> bool {
        self.normalized() == other.normalized()
    }
}

impl core::fmt::Display for Concept {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} ({})", self.name, self.category)
    }
}

/// Child -> parent edges over normalized names. Acyclic by construction:
/// [`ConceptHierarchy::from_edges`] rejects any cycle.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptHierarchy {
    edges: BTreeMap<String, String>,
}

impl ConceptHierarchy {
    pub fn empty() -> ConceptHierarchy {
        ConceptHierarchy::default()
    }

    pub fn from_edges<I, S>(edges: I) -> Result<ConceptHierarchy, ConceptError>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (child, parent) in edges {
            map.insert(
                normalize_name(child.as_ref()),
                normalize_name(parent.as_ref()),
            );
        }
        let hierarchy = ConceptHierarchy { edges: map };
        hierarchy.check_acyclic()?;
        Ok(hierarchy)
    }

    /// Parse the hierarchy file format: a UTF-8 JSON object mapping child
    /// name to parent name. An empty (or whitespace-only) document is an
    /// empty hierarchy.
    pub fn parse(text: &str) -> Result<ConceptHierarchy, ConceptError> {
        if text.trim().is_empty() {
            return Ok(ConceptHierarchy::empty());
        }
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| ConceptError::HierarchyParse {
                line: e.line(),
                message: e.to_string(),
            })?;
        ConceptHierarchy::from_edges(raw)
    }

    fn check_acyclic(&self) -> Result<(), ConceptError> {
        for start in self.edges.keys() {
            let mut seen = BTreeSet::new();
            let mut chain = Vec::new();
            let mut cursor = start.as_str();
            loop {
                if !seen.insert(cursor.to_owned()) {
                    chain.push(cursor.to_owned());
                    return Err(ConceptError::HierarchyCycle {
                        chain: chain.join(" -> "),
                    });
                }
                chain.push(cursor.to_owned());
                match self.edges.get(cursor) {
                    Some(parent) => cursor = parent,
                    None => break,
                }
            }
        }
        Ok(())
    }

    /// Parent of `name`, if the hierarchy knows it. Missing children are an
    /// explicit `None`, never a fabricated parent.
    pub fn parent(&self, name: &str) -> Option<&str> {
        self.edges.get(&normalize_name(name)).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }
}

/// Where a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LlmGenerated,
    UserSupplied,
    Fixture,
}

/// A candidate anchor with the results of the sibling / exclusivity checks.
/// Only candidates with both flags set may enter scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiblingCandidate {
    pub concept: Concept,
    pub sibling_ok: bool,
    pub exclusive_ok: bool,
    pub provenance: Provenance,
}

impl SiblingCandidate {
    pub fn is_valid(&self) -> bool {
        self.sibling_ok && self.exclusive_ok
    }
}

fn resolved_parent(concept: &Concept, hierarchy: &ConceptHierarchy) -> Option<String> {
    concept
        .parent
        .as_deref()
        .map(normalize_name)
        .or_else(|| hierarchy.parent(&concept.name).map(ToOwned::to_owned))
}

/// Check the sibling-exclusive relation between a target and a candidate.
///
/// Siblinghood: both resolve to the same parent, or neither resolves at all
/// (the candidate list is then trusted as asserted, keeping the supplied
/// provenance). Exactly one side resolving means they are not siblings.
///
/// Exclusivity is a mechanical floor: distinct normalized names, no
/// substring containment either way, and the candidate is not a known
/// synonym of the target. Failures set flags; nothing is raised.
pub fn validate_candidate(
    target: &Concept,
    candidate: &Concept,
    hierarchy: &ConceptHierarchy,
    synonyms: &BTreeSet<String>,
    provenance: Provenance,
) -> SiblingCandidate {
    let target_parent = resolved_parent(target, hierarchy);
    let candidate_parent = resolved_parent(candidate, hierarchy);
    let sibling_ok = match (&target_parent, &candidate_parent) {
        (Some(a), Some(b)) => a == b,
        (None, None) => true,
        _ => false,
    };

    let target_name = target.normalized();
    let candidate_name = candidate.normalized();
    let exclusive_ok = target_name != candidate_name
        && !target_name.contains(&candidate_name)
        && !candidate_name.contains(&target_name)
        && !synonyms.contains(&candidate_name);

    SiblingCandidate {
        concept: candidate.clone(),
        sibling_ok,
        exclusive_ok,
        provenance,
    }
}
