//! JSON facet files.
//!
//! ```json
//! {"facets": [{"id": 3, "bound": 4.0,
//!              "terms": [{"x": 0, "y": null, "z": 1, "coef": -1.0}]}]}
//! ```
//!
//! A `null` (or missing) slot means that party is absent from the monomial.
//! Facets are stored in correlator form; files holding probability-form data
//! must be converted by whoever produced them.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use gtnl_core::bellineq::{ns3_facet, svetlichny_facet, FacetInequality, Term, NS3_ID, SVETLICHNY_ID};
use gtnl_core::measure::Monomial;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FacetFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed facet file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("facet {id}, term {term}: slots must be 0, 1 or null with at least one present")]
    BadTerm { id: u32, term: usize },
    #[error("facet {id}: {source}")]
    Invalid { id: u32, source: gtnl_core::Error },
    #[error("facet id {0} appears more than once")]
    DuplicateId(u32),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    facets: Vec<Record>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: u32,
    bound: f64,
    terms: Vec<TermRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    #[serde(default)]
    x: Option<u8>,
    #[serde(default)]
    y: Option<u8>,
    #[serde(default)]
    z: Option<u8>,
    coef: f64,
}

/// Parses a facet document. Id 0 (user-defined) may repeat; other ids may not.
pub fn parse_facets(text: &str) -> Result<Vec<FacetInequality>, FacetFileError> {
    let doc: Document = serde_json::from_str(text)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(doc.facets.len());
    for r in doc.facets {
        if r.id != 0 && !seen.insert(r.id) {
            return Err(FacetFileError::DuplicateId(r.id));
        }
        let terms = r
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Monomial::new(t.x, t.y, t.z)
                    .map(|m| Term::new(m, t.coef))
                    .ok_or(FacetFileError::BadTerm { id: r.id, term: i })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let facet = FacetInequality::new(r.id, r.bound, terms).map_err(|source| FacetFileError::Invalid { id: r.id, source })?;
        out.push(facet);
    }
    Ok(out)
}

pub fn load_facets(path: &Path) -> Result<Vec<FacetInequality>, FacetFileError> {
    let text = fs::read_to_string(path).map_err(|source| FacetFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_facets(&text)
}

/// Serializes facets in the format read by [`parse_facets`].
pub fn facets_to_json(facets: &[FacetInequality]) -> String {
    let doc = Document {
        facets: facets
            .iter()
            .map(|f| Record {
                id: f.id(),
                bound: f.bound(),
                terms: f
                    .terms()
                    .iter()
                    .map(|t| {
                        let [x, y, z] = t.monomial.slots();
                        TermRecord { x, y, z, coef: t.coef }
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("facet documents always serialize")
}

/// The two facets available without an external file.
pub fn builtin_facets() -> Vec<FacetInequality> {
    vec![ns3_facet(), svetlichny_facet()]
}

/// Ids of loaded facets that disagree with the built-in facet of the same id.
///
/// A mismatch usually means the file uses another sign or normalization
/// convention; it is reported, never rescaled.
pub fn builtin_mismatches(facets: &[FacetInequality]) -> Vec<u32> {
    let builtin = builtin_facets();
    facets
        .iter()
        .filter(|f| matches!(f.id(), NS3_ID | SVETLICHNY_ID))
        .filter(|f| {
            let b = builtin.iter().find(|b| b.id() == f.id()).expect("built-in id");
            f.bound() != b.bound() || f.coefficients() != b.coefficients()
        })
        .map(|f| f.id())
        .collect()
}

/// Short human-readable label of a facet set, for reports.
pub fn describe_facet_set(source: Option<&Path>, facets: &[FacetInequality]) -> String {
    let origin = source.map_or_else(|| "built-in".to_string(), |p| p.display().to_string());
    let ids: Vec<String> = facets.iter().map(|f| f.id().to_string()).collect();
    format!("{origin} [{} facets: {}]", facets.len(), ids.join(","))
}
