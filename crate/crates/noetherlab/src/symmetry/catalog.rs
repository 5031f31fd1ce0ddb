//! The classification catalog, encoded as data.
//!
//! Every row of the classification — kernel, the arbitrary-`G`/`H`
//! extensions, the exponential and power families, and the in-text-only
//! cases (`lambda = -2` rescalings, the `lambda = -4` projective pairs,
//! the trig/hyperbolic pairs) — lives in `data/catalog.json` next to this
//! crate, one entry per `(G, H)` case with its generators in the text
//! grammar and its parameter constraints.  Generators with printed
//! denominators like `(2/lambda)` are stored multiplied through by the
//! denominator (a harmless rescaling of the generator ray) so their
//! coefficients stay polynomial in the parameters.

use super::Generator;
use crate::expr::parse_expr;
use crate::model::{ModelError, ModelSpec, RawModel};
use std::sync::OnceLock;

#[derive(Debug, Clone, serde::Deserialize)]
struct RawGenerator {
    name: String,
    xi_t: String,
    xi_s: String,
    eta: String,
    #[serde(default)]
    citation: String,
}

#[derive(Debug, Clone, serde::Deserialize)]
struct RawEntry {
    name: String,
    citation: String,
    model: RawModel,
    generators: Vec<RawGenerator>,
    #[serde(default)]
    notes: Vec<String>,
}

/// One classified case: a model, its full admitted generator list
/// (kernel included), and provenance notes.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub citation: String,
    pub model: ModelSpec,
    pub generators: Vec<Generator>,
    /// Citation per generator, parallel to `generators`.
    pub generator_citations: Vec<String>,
    pub notes: Vec<String>,
}

impl CatalogEntry {
    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog data is malformed: {0}")]
    Data(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const CATALOG_JSON: &str = include_str!("../../data/catalog.json");

fn load() -> Result<Vec<CatalogEntry>, CatalogError> {
    let raw: Vec<RawEntry> =
        serde_json::from_str(CATALOG_JSON).map_err(|e| CatalogError::Data(e.to_string()))?;
    let mut out = Vec::with_capacity(raw.len());
    for entry in raw {
        let model = ModelSpec::from_raw(&entry.model)?;
        let table = model.domain.symbol_table();
        let mut generators = Vec::new();
        let mut citations = Vec::new();
        for g in &entry.generators {
            let xi_t = parse_expr(&g.xi_t, &table)
                .map_err(|e| CatalogError::Data(format!("{}/{}: {e}", entry.name, g.name)))?;
            let xi_s = parse_expr(&g.xi_s, &table)
                .map_err(|e| CatalogError::Data(format!("{}/{}: {e}", entry.name, g.name)))?;
            let eta = parse_expr(&g.eta, &table)
                .map_err(|e| CatalogError::Data(format!("{}/{}: {e}", entry.name, g.name)))?;
            generators.push(
                Generator::new(&g.name, xi_t, xi_s, eta)
                    .map_err(|e| CatalogError::Data(format!("{}/{}: {e}", entry.name, g.name)))?,
            );
            citations.push(g.citation.clone());
        }
        out.push(CatalogEntry {
            name: entry.name,
            citation: entry.citation,
            model,
            generators,
            generator_citations: citations,
            notes: entry.notes,
        });
    }
    Ok(out)
}

/// The full classification catalog (parsed once, shared).
pub fn catalog() -> &'static [CatalogEntry] {
    static CACHE: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CACHE.get_or_init(|| load().expect("embedded catalog parses"))
}

/// Looks up an entry by name.
pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    catalog().iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, Var};
    use crate::model::{GFamily, HFamily};

    #[test]
    fn catalog_loads_and_is_complete() {
        let cat = catalog();
        assert!(cat.len() >= 20, "expected a full catalog, got {}", cat.len());
        for e in cat {
            assert!(e.generators.len() >= 2, "{} lacks the kernel", e.name);
            assert!(e.generator("X1").is_some(), "{} lacks X1", e.name);
            assert_eq!(e.generators.len(), e.generator_citations.len());
        }
        // no duplicate names
        let mut names: Vec<&str> = cat.iter().map(|e| e.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
    }

    #[test]
    fn free_source_entry_matches_expected_set() {
        // arbitrary G, H = 0: {d_t, d_s, d_phi, t d_phi, t d_t + s d_s + phi d_phi}
        let e = entry("arbG-H0").unwrap();
        assert!(matches!(e.model.g, GFamily::Arbitrary(_)));
        assert!(matches!(e.model.h, HFamily::Zero));
        assert_eq!(e.generators.len(), 5);
        let x5 = e.generator("X5").unwrap();
        assert_eq!(x5.xi_t, Expr::var(Var::T));
        assert_eq!(x5.xi_s, Expr::var(Var::S));
        assert_eq!(x5.eta, Expr::var(Var::Phi));
    }

    #[test]
    fn inverse_linear_source_entry() {
        // arbitrary G, H = beta phi^-1: kernel + uniform scaling only
        let e = entry("arbG-invH").unwrap();
        assert_eq!(e.generators.len(), 3);
        let x3 = e.generator("X3").unwrap();
        assert_eq!(x3.xi_t, Expr::var(Var::T));
        assert_eq!(x3.xi_s, Expr::var(Var::S));
        assert_eq!(x3.eta, Expr::var(Var::Phi));
    }

    #[test]
    fn iso_entry_has_mass_rescaling_only() {
        // G = -phi_s^-2, arbitrary H: kernel + s d_s
        let e = entry("isoG-arbH").unwrap();
        assert_eq!(e.generators.len(), 3);
        let x3 = e.generator("X3").unwrap();
        assert!(x3.xi_t.is_zero_expr());
        assert_eq!(x3.xi_s, Expr::var(Var::S));
        assert!(x3.eta.is_zero_expr());
    }
}
