//! Field catalogs in JSON form, plus the built-in catalog.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};

const BUILTIN: &str = include_str!("../data/catalog.json");

/// One catalog entry exactly as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub degree: usize,
    pub poly: Vec<i64>,
    pub integral_basis: Vec<Vec<String>>,
    #[serde(default)]
    pub units: Vec<String>,
    pub disc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_positive: Option<bool>,
}

impl CatalogEntry {
    pub fn to_spec(&self) -> Result<FieldSpec> {
        let bad = |what: &str| Error::Catalog(format!("entry `{}`: {what}", self.id));
        let integral_basis = self
            .integral_basis
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| {
                        s.trim()
                            .parse::<BigRational>()
                            .map_err(|_| bad(&format!("bad rational `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let disc = self
            .disc
            .trim()
            .parse::<BigInt>()
            .map_err(|_| bad(&format!("bad discriminant `{}`", self.disc)))?;
        Ok(FieldSpec {
            id: self.id.clone(),
            degree: self.degree,
            poly: self.poly.iter().map(|&c| BigInt::from(c)).collect(),
            integral_basis,
            units: self.units.clone(),
            disc,
            known_positive: self.known_positive,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn builtin() -> Catalog {
        Catalog::from_json(BUILTIN).expect("built-in catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Catalog> {
        let entries: Vec<CatalogEntry> =
            serde_json::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        let mut cat = Catalog::default();
        for e in entries {
            cat.insert(e);
        }
        Ok(cat)
    }

    pub fn from_path(path: &Path) -> Result<Catalog> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
        Catalog::from_json(&text)
    }

    /// Adds an entry, replacing any entry with the same id.
    pub fn insert(&mut self, entry: CatalogEntry) {
        match self.entries.iter_mut().find(|e| e.id == entry.id) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn extend(&mut self, other: Catalog) {
        for e in other.entries {
            self.insert(e);
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    pub fn entry(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownField(id.to_string()))
    }

    pub fn spec(&self, id: &str) -> Result<FieldSpec> {
        self.entry(id)?.to_spec()
    }

    pub fn load(&self, id: &str) -> Result<Field> {
        Field::load(self.spec(id)?)
    }
}
