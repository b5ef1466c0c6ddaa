use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::error::{Error, Result};

/// Suite names accepted by [`Catalog::suite`]; `all` selects every record.
pub const SUITES: &[&str] = &[
    "all",
    "moments",
    "transforms",
    "sporadic",
    "fourier",
    "legendre",
    "parts",
    "three-product",
    "conjectures",
];

const DEFAULT_CATALOG: &str = include_str!("../../catalog/identities.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Theorem,
    Conjecture,
    /// Only one side is computable here; the value is reported.
    Informational,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Theorem => "theorem",
            Status::Conjecture => "conjecture",
            Status::Informational => "informational",
        })
    }
}

/// One catalog record as stored on disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityRecord {
    pub id: String,
    pub status: Status,
    #[serde(default)]
    pub tags: Vec<String>,
    pub source: String,
    pub lhs: String,
    #[serde(default)]
    pub rhs: Option<String>,
    /// Overrides the default pass threshold (decimal digits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub record: IdentityRecord,
    pub lhs: Expr,
    pub rhs: Option<Expr>,
}

impl Identity {
    pub fn id(&self) -> &str {
        &self.record.id
    }

    pub fn status(&self) -> Status {
        self.record.status
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.record.tags.iter().any(|t| t == tag)
    }

    /// The same identity with `delta` added to the right-hand side.
    pub fn perturbed(&self, delta: &str) -> Result<Identity> {
        let rhs = self.record.rhs.as_deref().unwrap_or("0");
        let text = format!("({rhs})+({delta})");
        let mut record = self.record.clone();
        record.id = format!("{}+perturbed", record.id);
        record.rhs = Some(text.clone());
        Ok(Identity {
            record,
            lhs: self.lhs.clone(),
            rhs: Some(text.parse()?),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    identity: Vec<IdentityRecord>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    identities: Vec<Identity>,
}

impl Catalog {
    /// The catalog shipped with the library.
    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_CATALOG).expect("built-in catalog is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        let mut seen = HashSet::new();
        let mut identities = Vec::with_capacity(file.identity.len());
        for record in file.identity {
            if !seen.insert(record.id.clone()) {
                return Err(Error::Catalog(format!("duplicate id {:?}", record.id)));
            }
            for tag in &record.tags {
                if !SUITES.contains(&tag.as_str()) || tag == "all" {
                    return Err(Error::Catalog(format!("{}: unknown tag {tag:?}", record.id)));
                }
            }
            let parse = |s: &str| {
                s.parse::<Expr>()
                    .map_err(|e| Error::Catalog(format!("{}: {e}", record.id)))
            };
            let lhs = parse(&record.lhs)?;
            let rhs = record.rhs.as_deref().map(parse).transpose()?;
            if rhs.is_none() && record.status != Status::Informational {
                return Err(Error::Catalog(format!("{}: missing rhs", record.id)));
            }
            identities.push(Identity { record, lhs, rhs });
        }
        Ok(Self { identities })
    }

    pub fn identities(&self) -> &[Identity] {
        &self.identities
    }

    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Identity> {
        self.identities.iter().find(|i| i.id() == id)
    }

    /// Records of one suite, in catalog order.
    pub fn suite(&self, name: &str) -> Result<Vec<&Identity>> {
        if !SUITES.contains(&name) {
            return Err(Error::Parse(format!(
                "unknown suite {name:?}; expected one of {}",
                SUITES.join(", ")
            )));
        }
        Ok(self
            .identities
            .iter()
            .filter(|i| name == "all" || i.has_tag(name))
            .collect())
    }

    pub fn count(&self, status: Status) -> usize {
        self.identities.iter().filter(|i| i.status() == status).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_loads() {
        let c = Catalog::builtin();
        assert!(c.count(Status::Theorem) >= 45);
        assert_eq!(c.count(Status::Conjecture), 2);
        for s in SUITES {
            assert!(!c.suite(s).unwrap().is_empty(), "{s}");
        }
        assert!(c.suite("bogus").is_err());
    }

    #[test]
    fn rejects_bad_records() {
        let dup = r#"
[[identity]]
id = "a"
status = "theorem"
source = "s"
lhs = "1"
rhs = "1"

[[identity]]
id = "a"
status = "theorem"
source = "s"
lhs = "1"
rhs = "1"
"#;
        assert!(Catalog::from_toml(dup).is_err());
        let bad = "[[identity]]\nid = \"b\"\nstatus = \"theorem\"\nsource = \"s\"\nlhs = \"K(x)\"\nrhs = \"1\"\n";
        assert!(Catalog::from_toml(bad).is_err());
        let no_rhs = "[[identity]]\nid = \"c\"\nstatus = \"theorem\"\nsource = \"s\"\nlhs = \"1\"\n";
        assert!(Catalog::from_toml(no_rhs).is_err());
    }
}
