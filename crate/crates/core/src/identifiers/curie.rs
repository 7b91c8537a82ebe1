use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::IdentifierError;

/// A compact URI, `prefix:local_id`.
///
/// Ordering is the bytewise ordering of the text form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Curie {
    text: String,
    colon: usize,
}

impl Curie {
    pub fn new(prefix: &str, local_id: &str) -> Result<Curie, IdentifierError> {
        parse_curie(&format!("{prefix}:{local_id}")).and_then(|c| {
            if c.prefix() == prefix {
                Ok(c)
            } else {
                Err(IdentifierError::MalformedCurie {
                    text: c.text,
                    reason: "prefix may not contain `:`",
                })
            }
        })
    }

    pub fn prefix(&self) -> &str {
        &self.text[..self.colon]
    }

    pub fn local_id(&self) -> &str {
        &self.text[self.colon + 1..]
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Splits `text` on its first colon. Both parts must be nonempty and the
/// text may not contain whitespace anywhere.
pub fn parse_curie(text: &str) -> Result<Curie, IdentifierError> {
    let malformed = |reason| IdentifierError::MalformedCurie {
        text: text.to_string(),
        reason,
    };
    if text.chars().any(char::is_whitespace) {
        return Err(malformed("contains whitespace"));
    }
    let colon = text.find(':').ok_or_else(|| malformed("missing `:`"))?;
    if colon == 0 {
        return Err(malformed("empty prefix"));
    }
    if colon + 1 == text.len() {
        return Err(malformed("empty local id"));
    }
    Ok(Curie {
        text: text.to_string(),
        colon,
    })
}

/// Expands `curie` to an IRI by concatenating its prefix's base and local id.
pub fn expand_iri(curie: &Curie, prefixes: &IndexMap<String, String>) -> Result<String, IdentifierError> {
    let base = prefixes
        .get(curie.prefix())
        .ok_or_else(|| IdentifierError::UndeclaredPrefix(curie.prefix().to_string()))?;
    Ok(format!("{base}{}", curie.local_id()))
}

/// Contracts `iri` using the longest declared base that prefixes it.
pub fn contract_iri(iri: &str, prefixes: &IndexMap<String, String>) -> Result<Curie, IdentifierError> {
    let (prefix, base) = prefixes
        .iter()
        .filter(|(_, base)| !base.is_empty() && iri.starts_with(base.as_str()) && iri.len() > base.len())
        .max_by_key(|(_, base)| base.len())
        .ok_or_else(|| IdentifierError::NoMatchingBase(iri.to_string()))?;
    Curie::new(prefix, &iri[base.len()..])
}

impl Ord for Curie {
    fn cmp(&self, other: &Self) -> Ordering {
        self.text.as_bytes().cmp(other.text.as_bytes())
    }
}

impl PartialOrd for Curie {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Curie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for Curie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curie({})", self.text)
    }
}

impl FromStr for Curie {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_curie(s)
    }
}

impl AsRef<str> for Curie {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

impl Serialize for Curie {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Curie {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_curie(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_common_biomedical_identifiers() {
        let gene = parse_curie("NCBIGene:23221").unwrap();
        assert_eq!((gene.prefix(), gene.local_id()), ("NCBIGene", "23221"));
        let drug = parse_curie("CHEMBL.COMPOUND:CHEMBL3989516").unwrap();
        assert_eq!((drug.prefix(), drug.local_id()), ("CHEMBL.COMPOUND", "CHEMBL3989516"));
    }

    #[test]
    fn splits_on_first_colon() {
        let c = parse_curie("OBO:foo:bar").unwrap();
        assert_eq!((c.prefix(), c.local_id()), ("OBO", "foo:bar"));
    }

    #[test]
    fn degenerate_forms() {
        for bad in [":x", "x:", "x", "", " A:1", "A:1 ", "A: 1", "A:1\t"] {
            assert!(
                matches!(parse_curie(bad), Err(IdentifierError::MalformedCurie { .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn ordering_is_bytewise_text() {
        let a = parse_curie("A.B:x").unwrap();
        let b = parse_curie("A:x").unwrap();
        assert!(a < b);
    }

    fn obo() -> IndexMap<String, String> {
        let mut m = IndexMap::new();
        m.insert("MONDO".to_string(), "http://purl.obolibrary.org/obo/MONDO_".to_string());
        m.insert("HP".to_string(), "http://purl.obolibrary.org/obo/HP_".to_string());
        m
    }

    #[test]
    fn expand_and_contract() {
        let c = parse_curie("MONDO:0005737").unwrap();
        let iri = expand_iri(&c, &obo()).unwrap();
        assert_eq!(iri, "http://purl.obolibrary.org/obo/MONDO_0005737");
        assert_eq!(contract_iri(&iri, &obo()).unwrap(), c);
        assert_eq!(
            expand_iri(&parse_curie("DOID:1").unwrap(), &obo()),
            Err(IdentifierError::UndeclaredPrefix("DOID".into()))
        );
        assert!(matches!(
            contract_iri("http://example.org/x", &obo()),
            Err(IdentifierError::NoMatchingBase(_))
        ));
    }

    #[test]
    fn contract_prefers_longest_base() {
        // The OBO base is a prefix of the MONDO base.
        let mut m = IndexMap::new();
        m.insert("OBO".to_string(), "http://purl.obolibrary.org/obo/".to_string());
        m.insert("MONDO".to_string(), "http://purl.obolibrary.org/obo/MONDO_".to_string());
        let c = contract_iri("http://purl.obolibrary.org/obo/MONDO_0005737", &m).unwrap();
        assert_eq!(c.as_str(), "MONDO:0005737");
        let c = contract_iri("http://purl.obolibrary.org/obo/GO_0008150", &m).unwrap();
        assert_eq!(c.as_str(), "OBO:GO_0008150");
    }

    proptest! {
        #[test]
        fn text_form_round_trips(prefix in "[A-Za-z][A-Za-z0-9._-]{0,12}", local in "[A-Za-z0-9_.:-]{1,16}") {
            let c = Curie::new(&prefix, &local).unwrap();
            prop_assert_eq!(c.prefix(), prefix.as_str());
            prop_assert_eq!(c.local_id(), local.as_str());
            prop_assert_eq!(parse_curie(c.as_ref()).unwrap(), c);
        }

        #[test]
        fn contract_inverts_expand(idx in 0usize..2, local in "[A-Za-z0-9_]{1,16}") {
            let prefixes = obo();
            let prefix = prefixes.get_index(idx).unwrap().0.clone();
            let c = Curie::new(&prefix, &local).unwrap();
            prop_assert_eq!(contract_iri(&expand_iri(&c, &prefixes).unwrap(), &prefixes).unwrap(), c);
        }
    }
}
