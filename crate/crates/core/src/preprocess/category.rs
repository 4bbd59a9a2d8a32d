use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};

/// One-hot category code. `id` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CategoryVector {
    id: u32,
    k: u32,
}

impl CategoryVector {
    pub fn new(id: u32, k: u32) -> Result<Self> {
        if id == 0 || id > k {
            return Err(SomError::InvalidConfig(format!(
                "category id {id} outside 1..={k}"
            )));
        }
        Ok(Self { id, k })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    /// Number of categories.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn one_hot(&self) -> Vec<u8> {
        (1..=self.k).map(|j| u8::from(j == self.id)).collect()
    }
}

/// Label list in first-seen order; position + 1 is the category ID.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Self::default();
        for label in labels {
            vocab.insert(label.as_ref());
        }
        vocab
    }

    fn insert(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        self.labels.push(label.to_owned());
        let id = self.labels.len() as u32;
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        let pos = usize::try_from(id).ok()?.checked_sub(1)?;
        self.labels.get(pos).map(String::as_str)
    }

    pub fn encode(&self, label: &str) -> Result<CategoryVector> {
        let id = self.id_of(label).ok_or_else(|| SomError::UnknownCategory {
            label: label.to_owned(),
            line: None,
        })?;
        CategoryVector::new(id, self.len() as u32)
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(labels: Vec<String>) -> Self {
        Self::from_labels(labels)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.labels
    }
}

pub fn encode_category(label: &str, vocabulary: &Vocabulary) -> Result<CategoryVector> {
    vocabulary.encode(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FELONIES: [&str; 7] = [
        "Rape",
        "Burglary",
        "Felony Assault",
        "Grand Larceny",
        "Robbery",
        "Grand Larceny of Motor Vehicle",
        "Murder Non-Negl.Manslaughter",
    ];

    #[test]
    fn one_hot_examples() {
        assert_eq!(CategoryVector::new(2, 4).unwrap().one_hot(), vec![0, 1, 0, 0]);
        assert_eq!(CategoryVector::new(1, 1).unwrap().one_hot(), vec![1]);
        assert!(CategoryVector::new(0, 3).is_err());
        assert!(CategoryVector::new(4, 3).is_err());
    }

    #[test]
    fn felony_vocabulary() {
        let v = Vocabulary::from_labels(FELONIES);
        let c = encode_category("Burglary", &v).unwrap();
        assert_eq!(c.id(), 2);
        assert_eq!(c.k(), 7);
        assert_eq!(v.label(7), Some("Murder Non-Negl.Manslaughter"));
        assert_eq!(v.label(0), None);
        assert!(matches!(
            encode_category("Arson", &v),
            Err(SomError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn first_seen_order() {
        let v = Vocabulary::from_labels(["b", "a", "b", "c", "a"]);
        assert_eq!(v.labels(), &["b", "a", "c"]);
    }

    proptest! {
        #[test]
        fn one_hot_sums_to_one(k in 1u32..50, pick in 0u32..1000) {
            let id = pick % k + 1;
            let hot = CategoryVector::new(id, k).unwrap().one_hot();
            prop_assert_eq!(hot.len(), k as usize);
            prop_assert_eq!(hot.iter().map(|&b| u32::from(b)).sum::<u32>(), 1);
            prop_assert_eq!(hot[(id - 1) as usize], 1);
        }
    }
}
