use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const UNK: &str = "<unk>";

/// String-to-index map with a reserved unknown entry at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::new()
    }
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::from_raw(vec![UNK.to_string()])
    }

    fn from_raw(items: Vec<String>) -> Self {
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocab { items, index }
    }

    /// Restores a stored item list, which must start with the unknown entry
    /// and hold no duplicates.
    pub fn from_items(items: Vec<String>) -> crate::Result<Self> {
        if items.first().map(String::as_str) != Some(UNK) {
            return Err(crate::Error::Checkpoint(
                "vocabulary must start with <unk>".into(),
            ));
        }
        let v = Vocab::from_raw(items);
        if v.index.len() != v.items.len() {
            return Err(crate::Error::Checkpoint(
                "vocabulary has duplicate entries".into(),
            ));
        }
        Ok(v)
    }

    /// Builds from an iterator, keeping first-occurrence order.
    pub fn build<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let mut v = Vocab::new();
        for w in words {
            v.add(w);
        }
        v
    }

    pub fn add(&mut self, w: &str) -> usize {
        if let Some(&i) = self.index.get(w) {
            return i;
        }
        self.items.push(w.to_string());
        self.index.insert(w.to_string(), self.items.len() - 1);
        self.items.len() - 1
    }

    /// Index of `w`, or the unknown index.
    pub fn get(&self, w: &str) -> usize {
        self.index.get(w).copied().unwrap_or(0)
    }

    pub fn contains(&self, w: &str) -> bool {
        self.index.contains_key(w)
    }

    pub fn unk(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

impl Serialize for Vocab {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.items.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        if items.first().map(String::as_str) != Some(UNK) {
            return Err(serde::de::Error::custom("vocabulary must start with <unk>"));
        }
        Ok(Vocab::from_raw(items))
    }
}

impl From<Vec<String>> for Vocab {
    fn from(items: Vec<String>) -> Self {
        let mut v = Vocab::new();
        for w in &items {
            v.add(w);
        }
        v
    }
}
