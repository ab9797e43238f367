//! Set files: JSON `{"n": N, "elements": [...]}` or plain text with an
//! `N=<int>` header line followed by one integer per line.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{CyclicGroup, GroupSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFile {
    pub n: usize,
    pub elements: Vec<i64>,
}

impl SetFile {
    pub fn from_set(set: &GroupSet) -> Self {
        SetFile {
            n: set.modulus(),
            elements: set.iter().map(|x| x as i64).collect(),
        }
    }

    pub fn to_group_set(&self) -> Result<GroupSet> {
        let group = CyclicGroup::new(self.n)?;
        Ok(GroupSet::from_elements(group, self.elements.iter().copied()))
    }

    /// Elements as positive integers, for interval-style inputs.
    pub fn positive_elements(&self) -> Result<Vec<u64>> {
        self.elements
            .iter()
            .map(|&x| {
                u64::try_from(x)
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| Error::invalid(format!("element {x} is not a positive integer")))
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()));
        }
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty set file".into()))?;
        let n = header
            .strip_prefix("N=")
            .ok_or_else(|| Error::Parse(format!("expected header N=<int>, got {header:?}")))?
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad modulus: {e}")))?;
        let elements = lines
            .map(|l| {
                l.parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad element {l:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SetFile { n, elements })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("N={}\n", self.n);
        for x in &self.elements {
            out.push_str(&x.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("set file serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Writes JSON when the path ends in `.json`, text otherwise.
    pub fn write(&self, path: &Path) -> Result<()> {
        let body = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()
        } else {
            self.to_text()
        };
        fs::write(path, body).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_formats() {
        let json = SetFile::parse(r#"{"n": 11, "elements": [1, 2, 4, 5]}"#).unwrap();
        let text = SetFile::parse("N=11\n1\n2\n\n4\n5\n").unwrap();
        assert_eq!(json, text);
        assert_eq!(json.to_group_set().unwrap().len(), 4);
    }

    #[test]
    fn text_round_trip() {
        let f = SetFile {
            n: 7,
            elements: vec![0, 3, 6],
        };
        assert_eq!(SetFile::parse(&f.to_text()).unwrap(), f);
        assert_eq!(SetFile::parse(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(SetFile::parse("11\n1\n").is_err());
        assert!(SetFile::parse("N=x\n").is_err());
        assert!(SetFile::parse("N=5\nfoo\n").is_err());
        assert!(SetFile::parse("").is_err());
    }

    #[test]
    fn negative_elements_reduce() {
        let f = SetFile::parse("N=5\n-1\n").unwrap();
        assert_eq!(f.to_group_set().unwrap().to_vec(), vec![4]);
        assert!(f.positive_elements().is_err());
    }
}
