//! Per-law verdicts with counterexample witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawVerdict {
    pub law: String,
    pub passed: bool,
    /// Element indices of a counterexample; present iff `passed` is false.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub verdicts: Vec<LawVerdict>,
}

impl LawReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `law` as passed when `witness` is `None`, failed otherwise.
    pub fn record(&mut self, law: impl Into<String>, witness: Option<Vec<usize>>) -> &mut Self {
        self.verdicts.push(LawVerdict { law: law.into(), passed: witness.is_none(), witness, note: None });
        self
    }

    pub fn pass(&mut self, law: impl Into<String>) -> &mut Self {
        self.record(law, None)
    }

    /// A passing verdict carrying an explanatory note.
    pub fn pass_with_note(&mut self, law: impl Into<String>, note: impl Into<String>) -> &mut Self {
        self.verdicts.push(LawVerdict {
            law: law.into(),
            passed: true,
            witness: None,
            note: Some(note.into()),
        });
        self
    }

    pub fn fail(&mut self, law: impl Into<String>, witness: Vec<usize>) -> &mut Self {
        self.record(law, Some(witness))
    }

    pub fn extend(&mut self, other: LawReport) -> &mut Self {
        self.verdicts.extend(other.verdicts);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, law: &str) -> Option<&LawVerdict> {
        self.verdicts.iter().find(|v| v.law == law)
    }

    /// `true` if the named law is present and passed.
    pub fn holds(&self, law: &str) -> bool {
        self.verdict(law).is_some_and(|v| v.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawVerdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.verdicts {
            let status = if v.passed { "PASS" } else { "FAIL" };
            write!(f, "{status} {}", v.law)?;
            if let Some(w) = &v.witness {
                write!(f, " witness={w:?}")?;
            }
            if let Some(n) = &v.note {
                write!(f, " ({n})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Scans `0..k` cubed in lexicographic order for the first triple where
/// `holds` is false.
pub(crate) fn first_failing_triple(k: usize, mut holds: impl FnMut(usize, usize, usize) -> bool) -> Option<Vec<usize>> {
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if !holds(a, b, c) {
                    return Some(vec![a, b, c]);
                }
            }
        }
    }
    None
}

pub(crate) fn first_failing_pair(k: usize, mut holds: impl FnMut(usize, usize) -> bool) -> Option<Vec<usize>> {
    for a in 0..k {
        for b in 0..k {
            if !holds(a, b) {
                return Some(vec![a, b]);
            }
        }
    }
    None
}

pub(crate) fn first_failing(k: usize, mut holds: impl FnMut(usize) -> bool) -> Option<Vec<usize>> {
    (0..k).find(|&a| !holds(a)).map(|a| vec![a])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_iff_failure() {
        let mut r = LawReport::new();
        r.pass("a").fail("b", vec![1, 2]);
        assert!(!r.passed());
        assert!(r.holds("a"));
        assert!(!r.holds("b"));
        for v in &r.verdicts {
            assert_eq!(v.passed, v.witness.is_none());
        }
        assert_eq!(r.to_string(), "PASS a\nFAIL b witness=[1, 2]\n");
    }

    #[test]
    fn scanners_find_first_counterexample() {
        assert_eq!(first_failing_triple(3, |a, b, c| a + b + c < 4), Some(vec![0, 2, 2]));
        assert_eq!(first_failing_pair(2, |_, _| true), None);
        assert_eq!(first_failing(5, |a| a < 3), Some(vec![3]));
    }
}
