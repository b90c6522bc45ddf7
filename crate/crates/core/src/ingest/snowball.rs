//! Snowball expansion from parent accounts against an abstract platform client.

use std::collections::BTreeSet;

use thiserror::Error;

/// Neighbourhood queries answered by a platform.
pub trait PlatformClient {
    type Error: std::fmt::Display;

    fn followers(&self, user_id: &str) -> Result<Vec<String>, Self::Error>;
    fn friends(&self, user_id: &str) -> Result<Vec<String>, Self::Error>;
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("neighbourhood lookup failed for {} parent(s): {}", failed.len(), failed.join(", "))]
pub struct SnowballError {
    pub failed: Vec<String>,
    /// Union over the parents that did succeed.
    pub partial: Vec<String>,
}

/// Sorted, deduplicated union of followers and friends of every parent.
pub fn plan_snowball<C: PlatformClient>(parents: &[String], client: &C) -> Result<Vec<String>, SnowballError> {
    let mut found = BTreeSet::new();
    let mut failed = Vec::new();
    for parent in parents {
        let lookup = client.followers(parent).and_then(|mut f| {
            f.extend(client.friends(parent)?);
            Ok(f)
        });
        match lookup {
            Ok(neigh) => found.extend(neigh),
            Err(e) => {
                log::warn!("snowball lookup for {parent} failed: {e}");
                failed.push(parent.clone());
            }
        }
    }
    let found: Vec<String> = found.into_iter().collect();
    if failed.is_empty() {
        Ok(found)
    } else {
        failed.sort();
        failed.dedup();
        Err(SnowballError { failed, partial: found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[derive(Default)]
    struct Mock {
        followers: HashMap<String, Vec<String>>,
        friends: HashMap<String, Vec<String>>,
        broken: Vec<String>,
    }

    impl PlatformClient for Mock {
        type Error = String;

        fn followers(&self, u: &str) -> Result<Vec<String>, String> {
            if self.broken.iter().any(|b| b == u) {
                return Err("rate limited".into());
            }
            Ok(self.followers.get(u).cloned().unwrap_or_default())
        }

        fn friends(&self, u: &str) -> Result<Vec<String>, String> {
            Ok(self.friends.get(u).cloned().unwrap_or_default())
        }
    }

    fn v(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_parent_union() {
        let mut m = Mock::default();
        m.followers.insert("p".into(), v(&["a", "b"]));
        m.friends.insert("p".into(), v(&["b", "c"]));
        assert_eq!(plan_snowball(&v(&["p"]), &m).unwrap(), v(&["a", "b", "c"]));
        assert_eq!(plan_snowball(&[], &m).unwrap(), Vec::<String>::new());
    }

    #[test]
    fn overlapping_parents_match_naive_union() {
        let mut m = Mock::default();
        m.followers.insert("p".into(), v(&["z", "a", "m"]));
        m.friends.insert("p".into(), v(&["q", "a"]));
        m.followers.insert("r".into(), v(&["m", "b"]));
        m.friends.insert("r".into(), v(&["z", "c", "c"]));
        let got = plan_snowball(&v(&["p", "r"]), &m).unwrap();

        let mut naive: Vec<String> = Vec::new();
        for p in ["p", "r"] {
            for x in m.followers[p].iter().chain(m.friends[p].iter()) {
                if !naive.contains(x) {
                    naive.push(x.clone());
                }
            }
        }
        naive.sort();
        assert_eq!(got, naive);
    }

    #[test]
    fn failures_are_listed_with_partial_result() {
        let mut m = Mock::default();
        m.followers.insert("p".into(), v(&["a"]));
        m.broken.push("bad".into());
        let err = plan_snowball(&v(&["bad", "p"]), &m).unwrap_err();
        assert_eq!(err.failed, v(&["bad"]));
        assert_eq!(err.partial, v(&["a"]));
    }
}
