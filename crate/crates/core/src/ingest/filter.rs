use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::records::UserRecord;

/// Per-account collection predicates: drop listed ids and accounts created
/// before `min_creation_year`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionFilter {
    pub min_creation_year: i32,
    #[serde(default)]
    pub excluded_user_ids: BTreeSet<String>,
}

impl Default for CollectionFilter {
    fn default() -> Self {
        Self { min_creation_year: 2020, excluded_user_ids: BTreeSet::new() }
    }
}

impl CollectionFilter {
    pub fn keeps(&self, user: &UserRecord) -> bool {
        !self.excluded_user_ids.contains(&user.user_id) && user.creation_year() >= self.min_creation_year
    }
}

/// Order-preserving.
pub fn apply_collection_filter(users: Vec<UserRecord>, filter: &CollectionFilter) -> Vec<UserRecord> {
    users.into_iter().filter(|u| filter.keeps(u)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Corpus, SuspensionStatus};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn user(id: &str, y: i32, m: u32, d: u32) -> UserRecord {
        UserRecord {
            user_id: id.into(),
            screen_name: Some(format!("u{id}")),
            display_name: None,
            profile_description: None,
            follower_count: 0,
            following_count: 0,
            account_creation_date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            account_language: None,
            corpus: Corpus::Live,
            suspension_status: SuspensionStatus::Unknown,
        }
    }

    fn erdogan_filter() -> CollectionFilter {
        CollectionFilter { min_creation_year: 2020, excluded_user_ids: ["x".to_string()].into() }
    }

    #[test]
    fn boundary_dates() {
        let f = erdogan_filter();
        assert!(!f.keeps(&user("a", 2019, 12, 31)));
        assert!(f.keeps(&user("a", 2020, 1, 1)));
        assert!(!f.keeps(&user("x", 2020, 6, 1)));
    }

    #[test]
    fn ten_user_fixture() {
        // 3 created before 2020, 1 excluded id (created 2020), 6 retained
        let users = vec![
            user("1", 2020, 1, 1),
            user("2", 2018, 5, 5),
            user("3", 2020, 3, 3),
            user("x", 2020, 4, 4),
            user("5", 2019, 12, 31),
            user("6", 2021, 1, 1),
            user("7", 2020, 7, 7),
            user("8", 2015, 1, 1),
            user("9", 2020, 12, 31),
            user("10", 2020, 2, 2),
        ];
        let kept: Vec<String> =
            apply_collection_filter(users, &erdogan_filter()).into_iter().map(|u| u.user_id).collect();
        assert_eq!(kept, vec!["1", "3", "6", "7", "9", "10"]);
    }

    proptest! {
        #[test]
        fn idempotent_and_commuting(years in proptest::collection::vec((2015i32..2023, any::<bool>()), 0..40)) {
            let users: Vec<UserRecord> = years.iter().enumerate()
                .map(|(i, (y, _))| user(&i.to_string(), *y, 6, 1)).collect();
            let excluded: BTreeSet<String> = years.iter().enumerate()
                .filter(|(_, (_, ex))| *ex).map(|(i, _)| i.to_string()).collect();
            let both = CollectionFilter { min_creation_year: 2020, excluded_user_ids: excluded.clone() };
            let once = apply_collection_filter(users.clone(), &both);
            prop_assert_eq!(&apply_collection_filter(once.clone(), &both), &once);

            let only_ids = CollectionFilter { min_creation_year: i32::MIN, excluded_user_ids: excluded };
            let only_year = CollectionFilter { min_creation_year: 2020, excluded_user_ids: BTreeSet::new() };
            let a = apply_collection_filter(apply_collection_filter(users.clone(), &only_ids), &only_year);
            let b = apply_collection_filter(apply_collection_filter(users, &only_year), &only_ids);
            prop_assert_eq!(&a, &once);
            prop_assert_eq!(&b, &once);
        }
    }
}
