//! Suspension snapshot files: CSV rows of `(user_id, status, checked_at)`.
//!
//! A `suspended` observation is assigned to the first cohort when it falls on
//! the earliest check date at which any suspension was observed, otherwise to
//! the second cohort. `suspended_t1` / `suspended_t2` statuses are taken
//! verbatim.

use std::collections::HashMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::archive::parse_timestamp;
use super::records::{SuspensionStatus, UserRecord};
use super::IngestError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspensionObservation {
    pub user_id: String,
    pub suspended: Option<SuspensionStatus>,
    pub checked_at: DateTime<Utc>,
}

pub fn load_suspension_snapshots(path: &Path) -> Result<Vec<SuspensionObservation>, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_suspension_snapshots(file)
}

pub fn read_suspension_snapshots<R: std::io::Read>(source: R) -> Result<Vec<SuspensionObservation>, IngestError> {
    let mut reader = csv::Reader::from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["user_id", "status", "checked_at"] {
        return Err(IngestError::Header(format!(
            "suspension snapshot header must be user_id,status,checked_at, got {}",
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| IngestError::Snapshot { row, reason };
        let suspended = match record[1].trim().to_ascii_lowercase().as_str() {
            "active" => None,
            "suspended" => Some(SuspensionStatus::Unknown),
            "suspended_t1" => Some(SuspensionStatus::SuspendedT1),
            "suspended_t2" => Some(SuspensionStatus::SuspendedT2),
            other => return Err(bad(format!("unknown status `{other}`"))),
        };
        out.push(SuspensionObservation {
            user_id: record[0].trim().to_string(),
            suspended,
            checked_at: parse_timestamp(&record[2]).map_err(bad)?,
        });
    }
    Ok(out)
}

/// Sets `suspension_status` on every user with at least one observation.
pub fn apply_suspension_snapshots(users: &mut [UserRecord], observations: &[SuspensionObservation]) {
    let t1 = observations
        .iter()
        .filter(|o| o.suspended == Some(SuspensionStatus::Unknown))
        .map(|o| o.checked_at)
        .min();

    let mut per_user: HashMap<&str, SuspensionStatus> = HashMap::new();
    for obs in observations {
        let status = match obs.suspended {
            None => SuspensionStatus::Active,
            Some(SuspensionStatus::Unknown) if Some(obs.checked_at) == t1 => SuspensionStatus::SuspendedT1,
            Some(SuspensionStatus::Unknown) => SuspensionStatus::SuspendedT2,
            Some(explicit) => explicit,
        };
        let slot = per_user.entry(obs.user_id.as_str()).or_insert(status);
        // suspension is sticky and the earliest cohort wins
        *slot = match (*slot, status) {
            (SuspensionStatus::SuspendedT1, _) | (_, SuspensionStatus::SuspendedT1) => SuspensionStatus::SuspendedT1,
            (SuspensionStatus::SuspendedT2, _) | (_, SuspensionStatus::SuspendedT2) => SuspensionStatus::SuspendedT2,
            _ => SuspensionStatus::Active,
        };
    }
    for user in users.iter_mut() {
        if let Some(status) = per_user.get(user.user_id.as_str()) {
            user.suspension_status = *status;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Corpus;

    fn user(id: &str) -> UserRecord {
        UserRecord {
            user_id: id.into(),
            screen_name: None,
            display_name: None,
            profile_description: None,
            follower_count: 0,
            following_count: 0,
            account_creation_date: chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            account_language: None,
            corpus: Corpus::Live,
            suspension_status: SuspensionStatus::Unknown,
        }
    }

    #[test]
    fn cohorts_from_check_dates() {
        let data = "user_id,status,checked_at\n\
                    a,suspended,2021-02-01\n\
                    b,active,2021-02-01\n\
                    b,suspended,2021-12-06\n\
                    a,suspended,2021-12-06\n\
                    c,active,2021-12-06\n";
        let obs = read_suspension_snapshots(data.as_bytes()).unwrap();
        let mut users = vec![user("a"), user("b"), user("c"), user("d")];
        apply_suspension_snapshots(&mut users, &obs);
        let got: Vec<_> = users.iter().map(|u| u.suspension_status).collect();
        assert_eq!(
            got,
            vec![
                SuspensionStatus::SuspendedT1,
                SuspensionStatus::SuspendedT2,
                SuspensionStatus::Active,
                SuspensionStatus::Unknown
            ]
        );
    }

    #[test]
    fn bad_status_is_an_error() {
        let data = "user_id,status,checked_at\na,gone,2021-02-01\n";
        assert!(matches!(
            read_suspension_snapshots(data.as_bytes()),
            Err(IngestError::Snapshot { row: 2, .. })
        ));
    }
}
