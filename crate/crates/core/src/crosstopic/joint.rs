use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::annotate::{Stance, StanceLabel, StanceNames, Topic};
use crate::{Error, Result};

/// Joint stance distribution of users labelled on both topics. Rows are the
/// stance on `topic_x`, columns on `topic_y`, both in `[for, neutral, against]`
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointStanceTable {
    pub topic_x: Topic,
    pub topic_y: Topic,
    pub users: u64,
    pub probabilities: [[f64; 3]; 3],
}

impl JointStanceTable {
    pub fn cell(&self, x: Stance, y: Stance) -> f64 {
        self.probabilities[x.index()][y.index()]
    }

    pub fn row_marginals(&self) -> [f64; 3] {
        self.probabilities.map(|r| r.iter().sum())
    }

    pub fn column_marginals(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| self.probabilities.iter().map(|r| r[j]).sum())
    }

    pub fn to_csv(&self, names_x: &StanceNames, names_y: &StanceNames) -> String {
        let mut out = format!("{}\\{}", self.topic_x.slug(), self.topic_y.slug());
        for y in Stance::ALL {
            out.push(',');
            out.push_str(names_y.display(y));
        }
        out.push('\n');
        for x in Stance::ALL {
            out.push_str(names_x.display(x));
            for y in Stance::ALL {
                out.push_str(&format!(",{:.6}", self.cell(x, y)));
            }
            out.push('\n');
        }
        out
    }
}

fn stance_map(labels: &[StanceLabel], topic: Topic) -> Result<HashMap<&str, Stance>> {
    let mut m = HashMap::new();
    for l in labels.iter().filter(|l| l.topic == topic) {
        if let Some(prev) = m.insert(l.user.as_str(), l.stance) {
            if prev != l.stance {
                return Err(Error::InvalidArgument(format!("user {} has two stances on {topic}", l.user)));
            }
        }
    }
    Ok(m)
}

/// `None` when no user is labelled on both topics.
pub fn joint_stance_table(
    sx: &[StanceLabel],
    topic_x: Topic,
    sy: &[StanceLabel],
    topic_y: Topic,
) -> Result<Option<JointStanceTable>> {
    let mx = stance_map(sx, topic_x)?;
    let my = stance_map(sy, topic_y)?;
    let mut counts = [[0u64; 3]; 3];
    let mut users = 0u64;
    for (u, a) in &mx {
        if let Some(b) = my.get(u) {
            counts[a.index()][b.index()] += 1;
            users += 1;
        }
    }
    if users == 0 {
        return Ok(None);
    }
    let probabilities = counts.map(|r| r.map(|c| c as f64 / users as f64));
    Ok(Some(JointStanceTable { topic_x, topic_y, users, probabilities }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(user: &str, topic: Topic, stance: Stance) -> StanceLabel {
        StanceLabel { user: user.into(), topic, stance }
    }

    #[test]
    fn single_cell() {
        let sx = [l("a", Topic::Ai, Stance::For), l("b", Topic::Ai, Stance::For)];
        let sy = [
            l("a", Topic::DeiPrograms, Stance::For),
            l("b", Topic::DeiPrograms, Stance::For),
            l("c", Topic::DeiPrograms, Stance::Against),
        ];
        let t = joint_stance_table(&sx, Topic::Ai, &sy, Topic::DeiPrograms).unwrap().unwrap();
        assert_eq!(t.cell(Stance::For, Stance::For), 1.0);
        assert_eq!(t.users, 2);
        assert!(joint_stance_table(&sx, Topic::Ai, &sx, Topic::DeiPrograms).unwrap().is_none());
    }

    #[test]
    fn marginals_match_restricted_fractions() {
        let sx = [
            l("a", Topic::Ai, Stance::For),
            l("b", Topic::Ai, Stance::Neutral),
            l("c", Topic::Ai, Stance::Against),
            l("d", Topic::Ai, Stance::For),
        ];
        let sy = [
            l("a", Topic::TrumpAdministration, Stance::Against),
            l("b", Topic::TrumpAdministration, Stance::Against),
            l("c", Topic::TrumpAdministration, Stance::Neutral),
        ];
        let t = joint_stance_table(&sx, Topic::Ai, &sy, Topic::TrumpAdministration).unwrap().unwrap();
        let r = t.row_marginals();
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-12 && (r[1] - 1.0 / 3.0).abs() < 1e-12);
        let c = t.column_marginals();
        assert!((c[2] - 2.0 / 3.0).abs() < 1e-12);
        let total: f64 = r.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let csv = t.to_csv(&StanceNames::defaults(Topic::Ai), &StanceNames::defaults(Topic::TrumpAdministration));
        assert!(csv.starts_with("ai\\trump,supports_trump,neutral,opposes_trump\nsupports_ai,"));
    }
}
