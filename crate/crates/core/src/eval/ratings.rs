//! Expert rating files and their aggregation.
//!
//! A rating file is CSV with the header `query,expert,precision,relevance`;
//! scores lie in [0, 5].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const MAX_SCORE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatingError {
    #[error("no ratings")]
    EmptyRatings,
    #[error("query `{query}`, expert `{expert}`: score {score} outside [0, 5]")]
    ScoreRange { query: String, expert: String, score: f64 },
    #[error("query `{query}` is not rated by the same experts as the others")]
    UnequalExperts { query: String },
    #[error("query `{query}` rated twice by expert `{expert}`")]
    Duplicate { query: String, expert: String },
    #[error("rating file: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub relevance: f64,
}

/// query → expert → scores, with every query rated by the same experts.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSet {
    ratings: BTreeMap<String, BTreeMap<String, Scores>>,
}

#[derive(Debug, Deserialize)]
struct Row {
    query: String,
    expert: String,
    precision: f64,
    relevance: f64,
}

impl RatingSet {
    pub fn new<I>(rows: I) -> Result<Self, RatingError>
    where
        I: IntoIterator<Item = (String, String, Scores)>,
    {
        let mut ratings: BTreeMap<String, BTreeMap<String, Scores>> = BTreeMap::new();
        for (query, expert, s) in rows {
            for score in [s.precision, s.relevance] {
                if !(0.0..=MAX_SCORE).contains(&score) {
                    return Err(RatingError::ScoreRange { query, expert, score });
                }
            }
            let per_query = ratings.entry(query.clone()).or_default();
            if per_query.insert(expert.clone(), s).is_some() {
                return Err(RatingError::Duplicate { query, expert });
            }
        }
        let mut expert_sets = ratings.iter().map(|(q, m)| (q, m.keys().collect::<BTreeSet<_>>()));
        let Some((_, first)) = expert_sets.next() else {
            return Err(RatingError::EmptyRatings);
        };
        if let Some((q, _)) = expert_sets.find(|(_, set)| *set != first) {
            return Err(RatingError::UnequalExperts { query: q.clone() });
        }
        Ok(Self { ratings })
    }

    pub fn from_csv<R: Read>(input: R) -> Result<Self, RatingError> {
        let mut rows = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize::<Row>() {
            let r = row.map_err(|e| RatingError::Csv(e.to_string()))?;
            rows.push((
                r.query,
                r.expert,
                Scores {
                    precision: r.precision,
                    relevance: r.relevance,
                },
            ));
        }
        Self::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RatingError> {
        let file = std::fs::File::open(path).map_err(|e| RatingError::Csv(e.to_string()))?;
        Self::from_csv(file)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.ratings.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMeans {
    pub query: String,
    pub precision: f64,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub per_query: Vec<QueryMeans>,
    pub precision: f64,
    pub relevance: f64,
}

/// Mean over experts per query, then mean over queries.
pub fn aggregate_ratings(r: &RatingSet) -> RatingSummary {
    let per_query: Vec<QueryMeans> = r
        .ratings
        .iter()
        .map(|(q, experts)| {
            let n = experts.len() as f64;
            QueryMeans {
                query: q.clone(),
                precision: experts.values().map(|s| s.precision).sum::<f64>() / n,
                relevance: experts.values().map(|s| s.relevance).sum::<f64>() / n,
            }
        })
        .collect();
    let n = per_query.len() as f64;
    RatingSummary {
        precision: per_query.iter().map(|q| q.precision).sum::<f64>() / n,
        relevance: per_query.iter().map(|q| q.relevance).sum::<f64>() / n,
        per_query,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: f64, r: f64) -> Scores {
        Scores {
            precision: p,
            relevance: r,
        }
    }

    #[test]
    fn single_query_mean() {
        let set = RatingSet::new([
            ("q1".into(), "e1".into(), s(4.0, 5.0)),
            ("q1".into(), "e2".into(), s(5.0, 5.0)),
            ("q1".into(), "e3".into(), s(5.0, 5.0)),
        ])
        .unwrap();
        let agg = aggregate_ratings(&set);
        assert!((agg.precision - 14.0 / 3.0).abs() < 1e-12);
        assert_eq!(agg.relevance, 5.0);
    }

    #[test]
    fn csv_and_validation() {
        let text = "query,expert,precision,relevance\nq1,e1,4,5\nq2,e1,3,2.5\n";
        let agg = aggregate_ratings(&RatingSet::from_csv(text.as_bytes()).unwrap());
        assert_eq!(agg.per_query.len(), 2);
        assert_eq!(agg.precision, 3.5);

        let bad = "query,expert,precision,relevance\nq1,e1,6,5\n";
        assert!(matches!(
            RatingSet::from_csv(bad.as_bytes()),
            Err(RatingError::ScoreRange { .. })
        ));
        let uneven = "query,expert,precision,relevance\nq1,e1,1,1\nq1,e2,1,1\nq2,e1,1,1\n";
        assert!(matches!(
            RatingSet::from_csv(uneven.as_bytes()),
            Err(RatingError::UnequalExperts { .. })
        ));
        let dup = "query,expert,precision,relevance\nq1,e1,1,1\nq1,e1,2,2\n";
        assert!(matches!(
            RatingSet::from_csv(dup.as_bytes()),
            Err(RatingError::Duplicate { .. })
        ));
        let empty = "query,expert,precision,relevance\n";
        assert_eq!(RatingSet::from_csv(empty.as_bytes()), Err(RatingError::EmptyRatings));
        assert!(matches!(
            RatingSet::from_csv("query,expert\nq,e\n".as_bytes()),
            Err(RatingError::Csv(_))
        ));
    }
}
