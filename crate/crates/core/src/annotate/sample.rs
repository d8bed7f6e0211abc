use rand::seq::index;

use crate::ingest::PostRecord;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Draws up to `k` of a user's topic posts (authored or reposted) uniformly
/// without replacement. The sample keeps the input order.
pub fn sample_user_posts(user: &str, topic_corpus: &[PostRecord], k: usize, seed: u64) -> Result<Vec<PostRecord>> {
    if topic_corpus.is_empty() {
        return Err(Error::Precondition(format!("user {user} skipped: no authored or reposted posts in topic")));
    }
    if topic_corpus.len() <= k {
        return Ok(topic_corpus.to_vec());
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = index::sample(&mut rng, topic_corpus.len(), k).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| topic_corpus[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize) -> Vec<PostRecord> {
        (0..n)
            .map(|i| PostRecord {
                uri: format!("p{i}"),
                author: "did:a".into(),
                text: format!("post {i}"),
                langs: vec!["en".into()],
                created_at: "2025-01-01T00:00:00Z".parse().unwrap(),
                repost_count: 1,
            })
            .collect()
    }

    #[test]
    fn fewer_than_k_returns_all() {
        assert_eq!(sample_user_posts("u", &corpus(3), 10, 1).unwrap().len(), 3);
    }

    #[test]
    fn exactly_k_and_reproducible() {
        let c = corpus(100);
        let a = sample_user_posts("u", &c, 10, 42).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, sample_user_posts("u", &c, 10, 42).unwrap());
        let b = sample_user_posts("u", &c, 10, 43).unwrap();
        assert_eq!(b.len(), 10);
    }

    #[test]
    fn empty_corpus_is_skipped() {
        assert!(sample_user_posts("u", &[], 10, 1).is_err());
    }
}
