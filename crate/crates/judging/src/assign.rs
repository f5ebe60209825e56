use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use trelkit_core::seed::rng_for;
use trelkit_core::Pool;

/// One assessor's worklist for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub assessor_id: String,
    pub topic_id: String,
    pub worklist: Vec<String>,
    /// Index of the first worklist document not yet judged.
    pub cursor: usize,
}

impl Assignment {
    pub fn is_done(&self) -> bool {
        self.cursor >= self.worklist.len()
    }

    pub fn current(&self) -> Option<&str> {
        self.worklist.get(self.cursor).map(String::as_str)
    }
}

/// Worklist over the pool's documents in a seeded shuffled order, so that
/// no ordering reveals where a document came from.
pub fn assign_pool(pool: &Pool, assessor_id: &str, seed: u64) -> Assignment {
    let mut worklist: Vec<String> = pool.docs().map(String::from).collect();
    let mut rng = rng_for(seed, &format!("worklist/{assessor_id}/{}", pool.topic_id));
    worklist.shuffle(&mut rng);
    Assignment {
        assessor_id: assessor_id.to_string(),
        topic_id: pool.topic_id.clone(),
        worklist,
        cursor: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trelkit_core::Provenance;

    fn pool(n: usize) -> Pool {
        let mut p = Pool::new("001");
        for i in 0..n {
            p.insert(&format!("d{i:03}"), Provenance::PoolingRun { rank: 1 });
        }
        p
    }

    #[test]
    fn shuffled_worklists() {
        let p = pool(100);
        let a = assign_pool(&p, "x", 1);
        assert_eq!((a.worklist.len(), a.cursor), (100, 0));
        assert_eq!(a, assign_pool(&p, "x", 1));
        let b = assign_pool(&p, "y", 1);
        let sorted = |v: &[String]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        assert_eq!(sorted(&a.worklist), sorted(&b.worklist));
        assert_ne!(a.worklist, b.worklist);
        assert_ne!(a.worklist, assign_pool(&p, "x", 2).worklist);
    }
}
