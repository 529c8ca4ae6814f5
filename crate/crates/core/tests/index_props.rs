mod support;

use std::collections::HashMap;

use expedition_core::text::tokenize;
use expedition_core::{Corpus, Index};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{random_documents, tiny6_index};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn postings_agree_with_raw_counts(seed in any::<u64>(), n in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_documents(&mut rng, n);
        let index = Index::build(&Corpus::from_documents(docs.clone())).unwrap();
        let mut collection: HashMap<String, u64> = HashMap::new();
        for d in &docs {
            let no = index.doc_no(&d.doc_id).unwrap();
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in tokenize(&format!("{}\n{}", d.title, d.body)) {
                *tf.entry(t).or_default() += 1;
            }
            for (t, c) in &tf {
                prop_assert_eq!(index.tf(t, no), *c);
                *collection.entry(t.clone()).or_default() += *c as u64;
            }
            prop_assert_eq!(index.doc_len(no) as usize, tf.values().map(|&c| c as usize).sum::<usize>());
            prop_assert!(index.bucket_docs(index.bucket(no)).contains(&no));
        }
        let mut total = 0;
        for t in index.terms() {
            let summed: u64 = index.postings(t).iter().map(|p| p.tf as u64).sum();
            prop_assert_eq!(summed, index.collection_tf(t));
            prop_assert_eq!(collection.get(t).copied().unwrap_or(0), summed);
            total += summed;
        }
        prop_assert_eq!(total, index.collection_len());
        let in_buckets: usize = index.span().months().map(|m| index.bucket_docs(m).len()).sum();
        prop_assert_eq!(in_buckets, docs.len());
    }

    #[test]
    fn build_and_persist_are_deterministic(seed in any::<u64>(), n in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_documents(&mut rng, n);
        let a = Index::build(&Corpus::from_documents(docs.clone())).unwrap();
        let b = Index::build(&Corpus::from_documents(docs)).unwrap();
        prop_assert_eq!(a.to_bytes(), b.to_bytes());
        let c = Index::from_bytes(&a.to_bytes()).unwrap();
        prop_assert_eq!(c.to_bytes(), a.to_bytes());
        for t in a.terms() {
            prop_assert_eq!(a.postings(t), c.postings(t));
        }
    }
}

#[test]
fn tiny6_counts() {
    let index = tiny6_index();
    assert_eq!(index.num_docs(), 6);
    assert_eq!(index.collection_len(), 220);
    let wtc: Vec<&str> = index.entity_docs("E:WTC").iter().map(|&d| index.doc_id(d)).collect();
    assert_eq!(wtc, ["d5", "d6"]);
    assert_eq!(index.span().to_string(), "1990-05..2001-09");
}

#[test]
fn saved_index_round_trips_through_a_directory() {
    let index = tiny6_index();
    let dir = tempfile::tempdir().unwrap();
    index.save_dir(dir.path()).unwrap();
    let loaded = Index::load_dir(dir.path()).unwrap();
    for t in index.terms() {
        assert_eq!(index.postings(t), loaded.postings(t));
    }
    let path = dir.path().join(expedition_core::index::INDEX_FILE);
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(Index::load_dir(dir.path()).is_err());
    let mut bumped = bytes.clone();
    bumped[6] += 1;
    std::fs::write(&path, &bumped).unwrap();
    assert!(matches!(
        Index::load_dir(dir.path()),
        Err(expedition_core::IndexError::Version { .. })
    ));
}
