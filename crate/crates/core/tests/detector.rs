mod common;

use common::{random_snippets, reference, EXAMPLES, PHRASES, URL_TEMPLATES};
use leakaudit::detector::Field;
use leakaudit::{sha256_hex, Dataset, Execution, Mechanism, PatternSet};

fn hits(v: &leakaudit::LeakVerdict, f: Field) -> Vec<&str> {
    v.phrase_matches
        .iter()
        .filter(|m| m.field == f)
        .map(|m| m.pattern_id.as_str())
        .collect()
}

#[test]
fn bundled_patterns_match_transcription() {
    let mut tsv = String::from("# kind\tid\tpattern\n");
    for t in URL_TEMPLATES {
        tsv.push_str(&format!("url\t{t}\t{t}\n"));
    }
    for p in PHRASES {
        tsv.push_str(&format!("phrase\t{p}\t{p}\n"));
    }
    assert_eq!(
        sha256_hex(PatternSet::default_source().as_bytes()),
        sha256_hex(tsv.as_bytes())
    );
}

#[test]
fn documented_examples() {
    let ps = PatternSet::default();
    for ex in EXAMPLES {
        let v = ps.classify_snippet(&ex.snippet());
        assert_eq!(hits(&v, Field::Title), ex.title_hits, "{} title", ex.name);
        assert_eq!(hits(&v, Field::Text), ex.text_hits, "{} text", ex.name);
        assert_eq!(v.url_matches, ex.url_hits, "{} url", ex.name);
    }
    let earth = ps.classify_snippet(&EXAMPLES[0].snippet());
    assert_eq!(earth.mechanism, Mechanism::Both);
}

#[test]
fn reference_agrees_on_examples() {
    for ex in EXAMPLES {
        let (u, t, x) = reference(&ex.snippet());
        assert_eq!((u.as_slice(), t.as_slice(), x.as_slice()), (ex.url_hits, ex.title_hits, ex.text_hits), "{}", ex.name);
    }
}

#[test]
fn oracle_equivalence_many_seeds() {
    let ps = PatternSet::default();
    for seed in 0..10 {
        for s in random_snippets(500, seed) {
            let v = ps.classify_snippet(&s);
            let (u, t, x) = reference(&s);
            assert_eq!(v.url_matches, u, "{s:?}");
            assert_eq!(hits(&v, Field::Title), t, "{s:?}");
            assert_eq!(hits(&v, Field::Text), x, "{s:?}");
        }
    }
}

#[test]
fn fixture_exercises_every_pattern() {
    let ps = PatternSet::default();
    let snippets = random_snippets(500, 0);
    let verdicts: Vec<_> = snippets.iter().map(|s| ps.classify_snippet(s)).collect();
    for p in PHRASES {
        assert!(
            verdicts.iter().any(|v| v.phrase_matches.iter().any(|m| m.pattern_id == p)),
            "{p} never fires"
        );
    }
    let mechs: std::collections::HashSet<_> = verdicts.iter().map(|v| v.mechanism).collect();
    assert_eq!(mechs.len(), 4);
}

#[test]
fn execution_mode_does_not_change_verdicts() {
    let ps = PatternSet::default();
    let records: Vec<_> = random_snippets(400, 3)
        .chunks(4)
        .enumerate()
        .map(|(i, c)| {
            let snippets = c
                .iter()
                .enumerate()
                .map(|(r, s)| leakaudit::EvidenceSnippet { rank: r as u32 + 1, ..s.clone() })
                .collect();
            common::claim(&format!("c{i}"), "snopes", "false", snippets)
        })
        .collect();
    let d = Dataset::from_records(records, Default::default()).unwrap();
    let seq = ps.classify_dataset(&d, Execution::Sequential);
    let par = ps.classify_dataset(&d, Execution::Parallel);
    assert_eq!(seq, par);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    assert_eq!(pool.install(|| ps.classify_dataset(&d, Execution::Parallel)), seq);
    assert!(seq.iter().all(|s| s.is_consistent()));
}
