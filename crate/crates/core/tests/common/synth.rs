//! Synthetic claim corpora with controllable leakage.
//!
//! Unleaked snippets are filler words plus, for some claims, a weak token
//! correlated with the label. Leaked snippets restate the verdict the way a
//! fact-checking article would ("politifact rated this claim half-true") and
//! trip the detector via URL and/or phrase. This is not real data: it
//! exercises the pipeline and shows the probe can exploit leaked cues.

use leakaudit::{ClaimRecord, EvidenceSnippet};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SynthSpec {
    pub prefix: &'static str,
    pub organization: &'static str,
    pub domain: &'static str,
    pub labels: &'static [&'static str],
    /// Label weights for claims that carry leaked snippets.
    pub leaked_weights: &'static [f64],
    /// Label weights for claims without leaked snippets.
    pub unleaked_weights: &'static [f64],
    /// Chance that an unleaked claim has a weak label cue.
    pub weak_cue_rate: f64,
}

pub const POLITIFACT: SynthSpec = SynthSpec {
    prefix: "pomt",
    organization: "politifact",
    domain: "www.politifact.com/factchecks",
    labels: &["true", "mostly true", "half-true", "mostly false", "false", "pants on fire!"],
    leaked_weights: &[0.10, 0.15, 0.18, 0.20, 0.25, 0.12],
    unleaked_weights: &[0.20, 0.22, 0.22, 0.16, 0.15, 0.05],
    weak_cue_rate: 0.35,
};

pub const SNOPES: SynthSpec = SynthSpec {
    prefix: "snes",
    organization: "snopes",
    domain: "www.snopes.com/fact-check",
    labels: &["true", "mostly true", "mixture", "mostly false", "false"],
    leaked_weights: &[0.10, 0.04, 0.10, 0.06, 0.70],
    unleaked_weights: &[0.25, 0.08, 0.17, 0.10, 0.40],
    weak_cue_rate: 0.35,
};

/// How many claims of each leak shape to generate.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    /// At least one leaked and one unleaked snippet.
    pub mixed: usize,
    /// Every snippet leaked.
    pub fully_leaked: usize,
    pub unleaked: usize,
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n)
        .map(|_| format!("w{}", rng.gen_range(0..600)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn unleaked_snippet(rng: &mut ChaCha8Rng, rank: u32, cue: Option<usize>) -> EvidenceSnippet {
    let title = filler(rng, 6);
    let mut text = filler(rng, 25);
    if let Some(i) = cue {
        text.push_str(&format!(" lean{i}"));
    }
    let url = format!("https://news{}.example.com/{}", rng.gen_range(0..40), rng.gen_range(0..10_000));
    EvidenceSnippet::new(rank, &title, &text, &url)
}

fn leaked_snippet(rng: &mut ChaCha8Rng, spec: &SynthSpec, rank: u32, label: &str) -> EvidenceSnippet {
    let topic = filler(rng, 5);
    let body = filler(rng, 15);
    match rng.gen_range(0..3) {
        0 => EvidenceSnippet::new(
            rank,
            &topic,
            &format!("{body} the claim was rated {label} {}", filler(rng, 5)),
            &format!("https://{}/{}", spec.domain, rng.gen_range(0..100_000)),
        ),
        1 => EvidenceSnippet::new(
            rank,
            &format!("fact check: {topic}"),
            &format!("{body} our ruling {label}"),
            &format!("https://blog{}.example.org/post", rng.gen_range(0..40)),
        ),
        _ => EvidenceSnippet::new(
            rank,
            &format!("{} {topic}", spec.organization),
            &format!("{body} we rate it {label}"),
            &format!("https://{}/{}", spec.domain, rng.gen_range(0..100_000)),
        ),
    }
}

/// Generates `shape` claims with ids `<prefix>-<start>...` in a seeded
/// shuffled order.
pub fn generate(spec: &SynthSpec, shape: Shape, start: usize, seed: u64) -> Vec<ClaimRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds: Vec<u8> = std::iter::repeat_n(0, shape.mixed)
        .chain(std::iter::repeat_n(1, shape.fully_leaked))
        .chain(std::iter::repeat_n(2, shape.unleaked))
        .collect();
    kinds.shuffle(&mut rng);
    kinds
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let id = format!("{}-{:05}", spec.prefix, start + i);
            let leaked = kind != 2;
            let label_idx = pick(&mut rng, if leaked { spec.leaked_weights } else { spec.unleaked_weights });
            let label = spec.labels[label_idx];
            let n = rng.gen_range(3..=10u32);
            let n_leaked = match kind {
                0 => rng.gen_range(1..n.min(4)),
                1 => n,
                _ => 0,
            };
            let mut is_leaked: Vec<bool> = (0..n).map(|r| r < n_leaked).collect();
            is_leaked.shuffle(&mut rng);
            let cue = (!leaked && rng.gen_bool(spec.weak_cue_rate)).then_some(label_idx);
            let snippets = is_leaked
                .iter()
                .enumerate()
                .map(|(r, &l)| {
                    let rank = r as u32 + 1;
                    if l {
                        leaked_snippet(&mut rng, spec, rank, label)
                    } else {
                        let weak = if r == 0 { cue } else { None };
                        unleaked_snippet(&mut rng, rank, weak)
                    }
                })
                .collect();
            let text = filler(&mut rng, 12);
            let mut c = ClaimRecord::new(&id, &text, spec.organization, label).with_snippets(snippets);
            let year = 2008 + (start + i) % 12;
            c.verification_date = chrono::NaiveDate::from_ymd_opt(year as i32, 1 + (i % 12) as u32, 1);
            c
        })
        .collect()
}
