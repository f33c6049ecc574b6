//! Shared fixtures and a brute-force reference matcher.
//!
//! The reference matcher does not use the `regex` crate or the bundled
//! pattern file: templates and phrase patterns are transcribed here by hand
//! and matched with a small backtracking scanner.

#![allow(dead_code)]

pub mod synth;

use leakaudit::{ClaimRecord, EvidenceSnippet};

pub const URL_TEMPLATES: [&str; 19] = [
    "africacheck.org/reports",
    "factcheck.afp.com",
    "checkyourfact.com",
    "climatefeedback.org/claimreview",
    "radionz.co.nz/programmes/election17-fact-or-fiction",
    "factcheck.org",
    "factcheckni.org",
    "factly.in",
    "factscan.ca",
    "fullfact.org",
    "gossipcop.com",
    "healthfeedback.org/claimreview",
    "hoax-slayer.net",
    "hoax-alert.leadstories.com",
    "pesacheck.org",
    "politifact.com",
    "snopes.com",
    "truthorfiction.com",
    "washingtonpost.com/news/fact-checker",
];

pub const PHRASES: [&str; 13] = [
    "^false:",
    "politifact",
    "snopes",
    "^debunk",
    "real story behind",
    r"\bfake\b",
    r"\bhoax\b",
    r"\bfalsely\b",
    r"\brumors?\b",
    r"\bmyths?\b",
    r"\bnot real news\b",
    r"\bunfounded\b",
    "fact[ -]check",
];

#[derive(Debug, Clone, PartialEq)]
enum Atom {
    Start,
    Boundary,
    Char(char, bool),
    Class(Vec<char>, bool),
}

fn compile(p: &str) -> Vec<Atom> {
    let cs: Vec<char> = p.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        match cs[i] {
            '^' => out.push(Atom::Start),
            '\\' => {
                assert_eq!(cs[i + 1], 'b', "reference matcher only knows \\b");
                out.push(Atom::Boundary);
                i += 1;
            }
            '[' => {
                let end = i + cs[i..].iter().position(|&c| c == ']').unwrap();
                out.push(Atom::Class(cs[i + 1..end].to_vec(), false));
                i = end;
            }
            '?' => match out.last_mut() {
                Some(Atom::Char(_, opt)) | Some(Atom::Class(_, opt)) => *opt = true,
                _ => panic!("dangling ?"),
            },
            c => out.push(Atom::Char(c, false)),
        }
        i += 1;
    }
    out
}

fn is_word(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn match_at(atoms: &[Atom], s: &[char], pos: usize) -> bool {
    let Some(a) = atoms.first() else { return true };
    let rest = &atoms[1..];
    match a {
        Atom::Start => pos == 0 && match_at(rest, s, pos),
        Atom::Boundary => {
            let before = if pos == 0 { None } else { Some(s[pos - 1]) };
            is_word(before) != is_word(s.get(pos).copied()) && match_at(rest, s, pos)
        }
        Atom::Char(c, opt) => {
            (s.get(pos) == Some(c) && match_at(rest, s, pos + 1)) || (*opt && match_at(rest, s, pos))
        }
        Atom::Class(set, opt) => {
            (s.get(pos).is_some_and(|c| set.contains(c)) && match_at(rest, s, pos + 1))
                || (*opt && match_at(rest, s, pos))
        }
    }
}

pub fn phrase_hits(pattern: &str, field: &str) -> bool {
    let atoms = compile(pattern);
    let s: Vec<char> = field.to_lowercase().chars().collect();
    (0..=s.len()).any(|p| match_at(&atoms, &s, p))
}

/// Reference verdict: (url template hits, title phrase hits, text phrase hits).
pub fn reference(s: &EvidenceSnippet) -> (Vec<&'static str>, Vec<&'static str>, Vec<&'static str>) {
    let url = s.url.to_lowercase();
    let urls = URL_TEMPLATES
        .iter()
        .copied()
        .filter(|t| !url.is_empty() && url.contains(t))
        .collect();
    let field = |f: &str| -> Vec<&'static str> {
        if f.is_empty() {
            return Vec::new();
        }
        PHRASES.iter().copied().filter(|p| phrase_hits(p, f)).collect()
    };
    (urls, field(&s.title), field(&s.text))
}

/// Example snippets from the pattern documentation: (title, text, url,
/// expected title hits, expected text hits, expected url hits).
pub struct Example {
    pub name: &'static str,
    pub title: &'static str,
    pub text: &'static str,
    pub url: &'static str,
    pub title_hits: &'static [&'static str],
    pub text_hits: &'static [&'static str],
    pub url_hits: &'static [&'static str],
}

pub const EXAMPLES: &[Example] = &[
    Example {
        name: "google-earth-sos",
        title: "",
        text: "The Truth: The story is a hoax. ... GOOGLE EARTH FINDS WOMAN TRAPPED  ON DESERTED ISLAND FOR 7 YEARS ... other end \u{201c}How did you find me\u{201d} to  which they replied \u{201c}Some kid from Minnesota found your SOS sign on Google  Earth\u{201d}",
        url: "https://www.truthorfiction.com/google-earth-sos/",
        title_hits: &[],
        text_hits: &[r"\bhoax\b"],
        url_hits: &["truthorfiction.com"],
    },
    Example {
        name: "merle-haggard",
        title: "Discover ideas about Country Singers.",
        text: "Fake news reports that recently-deceased  country music legend Merle Haggard left his entire estate to an LGBT group",
        url: "https://www.pinterest.com/pin/merle-haggard/",
        title_hits: &[],
        text_hits: &[r"\bfake\b"],
        url_hits: &[],
    },
    Example {
        name: "map-shows-results",
        title: "FALSE: Map Shows Results of the 2012 Presidential Election If Only ...",
        text: "A map doesn't show the results of the 2012 election if only people who pay ...  FALSE: Map Shows Results of the 2012 Presidential Election If Only Taxpayers  Had ... is a map of how the Electoral College vote would look like if ONLY those  who ...",
        url: "",
        title_hits: &["^false:"],
        text_hits: &[],
        url_hits: &[],
    },
    Example {
        name: "vinehout",
        title: "PolitiFact: Testing Kathleen Vinehout claim on Scott Walker, new car ...",
        text: "Dec 20, 2013 ... We check a claim by state Sen. Kathleen Vinehout that Gov. Scott Walker bought  \"80 new, brand new vehicles\" that \"we probably don't need.\".",
        url: "",
        title_hits: &["politifact"],
        text_hits: &[],
        url_hits: &[],
    },
    Example {
        name: "aclu-military",
        title: "Real History Blog: The ACLU has NOT filed suit to have all military ...",
        text: "Feb 10, 2010 ... The ACLU has never filed such a suit, says the ACLU. Says Snopes, if ... and  another suit to end prayer from the military completely. They're ...",
        url: "",
        title_hits: &[],
        text_hits: &["snopes"],
        url_hits: &[],
    },
    Example {
        name: "simpsons",
        title: "Debunked: Did 'The Simpsons' predict President Donald Trump's ...",
        text: "Feb 9, 2017 ... 'The Simpsons' has predicted a number of world events and an internet rumor  said the show predicted the death of Donald Trump. Veuer's Nick ...",
        url: "",
        title_hits: &["^debunk"],
        text_hits: &[r"\brumors?\b"],
        url_hits: &[],
    },
    Example {
        name: "obamacare-statistic",
        title: "The real story behind the statistic Trump just used to attack Obamacare",
        text: "Jun 13, 2017 ... ... tweeted that 2 million people \u{201c}just dropped out of ObamaCare.\u{201d} 2 million more  people just dropped out of ObamaCare. It is in a death spiral.",
        url: "",
        title_hits: &["real story behind"],
        text_hits: &[],
        url_hits: &[],
    },
    Example {
        name: "harley-davidson",
        title: "Trump \"moron\" Harley-Davidson CEO quote: Fake.",
        text: "Jun 27, 2018 ... The CEO of Harley-Davidson Did Not Call Donald Trump a \u{201c}Moron\u{201d} ... Harley  Davidson CEO Matthew S Levatich says: \"Our decision to move ...",
        url: "",
        title_hits: &[r"\bfake\b"],
        text_hits: &[],
        url_hits: &[],
    },
    Example {
        name: "eddie-murphy",
        title: "Eddie Murphy - latest news, breaking stories and comment - The ...",
        text: "All the latest breaking news on Eddie Murphy. Browse The ... Paul Walker  tragedy sparks Eddie Murphy Twitter death hoax \u{b7} News \u{b7} Final film of the Twilight  ...",
        url: "",
        title_hits: &[],
        text_hits: &[r"\bhoax\b"],
        url_hits: &[],
    },
    Example {
        name: "cnn-ratings",
        title: "CNN helpfully fact-checks Donald Trump's tweet about its \u{201c}way down\u{201d}",
        text: "Jun 27, 2017 ... Trump tweeted that \u{201c}Fake News CNN\u{201d} had its \u{201c}Ratings way down!\u{201d} which he said  was due to the network being \u{201c}caught falsely pushing their ...",
        url: "",
        title_hits: &["fact[ -]check"],
        text_hits: &[r"\bfake\b", r"\bfalsely\b"],
        url_hits: &[],
    },
    Example {
        name: "nativity-scenes",
        title: "Did the Obama White House ban Christmas Nativity scenes ...",
        text: "Nov 21, 2018 ... Contrary to \"War on Christmas\" rumors, the Obama White House did not ban  Nativity scenes from the premises: ...",
        url: "",
        title_hits: &[],
        text_hits: &[r"\brumors?\b"],
        url_hits: &[],
    },
    Example {
        name: "coca-cola",
        title: "Did Coca-Cola Contain Coke? Here's What History Says",
        text: "Since I was a little girl, I've heard the myth that Coca-Cola used to actually  contain cocaine. However, how credible is this rumor? I set out to find if there was  any ...",
        url: "",
        title_hits: &[],
        text_hits: &[r"\brumors?\b", r"\bmyths?\b"],
        url_hits: &[],
    },
    Example {
        name: "not-real-news",
        title: "NOT REAL NEWS: A look at what didn't happen this week",
        text: "Aug 11, 2017 ... NOT REAL: John McCain Says He 'Accidentally' Voted No On Healthcare Repeal  ... last month that sank a GOP effort to repeal the Affordable Care Act, ... story  purportedly showing the fake senator in handcuffs is actually a ...",
        url: "",
        title_hits: &[r"\bnot real news\b"],
        text_hits: &[r"\bfake\b"],
        url_hits: &[],
    },
    Example {
        name: "harambe",
        title: "No, 15,000 people did not vote for Harambe in 2016 | PunditFact",
        text: "Nov 22, 2016 ... Harambe received 15,000 votes in the presidential election. ... Rumors that  15,000 people voted for the dead gorilla Harambe are unfounded.",
        url: "",
        title_hits: &[],
        text_hits: &[r"\brumors?\b", r"\bunfounded\b"],
        url_hits: &[],
    },
    Example {
        name: "medi-cal",
        title: "Fact-checking an immigration meme that's been circulating for more ...",
        text: "Jul 5, 2018 ... \"More than 66% of ALL births in California are to illegals on Medi-Cal\" ...  According to Medi-Cal, 50.4 percent of the state's births that year were ...",
        url: "",
        title_hits: &["fact[ -]check"],
        text_hits: &[],
        url_hits: &[],
    },
];

impl Example {
    pub fn snippet(&self) -> EvidenceSnippet {
        EvidenceSnippet::new(1, self.title, self.text, self.url)
    }
}

/// Seeded random snippets built from trigger words, near misses and noise.
pub fn random_snippets(n: usize, seed: u64) -> Vec<EvidenceSnippet> {
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    const WORDS: &[&str] = &[
        "false:", "false", " false:", "False :", "politifact", "PolitiFact's", "snopes", "snope",
        "debunk", "debunked", "Debunking", "real story behind", "real  story behind", "fake",
        "fakes", "fake_news", "fake-news", "hoax", "hoaxes", "HOAX!", "falsely", "falsely_",
        "rumor", "rumors", "rumours", "rumorsx", "myth", "myths", "mythical", "not real news",
        "not real  news", "unfounded", "unfounded2", "fact check", "fact-check", "factcheck",
        "fact_check", "FACT-CHECKING", "news", "the", "claim", "obama", "2016", "...", ";", "\u{e9}t\u{e9}",
        "caf\u{e9}fake", "\u{201c}hoax\u{201d}", "na\u{ef}ve", "\u{130}stanbul", "x", "",
    ];
    const HOSTS: &[&str] = &[
        "https://www.snopes.com/fact-check/x", "http://SNOPES.COM/a", "https://snope.com/",
        "https://www.politifact.com/truth-o-meter/", "https://politifact.co/", "https://factcheck.org/2019",
        "https://www.factcheck.afp.com/x", "https://factcheckni.org/a", "https://www.washingtonpost.com/news/fact-checker/x",
        "https://www.washingtonpost.com/news/politics/x", "https://africacheck.org/reports/y", "https://africacheck.org/",
        "https://hoax-slayer.net/z", "https://www.pinterest.com/pin/1", "https://www.example.org/?u=fullfact.org",
        "https://TruthOrFiction.com/g", "https://climatefeedback.org/claimreview/a", "https://climatefeedback.org/",
        "https://www.radionz.co.nz/programmes/election17-fact-or-fiction/a", "", "not a url",
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let field = |rng: &mut rand_chacha::ChaCha8Rng| {
        let k = rng.gen_range(0..8);
        let seps = [" ", "  ", ", ", "-", "", ". "];
        let mut s = String::new();
        for i in 0..k {
            if i > 0 {
                s.push_str(seps.choose(rng).unwrap());
            }
            let w = WORDS.choose(rng).unwrap();
            if rng.gen_bool(0.2) {
                s.push_str(&w.to_uppercase());
            } else {
                s.push_str(w);
            }
        }
        s
    };
    (0..n)
        .map(|i| {
            let title = field(&mut rng);
            let text = field(&mut rng);
            let url = HOSTS.choose(&mut rng).unwrap().to_string();
            EvidenceSnippet::new(i as u32 + 1, &title, &text, &url)
        })
        .collect()
}

/// A claim carrying `snippets` with a given label.
pub fn claim(id: &str, org: &str, label: &str, snippets: Vec<EvidenceSnippet>) -> ClaimRecord {
    ClaimRecord::new(id, &format!("claim {id}"), org, label).with_snippets(snippets)
}
