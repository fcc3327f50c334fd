//! Seeded synthetic corpora for demos, fixtures, and property tests.
//!
//! The demo corpus mimics a social-science literature database: eight
//! research themes with their own vocabulary and descriptors, journals
//! with skewed productivity and thematic home journals, and author
//! communities with a few bridging authors. Each record carries a latent
//! theme that drives simulated relevance judgments.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Issn, Record};
use crate::evalkit::{Judgment, Pool, Topic};

struct Theme {
    words: &'static [&'static str],
    descriptors: &'static [&'static str],
    topic: Option<(&'static str, &'static str, &'static str)>,
}

const THEMES: &[Theme] = &[
    Theme {
        words: &[
            "sports",
            "nazi",
            "athletes",
            "olympic",
            "propaganda",
            "1936",
            "regime",
            "physical",
            "clubs",
            "berlin",
            "competition",
            "fascism",
            "body",
            "gymnastics",
            "youth",
        ],
        descriptors: &[
            "Olympic Games",
            "National Socialism",
            "Sport",
            "Propaganda",
            "Physical Education",
        ],
        topic: Some((
            "Sports in Nazi Germany",
            "Documents on the role of sports and athletes under the National Socialist regime.",
            "Sports in Nazi Germany",
        )),
    },
    Theme {
        words: &[
            "unemployment",
            "jobless",
            "labour",
            "wages",
            "workers",
            "jobs",
            "benefits",
            "employment",
            "insurance",
            "seekers",
            "layoffs",
            "recession",
            "longterm",
            "dismissal",
            "hiring",
        ],
        descriptors: &[
            "Labor Market",
            "Unemployment",
            "Employment Policy",
            "Social Security",
            "Youth Unemployment",
        ],
        topic: Some((
            "Unemployment",
            "Causes and consequences of unemployment and labour market policy.",
            "unemployment jobless",
        )),
    },
    Theme {
        words: &[
            "migration",
            "migrants",
            "immigrants",
            "integration",
            "ethnic",
            "minorities",
            "asylum",
            "citizenship",
            "foreigners",
            "turkish",
            "naturalization",
            "language",
            "refugees",
            "newcomers",
            "diaspora",
        ],
        descriptors: &[
            "Migration",
            "Integration",
            "Ethnic Group",
            "Foreigner",
            "Asylum Policy",
        ],
        topic: Some((
            "Integration of immigrants",
            "Social and economic integration of immigrants and ethnic minorities.",
            "integration immigrants",
        )),
    },
    Theme {
        words: &[
            "women",
            "gender",
            "wage",
            "gap",
            "mothers",
            "female",
            "childcare",
            "equality",
            "men",
            "housework",
            "careers",
            "earnings",
            "maternity",
            "feminist",
            "parttime",
        ],
        descriptors: &[
            "Woman",
            "Gender Relations",
            "Equal Opportunity",
            "Occupational Career",
            "Family Policy",
        ],
        topic: Some((
            "Gender wage gap",
            "Differences in earnings and careers between women and men.",
            "gender wage gap",
        )),
    },
    Theme {
        words: &[
            "school",
            "pupils",
            "education",
            "teachers",
            "achievement",
            "inequality",
            "university",
            "students",
            "vocational",
            "tracking",
            "parental",
            "literacy",
            "graduates",
            "classroom",
            "curriculum",
        ],
        descriptors: &[
            "Educational Inequality",
            "School",
            "Higher Education",
            "Vocational Training",
            "Educational Reform",
        ],
        topic: Some((
            "Educational inequality",
            "Social origin and inequality of educational opportunities in schools.",
            "school inequality",
        )),
    },
    Theme {
        words: &[
            "election",
            "voters",
            "voting",
            "parties",
            "turnout",
            "campaign",
            "parliament",
            "candidates",
            "democracy",
            "partisanship",
            "ballots",
            "coalition",
            "electoral",
            "referendum",
            "mandate",
        ],
        descriptors: &[
            "Election",
            "Voting Behavior",
            "Political Party",
            "Democracy",
        ],
        topic: None,
    },
    Theme {
        words: &[
            "health",
            "illness",
            "mortality",
            "hospital",
            "patients",
            "smoking",
            "disease",
            "physicians",
            "elderly",
            "stress",
            "wellbeing",
            "prevention",
            "medical",
            "nursing",
            "chronic",
        ],
        descriptors: &["Health", "Health Policy", "Old Age", "Medical Care"],
        topic: None,
    },
    Theme {
        words: &[
            "media",
            "television",
            "newspapers",
            "journalism",
            "internet",
            "audience",
            "news",
            "communication",
            "press",
            "coverage",
            "broadcasting",
            "online",
            "readers",
            "reporting",
            "editorial",
        ],
        descriptors: &["Mass Media", "Journalism", "Public Opinion", "Internet"],
        topic: None,
    },
];

const GENERAL_WORDS: &[&str] = &[
    "study",
    "analysis",
    "social",
    "survey",
    "germany",
    "policy",
    "data",
    "effects",
    "development",
    "research",
    "comparison",
    "change",
    "europe",
    "society",
    "evidence",
    "panel",
    "trends",
    "empirical",
    "case",
    "federal",
    "west",
    "east",
    "institutions",
    "model",
    "impact",
];

const GENERAL_DESCRIPTORS: &[&str] = &[
    "Federal Republic of Germany",
    "Empirical Research",
    "Comparative Research",
    "Social Change",
];

const SURNAMES: &[&str] = &[
    "Müller",
    "Schmidt",
    "Schneider",
    "Fischer",
    "Weber",
    "Meyer",
    "Wagner",
    "Becker",
    "Schulz",
    "Hoffmann",
    "Koch",
    "Bauer",
    "Richter",
    "Klein",
    "Wolf",
    "Schröder",
    "Neumann",
    "Schwarz",
    "Zimmermann",
    "Braun",
    "Krüger",
    "Hofmann",
    "Hartmann",
    "Lange",
    "Schmitt",
    "Werner",
    "Krause",
    "Meier",
    "Lehmann",
    "Köhler",
    "Herrmann",
    "König",
    "Walter",
    "Mayer",
    "Huber",
    "Kaiser",
    "Fuchs",
    "Peters",
    "Lang",
    "Scholz",
    "Möller",
    "Weiß",
    "Jung",
    "Hahn",
    "Vogel",
    "Friedrich",
    "Keller",
    "Günther",
    "Frank",
    "Berger",
    "Winkler",
    "Roth",
    "Beck",
    "Lorenz",
    "Baumann",
    "Franke",
    "Albrecht",
    "Schuster",
    "Simon",
    "Ludwig",
    "Böhm",
    "Winter",
    "Kraus",
    "Martin",
    "Schumacher",
    "Krämer",
    "Vogt",
    "Stein",
    "Jäger",
    "Otto",
    "Sommer",
    "Groß",
    "Seidel",
    "Heinrich",
    "Brandt",
    "Haas",
    "Schreiber",
    "Graf",
    "Schulte",
    "Dietrich",
];

const INITIALS: &str = "ABCDEFGHIJKLMNOPRSTUW";

/// Parameters of the demo corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSpec {
    pub docs: usize,
    pub journals: usize,
    pub authors_per_theme: usize,
    pub bridge_authors: usize,
    pub seed: u64,
}

impl Default for DemoSpec {
    fn default() -> Self {
        DemoSpec {
            docs: 500,
            journals: 60,
            authors_per_theme: 24,
            bridge_authors: 6,
            seed: 2010,
        }
    }
}

/// Generated records with their latent themes and the demo topics.
#[derive(Debug, Clone)]
pub struct DemoCorpus {
    pub records: Vec<Record>,
    /// Primary and optional secondary theme per record.
    pub themes: Vec<(usize, Option<usize>)>,
    pub topics: Vec<Topic>,
    /// Theme behind each topic.
    pub topic_themes: BTreeMap<String, usize>,
}

fn journal_issn(j: usize) -> Issn {
    let a = 1000 + (j * 137) % 9000;
    let b = (j * 53 + 11) % 1000;
    let check = if j % 11 == 10 {
        'X'
    } else {
        char::from(b'0' + (j % 10) as u8)
    };
    format!("{a:04}-{b:03}{check}")
        .parse()
        .expect("generated ISSN is well formed")
}

fn journal_title(j: usize) -> String {
    const STEMS: &[&str] = &[
        "Journal of",
        "Review of",
        "Zeitschrift für",
        "Studies in",
        "Archives of",
        "Quarterly of",
    ];
    const FIELDS: &[&str] = &[
        "Sociology",
        "Social Policy",
        "Political Science",
        "Labour Research",
        "Education",
        "Migration Studies",
        "Gender Studies",
        "Public Health",
        "Communication",
        "Social History",
    ];
    format!(
        "{} {} {}",
        STEMS[j % STEMS.len()],
        FIELDS[(j / STEMS.len()) % FIELDS.len()],
        j + 1
    )
}

fn author_name(i: usize) -> String {
    let surname = SURNAMES[i % SURNAMES.len()];
    let initial = INITIALS.as_bytes()[(i / SURNAMES.len() + i * 7) % INITIALS.len()] as char;
    format!("{surname}, {initial}.")
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

/// Zipf-like weights `1 / (i+1)^s`.
fn zipf(n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(s)).collect()
}

pub fn demo_corpus(spec: DemoSpec) -> DemoCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_themes = THEMES.len();
    let theme_dist = WeightedIndex::new([16.0, 16.0, 14.0, 13.0, 13.0, 10.0, 9.0, 9.0]).unwrap();

    let base_journal = zipf(spec.journals, 1.0);
    // Each theme favours a few home journals on top of global productivity.
    let journal_dists: Vec<WeightedIndex<f64>> = (0..n_themes)
        .map(|t| {
            let mut w = base_journal.clone();
            for h in 0..3 {
                let j = (t * 7 + h * 3 + 2) % spec.journals;
                w[j] += [0.9, 0.45, 0.3][h];
            }
            WeightedIndex::new(w).unwrap()
        })
        .collect();

    let author_weights = WeightedIndex::new(zipf(spec.authors_per_theme, 0.9)).unwrap();
    let author_count = WeightedIndex::new([20.0, 35.0, 30.0, 15.0]).unwrap();

    let mut records = Vec::with_capacity(spec.docs);
    let mut themes = Vec::with_capacity(spec.docs);
    for d in 0..spec.docs {
        let theme = theme_dist.sample(&mut rng);
        let secondary = rng.gen_bool(0.15).then(|| {
            let other = rng.gen_range(0..n_themes - 1);
            if other >= theme {
                other + 1
            } else {
                other
            }
        });
        let th = &THEMES[theme];
        let word = |rng: &mut ChaCha8Rng| -> &'static str {
            let roll: f64 = rng.gen();
            match secondary {
                Some(s) if roll < 0.2 => pick(rng, THEMES[s].words),
                _ if roll < 0.62 => pick(rng, th.words),
                _ => pick(rng, GENERAL_WORDS),
            }
        };

        let title_len = rng.gen_range(3..7);
        let title: Vec<&str> = (0..title_len).map(|_| word(&mut rng)).collect();
        let abstract_len = rng.gen_range(15..36);
        let abs: Vec<&str> = (0..abstract_len).map(|_| word(&mut rng)).collect();

        let mut descriptors: Vec<String> = Vec::new();
        let desc_dist = WeightedIndex::new(zipf(th.descriptors.len(), 0.8)).unwrap();
        for _ in 0..rng.gen_range(2..5) {
            let desc = th.descriptors[desc_dist.sample(&mut rng)].to_string();
            if !descriptors.contains(&desc) {
                descriptors.push(desc);
            }
        }
        if rng.gen_bool(0.5) {
            let g = pick(&mut rng, GENERAL_DESCRIPTORS).to_string();
            if !descriptors.contains(&g) {
                descriptors.push(g);
            }
        }
        if let Some(s) = secondary {
            let desc = pick(&mut rng, THEMES[s].descriptors).to_string();
            if !descriptors.contains(&desc) {
                descriptors.push(desc);
            }
        }

        let mut authors: Vec<String> = Vec::new();
        for _ in 0..=author_count.sample(&mut rng) {
            let name = if spec.bridge_authors > 0 && rng.gen_bool(0.08) {
                author_name(
                    n_themes * spec.authors_per_theme + rng.gen_range(0..spec.bridge_authors),
                )
            } else {
                let home = match secondary {
                    Some(s) if rng.gen_bool(0.3) => s,
                    _ => theme,
                };
                author_name(home * spec.authors_per_theme + author_weights.sample(&mut rng))
            };
            if !authors.contains(&name) {
                authors.push(name);
            }
        }

        let mut record = Record::new(format!("d{:04}", d + 1), capitalize(&title.join(" ")));
        record.abstract_text = Some(capitalize(&abs.join(" ")) + ".");
        record.controlled_terms = descriptors;
        record.authors = authors;
        if rng.gen_bool(0.9) {
            let j = journal_dists[theme].sample(&mut rng);
            record.journal_issn = Some(journal_issn(j));
            record.journal_title = Some(journal_title(j));
        }
        record.year = Some(rng.gen_range(1990..2010));
        records.push(record);
        themes.push((theme, secondary));
    }

    let mut topics = Vec::new();
    let mut topic_themes = BTreeMap::new();
    for (t, theme) in THEMES.iter().enumerate() {
        if let Some((title, description, query)) = theme.topic {
            let id = format!("{}", 101 + topics.len());
            topic_themes.insert(id.clone(), t);
            topics.push(Topic {
                id,
                title: title.into(),
                description: description.into(),
                query: query.into(),
            });
        }
    }

    DemoCorpus {
        records,
        themes,
        topics,
        topic_themes,
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl DemoCorpus {
    /// Probability that a careful rater judges the document relevant.
    pub fn relevance_probability(&self, topic_id: &str, doc_id: &str) -> f64 {
        let Some(&theme) = self.topic_themes.get(topic_id) else {
            return 0.0;
        };
        let Some(pos) = self.records.iter().position(|r| r.id == doc_id) else {
            return 0.0;
        };
        match self.themes[pos] {
            (t, _) if t == theme => 0.85,
            (_, Some(s)) if s == theme => 0.5,
            _ => 0.08,
        }
    }

    /// Simulated assessments of every pooled document by `raters` raters.
    ///
    /// Each document gets one latent verdict drawn from
    /// [`relevance_probability`](Self::relevance_probability); a rater reports
    /// it with probability `0.9` shifted by a personal reliability offset and
    /// flips it otherwise. Raters skip a document with probability `skip`.
    pub fn simulate_judgments(
        &self,
        pools: &[Pool],
        raters: usize,
        skip: f64,
        seed: u64,
    ) -> Vec<Judgment> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for pool in pools {
            let reliability: Vec<f64> = (0..raters)
                .map(|_| 0.9 + rng.gen_range(-0.06..0.06))
                .collect();
            let mut ts = 1_262_304_000u64;
            for doc in &pool.doc_ids {
                let latent = rng.gen_bool(self.relevance_probability(&pool.topic_id, doc));
                for (r, q) in reliability.iter().enumerate() {
                    let skipped = rng.gen_bool(skip);
                    let relevant = if rng.gen_bool(*q) { latent } else { !latent };
                    ts += 7;
                    if skipped {
                        continue;
                    }
                    out.push(Judgment {
                        topic_id: pool.topic_id.clone(),
                        doc_id: doc.clone(),
                        rater_id: format!("rater{}-{}", pool.topic_id, r + 1),
                        relevant,
                        timestamp: ts,
                    });
                }
            }
        }
        out
    }
}

/// Records whose journal article counts follow `round(top / rank^exponent)`
/// (at least 1 per journal).
pub fn power_law_journals(journals: usize, top: usize, exponent: f64) -> Vec<Record> {
    let mut records = Vec::new();
    for j in 0..journals {
        let count = ((top as f64) / ((j + 1) as f64).powf(exponent))
            .round()
            .max(1.0) as usize;
        for a in 0..count {
            let mut r = Record::new(format!("j{j:03}a{a:04}"), "article");
            r.journal_issn = Some(journal_issn(j));
            r.journal_title = Some(journal_title(j));
            records.push(r);
        }
    }
    records
}
