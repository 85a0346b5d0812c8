//! Content-analysis statistics over coded job advertisements.
//!
//! * `trend_matrix`: for year `j`, `N_j` is the total count of distinct topic
//!   codes over that year's ads and `p(i, j)` is the number of ads mentioning
//!   topic `i` divided by `N_j`.
//! * `cohens_kappa`: chance-corrected agreement between two coders.
//! * `ads_per_issue`: advertisement counts per issue.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default coding scheme: 26 research areas plus `other`.
pub const DEFAULT_CATEGORIES: [&str; 27] = [
    "open",
    "experimental_cs",
    "applied_cs",
    "ai_ml",
    "big_data",
    "bioinformatics",
    "architecture",
    "graphics",
    "vision",
    "data_visualization",
    "databases",
    "games",
    "hpc",
    "hci",
    "mobile",
    "modelling_simulation",
    "networks",
    "operating_systems",
    "parallel_distributed",
    "programming_languages",
    "scientific_computing",
    "security",
    "social_computing",
    "software_engineering",
    "tcs",
    "web",
    "other",
];

pub fn default_scheme() -> Vec<String> {
    DEFAULT_CATEGORIES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodedAd {
    pub year: i32,
    pub issue: String,
    pub ad_id: String,
    /// Distinct topic codes; duplicates collapse on construction.
    pub topics: BTreeSet<String>,
}

impl CodedAd {
    pub fn new<I, S>(year: i32, issue: impl Into<String>, ad_id: impl Into<String>, topics: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CodedAd {
            year,
            issue: issue.into(),
            ad_id: ad_id.into(),
            topics: topics.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendMatrix {
    pub categories: Vec<String>,
    pub years: Vec<i32>,
    /// `proportions[i][j]` is `p(i, j)` for category `i` and year `j`.
    pub proportions: Vec<Vec<f64>>,
    /// `N_j` per year, aligned with `years`.
    pub yearly_totals: Vec<usize>,
    /// Years that had ads but no topic mentions, so `N_j = 0`.
    pub omitted_years: Vec<i32>,
}

impl TrendMatrix {
    pub fn proportion(&self, category: &str, year: i32) -> Option<f64> {
        let i = self.categories.iter().position(|c| c == category)?;
        let j = self.years.iter().position(|&y| y == year)?;
        Some(self.proportions[i][j])
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        self.proportions.iter().map(|row| row[j]).sum()
    }

    /// `(category, year, proportion)` rows, category-major.
    pub fn long_rows(&self) -> impl Iterator<Item = (&str, i32, f64)> + '_ {
        self.categories.iter().enumerate().flat_map(move |(i, c)| {
            self.years
                .iter()
                .enumerate()
                .map(move |(j, &y)| (c.as_str(), y, self.proportions[i][j]))
        })
    }
}

pub fn trend_matrix(ads: &[CodedAd], scheme: &[String]) -> Result<TrendMatrix> {
    let index: HashMap<&str, usize> = scheme
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    if index.len() != scheme.len() {
        return Err(Error::Validation("category scheme contains duplicate codes".into()));
    }

    // year -> (per-category ad counts, N_j)
    let mut per_year: BTreeMap<i32, (Vec<usize>, usize)> = BTreeMap::new();
    for ad in ads {
        let entry = per_year
            .entry(ad.year)
            .or_insert_with(|| (vec![0; scheme.len()], 0));
        for code in &ad.topics {
            let &i = index.get(code.as_str()).ok_or_else(|| Error::UnknownTopic {
                code: code.clone(),
                ad_id: ad.ad_id.clone(),
            })?;
            entry.0[i] += 1;
        }
        entry.1 += ad.topics.len();
    }

    let mut years = Vec::new();
    let mut totals = Vec::new();
    let mut columns = Vec::new();
    let mut omitted_years = Vec::new();
    for (year, (counts, total)) in per_year {
        if total == 0 {
            omitted_years.push(year);
            continue;
        }
        years.push(year);
        totals.push(total);
        columns.push(
            counts
                .into_iter()
                .map(|c| c as f64 / total as f64)
                .collect::<Vec<_>>(),
        );
    }
    let proportions = (0..scheme.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    Ok(TrendMatrix {
        categories: scheme.to_vec(),
        years,
        proportions,
        yearly_totals: totals,
        omitted_years,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodedPair {
    pub item_id: String,
    pub coder1: String,
    pub coder2: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoderTable {
    pub items: Vec<CodedPair>,
}

impl CoderTable {
    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let items = pairs
            .into_iter()
            .enumerate()
            .map(|(k, (a, b))| CodedPair {
                item_id: (k + 1).to_string(),
                coder1: a.into(),
                coder2: b.into(),
            })
            .collect();
        CoderTable { items }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaReport {
    pub kappa: f64,
    pub p_o: f64,
    pub p_e: f64,
    pub n_items: usize,
}

pub fn cohens_kappa(table: &CoderTable) -> Result<KappaReport> {
    let n = table.items.len();
    if n < 2 {
        return Err(Error::invalid("items", format!("need at least 2 coded items, got {n}")));
    }
    let agree = table.items.iter().filter(|p| p.coder1 == p.coder2).count();
    let mut marginals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for p in &table.items {
        marginals.entry(&p.coder1).or_default().0 += 1;
        marginals.entry(&p.coder2).or_default().1 += 1;
    }
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let p_e: f64 = marginals
        .values()
        .map(|&(a, b)| (a as f64 / nf) * (b as f64 / nf))
        .sum();
    if 1.0 - p_e <= f64::EPSILON {
        return Err(Error::UndefinedKappa);
    }
    Ok(KappaReport {
        kappa: (p_o - p_e) / (1.0 - p_e),
        p_o,
        p_e,
        n_items: n,
    })
}

/// Ad counts per issue. Issues are ordered chronologically by the earliest
/// year they appear in, then by identifier. With a calendar, its order is
/// used and issues missing from the data are reported with count zero; issues
/// outside the calendar follow in chronological order.
pub fn ads_per_issue(ads: &[CodedAd], calendar: Option<&[String]>) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, (i32, usize)> = HashMap::new();
    for ad in ads {
        let e = counts.entry(&ad.issue).or_insert((ad.year, 0));
        e.0 = e.0.min(ad.year);
        e.1 += 1;
    }
    let mut out = Vec::new();
    if let Some(calendar) = calendar {
        for issue in calendar {
            let n = counts.remove(issue.as_str()).map_or(0, |e| e.1);
            out.push((issue.clone(), n));
        }
    }
    let mut rest: Vec<(i32, &str, usize)> = counts.into_iter().map(|(k, (y, n))| (y, k, n)).collect();
    rest.sort();
    out.extend(rest.into_iter().map(|(_, k, n)| (k.to_string(), n)));
    out
}
