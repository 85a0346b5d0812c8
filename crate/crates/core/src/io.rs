//! File formats: solver grids, simulation output, coded-ad and coder CSVs.
//!
//! Floating-point values are written with 17 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::simulate::{CareerTrajectory, PolicySummary};
use crate::solver::{Action, GridSpec, SolveResult, StateMatrix, StationaryPolicy, ValueFunction};
use crate::trends::{CodedAd, CoderTable, CodedPair, KappaReport, TrendMatrix};

pub const GRID_CORNER: &str = "theta\\epsilon";

/// Format with 17 significant digits, fixed-point where that stays readable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn grid_header(grid: &GridSpec) -> Vec<String> {
    std::iter::once(GRID_CORNER.to_string())
        .chain(grid.epsilon_values.iter().map(|&e| fmt_num(e)))
        .collect()
}

fn write_grid<T>(path: &Path, grid: &GridSpec, m: &StateMatrix<T>, cell: impl Fn(&T) -> String) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(grid_header(grid))?;
    for (i, &theta) in grid.theta_values.iter().enumerate() {
        let row = std::iter::once(fmt_num(theta)).chain(m.row(i).iter().map(&cell));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_value_grid(path: &Path, grid: &GridSpec, value: &ValueFunction) -> Result<()> {
    write_grid(path, grid, value, |&v| fmt_num(v))
}

pub fn write_policy_grid(path: &Path, grid: &GridSpec, policy: &StationaryPolicy) -> Result<()> {
    write_grid(path, grid, policy, |a| a.as_str().to_string())
}

/// Long format: `theta,epsilon,action,value`.
pub fn write_action_values(path: &Path, grid: &GridSpec, result: &SolveResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["theta", "epsilon", "action", "value"])?;
    for (i, &theta) in grid.theta_values.iter().enumerate() {
        for (j, &eps) in grid.epsilon_values.iter().enumerate() {
            for action in Action::ALL {
                let v = result.action_values.for_action(action).at(i, j);
                w.write_record([fmt_num(theta), fmt_num(eps), action.as_str().into(), fmt_num(v)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// A policy grid read back from disk, with the axes it was written on.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyFile {
    pub grid: GridSpec,
    pub policy: StationaryPolicy,
}

impl PolicyFile {
    /// Check the stored axes against a model grid.
    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
        if !same(&self.grid.theta_values, &grid.theta_values) || !same(&self.grid.epsilon_values, &grid.epsilon_values) {
            return Err(Error::Validation("policy file grid does not match the model grid".into()));
        }
        Ok(())
    }
}

pub fn read_policy_grid(path: &Path) -> Result<PolicyFile> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Validation(format!("{}: empty policy file", path.display())))??;
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Validation(format!("{}: bad number `{s}`", path.display())))
    };
    let epsilon_values = header.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
    let mut theta_values = Vec::new();
    let mut cells = Vec::new();
    for record in records {
        let record = record?;
        let mut fields = record.iter();
        theta_values.push(parse(fields.next().unwrap_or(""))?);
        let row = fields.map(str::parse::<Action>).collect::<Result<Vec<_>>>()?;
        if row.len() != epsilon_values.len() {
            return Err(Error::Validation(format!(
                "{}: row for theta {} has {} cells, expected {}",
                path.display(),
                theta_values.last().unwrap(),
                row.len(),
                epsilon_values.len()
            )));
        }
        cells.extend(row);
    }
    let policy = StateMatrix::from_vec(theta_values.len(), epsilon_values.len(), cells)?;
    Ok(PolicyFile {
        grid: GridSpec {
            theta_values,
            epsilon_values,
        },
        policy,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionShares {
    pub stay: f64,
    pub new_topic: f64,
    pub new_field: f64,
}

impl ActionShares {
    pub fn of(result: &SolveResult) -> Self {
        ActionShares {
            stay: result.action_share(Action::Stay),
            new_topic: result.action_share(Action::NewTopic),
            new_field: result.action_share(Action::NewField),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveManifest {
    pub tool: String,
    pub version: String,
    pub preset: Option<String>,
    pub config: RunConfig,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub iterations: usize,
    pub residual: f64,
    pub theta_points: usize,
    pub epsilon_points: usize,
    pub action_shares: ActionShares,
    pub files: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SolutionDocument<'a> {
    pub grid: &'a GridSpec,
    pub value: Vec<&'a [f64]>,
    pub policy: Vec<&'a [Action]>,
    pub stay: Vec<&'a [f64]>,
    pub new_topic: Vec<&'a [f64]>,
    pub new_field: f64,
}

impl<'a> SolutionDocument<'a> {
    pub fn new(grid: &'a GridSpec, result: &'a SolveResult) -> Self {
        let rows = |m: &'a StateMatrix<f64>| (0..m.rows()).map(|i| m.row(i)).collect();
        SolutionDocument {
            grid,
            value: rows(&result.value),
            policy: (0..result.policy.rows()).map(|i| result.policy.row(i)).collect(),
            stay: rows(&result.action_values.stay),
            new_topic: rows(&result.action_values.new_topic),
            new_field: result.action_values.new_field.at(0, 0),
        }
    }
}

/// Columns: `t,theta,epsilon,action,income,discounted_income_cumulative`.
pub fn write_trajectory(path: &Path, trajectory: &CareerTrajectory) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "theta", "epsilon", "action", "income", "discounted_income_cumulative"])?;
    let cumulative = trajectory.discounted_cumulative();
    for (t, (((s, a), g), c)) in trajectory
        .states
        .iter()
        .zip(&trajectory.actions)
        .zip(&trajectory.incomes)
        .zip(&cumulative)
        .enumerate()
    {
        w.write_record([
            t.to_string(),
            fmt_num(s.0),
            fmt_num(s.1),
            a.as_str().to_string(),
            fmt_num(*g),
            fmt_num(*c),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv(path: &Path, rows: &[PolicySummary]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["policy", "trials", "mean_discounted_income", "std_error"])?;
    for r in rows {
        w.write_record([r.name.clone(), r.trials.to_string(), fmt_num(r.mean), fmt_num(r.std_error)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn comparison_text(rows: &[PolicySummary]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(6).max(6);
    let mut out = format!("{:<width$}  {:>8}  {:>14}  {:>10}\n", "policy", "trials", "mean", "std_error");
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>14.6}  {:>10.6}\n",
            r.name, r.trials, r.mean, r.std_error
        ));
    }
    out
}

#[derive(Debug, Deserialize)]
struct AdRow {
    year: i32,
    issue: String,
    ad_id: String,
    topics: String,
}

/// Header `year,issue,ad_id,topics`; topics are `;`-separated codes.
pub fn read_ads<R: Read>(reader: R) -> Result<Vec<CodedAd>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(r.headers()?, &["year", "issue", "ad_id", "topics"])?;
    let mut ads = Vec::new();
    for row in r.deserialize::<AdRow>() {
        let row = row?;
        let topics: Vec<&str> = row.topics.split(';').map(str::trim).filter(|t| !t.is_empty()).collect();
        if topics.is_empty() {
            return Err(Error::Validation(format!("ad `{}` has no topic codes", row.ad_id)));
        }
        ads.push(CodedAd::new(row.year, row.issue, row.ad_id, topics));
    }
    Ok(ads)
}

/// Header `item_id,coder1,coder2`.
pub fn read_coder_table<R: Read>(reader: R) -> Result<CoderTable> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(r.headers()?, &["item_id", "coder1", "coder2"])?;
    let mut items = Vec::new();
    for record in r.records() {
        let record = record?;
        items.push(CodedPair {
            item_id: record[0].to_string(),
            coder1: record[1].to_string(),
            coder2: record[2].to_string(),
        });
    }
    Ok(CoderTable { items })
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Validation(format!(
            "expected CSV header `{}`, found `{}`",
            expected.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// One code per line; blank lines and `#` comments are skipped.
pub fn parse_code_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Long format `category,year,proportion`.
pub fn write_trend_long(path: &Path, m: &TrendMatrix) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["category", "year", "proportion"])?;
    for (c, y, p) in m.long_rows() {
        w.write_record([c.to_string(), y.to_string(), fmt_num(p)])?;
    }
    w.flush()?;
    Ok(())
}

/// One `year,proportion,n_mentions` file per category in `dir`.
pub fn write_trend_series(dir: &Path, m: &TrendMatrix) -> Result<()> {
    for (i, c) in m.categories.iter().enumerate() {
        let mut w = writer(&dir.join(format!("{c}.csv")))?;
        w.write_record(["year", "proportion", "n_mentions"])?;
        for (j, y) in m.years.iter().enumerate() {
            w.write_record([y.to_string(), fmt_num(m.proportions[i][j]), m.yearly_totals[j].to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_issue_counts(path: &Path, counts: &[(String, usize)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["issue", "ads"])?;
    for (issue, n) in counts {
        w.write_record([issue.clone(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn kappa_json(report: &KappaReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2.5), "2.5000000000000000");
        assert_eq!(fmt_num(200.0), "200.00000000000000");
        assert_eq!(fmt_num(0.1), "0.10000000000000001");
    }

    proptest! {
        #[test]
        fn number_format_roundtrips(x in prop::num::f64::NORMAL) {
            prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn ads_csv() {
        let text = "year,issue,ad_id,topics\n2001,2001-01,a1,tcs;security\n\n2001,2001-01,a2, security \n";
        let ads = read_ads(text.as_bytes()).unwrap();
        assert_eq!(ads.len(), 2);
        assert_eq!(ads[0].topics.len(), 2);
        assert!(ads[1].topics.contains("security"));
        assert!(read_ads("year,issue,id,topics\n".as_bytes()).is_err());
        assert!(read_ads("year,issue,ad_id,topics\n2001,i,a1,\n".as_bytes()).is_err());
    }

    #[test]
    fn coder_csv() {
        let t = read_coder_table("item_id,coder1,coder2\n1,A,A\n2,A,B\n".as_bytes()).unwrap();
        assert_eq!(t.items.len(), 2);
        assert_eq!(t.items[1].coder2, "B");
    }

    #[test]
    fn code_list() {
        assert_eq!(parse_code_list("a\n# c\n\n b # x\n"), vec!["a", "b"]);
    }

    #[test]
    fn policy_grid_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec {
            theta_values: vec![0.0, 0.1, 5.0],
            epsilon_values: vec![0.0, 2.5],
        };
        let policy = StateMatrix::from_fn(3, 2, |i, j| Action::ALL[(i + j) % 3]);
        let path = dir.path().join("policy.csv");
        write_policy_grid(&path, &grid, &policy).unwrap();
        let back = read_policy_grid(&path).unwrap();
        assert_eq!(back.policy, policy);
        assert_eq!(back.grid, grid);
        back.check_grid(&grid).unwrap();
    }
}
