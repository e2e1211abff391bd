use std::fmt::Write as _;
use std::fs;
use std::str::FromStr;

use rayon::prelude::*;

use super::{prepare, run_seed, sig9, ExperimentSpec};
use crate::error::{Error, Result};
use crate::schedules::ScheduleSpec;

/// A named mutation schedule plus neoteny on/off.
///
/// Accepts the preset names `C`, `LD`, `QD`, `LD/N`, `QD/N`, `LD/N+R`,
/// `QD/N+R`, `B0.15`, `B0.50`, or `label=schedule[+n][+r]` where `+n`
/// enables neoteny and `+r` adds the random companion.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub label: String,
    pub schedule: ScheduleSpec,
    pub neoteny: bool,
    pub with_random: bool,
}

impl Strategy {
    pub fn new(label: &str, schedule: ScheduleSpec, neoteny: bool, with_random: bool) -> Self {
        Self {
            label: label.to_string(),
            schedule,
            neoteny,
            with_random,
        }
    }

    /// The seven rows of the classic strategy comparison.
    pub fn table_presets() -> Vec<Strategy> {
        ["C", "LD", "QD", "LD/N", "QD/N", "LD/N+R", "QD/N+R"]
            .iter()
            .map(|s| s.parse().expect("preset"))
            .collect()
    }

    fn apply(&self, base: &ExperimentSpec) -> ExperimentSpec {
        let mut spec = base.clone();
        spec.schedule = self.schedule;
        spec.neoteny.enabled = self.neoteny;
        spec.neoteny.with_random = self.neoteny && self.with_random;
        spec
    }

    fn dir_name(&self) -> String {
        self.label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect()
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((label, rest)) = s.split_once('=') {
            let mut parts = rest.split('+');
            let schedule = parts.next().unwrap_or_default().parse()?;
            let (mut n, mut r) = (false, false);
            for flag in parts {
                match flag.to_ascii_lowercase().as_str() {
                    "n" => n = true,
                    "r" => r = true,
                    _ => return Err(Error::arg(format!("unknown strategy flag +{flag} in {s:?}"))),
                }
            }
            if r && !n {
                return Err(Error::arg(format!("strategy {s:?}: +r requires +n")));
            }
            return Ok(Self::new(label.trim(), schedule, n, r));
        }
        let upper = s.to_ascii_uppercase();
        let (base, neoteny, with_random) = match upper.split_once('/') {
            None => (upper.as_str(), false, false),
            Some((b, "N")) => (b, true, false),
            Some((b, "N+R")) => (b, true, true),
            _ => return Err(Error::arg(format!("unknown strategy {s:?}"))),
        };
        let schedule = match base {
            "C" => "c",
            "LD" => "ld",
            "QD" => "qd",
            "B0.15" | "B[0.15]" => "back:0.15",
            "B0.50" | "B0.5" | "B[0.50]" => "back:0.5",
            _ => return Err(Error::arg(format!("unknown strategy {s:?}"))),
        }
        .parse()?;
        Ok(Self::new(s, schedule, neoteny, with_random))
    }
}

pub struct BatchSpec {
    /// Image, GA parameters, seeds, neoteny windows and output root.
    pub base: ExperimentSpec,
    pub strategies: Vec<Strategy>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    /// Final fitness per seed, or the error that stopped that cell.
    pub cells: Vec<std::result::Result<f64, String>>,
}

/// Strategy × seed grid of final fitness values.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<SummaryRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl SummaryTable {
    pub fn row_mean(&self, row: usize) -> Option<f64> {
        mean(self.rows[row].cells.iter().filter_map(|c| c.as_ref().ok().copied()))
    }

    pub fn seed_mean(&self, col: usize) -> Option<f64> {
        mean(self.rows.iter().filter_map(|r| r.cells[col].as_ref().ok().copied()))
    }

    pub fn overall_mean(&self) -> Option<f64> {
        mean(self.rows.iter().flat_map(|r| r.cells.iter().filter_map(|c| c.as_ref().ok().copied())))
    }

    pub fn row(&self, label: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.label == label)
    }

    /// Row holding the highest fitness for seed column `col`.
    pub fn best_for_seed(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.rows.iter().enumerate() {
            if let Ok(v) = r.cells[col] {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn best_by_mean(&self) -> Option<usize> {
        (0..self.rows.len())
            .filter_map(|i| self.row_mean(i).map(|m| (i, m)))
            .fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
                Some((_, b)) if b >= m => acc,
                _ => Some((i, m)),
            })
            .map(|(i, _)| i)
    }

    pub fn errors(&self) -> Vec<(String, u64, String)> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (seed, c) in self.seeds.iter().zip(&r.cells) {
                if let Err(e) = c {
                    out.push((r.label.clone(), *seed, e.clone()));
                }
            }
        }
        out
    }

    /// Strategy rows, seed columns, an `average` column and row, and a final
    /// `best` row naming the winning strategy per seed.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(sig9).unwrap_or_else(|| "NA".into());
        let mut out = String::from("strategy");
        for s in &self.seeds {
            let _ = write!(out, ",R={s}");
        }
        out.push_str(",average\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&r.label);
            for c in &r.cells {
                match c {
                    Ok(v) => {
                        let _ = write!(out, ",{}", sig9(*v));
                    }
                    Err(_) => out.push_str(",error"),
                }
            }
            let _ = writeln!(out, ",{}", opt(self.row_mean(i)));
        }
        out.push_str("average");
        for col in 0..self.seeds.len() {
            let _ = write!(out, ",{}", opt(self.seed_mean(col)));
        }
        let _ = writeln!(out, ",{}", opt(self.overall_mean()));
        out.push_str("best");
        let label = |i: Option<usize>| i.map(|i| self.rows[i].label.clone()).unwrap_or_else(|| "NA".into());
        for col in 0..self.seeds.len() {
            let _ = write!(out, ",{}", label(self.best_for_seed(col)));
        }
        let _ = writeln!(out, ",{}", label(self.best_by_mean()));
        out
    }
}

/// Runs every strategy × seed cell concurrently into
/// `out_dir/<strategy>/seed_<s>/` and writes `out_dir/summary.csv`.
///
/// A failing cell is recorded in the table (and in `errors.txt`); the rest
/// of the grid still runs.
pub fn batch(spec: &BatchSpec) -> Result<SummaryTable> {
    let base = &spec.base;
    if spec.strategies.is_empty() || base.seeds.is_empty() {
        return Err(Error::config("batch needs at least one strategy and one seed"));
    }
    let prepared = prepare(base.image.load()?, base.clusters, base.cube_side)?;
    fs::create_dir_all(&base.out_dir)?;
    fs::write(base.out_dir.join("cells.csv"), super::cells_csv(&prepared.cells))?;

    let grid: Vec<(usize, u64)> = (0..spec.strategies.len())
        .flat_map(|s| base.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let results: Vec<std::result::Result<f64, String>> = grid
        .par_iter()
        .map(|&(s, seed)| {
            let strategy = &spec.strategies[s];
            let cell_spec = strategy.apply(base);
            let dir = base
                .out_dir
                .join(strategy.dir_name())
                .join(format!("seed_{seed}"));
            run_seed(&cell_spec, &prepared, seed, &dir)
                .map(|o| o.final_fitness)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut cells = results.into_iter();
    let rows = spec
        .strategies
        .iter()
        .map(|s| SummaryRow {
            label: s.label.clone(),
            cells: cells.by_ref().take(base.seeds.len()).collect(),
        })
        .collect();
    let table = SummaryTable {
        seeds: base.seeds.clone(),
        rows,
    };
    fs::write(base.out_dir.join("summary.csv"), table.to_csv())?;
    let errors = table.errors();
    if !errors.is_empty() {
        let text: String = errors
            .iter()
            .map(|(label, seed, e)| format!("{label} R={seed}: {e}\n"))
            .collect();
        fs::write(base.out_dir.join("errors.txt"), text)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        let p = Strategy::table_presets();
        assert_eq!(p.len(), 7);
        assert_eq!(p[0], Strategy::new("C", ScheduleSpec::Constant { p0: 0.15 }, false, false));
        assert!(p[3].neoteny && !p[3].with_random);
        assert!(p[6].neoteny && p[6].with_random);
        let b: Strategy = "B0.15".parse().unwrap();
        assert_eq!(b.schedule, ScheduleSpec::Back { p0: 0.15 });
        let custom: Strategy = "fast=ld:0.3:50+n+r".parse().unwrap();
        assert_eq!(custom, Strategy::new("fast", ScheduleSpec::Linear { p0: 0.3, cut: 50 }, true, true));
        assert!("x=ld+r".parse::<Strategy>().is_err());
        assert!("XD".parse::<Strategy>().is_err());
        assert!("LD/Q".parse::<Strategy>().is_err());
        assert_eq!(p[5].dir_name(), "LD_N_R");
    }

    fn table() -> SummaryTable {
        SummaryTable {
            seeds: vec![9, 7445],
            rows: vec![
                SummaryRow { label: "C".into(), cells: vec![Ok(200.0), Ok(190.0)] },
                SummaryRow { label: "LD".into(), cells: vec![Ok(320.0), Err("boom".into())] },
                SummaryRow { label: "QD".into(), cells: vec![Ok(310.0), Ok(330.0)] },
            ],
        }
    }

    #[test]
    fn averages_recompute_from_cells() {
        let t = table();
        assert_eq!(t.row_mean(0), Some(195.0));
        assert_eq!(t.row_mean(1), Some(320.0));
        assert_eq!(t.seed_mean(0), Some(830.0 / 3.0));
        assert_eq!(t.seed_mean(1), Some(260.0));
        assert_eq!(t.overall_mean(), Some(1350.0 / 5.0));
        assert_eq!(t.best_for_seed(0), Some(1));
        assert_eq!(t.best_for_seed(1), Some(2));
        assert_eq!(t.errors(), vec![("LD".to_string(), 7445, "boom".to_string())]);
    }

    #[test]
    fn csv_layout() {
        let csv = table().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "strategy,R=9,R=7445,average");
        assert_eq!(lines[1], "C,200.000000,190.000000,195.000000");
        assert_eq!(lines[2], "LD,320.000000,error,320.000000");
        assert_eq!(lines[4], "average,276.666667,260.000000,270.000000");
        assert_eq!(lines[5], "best,LD,QD,LD");
    }
}
