//! CSV writers. Every file starts with a `# key = value` block describing
//! the run, then a header row, then rows with 12 significant digits. Nothing
//! time- or host-dependent is written, so identical runs give identical
//! bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::ScalingReport;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::WaveField;

/// 12 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// A CSV document under construction.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    preamble: String,
    columns: String,
    body: String,
}

impl Csv {
    pub fn new(header_block: &str, columns: &[&str]) -> Self {
        Self {
            preamble: header_block.to_string(),
            columns: columns.join(","),
            body: String::new(),
        }
    }

    /// Adds a `# key = value` line above the column names.
    pub fn comment(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.preamble, "# {key} = {value}");
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        for (k, f) in fields.into_iter().enumerate() {
            if k > 0 {
                self.body.push(',');
            }
            self.body.push_str(&f);
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!("{}{}\n{}", self.preamble, self.columns, self.body)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

pub fn trajectory_csv(header: &str, traj: &Trajectory, slot_labels: Option<&[u64]>) -> Csv {
    let mut cols: Vec<String> = ["t", "t_over_tau", "p_j", "p_s", "norm", "max_spectator"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(labels) = slot_labels {
        cols.extend(labels.iter().map(|i| format!("p_{i}")));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut csv = Csv::new(header, &col_refs);
    for k in 0..traj.len() {
        let t = traj.times[k];
        let mut fields = vec![
            num(t),
            num(t / traj.tau),
            num(traj.initial_population(k)),
            num(traj.searched_population(k)),
            num(traj.norm[k]),
            num(traj.max_spectator(k)),
        ];
        if slot_labels.is_some() {
            fields.extend(traj.populations[k].iter().map(|&p| num(p)));
        }
        csv.row(fields);
    }
    csv
}

/// Trajectory with a leading `model` column naming where it came from.
pub fn tagged_trajectory_csv(header: &str, model: &str, traj: &Trajectory) -> Csv {
    let mut csv = Csv::new(header, &["model", "t", "t_over_tau", "p_j", "p_s", "norm"]);
    for k in 0..traj.len() {
        let t = traj.times[k];
        csv.row([
            model.to_string(),
            num(t),
            num(t / traj.tau),
            num(traj.initial_population(k)),
            num(traj.searched_population(k)),
            num(traj.norm[k]),
        ]);
    }
    csv
}

/// Full and two-level searched populations at the full run's recorded times.
pub fn comparison_csv(header: &str, full: &Trajectory, rwa: &Trajectory) -> Csv {
    let mut csv = Csv::new(
        header,
        &["t", "t_over_tau", "p_s_full", "p_s_rwa", "difference", "p_j_full", "p_j_rwa"],
    );
    for k in 0..full.len().min(rwa.len()) {
        let t = full.times[k];
        let ps = full.searched_population(k);
        let pr = rwa.searched_population(k);
        csv.row([
            num(t),
            num(t / full.tau),
            num(ps),
            num(pr),
            num(ps - pr),
            num(full.initial_population(k)),
            num(rwa.initial_population(k)),
        ]);
    }
    csv
}

pub fn scan_csv(header: &str, report: &ScalingReport) -> Csv {
    let mut csv = Csv::new(header, &["n", "t_star", "tau", "t_star_over_tau", "p_star"]);
    if let Some(fit) = report.fit {
        csv.comment("alpha", &num(fit.alpha));
        csv.comment("alpha_normalized", &num(fit.alpha_normalized));
        csv.comment("correlation", &num(fit.correlation));
    }
    for r in &report.rows {
        csv.row([
            r.n.to_string(),
            num(r.t_star),
            num(r.tau),
            num(r.t_star_over_tau),
            num(r.p_star),
        ]);
    }
    csv
}

/// Frequency-difference multiplicities: over the search set alone and over
/// the search set together with the initial mode.
pub fn histogram_csv(
    header: &str,
    search_set: &BTreeMap<i64, usize>,
    with_initial: &BTreeMap<i64, usize>,
) -> Csv {
    let mut csv = Csv::new(
        header,
        &["index_difference", "multiplicity_search_set", "multiplicity_with_initial"],
    );
    let mut keys: Vec<i64> = search_set.keys().chain(with_initial.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    for d in keys {
        csv.row([
            d.to_string(),
            search_set.get(&d).copied().unwrap_or(0).to_string(),
            with_initial.get(&d).copied().unwrap_or(0).to_string(),
        ]);
    }
    csv
}

/// Stacked field snapshots, one block of grid rows per time.
pub fn field_csv(header: &str, tau: f64, snapshots: &[(f64, WaveField)]) -> Csv {
    let mut csv = Csv::new(header, &["t", "t_over_tau", "x", "re_psi", "im_psi", "abs2_psi"]);
    for (t, field) in snapshots {
        for (x, z) in field.x.iter().zip(&field.values) {
            csv.row([
                num(*t),
                num(t / tau),
                num(*x),
                num(z.re),
                num(z.im),
                num(z.norm_sqr()),
            ]);
        }
    }
    csv
}

/// Ordered `key = value` summary lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, num(value))
    }

    pub fn path(&mut self, key: &str, value: &Path) -> &mut Self {
        self.text(key, value.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
