//! Experiment configuration: TOML text to a validated [`ExperimentConfig`].

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use photon_collapse::estimators::{EstimatorInputs, Targets};
use photon_collapse::scalar::constants::NEUTRON_MASS;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Trajectory,
    Master,
    CrossValidate,
    Shadow,
    Estimate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::Master => "master",
            ExperimentKind::CrossValidate => "cross_validate",
            ExperimentKind::Shadow => "shadow",
            ExperimentKind::Estimate => "estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Photon-number CSL.
    #[default]
    Number,
    /// Photon energy-density CSL.
    Energy,
    /// Ensemble average of the discrete collapse process.
    Grw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSpec {
    pub dims: usize,
    pub cells_per_axis: usize,
    /// m.
    pub cell_size: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            dims: 1,
            cells_per_axis: 1,
            cell_size: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSpec {
    pub max_total: u32,
    pub matter_dim: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            max_total: 3,
            matter_dim: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseSpec {
    /// Smearing length, m.
    pub a: f64,
    /// Resolution.
    pub b: f64,
    /// Events per cell per second. Ignored when `mu` is given.
    pub mu_cell: f64,
    /// Events per unit volume per second.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Continuous CSL rate, s^-1.
    pub lambda: f64,
    /// Mass normalization of the energy model, kg.
    pub m_n: f64,
    /// Event-rate multiplier standing in for unsimulated cells.
    pub rate_multiplier: f64,
}

impl Default for CollapseSpec {
    fn default() -> Self {
        Self {
            a: 1e-4,
            b: 4.0,
            mu_cell: 1.0,
            mu: None,
            lambda: 1.0,
            m_n: NEUTRON_MASS,
            rate_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    #[default]
    Zero,
    FreeHopping,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    /// Hopping amplitude `J` (s^-1) for `free_hopping`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopping: Option<f64>,
    /// JSON matrix file for `custom`, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub matter: usize,
    pub occupation: Vec<u32>,
    #[serde(default = "one")]
    pub amplitude: [f64; 2],
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

/// Either a single occupation pattern with optional matter amplitudes
/// (a product state) or an explicit list of terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupation: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matter_amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimesSpec {
    /// s.
    pub t_final: f64,
    /// Master-equation RK4 step, s.
    pub dt: f64,
    /// Points on the uniform output grid `[0, t_final]`.
    pub samples: usize,
    /// Explicit output times; replaces the uniform grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_times: Option<Vec<f64>>,
}

impl Default for TimesSpec {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt: 1e-3,
            samples: 11,
            sample_times: None,
        }
    }
}

impl TimesSpec {
    pub fn grid(&self) -> Vec<f64> {
        match &self.sample_times {
            Some(t) => t.clone(),
            None => photon_collapse::trajectory::uniform_grid(self.t_final, self.samples),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MasterSpec {
    /// Density-matrix element whose decay is fitted.
    pub coherence_pair: [usize; 2],
    pub check_positivity: bool,
}

impl Default for MasterSpec {
    fn default() -> Self {
        Self {
            coherence_pair: [0, 1],
            check_positivity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySpec {
    /// Store full state vectors at every sample.
    pub record_states: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShadowSpec {
    pub branch_a: Vec<usize>,
    pub branch_b: Vec<usize>,
    pub reservoir_a: Vec<usize>,
    pub reservoir_b: Vec<usize>,
    pub deficit: f64,
    pub ambient_occupancy: u32,
    pub grain_amplitudes: [[f64; 2]; 2],
    pub scattering_strength: f64,
    pub threshold: f64,
}

impl Default for ShadowSpec {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            branch_a: vec![0],
            branch_b: vec![],
            reservoir_a: vec![],
            reservoir_b: vec![],
            deficit: 1.0 / 3.0,
            ambient_occupancy: 3,
            grain_amplitudes: [[h, 0.0], [h, 0.0]],
            scattering_strength: 0.0,
            threshold: photon_collapse::shadow::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSpec {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    /// Relative tolerance of the closed-form dephasing check.
    pub dephasing_law: f64,
    /// Allowed ratio between the simulated and analytic collapse times.
    pub shadow_factor: f64,
}

impl Default for ChecksSpec {
    fn default() -> Self {
        Self {
            trace: 1e-9,
            hermiticity: 1e-10,
            min_eigenvalue: -1e-8,
            dephasing_law: 1e-6,
            shadow_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub collapse: CollapseSpec,
    #[serde(default)]
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub times: TimesSpec,
    #[serde(default)]
    pub master: MasterSpec,
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub shadow: ShadowSpec,
    #[serde(default)]
    pub estimate: EstimatorInputs,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default)]
    pub checks: ChecksSpec,
}

fn default_trajectories() -> usize {
    1000
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// A config of the given kind with every other field defaulted.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            trajectories: default_trajectories(),
            output: default_output(),
            model: ModelKind::default(),
            lattice: LatticeSpec::default(),
            basis: BasisSpec::default(),
            collapse: CollapseSpec::default(),
            hamiltonian: HamiltonianSpec::default(),
            initial: InitialSpec::default(),
            times: TimesSpec::default(),
            master: MasterSpec::default(),
            trajectory: TrajectorySpec::default(),
            shadow: ShadowSpec::default(),
            estimate: EstimatorInputs::default(),
            targets: Targets::default(),
            checks: ChecksSpec::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Cell volume of the configured lattice.
    pub fn cell_volume(&self) -> f64 {
        self.lattice.cell_size.powi(self.lattice.dims as i32)
    }

    /// Per-cell event rate `mu * V_cell`, whichever way it was given.
    pub fn mu_cell(&self) -> f64 {
        match self.collapse.mu {
            Some(mu) => mu * self.cell_volume(),
            None => self.collapse.mu_cell,
        }
    }

    pub fn mu(&self) -> f64 {
        self.collapse.mu.unwrap_or(self.collapse.mu_cell / self.cell_volume())
    }

    /// Semantic checks; every problem is reported.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut v = Validator::default();
        v.require(self.seed <= i64::MAX as u64, "seed", "must not exceed 2^63 - 1");
        let l = &self.lattice;
        v.require((1..=3).contains(&l.dims), "lattice.dims", "must be 1, 2 or 3");
        v.require(l.cells_per_axis >= 1, "lattice.cells_per_axis", "must be at least 1");
        v.positive("lattice.cell_size", l.cell_size);
        v.require(self.basis.matter_dim >= 1, "basis.matter_dim", "must be at least 1");

        let c = &self.collapse;
        v.positive("collapse.a", c.a);
        v.positive("collapse.b", c.b);
        v.require(c.b <= 1e12, "collapse.b", "must not exceed 1e12");
        v.non_negative("collapse.mu_cell", c.mu_cell);
        if let Some(mu) = c.mu {
            v.non_negative("collapse.mu", mu);
        }
        v.non_negative("collapse.lambda", c.lambda);
        v.positive("collapse.m_n", c.m_n);
        v.positive("collapse.rate_multiplier", c.rate_multiplier);

        if self.hamiltonian.kind == HamiltonianKind::FreeHopping {
            match self.hamiltonian.hopping {
                Some(j) => v.require(j.is_finite(), "hamiltonian.hopping", "must be finite"),
                None => v.push("hamiltonian.hopping", "required for kind = \"free_hopping\""),
            }
        }
        if self.hamiltonian.kind == HamiltonianKind::Custom && self.hamiltonian.file.is_none() {
            v.push("hamiltonian.file", "required for kind = \"custom\"");
        }

        let t = &self.times;
        v.positive("times.t_final", t.t_final);
        v.positive("times.dt", t.dt);
        match &t.sample_times {
            Some(st) => {
                v.require(!st.is_empty(), "times.sample_times", "must not be empty");
                v.require(
                    st.windows(2).all(|w| w[0] <= w[1]) && st.iter().all(|x| *x >= 0.0 && *x <= t.t_final),
                    "times.sample_times",
                    "must be non-decreasing and within [0, t_final]",
                );
            }
            None => v.require(t.samples >= 2, "times.samples", "must be at least 2"),
        }

        let cells = l.cells_per_axis.checked_pow(l.dims as u32).unwrap_or(usize::MAX);
        let needs_state = matches!(
            self.experiment,
            ExperimentKind::Trajectory | ExperimentKind::Master | ExperimentKind::CrossValidate
        );
        if needs_state {
            self.validate_initial(&mut v, cells);
            v.require(self.trajectories >= 1, "trajectories", "must be at least 1");
        }
        if self.experiment == ExperimentKind::Master {
            let [i, j] = self.master.coherence_pair;
            v.require(i != j, "master.coherence_pair", "must name an off-diagonal element");
        }
        if self.experiment == ExperimentKind::Shadow {
            let s = &self.shadow;
            v.require(
                self.basis.matter_dim == 2,
                "basis.matter_dim",
                "shadow experiments need 2",
            );
            v.require((0.0..=1.0).contains(&s.deficit), "shadow.deficit", "must lie in [0, 1]");
            v.require(
                s.threshold > 0.0 && s.threshold < 0.5,
                "shadow.threshold",
                "must lie in (0, 0.5)",
            );
            v.require(
                s.scattering_strength.is_finite(),
                "shadow.scattering_strength",
                "must be finite",
            );
            v.require(self.trajectories >= 1, "trajectories", "must be at least 1");
            for (key, set) in [
                ("shadow.branch_a", &s.branch_a),
                ("shadow.branch_b", &s.branch_b),
                ("shadow.reservoir_a", &s.reservoir_a),
                ("shadow.reservoir_b", &s.reservoir_b),
            ] {
                v.require(set.iter().all(|&x| x < cells), key, "cell index outside the lattice");
            }
            v.require(
                !s.branch_a.iter().any(|x| s.branch_b.contains(x)),
                "shadow.branch_b",
                "shadows of A and B must not overlap",
            );
        }
        if self.experiment == ExperimentKind::Estimate {
            if let Err(e) = self.estimate.validate() {
                v.push("estimate", &e.to_string());
            }
        }
        let ch = &self.checks;
        v.positive("checks.trace", ch.trace);
        v.positive("checks.hermiticity", ch.hermiticity);
        v.require(ch.min_eigenvalue <= 0.0, "checks.min_eigenvalue", "must be <= 0");
        v.positive("checks.dephasing_law", ch.dephasing_law);
        v.require(ch.shadow_factor >= 1.0, "checks.shadow_factor", "must be >= 1");
        v.issues
    }

    fn validate_initial(&self, v: &mut Validator, cells: usize) {
        let init = &self.initial;
        let matter = self.basis.matter_dim;
        let check_occ = |v: &mut Validator, key: &str, occ: &[u32]| {
            if occ.len() != cells {
                v.push(key, &format!("needs {cells} entries, found {}", occ.len()));
            } else if occ.iter().sum::<u32>() > self.basis.max_total {
                v.push(key, "exceeds basis.max_total");
            }
        };
        match (&init.occupation, init.terms.is_empty()) {
            (Some(_), false) => v.push("initial", "give either occupation or terms, not both"),
            (None, true) => v.push("initial", "an initial state is required"),
            (Some(occ), true) => {
                check_occ(v, "initial.occupation", occ);
                if let Some(m) = &init.matter_amplitudes {
                    v.require(
                        m.len() == matter,
                        "initial.matter_amplitudes",
                        "length must equal basis.matter_dim",
                    );
                    v.require(
                        m.iter().any(|c| c[0] != 0.0 || c[1] != 0.0),
                        "initial.matter_amplitudes",
                        "must not all vanish",
                    );
                }
            }
            (None, false) => {
                v.require(
                    init.matter_amplitudes.is_none(),
                    "initial.matter_amplitudes",
                    "only valid together with initial.occupation",
                );
                for (k, t) in init.terms.iter().enumerate() {
                    check_occ(v, &format!("initial.terms[{k}].occupation"), &t.occupation);
                    v.require(
                        t.matter < matter,
                        &format!("initial.terms[{k}].matter"),
                        "outside basis.matter_dim",
                    );
                }
            }
        }
    }
}

/// One configuration problem, located by key path and, for syntax errors,
/// by line and column (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{l}:{c}: ")?,
            (Some(l), None) => write!(f, "{l}: ")?,
            _ => {}
        }
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for issue in &self.0 {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|i| i.path.as_str()).collect()
    }
}

#[derive(Default)]
struct Validator {
    issues: Vec<ConfigIssue>,
}

impl Validator {
    fn push(&mut self, path: &str, message: &str) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
            line: None,
            column: None,
        });
    }

    fn require(&mut self, ok: bool, path: &str, message: &str) {
        if !ok {
            self.push(path, message);
        }
    }

    fn positive(&mut self, path: &str, x: f64) {
        self.require(x > 0.0 && x.is_finite(), path, "must be positive and finite");
    }

    fn non_negative(&mut self, path: &str, x: f64) {
        self.require(x >= 0.0 && x.is_finite(), path, "must be non-negative and finite");
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn located(text: &str, path: &str, err: &toml::de::Error) -> ConfigIssue {
    let (line, column) = match err.span() {
        Some(span) => {
            let (l, c) = line_col(text, span.start);
            (Some(l), Some(c))
        }
        None => (None, None),
    };
    ConfigIssue {
        path: path.into(),
        message: err.message().trim().to_string(),
        line,
        column,
    }
}

fn check_section<T: DeserializeOwned>(value: &toml::Value) -> Option<String> {
    value
        .clone()
        .try_into::<T>()
        .err()
        .map(|e| e.message().trim().to_string())
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![located(text, "", &e)]))?;

    let mut issues = Vec::new();
    for (key, value) in &table {
        let problem = match key.as_str() {
            "experiment" => check_section::<ExperimentKind>(value),
            "seed" => check_section::<u64>(value),
            "trajectories" => check_section::<usize>(value),
            "output" => check_section::<PathBuf>(value),
            "model" => check_section::<ModelKind>(value),
            "lattice" => check_section::<LatticeSpec>(value),
            "basis" => check_section::<BasisSpec>(value),
            "collapse" => check_section::<CollapseSpec>(value),
            "hamiltonian" => check_section::<HamiltonianSpec>(value),
            "initial" => check_section::<InitialSpec>(value),
            "times" => check_section::<TimesSpec>(value),
            "master" => check_section::<MasterSpec>(value),
            "trajectory" => check_section::<TrajectorySpec>(value),
            "shadow" => check_section::<ShadowSpec>(value),
            "estimate" => check_section::<EstimatorInputs>(value),
            "targets" => check_section::<Targets>(value),
            "checks" => check_section::<ChecksSpec>(value),
            _ => Some("unknown key".into()),
        };
        if let Some(message) = problem {
            let path = match message
                .strip_prefix("unknown field `")
                .and_then(|m| m.split('`').next())
            {
                Some(field) => format!("{key}.{field}"),
                None => key.clone(),
            };
            issues.push(ConfigIssue {
                path,
                message,
                line: None,
                column: None,
            });
        }
    }
    if !table.contains_key("experiment") {
        issues.push(ConfigIssue {
            path: "experiment".into(),
            message: "missing required key".into(),
            line: None,
            column: None,
        });
    }
    if !issues.is_empty() {
        for issue in &mut issues {
            locate(text, issue);
        }
        return Err(ConfigErrors(issues));
    }

    let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigErrors(vec![located(text, "", &e)]))?;
    let mut issues = config.validate();
    if issues.is_empty() {
        Ok(config)
    } else {
        for issue in &mut issues {
            locate(text, issue);
        }
        Err(ConfigErrors(issues))
    }
}

/// Fills in the line and column of `section.key` (or a top-level key) by
/// scanning the source. Keys inside arrays of tables are left unlocated.
fn locate(text: &str, issue: &mut ConfigIssue) {
    if issue.line.is_some() {
        return;
    }
    let (section, key) = match issue.path.split_once('.') {
        Some((s, k)) => (s, k.split('.').next().unwrap_or(k)),
        None => ("", issue.path.as_str()),
    };
    let mut current = String::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(header) = trimmed.strip_prefix('[') {
            current = header
                .trim_start_matches('[')
                .split(']')
                .next()
                .unwrap_or("")
                .trim()
                .to_string();
            if section.is_empty() && current == key {
                issue.line = Some(n + 1);
                issue.column = Some(line.len() - trimmed.len() + 1);
                return;
            }
            continue;
        }
        let name = trimmed.split('=').next().unwrap_or("").trim().trim_matches('"');
        if current == section && name == key && trimmed.contains('=') {
            issue.line = Some(n + 1);
            issue.column = Some(line.len() - trimmed.len() + 1);
            return;
        }
    }
}

fn key_paths(value: &toml::Value, prefix: &str, out: &mut BTreeSet<String>) {
    if let toml::Value::Table(t) = value {
        for (k, v) in t {
            let path = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            if v.is_table() {
                key_paths(v, &path, out);
            } else {
                out.insert(path);
            }
        }
    }
}

/// Keys present in the resolved config but absent from the source text.
pub fn defaulted_keys(source: &str, resolved: &ExperimentConfig) -> Vec<String> {
    let given: toml::Value = source
        .parse::<toml::Table>()
        .map(toml::Value::Table)
        .unwrap_or(toml::Value::Table(Default::default()));
    let full = toml::Value::try_from(resolved).expect("config converts to a TOML value");
    let mut have = BTreeSet::new();
    let mut all = BTreeSet::new();
    key_paths(&given, "", &mut have);
    key_paths(&full, "", &mut all);
    all.difference(&have)
        .filter(|k| !have.iter().any(|h| k.starts_with(&format!("{h}."))))
        .cloned()
        .collect()
}
