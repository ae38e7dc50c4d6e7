use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use pucci_core::bvp::NewtonOptions;
use pucci_core::{Nonlinearity, Potential, PucciParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Omega,
    Solve,
    Branch,
    Certify,
    Sweep,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Omega => "omega",
            Task::Solve => "solve",
            Task::Branch => "branch",
            Task::Certify => "certify",
            Task::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_length: f64,
    pub step: f64,
}

/// Hypothesis the potential is validated against before any run. The well
/// constants default to the ones readable from the descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HypothesisSpec {
    Well {
        #[serde(default)]
        c0: Option<f64>,
        #[serde(default)]
        xi0: Option<f64>,
    },
    Monotone,
    MonotoneDecreasing,
}

/// Initial guess for the Newton solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// The constant-potential ground state for `v_level` (default: the
    /// potential's `V_inf`), moved so that its maximum sits at `shift`.
    Omega {
        #[serde(default)]
        shift: f64,
        #[serde(default)]
        v_level: Option<f64>,
    },
    /// A profile CSV (`x,u` or `x,u,up,upp`), resampled onto the grid.
    File { path: PathBuf },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Omega {
            shift: 0.0,
            v_level: None,
        }
    }
}

fn default_kappa0() -> f64 {
    0.25
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskOptions {
    /// Forcing level for `solve`.
    #[serde(default)]
    pub t: f64,
    /// Strictly decreasing ladder for `branch`.
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default = "default_kappa0")]
    pub kappa0: f64,
    #[serde(default)]
    pub init: InitSpec,
    /// Candidate profile for `certify`; solved from `init` when absent.
    #[serde(default)]
    pub candidate: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub expect_consistent: bool,
    #[serde(default)]
    pub newton: NewtonOptions,
}

impl Default for TaskOptions {
    fn default() -> Self {
        Self {
            t: 0.0,
            t_values: Vec::new(),
            kappa0: default_kappa0(),
            init: InitSpec::default(),
            candidate: None,
            expect_consistent: true,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Each run is a partial scenario merged over the enclosing one.
    pub runs: Vec<serde_json::Value>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    /// Optional here; the subcommand decides, but a mismatch is rejected.
    #[serde(default)]
    pub task: Option<Task>,
    pub params: PucciParams,
    pub nonlinearity: Nonlinearity,
    pub potential: Potential,
    #[serde(default)]
    pub hypothesis: Option<HypothesisSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub options: TaskOptions,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Resolve the task from the subcommand and the optional `task` field.
    pub fn resolve_task(&self, requested: Task) -> Result<Task, CliError> {
        match self.task {
            Some(t) if t != requested => Err(CliError::Config(format!(
                "config declares task `{}` but `{}` was requested",
                t.as_str(),
                requested.as_str()
            ))),
            _ => Ok(requested),
        }
    }

    /// Child scenarios of a sweep: each run object is merged over this
    /// scenario with the `sweep` block removed.
    pub fn sweep_children(&self) -> Result<Vec<(Scenario, Task)>, CliError> {
        let spec = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("task `sweep` needs a `sweep` block".into()))?;
        let mut base = serde_json::to_value(self).map_err(|e| CliError::Config(e.to_string()))?;
        if let serde_json::Value::Object(m) = &mut base {
            m.remove("sweep");
            m.remove("task");
        }
        let mut out = Vec::with_capacity(spec.runs.len());
        for (k, run) in spec.runs.iter().enumerate() {
            let mut merged = base.clone();
            merge(&mut merged, run);
            let child: Scenario = serde_json::from_value(merged)
                .map_err(|e| CliError::Config(format!("sweep.runs[{k}]: {e}")))?;
            let task = child
                .task
                .ok_or_else(|| CliError::Config(format!("sweep.runs[{k}]: missing field `task`")))?;
            if task == Task::Sweep || child.sweep.is_some() {
                return Err(CliError::Config(format!("sweep.runs[{k}]: sweeps cannot nest")));
            }
            out.push((child, task));
        }
        Ok(out)
    }
}

/// Recursive object merge; anything that is not an object on both sides is
/// replaced wholesale. Tagged descriptors should be given in full.
fn merge(base: &mut serde_json::Value, over: &serde_json::Value) {
    use serde_json::Value;
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let replace_whole =
                    matches!(k.as_str(), "potential" | "nonlinearity" | "init" | "hypothesis");
                match b.get_mut(k) {
                    Some(slot) if !replace_whole => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}
