//! Grid sweeps over budget-ascended runs and fixed-multiplier baselines,
//! with the Pareto-dominance verdict between the two families.

use serde::{Deserialize, Serialize};

use super::config::{DualConfig, OptimError};
use super::epsilon::select_epsilon;
use super::lagvae::{run_infovae_baseline, run_lagvae};

fn default_tol() -> f64 {
    0.02
}

/// One dual-ascent sweep point: an information preference plus slack on
/// the selected budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagVaePoint {
    pub alpha1: f64,
    #[serde(default)]
    pub gamma_abs: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma_rel: Option<Vec<f64>>,
}

/// One fixed-multiplier sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfoVaePoint {
    pub alpha1: f64,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Template run configuration; per-point fields are overlaid on it.
    pub base: DualConfig,
    pub lagvae_points: Vec<LagVaePoint>,
    pub infovae_points: Vec<InfoVaePoint>,
    #[serde(default = "default_tol")]
    pub tolerance_iq: f64,
    #[serde(default = "default_tol")]
    pub tolerance_elbo: f64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, OptimError> {
        let cfg: SweepConfig = serde_json::from_str(text)
            .map_err(|e| OptimError::Config(format!("invalid sweep JSON: {e}")))?;
        cfg.base.validate()?;
        Ok(cfg)
    }
}

/// Result of one sweep run, the fields the dominance check consumes.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub id: String,
    pub method: String,
    pub alpha1: f64,
    pub params: String,
    pub i_q: f64,
    pub elbo: f64,
    pub constraints: Vec<f64>,
    pub epsilons: Vec<f64>,
}

/// A fixed-multiplier point that beats an ascended point in both the
/// information direction and the consistency proxy.
#[derive(Debug, Clone, Serialize)]
pub struct Domination {
    pub infovae_id: String,
    pub lagvae_id: String,
    pub info_margin: f64,
    pub elbo_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub dominations: Vec<Domination>,
    pub pass: bool,
}

impl SweepOutcome {
    /// CSV of all runs, in deterministic point order.
    pub fn to_csv(&self) -> String {
        let k = self.rows.first().map_or(0, |r| r.constraints.len());
        let mut out = String::from("run_id,method,alpha1,params,i_q,elbo");
        for i in 1..=k {
            out.push_str(&format!(",d_{i}"));
        }
        for i in 1..=k {
            out.push_str(&format!(",eps_{i}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                r.id, r.method, r.alpha1, r.params, r.i_q, r.elbo
            ));
            for v in r.constraints.iter().chain(&r.epsilons) {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

enum Job {
    LagVae(usize),
    InfoVae(usize),
}

fn run_one(cfg: &SweepConfig, hat: &[f64], job: &Job) -> Result<SweepRow, OptimError> {
    match job {
        Job::LagVae(i) => {
            let point = &cfg.lagvae_points[*i];
            let mut run = cfg.base.clone();
            run.alpha1 = point.alpha1;
            run.gamma_abs = None;
            run.gamma_rel = None;
            let k = run.constraints.len();
            let zero = vec![0.0; k];
            let ga = point.gamma_abs.as_deref().unwrap_or(&zero);
            let gr = point.gamma_rel.as_deref().unwrap_or(&zero);
            for (j, c) in run.constraints.iter_mut().enumerate() {
                c.epsilon = Some((hat[j] + ga[j] + gr[j] * hat[j]).max(super::epsilon::EPSILON_FLOOR));
            }
            let trace = run_lagvae(&run)?;
            let last = trace.final_row();
            let fmt = |v: &[f64]| {
                v.iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join("|")
            };
            Ok(SweepRow {
                id: format!("lagvae_{i}"),
                method: "lagvae".into(),
                alpha1: point.alpha1,
                params: format!("gamma_abs={};gamma_rel={}", fmt(ga), fmt(gr)),
                i_q: last.i_q,
                elbo: last.elbo,
                constraints: last.constraints.clone(),
                epsilons: trace.epsilons.clone(),
            })
        }
        Job::InfoVae(i) => {
            let point = &cfg.infovae_points[*i];
            let mut run = cfg.base.clone();
            run.alpha1 = point.alpha1;
            run.gamma_abs = None;
            run.gamma_rel = None;
            run.baseline_lambdas = Some(point.lambdas.clone());
            for (j, c) in run.constraints.iter_mut().enumerate() {
                c.epsilon = Some(hat[j].max(super::epsilon::EPSILON_FLOOR));
            }
            let trace = run_infovae_baseline(&run)?;
            let last = trace.final_row();
            Ok(SweepRow {
                id: format!("infovae_{i}"),
                method: "infovae".into(),
                alpha1: point.alpha1,
                params: format!(
                    "lambdas={}",
                    point
                        .lambdas
                        .iter()
                        .map(f64::to_string)
                        .collect::<Vec<_>>()
                        .join("|")
                ),
                i_q: last.i_q,
                elbo: last.elbo,
                constraints: last.constraints.clone(),
                epsilons: trace.epsilons.clone(),
            })
        }
    }
}

/// Runs every sweep point (up to `workers` in parallel; results are merged
/// in point order, so the output is independent of scheduling) and
/// computes the dominance verdict.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepOutcome, OptimError> {
    cfg.base.validate()?;
    // budgets are selected once: the constraint-only run ignores both the
    // preference and the multipliers, so every point shares ε̂
    let hat = if cfg.lagvae_points.is_empty() {
        Vec::new()
    } else {
        let mut sel_cfg = cfg.base.clone();
        sel_cfg.gamma_abs = None;
        sel_cfg.gamma_rel = None;
        select_epsilon(&sel_cfg)?.hat
    };
    let hat = if hat.is_empty() {
        cfg.base
            .constraints
            .iter()
            .map(|c| c.epsilon.unwrap_or(f64::INFINITY))
            .collect()
    } else {
        hat
    };

    let jobs: Vec<Job> = (0..cfg.lagvae_points.len())
        .map(Job::LagVae)
        .chain((0..cfg.infovae_points.len()).map(Job::InfoVae))
        .collect();
    let n = jobs.len();
    let workers = workers.max(1).min(n.max(1));
    let mut results: Vec<Option<Result<SweepRow, OptimError>>> = Vec::new();
    results.resize_with(n, || None);

    let next = std::sync::atomic::AtomicUsize::new(0);
    let results_cell: Vec<std::sync::Mutex<Option<Result<SweepRow, OptimError>>>> =
        (0..n).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = run_one(cfg, &hat, &jobs[i]);
                *results_cell[i].lock().expect("no poisoned results") = Some(r);
            });
        }
    });
    for (i, cell) in results_cell.into_iter().enumerate() {
        results[i] = cell.into_inner().expect("no poisoned results");
    }

    let mut rows = Vec::with_capacity(n);
    for r in results {
        rows.push(r.expect("every job ran")?);
    }

    let lag_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.method == "lagvae").collect();
    let info_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.method == "infovae").collect();
    let mut dominations = Vec::new();
    for v in &info_rows {
        for l in &lag_rows {
            if (v.alpha1 < 0.0) != (l.alpha1 < 0.0) {
                continue;
            }
            let info_margin = if l.alpha1 < 0.0 {
                v.i_q - l.i_q
            } else {
                l.i_q - v.i_q
            };
            let elbo_margin = v.elbo - l.elbo;
            if info_margin > cfg.tolerance_iq && elbo_margin > cfg.tolerance_elbo {
                dominations.push(Domination {
                    infovae_id: v.id.clone(),
                    lagvae_id: l.id.clone(),
                    info_margin,
                    elbo_margin,
                });
            }
        }
    }
    let pass = dominations.is_empty();
    Ok(SweepOutcome {
        rows,
        dominations,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_sweep() -> SweepConfig {
        serde_json::from_value(serde_json::json!({
            "base": {
                "q_x": [0.5, 0.3, 0.2],
                "p_z": [0.6, 0.4],
                "alpha1": 0.0,
                "constraints": [
                    {"kind": "neg_elbo"},
                    {"kind": "mmd_z"}
                ],
                "rho_theta": 0.1,
                "rho_lambda": 0.4,
                "iters": 1500,
                "select_iters": 2000,
                "seed": 3
            },
            "lagvae_points": [
                {"alpha1": -1.0, "gamma_abs": [0.3, 0.0], "gamma_rel": [0.0, 0.5]}
            ],
            "infovae_points": [
                {"alpha1": -1.0, "lambdas": [1.0, 10.0]}
            ]
        }))
        .unwrap()
    }

    #[test]
    fn sweep_rows_in_point_order_and_deterministic() {
        let cfg = tiny_sweep();
        let a = run_sweep(&cfg, 4).unwrap();
        let b = run_sweep(&cfg, 1).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.rows[0].id, "lagvae_0");
        assert_eq!(a.rows[1].id, "infovae_0");
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn single_point_sweep_trivially_passes() {
        let mut cfg = tiny_sweep();
        cfg.infovae_points.clear();
        let out = run_sweep(&cfg, 2).unwrap();
        assert!(out.pass);
        assert!(out.dominations.is_empty());
    }

    #[test]
    fn zero_tolerance_is_stricter() {
        // with tolerance zero the verdict may flip on ties; the knob only
        // tightens, never loosens
        let cfg = tiny_sweep();
        let relaxed = run_sweep(&cfg, 2).unwrap();
        let mut strict_cfg = tiny_sweep();
        strict_cfg.tolerance_iq = 0.0;
        strict_cfg.tolerance_elbo = 0.0;
        let strict = run_sweep(&strict_cfg, 2).unwrap();
        assert!(strict.dominations.len() >= relaxed.dominations.len());
    }
}
