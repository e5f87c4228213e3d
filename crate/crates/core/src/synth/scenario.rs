use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{generate_instance, GeneratorParams, PerturbationCount};
use super::metrics::accuracy;
use crate::direction::DirectionMethod;
use crate::error::{Result, WcsError};
use crate::gnccp::{match_graphs, SolverConfig};
use crate::objective::RelaxationKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Noise,
    Size,
    Outlier,
    Density,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Noise => "noise",
            ScenarioKind::Size => "size",
            ScenarioKind::Outlier => "outlier",
            ScenarioKind::Density => "density",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = WcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "noise" => Ok(ScenarioKind::Noise),
            "size" => Ok(ScenarioKind::Size),
            "outlier" | "outliers" => Ok(ScenarioKind::Outlier),
            "density" => Ok(ScenarioKind::Density),
            other => Err(WcsError::InvalidConfig(format!(
                "unknown scenario '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Wcs,
    Piw,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Wcs => "wcs",
            Mode::Piw => "piw",
        })
    }
}

impl FromStr for Mode {
    type Err = WcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wcs" => Ok(Mode::Wcs),
            "piw" => Ok(Mode::Piw),
            other => Err(WcsError::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

/// A relaxation paired with a direction solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub relaxation: RelaxationKind,
    pub direction: DirectionMethod,
}

impl Method {
    pub const H1_EXACT: Method = Method::new(RelaxationKind::H1, DirectionMethod::Exact);
    pub const H2_EXACT: Method = Method::new(RelaxationKind::H2, DirectionMethod::Exact);
    pub const H1_FAST: Method = Method::new(RelaxationKind::H1, DirectionMethod::Fast);
    pub const H2_FAST: Method = Method::new(RelaxationKind::H2, DirectionMethod::Fast);
    pub const PIW: Method = Method::new(RelaxationKind::Piw, DirectionMethod::Exact);

    pub const fn new(relaxation: RelaxationKind, direction: DirectionMethod) -> Self {
        Self {
            relaxation,
            direction,
        }
    }

    pub fn name(&self) -> String {
        match self.relaxation {
            RelaxationKind::Piw => "piw".to_string(),
            r => format!("{r}-{}", self.direction),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = WcsError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        if s == "piw" {
            return Ok(Method::PIW);
        }
        let (r, d) = s.split_once('-').ok_or_else(|| {
            WcsError::InvalidConfig(format!("method '{s}' should look like h1-exact"))
        })?;
        Ok(Method::new(r.parse()?, d.parse()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Generator parameters; the seed is replaced per trial.
    pub params: GeneratorParams,
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub mode: Mode,
    pub points: Vec<SweepPoint>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub perturbation: PerturbationCount,
}

fn steps(start: f64, step: f64, count: usize) -> Vec<f64> {
    // Rounded to 10 decimals so 0.1 + 0.2 style drift does not leak into labels.
    (0..count)
        .map(|k| ((start + k as f64 * step) * 1e10).round() / 1e10)
        .collect()
}

struct Base {
    m: usize,
    n: usize,
    l: usize,
    sigma: f64,
    density: f64,
}

impl Base {
    fn params(&self) -> GeneratorParams {
        GeneratorParams {
            m: self.m,
            n: self.n,
            l: self.l,
            sigma: self.sigma,
            density: self.density,
            seed: 0,
            perturbation: PerturbationCount::Each,
        }
    }
}

impl ScenarioSpec {
    /// Full-size sweep grids
    /// (30 vertices for WCS, 50 for part-in-whole).
    pub fn full(kind: ScenarioKind, mode: Mode) -> Self {
        let (base, sizes, outlier_ls) = match mode {
            Mode::Wcs => (
                Base {
                    m: 30,
                    n: 35,
                    l: 25,
                    sigma: 0.05,
                    density: 0.5,
                },
                (20..=40).step_by(2).collect::<Vec<usize>>(),
                (20..=30).rev().collect::<Vec<usize>>(),
            ),
            Mode::Piw => (
                Base {
                    m: 45,
                    n: 50,
                    l: 45,
                    sigma: 0.05,
                    density: 0.5,
                },
                (40..=60).step_by(2).collect(),
                (40..=50).rev().collect(),
            ),
        };
        Self::build(kind, mode, base, &sizes, &outlier_ls, 5, 30)
    }

    /// Reduced grids for quick local runs: 14 vertices in G and 16 in H.
    pub fn desk(kind: ScenarioKind, mode: Mode) -> Self {
        let (base, sizes, outlier_ls) = match mode {
            Mode::Wcs => (
                Base {
                    m: 14,
                    n: 16,
                    l: 12,
                    sigma: 0.05,
                    density: 0.5,
                },
                vec![10, 14, 18, 22, 26],
                (10..=14).rev().collect::<Vec<usize>>(),
            ),
            Mode::Piw => (
                Base {
                    m: 14,
                    n: 16,
                    l: 14,
                    sigma: 0.05,
                    density: 0.5,
                },
                vec![12, 16, 20, 24, 28],
                (12..=16).rev().collect(),
            ),
        };
        Self::build(kind, mode, base, &sizes, &outlier_ls, 2, 10)
    }

    fn build(
        kind: ScenarioKind,
        mode: Mode,
        base: Base,
        sizes: &[usize],
        outlier_ls: &[usize],
        margin: usize,
        trials: usize,
    ) -> Self {
        let points = match kind {
            ScenarioKind::Noise => steps(0.0, 0.01, 11)
                .into_iter()
                .map(|sigma| SweepPoint {
                    value: sigma,
                    params: GeneratorParams {
                        sigma,
                        ..base.params()
                    },
                })
                .collect(),
            ScenarioKind::Density => steps(0.1, 0.1, 10)
                .into_iter()
                .map(|density| SweepPoint {
                    value: density,
                    params: GeneratorParams {
                        density,
                        ..base.params()
                    },
                })
                .collect(),
            ScenarioKind::Size => sizes
                .iter()
                .map(|&s| {
                    // WCS sweeps M with N = M + margin and L = M − margin;
                    // part-in-whole sweeps N with L = M = N − margin.
                    let (m, n, l) = match mode {
                        Mode::Wcs => (s, s + margin, s - margin),
                        Mode::Piw => (s - margin, s, s - margin),
                    };
                    SweepPoint {
                        value: s as f64,
                        params: GeneratorParams {
                            m,
                            n,
                            l,
                            ..base.params()
                        },
                    }
                })
                .collect(),
            ScenarioKind::Outlier => outlier_ls
                .iter()
                .map(|&l| {
                    let m = match mode {
                        Mode::Wcs => base.m,
                        Mode::Piw => l,
                    };
                    SweepPoint {
                        value: l as f64,
                        params: GeneratorParams {
                            m,
                            l,
                            ..base.params()
                        },
                    }
                })
                .collect(),
        };
        let methods = match mode {
            Mode::Wcs => vec![
                Method::H1_EXACT,
                Method::H2_EXACT,
                Method::H1_FAST,
                Method::H2_FAST,
            ],
            Mode::Piw => vec![Method::PIW, Method::H1_EXACT, Method::H2_EXACT],
        };
        Self {
            kind,
            mode,
            points,
            trials,
            methods,
            seed: 0,
            perturbation: PerturbationCount::Each,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() || self.trials == 0 || self.methods.is_empty() {
            return Err(WcsError::InvalidConfig(
                "scenario needs sweep points, trials and methods".into(),
            ));
        }
        for p in &self.points {
            p.params.validate()?;
            for method in &self.methods {
                if method.relaxation == RelaxationKind::Piw && p.params.l != p.params.m {
                    return Err(WcsError::InvalidConfig("piw requires L = M".into()));
                }
            }
        }
        Ok(())
    }

    /// Seed for a trial; shared by every sweep point so a sweep varies only
    /// its own parameter.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        let mode_tag = match self.mode {
            Mode::Wcs => 0x5743_5300u64,
            Mode::Piw => 0x5049_5700u64,
        };
        splitmix64(self.seed ^ splitmix64(mode_tag ^ trial as u64))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: ScenarioKind,
    pub mode: Mode,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub method: String,
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub sigma: f64,
    pub density: f64,
    pub accuracy: f64,
    pub objective: f64,
    pub wall_time_secs: f64,
    pub fallback: bool,
    pub error: Option<String>,
}

pub fn run_scenario(
    spec: &ScenarioSpec,
    config: &SolverConfig,
    threads: usize,
) -> Result<Vec<TrialRecord>> {
    run_scenario_with_progress(spec, config, threads, &|_, _| {})
}

/// Runs every (sweep point, trial) pair, all methods on the same instance.
/// `threads == 0` uses rayon's default pool size. Records come back in
/// (point, trial, method) order regardless of scheduling.
pub fn run_scenario_with_progress(
    spec: &ScenarioSpec,
    config: &SolverConfig,
    threads: usize,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.points.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let total = jobs.len();
    let done = AtomicUsize::new(0);

    let run_job = |&(p, t): &(usize, usize)| -> Vec<TrialRecord> {
        let point = &spec.points[p];
        let params = GeneratorParams {
            seed: spec.trial_seed(t),
            perturbation: spec.perturbation,
            ..point.params.clone()
        };
        let instance = generate_instance(&params);
        let records = spec
            .methods
            .iter()
            .map(|method| {
                let mut rec = TrialRecord {
                    scenario: spec.kind,
                    mode: spec.mode,
                    sweep_value: point.value,
                    trial: t,
                    seed: params.seed,
                    method: method.name(),
                    m: params.m,
                    n: params.n,
                    l: params.l,
                    sigma: params.sigma,
                    density: params.density,
                    accuracy: 0.0,
                    objective: f64::NAN,
                    wall_time_secs: 0.0,
                    fallback: false,
                    error: None,
                };
                let outcome = instance
                    .as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|inst| {
                        let cfg = SolverConfig {
                            relaxation: method.relaxation,
                            direction: method.direction,
                            ..config.clone()
                        };
                        let result = match_graphs(inst, &cfg).map_err(|e| e.to_string())?;
                        let gt = inst
                            .ground_truth
                            .as_ref()
                            .expect("generated instances carry ground truth");
                        let acc = accuracy(&result.assignment, gt).map_err(|e| e.to_string())?;
                        Ok((result, acc))
                    });
                match outcome {
                    Ok((result, acc)) => {
                        rec.accuracy = acc;
                        rec.objective = result.objective_h0;
                        rec.wall_time_secs = result.wall_time.as_secs_f64();
                        rec.fallback = result.discretized_by_fallback;
                    }
                    Err(e) => rec.error = Some(e),
                }
                rec
            })
            .collect();
        progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
        records
    };

    let nested: Vec<Vec<TrialRecord>> = if threads == 1 {
        jobs.iter().map(run_job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| WcsError::InvalidConfig(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_job).collect())
    };
    Ok(nested.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: ScenarioKind,
    pub mode: Mode,
    pub sweep_value: f64,
    pub method: String,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub mean_time: f64,
    pub trials: usize,
    pub failures: usize,
}

/// Mean and sample standard deviation of accuracy per (sweep value, method),
/// in first-appearance order. Failed trials count as accuracy 0.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(ScenarioKind, Mode, f64, String)> = Vec::new();
    for r in records {
        let key = (r.scenario, r.mode, r.sweep_value, r.method.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scenario, mode, value, method)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| {
                    r.scenario == scenario
                        && r.mode == mode
                        && r.sweep_value == value
                        && r.method == method
                })
                .collect();
            let n = group.len() as f64;
            let mean_acc = group.iter().map(|r| r.accuracy).sum::<f64>() / n;
            let var = if group.len() > 1 {
                group
                    .iter()
                    .map(|r| (r.accuracy - mean_acc).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            SummaryRow {
                scenario,
                mode,
                sweep_value: value,
                method,
                mean_acc,
                std_acc: var.sqrt(),
                mean_time: group.iter().map(|r| r.wall_time_secs).sum::<f64>() / n,
                trials: group.len(),
                failures: group.iter().filter(|r| r.error.is_some()).count(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grids() {
        let s = ScenarioSpec::full(ScenarioKind::Noise, Mode::Wcs);
        let sig: Vec<f64> = s.points.iter().map(|p| p.value).collect();
        assert_eq!(
            sig,
            vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1]
        );
        assert!(s
            .points
            .iter()
            .all(|p| (p.params.m, p.params.n, p.params.l) == (30, 35, 25)));
        assert!(s.points.iter().all(|p| p.params.density == 0.5));
        assert_eq!(s.trials, 30);

        let s = ScenarioSpec::full(ScenarioKind::Outlier, Mode::Wcs);
        let ls: Vec<usize> = s.points.iter().map(|p| p.params.l).collect();
        assert_eq!(ls, (20..=30).rev().collect::<Vec<_>>());
        assert!(s
            .points
            .iter()
            .all(|p| (p.params.m, p.params.n) == (30, 35)));

        let s = ScenarioSpec::full(ScenarioKind::Size, Mode::Wcs);
        let ms: Vec<(usize, usize, usize)> = s
            .points
            .iter()
            .map(|p| (p.params.m, p.params.n, p.params.l))
            .collect();
        assert_eq!(ms.first(), Some(&(20, 25, 15)));
        assert_eq!(ms.last(), Some(&(40, 45, 35)));
        assert_eq!(ms.len(), 11);

        let s = ScenarioSpec::full(ScenarioKind::Density, Mode::Piw);
        let ds: Vec<f64> = s.points.iter().map(|p| p.value).collect();
        assert_eq!(ds, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        assert!(s
            .points
            .iter()
            .all(|p| (p.params.m, p.params.n, p.params.l) == (45, 50, 45)));
        assert!(s.points.iter().all(|p| p.params.sigma == 0.05));

        let s = ScenarioSpec::full(ScenarioKind::Size, Mode::Piw);
        let first = &s.points[0].params;
        assert_eq!((first.m, first.n, first.l), (35, 40, 35));

        let s = ScenarioSpec::full(ScenarioKind::Outlier, Mode::Piw);
        assert!(s
            .points
            .iter()
            .all(|p| p.params.l == p.params.m && p.params.n == 50));
        assert_eq!(s.points[0].params.l, 50);
    }

    #[test]
    fn method_names() {
        assert_eq!(Method::H1_FAST.name(), "h1-fast");
        assert_eq!("h2-exact".parse::<Method>().unwrap(), Method::H2_EXACT);
        assert_eq!("piw".parse::<Method>().unwrap(), Method::PIW);
        assert!("h9".parse::<Method>().is_err());
    }

    #[test]
    fn tiny_run_is_ordered_and_complete() {
        let mut spec = ScenarioSpec::desk(ScenarioKind::Noise, Mode::Wcs);
        spec.points.truncate(2);
        for p in &mut spec.points {
            p.params.m = 5;
            p.params.n = 6;
            p.params.l = 4;
        }
        spec.trials = 2;
        let cfg = SolverConfig {
            zeta_step: 0.1,
            ..SolverConfig::default()
        };
        let recs = run_scenario(&spec, &cfg, 2).unwrap();
        assert_eq!(recs.len(), 2 * 2 * 4);
        assert!(recs
            .iter()
            .all(|r| r.error.is_none() && (0.0..=1.0).contains(&r.accuracy)));
        let again = run_scenario(&spec, &cfg, 1).unwrap();
        let strip = |v: &[TrialRecord]| -> Vec<(String, f64, f64)> {
            v.iter()
                .map(|r| (r.method.clone(), r.accuracy, r.objective))
                .collect()
        };
        assert_eq!(strip(&recs), strip(&again));
        let summary = summarize(&recs);
        assert_eq!(summary.len(), 2 * 4);
        assert!(summary.iter().all(|s| s.trials == 2));
    }
}
