use std::time::Instant;

use super::kernels::{step_myula, step_psgla, step_spla, step_ula, ProximalStep, StepOptions};
use super::{Problem, SamplerConfig, SamplerKind};
use crate::error::{invalid, Error, Result};
use crate::par::{map_indexed, Execution};
use crate::space::{RngStream, SpacePoint};

/// Recorded iterates of one chain. `half_steps` and `duals` are filled only
/// when `record_duals` is set; entry `i` of every list belongs to
/// `steps[i]`.
#[derive(Debug, Clone, Default)]
pub struct ChainTrace {
    pub steps: Vec<usize>,
    pub primal: Vec<SpacePoint>,
    pub half_steps: Vec<SpacePoint>,
    pub duals: Vec<SpacePoint>,
    pub feasible_flags: Vec<bool>,
    /// Seconds spent stepping; not part of any digest.
    pub wall_time: f64,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.primal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty()
    }
}

struct Stepper<'a> {
    kind: SamplerKind,
    problem: &'a Problem,
    opts: StepOptions,
    lambda: f64,
    rng: RngStream,
}

impl Stepper<'_> {
    fn step(&mut self, x: &SpacePoint) -> Result<(SpacePoint, Option<ProximalStep>)> {
        let p = self.problem;
        match self.kind {
            SamplerKind::Ula => Ok((
                step_ula(x, p.smooth.as_ref(), &self.opts, &mut self.rng)?,
                None,
            )),
            SamplerKind::Myula => Ok((
                step_myula(
                    x,
                    p.smooth.as_ref(),
                    p.nonsmooth.as_ref(),
                    self.lambda,
                    &self.opts,
                    &mut self.rng,
                )?,
                None,
            )),
            // Projected Langevin is PSGLA with an indicator; the config check
            // already enforced that.
            SamplerKind::Psgla | SamplerKind::Projected => {
                let s = step_psgla(
                    x,
                    p.smooth.as_ref(),
                    p.nonsmooth.as_ref(),
                    &self.opts,
                    &mut self.rng,
                )?;
                Ok((s.next.clone(), Some(s)))
            }
            SamplerKind::Spla => {
                let s = step_spla(
                    x,
                    p.smooth.as_ref(),
                    &p.lipschitz,
                    p.nonsmooth.as_ref(),
                    &self.opts,
                    &mut self.rng,
                )?;
                Ok((s.next.clone(), Some(s)))
            }
        }
    }
}

fn stepper<'a>(
    kind: SamplerKind,
    problem: &'a Problem,
    cfg: &SamplerConfig,
    stream: u64,
) -> Stepper<'a> {
    Stepper {
        kind,
        problem,
        opts: cfg.step_options(),
        lambda: cfg.myula_lambda.unwrap_or(0.0),
        rng: RngStream::new(cfg.seed, stream),
    }
}

/// Runs one chain on random stream 0.
pub fn run_chain(kind: SamplerKind, problem: &Problem, cfg: &SamplerConfig) -> Result<ChainTrace> {
    run_chain_on_stream(kind, problem, cfg, 0)
}

/// Runs `cfg.num_steps` steps and records `x^k` for every `k > burn_in`
/// with `(k - burn_in) % record_every == 0`.
pub fn run_chain_on_stream(
    kind: SamplerKind,
    problem: &Problem,
    cfg: &SamplerConfig,
    stream: u64,
) -> Result<ChainTrace> {
    cfg.validate(kind, problem)?;
    let start = Instant::now();
    let mut st = stepper(kind, problem, cfg, stream);
    let mut x = cfg.initial_point(problem)?;
    let mut trace = ChainTrace::default();
    for k in 1..=cfg.num_steps {
        let (next, prox) = st.step(&x)?;
        if !next.is_finite() {
            return Err(Error::NonFinite { step: k });
        }
        x = next;
        if cfg.is_recorded(k) {
            trace.steps.push(k);
            trace.feasible_flags.push(problem.nonsmooth.in_domain(&x));
            if cfg.record_duals {
                if let Some(s) = prox {
                    trace.half_steps.push(s.half);
                    trace.duals.push(s.dual);
                }
            }
            trace.primal.push(x.clone());
        }
    }
    trace.wall_time = start.elapsed().as_secs_f64();
    Ok(trace)
}

/// Cross-sections of an ensemble of independent chains.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    /// Sorted, distinct snapshot steps.
    pub steps: Vec<usize>,
    /// `snapshots[s][c]` is chain `c` at `steps[s]`.
    pub snapshots: Vec<Vec<SpacePoint>>,
    /// Number of chains inside the domain of `G` at each snapshot.
    pub feasible_counts: Vec<usize>,
    pub wall_time: f64,
}

impl EnsembleResult {
    pub fn num_chains(&self) -> usize {
        self.snapshots.first().map_or(0, Vec::len)
    }

    pub fn marginal_at(&self, step: usize) -> Option<&[SpacePoint]> {
        self.steps
            .iter()
            .position(|&s| s == step)
            .map(|i| self.snapshots[i].as_slice())
    }
}

/// [`run_ensemble_with`] using the default execution mode.
pub fn run_ensemble(
    kind: SamplerKind,
    problem: &Problem,
    cfg: &SamplerConfig,
    num_chains: usize,
    snapshot_steps: &[usize],
) -> Result<EnsembleResult> {
    run_ensemble_with(
        kind,
        problem,
        cfg,
        num_chains,
        snapshot_steps,
        Execution::default(),
    )
}

/// Runs `num_chains` chains, chain `c` on stream `c`, storing only the
/// states at `snapshot_steps` (step 0 is the initial point). Runs up to the
/// largest snapshot step; `burn_in` and `record_every` are not used.
pub fn run_ensemble_with(
    kind: SamplerKind,
    problem: &Problem,
    cfg: &SamplerConfig,
    num_chains: usize,
    snapshot_steps: &[usize],
    exec: Execution,
) -> Result<EnsembleResult> {
    if num_chains < 2 {
        return invalid(format!(
            "an ensemble needs at least 2 chains, got {num_chains}"
        ));
    }
    let mut steps = snapshot_steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    let Some(&last) = steps.last() else {
        return invalid("no snapshot steps requested");
    };
    if last > cfg.num_steps {
        return invalid(format!(
            "snapshot step {last} exceeds num_steps {}",
            cfg.num_steps
        ));
    }
    cfg.validate(kind, problem)?;
    let x0 = cfg.initial_point(problem)?;
    let start = Instant::now();

    let per_chain = map_indexed(num_chains, exec, |c| -> Result<Vec<SpacePoint>> {
        let mut st = stepper(kind, problem, cfg, c as u64);
        let mut x = x0.clone();
        let mut out = Vec::with_capacity(steps.len());
        let mut next_snap = 0;
        for k in 0..=last {
            if k > 0 {
                x = st.step(&x)?.0;
                if !x.is_finite() {
                    return Err(Error::NonFinite { step: k });
                }
            }
            if steps[next_snap] == k {
                out.push(x.clone());
                next_snap += 1;
            }
        }
        Ok(out)
    });

    let mut snapshots: Vec<Vec<SpacePoint>> = (0..steps.len())
        .map(|_| Vec::with_capacity(num_chains))
        .collect();
    for (c, chain) in per_chain.into_iter().enumerate() {
        let chain = chain.map_err(|e| Error::Chain {
            chain: c,
            source: Box::new(e),
        })?;
        for (s, x) in chain.into_iter().enumerate() {
            snapshots[s].push(x);
        }
    }
    let feasible_counts = snapshots
        .iter()
        .map(|snap| {
            snap.iter()
                .filter(|x| problem.nonsmooth.in_domain(x))
                .count()
        })
        .collect();
    Ok(EnsembleResult {
        steps,
        snapshots,
        feasible_counts,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
