//! Randomized property suites run by the `verify` command. Trial `i` of a
//! suite draws from stream `i` of the suite seed, so any failure replays
//! from the printed seed and trial index alone.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use super::conjugate::CatalogEntry;
use super::{HarnessError, HarnessResult};
use crate::diagnostics::{lemma2_residual, pdpg_gap_check};
use crate::error::Result;
use crate::experiments::{
    assemble_experiment, ExperimentSpec, TruncGaussSpec, WishartExperimentSpec,
};
use crate::oracles::logbarrier_prox_by_search;
use crate::potentials::{
    build_quadratic_sum, dual_from_primal, BoxIndicator, LipschitzProxTerm, LogBarrier, Minibatch,
    NonsmoothPotential, Quadratic, SmoothPotential, ZeroPotential,
};
use crate::samplers::{run_chain, Problem, SamplerConfig, SamplerKind};
use crate::space::{
    conjugate_by, gaussian_standard, random_orthogonal, DenseSymmetric, RngStream, SpaceDescriptor,
    SpacePoint,
};

pub const DEFAULT_VERIFY_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Moreau,
    Spectral,
    Lemma2,
    Pdpg,
    Reductions,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Moreau,
        Suite::Spectral,
        Suite::Lemma2,
        Suite::Pdpg,
        Suite::Reductions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moreau => "moreau",
            Suite::Spectral => "spectral",
            Suite::Lemma2 => "lemma2",
            Suite::Pdpg => "pdpg",
            Suite::Reductions => "reductions",
        }
    }

    /// The property the suite checks.
    pub fn invariant(self) -> &'static str {
        match self {
            Suite::Moreau => "x = prox_γG(x) + γ prox_{G*/γ}(x/γ)",
            Suite::Spectral => "spectral prox = per-eigenvalue scalar search",
            Suite::Lemma2 => "one-step backward inequality slack >= 0",
            Suite::Pdpg => "primal-dual gap inequality and Lagrangian gap >= 0",
            Suite::Reductions => "PSGLA(G=0) = ULA, SPLA(R=0) = PSGLA = projected",
        }
    }

    /// Trials per run: points per (potential, γ) pair, matrices, instances,
    /// problems, and chain steps respectively.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Moreau => 1000,
            Suite::Spectral => 200,
            Suite::Lemma2 => 10_000,
            Suite::Pdpg => 100,
            Suite::Reductions => 1000,
        }
    }

    fn bound(self) -> Bound {
        match self {
            Suite::Moreau => Bound::AtMost(1e-10),
            Suite::Spectral => Bound::AtMost(1e-8),
            Suite::Lemma2 => Bound::AtLeast(-1e-10),
            Suite::Pdpg => Bound::AtLeast(-1e-8),
            Suite::Reductions => Bound::AtMost(0.0),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown suite {s:?}, expected one of: all, {}",
                    names.join(", ")
                )
            })
    }
}

/// Deliberate defects for checking that the suites catch them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Every prox output is shifted by `1e-6` in each coordinate.
    Prox,
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "prox" => Ok(Mutation::Prox),
            _ => Err(format!("unknown mutation {s:?}, expected: prox")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

impl Bound {
    fn holds(self, v: f64) -> bool {
        match self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
        }
    }

    /// Worse of two observations.
    fn worse(self, a: f64, b: f64) -> f64 {
        if a.is_nan() || b.is_nan() {
            return f64::NAN;
        }
        match self {
            Bound::AtMost(_) => a.max(b),
            Bound::AtLeast(_) => a.min(b),
        }
    }

    fn identity(self) -> f64 {
        match self {
            Bound::AtMost(_) => f64::NEG_INFINITY,
            Bound::AtLeast(_) => f64::INFINITY,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::AtLeast(t) => write!(f, ">= {t:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub bound: Bound,
    pub passed: bool,
    pub elapsed_seconds: f64,
    /// First violation, with what is needed to replay it.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    trials: usize,
    seed: u64,
    mutation: Option<Mutation>,
}

impl Probe {
    fn rng(&self, trial: usize) -> RngStream {
        RngStream::new(self.seed, trial as u64)
    }

    fn wrap(&self, g: Arc<dyn NonsmoothPotential>) -> Arc<dyn NonsmoothPotential> {
        match self.mutation {
            Some(Mutation::Prox) => Arc::new(ShiftedProx(g)),
            None => g,
        }
    }
}

/// Accumulates the worst value and the first violation.
struct Tally {
    bound: Bound,
    worst: f64,
    failure: Option<String>,
}

impl Tally {
    fn new(bound: Bound) -> Self {
        Self {
            bound,
            worst: bound.identity(),
            failure: None,
        }
    }

    fn observe(&mut self, v: f64, context: impl FnOnce() -> String) {
        self.worst = self.bound.worse(self.worst, v);
        if self.failure.is_none() && !self.bound.holds(v) {
            self.failure = Some(format!("{} (value {v:e})", context()));
        }
    }
}

#[derive(Debug)]
struct ShiftedProx(Arc<dyn NonsmoothPotential>);

impl NonsmoothPotential for ShiftedProx {
    fn descriptor(&self) -> SpaceDescriptor {
        self.0.descriptor()
    }

    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn evaluate(&self, x: &SpacePoint) -> f64 {
        self.0.evaluate(x)
    }

    fn prox(&self, gamma: f64, x: &SpacePoint) -> Result<SpacePoint> {
        Ok(self.0.prox(gamma, x)?.map(|v| v + 1e-6))
    }

    fn in_domain(&self, x: &SpacePoint) -> bool {
        self.0.in_domain(x)
    }

    fn subgradient_min(&self, x: &SpacePoint) -> Result<SpacePoint> {
        self.0.subgradient_min(x)
    }

    fn has_conjugate(&self) -> bool {
        self.0.has_conjugate()
    }

    fn conjugate_evaluate(&self, y: &SpacePoint) -> Result<f64> {
        self.0.conjugate_evaluate(y)
    }

    fn lambda_gstar(&self) -> f64 {
        self.0.lambda_gstar()
    }

    fn is_indicator(&self) -> bool {
        self.0.is_indicator()
    }
}

const MOREAU_GAMMAS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

fn moreau(p: Probe, tally: &mut Tally) -> Result<()> {
    for (e_idx, entry) in CatalogEntry::standard().iter().enumerate() {
        let g = p.wrap(entry.potential()?);
        for (g_idx, &gamma) in MOREAU_GAMMAS.iter().enumerate() {
            for t in 0..p.trials {
                let trial = (e_idx * MOREAU_GAMMAS.len() + g_idx) * p.trials + t;
                let mut rng = p.rng(trial);
                let scale = 10f64.powf(3.0 * rng.uniform() - 1.0);
                let x = gaussian_standard(entry.descriptor(), &mut rng).scaled(scale);
                let prox = g.prox(gamma, &x)?;
                let scale = x.norm().max(1.0);
                // The literal identity with the primal-route dual, and the
                // same identity with the dual from the conjugate alone.
                let primal_route = dual_from_primal(gamma, &x, g.as_ref())?;
                let conj_route = entry.conjugate_dual(gamma, &x)?;
                for y in [&primal_route, &conj_route] {
                    let mut r = x.sub(&prox);
                    r.axpy(-gamma, y);
                    tally.observe(r.norm() / scale, || {
                        format!("{} at γ = {gamma}, trial {trial}", entry.label())
                    });
                }
            }
        }
    }
    Ok(())
}

const SPECTRAL_DIMS: [usize; 3] = [2, 5, 10];

fn spectral(p: Probe, tally: &mut Tally) -> Result<()> {
    for trial in 0..p.trials {
        let mut rng = p.rng(trial);
        let d = SPECTRAL_DIMS[trial % SPECTRAL_DIMS.len()];
        let alpha = 0.1 + 4.9 * rng.uniform();
        let beta = 2.0 * rng.uniform();
        let gamma = 10f64.powf(3.0 * rng.uniform() - 2.0);
        let eigenvalues: Vec<f64> = (0..d).map(|_| 3.0 * rng.standard_normal()).collect();
        let q = random_orthogonal(d, &mut rng);
        let s = conjugate_by(&q, &SpacePoint::from_diagonal(&eigenvalues));
        let g = p.wrap(Arc::new(LogBarrier::new(
            SpaceDescriptor::symmetric(d),
            alpha,
            beta,
        )?));
        let fast = g.prox(gamma, &s)?;
        // The oracle rotates the searched eigenvalues with the known basis
        // instead of decomposing `s`.
        let searched: Vec<f64> = eigenvalues
            .iter()
            .map(|&l| logbarrier_prox_by_search(gamma, l, alpha, beta))
            .collect();
        let oracle = conjugate_by(&q, &SpacePoint::from_diagonal(&searched));
        let err = fast.dist_sq(&oracle).sqrt() / oracle.norm().max(1.0);
        tally.observe(err, || {
            format!("d = {d}, γ = {gamma}, α = {alpha}, β = {beta}, trial {trial}")
        });
    }
    Ok(())
}

fn lemma2(p: Probe, tally: &mut Tally) -> Result<()> {
    for trial in 0..p.trials {
        let mut rng = p.rng(trial);
        let dim = 1 + rng.index(4);
        let lo: Vec<f64> = (0..dim).map(|_| -2.0 * rng.uniform()).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + 0.1 + 2.9 * rng.uniform()).collect();
        let mut x_star = vec![0.0; dim];
        let mut y_star = vec![0.0; dim];
        for i in 0..dim {
            // Interior, lower face, or upper face; the normal cone fixes the
            // sign of y*.
            match rng.index(3) {
                0 => x_star[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform(),
                1 => {
                    x_star[i] = lo[i];
                    y_star[i] = -2.0 * rng.uniform();
                }
                _ => {
                    x_star[i] = hi[i];
                    y_star[i] = 2.0 * rng.uniform();
                }
            }
        }
        let x = SpacePoint::from_vec((0..dim).map(|_| 3.0 * rng.standard_normal()).collect());
        let gamma = 10f64.powf(4.0 * rng.uniform() - 3.0);
        let g = p.wrap(Arc::new(BoxIndicator::new(lo, hi)?));
        let r = lemma2_residual(
            gamma,
            &x,
            &SpacePoint::from_vec(x_star),
            &SpacePoint::from_vec(y_star),
            g.as_ref(),
        )?;
        tally.observe(r, || format!("dim = {dim}, γ = {gamma}, trial {trial}"));
    }
    Ok(())
}

fn pdpg(p: Probe, tally: &mut Tally) -> Result<()> {
    for trial in 0..p.trials {
        let mut rng = p.rng(trial);
        let d = 1 + rng.index(5);
        let b: Vec<f64> = (0..d * d).map(|_| rng.standard_normal()).collect();
        let mu = 0.1 + rng.uniform();
        let mut a = DenseSymmetric::new(d, vec![0.0; d * d]);
        for i in 0..d {
            for j in 0..d {
                let v: f64 = (0..d).map(|k| b[i * d + k] * b[j * d + k]).sum::<f64>();
                a.set(i, j, v + if i == j { mu } else { 0.0 });
            }
        }
        let center: Vec<f64> = (0..d).map(|_| 2.0 * rng.standard_normal()).collect();
        let f = Quadratic::new(a, center)?;
        let lo: Vec<f64> = (0..d).map(|_| -0.5 - rng.uniform()).collect();
        let hi: Vec<f64> = (0..d).map(|_| 0.5 + rng.uniform()).collect();
        let g = p.wrap(Arc::new(BoxIndicator::new(lo, hi)?));
        let gamma = (0.1 + 0.9 * rng.uniform()) / f.smoothness();
        let x0 = SpacePoint::from_vec((0..d).map(|_| 3.0 * rng.standard_normal()).collect());
        let rep = pdpg_gap_check(&f, g.as_ref(), gamma, &x0, 100, None)?;
        let worst = rep.min_residual().min(rep.min_gap());
        tally.observe(worst, || format!("d = {d}, γ = {gamma}, trial {trial}"));
    }
    Ok(())
}

fn trajectory(kind: SamplerKind, problem: &Problem, cfg: &SamplerConfig) -> Result<Vec<Vec<u64>>> {
    Ok(run_chain(kind, problem, cfg)?
        .primal
        .iter()
        .map(|x| x.coords().iter().map(|v| v.to_bits()).collect())
        .collect())
}

fn mismatches(a: &[Vec<u64>], b: &[Vec<u64>]) -> f64 {
    if a.len() != b.len() {
        return a.len().max(b.len()) as f64;
    }
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64
}

fn reductions(p: Probe, tally: &mut Tally) -> Result<()> {
    let cfg = SamplerConfig {
        gamma: 0.05,
        num_steps: p.trials,
        minibatch: Minibatch::Size(2),
        seed: p.seed,
        ..SamplerConfig::default()
    };
    let data: Vec<SpacePoint> = (0..4)
        .map(|i| SpacePoint::from_vec(vec![i as f64 * 0.3, -0.2, 1.0]))
        .collect();
    let f: Arc<dyn SmoothPotential> = Arc::new(build_quadratic_sum(data)?);
    let free = Problem::new(
        f.clone(),
        p.wrap(Arc::new(ZeroPotential::new(SpaceDescriptor::flat(3)))),
    )?;
    tally.observe(
        mismatches(
            &trajectory(SamplerKind::Psgla, &free, &cfg)?,
            &trajectory(SamplerKind::Ula, &free, &cfg)?,
        ),
        || "psgla(G=0) vs ula: mismatched steps".to_string(),
    );

    let boxed = Problem::new(
        f,
        p.wrap(Arc::new(BoxIndicator::new(vec![-0.5; 3], vec![0.5; 3])?)),
    )?;
    let psgla = trajectory(SamplerKind::Psgla, &boxed, &cfg)?;
    tally.observe(
        mismatches(&trajectory(SamplerKind::Spla, &boxed, &cfg)?, &psgla),
        || "spla(R=0) vs psgla on a box: mismatched steps".to_string(),
    );
    tally.observe(
        mismatches(&trajectory(SamplerKind::Projected, &boxed, &cfg)?, &psgla),
        || "projected vs psgla on a box: mismatched steps".to_string(),
    );

    let trunc = assemble_experiment(&ExperimentSpec::TruncGauss(TruncGaussSpec::default()))?;
    let explicit_zero = trunc
        .problem
        .clone()
        .with_lipschitz(LipschitzProxTerm::zero())?;
    tally.observe(
        mismatches(
            &trajectory(SamplerKind::Spla, &explicit_zero, &cfg)?,
            &trajectory(SamplerKind::Psgla, &trunc.problem, &cfg)?,
        ),
        || "spla(R=0) vs psgla on trunc-gauss: mismatched steps".to_string(),
    );

    let wishart = assemble_experiment(&ExperimentSpec::WishartPrecision(
        WishartExperimentSpec::generate(3, 7.0, 20, p.seed)?,
    ))?;
    let cfg = SamplerConfig { gamma: 0.1, ..cfg };
    tally.observe(
        mismatches(
            &trajectory(SamplerKind::Spla, &wishart.problem, &cfg)?,
            &trajectory(SamplerKind::Psgla, &wishart.problem, &cfg)?,
        ),
        || "spla(R=0) vs psgla on wishart-precision: mismatched steps".to_string(),
    );
    Ok(())
}

/// Runs one suite. `trials` defaults to [`Suite::default_trials`].
pub fn run_suite(
    suite: Suite,
    trials: Option<usize>,
    seed: u64,
    mutation: Option<Mutation>,
) -> SuiteOutcome {
    let probe = Probe {
        trials: trials.unwrap_or(suite.default_trials()),
        seed,
        mutation,
    };
    let started = Instant::now();
    let mut tally = Tally::new(suite.bound());
    let result = match suite {
        Suite::Moreau => moreau(probe, &mut tally),
        Suite::Spectral => spectral(probe, &mut tally),
        Suite::Lemma2 => lemma2(probe, &mut tally),
        Suite::Pdpg => pdpg(probe, &mut tally),
        Suite::Reductions => reductions(probe, &mut tally),
    };
    if let Err(e) = result {
        tally.failure.get_or_insert_with(|| format!("error: {e}"));
        tally.worst = f64::NAN;
    }
    SuiteOutcome {
        suite,
        trials: probe.trials,
        seed,
        worst: tally.worst,
        bound: tally.bound,
        passed: tally.failure.is_none(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        failure: tally.failure,
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub suites: Vec<Suite>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub mutation: Option<Mutation>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            trials: None,
            seed: DEFAULT_VERIFY_SEED,
            mutation: None,
        }
    }
}

/// Runs the selected suites in order.
pub fn cmd_verify(opts: &VerifyOptions) -> Vec<SuiteOutcome> {
    opts.suites
        .iter()
        .map(|&s| {
            log::info!("verify: running {s}");
            run_suite(s, opts.trials, opts.seed, opts.mutation)
        })
        .collect()
}

pub fn render_table(outcomes: &[SuiteOutcome]) -> String {
    let mut s = format!(
        "{:<11} {:<6} {:>8} {:>10} {:>13} {:>11} {:>9}  {}\n",
        "suite", "status", "trials", "seed", "worst", "bound", "seconds", "invariant"
    );
    for o in outcomes {
        writeln!(
            s,
            "{:<11} {:<6} {:>8} {:>10} {:>13.3e} {:>11} {:>9.3}  {}",
            o.suite.name(),
            if o.passed { "PASS" } else { "FAIL" },
            o.trials,
            o.seed,
            o.worst,
            o.bound.to_string(),
            o.elapsed_seconds,
            o.suite.invariant()
        )
        .unwrap();
    }
    for o in outcomes.iter().filter(|o| !o.passed) {
        writeln!(
            s,
            "FAILED {} [{}]: {}; replay with --suite {} --seed {}",
            o.suite.name(),
            o.suite.invariant(),
            o.failure.as_deref().unwrap_or("unknown"),
            o.suite.name(),
            o.seed
        )
        .unwrap();
    }
    s
}

/// `Err` naming every failed suite.
pub fn check_outcomes(outcomes: &[SuiteOutcome]) -> HarnessResult<()> {
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{} ({})", o.suite.name(), o.suite.invariant()))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Verify(failed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().unwrap_err().contains("lemma2"));
        assert_eq!("prox".parse::<Mutation>().unwrap(), Mutation::Prox);
    }

    #[test]
    fn small_runs_pass() {
        for s in Suite::ALL {
            let o = run_suite(s, Some(20), 1, None);
            assert!(o.passed, "{o:?}");
            assert!(o.worst.is_finite());
        }
    }

    #[test]
    fn mutation_is_caught() {
        let outcomes: Vec<SuiteOutcome> = [Suite::Moreau, Suite::Spectral]
            .iter()
            .map(|&s| run_suite(s, Some(5), 1, Some(Mutation::Prox)))
            .collect();
        assert!(outcomes.iter().all(|o| !o.passed));
        let err = check_outcomes(&outcomes).unwrap_err();
        assert!(err.to_string().contains("moreau"));
        assert_eq!(err.exit_code(), 1);
        let table = render_table(&outcomes);
        assert!(table.contains("FAILED moreau"), "{table}");
    }

    #[test]
    fn bound_semantics() {
        let b = Bound::AtLeast(-1.0);
        assert!(b.holds(-1.0) && !b.holds(-1.5));
        assert_eq!(b.worse(0.0, -0.5), -0.5);
        assert!(b.worse(f64::NAN, 0.0).is_nan());
        assert!(!Bound::AtMost(0.0).holds(f64::NAN));
    }
}
