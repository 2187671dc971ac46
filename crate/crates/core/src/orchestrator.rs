//! The multi-geometry optimisation loop with information sharing.
//!
//! Each geometry runs its own surrogate-driven search. After a geometry
//! evaluates a point, its sharing partners receive their own energies at the
//! same point, assembled from cached Pauli expectation values. Sharing either
//! happens after every geometry has picked its point (deferred) or right after
//! each evaluation (immediate). Every Pauli expectation actually computed is
//! charged to a ledger; cache hits are free.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{self, AcqConfig};
use crate::error::{Error, Result};
use crate::family::{PartnerRule, ProblemFamily};
use crate::gp::{self, Dataset, GpConfig, KernelKind, NoiseMode};
use crate::pauli::PauliString;
use crate::rng::{self, Stream};
use crate::simulator::{ShotConfig, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Timing {
    Deferred,
    Immediate,
}

/// How the next point of a geometry is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Fit the surrogate and minimise the acquisition function.
    Bayesian,
    /// Uniform random point; skips all model work. Useful for demand counting.
    Random,
}

/// Shots used for initial points, ordinary iterations and the final stretch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotSchedule {
    pub initial: ShotConfig,
    pub iteration: ShotConfig,
    pub last: ShotConfig,
    /// Number of trailing iterations (counted back from the cap) that use `last`.
    pub last_iterations: u32,
}

impl ShotSchedule {
    pub const EXACT: ShotSchedule = ShotSchedule {
        initial: ShotConfig::EXACT,
        iteration: ShotConfig::EXACT,
        last: ShotConfig::EXACT,
        last_iterations: 5,
    };

    /// 8192 shots for initial points and the last five iterations, 1000 otherwise.
    pub fn standard() -> Self {
        ShotSchedule {
            initial: ShotConfig::shots(8192),
            iteration: ShotConfig::shots(1000),
            last: ShotConfig::shots(8192),
            last_iterations: 5,
        }
    }

    pub fn for_iteration(&self, n: u32, n_max: u32) -> ShotConfig {
        if n + self.last_iterations >= n_max {
            self.last
        } else {
            self.iteration
        }
    }

    pub fn is_exact(&self) -> bool {
        [self.initial, self.iteration, self.last]
            .iter()
            .all(|c| c.shot_count() == 0 && c.depolarizing_p == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub timing: Timing,
    pub partners: PartnerRule,
    /// Iteration cap.
    pub n_max: u32,
    pub shots: ShotSchedule,
    /// Relative deviation from the reference below which a geometry counts as converged.
    pub epsilon: f64,
    pub seed: u64,
    pub n_init: usize,
}

impl SchemeConfig {
    pub fn new(timing: Timing, partners: PartnerRule) -> Self {
        SchemeConfig {
            timing,
            partners,
            n_max: 100,
            shots: ShotSchedule::EXACT,
            epsilon: 1e-3,
            seed: 0,
            n_init: 30,
        }
    }

    /// Without partners the timing is meaningless; it is fixed to deferred.
    pub fn normalised(mut self) -> Self {
        if self.partners == PartnerRule::NoSharing {
            self.timing = Timing::Deferred;
        }
        self
    }

    pub fn sharing(&self) -> bool {
        self.partners != PartnerRule::NoSharing
    }
}

/// Everything that determines a run besides the problem family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub gp: GpConfig,
    pub acq: AcqConfig,
    pub strategy: Strategy,
}

impl RunConfig {
    pub fn new(scheme: SchemeConfig, kernel: KernelKind) -> Self {
        let noise = if scheme.shots.is_exact() {
            NoiseMode::Fixed
        } else {
            NoiseMode::Optimise
        };
        RunConfig {
            scheme: scheme.normalised(),
            gp: GpConfig::new(kernel, noise),
            acq: AcqConfig::default(),
            strategy: Strategy::Bayesian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.acq.validate()?;
        if self.scheme.n_init == 0 {
            return Err(Error::InvalidConfig("at least one initial point is required".into()));
        }
        if !(self.scheme.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be non-negative".into()));
        }
        if self.gp.restarts == 0 {
            return Err(Error::InvalidConfig("at least one hyperparameter restart".into()));
        }
        Ok(())
    }
}

/// Sequential identifier of one evaluated parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: PointId,
    /// Geometry that proposed the point; `None` for initial points.
    pub origin: Option<usize>,
    /// Iteration that proposed the point; `None` for initial points.
    pub iteration: Option<u32>,
    pub theta: Vec<f64>,
    pub shots: ShotConfig,
}

/// Pauli expectation values per evaluated point. Entries are write-once.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliCache {
    points: Vec<BTreeMap<PauliString, f64>>,
}

impl PauliCache {
    pub fn get(&self, point: PointId, word: &PauliString) -> Option<f64> {
        self.points.get(point.0 as usize)?.get(word).copied()
    }

    pub fn insert(&mut self, point: PointId, word: PauliString, value: f64) -> Result<()> {
        let i = point.0 as usize;
        if self.points.len() <= i {
            self.points.resize_with(i + 1, BTreeMap::new);
        }
        if self.points[i].contains_key(&word) {
            return Err(Error::CacheOverwrite {
                point: point.0,
                word: word.to_string(),
            });
        }
        self.points[i].insert(word, value);
        Ok(())
    }

    pub fn values(&self, point: PointId) -> Option<&BTreeMap<PauliString, f64>> {
        self.points.get(point.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.points.iter().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Quantum demand: Pauli expectation values computed, by phase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcLedger {
    pub init_pauli_evals: u64,
    pub per_iteration_pauli_evals: Vec<u64>,
    pub total_pauli_evals: u64,
    pub total_shots: u64,
}

impl QcLedger {
    fn charge(&mut self, phase: Phase, shots: u64) {
        match phase {
            Phase::Init => self.init_pauli_evals += 1,
            Phase::Iteration(n) => {
                let n = n as usize;
                if self.per_iteration_pauli_evals.len() <= n {
                    self.per_iteration_pauli_evals.resize(n + 1, 0);
                }
                self.per_iteration_pauli_evals[n] += 1;
            }
        }
        self.total_pauli_evals += 1;
        self.total_shots += shots;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Init,
    Iteration(u32),
}

/// What one geometry knows: evaluated points and energies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InfoSet {
    pub points: Vec<PointId>,
    pub energies: Vec<f64>,
    pub best: f64,
    pub best_point: Option<PointId>,
    /// Iteration at which the best-seen energy first met the threshold
    /// (0 = after initialisation, n + 1 = after iteration n).
    pub converged_at: Option<u32>,
}

impl InfoSet {
    fn new() -> Self {
        InfoSet {
            best: f64::INFINITY,
            ..Default::default()
        }
    }

    fn push(&mut self, id: PointId, energy: f64) {
        self.points.push(id);
        self.energies.push(energy);
        if energy < self.best {
            self.best = energy;
            self.best_point = Some(id);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Complete mutable state of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub config: RunConfig,
    pub references: Vec<f64>,
    pub points: Vec<PointRecord>,
    pub cache: PauliCache,
    pub info: Vec<InfoSet>,
    pub ledger: QcLedger,
    /// Iterations completed so far.
    pub iterations: u32,
    pub iteration_of_convergence: Option<u32>,
    partners: Vec<Vec<usize>>,
    eval_sets: Vec<BTreeSet<PauliString>>,
    own_sets: Vec<BTreeSet<PauliString>>,
    phase: Phase,
}

/// `k` points uniform in `[0, 2 pi)^r`, from the seed's init stream only.
pub fn generate_initial_points(r: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, Stream::InitPoints);
    (0..k)
        .map(|_| (0..r).map(|_| TAU * rng.random::<f64>()).collect())
        .collect()
}

/// Exact ground energies of every geometry.
pub fn reference_energies(family: &ProblemFamily) -> Result<Vec<f64>> {
    family.geometries.iter().map(|g| g.exact_ground_energy()).collect()
}

/// `|F - E| / |E| < epsilon` per geometry.
pub fn check_convergence(best: &[f64], references: &[f64], epsilon: f64) -> Result<Vec<bool>> {
    best.iter()
        .zip(references)
        .enumerate()
        .map(|(d, (f, e))| {
            if *e == 0.0 {
                Err(Error::ZeroReference(d))
            } else {
                Ok(((f - e) / e).abs() < epsilon)
            }
        })
        .collect()
}

fn word_key(p: &PauliString) -> (u64, u64) {
    (p.x_mask(), p.z_mask() ^ ((p.n_qubits() as u64) << 58))
}

impl RunState {
    /// Builds an empty state; [`initialize`] fills it.
    fn new(family: &ProblemFamily, config: RunConfig, references: Vec<f64>) -> Result<Self> {
        config.validate()?;
        family.validate()?;
        if references.len() != family.len() {
            return Err(Error::InvalidConfig("one reference energy per geometry".into()));
        }
        let rule = config.scheme.partners;
        let partners = (0..family.len())
            .map(|d| family.partners(d, rule))
            .collect::<Result<Vec<_>>>()?;
        let own_sets: Vec<_> = family.geometries.iter().map(|g| g.required_paulis()).collect();
        let eval_sets = (0..family.len())
            .map(|d| {
                let mut s = own_sets[d].clone();
                for &e in &partners[d] {
                    s.extend(own_sets[e].iter().copied());
                }
                s
            })
            .collect();
        Ok(RunState {
            config,
            references,
            points: Vec::new(),
            cache: PauliCache::default(),
            info: (0..family.len()).map(|_| InfoSet::new()).collect(),
            ledger: QcLedger::default(),
            iterations: 0,
            iteration_of_convergence: None,
            partners,
            eval_sets,
            own_sets,
            phase: Phase::Init,
        })
    }

    pub fn partners_of(&self, d: usize) -> &[usize] {
        &self.partners[d]
    }

    /// Words computed when geometry `d` evaluates a point of its own.
    pub fn evaluation_set(&self, d: usize) -> &BTreeSet<PauliString> {
        &self.eval_sets[d]
    }

    pub fn best(&self) -> Vec<f64> {
        self.info.iter().map(|i| i.best).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.iteration_of_convergence.is_some()
    }

    fn new_point(&mut self, theta: Vec<f64>, origin: Option<usize>, iteration: Option<u32>, shots: ShotConfig) -> PointId {
        let id = PointId(self.points.len() as u64);
        self.points.push(PointRecord {
            id,
            origin,
            iteration,
            theta,
            shots,
        });
        id
    }

    /// Energy of geometry `d` at `point`, computing (and charging) every word
    /// of `words` that is not cached yet. The words must cover geometry `d`.
    pub fn evaluate_objective(
        &mut self,
        family: &ProblemFamily,
        d: usize,
        point: PointId,
        words: &BTreeSet<PauliString>,
    ) -> Result<f64> {
        let h = family.geometry(d)?;
        let record = self
            .points
            .get(point.0 as usize)
            .ok_or(Error::InvalidConfig("unknown point".into()))?;
        let shots = record.shots;
        let mut state: Option<StateVector> = None;
        for w in words {
            if self.cache.get(point, w).is_some() {
                continue;
            }
            if state.is_none() {
                state = Some(family.ansatz.prepare_state(&self.points[point.0 as usize].theta)?);
            }
            let s = state.as_ref().expect("prepared above");
            let v = if shots.shot_count() == 0 {
                s.sampled_expectation(w, &shots, &mut NoRng)?
            } else {
                let mut r = rng::stream(
                    self.config.scheme.seed,
                    Stream::Shots {
                        point: point.0,
                        word: word_key(w),
                    },
                );
                s.sampled_expectation(w, &shots, &mut r)?
            };
            self.cache.insert(point, *w, v)?;
            let cost = if w.is_identity() { 0 } else { shots.shot_count() };
            self.ledger.charge(self.phase, cost);
        }
        h.energy_from_expectations(self.cache.values(point).expect("point has entries"))
    }

    fn update_convergence(&mut self, label: u32) -> Result<()> {
        let flags = check_convergence(&self.best(), &self.references, self.config.scheme.epsilon)?;
        for (info, ok) in self.info.iter_mut().zip(flags) {
            if ok && info.converged_at.is_none() {
                info.converged_at = Some(label);
            }
        }
        if self.iteration_of_convergence.is_none() && self.info.iter().all(|i| i.converged_at.is_some()) {
            self.iteration_of_convergence = Some(label);
        }
        Ok(())
    }

    fn training_set(&self, d: usize) -> Result<Dataset> {
        let info = &self.info[d];
        let dim = self.points.first().map_or(0, |p| p.theta.len());
        let mut x = Vec::with_capacity(info.len() * dim);
        for id in &info.points {
            x.extend_from_slice(&self.points[id.0 as usize].theta);
        }
        Dataset::from_flat(dim, x, info.energies.clone())
    }

    /// Next point of geometry `d` in iteration `n`, from its current information.
    pub fn propose(&self, d: usize, n: u32) -> Result<Vec<f64>> {
        let seed = self.config.scheme.seed;
        let mut acq_rng = rng::stream(seed, Stream::Acquisition { geometry: d, iteration: n });
        let dim = self.points.first().map_or(0, |p| p.theta.len());
        match self.config.strategy {
            Strategy::Random => {
                let acq = &self.config.acq;
                Ok((0..dim)
                    .map(|_| acq.lower + (acq.upper - acq.lower) * acq_rng.random::<f64>())
                    .collect())
            }
            Strategy::Bayesian => {
                let data = self.training_set(d)?;
                let mut gp_rng = rng::stream(seed, Stream::GpRestarts { geometry: d, iteration: n });
                let model = gp::fit(data, &self.config.gp, &mut gp_rng)?;
                let kappa = acquisition::kappa(&self.config.acq, n);
                Ok(acquisition::next_point(&model, kappa, &self.config.acq, &mut acq_rng))
            }
        }
    }

    /// Proposes and evaluates the own point of geometry `d`.
    fn own_step(&mut self, family: &ProblemFamily, d: usize, n: u32) -> Result<PointId> {
        let wrap = |e: Error| Error::Step {
            geometry: d,
            iteration: n as usize,
            source: Box::new(e),
        };
        let theta = self.propose(d, n).map_err(wrap)?;
        let shots = self.config.scheme.shots.for_iteration(n, self.config.scheme.n_max);
        let id = self.new_point(theta, Some(d), Some(n), shots);
        let words = self.eval_sets[d].clone();
        let e = self.evaluate_objective(family, d, id, &words).map_err(wrap)?;
        self.info[d].push(id, e);
        Ok(id)
    }

    fn share(&mut self, family: &ProblemFamily, d: usize, id: PointId) -> Result<()> {
        for k in 0..self.partners[d].len() {
            let e = self.partners[d][k];
            let words = self.own_sets[e].clone();
            let v = self.evaluate_objective(family, e, id, &words)?;
            self.info[e].push(id, v);
        }
        Ok(())
    }

    fn begin_iteration(&mut self, n: u32) -> Result<()> {
        if n != self.iterations {
            return Err(Error::InvalidConfig("iterations must run in order".into()));
        }
        self.phase = Phase::Iteration(n);
        if self.ledger.per_iteration_pauli_evals.len() <= n as usize {
            self.ledger.per_iteration_pauli_evals.resize(n as usize + 1, 0);
        }
        Ok(())
    }

    fn end_iteration(&mut self, n: u32) -> Result<()> {
        self.iterations = n + 1;
        self.update_convergence(n + 1)
    }
}

/// Placeholder generator for exact evaluations, which draw nothing.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("exact evaluation does not sample")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("exact evaluation does not sample")
    }
    fn fill_bytes(&mut self, _: &mut [u8]) {
        unreachable!("exact evaluation does not sample")
    }
}

/// Evaluates the initial points for every geometry.
pub fn initialize(
    family: &ProblemFamily,
    config: RunConfig,
    references: Vec<f64>,
    x_init: &[Vec<f64>],
) -> Result<RunState> {
    let mut state = RunState::new(family, config, references)?;
    if x_init.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = family.ansatz.n_params();
    if let Some(p) = x_init.iter().find(|p| p.len() != dim) {
        return Err(Error::ParameterCount {
            expected: dim,
            found: p.len(),
        });
    }
    let shots = state.config.scheme.shots.initial;
    if state.config.scheme.sharing() {
        let union = family.union_required();
        for theta in x_init {
            let id = state.new_point(theta.clone(), None, None, shots);
            for d in 0..family.len() {
                let e = state.evaluate_objective(family, d, id, &union)?;
                state.info[d].push(id, e);
            }
        }
    } else {
        for theta in x_init {
            for d in 0..family.len() {
                let id = state.new_point(theta.clone(), None, None, shots);
                let words = state.own_sets[d].clone();
                let e = state.evaluate_objective(family, d, id, &words)?;
                state.info[d].push(id, e);
            }
        }
    }
    state.update_convergence(0)?;
    Ok(state)
}

/// One iteration in which all geometries pick their points first and share
/// afterwards.
pub fn run_iteration_deferred(state: &mut RunState, family: &ProblemFamily, n: u32) -> Result<()> {
    state.begin_iteration(n)?;
    let mut new_points = Vec::with_capacity(family.len());
    for d in 0..family.len() {
        new_points.push(state.own_step(family, d, n)?);
    }
    for (d, id) in new_points.into_iter().enumerate() {
        state.share(family, d, id)?;
    }
    state.end_iteration(n)
}

/// One iteration in which each geometry shares right after its evaluation,
/// so later geometries already see it.
pub fn run_iteration_immediate(state: &mut RunState, family: &ProblemFamily, n: u32) -> Result<()> {
    state.begin_iteration(n)?;
    for d in 0..family.len() {
        let id = state.own_step(family, d, n)?;
        state.share(family, d, id)?;
    }
    state.end_iteration(n)
}

/// Per-geometry outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryResult {
    pub geometry_id: usize,
    pub reference: f64,
    pub best_energy: f64,
    pub best_theta: Vec<f64>,
    pub converged_at: Option<u32>,
    /// Energies in the order they entered the geometry's information set.
    pub energies: Vec<f64>,
}

impl GeometryResult {
    /// `(energy_eval_index, best_seen, rel_deviation)`, 1-based index.
    pub fn trace(&self) -> Vec<(usize, f64, f64)> {
        let mut best = f64::INFINITY;
        self.energies
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                best = best.min(e);
                (i + 1, best, ((best - self.reference) / self.reference).abs())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub x_init: Vec<Vec<f64>>,
    pub geometries: Vec<GeometryResult>,
    pub iterations_run: u32,
    pub iteration_of_convergence: Option<u32>,
    pub ledger: QcLedger,
}

impl RunResult {
    pub fn from_state(state: &RunState, x_init: Vec<Vec<f64>>) -> Self {
        let geometries = state
            .info
            .iter()
            .enumerate()
            .map(|(d, info)| GeometryResult {
                geometry_id: d,
                reference: state.references[d],
                best_energy: info.best,
                best_theta: info
                    .best_point
                    .map(|p| state.points[p.0 as usize].theta.clone())
                    .unwrap_or_default(),
                converged_at: info.converged_at,
                energies: info.energies.clone(),
            })
            .collect();
        RunResult {
            config: state.config,
            x_init,
            geometries,
            iterations_run: state.iterations,
            iteration_of_convergence: state.iteration_of_convergence,
            ledger: state.ledger.clone(),
        }
    }
}

/// Runs until every geometry has converged or the iteration cap is reached.
pub fn run(family: &ProblemFamily, config: RunConfig) -> Result<RunResult> {
    let references = reference_energies(family)?;
    run_with_references(family, config, references)
}

pub fn run_with_references(family: &ProblemFamily, config: RunConfig, references: Vec<f64>) -> Result<RunResult> {
    let state = run_state(family, config, references)?;
    let x_init = generate_initial_points(family.ansatz.n_params(), config.scheme.n_init, config.scheme.seed);
    Ok(RunResult::from_state(&state, x_init))
}

/// Like [`run_with_references`] but returns the final state.
pub fn run_state(family: &ProblemFamily, config: RunConfig, references: Vec<f64>) -> Result<RunState> {
    let config = RunConfig {
        scheme: config.scheme.normalised(),
        ..config
    };
    let x_init = generate_initial_points(family.ansatz.n_params(), config.scheme.n_init, config.scheme.seed);
    let mut state = initialize(family, config, references, &x_init)?;
    let mut n = 0;
    while n < config.scheme.n_max && !state.all_converged() {
        match config.scheme.timing {
            Timing::Deferred => run_iteration_deferred(&mut state, family, n)?,
            Timing::Immediate => run_iteration_immediate(&mut state, family, n)?,
        }
        n += 1;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Hamiltonian;
    use crate::simulator::AnsatzSpec;

    fn toy_h2() -> ProblemFamily {
        let rows = [
            (-1.0, 0.40, -0.40, 0.01, 0.18),
            (-1.04, 0.42, -0.42, -0.01, 0.18),
            (-0.98, 0.36, -0.36, 0.0, 0.2),
        ];
        let geoms = rows
            .iter()
            .enumerate()
            .map(|(i, &(a, b, c, d, e))| {
                Hamiltonian::from_words(i, &[("II", a), ("IZ", b), ("ZI", c), ("ZZ", d), ("XX", e)]).unwrap()
            })
            .collect();
        ProblemFamily::new("H2", AnsatzSpec::h2_fixed(), vec![3], geoms).unwrap()
    }

    fn random_config(timing: Timing, rule: PartnerRule, n_max: u32) -> RunConfig {
        let mut scheme = SchemeConfig::new(timing, rule);
        scheme.n_max = n_max;
        scheme.epsilon = 0.0;
        scheme.n_init = 4;
        let mut c = RunConfig::new(scheme, KernelKind::Matern52);
        c.strategy = Strategy::Random;
        c
    }

    #[test]
    fn initial_points_are_seeded() {
        let a = generate_initial_points(6, 30, 5);
        assert_eq!(a, generate_initial_points(6, 30, 5));
        assert_ne!(a, generate_initial_points(6, 30, 6));
        assert!(a.iter().flatten().all(|&v| (0.0..=TAU).contains(&v)));
    }

    #[test]
    fn cache_is_write_once() {
        let mut c = PauliCache::default();
        let w = PauliString::parse("XX", 2).unwrap();
        c.insert(PointId(3), w, 0.5).unwrap();
        assert!(matches!(c.insert(PointId(3), w, 0.5), Err(Error::CacheOverwrite { .. })));
        assert_eq!(c.get(PointId(3), &w), Some(0.5));
        assert_eq!(c.get(PointId(2), &w), None);
    }

    #[test]
    fn convergence_rule() {
        assert_eq!(check_convergence(&[-1.0], &[-1.0], 1e-9).unwrap(), vec![true]);
        assert_eq!(check_convergence(&[-1.0], &[-1.0], 0.0).unwrap(), vec![false]);
        assert_eq!(check_convergence(&[-0.99], &[-1.0], 0.02).unwrap(), vec![true]);
        assert_eq!(check_convergence(&[1.0], &[0.0], 0.1), Err(Error::ZeroReference(0)));
    }

    #[test]
    fn shot_schedule_tail() {
        let s = ShotSchedule::standard();
        assert_eq!(s.for_iteration(0, 100).shot_count(), 1000);
        assert_eq!(s.for_iteration(94, 100).shot_count(), 1000);
        assert_eq!(s.for_iteration(95, 100).shot_count(), 8192);
    }

    #[test]
    fn counting_on_a_chain() {
        let f = toy_h2();
        let st = run_state(&f, random_config(Timing::Deferred, PartnerRule::NoSharing, 3), vec![-1.1; 3]).unwrap();
        assert_eq!(st.ledger.init_pauli_evals, 3 * 4 * 5);
        assert_eq!(st.ledger.per_iteration_pauli_evals, vec![15, 15, 15]);
        assert!(st.info.iter().all(|i| i.len() == 4 + 3));

        let st = run_state(&f, random_config(Timing::Deferred, PartnerRule::AllToAll, 2), vec![-1.1; 3]).unwrap();
        assert_eq!(st.ledger.init_pauli_evals, 4 * 5);
        assert_eq!(st.ledger.per_iteration_pauli_evals, vec![15, 15]);
        assert!(st.info.iter().all(|i| i.len() == 4 + 2 * 3));
        assert_eq!(
            st.ledger.total_pauli_evals,
            st.ledger.init_pauli_evals + st.ledger.per_iteration_pauli_evals.iter().sum::<u64>()
        );
    }

    #[test]
    fn no_sharing_timings_agree() {
        let f = toy_h2();
        let mut a = random_config(Timing::Deferred, PartnerRule::NoSharing, 3);
        let mut b = a;
        b.scheme.timing = Timing::Immediate;
        a.strategy = Strategy::Bayesian;
        b.strategy = Strategy::Bayesian;
        let ra = run_with_references(&f, a, vec![-1.1; 3]).unwrap();
        let rb = run_with_references(&f, b, vec![-1.1; 3]).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn zero_iterations_only_initialise() {
        let f = toy_h2();
        let r = run_with_references(&f, random_config(Timing::Immediate, PartnerRule::AllToAll, 0), vec![-1.1; 3]).unwrap();
        assert_eq!(r.iterations_run, 0);
        assert!(r.ledger.per_iteration_pauli_evals.is_empty());
        assert_eq!(r.ledger.total_pauli_evals, r.ledger.init_pauli_evals);
    }

    #[test]
    fn shared_energies_match_direct_evaluation() {
        let f = toy_h2();
        let st = run_state(&f, random_config(Timing::Immediate, PartnerRule::AllToAll, 2), vec![-1.1; 3]).unwrap();
        for (d, info) in st.info.iter().enumerate() {
            for (id, e) in info.points.iter().zip(&info.energies) {
                let s = f.ansatz.prepare_state(&st.points[id.0 as usize].theta).unwrap();
                let direct: f64 = f.geometries[d]
                    .terms()
                    .iter()
                    .map(|(p, c)| c * s.exact_expectation(p).unwrap())
                    .sum();
                assert!((direct - e).abs() < 1e-12);
            }
        }
    }
}
