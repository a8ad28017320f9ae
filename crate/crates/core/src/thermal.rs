//! Continuous-time Markov dynamics of a Pauli error frame coupled to a bath,
//! and memory-time estimation from decoded checkpoints.
//!
//! With single-qubit Pauli jumps and a commuting Pauli Hamiltonian the
//! populations in the error basis evolve as a classical jump process: flipping
//! qubit `q` with a Pauli of type `P` changes the energy by
//! `ω = (checks touched) − 2·(touched checks already lit)` and happens at rate
//! `h(ω)`. The reported quantity is the probability of a logical failure after
//! decoding, the classical stand-in for the storage error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::InputDecoder;
use crate::decoder::Decoder;
use crate::gf2::BitVec;
use crate::lattice::{extract_syndrome, logical_action_unchecked, LayerLattice, LogicalClass};
use crate::pauli::{CheckMatrices, PauliError, PauliKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("{got} trajectories per cell, at least {need} required")]
    TooFewTrajectories { got: usize, need: usize },
    #[error("checkpoint schedule must be nonempty, positive and strictly increasing")]
    BadSchedule,
    #[error("lattice has {0} logical qubits, at most 32 are supported in failure masks")]
    TooManyLogicals(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    /// `min(1, e^{-βω})`.
    #[default]
    Metropolis,
    /// `1 / (1 + e^{βω})`.
    Glauber,
}

/// Jump rates for single-qubit X and Z flips at inverse temperature `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub beta: f64,
    pub kind: RateKind,
}

impl RateModel {
    pub fn metropolis(beta: f64) -> Self {
        RateModel {
            beta,
            kind: RateKind::Metropolis,
        }
    }

    /// Natural log of the rate for an energy change `omega`.
    pub fn log_rate(&self, omega: i64) -> f64 {
        let x = self.beta * omega as f64;
        match self.kind {
            RateKind::Metropolis => (-x).min(0.0),
            // -ln(1 + e^x), evaluated without overflow.
            RateKind::Glauber => {
                if x > 0.0 {
                    -x - (-x).exp().ln_1p()
                } else {
                    -x.exp().ln_1p()
                }
            }
        }
    }

    pub fn rate(&self, omega: i64) -> f64 {
        self.log_rate(omega).exp()
    }
}

/// Rate for an energy change `omega` (system energy after minus before, in check units).
pub fn rate(model: &RateModel, omega: i64) -> f64 {
    model.rate(omega)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub qubit: u32,
    pub kind: PauliKind,
}

/// Error frame with lit checks and per-move energy changes kept up to date.
///
/// Moves are `2q` (X on `q`) and `2q + 1` (Z on `q`), grouped in buckets by
/// energy change so that the total rate is a short sum.
#[derive(Clone, Debug)]
pub struct ThermalState<'a> {
    checks: &'a CheckMatrices,
    error: PauliError,
    /// Lit Z-checks (flipped by X) and lit X-checks (flipped by Z).
    lit: [BitVec; 2],
    lit_touched: Vec<u8>,
    degree: Vec<u8>,
    offset: i64,
    buckets: Vec<Vec<u32>>,
    slot: Vec<u32>,
    energy: usize,
    pub time: f64,
}

fn kind_index(kind: PauliKind) -> usize {
    match kind {
        PauliKind::X => 0,
        PauliKind::Z => 1,
    }
}

fn kind_of(index: usize) -> PauliKind {
    if index == 0 {
        PauliKind::X
    } else {
        PauliKind::Z
    }
}

impl<'a> ThermalState<'a> {
    pub fn new(checks: &'a CheckMatrices, error: PauliError) -> Self {
        let n = checks.num_qubits();
        assert_eq!(error.num_qubits(), n, "error length must equal qubit count");
        let mut degree = vec![0u8; 2 * n];
        for q in 0..n {
            for k in 0..2 {
                degree[2 * q + k] = checks.detecting_of(kind_of(k)).row(q).len() as u8;
            }
        }
        let max_deg = degree.iter().copied().max().unwrap_or(0) as i64;
        let lit = [
            checks.syndrome_of(&error.x_support, PauliKind::X),
            checks.syndrome_of(&error.z_support, PauliKind::Z),
        ];
        let energy = lit[0].weight() + lit[1].weight();
        let mut state = ThermalState {
            checks,
            error,
            lit,
            lit_touched: vec![0; 2 * n],
            degree,
            offset: max_deg,
            buckets: vec![Vec::new(); 2 * max_deg as usize + 1],
            slot: vec![0; 2 * n],
            energy,
            time: 0.0,
        };
        for m in 0..2 * n {
            let k = m % 2;
            let touched = checks.detecting_of(kind_of(k)).row(m / 2);
            state.lit_touched[m] = touched
                .iter()
                .filter(|&&c| state.lit[k].get(c as usize))
                .count() as u8;
            let b = state.bucket_of(m);
            state.slot[m] = state.buckets[b].len() as u32;
            state.buckets[b].push(m as u32);
        }
        state
    }

    pub fn error(&self) -> &PauliError {
        &self.error
    }

    pub fn energy(&self) -> usize {
        self.energy
    }

    /// Moves (indexed `2 * qubit + kind`) whose energy change is at most `max_omega`.
    pub fn moves_up_to(&self, max_omega: i64) -> Vec<usize> {
        let top = (max_omega + self.offset).min(self.buckets.len() as i64 - 1);
        if top < 0 {
            return Vec::new();
        }
        let mut out: Vec<usize> = self.buckets[..=top as usize]
            .iter()
            .flatten()
            .map(|&m| m as usize)
            .collect();
        out.sort_unstable();
        out
    }

    /// Energy change of a move.
    pub fn omega(&self, m: usize) -> i64 {
        self.degree[m] as i64 - 2 * self.lit_touched[m] as i64
    }

    fn bucket_of(&self, m: usize) -> usize {
        (self.omega(m) + self.offset) as usize
    }

    fn remove(&mut self, m: usize) {
        let b = self.bucket_of(m);
        let s = self.slot[m] as usize;
        let last = *self.buckets[b].last().expect("move present in its bucket");
        self.buckets[b].swap_remove(s);
        if last as usize != m {
            self.slot[last as usize] = s as u32;
        }
    }

    fn insert(&mut self, m: usize) {
        let b = self.bucket_of(m);
        self.slot[m] = self.buckets[b].len() as u32;
        self.buckets[b].push(m as u32);
    }

    /// Rate of each bucket, indexed like `buckets`.
    pub fn bucket_rates(&self, model: &RateModel) -> Vec<f64> {
        (0..self.buckets.len())
            .map(|b| model.rate(b as i64 - self.offset))
            .collect()
    }

    pub fn total_rate(&self, rates: &[f64]) -> f64 {
        self.buckets
            .iter()
            .zip(rates)
            .map(|(b, r)| b.len() as f64 * r)
            .sum()
    }

    /// Applies one move, updating lit checks, energy and affected move buckets.
    pub fn apply(&mut self, qubit: usize, kind: PauliKind) {
        let k = kind_index(kind);
        self.error.flip(qubit, kind);
        let checks = self.checks;
        for &c in checks.detecting_of(kind).row(qubit) {
            let c = c as usize;
            self.lit[k].toggle(c);
            let now_lit = self.lit[k].get(c);
            if now_lit {
                self.energy += 1;
            } else {
                self.energy -= 1;
            }
            for &q2 in checks.detecting(kind).row(c) {
                let m = 2 * q2 as usize + k;
                self.remove(m);
                if now_lit {
                    self.lit_touched[m] += 1;
                } else {
                    self.lit_touched[m] -= 1;
                }
                self.insert(m);
            }
        }
    }

    /// Picks a move with probability proportional to its rate.
    fn choose(&self, rates: &[f64], total: f64, rng: &mut impl Rng) -> usize {
        let mut x = rng.gen::<f64>() * total;
        let mut fallback = None;
        for (b, moves) in self.buckets.iter().enumerate() {
            if moves.is_empty() || rates[b] == 0.0 {
                continue;
            }
            let w = moves.len() as f64 * rates[b];
            fallback = Some(b);
            if x < w {
                let i = ((x / rates[b]) as usize).min(moves.len() - 1);
                return moves[i] as usize;
            }
            x -= w;
        }
        // Rounding pushed x past the end: take the last nonempty bucket.
        let b = fallback.expect("positive total rate");
        *self.buckets[b].last().expect("nonempty") as usize
    }

    /// One kinetic Monte Carlo step: returns the waiting time and applied move,
    /// or `None` when every rate vanishes.
    pub fn step(&mut self, model: &RateModel, rng: &mut impl Rng) -> Option<Event> {
        let rates = self.bucket_rates(model);
        let total = self.total_rate(&rates);
        if total <= 0.0 {
            return None;
        }
        let dt: f64 = rng.sample::<f64, _>(Exp1) / total;
        let m = self.choose(&rates, total, rng);
        self.time += dt;
        let (qubit, kind) = (m / 2, kind_of(m % 2));
        self.apply(qubit, kind);
        Some(Event {
            time: self.time,
            qubit: qubit as u32,
            kind,
        })
    }
}

/// One step from `state`: waiting time and next configuration (`None` if frozen).
pub fn step(
    checks: &CheckMatrices,
    state: &PauliError,
    model: &RateModel,
    rng: &mut impl Rng,
) -> Option<(f64, PauliError)> {
    let mut s = ThermalState::new(checks, state.clone());
    s.step(model, rng).map(|e| (e.time, s.error.clone()))
}

/// How checkpoints are decoded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointDecoder {
    #[default]
    Concatenated,
    /// Reads the logical action of the raw frame without correcting it.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub time: f64,
    /// Bit `2j` set if logical `j` carries an X failure, bit `2j + 1` for Z.
    pub failed: u64,
    /// The decoder aborted; all bits are set.
    pub aborted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub events: Vec<Event>,
    pub checkpoints: Vec<Checkpoint>,
}

fn failure_mask(action: &[LogicalClass]) -> u64 {
    action.iter().enumerate().fold(0, |acc, (j, a)| {
        let (x, z) = match a {
            LogicalClass::I => (false, false),
            LogicalClass::X => (true, false),
            LogicalClass::Z => (false, true),
            LogicalClass::Y => (true, true),
        };
        acc | (u64::from(x) << (2 * j)) | (u64::from(z) << (2 * j + 1))
    })
}

/// Decodes a copy of the frame and reports which logicals it lands on.
pub fn evaluate_checkpoint(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    mode: CheckpointDecoder,
    frame: &PauliError,
    time: f64,
) -> Checkpoint {
    let lat = decoder.lattice();
    let all = if lat.k >= 32 {
        u64::MAX
    } else {
        (1u64 << (2 * lat.k)) - 1
    };
    match mode {
        CheckpointDecoder::Identity => Checkpoint {
            time,
            failed: failure_mask(&logical_action_unchecked(lat, frame)),
            aborted: false,
        },
        CheckpointDecoder::Concatenated => {
            let s = extract_syndrome(lat, frame);
            match decoder.decode_both(&s, input) {
                Ok(r) => {
                    let mut total = frame.clone();
                    total.mul_assign(&r);
                    Checkpoint {
                        time,
                        failed: failure_mask(&logical_action_unchecked(lat, &total)),
                        aborted: false,
                    }
                }
                Err(_) => Checkpoint {
                    time,
                    failed: all,
                    aborted: true,
                },
            }
        }
    }
}

/// A trajectory advanced checkpoint by checkpoint.
struct Runner<'a> {
    seed: u64,
    state: ThermalState<'a>,
    rng: ChaCha8Rng,
    next_event: Option<f64>,
    events: Option<Vec<Event>>,
    checkpoints: Vec<Checkpoint>,
}

impl<'a> Runner<'a> {
    fn new(checks: &'a CheckMatrices, seed: u64, record_events: bool) -> Self {
        let n = checks.num_qubits();
        Runner {
            seed,
            state: ThermalState::new(checks, PauliError::identity(n)),
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_event: None,
            events: record_events.then(Vec::new),
            checkpoints: Vec::new(),
        }
    }

    /// Applies every event up to `t`.
    fn advance_to(&mut self, t: f64, model: &RateModel) {
        let rates = self.state.bucket_rates(model);
        loop {
            let total = self.state.total_rate(&rates);
            let next = match self.next_event {
                Some(x) => x,
                None => {
                    if total <= 0.0 {
                        f64::INFINITY
                    } else {
                        self.state.time + self.rng.sample::<f64, _>(Exp1) / total
                    }
                }
            };
            if next > t {
                self.next_event = Some(next).filter(|x| x.is_finite());
                return;
            }
            let m = self.state.choose(&rates, total, &mut self.rng);
            self.state.time = next;
            self.next_event = None;
            let (qubit, kind) = (m / 2, kind_of(m % 2));
            self.state.apply(qubit, kind);
            if let Some(ev) = self.events.as_mut() {
                ev.push(Event {
                    time: next,
                    qubit: qubit as u32,
                    kind,
                });
            }
        }
    }

    fn into_trajectory(self) -> Trajectory {
        Trajectory {
            seed: self.seed,
            events: self.events.unwrap_or_default(),
            checkpoints: self.checkpoints,
        }
    }
}

/// Runs one trajectory from the zero frame through all checkpoints.
pub fn run_trajectory(
    decoder: &Decoder,
    input: &dyn InputDecoder,
    model: &RateModel,
    schedule: &[f64],
    mode: CheckpointDecoder,
    seed: u64,
    record_events: bool,
) -> Trajectory {
    let lat = decoder.lattice();
    let mut r = Runner::new(&lat.checks, seed, record_events);
    for &t in schedule {
        r.advance_to(t, model);
        let cp = evaluate_checkpoint(decoder, input, mode, r.state.error(), t);
        r.checkpoints.push(cp);
    }
    r.into_trajectory()
}

/// Mixes a master seed with stream indices (SplitMix64 finalizer).
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    mix(mix(mix(master) ^ a) ^ b)
}

/// Geometric checkpoint schedule from `t0` to `t_max` with `count` points.
pub fn geometric_schedule(t0: f64, t_max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![t_max];
    }
    let r = (t_max / t0).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                t_max
            } else {
                t0 * r.powi(i as i32)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryExperiment {
    pub betas: Vec<f64>,
    pub rate: RateKind,
    /// Checkpoint times; the last one is `t_max`.
    pub schedule: Vec<f64>,
    pub trajectories: usize,
    pub master_seed: u64,
    pub checkpoint_decoder: CheckpointDecoder,
    /// Stop a cell once this fraction of trajectories fails at a checkpoint.
    pub stop_fraction: Option<f64>,
    pub bootstrap: usize,
}

impl MemoryExperiment {
    pub const MIN_TRAJECTORIES: usize = 30;

    pub fn t_max(&self) -> f64 {
        self.schedule.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        if self.trajectories < Self::MIN_TRAJECTORIES {
            return Err(ThermalError::TooFewTrajectories {
                got: self.trajectories,
                need: Self::MIN_TRAJECTORIES,
            });
        }
        if self.schedule.is_empty()
            || self.schedule[0] <= 0.0
            || self.schedule.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(ThermalError::BadSchedule);
        }
        Ok(())
    }
}

/// One line of the results stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub beta: f64,
    #[serde(rename = "L")]
    pub linear_size: usize,
    pub seed: u64,
    pub checkpoint_time: f64,
    pub failed_logicals: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub beta: f64,
    #[serde(rename = "L")]
    pub linear_size: usize,
    pub trajectories: usize,
    pub checkpoint_times: Vec<f64>,
    /// Fraction of trajectories with any logical failure at each checkpoint.
    pub failure_fraction: Vec<f64>,
    /// Estimated memory time; `None` when censored.
    pub t_mem: Option<f64>,
    /// 90% bootstrap interval; censored resamples count as the last checkpoint time.
    pub ci: (f64, f64),
    pub censored: bool,
}

/// Time at which a failure curve first reaches 1/2, interpolated linearly.
pub fn half_crossing(times: &[f64], fractions: &[f64]) -> Option<f64> {
    let j = fractions.iter().position(|&f| f >= 0.5)?;
    if j == 0 {
        return Some(times[0]);
    }
    let (t0, t1, f0, f1) = (times[j - 1], times[j], fractions[j - 1], fractions[j]);
    Some(t0 + (0.5 - f0) / (f1 - f0) * (t1 - t0))
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

fn summarize(
    beta: f64,
    lat: &LayerLattice,
    exp: &MemoryExperiment,
    trajs: &[Trajectory],
) -> CellResult {
    let times: Vec<f64> = trajs[0].checkpoints.iter().map(|c| c.time).collect();
    let fails: Vec<Vec<bool>> = trajs
        .iter()
        .map(|t| t.checkpoints.iter().map(|c| c.failed != 0).collect())
        .collect();
    let fraction = |idx: &[usize]| -> Vec<f64> {
        (0..times.len())
            .map(|j| idx.iter().filter(|&&i| fails[i][j]).count() as f64 / idx.len() as f64)
            .collect()
    };
    let all: Vec<usize> = (0..trajs.len()).collect();
    let curve = fraction(&all);
    let t_mem = half_crossing(&times, &curve);
    let last = *times.last().expect("nonempty schedule");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(exp.master_seed, beta.to_bits(), u64::MAX));
    let mut samples: Vec<f64> = (0..exp.bootstrap)
        .map(|_| {
            let idx: Vec<usize> = (0..trajs.len())
                .map(|_| rng.gen_range(0..trajs.len()))
                .collect();
            half_crossing(&times, &fraction(&idx)).unwrap_or(last)
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let ci = if samples.is_empty() {
        (t_mem.unwrap_or(last), t_mem.unwrap_or(last))
    } else {
        (percentile(&samples, 0.05), percentile(&samples, 0.95))
    };
    CellResult {
        beta,
        linear_size: lat.linear_size(),
        trajectories: trajs.len(),
        checkpoint_times: times,
        failure_fraction: curve,
        t_mem,
        ci,
        censored: t_mem.is_none(),
    }
}

/// Runs all cells; `sink` receives each cell's records in trajectory then checkpoint order.
pub fn estimate_memory_time(
    lat: &LayerLattice,
    exp: &MemoryExperiment,
    input: &dyn InputDecoder,
    mut sink: impl FnMut(&Record),
) -> Result<Vec<CellResult>, ThermalError> {
    exp.validate()?;
    if lat.k > 32 {
        return Err(ThermalError::TooManyLogicals(lat.k));
    }
    let decoder = Decoder::new(lat);
    let mut out = Vec::new();
    for (ci, &beta) in exp.betas.iter().enumerate() {
        let model = RateModel {
            beta,
            kind: exp.rate,
        };
        let mut runners: Vec<Runner> = (0..exp.trajectories)
            .map(|t| {
                Runner::new(
                    &lat.checks,
                    derive_seed(exp.master_seed, ci as u64, t as u64),
                    false,
                )
            })
            .collect();
        for &t in &exp.schedule {
            runners.par_iter_mut().for_each(|r| {
                r.advance_to(t, &model);
                let cp = evaluate_checkpoint(
                    &decoder,
                    input,
                    exp.checkpoint_decoder,
                    r.state.error(),
                    t,
                );
                r.checkpoints.push(cp);
            });
            let failed = runners
                .iter()
                .filter(|r| r.checkpoints.last().is_some_and(|c| c.failed != 0))
                .count();
            if exp
                .stop_fraction
                .is_some_and(|f| failed as f64 >= f * runners.len() as f64)
            {
                break;
            }
        }
        let trajs: Vec<Trajectory> = runners.into_iter().map(Runner::into_trajectory).collect();
        for tr in &trajs {
            for c in &tr.checkpoints {
                sink(&Record {
                    beta,
                    linear_size: lat.linear_size(),
                    seed: tr.seed,
                    checkpoint_time: c.time,
                    failed_logicals: c.failed,
                });
            }
        }
        out.push(summarize(beta, lat, exp, &trajs));
    }
    Ok(out)
}
