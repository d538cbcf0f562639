//! The two-player identification game.
//!
//! Player 1 fixes a secret state from a labelled candidate set. Player 2
//! measures a fixed POVM on fresh copies of it, one per round. After each
//! outcome every candidate that gives that outcome probability (below)
//! `eps_zero` is *hard-eliminated*; every other candidate has its
//! log-likelihood updated and is *soft-rejected* once its likelihood ratio to
//! the current leader drops below `delta`. The game ends when one candidate
//! survives or the round budget runs out.
//!
//! Hard elimination alone cannot separate nested subgroups (the state of a
//! smaller subgroup is never ruled out by outcomes of a larger one), so the
//! likelihood rule is always active.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::linalg::{outcome_probability, validate_povm, DensityMatrix, Povm, Tolerances};
use crate::states::HiddenSubgroupState;
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 1e-6;
pub const DEFAULT_MAX_ROUNDS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclarationRule {
    /// Declare only a sole survivor; undecided at budget.
    SoleSurvivor,
    /// At budget, declare the most likely survivor. Ties go to the larger
    /// subgroup, then to the lower candidate index.
    #[default]
    MaxLikelihoodAtBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub subgroup_order: usize,
    pub density: DensityMatrix,
}

impl From<&HiddenSubgroupState> for Candidate {
    fn from(s: &HiddenSubgroupState) -> Self {
        Self {
            label: s.name(),
            subgroup_order: s.label.subgroup_order(),
            density: s.density.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub candidates: Vec<Candidate>,
    pub povm: Povm,
    pub seed: u64,
    pub max_rounds: usize,
    pub eps_zero: f64,
    pub delta: f64,
    pub rule: DeclarationRule,
    pub tolerances: Tolerances,
}

impl GameConfig {
    pub fn new(candidates: Vec<Candidate>, povm: Povm, seed: u64) -> Self {
        let tolerances = Tolerances::default();
        Self {
            candidates,
            povm,
            seed,
            max_rounds: DEFAULT_MAX_ROUNDS,
            eps_zero: tolerances.zero,
            delta: DEFAULT_DELTA,
            rule: DeclarationRule::default(),
            tolerances,
        }
    }

    pub fn from_states(states: &[HiddenSubgroupState], povm: Povm, seed: u64) -> Self {
        Self::new(states.iter().map(Candidate::from).collect(), povm, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if self.max_rounds == 0 {
            return Err(Error::domain("max_rounds must be >= 1"));
        }
        if self.candidates.is_empty() {
            return Err(Error::domain("empty candidate set"));
        }
        let v = validate_povm(&self.povm, &self.tolerances);
        if !v.passed {
            return Err(Error::domain(format!(
                "invalid POVM (completeness deviation {:e})",
                v.completeness_deviation
            )));
        }
        if self.candidates.iter().any(|c| c.density.dim() != self.povm.dim()) {
            return Err(Error::domain("candidate dimension differs from POVM dimension"));
        }
        Ok(())
    }

    pub fn secret_index(&self, label: &str) -> Result<usize> {
        self.candidates
            .iter()
            .position(|c| c.label == label)
            .ok_or_else(|| Error::domain(format!("unknown secret {label:?}")))
    }

    /// `table[r][i] = tr(rho_r A_i)`, clipped to `[0,1]` and renormalized.
    fn outcome_table(&self) -> Result<Vec<Vec<f64>>> {
        self.candidates
            .iter()
            .map(|c| born_probabilities(&c.density, &self.povm, &self.tolerances))
            .collect()
    }
}

/// Born-rule distribution of `a` on `rho`.
pub fn born_probabilities(rho: &DensityMatrix, a: &Povm, tol: &Tolerances) -> Result<Vec<f64>> {
    let mut p = a
        .outcomes()
        .iter()
        .map(|op| outcome_probability(rho, op, tol).map(|x| x.clamp(0.0, 1.0)))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("outcome probabilities sum to {total}")));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

fn sample_from(p: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack; take the last outcome with mass
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// One measurement of `a` on a fresh copy of `rho`.
pub fn sample_outcome(rho: &DensityMatrix, a: &Povm, rng: &mut impl Rng, tol: &Tolerances) -> Result<usize> {
    Ok(sample_from(&born_probabilities(rho, a, tol)?, rng))
}

/// Independent stream per `(seed, secret, trial)`, so parallel and serial
/// runs draw identical outcomes.
pub fn trial_rng(seed: u64, secret: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((secret as u64) << 32) | trial as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CandidateStatus {
    Alive,
    HardEliminated { round: usize },
    SoftRejected { round: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub outcome: usize,
    /// Probability of this outcome under the secret.
    pub probability: f64,
    pub hard_eliminated: Vec<usize>,
    pub soft_rejected: Vec<usize>,
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTranscript {
    pub seed: u64,
    pub trial: usize,
    pub secret: String,
    pub secret_index: usize,
    pub rule: DeclarationRule,
    pub delta: f64,
    pub rounds: Vec<RoundRecord>,
    pub statuses: Vec<CandidateStatus>,
    /// `None` once hard-eliminated (log-likelihood minus infinity).
    pub log_likelihoods: Vec<Option<f64>>,
    pub declared: Option<String>,
    pub declared_index: Option<usize>,
    pub rounds_used: usize,
    pub correct: bool,
}

struct Outcome {
    declared: Option<usize>,
    rounds_used: usize,
}

fn run(
    config: &GameConfig,
    table: &[Vec<f64>],
    secret: usize,
    rng: &mut impl Rng,
    mut log: Option<&mut Vec<RoundRecord>>,
    statuses: &mut [CandidateStatus],
    loglik: &mut [f64],
) -> Outcome {
    let n = config.candidates.len();
    let ln_delta = config.delta.ln();
    let alive = |st: &[CandidateStatus]| -> Vec<usize> {
        (0..n).filter(|&c| st[c] == CandidateStatus::Alive).collect()
    };
    let mut rounds_used = 0;
    while rounds_used < config.max_rounds && alive(statuses).len() > 1 {
        rounds_used += 1;
        let outcome = sample_from(&table[secret], rng);
        let mut hard = Vec::new();
        for c in alive(statuses) {
            let p = table[c][outcome];
            if p <= config.eps_zero {
                statuses[c] = CandidateStatus::HardEliminated { round: rounds_used };
                loglik[c] = f64::NEG_INFINITY;
                hard.push(c);
            } else {
                loglik[c] += p.ln();
            }
        }
        let leader = alive(statuses)
            .into_iter()
            .map(|c| loglik[c])
            .fold(f64::NEG_INFINITY, f64::max);
        let mut soft = Vec::new();
        for c in alive(statuses) {
            if loglik[c] - leader < ln_delta {
                statuses[c] = CandidateStatus::SoftRejected { round: rounds_used };
                soft.push(c);
            }
        }
        if let Some(log) = log.as_deref_mut() {
            log.push(RoundRecord {
                round: rounds_used,
                outcome,
                probability: table[secret][outcome],
                hard_eliminated: hard,
                soft_rejected: soft,
                survivors: alive(statuses),
            });
        }
    }
    let survivors = alive(statuses);
    let declared = match (survivors.len(), config.rule) {
        (1, _) => Some(survivors[0]),
        (0, _) | (_, DeclarationRule::SoleSurvivor) => None,
        (_, DeclarationRule::MaxLikelihoodAtBudget) => {
            let slack = 1e-9 * (rounds_used as f64 + 1.0);
            let best = survivors.iter().map(|&c| loglik[c]).fold(f64::NEG_INFINITY, f64::max);
            survivors
                .into_iter()
                .filter(|&c| loglik[c] >= best - slack)
                .min_by_key(|&c| (std::cmp::Reverse(config.candidates[c].subgroup_order), c))
        }
    };
    Outcome { declared, rounds_used }
}

/// Plays trial 0 for the named secret.
pub fn play(config: &GameConfig, secret: &str) -> Result<GameTranscript> {
    play_trial(config, config.secret_index(secret)?, 0)
}

pub fn play_trial(config: &GameConfig, secret: usize, trial: usize) -> Result<GameTranscript> {
    config.validate()?;
    if secret >= config.candidates.len() {
        return Err(Error::domain(format!("secret index {secret} out of range")));
    }
    let table = config.outcome_table()?;
    let n = config.candidates.len();
    let mut statuses = vec![CandidateStatus::Alive; n];
    let mut loglik = vec![0.0; n];
    let mut rounds = Vec::new();
    let mut rng = trial_rng(config.seed, secret, trial);
    let out = run(config, &table, secret, &mut rng, Some(&mut rounds), &mut statuses, &mut loglik);
    Ok(GameTranscript {
        seed: config.seed,
        trial,
        secret: config.candidates[secret].label.clone(),
        secret_index: secret,
        rule: config.rule,
        delta: config.delta,
        rounds,
        statuses,
        log_likelihoods: loglik.iter().map(|&l| l.is_finite().then_some(l)).collect(),
        declared: out.declared.map(|c| config.candidates[c].label.clone()),
        declared_index: out.declared,
        rounds_used: out.rounds_used,
        correct: out.declared == Some(secret),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecretStats {
    pub secret: String,
    pub trials: usize,
    pub correct: usize,
    pub undecided: usize,
    pub accuracy: Option<f64>,
    pub mean_rounds: Option<f64>,
    pub p50_rounds: Option<usize>,
    pub p90_rounds: Option<usize>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TournamentStats {
    pub seed: u64,
    pub trials_per_secret: usize,
    pub rule: DeclarationRule,
    pub delta: f64,
    pub round_budget: usize,
    pub per_secret: Vec<SecretStats>,
    pub total_trials: usize,
    pub overall_accuracy: Option<f64>,
    pub overall_mean_rounds: Option<f64>,
}

/// Nearest-rank percentile of a sorted slice.
fn percentile(sorted: &[usize], q: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

fn secret_stats(label: &str, games: &[(bool, bool, usize)]) -> SecretStats {
    let trials = games.len();
    let mut rounds: Vec<usize> = games.iter().map(|g| g.2).collect();
    rounds.sort_unstable();
    let correct = games.iter().filter(|g| g.0).count();
    let ratio = |x: usize| (trials > 0).then(|| x as f64 / trials as f64);
    SecretStats {
        secret: label.to_string(),
        trials,
        correct,
        undecided: games.iter().filter(|g| g.1).count(),
        accuracy: ratio(correct),
        mean_rounds: ratio(rounds.iter().sum()),
        p50_rounds: percentile(&rounds, 0.5),
        p90_rounds: percentile(&rounds, 0.9),
        max_rounds: rounds.last().copied(),
    }
}

/// `trials` games for every candidate as secret.
pub fn tournament(config: &GameConfig, trials: usize) -> Result<TournamentStats> {
    tournament_with(config, trials, Exec::default())
}

pub fn tournament_with(config: &GameConfig, trials: usize, exec: Exec) -> Result<TournamentStats> {
    let all: Vec<usize> = (0..config.candidates.len()).collect();
    tournament_for(config, &all, trials, exec)
}

/// `trials` games for each listed secret index.
pub fn tournament_for(config: &GameConfig, secrets: &[usize], trials: usize, exec: Exec) -> Result<TournamentStats> {
    config.validate()?;
    let n = config.candidates.len();
    if let Some(&bad) = secrets.iter().find(|&&s| s >= n) {
        return Err(Error::domain(format!("secret index {bad} out of range")));
    }
    let table = config.outcome_table()?;
    let games: Vec<(bool, bool, usize)> = exec.map_range(secrets.len() * trials, |job| {
        let (secret, trial) = (secrets[job / trials], job % trials);
        let mut statuses = vec![CandidateStatus::Alive; n];
        let mut loglik = vec![0.0; n];
        let mut rng = trial_rng(config.seed, secret, trial);
        let out = run(config, &table, secret, &mut rng, None, &mut statuses, &mut loglik);
        (out.declared == Some(secret), out.declared.is_none(), out.rounds_used)
    });
    let per_secret = secrets
        .iter()
        .enumerate()
        .map(|(i, &s)| secret_stats(&config.candidates[s].label, &games[i * trials..(i + 1) * trials]))
        .collect();
    let overall = secret_stats("", &games);
    Ok(TournamentStats {
        seed: config.seed,
        trials_per_secret: trials,
        rule: config.rule,
        delta: config.delta,
        round_budget: config.max_rounds,
        per_secret,
        total_trials: games.len(),
        overall_accuracy: overall.accuracy,
        overall_mean_rounds: overall.mean_rounds,
    })
}

/// Mean over `rounds` measurements on `secret` of
/// `ln p_other(i) - ln p_secret(i)`; minus infinity if any sampled outcome
/// is impossible under `other`.
pub fn mean_log_likelihood_increment(
    secret: &DensityMatrix,
    other: &DensityMatrix,
    a: &Povm,
    rounds: usize,
    rng: &mut impl Rng,
    tol: &Tolerances,
) -> Result<f64> {
    let ps = born_probabilities(secret, a, tol)?;
    let po = born_probabilities(other, a, tol)?;
    let mut total = 0.0;
    for _ in 0..rounds {
        let i = sample_from(&ps, rng);
        total += po[i].ln() - ps[i].ln();
    }
    Ok(total / rounds.max(1) as f64)
}
