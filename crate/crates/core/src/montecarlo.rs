//! Seeded simulation of whole games.
//!
//! Trials run in batches of [`BATCH_SIZE`]. Batch `i` draws from a ChaCha8
//! generator seeded with `splitmix64(seed + i * 0x9e3779b97f4a7c15)`, so a
//! run is reproducible whatever the thread count, and the parallel and
//! sequential builds give identical reports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{apply_guess, initial_state, sample_reveal, GameConfig, History, RevealRule, Status};
use crate::par;
use crate::rational::{frac, ratio, to_f64, Rational};
use crate::strategies::{HiderStrategy, SearcherStrategy};

pub const BATCH_SIZE: u64 = 4096;

/// Column names of [`McReport::csv_record`].
pub const CSV_HEADER: [&str; 13] = [
    "n", "d", "k", "variant", "reveal", "searcher", "hider", "trials", "wins", "estimate_num", "estimate_den", "stderr", "seed",
];

#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub config: GameConfig,
    pub searcher: String,
    pub hider: String,
    pub trials: u64,
    pub wins: u64,
    #[serde(with = "frac")]
    pub estimate: Rational,
    pub estimate_decimal: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Wins out of trials; merging is plain addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub wins: u64,
    pub trials: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally { wins: self.wins + other.wins, trials: self.trials + other.trials }
    }
}

impl McReport {
    pub fn from_tally(config: &GameConfig, searcher: &str, hider: &str, tally: Tally, seed: u64) -> Result<Self> {
        if tally.trials == 0 {
            return Err(Error::InvalidConfig("at least one trial is needed".into()));
        }
        if tally.wins > tally.trials {
            return Err(Error::Internal("more wins than trials".into()));
        }
        let estimate = ratio(tally.wins as i64, tally.trials as i64);
        let p = tally.wins as f64 / tally.trials as f64;
        Ok(McReport {
            config: *config,
            searcher: searcher.to_string(),
            hider: hider.to_string(),
            trials: tally.trials,
            wins: tally.wins,
            estimate_decimal: to_f64(&estimate),
            estimate,
            stderr: (p * (1.0 - p) / tally.trials as f64).sqrt(),
            seed,
        })
    }

    pub fn tally(&self) -> Tally {
        Tally { wins: self.wins, trials: self.trials }
    }

    /// Values in the order of [`CSV_HEADER`].
    pub fn csv_record(&self) -> Vec<String> {
        let c = &self.config;
        vec![
            c.n.to_string(),
            c.d.to_string(),
            c.k.to_string(),
            c.occupancy.to_string(),
            c.reveal.to_string(),
            self.searcher.clone(),
            self.hider.clone(),
            self.trials.to_string(),
            self.wins.to_string(),
            self.estimate.numer().to_string(),
            self.estimate.denom().to_string(),
            format!("{:.6e}", self.stderr),
            self.seed.to_string(),
        ]
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of batch `index` in a run seeded with `seed`.
pub fn batch_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Plays `trials` independent games. The reveal rule of `config` must be a
/// chance rule.
pub fn run_mc(config: &GameConfig, searcher: &dyn SearcherStrategy, hider: &HiderStrategy, trials: u64, seed: u64) -> Result<McReport> {
    let tally = run_batches(config, searcher, hider, trials, seed, true)?;
    McReport::from_tally(config, &searcher.name(), hider.name(), tally, seed)
}

/// [`run_mc`] on the current thread only.
pub fn run_mc_sequential(config: &GameConfig, searcher: &dyn SearcherStrategy, hider: &HiderStrategy, trials: u64, seed: u64) -> Result<McReport> {
    let tally = run_batches(config, searcher, hider, trials, seed, false)?;
    McReport::from_tally(config, &searcher.name(), hider.name(), tally, seed)
}

fn run_batches(config: &GameConfig, searcher: &dyn SearcherStrategy, hider: &HiderStrategy, trials: u64, seed: u64, parallel: bool) -> Result<Tally> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is needed".into()));
    }
    if config.reveal == RevealRule::Adversarial {
        return Err(Error::AdversarialRevealUnsupported(
            "simulation needs a chance reveal rule: uniform-doors, uniform-treasures or lowest-index".into(),
        ));
    }
    let h = hider.config();
    if (h.n, h.d, h.occupancy) != (config.n, config.d, config.occupancy) {
        return Err(Error::InvalidHider(format!("hider is for {h}, game is {config}")));
    }
    let batches: Vec<u64> = (0..trials.div_ceil(BATCH_SIZE)).collect();
    let run = |&b: &u64| -> Result<Tally> {
        let size = BATCH_SIZE.min(trials - b * BATCH_SIZE);
        let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(seed, b));
        let mut wins = 0;
        for _ in 0..size {
            if play_once(config, searcher, hider, &mut rng)? {
                wins += 1;
            }
        }
        Ok(Tally { wins, trials: size })
    };
    let tallies = if parallel { par::try_map(&batches, run)? } else { par::try_map_sequential(&batches, run)? };
    Ok(tallies.into_iter().fold(Tally::default(), Tally::merge))
}

fn play_once(config: &GameConfig, searcher: &dyn SearcherStrategy, hider: &HiderStrategy, rng: &mut ChaCha8Rng) -> Result<bool> {
    let allocation = hider.sample(rng);
    let mut state = initial_state(config, allocation)?;
    let mut history = History::new();
    loop {
        match state.status {
            Status::Won => return Ok(true),
            Status::Lost => return Ok(false),
            Status::Ongoing => {}
        }
        let guess = searcher.sample_guess(&history, rng)?;
        guess.check(config)?;
        let revealed = sample_reveal(&state, guess, config.reveal, rng)?;
        state = apply_guess(&state, guess, revealed)?;
        history.push(guess, revealed);
    }
}

/// Distance of an estimate from an exact value in standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub z_score: f64,
    pub pass: bool,
}

/// Passes when the estimate is within four standard errors. With a zero
/// standard error only an exact match passes.
pub fn compare_to_exact(mc: &McReport, exact: &Rational) -> Comparison {
    let diff = to_f64(&mc.estimate) - to_f64(exact);
    if mc.estimate == *exact {
        return Comparison { z_score: 0.0, pass: true };
    }
    if mc.stderr == 0.0 {
        return Comparison { z_score: diff.signum() * f64::INFINITY, pass: false };
    }
    let z = diff / mc.stderr;
    Comparison { z_score: z, pass: z.abs() <= 4.0 }
}
