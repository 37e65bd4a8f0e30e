//! Shot-level Monte Carlo of the detection layer: each shot picks an unknown
//! plate-A thickness, then one coincidence cell from the exact Born
//! probabilities. Counts from all thicknesses are pooled, as the observer
//! never learns which plate was used.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gppt::{global_state, DelaySetting};
use crate::paw::{evolve_global, singlet_ket, ClockParams, PawState};
use crate::qcore::{project_and_renorm, waveplate_unitary, Ket, Operator, Tensor, NULL_PROB};
use crate::rng;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("n_shots must be at least 1")]
    NoShots,
    #[error("plate_A list is empty")]
    EmptyPlateList,
    #[error("non-finite plate phase {0}")]
    NonFinite(f64),
}

/// Which detection layout is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Singlet through identical plates on both arms, one time reading.
    PawObserver,
    /// Two-time layout starting from the state kept by the first splitter.
    Gppt,
    /// Two-time layout starting from the singlet; shots where the first
    /// splitter sends the clock photon down its V path are discarded.
    GpptWithPbs1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateSource {
    /// Uniform draw from a finite list of plate phases.
    List(Vec<f64>),
    /// Uniform phase on `[0, 2π)`.
    ContinuousUniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotConfig {
    pub n_shots: u64,
    pub seed: u64,
    pub mode: Mode,
    pub plates: PlateSource,
    /// Clock delay phase; ignored in [`Mode::PawObserver`].
    pub delta_b: f64,
}

impl ShotConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.n_shots == 0 {
            return Err(McError::NoShots);
        }
        if let PlateSource::List(list) = &self.plates {
            if list.is_empty() {
                return Err(McError::EmptyPlateList);
            }
            if let Some(&bad) = list.iter().find(|x| !x.is_finite()) {
                return Err(McError::NonFinite(bad));
            }
        }
        if !self.delta_b.is_finite() {
            return Err(McError::NonFinite(self.delta_b));
        }
        Ok(())
    }
}

/// Coincidence cells in sampling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    C31,
    C32,
    C41,
    C42,
    Discard,
}

impl Cell {
    pub const ALL: [Cell; 5] = [Cell::C31, Cell::C32, Cell::C41, Cell::C42, Cell::Discard];
}

/// Probabilities over `(3,1), (3,2), (4,1), (4,2), discard`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution(pub [f64; 5]);

impl OutcomeDistribution {
    pub fn get(&self, cell: Cell) -> f64 {
        self.0[cell as usize]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Basis order `[HH, HV, VH, VV]` onto detector cells, scaled by `weight`.
    fn from_ket(psi: &Ket, weight: f64, discard: f64) -> Self {
        let p = |i: usize| {
            let v = weight * psi.amplitude(i).norm_sqr();
            if v < NULL_PROB {
                0.0
            } else {
                v
            }
        };
        Self([p(1), p(3), p(0), p(2), discard])
    }

    fn pick(&self, u: f64) -> Cell {
        let mut cum = 0.0;
        let mut last = Cell::Discard;
        for cell in Cell::ALL {
            let p = self.get(cell);
            if p <= 0.0 {
                continue;
            }
            cum += p;
            last = cell;
            if u < cum {
                return cell;
            }
        }
        last
    }
}

pub fn outcome_distribution(mode: Mode, plate_a: f64, delta_b: f64) -> OutcomeDistribution {
    match mode {
        Mode::PawObserver => {
            let u = waveplate_unitary(plate_a);
            let psi = u
                .tensor(&u)
                .and_then(|u| u.apply(&singlet_ket()))
                .expect("dim 4");
            OutcomeDistribution::from_ket(&psi, 1.0, 0.0)
        }
        Mode::Gppt => {
            let psi = global_state(1.0, plate_a, DelaySetting::from_phase(delta_b));
            OutcomeDistribution::from_ket(&psi, 1.0, 0.0)
        }
        Mode::GpptWithPbs1 => {
            let keep_h = Operator::projector(&Ket::h())
                .and_then(|p| p.tensor(&Operator::identity(2)?))
                .expect("dim 2");
            let kept = project_and_renorm(&keep_h, &singlet_ket()).expect("projector");
            let weight = kept.probability();
            match kept.ket() {
                Some(initial) => {
                    let state =
                        PawState::new(initial.clone(), ClockParams::default()).expect("normalized");
                    let psi = evolve_global(&state, plate_a, delta_b);
                    OutcomeDistribution::from_ket(&psi, weight, 1.0 - weight)
                }
                None => OutcomeDistribution([0.0, 0.0, 0.0, 0.0, 1.0]),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoincidenceTable {
    pub n31: u64,
    pub n32: u64,
    pub n41: u64,
    pub n42: u64,
    pub discarded: u64,
    pub n_shots: u64,
    pub seed: u64,
}

impl CoincidenceTable {
    pub fn count(&self, cell: Cell) -> u64 {
        match cell {
            Cell::C31 => self.n31,
            Cell::C32 => self.n32,
            Cell::C41 => self.n41,
            Cell::C42 => self.n42,
            Cell::Discard => self.discarded,
        }
    }

    fn record(&mut self, cell: Cell) {
        match cell {
            Cell::C31 => self.n31 += 1,
            Cell::C32 => self.n32 += 1,
            Cell::C41 => self.n41 += 1,
            Cell::C42 => self.n42 += 1,
            Cell::Discard => self.discarded += 1,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.n31 += other.n31;
        self.n32 += other.n32;
        self.n41 += other.n41;
        self.n42 += other.n42;
        self.discarded += other.discarded;
        self
    }
}

/// Shot `i` draws from stream `(seed, i)`: first the plate, then the cell.
pub fn sample_shots(config: &ShotConfig) -> Result<CoincidenceTable, McError> {
    config.validate()?;
    let listed: Option<Vec<OutcomeDistribution>> = match &config.plates {
        PlateSource::List(list) => Some(
            list.iter()
                .map(|&a| outcome_distribution(config.mode, a, config.delta_b))
                .collect(),
        ),
        PlateSource::ContinuousUniform => None,
    };
    let base = rng::stream(config.seed, 0);
    let n_chunks = config.n_shots.div_ceil(CHUNK);
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut local = CoincidenceTable::default();
            let end = ((chunk + 1) * CHUNK).min(config.n_shots);
            for shot in chunk * CHUNK..end {
                let mut r = base.clone();
                r.set_stream(shot);
                let dist = match &listed {
                    Some(d) => d[r.random_range(0..d.len())],
                    None => {
                        outcome_distribution(config.mode, TAU * r.random::<f64>(), config.delta_b)
                    }
                };
                local.record(dist.pick(r.random::<f64>()));
            }
            local
        })
        .reduce(CoincidenceTable::default, CoincidenceTable::merge);
    Ok(CoincidenceTable {
        n_shots: config.n_shots,
        seed: config.seed,
        ..counts
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedConditional {
    pub p_hat: f64,
    /// Binomial standard error `sqrt(p̂(1 − p̂)/n)`.
    pub stderr: f64,
    pub numerator: u64,
    pub denominator: u64,
}

impl EstimatedConditional {
    pub fn new(numerator: u64, denominator: u64) -> Option<Self> {
        if denominator == 0 {
            return None;
        }
        let p_hat = numerator as f64 / denominator as f64;
        let stderr = (p_hat * (1.0 - p_hat) / denominator as f64).sqrt();
        Some(Self {
            p_hat,
            stderr,
            numerator,
            denominator,
        })
    }

    /// `|p̂ − p|` in standard errors. A zero standard error only admits an
    /// exact match.
    pub fn sigmas_from(&self, p: f64) -> f64 {
        let diff = (self.p_hat - p).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// `P̂_{j|k}`; `None` when clock column `k` is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimates {
    pub p3g1: Option<EstimatedConditional>,
    pub p3g2: Option<EstimatedConditional>,
    pub p4g1: Option<EstimatedConditional>,
    pub p4g2: Option<EstimatedConditional>,
}

pub fn estimate_conditionals(table: &CoincidenceTable) -> ConditionalEstimates {
    let col1 = table.n31 + table.n41;
    let col2 = table.n32 + table.n42;
    ConditionalEstimates {
        p3g1: EstimatedConditional::new(table.n31, col1),
        p3g2: EstimatedConditional::new(table.n32, col2),
        p4g1: EstimatedConditional::new(table.n41, col1),
        p4g2: EstimatedConditional::new(table.n42, col2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::EXACT_TOL;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn equispaced(n: usize) -> Vec<f64> {
        (0..n).map(|i| TAU * i as f64 / n as f64).collect()
    }

    #[test]
    fn paw_observer_distribution() {
        for a in equispaced(15) {
            let d = outcome_distribution(Mode::PawObserver, a, 0.0);
            assert!((d.total() - 1.0).abs() < EXACT_TOL);
            assert!((d.get(Cell::C31) - 0.5).abs() < EXACT_TOL);
            assert!((d.get(Cell::C42) - 0.5).abs() < EXACT_TOL);
            assert_eq!(d.get(Cell::C32), 0.0);
            assert_eq!(d.get(Cell::C41), 0.0);
        }
    }

    #[test]
    fn gppt_distribution() {
        let d = outcome_distribution(Mode::Gppt, 0.0, 0.0);
        assert_eq!(d.0, [1.0, 0.0, 0.0, 0.0, 0.0]);
        let d = outcome_distribution(Mode::Gppt, FRAC_PI_4, 0.0);
        for cell in [Cell::C31, Cell::C32, Cell::C41, Cell::C42] {
            assert!((d.get(cell) - 0.25).abs() < EXACT_TOL);
        }
        assert_eq!(d.get(Cell::Discard), 0.0);
        let d = outcome_distribution(Mode::GpptWithPbs1, 0.3, 1.1);
        assert!((d.total() - 1.0).abs() < EXACT_TOL);
        assert!((d.get(Cell::Discard) - 0.5).abs() < EXACT_TOL);
    }

    #[test]
    fn single_shot_lands_in_one_cell() {
        let cfg = ShotConfig {
            n_shots: 1,
            seed: 42,
            mode: Mode::Gppt,
            plates: PlateSource::List(vec![0.3]),
            delta_b: 0.2,
        };
        let t = sample_shots(&cfg).unwrap();
        let total: u64 = Cell::ALL.iter().map(|&c| t.count(c)).sum();
        assert_eq!(total, 1);
        assert_eq!(sample_shots(&cfg).unwrap(), t);
    }

    #[test]
    fn config_errors() {
        let mut cfg = ShotConfig {
            n_shots: 0,
            seed: 1,
            mode: Mode::PawObserver,
            plates: PlateSource::List(vec![0.0]),
            delta_b: 0.0,
        };
        assert_eq!(sample_shots(&cfg).unwrap_err(), McError::NoShots);
        cfg.n_shots = 10;
        cfg.plates = PlateSource::List(vec![]);
        assert_eq!(sample_shots(&cfg).unwrap_err(), McError::EmptyPlateList);
    }

    #[test]
    fn paw_observer_zero_cells_stay_empty() {
        let cfg = ShotConfig {
            n_shots: 100_000,
            seed: 9,
            mode: Mode::PawObserver,
            plates: PlateSource::List(equispaced(15)),
            delta_b: 0.0,
        };
        let t = sample_shots(&cfg).unwrap();
        assert_eq!(t.n32 + t.n41, 0);
        let est = estimate_conditionals(&t);
        assert_eq!(est.p3g1.unwrap().p_hat, 1.0);
        assert_eq!(est.p4g2.unwrap().p_hat, 1.0);
    }

    #[test]
    fn gppt_estimate_near_three_quarters() {
        let cfg = ShotConfig {
            n_shots: 100_000,
            seed: 2024,
            mode: Mode::Gppt,
            plates: PlateSource::List(equispaced(64)),
            delta_b: 0.0,
        };
        let est = estimate_conditionals(&sample_shots(&cfg).unwrap());
        assert!(est.p3g1.unwrap().sigmas_from(0.75) < 4.0);
        assert!(est.p3g2.unwrap().sigmas_from(0.25) < 4.0);
    }

    #[test]
    fn continuous_plates_converge() {
        let cfg = ShotConfig {
            n_shots: 200_000,
            seed: 5,
            mode: Mode::GpptWithPbs1,
            plates: PlateSource::ContinuousUniform,
            delta_b: PI / 3.0,
        };
        let t = sample_shots(&cfg).unwrap();
        let est = estimate_conditionals(&t);
        let want = (1.0 + 2.0 * (PI / 3.0).cos().powi(2)) / 4.0;
        assert!(est.p3g1.unwrap().sigmas_from(want) < 5.0);
        let frac = t.discarded as f64 / t.n_shots as f64;
        assert!((frac - 0.5).abs() < 5.0 * (0.25 / t.n_shots as f64).sqrt());
    }

    #[test]
    fn estimates_arithmetic() {
        let t = CoincidenceTable {
            n31: 75,
            n41: 25,
            ..Default::default()
        };
        let est = estimate_conditionals(&t);
        let p = est.p3g1.unwrap();
        assert_eq!(p.p_hat, 0.75);
        assert!((p.stderr - (0.75f64 * 0.25 / 100.0).sqrt()).abs() < 1e-15);
        assert!((p.stderr - 0.0433).abs() < 1e-4);
        assert_eq!(est.p3g1.unwrap().p_hat + est.p4g1.unwrap().p_hat, 1.0);
        assert!(est.p3g2.is_none() && est.p4g2.is_none());
    }
}
