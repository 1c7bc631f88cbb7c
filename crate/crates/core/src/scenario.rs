//! Random perturbations of the identity ranking and the nine simulation
//! scenarios built from them.
//!
//! Positions in this module are 0-based. A transformation starts from the
//! identity `(1, ..., n)` and swaps entries of the rank vector.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrdError};
use crate::ranking::Ranking;
use crate::rng::{derive_seed, seeded_rng};
use crate::srd::max_distance_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "x", rename_all = "snake_case")]
pub enum Transformation {
    /// `x` uniformly random adjacent swaps anywhere.
    Inversions(usize),
    /// `x` adjacent swaps inside the top `floor(n/2)` positions.
    TopInversions(usize),
    /// `x` adjacent swaps inside the bottom `n - floor(n/2)` positions.
    BottomInversions(usize),
    /// The first entry swapped with a uniform position of the bottom `ceil(n/2)`.
    Underdog,
    /// Four swaps between positions `s` and `s + ceil(n/4)`.
    MidSwaps,
}

pub const MID_SWAP_COUNT: usize = 4;

impl Transformation {
    /// Short label: `64`, `16t`, `16b`, `1u`, `4m`.
    pub fn label(&self) -> String {
        match self {
            Transformation::Inversions(x) => x.to_string(),
            Transformation::TopInversions(x) => format!("{x}t"),
            Transformation::BottomInversions(x) => format!("{x}b"),
            Transformation::Underdog => "1u".into(),
            Transformation::MidSwaps => format!("{MID_SWAP_COUNT}m"),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Transformation::Inversions(_) => "inversions",
            Transformation::TopInversions(_) => "top_inversions",
            Transformation::BottomInversions(_) => "bottom_inversions",
            Transformation::Underdog => "underdog",
            Transformation::MidSwaps => "mid_swaps",
        }
    }

    /// Smallest `n` the transformation can act on.
    pub fn min_size(&self) -> usize {
        match self {
            Transformation::Inversions(_) => 2,
            // the top window needs two positions
            Transformation::TopInversions(x) if *x > 0 => 4,
            Transformation::BottomInversions(x) if *x > 0 => 3,
            Transformation::TopInversions(_) | Transformation::BottomInversions(_) => 2,
            Transformation::Underdog | Transformation::MidSwaps => 4,
        }
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Applies `t` to the identity ranking of size `n`.
pub fn apply_transformation<R: Rng + ?Sized>(t: Transformation, n: usize, rng: &mut R) -> Result<Ranking> {
    let min = t.min_size();
    if n < min {
        return Err(SrdError::SizeTooSmall { transformation: t.name().into(), n, min });
    }
    let mut ranking = Ranking::identity(n)?;
    perturb(&mut ranking, t, rng);
    Ok(ranking)
}

/// `(first, end, swaps)` of the adjacent-swap window.
fn adjacent_window(t: Transformation, n: usize) -> (usize, usize, usize) {
    let half = n / 2;
    match t {
        Transformation::Inversions(x) => (0, n, x),
        Transformation::TopInversions(x) => (0, half, x),
        Transformation::BottomInversions(x) => (half, n, x),
        _ => unreachable!(),
    }
}

fn perturb<R: Rng + ?Sized>(ranking: &mut Ranking, t: Transformation, rng: &mut R) {
    let n = ranking.len();
    match t {
        Transformation::Inversions(_) | Transformation::TopInversions(_) | Transformation::BottomInversions(_) => {
            let (lo, hi, x) = adjacent_window(t, n);
            for _ in 0..x {
                let i = rng.random_range(lo..hi - 1);
                ranking.swap(i, i + 1);
            }
        }
        Transformation::Underdog => {
            let p = rng.random_range(n - n.div_ceil(2)..n);
            ranking.swap(0, p);
        }
        Transformation::MidSwaps => {
            let offset = n.div_ceil(4);
            for _ in 0..MID_SWAP_COUNT {
                let s = rng.random_range(0..n - offset);
                ranking.swap(s, s + offset);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioType {
    /// Both rankings come from the same distribution.
    I,
    /// The rankings come from different distributions.
    II,
}

impl ScenarioType {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioType::I => "I",
            ScenarioType::II => "II",
        }
    }
}

impl fmt::Display for ScenarioType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ScenarioType {
    type Err = SrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "1" => Ok(ScenarioType::I),
            "II" | "2" => Ok(ScenarioType::II),
            other => Err(SrdError::MalformedTable(format!("unknown scenario type {other:?}"))),
        }
    }
}

/// How the two rankings of a scenario are produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "draw", rename_all = "snake_case")]
pub enum PairDraw {
    Fixed {
        a: Transformation,
        b: Transformation,
    },
    /// One transformation drawn from `choices`, applied independently to both.
    RandomSame {
        choices: Vec<Transformation>,
    },
    /// Two distinct transformations drawn from `choices`.
    RandomDistinct {
        choices: Vec<Transformation>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u8,
    pub label: String,
    pub n: usize,
    #[serde(rename = "type")]
    pub kind: ScenarioType,
    pub draw: PairDraw,
}

/// Inversion counts for the `x|4m` scenario at the sizes with published tables.
pub fn tabulated_mid_swap_x(n: usize) -> Option<usize> {
    match n {
        32 => Some(88),
        13 => Some(41),
        7 => Some(14),
        _ => None,
    }
}

/// Seed used by [`scenario_catalog`] when `x` must be calibrated.
pub const CATALOG_CALIBRATION_SEED: u64 = 0x5eed_ca11;
pub const CATALOG_CALIBRATION_SAMPLES: usize = 20_000;

/// The nine scenarios for size `n`.
pub fn scenario_catalog(n: usize) -> Result<Vec<Scenario>> {
    let x = match tabulated_mid_swap_x(n) {
        Some(x) => x,
        None if n >= 8 => calibrate_x(n, &mut seeded_rng(CATALOG_CALIBRATION_SEED), CATALOG_CALIBRATION_SAMPLES)?,
        None => return Err(SrdError::UnsupportedSize { n }),
    };
    catalog_with_x(n, x)
}

/// The nine scenarios with an explicit `x` for the `x|4m` scenario.
pub fn catalog_with_x(n: usize, x: usize) -> Result<Vec<Scenario>> {
    if n < 7 {
        return Err(SrdError::UnsupportedSize { n });
    }
    use Transformation::*;
    let h = n.div_ceil(2);
    let choices = vec![Inversions(2 * n), Inversions(n), TopInversions(h), BottomInversions(h), Underdog, MidSwaps];
    let fixed = |id: u8, a: Transformation, b: Transformation, kind| Scenario {
        id,
        label: format!("{}|{}", a.label(), b.label()),
        n,
        kind,
        draw: PairDraw::Fixed { a, b },
    };
    Ok(vec![
        fixed(1, Inversions(2 * n), Inversions(2 * n), ScenarioType::I),
        fixed(2, Inversions(n), Inversions(n), ScenarioType::I),
        Scenario {
            id: 3,
            label: "RT I".into(),
            n,
            kind: ScenarioType::I,
            draw: PairDraw::RandomSame { choices: choices.clone() },
        },
        fixed(4, Inversions(2 * n), Inversions(h), ScenarioType::II),
        fixed(5, Inversions(n), Inversions(h), ScenarioType::II),
        fixed(6, TopInversions(h), BottomInversions(h), ScenarioType::II),
        fixed(7, Inversions(2 * n), Underdog, ScenarioType::II),
        fixed(8, Inversions(x), MidSwaps, ScenarioType::II),
        Scenario {
            id: 9,
            label: "RT II".into(),
            n,
            kind: ScenarioType::II,
            draw: PairDraw::RandomDistinct { choices },
        },
    ])
}

/// Draws the rankings A and B of one scenario run.
pub fn sample_scenario_pair<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<(Ranking, Ranking)> {
    let (ta, tb) = match &s.draw {
        PairDraw::Fixed { a, b } => (*a, *b),
        PairDraw::RandomSame { choices } => {
            let t = *choices.choose(rng).ok_or_else(|| SrdError::InvalidPlan("empty transformation set".into()))?;
            (t, t)
        }
        PairDraw::RandomDistinct { choices } => {
            if choices.len() < 2 {
                return Err(SrdError::InvalidPlan("need two transformations to draw distinct ones".into()));
            }
            let i = rng.random_range(0..choices.len());
            let mut j = rng.random_range(0..choices.len() - 1);
            if j >= i {
                j += 1;
            }
            (choices[i], choices[j])
        }
    };
    Ok((apply_transformation(ta, s.n, rng)?, apply_transformation(tb, s.n, rng)?))
}

/// Smallest `x` for which the mean raw distance after `x` random inversions
/// reaches the mean distance produced by [`Transformation::MidSwaps`], both
/// estimated from `samples` draws.
pub fn calibrate_x<R: Rng + ?Sized>(n: usize, rng: &mut R, samples: usize) -> Result<usize> {
    if n < 4 {
        return Err(SrdError::SizeTooSmall { transformation: "mid_swaps".into(), n, min: 4 });
    }
    let samples = samples.max(1);
    let mut target = 0u64;
    for _ in 0..samples {
        target += raw_distance(&apply_transformation(Transformation::MidSwaps, n, rng)?);
    }

    // run all inversion chains in lockstep, updating the distance per swap
    let mut chains: Vec<Vec<u32>> = vec![(1..=n as u32).collect(); samples];
    let mut total = 0u64;
    let mut x = 0;
    // the mean distance approaches that of a uniform ranking, which exceeds any mid-swap mean
    let cap = 64 * n * n;
    while total < target && x < cap {
        x += 1;
        for chain in &mut chains {
            let i = rng.random_range(0..n - 1);
            let before = pos_cost(chain, i) + pos_cost(chain, i + 1);
            chain.swap(i, i + 1);
            let after = pos_cost(chain, i) + pos_cost(chain, i + 1);
            total = total + after - before;
        }
    }
    Ok(x)
}

fn pos_cost(ranks: &[u32], i: usize) -> u64 {
    u64::from(ranks[i].abs_diff(i as u32 + 1))
}

fn raw_distance(r: &Ranking) -> u64 {
    r.doubled_ranks().iter().enumerate().map(|(i, &d)| u64::from(d.abs_diff(2 * (i as u32 + 1)))).sum::<u64>() / 2
}

/// Normalized SRD from the identity for `samples` independent draws of `t`.
pub fn transformation_distances(t: Transformation, n: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let max = max_distance_unchecked(n) as f64;
    (0..samples as u64)
        .map(|i| {
            let r = apply_transformation(t, n, &mut seeded_rng(derive_seed(seed, &[i])))?;
            Ok(raw_distance(&r) as f64 / max)
        })
        .collect()
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// JSON manifest of a catalog.
pub fn manifest_json(catalog: &[Scenario]) -> String {
    serde_json::to_string_pretty(catalog).expect("scenarios serialize")
}

/// CSV manifest: `id,label,n,type,draw,a,b`, with the transformation set for random scenarios.
pub fn manifest_csv(catalog: &[Scenario]) -> String {
    let mut out = String::from("id,label,n,type,draw,a,b\n");
    for s in catalog {
        let (draw, a, b) = match &s.draw {
            PairDraw::Fixed { a, b } => ("fixed", a.label(), b.label()),
            PairDraw::RandomSame { choices } => ("random_same", join_labels(choices), join_labels(choices)),
            PairDraw::RandomDistinct { choices } => ("random_distinct", join_labels(choices), join_labels(choices)),
        };
        out.push_str(&format!("{},{},{},{},{},{},{}\n", s.id, s.label, s.n, s.kind, draw, a, b));
    }
    out
}

fn join_labels(ts: &[Transformation]) -> String {
    ts.iter().map(Transformation::label).collect::<Vec<_>>().join(" ")
}
