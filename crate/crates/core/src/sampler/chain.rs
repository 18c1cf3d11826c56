use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::body::Body;
use super::{chain_rng, ChainConfig, ChainRng, Direction};
use crate::error::{Error, Result};
use crate::metric::{csv_header, MetricVector};

/// Retained states of one or more hit-and-run chains.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    config: ChainConfig,
    dim: usize,
    data: Vec<f64>,
    chain_lengths: Vec<usize>,
    diagnostics: ChainDiagnostics,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ChainDiagnostics {
    pub chains: usize,
    /// Total transitions, burn-in included. A coordinate sweep counts once.
    pub steps: u64,
    /// Transitions whose chord had zero length, so the state did not move.
    pub stalled_steps: u64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl SampleBatch {
    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn sample(&self, i: usize) -> MetricVector {
        MetricVector::new(self.config.n, self.row(i).to_vec()).expect("chain states are well-formed")
    }

    /// Number of retained samples contributed by each chain, in chain order.
    pub fn chain_lengths(&self) -> &[usize] {
        &self.chain_lengths
    }

    pub fn diagnostics(&self) -> &ChainDiagnostics {
        &self.diagnostics
    }

    /// Header plus one row per sample, in chain order.
    pub fn to_csv(&self) -> String {
        let mut out = csv_header(self.config.n).expect("n >= 2");
        out.push('\n');
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

struct Chain<'a> {
    body: &'a Body,
    state: Vec<f64>,
    dir: Vec<f64>,
    rng: ChainRng,
    direction: Direction,
    steps: u64,
    stalled: u64,
}

impl<'a> Chain<'a> {
    fn new(body: &'a Body, start: Vec<f64>, rng: ChainRng, direction: Direction) -> Self {
        let dim = start.len();
        Chain {
            body,
            state: start,
            dir: vec![0.0; dim],
            rng,
            direction,
            steps: 0,
            stalled: 0,
        }
    }

    fn step(&mut self) {
        self.steps += 1;
        match self.direction {
            Direction::Sphere => {
                // The chord is parametrized by t, so the Gaussian direction
                // need not be normalized.
                for u in self.dir.iter_mut() {
                    *u = self.rng.sample(StandardNormal);
                }
                let (lo, hi) = self.body.chord_unchecked(&self.state, &self.dir);
                if hi <= lo {
                    self.stalled += 1;
                    return;
                }
                let t = lo + (hi - lo) * self.rng.random::<f64>();
                for (x, u) in self.state.iter_mut().zip(&self.dir) {
                    *x += t * u;
                }
            }
            Direction::CoordinateSweep => {
                for e in 0..self.state.len() {
                    let (lo, hi) = self.body.coordinate_range(&self.state, e);
                    if hi <= lo {
                        self.stalled += 1;
                        continue;
                    }
                    self.state[e] = lo + (hi - lo) * self.rng.random::<f64>();
                }
            }
        }
    }
}

/// The chain's starting state: the box center, or failing that the constant
/// vector `max(low, 1.5)` clamped to the box. Must be strictly inside.
pub fn start_state(body: &Body) -> Result<Vec<f64>> {
    let dim = body.dim();
    let center = 0.5 * (body.low() + body.high());
    let fallback = body.low().max(1.5).min(body.high());
    for v in [center, fallback] {
        let x = vec![v; dim];
        let strictly = v > body.low() && v < body.high() && (body.triangles().is_empty() || v > 0.0);
        if strictly && body.contains(&x, 0.0) {
            return Ok(x);
        }
    }
    Err(Error::Degenerate(format!(
        "no strictly interior start in box [{}, {}]",
        body.low(),
        body.high()
    )))
}

fn run_chain(body: &Body, config: &ChainConfig, chain: usize, count: usize) -> Result<(Vec<f64>, u64, u64)> {
    let start = start_state(body)?;
    let rng = chain_rng(config.seed, chain as u64);
    let mut ch = Chain::new(body, start, rng, config.direction);
    for _ in 0..config.burn_in {
        ch.step();
    }
    let mut out = Vec::with_capacity(count * body.dim());
    for _ in 0..count {
        for _ in 0..config.thinning {
            ch.step();
        }
        out.extend_from_slice(&ch.state);
    }
    Ok((out, ch.steps, ch.stalled))
}

/// Runs one chain and retains `count` states.
pub fn hit_and_run(config: &ChainConfig, count: usize) -> Result<SampleBatch> {
    hit_and_run_chains(config, count, 1, None)
}

/// Runs `chains` independent chains on streams `0..chains` of the configured
/// seed and concatenates their retained states in chain order. `count` is
/// split as evenly as possible, earlier chains taking the remainder. The
/// result does not depend on `workers`.
pub fn hit_and_run_chains(
    config: &ChainConfig,
    count: usize,
    chains: usize,
    workers: Option<usize>,
) -> Result<SampleBatch> {
    config.validate()?;
    if chains == 0 {
        return Err(Error::arg("need at least one chain"));
    }
    let body = Body::new(config.n, config.box_low, config.box_high)?;
    let share = |c: usize| count / chains + usize::from(c < count % chains);

    let run = || -> Result<Vec<(Vec<f64>, u64, u64)>> {
        (0..chains)
            .into_par_iter()
            .map(|c| run_chain(&body, config, c, share(c)))
            .collect()
    };
    let parts = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::arg(format!("cannot build worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let dim = body.dim();
    let mut data = Vec::with_capacity(count * dim);
    let mut chain_lengths = Vec::with_capacity(chains);
    let mut diagnostics = ChainDiagnostics {
        chains,
        ..Default::default()
    };
    for (rows, steps, stalled) in parts {
        chain_lengths.push(rows.len() / dim);
        diagnostics.steps += steps;
        diagnostics.stalled_steps += stalled;
        data.extend(rows);
    }
    let (mean, variance) = coordinate_moments(&data, dim);
    diagnostics.mean = mean;
    diagnostics.variance = variance;
    Ok(SampleBatch {
        config: config.clone(),
        dim,
        data,
        chain_lengths,
        diagnostics,
    })
}

/// Per-coordinate mean and (population) variance by Welford's recurrence.
fn coordinate_moments(data: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mean = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut k = 0.0;
    for row in data.chunks_exact(dim) {
        k += 1.0;
        for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(row) {
            let delta = x - *m;
            *m += delta / k;
            *s += delta * (x - *m);
        }
    }
    let var = if k > 0.0 { m2.iter().map(|s| s / k).collect() } else { m2 };
    (mean, var)
}
