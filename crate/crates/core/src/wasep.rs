//! Continuous-time simulation of the weakly asymmetric simple exclusion
//! process from step initial data, and the Hopf-Cole observable
//! `F_ε(T, X) + T/4!` whose law converges to `F_T`.
//!
//! Particles start on `{1, 2, …}`. Only the sites `1..=W` are simulated;
//! the particles beyond `W` cannot move as long as site `W` stays occupied,
//! so any attempt by the particle at `W` to leave is reported as a window
//! error rather than approximated.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Scaling parameters for one simulation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WasepParams {
    pub epsilon: f64,
    /// Macroscopic time `T`.
    pub t: f64,
    /// Macroscopic position `X`.
    pub x: f64,
}

impl WasepParams {
    pub fn new(epsilon: f64, t: f64, x: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.25) {
            return Err(invalid(format!("epsilon must lie in (0, 1/4), got {epsilon}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("T must be positive and finite, got {t}")));
        }
        if !x.is_finite() {
            return Err(invalid("X must be finite"));
        }
        Ok(Self { epsilon, t, x })
    }

    /// Right-jump probability `p = 1/2 − ε^{1/2}/2`.
    pub fn p(&self) -> f64 {
        0.5 - 0.5 * self.epsilon.sqrt()
    }

    /// Left-jump probability `q = 1/2 + ε^{1/2}/2`.
    pub fn q(&self) -> f64 {
        0.5 + 0.5 * self.epsilon.sqrt()
    }

    pub fn gamma(&self) -> f64 {
        self.epsilon.sqrt()
    }

    /// `ν_ε = p + q − 2√(qp)`.
    pub fn nu(&self) -> f64 {
        let (p, q) = (self.p(), self.q());
        p + q - 2.0 * (q * p).sqrt()
    }

    /// `λ_ε = log(q/p) / 2`.
    pub fn lambda(&self) -> f64 {
        0.5 * (self.q() / self.p()).ln()
    }

    /// Microscopic horizon `ε^{−2} T`.
    pub fn t_micro(&self) -> f64 {
        self.t / (self.epsilon * self.epsilon)
    }

    /// Lattice site `[ε^{−1} X] = ⌊ε^{−1} X + 1/2⌋`.
    pub fn site(&self) -> i64 {
        (self.x / self.epsilon + 0.5).floor() as i64
    }

    /// `W = |x| + ⌈t⌉ + ⌈10 √t⌉` with `t` the microscopic horizon.
    pub fn window(&self) -> i64 {
        let t = self.t_micro();
        self.site().abs() + t.ceil() as i64 + (10.0 * t.sqrt()).ceil() as i64
    }
}

/// Configuration of the simulated window `[−W, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WasepState {
    /// Particle positions in increasing order; index `i` is the particle that
    /// started at `i + 1` (exclusion preserves order).
    positions: Vec<i64>,
    w: i64,
    /// Net number of jumps from site 1 to site 0.
    crossings: i64,
    time: f64,
}

impl WasepState {
    /// Step initial data on the window `[−w, w]`.
    pub fn step(w: i64) -> Result<Self> {
        if w < 1 {
            return Err(invalid("window half-width must be at least 1"));
        }
        Ok(Self {
            positions: (1..=w).collect(),
            w,
            crossings: 0,
            time: 0.0,
        })
    }

    pub fn window(&self) -> i64 {
        self.w
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn crossings(&self) -> i64 {
        self.crossings
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// `η(x)`, counting the frozen particles beyond the window as present.
    pub fn occupied(&self, x: i64) -> bool {
        x > self.w || self.positions.binary_search(&x).is_ok()
    }

    /// Number of particles in `(a, b]` (`a ≤ b`).
    fn count_in(&self, a: i64, b: i64) -> i64 {
        let lo = self.positions.partition_point(|&p| p <= a);
        let hi = self.positions.partition_point(|&p| p <= b);
        (hi - lo) as i64
    }

    /// Height function `h(t, x)`:
    /// `2N + Σ_{0<y≤x} η̂(y)` for `x > 0` and `2N − Σ_{x<y≤0} η̂(y)` for
    /// `x < 0`, with `η̂ = 2η − 1`.
    pub fn height(&self, x: i64) -> Result<i64> {
        if x.abs() > self.w {
            return Err(invalid(format!("site {x} outside the window")));
        }
        let n2 = 2 * self.crossings;
        Ok(if x > 0 {
            n2 + 2 * self.count_in(0, x) - x
        } else if x == 0 {
            n2
        } else {
            n2 - (2 * self.count_in(x, 0) - (-x))
        })
    }

    /// Position of the particle that started at `m ≥ 1`.
    pub fn particle(&self, m: i64) -> Option<i64> {
        if m < 1 {
            return None;
        }
        match self.positions.get((m - 1) as usize) {
            Some(&p) => Some(p),
            // frozen particles beyond the window
            None => Some(m),
        }
    }

    /// Advances to microscopic time `horizon`. Particle clocks ring at rate
    /// one each; a ringing particle tries to jump right with probability `p`
    /// and left with probability `q`, and the attempt is suppressed if the
    /// target is occupied.
    pub fn run<R: Rng>(&mut self, horizon: f64, p: f64, rng: &mut R) -> Result<()> {
        let n = self.positions.len();
        let rate = n as f64;
        loop {
            let u: f64 = rng.gen();
            let dt = -(1.0 - u).ln() / rate;
            if self.time + dt > horizon {
                self.time = horizon;
                return Ok(());
            }
            self.time += dt;
            let i = rng.gen_range(0..n);
            let right = rng.gen::<f64>() < p;
            let x = self.positions[i];
            if right {
                // the last simulated particle faces the frozen ones
                if i + 1 == n || self.positions[i + 1] == x + 1 {
                    continue;
                }
                self.positions[i] = x + 1;
                if x == 0 {
                    self.crossings -= 1;
                }
            } else {
                if i > 0 && self.positions[i - 1] == x - 1 {
                    continue;
                }
                if i + 1 == n || x - 1 <= -self.w {
                    return Err(Error::WindowTooSmall {
                        site: x - 1,
                        w: self.w,
                    });
                }
                self.positions[i] = x - 1;
                if x == 1 {
                    self.crossings += 1;
                }
            }
        }
    }
}

/// `h_γ(ε^{−2}T, [ε^{−1}X])` for one replica.
pub fn simulate_height(params: &WasepParams, seed: u64) -> Result<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = WasepState::step(params.window())?;
    state.run(params.t_micro(), params.p(), &mut rng)?;
    state.height(params.site())
}

/// `F_ε(T, X) = log(ε^{−1/2}/2) − λ_ε h + ν_ε ε^{−2} T + X²/(2T) + log √(2πT)`.
pub fn hopf_cole_value(h: i64, params: &WasepParams) -> f64 {
    let e = params.epsilon;
    (0.5 / e.sqrt()).ln() - params.lambda() * h as f64
        + params.nu() * params.t_micro()
        + params.x * params.x / (2.0 * params.t)
        + (2.0 * std::f64::consts::PI * params.t).sqrt().ln()
}

/// Seed of replica `i`: a splitmix64 hash of `(base_seed, i)`.
pub fn replica_seed(base_seed: u64, i: u64) -> u64 {
    let mut z = base_seed ^ i.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One replica of the sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replica {
    pub index: u64,
    pub seed: u64,
    pub h: i64,
    /// `F_ε(T, X) + T/4!`.
    pub value: f64,
}

/// Empirical law of `F_ε(T, X) + T/4!`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub params: WasepParams,
    pub base_seed: u64,
    /// Replicas in index order.
    pub replicas: Vec<Replica>,
    sorted: Vec<f64>,
}

/// Runs `n_samples` independent replicas.
pub fn sample_cdf(params: &WasepParams, n_samples: usize, base_seed: u64) -> Result<EmpiricalCdf> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    let shift = params.t / 24.0;
    let replicas = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let seed = replica_seed(base_seed, i);
            let h = simulate_height(params, seed)?;
            Ok(Replica {
                index: i,
                seed,
                h,
                value: hopf_cole_value(h, params) + shift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalCdf::from_replicas(*params, base_seed, replicas))
}

impl EmpiricalCdf {
    pub fn from_replicas(params: WasepParams, base_seed: u64, replicas: Vec<Replica>) -> Self {
        let mut sorted: Vec<f64> = replicas.iter().map(|r| r.value).collect();
        sorted.sort_by(f64::total_cmp);
        Self {
            params,
            base_seed,
            replicas,
            sorted,
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical CDF.
    pub fn cdf(&self, s: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= s) as f64 / self.len() as f64
    }

    /// Distinct sample values with the empirical CDF just below and at each.
    fn atoms(&self) -> Vec<(f64, f64, f64)> {
        let n = self.len() as f64;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == v {
                j += 1;
            }
            out.push((v, i as f64 / n, j as f64 / n));
            i = j;
        }
        out
    }

    /// Distinct sample values.
    pub fn support(&self) -> Vec<f64> {
        self.atoms().into_iter().map(|a| a.0).collect()
    }

    /// Kolmogorov-Smirnov distance `sup_s |F_emp(s) − F(s)|` to a continuous
    /// CDF, evaluated at the sample values.
    pub fn ks_distance(&self, reference: impl Fn(f64) -> f64) -> f64 {
        self.atoms()
            .into_iter()
            .map(|(v, below, at)| {
                let f = reference(v);
                (f - below).abs().max((at - f).abs())
            })
            .fold(0.0, f64::max)
    }

    /// KS distance after spreading each lattice atom uniformly over its cell
    /// `[v − d/2, v + d/2]` (`d` the lattice spacing). The smoothed CDF is
    /// piecewise linear between cell edges; the reference is compared at the
    /// edges.
    pub fn ks_distance_continuity_corrected(&self, spacing: f64, reference: impl Fn(f64) -> f64) -> f64 {
        self.atoms()
            .into_iter()
            .map(|(v, below, at)| {
                let lo = (reference(v - 0.5 * spacing) - below).abs();
                let hi = (reference(v + 0.5 * spacing) - at).abs();
                lo.max(hi)
            })
            .fold(0.0, f64::max)
    }

    /// CDF of the sample with each atom spread uniformly over its lattice
    /// cell of width `spacing`.
    pub fn smoothed_cdf(&self, spacing: f64, s: f64) -> f64 {
        self.atoms()
            .into_iter()
            .map(|(v, below, at)| (at - below) * ((s - v) / spacing + 0.5).clamp(0.0, 1.0))
            .sum::<f64>()
            .min(1.0)
    }

    /// Spacing of the lattice of attainable values: `h` moves in steps of 2.
    pub fn lattice_spacing(&self) -> f64 {
        2.0 * self.params.lambda()
    }

    /// Writes `replica_index,seed,h,F_eps_plus_shift` with `#` metadata lines.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "# epsilon={} T={} X={} base_seed={} n={}",
            self.params.epsilon,
            self.params.t,
            self.params.x,
            self.base_seed,
            self.len()
        )?;
        writeln!(out, "replica_index,seed,h,F_eps_plus_shift")?;
        for r in &self.replicas {
            writeln!(out, "{},{},{},{:.12e}", r.index, r.seed, r.h, r.value)?;
        }
        Ok(())
    }
}

/// Two-sample KS distance between the cell-smoothed CDFs of two samples,
/// each with its own lattice spacing. Both smoothed CDFs are piecewise
/// linear, so the supremum is attained at a cell edge of either sample.
pub fn two_sample_ks_smoothed(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (da, db) = (a.lattice_spacing(), b.lattice_spacing());
    let mut edges: Vec<f64> = Vec::new();
    for v in a.support() {
        edges.extend([v - 0.5 * da, v + 0.5 * da]);
    }
    for v in b.support() {
        edges.extend([v - 0.5 * db, v + 0.5 * db]);
    }
    edges
        .into_iter()
        .map(|s| (a.smoothed_cdf(da, s) - b.smoothed_cdf(db, s)).abs())
        .fold(0.0, f64::max)
}

/// Two-sample KS distance between sorted samples.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
