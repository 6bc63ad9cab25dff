//! Outlier selection and degree-to-element pairing.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::reference_layer::CommunityLayout;
use crate::rng::{substream, Phase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierSelection {
    /// Degree indices of the outliers, ascending.
    pub outliers: Vec<u32>,
    /// Expected number of nodes with positive background degree before
    /// outliers are chosen, `sum_i min(1, xi d_i)`.
    pub ell: f64,
    /// Largest degree an outlier may have.
    pub bound: f64,
}

/// Picks `s0` outliers uniformly among the nodes whose degree does not
/// exceed `ell + s0 - ell s0 / n - 1`.
pub fn select_outliers<R: Rng + ?Sized>(degrees: &[u32], s0: usize, xi: f64, rng: &mut R) -> Result<OutlierSelection> {
    let n = degrees.len() as f64;
    let ell: f64 = degrees.iter().map(|&d| (xi * d as f64).min(1.0)).sum();
    let bound = ell + s0 as f64 - ell * s0 as f64 / n - 1.0;
    if s0 == 0 {
        return Ok(OutlierSelection {
            outliers: Vec::new(),
            ell,
            bound,
        });
    }
    let eligible: Vec<u32> = (0..degrees.len() as u32)
        .filter(|&i| degrees[i as usize] as f64 <= bound)
        .collect();
    if eligible.len() < s0 {
        return Err(Error::OutlierEligibility {
            eligible: eligible.len(),
            requested: s0,
            bound,
        });
    }
    let mut outliers: Vec<u32> = index::sample(rng, eligible.len(), s0)
        .into_iter()
        .map(|k| eligible[k])
        .collect();
    outliers.sort_unstable();
    Ok(OutlierSelection {
        outliers,
        ell,
        bound,
    })
}

/// Slack factor for background edges that land inside communities:
/// `1 - sum_k (s_k / n_hat)^2 * n_hat xi / (n_hat xi + s0)`, and 1 when
/// `n_hat xi + s0 = 0`.
pub fn compute_phi(primary_sizes: &[u32], n_hat: usize, s0: usize, xi: f64) -> f64 {
    let n_hat = n_hat as f64;
    let denom = n_hat * xi + s0 as f64;
    if denom == 0.0 {
        return 1.0;
    }
    let concentration: f64 = primary_sizes
        .iter()
        .map(|&s| {
            let f = s as f64 / n_hat;
            f * f
        })
        .sum();
    1.0 - concentration * (n_hat * xi) / denom
}

/// Sample Pearson correlation; 0 when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "pearson: length mismatch ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Domain("pearson: need at least two observations".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Largest degree each element can host: `eta_v / (1 - xi phi)` times the
/// smallest `|C_k| - 1` over its communities.
pub fn element_capacities(layout: &CommunityLayout, xi: f64, phi: f64) -> Vec<f64> {
    let scale = 1.0 - xi * phi;
    layout
        .memberships
        .iter()
        .map(|comms| {
            let min_room = comms
                .iter()
                .map(|&c| layout.members[c as usize].len() - 1)
                .min()
                .expect("every element has a primary community");
            comms.len() as f64 / scale * min_room as f64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingState {
    pub alpha: f64,
    pub phi: f64,
    /// `pairing[i]` is the element that receives the `i`-th largest
    /// non-outlier degree.
    pub pairing: Vec<u32>,
    pub achieved_rho: f64,
    /// Steps where no unassigned element could host the degree.
    pub fallbacks: usize,
}

/// Precomputed, alpha-independent inputs of a pairing attempt.
pub struct PairingProblem<'a> {
    degrees: &'a [u32],
    capacities: Vec<f64>,
    /// Elements by capacity, descending (ties by id).
    by_capacity: Vec<u32>,
    bucket_of: Vec<u32>,
    bucket_ln_eta: Vec<f64>,
    memberships: Vec<u32>,
    phi: f64,
}

impl<'a> PairingProblem<'a> {
    /// `degrees` are the non-outlier degrees, non-increasing.
    pub fn new(degrees: &'a [u32], layout: &CommunityLayout, phi: f64, xi: f64) -> Self {
        assert_eq!(degrees.len(), layout.element_count());
        debug_assert!(degrees.windows(2).all(|w| w[0] >= w[1]));
        let capacities = element_capacities(layout, xi, phi);
        let mut by_capacity: Vec<u32> = (0..capacities.len() as u32).collect();
        by_capacity.sort_unstable_by(|&a, &b| {
            capacities[b as usize]
                .total_cmp(&capacities[a as usize])
                .then(a.cmp(&b))
        });
        let memberships = layout.membership_counts();
        let mut distinct: Vec<u32> = memberships.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let max_eta = distinct.last().copied().unwrap_or(1) as usize;
        let mut slot = vec![u32::MAX; max_eta + 1];
        for (b, &eta) in distinct.iter().enumerate() {
            slot[eta as usize] = b as u32;
        }
        PairingProblem {
            degrees,
            bucket_of: memberships.iter().map(|&e| slot[e as usize]).collect(),
            bucket_ln_eta: distinct.iter().map(|&e| (e as f64).ln()).collect(),
            capacities,
            by_capacity,
            memberships,
            phi,
        }
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    /// True when every element has the same membership count.
    pub fn memberships_constant(&self) -> bool {
        self.bucket_ln_eta.len() <= 1
    }

    /// One pairing attempt: degree `i` goes to an unassigned element able to
    /// host it, chosen with probability proportional to `eta_v^alpha`; if none
    /// can, uniformly among the unassigned elements of maximal capacity.
    pub fn pair<R: Rng + ?Sized>(&self, alpha: f64, rng: &mut R) -> PairingState {
        let n = self.degrees.len();
        // Weights are normalized by the largest one, computed in log space so
        // that alpha = +-60 cannot overflow.
        let logs: Vec<f64> = self.bucket_ln_eta.iter().map(|l| alpha * l).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();

        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); weights.len()];
        let mut order = self.by_capacity.clone();
        let mut next = 0usize;
        let mut admitted_open = 0usize;
        let mut pairing = Vec::with_capacity(n);
        let mut fallbacks = 0;

        for &d in self.degrees {
            let d = d as f64;
            while next < n && self.capacities[order[next] as usize] >= d {
                let v = order[next];
                buckets[self.bucket_of[v as usize] as usize].push(v);
                admitted_open += 1;
                next += 1;
            }
            let v = if admitted_open == 0 {
                fallbacks += 1;
                let cap = self.capacities[order[next] as usize];
                let mut end = next + 1;
                while end < n && self.capacities[order[end] as usize] == cap {
                    end += 1;
                }
                let pick = rng.random_range(next..end);
                order.swap(next, pick);
                next += 1;
                order[next - 1]
            } else {
                admitted_open -= 1;
                let b = pick_bucket(&buckets, &weights, &logs, rng);
                let bucket = &mut buckets[b];
                let k = rng.random_range(0..bucket.len());
                bucket.swap_remove(k)
            };
            pairing.push(v);
        }

        let xs: Vec<f64> = self.degrees.iter().map(|&d| d as f64).collect();
        let ys: Vec<f64> = pairing
            .iter()
            .map(|&v| self.memberships[v as usize] as f64)
            .collect();
        let achieved_rho = if n >= 2 { pearson(&xs, &ys).unwrap() } else { 0.0 };
        PairingState {
            alpha,
            phi: self.phi,
            pairing,
            achieved_rho,
            fallbacks,
        }
    }
}

fn pick_bucket<R: Rng + ?Sized>(buckets: &[Vec<u32>], weights: &[f64], logs: &[f64], rng: &mut R) -> usize {
    let mut total = 0.0;
    for (b, w) in buckets.iter().zip(weights) {
        total += b.len() as f64 * w;
    }
    if total.is_nan() || total <= 0.0 {
        // Every open bucket underflowed; renormalize over the open ones.
        let top = buckets
            .iter()
            .zip(logs)
            .filter(|(b, _)| !b.is_empty())
            .map(|(_, &l)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        let local: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        return pick_bucket(buckets, &local, logs, rng);
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, (b, w)) in buckets.iter().zip(weights).enumerate() {
        if b.is_empty() {
            continue;
        }
        last = i;
        u -= b.len() as f64 * w;
        if u < 0.0 {
            return i;
        }
    }
    last
}

/// Single pairing attempt at a fixed `alpha`.
pub fn pair_degrees_with_alpha<R: Rng + ?Sized>(
    degrees: &[u32],
    layout: &CommunityLayout,
    phi: f64,
    xi: f64,
    alpha: f64,
    rng: &mut R,
) -> PairingState {
    PairingProblem::new(degrees, layout, phi, xi).pair(alpha, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    /// Accept once `|achieved - target|` is at most this.
    pub tolerance: f64,
    /// Bisection steps after the two endpoint evaluations.
    pub max_iterations: usize,
    /// Stop after this many consecutive steps whose achieved correlation
    /// moved by less than a quarter of `tolerance`.
    pub stagnation_limit: usize,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            tolerance: 0.005,
            max_iterations: 30,
            stagnation_limit: 6,
        }
    }
}

pub const ALPHA_MIN: f64 = -60.0;
pub const ALPHA_MAX: f64 = 60.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearch {
    pub best: PairingState,
    /// `(alpha, achieved rho)` in evaluation order.
    pub trace: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Bisects `alpha` over `[-60, 60]` until the achieved correlation is within
/// tolerance of `target`, returning the closest pairing seen.
///
/// Evaluation `k` draws from substream `(seed, Pairing, k)`; the two endpoint
/// evaluations may run concurrently.
pub fn tune_alpha(
    problem: &PairingProblem<'_>,
    target: f64,
    options: &TuneOptions,
    seed: u64,
    mode: ExecMode,
) -> AlphaSearch {
    let eval = |k: u64, alpha: f64| problem.pair(alpha, &mut substream(seed, Phase::Pairing, k));
    let gap = |s: &PairingState| (s.achieved_rho - target).abs();

    if problem.memberships_constant() {
        let state = eval(0, 0.0);
        let converged = gap(&state) <= options.tolerance;
        return AlphaSearch {
            trace: vec![(0.0, state.achieved_rho)],
            best: state,
            converged,
        };
    }

    let (lo_state, hi_state) = exec::join(mode, || eval(0, ALPHA_MIN), || eval(1, ALPHA_MAX));
    let mut trace = vec![
        (ALPHA_MIN, lo_state.achieved_rho),
        (ALPHA_MAX, hi_state.achieved_rho),
    ];
    let (lo_rho, hi_rho) = (lo_state.achieved_rho, hi_state.achieved_rho);
    let mut best = if gap(&lo_state) <= gap(&hi_state) {
        lo_state
    } else {
        hi_state
    };
    if gap(&best) <= options.tolerance || target <= lo_rho || target >= hi_rho {
        let converged = gap(&best) <= options.tolerance;
        return AlphaSearch {
            best,
            trace,
            converged,
        };
    }

    let (mut lo, mut hi) = (ALPHA_MIN, ALPHA_MAX);
    let mut stagnant = 0;
    let mut previous = f64::NAN;
    for k in 0..options.max_iterations {
        let mid = 0.5 * (lo + hi);
        let state = eval(2 + k as u64, mid);
        trace.push((mid, state.achieved_rho));
        let below = state.achieved_rho < target;
        if (state.achieved_rho - previous).abs() < 0.25 * options.tolerance {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        previous = state.achieved_rho;
        if gap(&state) < gap(&best) {
            best = state;
        }
        if gap(&best) <= options.tolerance || stagnant >= options.stagnation_limit {
            break;
        }
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let converged = gap(&best) <= options.tolerance;
    AlphaSearch {
        best,
        trace,
        converged,
    }
}
