//! End-to-end generation: degrees, outliers, reference layer, pairing,
//! edges and rewiring.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::assignment::{
    compute_phi, select_outliers, AlphaSearch, OutlierSelection, PairingProblem, TuneOptions,
};
use crate::edges::{
    allocate_community_halfedges, community_tag, configuration_model, fix_parity,
    quota_capacity_violations, split_degrees, DegreeSplit, Edge, MultiGraph, BACKGROUND,
};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::metrics::{realized_xi_parts, LabeledNetwork};
use crate::params::Parameters;
use crate::reference_layer::{
    assign_primary_communities, grow_communities, CommunityLayout, ReferencePoints,
};
use crate::rewiring::{global_rewire, rewire_graph, GlobalRewireStats};
use crate::rng::{substream, Phase};
use crate::sampling::{CommunitySizes, DegreeSequence};

#[derive(Clone, Debug, Default)]
pub struct GenerateOptions {
    pub exec: ExecMode,
    pub tune: TuneOptions,
    /// Use this degree list instead of sampling one.
    pub degrees: Option<Vec<u32>>,
    /// Use these primary community sizes instead of sampling them.
    pub primary_sizes: Option<Vec<u32>>,
}

/// Everything decided before edges exist.
#[derive(Clone, Debug)]
pub struct Blueprint {
    pub params: Parameters,
    pub degrees: DegreeSequence,
    pub outliers: OutlierSelection,
    pub sizes: CommunitySizes,
    pub points: ReferencePoints,
    pub layout: CommunityLayout,
    pub phi: f64,
    pub search: AlphaSearch,
    /// Communities of each node, ascending; empty for outliers.
    pub memberships: Vec<Vec<u32>>,
    pub warnings: Vec<String>,
    pub timings: Vec<(String, Duration)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewiringSummary {
    pub initial_offenders: usize,
    pub local_rounds: usize,
    pub local_leftovers: usize,
    /// Community-tagged edges that the global phase left between
    /// non-co-members; they are reported as background.
    pub retagged: usize,
    #[serde(flatten)]
    pub global: GlobalRewireStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub params: Parameters,
    pub nodes: usize,
    pub outliers: usize,
    pub communities: usize,
    pub edges: usize,
    pub mean_memberships: f64,
    pub phi: f64,
    pub target_rho: f64,
    pub achieved_rho: f64,
    pub alpha: f64,
    pub alpha_evaluations: usize,
    pub rho_converged: bool,
    pub pairing_fallbacks: usize,
    pub target_xi: f64,
    pub realized_xi: f64,
    pub background_edge_fraction: f64,
    pub parity_fixes: usize,
    pub quota_capacity_violations: usize,
    pub primary_sizes_above_cap: usize,
    pub capped_communities: usize,
    pub rewiring: RewiringSummary,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct GeneratedNetwork {
    pub degrees: Vec<u32>,
    /// Sorted, simple.
    pub edges: Vec<Edge>,
    /// Per edge: [`BACKGROUND`] or `community + 1`.
    pub provenance: Vec<u32>,
    pub memberships: Vec<Vec<u32>>,
    pub outliers: Vec<u32>,
    pub points: ReferencePoints,
    pub split: DegreeSplit,
    pub summary: RunSummary,
    pub timings: Vec<(String, Duration)>,
}

impl GeneratedNetwork {
    pub fn community_count(&self) -> usize {
        self.summary.communities
    }

    /// Member lists per community, ascending.
    pub fn communities(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (v, m) in self.memberships.iter().enumerate() {
            for &c in m {
                out[c as usize].push(v as u32);
            }
        }
        out
    }

    pub fn to_labeled(&self) -> LabeledNetwork {
        LabeledNetwork {
            n: self.degrees.len(),
            edges: self.edges.clone(),
            memberships: self.memberships.clone(),
            labels: (1..=self.community_count() as u64).collect(),
            provenance: Some(self.provenance.clone()),
        }
    }
}

struct Stopwatch {
    last: Instant,
    laps: Vec<(String, Duration)>,
}

impl Stopwatch {
    fn new() -> Self {
        Stopwatch {
            last: Instant::now(),
            laps: Vec::new(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.laps.push((name.to_string(), now - self.last));
        self.last = now;
    }
}

/// Degree sequence, outliers, communities and the degree-to-element pairing.
pub fn build_blueprint(params: &Parameters, options: &GenerateOptions) -> Result<Blueprint> {
    params.validate()?;
    let seed = params.seed;
    let mut clock = Stopwatch::new();
    let mut warnings = Vec::new();

    let degrees = match &options.degrees {
        Some(d) => DegreeSequence::from_explicit(d.clone(), params)?,
        None => DegreeSequence::sample(params, &mut substream(seed, Phase::Degrees, 0))?,
    };
    clock.lap("degrees");

    let outliers = select_outliers(
        degrees.as_slice(),
        params.s0,
        params.xi,
        &mut substream(seed, Phase::Outliers, 0),
    )?;
    clock.lap("outliers");

    let n_hat = params.n_hat();
    let mut size_rng = substream(seed, Phase::CommunitySizes, 0);
    let sizes = match &options.primary_sizes {
        Some(s) => CommunitySizes::from_primary(s.clone(), params, &mut size_rng)?,
        None => CommunitySizes::sample(params, &mut size_rng)?,
    };
    if sizes.above_cap > 0 {
        warnings.push(format!(
            "{} primary communities exceed floor(S/eta) = {} after the overshoot adjustment",
            sizes.above_cap,
            params.max_primary_size()
        ));
    }
    let points = ReferencePoints::sample(n_hat, params.dim, &mut substream(seed, Phase::Points, 0));
    let primaries = assign_primary_communities(&points, &sizes.primary);
    clock.lap("seeding");
    let layout = grow_communities(&primaries, &sizes.grown, &points, options.exec);
    if layout.capped > 0 {
        warnings.push(format!(
            "{} communities were capped at the {} available elements",
            layout.capped, n_hat
        ));
    }
    clock.lap("growth");

    let phi = compute_phi(&sizes.primary, n_hat, params.s0, params.xi);
    let mut is_outlier = vec![false; params.n];
    for &i in &outliers.outliers {
        is_outlier[i as usize] = true;
    }
    let nodes: Vec<u32> = (0..params.n as u32).filter(|&i| !is_outlier[i as usize]).collect();
    let inner_degrees: Vec<u32> = nodes.iter().map(|&i| degrees.as_slice()[i as usize]).collect();
    let problem = PairingProblem::new(&inner_degrees, &layout, phi, params.xi);
    let search = crate::assignment::tune_alpha(&problem, params.rho, &options.tune, seed, options.exec);
    if problem.memberships_constant() && params.rho != 0.0 {
        warnings.push(
            "every element has the same number of communities; no correlation is achievable".into(),
        );
    }
    if !search.converged {
        warnings.push(format!(
            "target rho = {} is out of reach; closest achieved rho = {:.4} at alpha = {}",
            params.rho, search.best.achieved_rho, search.best.alpha
        ));
    }
    if search.best.fallbacks > 0 {
        warnings.push(format!(
            "{} degrees exceeded every remaining element's capacity and were placed on the roomiest element",
            search.best.fallbacks
        ));
    }
    clock.lap("pairing");

    let mut memberships = vec![Vec::new(); params.n];
    for (&node, &element) in nodes.iter().zip(&search.best.pairing) {
        memberships[node as usize] = layout.memberships[element as usize].clone();
    }

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Blueprint {
        params: params.clone(),
        degrees,
        outliers,
        sizes,
        points,
        layout,
        phi,
        search,
        memberships,
        warnings,
        timings: clock.laps,
    })
}

/// Edges for a finished blueprint.
pub fn realize(blueprint: Blueprint, options: &GenerateOptions) -> Result<GeneratedNetwork> {
    let Blueprint {
        params,
        degrees,
        outliers,
        sizes,
        points,
        layout,
        phi,
        search,
        memberships,
        mut warnings,
        timings,
    } = blueprint;
    let mut clock = Stopwatch::new();
    clock.laps = timings;
    let seed = params.seed;
    let n = params.n;
    let degrees = degrees.into_inner();
    let communities = layout.community_count();

    let mut is_outlier = vec![false; n];
    for &i in &outliers.outliers {
        is_outlier[i as usize] = true;
    }
    let mut split = split_degrees(&degrees, &is_outlier, params.xi, &mut substream(seed, Phase::Split, 0));
    allocate_community_halfedges(&mut split, &memberships, communities, &mut substream(seed, Phase::Quotas, 0));
    for j in 0..communities {
        fix_parity(&mut split, j, &degrees);
    }
    let violations = quota_capacity_violations(&split);
    if violations > 0 {
        warnings.push(format!(
            "{violations} community quotas exceed the community size minus one; rewiring moves the excess"
        ));
        log::warn!("{}", warnings.last().unwrap());
    }
    clock.lap("split");

    // Community graphs and the background graph, each built and cleaned on
    // its own substreams.
    let background_list: Vec<(u32, u32)> = split
        .background
        .iter()
        .enumerate()
        .filter(|&(_, &z)| z > 0)
        .map(|(i, &z)| (i as u32, z))
        .collect();
    let built = exec::map_range(options.exec, communities + 1, |j| {
        let (list, tag, cm_rng) = if j < communities {
            (&split.quotas[j], community_tag(j), substream(seed, Phase::CommunityGraph, j as u64))
        } else {
            (&background_list, BACKGROUND, substream(seed, Phase::BackgroundGraph, 0))
        };
        let mut cm_rng = cm_rng;
        let edges = configuration_model(list, &mut cm_rng)?;
        let local = rewire_graph(edges, &mut substream(seed, Phase::LocalRewire, j as u64));
        Ok::<_, Error>((tag, local))
    });
    clock.lap("configuration model");

    let mut rewiring = RewiringSummary::default();
    let mut components = Vec::with_capacity(communities + 1);
    let mut leftovers = MultiGraph::default();
    for result in built {
        let (tag, local) = result?;
        rewiring.initial_offenders += local.initial_offenders;
        rewiring.local_rounds += local.rounds;
        rewiring.local_leftovers += local.leftovers.len();
        leftovers.tags.extend(std::iter::repeat_n(tag, local.leftovers.len()));
        leftovers.edges.extend(local.leftovers);
        components.push(MultiGraph::tagged(local.edges, tag));
    }
    let (graph, global) = global_rewire(components, leftovers, &mut substream(seed, Phase::GlobalRewire, 0))?;
    rewiring.global = global;
    let mut graph = graph;
    for (&(a, b), tag) in graph.edges.iter().zip(graph.tags.iter_mut()) {
        if *tag != BACKGROUND {
            let c = *tag - 1;
            let inside = memberships[a as usize].binary_search(&c).is_ok()
                && memberships[b as usize].binary_search(&c).is_ok();
            if !inside {
                *tag = BACKGROUND;
                rewiring.retagged += 1;
            }
        }
    }
    clock.lap("rewiring");

    let mut order: Vec<usize> = (0..graph.edges.len()).collect();
    order.sort_unstable_by_key(|&i| graph.edges[i]);
    let edges: Vec<Edge> = order.iter().map(|&i| graph.edges[i]).collect();
    let provenance: Vec<u32> = order.iter().map(|&i| graph.tags[i]).collect();

    let inner = n - outliers.outliers.len();
    let summary = RunSummary {
        nodes: n,
        outliers: outliers.outliers.len(),
        communities,
        edges: edges.len(),
        mean_memberships: layout.memberships.iter().map(Vec::len).sum::<usize>() as f64 / inner as f64,
        phi,
        target_rho: params.rho,
        achieved_rho: search.best.achieved_rho,
        alpha: search.best.alpha,
        alpha_evaluations: search.trace.len(),
        rho_converged: search.converged,
        pairing_fallbacks: search.best.fallbacks,
        target_xi: params.xi,
        realized_xi: realized_xi_parts(&edges, &memberships),
        background_edge_fraction: if edges.is_empty() {
            0.0
        } else {
            provenance.iter().filter(|&&t| t == BACKGROUND).count() as f64 / edges.len() as f64
        },
        parity_fixes: split.parity_fixes,
        quota_capacity_violations: violations,
        primary_sizes_above_cap: sizes.above_cap,
        capped_communities: layout.capped,
        rewiring,
        warnings,
        params,
    };
    Ok(GeneratedNetwork {
        degrees,
        edges,
        provenance,
        memberships,
        outliers: outliers.outliers,
        points,
        split,
        summary,
        timings: clock.laps,
    })
}

pub fn generate(params: &Parameters, options: &GenerateOptions) -> Result<GeneratedNetwork> {
    let blueprint = build_blueprint(params, options)?;
    realize(blueprint, options)
}
