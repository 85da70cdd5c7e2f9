//! Subcarrier-to-user assignment.
//!
//! Each base station assigns users to subcarriers in two passes: first over
//! its dedicated band, then over the shared band for whoever is left. A
//! subcarrier can carry at most as many users as the base station has
//! transmit antennas, and a user gets at most one subcarrier overall.
//!
//! Two assignment rules are available:
//! - [`gale_shapley`]: user-proposing deferred acceptance with quotas. Users
//!   and subcarriers rank each other by the squared Frobenius norm of the
//!   channel between them.
//! - [`transportation_assign`]: maximum total channel gain subject to the
//!   same quotas, solved as a min-cost flow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Band, ChannelSet};
use crate::linalg::frob_norm_sq;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("no {band:?} channel for cell {cell}, user {user}, subcarrier {subcarrier}")]
    MissingChannel {
        cell: usize,
        user: usize,
        band: Band,
        subcarrier: usize,
    },
    #[error("gain matrix is ragged or holds a negative/non-finite entry")]
    InvalidGains,
    #[error("flow solver stalled at {flow} of {target} units")]
    FlowStalled { flow: usize, target: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMethod {
    GaleShapley,
    Transportation,
}

impl AssignmentMethod {
    pub fn name(self) -> &'static str {
        match self {
            AssignmentMethod::GaleShapley => "gale_shapley",
            AssignmentMethod::Transportation => "transportation",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            AssignmentMethod::GaleShapley => "gs",
            AssignmentMethod::Transportation => "tp",
        }
    }
}

/// Strict rankings of both sides of one band.
///
/// Users and subcarriers are indexed locally (`0..users`, `0..subcarriers`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    /// For each user, subcarriers from most to least preferred.
    pub user_prefs: Vec<Vec<usize>>,
    /// For each subcarrier, users from most to least preferred.
    pub subcarrier_prefs: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    /// Ranks both sides by descending gain, ties broken by ascending index.
    pub fn from_gains(gains: &[Vec<f64>]) -> Self {
        let users = gains.len();
        let subcarriers = gains.first().map_or(0, Vec::len);
        let user_prefs = gains
            .iter()
            .map(|row| {
                let mut order: Vec<usize> = (0..subcarriers).collect();
                order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                order
            })
            .collect();
        let subcarrier_prefs = (0..subcarriers)
            .map(|s| {
                let mut order: Vec<usize> = (0..users).collect();
                order.sort_by(|&a, &b| gains[b][s].total_cmp(&gains[a][s]).then(a.cmp(&b)));
                order
            })
            .collect();
        Self {
            user_prefs,
            subcarrier_prefs,
        }
    }

    pub fn users(&self) -> usize {
        self.user_prefs.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarrier_prefs.len()
    }

    /// `rank[s][u]`: position of user `u` in subcarrier `s`'s list.
    fn subcarrier_ranks(&self) -> Vec<Vec<usize>> {
        self.subcarrier_prefs
            .iter()
            .map(|order| {
                let mut rank = vec![usize::MAX; self.users()];
                for (pos, &u) in order.iter().enumerate() {
                    rank[u] = pos;
                }
                rank
            })
            .collect()
    }
}

/// Squared Frobenius norms of the serving-cell channels, `[user][subcarrier]`.
pub fn band_gains(
    channels: &ChannelSet,
    cell: usize,
    band: Band,
    users: &[usize],
) -> Result<Vec<Vec<f64>>, AllocationError> {
    let subcarriers = channels.topology().subcarriers(cell, band);
    users
        .iter()
        .map(|&user| {
            (0..subcarriers)
                .map(|subcarrier| {
                    channels
                        .own(cell, user, band, subcarrier)
                        .map(frob_norm_sq)
                        .ok_or(AllocationError::MissingChannel {
                            cell,
                            user,
                            band,
                            subcarrier,
                        })
                })
                .collect()
        })
        .collect()
}

/// Preference lists of all users of `cell` over `band`.
pub fn build_preferences(
    channels: &ChannelSet,
    cell: usize,
    band: Band,
) -> Result<PreferenceProfile, AllocationError> {
    let users: Vec<usize> = (0..channels.topology().users_per_cell[cell]).collect();
    Ok(PreferenceProfile::from_gains(&band_gains(channels, cell, band, &users)?))
}

/// Outcome of one assignment pass over one band, in local indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// Accepted users per subcarrier, ascending.
    pub accepted: Vec<Vec<usize>>,
    /// Users left without a subcarrier, ascending.
    pub unmatched: Vec<usize>,
}

impl Matching {
    fn from_owner(owner: &[Option<usize>], subcarriers: usize) -> Self {
        let mut accepted = vec![Vec::new(); subcarriers];
        let mut unmatched = Vec::new();
        for (u, slot) in owner.iter().enumerate() {
            match slot {
                Some(s) => accepted[*s].push(u),
                None => unmatched.push(u),
            }
        }
        Self { accepted, unmatched }
    }

    /// Subcarrier of each user, if any.
    pub fn owner(&self, users: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; users];
        for (s, list) in self.accepted.iter().enumerate() {
            for &u in list {
                owner[u] = Some(s);
            }
        }
        owner
    }

    pub fn matched(&self) -> usize {
        self.accepted.iter().map(Vec::len).sum()
    }
}

/// Capacitated user-proposing deferred acceptance.
pub fn gale_shapley(prefs: &PreferenceProfile, capacity: usize) -> Matching {
    gale_shapley_counted(prefs, capacity).0
}

/// [`gale_shapley`] that also returns the number of proposals made.
///
/// Runs in rounds: every free user with a non-empty list proposes to its
/// favourite remaining subcarrier. A subcarrier under quota accepts; a full
/// one swaps out its least-preferred holder if the proposer ranks higher.
/// The proposed subcarrier leaves the proposer's list either way, so no
/// pair is ever proposed twice.
pub fn gale_shapley_counted(prefs: &PreferenceProfile, capacity: usize) -> (Matching, usize) {
    let users = prefs.users();
    let subcarriers = prefs.subcarriers();
    let rank = prefs.subcarrier_ranks();
    let mut next = vec![0usize; users];
    let mut owner: Vec<Option<usize>> = vec![None; users];
    let mut holders: Vec<Vec<usize>> = vec![Vec::with_capacity(capacity); subcarriers];
    let mut proposals = 0;

    loop {
        let mut active = false;
        for u in 0..users {
            if owner[u].is_some() || next[u] >= prefs.user_prefs[u].len() {
                continue;
            }
            active = true;
            let s = prefs.user_prefs[u][next[u]];
            next[u] += 1;
            proposals += 1;
            if holders[s].len() < capacity {
                holders[s].push(u);
                owner[u] = Some(s);
            } else if let Some((slot, &worst)) = holders[s]
                .iter()
                .enumerate()
                .max_by_key(|&(_, &v)| rank[s][v])
            {
                if rank[s][u] < rank[s][worst] {
                    holders[s][slot] = u;
                    owner[u] = Some(s);
                    owner[worst] = None;
                }
            }
        }
        if !active {
            break;
        }
    }
    (Matching::from_owner(&owner, subcarriers), proposals)
}

/// True when no user-subcarrier pair would rather be matched to each other.
pub fn stability_check(matching: &Matching, prefs: &PreferenceProfile, capacity: usize) -> bool {
    let rank = prefs.subcarrier_ranks();
    let owner = matching.owner(prefs.users());
    for (u, list) in prefs.user_prefs.iter().enumerate() {
        for &s in list {
            if owner[u] == Some(s) {
                break;
            }
            let held = &matching.accepted[s];
            if held.len() < capacity {
                return false;
            }
            let worst = held.iter().map(|&v| rank[s][v]).max().unwrap_or(usize::MAX);
            if rank[s][u] < worst {
                return false;
            }
        }
    }
    true
}

/// Number of non-empty user groups of size at most `capacity`.
pub fn count_feasible_groups(users: u64, capacity: u64) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for t in 1..=capacity.min(users) {
        binom = binom * (users - t + 1) as u128 / t as u128;
        total += binom;
    }
    total
}

/// Result of the transportation formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub matching: Matching,
    /// Total gain of the assigned pairs.
    pub objective: f64,
    /// Flow on each user-subcarrier arc, `[user][subcarrier]`.
    pub flow: Vec<Vec<f64>>,
}

struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

struct FlowGraph {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.adj[from].push(id);
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[to].push(id + 1);
        id
    }

    /// Bellman-Ford shortest path in the residual graph; arc ids back from `sink`.
    fn shortest_path(&self, source: usize, sink: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for node in 0..n {
                if !dist[node].is_finite() {
                    continue;
                }
                for &id in &self.adj[node] {
                    let arc = &self.arcs[id];
                    if arc.cap <= 0 {
                        continue;
                    }
                    let cand = dist[node] + arc.cost;
                    if cand < dist[arc.to] - 1e-12 {
                        dist[arc.to] = cand;
                        via[arc.to] = Some(id);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[sink].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut node = sink;
        while node != source {
            let id = via[node]?;
            path.push(id);
            node = self.arcs[id ^ 1].to;
            if path.len() > n {
                return None;
            }
        }
        Some(path)
    }
}

/// Maximum-gain assignment with at most `capacity` users per subcarrier and
/// at most one subcarrier per user.
///
/// Solved by successive shortest augmenting paths on
/// `source -> subcarrier (cap = capacity) -> user (cap 1, cost -gain) -> sink`.
/// Exactly `min(users, capacity * subcarriers)` users are matched.
pub fn transportation_assign(
    gains: &[Vec<f64>],
    capacity: usize,
) -> Result<TransportSolution, AllocationError> {
    let users = gains.len();
    let subcarriers = gains.first().map_or(0, Vec::len);
    if gains
        .iter()
        .any(|row| row.len() != subcarriers || row.iter().any(|g| !(g.is_finite() && *g >= 0.0)))
    {
        return Err(AllocationError::InvalidGains);
    }

    let source = 0;
    let sub_node = |s: usize| 1 + s;
    let user_node = |u: usize| 1 + subcarriers + u;
    let sink = 1 + subcarriers + users;
    let mut graph = FlowGraph::new(sink + 1);
    for s in 0..subcarriers {
        graph.add_arc(source, sub_node(s), capacity as i64, 0.0);
    }
    let mut pair_arcs = vec![vec![0usize; subcarriers]; users];
    for (u, row) in gains.iter().enumerate() {
        for (s, &g) in row.iter().enumerate() {
            pair_arcs[u][s] = graph.add_arc(sub_node(s), user_node(u), 1, -g);
        }
        graph.add_arc(user_node(u), sink, 1, 0.0);
    }

    let target = users.min(capacity * subcarriers);
    let mut flow = 0;
    while flow < target {
        let path = graph
            .shortest_path(source, sink)
            .ok_or(AllocationError::FlowStalled { flow, target })?;
        for id in path {
            graph.arcs[id].cap -= 1;
            graph.arcs[id ^ 1].cap += 1;
        }
        flow += 1;
    }

    let flow_matrix: Vec<Vec<f64>> = pair_arcs
        .iter()
        .map(|row| row.iter().map(|&id| graph.arcs[id ^ 1].cap as f64).collect())
        .collect();
    let owner: Vec<Option<usize>> = flow_matrix
        .iter()
        .map(|row| row.iter().position(|&x| x > 0.5))
        .collect();
    let objective = owner
        .iter()
        .enumerate()
        .filter_map(|(u, s)| s.map(|s| gains[u][s]))
        .sum();
    Ok(TransportSolution {
        matching: Matching::from_owner(&owner, subcarriers),
        objective,
        flow: flow_matrix,
    })
}

/// Final per-cell assignment across both bands, in global user indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub cell: usize,
    /// Users per dedicated subcarrier.
    pub dedicated: Vec<Vec<usize>>,
    /// Users per shared subcarrier.
    pub shared: Vec<Vec<usize>>,
    pub unmatched: Vec<usize>,
}

impl Assignment {
    pub fn band(&self, band: Band) -> &[Vec<usize>] {
        match band {
            Band::Dedicated => &self.dedicated,
            Band::Shared => &self.shared,
        }
    }

    pub fn matched(&self) -> usize {
        self.dedicated.iter().chain(&self.shared).map(Vec::len).sum()
    }

    /// Scheduled `(band, subcarrier, user)` triples in band, subcarrier, user order.
    pub fn links(&self) -> impl Iterator<Item = (Band, usize, usize)> + '_ {
        [Band::Dedicated, Band::Shared].into_iter().flat_map(move |band| {
            self.band(band)
                .iter()
                .enumerate()
                .flat_map(move |(s, users)| users.iter().map(move |&u| (band, s, u)))
        })
    }

    /// Checks the quota and single-subcarrier rules, and that every one of
    /// `users` users is accounted for exactly once.
    pub fn validate(&self, capacity: usize, users: usize) -> Result<(), String> {
        let mut seen = vec![false; users];
        for (band, s, u) in self.links() {
            if u >= users || seen[u] {
                return Err(format!("user {u} appears twice or out of range ({band:?} {s})"));
            }
            seen[u] = true;
        }
        for &u in &self.unmatched {
            if u >= users || seen[u] {
                return Err(format!("unmatched user {u} is also scheduled or out of range"));
            }
            seen[u] = true;
        }
        if let Some(u) = seen.iter().position(|&x| !x) {
            return Err(format!("user {u} is missing"));
        }
        for (band, list) in [(Band::Dedicated, &self.dedicated), (Band::Shared, &self.shared)] {
            if let Some(s) = list.iter().position(|l| l.len() > capacity) {
                return Err(format!("{band:?} subcarrier {s} exceeds capacity {capacity}"));
            }
        }
        Ok(())
    }
}

fn assign_band(
    channels: &ChannelSet,
    cell: usize,
    band: Band,
    users: &[usize],
    method: AssignmentMethod,
    capacity: usize,
) -> Result<(Vec<Vec<usize>>, Vec<usize>), AllocationError> {
    let subcarriers = channels.topology().subcarriers(cell, band);
    if users.is_empty() || subcarriers == 0 {
        return Ok((vec![Vec::new(); subcarriers], users.to_vec()));
    }
    let gains = band_gains(channels, cell, band, users)?;
    let local = match method {
        AssignmentMethod::GaleShapley => gale_shapley(&PreferenceProfile::from_gains(&gains), capacity),
        AssignmentMethod::Transportation => transportation_assign(&gains, capacity)?.matching,
    };
    let accepted = local
        .accepted
        .iter()
        .map(|list| list.iter().map(|&u| users[u]).collect())
        .collect();
    let unmatched = local.unmatched.iter().map(|&u| users[u]).collect();
    Ok((accepted, unmatched))
}

/// Dedicated band first, then the shared band for whoever is left over.
pub fn allocate_two_stage(
    channels: &ChannelSet,
    cell: usize,
    method: AssignmentMethod,
    capacity: usize,
) -> Result<Assignment, AllocationError> {
    let all: Vec<usize> = (0..channels.topology().users_per_cell[cell]).collect();
    let (dedicated, leftover) = assign_band(channels, cell, Band::Dedicated, &all, method, capacity)?;
    let (shared, unmatched) = assign_band(channels, cell, Band::Shared, &leftover, method, capacity)?;
    Ok(Assignment {
        cell,
        dedicated,
        shared,
        unmatched,
    })
}
