#![allow(dead_code)]

use cospectrum::allocation::PreferenceProfile;
use cospectrum::channel::{draw_rayleigh, Band};
use cospectrum::linalg::ComplexMatrix;
use cospectrum::wmmse::{wmmse_solve, CellProblem, LinkState, WmmseSettings};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn to_na(a: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_na(a: &DMatrix<Complex64>) -> ComplexMatrix {
    let data = (0..a.nrows())
        .flat_map(|r| (0..a.ncols()).map(move |c| a[(r, c)]))
        .collect();
    ComplexMatrix::new(a.nrows(), a.ncols(), data).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    draw_rayleigh(rng, rows, cols)
}

/// Random Hermitian positive-definite matrix `G G^H + shift I`.
pub fn random_hpd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> ComplexMatrix {
    let g = to_na(&random_matrix(rng, n, n));
    let a = &g * g.adjoint() + DMatrix::<Complex64>::identity(n, n) * Complex64::new(shift, 0.0);
    from_na(&a)
}

/// Point-to-point MIMO capacity `max log2 det(I + H Q H^H / σ²)`, `tr Q ≤ p`.
pub fn water_filling_capacity(h: &ComplexMatrix, p: f64, noise: f64) -> f64 {
    let sv = to_na(h).singular_values();
    let mut gains: Vec<f64> = sv.iter().map(|s| s * s / noise).filter(|&g| g > 1e-14).collect();
    gains.sort_by(|a, b| b.total_cmp(a));
    if p <= 0.0 || gains.is_empty() {
        return 0.0;
    }
    let mut active = gains.len();
    let level = loop {
        let inv: f64 = gains[..active].iter().map(|g| 1.0 / g).sum();
        let level = (p + inv) / active as f64;
        if level > 1.0 / gains[active - 1] || active == 1 {
            break level;
        }
        active -= 1;
    };
    gains[..active].iter().map(|g| (level * g).log2()).sum()
}

/// Cell 0 holds the given links; cell 1 is empty.
pub fn lone_cell(links: Vec<LinkState>, p_max: f64, noise: f64) -> Vec<CellProblem> {
    vec![
        CellProblem::new(0, links, p_max, noise).unwrap(),
        CellProblem::new(1, Vec::new(), p_max, noise).unwrap(),
    ]
}

/// Runs WMMSE on a single dedicated link and returns its final rate.
pub fn single_link_rate<R: Rng>(
    rng: &mut R,
    h: &ComplexMatrix,
    p_max: f64,
    noise: f64,
    settings: &WmmseSettings,
) -> f64 {
    let streams = h.rows();
    let link = LinkState::new(0, Band::Dedicated, 0, h.clone(), None, streams, 1.0);
    let mut cells = lone_cell(vec![link], p_max, noise);
    cells[0].initialize_precoders(rng);
    wmmse_solve(&mut cells, settings).unwrap().final_wsr()
}


pub fn random_profile<R: Rng>(rng: &mut R, users: usize, subcarriers: usize) -> PreferenceProfile {
    let perm = |rng: &mut R, n: usize| {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        v
    };
    PreferenceProfile {
        user_prefs: (0..users).map(|_| perm(rng, subcarriers)).collect(),
        subcarrier_prefs: (0..subcarriers).map(|_| perm(rng, users)).collect(),
    }
}

pub fn random_gains<R: Rng>(rng: &mut R, users: usize, subcarriers: usize) -> Vec<Vec<f64>> {
    (0..users)
        .map(|_| (0..subcarriers).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect()
}

/// Every map user -> optional subcarrier that respects `capacity`.
pub fn feasible_assignments(users: usize, subcarriers: usize, capacity: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let mut current = vec![None; users];
    let mut load = vec![0; subcarriers];
    fn rec(
        u: usize,
        current: &mut Vec<Option<usize>>,
        load: &mut Vec<usize>,
        capacity: usize,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if u == current.len() {
            out.push(current.clone());
            return;
        }
        current[u] = None;
        rec(u + 1, current, load, capacity, out);
        for s in 0..load.len() {
            if load[s] < capacity {
                load[s] += 1;
                current[u] = Some(s);
                rec(u + 1, current, load, capacity, out);
                load[s] -= 1;
            }
        }
        current[u] = None;
    }
    rec(0, &mut current, &mut load, capacity, &mut out);
    out
}

fn position(list: &[usize], x: usize) -> usize {
    list.iter().position(|&y| y == x).expect("complete lists")
}

/// No user and subcarrier both prefer each other to what they hold.
pub fn is_stable(owner: &[Option<usize>], prefs: &PreferenceProfile, capacity: usize) -> bool {
    for (u, list) in prefs.user_prefs.iter().enumerate() {
        let limit = owner[u].map_or(list.len(), |s| position(list, s));
        for &s in &list[..limit] {
            let holders: Vec<usize> = (0..owner.len()).filter(|&v| owner[v] == Some(s)).collect();
            if holders.len() < capacity {
                return false;
            }
            let rank = |v| position(&prefs.subcarrier_prefs[s], v);
            if holders.iter().any(|&v| rank(u) < rank(v)) {
                return false;
            }
        }
    }
    true
}

/// The stable matching every user weakly prefers to all other stable ones.
pub fn user_optimal_stable(prefs: &PreferenceProfile, capacity: usize) -> Vec<Option<usize>> {
    let users = prefs.user_prefs.len();
    let stable: Vec<_> = feasible_assignments(users, prefs.subcarrier_prefs.len(), capacity)
        .into_iter()
        .filter(|o| is_stable(o, prefs, capacity))
        .collect();
    assert!(!stable.is_empty(), "a stable matching always exists");
    let score = |u: usize, o: &[Option<usize>]| o[u].map_or(usize::MAX, |s| position(&prefs.user_prefs[u], s));
    let best: Vec<Option<usize>> = (0..users)
        .map(|u| stable.iter().min_by_key(|o| score(u, o)).unwrap()[u])
        .collect();
    assert!(stable.contains(&best), "user-optimal stable matching exists");
    best
}

/// Best total gain over assignments matching `min(users, capacity * subcarriers)` users.
pub fn brute_force_transport(gains: &[Vec<f64>], capacity: usize) -> f64 {
    let users = gains.len();
    let subcarriers = gains[0].len();
    let target = users.min(capacity * subcarriers);
    feasible_assignments(users, subcarriers, capacity)
        .iter()
        .filter(|o| o.iter().flatten().count() == target)
        .map(|o| {
            o.iter()
                .enumerate()
                .filter_map(|(u, s)| s.map(|s| gains[u][s]))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
