//! Rayleigh-fading MIMO channels for the two-cell layout.
//!
//! Every matrix is drawn from its own random substream, keyed by the tuple
//! `(master_seed, sample_index, cell, user, band, subcarrier, transmitter)`.
//! Generation order therefore never affects the values, which keeps Monte
//! Carlo runs reproducible when samples are spread over a worker pool.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Number of cells (base stations). Fixed.
pub const CELLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Dedicated,
    Shared,
}

impl Band {
    fn tag(self) -> u64 {
        match self {
            Band::Dedicated => 0,
            Band::Shared => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("cell {cell} has {users} users but {antennas} transmit antennas; need users >= antennas")]
    TooFewUsers {
        cell: usize,
        users: usize,
        antennas: usize,
    },
    #[error("noise variance must be positive and finite, got {0}")]
    BadNoise(f64),
}

/// Antenna and subcarrier counts of the two cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub users_per_cell: [usize; CELLS],
    pub tx_antennas: [usize; CELLS],
    pub rx_antennas: [usize; CELLS],
    pub dedicated_subcarriers: [usize; CELLS],
    pub shared_subcarriers: usize,
}

impl Topology {
    /// Both cells share the same dimensions.
    pub fn symmetric(
        users: usize,
        tx_antennas: usize,
        rx_antennas: usize,
        dedicated: usize,
        shared: usize,
    ) -> Result<Self, TopologyError> {
        let topo = Self {
            users_per_cell: [users; CELLS],
            tx_antennas: [tx_antennas; CELLS],
            rx_antennas: [rx_antennas; CELLS],
            dedicated_subcarriers: [dedicated; CELLS],
            shared_subcarriers: shared,
        };
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        for cell in 0..CELLS {
            if self.users_per_cell[cell] == 0 {
                return Err(TopologyError::ZeroCount("users_per_cell"));
            }
            if self.tx_antennas[cell] == 0 {
                return Err(TopologyError::ZeroCount("tx_antennas"));
            }
            if self.rx_antennas[cell] == 0 {
                return Err(TopologyError::ZeroCount("rx_antennas"));
            }
            if self.dedicated_subcarriers[cell] == 0 {
                return Err(TopologyError::ZeroCount("dedicated_subcarriers"));
            }
            if self.users_per_cell[cell] < self.tx_antennas[cell] {
                return Err(TopologyError::TooFewUsers {
                    cell,
                    users: self.users_per_cell[cell],
                    antennas: self.tx_antennas[cell],
                });
            }
        }
        Ok(())
    }

    /// Subcarrier count of `band` as seen from `cell`.
    pub fn subcarriers(&self, cell: usize, band: Band) -> usize {
        match band {
            Band::Dedicated => self.dedicated_subcarriers[cell],
            Band::Shared => self.shared_subcarriers,
        }
    }
}

/// Derives a seed for one substream from a master seed and a key tuple.
///
/// Each key word is folded in with a SplitMix64 finaliser, so neighbouring
/// tuples give unrelated seeds.
pub fn substream_seed(master_seed: u64, key: &[u64]) -> u64 {
    let mut h = splitmix(master_seed ^ 0x5851_f42d_4c95_7f2d);
    for &k in key {
        h = splitmix(h ^ splitmix(k.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for the given key tuple.
pub fn substream(master_seed: u64, key: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master_seed, key))
}

/// Matrix of i.i.d. unit-variance circularly-symmetric complex Gaussians.
pub fn draw_rayleigh<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= 1 && cols >= 1, "channel shape must be positive");
    let std = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * std, im * std)
        })
        .collect();
    ComplexMatrix::new(rows, cols, data).expect("gaussian draws are finite")
}

/// All channel matrices of one Monte Carlo sample.
///
/// Dedicated-band entries exist only for the serving base station. Every
/// shared-band entry exists for both base stations, since a user on a shared
/// subcarrier hears the other cell too.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    topology: Topology,
    noise_variance: f64,
    // [cell][user][subcarrier]
    dedicated: Vec<Vec<Vec<ComplexMatrix>>>,
    // [cell][user][subcarrier][transmitter]
    shared: Vec<Vec<Vec<[ComplexMatrix; CELLS]>>>,
}

impl ChannelSet {
    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Channel from `transmitter`'s base station to `user` of `cell`.
    ///
    /// Dedicated-band lookups only succeed for the user's own base station.
    pub fn get(
        &self,
        cell: usize,
        user: usize,
        band: Band,
        subcarrier: usize,
        transmitter: usize,
    ) -> Option<&ComplexMatrix> {
        match band {
            Band::Dedicated if transmitter == cell => self
                .dedicated
                .get(cell)?
                .get(user)?
                .get(subcarrier),
            Band::Dedicated => None,
            Band::Shared => self
                .shared
                .get(cell)?
                .get(user)?
                .get(subcarrier)?
                .get(transmitter),
        }
    }

    /// Channel from the serving base station.
    pub fn own(&self, cell: usize, user: usize, band: Band, subcarrier: usize) -> Option<&ComplexMatrix> {
        self.get(cell, user, band, subcarrier, cell)
    }

    pub fn dedicated_count(&self) -> usize {
        self.dedicated.iter().flatten().map(Vec::len).sum()
    }

    pub fn shared_count(&self) -> usize {
        self.shared.iter().flatten().map(|s| s.len() * CELLS).sum()
    }

    /// Every stored matrix with its `(cell, user, band, subcarrier, transmitter)` key.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, Band, usize, usize), &ComplexMatrix)> {
        let ded = self.dedicated.iter().enumerate().flat_map(|(c, users)| {
            users.iter().enumerate().flat_map(move |(u, subs)| {
                subs.iter()
                    .enumerate()
                    .map(move |(s, h)| ((c, u, Band::Dedicated, s, c), h))
            })
        });
        let sh = self.shared.iter().enumerate().flat_map(|(c, users)| {
            users.iter().enumerate().flat_map(move |(u, subs)| {
                subs.iter().enumerate().flat_map(move |(s, txs)| {
                    txs.iter()
                        .enumerate()
                        .map(move |(t, h)| ((c, u, Band::Shared, s, t), h))
                })
            })
        });
        ded.chain(sh)
    }
}

fn draw_keyed(master_seed: u64, sample_index: u64, key: [u64; 5], rows: usize, cols: usize) -> ComplexMatrix {
    let mut rng = substream(
        master_seed,
        &[sample_index, key[0], key[1], key[2], key[3], key[4]],
    );
    draw_rayleigh(&mut rng, rows, cols)
}

/// Draws the channel set of one Monte Carlo sample.
pub fn build_channel_set(
    topo: &Topology,
    noise_variance: f64,
    master_seed: u64,
    sample_index: u64,
) -> Result<ChannelSet, TopologyError> {
    topo.validate()?;
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(TopologyError::BadNoise(noise_variance));
    }
    let mut dedicated = Vec::with_capacity(CELLS);
    let mut shared = Vec::with_capacity(CELLS);
    for cell in 0..CELLS {
        let rx = topo.rx_antennas[cell];
        let ded_cell = (0..topo.users_per_cell[cell])
            .map(|user| {
                (0..topo.dedicated_subcarriers[cell])
                    .map(|sc| {
                        let key = [cell as u64, user as u64, Band::Dedicated.tag(), sc as u64, cell as u64];
                        draw_keyed(master_seed, sample_index, key, rx, topo.tx_antennas[cell])
                    })
                    .collect()
            })
            .collect();
        let sh_cell = (0..topo.users_per_cell[cell])
            .map(|user| {
                (0..topo.shared_subcarriers)
                    .map(|sc| {
                        std::array::from_fn(|tx| {
                            let key = [cell as u64, user as u64, Band::Shared.tag(), sc as u64, tx as u64];
                            draw_keyed(master_seed, sample_index, key, rx, topo.tx_antennas[tx])
                        })
                    })
                    .collect()
            })
            .collect();
        dedicated.push(ded_cell);
        shared.push(sh_cell);
    }
    Ok(ChannelSet {
        topology: topo.clone(),
        noise_variance,
        dedicated,
        shared,
    })
}
