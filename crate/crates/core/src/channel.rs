//! Rayleigh-faded, path-loss scaled MIMO-OFDM channel realizations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, SvdResult};
use crate::scenario::Scenario;

/// Where a flattened subchannel lives: subcarrier `k` and spatial layer `l`
/// (both zero based). The flattened index is `n = k * N + l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubchannelIndex {
    pub subcarrier: usize,
    pub layer: usize,
}

/// Squared singular values of one hop with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GainList {
    pub gains: Vec<f64>,
    pub origin: Vec<SubchannelIndex>,
}

impl GainList {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Same entries, sorted by descending gain (stable for ties).
    pub fn sorted_desc(&self) -> GainList {
        let mut order: Vec<usize> = (0..self.gains.len()).collect();
        order.sort_by(|&a, &b| self.gains[b].total_cmp(&self.gains[a]));
        GainList {
            gains: order.iter().map(|&i| self.gains[i]).collect(),
            origin: order.iter().map(|&i| self.origin[i]).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Source-relay matrices, `N_R x N_S`, one per subcarrier.
    pub h1: Vec<ComplexMatrix>,
    /// Relay-destination matrices, `N_D x N_R`, one per subcarrier.
    pub h2: Vec<ComplexMatrix>,
    pub svd1: Vec<SvdResult>,
    pub svd2: Vec<SvdResult>,
    /// Flattened hop-1 gains in `(k, l)` order, `K N` entries.
    pub gains1: GainList,
    /// Flattened hop-2 gains in `(k, l)` order, `K N` entries.
    pub gains2: GainList,
    /// Streams per subcarrier `N`.
    pub streams: usize,
}

/// Both hops' gains sorted descending; `origin` maps back to `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSubchannels {
    pub hop1: GainList,
    pub hop2: GainList,
}

fn flatten(svds: &[SvdResult], streams: usize) -> GainList {
    let mut gains = Vec::with_capacity(svds.len() * streams);
    let mut origin = Vec::with_capacity(svds.len() * streams);
    for (k, s) in svds.iter().enumerate() {
        for l in 0..streams {
            let sv = s.singular_values[l];
            gains.push(sv * sv);
            origin.push(SubchannelIndex {
                subcarrier: k,
                layer: l,
            });
        }
    }
    GainList { gains, origin }
}

impl ChannelRealization {
    /// Assemble from explicit matrices. `streams` is clipped to the smallest
    /// matrix dimension.
    pub fn from_matrices(
        h1: Vec<ComplexMatrix>,
        h2: Vec<ComplexMatrix>,
        streams: usize,
    ) -> Result<Self> {
        if h1.is_empty() || h1.len() != h2.len() {
            return Err(Error::InvalidShape(format!(
                "need the same nonzero number of subcarriers on both hops, got {} and {}",
                h1.len(),
                h2.len()
            )));
        }
        let (n_r, n_s) = h1[0].shape();
        let (n_d, n_r2) = h2[0].shape();
        if n_r != n_r2 {
            return Err(Error::InvalidShape(format!(
                "hop 1 has {n_r} relay antennas, hop 2 has {n_r2}"
            )));
        }
        if h1.iter().any(|m| m.shape() != (n_r, n_s)) || h2.iter().any(|m| m.shape() != (n_d, n_r)) {
            return Err(Error::InvalidShape("subcarrier matrices differ in shape".into()));
        }
        let streams = streams.min(n_s).min(n_r).min(n_d);
        if streams == 0 {
            return Err(Error::InvalidShape("zero streams".into()));
        }
        let svd1 = h1.iter().map(ComplexMatrix::svd).collect::<Result<Vec<_>>>()?;
        let svd2 = h2.iter().map(ComplexMatrix::svd).collect::<Result<Vec<_>>>()?;
        let gains1 = flatten(&svd1, streams);
        let gains2 = flatten(&svd2, streams);
        Ok(Self {
            h1,
            h2,
            svd1,
            svd2,
            gains1,
            gains2,
            streams,
        })
    }

    pub fn k_subcarriers(&self) -> usize {
        self.h1.len()
    }
}

fn rayleigh_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> ComplexMatrix {
    let sd = (variance / 2.0).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(sd * re, sd * im)
    })
}

/// Draw one realization: i.i.d. `CN(0, d^-pathloss_exp)` entries per hop.
pub fn generate<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<ChannelRealization> {
    scenario.validate()?;
    let v1 = scenario.hop1_variance();
    let v2 = scenario.hop2_variance();
    let k = scenario.k_subcarriers;
    let mut h1 = Vec::with_capacity(k);
    let mut h2 = Vec::with_capacity(k);
    for _ in 0..k {
        h1.push(rayleigh_matrix(rng, scenario.n_r, scenario.n_s, v1));
        h2.push(rayleigh_matrix(rng, scenario.n_d, scenario.n_r, v2));
    }
    ChannelRealization::from_matrices(h1, h2, scenario.streams())
}

/// [`generate`] with a fresh generator seeded from `seed`.
pub fn generate_seeded(scenario: &Scenario, seed: u64) -> Result<ChannelRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate(scenario, &mut rng)
}

pub fn effective_subchannels(real: &ChannelRealization) -> EffectiveSubchannels {
    EffectiveSubchannels {
        hop1: real.gains1.sorted_desc(),
        hop2: real.gains2.sorted_desc(),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one Monte Carlo trial:
/// `splitmix64(splitmix64(splitmix64(master) ^ sweep_idx) ^ trial)`.
///
/// Each trial's stream depends only on its own coordinates, so adding sweep
/// points or trials leaves existing ones untouched.
pub fn trial_seed(master: u64, sweep_idx: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ sweep_idx) ^ trial)
}
