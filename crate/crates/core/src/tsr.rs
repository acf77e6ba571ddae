//! Closed-form quantities of the time-switching relaying protocol.
//!
//! A block of unit length is split into an energy-transfer phase of length
//! `alpha` and two information phases of length `(1 - alpha) / 2` each. The
//! relay spends everything it harvested in the first phase on forwarding.

use crate::alpf::AlpfProblem;
use crate::channel::{effective_subchannels, ChannelRealization, EffectiveSubchannels};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scenario::Scenario;

/// Gains below this are treated as exactly zero.
pub const GAIN_FLOOR: f64 = 1e-14;

/// Slack allowed on the power-budget sums of an [`Allocation`].
pub const BUDGET_TOL: f64 = 1e-9;

/// Subchannel pairing: hop-1 subchannel `n` forwards on hop-2 subchannel
/// `perm[n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    perm: Vec<usize>,
}

impl Pairing {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::invalid("pairing", format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn partner(&self, n: usize) -> usize {
        self.perm[n]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }
}

/// Decision variables of the rate maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Time-switching factor.
    pub alpha: f64,
    /// Source power fractions, indexed by hop-1 subchannel.
    pub mu: Vec<f64>,
    /// Relay power fractions, indexed by hop-2 subchannel.
    pub mu_bar: Vec<f64>,
    pub pairing: Pairing,
}

impl Allocation {
    pub fn validate(&self) -> Result<()> {
        let n = self.pairing.len();
        if self.mu.len() != n || self.mu_bar.len() != n {
            return Err(Error::invalid(
                "allocation",
                format!(
                    "length mismatch: {} pairs, {} mu, {} mu_bar",
                    n,
                    self.mu.len(),
                    self.mu_bar.len()
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("{} outside [0, 1]", self.alpha)));
        }
        for (name, v) in [("mu", &self.mu), ("mu_bar", &self.mu_bar)] {
            if v.iter().any(|&x| !(x >= -1e-12)) {
                return Err(Error::invalid(name, "negative power fraction"));
            }
            let sum: f64 = v.iter().sum();
            if sum > 1.0 + BUDGET_TOL {
                return Err(Error::invalid(name, format!("fractions sum to {sum} > 1")));
            }
        }
        Ok(())
    }
}

/// How the source spends its energy-transfer phase.
#[derive(Debug, Clone)]
pub struct EnergyPlan {
    /// Subcarrier carrying all transfer power.
    pub chosen_subcarrier: usize,
    /// Unit-norm `N_S x 1` transmit direction.
    pub beam_direction: ComplexMatrix,
    /// Largest hop-1 gain over all subcarriers.
    pub harvest_coeff: f64,
    pub eta: f64,
    pub p_source: f64,
}

impl EnergyPlan {
    /// Energy collected during the transfer phase (block length 1).
    pub fn harvested_energy(&self, alpha: f64) -> f64 {
        alpha * self.eta * self.p_source * self.harvest_coeff
    }

    /// Relay transmit power `2 alpha eta P_S lambda_max / (1 - alpha)`.
    pub fn relay_power(&self, alpha: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::AlphaDomain(alpha));
        }
        Ok(self.harvested_energy(alpha) / ((1.0 - alpha) / 2.0))
    }
}

/// Concentrate all transfer power on the strongest hop-1 eigenmode.
pub fn optimal_energy_plan(real: &ChannelRealization, scenario: &Scenario) -> EnergyPlan {
    let (chosen, top) = real
        .svd1
        .iter()
        .enumerate()
        .map(|(k, s)| (k, s.singular_values[0]))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let v = &real.svd1[chosen].v;
    let beam_direction = ComplexMatrix::from_fn(v.rows(), 1, |i, _| v.get(i, 0));
    EnergyPlan {
        chosen_subcarrier: chosen,
        beam_direction,
        harvest_coeff: top * top,
        eta: scenario.eta,
        p_source: scenario.p_source,
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Pair the i-th strongest noise-normalized hop-1 subchannel with the i-th
/// strongest noise-normalized hop-2 subchannel.
pub fn optimal_pairing(gains1: &[f64], gains2: &[f64], noise_r: f64, noise_d: f64) -> Result<Pairing> {
    if gains1.len() != gains2.len() {
        return Err(Error::invalid(
            "gains",
            format!("hop lengths differ: {} vs {}", gains1.len(), gains2.len()),
        ));
    }
    let n1: Vec<f64> = gains1.iter().map(|g| g / noise_r).collect();
    let n2: Vec<f64> = gains2.iter().map(|g| g / noise_d).collect();
    let o1 = descending_order(&n1);
    let o2 = descending_order(&n2);
    let mut perm = vec![0; gains1.len()];
    for (a, b) in o1.into_iter().zip(o2) {
        perm[a] = b;
    }
    Pairing::new(perm)
}

/// Per-pair `(hop-1 SNR, hop-2 SNR)` under an allocation.
pub fn pair_snrs(
    alloc: &Allocation,
    gains1: &[f64],
    gains2: &[f64],
    plan: &EnergyPlan,
    scenario: &Scenario,
) -> Result<Vec<(f64, f64)>> {
    alloc.validate()?;
    if gains1.len() != alloc.mu.len() || gains2.len() != alloc.mu_bar.len() {
        return Err(Error::invalid("gains", "length differs from allocation"));
    }
    let p_r = plan.relay_power(alloc.alpha)?;
    let noise = scenario.noise_per_subchannel();
    Ok((0..alloc.mu.len())
        .map(|n| {
            let m = alloc.pairing.partner(n);
            (
                scenario.p_source * alloc.mu[n] * gains1[n] / noise,
                p_r * alloc.mu_bar[m] * gains2[m] / noise,
            )
        })
        .collect())
}

/// End-to-end decode-and-forward rate in bit/s.
pub fn achievable_rate(
    alloc: &Allocation,
    gains1: &[f64],
    gains2: &[f64],
    plan: &EnergyPlan,
    scenario: &Scenario,
) -> Result<f64> {
    let snrs = pair_snrs(alloc, gains1, gains2, plan, scenario)?;
    let scale = (1.0 - alloc.alpha) * scenario.bandwidth_hz / (2.0 * scenario.k_subcarriers as f64);
    Ok(snrs
        .iter()
        .map(|&(a, b)| scale * (1.0 + a.max(0.0)).log2().min((1.0 + b.max(0.0)).log2()))
        .sum())
}

/// Non-optimized reference scheme: `alpha = 1/2`, powers proportional to gains.
pub fn benchmark_allocation(gains1: &[f64], gains2: &[f64]) -> Result<Allocation> {
    if gains1.is_empty() || gains1.len() != gains2.len() {
        return Err(Error::invalid("gains", "need two nonempty lists of equal length"));
    }
    let s1: f64 = gains1.iter().sum();
    let s2: f64 = gains2.iter().sum();
    if !(s1 > 0.0) || !(s2 > 0.0) {
        return Err(Error::ZeroGains);
    }
    Ok(Allocation {
        alpha: 0.5,
        mu: gains1.iter().map(|g| g / s1).collect(),
        mu_bar: gains2.iter().map(|g| g / s2).collect(),
        pairing: optimal_pairing(gains1, gains2, 1.0, 1.0)?,
    })
}

/// Everything the optimizers need from one realization: sorted gains, the
/// energy plan and the pairing.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    pub scenario: Scenario,
    pub subchannels: EffectiveSubchannels,
    /// Sorted hop-1 gains with values below [`GAIN_FLOOR`] zeroed.
    pub gains1: Vec<f64>,
    /// Sorted hop-2 gains with values below [`GAIN_FLOOR`] zeroed.
    pub gains2: Vec<f64>,
    pub plan: EnergyPlan,
    pub pairing: Pairing,
}

impl SystemInstance {
    pub fn new(real: &ChannelRealization, scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let subchannels = effective_subchannels(real);
        let clean = |g: &[f64]| -> Vec<f64> {
            g.iter().map(|&x| if x < GAIN_FLOOR { 0.0 } else { x }).collect()
        };
        let gains1 = clean(&subchannels.hop1.gains);
        let gains2 = clean(&subchannels.hop2.gains);
        let noise = scenario.noise_per_subchannel();
        let pairing = optimal_pairing(&gains1, &gains2, noise, noise)?;
        let plan = optimal_energy_plan(real, scenario);
        Ok(Self {
            scenario: scenario.clone(),
            subchannels,
            gains1,
            gains2,
            plan,
            pairing,
        })
    }

    pub fn len(&self) -> usize {
        self.gains1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains1.is_empty()
    }

    /// Hop-1 SNR per unit power fraction, `A_n = P_S lambda_1n / sigma_R^2`.
    pub fn a_coeffs(&self) -> Vec<f64> {
        let noise = self.scenario.noise_per_subchannel();
        self.gains1
            .iter()
            .map(|g| self.scenario.p_source * g / noise)
            .collect()
    }

    /// Hop-2 coefficient for each pair `n`, taken at the partner `perm[n]`:
    /// `B = eta P_S lambda_max lambda_2 / sigma_D^2`, so that the hop-2 SNR is
    /// `2 alpha / (1 - alpha) * B * mu_bar`.
    pub fn b_coeffs(&self) -> Vec<f64> {
        let noise = self.scenario.noise_per_subchannel();
        let base = self.plan.eta * self.plan.p_source * self.plan.harvest_coeff / noise;
        (0..self.len())
            .map(|n| base * self.gains2[self.pairing.partner(n)])
            .collect()
    }

    /// Optimization problem in natural units for this instance.
    pub fn problem(&self) -> Result<AlpfProblem> {
        AlpfProblem::new(
            self.a_coeffs(),
            self.b_coeffs(),
            self.scenario.bandwidth_hz,
            self.scenario.k_subcarriers,
        )
    }

    pub fn rate(&self, alloc: &Allocation) -> Result<f64> {
        achievable_rate(alloc, &self.gains1, &self.gains2, &self.plan, &self.scenario)
    }

    pub fn pair_snrs(&self, alloc: &Allocation) -> Result<Vec<(f64, f64)>> {
        pair_snrs(alloc, &self.gains1, &self.gains2, &self.plan, &self.scenario)
    }

    pub fn benchmark(&self) -> Result<Allocation> {
        benchmark_allocation(&self.gains1, &self.gains2)
    }

    /// Turn per-pair fractions (pair order) into an [`Allocation`].
    pub fn allocation_from_pairs(&self, alpha: f64, mu: &[f64], mu_bar_pairs: &[f64]) -> Allocation {
        let mut mu_bar = vec![0.0; self.len()];
        for (n, &x) in mu_bar_pairs.iter().enumerate() {
            mu_bar[self.pairing.partner(n)] = x;
        }
        Allocation {
            alpha,
            mu: mu.to_vec(),
            mu_bar,
            pairing: self.pairing.clone(),
        }
    }
}
