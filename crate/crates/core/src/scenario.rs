use std::path::Path;

use crate::config::{self, Entry};
use crate::error::{Error, Result};

/// Physical and protocol parameters of one relaying setup.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Antennas at the source.
    pub n_s: usize,
    /// Antennas at the relay.
    pub n_r: usize,
    /// Antennas at the destination.
    pub n_d: usize,
    pub k_subcarriers: usize,
    /// Total system bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Source power budget in W.
    pub p_source: f64,
    /// Energy conversion efficiency at the relay.
    pub eta: f64,
    /// Relay position as the fraction `d_SR / d_SD`.
    pub phi: f64,
    /// Source-destination reference distance.
    pub d_sd: f64,
    pub pathloss_exp: f64,
    /// Receiver noise power over the whole band, in W.
    pub noise_total_w: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n_s: 2,
            n_r: 2,
            n_d: 2,
            k_subcarriers: 2,
            bandwidth_hz: 1000.0,
            p_source: 1.0,
            eta: 1.0,
            phi: 0.5,
            d_sd: 1.0,
            pathloss_exp: 4.0,
            noise_total_w: 1e-6,
            seed: 0,
        }
    }
}

pub const SCENARIO_KEYS: &[&str] = &[
    "n_s",
    "n_r",
    "n_d",
    "k_subcarriers",
    "bandwidth_hz",
    "p_source",
    "eta",
    "phi",
    "d_sd",
    "pathloss_exp",
    "noise_total_w",
    "seed",
];

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_s", self.n_s), ("n_r", self.n_r), ("n_d", self.n_d)] {
            if n == 0 {
                return Err(Error::invalid(name, "antenna count must be at least 1"));
            }
        }
        if self.k_subcarriers == 0 {
            return Err(Error::invalid("k_subcarriers", "must be at least 1"));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::invalid("phi", format!("{} is outside (0, 1)", self.phi)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta", format!("{} is outside (0, 1]", self.eta)));
        }
        for (name, x) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("p_source", self.p_source),
            ("noise_total_w", self.noise_total_w),
            ("d_sd", self.d_sd),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(name, format!("{x} must be positive")));
            }
        }
        if !(self.pathloss_exp >= 0.0 && self.pathloss_exp.is_finite()) {
            return Err(Error::invalid("pathloss_exp", "must be nonnegative"));
        }
        Ok(())
    }

    /// Number of spatial streams per subcarrier, `min(N_S, N_R, N_D)`.
    pub fn streams(&self) -> usize {
        self.n_s.min(self.n_r).min(self.n_d)
    }

    /// Total end-to-end subchannels `K N`.
    pub fn subchannels(&self) -> usize {
        self.k_subcarriers * self.streams()
    }

    /// Per-subchannel noise, identical at relay and destination.
    pub fn noise_per_subchannel(&self) -> f64 {
        self.noise_total_w / self.k_subcarriers as f64
    }

    pub fn d_sr(&self) -> f64 {
        self.phi * self.d_sd
    }

    pub fn d_rd(&self) -> f64 {
        (1.0 - self.phi) * self.d_sd
    }

    /// Per-entry variance of the source-relay channel.
    pub fn hop1_variance(&self) -> f64 {
        self.d_sr().powf(-self.pathloss_exp)
    }

    /// Per-entry variance of the relay-destination channel.
    pub fn hop2_variance(&self) -> f64 {
        self.d_rd().powf(-self.pathloss_exp)
    }

    /// Apply one `key = value` setting. Returns `Ok(false)` for keys this type
    /// does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        use config::parse_value as p;
        match key {
            "n_s" => self.n_s = p(key, value)?,
            "n_r" => self.n_r = p(key, value)?,
            "n_d" => self.n_d = p(key, value)?,
            "k_subcarriers" => self.k_subcarriers = p(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = p(key, value)?,
            "p_source" => self.p_source = p(key, value)?,
            "eta" => self.eta = p(key, value)?,
            "phi" => self.phi = p(key, value)?,
            "d_sd" => self.d_sd = p(key, value)?,
            "pathloss_exp" => self.pathloss_exp = p(key, value)?,
            "noise_total_w" => self.noise_total_w = p(key, value)?,
            "seed" => self.seed = p(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn from_entries(entries: &[Entry], origin: &str) -> Result<Self> {
        let mut s = Scenario::default();
        for e in entries {
            if !s.set(&e.key, &e.value)? {
                return Err(Error::Config {
                    path: origin.to_string(),
                    line: e.line,
                    reason: format!("unknown key `{}`", e.key),
                });
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_entries(&config::parse_str(text, "<string>")?, "<string>")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let entries = config::parse_file(path)?;
        Self::from_entries(&entries, &path.display().to_string())
    }

    /// Render as a config file that [`Scenario::from_config_str`] accepts.
    pub fn to_config_string(&self) -> String {
        format!(
            "n_s = {}\nn_r = {}\nn_d = {}\nk_subcarriers = {}\nbandwidth_hz = {}\np_source = {}\n\
             eta = {}\nphi = {}\nd_sd = {}\npathloss_exp = {}\nnoise_total_w = {}\nseed = {}\n",
            self.n_s,
            self.n_r,
            self.n_d,
            self.k_subcarriers,
            self.bandwidth_hz,
            self.p_source,
            self.eta,
            self.phi,
            self.d_sd,
            self.pathloss_exp,
            self.noise_total_w,
            self.seed
        )
    }
}
