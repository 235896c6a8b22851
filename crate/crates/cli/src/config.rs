//! Run configuration: TOML with flat sections, human units at the boundary
//! (GHz/MHz/kHz/mK), SI (rad/s, K) internally. Unknown keys are rejected;
//! range errors carry the offending line number.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use qtm_core::device::{occupation_from_temperature, DeviceParams, TWO_PI};
use qtm_core::operators::HilbertDims;
use qtm_core::spectra::Mode;

fn default_seed() -> u64 {
    0
}
fn default_threads() -> usize {
    1
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub device: DeviceSection,
    #[serde(default)]
    pub heat_sweep: HeatSweepSection,
    #[serde(default)]
    pub cop_vs_g: CopVsGSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub transport: TransportSection,
    #[serde(default)]
    pub fit_reflection: Option<FitReflectionSection>,
    #[serde(default)]
    pub fit_dephasing: FitDephasingSection,
    #[serde(default)]
    pub mollow: MollowSection,
}

impl Default for RawConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config parses to defaults")
    }
}

/// Device parameters in the units the hardware papers quote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(rename = "omega_GHz", default = "DeviceSection::d_omega")]
    pub omega_ghz: f64,
    #[serde(rename = "g_MHz", default = "DeviceSection::d_g")]
    pub g_mhz: f64,
    #[serde(rename = "alpha_MHz", default = "DeviceSection::d_alpha")]
    pub alpha_mhz: f64,
    #[serde(rename = "gamma_s_MHz", default = "DeviceSection::d_gamma_s")]
    pub gamma_s_mhz: f64,
    #[serde(rename = "gamma_a_MHz", default = "DeviceSection::d_gamma_a")]
    pub gamma_a_mhz: f64,
    #[serde(rename = "gamma_s_prime_kHz", default = "DeviceSection::d_gamma_s_prime")]
    pub gamma_s_prime_khz: f64,
    #[serde(rename = "gamma_a_prime_kHz", default = "DeviceSection::d_gamma_a_prime")]
    pub gamma_a_prime_khz: f64,
    #[serde(rename = "gamma_phi_MHz", default = "DeviceSection::d_gamma_phi")]
    pub gamma_phi_mhz: f64,
    #[serde(rename = "t_s_mK", default = "DeviceSection::d_t_s")]
    pub t_s_mk: f64,
    #[serde(rename = "t_a_mK", default = "DeviceSection::d_t_a")]
    pub t_a_mk: f64,
    #[serde(default = "DeviceSection::d_levels")]
    pub levels: usize,
}

impl DeviceSection {
    fn d_omega() -> f64 {
        5.866
    }
    fn d_g() -> f64 {
        560.1
    }
    fn d_alpha() -> f64 {
        -133.0
    }
    fn d_gamma_s() -> f64 {
        2.87
    }
    fn d_gamma_a() -> f64 {
        2.83
    }
    fn d_gamma_s_prime() -> f64 {
        98.0
    }
    fn d_gamma_a_prime() -> f64 {
        97.0
    }
    fn d_gamma_phi() -> f64 {
        0.94
    }
    fn d_t_s() -> f64 {
        177.0
    }
    fn d_t_a() -> f64 {
        39.0
    }
    fn d_levels() -> usize {
        2
    }
}

impl Default for DeviceSection {
    fn default() -> Self {
        Self {
            omega_ghz: Self::d_omega(),
            g_mhz: Self::d_g(),
            alpha_mhz: Self::d_alpha(),
            gamma_s_mhz: Self::d_gamma_s(),
            gamma_a_mhz: Self::d_gamma_a(),
            gamma_s_prime_khz: Self::d_gamma_s_prime(),
            gamma_a_prime_khz: Self::d_gamma_a_prime(),
            gamma_phi_mhz: Self::d_gamma_phi(),
            t_s_mk: Self::d_t_s(),
            t_a_mk: Self::d_t_a(),
            levels: Self::d_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSweepSection {
    #[serde(rename = "t_a_min_mK", default = "HeatSweepSection::d_min")]
    pub t_a_min_mk: f64,
    #[serde(rename = "t_a_max_mK", default = "HeatSweepSection::d_max")]
    pub t_a_max_mk: f64,
    #[serde(default = "HeatSweepSection::d_points")]
    pub points: usize,
}

impl HeatSweepSection {
    fn d_min() -> f64 {
        39.0
    }
    fn d_max() -> f64 {
        217.0
    }
    fn d_points() -> usize {
        101
    }
}

impl Default for HeatSweepSection {
    fn default() -> Self {
        Self {
            t_a_min_mk: Self::d_min(),
            t_a_max_mk: Self::d_max(),
            points: Self::d_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopVsGSection {
    #[serde(rename = "g_min_MHz", default = "CopVsGSection::d_min")]
    pub g_min_mhz: f64,
    #[serde(rename = "g_max_MHz", default = "CopVsGSection::d_max")]
    pub g_max_mhz: f64,
    #[serde(default = "CopVsGSection::d_points")]
    pub points: usize,
    #[serde(default = "CopVsGSection::d_offset")]
    pub ratio_offset: f64,
}

impl CopVsGSection {
    fn d_min() -> f64 {
        560.1
    }
    fn d_max() -> f64 {
        2000.0
    }
    fn d_points() -> usize {
        25
    }
    fn d_offset() -> f64 {
        2e-3
    }
}

impl Default for CopVsGSection {
    fn default() -> Self {
        Self {
            g_min_mhz: Self::d_min(),
            g_max_mhz: Self::d_max(),
            points: Self::d_points(),
            ratio_offset: Self::d_offset(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "SpectrumSection::d_mode")]
    pub mode: String,
    #[serde(rename = "rabi_MHz", default = "SpectrumSection::d_rabi")]
    pub rabi_mhz: f64,
    #[serde(rename = "span_MHz", default = "SpectrumSection::d_span")]
    pub span_mhz: f64,
    #[serde(default = "SpectrumSection::d_points")]
    pub points: usize,
    #[serde(default)]
    pub include_parasitic: bool,
}

impl SpectrumSection {
    fn d_mode() -> String {
        "s".into()
    }
    fn d_rabi() -> f64 {
        1.47
    }
    fn d_span() -> f64 {
        20.0
    }
    fn d_points() -> usize {
        801
    }
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            mode: Self::d_mode(),
            rabi_mhz: Self::d_rabi(),
            span_mhz: Self::d_span(),
            points: Self::d_points(),
            include_parasitic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    #[serde(rename = "rabi_MHz", default = "SpectrumSection::d_rabi")]
    pub rabi_mhz: f64,
    #[serde(rename = "gamma_phi_min_MHz", default = "TransportSection::d_min")]
    pub gamma_phi_min_mhz: f64,
    #[serde(rename = "gamma_phi_max_MHz", default = "TransportSection::d_max")]
    pub gamma_phi_max_mhz: f64,
    #[serde(default = "TransportSection::d_points")]
    pub points: usize,
    #[serde(default = "TransportSection::d_include_zero")]
    pub include_zero: bool,
    #[serde(rename = "span_MHz", default = "SpectrumSection::d_span")]
    pub span_mhz: f64,
    #[serde(default = "SpectrumSection::d_points")]
    pub spectrum_points: usize,
}

impl TransportSection {
    fn d_min() -> f64 {
        0.02
    }
    fn d_max() -> f64 {
        50.0
    }
    fn d_points() -> usize {
        25
    }
    fn d_include_zero() -> bool {
        true
    }
}

impl Default for TransportSection {
    fn default() -> Self {
        Self {
            rabi_mhz: SpectrumSection::d_rabi(),
            gamma_phi_min_mhz: Self::d_min(),
            gamma_phi_max_mhz: Self::d_max(),
            points: Self::d_points(),
            include_zero: Self::d_include_zero(),
            span_mhz: SpectrumSection::d_span(),
            spectrum_points: SpectrumSection::d_points(),
        }
    }
}

/// Reflection-fit settings. When the section appears in a config, the probe
/// `powers` must be spelled out; the absent section falls back to a
/// synthetic four-power ladder spanning the saturation knee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReflectionSection {
    /// Probe powers (arbitrary linear units).
    pub powers: Vec<f64>,
    #[serde(default = "FitReflectionSection::d_mode")]
    pub mode: String,
    /// Ingest measured traces from CSV instead of synthesizing.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(rename = "span_MHz", default = "FitReflectionSection::d_span")]
    pub span_mhz: f64,
    #[serde(default = "FitReflectionSection::d_points")]
    pub points: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Power→Ω² factor used to synthesize traces.
    #[serde(default = "FitReflectionSection::d_factor")]
    pub pow_factor: f64,
}

impl FitReflectionSection {
    fn d_mode() -> String {
        "a".into()
    }
    fn d_span() -> f64 {
        60.0
    }
    fn d_points() -> usize {
        241
    }
    fn d_factor() -> f64 {
        3.7e11
    }
}

impl Default for FitReflectionSection {
    fn default() -> Self {
        Self {
            powers: vec![10.0, 150.0, 500.0, 2000.0],
            mode: Self::d_mode(),
            input: None,
            span_mhz: Self::d_span(),
            points: Self::d_points(),
            noise_sigma: 0.0,
            pow_factor: Self::d_factor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDephasingSection {
    #[serde(default = "FitDephasingSection::d_noise_powers")]
    pub noise_powers: Vec<f64>,
    /// Synthesis truth Γφ = κ_φ·P.
    #[serde(rename = "kappa_phi_MHz", default = "FitDephasingSection::d_kappa")]
    pub kappa_phi_mhz: f64,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(rename = "span_MHz", default = "FitDephasingSection::d_span")]
    pub span_mhz: f64,
    #[serde(default = "FitDephasingSection::d_points")]
    pub points: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "one")]
    pub probe_power: f64,
}

impl FitDephasingSection {
    fn d_noise_powers() -> Vec<f64> {
        vec![0.0, 1.0, 2.0, 3.0, 4.0]
    }
    fn d_kappa() -> f64 {
        0.32
    }
    fn d_span() -> f64 {
        50.0
    }
    fn d_points() -> usize {
        221
    }
}

impl Default for FitDephasingSection {
    fn default() -> Self {
        Self {
            noise_powers: Self::d_noise_powers(),
            kappa_phi_mhz: Self::d_kappa(),
            input: None,
            span_mhz: Self::d_span(),
            points: Self::d_points(),
            noise_sigma: 0.0,
            probe_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollowSection {
    #[serde(rename = "rabi_MHz", default = "MollowSection::d_rabi")]
    pub rabi_mhz: f64,
    #[serde(default = "MollowSection::d_mode")]
    pub mode: String,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(rename = "span_MHz", default = "MollowSection::d_span")]
    pub span_mhz: f64,
    #[serde(default = "MollowSection::d_points")]
    pub points: usize,
    /// Synthetic y-axis gain applied before the round-trip fit.
    #[serde(default = "one")]
    pub scale: f64,
}

impl MollowSection {
    fn d_rabi() -> f64 {
        30.0
    }
    fn d_mode() -> String {
        "s".into()
    }
    fn d_span() -> f64 {
        120.0
    }
    fn d_points() -> usize {
        601
    }
}

impl Default for MollowSection {
    fn default() -> Self {
        Self {
            rabi_mhz: Self::d_rabi(),
            mode: Self::d_mode(),
            input: None,
            span_mhz: Self::d_span(),
            points: Self::d_points(),
            scale: 1.0,
        }
    }
}

/// Validated configuration with SI-converted device parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub device: DeviceParams,
    /// Waveguide temperatures, kelvin.
    pub t_s_k: f64,
    pub t_a_k: f64,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.raw.seed
    }

    pub fn threads(&self) -> usize {
        self.raw.threads
    }
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s.to_ascii_lowercase().as_str() {
        "s" => Ok(Mode::S),
        "a" => Ok(Mode::A),
        other => bail!("mode must be \"s\" or \"a\", got \"{other}\""),
    }
}

/// Line number (1-based) of the first `key = ...` assignment in the text.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(idx + 1);
            }
        }
    }
    None
}

fn range_err(text: &str, key: &str, message: &str) -> anyhow::Error {
    match line_of_key(text, key) {
        Some(line) => anyhow!("line {line}: {key} {message}"),
        None => anyhow!("{key} {message}"),
    }
}

/// Parse and validate a config. `base_dir` resolves relative input paths;
/// referenced input files must exist.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
    resolve_config(raw, text, base_dir)
}

fn resolve_config(mut raw: RawConfig, text: &str, base_dir: &Path) -> Result<RunConfig> {
    let d = &raw.device;
    let checks: [(&str, f64, bool); 10] = [
        ("omega_GHz", d.omega_ghz, d.omega_ghz > 0.0),
        ("g_MHz", d.g_mhz, d.g_mhz > 0.0),
        ("gamma_s_MHz", d.gamma_s_mhz, d.gamma_s_mhz >= 0.0),
        ("gamma_a_MHz", d.gamma_a_mhz, d.gamma_a_mhz >= 0.0),
        (
            "gamma_s_prime_kHz",
            d.gamma_s_prime_khz,
            d.gamma_s_prime_khz >= 0.0,
        ),
        (
            "gamma_a_prime_kHz",
            d.gamma_a_prime_khz,
            d.gamma_a_prime_khz >= 0.0,
        ),
        ("gamma_phi_MHz", d.gamma_phi_mhz, d.gamma_phi_mhz >= 0.0),
        ("t_s_mK", d.t_s_mk, d.t_s_mk > 0.0),
        ("t_a_mK", d.t_a_mk, d.t_a_mk > 0.0),
        ("ratio_offset", raw.cop_vs_g.ratio_offset, raw.cop_vs_g.ratio_offset > 0.0),
    ];
    for (key, value, ok) in checks {
        if !value.is_finite() || !ok {
            return Err(range_err(text, key, &format!("out of range (value {value})")));
        }
    }
    if d.levels != 2 && d.levels != 3 {
        return Err(range_err(text, "levels", "must be 2 or 3"));
    }
    if d.omega_ghz * 1e3 <= d.g_mhz {
        return Err(range_err(
            text,
            "g_MHz",
            "must stay below omega (antisymmetric mode frequency)",
        ));
    }
    if raw.threads == 0 {
        return Err(range_err(text, "threads", "must be >= 1"));
    }
    for (key, points) in [
        ("points", raw.heat_sweep.points),
        ("points", raw.spectrum.points),
        ("points", raw.transport.points),
        ("points", raw.cop_vs_g.points),
    ] {
        if points < 2 {
            return Err(range_err(text, key, "must be >= 2"));
        }
    }
    if raw.heat_sweep.t_a_min_mk >= raw.heat_sweep.t_a_max_mk {
        return Err(range_err(text, "t_a_min_mK", "must be below t_a_max_mK"));
    }
    if raw.heat_sweep.t_a_min_mk <= 0.0 {
        return Err(range_err(text, "t_a_min_mK", "must be positive"));
    }
    if raw.cop_vs_g.g_min_mhz <= 0.0 || raw.cop_vs_g.g_min_mhz >= raw.cop_vs_g.g_max_mhz {
        return Err(range_err(text, "g_min_MHz", "must satisfy 0 < min < max"));
    }
    if raw.cop_vs_g.g_max_mhz >= d.omega_ghz * 1e3 {
        return Err(range_err(text, "g_max_MHz", "must stay below omega"));
    }
    parse_mode(&raw.spectrum.mode)?;
    parse_mode(&raw.mollow.mode)?;
    if let Some(section) = &raw.fit_reflection {
        parse_mode(&section.mode)?;
        if section.powers.len() < 2 {
            return Err(range_err(text, "powers", "needs >= 2 probe power levels"));
        }
    }

    // Referenced input files must exist.
    let inputs: Vec<Option<&mut Option<PathBuf>>> = vec![
        raw.fit_reflection.as_mut().map(|s| &mut s.input),
        Some(&mut raw.fit_dephasing.input),
        Some(&mut raw.mollow.input),
    ];
    for slot in inputs.into_iter().flatten() {
        if let Some(p) = slot {
            let resolved = if p.is_relative() {
                base_dir.join(&p)
            } else {
                p.clone()
            };
            if !resolved.exists() {
                bail!("referenced input file does not exist: {}", resolved.display());
            }
            *p = resolved;
        }
    }

    let device = device_params(&raw.device)?;
    device
        .validate()
        .map_err(|e| anyhow!("device parameters: {e}"))?;
    Ok(RunConfig {
        t_s_k: raw.device.t_s_mk * 1e-3,
        t_a_k: raw.device.t_a_mk * 1e-3,
        device,
        raw,
    })
}

fn device_params(d: &DeviceSection) -> Result<DeviceParams> {
    let omega = TWO_PI * d.omega_ghz * 1e9;
    let g = TWO_PI * d.g_mhz * 1e6;
    let dims = if d.levels == 2 {
        HilbertDims::two_qubits()
    } else {
        HilbertDims::two_transmons()
    };
    let mut p = DeviceParams {
        omega,
        g,
        alpha: TWO_PI * d.alpha_mhz * 1e6,
        gamma_s: TWO_PI * d.gamma_s_mhz * 1e6,
        gamma_a: TWO_PI * d.gamma_a_mhz * 1e6,
        gamma_s_prime: TWO_PI * d.gamma_s_prime_khz * 1e3,
        gamma_a_prime: TWO_PI * d.gamma_a_prime_khz * 1e3,
        gamma_phi: TWO_PI * d.gamma_phi_mhz * 1e6,
        n_s: 0.0,
        n_a: 0.0,
        dims,
    };
    p.n_s = occupation_from_temperature(d.t_s_mk * 1e-3, p.omega_s())
        .context("t_s_mK out of range")?;
    p.n_a = occupation_from_temperature(d.t_a_mk * 1e-3, p.omega_a())
        .context("t_a_mK out of range")?;
    Ok(p)
}

/// Serialize the validated raw config back to TOML.
pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string_pretty(&cfg.raw).context("serializing config")
}
