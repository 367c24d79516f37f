//! Experiment configuration: TOML (or JSON) with one table per subcommand.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qp_spectra::ldt::Target;
use qp_spectra::operator::{FourierTerm, Potential};
use qp_spectra::torus::{Frequency, SamplePlan, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub potential: PotentialSpec,
    pub frequency: FrequencySpec,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub lyap: LyapConfig,
    #[serde(default)]
    pub ldt: LdtConfig,
    #[serde(default)]
    pub green: GreenConfig,
    #[serde(default)]
    pub localize: LocalizeConfig,
    #[serde(default)]
    pub stabilize: StabilizeConfig,
    #[serde(default)]
    pub ndr: NdrConfig,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default)]
    pub prep: PrepConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub homog: HomogConfig,
    #[serde(default)]
    pub selftest: SelftestConfig,
}

fn default_seed() -> u64 {
    1
}

/// A named preset (`"two-cos 5"`, `"amo 3"`) or explicit Fourier terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_rho() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub k: Vec<i32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub omega: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub phases: usize,
    pub scheme: Scheme,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            phases: 200,
            scheme: Scheme::LowDiscrepancy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub sigma: f64,
    pub tau: f64,
    /// Overrides the Lyapunov scan wherever `γ` is needed.
    pub gamma: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            sigma: 0.25,
            tau: 0.25,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapConfig {
    pub scales: Vec<usize>,
    pub energies: Vec<f64>,
    /// Block length of the multiscale estimate.
    pub block: usize,
}

impl Default for LyapConfig {
    fn default() -> Self {
        LyapConfig {
            scales: vec![32, 64, 128, 256, 512, 1024],
            energies: vec![-2.0, 0.3, 4.0],
            block: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdtConfig {
    pub scales: Vec<usize>,
    pub p: Vec<f64>,
    pub energies: Vec<f64>,
    pub samples: usize,
    pub target: Target,
}

impl Default for LdtConfig {
    fn default() -> Self {
        LdtConfig {
            scales: vec![100, 200, 400],
            p: vec![0.6],
            energies: vec![0.5],
            samples: 500,
            target: Target::TransferNorm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenConfig {
    pub draws: usize,
    pub max_n: usize,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig { draws: 200, max_n: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizeConfig {
    pub n: usize,
    pub samples: usize,
    pub eps_mass: f64,
    pub guard: usize,
    pub c_sep: f64,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        LocalizeConfig {
            n: 500,
            samples: 20,
            eps_mass: 1e-6,
            guard: 5,
            c_sep: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilizeConfig {
    pub n: usize,
    pub cap: usize,
    pub samples: usize,
}

impl Default for StabilizeConfig {
    fn default() -> Self {
        StabilizeConfig { n: 10, cap: 2000, samples: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NdrConfig {
    pub ell: usize,
    pub span: (i64, i64),
    pub constant: f64,
    pub energies: Vec<f64>,
    /// `(C̱_k, C̄_k)` pairs of the lacunary ladder.
    pub ladder: Vec<(f64, f64)>,
    pub c_top: f64,
}

impl Default for NdrConfig {
    fn default() -> Self {
        NdrConfig {
            ell: 20,
            span: (1, 500),
            constant: 1.0,
            energies: vec![-1.0, 0.4, 2.0],
            ladder: vec![(1.0, 2.0), (3.0, 4.0)],
            c_top: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    pub ell: usize,
    pub n: usize,
    pub energy: f64,
    pub frequencies: usize,
    pub phases: usize,
    pub t0: Vec<f64>,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        ResonanceConfig {
            ell: 16,
            n: 800,
            energy: 0.4,
            frequencies: 12,
            phases: 3,
            t0: vec![0.0, 10.0, 50.0, 200.0, 400.0, 799.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepConfig {
    pub length: usize,
    pub disks: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig { length: 40, disks: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub scales: Vec<usize>,
    pub s: f64,
    pub k0: usize,
    pub window: (f64, f64),
    pub phases: usize,
    pub reference_phases: usize,
    /// Overrides `ρ₀ = exp(−N^{1/4})`.
    pub rho0: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            scales: vec![20, 40, 80],
            s: 1.25,
            k0: 1,
            window: (-1.0, 1.0),
            phases: 200,
            reference_phases: 2000,
            rho0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomogConfig {
    pub n: usize,
    pub s: f64,
    pub k0: usize,
    pub window: (f64, f64),
    pub phases: usize,
    pub deltas: Vec<f64>,
    pub samples: usize,
    pub rho0: Option<f64>,
}

impl Default for HomogConfig {
    fn default() -> Self {
        HomogConfig {
            n: 40,
            s: 1.25,
            k0: 1,
            window: (-1.0, 1.0),
            phases: 200,
            deltas: vec![0.1, 0.01],
            samples: 50,
            rho0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    pub profile: Profile,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { profile: Profile::Quick }
    }
}

/// Parses `"two-cos 5"` or `"amo 3"`.
pub fn parse_preset(text: &str) -> Result<Potential> {
    let mut words = text.split_whitespace();
    let name = words.next().ok_or_else(|| anyhow!("potential.preset: empty preset"))?;
    let lambda: f64 = match words.next() {
        Some(w) => w.parse().with_context(|| format!("potential.preset: bad coupling `{w}`"))?,
        None => 1.0,
    };
    if words.next().is_some() {
        bail!("potential.preset: expected `<name> <λ>`, got `{text}`");
    }
    match name {
        "two-cos" => Ok(Potential::two_cos(lambda)),
        "amo" => Ok(Potential::amo(lambda)),
        _ => bail!("potential.preset: unknown preset `{name}` (expected `two-cos` or `amo`)"),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("{}", path.display()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn potential(&self) -> Result<Potential> {
        let p = &self.potential;
        let v = match (&p.preset, p.terms.is_empty()) {
            (Some(name), true) => parse_preset(name)?,
            (None, false) => {
                let dim = p.dim.unwrap_or(p.terms[0].k.len());
                let terms: Vec<FourierTerm> = p
                    .terms
                    .iter()
                    .map(|t| FourierTerm::new(t.k.clone(), Complex64::new(t.re, t.im)))
                    .collect();
                Potential::new(dim, &terms, p.rho).context("potential.terms")?
            }
            (Some(_), false) => bail!("potential: give either `preset` or `terms`, not both"),
            (None, true) => bail!("potential: one of `preset` or `terms` is required"),
        };
        Ok(if p.preset.is_some() { v.with_rho(p.rho) } else { v })
    }

    pub fn frequency(&self) -> Result<Frequency> {
        let f = &self.frequency;
        Frequency::new(f.omega.clone(), f.a, f.b).map_err(|e| anyhow!("frequency: {e}"))
    }

    /// The phase plan for stream `stream`; distinct streams use distinct
    /// seeds derived from the configured one.
    pub fn plan(&self, count: usize, stream: u64) -> Result<SamplePlan> {
        let plan = SamplePlan::new(self.potential()?.dim(), count, self.sampling.scheme)
            .with_seed(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream));
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.potential()?;
        let w = self.frequency()?;
        if v.dim() != w.dim() {
            bail!("frequency.omega: has {} coordinates but the potential lives on T^{}", w.dim(), v.dim());
        }
        if self.sampling.phases == 0 {
            bail!("sampling.phases: must be at least 1");
        }
        let p = &self.params;
        if !(p.sigma > 0.0 && p.sigma < 1.0) {
            bail!("params.sigma: must lie in (0, 1)");
        }
        if !(p.tau > 0.0 && p.tau < 1.0) {
            bail!("params.tau: must lie in (0, 1)");
        }
        if self.ldt.p.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            bail!("ldt.p: every exponent must lie in (0, 1)");
        }
        if self.ldt.scales.iter().any(|&n| n < 2) {
            bail!("ldt.scales: every scale must be at least 2");
        }
        if self.lyap.scales.contains(&0) || self.lyap.block == 0 {
            bail!("lyap.scales: scales and block must be positive");
        }
        if !(self.spectrum.s > 1.0) {
            bail!("spectrum.s: must exceed 1");
        }
        if !(self.homog.s > 1.0) {
            bail!("homog.s: must exceed 1");
        }
        if !(self.spectrum.window.1 >= self.spectrum.window.0) {
            bail!("spectrum.window: need E′ ≤ E″");
        }
        if self.ndr.ell < 2 || self.resonance.ell < 2 {
            bail!("ndr.ell / resonance.ell: window length must be at least 2");
        }
        if self.localize.n == 0 || self.localize.samples == 0 {
            bail!("localize: n and samples must be positive");
        }
        Ok(())
    }
}
