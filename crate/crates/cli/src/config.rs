use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use swa_core::geometry::Waveguide;
use swa_core::ltv::{HistoryPolicy, SynthesisConfig};
use swa_core::scenarios::{CaseKind, CaseSpec};
use swa_core::static_channel::{AbsorptionLaw, FrequencyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Binary,
}

/// Every knob of a run, in one flat table. Keys in the config file are the
/// field names verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub depth_w: f64,
    pub sound_speed_c: f64,
    pub bottom_speed_cb: f64,
    /// kg/m^3
    pub bottom_density_rho_b: f64,
    pub water_density_rho: f64,
    pub spreading_k: f64,
    pub pmax: u32,
    pub absorption: AbsorptionLaw,
    /// Common height of both transceivers above the seabed (m).
    pub height_above_bottom: f64,
    pub d0: f64,
    pub v: f64,
    /// Case used by `filter`; `analyze` always covers all four.
    pub case: CaseKind,
    /// Trajectory length in samples; defaults to a 1 m distance sweep.
    pub duration_samples: Option<u64>,
    pub f_max: f64,
    pub n_bins: usize,
    pub fs: f64,
    pub cache_quantum_dd: f64,
    pub kernel_halfwidth: usize,
    pub reference_frequency: f64,
    pub history: HistoryPolicy,
    /// Row spacing of the grids in samples; defaults to one row per cm.
    pub n_stride: Option<usize>,
    pub truncation_floor_db: f64,
    pub arrival_threshold_db: f64,
    /// Tone used for the Doppler measurement of `analyze` (Hz).
    pub doppler_tone_hz: f64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let wg = Waveguide::default();
        let synth = SynthesisConfig::default();
        Self {
            depth_w: wg.depth_w,
            sound_speed_c: wg.sound_speed_c,
            bottom_speed_cb: wg.bottom_speed_cb,
            bottom_density_rho_b: wg.bottom_density_rho_b,
            water_density_rho: wg.water_density_rho,
            spreading_k: wg.spreading_exponent_k,
            pmax: wg.max_reflections_pmax,
            absorption: wg.absorption,
            height_above_bottom: 12.0,
            d0: 100.0,
            v: 51.2,
            case: CaseKind::MovingRx,
            duration_samples: None,
            f_max: 128e3,
            n_bins: (1 << 17) + 1,
            fs: 256e3,
            cache_quantum_dd: synth.cache_quantum_dd,
            kernel_halfwidth: synth.kernel_halfwidth,
            reference_frequency: synth.reference_frequency,
            history: synth.history,
            n_stride: None,
            truncation_floor_db: -60.0,
            arrival_threshold_db: -20.0,
            doppler_tone_hz: 10e3,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Text,
        }
    }
}

/// Parses a `key=value` override; the value is read as a TOML value and
/// falls back to a bare string.
fn parse_override(item: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = item
        .split_once('=')
        .with_context(|| format!("override '{item}' is not of the form key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed table has the key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((key, value))
}

impl RunConfig {
    /// Defaults, then the config file (if any), then `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str::<toml::Table>(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, value) = parse_override(item)?;
            table.insert(key, value);
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| anyhow::anyhow!("invalid configuration: {}", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn waveguide(&self) -> Waveguide {
        Waveguide {
            depth_w: self.depth_w,
            sound_speed_c: self.sound_speed_c,
            bottom_speed_cb: self.bottom_speed_cb,
            bottom_density_rho_b: self.bottom_density_rho_b,
            water_density_rho: self.water_density_rho,
            spreading_exponent_k: self.spreading_k,
            max_reflections_pmax: self.pmax,
            absorption: self.absorption,
        }
    }

    pub fn synthesis(&self) -> SynthesisConfig {
        SynthesisConfig {
            kernel_halfwidth: self.kernel_halfwidth,
            reference_frequency: self.reference_frequency,
            cache_quantum_dd: self.cache_quantum_dd,
            history: self.history,
        }
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        Ok(FrequencyGrid::new(self.f_max, self.n_bins)?)
    }

    pub fn case_spec(&self, kind: CaseKind) -> CaseSpec {
        let mut spec = CaseSpec::new(
            kind,
            self.waveguide(),
            self.d0,
            self.v,
            self.height_above_bottom,
            self.fs,
        );
        if let Some(n) = self.duration_samples {
            spec.duration_samples = n;
        } else if self.v == 0.0 {
            // a still case sweeps nothing; keep a short, non-empty record
            spec.duration_samples = 100;
        }
        spec
    }

    /// Row stride for the grids.
    pub fn stride(&self, spec: &CaseSpec) -> usize {
        self.n_stride
            .unwrap_or_else(|| spec.stride_for_displacement(0.01))
            .max(1)
    }

    /// Runs every module-level check before any computation.
    pub fn validate(&self) -> Result<()> {
        let wg = self.waveguide();
        wg.validate()?;
        wg.check_height(self.height_above_bottom)?;
        self.frequency_grid()?;
        for kind in CaseKind::ALL {
            self.case_spec(kind).validate()?;
        }
        swa_core::ltv::SpatialChannel::new(
            &wg,
            self.height_above_bottom,
            self.height_above_bottom,
            self.fs,
            &self.synthesis(),
        )?;
        if self.n_stride == Some(0) {
            bail!("n_stride must be at least 1");
        }
        if !(self.truncation_floor_db.is_finite() && self.truncation_floor_db < 0.0)
            || !(self.arrival_threshold_db.is_finite() && self.arrival_threshold_db < 0.0)
        {
            bail!("truncation_floor_db and arrival_threshold_db must be negative dB values");
        }
        if !(self.doppler_tone_hz > 0.0 && self.doppler_tone_hz < 0.5 * self.fs) {
            bail!("doppler_tone_hz = {} must lie in (0, fs / 2)", self.doppler_tone_hz);
        }
        if (self.fs - 2.0 * self.f_max).abs() > 1e-9 * self.fs {
            log::warn!(
                "fs = {} Hz differs from 2 f_max = {} Hz; the dense and synthesized responses use different rates",
                self.fs,
                2.0 * self.f_max
            );
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization of every key that affects
    /// results (all but `out_dir` and `format`), as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut table = toml::Table::try_from(self).expect("config serializes");
        table.remove("out_dir");
        table.remove("format");
        let canonical = toml::to_string(&table).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
