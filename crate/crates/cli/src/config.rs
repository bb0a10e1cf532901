//! Scenario configuration: a single TOML file describing the system, the
//! kick, optional sweep/run blocks, and the output target. Unknown keys are
//! rejected; physical values are validated before any computation. All
//! frequencies are in units of the reference coupling, times in its inverse,
//! angles in radians.

use kickdyn::threelevel::{KickImpulse3, ThreeLevelParams};
use kickdyn::twolevel::{Impulse2, TwoLevelParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemBlock,
    #[serde(default)]
    pub kick: Option<KickBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub run: Option<RunBlock>,
    #[serde(default)]
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    #[serde(default)]
    pub two_level: Option<TwoLevelBlock>,
    #[serde(default)]
    pub three_level: Option<ThreeLevelBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelBlock {
    pub delta1: f64,
    pub omega1: f64,
    #[serde(default)]
    pub theta1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLevelBlock {
    pub delta: [f64; 2],
    pub omega: [f64; 2],
    #[serde(default)]
    pub theta: [f64; 2],
}

/// Fixed period or `auto:<regime>` resolution.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PeriodSpec {
    Fixed(f64),
    Auto(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutoPeriod {
    Resonance,
    OnePhoton,
    TwoPhoton,
}

impl PeriodSpec {
    pub fn auto(&self) -> Result<Option<AutoPeriod>, String> {
        match self {
            PeriodSpec::Fixed(t) => {
                if *t > 0.0 && t.is_finite() {
                    Ok(None)
                } else {
                    Err(format!("kick.period must be positive and finite, got {t}"))
                }
            }
            PeriodSpec::Auto(s) => match s.as_str() {
                "auto:resonance" => Ok(Some(AutoPeriod::Resonance)),
                "auto:one_photon" => Ok(Some(AutoPeriod::OnePhoton)),
                "auto:two_photon" => Ok(Some(AutoPeriod::TwoPhoton)),
                other => Err(format!(
                    "kick.period: unknown auto spec {other:?} (expected auto:resonance, auto:one_photon, or auto:two_photon)"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickBlock {
    #[serde(default)]
    pub period: Option<PeriodSpec>,
    // two-level impulse
    #[serde(default)]
    pub delta1p: Option<f64>,
    #[serde(default)]
    pub omega1p: Option<f64>,
    #[serde(default)]
    pub theta1p: Option<f64>,
    // three-level impulse
    #[serde(default)]
    pub deltap: Option<[f64; 2]>,
    #[serde(default)]
    pub omegap: Option<[f64; 2]>,
    #[serde(default)]
    pub thetap: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// eff2: one of period | omega1p | delta1p | theta1p; sweep3: period.
    #[serde(default = "default_vary")]
    pub vary: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

fn default_vary() -> String {
    "period".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default)]
    pub horizon_periods: Option<usize>,
    #[serde(default)]
    pub samples_per_period: Option<usize>,
    /// Schedule segments: "free:<time>" or "kicked:<periods>".
    #[serde(default)]
    pub segments: Option<Vec<String>>,
    /// Selective-transition target for three-level runs.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub amplitude_goal: Option<f64>,
    #[serde(default)]
    pub max_kicks: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub path: Option<String>,
}

impl ScenarioConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, String> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| format!("config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        match (&self.system.two_level, &self.system.three_level) {
            (Some(_), Some(_)) => {
                return Err("system: give exactly one of two_level or three_level".into())
            }
            (None, None) => return Err("system: missing two_level or three_level block".into()),
            _ => {}
        }
        if let Some(two) = &self.system.two_level {
            TwoLevelParams::new(two.delta1, two.omega1, two.theta1)
                .map_err(|e| format!("system.two_level: {e}"))?;
        }
        if let Some(three) = &self.system.three_level {
            ThreeLevelParams::new(three.delta, three.omega, three.theta)
                .map_err(|e| format!("system.three_level: {e}"))?;
        }
        if let Some(kick) = &self.kick {
            if let Some(p) = &kick.period {
                p.auto()?;
            }
            let two_imp =
                kick.delta1p.is_some() || kick.omega1p.is_some() || kick.theta1p.is_some();
            let three_imp = kick.deltap.is_some() || kick.omegap.is_some() || kick.thetap.is_some();
            if two_imp && three_imp {
                return Err("kick: mixes two-level and three-level impulse fields".into());
            }
            if self.system.two_level.is_some() && three_imp {
                return Err("kick: three-level impulse fields with a two-level system".into());
            }
            if self.system.three_level.is_some() && two_imp {
                return Err("kick: two-level impulse fields with a three-level system".into());
            }
            if let Some(o) = kick.omega1p {
                if !(o >= 0.0) || !o.is_finite() {
                    return Err(format!("kick.omega1p must be >= 0 and finite, got {o}"));
                }
            }
            for field in [kick.delta1p, kick.theta1p] {
                if let Some(v) = field {
                    if !v.is_finite() {
                        return Err(format!("kick: non-finite value {v}"));
                    }
                }
            }
            for arr in [kick.deltap, kick.omegap, kick.thetap]
                .into_iter()
                .flatten()
            {
                if arr.iter().any(|v| !v.is_finite()) {
                    return Err("kick: non-finite three-level impulse value".into());
                }
            }
            if let Some(om) = kick.omegap {
                if om.iter().any(|v| *v < 0.0) {
                    return Err("kick.omegap: couplings must be >= 0".into());
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if !matches!(
                sweep.vary.as_str(),
                "period" | "omega1p" | "delta1p" | "theta1p"
            ) {
                return Err(format!(
                    "sweep.vary: unknown parameter {:?} (expected period, omega1p, delta1p, or theta1p)",
                    sweep.vary
                ));
            }
            // points = 0 is allowed: an empty grid is data (header-only CSV)
            if !(sweep.from.is_finite() && sweep.to.is_finite()) {
                return Err("sweep: from/to must be finite".into());
            }
            if sweep.vary == "period" && (sweep.from <= 0.0 || sweep.to <= 0.0) {
                return Err("sweep: period grid must be positive".into());
            }
        }
        if let Some(run) = &self.run {
            if let Some(segments) = &run.segments {
                for s in segments {
                    parse_segment(s)?;
                }
            }
            if let Some(t) = &run.target {
                if !matches!(t.as_str(), "state2" | "state3") {
                    return Err(format!("run.target: expected state2 or state3, got {t:?}"));
                }
            }
            if let Some(g) = run.amplitude_goal {
                if !(0.0..=1.0).contains(&g) {
                    return Err(format!("run.amplitude_goal must lie in [0, 1], got {g}"));
                }
            }
        }
        Ok(())
    }

    pub fn two_level(&self) -> Result<TwoLevelParams, String> {
        let b = self
            .system
            .two_level
            .as_ref()
            .ok_or("this command needs a [system.two_level] block")?;
        TwoLevelParams::new(b.delta1, b.omega1, b.theta1).map_err(|e| e.to_string())
    }

    pub fn three_level(&self) -> Result<ThreeLevelParams, String> {
        let b = self
            .system
            .three_level
            .as_ref()
            .ok_or("this command needs a [system.three_level] block")?;
        ThreeLevelParams::new(b.delta, b.omega, b.theta).map_err(|e| e.to_string())
    }

    /// Two-level impulse; unset fields default to the static system values
    /// (so a bare [kick] block is the do-nothing kick).
    pub fn impulse2(&self, sys: &TwoLevelParams) -> Result<Impulse2, String> {
        let kick = self.kick.as_ref();
        Impulse2::new(
            kick.and_then(|k| k.delta1p).unwrap_or(sys.delta1),
            kick.and_then(|k| k.omega1p).unwrap_or(sys.omega1),
            kick.and_then(|k| k.theta1p).unwrap_or(sys.theta1),
        )
        .map_err(|e| e.to_string())
    }

    pub fn impulse3(&self, sys: &ThreeLevelParams) -> Result<KickImpulse3, String> {
        let kick = self.kick.as_ref();
        Ok(KickImpulse3 {
            deltap: kick.and_then(|k| k.deltap).unwrap_or(sys.delta),
            omegap: kick.and_then(|k| k.omegap).unwrap_or(sys.omega),
            thetap: kick.and_then(|k| k.thetap).unwrap_or(sys.theta),
        })
    }

    pub fn period_spec(&self) -> Option<&PeriodSpec> {
        self.kick.as_ref().and_then(|k| k.period.as_ref())
    }

    pub fn samples_per_period(&self, cli_override: Option<usize>) -> usize {
        cli_override
            .or_else(|| self.run.as_ref().and_then(|r| r.samples_per_period))
            .unwrap_or(20)
    }

    pub fn output_path(
        &self,
        cli_override: Option<&std::path::Path>,
    ) -> Option<std::path::PathBuf> {
        cli_override.map(|p| p.to_path_buf()).or_else(|| {
            self.output
                .as_ref()
                .and_then(|o| o.path.clone())
                .map(Into::into)
        })
    }
}

/// "free:<time>" or "kicked:<periods>".
pub fn parse_segment(s: &str) -> Result<kickdyn::sim::Segment, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("segment {s:?}: expected free:<time> or kicked:<periods>"))?;
    match kind {
        "free" => {
            let t: f64 = value
                .parse()
                .map_err(|_| format!("segment {s:?}: bad duration"))?;
            if !(t > 0.0) {
                return Err(format!("segment {s:?}: duration must be > 0"));
            }
            Ok(kickdyn::sim::Segment::Free { time: t })
        }
        "kicked" => {
            let n: usize = value
                .parse()
                .map_err(|_| format!("segment {s:?}: bad period count"))?;
            Ok(kickdyn::sim::Segment::Kicked { periods: n })
        }
        other => Err(format!("segment {s:?}: unknown mode {other:?}")),
    }
}
