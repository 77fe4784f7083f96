use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Contents of the run config TOML. Relative paths are taken relative to
/// the directory of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub case: CaseSection,
    #[serde(default)]
    pub profiles: ProfilesSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub upgrade: UpgradeSection,
    #[serde(default)]
    pub report: ReportSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSection {
    /// Directory of the uncalibrated case.
    pub raw: Option<PathBuf>,
    pub targets: Option<PathBuf>,
    /// Hourly output of geothermal units, keyed by generator id.
    pub geothermal: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    pub demand_zone: Option<PathBuf>,
    pub wind_uv: Option<PathBuf>,
    pub irradiance: Option<PathBuf>,
    pub hydro_energy: Option<PathBuf>,
    pub hydro_shape: Option<PathBuf>,
    pub power_curve: Option<PathBuf>,
    pub tracking_mix: Option<PathBuf>,
    #[serde(default)]
    pub hydro_flat_interconnections: Vec<String>,
    pub anomaly_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub window_hours: Option<usize>,
    pub windows: Option<usize>,
    pub total_hours: Option<usize>,
    pub retry_cap: Option<u32>,
    pub load_shed_cost: Option<f64>,
    #[serde(default)]
    pub forbid_shed: bool,
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpgradeMethod {
    #[default]
    Step,
    Soft,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpgradeSection {
    #[serde(default)]
    pub method: UpgradeMethod,
    pub threshold: Option<f64>,
    pub step_mw: Option<f64>,
    pub max_iterations: Option<u32>,
    /// Switches the step target from shed elimination to a renewable price floor.
    pub lmp_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub historical: Option<PathBuf>,
    pub cap: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<u32>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut self.out);
        fix(&mut self.case.raw);
        fix(&mut self.case.targets);
        fix(&mut self.case.geothermal);
        let p = &mut self.profiles;
        for f in [
            &mut p.demand_zone,
            &mut p.wind_uv,
            &mut p.irradiance,
            &mut p.hydro_energy,
            &mut p.hydro_shape,
            &mut p.power_curve,
            &mut p.tracking_mix,
        ] {
            fix(f);
        }
        fix(&mut self.report.historical);
    }

    /// Fails on the first referenced input that does not exist.
    pub fn check_paths(&self) -> Result<()> {
        let p = &self.profiles;
        let named = [
            ("case.raw", &self.case.raw),
            ("case.targets", &self.case.targets),
            ("case.geothermal", &self.case.geothermal),
            ("profiles.demand_zone", &p.demand_zone),
            ("profiles.wind_uv", &p.wind_uv),
            ("profiles.irradiance", &p.irradiance),
            ("profiles.hydro_energy", &p.hydro_energy),
            ("profiles.hydro_shape", &p.hydro_shape),
            ("profiles.power_curve", &p.power_curve),
            ("profiles.tracking_mix", &p.tracking_mix),
            ("report.historical", &self.report.historical),
        ];
        for (key, path) in named {
            if let Some(path) = path {
                if !path.exists() {
                    bail!("{key}: {} does not exist", path.display());
                }
            }
        }
        if p.hydro_energy.is_some() != p.hydro_shape.is_some() {
            bail!("profiles.hydro_energy and profiles.hydro_shape must be given together");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_relative_to_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 7\nout = \"o\"\n[case]\nraw = \"raw\"\n[upgrade]\nmethod = \"soft\"\n",
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.out.as_deref(), Some(dir.path().join("o").as_path()));
        assert_eq!(cfg.case.raw.as_deref(), Some(dir.path().join("raw").as_path()));
        assert_eq!(cfg.upgrade.method, UpgradeMethod::Soft);
        let err = cfg.check_paths().unwrap_err().to_string();
        assert!(err.starts_with("case.raw"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[simulate]\nwindow = 3\n").unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
