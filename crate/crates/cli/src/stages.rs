//! One function per subcommand. Stages hand off through files under the
//! output directory only.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use gridsynth::calibration::{
    calibrate_fuel_costs, group_summary, match_spur_capacity, read_targets,
    scale_generators_to_targets, set_geothermal_ratings, GroupFactor,
};
use gridsynth::grid::{load_network, write_network, BusId, CostCurve, Fuel, GenId, Network};
use gridsynth::harness::{
    plan_windows, run_rolling_horizon, write_log, write_solutions, HarnessOptions, Profiles,
    WindowPlan, DEFAULT_WINDOW_HOURS,
};
use gridsynth::report::{
    aggregate_generation, compare, emit_report, read_generation_table, revise_costs,
    RevisionRule,
};
use gridsynth::timeseries::io::{
    read_demand_zone, read_hydro_energy, read_irradiance, read_power_curve, read_profiles,
    read_shape, read_tracking_mix, read_wind_uv, wind_by_location, write_profiles,
};
use gridsynth::timeseries::{
    detect_anomalies, disaggregate_demand, hydro_profile, impute_missing_demand,
    impute_wind_uv, interpolate_anomalies, solar_power, wind_profile, ArrayGains, Calendar,
    HourlyProfile, PowerCurve, TrackingMix,
};
use gridsynth::upgrade::{
    apply_upgrades, size_upgrades_soft, step_upgrade, write_upgrades, Scenario, UpgradePolicy,
    UpgradeTarget,
};

use crate::config::{RunConfig, UpgradeMethod};

const PROFILE_KINDS: [&str; 4] = ["demand", "wind", "solar", "hydro"];

/// Config after flag and environment overrides.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub windows: Option<usize>,
    pub window_hours: usize,
}

impl Settings {
    fn dir(&self, stage: &str) -> Result<PathBuf> {
        let dir = self.out.join(stage);
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(dir)
    }

    fn case_dir(&self) -> PathBuf {
        self.out.join("case")
    }

    fn harness_options(&self) -> HarnessOptions {
        let s = &self.config.simulate;
        let mut o = HarnessOptions::default();
        if let Some(cap) = s.retry_cap {
            o.retry_cap = cap;
        }
        if let Some(c) = s.load_shed_cost {
            o.opf.load_shed_cost = Some(c);
        }
        if s.forbid_shed {
            o.opf.load_shed_cost = None;
        }
        if let Some(p) = s.penalty {
            o.opf.penalty = p;
        }
        o
    }
}

fn describe(f: &GroupFactor) -> String {
    match f.factor {
        Some(x) => format!("{:<28} {:>4} units  ×{x:.6}", f.group, f.generators),
        None => format!("{:<28} {:>4} units  replaced", f.group, f.generators),
    }
}

pub fn build(s: &Settings) -> Result<()> {
    let raw = s
        .config
        .case
        .raw
        .as_deref()
        .ok_or_else(|| anyhow!("no raw case given ([case] raw)"))?;
    let mut net =
        load_network(raw).with_context(|| format!("loading case {}", raw.display()))?;
    if let Some(path) = &s.config.case.targets {
        let targets =
            read_targets(path).with_context(|| format!("reading targets {}", path.display()))?;
        let (scaled, caps) = scale_generators_to_targets(&net, &targets)?;
        let (priced, prices) = calibrate_fuel_costs(&scaled, &targets)?;
        println!("capacity scale factors:");
        caps.iter().for_each(|f| println!("  {}", describe(f)));
        println!("price scale factors:");
        prices.iter().for_each(|f| println!("  {}", describe(f)));
        net = priced;
    }
    if let Some(path) = &s.config.case.geothermal {
        let series = read_profiles(path)
            .with_context(|| format!("reading geothermal output {}", path.display()))?;
        for (id, profile) in series {
            let g = net
                .generators
                .iter_mut()
                .find(|g| g.id == GenId(id))
                .ok_or_else(|| anyhow!("geothermal output given for unknown gen {id}"))?;
            if g.fuel != Fuel::Geothermal {
                bail!("gen {id} has fuel {}, not geothermal", g.fuel);
            }
            let (p_max, p_min) = set_geothermal_ratings(&profile)
                .with_context(|| format!("geothermal ratings of gen {id}"))?;
            g.cost_curve = CostCurve::flat(p_min, p_max, g.cost_curve.mean_marginal_cost());
            g.p_max = p_max;
            g.p_min = p_min;
            println!("geothermal gen {id}: p_max {p_max:.3} MW, p_min {p_min:.3} MW");
        }
    }
    let net = match_spur_capacity(&net)?;
    let dir = s.case_dir();
    write_network(&net, &dir)?;
    let groups = group_summary(&net);
    println!("wrote {} ({} groups)", dir.display(), groups.len());
    Ok(())
}

fn load_case(path: &Path) -> Result<Network> {
    load_network(path).with_context(|| {
        format!(
            "loading case {} (run `gridsynth build` first or pass --case)",
            path.display()
        )
    })
}

fn check_length(kind: &str, id: impl std::fmt::Display, p: &HourlyProfile, n: usize) -> Result<()> {
    if p.len() != n {
        bail!("{kind} series of {id} has {} hours, the demand has {n}", p.len());
    }
    Ok(())
}

pub fn profiles(s: &Settings) -> Result<()> {
    let cfg = &s.config.profiles;
    let net = load_case(&s.case_dir())?;
    let dir = s.dir("profiles")?;
    for kind in PROFILE_KINDS {
        let _ = fs::remove_file(dir.join(format!("profile_{kind}.csv")));
    }
    let sigma = cfg.anomaly_sigma.unwrap_or(5.0);
    let mut imputed = 0usize;
    let mut flagged = 0usize;
    let mut hours = None;

    if let Some(path) = &cfg.demand_zone {
        let zones =
            read_demand_zone(path).with_context(|| format!("reading {}", path.display()))?;
        let mut by_bus: BTreeMap<u32, HourlyProfile> = BTreeMap::new();
        for (zone, gappy) in &zones {
            let cal = Calendar::utc(gappy.start, gappy.len());
            let (filled, n) = impute_missing_demand(gappy, &cal)
                .with_context(|| format!("imputing demand of zone {zone}"))?;
            let spikes = detect_anomalies(&filled, sigma)
                .with_context(|| format!("anomaly scan of zone {zone}"))?;
            let clean = interpolate_anomalies(&filled, &spikes)
                .with_context(|| format!("interpolating zone {zone}"))?;
            imputed += n;
            flagged += spikes.len();
            let buses: Vec<(BusId, f64)> = net
                .buses
                .iter()
                .filter(|b| b.zone == *zone && b.demand_participation)
                .map(|b| (b.id, b.population_weight))
                .collect();
            if buses.is_empty() {
                log::warn!("zone {zone} has no demand-participating bus; its demand is dropped");
                continue;
            }
            let split = disaggregate_demand(&clean, &buses)
                .with_context(|| format!("disaggregating zone {zone}"))?;
            by_bus.extend(split.into_iter().map(|(b, p)| (b.0, p)));
            hours.get_or_insert(clean.len());
        }
        write_profiles(&dir.join("profile_demand.csv"), &by_bus)?;
    }
    let hours = hours.ok_or_else(|| anyhow!("no demand input given ([profiles] demand_zone)"))?;

    if let Some(path) = &cfg.wind_uv {
        let curve = match &cfg.power_curve {
            Some(p) => read_power_curve(p).with_context(|| format!("reading {}", p.display()))?,
            None => PowerCurve::iec_class2(),
        };
        let samples = read_wind_uv(path).with_context(|| format!("reading {}", path.display()))?;
        let mut out = BTreeMap::new();
        for (location, series) in wind_by_location(samples) {
            let id: u32 = location
                .parse()
                .map_err(|_| anyhow!("wind location `{location}` is not a generator id"))?;
            let g = net
                .generator(GenId(id))
                .ok_or_else(|| anyhow!("wind series given for unknown gen {id}"))?;
            imputed += series.iter().filter(|x| x.is_missing()).count();
            let filled = impute_wind_uv(&series, s.seed)
                .with_context(|| format!("imputing wind of gen {id}"))?;
            let p = wind_profile(&filled, &curve, g.p_max)
                .with_context(|| format!("wind output of gen {id}"))?;
            check_length("wind", format!("gen {id}"), &p, hours)?;
            out.insert(id, p);
        }
        write_profiles(&dir.join("profile_wind.csv"), &out)?;
    }

    if let Some(path) = &cfg.irradiance {
        let mixes = match &cfg.tracking_mix {
            Some(p) => read_tracking_mix(p).with_context(|| format!("reading {}", p.display()))?,
            None => BTreeMap::new(),
        };
        let series = read_irradiance(path).with_context(|| format!("reading {}", path.display()))?;
        let mut out = BTreeMap::new();
        for (id, irr) in series {
            let g = net
                .generator(id)
                .ok_or_else(|| anyhow!("irradiance given for unknown gen {id}"))?;
            let ic = net.interconnection_of(g.bus).unwrap_or_default();
            let mix = mixes
                .get(ic)
                .copied()
                .or_else(|| TrackingMix::for_interconnection(ic))
                .ok_or_else(|| anyhow!("no tracking mix for interconnection `{ic}` (gen {id})"))?;
            let p = solar_power(&irr, &mix, g.p_max, &ArrayGains::default())
                .with_context(|| format!("solar output of gen {id}"))?;
            check_length("solar", format!("gen {id}"), &p, hours)?;
            out.insert(id.0, p);
        }
        write_profiles(&dir.join("profile_solar.csv"), &out)?;
    }

    if let (Some(energy), Some(shape)) = (&cfg.hydro_energy, &cfg.hydro_shape) {
        let energy =
            read_hydro_energy(energy).with_context(|| format!("reading {}", energy.display()))?;
        let shape = read_shape(shape).with_context(|| format!("reading {}", shape.display()))?;
        let mut out = BTreeMap::new();
        for (id, months) in energy {
            let g = net
                .generator(id)
                .ok_or_else(|| anyhow!("hydro energy given for unknown gen {id}"))?;
            let ic = net.interconnection_of(g.bus).unwrap_or_default();
            let flat = cfg.hydro_flat_interconnections.iter().any(|x| x == ic);
            let h = hydro_profile(&shape, &months, g.p_max, flat)
                .with_context(|| format!("hydro output of gen {id}"))?;
            if !h.flat_months.is_empty() {
                println!("hydro gen {id}: flat months {:?}", h.flat_months);
            }
            check_length("hydro", format!("gen {id}"), &h.profile, hours)?;
            out.insert(id.0, h.profile);
        }
        write_profiles(&dir.join("profile_hydro.csv"), &out)?;
    }

    println!("imputed: {imputed}");
    println!("flagged: {flagged}");
    Ok(())
}

fn load_profiles(dir: &Path) -> Result<Profiles> {
    let mut profiles = Profiles::default();
    for kind in PROFILE_KINDS {
        let path = dir.join(format!("profile_{kind}.csv"));
        if !path.exists() {
            continue;
        }
        let series = read_profiles(&path).with_context(|| format!("reading {}", path.display()))?;
        for (id, p) in series {
            if kind == "demand" {
                profiles.demand.insert(BusId(id), p);
            } else if profiles.availability.insert(GenId(id), p).is_some() {
                bail!("gen {id} has more than one availability profile");
            }
        }
    }
    if profiles.demand.is_empty() {
        bail!(
            "missing profile: no demand in {} (run `gridsynth profiles` first)",
            dir.display()
        );
    }
    Ok(profiles)
}

fn plan(s: &Settings, profiles: &Profiles) -> Result<WindowPlan> {
    let available = profiles
        .demand
        .values()
        .map(HourlyProfile::len)
        .min()
        .unwrap_or(0);
    let total = s.config.simulate.total_hours.unwrap_or(available);
    let mut plan = plan_windows(total, s.window_hours)?;
    if let Some(k) = s.windows {
        plan = plan.truncated(k);
    }
    Ok(plan)
}

pub fn simulate(s: &Settings, case: Option<&Path>) -> Result<()> {
    let net = load_case(case.unwrap_or(&s.case_dir()))?;
    let profiles = load_profiles(&s.out.join("profiles"))?;
    let plan = plan(s, &profiles)?;
    let log = run_rolling_horizon(&net, &profiles, &plan, &s.harness_options())?;
    let dir = s.dir("simulate")?;
    write_log(&log, &net, &dir)?;
    let sol_dir = dir.join("solutions");
    fs::create_dir_all(&sol_dir)?;
    write_solutions(&log, &sol_dir)?;
    println!(
        "{} windows, {} hours, {} retries, objective {:.6}, shed {:.6} MWh",
        log.windows.len(),
        log.hours(),
        log.retries.len(),
        log.total_objective(),
        log.total_shed()
    );
    Ok(())
}

pub fn upgrade(s: &Settings, case: Option<&Path>) -> Result<()> {
    let cfg = &s.config.upgrade;
    let net = load_case(case.unwrap_or(&s.case_dir()))?;
    let profiles = load_profiles(&s.out.join("profiles"))?;
    let plan = plan(s, &profiles)?;
    let scenario = Scenario {
        profiles: &profiles,
        plan: &plan,
        options: s.harness_options(),
    };
    let (upgraded, records) = match cfg.method {
        UpgradeMethod::Step => {
            let mut policy = UpgradePolicy::default();
            if let Some(t) = cfg.threshold {
                policy.shadow_price_threshold = t;
            }
            if let Some(step) = cfg.step_mw {
                policy.step_size = step;
            }
            if let Some(n) = cfg.max_iterations {
                policy.max_iterations = n;
            }
            if let Some(floor) = cfg.lmp_floor {
                policy.target = UpgradeTarget::LmpFloor(floor);
            }
            let out = step_upgrade(&net, &scenario, &policy)?;
            (out.network, out.records)
        }
        UpgradeMethod::Soft => {
            let penalty = s.config.simulate.penalty.unwrap_or(scenario.options.opf.penalty);
            let req = size_upgrades_soft(&net, &scenario, penalty)?;
            apply_upgrades(&net, &req)
        }
    };
    let dir = s.dir("upgrade")?;
    write_network(&upgraded, &dir.join("case"))?;
    write_upgrades(&records, &dir.join("upgrades.csv"))?;
    for r in &records {
        println!(
            "branch {}: {} → {} MW ({} steps)",
            r.branch, r.old_capacity, r.new_capacity, r.iterations
        );
    }
    println!("{} branches upgraded", records.len());
    Ok(())
}

pub fn report(s: &Settings) -> Result<()> {
    let cfg = &s.config.report;
    let hist_path = cfg
        .historical
        .as_deref()
        .ok_or_else(|| anyhow!("no historical energy given ([report] historical)"))?;
    let hist = read_generation_table(hist_path)
        .with_context(|| format!("reading {}", hist_path.display()))?;
    let energy_path = s.out.join("simulate").join("energy_by_state_fuel.csv");
    let sim = read_generation_table(&energy_path).with_context(|| {
        format!(
            "reading {} (run `gridsynth simulate` first)",
            energy_path.display()
        )
    })?;
    let rule = RevisionRule {
        cap: cfg.cap.unwrap_or(RevisionRule::default().cap),
        beta: cfg.beta.unwrap_or(RevisionRule::default().beta),
    };
    let iterations = cfg.iterations.unwrap_or(1).max(1);

    let upgraded = s.out.join("upgrade").join("case");
    let case = if upgraded.exists() { upgraded } else { s.case_dir() };
    let mut net = load_case(&case)?;
    let mut cmp = compare(&sim, &hist);
    let dir = s.dir("report")?;
    emit_report(&cmp, &dir)?;
    println!(
        "euclidean error {:.6} TWh, summed absolute error {:.6} TWh",
        cmp.euclidean, cmp.sum_abs
    );
    for i in 0..iterations {
        if i > 0 {
            let profiles = load_profiles(&s.out.join("profiles"))?;
            let plan = plan(s, &profiles)?;
            let log = run_rolling_horizon(&net, &profiles, &plan, &s.harness_options())?;
            cmp = compare(&aggregate_generation(&log, &net), &hist);
            println!(
                "revision {i}: euclidean error {:.6} TWh, summed absolute error {:.6} TWh",
                cmp.euclidean, cmp.sum_abs
            );
        }
        let (revised, multipliers) = revise_costs(&net, &cmp, rule)?;
        for ((state, fuel), m) in &multipliers {
            log::info!("{state}/{fuel}: cost ×{m}");
        }
        net = revised;
    }
    write_network(&net, &dir.join("case"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn window_hours(config: &RunConfig, flag: Option<usize>) -> usize {
    flag.or(config.simulate.window_hours)
        .unwrap_or(DEFAULT_WINDOW_HOURS)
}
