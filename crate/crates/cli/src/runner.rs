use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use netobs_core::analysis::{
    impact_vs_uncertainty_sweep, observed_vs_unobserved_curve, rate_scaling_sweep, scaling_sweep, FluidPolicy,
    SweepGrid, SweepOptions, SweepResult,
};
use netobs_core::scenario::{FlowSpec, MethodId};
use netobs_core::sim::{detection_trials, run_detection, run_sim, DetectionOptions, SimOptions};

use crate::config::{Experiment, ExperimentKind, MethodConfig, ScaleAxis, ScenarioConfig, SweepAxis};
use crate::output::{self, Metadata};

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fluid: bool,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub kind: ExperimentKind,
    pub csv: String,
    pub written: Option<PathBuf>,
    /// One line per failed check (relation violation, conservation, bound).
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn metadata(config: &ScenarioConfig, seed: u64) -> Metadata {
    let mut meta = Metadata::default();
    meta.push("tool", concat!("netobs ", env!("CARGO_PKG_VERSION")));
    meta.push("experiment", config.experiment.kind());
    meta.push("seed", seed);
    meta.push("duration_s", config.duration.secs());
    meta.push(
        "link",
        format!(
            "capacity_bps={} overprovisioned={}",
            config.link.capacity().bps(),
            config.link.is_overprovisioned()
        ),
    );
    for m in &config.methods {
        let method = m.method();
        let mut desc = format!("class={} hbar_bits={}", method.class(), method.observer_factor().bits());
        if let Some(p) = method.period() {
            desc.push_str(&format!(" period_s={}", p.secs()));
        }
        if let Some(t) = method.in_band_params() {
            desc.push_str(&format!(
                " sampling_ratio={} hops={} encap_bits={} per_hop_bits={}",
                t.sampling_ratio(),
                t.hops(),
                t.encap().bits(),
                t.per_hop().bits()
            ));
        }
        meta.push(format!("method.{}", m.id), desc);
    }
    meta
}

fn lookup<'a>(config: &'a ScenarioConfig, id: &str) -> Result<(&'a MethodConfig, FlowSpec)> {
    let m = config.method(id).ok_or_else(|| anyhow!("unknown method `{id}`"))?;
    let f = config
        .flow_of(m)
        .ok_or_else(|| anyhow!("method `{id}` references unknown flow `{}`", m.flow))?;
    Ok((m, FlowSpec::new(f.id.as_str(), f.rate, f.packet_bits)?))
}

fn sweep_failures(result: &SweepResult) -> Vec<String> {
    result
        .failures()
        .map(|p| {
            let r = &p.record;
            format!(
                "relation violated: {}={} delta_m={} delta_p={} product={} bound={} tolerance={}",
                result.variable,
                p.value,
                r.delta_m.value(),
                r.delta_p.value.bps(),
                r.product,
                r.bound,
                r.tolerance
            )
        })
        .collect()
}

/// Runs one experiment and writes its CSV if an output path is configured.
pub fn run(config: &ScenarioConfig, overrides: &Overrides) -> Result<RunOutcome> {
    let seed = overrides.seed.unwrap_or(config.seed);
    let tolerance = overrides.tolerance.or(config.tolerance);
    let mut meta = metadata(config, seed);
    let sim = SimOptions::default();
    let mut sweep_opts = SweepOptions {
        sim,
        tolerance,
        fluid: if overrides.fluid {
            FluidPolicy::Always
        } else {
            FluidPolicy::Auto
        },
        ..SweepOptions::default()
    };
    let scenario = config.scenario()?;
    let mut failures = Vec::new();
    tracing::info!(experiment = %config.experiment.kind(), seed, duration = config.duration.secs(), "running");

    let csv = match &config.experiment {
        Experiment::Simulate => {
            let report = run_sim(&scenario, config.duration, seed, &sim)?;
            if !report.is_conserved() {
                failures.push("bit conservation violated".to_string());
            }
            output::simulate_csv(&meta, &report)
        }
        Experiment::Sweep {
            method,
            axis,
            hbar_override,
        } => {
            let (m, flow) = lookup(config, method)?;
            let grid = match axis {
                SweepAxis::Periods(p) => SweepGrid::Periods(p.clone()),
                SweepAxis::SamplingRatios(s) => SweepGrid::SamplingRatios(s.clone()),
            };
            sweep_opts.claimed_hbar = *hbar_override;
            let result = impact_vs_uncertainty_sweep(
                &m.id,
                m.method(),
                &flow,
                config.link,
                &grid,
                config.duration,
                seed,
                &sweep_opts,
            )?;
            meta.push("sweep_variable", result.variable);
            if let Some(h) = hbar_override {
                meta.push("hbar_override_bits", h.bits());
            }
            failures.extend(sweep_failures(&result));
            output::sweep_csv(&meta, &result)
        }
        Experiment::Scale {
            method,
            axis,
            period,
            event_cap,
            hbar_override,
        } => {
            let (m, flow) = lookup(config, method)?;
            let mut mm = m.method();
            if let Some(p) = period {
                mm = mm.with_period(*p);
            }
            if let Some(cap) = event_cap {
                sweep_opts.event_cap = *cap;
            }
            sweep_opts.claimed_hbar = *hbar_override;
            let result = match axis {
                ScaleAxis::Flows(n) => scaling_sweep(&m.id, mm, n, &flow, config.duration, seed, &sweep_opts)?,
                ScaleAxis::Rates(r) => {
                    rate_scaling_sweep(&m.id, mm, r, flow.packet_bits(), config.duration, seed, &sweep_opts)?
                }
            };
            meta.push("sweep_variable", result.variable);
            meta.push("event_cap", sweep_opts.event_cap);
            failures.extend(sweep_failures(&result));
            output::scale_csv(&meta, &result)
        }
        Experiment::Detect {
            method,
            failure_time,
            trials,
            timeout_multiplier,
        } => {
            let opts = DetectionOptions {
                timeout_multiplier: timeout_multiplier.unwrap_or(1.0),
            };
            let id = MethodId::new(method.as_str());
            let reports = match (failure_time, trials) {
                (Some(t), _) => vec![run_detection(&scenario, &id, *t, config.duration, &opts)?],
                (None, Some(n)) => detection_trials(&scenario, &id, config.duration, *n, seed, &opts)?,
                (None, None) => unreachable!("validated by parse_config"),
            };
            meta.push("timeout_multiplier", opts.timeout_multiplier);
            for r in &reports {
                let limit = r.period * opts.timeout_multiplier * (1.0 + 1e-9);
                if !(r.latency > 0.0 && r.latency <= limit) {
                    failures.push(format!(
                        "detection latency {} outside (0, {}] for failure at {}",
                        r.latency, limit, r.failure_time
                    ));
                }
            }
            output::detect_csv(&meta, &reports)
        }
        Experiment::Ovu { method, rates } => {
            let (m, flow) = lookup(config, method)?;
            let rows = observed_vs_unobserved_curve(
                rates,
                config.link,
                m.method(),
                flow.packet_bits(),
                config.duration,
                seed,
                &sim,
            )?;
            for r in rows.iter().filter(|r| r.loss_observed < r.loss_unobserved) {
                failures.push(format!(
                    "observed loss {} below unobserved {} at user rate {}",
                    r.loss_observed.bps(),
                    r.loss_unobserved.bps(),
                    r.user_rate.bps()
                ));
            }
            output::ovu_csv(&meta, &rows)
        }
    };

    let path = overrides.out.clone().or_else(|| config.output.clone());
    if let Some(p) = &path {
        output::write_atomic(p, &csv).with_context(|| format!("writing {}", p.display()))?;
        tracing::info!(path = %p.display(), "wrote csv");
    }
    Ok(RunOutcome {
        kind: config.experiment.kind(),
        csv,
        written: path,
        failures,
    })
}
