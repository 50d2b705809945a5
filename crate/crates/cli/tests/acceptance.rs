//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::fmt::Debug;
use std::process::Command;
use std::time::Instant;

use netobs::{parse_config, run, Overrides};
use netobs_core::analysis::{
    impact_vs_uncertainty_sweep, linear_fit, observed_loss_onset, observed_vs_unobserved_curve, rate_scaling_sweep,
    scaling_sweep, weighted_linear_fit, FluidPolicy, OvuRow, SweepGrid, SweepOptions, SweepResult,
};
use netobs_core::methods::{preset, InBandTelemetry, MeasurementMethod, CCM_101, GNMI_204, IOAM_3HOP};
use netobs_core::sim::{detection_trials, measure_impact, DetectionOptions, DetectionReport, SimOptions, TwinImpact};
use netobs_core::{
    validate_scenario, BitRate, Duration, FlowSpec, ImpactKind, LinkSpec, MethodBinding, MethodId, Scenario,
};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const HORIZON: f64 = 100.0;
const PERIODS: [f64; 4] = [0.00333, 0.1, 1.0, 10.0];
const FLOW_COUNTS: [u64; 6] = [1, 10, 100, 1_000, 10_000, 100_000];

type Outcome = Result<String, String>;

fn secs(s: f64) -> Duration {
    Duration::from_secs(s).unwrap()
}

fn mbps(r: f64) -> BitRate {
    BitRate::from_mbps(r).unwrap()
}

fn periodic(name: &str, period: f64) -> MeasurementMethod {
    preset(name).unwrap().method.with_period(secs(period))
}

fn ioam(s: u32) -> MeasurementMethod {
    let t: InBandTelemetry = *preset(IOAM_3HOP).unwrap().method.in_band_params().unwrap();
    MeasurementMethod::InBand(t.with_sampling_ratio(s).unwrap())
}

fn reference_flow() -> FlowSpec {
    FlowSpec::new("f0", mbps(1.0), 360 * 8).unwrap()
}

fn single(flow: &FlowSpec, link: LinkSpec, method: MeasurementMethod) -> Scenario {
    validate_scenario(
        vec![flow.clone()],
        link,
        vec![MethodBinding::new("m", method, flow.id().as_str())],
    )
    .unwrap()
}

fn quantum(s: &Scenario) -> f64 {
    s.max_packet_bits() as f64 / HORIZON
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: f64, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed().as_secs_f64();
    check(took < limit, || format!("{detail}; took {took:.2}s, limit {limit}s"))?;
    Ok(format!("{detail}; {took:.2}s"))
}

// 1 -----------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_netobs"))
        .arg("presets")
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || format!("presets exited with {}", out.status))?;
    let text = String::from_utf8_lossy(&out.stdout);
    for line in [
        "ccm-101\tactive_probe\thbar=808 bits (101 bytes)",
        "gnmi-204\tpassive_export\thbar=1632 bits (204 bytes)",
        "ioam-3hop\tin_band\thbar=640 bits (80 bytes)",
        "breakdown: 44+4+8 encap bytes (ipv6-tunnel, ipv6-option, ioam-header) + 3x8 per-hop bytes = 80 bytes",
    ] {
        check(text.contains(line), || format!("catalog lacks `{line}`"))?;
    }
    let t = preset(IOAM_3HOP).unwrap();
    let encap: u64 = t.encap_octets.iter().map(|(_, o)| o).sum();
    let ib = t.method.in_band_params().unwrap();
    check(
        encap == 56 && encap * 8 == ib.encap().bits() && ib.hops() == 3 && ib.per_hop().bits() == 64,
        || "IOAM component constants disagree".into(),
    )?;
    timed(
        1.0,
        start,
        "ccm=808 gnmi=1632 ioam=640 bits; 44+4+8+3x8=80 bytes".into(),
    )
}

// 2 -----------------------------------------------------------------------

fn relation_sweeps() -> Vec<SweepResult> {
    let flow = reference_flow();
    let link = LinkSpec::overprovisioned(mbps(10.0)).unwrap();
    let opts = SweepOptions::default();
    let periods = SweepGrid::Periods(PERIODS.iter().map(|p| secs(*p)).collect());
    let mut out = Vec::new();
    for name in [CCM_101, GNMI_204] {
        let m = preset(name).unwrap().method;
        out.push(impact_vs_uncertainty_sweep(name, m, &flow, link, &periods, secs(HORIZON), 0, &opts).unwrap());
    }
    let ratios = SweepGrid::SamplingRatios(vec![1, 10, 100]);
    out.push(impact_vs_uncertainty_sweep(IOAM_3HOP, ioam(1), &flow, link, &ratios, secs(HORIZON), 0, &opts).unwrap());
    out
}

const SWEEP_CONFIG: &str = r#"
experiment = "sweep"
duration = "100s"

[link]
capacity = "10Mbps"
overprovisioned = true

[[flow]]
id = "f0"
rate = "1Mbps"
packet_size = "360B"

[[method]]
id = "ccm"
flow = "f0"
preset = "ccm-101"

[sweep]
method = "ccm"
periods = "3.33ms,100ms,1s,10s"
"#;

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for r in relation_sweeps() {
        for p in &r.points {
            let ratio = p.record.ratio();
            worst = worst.max((ratio - 1.0).abs());
            check((0.99..=1.01).contains(&ratio) && p.record.holds, || {
                format!("{} {}={}: product/bound = {ratio}", r.method, r.variable, p.value)
            })?;
        }
    }
    let config = parse_config(SWEEP_CONFIG).map_err(|e| e.to_string())?;
    let outcome = run(&config, &Overrides::default()).map_err(|e| e.to_string())?;
    let rows = outcome
        .csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect::<Vec<_>>();
    check(
        outcome.success() && rows.len() == 4 && rows.iter().all(|l| l.ends_with(",true")),
        || format!("sweep config run: {:?}", outcome.failures),
    )?;
    timed(60.0, start, format!("11 points, max |product/bound - 1| = {worst:.2e}"))
}

// 3 -----------------------------------------------------------------------

const SCENARIOS: usize = 120;

fn random_scenarios() -> Vec<(Scenario, Duration)> {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (0.1f64..10.0, 0.5f64..20.0, 256u64..=1500, 0usize..3);
    (0..SCENARIOS)
        .map(|i| {
            let (rate, cap, octets, knob) = strategy.new_tree(&mut runner).unwrap().current();
            let flow = FlowSpec::new("f0", mbps(rate), octets * 8).unwrap();
            let method = match i % 3 {
                0 => periodic(CCM_101, [0.00333, 0.1, 1.0][knob]),
                1 => periodic(GNMI_204, [0.00333, 0.1, 1.0][knob]),
                _ => ioam([1, 10, 100][knob]),
            };
            let overprovisioned = (i / 3) % 2 == 0;
            let tau = method.effective_period(&flow).secs();
            let duration = secs((10.0 * tau).max(10.0));
            (
                single(&flow, LinkSpec::new(mbps(cap), overprovisioned).unwrap(), method),
                duration,
            )
        })
        .collect()
}

fn lemma_twins() -> Vec<TwinImpact> {
    random_scenarios()
        .iter()
        .map(|(s, d)| measure_impact(s, *d, 0, &SimOptions::default()).unwrap())
        .collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let scenarios = random_scenarios();
    let mut saturated = 0;
    for ((s, d), twin) in scenarios.iter().zip(lemma_twins()) {
        let m = &s.methods()[0];
        let ov = m.method.overhead_rate(s.flow_of(m)).bps();
        let q = s.max_packet_bits() as f64 / d.secs();
        let impact = twin.impact.value.bps();
        if twin.observed.total().dropped > 0 {
            saturated += 1;
        }
        check(impact >= ov - q && impact <= ov + q, || {
            format!(
                "{} on {:?}: impact {impact} vs Ov {ov} +/- {q}",
                m.method.class(),
                s.link()
            )
        })?;
    }
    timed(
        120.0,
        start,
        format!("{SCENARIOS} scenarios ({saturated} with loss), impact within Ov +/- quantum"),
    )
}

// 4 -----------------------------------------------------------------------

const SPLIT_RATIOS: [u32; 7] = [1, 2, 5, 10, 20, 50, 100];

fn split_twins(overprovisioned: bool) -> Vec<(f64, f64, TwinImpact)> {
    let flow = reference_flow();
    let link = LinkSpec::new(mbps(1.0), overprovisioned).unwrap();
    SPLIT_RATIOS
        .iter()
        .map(|s| {
            let sc = single(&flow, link, ioam(*s));
            let ov = ioam(*s).overhead_rate(&flow).bps();
            (
                ov,
                quantum(&sc),
                measure_impact(&sc, secs(HORIZON), 0, &SimOptions::default()).unwrap(),
            )
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut detail = Vec::new();
    for overprovisioned in [true, false] {
        let (kind, label) = if overprovisioned {
            (ImpactKind::DataRate, "overprovisioned")
        } else {
            (ImpactKind::LossRate, "saturated")
        };
        let twins = split_twins(overprovisioned);
        for (ov, q, t) in &twins {
            let v = t.impact.value.bps();
            check(t.impact.kind == kind && (v - ov).abs() <= *q, || {
                format!("{label}: impact {} {v} vs Ov {ov} +/- {q}", t.impact.kind)
            })?;
            if overprovisioned {
                check(t.observed.total().dropped == 0, || {
                    format!("{label}: dropped bits at Ov {ov}")
                })?;
            }
        }
        let fit = linear_fit(
            &twins
                .iter()
                .map(|(ov, _, t)| (*ov, t.impact.value.bps()))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        check((fit.slope - 1.0).abs() <= 0.02, || {
            format!("{label}: slope {}", fit.slope)
        })?;
        detail.push(format!("{label} slope {:.5}", fit.slope));
    }
    Ok(detail.join(", "))
}

// 5 -----------------------------------------------------------------------

fn ovu_rows() -> Vec<OvuRow> {
    let rates: Vec<BitRate> = (0..21).map(|i| mbps(0.5 + 0.05 * i as f64)).collect();
    observed_vs_unobserved_curve(
        &rates,
        LinkSpec::saturable(mbps(1.0)).unwrap(),
        ioam(1),
        360 * 8,
        secs(HORIZON),
        0,
        &SimOptions::default(),
    )
    .unwrap()
}

fn criterion_5() -> Outcome {
    let rows = ovu_rows();
    let step = 0.05e6;
    let expected = observed_loss_onset(mbps(1.0), 640.0 / 2880.0).bps();
    let onset = rows
        .iter()
        .find(|r| r.loss_observed.bps() > 0.0)
        .ok_or("observed loss never positive")?
        .user_rate
        .bps();
    check((onset - expected).abs() <= step, || {
        format!("onset {onset} vs {expected}")
    })?;
    for r in &rows {
        let (u, obs, un) = (r.user_rate.bps(), r.loss_observed.bps(), r.loss_unobserved.bps());
        check(obs >= un, || format!("observed {obs} < unobserved {un} at {u}"))?;
        let unobserved_ok = if u <= 1e6 + 1e-6 { un == 0.0 } else { un > 0.0 };
        check(unobserved_ok, || format!("unobserved loss {un} at {u}"))?;
    }
    Ok(format!(
        "observed onset {:.3} Mbps (C/(1+f) = {:.4}), unobserved onset above 1 Mbps",
        onset / 1e6,
        expected / 1e6
    ))
}

// 6 -----------------------------------------------------------------------

fn detections() -> Vec<DetectionReport> {
    let flow = reference_flow();
    let s = single(
        &flow,
        LinkSpec::overprovisioned(mbps(2.0)).unwrap(),
        periodic(CCM_101, 0.1),
    );
    detection_trials(
        &s,
        &MethodId::new("m"),
        secs(HORIZON),
        1000,
        0,
        &DetectionOptions::default(),
    )
    .unwrap()
}

fn criterion_6(warnings: &mut Vec<String>) -> Outcome {
    let tau = 0.1;
    let reports = detections();
    for r in &reports {
        check(r.latency > 0.0 && r.latency <= tau * (1.0 + 1e-12), || {
            format!("latency {} for failure at {}", r.latency, r.failure_time)
        })?;
    }
    let max = reports.iter().map(|r| r.latency).fold(0.0, f64::max);
    check(max >= 0.99 * tau, || format!("max latency {max} below 0.99 tau"))?;
    let mean = reports.iter().map(|r| r.latency).sum::<f64>() / reports.len() as f64;
    if !(0.45 * tau..=0.55 * tau).contains(&mean) {
        warnings.push(format!("criterion 6: mean latency {mean} outside [0.45, 0.55] tau"));
    }
    Ok(format!("1000 trials, max {max:.5}s, mean {mean:.5}s"))
}

// 7 -----------------------------------------------------------------------

fn scaling_runs() -> Vec<(String, f64, SweepResult)> {
    let flow = reference_flow();
    let opts = SweepOptions::default();
    let mut out = Vec::new();
    for name in [CCM_101, GNMI_204] {
        for tau in PERIODS {
            let r = scaling_sweep(name, periodic(name, tau), &FLOW_COUNTS, &flow, secs(HORIZON), 0, &opts).unwrap();
            out.push((name.to_string(), tau, r));
        }
    }
    let fluid = SweepOptions {
        fluid: FluidPolicy::Always,
        ..SweepOptions::default()
    };
    let rates: Vec<BitRate> = [1e6, 1e7, 1e8, 1e9, 1e10, 1e11]
        .iter()
        .map(|r| BitRate::new(*r).unwrap())
        .collect();
    for s in [1, 10, 100] {
        let r = rate_scaling_sweep(IOAM_3HOP, ioam(s), &rates, 360 * 8, secs(HORIZON), 0, &fluid).unwrap();
        out.push((IOAM_3HOP.to_string(), f64::from(s), r));
    }
    out
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut packet_points = 0;
    let (mut worst_intercept, mut worst_ols) = (0.0f64, 0.0f64);
    for (name, knob, r) in scaling_runs() {
        packet_points += r.points.iter().filter(|p| p.mode.as_str() == "packet").count();
        if name == IOAM_3HOP {
            for p in &r.points {
                let expected = 640.0 / 2880.0 * p.value / knob;
                let v = p.record.delta_p.value.bps();
                check((v / expected - 1.0).abs() <= 0.01, || {
                    format!("ioam s={knob} R={}: {v} vs {expected}", p.value)
                })?;
            }
            continue;
        }
        let hbar = preset(&name).unwrap().method.observer_factor().bits() as f64;
        // Each point is accurate to one quantum per flow, so weight by 1/N².
        let pts: Vec<_> = r
            .points
            .iter()
            .map(|p| (p.value, p.record.delta_p.value.bps(), p.value.powi(-2)))
            .collect();
        let fit = weighted_linear_fit(&pts).unwrap();
        let ols = linear_fit(&pts.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>()).unwrap();
        worst_ols = worst_ols.max(ols.intercept.abs());
        worst_intercept = worst_intercept.max(fit.intercept.abs());
        let slope = hbar / knob;
        let q = r.points[0].quantum;
        check((fit.slope / slope - 1.0).abs() <= 0.01, || {
            format!("{name} tau={knob}: slope {} vs {slope}", fit.slope)
        })?;
        check(fit.intercept.abs() <= q, || {
            format!("{name} tau={knob}: intercept {} > {q}", fit.intercept)
        })?;
        for p in &r.points {
            let collapsed = p.record.delta_p.value.bps() * knob / (p.value * hbar);
            check((collapsed - 1.0).abs() <= 0.01, || {
                format!("{name} tau={knob} N={}: impact*tau/(N*hbar) = {collapsed}", p.value)
            })?;
        }
    }
    timed(
        120.0,
        start,
        format!(
            "8 N-sweeps + 3 rate sweeps, {packet_points} points in packet mode, \
             max |intercept| {worst_intercept:.3} bps (unweighted {worst_ols:.1})"
        ),
    )
}

// 8 -----------------------------------------------------------------------

fn same<T: Debug>(what: &str, f: impl Fn() -> T) -> Result<(), String> {
    let a = format!("{:?}", f());
    let b = format!("{:?}", f());
    check(a == b, || format!("{what} differs between repeated runs"))
}

fn criterion_8() -> Outcome {
    same("relation sweeps", relation_sweeps)?;
    same("lemma twins", lemma_twins)?;
    same("split twins", || (split_twins(true), split_twins(false)))?;
    same("ovu curve", ovu_rows)?;
    same("detection trials", detections)?;
    same("scaling sweeps", scaling_runs)?;
    let config = parse_config(SWEEP_CONFIG).map_err(|e| e.to_string())?;
    same("sweep csv", || run(&config, &Overrides::default()).unwrap().csv)?;

    let mut reports = 0;
    let split = split_twins(true)
        .into_iter()
        .chain(split_twins(false))
        .map(|(_, _, t)| t);
    for t in lemma_twins().into_iter().chain(split) {
        for r in [&t.observed, &t.baseline] {
            reports += 1;
            let total = r.total();
            let mut all = r
                .per_flow
                .values()
                .chain(r.per_method.values())
                .chain([&r.overhead, &total]);
            check(all.all(|c| c.is_conserved()), || {
                "offered != delivered + dropped".into()
            })?;
        }
    }
    Ok(format!(
        "7 repeated runs bit-identical, {reports} reports conserve bits"
    ))
}

fn main() {
    let mut warnings = Vec::new();
    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "observer-factor constants", criterion_1()),
        (2, "uncertainty-relation equality", criterion_2()),
        (3, "impact >= overhead", criterion_3()),
        (4, "overprovisioned vs saturated split", criterion_4()),
        (5, "observed vs unobserved loss", criterion_5()),
        (6, "detection bound", criterion_6(&mut warnings)),
        (7, "N-flow scaling", criterion_7()),
        (8, "determinism and conservation", criterion_8()),
    ];
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {why}");
            }
        }
    }
    for w in &warnings {
        println!("warning: {w}");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
