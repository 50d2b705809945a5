use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::methods::MeasurementMethod;
use crate::scenario::{validate_scenario, FlowSpec, LinkSpec, MethodBinding};
use crate::sim::{fluid_oracle, run_sim, SimOptions};
use crate::units::{BitRate, Duration, OverheadBits};

/// Lower-bound curve `ΔP = slope · ħ / ΔM` at each uncertainty in `dm_grid`.
pub fn hyperbola_reference(hbar: OverheadBits, metric_slope: f64, dm_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(bad) = dm_grid.iter().find(|dm| !(dm.is_finite() && **dm > 0.0)) {
        return Err(Error::InvalidGrid(format!("uncertainty {bad} is not positive")));
    }
    Ok(dm_grid
        .iter()
        .map(|dm| (*dm, metric_slope * hbar.bits() as f64 / dm))
        .collect())
}

/// Loss of an in-band-monitored flow next to its unmonitored twin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvuRow {
    pub user_rate: BitRate,
    pub loss_observed: BitRate,
    pub loss_unobserved: BitRate,
    pub fluid_observed: BitRate,
    pub fluid_unobserved: BitRate,
}

/// User rate at which an observed flow starts losing packets: `C / (1 + f)`
/// where `f` is the telemetry bits added per data bit.
pub fn observed_loss_onset(capacity: BitRate, overhead_fraction: f64) -> BitRate {
    BitRate::new(capacity.bps() / (1.0 + overhead_fraction)).expect("positive")
}

/// Sweeps the user rate of one flow over a fixed link, with and without the
/// in-band method, and reports the loss rate of each.
pub fn observed_vs_unobserved_curve(
    rates: &[BitRate],
    link: LinkSpec,
    method: MeasurementMethod,
    packet_bits: u64,
    duration: Duration,
    seed: u64,
    sim: &SimOptions,
) -> Result<Vec<OvuRow>> {
    if method.in_band_params().is_none() {
        return Err(Error::InvalidMethod(
            "observed-vs-unobserved needs an in-band method".into(),
        ));
    }
    if rates.is_empty() || rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "rate grid must be non-empty and strictly increasing".into(),
        ));
    }
    rates
        .par_iter()
        .map(|rate| {
            let flow = FlowSpec::new("f0", *rate, packet_bits)?;
            let observed = validate_scenario(
                vec![flow.clone()],
                link,
                vec![MethodBinding::new("inband", method, "f0")],
            )?;
            let unobserved = observed.unobserved();
            let obs = run_sim(&observed, duration, seed, sim)?;
            let unobs = run_sim(&unobserved, duration, seed, sim)?;
            Ok(OvuRow {
                user_rate: *rate,
                loss_observed: obs.loss_rate(),
                loss_unobserved: unobs.loss_rate(),
                fluid_observed: fluid_oracle(&observed).dropped,
                fluid_unobserved: fluid_oracle(&unobserved).dropped,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{preset, IOAM_3HOP};

    #[test]
    fn hyperbola_points() {
        let h = OverheadBits::from_bits(808);
        let pts = hyperbola_reference(h, 1.0, &[1.0, 2.0]).unwrap();
        assert_eq!(pts, vec![(1.0, 808.0), (2.0, 404.0)]);
        let flat = hyperbola_reference(OverheadBits::ZERO, 1.0, &[0.1, 1.0, 10.0]).unwrap();
        assert!(flat.iter().all(|p| p.1 == 0.0));
        assert!(hyperbola_reference(h, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn onset_below_capacity() {
        let c = BitRate::from_mbps(1.0).unwrap();
        let onset = observed_loss_onset(c, 640.0 / 2880.0);
        assert!((onset.bps() - 818_181.818).abs() < 1.0);
    }

    #[test]
    fn curve_examples() {
        let mbps = |x| BitRate::from_mbps(x).unwrap();
        let link = LinkSpec::saturable(mbps(1.0)).unwrap();
        let rows = observed_vs_unobserved_curve(
            &[mbps(0.5), mbps(0.9), mbps(1.2)],
            link,
            preset(IOAM_3HOP).unwrap().method,
            2880,
            Duration::from_secs(100.0).unwrap(),
            0,
            &SimOptions::default(),
        )
        .unwrap();
        let q = 3520.0 / 100.0;
        assert_eq!(rows[0].loss_observed, BitRate::ZERO);
        assert_eq!(rows[0].loss_unobserved, BitRate::ZERO);
        assert_eq!(rows[1].loss_unobserved, BitRate::ZERO);
        // 0.9 × (1 + 640/2880) − 1 Mbps
        let f = 640.0 / 2880.0;
        assert!((rows[1].loss_observed.bps() - (0.9e6 * (1.0 + f) - 1e6)).abs() <= q);
        assert!((rows[2].loss_unobserved.bps() - 0.2e6).abs() <= q);
        assert!((rows[2].loss_observed.bps() - (1.2e6 * (1.0 + f) - 1e6)).abs() <= q);
    }
}
