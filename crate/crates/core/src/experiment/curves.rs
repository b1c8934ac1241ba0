//! Closed-form error-rate curves for the threshold detectors, emitted in
//! the same sweep ranges as the Monte Carlo runs so theory and simulation
//! can sit on one plot.

use crate::analytic::{
    conditional_epsilon_ignoring_phase, conditional_spread, Ald, CoherentDetector, EnergyDetector,
    LinkParams,
};
use crate::codec::Modulation;
use crate::experiment::config::ScenarioConfig;
use crate::geometry::{build_linear_scenario, channel_state, raw_gains};
use crate::sim::db_to_linear;
use crate::Result;
use std::fmt::Write as _;

pub const ANALYTIC_CSV_HEADER: &str = "gamma_db,detector,modulation,p_e";

/// Per-chip error probability of the phase-blind reference detector,
/// thresholding the unrotated statistic with matched interval rules.
pub fn phase_ignoring_pe(link: &LinkParams, modulation: Modulation) -> f64 {
    let (x0, x1) = modulation.symbols();
    let ald = |x: f64| {
        Ald::from_parts(
            conditional_epsilon_ignoring_phase(link, x),
            conditional_spread(link, x),
        )
    };
    CoherentDetector::new(ald(x0), ald(x1)).error_probability()
}

/// Closed-form chip error rates of every threshold detector over a SNR
/// sweep, as CSV.  One row per detector and modulation per point.
pub fn analytic_curves(scenario: &ScenarioConfig, gamma_dbs: &[f64]) -> Result<String> {
    let geom = build_linear_scenario(scenario.d01, scenario.n_r, scenario.tag.to_placement()?)?;
    let chan = channel_state(&raw_gains(&geom), &geom);
    let mut out = String::from(ANALYTIC_CSV_HEADER);
    out.push('\n');
    for &gamma_db in gamma_dbs {
        let link = LinkParams::from_channel(&chan, db_to_linear(gamma_db));
        for modulation in [Modulation::Bpsk, Modulation::Ook] {
            let pe = CoherentDetector::for_link(&link, modulation).error_probability();
            let _ = writeln!(out, "{gamma_db},coherent,{},{pe}", modulation.label());
        }
        let pe_blind = phase_ignoring_pe(&link, Modulation::Bpsk);
        let _ = writeln!(out, "{gamma_db},phase_ignoring,bpsk,{pe_blind}");
        let pe_energy = EnergyDetector::for_link(&link).error_probability();
        let _ = writeln!(out, "{gamma_db},energy,ook,{pe_energy}");
    }
    Ok(out)
}
