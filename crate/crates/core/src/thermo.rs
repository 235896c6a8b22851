//! Steady-state heat currents, operating-regime classification, and the
//! temperature/coupling sweeps of the thermal machine.
//!
//! Sign convention: J_c = −ħ·Tr(H 𝓛_c ρ_ss), positive when heat is
//! delivered from the system into channel c. With the S waveguide hotter
//! than A this gives J_s < 0 and J_a, J_φ > 0 (heat-engine pattern).

use crate::device::{occupation_from_temperature, DeviceParams, HBAR};
use crate::error::{Error, Result};
use crate::lindblad::{ChannelTag, DensityMatrix, ThermalMachine};
use crate::operators::{unvectorize, vectorize, OperatorMatrix, SuperOperatorMatrix};

/// Steady-state heat currents in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCurrents {
    pub j_s: f64,
    pub j_a: f64,
    pub j_phi: f64,
    /// Raw Tr(H 𝓛_c ρ) values (rad/s energy flux, before the −ħ sign
    /// convention), kept for debugging.
    pub raw: [f64; 3],
}

impl HeatCurrents {
    pub fn sum(&self) -> f64 {
        self.j_s + self.j_a + self.j_phi
    }

    pub fn max_abs(&self) -> f64 {
        self.j_s.abs().max(self.j_a.abs()).max(self.j_phi.abs())
    }
}

/// Operating regime from the sign pattern of the currents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    HeatEngine,
    Refrigerator,
    Accelerator,
    None,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::HeatEngine => "H",
            RegimeLabel::Refrigerator => "R",
            RegimeLabel::Accelerator => "A",
            RegimeLabel::None => "-",
        }
    }
}

fn trace_h_applied(h: &OperatorMatrix, sup: &SuperOperatorMatrix, rho: &DensityMatrix) -> f64 {
    let out = unvectorize(&sup.apply_vec(&vectorize(&rho.as_operator()))).expect("square");
    h.dot(&out).trace().re
}

/// Per-channel currents from an explicit channel decomposition.
///
/// `l_total` is used for the steadiness check ‖𝓛 vec(ρ)‖ ≤ 1e-6·‖𝓛‖_F;
/// parasitic loss channels, when present, are folded into J_s and J_a.
pub fn heat_currents_from_parts(
    rho_ss: &DensityMatrix,
    h: &OperatorMatrix,
    channels: &[(ChannelTag, SuperOperatorMatrix)],
    l_total: &SuperOperatorMatrix,
) -> Result<HeatCurrents> {
    for required in [ChannelTag::S, ChannelTag::A, ChannelTag::Phi] {
        if !channels.iter().any(|(tag, _)| *tag == required) {
            return Err(Error::ChannelsMissing(format!(
                "channel {} not present",
                required.as_str()
            )));
        }
    }
    let residual = l_total
        .apply_vec(&vectorize(&rho_ss.as_operator()))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let allowed = 1e-6 * l_total.frobenius_norm();
    if residual > allowed {
        return Err(Error::NotSteady { residual, allowed });
    }

    let mut raw = [0.0f64; 3];
    for (tag, sup) in channels {
        let flux = trace_h_applied(h, sup, rho_ss);
        match tag {
            ChannelTag::S | ChannelTag::LossS => raw[0] += flux,
            ChannelTag::A | ChannelTag::LossA => raw[1] += flux,
            ChannelTag::Phi => raw[2] += flux,
        }
    }
    let hc = HeatCurrents {
        j_s: -HBAR * raw[0],
        j_a: -HBAR * raw[1],
        j_phi: -HBAR * raw[2],
        raw,
    };
    // First law at the steady state; the floor absorbs trace roundoff when
    // all currents vanish together at the n_a = n_s crossover.
    let roundoff_floor = HBAR * h.max_abs() * residual * 1e3 + 1e-33;
    let tol = (1e-10 * hc.max_abs()).max(roundoff_floor);
    if hc.sum().abs() > tol {
        return Err(Error::NotSteady {
            residual: hc.sum().abs(),
            allowed: tol,
        });
    }
    Ok(hc)
}

/// Currents of a [`ThermalMachine`] at its steady state.
pub fn heat_currents(machine: &ThermalMachine, rho_ss: &DensityMatrix) -> Result<HeatCurrents> {
    heat_currents_from_parts(
        rho_ss,
        &machine.hamiltonian,
        machine.channel_superops(),
        &machine.liouvillian,
    )
}

/// First-order (in n_s, n_a) closed form of the three currents:
/// K = ΓaΓsΓφ/(ΓsΓφ + Γa(2Γs + Γφ)), J_s = ħ(n_a−n_s)K(g+ω),
/// J_a = ħ(n_a−n_s)K(g−ω), J_φ = −2għ(n_a−n_s)K.
pub fn heat_currents_linearized(p: &DeviceParams) -> Result<HeatCurrents> {
    p.validate()?;
    let denom = p.gamma_s * p.gamma_phi + p.gamma_a * (2.0 * p.gamma_s + p.gamma_phi);
    if denom == 0.0 {
        return Err(Error::InvalidParams(
            "all rates vanish in the linearized current".into(),
        ));
    }
    let k = p.gamma_a * p.gamma_s * p.gamma_phi / denom;
    let dn = p.n_a - p.n_s;
    let j_s = HBAR * dn * k * (p.g + p.omega);
    let j_a = HBAR * dn * k * (p.g - p.omega);
    let j_phi = -2.0 * p.g * HBAR * dn * k;
    Ok(HeatCurrents {
        j_s,
        j_a,
        j_phi,
        raw: [-j_s / HBAR, -j_a / HBAR, -j_phi / HBAR],
    })
}

/// Sign-pattern classifier. Currents smaller than 1e-3 of the largest are
/// treated as indeterminate, which maps the crossover to `None`.
pub fn classify_regime(hc: &HeatCurrents, t_a: f64, t_s: f64) -> RegimeLabel {
    let m = hc.max_abs();
    if m == 0.0 {
        return RegimeLabel::None;
    }
    let sign = |j: f64| -> i8 {
        if j.abs() < 1e-3 * m {
            0
        } else if j > 0.0 {
            1
        } else {
            -1
        }
    };
    let pattern = (sign(hc.j_s), sign(hc.j_a), sign(hc.j_phi));
    match pattern {
        (-1, 1, 1) => RegimeLabel::HeatEngine,
        (1, -1, -1) => {
            if t_a < t_s {
                RegimeLabel::Refrigerator
            } else if t_a > t_s {
                RegimeLabel::Accelerator
            } else {
                RegimeLabel::None
            }
        }
        _ => RegimeLabel::None,
    }
}

/// Refrigerator figures of merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopMetrics {
    pub cop: f64,
    pub cop_carnot: f64,
}

/// COP = |J_a|/(|J_s| − |J_a|), defined inside the refrigeration window;
/// COP_Carnot = T_a/(T_s − T_a).
pub fn performance_metrics(hc: &HeatCurrents, t_a: f64, t_s: f64) -> Result<CopMetrics> {
    if t_a == t_s {
        return Err(Error::CopUndefined("Carnot limit diverges at T_a = T_s".into()));
    }
    if classify_regime(hc, t_a, t_s) != RegimeLabel::Refrigerator {
        return Err(Error::CopUndefined(
            "currents are not in the refrigeration pattern".into(),
        ));
    }
    let denom = hc.j_s.abs() - hc.j_a.abs();
    let cop = if hc.j_a == 0.0 {
        0.0
    } else {
        hc.j_a.abs() / denom
    };
    Ok(CopMetrics {
        cop,
        cop_carnot: t_a / (t_s - t_a),
    })
}

/// One evaluated point of a temperature sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub ratio: f64,
    pub t_a_k: f64,
    pub t_s_k: f64,
    pub n_a: f64,
    pub n_s: f64,
    pub currents: HeatCurrents,
    pub regime: RegimeLabel,
}

/// Full steady-state solve at one antisymmetric bath temperature.
pub fn sweep_point(p: &DeviceParams, t_s_k: f64, t_a_k: f64) -> Result<SweepRow> {
    let mut pt = p.clone();
    pt.n_s = occupation_from_temperature(t_s_k, p.omega_s())?;
    pt.n_a = occupation_from_temperature(t_a_k, p.omega_a())?;
    let machine = ThermalMachine::new(&pt, false)?;
    let rho = machine.steady_state()?;
    let currents = heat_currents(&machine, &rho)?;
    let regime = classify_regime(&currents, t_a_k, t_s_k);
    Ok(SweepRow {
        ratio: t_a_k / t_s_k,
        t_a_k,
        t_s_k,
        n_a: pt.n_a,
        n_s: pt.n_s,
        currents,
        regime,
    })
}

/// Sweep T_a over a monotone grid at fixed T_s; rows sorted by ratio.
pub fn temperature_sweep(p: &DeviceParams, t_s_k: f64, t_a_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if t_a_grid.is_empty() {
        return Err(Error::InvalidParams("empty temperature grid".into()));
    }
    let mut rows = t_a_grid
        .iter()
        .map(|&t_a| sweep_point(p, t_s_k, t_a))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    Ok(rows)
}

/// Uniform grid helper (inclusive endpoints).
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// Locate the ratio where J_a changes sign, by bisection to 1e-4.
///
/// All three currents vanish together where n_a = n_s, i.e. at
/// T_a/T_s = ω_a/ω_s.
pub fn locate_current_crossing(
    p: &DeviceParams,
    t_s_k: f64,
    ratio_lo: f64,
    ratio_hi: f64,
) -> Result<f64> {
    let j_a_at = |ratio: f64| -> Result<f64> {
        Ok(sweep_point(p, t_s_k, ratio * t_s_k)?.currents.j_a)
    };
    let mut lo = ratio_lo;
    let mut hi = ratio_hi;
    let mut f_lo = j_a_at(lo)?;
    let f_hi = j_a_at(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidParams(format!(
            "no sign change of J_a in [{ratio_lo}, {ratio_hi}]"
        )));
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        let f_mid = j_a_at(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of the COP-vs-coupling sweep.
#[derive(Debug, Clone, Copy)]
pub struct CopVsGRow {
    pub g: f64,
    pub cop: f64,
    pub cop_carnot: f64,
}

/// COP just inside the refrigeration window for each coupling rate.
///
/// Each g is evaluated at ratio (ω_a/ω_s)(g)·(1 + ratio_offset) with T_s
/// fixed. The Carnot column is held constant at the value for the input
/// device's own crossover temperatures, and the reported COP is capped
/// there: at small g the first-order COP ω_a/2g grows without bound, which
/// the report clips to the Carnot value for the chosen temperatures.
pub fn cop_vs_g(
    p: &DeviceParams,
    t_s_k: f64,
    g_grid: &[f64],
    ratio_offset: f64,
) -> Result<Vec<CopVsGRow>> {
    if !(ratio_offset > 0.0) {
        return Err(Error::InvalidParams("ratio_offset must be > 0".into()));
    }
    let r_ref = p.omega_a() / p.omega_s() * (1.0 + ratio_offset);
    let t_a_ref = r_ref * t_s_k;
    let cop_carnot = t_a_ref / (t_s_k - t_a_ref);
    let mut rows = Vec::with_capacity(g_grid.len());
    for &g in g_grid {
        if !(g > 0.0) || g >= p.omega {
            return Err(Error::InvalidParams(format!(
                "coupling g = {g} outside (0, omega)"
            )));
        }
        let mut pg = p.clone();
        pg.g = g;
        let crossover = pg.omega_a() / pg.omega_s();
        let ratio = (crossover * (1.0 + ratio_offset)).min(1.0 - 1e-6);
        let row = sweep_point(&pg, t_s_k, ratio * t_s_k)?;
        let metrics = performance_metrics(&row.currents, row.t_a_k, row.t_s_k)?;
        rows.push(CopVsGRow {
            g,
            cop: metrics.cop.min(cop_carnot),
            cop_carnot,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::TWO_PI;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    const ATTO: f64 = 1e-18;

    fn paper_at_operating_point() -> DeviceParams {
        DeviceParams::paper()
    }

    #[test]
    fn linearized_currents_sum_to_zero_exactly() {
        let p = paper_at_operating_point();
        let hc = heat_currents_linearized(&p).unwrap();
        // (g+ω) + (g−ω) − 2g = 0 algebraically; a few ulps survive the
        // three independently rounded products.
        assert!(hc.sum().abs() <= 5e-16 * hc.max_abs());
    }

    #[test]
    fn linearized_currents_match_derived_values() {
        // Closed-form evaluation at Γs/2π = 2.87 MHz, Γa/2π = 2.83 MHz,
        // Γφ/2π = 0.94 MHz, T_s = 177 mK, T_a = 39 mK.
        let p = paper_at_operating_point();
        let hc = heat_currents_linearized(&p).unwrap();
        assert_abs_diff_eq!(hc.j_s / ATTO, -1.993, epsilon = 0.015);
        assert_abs_diff_eq!(hc.j_a / ATTO, 1.646, epsilon = 0.015);
        assert_abs_diff_eq!(hc.j_phi / ATTO, 0.347, epsilon = 0.005);
    }

    #[test]
    fn linearized_bottleneck_saturates_at_large_dephasing() {
        // K → ΓaΓs/(Γs+Γa) as Γφ → ∞.
        let mut p = paper_at_operating_point();
        p.gamma_phi = 1e6 * p.gamma_s;
        let hc = heat_currents_linearized(&p).unwrap();
        let k_inf = p.gamma_a * p.gamma_s / (p.gamma_s + p.gamma_a);
        let expected = HBAR * (p.n_a - p.n_s) * k_inf * p.omega_s();
        assert_relative_eq!(hc.j_s, expected, max_relative = 1e-4);
    }

    #[test]
    fn full_currents_at_operating_point() {
        let p = paper_at_operating_point();
        let machine = ThermalMachine::new(&p, false).unwrap();
        let rho = machine.steady_state().unwrap();
        let hc = heat_currents(&machine, &rho).unwrap();
        // Frozen from the exact three-state solve (spanning-tree check in
        // the module docs' convention): F = f ΓsΓa (n_s−n_a)/ΣT.
        assert_abs_diff_eq!(hc.j_s / ATTO, -1.4214, epsilon = 2e-3);
        assert_abs_diff_eq!(hc.j_a / ATTO, 1.1737, epsilon = 2e-3);
        assert_abs_diff_eq!(hc.j_phi / ATTO, 0.2477, epsilon = 2e-3);
        // First law.
        assert!(hc.sum().abs() <= 1e-10 * hc.max_abs());
        // All three channels share one cycle flux, so the full/linearized
        // ratio is common; at these occupations it is 0.713.
        let lin = heat_currents_linearized(&p).unwrap();
        for (full, lin) in [
            (hc.j_s, lin.j_s),
            (hc.j_a, lin.j_a),
            (hc.j_phi, lin.j_phi),
        ] {
            assert_relative_eq!(full / lin, 0.7132, max_relative = 2e-3);
        }
    }

    #[test]
    fn no_gradient_no_flow() {
        let mut p = paper_at_operating_point();
        p.n_a = p.n_s;
        let machine = ThermalMachine::new(&p, false).unwrap();
        let rho = machine.steady_state().unwrap();
        let hc = heat_currents(&machine, &rho).unwrap();
        // Equal occupations: the factorized thermal state is exactly
        // stationary and every current vanishes to solver precision.
        assert!(hc.max_abs() < 1e-28, "currents {hc:?}");
    }

    #[test]
    fn closed_exchange_channel_blocks_flow() {
        let mut p = paper_at_operating_point();
        p.gamma_phi = 0.0;
        let machine = ThermalMachine::new(&p, false).unwrap();
        let rho = machine.steady_state().unwrap();
        let hc = heat_currents(&machine, &rho).unwrap();
        assert!(hc.max_abs() < 1e-28, "currents {hc:?}");
        let lin = heat_currents_linearized(&p).unwrap();
        assert_eq!(lin.j_s, 0.0);
        assert_eq!(lin.j_a, 0.0);
    }

    #[test]
    fn linearized_agrees_with_full_at_small_occupation() {
        // First-order agreement: the gap scales like ~1.5–1.9·(n_s+n_a), so
        // it stays below 5% for occupations at the 0.01 level.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let mut p = paper_at_operating_point();
            p.gamma_s = TWO_PI * rng.gen_range(1.0e6..4.0e6);
            p.gamma_a = TWO_PI * rng.gen_range(1.0e6..4.0e6);
            p.gamma_phi = TWO_PI * rng.gen_range(0.3e6..3.0e6);
            p.n_s = rng.gen_range(0.002..0.012);
            p.n_a = rng.gen_range(0.0..0.012);
            if (p.n_s - p.n_a).abs() < 2e-3 {
                p.n_a = (p.n_s - 2e-3).max(0.0);
            }
            let machine = ThermalMachine::new(&p, false).unwrap();
            let rho = machine.steady_state().unwrap();
            let full = heat_currents(&machine, &rho).unwrap();
            let lin = heat_currents_linearized(&p).unwrap();
            let scale = lin.max_abs();
            for (f, l) in [
                (full.j_s, lin.j_s),
                (full.j_a, lin.j_a),
                (full.j_phi, lin.j_phi),
            ] {
                assert!(
                    (f - l).abs() <= 0.05 * scale,
                    "n_s={} n_a={}: {f:.3e} vs {l:.3e}",
                    p.n_s,
                    p.n_a
                );
            }
        }
    }

    #[test]
    fn regime_classification_by_temperature_ratio() {
        let p = paper_at_operating_point();
        let t_s = 0.177;
        for (ratio, expected) in [
            (0.2, RegimeLabel::HeatEngine),
            (0.92, RegimeLabel::Refrigerator),
            (1.2, RegimeLabel::Accelerator),
        ] {
            let row = sweep_point(&p, t_s, ratio * t_s).unwrap();
            assert_eq!(row.regime, expected, "ratio {ratio}");
        }
    }

    #[test]
    fn carnot_limit_at_crossover_ratio() {
        // T_a = 0.83·T_s → COP_Carnot = 0.83/0.17 ≈ 4.88.
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let t_a = 0.83 * t_s;
        let row = sweep_point(&p, t_s, t_a).unwrap();
        let m = performance_metrics(&row.currents, t_a, t_s).unwrap();
        assert_abs_diff_eq!(m.cop_carnot, 4.882, epsilon = 0.01);
        assert!(m.cop <= m.cop_carnot);
    }

    #[test]
    fn cop_is_flat_inside_refrigeration_window() {
        // The machine's cycle topology pins COP to ω_a/2g ≈ 4.74 throughout
        // the window; it stays below Carnot, which grows towards 1.
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let expected = p.omega_a() / (2.0 * p.g);
        for ratio in [0.84, 0.9, 0.95, 0.99] {
            let row = sweep_point(&p, t_s, ratio * t_s).unwrap();
            let m = performance_metrics(&row.currents, row.t_a_k, row.t_s_k).unwrap();
            assert_relative_eq!(m.cop, expected, max_relative = 1e-6);
            assert!(m.cop <= m.cop_carnot);
        }
    }

    #[test]
    fn cop_undefined_outside_refrigeration() {
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let row = sweep_point(&p, t_s, 0.2 * t_s).unwrap();
        assert!(matches!(
            performance_metrics(&row.currents, row.t_a_k, row.t_s_k),
            Err(Error::CopUndefined(_))
        ));
        // Carnot undefined at T_a = T_s.
        let hc = row.currents;
        assert!(matches!(
            performance_metrics(&hc, 0.1, 0.1),
            Err(Error::CopUndefined(_))
        ));
    }

    #[test]
    fn sweep_shows_engine_refrigerator_accelerator_sequence() {
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let grid = linspace(0.039, 0.217, 45);
        let rows = temperature_sweep(&p, t_s, &grid).unwrap();
        let labels: Vec<RegimeLabel> = rows.iter().map(|r| r.regime).collect();
        // Collapse consecutive duplicates, dropping crossover Nones.
        let mut sequence: Vec<RegimeLabel> = Vec::new();
        for l in labels {
            if l == RegimeLabel::None {
                continue;
            }
            if sequence.last() != Some(&l) {
                sequence.push(l);
            }
        }
        assert_eq!(
            sequence,
            vec![
                RegimeLabel::HeatEngine,
                RegimeLabel::Refrigerator,
                RegimeLabel::Accelerator
            ]
        );
        // First law at every point.
        for r in &rows {
            assert!(r.currents.sum().abs() <= (1e-10 * r.currents.max_abs()).max(1e-33));
        }
    }

    #[test]
    fn crossing_sits_at_frequency_ratio() {
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let found = locate_current_crossing(&p, t_s, 0.5, 0.99).unwrap();
        let expected = p.omega_a() / p.omega_s();
        assert_abs_diff_eq!(found, expected, epsilon = 1e-4);
        assert_abs_diff_eq!(found, 0.826, epsilon = 0.01);
    }

    #[test]
    fn cop_vs_g_decreases_with_coupling() {
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let grid: Vec<f64> = (0..12)
            .map(|k| TWO_PI * (560.1e6 + 120.0e6 * k as f64))
            .collect();
        let rows = cop_vs_g(&p, t_s, &grid, 2e-3).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[1].cop < pair[0].cop, "not decreasing at g={}", pair[1].g);
            assert_eq!(pair[0].cop_carnot, pair[1].cop_carnot);
        }
        // Paper coupling: first-order value ω_a/2g.
        assert_abs_diff_eq!(rows[0].cop, 4.7366, epsilon = 5e-3);
        // Small g: the diverging first-order COP is reported capped at the
        // Carnot value for the chosen temperatures.
        let small = cop_vs_g(&p, t_s, &[TWO_PI * 100.0e6], 2e-3).unwrap();
        assert_relative_eq!(
            small[0].cop,
            small[0].cop_carnot,
            max_relative = 1e-12
        );
    }

    #[test]
    fn currents_and_carnot_bound_across_refrigeration_window() {
        // Second law: COP ≤ COP_Carnot at every swept refrigeration point.
        let p = paper_at_operating_point();
        let t_s = 0.177;
        let rows = temperature_sweep(&p, t_s, &linspace(0.148, 0.176, 15)).unwrap();
        for r in rows {
            if r.regime == RegimeLabel::Refrigerator {
                let m = performance_metrics(&r.currents, r.t_a_k, r.t_s_k).unwrap();
                assert!(m.cop <= m.cop_carnot + 1e-9, "ratio {}", r.ratio);
            }
        }
    }

    #[test]
    fn missing_channel_is_reported() {
        let p = paper_at_operating_point();
        let machine = ThermalMachine::new(&p, false).unwrap();
        let rho = machine.steady_state().unwrap();
        let partial: Vec<_> = machine
            .channel_superops()
            .iter()
            .filter(|(tag, _)| *tag != ChannelTag::Phi)
            .cloned()
            .collect();
        assert!(matches!(
            heat_currents_from_parts(&rho, &machine.hamiltonian, &partial, &machine.liouvillian),
            Err(Error::ChannelsMissing(_))
        ));
    }

    #[test]
    fn non_steady_input_is_rejected() {
        let p = paper_at_operating_point();
        let machine = ThermalMachine::new(&p, false).unwrap();
        let rho = DensityMatrix::basis_state(3, 2);
        assert!(matches!(
            heat_currents(&machine, &rho),
            Err(Error::NotSteady { .. })
        ));
    }
}
