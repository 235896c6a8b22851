//! Command implementations. Every command writes CSV/text artifacts into
//! the output directory and returns the list of files it produced; the
//! dispatcher adds the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};

use qtm_core::device::{eigenstructure, DeviceParams, HBAR, TWO_PI};
use qtm_core::lindblad::{ThermalMachine, MACHINE_A, MACHINE_GROUND, MACHINE_S};
use qtm_core::operators::HilbertDims;
use qtm_core::reflectometry::{
    dephasing_noise_fit, fit_report, global_reflection_fit, read_reflection_csv,
    simulate_reflection_trace, ReflectionModelParams, ReflectionTrace,
};
use qtm_core::spectra::{
    emission_spectrum, mollow_calibration_fit, transport_vs_dephasing, DriveSpec, DrivenSystem,
    Mode, SpectrumTrace,
};
use qtm_core::thermo::{heat_currents, linspace, sweep_point};

use crate::config::{parse_mode, RunConfig};

const ATTO: f64 = 1e-18;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Evaluate `f` over 0..n on up to `threads` workers, preserving order.
fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let workers = threads.min(n);
    let collected: Mutex<Vec<(usize, Result<T>)>> = Mutex::new(Vec::with_capacity(n));
    std::thread::scope(|scope| {
        for w in 0..workers {
            let f = &f;
            let collected = &collected;
            scope.spawn(move || {
                let mut local = Vec::new();
                let mut i = w;
                while i < n {
                    local.push((i, f(i)));
                    i += workers;
                }
                collected.lock().expect("worker poisoned").extend(local);
            });
        }
    });
    let mut items = collected.into_inner().expect("worker poisoned");
    items.sort_by_key(|(i, _)| *i);
    items.into_iter().map(|(_, r)| r).collect()
}

fn mode_frequency(p: &DeviceParams, mode: Mode) -> f64 {
    match mode {
        Mode::S => p.omega_s(),
        Mode::A => p.omega_a(),
    }
}

fn detuning_grid(span: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| -span / 2.0 + span * k as f64 / (points - 1) as f64)
        .collect()
}

/// `eigen`: Table of labeled eigenfrequencies. Always runs at the [3,3]
/// truncation, which the second excitation manifold requires.
pub fn cmd_eigen(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut p = cfg.device.clone();
    p.dims = HilbertDims::two_transmons();
    let table = eigenstructure(&p).map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let mut csv = String::from("label,freq_GHz\n");
    for (label, ghz) in &table {
        writeln!(csv, "{label},{ghz}").unwrap();
    }
    let path = out.join("eigen.csv");
    write_file(&path, &csv)?;
    Ok(vec![path])
}

/// `steady`: populations and heat currents at the configured temperatures.
pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let machine =
        ThermalMachine::new(&cfg.device, false).map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let rho = machine
        .steady_state()
        .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let pops = rho.populations();
    let mut csv = String::from("state,population\n");
    for (label, idx) in [("0", MACHINE_GROUND), ("a", MACHINE_A), ("s", MACHINE_S)] {
        writeln!(csv, "{label},{}", pops[idx]).unwrap();
    }
    let steady_path = out.join("steady.csv");
    write_file(&steady_path, &csv)?;

    let hc = heat_currents(&machine, &rho).map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let regime = qtm_core::thermo::classify_regime(&hc, cfg.t_a_k, cfg.t_s_k);
    let mut csv = String::from("J_s_aW,J_a_aW,J_phi_aW,sum_aW,regime\n");
    writeln!(
        csv,
        "{},{},{},{},{}",
        hc.j_s / ATTO,
        hc.j_a / ATTO,
        hc.j_phi / ATTO,
        hc.sum() / ATTO,
        regime.as_str()
    )
    .unwrap();
    let heat_path = out.join("heat_currents.csv");
    write_file(&heat_path, &csv)?;
    Ok(vec![steady_path, heat_path])
}

/// `heat-sweep`: regime map over the temperature ratio.
pub fn cmd_heat_sweep(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = &cfg.raw.heat_sweep;
    let grid = linspace(
        section.t_a_min_mk * 1e-3,
        section.t_a_max_mk * 1e-3,
        section.points,
    );
    let rows = parallel_map(grid.len(), cfg.threads(), |k| {
        sweep_point(&cfg.device, cfg.t_s_k, grid[k]).map_err(|e| anyhow!("[{}] {e}", e.module()))
    })?;
    let mut csv = String::from("ratio,T_a_mK,T_s_mK,n_a,n_s,J_s_aW,J_a_aW,J_phi_aW,sum_aW,regime\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.ratio,
            r.t_a_k * 1e3,
            r.t_s_k * 1e3,
            r.n_a,
            r.n_s,
            r.currents.j_s / ATTO,
            r.currents.j_a / ATTO,
            r.currents.j_phi / ATTO,
            r.currents.sum() / ATTO,
            r.regime.as_str()
        )
        .unwrap();
    }
    let path = out.join("heat_sweep.csv");
    write_file(&path, &csv)?;
    Ok(vec![path])
}

/// `cop-vs-g`: coefficient of performance against the coupling rate.
pub fn cmd_cop_vs_g(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = &cfg.raw.cop_vs_g;
    let grid: Vec<f64> = linspace(
        TWO_PI * section.g_min_mhz * 1e6,
        TWO_PI * section.g_max_mhz * 1e6,
        section.points,
    );
    let rows = parallel_map(grid.len(), cfg.threads(), |k| {
        qtm_core::thermo::cop_vs_g(&cfg.device, cfg.t_s_k, &grid[k..=k], section.ratio_offset)
            .map(|mut v| v.remove(0))
            .map_err(|e| anyhow!("[{}] {e}", e.module()))
    })?;
    let mut csv = String::from("g_MHz,cop,cop_carnot\n");
    for r in &rows {
        writeln!(csv, "{},{},{}", r.g / (TWO_PI * 1e6), r.cop, r.cop_carnot).unwrap();
    }
    let path = out.join("cop_vs_g.csv");
    write_file(&path, &csv)?;
    Ok(vec![path])
}

/// `spectrum`: driven emission spectrum of one mode (drive on resonance).
pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = &cfg.raw.spectrum;
    let mode = parse_mode(&section.mode)?;
    let drive = DriveSpec {
        rabi: TWO_PI * section.rabi_mhz * 1e6,
        drive_frequency: mode_frequency(&cfg.device, mode),
        target: mode,
    };
    let sys = DrivenSystem::new(&cfg.device, drive, section.include_parasitic)
        .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let rho = sys
        .steady_state()
        .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let grid = detuning_grid(TWO_PI * section.span_mhz * 1e6, section.points);
    let trace =
        emission_spectrum(&sys, &rho, mode, &grid).map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    log::info!(
        "coherent (elastic) power: {} aW",
        trace.coherent_power / ATTO
    );
    let omega_mode = mode_frequency(&cfg.device, mode);
    let mut csv = String::from("detuning_MHz,psd_W_per_Hz\n");
    for (d, psd) in trace.detunings.iter().zip(trace.psd.iter()) {
        // photon-flux density per rad/s → W per Hz of emitted spectrum
        writeln!(
            csv,
            "{},{}",
            d / (TWO_PI * 1e6),
            psd * HBAR * omega_mode * TWO_PI
        )
        .unwrap();
    }
    let path = out.join("spectrum.csv");
    write_file(&path, &csv)?;
    Ok(vec![path])
}

/// `transport`: J_a and re-emitted P_s against the dephasing rate.
pub fn cmd_transport(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = &cfg.raw.transport;
    if section.gamma_phi_min_mhz <= 0.0 || section.gamma_phi_max_mhz <= section.gamma_phi_min_mhz {
        bail!("transport grid needs 0 < gamma_phi_min_MHz < gamma_phi_max_MHz");
    }
    let mut grid = Vec::with_capacity(section.points + 1);
    if section.include_zero {
        grid.push(0.0);
    }
    let log_lo = section.gamma_phi_min_mhz.ln();
    let log_hi = section.gamma_phi_max_mhz.ln();
    for k in 0..section.points {
        let t = k as f64 / (section.points - 1) as f64;
        grid.push(TWO_PI * 1e6 * (log_lo + t * (log_hi - log_lo)).exp());
    }
    let drive = DriveSpec {
        rabi: TWO_PI * section.rabi_mhz * 1e6,
        drive_frequency: cfg.device.omega_s(),
        target: Mode::S,
    };
    let span = TWO_PI * section.span_mhz * 1e6;
    let rows = parallel_map(grid.len(), cfg.threads(), |k| {
        transport_vs_dephasing(
            &cfg.device,
            drive,
            &grid[k..=k],
            span,
            section.spectrum_points,
        )
        .map(|mut v| v.remove(0))
        .map_err(|e| anyhow!("[{}] {e}", e.module()))
    })?;
    let mut csv = String::from("gamma_phi_MHz,P_s_aW,J_a_aW\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{}",
            r.gamma_phi / (TWO_PI * 1e6),
            r.p_s / ATTO,
            r.j_a / ATTO
        )
        .unwrap();
    }
    let path = out.join("transport.csv");
    write_file(&path, &csv)?;
    Ok(vec![path])
}

fn reflection_model_for_mode(p: &DeviceParams, mode: Mode) -> ReflectionModelParams {
    match mode {
        Mode::S => ReflectionModelParams {
            omega_mode: p.omega_s(),
            gamma: p.gamma_s,
            gamma_prime: p.gamma_s_prime,
            gamma_phi_pure: 0.0,
            rabi: 0.0,
        },
        Mode::A => ReflectionModelParams {
            omega_mode: p.omega_a(),
            gamma: p.gamma_a,
            gamma_prime: p.gamma_a_prime,
            gamma_phi_pure: 0.0,
            rabi: 0.0,
        },
    }
}

fn write_reflection_csv(path: &Path, traces: &[ReflectionTrace]) -> Result<()> {
    let mut csv = String::from("freq_GHz,re_r,im_r,power_dBm,noise_power\n");
    for t in traces {
        let dbm = 10.0 * t.power.log10();
        let noise = t.noise_power.unwrap_or(0.0);
        for (f, r) in t.freqs.iter().zip(t.r.iter()) {
            writeln!(csv, "{},{},{},{},{}", f / (TWO_PI * 1e9), r.re, r.im, dbm, noise).unwrap();
        }
    }
    write_file(path, &csv)
}

/// `fit-reflection`: coupling-rate extraction from multi-power traces.
/// Without an input file, synthetic truth traces are generated, written in
/// the ingestion CSV format, read back, and fit — a full round trip.
pub fn cmd_fit_reflection(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = cfg.raw.fit_reflection.clone().unwrap_or_default();
    let mode = parse_mode(&section.mode)?;
    let mut written = Vec::new();
    let traces = match &section.input {
        Some(path) => {
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_reflection_csv(file).map_err(|e| anyhow!("[{}] {e}", e.module()))?
        }
        None => {
            let truth = reflection_model_for_mode(&cfg.device, mode);
            let grid: Vec<f64> = (0..section.points)
                .map(|k| {
                    truth.omega_mode - TWO_PI * section.span_mhz * 0.5e6
                        + TWO_PI * section.span_mhz * 1e6 * k as f64 / (section.points - 1) as f64
                })
                .collect();
            let traces = simulate_reflection_trace(
                &truth,
                &grid,
                &section.powers,
                section.pow_factor,
                section.noise_sigma,
                cfg.seed(),
            )
            .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
            let traces_path = out.join("reflection_traces.csv");
            write_reflection_csv(&traces_path, &traces)?;
            written.push(traces_path.clone());
            // Round-trip through the ingestion path.
            let file = fs::File::open(&traces_path)?;
            read_reflection_csv(file).map_err(|e| anyhow!("[{}] {e}", e.module()))?
        }
    };
    let fit = global_reflection_fit(&traces).map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let report_path = out.join("reflection_fit.txt");
    write_file(&report_path, &fit_report(&fit))?;
    written.push(report_path);
    Ok(written)
}

/// `fit-dephasing`: Γφ against injected noise power with fixed couplings.
pub fn cmd_fit_dephasing(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = &cfg.raw.fit_dephasing;
    let base = reflection_model_for_mode(&cfg.device, Mode::A);
    let pow_factor = 3.7e11; // probe calibration for synthetic traces
    let mut written = Vec::new();
    let traces = match &section.input {
        Some(path) => {
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_reflection_csv(file).map_err(|e| anyhow!("[{}] {e}", e.module()))?
        }
        None => {
            let grid: Vec<f64> = (0..section.points)
                .map(|k| {
                    base.omega_mode - TWO_PI * section.span_mhz * 0.5e6
                        + TWO_PI * section.span_mhz * 1e6 * k as f64 / (section.points - 1) as f64
                })
                .collect();
            let kappa = TWO_PI * section.kappa_phi_mhz * 1e6;
            let mut traces = Vec::new();
            for (k, &noise_power) in section.noise_powers.iter().enumerate() {
                if noise_power < 0.0 {
                    bail!("noise powers must be >= 0");
                }
                let truth = ReflectionModelParams {
                    gamma_phi_pure: kappa * noise_power,
                    ..base
                };
                let mut t = simulate_reflection_trace(
                    &truth,
                    &grid,
                    &[section.probe_power],
                    pow_factor,
                    section.noise_sigma,
                    cfg.seed().wrapping_add(k as u64),
                )
                .map_err(|e| anyhow!("[{}] {e}", e.module()))?
                .remove(0);
                t.noise_power = Some(noise_power);
                traces.push(t);
            }
            let traces_path = out.join("dephasing_traces.csv");
            write_reflection_csv(&traces_path, &traces)?;
            written.push(traces_path.clone());
            let file = fs::File::open(&traces_path)?;
            read_reflection_csv(file).map_err(|e| anyhow!("[{}] {e}", e.module()))?
        }
    };
    let fit = dephasing_noise_fit(&traces, &base, pow_factor)
        .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let mut csv = String::from("noise_power,gamma_phi_MHz,sigma_MHz\n");
    for p in &fit.points {
        writeln!(
            csv,
            "{},{},{}",
            p.noise_power,
            p.gamma_phi / (TWO_PI * 1e6),
            p.sigma / (TWO_PI * 1e6)
        )
        .unwrap();
    }
    let csv_path = out.join("dephasing_fit.csv");
    write_file(&csv_path, &csv)?;
    written.push(csv_path);
    let report = format!(
        "dephasing characterization\n  kappa_phi_MHz_per_unit = {}\n  points = {}\n",
        fit.kappa_phi / (TWO_PI * 1e6),
        fit.points.len()
    );
    let report_path = out.join("dephasing_fit.txt");
    write_file(&report_path, &report)?;
    written.push(report_path);
    Ok(written)
}

fn read_spectrum_csv(path: &Path) -> Result<SpectrumTrace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut detunings = Vec::new();
    let mut psd = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            continue; // header
        }
        let mut parts = line.split(',');
        let (Some(d), Some(p)) = (parts.next(), parts.next()) else {
            bail!("line {}: expected detuning_MHz,psd", idx + 1);
        };
        detunings.push(
            d.trim()
                .parse::<f64>()
                .with_context(|| format!("line {}", idx + 1))?
                * TWO_PI
                * 1e6,
        );
        psd.push(
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("line {}", idx + 1))?,
        );
    }
    Ok(SpectrumTrace {
        detunings,
        psd,
        coherent_power: 0.0,
    })
}

/// `calibrate-mollow`: fit (Ω, scale) against a resolved triplet. Without
/// an input trace, a synthetic one is generated at the configured Rabi rate
/// and scale, then recovered.
pub fn cmd_calibrate_mollow(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = &cfg.raw.mollow;
    let mode = parse_mode(&section.mode)?;
    let mut written = Vec::new();
    let trace = match &section.input {
        Some(path) => read_spectrum_csv(path)?,
        None => {
            let mut p = cfg.device.clone();
            p.gamma_phi = 0.0;
            let drive = DriveSpec {
                rabi: TWO_PI * section.rabi_mhz * 1e6,
                drive_frequency: mode_frequency(&p, mode),
                target: mode,
            };
            let sys = DrivenSystem::new(&p, drive, true)
                .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
            let rho = sys
                .steady_state()
                .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
            let grid = detuning_grid(TWO_PI * section.span_mhz * 1e6, section.points);
            let mut trace = emission_spectrum(&sys, &rho, mode, &grid)
                .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
            for v in trace.psd.iter_mut() {
                *v *= section.scale;
            }
            let mut csv = String::from("detuning_MHz,psd\n");
            for (d, p) in trace.detunings.iter().zip(trace.psd.iter()) {
                writeln!(csv, "{},{}", d / (TWO_PI * 1e6), p).unwrap();
            }
            let trace_path = out.join("mollow_trace.csv");
            write_file(&trace_path, &csv)?;
            written.push(trace_path.clone());
            read_spectrum_csv(&trace_path)?
        }
    };
    let fit = mollow_calibration_fit(&trace, &cfg.device, mode)
        .map_err(|e| anyhow!("[{}] {e}", e.module()))?;
    let report = format!(
        "mollow calibration\n  rabi_MHz = {}\n  scale = {}\n  residual_ssr = {:e}\n",
        fit.rabi / (TWO_PI * 1e6),
        fit.scale,
        fit.residual
    );
    let report_path = out.join("mollow_fit.txt");
    write_file(&report_path, &report)?;
    written.push(report_path);
    Ok(written)
}
