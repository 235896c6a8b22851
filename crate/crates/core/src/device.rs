//! Physical model of the two-transmon molecule.
//!
//! Two nominally identical flux-tunable transmons at the full-hybridization
//! point ω₁ = ω₂ = ω, exchange-coupled at rate g. The single-excitation
//! eigenstates are the symmetric and antisymmetric collective modes
//! |s⟩ = (|10⟩+|01⟩)/√2 and |a⟩ = (|10⟩−|01⟩)/√2, split by 2g, each coupled
//! to its own waveguide. A flux line on qubit 1 provides the longitudinal
//! (dephasing) channel.

use crate::error::{Error, Result};
use crate::operators::{embed, ladder_op, C64, HilbertDims, OperatorMatrix};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380649e-23;
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// All rates and frequencies of the machine, in angular units (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Bare degenerate qubit frequency ω.
    pub omega: f64,
    /// Inter-transmon coupling g.
    pub g: f64,
    /// Transmon anharmonicity α (signed; negative for these devices).
    pub alpha: f64,
    /// Radiative coupling of the symmetric mode to waveguide S.
    pub gamma_s: f64,
    /// Radiative coupling of the antisymmetric mode to waveguide A.
    pub gamma_a: f64,
    /// Parasitic coupling of the symmetric mode to other channels.
    pub gamma_s_prime: f64,
    /// Parasitic coupling of the antisymmetric mode to other channels.
    pub gamma_a_prime: f64,
    /// Incoherent |s⟩↔|a⟩ exchange rate fed by flux noise at 2g.
    pub gamma_phi: f64,
    /// Mean photon number of waveguide S at the symmetric mode frequency.
    pub n_s: f64,
    /// Mean photon number of waveguide A at the antisymmetric mode frequency.
    pub n_a: f64,
    /// Per-transmon truncation.
    pub dims: HilbertDims,
}

impl DeviceParams {
    /// Device values extracted from spectroscopy: ω/2π = 5.866 GHz,
    /// g/2π = 560.1 MHz, α/2π = −133 MHz, Γs/2π = 2.87 MHz,
    /// Γa/2π = 2.83 MHz, Γ′s/2π = 98 kHz, Γ′a/2π = 97 kHz,
    /// Γφ/2π = 0.94 MHz; waveguides at T_s = 177 mK, T_a = 39 mK.
    pub fn paper() -> Self {
        let omega = TWO_PI * 5.866e9;
        let g = TWO_PI * 560.1e6;
        let mut p = Self {
            omega,
            g,
            alpha: -TWO_PI * 133.0e6,
            gamma_s: TWO_PI * 2.87e6,
            gamma_a: TWO_PI * 2.83e6,
            gamma_s_prime: TWO_PI * 98.0e3,
            gamma_a_prime: TWO_PI * 97.0e3,
            gamma_phi: TWO_PI * 0.94e6,
            n_s: 0.0,
            n_a: 0.0,
            dims: HilbertDims::two_qubits(),
        };
        p.n_s = occupation_from_temperature(0.177, p.omega_s()).expect("valid");
        p.n_a = occupation_from_temperature(0.039, p.omega_a()).expect("valid");
        p
    }

    /// Symmetric-mode frequency ω_s = ω + g.
    pub fn omega_s(&self) -> f64 {
        self.omega + self.g
    }

    /// Antisymmetric-mode frequency ω_a = ω − g.
    pub fn omega_a(&self) -> f64 {
        self.omega - self.g
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParams("omega must be positive".into()));
        }
        if !(self.g > 0.0) {
            return Err(Error::InvalidParams("g must be positive".into()));
        }
        if !(self.omega - self.g > 0.0) {
            return Err(Error::InvalidParams(
                "omega - g must stay positive (antisymmetric mode frequency)".into(),
            ));
        }
        for (name, v) in [
            ("gamma_s", self.gamma_s),
            ("gamma_a", self.gamma_a),
            ("gamma_s_prime", self.gamma_s_prime),
            ("gamma_a_prime", self.gamma_a_prime),
            ("gamma_phi", self.gamma_phi),
            ("n_s", self.n_s),
            ("n_a", self.n_a),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be >= 0")));
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParams("alpha must be finite".into()));
        }
        if self.dims.num_sites() != 2 {
            return Err(Error::InvalidParams(
                "device model requires exactly two sites".into(),
            ));
        }
        Ok(())
    }
}

/// Collective-mode operators on the two-site tensor space.
#[derive(Debug, Clone)]
pub struct CollectiveOps {
    pub sigma_s_minus: OperatorMatrix,
    pub sigma_s_plus: OperatorMatrix,
    pub sigma_a_minus: OperatorMatrix,
    pub sigma_a_plus: OperatorMatrix,
    /// σ_z of qubit 1: σ₁⁺σ₁⁻ − σ₁⁻σ₁⁺.
    pub sigma_z1: OperatorMatrix,
}

/// σ_{s,a}^± = (σ₁^± ± σ₂^±)/√2 with qubit 1 on the left.
pub fn collective_ops(dims: &HilbertDims) -> Result<CollectiveOps> {
    if dims.num_sites() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "collective ops need two sites, got {}",
            dims.num_sites()
        )));
    }
    let s1 = embed(&ladder_op(dims.per_site_levels()[0])?, 0, dims)?;
    let s2 = embed(&ladder_op(dims.per_site_levels()[1])?, 1, dims)?;
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sigma_s_minus = s1.add(&s2).scale(inv_sqrt2);
    let sigma_a_minus = s1.sub(&s2).scale(inv_sqrt2);
    let sigma_z1 = s1.dagger().dot(&s1).sub(&s1.dot(&s1.dagger()));
    Ok(CollectiveOps {
        sigma_s_plus: sigma_s_minus.dagger(),
        sigma_a_plus: sigma_a_minus.dagger(),
        sigma_s_minus,
        sigma_a_minus,
        sigma_z1,
    })
}

/// Lab-frame Hamiltonian Σᵢ ω σᵢ⁺σᵢ⁻ + g(σ₁⁺σ₂⁻ + h.c.), plus the
/// anharmonicity term Σᵢ (α/2) σᵢ⁺σᵢ⁺σᵢ⁻σᵢ⁻ when three levels are kept.
pub fn build_hamiltonian(p: &DeviceParams) -> Result<OperatorMatrix> {
    p.validate()?;
    hamiltonian_unchecked(p.omega, p.g, p.alpha, &p.dims)
}

/// Hamiltonian assembly without parameter validation; used by the driven
/// (rotating-frame) builder where ω − ω_d may be zero or negative.
pub(crate) fn hamiltonian_unchecked(
    omega: f64,
    g: f64,
    alpha: f64,
    dims: &HilbertDims,
) -> Result<OperatorMatrix> {
    if dims.num_sites() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "device Hamiltonian needs two sites, got {}",
            dims.num_sites()
        )));
    }
    let s1 = embed(&ladder_op(dims.per_site_levels()[0])?, 0, dims)?;
    let s2 = embed(&ladder_op(dims.per_site_levels()[1])?, 1, dims)?;
    let dim = dims.total_dim();
    let mut h = OperatorMatrix::zeros(dim);
    for s in [&s1, &s2] {
        let n = s.dagger().dot(s);
        h = h.add(&n.scale_re(omega));
        // (α/2) σ⁺σ⁺σ⁻σ⁻ = (α/2) n(n−1); identically zero on two levels.
        let nn = n.dot(&n).sub(&n);
        h = h.add(&nn.scale_re(alpha / 2.0));
    }
    let exchange = s1.dagger().dot(&s2);
    h = h.add(&exchange.add(&exchange.dagger()).scale_re(g));
    Ok(h)
}

/// Labeled eigenfrequencies (GHz) of the three-level molecule up to the
/// second excitation manifold, cross-checked against the closed forms.
///
/// Closed forms: E(|a⟩) = ω−g, E(|s⟩) = ω+g, E(|2−⟩) = 2ω+α,
/// E(|2+⟩_{L,U}) = (4ω+α ∓ √(16g²+α²))/2.
pub fn eigenstructure(p: &DeviceParams) -> Result<Vec<(String, f64)>> {
    p.validate()?;
    if p.dims.per_site_levels() != [3, 3] {
        return Err(Error::InvalidParams(
            "eigenstructure requires [3,3] truncation".into(),
        ));
    }
    let root = (16.0 * p.g * p.g + p.alpha * p.alpha).sqrt();
    let closed: Vec<(String, f64)> = vec![
        ("0".into(), 0.0),
        ("a".into(), p.omega - p.g),
        ("s".into(), p.omega + p.g),
        ("2+L".into(), 0.5 * (4.0 * p.omega + p.alpha - root)),
        ("2-".into(), 2.0 * p.omega + p.alpha),
        ("2+U".into(), 0.5 * (4.0 * p.omega + p.alpha + root)),
    ];

    let h = build_hamiltonian(p)?;
    let mut numeric = h.eigenvalues_hermitian()?;
    numeric.sort_by(f64::total_cmp);

    let scale = p.omega.abs().max(1.0);
    let mut used = vec![false; numeric.len()];
    let mut out = Vec::with_capacity(closed.len());
    for (label, target) in &closed {
        let mut best: Option<(usize, f64)> = None;
        for (k, &v) in numeric.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = (v - target).abs();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        let (k, d) =
            best.ok_or_else(|| Error::DegenerateLabeling("ran out of numeric eigenvalues".into()))?;
        if d > 1e-9 * scale {
            return Err(Error::DegenerateLabeling(format!(
                "label {label}: closed form {:.6e} vs numeric {:.6e} (diff {:.3e} rad/s)",
                target, numeric[k], d
            )));
        }
        used[k] = true;
        out.push((label.clone(), numeric[k] / (TWO_PI * 1e9)));
    }
    Ok(out)
}

/// Bose–Einstein occupation n = 1/(exp(ħω/k_B T) − 1).
pub fn occupation_from_temperature(temperature_k: f64, omega: f64) -> Result<f64> {
    if !(temperature_k > 0.0) {
        return Err(Error::InvalidParams("temperature must be positive".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParams("frequency must be positive".into()));
    }
    let x = HBAR * omega / (KB * temperature_k);
    Ok(1.0 / x.exp_m1())
}

/// Exact inverse of [`occupation_from_temperature`].
pub fn temperature_from_occupation(n: f64, omega: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::InvalidParams("occupation must be positive".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParams("frequency must be positive".into()));
    }
    Ok(HBAR * omega / (KB * (1.0 / n).ln_1p()))
}

/// Band-limited flux-noise drive on the dephasing channel.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Center frequency ω_CF of the flat noise band, rad/s.
    pub center_frequency: f64,
    /// Band width, rad/s.
    pub bandwidth: f64,
    /// Noise amplitude, arbitrary units.
    pub amplitude: f64,
    /// Calibration constant mapping amplitude² to Γφ, rad/s per unit².
    pub kappa_phi: f64,
}

/// Effective exchange rate: Γφ = κ_φ·amplitude² when the band covers the
/// |a⟩–|s⟩ splitting 2g, zero otherwise. Only spectral weight at 2g drives
/// the incoherent mode exchange.
pub fn effective_dephasing_rate(noise: &NoiseSpec, g: f64) -> f64 {
    if noise.bandwidth <= 0.0 || noise.amplitude < 0.0 {
        return 0.0;
    }
    let lo = noise.center_frequency - noise.bandwidth / 2.0;
    let hi = noise.center_frequency + noise.bandwidth / 2.0;
    let gap = 2.0 * g;
    if gap >= lo && gap <= hi {
        noise.kappa_phi * noise.amplitude * noise.amplitude
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::Array1;

    const GHZ: f64 = TWO_PI * 1e9;

    #[test]
    fn hamiltonian_is_hermitian() {
        for dims in [HilbertDims::two_qubits(), HilbertDims::two_transmons()] {
            let mut p = DeviceParams::paper();
            p.dims = dims;
            let h = build_hamiltonian(&p).unwrap();
            assert!(h.is_hermitian(1e-12 * h.max_abs()));
        }
    }

    #[test]
    fn single_excitation_splitting_matches_device() {
        // Single-excitation eigenvalues ω ± g; Δ = ω_s − ω_a = 2g.
        let p = DeviceParams::paper();
        let h = build_hamiltonian(&p).unwrap();
        let mut vals = h.eigenvalues_hermitian().unwrap();
        vals.sort_by(f64::total_cmp);
        // Eigenvalues {0, ω−g, ω+g, 2ω}.
        assert_abs_diff_eq!(vals[0] / GHZ, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(vals[1] / GHZ, 5.3059, epsilon = 1e-3);
        assert_abs_diff_eq!(vals[2] / GHZ, 6.4261, epsilon = 1e-3);
        assert_abs_diff_eq!((vals[2] - vals[1]) / GHZ, 2.0 * 0.5601, epsilon = 1e-12);
    }

    #[test]
    fn uncoupled_limit() {
        let mut p = DeviceParams::paper();
        p.g = 1.0; // effectively zero against omega
        let h = build_hamiltonian(&p).unwrap();
        let mut vals = h.eigenvalues_hermitian().unwrap();
        vals.sort_by(f64::total_cmp);
        let w = p.omega;
        for (v, e) in vals.iter().zip([0.0, w, w, 2.0 * w]) {
            assert_relative_eq!(v + 1.0, e + 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn eigenvalues_invariant_under_transmon_swap() {
        // Swapping the two identical transmons permutes the basis but must
        // leave the spectrum unchanged.
        let mut p = DeviceParams::paper();
        p.dims = HilbertDims::two_transmons();
        let h = build_hamiltonian(&p).unwrap();
        let d = 3;
        let dim = 9;
        let mut perm = ndarray::Array2::<C64>::zeros((dim, dim));
        for i in 0..d {
            for j in 0..d {
                perm[(j * d + i, i * d + j)] = C64::new(1.0, 0.0);
            }
        }
        let perm = OperatorMatrix::from_array(perm).unwrap();
        let swapped = perm.dot(&h).dot(&perm.dagger());
        let mut v1 = h.eigenvalues_hermitian().unwrap();
        let mut v2 = swapped.eigenvalues_hermitian().unwrap();
        v1.sort_by(f64::total_cmp);
        v2.sort_by(f64::total_cmp);
        for (a, b) in v1.iter().zip(v2.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-3);
        }
    }

    #[test]
    fn eigenstructure_reproduces_table_values() {
        let mut p = DeviceParams::paper();
        p.dims = HilbertDims::two_transmons();
        let eig = eigenstructure(&p).unwrap();
        let expected = [
            ("0", 0.0),
            ("a", 5.305),
            ("s", 6.426),
            ("2+L", 10.542),
            ("2-", 11.598),
            ("2+U", 12.787),
        ];
        // The quoted spectroscopy parameters (ω/2π = 5.866 GHz, g/2π =
        // 560.1 MHz) are rounded independently of the tabulated eigenvalues;
        // the worst line (|2+⟩_L) sits 1.33 MHz from the table. The exact
        // closed-form values for these parameters are pinned below.
        for ((label, f_ghz), (e_label, e_ghz)) in eig.iter().zip(expected.iter()) {
            assert_eq!(label, e_label);
            assert!(
                (f_ghz - e_ghz).abs() <= 1.5e-3,
                "{label}: {f_ghz} vs {e_ghz}"
            );
        }
        let frozen = [0.0, 5.3059, 6.4261, 10.5433279, 11.5990, 12.7876721];
        for ((_, f_ghz), e_ghz) in eig.iter().zip(frozen.iter()) {
            assert!((f_ghz - e_ghz).abs() <= 1e-6, "{f_ghz} vs {e_ghz}");
        }
    }

    #[test]
    fn eigenstructure_second_manifold_closed_form() {
        // |2−⟩ sits at 2ω + α; with α/2π = −133 MHz that is 11.599 GHz,
        // which fixes the sign of α.
        let mut p = DeviceParams::paper();
        p.dims = HilbertDims::two_transmons();
        let eig = eigenstructure(&p).unwrap();
        let two_minus = eig.iter().find(|(l, _)| l == "2-").unwrap().1;
        assert_abs_diff_eq!(two_minus, 2.0 * 5.866 - 0.133, epsilon = 1e-9);
        assert_abs_diff_eq!(two_minus, 11.599, epsilon = 1e-9);
    }

    #[test]
    fn eigenstructure_degenerate_limit() {
        let mut p = DeviceParams::paper();
        p.dims = HilbertDims::two_transmons();
        p.g = 1e-3; // → 0 against omega
        p.alpha = 0.0;
        let eig = eigenstructure(&p).unwrap();
        let w = p.omega / GHZ; // GHz
        let freqs: Vec<f64> = eig.iter().map(|(_, f)| *f).collect();
        let expected = [0.0, w, w, 2.0 * w, 2.0 * w, 2.0 * w];
        for (f, e) in freqs.iter().zip(expected.iter()) {
            assert_relative_eq!(f + 1.0, e + 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn eigenstructure_requires_three_levels() {
        let p = DeviceParams::paper();
        assert!(matches!(eigenstructure(&p), Err(Error::InvalidParams(_))));
    }

    fn basis_state(dim: usize, k: usize) -> Array1<C64> {
        let mut v = Array1::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn collective_mode_normalization() {
        // σ_s⁻ |s⟩ = |00⟩ with unit amplitude; σ_a⁻ |s⟩ = 0.
        let dims = HilbertDims::two_qubits();
        let ops = collective_ops(&dims).unwrap();
        // |s⟩ = (|10⟩ + |01⟩)/√2 in the |q1 q2⟩ basis (q1 leftmost):
        // |01⟩ = index 1, |10⟩ = index 2.
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut s_state = Array1::zeros(4);
        s_state[1] = C64::new(inv, 0.0);
        s_state[2] = C64::new(inv, 0.0);
        let lowered = ops.sigma_s_minus.mat().dot(&s_state);
        let ground = basis_state(4, 0);
        let overlap: C64 = ground
            .iter()
            .zip(lowered.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert_abs_diff_eq!(overlap.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap.im, 0.0, epsilon = 1e-12);

        let a_lowered = ops.sigma_a_minus.mat().dot(&s_state);
        let norm: f64 = a_lowered.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 0.0, epsilon = 1e-24);
    }

    #[test]
    fn sigma_z1_decomposition_identity() {
        // σ_z¹ = ½(σ_z^s + σ_z^a) + σ_s⁺σ_a⁻ + σ_a⁺σ_s⁻, checked on the
        // {|00⟩, |a⟩, |s⟩} subspace (it holds on the whole two-qubit space
        // with σ_z^j := σ_j⁺σ_j⁻ − σ_j⁻σ_j⁺).
        let dims = HilbertDims::two_qubits();
        let ops = collective_ops(&dims).unwrap();
        let sz_s = ops
            .sigma_s_plus
            .dot(&ops.sigma_s_minus)
            .sub(&ops.sigma_s_minus.dot(&ops.sigma_s_plus));
        let sz_a = ops
            .sigma_a_plus
            .dot(&ops.sigma_a_minus)
            .sub(&ops.sigma_a_minus.dot(&ops.sigma_a_plus));
        let cross = ops
            .sigma_s_plus
            .dot(&ops.sigma_a_minus)
            .add(&ops.sigma_a_plus.dot(&ops.sigma_s_minus));
        let decomposition = sz_s.add(&sz_a).scale_re(0.5).add(&cross);
        let diff = ops.sigma_z1.sub(&decomposition);

        // Projector onto {|00⟩, |a⟩, |s⟩}.
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut proj = ndarray::Array2::<C64>::zeros((4, 4));
        proj[(0, 0)] = C64::new(1.0, 0.0);
        for sign in [1.0, -1.0] {
            let mut v = Array1::<C64>::zeros(4);
            v[1] = C64::new(inv, 0.0);
            v[2] = C64::new(sign * inv, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    proj[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        let proj = OperatorMatrix::from_array(proj).unwrap();
        let projected = proj.dot(&diff).dot(&proj);
        assert!(projected.max_abs() < 1e-12);
        // Stronger: exact on the full space with this σ_z^j convention.
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn occupation_values() {
        // Bose–Einstein occupations at the device operating point.
        let n_s = occupation_from_temperature(0.177, TWO_PI * 6.426e9).unwrap();
        assert!((n_s - 0.212).abs() < 5e-4, "n_s = {n_s}");
        let n_a = occupation_from_temperature(0.039, TWO_PI * 5.305e9).unwrap();
        assert!((n_a - 0.0015).abs() < 5e-5, "n_a = {n_a}");
    }

    #[test]
    fn occupation_roundtrip_and_monotonicity() {
        let omega = TWO_PI * 6.0e9;
        for t in [0.01, 0.05, 0.177, 1.3] {
            let n = occupation_from_temperature(t, omega).unwrap();
            let back = temperature_from_occupation(n, omega).unwrap();
            assert_relative_eq!(back, t, max_relative = 1e-12);
        }
        // Strictly increasing in T, strictly decreasing in ω.
        let mut prev = 0.0;
        for k in 1..=20 {
            let n = occupation_from_temperature(0.01 * k as f64, omega).unwrap();
            assert!(n > prev);
            prev = n;
        }
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let n = occupation_from_temperature(0.1, TWO_PI * 1e9 * k as f64).unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn occupation_rejects_non_positive() {
        assert!(occupation_from_temperature(0.0, 1.0).is_err());
        assert!(occupation_from_temperature(-1.0, 1.0).is_err());
        assert!(temperature_from_occupation(0.0, 1.0).is_err());
    }

    #[test]
    fn dephasing_gate_on_band_overlap() {
        let g = TWO_PI * 560.1e6;
        let base = NoiseSpec {
            center_frequency: 2.0 * g,
            bandwidth: TWO_PI * 50.0e6,
            amplitude: 0.7,
            kappa_phi: 3.0e6,
        };
        // Band centered on 2g: gate open.
        assert_abs_diff_eq!(
            effective_dephasing_rate(&base, g),
            3.0e6 * 0.49,
            epsilon = 1e-6
        );
        // Band far from 2g: no broadening.
        let detuned = NoiseSpec {
            center_frequency: 2.0 * g + 10.0 * base.bandwidth,
            ..base.clone()
        };
        assert_eq!(effective_dephasing_rate(&detuned, g), 0.0);
        // Zero amplitude.
        let silent = NoiseSpec {
            amplitude: 0.0,
            ..base
        };
        assert_eq!(effective_dephasing_rate(&silent, g), 0.0);
    }

    #[test]
    fn sigma_z1_matrix_form() {
        let dims = HilbertDims::two_qubits();
        let ops = collective_ops(&dims).unwrap();
        // σ_z¹ = diag(−1, −1, +1, +1) in |q1 q2⟩ ordering.
        let expected = OperatorMatrix::diagonal(&[-1.0, -1.0, 1.0, 1.0]);
        assert!(ops.sigma_z1.sub(&expected).max_abs() < 1e-14);
        assert!(
            ops.sigma_s_minus
                .dagger()
                .sub(&ops.sigma_s_plus)
                .max_abs()
                < 1e-15
        );
    }
}
