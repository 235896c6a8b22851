//! Liouvillian assembly, steady states, and time evolution.
//!
//! The master equation is ρ̇ = 𝓛ρ = −i[H,ρ] + Σ_k γ_k 𝓓[X_k]ρ with the
//! dissipator 𝓓[X]ρ = XρX† − ½{X†X, ρ}. Everything is vectorized
//! (column stacking) so 𝓛 is a dense dim²×dim² matrix; steady states come
//! from its eigendecomposition, time evolution from fixed-step RK4.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::operators::{
    commutator_superop, sandwich_superop, unvectorize, vectorize, C64, OperatorMatrix,
    SuperOperatorMatrix,
};

/// Which physical reservoir a jump operator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelTag {
    /// Symmetric waveguide (thermal).
    S,
    /// Antisymmetric waveguide (thermal).
    A,
    /// Dephasing (exchange) channel.
    Phi,
    /// Parasitic loss of the symmetric mode.
    LossS,
    /// Parasitic loss of the antisymmetric mode.
    LossA,
}

impl ChannelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelTag::S => "S",
            ChannelTag::A => "A",
            ChannelTag::Phi => "PHI",
            ChannelTag::LossS => "LOSS_S",
            ChannelTag::LossA => "LOSS_A",
        }
    }
}

/// A single Lindblad jump term γ·𝓓[X].
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub jump_operator: OperatorMatrix,
    pub rate: f64,
    pub channel_tag: ChannelTag,
}

impl Dissipator {
    pub fn new(jump_operator: OperatorMatrix, rate: f64, channel_tag: ChannelTag) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParams(format!(
                "dissipator rate must be >= 0, got {rate}"
            )));
        }
        Ok(Self {
            jump_operator,
            rate,
            channel_tag,
        })
    }
}

/// rate·(X·X† − ½ X†X·I − ½ I·X†X) in vectorized form.
pub fn dissipator_superop(d: &Dissipator) -> Result<SuperOperatorMatrix> {
    let x = &d.jump_operator;
    let xdag = x.dagger();
    let xdx = xdag.dot(x);
    let id = OperatorMatrix::identity(x.dim());
    let jump = sandwich_superop(x, &xdag)?;
    let left = sandwich_superop(&xdx, &id)?;
    let right = sandwich_superop(&id, &xdx)?;
    Ok(jump
        .add(&left.scale_re(-0.5))
        .add(&right.scale_re(-0.5))
        .scale_re(d.rate))
}

/// Full generator −i[H,·] + Σ dissipators.
pub fn liouvillian(h: &OperatorMatrix, dissipators: &[Dissipator]) -> Result<SuperOperatorMatrix> {
    let mut l = commutator_superop(h)?;
    for d in dissipators {
        if d.jump_operator.dim() != h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "jump operator dim {} vs Hamiltonian dim {}",
                d.jump_operator.dim(),
                h.dim()
            )));
        }
        l = l.add(&dissipator_superop(d)?);
    }
    Ok(l)
}

/// Density matrix with the usual normalization invariants.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (min eigenvalue ≥ −1e-9) before accepting the matrix.
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        let op = OperatorMatrix::from_array(mat)?;
        let herm_defect = op.sub(&op.dagger()).max_abs();
        if herm_defect > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "density matrix not Hermitian: defect {herm_defect:.3e}"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min_eig = op
            .eigenvalues_hermitian()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::InvalidParams(format!(
                "density matrix not positive: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            mat: op.into_array(),
        })
    }

    /// Pure state |k⟩⟨k|.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut mat = Array2::zeros((dim, dim));
        mat[(k, k)] = C64::new(1.0, 0.0);
        Self { mat }
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_operator(&self) -> OperatorMatrix {
        OperatorMatrix::from_array(self.mat.clone()).expect("square by construction")
    }

    /// Diagonal populations (real parts).
    pub fn populations(&self) -> Vec<f64> {
        self.mat.diag().iter().map(|z| z.re).collect()
    }

    /// Tr(Aρ).
    pub fn expectation(&self, a: &OperatorMatrix) -> C64 {
        a.mat().dot(&self.mat).diag().iter().sum()
    }

    /// ½‖ρ − σ‖₁ from the eigenvalues of the (Hermitian) difference.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = &self.mat - &other.mat;
        let (vals, _) = diff
            .eigh(UPLO::Lower)
            .map_err(|e| Error::DimensionMismatch(format!("eigh failed: {e}")))?;
        Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self
            .as_operator()
            .eigenvalues_hermitian()?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }
}

/// Kernel of 𝓛 via dense eigendecomposition: eigenvector of the
/// smallest-magnitude eigenvalue, Hermitized and trace-normalized.
///
/// Fails with `NonUniqueSteadyState` when the spectral gap above the kernel
/// is less than 10³·|λ_min|, and `KernelNotFound` when the residual
/// ‖𝓛 vec(ρ)‖ exceeds 1e-8·‖𝓛‖.
pub fn steady_state(l: &SuperOperatorMatrix) -> Result<DensityMatrix> {
    let (vals, vecs) = l.eig()?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].norm().total_cmp(&vals[j].norm()));
    let k0 = order[0];
    let lambda_min = vals[k0].norm();
    let lambda_max = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if lambda_min > 1e-6 * lambda_max {
        return Err(Error::KernelNotFound {
            residual: lambda_min,
            allowed: 1e-6 * lambda_max,
        });
    }
    if order.len() > 1 {
        let gap = vals[order[1]].norm();
        if gap <= 1e3 * lambda_min {
            return Err(Error::NonUniqueSteadyState {
                gap,
                required: 1e3 * lambda_min,
            });
        }
    }
    let kernel_vec: Array1<C64> = vecs.column(k0).to_owned();
    let raw = unvectorize(&kernel_vec)?;
    // Numerical kernel vectors carry arbitrary phase and scale.
    let herm = raw.add(&raw.dagger()).scale_re(0.5);
    let tr = herm.trace().re;
    if tr.abs() < 1e-12 {
        return Err(Error::KernelNotFound {
            residual: tr.abs(),
            allowed: 1e-12,
        });
    }
    let rho = herm.scale_re(1.0 / tr);
    let residual = l
        .apply_vec(&vectorize(&rho))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let allowed = 1e-8 * l.frobenius_norm();
    if residual > allowed {
        return Err(Error::KernelNotFound { residual, allowed });
    }
    DensityMatrix::new(rho.into_array())
}

/// Fixed-step fourth-order Runge–Kutta integration of vec(ρ̇) = 𝓛 vec(ρ).
///
/// The generator is trace-free, so trace drift beyond roundoff signals an
/// unstable step size; drift above 1e-8 aborts with a suggestion to shrink
/// `dt`.
pub fn evolve(
    rho0: &DensityMatrix,
    l: &SuperOperatorMatrix,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParams("dt must be positive".into()));
    }
    if t_final < 0.0 {
        return Err(Error::InvalidParams("t_final must be >= 0".into()));
    }
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs Liouvillian dim {}",
            rho0.dim(),
            l.dim()
        )));
    }
    if t_final == 0.0 {
        return Ok(rho0.clone());
    }
    let mut v = vectorize(&rho0.as_operator());
    let steps = (t_final / dt).ceil() as usize;
    let n = rho0.dim();
    let trace_of = |v: &Array1<C64>| -> C64 { (0..n).map(|k| v[k * n + k]).sum() };
    let mut t = 0.0;
    for _ in 0..steps {
        let h = dt.min(t_final - t);
        if h <= 0.0 {
            break;
        }
        let k1 = l.apply_vec(&v);
        let k2 = l.apply_vec(&(&v + &(&k1 * C64::new(h / 2.0, 0.0))));
        let k3 = l.apply_vec(&(&v + &(&k2 * C64::new(h / 2.0, 0.0))));
        let k4 = l.apply_vec(&(&v + &(&k3 * C64::new(h, 0.0))));
        v = &v
            + &((&k1 + &(&k2 * C64::new(2.0, 0.0)) + &(&k3 * C64::new(2.0, 0.0)) + &k4)
                * C64::new(h / 6.0, 0.0));
        t += h;
        let tr = trace_of(&v);
        let drift = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
        if !drift.is_finite() || drift > 1e-8 {
            return Err(Error::IntegrationUnstable { drift });
        }
    }
    let op = unvectorize(&v)?;
    let herm = op.add(&op.dagger()).scale_re(0.5);
    DensityMatrix::new(herm.into_array())
}

/// The heat-flow machine on the collective single-excitation basis
/// {|0⟩, |a⟩, |s⟩}.
///
/// The waveguides couple to the |0⟩↔|a⟩ and |0⟩↔|s⟩ transitions — the modes
/// are treated as separate two-level systems — and flux noise at 2g drives
/// incoherent |a⟩↔|s⟩ exchange at rate Γφ/2 each way:
///
/// 𝓛 = −i[H,·] + Γs(n_s+1)𝓓[σ_s⁻] + Γs n_s 𝓓[σ_s⁺]
///            + Γa(n_a+1)𝓓[σ_a⁻] + Γa n_a 𝓓[σ_a⁺]
///            + (Γφ/2)𝓓[σ_s⁺σ_a⁻ + σ_a⁺σ_s⁻]
///
/// with optional zero-occupation parasitic losses Γ′s𝓓[σ_s⁻], Γ′a𝓓[σ_a⁻].
#[derive(Debug, Clone)]
pub struct ThermalMachine {
    pub hamiltonian: OperatorMatrix,
    pub dissipators: Vec<Dissipator>,
    pub liouvillian: SuperOperatorMatrix,
    channel_superops: Vec<(ChannelTag, SuperOperatorMatrix)>,
}

/// Basis index of |0⟩ in the machine space.
pub const MACHINE_GROUND: usize = 0;
/// Basis index of |a⟩ (frequency ω − g).
pub const MACHINE_A: usize = 1;
/// Basis index of |s⟩ (frequency ω + g).
pub const MACHINE_S: usize = 2;

impl ThermalMachine {
    pub fn new(p: &DeviceParams, include_parasitic: bool) -> Result<Self> {
        p.validate()?;
        let dim = 3;
        let hamiltonian = OperatorMatrix::diagonal(&[0.0, p.omega_a(), p.omega_s()]);
        let sigma_s_minus = OperatorMatrix::transition(dim, MACHINE_GROUND, MACHINE_S);
        let sigma_a_minus = OperatorMatrix::transition(dim, MACHINE_GROUND, MACHINE_A);
        let exchange = OperatorMatrix::transition(dim, MACHINE_S, MACHINE_A)
            .add(&OperatorMatrix::transition(dim, MACHINE_A, MACHINE_S));

        let mut dissipators = vec![
            Dissipator::new(
                sigma_s_minus.clone(),
                p.gamma_s * (p.n_s + 1.0),
                ChannelTag::S,
            )?,
            Dissipator::new(sigma_s_minus.dagger(), p.gamma_s * p.n_s, ChannelTag::S)?,
            Dissipator::new(
                sigma_a_minus.clone(),
                p.gamma_a * (p.n_a + 1.0),
                ChannelTag::A,
            )?,
            Dissipator::new(sigma_a_minus.dagger(), p.gamma_a * p.n_a, ChannelTag::A)?,
            Dissipator::new(exchange, p.gamma_phi / 2.0, ChannelTag::Phi)?,
        ];
        if include_parasitic {
            dissipators.push(Dissipator::new(
                sigma_s_minus.clone(),
                p.gamma_s_prime,
                ChannelTag::LossS,
            )?);
            dissipators.push(Dissipator::new(
                sigma_a_minus,
                p.gamma_a_prime,
                ChannelTag::LossA,
            )?);
        }

        let liouvillian = liouvillian(&hamiltonian, &dissipators)?;
        let mut channel_superops: Vec<(ChannelTag, SuperOperatorMatrix)> = Vec::new();
        for d in &dissipators {
            let sup = dissipator_superop(d)?;
            match channel_superops
                .iter_mut()
                .find(|(tag, _)| *tag == d.channel_tag)
            {
                Some((_, acc)) => *acc = acc.add(&sup),
                None => channel_superops.push((d.channel_tag, sup)),
            }
        }
        Ok(Self {
            hamiltonian,
            dissipators,
            liouvillian,
            channel_superops,
        })
    }

    /// Per-channel dissipative generators 𝓛_c (commutator part excluded).
    pub fn channel_superops(&self) -> &[(ChannelTag, SuperOperatorMatrix)] {
        &self.channel_superops
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state(&self.liouvillian)
    }
}

/// Spec-level entry point returning just the generator.
pub fn thermal_machine_liouvillian(
    p: &DeviceParams,
    include_parasitic: bool,
) -> Result<SuperOperatorMatrix> {
    Ok(ThermalMachine::new(p, include_parasitic)?.liouvillian)
}
