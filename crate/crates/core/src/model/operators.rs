use alloc::vec::Vec;

use super::{ring_bonds, ModelConfig, ModelError, TlfEnsemble};
use crate::linalg::pauli::{sigma_minus, sigma_plus, sigma_z};
use crate::linalg::{embed, herm_eig, ComplexMatrix, Pauli, PauliSum, SubsystemLayout};

pub const PROBE_A: usize = 0;
pub const PROBE_B: usize = 1;

/// Site index of TLF `j` in the `[A, B, TLF_1..TLF_N]` layout.
#[inline]
pub const fn tlf_site(j: usize) -> usize {
    2 + j
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpKind {
    /// `s_z`, pure dephasing.
    Dephasing,
    /// `s_-`, emission into the bath.
    Emission,
    /// `s_+`, absorption from the bath.
    Absorption,
}

/// One dissipator channel `Γ (J ρ J† - {J†J, ρ}/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub rate: f64,
    pub op: ComplexMatrix,
    pub tlf: usize,
    pub kind: JumpKind,
}

/// Two-qubit entangling gate generators added statically to `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    /// `s_z^A s_z^B`
    Zz,
    /// `s_x^A s_x^B + s_y^A s_y^B`
    XxYy,
}

/// Hamiltonian and jump operators on the probe ⊗ TLF space.
#[derive(Clone, Debug)]
pub struct SystemOperators {
    pub layout: SubsystemLayout,
    pub hamiltonian: ComplexMatrix,
    /// Same Hamiltonian as a Pauli-string sum.
    pub hamiltonian_terms: PauliSum,
    pub jumps: Vec<Jump>,
}

/// Adds `coeff · Z_a · X_j` where `X_j = cos θ_j s_z - sin θ_j s_x` is the
/// charge operator of TLF `j` in its eigenbasis.
fn add_z_times_charge(h: &mut PauliSum, coeff: f64, probe: usize, tlf: usize, theta: f64) -> Result<(), ModelError> {
    let (s, c) = libm::sincos(theta);
    h.add_real(coeff * c, &[(probe, Pauli::Z), (tlf, Pauli::Z)])?;
    h.add_real(-coeff * s, &[(probe, Pauli::Z), (tlf, Pauli::X)])?;
    Ok(())
}

/// Adds `coeff · X_j X_k` for two TLF sites.
fn add_charge_charge(h: &mut PauliSum, coeff: f64, (sj, tj): (usize, f64), (sk, tk): (usize, f64)) -> Result<(), ModelError> {
    let (s1, c1) = libm::sincos(tj);
    let (s2, c2) = libm::sincos(tk);
    h.add_real(coeff * c1 * c2, &[(sj, Pauli::Z), (sk, Pauli::Z)])?;
    h.add_real(-coeff * c1 * s2, &[(sj, Pauli::Z), (sk, Pauli::X)])?;
    h.add_real(-coeff * s1 * c2, &[(sj, Pauli::X), (sk, Pauli::Z)])?;
    h.add_real(coeff * s1 * s2, &[(sj, Pauli::X), (sk, Pauli::X)])?;
    Ok(())
}

fn tlf_coupling_scale(cfg: &ModelConfig) -> f64 {
    if cfg.halve_couplings {
        0.5
    } else {
        1.0
    }
}

/// Pauli form of the full Hamiltonian on `[A, B, TLF_1..TLF_N]`:
///
/// `H = (Ω_P/2)(s_z^A + s_z^B) + Σ_j (Ω_j/2) s_z^(j)
///      + Σ_j ν (s_z^A + s_z^B) X_j + Σ_bonds μ X_j X_k`.
pub fn hamiltonian_terms(ens: &TlfEnsemble, cfg: &ModelConfig) -> Result<PauliSum, ModelError> {
    terms_with_probes(ens, cfg, 2)
}

fn terms_with_probes(ens: &TlfEnsemble, cfg: &ModelConfig, probes: usize) -> Result<PauliSum, ModelError> {
    let mut h = PauliSum::new(ens.len() + probes);
    let site = |j: usize| probes + j;
    for p in 0..probes {
        h.add_real(cfg.omega_p / 2.0, &[(p, Pauli::Z)])?;
    }
    for (j, t) in ens.tlfs.iter().enumerate() {
        h.add_real(t.omega / 2.0, &[(site(j), Pauli::Z)])?;
        if ens.nu != 0.0 {
            for p in 0..probes {
                add_z_times_charge(&mut h, ens.nu, p, site(j), t.theta)?;
            }
        }
    }
    let mu = ens.mu * tlf_coupling_scale(cfg);
    if mu != 0.0 {
        for (j, k) in ring_bonds(ens.len()) {
            let tj = ens.tlfs[j].theta;
            let tk = ens.tlfs[k].theta;
            add_charge_charge(&mut h, mu, (site(j), tj), (site(k), tk))?;
        }
    }
    Ok(h)
}

/// TLF-only Hamiltonian `Σ_j (Ω_j/2) s_z^(j) + Σ_bonds μ X_j X_k` on the TLF
/// register.
pub fn tlf_hamiltonian(ens: &TlfEnsemble, cfg: &ModelConfig) -> Result<ComplexMatrix, ModelError> {
    let mut h = PauliSum::new(ens.len());
    for (j, t) in ens.tlfs.iter().enumerate() {
        h.add_real(t.omega / 2.0, &[(j, Pauli::Z)])?;
    }
    let mu = ens.mu * tlf_coupling_scale(cfg);
    if mu != 0.0 {
        for (j, k) in ring_bonds(ens.len()) {
            add_charge_charge(&mut h, mu, (j, ens.tlfs[j].theta), (k, ens.tlfs[k].theta))?;
        }
    }
    Ok(h.to_dense())
}

/// Hamiltonian, jump list and layout for the sampled ensemble.
pub fn build_operators(ens: &TlfEnsemble, cfg: &ModelConfig) -> Result<SystemOperators, ModelError> {
    operators_with_probes(ens, cfg, 2)
}

/// Variant with a single probe qubit at site 0 and TLF `j` at site `1 + j`.
pub fn build_single_probe_operators(ens: &TlfEnsemble, cfg: &ModelConfig) -> Result<SystemOperators, ModelError> {
    operators_with_probes(ens, cfg, 1)
}

fn operators_with_probes(ens: &TlfEnsemble, cfg: &ModelConfig, probes: usize) -> Result<SystemOperators, ModelError> {
    if ens.is_empty() {
        return Err(ModelError::EmptyEnsemble);
    }
    let layout = SubsystemLayout::qubits(ens.len() + probes);
    let terms = terms_with_probes(ens, cfg, probes)?;
    let hamiltonian = terms.to_dense();
    let mut jumps = Vec::with_capacity(3 * ens.len());
    let (sz, sm, sp) = (sigma_z(), sigma_minus(), sigma_plus());
    for (j, t) in ens.tlfs.iter().enumerate() {
        let site = probes + j;
        for (rate, op, kind) in [
            (t.rate_z, &sz, JumpKind::Dephasing),
            (t.rate_minus, &sm, JumpKind::Emission),
            (t.rate_plus, &sp, JumpKind::Absorption),
        ] {
            jumps.push(Jump {
                rate,
                op: embed(op, site, &layout)?,
                tlf: j,
                kind,
            });
        }
    }
    Ok(SystemOperators {
        layout,
        hamiltonian,
        hamiltonian_terms: terms,
        jumps,
    })
}

impl SystemOperators {
    /// Two isolated probe qubits, `H = (Ω_P/2)(s_z^A + s_z^B)`, no jumps.
    pub fn probe_only(omega_p: f64) -> Self {
        let mut h = PauliSum::new(2);
        h.add_real(omega_p / 2.0, &[(PROBE_A, Pauli::Z)]).expect("valid site");
        h.add_real(omega_p / 2.0, &[(PROBE_B, Pauli::Z)]).expect("valid site");
        Self {
            layout: SubsystemLayout::qubits(2),
            hamiltonian: h.to_dense(),
            hamiltonian_terms: h,
            jumps: Vec::new(),
        }
    }

    /// Adds `g · G` to the Hamiltonian. Needs both probes.
    pub fn add_gate(&mut self, gate: Gate, strength: f64) {
        let n = self.layout.n_sites();
        let mut g = PauliSum::new(n);
        match gate {
            Gate::Zz => g.add_real(1.0, &[(PROBE_A, Pauli::Z), (PROBE_B, Pauli::Z)]),
            Gate::XxYy => g
                .add_real(1.0, &[(PROBE_A, Pauli::X), (PROBE_B, Pauli::X)])
                .and_then(|_| g.add_real(1.0, &[(PROBE_A, Pauli::Y), (PROBE_B, Pauli::Y)])),
        }
        .expect("probe sites exist");
        g.scale(strength);
        self.hamiltonian_terms.extend(&g);
        self.hamiltonian = self.hamiltonian_terms.to_dense();
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }
}

/// Ground state `|g><g|` of the TLF-only Hamiltonian.
///
/// Fails when the two lowest levels are closer than `1e-10 · Ω_min`.
pub fn tlf_ground_state(ens: &TlfEnsemble, cfg: &ModelConfig) -> Result<ComplexMatrix, ModelError> {
    let h = tlf_hamiltonian(ens, cfg)?;
    let eig = herm_eig(&h)?;
    if eig.values.len() > 1 {
        let gap = eig.values[1] - eig.values[0];
        if gap < 1e-10 * ens.omega_min {
            return Err(ModelError::DegenerateGroundState { gap });
        }
    }
    Ok(ComplexMatrix::projector(eig.vectors.col(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{identity2, sigma_x};
    use crate::linalg::{c64, embed_many, herm_eigvals, kron, kron_all};
    use crate::model::{sample_seeded, Tlf};
    use std::f64::consts::FRAC_PI_4;

    fn small_ensemble(thetas: &[f64], mu_over_nu: f64) -> TlfEnsemble {
        let tlfs = thetas
            .iter()
            .enumerate()
            .map(|(j, &th)| {
                let omega = 0.3 + 0.05 * j as f64;
                Tlf::new(omega * th.cos(), omega * th.sin(), 0.02, 0.04, 0.0)
            })
            .collect();
        TlfEnsemble::from_tlfs(tlfs, mu_over_nu)
    }

    /// Independent construction from embedded single-site matrices.
    fn hamiltonian_by_kron(ens: &TlfEnsemble, cfg: &ModelConfig) -> ComplexMatrix {
        let layout = SubsystemLayout::qubits(ens.len() + 2);
        let sz = sigma_z();
        let charge = |th: f64| &sz.scale_real(th.cos()) - &sigma_x().scale_real(th.sin());
        let mut h = ComplexMatrix::zeros(layout.total_dim(), layout.total_dim());
        let za = embed(&sz, PROBE_A, &layout).unwrap();
        let zb = embed(&sz, PROBE_B, &layout).unwrap();
        h.axpy(c64(cfg.omega_p / 2.0, 0.0), &(&za + &zb));
        for (j, t) in ens.tlfs.iter().enumerate() {
            h.axpy(c64(t.omega / 2.0, 0.0), &embed(&sz, tlf_site(j), &layout).unwrap());
            let xj = charge(t.theta);
            let a = embed_many(&[(PROBE_A, &sz), (tlf_site(j), &xj)], &layout).unwrap();
            let b = embed_many(&[(PROBE_B, &sz), (tlf_site(j), &xj)], &layout).unwrap();
            h.axpy(c64(ens.nu, 0.0), &(&a + &b));
        }
        for (j, k) in ring_bonds(ens.len()) {
            let xj = charge(ens.tlfs[j].theta);
            let xk = charge(ens.tlfs[k].theta);
            let m = embed_many(&[(tlf_site(j), &xj), (tlf_site(k), &xk)], &layout).unwrap();
            h.axpy(c64(ens.mu, 0.0), &m);
        }
        h
    }

    #[test]
    fn pauli_and_kron_constructions_agree() {
        let cfg = ModelConfig {
            mu_over_nu: 0.8,
            ..ModelConfig::default()
        };
        for n in 1..=4 {
            let ens = small_ensemble(&[0.3, 1.1, 0.7, 0.2][..n], 0.8);
            let ops = build_operators(&ens, &cfg).unwrap();
            assert!(ops.hamiltonian.approx_eq(&hamiltonian_by_kron(&ens, &cfg), 1e-14), "n = {n}");
            assert!(ops.hamiltonian.is_hermitian(1e-12));
            assert_eq!(ops.jumps.len(), 3 * n);
        }
    }

    #[test]
    fn single_probe_is_the_reduced_model() {
        let cfg = ModelConfig {
            mu_over_nu: 0.5,
            ..ModelConfig::default()
        };
        let ens = small_ensemble(&[0.4, 1.0], 0.5);
        let ops = build_single_probe_operators(&ens, &cfg).unwrap();
        assert_eq!(ops.dim(), 8);
        assert_eq!(ops.jumps.len(), 6);
        // probe B dropped: H_1 = H_2 restricted to B = |0>, minus Ω_P/2 and the ν s_z^B X_j terms
        let full = build_operators(&ens, &cfg).unwrap();
        let layout = full.layout.clone();
        let mut shift = embed(&sigma_z(), PROBE_B, &layout).unwrap().scale_real(cfg.omega_p / 2.0);
        let sz = sigma_z();
        for (j, t) in ens.tlfs.iter().enumerate() {
            let xj = &sz.scale_real(t.theta.cos()) - &sigma_x().scale_real(t.theta.sin());
            shift.axpy(c64(ens.nu, 0.0), &embed_many(&[(PROBE_B, &sz), (tlf_site(j), &xj)], &layout).unwrap());
        }
        let reduced = &full.hamiltonian - &shift;
        let block = ComplexMatrix::from_fn(8, 8, |r, c| {
            let lift = |i: usize| ((i >> 2) << 3) | (i & 3);
            reduced[(lift(r), lift(c))]
        });
        assert!(block.approx_eq(&ops.hamiltonian, 1e-14));
    }

    #[test]
    fn free_spectrum_without_couplings() {
        let cfg = ModelConfig::default();
        let mut ens = small_ensemble(&[0.4, 0.9], 0.0).decoupled();
        ens.mu = 0.0;
        let ops = build_operators(&ens, &cfg).unwrap();
        let mut expect = Vec::new();
        for bits in 0..16u32 {
            let sign = |b: u32| if bits >> b & 1 == 0 { 0.5 } else { -0.5 };
            expect.push(sign(3) + sign(2) + sign(1) * ens.tlfs[0].omega + sign(0) * ens.tlfs[1].omega);
        }
        expect.sort_by(f64::total_cmp);
        let got = herm_eigvals(&ops.hamiltonian).unwrap();
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_mixing_angle_gives_diagonal_hamiltonian() {
        let cfg = ModelConfig {
            mu_over_nu: 1.0,
            ..ModelConfig::default()
        };
        let ens = small_ensemble(&[0.0, 0.0, 0.0], 1.0);
        let h = build_operators(&ens, &cfg).unwrap().hamiltonian;
        let off = (0..h.rows())
            .flat_map(|r| (0..h.cols()).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| h[(r, c)].norm())
            .fold(0.0, f64::max);
        assert_eq!(off, 0.0);
    }

    #[test]
    fn single_tlf_interaction_block() {
        // θ = π/4: the s_x part of the coupling is -ν sin θ (s_z^A + s_z^B) ⊗ s_x
        let ens = small_ensemble(&[FRAC_PI_4], 0.0);
        let cfg = ModelConfig::default();
        let h = build_operators(&ens, &cfg).unwrap().hamiltonian;
        let sz = sigma_z();
        let i2 = identity2();
        let probe_sum = &kron(&sz, &i2) + &kron(&i2, &sz);
        let coupling_x = kron(&probe_sum, &sigma_x()).scale_real(-ens.nu * FRAC_PI_4.sin());
        let diag_part = ComplexMatrix::from_fn(8, 8, |r, c| if r == c { h[(r, c)] } else { c64(0.0, 0.0) });
        let off_part = &h - &diag_part;
        assert!(off_part.approx_eq(&coupling_x, 1e-14));
    }

    #[test]
    fn ground_state_cases() {
        let cfg = ModelConfig::default();
        // μ = 0: all TLFs in |1>, the lower s_z eigenstate
        let ens = small_ensemble(&[0.3, 0.8, 1.2], 0.0);
        let g = tlf_ground_state(&ens, &cfg).unwrap();
        let down = kron_all([&sigma_minus().matmul(&sigma_plus()); 3].iter().copied()).unwrap();
        assert!(g.approx_eq(&down, 1e-12));

        for th in [0.0, 0.6, 1.4] {
            let one = small_ensemble(&[th], 0.0);
            let g = tlf_ground_state(&one, &cfg).unwrap();
            assert!((g[(1, 1)].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_matches_brute_force_pair() {
        // θ = π/2 turns X_j into -s_x: H = (Ω/2)(s_z¹ + s_z²) + μ s_x¹ s_x²
        let omega = 0.4;
        let tlfs = alloc::vec![Tlf::new(0.0, omega, 0.02, 0.04, 0.0), Tlf::new(0.0, omega, 0.02, 0.04, 0.0)];
        let ens = TlfEnsemble::from_tlfs(tlfs, 1.0);
        let cfg = ModelConfig::default();
        let g = tlf_ground_state(&ens, &cfg).unwrap();

        let sz = sigma_z();
        let i2 = identity2();
        let h = &(&kron(&sz, &i2) + &kron(&i2, &sz)).scale_real(omega / 2.0) + &kron(&sigma_x(), &sigma_x()).scale_real(ens.mu);
        // closed form within span{|00>, |11>}: E = -sqrt(Ω² + μ²)
        let e0 = -(omega * omega + ens.mu * ens.mu).sqrt();
        let energy = h.matmul(&g).trace().re;
        assert!((energy - e0).abs() < 1e-12);
        let bf = herm_eig(&h).unwrap();
        assert!((bf.values[0] - e0).abs() < 1e-12);
        assert!(g.approx_eq(&ComplexMatrix::projector(bf.vectors.col(0)), 1e-10));
    }

    #[test]
    fn degenerate_ground_state_reported() {
        // Ω = 0 for both TLFs and no coupling: fourfold degenerate
        let tlfs = alloc::vec![Tlf::new(0.0, 0.0, 0.0, 0.0, 0.0), Tlf::new(0.0, 0.0, 0.0, 0.0, 0.0)];
        let mut ens = TlfEnsemble::from_tlfs(tlfs, 0.0);
        ens.omega_min = 1.0;
        let r = tlf_ground_state(&ens, &ModelConfig::default());
        assert!(matches!(r, Err(ModelError::DegenerateGroundState { .. })));
    }

    #[test]
    fn halve_couplings_scales_only_tlf_bonds() {
        let cfg = ModelConfig {
            seed: 3,
            mu_over_nu: 1.0,
            ..ModelConfig::default()
        };
        let ens = sample_seeded(&cfg).unwrap().ensemble;
        let full = build_operators(&ens, &cfg).unwrap().hamiltonian;
        let halved_cfg = ModelConfig {
            halve_couplings: true,
            ..cfg.clone()
        };
        let halved = build_operators(&ens, &halved_cfg).unwrap().hamiltonian;
        let half_mu = build_operators(&ens.with_mu_over_nu(0.5), &cfg).unwrap().hamiltonian;
        assert!(halved.approx_eq(&half_mu, 1e-14));
        assert!(!halved.approx_eq(&full, 1e-6));
    }

    #[test]
    fn gates_add_expected_generators() {
        let mut ops = SystemOperators::probe_only(1.0);
        let h0 = ops.hamiltonian.clone();
        ops.add_gate(Gate::Zz, 0.3);
        let zz = kron(&sigma_z(), &sigma_z()).scale_real(0.3);
        assert!((&ops.hamiltonian - &h0).approx_eq(&zz, 1e-15));

        let mut ops = SystemOperators::probe_only(1.0);
        ops.add_gate(Gate::XxYy, 0.5);
        // XX + YY = 2 (|01><10| + |10><01|)
        let d = &ops.hamiltonian - &h0;
        assert!((d[(1, 2)].re - 1.0).abs() < 1e-15 && (d[(2, 1)].re - 1.0).abs() < 1e-15);
        assert!(d[(0, 3)].norm() < 1e-15);
    }
}
