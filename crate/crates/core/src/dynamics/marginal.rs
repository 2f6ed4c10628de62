//! Reduced-state trajectories without stepping the full state.
//!
//! Every entry of a reduced density matrix is a linear functional `w` of the
//! propagated blocks, so `m(n) = wᵀ Pⁿ v₀`. Writing `n = qK + r` gives
//! `m(n) = (wᵀ P^r)(P^K)^q v₀`: `K` row updates and `n/K` block updates
//! replace `n` block updates.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::propagator::Block;
use super::trajectory::{hygiene, CptpReport, Trajectory, MIN_EIGENVALUE_TOL, REPAIR_TOL};
use super::{DynamicsError, Propagator};
use crate::linalg::{herm_eigvals, ComplexMatrix, SubsystemLayout, C64};
use crate::model::DensityMatrix;

const ZERO: C64 = C64::new(0.0, 0.0);

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x * y)
}

/// `y = wᵀ P`.
fn vecmat_into(w: &[C64], p: &ComplexMatrix, y: &mut [C64]) {
    for (c, yc) in y.iter_mut().enumerate() {
        *yc = dot(w, p.col(c));
    }
}

fn matrix_power(p: &ComplexMatrix, mut k: usize) -> ComplexMatrix {
    let mut result = ComplexMatrix::identity(p.rows());
    let mut base = p.clone();
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first { base.clone() } else { result.matmul(&base) };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = base.matmul(&base);
        }
    }
    result
}

/// Matrix products in `matrix_power(_, k)`.
fn products(k: usize) -> usize {
    let bits = (usize::BITS - k.leading_zeros()) as usize;
    bits.saturating_sub(1) + k.count_ones() as usize - 1
}

/// One reduced-matrix entry read off a block: weight 1 at `positions`.
struct Functional {
    entry: (usize, usize),
    /// `rows[r * n..(r + 1) * n] = wᵀ P^r`.
    rows: Vec<C64>,
}

struct BlockPlan<'a> {
    blk: &'a Block,
    rows_idx: &'a [usize],
    cols_idx: &'a [usize],
    functionals: Vec<Functional>,
}

impl BlockPlan<'_> {
    fn len(&self) -> usize {
        self.rows_idx.len() * self.cols_idx.len()
    }

    fn gather(&self, rho: &ComplexMatrix, out: &mut Vec<C64>) {
        out.clear();
        for &c in self.cols_idx {
            out.extend(self.rows_idx.iter().map(|&r| rho[(r, c)]));
        }
    }

    fn scatter(&self, v: &[C64], rho: &mut ComplexMatrix) {
        let da = self.rows_idx.len();
        let mirror = self.blk.a != self.blk.b;
        for (cj, &c) in self.cols_idx.iter().enumerate() {
            for (ri, &r) in self.rows_idx.iter().enumerate() {
                let x = v[ri + cj * da];
                rho[(r, c)] = x;
                if mirror {
                    rho[(c, r)] = x.conj();
                }
            }
        }
    }
}

/// Reduced state on `sites` at `t = 0, dt, …, n_steps·dt`.
///
/// The full state is formed, repaired and checked (trace, Hermiticity,
/// smallest eigenvalue) every `K ≤ check_stride` steps and at the end; the
/// reduced matrices are checked for trace and Hermiticity at every step.
pub fn propagate_marginal(
    prop: &Propagator,
    rho0: &DensityMatrix,
    n_steps: usize,
    layout: &SubsystemLayout,
    sites: &[usize],
    check_stride: usize,
) -> Result<Trajectory, DynamicsError> {
    let dim = prop.dim();
    if rho0.dim() != dim || layout.total_dim() != dim {
        return Err(DynamicsError::DimensionMismatch {
            expected: dim,
            found: rho0.dim().max(layout.total_dim()),
        });
    }
    layout.check_sites(sites)?;
    let mut kept: Vec<usize> = sites.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..layout.n_sites()).filter(|s| !kept.contains(s)).collect();
    let kept_layout = layout.sub_layout(&kept)?;
    let m = kept_layout.total_dim();
    let split = |i: usize| -> (usize, usize) {
        let digits = layout.unflatten(i);
        let k = kept.iter().fold(0, |acc, &s| acc * layout.dims()[s] + digits[s]);
        let t = traced.iter().fold(0, |acc, &s| acc * layout.dims()[s] + digits[s]);
        (k, t)
    };
    let (kidx, tidx): (Vec<usize>, Vec<usize>) = (0..dim).map(split).unzip();

    let total = n_steps + 1;
    let mut k_baby = 1;
    while k_baby * k_baby < total {
        k_baby += 1;
    }
    let k_baby = k_baby.min(check_stride.max(1));

    let mut plans: Vec<BlockPlan> = Vec::new();
    for blk in prop.blocks() {
        let (ia, ib) = (&prop.sectors()[blk.a], &prop.sectors()[blk.b]);
        let da = ia.len();
        let mut positions: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (cj, &j) in ib.iter().enumerate() {
            for (ri, &i) in ia.iter().enumerate() {
                if tidx[i] == tidx[j] {
                    positions.entry((kidx[i], kidx[j])).or_default().push(ri + cj * da);
                }
            }
        }
        let n = da * ib.len();
        let p = prop.block_propagator(blk);
        let functionals = positions
            .into_iter()
            .map(|(entry, pos)| {
                let mut rows = vec![ZERO; k_baby * n];
                for &q in &pos {
                    rows[q] = C64::new(1.0, 0.0);
                }
                for r in 1..k_baby {
                    let (done, rest) = rows.split_at_mut(r * n);
                    vecmat_into(&done[(r - 1) * n..], p, &mut rest[..n]);
                }
                Functional { entry, rows }
            })
            .collect();
        plans.push(BlockPlan {
            blk,
            rows_idx: ia,
            cols_idx: ib,
            functionals,
        });
    }

    // P^K costs about `products(K)·d` block updates to form; large blocks
    // are advanced K single steps instead
    let mut giant: BTreeMap<usize, ComplexMatrix> = BTreeMap::new();
    if n_steps >= k_baby {
        for blk in prop.blocks() {
            let p = prop.block_propagator(blk);
            if products(k_baby) * p.rows() < n_steps {
                giant.entry(blk.prop).or_insert_with(|| matrix_power(p, k_baby));
            }
        }
    }

    let mut traj = Trajectory {
        times: Vec::with_capacity(total),
        step: prop.dt(),
        expectations: Vec::new(),
        marginals: Vec::with_capacity(total),
        states: None,
        cptp: CptpReport::default(),
        warnings: Vec::new(),
    };
    let breach = |step: usize, check: &'static str, value: f64| DynamicsError::InvariantBreach {
        step,
        t: step as f64 * prop.dt(),
        check,
        value,
    };
    let check_full = |rho: &ComplexMatrix, step: usize, cptp: &mut CptpReport| -> Result<(), DynamicsError> {
        let min = herm_eigvals(rho)?.first().copied().unwrap_or(0.0);
        cptp.min_eigenvalue = cptp.min_eigenvalue.min(min);
        cptp.eigen_checks += 1;
        if min < MIN_EIGENVALUE_TOL {
            return Err(breach(step, "positivity", min));
        }
        Ok(())
    };

    let mut rho = rho0.as_matrix().clone();
    let mut states: Vec<Vec<C64>> = plans
        .iter()
        .map(|pl| {
            let mut v = Vec::with_capacity(pl.len());
            pl.gather(&rho, &mut v);
            v
        })
        .collect();
    let mut buf = Vec::new();
    let mut n0 = 0;
    loop {
        // repair and check the full state at the giant step
        if n0 > 0 {
            rho.as_mut_slice().iter_mut().for_each(|v| *v = ZERO);
            for (pl, v) in plans.iter().zip(&states) {
                pl.scatter(v, &mut rho);
            }
            let (drift, herm) = hygiene(&mut rho);
            traj.cptp.max_trace_drift = traj.cptp.max_trace_drift.max(drift);
            traj.cptp.max_hermiticity_error = traj.cptp.max_hermiticity_error.max(herm);
            if herm > REPAIR_TOL {
                return Err(breach(n0, "hermiticity", herm));
            }
            if drift > REPAIR_TOL {
                return Err(breach(n0, "trace", drift));
            }
            for (pl, v) in plans.iter().zip(&mut states) {
                pl.gather(&rho, v);
            }
        }
        check_full(&rho, n0, &mut traj.cptp)?;

        for r in 0..k_baby {
            let n = n0 + r;
            if n > n_steps {
                break;
            }
            let mut red = ComplexMatrix::zeros(m, m);
            for (pl, v) in plans.iter().zip(&states) {
                let len = v.len();
                for f in &pl.functionals {
                    let x = dot(&f.rows[r * len..(r + 1) * len], v);
                    red[f.entry] += x;
                    if pl.blk.a != pl.blk.b {
                        red[(f.entry.1, f.entry.0)] += x.conj();
                    }
                }
            }
            let (drift, herm) = hygiene(&mut red);
            let cptp = &mut traj.cptp;
            cptp.max_trace_drift = cptp.max_trace_drift.max(drift);
            cptp.max_hermiticity_error = cptp.max_hermiticity_error.max(herm);
            if herm > REPAIR_TOL {
                return Err(breach(n, "hermiticity", herm));
            }
            if drift > REPAIR_TOL {
                return Err(breach(n, "trace", drift));
            }
            traj.times.push(n as f64 * prop.dt());
            traj.marginals.push(red);
        }

        let last_in_window = (n0 + k_baby - 1).min(n_steps);
        if n0 + k_baby > n_steps {
            // final full state for the closing check
            if last_in_window > n0 {
                for (pl, v) in plans.iter().zip(&mut states) {
                    let p = prop.block_propagator(pl.blk);
                    for _ in n0..last_in_window {
                        buf.resize(v.len(), ZERO);
                        p.matvec_into(v, &mut buf);
                        core::mem::swap(v, &mut buf);
                    }
                }
                rho.as_mut_slice().iter_mut().for_each(|v| *v = ZERO);
                for (pl, v) in plans.iter().zip(&states) {
                    pl.scatter(v, &mut rho);
                }
                let _ = hygiene(&mut rho);
                check_full(&rho, last_in_window, &mut traj.cptp)?;
            }
            break;
        }
        for (pl, v) in plans.iter().zip(&mut states) {
            buf.resize(v.len(), ZERO);
            if let Some(g) = giant.get(&pl.blk.prop) {
                g.matvec_into(v, &mut buf);
                core::mem::swap(v, &mut buf);
            } else {
                let p = prop.block_propagator(pl.blk);
                for _ in 0..k_baby {
                    p.matvec_into(v, &mut buf);
                    core::mem::swap(v, &mut buf);
                }
            }
        }
        n0 += k_baby;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate_with, LindbladGenerator, Method, RecordSpec};
    use crate::linalg::pauli::{sigma_minus, sigma_x, sigma_z};
    use crate::linalg::test_support::random_density;
    use crate::linalg::embed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn generator() -> (LindbladGenerator, SubsystemLayout) {
        let layout = SubsystemLayout::qubits(3);
        let z0 = embed(&sigma_z(), 0, &layout).unwrap();
        let z1 = embed(&sigma_z(), 1, &layout).unwrap();
        let x2 = embed(&sigma_x(), 2, &layout).unwrap();
        let z2 = embed(&sigma_z(), 2, &layout).unwrap();
        let h = &(&(&z0 + &z1).scale_real(0.5) + &(&z0 + &z1).matmul(&x2).scale_real(0.1)) + &z2.scale_real(0.3);
        let jumps = alloc::vec![(0.02, embed(&sigma_minus(), 2, &layout).unwrap()), (0.01, z2)];
        (LindbladGenerator::new(h, jumps).unwrap(), layout)
    }

    #[test]
    fn matches_stepwise_marginals() {
        let (gen, layout) = generator();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let rho0 = DensityMatrix::new(random_density(&mut rng, 8)).unwrap();
        for method in [Method::Sectored, Method::Dense] {
            let prop = Propagator::new(&gen, 0.05, method).unwrap();
            for n_steps in [0, 1, 7, 48, 49, 50, 333] {
                let fast = propagate_marginal(&prop, &rho0, n_steps, &layout, &[0, 1], 100).unwrap();
                let slow = propagate_with(&prop, &rho0, n_steps, &RecordSpec::marginal(layout.clone(), alloc::vec![0, 1])).unwrap();
                assert_eq!(fast.times.len(), n_steps + 1);
                let err = fast
                    .marginals
                    .iter()
                    .zip(&slow.marginals)
                    .map(|(a, b)| a.max_abs_diff(b))
                    .fold(0.0, f64::max);
                assert!(err < 1e-11, "{method:?} {n_steps}: {err}");
                assert!(fast.cptp.within_tolerance());
            }
        }
    }

    #[test]
    fn single_site_and_reordered_sites() {
        let (gen, layout) = generator();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rho0 = DensityMatrix::new(random_density(&mut rng, 8)).unwrap();
        let prop = Propagator::new(&gen, 0.1, Method::Sectored).unwrap();
        for sites in [&[2usize][..], &[2, 0][..], &[1][..]] {
            let fast = propagate_marginal(&prop, &rho0, 30, &layout, sites, 100).unwrap();
            let slow = propagate_with(&prop, &rho0, 30, &RecordSpec::marginal(layout.clone(), sites.to_vec())).unwrap();
            for (a, b) in fast.marginals.iter().zip(&slow.marginals) {
                assert!(a.max_abs_diff(b) < 1e-12);
            }
        }
    }

    #[test]
    fn power_by_squaring() {
        let p = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(matrix_power(&p, 13)[(0, 1)].re, 13.0);
        assert!(matrix_power(&p, 0).approx_eq(&ComplexMatrix::identity(2), 0.0));
        assert_eq!([1, 2, 3, 13, 64].map(products), [0, 1, 2, 5, 6]);
    }
}
