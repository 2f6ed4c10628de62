use alloc::vec;
use alloc::vec::Vec;

use super::{block_liouvillian, build_liouvillian, DynamicsError, LindbladGenerator};
use crate::linalg::{expm, ComplexMatrix, C64};

/// Relative tolerance under which two block generators share a propagator.
const DEDUP_TOL: f64 = 1e-14;

/// `P = expm(L · dt)`.
pub fn step_propagator(l: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix, DynamicsError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    Ok(expm(&l.scale_real(dt))?)
}

/// Connected components of the graph whose edges are the nonzero entries of
/// `H` and of every jump operator with nonzero rate. Each component spans a
/// subspace mapped into itself by all of them.
///
/// Components are listed by smallest member, members ascending.
pub fn invariant_sectors(gen: &LindbladGenerator) -> Vec<Vec<usize>> {
    let n = gen.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut link = |m: &ComplexMatrix| {
        for c in 0..n {
            for r in 0..n {
                if r != c && m[(r, c)] != C64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    };
    link(gen.hamiltonian());
    for (g, j) in gen.jumps() {
        if *g != 0.0 {
            link(j);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut sectors: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        if label[root] == usize::MAX {
            label[root] = sectors.len();
            sectors.push(Vec::new());
        }
        sectors[label[root]].push(i);
    }
    sectors
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Block propagators on the invariant sectors of the generator.
    #[default]
    Sectored,
    /// One propagator for the full `dim² × dim²` Liouvillian.
    Dense,
}

#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub(crate) a: usize,
    pub(crate) b: usize,
    /// Index into `Propagator::props`.
    pub(crate) prop: usize,
}

/// Precomputed one-step channel `ρ(t) -> ρ(t + dt)`.
///
/// In sectored mode only blocks `ρ_ab` with `a <= b` are propagated; the
/// lower blocks are filled in as `ρ_ba = ρ_ab†`, so inputs must be Hermitian.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim: usize,
    dt: f64,
    method: Method,
    sectors: Vec<Vec<usize>>,
    blocks: Vec<Block>,
    // blocks with identical Liouvillians share one propagator
    props: Vec<ComplexMatrix>,
}

impl Propagator {
    pub fn new(gen: &LindbladGenerator, dt: f64, method: Method) -> Result<Self, DynamicsError> {
        Self::build(gen, dt, method, None)
    }

    /// Skips blocks that are zero in `rho0`; they stay zero under the
    /// evolution.
    pub fn for_state(gen: &LindbladGenerator, dt: f64, method: Method, rho0: &ComplexMatrix) -> Result<Self, DynamicsError> {
        Self::build(gen, dt, method, Some(rho0))
    }

    fn build(gen: &LindbladGenerator, dt: f64, method: Method, rho0: Option<&ComplexMatrix>) -> Result<Self, DynamicsError> {
        let dim = gen.dim();
        if let Some(r) = rho0 {
            if r.rows() != dim || r.cols() != dim {
                return Err(DynamicsError::DimensionMismatch {
                    expected: dim,
                    found: r.rows(),
                });
            }
        }
        let (sectors, blocks, props) = match method {
            Method::Dense => {
                let prop = step_propagator(&build_liouvillian(gen), dt)?;
                (vec![(0..dim).collect::<Vec<_>>()], vec![Block { a: 0, b: 0, prop: 0 }], vec![prop])
            }
            Method::Sectored => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(DynamicsError::InvalidStep(dt));
                }
                let sectors = invariant_sectors(gen);
                let mut blocks = Vec::new();
                let mut generators: Vec<ComplexMatrix> = Vec::new();
                let mut props = Vec::new();
                for a in 0..sectors.len() {
                    for b in a..sectors.len() {
                        let live = rho0.is_none_or(|r| {
                            sectors[a]
                                .iter()
                                .any(|&i| sectors[b].iter().any(|&j| r[(i, j)] != C64::new(0.0, 0.0)))
                        });
                        if live {
                            let l = block_liouvillian(gen, &sectors[a], &sectors[b]);
                            // equal up to rounding in the diagonal energy differences
                            let same = |g: &ComplexMatrix| {
                                g.rows() == l.rows() && g.cols() == l.cols() && g.max_abs_diff(&l) <= DEDUP_TOL * l.max_abs().max(1.0)
                            };
                            let prop = match generators.iter().position(same) {
                                Some(k) => k,
                                None => {
                                    props.push(step_propagator(&l, dt)?);
                                    generators.push(l);
                                    props.len() - 1
                                }
                            };
                            blocks.push(Block { a, b, prop });
                        }
                    }
                }
                (sectors, blocks, props)
            }
        };
        Ok(Self {
            dim,
            dt,
            method,
            sectors,
            blocks,
            props,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn sectors(&self) -> &[Vec<usize>] {
        &self.sectors
    }

    /// Number of propagated blocks `ρ_ab`.
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Number of distinct block propagators.
    pub fn n_distinct(&self) -> usize {
        self.props.len()
    }

    pub(crate) fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub(crate) fn block_propagator(&self, blk: &Block) -> &ComplexMatrix {
        &self.props[blk.prop]
    }

    /// One step, written into `out`. `scratch` is resized as needed.
    pub fn step_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix, scratch: &mut Scratch) {
        assert_eq!((rho.rows(), rho.cols()), (self.dim, self.dim));
        assert_eq!((out.rows(), out.cols()), (self.dim, self.dim));
        out.as_mut_slice().iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for blk in &self.blocks {
            let (ia, ib) = (&self.sectors[blk.a], &self.sectors[blk.b]);
            let n = ia.len() * ib.len();
            scratch.x.clear();
            for &c in ib {
                scratch.x.extend(ia.iter().map(|&r| rho[(r, c)]));
            }
            scratch.y.resize(n, C64::new(0.0, 0.0));
            self.props[blk.prop].matvec_into(&scratch.x, &mut scratch.y);
            let mirror = blk.a != blk.b;
            for (cj, &c) in ib.iter().enumerate() {
                for (ri, &r) in ia.iter().enumerate() {
                    let v = scratch.y[ri + cj * ia.len()];
                    out[(r, c)] = v;
                    if mirror {
                        out[(c, r)] = v.conj();
                    }
                }
            }
        }
    }

    pub fn step(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        self.step_into(rho, &mut out, &mut Scratch::default());
        out
    }
}

/// Work buffers reused across steps.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    x: Vec<C64>,
    y: Vec<C64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{sigma_minus, sigma_x, sigma_z};
    use crate::linalg::test_support::{random_density, random_hermitian, random_matrix};
    use crate::linalg::{c64, embed, SubsystemLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_generator_gives_identity() {
        let gen = LindbladGenerator::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        let p = step_propagator(&build_liouvillian(&gen), 0.3).unwrap();
        assert!(p.approx_eq(&ComplexMatrix::identity(4), 0.0));
        assert!(matches!(step_propagator(&p, 0.0), Err(DynamicsError::InvalidStep(_))));
    }

    #[test]
    fn semigroup_sixteen_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = random_hermitian(&mut rng, 3);
        let jumps = vec![(0.2, random_matrix(&mut rng, 3, 3)), (0.05, random_matrix(&mut rng, 3, 3))];
        let gen = LindbladGenerator::new(h, jumps).unwrap();
        let l = build_liouvillian(&gen);
        let dt = 0.07;
        let p = step_propagator(&l, dt).unwrap();
        let mut pn = ComplexMatrix::identity(9);
        for _ in 0..16 {
            pn = p.matmul(&pn);
        }
        let direct = step_propagator(&l, 16.0 * dt).unwrap();
        assert!(pn.max_abs_diff(&direct) < 1e-8);
    }

    fn probe_with_bath() -> LindbladGenerator {
        // qubit 0 only dephases against qubit 1, which relaxes
        let layout = SubsystemLayout::qubits(3);
        let z0 = embed(&sigma_z(), 0, &layout).unwrap();
        let x1 = embed(&sigma_x(), 1, &layout).unwrap();
        let x2 = embed(&sigma_x(), 2, &layout).unwrap();
        let z1 = embed(&sigma_z(), 1, &layout).unwrap();
        let h = &(&z0.scale_real(0.5) + &z0.matmul(&x1).scale_real(0.1)) + &(&z1.matmul(&x2).scale_real(0.2) + &z1.scale_real(0.35));
        let jumps = vec![
            (0.03, embed(&sigma_minus(), 1, &layout).unwrap()),
            (0.01, embed(&sigma_z(), 2, &layout).unwrap()),
            (0.0, embed(&sigma_x(), 0, &layout).unwrap()),
        ];
        LindbladGenerator::new(h, jumps).unwrap()
    }

    #[test]
    fn sectors_follow_the_coupling_graph() {
        let gen = probe_with_bath();
        let s = invariant_sectors(&gen);
        // the zero-rate σ_x on qubit 0 must not merge sectors
        assert_eq!(s, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
    }

    #[test]
    fn sectored_matches_dense() {
        let gen = probe_with_bath();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let rho = random_density(&mut rng, 8);
        let dense = Propagator::new(&gen, 0.1, Method::Dense).unwrap();
        let sect = Propagator::new(&gen, 0.1, Method::Sectored).unwrap();
        assert_eq!(sect.n_blocks(), 3);
        let (mut a, mut b) = (rho.clone(), rho);
        for _ in 0..50 {
            a = dense.step(&a);
            b = sect.step(&b);
        }
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn zero_blocks_are_skipped() {
        let gen = probe_with_bath();
        let mut rho = ComplexMatrix::zeros(8, 8);
        rho[(0, 0)] = c64(1.0, 0.0);
        let p = Propagator::for_state(&gen, 0.1, Method::Sectored, &rho).unwrap();
        assert_eq!(p.n_blocks(), 1);
        let next = p.step(&rho);
        assert!((next.trace() - c64(1.0, 0.0)).norm() < 1e-12);
    }
}
