//! Reduced two-qubit state `ρ_ab(t) = Tr_bath[U(t) (|G⟩⟨G| ⊗ ρ_AB(0)) U†(t)]`.
//!
//! With the bath in `|G⟩ = |N/2, M_G⟩`, the triplet components of the initial
//! state sit in three different invariant subspaces:
//!
//! - `|M_G⟩⊗|1,1⟩` is the first basis state of `H_{M_G}`,
//! - `|M_G⟩⊗|1,0⟩` is the second basis state of `H_{M_G-1}`,
//! - `|M_G⟩⊗|1,-1⟩` is the third basis state of `H_{M_G-2}`,
//!
//! while `|M_G⟩⊗|0,0⟩` only picks up a phase. Blocks at the top of the ladder
//! are 2- or 1-dimensional; the propagator elements that would leave the
//! Dicke manifold are treated as zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{invariant_block, ModelParams, OneDimState, Phase, XState};
use crate::propagator::{block_propagator, eigensystem, scalar_phase, BlockEigensystem, BlockPropagator};

/// Everything time-independent needed to evaluate `ρ_ab(t)`.
#[derive(Debug, Clone)]
pub struct EvolutionContext {
    params: ModelParams,
    phase: Phase,
    ground_index: i64,
    /// Eigensystems of `H_{M_G}`, `H_{M_G-1}`, `H_{M_G-2}`.
    subspaces: [BlockEigensystem; 3],
}

/// The three subspace propagators at one instant.
#[derive(Debug, Clone, Copy)]
pub struct SubspacePropagators {
    /// `U` on `H_{M_G}`.
    pub ground: BlockPropagator,
    /// `U'` on `H_{M_G-1}`.
    pub lower: BlockPropagator,
    /// `U''` on `H_{M_G-2}`.
    pub lowest: BlockPropagator,
}

/// Time-independent prefactors of the initial state.
#[derive(Debug, Clone, Copy)]
struct Weights {
    /// `(1+kz)/4`, population of `|1,1⟩` and of `|1,-1⟩`.
    aligned: f64,
    /// `(1+kx+ky-kz)/4`, population of `|1,0⟩`.
    triplet_zero: f64,
    /// `(1-kx-ky-kz)/4`, population of the singlet.
    singlet: f64,
    /// `(kx-ky)/4`, coherence between `|1,1⟩` and `|1,-1⟩`.
    coherence: f64,
}

impl Weights {
    fn new(p: &ModelParams) -> Self {
        Weights {
            aligned: (1.0 + p.kz) / 4.0,
            triplet_zero: (1.0 + p.kx + p.ky - p.kz) / 4.0,
            singlet: (1.0 - p.kx - p.ky - p.kz) / 4.0,
            coherence: (p.kx - p.ky) / 4.0,
        }
    }
}

impl EvolutionContext {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let phase = params.phase()?;
        let ground_index = params.ground_index()?;
        let half = params.half_n();
        if ground_index - 2 < -half {
            return Err(Error::InvalidParameter(format!(
                "ground state M={ground_index} too close to the bottom of the ladder for N={}",
                params.n_spins
            )));
        }
        let eig = |m: i64| invariant_block(&params, m).map(|b| eigensystem(&b));
        let subspaces = [eig(ground_index)?, eig(ground_index - 1)?, eig(ground_index - 2)?];
        Ok(EvolutionContext {
            params,
            phase,
            ground_index,
            subspaces,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ground_index(&self) -> i64 {
        self.ground_index
    }

    pub fn subspaces(&self) -> &[BlockEigensystem; 3] {
        &self.subspaces
    }

    pub fn propagators(&self, t: f64) -> SubspacePropagators {
        SubspacePropagators {
            ground: block_propagator(&self.subspaces[0], t),
            lower: block_propagator(&self.subspaces[1], t),
            lowest: block_propagator(&self.subspaces[2], t),
        }
    }

    /// Reduced state at `t`, dispatching on the bath phase. The critical point
    /// `λ = 1` is evaluated with the symmetry-broken formulas.
    pub fn state_at(&self, t: f64) -> Result<XState> {
        match self.phase {
            Phase::Symmetric => reduced_state_symmetric(self, t),
            Phase::SymmetryBroken | Phase::Critical => reduced_state_broken(self, t),
        }
    }

    /// Reduced state from the subspace-generic assembly, valid in either phase.
    pub fn generic_state_at(&self, t: f64) -> XState {
        let u = self.propagators(t);
        let w = Weights::new(&self.params);
        // Column j of each propagator is where the initial basis state goes;
        // rows 0, 1, 2 carry |1,1⟩, |1,0⟩, |1,-1⟩ respectively.
        let column = [(&u.ground, 0usize, w.aligned), (&u.lower, 1, w.triplet_zero), (&u.lowest, 2, w.aligned)];
        let population = |row: usize| -> f64 {
            column
                .iter()
                .map(|(prop, col, weight)| weight * prop.weight(row, *col))
                .sum()
        };
        let up_up = population(0);
        let triplet = population(1);
        let down_down = population(2);
        XState {
            a: up_up,
            b: 0.5 * triplet + 0.5 * w.singlet,
            c: down_down,
            y: 0.5 * triplet - 0.5 * w.singlet,
            z: w.coherence * u.ground.element(0, 0) * u.lowest.element(2, 2).conj(),
        }
    }
}

fn heaviside(x: i64) -> f64 {
    if x >= 0 {
        1.0
    } else {
        0.0
    }
}

/// Reduced state for a bath in the symmetric phase (`λ > 1`), ground state
/// `|N/2, I(λ)⟩`.
///
/// ```text
/// A = (1+kz)/4 (|U11|² + |U''13|²) + (1+kx+ky-kz)/4 |U'12|²
/// B = (1+kz)/8 (|U12|² + |U''23|²) + (1+kx+ky-kz)/8 |U'22|² + (1-kx-ky-kz)/8
/// C = (1+kz)/4 [θ(N/2-I-1) |U13|² + |U''33|²] + (1+kx+ky-kz)/4 |U'23|²
/// Y = B - (1-kx-ky-kz)/4
/// Z = (kx-ky)/4 U11 U''33*
/// ```
pub fn reduced_state_symmetric(ctx: &EvolutionContext, t: f64) -> Result<XState> {
    if ctx.phase != Phase::Symmetric {
        return Err(Error::PhaseMismatch {
            expected: Phase::Symmetric.name(),
            actual: ctx.phase.name(),
        });
    }
    let p = &ctx.params;
    let SubspacePropagators { ground: u, lower: u1, lowest: u2 } = ctx.propagators(t);
    let aligned = (1.0 + p.kz) / 4.0;
    let triplet_zero = (1.0 + p.kx + p.ky - p.kz) / 4.0;
    let singlet = (1.0 - p.kx - p.ky - p.kz) / 8.0;
    let gate = heaviside(p.half_n() - ctx.ground_index - 1);

    let a = aligned * (u.weight(0, 0) + u2.weight(0, 2)) + triplet_zero * u1.weight(0, 1);
    let shared = 0.5 * aligned * (u.weight(0, 1) + u2.weight(1, 2)) + 0.5 * triplet_zero * u1.weight(1, 1);
    let c = aligned * (gate * u.weight(0, 2) + u2.weight(2, 2)) + triplet_zero * u1.weight(1, 2);
    let z = (p.kx - p.ky) / 4.0 * u.element(0, 0) * u2.element(2, 2).conj();
    Ok(XState {
        a,
        b: shared + singlet,
        c,
        y: shared - singlet,
        z,
    })
}

/// Reduced state for a bath in the symmetry-broken phase (`λ < 1`, and the
/// critical point), ground state `|N/2, N/2⟩`.
///
/// `|G⟩⊗|1,1⟩` is an eigenstate with energy `-(N+2)`, `Ũ'` acts on the 2x2
/// block `H_{N/2-1}` and `Ũ''` on the 3x3 block `H_{N/2-2}`:
///
/// ```text
/// A = (1+kz)/4 (1 + |Ũ''13|²) + (1+kx+ky-kz)/4 |Ũ'12|²
/// B = (1+kz)/8 |Ũ''23|² + (1+kx+ky-kz)/8 |Ũ'22|² + (1-kx-ky-kz)/8
/// C = (1+kz)/4 |Ũ''33|²
/// Y = B - (1-kx-ky-kz)/4
/// Z = (kx-ky)/4 e^{i(N+2)t} Ũ''33*
/// ```
pub fn reduced_state_broken(ctx: &EvolutionContext, t: f64) -> Result<XState> {
    if !matches!(ctx.phase, Phase::SymmetryBroken | Phase::Critical) {
        return Err(Error::PhaseMismatch {
            expected: Phase::SymmetryBroken.name(),
            actual: ctx.phase.name(),
        });
    }
    let p = &ctx.params;
    debug_assert_eq!(ctx.ground_index, p.half_n());
    let SubspacePropagators { lower: u1, lowest: u2, .. } = ctx.propagators(t);
    let aligned = (1.0 + p.kz) / 4.0;
    let triplet_zero = (1.0 + p.kx + p.ky - p.kz) / 4.0;
    let singlet = (1.0 - p.kx - p.ky - p.kz) / 8.0;
    let top_energy = crate::model::one_dim_energy(p, OneDimState::TopAligned, p.half_n())?;

    let a = aligned * (1.0 + u2.weight(0, 2)) + triplet_zero * u1.weight(0, 1);
    let shared = 0.5 * aligned * u2.weight(1, 2) + 0.5 * triplet_zero * u1.weight(1, 1);
    let c = aligned * u2.weight(2, 2);
    let z: Complex64 = (p.kx - p.ky) / 4.0 * scalar_phase(top_energy, t) * u2.element(2, 2).conj();
    Ok(XState {
        a,
        b: shared + singlet,
        c,
        y: shared - singlet,
        z,
    })
}

/// Builds the evolution context and evaluates the reduced state at `t`.
/// Callers evaluating many times should build an [`EvolutionContext`] once.
pub fn reduced_state(params: &ModelParams, t: f64) -> Result<XState> {
    EvolutionContext::new(*params)?.state_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::initial_xstate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ctx(lambda: f64, lambda_prime: f64, n: usize, k: (f64, f64, f64)) -> EvolutionContext {
        EvolutionContext::new(ModelParams::new(lambda, lambda_prime, n, k.0, k.1, k.2).unwrap()).unwrap()
    }

    fn assert_state_close(x: &XState, y: &XState, tol: f64) {
        assert_abs_diff_eq!(x.a, y.a, epsilon = tol);
        assert_abs_diff_eq!(x.b, y.b, epsilon = tol);
        assert_abs_diff_eq!(x.c, y.c, epsilon = tol);
        assert_abs_diff_eq!(x.y, y.y, epsilon = tol);
        assert_abs_diff_eq!(x.z.re, y.z.re, epsilon = tol);
        assert_abs_diff_eq!(x.z.im, y.z.im, epsilon = tol);
    }

    #[test]
    fn zero_time_collapses_to_initial_state() {
        for k in [(1.0, -1.0, 1.0), (1.0, -0.2, 0.2), (0.3, 0.1, -0.4)] {
            let init = initial_xstate(k.0, k.1, k.2).unwrap();
            for lambda in [0.75, 1.0, 1.25, 3.0] {
                let c = ctx(lambda, 2.0, 20, k);
                assert_state_close(&c.state_at(0.0).unwrap(), &init, 1e-14);
            }
        }
    }

    #[test]
    fn decoupled_qubits_keep_their_state() {
        let k = (1.0, -0.2, 0.2);
        let init = initial_xstate(k.0, k.1, k.2).unwrap();
        let c = ctx(0.75, 0.0, 40, k);
        for t in [0.3, 1.0, 7.5] {
            let s = c.state_at(t).unwrap();
            assert_abs_diff_eq!(s.a, init.a, epsilon = 1e-13);
            assert_abs_diff_eq!(s.b, init.b, epsilon = 1e-13);
            assert_abs_diff_eq!(s.c, init.c, epsilon = 1e-13);
            assert_abs_diff_eq!(s.y, init.y, epsilon = 1e-13);
            assert_abs_diff_eq!(s.z.norm(), init.z.norm(), epsilon = 1e-13);
        }
    }

    #[test]
    fn dispatch_follows_phase() {
        let broken = ctx(0.75, 1.0, 20, (1.0, -1.0, 1.0));
        assert!(reduced_state_symmetric(&broken, 1.0).is_err());
        assert_eq!(broken.state_at(1.0).unwrap(), reduced_state_broken(&broken, 1.0).unwrap());

        let symmetric = ctx(1.25, 1.0, 20, (1.0, -1.0, 1.0));
        assert!(matches!(
            reduced_state_broken(&symmetric, 1.0),
            Err(Error::PhaseMismatch { .. })
        ));
        assert_eq!(symmetric.state_at(1.0).unwrap(), reduced_state_symmetric(&symmetric, 1.0).unwrap());

        let critical = ctx(1.0, 1.0, 20, (1.0, -1.0, 1.0));
        assert_eq!(critical.phase(), Phase::Critical);
        assert_eq!(critical.ground_index(), 10);
        assert_eq!(critical.state_at(0.8).unwrap(), reduced_state_broken(&critical, 0.8).unwrap());

        let p = ModelParams::new(1.25, 1.0, 20, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(reduced_state(&p, 0.5).unwrap(), symmetric.state_at(0.5).unwrap());
    }

    #[test]
    fn subspace_dimensions() {
        let broken = ctx(0.5, 1.0, 12, (1.0, -1.0, 1.0));
        let dims: Vec<usize> = broken.subspaces().iter().map(|s| s.dim).collect();
        assert_eq!(dims, vec![1, 2, 3]);
        let symmetric = ctx(3.0, 1.0, 12, (1.0, -1.0, 1.0));
        assert_eq!(symmetric.ground_index(), 2);
        let dims: Vec<usize> = symmetric.subspaces().iter().map(|s| s.dim).collect();
        assert_eq!(dims, vec![3, 3, 3]);
    }

    #[test]
    fn symmetric_phase_near_the_top_of_the_ladder() {
        // N/(2λ) rounds to N/2 and N/2 - 1: 1- and 2-dimensional ground blocks
        let top = ctx(1.05, 1.5, 8, (1.0, -1.0, 1.0));
        assert_eq!(top.phase(), Phase::Symmetric);
        assert_eq!(top.ground_index(), 4);
        let next = ctx(1.25, 1.5, 8, (1.0, -1.0, 1.0));
        assert_eq!(next.ground_index(), 3);
        for c in [top, next] {
            for t in [0.0, 0.4, 2.2] {
                let s = c.state_at(t).unwrap();
                s.validate().unwrap();
                assert_state_close(&s, &c.generic_state_at(t), 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn literal_and_generic_assembly_agree(
            lambda in 0.2f64..3.0,
            lambda_prime in 0.0f64..5.0,
            half in 2usize..300,
            t in 0.0f64..5.0,
            mix in 0.0f64..1.0,
        ) {
            let k = (1.0, -1.0 + 0.8 * mix, 1.0 - 0.8 * mix);
            let c = ctx(lambda, lambda_prime, 2 * half, k);
            let s = c.state_at(t).unwrap();
            let g = c.generic_state_at(t);
            prop_assert!((s.a - g.a).abs() < 1e-12);
            prop_assert!((s.b - g.b).abs() < 1e-12);
            prop_assert!((s.c - g.c).abs() < 1e-12);
            prop_assert!((s.y - g.y).abs() < 1e-12);
            prop_assert!((s.z - g.z).norm() < 1e-12);
        }

        #[test]
        fn trace_positivity_purity(
            lambda in 0.2f64..3.0,
            lambda_prime in 0.0f64..6.0,
            half in 2usize..600,
            t in 0.0f64..10.0,
            w in proptest::array::uniform4(0.0f64..1.0),
        ) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-3);
            let [s, pm, pp, sp] = w.map(|x| x / total);
            let k = (pp + sp - s - pm, pm + sp - s - pp, pm + pp - s - sp);
            let c = ctx(lambda, lambda_prime, 2 * half, k);
            let st = c.state_at(t).unwrap();
            prop_assert!((st.trace() - 1.0).abs() < 1e-10);
            prop_assert!(st.eigenvalues()[0] >= -1e-10);
            let purity = st.purity();
            prop_assert!((0.25 - 1e-10..=1.0 + 1e-10).contains(&purity));
            // the singlet population B - Y is frozen
            let init = initial_xstate(k.0, k.1, k.2).unwrap();
            prop_assert!(((st.b - st.y) - (init.b - init.y)).abs() < 1e-10);
            let m = st.to_matrix();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert_eq!(m[i][j], m[j][i].conj());
                }
            }
        }
    }
}
