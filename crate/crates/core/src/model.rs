//! Model parameters, bath phase, Hamiltonian blocks and initial states.
//!
//! Units are dimensionless with ħ = 1. Dicke states `|N/2, M⟩` are labelled by
//! the collective magnetization `M ∈ [-N/2, N/2]`; the two-qubit triplet is
//! `|1,1⟩ = |↑↑⟩`, `|1,0⟩ = (|↑↓⟩ + |↓↑⟩)/√2`, `|1,-1⟩ = |↓↓⟩` and the singlet
//! is `|0,0⟩ = (|↑↓⟩ - |↓↑⟩)/√2`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the Bell-diagonal weights of a legal initial state.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Tolerance on trace and positivity of an [`XState`].
pub const STATE_TOLERANCE: f64 = 1e-10;

/// The full definition of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spin-spin coupling inside the bath.
    pub lambda: f64,
    /// Coupling between the central qubits and the bath.
    pub lambda_prime: f64,
    /// Number of bath spins `N`; even and at least 4.
    pub n_spins: usize,
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
}

impl ModelParams {
    pub fn new(
        lambda: f64,
        lambda_prime: f64,
        n_spins: usize,
        kx: f64,
        ky: f64,
        kz: f64,
    ) -> Result<Self> {
        let params = ModelParams {
            lambda,
            lambda_prime,
            n_spins,
            kx,
            ky,
            kz,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be a finite positive number, got {}",
                self.lambda
            )));
        }
        if !(self.lambda_prime.is_finite() && self.lambda_prime >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda_prime must be finite and non-negative, got {}",
                self.lambda_prime
            )));
        }
        validate_spins(self.n_spins)?;
        check_bell_weights(self.kx, self.ky, self.kz)?;
        Ok(())
    }

    /// `N/2` as a signed magnetization.
    pub fn half_n(&self) -> i64 {
        (self.n_spins / 2) as i64
    }

    pub fn phase(&self) -> Result<Phase> {
        classify_phase(self.lambda)
    }

    pub fn ground_index(&self) -> Result<i64> {
        ground_state_index(self.lambda, self.n_spins)
    }

    /// Bell-diagonal weights of the initial state, see [`bell_weights`].
    pub fn bell_weights(&self) -> [f64; 4] {
        bell_weights(self.kx, self.ky, self.kz)
    }
}

fn validate_spins(n_spins: usize) -> Result<()> {
    if n_spins < 4 || !n_spins.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "n_spins must be even and at least 4, got {n_spins}"
        )));
    }
    Ok(())
}

/// Phase of the LMG bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// `0 < λ < 1`, ground state `|N/2, N/2⟩`.
    SymmetryBroken,
    /// `λ = 1`.
    Critical,
    /// `λ > 1`, ground state `|N/2, I(λ)⟩`.
    Symmetric,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::SymmetryBroken => "symmetry-broken",
            Phase::Critical => "critical",
            Phase::Symmetric => "symmetric",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be a finite positive number, got {lambda}"
        )));
    }
    Ok(())
}

pub fn classify_phase(lambda: f64) -> Result<Phase> {
    check_lambda(lambda)?;
    Ok(if lambda < 1.0 {
        Phase::SymmetryBroken
    } else if lambda > 1.0 {
        Phase::Symmetric
    } else {
        Phase::Critical
    })
}

/// Rounds half-integers away from zero.
fn nearest_integer(x: f64) -> i64 {
    x.round() as i64
}

/// Magnetization `M_G` of the bath ground state `|N/2, M_G⟩`.
///
/// `N/2` for `λ ≤ 1`; otherwise the integer nearest to `N/(2λ)`, clamped to
/// `[-N/2, N/2]`. At `λ = 1` both expressions coincide.
pub fn ground_state_index(lambda: f64, n_spins: usize) -> Result<i64> {
    check_lambda(lambda)?;
    validate_spins(n_spins)?;
    let half = (n_spins / 2) as i64;
    if lambda <= 1.0 {
        return Ok(half);
    }
    Ok(nearest_integer(n_spins as f64 / (2.0 * lambda)).clamp(-half, half))
}

/// The block of `H` on the invariant subspace `H_M`, spanned by
/// `|N/2,M⟩⊗|1,1⟩, |N/2,M+1⟩⊗|1,0⟩, |N/2,M+2⟩⊗|1,-1⟩` (those that exist).
///
/// ```text
///        | α  ξ  0 |
///  H_M = | ξ  β  κ |
///        | 0  κ  γ |
/// ```
///
/// For `M = N/2 - 1` only the first two basis states exist (`γ = κ = 0`); for
/// `M = N/2` only the first one does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianBlock {
    pub m_index: i64,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub kappa: f64,
}

impl HamiltonianBlock {
    /// Dense form; entries beyond `dim` are zero.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        h[0][0] = self.alpha;
        if self.dim >= 2 {
            h[0][1] = self.xi;
            h[1][0] = self.xi;
            h[1][1] = self.beta;
        }
        if self.dim == 3 {
            h[1][2] = self.kappa;
            h[2][1] = self.kappa;
            h[2][2] = self.gamma;
        }
        h
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix()
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }
}

/// Energy of `|N/2, M⟩` under the bath Hamiltonian alone, without the field term.
fn bath_exchange_energy(lambda: f64, n: f64, m: f64) -> f64 {
    -lambda / (2.0 * n) * (n * n - 4.0 * m * m)
}

fn ladder_coupling(lambda_prime: f64, n: f64, m: f64) -> f64 {
    // 2N(N+2) - 8M(M+1) vanishes at the top of the ladder; clamp roundoff.
    let arg = (2.0 * n * (n + 2.0) - 8.0 * m * (m + 1.0)).max(0.0);
    -lambda_prime / n * arg.sqrt()
}

/// Hamiltonian block `H_M` for `-N/2 ≤ M ≤ N/2 - 1`.
///
/// `M ≤ N/2 - 2` gives the 3x3 block, `M = N/2 - 1` the 2x2 block with
/// `κ = γ = 0`.
pub fn build_block(params: &ModelParams, m_index: i64) -> Result<HamiltonianBlock> {
    let half = params.half_n();
    if m_index < -half || m_index > half - 1 {
        return Err(Error::InvalidParameter(format!(
            "block index M={m_index} outside [{}, {}] for N={}",
            -half,
            half - 1,
            params.n_spins
        )));
    }
    let lambda = params.lambda;
    let n = params.n_spins as f64;
    let m = m_index as f64;
    let field = -2.0 * (m + 1.0);
    let alpha = bath_exchange_energy(lambda, n, m) + field;
    let beta = bath_exchange_energy(lambda, n, m + 1.0) + field;
    let xi = ladder_coupling(params.lambda_prime, n, m);
    if m_index == half - 1 {
        return Ok(HamiltonianBlock {
            m_index,
            dim: 2,
            alpha,
            beta,
            gamma: 0.0,
            xi,
            kappa: 0.0,
        });
    }
    Ok(HamiltonianBlock {
        m_index,
        dim: 3,
        alpha,
        beta,
        gamma: bath_exchange_energy(lambda, n, m + 2.0) + field,
        xi,
        kappa: ladder_coupling(params.lambda_prime, n, m + 1.0),
    })
}

/// Like [`build_block`], but also covers `M = N/2`, where `|N/2,N/2⟩⊗|1,1⟩`
/// spans a one-dimensional subspace with energy `-(N+2)`.
pub fn invariant_block(params: &ModelParams, m_index: i64) -> Result<HamiltonianBlock> {
    if m_index == params.half_n() {
        return Ok(HamiltonianBlock {
            m_index,
            dim: 1,
            alpha: one_dim_energy(params, OneDimState::TopAligned, m_index)?,
            beta: 0.0,
            gamma: 0.0,
            xi: 0.0,
            kappa: 0.0,
        });
    }
    build_block(params, m_index)
}

/// Exact eigenstates of `H` that form one-dimensional invariant subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneDimState {
    /// `|N/2, N/2⟩ ⊗ |1,1⟩`
    TopAligned,
    /// `|N/2, M⟩ ⊗ |0,0⟩`
    Singlet,
}

/// Eigenenergy of a one-dimensional invariant subspace.
///
/// The top-aligned state has energy `-(N+2)`. The singlet decouples from the
/// bath, so `|N/2,M⟩⊗|0,0⟩` carries the bare bath energy
/// `2λM²/N - λN/2 - 2M`. `m_index` is ignored for the top-aligned state.
pub fn one_dim_energy(params: &ModelParams, which: OneDimState, m_index: i64) -> Result<f64> {
    let n = params.n_spins as f64;
    match which {
        OneDimState::TopAligned => Ok(-(n + 2.0)),
        OneDimState::Singlet => {
            let half = params.half_n();
            if m_index < -half || m_index > half {
                return Err(Error::InvalidParameter(format!(
                    "singlet index M={m_index} outside [{}, {half}]",
                    -half
                )));
            }
            let m = m_index as f64;
            Ok(2.0 * params.lambda * m * m / n - params.lambda * n / 2.0 - 2.0 * m)
        }
    }
}

/// Weights of `|Ψ⁻⟩, |Φ⁻⟩, |Φ⁺⟩, |Ψ⁺⟩` in `¼(I + Σ k_α σ_α⊗σ_α)`.
pub fn bell_weights(kx: f64, ky: f64, kz: f64) -> [f64; 4] {
    [
        (1.0 - kx - ky - kz) / 4.0,
        (1.0 - kx + ky + kz) / 4.0,
        (1.0 + kx - ky + kz) / 4.0,
        (1.0 + kx + ky - kz) / 4.0,
    ]
}

const BELL_NAMES: [&str; 4] = ["singlet |Ψ-⟩", "|Φ-⟩", "|Φ+⟩", "|Ψ+⟩"];

fn check_bell_weights(kx: f64, ky: f64, kz: f64) -> Result<()> {
    for (name, k) in [("kx", kx), ("ky", ky), ("kz", kz)] {
        if !(k.is_finite() && (-1.0..=1.0).contains(&k)) {
            return Err(Error::InvalidState(format!(
                "{name} must lie in [-1, 1], got {k}"
            )));
        }
    }
    let weights = bell_weights(kx, ky, kz);
    for (w, name) in weights.iter().zip(BELL_NAMES) {
        if *w < -WEIGHT_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "(kx, ky, kz) = ({kx}, {ky}, {kz}) gives eigenvalue {w} on {name}"
            )));
        }
    }
    Ok(())
}

/// Two-qubit X state.
///
/// In the basis `{|↑↑⟩, |↓↓⟩, |↑↓⟩, |↓↑⟩}` the density matrix is
///
/// ```text
/// | A   Z   0   0 |
/// | Z*  C   0   0 |
/// | 0   0   B   Y |
/// | 0   0   Y   B |
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub y: f64,
    pub z: Complex64,
}

impl XState {
    /// Maximally mixed state.
    pub fn maximally_mixed() -> Self {
        XState {
            a: 0.25,
            b: 0.25,
            c: 0.25,
            y: 0.0,
            z: Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.a + 2.0 * self.b + self.c
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mean = 0.5 * (self.a + self.c);
        let half_gap = (0.25 * (self.a - self.c).powi(2) + self.z.norm_sqr()).sqrt();
        let mut ev = [
            mean - half_gap,
            mean + half_gap,
            self.b - self.y.abs(),
            self.b + self.y.abs(),
        ];
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.a * self.a
            + self.c * self.c
            + 2.0 * self.z.norm_sqr()
            + 2.0 * self.b * self.b
            + 2.0 * self.y * self.y
    }

    /// Diagonal of the single-qubit marginal `(p↑, p↓)`; both qubits share it.
    pub fn marginal(&self) -> [f64; 2] {
        [self.a + self.b, self.b + self.c]
    }

    /// Dense 4x4 matrix in the basis `{|↑↑⟩, |↓↓⟩, |↑↓⟩, |↓↑⟩}`.
    pub fn to_matrix(&self) -> [[Complex64; 4]; 4] {
        let zero = Complex64::new(0.0, 0.0);
        let re = |x: f64| Complex64::new(x, 0.0);
        [
            [re(self.a), self.z, zero, zero],
            [self.z.conj(), re(self.c), zero, zero],
            [zero, zero, re(self.b), re(self.y)],
            [zero, zero, re(self.y), re(self.b)],
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.y, self.z.re, self.z.im]
            .iter()
            .all(|x| x.is_finite())
    }

    /// Checks unit trace and positivity within [`STATE_TOLERANCE`].
    pub fn validate(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "non-finite X-state entries {self:?}"
            )));
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvariantViolation(format!(
                "X-state trace is {trace}, expected 1"
            )));
        }
        let min_ev = self.eigenvalues()[0];
        if min_ev < -STATE_TOLERANCE {
            return Err(Error::InvariantViolation(format!(
                "X-state has negative eigenvalue {min_ev}"
            )));
        }
        Ok(())
    }
}

/// `ρ_AB(0) = ¼(I + kx σx⊗σx + ky σy⊗σy + kz σz⊗σz)`.
pub fn initial_xstate(kx: f64, ky: f64, kz: f64) -> Result<XState> {
    check_bell_weights(kx, ky, kz)?;
    Ok(XState {
        a: (1.0 + kz) / 4.0,
        b: (1.0 - kz) / 4.0,
        c: (1.0 + kz) / 4.0,
        y: (kx + ky) / 4.0,
        z: Complex64::new((kx - ky) / 4.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(lambda: f64, lambda_prime: f64, n: usize) -> ModelParams {
        ModelParams::new(lambda, lambda_prime, n, 1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn phase_classification() {
        assert_eq!(classify_phase(0.75).unwrap(), Phase::SymmetryBroken);
        assert_eq!(classify_phase(1.25).unwrap(), Phase::Symmetric);
        assert_eq!(classify_phase(1.0).unwrap(), Phase::Critical);
        assert!(matches!(
            classify_phase(0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(classify_phase(-1.0).is_err());
        assert!(classify_phase(f64::NAN).is_err());
    }

    #[test]
    fn ground_index_examples() {
        assert_eq!(ground_state_index(0.75, 1000).unwrap(), 500);
        assert_eq!(ground_state_index(1.25, 500).unwrap(), 200);
        assert_eq!(ground_state_index(2.0, 8).unwrap(), 2);
        assert_eq!(ground_state_index(1.0, 10).unwrap(), 5);
        // N/(2λ) = 2.5 rounds away from zero
        assert_eq!(ground_state_index(1.6, 8).unwrap(), 3);
        assert!(ground_state_index(1.5, 5).is_err());
        assert!(ground_state_index(1.5, 2).is_err());
    }

    #[test]
    fn block_example_n4() {
        let b = build_block(&params(1.0, 1.0, 4), -2).unwrap();
        assert_eq!(b.dim, 3);
        assert_abs_diff_eq!(b.alpha, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.beta, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b.gamma, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.xi, -2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(b.kappa, -3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn block_top_is_two_dimensional() {
        let p = params(1.0, 1.0, 4);
        let b = build_block(&p, 1).unwrap();
        assert_eq!(b.dim, 2);
        assert_eq!(b.kappa, 0.0);
        assert_eq!(b.gamma, 0.0);
        let h = b.matrix();
        assert_eq!(h[2], [0.0; 3]);
        assert!(build_block(&p, 2).is_err());
        assert!(build_block(&p, -3).is_err());
        let top = invariant_block(&p, 2).unwrap();
        assert_eq!(top.dim, 1);
        assert_eq!(top.alpha, -6.0);
    }

    #[test]
    fn decoupled_block_is_diagonal() {
        let p = params(0.6, 0.0, 10);
        for m in -5..=4 {
            let b = build_block(&p, m).unwrap();
            assert_eq!(b.xi, 0.0);
            assert_eq!(b.kappa, 0.0);
        }
    }

    #[test]
    fn top_block_alpha_matches_top_aligned_energy() {
        // α evaluated at M = N/2 is the energy of |N/2,N/2⟩⊗|1,1⟩
        let p = params(0.8, 1.3, 12);
        let b = build_block(&p, 5).unwrap();
        let n = 12.0;
        let alpha_top = bath_exchange_energy(0.8, n, 6.0) - 2.0 * 7.0;
        assert_abs_diff_eq!(alpha_top, -(n + 2.0), epsilon = 1e-12);
        assert_abs_diff_eq!(b.beta, alpha_top + 2.0, epsilon = 1e-12);
    }

    #[test]
    fn one_dim_energy_examples() {
        assert_eq!(
            one_dim_energy(&params(1.0, 1.0, 4), OneDimState::TopAligned, 0).unwrap(),
            -6.0
        );
        assert_abs_diff_eq!(
            one_dim_energy(&params(1.0, 1.0, 4), OneDimState::Singlet, 0).unwrap(),
            -2.0,
            epsilon = 1e-14
        );
        // |500,500⟩ has bath energy -N; the singlet adds nothing.
        assert_abs_diff_eq!(
            one_dim_energy(&params(0.75, 1.0, 1000), OneDimState::Singlet, 500).unwrap(),
            -1000.0,
            epsilon = 1e-9
        );
        assert!(one_dim_energy(&params(1.0, 1.0, 4), OneDimState::Singlet, 3).is_err());
    }

    #[test]
    fn initial_state_examples() {
        let bell = initial_xstate(1.0, -1.0, 1.0).unwrap();
        assert_eq!(bell.a, 0.5);
        assert_eq!(bell.c, 0.5);
        assert_eq!(bell.z, Complex64::new(0.5, 0.0));
        assert_eq!(bell.b, 0.0);
        assert_eq!(bell.y, 0.0);

        assert_eq!(initial_xstate(0.0, 0.0, 0.0).unwrap(), XState::maximally_mixed());

        let mixed = initial_xstate(1.0, -0.2, 0.2).unwrap();
        assert_abs_diff_eq!(mixed.a, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.c, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.b, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.y, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.z.re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.purity(), 0.52, epsilon = 1e-14);
    }

    #[test]
    fn illegal_initial_state_names_eigenvalue() {
        let err = initial_xstate(1.0, 1.0, 1.0).unwrap_err();
        match err {
            Error::InvalidState(msg) => assert!(msg.contains("-0.5"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(initial_xstate(1.5, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 10, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(ModelParams::new(0.0, 1.0, 10, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, -0.1, 10, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 7, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 2, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 4, 0.0, 0.0, 0.0).is_ok());
    }

    proptest! {
        #[test]
        fn blocks_are_exactly_symmetric(
            lambda in 0.05f64..4.0,
            lambda_prime in 0.0f64..6.0,
            half in 2usize..40,
            frac in 0.0f64..1.0,
        ) {
            let n = 2 * half;
            let p = params(lambda, lambda_prime, n);
            let m = -(half as i64) + (frac * (n as f64 - 1.0)).floor() as i64;
            let h = build_block(&p, m).unwrap().matrix();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(h[i][j].to_bits(), h[j][i].to_bits());
                }
            }
        }

        #[test]
        fn ground_index_monotone(l1 in 1.0001f64..5.0, dl in 0.0f64..3.0, half in 2usize..600) {
            let n = 2 * half;
            let lo = ground_state_index(l1, n).unwrap();
            let hi = ground_state_index(l1 + dl, n).unwrap();
            prop_assert!(hi <= lo);
        }

        #[test]
        fn initial_eigenvalues_are_bell_weights(
            w in proptest::array::uniform4(0.0f64..1.0)
        ) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-3);
            let [s, pm, pp, sp] = w.map(|x| x / total);
            // invert the weight map
            let kx = pp + sp - s - pm;
            let ky = pm + sp - s - pp;
            let kz = pm + pp - s - sp;
            let state = initial_xstate(kx, ky, kz).unwrap();
            let mut expected = bell_weights(kx, ky, kz);
            expected.sort_by(f64::total_cmp);
            let ev = state.eigenvalues();
            for (a, b) in ev.iter().zip(expected.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!((state.trace() - 1.0).abs() < 1e-12);
        }
    }
}
