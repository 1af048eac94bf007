//! Brute-force references for validating the closed-form machinery.
//!
//! [`DenseEvolver`] builds the full Hamiltonian on the Dicke manifold tensored
//! with the two qubits, diagonalizes it and evolves the total state exactly.
//! [`discord_bruteforce`] optimises the one-sided projective measurement over
//! the whole Bloch sphere. Neither relies on the invariant-subspace
//! decomposition or on the X structure of the states it checks.
//!
//! Dense basis: `|N/2, M⟩ ⊗ |s_a s_b⟩` with `M = -N/2 + k`, qubit states ordered
//! `{|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩}`, flat index `4k + q`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, XState};

/// Largest bath the dense oracle accepts.
pub const MAX_ORACLE_SPINS: usize = 64;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Full Hamiltonian on the `4(N+1)`-dimensional space. All matrix elements
/// are real in the product basis.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub n_spins: usize,
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Index of `|N/2, M⟩ ⊗ q` in the dense basis.
pub fn dense_index(n_spins: usize, m: i64, qubits: usize) -> usize {
    let k = (m + (n_spins / 2) as i64) as usize;
    4 * k + qubits
}

/// Total magnetization `M + (s_a + s_b)/2` of a dense basis state, doubled
/// to stay integral.
pub fn doubled_magnetization(n_spins: usize, index: usize) -> i64 {
    let k = (index / 4) as i64;
    let q = index % 4;
    let bath = 2 * k - n_spins as i64;
    let qubits = match q {
        0 => 2,
        1 | 2 => 0,
        _ => -2,
    };
    bath + qubits
}

/// Collective `S^z` on the Dicke manifold `J = N/2`.
fn dicke_sz(n_spins: usize) -> DMatrix<f64> {
    let j = n_spins as f64 / 2.0;
    DMatrix::from_fn(n_spins + 1, n_spins + 1, |r, col| {
        if r == col {
            -j + r as f64
        } else {
            0.0
        }
    })
}

/// Collective `S^+`: `⟨M+1|S^+|M⟩ = √(J(J+1) - M(M+1))`.
fn dicke_raising(n_spins: usize) -> DMatrix<f64> {
    let j = n_spins as f64 / 2.0;
    DMatrix::from_fn(n_spins + 1, n_spins + 1, |r, col| {
        if r == col + 1 {
            let m = -j + col as f64;
            (j * (j + 1.0) - m * (m + 1.0)).sqrt()
        } else {
            0.0
        }
    })
}

/// Two-qubit operators in the basis `{↑↑, ↑↓, ↓↑, ↓↓}`: `(S_+, S_z)` with
/// `S_+ = σ⁺_a + σ⁺_b`, `S_z = (σᶻ_a + σᶻ_b)/2`.
fn qubit_pair_operators() -> (DMatrix<f64>, DMatrix<f64>) {
    let id = DMatrix::<f64>::identity(2, 2);
    // single qubit, index 0 = ↑
    let raise = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let s_plus = raise.kronecker(&id) + id.kronecker(&raise);
    let s_z = (sz.kronecker(&id) + id.kronecker(&sz)) * 0.5;
    (s_plus, s_z)
}

fn check_scale(n_spins: usize) -> Result<()> {
    if n_spins > MAX_ORACLE_SPINS {
        return Err(Error::InvalidParameter(format!(
            "dense oracle is limited to N <= {MAX_ORACLE_SPINS}, got {n_spins}"
        )));
    }
    Ok(())
}

/// `H = -λ/N (S⁺S⁻ + S⁻S⁺ - N) - 2 S_N^z - 2λ'/N (S_+ S_N^- + S_- S_N^+) - 2 S_z`
/// from the collective ladder operators.
pub fn dense_hamiltonian(params: &ModelParams) -> Result<DenseOperator> {
    params.validate()?;
    check_scale(params.n_spins)?;
    let n = params.n_spins as f64;
    let bath_dim = params.n_spins + 1;
    let id_bath = DMatrix::<f64>::identity(bath_dim, bath_dim);
    let id_qubits = DMatrix::<f64>::identity(4, 4);

    let bath = bath_hamiltonian(params);
    let bath_plus = dicke_raising(params.n_spins);
    let bath_minus = bath_plus.transpose();
    let (pair_plus, pair_z) = qubit_pair_operators();
    let pair_minus = pair_plus.transpose();

    let coupling = bath_minus.kronecker(&pair_plus) + bath_plus.kronecker(&pair_minus);
    let matrix = bath.kronecker(&id_qubits) - coupling * (2.0 * params.lambda_prime / n)
        - id_bath.kronecker(&pair_z) * 2.0;
    Ok(DenseOperator {
        n_spins: params.n_spins,
        matrix,
    })
}

/// Bath Hamiltonian on the Dicke manifold.
pub fn bath_hamiltonian(params: &ModelParams) -> DMatrix<f64> {
    let n = params.n_spins as f64;
    let plus = dicke_raising(params.n_spins);
    let minus = plus.transpose();
    let id = DMatrix::<f64>::identity(params.n_spins + 1, params.n_spins + 1);
    let exchange = &plus * &minus + &minus * &plus - id * n;
    exchange * (-params.lambda / n) - dicke_sz(params.n_spins) * 2.0
}

/// Magnetization of the bath ground state found by minimising the bath
/// energy directly. Exact ties resolve to the larger `M`.
pub fn dense_ground_index(params: &ModelParams) -> i64 {
    let h = bath_hamiltonian(params);
    let half = (params.n_spins / 2) as i64;
    let mut best = 0;
    for k in 1..h.nrows() {
        if h[(k, k)] <= h[(best, best)] {
            best = k;
        }
    }
    best as i64 - half
}

/// Dense 4x4 matrix of an X state in the product basis `{↑↑, ↑↓, ↓↑, ↓↓}`.
pub fn xstate_to_product(state: &XState) -> Matrix4<C> {
    let mut m = Matrix4::<C>::zeros();
    m[(0, 0)] = c(state.a);
    m[(3, 3)] = c(state.c);
    m[(0, 3)] = state.z;
    m[(3, 0)] = state.z.conj();
    m[(1, 1)] = c(state.b);
    m[(2, 2)] = c(state.b);
    m[(1, 2)] = c(state.y);
    m[(2, 1)] = c(state.y);
    m
}

/// Reads the X-state entries back from a product-basis matrix; other entries
/// are ignored.
pub fn product_to_xstate(m: &Matrix4<C>) -> XState {
    XState {
        a: m[(0, 0)].re,
        b: 0.5 * (m[(1, 1)].re + m[(2, 2)].re),
        c: m[(3, 3)].re,
        y: 0.5 * (m[(1, 2)].re + m[(2, 1)].re),
        z: m[(0, 3)],
    }
}

/// Reorders an X state's `{↑↑, ↓↓, ↑↓, ↓↑}` matrix into the product basis.
pub fn xstate_matrix_in_product_basis(state: &XState) -> Matrix4<C> {
    let src = state.to_matrix();
    // product index -> X-state index
    let map = [0usize, 2, 3, 1];
    Matrix4::from_fn(|i, j| src[map[i]][map[j]])
}

/// Exact evolution of the total system by eigendecomposition of the dense
/// Hamiltonian.
#[derive(Debug, Clone)]
pub struct DenseEvolver {
    params: ModelParams,
    ground_index: i64,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl DenseEvolver {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let h = dense_hamiltonian(params)?;
        let eig = SymmetricEigen::new(h.matrix);
        Ok(DenseEvolver {
            params: *params,
            ground_index: dense_ground_index(params),
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn ground_index(&self) -> i64 {
        self.ground_index
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `exp(-iHt)` on the full space.
    pub fn propagator(&self, t: f64) -> DMatrix<C> {
        let dim = self.dim();
        let phases: Vec<C> = self.energies.iter().map(|e| C::from_polar(1.0, -e * t)).collect();
        DMatrix::from_fn(dim, dim, |i, j| {
            (0..dim)
                .map(|l| phases[l] * (self.vectors[(i, l)] * self.vectors[(j, l)]))
                .sum()
        })
    }

    fn ground_columns(&self) -> [usize; 4] {
        let n = self.params.n_spins;
        [0, 1, 2, 3].map(|q| dense_index(n, self.ground_index, q))
    }

    /// `|G⟩⟨G| ⊗ ρ_AB(0)` on the full space.
    pub fn initial_total_state(&self, initial: &XState) -> DMatrix<C> {
        let dim = self.dim();
        let local = xstate_to_product(initial);
        let cols = self.ground_columns();
        let mut rho = DMatrix::<C>::zeros(dim, dim);
        for (qi, &i) in cols.iter().enumerate() {
            for (qj, &j) in cols.iter().enumerate() {
                rho[(i, j)] = local[(qi, qj)];
            }
        }
        rho
    }

    /// `U(t) ρ_tot(0) U†(t)`.
    pub fn total_state(&self, initial: &XState, t: f64) -> DMatrix<C> {
        let u = self.propagator(t);
        &u * self.initial_total_state(initial) * u.adjoint()
    }

    /// Columns of `U(t)` that act on `|G⟩ ⊗ q`.
    fn ground_propagator_columns(&self, t: f64) -> DMatrix<C> {
        let dim = self.dim();
        let cols = self.ground_columns();
        let mut out = DMatrix::<C>::zeros(dim, 4);
        for (q, &col) in cols.iter().enumerate() {
            let weights: Vec<C> = (0..dim)
                .map(|l| C::from_polar(1.0, -self.energies[l] * t) * self.vectors[(col, l)])
                .collect();
            for i in 0..dim {
                out[(i, q)] = (0..dim).map(|l| weights[l] * self.vectors[(i, l)]).sum();
            }
        }
        out
    }

    /// Two-qubit state after tracing out the bath, in the product basis.
    pub fn reduced_matrix(&self, initial: &XState, t: f64) -> Matrix4<C> {
        let u = self.ground_propagator_columns(t);
        let local = xstate_to_product(initial);
        // ψ columns: rows are (bath, qubit) pairs
        let evolved = &u * DMatrix::from_fn(4, 4, |i, j| local[(i, j)]) * u.adjoint();
        let mut reduced = Matrix4::<C>::zeros();
        for k in 0..=self.params.n_spins {
            for q in 0..4 {
                for r in 0..4 {
                    reduced[(q, r)] += evolved[(4 * k + q, 4 * k + r)];
                }
            }
        }
        reduced
    }

    pub fn evolve(&self, initial: &XState, t: f64) -> XState {
        product_to_xstate(&self.reduced_matrix(initial, t))
    }
}

/// Reduced two-qubit state from dense evolution of `|G⟩⟨G| ⊗ initial`.
pub fn dense_evolve(params: &ModelParams, initial: &XState, t: f64) -> Result<XState> {
    Ok(DenseEvolver::new(params)?.evolve(initial, t))
}

/// Projective measurement on qubit b along
/// `|1⟩ = cos θ |↑⟩ + e^{iφ} sin θ |↓⟩`, `|2⟩ = e^{-iφ} sin θ |↑⟩ - cos θ |↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementAngles {
    /// In `[0, π/2]`.
    pub theta: f64,
    /// In `[0, 2π)`.
    pub phi: f64,
}

impl MeasurementAngles {
    fn outcomes(&self) -> [[C; 2]; 2] {
        let (s, co) = self.theta.sin_cos();
        [
            [c(co), C::from_polar(s, self.phi)],
            [C::from_polar(s, -self.phi), c(-co)],
        ]
    }
}

fn hermitian2_eigenvalues(m: &Matrix2<C>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let r = (0.25 * (a - d) * (a - d) + m[(0, 1)].norm_sqr()).sqrt();
    [0.5 * (a + d) - r, 0.5 * (a + d) + r]
}

fn shannon(ps: &[f64]) -> f64 {
    ps.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn von_neumann2(m: &Matrix2<C>) -> f64 {
    shannon(&hermitian2_eigenvalues(m))
}

fn von_neumann4(m: &Matrix4<C>) -> f64 {
    let ev = SymmetricEigen::new(*m).eigenvalues;
    shannon(ev.as_slice())
}

/// `(ρ_a, ρ_b)` of a product-basis two-qubit matrix.
pub fn marginals(rho: &Matrix4<C>) -> (Matrix2<C>, Matrix2<C>) {
    let mut ra = Matrix2::<C>::zeros();
    let mut rb = Matrix2::<C>::zeros();
    for sa in 0..2 {
        for ta in 0..2 {
            for sb in 0..2 {
                ra[(sa, ta)] += rho[(2 * sa + sb, 2 * ta + sb)];
            }
        }
    }
    for sb in 0..2 {
        for tb in 0..2 {
            for sa in 0..2 {
                rb[(sb, tb)] += rho[(2 * sa + sb, 2 * sa + tb)];
            }
        }
    }
    (ra, rb)
}

/// `Σ_i p_i S(ρ_a^(i))` after measuring qubit b.
pub fn conditional_entropy(rho: &Matrix4<C>, angles: MeasurementAngles) -> f64 {
    let mut total = 0.0;
    for v in angles.outcomes() {
        let mut post = Matrix2::<C>::zeros();
        for sa in 0..2 {
            for ta in 0..2 {
                let mut acc = C::new(0.0, 0.0);
                for sb in 0..2 {
                    for tb in 0..2 {
                        acc += v[sb].conj() * rho[(2 * sa + sb, 2 * ta + tb)] * v[tb];
                    }
                }
                post[(sa, ta)] = acc;
            }
        }
        let p = post[(0, 0)].re + post[(1, 1)].re;
        if p > 1e-300 {
            total += p * von_neumann2(&(post / c(p)));
        }
    }
    total
}

/// Outcome of the measurement search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordSearch {
    pub discord: f64,
    /// Best value on the coarse lattice, before refinement.
    pub coarse_discord: f64,
    pub mutual_info: f64,
    pub classical: f64,
    pub angles: MeasurementAngles,
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Discord by explicit optimisation of the measurement on qubit b.
///
/// Scans `θ ∈ [0, π/2]` (endpoints included) and `φ ∈ [0, 2π)` on a
/// `coarse_grid x coarse_grid` lattice, keeps the lexicographically first
/// minimiser of the conditional entropy, then runs `refine_iters` rounds of
/// alternating golden-section line searches in a box that halves whenever a
/// round brings no improvement.
pub fn discord_search(state: &XState, coarse_grid: usize, refine_iters: usize) -> Result<DiscordSearch> {
    if coarse_grid < 64 {
        return Err(Error::InvalidParameter(format!(
            "coarse grid must have at least 64 points per axis, got {coarse_grid}"
        )));
    }
    let rho = xstate_matrix_in_product_basis(state);
    let (ra, rb) = marginals(&rho);
    let s_a = von_neumann2(&ra);
    let s_b = von_neumann2(&rb);
    let s_ab = von_neumann4(&rho);
    let mutual_info = s_a + s_b - s_ab;

    let cond = |theta: f64, phi: f64| conditional_entropy(&rho, MeasurementAngles { theta, phi });
    let d_theta = FRAC_PI_2 / (coarse_grid - 1) as f64;
    let d_phi = TAU / coarse_grid as f64;
    let mut best = MeasurementAngles { theta: 0.0, phi: 0.0 };
    let mut best_value = f64::INFINITY;
    for i in 0..coarse_grid {
        let theta = i as f64 * d_theta;
        for j in 0..coarse_grid {
            let phi = j as f64 * d_phi;
            let v = cond(theta, phi);
            if v < best_value {
                best_value = v;
                best = MeasurementAngles { theta, phi };
            }
        }
    }
    let coarse_value = best_value;

    let (mut h_theta, mut h_phi) = (d_theta, d_phi);
    for _ in 0..refine_iters {
        let mut improved = false;
        let lo = (best.theta - h_theta).max(0.0);
        let hi = (best.theta + h_theta).min(FRAC_PI_2);
        let (theta, v) = golden_section(|x| cond(x, best.phi), lo, hi, 60);
        if v < best_value {
            best_value = v;
            best.theta = theta;
            improved = true;
        }
        let (phi, v) = golden_section(|x| cond(best.theta, x), best.phi - h_phi, best.phi + h_phi, 60);
        if v < best_value {
            best_value = v;
            best.phi = phi.rem_euclid(TAU);
            improved = true;
        }
        if !improved {
            h_theta *= 0.5;
            h_phi *= 0.5;
        }
    }

    // Discord = I - C with C = S(ρ_a) - min conditional entropy.
    let classical = s_a - best_value;
    Ok(DiscordSearch {
        discord: mutual_info - classical,
        coarse_discord: mutual_info - (s_a - coarse_value),
        mutual_info,
        classical,
        angles: best,
    })
}

/// Discord from [`discord_search`].
pub fn discord_bruteforce(state: &XState, coarse_grid: usize, refine_iters: usize) -> Result<f64> {
    discord_search(state, coarse_grid, refine_iters).map(|s| s.discord)
}

/// Angle of the equatorial measurement (`θ = π/4`); exposed for debugging.
pub fn equatorial(phi: f64) -> MeasurementAngles {
    MeasurementAngles {
        theta: PI / 4.0,
        phi,
    }
}
