//! Diagonalization of Hamiltonian blocks and the per-subspace propagator
//! `U_M(t) = exp(-i H_M t)`.

use num_complex::Complex64;

use crate::model::HamiltonianBlock;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Spectral decomposition of a Hamiltonian block.
///
/// `vectors[i][j]` is component `i` of eigenvector `j`, i.e. the columns are
/// `(p_j, q_j, r_j)`. Only the leading `dim x dim` part is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEigensystem {
    pub m_index: i64,
    pub dim: usize,
    /// Ascending.
    pub energies: [f64; 3],
    pub vectors: [[f64; 3]; 3],
}

impl BlockEigensystem {
    /// `V diag(E) Vᵀ`.
    pub fn reconstruct(&self) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for (i, row) in h.iter_mut().enumerate().take(self.dim) {
            for (k, entry) in row.iter_mut().enumerate().take(self.dim) {
                *entry = (0..self.dim)
                    .map(|j| self.vectors[i][j] * self.energies[j] * self.vectors[k][j])
                    .sum();
            }
        }
        h
    }

    /// `max |VᵀV - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            for l in 0..self.dim {
                let dot: f64 = (0..self.dim)
                    .map(|i| self.vectors[i][j] * self.vectors[i][l])
                    .sum();
                let target = if j == l { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Diagonalizes a block with a method that stays valid under degeneracy:
/// trivially for 1x1, in closed form for 2x2, and by cyclic Jacobi rotations
/// for 3x3.
///
/// Eigenvectors are normalised so that their largest-magnitude component
/// (first one on ties) is positive.
pub fn eigensystem(block: &HamiltonianBlock) -> BlockEigensystem {
    let h = block.matrix();
    let (energies, vectors) = match block.dim {
        1 => ([h[0][0], 0.0, 0.0], identity3()),
        2 => eigen_2x2(h[0][0], h[1][1], h[0][1]),
        _ => jacobi_3x3(h),
    };
    let mut eig = BlockEigensystem {
        m_index: block.m_index,
        dim: block.dim,
        energies,
        vectors,
    };
    sort_and_fix_signs(&mut eig);
    eig
}

fn identity3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn eigen_2x2(a: f64, b: f64, off: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let mean = 0.5 * (a + b);
    let half_diff = 0.5 * (a - b);
    let radius = half_diff.hypot(off);
    // Rotation angle that zeroes the off-diagonal element.
    let theta = 0.5 * (2.0 * off).atan2(a - b);
    let (s, c) = theta.sin_cos();
    // (c, s) belongs to mean + radius, (-s, c) to mean - radius.
    let energies = [mean - radius, mean + radius, 0.0];
    let vectors = [[-s, c, 0.0], [c, s, 0.0], [0.0, 0.0, 1.0]];
    (energies, vectors)
}

fn jacobi_3x3(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = identity3();
    let scale = a.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return ([0.0; 3], v);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off.sqrt() <= f64::EPSILON * scale * 1e-3 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A <- Jᵀ A J
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

fn sort_and_fix_signs(eig: &mut BlockEigensystem) {
    let dim = eig.dim;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.energies[i].total_cmp(&eig.energies[j]));
    let mut energies = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (new, &old) in order.iter().enumerate() {
        energies[new] = eig.energies[old];
        let mut pivot = 0;
        for i in 1..dim {
            if eig.vectors[i][old].abs() > eig.vectors[pivot][old].abs() {
                pivot = i;
            }
        }
        let sign = if eig.vectors[pivot][old] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim {
            vectors[i][new] = sign * eig.vectors[i][old];
        }
    }
    eig.energies = energies;
    eig.vectors = vectors;
}

/// Closed-form eigenvectors `(p_j, q_j, r_j)` of a 3x3 block for given
/// eigenvalues `E_j`:
///
/// ```text
/// p = ξ(E-γ)/n,  q = (E-α)(E-γ)/n,  r = κ(E-α)/n
/// n² = (E-α)²(E-γ)² + (E-γ)²ξ² + (E-α)²κ²
/// ```
///
/// Returns `None` for blocks that are not 3x3, when two eigenvalues are closer
/// than `1e-8 · max|H|`, or when a normalisation vanishes. Signs follow the
/// same convention as [`eigensystem`].
pub fn analytic_eigenvectors(
    block: &HamiltonianBlock,
    energies: &[f64; 3],
) -> Option<[[f64; 3]; 3]> {
    if block.dim != 3 {
        return None;
    }
    let scale = block.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..3 {
        for j in i + 1..3 {
            if (energies[i] - energies[j]).abs() < 1e-8 * scale {
                return None;
            }
        }
    }
    let (alpha, gamma, xi, kappa) = (block.alpha, block.gamma, block.xi, block.kappa);
    let mut vectors = [[0.0; 3]; 3];
    for (j, &e) in energies.iter().enumerate() {
        let da = e - alpha;
        let dg = e - gamma;
        let norm = (da * da * dg * dg + dg * dg * xi * xi + da * da * kappa * kappa).sqrt();
        if norm <= 1e-10 * scale * scale {
            return None;
        }
        let col = [xi * dg / norm, da * dg / norm, kappa * da / norm];
        let pivot = (0..3)
            .reduce(|best, i| if col[i].abs() > col[best].abs() { i } else { best })
            .unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..3 {
            vectors[i][j] = sign * col[i];
        }
    }
    Some(vectors)
}

/// `U_M(t)` restricted to one invariant subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPropagator {
    pub m_index: i64,
    pub dim: usize,
    pub time: f64,
    pub entries: [[Complex64; 3]; 3],
}

impl BlockPropagator {
    /// Matrix element `U_{ij}` (zero-based); zero outside the subspace.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        if i < self.dim && j < self.dim {
            self.entries[i][j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `|U_{ij}|²`, zero outside the subspace.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.element(i, j).norm_sqr()
    }

    /// `max |U U† - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for k in 0..self.dim {
                let prod: Complex64 = (0..self.dim)
                    .map(|j| self.entries[i][j] * self.entries[k][j].conj())
                    .sum();
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((prod - target).norm());
            }
        }
        worst
    }
}

/// `U(t) = Σ_j v^(j) v^(j)ᵀ e^{-i E_j t}`.
pub fn block_propagator(eig: &BlockEigensystem, t: f64) -> BlockPropagator {
    let phases: Vec<Complex64> = (0..eig.dim)
        .map(|j| scalar_phase(eig.energies[j], t))
        .collect();
    let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..eig.dim {
        for k in i..eig.dim {
            let u: Complex64 = (0..eig.dim)
                .map(|j| phases[j] * (eig.vectors[i][j] * eig.vectors[k][j]))
                .sum();
            entries[i][k] = u;
            entries[k][i] = u;
        }
    }
    BlockPropagator {
        m_index: eig.m_index,
        dim: eig.dim,
        time: t,
        entries,
    }
}

/// `e^{-iEt}`.
pub fn scalar_phase(energy: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -energy * t)
}
