//! Entropies, quantum discord, concurrence and entanglement of formation of
//! X states. All logarithms are base 2.

use crate::error::{Error, Result};
use crate::model::XState;

/// Eigenvalues in `[-DUST, 0)` are treated as roundoff and clamped to zero.
pub const DUST: f64 = 1e-10;

const NORMALISATION_TOLERANCE: f64 = 1e-9;

/// Correlation measures of one reduced state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRecord {
    pub time: f64,
    pub discord: f64,
    pub classical: f64,
    pub mutual_info: f64,
    pub concurrence: f64,
    pub eof: f64,
    pub purity: f64,
}

/// Mutual information split into its quantum and classical parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discord {
    pub discord: f64,
    pub classical: f64,
    pub mutual_info: f64,
    /// Candidate after a `σz` measurement on one qubit.
    pub d1: f64,
    /// Candidate after the best equatorial measurement.
    pub d2: f64,
}

/// `x log₂ x` with `0 log 0 = 0`.
fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `x log₂(x / total)` with the `0 log 0 = 0` convention.
fn xlog2_ratio(x: f64, total: f64) -> f64 {
    if x > 0.0 && total > 0.0 {
        x * (x / total).log2()
    } else {
        0.0
    }
}

fn clamp_dust(p: f64) -> Result<f64> {
    if p.is_nan() || p < -DUST {
        return Err(Error::InvalidDistribution(format!(
            "probability {p} is below the roundoff tolerance"
        )));
    }
    Ok(p.max(0.0))
}

/// Shannon entropy `-Σ p log₂ p` of a probability vector; also the von Neumann
/// entropy when given a spectrum.
pub fn entropy(probabilities: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    let mut h = 0.0;
    for &p in probabilities {
        let p = clamp_dust(p)?;
        sum += p;
        h -= xlog2x(p);
    }
    if (sum - 1.0).abs() > NORMALISATION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(h)
}

fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Closed-form discord of an X state with equal single-qubit marginals:
/// the smaller of the `σz`-measurement candidate `D1` and the equatorial
/// candidate `D2`,
///
/// ```text
/// D1 = S(ρa) - S(ρ) - A log(A/(A+B)) - B log(B/(A+B)) - C log(C/(B+C)) - B log(B/(B+C))
/// D2 = S(ρa) - S(ρ) + H((1+Θ)/2),   Θ = √((A-C)² + 4(|Y|+|Z|)²)
/// ```
pub fn discord_xstate(state: &XState) -> Result<Discord> {
    let (a, b, c) = (
        clamp_dust(state.a)?,
        clamp_dust(state.b)?,
        clamp_dust(state.c)?,
    );
    let marginal = entropy(&state.marginal().map(|p| p.max(0.0)))?;
    let joint = entropy(&state.eigenvalues())?;
    let mutual_info = 2.0 * marginal - joint;

    let cond_z = -xlog2_ratio(a, a + b) - xlog2_ratio(b, a + b) - xlog2_ratio(c, b + c) - xlog2_ratio(b, b + c);
    let theta = ((a - c).powi(2) + 4.0 * (state.y.abs() + state.z.norm()).powi(2))
        .sqrt()
        .min(1.0);
    let cond_x = binary_entropy(0.5 * (1.0 + theta));

    let d1 = marginal - joint + cond_z;
    let d2 = marginal - joint + cond_x;
    let discord = d1.min(d2);
    Ok(Discord {
        discord,
        classical: mutual_info - discord,
        mutual_info,
        d1,
        d2,
    })
}

/// Wootters concurrence of an X state, `2 max{0, |Y| - √(AC), |Z| - B}`,
/// clamped to `[0, 1]`.
pub fn concurrence(state: &XState) -> f64 {
    let inner = state.y.abs() - (state.a * state.c).max(0.0).sqrt();
    let outer = state.z.norm() - state.b;
    (2.0 * inner.max(outer).max(0.0)).min(1.0)
}

/// Entanglement of formation `H(Λ)`, `Λ = (1 + √(1-ζ²))/2`.
pub fn eof_from_concurrence(zeta: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&zeta) {
        return Err(Error::InvalidParameter(format!(
            "concurrence must lie in [0, 1], got {zeta}"
        )));
    }
    let zeta = zeta.clamp(0.0, 1.0);
    if zeta == 0.0 {
        return Ok(0.0);
    }
    let lambda = 0.5 * (1.0 + (1.0 - zeta * zeta).sqrt());
    Ok(binary_entropy(lambda))
}

/// All correlation measures of `state`, stamped with `t`.
pub fn evaluate(state: &XState, t: f64) -> Result<CorrelationRecord> {
    let Discord {
        discord,
        classical,
        mutual_info,
        ..
    } = discord_xstate(state)?;
    let zeta = concurrence(state);
    Ok(CorrelationRecord {
        time: t,
        discord,
        classical,
        mutual_info,
        concurrence: zeta,
        eof: eof_from_concurrence(zeta)?,
        purity: state.purity(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::initial_xstate;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn bell() -> XState {
        initial_xstate(1.0, -1.0, 1.0).unwrap()
    }

    fn mixed() -> XState {
        initial_xstate(1.0, -0.2, 0.2).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&[0.25; 4]).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entropy(&[0.6, 0.4]).unwrap(), 0.970951, epsilon = 1e-6);
        assert_abs_diff_eq!(entropy(&[1.0, -1e-11]).unwrap(), 0.0);
        assert!(matches!(entropy(&[1.0, -1e-6]), Err(Error::InvalidDistribution(_))));
        assert!(entropy(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn discord_examples() {
        let d = discord_xstate(&bell()).unwrap();
        assert_abs_diff_eq!(d.discord, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.classical, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.mutual_info, 2.0, epsilon = 1e-12);

        let d = discord_xstate(&XState::maximally_mixed()).unwrap();
        assert_abs_diff_eq!(d.discord, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.classical, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mutual_info, 0.0, epsilon = 1e-15);

        // Bell-diagonal state with correlations (1, -0.2, 0.2): classical
        // correlation is that of a binary symmetric channel with max|k| = 1.
        let d = discord_xstate(&mixed()).unwrap();
        assert_abs_diff_eq!(d.discord, 0.029049405545331, epsilon = 1e-10);
        assert_abs_diff_eq!(d.classical, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.mutual_info, 1.029049405545331, epsilon = 1e-10);
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(concurrence(&bell()), 1.0, epsilon = 1e-15);
        assert_eq!(concurrence(&XState::maximally_mixed()), 0.0);
        assert_abs_diff_eq!(concurrence(&mixed()), 0.2, epsilon = 1e-15);
        // singlet: the inner block carries negative Y
        let singlet = initial_xstate(-1.0, -1.0, -1.0).unwrap();
        assert!(singlet.y < 0.0);
        assert_abs_diff_eq!(concurrence(&singlet), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eof_examples() {
        assert_eq!(eof_from_concurrence(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(eof_from_concurrence(1.0).unwrap(), 1.0, epsilon = 1e-15);
        // Λ = 0.98990, H(Λ) evaluated independently
        assert_abs_diff_eq!(eof_from_concurrence(0.2).unwrap(), 0.08146891501435435, epsilon = 1e-12);
        assert!(eof_from_concurrence(1.1).is_err());
        assert!(eof_from_concurrence(-0.1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let r = evaluate(&bell(), 0.0).unwrap();
        assert_abs_diff_eq!(r.discord, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eof, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.concurrence, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.purity, 1.0, epsilon = 1e-12);

        let r = evaluate(&mixed(), 2.5).unwrap();
        assert_eq!(r.time, 2.5);
        assert_abs_diff_eq!(r.discord, 0.0290, epsilon = 1e-4);
        assert_abs_diff_eq!(r.eof, 0.0815, epsilon = 1e-4);
        assert_abs_diff_eq!(r.concurrence, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.purity, 0.52, epsilon = 1e-12);
    }

    #[test]
    fn eof_is_monotone_on_grid() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let e = eof_from_concurrence(i as f64 / 1000.0).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn marginal_matches_partial_trace() {
        let s = XState {
            a: 0.4,
            b: 0.1,
            c: 0.4,
            y: 0.05,
            z: Complex64::new(0.1, 0.2),
        };
        // basis order ↑↑, ↓↓, ↑↓, ↓↑: qubit a is up in entries 0 and 2
        let m = s.to_matrix();
        let up_a = m[0][0].re + m[2][2].re;
        let down_a = m[1][1].re + m[3][3].re;
        let up_b = m[0][0].re + m[3][3].re;
        assert_abs_diff_eq!(s.marginal()[0], up_a, epsilon = 1e-15);
        assert_abs_diff_eq!(s.marginal()[1], down_a, epsilon = 1e-15);
        assert_abs_diff_eq!(s.marginal()[0], up_b, epsilon = 1e-15);
    }

    /// Random X state satisfying trace and positivity.
    pub(crate) fn arb_xstate() -> impl Strategy<Value = XState> {
        (
            proptest::array::uniform3(0.0f64..1.0),
            -1.0f64..1.0,
            0.0f64..1.0,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_filter_map("degenerate weights", |(w, ys, zs, phase)| {
                let total = w[0] + 2.0 * w[1] + w[2];
                if total < 1e-6 {
                    return None;
                }
                let (a, b, c) = (w[0] / total, w[1] / total, w[2] / total);
                Some(XState {
                    a,
                    b,
                    c,
                    y: ys * b,
                    z: Complex64::from_polar(zs * (a * c).sqrt(), phase),
                })
            })
    }

    proptest! {
        #[test]
        fn record_invariants(s in arb_xstate()) {
            let r = evaluate(&s, 0.0).unwrap();
            prop_assert!((r.discord + r.classical - r.mutual_info).abs() < 1e-9);
            prop_assert!(r.discord >= -1e-9);
            prop_assert!(r.classical >= -1e-9);
            prop_assert!(r.discord <= r.mutual_info + 1e-9);
            prop_assert!((0.0..=1.0).contains(&r.eof));
            if r.concurrence == 0.0 {
                prop_assert_eq!(r.eof, 0.0);
            }
        }

        #[test]
        fn concurrence_matches_displayed_formula_for_nonnegative_y(s in arb_xstate()) {
            let literal = (2.0 * (s.y - (s.a * s.c).sqrt()).max(s.z.norm() - s.b).max(0.0)).min(1.0);
            if s.y >= 0.0 {
                prop_assert_eq!(concurrence(&s), literal);
            }
        }

        #[test]
        fn pure_states_have_discord_equal_to_eof(theta in 0.0f64..std::f64::consts::FRAC_PI_2, phi in 0.0f64..std::f64::consts::TAU) {
            let (s, c) = theta.sin_cos();
            let state = XState {
                a: c * c,
                b: 0.0,
                c: s * s,
                y: 0.0,
                z: Complex64::from_polar(c * s, -phi),
            };
            prop_assert!((state.purity() - 1.0).abs() < 1e-9);
            let r = evaluate(&state, 0.0).unwrap();
            let local = entropy(&state.marginal()).unwrap();
            prop_assert!((r.discord - local).abs() < 1e-8);
            prop_assert!((r.eof - local).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_inner_block_states() {
        for y in [0.5, -0.5] {
            let state = XState {
                a: 0.0,
                b: 0.5,
                c: 0.0,
                y,
                z: Complex64::new(0.0, 0.0),
            };
            let r = evaluate(&state, 0.0).unwrap();
            assert_abs_diff_eq!(r.purity, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(r.discord, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.eof, 1.0, epsilon = 1e-12);
        }
    }
}
