//! Fixed-particle-number statevector simulation of the ladder model and the protocol.

mod basis;
mod hamiltonian;
mod lanczos;
mod protocol;

use std::sync::Arc;

pub use basis::{FockBasis, FockState, DEFAULT_HILBERT_CAP};
pub use hamiltonian::{build_hamiltonian, Hamiltonian, LadderModel};
pub use lanczos::{lowest_eigenpair, GroundState, LanczosOptions};
pub use protocol::{
    collect_shadow, measure, row_rng, run_protocol, sample_pairing, Pairing, ShadowSample,
};

use crate::error::Result;
use crate::opstrings::OperatorString;
use crate::C64;

/// Ground state of a ladder model and its energy.
pub fn ground_state(model: &LadderModel, opts: &LanczosOptions) -> Result<(f64, FockState)> {
    let basis = Arc::new(model.basis()?);
    let h = build_hamiltonian(model, Arc::clone(&basis))?;
    let gs = lowest_eigenpair(&h, opts)?;
    let amps = gs.vector.iter().map(|x| C64::new(*x, 0.0)).collect();
    Ok((gs.energy, FockState::new(basis, amps)?))
}

/// `⟨ψ|S|ψ⟩` for a number-conserving string.
pub fn exact_expectation(state: &FockState, s: &OperatorString) -> Result<C64> {
    state.expectation(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opstrings::Letter;

    #[test]
    fn single_rung_ground_state() {
        let model = LadderModel::new(1, 1.0, 0.0).with_filling(1, 2);
        let (e, psi) = ground_state(&model, &LanczosOptions::default()).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for a in psi.amplitudes() {
            assert!((a.re - s).abs() < 1e-10);
        }
    }

    #[test]
    fn strong_attraction_binds_pairs() {
        let model = LadderModel::new(2, 1.0, 200.0).with_filling(1, 2);
        let (_, psi) = ground_state(&model, &LanczosOptions::default()).unwrap();
        let mut total = 0.0;
        for r in 0..2 {
            let s = OperatorString::new(4, [(model.site_a(r), Letter::Z), (model.site_b(r), Letter::Z)]).unwrap();
            // n_a n_b = (1 - Z_a - Z_b + Z_a Z_b)/4
            let za = psi.expectation(&OperatorString::new(4, [(model.site_a(r), Letter::Z)]).unwrap()).unwrap().re;
            let zb = psi.expectation(&OperatorString::new(4, [(model.site_b(r), Letter::Z)]).unwrap()).unwrap().re;
            let zz = psi.expectation(&s).unwrap().re;
            let nn = (1.0 - za - zb + zz) / 4.0;
            assert!((nn - 0.5).abs() < 1e-3);
            total += nn;
        }
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn energy_variance_vanishes() {
        let model = LadderModel::new(6, 1.0, 0.5);
        let basis = Arc::new(model.basis().unwrap());
        let h = build_hamiltonian(&model, Arc::clone(&basis)).unwrap();
        let opts = LanczosOptions::default();
        let gs = lowest_eigenpair(&h, &opts).unwrap();
        let mut hx = vec![0.0; h.dim()];
        h.apply(&gs.vector, &mut hx);
        let e: f64 = hx.iter().zip(&gs.vector).map(|(a, b)| a * b).sum();
        let e2: f64 = hx.iter().map(|a| a * a).sum();
        assert!(e2 - e * e < 10.0 * opts.tol);
    }

    #[test]
    fn ground_state_is_translation_invariant() {
        let model = LadderModel::new(8, 1.0, 0.5);
        let (_, psi) = ground_state(&model, &LanczosOptions::default()).unwrap();
        let v = model.volume();
        for r in 1..4 {
            let values: Vec<C64> = (0..model.rungs)
                .map(|i| {
                    let s = OperatorString::new(
                        v,
                        [(model.site_a(i), Letter::Raise), (model.site_a(i + r), Letter::Lower)],
                    )
                    .unwrap();
                    psi.expectation(&s).unwrap()
                })
                .collect();
            for x in &values {
                assert!((x - values[0]).norm() < 1e-8, "r={r}: {x} vs {}", values[0]);
            }
        }
    }
}
