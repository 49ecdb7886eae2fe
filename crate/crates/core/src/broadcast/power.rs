use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{apply_channel, BroadcastError, ChoiMatrix};
use crate::qmat::random::{haar_pure_state, random_mixed_state};
use crate::qmat::{fidelity_eigen, DensityMatrix};

/// Sampled estimate of the worst-case broadcast fidelity of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerEstimate {
    /// Minimum over all evaluated states, an upper bound on the power.
    pub value: f64,
    /// Fidelity at the maximally entangled state.
    pub phi_value: f64,
    /// Fidelities of the random samples in generation order.
    pub samples: Vec<f64>,
}

/// Fidelity between `rho` on `(A, B)` and the `(A_1, B)` marginal after
/// broadcasting `A`.
pub(crate) fn broadcast_fidelity(
    marginal: &ChoiMatrix,
    rho: &DensityMatrix,
) -> Result<f64, BroadcastError> {
    let out = apply_channel(marginal, rho)?;
    Ok(fidelity_eigen(rho, &out)?)
}

/// Average over recipients `j` of `F(rho, (Lambda_j (x) id) rho)` for a
/// fixed channel `Lambda`, not necessarily symmetric.
pub fn channel_broadcast_fidelity(
    j: &ChoiMatrix,
    rho: &DensityMatrix,
) -> Result<f64, BroadcastError> {
    let n = j.copies();
    let mut total = 0.0;
    for k in 0..n {
        total += broadcast_fidelity(&j.marginal(k)?, rho)?;
    }
    Ok(total / n as f64)
}

/// Minimum of the single-recipient broadcast fidelity over the maximally
/// entangled state and `samples` random states on `C^d (x) C^d`, with
/// `d` the channel's input dimension. Even-numbered samples are Haar
/// random pure states; odd-numbered ones are reduced states of Haar random
/// pure states with environment dimension cycling through `2..=d^2`.
pub fn broadcasting_power_sampled(
    j: &ChoiMatrix,
    samples: usize,
    seed: u64,
) -> Result<PowerEstimate, BroadcastError> {
    if samples == 0 {
        return Err(BroadcastError::Dimension(
            "at least one sample is needed".into(),
        ));
    }
    if j.copies() < 2 {
        return Err(BroadcastError::CopyCount(j.copies()));
    }
    j.require_symmetric()?;
    let d = j.in_dim();
    let marginal = j.marginal(0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<DensityMatrix> = (0..samples)
        .map(|k| {
            if k % 2 == 0 {
                haar_pure_state(&[d, d], &mut rng)
            } else {
                let env = 2 + (k / 2) % (d * d - 1);
                random_mixed_state(&[d, d], env, &mut rng)
            }
        })
        .collect();
    let values = states
        .par_iter()
        .map(|rho| broadcast_fidelity(&marginal, rho))
        .collect::<Result<Vec<f64>, _>>()?;
    let phi_value = broadcast_fidelity(&marginal, &DensityMatrix::maximally_entangled(d))?;
    let value = values.iter().copied().fold(phi_value, f64::min);
    Ok(PowerEstimate {
        value,
        phi_value,
        samples: values,
    })
}
