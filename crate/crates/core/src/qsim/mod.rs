//! Qudit simulation: dense state vectors and density matrices for the
//! unit-level checks, and a factorized sparse state for protocol runs.

mod density;
mod pauli;
mod sparse;
mod state;

use core::sync::atomic::{AtomicU64, Ordering};

pub use density::DensityMatrix;
pub use pauli::{pauli_decompose, PauliLabel};
pub use sparse::{SparseState, WireId};
pub use state::{fourier_matrix, Measurement, PureState};

pub(crate) use state::{index_to_digits, sample_index};

use crate::error::{Error, Result};

/// Default ceiling on the number of dense amplitudes (and sparse terms).
pub const DEFAULT_AMPLITUDE_CEILING: u64 = 1 << 24;

static CEILING: AtomicU64 = AtomicU64::new(DEFAULT_AMPLITUDE_CEILING);

pub fn amplitude_ceiling() -> u128 {
    CEILING.load(Ordering::Relaxed) as u128
}

/// Process-wide override of the amplitude ceiling.
pub fn set_amplitude_ceiling(limit: u64) {
    CEILING.store(limit.max(1), Ordering::Relaxed);
}

/// Amplitude count `q^n`, or an error above the configured ceiling.
pub fn check_size(q: u32, n: usize) -> Result<usize> {
    if q < 2 {
        return Err(Error::Parameter(alloc::format!("qudit dimension {q}")));
    }
    let limit = amplitude_ceiling();
    let mut amps: u128 = 1;
    for _ in 0..n {
        amps = amps.saturating_mul(q as u128);
        if amps > limit {
            return Err(Error::TooLarge { amps: (q as u128).saturating_pow(n as u32), limit });
        }
    }
    Ok(amps as usize)
}
