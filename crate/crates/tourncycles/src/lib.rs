//! Exact machinery for the interplay of 3-cycle and 4-cycle densities in
//! tournaments.
//!
//! The crate provides:
//!
//! - exact tournaments with packed-bit adjacency and the TRN text format
//!   ([`tournament`], [`trn`]);
//! - real tournament matrices `A` with `A + A^T = J` ([`matrix`]);
//! - seeded generators for the constructions of interest: transitive,
//!   uniform, blow-ups, the circular family, potential families, matrix
//!   samples and the mixed multi-part family ([`generators`]);
//! - exact cycle counts `Tr M^l`, transitive-subtournament densities,
//!   the trace densities `sigma_l = Tr(A^l)/n^l` and an exhaustive
//!   enumeration of all small tournaments ([`count`]);
//! - the skew-symmetric block decomposition of `B = J - 2A`, its
//!   `(lambda_i, alpha_i)` profile, normalized eigenvalue spectra and the
//!   potential-family membership test ([`spectral`]);
//! - the lower-bound curve `g`, its regime parametrization and the two
//!   envelope formulas ([`bounds`]);
//! - a structured solver for the moment-constrained spectrum
//!   optimization problem, with a numerical cross-check ([`spectrum`]);
//! - verification suites aggregating all of the above ([`verify`]).
//!
//! Heavy kernels are data-parallel via rayon behind the default
//! `parallel` feature; disabling it leaves the same API with sequential
//! fallbacks. Outputs are bit-identical either way.

pub mod bounds;
pub mod count;
pub mod error;
pub mod generators;
pub mod matrix;
pub mod rng;
pub mod spectral;
pub mod spectrum;
pub mod tournament;
pub mod trn;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::TournamentMatrix;
pub use rng::Seed;
pub use tournament::Tournament;

/// Caps the global worker pool. Call once, before any parallel work.
/// Without the `parallel` feature this is a no-op.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::numerical(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}
