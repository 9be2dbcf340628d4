use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The loop response diverges for one conditional qubit state: the
    /// round-trip interference is constructive and the steady-state
    /// amplitudes have no finite limit.
    #[error(
        "singular loop response for qubit state |{i1}{i2}>: \
         |1 - r3 P F1 F2 sqrt(eta3)| = {denom:.3e}"
    )]
    SingularLoop { i1: u8, i2: u8, denom: f64 },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    /// Both conditional output amplitudes coincide with the odd-subspace
    /// amplitude; the integrated photocurrent carries no parity information.
    #[error("degenerate measurement: conditional output amplitudes are indistinguishable")]
    DegenerateMeasurement,

    /// The two odd-parity states produce different measured quadratures, so
    /// homodyne detection itself would decohere the odd subspace.
    #[error(
        "odd-subspace asymmetry: |Im(beta10) - Im(beta01)| = {0:.3e} exceeds tolerance"
    )]
    AsymmetricOddSubspace(f64),

    #[error(
        "no loop reflectivity satisfies the interference constraint \
         (required margin {margin:.3e})"
    )]
    EmptyFeasibleInterval { margin: f64 },

    #[error(
        "Fock-space tail population {tail:.3e} exceeds {limit:.1e} at cutoff {cutoff}"
    )]
    FockCutoffExceeded { tail: f64, cutoff: usize, limit: f64 },

    #[error("integration invariant breached: {0}")]
    IntegrationInvariant(String),

    /// Two identical coherent amplitudes cannot be discriminated.
    #[error("cannot discriminate identical field amplitudes")]
    ZeroSeparation,
}

pub type Result<T> = std::result::Result<T, Error>;
