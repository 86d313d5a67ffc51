//! Symmetric matrices, the SPD manifold, and the value-space abstraction
//! shared by scalar and manifold-valued code paths.

mod space;
mod spd;
mod sym;

pub use space::{ScalarLine, SpdManifold, ValueSpace};
pub use spd::{
    exp_whitened, karcher_mean, log_whitened, mat_exp_sym, mat_log_spd, normalized_weights,
    spd_dist, spd_exp, spd_log, KarcherMean, Spd3, SpdPoint, KARCHER_MAX_ITERATIONS,
    KARCHER_TOLERANCE, SPD_MIN_EIGENVALUE,
};
pub use sym::{sym_eig, Sym3, SymEigen, SymMatrix};
