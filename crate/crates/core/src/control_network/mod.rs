//! Optimization over network structure.

mod admin;
mod structure;

pub use admin::{
    admin_adjust, admin_feasibility_gap, admin_loop, AdminConfig, AdminRound, AdminTrace,
    ADMIN_CONVERGENCE,
};
pub use structure::{
    minimize_acr, minimize_pdi_over_laplacian, pdi_laplacian_stationarity, StructureBudget,
    StructureSolution, DENSITY_CUTOFF,
};
