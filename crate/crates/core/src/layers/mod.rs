//! Network layers on cell-major activations `[batch, cells, channels]`.
//!
//! Square and hexagonal layers share one implementation: convolutions run
//! over a [`Stencil`] (3x3 or 7-tap), pooling over a [`Grouping`] (2x2
//! windows or a hexagonal [`PoolMapping`]).

mod assignment;
mod conv;
mod dense;
mod norm;
mod pool;

pub use assignment::solve_assignment;
pub use conv::{stencil_conv, stencil_conv_transpose, Conv, Stencil};
pub use dense::Dense;
pub use norm::{batch_norm_eval, batch_norm_train, BatchNorm, BN_EPSILON, BN_MOMENTUM};
pub use pool::{
    avg_pool, build_pool_mapping, build_pool_mapping_for, max_pool, unpool_replicate, unpool_where,
    Grouping, PoolMapping, WhereMask,
};
