//! Networks, initialization, optimizer and checkpoints.

mod adam;
mod checkpoint;
pub mod init;
mod mlp;
mod params;

pub use adam::{clip_global_norm, global_norm, Adam, AdamConfig};
pub use checkpoint::{body_hash, Checkpoint, CheckpointHeader, PolicyKind, TensorInfo, CHECKPOINT_VERSION};
pub use init::{init_mlp, orthogonal};
pub use mlp::{elu, Dense, ForwardCache, Mlp, MlpGrads, NetworkShape, Real};
pub use params::{concat_cols, gaussian_entropy, gaussian_log_prob, ArchConfig, ParameterSet, LATENT_DIM};
