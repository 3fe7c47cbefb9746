//! A small 1D CNN written out by hand: layers, backpropagation, Adam, and an
//! early-stopped training loop. Double precision throughout.

mod adam;
mod checkpoint;
mod layers;
mod model;
mod tensor;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{decode_model, encode_model, load_model, save_model, CHECKPOINT_MAGIC};
pub use layers::{
    conv1d_backward, conv1d_forward, conv_out_len, dense_backward, dense_forward, dropout,
    dropout_backward, maxpool_backward, maxpool_forward, relu, relu_backward, softmax,
    softmax_xent, ConvGrads, DenseGrads, SoftmaxXent,
};
pub use model::{build_model, forward, plan_shapes, ModelParams, ModelSpec, ShapePlan, PARAM_TENSORS};
pub use tensor::Tensor;
pub use train::{evaluate, train, EpochRecord, Evaluation, TrainConfig, TrainOutcome};
