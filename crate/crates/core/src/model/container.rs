//! Binary model container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "MGCMNMDL"
//! version    u32      1
//! config_len u32
//! config     config_len bytes of UTF-8 JSON (ModelConfig)
//! n_layers   u32
//! per layer:
//!   role       u8   0 = gcn, 1 = mlp
//!   activation u8   0 = relu, 1 = softmax, 2 = none
//!   rows       u64
//!   cols       u64
//!   weights    rows * cols f64, row-major
//! ```
//!
//! The mixed propagation matrix is not stored; it is rebuilt from the graph
//! and the recipe in the embedded config. Adam moments are not stored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::{Model, ModelConfig};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::mix_matrices_with;
use crate::neural::{Activation, Layer, LayerParams, LayerRole};

pub const CONTAINER_MAGIC: &[u8; 8] = b"MGCMNMDL";
pub const CONTAINER_VERSION: u32 = 1;

/// Upper bound on any single weight matrix, guarding allocation on corrupt input.
const MAX_WEIGHTS: u64 = 1 << 32;

fn role_code(r: LayerRole) -> u8 {
    match r {
        LayerRole::Gcn => 0,
        LayerRole::Mlp => 1,
    }
}

fn activation_code(a: Activation) -> u8 {
    match a {
        Activation::Relu => 0,
        Activation::Softmax => 1,
        Activation::None => 2,
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Container(e.to_string())
}

pub fn write_model<W: Write>(w: &mut W, model: &Model, config: &ModelConfig) -> Result<()> {
    let json = serde_json::to_vec(config).map_err(|e| Error::Container(e.to_string()))?;
    w.write_all(CONTAINER_MAGIC).map_err(io_err)?;
    w.write_all(&CONTAINER_VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(json.len() as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&json).map_err(io_err)?;
    w.write_all(&(model.layers().len() as u32).to_le_bytes()).map_err(io_err)?;
    for layer in model.layers() {
        let weight = &layer.params.weight;
        w.write_all(&[role_code(layer.role), activation_code(layer.activation)]).map_err(io_err)?;
        w.write_all(&(weight.rows() as u64).to_le_bytes()).map_err(io_err)?;
        w.write_all(&(weight.cols() as u64).to_le_bytes()).map_err(io_err)?;
        for v in weight.as_slice() {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| Error::Container(format!("truncated container: {e}")))?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

/// Reads the config and layers; the caller supplies the graph the model was
/// trained on so the propagation matrix can be rebuilt.
pub fn read_model<R: Read>(r: &mut R, graph: &Graph) -> Result<(Model, ModelConfig)> {
    let magic: [u8; 8] = read_array(r)?;
    if &magic != CONTAINER_MAGIC {
        return Err(Error::Container("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != CONTAINER_VERSION {
        return Err(Error::Container(format!("unsupported version {version}")));
    }
    let len = read_u32(r)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json).map_err(|e| Error::Container(format!("truncated config: {e}")))?;
    let config: ModelConfig = serde_json::from_slice(&json).map_err(|e| Error::Container(format!("config: {e}")))?;

    let n_layers = read_u32(r)? as usize;
    let mut layers = Vec::with_capacity(n_layers.min(64));
    for k in 0..n_layers {
        let [role, act] = read_array::<2, _>(r)?;
        let role = match role {
            0 => LayerRole::Gcn,
            1 => LayerRole::Mlp,
            x => return Err(Error::Container(format!("layer {k}: unknown role {x}"))),
        };
        let activation = match act {
            0 => Activation::Relu,
            1 => Activation::Softmax,
            2 => Activation::None,
            x => return Err(Error::Container(format!("layer {k}: unknown activation {x}"))),
        };
        let (rows, cols) = (read_u64(r)?, read_u64(r)?);
        if rows.checked_mul(cols).map_or(true, |n| n > MAX_WEIGHTS) {
            return Err(Error::Container(format!("layer {k}: implausible shape {rows}x{cols}")));
        }
        let data = (0..rows * cols)
            .map(|_| read_array::<8, _>(r).map(f64::from_le_bytes))
            .collect::<Result<Vec<_>>>()?;
        layers.push(Layer {
            role,
            activation,
            params: LayerParams::new(DenseMatrix::from_vec(rows as usize, cols as usize, data)?),
        });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(io_err)? != 0 {
        return Err(Error::Container("trailing bytes after last layer".into()));
    }

    let dims = config.layer_dims(graph.feature_dim(), graph.n_classes());
    let stored: Vec<_> = layers.iter().map(|l| l.params.weight.shape()).collect();
    if dims != stored {
        return Err(Error::Container(format!("layer shapes {stored:?} do not match graph and config {dims:?}")));
    }
    let mixed = mix_matrices_with(&config.recipe, graph, config.semantics)?.matrix;
    let model = Model::from_layers(Arc::new(mixed), layers, config.optimizer.dropout)?;
    Ok((model, config))
}

pub fn save_model(path: &Path, model: &Model, config: &ModelConfig) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_model(&mut w, model, config)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path, graph: &Graph) -> Result<(Model, ModelConfig)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut BufReader::new(file), graph)
}
