//! JSON manifests for network and ConvLSTM weights: a small JSON file lists
//! the layer structure and references the weight tensors as `CPT1` files by
//! relative path. Also home of the seeded toy-weight generators.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::{Activation, ConvLayer, ConvLstmWeights, Layer, NetworkSpec, PadMode, PoolLayer};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerManifest {
    Conv {
        kernel: String,
        bias: String,
        stride: usize,
        pad_mode: PadMode,
        activation: Activation,
    },
    MaxPool {
        kernel: usize,
        stride: usize,
        pad: usize,
        pad_mode: PadMode,
    },
    Upsample {
        factor: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct NetworkManifest {
    classes: usize,
    layers: Vec<LayerManifest>,
    head: String,
}

#[derive(Serialize, Deserialize)]
struct LstmManifest {
    channels: usize,
    kernels: Vec<String>,   // w_xi, w_xf, w_xc, w_xo, w_hi, w_hf, w_hc, w_ho
    peepholes: Vec<String>, // w_ci, w_cf, w_co
    biases: Vec<String>,    // b_i, b_f, b_c, b_o
}

fn he_uniform(rng: &mut ChaCha8Rng, dims: &[usize], fan_in: usize) -> Tensor {
    let bound = (6.0 / fan_in as f64).sqrt();
    let len: usize = dims.iter().product();
    let data: Vec<f32> = (0..len)
        .map(|_| rng.gen_range(-bound..bound) as f32)
        .collect();
    Tensor::new(dims.to_vec(), data).expect("generator shapes are valid")
}

/// Seeded toy network: 3x3 conv+ReLU chain through `channels` plus a 1x1
/// classifier head with `classes` outputs.
pub fn generate_network(
    seed: u64,
    channels: &[usize],
    classes: usize,
    kernel: usize,
) -> Result<NetworkSpec> {
    if channels.len() < 2 {
        return Err(Error::Argument(
            "need at least input and one feature channel count".into(),
        ));
    }
    if classes == 0 {
        return Err(Error::Argument("class count must be >= 1".into()));
    }
    if kernel.is_multiple_of(2) {
        return Err(Error::Argument("kernel size must be odd".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    for win in channels.windows(2) {
        let (c_in, c_out) = (win[0], win[1]);
        let fan_in = c_in * kernel * kernel;
        let k = he_uniform(&mut rng, &[c_out, c_in, kernel, kernel], fan_in);
        let b = he_uniform(&mut rng, &[c_out], fan_in);
        layers.push(Layer::Conv(ConvLayer::new(
            k,
            b,
            1,
            PadMode::CubePad,
            Activation::Relu,
        )?));
    }
    let c_last = *channels.last().unwrap();
    let head = he_uniform(&mut rng, &[classes, c_last, 1, 1], c_last);
    NetworkSpec::new(layers, head, classes)
}

/// Seeded ConvLSTM weights at `channels` hidden channels.
pub fn generate_convlstm(seed: u64, channels: usize) -> Result<ConvLstmWeights> {
    if channels == 0 {
        return Err(Error::Argument("hidden channel count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fan_in = channels * 9;
    let mut kern = || he_uniform(&mut rng, &[channels, channels, 3, 3], fan_in);
    let kernels = [
        kern(),
        kern(),
        kern(),
        kern(),
        kern(),
        kern(),
        kern(),
        kern(),
    ];
    let mut vecs = || he_uniform(&mut rng, &[channels], channels);
    let peepholes = [vecs(), vecs(), vecs()];
    let biases = [vecs(), vecs(), vecs(), vecs()];
    ConvLstmWeights::new(kernels, peepholes, biases)
}

fn manifest_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

/// Writes `<stem>.json` plus one `CPT1` file per weight tensor; returns the
/// manifest path.
pub fn save_network(net: &NetworkSpec, dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut layers = Vec::new();
    for (i, layer) in net.layers.iter().enumerate() {
        layers.push(match layer {
            Layer::Conv(conv) => {
                let kernel = format!("{stem}_conv{i}_kernel.cpt");
                let bias = format!("{stem}_conv{i}_bias.cpt");
                conv.kernel.write_to(&dir.join(&kernel))?;
                conv.bias.write_to(&dir.join(&bias))?;
                LayerManifest::Conv {
                    kernel,
                    bias,
                    stride: conv.stride,
                    pad_mode: conv.pad_mode,
                    activation: conv.activation,
                }
            }
            Layer::MaxPool(p) => LayerManifest::MaxPool {
                kernel: p.kernel,
                stride: p.stride,
                pad: p.pad,
                pad_mode: p.pad_mode,
            },
            Layer::Upsample { factor } => LayerManifest::Upsample { factor: *factor },
        });
    }
    let head = format!("{stem}_head.cpt");
    net.head.write_to(&dir.join(&head))?;
    let manifest = NetworkManifest {
        classes: net.classes,
        layers,
        head,
    };
    let path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| manifest_err(&path, e))?;
    std::fs::write(&path, json)?;
    Ok(path)
}

pub fn load_network(path: &Path) -> Result<NetworkSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let manifest: NetworkManifest =
        serde_json::from_str(&text).map_err(|e| manifest_err(path, e))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut layers = Vec::new();
    for lm in manifest.layers {
        layers.push(match lm {
            LayerManifest::Conv {
                kernel,
                bias,
                stride,
                pad_mode,
                activation,
            } => Layer::Conv(ConvLayer::new(
                Tensor::read_from(&dir.join(kernel))?,
                Tensor::read_from(&dir.join(bias))?,
                stride,
                pad_mode,
                activation,
            )?),
            LayerManifest::MaxPool {
                kernel,
                stride,
                pad,
                pad_mode,
            } => Layer::MaxPool(PoolLayer::new(kernel, stride, pad, pad_mode)?),
            LayerManifest::Upsample { factor } => {
                if factor == 0 {
                    return Err(manifest_err(path, "upsample factor must be >= 1"));
                }
                Layer::Upsample { factor }
            }
        });
    }
    let head = Tensor::read_from(&dir.join(manifest.head))?;
    NetworkSpec::new(layers, head, manifest.classes)
}

pub fn save_convlstm(w: &ConvLstmWeights, dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let kernels = [
        ("w_xi", &w.w_xi),
        ("w_xf", &w.w_xf),
        ("w_xc", &w.w_xc),
        ("w_xo", &w.w_xo),
        ("w_hi", &w.w_hi),
        ("w_hf", &w.w_hf),
        ("w_hc", &w.w_hc),
        ("w_ho", &w.w_ho),
    ];
    let peepholes = [("w_ci", &w.w_ci), ("w_cf", &w.w_cf), ("w_co", &w.w_co)];
    let biases = [
        ("b_i", &w.b_i),
        ("b_f", &w.b_f),
        ("b_c", &w.b_c),
        ("b_o", &w.b_o),
    ];
    let write_group = |group: &[(&str, &Tensor)]| -> Result<Vec<String>> {
        let mut names = Vec::new();
        for (name, t) in group {
            let file = format!("{stem}_{name}.cpt");
            t.write_to(&dir.join(&file))?;
            names.push(file);
        }
        Ok(names)
    };
    let manifest = LstmManifest {
        channels: w.channels(),
        kernels: write_group(&kernels)?,
        peepholes: write_group(&peepholes)?,
        biases: write_group(&biases)?,
    };
    let path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| manifest_err(&path, e))?;
    std::fs::write(&path, json)?;
    Ok(path)
}

pub fn load_convlstm(path: &Path) -> Result<ConvLstmWeights> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let manifest: LstmManifest = serde_json::from_str(&text).map_err(|e| manifest_err(path, e))?;
    if manifest.kernels.len() != 8 || manifest.peepholes.len() != 3 || manifest.biases.len() != 4 {
        return Err(manifest_err(
            path,
            "manifest needs 8 kernels, 3 peepholes, 4 biases",
        ));
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let read = |name: &String| Tensor::read_from(&dir.join(name));
    let kernels = [
        read(&manifest.kernels[0])?,
        read(&manifest.kernels[1])?,
        read(&manifest.kernels[2])?,
        read(&manifest.kernels[3])?,
        read(&manifest.kernels[4])?,
        read(&manifest.kernels[5])?,
        read(&manifest.kernels[6])?,
        read(&manifest.kernels[7])?,
    ];
    let peepholes = [
        read(&manifest.peepholes[0])?,
        read(&manifest.peepholes[1])?,
        read(&manifest.peepholes[2])?,
    ];
    let biases = [
        read(&manifest.biases[0])?,
        read(&manifest.biases[1])?,
        read(&manifest.biases[2])?,
        read(&manifest.biases[3])?,
    ];
    ConvLstmWeights::new(kernels, peepholes, biases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn generator_is_seed_deterministic() {
        let a = generate_network(42, &[3, 8, 8], 4, 3).unwrap();
        let b = generate_network(42, &[3, 8, 8], 4, 3).unwrap();
        match (&a.layers[0], &b.layers[0]) {
            (Layer::Conv(x), Layer::Conv(y)) => assert_eq!(x.kernel.data(), y.kernel.data()),
            _ => panic!("expected conv layers"),
        }
        let c = generate_network(43, &[3, 8, 8], 4, 3).unwrap();
        match (&a.layers[0], &c.layers[0]) {
            (Layer::Conv(x), Layer::Conv(y)) => assert_ne!(x.kernel.data(), y.kernel.data()),
            _ => panic!("expected conv layers"),
        }
    }

    #[test]
    fn network_manifest_roundtrip() {
        let dir = tempdir().unwrap();
        let mut net = generate_network(7, &[3, 6, 4], 2, 3).unwrap();
        net.layers.push(Layer::MaxPool(
            PoolLayer::new(2, 2, 0, PadMode::CubePad).unwrap(),
        ));
        net.layers.push(Layer::Upsample { factor: 2 });
        let path = save_network(&net, dir.path(), "net").unwrap();
        let back = load_network(&path).unwrap();
        assert_eq!(back.classes, 2);
        assert_eq!(back.layers.len(), net.layers.len());
        assert_eq!(back.head.data(), net.head.data());
        match (&net.layers[0], &back.layers[0]) {
            (Layer::Conv(x), Layer::Conv(y)) => {
                assert_eq!(x.kernel.data(), y.kernel.data());
                assert_eq!(x.bias.data(), y.bias.data());
            }
            _ => panic!("expected conv layers"),
        }
        back.validate(3).unwrap();
    }

    #[test]
    fn lstm_manifest_roundtrip() {
        let dir = tempdir().unwrap();
        let w = generate_convlstm(11, 3).unwrap();
        let path = save_convlstm(&w, dir.path(), "lstm").unwrap();
        let back = load_convlstm(&path).unwrap();
        assert_eq!(back.channels(), 3);
        assert_eq!(back.w_xi.data(), w.w_xi.data());
        assert_eq!(back.w_co.data(), w.w_co.data());
        assert_eq!(back.b_f.data(), w.b_f.data());
    }

    #[test]
    fn load_rejects_bad_manifest() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{\"classes\": 1}").unwrap();
        assert!(matches!(load_network(&path), Err(Error::Format(_))));
        assert!(load_network(Path::new("/nonexistent/net.json")).is_err());
    }
}
