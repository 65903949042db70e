//! Binary model checkpoints.
//!
//! ```text
//! "PCPT0001"                              8-byte magic
//! u64 input_width
//! u64 layer_count
//! layer_count × { u64 width, u64 name_len, name bytes (UTF-8) }
//! layer_count × { width·fan_in weights, row-major; width biases }
//! ```
//!
//! Integers and reals are little-endian; reals are always stored as `f64`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::{ActivationKind, Layer, Network};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PCPT0001";

/// Serializes a network to checkpoint bytes.
pub fn encode<T: Scalar>(net: &Network<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * net.parameter_count());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(net.input_width() as u64).to_le_bytes());
    out.extend_from_slice(&(net.depth() as u64).to_le_bytes());
    for layer in net.layers() {
        let name = layer.activation.name().as_bytes();
        out.extend_from_slice(&(layer.width() as u64).to_le_bytes());
        out.extend_from_slice(&(name.len() as u64).to_le_bytes());
        out.extend_from_slice(name);
    }
    for layer in net.layers() {
        for &w in layer
            .weights
            .as_slice()
            .iter()
            .chain(layer.biases.as_slice())
        {
            out.extend_from_slice(&w.to_f64_lossy().to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Checkpoint(format!(
                "truncated while reading {what} at offset {}",
                self.pos
            ))),
        }
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        usize::try_from(self.u64(what)?)
            .map_err(|_| Error::Checkpoint(format!("{what} does not fit in memory")))
    }

    fn reals<T: Scalar>(&mut self, n: usize, what: &str) -> Result<Vec<T>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Checkpoint(format!("{what} size overflows")))?;
        Ok(self
            .take(len, what)?
            .chunks_exact(8)
            .map(|c| T::from_f64_lossy(f64::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }
}

/// Parses checkpoint bytes, validating the magic and the full shape chain.
pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<Network<T>> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(8, "magic")?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(CHECKPOINT_MAGIC)
        )));
    }
    let input_width = r.count("input width")?;
    let depth = r.count("layer count")?;
    if input_width == 0 || depth == 0 {
        return Err(Error::Checkpoint(format!(
            "degenerate network: input width {input_width}, {depth} layers"
        )));
    }
    let mut specs = Vec::new();
    for l in 0..depth {
        let width = r.count("layer width")?;
        if width == 0 {
            return Err(Error::Checkpoint(format!("layer {l} has width 0")));
        }
        let name_len = r.count("activation name length")?;
        let name = std::str::from_utf8(r.take(name_len, "activation name")?)
            .map_err(|_| Error::Checkpoint(format!("layer {l} activation name is not UTF-8")))?;
        let activation: ActivationKind = name
            .parse()
            .map_err(|_| Error::Checkpoint(format!("layer {l} has unknown activation {name:?}")))?;
        specs.push((width, activation));
    }
    let mut layers = Vec::with_capacity(depth);
    let mut fan_in = input_width;
    for (l, &(width, activation)) in specs.iter().enumerate() {
        let count = width
            .checked_mul(fan_in)
            .ok_or_else(|| Error::Checkpoint(format!("layer {l} size overflows")))?;
        let weights = r.reals(count, "weights")?;
        let biases = r.reals(width, "biases")?;
        layers.push(Layer {
            weights: Matrix::new(width, fan_in, weights)?,
            biases: Vector::from_vec(biases),
            activation,
        });
        fan_in = width;
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after parameters",
            bytes.len() - r.pos
        )));
    }
    Network::from_layers(input_width, layers)
}

pub fn save<T: Scalar>(net: &Network<T>, path: &Path) -> Result<()> {
    std::fs::write(path, encode(net))?;
    Ok(())
}

pub fn load<T: Scalar>(path: &Path) -> Result<Network<T>> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerSpec;
    use proptest::prelude::*;

    fn sample() -> Network<f64> {
        let specs = [
            LayerSpec::new(4, ActivationKind::Relu),
            LayerSpec::new(3, ActivationKind::Tanh),
            LayerSpec::new(2, ActivationKind::Identity),
        ];
        Network::build(5, &specs, 8).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..8], b"PCPT0001");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 5);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(bytes[32..40].try_into().unwrap()), 4);
        assert_eq!(&bytes[40..44], b"relu");
        let params = 4 * 5 + 4 + 3 * 4 + 3 + 2 * 3 + 2;
        let header = 24 + (16 + 4) + (16 + 4) + (16 + 8);
        assert_eq!(bytes.len(), header + 8 * params);
    }

    #[test]
    fn rejects_corruption() {
        let good = encode(&sample());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(decode::<f64>(&bad_magic).is_err());
        assert!(decode::<f64>(&good[..good.len() - 1]).is_err());
        let mut trailing = good.clone();
        trailing.push(0);
        assert!(decode::<f64>(&trailing).is_err());
        let mut bad_name = good.clone();
        bad_name[40] = b'x';
        assert!(decode::<f64>(&bad_name).is_err());
        let mut bad_width = good;
        // first layer width 4 -> 5 breaks the chain into the second layer's fan-in
        bad_width[24] = 5;
        assert!(decode::<f64>(&bad_width).is_err());
    }

    #[test]
    fn f32_networks_store_as_f64() {
        let net =
            Network::<f32>::build(3, &[LayerSpec::new(2, ActivationKind::Sigmoid)], 1).unwrap();
        let back: Network<f32> = decode(&encode(&net)).unwrap();
        assert_eq!(back, net);
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(seed in any::<u64>(), widths in prop::collection::vec(1usize..6, 1..4)) {
            let specs: Vec<_> = widths.iter().map(|&w| LayerSpec::new(w, ActivationKind::Sigmoid)).collect();
            let net = Network::<f64>::build(3, &specs, seed).unwrap();
            let bytes = encode(&net);
            let back: Network<f64> = decode(&bytes).unwrap();
            prop_assert_eq!(&back, &net);
            prop_assert_eq!(encode(&back), bytes);
        }
    }
}
