//! Versioned binary parameter files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::mlp::Mlp;
use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"OGNP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    magic: [u8; 4],
    version: u32,
    payload: T,
}

pub fn encode<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    Ok(bincode::serialize(&Envelope {
        magic: MAGIC,
        version: FORMAT_VERSION,
        payload: value,
    })?)
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let env: Envelope<T> = bincode::deserialize(bytes)?;
    if env.magic != MAGIC {
        return Err(Error::Serialization("not a parameter file".into()));
    }
    if env.version != FORMAT_VERSION {
        return Err(Error::Serialization(format!("unsupported format version {}", env.version)));
    }
    Ok(env.payload)
}

pub fn save<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(value)?)?;
    w.flush()?;
    Ok(())
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Named models, as stored in a parameter dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub models: Vec<(String, Mlp)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::MlpSpec;
    use rand::SeedableRng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let dump = ModelDump {
            models: vec![
                ("q".into(), Mlp::new(MlpSpec::new(&[18, 64, 9]), &mut rng).unwrap()),
                ("enc".into(), Mlp::new(MlpSpec::new(&[18, 8, 4]).with_layer_norm(), &mut rng).unwrap()),
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        save(&path, &dump).unwrap();
        let back: ModelDump = load(&path).unwrap();
        assert_eq!(back, dump);
        assert_eq!(encode(&back).unwrap(), encode(&dump).unwrap());
    }

    #[test]
    fn rejects_foreign_bytes() {
        assert!(decode::<ModelDump>(b"garbage bytes here").is_err());
    }
}
