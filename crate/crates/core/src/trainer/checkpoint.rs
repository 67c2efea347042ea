//! Encoder checkpoint format, little-endian:
//!
//! ```text
//! magic  b"ORCK"
//! u32    version (1)
//! u32    buckets B
//! u32    dim D
//! f32    temperature
//! f32    embeddings[B*D]  row-major
//! f32    projection[D*D]  row-major
//! ```

use std::io::{self, Read, Write};

use super::{Encoder, TrainError};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"ORCK";
pub const CHECKPOINT_VERSION: u32 = 1;

impl Encoder<f32> {
    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(CHECKPOINT_MAGIC)?;
        out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        out.write_all(&(self.buckets as u32).to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&self.temperature.to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * (self.embeddings.len() + self.projection.len()));
        for x in self.embeddings.iter().chain(&self.projection) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)
    }

    pub fn to_checkpoint_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_checkpoint(&mut buf).expect("writing to memory");
        buf
    }

    pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Self, TrainError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(TrainError::Checkpoint(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut input)?;
        if version != CHECKPOINT_VERSION {
            return Err(TrainError::Checkpoint(format!(
                "unsupported version {version}"
            )));
        }
        let buckets = read_u32(&mut input)? as usize;
        let dim = read_u32(&mut input)? as usize;
        let mut t = [0u8; 4];
        input.read_exact(&mut t)?;
        let temperature = f32::from_le_bytes(t);
        let embeddings = read_f32s(&mut input, buckets * dim)?;
        let projection = read_f32s(&mut input, dim * dim)?;
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(TrainError::Checkpoint("trailing bytes".into()));
        }
        Encoder::from_parts(buckets, dim, temperature, embeddings, projection)
    }

    /// SHA-256 over the serialized checkpoint.
    pub fn checksum(&self) -> String {
        crate::digest::sha256_hex(&self.to_checkpoint_bytes())
    }
}

fn read_u32<R: Read>(input: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f32s<R: Read>(input: &mut R, n: usize) -> io::Result<Vec<f32>> {
    let mut bytes = vec![0u8; n * 4];
    input.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
