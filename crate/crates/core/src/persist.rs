//! Binary artifacts for point sets, graphs and weighted graphs.
//!
//! Layout (little endian): magic `SHLB`, `u32` format version, `u8` kind,
//! `u64` payload length, payload, SHA-256 of the payload.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fpp::{PassageField, WeightDistribution};
use crate::graph::GeoGraph;
use crate::sampling::PointSet;

pub const MAGIC: [u8; 4] = *b"SHLB";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 1 + 8;
const DIGEST_LEN: usize = 32;

/// Objects with a binary artifact form.
pub trait Artifact: Sized {
    const KIND: u8;
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(input: &mut Reader<'_>) -> Result<Self>;
}

/// Cursor over a payload; every short read is a `CorruptFile`.
pub struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::CorruptFile("payload ends early".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        // a length larger than what is left cannot be honest
        usize::try_from(n).ok().filter(|&n| n <= self.bytes.len()).ok_or_else(|| Error::CorruptFile("length field out of range".into()))
    }

    fn f64_vec(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn string(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::CorruptFile("invalid utf-8".into()))
    }
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    put_u64(out, v.to_bits());
}

fn put_f64_slice(out: &mut Vec<u8>, vs: &[f64]) {
    put_u64(out, vs.len() as u64);
    vs.iter().for_each(|&v| put_f64(out, v));
}

impl Artifact for PointSet {
    const KIND: u8 = 1;

    fn encode(&self, out: &mut Vec<u8>) {
        put_u64(out, self.dim() as u64);
        put_f64(out, self.box_side);
        put_f64(out, self.intensity);
        put_u64(out, self.seed);
        put_f64_slice(out, self.coords());
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self> {
        let dim = input.u64()? as usize;
        let box_side = input.f64()?;
        let intensity = input.f64()?;
        let seed = input.u64()?;
        let coords = input.f64_vec()?;
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::CorruptFile("coordinate count does not match dimension".into()));
        }
        Ok(PointSet::from_coords(dim, coords, box_side, intensity, seed))
    }
}

impl Artifact for GeoGraph {
    const KIND: u8 = 2;

    fn encode(&self, out: &mut Vec<u8>) {
        self.points().encode(out);
        put_f64(out, self.radius());
        put_u64(out, self.edge_count() as u64);
        for &(u, v) in self.edges() {
            out.extend_from_slice(&u.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self> {
        let points = PointSet::decode(input)?;
        let radius = input.f64()?;
        let m = input.len()?;
        let n = points.len() as u32;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (u, v) = (input.u32()?, input.u32()?);
            if u >= n || v >= n || u == v {
                return Err(Error::CorruptFile(format!("edge ({u}, {v}) out of range")));
            }
            edges.push((u, v));
        }
        Ok(GeoGraph::from_parts(points, radius, edges, None))
    }
}

impl Artifact for PassageField {
    const KIND: u8 = 3;

    fn encode(&self, out: &mut Vec<u8>) {
        self.graph().encode(out);
        let law = toml::to_string(&self.distribution).expect("weight law serializes");
        put_u64(out, law.len() as u64);
        out.extend_from_slice(law.as_bytes());
        put_u64(out, self.seed);
        put_f64_slice(out, self.weights());
    }

    fn decode(input: &mut Reader<'_>) -> Result<Self> {
        let graph = GeoGraph::decode(input)?;
        let distribution: WeightDistribution =
            toml::from_str(&input.string()?).map_err(|e| Error::CorruptFile(format!("weight law: {e}")))?;
        let seed = input.u64()?;
        let weights = input.f64_vec()?;
        if weights.len() != graph.edge_count() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::CorruptFile("weights do not match the edges".into()));
        }
        Ok(PassageField::from_weights(Arc::new(graph), weights, distribution, seed))
    }
}

pub fn to_bytes<T: Artifact>(object: &T) -> Vec<u8> {
    let mut payload = Vec::new();
    object.encode(&mut payload);
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + DIGEST_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(T::KIND);
    put_u64(&mut out, payload.len() as u64);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&Sha256::digest(&payload));
    out
}

pub fn from_bytes<T: Artifact>(bytes: &[u8]) -> Result<T> {
    if bytes.len() < HEADER_LEN + DIGEST_LEN || bytes[..4] != MAGIC {
        return Err(Error::CorruptFile("missing artifact header".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    if bytes[8] != T::KIND {
        return Err(Error::CorruptFile(format!("artifact kind {} where {} was expected", bytes[8], T::KIND)));
    }
    let len = u64::from_le_bytes(bytes[9..17].try_into().unwrap());
    if len != (bytes.len() - HEADER_LEN - DIGEST_LEN) as u64 {
        return Err(Error::CorruptFile("payload length does not match file size".into()));
    }
    let (payload, digest) = bytes[HEADER_LEN..].split_at(len as usize);
    if Sha256::digest(payload).as_slice() != digest {
        return Err(Error::CorruptFile("checksum mismatch".into()));
    }
    let mut reader = Reader { bytes: payload };
    let object = T::decode(&mut reader)?;
    if !reader.bytes.is_empty() {
        return Err(Error::CorruptFile("trailing bytes in payload".into()));
    }
    Ok(object)
}

pub fn persist_artifact<T: Artifact>(object: &T, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(object))?;
    Ok(())
}

pub fn load_artifact<T: Artifact>(path: &Path) -> Result<T> {
    from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpp::assign_weights;
    use crate::sampling::{sample_ppp, SimConfig};

    fn field() -> PassageField {
        let pts = sample_ppp(&SimConfig::new(2, 1.0, 2.0, 12.0, 4)).unwrap();
        let g = Arc::new(GeoGraph::build(pts, 2.0));
        assign_weights(g, WeightDistribution::Uniform { low: 0.5, high: 2.0 }, 9).unwrap()
    }

    #[test]
    fn field_round_trip() {
        let f = field();
        let back: PassageField = from_bytes(&to_bytes(&f)).unwrap();
        assert_eq!(back.graph().points(), f.graph().points());
        assert_eq!(back.graph().edges(), f.graph().edges());
        assert_eq!(back.weights(), f.weights());
        assert_eq!(back.distribution, f.distribution);
        assert_eq!(back.seed, f.seed);
    }

    #[test]
    fn damaged_files_are_rejected() {
        let bytes = to_bytes(field().graph().points());
        assert!(matches!(from_bytes::<PointSet>(&bytes[..bytes.len() - 1]), Err(Error::CorruptFile(_))));
        let mut flipped = bytes.clone();
        flipped[HEADER_LEN + 3] ^= 1;
        assert!(matches!(from_bytes::<PointSet>(&flipped), Err(Error::CorruptFile(_))));
        let mut versioned = bytes.clone();
        versioned[4] = 9;
        assert!(matches!(from_bytes::<PointSet>(&versioned), Err(Error::FormatVersionMismatch { found: 9, expected: 1 })));
        assert!(matches!(from_bytes::<GeoGraph>(&bytes), Err(Error::CorruptFile(_))));
    }
}
