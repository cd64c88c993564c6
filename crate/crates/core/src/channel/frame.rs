//! Length-prefixed frames for the public link.
//!
//! ```text
//! magic "CPRV" | version u8 = 1 | type u8 | payload length u32 BE | payload
//! ```
//!
//! Payloads: `DRIVE` carries the first step index (u64 LE) followed by the
//! driving-signal samples (f64 LE); `QUERY_RESPONSE` carries the query
//! index (u64 LE) followed by the coordinates of `z` (f64 LE);
//! `SESSION_META` carries UTF-8 JSON.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CPRV";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameType {
    Drive = 0x01,
    QueryResponse = 0x02,
    SessionMeta = 0x03,
}

impl TryFrom<u8> for FrameType {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        match b {
            0x01 => Ok(FrameType::Drive),
            0x02 => Ok(FrameType::QueryResponse),
            0x03 => Ok(FrameType::SessionMeta),
            other => Err(Error::UnknownFrameType(other)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameType, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }
}

pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(frame.encoded_len());
    encode_into(frame, &mut out)?;
    Ok(out)
}

/// Appends the encoding of `frame` to `out`.
pub fn encode_into(frame: &Frame, out: &mut Vec<u8>) -> Result<()> {
    let len = u32::try_from(frame.payload.len())
        .map_err(|_| Error::InvalidArgument(format!("payload of {} bytes exceeds the u32 length field", frame.payload.len())))?;
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(frame.kind as u8);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&frame.payload);
    Ok(())
}

struct Header {
    kind: FrameType,
    len: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedHeader { got: bytes.len(), needed: HEADER_LEN });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(Error::BadVersion(bytes[4]));
    }
    let kind = FrameType::try_from(bytes[5])?;
    let len = u32::from_be_bytes(bytes[6..10].try_into().unwrap()) as usize;
    Ok(Header { kind, len })
}

/// Decodes one frame from the front of `bytes`, returning it with the
/// number of bytes consumed.
pub fn decode_prefix(bytes: &[u8]) -> Result<(Frame, usize)> {
    let h = parse_header(bytes)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < h.len {
        return Err(Error::TruncatedPayload { got: body.len(), declared: h.len });
    }
    Ok((Frame::new(h.kind, body[..h.len].to_vec()), HEADER_LEN + h.len))
}

/// Decodes exactly one frame; trailing bytes are an error.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame> {
    let (f, used) = decode_prefix(bytes)?;
    if used != bytes.len() {
        return Err(Error::MalformedPayload {
            kind: "frame",
            reason: format!("{} trailing bytes after the declared payload", bytes.len() - used),
        });
    }
    Ok(f)
}

/// Splits a concatenated frame log.
pub fn decode_all(mut bytes: &[u8]) -> Result<Vec<Frame>> {
    let mut frames = Vec::new();
    while !bytes.is_empty() {
        let (f, used) = decode_prefix(bytes)?;
        frames.push(f);
        bytes = &bytes[used..];
    }
    Ok(frames)
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> Result<()> {
    w.write_all(&encode_frame(frame)?)?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Frame>> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(Error::TruncatedHeader { got, needed: HEADER_LEN }),
            n => got += n,
        }
    }
    let h = parse_header(&header)?;
    let mut payload = vec![0u8; h.len];
    let mut got = 0;
    while got < h.len {
        match r.read(&mut payload[got..])? {
            0 => return Err(Error::TruncatedPayload { got, declared: h.len }),
            n => got += n,
        }
    }
    Ok(Some(Frame::new(h.kind, payload)))
}

/// A block of driving-signal samples starting at integration step `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivePayload {
    pub start: u64,
    pub values: Vec<f64>,
}

/// The distorted response `z` to query number `query`.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryResponsePayload {
    pub query: u64,
    pub z: Vec<f64>,
}

fn index_and_floats(index: u64, values: &[f64]) -> Vec<u8> {
    let mut p = Vec::with_capacity(8 + 8 * values.len());
    p.extend_from_slice(&index.to_le_bytes());
    for v in values {
        p.extend_from_slice(&v.to_le_bytes());
    }
    p
}

fn parse_index_and_floats(kind: &'static str, p: &[u8]) -> Result<(u64, Vec<f64>)> {
    if p.len() < 8 || !(p.len() - 8).is_multiple_of(8) {
        return Err(Error::MalformedPayload { kind, reason: format!("length {} is not 8 + 8k", p.len()) });
    }
    let index = u64::from_le_bytes(p[..8].try_into().unwrap());
    let values = p[8..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((index, values))
}

impl DrivePayload {
    pub fn to_frame(&self) -> Frame {
        Frame::new(FrameType::Drive, index_and_floats(self.start, &self.values))
    }

    pub fn from_frame(f: &Frame) -> Result<Self> {
        expect_kind(f, FrameType::Drive, "DRIVE")?;
        let (start, values) = parse_index_and_floats("DRIVE", &f.payload)?;
        Ok(DrivePayload { start, values })
    }
}

impl QueryResponsePayload {
    pub fn to_frame(&self) -> Frame {
        Frame::new(FrameType::QueryResponse, index_and_floats(self.query, &self.z))
    }

    pub fn from_frame(f: &Frame) -> Result<Self> {
        expect_kind(f, FrameType::QueryResponse, "QUERY_RESPONSE")?;
        let (query, z) = parse_index_and_floats("QUERY_RESPONSE", &f.payload)?;
        if z.is_empty() {
            return Err(Error::MalformedPayload { kind: "QUERY_RESPONSE", reason: "empty response point".into() });
        }
        Ok(QueryResponsePayload { query, z })
    }
}

pub fn meta_frame<T: serde::Serialize>(meta: &T) -> Result<Frame> {
    let bytes = serde_json::to_vec(meta).map_err(|e| Error::schema("SESSION_META", e))?;
    Ok(Frame::new(FrameType::SessionMeta, bytes))
}

pub fn parse_meta<T: serde::de::DeserializeOwned>(f: &Frame) -> Result<T> {
    expect_kind(f, FrameType::SessionMeta, "SESSION_META")?;
    serde_json::from_slice(&f.payload).map_err(|e| Error::schema("SESSION_META", e))
}

fn expect_kind(f: &Frame, kind: FrameType, name: &'static str) -> Result<()> {
    if f.kind != kind {
        return Err(Error::MalformedPayload { kind: name, reason: format!("frame has type {:?}", f.kind) });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_drive_frame_is_ten_bytes() {
        let f = Frame::new(FrameType::Drive, Vec::new());
        let b = encode_frame(&f).unwrap();
        assert_eq!(b, vec![b'C', b'P', b'R', b'V', 1, 1, 0, 0, 0, 0]);
        assert_eq!(decode_frame(&b).unwrap(), f);
    }

    #[test]
    fn length_is_big_endian() {
        let b = encode_frame(&Frame::new(FrameType::SessionMeta, vec![7; 258])).unwrap();
        assert_eq!(&b[6..10], &[0, 0, 1, 2]);
        assert_eq!(b[5], 0x03);
    }

    #[test]
    fn rejections_are_distinct() {
        let good = encode_frame(&Frame::new(FrameType::QueryResponse, vec![1, 2, 3])).unwrap();
        let mut b = good.clone();
        b[1] = b'X';
        assert!(matches!(decode_frame(&b), Err(Error::BadMagic(_))));
        let mut b = good.clone();
        b[4] = 2;
        assert!(matches!(decode_frame(&b), Err(Error::BadVersion(2))));
        let mut b = good.clone();
        b[5] = 0x09;
        assert!(matches!(decode_frame(&b), Err(Error::UnknownFrameType(0x09))));
        assert!(matches!(decode_frame(&good[..7]), Err(Error::TruncatedHeader { got: 7, .. })));
        assert!(matches!(decode_frame(&good[..12]), Err(Error::TruncatedPayload { got: 2, declared: 3 })));
        let mut b = good.clone();
        b.push(0);
        assert!(matches!(decode_frame(&b), Err(Error::MalformedPayload { .. })));
    }

    #[test]
    fn stream_reader_handles_clean_and_truncated_ends() {
        let a = encode_frame(&Frame::new(FrameType::Drive, vec![1; 16])).unwrap();
        let mut both = a.clone();
        both.extend(encode_frame(&Frame::new(FrameType::SessionMeta, b"{}".to_vec())).unwrap());
        let mut r = &both[..];
        assert_eq!(read_frame(&mut r).unwrap().unwrap().kind, FrameType::Drive);
        assert_eq!(read_frame(&mut r).unwrap().unwrap().payload, b"{}");
        assert!(read_frame(&mut r).unwrap().is_none());
        let mut r = &a[..a.len() - 1];
        assert!(matches!(read_frame(&mut r), Err(Error::TruncatedPayload { .. })));
        assert_eq!(decode_all(&both).unwrap().len(), 2);
    }

    #[test]
    fn typed_payloads() {
        let d = DrivePayload { start: 1 << 40, values: vec![1.5, -0.0, f64::MIN_POSITIVE] };
        let f = d.to_frame();
        assert_eq!(&f.payload[..8], &(1u64 << 40).to_le_bytes());
        assert_eq!(DrivePayload::from_frame(&f).unwrap(), d);
        assert!(QueryResponsePayload::from_frame(&f).is_err());
        let bad = Frame::new(FrameType::Drive, vec![0; 12]);
        assert!(matches!(DrivePayload::from_frame(&bad), Err(Error::MalformedPayload { kind: "DRIVE", .. })));
        let q = QueryResponsePayload { query: 3, z: vec![11.0] };
        assert_eq!(QueryResponsePayload::from_frame(&q.to_frame()).unwrap(), q);
    }

    #[test]
    fn large_random_payload_round_trips() {
        use rand::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut payload = vec![0u8; 1 << 16];
        rng.fill_bytes(&mut payload);
        let f = Frame::new(FrameType::QueryResponse, payload);
        assert_eq!(decode_frame(&encode_frame(&f).unwrap()).unwrap(), f);
    }

    fn kind() -> impl Strategy<Value = FrameType> {
        prop_oneof![Just(FrameType::Drive), Just(FrameType::QueryResponse), Just(FrameType::SessionMeta)]
    }

    proptest! {
        #[test]
        fn round_trip(k in kind(), payload in proptest::collection::vec(any::<u8>(), 0..512)) {
            let f = Frame::new(k, payload);
            let b = encode_frame(&f).unwrap();
            prop_assert_eq!(b.len(), HEADER_LEN + f.payload.len());
            prop_assert_eq!(decode_frame(&b).unwrap(), f);
        }

        #[test]
        fn encoding_is_injective(k1 in kind(), p1 in proptest::collection::vec(any::<u8>(), 0..16),
                                 k2 in kind(), p2 in proptest::collection::vec(any::<u8>(), 0..16)) {
            let (a, b) = (Frame::new(k1, p1), Frame::new(k2, p2));
            prop_assert_eq!(a == b, encode_frame(&a).unwrap() == encode_frame(&b).unwrap());
        }
    }
}
