// The length-prefixed wire format shared by server and station.

use syncnoise::channel::frame::{decode_all, encode_frame, DrivePayload, QueryResponsePayload};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let drive = DrivePayload { start: 50_000, values: vec![1.25, -3.5, 0.0] };
    let query = QueryResponsePayload { query: 7, z: vec![4.0] };
    let mut wire = encode_frame(&drive.to_frame())?;
    wire.extend(encode_frame(&query.to_frame())?);
    println!("{} bytes: {:02x?}", wire.len(), &wire[..14]);
    for f in decode_all(&wire)? {
        println!("  {:?} frame, {} payload bytes", f.kind, f.payload.len());
    }
    let mut bad = wire.clone();
    bad[0] = b'X';
    println!("corrupted magic: {}", decode_all(&bad).unwrap_err());
    println!("truncated: {}", decode_all(&wire[..wire.len() - 1]).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
