//! JSON rendering with the repo-wide 15-significant-digit float rule, so
//! JSON exports diff as cleanly as the CSV ones.

use serde::Serialize;
use std::io;

struct Sig15Formatter;

impl serde_json::ser::Formatter for Sig15Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(mesonet_core::sig15(value).as_bytes())
    }
}

/// Compact JSON bytes with a trailing newline. Integers stay integers;
/// every float is written as `d.dddddddddddddde±x`.
pub fn to_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig15Formatter);
    value.serialize(&mut ser).expect("in-memory JSON serialization cannot fail");
    out.push(b'\n');
    out
}
