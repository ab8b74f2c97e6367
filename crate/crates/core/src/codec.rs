//! Little-endian primitives for the model container.

use crate::error::{Error, Result};

pub(crate) fn put_u8(out: &mut Vec<u8>, v: u8) {
    out.push(v);
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_len(out: &mut Vec<u8>, v: usize) {
    put_u32(out, u32::try_from(v).expect("length fits in u32"));
}

pub(crate) fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_str(out: &mut Vec<u8>, s: &str) {
    put_len(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

pub(crate) fn take<'a>(input: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if input.len() < n {
        return Err(Error::ModelFormat("unexpected end of data".into()));
    }
    let (head, tail) = input.split_at(n);
    *input = tail;
    Ok(head)
}

pub(crate) fn get_u8(input: &mut &[u8]) -> Result<u8> {
    Ok(take(input, 1)?[0])
}

pub(crate) fn get_u32(input: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(input, 4)?.try_into().unwrap()))
}

pub(crate) fn get_len(input: &mut &[u8]) -> Result<usize> {
    Ok(get_u32(input)? as usize)
}

pub(crate) fn get_f64(input: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_le_bytes(take(input, 8)?.try_into().unwrap()))
}

pub(crate) fn get_f64s(input: &mut &[u8], n: usize) -> Result<Vec<f64>> {
    let bytes = take(input, n.checked_mul(8).ok_or_else(|| Error::ModelFormat("length overflow".into()))?)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub(crate) fn get_str(input: &mut &[u8]) -> Result<String> {
    let n = get_len(input)?;
    String::from_utf8(take(input, n)?.to_vec()).map_err(|_| Error::ModelFormat("invalid UTF-8".into()))
}
