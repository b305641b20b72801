//! Run-length coding: a sequence of `(byte, varint run)` tokens, run ≥ 1.

use super::varint;
use super::StepCount;
use crate::{Error, Result};

pub fn encode(input: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < input.len() {
        let b = input[i];
        let run = input[i..].iter().take_while(|&&x| x == b).count();
        out.push(b);
        varint::encode(run as u64, &mut out);
        i += run;
    }
    out
}

pub fn decode(payload: &[u8], len: usize, steps: &mut StepCount) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(len);
    let mut pos = 0;
    while out.len() < len {
        let b = *payload
            .get(pos)
            .ok_or_else(|| Error::Corrupt("RLE payload ends before declared length".into()))?;
        pos += 1;
        let run = varint::decode(payload, &mut pos)
            .map_err(|e| Error::Corrupt(format!("RLE run length: {e:?}")))?;
        if run == 0 || run > (len - out.len()) as u64 {
            return Err(Error::Corrupt(format!(
                "RLE run of {run} at output offset {} exceeds declared length {len}",
                out.len()
            )));
        }
        steps.token(1);
        steps.emit(run);
        out.resize(out.len() + run as usize, b);
    }
    if pos != payload.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing RLE payload bytes",
            payload.len() - pos
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousand_zeros() {
        let enc = encode(&[0u8; 1000]);
        assert_eq!(enc, vec![0x00, 0xe8, 0x07]);
        let mut steps = StepCount::default();
        assert_eq!(decode(&enc, 1000, &mut steps).unwrap(), vec![0u8; 1000]);
        assert_eq!(steps.get(), 1001);
    }

    #[test]
    fn mixed_runs() {
        let input = b"aaabccccd";
        let enc = encode(input);
        assert_eq!(enc, vec![b'a', 3, b'b', 1, b'c', 4, b'd', 1]);
        let mut steps = StepCount::default();
        assert_eq!(decode(&enc, input.len(), &mut steps).unwrap(), input);
        assert_eq!(steps.get(), 9 + 4);
    }

    #[test]
    fn corrupt_payloads() {
        let mut steps = StepCount::default();
        assert!(decode(&[b'a', 5], 4, &mut steps).is_err());
        assert!(decode(&[b'a', 0], 4, &mut steps).is_err());
        assert!(decode(&[b'a', 2], 4, &mut steps).is_err());
        assert!(decode(&[b'a', 2, b'b'], 2, &mut steps).is_err());
    }
}
