//! Location-map side file written by `preprocess` and read by `restore`:
//!
//! ```text
//! 0x4C 0x50 | T : u8 | t0 : u8 | t1 : u8 | location map container
//! ```

use rdh_core::{CompressedMap, Error, PreprocessParams};

const MAGIC: [u8; 2] = [0x4C, 0x50];

pub fn encode(params: PreprocessParams, map: &CompressedMap) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&[params.t(), params.t0(), params.t1()]);
    out.extend_from_slice(&map.to_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<(PreprocessParams, CompressedMap), Error> {
    if bytes.len() < 5 || bytes[..2] != MAGIC {
        return Err(Error::Corrupt("not a location map side file".into()));
    }
    let params = PreprocessParams::new(bytes[2], bytes[3], bytes[4])
        .map_err(|e| Error::Corrupt(format!("side file parameters: {e}")))?;
    let (map, used) = CompressedMap::from_bytes(&bytes[5..])?;
    if 5 + used != bytes.len() {
        return Err(Error::Corrupt(format!("{} trailing bytes in side file", bytes.len() - 5 - used)));
    }
    if map.alphabet_size != 2 * usize::from(params.t()) + 1 {
        return Err(Error::Corrupt(format!("map alphabet {} does not match T = {}", map.alphabet_size, params.t())));
    }
    Ok((params, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdh_core::{compress, LocationMap};

    #[test]
    fn round_trip_and_tamper() {
        let params = PreprocessParams::new(2, 3, 4).unwrap();
        let map = compress(&LocationMap::new(3, 3, 2, vec![4, 4, 0, 4, 4, 4, 3, 4, 4]).unwrap());
        let bytes = encode(params, &map);
        assert_eq!(&bytes[..5], &[0x4C, 0x50, 2, 3, 4]);
        assert_eq!(decode(&bytes).unwrap(), (params, map));

        let mut bad = bytes.clone();
        bad[2] = 3;
        assert!(decode(&bad).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
    }
}
