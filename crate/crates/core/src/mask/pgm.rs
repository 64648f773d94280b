//! Binary PGM (P5) codec for label masks.
//!
//! Gray levels 0, 85, 170 and 255 encode background, sclera, iris and pupil.
//! Any other value is rejected on decode.

use super::{Label, LabelMask};
use crate::error::{Error, Result};

struct Header {
    width: usize,
    height: usize,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Codec("missing P5 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments between tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        if i == 0 && pos == 2 {
            return Err(Error::Codec("expected whitespace after magic".into()));
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Codec(format!("expected integer at byte {start}")));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| Error::Codec(format!("header value {text} overflows")))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Codec("expected whitespace after maxval".into())),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Codec(format!("unsupported maxval {maxval}, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(Header {
        width,
        height,
        data_offset: pos,
    })
}

pub fn decode_mask(bytes: &[u8]) -> Result<LabelMask> {
    let header = parse_header(bytes)?;
    let len = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| Error::Codec(format!("dimensions {}x{} overflow", header.width, header.height)))?;
    let payload = &bytes[header.data_offset..];
    if payload.len() != len {
        return Err(Error::Codec(format!(
            "payload is {} bytes, expected {len} for {}x{}",
            payload.len(),
            header.width,
            header.height
        )));
    }
    let labels = payload
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            Label::from_gray(v).ok_or(Error::InvalidLabel {
                value: v,
                offset: header.data_offset + i,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMask::new(header.width, header.height, labels)
}

pub fn encode_mask(mask: &LabelMask) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", mask.width(), mask.height());
    let mut out = Vec::with_capacity(header.len() + mask.labels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(mask.labels().iter().map(|l| l.gray()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pgm(w: usize, h: usize, payload: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n{w} {h}\n255\n").into_bytes();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn decodes_direct_mapping() {
        let m = decode_mask(&pgm(2, 1, &[0, 255])).unwrap();
        assert_eq!(m.labels(), &[Label::Background, Label::Pupil]);
        let m = decode_mask(&pgm(1, 1, &[170])).unwrap();
        assert_eq!(m.labels(), &[Label::Iris]);
    }

    #[test]
    fn rejects_unknown_gray() {
        let err = decode_mask(&pgm(1, 1, &[17])).unwrap_err();
        assert!(err.to_string().contains("invalid label value 17"), "{err}");
        match err {
            Error::InvalidLabel { value, offset } => {
                assert_eq!(value, 17);
                assert_eq!(offset, 11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn encodes_pupil_pixel() {
        let m = LabelMask::new(1, 1, vec![Label::Pupil]).unwrap();
        let bytes = encode_mask(&m);
        assert_eq!(bytes, pgm(1, 1, &[255]));
    }

    #[test]
    fn header_with_comments() {
        let mut v = b"P5\n# made by hand\n2 # width\n1\n255\n".to_vec();
        v.extend_from_slice(&[85, 170]);
        let m = decode_mask(&v).unwrap();
        assert_eq!(m.labels(), &[Label::Sclera, Label::Iris]);
    }

    #[test]
    fn malformed_headers() {
        assert!(decode_mask(b"P6\n1 1\n255\n\0").is_err());
        assert!(decode_mask(b"P5\n1 1\n65535\n\0\0").is_err());
        assert!(decode_mask(b"P5\n1\n").is_err());
        assert!(decode_mask(b"P5\n0 1\n255\n").is_err());
        assert!(decode_mask(b"P5\n2 2\n255\n\0").is_err());
        assert!(decode_mask(b"P5\n2 2\n255\n\0\0\0\0\0").is_err());
        assert!(decode_mask(b"P5\n99999999999999999999999 1\n255\n").is_err());
        let overflow = format!("P5\n{} {}\n255\n", usize::MAX / 2, 3);
        assert!(decode_mask(overflow.as_bytes()).is_err());
    }

    fn arb_mask() -> impl Strategy<Value = LabelMask> {
        (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0usize..4, w * h).prop_map(move |v| {
                LabelMask::new(w, h, v.into_iter().map(|i| Label::ALL[i]).collect()).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip_is_identity(m in arb_mask()) {
            prop_assert_eq!(decode_mask(&encode_mask(&m)).unwrap(), m);
        }
    }
}
