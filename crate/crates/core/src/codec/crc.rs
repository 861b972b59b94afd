//! CRC-16/CCITT-FALSE over bit sequences (poly 0x1021, init 0xFFFF, MSB first, no reflection).

pub const POLY: u16 = 0x1021;
pub const INIT: u16 = 0xFFFF;
pub const CRC_BITS: usize = 16;

/// CRC register after clocking in `bits` (values 0/1), MSB-first.
pub fn crc16_bits(bits: &[u8]) -> u16 {
    let mut reg = INIT;
    for &b in bits {
        let top = ((reg >> 15) as u8 & 1) ^ (b & 1);
        reg <<= 1;
        if top == 1 {
            reg ^= POLY;
        }
    }
    reg
}

/// CRC over bytes, each byte fed MSB first.
pub fn crc16_bytes(bytes: &[u8]) -> u16 {
    crc16_bits(&bytes_to_bits(bytes))
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Packs bits MSB first; a trailing partial byte is zero-padded on the right.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i))))
        .collect()
}

pub fn crc16_attach(payload: &[u8]) -> Vec<u8> {
    let crc = crc16_bits(payload);
    let mut out = payload.to_vec();
    out.extend((0..CRC_BITS).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

/// True when the trailing 16 bits are the CRC of the preceding bits.
pub fn crc16_check(bits: &[u8]) -> bool {
    if bits.len() < CRC_BITS {
        return false;
    }
    let (data, tail) = bits.split_at(bits.len() - CRC_BITS);
    let want = tail.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
    crc16_bits(data) == want
}
