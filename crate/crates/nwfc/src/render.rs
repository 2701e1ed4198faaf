//! Binary PPM (P6) rendering.
//!
//! Each tile becomes an `S x S` square cut along both diagonals into four
//! triangles, one per side, coloured by the edge on that side.

use std::io::{self, Write};

use nwfc_core::{Tileset, Tiling};

/// Default tile side in pixels.
pub const DEFAULT_SCALE: usize = 16;

const BASE_PALETTE: [[u8; 3]; 8] = [
    [0x6a, 0xa8, 0x4f], // green
    [0xb0, 0x5a, 0x3c], // brick
    [0xd9, 0xc2, 0x8c], // sand
    [0x3d, 0x85, 0xc6], // water
    [0x8e, 0x7c, 0xc3],
    [0xe0, 0x66, 0x66],
    [0x76, 0xa5, 0xaf],
    [0xf1, 0xc2, 0x32],
];

/// Colour for an edge id. The first eight are fixed; later ids get a colour
/// derived from the id so the palette never runs out.
pub fn edge_colour(edge: u16) -> [u8; 3] {
    match BASE_PALETTE.get(edge as usize) {
        Some(c) => *c,
        None => {
            let h = nwfc_core::rng::splitmix64(edge as u64).to_le_bytes();
            [h[0] | 0x40, h[1] | 0x40, h[2] | 0x40]
        }
    }
}

/// Which side's triangle pixel `(x, y)` of an `s x s` tile falls in, as an
/// index into `[n, s, w, e]`. Pixels on a diagonal go to the first side in
/// that order.
fn side_of(x: usize, y: usize, s: usize) -> usize {
    let dist = [y, s - 1 - y, x, s - 1 - x];
    let mut best = 0;
    for side in 1..4 {
        if dist[side] < dist[best] {
            best = side;
        }
    }
    best
}

/// Writes `tiling` as a P6 image with `scale`-pixel tiles.
pub fn write_ppm<W: Write>(tiling: &Tiling, ts: &Tileset, scale: usize, mut out: W) -> io::Result<()> {
    assert!(scale >= 1, "scale must be positive");
    let (w, h) = (tiling.width * scale, tiling.height * scale);
    write!(out, "P6\n{w} {h}\n255\n")?;
    let mut row = vec![0u8; w * 3];
    for r in 0..tiling.height {
        for y in 0..scale {
            for c in 0..tiling.width {
                let tile = ts.tile(tiling.cells[r * tiling.width + c]);
                let edges = [tile.n.0, tile.s.0, tile.w.0, tile.e.0];
                for x in 0..scale {
                    let px = (c * scale + x) * 3;
                    row[px..px + 3].copy_from_slice(&edge_colour(edges[side_of(x, y, scale)]));
                }
            }
            out.write_all(&row)?;
        }
    }
    out.flush()
}
