//! JSON documents: tilesets, tilings, chunks, manifests, brushes and stats.
//!
//! Each document type mirrors a wire format one to one and converts to and
//! from the core types. Serialization is deterministic (field order is the
//! struct order, tags are sorted) so equal values give equal bytes.

use std::collections::BTreeSet;

use nwfc_core::brush::Stroke;
use nwfc_core::tileset::NamedTile;
use nwfc_core::{
    BrushError, BrushLayer, CellRect, Chunk, CoverageReport, GenerateStats, TileId, Tileset, TilesetError, Tiling,
    WeightField, WorldConfig,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid tileset: {0}")]
    Tileset(#[from] TilesetError),
    #[error("invalid brush: {0}")]
    Brush(#[from] BrushError),
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileDoc {
    pub n: String,
    pub s: String,
    pub w: String,
    pub e: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default)]
    pub tags: Vec<String>,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilesetDoc {
    pub name: String,
    pub edges_ns: Vec<String>,
    pub edges_we: Vec<String>,
    pub tiles: Vec<TileDoc>,
}

impl TilesetDoc {
    pub fn from_tileset(ts: &Tileset) -> Self {
        let tiles = ts
            .tiles()
            .iter()
            .map(|t| TileDoc {
                n: ts.ens().name(t.n).to_owned(),
                s: ts.ens().name(t.s).to_owned(),
                w: ts.ewe().name(t.w).to_owned(),
                e: ts.ewe().name(t.e).to_owned(),
                weight: t.weight,
                tags: t.tags.iter().cloned().collect(),
            })
            .collect();
        Self {
            name: ts.name().to_owned(),
            edges_ns: ts.ens().names().to_vec(),
            edges_we: ts.ewe().names().to_vec(),
            tiles,
        }
    }

    pub fn to_tileset(&self) -> Result<Tileset, DocError> {
        let ns: Vec<&str> = self.edges_ns.iter().map(String::as_str).collect();
        let we: Vec<&str> = self.edges_we.iter().map(String::as_str).collect();
        let tiles = self.tiles.iter().map(|t| {
            let mut named = NamedTile::new(&t.n, &t.s, &t.w, &t.e);
            named.weight = t.weight;
            named.tags = t.tags.iter().cloned().collect::<BTreeSet<_>>();
            named
        });
        Ok(Tileset::from_named(self.name.clone(), &ns, &we, tiles)?)
    }
}

/// Parses and validates a tileset document.
pub fn parse_tileset(json: &str) -> Result<Tileset, DocError> {
    serde_json::from_str::<TilesetDoc>(json)?.to_tileset()
}

pub fn tileset_to_json(ts: &Tileset) -> String {
    to_pretty(&TilesetDoc::from_tileset(ts))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingDoc {
    pub width: usize,
    pub height: usize,
    pub tileset_hash: String,
    pub seed: u64,
    pub cells: Vec<u32>,
}

impl From<&Tiling> for TilingDoc {
    fn from(t: &Tiling) -> Self {
        Self {
            width: t.width,
            height: t.height,
            tileset_hash: t.tileset_hash.clone(),
            seed: t.seed,
            cells: t.cells.iter().map(|c| c.0).collect(),
        }
    }
}

impl TilingDoc {
    pub fn to_tiling(&self) -> Result<Tiling, DocError> {
        if self.width == 0 || self.height == 0 || self.cells.len() != self.width * self.height {
            return Err(DocError::Shape(format!(
                "tiling is {}x{} but has {} cells",
                self.width,
                self.height,
                self.cells.len()
            )));
        }
        Ok(Tiling {
            width: self.width,
            height: self.height,
            cells: self.cells.iter().map(|&c| TileId(c)).collect(),
            tileset_hash: self.tileset_hash.clone(),
            seed: self.seed,
        })
    }
}

/// A tiling document with the chunk address and the brush epoch it was
/// generated under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkDoc {
    pub a: u32,
    pub b: u32,
    pub brush_epoch: u64,
    #[serde(flatten)]
    pub tiling: TilingDoc,
}

impl From<&Chunk> for ChunkDoc {
    fn from(c: &Chunk) -> Self {
        Self { a: c.a, b: c.b, brush_epoch: c.brush_epoch, tiling: TilingDoc::from(&c.tiling) }
    }
}

impl ChunkDoc {
    pub fn to_chunk(&self) -> Result<Chunk, DocError> {
        Ok(Chunk { a: self.a, b: self.b, brush_epoch: self.brush_epoch, tiling: self.tiling.to_tiling()? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestDoc {
    pub world_seed: u64,
    #[serde(rename = "C")]
    pub chunk: usize,
    pub tileset_hash: String,
    pub chunks: Vec<[u32; 2]>,
}

impl ManifestDoc {
    /// Chunk keys are listed in generation order.
    pub fn new(config: &WorldConfig, order: &[(u32, u32)]) -> Self {
        Self {
            world_seed: config.world_seed,
            chunk: config.chunk_size,
            tileset_hash: config.tileset_hash.clone(),
            chunks: order.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn config(&self) -> WorldConfig {
        WorldConfig { world_seed: self.world_seed, chunk_size: self.chunk, tileset_hash: self.tileset_hash.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectDoc {
    pub m0: u32,
    pub n0: u32,
    pub m1: u32,
    pub n1: u32,
}

impl RectDoc {
    pub fn to_rect(self) -> Result<CellRect, BrushError> {
        CellRect::new(self.m0, self.n0, self.m1, self.n1)
    }
}

impl From<CellRect> for RectDoc {
    fn from(r: CellRect) -> Self {
        Self { m0: r.m0, n0: r.n0, m1: r.m1, n1: r.n1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeDoc {
    #[serde(flatten)]
    pub rect: RectDoc,
    pub mul: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub tag: String,
    #[serde(rename = "default", default = "unit_weight")]
    pub default_multiplier: f64,
    #[serde(default)]
    pub strokes: Vec<StrokeDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BrushDoc {
    pub layers: Vec<LayerDoc>,
}

impl BrushDoc {
    pub fn from_field(wf: &WeightField) -> Self {
        let layers = wf
            .layers()
            .iter()
            .map(|l| LayerDoc {
                tag: l.tag.clone(),
                default_multiplier: l.default_multiplier,
                strokes: l.strokes.iter().map(|s| StrokeDoc { rect: s.rect.into(), mul: s.multiplier }).collect(),
            })
            .collect();
        Self { layers }
    }

    pub fn to_field(&self) -> Result<WeightField, DocError> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let mut layer = BrushLayer::new(l.tag.clone(), l.default_multiplier)?;
            for s in &l.strokes {
                layer.strokes.push(Stroke { rect: s.rect.to_rect()?, multiplier: s.mul });
            }
            layers.push(layer);
        }
        Ok(WeightField::from_layers(layers)?)
    }
}

pub fn parse_brush(json: &str) -> Result<WeightField, DocError> {
    serde_json::from_str::<BrushDoc>(json)?.to_field()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub subgrids: u64,
    pub interior_backtracks: u64,
    pub exterior_retries: u64,
    pub elapsed_ns: u64,
}

impl From<&GenerateStats> for StatsDoc {
    fn from(s: &GenerateStats) -> Self {
        Self {
            subgrids: s.subgrids,
            interior_backtracks: s.interior_backtracks,
            exterior_retries: s.exterior_retries,
            elapsed_ns: s.elapsed_ns,
        }
    }
}

/// A coverage report with edge ids replaced by their names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageDoc {
    pub tileset: String,
    pub tiles: usize,
    pub complete: bool,
    pub sub_complete: bool,
    pub missing_ns_pairs: Vec<[String; 2]>,
    pub missing_we_pairs: Vec<[String; 2]>,
    pub missing_nw_pairs: Vec<[String; 2]>,
    pub missing_se_pairs: Vec<[String; 2]>,
    pub missing_quadruples: usize,
}

impl CoverageDoc {
    pub fn new(ts: &Tileset, report: &CoverageReport) -> Self {
        let (ns, we) = (ts.ens(), ts.ewe());
        let pairs = |list: &[(nwfc_core::EdgeId, nwfc_core::EdgeId)],
                     first: &nwfc_core::EdgeSet,
                     second: &nwfc_core::EdgeSet| {
            list.iter().map(|&(x, y)| [first.name(x).to_owned(), second.name(y).to_owned()]).collect()
        };
        Self {
            tileset: ts.name().to_owned(),
            tiles: ts.len(),
            complete: report.complete,
            sub_complete: report.sub_complete,
            missing_ns_pairs: pairs(&report.missing_ns_pairs, ns, ns),
            missing_we_pairs: pairs(&report.missing_we_pairs, we, we),
            missing_nw_pairs: pairs(&report.missing_nw_pairs, ns, we),
            missing_se_pairs: pairs(&report.missing_se_pairs, ns, we),
            missing_quadruples: report.missing_full_quadruples.len(),
        }
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents always serialize")
}

pub fn to_compact<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("documents always serialize")
}
