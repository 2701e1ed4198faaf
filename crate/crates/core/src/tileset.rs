//! Tiles, edge sets and tileset-level properties.
//!
//! A tile is the 4-tuple of its edges `(n, s, w, e)`; north/south edges come
//! from the north-south edge set and west/east edges from the west-east edge
//! set. Edge names are strings at the boundary of the crate and dense
//! [`EdgeId`]s internally, numbered by their position in the edge set.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::rng;

/// Which pair of opposite sides an edge set applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    NorthSouth,
    WestEast,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::NorthSouth => f.write_str("north-south"),
            Axis::WestEast => f.write_str("west-east"),
        }
    }
}

/// Dense index of an edge inside its [`EdgeSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u16);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a tile inside its [`Tileset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileId(pub u32);

impl TileId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TilesetError {
    #[error("the {0} edge set is empty")]
    EmptyEdgeSet(Axis),
    #[error("edge `{name}` appears twice in the {axis} edge set")]
    DuplicateEdge { axis: Axis, name: String },
    #[error("unknown {axis} edge `{name}`")]
    UnknownEdge { axis: Axis, name: String },
    #[error("tile {tile} references {axis} edge id {edge} outside the edge set")]
    EdgeOutOfRange { tile: usize, axis: Axis, edge: u16 },
    #[error("tile {tile} has non-positive weight {weight}")]
    NonPositiveWeight { tile: usize, weight: f64 },
    #[error("tileset has no tiles")]
    EmptyTileList,
    #[error("tile {tile} duplicates tile {first} (same edges and tags)")]
    DuplicateTile { tile: usize, first: usize },
    #[error("canonical tilesets need at least 2 edges per axis, got {0}")]
    TooFewEdges(usize),
    #[error("requested {requested} extra tiles but only {available} distinct quadruples remain")]
    TooManyExtras { requested: usize, available: usize },
    #[error("rotation needs identical edge names on both axes")]
    AxisMismatch,
}

/// An ordered set of distinct edge names for one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    axis: Axis,
    names: Vec<String>,
}

impl EdgeSet {
    pub fn new<I, S>(axis: Axis, names: I) -> Result<Self, TilesetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(TilesetError::EmptyEdgeSet(axis));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(TilesetError::DuplicateEdge { axis, name: name.clone() });
            }
        }
        assert!(names.len() <= u16::MAX as usize, "edge set too large");
        Ok(Self { axis, names })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: EdgeId) -> &str {
        &self.names[id.index()]
    }

    pub fn id_of(&self, name: &str) -> Option<EdgeId> {
        self.names.iter().position(|n| n == name).map(|i| EdgeId(i as u16))
    }

    pub fn ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.names.len()).map(|i| EdgeId(i as u16))
    }

    fn resolve(&self, name: &str) -> Result<EdgeId, TilesetError> {
        self.id_of(name).ok_or_else(|| TilesetError::UnknownEdge { axis: self.axis, name: name.to_string() })
    }
}

/// A tile: four edges, a sampling weight and a set of design tags.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub n: EdgeId,
    pub s: EdgeId,
    pub w: EdgeId,
    pub e: EdgeId,
    pub weight: f64,
    pub tags: BTreeSet<String>,
}

impl Tile {
    pub fn new(n: u16, s: u16, w: u16, e: u16) -> Self {
        Self { n: EdgeId(n), s: EdgeId(s), w: EdgeId(w), e: EdgeId(e), weight: 1.0, tags: BTreeSet::new() }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }

    /// `(n, s, w, e)` as raw ids.
    pub fn edges(&self) -> [u16; 4] {
        [self.n.0, self.s.0, self.w.0, self.e.0]
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    fn same_record(&self, other: &Tile) -> bool {
        self.edges() == other.edges() && self.tags == other.tags
    }
}

/// A tile described by edge names, as found in tileset documents.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTile {
    pub n: String,
    pub s: String,
    pub w: String,
    pub e: String,
    pub weight: f64,
    pub tags: BTreeSet<String>,
}

impl NamedTile {
    pub fn new(n: &str, s: &str, w: &str, e: &str) -> Self {
        Self { n: n.into(), s: s.into(), w: w.into(), e: e.into(), weight: 1.0, tags: BTreeSet::new() }
    }
}

/// A validated, immutable tileset.
#[derive(Debug, Clone, PartialEq)]
pub struct Tileset {
    name: String,
    ens: EdgeSet,
    ewe: EdgeSet,
    tiles: Vec<Tile>,
}

impl Tileset {
    pub fn new(name: impl Into<String>, ens: EdgeSet, ewe: EdgeSet, tiles: Vec<Tile>) -> Result<Self, TilesetError> {
        if tiles.is_empty() {
            return Err(TilesetError::EmptyTileList);
        }
        assert!(tiles.len() <= u32::MAX as usize, "tileset too large");
        for (i, t) in tiles.iter().enumerate() {
            for (axis, set, edge) in [
                (Axis::NorthSouth, &ens, t.n),
                (Axis::NorthSouth, &ens, t.s),
                (Axis::WestEast, &ewe, t.w),
                (Axis::WestEast, &ewe, t.e),
            ] {
                if edge.index() >= set.len() {
                    return Err(TilesetError::EdgeOutOfRange { tile: i, axis, edge: edge.0 });
                }
            }
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(TilesetError::NonPositiveWeight { tile: i, weight: t.weight });
            }
            if let Some(first) = tiles[..i].iter().position(|u| u.same_record(t)) {
                return Err(TilesetError::DuplicateTile { tile: i, first });
            }
        }
        Ok(Self { name: name.into(), ens, ewe, tiles })
    }

    /// Builds a tileset from edge names, resolving every tile edge.
    pub fn from_named<I>(
        name: impl Into<String>,
        ns_names: &[&str],
        we_names: &[&str],
        tiles: I,
    ) -> Result<Self, TilesetError>
    where
        I: IntoIterator<Item = NamedTile>,
    {
        let ens = EdgeSet::new(Axis::NorthSouth, ns_names.iter().copied())?;
        let ewe = EdgeSet::new(Axis::WestEast, we_names.iter().copied())?;
        let tiles = tiles
            .into_iter()
            .map(|t| {
                Ok(Tile {
                    n: ens.resolve(&t.n)?,
                    s: ens.resolve(&t.s)?,
                    w: ewe.resolve(&t.w)?,
                    e: ewe.resolve(&t.e)?,
                    weight: t.weight,
                    tags: t.tags,
                })
            })
            .collect::<Result<Vec<_>, TilesetError>>()?;
        Self::new(name, ens, ewe, tiles)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ens(&self) -> &EdgeSet {
        &self.ens
    }

    pub fn ewe(&self) -> &EdgeSet {
        &self.ewe
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn tile(&self, id: TileId) -> &Tile {
        &self.tiles[id.index()]
    }

    /// Tile count `d`.
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TileId> {
        (0..self.tiles.len() as u32).map(TileId)
    }

    /// The tile index of the first tile with exactly these edges.
    pub fn find(&self, n: u16, s: u16, w: u16, e: u16) -> Option<TileId> {
        self.tiles.iter().position(|t| t.edges() == [n, s, w, e]).map(|i| TileId(i as u32))
    }

    /// A copy without the tile at `id`. Fails if that leaves no tiles.
    pub fn without(&self, id: TileId) -> Result<Tileset, TilesetError> {
        let mut tiles = self.tiles.clone();
        tiles.remove(id.index());
        Tileset::new(self.name.clone(), self.ens.clone(), self.ewe.clone(), tiles)
    }

    /// Lowercase hex SHA-256 over edge names and tile records. The display
    /// name is not part of the digest.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"nwfc-tileset-v1\0");
        for set in [&self.ens, &self.ewe] {
            h.update((set.len() as u32).to_le_bytes());
            for name in set.names() {
                h.update((name.len() as u32).to_le_bytes());
                h.update(name.as_bytes());
            }
        }
        h.update((self.tiles.len() as u32).to_le_bytes());
        for t in &self.tiles {
            for edge in t.edges() {
                h.update(edge.to_le_bytes());
            }
            h.update(t.weight.to_bits().to_le_bytes());
            h.update((t.tags.len() as u32).to_le_bytes());
            for tag in &t.tags {
                h.update((tag.len() as u32).to_le_bytes());
                h.update(tag.as_bytes());
            }
        }
        let digest = h.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest.iter() {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Scans the four pair projections and the full quadruple space.
    pub fn check_coverage(&self) -> CoverageReport {
        let ks = self.ens.len();
        let kw = self.ewe.len();
        let mut ns = alloc::vec![false; ks * ks];
        let mut we = alloc::vec![false; kw * kw];
        let mut nw = alloc::vec![false; ks * kw];
        let mut se = alloc::vec![false; ks * kw];
        let mut quad = alloc::vec![false; ks * ks * kw * kw];
        for t in &self.tiles {
            let (n, s, w, e) = (t.n.index(), t.s.index(), t.w.index(), t.e.index());
            ns[n * ks + s] = true;
            we[w * kw + e] = true;
            nw[n * kw + w] = true;
            se[s * kw + e] = true;
            quad[((n * ks + s) * kw + w) * kw + e] = true;
        }
        let missing = |seen: &[bool], cols: usize| -> Vec<(EdgeId, EdgeId)> {
            seen.iter()
                .enumerate()
                .filter(|(_, hit)| !**hit)
                .map(|(i, _)| (EdgeId((i / cols) as u16), EdgeId((i % cols) as u16)))
                .collect()
        };
        let missing_full_quadruples: Vec<[EdgeId; 4]> = quad
            .iter()
            .enumerate()
            .filter(|(_, hit)| !**hit)
            .map(|(i, _)| {
                let e = i % kw;
                let w = (i / kw) % kw;
                let s = (i / (kw * kw)) % ks;
                let n = i / (kw * kw * ks);
                [EdgeId(n as u16), EdgeId(s as u16), EdgeId(w as u16), EdgeId(e as u16)]
            })
            .collect();
        let missing_ns_pairs = missing(&ns, ks);
        let missing_we_pairs = missing(&we, kw);
        let missing_nw_pairs = missing(&nw, kw);
        let missing_se_pairs = missing(&se, kw);
        let sub_complete = missing_ns_pairs.is_empty()
            && missing_we_pairs.is_empty()
            && missing_nw_pairs.is_empty()
            && missing_se_pairs.is_empty();
        CoverageReport {
            complete: missing_full_quadruples.is_empty(),
            sub_complete,
            missing_ns_pairs,
            missing_we_pairs,
            missing_nw_pairs,
            missing_se_pairs,
            missing_full_quadruples,
        }
    }

    /// Adds the four rotations of every tile, `(n,s,w,e) -> (e,w,n,s)`,
    /// identifying edges across axes by name. Rotations inherit weight and
    /// tags; records already present are not repeated.
    pub fn expand_rotations(&self) -> Result<Tileset, TilesetError> {
        let ns_names: BTreeSet<&str> = self.ens.names().iter().map(String::as_str).collect();
        let we_names: BTreeSet<&str> = self.ewe.names().iter().map(String::as_str).collect();
        if ns_names != we_names {
            return Err(TilesetError::AxisMismatch);
        }
        let we_to_ns: Vec<EdgeId> =
            self.ewe.names().iter().map(|n| self.ens.id_of(n).expect("checked name sets")).collect();
        let ns_to_we: Vec<EdgeId> =
            self.ens.names().iter().map(|n| self.ewe.id_of(n).expect("checked name sets")).collect();
        let mut tiles: Vec<Tile> = Vec::with_capacity(self.tiles.len() * 4);
        for tile in &self.tiles {
            let mut cur = tile.clone();
            for _ in 0..4 {
                if !tiles.iter().any(|t| t.same_record(&cur)) {
                    tiles.push(cur.clone());
                }
                cur = Tile {
                    n: we_to_ns[cur.e.index()],
                    s: we_to_ns[cur.w.index()],
                    w: ns_to_we[cur.n.index()],
                    e: ns_to_we[cur.s.index()],
                    weight: cur.weight,
                    tags: cur.tags.clone(),
                };
            }
        }
        Tileset::new(self.name.clone(), self.ens.clone(), self.ewe.clone(), tiles)
    }
}

/// Which edge combinations a tileset covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub complete: bool,
    pub sub_complete: bool,
    /// Uncovered `(e_n, e_s)` pairs.
    pub missing_ns_pairs: Vec<(EdgeId, EdgeId)>,
    /// Uncovered `(e_w, e_e)` pairs.
    pub missing_we_pairs: Vec<(EdgeId, EdgeId)>,
    /// Uncovered `(e_n, e_w)` pairs.
    pub missing_nw_pairs: Vec<(EdgeId, EdgeId)>,
    /// Uncovered `(e_s, e_e)` pairs.
    pub missing_se_pairs: Vec<(EdgeId, EdgeId)>,
    /// Uncovered `(e_n, e_s, e_w, e_e)` quadruples.
    pub missing_full_quadruples: Vec<[EdgeId; 4]>,
}

fn index_names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

/// The reproducible sub-complete tileset used by the benchmarks.
///
/// Both axes use edges `e0..e{k-1}`. The base is the `k^2` tiles
/// `(i, j, j, i)`, the smallest possible sub-complete set. `extra` further
/// distinct quadruples are drawn uniformly from the rest of the quadruple
/// space using `seed`.
pub fn canonical_sub_complete(k: usize, extra: usize, seed: u64) -> Result<Tileset, TilesetError> {
    if k < 2 {
        return Err(TilesetError::TooFewEdges(k));
    }
    let names = index_names("e", k);
    let ens = EdgeSet::new(Axis::NorthSouth, names.iter().cloned())?;
    let ewe = EdgeSet::new(Axis::WestEast, names)?;
    let kk = k as u16;
    let mut tiles = Vec::with_capacity(k * k + extra);
    for i in 0..kk {
        for j in 0..kk {
            tiles.push(Tile::new(i, j, j, i));
        }
    }
    if extra > 0 {
        let total = k * k * k * k;
        let available = total - k * k;
        if extra > available {
            return Err(TilesetError::TooManyExtras { requested: extra, available });
        }
        let mut pool: Vec<[u16; 4]> = Vec::with_capacity(available);
        for n in 0..kk {
            for s in 0..kk {
                for w in 0..kk {
                    for e in 0..kk {
                        if !(s == w && n == e) {
                            pool.push([n, s, w, e]);
                        }
                    }
                }
            }
        }
        let mut r = rng::seeded(seed);
        for i in 0..extra {
            let j = i + rng::below(&mut r, (pool.len() - i) as u64) as usize;
            pool.swap(i, j);
            let [n, s, w, e] = pool[i];
            tiles.push(Tile::new(n, s, w, e));
        }
    }
    Tileset::new(format!("canonical-k{k}"), ens, ewe, tiles)
}

/// Edge names of the Carcassonne tileset, in id order.
pub const CARCASSONNE_EDGES: [&str; 4] = ["grass", "city", "path", "stream"];

/// The 28 `(n, s, w, e)` records of the built-in Carcassonne tileset.
pub const CARCASSONNE_TILES: [[u16; 4]; 28] = [
    [0, 0, 0, 0],
    [2, 0, 2, 0],
    [0, 0, 1, 1],
    [2, 2, 0, 0],
    [0, 1, 0, 1],
    [2, 1, 2, 1],
    [0, 0, 2, 2],
    [2, 2, 1, 1],
    [0, 2, 0, 2],
    [2, 2, 2, 2],
    [0, 0, 3, 3],
    [2, 2, 3, 3],
    [0, 3, 0, 3],
    [2, 3, 2, 3],
    [1, 1, 0, 0],
    [3, 3, 0, 0],
    [1, 0, 1, 0],
    [3, 0, 3, 0],
    [1, 1, 2, 2],
    [3, 3, 1, 1],
    [1, 1, 1, 1],
    [3, 1, 3, 1],
    [1, 1, 3, 3],
    [3, 3, 2, 2],
    [1, 2, 1, 2],
    [3, 2, 3, 2],
    [1, 3, 1, 3],
    [3, 3, 3, 3],
];

/// The built-in Carcassonne tileset. Every tile is tagged with the names of
/// the edge kinds it shows, so a `city` brush reaches every tile with a city
/// edge.
pub fn carcassonne() -> Tileset {
    let ens = EdgeSet::new(Axis::NorthSouth, CARCASSONNE_EDGES).expect("static edges");
    let ewe = EdgeSet::new(Axis::WestEast, CARCASSONNE_EDGES).expect("static edges");
    let tiles = CARCASSONNE_TILES
        .iter()
        .map(|&[n, s, w, e]| {
            let tags: BTreeSet<&str> = [n, s, w, e].iter().map(|&id| CARCASSONNE_EDGES[id as usize]).collect();
            Tile::new(n, s, w, e).with_tags(tags)
        })
        .collect();
    Tileset::new("carcassonne", ens, ewe, tiles).expect("static tileset")
}
