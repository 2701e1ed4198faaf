use alloc::vec;
use alloc::vec::Vec;

use super::rules::{bits, Direction, Rules};
use super::{BoundaryError, BoundarySpec, CellPos, Contradiction};
use crate::brush::{entropy_from_sums, CellRect, WeightField};
use crate::rng::{self, SolverRng};
use crate::tileset::TileId;

/// Relative tolerance under which two entropies count as tied.
const ENTROPY_TIE: f64 = 1e-12;

/// Per-candidate `(w, w ln w)` pairs, shared by every cell when the brush
/// field is neutral over the wave.
#[derive(Debug, Clone)]
enum CellWeights {
    Shared(Vec<(f64, f64)>),
    PerCell { d: usize, table: Vec<(f64, f64)> },
}

impl CellWeights {
    #[inline]
    fn get(&self, cell: usize, tile: usize) -> (f64, f64) {
        match self {
            CellWeights::Shared(t) => t[tile],
            CellWeights::PerCell { d, table } => table[cell * d + tile],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Decision {
    trail_len: usize,
    cell: u32,
    tile: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Counters {
    pub collapses: u64,
    pub propagations: u64,
}

/// The solver's mutable state: one candidate bitset per cell plus the trail
/// that lets the search rewind to any earlier decision.
///
/// Cells are addressed 1-based as `(row, col)`; storage is row-major.
#[derive(Debug, Clone)]
pub struct Wave<'r> {
    rules: &'r Rules<'r>,
    width: usize,
    height: usize,
    words: usize,
    domains: Vec<u64>,
    counts: Vec<u32>,
    weights: CellWeights,
    entropy: Vec<f64>,
    entropy_stale: Vec<bool>,
    // trail of (cell, previous domain); domains are saved at most once per
    // decision segment, keyed by a never-reused stamp
    trail_cells: Vec<u32>,
    trail_words: Vec<u64>,
    saved_stamp: Vec<u64>,
    stamp: u64,
    next_stamp: u64,
    decisions: Vec<Decision>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    scratch: Vec<u64>,
    pub(crate) counters: Counters,
}

impl<'r> Wave<'r> {
    /// A `width x height` wave with every domain equal to the full tileset
    /// and neutral brush weights.
    pub fn new(width: usize, height: usize, rules: &'r Rules<'r>) -> Result<Self, super::SolveError> {
        Self::with_weights(width, height, rules, &WeightField::neutral(), (0, 0))
    }

    /// Like [`Wave::new`], reading brush weights at global cell
    /// `(origin.0 + row, origin.1 + col)`.
    pub fn with_weights(
        width: usize,
        height: usize,
        rules: &'r Rules<'r>,
        field: &WeightField,
        origin: (u32, u32),
    ) -> Result<Self, super::SolveError> {
        if width == 0 || height == 0 {
            return Err(super::SolveError::EmptyGrid { width, height });
        }
        let d = rules.tile_count();
        let words = rules.words();
        let cells = width * height;
        let mut full = vec![u64::MAX; words];
        if !d.is_multiple_of(64) {
            full[words - 1] = (1u64 << (d % 64)) - 1;
        }
        let mut domains = Vec::with_capacity(cells * words);
        for _ in 0..cells {
            domains.extend_from_slice(&full);
        }
        let tiles = rules.tileset().tiles();
        let area =
            CellRect { m0: origin.0 + 1, n0: origin.1 + 1, m1: origin.0 + height as u32, n1: origin.1 + width as u32 };
        let pair = |w: f64| (w, w * libm::log(w));
        let weights = if field.is_neutral_over(&area) {
            CellWeights::Shared(tiles.iter().map(|t| pair(t.weight)).collect())
        } else {
            let mut table = Vec::with_capacity(cells * d);
            for r in 0..height as u32 {
                for c in 0..width as u32 {
                    for t in tiles {
                        table.push(pair(field.effective_weight(origin.0 + r + 1, origin.1 + c + 1, t)));
                    }
                }
            }
            CellWeights::PerCell { d, table }
        };
        Ok(Self {
            rules,
            width,
            height,
            words,
            domains,
            counts: vec![d as u32; cells],
            weights,
            entropy: vec![0.0; cells],
            entropy_stale: vec![true; cells],
            trail_cells: Vec::new(),
            trail_words: Vec::new(),
            saved_stamp: vec![0; cells],
            stamp: 0,
            next_stamp: 1,
            decisions: Vec::new(),
            queue: Vec::new(),
            queued: vec![false; cells],
            scratch: vec![0; words],
            counters: Counters::default(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rules(&self) -> &'r Rules<'r> {
        self.rules
    }

    fn index(&self, pos: CellPos) -> usize {
        assert!(
            pos.row >= 1 && pos.col >= 1 && pos.row as usize <= self.height && pos.col as usize <= self.width,
            "cell {pos:?} outside {}x{} wave",
            self.height,
            self.width
        );
        (pos.row as usize - 1) * self.width + (pos.col as usize - 1)
    }

    fn pos(&self, index: usize) -> CellPos {
        CellPos { row: (index / self.width) as u32 + 1, col: (index % self.width) as u32 + 1 }
    }

    fn domain_words(&self, cell: usize) -> &[u64] {
        &self.domains[cell * self.words..(cell + 1) * self.words]
    }

    /// Candidate tiles of a cell, ascending.
    pub fn domain(&self, pos: CellPos) -> Vec<TileId> {
        bits(self.domain_words(self.index(pos))).map(|t| TileId(t as u32)).collect()
    }

    /// Number of candidates of a cell.
    pub fn domain_len(&self, pos: CellPos) -> usize {
        self.counts[self.index(pos)] as usize
    }

    pub fn is_collapsed(&self, pos: CellPos) -> bool {
        self.domain_len(pos) == 1
    }

    pub fn is_fully_collapsed(&self) -> bool {
        self.counts.iter().all(|&c| c == 1)
    }

    /// Number of open decisions (the backtracking depth).
    pub fn depth(&self) -> usize {
        self.decisions.len()
    }

    /// Replaces a cell's domain with `keep & domain`, logging the old domain
    /// on the trail. Returns whether anything changed.
    fn restrict(&mut self, cell: usize, keep: &[u64]) -> bool {
        let words = self.words;
        let range = cell * words..(cell + 1) * words;
        let changed = self.domains[range.clone()].iter().zip(keep).any(|(d, k)| d & !k != 0);
        if !changed {
            return false;
        }
        if !self.decisions.is_empty() && self.saved_stamp[cell] != self.stamp {
            self.saved_stamp[cell] = self.stamp;
            self.trail_cells.push(cell as u32);
            self.trail_words.extend_from_slice(&self.domains[range.clone()]);
        }
        let mut count = 0;
        for (d, k) in self.domains[range].iter_mut().zip(keep) {
            *d &= *k;
            count += d.count_ones();
        }
        self.counts[cell] = count;
        self.entropy_stale[cell] = true;
        true
    }

    fn rewind_trail(&mut self, len: usize) {
        let words = self.words;
        while self.trail_cells.len() > len {
            let cell = self.trail_cells.pop().expect("len checked") as usize;
            let from = self.trail_words.len() - words;
            let dst = &mut self.domains[cell * words..(cell + 1) * words];
            dst.copy_from_slice(&self.trail_words[from..]);
            self.counts[cell] = dst.iter().map(|w| w.count_ones()).sum();
            self.trail_words.truncate(from);
            self.entropy_stale[cell] = true;
        }
    }

    /// Weighted Shannon entropy of a cell's candidates.
    pub fn entropy(&mut self, pos: CellPos) -> f64 {
        let i = self.index(pos);
        self.cell_entropy(i)
    }

    fn cell_entropy(&mut self, cell: usize) -> f64 {
        if self.entropy_stale[cell] {
            let (mut total, mut wlnw) = (0.0, 0.0);
            for t in bits(&self.domains[cell * self.words..(cell + 1) * self.words]) {
                let (w, l) = self.weights.get(cell, t);
                total += w;
                wlnw += l;
            }
            self.entropy[cell] = entropy_from_sums(total, wlnw);
            self.entropy_stale[cell] = false;
        }
        self.entropy[cell]
    }

    /// Effective weight of `tile` at `pos` (base weight times brush layers).
    pub fn weight(&self, pos: CellPos, tile: TileId) -> f64 {
        self.weights.get(self.index(pos), tile.index()).0
    }

    /// The uncollapsed cell with the lowest weighted entropy, ties going to
    /// the first cell in row-major order. `None` once every cell is
    /// collapsed.
    pub fn observe(&mut self) -> Option<CellPos> {
        let mut best: Option<(usize, f64)> = None;
        for cell in 0..self.counts.len() {
            if self.counts[cell] <= 1 {
                continue;
            }
            let h = self.cell_entropy(cell);
            match best {
                Some((_, bh)) if h >= bh - ENTROPY_TIE * bh.abs().max(1.0) => {}
                _ => best = Some((cell, h)),
            }
        }
        best.map(|(cell, _)| self.pos(cell))
    }

    /// Picks one candidate of `pos` with probability proportional to its
    /// effective weight, opens a decision and reduces the cell to it.
    pub fn collapse(&mut self, pos: CellPos, rng: &mut SolverRng) -> Result<TileId, Contradiction> {
        let cell = self.index(pos);
        let tile = self.sample(cell, rng).ok_or(Contradiction { cell: pos })?;
        self.decide(cell, tile);
        Ok(TileId(tile as u32))
    }

    fn sample(&self, cell: usize, rng: &mut SolverRng) -> Option<usize> {
        let dom = &self.domains[cell * self.words..(cell + 1) * self.words];
        let total: f64 = bits(dom).map(|t| self.weights.get(cell, t).0).sum();
        let mut last = None;
        if total <= 0.0 {
            return None;
        }
        let mut r = rng::unit_f64(rng) * total;
        for t in bits(dom) {
            let w = self.weights.get(cell, t).0;
            last = Some(t);
            if r < w {
                return Some(t);
            }
            r -= w;
        }
        // float slack: fall back to the last candidate
        last
    }

    fn decide(&mut self, cell: usize, tile: usize) {
        self.decisions.push(Decision { trail_len: self.trail_cells.len(), cell: cell as u32, tile: tile as u32 });
        self.stamp = self.fresh_stamp();
        self.counters.collapses += 1;
        let mut single = vec![0u64; self.words];
        single[tile / 64] = 1 << (tile % 64);
        self.restrict(cell, &single);
    }

    /// Runs AC-3 from `from` to a fixed point. A neighbour keeps a tile only
    /// if some candidate of the adjacent cell exposes the matching edge.
    pub fn propagate(&mut self, from: CellPos) -> Result<(), Contradiction> {
        let cell = self.index(from);
        self.enqueue(cell);
        self.run_queue()
    }

    fn enqueue(&mut self, cell: usize) {
        if !self.queued[cell] {
            self.queued[cell] = true;
            self.queue.push(cell as u32);
        }
    }

    fn clear_queue(&mut self) {
        for &c in &self.queue {
            self.queued[c as usize] = false;
        }
        self.queue.clear();
    }

    fn neighbour(&self, cell: usize, dir: Direction) -> Option<usize> {
        let (r, c) = (cell / self.width, cell % self.width);
        match dir {
            Direction::North if r > 0 => Some(cell - self.width),
            Direction::South if r + 1 < self.height => Some(cell + self.width),
            Direction::West if c > 0 => Some(cell - 1),
            Direction::East if c + 1 < self.width => Some(cell + 1),
            _ => None,
        }
    }

    fn run_queue(&mut self) -> Result<(), Contradiction> {
        let words = self.words;
        let mut scratch = core::mem::take(&mut self.scratch);
        let mut head = 0;
        let result = 'scan: loop {
            if head == self.queue.len() {
                break Ok(());
            }
            let cell = self.queue[head] as usize;
            head += 1;
            self.queued[cell] = false;
            for dir in Direction::ALL {
                let Some(nb) = self.neighbour(cell, dir) else { continue };
                self.counters.propagations += 1;
                self.rules.supported(&self.domains[cell * words..(cell + 1) * words], dir, &mut scratch);
                if self.restrict(nb, &scratch) {
                    if self.counts[nb] == 0 {
                        break 'scan Err(Contradiction { cell: self.pos(nb) });
                    }
                    self.enqueue(nb);
                }
            }
            // compact the queue now and then so it does not grow unbounded
            if head > 1024 && head * 2 > self.queue.len() {
                self.queue.drain(..head);
                head = 0;
            }
        };
        self.scratch = scratch;
        if result.is_err() {
            self.clear_queue();
        } else {
            self.queue.clear();
        }
        result
    }

    /// Pins the boundary cells and propagates. Must be applied before any
    /// decision is made.
    pub fn apply_boundary(&mut self, boundary: &BoundarySpec) -> Result<(), BoundaryError> {
        let d = self.rules.tile_count() as u32;
        if let Some(row) = &boundary.north_row {
            if row.len() != self.width {
                return Err(BoundaryError::NorthLength { expected: self.width, got: row.len() });
            }
        }
        if let Some(col) = &boundary.west_col {
            if col.len() != self.height {
                return Err(BoundaryError::WestLength { expected: self.height, got: col.len() });
            }
        }
        let pinned: Vec<(CellPos, TileId)> = boundary
            .north_row
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, &t)| (CellPos { row: 1, col: i as u32 + 1 }, t))
            .chain(
                boundary
                    .west_col
                    .iter()
                    .flatten()
                    .enumerate()
                    .map(|(i, &t)| (CellPos { row: i as u32 + 1, col: 1 }, t)),
            )
            .collect();
        if let Some(&(_, t)) = pinned.iter().find(|(_, t)| t.0 >= d) {
            return Err(BoundaryError::UnknownTile(t));
        }
        if let (Some(row), Some(col)) = (&boundary.north_row, &boundary.west_col) {
            if row[0] != col[0] {
                return Err(BoundaryError::CornerConflict { north: row[0], west: col[0] });
            }
        }
        let mut single = vec![0u64; self.words];
        for &(pos, t) in &pinned {
            let cell = self.index(pos);
            single.fill(0);
            single[t.index() / 64] = 1 << (t.index() % 64);
            self.restrict(cell, &single);
            if self.counts[cell] == 0 {
                self.clear_queue();
                return Err(BoundaryError::Contradiction(Contradiction { cell: pos }));
            }
            self.enqueue(cell);
        }
        self.run_queue().map_err(BoundaryError::Contradiction)
    }

    /// Revises every cell once, which makes the untouched parts of a fresh
    /// wave arc consistent. Tiles whose edge never appears on the opposite
    /// side of any tile get removed here. A no-op for closed rule sets.
    pub fn settle(&mut self) -> Result<(), Contradiction> {
        if self.rules.closed() {
            return Ok(());
        }
        for cell in 0..self.counts.len() {
            self.enqueue(cell);
        }
        self.run_queue()
    }

    /// Undoes the latest decision, removes the tile it tried from that cell
    /// and propagates the removal. Returns the cell, or `None` when no
    /// decision is left to undo (the search space is exhausted).
    pub(crate) fn backtrack_once(&mut self) -> Option<Result<CellPos, Contradiction>> {
        let (pos, tile) = self.undo_decision()?;
        let cell = self.index(pos);
        let mut keep = vec![u64::MAX; self.words];
        keep[tile.index() / 64] &= !(1u64 << (tile.index() % 64));
        self.restrict(cell, &keep);
        if self.counts[cell] == 0 {
            return Some(Err(Contradiction { cell: pos }));
        }
        Some(self.propagate(pos).map(|_| pos))
    }

    /// Rewinds every domain to the moment before the latest decision and
    /// returns that decision's cell and tile.
    pub fn undo_decision(&mut self) -> Option<(CellPos, TileId)> {
        let dec = self.decisions.pop()?;
        self.clear_queue();
        self.rewind_trail(dec.trail_len);
        self.stamp = if self.decisions.is_empty() { 0 } else { self.fresh_stamp() };
        Some((self.pos(dec.cell as usize), TileId(dec.tile)))
    }

    // A reused stamp could skip a needed save; a fresh one at worst saves a
    // cell twice in one segment, which still rewinds correctly.
    fn fresh_stamp(&mut self) -> u64 {
        let s = self.next_stamp;
        self.next_stamp += 1;
        s
    }

    /// Reads the collapsed grid row-major. `None` if any cell is still open.
    pub fn cells(&self) -> Option<Vec<TileId>> {
        (0..self.counts.len())
            .map(|c| (self.counts[c] == 1).then(|| TileId(bits(self.domain_words(c)).next().expect("count 1") as u32)))
            .collect()
    }

    /// Snapshot of every domain, for tests and diagnostics.
    pub fn snapshot(&self) -> Vec<Vec<TileId>> {
        (0..self.counts.len()).map(|c| bits(self.domain_words(c)).map(|t| TileId(t as u32)).collect()).collect()
    }

    /// Overwrites a cell's domain without propagating or recording a
    /// decision. Intended for tests that inject inconsistent states.
    #[doc(hidden)]
    pub fn force_domain(&mut self, pos: CellPos, tiles: &[TileId]) {
        let cell = self.index(pos);
        let words = self.words;
        let dst = &mut self.domains[cell * words..(cell + 1) * words];
        dst.fill(0);
        for t in tiles {
            dst[t.index() / 64] |= 1 << (t.index() % 64);
        }
        self.counts[cell] = tiles.len() as u32;
        self.entropy_stale[cell] = true;
    }
}
