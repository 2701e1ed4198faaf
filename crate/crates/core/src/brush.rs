//! Weight brushes: tag-scoped multiplier layers painted over global cell
//! coordinates.
//!
//! A tile's effective weight at a cell is its base weight times, for every
//! layer whose tag the tile carries, that layer's multiplier at the cell.
//! Inside a layer the last stroke covering a cell wins; uncovered cells read
//! the layer default. The solver uses effective weights both for the
//! weighted entropy that picks the next cell and for sampling the tile.

use alloc::string::String;
use alloc::vec::Vec;

use crate::tileset::Tile;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BrushError {
    #[error("multiplier must be positive and finite, got {0}")]
    NonPositiveMultiplier(f64),
    #[error("empty or out-of-range rectangle ({m0},{n0})..=({m1},{n1})")]
    EmptyRect { m0: u32, n0: u32, m1: u32, n1: u32 },
}

/// Inclusive rectangle of 1-based global cells, rows `m0..=m1` and columns
/// `n0..=n1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub m0: u32,
    pub n0: u32,
    pub m1: u32,
    pub n1: u32,
}

impl CellRect {
    pub fn new(m0: u32, n0: u32, m1: u32, n1: u32) -> Result<Self, BrushError> {
        if m0 == 0 || n0 == 0 || m0 > m1 || n0 > n1 {
            return Err(BrushError::EmptyRect { m0, n0, m1, n1 });
        }
        Ok(Self { m0, n0, m1, n1 })
    }

    #[inline]
    pub fn contains(&self, m: u32, n: u32) -> bool {
        (self.m0..=self.m1).contains(&m) && (self.n0..=self.n1).contains(&n)
    }

    fn intersects(&self, other: &CellRect) -> bool {
        self.m0 <= other.m1 && other.m0 <= self.m1 && self.n0 <= other.n1 && other.n0 <= self.n1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stroke {
    pub rect: CellRect,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrushLayer {
    pub tag: String,
    pub default_multiplier: f64,
    pub strokes: Vec<Stroke>,
}

fn check_multiplier(mul: f64) -> Result<(), BrushError> {
    if mul > 0.0 && mul.is_finite() {
        Ok(())
    } else {
        Err(BrushError::NonPositiveMultiplier(mul))
    }
}

impl BrushLayer {
    pub fn new(tag: impl Into<String>, default_multiplier: f64) -> Result<Self, BrushError> {
        check_multiplier(default_multiplier)?;
        Ok(Self { tag: tag.into(), default_multiplier, strokes: Vec::new() })
    }

    pub fn paint(&mut self, rect: CellRect, multiplier: f64) -> Result<(), BrushError> {
        check_multiplier(multiplier)?;
        CellRect::new(rect.m0, rect.n0, rect.m1, rect.n1)?;
        self.strokes.push(Stroke { rect, multiplier });
        Ok(())
    }

    /// Multiplier at a global cell: the last covering stroke, else the default.
    pub fn multiplier_at(&self, m: u32, n: u32) -> f64 {
        self.strokes.iter().rev().find(|s| s.rect.contains(m, n)).map_or(self.default_multiplier, |s| s.multiplier)
    }

    fn is_neutral_over(&self, area: &CellRect) -> bool {
        self.default_multiplier == 1.0 && self.strokes.iter().all(|s| s.multiplier == 1.0 || !s.rect.intersects(area))
    }
}

/// An immutable-by-convention snapshot of painted layers. Every successful
/// paint bumps [`WeightField::epoch`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightField {
    layers: Vec<BrushLayer>,
    epoch: u64,
}

impl WeightField {
    /// The neutral field: no layers, every multiplier 1.
    pub fn neutral() -> Self {
        Self::default()
    }

    pub fn from_layers(layers: Vec<BrushLayer>) -> Result<Self, BrushError> {
        for layer in &layers {
            check_multiplier(layer.default_multiplier)?;
            for s in &layer.strokes {
                check_multiplier(s.multiplier)?;
                CellRect::new(s.rect.m0, s.rect.n0, s.rect.m1, s.rect.n1)?;
            }
        }
        Ok(Self { layers, epoch: 0 })
    }

    pub fn layers(&self) -> &[BrushLayer] {
        &self.layers
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn add_layer(&mut self, layer: BrushLayer) -> Result<u64, BrushError> {
        check_multiplier(layer.default_multiplier)?;
        self.layers.push(layer);
        self.epoch += 1;
        Ok(self.epoch)
    }

    /// Paints a stroke on the layer for `tag`, creating a neutral layer if
    /// none exists. Returns the new epoch.
    pub fn paint(&mut self, tag: &str, rect: CellRect, multiplier: f64) -> Result<u64, BrushError> {
        check_multiplier(multiplier)?;
        let idx = match self.layers.iter().position(|l| l.tag == tag) {
            Some(i) => i,
            None => {
                self.layers.push(BrushLayer::new(tag, 1.0)?);
                self.layers.len() - 1
            }
        };
        self.layers[idx].paint(rect, multiplier)?;
        self.epoch += 1;
        Ok(self.epoch)
    }

    /// `tile.weight` times the multiplier of every layer whose tag the tile
    /// carries, read at global cell `(m, n)`.
    pub fn effective_weight(&self, m: u32, n: u32, tile: &Tile) -> f64 {
        self.layers.iter().filter(|l| tile.has_tag(&l.tag)).fold(tile.weight, |w, l| w * l.multiplier_at(m, n))
    }

    /// True when no layer changes any weight inside `area`.
    pub fn is_neutral_over(&self, area: &CellRect) -> bool {
        self.layers.iter().all(|l| l.is_neutral_over(area))
    }
}

/// Shannon entropy `-sum p ln p` of the distribution proportional to
/// `weights`. Every weight must be positive.
pub fn entropy(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let sum_wlnw: f64 = weights.iter().map(|&w| w * libm::log(w)).sum();
    entropy_from_sums(total, sum_wlnw)
}

/// `ln W - (sum w ln w) / W`, the same quantity from running sums.
#[inline]
pub fn entropy_from_sums(total: f64, sum_wlnw: f64) -> f64 {
    let h = libm::log(total) - sum_wlnw / total;
    // rounding can leave a singleton at -0.0 or a hair below zero
    if h < 0.0 {
        0.0
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(m0: u32, n0: u32, m1: u32, n1: u32) -> CellRect {
        CellRect::new(m0, n0, m1, n1).unwrap()
    }

    #[test]
    fn paint_records_stroke() {
        let mut layer = BrushLayer::new("city", 1.0).unwrap();
        layer.paint(rect(1, 1, 10, 10), 5.0).unwrap();
        assert_eq!(layer.strokes.len(), 1);
        assert_eq!(layer.multiplier_at(10, 10), 5.0);
        assert_eq!(layer.multiplier_at(11, 10), 1.0);
    }

    #[test]
    fn paint_rejects_bad_multipliers() {
        let mut layer = BrushLayer::new("city", 1.0).unwrap();
        assert_eq!(layer.paint(rect(1, 1, 2, 2), 0.0), Err(BrushError::NonPositiveMultiplier(0.0)));
        assert!(layer.paint(rect(1, 1, 2, 2), -1.0).is_err());
        assert!(layer.paint(rect(1, 1, 2, 2), f64::NAN).is_err());
        assert!(layer.strokes.is_empty());
        assert!(CellRect::new(3, 1, 2, 2).is_err());
        assert!(CellRect::new(0, 1, 2, 2).is_err());
    }

    #[test]
    fn last_stroke_wins() {
        let mut layer = BrushLayer::new("city", 1.0).unwrap();
        layer.paint(rect(1, 1, 4, 4), 2.0).unwrap();
        layer.paint(rect(3, 3, 6, 6), 0.5).unwrap();
        assert_eq!(layer.multiplier_at(2, 2), 2.0);
        assert_eq!(layer.multiplier_at(3, 4), 0.5);
        assert_eq!(layer.multiplier_at(6, 6), 0.5);
    }

    #[test]
    fn effective_weight_products() {
        let plain = Tile::new(0, 0, 0, 0);
        assert_eq!(WeightField::neutral().effective_weight(1, 1, &plain), 1.0);

        let mut wf = WeightField::neutral();
        wf.paint("city", rect(1, 1, 3, 3), 4.0).unwrap();
        let city = Tile::new(0, 0, 0, 0).with_weight(1.5).with_tags(["city"]);
        assert_eq!(wf.effective_weight(2, 2, &city), 6.0);
        assert_eq!(wf.effective_weight(5, 5, &city), 1.5);
        assert_eq!(wf.effective_weight(2, 2, &plain), 1.0);

        wf.paint("luxury", rect(2, 2, 2, 2), 0.5).unwrap();
        let lux = Tile::new(0, 0, 0, 0).with_weight(3.0).with_tags(["city", "luxury"]);
        assert_eq!(wf.effective_weight(2, 2, &lux), 2.0 * 3.0);
        assert_eq!(wf.epoch(), 2);
    }

    #[test]
    fn neutral_over_area() {
        let mut wf = WeightField::neutral();
        assert!(wf.is_neutral_over(&rect(1, 1, 100, 100)));
        wf.paint("city", rect(10, 10, 12, 12), 8.0).unwrap();
        assert!(wf.is_neutral_over(&rect(1, 1, 9, 9)));
        assert!(!wf.is_neutral_over(&rect(1, 1, 10, 10)));
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(&[1.0; 4]) - 4f64.ln()).abs() < 1e-12);
        assert!((entropy(&[1.3863]) - 0.0).abs() < 1e-15);
        let expected = -(0.25 * 0.25f64.ln() * 2.0 + 0.5 * 0.5f64.ln());
        assert!((entropy(&[1.0, 1.0, 2.0]) - expected).abs() < 1e-12);
        assert!((expected - 1.0397).abs() < 1e-4);
    }

    #[test]
    fn entropy_is_scale_invariant() {
        let w = [0.3, 1.7, 2.2, 5.0];
        let scaled: Vec<f64> = w.iter().map(|x| x * 13.0).collect();
        assert!((entropy(&w) - entropy(&scaled)).abs() < 1e-12);
    }
}
