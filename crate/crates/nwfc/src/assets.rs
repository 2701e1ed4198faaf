//! Files compiled into the binary.

use nwfc_core::Tileset;

/// The built-in Carcassonne tileset document.
pub const CARCASSONNE_JSON: &str = include_str!("../assets/carcassonne.json");

/// The page served at `/`.
pub const INDEX_HTML: &str = include_str!("../assets/ui/index.html");

/// Parses [`CARCASSONNE_JSON`].
pub fn carcassonne() -> Tileset {
    crate::doc::parse_tileset(CARCASSONNE_JSON).expect("bundled tileset is valid")
}

#[cfg(test)]
mod tests {
    #[test]
    fn bundled_document_matches_core_table() {
        let parsed = super::carcassonne();
        let built = nwfc_core::tileset::carcassonne();
        assert_eq!(parsed, built);
        assert_eq!(parsed.content_hash(), built.content_hash());
    }
}
