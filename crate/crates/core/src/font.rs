//! 5x7 bitmap font and the character layout used on simulated plates.

/// Glyph width and height in font cells.
pub const GLYPH_COLS: usize = 5;
pub const GLYPH_ROWS: usize = 7;
/// Blank cells between neighbouring glyphs.
pub const GLYPH_SPACING: usize = 2;

/// Fraction of the plate length left blank at each side. Keeps glyph
/// corners out of the corner-refinement window around the plate corners.
pub const SIDE_MARGIN: f64 = 0.17;
/// Fraction of the plate height left blank above and below the text.
pub const TOP_MARGIN: f64 = 0.22;

pub const DIGITS: &str = "0123456789";
pub const ALPHANUMERIC: &str = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Row bitmaps, most significant of the low five bits is the left column.
pub fn glyph(c: char) -> Option<[u8; 7]> {
    Some(match c.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'A' => [0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        _ => return None,
    })
}

/// Text placed on a plate in normalized plate coordinates: `a` runs along
/// the plate length from the left edge (0) to the right edge (1), `b` from
/// the top edge (0) to the bottom edge (1).
#[derive(Debug, Clone)]
pub struct PlateLayout {
    glyphs: alloc::vec::Vec<Option<[u8; 7]>>,
    cell_a: f64,
    cell_b: f64,
}

impl PlateLayout {
    pub fn new(text: &str) -> Self {
        let glyphs: alloc::vec::Vec<_> = text.chars().map(glyph).collect();
        let n = glyphs.len().max(1);
        let cells = n * GLYPH_COLS + (n - 1) * GLYPH_SPACING;
        Self {
            glyphs,
            cell_a: (1.0 - 2.0 * SIDE_MARGIN) / cells as f64,
            cell_b: (1.0 - 2.0 * TOP_MARGIN) / GLYPH_ROWS as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    /// Whether the point `(a, b)` is covered by ink.
    pub fn ink_at(&self, a: f64, b: f64) -> bool {
        if a < SIDE_MARGIN || b < TOP_MARGIN {
            return false;
        }
        let col = ((a - SIDE_MARGIN) / self.cell_a) as usize;
        let row = ((b - TOP_MARGIN) / self.cell_b) as usize;
        if row >= GLYPH_ROWS {
            return false;
        }
        let pitch = GLYPH_COLS + GLYPH_SPACING;
        let (gi, gc) = (col / pitch, col % pitch);
        if gc >= GLYPH_COLS {
            return false;
        }
        match self.glyphs.get(gi) {
            Some(Some(rows)) => rows[row] & (0x10 >> gc) != 0,
            _ => false,
        }
    }

    /// Horizontal extent `[a0, a1)` of glyph `i`.
    pub fn glyph_span(&self, i: usize) -> (f64, f64) {
        let a0 = SIDE_MARGIN + (i * (GLYPH_COLS + GLYPH_SPACING)) as f64 * self.cell_a;
        (a0, a0 + GLYPH_COLS as f64 * self.cell_a)
    }

    /// Vertical extent `[b0, b1)` of the text line.
    pub fn text_rows(&self) -> (f64, f64) {
        (TOP_MARGIN, TOP_MARGIN + GLYPH_ROWS as f64 * self.cell_b)
    }
}
