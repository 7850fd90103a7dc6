//! Pictures of the compiled garment: the time-needle bed as SVG and a
//! relaxed 2D preview of the stitch graph.
//!
//! Glyphs, drawn inside each stitch cell:
//!
//! | class         | op           | glyph                    |
//! |---------------|--------------|--------------------------|
//! | `knit`        | knit         | V                        |
//! | `purl`        | purl         | horizontal bar           |
//! | `tuck`        | tuck         | U                        |
//! | `miss`        | miss         | dashed low line          |
//! | `move-l/r`    | move         | arrow toward the target  |
//! | `cross-over`  | cross, over  | rising diagonal          |
//! | `cross-under` | cross, under | falling diagonal         |
//! | `cont`        | yarn tuck    | short dash               |

mod force;
mod svg;

pub use force::{force_layout, LayoutPreview, COURSE_PITCH, RIB_REST};
pub use svg::{glyph_class, render_svg, Face, Highlight, RenderOptions, View, Zoom};

#[cfg(test)]
mod tests;
