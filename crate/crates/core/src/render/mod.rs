//! SVG pages and the canonical layout file.

mod json;
mod svg;

pub use json::{fmt3, parse_layout_json, write_layout_json, write_value};
pub use svg::{render_page, render_svg};
