//! Font metrics, hyphenation, line breaking and pagination.

pub mod colophon;
pub mod hyphen;
pub mod layout;
pub mod linebreak;
pub mod metrics;
pub mod paginate;
pub mod style;
pub mod toc;
