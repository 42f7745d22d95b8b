pub mod cover;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod geom;
pub mod ingest;
pub mod num;
pub mod pipeline;
pub mod planner;
pub mod render;
pub mod rng;
pub mod rules;
pub mod typeset;

pub use error::{Error, ErrorClass, Result};
pub use num::Scalar;
pub use pipeline::{Book, Engine, JobRecord};
pub use planner::{Constraints, DesignSettings};
pub use rng::SeededStream;
pub use rules::{default_rules, load_rules, BookType, RuleSet};

pub type Rect = geom::Rect<f64>;
pub type Span = geom::Span<f64>;
pub type AttributeVector = evaluate::AttributeVector<f64>;
