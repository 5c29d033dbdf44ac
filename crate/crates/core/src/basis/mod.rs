pub mod engine;
pub mod eval;
pub mod gn;
pub mod table;

pub use engine::{eval_gn, eval_gn_generating, working_bits, Basis, Engine};
pub use eval::{generating, BasisEvaluator, GeneratingParams, KernelVariant, QuadParams, SquareNode};
pub use gn::{build_gn, default_order, GnFamily, GnForm, Parity};
pub use table::{BasisTable, TableHeader, TABLE_VERSION};
