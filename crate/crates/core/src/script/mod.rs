//! Script activities: parsing, CFG construction, inlining and the
//! abstract interpretation that computes an activity's mapping set.

pub mod analysis;
pub mod ast;
pub mod cfg;
pub mod config;
pub mod inline;
pub mod lexer;
pub mod parser;

pub use analysis::{analyze_script, transfer, AbstractState, Effects, Fixpoint, ScriptAnalyzer, WorklistPolicy};
pub use ast::{Expr, ScriptAst, Stmt, StmtKind};
pub use cfg::{build_cfg, Cfg};
pub use config::AnalyzerConfig;
pub use inline::inline_functions;
pub use parser::parse_script;

use crate::error::ScriptError;
use crate::model::ActivityAnalysis;

/// Parses, inlines to the configured depth, builds the CFG and analyzes.
pub fn analyze_source(text: &str, config: &AnalyzerConfig, activity: &str) -> Result<ActivityAnalysis, ScriptError> {
    let ast = inline_functions(&parse_script(text)?, config.inline_depth);
    ScriptAnalyzer::new(config, activity).analyze(&build_cfg(&ast))
}
