//! Single-pushout rewriting: rules, matching with negative application
//! conditions, rule application and bounded language enumeration.

mod apply;
mod grammar;
mod io;
mod matching;
mod rule;

pub use apply::{apply_rule, ApplyResult, ElementSet};
pub use grammar::{enumerate_language, GraphGrammar, Language};
pub use io::{parse_rule, serialize_rule, EmbedDoc, MapDoc, NacDoc, RuleDoc};
pub use matching::{check_nac, find_matches, find_matches_with, Match, MatchOptions, PartialAssignment};
pub use rule::{Mark, Nac, Rule, RuleBuilder};
